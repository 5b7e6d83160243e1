//! Recognition tools: element-order spectra, Monte-Carlo simplicity, normal closures,
//! identification of alternating groups, regularity and the randomized search for
//! factors `H ≅ A_n`.
//!
//! `A_n` is recognized by order, simplicity and (for `n = 8`) the presence of an
//! element of order 15. The only simple group sharing its order with some `A_n`,
//! `n >= 5`, is PSL3(4) (order 20160 = |A8|), which has no element of order 15, so the
//! spectrum gate is needed for `n = 8` alone.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{enumerate_elements, GroupHandle};
use crate::chain::StabilizerChain;
use crate::error::{Error, Result};
use crate::factorize::{verify_in, VerifyOptions};
use crate::perm::Permutation;
use crate::BigCount;

/// Largest order for which an exhaustive spectrum is computed.
pub const SPECTRUM_CAP: u64 = 1_000_000;
pub const DEFAULT_SIMPLICITY_TRIALS: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectrumMode {
    Exhaustive,
    Sampled(usize),
}

/// Set of element orders. In sampled mode the result is only a subset of the spectrum.
pub fn order_spectrum<R: Rng + ?Sized>(chain: &StabilizerChain, mode: SpectrumMode, rng: &mut R) -> Result<BTreeSet<u64>> {
    match mode {
        SpectrumMode::Sampled(n) => Ok((0..n).map(|_| chain.random_element(rng).element_order()).collect()),
        SpectrumMode::Exhaustive => {
            if *chain.order() > BigUint::from(SPECTRUM_CAP) {
                return Err(Error::OverCap(chain.order().clone()));
            }
            let mut out = BTreeSet::new();
            let levels = chain.levels();
            let id = Permutation::identity(chain.degree());
            if levels.is_empty() {
                out.insert(1);
                return Ok(out);
            }
            spectrum_dfs(chain, levels.len() - 1, &id, &mut out);
            Ok(out)
        }
    }
}

/// Every element is uniquely `u_{m-1} ... u_1 u_0` with `u_i` a transversal element of
/// level `i`.
fn spectrum_dfs(chain: &StabilizerChain, level: usize, acc: &Permutation, out: &mut BTreeSet<u64>) {
    let lv = &chain.levels()[level];
    for i in 0..lv.orbit_len() {
        let next = acc.then(lv.rep_at(i));
        if level == 0 {
            out.insert(next.element_order());
        } else {
            spectrum_dfs(chain, level - 1, &next, out);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Simplicity {
    /// No proper normal closure was found in `trials` attempts.
    Passed { trials: usize },
    /// A proper nontrivial normal subgroup (verified) and its order.
    NotSimple { witness: Vec<Permutation>, order: BigCount },
}

impl Simplicity {
    pub fn passed(&self) -> bool {
        matches!(self, Simplicity::Passed { .. })
    }
}

/// Normal closure of `seeds` in the group generated by `g_gens` (which `g` is a chain
/// of). Stops early once the closure is all of `g` when `stop_at_whole` is set.
fn closure_in(g: &StabilizerChain, g_gens: &[Permutation], seeds: &[Permutation], extra: &[Permutation], stop_at_whole: bool) -> Result<StabilizerChain> {
    let mut start: Vec<Permutation> = seeds.to_vec();
    start.extend_from_slice(extra);
    let mut n = StabilizerChain::build(g.degree(), &start)?;
    let mut queue: Vec<Permutation> = start.into_iter().filter(|x| !x.is_identity()).collect();
    while let Some(x) = queue.pop() {
        if stop_at_whole && n.order() == g.order() {
            break;
        }
        for y in g_gens {
            let c = x.conjugate_by(y);
            if !n.contains(&c)? {
                n.extend(std::slice::from_ref(&c))?;
                queue.push(c);
            }
        }
    }
    Ok(n)
}

/// Smallest normal subgroup of `g` containing `seeds`.
pub fn normal_closure(g: &GroupHandle, seeds: &[Permutation]) -> Result<StabilizerChain> {
    for s in seeds {
        if !g.chain.contains(s)? {
            return Err(Error::NotSubgroup { what: "normal-closure seed".into() });
        }
    }
    closure_in(&g.chain, &g.gens, seeds, &[], false)
}

/// One-sided Monte-Carlo simplicity test: the normal closure of each of `trials`
/// random nonidentity elements must be the whole group. A returned witness is a proof.
pub fn is_simple_mc<R: Rng + ?Sized>(chain: &StabilizerChain, trials: usize, rng: &mut R) -> Result<Simplicity> {
    if chain.is_trivial() {
        return Err(Error::Precondition("simplicity test on the trivial group".into()));
    }
    let gens = chain.strong_generators();
    for _ in 0..trials.max(1) {
        let x = loop {
            let x = chain.random_element(rng);
            if !x.is_identity() {
                break x;
            }
        };
        // a few random conjugates of x lie in its normal closure and speed it up
        let extra: Vec<Permutation> = (0..3).map(|_| x.conjugate_by(&chain.random_element(rng))).collect();
        let n = closure_in(chain, gens, &[x], &extra, true)?;
        if n.order() != chain.order() {
            let witness = n.generators().to_vec();
            verify_witness(chain, &n)?;
            return Ok(Simplicity::NotSimple { witness, order: n.order().clone() });
        }
    }
    Ok(Simplicity::Passed { trials: trials.max(1) })
}

fn verify_witness(g: &StabilizerChain, n: &StabilizerChain) -> Result<()> {
    let ok_size = !n.is_trivial() && n.order() < g.order();
    let normal = n
        .generators()
        .iter()
        .all(|x| g.strong_generators().iter().all(|y| n.contains(&x.conjugate_by(y)).unwrap_or(false)));
    if ok_size && normal {
        Ok(())
    } else {
        Err(Error::CrossCheck("non-simplicity witness failed verification".into()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Overall {
    Accepted,
    Rejected,
    Indeterminate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimplicityCheck {
    pub passed: bool,
    pub trials: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumCheck {
    pub required: bool,
    /// `None` when the check was not required or not run.
    pub passed: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecognitionVerdict {
    /// Claimed family: `A_n` with this `n`.
    pub n: usize,
    pub order_matched: bool,
    pub simplicity: SimplicityCheck,
    pub spectrum: SpectrumCheck,
    pub overall: Overall,
}

pub fn alternating_order(n: usize) -> BigCount {
    (3..=n).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

/// Decides whether the group is `A_n` (see the module notes for the criteria).
pub fn recognize_alternating<R: Rng + ?Sized>(chain: &StabilizerChain, n: usize, rng: &mut R) -> Result<RecognitionVerdict> {
    recognize_alternating_with(chain, n, DEFAULT_SIMPLICITY_TRIALS, rng)
}

pub fn recognize_alternating_with<R: Rng + ?Sized>(chain: &StabilizerChain, n: usize, trials: usize, rng: &mut R) -> Result<RecognitionVerdict> {
    if n < 5 {
        return Err(Error::Precondition(format!("A_{n} recognition needs n >= 5")));
    }
    let mut v = RecognitionVerdict {
        n,
        order_matched: *chain.order() == alternating_order(n),
        simplicity: SimplicityCheck { passed: false, trials: 0 },
        spectrum: SpectrumCheck { required: n == 8, passed: None },
        overall: Overall::Rejected,
    };
    if !v.order_matched {
        return Ok(v);
    }
    let s = is_simple_mc(chain, trials, rng)?;
    v.simplicity = SimplicityCheck { passed: s.passed(), trials };
    if !s.passed() {
        return Ok(v);
    }
    if v.spectrum.required {
        let spectrum = order_spectrum(chain, SpectrumMode::Exhaustive, rng)?;
        v.spectrum.passed = Some(spectrum.contains(&15));
        if !spectrum.contains(&15) {
            return Ok(v);
        }
    }
    v.overall = Overall::Accepted;
    Ok(v)
}

/// Transitive with order equal to the degree.
pub fn is_regular(chain: &StabilizerChain) -> bool {
    chain.is_transitive() && *chain.order() == BigUint::from(chain.degree())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchRecipe {
    pub seed: u64,
    pub attempts: usize,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum AttemptOutcome {
    /// An element order does not divide `|A_n|`.
    ElementOrder { orders: [u64; 2] },
    /// `<a, b>` is larger than `A_n`.
    TooLarge,
    /// `<a, b>` has the wrong order.
    WrongOrder { order: String },
    /// Right order but not recognized as `A_n`.
    NotAlternating,
    /// Recognized, but `G = HK` fails.
    NoFactorization,
    Success,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub attempt: usize,
    #[serde(flatten)]
    pub outcome: AttemptOutcome,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchTranscript {
    pub seed: u64,
    pub n: usize,
    pub attempts_budget: usize,
    /// Set when `|A_n|` does not divide `|G|`, in which case no attempt is made.
    pub lagrange_excluded: bool,
    pub attempts: Vec<AttemptRecord>,
    pub success: Option<SearchSuccess>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchSuccess {
    pub attempt: usize,
    pub seed: u64,
    /// Generators in cycle notation.
    pub generators: Vec<String>,
}

/// Random generator for attempt `attempt` of a search seeded with `seed`.
pub fn attempt_rng(seed: u64, attempt: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(attempt as u64);
    rng
}

/// Runs attempt `attempt` of the seeded search: draws a random pair from `G` and tests
/// whether it generates an `A_n` factor complementing `K`.
pub fn search_attempt(g: &GroupHandle, k_gens: &[Permutation], n: usize, seed: u64, attempt: usize) -> Result<(AttemptOutcome, Option<Vec<Permutation>>)> {
    let target = alternating_order(n);
    let mut rng = attempt_rng(seed, attempt);
    let a = g.chain.random_element(&mut rng);
    let b = g.chain.random_element(&mut rng);
    test_pair(g, k_gens, n, &target, a, b, &mut rng)
}

fn test_pair<R: Rng + ?Sized>(g: &GroupHandle, k_gens: &[Permutation], n: usize, target: &BigCount, a: Permutation, b: Permutation, rng: &mut R) -> Result<(AttemptOutcome, Option<Vec<Permutation>>)> {
    let orders = [a.element_order(), b.element_order()];
    if orders.iter().any(|&o| !(target % BigUint::from(o)).is_zero()) {
        return Ok((AttemptOutcome::ElementOrder { orders }, None));
    }
    let gens = vec![a, b];
    let Some(h) = StabilizerChain::build_bounded(g.degree(), &gens, target)? else {
        return Ok((AttemptOutcome::TooLarge, None));
    };
    if h.order() != target {
        return Ok((AttemptOutcome::WrongOrder { order: h.order().to_string() }, None));
    }
    if recognize_alternating(&h, n, rng)?.overall != Overall::Accepted {
        return Ok((AttemptOutcome::NotAlternating, None));
    }
    if !verify_in(&g.chain, &gens, k_gens, &VerifyOptions::default())?.holds {
        return Ok((AttemptOutcome::NoFactorization, None));
    }
    Ok((AttemptOutcome::Success, Some(gens)))
}

const SEARCH_BATCH: usize = 32;

/// Seeded random search for `H = <a, b> ≅ A_n` with `G = HK`.
///
/// Attempts are independent (attempt `i` uses stream `i` of the seeded generator), so
/// they run in parallel batches; the first success by attempt index is reported and
/// the transcript lists every attempt up to it.
pub fn search_factor_subgroup(g: &GroupHandle, k_gens: &[Permutation], n: usize, attempts: usize, seed: u64) -> Result<SearchTranscript> {
    if n < 5 {
        return Err(Error::Precondition(format!("search for A_{n} needs n >= 5")));
    }
    let mut t = SearchTranscript { seed, n, attempts_budget: attempts, lagrange_excluded: false, attempts: Vec::new(), success: None };
    if !g.order().is_multiple_of(&alternating_order(n)) {
        t.lagrange_excluded = true;
        return Ok(t);
    }
    let mut start = 0;
    while start < attempts {
        let end = (start + SEARCH_BATCH).min(attempts);
        let batch: Vec<(AttemptOutcome, Option<Vec<Permutation>>)> =
            (start..end).into_par_iter().map(|i| search_attempt(g, k_gens, n, seed, i)).collect::<Result<_>>()?;
        for (i, (outcome, gens)) in (start..end).zip(batch) {
            t.attempts.push(AttemptRecord { attempt: i, outcome });
            if let Some(gens) = gens {
                t.success = Some(SearchSuccess { attempt: i, seed, generators: gens.iter().map(|x| x.to_string()).collect() });
                return Ok(t);
            }
        }
        start = end;
    }
    Ok(t)
}

/// Exhaustive variant for tiny groups: tries every pair (involution, element). Every
/// `A_n`, `n >= 5`, is generated by such a pair, so `None` proves that `G` has no
/// subgroup `H ≅ A_n` with `G = HK`.
pub fn search_factor_subgroup_exhaustive(g: &GroupHandle, k_gens: &[Permutation], n: usize, max_order: usize) -> Result<Option<Vec<Permutation>>> {
    if n < 5 {
        return Err(Error::Precondition(format!("search for A_{n} needs n >= 5")));
    }
    let target = alternating_order(n);
    if !g.order().is_multiple_of(&target) {
        return Ok(None);
    }
    if g.order().to_usize().is_none_or(|o| o > max_order) {
        return Err(Error::OverCap(g.order().clone()));
    }
    let elements = enumerate_elements(&g.gens, g.degree(), max_order).expect("order below cap");
    let target_u = target.to_u64().unwrap();
    let candidates: Vec<&Permutation> = elements.iter().filter(|x| target_u % x.element_order() == 0).collect();
    let involutions: Vec<&Permutation> = candidates.iter().copied().filter(|x| x.element_order() == 2).collect();
    let found = involutions.par_iter().find_map_first(|a| {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        candidates.iter().find_map(|b| match test_pair(g, k_gens, n, &target, (*a).clone(), (*b).clone(), &mut rng) {
            Ok((AttemptOutcome::Success, gens)) => gens,
            _ => None,
        })
    });
    Ok(found)
}
