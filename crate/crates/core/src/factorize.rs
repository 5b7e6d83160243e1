//! Deciding `G = HK` through the action of `H` on the right cosets of `K`.
//!
//! `G = HK` holds exactly when `H` is transitive on `[G:K]`; the stabilizer of the
//! trivial coset is `H ∩ K`, so one breadth-first orbit yields both the verdict and
//! the intersection. Every verdict is cross-checked against the order identity
//! `|H ∩ K| |G| = |H| |K|` (which is also all there is to the inequality form
//! `|G| <= |H||K|/|H ∩ K|`, so no separate code path exists for it).

use std::collections::HashMap;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::GroupHandle;
use crate::chain::StabilizerChain;
use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::BigCount;

const NO_PARENT: u32 = u32::MAX;
const STABILIZER_SEED: u64 = 0x57ab;
const STABILIZER_QUIET_PICKS: usize = 256;

/// Canonical representative of the right coset `K x`: the element whose images of
/// `k`'s base points are lexicographically least, found greedily level by level.
///
/// Two inputs give the same output exactly when they lie in the same coset. When `k`
/// was built with the ambient group's base as a prefix (as [`verify_factorization`]
/// does), the result is the lexicographic minimum over the ambient base.
pub fn canonical_coset_rep(k: &StabilizerChain, x: &Permutation) -> Result<Permutation> {
    if x.degree() != k.degree() {
        return Err(Error::DegreeMismatch(k.degree(), x.degree()));
    }
    let mut scratch = Vec::with_capacity(x.degree());
    Ok(canonicalize(k, x.clone(), &mut scratch))
}

fn canonicalize(k: &StabilizerChain, mut y: Permutation, scratch: &mut Vec<u32>) -> Permutation {
    for lv in k.levels() {
        if lv.orbit_len() == 1 {
            continue;
        }
        let imgs = y.images();
        let best = lv.orbit().min_by_key(|&o| imgs[o]).expect("orbit contains the base point");
        if best != lv.point() {
            // u maps the base point to `best`; u*y is still in K y
            let u = lv.representative(best).expect("orbit point");
            u.then_into(&y, scratch);
            y = Permutation::from_images_unchecked(std::mem::take(scratch));
        }
    }
    y
}

fn key_of(y: &Permutation, key_base: &[usize]) -> Box<[u32]> {
    key_base.iter().map(|&b| y.images()[b]).collect()
}

/// Orbit of a group on the right cosets of `K`, with its Schreier tree and the
/// stabilizer of the trivial coset.
#[derive(Clone, Debug)]
pub struct CosetOrbit {
    degree: usize,
    acting_gens: Vec<Permutation>,
    key_base: Vec<usize>,
    keys: Vec<Box<[u32]>>,
    lookup: HashMap<Box<[u32]>, u32>,
    parent: Vec<(u32, u32)>,
    /// False when the breadth-first search stopped at the budget.
    pub complete: bool,
    /// Generators of the stabilizer of the trivial coset (`H ∩ K`), filled in by
    /// [`CosetOrbit::stabilizer`] for complete orbits.
    pub stabilizer_gens: Vec<Permutation>,
}

impl CosetOrbit {
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// Base-image tuple labelling coset `i`.
    pub fn key(&self, i: usize) -> &[u32] {
        &self.keys[i]
    }

    pub fn index_of_key(&self, key: &[u32]) -> Option<usize> {
        self.lookup.get(key).map(|&i| i as usize)
    }

    /// Acting-generator indices leading from the trivial coset to coset `i`.
    pub fn word(&self, i: usize) -> Vec<usize> {
        let mut w = Vec::new();
        let mut j = i;
        while self.parent[j].0 != NO_PARENT {
            w.push(self.parent[j].1 as usize);
            j = self.parent[j].0 as usize;
        }
        w.reverse();
        w
    }

    /// Product of [`word`](Self::word)`(i)`: an element of the acting group carrying the
    /// trivial coset to coset `i`.
    pub fn transversal_element(&self, i: usize) -> Permutation {
        self.word(i).iter().fold(Permutation::identity(self.degree), |acc, &g| acc.then(&self.acting_gens[g]))
    }

    /// Canonical representative of coset `i`.
    pub fn representative(&self, k: &StabilizerChain, i: usize) -> Permutation {
        canonicalize(k, self.transversal_element(i), &mut Vec::new())
    }

    /// Index of the coset containing `x`.
    pub fn locate(&self, k: &StabilizerChain, x: &Permutation) -> Option<usize> {
        let c = canonicalize(k, x.clone(), &mut Vec::new());
        self.index_of_key(&key_of(&c, &self.key_base))
    }

    /// Schreier generator for the edge `(coset i, generator g)`.
    fn schreier_generator(&self, k: &StabilizerChain, i: usize, g: usize) -> Permutation {
        let x = self.transversal_element(i).then(&self.acting_gens[g]);
        let j = self.locate(k, &x).expect("orbit is closed");
        x.then(&self.transversal_element(j).inverse())
    }

    /// Chain of the stabilizer of the trivial coset, knowing its order must be
    /// `acting_order / len()`. Schreier generators are drawn at random until the
    /// target order is reached, then (if ever needed) exhaustively, which Schreier's
    /// lemma guarantees to suffice. Records the generators used.
    pub fn stabilizer(&mut self, k: &StabilizerChain, acting_order: &BigCount) -> Result<StabilizerChain> {
        if !self.complete {
            return Err(Error::Precondition("stabilizer of an incomplete coset orbit".into()));
        }
        let (target, rem) = acting_order.div_rem(&BigUint::from(self.len()));
        if !rem.is_zero() {
            return Err(Error::CrossCheck(format!("orbit length {} does not divide the group order {acting_order}", self.len())));
        }
        let mut chain = StabilizerChain::build(self.degree, &[])?;
        let mut gens = Vec::new();
        let n_gens = self.acting_gens.len();
        let mut rng = ChaCha8Rng::seed_from_u64(STABILIZER_SEED);
        let mut quiet = 0;
        let add = |s: Permutation, chain: &mut StabilizerChain, gens: &mut Vec<Permutation>| -> Result<bool> {
            if s.is_identity() || chain.contains(&s)? {
                return Ok(false);
            }
            chain.extend(std::slice::from_ref(&s))?;
            gens.push(s);
            Ok(true)
        };
        if n_gens > 0 {
            while *chain.order() < target && quiet < STABILIZER_QUIET_PICKS {
                let (i, g) = (rng.random_range(0..self.len()), rng.random_range(0..n_gens));
                let s = self.schreier_generator(k, i, g);
                if add(s, &mut chain, &mut gens)? {
                    quiet = 0;
                } else {
                    quiet += 1;
                }
            }
            'all: for i in 0..self.len() {
                for g in 0..n_gens {
                    if *chain.order() >= target {
                        break 'all;
                    }
                    let s = self.schreier_generator(k, i, g);
                    add(s, &mut chain, &mut gens)?;
                }
            }
        }
        if *chain.order() != target {
            return Err(Error::CrossCheck(format!("stabilizer has order {}, orbit-stabilizer demands {target}", chain.order())));
        }
        self.stabilizer_gens = gens;
        Ok(chain)
    }
}

/// Breadth-first orbit of `<acting_gens>` on the right cosets of `K`, stopping once
/// more than `budget` cosets have been seen. Cosets are labelled by the images of
/// `key_base`, which must be a base of a group containing both subgroups.
pub fn coset_orbit(acting_gens: &[Permutation], k: &StabilizerChain, key_base: &[usize], budget: &BigCount) -> Result<CosetOrbit> {
    let degree = k.degree();
    for g in acting_gens {
        if g.degree() != degree {
            return Err(Error::DegreeMismatch(degree, g.degree()));
        }
    }
    let budget = budget.to_usize().unwrap_or(usize::MAX).max(1);
    let mut scratch = Vec::with_capacity(degree);
    let start = canonicalize(k, Permutation::identity(degree), &mut scratch);
    let start_key = key_of(&start, key_base);
    let mut orbit = CosetOrbit {
        degree,
        acting_gens: acting_gens.to_vec(),
        key_base: key_base.to_vec(),
        keys: vec![start_key.clone()],
        lookup: HashMap::from([(start_key, 0)]),
        parent: vec![(NO_PARENT, 0)],
        complete: true,
        stabilizer_gens: Vec::new(),
    };
    let mut queue = std::collections::VecDeque::from([(0u32, start)]);
    let mut buf = Vec::with_capacity(degree);
    while let Some((i, rep)) = queue.pop_front() {
        for (gi, g) in acting_gens.iter().enumerate() {
            rep.then_into(g, &mut buf);
            let c = canonicalize(k, Permutation::from_images_unchecked(buf.clone()), &mut scratch);
            let key = key_of(&c, key_base);
            if orbit.lookup.contains_key(&key) {
                continue;
            }
            if orbit.keys.len() >= budget {
                orbit.complete = false;
                return Ok(orbit);
            }
            let j = orbit.keys.len() as u32;
            orbit.lookup.insert(key.clone(), j);
            orbit.keys.push(key);
            orbit.parent.push((i, gi as u32));
            queue.push_back((j, c));
        }
    }
    Ok(orbit)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Holds,
    Fails,
    Indeterminate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorizationVerdict {
    pub outcome: Outcome,
    pub holds: bool,
    #[serde(with = "crate::decimal")]
    pub g_order: BigCount,
    #[serde(with = "crate::decimal")]
    pub h_order: BigCount,
    #[serde(with = "crate::decimal")]
    pub k_order: BigCount,
    /// `|G| / |K|`.
    #[serde(with = "crate::decimal")]
    pub index: BigCount,
    /// Number of cosets reached (a lower bound when indeterminate).
    #[serde(with = "crate::decimal")]
    pub orbit_size: BigCount,
    /// `|H ∩ K|`, unknown when indeterminate.
    #[serde(with = "crate::decimal::option")]
    pub intersection_order: Option<BigCount>,
    pub exact: bool,
    pub cross_check_passed: bool,
}

#[derive(Clone, Debug, Default)]
pub struct VerifyOptions {
    /// Maximum number of cosets to explore; defaults to the index.
    pub budget: Option<BigCount>,
}

fn check_contained(g: &StabilizerChain, gens: &[Permutation], what: &str) -> Result<()> {
    for x in gens {
        if x.degree() != g.degree() {
            return Err(Error::DegreeMismatch(g.degree(), x.degree()));
        }
        if !g.contains(x)? {
            return Err(Error::NotSubgroup { what: what.to_string() });
        }
    }
    Ok(())
}

/// Decides `G = HK` for `H = <h_gens>`, `K = <k_gens>`.
pub fn verify_factorization(g: &GroupHandle, h_gens: &[Permutation], k_gens: &[Permutation]) -> Result<FactorizationVerdict> {
    verify_in(&g.chain, h_gens, k_gens, &VerifyOptions::default())
}

pub fn verify_factorization_with(g: &GroupHandle, h_gens: &[Permutation], k_gens: &[Permutation], opts: &VerifyOptions) -> Result<FactorizationVerdict> {
    verify_in(&g.chain, h_gens, k_gens, opts)
}

/// [`verify_factorization`] against a bare chain for `G`.
pub fn verify_in(g: &StabilizerChain, h_gens: &[Permutation], k_gens: &[Permutation], opts: &VerifyOptions) -> Result<FactorizationVerdict> {
    check_contained(g, h_gens, "H")?;
    check_contained(g, k_gens, "K")?;
    let degree = g.degree();
    let base = g.base();
    let h = StabilizerChain::build(degree, h_gens)?;
    let k = StabilizerChain::with_base(degree, k_gens, &base)?;
    let (index, rem) = g.order().div_rem(k.order());
    if !rem.is_zero() {
        return Err(Error::CrossCheck(format!("|K| = {} does not divide |G| = {}", k.order(), g.order())));
    }
    let budget = opts.budget.clone().unwrap_or_else(|| index.clone());
    let mut orbit = coset_orbit(h.generators(), &k, &base, &budget)?;
    let orbit_size = BigUint::from(orbit.len());
    let mut verdict = FactorizationVerdict {
        outcome: Outcome::Indeterminate,
        holds: false,
        g_order: g.order().clone(),
        h_order: h.order().clone(),
        k_order: k.order().clone(),
        index: index.clone(),
        orbit_size: orbit_size.clone(),
        intersection_order: None,
        exact: false,
        cross_check_passed: false,
    };
    if !orbit.complete {
        return Ok(verdict);
    }
    if orbit_size > index {
        return Err(Error::CrossCheck(format!("{orbit_size} distinct cosets exceed the index {index}")));
    }
    let holds = orbit_size == index;
    let stab = orbit.stabilizer(&k, h.order())?;
    for s in &orbit.stabilizer_gens {
        if !k.contains(s)? || !h.contains(s)? {
            return Err(Error::CrossCheck("stabilizer generator outside H ∩ K".into()));
        }
    }
    let identity = stab.order() * g.order() == h.order() * k.order();
    if identity != holds {
        return Err(Error::CrossCheck(format!(
            "orbit criterion says {holds} but |H∩K||G| = |H||K| is {identity} (|H∩K| = {})",
            stab.order()
        )));
    }
    verdict.outcome = if holds { Outcome::Holds } else { Outcome::Fails };
    verdict.holds = holds;
    verdict.exact = holds && stab.order().is_one();
    verdict.intersection_order = Some(stab.order().clone());
    verdict.cross_check_passed = true;
    Ok(verdict)
}

/// Order of `A ∩ N` for `A = <a_gens>` and `N` given by a chain carrying `base` as a
/// prefix, via the orbit of `A` on the cosets of `N`.
fn intersection_with(a: &StabilizerChain, n: &StabilizerChain, base: &[usize]) -> Result<(StabilizerChain, usize)> {
    let mut orbit = coset_orbit(a.generators(), n, base, &BigUint::from(usize::MAX))?;
    let stab = orbit.stabilizer(n, a.order())?;
    Ok((stab, orbit.len()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "branch", rename_all = "snake_case")]
pub enum DescentReport {
    /// `H <= N`, and then `N = H (K ∩ N)`.
    HInsideN {
        #[serde(with = "crate::decimal")]
        n_order: BigCount,
        #[serde(with = "crate::decimal")]
        k_cap_n_order: BigCount,
        n_equals_h_k_cap_n: bool,
    },
    /// `H` not inside `N`: the factorization descends to `G/N`, reported by orders.
    Quotient {
        #[serde(with = "crate::decimal")]
        quotient_order: BigCount,
        #[serde(with = "crate::decimal")]
        h_cap_n_order: BigCount,
        #[serde(with = "crate::decimal")]
        k_cap_n_order: BigCount,
        /// `|HN/N| = |H| / |H ∩ N|`.
        #[serde(with = "crate::decimal")]
        h_image_order: BigCount,
        /// `|KN/N| = |K| / |K ∩ N|`.
        #[serde(with = "crate::decimal")]
        k_image_order: BigCount,
    },
}

/// Given `G = HK` and `N` normal in `G`: either `H <= N` and `N = H(K ∩ N)`, or the
/// factorization passes to `G/N`.
pub fn descent_check(g: &GroupHandle, h_gens: &[Permutation], k_gens: &[Permutation], n_gens: &[Permutation]) -> Result<DescentReport> {
    let verdict = verify_factorization(g, h_gens, k_gens)?;
    if !verdict.holds {
        return Err(Error::Precondition("G = HK does not hold".into()));
    }
    check_contained(&g.chain, n_gens, "N")?;
    let degree = g.degree();
    let base = g.chain.base();
    let n = StabilizerChain::with_base(degree, n_gens, &base)?;
    for x in n.generators() {
        for y in &g.gens {
            if !n.contains(&x.conjugate_by(y))? {
                return Err(Error::NotNormal);
            }
        }
    }
    let h = StabilizerChain::build(degree, h_gens)?;
    let k = StabilizerChain::build(degree, k_gens)?;
    let (k_cap_n, _) = intersection_with(&k, &n, &base)?;
    let h_inside = h_gens.iter().map(|x| n.contains(x)).collect::<Result<Vec<_>>>()?.into_iter().all(|b| b);
    if h_inside {
        let v = verify_in(&n, h_gens, k_cap_n.generators(), &VerifyOptions::default())?;
        return Ok(DescentReport::HInsideN { n_order: n.order().clone(), k_cap_n_order: k_cap_n.order().clone(), n_equals_h_k_cap_n: v.holds });
    }
    let (h_cap_n, _) = intersection_with(&h, &n, &base)?;
    Ok(DescentReport::Quotient {
        quotient_order: g.order() / n.order(),
        h_image_order: h.order() / h_cap_n.order(),
        k_image_order: k.order() / k_cap_n.order(),
        h_cap_n_order: h_cap_n.order().clone(),
        k_cap_n_order: k_cap_n.order().clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{build_natural, Variant};

    fn p(s: &str, d: usize) -> Permutation {
        Permutation::parse_cycles(s, d).unwrap()
    }

    #[test]
    fn trivial_k_keeps_element() {
        let k = StabilizerChain::build(5, &[]).unwrap();
        let x = p("(1,3,5)(2,4)", 5);
        assert_eq!(canonical_coset_rep(&k, &x).unwrap(), x);
    }

    #[test]
    fn elements_of_k_share_the_trivial_coset() {
        let k = StabilizerChain::build(5, &[p("(1,2,3)", 5), p("(1,2)", 5)]).unwrap();
        let id = canonical_coset_rep(&k, &Permutation::identity(5)).unwrap();
        for x in ["(1,2)", "(1,3)", "(2,3)", "(1,2,3)"] {
            assert_eq!(canonical_coset_rep(&k, &p(x, 5)).unwrap(), id);
        }
    }

    #[test]
    fn whole_group_gives_orbit_of_one() {
        let g = build_natural(5, Variant::Alternating).unwrap();
        let v = verify_factorization(&g, &g.gens, &g.gens).unwrap();
        assert!(v.holds);
        assert_eq!(v.orbit_size, BigUint::one());
        assert_eq!(v.intersection_order, Some(BigUint::from(60u32)));
    }

    #[test]
    fn s4_three_cycle_and_s3() {
        let g = build_natural(4, Variant::Symmetric).unwrap();
        let h = [p("(1,2,3)", 4)];
        let k = [p("(1,2)", 4), p("(1,2,3)", 4)];
        let v = verify_factorization(&g, &h, &k).unwrap();
        // H is inside K, so it fixes the trivial coset
        assert_eq!(v.orbit_size, BigUint::one());
        assert!(!v.holds);
        let k = [p("(2,3)", 4), p("(2,3,4)", 4)];
        let v = verify_factorization(&g, &h, &k).unwrap();
        assert_eq!(v.orbit_size, BigUint::from(3u32));
        assert!(!v.holds);
    }

    #[test]
    fn not_a_subgroup() {
        let g = build_natural(5, Variant::Alternating).unwrap();
        assert!(matches!(verify_factorization(&g, &[p("(1,2)", 5)], &g.gens), Err(Error::NotSubgroup { .. })));
    }

    #[test]
    fn budget_gives_indeterminate() {
        let g = build_natural(6, Variant::Symmetric).unwrap();
        let h = [p("(1,2,3,4,5,6)", 6), p("(1,2)", 6)];
        let opts = VerifyOptions { budget: Some(BigUint::from(3u32)) };
        let v = verify_factorization_with(&g, &h, &[], &opts).unwrap();
        assert_eq!(v.outcome, Outcome::Indeterminate);
        assert!(!v.holds);
        assert_eq!(v.intersection_order, None);
    }
}
