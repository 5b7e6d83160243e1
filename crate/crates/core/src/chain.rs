//! Stabilizer chains (bases and strong generating sets) built by Schreier–Sims.
//!
//! Construction runs a randomized phase (product-replacement elements sifted into the
//! partial chain) and then a deterministic Schreier–Sims completion, so a returned
//! chain is always correct. Transversals are stored explicitly, each coset
//! representative together with its inverse, which keeps sifting to one product per
//! level.

use std::collections::{HashSet, VecDeque};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::BigCount;

const NONE: u32 = u32::MAX;
const CONSTRUCTION_SEED: u64 = 0x5eed_cafe_f00d;
const RANDOM_PHASE_QUIET: usize = 24;

/// One level of the chain: a base point, generators of the pointwise stabilizer of
/// all earlier base points, and a transversal for the orbit of the base point.
#[derive(Clone, Debug)]
pub struct Level {
    point: usize,
    gens: Vec<Permutation>,
    orbit: Vec<u32>,
    position: Vec<u32>,
    reps: Vec<Permutation>,
    inv_reps: Vec<Permutation>,
}

impl Level {
    fn new(point: usize, degree: usize) -> Self {
        let mut position = vec![NONE; degree];
        position[point] = 0;
        Level {
            point,
            gens: Vec::new(),
            orbit: vec![point as u32],
            position,
            reps: vec![Permutation::identity(degree)],
            inv_reps: vec![Permutation::identity(degree)],
        }
    }

    fn add_gen(&mut self, g: Permutation) {
        let old_len = self.orbit.len();
        self.gens.push(g);
        let newest = self.gens.len() - 1;
        let mut k = 0;
        while k < self.orbit.len() {
            let range = if k < old_len { newest..newest + 1 } else { 0..self.gens.len() };
            let x = self.orbit[k] as usize;
            for j in range {
                let y = self.gens[j].image(x);
                if self.position[y] == NONE {
                    self.position[y] = self.orbit.len() as u32;
                    self.orbit.push(y as u32);
                    let rep = self.reps[k].then(&self.gens[j]);
                    self.inv_reps.push(rep.inverse());
                    self.reps.push(rep);
                }
            }
            k += 1;
        }
    }

    pub fn point(&self) -> usize {
        self.point
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.gens
    }

    pub fn orbit(&self) -> impl Iterator<Item = usize> + '_ {
        self.orbit.iter().map(|&x| x as usize)
    }

    pub fn orbit_len(&self) -> usize {
        self.orbit.len()
    }

    pub fn in_orbit(&self, x: usize) -> bool {
        self.position[x] != NONE
    }

    /// An element of this level's group mapping the base point to `x`.
    pub fn representative(&self, x: usize) -> Option<&Permutation> {
        match self.position[x] {
            NONE => None,
            i => Some(&self.reps[i as usize]),
        }
    }

    pub fn inverse_representative(&self, x: usize) -> Option<&Permutation> {
        match self.position[x] {
            NONE => None,
            i => Some(&self.inv_reps[i as usize]),
        }
    }

    pub(crate) fn rep_at(&self, i: usize) -> &Permutation {
        &self.reps[i]
    }
}

/// Result of sifting a permutation through a chain.
#[derive(Clone, Debug)]
pub struct Sift {
    pub member: bool,
    pub residue: Permutation,
    /// Index of the level where sifting stopped (`levels().len()` if it went through).
    pub level: usize,
}

#[derive(Clone, Debug)]
pub struct StabilizerChain {
    degree: usize,
    gens: Vec<Permutation>,
    levels: Vec<Level>,
    order: BigCount,
}

impl StabilizerChain {
    /// Chain of `<gens>` acting on `degree` points; an empty list gives the trivial group.
    pub fn build(degree: usize, gens: &[Permutation]) -> Result<Self> {
        Self::with_base(degree, gens, &[])
    }

    /// As [`build`](Self::build), but the base starts with `prefix` (in that order).
    /// Further base points, if needed, are the smallest points moved by new strong
    /// generators.
    pub fn with_base(degree: usize, gens: &[Permutation], prefix: &[usize]) -> Result<Self> {
        Ok(Self::construct(degree, gens, prefix, None)?.expect("no order limit"))
    }

    /// Builds the chain unless the group turns out to be larger than `limit`, in which
    /// case `Ok(None)` is returned as soon as that is certain.
    pub fn build_bounded(degree: usize, gens: &[Permutation], limit: &BigCount) -> Result<Option<Self>> {
        Self::construct(degree, gens, &[], Some(limit))
    }

    fn construct(degree: usize, gens: &[Permutation], prefix: &[usize], limit: Option<&BigCount>) -> Result<Option<Self>> {
        for g in gens {
            if g.degree() != degree {
                return Err(Error::DegreeMismatch(degree, g.degree()));
            }
        }
        for &b in prefix {
            if b >= degree {
                return Err(Error::PointOutOfRange { point: b + 1, degree });
            }
        }
        let gens: Vec<Permutation> = gens.iter().filter(|g| !g.is_identity()).cloned().collect();
        let mut chain = StabilizerChain {
            degree,
            gens: gens.clone(),
            levels: prefix.iter().map(|&b| Level::new(b, degree)).collect(),
            order: BigUint::one(),
        };
        if gens.is_empty() {
            return Ok(Some(chain));
        }
        let over = |c: &StabilizerChain| limit.is_some_and(|l| c.order_of_levels() > *l);
        for g in &gens {
            chain.insert(g.clone(), 0);
        }
        if over(&chain) {
            return Ok(None);
        }

        let mut pr = ProductReplacement::new(&gens, CONSTRUCTION_SEED);
        let mut quiet = 0;
        while quiet < RANDOM_PHASE_QUIET {
            let r = pr.next();
            if chain.insert(r, 0) {
                quiet = 0;
                if over(&chain) {
                    return Ok(None);
                }
            } else {
                quiet += 1;
            }
        }

        if !chain.complete(&over) {
            return Ok(None);
        }
        chain.order = chain.order_of_levels();
        Ok(Some(chain))
    }

    fn order_of_levels(&self) -> BigCount {
        self.levels.iter().fold(BigUint::one(), |acc, l| acc * BigUint::from(l.orbit.len()))
    }

    /// Sifts `g` from level `start`; returns the residue and the level where it stopped.
    fn sift_from(&self, g: &Permutation, start: usize) -> (Permutation, usize) {
        let mut h = g.clone();
        let mut buf = Vec::with_capacity(self.degree);
        for (l, lv) in self.levels.iter().enumerate().skip(start) {
            let x = h.image(lv.point);
            let pos = lv.position[x];
            if pos == NONE {
                return (h, l);
            }
            if x != lv.point {
                h.then_into(&lv.inv_reps[pos as usize], &mut buf);
                h = Permutation::from_images_unchecked(std::mem::replace(&mut buf, h.into_images()));
            }
        }
        (h, self.levels.len())
    }

    /// Sifts `g` from `start`; if the residue is not the identity, adds it as a strong
    /// generator to levels `start..=stop`. Returns whether the chain changed.
    fn insert(&mut self, g: Permutation, start: usize) -> bool {
        let (residue, stop) = self.sift_from(&g, start);
        if residue.is_identity() {
            return false;
        }
        self.add_strong(residue, start, stop);
        true
    }

    fn add_strong(&mut self, residue: Permutation, from: usize, to: usize) {
        if to == self.levels.len() {
            let b = residue.smallest_moved_point().expect("non-identity residue");
            self.levels.push(Level::new(b, self.degree));
        }
        for l in from..=to {
            self.levels[l].add_gen(residue.clone());
        }
    }

    /// Deterministic Schreier–Sims: every Schreier generator of every level must sift
    /// through the levels below it.
    fn complete(&mut self, over: &dyn Fn(&StabilizerChain) -> bool) -> bool {
        let mut i = self.levels.len();
        while i > 0 {
            let l = i - 1;
            match self.failing_schreier_generator(l) {
                None => i -= 1,
                Some((residue, stop)) => {
                    self.add_strong(residue, l + 1, stop);
                    if over(self) {
                        return false;
                    }
                    i = stop + 1;
                }
            }
        }
        true
    }

    fn failing_schreier_generator(&self, l: usize) -> Option<(Permutation, usize)> {
        let lv = &self.levels[l];
        let mut buf = Vec::with_capacity(self.degree);
        for (k, &x) in lv.orbit.iter().enumerate() {
            for g in &lv.gens {
                let y = g.image(x as usize);
                let back = &lv.inv_reps[lv.position[y] as usize];
                let (gi, bi) = (g.images(), back.images());
                buf.clear();
                buf.extend(lv.reps[k].images().iter().map(|&a| bi[gi[a as usize] as usize]));
                if buf.iter().enumerate().all(|(i, &v)| i as u32 == v) {
                    continue;
                }
                let s = Permutation::from_images_unchecked(buf.clone());
                let (residue, stop) = self.sift_from(&s, l + 1);
                if !residue.is_identity() {
                    return Some((residue, stop));
                }
            }
        }
        None
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> &BigCount {
        &self.order
    }

    pub fn base(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.point).collect()
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    /// The (non-identity) generators the chain was built from.
    pub fn generators(&self) -> &[Permutation] {
        &self.gens
    }

    /// Strong generators: the generators of the top level (these include every
    /// deeper level's generators).
    pub fn strong_generators(&self) -> &[Permutation] {
        self.levels.first().map(|l| l.gens.as_slice()).unwrap_or(&[])
    }

    pub fn is_trivial(&self) -> bool {
        self.order.is_one()
    }

    pub fn sift(&self, p: &Permutation) -> Result<Sift> {
        if p.degree() != self.degree {
            return Err(Error::DegreeMismatch(self.degree, p.degree()));
        }
        let (residue, level) = self.sift_from(p, 0);
        Ok(Sift { member: residue.is_identity(), residue, level })
    }

    pub fn contains(&self, p: &Permutation) -> Result<bool> {
        Ok(self.sift(p)?.member)
    }

    /// Uniform random element: one uniform transversal pick per level.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> Permutation {
        let mut g = Permutation::identity(self.degree);
        for lv in self.levels.iter().rev() {
            let k = rng.random_range(0..lv.orbit.len());
            g = g.then(&lv.reps[k]);
        }
        g
    }

    /// Adds generators to the group, keeping the chain verified.
    pub fn extend(&mut self, new_gens: &[Permutation]) -> Result<()> {
        let mut changed = false;
        for g in new_gens {
            if g.degree() != self.degree {
                return Err(Error::DegreeMismatch(self.degree, g.degree()));
            }
            if self.insert(g.clone(), 0) {
                self.gens.push(g.clone());
                changed = true;
            }
        }
        if changed {
            self.complete(&|_| false);
            self.order = self.order_of_levels();
        }
        Ok(())
    }

    /// Orbit of `point` under the whole group.
    pub fn orbit_of(&self, point: usize) -> Result<Orbit> {
        orbit(self.strong_generators(), point, self.degree)
    }

    pub fn is_transitive(&self) -> bool {
        self.degree <= 1 || orbit(self.strong_generators(), 0, self.degree).is_ok_and(|o| o.len() == self.degree)
    }

    /// Largest `k <= max_k` such that the group is `k`-transitive, or (homogeneous
    /// mode) `j`-homogeneous for every `j <= k`. Intransitive groups give 0.
    pub fn transitivity_degree(&self, mode: TransitivityMode, max_k: usize) -> usize {
        let max_k = max_k.min(self.degree);
        if self.degree == 0 || !self.is_transitive() {
            return 0;
        }
        match mode {
            TransitivityMode::Transitive => {
                let prefix: Vec<usize> = (0..max_k).collect();
                let c = StabilizerChain::with_base(self.degree, self.strong_generators(), &prefix)
                    .expect("strong generators share the degree");
                c.levels.iter().take(max_k).enumerate().take_while(|(i, l)| l.orbit.len() == self.degree - i).count()
            }
            TransitivityMode::Homogeneous => {
                let mut best = 0;
                for k in 1..=max_k {
                    if !self.is_k_homogeneous(k) {
                        break;
                    }
                    best = k;
                }
                best
            }
        }
    }

    fn is_k_homogeneous(&self, k: usize) -> bool {
        let d = self.degree;
        let total = binomial(d, k);
        if total > self.order {
            return false;
        }
        let Some(total) = total.to_usize().filter(|&t| t <= SUBSET_ENUMERATION_CAP) else {
            return false;
        };
        let gens = self.strong_generators();
        let start: Vec<u32> = (0..k as u32).collect();
        let mut seen: HashSet<Vec<u32>> = HashSet::from([start.clone()]);
        let mut queue = VecDeque::from([start]);
        while let Some(s) = queue.pop_front() {
            for g in gens {
                let mut t: Vec<u32> = s.iter().map(|&x| g.images()[x as usize]).collect();
                t.sort_unstable();
                if seen.insert(t.clone()) {
                    queue.push_back(t);
                }
            }
        }
        seen.len() == total
    }

    /// Primitivity test; for an imprimitive group returns a block system whose blocks
    /// are minimal (no nontrivial block strictly inside them).
    pub fn minimal_blocks(&self) -> Result<Primitivity> {
        if !self.is_transitive() {
            return Err(Error::Intransitive);
        }
        let d = self.degree;
        if d <= 2 {
            return Ok(Primitivity::Primitive);
        }
        let gens = self.strong_generators();
        // one candidate partner per orbit of the stabilizer of 0
        let stab = StabilizerChain::with_base(d, gens, &[0]).expect("same degree");
        let stab_gens: &[Permutation] = stab.levels.get(1).map(|l| l.gens.as_slice()).unwrap_or(&[]);
        let mut covered = vec![false; d];
        covered[0] = true;
        let mut best: Option<Vec<usize>> = None;
        for j in 1..d {
            if covered[j] {
                continue;
            }
            for x in orbit(stab_gens, j, d)?.points() {
                covered[x] = true;
            }
            let classes = minimal_block_partition(gens, d, j);
            let block: Vec<usize> = (0..d).filter(|&x| classes[x] == classes[0]).collect();
            if block.len() < d && best.as_ref().is_none_or(|b| block.len() < b.len()) {
                best = Some(block);
            }
        }
        let Some(block) = best else {
            return Ok(Primitivity::Primitive);
        };
        let classes = minimal_block_partition(gens, d, block[1]);
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let mut index = vec![usize::MAX; d];
        for x in 0..d {
            let c = classes[x];
            if index[c] == usize::MAX {
                index[c] = blocks.len();
                blocks.push(Vec::new());
            }
            blocks[index[c]].push(x);
        }
        Ok(Primitivity::Imprimitive(BlockSystem { block_size: block.len(), block_count: blocks.len(), blocks }))
    }
}

const SUBSET_ENUMERATION_CAP: usize = 20_000_000;

fn binomial(n: usize, k: usize) -> BigCount {
    let mut r = BigUint::one();
    for i in 0..k {
        r = r * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    r
}

/// Finest block system in which `0` and `j` share a block (Atkinson's union-find
/// closure). Returns, for each point, the root of its class.
fn minimal_block_partition(gens: &[Permutation], degree: usize, j: usize) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..degree).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut pairs = vec![(0usize, j)];
    parent[j] = 0;
    while let Some((a, b)) = pairs.pop() {
        for g in gens {
            let ra = find(&mut parent, g.image(a));
            let rb = find(&mut parent, g.image(b));
            if ra != rb {
                parent[rb.max(ra)] = rb.min(ra);
                pairs.push((ra, rb));
            }
        }
    }
    (0..degree).map(|x| find(&mut parent, x)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransitivityMode {
    Transitive,
    Homogeneous,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockSystem {
    pub block_size: usize,
    pub block_count: usize,
    pub blocks: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Primitivity {
    Primitive,
    Imprimitive(BlockSystem),
}

impl Primitivity {
    pub fn is_primitive(&self) -> bool {
        matches!(self, Primitivity::Primitive)
    }
}

/// Orbit of a point with a Schreier tree: each non-root point records its parent and
/// the generator index leading to it.
#[derive(Clone, Debug)]
pub struct Orbit {
    root: usize,
    points: Vec<usize>,
    parent: Vec<Option<(usize, usize)>>,
    in_orbit: Vec<bool>,
}

impl Orbit {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn points(&self) -> impl Iterator<Item = usize> + '_ {
        self.points.iter().copied()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.in_orbit.get(x).copied().unwrap_or(false)
    }

    /// Generator indices whose product (left to right) maps the root to `x`.
    pub fn word(&self, x: usize) -> Option<Vec<usize>> {
        if !self.contains(x) {
            return None;
        }
        let mut w = Vec::new();
        let mut y = x;
        while let Some((p, g)) = self.parent[y] {
            w.push(g);
            y = p;
        }
        w.reverse();
        Some(w)
    }
}

/// Breadth-first orbit of `point` under `gens`.
pub fn orbit(gens: &[Permutation], point: usize, degree: usize) -> Result<Orbit> {
    if point >= degree {
        return Err(Error::PointOutOfRange { point: point + 1, degree });
    }
    for g in gens {
        if g.degree() != degree {
            return Err(Error::DegreeMismatch(degree, g.degree()));
        }
    }
    let mut in_orbit = vec![false; degree];
    let mut parent = vec![None; degree];
    in_orbit[point] = true;
    let mut points = vec![point];
    let mut k = 0;
    while k < points.len() {
        let x = points[k];
        for (i, g) in gens.iter().enumerate() {
            let y = g.image(x);
            if !in_orbit[y] {
                in_orbit[y] = true;
                parent[y] = Some((x, i));
                points.push(y);
            }
        }
        k += 1;
    }
    Ok(Orbit { root: point, points, parent, in_orbit })
}

/// Product-replacement generator of (nearly uniform) random group elements.
pub struct ProductReplacement {
    slots: Vec<Permutation>,
    acc: Permutation,
    rng: ChaCha8Rng,
}

impl ProductReplacement {
    pub fn new(gens: &[Permutation], seed: u64) -> Self {
        assert!(!gens.is_empty(), "product replacement needs a generator");
        let mut slots: Vec<Permutation> = gens.to_vec();
        while slots.len() < 10 {
            slots.push(gens[slots.len() % gens.len()].clone());
        }
        let acc = Permutation::identity(gens[0].degree());
        let mut pr = ProductReplacement { slots, acc, rng: ChaCha8Rng::seed_from_u64(seed) };
        for _ in 0..50 {
            pr.next();
        }
        pr
    }

    pub fn next(&mut self) -> Permutation {
        let n = self.slots.len();
        let i = self.rng.random_range(0..n);
        let mut j = self.rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let s = if self.rng.random_bool(0.5) { self.slots[j].clone() } else { self.slots[j].inverse() };
        self.slots[i] = if self.rng.random_bool(0.5) { self.slots[i].then(&s) } else { s.then(&self.slots[i]) };
        self.acc = self.acc.then(&self.slots[i]);
        self.acc.clone()
    }
}
