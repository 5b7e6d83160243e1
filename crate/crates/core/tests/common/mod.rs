//! Fixtures and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashSet;

use factorforge::catalog::{build_natural, build_psl2, GroupHandle, GroupSpecRecord, Kind, Variant};
use factorforge::factorize::verify_factorization;
use factorforge::{BigCount, Permutation};
use rand_chacha::ChaCha8Rng;

pub fn p(s: &str, d: usize) -> Permutation {
    Permutation::parse_cycles(s, d).unwrap()
}

pub fn closure(gens: &[Permutation], degree: usize) -> Vec<Permutation> {
    let id = Permutation::identity(degree);
    let mut seen: HashSet<Permutation> = HashSet::from([id.clone()]);
    let mut stack = vec![id];
    while let Some(x) = stack.pop() {
        for g in gens {
            let y = x.then(g);
            if seen.insert(y.clone()) {
                stack.push(y);
            }
        }
    }
    seen.into_iter().collect()
}

pub fn handle(name: &str, degree: usize, gens: Vec<Permutation>) -> GroupHandle {
    let order = closure(&gens, degree).len();
    let record = GroupSpecRecord {
        name: name.into(),
        kind: Kind::PermAsset,
        degree,
        expected_order: order.to_string(),
        generators: None,
        params: None,
        claims: None,
        provenance: "test fixture".into(),
    };
    GroupHandle::new(record, gens).unwrap()
}

/// PSL2(7) on the projective line over GF(7), built from the Mobius maps directly.
pub fn psl2_7() -> GroupHandle {
    let inf = 7u32;
    let map = |f: &dyn Fn(u32) -> u32| Permutation::from_images((0..8).map(f).collect()).unwrap();
    let inv = |x: u32| (1..7).find(|y| x * y % 7 == 1).unwrap();
    let t = map(&|x| if x == inf { inf } else { (x + 1) % 7 });
    let m = map(&|x| if x == inf { inf } else { 2 * x % 7 });
    let s = map(&|x| if x == inf { 0 } else if x == 0 { inf } else { (7 - inv(x)) % 7 });
    handle("psl2_7", 8, vec![t, m, s])
}

pub fn corpus() -> Vec<GroupHandle> {
    vec![
        handle("c12", 12, vec![p("(1,2,3,4,5,6,7,8,9,10,11,12)", 12)]),
        handle("d12", 6, vec![p("(1,2,3,4,5,6)", 6), p("(2,6)(3,5)", 6)]),
        build_natural(4, Variant::Symmetric).unwrap(),
        build_natural(5, Variant::Symmetric).unwrap(),
        build_natural(5, Variant::Alternating).unwrap(),
        build_natural(6, Variant::Alternating).unwrap(),
        psl2_7(),
        build_psl2(11).unwrap(),
    ]
}

/// Trivial group, point and two-point stabilizers, the whole group, and a batch of
/// random one- and two-generator subgroups.
pub fn fixture_subgroups(g: &GroupHandle, rng: &mut ChaCha8Rng) -> Vec<Vec<Permutation>> {
    let mut out = vec![Vec::new(), g.gens.clone()];
    for lv in g.chain.levels().iter().skip(1).take(2) {
        out.push(lv.generators().to_vec());
    }
    for i in 0..8 {
        let mut gens = vec![g.chain.random_element(rng)];
        if i % 2 == 1 {
            gens.push(g.chain.random_element(rng));
        }
        out.push(gens);
    }
    out
}

pub fn brute_product(g: &GroupHandle, h: &[Permutation], k: &[Permutation]) -> (bool, usize) {
    let he = closure(h, g.degree());
    let ke = closure(k, g.degree());
    let kset: HashSet<&Permutation> = ke.iter().collect();
    let mut prod: HashSet<Permutation> = HashSet::new();
    for x in &he {
        for y in &ke {
            prod.insert(x.then(y));
        }
    }
    let inter = he.iter().filter(|x| kset.contains(x)).count();
    (BigCount::from(prod.len()) == *g.order(), inter)
}

#[derive(Debug, Default)]
pub struct PairCounts {
    pub total: usize,
    pub positives: usize,
    pub negatives: usize,
}

/// Runs verify_factorization against the brute-force product set on fixture pairs of
/// every corpus group, panicking on the first disagreement.
pub fn product_set_equivalence(rng: &mut ChaCha8Rng) -> PairCounts {
    let mut c = PairCounts::default();
    for g in corpus() {
        let subs = fixture_subgroups(&g, rng);
        for (i, h) in subs.iter().enumerate() {
            for (j, k) in subs.iter().enumerate() {
                if (i + j) % 2 == 1 && i != 1 && j != 1 {
                    continue;
                }
                let v = verify_factorization(&g, h, k).unwrap();
                let (holds, inter) = brute_product(&g, h, k);
                assert_eq!(v.holds, holds, "{}: H={h:?} K={k:?}", g.name());
                assert_eq!(v.intersection_order, Some(BigCount::from(inter)));
                assert!(v.cross_check_passed);
                assert_eq!(v.exact, holds && inter == 1);
                c.total += 1;
                if holds {
                    c.positives += 1;
                } else {
                    c.negatives += 1;
                }
            }
        }
    }
    c
}
