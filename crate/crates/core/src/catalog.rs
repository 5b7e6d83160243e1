//! Group constructors and the JSON group-record loader.
//!
//! Records live in `<data>/groups/<name>.json`. Every record is treated as untrusted:
//! the constructed group must have exactly the declared order or loading fails.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chain::StabilizerChain;
use crate::error::{Error, Result};
use crate::gf::{self, ActionMode, Field, Matrix};
use crate::perm::Permutation;
use crate::BigCount;

/// Environment variable overriding the asset directory.
pub const DATA_ENV: &str = "FACTORFORGE_DATA";

const HOLOMORPH_CAP: usize = 500;
const WREATH_DEGREE_CAP: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Natural,
    Psl2,
    MatrixAsset,
    PermAsset,
    HolomorphDiagonal,
    WreathProductAction,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Alternating,
    Symmetric,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u32,
    pub k: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixPayload {
    pub field: FieldSpec,
    pub mode: ActionMode,
    pub matrices: Vec<Vec<Vec<u32>>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Generators {
    Cycles(Vec<String>),
    Matrices(MatrixPayload),
}

/// Parameters of the constructed kinds (`natural`, `psl2`, `holomorph-diagonal`,
/// `wreath-product-action`).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<Variant>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<u32>,
    /// Record name of the group T (holomorph) or R (wreath).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_group: Option<String>,
    /// Holomorph automorphisms, given as permutations (cycle strings on T's degree)
    /// acting on T by conjugation.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub conjugators: Vec<String>,
}

/// Structural claims a record makes; checked by [`GroupHandle::validate_claims`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claims {
    #[serde(default)]
    pub simple: bool,
    /// The group is isomorphic to `A_n` for this `n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alternating: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpecRecord {
    pub name: String,
    pub kind: Kind,
    pub degree: usize,
    pub expected_order: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Generators>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Params>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claims: Option<Claims>,
    #[serde(default)]
    pub provenance: String,
}

impl GroupSpecRecord {
    pub fn expected_order(&self) -> Result<BigCount> {
        self.expected_order.parse().map_err(|_| self.invalid(format!("expected_order {:?} is not a decimal integer", self.expected_order)))
    }

    fn invalid(&self, msg: impl Into<String>) -> Error {
        Error::InvalidRecord { name: self.name.clone(), msg: msg.into() }
    }

    fn params(&self) -> Result<&Params> {
        self.params.as_ref().ok_or_else(|| self.invalid("missing params"))
    }
}

/// A named group: generators, a verified chain and the record it came from.
#[derive(Clone, Debug)]
pub struct GroupHandle {
    pub record: GroupSpecRecord,
    pub gens: Vec<Permutation>,
    pub chain: StabilizerChain,
    /// Distinguished subgroups (by generators), e.g. the translation groups of D(2,T).
    pub subgroups: BTreeMap<String, Vec<Permutation>>,
}

impl GroupHandle {
    /// Builds the chain and applies the order gate.
    pub fn new(record: GroupSpecRecord, gens: Vec<Permutation>) -> Result<Self> {
        let expected = record.expected_order()?;
        for g in &gens {
            if g.degree() != record.degree {
                return Err(record.invalid(format!("generator of degree {} in a record of degree {}", g.degree(), record.degree)));
            }
        }
        let chain = StabilizerChain::build(record.degree, &gens)?;
        if *chain.order() != expected {
            return Err(Error::OrderMismatch { name: record.name.clone(), expected, actual: chain.order().clone() });
        }
        Ok(GroupHandle { record, gens, chain, subgroups: BTreeMap::new() })
    }

    pub fn name(&self) -> &str {
        &self.record.name
    }

    pub fn degree(&self) -> usize {
        self.record.degree
    }

    pub fn order(&self) -> &BigCount {
        self.chain.order()
    }

    /// Checks the record's structural claims with the recognition tools.
    pub fn validate_claims(&self, seed: u64) -> Result<()> {
        let Some(claims) = &self.record.claims else {
            return Ok(());
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if claims.simple {
            if let crate::recognize::Simplicity::NotSimple { .. } = crate::recognize::is_simple_mc(&self.chain, 32, &mut rng)? {
                return Err(self.record.invalid("claimed simple, but a proper normal subgroup was found"));
            }
        }
        if let Some(n) = claims.alternating {
            let v = crate::recognize::recognize_alternating(&self.chain, n, &mut rng)?;
            if v.overall != crate::recognize::Overall::Accepted {
                return Err(self.record.invalid(format!("claimed A{n}, recognition verdict {:?}", v.overall)));
            }
        }
        Ok(())
    }
}

/// Standard generators of `A_n` or `S_n` on `n` points.
pub fn natural_generators(n: usize, variant: Variant) -> Result<Vec<Permutation>> {
    if n == 0 {
        return Err(Error::Unsupported("natural group of degree 0".into()));
    }
    let cycle = |pts: &[usize]| {
        let mut images: Vec<u32> = (0..n as u32).collect();
        for (i, &a) in pts.iter().enumerate() {
            images[a] = pts[(i + 1) % pts.len()] as u32;
        }
        Permutation::from_images_unchecked(images)
    };
    let all: Vec<usize> = (0..n).collect();
    Ok(match variant {
        Variant::Symmetric if n == 1 => vec![],
        Variant::Symmetric if n == 2 => vec![cycle(&[0, 1])],
        Variant::Symmetric => vec![cycle(&[0, 1]), cycle(&all)],
        Variant::Alternating if n < 3 => vec![],
        Variant::Alternating if n == 3 => vec![cycle(&[0, 1, 2])],
        Variant::Alternating if n % 2 == 1 => vec![cycle(&[0, 1, 2]), cycle(&all)],
        Variant::Alternating => vec![cycle(&[0, 1, 2]), cycle(&all[1..])],
    })
}

fn factorial(n: usize) -> BigCount {
    (1..=n).fold(BigUint::from(1u32), |acc, i| acc * BigUint::from(i))
}

pub fn build_natural(n: usize, variant: Variant) -> Result<GroupHandle> {
    let gens = natural_generators(n, variant)?;
    let order = match variant {
        Variant::Symmetric => factorial(n),
        Variant::Alternating if n < 2 => BigUint::from(1u32),
        Variant::Alternating => factorial(n) / BigUint::from(2u32),
    };
    let prefix = if variant == Variant::Alternating { "a" } else { "s" };
    let record = GroupSpecRecord {
        name: format!("{prefix}{n}"),
        kind: Kind::Natural,
        degree: n,
        expected_order: order.to_string(),
        generators: None,
        params: Some(Params { n: Some(n), variant: Some(variant), ..Params::default() }),
        claims: None,
        provenance: "standard generators".into(),
    };
    GroupHandle::new(record, gens)
}

pub const PSL2_FIELDS: [u32; 8] = [4, 5, 9, 11, 19, 25, 29, 59];

/// Arithmetic of GF(q) for the PSL2 constructions: prime fields directly, the
/// quadratic extensions through [`gf::Field`].
enum Psl2Field {
    Prime(u32),
    Extension(Field),
}

impl Psl2Field {
    fn new(q: u32) -> Result<Self> {
        match q {
            4 => Ok(Psl2Field::Extension(Field::new(2, 2)?)),
            9 => Ok(Psl2Field::Extension(Field::new(3, 2)?)),
            25 => Ok(Psl2Field::Extension(Field::new(5, 2)?)),
            5 | 11 | 19 | 29 | 59 => Ok(Psl2Field::Prime(q)),
            _ => Err(Error::Unsupported(format!("PSL2({q})"))),
        }
    }

    fn add(&self, a: u32, b: u32) -> u32 {
        match self {
            Psl2Field::Prime(p) => (a + b) % p,
            Psl2Field::Extension(f) => f.add(a as u8, b as u8) as u32,
        }
    }

    fn mul(&self, a: u32, b: u32) -> u32 {
        match self {
            Psl2Field::Prime(p) => a * b % p,
            Psl2Field::Extension(f) => f.mul(a as u8, b as u8) as u32,
        }
    }

    fn size(&self) -> u32 {
        match self {
            Psl2Field::Prime(p) => *p,
            Psl2Field::Extension(f) => f.size() as u32,
        }
    }

    fn neg(&self, a: u32) -> u32 {
        (0..self.size()).find(|&b| self.add(a, b) == 0).unwrap()
    }

    fn inv(&self, a: u32) -> u32 {
        (1..self.size()).find(|&b| self.mul(a, b) == 1).unwrap()
    }

    fn primitive_element(&self) -> u32 {
        let q = self.size();
        (1..q)
            .find(|&a| {
                let mut x = a;
                let mut n = 1;
                while x != 1 {
                    x = self.mul(x, a);
                    n += 1;
                }
                n == q - 1
            })
            .unwrap()
    }
}

/// PSL2(q) on the projective line: point `i < q` is the field element with encoding
/// `i`, point `q` is infinity. Generators `x+1`, `z^2 x` and `-1/x`, with `z` the
/// primitive element of smallest encoding.
pub fn psl2_generators(q: u32) -> Result<Vec<Permutation>> {
    let f = Psl2Field::new(q)?;
    let inf = q;
    let z = f.primitive_element();
    let z2 = f.mul(z, z);
    let perm = |map: &dyn Fn(u32) -> u32| Permutation::from_images((0..=q).map(map).collect()).expect("Mobius map is a bijection");
    let t = perm(&|x| if x == inf { inf } else { f.add(x, 1) });
    let m = perm(&|x| if x == inf { inf } else { f.mul(z2, x) });
    let s = perm(&|x| {
        if x == inf {
            0
        } else if x == 0 {
            inf
        } else {
            f.neg(f.inv(x))
        }
    });
    Ok(vec![t, m, s])
}

pub fn build_psl2(q: u32) -> Result<GroupHandle> {
    let gens = psl2_generators(q)?;
    let qb = BigUint::from(q);
    let order = &qb * (&qb * &qb - 1u32) / BigUint::from(if q % 2 == 1 { 2u32 } else { 1 });
    let record = GroupSpecRecord {
        name: format!("psl2_{q}"),
        kind: Kind::Psl2,
        degree: q as usize + 1,
        expected_order: order.to_string(),
        generators: None,
        params: Some(Params { q: Some(q), ..Params::default() }),
        claims: None,
        provenance: "Mobius transformations x+1, z^2 x, -1/x".into(),
    };
    GroupHandle::new(record, gens)
}

/// All elements of a small group, sorted; index 0 is the identity.
pub fn enumerate_elements(gens: &[Permutation], degree: usize, cap: usize) -> Option<Vec<Permutation>> {
    let mut seen: std::collections::HashSet<Permutation> = std::collections::HashSet::new();
    let id = Permutation::identity(degree);
    seen.insert(id.clone());
    let mut queue = vec![id];
    while let Some(x) = queue.pop() {
        for g in gens {
            let y = x.then(g);
            if seen.insert(y.clone()) {
                if seen.len() > cap {
                    return None;
                }
                queue.push(y);
            }
        }
    }
    let mut all: Vec<Permutation> = seen.into_iter().collect();
    all.sort();
    Some(all)
}

/// D(2,T) on the elements of T: left and right translations, the given automorphisms
/// (as permutations of element indices) and inversion.
///
/// The returned handle carries the subgroups `"left"`, `"right"` and `"holomorph"` (all
/// generators but the inversion).
pub fn build_holomorph_diagonal(t: &GroupHandle, automorphisms: &[Permutation]) -> Result<GroupHandle> {
    let elements = enumerate_elements(&t.gens, t.degree(), HOLOMORPH_CAP)
        .ok_or_else(|| Error::Unsupported(format!("|T| exceeds the cap of {HOLOMORPH_CAP}")))?;
    let n = elements.len();
    let index: HashMap<&Permutation, u32> = elements.iter().enumerate().map(|(i, e)| (e, i as u32)).collect();
    let on_elements = |f: &dyn Fn(&Permutation) -> Permutation| {
        Permutation::from_images(elements.iter().map(|x| index[&f(x)]).collect()).expect("bijection on T")
    };
    let left: Vec<Permutation> = t.gens.iter().map(|s| on_elements(&|x| s.then(x))).collect();
    let right: Vec<Permutation> = t.gens.iter().map(|s| on_elements(&|x| x.then(s))).collect();
    let inversion = on_elements(&|x| x.inverse());

    let mut rng = ChaCha8Rng::seed_from_u64(0xd2);
    for a in automorphisms {
        if a.degree() != n {
            return Err(Error::DegreeMismatch(n, a.degree()));
        }
        for _ in 0..100 {
            let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
            let ij = index[&elements[i].then(&elements[j])] as usize;
            let lhs = a.image(ij);
            let rhs = index[&elements[a.image(i)].then(&elements[a.image(j)])] as usize;
            if lhs != rhs {
                return Err(Error::InvalidRecord { name: t.name().to_string(), msg: "automorphism fails the homomorphism check".into() });
            }
        }
    }

    let mut gens = left.clone();
    gens.extend(right.iter().cloned());
    gens.extend(automorphisms.iter().cloned());
    gens.push(inversion);
    let chain = StabilizerChain::build(n, &gens)?;
    let record = GroupSpecRecord {
        name: format!("d2_{}", t.name()),
        kind: Kind::HolomorphDiagonal,
        degree: n,
        expected_order: chain.order().to_string(),
        generators: None,
        params: Some(Params { base_group: Some(t.name().to_string()), ..Params::default() }),
        claims: None,
        provenance: "translations, automorphisms and inversion on the element set".into(),
    };
    let mut h = GroupHandle { record, gens, chain, subgroups: BTreeMap::new() };
    let mut holomorph = left.clone();
    holomorph.extend(right.iter().cloned());
    holomorph.extend(automorphisms.iter().cloned());
    h.subgroups.insert("holomorph".into(), holomorph);
    h.subgroups.insert("left".into(), left);
    h.subgroups.insert("right".into(), right);
    Ok(h)
}

/// Converts automorphisms of T given by conjugating permutations into permutations
/// of T's sorted element list.
pub fn conjugation_automorphisms(t: &GroupHandle, conjugators: &[Permutation]) -> Result<Vec<Permutation>> {
    let elements = enumerate_elements(&t.gens, t.degree(), HOLOMORPH_CAP)
        .ok_or_else(|| Error::Unsupported(format!("|T| exceeds the cap of {HOLOMORPH_CAP}")))?;
    let index: HashMap<&Permutation, u32> = elements.iter().enumerate().map(|(i, e)| (e, i as u32)).collect();
    conjugators
        .iter()
        .map(|c| {
            let images = elements
                .iter()
                .map(|x| index.get(&x.conjugate_by(c)).copied())
                .collect::<Option<Vec<u32>>>()
                .ok_or_else(|| Error::InvalidRecord { name: t.name().to_string(), msg: format!("{c} does not normalize T") })?;
            Permutation::from_images(images)
        })
        .collect()
}

/// R wr S2 in product action on `d^2` ordered pairs; pair `(i, j)` is point `i*d + j`.
pub fn build_product_action_wreath(r: &GroupHandle) -> Result<GroupHandle> {
    let d = r.degree();
    if d > WREATH_DEGREE_CAP {
        return Err(Error::Unsupported(format!("wreath product of degree {d} exceeds cap {WREATH_DEGREE_CAP}")));
    }
    let pairs = |f: &dyn Fn(usize, usize) -> (usize, usize)| {
        let images = (0..d * d).map(|x| {
            let (i, j) = f(x / d, x % d);
            (i * d + j) as u32
        });
        Permutation::from_images(images.collect()).expect("bijection on pairs")
    };
    let mut gens = Vec::new();
    for g in &r.gens {
        gens.push(pairs(&|i, j| (g.image(i), j)));
        gens.push(pairs(&|i, j| (i, g.image(j))));
    }
    gens.push(pairs(&|i, j| (j, i)));
    let order = r.order() * r.order() * 2u32;
    let record = GroupSpecRecord {
        name: format!("{}_wr_s2", r.name()),
        kind: Kind::WreathProductAction,
        degree: d * d,
        expected_order: order.to_string(),
        generators: None,
        params: Some(Params { base_group: Some(r.name().to_string()), ..Params::default() }),
        claims: None,
        provenance: "product action on ordered pairs".into(),
    };
    GroupHandle::new(record, gens)
}

fn matrix_generators(record: &GroupSpecRecord, payload: &MatrixPayload) -> Result<Vec<Permutation>> {
    let field = Field::new(payload.field.p, payload.field.k)?;
    let mats = payload.matrices.iter().map(|m| Matrix::new(&field, m)).collect::<Result<Vec<_>>>()?;
    let (perms, report) = gf::matrix_group_to_permutations(&field, &mats, payload.mode)?;
    if !report.faithful {
        return Err(Error::Unfaithful { projective: payload.mode == ActionMode::Projective });
    }
    if perms.first().is_some_and(|p| p.degree() != record.degree) {
        return Err(record.invalid(format!("matrix action has degree {}, record declares {}", perms[0].degree(), record.degree)));
    }
    Ok(perms)
}

/// Resolves record names to verified handles, caching each group once.
pub struct Catalog {
    dir: PathBuf,
    cache: Mutex<HashMap<String, Arc<Mutex<Option<Arc<GroupHandle>>>>>>,
}

impl Catalog {
    /// `dir` is the data directory containing `groups/` and `cases/`.
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Catalog { dir: dir.into(), cache: Mutex::new(HashMap::new()) }
    }

    /// Uses `$FACTORFORGE_DATA`, else the repository's `data/` directory when it exists,
    /// else `./data`.
    pub fn from_env() -> Self {
        Catalog::new(default_data_dir())
    }

    pub fn data_dir(&self) -> &Path {
        &self.dir
    }

    pub fn group_path(&self, name: &str) -> PathBuf {
        self.dir.join("groups").join(format!("{name}.json"))
    }

    pub fn cases_dir(&self) -> PathBuf {
        self.dir.join("cases")
    }

    /// Loads and verifies a record by name. Concurrent loads of the same name build it once.
    pub fn load(&self, name: &str) -> Result<Arc<GroupHandle>> {
        let slot = self.cache.lock().unwrap().entry(name.to_string()).or_default().clone();
        let mut slot = slot.lock().unwrap();
        if let Some(h) = slot.as_ref() {
            return Ok(h.clone());
        }
        let path = self.group_path(name);
        if !path.exists() {
            return Err(Error::MissingAsset(name.to_string()));
        }
        let record = read_record(&path)?;
        if record.name != name {
            return Err(record.invalid(format!("file {} declares name {:?}", path.display(), record.name)));
        }
        let handle = Arc::new(self.construct(record)?);
        *slot = Some(handle.clone());
        Ok(handle)
    }

    /// Builds the group a record describes and applies the order gate.
    pub fn construct(&self, record: GroupSpecRecord) -> Result<GroupHandle> {
        if record.params.as_ref().and_then(|p| p.base_group.as_deref()) == Some(record.name.as_str()) {
            return Err(record.invalid("record refers to itself"));
        }
        let mut handle = match record.kind {
            Kind::PermAsset => {
                let Some(Generators::Cycles(cycles)) = &record.generators else {
                    return Err(record.invalid("perm-asset needs cycle-string generators"));
                };
                let gens = cycles.iter().map(|c| Permutation::parse_cycles(c, record.degree)).collect::<Result<Vec<_>>>()?;
                return GroupHandle::new(record, gens);
            }
            Kind::MatrixAsset => {
                let Some(Generators::Matrices(payload)) = &record.generators else {
                    return Err(record.invalid("matrix-asset needs a matrix payload"));
                };
                let gens = matrix_generators(&record, payload)?;
                return GroupHandle::new(record, gens);
            }
            Kind::Natural => {
                let p = record.params()?;
                let (Some(n), Some(v)) = (p.n, p.variant) else {
                    return Err(record.invalid("natural needs params n and variant"));
                };
                build_natural(n, v)?
            }
            Kind::Psl2 => {
                let q = record.params()?.q.ok_or_else(|| record.invalid("psl2 needs params q"))?;
                build_psl2(q)?
            }
            Kind::HolomorphDiagonal => {
                let p = record.params()?;
                let t = self.load(p.base_group.as_deref().ok_or_else(|| record.invalid("missing base_group"))?)?;
                let conj = p.conjugators.iter().map(|c| Permutation::parse_cycles(c, t.degree())).collect::<Result<Vec<_>>>()?;
                let auts = conjugation_automorphisms(&t, &conj)?;
                build_holomorph_diagonal(&t, &auts)?
            }
            Kind::WreathProductAction => {
                let p = record.params()?;
                let r = self.load(p.base_group.as_deref().ok_or_else(|| record.invalid("missing base_group"))?)?;
                build_product_action_wreath(&r)?
            }
        };
        let expected = record.expected_order()?;
        if handle.degree() != record.degree {
            return Err(record.invalid(format!("construction has degree {}", handle.degree())));
        }
        if *handle.order() != expected {
            return Err(Error::OrderMismatch { name: record.name.clone(), expected, actual: handle.order().clone() });
        }
        handle.record = record;
        Ok(handle)
    }
}

pub fn default_data_dir() -> PathBuf {
    if let Some(dir) = std::env::var_os(DATA_ENV) {
        return PathBuf::from(dir);
    }
    let repo = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data");
    if repo.join("groups").is_dir() {
        return repo;
    }
    PathBuf::from("data")
}

pub fn read_record(path: &Path) -> Result<GroupSpecRecord> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
    serde_json::from_str(&text).map_err(|source| Error::Json { path: path.display().to_string(), source })
}

/// Loads a single record file; nested references resolve against the directory that
/// contains the file's `groups/` folder.
pub fn load_group_record(path: impl AsRef<Path>) -> Result<GroupHandle> {
    let path = path.as_ref();
    let record = read_record(path)?;
    let groups_dir = path.parent().unwrap_or(Path::new("."));
    let data_dir = groups_dir.parent().unwrap_or(Path::new("."));
    Catalog::new(data_dir).construct(record)
}
