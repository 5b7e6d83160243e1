//! Small finite fields GF(p^k), p in {2,3,5}, k in {1,2}, matrices over them, and
//! the induced permutation actions on nonzero vectors or projective points.
//!
//! An element `c0 + c1*a` (with `a` a root of the fixed irreducible quadratic) is
//! encoded as the integer `c0 + p*c1`. Vectors are rows and matrices act on the
//! right, `v -> vM`. Domain points are ordered by the integer `sum v_i q^(n-1-i)`.

use crate::error::{Error, Result};
use crate::perm::Permutation;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Field {
    p: u32,
    k: u32,
    q: usize,
    /// `x^2 = -(c1 x + c0)` for k = 2, stored as `(c0, c1)`.
    modulus: Option<(u32, u32)>,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    inv: Vec<u8>,
}

impl Field {
    /// GF(p^k) with the fixed modulus x^2+x+1 (q=4), x^2+1 (q=9), x^2+2 (q=25).
    pub fn new(p: u32, k: u32) -> Result<Self> {
        let modulus = match (p, k) {
            (2 | 3 | 5, 1) => None,
            (2, 2) => Some((1, 1)),
            (3, 2) => Some((1, 0)),
            (5, 2) => Some((2, 0)),
            _ => return Err(Error::UnsupportedField { p, k }),
        };
        if let Some((c0, c1)) = modulus {
            assert!((0..p).all(|x| (x * x + c1 * x + c0) % p != 0), "modulus has a root in GF({p})");
        }
        let q = p.pow(k) as usize;
        let split = |a: usize| ((a as u32) % p, (a as u32) / p);
        let join = |c0: u32, c1: u32| (c0 % p + p * (c1 % p)) as u8;
        let mut add = vec![0u8; q * q];
        let mut mul = vec![0u8; q * q];
        for a in 0..q {
            for b in 0..q {
                let (a0, a1) = split(a);
                let (b0, b1) = split(b);
                add[a * q + b] = join(a0 + b0, a1 + b1);
                // (a0 + a1 x)(b0 + b1 x) = a0b0 + (a0b1 + a1b0) x + a1b1 x^2
                let (m0, m1) = modulus.unwrap_or((0, 0));
                let t = a1 * b1;
                let c0 = a0 * b0 + t * (p - m0);
                let c1 = a0 * b1 + a1 * b0 + t * (p - m1);
                mul[a * q + b] = join(c0, c1);
            }
        }
        let mut neg = vec![0u8; q];
        let mut inv = vec![0u8; q];
        for a in 0..q {
            neg[a] = (0..q).find(|&b| add[a * q + b] == 0).unwrap() as u8;
            if a != 0 {
                inv[a] = (1..q).find(|&b| mul[a * q + b] == 1).expect("field element without inverse") as u8;
            }
        }
        Ok(Field { p, k, q, modulus, add, mul, neg, inv })
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.k
    }

    pub fn size(&self) -> usize {
        self.q
    }

    /// The irreducible quadratic as `(c0, c1)` meaning `x^2 + c1 x + c0`.
    pub fn modulus(&self) -> Option<(u32, u32)> {
        self.modulus
    }

    #[inline]
    pub fn add(&self, a: u8, b: u8) -> u8 {
        self.add[a as usize * self.q + b as usize]
    }

    #[inline]
    pub fn mul(&self, a: u8, b: u8) -> u8 {
        self.mul[a as usize * self.q + b as usize]
    }

    pub fn neg(&self, a: u8) -> u8 {
        self.neg[a as usize]
    }

    pub fn sub(&self, a: u8, b: u8) -> u8 {
        self.add(a, self.neg(b))
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: u8) -> Option<u8> {
        (a != 0).then(|| self.inv[a as usize])
    }

    pub fn pow(&self, a: u8, e: u64) -> u8 {
        (0..e).fold(1, |acc, _| self.mul(acc, a))
    }

    pub fn multiplicative_order(&self, a: u8) -> Option<u64> {
        if a == 0 {
            return None;
        }
        let mut x = a;
        let mut n = 1;
        while x != 1 {
            x = self.mul(x, a);
            n += 1;
        }
        Some(n)
    }

    /// Smallest (by encoding) element of multiplicative order q-1.
    pub fn primitive_element(&self) -> u8 {
        (1..self.q as u8).find(|&a| self.multiplicative_order(a) == Some(self.q as u64 - 1)).unwrap()
    }

    pub fn elements(&self) -> impl Iterator<Item = u8> {
        0..self.q as u8
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    n: usize,
    entries: Vec<u8>,
}

impl Matrix {
    pub fn new(field: &Field, rows: &[Vec<u32>]) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(Error::MixedMatrices);
            }
            for &x in r {
                if x as usize >= field.size() {
                    return Err(Error::Unsupported(format!("entry {x} is not an element of GF({})", field.size())));
                }
                entries.push(x as u8);
            }
        }
        Ok(Matrix { n, entries })
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0u8; n * n];
        for i in 0..n {
            entries[i * n + i] = 1;
        }
        Matrix { n, entries }
    }

    pub fn scalar(n: usize, c: u8) -> Self {
        let mut m = Matrix::identity(n);
        for i in 0..n {
            m.entries[i * n + i] = c;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.entries[i * self.n + j]
    }

    pub fn mul(&self, field: &Field, other: &Matrix) -> Matrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut entries = vec![0u8; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0;
                for t in 0..n {
                    s = field.add(s, field.mul(self.get(i, t), other.get(t, j)));
                }
                entries[i * n + j] = s;
            }
        }
        Matrix { n, entries }
    }

    pub fn det(&self, field: &Field) -> u8 {
        let n = self.n;
        let mut a = self.entries.clone();
        let mut det = 1u8;
        for col in 0..n {
            let Some(piv) = (col..n).find(|&r| a[r * n + col] != 0) else {
                return 0;
            };
            if piv != col {
                for j in 0..n {
                    a.swap(piv * n + j, col * n + j);
                }
                det = field.neg(det);
            }
            let pv = a[col * n + col];
            det = field.mul(det, pv);
            let pinv = field.inv(pv).unwrap();
            for r in col + 1..n {
                let f = field.mul(a[r * n + col], pinv);
                if f == 0 {
                    continue;
                }
                for j in col..n {
                    let v = field.mul(f, a[col * n + j]);
                    a[r * n + j] = field.sub(a[r * n + j], v);
                }
            }
        }
        det
    }

    pub fn is_scalar(&self) -> bool {
        let c = self.get(0, 0);
        (0..self.n).all(|i| (0..self.n).all(|j| self.get(i, j) == if i == j { c } else { 0 }))
    }

    /// Row vector times matrix.
    fn apply(&self, field: &Field, v: &[u8], out: &mut [u8]) {
        for j in 0..self.n {
            let mut s = 0;
            for (i, &x) in v.iter().enumerate() {
                if x != 0 {
                    s = field.add(s, field.mul(x, self.get(i, j)));
                }
            }
            out[j] = s;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionMode {
    Vectors,
    Projective,
}

/// The ordered point set acted on by `n x n` matrices over a field.
#[derive(Clone, Debug)]
pub struct Domain {
    field: Field,
    n: usize,
    mode: ActionMode,
    codes: Vec<usize>,
    index: Vec<u32>,
}

impl Domain {
    pub fn new(field: &Field, n: usize, mode: ActionMode) -> Self {
        let q = field.size();
        let total = q.pow(n as u32);
        let mut index = vec![u32::MAX; total];
        let mut codes = Vec::new();
        let mut v = vec![0u8; n];
        for code in 1..total {
            decode(code, q, &mut v);
            if mode == ActionMode::Projective && v.iter().find(|&&x| x != 0) != Some(&1) {
                continue;
            }
            index[code] = codes.len() as u32;
            codes.push(code);
        }
        Domain { field: field.clone(), n, mode, codes, index }
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn point(&self, i: usize) -> Vec<u8> {
        let mut v = vec![0u8; self.n];
        decode(self.codes[i], self.field.size(), &mut v);
        v
    }

    /// Index of a nonzero vector (normalized first in projective mode).
    pub fn index_of(&self, v: &[u8]) -> Option<usize> {
        let f = &self.field;
        let lead = *v.iter().find(|&&x| x != 0)?;
        let scale = if self.mode == ActionMode::Projective { f.inv(lead)? } else { 1 };
        let code = v.iter().fold(0usize, |acc, &x| acc * f.size() + f.mul(x, scale) as usize);
        match self.index[code] {
            u32::MAX => None,
            i => Some(i as usize),
        }
    }

    pub fn permutation_of(&self, m: &Matrix) -> Result<Permutation> {
        if m.dim() != self.n {
            return Err(Error::MixedMatrices);
        }
        let mut images = Vec::with_capacity(self.len());
        let mut v = vec![0u8; self.n];
        let mut w = vec![0u8; self.n];
        for &code in &self.codes {
            decode(code, self.field.size(), &mut v);
            m.apply(&self.field, &v, &mut w);
            images.push(self.index_of(&w).ok_or(Error::SingularMatrix)? as u32);
        }
        Permutation::from_images(images).map_err(|_| Error::SingularMatrix)
    }
}

fn decode(mut code: usize, q: usize, v: &mut [u8]) {
    for x in v.iter_mut().rev() {
        *x = (code % q) as u8;
        code /= q;
    }
}

/// Outcome of checking that a matrix group acts faithfully on its domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Faithfulness {
    /// Generators acting trivially although they are not identity (vectors) or scalar
    /// (projective) matrices.
    pub trivial_nonscalar_generators: Vec<usize>,
    /// The action on the coordinate frame separates the generated group from its kernel.
    pub faithful: bool,
}

/// Induced permutations of `mats` on the domain of `mode`, with a faithfulness report.
///
/// The kernel of the action of GL(n,q) on nonzero vectors is trivial, and on
/// projective points it is the group of scalars; the report therefore only needs to
/// confirm that no generator is a hidden kernel element, which is the case exactly
/// when each generator acting trivially is itself the identity (respectively scalar).
pub fn matrix_group_to_permutations(field: &Field, mats: &[Matrix], mode: ActionMode) -> Result<(Vec<Permutation>, Faithfulness)> {
    let Some(first) = mats.first() else {
        return Err(Error::MixedMatrices);
    };
    let n = first.dim();
    if mats.iter().any(|m| m.dim() != n) {
        return Err(Error::MixedMatrices);
    }
    for m in mats {
        if m.det(field) == 0 {
            return Err(Error::SingularMatrix);
        }
    }
    let domain = Domain::new(field, n, mode);
    let perms: Vec<Permutation> = mats.iter().map(|m| domain.permutation_of(m)).collect::<Result<_>>()?;
    let mut bad = Vec::new();
    for (i, (m, p)) in mats.iter().zip(&perms).enumerate() {
        let kernel_element = match mode {
            ActionMode::Vectors => *m == Matrix::identity(n),
            ActionMode::Projective => m.is_scalar(),
        };
        if p.is_identity() != kernel_element {
            bad.push(i);
        }
    }
    let faithful = bad.is_empty();
    Ok((perms, Faithfulness { trivial_nonscalar_generators: bad, faithful }))
}
