//! Permutations of `{0, .., d-1}` stored as image arrays.
//!
//! Products apply the left factor first: `p.then(&q)` sends `i` to `q(p(i))`.
//! Text I/O uses 1-based disjoint cycle notation such as `(1,2,3)(4,5)`.

use std::fmt;

use num_integer::Integer;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<u32>,
}

impl Permutation {
    pub fn identity(degree: usize) -> Self {
        Permutation { images: (0..degree as u32).collect() }
    }

    /// Builds a permutation from its image array, checking bijectivity.
    pub fn from_images(images: Vec<u32>) -> Result<Self> {
        let d = images.len();
        let mut seen = vec![false; d];
        for &x in &images {
            let x = x as usize;
            if x >= d {
                return Err(Error::PointOutOfRange { point: x + 1, degree: d });
            }
            if seen[x] {
                return Err(Error::RepeatedPoint { point: x + 1 });
            }
            seen[x] = true;
        }
        Ok(Permutation { images })
    }

    pub(crate) fn from_images_unchecked(images: Vec<u32>) -> Self {
        Permutation { images }
    }

    /// Parses 1-based cycle notation; `()` (or an empty string) is the identity.
    pub fn parse_cycles(text: &str, degree: usize) -> Result<Self> {
        let mut images: Vec<u32> = (0..degree as u32).collect();
        let mut used = vec![false; degree];
        let bytes = text.as_bytes();
        let mut pos = 0;
        let skip_ws = |pos: &mut usize| {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
        };
        let bad = |pos: usize, msg: &str| Error::Parse { pos, msg: msg.to_string() };
        loop {
            skip_ws(&mut pos);
            if pos == bytes.len() {
                break;
            }
            if bytes[pos] != b'(' {
                return Err(bad(pos, "expected '('"));
            }
            pos += 1;
            let mut cycle: Vec<usize> = Vec::new();
            loop {
                skip_ws(&mut pos);
                if pos == bytes.len() {
                    return Err(bad(pos, "unterminated cycle"));
                }
                if bytes[pos] == b')' {
                    pos += 1;
                    break;
                }
                if !cycle.is_empty() {
                    if bytes[pos] != b',' {
                        return Err(bad(pos, "expected ',' or ')'"));
                    }
                    pos += 1;
                    skip_ws(&mut pos);
                }
                let start = pos;
                while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                    pos += 1;
                }
                if start == pos {
                    return Err(bad(start, "expected a point"));
                }
                let point: usize = text[start..pos].parse().map_err(|_| bad(start, "point too large"))?;
                if point == 0 || point > degree {
                    return Err(Error::PointOutOfRange { point, degree });
                }
                if used[point - 1] {
                    return Err(Error::RepeatedPoint { point });
                }
                used[point - 1] = true;
                cycle.push(point - 1);
            }
            for (i, &a) in cycle.iter().enumerate() {
                images[a] = cycle[(i + 1) % cycle.len()] as u32;
            }
        }
        Ok(Permutation { images })
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[u32] {
        &self.images
    }

    #[inline]
    pub fn image(&self, point: usize) -> usize {
        self.images[point] as usize
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i as u32 == x)
    }

    /// `self` followed by `other`. Panics on a degree mismatch; see [`compose`] for
    /// the checked form.
    #[inline]
    pub fn then(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.degree(), other.degree(), "degree mismatch in composition");
        let q = &other.images;
        Permutation { images: self.images.iter().map(|&x| q[x as usize]).collect() }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u32; self.images.len()];
        for (i, &x) in self.images.iter().enumerate() {
            inv[x as usize] = i as u32;
        }
        Permutation { images: inv }
    }

    /// `other^-1 * self * other`.
    pub fn conjugate_by(&self, other: &Permutation) -> Permutation {
        other.inverse().then(self).then(other)
    }

    pub fn pow(&self, mut e: u64) -> Permutation {
        let mut base = self.clone();
        let mut acc = Permutation::identity(self.degree());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.then(&base);
            }
            base = base.then(&base);
            e >>= 1;
        }
        acc
    }

    /// Disjoint cycles of length at least two, each starting at its smallest point.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.degree()];
        let mut out = Vec::new();
        for start in 0..self.degree() {
            if seen[start] || self.image(start) == start {
                continue;
            }
            let mut c = vec![start];
            seen[start] = true;
            let mut x = self.image(start);
            while x != start {
                seen[x] = true;
                c.push(x);
                x = self.image(x);
            }
            out.push(c);
        }
        out
    }

    /// Sorted multiset of all cycle lengths, fixed points included.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut seen = vec![false; self.degree()];
        let mut lens = Vec::new();
        for start in 0..self.degree() {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                len += 1;
                x = self.image(x);
            }
            lens.push(len);
        }
        lens.sort_unstable();
        lens
    }

    /// Least common multiple of the cycle lengths.
    ///
    /// # Panics
    ///
    /// If the order does not fit in a `u64`, which needs degrees far beyond anything
    /// this crate is used with.
    pub fn element_order(&self) -> u64 {
        let mut seen = vec![false; self.degree()];
        let mut order: u64 = 1;
        for start in 0..self.degree() {
            if seen[start] {
                continue;
            }
            let mut len: u64 = 0;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                len += 1;
                x = self.image(x);
            }
            let g = order.gcd(&len);
            order = order.checked_mul(len / g).expect("element order overflows u64");
        }
        order
    }

    pub fn smallest_moved_point(&self) -> Option<usize> {
        self.images.iter().enumerate().find(|(i, &x)| *i as u32 != x).map(|(i, _)| i)
    }

    pub fn is_even(&self) -> bool {
        self.cycles().iter().filter(|c| c.len() % 2 == 0).count() % 2 == 0
    }

    pub fn to_cycle_string(&self) -> String {
        self.to_string()
    }

    /// Writes `self` followed by `other` into `out` without allocating.
    #[inline]
    pub(crate) fn then_into(&self, other: &Permutation, out: &mut Vec<u32>) {
        out.clear();
        let q = &other.images;
        out.extend(self.images.iter().map(|&x| q[x as usize]));
    }

    pub(crate) fn into_images(self) -> Vec<u32> {
        self.images
    }
}

/// Checked product: maps `i` to `q(p(i))`.
pub fn compose(p: &Permutation, q: &Permutation) -> Result<Permutation> {
    if p.degree() != q.degree() {
        return Err(Error::DegreeMismatch(p.degree(), q.degree()));
    }
    Ok(p.then(q))
}

/// Multiplies a word left to right; the empty word gives the identity of `degree`.
pub fn product<'a, I: IntoIterator<Item = &'a Permutation>>(degree: usize, word: I) -> Permutation {
    word.into_iter().fold(Permutation::identity(degree), |acc, g| acc.then(g))
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return f.write_str("()");
        }
        for c in cycles {
            f.write_str("(")?;
            for (i, x) in c.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{}", x + 1)?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation[{}]{}", self.degree(), self)
    }
}
