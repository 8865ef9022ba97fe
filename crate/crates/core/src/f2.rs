//! Dense linear algebra over GF(2) on packed bit vectors.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct F2Vec {
    len: usize,
    words: Vec<u64>,
}

impl F2Vec {
    pub fn zero(len: usize) -> Self {
        F2Vec {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Self::zero(len);
        v.set(i, true);
        v
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut v = Self::zero(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    /// The low `len` bits of `mask`.
    pub fn from_mask(len: usize, mask: u64) -> Self {
        assert!(len <= 64);
        let mut v = Self::zero(len);
        if len > 0 {
            v.words[0] = if len == 64 {
                mask
            } else {
                mask & ((1 << len) - 1)
            };
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, b: bool) {
        assert!(i < self.len);
        let m = 1u64 << (i % 64);
        if b {
            self.words[i / 64] |= m;
        } else {
            self.words[i / 64] &= !m;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn add_assign(&mut self, other: &F2Vec) {
        assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn add(&self, other: &F2Vec) -> F2Vec {
        let mut v = self.clone();
        v.add_assign(other);
        v
    }

    pub fn dot(&self, other: &F2Vec) -> bool {
        assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .fold(0, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&i| self.get(i))
    }

    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, w)| **w != 0)
            .map(|(k, w)| 64 * k + w.trailing_zeros() as usize)
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }
}

impl fmt::Debug for F2Vec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// A matrix stored by rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct F2Matrix {
    cols: usize,
    rows: Vec<F2Vec>,
}

impl F2Matrix {
    pub fn new(cols: usize) -> Self {
        F2Matrix {
            cols,
            rows: Vec::new(),
        }
    }

    pub fn from_rows(cols: usize, rows: Vec<F2Vec>) -> Self {
        assert!(rows.iter().all(|r| r.len() == cols));
        F2Matrix { cols, rows }
    }

    pub fn push_row(&mut self, row: F2Vec) {
        assert_eq!(row.len(), self.cols);
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[F2Vec] {
        &self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn mul_vec(&self, x: &F2Vec) -> F2Vec {
        F2Vec::from_bits(&self.rows.iter().map(|r| r.dot(x)).collect::<Vec<_>>())
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (Vec<F2Vec>, Vec<usize>) {
        let mut rows = self.rows.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            let Some(k) = (r..rows.len()).find(|&k| rows[k].get(c)) else {
                continue;
            };
            rows.swap(r, k);
            let pivot = rows[r].clone();
            for (k, row) in rows.iter_mut().enumerate() {
                if k != r && row.get(c) {
                    row.add_assign(&pivot);
                }
            }
            pivots.push(c);
            r += 1;
        }
        rows.truncate(r);
        (rows, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of `{x : M·x = 0}`, one vector per free column, in column order.
    pub fn kernel(&self) -> Vec<F2Vec> {
        let (rows, pivots) = self.rref();
        let free = (0..self.cols).filter(|c| !pivots.contains(c));
        free.map(|f| {
            let mut x = F2Vec::unit(self.cols, f);
            for (row, &p) in rows.iter().zip(&pivots) {
                if row.get(f) {
                    x.set(p, true);
                }
            }
            x
        })
        .collect()
    }
}

/// A subspace of GF(2)^n kept in reduced row echelon form, so that equal
/// subspaces have identical representations.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Subspace {
    ambient: usize,
    basis: Vec<F2Vec>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn full(ambient: usize) -> Self {
        Self::span(ambient, (0..ambient).map(|i| F2Vec::unit(ambient, i)))
    }

    pub fn span(ambient: usize, vectors: impl IntoIterator<Item = F2Vec>) -> Self {
        let m = F2Matrix::from_rows(ambient, vectors.into_iter().collect());
        let (basis, pivots) = m.rref();
        Subspace {
            ambient,
            basis,
            pivots,
        }
    }

    /// The kernel of `m`, as a subspace of its column space.
    pub fn kernel_of(m: &F2Matrix) -> Self {
        Self::span(m.cols(), m.kernel())
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[F2Vec] {
        &self.basis
    }

    pub fn reduce(&self, v: &F2Vec) -> F2Vec {
        let mut r = v.clone();
        for (b, &p) in self.basis.iter().zip(&self.pivots) {
            if r.get(p) {
                r.add_assign(b);
            }
        }
        r
    }

    pub fn contains(&self, v: &F2Vec) -> bool {
        self.reduce(v).is_zero()
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        other.basis.iter().all(|b| self.contains(b))
    }

    pub fn with(&self, v: &F2Vec) -> Self {
        Self::span(self.ambient, self.basis.iter().cloned().chain([v.clone()]))
    }

    pub fn sum(&self, other: &Subspace) -> Self {
        Self::span(self.ambient, self.basis.iter().chain(&other.basis).cloned())
    }

    /// `{x ∈ self : ℓ(x) = 0}` for each linear form given as a vector `ℓ`.
    pub fn restrict(&self, forms: &[F2Vec]) -> Self {
        // coordinates of elements in terms of the basis
        let k = self.dim();
        let mut m = F2Matrix::new(k);
        for l in forms {
            m.push_row(F2Vec::from_bits(
                &self.basis.iter().map(|b| b.dot(l)).collect::<Vec<_>>(),
            ));
        }
        Self::span(
            self.ambient,
            m.kernel().into_iter().map(|c| self.combine(&c)),
        )
    }

    /// `Σ c_k·basis_k`.
    pub fn combine(&self, coeffs: &F2Vec) -> F2Vec {
        let mut v = F2Vec::zero(self.ambient);
        for k in coeffs.ones() {
            v.add_assign(&self.basis[k]);
        }
        v
    }

    pub fn intersection(&self, other: &Subspace) -> Self {
        // x = Σ α_k b_k = Σ β_l c_l  ⇔  (α, β) in the kernel of [B | C]ᵀ
        let (k, l) = (self.dim(), other.dim());
        let mut m = F2Matrix::new(k + l);
        for i in 0..self.ambient {
            let mut row = F2Vec::zero(k + l);
            for (j, b) in self.basis.iter().enumerate() {
                row.set(j, b.get(i));
            }
            for (j, c) in other.basis.iter().enumerate() {
                row.set(k + j, c.get(i));
            }
            m.push_row(row);
        }
        Self::span(
            self.ambient,
            m.kernel().into_iter().map(|x| {
                let mut v = F2Vec::zero(self.ambient);
                for j in x.ones().filter(|&j| j < k) {
                    v.add_assign(&self.basis[j]);
                }
                v
            }),
        )
    }

    /// All `2^dim` elements, in the order of their coordinate masks.
    pub fn elements(&self) -> Vec<F2Vec> {
        assert!(self.dim() <= 24, "refusing to enumerate a large subspace");
        (0u64..1 << self.dim())
            .map(|mask| self.combine(&F2Vec::from_mask(self.dim(), mask)))
            .collect()
    }
}
