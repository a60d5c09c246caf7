use rand::Rng;

use super::gf3::{self, Trits};
use crate::error::{Error, Result};

#[inline]
pub(crate) fn inv_mod(a: u32, p: u32) -> u32 {
    debug_assert!(a % p != 0);
    let mut r = 1u64;
    let mut b = (a % p) as u64;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p as u64;
        }
        b = b * b % p as u64;
        e >>= 1;
    }
    r as u32
}

/// In-place reduced row echelon form of a row-major `rows x cols` block
/// over GF(p). Nonzero rows end up first; returns the rank.
pub(crate) fn rref_in_place(p: u32, data: &mut [u32], rows: usize, cols: usize) -> usize {
    let pm = p as u64;
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(piv) = (rank..rows).find(|&r| data[r * cols + col] != 0) else {
            continue;
        };
        if piv != rank {
            for c in 0..cols {
                data.swap(piv * cols + c, rank * cols + c);
            }
        }
        let inv = inv_mod(data[rank * cols + col], p) as u64;
        if inv != 1 {
            for c in col..cols {
                let x = &mut data[rank * cols + c];
                *x = (*x as u64 * inv % pm) as u32;
            }
        }
        for r in 0..rows {
            if r == rank {
                continue;
            }
            let f = data[r * cols + col];
            if f == 0 {
                continue;
            }
            let f = (pm - f as u64) % pm;
            for c in col..cols {
                let pv = data[rank * cols + c] as u64;
                if pv != 0 {
                    let x = &mut data[r * cols + c];
                    *x = ((*x as u64 + f * pv) % pm) as u32;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// A dense matrix over GF(p), row-major. This is the scalar reference
/// implementation; it works for any prime `p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MatGF {
    p: u32,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl MatGF {
    pub fn new(p: u32, rows: usize, cols: usize, data: Vec<u32>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, found: data.len() });
        }
        if data.iter().any(|&x| x >= p) {
            return Err(Error::InvalidInput(format!("matrix entry out of range for GF({p})")));
        }
        Ok(MatGF { p, rows, cols, data })
    }

    pub fn zeros(p: u32, rows: usize, cols: usize) -> Self {
        MatGF { p, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(p: u32, n: usize) -> Self {
        let mut m = Self::zeros(p, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn from_rows(p: u32, cols: usize, rows: &[Vec<u32>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch { expected: cols, found: r.len() });
            }
            data.extend_from_slice(r);
        }
        Self::new(p, rows.len(), cols, data)
    }

    pub fn random<R: Rng + ?Sized>(p: u32, rows: usize, cols: usize, rng: &mut R) -> Self {
        let data = (0..rows * cols).map(|_| rng.gen_range(0..p)).collect();
        MatGF { p, rows, cols, data }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        self.data[r * self.cols + c] = v % self.p;
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[u32] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.p, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        t
    }

    /// Reduced row echelon form (zero rows kept at the bottom) and rank.
    pub fn rref(&self) -> (MatGF, usize) {
        let mut out = self.clone();
        let rank = rref_in_place(self.p, &mut out.data, self.rows, self.cols);
        (out, rank)
    }

    pub fn rank(&self) -> usize {
        if self.p == 3 && self.cols <= 64 {
            let rows: Vec<Trits> = (0..self.rows).map(|r| Trits::from_slice(self.row(r))).collect();
            return gf3::rank(&rows, self.cols);
        }
        self.rref().1
    }

    pub fn is_nonsingular(&self) -> bool {
        self.rows == self.cols && self.rank() == self.rows
    }

    pub fn mul(&self, other: &MatGF) -> Result<MatGF> {
        if self.cols != other.rows || self.p != other.p {
            return Err(Error::DimensionMismatch { expected: self.cols, found: other.rows });
        }
        let pm = self.p as u64;
        let mut out = Self::zeros(self.p, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k) as u64;
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let x = &mut out.data[i * other.cols + j];
                    *x = ((*x as u64 + a * other.get(k, j) as u64) % pm) as u32;
                }
            }
        }
        Ok(out)
    }

    /// Row-vector product `v M`.
    pub fn vec_mul(&self, v: &[u32]) -> Vec<u32> {
        assert_eq!(v.len(), self.rows, "vector length must match row count");
        let pm = self.p as u64;
        let mut out = vec![0u64; self.cols];
        for (i, &a) in v.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                *o = (*o + a as u64 * self.get(i, j) as u64) % pm;
            }
        }
        out.into_iter().map(|x| x as u32).collect()
    }

    pub fn add(&self, other: &MatGF) -> Result<MatGF> {
        if self.rows != other.rows || self.cols != other.cols || self.p != other.p {
            return Err(Error::DimensionMismatch { expected: self.data.len(), found: other.data.len() });
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| (a + b) % self.p).collect();
        Ok(MatGF { p: self.p, rows: self.rows, cols: self.cols, data })
    }

    pub fn sub(&self, other: &MatGF) -> Result<MatGF> {
        if self.rows != other.rows || self.cols != other.cols || self.p != other.p {
            return Err(Error::DimensionMismatch { expected: self.data.len(), found: other.data.len() });
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a + self.p - b) % self.p)
            .collect();
        Ok(MatGF { p: self.p, rows: self.rows, cols: self.cols, data })
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    /// Solves `x M = b` for a square nonsingular `M`.
    pub fn solve_left(&self, b: &[u32]) -> Result<Vec<u32>> {
        let n = self.rows;
        if self.cols != n || b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: b.len() });
        }
        // x M = b  <=>  M^T x^T = b^T; reduce [M^T | b]
        let t = self.transpose();
        let cols = n + 1;
        let mut aug = Vec::with_capacity(n * cols);
        for r in 0..n {
            aug.extend_from_slice(t.row(r));
            aug.push(b[r] % self.p);
        }
        let rank = rref_in_place(self.p, &mut aug, n, cols);
        if rank < n || (0..n).any(|r| aug[r * cols + r] != 1) {
            return Err(Error::Domain("singular system".into()));
        }
        Ok((0..n).map(|r| aug[r * cols + n]).collect())
    }
}
