use std::fmt;

use serde::{Deserialize, Serialize};

use super::gf3::{self, Trits};
use super::matrix::{rref_in_place, MatGF};
use crate::error::{Error, Result};

/// Ambient dimensions up to this size use the bit-sliced kernel when `p = 3`
/// (the intersection routine works on doubled rows).
const PACKED_LIMIT: usize = 32;

#[derive(Clone, PartialEq, Eq, Hash)]
enum Rows {
    Gf3(Vec<Trits>),
    /// Row-major, `dim * ambient` entries.
    Scalar(Vec<u32>),
}

/// A linear subspace of `GF(p)^N`, stored as its canonical RREF basis.
///
/// Equal subspaces have identical bases, so `==` and `Hash` are exact.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    p: u32,
    ambient: usize,
    rows: Rows,
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Subspace")
            .field("p", &self.p)
            .field("ambient", &self.ambient)
            .field("basis", &self.basis())
            .finish()
    }
}

fn uses_packed(p: u32, ambient: usize) -> bool {
    p == 3 && ambient <= PACKED_LIMIT
}

impl Subspace {
    pub fn zero(p: u32, ambient: usize) -> Self {
        let rows = if uses_packed(p, ambient) { Rows::Gf3(Vec::new()) } else { Rows::Scalar(Vec::new()) };
        Subspace { p, ambient, rows }
    }

    pub fn whole(p: u32, ambient: usize) -> Self {
        let id: Vec<Vec<u32>> = (0..ambient)
            .map(|i| {
                let mut v = vec![0; ambient];
                v[i] = 1;
                v
            })
            .collect();
        Self::span(p, ambient, &id).expect("identity rows are valid")
    }

    /// Span of the given vectors.
    pub fn span<V: AsRef<[u32]>>(p: u32, ambient: usize, vectors: &[V]) -> Result<Self> {
        for v in vectors {
            let v = v.as_ref();
            if v.len() != ambient {
                return Err(Error::DimensionMismatch { expected: ambient, found: v.len() });
            }
            if v.iter().any(|&x| x >= p) {
                return Err(Error::InvalidInput(format!("coordinate out of range for GF({p})")));
            }
        }
        if uses_packed(p, ambient) {
            let rows = vectors.iter().map(|v| Trits::from_slice(v.as_ref())).collect();
            Ok(Self::from_trits(ambient, rows))
        } else {
            let mut data: Vec<u32> = vectors.iter().flat_map(|v| v.as_ref().iter().copied()).collect();
            let rank = rref_in_place(p, &mut data, vectors.len(), ambient);
            data.truncate(rank * ambient);
            Ok(Subspace { p, ambient, rows: Rows::Scalar(data) })
        }
    }

    /// Span of packed GF(3) rows. Panics if `ambient` exceeds the packed limit.
    pub fn from_trits(ambient: usize, mut rows: Vec<Trits>) -> Self {
        assert!(uses_packed(3, ambient), "ambient dimension {ambient} too large for packed rows");
        gf3::rref(&mut rows, ambient);
        Subspace { p: 3, ambient, rows: Rows::Gf3(rows) }
    }

    /// Row space of a matrix.
    pub fn row_space(m: &MatGF) -> Self {
        let rows: Vec<Vec<u32>> = (0..m.rows()).map(|r| m.row(r).to_vec()).collect();
        Self::span(m.p(), m.cols(), &rows).expect("matrix rows are valid")
    }

    /// The projective point `<v>`, normalized so its leading coordinate is 1.
    pub fn point(p: u32, v: &[u32]) -> Result<Self> {
        let s = Self::span(p, v.len(), &[v])?;
        if s.dim() != 1 {
            return Err(Error::InvalidInput("the zero vector is not a projective point".into()));
        }
        Ok(s)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    /// Algebraic dimension (rank of the basis).
    pub fn dim(&self) -> usize {
        match &self.rows {
            Rows::Gf3(r) => r.len(),
            Rows::Scalar(d) => d.len() / self.ambient.max(1),
        }
    }

    /// Projective dimension `dim - 1`.
    pub fn projective_dim(&self) -> isize {
        self.dim() as isize - 1
    }

    pub fn is_packed(&self) -> bool {
        matches!(self.rows, Rows::Gf3(_))
    }

    /// Packed basis rows, when the bit-sliced kernel is in use.
    pub fn trits(&self) -> Option<&[Trits]> {
        match &self.rows {
            Rows::Gf3(r) => Some(r),
            Rows::Scalar(_) => None,
        }
    }

    pub fn basis(&self) -> Vec<Vec<u32>> {
        match &self.rows {
            Rows::Gf3(r) => r.iter().map(|t| t.to_vec(self.ambient)).collect(),
            Rows::Scalar(d) => d.chunks(self.ambient).map(|c| c.to_vec()).collect(),
        }
    }

    pub fn basis_matrix(&self) -> MatGF {
        MatGF::from_rows(self.p, self.ambient, &self.basis()).expect("basis rows are valid")
    }

    fn check_compatible(&self, other: &Subspace) -> Result<()> {
        if self.p != other.p || self.ambient != other.ambient {
            return Err(Error::DimensionMismatch { expected: self.ambient, found: other.ambient });
        }
        Ok(())
    }

    /// `A + B`.
    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        self.check_compatible(other)?;
        match (&self.rows, &other.rows) {
            (Rows::Gf3(a), Rows::Gf3(b)) => {
                let rows = a.iter().chain(b).copied().collect();
                Ok(Self::from_trits(self.ambient, rows))
            }
            _ => {
                let rows: Vec<Vec<u32>> = self.basis().into_iter().chain(other.basis()).collect();
                Self::span(self.p, self.ambient, &rows)
            }
        }
    }

    /// Span of several subspaces at once.
    pub fn join(parts: &[&Subspace]) -> Result<Subspace> {
        let Some(first) = parts.first() else {
            return Err(Error::InvalidInput("join of no subspaces".into()));
        };
        let mut acc = (*first).clone();
        for s in &parts[1..] {
            acc = acc.sum(s)?;
        }
        Ok(acc)
    }

    /// Dimension of the span of several subspaces, without building it.
    pub fn join_dim(parts: &[&Subspace]) -> Result<usize> {
        let Some(first) = parts.first() else {
            return Ok(0);
        };
        for s in parts {
            first.check_compatible(s)?;
        }
        if first.is_packed() {
            let mut rows: Vec<Trits> = parts.iter().flat_map(|s| s.trits().unwrap().iter().copied()).collect();
            Ok(gf3::rref(&mut rows, first.ambient))
        } else {
            let mut data: Vec<u32> = Vec::new();
            let mut n = 0;
            for s in parts {
                for r in s.basis() {
                    data.extend(r);
                    n += 1;
                }
            }
            Ok(rref_in_place(first.p, &mut data, n, first.ambient))
        }
    }

    /// `A ∩ B`, by the Zassenhaus sum-intersection reduction.
    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        self.check_compatible(other)?;
        let n = self.ambient;
        match (&self.rows, &other.rows) {
            (Rows::Gf3(a), Rows::Gf3(b)) => {
                let mut rows: Vec<Trits> = a
                    .iter()
                    .map(|&r| Trits { ones: r.ones | (r.ones << n), twos: r.twos | (r.twos << n) })
                    .chain(b.iter().copied())
                    .collect();
                gf3::rref(&mut rows, 2 * n);
                let left = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
                let meet = rows.into_iter().filter(|r| r.support() & left == 0).map(|r| r.shr(n as u32)).collect();
                Ok(Self::from_trits(n, meet))
            }
            _ => {
                let cols = 2 * n;
                let mut data = Vec::new();
                let mut count = 0;
                for r in self.basis() {
                    data.extend_from_slice(&r);
                    data.extend_from_slice(&r);
                    count += 1;
                }
                for r in other.basis() {
                    data.extend_from_slice(&r);
                    data.extend(std::iter::repeat(0).take(n));
                    count += 1;
                }
                let rank = rref_in_place(self.p, &mut data, count, cols);
                let meet: Vec<Vec<u32>> = (0..rank)
                    .map(|r| &data[r * cols..(r + 1) * cols])
                    .filter(|row| row[..n].iter().all(|&x| x == 0))
                    .map(|row| row[n..].to_vec())
                    .collect();
                Self::span(self.p, n, &meet)
            }
        }
    }

    /// True when `A ∩ B = 0`, decided by a rank count.
    pub fn is_disjoint(&self, other: &Subspace) -> Result<bool> {
        Ok(Self::join_dim(&[self, other])? == self.dim() + other.dim())
    }

    pub fn contains_vector(&self, v: &[u32]) -> Result<bool> {
        if v.len() != self.ambient {
            return Err(Error::DimensionMismatch { expected: self.ambient, found: v.len() });
        }
        Ok(match &self.rows {
            Rows::Gf3(r) => gf3::reduce(r, Trits::from_slice(v)).is_zero(),
            Rows::Scalar(_) => self.scalar_residual(v).iter().all(|&x| x == 0),
        })
    }

    /// Membership for a packed vector (only valid for packed subspaces).
    #[inline]
    pub fn contains_trits(&self, v: Trits) -> bool {
        match &self.rows {
            Rows::Gf3(r) => gf3::reduce(r, v).is_zero(),
            Rows::Scalar(_) => panic!("contains_trits on a scalar-backed subspace"),
        }
    }

    fn scalar_residual(&self, v: &[u32]) -> Vec<u32> {
        let pm = self.p as u64;
        let mut v: Vec<u32> = v.to_vec();
        for row in self.basis() {
            let lead = row.iter().position(|&x| x != 0).expect("basis rows are nonzero");
            let f = v[lead];
            if f == 0 {
                continue;
            }
            let f = (pm - f as u64) % pm;
            for (x, &r) in v.iter_mut().zip(&row) {
                *x = ((*x as u64 + f * r as u64) % pm) as u32;
            }
        }
        v
    }

    /// `B ⊆ A`.
    pub fn contains(&self, other: &Subspace) -> Result<bool> {
        self.check_compatible(other)?;
        Ok(match (&self.rows, &other.rows) {
            (Rows::Gf3(a), Rows::Gf3(b)) => b.iter().all(|&r| gf3::reduce(a, r).is_zero()),
            _ => other.basis().iter().all(|r| self.scalar_residual(r).iter().all(|&x| x == 0)),
        })
    }

    /// Image under the row-vector map `v -> v M`.
    pub fn image(&self, map: &MatGF) -> Result<Subspace> {
        if map.rows() != self.ambient || map.p() != self.p {
            return Err(Error::DimensionMismatch { expected: self.ambient, found: map.rows() });
        }
        let rows: Vec<Vec<u32>> = self.basis().iter().map(|r| map.vec_mul(r)).collect();
        Self::span(self.p, map.cols(), &rows)
    }

    /// The annihilator `{w : w·v = 0 for all v in A}`.
    pub fn annihilator(&self) -> Subspace {
        let n = self.ambient;
        let basis = self.basis();
        let pivots: Vec<usize> = basis.iter().map(|r| r.iter().position(|&x| x != 0).unwrap()).collect();
        let rows: Vec<Vec<u32>> = (0..n)
            .filter(|c| !pivots.contains(c))
            .map(|free| {
                let mut w = vec![0u32; n];
                w[free] = 1;
                for (row, &piv) in basis.iter().zip(&pivots) {
                    w[piv] = (self.p - row[free]) % self.p;
                }
                w
            })
            .collect();
        Self::span(self.p, n, &rows).expect("annihilator rows are valid")
    }

    /// Number of projective points, `(p^dim - 1)/(p - 1)`.
    pub fn point_count(&self) -> u64 {
        let p = self.p as u64;
        (p.pow(self.dim() as u32) - 1) / (p - 1)
    }

    /// All vectors of the subspace (including zero), for small subspaces.
    pub fn vectors(&self) -> Vec<Vec<u32>> {
        let basis = self.basis();
        let total = (self.p as u64).pow(basis.len() as u32);
        (0..total)
            .map(|mut idx| {
                let mut v = vec![0u32; self.ambient];
                for row in &basis {
                    let c = (idx % self.p as u64) as u32;
                    idx /= self.p as u64;
                    if c != 0 {
                        for (x, &r) in v.iter_mut().zip(row) {
                            *x = (*x + c * r) % self.p;
                        }
                    }
                }
                v
            })
            .collect()
    }

    /// Serialized form: RREF rows as base-`p` integers, coordinate `i`
    /// weighted by `p^i`.
    pub fn record(&self) -> SubspaceRecord {
        let rows = self
            .basis()
            .iter()
            .map(|r| r.iter().rev().fold(0u128, |acc, &x| acc * self.p as u128 + x as u128))
            .collect();
        SubspaceRecord { p: self.p, ambient_dim: self.ambient, rank: self.dim(), rows }
    }

    pub fn from_record(rec: &SubspaceRecord) -> Result<Self> {
        let rows: Vec<Vec<u32>> = rec
            .rows
            .iter()
            .map(|&x| {
                let mut x = x;
                (0..rec.ambient_dim)
                    .map(|_| {
                        let d = (x % rec.p as u128) as u32;
                        x /= rec.p as u128;
                        d
                    })
                    .collect()
            })
            .collect();
        let s = Self::span(rec.p, rec.ambient_dim, &rows)?;
        if s.dim() != rec.rank {
            return Err(Error::InvalidInput("subspace record rank does not match its rows".into()));
        }
        Ok(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubspaceRecord {
    pub p: u32,
    pub ambient_dim: usize,
    pub rank: usize,
    pub rows: Vec<u128>,
}
