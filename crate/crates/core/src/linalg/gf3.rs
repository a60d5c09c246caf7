//! Bit-sliced GF(3) vectors: up to 64 coordinates held in two one-hot
//! bitplanes, `ones` marking entries equal to 1 and `twos` entries equal to 2.

use std::fmt;

/// A GF(3) vector of at most 64 coordinates. Coordinate `i` is bit `i`.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Trits {
    pub ones: u64,
    pub twos: u64,
}

impl fmt::Debug for Trits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let len = 64 - (self.ones | self.twos).leading_zeros() as usize;
        let s: String = (0..len).map(|i| char::from(b'0' + self.get(i) as u8)).collect();
        write!(f, "Trits({s})")
    }
}

impl Trits {
    pub const ZERO: Trits = Trits { ones: 0, twos: 0 };

    pub fn from_slice(v: &[u32]) -> Self {
        debug_assert!(v.len() <= 64);
        let mut t = Trits::ZERO;
        for (i, &x) in v.iter().enumerate() {
            match x % 3 {
                1 => t.ones |= 1 << i,
                2 => t.twos |= 1 << i,
                _ => {}
            }
        }
        t
    }

    pub fn to_vec(self, len: usize) -> Vec<u32> {
        (0..len).map(|i| self.get(i)).collect()
    }

    #[inline]
    pub fn get(self, i: usize) -> u32 {
        ((self.ones >> i) & 1) as u32 | ((((self.twos >> i) & 1) as u32) << 1)
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: u32) {
        let bit = 1u64 << i;
        self.ones &= !bit;
        self.twos &= !bit;
        match v % 3 {
            1 => self.ones |= bit,
            2 => self.twos |= bit,
            _ => {}
        }
    }

    #[inline]
    pub fn support(self) -> u64 {
        self.ones | self.twos
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.support() == 0
    }

    #[inline]
    pub fn add(self, o: Trits) -> Trits {
        let zx = !(self.ones | self.twos);
        let zy = !(o.ones | o.twos);
        Trits {
            ones: (self.ones & zy) | (o.ones & zx) | (self.twos & o.twos),
            twos: (self.twos & zy) | (o.twos & zx) | (self.ones & o.ones),
        }
    }

    #[inline]
    pub fn neg(self) -> Trits {
        Trits { ones: self.twos, twos: self.ones }
    }

    #[inline]
    pub fn sub(self, o: Trits) -> Trits {
        self.add(o.neg())
    }

    #[inline]
    pub fn scale(self, c: u32) -> Trits {
        match c % 3 {
            0 => Trits::ZERO,
            1 => self,
            _ => self.neg(),
        }
    }

    #[inline]
    pub fn mask(self, m: u64) -> Trits {
        Trits { ones: self.ones & m, twos: self.twos & m }
    }

    #[inline]
    pub fn shl(self, k: u32) -> Trits {
        Trits { ones: self.ones << k, twos: self.twos << k }
    }

    #[inline]
    pub fn shr(self, k: u32) -> Trits {
        Trits { ones: self.ones >> k, twos: self.twos >> k }
    }

    /// Index of the first nonzero coordinate.
    #[inline]
    pub fn leading(self) -> Option<usize> {
        let s = self.support();
        (s != 0).then(|| s.trailing_zeros() as usize)
    }

    /// Scales so the first nonzero coordinate is 1.
    #[inline]
    pub fn normalized(self) -> Trits {
        match self.leading() {
            Some(i) if (self.twos >> i) & 1 == 1 => self.neg(),
            _ => self,
        }
    }

    /// Inner product mod 3.
    #[inline]
    pub fn dot(self, o: Trits) -> u32 {
        let plus = (self.ones & o.ones) | (self.twos & o.twos);
        let minus = (self.ones & o.twos) | (self.twos & o.ones);
        (plus.count_ones() + 2 * minus.count_ones()) % 3
    }
}

/// Reduced row echelon form in place; zero rows are dropped. Returns the rank.
pub fn rref(rows: &mut Vec<Trits>, cols: usize) -> usize {
    let mut rank = 0;
    for col in 0..cols {
        let bit = 1u64 << col;
        let Some(piv) = (rank..rows.len()).find(|&r| rows[r].support() & bit != 0) else {
            continue;
        };
        rows.swap(piv, rank);
        if rows[rank].twos & bit != 0 {
            rows[rank] = rows[rank].neg();
        }
        let pivot = rows[rank];
        for (i, row) in rows.iter_mut().enumerate() {
            if i == rank {
                continue;
            }
            if row.ones & bit != 0 {
                *row = row.sub(pivot);
            } else if row.twos & bit != 0 {
                *row = row.add(pivot);
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rows.truncate(rank);
    rank
}

/// Rank of a row set without keeping the echelon form.
pub fn rank(rows: &[Trits], cols: usize) -> usize {
    let mut work = rows.to_vec();
    rref(&mut work, cols)
}

/// Reduces `v` against an RREF basis; the result is zero iff `v` lies in
/// the row space.
#[inline]
pub fn reduce(basis: &[Trits], mut v: Trits) -> Trits {
    for row in basis {
        let lead = row.support().trailing_zeros();
        let bit = 1u64 << lead;
        if v.ones & bit != 0 {
            v = v.sub(*row);
        } else if v.twos & bit != 0 {
            v = v.add(*row);
        }
    }
    v
}
