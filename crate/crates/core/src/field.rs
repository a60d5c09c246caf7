//! Arithmetic in `F_{p^m}` for odd primes `p`.
//!
//! Elements are stored as their index: the coefficient vector in the
//! polynomial basis `1, w, ..., w^{m-1}` read as base-`p` digits, lowest
//! degree first. That index is also the serialized form of an element.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fields up to this order get log/exp tables.
const TABLE_LIMIT: u64 = 1 << 16;
/// Fields up to this order also get a full addition table.
const ADD_TABLE_LIMIT: u64 = 1024;

/// A field element, encoded by its base-`p` index.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Fe(pub u32);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

struct Tables {
    /// `exp[i] = g^i` for `i < 2(q-1)`, doubled so log sums need no reduction.
    exp: Vec<u32>,
    /// `log[x]` for nonzero `x`; `log[0]` is unused.
    log: Vec<u32>,
    neg: Vec<u32>,
    add: Option<Vec<u32>>,
    /// `frob[k][x] = x^{p^k}`.
    frob: Vec<Vec<u32>>,
}

/// The finite field `F_{p^m} = GF(p)[w] / (modulus)`.
pub struct FiniteField {
    p: u32,
    m: u32,
    order: u64,
    modulus: Vec<u32>,
    pow_p: Vec<u64>,
    tables: Option<Tables>,
}

impl fmt::Debug for FiniteField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteField")
            .field("p", &self.p)
            .field("m", &self.m)
            .field("modulus", &self.modulus)
            .finish()
    }
}

impl PartialEq for FiniteField {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.m == other.m && self.modulus == other.modulus
    }
}

impl Eq for FiniteField {}

/// Conway polynomials for the characteristic-3 fields used by the fixtures,
/// low-degree coefficient first.
fn conway_polynomial(p: u32, m: u32) -> Option<Vec<u32>> {
    let c: &[u32] = match (p, m) {
        (3, 1) => &[1, 1],
        (3, 2) => &[2, 2, 1],
        (3, 3) => &[1, 2, 0, 1],
        (3, 4) => &[2, 0, 0, 2, 1],
        (3, 5) => &[1, 2, 0, 0, 0, 1],
        (3, 6) => &[2, 2, 1, 0, 2, 0, 1],
        (5, 1) => &[3, 1],
        (5, 2) => &[2, 4, 1],
        (7, 1) => &[4, 1],
        (7, 2) => &[3, 6, 1],
        _ => return None,
    };
    Some(c.to_vec())
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl FiniteField {
    /// Builds `F_{p^m}` with the shipped default modulus (Conway polynomial
    /// where one is tabulated, otherwise the lexicographically first monic
    /// irreducible).
    pub fn new(p: u32, m: u32) -> Result<Self> {
        let modulus = match conway_polynomial(p, m) {
            Some(c) => c,
            None => first_irreducible(p, m)?,
        };
        Self::with_modulus(p, m, modulus)
    }

    /// Builds `F_{p^m}` from an explicit monic modulus `[c_0, ..., c_m]`.
    pub fn with_modulus(p: u32, m: u32, modulus: Vec<u32>) -> Result<Self> {
        if p == 2 || !is_prime(p) {
            return Err(Error::Config(format!("characteristic {p} is not an odd prime")));
        }
        if m == 0 {
            return Err(Error::Config("extension degree must be positive".into()));
        }
        let order = (p as u64)
            .checked_pow(m)
            .filter(|&q| q < (1u64 << 32))
            .ok_or_else(|| Error::Config(format!("field order {p}^{m} exceeds 2^32")))?;
        if modulus.len() != m as usize + 1 {
            return Err(Error::Config(format!(
                "modulus must have {} coefficients, got {}",
                m + 1,
                modulus.len()
            )));
        }
        if modulus.iter().any(|&c| c >= p) {
            return Err(Error::Config("modulus coefficient out of range".into()));
        }
        if modulus[m as usize] != 1 {
            return Err(Error::Config("modulus must be monic".into()));
        }
        if !poly::is_irreducible(&modulus, p) {
            return Err(Error::Config(format!("modulus {modulus:?} is reducible over GF({p})")));
        }
        let pow_p = (0..=m).map(|i| (p as u64).pow(i)).collect();
        let mut field = FiniteField { p, m, order, modulus, pow_p, tables: None };
        if order <= TABLE_LIMIT {
            field.tables = Some(field.build_tables());
        }
        Ok(field)
    }

    fn build_tables(&self) -> Tables {
        let q = self.order as usize;
        let generator = (2..self.order as u32)
            .map(Fe)
            .chain(std::iter::once(Fe(1)))
            .find(|&g| self.slow_multiplicative_order(g) == self.order - 1)
            .expect("multiplicative group of a finite field is cyclic");
        let mut exp = vec![0u32; 2 * (q - 1)];
        let mut log = vec![0u32; q];
        let mut x = Fe::ONE;
        for i in 0..q - 1 {
            exp[i] = x.0;
            exp[i + q - 1] = x.0;
            log[x.index()] = i as u32;
            x = self.slow_mul(x, generator);
        }
        let neg = (0..q as u32).map(|x| self.slow_neg(Fe(x)).0).collect();
        let add = (self.order <= ADD_TABLE_LIMIT).then(|| {
            let mut t = vec![0u32; q * q];
            for x in 0..q {
                for y in 0..q {
                    t[x * q + y] = self.slow_add(Fe(x as u32), Fe(y as u32)).0;
                }
            }
            t
        });
        let frob = (0..self.m)
            .map(|k| {
                let e = self.pow_p[k as usize] % (self.order - 1);
                (0..q)
                    .map(|x| {
                        if x == 0 {
                            0
                        } else {
                            exp[((log[x] as u64 * e) % (self.order - 1)) as usize]
                        }
                    })
                    .collect()
            })
            .collect();
        Tables { exp, log, neg, add, frob }
    }

    fn slow_multiplicative_order(&self, g: Fe) -> u64 {
        let mut x = g;
        let mut k = 1u64;
        while x != Fe::ONE {
            x = self.slow_mul(x, g);
            k += 1;
            if k > self.order {
                return 0;
            }
        }
        k
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    /// Number of elements `p^m`.
    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn zero(&self) -> Fe {
        Fe::ZERO
    }

    pub fn one(&self) -> Fe {
        Fe::ONE
    }

    /// The image of an integer in the prime subfield.
    pub fn from_int(&self, k: i64) -> Fe {
        Fe(k.rem_euclid(self.p as i64) as u32)
    }

    /// Parses a serialized element index.
    pub fn element(&self, index: u64) -> Result<Fe> {
        if index >= self.order {
            return Err(Error::Config(format!(
                "element index {index} out of range for a field of order {}",
                self.order
            )));
        }
        Ok(Fe(index as u32))
    }

    pub fn elements(&self) -> impl Iterator<Item = Fe> + Clone {
        (0..self.order as u32).map(Fe)
    }

    pub fn nonzero_elements(&self) -> impl Iterator<Item = Fe> + Clone {
        (1..self.order as u32).map(Fe)
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Fe {
        Fe(rng.gen_range(0..self.order) as u32)
    }

    pub fn random_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> Fe {
        Fe(rng.gen_range(1..self.order) as u32)
    }

    /// Wraps a raw element with a reference to this field.
    pub fn wrap(&self, x: Fe) -> FieldElement<'_> {
        FieldElement { field: self, value: x }
    }

    /// Coefficients of `x` in the polynomial basis.
    pub fn coeffs(&self, x: Fe) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.m as usize);
        self.push_coeffs(x, &mut out);
        out
    }

    #[inline]
    fn push_coeffs(&self, x: Fe, out: &mut Vec<u32>) {
        let mut v = x.0;
        for _ in 0..self.m {
            out.push(v % self.p);
            v /= self.p;
        }
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> Fe {
        debug_assert!(coeffs.len() <= self.m as usize);
        let mut v = 0u64;
        for &c in coeffs.iter().rev() {
            v = v * self.p as u64 + (c % self.p) as u64;
        }
        Fe(v as u32)
    }

    /// The basis element `w^i`.
    pub fn basis_element(&self, i: u32) -> Fe {
        assert!(i < self.m, "basis index {i} out of range");
        Fe(self.pow_p[i as usize] as u32)
    }

    pub fn basis(&self) -> Vec<Fe> {
        (0..self.m).map(|i| self.basis_element(i)).collect()
    }

    #[inline]
    pub fn add(&self, x: Fe, y: Fe) -> Fe {
        match &self.tables {
            Some(Tables { add: Some(t), .. }) => Fe(t[x.index() * self.order as usize + y.index()]),
            _ => self.slow_add(x, y),
        }
    }

    fn slow_add(&self, x: Fe, y: Fe) -> Fe {
        let (mut a, mut b) = (x.0, y.0);
        let mut out = 0u64;
        for i in 0..self.m as usize {
            let d = (a % self.p + b % self.p) % self.p;
            out += d as u64 * self.pow_p[i];
            a /= self.p;
            b /= self.p;
        }
        Fe(out as u32)
    }

    #[inline]
    pub fn neg(&self, x: Fe) -> Fe {
        match &self.tables {
            Some(t) => Fe(t.neg[x.index()]),
            None => self.slow_neg(x),
        }
    }

    fn slow_neg(&self, x: Fe) -> Fe {
        let mut a = x.0;
        let mut out = 0u64;
        for i in 0..self.m as usize {
            let d = (self.p - a % self.p) % self.p;
            out += d as u64 * self.pow_p[i];
            a /= self.p;
        }
        Fe(out as u32)
    }

    #[inline]
    pub fn sub(&self, x: Fe, y: Fe) -> Fe {
        self.add(x, self.neg(y))
    }

    #[inline]
    pub fn mul(&self, x: Fe, y: Fe) -> Fe {
        match &self.tables {
            Some(t) => {
                if x.is_zero() || y.is_zero() {
                    Fe::ZERO
                } else {
                    Fe(t.exp[(t.log[x.index()] + t.log[y.index()]) as usize])
                }
            }
            None => self.slow_mul(x, y),
        }
    }

    fn slow_mul(&self, x: Fe, y: Fe) -> Fe {
        let a = self.coeffs(x);
        let b = self.coeffs(y);
        let prod = poly::mul(&a, &b, self.p);
        let r = poly::rem(&prod, &self.modulus, self.p);
        self.from_coeffs(&r)
    }

    /// Multiplicative inverse; zero has none.
    pub fn inv(&self, x: Fe) -> Result<Fe> {
        if x.is_zero() {
            return Err(Error::Domain("inverse of zero".into()));
        }
        Ok(match &self.tables {
            Some(t) => Fe(t.exp[((self.order - 1) as u32 - t.log[x.index()]) as usize % (self.order as usize - 1)]),
            None => self.pow(x, self.order - 2),
        })
    }

    pub fn div(&self, x: Fe, y: Fe) -> Result<Fe> {
        Ok(self.mul(x, self.inv(y)?))
    }

    /// `x^k` by square-and-multiply (`0^0 = 1`).
    pub fn pow(&self, x: Fe, k: u64) -> Fe {
        if let Some(t) = &self.tables {
            if x.is_zero() {
                return if k == 0 { Fe::ONE } else { Fe::ZERO };
            }
            let e = (t.log[x.index()] as u64 * (k % (self.order - 1))) % (self.order - 1);
            return Fe(t.exp[e as usize]);
        }
        let mut base = x;
        let mut acc = Fe::ONE;
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.slow_mul(acc, base);
            }
            base = self.slow_mul(base, base);
            k >>= 1;
        }
        acc
    }

    /// `x^{p^k}`; `k` is reduced mod `m`.
    #[inline]
    pub fn frobenius(&self, x: Fe, k: u32) -> Fe {
        let k = k % self.m;
        match &self.tables {
            Some(t) => Fe(t.frob[k as usize][x.index()]),
            None => self.pow(x, self.pow_p[k as usize]),
        }
    }

    /// `x^{1/p^k}`, i.e. `frobenius(x, m - k)`.
    #[inline]
    pub fn inverse_frobenius(&self, x: Fe, k: u32) -> Fe {
        let k = k % self.m;
        self.frobenius(x, (self.m - k) % self.m)
    }

    /// Quadratic character: `x^{(q-1)/2} = 1`, or `x = 0`.
    pub fn is_square(&self, x: Fe) -> bool {
        if x.is_zero() {
            return true;
        }
        match &self.tables {
            Some(t) => t.log[x.index()] % 2 == 0,
            None => self.pow(x, (self.order - 1) / 2) == Fe::ONE,
        }
    }

    /// All square roots of `x`, sorted: empty for non-squares, `[0]` for zero.
    pub fn sqrt(&self, x: Fe) -> Vec<Fe> {
        if x.is_zero() {
            return vec![Fe::ZERO];
        }
        if !self.is_square(x) {
            return Vec::new();
        }
        let r = match &self.tables {
            Some(t) => Fe(t.exp[(t.log[x.index()] / 2) as usize]),
            None => self.tonelli_shanks(x),
        };
        let mut roots = vec![r, self.neg(r)];
        roots.sort();
        roots
    }

    fn tonelli_shanks(&self, x: Fe) -> Fe {
        let q1 = self.order - 1;
        let s = q1.trailing_zeros();
        let odd = q1 >> s;
        let z = self
            .nonzero_elements()
            .find(|&z| !self.is_square(z))
            .expect("odd-order field has a non-square");
        let mut m = s;
        let mut c = self.pow(z, odd);
        let mut t = self.pow(x, odd);
        let mut r = self.pow(x, odd.div_ceil(2));
        while t != Fe::ONE {
            let mut i = 0;
            let mut t2 = t;
            while t2 != Fe::ONE {
                t2 = self.mul(t2, t2);
                i += 1;
            }
            let mut b = c;
            for _ in 0..m - i - 1 {
                b = self.mul(b, b);
            }
            m = i;
            c = self.mul(b, b);
            t = self.mul(t, c);
            r = self.mul(r, b);
        }
        r
    }

    /// Concatenated basis expansions of `xs`: `r` elements give `r*m`
    /// prime-field scalars.
    pub fn flatten(&self, xs: &[Fe]) -> Vec<u32> {
        let mut out = Vec::with_capacity(xs.len() * self.m as usize);
        self.flatten_into(xs, &mut out);
        out
    }

    pub fn flatten_into(&self, xs: &[Fe], out: &mut Vec<u32>) {
        for &x in xs {
            self.push_coeffs(x, out);
        }
    }

    /// Inverse of [`FiniteField::flatten`].
    pub fn unflatten(&self, v: &[u32]) -> Result<Vec<Fe>> {
        let m = self.m as usize;
        if v.len() % m != 0 {
            return Err(Error::DimensionMismatch { expected: m * v.len().div_ceil(m), found: v.len() });
        }
        if v.iter().any(|&c| c >= self.p) {
            return Err(Error::Domain("scalar out of range for the prime field".into()));
        }
        Ok(v.chunks(m).map(|c| self.from_coeffs(c)).collect())
    }

    /// Checks that two raw elements are valid for this field.
    pub fn contains(&self, x: Fe) -> bool {
        (x.0 as u64) < self.order
    }
}

/// First monic irreducible of degree `m` in lexicographic order of the
/// coefficient vector read from the top.
fn first_irreducible(p: u32, m: u32) -> Result<Vec<u32>> {
    let count = (p as u64)
        .checked_pow(m)
        .ok_or_else(|| Error::Config("field too large".into()))?;
    for idx in 0..count {
        let mut f = Vec::with_capacity(m as usize + 1);
        let mut v = idx;
        for _ in 0..m {
            f.push((v % p as u64) as u32);
            v /= p as u64;
        }
        f.push(1);
        if poly::is_irreducible(&f, p) {
            return Ok(f);
        }
    }
    Err(Error::Config(format!("no irreducible of degree {m} over GF({p})")))
}

/// An element bundled with its field, for checked arithmetic.
#[derive(Clone, Copy)]
pub struct FieldElement<'f> {
    field: &'f FiniteField,
    value: Fe,
}

impl fmt::Debug for FieldElement<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@F_{}^{}", self.value.0, self.field.p, self.field.m)
    }
}

impl PartialEq for FieldElement<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.value == other.value
    }
}

impl<'f> FieldElement<'f> {
    pub fn value(&self) -> Fe {
        self.value
    }

    pub fn field(&self) -> &'f FiniteField {
        self.field
    }

    fn same_field(&self, other: &Self) -> Result<()> {
        if std::ptr::eq(self.field, other.field) || self.field == other.field {
            Ok(())
        } else {
            Err(Error::MixedFields)
        }
    }

    pub fn checked_add(self, other: Self) -> Result<Self> {
        self.same_field(&other)?;
        Ok(self.field.wrap(self.field.add(self.value, other.value)))
    }

    pub fn checked_sub(self, other: Self) -> Result<Self> {
        self.same_field(&other)?;
        Ok(self.field.wrap(self.field.sub(self.value, other.value)))
    }

    pub fn checked_mul(self, other: Self) -> Result<Self> {
        self.same_field(&other)?;
        Ok(self.field.wrap(self.field.mul(self.value, other.value)))
    }

    pub fn checked_div(self, other: Self) -> Result<Self> {
        self.same_field(&other)?;
        Ok(self.field.wrap(self.field.div(self.value, other.value)?))
    }

    pub fn inv(self) -> Result<Self> {
        Ok(self.field.wrap(self.field.inv(self.value)?))
    }

    pub fn pow(self, k: u64) -> Self {
        self.field.wrap(self.field.pow(self.value, k))
    }

    pub fn frobenius(self, k: u32) -> Self {
        self.field.wrap(self.field.frobenius(self.value, k))
    }
}

macro_rules! checked_op {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl<'f> $tr for FieldElement<'f> {
            type Output = FieldElement<'f>;

            /// Panics when the operands live in different fields.
            fn $method(self, rhs: Self) -> Self::Output {
                self.$checked(rhs).expect("field element arithmetic")
            }
        }
    };
}

checked_op!(Add, add, checked_add);
checked_op!(Sub, sub, checked_sub);
checked_op!(Mul, mul, checked_mul);
checked_op!(Div, div, checked_div);

impl<'f> Neg for FieldElement<'f> {
    type Output = FieldElement<'f>;

    fn neg(self) -> Self::Output {
        self.field.wrap(self.field.neg(self.value))
    }
}

/// Dense polynomials over GF(p), lowest degree first.
mod poly {
    fn trim(mut a: Vec<u32>) -> Vec<u32> {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    fn inv_mod(a: u32, p: u32) -> u32 {
        let mut r = 1u64;
        let mut b = a as u64;
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

    pub fn mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
            }
        }
        trim(out.into_iter().map(|c| c as u32).collect())
    }

    pub fn rem(a: &[u32], f: &[u32], p: u32) -> Vec<u32> {
        let f = trim(f.to_vec());
        let df = f.len() - 1;
        let lead_inv = inv_mod(f[df], p) as u64;
        let mut r = trim(a.to_vec());
        while r.len() > df {
            let dr = r.len() - 1;
            let c = r[dr] as u64 * lead_inv % p as u64;
            for (i, &fc) in f.iter().enumerate() {
                let idx = dr - df + i;
                r[idx] = ((r[idx] as u64 + (p as u64 - c) * fc as u64) % p as u64) as u32;
            }
            r = trim(r);
        }
        r
    }

    fn sub(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let n = a.len().max(b.len());
        let out = (0..n)
            .map(|i| {
                let x = *a.get(i).unwrap_or(&0);
                let y = *b.get(i).unwrap_or(&0);
                (x + p - y) % p
            })
            .collect();
        trim(out)
    }

    fn gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let mut a = trim(a.to_vec());
        let mut b = trim(b.to_vec());
        while !b.is_empty() {
            let r = rem(&a, &b, p);
            a = b;
            b = r;
        }
        a
    }

    fn powmod(base: &[u32], mut e: u64, f: &[u32], p: u32) -> Vec<u32> {
        let mut acc = vec![1u32];
        let mut b = rem(base, f, p);
        while e > 0 {
            if e & 1 == 1 {
                acc = rem(&mul(&acc, &b, p), f, p);
            }
            b = rem(&mul(&b, &b, p), f, p);
            e >>= 1;
        }
        acc
    }

    /// Rabin-style test: no common factor with `x^{p^k} - x` for `k <= m/2`.
    pub fn is_irreducible(f: &[u32], p: u32) -> bool {
        let f = trim(f.to_vec());
        if f.len() < 2 {
            return false;
        }
        let m = f.len() - 1;
        if m == 1 {
            return true;
        }
        let x = vec![0u32, 1];
        let mut h = x.clone();
        for _ in 0..m / 2 {
            h = powmod(&h, p as u64, &f, p);
            let g = gcd(&f, &sub(&h, &x, p), p);
            if g.len() > 1 {
                return false;
            }
        }
        true
    }

    #[cfg(test)]
    mod tests {
        use super::*;

        #[test]
        fn reducible_and_irreducible_quadratics() {
            // x^2 + 1 is irreducible over GF(3), x^2 - 1 is not
            assert!(is_irreducible(&[1, 0, 1], 3));
            assert!(!is_irreducible(&[2, 0, 1], 3));
            // x^4 + 1 = (x^2 + x + 2)(x^2 + 2x + 2) over GF(3)
            assert!(!is_irreducible(&[1, 0, 0, 0, 1], 3));
        }
    }
}
