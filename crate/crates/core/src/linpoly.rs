//! `F_q`-linearized polynomials over `F_{q^m}` and the bivariate egg forms
//! `g_(a,b)(t)` and `h_(a,b)(r,s)` attached to a coefficient pair `(b, c)`.
//!
//! The ground field `F_q` is the prime field (`q = p`); fractional
//! exponents `x^{1/q^i}` are evaluated as `frobenius(x, m - i)`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Fe, FiniteField};
use crate::linalg::MatGF;

/// `x -> sum_i d_i x^{q^i}`.
#[derive(Clone, Debug)]
pub struct LinearizedPoly {
    field: Arc<FiniteField>,
    coeffs: Vec<Fe>,
}

impl LinearizedPoly {
    pub fn new(field: Arc<FiniteField>, coeffs: Vec<Fe>) -> Result<Self> {
        let m = field.degree() as usize;
        if coeffs.len() != m {
            return Err(Error::DimensionMismatch { expected: m, found: coeffs.len() });
        }
        if coeffs.iter().any(|&c| !field.contains(c)) {
            return Err(Error::InvalidInput("coefficient outside the field".into()));
        }
        Ok(LinearizedPoly { field, coeffs })
    }

    pub fn zero(field: Arc<FiniteField>) -> Self {
        let m = field.degree() as usize;
        LinearizedPoly { field, coeffs: vec![Fe::ZERO; m] }
    }

    pub fn identity(field: Arc<FiniteField>) -> Self {
        let mut p = Self::zero(field);
        p.coeffs[0] = Fe::ONE;
        p
    }

    /// The single term `d x^{q^i}`.
    pub fn monomial(field: Arc<FiniteField>, d: Fe, i: u32) -> Self {
        let mut p = Self::zero(field);
        let m = p.coeffs.len() as u32;
        p.coeffs[(i % m) as usize] = d;
        p
    }

    pub fn field(&self) -> &Arc<FiniteField> {
        &self.field
    }

    pub fn coeffs(&self) -> &[Fe] {
        &self.coeffs
    }

    #[inline]
    pub fn eval(&self, x: Fe) -> Fe {
        let f = &*self.field;
        self.coeffs.iter().enumerate().fold(Fe::ZERO, |acc, (i, &d)| {
            if d.is_zero() {
                acc
            } else {
                f.add(acc, f.mul(d, f.frobenius(x, i as u32)))
            }
        })
    }

    /// Adds `d x^{1/q^i}`, i.e. `d x^{q^{m-i}}`.
    fn add_inverse_term(&mut self, d: Fe, i: u32) {
        let m = self.coeffs.len() as u32;
        let slot = ((m - i % m) % m) as usize;
        self.coeffs[slot] = self.field.add(self.coeffs[slot], d);
    }

    /// Matrix of the map over the prime field, row `j` the image of `w^j`.
    pub fn matrix(&self) -> MatGF {
        let f = &*self.field;
        let m = f.degree() as usize;
        let rows: Vec<Vec<u32>> = f.basis().into_iter().map(|e| f.flatten(&[self.eval(e)])).collect();
        MatGF::from_rows(f.p(), m, &rows).expect("images have m coordinates")
    }

    /// All roots, by exhaustive scan.
    pub fn kernel(&self) -> Vec<Fe> {
        self.field.elements().filter(|&x| self.eval(x).is_zero()).collect()
    }
}

/// Serialized egg coefficients: `{ q, m, b: [..], c: [..] }` with elements as
/// base-`q` indices; an optional modulus pins the element encoding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EggSpecRecord {
    pub q: u32,
    pub m: u32,
    pub b: Vec<u64>,
    pub c: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

/// Coefficient vectors `b = (b_0..b_{m-1})`, `c = (c_0..c_{m-1})` of an
/// egg `E(b, c)` in `PG(4m-1, q)`.
#[derive(Clone, Debug)]
pub struct GoodEggSpec {
    field: Arc<FiniteField>,
    b: Vec<Fe>,
    c: Vec<Fe>,
    name: String,
}

impl GoodEggSpec {
    pub fn new(field: Arc<FiniteField>, b: Vec<Fe>, c: Vec<Fe>, name: impl Into<String>) -> Result<Self> {
        let m = field.degree() as usize;
        for (label, v) in [("b", &b), ("c", &c)] {
            if v.len() != m {
                return Err(Error::Config(format!("{label} must have {m} entries, got {}", v.len())));
            }
            if v.iter().any(|&x| !field.contains(x)) {
                return Err(Error::Config(format!("{label} has an element outside F_{{q^m}}")));
            }
        }
        Ok(GoodEggSpec { field, b, c, name: name.into() })
    }

    pub fn from_record(rec: &EggSpecRecord) -> Result<Self> {
        let field = match &rec.modulus {
            Some(modulus) => FiniteField::with_modulus(rec.q, rec.m, modulus.clone())?,
            None => FiniteField::new(rec.q, rec.m)?,
        };
        let field = Arc::new(field);
        let parse = |v: &[u64]| v.iter().map(|&x| field.element(x)).collect::<Result<Vec<_>>>();
        let b = parse(&rec.b)?;
        let c = parse(&rec.c)?;
        let name = rec.name.clone().unwrap_or_else(|| "egg".into());
        Self::new(field.clone(), b, c, name)
    }

    pub fn record(&self) -> EggSpecRecord {
        EggSpecRecord {
            q: self.field.p(),
            m: self.field.degree(),
            b: self.b.iter().map(|x| x.0 as u64).collect(),
            c: self.c.iter().map(|x| x.0 as u64).collect(),
            modulus: Some(self.field.modulus().to_vec()),
            name: Some(self.name.clone()),
        }
    }

    /// The sporadic good egg of `PG(19, 3)`: `b = (0,1,0,0,0)`, `c = (0,0,0,-1,0)`.
    pub fn penttila_williams() -> Self {
        let field = Arc::new(FiniteField::new(3, 5).expect("F_243"));
        let minus_one = field.from_int(-1);
        let b = vec![Fe::ZERO, Fe::ONE, Fe::ZERO, Fe::ZERO, Fe::ZERO];
        let c = vec![Fe::ZERO, Fe::ZERO, Fe::ZERO, minus_one, Fe::ZERO];
        Self::new(field, b, c, "penttila-williams").expect("valid spec")
    }

    /// `m = 1`, `b = (0)`, `c = (1)`: the elliptic quadric
    /// `x0 x1 + x2^2 + x3^2 = 0` of `PG(3, 3)`.
    pub fn elliptic_quadric_q3() -> Self {
        let field = Arc::new(FiniteField::new(3, 1).expect("F_3"));
        Self::new(field, vec![Fe::ZERO], vec![Fe::ONE], "elliptic-q3").expect("valid spec")
    }

    /// `m = 1`, `b = (1)`, `c = (-1)`: the elliptic quadric
    /// `x0 x1 + x2^2 + x2 x3 - x3^2 = 0`, matched to the field plane of order 9.
    pub fn buekenhout_metz_q3() -> Self {
        let field = Arc::new(FiniteField::new(3, 1).expect("F_3"));
        let c = vec![field.from_int(-1)];
        Self::new(field, vec![Fe::ONE], c, "buekenhout-metz-q3").expect("valid spec")
    }

    /// `q = 3, m = 2`, `b = 0`, `c = (0, n)` with `n` a non-square: the
    /// egg of the Kantor-Knuth semifield flock `f(t) = n t^3`.
    pub fn kantor_knuth_q3_m2() -> Self {
        let field = Arc::new(FiniteField::new(3, 2).expect("F_9"));
        let n = field
            .nonzero_elements()
            .find(|&x| !field.is_square(x))
            .expect("F_9 has non-squares");
        Self::new(field, vec![Fe::ZERO; 2], vec![Fe::ZERO, n], "kantor-knuth-q3-m2").expect("valid spec")
    }

    pub fn field(&self) -> &Arc<FiniteField> {
        &self.field
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn q(&self) -> u32 {
        self.field.p()
    }

    pub fn m(&self) -> u32 {
        self.field.degree()
    }

    pub fn b(&self) -> &[Fe] {
        &self.b
    }

    pub fn c(&self) -> &[Fe] {
        &self.c
    }

    pub fn forms(&self, a: Fe, b: Fe) -> EggForms {
        EggForms::new(self, a, b)
    }

    /// `g_(a,b)(t)`.
    pub fn g(&self, a: Fe, b: Fe, t: Fe) -> Fe {
        self.forms(a, b).g(t)
    }

    /// `h_(a,b)(r,s)`.
    pub fn h(&self, a: Fe, b: Fe, r: Fe, s: Fe) -> Fe {
        self.forms(a, b).h(r, s)
    }

    /// `X^2 + sum_i (b_i X Y + c_i Y^2)^{1/q^i}`, which equals `g_(X,Y)(1)`.
    #[inline]
    pub fn quadratic(&self, x: Fe, y: Fe) -> Fe {
        let f = &*self.field;
        let (xy, yy) = (f.mul(x, y), f.mul(y, y));
        let mut acc = f.mul(x, x);
        for (i, (&bi, &ci)) in self.b.iter().zip(&self.c).enumerate() {
            let term = f.add(f.mul(bi, xy), f.mul(ci, yy));
            if !term.is_zero() {
                acc = f.add(acc, f.inverse_frobenius(term, i as u32));
            }
        }
        acc
    }

    /// `f(t) = sum_i c_i t^{q^i}`, the first flock map.
    pub fn flock_f(&self) -> LinearizedPoly {
        LinearizedPoly::new(self.field.clone(), self.c.clone()).expect("m coefficients")
    }

    /// `g(t) = sum_i b_i t^{q^i}`, the second flock map.
    pub fn flock_g(&self) -> LinearizedPoly {
        LinearizedPoly::new(self.field.clone(), self.b.clone()).expect("m coefficients")
    }
}

/// `g_(a,b)` and `h_(a,b)` for fixed `(a, b)`, held as linearized polynomials:
/// `g_(a,b)(t) = a^2 t + sum_i (b_i ab + c_i b^2)^{1/q^i} t^{1/q^i}` and
/// `h_(a,b)(r,s) = 2ar + sum_i (b_i(as + br) + 2 c_i bs)^{1/q^i}`, the latter
/// split as `h_r(r) + h_s(s)`.
#[derive(Clone, Debug)]
pub struct EggForms {
    pub a: Fe,
    pub b: Fe,
    g: LinearizedPoly,
    h_r: LinearizedPoly,
    h_s: LinearizedPoly,
}

impl EggForms {
    pub fn new(spec: &GoodEggSpec, a: Fe, b: Fe) -> Self {
        let f = &*spec.field;
        let two = f.from_int(2);
        let mut g = LinearizedPoly::zero(spec.field.clone());
        let mut h_r = LinearizedPoly::zero(spec.field.clone());
        let mut h_s = LinearizedPoly::zero(spec.field.clone());
        g.add_inverse_term(f.mul(a, a), 0);
        h_r.add_inverse_term(f.mul(two, a), 0);
        let ab = f.mul(a, b);
        let bb = f.mul(b, b);
        for i in 0..f.degree() {
            let (bi, ci) = (spec.b[i as usize], spec.c[i as usize]);
            let coef = f.add(f.mul(bi, ab), f.mul(ci, bb));
            g.add_inverse_term(f.inverse_frobenius(coef, i), i);
            // (b_i b) r + (b_i a + 2 c_i b) s, then the whole bracket to 1/q^i
            let r_coef = f.mul(bi, b);
            let s_coef = f.add(f.mul(bi, a), f.mul(two, f.mul(ci, b)));
            h_r.add_inverse_term(f.inverse_frobenius(r_coef, i), i);
            h_s.add_inverse_term(f.inverse_frobenius(s_coef, i), i);
        }
        EggForms { a, b, g, h_r, h_s }
    }

    #[inline]
    pub fn g(&self, t: Fe) -> Fe {
        self.g.eval(t)
    }

    #[inline]
    pub fn h(&self, r: Fe, s: Fe) -> Fe {
        self.g.field().add(self.h_r.eval(r), self.h_s.eval(s))
    }

    pub fn g_poly(&self) -> &LinearizedPoly {
        &self.g
    }

    pub fn h_r_poly(&self) -> &LinearizedPoly {
        &self.h_r
    }

    pub fn h_s_poly(&self) -> &LinearizedPoly {
        &self.h_s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// `a^2 t - (b^2)^9 t^9 + (ab)^81 t^81` over `F_243`.
    fn pw_g_closed(f: &FiniteField, a: Fe, b: Fe, t: Fe) -> Fe {
        let t1 = f.mul(f.mul(a, a), t);
        let t2 = f.neg(f.mul(f.pow(f.mul(b, b), 9), f.pow(t, 9)));
        let t3 = f.mul(f.pow(f.mul(a, b), 81), f.pow(t, 81));
        f.add(f.add(t1, t2), t3)
    }

    /// `-ar + b^9 s^9 + (br + as)^81`.
    fn pw_h_closed(f: &FiniteField, a: Fe, b: Fe, r: Fe, s: Fe) -> Fe {
        let t1 = f.neg(f.mul(a, r));
        let t2 = f.mul(f.pow(b, 9), f.pow(s, 9));
        let t3 = f.pow(f.add(f.mul(b, r), f.mul(a, s)), 81);
        f.add(f.add(t1, t2), t3)
    }

    #[test]
    fn identity_poly() {
        let f = Arc::new(FiniteField::new(3, 5).unwrap());
        let id = LinearizedPoly::identity(f.clone());
        for x in f.elements() {
            assert_eq!(id.eval(x), x);
        }
    }

    #[test]
    fn linearity_over_prime_field() {
        let f = Arc::new(FiniteField::new(3, 5).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let coeffs: Vec<Fe> = (0..5).map(|_| f.random(&mut rng)).collect();
        let l = LinearizedPoly::new(f.clone(), coeffs).unwrap();
        for _ in 0..100 {
            let (lam, mu) = (f.from_int(rand::Rng::gen_range(&mut rng, 0..3)), f.from_int(2));
            let (x, y) = (f.random(&mut rng), f.random(&mut rng));
            let lhs = l.eval(f.add(f.mul(lam, x), f.mul(mu, y)));
            let rhs = f.add(f.mul(lam, l.eval(x)), f.mul(mu, l.eval(y)));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn kernel_of_frobenius_minus_identity_is_prime_field() {
        for m in [2, 3, 5] {
            let f = Arc::new(FiniteField::new(3, m).unwrap());
            let l = LinearizedPoly::new(
                f.clone(),
                (0..m).map(|i| match i {
                    0 => f.from_int(-1),
                    1 => Fe::ONE,
                    _ => Fe::ZERO,
                })
                .collect(),
            )
            .unwrap();
            assert_eq!(l.kernel(), vec![Fe(0), Fe(1), Fe(2)]);
        }
    }

    #[test]
    fn zero_parameters_give_zero_forms() {
        let spec = GoodEggSpec::penttila_williams();
        let f = spec.field().clone();
        for t in f.elements() {
            assert_eq!(spec.g(Fe::ZERO, Fe::ZERO, t), Fe::ZERO);
            assert_eq!(spec.h(Fe::ZERO, Fe::ZERO, t, f.add(t, Fe::ONE)), Fe::ZERO);
        }
    }

    #[test]
    fn pw_point_values() {
        let spec = GoodEggSpec::penttila_williams();
        let f = spec.field();
        assert_eq!(spec.g(Fe::ONE, Fe::ZERO, Fe::ONE), Fe::ONE);
        // -1*1 + 0 + (0*1 + 1*0)^81 = -1
        assert_eq!(spec.h(Fe::ONE, Fe::ZERO, Fe::ONE, Fe::ZERO), f.from_int(-1));
        assert_eq!(pw_h_closed(f, Fe::ONE, Fe::ZERO, Fe::ONE, Fe::ZERO), f.from_int(-1));
    }

    #[test]
    fn pw_generic_matches_closed_form_on_sample() {
        let spec = GoodEggSpec::penttila_williams();
        let f = spec.field();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10_000 {
            let (a, b, t, s) = (f.random(&mut rng), f.random(&mut rng), f.random(&mut rng), f.random(&mut rng));
            assert_eq!(spec.g(a, b, t), pw_g_closed(f, a, b, t));
            assert_eq!(spec.h(a, b, t, s), pw_h_closed(f, a, b, t, s));
        }
    }

    #[test]
    fn h_is_additive() {
        let spec = GoodEggSpec::penttila_williams();
        let f = spec.field();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let forms = spec.forms(f.random(&mut rng), f.random(&mut rng));
            let (r1, s1, r2, s2) = (f.random(&mut rng), f.random(&mut rng), f.random(&mut rng), f.random(&mut rng));
            let lhs = forms.h(f.add(r1, r2), f.add(s1, s2));
            assert_eq!(lhs, f.add(forms.h(r1, s1), forms.h(r2, s2)));
            // scaling by 2 = -1 as well
            assert_eq!(forms.h(f.neg(r1), f.neg(s1)), f.neg(forms.h(r1, s1)));
        }
    }

    #[test]
    fn polarization_identity() {
        // h_(a,b)(a,b) = 2 g_(a,b)(1), used by the tangency argument
        let spec = GoodEggSpec::penttila_williams();
        let f = spec.field();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let (a, b) = (f.random(&mut rng), f.random(&mut rng));
            assert_eq!(spec.h(a, b, a, b), f.mul(f.from_int(2), spec.g(a, b, Fe::ONE)));
        }
    }

    #[test]
    fn quadratic_is_g_at_one() {
        let spec = GoodEggSpec::penttila_williams();
        let f = spec.field();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2000 {
            let (x, y) = (f.random(&mut rng), f.random(&mut rng));
            assert_eq!(spec.quadratic(x, y), spec.g(x, y, Fe::ONE));
        }
    }

    #[test]
    fn record_roundtrip() {
        let spec = GoodEggSpec::penttila_williams();
        let rec = spec.record();
        assert_eq!(rec.b, vec![0, 1, 0, 0, 0]);
        assert_eq!(rec.c, vec![0, 0, 0, 2, 0]);
        let back = GoodEggSpec::from_record(&rec).unwrap();
        assert_eq!(back.b(), spec.b());
        assert_eq!(back.c(), spec.c());
        let bad = EggSpecRecord { b: vec![0; 4], ..rec.clone() };
        assert!(GoodEggSpec::from_record(&bad).is_err());
        let out_of_range = EggSpecRecord { b: vec![0, 0, 0, 0, 243], ..rec };
        assert!(GoodEggSpec::from_record(&out_of_range).is_err());
    }
}
