//! Blocking sets with respect to a family of affine subspaces, the cone over
//! a blocking set, and unitals of the semifield plane.
//!
//! The ambient space is `GF(q)^{4m+1}` with coordinates `(u, v, t, r, s)`:
//! a single coordinate `u` followed by four blocks of `m`. The hyperplane
//! `u = 0` carries the spread `S(a,b) = {(tau_(a,b)(x,y), x, y)}` together
//! with `z = S_inf = {(x, y, 0, 0)}`, so `(v, t)` is the `tau` block. Then
//! `V = {(0, t, kappa(t), 0, 0)}`, `Gamma = {(0, 0, t, r, s)}` and
//! `Gamma' = {(u, 0, t, r, s)}`.
//!
//! Egg coordinates `(u, t, r, s)` with `u` in `F_q` embed into `Gamma'` by
//! inserting `v = 0`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::certificate::{par_sweep, Certificate, Tally};
use crate::egg::{check_psi_family, Egg, EggId};
use crate::error::{Error, Result};
use crate::field::{Fe, FiniteField};
use crate::linalg::{Subspace, Trits};
use crate::linpoly::{GoodEggSpec, LinearizedPoly};
use crate::plane::{affine_to_coordinates, tau_spread, BruckBosePlane, CoordinatePlane, PlaneLine, PlanePoint};
use crate::sampling::{sample_rng, stage_seed, Shard};
use crate::spread::{DicksonSemifield, Pair};

/// Largest cone `build_cone` will materialize.
pub const MAX_CONE_POINTS: u64 = 1 << 22;

/// `(u, v, t, r, s)` flattened.
pub fn ambient_vector(field: &FiniteField, u: u32, blocks: [Fe; 4]) -> Vec<u32> {
    std::iter::once(u).chain(field.flatten(&blocks)).collect()
}

/// The data `(S, z, V, Gamma, Gamma')` in `PG(4m, q)`.
#[derive(Clone, Debug)]
pub struct FVConfig {
    d: DicksonSemifield,
    kappa: LinearizedPoly,
    bb: BruckBosePlane,
    v: Subspace,
    gamma: Subspace,
    gamma_prime: Subspace,
}

impl FVConfig {
    pub fn new(d: DicksonSemifield, kappa: LinearizedPoly) -> Result<Self> {
        let f = d.field().clone();
        if **kappa.field() != *f {
            return Err(Error::MixedFields);
        }
        let p = f.p();
        let n = 4 * f.degree() as usize + 1;
        let z = Fe::ZERO;
        let basis = f.basis();
        let v_rows: Vec<Vec<u32>> = basis.iter().map(|&e| ambient_vector(&f, 0, [e, kappa.eval(e), z, z])).collect();
        let mut g_rows = Vec::new();
        for &e in &basis {
            g_rows.push(ambient_vector(&f, 0, [z, e, z, z]));
            g_rows.push(ambient_vector(&f, 0, [z, z, e, z]));
            g_rows.push(ambient_vector(&f, 0, [z, z, z, e]));
        }
        let gamma = Subspace::span(p, n, &g_rows)?;
        g_rows.push(ambient_vector(&f, 1, [z; 4]));
        let gamma_prime = Subspace::span(p, n, &g_rows)?;
        let cfg = FVConfig {
            bb: BruckBosePlane::new(tau_spread(&d)),
            v: Subspace::span(p, n, &v_rows)?,
            gamma,
            gamma_prime,
            d,
            kappa,
        };
        let cert = cfg.validate();
        if !cert.passed() {
            return Err(Error::Construction {
                object: "F(V) configuration".into(),
                reason: format!("invariant failures: {:?}", cert.failures),
            });
        }
        Ok(cfg)
    }

    /// `D(3^5, -1, 2)` with `kappa(t) = -t^{3^4}`.
    pub fn penttila_williams() -> Self {
        let d = DicksonSemifield::penttila_williams();
        let f = d.field().clone();
        let kappa = LinearizedPoly::monomial(f.clone(), f.neg(Fe::ONE), 4);
        Self::new(d, kappa).expect("valid configuration")
    }

    /// The field of order 9 as `F_3(sqrt -1)`, with `kappa(t) = -t`.
    pub fn order_nine() -> Self {
        let f = std::sync::Arc::new(FiniteField::new(3, 1).expect("GF(3)"));
        let d = DicksonSemifield::quadratic_field(f.clone(), f.neg(Fe::ONE)).expect("-1 is a non-square mod 3");
        let kappa = LinearizedPoly::monomial(f.clone(), f.neg(Fe::ONE), 0);
        Self::new(d, kappa).expect("valid configuration")
    }

    pub fn semifield(&self) -> &DicksonSemifield {
        &self.d
    }

    pub fn field(&self) -> &FiniteField {
        self.d.field()
    }

    pub fn kappa(&self) -> &LinearizedPoly {
        &self.kappa
    }

    pub fn plane(&self) -> &BruckBosePlane {
        &self.bb
    }

    pub fn v(&self) -> &Subspace {
        &self.v
    }

    pub fn gamma(&self) -> &Subspace {
        &self.gamma
    }

    pub fn gamma_prime(&self) -> &Subspace {
        &self.gamma_prime
    }

    /// Index of `z` among the spread elements.
    pub fn z_index(&self) -> usize {
        self.d.order() as usize
    }

    pub fn ambient_dim(&self) -> usize {
        self.bb.ambient_dim()
    }

    pub fn sigma_inf(&self) -> Subspace {
        self.bb.embed(&Subspace::whole(self.bb.p(), self.ambient_dim() - 1))
    }

    /// Checks `V` inside `z`, `V` and `Gamma` disjoint, `Gamma` inside
    /// `Gamma'`, `Gamma'` not inside `Sigma_inf`, and the dimensions.
    pub fn validate(&self) -> Certificate {
        let started = Instant::now();
        let mut cert = Certificate::new("fv_configuration", "exhaustive").with_spec(&self.d.record());
        let m = self.field().degree() as usize;
        let z = self.bb.embed(&self.bb.spread().elements()[self.z_index()]);
        let sigma = self.sigma_inf();
        let checks = [
            ("v_dim", self.v.dim() == m),
            ("gamma_dim", self.gamma.dim() == 3 * m),
            ("gamma_prime_dim", self.gamma_prime.dim() == 3 * m + 1),
            ("v_in_z", z.contains(&self.v).unwrap_or(false)),
            ("v_meets_gamma_trivially", self.v.is_disjoint(&self.gamma).unwrap_or(false)),
            ("gamma_in_sigma_inf", sigma.contains(&self.gamma).unwrap_or(false)),
            ("gamma_in_gamma_prime", self.gamma_prime.contains(&self.gamma).unwrap_or(false)),
            ("gamma_prime_affine", !sigma.contains(&self.gamma_prime).unwrap_or(true)),
        ];
        for (name, ok) in checks {
            cert.add_checks(1);
            if !ok {
                cert.fail(json!({ "check": name }));
            }
        }
        cert.finish(started)
    }

    /// `I(x) = <x, V> ∩ Gamma` for the spread element with index `x != z`.
    pub fn i_of_x(&self, x: usize) -> Result<Subspace> {
        if x == self.z_index() {
            return Err(Error::InvalidInput("I(x) is defined for x != z".into()));
        }
        let e = self
            .bb
            .spread()
            .elements()
            .get(x)
            .ok_or_else(|| Error::InvalidInput(format!("no spread element {x}")))?;
        let i = self.bb.embed(e).sum(&self.v)?.intersect(&self.gamma)?;
        let m = self.field().degree() as usize;
        if i.dim() != 2 * m {
            return Err(Error::Construction {
                object: format!("I(x) for spread element {x}"),
                reason: format!("dimension {} instead of {}", i.dim(), 2 * m),
            });
        }
        Ok(i)
    }

    /// Egg coordinates `(u, t, r, s)` with `u` in `F_q` to `(u, 0, t, r, s)`.
    pub fn embed_egg_vector(&self, w: &[u32]) -> Result<Vec<u32>> {
        let m = self.field().degree() as usize;
        if w.len() != 4 * m {
            return Err(Error::DimensionMismatch { expected: 4 * m, found: w.len() });
        }
        if w[1..m].iter().any(|&x| x != 0) {
            return Err(Error::InvalidInput("the u block is not in the prime field".into()));
        }
        let mut out = Vec::with_capacity(4 * m + 1);
        out.push(w[0]);
        out.extend(std::iter::repeat(0).take(m));
        out.extend_from_slice(&w[m..]);
        Ok(out)
    }

    fn embed_egg_subspace(&self, s: &Subspace) -> Result<Subspace> {
        let rows = s.basis().iter().map(|r| self.embed_egg_vector(r)).collect::<Result<Vec<_>>>()?;
        Subspace::span(self.bb.p(), self.ambient_dim(), &rows)
    }

    /// `I_E(a,b) = E*(a,b) ∩ E*_inf`, in ambient coordinates.
    pub fn i_from_egg(&self, egg: &Egg, id: EggId) -> Result<Subspace> {
        let t = egg.tangent(id).ok_or_else(|| Error::InvalidInput(format!("{id:?} is not in the egg")))?;
        let t_inf = egg.tangent(EggId::Infinity).ok_or_else(|| Error::InvalidInput("egg has no E_inf".into()))?;
        self.embed_egg_subspace(&t.intersect(t_inf)?)
    }
}

/// Compares `{I_E(a,b)}` with `{I(x) : x != z}` as sets of subspaces, over
/// all ids. Also records how many labels `(a,b)` match `S(a,b)` directly.
pub fn check_ie_equals_iv(egg: &Egg, cfg: &FVConfig) -> Result<Certificate> {
    let started = Instant::now();
    let mut cert = Certificate::new("ie_equals_iv", "exhaustive").with_spec(&cfg.d.record());
    if let Some(spec) = egg.spec() {
        cert.detail("egg", spec.name());
    }
    if egg.m() != cfg.field().degree() as usize {
        return Err(Error::DimensionMismatch { expected: cfg.field().degree() as usize, found: egg.m() });
    }
    let affine: Vec<(Fe, Fe)> = egg
        .ids()
        .iter()
        .filter_map(|id| match *id {
            EggId::Affine(a, b) => Some((a, b)),
            _ => None,
        })
        .collect();
    let ie: Vec<Subspace> = affine
        .par_iter()
        .map(|&(a, b)| cfg.i_from_egg(egg, EggId::Affine(a, b)))
        .collect::<Result<_>>()?;
    let iv: Vec<Subspace> = (0..cfg.z_index()).into_par_iter().map(|x| cfg.i_of_x(x)).collect::<Result<_>>()?;
    let iv_set: HashSet<&Subspace> = iv.iter().collect();
    let mut label_matches = 0u64;
    for (&(a, b), s) in affine.iter().zip(&ie) {
        cert.add_checks(1);
        if !iv_set.contains(s) {
            cert.fail(json!({ "a": a, "b": b }));
        }
        if iv[cfg.d.index((a, b)) as usize] == *s {
            label_matches += 1;
        }
    }
    let ie_set: HashSet<&Subspace> = ie.iter().collect();
    cert.add_checks(1);
    if ie_set.len() != iv_set.len() {
        cert.fail(json!({ "check": "family_sizes", "ie": ie_set.len(), "iv": iv_set.len() }));
    }
    cert.detail("members", affine.len());
    cert.detail("label_matches", label_matches);
    Ok(cert.finish(started))
}

/// `B_E = {E ∩ Gamma'}` together with the parameters of the blocking family
/// `F(a,b,c) = {(u, 0, uc + h_(a,b)(r,s), r, s)}`.
#[derive(Clone, Debug)]
pub struct BlockingInstance {
    spec: GoodEggSpec,
    points: Vec<(Pair, Vec<u32>)>,
}

impl BlockingInstance {
    /// Intersects every affine egg element with `Gamma'`, in egg coordinates.
    pub fn from_egg(egg: &Egg, cfg: &FVConfig) -> Result<Self> {
        let spec = egg
            .spec()
            .cloned()
            .ok_or_else(|| Error::InvalidInput("the blocking family needs an egg built from a spec".into()))?;
        let f = cfg.field();
        let p = f.p();
        let m = f.degree() as usize;
        let gp_rows: Vec<Vec<u32>> = (0..4 * m)
            .filter(|&i| i == 0 || i >= m)
            .map(|i| (0..4 * m).map(|j| u32::from(i == j)).collect())
            .collect();
        let gamma_prime = Subspace::span(p, 4 * m, &gp_rows)?;
        let points = egg
            .ids()
            .par_iter()
            .zip(egg.elements())
            .filter_map(|(id, e)| match *id {
                EggId::Affine(a, b) => Some((a, b, e)),
                _ => None,
            })
            .map(|(a, b, e)| {
                let meet = e.intersect(&gamma_prime)?;
                let basis = meet.basis();
                if basis.len() != 1 || basis[0][0] == 0 {
                    return Err(Error::Construction {
                        object: format!("E({a},{b}) ∩ Gamma'"),
                        reason: format!("expected one affine point, found dimension {}", basis.len()),
                    });
                }
                // RREF with a leading u-coordinate means u = 1 already
                Ok(((a, b), cfg.embed_egg_vector(&basis[0])?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BlockingInstance { spec, points })
    }

    pub fn spec(&self) -> &GoodEggSpec {
        &self.spec
    }

    pub fn points(&self) -> &[(Pair, Vec<u32>)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `F(a,b,c)`, the join of `I_E(a,b)` with the affine point `(1, 0, c, 0, 0)`.
    pub fn f_member(&self, a: Fe, b: Fe, c: Fe) -> Subspace {
        let f = &**self.spec.field();
        let forms = self.spec.forms(a, b);
        let z = Fe::ZERO;
        let mut rows = vec![ambient_vector(f, 1, [z, c, z, z])];
        for e in f.basis() {
            rows.push(ambient_vector(f, 0, [z, forms.h(e, z), e, z]));
            rows.push(ambient_vector(f, 0, [z, forms.h(z, e), z, e]));
        }
        Subspace::span(f.p(), 4 * f.degree() as usize + 1, &rows).expect("valid rows")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockingMode {
    /// `(a,b) = (0,0)` and every `c`, after a `psi` check of `psi_trials`.
    Reduced { psi_trials: u64 },
    /// Every `(a,b,c)`.
    Exhaustive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coverage {
    Exhaustive,
    Sampled { samples: u64 },
}

struct PointSet {
    packed: Option<Vec<Trits>>,
    vectors: Vec<Vec<u32>>,
}

impl PointSet {
    fn new(points: &[(Pair, Vec<u32>)]) -> Self {
        let vectors: Vec<Vec<u32>> = points.iter().map(|(_, v)| v.clone()).collect();
        let packed = (points.first().is_some_and(|(_, v)| v.len() <= 32) && points.iter().all(|(_, v)| v.iter().all(|&x| x < 3)))
            .then(|| vectors.iter().map(|v| Trits::from_slice(v)).collect());
        PointSet { packed, vectors }
    }

    /// Indices of the points inside `s`.
    fn inside(&self, s: &Subspace) -> Vec<usize> {
        match (&self.packed, s.is_packed()) {
            (Some(t), true) => (0..t.len()).filter(|&i| s.contains_trits(t[i])).collect(),
            _ => (0..self.vectors.len()).filter(|&i| s.contains_vector(&self.vectors[i]).unwrap_or(false)).collect(),
        }
    }
}

/// Blocking: every member `F(a,b,c)` meets `B`. Minimality: `F(a,b,g_(a,b)(1))`
/// meets `B` only in `P(a,b)`. Both by direct intersection.
pub fn full_blocking_check(inst: &BlockingInstance, mode: BlockingMode, minimality: Coverage, seed: u64) -> Certificate {
    let started = Instant::now();
    let spec = &inst.spec;
    let f = spec.field().clone();
    let mode_name = match mode {
        BlockingMode::Reduced { .. } => "reduced",
        BlockingMode::Exhaustive => "exhaustive",
    };
    let mut cert = Certificate::new("blocking_set", mode_name).with_seed(seed).with_spec(&spec.record());
    let points = PointSet::new(&inst.points);
    let q = f.order();

    let members: Vec<(Fe, Fe, Fe)> = match mode {
        BlockingMode::Reduced { psi_trials } => {
            cert.depend(check_psi_family(spec, psi_trials, seed));
            f.elements().map(|c| (Fe::ZERO, Fe::ZERO, c)).collect()
        }
        BlockingMode::Exhaustive => (0..q * q * q)
            .map(|k| (f.element(k / (q * q)).unwrap(), f.element(k / q % q).unwrap(), f.element(k % q).unwrap()))
            .collect(),
    };
    let hits: Vec<usize> = members.par_iter().map(|&(a, b, c)| points.inside(&inst.f_member(a, b, c)).len()).collect();
    let mut histogram: BTreeMap<usize, u64> = BTreeMap::new();
    for (&(a, b, c), &n) in members.iter().zip(&hits) {
        *histogram.entry(n).or_default() += 1;
        cert.add_checks(1);
        if n == 0 {
            cert.fail(json!({ "check": "blocking", "a": a, "b": b, "c": c }));
        }
    }
    cert.detail("family_members", members.len());
    cert.detail("meet_histogram", &histogram);

    let total = inst.points.len() as u64;
    let (indices, coverage): (Vec<usize>, &str) = match minimality {
        Coverage::Exhaustive => ((0..inst.points.len()).collect(), "exhaustive"),
        Coverage::Sampled { samples } => {
            let stage = stage_seed(seed, "minimality");
            ((0..samples).map(|k| sample_rng(stage, k).gen_range(0..total) as usize).collect(), "sampled")
        }
    };
    let tally = par_sweep(Shard::ALL, indices.len() as u64, |k| {
        let i = indices[k as usize];
        let ((a, b), _) = inst.points[i];
        let c = spec.quadratic(a, b);
        let inside = points.inside(&inst.f_member(a, b, c));
        (inside != [i]).then(|| json!({ "check": "minimality", "a": a, "b": b, "c": c, "meets": inside.len() }))
    });
    cert.detail("minimality", coverage);
    cert.absorb_tally(tally);
    cert.finish(started)
}

/// For every `c`, counts solutions of `X^2 + sum_i (b_i XY + c_i Y^2)^{1/q^i} + c = 0`
/// by brute force over all `(X, Y)`.
pub fn solvability_criterion(spec: &GoodEggSpec) -> Certificate {
    let started = Instant::now();
    let f = spec.field().clone();
    let mut cert = Certificate::new("solvability", "exhaustive").with_spec(&spec.record());
    let q = f.order() as usize;
    let values: Vec<u32> = (0..q as u64)
        .into_par_iter()
        .flat_map_iter(|x| {
            let x = f.element(x).unwrap();
            let f = f.clone();
            let spec = spec.clone();
            f.clone().elements().map(move |y| spec.quadratic(x, y).0).collect::<Vec<_>>()
        })
        .collect();
    let mut counts = vec![0u64; q];
    for v in values {
        counts[v as usize] += 1;
    }
    let mut per_c = BTreeMap::new();
    for c in f.elements() {
        let n = counts[f.neg(c).index()];
        per_c.insert(c.0, n);
        cert.add_checks(1);
        if n == 0 {
            cert.fail(json!({ "c": c }));
        }
    }
    cert.detail("min_solutions", per_c.values().min().copied().unwrap_or(0));
    cert.detail("solutions_per_c", &per_c);
    cert.finish(started)
}

/// For the Penttila-Williams form `X^2 + (XY)^{3^4} - (Y^2)^{3^2} + c`: if `-c`
/// is a square, `(±sqrt(-c), 0)` are roots, otherwise `(0, ±sqrt(c^{3^3}))`.
/// Each root is evaluated in the closed form and in the generic quadratic.
pub fn pw_closed_form_roots(spec: &GoodEggSpec) -> Result<Certificate> {
    let started = Instant::now();
    let f = spec.field().clone();
    if f.p() != 3 || f.degree() != 5 {
        return Err(Error::InvalidInput("the closed form lives over F_{3^5}".into()));
    }
    let mut cert = Certificate::new("pw_closed_form_roots", "exhaustive").with_spec(&spec.record());
    let closed = |x: Fe, y: Fe| {
        let xy = f.pow(f.mul(x, y), 81);
        let yy = f.pow(f.mul(y, y), 9);
        f.sub(f.add(f.mul(x, x), xy), yy)
    };
    let (mut square, mut non_square) = (0u64, 0u64);
    for c in f.elements() {
        let minus_c = f.neg(c);
        let roots: Vec<(Fe, Fe)> = if f.is_square(minus_c) {
            square += 1;
            f.sqrt(minus_c).into_iter().map(|x| (x, Fe::ZERO)).collect()
        } else {
            non_square += 1;
            f.sqrt(f.pow(c, 27)).into_iter().map(|y| (Fe::ZERO, y)).collect()
        };
        cert.add_checks(1);
        if roots.is_empty() {
            cert.fail(json!({ "c": c, "check": "root_exists" }));
        }
        for (x, y) in roots {
            cert.add_checks(2);
            if !f.add(closed(x, y), c).is_zero() {
                cert.fail(json!({ "c": c, "root": [x, y], "check": "closed_form" }));
            }
            if !f.add(spec.quadratic(x, y), c).is_zero() {
                cert.fail(json!({ "c": c, "root": [x, y], "check": "generic_form" }));
            }
        }
    }
    cert.detail("minus_c_square", square);
    cert.detail("minus_c_non_square", non_square);
    Ok(cert.finish(started))
}

/// `B* = ⋃ <V, P> ∪ {z}`: affine points of the cones plus `z`.
#[derive(Clone, Debug)]
pub struct Cone {
    affine: Vec<Vec<u32>>,
    z: usize,
}

impl Cone {
    pub fn affine(&self) -> &[Vec<u32>] {
        &self.affine
    }

    /// Spread element index of the extra point.
    pub fn z(&self) -> usize {
        self.z
    }

    pub fn len(&self) -> usize {
        self.affine.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Builds the cone over affine points `(1, ...)` and checks `|B*| = q^m |B| + 1`.
pub fn build_cone(cfg: &FVConfig, b: &[Vec<u32>]) -> Result<Cone> {
    let v = cfg.v.vectors();
    let expected = v.len() as u64 * b.len() as u64;
    if expected > MAX_CONE_POINTS {
        return Err(Error::InvalidInput(format!(
            "a cone of {expected} affine points is too large to materialize; use the unital predicate"
        )));
    }
    let p = cfg.bb.p();
    let mut seen = HashSet::with_capacity(expected as usize);
    let mut affine = Vec::with_capacity(expected as usize);
    for pt in b {
        if pt.len() != cfg.ambient_dim() || pt[0] != 1 {
            return Err(Error::InvalidInput("cone generators must be affine points (1, ...)".into()));
        }
        for w in &v {
            let x: Vec<u32> = pt.iter().zip(w).map(|(a, b)| (a + b) % p).collect();
            if seen.insert(x.clone()) {
                affine.push(x);
            }
        }
    }
    if affine.len() as u64 != expected {
        return Err(Error::Construction {
            object: "cone".into(),
            reason: format!("{} affine points instead of q^m |B| = {expected}", affine.len()),
        });
    }
    Ok(Cone { affine, z: cfg.z_index() })
}

/// Maps every cone point into the coordinate plane and checks that the
/// images are exactly the points of `u`.
pub fn cone_matches_unital(cfg: &FVConfig, cone: &Cone, u: &UnitalModel) -> Result<Certificate> {
    let started = Instant::now();
    let mut cert = Certificate::new("cone_is_unital", "exhaustive");
    let mut images = HashSet::new();
    for w in &cone.affine {
        let pt = affine_to_coordinates(&cfg.d, &w[1..])?;
        cert.add_checks(1);
        if !u.contains(&pt) {
            cert.fail(json!({ "point": w }));
        }
        images.insert(pt);
    }
    let zp = crate::plane::element_to_coordinates(&cfg.d, cone.z);
    cert.add_checks(2);
    if !u.contains(&zp) {
        cert.fail(json!({ "point": "z" }));
    }
    images.insert(zp);
    if images.len() as u64 != u.len() {
        cert.fail(json!({ "check": "sizes", "cone": images.len(), "unital": u.len() }));
    }
    Ok(cert.finish(started))
}

/// Random cone points `P(a,b) + (0, c, kappa(c), 0, 0)` mapped into the plane
/// must satisfy the unital predicate.
pub fn cone_sample_check(cfg: &FVConfig, inst: &BlockingInstance, u: &UnitalModel, samples: u64, seed: u64) -> Certificate {
    let started = Instant::now();
    let mut cert = Certificate::new("cone_in_unital", "sampled").with_seed(seed);
    let f = cfg.field();
    let p = f.p();
    let stage = stage_seed(seed, "cone_points");
    let tally = par_sweep(Shard::ALL, samples, |k| {
        let mut rng = sample_rng(stage, k);
        let (_, pt) = &inst.points[rng.gen_range(0..inst.points.len())];
        let c = f.random(&mut rng);
        let v = ambient_vector(f, 0, [c, cfg.kappa.eval(c), Fe::ZERO, Fe::ZERO]);
        let w: Vec<u32> = pt.iter().zip(&v).map(|(a, b)| (a + b) % p).collect();
        let image = affine_to_coordinates(&cfg.d, &w[1..]).unwrap();
        (!u.contains(&image)).then(|| json!({ "point": w }))
    });
    cert.absorb_tally(tally);
    cert.finish(started)
}

/// The point set `{(g_(a,b)(1) - kappa(c), c; -a, -b)} ∪ {(inf)}` of the
/// coordinate plane, as a predicate with a streamed enumerator.
#[derive(Clone, Debug)]
pub struct UnitalModel {
    spec: GoodEggSpec,
    plane: CoordinatePlane,
    kappa: LinearizedPoly,
}

impl UnitalModel {
    pub fn new(spec: GoodEggSpec, d: DicksonSemifield, kappa: LinearizedPoly) -> Result<Self> {
        if **spec.field() != **d.field() || **kappa.field() != **d.field() {
            return Err(Error::MixedFields);
        }
        Ok(UnitalModel { spec, plane: CoordinatePlane::new(d), kappa })
    }

    pub fn from_config(spec: GoodEggSpec, cfg: &FVConfig) -> Result<Self> {
        Self::new(spec, cfg.d.clone(), cfg.kappa.clone())
    }

    pub fn penttila_williams() -> Self {
        let cfg_d = DicksonSemifield::penttila_williams();
        let f = cfg_d.field().clone();
        let kappa = LinearizedPoly::monomial(f.clone(), f.neg(Fe::ONE), 4);
        Self::new(GoodEggSpec::penttila_williams(), cfg_d, kappa).expect("same field")
    }

    pub fn spec(&self) -> &GoodEggSpec {
        &self.spec
    }

    pub fn plane(&self) -> &CoordinatePlane {
        &self.plane
    }

    /// `n = q^m`, so that lines meet the unital in 1 or `n + 1` points.
    pub fn n(&self) -> u64 {
        self.spec.field().order()
    }

    /// `n^3 + 1`.
    pub fn len(&self) -> u64 {
        self.n().pow(3) + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// With `y = (y1, y2)`, `x = (x1, x2)`: `a = -x1`, `b = -x2`, `c = y2`
    /// and the test `y1 = g_(a,b)(1) - kappa(c)`.
    #[inline]
    pub fn contains(&self, pt: &PlanePoint) -> bool {
        match *pt {
            PlanePoint::Affine { y, x } => {
                let f = &**self.spec.field();
                let g = self.spec.quadratic(f.neg(x.0), f.neg(x.1));
                y.0 == f.sub(g, self.kappa.eval(y.1))
            }
            PlanePoint::Slope(_) => false,
            PlanePoint::Infinity => true,
        }
    }

    pub fn point(&self, a: Fe, b: Fe, c: Fe) -> PlanePoint {
        let f = &**self.spec.field();
        let y1 = f.sub(self.spec.quadratic(a, b), self.kappa.eval(c));
        PlanePoint::Affine { y: (y1, c), x: (f.neg(a), f.neg(b)) }
    }

    /// All points, `(a,b,c)` in index order and then `(inf)`.
    pub fn points(&self) -> impl Iterator<Item = PlanePoint> + '_ {
        let f = self.spec.field();
        let q = f.order();
        (0..q * q * q)
            .map(move |k| {
                let e = |i: u64| f.element(i).unwrap();
                self.point(e(k / (q * q)), e(k / q % q), e(k % q))
            })
            .chain(std::iter::once(PlanePoint::Infinity))
    }

    /// Every point as its plane index, sorted. Holds `n^3 + 1` integers.
    pub fn materialize(&self) -> Vec<u64> {
        let mut v: Vec<u64> = self.points().map(|p| self.plane.point_index(&p)).collect();
        v.par_sort_unstable();
        v
    }

    /// Number of points on a line.
    pub fn meet(&self, line: &PlaneLine) -> u64 {
        let mut n = 0;
        self.plane.for_each_point_on(line, |p| n += u64::from(self.contains(&p)));
        n
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitalMode {
    Exhaustive,
    /// Lines through a unital point, through a point off the unital, and
    /// through `(inf)`, in rotation.
    Sampled { lines: u64 },
}

const STRATA: [&str; 3] = ["unital_point", "non_unital_point", "infinity"];

/// Checks that lines meet `u` in 1 or `n + 1` points and tallies tangents
/// and secants.
pub fn verify_unital(u: &UnitalModel, mode: UnitalMode, seed: u64, shard: Shard) -> Certificate {
    let started = Instant::now();
    let plane = &u.plane;
    let d = plane.semifield();
    let n = u.n();
    let order = plane.order();
    let (name, total) = match mode {
        UnitalMode::Exhaustive => ("exhaustive", plane.point_count()),
        UnitalMode::Sampled { lines } => ("sampled", lines),
    };
    let mut cert = Certificate::new("unital", name).with_seed(seed).with_shard(shard).with_spec(&u.spec.record());
    let stage = stage_seed(seed, "unital_lines");
    let direction = |p: &PlanePoint, r: u64| -> PlaneLine {
        if r < order {
            plane.line_through(p, &PlanePoint::Slope(d.element(r))).unwrap()
        } else {
            plane.line_through(p, &PlanePoint::Infinity).unwrap()
        }
    };
    let lines: Vec<(usize, PlaneLine)> = shard
        .indices(total)
        .map(|k| match mode {
            UnitalMode::Exhaustive => (0, plane.line(k)),
            UnitalMode::Sampled { .. } => {
                let mut rng = sample_rng(stage, k);
                let stratum = (k % 3) as usize;
                let line = match stratum {
                    0 => {
                        let f = &**u.spec.field();
                        let p = u.point(f.random(&mut rng), f.random(&mut rng), f.random(&mut rng));
                        direction(&p, rng.gen_range(0..=order))
                    }
                    1 => {
                        let p = loop {
                            let p = PlanePoint::Affine { y: d.random(&mut rng), x: d.random(&mut rng) };
                            if !u.contains(&p) {
                                break p;
                            }
                        };
                        direction(&p, rng.gen_range(0..=order))
                    }
                    _ => {
                        let r = rng.gen_range(0..=order);
                        if r < order {
                            PlaneLine::Vertical(d.element(r))
                        } else {
                            PlaneLine::Infinity
                        }
                    }
                };
                (stratum, line)
            }
        })
        .collect();
    let counts: Vec<u64> = lines.par_iter().map(|(_, l)| u.meet(l)).collect();
    let mut histogram: BTreeMap<u64, u64> = BTreeMap::new();
    let mut strata: BTreeMap<&str, BTreeMap<u64, u64>> = BTreeMap::new();
    let mut tally = Tally::default();
    for ((stratum, line), &c) in lines.iter().zip(&counts) {
        *histogram.entry(c).or_default() += 1;
        if matches!(mode, UnitalMode::Sampled { .. }) {
            *strata.entry(STRATA[*stratum]).or_default().entry(c).or_default() += 1;
        }
        tally.record((c != 1 && c != n + 1).then(|| json!({ "line": line, "meets": c })));
    }
    cert.detail("tangents", histogram.get(&1).copied().unwrap_or(0));
    cert.detail("secants", histogram.get(&(n + 1)).copied().unwrap_or(0));
    cert.detail("meet_histogram", &histogram);
    if !strata.is_empty() {
        cert.detail("strata", &strata);
    }
    cert.absorb_tally(tally);
    cert.finish(started)
}

/// Number of tangent lines through each unital point, by exhaustion over
/// the `n^2 + 1` lines through it. Small planes only.
pub fn tangents_per_point(u: &UnitalModel) -> HashMap<PlanePoint, u64> {
    u.points()
        .map(|p| {
            let tangents = u.plane.lines_through(&p).iter().filter(|l| u.meet(l) == 1).count() as u64;
            (p, tangents)
        })
        .collect()
}
