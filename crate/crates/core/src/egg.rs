//! Eggs of `PG(4m-1, q)`: the coefficient construction from a
//! [`GoodEggSpec`], field reduction of ovoids of `PG(3, q^m)`, tangent spaces,
//! the translation collineations `psi_(a,b)`, semifield flocks, and
//! exhaustive, symmetry-reduced or sampled verification.
//!
//! Coordinates of `GF(q)^{4m}` are four blocks `(u, t, r, s)` of `m` prime
//! field coordinates each, every block the flattened form of one element of
//! `F_{q^m}`.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::certificate::{par_sweep, par_sweep_many, Certificate, Tally};
use crate::error::{Error, Result};
use crate::field::{Fe, FiniteField};
use crate::linalg::{MatGF, Subspace, Trits};
use crate::linpoly::{GoodEggSpec, LinearizedPoly};
use crate::sampling::{sample_rng, stage_seed, Shard};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EggId {
    Affine(Fe, Fe),
    Infinity,
    /// Index into the ovoid an elementary egg was built from.
    Point(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyMode {
    Exhaustive,
    /// Pairs through `E(0,0)` plus `(E_inf, E(0,0))`, and `triples` sampled
    /// triples through `E(0,0)`; preceded by a `psi` check of `psi_trials`.
    SymmetryReduced { triples: u64, psi_trials: u64 },
    Sampled { samples: u64 },
}

impl VerifyMode {
    fn name(&self) -> &'static str {
        match self {
            VerifyMode::Exhaustive => "exhaustive",
            VerifyMode::SymmetryReduced { .. } => "symmetry_reduced",
            VerifyMode::Sampled { .. } => "sampled",
        }
    }
}

/// A set of `q^{2m} + 1` subspaces of `PG(4m-1, q)` with their tangent spaces.
#[derive(Clone, Debug)]
pub struct Egg {
    field: Arc<FiniteField>,
    ids: Vec<EggId>,
    elements: Vec<Subspace>,
    tangents: Vec<Subspace>,
    spec: Option<GoodEggSpec>,
}

fn block_vector(field: &FiniteField, blocks: [Fe; 4]) -> Vec<u32> {
    field.flatten(&blocks)
}

/// `E(a,b)`, `E_inf`, computed directly from the spec.
pub fn egg_element(spec: &GoodEggSpec, id: EggId) -> Result<Subspace> {
    let f = &**spec.field();
    let p = f.p();
    let n = 4 * f.degree() as usize;
    let rows: Vec<Vec<u32>> = match id {
        EggId::Affine(a, b) => {
            let forms = spec.forms(a, b);
            f.basis()
                .into_iter()
                .map(|t| block_vector(f, [t, f.neg(forms.g(t)), f.neg(f.mul(a, t)), f.neg(f.mul(b, t))]))
                .collect()
        }
        EggId::Infinity => f.basis().into_iter().map(|t| block_vector(f, [Fe::ZERO, t, Fe::ZERO, Fe::ZERO])).collect(),
        EggId::Point(_) => return Err(Error::InvalidInput("point ids belong to elementary eggs".into())),
    };
    Subspace::span(p, n, &rows)
}

/// `E*(a,b)`, `E*_inf`.
pub fn egg_tangent(spec: &GoodEggSpec, id: EggId) -> Result<Subspace> {
    let f = &**spec.field();
    let p = f.p();
    let n = 4 * f.degree() as usize;
    let z = Fe::ZERO;
    let rows: Vec<Vec<u32>> = match id {
        EggId::Affine(a, b) => {
            let forms = spec.forms(a, b);
            let mut rows = Vec::new();
            for e in f.basis() {
                rows.push(block_vector(f, [e, forms.g(e), z, z]));
                rows.push(block_vector(f, [z, forms.h(e, z), e, z]));
                rows.push(block_vector(f, [z, forms.h(z, e), z, e]));
            }
            rows
        }
        EggId::Infinity => {
            let mut rows = Vec::new();
            for e in f.basis() {
                rows.push(block_vector(f, [z, e, z, z]));
                rows.push(block_vector(f, [z, z, e, z]));
                rows.push(block_vector(f, [z, z, z, e]));
            }
            rows
        }
        EggId::Point(_) => return Err(Error::InvalidInput("point ids belong to elementary eggs".into())),
    };
    Subspace::span(p, n, &rows)
}

/// Builds the egg `E(b, c)` with all elements and tangent spaces.
pub fn build_egg(spec: &GoodEggSpec) -> Result<Egg> {
    let field = spec.field().clone();
    let order = field.order();
    let m = field.degree() as usize;
    let mut ids: Vec<EggId> = (0..order * order)
        .map(|k| EggId::Affine(Fe((k / order) as u32), Fe((k % order) as u32)))
        .collect();
    ids.push(EggId::Infinity);
    let built: Vec<(Subspace, Subspace)> = ids
        .par_iter()
        .map(|&id| -> Result<(Subspace, Subspace)> {
            let e = egg_element(spec, id)?;
            let t = egg_tangent(spec, id)?;
            if e.dim() != m || t.dim() != 3 * m {
                return Err(Error::Construction {
                    object: "egg".into(),
                    reason: format!("{id:?}: element rank {} and tangent rank {} (expected {m} and {})", e.dim(), t.dim(), 3 * m),
                });
            }
            Ok((e, t))
        })
        .collect::<Result<_>>()?;
    let (elements, tangents) = built.into_iter().unzip();
    Ok(Egg { field, ids, elements, tangents, spec: Some(spec.clone()) })
}

/// Points of the elliptic quadric `x0 x1 + x2^2 - n x3^2 = 0` of
/// `PG(3, q^m)`, `n` the first non-square: `(0,1,0,0)` and
/// `(1, n y^2 - x^2, x, y)`.
pub fn elliptic_quadric_ovoid(field: &FiniteField) -> Vec<[Fe; 4]> {
    let n = field.nonzero_elements().find(|&x| !field.is_square(x)).expect("odd order fields have non-squares");
    let mut pts = vec![[Fe::ZERO, Fe::ONE, Fe::ZERO, Fe::ZERO]];
    for x in field.elements() {
        for y in field.elements() {
            let x1 = field.sub(field.mul(n, field.mul(y, y)), field.mul(x, x));
            pts.push([Fe::ONE, x1, x, y]);
        }
    }
    pts
}

/// `{lambda v : lambda in F_{q^m}}` as a subspace of `GF(q)^{4m}`.
fn reduce_vector(field: &FiniteField, v: &[Fe; 4]) -> Subspace {
    let rows: Vec<Vec<u32>> = field
        .basis()
        .into_iter()
        .map(|l| field.flatten(&[field.mul(l, v[0]), field.mul(l, v[1]), field.mul(l, v[2]), field.mul(l, v[3])]))
        .collect();
    Subspace::span(field.p(), 4 * field.degree() as usize, &rows).expect("valid coordinates")
}

fn dot4(field: &FiniteField, w: &[Fe; 4], v: &[Fe; 4]) -> Fe {
    (0..4).fold(Fe::ZERO, |acc, i| field.add(acc, field.mul(w[i], v[i])))
}

/// Normalized points of `PG(3, Q)`, leading coordinate 1.
fn projective_points(field: &FiniteField) -> Vec<[Fe; 4]> {
    let q = field.order();
    let mut out = Vec::new();
    for lead in 0..4 {
        let free = 3 - lead;
        for k in 0..q.pow(free as u32) {
            let mut v = [Fe::ZERO; 4];
            v[lead] = Fe::ONE;
            let mut k = k;
            for x in v.iter_mut().skip(lead + 1) {
                *x = Fe((k % q) as u32);
                k /= q;
            }
            out.push(v);
        }
    }
    out
}

/// Field reduction of an ovoid of `PG(3, q^m)`. The input is checked to have
/// `q^{2m} + 1` points, no three collinear, and a tangent plane at each point.
pub fn elementary_egg(field: Arc<FiniteField>, ovoid: &[[Fe; 4]]) -> Result<Egg> {
    let f = &*field;
    let order = f.order();
    let m = f.degree() as usize;
    let invalid = |reason: String| Error::Construction { object: "ovoid".into(), reason };
    if ovoid.len() as u64 != order * order + 1 {
        return Err(invalid(format!("{} points, expected {}", ovoid.len(), order * order + 1)));
    }
    if ovoid.iter().flatten().any(|&x| !f.contains(x)) || ovoid.iter().any(|v| v.iter().all(|x| x.is_zero())) {
        return Err(invalid("point with invalid coordinates".into()));
    }
    let elements: Vec<Subspace> = ovoid.iter().map(|v| reduce_vector(f, v)).collect();
    let n = elements.len();
    let collinear = (0..n).into_par_iter().find_map_any(|i| {
        for j in i + 1..n {
            let pair = Subspace::join_dim(&[&elements[i], &elements[j]]).unwrap();
            if pair < 2 * m {
                return Some((i, j, None));
            }
            for k in j + 1..n {
                if Subspace::join_dim(&[&elements[i], &elements[j], &elements[k]]).unwrap() < 3 * m {
                    return Some((i, j, Some(k)));
                }
            }
        }
        None
    });
    if let Some((i, j, k)) = collinear {
        return Err(invalid(match k {
            Some(k) => format!("points {i}, {j}, {k} are collinear"),
            None => format!("points {i} and {j} coincide"),
        }));
    }
    let planes = projective_points(f);
    let tangents = ovoid
        .par_iter()
        .enumerate()
        .map(|(i, v)| {
            let w = planes
                .iter()
                .find(|w| {
                    dot4(f, w, v).is_zero()
                        && ovoid.iter().enumerate().all(|(j, u)| j == i || !dot4(f, w, u).is_zero())
                })
                .ok_or_else(|| invalid(format!("no tangent plane at point {i}")))?;
            // kernel of w over F_{q^m}, then field reduction
            let piv = w.iter().position(|x| !x.is_zero()).expect("nonzero plane");
            let inv = f.inv(w[piv]).expect("nonzero pivot");
            let rows: Vec<Vec<u32>> = (0..4)
                .filter(|&c| c != piv)
                .flat_map(|c| {
                    let mut k = [Fe::ZERO; 4];
                    k[c] = Fe::ONE;
                    k[piv] = f.neg(f.mul(w[c], inv));
                    f.basis().into_iter().map(move |l| f.flatten(&k.map(|x| f.mul(l, x))))
                })
                .collect();
            Subspace::span(f.p(), 4 * m, &rows)
        })
        .collect::<Result<Vec<_>>>()?;
    let ids = (0..n as u32).map(EggId::Point).collect();
    Ok(Egg { field, ids, elements, tangents, spec: None })
}

impl Egg {
    pub fn field(&self) -> &Arc<FiniteField> {
        &self.field
    }

    pub fn spec(&self) -> Option<&GoodEggSpec> {
        self.spec.as_ref()
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn m(&self) -> usize {
        self.field.degree() as usize
    }

    pub fn ambient_dim(&self) -> usize {
        4 * self.m()
    }

    pub fn ids(&self) -> &[EggId] {
        &self.ids
    }

    pub fn elements(&self) -> &[Subspace] {
        &self.elements
    }

    pub fn tangents(&self) -> &[Subspace] {
        &self.tangents
    }

    pub fn index_of(&self, id: EggId) -> Option<usize> {
        let order = self.field.order();
        let idx = match (id, self.spec.is_some()) {
            (EggId::Affine(a, b), true) => {
                let (a, b) = (a.0 as u64, b.0 as u64);
                (a < order && b < order).then_some(a * order + b)?
            }
            (EggId::Infinity, true) => order * order,
            (EggId::Point(i), false) => i as u64,
            _ => return None,
        } as usize;
        (idx < self.ids.len()).then_some(idx)
    }

    pub fn element(&self, id: EggId) -> Option<&Subspace> {
        self.index_of(id).map(|i| &self.elements[i])
    }

    pub fn tangent(&self, id: EggId) -> Option<&Subspace> {
        self.index_of(id).map(|i| &self.tangents[i])
    }

    fn require_spec(&self, what: &str) -> Result<&GoodEggSpec> {
        self.spec
            .as_ref()
            .ok_or_else(|| Error::InvalidInput(format!("{what} needs an egg built from coefficients")))
    }
}

fn pair_witness(egg: &Egg, i: usize, j: usize) -> Option<Value> {
    let d = Subspace::join_dim(&[&egg.elements[i], &egg.elements[j]]).unwrap();
    (d != 2 * egg.m()).then(|| json!({ "check": "pair_disjoint", "ids": [egg.ids[i], egg.ids[j]], "span_dim": d }))
}

fn triple_witness(egg: &Egg, i: usize, j: usize, k: usize) -> Option<Value> {
    let d = Subspace::join_dim(&[&egg.elements[i], &egg.elements[j], &egg.elements[k]]).unwrap();
    (d != 3 * egg.m()).then(|| json!({ "check": "triple_span", "ids": [egg.ids[i], egg.ids[j], egg.ids[k]], "span_dim": d }))
}

fn distinct_pair<R: Rng>(rng: &mut R, n: usize, avoid: Option<usize>) -> (usize, usize) {
    loop {
        let (x, y) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if x != y && Some(x) != avoid && Some(y) != avoid {
            return (x, y);
        }
    }
}

/// Checks pairwise disjointness and that three elements span `PG(3m-1, q)`.
pub fn verify_egg(egg: &Egg, mode: VerifyMode, seed: u64, shard: Shard) -> Result<Certificate> {
    let started = Instant::now();
    let mut cert = Certificate::new("egg", mode.name()).with_seed(seed).with_shard(shard);
    if let Some(spec) = &egg.spec {
        cert = cert.with_spec(&spec.record());
    }
    cert.detail("elements", egg.len());
    let n = egg.len();
    for (i, e) in egg.elements.iter().enumerate() {
        if e.dim() != egg.m() {
            cert.fail(json!({ "check": "element_rank", "id": egg.ids[i], "rank": e.dim() }));
        }
    }
    let expected = egg.field.order().pow(2) + 1;
    if n as u64 != expected {
        cert.fail(json!({ "check": "element_count", "found": n, "expected": expected }));
    }
    match mode {
        VerifyMode::Exhaustive => {
            let pairs = par_sweep_many(shard, n as u64, |i| {
                let i = i as usize;
                let mut t = Tally::default();
                for j in i + 1..n {
                    t.record(pair_witness(egg, i, j));
                }
                t
            });
            cert.detail("pair_checks", pairs.checks);
            cert.absorb_tally(pairs);
            let triples = par_sweep_many(shard, n as u64, |i| {
                let i = i as usize;
                let mut t = Tally::default();
                for j in i + 1..n {
                    for k in j + 1..n {
                        t.record(triple_witness(egg, i, j, k));
                    }
                }
                t
            });
            cert.detail("triple_checks", triples.checks);
            cert.absorb_tally(triples);
        }
        VerifyMode::SymmetryReduced { triples, psi_trials } => {
            let spec = egg.require_spec("symmetry-reduced verification")?;
            cert.depend(check_psi_family(spec, psi_trials, stage_seed(seed, "psi")));
            let base = egg.index_of(EggId::Affine(Fe::ZERO, Fe::ZERO)).unwrap();
            let inf = egg.index_of(EggId::Infinity).unwrap();
            // (E(0,0), X) for every X other than E(0,0); X = E_inf covers (E_inf, E(0,0))
            let pairs = par_sweep(shard, n as u64, |j| {
                let j = j as usize;
                if j == base {
                    None
                } else {
                    pair_witness(egg, base, j)
                }
            });
            let pairs = Tally { checks: pairs.checks - u64::from(shard.indices(n as u64).any(|j| j as usize == base)), ..pairs };
            cert.detail("pair_checks", pairs.checks);
            cert.detail("pair_checks_with_infinity", u64::from(shard.indices(n as u64).any(|j| j as usize == inf)));
            cert.absorb_tally(pairs);
            let stage = stage_seed(seed, "triples");
            let tri = par_sweep(shard, triples, |k| {
                let mut rng = sample_rng(stage, k);
                let (x, y) = distinct_pair(&mut rng, n, Some(base));
                triple_witness(egg, base, x, y)
            });
            cert.detail("triple_checks", tri.checks);
            cert.absorb_tally(tri);
        }
        VerifyMode::Sampled { samples } => {
            let pair_stage = stage_seed(seed, "pairs");
            let pairs = par_sweep(shard, samples, |k| {
                let (x, y) = distinct_pair(&mut sample_rng(pair_stage, k), n, None);
                pair_witness(egg, x, y)
            });
            cert.detail("pair_checks", pairs.checks);
            cert.absorb_tally(pairs);
            let tri_stage = stage_seed(seed, "triples");
            let tri = par_sweep(shard, samples, |k| {
                let mut rng = sample_rng(tri_stage, k);
                let (x, y) = distinct_pair(&mut rng, n, None);
                let z = loop {
                    let z = rng.gen_range(0..n);
                    if z != x && z != y {
                        break z;
                    }
                };
                triple_witness(egg, x, y, z)
            });
            cert.detail("triple_checks", tri.checks);
            cert.absorb_tally(tri);
        }
    }
    Ok(cert.finish(started))
}

fn tangent_witnesses(egg: &Egg, i: usize, t: &mut Tally) {
    let m = egg.m();
    let tan = &egg.tangents[i];
    t.record((tan.dim() != 3 * m).then(|| json!({ "check": "tangent_rank", "id": egg.ids[i], "rank": tan.dim() })));
    t.record(
        (!tan.contains(&egg.elements[i]).unwrap())
            .then(|| json!({ "check": "tangent_contains_element", "id": egg.ids[i] })),
    );
}

fn tangent_meets(egg: &Egg, i: usize, j: usize) -> Option<Value> {
    let d = Subspace::join_dim(&[&egg.tangents[i], &egg.elements[j]]).unwrap();
    (d != egg.tangents[i].dim() + egg.m())
        .then(|| json!({ "check": "tangent_meets_element", "tangent": egg.ids[i], "element": egg.ids[j], "span_dim": d }))
}

/// Checks each tangent space has rank `3m`, contains its element and misses
/// every other element.
pub fn verify_tangents(egg: &Egg, mode: VerifyMode, seed: u64, shard: Shard) -> Result<Certificate> {
    let started = Instant::now();
    let mut cert = Certificate::new("egg_tangents", mode.name()).with_seed(seed).with_shard(shard);
    if let Some(spec) = &egg.spec {
        cert = cert.with_spec(&spec.record());
    }
    let n = egg.len();
    let tally = match mode {
        VerifyMode::Exhaustive => par_sweep_many(shard, n as u64, |i| {
            let i = i as usize;
            let mut t = Tally::default();
            tangent_witnesses(egg, i, &mut t);
            for j in (0..n).filter(|&j| j != i) {
                t.record(tangent_meets(egg, i, j));
            }
            t
        }),
        VerifyMode::SymmetryReduced { psi_trials, .. } => {
            let spec = egg.require_spec("symmetry-reduced verification")?;
            cert.depend(check_psi_family(spec, psi_trials, stage_seed(seed, "psi")));
            let mut t = Tally::default();
            for id in [EggId::Affine(Fe::ZERO, Fe::ZERO), EggId::Infinity] {
                let i = egg.index_of(id).unwrap();
                tangent_witnesses(egg, i, &mut t);
                let meets = par_sweep(shard, n as u64, |j| if j as usize == i { None } else { tangent_meets(egg, i, j as usize) });
                let own = u64::from(shard.indices(n as u64).any(|j| j as usize == i));
                t = t.merge(Tally { checks: meets.checks - own, ..meets });
            }
            t
        }
        VerifyMode::Sampled { samples } => {
            let stage = stage_seed(seed, "tangents");
            par_sweep_many(shard, samples, |k| {
                let (i, j) = distinct_pair(&mut sample_rng(stage, k), n, None);
                let mut t = Tally::default();
                tangent_witnesses(egg, i, &mut t);
                t.record(tangent_meets(egg, i, j));
                t
            })
        }
    };
    cert.absorb_tally(tally);
    Ok(cert.finish(started))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoodnessMode {
    Exhaustive,
    Sampled { samples: u64 },
}

/// Number of egg elements inside `W`.
fn count_contained(egg: &Egg, w: &Subspace) -> u64 {
    if w.is_packed() {
        let ann: Vec<Trits> = w.annihilator().trits().unwrap().to_vec();
        egg.elements
            .iter()
            .filter(|e| e.trits().unwrap().iter().all(|&v| ann.iter().all(|&a| a.dot(v) == 0)))
            .count() as u64
    } else {
        egg.elements.iter().filter(|e| w.contains(e).unwrap()).count() as u64
    }
}

/// Goodness at `id`: every `(3m-1)`-space spanned by `E_id` and two other
/// elements contains exactly `q^m + 1` elements. The histogram of observed
/// counts is recorded.
pub fn is_good_at(egg: &Egg, id: EggId, mode: GoodnessMode, seed: u64, shard: Shard) -> Result<Certificate> {
    let started = Instant::now();
    let base = egg.index_of(id).ok_or_else(|| Error::InvalidInput(format!("{id:?} is not an element of this egg")))?;
    let name = match mode {
        GoodnessMode::Exhaustive => "exhaustive",
        GoodnessMode::Sampled { .. } => "sampled",
    };
    let mut cert = Certificate::new("egg_goodness", name).with_seed(seed).with_shard(shard);
    if let Some(spec) = &egg.spec {
        cert = cert.with_spec(&spec.record());
    }
    cert.detail("at", id);
    let n = egg.len();
    let expected = egg.field.order() + 1;
    let check = |x: usize, y: usize, hist: &mut BTreeMap<u64, u64>| -> Option<Value> {
        let w = Subspace::join(&[&egg.elements[base], &egg.elements[x], &egg.elements[y]]).unwrap();
        let count = count_contained(egg, &w);
        *hist.entry(count).or_default() += 1;
        (count != expected || w.dim() != 3 * egg.m())
            .then(|| json!({ "ids": [egg.ids[x], egg.ids[y]], "contained": count, "span_dim": w.dim() }))
    };
    let stage = stage_seed(seed, "goodness");
    let total = match mode {
        GoodnessMode::Exhaustive => n as u64,
        GoodnessMode::Sampled { samples } => samples,
    };
    let owned: Vec<u64> = shard.indices(total).collect();
    let (tally, hist) = owned
        .into_par_iter()
        .map(|k| {
            let mut t = Tally::default();
            let mut hist = BTreeMap::new();
            match mode {
                GoodnessMode::Exhaustive => {
                    let x = k as usize;
                    if x != base {
                        for y in (x + 1..n).filter(|&y| y != base) {
                            t.record(check(x, y, &mut hist));
                        }
                    }
                }
                GoodnessMode::Sampled { .. } => {
                    let (x, y) = distinct_pair(&mut sample_rng(stage, k), n, Some(base));
                    t.record(check(x, y, &mut hist));
                }
            }
            (t, hist)
        })
        .reduce(
            || (Tally::default(), BTreeMap::new()),
            |(t1, mut h1), (t2, h2)| {
                for (k, v) in h2 {
                    *h1.entry(k).or_default() += v;
                }
                (t1.merge(t2), h1)
            },
        );
    cert.detail("expected_count", expected);
    cert.detail("count_histogram", hist);
    cert.absorb_tally(tally);
    Ok(cert.finish(started))
}

/// `psi_(a,b)(u,t,r,s) = (u, t + h_(a,b)(r,s) - g_(a,b)(u), r - ua, s - ub)`
/// as a `4m x 4m` matrix acting on row vectors.
pub fn psi_matrix(spec: &GoodEggSpec, a: Fe, b: Fe) -> MatGF {
    let f = &**spec.field();
    let m = f.degree() as usize;
    let forms = spec.forms(a, b);
    let rows: Vec<Vec<u32>> = (0..4 * m)
        .map(|j| {
            let mut unit = vec![0u32; 4 * m];
            unit[j] = 1;
            let v = f.unflatten(&unit).expect("4m coordinates");
            let (u, t, r, s) = (v[0], v[1], v[2], v[3]);
            let t2 = f.sub(f.add(t, forms.h(r, s)), forms.g(u));
            f.flatten(&[u, t2, f.sub(r, f.mul(u, a)), f.sub(s, f.mul(u, b))])
        })
        .collect();
    MatGF::from_rows(f.p(), 4 * m, &rows).expect("square map")
}

/// Applies `psi_(a,b)` to a vector of field coordinates `(u, t, r, s)`.
pub fn psi_apply(spec: &GoodEggSpec, a: Fe, b: Fe, v: [Fe; 4]) -> [Fe; 4] {
    let f = &**spec.field();
    let forms = spec.forms(a, b);
    let [u, t, r, s] = v;
    [u, f.sub(f.add(t, forms.h(r, s)), forms.g(u)), f.sub(r, f.mul(u, a)), f.sub(s, f.mul(u, b))]
}

fn tally_of(checks: u64, witnesses: Vec<Value>) -> Tally {
    Tally { checks, failures: witnesses.len() as u64, witnesses }
}

fn psi_trial(spec: &GoodEggSpec, a: Fe, b: Fe, a2: Fe, b2: Fe) -> Vec<Value> {
    let f = &**spec.field();
    let mut bad = Vec::new();
    let map = psi_matrix(spec, a, b);
    let target = EggId::Affine(f.add(a, a2), f.add(b, b2));
    let src = EggId::Affine(a2, b2);
    let img = egg_element(spec, src).unwrap().image(&map).unwrap();
    if img != egg_element(spec, target).unwrap() {
        bad.push(json!({ "check": "psi_element", "psi": [a, b], "from": src }));
    }
    let img = egg_tangent(spec, src).unwrap().image(&map).unwrap();
    if img != egg_tangent(spec, target).unwrap() {
        bad.push(json!({ "check": "psi_tangent", "psi": [a, b], "from": src }));
    }
    bad
}

fn psi_fixes_infinity(spec: &GoodEggSpec, a: Fe, b: Fe) -> Vec<Value> {
    let map = psi_matrix(spec, a, b);
    let mut bad = Vec::new();
    let inf = egg_element(spec, EggId::Infinity).unwrap();
    if inf.basis().iter().any(|v| map.vec_mul(v) != *v) {
        bad.push(json!({ "check": "psi_fixes_infinity_pointwise", "psi": [a, b] }));
    }
    let tan = egg_tangent(spec, EggId::Infinity).unwrap();
    if tan.image(&map).unwrap() != tan {
        bad.push(json!({ "check": "psi_fixes_tangent_at_infinity", "psi": [a, b] }));
    }
    bad
}

/// For a fixed `psi_(a,b)`: over `trials` random `(a',b')`, the image of
/// `E(a',b')` is `E(a+a',b+b')` and likewise for tangents; `E_inf` is fixed
/// pointwise.
pub fn check_psi(spec: &GoodEggSpec, a: Fe, b: Fe, trials: u64, seed: u64) -> Certificate {
    let started = Instant::now();
    let f = spec.field().clone();
    let mut cert = Certificate::new("psi_collineation", "sampled").with_seed(seed).with_spec(&spec.record());
    cert.detail("psi", [a, b]);
    let mut t = tally_of(2, psi_fixes_infinity(spec, a, b));
    let stage = stage_seed(seed, "psi");
    t = t.merge(par_sweep_many(Shard::ALL, trials, |k| {
        let mut rng = sample_rng(stage, k);
        let (a2, b2) = (f.random(&mut rng), f.random(&mut rng));
        tally_of(2, psi_trial(spec, a, b, a2, b2))
    }));
    cert.absorb_tally(t);
    cert.finish(started)
}

/// `check_psi` over random `(a,b)` as well, together with the identity
/// `psi_(0,0) = 1` and the group law `psi_(a,b) psi_(a',b') = psi_(a+a',b+b')`.
pub fn check_psi_family(spec: &GoodEggSpec, trials: u64, seed: u64) -> Certificate {
    let started = Instant::now();
    let f = spec.field().clone();
    let n = 4 * f.degree() as usize;
    let mut cert = Certificate::new("psi_collineation", "sampled").with_seed(seed).with_spec(&spec.record());
    let mut t = Tally::default();
    t.record((psi_matrix(spec, Fe::ZERO, Fe::ZERO) != MatGF::identity(f.p(), n)).then(|| json!({ "check": "psi_identity" })));
    let stage = stage_seed(seed, "psi_family");
    t = t.merge(par_sweep_many(Shard::ALL, trials, |k| {
        let mut rng = sample_rng(stage, k);
        let [a, b, a2, b2] = [0; 4].map(|_| f.random(&mut rng));
        let mut bad = psi_trial(spec, a, b, a2, b2);
        bad.extend(psi_fixes_infinity(spec, a, b));
        let composed = psi_matrix(spec, a2, b2).mul(&psi_matrix(spec, a, b)).unwrap();
        if composed != psi_matrix(spec, f.add(a, a2), f.add(b, b2)) {
            bad.push(json!({ "check": "psi_group_law", "psi": [a, b], "with": [a2, b2] }));
        }
        tally_of(5, bad)
    }));
    cert.detail("trials", trials);
    cert.absorb_tally(t);
    cert.finish(started)
}

/// The planes `t X0 + f(t) X1 + g(t) X2 + X3 = 0`, `t in F_{q^m}`, against
/// the quadratic cone `X0 X1 = X2^2` with vertex `(0,0,0,1)`.
#[derive(Clone, Debug)]
pub struct Flock {
    field: Arc<FiniteField>,
    f: LinearizedPoly,
    g: LinearizedPoly,
}

impl Flock {
    pub fn new(f: LinearizedPoly, g: LinearizedPoly) -> Result<Self> {
        if f.field().modulus() != g.field().modulus() || f.field().p() != g.field().p() {
            return Err(Error::MixedFields);
        }
        Ok(Flock { field: f.field().clone(), f, g })
    }

    /// `f(t) = sum c_i t^{q^i}`, `g(t) = sum b_i t^{q^i}`.
    pub fn from_spec(spec: &GoodEggSpec) -> Self {
        Flock { field: spec.field().clone(), f: spec.flock_f(), g: spec.flock_g() }
    }

    pub fn field(&self) -> &Arc<FiniteField> {
        &self.field
    }

    /// The plane coordinates `[t, f(t), g(t), 1]`.
    pub fn plane(&self, t: Fe) -> [Fe; 4] {
        [t, self.f.eval(t), self.g.eval(t), Fe::ONE]
    }

    pub fn on_plane(&self, t: Fe, x: &[Fe; 4]) -> bool {
        dot4(&self.field, &self.plane(t), x).is_zero()
    }
}

/// Points of the cone `X0 X1 = X2^2` other than the vertex.
pub fn cone_points(field: &FiniteField) -> Vec<[Fe; 4]> {
    projective_points(field)
        .into_iter()
        .filter(|x| field.mul(x[0], x[1]) == field.mul(x[2], x[2]))
        .filter(|x| x[..3].iter().any(|c| !c.is_zero()))
        .collect()
}

/// Checks that every non-vertex cone point lies on exactly one flock plane
/// and the vertex on none.
pub fn verify_flock(flock: &Flock) -> Certificate {
    let started = Instant::now();
    let f = &*flock.field;
    let mut cert = Certificate::new("flock", "exhaustive");
    let points = cone_points(f);
    cert.detail("cone_points", points.len());
    let vertex = [Fe::ZERO, Fe::ZERO, Fe::ZERO, Fe::ONE];
    let mut t = Tally::default();
    for s in f.elements() {
        t.record(flock.on_plane(s, &vertex).then(|| json!({ "check": "vertex_on_plane", "t": s })));
    }
    let mut per_plane: BTreeMap<u64, u64> = BTreeMap::new();
    let mut plane_sizes = vec![0u64; f.order() as usize];
    for x in &points {
        let on: Vec<Fe> = f.elements().filter(|&s| flock.on_plane(s, x)).collect();
        for s in &on {
            plane_sizes[s.0 as usize] += 1;
        }
        t.record((on.len() != 1).then(|| json!({ "check": "partition", "point": x, "planes": on })));
    }
    for size in plane_sizes {
        *per_plane.entry(size).or_default() += 1;
    }
    cert.detail("plane_intersection_sizes", per_plane);
    cert.absorb_tally(t);
    cert.finish(started)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificate::Status;

    #[test]
    fn origin_element_is_first_block() {
        let spec = GoodEggSpec::penttila_williams();
        let e = egg_element(&spec, EggId::Affine(Fe::ZERO, Fe::ZERO)).unwrap();
        let block: Vec<Vec<u32>> = (0..5)
            .map(|i| {
                let mut v = vec![0; 20];
                v[i] = 1;
                v
            })
            .collect();
        assert_eq!(e, Subspace::span(3, 20, &block).unwrap());
    }

    #[test]
    fn psi_origin_is_identity_and_moves_origin() {
        let spec = GoodEggSpec::penttila_williams();
        assert_eq!(psi_matrix(&spec, Fe::ZERO, Fe::ZERO), MatGF::identity(3, 20));
        let map = psi_matrix(&spec, Fe::ONE, Fe::ZERO);
        let img = egg_element(&spec, EggId::Affine(Fe::ZERO, Fe::ZERO)).unwrap().image(&map).unwrap();
        assert_eq!(img, egg_element(&spec, EggId::Affine(Fe::ONE, Fe::ZERO)).unwrap());
    }

    #[test]
    fn psi_matrix_matches_pointwise_map() {
        let spec = GoodEggSpec::penttila_williams();
        let f = spec.field().clone();
        let mut rng = sample_rng(5, 0);
        for _ in 0..200 {
            let (a, b) = (f.random(&mut rng), f.random(&mut rng));
            let v = [0; 4].map(|_| f.random(&mut rng));
            let by_matrix = psi_matrix(&spec, a, b).vec_mul(&f.flatten(&v));
            assert_eq!(by_matrix, f.flatten(&psi_apply(&spec, a, b, v)));
        }
    }

    #[test]
    fn sampled_zero_is_vacuous() {
        let egg = build_egg(&GoodEggSpec::elliptic_quadric_q3()).unwrap();
        let cert = verify_egg(&egg, VerifyMode::Sampled { samples: 0 }, 1, Shard::ALL).unwrap();
        assert_eq!(cert.status, Status::Pass);
        assert_eq!(cert.checks_run, 0);
    }

    #[test]
    fn wrong_ids_are_rejected() {
        let egg = build_egg(&GoodEggSpec::elliptic_quadric_q3()).unwrap();
        assert!(egg.element(EggId::Point(0)).is_none());
        assert!(egg.element(EggId::Affine(Fe(3), Fe(0))).is_none());
        assert!(is_good_at(&egg, EggId::Point(0), GoodnessMode::Exhaustive, 0, Shard::ALL).is_err());
    }

    #[test]
    fn cone_has_q_squared_plus_q_points() {
        for (p, m) in [(3, 1), (3, 2), (5, 1)] {
            let f = FiniteField::new(p, m).unwrap();
            let q = f.order() as usize;
            assert_eq!(cone_points(&f).len(), q * q + q);
        }
    }
}
