//! Dickson commutative semifields, spread sets of linear maps, and the
//! spreads built from them.
//!
//! Elements of a semifield on `F_{p^m}^2` are pairs `(x, y)`; as a vector
//! space over `GF(p)` a pair flattens to `2m` coordinates, `x` first. Linear
//! maps act on row vectors: row `j` of a matrix is the image of basis
//! vector `j`.

use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::certificate::{par_sweep, par_sweep_many, Certificate, Tally};
use crate::error::{Error, Result};
use crate::field::{Fe, FiniteField};
use crate::linalg::{MatGF, Subspace};
use crate::sampling::{sample_rng, stage_seed, Shard};

pub type Pair = (Fe, Fe);

/// Serialized semifield: `{ p, m, xi, alpha }`, `xi` as a field index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemifieldRecord {
    pub p: u32,
    pub m: u32,
    pub xi: u64,
    pub alpha: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<Vec<u32>>,
}

/// `D(p^m, xi, alpha)`: `(x,y) * (a,b) = (ax + xi b^sigma y^sigma, bx + ay)`
/// with `sigma: x -> x^{p^alpha}`.
#[derive(Clone, Debug)]
pub struct DicksonSemifield {
    field: Arc<FiniteField>,
    xi: Fe,
    alpha: u32,
}

impl DicksonSemifield {
    pub fn new(field: Arc<FiniteField>, xi: Fe, alpha: u32) -> Result<Self> {
        if alpha % field.degree() == 0 {
            return Err(Error::Construction {
                object: "dickson semifield".into(),
                reason: "the automorphism must not be the identity".into(),
            });
        }
        Self::checked(field, xi, alpha)
    }

    /// `F_{p^m}(sqrt xi)` written in Dickson form with `sigma` the identity.
    pub fn quadratic_field(field: Arc<FiniteField>, xi: Fe) -> Result<Self> {
        Self::checked(field, xi, 0)
    }

    fn checked(field: Arc<FiniteField>, xi: Fe, alpha: u32) -> Result<Self> {
        if !field.contains(xi) || xi.is_zero() || field.is_square(xi) {
            return Err(Error::Construction { object: "dickson semifield".into(), reason: "xi must be a non-square".into() });
        }
        let alpha = alpha % field.degree();
        Ok(DicksonSemifield { field, xi, alpha })
    }

    pub fn from_record(rec: &SemifieldRecord) -> Result<Self> {
        let field = match &rec.modulus {
            Some(modulus) => FiniteField::with_modulus(rec.p, rec.m, modulus.clone())?,
            None => FiniteField::new(rec.p, rec.m)?,
        };
        let xi = field.element(rec.xi)?;
        if rec.alpha % rec.m == 0 {
            Self::quadratic_field(Arc::new(field), xi)
        } else {
            Self::new(Arc::new(field), xi, rec.alpha)
        }
    }

    pub fn record(&self) -> SemifieldRecord {
        SemifieldRecord {
            p: self.field.p(),
            m: self.field.degree(),
            xi: self.xi.0 as u64,
            alpha: self.alpha,
            modulus: Some(self.field.modulus().to_vec()),
        }
    }

    /// `D(3^5, -1, 2)`.
    pub fn penttila_williams() -> Self {
        let field = Arc::new(FiniteField::new(3, 5).expect("F_243"));
        let xi = field.from_int(-1);
        Self::new(field, xi, 2).expect("-1 is a non-square in F_243")
    }

    /// `D(9, omega, 1)`, `omega` the first non-square of `F_9`.
    pub fn order_81() -> Self {
        let field = Arc::new(FiniteField::new(3, 2).expect("F_9"));
        let xi = field.nonzero_elements().find(|&x| !field.is_square(x)).expect("non-square");
        Self::new(field, xi, 1).expect("valid parameters")
    }

    pub fn field(&self) -> &Arc<FiniteField> {
        &self.field
    }

    pub fn xi(&self) -> Fe {
        self.xi
    }

    pub fn alpha(&self) -> u32 {
        self.alpha
    }

    /// Number of elements, `p^{2m}`.
    pub fn order(&self) -> u64 {
        self.field.order().pow(2)
    }

    /// Vector dimension over the prime field, `2m`.
    pub fn dim(&self) -> usize {
        2 * self.field.degree() as usize
    }

    #[inline]
    pub fn sigma(&self, x: Fe) -> Fe {
        self.field.frobenius(x, self.alpha)
    }

    #[inline]
    pub fn mul(&self, (x, y): Pair, (a, b): Pair) -> Pair {
        let f = &*self.field;
        let first = f.add(f.mul(a, x), f.mul(self.xi, f.mul(self.sigma(b), self.sigma(y))));
        (first, f.add(f.mul(b, x), f.mul(a, y)))
    }

    #[inline]
    pub fn add(&self, (x, y): Pair, (a, b): Pair) -> Pair {
        (self.field.add(x, a), self.field.add(y, b))
    }

    pub fn one(&self) -> Pair {
        (Fe::ONE, Fe::ZERO)
    }

    /// Element with index `k` in `0..order()`: `(k / Q, k % Q)`.
    pub fn element(&self, k: u64) -> Pair {
        let q = self.field.order();
        (Fe((k / q) as u32), Fe((k % q) as u32))
    }

    pub fn index(&self, (x, y): Pair) -> u64 {
        x.0 as u64 * self.field.order() + y.0 as u64
    }

    pub fn elements(&self) -> impl Iterator<Item = Pair> + '_ {
        (0..self.order()).map(|k| self.element(k))
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Pair {
        (self.field.random(rng), self.field.random(rng))
    }

    /// `GF(p)`-basis of `F_{p^m}^2`: `(w^i, 0)` then `(0, w^i)`.
    pub fn basis(&self) -> Vec<Pair> {
        let b = self.field.basis();
        b.iter().map(|&e| (e, Fe::ZERO)).chain(b.iter().map(|&e| (Fe::ZERO, e))).collect()
    }

    pub fn flatten(&self, (x, y): Pair) -> Vec<u32> {
        self.field.flatten(&[x, y])
    }

    pub fn unflatten(&self, v: &[u32]) -> Result<Pair> {
        let xs = self.field.unflatten(v)?;
        if xs.len() != 2 {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: v.len() });
        }
        Ok((xs[0], xs[1]))
    }

    /// Matrix of an additive map given on the basis.
    pub fn map_matrix(&self, map: impl Fn(Pair) -> Pair) -> MatGF {
        let rows: Vec<Vec<u32>> = self.basis().into_iter().map(|e| self.flatten(map(e))).collect();
        MatGF::from_rows(self.field.p(), self.dim(), &rows).expect("2m coordinates")
    }

    /// `phi_b: x -> x * b`.
    pub fn right_mul_matrix(&self, b: Pair) -> MatGF {
        self.map_matrix(|x| self.mul(x, b))
    }

    /// `tau_(a,b)(x,y) = (bx + ay, -ax - xi b^sigma y^sigma)`.
    pub fn tau(&self, (a, b): Pair, (x, y): Pair) -> Pair {
        let f = &*self.field;
        let second = f.neg(f.add(f.mul(a, x), f.mul(self.xi, f.mul(self.sigma(b), self.sigma(y)))));
        (f.add(f.mul(b, x), f.mul(a, y)), second)
    }

    pub fn tau_matrix(&self, ab: Pair) -> MatGF {
        self.map_matrix(|v| self.tau(ab, v))
    }

    /// `phi(x,y) = (-y, x)`.
    pub fn phi(&self, (x, y): Pair) -> Pair {
        (self.field.neg(y), x)
    }

    pub fn phi_matrix(&self) -> MatGF {
        self.map_matrix(|v| self.phi(v))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckMode {
    Exhaustive,
    Sampled { samples: u64 },
}

/// Distributive laws and absence of zero divisors.
pub fn verify_semifield(d: &DicksonSemifield, mode: CheckMode, seed: u64, shard: Shard) -> Certificate {
    let started = Instant::now();
    let mode_name = match mode {
        CheckMode::Exhaustive => "exhaustive",
        CheckMode::Sampled { .. } => "sampled",
    };
    let mut cert = Certificate::new("semifield", mode_name).with_seed(seed).with_shard(shard).with_spec(&d.record());
    let n = d.order();
    let zero = (Fe::ZERO, Fe::ZERO);
    let laws = |x: Pair, y: Pair, z: Pair| -> [Option<Value>; 2] {
        let left = d.mul(x, d.add(y, z)) == d.add(d.mul(x, y), d.mul(x, z));
        let right = d.mul(d.add(y, z), x) == d.add(d.mul(y, x), d.mul(z, x));
        [
            (!left).then(|| json!({ "law": "left_distributive", "x": x, "y": y, "z": z })),
            (!right).then(|| json!({ "law": "right_distributive", "x": x, "y": y, "z": z })),
        ]
    };
    let zero_divisor =
        |x: Pair, y: Pair| (x != zero && y != zero && d.mul(x, y) == zero).then(|| json!({ "law": "no_zero_divisors", "x": x, "y": y }));
    let (dist, nzd) = match mode {
        CheckMode::Exhaustive => {
            let dist = par_sweep_many(shard, n, |i| {
                let x = d.element(i);
                let mut t = Tally::default();
                for y in d.elements() {
                    for z in d.elements() {
                        for w in laws(x, y, z) {
                            t.record(w);
                        }
                    }
                }
                t
            });
            let nzd = par_sweep_many(shard, n, |i| {
                let x = d.element(i);
                let mut t = Tally::default();
                if x != zero {
                    for y in d.elements().filter(|&y| y != zero) {
                        t.record(zero_divisor(x, y));
                    }
                }
                t
            });
            (dist, nzd)
        }
        CheckMode::Sampled { samples } => {
            let stage = stage_seed(seed, "semifield");
            let dist = par_sweep_many(shard, samples, |k| {
                let mut rng = sample_rng(stage, k);
                let (x, y, z) = (d.random(&mut rng), d.random(&mut rng), d.random(&mut rng));
                let mut t = Tally::default();
                for w in laws(x, y, z) {
                    t.record(w);
                }
                t
            });
            let stage = stage_seed(seed, "zero_divisors");
            let nzd = par_sweep(shard, samples, |k| {
                let mut rng = sample_rng(stage, k);
                let x = loop {
                    let x = d.random(&mut rng);
                    if x != zero {
                        break x;
                    }
                };
                let y = loop {
                    let y = d.random(&mut rng);
                    if y != zero {
                        break y;
                    }
                };
                zero_divisor(x, y)
            });
            (dist, nzd)
        }
    };
    cert.detail("distributive_checks", dist.checks);
    cert.detail("product_checks", nzd.checks);
    cert.absorb_tally(dist);
    cert.absorb_tally(nzd);
    let one = d.one();
    let mut t = Tally::default();
    for b in d.basis() {
        t.record((d.mul(one, b) != b || d.mul(b, one) != b).then(|| json!({ "law": "identity", "x": b })));
    }
    cert.absorb_tally(t);
    cert.finish(started)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Nuclei {
    pub left: Vec<Pair>,
    pub middle: Vec<Pair>,
    pub right: Vec<Pair>,
    pub center: Vec<Pair>,
}

/// Brute-force nuclei and center.
pub fn nuclei(d: &DicksonSemifield) -> Nuclei {
    let all: Vec<Pair> = d.elements().collect();
    let scan = |pred: &(dyn Fn(Pair, Pair, Pair) -> bool + Sync)| -> Vec<Pair> {
        all.par_iter()
            .copied()
            .filter(|&a| all.iter().all(|&x| all.iter().all(|&y| pred(a, x, y))))
            .collect()
    };
    let left = scan(&|a, x, y| d.mul(a, d.mul(x, y)) == d.mul(d.mul(a, x), y));
    let middle = scan(&|a, x, y| d.mul(x, d.mul(a, y)) == d.mul(d.mul(x, a), y));
    let right = scan(&|a, x, y| d.mul(x, d.mul(y, a)) == d.mul(d.mul(x, y), a));
    let center = left
        .iter()
        .copied()
        .filter(|a| middle.contains(a) && right.contains(a))
        .filter(|&a| all.iter().all(|&x| d.mul(a, x) == d.mul(x, a)))
        .collect();
    Nuclei { left, middle, right, center }
}

/// A set of `GF(p)`-linear maps on `GF(p)^dim`.
#[derive(Clone, Debug)]
pub struct SpreadSet {
    p: u32,
    dim: usize,
    maps: Vec<MatGF>,
    additive_closed: bool,
}

impl SpreadSet {
    /// `additive_closed` is a claim, checked by [`verify_spread_set`].
    pub fn new(p: u32, dim: usize, maps: Vec<MatGF>, additive_closed: bool) -> Result<Self> {
        if let Some(bad) = maps.iter().find(|m| m.rows() != dim || m.cols() != dim || m.p() != p) {
            return Err(Error::DimensionMismatch { expected: dim, found: bad.rows().max(bad.cols()) });
        }
        Ok(SpreadSet { p, dim, maps, additive_closed })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn maps(&self) -> &[MatGF] {
        &self.maps
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn additive_closed(&self) -> bool {
        self.additive_closed
    }
}

/// `{phi_b : b in D}`, indexed like [`DicksonSemifield::element`].
pub fn spread_set_from_semifield(d: &DicksonSemifield) -> SpreadSet {
    let maps = (0..d.order()).into_par_iter().map(|k| d.right_mul_matrix(d.element(k))).collect();
    SpreadSet { p: d.field.p(), dim: d.dim(), maps, additive_closed: true }
}

/// `{phi tau_(a,b)}`, built by composing the two maps.
pub fn spread_set_from_tau(d: &DicksonSemifield) -> SpreadSet {
    let phi = d.phi_matrix();
    let maps = (0..d.order())
        .into_par_iter()
        .map(|k| d.tau_matrix(d.element(k)).mul(&phi).expect("square maps"))
        .collect();
    SpreadSet { p: d.field.p(), dim: d.dim(), maps, additive_closed: true }
}

fn flat(m: &MatGF) -> &[u32] {
    m.data()
}

/// Spread set axioms: `p^dim` distinct maps containing zero and the identity,
/// with all differences nonsingular. For an additively closed set the closure
/// is verified first (every map in the span of a greedy basis whose size
/// matches, plus `random_sums` sampled sums) and then only nonzero maps are
/// checked; otherwise, or with `pairwise`, every difference is.
pub fn verify_spread_set(c: &SpreadSet, pairwise: bool, random_sums: u64, seed: u64) -> Certificate {
    let started = Instant::now();
    let mode = if pairwise || !c.additive_closed { "pairwise" } else { "additive" };
    let mut cert = Certificate::new("spread_set", mode).with_seed(seed);
    let p = c.p;
    let d = c.dim;
    let expected = (p as u64).pow(d as u32);
    let mut t = Tally::default();
    t.record((c.len() as u64 != expected).then(|| json!({ "check": "cardinality", "found": c.len(), "expected": expected })));
    let distinct: HashSet<&[u32]> = c.maps.iter().map(flat).collect();
    t.record((distinct.len() != c.len()).then(|| json!({ "check": "distinct", "distinct": distinct.len(), "maps": c.len() })));
    let zero = MatGF::zeros(p, d, d);
    let id = MatGF::identity(p, d);
    t.record((!distinct.contains(flat(&zero))).then(|| json!({ "check": "contains_zero" })));
    t.record((!distinct.contains(flat(&id))).then(|| json!({ "check": "contains_identity" })));
    cert.absorb_tally(t);

    let use_additive = c.additive_closed && !pairwise;
    if use_additive {
        let closure = additive_closure(c, &distinct, random_sums, seed);
        let closed = closure.passed();
        cert.depend(closure);
        if !closed {
            return cert.finish(started);
        }
        let singular = par_sweep_many(Shard::ALL, c.len() as u64, |k| {
            let m = &c.maps[k as usize];
            let mut t = Tally::default();
            if !m.is_zero() {
                t.record((!m.is_nonsingular()).then(|| json!({ "check": "nonsingular", "index": k, "rank": m.rank() })));
            }
            t
        });
        cert.detail("rank_checks", singular.checks);
        cert.absorb_tally(singular);
    } else {
        let n = c.len() as u64;
        let diffs = par_sweep_many(Shard::ALL, n, |i| {
            let mut t = Tally::default();
            for j in i + 1..n {
                let diff = c.maps[i as usize].sub(&c.maps[j as usize]).expect("same shape");
                t.record((!diff.is_nonsingular()).then(|| json!({ "check": "difference_nonsingular", "pair": [i, j] })));
            }
            t
        });
        cert.detail("rank_checks", diffs.checks);
        cert.absorb_tally(diffs);
    }
    cert.finish(started)
}

fn additive_closure(c: &SpreadSet, members: &HashSet<&[u32]>, random_sums: u64, seed: u64) -> Certificate {
    let started = Instant::now();
    let mut cert = Certificate::new("spread_set_additive_closure", "spanning_set").with_seed(seed);
    let p = c.p;
    let len = c.dim * c.dim;
    let mut basis = Subspace::zero(p, len);
    let mut basis_idx = Vec::new();
    let mut outside = 0u64;
    for (k, m) in c.maps.iter().enumerate() {
        if !basis.contains_vector(flat(m)).expect("matching length") {
            basis = basis.sum(&Subspace::span(p, len, &[flat(m)]).expect("valid")).expect("same space");
            basis_idx.push(k);
            outside += 1;
        }
    }
    let rank = basis.dim();
    cert.add_checks(c.len() as u64);
    cert.detail("span_rank", rank);
    cert.detail("spanning_indices", &basis_idx);
    let span_size = (p as u128).pow(rank as u32);
    if span_size != members.len() as u128 {
        cert.fail(json!({ "check": "span_size", "span_rank": rank, "distinct_maps": members.len(), "rank_increments": outside }));
    }
    let stage = stage_seed(seed, "sums");
    let n = c.len();
    let sums = par_sweep(Shard::ALL, random_sums, |k| {
        let mut rng = sample_rng(stage, k);
        let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let s = c.maps[i].add(&c.maps[j]).expect("same shape");
        (!members.contains(flat(&s))).then(|| json!({ "check": "sum_in_set", "pair": [i, j] }))
    });
    cert.detail("random_sums", sums.checks);
    cert.absorb_tally(sums);
    cert.finish(started)
}

/// Equal-dimension subspaces of `GF(p)^{2d}` meant to partition the points.
#[derive(Clone, Debug)]
pub struct Spread {
    p: u32,
    ambient: usize,
    elements: Vec<Subspace>,
}

impl Spread {
    pub fn new(p: u32, ambient: usize, elements: Vec<Subspace>) -> Result<Self> {
        if let Some(e) = elements.iter().find(|e| e.ambient_dim() != ambient || e.p() != p) {
            return Err(Error::DimensionMismatch { expected: ambient, found: e.ambient_dim() });
        }
        Ok(Spread { p, ambient, elements })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn elements(&self) -> &[Subspace] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// `S_tau = {(x tau, x)}` for each map, then `S_inf = {(x, 0)}` last.
pub fn spread_from_spread_set(c: &SpreadSet) -> Spread {
    let d = c.dim;
    let mut elements: Vec<Subspace> = c
        .maps
        .par_iter()
        .map(|m| {
            let rows: Vec<Vec<u32>> = (0..d)
                .map(|j| {
                    let mut row = m.row(j).to_vec();
                    row.extend((0..d).map(|i| u32::from(i == j)));
                    row
                })
                .collect();
            Subspace::span(c.p, 2 * d, &rows).expect("valid rows")
        })
        .collect();
    let inf: Vec<Vec<u32>> = (0..d).map(|j| (0..2 * d).map(|i| u32::from(i == j)).collect()).collect();
    elements.push(Subspace::span(c.p, 2 * d, &inf).expect("valid rows"));
    Spread { p: c.p, ambient: 2 * d, elements }
}

/// Equal dimensions, the count `p^d + 1`, and pairwise trivial intersection
/// (all pairs, or sampled pairs). Exhaustive mode also counts, for every
/// point of the ambient space, the elements through it.
pub fn verify_spread(s: &Spread, mode: CheckMode, seed: u64) -> Certificate {
    let started = Instant::now();
    let name = match mode {
        CheckMode::Exhaustive => "exhaustive",
        CheckMode::Sampled { .. } => "sampled",
    };
    let mut cert = Certificate::new("spread", name).with_seed(seed);
    let d = s.ambient / 2;
    let p = s.p as u128;
    let mut t = Tally::default();
    for (i, e) in s.elements.iter().enumerate() {
        t.record((e.dim() != d).then(|| json!({ "check": "element_dim", "index": i, "dim": e.dim() })));
    }
    let expected = p.pow(d as u32) + 1;
    t.record((s.len() as u128 != expected).then(|| json!({ "check": "cardinality", "found": s.len(), "expected": expected.to_string() })));
    let per = (p.pow(d as u32) - 1) / (p - 1);
    let total = (p.pow(2 * d as u32) - 1) / (p - 1);
    t.record((s.len() as u128 * per != total).then(|| json!({ "check": "point_tiling", "elements": s.len() })));
    cert.detail("points_per_element", per.to_string());
    cert.detail("ambient_points", total.to_string());
    cert.absorb_tally(t);
    let n = s.len() as u64;
    let disjoint = |i: usize, j: usize| {
        let dim = Subspace::join_dim(&[&s.elements[i], &s.elements[j]]).unwrap();
        (dim != s.elements[i].dim() + s.elements[j].dim()).then(|| json!({ "check": "pair_disjoint", "pair": [i, j] }))
    };
    let pairs = match mode {
        CheckMode::Exhaustive => par_sweep_many(Shard::ALL, n, |i| {
            let mut t = Tally::default();
            for j in i + 1..n {
                t.record(disjoint(i as usize, j as usize));
            }
            t
        }),
        CheckMode::Sampled { samples } => {
            let stage = stage_seed(seed, "spread_pairs");
            par_sweep(Shard::ALL, samples, |k| {
                let mut rng = sample_rng(stage, k);
                loop {
                    let (i, j) = (rng.gen_range(0..n as usize), rng.gen_range(0..n as usize));
                    if i != j {
                        break disjoint(i, j);
                    }
                }
            })
        }
    };
    cert.detail("pair_checks", pairs.checks);
    cert.absorb_tally(pairs);
    if mode == CheckMode::Exhaustive {
        let points = Subspace::whole(s.p, s.ambient).vectors();
        let mut cover: BTreeMap<usize, u64> = BTreeMap::new();
        let mut t = Tally::default();
        for v in points.iter().filter(|v| v.iter().find(|&&x| x != 0) == Some(&1)) {
            let k = s.elements.iter().filter(|e| e.contains_vector(v).unwrap()).count();
            *cover.entry(k).or_default() += 1;
            t.record((k != 1).then(|| json!({ "check": "point_cover", "point": v, "elements": k })));
        }
        cert.detail("point_cover_histogram", cover);
        cert.absorb_tally(t);
    }
    cert.finish(started)
}

/// `phi(tau_(a,b)(v)) = v * (a,b)` for every `(a,b)` of the shard and every
/// basis vector `v`.
pub fn dickson_correspondence_check(d: &DicksonSemifield, shard: Shard) -> Certificate {
    let started = Instant::now();
    let mut cert = Certificate::new("dickson_correspondence", "exhaustive").with_shard(shard).with_spec(&d.record());
    let basis = d.basis();
    let tally = par_sweep_many(shard, d.order(), |k| {
        let ab = d.element(k);
        let mut t = Tally::default();
        for &v in &basis {
            let lhs = d.phi(d.tau(ab, v));
            let rhs = d.mul(v, ab);
            t.record((lhs != rhs).then(|| json!({ "a": ab.0, "b": ab.1, "x": v.0, "y": v.1 })));
        }
        t
    });
    cert.absorb_tally(tally);
    cert.finish(started)
}
