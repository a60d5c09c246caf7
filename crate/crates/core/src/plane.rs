//! The translation plane of a semifield in two models: the coordinate plane
//! `pi(D)` with points `(y, x)`, `(m)`, `(inf)` and lines `[m, k]`, `[z]`,
//! `[inf]`, and the Bruck-Bose model built from a spread in the hyperplane
//! `u = 0` of `GF(p)^{2d+1}`.

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::certificate::{par_sweep, Certificate};
use crate::error::{Error, Result};
use crate::linalg::Subspace;
use crate::sampling::{sample_rng, stage_seed, Shard};
use crate::spread::{DicksonSemifield, Pair, Spread};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanePoint {
    Affine { y: Pair, x: Pair },
    Slope(Pair),
    Infinity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlaneLine {
    /// `[m, k] = {(y, x) : m * x + y = k} ∪ {(m)}`.
    Slope { m: Pair, k: Pair },
    /// `[z] = {(y, z)} ∪ {(inf)}`.
    Vertical(Pair),
    Infinity,
}

/// `pi(D)`, with `m * x` taken with `m` as the left factor.
#[derive(Clone, Debug)]
pub struct CoordinatePlane {
    d: DicksonSemifield,
}

impl CoordinatePlane {
    pub fn new(d: DicksonSemifield) -> Self {
        CoordinatePlane { d }
    }

    pub fn semifield(&self) -> &DicksonSemifield {
        &self.d
    }

    /// `|D|`.
    pub fn order(&self) -> u64 {
        self.d.order()
    }

    pub fn incident(&self, point: &PlanePoint, line: &PlaneLine) -> bool {
        let d = &self.d;
        match (point, line) {
            (PlanePoint::Affine { y, x }, PlaneLine::Slope { m, k }) => d.add(d.mul(*m, *x), *y) == *k,
            (PlanePoint::Affine { x, .. }, PlaneLine::Vertical(z)) => x == z,
            (PlanePoint::Affine { .. }, PlaneLine::Infinity) => false,
            (PlanePoint::Slope(s), PlaneLine::Slope { m, .. }) => s == m,
            (PlanePoint::Slope(_), PlaneLine::Vertical(_)) => false,
            (PlanePoint::Slope(_), PlaneLine::Infinity) => true,
            (PlanePoint::Infinity, PlaneLine::Slope { .. }) => false,
            (PlanePoint::Infinity, PlaneLine::Vertical(_) | PlaneLine::Infinity) => true,
        }
    }

    /// The `m` with `m * x = c`, for `x != 0`.
    pub fn left_divide(&self, c: Pair, x: Pair) -> Result<Pair> {
        let d = &self.d;
        let map = d.map_matrix(|m| d.mul(m, x));
        let sol = map.solve_left(&d.flatten(c))?;
        d.unflatten(&sol)
    }

    /// The unique line through two distinct points.
    pub fn line_through(&self, p: &PlanePoint, q: &PlanePoint) -> Result<PlaneLine> {
        if p == q {
            return Err(Error::InvalidInput("a line needs two distinct points".into()));
        }
        let d = &self.d;
        let sub = |a: Pair, b: Pair| (d.field().sub(a.0, b.0), d.field().sub(a.1, b.1));
        Ok(match (*p, *q) {
            (PlanePoint::Affine { y: y1, x: x1 }, PlanePoint::Affine { y: y2, x: x2 }) => {
                if x1 == x2 {
                    PlaneLine::Vertical(x1)
                } else {
                    let m = self.left_divide(sub(y2, y1), sub(x1, x2))?;
                    PlaneLine::Slope { m, k: d.add(d.mul(m, x1), y1) }
                }
            }
            (PlanePoint::Affine { y, x }, PlanePoint::Slope(m)) | (PlanePoint::Slope(m), PlanePoint::Affine { y, x }) => {
                PlaneLine::Slope { m, k: d.add(d.mul(m, x), y) }
            }
            (PlanePoint::Affine { x, .. }, PlanePoint::Infinity) | (PlanePoint::Infinity, PlanePoint::Affine { x, .. }) => {
                PlaneLine::Vertical(x)
            }
            _ => PlaneLine::Infinity,
        })
    }

    /// Dense index of a point: affine `(y, x)` first, then slopes, then `(inf)`.
    pub fn point_index(&self, point: &PlanePoint) -> u64 {
        let n = self.order();
        match point {
            PlanePoint::Affine { y, x } => self.d.index(*y) * n + self.d.index(*x),
            PlanePoint::Slope(m) => n * n + self.d.index(*m),
            PlanePoint::Infinity => n * n + n,
        }
    }

    pub fn point(&self, index: u64) -> PlanePoint {
        let n = self.order();
        if index < n * n {
            PlanePoint::Affine { y: self.d.element(index / n), x: self.d.element(index % n) }
        } else if index < n * n + n {
            PlanePoint::Slope(self.d.element(index - n * n))
        } else {
            PlanePoint::Infinity
        }
    }

    /// Lines indexed like points: `[m, k]` first, then `[z]`, then `[inf]`.
    pub fn line(&self, index: u64) -> PlaneLine {
        let n = self.order();
        if index < n * n {
            PlaneLine::Slope { m: self.d.element(index / n), k: self.d.element(index % n) }
        } else if index < n * n + n {
            PlaneLine::Vertical(self.d.element(index - n * n))
        } else {
            PlaneLine::Infinity
        }
    }

    pub fn point_count(&self) -> u64 {
        let n = self.order();
        n * n + n + 1
    }

    /// Calls `f` on every point of a line, generated from its equation.
    pub fn for_each_point_on(&self, line: &PlaneLine, mut f: impl FnMut(PlanePoint)) {
        let d = &self.d;
        let fld = d.field();
        match *line {
            PlaneLine::Slope { m, k } => {
                for x in d.elements() {
                    let mx = d.mul(m, x);
                    f(PlanePoint::Affine { y: (fld.sub(k.0, mx.0), fld.sub(k.1, mx.1)), x });
                }
                f(PlanePoint::Slope(m));
            }
            PlaneLine::Vertical(z) => {
                for y in d.elements() {
                    f(PlanePoint::Affine { y, x: z });
                }
                f(PlanePoint::Infinity);
            }
            PlaneLine::Infinity => {
                for m in d.elements() {
                    f(PlanePoint::Slope(m));
                }
                f(PlanePoint::Infinity);
            }
        }
    }

    /// The `n + 1` lines through a point.
    pub fn lines_through(&self, point: &PlanePoint) -> Vec<PlaneLine> {
        let d = &self.d;
        match *point {
            PlanePoint::Affine { y, x } => d
                .elements()
                .map(|m| PlaneLine::Slope { m, k: d.add(d.mul(m, x), y) })
                .chain(std::iter::once(PlaneLine::Vertical(x)))
                .collect(),
            PlanePoint::Slope(m) => d
                .elements()
                .map(|k| PlaneLine::Slope { m, k })
                .chain(std::iter::once(PlaneLine::Infinity))
                .collect(),
            PlanePoint::Infinity => d.elements().map(PlaneLine::Vertical).chain(std::iter::once(PlaneLine::Infinity)).collect(),
        }
    }

    /// Points of a line, generated from its equation.
    pub fn points_on(&self, line: &PlaneLine) -> Vec<PlanePoint> {
        let mut pts = Vec::with_capacity(self.order() as usize + 1);
        self.for_each_point_on(line, |p| pts.push(p));
        pts
    }
}

/// Projective plane axioms by exhaustion: the incidence predicate is scanned
/// over all point-line pairs, every line must carry `n + 1` points, every
/// point lie on `n + 1` lines, and every pair of points share exactly one line.
pub fn verify_plane_axioms(plane: &CoordinatePlane) -> Result<Certificate> {
    let started = Instant::now();
    let mut cert = Certificate::new("plane_axioms", "exhaustive").with_spec(&plane.d.record());
    let total = plane.point_count();
    if total > 20_000 {
        return Err(Error::InvalidInput(format!("{total} points is too many for an exhaustive axiom check")));
    }
    let n = total as usize;
    let order = plane.order();
    let points: Vec<PlanePoint> = (0..total).map(|i| plane.point(i)).collect();
    let incidences: Vec<Vec<u32>> = {
        use rayon::prelude::*;
        (0..total)
            .into_par_iter()
            .map(|l| {
                let line = plane.line(l);
                (0..n as u32).filter(|&i| plane.incident(&points[i as usize], &line)).collect()
            })
            .collect()
    };
    let mut lines_per_point = vec![0u64; n];
    // pair counts over the upper triangle, i < j
    let tri = |i: usize, j: usize| i * n - i * (i + 1) / 2 + (j - i - 1);
    let mut pairs = vec![0u8; n * (n - 1) / 2];
    for (l, on) in incidences.iter().enumerate() {
        cert.add_checks(1);
        if on.len() as u64 != order + 1 {
            cert.fail(json!({ "check": "points_per_line", "line": plane.line(l as u64), "points": on.len() }));
        }
        for (a, &i) in on.iter().enumerate() {
            lines_per_point[i as usize] += 1;
            for &j in &on[a + 1..] {
                let c = &mut pairs[tri(i as usize, j as usize)];
                *c = c.saturating_add(1);
            }
        }
    }
    for (i, &c) in lines_per_point.iter().enumerate() {
        cert.add_checks(1);
        if c != order + 1 {
            cert.fail(json!({ "check": "lines_per_point", "point": points[i], "lines": c }));
        }
    }
    cert.add_checks(pairs.len() as u64);
    if pairs.iter().any(|&c| c != 1) {
        for i in 0..n {
            for j in i + 1..n {
                let c = pairs[tri(i, j)];
                if c != 1 {
                    cert.fail(json!({ "check": "pair_on_one_line", "points": [points[i], points[j]], "lines": c }));
                }
            }
        }
    }
    cert.detail("points", total);
    cert.detail("lines", total);
    cert.detail("points_per_line", order + 1);
    Ok(cert.finish(started))
}

/// A point of the Bruck-Bose plane: an affine vector `w` standing for
/// `(1, w)`, or the spread element it lies in at infinity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BbPoint {
    Affine(Vec<u32>),
    Infinite(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BbLine {
    /// `<S_i, (1, w)>`.
    Affine { element: usize, subspace: Subspace },
    Infinity,
}

/// Bruck-Bose plane of a spread of `GF(p)^{2d}`, placed in the hyperplane
/// `u = 0` of `GF(p)^{2d+1}` with `u` the first coordinate.
#[derive(Clone, Debug)]
pub struct BruckBosePlane {
    spread: Spread,
}

impl BruckBosePlane {
    pub fn new(spread: Spread) -> Self {
        BruckBosePlane { spread }
    }

    pub fn spread(&self) -> &Spread {
        &self.spread
    }

    pub fn ambient_dim(&self) -> usize {
        self.spread.ambient_dim() + 1
    }

    pub fn p(&self) -> u32 {
        self.spread.p()
    }

    /// A subspace of the hyperplane at infinity in ambient coordinates.
    pub fn embed(&self, s: &Subspace) -> Subspace {
        let rows: Vec<Vec<u32>> = s.basis().into_iter().map(|r| std::iter::once(0).chain(r).collect()).collect();
        Subspace::span(self.p(), self.ambient_dim(), &rows).expect("valid rows")
    }

    pub fn affine_vector(&self, w: &[u32]) -> Vec<u32> {
        std::iter::once(1).chain(w.iter().copied()).collect()
    }

    /// `<S_element, (1, w)>`, of projective dimension `d`.
    pub fn bb_line(&self, element: usize, w: &[u32]) -> Result<BbLine> {
        let e = self
            .spread
            .elements()
            .get(element)
            .ok_or_else(|| Error::InvalidInput(format!("no spread element {element}")))?;
        if w.len() != self.spread.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: self.spread.ambient_dim(), found: w.len() });
        }
        let point = Subspace::span(self.p(), self.ambient_dim(), &[self.affine_vector(w)])?;
        Ok(BbLine::Affine { element, subspace: self.embed(e).sum(&point)? })
    }

    pub fn bb_incident(&self, point: &BbPoint, line: &BbLine) -> Result<bool> {
        match (point, line) {
            (BbPoint::Affine(w), BbLine::Affine { subspace, .. }) => subspace.contains_vector(&self.affine_vector(w)),
            (BbPoint::Infinite(i), BbLine::Affine { subspace, .. }) => {
                let e = self
                    .spread
                    .elements()
                    .get(*i)
                    .ok_or_else(|| Error::InvalidInput(format!("no spread element {i}")))?;
                subspace.contains(&self.embed(e))
            }
            (BbPoint::Affine(_), BbLine::Infinity) => Ok(false),
            (BbPoint::Infinite(i), BbLine::Infinity) => {
                if *i < self.spread.len() {
                    Ok(true)
                } else {
                    Err(Error::InvalidInput(format!("no spread element {i}")))
                }
            }
        }
    }

    /// Spread elements containing a nonzero direction vector of `GF(p)^{2d}`.
    pub fn elements_containing(&self, direction: &[u32]) -> Vec<usize> {
        self.spread
            .elements()
            .iter()
            .enumerate()
            .filter(|(_, e)| e.contains_vector(direction).unwrap_or(false))
            .map(|(i, _)| i)
            .collect()
    }

    /// The line joining two distinct affine points.
    pub fn join(&self, w1: &[u32], w2: &[u32]) -> Result<BbLine> {
        let p = self.p();
        let dir: Vec<u32> = w1.iter().zip(w2).map(|(a, b)| (a + p - b) % p).collect();
        if dir.iter().all(|&x| x == 0) {
            return Err(Error::InvalidInput("a line needs two distinct points".into()));
        }
        match self.elements_containing(&dir)[..] {
            [i] => self.bb_line(i, w1),
            ref hits => Err(Error::Construction {
                object: "bruck-bose line".into(),
                reason: format!("direction lies in {} spread elements", hits.len()),
            }),
        }
    }
}

/// `(u, v, t, r, s) -> (u, -t, v, r, s)` with blocks of `m` coordinates.
pub fn phi_bar(p: u32, m: usize, point: &[u32]) -> Vec<u32> {
    let mut out = point.to_vec();
    for i in 0..m {
        out[1 + i] = (p - point[1 + m + i]) % p;
        out[1 + m + i] = point[1 + i];
    }
    out
}

/// Coordinate-plane point of an affine Bruck-Bose point `(1, v, t, r, s)`
/// after `phi_bar`: `y = (-t, v)`, `x = (r, s)`.
pub fn affine_to_coordinates(d: &DicksonSemifield, w: &[u32]) -> Result<PlanePoint> {
    let p = d.field().p();
    let m = d.field().degree() as usize;
    let image = phi_bar(p, m, &std::iter::once(1).chain(w.iter().copied()).collect::<Vec<_>>());
    let y = d.unflatten(&image[1..1 + 2 * m])?;
    let x = d.unflatten(&image[1 + 2 * m..])?;
    Ok(PlanePoint::Affine { y, x })
}

/// For the spread `S(a,b) = {(tau_(a,b)(x,y), x, y)}` with `S_inf` last:
/// `S(a,b) -> (-(a,b))`, `S_inf -> (inf)`.
pub fn element_to_coordinates(d: &DicksonSemifield, element: usize) -> PlanePoint {
    if element as u64 == d.order() {
        PlanePoint::Infinity
    } else {
        let (a, b) = d.element(element as u64);
        PlanePoint::Slope((d.field().neg(a), d.field().neg(b)))
    }
}

/// Samples lines of the Bruck-Bose plane of the `tau` spread, three points on
/// each (two affine, one at infinity) plus an affine point off the line, and
/// checks that the coordinate images of the three are collinear in `pi(D)`
/// while the fourth is not on that line.
pub fn model_isomorphism_check(
    d: &DicksonSemifield,
    bb: &BruckBosePlane,
    trials: u64,
    seed: u64,
    shard: Shard,
) -> Certificate {
    let started = Instant::now();
    let plane = CoordinatePlane::new(d.clone());
    let mut cert = Certificate::new("model_isomorphism", "sampled").with_seed(seed).with_shard(shard).with_spec(&d.record());
    let p = d.field().p();
    let dim = d.dim();
    let n_elements = bb.spread().len();
    let stage = stage_seed(seed, "collinear_triples");
    let tally = par_sweep(shard, trials, |k| {
        let mut rng = sample_rng(stage, k);
        let element = rng.gen_range(0..n_elements);
        let w1: Vec<u32> = (0..2 * dim).map(|_| rng.gen_range(0..p)).collect();
        let e = &bb.spread().elements()[element];
        let dir = loop {
            let v = random_vector(e, &mut rng);
            if v.iter().any(|&x| x != 0) {
                break v;
            }
        };
        let w2: Vec<u32> = w1.iter().zip(&dir).map(|(a, b)| (a + b) % p).collect();
        let off: Vec<u32> = loop {
            let v: Vec<u32> = (0..2 * dim).map(|_| rng.gen_range(0..p)).collect();
            let diff: Vec<u32> = v.iter().zip(&w1).map(|(a, b)| (a + p - b) % p).collect();
            if !e.contains_vector(&diff).unwrap() {
                break v;
            }
        };
        let line = bb.bb_line(element, &w1).unwrap();
        let bb_ok = bb.bb_incident(&BbPoint::Affine(w2.clone()), &line).unwrap()
            && bb.bb_incident(&BbPoint::Infinite(element), &line).unwrap()
            && !bb.bb_incident(&BbPoint::Affine(off.clone()), &line).unwrap();
        let (p1, p2, p3, p4) = (
            affine_to_coordinates(d, &w1).unwrap(),
            affine_to_coordinates(d, &w2).unwrap(),
            element_to_coordinates(d, element),
            affine_to_coordinates(d, &off).unwrap(),
        );
        let image = plane.line_through(&p1, &p2).unwrap();
        let ok = bb_ok && plane.incident(&p3, &image) && !plane.incident(&p4, &image);
        (!ok).then(|| json!({ "element": element, "points": [w1, w2], "off_line": off }))
    });
    cert.absorb_tally(tally);
    cert.finish(started)
}

fn random_vector<R: Rng>(s: &Subspace, rng: &mut R) -> Vec<u32> {
    let p = s.p();
    let mut v = vec![0u32; s.ambient_dim()];
    for row in s.basis() {
        let c = rng.gen_range(0..p);
        for (x, r) in v.iter_mut().zip(row) {
            *x = (*x + c * r) % p;
        }
    }
    v
}

/// Spread `S(a,b) = {(tau_(a,b)(x,y), x, y)}` for all `(a,b)`, then
/// `S_inf = {(x, y, 0, 0)}`, indexed like the semifield elements.
pub fn tau_spread(d: &DicksonSemifield) -> Spread {
    use rayon::prelude::*;
    let dim = d.dim();
    let p = d.field().p();
    let mut elements: Vec<Subspace> = (0..d.order())
        .into_par_iter()
        .map(|k| {
            let tau = d.tau_matrix(d.element(k));
            let rows: Vec<Vec<u32>> = (0..dim)
                .map(|j| tau.row(j).iter().copied().chain((0..dim).map(|i| u32::from(i == j))).collect())
                .collect();
            Subspace::span(p, 2 * dim, &rows).expect("valid rows")
        })
        .collect();
    let inf: Vec<Vec<u32>> = (0..dim).map(|j| (0..2 * dim).map(|i| u32::from(i == j)).collect()).collect();
    elements.push(Subspace::span(p, 2 * dim, &inf).expect("valid rows"));
    Spread::new(p, 2 * dim, elements).expect("consistent dimensions")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Fe;

    #[test]
    fn basic_incidences() {
        let plane = CoordinatePlane::new(DicksonSemifield::order_81());
        let z = (Fe::ZERO, Fe::ZERO);
        assert!(plane.incident(&PlanePoint::Infinity, &PlaneLine::Infinity));
        assert!(plane.incident(&PlanePoint::Affine { y: z, x: z }, &PlaneLine::Slope { m: z, k: z }));
        assert_eq!(
            plane.line_through(&PlanePoint::Affine { y: z, x: z }, &PlanePoint::Slope(z)).unwrap(),
            PlaneLine::Slope { m: z, k: z }
        );
        let pt = PlanePoint::Affine { y: (Fe(3), Fe(1)), x: (Fe(2), Fe(5)) };
        assert_eq!(plane.line_through(&pt, &PlanePoint::Infinity).unwrap(), PlaneLine::Vertical((Fe(2), Fe(5))));
        assert!(plane.line_through(&pt, &pt).is_err());
    }

    #[test]
    fn phi_bar_has_order_four() {
        let mut rng = sample_rng(1, 0);
        for _ in 0..100 {
            let v: Vec<u32> = (0..21).map(|_| rng.gen_range(0..3)).collect();
            let twice = phi_bar(3, 5, &phi_bar(3, 5, &v));
            let four = phi_bar(3, 5, &phi_bar(3, 5, &twice));
            assert_eq!(four, v);
            // twice negates the v and t blocks only
            let negated: Vec<u32> =
                v.iter().enumerate().map(|(i, &x)| if (1..11).contains(&i) { (3 - x) % 3 } else { x }).collect();
            assert_eq!(twice, negated);
        }
        let origin = [1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0];
        assert_eq!(phi_bar(3, 5, &origin), origin.to_vec());
    }

    #[test]
    fn point_and_line_indices_roundtrip() {
        let plane = CoordinatePlane::new(DicksonSemifield::order_81());
        for i in (0..plane.point_count()).step_by(37) {
            assert_eq!(plane.point_index(&plane.point(i)), i);
        }
    }
}
