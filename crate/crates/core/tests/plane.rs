use std::sync::Arc;

use eggunital::linalg::Subspace;
use eggunital::plane::{
    model_isomorphism_check, tau_spread, verify_plane_axioms, BbLine, BbPoint, BruckBosePlane, CoordinatePlane,
    PlaneLine, PlanePoint,
};
use eggunital::sampling::{sample_rng, Shard};
use eggunital::spread::{verify_spread, CheckMode, DicksonSemifield, Spread};
use eggunital::{Fe, FiniteField, Status};
use rand::Rng;
use serde_json::json;

#[test]
fn order_81_plane_axioms() {
    let plane = CoordinatePlane::new(DicksonSemifield::order_81());
    let cert = verify_plane_axioms(&plane).unwrap();
    assert_eq!(cert.status, Status::Pass, "{:?}", cert.failures);
    assert_eq!(cert.details["points"], json!(6643));
    assert_eq!(cert.details["points_per_line"], json!(82));
}

#[test]
fn generated_points_match_predicate() {
    let plane = CoordinatePlane::new(DicksonSemifield::order_81());
    for l in (0..plane.point_count()).step_by(97) {
        let line = plane.line(l);
        let generated = plane.points_on(&line);
        assert_eq!(generated.len(), 82);
        let mut scanned: Vec<u64> =
            (0..plane.point_count()).filter(|&i| plane.incident(&plane.point(i), &line)).collect();
        let mut gen_idx: Vec<u64> = generated.iter().map(|p| plane.point_index(p)).collect();
        scanned.sort();
        gen_idx.sort();
        assert_eq!(scanned, gen_idx);
    }
}

#[test]
fn pw_line_through_random_pairs_is_unique() {
    let d = DicksonSemifield::penttila_williams();
    let plane = CoordinatePlane::new(d.clone());
    let mut rng = sample_rng(21, 0);
    for _ in 0..10_000 {
        let p1 = PlanePoint::Affine { y: d.random(&mut rng), x: d.random(&mut rng) };
        let p2 = match rng.gen_range(0..10) {
            0 => PlanePoint::Slope(d.random(&mut rng)),
            1 => PlanePoint::Infinity,
            _ => PlanePoint::Affine { y: d.random(&mut rng), x: d.random(&mut rng) },
        };
        if p1 == p2 {
            continue;
        }
        let line = plane.line_through(&p1, &p2).unwrap();
        assert!(plane.incident(&p1, &line) && plane.incident(&p2, &line));
        if let (PlanePoint::Affine { x: x1, .. }, PlanePoint::Affine { x: x2, .. }) = (p1, p2) {
            if x1 != x2 {
                // the slope is unique: m -> m * (x1 - x2) is nonsingular
                let f = d.field();
                let dx = (f.sub(x1.0, x2.0), f.sub(x1.1, x2.1));
                assert!(d.map_matrix(|m| d.mul(m, dx)).is_nonsingular());
            }
        }
    }
}

#[test]
fn pw_bruck_bose_lines() {
    let d = DicksonSemifield::penttila_williams();
    let spread = tau_spread(&d);
    assert_eq!(spread.len(), 59050);
    let bb = BruckBosePlane::new(spread);
    assert_eq!(bb.ambient_dim(), 21);
    let sigma_inf: Vec<Vec<u32>> = (1..21).map(|i| (0..21).map(|j| u32::from(i == j)).collect()).collect();
    let sigma_inf = Subspace::span(3, 21, &sigma_inf).unwrap();
    let mut rng = sample_rng(5, 0);
    for _ in 0..50 {
        let w1: Vec<u32> = (0..20).map(|_| rng.gen_range(0..3)).collect();
        let w2: Vec<u32> = (0..20).map(|_| rng.gen_range(0..3)).collect();
        if w1 == w2 {
            continue;
        }
        let line = bb.join(&w1, &w2).unwrap();
        let BbLine::Affine { element, subspace } = &line else { panic!("affine line expected") };
        assert_eq!(subspace.projective_dim(), 10);
        // 3^10 affine points plus the spread element's points at infinity
        let at_infinity = (3u64.pow(10) - 1) / 2;
        assert_eq!(subspace.point_count() - at_infinity, 3u64.pow(10));
        assert_eq!(subspace.intersect(&sigma_inf).unwrap(), bb.embed(&bb.spread().elements()[*element]));
        assert!(bb.bb_incident(&BbPoint::Affine(w2), &line).unwrap());
        assert!(bb.bb_incident(&BbPoint::Infinite(*element), &line).unwrap());
        assert!(!bb.bb_incident(&BbPoint::Infinite((*element + 1) % 59050), &line).unwrap());
    }
    assert!(bb.bb_incident(&BbPoint::Infinite(59050), &BbLine::Infinity).is_err());
}

#[test]
fn pw_models_agree_on_sampled_triples() {
    let d = DicksonSemifield::penttila_williams();
    let bb = BruckBosePlane::new(tau_spread(&d));
    let cert = model_isomorphism_check(&d, &bb, 2000, 3, Shard::ALL);
    assert_eq!(cert.status, Status::Pass, "{:?}", cert.failures);
    assert_eq!(cert.checks_run, 2000);
}

#[test]
fn pw_spread_sampled_pairs_are_disjoint() {
    let spread = tau_spread(&DicksonSemifield::penttila_williams());
    let cert = verify_spread(&spread, CheckMode::Sampled { samples: 20_000 }, 1);
    assert_eq!(cert.status, Status::Pass);
}

/// `{lambda (X, Y)}` for the points of `PG(1, 9)`, flattened to `GF(3)^4`.
fn regular_spread(f9: &FiniteField) -> Spread {
    let mut reps = vec![[Fe::ONE, Fe::ZERO]];
    reps.extend(f9.elements().map(|y| [y, Fe::ONE]));
    let elements = reps
        .iter()
        .map(|v| {
            let rows: Vec<Vec<u32>> = f9.basis().iter().map(|&l| f9.flatten(&[f9.mul(l, v[0]), f9.mul(l, v[1])])).collect();
            Subspace::span(3, 4, &rows).unwrap()
        })
        .collect();
    Spread::new(3, 4, elements).unwrap()
}

#[test]
fn regular_spread_plane_is_pg_2_9() {
    let f9 = Arc::new(FiniteField::new(3, 2).unwrap());
    let spread = regular_spread(&f9);
    assert_eq!(verify_spread(&spread, CheckMode::Exhaustive, 0).status, Status::Pass);
    let bb = BruckBosePlane::new(spread);
    let to_f9 = |w: &[u32]| {
        let v = f9.unflatten(w).unwrap();
        (v[0], v[1])
    };
    // collinearity of (1, X1, Y1), (1, X2, Y2), (1, X3, Y3) in PG(2, 9)
    let collinear = |a: (Fe, Fe), b: (Fe, Fe), c: (Fe, Fe)| {
        let (dx1, dy1) = (f9.sub(b.0, a.0), f9.sub(b.1, a.1));
        let (dx2, dy2) = (f9.sub(c.0, a.0), f9.sub(c.1, a.1));
        f9.mul(dx1, dy2) == f9.mul(dx2, dy1)
    };
    let affine: Vec<Vec<u32>> = Subspace::whole(3, 4).vectors();
    let mut rng = sample_rng(2, 0);
    for _ in 0..300 {
        let (i, j) = (rng.gen_range(0..81), rng.gen_range(0..81));
        if i == j {
            continue;
        }
        let line = bb.join(&affine[i], &affine[j]).unwrap();
        for w in &affine {
            let on_bb = bb.bb_incident(&BbPoint::Affine(w.clone()), &line).unwrap();
            let on_pg = collinear(to_f9(&affine[i]), to_f9(&affine[j]), to_f9(w));
            assert_eq!(on_bb, on_pg);
        }
    }
}

#[test]
fn m1_joins_are_exhaustively_unique() {
    let f9 = FiniteField::new(3, 2).unwrap();
    let bb = BruckBosePlane::new(regular_spread(&f9));
    let affine: Vec<Vec<u32>> = Subspace::whole(3, 4).vectors();
    for i in 0..81 {
        for j in i + 1..81 {
            let dir: Vec<u32> = affine[i].iter().zip(&affine[j]).map(|(a, b)| (a + 3 - b) % 3).collect();
            assert_eq!(bb.elements_containing(&dir).len(), 1);
        }
    }
}

#[test]
fn line_kinds_are_distinct() {
    let plane = CoordinatePlane::new(DicksonSemifield::order_81());
    let z = (Fe::ZERO, Fe::ZERO);
    assert!(!plane.incident(&PlanePoint::Slope(z), &PlaneLine::Vertical(z)));
    assert!(!plane.incident(&PlanePoint::Infinity, &PlaneLine::Slope { m: z, k: z }));
}
