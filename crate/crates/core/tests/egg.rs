use std::collections::BTreeSet;
use std::sync::Arc;

use eggunital::egg::{
    build_egg, check_psi, cone_points, egg_element, elementary_egg, elliptic_quadric_ovoid, is_good_at, verify_egg,
    verify_flock, verify_tangents, EggId, Flock, GoodnessMode, VerifyMode,
};
use eggunital::linalg::Subspace;
use eggunital::sampling::Shard;
use eggunital::{Fe, FiniteField, GoodEggSpec, LinearizedPoly, Status};
use serde_json::json;

fn f(p: u32, m: u32) -> Arc<FiniteField> {
    Arc::new(FiniteField::new(p, m).unwrap())
}

#[test]
fn m1_points_lie_on_elliptic_quadric() {
    let spec = GoodEggSpec::elliptic_quadric_q3();
    let egg = build_egg(&spec).unwrap();
    assert_eq!(egg.len(), 10);
    for e in egg.elements() {
        assert_eq!(e.dim(), 1);
        let x = &e.basis()[0];
        assert_eq!((x[0] * x[1] + x[2] * x[2] + x[3] * x[3]) % 3, 0, "{x:?}");
    }
    // and they are the points (1, -(a^2+b^2), -a, -b) plus (0,1,0,0)
    let mut expected = vec![Subspace::point(3, &[0, 1, 0, 0]).unwrap()];
    for a in 0..3u32 {
        for b in 0..3u32 {
            let v = [1, (6 - (a * a + b * b) % 3) % 3, (3 - a) % 3, (3 - b) % 3];
            expected.push(Subspace::point(3, &v).unwrap());
        }
    }
    let got: BTreeSet<_> = egg.elements().iter().map(|s| s.record().rows).collect();
    let want: BTreeSet<_> = expected.iter().map(|s| s.record().rows).collect();
    assert_eq!(got, want);
}

#[test]
fn m1_exhaustive_triples() {
    let egg = build_egg(&GoodEggSpec::elliptic_quadric_q3()).unwrap();
    let cert = verify_egg(&egg, VerifyMode::Exhaustive, 0, Shard::ALL).unwrap();
    assert_eq!(cert.status, Status::Pass);
    assert_eq!(cert.details["pair_checks"], json!(45));
    assert_eq!(cert.details["triple_checks"], json!(120));
}

#[test]
fn m1_coefficient_egg_equals_field_reduced_ovoid() {
    let field = f(3, 1);
    let built = build_egg(&GoodEggSpec::elliptic_quadric_q3()).unwrap();
    let reduced = elementary_egg(field.clone(), &elliptic_quadric_ovoid(&field)).unwrap();
    let a: BTreeSet<_> = built.elements().iter().map(|s| s.record().rows).collect();
    let b: BTreeSet<_> = reduced.elements().iter().map(|s| s.record().rows).collect();
    assert_eq!(a, b);
}

#[test]
fn m1_tangent_planes_meet_quadric_once() {
    let field = f(3, 1);
    let egg = elementary_egg(field.clone(), &elliptic_quadric_ovoid(&field)).unwrap();
    for (i, t) in egg.tangents().iter().enumerate() {
        assert_eq!(t.dim(), 3);
        let on: Vec<usize> = (0..egg.len()).filter(|&j| t.contains(&egg.elements()[j]).unwrap()).collect();
        assert_eq!(on, vec![i]);
    }
    let built = build_egg(&GoodEggSpec::elliptic_quadric_q3()).unwrap();
    assert_eq!(verify_tangents(&built, VerifyMode::Exhaustive, 0, Shard::ALL).unwrap().status, Status::Pass);
}

#[test]
fn elementary_egg_in_pg7_3() {
    let field = f(3, 2);
    let ovoid = elliptic_quadric_ovoid(&field);
    assert_eq!(ovoid.len(), 82);
    let egg = elementary_egg(field, &ovoid).unwrap();
    assert_eq!(egg.len(), 82);
    assert!(egg.elements().iter().all(|e| e.dim() == 2 && e.ambient_dim() == 8));
    let cert = verify_egg(&egg, VerifyMode::Exhaustive, 0, Shard::ALL).unwrap();
    assert_eq!(cert.status, Status::Pass);
    assert_eq!(cert.details["pair_checks"], json!(82 * 81 / 2));
    assert_eq!(verify_tangents(&egg, VerifyMode::Exhaustive, 0, Shard::ALL).unwrap().status, Status::Pass);
}

#[test]
fn non_ovoids_are_rejected() {
    let field = f(3, 2);
    let mut ovoid = elliptic_quadric_ovoid(&field);
    ovoid.pop();
    assert!(elementary_egg(field.clone(), &ovoid).is_err());
    // three collinear points: replace one with a point on the line through two others
    let mut ovoid = elliptic_quadric_ovoid(&field);
    let (p0, p1) = (ovoid[0], ovoid[1]);
    ovoid[2] = [0, 1, 2, 3].map(|i| field.add(p0[i], p1[i]));
    assert!(elementary_egg(field.clone(), &ovoid).is_err());
    // a repeated point
    let mut ovoid = elliptic_quadric_ovoid(&field);
    ovoid[5] = ovoid[6];
    assert!(elementary_egg(field, &ovoid).is_err());
}

#[test]
fn kantor_knuth_egg_axioms_agree_across_modes() {
    let egg = build_egg(&GoodEggSpec::kantor_knuth_q3_m2()).unwrap();
    let exhaustive = verify_egg(&egg, VerifyMode::Exhaustive, 3, Shard::ALL).unwrap();
    let reduced =
        verify_egg(&egg, VerifyMode::SymmetryReduced { triples: 2000, psi_trials: 100 }, 3, Shard::ALL).unwrap();
    assert_eq!(exhaustive.status, Status::Pass);
    assert_eq!(reduced.status, exhaustive.status);
    assert_eq!(reduced.details["pair_checks"], json!(81));
    assert_eq!(reduced.depends_on.len(), 1);
    assert_eq!(reduced.depends_on[0].object, "psi_collineation");
    let t1 = verify_tangents(&egg, VerifyMode::Exhaustive, 3, Shard::ALL).unwrap();
    let t2 = verify_tangents(&egg, VerifyMode::SymmetryReduced { triples: 0, psi_trials: 100 }, 3, Shard::ALL).unwrap();
    assert_eq!(t1.status, Status::Pass);
    assert_eq!(t2.status, Status::Pass);
}

#[test]
fn corrupted_egg_fails_in_every_mode() {
    // with b = c = 0 every E(0, y) lies in the (u, s) coordinate blocks
    let field = f(3, 2);
    let spec = GoodEggSpec::new(field, vec![Fe::ZERO; 2], vec![Fe::ZERO; 2], "degenerate").unwrap();
    let egg = build_egg(&spec).unwrap();
    for mode in [
        VerifyMode::Exhaustive,
        VerifyMode::SymmetryReduced { triples: 2000, psi_trials: 20 },
        VerifyMode::Sampled { samples: 2000 },
    ] {
        let cert = verify_egg(&egg, mode, 1, Shard::ALL).unwrap();
        assert_eq!(cert.status, Status::Fail, "{mode:?}");
        assert!(!cert.failures.is_empty());
        assert!(cert.failure_count >= cert.failures.len() as u64);
    }
}

#[test]
fn goodness_of_small_eggs() {
    let kk = build_egg(&GoodEggSpec::kantor_knuth_q3_m2()).unwrap();
    let at_inf = is_good_at(&kk, EggId::Infinity, GoodnessMode::Exhaustive, 0, Shard::ALL).unwrap();
    assert_eq!(at_inf.status, Status::Pass);
    assert_eq!(at_inf.checks_run, 81 * 80 / 2);
    assert_eq!(at_inf.details["count_histogram"], json!({ "10": 3240 }));

    // the same egg is not good at E(0,0): some spans hold 3 or 4 elements
    let at_origin = is_good_at(&kk, EggId::Affine(Fe::ZERO, Fe::ZERO), GoodnessMode::Exhaustive, 0, Shard::ALL).unwrap();
    assert_eq!(at_origin.status, Status::Fail);
    let hist = at_origin.details["count_histogram"].as_object().unwrap();
    assert!(hist.keys().any(|k| k != "10"));
    assert_eq!(hist.values().map(|v| v.as_u64().unwrap()).sum::<u64>(), 3240);

    // field reduction of a plane section of an ovoid: q^m + 1 elements at every element
    let field = f(3, 2);
    let el = elementary_egg(field.clone(), &elliptic_quadric_ovoid(&field)).unwrap();
    for i in [0, 17, 81] {
        let cert = is_good_at(&el, EggId::Point(i), GoodnessMode::Exhaustive, 0, Shard::ALL).unwrap();
        assert_eq!(cert.status, Status::Pass);
    }
}

#[test]
fn sampled_goodness_is_seed_reproducible_and_shardable() {
    let kk = build_egg(&GoodEggSpec::kantor_knuth_q3_m2()).unwrap();
    let id = EggId::Affine(Fe::ZERO, Fe::ZERO);
    let a = is_good_at(&kk, id, GoodnessMode::Sampled { samples: 300 }, 11, Shard::ALL).unwrap();
    let b = is_good_at(&kk, id, GoodnessMode::Sampled { samples: 300 }, 11, Shard::ALL).unwrap();
    assert_eq!(a.without_timing(), b.without_timing());
    let parts: Vec<_> = (0..3)
        .map(|i| is_good_at(&kk, id, GoodnessMode::Sampled { samples: 300 }, 11, Shard::new(i, 3).unwrap()).unwrap())
        .collect();
    assert_eq!(parts.iter().map(|c| c.checks_run).sum::<u64>(), a.checks_run);
    assert_eq!(parts.iter().map(|c| c.failure_count).sum::<u64>(), a.failure_count);
}

#[test]
fn psi_check_on_small_eggs() {
    for spec in [GoodEggSpec::kantor_knuth_q3_m2(), GoodEggSpec::buekenhout_metz_q3(), GoodEggSpec::penttila_williams()] {
        let field = spec.field().clone();
        let cert = check_psi(&spec, field.basis_element(0), Fe::ZERO, 30, 5);
        assert_eq!(cert.status, Status::Pass, "{}", spec.name());
    }
}

#[test]
fn pw_elements_are_disjoint_from_tangent_at_infinity() {
    let spec = GoodEggSpec::penttila_williams();
    let tan = eggunital::egg::egg_tangent(&spec, EggId::Infinity).unwrap();
    let field = spec.field().clone();
    let mut rng = eggunital::sampling::sample_rng(9, 0);
    for _ in 0..500 {
        let (a, b) = (field.random(&mut rng), field.random(&mut rng));
        let e = egg_element(&spec, EggId::Affine(a, b)).unwrap();
        assert!(tan.is_disjoint(&e).unwrap());
    }
}

#[test]
fn kantor_knuth_flock_partitions_the_cone() {
    let spec = GoodEggSpec::kantor_knuth_q3_m2();
    let cert = verify_flock(&Flock::from_spec(&spec));
    assert_eq!(cert.status, Status::Pass);
    assert_eq!(cert.checks_run, 90 + 9);
    assert_eq!(cert.details["cone_points"], json!(90));
    // every plane meets the cone in a conic of q^m + 1 points
    assert_eq!(cert.details["plane_intersection_sizes"], json!({ "10": 9 }));
}

#[test]
fn broken_flock_fails_with_witness() {
    let spec = GoodEggSpec::kantor_knuth_q3_m2();
    let fpoly = spec.flock_f();
    let broken = Flock::new(fpoly.clone(), fpoly).unwrap();
    let cert = verify_flock(&broken);
    assert_eq!(cert.status, Status::Fail);
    assert_eq!(cert.failures[0]["check"], json!("partition"));
}

#[test]
fn vertex_is_on_no_plane() {
    let field = f(3, 2);
    let flock = Flock::new(LinearizedPoly::identity(field.clone()), LinearizedPoly::zero(field.clone())).unwrap();
    let vertex = [Fe::ZERO, Fe::ZERO, Fe::ZERO, Fe::ONE];
    assert!(field.elements().all(|t| !flock.on_plane(t, &vertex)));
    assert!(!cone_points(&field).contains(&vertex));
}
