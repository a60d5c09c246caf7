use std::collections::HashSet;

use eggunital::egg::build_egg;
use eggunital::plane::{PlaneLine, PlanePoint};
use eggunital::sampling::Shard;
use eggunital::unital::{
    ambient_vector, build_cone, check_ie_equals_iv, cone_matches_unital, cone_sample_check, full_blocking_check,
    pw_closed_form_roots, solvability_criterion, tangents_per_point, verify_unital, BlockingInstance, BlockingMode,
    Coverage, FVConfig, UnitalMode, UnitalModel,
};
use eggunital::{Fe, GoodEggSpec, LinearizedPoly};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn order_nine() -> (GoodEggSpec, FVConfig) {
    (GoodEggSpec::buekenhout_metz_q3(), FVConfig::order_nine())
}

#[test]
fn configurations_satisfy_invariants() {
    assert!(FVConfig::penttila_williams().validate().passed());
    assert!(FVConfig::order_nine().validate().passed());
}

#[test]
fn pw_i_of_x_is_the_graph_of_h() {
    let cfg = FVConfig::penttila_williams();
    let d = cfg.semifield();
    let f = cfg.field();
    let z = Fe::ZERO;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    // h = -ar + b^9 s^9 + (br + as)^81, written out independently
    let h = |a: Fe, b: Fe, r: Fe, s: Fe| {
        let t1 = f.neg(f.mul(a, r));
        let t2 = f.pow(f.mul(b, s), 9);
        let t3 = f.pow(f.add(f.mul(b, r), f.mul(a, s)), 81);
        f.add(f.add(t1, t2), t3)
    };
    for _ in 0..100 {
        let (a, b) = d.random(&mut rng);
        let i = cfg.i_of_x(d.index((a, b)) as usize).unwrap();
        assert_eq!(i.dim(), 10);
        for _ in 0..20 {
            let (r, s) = (f.random(&mut rng), f.random(&mut rng));
            assert!(i.contains_vector(&ambient_vector(f, 0, [z, h(a, b, r, s), r, s])).unwrap());
        }
    }
    let i0 = cfg.i_of_x(0).unwrap();
    let mut expect = Vec::new();
    for e in f.basis() {
        expect.push(ambient_vector(f, 0, [z, z, e, z]));
        expect.push(ambient_vector(f, 0, [z, z, z, e]));
    }
    assert_eq!(i0, eggunital::linalg::Subspace::span(3, 21, &expect).unwrap());
    assert!(cfg.i_of_x(cfg.z_index()).is_err());
}

#[test]
fn pw_ie_equals_iv_exhaustively() {
    let cfg = FVConfig::penttila_williams();
    let egg = build_egg(&GoodEggSpec::penttila_williams()).unwrap();
    let cert = check_ie_equals_iv(&egg, &cfg).unwrap();
    assert!(cert.passed(), "{:?}", cert.failures);
    assert_eq!(cert.details["members"], 59049);
    assert_eq!(cert.details["label_matches"], 59049);
}

#[test]
fn perturbed_v_breaks_ie_equals_iv() {
    let base = FVConfig::penttila_williams();
    let f = base.semifield().field().clone();
    let kappa = LinearizedPoly::monomial(f.clone(), f.neg(Fe::ONE), 2);
    let cfg = FVConfig::new(base.semifield().clone(), kappa).unwrap();
    let egg = build_egg(&GoodEggSpec::penttila_williams()).unwrap();
    let cert = check_ie_equals_iv(&egg, &cfg).unwrap();
    assert!(!cert.passed());
    assert!(cert.failures[0].get("a").is_some());
}

#[test]
fn order_nine_pipeline() {
    let (spec, cfg) = order_nine();
    let egg = build_egg(&spec).unwrap();
    assert!(check_ie_equals_iv(&egg, &cfg).unwrap().passed());

    let inst = BlockingInstance::from_egg(&egg, &cfg).unwrap();
    assert_eq!(inst.len(), 9);
    let cert = full_blocking_check(&inst, BlockingMode::Exhaustive, Coverage::Exhaustive, 1);
    assert!(cert.passed(), "{:?}", cert.failures);
    assert_eq!(cert.details["family_members"], 27);

    // F(0,0,g_(0,0)(1)) meets B only in P(0,0)
    let f = spec.field();
    let tangent = inst.f_member(Fe::ZERO, Fe::ZERO, spec.quadratic(Fe::ZERO, Fe::ZERO));
    let inside: Vec<_> = inst.points().iter().filter(|(_, v)| tangent.contains_vector(v).unwrap()).collect();
    assert_eq!(inside.len(), 1);
    assert_eq!(inside[0].0, (Fe::ZERO, Fe::ZERO));
    assert_eq!(inside[0].1, ambient_vector(f, 1, [Fe::ZERO; 4]));

    let b: Vec<Vec<u32>> = inst.points().iter().map(|(_, v)| v.clone()).collect();
    let cone = build_cone(&cfg, &b).unwrap();
    assert_eq!(cone.len(), 28);
    let u = UnitalModel::from_config(spec, &cfg).unwrap();
    assert_eq!(u.len(), 28);
    assert!(cone_matches_unital(&cfg, &cone, &u).unwrap().passed());

    let cert = verify_unital(&u, UnitalMode::Exhaustive, 0, Shard::ALL);
    assert!(cert.passed(), "{:?}", cert.failures);
    assert_eq!(cert.checks_run, 91);
    assert_eq!(cert.details["tangents"], 28);
    assert_eq!(cert.details["secants"], 63);
    assert!(tangents_per_point(&u).values().all(|&t| t == 1));
}

#[test]
fn blocking_points_are_the_egg_points_on_gamma_prime() {
    let spec = GoodEggSpec::penttila_williams();
    let cfg = FVConfig::penttila_williams();
    let egg = build_egg(&spec).unwrap();
    let inst = BlockingInstance::from_egg(&egg, &cfg).unwrap();
    assert_eq!(inst.len(), 59049);
    let f = spec.field();
    for ((a, b), v) in inst.points() {
        let g = spec.quadratic(*a, *b);
        assert_eq!(*v, ambient_vector(f, 1, [Fe::ZERO, f.neg(g), f.neg(*a), f.neg(*b)]));
    }
}

#[test]
fn pw_solvability_and_closed_form_roots() {
    let spec = GoodEggSpec::penttila_williams();
    let cert = solvability_criterion(&spec);
    assert!(cert.passed());
    assert_eq!(cert.checks_run, 243);
    assert!(cert.details["solutions_per_c"]["0"].as_u64().unwrap() >= 1);
    let roots = pw_closed_form_roots(&spec).unwrap();
    assert!(roots.passed(), "{:?}", roots.failures);
    assert_eq!(roots.details["minus_c_square"], 122);
    assert!(pw_closed_form_roots(&GoodEggSpec::kantor_knuth_q3_m2()).is_err());
}

#[test]
fn pw_blocking_reduced_with_sampled_minimality() {
    let spec = GoodEggSpec::penttila_williams();
    let cfg = FVConfig::penttila_williams();
    let inst = BlockingInstance::from_egg(&build_egg(&spec).unwrap(), &cfg).unwrap();
    let cert = full_blocking_check(&inst, BlockingMode::Reduced { psi_trials: 20 }, Coverage::Sampled { samples: 30 }, 7);
    assert!(cert.passed(), "{:?}", cert.failures);
    assert_eq!(cert.depends_on.len(), 1);
    assert_eq!(cert.details["family_members"], 243);
}

#[test]
fn solvability_agrees_with_blocking_at_origin() {
    // m = 1 and m = 2 fixtures; the field plane only matters for embedding
    for spec in [GoodEggSpec::buekenhout_metz_q3(), GoodEggSpec::elliptic_quadric_q3(), GoodEggSpec::kantor_knuth_q3_m2()] {
        let m = spec.m();
        let cfg = if m == 1 {
            FVConfig::order_nine()
        } else {
            let d = eggunital::spread::DicksonSemifield::order_81();
            let f = d.field().clone();
            FVConfig::new(d, LinearizedPoly::monomial(f.clone(), f.neg(Fe::ONE), 1)).unwrap()
        };
        let inst = BlockingInstance::from_egg(&build_egg(&spec).unwrap(), &cfg).unwrap();
        let solv = solvability_criterion(&spec);
        let block = full_blocking_check(&inst, BlockingMode::Reduced { psi_trials: 10 }, Coverage::Exhaustive, 0);
        assert_eq!(solv.passed(), block.passed(), "{}", spec.name());
    }
}

#[test]
fn degenerate_form_is_not_blocking() {
    // X^2 + c = 0 has no solution when -c is a non-square
    let f = std::sync::Arc::new(eggunital::FiniteField::new(3, 1).unwrap());
    let spec = GoodEggSpec::new(f, vec![Fe::ZERO], vec![Fe::ZERO], "degenerate").unwrap();
    let cert = solvability_criterion(&spec);
    assert!(!cert.passed());
    assert_eq!(cert.failures[0]["c"], 1);
}

#[test]
fn cone_of_one_point_and_overlapping_generators() {
    let cfg = FVConfig::order_nine();
    let p = vec![1, 0, 0, 0, 0];
    assert_eq!(build_cone(&cfg, &[p.clone()]).unwrap().len(), 4);
    // (1, 1, -1, 0, 0) differs from p by a vector of V
    assert!(build_cone(&cfg, &[p, vec![1, 1, 2, 0, 0]]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn cone_size_formula(picks in proptest::collection::btree_set((0u32..3, 0u32..3, 0u32..3), 0..20)) {
        // (t, r, s) with v = 0 picks distinct cosets of V
        let cfg = FVConfig::order_nine();
        let b: Vec<Vec<u32>> = picks.iter().map(|&(t, r, s)| vec![1, 0, t, r, s]).collect();
        let cone = build_cone(&cfg, &b).unwrap();
        prop_assert_eq!(cone.len(), 3 * b.len() + 1);
    }
}

#[test]
fn pw_membership_examples() {
    let u = UnitalModel::penttila_williams();
    let f = u.spec().field().clone();
    let z = Fe::ZERO;
    let pt = |y1, y2, x1, x2| PlanePoint::Affine { y: (y1, y2), x: (x1, x2) };
    assert!(u.contains(&pt(z, z, z, z)));
    assert_eq!(u.spec().quadratic(Fe::ONE, z), Fe::ONE);
    assert!(u.contains(&pt(Fe::ONE, z, f.neg(Fe::ONE), z)));
    assert!(!u.contains(&pt(Fe::ONE, z, z, z)));
    assert!(u.contains(&PlanePoint::Infinity));
    assert_eq!(u.len(), 14_348_908);
    assert_eq!(u.meet(&PlaneLine::Slope { m: (z, z), k: (z, z) }), 1);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let (a, b, c) = (f.random(&mut rng), f.random(&mut rng), f.random(&mut rng));
        assert!(u.contains(&u.point(a, b, c)));
    }
}

#[test]
fn order_nine_enumerator_matches_predicate() {
    let (spec, cfg) = order_nine();
    let u = UnitalModel::from_config(spec, &cfg).unwrap();
    let listed: HashSet<u64> = u.materialize().into_iter().collect();
    assert_eq!(listed.len(), 28);
    let plane = u.plane();
    for i in 0..plane.point_count() {
        assert_eq!(listed.contains(&i), u.contains(&plane.point(i)), "point {i}");
    }
}

#[test]
fn pw_sampled_lines_and_cone_points() {
    let u = UnitalModel::penttila_williams();
    let cert = verify_unital(&u, UnitalMode::Sampled { lines: 60 }, 5, Shard::ALL);
    assert!(cert.passed(), "{:?}", cert.failures);
    assert_eq!(cert.checks_run, 60);
    let strata = cert.details["strata"].as_object().unwrap();
    assert_eq!(strata.len(), 3);

    let spec = GoodEggSpec::penttila_williams();
    let cfg = FVConfig::penttila_williams();
    let inst = BlockingInstance::from_egg(&build_egg(&spec).unwrap(), &cfg).unwrap();
    assert!(cone_sample_check(&cfg, &inst, &u, 2000, 1).passed());
}

#[test]
fn sampled_unital_shards_add_up() {
    let u = UnitalModel::penttila_williams();
    let mode = UnitalMode::Sampled { lines: 12 };
    let full = verify_unital(&u, mode, 9, Shard::ALL);
    let parts: u64 = (0..3).map(|i| verify_unital(&u, mode, 9, Shard::new(i, 3).unwrap()).checks_run).sum();
    assert_eq!(parts, full.checks_run);
    assert_eq!(full.without_timing(), verify_unital(&u, mode, 9, Shard::ALL).without_timing());
}
