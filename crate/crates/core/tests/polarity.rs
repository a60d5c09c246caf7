use eggunital::plane::{PlaneLine, PlanePoint};
use eggunital::polarity::{non_polar_certificate, verify_polarity_family, UnitaryPolarity};
use eggunital::sampling::Shard;
use eggunital::spread::DicksonSemifield;
use eggunital::unital::{FVConfig, UnitalModel};
use eggunital::{Fe, GoodEggSpec, Status};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn images_of_special_points() {
    let d = DicksonSemifield::penttila_williams();
    let z = Fe::ZERO;
    let rho = UnitaryPolarity::new(d.clone(), Fe::ONE).unwrap();
    assert_eq!(rho.apply_point(&PlanePoint::Infinity), PlaneLine::Infinity);
    let origin = PlanePoint::Affine { y: (z, z), x: (z, z) };
    assert_eq!(rho.apply_point(&origin), PlaneLine::Slope { m: (z, z), k: (z, z) });
    assert!(rho.is_absolute(&origin));
    assert!(UnitaryPolarity::new(d, z).is_err());
}

#[test]
fn involution_on_random_points() {
    let d = DicksonSemifield::penttila_williams();
    let f = d.field().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let rho = UnitaryPolarity::new(d.clone(), f.random_nonzero(&mut rng)).unwrap();
    let plane = rho.plane().clone();
    for _ in 0..1000 {
        let p = plane.point(rand::Rng::gen_range(&mut rng, 0..plane.point_count()));
        assert_eq!(rho.apply_line(&rho.apply_point(&p)), p);
    }
}

#[test]
fn pw_probe_point_is_never_absolute() {
    // x = (1,1), y = 0 is absolute iff a + a^9 = 0, i.e. a^8 = -1, which has no solution
    let d = DicksonSemifield::penttila_williams();
    let f = d.field().clone();
    let probe = PlanePoint::Affine { y: (Fe::ZERO, Fe::ZERO), x: (Fe::ONE, Fe::ONE) };
    for a in f.nonzero_elements() {
        let rho = UnitaryPolarity::new(d.clone(), a).unwrap();
        let direct = f.add(a, f.pow(a, 9)).is_zero();
        assert_eq!(rho.is_absolute(&probe), direct);
        assert!(!direct);
    }
}

#[test]
fn pw_unital_is_not_polar() {
    let u = UnitalModel::penttila_williams();
    let cert = non_polar_certificate(&u);
    assert_eq!(cert.status, Status::Pass, "{:?}", cert.failures);
    assert_eq!(cert.details["parameters"], 242);
    let witnesses = cert.details["witnesses"].as_array().unwrap();
    assert_eq!(witnesses.len(), 242);
    let w = PlanePoint::Affine { y: (Fe::ONE, Fe::ONE), x: (Fe::ZERO, Fe::ZERO) };
    assert!(u.contains(&w));
    assert!(witnesses.iter().all(|e| e["point"] == serde_json::to_value(w).unwrap()));
    assert_eq!(cert.details["probe_x_11_non_absolute"], 242);
}

#[test]
fn absolute_points_of_rho_one() {
    let d = DicksonSemifield::penttila_williams();
    let rho = UnitaryPolarity::new(d.clone(), Fe::ONE).unwrap();
    assert_eq!(rho.absolute_count(), 243u64.pow(3) + 1);
    // brute force on a slice of the affine points agrees with the definition
    let f = d.field().clone();
    let x = (Fe::ONE, f.from_int(-1));
    let mut n = 0;
    for y in d.elements() {
        let p = PlanePoint::Affine { y, x };
        if rho.is_absolute(&p) {
            n += 1;
            assert!(rho.plane().incident(&p, &rho.apply_point(&p)));
        }
    }
    assert!(n == 0 || n == 243);
}

#[test]
fn order_nine_absolute_points() {
    let cfg = FVConfig::order_nine();
    let d = cfg.semifield().clone();
    for a in d.field().nonzero_elements() {
        let rho = UnitaryPolarity::new(d.clone(), a).unwrap();
        let plane = rho.plane();
        let brute = (0..plane.point_count()).filter(|&i| rho.is_absolute(&plane.point(i))).count() as u64;
        assert_eq!(rho.absolute_count(), brute);
    }
    let u = UnitalModel::from_config(GoodEggSpec::buekenhout_metz_q3(), &cfg).unwrap();
    assert!(non_polar_certificate(&u).checks_run > 0);
}

#[test]
fn family_reverses_incidence() {
    let d = DicksonSemifield::penttila_williams();
    let cert = verify_polarity_family(&d, 2000, 4, Shard::ALL);
    assert!(cert.passed(), "{:?}", cert.failures);
    assert_eq!(cert.checks_run, 2001);
    let d9 = DicksonSemifield::order_81();
    assert!(verify_polarity_family(&d9, 500, 4, Shard::ALL).checks_run > 0);
}
