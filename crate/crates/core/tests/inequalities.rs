use subfrac_core::asymptotics::{run_suite, InequalitySuite, Verdict};
use subfrac_core::functionals::{bump, gauss};
use subfrac_core::*;

fn energy_checks() -> InequalitySuite {
    InequalitySuite {
        s_list: vec![0.3, 0.9],
        translations: 5,
        // the sandwich has its own test; on the Korányi sphere its lower half fails
        sandwich_t: vec![],
        ..Default::default()
    }
}

#[test]
fn heisenberg_energy_bounds_hold() {
    let ng = HomogeneousGauge::from_ids("h1", "koranyi").unwrap();
    let spec = QuadratureSpec::with_samples(1 << 15, 21);
    let u = bump(&ng, 1.0).unwrap();
    for phi in [OrliczFunction::power(2.0).unwrap(), OrliczFunction::power_log(2.0).unwrap()] {
        let r = run_suite(&u, &phi, &ng, &energy_checks(), &spec).unwrap();
        let bad: Vec<_> = r.records.iter().filter(|v| v.is_hard_fail()).collect();
        assert!(bad.is_empty(), "{}: {bad:#?}", phi.id());
        assert!(r.records.iter().any(|v| v.name.starts_with("mollification")));
        assert!(r.records.iter().any(|v| v.name.starts_with("truncation")));
    }
}

#[test]
fn planar_gaussian_bounds_hold() {
    let ng = HomogeneousGauge::from_ids("r2", "euclidean").unwrap();
    let spec = QuadratureSpec::with_samples(1 << 15, 22);
    let u = gauss(&ng, 4.0).unwrap();
    let phi = OrliczFunction::power(3.0).unwrap();
    let r = run_suite(&u, &phi, &ng, &energy_checks(), &spec).unwrap();
    assert_eq!(r.hard_fails(), 0, "{:#?}", r.records);
    let bound = r.records.iter().find(|v| v.name == "gradient_bound.s=0.9").unwrap();
    assert_eq!(bound.verdict, Verdict::Pass);
}

#[test]
fn sandwich_holds_in_one_dimension() {
    let ng = HomogeneousGauge::from_ids("r1", "euclidean").unwrap();
    let spec = QuadratureSpec::with_samples(1 << 12, 0);
    let suite = InequalitySuite {
        s_list: vec![],
        mollifier_eps: vec![],
        truncation_k: vec![],
        translations: 0,
        ..Default::default()
    };
    let u = bump(&ng, 1.0).unwrap();
    let r = run_suite(&u, &OrliczFunction::power_log(2.0).unwrap(), &ng, &suite, &spec).unwrap();
    let sandwich: Vec<_> = r.records.iter().filter(|v| v.name.starts_with("sandwich")).collect();
    assert_eq!(sandwich.len(), 6);
    for v in sandwich {
        assert_ne!(v.verdict, Verdict::Fail, "{v:?}");
    }
}
