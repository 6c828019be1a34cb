use proptest::prelude::*;
use subfrac_core::functionals::bump;
use subfrac_core::group::AxiomStatus;
use subfrac_core::quadrature::{
    ball_volume, radial_integral, region_integral, sphere_integral, Region,
};
use subfrac_core::*;

const GROUPS: [(&str, &str); 4] = [
    ("r1", "euclidean"),
    ("r2", "euclidean"),
    ("r3", "euclidean"),
    ("h1", "koranyi"),
];

fn gauge(g: &str, k: &str) -> HomogeneousGauge {
    HomogeneousGauge::from_ids(g, k).unwrap()
}

fn spec(samples: usize, seed: u64) -> QuadratureSpec {
    QuadratureSpec::with_samples(samples, seed)
}

fn within(v: IntegralValue, target: f64, target_se: f64) -> bool {
    (v.value - target).abs() <= 3.0 * v.stderr.hypot(target_se) + 1e-12 * target.abs()
}

#[test]
fn norm_axioms_on_many_samples() {
    for (g, k) in GROUPS {
        let (validated, report) = gauge(g, k).validate_axioms(100_000, 17);
        assert!(report.all_hold(), "{g}: {report:?}");
        assert!(report.max_triangle_violation <= 1e-12, "{g}: {report:?}");
        assert_eq!(validated.flags().triangle, AxiomStatus::EmpiricallyValidated);
    }
}

#[test]
fn heisenberg_inverse_is_negation() {
    let g = CarnotGroup::heisenberg();
    let x = g.point(&[1.5, -2.25, 7.0]).unwrap();
    let xi = g.invert(&x).unwrap();
    assert_eq!(xi.coords(), &[-1.5, 2.25, -7.0]);
    assert_eq!(g.compose(&x, &xi).unwrap(), g.identity());
    assert_eq!(g.compose(&xi, &x).unwrap(), g.identity());
}

#[test]
fn ball_volume_scales_with_q() {
    for (g, k) in GROUPS {
        let ng = gauge(g, k);
        let cb = ball_volume(&ng);
        let q = ng.group().homogeneous_dim() as i32;
        for r in [0.5, 1.0, 2.0] {
            let v = region_integral(|_| 1.0, &ng, &Region::Ball { radius: r }, &spec(1 << 18, 3)).unwrap();
            let target = r.powi(q) * cb.value;
            assert!(within(v, target, r.powi(q) * cb.stderr), "{g} r={r}: {v:?} vs {target}");
        }
    }
}

#[test]
fn sphere_measure_is_q_times_ball() {
    for (g, k) in GROUPS {
        let ng = gauge(g, k);
        let cb = ball_volume(&ng);
        let q = ng.group().homogeneous_dim() as f64;
        let v = sphere_integral(|_| 1.0, &ng, &spec(1 << 18, 5)).unwrap();
        assert!(within(v, q * cb.value, q * cb.stderr), "{g}: {v:?} vs {}", q * cb.value);
    }
}

#[test]
fn haar_measure_is_left_invariant() {
    let ng = gauge("h1", "koranyi");
    let g = ng.group();
    let f = bump(&ng, 1.0).unwrap();
    let y = g.point(&[0.7, -0.4, 1.3]).unwrap();
    let direct = region_integral(|x| f.eval(x), &ng, &Region::Ball { radius: 1.0 }, &spec(1 << 18, 1)).unwrap();
    // the support of x ↦ f(y·x) is y⁻¹·B(0,1), inside this box
    let shifted = Region::Box {
        lower: vec![-2.0, -2.0, -4.0],
        upper: vec![2.0, 2.0, 4.0],
    };
    let moved = region_integral(
        |x| f.eval(&g.compose(&y, x).unwrap()),
        &ng,
        &shifted,
        &spec(1 << 20, 2),
    )
    .unwrap();
    assert!(within(moved, direct.value, direct.stderr), "{moved:?} vs {direct:?}");
}

#[test]
fn haar_measure_scales_under_dilation() {
    for (g, k) in [("r2", "euclidean"), ("h1", "koranyi")] {
        let ng = gauge(g, k);
        let grp = ng.group();
        let f = bump(&ng, 1.0).unwrap();
        let q = grp.homogeneous_dim() as i32;
        let base = region_integral(|x| f.eval(x), &ng, &Region::Ball { radius: 1.0 }, &spec(1 << 18, 4)).unwrap();
        for lambda in [0.5, 2.0] {
            let v = region_integral(
                |x| f.eval(&grp.dilate(lambda, x).unwrap()),
                &ng,
                &Region::Ball { radius: 1.0 / lambda },
                &spec(1 << 18, 6),
            )
            .unwrap();
            let target = lambda.powi(-q) * base.value;
            assert!(
                within(v, target, lambda.powi(-q) * base.stderr),
                "{g} λ={lambda}: {v:?} vs {target}"
            );
        }
    }
}

#[test]
fn radial_and_direct_integrals_agree() {
    for (g, k) in GROUPS {
        let ng = gauge(g, k);
        let profile = |r: f64| (-r * r).exp() * (1.0 - r).max(0.0);
        let radial = radial_integral(profile, 0.0, 1.0, &ng, None).unwrap();
        let direct = region_integral(
            |x| profile(ng.eval(x).unwrap()),
            &ng,
            &Region::Ball { radius: 1.0 },
            &spec(1 << 18, 8),
        )
        .unwrap();
        assert!(within(direct, radial.value, radial.stderr), "{g}: {direct:?} vs {radial:?}");
    }
}

#[test]
fn quadrature_ignores_worker_count() {
    let ng = gauge("h1", "koranyi");
    let f = bump(&ng, 1.0).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                region_integral(|x| f.eval(x), &ng, &Region::Ball { radius: 1.0 }, &spec(1 << 14, 9))
                    .unwrap()
            })
    };
    let one = run(1);
    for t in [4, 8] {
        let other = run(t);
        assert_eq!(one.value.to_bits(), other.value.to_bits());
        assert_eq!(one.stderr.to_bits(), other.stderr.to_bits());
    }
}

fn coords() -> impl Strategy<Value = [f64; 3]> {
    [-10.0..10.0f64, -10.0..10.0f64, -10.0..10.0f64]
}

proptest! {
    #[test]
    fn group_laws(a in coords(), b in coords(), c in coords(), lambda in 0.01..100.0f64) {
        let g = CarnotGroup::heisenberg();
        let (x, y, z) = (g.point(&a).unwrap(), g.point(&b).unwrap(), g.point(&c).unwrap());
        let lhs = g.compose(&g.compose(&x, &y).unwrap(), &z).unwrap();
        let rhs = g.compose(&x, &g.compose(&y, &z).unwrap()).unwrap();
        prop_assert!(lhs.max_deviation(&rhs) <= 1e-12);
        let e = g.compose(&x, &g.invert(&x).unwrap()).unwrap();
        prop_assert_eq!(e, g.identity());
        let dl = g.dilate(lambda, &g.compose(&x, &y).unwrap()).unwrap();
        let dr = g.compose(&g.dilate(lambda, &x).unwrap(), &g.dilate(lambda, &y).unwrap()).unwrap();
        let scale = dl.coords().iter().fold(1.0f64, |m, v| m.max(v.abs()));
        prop_assert!(dl.max_deviation(&dr) <= 1e-12 * scale);
    }

    #[test]
    fn koranyi_gauge_axioms(a in coords(), b in coords(), lambda in 0.01..100.0f64, theta in 0.0..std::f64::consts::TAU) {
        let ng = gauge("h1", "koranyi");
        let g = ng.group();
        let (x, y) = (g.point(&a).unwrap(), g.point(&b).unwrap());
        let (gx, gy) = (ng.eval(&x).unwrap(), ng.eval(&y).unwrap());
        prop_assert!((ng.eval(&g.invert(&x).unwrap()).unwrap() - gx).abs() <= 1e-12 * gx.max(1.0));
        let dx = ng.eval(&g.dilate(lambda, &x).unwrap()).unwrap();
        prop_assert!((dx - lambda * gx).abs() <= 1e-12 * (lambda * gx).max(1.0));
        let xy = ng.eval(&g.compose(&x, &y).unwrap()).unwrap();
        prop_assert!(xy <= (gx + gy) * (1.0 + 1e-12));
        let r = g.horizontal_rotate(&HorizontalRotation::planar(theta), &x).unwrap();
        prop_assert!((ng.eval(&r).unwrap() - gx).abs() <= 1e-12 * gx.max(1.0));
    }
}
