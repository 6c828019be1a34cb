use super::inequalities::InequalityReport;
use super::verdict::VerdictRecord;
use crate::error::Result;
use crate::functionals::bump;
use crate::group::{HomogeneousGauge, AXIOM_TOLERANCE};
use crate::quadrature::{
    ball_volume, radial_integral, region_integral, sphere_integral, QuadratureSpec, Region,
};

const SHIFT: [f64; 3] = [0.7, -0.4, 1.3];

/// Norm axioms, group laws and Haar-measure identities as verdict records.
///
/// Axioms are sampled `axiom_samples` times with `spec.seed`; the measure
/// identities use `spec` for every integral.
pub fn geometry_suite(
    ng: &HomogeneousGauge,
    axiom_samples: usize,
    spec: &QuadratureSpec,
) -> Result<InequalityReport> {
    let g = ng.group();
    let (_, ax) = ng.validate_axioms(axiom_samples, spec.seed);
    let mut records = Vec::new();
    let mut defect = |name: &str, v: f64| {
        records.push(VerdictRecord::leq(
            format!("axioms.{name}"),
            "max sampled defect ≤ 1e-12",
            (v, 0.0),
            (AXIOM_TOLERANCE, 0.0),
        ));
    };
    defect("identity", ax.max_identity_defect);
    defect("symmetry", ax.max_symmetry_defect);
    defect("homogeneity", ax.max_homogeneity_defect);
    defect("triangle", ax.max_triangle_violation);
    if g.horizontal_dim() >= 2 {
        defect("rotation", ax.max_rotation_defect);
    }
    defect("associativity", ax.max_associativity_defect);
    defect("inverse", ax.max_inverse_defect);
    defect("dilation_automorphism", ax.max_automorphism_defect);

    let cb = ball_volume(ng);
    let q = g.homogeneous_dim() as i32;
    for r in [0.5, 1.0, 2.0] {
        let v = region_integral(|_| 1.0, ng, &Region::Ball { radius: r }, spec)?;
        let k = r.powi(q);
        records.push(VerdictRecord::agrees(
            format!("ball.r={r}"),
            (v.value, v.stderr),
            (k * cb.value, k * cb.stderr),
        ));
    }

    let sphere = sphere_integral(|_| 1.0, ng, spec)?;
    records.push(VerdictRecord::agrees(
        "sphere.measure",
        (sphere.value, sphere.stderr),
        (q as f64 * cb.value, q as f64 * cb.stderr),
    ));

    let profile = |r: f64| (-r * r).exp() * (1.0 - r).max(0.0);
    let radial = radial_integral(profile, 0.0, 1.0, ng, None)?;
    let unit = Region::Ball { radius: 1.0 };
    let direct = region_integral(|x| profile(ng.norm(x)), ng, &unit, spec)?;
    records.push(VerdictRecord::agrees(
        "radial.cross_check",
        (direct.value, direct.stderr),
        (radial.value, radial.stderr),
    ));

    let f = bump(ng, 1.0)?;
    let base = region_integral(|x| f.eval(x), ng, &unit, spec)?;
    let y = g.point(&SHIFT[..g.dim()])?;
    // x ↦ f(y·x) lives on y⁻¹·B(0,1) ⊂ B(0, 1 + ‖y‖)
    let reach = Region::Ball {
        radius: 1.0 + ng.norm(&y),
    };
    let moved = region_integral(|x| f.eval(&g.mul(&y, x)), ng, &reach, spec)?;
    records.push(VerdictRecord::agrees(
        "haar.left_invariance",
        (moved.value, moved.stderr),
        (base.value, base.stderr),
    ));
    for lambda in [0.5, 2.0] {
        let v = region_integral(
            |x| f.eval(&g.dil(lambda, x)),
            ng,
            &Region::Ball { radius: 1.0 / lambda },
            spec,
        )?;
        let k = lambda.powi(-q);
        records.push(VerdictRecord::agrees(
            format!("haar.dilation.lambda={lambda}"),
            (v.value, v.stderr),
            (k * base.value, k * base.stderr),
        ));
    }

    Ok(InequalityReport { records })
}
