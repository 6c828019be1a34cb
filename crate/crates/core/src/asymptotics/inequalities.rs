use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::sweep::{gradient_bound, TargetValue};
use super::verdict::VerdictRecord;
use crate::error::Result;
use crate::functionals::{
    gagliardo_energy, local_energy, mollify, phi_energy, translation_gap, truncate, Field,
    DEFAULT_STEP,
};
use crate::group::HomogeneousGauge;
use crate::orlicz::{phi_tilde, OrliczFunction, PhiTildeArgument, PHI_TILDE_S_GRID};
use crate::quadrature::{ball_volume, QuadratureSpec};

const SANDWICH_SAMPLES: usize = 1 << 15;

/// Which checks to run and at which parameters.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InequalitySuite {
    /// Fractional orders for the gradient bound.
    pub s_list: Vec<f64>,
    /// Fractional order used by the mollification, truncation and translation checks.
    pub s_fixed: f64,
    pub mollifier_eps: Vec<f64>,
    pub truncation_k: Vec<u32>,
    pub translations: usize,
    pub sandwich_t: Vec<f64>,
    pub pair_samples: usize,
    pub seed: u64,
}

impl Default for InequalitySuite {
    fn default() -> Self {
        InequalitySuite {
            s_list: vec![0.3, 0.5, 0.7, 0.9],
            s_fixed: 0.5,
            mollifier_eps: vec![0.5, 0.25],
            truncation_k: vec![2, 4],
            translations: 20,
            sandwich_t: vec![0.5, 1.0, 2.0],
            pair_samples: 10_000,
            seed: 0x1e9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InequalityReport {
    pub records: Vec<VerdictRecord>,
}

impl InequalityReport {
    pub fn hard_fails(&self) -> usize {
        self.records.iter().filter(|r| r.is_hard_fail()).count()
    }
}

/// Runs the inequality suite with default parameters at the given `s` values.
pub fn verify_inequalities(
    u: &Field,
    phi: &OrliczFunction,
    ng: &HomogeneousGauge,
    s_list: &[f64],
    spec: &QuadratureSpec,
) -> Result<InequalityReport> {
    let suite = InequalitySuite {
        s_list: s_list.to_vec(),
        ..Default::default()
    };
    run_suite(u, phi, ng, &suite, spec)
}

pub fn run_suite(
    u: &Field,
    phi: &OrliczFunction,
    ng: &HomogeneousGauge,
    suite: &InequalitySuite,
    spec: &QuadratureSpec,
) -> Result<InequalityReport> {
    let mut records = Vec::new();
    let g = ng.group();
    let q = g.homogeneous_dim() as f64;
    let cb = ball_volume(ng);
    let qcb = TargetValue {
        value: q * cb.value,
        stderr: q * cb.stderr,
    };
    let (pm, pp, c) = (phi.p_minus(), phi.p_plus(), phi.delta2());

    let energy: TargetValue = phi_energy(u, phi, ng, spec)?.into();
    let grad: TargetValue = local_energy(u, phi, ng, spec, DEFAULT_STEP)?.into();
    for &s in &suite.s_list {
        let e = gagliardo_energy(u, phi, s, ng, spec)?;
        let bound = gradient_bound(phi, s, qcb, grad, energy);
        records.push(VerdictRecord::leq(
            format!("gradient_bound.s={s}"),
            "Φ_s(u) ≤ (QC_b/p⁻)[Φ_φ(‖∇u‖)/(1−s) + 𝐂Φ_φ(u)/s]",
            (e.total, e.stderr),
            (bound.value, bound.stderr),
        ));
    }

    let s = suite.s_fixed;
    let base = gagliardo_energy(u, phi, s, ng, spec)?;
    for &eps in &suite.mollifier_eps {
        let ue = mollify(u, eps, ng)?;
        // same seed: the estimates share nodes and their errors largely cancel
        let e = gagliardo_energy(&ue, phi, s, ng, spec)?;
        records.push(VerdictRecord::leq(
            format!("mollification.eps={eps}"),
            "Φ_s(ρ_ε * u) ≤ Φ_s(u)",
            (e.total, e.stderr),
            (base.total, base.stderr),
        ));
    }

    for &k in &suite.truncation_k {
        let uk = truncate(u, k, ng)?;
        let e = gagliardo_energy(&uk, phi, s, ng, spec)?;
        let kf = k as f64;
        let a = (2.0 / kf).powf(pm) * qcb.value / ((1.0 - s) * pp);
        let b = 2f64.powf(pp) * qcb.value / (s * pm);
        let rhs = c / 2.0 * (base.total + (a + b) * energy.value);
        let rhs_se = c / 2.0
            * (base.stderr.hypot((a + b) * energy.stderr))
                .hypot((a + b) * energy.value * qcb.stderr / qcb.value);
        records.push(VerdictRecord::leq(
            format!("truncation.k={k}"),
            "Φ_s(η_k u) ≤ (𝐂/2)[Φ_s(u) + ((2/k)^{p⁻}QC_b/((1−s)p⁺) + 2^{p⁺}QC_b/(sp⁻))Φ_φ(u)]",
            (e.total, e.stderr),
            (rhs, rhs_se),
        ));
    }

    // translation estimate with M = (𝐂/(2C_b))(2^{sp⁻+Q} + 1)
    let big_m = c / (2.0 * cb.value) * (2f64.powf(s * pm + q) + 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(suite.seed);
    let half = ng.unit_ball_halfwidths();
    let mut done = 0;
    while done < suite.translations {
        let coords: Vec<f64> = (0..g.dim())
            .map(|j| rng.random_range(-0.5..0.5) * half[j])
            .collect();
        let h = g.point(&coords)?;
        let hn = ng.eval(&h)?;
        if hn == 0.0 || hn >= 0.5 {
            continue;
        }
        done += 1;
        let gap = translation_gap(u, phi, &h, ng, spec)?;
        let factor = big_m * hn.powf(s * pm);
        records.push(VerdictRecord::leq(
            format!("translation.{done}"),
            "Φ_φ(τ_h u − u) ≤ M‖h‖^{sp⁻}Φ_s(u)",
            (gap.value, gap.stderr),
            (factor * base.total, factor * base.stderr),
        ));
    }

    // the sandwich uses the norm form of φ̃, as in its definition; the sphere
    // integrand is smooth, so a smaller node set suffices for the sweep
    let sphere_spec = QuadratureSpec {
        samples: spec.samples.min(SANDWICH_SAMPLES),
        ..spec.clone()
    };
    for &t in &suite.sandwich_t {
        let tilde = phi_tilde(phi, ng, &PhiTildeArgument::Norm(t), &PHI_TILDE_S_GRID, &sphere_spec)?;
        let f = phi.phi(t);
        let lo = qcb.value / pp * f;
        let hi = qcb.value / pm * f;
        let err = tilde.stderr.hypot(tilde.residual);
        records.push(VerdictRecord::leq(
            format!("sandwich.lower.t={t}"),
            "(QC_b/p⁺)φ(t) ≤ φ̃(t)",
            (lo, qcb.stderr / pp * f),
            (tilde.value, err),
        ));
        records.push(VerdictRecord::leq(
            format!("sandwich.upper.t={t}"),
            "φ̃(t) ≤ (QC_b/p⁻)φ(t)",
            (tilde.value, err),
            (hi, qcb.stderr / pm * f),
        ));
    }

    let d = phi.check_doubling_properties(suite.pair_samples, suite.seed);
    records.push(VerdictRecord::leq(
        "phi1",
        "max relative violation of (φ1)",
        (d.max_phi1_violation, 0.0),
        (1e-12, 0.0),
    ));
    records.push(VerdictRecord::leq(
        "phi2",
        "max relative violation of (φ2)",
        (d.max_phi2_violation, 0.0),
        (1e-12, 0.0),
    ));
    records.push(VerdictRecord::leq("delta2.lower", "2 ≤ 𝐂", (2.0, 0.0), (c, 0.0)));
    records.push(VerdictRecord::leq(
        "delta2.upper",
        "𝐂 ≤ 2^{p⁺}",
        (c, 0.0),
        (2f64.powf(pp), 0.0),
    ));

    Ok(InequalityReport { records })
}
