use serde::Serialize;

use super::fields::{scaled, Field, Smoothness};
use crate::error::{invalid, Error, Result};
use crate::group::{GroupPoint, HomogeneousGauge, MAX_DIM};
use crate::orlicz::OrliczFunction;
use crate::quadrature::{
    ball_volume, qmc_integrate, region_integral, Breakdown, IntegralValue, QuadratureSpec,
    Region, SphereSampler,
};

/// Default finite-difference step for horizontal gradients.
pub const DEFAULT_STEP: f64 = 1e-4;

/// Below this fraction of the support radius, smooth-field increments are
/// evaluated at the floor radius and rescaled, which keeps the difference
/// quotient well conditioned when the graded radius underflows.
const SMOOTH_RADIUS_FLOOR: f64 = 1e-7;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct EnergyBreakdown {
    pub total: f64,
    pub near_field: f64,
    pub far_field: f64,
    pub tail_analytic: f64,
    pub stderr: f64,
}

impl EnergyBreakdown {
    fn zero() -> Self {
        Self::default()
    }

    pub fn as_integral(&self) -> IntegralValue {
        IntegralValue {
            value: self.total,
            stderr: self.stderr,
            breakdown: Some(Breakdown {
                near_field: self.near_field,
                far_field: self.far_field,
                tail_analytic: self.tail_analytic,
            }),
        }
    }
}

fn finite_support(u: &Field) -> Result<f64> {
    let r = u.support_radius();
    if r.is_finite() {
        Ok(r)
    } else {
        Err(Error::Divergent(format!(
            "field {} has unbounded support",
            u.name()
        )))
    }
}

/// `Φ_φ(u) = ∫ φ(|u|)`.
pub fn phi_energy(
    u: &Field,
    phi: &OrliczFunction,
    ng: &HomogeneousGauge,
    spec: &QuadratureSpec,
) -> Result<IntegralValue> {
    let r = finite_support(u)?;
    if r == 0.0 {
        return Ok(IntegralValue::exact(0.0));
    }
    region_integral(|x| phi.phi(u.eval(x).abs()), ng, &Region::Ball { radius: r }, spec)
}

/// Knobs of the fractional energy beyond the quadrature spec.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GagliardoOptions {
    /// `R_split / R_u`; at least 2 so that the tail identity is exact.
    pub split_factor: f64,
    /// Integrate over `h⁻¹` instead of `h`, i.e. exchange the roles of `x` and `y`.
    pub exchange: bool,
}

impl Default for GagliardoOptions {
    fn default() -> Self {
        GagliardoOptions {
            split_factor: 2.0,
            exchange: false,
        }
    }
}

/// `Φ_{s,φ}(u) = ∬ φ(|u(x) − u(y)| / ‖y⁻¹x‖^s) ‖y⁻¹x‖^{−Q} dx dy`.
pub fn gagliardo_energy(
    u: &Field,
    phi: &OrliczFunction,
    s: f64,
    ng: &HomogeneousGauge,
    spec: &QuadratureSpec,
) -> Result<EnergyBreakdown> {
    gagliardo_energy_with(u, phi, s, ng, spec, &GagliardoOptions::default())
}

/// Computes the fractional energy with `h = y⁻¹x` in polar coordinates
/// `h = δ_r z`. Only pairs with `x` in the support ball `S` contribute:
///
/// `Φ = ∫_{x∈S} ∫_S ∫_0^∞ [φ(|u(xδ_r z) − u(x)|/r^s) + 1{xδ_r z ∉ S} φ(|u(x)|/r^s)] dr/r dσ(z) dx`.
///
/// For `r ≥ R_split` the bracket is `2φ(|u(x)|/r^s)` and its `r`-integral is
/// `(2/s)Ψ(|u(x)| R_split^{−s})`. On `[R_u, R_split]` the radius is sampled
/// log-uniformly. On `(0, R_u]` the substitution `r = R_u w^{1/α}` absorbs the
/// kernel singularity, with `α = p⁻(1−s)` for Lipschitz fields and
/// `α = 1 − s p⁺` for jump fields; `spec.annuli` dyadic strata in `w` share
/// the samples equally. A positive `spec.r_min` instead cuts the near field at
/// `r_min` and adds a (φ1) bound on the discarded part to the error.
pub fn gagliardo_energy_with(
    u: &Field,
    phi: &OrliczFunction,
    s: f64,
    ng: &HomogeneousGauge,
    spec: &QuadratureSpec,
    opts: &GagliardoOptions,
) -> Result<EnergyBreakdown> {
    if !(s > 0.0 && s < 1.0) {
        return Err(invalid("s", format!("must lie in (0,1), got {s}")));
    }
    if !(opts.split_factor >= 2.0 && opts.split_factor.is_finite()) {
        return Err(invalid("split_factor", "must be at least 2"));
    }
    spec.validate()?;
    if u.variation_radius() == 0.0 {
        return Ok(EnergyBreakdown::zero());
    }
    let big_r = finite_support(u)?;
    let smooth = u.smoothness() != Smoothness::Measurable;
    let alpha = if smooth {
        phi.p_minus() * (1.0 - s)
    } else {
        1.0 - s * phi.p_plus()
    };
    if alpha <= 0.0 {
        return Err(Error::Divergent(format!(
            "jump field with s·p⁺ = {} ≥ 1 has infinite fractional energy",
            s * phi.p_plus()
        )));
    }
    let r_min = spec.r_min;
    if r_min > 0.0 && (!smooth || r_min >= big_r) {
        return Err(invalid(
            "r_min",
            "a positive cutoff needs a Lipschitz field and r_min < support radius",
        ));
    }

    let g = *ng.group();
    let n = g.dim();
    let q = g.homogeneous_dim() as f64;
    let cb = ball_volume(ng);
    let qcb = q * cb.value;
    let half = ng.ball_halfwidths(big_r);
    let vol_x: f64 = (0..n).map(|j| 2.0 * half[j]).product();
    let sampler = SphereSampler::new(ng);
    let split = opts.split_factor;
    let r_split = split * big_r;
    let ln_split = split.ln();
    let strata = spec.annuli;
    let floor = SMOOTH_RADIUS_FLOOR * big_r;
    let r_pow = big_r.powf(1.0 - s);
    let ln_cut = if r_min > 0.0 { (big_r / r_min).ln() } else { 0.0 };
    let exchange = opts.exchange;

    // bracket term at radius r; for smooth fields the increments are taken at
    // max(r, floor) and `rho = r^{1−s}` carries the exact scaling
    let bracket = |x: &GroupPoint, ux: f64, z: &GroupPoint, r: f64, rho: f64| -> f64 {
        if smooth {
            let re = r.max(floor);
            let y = g.mul(x, &g.dil(re, z));
            let dq = (u.eval(&y) - ux).abs() / re;
            let mut v = phi.phi(dq * rho);
            if ux != 0.0 && ng.norm(&y) > big_r {
                v += phi.phi(ux.abs() / re * rho);
            }
            v
        } else {
            if r == 0.0 {
                return 0.0;
            }
            let y = g.mul(x, &g.dil(r, z));
            let d = (u.eval(&y) - ux).abs();
            let rs = r.powf(-s);
            let mut v = if d == 0.0 { 0.0 } else { phi.phi(d * rs) };
            if ux != 0.0 && ng.norm(&y) > big_r {
                v += phi.phi(ux.abs() * rs);
            }
            v
        }
    };

    let est = qmc_integrate(2 * n + 1, spec, "fractional energy integrand", |p| {
        let mut c = [0.0; MAX_DIM];
        for j in 0..n {
            c[j] = (2.0 * p[j] - 1.0) * half[j];
        }
        let x = GroupPoint::from_array(c, n);
        if ng.norm(&x) > big_r {
            return [0.0; 3];
        }
        let ux = u.eval(&x);
        let tail = if ux == 0.0 {
            0.0
        } else {
            vol_x * qcb * 2.0 / s * phi.psi(ux.abs() * r_split.powf(-s))
        };
        let Some((z, wz)) = sampler.sample(&p[n..2 * n]) else {
            return [0.0, 0.0, tail];
        };
        let z = if exchange { g.inv(&z) } else { z };
        let w_raw = p[2 * n];
        let weight = vol_x * wz;

        let near = if r_min > 0.0 {
            let r = r_min * (big_r / r_min).powf(w_raw);
            let v = bracket(&x, ux, &z, r, r.powf(1.0 - s));
            weight * ln_cut * v
        } else {
            let k = ((w_raw * strata as f64) as usize).min(strata - 1);
            let t = w_raw * strata as f64 - k as f64;
            let hi = 0.5f64.powi(k as i32);
            let lo = if k + 1 == strata { 0.0 } else { 0.5 * hi };
            let w = lo + t * (hi - lo);
            let jac = strata as f64 * (hi - lo) / (alpha * w);
            let r = big_r * w.powf(1.0 / alpha);
            let rho = if smooth {
                r_pow * w.powf(1.0 / phi.p_minus())
            } else {
                0.0
            };
            let v = bracket(&x, ux, &z, r, rho);
            weight * jac * v
        };

        let r = big_r * split.powf(w_raw);
        let v = bracket(&x, ux, &z, r, r.powf(1.0 - s));
        let far = weight * ln_split * v;
        [near, far, tail]
    })?;

    let [near, far, tail] = est.mean;
    let mut stderr = est.total_stderr.hypot(tail * cb.stderr / cb.value);
    if r_min > 0.0 {
        stderr += cutoff_remainder(u, phi, s, ng, spec, r_min)?;
    }
    Ok(EnergyBreakdown {
        total: near + far + tail,
        near_field: near,
        far_field: far,
        tail_analytic: tail,
        stderr,
    })
}

/// Bound on the part of the energy with `r < r_min` for a Lipschitz field:
/// both bracket terms are at most `φ(L r^{1−s}) ≤ φ(L) r^{(1−s)p⁻}` once
/// `r_min ≤ 1`, so the remainder is at most
/// `2 |B(0,R_u)| QC_b φ(L) r_min^{(1−s)p⁻}/((1−s)p⁻)`.
/// `L` is the largest horizontal gradient norm found on a sample grid, inflated by 10%.
fn cutoff_remainder(
    u: &Field,
    phi: &OrliczFunction,
    s: f64,
    ng: &HomogeneousGauge,
    spec: &QuadratureSpec,
    r_min: f64,
) -> Result<f64> {
    let big_r = u.support_radius();
    let g = ng.group();
    let q = g.homogeneous_dim() as f64;
    let cb = ball_volume(ng).value;
    let probe = QuadratureSpec::with_samples(1 << 14, spec.seed);
    let mut lip = 0.0f64;
    let n = g.dim();
    let half = ng.ball_halfwidths(big_r);
    for pt in crate::quadrature::sobol_net(n, probe.samples, probe.seed) {
        let mut c = [0.0; MAX_DIM];
        for j in 0..n {
            c[j] = (2.0 * pt[j] - 1.0) * half[j];
        }
        let x = GroupPoint::from_array(c, n);
        let grad = horizontal_gradient(u, ng, &x, DEFAULT_STEP);
        lip = lip.max(grad.iter().map(|v| v * v).sum::<f64>().sqrt());
    }
    let lip = 1.1 * lip;
    let e = (1.0 - s) * phi.p_minus();
    let scale = if r_min <= 1.0 {
        r_min.powf(e) / e
    } else {
        // (φ1) with the p⁺ exponent above radius 1
        let e_plus = (1.0 - s) * phi.p_plus();
        1.0 / e + (r_min.powf(e_plus) - 1.0) / e_plus
    };
    Ok(2.0 * cb * big_r.powf(q) * q * cb * phi.phi(lip) * scale)
}

/// Central differences along the horizontal directions: component `j` is
/// `[u(x·ε_j(step)) − u(x·ε_j(−step))]/(2 step)`.
pub fn horizontal_gradient(
    u: &Field,
    ng: &HomogeneousGauge,
    x: &GroupPoint,
    step: f64,
) -> Vec<f64> {
    let g = ng.group();
    (0..g.horizontal_dim())
        .map(|j| {
            let fwd = u.eval(&g.mul(x, &g.horizontal_unit(j, step)));
            let bwd = u.eval(&g.mul(x, &g.horizontal_unit(j, -step)));
            (fwd - bwd) / (2.0 * step)
        })
        .collect()
}

/// `Φ_φ(‖∇_G u‖)` with finite-difference gradients.
pub fn local_energy(
    u: &Field,
    phi: &OrliczFunction,
    ng: &HomogeneousGauge,
    spec: &QuadratureSpec,
    step: f64,
) -> Result<IntegralValue> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(invalid("step", format!("must be positive, got {step}")));
    }
    let r = u.variation_radius();
    if r == 0.0 {
        return Ok(IntegralValue::exact(0.0));
    }
    if !r.is_finite() {
        return Err(Error::Divergent(format!(
            "field {} varies on an unbounded set",
            u.name()
        )));
    }
    region_integral(
        |x| {
            let grad = horizontal_gradient(u, ng, x, step);
            phi.phi(grad.iter().map(|v| v * v).sum::<f64>().sqrt())
        },
        ng,
        &Region::Ball { radius: r + step },
        spec,
    )
}

/// `Φ_φ(τ_h u − u)` with `τ_h u(x) = u(x·h)`.
pub fn translation_gap(
    u: &Field,
    phi: &OrliczFunction,
    h: &GroupPoint,
    ng: &HomogeneousGauge,
    spec: &QuadratureSpec,
) -> Result<IntegralValue> {
    let hn = ng.eval(h)?;
    if hn == 0.0 || u.variation_radius() == 0.0 {
        return Ok(IntegralValue::exact(0.0));
    }
    let r = finite_support(u)?;
    let g = ng.group();
    region_integral(
        |x| phi.phi((u.eval(&g.mul(x, h)) - u.eval(x)).abs()),
        ng,
        &Region::Ball { radius: r + hn },
        spec,
    )
}

/// Result of the Luxemburg bisection.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LuxemburgNorm {
    pub value: f64,
    /// The modular at `u / value`, ideally 1.
    pub modular: f64,
    pub evaluations: usize,
}

const MAX_DOUBLINGS: usize = 60;

/// `inf{λ > 0 : modular(u/λ) ≤ 1}` where the modular is `Φ_φ` or, when
/// `seminorm_s` is given, `Φ_{s,φ}`. Every evaluation reuses the same
/// quadrature nodes, so the estimated modular is monotone in `λ`.
pub fn luxemburg_norm(
    u: &Field,
    phi: &OrliczFunction,
    ng: &HomogeneousGauge,
    spec: &QuadratureSpec,
    seminorm_s: Option<f64>,
) -> Result<LuxemburgNorm> {
    let mut evaluations = 0;
    let mut modular = |lambda: f64| -> Result<f64> {
        evaluations += 1;
        let v = scaled(u, 1.0 / lambda);
        Ok(match seminorm_s {
            Some(s) => gagliardo_energy(&v, phi, s, ng, spec)?.total,
            None => phi_energy(&v, phi, ng, spec)?.value,
        })
    };
    let m1 = modular(1.0)?;
    if m1 == 0.0 {
        return Ok(LuxemburgNorm {
            value: 0.0,
            modular: 0.0,
            evaluations: 1,
        });
    }
    let (mut lo, mut hi) = (1.0, 1.0);
    if m1 > 1.0 {
        let mut k = 0;
        loop {
            hi *= 2.0;
            k += 1;
            if modular(hi)? <= 1.0 {
                break;
            }
            if k >= MAX_DOUBLINGS {
                return Err(Error::Divergent(
                    "modular stays above 1 after 60 doublings".into(),
                ));
            }
            lo = hi;
        }
    } else {
        let mut k = 0;
        loop {
            lo *= 0.5;
            k += 1;
            if modular(lo)? > 1.0 {
                break;
            }
            if k >= MAX_DOUBLINGS {
                return Err(Error::NonConvergent(
                    "modular stays below 1 after 60 halvings".into(),
                ));
            }
            hi = lo;
        }
    }
    // invariant: modular(lo) > 1 ≥ modular(hi)
    while hi - lo > 1e-14 * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if modular(mid)? > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let m = modular(hi)?;
    Ok(LuxemburgNorm {
        value: hi,
        modular: m,
        evaluations,
    })
}
