use std::collections::HashMap;
use std::f64::consts::LN_2;
use std::sync::{Mutex, OnceLock};

use serde::Serialize;

use super::{integrate_1d, qmc_integrate, IntegralValue, QuadratureSpec};
use crate::error::{invalid, Error, Result};
use crate::group::{GaugeKind, GroupKind, GroupPoint, HomogeneousGauge, MAX_DIM};

pub const DEFAULT_BALL_SAMPLES: usize = 1 << 24;
pub const DEFAULT_BALL_SEED: u64 = 0x5eed_ba11;

/// Integration domains, all centred at the identity except boxes.
#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Ball { radius: f64 },
    Annulus { inner: f64, outer: f64 },
}

impl Region {
    fn sampling_box(&self, ng: &HomogeneousGauge, spec: &QuadratureSpec) -> Result<([f64; MAX_DIM], [f64; MAX_DIM])> {
        let n = ng.group().dim();
        let mut lo = [0.0; MAX_DIM];
        let mut hi = [0.0; MAX_DIM];
        match self {
            Region::Box { lower, upper } => {
                if lower.len() != n || upper.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: lower.len().min(upper.len()),
                    });
                }
                for j in 0..n {
                    if !(lower[j].is_finite() && upper[j].is_finite()) {
                        return Err(invalid("region", "unbounded box"));
                    }
                    if lower[j] > upper[j] {
                        return Err(invalid("region", "box has lower > upper"));
                    }
                    lo[j] = lower[j];
                    hi[j] = upper[j];
                }
            }
            Region::Ball { radius: r } | Region::Annulus { outer: r, .. } => {
                if !(r.is_finite() && *r >= 0.0) {
                    return Err(invalid("region", format!("ball radius must be finite, got {r}")));
                }
                if let Region::Annulus { inner, outer } = self {
                    if !(*inner >= 0.0 && inner <= outer) {
                        return Err(invalid("region", "annulus needs 0 ≤ inner ≤ outer"));
                    }
                }
                let w = ng.ball_halfwidths(*r);
                let w = match &spec.box_halfwidths {
                    Some(custom) => {
                        if custom.len() != n {
                            return Err(Error::DimensionMismatch {
                                expected: n,
                                found: custom.len(),
                            });
                        }
                        if custom.iter().zip(&w).any(|(c, b)| c < b) {
                            return Err(invalid("box_halfwidths", "sampling box does not contain the region"));
                        }
                        let mut c = [0.0; MAX_DIM];
                        c[..n].copy_from_slice(custom);
                        c
                    }
                    None => w,
                };
                for j in 0..n {
                    lo[j] = -w[j];
                    hi[j] = w[j];
                }
            }
        }
        Ok((lo, hi))
    }

    fn contains(&self, ng: &HomogeneousGauge, x: &GroupPoint) -> bool {
        match self {
            Region::Box { .. } => true,
            Region::Ball { radius } => ng.norm(x) <= *radius,
            Region::Annulus { inner, outer } => {
                let g = ng.norm(x);
                g >= *inner && g <= *outer
            }
        }
    }
}

/// Lebesgue integral of `f` over a region, sampled in its bounding box.
pub fn region_integral<F>(
    f: F,
    ng: &HomogeneousGauge,
    region: &Region,
    spec: &QuadratureSpec,
) -> Result<IntegralValue>
where
    F: Fn(&GroupPoint) -> f64 + Sync,
{
    let n = ng.group().dim();
    let (lo, hi) = region.sampling_box(ng, spec)?;
    let volume: f64 = (0..n).map(|j| hi[j] - lo[j]).product();
    if volume == 0.0 {
        return Ok(IntegralValue::exact(0.0));
    }
    let est = qmc_integrate(n, spec, "region integrand", |u| {
        let mut c = [0.0; MAX_DIM];
        for j in 0..n {
            c[j] = lo[j] + u[j] * (hi[j] - lo[j]);
        }
        let x = GroupPoint::from_array(c, n);
        if region.contains(ng, &x) {
            [volume * f(&x)]
        } else {
            [0.0]
        }
    })?;
    Ok(IntegralValue::new(est.mean[0], est.stderr[0]))
}

/// Measure of the unit gauge ball with the sampling parameters that produced it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BallVolume {
    pub value: f64,
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
}

type BallKey = (GroupKind, GaugeKind, usize, u64);

fn ball_cache() -> &'static Mutex<HashMap<BallKey, BallVolume>> {
    static CACHE: OnceLock<Mutex<HashMap<BallKey, BallVolume>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `C_b = |B(0,1)|` with the default sampling parameters.
pub fn ball_volume(ng: &HomogeneousGauge) -> BallVolume {
    ball_volume_with(ng, DEFAULT_BALL_SAMPLES, DEFAULT_BALL_SEED)
        .expect("default ball volume parameters are valid")
}

/// `C_b` by indicator quadrature over the bounding box, cached per
/// (group, gauge, samples, seed).
pub fn ball_volume_with(ng: &HomogeneousGauge, samples: usize, seed: u64) -> Result<BallVolume> {
    let key = (ng.group().kind(), ng.kind(), samples, seed);
    let mut cache = ball_cache().lock().unwrap_or_else(|e| e.into_inner());
    if let Some(v) = cache.get(&key) {
        return Ok(*v);
    }
    let spec = QuadratureSpec::with_samples(samples, seed);
    let v = region_integral(|_| 1.0, ng, &Region::Ball { radius: 1.0 }, &spec)?;
    let out = BallVolume {
        value: v.value,
        stderr: v.stderr,
        samples,
        seed,
    };
    cache.insert(key, out);
    Ok(out)
}

/// `Q·C_b·∫_a^b r^{Q−1} f(r) dr`, the integral of `x ↦ f(‖x‖)` over an annulus.
///
/// An infinite upper limit requires a declared decay exponent `d > Q`
/// (meaning `|f(r)| = O(r^{−d})`).
pub fn radial_integral<F>(
    f: F,
    a: f64,
    b: f64,
    ng: &HomogeneousGauge,
    decay: Option<f64>,
) -> Result<IntegralValue>
where
    F: Fn(f64) -> f64,
{
    let q = ng.group().homogeneous_dim() as i32;
    if !(a >= 0.0 && a.is_finite()) || b.is_nan() || b < a {
        return Err(invalid("interval", format!("bad radial interval [{a}, {b}]")));
    }
    if b.is_infinite() {
        match decay {
            Some(d) if d > q as f64 => {}
            Some(d) => {
                return Err(Error::Divergent(format!(
                    "profile decays like r^-{d}, needs exponent above Q = {q}"
                )))
            }
            None => {
                return Err(Error::Divergent(
                    "infinite radial interval without decay metadata".into(),
                ))
            }
        }
    }
    let cb = ball_volume(ng);
    let inner = integrate_1d(|r| r.powi(q - 1) * f(r), a, b, 1e-13)?;
    let qcb = q as f64 * cb.value;
    let rel_cb = cb.stderr / cb.value;
    Ok(IntegralValue::new(
        qcb * inner.value,
        (qcb * inner.stderr).hypot(rel_cb * qcb * inner.value),
    ))
}

/// Maps unit-cube points to weighted points of the unit gauge sphere via the
/// annulus `1 ≤ ‖a‖ ≤ 2`: `z = δ_{1/‖a‖} a` with weight `vol·‖a‖^{−Q}/ln 2`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct SphereSampler {
    ng: HomogeneousGauge,
    half: [f64; MAX_DIM],
    volume: f64,
    q: i32,
}

impl SphereSampler {
    pub fn new(ng: &HomogeneousGauge) -> Self {
        let n = ng.group().dim();
        let half = ng.ball_halfwidths(2.0);
        let volume = (0..n).map(|j| 2.0 * half[j]).product();
        SphereSampler {
            ng: *ng,
            half,
            volume,
            q: ng.group().homogeneous_dim() as i32,
        }
    }

    /// Number of unit-cube coordinates consumed per sample.
    pub fn dims(&self) -> usize {
        self.ng.group().dim()
    }

    #[inline]
    pub fn sample(&self, u: &[f64]) -> Option<(GroupPoint, f64)> {
        let n = self.dims();
        let mut c = [0.0; MAX_DIM];
        for j in 0..n {
            c[j] = (2.0 * u[j] - 1.0) * self.half[j];
        }
        let a = GroupPoint::from_array(c, n);
        let g = self.ng.norm(&a);
        if !(1.0..=2.0).contains(&g) {
            return None;
        }
        let z = self.ng.group().dil(1.0 / g, &a);
        Some((z, self.volume * g.powi(-self.q) / LN_2))
    }
}

/// `∫_S h dσ` over the unit gauge sphere, by the annulus reduction.
pub fn sphere_integral<F>(h: F, ng: &HomogeneousGauge, spec: &QuadratureSpec) -> Result<IntegralValue>
where
    F: Fn(&GroupPoint) -> f64 + Sync,
{
    let sampler = SphereSampler::new(ng);
    let est = qmc_integrate(sampler.dims(), spec, "sphere integrand", |u| match sampler.sample(u) {
        Some((z, w)) => [w * h(&z)],
        None => [0.0],
    })?;
    Ok(IntegralValue::new(est.mean[0], est.stderr[0]))
}

/// Mean value `M_f = ∫_S f dσ` of a function homogeneous of degree `−Q`.
pub fn mean_value<F>(f: F, ng: &HomogeneousGauge, spec: &QuadratureSpec) -> Result<IntegralValue>
where
    F: Fn(&GroupPoint) -> f64 + Sync,
{
    sphere_integral(f, ng, spec)
}
