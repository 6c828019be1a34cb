//! Orlicz functions (nice Young functions) normalized by `φ(1) = 1`.
//!
//! Two families ship: the powers `tᵖ` and `tᵖ·ln(1+t)/ln 2`, whose growth
//! ratio `tφ′/φ = p + t/((1+t)ln(1+t))` sweeps the open interval `(p, p+1)`.

use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::fit::linear_fit;
use crate::group::HomogeneousGauge;
use crate::quadrature::{gauss_legendre, integrate_1d, sphere_integral, QuadratureSpec};

/// Points of the log-spaced grid used to estimate growth indices.
pub const INDEX_GRID_POINTS: usize = 2048;
pub const INDEX_GRID_RANGE: (f64, f64) = (1e-6, 1e6);

/// Default abscissae of the φ̃ sweep.
pub const PHI_TILDE_S_GRID: [f64; 4] = [0.90, 0.95, 0.975, 0.99];

const PSI_SERIES_LIMIT: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OrliczFamily {
    Power,
    PowerLog,
}

impl OrliczFamily {
    pub fn id(&self) -> &'static str {
        match self {
            OrliczFamily::Power => "power",
            OrliczFamily::PowerLog => "power_log",
        }
    }
}

impl FromStr for OrliczFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "power" => Ok(OrliczFamily::Power),
            "power_log" => Ok(OrliczFamily::PowerLog),
            _ => Err(Error::UnknownIdentifier {
                kind: "orlicz family",
                id: s.to_string(),
            }),
        }
    }
}

/// Growth indices and Δ₂ constant: the values in use plus the grid estimates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GrowthIndices {
    pub p_minus: f64,
    pub p_plus: f64,
    pub delta2: f64,
    pub grid_p_minus: f64,
    pub grid_p_plus: f64,
    pub grid_delta2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OrliczFunction {
    family: OrliczFamily,
    p: f64,
    p_minus: f64,
    p_plus: f64,
    delta2: f64,
    /// Ψ(1/2), the start of the quadrature branch of [`Self::psi`].
    psi_half: f64,
}

impl OrliczFunction {
    pub fn new(family: OrliczFamily, p: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(invalid("p", format!("Orlicz exponent must be finite and > 1, got {p}")));
        }
        let (p_minus, p_plus, delta2) = match family {
            OrliczFamily::Power => (p, p, 2f64.powf(p)),
            // inf and sup of tφ′/φ are approached as t → ∞ and t → 0, where
            // φ(2t)/φ(t) also reaches its supremum 2^{p+1}
            OrliczFamily::PowerLog => (p, p + 1.0, 2f64.powf(p + 1.0)),
        };
        let mut phi = OrliczFunction {
            family,
            p,
            p_minus,
            p_plus,
            delta2,
            psi_half: 0.0,
        };
        phi.psi_half = phi.psi_series(PSI_SERIES_LIMIT);
        Ok(phi)
    }

    pub fn power(p: f64) -> Result<Self> {
        Self::new(OrliczFamily::Power, p)
    }

    pub fn power_log(p: f64) -> Result<Self> {
        Self::new(OrliczFamily::PowerLog, p)
    }

    pub fn family(&self) -> OrliczFamily {
        self.family
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn p_minus(&self) -> f64 {
        self.p_minus
    }

    pub fn p_plus(&self) -> f64 {
        self.p_plus
    }

    /// The Δ₂ constant `𝐂`.
    pub fn delta2(&self) -> f64 {
        self.delta2
    }

    pub fn is_power(&self) -> bool {
        self.family == OrliczFamily::Power
    }

    pub fn id(&self) -> String {
        format!("{}:{}", self.family.id(), self.p)
    }

    /// `φ(t)`; rejects negative arguments.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if t.is_nan() || t < 0.0 {
            return Err(invalid("t", format!("Orlicz functions take t ≥ 0, got {t}")));
        }
        Ok(self.phi(t))
    }

    #[inline]
    pub fn phi(&self, t: f64) -> f64 {
        match self.family {
            OrliczFamily::Power if self.p == 2.0 => t * t,
            OrliczFamily::Power => t.powf(self.p),
            OrliczFamily::PowerLog => {
                if t == 0.0 {
                    0.0
                } else {
                    t.powf(self.p) * t.ln_1p() / LN_2
                }
            }
        }
    }

    pub fn deriv(&self, t: f64) -> f64 {
        let p = self.p;
        match self.family {
            OrliczFamily::Power => p * t.powf(p - 1.0),
            OrliczFamily::PowerLog => {
                (p * t.powf(p - 1.0) * t.ln_1p() + t.powf(p) / (1.0 + t)) / LN_2
            }
        }
    }

    /// `min(s^{p⁻}, s^{p⁺})` and `max(s^{p⁻}, s^{p⁺})`, the factors in (φ1).
    pub fn scale_bounds(&self, s: f64) -> (f64, f64) {
        let a = s.powf(self.p_minus);
        let b = s.powf(self.p_plus);
        (a.min(b), a.max(b))
    }

    /// `φ⁻¹(y)`, exact for powers and by bisection otherwise.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        if y.is_nan() || y < 0.0 {
            return Err(invalid("y", format!("φ⁻¹ takes y ≥ 0, got {y}")));
        }
        if y == 0.0 {
            return Ok(0.0);
        }
        if y.is_infinite() {
            return Ok(f64::INFINITY);
        }
        if self.is_power() {
            return Ok(y.powf(1.0 / self.p));
        }
        // (φ1) with t = 1 brackets the root between y^{1/p⁻} and y^{1/p⁺}
        let a = y.powf(1.0 / self.p_minus);
        let b = y.powf(1.0 / self.p_plus);
        let (mut lo, mut hi) = (a.min(b), a.max(b));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.phi(mid) < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // return whichever endpoint reproduces y more closely
        Ok(if (self.phi(lo) - y).abs() <= (self.phi(hi) - y).abs() {
            lo
        } else {
            hi
        })
    }

    /// Legendre transform `φ*(s) = sup_{t>0} (st − φ(t))` by golden-section search.
    pub fn conjugate(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(invalid("s", format!("φ* takes finite s ≥ 0, got {s}")));
        }
        if s == 0.0 {
            return Ok(0.0);
        }
        let mut hi = 1.0;
        while self.deriv(hi) < s {
            hi *= 2.0;
        }
        let f = |t: f64| s * t - self.phi(t);
        let ratio = (5f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = (0.0, hi);
        let mut c = b - ratio * (b - a);
        let mut d = a + ratio * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        for _ in 0..200 {
            if fc >= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - ratio * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + ratio * (b - a);
                fd = f(d);
            }
            if b - a <= 1e-15 * b {
                break;
            }
        }
        Ok(f(0.5 * (a + b)).max(0.0))
    }

    /// `Ψ(T) = ∫₀ᵀ φ(τ)/τ dτ`.
    ///
    /// For every `c > 0`, `∫₀¹ φ(T r^c) dr/r = Ψ(T)/c`, which turns the radial
    /// integrals of the fractional energies into closed forms.
    pub fn psi(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self.family {
            OrliczFamily::Power => self.phi(t) / self.p,
            OrliczFamily::PowerLog => {
                if t <= PSI_SERIES_LIMIT {
                    self.psi_series(t)
                } else {
                    self.psi_half + self.psi_increment(PSI_SERIES_LIMIT, t)
                }
            }
        }
    }

    /// `∫_a^b φ(τ)/τ dτ` by a 10-point Gauss–Legendre rule on each dyadic piece
    /// of `[a, b]`; the nearest singularity of the integrand is at 0, a full
    /// piece length away, which keeps the rule at rounding accuracy.
    fn psi_increment(&self, a: f64, b: f64) -> f64 {
        static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
        let rule = RULE.get_or_init(|| gauss_legendre(10));
        let mut sum = 0.0;
        let mut lo = a;
        while lo < b {
            let hi = (2.0 * lo).min(b);
            let (c, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            sum += h * rule
                .iter()
                .map(|(x, w)| {
                    let t = c + h * x;
                    w * self.phi(t) / t
                })
                .sum::<f64>();
            lo = hi;
        }
        sum
    }

    /// Alternating series of `Ψ` for `power_log`, valid for `T < 1`.
    fn psi_series(&self, t: f64) -> f64 {
        if self.is_power() {
            return self.phi(t) / self.p;
        }
        let p = self.p;
        let mut sum = 0.0;
        let mut tk = t.powf(p);
        for k in 1..400 {
            tk *= t;
            let kf = k as f64;
            let term = tk / (kf * (p + kf));
            if k % 2 == 1 {
                sum += term;
            } else {
                sum -= term;
            }
            if term <= 1e-17 * sum.abs() {
                break;
            }
        }
        sum / LN_2
    }

    /// Grid estimates of `inf tφ′/φ`, `sup tφ′/φ` and `sup φ(2t)/φ(t)`.
    pub fn estimate_indices(&self) -> (f64, f64, f64) {
        let (lo, hi) = INDEX_GRID_RANGE;
        let step = (hi / lo).ln() / (INDEX_GRID_POINTS - 1) as f64;
        let mut pm = f64::INFINITY;
        let mut pp = 0.0f64;
        let mut c = 0.0f64;
        for i in 0..INDEX_GRID_POINTS {
            let t = lo * (step * i as f64).exp();
            let r = t * self.deriv(t) / self.phi(t);
            pm = pm.min(r);
            pp = pp.max(r);
            c = c.max(self.phi(2.0 * t) / self.phi(t));
        }
        (pm, pp, c)
    }

    /// Declared indices together with grid estimates, checked against (L)
    /// and the bound `2 < 𝐂 ≤ 2^{p⁺}`.
    pub fn growth_indices(&self) -> Result<GrowthIndices> {
        let (gpm, gpp, gc) = self.estimate_indices();
        let tol = 1e-9;
        if gpm <= 1.0 || gpm < self.p_minus - tol || gpp > self.p_plus + tol {
            return Err(Error::GrowthCondition(format!(
                "tφ′/φ ranges over [{gpm}, {gpp}] outside the declared [{}, {}]",
                self.p_minus, self.p_plus
            )));
        }
        let bound = 2f64.powf(self.p_plus);
        if !(self.delta2 > 2.0 && self.delta2 <= bound * (1.0 + 1e-12)) || gc > self.delta2 * (1.0 + tol) {
            return Err(Error::GrowthCondition(format!(
                "Δ₂ constant {} (grid {gc}) not in (2, {bound}]",
                self.delta2
            )));
        }
        Ok(GrowthIndices {
            p_minus: self.p_minus,
            p_plus: self.p_plus,
            delta2: self.delta2,
            grid_p_minus: gpm,
            grid_p_plus: gpp,
            grid_delta2: gc,
        })
    }

    /// Samples `(s, t)` log-uniformly and records the worst relative
    /// violations of (φ1) and (φ2).
    pub fn check_doubling_properties(&self, samples: usize, seed: u64) -> DoublingCheck {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut phi1 = 0.0f64;
        let mut phi2 = 0.0f64;
        let half = 2f64.powf(self.p_plus) / 2.0;
        for _ in 0..samples {
            let s = 10f64.powf(rng.random_range(-3.0..3.0));
            let t = 10f64.powf(rng.random_range(-3.0..3.0));
            let (lo, hi) = self.scale_bounds(s);
            let pt = self.phi(t);
            let pst = self.phi(s * t);
            phi1 = phi1.max((lo * pt - pst) / pst).max((pst - hi * pt) / pst);
            let lhs = self.phi(s + t);
            let rhs = half * (self.phi(s) + pt);
            phi2 = phi2.max((lhs - rhs) / rhs);
        }
        DoublingCheck {
            samples,
            max_phi1_violation: phi1.max(0.0),
            max_phi2_violation: phi2.max(0.0),
        }
    }

    /// Smallest `C` with `φ(s+t) ≤ C·φ(s) + (1+δ)^{p⁺}·φ(t)` on random samples.
    pub fn splitting_constant(&self, delta: f64, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = (1.0 + delta).powf(self.p_plus);
        let mut c = 0.0f64;
        for _ in 0..samples {
            let s = 10f64.powf(rng.random_range(-3.0..3.0));
            let t = 10f64.powf(rng.random_range(-3.0..3.0));
            c = c.max((self.phi(s + t) - k * self.phi(t)) / self.phi(s));
        }
        c
    }

    /// Tests the Minkowski-type property
    /// `φ⁻¹(Φ(|u|+|v|)) ≤ φ⁻¹(Φ(u)) + φ⁻¹(Φ(v))` on random pairs of simple
    /// functions, whose modulars are exact finite sums.
    pub fn minkowski_check(&self, pairs: usize, seed: u64) -> MinkowskiCheck {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut violations = 0;
        let mut worst = f64::NEG_INFINITY;
        let mut witness = None;
        for _ in 0..pairs {
            let cells = rng.random_range(1..=4);
            let mut mu = 0.0;
            let mut mv = 0.0;
            let mut muv = 0.0;
            for _ in 0..cells {
                let measure = 10f64.powf(rng.random_range(-2.0..4.0));
                let mut height = || {
                    if rng.random_bool(0.25) {
                        0.0
                    } else {
                        10f64.powf(rng.random_range(-3.0..2.0))
                    }
                };
                let a = height();
                let b = height();
                mu += measure * self.phi(a);
                mv += measure * self.phi(b);
                muv += measure * self.phi(a + b);
            }
            let inv = |y: f64| self.inverse(y).unwrap_or(f64::NAN);
            let lhs = inv(muv);
            let rhs = inv(mu) + inv(mv);
            if rhs <= 0.0 {
                continue;
            }
            let excess = (lhs - rhs) / rhs;
            if excess > worst {
                worst = excess;
            }
            if excess > 1e-10 {
                violations += 1;
                if witness.is_none() {
                    witness = Some((lhs, rhs));
                }
            }
        }
        MinkowskiCheck {
            pairs,
            violations,
            worst_relative_excess: worst,
            first_violation: witness,
        }
    }
}

impl fmt::Display for OrliczFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl FromStr for OrliczFunction {
    type Err = Error;

    /// Parses `family:p`, e.g. `power:2` or `power_log:2.5`.
    fn from_str(s: &str) -> Result<Self> {
        let (fam, p) = s.split_once(':').ok_or_else(|| Error::UnknownIdentifier {
            kind: "orlicz function",
            id: s.to_string(),
        })?;
        let p: f64 = p
            .trim()
            .parse()
            .map_err(|_| invalid("p", format!("cannot parse exponent `{p}`")))?;
        Self::new(fam.trim().parse()?, p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DoublingCheck {
    pub samples: usize,
    pub max_phi1_violation: f64,
    pub max_phi2_violation: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MinkowskiCheck {
    pub pairs: usize,
    pub violations: usize,
    pub worst_relative_excess: f64,
    pub first_violation: Option<(f64, f64)>,
}

impl MinkowskiCheck {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// The argument of φ inside the φ̃ integral.
#[derive(Clone, Debug, PartialEq)]
pub enum PhiTildeArgument {
    /// `t·‖z′‖`
    Norm(f64),
    /// `|v·z′|` for a horizontal vector `v`
    Directional(Vec<f64>),
}

impl PhiTildeArgument {
    fn eval(&self, zh: &[f64]) -> f64 {
        match self {
            PhiTildeArgument::Norm(t) => t * zh.iter().map(|c| c * c).sum::<f64>().sqrt(),
            PhiTildeArgument::Directional(v) => v.iter().zip(zh).map(|(a, b)| a * b).sum::<f64>().abs(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhiTilde {
    pub value: f64,
    pub stderr: f64,
    /// `(s, value, stderr)` for each sweep point; empty for the closed form.
    pub points: Vec<(f64, f64, f64)>,
    pub residual: f64,
    pub closed_form: bool,
}

/// φ̃ at one argument: the closed form for powers, the extrapolated sweep otherwise.
pub fn phi_tilde(
    phi: &OrliczFunction,
    ng: &HomogeneousGauge,
    arg: &PhiTildeArgument,
    s_grid: &[f64],
    spec: &QuadratureSpec,
) -> Result<PhiTilde> {
    check_argument(ng, arg)?;
    if phi.is_power() {
        let m = ng.group().horizontal_dim();
        let p = phi.p();
        let v = sphere_integral(|z| phi.phi(arg.eval(z.horizontal(m))) / p, ng, spec)?;
        return Ok(PhiTilde {
            value: v.value,
            stderr: v.stderr,
            points: Vec::new(),
            residual: 0.0,
            closed_form: true,
        });
    }
    phi_tilde_sweep(phi, ng, arg, s_grid, spec)
}

/// φ̃ by evaluating `(1−s)∫₀¹∫_S φ(a(z) r^{1−s}) dσ dr/r` at each `s` and
/// extrapolating linearly in `1−s`. The same sphere nodes serve every `s`.
pub fn phi_tilde_sweep(
    phi: &OrliczFunction,
    ng: &HomogeneousGauge,
    arg: &PhiTildeArgument,
    s_grid: &[f64],
    spec: &QuadratureSpec,
) -> Result<PhiTilde> {
    check_argument(ng, arg)?;
    if s_grid.len() < 3 {
        return Err(invalid("s_grid", "need at least three values of s"));
    }
    if s_grid.windows(2).any(|w| w[1] <= w[0]) || s_grid.iter().any(|s| !(*s > 0.0 && *s < 1.0)) {
        return Err(invalid("s_grid", "must be strictly increasing inside (0,1)"));
    }
    let m = ng.group().horizontal_dim();
    let mut points = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        let c = 1.0 - s;
        // with r = e^{−y}: (1−s)∫₀^∞ φ(a·e^{−(1−s)y}) dy
        let inner = |a: f64| {
            if a == 0.0 {
                return 0.0;
            }
            let tol = 1e-13 * phi.phi(a);
            // φ(a·e^{−cy}) ≤ e^{−c p⁻ y}·max(φ(a), a^{p⁻}) by (φ1); stop at e^{−40}
            let y_max = (40.0 + a.ln().max(0.0) * phi.p_plus()) / (c * phi.p_minus());
            integrate_1d(|y| c * phi.phi(a * (-c * y).exp()), 0.0, y_max, tol)
                .map(|v| v.value)
                .unwrap_or(f64::NAN)
        };
        let v = sphere_integral(|z| inner(arg.eval(z.horizontal(m))), ng, spec)?;
        points.push((s, v.value, v.stderr));
    }
    let xs: Vec<f64> = points.iter().map(|p| 1.0 - p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    // common nodes make the per-point errors fully correlated, so the fit is unweighted
    let fit = linear_fit(&xs, &ys, &vec![0.0; xs.len()])?;
    let spread = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - ys.iter().cloned().fold(f64::INFINITY, f64::min);
    if !fit.intercept.is_finite() || spread > 1e-3 * fit.intercept.abs().max(1e-300) + 1e-12 {
        return Err(Error::NonConvergent(format!(
            "φ̃ sweep values spread by {spread} around {}",
            fit.intercept
        )));
    }
    let stat = points.iter().map(|p| p.2).fold(0.0, f64::max);
    Ok(PhiTilde {
        value: fit.intercept,
        stderr: stat.hypot(fit.residual),
        points,
        residual: fit.residual,
        closed_form: false,
    })
}

fn check_argument(ng: &HomogeneousGauge, arg: &PhiTildeArgument) -> Result<()> {
    match arg {
        PhiTildeArgument::Norm(t) if !(*t >= 0.0 && t.is_finite()) => {
            Err(invalid("t", format!("φ̃ takes finite t ≥ 0, got {t}")))
        }
        PhiTildeArgument::Directional(v) if v.len() != ng.group().horizontal_dim() => {
            Err(Error::DimensionMismatch {
                expected: ng.group().horizontal_dim(),
                found: v.len(),
            })
        }
        _ => Ok(()),
    }
}
