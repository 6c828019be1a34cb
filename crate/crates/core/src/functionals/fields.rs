use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::group::{GaugeKind, GroupKind, GroupPoint, HomogeneousGauge, MAX_DIM};
use crate::quadrature::{region_integral, sobol_net, QuadratureSpec, Region};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Smoothness {
    C2,
    Lipschitz,
    Measurable,
}

/// A real function on a group, evaluated in exponential coordinates.
///
/// Implementations must be pure: energies evaluate fields from many threads.
pub trait ScalarField: Send + Sync + fmt::Debug {
    fn eval(&self, x: &GroupPoint) -> f64;

    /// Gauge radius outside which the field vanishes; `f64::INFINITY` if none.
    fn support_radius(&self) -> f64;

    fn smoothness(&self) -> Smoothness;

    fn name(&self) -> String;

    /// Radius outside which the field is locally constant. Differences and
    /// gradients vanish beyond it even when the support is unbounded.
    fn variation_radius(&self) -> f64 {
        self.support_radius()
    }
}

pub type Field = Arc<dyn ScalarField>;

fn check_radius(radius: f64) -> Result<()> {
    if radius > 0.0 && radius.is_finite() {
        Ok(())
    } else {
        Err(invalid("radius", format!("must be positive and finite, got {radius}")))
    }
}

#[inline]
fn psi(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Cutoff profile: 1 on `[0,1]`, 0 on `[2,∞)`, smooth in between with
/// `|χ'| ≤ 2` (attained at `r = 3/2`).
#[inline]
pub fn cutoff_profile(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else if r >= 2.0 {
        0.0
    } else {
        let a = psi(2.0 - r);
        a / (a + psi(r - 1.0))
    }
}

/// `exp(1 − 1/(1 − (‖x‖/R)²))` inside the ball of radius `R`, peak value 1.
#[derive(Clone, Copy, Debug)]
pub struct Bump {
    ng: HomogeneousGauge,
    radius: f64,
}

impl ScalarField for Bump {
    fn eval(&self, x: &GroupPoint) -> f64 {
        let r = self.ng.norm(x) / self.radius;
        if r >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - r * r)).exp()
        }
    }

    fn support_radius(&self) -> f64 {
        self.radius
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::C2
    }

    fn name(&self) -> String {
        format!("bump:{}", self.radius)
    }
}

/// `exp(−|x|²)` in coordinates, switched off smoothly between gauge radius
/// `R/2` and `R` so the field stays C² with compact support.
#[derive(Clone, Copy, Debug)]
pub struct Gauss {
    ng: HomogeneousGauge,
    radius: f64,
}

impl ScalarField for Gauss {
    fn eval(&self, x: &GroupPoint) -> f64 {
        let g = self.ng.norm(x);
        if g >= self.radius {
            return 0.0;
        }
        let sq: f64 = x.coords().iter().map(|c| c * c).sum();
        (-sq).exp() * cutoff_profile(2.0 * g / self.radius)
    }

    fn support_radius(&self) -> f64 {
        self.radius
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::C2
    }

    fn name(&self) -> String {
        format!("gauss:{}", self.radius)
    }
}

/// Indicator of the closed gauge ball of radius `R`.
#[derive(Clone, Copy, Debug)]
pub struct Indicator {
    ng: HomogeneousGauge,
    radius: f64,
}

impl ScalarField for Indicator {
    fn eval(&self, x: &GroupPoint) -> f64 {
        if self.ng.norm(x) <= self.radius {
            1.0
        } else {
            0.0
        }
    }

    fn support_radius(&self) -> f64 {
        self.radius
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::Measurable
    }

    fn name(&self) -> String {
        format!("indicator:{}", self.radius)
    }
}

pub fn bump(ng: &HomogeneousGauge, radius: f64) -> Result<Field> {
    check_radius(radius)?;
    Ok(Arc::new(Bump { ng: *ng, radius }))
}

pub fn gauss(ng: &HomogeneousGauge, radius: f64) -> Result<Field> {
    check_radius(radius)?;
    Ok(Arc::new(Gauss { ng: *ng, radius }))
}

pub fn indicator(ng: &HomogeneousGauge, radius: f64) -> Result<Field> {
    check_radius(radius)?;
    Ok(Arc::new(Indicator { ng: *ng, radius }))
}

pub const BUILTIN_FIELDS: [&str; 3] = ["bump", "gauss", "indicator"];

/// Built-in field by name.
pub fn builtin(name: &str, radius: f64, ng: &HomogeneousGauge) -> Result<Field> {
    match name {
        "bump" => bump(ng, radius),
        "gauss" => gauss(ng, radius),
        "indicator" => indicator(ng, radius),
        _ => Err(crate::Error::UnknownIdentifier {
            kind: "field",
            id: name.to_string(),
        }),
    }
}

#[derive(Clone, Copy, Debug)]
struct Constant(f64);

impl ScalarField for Constant {
    fn eval(&self, _: &GroupPoint) -> f64 {
        self.0
    }

    fn support_radius(&self) -> f64 {
        if self.0 == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::C2
    }

    fn name(&self) -> String {
        format!("constant:{}", self.0)
    }

    fn variation_radius(&self) -> f64 {
        0.0
    }
}

pub fn zero() -> Field {
    Arc::new(Constant(0.0))
}

pub fn constant(c: f64) -> Field {
    Arc::new(Constant(c))
}

#[derive(Clone, Copy, Debug)]
struct Coordinate(usize);

impl ScalarField for Coordinate {
    fn eval(&self, x: &GroupPoint) -> f64 {
        x[self.0]
    }

    fn support_radius(&self) -> f64 {
        f64::INFINITY
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::C2
    }

    fn name(&self) -> String {
        format!("coordinate:{}", self.0)
    }
}

/// The coordinate function `x ↦ x_j`.
pub fn coordinate(j: usize) -> Result<Field> {
    if j >= MAX_DIM {
        return Err(invalid("j", format!("coordinate index {j} out of range")));
    }
    Ok(Arc::new(Coordinate(j)))
}

type FieldFn = dyn Fn(&GroupPoint) -> f64 + Send + Sync;

struct FnField {
    name: String,
    support: f64,
    smoothness: Smoothness,
    f: Box<FieldFn>,
}

impl fmt::Debug for FnField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FnField({})", self.name)
    }
}

impl ScalarField for FnField {
    fn eval(&self, x: &GroupPoint) -> f64 {
        self.f.as_ref()(x)
    }

    fn support_radius(&self) -> f64 {
        self.support
    }

    fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    fn name(&self) -> String {
        self.name.clone()
    }
}

/// Wraps a closure. The caller vouches for the declared support and smoothness.
pub fn from_fn<F>(name: &str, support: f64, smoothness: Smoothness, f: F) -> Field
where
    F: Fn(&GroupPoint) -> f64 + Send + Sync + 'static,
{
    Arc::new(FnField {
        name: name.to_string(),
        support,
        smoothness,
        f: Box::new(f),
    })
}

#[derive(Debug)]
struct Scaled {
    inner: Field,
    c: f64,
}

impl ScalarField for Scaled {
    fn eval(&self, x: &GroupPoint) -> f64 {
        self.c * self.inner.eval(x)
    }

    fn support_radius(&self) -> f64 {
        if self.c == 0.0 {
            0.0
        } else {
            self.inner.support_radius()
        }
    }

    fn smoothness(&self) -> Smoothness {
        self.inner.smoothness()
    }

    fn name(&self) -> String {
        format!("{}*{}", self.c, self.inner.name())
    }

    fn variation_radius(&self) -> f64 {
        if self.c == 0.0 {
            0.0
        } else {
            self.inner.variation_radius()
        }
    }
}

pub fn scaled(u: &Field, c: f64) -> Field {
    Arc::new(Scaled {
        inner: u.clone(),
        c,
    })
}

#[derive(Debug)]
struct Translated {
    inner: Field,
    h: GroupPoint,
    h_norm: f64,
    ng: HomogeneousGauge,
}

impl ScalarField for Translated {
    fn eval(&self, x: &GroupPoint) -> f64 {
        self.inner.eval(&self.ng.group().mul(x, &self.h))
    }

    fn support_radius(&self) -> f64 {
        self.inner.support_radius() + self.h_norm
    }

    fn smoothness(&self) -> Smoothness {
        self.inner.smoothness()
    }

    fn name(&self) -> String {
        format!("translate({})", self.inner.name())
    }

    fn variation_radius(&self) -> f64 {
        self.inner.variation_radius() + self.h_norm
    }
}

/// `x ↦ u(x·h)`.
pub fn translated(u: &Field, h: &GroupPoint, ng: &HomogeneousGauge) -> Result<Field> {
    let h_norm = ng.eval(h)?;
    Ok(Arc::new(Translated {
        inner: u.clone(),
        h: *h,
        h_norm,
        ng: *ng,
    }))
}

/// Unnormalized mollifier profile on the unit gauge ball.
#[inline]
fn rho_raw(g: f64) -> f64 {
    if g >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - g * g)).exp()
    }
}

pub const MOLLIFIER_NODES: usize = 256;
const MOLLIFIER_NODE_SEED: u64 = 0x6d6f_6c6c;
const NORMALIZATION_SAMPLES: usize = 1 << 20;

type NormKey = (GroupKind, GaugeKind);

fn normalization(ng: &HomogeneousGauge) -> Result<f64> {
    static CACHE: OnceLock<std::sync::Mutex<Vec<(NormKey, f64)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (ng.group().kind(), ng.kind());
    if let Some((_, v)) = cache.lock().unwrap().iter().find(|(k, _)| *k == key) {
        return Ok(*v);
    }
    let spec = QuadratureSpec::with_samples(NORMALIZATION_SAMPLES, MOLLIFIER_NODE_SEED);
    let mass = region_integral(|x| rho_raw(ng.norm(x)), ng, &Region::Ball { radius: 1.0 }, &spec)?;
    cache.lock().unwrap().push((key, mass.value));
    Ok(mass.value)
}

/// Normalized mollifier `ρ` with `∫ρ = 1` (to quadrature accuracy).
pub fn mollifier_density(ng: &HomogeneousGauge, x: &GroupPoint) -> Result<f64> {
    Ok(rho_raw(ng.norm(x)) / normalization(ng)?)
}

/// `ρ_ε(x) = ε^{−Q} ρ(δ_{1/ε} x)`.
pub fn scaled_mollifier(ng: &HomogeneousGauge, eps: f64, x: &GroupPoint) -> Result<f64> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(invalid("eps", format!("must be positive, got {eps}")));
    }
    let q = ng.group().homogeneous_dim() as i32;
    let y = ng.group().dil(1.0 / eps, x);
    Ok(eps.powi(-q) * mollifier_density(ng, &y)?)
}

#[derive(Debug)]
struct Mollified {
    inner: Field,
    eps: f64,
    ng: HomogeneousGauge,
    /// Inverses of the dilated nodes, `(δ_ε z_i)^{−1}`, with their weights.
    nodes: Vec<(GroupPoint, f64)>,
}

impl ScalarField for Mollified {
    fn eval(&self, x: &GroupPoint) -> f64 {
        let g = self.ng.group();
        self.nodes
            .iter()
            .map(|(y, w)| w * self.inner.eval(&g.mul(y, x)))
            .sum()
    }

    fn support_radius(&self) -> f64 {
        self.inner.support_radius() + self.eps
    }

    // A finite node sum of translates is exactly as smooth as the input.
    fn smoothness(&self) -> Smoothness {
        self.inner.smoothness()
    }

    fn name(&self) -> String {
        format!("mollify({},{})", self.inner.name(), self.eps)
    }

    fn variation_radius(&self) -> f64 {
        self.inner.variation_radius() + self.eps
    }
}

/// Dilated, inverted nodes with weights `ρ(z_i)·cell`, and the raw weight sum.
fn mollifier_nodes(eps: f64, ng: &HomogeneousGauge) -> Result<(Vec<(GroupPoint, f64)>, f64)> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(invalid("eps", format!("must be positive, got {eps}")));
    }
    let norm = normalization(ng)?;
    let g = ng.group();
    let n = g.dim();
    let half = ng.unit_ball_halfwidths();
    let box_volume: f64 = (0..n).map(|j| 2.0 * half[j]).product();
    let cell = box_volume / MOLLIFIER_NODES as f64;
    let mut nodes = Vec::new();
    for p in sobol_net(n, MOLLIFIER_NODES, MOLLIFIER_NODE_SEED) {
        let mut c = [0.0; MAX_DIM];
        for j in 0..n {
            c[j] = (2.0 * p[j] - 1.0) * half[j];
        }
        let z = GroupPoint::from_array(c, n);
        let w = rho_raw(ng.norm(&z)) * cell / norm;
        if w > 0.0 {
            nodes.push((g.inv(&g.dil(eps, &z)), w));
        }
    }
    let mass: f64 = nodes.iter().map(|(_, w)| w).sum();
    Ok((nodes, mass))
}

/// `u_ε = ρ_ε * u`, i.e. `x ↦ ∫_{B(0,1)} u((δ_ε z)^{−1}·x) ρ(z) dz`, discretized on
/// a fixed set of [`MOLLIFIER_NODES`] shifted Sobol nodes in the unit ball.
///
/// The node weights are rescaled to sum to exactly 1, so the discrete
/// mollifier is a convex combination of left translates and keeps constants.
pub fn mollify(u: &Field, eps: f64, ng: &HomogeneousGauge) -> Result<Field> {
    let (mut nodes, mass) = mollifier_nodes(eps, ng)?;
    for (_, w) in nodes.iter_mut() {
        *w /= mass;
    }
    Ok(Arc::new(Mollified {
        inner: u.clone(),
        eps,
        ng: *ng,
        nodes,
    }))
}

/// Raw node-rule mass of `ρ` before the rescaling done by [`mollify`];
/// it differs from 1 by the node quadrature error.
pub fn mollifier_mass(ng: &HomogeneousGauge) -> Result<f64> {
    Ok(mollifier_nodes(1.0, ng)?.1)
}

#[derive(Debug)]
struct Truncated {
    inner: Field,
    k: f64,
    ng: HomogeneousGauge,
}

impl ScalarField for Truncated {
    fn eval(&self, x: &GroupPoint) -> f64 {
        let eta = cutoff_profile(self.ng.norm(x) / self.k);
        if eta == 0.0 {
            0.0
        } else {
            eta * self.inner.eval(x)
        }
    }

    fn support_radius(&self) -> f64 {
        self.inner.support_radius().min(2.0 * self.k)
    }

    fn smoothness(&self) -> Smoothness {
        self.inner.smoothness()
    }

    fn name(&self) -> String {
        format!("truncate({},{})", self.inner.name(), self.k)
    }

    fn variation_radius(&self) -> f64 {
        self.support_radius()
    }
}

/// `η_k u` with `η_k(x) = χ(‖x‖/k)`, see [`cutoff_profile`].
pub fn truncate(u: &Field, k: u32, ng: &HomogeneousGauge) -> Result<Field> {
    if k == 0 {
        return Err(invalid("k", "must be a positive integer"));
    }
    Ok(Arc::new(Truncated {
        inner: u.clone(),
        k: k as f64,
        ng: *ng,
    }))
}
