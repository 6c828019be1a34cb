//! Haar-measure integration on Carnot groups.
//!
//! Haar measure is Lebesgue measure in exponential coordinates, so every
//! integral here is an ordinary Lebesgue integral over a coordinate box.
//! Multi-dimensional integrals use randomized Sobol points: each of
//! [`BATCHES`] batches applies an independent random digital shift to the same
//! point set and the spread of the batch means gives the standard error.

mod measure;
mod oned;
mod qmc;

pub use measure::{
    ball_volume, ball_volume_with, mean_value, radial_integral, region_integral,
    sphere_integral, BallVolume, Region, DEFAULT_BALL_SAMPLES, DEFAULT_BALL_SEED,
};
pub use oned::{gauss_legendre, integrate_1d};
pub(crate) use measure::SphereSampler;
pub(crate) use qmc::{qmc_integrate, sobol_net};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Number of independently shifted replicas used for error estimation.
pub const BATCHES: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Qmc,
    Grid,
}

/// Sampling controls shared by every integration routine.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub method: Method,
    /// Total number of integrand evaluations per region, spread over the batches.
    pub samples: usize,
    pub seed: u64,
    /// Inner cutoff for singular radial integrals. Zero selects the graded
    /// substitution, which integrates down to the origin.
    pub r_min: f64,
    /// Number of dyadic strata in the near-field radial variable.
    pub annuli: usize,
    /// Optional sampling box for ball and annulus regions; must contain the region.
    pub box_halfwidths: Option<Vec<f64>>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            method: Method::Qmc,
            samples: 1 << 18,
            seed: 0,
            r_min: 0.0,
            annuli: 4,
            box_halfwidths: None,
        }
    }
}

impl QuadratureSpec {
    pub fn with_samples(samples: usize, seed: u64) -> Self {
        QuadratureSpec {
            samples,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(invalid("samples", "must be at least 1"));
        }
        if !(self.r_min >= 0.0 && self.r_min.is_finite()) {
            return Err(invalid("r_min", format!("must be finite and non-negative, got {}", self.r_min)));
        }
        if self.annuli == 0 {
            return Err(invalid("annuli", "must be at least 1"));
        }
        if let Some(w) = &self.box_halfwidths {
            if w.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                return Err(invalid("box_halfwidths", "entries must be positive and finite"));
            }
        }
        Ok(())
    }

    /// Points per batch, rounded up to a power of two so each batch is a
    /// complete Sobol net.
    pub fn points_per_batch(&self) -> usize {
        self.samples.div_ceil(BATCHES).max(1).next_power_of_two()
    }

    /// The same spec with the seed replaced, used for independent replicas.
    pub fn reseeded(&self, seed: u64) -> Self {
        QuadratureSpec {
            seed,
            ..self.clone()
        }
    }
}

/// Named parts of a split integral.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Breakdown {
    pub near_field: f64,
    pub far_field: f64,
    pub tail_analytic: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralValue {
    pub value: f64,
    pub stderr: f64,
    pub breakdown: Option<Breakdown>,
}

impl IntegralValue {
    pub fn new(value: f64, stderr: f64) -> Self {
        IntegralValue {
            value,
            stderr,
            breakdown: None,
        }
    }

    pub fn exact(value: f64) -> Self {
        Self::new(value, 0.0)
    }

    pub fn scale(self, c: f64) -> Self {
        IntegralValue {
            value: c * self.value,
            stderr: c.abs() * self.stderr,
            breakdown: self.breakdown.map(|b| Breakdown {
                near_field: c * b.near_field,
                far_field: c * b.far_field,
                tail_analytic: c * b.tail_analytic,
            }),
        }
    }

    /// Sum of two independent estimates; errors add in quadrature.
    pub fn plus(self, other: IntegralValue) -> Self {
        IntegralValue::new(
            self.value + other.value,
            self.stderr.hypot(other.stderr),
        )
    }

    /// Whether `target` lies within `k` standard errors (plus `slack`).
    pub fn agrees_with(&self, target: f64, k: f64, slack: f64) -> bool {
        (self.value - target).abs() <= k * self.stderr + slack
    }
}
