//! Weighted straight-line fits used for limit extrapolation.

use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub intercept: f64,
    pub slope: f64,
    /// Standard error of the intercept propagated from the point errors.
    pub intercept_stderr: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
}

/// Least-squares fit of `y = a + b·x` with weights `1/σ²`.
///
/// Falls back to equal weights when any `σ` is zero, since a single exact
/// point would otherwise dominate.
pub fn linear_fit(xs: &[f64], ys: &[f64], sigmas: &[f64]) -> Result<LinearFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n || sigmas.len() != n {
        return Err(invalid("points", "need at least two points with matching lengths"));
    }
    let weighted = sigmas.iter().all(|s| *s > 0.0 && s.is_finite());
    let w: Vec<f64> = if weighted {
        sigmas.iter().map(|s| 1.0 / (s * s)).collect()
    } else {
        vec![1.0; n]
    };
    let sw: f64 = w.iter().sum();
    let mx = xs.iter().zip(&w).map(|(x, w)| w * x).sum::<f64>() / sw;
    let my = ys.iter().zip(&w).map(|(y, w)| w * y).sum::<f64>() / sw;
    let sxx: f64 = xs.iter().zip(&w).map(|(x, w)| w * (x - mx).powi(2)).sum();
    if sxx <= f64::EPSILON * sw * (mx * mx).max(1e-300) {
        return Err(invalid("points", "abscissae are degenerate"));
    }
    let sxy: f64 = xs
        .iter()
        .zip(ys)
        .zip(&w)
        .map(|((x, y), w)| w * (x - mx) * (y - my))
        .sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / n as f64)
        .sqrt();
    // Var(a) = Σ c_i² σ_i² with c_i = w_i (1/sw − mx (x_i − mx)/sxx)
    let intercept_stderr = xs
        .iter()
        .zip(&w)
        .zip(sigmas)
        .map(|((x, w), s)| (w * (1.0 / sw - mx * (x - mx) / sxx) * s).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(LinearFit {
        intercept,
        slope,
        intercept_stderr,
        residual,
    })
}
