use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sobol::params::JoeKuoD6;
use sobol::Sobol;

use super::{Method, QuadratureSpec, BATCHES};
use crate::error::{invalid, Error, Result};

/// Bits of resolution in the Sobol generator; batches hold at most `2^BITS` points.
const BITS: usize = 32;
const TWO_POW_M53: f64 = 1.0 / 9_007_199_254_740_992.0;

/// Means and standard errors of a `K`-component integrand.
#[derive(Clone, Copy, Debug)]
pub(crate) struct QmcEstimate<const K: usize> {
    pub mean: [f64; K],
    pub stderr: [f64; K],
    /// Standard error of the sum of all components, which are correlated.
    pub total_stderr: f64,
}

fn direction_numbers(dims: usize) -> Vec<Vec<u64>> {
    Sobol::<f64>::init_direction_vals::<u32>(dims, BITS, &JoeKuoD6::minimal())
}

/// Integrates `f` over the unit cube `(0,1)^dims`.
///
/// `f` must already include the Jacobian of the map from the cube to the
/// integration domain. Batches run in parallel but are reduced in a fixed
/// order, so the result does not depend on the number of worker threads.
pub(crate) fn qmc_integrate<const K: usize, F>(
    dims: usize,
    spec: &QuadratureSpec,
    context: &'static str,
    f: F,
) -> Result<QmcEstimate<K>>
where
    F: Fn(&[f64]) -> [f64; K] + Sync,
{
    spec.validate()?;
    if dims == 0 {
        return Err(invalid("dims", "integration dimension must be positive"));
    }
    if spec.method == Method::Grid {
        return grid_integrate(dims, spec, context, f);
    }
    let n = spec.points_per_batch();
    if n > (1usize << BITS) {
        return Err(invalid("samples", "too many points per batch"));
    }
    let dirs = direction_numbers(dims);

    let batch_sums: Vec<Result<[f64; K]>> = (0..BATCHES)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(b as u64);
            let shift: Vec<u64> = (0..dims).map(|_| rng.random::<u64>()).collect();
            let mut state = vec![0u64; dims];
            let mut u = vec![0.0; dims];
            let mut acc = [0.0; K];
            for i in 0..n {
                if i > 0 {
                    let c = i.trailing_zeros() as usize;
                    for (s, d) in state.iter_mut().zip(&dirs) {
                        *s ^= d[c];
                    }
                }
                for ((uj, s), sh) in u.iter_mut().zip(&state).zip(&shift) {
                    // midpoint of the 2^-53 cell keeps points strictly inside (0,1)
                    *uj = ((s ^ sh) >> 11) as f64 * TWO_POW_M53 + 0.5 * TWO_POW_M53;
                }
                let v = f(&u);
                for (a, x) in acc.iter_mut().zip(v) {
                    if !x.is_finite() {
                        return Err(Error::NonFinite { context });
                    }
                    *a += x;
                }
            }
            Ok(acc.map(|a| a / n as f64))
        })
        .collect();

    let mut means = Vec::with_capacity(BATCHES);
    for r in batch_sums {
        means.push(r?);
    }
    Ok(summarize(&means))
}

fn summarize<const K: usize>(means: &[[f64; K]]) -> QmcEstimate<K> {
    let b = means.len() as f64;
    let mut mean = [0.0; K];
    for m in means {
        for (a, x) in mean.iter_mut().zip(m) {
            *a += x;
        }
    }
    mean = mean.map(|a| a / b);
    let total: f64 = mean.iter().sum();
    let mut var = [0.0; K];
    let mut var_total = 0.0;
    for m in means {
        for k in 0..K {
            var[k] += (m[k] - mean[k]).powi(2);
        }
        var_total += (m.iter().sum::<f64>() - total).powi(2);
    }
    let denom = if means.len() > 1 { (b - 1.0) * b } else { 1.0 };
    QmcEstimate {
        mean,
        stderr: var.map(|v| (v / denom).sqrt()),
        total_stderr: (var_total / denom).sqrt(),
    }
}

/// The first `n` points of one digitally shifted Sobol net in `(0,1)^dims`.
pub(crate) fn sobol_net(dims: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let dirs = direction_numbers(dims);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<u64> = (0..dims).map(|_| rng.random::<u64>()).collect();
    let mut state = vec![0u64; dims];
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        if i > 0 {
            let c = i.trailing_zeros() as usize;
            for (s, d) in state.iter_mut().zip(&dirs) {
                *s ^= d[c];
            }
        }
        out.push(
            state
                .iter()
                .zip(&shift)
                .map(|(s, sh)| ((s ^ sh) >> 11) as f64 * TWO_POW_M53 + 0.5 * TWO_POW_M53)
                .collect(),
        );
    }
    out
}

/// Tensor midpoint rule. The error estimate is the Richardson correction
/// against the rule with half as many points per axis.
fn grid_integrate<const K: usize, F>(
    dims: usize,
    spec: &QuadratureSpec,
    context: &'static str,
    f: F,
) -> Result<QmcEstimate<K>>
where
    F: Fn(&[f64]) -> [f64; K] + Sync,
{
    let k = ((spec.samples as f64).powf(1.0 / dims as f64).floor() as usize).max(2);
    let fine = midpoint_rule(dims, k, context, &f)?;
    let coarse = midpoint_rule(dims, k / 2, context, &f)?;
    let mut stderr = [0.0; K];
    for j in 0..K {
        stderr[j] = (fine[j] - coarse[j]).abs() / 3.0;
    }
    let total_fine: f64 = fine.iter().sum();
    let total_coarse: f64 = coarse.iter().sum();
    Ok(QmcEstimate {
        mean: fine,
        stderr,
        total_stderr: (total_fine - total_coarse).abs() / 3.0,
    })
}

fn midpoint_rule<const K: usize, F>(
    dims: usize,
    k: usize,
    context: &'static str,
    f: &F,
) -> Result<[f64; K]>
where
    F: Fn(&[f64]) -> [f64; K] + Sync,
{
    let total = k.pow(dims as u32);
    let h = 1.0 / k as f64;
    let mut acc = [0.0; K];
    let mut u = vec![0.0; dims];
    for idx in 0..total {
        let mut rest = idx;
        for uj in u.iter_mut() {
            *uj = ((rest % k) as f64 + 0.5) * h;
            rest /= k;
        }
        for (a, x) in acc.iter_mut().zip(f(&u)) {
            if !x.is_finite() {
                return Err(Error::NonFinite { context });
            }
            *a += x;
        }
    }
    Ok(acc.map(|a| a / total as f64))
}
