use super::IntegralValue;
use crate::error::{invalid, Error, Result};

/// Pieces are split so consecutive breakpoints differ by at most this factor.
const LOG_SPLIT: f64 = 4.0;

/// Octaves resolved geometrically next to a zero left endpoint.
const ZERO_OCTAVES: i32 = 20;

/// Breakpoints of `[a, b]` for `0 ≤ a < b < ∞`, geometric with ratio
/// [`LOG_SPLIT`]. A zero endpoint is approached geometrically as well, which
/// keeps integrable endpoint singularities away from the quadrature nodes.
fn breakpoints(a: f64, b: f64) -> Vec<f64> {
    let mut pts = vec![a];
    let mut lo = if a > 0.0 {
        a
    } else {
        let first = b * LOG_SPLIT.powi(-ZERO_OCTAVES);
        pts.push(first);
        first
    };
    while lo * LOG_SPLIT < b {
        lo *= LOG_SPLIT;
        pts.push(lo);
    }
    pts.push(b);
    pts.dedup();
    pts
}

/// Adaptive double-exponential quadrature of `f` over `[a, b]`.
///
/// `b` may be `+∞`, in which case `[c, ∞)` is mapped to `(0, 1]` through
/// `r = c/v`; the caller is responsible for checking that `f` decays.
/// `abs_tol` is the error target for each piece.
pub fn integrate_1d<F>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<IntegralValue>
where
    F: Fn(f64) -> f64,
{
    if !a.is_finite() || b.is_nan() || a > b {
        return Err(invalid("interval", format!("cannot integrate over [{a}, {b}]")));
    }
    if a == b {
        return Ok(IntegralValue::exact(0.0));
    }
    if a < 0.0 {
        let reflected = |x: f64| f(-x);
        if b <= 0.0 {
            return integrate_nonnegative(&reflected, -b, -a, abs_tol);
        }
        let neg = integrate_nonnegative(&reflected, 0.0, -a, abs_tol)?;
        return Ok(neg.plus(integrate_nonnegative(&f, 0.0, b, abs_tol)?));
    }
    integrate_nonnegative(&f, a, b, abs_tol)
}

fn integrate_nonnegative(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
) -> Result<IntegralValue> {
    let (finite_end, tail) = if b.is_infinite() {
        (a.max(1.0), true)
    } else {
        (b, false)
    };

    let mut value = 0.0;
    let mut err = 0.0;
    let pts = breakpoints(a, finite_end);
    for w in pts.windows(2) {
        let out = quadrature::integrate(f, w[0], w[1], abs_tol);
        value += out.integral;
        err += out.error_estimate;
    }
    if tail {
        let c = finite_end;
        let out = quadrature::integrate(
            |v: f64| {
                if v <= 0.0 {
                    0.0
                } else {
                    let r = c / v;
                    f(r) * c / (v * v)
                }
            },
            0.0,
            1.0,
            abs_tol,
        );
        value += out.integral;
        err += out.error_estimate;
    }
    if !value.is_finite() {
        return Err(Error::NonFinite {
            context: "one-dimensional quadrature",
        });
    }
    Ok(IntegralValue::new(value, err))
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[−1, 1]`,
/// by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = x;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}
