//! Small numerical kernels shared across modules.

/// Sum in a fixed pairwise order. The result depends only on the slice
/// contents, never on how the terms were produced.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        n if n <= 8 => values.iter().fold(0.0, |acc, v| acc + v),
        n => {
            let (lo, hi) = values.split_at(n / 2);
            pairwise_sum(lo) + pairwise_sum(hi)
        }
    }
}

/// 1/sinh(x) for x > 0 without overflow: 2e^{-x} / (1 - e^{-2x}).
pub fn inv_sinh(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    -2.0 * (-x).exp() / (-2.0 * x).exp_m1()
}

/// ln(1 + e^x), accurate for both signs and large |x|.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// ln(2 cosh x) without overflow.
pub fn ln_two_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p()
}

/// ln(Σ e^{x_i}) in a fixed order.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let shifted: Vec<f64> = values.iter().map(|v| (v - max).exp()).collect();
    max + pairwise_sum(&shifted).ln()
}

/// Bisection for an increasing function on `[lo, hi]` with `f(lo) < 0 < f(hi)`.
///
/// Stops when the bracket is narrower than `tol` or the midpoint no longer
/// moves. Returns the midpoint of the final bracket.
pub fn bisect_increasing<F>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            return mid;
        }
        let value = f(mid);
        if value == 0.0 {
            return mid;
        } else if value < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
