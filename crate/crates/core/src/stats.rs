//! Error function and standard normal quantile, self-contained so that
//! confidence-interval half-widths reproduce bit-for-bit across platforms.
//!
//! `erf` uses its Maclaurin series for small arguments and a Lentz-style
//! continued fraction for the complementary function at large arguments.
//! The quantile starts from a rational approximation and is then refined by
//! bisection on the normal CDF (which is built on `erfc`), so a coefficient
//! of the initial guess can never affect the returned value beyond the
//! bisection tolerance of 1e-14.

use std::f64::consts::FRAC_1_SQRT_2;

const SQRT_PI: f64 = 1.7724538509055160273;
/// Series/continued-fraction crossover point for `erf`/`erfc`.
const ERF_CROSSOVER: f64 = 1.5;

/// Error function via Maclaurin series, accurate for |x| <= ERF_CROSSOVER.
fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 1.0;
    loop {
        // term_n = (-1)^n x^(2n+1) / (n! (2n+1))
        term *= -x2 * (2.0 * n - 1.0) / (n * (2.0 * n + 1.0));
        sum += term;
        n += 1.0;
        if term.abs() <= 1e-18 * sum.abs() || n > 200.0 {
            return sum * 2.0 / SQRT_PI;
        }
    }
}

/// Complementary error function via continued fraction, for x >= ERF_CROSSOVER:
/// erfc(x) = exp(-x^2)/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))).
fn erfc_cf(x: f64) -> f64 {
    // Modified Lentz evaluation of the denominator.
    let tiny = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    let mut n = 1.0;
    loop {
        let a = n / 2.0;
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 || n > 300.0 {
            break;
        }
        n += 1.0;
    }
    (-x * x).exp() / (SQRT_PI * f)
}

pub fn erf(x: f64) -> f64 {
    if x < 0.0 {
        return -erf(-x);
    }
    if x <= ERF_CROSSOVER {
        erf_series(x)
    } else {
        1.0 - erfc_cf(x)
    }
}

pub fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x <= ERF_CROSSOVER {
        1.0 - erf_series(x)
    } else {
        erfc_cf(x)
    }
}

/// Standard normal cumulative distribution function.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal quantile (inverse CDF).
///
/// Panics if `p` is not strictly inside (0, 1); callers validate first.
pub fn std_normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile requires p in (0,1), got {p}");
    let guess = quantile_guess(p);
    // Expand around the guess until the root is bracketed, then bisect.
    let mut width = 1e-3_f64;
    let (mut lo, mut hi) = (guess - width, guess + width);
    while std_normal_cdf(lo) > p {
        width *= 2.0;
        lo = guess - width;
    }
    let mut width = 1e-3_f64;
    while std_normal_cdf(hi) < p {
        width *= 2.0;
        hi = guess + width;
    }
    for _ in 0..200 {
        if hi - lo <= 1e-14 * lo.abs().max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if std_normal_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Rational initial guess for the normal quantile (Acklam's approximation).
/// Only the bracketing start point; precision comes from the bisection.
fn quantile_guess(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -quantile_guess(1.0 - p)
    }
}
