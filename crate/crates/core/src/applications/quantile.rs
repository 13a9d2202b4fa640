//! The χ² distribution through the regularized incomplete gamma function.

use super::ApplicationError;

const EPS: f64 = 1e-15;
const MAX_ITER: usize = 1000;

/// Lower regularized gamma `P(a, x)` by its power series; for `x < a + 1`.
fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * libm::exp(-x + a * libm::log(x) - libm::lgamma(a))
}

/// Upper regularized gamma `Q(a, x)` by Lentz's continued fraction; for
/// `x ≥ a + 1`.
fn gamma_q_fraction(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    libm::exp(-x + a * libm::log(x) - libm::lgamma(a)) * h
}

/// `Q(a, x) = 1 − P(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_fraction(a, x)
    }
}

/// `P[X ≥ x]` for `X ~ χ²(df)`.
pub fn chi2_sf(x: f64, df: u32) -> f64 {
    gamma_q(f64::from(df) / 2.0, x / 2.0)
}

/// Density of `χ²(df)` at `x > 0`.
pub fn chi2_pdf(x: f64, df: u32) -> f64 {
    let k = f64::from(df) / 2.0;
    libm::exp((k - 1.0) * libm::log(x) - x / 2.0 - k * core::f64::consts::LN_2 - libm::lgamma(k))
}

/// The critical value `c_α`: `P[X ≥ c_α] = α` for `X ~ χ²(df)`.
///
/// Brackets the root, bisects to near machine precision, then polishes
/// with Newton steps that are kept only while they stay in the bracket.
pub fn chi2_quantile(alpha: f64, df: u32) -> Result<f64, ApplicationError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(ApplicationError::Alpha(alpha));
    }
    if df == 0 {
        return Err(ApplicationError::Df(df));
    }
    let f = |c: f64| chi2_sf(c, df) - alpha;
    let (mut lo, mut hi) = (0.0, f64::from(df).max(1.0));
    while f(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    let mut c = 0.5 * (lo + hi);
    for _ in 0..4 {
        let pdf = chi2_pdf(c, df);
        if !(pdf > 0.0 && pdf.is_finite()) {
            break;
        }
        let next = c + f(c) / pdf;
        if !(next > lo && next < hi) {
            break;
        }
        c = next;
    }
    Ok(c)
}
