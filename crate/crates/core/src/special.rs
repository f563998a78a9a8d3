//! Exponential integral.
//!
//! `e1` is evaluated with the ascending power series below `x = 1` and a
//! Lentz continued fraction above it. Both branches reach full double
//! precision on their domain, so the combined relative error stays near a
//! few ulp for all positive arguments.

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Above this argument `E1(x) < f64::MIN_POSITIVE` and the result is
/// clamped to zero.
pub const E1_UNDERFLOW: f64 = 701.0;

const SERIES_SWITCH: f64 = 1.0;
const MAX_ITER: usize = 500;

/// Exponential integral `E1(x) = ∫ₓ^∞ e^{-t}/t dt` for `x > 0`.
pub fn e1(x: f64) -> Result<f64> {
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // rejects NaN too
    if !(x > 0.0) {
        return Err(Error::Domain(format!("e1 requires x > 0, got {x}")));
    }
    if x > E1_UNDERFLOW {
        return Ok(0.0);
    }
    Ok(if x < SERIES_SWITCH {
        e1_series(x)
    } else {
        e1_continued_fraction(x)
    })
}

/// The tabulated `Ei(x) = -∫ₓ^∞ e^{-t}/t dt`, i.e. `-E1(x)`.
///
/// This is *not* the principal-value exponential integral; it is negative
/// for every positive argument.
pub fn paper_ei(x: f64) -> Result<f64> {
    e1(x).map(|v| -v)
}

fn e1_series(x: f64) -> f64 {
    // E1(x) = -γ - ln x - Σ_{k≥1} (-x)^k / (k·k!)
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..MAX_ITER {
        let kf = k as f64;
        term *= -x / kf;
        let contrib = term / kf;
        sum += contrib;
        if contrib.abs() < f64::EPSILON * sum.abs() * 0.25 {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

fn e1_continued_fraction(x: f64) -> f64 {
    // Modified Lentz on e^x E1(x) = 1/(x+1- 1²/(x+3- 2²/(x+5- ...)))
    let tiny = f64::MIN_POSITIVE / f64::EPSILON;
    let mut b = x + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -((i * i) as f64);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).abs() < f64::EPSILON {
            break;
        }
    }
    h * (-x).exp()
}
