//! Special functions: the confluent hypergeometric function `₁F₁(m; 1; z)`
//! that shapes the shadowed-Rician density, and the Gaussian tail.

use crate::error::{QosError, Result};

const SERIES_BUDGET: usize = 1_000_000;

/// `₁F₁(m; 1; z)` for integer `m ≥ 1` and `z ≥ 0`, via the Kummer
/// transformation `e^z Σ_{k<m} C(m−1,k) z^k / k!`.
pub fn hyp1f1_integer(m: u32, z: f64) -> Result<f64> {
    Ok(ln_hyp1f1_integer(m, z)?.exp())
}

/// Natural log of [`hyp1f1_integer`]; finite for arguments whose value
/// would overflow.
pub fn ln_hyp1f1_integer(m: u32, z: f64) -> Result<f64> {
    if m == 0 {
        return Err(QosError::domain("1F1 Kummer sum needs m >= 1"));
    }
    if !(z >= 0.0 && z.is_finite()) {
        return Err(QosError::domain(format!(
            "1F1 argument must be finite and >= 0, got {z}"
        )));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    // Terms are positive; accumulate in log space against the running max.
    let ln_z = z.ln();
    let mut ln_term = 0.0_f64;
    let mut ln_max = 0.0_f64;
    let mut scaled = 1.0_f64;
    for k in 0..(m - 1) {
        let kf = k as f64;
        ln_term += ((m - 1) as f64 - kf).ln() - 2.0 * (kf + 1.0).ln() + ln_z;
        if ln_term > ln_max {
            scaled = scaled * (ln_max - ln_term).exp() + 1.0;
            ln_max = ln_term;
        } else {
            scaled += (ln_term - ln_max).exp();
        }
    }
    Ok(z + ln_max + scaled.ln())
}

/// `ln ₁F₁(m; 1; z)` for real `m > 0`, `z ≥ 0`. Integer `m` takes the exact
/// Kummer sum; other `m` fall back to the power series
/// `Σ (m)_k z^k / (k!)²` with a term-ratio stopping test.
pub fn ln_hyp1f1_b1(m: f64, z: f64) -> Result<f64> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(QosError::domain(format!(
            "1F1 first parameter must be positive, got {m}"
        )));
    }
    if m.fract() == 0.0 && m <= u32::MAX as f64 {
        return ln_hyp1f1_integer(m as u32, z);
    }
    if !(z >= 0.0 && z.is_finite()) {
        return Err(QosError::domain(format!(
            "1F1 argument must be finite and >= 0, got {z}"
        )));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    let ln_z = z.ln();
    let mut ln_term = 0.0_f64;
    let mut ln_max = 0.0_f64;
    let mut scaled = 1.0_f64;
    for k in 0..SERIES_BUDGET {
        let kf = k as f64;
        ln_term += (m + kf).ln() + ln_z - 2.0 * (kf + 1.0).ln();
        if ln_term > ln_max {
            scaled = scaled * (ln_max - ln_term).exp() + 1.0;
            ln_max = ln_term;
        } else {
            let rel = (ln_term - ln_max).exp();
            scaled += rel;
            // Past the peak the term ratio (m+k)z/(k+1)² keeps falling, so
            // the remaining tail is bounded by a geometric series.
            let ratio = (m + kf + 1.0) * z / ((kf + 2.0) * (kf + 2.0));
            if ratio < 1.0 && rel / (1.0 - ratio) < 1e-17 * scaled {
                return Ok(ln_max + scaled.ln());
            }
        }
    }
    Err(QosError::numeric(
        format!("1F1 power series did not converge within {SERIES_BUDGET} terms"),
        (ln_term - ln_max).exp(),
    ))
}

/// Gaussian tail `Q(x) = ½ erfc(x/√2)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// `ln Q(x)`, accurate deep into the upper tail where `Q` underflows.
pub fn ln_q_function(x: f64) -> f64 {
    if x < 30.0 {
        return q_function(x).ln();
    }
    // Asymptotic Mills-ratio expansion.
    let inv2 = 1.0 / (x * x);
    let series = 1.0 - inv2 + 3.0 * inv2 * inv2 - 15.0 * inv2 * inv2 * inv2;
    -0.5 * x * x - (x * (2.0 * std::f64::consts::PI).sqrt()).ln() + series.ln()
}

/// `ln Σ exp(values)`; `-∞` for an empty or all-`-∞` input.
pub fn log_sum_exp(values: impl IntoIterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    if max == f64::INFINITY {
        return max;
    }
    max + values.into_iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}
