//! Finite-blocklength coding: normal-approximation error probability and
//! Gallager-type error exponents.
//!
//! Rates are in nats per channel use throughout.

use std::cell::RefCell;
use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::channel::{Scenario, SinrModel};
use crate::error::{QosError, Result};
use crate::expect::{ErrorModel, Estimate, SinrExpectation, Target};
use crate::optimize::grid_golden_min;
use crate::report::{QosKind, QosReport};
use crate::special::{ln_q_function, q_function};

/// Blocklength, code size and rate.
///
/// The code size is carried as `log₂ M` so that large codebooks stay exact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodingSpec {
    pub blocklength: u32,
    pub code_size_bits: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_override: Option<f64>,
}

impl CodingSpec {
    pub fn new(blocklength: u32, code_size_bits: f64) -> Result<Self> {
        let s = CodingSpec {
            blocklength,
            code_size_bits,
            rate_override: None,
        };
        s.validate()?;
        Ok(s)
    }

    /// A spec with the rate fixed directly (nats per channel use). The code
    /// size is set consistently, `log₂ M = n R / ln 2`.
    pub fn with_rate(blocklength: u32, rate_nats: f64) -> Result<Self> {
        let s = CodingSpec {
            blocklength,
            code_size_bits: (blocklength as f64 * rate_nats / LN_2).max(1.0),
            rate_override: Some(rate_nats),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.blocklength < 1 {
            return Err(QosError::domain("blocklength must be >= 1"));
        }
        if !(self.code_size_bits >= 1.0 && self.code_size_bits.is_finite()) {
            return Err(QosError::domain(format!(
                "code size must be at least 2 messages (log2 M >= 1), got log2 M = {}",
                self.code_size_bits
            )));
        }
        if let Some(r) = self.rate_override {
            if !(r > 0.0 && r.is_finite()) {
                return Err(QosError::domain(format!("rate must be > 0, got {r}")));
            }
        }
        Ok(())
    }

    /// `R* = ln M / n` unless overridden.
    pub fn rate(&self) -> f64 {
        self.rate_override
            .unwrap_or(self.code_size_bits * LN_2 / self.blocklength as f64)
    }

    pub fn n(&self) -> f64 {
        self.blocklength as f64
    }
}

/// `C(γ) = ln(1+γ)`.
pub fn capacity_nats(gamma: f64) -> f64 {
    gamma.ln_1p()
}

/// `V(γ) = 1 − (1+γ)^{−2}`.
pub fn dispersion(gamma: f64) -> f64 {
    let inv = 1.0 / (1.0 + gamma);
    // 1 − inv² = γ(2+γ)/(1+γ)², accurate for small γ
    gamma * (2.0 + gamma) * inv * inv
}

fn q_argument(gamma: f64, spec: &CodingSpec) -> Option<f64> {
    let v = dispersion(gamma);
    if v <= 0.0 {
        return None;
    }
    Some((capacity_nats(gamma) - spec.rate()) / (v / spec.n()).sqrt())
}

/// Normal-approximation block error probability at SINR `gamma`.
pub fn conditional_error(gamma: f64, spec: &CodingSpec) -> f64 {
    match q_argument(gamma, spec) {
        Some(x) => q_function(x).clamp(0.0, 1.0),
        None => 1.0,
    }
}

/// `ln` of [`conditional_error`], finite far into the tail.
pub fn ln_conditional_error(gamma: f64, spec: &CodingSpec) -> f64 {
    match q_argument(gamma, spec) {
        Some(x) => ln_q_function(x).min(0.0),
        None => 0.0,
    }
}

/// `E_γ[ε(γ)]` over an SINR distribution.
pub fn average_error_model(model: &SinrModel, spec: &CodingSpec, em: &ErrorModel) -> Result<Estimate> {
    spec.validate()?;
    let e = SinrExpectation::new(model, em)?;
    let est = e.expect(|g| ln_conditional_error(g, spec), Target::Absolute)?;
    Ok(Estimate {
        value: est.value.clamp(0.0, 1.0),
        std_error: est.std_error,
    })
}

/// Average decoding error probability of the scenario's satellite link.
pub fn average_error(s: &Scenario, spec: &CodingSpec, em: &ErrorModel) -> Result<Estimate> {
    average_error_model(&s.sinr_model()?, spec, em)
}

fn check_rho(rho: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(QosError::domain(format!("rho must lie in [0, 1], got {rho}")));
    }
    Ok(())
}

fn e0_with(e: &SinrExpectation<'_>, rho: f64, n: f64) -> Result<Estimate> {
    if rho == 0.0 {
        return Ok(Estimate {
            value: 0.0,
            std_error: None,
        });
    }
    let l = e.log_expect(|g| -n * rho * (g / (1.0 + rho)).ln_1p(), Target::Relative)?;
    Ok(Estimate {
        value: (-l.log_value / n).max(0.0),
        std_error: l.rel_std_error.map(|r| r / n),
    })
}

/// `E0(ρ) = −(1/n) ln E[(1 + γ/(1+ρ))^{−nρ}]`.
pub fn gallager_e0_model(rho: f64, model: &SinrModel, n: u32, em: &ErrorModel) -> Result<Estimate> {
    check_rho(rho)?;
    if n < 1 {
        return Err(QosError::domain("blocklength must be >= 1"));
    }
    let e = SinrExpectation::new(model, em)?;
    e0_with(&e, rho, n as f64)
}

pub fn gallager_e0(rho: f64, s: &Scenario, n: u32, em: &ErrorModel) -> Result<Estimate> {
    gallager_e0_model(rho, &s.sinr_model()?, n, em)
}

/// Result of the `ρ` maximization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorExponent {
    pub theta: f64,
    pub rho_star: f64,
    /// `E0(ρ*)`.
    pub e0: f64,
    pub rate: f64,
    pub blocklength: u32,
}

impl ErrorExponent {
    pub fn report(&self, seed: u64) -> QosReport {
        let bound = (-(self.blocklength as f64) * self.theta).exp();
        QosReport {
            kind: QosKind::Error,
            theta: self.theta,
            threshold: self.rate,
            kernel: self.e0,
            bound,
            raw_bound: bound,
            stable: true,
            seed,
        }
    }
}

const RHO_GRID: usize = 64;
const RHO_TOL: f64 = 1e-6;

/// `θ_error = sup_{ρ∈[0,1]} E0(ρ) − ρR`.
pub fn error_exponent_model(model: &SinrModel, spec: &CodingSpec, em: &ErrorModel) -> Result<ErrorExponent> {
    spec.validate()?;
    let e = SinrExpectation::new(model, em)?;
    let n = spec.n();
    let rate = spec.rate();
    let failure: RefCell<Option<QosError>> = RefCell::new(None);
    let (rho, neg) = grid_golden_min(
        |rho| match e0_with(&e, rho, n) {
            Ok(v) => rho * rate - v.value,
            Err(err) => {
                failure.borrow_mut().get_or_insert(err);
                f64::NAN
            }
        },
        0.0,
        1.0,
        RHO_GRID,
        RHO_TOL,
    );
    if let Some(err) = failure.into_inner() {
        return Err(err);
    }
    let (theta, rho_star) = if -neg > 0.0 { (-neg, rho) } else { (0.0, 0.0) };
    Ok(ErrorExponent {
        theta,
        rho_star,
        e0: theta + rho_star * rate,
        rate,
        blocklength: spec.blocklength,
    })
}

pub fn error_exponent(s: &Scenario, spec: &CodingSpec, em: &ErrorModel) -> Result<ErrorExponent> {
    error_exponent_model(&s.sinr_model()?, spec, em)
}

/// Closed-form approximation of the error exponent from transmit SNRs:
/// `(L − R)² / (4 − 2r)` with `r = (2N_R S + 1)/(2 N_R P_s + 2 N_R S + 1)`,
/// `L = −ln r` and `S` the summed interferer transmit SNR. Zero once `R ≥ L`.
pub fn closed_form_exponent(ps: f64, pt_sum: f64, rx_antennas: u32, rate: f64) -> Result<f64> {
    if !(ps >= 0.0 && ps.is_finite() && pt_sum >= 0.0 && pt_sum.is_finite()) {
        return Err(QosError::domain("transmit SNRs must be finite and >= 0"));
    }
    if rx_antennas < 1 {
        return Err(QosError::domain("rx_antennas must be >= 1"));
    }
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(QosError::domain(format!("rate must be > 0, got {rate}")));
    }
    let nr = rx_antennas as f64;
    let inner = 2.0 * nr * pt_sum + 1.0;
    let outer = 2.0 * ps * nr + inner;
    let log_ratio = (outer / inner).ln();
    let denom = 4.0 - 2.0 * inner / outer;
    if denom <= 0.0 {
        return Err(QosError::domain(format!(
            "closed-form denominator {denom} is not positive"
        )));
    }
    if rate >= log_ratio {
        return Ok(0.0);
    }
    Ok((log_ratio - rate).powi(2) / denom)
}

/// [`closed_form_exponent`] for a scenario: satellite transmit SNR against
/// the summed transmit SNR of its `K` interferers.
pub fn error_exponent_closed_form(s: &Scenario, spec: &CodingSpec) -> Result<f64> {
    s.validate()?;
    spec.validate()?;
    let pt_sum = s.interferers.count as f64 * s.interferers.link.tx_snr();
    closed_form_exponent(s.satellite.tx_snr(), pt_sum, s.rx_antennas, spec.rate())
}
