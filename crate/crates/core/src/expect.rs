//! Expectations over the SINR distribution.
//!
//! Two independent routes: Monte Carlo over fading and interferer draws, or
//! deterministic quadrature. The quadrature integrates the shadowed-Rician
//! density adaptively for each interference level and averages the unit
//! exponential interferer gains with a tensor Gauss–Laguerre rule whose
//! order grows until successive orders agree.
//!
//! Everything is computed in log space so that integrands such as
//! `(1+γ)^{−nρ}` at large `n` do not underflow.

use std::cell::Cell;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{FadingLink, SinrModel};
use crate::error::{QosError, Result};
use crate::quad::{integrate_to_infinity, GaussLaguerre, QuadOptions};
use crate::special::log_sum_exp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Quadrature,
    MonteCarlo,
}

/// How expectations over the channel are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorModel {
    pub method: Method,
    /// Draws used in Monte Carlo mode.
    pub sample_budget: usize,
    /// Quadrature tolerance.
    pub quad_tolerance: f64,
}

impl Default for ErrorModel {
    fn default() -> Self {
        ErrorModel {
            method: Method::Quadrature,
            sample_budget: 100_000,
            quad_tolerance: 1e-9,
        }
    }
}

impl ErrorModel {
    pub fn monte_carlo(sample_budget: usize) -> Self {
        ErrorModel {
            method: Method::MonteCarlo,
            sample_budget,
            ..Default::default()
        }
    }

    pub fn quadrature(quad_tolerance: f64) -> Self {
        ErrorModel {
            method: Method::Quadrature,
            quad_tolerance,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.method == Method::MonteCarlo && self.sample_budget < 1000 {
            return Err(QosError::domain(format!(
                "sample_budget must be >= 1000 in Monte Carlo mode, got {}",
                self.sample_budget
            )));
        }
        if !(self.quad_tolerance > 0.0 && self.quad_tolerance <= 1e-3) {
            return Err(QosError::domain(format!(
                "quad_tolerance must lie in (0, 1e-3], got {}",
                self.quad_tolerance
            )));
        }
        Ok(())
    }
}

/// A value with an optional Monte Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: Option<f64>,
}

/// `ln E[·]` with the relative standard error of `E[·]` in Monte Carlo mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogEstimate {
    pub log_value: f64,
    pub rel_std_error: Option<f64>,
}

/// Whether `quad_tolerance` bounds the absolute or the relative error of
/// the expectation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Absolute,
    Relative,
}

/// Largest tensor Gauss–Laguerre grid tried before giving up.
const TENSOR_BUDGET: usize = 300_000;

enum Engine<'a> {
    Constant(f64),
    Samples(Vec<f64>),
    Quadrature { link: &'a FadingLink, tol: f64 },
}

/// An expectation operator over one SINR model, reusable across integrands.
pub struct SinrExpectation<'a> {
    engine: Engine<'a>,
}

impl<'a> SinrExpectation<'a> {
    pub fn new(model: &'a SinrModel, em: &ErrorModel) -> Result<Self> {
        model.validate()?;
        em.validate()?;
        let engine = match (model, em.method) {
            (SinrModel::Constant(g), _) => Engine::Constant(*g),
            (SinrModel::Fading(link), Method::MonteCarlo) => Engine::Samples(link.draw(em.sample_budget)?),
            (SinrModel::Fading(link), Method::Quadrature) => Engine::Quadrature {
                link,
                tol: em.quad_tolerance,
            },
        };
        Ok(SinrExpectation { engine })
    }

    /// `ln E[exp(log_f(γ))]`.
    pub fn log_expect<F>(&self, log_f: F, target: Target) -> Result<LogEstimate>
    where
        F: Fn(f64) -> f64 + Sync,
    {
        match &self.engine {
            Engine::Constant(g) => Ok(LogEstimate {
                log_value: log_f(*g),
                rel_std_error: None,
            }),
            Engine::Samples(samples) => Ok(log_mean_exp(samples, &log_f)),
            Engine::Quadrature { link, tol } => quadrature(link, &log_f, *tol, target).map(|l| LogEstimate {
                log_value: l,
                rel_std_error: None,
            }),
        }
    }

    /// Plain-domain `E[f(γ)]` for a nonnegative `f` given through its log.
    pub fn expect<F>(&self, log_f: F, target: Target) -> Result<Estimate>
    where
        F: Fn(f64) -> f64 + Sync,
    {
        let l = self.log_expect(log_f, target)?;
        let value = l.log_value.exp();
        Ok(Estimate {
            value,
            std_error: l.rel_std_error.map(|r| r * value),
        })
    }
}

fn log_mean_exp<F: Fn(f64) -> f64 + Sync>(samples: &[f64], log_f: &F) -> LogEstimate {
    // Fixed chunking keeps the reduction order independent of thread count.
    let parts: Vec<(f64, f64, f64)> = samples
        .par_chunks(4096)
        .map(|chunk| {
            let logs: Vec<f64> = chunk.iter().map(|&g| log_f(g)).collect();
            let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if max == f64::NEG_INFINITY {
                return (max, 0.0, 0.0);
            }
            let (s1, s2) = logs.iter().fold((0.0, 0.0), |(a, b), &l| {
                let e = (l - max).exp();
                (a + e, b + e * e)
            });
            (max, s1, s2)
        })
        .collect();
    let max = parts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let n = samples.len() as f64;
    if max == f64::NEG_INFINITY {
        return LogEstimate {
            log_value: f64::NEG_INFINITY,
            rel_std_error: Some(0.0),
        };
    }
    let (s1, s2) = parts.iter().fold((0.0, 0.0), |(a, b), &(m, p1, p2)| {
        if m == f64::NEG_INFINITY {
            (a, b)
        } else {
            let scale = (m - max).exp();
            (a + p1 * scale, b + p2 * scale * scale)
        }
    });
    let mean = s1 / n;
    let var = ((s2 / n - mean * mean) * n / (n - 1.0)).max(0.0);
    LogEstimate {
        log_value: max + mean.ln(),
        rel_std_error: Some((var / n).sqrt() / mean),
    }
}

fn quadrature<F: Fn(f64) -> f64 + Sync>(link: &FadingLink, log_f: &F, tol: f64, target: Target) -> Result<f64> {
    let weights = &link.interferer_weights;
    if weights.is_empty() {
        return inner_integral(link, log_f, 0.0, tol, target);
    }
    let k = weights.len();
    let mut previous: Option<f64> = None;
    let mut last_gap = f64::INFINITY;
    for order in 2usize.. {
        let nodes = order.checked_pow(k as u32).filter(|&n| n <= TENSOR_BUDGET);
        let Some(total) = nodes else {
            return Err(QosError::numeric(
                format!("interference quadrature over {k} interferers exceeded {TENSOR_BUDGET} nodes"),
                last_gap,
            ));
        };
        let rule = GaussLaguerre::new(order)?;
        let ln_w: Vec<f64> = rule.weights.iter().map(|w| w.ln()).collect();
        let terms: Vec<Result<f64>> = (0..total)
            .into_par_iter()
            .map(|flat| {
                let mut idx = flat;
                let mut interference = 0.0;
                let mut ln_weight = 0.0;
                for w in weights {
                    let i = idx % order;
                    idx /= order;
                    interference += w * rule.nodes[i];
                    ln_weight += ln_w[i];
                }
                Ok(ln_weight + inner_integral(link, log_f, interference, tol, target)?)
            })
            .collect();
        let terms = terms.into_iter().collect::<Result<Vec<f64>>>()?;
        let current = log_sum_exp(terms.iter().copied());
        if let Some(prev) = previous {
            let (converged, gap) = close_enough(current, prev, tol, target);
            last_gap = gap;
            if converged {
                return Ok(current);
            }
        }
        previous = Some(current);
    }
    unreachable!()
}

/// Compares two log-domain values against the tolerance target; returns the
/// verdict and the gap in the target's units.
fn close_enough(a: f64, b: f64, tol: f64, target: Target) -> (bool, f64) {
    if a == f64::NEG_INFINITY && b == f64::NEG_INFINITY {
        return (true, 0.0);
    }
    let hi = a.max(b);
    let rel = -(-(a - b).abs()).exp_m1();
    match target {
        Target::Relative => (rel <= tol, rel),
        Target::Absolute => {
            let abs = hi.exp() * rel;
            (abs <= tol, abs)
        }
    }
}

/// `ln ∫ exp(log_f(s·x/(1+I))) pdf(x) dx` for a fixed interference level.
fn inner_integral<F: Fn(f64) -> f64>(
    link: &FadingLink,
    log_f: &F,
    interference: f64,
    tol: f64,
    target: Target,
) -> Result<f64> {
    let fading = &link.fading;
    let scale = link.signal_scale / (1.0 + interference);
    let failure: Cell<Option<QosError>> = Cell::new(None);
    let log_integrand = |x: f64| -> f64 {
        match fading.ln_pdf(x) {
            Ok(lp) if lp == f64::NEG_INFINITY => lp,
            Ok(lp) => lp + log_f(scale * x),
            Err(e) => {
                failure.set(Some(e));
                f64::NAN
            }
        }
    };
    let width = fading.mean_power();
    let shift = std::iter::once(0.0)
        .chain((-40..8).map(|k| width * 2f64.powi(k)))
        .map(log_integrand)
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if let Some(e) = failure.take() {
        return Err(e);
    }
    if shift == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    let opts = match target {
        Target::Absolute => QuadOptions {
            abs: tol * (-shift).exp(),
            rel: 1e-13,
            max_segments: 4000,
        },
        Target::Relative => QuadOptions {
            abs: 1e-300,
            rel: tol,
            max_segments: 4000,
        },
    };
    let integral = integrate_to_infinity(
        |x| {
            let v = log_integrand(x);
            if v.is_nan() {
                v
            } else {
                (v - shift).exp()
            }
        },
        0.0,
        width,
        opts,
    );
    if let Some(e) = failure.take() {
        return Err(e);
    }
    let integral = integral?;
    Ok(shift + integral.value.max(0.0).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ShadowedRicianParams;
    use approx::assert_relative_eq;

    fn link(weights: Vec<f64>) -> SinrModel {
        SinrModel::Fading(FadingLink {
            fading: ShadowedRicianParams::new(0.126, 10.0, 0.835).unwrap(),
            signal_scale: 5.0,
            interferer_weights: weights,
            seed: 9,
        })
    }

    #[test]
    fn quadrature_recovers_mean_sinr_without_interference() {
        let model = link(vec![]);
        let e = SinrExpectation::new(&model, &ErrorModel::quadrature(1e-10)).unwrap();
        let mean = e.expect(|g| g.ln(), Target::Relative).unwrap();
        assert_relative_eq!(mean.value, 5.0 * (0.835 + 0.252), max_relative = 1e-8);
    }

    #[test]
    fn quadrature_handles_interference_expectation() {
        // E[1/(1+wE)] = (1/w) e^{1/w} E1(1/w); for w = 1: e·E1(1) = 0.596347362...
        let model = link(vec![1.0]);
        let e = SinrExpectation::new(&model, &ErrorModel::quadrature(1e-8)).unwrap();
        let got = e.expect(|g| g.ln(), Target::Relative).unwrap().value;
        assert_relative_eq!(got, 5.0 * 1.087 * 0.596_347_362_323_194, max_relative = 1e-6);
    }

    #[test]
    fn monte_carlo_standard_error_is_reported() {
        let model = link(vec![0.5, 0.2]);
        let e = SinrExpectation::new(&model, &ErrorModel::monte_carlo(50_000)).unwrap();
        let est = e.expect(|g| (-g).exp().ln(), Target::Absolute).unwrap();
        let se = est.std_error.unwrap();
        assert!(se > 0.0 && se < 0.01);
        let q = SinrExpectation::new(&model, &ErrorModel::quadrature(1e-9))
            .unwrap()
            .expect(|g| -g, Target::Absolute)
            .unwrap();
        assert!((est.value - q.value).abs() < 4.0 * se);
    }

    #[test]
    fn constant_model_is_exact() {
        let model = SinrModel::Constant(2.0);
        let e = SinrExpectation::new(&model, &ErrorModel::default()).unwrap();
        let l = e.log_expect(|g| -1000.0 * g, Target::Relative).unwrap();
        assert_eq!(l.log_value, -2000.0);
    }

    #[test]
    fn error_model_validation() {
        assert!(ErrorModel::monte_carlo(999).validate().is_err());
        assert!(ErrorModel::quadrature(1e-2).validate().is_err());
        assert!(ErrorModel::quadrature(0.0).validate().is_err());
        assert!(ErrorModel::default().validate().is_ok());
    }

    #[test]
    fn mc_reduction_ignores_thread_count() {
        let model = link(vec![0.5]);
        let em = ErrorModel::monte_carlo(20_000);
        let a = SinrExpectation::new(&model, &em)
            .unwrap()
            .log_expect(|g| -g, Target::Absolute)
            .unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| {
            SinrExpectation::new(&model, &em)
                .unwrap()
                .log_expect(|g| -g, Target::Absolute)
                .unwrap()
        });
        assert_eq!(a, b);
    }
}
