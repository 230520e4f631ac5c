//! Mellin-transform network calculus for the status-update queue.
//!
//! Transforms use the `E[e^{(θ−1)T}]` convention: a Mellin transform at `θ`
//! is the moment generating function of the underlying time at `θ − 1`.
//! Kernels are evaluated in log space.

use serde::{Deserialize, Serialize};

use crate::aoi::{ArrivalModel, ServiceModel};
use crate::channel::Scenario;
use crate::error::{QosError, Result};
use crate::expect::ErrorModel;
use crate::fbc::{average_error, CodingSpec};
use crate::optimize::{bisect, grid_golden_min};
use crate::report::{QosKind, QosReport};
use crate::special::log_sum_exp;

/// Relative tail at which steady-state kernel sums stop.
pub const TAIL_TOLERANCE: f64 = 1e-12;
/// Kernel values above this are flagged as close to the stability pole.
pub const POLE_WARNING: f64 = 1e6;
const MAX_TERMS: usize = 1 << 52;
const OPT_GRID: usize = 200;

/// `ln E[e^{(θ−1)T}]` for the sum `T` of `steps` inter-arrival gaps.
pub fn ln_mellin_interarrival(theta: f64, am: &ArrivalModel, steps: usize) -> Result<f64> {
    am.validate()?;
    if steps == 0 {
        return Ok(0.0);
    }
    let s = theta - 1.0;
    let per = match *am {
        ArrivalModel::Deterministic { period } => s * period,
        ArrivalModel::Poisson { rate } => {
            if s >= rate {
                return Err(QosError::domain(format!(
                    "Poisson inter-arrival transform diverges: theta - 1 = {s} must be < rate {rate}"
                )));
            }
            (rate / (rate - s)).ln()
        }
    };
    Ok(per * steps as f64)
}

pub fn mellin_interarrival(theta: f64, am: &ArrivalModel, steps: usize) -> Result<f64> {
    Ok(ln_mellin_interarrival(theta, am, steps)?.exp())
}

/// `ln E[e^{(θ−1)S}]^count` for i.i.d. service times.
pub fn ln_mellin_cumulative_service(theta: f64, sm: &ServiceModel, count: usize) -> Result<f64> {
    sm.validate()?;
    if count == 0 {
        return Ok(0.0);
    }
    let s = theta - 1.0;
    let per = match *sm {
        ServiceModel::Fixed { n } => s * n as f64,
        ServiceModel::Arq { n, epsilon } => {
            let x = s * n as f64;
            if epsilon > 0.0 && x >= -epsilon.ln() {
                return Err(QosError::domain(format!(
                    "ARQ service transform diverges: (theta - 1) n = {x} must be < ln(1/epsilon) = {}",
                    -epsilon.ln()
                )));
            }
            (-epsilon).ln_1p() + x - (-epsilon * x.exp()).ln_1p()
        }
    };
    Ok(per * count as f64)
}

pub fn mellin_cumulative_service(theta: f64, sm: &ServiceModel, count: usize) -> Result<f64> {
    Ok(ln_mellin_cumulative_service(theta, sm, count)?.exp())
}

/// How many updates the peak-AoI kernel sums over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Horizon {
    /// Update index `u`.
    Update(usize),
    /// `u → ∞`.
    Steady,
}

/// `ln K(θ, u)` with
/// `K = M_I(1+θ, 1) Σ_{v=1}^{u} M_S(1+θ, u−v+1) M_I(1−θ, u−v)`.
pub fn ln_paoi_kernel(theta: f64, horizon: Horizon, am: &ArrivalModel, sm: &ServiceModel) -> Result<f64> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(QosError::domain(format!("theta must be finite and > 0, got {theta}")));
    }
    let lead = ln_mellin_interarrival(1.0 + theta, am, 1)?;
    let term = |k: usize| -> Result<f64> {
        Ok(ln_mellin_cumulative_service(1.0 + theta, sm, k + 1)? + ln_mellin_interarrival(1.0 - theta, am, k)?)
    };
    match horizon {
        Horizon::Update(0) => Err(QosError::domain("update index u must be >= 1")),
        Horizon::Update(u) => {
            let terms = (0..u).map(term).collect::<Result<Vec<f64>>>()?;
            Ok(lead + log_sum_exp(terms.iter().copied()))
        }
        Horizon::Steady => {
            // Terms are geometric in k with log-ratio `d`. The sum stops at the
            // first term below TAIL_TOLERANCE of the partial sum, which has a
            // closed-form index.
            let first = term(0)?;
            let d = term(1)? - first;
            if d >= 0.0 {
                return Err(QosError::stability(
                    "peak-AoI kernel terms do not decay; the queue is unstable at this theta",
                    d.exp(),
                ));
            }
            let ln_one_minus_r = (-d.exp_m1()).ln();
            let terms = ((TAIL_TOLERANCE.ln() + ln_one_minus_r) / d).ceil().max(0.0) + 1.0;
            if terms > MAX_TERMS as f64 {
                return Err(QosError::numeric(
                    format!("steady-state kernel needs more than {MAX_TERMS} terms"),
                    d.exp(),
                ));
            }
            Ok(lead + first + (-(terms * d).exp_m1()).ln() - ln_one_minus_r)
        }
    }
}

pub fn paoi_kernel(theta: f64, horizon: Horizon, am: &ArrivalModel, sm: &ServiceModel) -> Result<f64> {
    Ok(ln_paoi_kernel(theta, horizon, am, sm)?.exp())
}

fn check_threshold(x: f64, what: &str) -> Result<()> {
    if !(x >= 0.0 && x.is_finite()) {
        return Err(QosError::domain(format!("{what} must be finite and >= 0, got {x}")));
    }
    Ok(())
}

/// `min(1, e^{−θ A_th / n} K(θ, u))`.
pub fn paoi_bound(
    theta: f64,
    a_th: f64,
    n: u32,
    horizon: Horizon,
    am: &ArrivalModel,
    sm: &ServiceModel,
) -> Result<QosReport> {
    check_threshold(a_th, "a_th")?;
    if n < 1 {
        return Err(QosError::domain("n must be >= 1"));
    }
    let ln_k = ln_paoi_kernel(theta, horizon, am, sm)?;
    let ln_raw = -theta * a_th / n as f64 + ln_k;
    Ok(QosReport {
        kind: QosKind::Aoi,
        theta,
        threshold: a_th,
        kernel: ln_k.exp(),
        bound: ln_raw.exp().min(1.0),
        raw_bound: ln_raw.exp(),
        stable: true,
        seed: 0,
    })
}

/// Upper end of the transform-finite interval for `θ` at `1+θ`.
fn paoi_domain_limit(am: &ArrivalModel, sm: &ServiceModel) -> f64 {
    let arrival = match *am {
        ArrivalModel::Poisson { rate } => rate,
        ArrivalModel::Deterministic { .. } => f64::INFINITY,
    };
    let service = match *sm {
        ServiceModel::Arq { n, epsilon } if epsilon > 0.0 => -epsilon.ln() / n as f64,
        _ => f64::INFINITY,
    };
    arrival.min(service)
}

/// Open interval `(0, hi)` of `θ` over which the peak-AoI kernel is finite.
pub fn paoi_feasible_interval(horizon: Horizon, am: &ArrivalModel, sm: &ServiceModel) -> Result<(f64, f64)> {
    am.validate()?;
    sm.validate()?;
    let load = sm.mean() / am.mean_gap();
    let domain = paoi_domain_limit(am, sm);
    let cap = 50.0 / (sm.mean() + am.mean_gap());
    if horizon != Horizon::Steady {
        return Ok((0.0, if domain.is_finite() { domain } else { cap }));
    }
    if load >= 1.0 {
        return Err(QosError::stability(
            format!(
                "mean service {} is not below the mean inter-arrival gap {}",
                sm.mean(),
                am.mean_gap()
            ),
            load,
        ));
    }
    let ratio = |theta: f64| -> f64 {
        match (
            ln_mellin_cumulative_service(1.0 + theta, sm, 1),
            ln_mellin_interarrival(1.0 - theta, am, 1),
        ) {
            (Ok(a), Ok(b)) => a + b,
            _ => f64::INFINITY,
        }
    };
    let hi = if domain.is_finite() {
        domain * (1.0 - 1e-12)
    } else {
        cap
    };
    if ratio(hi) < 0.0 {
        return Ok((0.0, hi));
    }
    Ok((0.0, bisect(ratio, hi * 1e-12, hi, hi * 1e-14)))
}

/// Minimizes [`paoi_bound`] over the feasible `θ` interval.
pub fn optimize_paoi_bound(
    a_th: f64,
    n: u32,
    horizon: Horizon,
    am: &ArrivalModel,
    sm: &ServiceModel,
) -> Result<QosReport> {
    check_threshold(a_th, "a_th")?;
    if n < 1 {
        return Err(QosError::domain("n must be >= 1"));
    }
    let (_, hi) = paoi_feasible_interval(horizon, am, sm)?;
    if !(hi > 0.0) {
        return Err(QosError::stability("empty feasible theta interval", 1.0));
    }
    let objective = |theta: f64| match ln_paoi_kernel(theta, horizon, am, sm) {
        Ok(k) => -theta * a_th / n as f64 + k,
        Err(_) => f64::INFINITY,
    };
    let (theta, value) = grid_golden_min(objective, hi * 1e-6, hi * (1.0 - 1e-9), OPT_GRID, hi * 1e-10);
    if !value.is_finite() {
        return Err(QosError::numeric(
            "peak-AoI bound is not finite anywhere on the feasible interval",
            value,
        ));
    }
    paoi_bound(theta, a_th, n, horizon, am, sm)
}

/// Arrivals to the bit-level queue per coding block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BlockArrival {
    /// `α` bits every block.
    ConstantRate { bits_per_block: u64 },
    /// A Poisson(`rate`) number of `batch_bits`-bit batches per block.
    PoissonBatch { rate: f64, batch_bits: u64 },
}

impl BlockArrival {
    pub fn validate(&self) -> Result<()> {
        match *self {
            BlockArrival::ConstantRate { bits_per_block: 0 } => {
                Err(QosError::domain("constant arrival rate must be >= 1 bit per block"))
            }
            BlockArrival::PoissonBatch { rate, batch_bits } => {
                if !(rate > 0.0 && rate.is_finite()) {
                    return Err(QosError::domain(format!("batch rate must be > 0, got {rate}")));
                }
                if batch_bits == 0 {
                    return Err(QosError::domain("batch size must be >= 1 bit"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// `ln M_A(θ)` for one block.
    pub fn ln_mellin(&self, theta: f64) -> f64 {
        let s = theta - 1.0;
        match *self {
            BlockArrival::ConstantRate { bits_per_block } => s * bits_per_block as f64,
            BlockArrival::PoissonBatch { rate, batch_bits } => rate * (s * batch_bits as f64).exp_m1(),
        }
    }

    pub fn mean_bits(&self) -> f64 {
        match *self {
            BlockArrival::ConstantRate { bits_per_block } => bits_per_block as f64,
            BlockArrival::PoissonBatch { rate, batch_bits } => rate * batch_bits as f64,
        }
    }
}

/// Per-block service: `log₂ M` bits on success, nothing on a decoding error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockService {
    pub bits_per_block: u64,
    pub epsilon: f64,
}

impl BlockService {
    /// Service from a code with an integral number of bits per block.
    pub fn from_coding(spec: &CodingSpec, epsilon: f64) -> Result<Self> {
        spec.validate()?;
        if spec.code_size_bits.fract() != 0.0 {
            return Err(QosError::domain(format!(
                "the block queue needs an integral log2 M, got {}",
                spec.code_size_bits
            )));
        }
        let s = BlockService {
            bits_per_block: spec.code_size_bits as u64,
            epsilon,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.bits_per_block == 0 {
            return Err(QosError::domain("service must carry >= 1 bit per block"));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(QosError::domain(format!(
                "epsilon must lie in [0, 1], got {}",
                self.epsilon
            )));
        }
        Ok(())
    }

    /// `M_S(θ) = ε + (1−ε) e^{(θ−1) log₂ M}`.
    pub fn mellin(&self, theta: f64) -> f64 {
        self.epsilon + (1.0 - self.epsilon) * ((theta - 1.0) * self.bits_per_block as f64).exp()
    }

    pub fn mean_bits(&self) -> f64 {
        (1.0 - self.epsilon) * self.bits_per_block as f64
    }
}

/// `M_S(θ) = E[ε] + E[1−ε] e^{(θ−1) log₂ M}` with `E[ε]` the scenario's
/// average decoding error.
pub fn mellin_service_process(theta: f64, spec: &CodingSpec, s: &Scenario, em: &ErrorModel) -> Result<f64> {
    let eps = average_error(s, spec, em)?.value;
    Ok(eps + (1.0 - eps) * ((theta - 1.0) * spec.code_size_bits).exp())
}

/// Outcome of the stability test `M_A(1+θ) M_S(1−θ) < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stability {
    pub stable: bool,
    pub margin: f64,
}

pub fn stability_check(theta: f64, arrival: &BlockArrival, service: &BlockService) -> Stability {
    let margin = (arrival.ln_mellin(1.0 + theta)).exp() * service.mellin(1.0 - theta);
    Stability {
        stable: margin < 1.0,
        margin,
    }
}

fn ln_delay_product(theta: f64, arrival: &BlockArrival, service: &BlockService) -> f64 {
    arrival.ln_mellin(1.0 + theta) + service.mellin(1.0 - theta).ln()
}

/// `ln K̃ = D_th ln M_S(1−θ) − ln(1 − M_A(1+θ) M_S(1−θ))`.
pub fn ln_delay_kernel(theta: f64, d_th: u64, arrival: &BlockArrival, service: &BlockService) -> Result<f64> {
    arrival.validate()?;
    service.validate()?;
    let product = ln_delay_product(theta, arrival, service);
    if product >= 0.0 || product.is_nan() {
        return Err(QosError::stability(
            format!("M_A(1+theta) M_S(1-theta) >= 1 at theta = {theta}"),
            product.exp(),
        ));
    }
    Ok(d_th as f64 * service.mellin(1.0 - theta).ln() - (-product.exp_m1()).ln())
}

pub fn delay_kernel(theta: f64, d_th: u64, arrival: &BlockArrival, service: &BlockService) -> Result<f64> {
    Ok(ln_delay_kernel(theta, d_th, arrival, service)?.exp())
}

/// Open interval `(0, hi)` of `θ` satisfying the stability condition.
pub fn delay_stable_interval(arrival: &BlockArrival, service: &BlockService) -> Result<(f64, f64)> {
    arrival.validate()?;
    service.validate()?;
    let drift = arrival.mean_bits() - service.mean_bits();
    if drift >= 0.0 {
        return Err(QosError::stability(
            format!(
                "mean arrivals {} bits/block are not below mean service {} bits/block",
                arrival.mean_bits(),
                service.mean_bits()
            ),
            stability_check(1e-9 / service.bits_per_block as f64, arrival, service).margin,
        ));
    }
    let g = |theta: f64| ln_delay_product(theta, arrival, service);
    let scale = 1.0 / service.bits_per_block as f64;
    let cap = 700.0 * scale;
    let mut hi = scale;
    while g(hi) < 0.0 && hi < cap {
        hi *= 2.0;
    }
    if g(hi) < 0.0 {
        return Ok((0.0, hi));
    }
    Ok((0.0, bisect(g, hi * 1e-12, hi, hi * 1e-14)))
}

/// `inf_θ K̃(θ)` over the stable interval, clamped to `[0, 1]`.
pub fn delay_bound_for(d_th: u64, arrival: &BlockArrival, service: &BlockService) -> Result<QosReport> {
    let (_, hi) = delay_stable_interval(arrival, service)?;
    let (theta, ln_value) = grid_golden_min(
        |theta| ln_delay_kernel(theta, d_th, arrival, service).unwrap_or(f64::INFINITY),
        hi * 1e-6,
        hi * (1.0 - 1e-9),
        OPT_GRID,
        hi * 1e-10,
    );
    if !ln_value.is_finite() {
        return Err(QosError::numeric(
            "delay kernel is not finite on the stable interval",
            ln_value,
        ));
    }
    let raw = ln_value.exp();
    Ok(QosReport {
        kind: QosKind::Delay,
        theta,
        threshold: d_th as f64,
        kernel: raw,
        bound: raw.clamp(0.0, 1.0),
        raw_bound: raw,
        stable: true,
        seed: 0,
    })
}

/// Delay bound for the scenario's coded link.
pub fn delay_bound(
    d_th: u64,
    arrival: &BlockArrival,
    spec: &CodingSpec,
    s: &Scenario,
    em: &ErrorModel,
) -> Result<QosReport> {
    let eps = average_error(s, spec, em)?.value;
    let service = BlockService::from_coding(spec, eps)?;
    let mut r = delay_bound_for(d_th, arrival, &service)?;
    r.seed = s.seed;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use approx::assert_relative_eq;
    use rand_distr::{Distribution, Exp};

    const POISSON: ArrivalModel = ArrivalModel::Poisson { rate: 1.0 };

    #[test]
    fn transforms_at_one_are_one() {
        for am in [POISSON, ArrivalModel::Deterministic { period: 3.0 }] {
            assert_eq!(mellin_interarrival(1.0, &am, 4).unwrap(), 1.0);
        }
        for sm in [ServiceModel::Fixed { n: 7 }, ServiceModel::Arq { n: 7, epsilon: 0.3 }] {
            assert_eq!(mellin_cumulative_service(1.0, &sm, 4).unwrap(), 1.0);
        }
        let svc = BlockService {
            bits_per_block: 8,
            epsilon: 0.2,
        };
        assert_eq!(svc.mellin(1.0), 1.0);
        assert_eq!(BlockArrival::ConstantRate { bits_per_block: 3 }.ln_mellin(1.0), 0.0);
    }

    #[test]
    fn transform_examples() {
        assert_relative_eq!(
            mellin_interarrival(1.5, &POISSON, 1).unwrap(),
            2.0,
            max_relative = 1e-14
        );
        let det = ArrivalModel::Deterministic { period: 10.0 };
        assert_relative_eq!(
            mellin_interarrival(1.1, &det, 2).unwrap(),
            2f64.exp(),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            mellin_cumulative_service(1.01, &ServiceModel::Fixed { n: 100 }, 1).unwrap(),
            std::f64::consts::E,
            max_relative = 1e-12
        );
        let arq = ServiceModel::Arq { n: 10, epsilon: 0.1 };
        let expect = 0.9 * 0.5f64.exp() / (1.0 - 0.1 * 0.5f64.exp());
        assert_relative_eq!(
            mellin_cumulative_service(1.05, &arq, 1).unwrap(),
            expect,
            max_relative = 1e-12
        );
        assert!(mellin_interarrival(2.0, &POISSON, 1).is_err());
        assert!(mellin_cumulative_service(1.0 + 0.24, &arq, 1).is_err());
    }

    #[test]
    fn transform_mc_oracle() {
        let mut rng = stream(11, &[99]);
        let e = Exp::new(1.0).unwrap();
        let mean = (0..1_000_000)
            .map(|_| (0.5 * Distribution::<f64>::sample(&e, &mut rng)).exp())
            .sum::<f64>()
            / 1e6;
        assert!((mean - 2.0).abs() / 2.0 < 0.01);
        // ARQ n=10, ε=0.1 at θ=1.05: geometric attempts by inversion
        let arq = ServiceModel::Arq { n: 10, epsilon: 0.1 };
        let mean = (0..1_000_000)
            .map(|_| (0.05 * 10.0 * crate::aoi::arq_attempts(crate::rng::open_unit(&mut rng), 0.1) as f64).exp())
            .sum::<f64>()
            / 1e6;
        let exact = mellin_cumulative_service(1.05, &arq, 1).unwrap();
        assert!((mean - exact).abs() / exact < 0.01, "{mean} {exact}");
    }

    #[test]
    fn kernel_single_update_and_hand_sum() {
        let am = ArrivalModel::Deterministic { period: 10.0 };
        let sm = ServiceModel::Fixed { n: 4 };
        let theta = 0.05;
        let k1 = paoi_kernel(theta, Horizon::Update(1), &am, &sm).unwrap();
        assert_relative_eq!(
            k1,
            (theta * 10.0f64).exp() * (theta * 4.0f64).exp(),
            max_relative = 1e-14
        );
        let k3 = paoi_kernel(theta, Horizon::Update(3), &am, &sm).unwrap();
        let lead = (0.05f64 * 10.0).exp();
        let hand: f64 = (1..=3)
            .map(|v| {
                let count = (3 - v + 1) as f64;
                let steps = (3 - v) as f64;
                (0.05 * 4.0 * count).exp() * (-0.05 * 10.0 * steps).exp()
            })
            .sum();
        assert_relative_eq!(k3, lead * hand, max_relative = 1e-13);
    }

    fn geometric_oracle(theta: f64, am: &ArrivalModel, sm: &ServiceModel) -> f64 {
        let ms = mellin_cumulative_service(1.0 + theta, sm, 1).unwrap();
        let mi = mellin_interarrival(1.0 - theta, am, 1).unwrap();
        mellin_interarrival(1.0 + theta, am, 1).unwrap() * ms / (1.0 - ms * mi)
    }

    #[test]
    fn steady_kernel_matches_geometric_series() {
        let am = ArrivalModel::Poisson { rate: 0.01 };
        let sm = ServiceModel::Arq { n: 20, epsilon: 0.3 };
        for theta in [1e-4, 1e-3, 4e-3] {
            let k = paoi_kernel(theta, Horizon::Steady, &am, &sm).unwrap();
            assert_relative_eq!(k, geometric_oracle(theta, &am, &sm), max_relative = 1e-10);
            let ratio = mellin_cumulative_service(1.0 + theta, &sm, 1).unwrap()
                * mellin_interarrival(1.0 - theta, &am, 1).unwrap();
            let partial = paoi_kernel(theta, Horizon::Update(1000), &am, &sm).unwrap();
            let doubled = paoi_kernel(theta, Horizon::Update(2000), &am, &sm).unwrap();
            if ratio.powi(1000) < 1e-12 {
                assert!((k - partial).abs() / k < 1e-9);
            }
            if ratio < 0.9 {
                assert!((doubled - partial).abs() < 1e-9 * k);
            }
        }
    }

    #[test]
    fn unstable_kernel_is_reported() {
        let am = ArrivalModel::Deterministic { period: 3.0 };
        let sm = ServiceModel::Fixed { n: 4 };
        assert!(matches!(
            paoi_kernel(0.1, Horizon::Steady, &am, &sm),
            Err(QosError::Stability { .. })
        ));
        assert!(matches!(
            optimize_paoi_bound(10.0, 1, Horizon::Steady, &am, &sm),
            Err(QosError::Stability { .. })
        ));
    }

    #[test]
    fn paoi_bound_limits() {
        let am = ArrivalModel::Poisson { rate: 0.01 };
        let sm = ServiceModel::Arq { n: 20, epsilon: 0.3 };
        let r = paoi_bound(1e-3, 0.0, 20, Horizon::Steady, &am, &sm).unwrap();
        assert_eq!(r.bound, r.kernel.min(1.0));
        let opt = optimize_paoi_bound(2000.0, 1, Horizon::Steady, &am, &sm).unwrap();
        let (_, hi) = paoi_feasible_interval(Horizon::Steady, &am, &sm).unwrap();
        for i in 1..100 {
            let theta = hi * i as f64 / 100.0;
            let b = paoi_bound(theta, 2000.0, 1, Horizon::Steady, &am, &sm).unwrap();
            assert!(opt.raw_bound <= b.raw_bound * (1.0 + 1e-9));
        }
        let further = optimize_paoi_bound(3000.0, 1, Horizon::Steady, &am, &sm).unwrap();
        assert!(further.raw_bound <= opt.raw_bound);
    }

    #[test]
    fn delay_kernel_examples() {
        // M_S(1−θ)=0.5 with M_A=1 is reached with ε=0.5 and huge M.
        let svc = BlockService {
            bits_per_block: 2000,
            epsilon: 0.5,
        };
        let arrival = BlockArrival::ConstantRate { bits_per_block: 1 };
        let theta = 1e-9;
        let ms = svc.mellin(1.0 - theta);
        let ma = arrival.ln_mellin(1.0 + theta).exp();
        let k = delay_kernel(theta, 2, &arrival, &svc).unwrap();
        assert_relative_eq!(k, ms * ms / (1.0 - ma * ms), max_relative = 1e-12);
        let s = stability_check(0.1, &arrival, &svc);
        assert!(s.stable);
        let svc = BlockService {
            bits_per_block: 10,
            epsilon: 0.1,
        };
        assert_relative_eq!(
            BlockService {
                bits_per_block: 8,
                epsilon: 0.1
            }
            .mellin(0.5),
            0.1 + 0.9 * (-4f64).exp(),
            max_relative = 1e-14
        );
        let bad = BlockArrival::ConstantRate { bits_per_block: 10 };
        assert!(matches!(
            delay_kernel(0.1, 1, &bad, &svc),
            Err(QosError::Stability { .. })
        ));
        assert!(matches!(
            delay_bound_for(1, &bad, &svc),
            Err(QosError::Stability { .. })
        ));
    }

    #[test]
    fn delay_bound_behaviour() {
        let arrival = BlockArrival::ConstantRate { bits_per_block: 20 };
        let svc = BlockService {
            bits_per_block: 64,
            epsilon: 0.2,
        };
        assert_eq!(delay_bound_for(0, &arrival, &svc).unwrap().bound, 1.0);
        let mut last = f64::INFINITY;
        for d in 0..15 {
            let b = delay_bound_for(d, &arrival, &svc).unwrap();
            assert!(b.raw_bound <= last * (1.0 + 1e-9));
            last = b.raw_bound;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn margin_grows_with_poisson_rate() {
        let svc = BlockService {
            bits_per_block: 64,
            epsilon: 0.2,
        };
        let mut last = 0.0;
        for rate in [0.1, 0.5, 1.0, 2.0, 4.0] {
            let m = stability_check(0.01, &BlockArrival::PoissonBatch { rate, batch_bits: 8 }, &svc).margin;
            assert!(m >= last);
            last = m;
        }
    }
}
