//! Status-update queue: FCFS single server with infinite buffer.
//!
//! Times are in channel uses. Update indices run `1..=N`; index 0 of every
//! column is the empty origin (`arrivals[0] = 0`).

use std::io;

use rand::Rng;
use rand_distr::{Distribution, Exp, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{QosError, Result};
use crate::report::num;
use crate::rng::{open_unit, stream, tag};
use crate::snc::{BlockArrival, BlockService};

/// Law of the gap between consecutive update generations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ArrivalModel {
    Deterministic { period: f64 },
    Poisson { rate: f64 },
}

impl ArrivalModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ArrivalModel::Deterministic { period } if !(period > 0.0 && period.is_finite()) => {
                Err(QosError::domain(format!("arrival period must be > 0, got {period}")))
            }
            ArrivalModel::Poisson { rate } if !(rate > 0.0 && rate.is_finite()) => {
                Err(QosError::domain(format!("arrival rate must be > 0, got {rate}")))
            }
            _ => Ok(()),
        }
    }

    pub fn mean_gap(&self) -> f64 {
        match *self {
            ArrivalModel::Deterministic { period } => period,
            ArrivalModel::Poisson { rate } => 1.0 / rate,
        }
    }
}

/// Per-update transmission time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ServiceModel {
    /// Every update takes exactly `n` channel uses.
    Fixed { n: u32 },
    /// Geometric number of `n`-use attempts, each failing with `epsilon`.
    Arq { n: u32, epsilon: f64 },
}

impl ServiceModel {
    pub fn validate(&self) -> Result<()> {
        let (n, eps) = match *self {
            ServiceModel::Fixed { n } => (n, 0.0),
            ServiceModel::Arq { n, epsilon } => (n, epsilon),
        };
        if n < 1 {
            return Err(QosError::domain("service blocklength n must be >= 1"));
        }
        if !(0.0..1.0).contains(&eps) {
            return Err(QosError::domain(format!("epsilon must lie in [0, 1), got {eps}")));
        }
        Ok(())
    }

    pub fn blocklength(&self) -> u32 {
        match *self {
            ServiceModel::Fixed { n } | ServiceModel::Arq { n, .. } => n,
        }
    }

    pub fn epsilon(&self) -> f64 {
        match *self {
            ServiceModel::Fixed { .. } => 0.0,
            ServiceModel::Arq { epsilon, .. } => epsilon,
        }
    }

    pub fn mean(&self) -> f64 {
        self.blocklength() as f64 / (1.0 - self.epsilon())
    }
}

/// The two uniforms on `(0, 1]` drawn for every update: one for the number
/// of attempts, one for route selection in hybrid models. Both are always
/// drawn so that streams stay aligned across service models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServiceDraw {
    pub attempt_u: f64,
    pub route_u: f64,
}

/// Maps a service draw to a service time in channel uses.
pub trait ServiceTime {
    fn service_time(&self, draw: ServiceDraw) -> f64;
}

/// Number of attempts until the first success, by inversion:
/// `1 + ⌊ln U / ln ε⌋`. Nondecreasing in `ε` for a fixed `U`.
pub fn arq_attempts(u: f64, epsilon: f64) -> u64 {
    if epsilon <= 0.0 {
        return 1;
    }
    1 + (u.ln() / epsilon.ln()).floor() as u64
}

impl ServiceTime for ServiceModel {
    fn service_time(&self, draw: ServiceDraw) -> f64 {
        match *self {
            ServiceModel::Fixed { n } => n as f64,
            ServiceModel::Arq { n, epsilon } => n as f64 * arq_attempts(draw.attempt_u, epsilon) as f64,
        }
    }
}

/// Per-update timing columns.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateTrace {
    pub arrivals: Vec<f64>,
    pub services: Vec<f64>,
    pub departures: Vec<f64>,
    pub sojourns: Vec<f64>,
    pub peak_aoi: Vec<f64>,
}

impl UpdateTrace {
    /// Builds a trace from arrival and service times of updates `1..=N`.
    pub fn from_columns(arrivals: &[f64], services: &[f64]) -> Result<Self> {
        if arrivals.len() != services.len() {
            return Err(QosError::contract(format!(
                "{} arrivals but {} services",
                arrivals.len(),
                services.len()
            )));
        }
        if arrivals.is_empty() {
            return Err(QosError::contract("a trace needs at least one update"));
        }
        if arrivals.iter().chain(services).any(|x| !(*x >= 0.0 && x.is_finite())) {
            return Err(QosError::domain("trace times must be finite and >= 0"));
        }
        if arrivals.windows(2).any(|w| w[1] < w[0]) {
            return Err(QosError::domain("arrivals must be nondecreasing"));
        }
        let a: Vec<f64> = std::iter::once(0.0).chain(arrivals.iter().copied()).collect();
        let s: Vec<f64> = std::iter::once(0.0).chain(services.iter().copied()).collect();
        let d = departure_times(&a, &s);
        let soj = sojourn_times(&a, &d);
        let p = peak_aoi(&a, &soj);
        Ok(UpdateTrace {
            arrivals: a,
            services: s,
            departures: d,
            sojourns: soj,
            peak_aoi: p,
        })
    }

    /// Number of updates `N`.
    pub fn len(&self) -> usize {
        self.arrivals.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn check_range(&self, v: usize, u: usize) -> Result<()> {
        if !(1 <= v && v <= u && u <= self.len()) {
            return Err(QosError::contract(format!(
                "need 1 <= v <= u <= {}, got v={v}, u={u}",
                self.len()
            )));
        }
        Ok(())
    }

    /// `arrivals[u] − arrivals[v]`.
    pub fn cumulative_interarrival(&self, v: usize, u: usize) -> Result<f64> {
        self.check_range(v, u)?;
        Ok(self.arrivals[u] - self.arrivals[v])
    }

    /// `Σ_{i=v}^{u} services[i]`.
    pub fn cumulative_service(&self, v: usize, u: usize) -> Result<f64> {
        self.check_range(v, u)?;
        Ok(self.services[v..=u].iter().sum())
    }

    /// Writes `u, arrival, service, departure, sojourn, peak_aoi` rows.
    pub fn write_csv<W: io::Write>(&self, w: W) -> io::Result<()> {
        let mut out = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(w);
        out.write_record(["u", "arrival", "service", "departure", "sojourn", "peak_aoi"])?;
        for u in 1..=self.len() {
            out.write_record([
                u.to_string(),
                num(self.arrivals[u]),
                num(self.services[u]),
                num(self.departures[u]),
                num(self.sojourns[u]),
                num(self.peak_aoi[u]),
            ])?;
        }
        out.flush()
    }
}

/// Lindley recursion `D[u] = max(D[u−1], A[u]) + S[u]` over 0-origin
/// columns.
pub fn departure_times(arrivals: &[f64], services: &[f64]) -> Vec<f64> {
    let mut d = vec![0.0f64; arrivals.len()];
    for u in 1..arrivals.len() {
        d[u] = d[u - 1].max(arrivals[u]) + services[u];
    }
    d
}

pub fn sojourn_times(arrivals: &[f64], departures: &[f64]) -> Vec<f64> {
    arrivals.iter().zip(departures).map(|(a, d)| d - a).collect()
}

/// `(A[u] − A[u−1]) + T[u]`, with index 0 left at 0.
pub fn peak_aoi(arrivals: &[f64], sojourns: &[f64]) -> Vec<f64> {
    let mut p = vec![0.0; arrivals.len()];
    for u in 1..arrivals.len() {
        p[u] = arrivals[u] - arrivals[u - 1] + sojourns[u];
    }
    p
}

/// Simulates `updates` status updates. Arrivals and service draws come from
/// separate streams of `seed`, so changing the service model leaves the
/// arrival sequence untouched.
pub fn simulate_trace<S: ServiceTime + ?Sized>(
    am: &ArrivalModel,
    sm: &S,
    updates: usize,
    seed: u64,
) -> Result<UpdateTrace> {
    am.validate()?;
    if updates < 1 {
        return Err(QosError::contract("need at least one update"));
    }
    let mut arrival_rng = stream(seed, &[tag::ARRIVALS]);
    let mut service_rng = stream(seed, &[tag::SERVICES]);
    let exp = match *am {
        ArrivalModel::Poisson { rate } => Some(Exp::new(rate).map_err(|e| QosError::domain(e.to_string()))?),
        ArrivalModel::Deterministic { .. } => None,
    };
    let mut arrivals = Vec::with_capacity(updates);
    let mut services = Vec::with_capacity(updates);
    let mut t = 0.0;
    for _ in 0..updates {
        t += match (*am, &exp) {
            (ArrivalModel::Deterministic { period }, _) => period,
            (_, Some(e)) => e.sample(&mut arrival_rng),
            _ => unreachable!(),
        };
        arrivals.push(t);
        let draw = ServiceDraw {
            attempt_u: open_unit(&mut service_rng),
            route_u: open_unit(&mut service_rng),
        };
        services.push(sm.service_time(draw));
    }
    UpdateTrace::from_columns(&arrivals, &services)
}

/// Fraction of updates whose peak AoI exceeds `a_th` channel uses.
pub fn empirical_violation(trace: &UpdateTrace, a_th: f64) -> f64 {
    let hits = trace.peak_aoi[1..].iter().filter(|&&p| p > a_th).count();
    hits as f64 / trace.len() as f64
}

/// Binomial standard error `sqrt(p(1−p)/n)`.
pub fn binomial_std_error(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Mean and confidence half-width (1.96 standard errors) of a sample.
pub fn mean_half_width(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, 1.96 * (var / n).sqrt())
}

/// Block-level queue: bits arrive and are served once per coding block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockQueueRun {
    /// Cumulative arrivals `A(t)` through block `t`.
    pub arrivals: Vec<u64>,
    /// Cumulative departures `D(t) = min(A(t), D(t−1) + s_t)`.
    pub departures: Vec<u64>,
    /// Delay in blocks of the bits arriving in block `t`; `None` when they
    /// have not left by the end of the horizon or no bits arrived.
    pub delays: Vec<Option<u64>>,
}

impl BlockQueueRun {
    pub fn horizon(&self) -> usize {
        self.arrivals.len()
    }

    /// Fraction of arrival blocks whose delay exceeds `d_th`, over blocks
    /// whose outcome is decided within the horizon.
    pub fn delay_violation(&self, d_th: u64) -> (f64, usize) {
        let horizon = self.horizon() as u64;
        let mut decided = 0usize;
        let mut hits = 0usize;
        for t in 0..self.horizon() {
            let fresh = self.arrivals[t] > if t == 0 { 0 } else { self.arrivals[t - 1] };
            if !fresh || t as u64 + d_th >= horizon {
                continue;
            }
            decided += 1;
            match self.delays[t] {
                Some(w) if w <= d_th => {}
                _ => hits += 1,
            }
        }
        (
            if decided == 0 {
                0.0
            } else {
                hits as f64 / decided as f64
            },
            decided,
        )
    }

    /// Time-average backlog `A(t) − D(t)` in bits.
    pub fn mean_backlog(&self) -> f64 {
        let total: f64 = self
            .arrivals
            .iter()
            .zip(&self.departures)
            .map(|(a, d)| (a - d) as f64)
            .sum();
        total / self.horizon() as f64
    }
}

/// Simulates `horizon` blocks of the bit-level queue.
pub fn simulate_block_queue(
    arrival: &BlockArrival,
    service: &BlockService,
    horizon: usize,
    seed: u64,
) -> Result<BlockQueueRun> {
    arrival.validate()?;
    service.validate()?;
    if horizon < 1 {
        return Err(QosError::contract("horizon must be >= 1 block"));
    }
    let mut arrival_rng = stream(seed, &[tag::BLOCK_ARRIVALS]);
    let mut service_rng = stream(seed, &[tag::BLOCK_SERVICES]);
    let poisson = match *arrival {
        BlockArrival::PoissonBatch { rate, .. } => {
            Some(Poisson::new(rate).map_err(|e| QosError::domain(e.to_string()))?)
        }
        BlockArrival::ConstantRate { .. } => None,
    };
    let mut a = Vec::with_capacity(horizon);
    let mut d = Vec::with_capacity(horizon);
    let (mut a_cum, mut d_cum) = (0u64, 0u64);
    for _ in 0..horizon {
        a_cum += match (*arrival, &poisson) {
            (BlockArrival::ConstantRate { bits_per_block }, _) => bits_per_block,
            (BlockArrival::PoissonBatch { batch_bits, .. }, Some(p)) => {
                let batches: f64 = p.sample(&mut arrival_rng);
                batches as u64 * batch_bits
            }
            _ => unreachable!(),
        };
        let served = if service_rng.random::<f64>() < service.epsilon {
            0
        } else {
            service.bits_per_block
        };
        d_cum = a_cum.min(d_cum + served);
        a.push(a_cum);
        d.push(d_cum);
    }
    let mut delays = vec![None; horizon];
    let mut tau = 0usize;
    for t in 0..horizon {
        let prev = if t == 0 { 0 } else { a[t - 1] };
        if a[t] == prev {
            continue;
        }
        tau = tau.max(t);
        while tau < horizon && d[tau] < a[t] {
            tau += 1;
        }
        if tau < horizon {
            delays[t] = Some((tau - t) as u64);
        }
    }
    Ok(BlockQueueRun {
        arrivals: a,
        departures: d,
        delays,
    })
}
