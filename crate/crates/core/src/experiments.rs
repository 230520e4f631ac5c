//! Scenario sweeps: peak AoI against interferer count and SNR, bound
//! against simulation, and error exponents against blocklength.
//!
//! Replication `r` of every grid point draws its arrivals and service
//! uniforms from the same stream, and channel expectations reuse the same
//! fading draws, so grid points are compared on common random numbers.

use std::io;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aoi::{
    arq_attempts, binomial_std_error, empirical_violation, mean_half_width, simulate_trace, ArrivalModel, ServiceDraw,
    ServiceModel, ServiceTime,
};
use crate::channel::{FadingLink, LinkBudget, Scenario, ShadowedRicianParams, SinrModel};
use crate::error::{QosError, Result};
use crate::expect::ErrorModel;
use crate::fbc::{average_error_model, error_exponent_closed_form, error_exponent_model, CodingSpec};
use crate::report::num;
use crate::rng::{derive_seed, tag};
use crate::snc::{optimize_paoi_bound, paoi_bound, paoi_feasible_interval, Horizon};

/// Channel uses per second.
pub const CU_PER_SECOND: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Figure {
    Fig3,
    Fig4,
    Fig5,
    StinVsPsn,
}

/// Terrestrial assistance in the integrated network.
///
/// The relay is the nearest-indexed ground station (the first placed
/// interferer). It serves each update with probability `relay_probability`
/// over a Rayleigh link whose interference comes from the remaining
/// stations. With `slot_scaling`, each retransmission of an update in the
/// integrated network also occupies `K · slot_cu` channel uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridModel {
    pub relay_probability: f64,
    /// Relay budget; the distance is replaced by the relay's placement.
    pub relay: LinkBudget,
    pub slot_scaling: bool,
    pub slot_cu: f64,
}

impl HybridModel {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.relay_probability) {
            return Err(QosError::domain(format!(
                "relay_probability must lie in [0, 1], got {}",
                self.relay_probability
            )));
        }
        if !(self.slot_cu >= 0.0 && self.slot_cu.is_finite()) {
            return Err(QosError::domain(format!("slot_cu must be >= 0, got {}", self.slot_cu)));
        }
        self.relay.validate()
    }

    /// No relay and no slot overhead: the integrated network degenerates to
    /// the satellite-only one.
    pub fn disabled(&self) -> HybridModel {
        HybridModel {
            relay_probability: 0.0,
            slot_scaling: false,
            ..self.clone()
        }
    }
}

/// Service of the integrated network: ARQ over the relay or the satellite,
/// picked per update by the route uniform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HybridService {
    pub n: u32,
    pub epsilon_satellite: f64,
    pub epsilon_relay: f64,
    pub relay_probability: f64,
    /// Extra channel uses per retransmission.
    pub retransmission_overhead: f64,
}

impl ServiceTime for HybridService {
    fn service_time(&self, draw: ServiceDraw) -> f64 {
        let eps = if draw.route_u <= self.relay_probability {
            self.epsilon_relay
        } else {
            self.epsilon_satellite
        };
        let attempts = arq_attempts(draw.attempt_u, eps);
        self.n as f64 * attempts as f64 + self.retransmission_overhead * (attempts - 1) as f64
    }
}

/// Everything a sweep needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub figure: Figure,
    pub scenario: Scenario,
    pub coding: CodingSpec,
    pub error_model: ErrorModel,
    pub arrival: ArrivalModel,
    pub hybrid: HybridModel,
    pub k_grid: Vec<usize>,
    /// Empty means 20 points up to the optimizing θ at `a_th`.
    pub theta_grid: Vec<f64>,
    pub n_grid: Vec<u32>,
    /// Mean received satellite SNRs (interference ignored).
    pub snr_points_db: Vec<f64>,
    pub a_th: f64,
    pub replications: usize,
    pub updates: usize,
    pub seed: u64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.coding.validate()?;
        self.error_model.validate()?;
        self.arrival.validate()?;
        self.hybrid.validate()?;
        if self.replications < 1 {
            return Err(QosError::domain("replications must be >= 1"));
        }
        if self.updates < 1 {
            return Err(QosError::domain("updates must be >= 1"));
        }
        let empty = match self.figure {
            Figure::Fig3 | Figure::StinVsPsn => self.k_grid.is_empty() || self.snr_points_db.is_empty(),
            Figure::Fig4 => false,
            Figure::Fig5 => self.n_grid.is_empty(),
        };
        if empty {
            return Err(QosError::domain(format!("{:?} needs a nonempty grid", self.figure)));
        }
        if self.n_grid.contains(&0) {
            return Err(QosError::domain("blocklengths must be >= 1"));
        }
        if !(self.a_th >= 0.0 && self.a_th.is_finite()) {
            return Err(QosError::domain("a_th must be finite and >= 0"));
        }
        Ok(())
    }

    fn replication_seed(&self, r: usize) -> u64 {
        derive_seed(self.seed, &[tag::REPLICATION, r as u64])
    }
}

/// Tidy result table; cells are preformatted so output is byte-stable.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Parses column `name` as floats.
    pub fn values(&self, name: &str) -> Vec<f64> {
        let i = self.column(name).expect("unknown column");
        self.rows.iter().map(|r| r[i].parse().unwrap_or(f64::NAN)).collect()
    }

    /// Writes `#`-prefixed comment lines, the header row and the data rows.
    pub fn write_csv<W: io::Write>(&self, mut w: W, comments: &[String]) -> io::Result<()> {
        for c in comments {
            for line in c.lines() {
                writeln!(w, "# {line}")?;
            }
        }
        let mut out = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(w);
        out.write_record(&self.columns)?;
        for r in &self.rows {
            out.write_record(r)?;
        }
        out.flush()
    }
}

/// Satellite and relay decoding errors at one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkErrors {
    pub satellite: f64,
    pub relay: Option<f64>,
}

/// The relay link of `s`: Rayleigh fading from station 1, interference
/// from stations `2..=K`.
pub fn relay_model(s: &Scenario, hybrid: &HybridModel) -> Result<Option<SinrModel>> {
    let d = s.interferer_distances();
    let Some((&d_relay, rest)) = d.split_first() else {
        return Ok(None);
    };
    let budget = hybrid.relay.at_distance(d_relay);
    Ok(Some(SinrModel::Fading(FadingLink {
        fading: ShadowedRicianParams::rayleigh(),
        signal_scale: crate::channel::pathloss_factor(&budget)? * budget.tx_snr(),
        interferer_weights: s.interferers.weights(rest)?,
        seed: derive_seed(s.seed, &[tag::RELAY_LINK]),
    })))
}

/// Decoding errors for `K` stations at mean received satellite SNR `snr_db`.
pub fn link_errors(spec: &SweepSpec, k: usize, snr_db: f64) -> Result<LinkErrors> {
    let s = spec
        .scenario
        .with_interferer_count(k)
        .with_mean_received_snr_db(snr_db)?;
    let satellite = average_error_model(&s.sinr_model()?, &spec.coding, &spec.error_model)?.value;
    let relay = match relay_model(&s, &spec.hybrid)? {
        Some(m) => Some(average_error_model(&m, &spec.coding, &spec.error_model)?.value),
        None => None,
    };
    Ok(LinkErrors { satellite, relay })
}

fn check_epsilon(eps: f64, what: &str) -> Result<()> {
    if eps >= 1.0 {
        return Err(QosError::stability(
            format!("{what} decoding error is 1; the queue never drains"),
            eps,
        ));
    }
    Ok(())
}

/// Satellite-only service.
pub fn psn_service(spec: &SweepSpec, errors: &LinkErrors) -> Result<ServiceModel> {
    check_epsilon(errors.satellite, "satellite")?;
    Ok(ServiceModel::Arq {
        n: spec.coding.blocklength,
        epsilon: errors.satellite,
    })
}

/// Integrated-network service for `k` stations.
pub fn stin_service(spec: &SweepSpec, k: usize, errors: &LinkErrors) -> Result<HybridService> {
    check_epsilon(errors.satellite, "satellite")?;
    let (q, eps_relay) = match errors.relay {
        Some(e) => {
            check_epsilon(e, "relay")?;
            (spec.hybrid.relay_probability, e)
        }
        None => (0.0, errors.satellite),
    };
    Ok(HybridService {
        n: spec.coding.blocklength,
        epsilon_satellite: errors.satellite,
        epsilon_relay: eps_relay,
        relay_probability: q,
        retransmission_overhead: if spec.hybrid.slot_scaling {
            k as f64 * spec.hybrid.slot_cu
        } else {
            0.0
        },
    })
}

/// Mean peak AoI (cu) of each replication.
fn replicate_mean_paoi<S: ServiceTime + Sync>(spec: &SweepSpec, service: &S) -> Result<Vec<f64>> {
    (0..spec.replications)
        .into_par_iter()
        .map(|r| {
            let t = simulate_trace(&spec.arrival, service, spec.updates, spec.replication_seed(r))?;
            Ok(t.peak_aoi[1..].iter().sum::<f64>() / t.len() as f64)
        })
        .collect()
}

/// One (K, SNR) point of the peak-AoI comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct PaoiPoint {
    pub k: usize,
    pub snr_db: f64,
    pub errors: LinkErrors,
    pub stin: Vec<f64>,
    pub psn: Vec<f64>,
}

fn grid_points(spec: &SweepSpec) -> Vec<(usize, f64)> {
    spec.snr_points_db
        .iter()
        .flat_map(|&snr| spec.k_grid.iter().map(move |&k| (k, snr)))
        .collect()
}

/// Per-replication mean peak AoI under both networks at every grid point.
pub fn paoi_points(spec: &SweepSpec) -> Result<Vec<PaoiPoint>> {
    spec.validate()?;
    grid_points(spec)
        .into_par_iter()
        .map(|(k, snr_db)| {
            let errors = link_errors(spec, k, snr_db)?;
            let psn = replicate_mean_paoi(spec, &psn_service(spec, &errors)?)?;
            let stin = replicate_mean_paoi(spec, &stin_service(spec, k, &errors)?)?;
            Ok(PaoiPoint {
                k,
                snr_db,
                errors,
                stin,
                psn,
            })
        })
        .collect()
}

/// Mean peak AoI against `K` for each SNR, both networks.
pub fn run_fig3(spec: &SweepSpec) -> Result<Table> {
    let mut table = Table::new(&[
        "k",
        "snr_db",
        "network",
        "mean_paoi_cu",
        "half_width_cu",
        "mean_paoi_s",
        "epsilon_satellite",
        "epsilon_relay",
    ]);
    for p in paoi_points(spec)? {
        for (network, values) in [("stin", &p.stin), ("psn", &p.psn)] {
            let (mean, hw) = mean_half_width(values);
            table.rows.push(vec![
                p.k.to_string(),
                num(p.snr_db),
                network.to_string(),
                num(mean),
                num(hw),
                num(mean / CU_PER_SECOND),
                num(p.errors.satellite),
                p.errors.relay.map(num).unwrap_or_default(),
            ]);
        }
    }
    Ok(table)
}

/// Paired STIN − PSN difference of mean peak AoI per (K, SNR).
pub fn compare_stin_psn(spec: &SweepSpec) -> Result<Table> {
    let mut table = Table::new(&[
        "k",
        "snr_db",
        "stin_mean_cu",
        "psn_mean_cu",
        "difference_cu",
        "difference_half_width_cu",
    ]);
    for p in paoi_points(spec)? {
        let diffs: Vec<f64> = p.stin.iter().zip(&p.psn).map(|(a, b)| a - b).collect();
        let (d, hw) = mean_half_width(&diffs);
        table.rows.push(vec![
            p.k.to_string(),
            p.snr_db.to_string(),
            num(mean_half_width(&p.stin).0),
            num(mean_half_width(&p.psn).0),
            num(d),
            num(hw),
        ]);
    }
    Ok(table)
}

/// The satellite-only queue of the spec's scenario, as used by Fig. 4.
pub fn fig4_service(spec: &SweepSpec) -> Result<ServiceModel> {
    let eps = average_error_model(&spec.scenario.sinr_model()?, &spec.coding, &spec.error_model)?.value;
    psn_service(
        spec,
        &LinkErrors {
            satellite: eps,
            relay: None,
        },
    )
}

/// 20 values of θ up to the optimizer at `a_th`, starting where the raw
/// bound drops below 1 when it does.
pub fn auto_theta_grid(a_th: f64, n: u32, am: &ArrivalModel, sm: &ServiceModel) -> Result<Vec<f64>> {
    let best = optimize_paoi_bound(a_th, n, Horizon::Steady, am, sm)?;
    let ln_raw = |theta: f64| {
        paoi_bound(theta, a_th, n, Horizon::Steady, am, sm)
            .map(|b| b.raw_bound.ln())
            .unwrap_or(f64::INFINITY)
    };
    let start = if best.raw_bound < 1.0 {
        crate::optimize::bisect(ln_raw, best.theta * 1e-9, best.theta, best.theta * 1e-12)
    } else {
        0.0
    };
    Ok((1..=20)
        .map(|i| start + (best.theta - start) * i as f64 / 20.0)
        .collect())
}

/// Peak-AoI bound against θ at fixed `a_th`, next to the simulated
/// violation frequency.
pub fn run_fig4(spec: &SweepSpec) -> Result<Table> {
    spec.validate()?;
    let sm = fig4_service(spec)?;
    let n = spec.coding.blocklength;
    let thetas = if spec.theta_grid.is_empty() {
        auto_theta_grid(spec.a_th, n, &spec.arrival, &sm)?
    } else {
        let (_, hi) = paoi_feasible_interval(Horizon::Steady, &spec.arrival, &sm)?;
        if let Some(bad) = spec.theta_grid.iter().find(|&&t| !(t > 0.0 && t < hi)) {
            return Err(QosError::domain(format!(
                "theta {bad} lies outside the feasible interval (0, {hi})"
            )));
        }
        spec.theta_grid.clone()
    };
    let traces = (0..spec.replications)
        .into_par_iter()
        .map(|r| simulate_trace(&spec.arrival, &sm, spec.updates, spec.replication_seed(r)))
        .collect::<Result<Vec<_>>>()?;
    let total: usize = traces.iter().map(|t| t.len()).sum();
    let empirical = traces
        .iter()
        .map(|t| empirical_violation(t, spec.a_th) * t.len() as f64)
        .sum::<f64>()
        / total as f64;
    let se = binomial_std_error(empirical, total);
    let mut table = Table::new(&[
        "theta",
        "bound",
        "raw_bound",
        "kernel",
        "empirical",
        "empirical_se",
        "a_th",
    ]);
    for theta in thetas {
        let b = paoi_bound(theta, spec.a_th, n, Horizon::Steady, &spec.arrival, &sm)?;
        table.rows.push(vec![
            num(theta),
            num(b.bound),
            num(b.raw_bound),
            num(b.kernel),
            num(empirical),
            num(se),
            num(spec.a_th),
        ]);
    }
    Ok(table)
}

/// Numeric and closed-form error exponents against blocklength, at a fixed
/// rate, for each SNR point (or the scenario as given when there are none).
pub fn run_fig5(spec: &SweepSpec) -> Result<Table> {
    spec.validate()?;
    let rate = spec.coding.rate();
    let snrs: Vec<Option<f64>> = if spec.snr_points_db.is_empty() {
        vec![None]
    } else {
        spec.snr_points_db.iter().copied().map(Some).collect()
    };
    let points: Vec<(Option<f64>, u32)> = snrs
        .iter()
        .flat_map(|&s| spec.n_grid.iter().map(move |&n| (s, n)))
        .collect();
    let rows = points
        .into_par_iter()
        .map(|(snr, n)| {
            let s = match snr {
                Some(db) => spec.scenario.with_mean_received_snr_db(db)?,
                None => spec.scenario.clone(),
            };
            let coding = CodingSpec::with_rate(n, rate)?;
            let numeric = error_exponent_model(&s.sinr_model()?, &coding, &spec.error_model)?;
            let closed = error_exponent_closed_form(&s, &coding)?;
            Ok(vec![
                snr.map(num).unwrap_or_default(),
                n.to_string(),
                num(rate),
                num(numeric.theta),
                num(numeric.rho_star),
                num(closed),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(&["snr_db", "n", "rate", "theta_numeric", "rho_star", "theta_closed_form"]);
    table.rows = rows;
    Ok(table)
}

/// Runs the figure named in the spec.
pub fn run(spec: &SweepSpec) -> Result<Table> {
    match spec.figure {
        Figure::Fig3 => run_fig3(spec),
        Figure::Fig4 => run_fig4(spec),
        Figure::Fig5 => run_fig5(spec),
        Figure::StinVsPsn => compare_stin_psn(spec),
    }
}

/// Default scenario: 2 GHz satellite at 1000 km with a 20 dBi antenna, mean
/// received SNR near 10 dB, and two ground stations in a 2–10 km annulus.
pub fn default_scenario() -> Scenario {
    Scenario {
        satellite: LinkBudget {
            carrier_hz: 2e9,
            distance_m: 1e6,
            gain_tx_dbi: 20.0,
            gain_rx_dbi: 0.0,
            tx_snr_db: 148.0,
        },
        fading: ShadowedRicianParams {
            b: 0.126,
            m: 10.0,
            omega: 0.835,
        },
        interferers: crate::channel::InterfererField {
            count: 2,
            r_inner_m: 2_000.0,
            r_outer_m: 10_000.0,
            link: LinkBudget {
                carrier_hz: 2e9,
                distance_m: 2_000.0,
                gain_tx_dbi: 0.0,
                gain_rx_dbi: 0.0,
                tx_snr_db: 106.0,
            },
        },
        rx_antennas: 2,
        seed: 2024,
        interferer_distances: None,
    }
}

pub fn default_hybrid() -> HybridModel {
    HybridModel {
        relay_probability: 0.5,
        relay: LinkBudget {
            carrier_hz: 2e9,
            distance_m: 2_000.0,
            gain_tx_dbi: 20.0,
            gain_rx_dbi: 0.0,
            tx_snr_db: 130.0,
        },
        slot_scaling: true,
        slot_cu: 2.0,
    }
}

impl SweepSpec {
    /// Defaults for `figure`.
    pub fn defaults(figure: Figure) -> SweepSpec {
        SweepSpec {
            figure,
            scenario: default_scenario(),
            coding: CodingSpec {
                blocklength: 100,
                code_size_bits: 72.0,
                rate_override: None,
            },
            error_model: ErrorModel::monte_carlo(100_000),
            arrival: ArrivalModel::Poisson { rate: 1e-3 },
            hybrid: default_hybrid(),
            k_grid: (1..=10).collect(),
            theta_grid: Vec::new(),
            n_grid: vec![100, 200, 500, 1000, 2000],
            snr_points_db: vec![5.0, 15.0],
            a_th: 1_000_000.0,
            replications: 32,
            updates: 20_000,
            seed: 2024,
        }
    }
}
