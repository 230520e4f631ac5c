//! Run configuration: a TOML file, optionally a separate scenario file, and
//! a few scalar flag overrides.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use satqos::experiments::{default_hybrid, default_scenario};
use satqos::{
    ArrivalModel, BlockArrival, CodingSpec, ErrorModel, Figure, Horizon, HybridModel, InterfererField, LinkBudget,
    Method, Scenario, ShadowedRicianParams, SweepSpec,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Error,
    Exponent,
    AoiSim,
    PaoiBound,
    DelayBound,
    Sweep,
}

macro_rules! link_config {
    ($name:ident, $default:expr) => {
        #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
        #[serde(default)]
        pub struct $name {
            pub carrier_hz: f64,
            pub distance_m: f64,
            pub gain_tx_dbi: f64,
            pub gain_rx_dbi: f64,
            pub tx_snr_db: f64,
        }

        impl Default for $name {
            fn default() -> Self {
                let l: LinkBudget = $default;
                $name {
                    carrier_hz: l.carrier_hz,
                    distance_m: l.distance_m,
                    gain_tx_dbi: l.gain_tx_dbi,
                    gain_rx_dbi: l.gain_rx_dbi,
                    tx_snr_db: l.tx_snr_db,
                }
            }
        }

        impl From<&$name> for LinkBudget {
            fn from(c: &$name) -> LinkBudget {
                LinkBudget {
                    carrier_hz: c.carrier_hz,
                    distance_m: c.distance_m,
                    gain_tx_dbi: c.gain_tx_dbi,
                    gain_rx_dbi: c.gain_rx_dbi,
                    tx_snr_db: c.tx_snr_db,
                }
            }
        }
    };
}

link_config!(SatelliteLink, default_scenario().satellite);
link_config!(InterfererLink, default_scenario().interferers.link);
link_config!(RelayLink, default_hybrid().relay);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FadingConfig {
    pub b: f64,
    pub m: f64,
    pub omega: f64,
}

impl Default for FadingConfig {
    fn default() -> Self {
        let f = default_scenario().fading;
        FadingConfig {
            b: f.b,
            m: f.m,
            omega: f.omega,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InterfererConfig {
    pub count: usize,
    pub r_inner_m: f64,
    pub r_outer_m: f64,
    pub link: InterfererLink,
}

impl Default for InterfererConfig {
    fn default() -> Self {
        let f = default_scenario().interferers;
        InterfererConfig {
            count: f.count,
            r_inner_m: f.r_inner_m,
            r_outer_m: f.r_outer_m,
            link: InterfererLink::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub rx_antennas: u32,
    /// Mean received satellite SNR; replaces `satellite.tx_snr_db` when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interferer_distances: Option<Vec<f64>>,
    pub satellite: SatelliteLink,
    pub fading: FadingConfig,
    pub interferers: InterfererConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            rx_antennas: default_scenario().rx_antennas,
            snr_db: None,
            interferer_distances: None,
            satellite: SatelliteLink::default(),
            fading: FadingConfig::default(),
            interferers: InterfererConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CodingConfig {
    pub blocklength: u32,
    pub code_size_bits: f64,
    /// Rate in nats per channel use; replaces `code_size_bits` when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
}

impl Default for CodingConfig {
    fn default() -> Self {
        let c = SweepSpec::defaults(Figure::Fig3).coding;
        CodingConfig {
            blocklength: c.blocklength,
            code_size_bits: c.code_size_bits,
            rate: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ErrorModelConfig {
    pub method: Method,
    pub sample_budget: usize,
    pub quad_tolerance: f64,
}

impl Default for ErrorModelConfig {
    fn default() -> Self {
        let e = SweepSpec::defaults(Figure::Fig3).error_model;
        ErrorModelConfig {
            method: e.method,
            sample_budget: e.sample_budget,
            quad_tolerance: ErrorModel::default().quad_tolerance,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrivalKind {
    Poisson,
    Deterministic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ArrivalConfig {
    pub kind: ArrivalKind,
    /// Updates per channel use (Poisson).
    pub rate: f64,
    /// Channel uses between updates (deterministic).
    pub period: f64,
}

impl Default for ArrivalConfig {
    fn default() -> Self {
        ArrivalConfig {
            kind: ArrivalKind::Poisson,
            rate: 1e-3,
            period: 1000.0,
        }
    }
}

impl ArrivalConfig {
    pub fn model(&self) -> ArrivalModel {
        match self.kind {
            ArrivalKind::Poisson => ArrivalModel::Poisson { rate: self.rate },
            ArrivalKind::Deterministic => ArrivalModel::Deterministic { period: self.period },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServiceKind {
    Arq,
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServiceConfig {
    pub kind: ServiceKind,
    /// Per-attempt failure probability; computed from the scenario when unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            kind: ServiceKind::Arq,
            epsilon: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExponentConfig {
    pub numeric: bool,
    pub closed_form: bool,
}

impl Default for ExponentConfig {
    fn default() -> Self {
        ExponentConfig {
            numeric: true,
            closed_form: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AoiConfig {
    pub updates: usize,
}

impl Default for AoiConfig {
    fn default() -> Self {
        AoiConfig { updates: 20_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PaoiConfig {
    /// Thresholds in channel uses.
    pub a_th: Vec<f64>,
    /// Fixed θ; optimized per threshold when unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    /// Update index; steady state when unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub update: Option<usize>,
}

impl Default for PaoiConfig {
    fn default() -> Self {
        PaoiConfig {
            a_th: vec![5e5, 1e6, 2e6],
            theta: None,
            update: None,
        }
    }
}

impl PaoiConfig {
    pub fn horizon(&self) -> Horizon {
        self.update.map_or(Horizon::Steady, Horizon::Update)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockArrivalKind {
    ConstantRate,
    PoissonBatch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DelayConfig {
    pub arrival: BlockArrivalKind,
    /// Bits per block (constant rate).
    pub bits_per_block: u64,
    /// Batches per block (Poisson batches).
    pub rate: f64,
    pub batch_bits: u64,
    /// Thresholds in blocks.
    pub d_th: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

impl Default for DelayConfig {
    fn default() -> Self {
        DelayConfig {
            arrival: BlockArrivalKind::ConstantRate,
            bits_per_block: 36,
            rate: 1.0,
            batch_bits: 36,
            d_th: (0..10).collect(),
            epsilon: None,
        }
    }
}

impl DelayConfig {
    pub fn block_arrival(&self) -> BlockArrival {
        match self.arrival {
            BlockArrivalKind::ConstantRate => BlockArrival::ConstantRate {
                bits_per_block: self.bits_per_block,
            },
            BlockArrivalKind::PoissonBatch => BlockArrival::PoissonBatch {
                rate: self.rate,
                batch_bits: self.batch_bits,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HybridConfig {
    pub relay_probability: f64,
    pub slot_scaling: bool,
    pub slot_cu: f64,
    pub relay: RelayLink,
}

impl Default for HybridConfig {
    fn default() -> Self {
        let h = default_hybrid();
        HybridConfig {
            relay_probability: h.relay_probability,
            slot_scaling: h.slot_scaling,
            slot_cu: h.slot_cu,
            relay: RelayLink::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub figure: Figure,
    pub k_grid: Vec<usize>,
    pub theta_grid: Vec<f64>,
    pub n_grid: Vec<u32>,
    pub snr_points_db: Vec<f64>,
    pub a_th: f64,
    pub replications: usize,
    pub updates: usize,
    pub hybrid: HybridConfig,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let s = SweepSpec::defaults(Figure::Fig3);
        SweepConfig {
            figure: s.figure,
            k_grid: s.k_grid,
            theta_grid: s.theta_grid,
            n_grid: s.n_grid,
            snr_points_db: s.snr_points_db,
            a_th: s.a_th,
            replications: s.replications,
            updates: s.updates,
            hybrid: HybridConfig::default(),
        }
    }
}

/// The file as written. Every table falls back to its defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FileConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario_file: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioConfig>,
    pub coding: CodingConfig,
    pub error_model: ErrorModelConfig,
    pub arrival: ArrivalConfig,
    pub service: ServiceConfig,
    pub exponent: ExponentConfig,
    pub aoi: AoiConfig,
    pub paoi: PaoiConfig,
    pub delay: DelayConfig,
    pub sweep: SweepConfig,
}

/// Scalar fields settable from the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
}

/// A validated run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub output: PathBuf,
    pub seed: u64,
    pub scenario: Scenario,
    pub coding: CodingSpec,
    pub error_model: ErrorModel,
    pub arrival: ArrivalModel,
    pub service: ServiceConfig,
    pub exponent: ExponentConfig,
    pub aoi: AoiConfig,
    pub paoi: PaoiConfig,
    pub delay: DelayConfig,
    pub sweep: SweepConfig,
    /// Fully resolved configuration as TOML, without the output path.
    pub resolved: String,
}

impl RunConfig {
    pub fn sweep_spec(&self) -> SweepSpec {
        let h = &self.sweep.hybrid;
        SweepSpec {
            figure: self.sweep.figure,
            scenario: self.scenario.clone(),
            coding: self.coding,
            error_model: self.error_model,
            arrival: self.arrival,
            hybrid: HybridModel {
                relay_probability: h.relay_probability,
                relay: (&h.relay).into(),
                slot_scaling: h.slot_scaling,
                slot_cu: h.slot_cu,
            },
            k_grid: self.sweep.k_grid.clone(),
            theta_grid: self.sweep.theta_grid.clone(),
            n_grid: self.sweep.n_grid.clone(),
            snr_points_db: self.sweep.snr_points_db.clone(),
            a_th: self.sweep.a_th,
            replications: self.sweep.replications,
            updates: self.sweep.updates,
            seed: self.seed,
        }
    }
}

/// Parses `text` with unknown-key detection. `prefix` is prepended to the
/// reported key paths.
fn parse_toml<T: DeserializeOwned>(text: &str, prefix: &str) -> Result<T, CliError> {
    let de = toml::Deserializer::parse(text).map_err(|e| CliError::Config(format!("parse error: {e}")))?;
    let mut unknown = Vec::new();
    let value: T = serde_ignored::deserialize(de, |path| {
        unknown.push(format!("{prefix}{}", key_path(&path)));
    })
    .map_err(|e| CliError::Config(format!("parse error: {e}")))?;
    if unknown.is_empty() {
        return Ok(value);
    }
    let known = known_keys();
    let msgs: Vec<String> = unknown
        .iter()
        .map(|k| match nearest(k, &known) {
            Some(n) => format!("unknown key `{k}` (nearest known key: `{n}`)"),
            None => format!("unknown key `{k}`"),
        })
        .collect();
    Err(CliError::Config(msgs.join("; ")))
}

fn key_path(p: &serde_ignored::Path) -> String {
    use serde_ignored::Path;
    match p {
        Path::Root => String::new(),
        Path::Map { parent, key } => match key_path(parent) {
            s if s.is_empty() => key.clone(),
            s => format!("{s}.{key}"),
        },
        Path::Seq { parent, index } => format!("{}[{index}]", key_path(parent)),
        Path::Some { parent } | Path::NewtypeStruct { parent } | Path::NewtypeVariant { parent } => key_path(parent),
    }
}

/// Dotted paths of every key the file format accepts.
pub fn known_keys() -> BTreeSet<String> {
    let mut full = FileConfig {
        command: Some(Command::Error),
        seed: Some(0),
        output: Some(PathBuf::new()),
        scenario_file: Some(PathBuf::new()),
        scenario: Some(ScenarioConfig {
            snr_db: Some(0.0),
            interferer_distances: Some(Vec::new()),
            ..ScenarioConfig::default()
        }),
        ..FileConfig::default()
    };
    full.coding.rate = Some(0.0);
    full.service.epsilon = Some(0.0);
    full.paoi.theta = Some(0.0);
    full.paoi.update = Some(0);
    full.delay.epsilon = Some(0.0);
    let value = toml::Value::try_from(&full).expect("config serializes");
    let mut keys = BTreeSet::new();
    flatten("", &value, &mut keys);
    keys
}

fn flatten(prefix: &str, v: &toml::Value, out: &mut BTreeSet<String>) {
    if let toml::Value::Table(t) = v {
        for (k, child) in t {
            let path = if prefix.is_empty() {
                k.clone()
            } else {
                format!("{prefix}.{k}")
            };
            out.insert(path.clone());
            flatten(&path, child, out);
        }
    }
}

fn nearest<'a>(key: &str, known: &'a BTreeSet<String>) -> Option<&'a str> {
    known
        .iter()
        .map(|k| (strsim::levenshtein(key, k), k))
        .min_by_key(|(d, _)| *d)
        .map(|(_, k)| k.as_str())
}

fn config_err(what: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{what}: {e}"))
}

fn build_scenario(c: &ScenarioConfig, seed: u64) -> Result<Scenario, CliError> {
    let i = &c.interferers;
    if !(i.r_inner_m < i.r_outer_m) {
        return Err(CliError::Config(format!(
            "scenario.interferers.r_inner_m ({}) must be below scenario.interferers.r_outer_m ({})",
            i.r_inner_m, i.r_outer_m
        )));
    }
    let mut s = Scenario {
        satellite: (&c.satellite).into(),
        fading: ShadowedRicianParams {
            b: c.fading.b,
            m: c.fading.m,
            omega: c.fading.omega,
        },
        interferers: InterfererField {
            count: i.count,
            r_inner_m: i.r_inner_m,
            r_outer_m: i.r_outer_m,
            link: (&i.link).into(),
        },
        rx_antennas: c.rx_antennas,
        seed,
        interferer_distances: c.interferer_distances.clone(),
    };
    s.satellite
        .validate()
        .map_err(|e| config_err("scenario.satellite", e))?;
    s.fading.validate().map_err(|e| config_err("scenario.fading", e))?;
    s.interferers
        .validate()
        .map_err(|e| config_err("scenario.interferers", e))?;
    s.validate().map_err(|e| config_err("scenario", e))?;
    if let Some(db) = c.snr_db {
        if !db.is_finite() {
            return Err(CliError::Config(format!("scenario.snr_db must be finite, got {db}")));
        }
        s = s
            .with_mean_received_snr_db(db)
            .map_err(|e| config_err("scenario.snr_db", e))?;
    }
    Ok(s)
}

/// Parses a configuration relative to the working directory.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    parse_config_in(text, Path::new("."), &Overrides::default())
}

/// Parses a configuration; relative paths resolve against `base`.
pub fn parse_config_in(text: &str, base: &Path, overrides: &Overrides) -> Result<RunConfig, CliError> {
    let mut file: FileConfig = parse_toml(text, "")?;
    let command = file
        .command
        .ok_or_else(|| CliError::Config("missing key `command`".into()))?;
    let seed = overrides
        .seed
        .or(file.seed)
        .ok_or_else(|| CliError::Config("missing key `seed` (or pass --seed)".into()))?;
    let output = overrides
        .output
        .clone()
        .or(file.output.clone())
        .ok_or_else(|| CliError::Config("missing key `output` (or pass --output)".into()))?;
    let output = if output.is_relative() && overrides.output.is_none() {
        base.join(output)
    } else {
        output
    };
    match output.parent().filter(|p| !p.as_os_str().is_empty()) {
        Some(dir) if !dir.is_dir() => {
            return Err(CliError::Config(format!(
                "output directory {} does not exist",
                dir.display()
            )))
        }
        _ => {}
    }

    let scenario_cfg = match (&file.scenario_file, &file.scenario) {
        (Some(_), Some(_)) => {
            return Err(CliError::Config(
                "give either scenario_file or a [scenario] table, not both".into(),
            ))
        }
        (Some(path), None) => {
            let path = base.join(path);
            let text = fs::read_to_string(&path)
                .map_err(|e| CliError::Config(format!("scenario_file {}: {e}", path.display())))?;
            parse_toml::<ScenarioConfig>(&text, "scenario.")?
        }
        (None, Some(s)) => s.clone(),
        (None, None) => ScenarioConfig::default(),
    };
    let scenario = build_scenario(&scenario_cfg, seed)?;

    let coding = match file.coding.rate {
        Some(r) => CodingSpec::with_rate(file.coding.blocklength, r),
        None => CodingSpec::new(file.coding.blocklength, file.coding.code_size_bits),
    }
    .map_err(|e| config_err("coding", e))?;
    let error_model = ErrorModel {
        method: file.error_model.method,
        sample_budget: file.error_model.sample_budget,
        quad_tolerance: file.error_model.quad_tolerance,
    };
    error_model.validate().map_err(|e| config_err("error_model", e))?;
    let arrival = file.arrival.model();
    arrival.validate().map_err(|e| config_err("arrival", e))?;
    if let Some(eps) = file.service.epsilon {
        if !(0.0..1.0).contains(&eps) {
            return Err(CliError::Config(format!(
                "service.epsilon must lie in [0, 1), got {eps}"
            )));
        }
    }
    if file.aoi.updates < 1 {
        return Err(CliError::Config("aoi.updates must be >= 1".into()));
    }
    if file.paoi.a_th.is_empty() {
        return Err(CliError::Config("paoi.a_th must not be empty".into()));
    }
    if let Some(a) = file.paoi.a_th.iter().find(|a| !(**a >= 0.0 && a.is_finite())) {
        return Err(CliError::Config(format!(
            "paoi.a_th entries must be finite and >= 0, got {a}"
        )));
    }
    if let Some(t) = file.paoi.theta {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::Config(format!("paoi.theta must be > 0, got {t}")));
        }
    }
    file.delay
        .block_arrival()
        .validate()
        .map_err(|e| config_err("delay", e))?;
    if file.delay.d_th.is_empty() {
        return Err(CliError::Config("delay.d_th must not be empty".into()));
    }
    if let Some(eps) = file.delay.epsilon {
        if !(0.0..=1.0).contains(&eps) {
            return Err(CliError::Config(format!("delay.epsilon must lie in [0, 1], got {eps}")));
        }
    }

    file.command = Some(command);
    file.seed = Some(seed);
    file.output = None;
    file.scenario_file = None;
    file.scenario = Some(scenario_cfg);
    let resolved = toml::to_string(&file).map_err(|e| config_err("echo", e))?;

    let rc = RunConfig {
        command,
        output,
        seed,
        scenario,
        coding,
        error_model,
        arrival,
        service: file.service,
        exponent: file.exponent,
        aoi: file.aoi,
        paoi: file.paoi,
        delay: file.delay,
        sweep: file.sweep,
        resolved,
    };
    if command == Command::Sweep {
        rc.sweep_spec().validate().map_err(|e| config_err("sweep", e))?;
    }
    Ok(rc)
}
