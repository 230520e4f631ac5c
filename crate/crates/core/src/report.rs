//! Bound and exponent reports with their CSV row form.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QosKind {
    Aoi,
    Delay,
    Error,
}

impl QosKind {
    pub fn as_str(self) -> &'static str {
        match self {
            QosKind::Aoi => "aoi",
            QosKind::Delay => "delay",
            QosKind::Error => "error",
        }
    }
}

/// Shortest round-trip text for `x`; exponent form outside `[1e-5, 1e16]`.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// A bound or exponent together with the parameters that produced it.
///
/// For AoI and delay reports `bound` is the violation-probability bound
/// clamped to `[0, 1]` and `raw_bound` the unclamped value. For error
/// reports `theta` is the error exponent, `threshold` the coding rate,
/// `kernel` the Gallager function at the optimizing `ρ` and `bound` the
/// implied error bound `e^{−nθ}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QosReport {
    pub kind: QosKind,
    pub theta: f64,
    pub threshold: f64,
    pub kernel: f64,
    pub bound: f64,
    pub raw_bound: f64,
    pub stable: bool,
    pub seed: u64,
}

impl QosReport {
    pub const CSV_HEADER: [&'static str; 7] = ["kind", "theta", "threshold", "kernel", "bound", "stable", "seed"];

    pub fn csv_record(&self) -> [String; 7] {
        [
            self.kind.as_str().to_string(),
            num(self.theta),
            num(self.threshold),
            num(self.kernel),
            num(self.bound),
            self.stable.to_string(),
            self.seed.to_string(),
        ]
    }
}
