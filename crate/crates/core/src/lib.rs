//! Statistical QoS metrics for satellite-terrestrial links under finite
//! blocklength coding.
//!
//! The crate covers the shadowed-Rician satellite channel with terrestrial
//! interferers ([`channel`]), finite-blocklength error probabilities and
//! error exponents ([`fbc`]), status-update queue simulation ([`aoi`]),
//! Mellin-transform network-calculus bounds ([`snc`]) and the scenario
//! sweeps built on top of them ([`experiments`]).

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aoi;
pub mod channel;
pub mod error;
pub mod expect;
pub mod experiments;
pub mod fbc;
pub mod optimize;
pub mod quad;
pub mod report;
pub mod rng;
pub mod snc;
pub mod special;

pub use aoi::{ArrivalModel, ServiceModel, UpdateTrace};
pub use channel::{
    aggregate_interference, pathloss_factor, place_interferers, sample_channel_gain, shadowed_rician_pdf,
    sinr_normalized, FadingLink, InterfererField, LinkBudget, Scenario, ShadowedRicianParams, SinrModel,
};
pub use error::{QosError, Result};
pub use expect::{ErrorModel, Estimate, Method};
pub use experiments::{Figure, HybridModel, SweepSpec, Table};
pub use fbc::{CodingSpec, ErrorExponent};
pub use report::{QosKind, QosReport};
pub use snc::{BlockArrival, BlockService, Horizon};
pub use special::{hyp1f1_integer, q_function};
