//! Benchmarks for the satqos numerics live in `benches/`.

pub use satqos::*;
