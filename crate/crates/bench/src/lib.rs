//! Criterion benchmarks for the halfspace kernels; see `benches/kernels.rs`.
