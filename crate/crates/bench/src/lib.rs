//! Criterion benchmarks for the `ncpoisson` kernels; see `benches/kernels.rs`.
