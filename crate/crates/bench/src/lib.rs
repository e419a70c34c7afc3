//! Benchmark-only crate; see `benches/kernels.rs`.
