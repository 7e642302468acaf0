//! Criterion benchmarks for `casimirbind-core`; see `benches/potentials.rs`.
