//! Criterion benchmarks for lagrangekit; see `benches/`.
