//! Criterion benchmarks for the exposure pipeline live in `benches/`.
