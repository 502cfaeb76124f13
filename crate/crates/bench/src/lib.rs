//! Criterion benchmarks for tdoa-core; see `benches/`.
