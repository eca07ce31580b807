//! Criterion benchmarks for the factorization pipelines; see `benches/`.
