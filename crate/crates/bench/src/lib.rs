//! Criterion benchmarks for the conference simulator; see `benches/`.
