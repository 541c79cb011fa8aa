//! Criterion benchmarks for `hcgame-core`; see `benches/`.
