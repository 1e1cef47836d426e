//! Criterion benchmarks for the stitchkit pipeline; see `benches/`.
