//! Criterion benchmarks for the pulse pipeline; see `benches/pipeline.rs`.
