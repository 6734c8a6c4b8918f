//! Criterion benchmarks for `qsalloc-core`; see `benches/`.
