//! Criterion benchmarks for `cpcurve`; see `benches/`.
