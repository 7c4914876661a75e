//! Criterion benchmarks for the kernels in `slconvex-core`; see `benches/`.
