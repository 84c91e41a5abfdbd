//! Criterion benchmarks for the clustering and vectorization hot paths;
//! see `benches/`.
