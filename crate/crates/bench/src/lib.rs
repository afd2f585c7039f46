//! Criterion benchmarks for the evolution engine and training loop.
