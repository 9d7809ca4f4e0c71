//! Benchmarks for `gcq-core`; see `benches/solvers.rs`. Run with
//! `cargo bench -p gcq-bench`.
