//! Benchmark-only crate; the targets live in `benches/`. Run with
//! `cargo bench -p shapebench-bench`.
