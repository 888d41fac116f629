//! Benchmarks live in benches/; see `cargo bench -p discrim-bench`.
