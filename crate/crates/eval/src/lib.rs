//! Evaluation-only crate: the acceptance suite lives in `tests/acceptance.rs`
//! and the criterion benchmarks in `benches/`.
