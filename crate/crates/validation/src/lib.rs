//! Acceptance suite for the pipeline. Everything lives in
//! `tests/acceptance.rs`; run it with `cargo test -p rdr-validation`.
