//! Acceptance checks for `gge-thermo`. Everything lives in
//! `tests/acceptance.rs`; run it with `cargo test -p gge-thermo-validation`.
