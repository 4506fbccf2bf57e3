//! Holds the `acceptance` test target only. Run it with
//! `cargo test -p sffm-validation --test acceptance -- --nocapture`.
