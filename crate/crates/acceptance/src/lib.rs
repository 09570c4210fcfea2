//! Acceptance checks live in `tests/acceptance.rs`. Run them with
//! `cargo test -p biortho-acceptance -- --nocapture` to see one line per
//! criterion.
