//! Holds the workspace acceptance suite in `tests/acceptance.rs`. The suite
//! lives in its own package so that it runs after the unit and integration
//! tests of the other crates.
