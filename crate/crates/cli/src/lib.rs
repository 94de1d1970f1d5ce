//! Configuration, export and command-line orchestration for `biofilm-core`.
//!
//! * [`expr`]: the analytic-data mini-language.
//! * [`config`]: the run configuration file.
//! * [`export`]: CSV and legacy VTK field files.
//! * [`run`]: the slab driver behind `biofilm simulate`.
//! * [`verify`]: the built-in verification suites behind `biofilm verify`.

pub mod config;
pub mod export;
pub mod expr;
pub mod run;
pub mod verify;
