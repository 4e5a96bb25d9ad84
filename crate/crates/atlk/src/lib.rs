//! File formats and the command line for `atlk-core`.

pub mod cli;
pub mod dict;
pub mod model;
pub mod verify;
