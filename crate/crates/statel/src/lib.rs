//! File formats and the `statel` command-line tool for `statel-core`.

pub mod cli;
pub mod envelope;
pub mod io;
pub mod suite;
