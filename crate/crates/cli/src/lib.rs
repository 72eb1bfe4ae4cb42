//! Command-line harness: system-file parsing, subcommand drivers, tower
//! sweeps and CSV reports over the counting and geometry kernels.

pub mod drivers;
pub mod report;
pub mod sysfile;
