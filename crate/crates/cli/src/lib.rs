//! Front end for `nctrace`: run configurations, the on-disk spectrum cache,
//! JSON/CSV reports and the acceptance suite behind `nctrace selftest`.

pub mod acceptance;
pub mod cache;
pub mod config;
pub mod report;
pub mod run;

pub use cache::{CacheKey, Lookup, SpectrumCache};
pub use config::{Command, EstimatorSelection, RunConfig};
pub use report::Report;
pub use run::{run, Runner};

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const CONFIG: u8 = 2;
    pub const NUMERIC: u8 = 3;
}

/// Exit code for an error that aborted a run.
pub fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<nctrace::Error>() {
        Some(e) if !e.is_config() => exit::NUMERIC,
        _ => exit::CONFIG,
    }
}
