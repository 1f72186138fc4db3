//! Config-driven runner for `lel-core` experiments: strict JSON configs, CSV
//! traces, a JSON run summary and the built-in demos and invariant checks.

pub mod checks;
pub mod config;
pub mod demos;
pub mod runner;

pub use config::{validate_config, ConfigErrors, ExperimentConfig, FieldError};
pub use runner::{execute, run, HarnessError, RunOutput, RunSummary};

/// Environment variable holding the worker count; 0 or unset means automatic.
pub const THREADS_ENV: &str = "LEL_THREADS";

/// Sizes the global rayon pool from [`THREADS_ENV`].
pub fn init_thread_pool() -> anyhow::Result<()> {
    let n = match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse::<usize>().map_err(|_| {
            anyhow::anyhow!("{THREADS_ENV} must be a nonnegative integer, got {v:?}")
        })?,
        Err(_) => 0,
    };
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    Ok(())
}
