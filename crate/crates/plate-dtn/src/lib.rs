//! Configuration, sweep orchestration and file output for the plate DtN scattering solver.

pub mod config;
pub mod output;
pub mod pipeline;
pub mod pool;

pub use config::{ConfigError, Plan, RunConfig};
pub use pipeline::{check, run, run_sweep, FrequencyResult, RunError, RunSummary};

/// Environment variable that overrides the configured worker count.
pub const WORKERS_ENV: &str = "PLATE_DTN_WORKERS";

/// Worker count: command-line flag first, then the environment, then the config file.
pub fn resolve_workers(flag: Option<usize>, env: Option<&str>, configured: usize) -> Result<usize, String> {
    let n = match (flag, env) {
        (Some(n), _) => n,
        (None, Some(v)) => v.trim().parse::<usize>().map_err(|_| format!("{WORKERS_ENV} = {v:?} is not a worker count"))?,
        (None, None) => configured,
    };
    if n == 0 {
        return Err("the worker count must be at least 1".into());
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worker_precedence() {
        assert_eq!(resolve_workers(Some(3), Some("5"), 2), Ok(3));
        assert_eq!(resolve_workers(None, Some(" 5 "), 2), Ok(5));
        assert_eq!(resolve_workers(None, None, 2), Ok(2));
        assert!(resolve_workers(None, Some("many"), 2).is_err());
        assert!(resolve_workers(Some(0), None, 2).is_err());
    }
}
