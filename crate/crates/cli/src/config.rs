use std::time::Duration;

use clap::{Args, ValueEnum};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Text,
    Structured,
}

/// Flags shared by every subcommand. Flags win over `CYCLEGUESS_*` variables.
#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Maximum number of candidate colourings an enumeration may visit
    #[arg(long, global = true, env = "CYCLEGUESS_BUDGET", default_value_t = 100_000_000)]
    pub budget: u64,

    /// Solver time limit in seconds
    #[arg(long, global = true, env = "CYCLEGUESS_TIMEOUT", default_value_t = 300)]
    pub timeout: u64,

    /// Slack below which an entropy inequality fails
    #[arg(long, global = true, env = "CYCLEGUESS_TOLERANCE", default_value_t = 1e-9)]
    pub tolerance: f64,

    #[arg(long, global = true, env = "CYCLEGUESS_SEED", default_value_t = 0)]
    pub seed: u64,

    #[arg(long, global = true, env = "CYCLEGUESS_FORMAT", value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,

    /// Worker threads (0 = all cores)
    #[arg(long, global = true, env = "CYCLEGUESS_THREADS", default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub enumeration_budget: u64,
    pub solver_time_budget_s: u64,
    pub tolerance: f64,
    pub seed: u64,
    pub output_format: OutputFormat,
    #[serde(skip)]
    pub threads: usize,
}

impl RunConfig {
    pub fn from_args(g: &GlobalArgs) -> Result<Self, String> {
        if g.budget == 0 {
            return Err("--budget must be positive".into());
        }
        if g.timeout == 0 {
            return Err("--timeout must be positive".into());
        }
        if !(g.tolerance > 0.0 && g.tolerance <= 1e-3) {
            return Err(format!("--tolerance must lie in (0, 1e-3], got {}", g.tolerance));
        }
        Ok(RunConfig {
            enumeration_budget: g.budget,
            solver_time_budget_s: g.timeout,
            tolerance: g.tolerance,
            seed: g.seed,
            output_format: g.format,
            threads: g.threads,
        })
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs(self.solver_time_budget_s)
    }
}
