//! Shared helpers for the `simrun` and `simbatch` binaries.

use anyhow::{Context, Result};
use manet_sim::Scenario;

/// Environment variable that overrides a scenario's base seed.
pub const SEED_ENV: &str = "SIM_BASE_SEED";

/// Seed precedence: `--seed` flag, then `SIM_BASE_SEED`, then the scenario
/// file.
pub fn effective_seed(flag: Option<u64>, scn: &Scenario) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .with_context(|| format!("{SEED_ENV} must be an unsigned integer, got {v:?}")),
        Err(_) => Ok(scn.base_seed),
    }
}
