//! Sweep a scenario over send rates, node counts, and policies; write the
//! results — and optionally a policy comparison — as CSV.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Parser;
use manet_sim::batch::{run_batch, SweepSpec};
use manet_sim::Scenario;
use manet_sim_cli::effective_seed;

/// Batch-sweep simulator front end.
#[derive(Parser, Debug)]
#[command(name = "simbatch", version, about)]
struct Args {
    /// Scenario file (`key = value` format).
    scenario: PathBuf,
    /// Sweep spec, repeatable: `rate=5,10,20` or `nodes=10,20,30`.
    #[arg(long)]
    sweep: Vec<String>,
    /// Replications per cell (defaults to the scenario's setting).
    #[arg(long)]
    reps: Option<u32>,
    /// Comma-separated policies to run (defaults to the scenario's policy).
    #[arg(long, value_delimiter = ',')]
    policies: Vec<String>,
    /// Base seed (overrides SIM_BASE_SEED and the scenario file).
    #[arg(long)]
    seed: Option<u64>,
    /// Write all rows to this CSV file (stdout when omitted).
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write a side-by-side policy comparison to this CSV file.
    #[arg(long)]
    compare: Option<PathBuf>,
}

fn main() -> Result<()> {
    let args = Args::parse();
    let scn = Scenario::load(&args.scenario)?;
    let sweeps = args
        .sweep
        .iter()
        .map(|s| SweepSpec::parse(s))
        .collect::<Result<Vec<_>, _>>()?;
    let reps = args.reps.unwrap_or(scn.replications);
    if reps == 0 {
        bail!("--reps must be at least 1");
    }
    let policies: Vec<String> = if args.policies.is_empty() {
        vec![scn.policy.clone()]
    } else {
        args.policies.clone()
    };
    let seed = effective_seed(args.seed, &scn)?;

    let result = run_batch(&scn, &policies, &sweeps, reps, seed)?;

    let csv = result.to_csv();
    match &args.csv {
        Some(path) => {
            std::fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?;
            let cells = result.rows.iter().filter(|r| r.seed.is_none()).count();
            eprintln!("wrote {} rows ({} cells) to {}", result.rows.len(), cells, path.display());
        }
        None => print!("{csv}"),
    }
    if let Some(path) = &args.compare {
        let cmp = result.compare_csv(&policies)?;
        std::fs::write(path, cmp).with_context(|| format!("writing {}", path.display()))?;
        eprintln!("wrote comparison to {}", path.display());
    }
    Ok(())
}
