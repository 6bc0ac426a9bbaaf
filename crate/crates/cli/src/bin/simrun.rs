//! Run one replication of a scenario and report its metrics.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Parser;
use manet_sim::batch::{BatchResult, BatchRow};
use manet_sim::{run_scenario, Scenario};
use manet_sim_cli::effective_seed;

/// Single-run simulator front end.
#[derive(Parser, Debug)]
#[command(name = "simrun", version, about)]
struct Args {
    /// Scenario file (`key = value` format).
    scenario: PathBuf,
    /// Master seed (overrides SIM_BASE_SEED and the scenario file).
    #[arg(long)]
    seed: Option<u64>,
    /// Write the packet-event trace to this file.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the run's metrics as CSV to this file.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Override the scenario's routing policy.
    #[arg(long)]
    policy: Option<String>,
}

fn main() -> Result<()> {
    let args = Args::parse();
    let mut scn = Scenario::load(&args.scenario)?;
    if let Some(policy) = args.policy {
        scn.policy = policy;
        scn.validate()?;
    }
    let seed = effective_seed(args.seed, &scn)?;
    let out = run_scenario(&scn, seed)?;

    if let Some(path) = &args.trace {
        out.trace
            .write_to(path)
            .with_context(|| format!("writing trace to {}", path.display()))?;
    }
    if let Some(path) = &args.csv {
        let mut result = BatchResult::default();
        result.rows.push(BatchRow {
            scenario: out.scenario.clone(),
            policy: out.policy.clone(),
            seed: Some(seed),
            rate_pps: scn.cbr_rate_pps,
            nodes: scn.n_total(),
            deadline_s: scn.deadline_s,
            delivery_ratio: out.report.delivery_ratio,
            in_time_ratio: out.report.in_time_ratio,
            mean_delay_s: out.report.mean_delay_s,
            lifetime_smh_s: out.report.lifetime.smh_s,
            lifetime_censored: if out.report.lifetime.smh_censored { 1.0 } else { 0.0 },
            energy_per_bit_j: out.report.energy_per_bit_j,
        });
        std::fs::write(path, result.to_csv())
            .with_context(|| format!("writing csv to {}", path.display()))?;
    }

    let r = &out.report;
    println!("scenario       {}", out.scenario);
    println!("policy         {}", out.policy);
    println!("seed           {}", seed);
    println!("events         {}", out.events_processed);
    println!("generated      {}", r.generated);
    println!("delivered      {}", r.delivered);
    println!("delivery_ratio {}", r.delivery_ratio);
    println!("in_time_ratio  {}", r.in_time_ratio);
    match r.mean_delay_s {
        Some(d) => println!("mean_delay_s   {d}"),
        None => println!("mean_delay_s   n/a (nothing delivered)"),
    }
    println!(
        "lifetime_smh_s {}{}",
        r.lifetime.smh_s,
        if r.lifetime.smh_censored { " (censored)" } else { "" }
    );
    match r.energy_per_bit_j {
        Some(e) => println!("energy_per_bit {e}"),
        None => println!("energy_per_bit n/a (nothing delivered)"),
    }
    println!("consumed_j     {}", r.consumed_j);
    Ok(())
}
