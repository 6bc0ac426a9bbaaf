//! Parameter sweeps over scenarios: run a grid of (sweep values × policies ×
//! replications), collect per-run and mean rows, and render them as CSV.
//!
//! Replication `r` of every cell uses seed `base_seed + r`, so runs that
//! differ only in policy are paired sample-by-sample.

use std::fmt::Write as _;

use thiserror::Error;

use crate::scenario::{Scenario, ScenarioError};
use crate::sim::{run_scenario, RunOutput};

#[derive(Debug, Error)]
pub enum BatchError {
    #[error("sweep spec `{0}`: expected `rate=v1,v2,...` or `nodes=v1,v2,...`")]
    BadSweep(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("comparison needs at least two policies")]
    NotEnoughPolicies,
}

/// Which scenario knob a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKey {
    /// Payload send rate, packets per second (applies to every flow).
    Rate,
    /// Total node count, split evenly between the two host classes.
    Nodes,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub key: SweepKey,
    pub values: Vec<f64>,
}

impl SweepSpec {
    /// Parse `rate=5,10,20` or `nodes=10,20,30`.
    pub fn parse(s: &str) -> Result<SweepSpec, BatchError> {
        let bad = || BatchError::BadSweep(s.to_string());
        let (key, rest) = s.split_once('=').ok_or_else(bad)?;
        let key = match key.trim() {
            "rate" => SweepKey::Rate,
            "nodes" => SweepKey::Nodes,
            _ => return Err(bad()),
        };
        let mut values = Vec::new();
        for part in rest.split(',') {
            let v: f64 = part.trim().parse().map_err(|_| bad())?;
            if v <= 0.0 {
                return Err(bad());
            }
            values.push(v);
        }
        if values.is_empty() {
            return Err(bad());
        }
        Ok(SweepSpec { key, values })
    }
}

fn apply(scn: &Scenario, combo: &[(SweepKey, f64)]) -> Scenario {
    let mut scn = scn.clone();
    for &(key, v) in combo {
        match key {
            SweepKey::Rate => {
                scn.cbr_rate_pps = v;
                for f in &mut scn.flow_specs {
                    f.rate_pps = None; // swept rate overrides per-flow rates
                }
            }
            SweepKey::Nodes => {
                let n = v.round() as usize;
                scn.n_smh = n / 2;
                scn.n_lmh = n - n / 2;
            }
        }
    }
    scn
}

/// One CSV row: a single replication, or the per-cell mean (`seed` absent).
#[derive(Debug, Clone, PartialEq)]
pub struct BatchRow {
    pub scenario: String,
    pub policy: String,
    pub seed: Option<u64>,
    pub rate_pps: f64,
    pub nodes: usize,
    pub deadline_s: f64,
    pub delivery_ratio: f64,
    pub in_time_ratio: f64,
    pub mean_delay_s: Option<f64>,
    pub lifetime_smh_s: f64,
    /// 0 or 1 on replication rows; the censored fraction on mean rows.
    pub lifetime_censored: f64,
    pub energy_per_bit_j: Option<f64>,
}

pub const CSV_HEADER: &str = "scenario,policy,seed,rate_pps,nodes,deadline_s,delivery_ratio,in_time_ratio,mean_delay_s,lifetime_smh_s,lifetime_censored,energy_per_bit_j";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl BatchRow {
    fn from_run(out: &RunOutput, rate_pps: f64, nodes: usize, deadline_s: f64) -> BatchRow {
        let r = &out.report;
        BatchRow {
            scenario: out.scenario.clone(),
            policy: out.policy.clone(),
            seed: Some(out.seed),
            rate_pps,
            nodes,
            deadline_s,
            delivery_ratio: r.delivery_ratio,
            in_time_ratio: r.in_time_ratio,
            mean_delay_s: r.mean_delay_s,
            lifetime_smh_s: r.lifetime.smh_s,
            lifetime_censored: if r.lifetime.smh_censored { 1.0 } else { 0.0 },
            energy_per_bit_j: r.energy_per_bit_j,
        }
    }

    fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.scenario,
            self.policy,
            self.seed.map(|s| s.to_string()).unwrap_or_else(|| "mean".to_string()),
            self.rate_pps,
            self.nodes,
            self.deadline_s,
            self.delivery_ratio,
            self.in_time_ratio,
            opt(self.mean_delay_s),
            self.lifetime_smh_s,
            self.lifetime_censored,
            opt(self.energy_per_bit_j),
        )
    }
}

fn mean_of(rows: &[BatchRow]) -> BatchRow {
    let n = rows.len() as f64;
    let avg = |f: &dyn Fn(&BatchRow) -> f64| rows.iter().map(f).sum::<f64>() / n;
    let avg_opt = |f: &dyn Fn(&BatchRow) -> Option<f64>| {
        let vals: Vec<f64> = rows.iter().filter_map(f).collect();
        if vals.is_empty() {
            None
        } else {
            Some(vals.iter().sum::<f64>() / vals.len() as f64)
        }
    };
    BatchRow {
        scenario: rows[0].scenario.clone(),
        policy: rows[0].policy.clone(),
        seed: None,
        rate_pps: rows[0].rate_pps,
        nodes: rows[0].nodes,
        deadline_s: rows[0].deadline_s,
        delivery_ratio: avg(&|r| r.delivery_ratio),
        in_time_ratio: avg(&|r| r.in_time_ratio),
        mean_delay_s: avg_opt(&|r| r.mean_delay_s),
        lifetime_smh_s: avg(&|r| r.lifetime_smh_s),
        lifetime_censored: avg(&|r| r.lifetime_censored),
        energy_per_bit_j: avg_opt(&|r| r.energy_per_bit_j),
    }
}

#[derive(Debug, Default)]
pub struct BatchResult {
    /// Replication rows followed by a mean row, per (sweep cell × policy).
    pub rows: Vec<BatchRow>,
}

impl BatchResult {
    /// The mean row for a given cell, if that cell ran.
    pub fn mean_row(&self, policy: &str, rate_pps: f64, nodes: usize) -> Option<&BatchRow> {
        self.rows.iter().find(|r| {
            r.seed.is_none() && r.policy == policy && r.rate_pps == rate_pps && r.nodes == nodes
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.csv_line());
            out.push('\n');
        }
        out
    }

    /// Side-by-side comparison of the mean rows of every policy, one line
    /// per sweep cell, with lifetime and energy-per-bit improvements of each
    /// policy over the first (baseline) policy.
    pub fn compare_csv(&self, policies: &[String]) -> Result<String, BatchError> {
        if policies.len() < 2 {
            return Err(BatchError::NotEnoughPolicies);
        }
        let mut header = String::from("scenario,rate_pps,nodes,deadline_s");
        for p in policies {
            write!(
                header,
                ",{p}_delivery_ratio,{p}_in_time_ratio,{p}_mean_delay_s,{p}_lifetime_smh_s,{p}_energy_per_bit_j"
            )
            .unwrap();
        }
        for p in &policies[1..] {
            write!(header, ",{p}_lifetime_improvement_pct,{p}_energy_per_bit_reduction_pct").unwrap();
        }
        let mut out = header;
        out.push('\n');
        // Cells in first-appearance order of the baseline policy's means.
        let cells: Vec<(f64, usize)> = self
            .rows
            .iter()
            .filter(|r| r.seed.is_none() && r.policy == policies[0])
            .map(|r| (r.rate_pps, r.nodes))
            .collect();
        for (rate, nodes) in cells {
            let base = self.mean_row(&policies[0], rate, nodes).expect("cell listed above");
            let mut line = format!("{},{},{},{}", base.scenario, rate, nodes, base.deadline_s);
            for p in policies {
                let row = self.mean_row(p, rate, nodes);
                match row {
                    Some(r) => write!(
                        line,
                        ",{},{},{},{},{}",
                        r.delivery_ratio,
                        r.in_time_ratio,
                        opt(r.mean_delay_s),
                        r.lifetime_smh_s,
                        opt(r.energy_per_bit_j)
                    )
                    .unwrap(),
                    None => line.push_str(",,,,,"),
                }
            }
            for p in &policies[1..] {
                let row = self.mean_row(p, rate, nodes);
                let lift = row.map(|r| {
                    (r.lifetime_smh_s - base.lifetime_smh_s) / base.lifetime_smh_s * 100.0
                });
                let cut = row.and_then(|r| {
                    let (a, b) = (base.energy_per_bit_j?, r.energy_per_bit_j?);
                    Some((a - b) / a * 100.0)
                });
                write!(line, ",{},{}", opt(lift), opt(cut)).unwrap();
            }
            out.push_str(&line);
            out.push('\n');
        }
        Ok(out)
    }
}

/// Run the full grid: every sweep combination × every policy × `reps`
/// replications (seeds `base_seed..base_seed+reps`).
pub fn run_batch(
    scn: &Scenario,
    policies: &[String],
    sweeps: &[SweepSpec],
    reps: u32,
    base_seed: u64,
) -> Result<BatchResult, BatchError> {
    let mut combos: Vec<Vec<(SweepKey, f64)>> = vec![Vec::new()];
    for sweep in sweeps {
        let mut next = Vec::with_capacity(combos.len() * sweep.values.len());
        for combo in &combos {
            for &v in &sweep.values {
                let mut c = combo.clone();
                c.push((sweep.key, v));
                next.push(c);
            }
        }
        combos = next;
    }
    let mut result = BatchResult::default();
    for combo in &combos {
        for policy in policies {
            let mut cell = apply(scn, combo);
            cell.policy = policy.clone();
            cell.validate()?;
            let rate = cell.cbr_rate_pps;
            let nodes = cell.n_total();
            let mut rows = Vec::with_capacity(reps as usize);
            for r in 0..reps {
                let out = run_scenario(&cell, base_seed + u64::from(r))?;
                rows.push(BatchRow::from_run(&out, rate, nodes, cell.deadline_s));
            }
            let mean = mean_of(&rows);
            result.rows.extend(rows);
            result.rows.push(mean);
        }
    }
    Ok(result)
}
