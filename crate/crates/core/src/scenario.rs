//! Scenario configuration: a flat `key = value` file format describing the
//! area, node population, radio, energy, traffic, and routing policy of a
//! run, with validation that names the offending key.

use std::collections::BTreeSet;
use std::path::Path;

use thiserror::Error;

use crate::mobility::{Area, MotionParams};
use crate::netmodel::LinkParams;
use crate::qos::{check_weight_sum, Policy, QosError, WEIGHT_SUM_TOL};
use crate::routing::{ControlSizes, NodeId};
use crate::traffic::CbrFlow;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario file not found: {0}")]
    MissingFile(String),
    #[error("scenario line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("scenario key `{key}`: {reason}")]
    Validation { key: String, reason: String },
}

fn invalid(key: &str, reason: impl Into<String>) -> ScenarioError {
    ScenarioError::Validation {
        key: key.to_string(),
        reason: reason.into(),
    }
}

/// Node population class: small mobile hosts (slow, small battery) and
/// large mobile hosts (fast, big battery). Ids `0..n_smh` are small hosts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeClass {
    Smh,
    Lmh,
}

/// Flow endpoint spec; negative values index from the end of the node table
/// (`-1` is the last node), so flows survive node-count sweeps.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSpec {
    pub src: i64,
    pub dst: i64,
    pub rate_pps: Option<f64>,
    pub deadline_s: Option<f64>,
}

/// Full run configuration. Field defaults describe the reference setup:
/// a 1500 m × 500 m area, 25 + 25 nodes, 2 Mb/s radio with 250 m range,
/// 50/100 J batteries at 1.4/1.0 W, and a single 10 pkt/s flow from node 0
/// to the last node with a 15 s deadline.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub area_width_m: f64,
    pub area_height_m: f64,
    pub n_smh: usize,
    pub n_lmh: usize,
    pub energy_smh_j: f64,
    pub energy_lmh_j: f64,
    pub p_tx_w: f64,
    pub p_rx_w: f64,
    pub range_m: f64,
    pub bitrate_bps: f64,
    pub v_min_mps: f64,
    pub v_max_smh_mps: f64,
    pub v_max_lmh_mps: f64,
    pub pause_smh_s: f64,
    pub pause_lmh_s: f64,
    pub queue_capacity: usize,
    pub packet_size_bytes: u32,
    pub t_l_s: f64,
    /// Worst-case neighbor transmission time; defaults to the payload
    /// serialization time when unset.
    pub t_t_s: Option<f64>,
    /// Admission-test transmission bound; defaults to `t_t_s`.
    pub t_ts_s: Option<f64>,
    pub reply_window_s: f64,
    pub cache_ttl_s: f64,
    pub duration_s: f64,
    pub base_seed: u64,
    pub replications: u32,
    pub policy: String,
    /// Optional `w_energy,w_queue,w_delay` override; must sum to 1.
    pub weights: Option<[f64; 3]>,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub rtdsr_admission: bool,
    pub deadline_s: f64,
    pub cbr_rate_pps: f64,
    pub cbr_start_s: f64,
    pub cbr_stop_s: Option<f64>,
    /// Explicit flows; empty means one default flow `0 -> last`.
    pub flow_specs: Vec<FlowSpec>,
    pub rreq_base_bytes: u32,
    pub rreq_per_hop_bytes: u32,
    pub rrep_base_bytes: u32,
    pub rrep_per_stamp_bytes: u32,
    pub rerr_bytes: u32,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            name: "default".to_string(),
            area_width_m: 1500.0,
            area_height_m: 500.0,
            n_smh: 25,
            n_lmh: 25,
            energy_smh_j: 50.0,
            energy_lmh_j: 100.0,
            p_tx_w: 1.4,
            p_rx_w: 1.0,
            range_m: 250.0,
            bitrate_bps: 2_000_000.0,
            v_min_mps: 0.1,
            v_max_smh_mps: 2.0,
            v_max_lmh_mps: 20.0,
            pause_smh_s: 10.0,
            pause_lmh_s: 0.0,
            queue_capacity: 50,
            packet_size_bytes: 512,
            t_l_s: 0.005,
            t_t_s: None,
            t_ts_s: None,
            reply_window_s: 0.5,
            cache_ttl_s: 5.0,
            duration_s: 1000.0,
            base_seed: 1,
            replications: 5,
            policy: "dsr".to_string(),
            weights: None,
            alpha: 1.0,
            beta: 1.0,
            gamma: 1.0,
            rtdsr_admission: false,
            deadline_s: 15.0,
            cbr_rate_pps: 10.0,
            cbr_start_s: 0.0,
            cbr_stop_s: None,
            flow_specs: Vec::new(),
            rreq_base_bytes: 32,
            rreq_per_hop_bytes: 4,
            rrep_base_bytes: 44,
            rrep_per_stamp_bytes: 16,
            rerr_bytes: 24,
        }
    }
}

impl Scenario {
    pub fn n_total(&self) -> usize {
        self.n_smh + self.n_lmh
    }

    pub fn class_of(&self, node: NodeId) -> NodeClass {
        if node < self.n_smh {
            NodeClass::Smh
        } else {
            NodeClass::Lmh
        }
    }

    pub fn initial_energy_j(&self, class: NodeClass) -> f64 {
        match class {
            NodeClass::Smh => self.energy_smh_j,
            NodeClass::Lmh => self.energy_lmh_j,
        }
    }

    pub fn motion_params(&self, class: NodeClass) -> MotionParams {
        match class {
            NodeClass::Smh => MotionParams {
                v_min_mps: self.v_min_mps,
                v_max_mps: self.v_max_smh_mps,
                pause_s: self.pause_smh_s,
            },
            NodeClass::Lmh => MotionParams {
                v_min_mps: self.v_min_mps,
                v_max_mps: self.v_max_lmh_mps,
                pause_s: self.pause_lmh_s,
            },
        }
    }

    pub fn area(&self) -> Area {
        Area {
            width_m: self.area_width_m,
            height_m: self.area_height_m,
        }
    }

    pub fn link(&self) -> LinkParams {
        LinkParams {
            range_m: self.range_m,
            bitrate_bps: self.bitrate_bps,
        }
    }

    pub fn control_sizes(&self) -> ControlSizes {
        ControlSizes {
            rreq_base: self.rreq_base_bytes,
            rreq_per_hop: self.rreq_per_hop_bytes,
            rrep_base: self.rrep_base_bytes,
            rrep_per_stamp: self.rrep_per_stamp_bytes,
            rerr: self.rerr_bytes,
        }
    }

    /// Payload serialization time (also the default transmission bound).
    pub fn payload_t_tx(&self) -> f64 {
        self.link().t_tx(self.packet_size_bytes)
    }

    pub fn effective_t_t_s(&self) -> f64 {
        self.t_t_s.unwrap_or_else(|| self.payload_t_tx())
    }

    pub fn effective_t_ts_s(&self) -> f64 {
        self.t_ts_s.unwrap_or_else(|| self.effective_t_t_s())
    }

    pub fn effective_stop_s(&self) -> f64 {
        self.cbr_stop_s.unwrap_or(self.duration_s)
    }

    /// Resolve the routing policy: preset, then explicit overrides.
    pub fn resolve_policy(&self) -> Result<Policy, ScenarioError> {
        let mut policy = Policy::from_preset(&self.policy)
            .map_err(|_| invalid("policy", format!("unknown policy preset `{}`", self.policy)))?;
        if let Some(w) = self.weights {
            check_weight_sum(w, WEIGHT_SUM_TOL).map_err(|e| match e {
                QosError::WeightSumError { sum } => {
                    invalid("weights", format!("must sum to 1, got {sum}"))
                }
                _ => invalid("weights", "invalid"),
            })?;
            (policy.qos.w_energy, policy.qos.w_queue, policy.qos.w_delay) = (w[0], w[1], w[2]);
        }
        policy.qos.alpha = self.alpha;
        policy.qos.beta = self.beta;
        policy.qos.gamma = self.gamma;
        policy.qos.t_l_s = self.t_l_s;
        policy.qos.t_t_s = self.effective_t_t_s();
        policy.qos.alw_delay_norm_s = self.reply_window_s;
        policy.qos.alw_e_max_j = self.energy_smh_j.max(self.energy_lmh_j);
        if self.rtdsr_admission {
            policy.rtdsr_admission = true;
        }
        Ok(policy)
    }

    /// Resolve flow specs into concrete flows. Without explicit specs, one
    /// default flow runs from node 0 to the last node.
    pub fn flows(&self) -> Result<Vec<CbrFlow>, ScenarioError> {
        let n = self.n_total() as i64;
        let stop = self.effective_stop_s();
        let resolve = |v: i64| -> Result<NodeId, ScenarioError> {
            let idx = if v < 0 { n + v } else { v };
            if (0..n).contains(&idx) {
                Ok(idx as NodeId)
            } else {
                Err(invalid("flow", format!("endpoint {v} outside 0..{n}")))
            }
        };
        let specs: Vec<FlowSpec> = if self.flow_specs.is_empty() {
            vec![FlowSpec { src: 0, dst: -1, rate_pps: None, deadline_s: None }]
        } else {
            self.flow_specs.clone()
        };
        let mut flows = Vec::with_capacity(specs.len());
        for spec in &specs {
            let src = resolve(spec.src)?;
            let dst = resolve(spec.dst)?;
            if src == dst {
                return Err(invalid("flow", format!("source equals destination ({src})")));
            }
            flows.push(CbrFlow {
                src,
                dst,
                rate_pps: spec.rate_pps.unwrap_or(self.cbr_rate_pps),
                start_s: self.cbr_start_s,
                stop_s: stop,
                deadline_s: spec.deadline_s.unwrap_or(self.deadline_s),
            });
        }
        Ok(flows)
    }

    /// Reject configurations that cannot run.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.area_width_m <= 0.0 || self.area_height_m <= 0.0 {
            return Err(invalid("area_width_m", "area dimensions must be positive"));
        }
        if self.n_total() < 2 {
            return Err(invalid("n_smh", "need at least two nodes"));
        }
        if self.energy_smh_j <= 0.0 || self.energy_lmh_j <= 0.0 {
            return Err(invalid("energy_smh_j", "initial energy must be positive"));
        }
        if self.p_tx_w <= 0.0 || self.p_rx_w <= 0.0 {
            return Err(invalid("p_tx_w", "radio power draw must be positive"));
        }
        if self.range_m <= 0.0 {
            return Err(invalid("range_m", "radio range must be positive"));
        }
        if self.bitrate_bps <= 0.0 {
            return Err(invalid("bitrate_bps", "bitrate must be positive"));
        }
        if self.v_min_mps <= 0.0 {
            return Err(invalid("v_min_mps", "minimum speed must be positive"));
        }
        if self.v_max_smh_mps < self.v_min_mps || self.v_max_lmh_mps < self.v_min_mps {
            return Err(invalid("v_max_smh_mps", "maximum speed below v_min_mps"));
        }
        if self.pause_smh_s < 0.0 || self.pause_lmh_s < 0.0 {
            return Err(invalid("pause_smh_s", "pause must be non-negative"));
        }
        if self.queue_capacity == 0 {
            return Err(invalid("queue_capacity", "queue needs at least one slot"));
        }
        if self.packet_size_bytes == 0 {
            return Err(invalid("packet_size_bytes", "payload size must be positive"));
        }
        if self.t_l_s < 0.0 {
            return Err(invalid("t_l_s", "processing time must be non-negative"));
        }
        if self.reply_window_s <= 0.0 {
            return Err(invalid("reply_window_s", "reply window must be positive"));
        }
        if self.cache_ttl_s < 0.0 {
            return Err(invalid("cache_ttl_s", "cache ttl must be non-negative"));
        }
        if self.duration_s <= 0.0 {
            return Err(invalid("duration_s", "run length must be positive"));
        }
        if self.replications == 0 {
            return Err(invalid("replications", "need at least one replication"));
        }
        if self.deadline_s <= 0.0 {
            return Err(invalid("deadline_s", "deadline must be positive"));
        }
        if self.cbr_rate_pps <= 0.0 {
            return Err(invalid("cbr_rate_pps", "send rate must be positive"));
        }
        for f in &self.flow_specs {
            if let Some(r) = f.rate_pps {
                if r <= 0.0 {
                    return Err(invalid("flow", "flow rate must be positive"));
                }
            }
            if let Some(d) = f.deadline_s {
                if d <= 0.0 {
                    return Err(invalid("flow", "flow deadline must be positive"));
                }
            }
        }
        self.flows()?;
        self.resolve_policy()?;
        Ok(())
    }

    /// Parse the `key = value` format. `#` starts a comment; the `flow` key
    /// may repeat.
    pub fn parse_str(name: &str, content: &str) -> Result<Scenario, ScenarioError> {
        let mut scn = Scenario {
            name: name.to_string(),
            ..Scenario::default()
        };
        let mut seen = BTreeSet::new();
        for (i, raw) in content.lines().enumerate() {
            let line_no = i + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ScenarioError::Parse {
                line: line_no,
                msg: format!("expected `key = value`, got {line:?}"),
            })?;
            let key = key.trim();
            let value = value.trim();
            if key != "flow" && !seen.insert(key.to_string()) {
                return Err(ScenarioError::Parse {
                    line: line_no,
                    msg: format!("duplicate key `{key}`"),
                });
            }
            apply_key(&mut scn, key, value).map_err(|msg| ScenarioError::Parse {
                line: line_no,
                msg,
            })?;
        }
        scn.validate()?;
        Ok(scn)
    }

    /// Load and validate a scenario file; the file stem becomes the name.
    pub fn load(path: &Path) -> Result<Scenario, ScenarioError> {
        let content = std::fs::read_to_string(path)
            .map_err(|_| ScenarioError::MissingFile(path.display().to_string()))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "scenario".to_string());
        Scenario::parse_str(&name, &content)
    }
}

fn apply_key(scn: &mut Scenario, key: &str, value: &str) -> Result<(), String> {
    fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
        value
            .parse()
            .map_err(|_| format!("key `{key}`: cannot parse {value:?}"))
    }
    match key {
        "area_width_m" => scn.area_width_m = num(key, value)?,
        "area_height_m" => scn.area_height_m = num(key, value)?,
        "n_smh" => scn.n_smh = num(key, value)?,
        "n_lmh" => scn.n_lmh = num(key, value)?,
        "energy_smh_j" => scn.energy_smh_j = num(key, value)?,
        "energy_lmh_j" => scn.energy_lmh_j = num(key, value)?,
        "p_tx_w" => scn.p_tx_w = num(key, value)?,
        "p_rx_w" => scn.p_rx_w = num(key, value)?,
        "range_m" => scn.range_m = num(key, value)?,
        "bitrate_bps" => scn.bitrate_bps = num(key, value)?,
        "v_min_mps" => scn.v_min_mps = num(key, value)?,
        "v_max_smh_mps" => scn.v_max_smh_mps = num(key, value)?,
        "v_max_lmh_mps" => scn.v_max_lmh_mps = num(key, value)?,
        "pause_smh_s" => scn.pause_smh_s = num(key, value)?,
        "pause_lmh_s" => scn.pause_lmh_s = num(key, value)?,
        "queue_capacity" => scn.queue_capacity = num(key, value)?,
        "packet_size_bytes" => scn.packet_size_bytes = num(key, value)?,
        "t_l_s" => scn.t_l_s = num(key, value)?,
        "t_t_s" => scn.t_t_s = Some(num(key, value)?),
        "t_ts_s" => scn.t_ts_s = Some(num(key, value)?),
        "reply_window_s" => scn.reply_window_s = num(key, value)?,
        "cache_ttl_s" => scn.cache_ttl_s = num(key, value)?,
        "duration_s" => scn.duration_s = num(key, value)?,
        "base_seed" => scn.base_seed = num(key, value)?,
        "replications" => scn.replications = num(key, value)?,
        "policy" => scn.policy = value.to_string(),
        "weights" => {
            let parts: Vec<&str> = value.split(',').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(format!("key `weights`: expected three comma-separated values, got {value:?}"));
            }
            let mut w = [0.0; 3];
            for (slot, part) in w.iter_mut().zip(&parts) {
                *slot = part
                    .parse()
                    .map_err(|_| format!("key `weights`: cannot parse {part:?}"))?;
            }
            scn.weights = Some(w);
        }
        "alpha" => scn.alpha = num(key, value)?,
        "beta" => scn.beta = num(key, value)?,
        "gamma" => scn.gamma = num(key, value)?,
        "rtdsr_admission" => {
            scn.rtdsr_admission = match value {
                "true" | "1" | "yes" => true,
                "false" | "0" | "no" => false,
                _ => return Err(format!("key `rtdsr_admission`: expected true/false, got {value:?}")),
            }
        }
        "deadline_s" => scn.deadline_s = num(key, value)?,
        "cbr_rate_pps" => scn.cbr_rate_pps = num(key, value)?,
        "cbr_start_s" => scn.cbr_start_s = num(key, value)?,
        "cbr_stop_s" => scn.cbr_stop_s = Some(num(key, value)?),
        "flow" => {
            let parts: Vec<&str> = value.split_whitespace().collect();
            if parts.len() != 2 && parts.len() != 4 {
                return Err(format!(
                    "key `flow`: expected `src dst` or `src dst rate deadline`, got {value:?}"
                ));
            }
            let spec = FlowSpec {
                src: num("flow src", parts[0])?,
                dst: num("flow dst", parts[1])?,
                rate_pps: if parts.len() == 4 { Some(num("flow rate", parts[2])?) } else { None },
                deadline_s: if parts.len() == 4 { Some(num("flow deadline", parts[3])?) } else { None },
            };
            scn.flow_specs.push(spec);
        }
        "rreq_base_bytes" => scn.rreq_base_bytes = num(key, value)?,
        "rreq_per_hop_bytes" => scn.rreq_per_hop_bytes = num(key, value)?,
        "rrep_base_bytes" => scn.rrep_base_bytes = num(key, value)?,
        "rrep_per_stamp_bytes" => scn.rrep_per_stamp_bytes = num(key, value)?,
        "rerr_bytes" => scn.rerr_bytes = num(key, value)?,
        _ => return Err(format!("unknown key `{key}`")),
    }
    Ok(())
}
