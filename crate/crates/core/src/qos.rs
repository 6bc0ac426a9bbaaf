//! Route cost arithmetic and selection policies.
//!
//! A route's cost is assembled from the status stamps its intermediate nodes
//! provided: an energy term (distance over residual energy), a congestion
//! term (log of queue occupancy), and a latency term (queueing plus
//! transmission delay). Each term carries a normalization factor and the
//! three are blended by a weight triple, so presets can push selection
//! toward energy conservation or deadline compliance.
//!
//! Two alternate link-cost schemes are provided for comparison runs — an
//! energy/retransmission weight and a bandwidth/delay/lifetime link weight —
//! plus a per-hop admission predicate for expiration-bounded traffic.

use thiserror::Error;

use crate::routing::{EmrpStamp, NodeId, NodeStatusStamp, RouteCandidate, Rrep};

#[derive(Debug, Error, PartialEq)]
pub enum QosError {
    /// A cost term would divide by a non-positive residual energy.
    #[error("node {node} has no residual energy (E = {e_remain_j} J)")]
    DepletedNode { node: NodeId, e_remain_j: f64 },
    /// Route selection was asked to choose from nothing.
    #[error("no route candidates to select from")]
    EmptyCandidates,
    /// A weight triple does not form a valid blend.
    #[error("weights sum to {sum}, expected 1")]
    WeightSumError { sum: f64 },
}

/// Tolerance for user-supplied weight triples: they must sum to 1 exactly
/// (up to float noise).
pub const WEIGHT_SUM_TOL: f64 = 1e-9;
/// Tolerance for the named presets, whose published values are rounded to
/// two decimals (a 0.33/0.33/0.33 triple sums to 0.99).
pub const PRESET_SUM_TOL: f64 = 0.015;

/// Reject a weight triple whose sum is off by more than `tol`.
pub fn check_weight_sum(w: [f64; 3], tol: f64) -> Result<(), QosError> {
    let sum: f64 = w.iter().sum();
    if (sum - 1.0).abs() > tol || w.iter().any(|&x| x < 0.0) {
        return Err(QosError::WeightSumError { sum });
    }
    Ok(())
}

/// Tunables for the three-term route cost.
#[derive(Debug, Clone, PartialEq)]
pub struct QosConfig {
    /// Normalization factors for the energy, queue, and delay terms.
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Blend weights for the three terms.
    pub w_energy: f64,
    pub w_queue: f64,
    pub w_delay: f64,
    /// Per-packet local processing time at a node, seconds.
    pub t_l_s: f64,
    /// Worst-case transmission time between neighbors, seconds.
    pub t_t_s: f64,
    /// Normalizers for the link-weight policy: a node delay equal to
    /// `alw_delay_norm_s` maps to 1.0, and lifetimes are measured against
    /// `alw_e_max_j` (the largest initial battery in the run).
    pub alw_delay_norm_s: f64,
    pub alw_e_max_j: f64,
}

impl Default for QosConfig {
    fn default() -> Self {
        QosConfig {
            alpha: 1.0,
            beta: 1.0,
            gamma: 1.0,
            w_energy: 1.0 / 3.0,
            w_queue: 1.0 / 3.0,
            w_delay: 1.0 / 3.0,
            t_l_s: 0.005,
            t_t_s: 0.002048,
            alw_delay_norm_s: 0.5,
            alw_e_max_j: 100.0,
        }
    }
}

/// Per-route cost, kept both as raw per-term sums and the weighted total.
#[derive(Debug, Clone, PartialEq)]
pub struct CostBreakdown {
    pub c_energy: f64,
    pub c_queue: f64,
    pub c_delay: f64,
    pub total: f64,
}

/// Energy cost of relaying through a node: forwarding distance over residual
/// energy. Scarce energy or a long hop both raise the cost.
pub fn energy_cost(d_i_m: f64, e_remain_j: f64, node: NodeId) -> Result<f64, QosError> {
    if e_remain_j <= 0.0 {
        return Err(QosError::DepletedNode { node, e_remain_j });
    }
    Ok(d_i_m / e_remain_j)
}

/// Congestion cost of a node: natural log of one plus its queue occupancy.
/// Zero for an idle queue, concave in load.
pub fn queue_cost(l_queue: u32) -> f64 {
    (1.0 + f64::from(l_queue)).ln()
}

/// Latency contribution of a node: time to drain its queue plus the
/// transmission time budgeted for the route's full hop count.
pub fn delay_cost(l_queue: u32, t_l_s: f64, t_t_s: f64, n_hops: u32) -> f64 {
    f64::from(l_queue) * t_l_s + t_t_s * f64::from(n_hops)
}

/// Blend one node's three cost terms into its contribution to the route
/// total: `w_e·(α·C_e) + w_q·(β·C_q) + w_d·(γ·C_d)`.
pub fn weighted_stamp_cost(c_e: f64, c_q: f64, c_d: f64, cfg: &QosConfig) -> f64 {
    cfg.w_energy * (cfg.alpha * c_e) + cfg.w_queue * (cfg.beta * c_q) + cfg.w_delay * (cfg.gamma * c_d)
}

/// Full cost of a candidate route from its stamp list.
///
/// Per-term sums are unweighted; `total` applies the configured blend. The
/// delay term budgets every stamping node for the route's complete hop
/// count, so longer routes are penalized superlinearly.
pub fn route_cost(
    route: &[NodeId],
    stamps: &[NodeStatusStamp],
    cfg: &QosConfig,
) -> Result<CostBreakdown, QosError> {
    let n_hops = route.len().saturating_sub(1) as u32;
    let mut bd = CostBreakdown {
        c_energy: 0.0,
        c_queue: 0.0,
        c_delay: 0.0,
        total: 0.0,
    };
    for s in stamps {
        let c_e = energy_cost(s.d_i_m, s.e_remain_j, s.node)?;
        let c_q = queue_cost(s.l_queue);
        let c_d = delay_cost(s.l_queue, cfg.t_l_s, cfg.t_t_s, n_hops);
        bd.c_energy += c_e;
        bd.c_queue += c_q;
        bd.c_delay += c_d;
        bd.total += weighted_stamp_cost(c_e, c_q, c_d, cfg);
    }
    Ok(bd)
}

/// A deadline is feasible only if it strictly exceeds the summed delay costs.
pub fn deadline_feasible(d_k_s: f64, c_delays: impl IntoIterator<Item = f64>) -> bool {
    let sum: f64 = c_delays.into_iter().sum();
    d_k_s > sum
}

/// Verdict of a per-hop admission check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Admission {
    Forward,
    Discard,
}

/// Per-hop gate applied to a route reply: discard it as soon as the delay
/// already accumulated makes the deadline infeasible. Checking the prefix is
/// conservative — the full route can only cost more.
pub fn rrep_admission_check(d_k_s: f64, c_delay_so_far: f64) -> Admission {
    if deadline_feasible(d_k_s, [c_delay_so_far]) {
        Admission::Forward
    } else {
        Admission::Discard
    }
}

/// Append this node's status stamp to a route reply and fold its cost into
/// the reply's running totals.
///
/// The running `c`/`c_delay` fields always equal what recomputing from the
/// stamp list would give — they exist so a forwarding node can run its
/// admission check without rescanning the stamps.
pub fn stamp_status(rrep: &mut Rrep, stamp: NodeStatusStamp, cfg: &QosConfig) -> Result<(), QosError> {
    let n_hops = rrep.hop_count();
    let c_e = energy_cost(stamp.d_i_m, stamp.e_remain_j, stamp.node)?;
    let c_q = queue_cost(stamp.l_queue);
    let c_d = delay_cost(stamp.l_queue, cfg.t_l_s, cfg.t_t_s, n_hops);
    rrep.c += weighted_stamp_cost(c_e, c_q, c_d, cfg);
    rrep.c_delay += c_d;
    rrep.stamps.push(stamp);
    Ok(())
}

// ---------------------------------------------------------------------------
// Alternate policies
// ---------------------------------------------------------------------------

/// Energy/retransmission weight of one relaying node: transmit power over own
/// residual energy, receive power over the next hop's residual energy, plus a
/// retransmission surcharge.
pub fn emrp_energy_weight(
    p_tx_w: f64,
    e_i_j: f64,
    p_rx_w: f64,
    e_next_j: f64,
    n_retrans: u32,
    node: NodeId,
) -> Result<f64, QosError> {
    if e_i_j <= 0.0 {
        return Err(QosError::DepletedNode { node, e_remain_j: e_i_j });
    }
    if e_next_j <= 0.0 {
        return Err(QosError::DepletedNode { node, e_remain_j: e_next_j });
    }
    Ok((p_tx_w / e_i_j + p_rx_w / e_next_j) + (1.0 + f64::from(n_retrans)))
}

/// Total route weight: `Σ α·W_energy + β·W_queue` over the stamping nodes.
pub fn emrp_route_weight(stamps: &[EmrpStamp], alpha: f64, beta: f64) -> Result<f64, QosError> {
    let mut w = 0.0;
    for s in stamps {
        let we = emrp_energy_weight(s.p_tx_w, s.e_i_j, s.p_rx_w, s.e_next_j, s.n_retrans, s.node)?;
        let wq = queue_cost(s.n_queue);
        w += alpha * we + beta * wq;
    }
    Ok(w)
}

/// Inputs for the expiration-based admission test applied when a node decides
/// whether to take part in a new real-time flow.
#[derive(Debug, Clone)]
pub struct RtdsrParams {
    /// Remaining time before the new packet's deadline expires, seconds.
    pub e_remaining_s: f64,
    /// Local processing time, seconds.
    pub t_tl_s: f64,
    /// Worst-case transmission time to a neighbor, seconds.
    pub t_ts_s: f64,
    /// Remaining times of flows this node has already admitted.
    pub admitted_s: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdmitDecision {
    Admit,
    Reject,
}

/// Admit a new flow only if, after paying local processing and one worst-case
/// transmission, the new packet still has time left — and so does every flow
/// already admitted at this node. Both margins must be strictly positive.
pub fn rtdsr_admission(p: &RtdsrParams) -> AdmitDecision {
    let margin = |e: f64| e - p.t_tl_s - p.t_ts_s > 0.0;
    if margin(p.e_remaining_s) && p.admitted_s.iter().all(|&e| margin(e)) {
        AdmitDecision::Admit
    } else {
        AdmitDecision::Reject
    }
}

/// Application-class weight triple for the bandwidth/delay/lifetime link
/// weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlwWeights {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
}

impl AlwWeights {
    /// Published per-application presets (rounded to two decimals).
    pub fn preset(name: &str) -> Option<AlwWeights> {
        let (k1, k2, k3) = match name {
            "video" => (0.5, 0.4, 0.1),
            "ftp" => (0.5, 0.3, 0.2),
            "messaging" => (0.1, 0.4, 0.5),
            "default" => (0.33, 0.33, 0.33),
            _ => return None,
        };
        Some(AlwWeights { k1, k2, k3 })
    }
}

/// Normalized link metrics for one link.
#[derive(Debug, Clone)]
pub struct AlwParams {
    pub weights: AlwWeights,
    /// Link bandwidth, delay, and endpoint lifetime, each normalized to [0, 1].
    pub bandwidth: f64,
    pub delay: f64,
    pub node_lifetime: f64,
}

/// Weight of one link: `K1·bandwidth + K2·delay + K3·node_lifetime`.
/// The weight triple must sum to 1 (preset rounding tolerance applies).
pub fn alw_link_weight(p: &AlwParams) -> Result<f64, QosError> {
    check_weight_sum([p.weights.k1, p.weights.k2, p.weights.k3], PRESET_SUM_TOL)?;
    debug_assert!(
        [p.bandwidth, p.delay, p.node_lifetime]
            .iter()
            .all(|m| (0.0..=1.0).contains(m)),
        "link metrics must be normalized to [0, 1]"
    );
    Ok(p.weights.k1 * p.bandwidth + p.weights.k2 * p.delay + p.weights.k3 * p.node_lifetime)
}

/// Route score under the link-weight policy: the sum of per-link weights
/// derived from the stamping nodes' snapshots. Lower is better.
///
/// Metrics are normalized by configured maxima: bandwidth by the radio
/// bitrate (homogeneous radios make every link 1.0), a node's drain delay by
/// `alw_delay_norm_s`, and its lifetime by `alw_e_max_j`.
pub fn alw_route_score(
    cand: &RouteCandidate,
    weights: &AlwWeights,
    cfg: &QosConfig,
) -> Result<f64, QosError> {
    let mut score = 0.0;
    for s in &cand.stamps {
        let raw_delay = f64::from(s.l_queue) * cfg.t_l_s + cfg.t_t_s;
        let p = AlwParams {
            weights: *weights,
            bandwidth: 1.0,
            delay: (raw_delay / cfg.alw_delay_norm_s).clamp(0.0, 1.0),
            node_lifetime: (s.e_remain_j / cfg.alw_e_max_j).clamp(0.0, 1.0),
        };
        score += alw_link_weight(&p)?;
    }
    Ok(score)
}

// ---------------------------------------------------------------------------
// Policy resolution
// ---------------------------------------------------------------------------

/// Which route-selection scheme a run uses.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicyKind {
    /// Plain source routing: fewest hops, no deadline enforcement.
    Dsr,
    /// Weighted energy/queue/delay cost with deadline enforcement.
    EdDsr,
    /// Energy/retransmission route weight.
    Emrp,
    /// Bandwidth/delay/lifetime link weight with per-application presets.
    Alw(AlwWeights),
}

/// Fully resolved routing policy for a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    pub kind: PolicyKind,
    pub qos: QosConfig,
    /// Gate route-request forwarding on the expiration admission test.
    pub rtdsr_admission: bool,
    /// Preset name this policy was resolved from, for reporting.
    pub name: String,
}

impl Policy {
    /// Resolve a preset name. Accepts an optional `+rtdsr-admission` suffix
    /// to enable the admission gate on any base policy.
    pub fn from_preset(name: &str) -> Result<Policy, QosError> {
        let (base, rtdsr) = match name.strip_suffix("+rtdsr-admission") {
            Some(b) => (b, true),
            None => match name.strip_suffix("+rtdsr") {
                Some(b) => (b, true),
                None => (name, false),
            },
        };
        let mut qos = QosConfig::default();
        let kind = match base {
            "dsr" => PolicyKind::Dsr,
            "eddsr" => PolicyKind::EdDsr,
            "eddsr-energy" => {
                (qos.w_energy, qos.w_queue, qos.w_delay) = (0.6, 0.2, 0.2);
                PolicyKind::EdDsr
            }
            "eddsr-delay" => {
                (qos.w_energy, qos.w_queue, qos.w_delay) = (0.2, 0.2, 0.6);
                PolicyKind::EdDsr
            }
            "eddsr-default" => {
                (qos.w_energy, qos.w_queue, qos.w_delay) = (0.33, 0.33, 0.33);
                PolicyKind::EdDsr
            }
            "emrp" => PolicyKind::Emrp,
            _ => match base.strip_prefix("alw-") {
                Some(app) => match AlwWeights::preset(app) {
                    Some(w) => PolicyKind::Alw(w),
                    None => return Err(QosError::WeightSumError { sum: f64::NAN }),
                },
                None => return Err(QosError::WeightSumError { sum: f64::NAN }),
            },
        };
        Ok(Policy {
            kind,
            qos,
            rtdsr_admission: rtdsr,
            name: name.to_string(),
        })
    }

    /// Whether data packets past their deadline are discarded in flight.
    pub fn enforces_deadline(&self) -> bool {
        matches!(self.kind, PolicyKind::EdDsr)
    }

    /// Whether route replies are gated by the per-hop admission check.
    pub fn admits_rreps(&self) -> bool {
        matches!(self.kind, PolicyKind::EdDsr)
    }

    /// Whether intermediate nodes append status stamps to route replies.
    pub fn stamps_rreps(&self) -> bool {
        !matches!(self.kind, PolicyKind::Dsr)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn assert_close(actual: f64, expected: f64) {
        assert!(
            (actual - expected).abs() <= 1e-12,
            "expected {expected}, got {actual} (diff {})",
            (actual - expected).abs()
        );
    }

    #[test]
    fn energy_cost_is_distance_over_residual() {
        assert_close(energy_cost(100.0, 50.0, 0).unwrap(), 2.0);
        assert_close(energy_cost(250.0, 100.0, 0).unwrap(), 2.5);
    }

    #[test]
    fn energy_cost_rejects_depleted_nodes() {
        assert!(matches!(
            energy_cost(100.0, 0.0, 3),
            Err(QosError::DepletedNode { node: 3, .. })
        ));
        assert!(energy_cost(100.0, -1.0, 3).is_err());
    }

    #[test]
    fn queue_cost_is_log_of_occupancy() {
        assert_close(queue_cost(0), 0.0);
        assert_close(queue_cost(9), 10.0_f64.ln()); // 2.302585092994046
        assert_close(queue_cost(49), 50.0_f64.ln()); // 3.912023005428146
    }

    #[test]
    fn delay_cost_combines_queue_drain_and_hop_budget() {
        assert_close(delay_cost(5, 0.01, 0.002048, 4), 0.058192);
        assert_close(delay_cost(0, 0.01, 0.002048, 3), 0.006144);
    }

    #[test]
    fn weighted_cost_blends_terms() {
        let mut cfg = QosConfig::default();
        (cfg.w_energy, cfg.w_queue, cfg.w_delay) = (0.6, 0.2, 0.2);
        assert_close(weighted_stamp_cost(2.0, 1.0, 0.5, &cfg), 1.5);

        (cfg.w_energy, cfg.w_queue, cfg.w_delay) = (0.33, 0.33, 0.33);
        assert_close(weighted_stamp_cost(2.0, 1.0, 0.5, &cfg), 1.155);
    }

    #[test]
    fn route_cost_sums_stamp_contributions() {
        let cfg = QosConfig {
            t_l_s: 0.01,
            t_t_s: 0.002048,
            ..QosConfig::default()
        };
        let route = vec![0, 1, 2, 3, 9]; // 4 hops
        let stamps = vec![
            NodeStatusStamp { node: 1, d_i_m: 100.0, l_queue: 9, e_remain_j: 50.0 },
            NodeStatusStamp { node: 2, d_i_m: 250.0, l_queue: 5, e_remain_j: 100.0 },
        ];
        let bd = route_cost(&route, &stamps, &cfg).unwrap();
        assert_close(bd.c_energy, 2.0 + 2.5);
        assert_close(bd.c_queue, 10.0_f64.ln() + 6.0_f64.ln());
        assert_close(bd.c_delay, (9.0 * 0.01 + 0.008192) + 0.058192);
        let expected_total = (2.0 + 10.0_f64.ln() + 0.098192) / 3.0
            + (2.5 + 6.0_f64.ln() + 0.058192) / 3.0;
        assert_close(bd.total, expected_total);
    }

    #[test]
    fn empty_stamp_list_costs_nothing() {
        let bd = route_cost(&[0, 9], &[], &QosConfig::default()).unwrap();
        assert_eq!(bd.total, 0.0);
        assert_eq!(bd.c_delay, 0.0);
    }

    #[test]
    fn deadline_requires_strict_margin() {
        assert!(deadline_feasible(15.0, [0.0582]));
        assert!(!deadline_feasible(15.0, [20.0]));
        assert!(!deadline_feasible(15.0, [15.0]), "equality is infeasible");
        assert!(deadline_feasible(15.0, [7.0, 7.9]));
        assert!(!deadline_feasible(15.0, [7.0, 8.0]));
    }

    #[test]
    fn admission_discards_once_budget_is_spent() {
        assert_eq!(rrep_admission_check(15.0, 0.2), Admission::Forward);
        assert_eq!(rrep_admission_check(15.0, 15.0), Admission::Discard);
        assert_eq!(rrep_admission_check(15.0, 16.0), Admission::Discard);
    }

    #[test]
    fn stamping_keeps_running_totals_consistent() {
        let cfg = QosConfig::default();
        let mut rrep = Rrep {
            id: 1,
            route: vec![0, 1, 2, 9],
            deadline_s: 15.0,
            stamps: Vec::new(),
            emrp_stamps: Vec::new(),
            c: 0.0,
            c_delay: 0.0,
        };
        stamp_status(&mut rrep, NodeStatusStamp { node: 2, d_i_m: 120.0, l_queue: 3, e_remain_j: 80.0 }, &cfg).unwrap();
        stamp_status(&mut rrep, NodeStatusStamp { node: 1, d_i_m: 90.0, l_queue: 0, e_remain_j: 40.0 }, &cfg).unwrap();
        let bd = route_cost(&rrep.route, &rrep.stamps, &cfg).unwrap();
        assert_close(rrep.c, bd.total);
        assert_close(rrep.c_delay, bd.c_delay);
        assert_eq!(rrep.stamps.len(), 2);
    }

    #[test]
    fn emrp_energy_weight_matches_hand_value() {
        // 1.4/50 + 1.0/100 + (1 + 0) = 1.038
        assert_close(emrp_energy_weight(1.4, 50.0, 1.0, 100.0, 0, 1).unwrap(), 1.038);
    }

    #[test]
    fn emrp_route_weight_adds_queue_term() {
        let stamps = vec![EmrpStamp {
            node: 1,
            p_tx_w: 1.4,
            p_rx_w: 1.0,
            e_i_j: 50.0,
            e_next_j: 100.0,
            n_retrans: 0,
            n_queue: 9,
        }];
        // 1.038 + ln(10) = 3.340585092994046
        assert_close(emrp_route_weight(&stamps, 1.0, 1.0).unwrap(), 3.340585092994046);
    }

    #[test]
    fn emrp_rejects_depleted_endpoints() {
        assert!(emrp_energy_weight(1.4, 0.0, 1.0, 100.0, 0, 1).is_err());
        assert!(emrp_energy_weight(1.4, 50.0, 1.0, 0.0, 0, 1).is_err());
    }

    #[test]
    fn rtdsr_admission_needs_strictly_positive_margins() {
        let base = RtdsrParams {
            e_remaining_s: 1.0,
            t_tl_s: 0.3,
            t_ts_s: 0.5,
            admitted_s: vec![],
        };
        assert_eq!(rtdsr_admission(&base), AdmitDecision::Admit);

        let boundary = RtdsrParams { e_remaining_s: 0.8, ..base.clone() };
        assert_eq!(rtdsr_admission(&boundary), AdmitDecision::Reject, "zero margin rejects");

        let tight_peer = RtdsrParams { admitted_s: vec![0.7], ..base.clone() };
        assert_eq!(rtdsr_admission(&tight_peer), AdmitDecision::Reject);

        let roomy_peer = RtdsrParams { admitted_s: vec![0.9, 2.0], ..base };
        assert_eq!(rtdsr_admission(&roomy_peer), AdmitDecision::Admit);
    }

    #[test]
    fn alw_link_weight_blends_normalized_metrics() {
        let p = AlwParams {
            weights: AlwWeights::preset("messaging").unwrap(),
            bandwidth: 1.0,
            delay: 0.5,
            node_lifetime: 0.2,
        };
        assert_close(alw_link_weight(&p).unwrap(), 0.4);
    }

    #[test]
    fn alw_presets_match_published_table() {
        assert_eq!(AlwWeights::preset("video").unwrap(), AlwWeights { k1: 0.5, k2: 0.4, k3: 0.1 });
        assert_eq!(AlwWeights::preset("ftp").unwrap(), AlwWeights { k1: 0.5, k2: 0.3, k3: 0.2 });
        assert_eq!(AlwWeights::preset("messaging").unwrap(), AlwWeights { k1: 0.1, k2: 0.4, k3: 0.5 });
        assert_eq!(AlwWeights::preset("default").unwrap(), AlwWeights { k1: 0.33, k2: 0.33, k3: 0.33 });
        assert!(AlwWeights::preset("gaming").is_none());
    }

    #[test]
    fn alw_rejects_unbalanced_weights() {
        let p = AlwParams {
            weights: AlwWeights { k1: 0.5, k2: 0.2, k3: 0.1 },
            bandwidth: 1.0,
            delay: 0.5,
            node_lifetime: 0.2,
        };
        assert!(matches!(alw_link_weight(&p), Err(QosError::WeightSumError { .. })));
        // The two-decimal default preset is accepted.
        let p = AlwParams {
            weights: AlwWeights::preset("default").unwrap(),
            bandwidth: 0.0,
            delay: 0.0,
            node_lifetime: 1.0,
        };
        assert_close(alw_link_weight(&p).unwrap(), 0.33);
    }

    #[test]
    fn weight_sum_check_is_strict_for_user_weights() {
        assert!(check_weight_sum([0.5, 0.3, 0.3], WEIGHT_SUM_TOL).is_err());
        assert!(check_weight_sum([0.5, 0.3, 0.2], WEIGHT_SUM_TOL).is_ok());
        assert!(check_weight_sum([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], WEIGHT_SUM_TOL).is_ok());
        assert!(check_weight_sum([0.6, 0.6, -0.2], WEIGHT_SUM_TOL).is_err(), "negative weight");
    }

    #[test]
    fn presets_resolve_to_expected_policies() {
        let p = Policy::from_preset("eddsr-energy").unwrap();
        assert_eq!(p.kind, PolicyKind::EdDsr);
        assert_eq!((p.qos.w_energy, p.qos.w_queue, p.qos.w_delay), (0.6, 0.2, 0.2));
        assert!(!p.rtdsr_admission);

        let p = Policy::from_preset("eddsr-delay").unwrap();
        assert_eq!((p.qos.w_energy, p.qos.w_queue, p.qos.w_delay), (0.2, 0.2, 0.6));

        let p = Policy::from_preset("eddsr-default").unwrap();
        assert_eq!((p.qos.w_energy, p.qos.w_queue, p.qos.w_delay), (0.33, 0.33, 0.33));

        let p = Policy::from_preset("eddsr").unwrap();
        assert_eq!((p.qos.w_energy, p.qos.w_queue, p.qos.w_delay), (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0));

        let p = Policy::from_preset("dsr+rtdsr-admission").unwrap();
        assert_eq!(p.kind, PolicyKind::Dsr);
        assert!(p.rtdsr_admission);

        let p = Policy::from_preset("alw-video").unwrap();
        assert!(matches!(p.kind, PolicyKind::Alw(w) if w == AlwWeights::preset("video").unwrap()));

        assert!(Policy::from_preset("ospf").is_err());
    }

    #[test]
    fn policy_capabilities_follow_kind() {
        assert!(Policy::from_preset("eddsr").unwrap().enforces_deadline());
        assert!(Policy::from_preset("eddsr").unwrap().stamps_rreps());
        assert!(!Policy::from_preset("dsr").unwrap().enforces_deadline());
        assert!(!Policy::from_preset("dsr").unwrap().stamps_rreps());
        assert!(Policy::from_preset("emrp").unwrap().stamps_rreps());
        assert!(!Policy::from_preset("emrp").unwrap().enforces_deadline());
        assert!(Policy::from_preset("alw-ftp").unwrap().stamps_rreps());
    }

    proptest! {
        /// Worsening any single input never lowers the route cost.
        #[test]
        fn cost_is_monotone_in_load_and_scarcity(
            d in 1.0_f64..500.0,
            e in 1.0_f64..100.0,
            l in 0u32..50,
            bump_d in 0.1_f64..100.0,
            bump_l in 1u32..10,
            drop_e in 0.01_f64..0.99,
        ) {
            let cfg = QosConfig::default();
            let route = [0usize, 1, 9];
            let base = route_cost(&route, &[NodeStatusStamp { node: 1, d_i_m: d, l_queue: l, e_remain_j: e }], &cfg).unwrap();
            let longer = route_cost(&route, &[NodeStatusStamp { node: 1, d_i_m: d + bump_d, l_queue: l, e_remain_j: e }], &cfg).unwrap();
            let busier = route_cost(&route, &[NodeStatusStamp { node: 1, d_i_m: d, l_queue: l + bump_l, e_remain_j: e }], &cfg).unwrap();
            let weaker = route_cost(&route, &[NodeStatusStamp { node: 1, d_i_m: d, l_queue: l, e_remain_j: e * drop_e }], &cfg).unwrap();
            prop_assert!(longer.total >= base.total);
            prop_assert!(busier.total >= base.total);
            prop_assert!(weaker.total >= base.total);
        }

        /// Scaling all weights by the same positive factor never changes which
        /// candidate wins (the argmin is scale-invariant).
        #[test]
        fn selection_is_scale_invariant(
            seed_costs in proptest::collection::vec((1.0_f64..400.0, 1.0_f64..100.0, 0u32..50), 2..8),
            scale in 0.1_f64..10.0,
        ) {
            use crate::routing::RouteCandidate;
            let mk = |cfg: &QosConfig| {
                let cands: Vec<RouteCandidate> = seed_costs.iter().enumerate().map(|(i, &(d, e, l))| {
                    RouteCandidate {
                        route: vec![0, i + 1, 99],
                        stamps: vec![NodeStatusStamp { node: i + 1, d_i_m: d, l_queue: l, e_remain_j: e }],
                        emrp_stamps: vec![],
                        carried_c: 0.0,
                        carried_c_delay: 0.0,
                    }
                }).collect();
                let policy = Policy { kind: PolicyKind::EdDsr, qos: cfg.clone(), rtdsr_admission: false, name: "eddsr".into() };
                crate::routing::select_route(&cands, &policy).map(|(c, _)| c.route.clone())
            };
            let base_cfg = QosConfig::default();
            let scaled_cfg = QosConfig {
                w_energy: base_cfg.w_energy * scale,
                w_queue: base_cfg.w_queue * scale,
                w_delay: base_cfg.w_delay * scale,
                ..base_cfg.clone()
            };
            prop_assert_eq!(mk(&base_cfg).unwrap(), mk(&scaled_cfg).unwrap());
        }
    }
}
