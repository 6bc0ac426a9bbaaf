//! Source-routing packet types and per-node routing state: route discovery
//! requests/replies, error reports, the route cache, and the status stamps
//! intermediate nodes fold into replies for cost-aware route selection.

use std::collections::BTreeMap;

use crate::qos::{CostBreakdown, Policy, PolicyKind, QosError};

/// Index of a node in the world's node table.
pub type NodeId = usize;
/// Globally unique packet identifier (unique across a whole run).
pub type PacketId = u64;
/// Discovery identifier: originating node plus its local discovery counter.
pub type RequestId = (NodeId, u64);

/// Status snapshot an intermediate node appends to a route reply.
///
/// `d_i_m` is the distance (meters) from the stamping node to the next hop
/// the reply is being forwarded to, measured at stamping time; `l_queue` and
/// `e_remain_j` are the node's queue occupancy and residual energy at the
/// same instant.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeStatusStamp {
    pub node: NodeId,
    pub d_i_m: f64,
    pub l_queue: u32,
    pub e_remain_j: f64,
}

/// Per-node snapshot used by the energy/retransmission route weight.
///
/// `e_next_j` is the residual energy of the next hop toward the route's
/// destination (the direction data will flow).
#[derive(Debug, Clone, PartialEq)]
pub struct EmrpStamp {
    pub node: NodeId,
    pub p_tx_w: f64,
    pub p_rx_w: f64,
    pub e_i_j: f64,
    pub e_next_j: f64,
    pub n_retrans: u32,
    pub n_queue: u32,
}

/// Application payload packet carrying its full source route.
#[derive(Debug, Clone)]
pub struct DataPacket {
    pub id: PacketId,
    pub src: NodeId,
    pub dst: NodeId,
    pub size_bytes: u32,
    pub generated_at: f64,
    pub deadline_s: f64,
    /// Full source route `src..=dst`; empty until a route is attached.
    pub route: Vec<NodeId>,
}

impl DataPacket {
    pub fn elapsed(&self, now: f64) -> f64 {
        now - self.generated_at
    }

    pub fn expired(&self, now: f64) -> bool {
        self.elapsed(now) > self.deadline_s
    }
}

/// Route request, flooded from the origin; accumulates the traversed route.
#[derive(Debug, Clone)]
pub struct Rreq {
    pub id: PacketId,
    pub request_id: RequestId,
    pub origin: NodeId,
    pub target: NodeId,
    pub originated_at: f64,
    pub deadline_s: f64,
    /// Accumulated route, origin first. The target is appended only when the
    /// reply is built.
    pub route: Vec<NodeId>,
}

/// Route reply, unicast back from the target along the reversed route.
///
/// `c` and `c_delay` are running accumulations maintained by
/// [`crate::qos::stamp_status`]; they are caches of what the stamp list
/// implies and never diverge from recomputation.
#[derive(Debug, Clone)]
pub struct Rrep {
    pub id: PacketId,
    /// Complete discovered route, `origin..=target`.
    pub route: Vec<NodeId>,
    pub deadline_s: f64,
    pub stamps: Vec<NodeStatusStamp>,
    pub emrp_stamps: Vec<EmrpStamp>,
    pub c: f64,
    pub c_delay: f64,
}

impl Rrep {
    pub fn hop_count(&self) -> u32 {
        (self.route.len() - 1) as u32
    }
}

/// Route error reporting one broken link back to the flow source.
#[derive(Debug, Clone)]
pub struct Rerr {
    pub id: PacketId,
    pub broken: (NodeId, NodeId),
    /// Reverse path from the detecting node back to the source, detector first.
    pub path: Vec<NodeId>,
}

/// Any packet the radio can carry.
#[derive(Debug, Clone)]
pub enum Packet {
    Data(DataPacket),
    Rreq(Rreq),
    Rrep(Rrep),
    Rerr(Rerr),
}

impl Packet {
    pub fn id(&self) -> PacketId {
        match self {
            Packet::Data(p) => p.id,
            Packet::Rreq(p) => p.id,
            Packet::Rrep(p) => p.id,
            Packet::Rerr(p) => p.id,
        }
    }

    pub fn is_control(&self) -> bool {
        !matches!(self, Packet::Data(_))
    }

    /// On-air size. Control packets grow with the state they carry.
    pub fn size_bytes(&self, sizes: &ControlSizes) -> u32 {
        match self {
            Packet::Data(p) => p.size_bytes,
            Packet::Rreq(p) => sizes.rreq_base + sizes.rreq_per_hop * p.route.len() as u32,
            Packet::Rrep(p) => {
                let stamps = (p.stamps.len() + p.emrp_stamps.len()) as u32;
                sizes.rrep_base + sizes.rrep_per_stamp * stamps
            }
            Packet::Rerr(_) => sizes.rerr,
        }
    }
}

/// Byte sizes of the control packets.
#[derive(Debug, Clone)]
pub struct ControlSizes {
    pub rreq_base: u32,
    pub rreq_per_hop: u32,
    pub rrep_base: u32,
    pub rrep_per_stamp: u32,
    pub rerr: u32,
}

impl Default for ControlSizes {
    fn default() -> Self {
        ControlSizes {
            rreq_base: 32,
            rreq_per_hop: 4,
            rrep_base: 44,
            rrep_per_stamp: 16,
            rerr: 24,
        }
    }
}

/// What the route cache remembers about a selected route's quality.
#[derive(Debug, Clone)]
pub enum CacheCost {
    Hops(u32),
    Cost(CostBreakdown),
    Weight(f64),
}

#[derive(Debug, Clone)]
pub struct RouteCacheEntry {
    pub route: Vec<NodeId>,
    pub cost: CacheCost,
    pub inserted_at: f64,
}

/// Per-destination route cache with time-based expiry and link invalidation.
#[derive(Debug, Default)]
pub struct RouteCache {
    entries: BTreeMap<NodeId, RouteCacheEntry>,
}

impl RouteCache {
    /// A cached route that has not outlived `ttl_s`.
    pub fn fresh(&self, dst: NodeId, now: f64, ttl_s: f64) -> Option<&RouteCacheEntry> {
        self.entries
            .get(&dst)
            .filter(|e| now - e.inserted_at <= ttl_s)
    }

    pub fn insert(&mut self, dst: NodeId, entry: RouteCacheEntry) {
        self.entries.insert(dst, entry);
    }

    /// Drop every cached route that uses the broken link (in either
    /// direction — the radio is symmetric).
    pub fn purge_link(&mut self, broken: (NodeId, NodeId)) -> usize {
        let before = self.entries.len();
        self.entries.retain(|_, e| !route_uses_link(&e.route, broken));
        before - self.entries.len()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn route_uses_link(route: &[NodeId], (a, b): (NodeId, NodeId)) -> bool {
    route
        .windows(2)
        .any(|w| (w[0] == a && w[1] == b) || (w[0] == b && w[1] == a))
}

/// A discovered route with the evidence collected on the way back.
#[derive(Debug, Clone)]
pub struct RouteCandidate {
    pub route: Vec<NodeId>,
    pub stamps: Vec<NodeStatusStamp>,
    pub emrp_stamps: Vec<EmrpStamp>,
    pub carried_c: f64,
    pub carried_c_delay: f64,
}

impl RouteCandidate {
    pub fn hop_count(&self) -> u32 {
        (self.route.len() - 1) as u32
    }
}

/// Pick the best candidate under `policy`.
///
/// Ordering is total and deterministic: primary key is the policy's cost
/// (hop count for plain source routing), ties go to the shorter route, and
/// remaining ties to the lexicographically smallest node-id sequence.
pub fn select_route<'a>(
    candidates: &'a [RouteCandidate],
    policy: &Policy,
) -> Result<(&'a RouteCandidate, CacheCost), QosError> {
    if candidates.is_empty() {
        return Err(QosError::EmptyCandidates);
    }
    let mut best: Option<(&RouteCandidate, CacheCost, f64)> = None;
    for cand in candidates {
        let (cost, key) = match &policy.kind {
            PolicyKind::Dsr => (CacheCost::Hops(cand.hop_count()), cand.hop_count() as f64),
            PolicyKind::EdDsr => {
                let bd = crate::qos::route_cost(&cand.route, &cand.stamps, &policy.qos)?;
                let total = bd.total;
                (CacheCost::Cost(bd), total)
            }
            PolicyKind::Emrp => {
                let w = crate::qos::emrp_route_weight(
                    &cand.emrp_stamps,
                    policy.qos.alpha,
                    policy.qos.beta,
                )?;
                (CacheCost::Weight(w), w)
            }
            PolicyKind::Alw(weights) => {
                let w = crate::qos::alw_route_score(cand, weights, &policy.qos)?;
                (CacheCost::Weight(w), w)
            }
        };
        let better = match &best {
            None => true,
            Some((cur, _, cur_key)) => {
                match key.total_cmp(cur_key) {
                    std::cmp::Ordering::Less => true,
                    std::cmp::Ordering::Greater => false,
                    std::cmp::Ordering::Equal => match cand.route.len().cmp(&cur.route.len()) {
                        std::cmp::Ordering::Less => true,
                        std::cmp::Ordering::Greater => false,
                        std::cmp::Ordering::Equal => cand.route < cur.route,
                    },
                }
            }
        };
        if better {
            best = Some((cand, cost, key));
        }
    }
    let (cand, cost, _) = best.expect("non-empty candidates");
    Ok((cand, cost))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qos::Policy;

    fn cand(route: Vec<NodeId>) -> RouteCandidate {
        RouteCandidate {
            route,
            stamps: Vec::new(),
            emrp_stamps: Vec::new(),
            carried_c: 0.0,
            carried_c_delay: 0.0,
        }
    }

    #[test]
    fn plain_selection_prefers_fewest_hops() {
        let cands = vec![cand(vec![0, 1, 2, 9]), cand(vec![0, 3, 9]), cand(vec![0, 4, 5, 9])];
        let policy = Policy::from_preset("dsr").unwrap();
        let (best, cost) = select_route(&cands, &policy).unwrap();
        assert_eq!(best.route, vec![0, 3, 9]);
        assert!(matches!(cost, CacheCost::Hops(2)));
    }

    #[test]
    fn hop_ties_break_lexicographically() {
        let cands = vec![cand(vec![0, 7, 9]), cand(vec![0, 2, 9]), cand(vec![0, 5, 9])];
        let policy = Policy::from_preset("dsr").unwrap();
        let (best, _) = select_route(&cands, &policy).unwrap();
        assert_eq!(best.route, vec![0, 2, 9]);
    }

    #[test]
    fn empty_candidate_set_is_an_error() {
        let policy = Policy::from_preset("dsr").unwrap();
        assert!(matches!(
            select_route(&[], &policy),
            Err(QosError::EmptyCandidates)
        ));
    }

    #[test]
    fn cache_expires_entries_by_age() {
        let mut cache = RouteCache::default();
        cache.insert(
            9,
            RouteCacheEntry {
                route: vec![0, 1, 9],
                cost: CacheCost::Hops(2),
                inserted_at: 10.0,
            },
        );
        assert!(cache.fresh(9, 12.0, 5.0).is_some());
        assert!(cache.fresh(9, 15.0, 5.0).is_some(), "ttl boundary is inclusive");
        assert!(cache.fresh(9, 15.1, 5.0).is_none());
        assert!(cache.fresh(8, 12.0, 5.0).is_none());
    }

    #[test]
    fn purge_removes_routes_using_the_broken_link() {
        let mut cache = RouteCache::default();
        cache.insert(
            9,
            RouteCacheEntry {
                route: vec![0, 1, 2, 9],
                cost: CacheCost::Hops(3),
                inserted_at: 0.0,
            },
        );
        cache.insert(
            8,
            RouteCacheEntry {
                route: vec![0, 3, 8],
                cost: CacheCost::Hops(2),
                inserted_at: 0.0,
            },
        );
        // Reverse orientation must match too.
        assert_eq!(cache.purge_link((2, 1)), 1);
        assert!(cache.fresh(9, 0.0, 5.0).is_none());
        assert!(cache.fresh(8, 0.0, 5.0).is_some());
    }

    #[test]
    fn control_packet_sizes_grow_with_carried_state() {
        let sizes = ControlSizes::default();
        let rreq = Packet::Rreq(Rreq {
            id: 1,
            request_id: (0, 0),
            origin: 0,
            target: 9,
            originated_at: 0.0,
            deadline_s: 15.0,
            route: vec![0, 1, 2],
        });
        assert_eq!(rreq.size_bytes(&sizes), 32 + 4 * 3);

        let rrep = Packet::Rrep(Rrep {
            id: 2,
            route: vec![0, 1, 2, 9],
            deadline_s: 15.0,
            stamps: vec![
                NodeStatusStamp { node: 1, d_i_m: 10.0, l_queue: 0, e_remain_j: 50.0 },
                NodeStatusStamp { node: 2, d_i_m: 12.0, l_queue: 1, e_remain_j: 50.0 },
            ],
            emrp_stamps: Vec::new(),
            c: 0.0,
            c_delay: 0.0,
        });
        assert_eq!(rrep.size_bytes(&sizes), 44 + 16 * 2);

        let rerr = Packet::Rerr(Rerr { id: 3, broken: (1, 2), path: vec![1, 0] });
        assert_eq!(rerr.size_bytes(&sizes), 24);
    }
}
