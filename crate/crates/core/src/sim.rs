//! The simulation world: wires mobility, radio, energy, queueing, routing,
//! and traffic into one deterministic event-driven run.
//!
//! One transmission occupies the sender for the serialization time and is
//! paid for — by the sender and every receiver — at transmit start. A node's
//! packet queue is served one packet at a time: each service costs the
//! processing time `t_l_s` before the transmission begins, and the next
//! service is scheduled only once the radio is free again. Nodes whose
//! battery reaches zero stop sending and receiving but keep moving, so two
//! runs that share a seed share their mobility exactly, whatever the policy.

use std::collections::{BTreeMap, HashSet};

use crate::engine::{Scheduler, SimTime};
use crate::metrics::{self, MetricsContext, MetricsReport};
use crate::mobility::{MotionParams, WaypointState};
use crate::netmodel::{distance, in_range, EnergyState, Enqueue, LinkParams, NodeQueue};
use crate::qos::{
    rrep_admission_check, rtdsr_admission, stamp_status, AdmitDecision, Admission, Policy,
    PolicyKind, RtdsrParams,
};
use crate::routing::{
    select_route, ControlSizes, DataPacket, EmrpStamp, NodeId, NodeStatusStamp, Packet, PacketId,
    RequestId, Rerr, Rreq, Rrep, RouteCache, RouteCacheEntry, RouteCandidate,
};
use crate::scenario::{NodeClass, Scenario, ScenarioError};
use crate::trace::{DropReason, PacketType, TraceEvent, TraceKind, TraceLog};
use crate::traffic::{cbr_send_times, CbrFlow};

/// Everything the scheduler can deliver.
#[derive(Debug, Clone)]
pub enum EventKind {
    /// A flow emits its next payload packet.
    CbrSend { flow: usize },
    /// A transmission finishes arriving at `node`.
    Arrival { node: NodeId, packet: Packet },
    /// `node` finishes the per-packet processing time and transmits the
    /// head of its queue.
    QueueService { node: NodeId },
    WaypointReached { node: NodeId },
    PauseEnd { node: NodeId },
    /// The collection window for replies to `origin`'s route discovery
    /// toward `dst` closes.
    RrepWindowClose { origin: NodeId, dst: NodeId },
    /// `node`'s battery hit zero when it was last charged.
    NodeDeath { node: NodeId },
}

/// An open route discovery at its origin.
#[derive(Debug, Default)]
struct Discovery {
    pending: Vec<DataPacket>,
    candidates: Vec<RouteCandidate>,
}

struct Node {
    class: NodeClass,
    motion: MotionParams,
    waypoint: WaypointState,
    rng: crate::engine::RngStream,
    energy: EnergyState,
    queue: NodeQueue<Packet>,
    /// A QueueService event is pending; at most one exists per node.
    service_scheduled: bool,
    /// When the radio finishes its current transmission.
    tx_free_at: SimTime,
    cache: RouteCache,
    seen: HashSet<RequestId>,
    next_request_seq: u64,
    discovery: BTreeMap<NodeId, Discovery>,
    death_time: Option<SimTime>,
}

/// One sampled node position, recorded at placement and at every waypoint
/// and pause end. Runs with equal seeds produce equal logs regardless of
/// routing policy.
#[derive(Debug, Clone, PartialEq)]
pub struct MobilityPoint {
    pub time_s: f64,
    pub node: NodeId,
    pub x_m: f64,
    pub y_m: f64,
}

/// Per-node battery ledger at end of run.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeEnergy {
    pub node: NodeId,
    pub class: NodeClass,
    pub initial_j: f64,
    pub residual_j: f64,
    pub consumed_j: f64,
    pub tx_seconds: f64,
    pub rx_seconds: f64,
    pub death_time_s: Option<f64>,
}

/// Everything a finished run yields.
#[derive(Debug)]
pub struct RunOutput {
    pub scenario: String,
    pub policy: String,
    pub seed: u64,
    pub report: MetricsReport,
    pub trace: TraceLog,
    pub energy: Vec<NodeEnergy>,
    pub mobility: Vec<MobilityPoint>,
    pub events_processed: u64,
}

impl RunOutput {
    /// Total energy drawn across all nodes (control traffic included).
    pub fn consumed_j(&self) -> f64 {
        self.energy.iter().map(|e| e.consumed_j).sum()
    }
}

struct World {
    scn: Scenario,
    policy: Policy,
    flows: Vec<CbrFlow>,
    link: LinkParams,
    sizes: ControlSizes,
    nodes: Vec<Node>,
    trace: TraceLog,
    mobility: Vec<MobilityPoint>,
    next_packet_id: PacketId,
}

type Sched = Scheduler<EventKind>;

fn ptype_of(p: &Packet) -> PacketType {
    match p {
        Packet::Data(_) => PacketType::Cbr,
        Packet::Rreq(_) => PacketType::Rreq,
        Packet::Rrep(_) => PacketType::Rrep,
        Packet::Rerr(_) => PacketType::Rerr,
    }
}

impl World {
    fn new(scn: &Scenario, policy: Policy, flows: Vec<CbrFlow>, sched: &mut Sched) -> World {
        let area = scn.area();
        let mut nodes = Vec::with_capacity(scn.n_total());
        let mut mobility = Vec::new();
        for i in 0..scn.n_total() {
            let class = scn.class_of(i);
            let motion = scn.motion_params(class);
            let mut rng = sched.rng_stream(&format!("mobility/node{i}"));
            let waypoint = WaypointState::init(&area, &motion, &mut rng, 0.0);
            mobility.push(MobilityPoint {
                time_s: 0.0,
                node: i,
                x_m: waypoint.origin.0,
                y_m: waypoint.origin.1,
            });
            sched
                .schedule(waypoint.arrival_time(), EventKind::WaypointReached { node: i })
                .expect("waypoint arrival is in the future");
            nodes.push(Node {
                class,
                motion,
                waypoint,
                rng,
                energy: EnergyState::new(scn.initial_energy_j(class), scn.p_tx_w, scn.p_rx_w),
                queue: NodeQueue::new(scn.queue_capacity),
                service_scheduled: false,
                tx_free_at: 0.0,
                cache: RouteCache::default(),
                seen: HashSet::new(),
                next_request_seq: 0,
                discovery: BTreeMap::new(),
                death_time: None,
            });
        }
        for (idx, flow) in flows.iter().enumerate() {
            for t in cbr_send_times(flow) {
                sched
                    .schedule(t, EventKind::CbrSend { flow: idx })
                    .expect("send times are non-negative");
            }
        }
        World {
            scn: scn.clone(),
            policy,
            flows,
            link: scn.link(),
            sizes: scn.control_sizes(),
            nodes,
            trace: TraceLog::default(),
            mobility,
            next_packet_id: 0,
        }
    }

    fn alloc_id(&mut self) -> PacketId {
        let id = self.next_packet_id;
        self.next_packet_id += 1;
        id
    }

    fn push_trace(
        &mut self,
        time: f64,
        kind: TraceKind,
        node: NodeId,
        packet: i64,
        ptype: Option<PacketType>,
        reason: DropReason,
    ) {
        self.trace.push(TraceEvent { time, kind, node, packet, ptype, reason });
    }

    fn pos_of(&self, node: NodeId, t: SimTime) -> (f64, f64) {
        self.nodes[node].waypoint.position_at(t)
    }

    /// Can `from` hand a packet to `to` right now? The receiver must be
    /// alive and within radio range.
    fn link_up(&self, from: NodeId, to: NodeId, now: SimTime) -> bool {
        self.nodes[to].energy.alive()
            && in_range(self.pos_of(from, now), self.pos_of(to, now), self.link.range_m)
    }

    fn enforcing(&self) -> bool {
        self.policy.enforces_deadline()
    }

    fn handle(&mut self, sched: &mut Sched, now: SimTime, ev: EventKind) {
        match ev {
            EventKind::CbrSend { flow } => self.on_cbr_send(sched, now, flow),
            EventKind::Arrival { node, packet } => self.on_arrival(sched, now, node, packet),
            EventKind::QueueService { node } => self.on_queue_service(sched, now, node),
            EventKind::WaypointReached { node } => self.on_waypoint_reached(sched, now, node),
            EventKind::PauseEnd { node } => self.on_pause_end(sched, now, node),
            EventKind::RrepWindowClose { origin, dst } => {
                self.on_window_close(sched, now, origin, dst)
            }
            EventKind::NodeDeath { node } => self.on_node_death(now, node),
        }
    }

    // --- traffic ---------------------------------------------------------

    fn on_cbr_send(&mut self, sched: &mut Sched, now: SimTime, flow: usize) {
        let f = self.flows[flow].clone();
        // A drained source falls silent: it generates nothing.
        if !self.nodes[f.src].energy.alive() {
            return;
        }
        let id = self.alloc_id();
        let d = DataPacket {
            id,
            src: f.src,
            dst: f.dst,
            size_bytes: self.scn.packet_size_bytes,
            generated_at: now,
            deadline_s: f.deadline_s,
            route: Vec::new(),
        };
        self.push_trace(now, TraceKind::Send, f.src, id as i64, Some(PacketType::Cbr), DropReason::None);
        self.dispatch_data(sched, now, d);
    }

    /// Route a freshly generated packet: use a fresh cached route, join an
    /// open discovery, or start a new one.
    fn dispatch_data(&mut self, sched: &mut Sched, now: SimTime, mut d: DataPacket) {
        let src = d.src;
        let dst = d.dst;
        if let Some(entry) = self.nodes[src].cache.fresh(dst, now, self.scn.cache_ttl_s) {
            d.route = entry.route.clone();
            self.enqueue_data(sched, now, src, d);
            return;
        }
        if let Some(disc) = self.nodes[src].discovery.get_mut(&dst) {
            disc.pending.push(d);
            return;
        }
        // New discovery: flood a route request and open the reply window.
        self.nodes[src].next_request_seq += 1;
        let seq = self.nodes[src].next_request_seq;
        self.nodes[src].seen.insert((src, seq));
        let rreq_id = self.alloc_id();
        let rreq = Rreq {
            id: rreq_id,
            request_id: (src, seq),
            origin: src,
            target: dst,
            originated_at: now,
            deadline_s: d.deadline_s,
            route: vec![src],
        };
        self.nodes[src].discovery.insert(
            dst,
            Discovery { pending: vec![d], candidates: Vec::new() },
        );
        sched
            .schedule(now + self.scn.reply_window_s, EventKind::RrepWindowClose { origin: src, dst })
            .expect("window closes in the future");
        self.push_trace(now, TraceKind::Send, src, rreq_id as i64, Some(PacketType::Rreq), DropReason::None);
        self.enqueue_control(sched, now, src, Packet::Rreq(rreq));
    }

    // --- queueing --------------------------------------------------------

    fn enqueue_control(&mut self, sched: &mut Sched, now: SimTime, node: NodeId, pkt: Packet) {
        let (id, ptype) = (pkt.id(), ptype_of(&pkt));
        match self.nodes[node].queue.enqueue(pkt, true) {
            Enqueue::Accepted => self.try_start_service(sched, now, node),
            Enqueue::Rejected => {
                self.push_trace(now, TraceKind::Drop, node, id as i64, Some(ptype), DropReason::QueueFull)
            }
        }
    }

    /// Queue a payload packet for forwarding from `node`. Checks, in order:
    /// deadline (when the policy enforces it), next-hop reachability, and
    /// queue space.
    fn enqueue_data(&mut self, sched: &mut Sched, now: SimTime, node: NodeId, d: DataPacket) {
        if self.enforcing() && d.expired(now) {
            self.push_trace(now, TraceKind::Drop, node, d.id as i64, Some(PacketType::Cbr), DropReason::Expired);
            return;
        }
        let next = self.next_data_hop(node, &d);
        if !self.link_up(node, next, now) {
            self.push_trace(now, TraceKind::Drop, node, d.id as i64, Some(PacketType::Cbr), DropReason::BrokenLink);
            self.report_broken(sched, now, node, &d, next);
            return;
        }
        let id = d.id;
        match self.nodes[node].queue.enqueue(Packet::Data(d), false) {
            Enqueue::Accepted => self.try_start_service(sched, now, node),
            Enqueue::Rejected => {
                self.push_trace(now, TraceKind::Drop, node, id as i64, Some(PacketType::Cbr), DropReason::QueueFull)
            }
        }
    }

    fn next_data_hop(&self, node: NodeId, d: &DataPacket) -> NodeId {
        let pos = d
            .route
            .iter()
            .position(|&x| x == node)
            .expect("forwarding node is on the source route");
        d.route[pos + 1]
    }

    fn try_start_service(&mut self, sched: &mut Sched, now: SimTime, node: NodeId) {
        let n = &mut self.nodes[node];
        if n.service_scheduled || !n.energy.alive() || n.queue.is_empty() {
            return;
        }
        let at = now.max(n.tx_free_at) + self.scn.t_l_s;
        sched
            .schedule(at, EventKind::QueueService { node })
            .expect("service time is in the future");
        n.service_scheduled = true;
    }

    fn on_queue_service(&mut self, sched: &mut Sched, now: SimTime, node: NodeId) {
        self.nodes[node].service_scheduled = false;
        if !self.nodes[node].energy.alive() {
            return; // the death drain already emptied this queue
        }
        let Some(pkt) = self.nodes[node].queue.dequeue() else {
            return;
        };
        self.service_packet(sched, now, node, pkt);
        self.try_start_service(sched, now, node);
    }

    /// The head-of-line packet has finished its processing time: re-check it
    /// and put it on the air.
    fn service_packet(&mut self, sched: &mut Sched, now: SimTime, node: NodeId, pkt: Packet) {
        match pkt {
            Packet::Data(d) => {
                if self.enforcing() && d.expired(now) {
                    self.push_trace(now, TraceKind::Drop, node, d.id as i64, Some(PacketType::Cbr), DropReason::Expired);
                    return;
                }
                let next = self.next_data_hop(node, &d);
                if !self.link_up(node, next, now) {
                    self.push_trace(now, TraceKind::Drop, node, d.id as i64, Some(PacketType::Cbr), DropReason::BrokenLink);
                    self.report_broken(sched, now, node, &d, next);
                    return;
                }
                self.transmit_unicast(sched, now, node, next, Packet::Data(d));
            }
            Packet::Rreq(q) => {
                self.transmit_broadcast(sched, now, node, Packet::Rreq(q));
            }
            Packet::Rrep(p) => {
                let pos = p
                    .route
                    .iter()
                    .position(|&x| x == node)
                    .expect("reply forwarder is on the discovered route");
                let next = p.route[pos - 1];
                if !self.link_up(node, next, now) {
                    self.push_trace(now, TraceKind::Drop, node, p.id as i64, Some(PacketType::Rrep), DropReason::BrokenLink);
                    return;
                }
                self.transmit_unicast(sched, now, node, next, Packet::Rrep(p));
            }
            Packet::Rerr(e) => {
                let pos = e
                    .path
                    .iter()
                    .position(|&x| x == node)
                    .expect("error forwarder is on the return path");
                let next = e.path[pos + 1];
                if !self.link_up(node, next, now) {
                    self.push_trace(now, TraceKind::Drop, node, e.id as i64, Some(PacketType::Rerr), DropReason::BrokenLink);
                    return;
                }
                self.transmit_unicast(sched, now, node, next, Packet::Rerr(e));
            }
        }
    }

    // --- the air ---------------------------------------------------------

    fn transmit_unicast(&mut self, sched: &mut Sched, now: SimTime, from: NodeId, to: NodeId, pkt: Packet) {
        let t_tx = self.link.t_tx(pkt.size_bytes(&self.sizes));
        self.push_trace(now, TraceKind::Fwd, from, pkt.id() as i64, Some(ptype_of(&pkt)), DropReason::None);
        if self.nodes[from].energy.charge_tx(t_tx) {
            sched.schedule(now, EventKind::NodeDeath { node: from }).expect("now is now");
        }
        self.nodes[from].tx_free_at = now + t_tx;
        if self.nodes[to].energy.charge_rx(t_tx) {
            sched.schedule(now, EventKind::NodeDeath { node: to }).expect("now is now");
        }
        sched
            .schedule(now + t_tx, EventKind::Arrival { node: to, packet: pkt })
            .expect("arrival is in the future");
    }

    fn transmit_broadcast(&mut self, sched: &mut Sched, now: SimTime, from: NodeId, pkt: Packet) {
        let t_tx = self.link.t_tx(pkt.size_bytes(&self.sizes));
        self.push_trace(now, TraceKind::Fwd, from, pkt.id() as i64, Some(ptype_of(&pkt)), DropReason::None);
        if self.nodes[from].energy.charge_tx(t_tx) {
            sched.schedule(now, EventKind::NodeDeath { node: from }).expect("now is now");
        }
        self.nodes[from].tx_free_at = now + t_tx;
        let from_pos = self.pos_of(from, now);
        for j in 0..self.nodes.len() {
            if j == from
                || !self.nodes[j].energy.alive()
                || !in_range(from_pos, self.pos_of(j, now), self.link.range_m)
            {
                continue;
            }
            if self.nodes[j].energy.charge_rx(t_tx) {
                sched.schedule(now, EventKind::NodeDeath { node: j }).expect("now is now");
            }
            sched
                .schedule(now + t_tx, EventKind::Arrival { node: j, packet: pkt.clone() })
                .expect("arrival is in the future");
        }
    }

    // --- arrivals --------------------------------------------------------

    fn on_arrival(&mut self, sched: &mut Sched, now: SimTime, node: NodeId, packet: Packet) {
        if !self.nodes[node].energy.alive() {
            self.push_trace(now, TraceKind::Drop, node, packet.id() as i64, Some(ptype_of(&packet)), DropReason::Dead);
            return;
        }
        match packet {
            Packet::Data(d) => self.arrive_data(sched, now, node, d),
            Packet::Rreq(q) => self.arrive_rreq(sched, now, node, q),
            Packet::Rrep(p) => self.arrive_rrep(sched, now, node, p),
            Packet::Rerr(e) => self.arrive_rerr(sched, now, node, e),
        }
    }

    fn arrive_data(&mut self, sched: &mut Sched, now: SimTime, node: NodeId, d: DataPacket) {
        if self.enforcing() && d.expired(now) {
            self.push_trace(now, TraceKind::Drop, node, d.id as i64, Some(PacketType::Cbr), DropReason::Expired);
            return;
        }
        if node == d.dst {
            self.push_trace(now, TraceKind::Recv, node, d.id as i64, Some(PacketType::Cbr), DropReason::None);
            return;
        }
        self.enqueue_data(sched, now, node, d);
    }

    fn arrive_rreq(&mut self, sched: &mut Sched, now: SimTime, node: NodeId, q: Rreq) {
        // Echoes and loops: a request whose accumulated route already names
        // this node carries nothing new.
        if q.route.contains(&node) {
            self.push_trace(now, TraceKind::Drop, node, q.id as i64, Some(PacketType::Rreq), DropReason::Duplicate);
            return;
        }
        if node == q.target {
            // The target answers every arriving copy, so the origin can
            // choose among several discovered routes.
            self.push_trace(now, TraceKind::Recv, node, q.id as i64, Some(PacketType::Rreq), DropReason::None);
            let mut route = q.route;
            route.push(node);
            let rrep_id = self.alloc_id();
            let rrep = Rrep {
                id: rrep_id,
                route,
                deadline_s: q.deadline_s,
                stamps: Vec::new(),
                emrp_stamps: Vec::new(),
                c: 0.0,
                c_delay: 0.0,
            };
            self.push_trace(now, TraceKind::Send, node, rrep_id as i64, Some(PacketType::Rrep), DropReason::None);
            self.enqueue_control(sched, now, node, Packet::Rrep(rrep));
            return;
        }
        if !self.nodes[node].seen.insert(q.request_id) {
            self.push_trace(now, TraceKind::Drop, node, q.id as i64, Some(PacketType::Rreq), DropReason::Duplicate);
            return;
        }
        if self.policy.rtdsr_admission {
            // Take part in the flow only if the packet would still have
            // time left after this node's processing and one transmission.
            let params = RtdsrParams {
                e_remaining_s: q.deadline_s - (now - q.originated_at),
                t_tl_s: self.scn.t_l_s,
                t_ts_s: self.scn.effective_t_ts_s(),
                admitted_s: Vec::new(),
            };
            if rtdsr_admission(&params) == AdmitDecision::Reject {
                self.push_trace(now, TraceKind::Drop, node, q.id as i64, Some(PacketType::Rreq), DropReason::Expired);
                return;
            }
        }
        let mut q = q;
        q.route.push(node);
        self.enqueue_control(sched, now, node, Packet::Rreq(q));
    }

    fn arrive_rrep(&mut self, sched: &mut Sched, now: SimTime, node: NodeId, p: Rrep) {
        let origin = p.route[0];
        if node == origin {
            self.push_trace(now, TraceKind::Recv, node, p.id as i64, Some(PacketType::Rrep), DropReason::None);
            let dst = *p.route.last().expect("route is never empty");
            if let Some(disc) = self.nodes[node].discovery.get_mut(&dst) {
                disc.candidates.push(RouteCandidate {
                    route: p.route,
                    stamps: p.stamps,
                    emrp_stamps: p.emrp_stamps,
                    carried_c: p.c,
                    carried_c_delay: p.c_delay,
                });
            }
            // Replies landing after the window closed are ignored.
            return;
        }
        if self.policy.admits_rreps()
            && rrep_admission_check(p.deadline_s, p.c_delay) == Admission::Discard
        {
            self.push_trace(now, TraceKind::Drop, node, p.id as i64, Some(PacketType::Rrep), DropReason::Expired);
            return;
        }
        let mut p = p;
        if self.policy.stamps_rreps() && !self.stamp_reply(now, node, &mut p) {
            return;
        }
        self.enqueue_control(sched, now, node, Packet::Rrep(p));
    }

    /// Record this node's status in a reply travelling back to the origin.
    /// Returns false when the reply had to be discarded instead.
    fn stamp_reply(&mut self, now: SimTime, node: NodeId, p: &mut Rrep) -> bool {
        let pos = p
            .route
            .iter()
            .position(|&x| x == node)
            .expect("stamping node is on the discovered route");
        match self.policy.kind {
            PolicyKind::Emrp => {
                let next_toward_target = p.route[pos + 1];
                let e_next = self.nodes[next_toward_target].energy.residual_j;
                if e_next <= 0.0 {
                    self.push_trace(now, TraceKind::Drop, node, p.id as i64, Some(PacketType::Rrep), DropReason::Dead);
                    return false;
                }
                p.emrp_stamps.push(EmrpStamp {
                    node,
                    p_tx_w: self.scn.p_tx_w,
                    p_rx_w: self.scn.p_rx_w,
                    e_i_j: self.nodes[node].energy.residual_j,
                    e_next_j: e_next,
                    n_retrans: 0,
                    n_queue: self.nodes[node].queue.len() as u32,
                });
                true
            }
            PolicyKind::EdDsr | PolicyKind::Alw(_) => {
                let toward_origin = p.route[pos - 1];
                let stamp = NodeStatusStamp {
                    node,
                    d_i_m: distance(self.pos_of(node, now), self.pos_of(toward_origin, now)),
                    l_queue: self.nodes[node].queue.len() as u32,
                    e_remain_j: self.nodes[node].energy.residual_j,
                };
                match stamp_status(p, stamp, &self.policy.qos) {
                    Ok(()) => true,
                    Err(_) => {
                        // Unreachable while this node is alive; drop defensively.
                        self.push_trace(now, TraceKind::Drop, node, p.id as i64, Some(PacketType::Rrep), DropReason::Dead);
                        false
                    }
                }
            }
            PolicyKind::Dsr => true,
        }
    }

    fn arrive_rerr(&mut self, sched: &mut Sched, now: SimTime, node: NodeId, e: Rerr) {
        let terminus = *e.path.last().expect("error path is never empty");
        if node == terminus {
            self.push_trace(now, TraceKind::Recv, node, e.id as i64, Some(PacketType::Rerr), DropReason::None);
            self.nodes[node].cache.purge_link(e.broken);
            return;
        }
        self.enqueue_control(sched, now, node, Packet::Rerr(e));
    }

    /// A data transmission failed at `detector`: purge the detector's own
    /// cache and, unless the detector is the source, send an error back so
    /// the source purges too.
    fn report_broken(&mut self, sched: &mut Sched, now: SimTime, detector: NodeId, d: &DataPacket, next: NodeId) {
        self.nodes[detector].cache.purge_link((detector, next));
        if detector == d.src {
            return;
        }
        let pos = d
            .route
            .iter()
            .position(|&x| x == detector)
            .expect("detector is on the source route");
        let mut path: Vec<NodeId> = d.route[..=pos].to_vec();
        path.reverse();
        let rerr_id = self.alloc_id();
        let rerr = Rerr { id: rerr_id, broken: (detector, next), path };
        self.push_trace(now, TraceKind::Send, detector, rerr_id as i64, Some(PacketType::Rerr), DropReason::None);
        self.enqueue_control(sched, now, detector, Packet::Rerr(rerr));
    }

    // --- discovery window ------------------------------------------------

    fn on_window_close(&mut self, sched: &mut Sched, now: SimTime, origin: NodeId, dst: NodeId) {
        let Some(disc) = self.nodes[origin].discovery.remove(&dst) else {
            return; // the origin died; its buffer was drained at death
        };
        match select_route(&disc.candidates, &self.policy) {
            Ok((winner, cost)) => {
                let route = winner.route.clone();
                self.nodes[origin].cache.insert(
                    dst,
                    RouteCacheEntry { route: route.clone(), cost, inserted_at: now },
                );
                for mut d in disc.pending {
                    if self.enforcing() && d.expired(now) {
                        self.push_trace(now, TraceKind::Drop, origin, d.id as i64, Some(PacketType::Cbr), DropReason::Expired);
                        continue;
                    }
                    d.route = route.clone();
                    self.enqueue_data(sched, now, origin, d);
                }
            }
            Err(_) => {
                for d in disc.pending {
                    let reason = if self.enforcing() && d.expired(now) {
                        DropReason::Expired
                    } else {
                        DropReason::NoRoute
                    };
                    self.push_trace(now, TraceKind::Drop, origin, d.id as i64, Some(PacketType::Cbr), reason);
                }
            }
        }
    }

    // --- mobility --------------------------------------------------------

    fn log_position(&mut self, now: SimTime, node: NodeId) {
        let (x_m, y_m) = self.pos_of(node, now);
        self.mobility.push(MobilityPoint { time_s: now, node, x_m, y_m });
    }

    fn on_waypoint_reached(&mut self, sched: &mut Sched, now: SimTime, node: NodeId) {
        self.log_position(now, node);
        let n = &mut self.nodes[node];
        if n.motion.pause_s > 0.0 {
            n.waypoint.begin_pause(now + n.motion.pause_s);
            sched
                .schedule(now + n.motion.pause_s, EventKind::PauseEnd { node })
                .expect("pause ends in the future");
        } else {
            let area = self.scn.area();
            let arrival = n.waypoint.start_leg(&area, &n.motion, &mut n.rng, now);
            sched
                .schedule(arrival, EventKind::WaypointReached { node })
                .expect("arrival is in the future");
        }
    }

    fn on_pause_end(&mut self, sched: &mut Sched, now: SimTime, node: NodeId) {
        let area = self.scn.area();
        let n = &mut self.nodes[node];
        let arrival = n.waypoint.start_leg(&area, &n.motion, &mut n.rng, now);
        sched
            .schedule(arrival, EventKind::WaypointReached { node })
            .expect("arrival is in the future");
        self.log_position(now, node);
    }

    // --- death -----------------------------------------------------------

    fn on_node_death(&mut self, now: SimTime, node: NodeId) {
        if self.nodes[node].death_time.is_some() {
            return;
        }
        self.nodes[node].death_time = Some(now);
        self.push_trace(now, TraceKind::Die, node, -1, None, DropReason::None);
        let drained = self.nodes[node].queue.drain_all();
        for pkt in drained {
            self.drop_dead(now, node, pkt);
        }
        let discoveries = std::mem::take(&mut self.nodes[node].discovery);
        for (_, disc) in discoveries {
            for d in disc.pending {
                self.drop_dead(now, node, Packet::Data(d));
            }
        }
    }

    fn drop_dead(&mut self, now: SimTime, node: NodeId, pkt: Packet) {
        let reason = match &pkt {
            Packet::Data(d) if self.enforcing() && d.expired(now) => DropReason::Expired,
            _ => DropReason::Dead,
        };
        self.push_trace(now, TraceKind::Drop, node, pkt.id() as i64, Some(ptype_of(&pkt)), reason);
    }

    // --- end of run ------------------------------------------------------

    /// Account for everything still in flight, queued, or buffered when the
    /// run ends, so every generated packet has exactly one terminal trace
    /// line.
    fn flush(&mut self, sched: &mut Sched) {
        let t_end = sched.clock();
        let end_reason = |world: &World, pkt: &Packet| match pkt {
            Packet::Data(d) if world.enforcing() && d.expired(t_end) => DropReason::Expired,
            _ => DropReason::None,
        };
        for (_, ev) in sched.drain_pending() {
            if let EventKind::Arrival { node, packet } = ev {
                let reason = end_reason(self, &packet);
                self.push_trace(t_end, TraceKind::Drop, node, packet.id() as i64, Some(ptype_of(&packet)), reason);
            }
        }
        for i in 0..self.nodes.len() {
            let drained = self.nodes[i].queue.drain_all();
            for pkt in drained {
                let reason = end_reason(self, &pkt);
                self.push_trace(t_end, TraceKind::Drop, i, pkt.id() as i64, Some(ptype_of(&pkt)), reason);
            }
            let discoveries = std::mem::take(&mut self.nodes[i].discovery);
            for (_, disc) in discoveries {
                for d in disc.pending {
                    let pkt = Packet::Data(d);
                    let reason = end_reason(self, &pkt);
                    self.push_trace(t_end, TraceKind::Drop, i, pkt.id() as i64, Some(ptype_of(&pkt)), reason);
                }
            }
        }
    }

    fn into_output(mut self, seed: u64, events_processed: u64) -> RunOutput {
        self.mobility
            .sort_by(|a, b| a.time_s.total_cmp(&b.time_s).then(a.node.cmp(&b.node)));
        let energy: Vec<NodeEnergy> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| {
                debug_assert!(
                    n.energy.ledger_error_j() < 1e-9,
                    "battery ledger out of balance on node {i}"
                );
                NodeEnergy {
                    node: i,
                    class: n.class,
                    initial_j: n.energy.initial_j,
                    residual_j: n.energy.residual_j,
                    consumed_j: n.energy.consumed_j(),
                    tx_seconds: n.energy.tx_seconds,
                    rx_seconds: n.energy.rx_seconds,
                    death_time_s: n.death_time,
                }
            })
            .collect();
        let ctx = MetricsContext {
            d_k_s: self.scn.deadline_s,
            n_smh: self.scn.n_smh,
            run_length_s: self.scn.duration_s,
            packet_size_bytes: self.scn.packet_size_bytes,
            consumed_j: energy.iter().map(|e| e.consumed_j).sum(),
        };
        let report = metrics::report(&self.trace.events, &ctx)
            .expect("every run generates at least one packet");
        RunOutput {
            scenario: self.scn.name.clone(),
            policy: self.policy.name.clone(),
            seed,
            report,
            trace: self.trace,
            energy,
            mobility: self.mobility,
            events_processed,
        }
    }
}

/// Simulate one replication of `scn` under the given master seed.
pub fn run_scenario(scn: &Scenario, seed: u64) -> Result<RunOutput, ScenarioError> {
    scn.validate()?;
    let policy = scn.resolve_policy()?;
    let flows = scn.flows()?;
    let mut sched: Sched = Scheduler::new(seed);
    let mut world = World::new(scn, policy, flows, &mut sched);
    let events = sched.run_until(scn.duration_s, |s, t, ev| world.handle(s, t, ev));
    world.flush(&mut sched);
    Ok(world.into_output(seed, events))
}

/// Run replication `r` of `scn` (seeds are `base_seed + r`).
pub fn run_replication(scn: &Scenario, replication: u32) -> Result<RunOutput, ScenarioError> {
    run_scenario(scn, scn.base_seed + u64::from(replication))
}
