//! Physical-layer and device model: unit-disk radio, transmit/receive energy
//! accounting, and the per-node bounded transmit queue.
//!
//! The channel is ideal — no collisions, no loss, zero propagation delay. A
//! transmission occupies the sender for the packet's serialization time and
//! is heard by every live node inside the closed radio disk at the moment
//! transmission starts.

use std::collections::VecDeque;

/// Radio parameters shared by all nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    pub range_m: f64,
    pub bitrate_bps: f64,
}

impl LinkParams {
    /// Serialization time for a packet of `size_bytes`.
    pub fn t_tx(&self, size_bytes: u32) -> f64 {
        f64::from(size_bytes) * 8.0 / self.bitrate_bps
    }
}

pub fn distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    let dx = a.0 - b.0;
    let dy = a.1 - b.1;
    (dx * dx + dy * dy).sqrt()
}

/// Closed-disk membership: a node exactly at the range boundary is a neighbor.
pub fn in_range(a: (f64, f64), b: (f64, f64), range_m: f64) -> bool {
    distance(a, b) <= range_m
}

/// Indices of live nodes within radio range of node `i` (excluding `i`).
pub fn neighbors_of(i: usize, positions: &[(f64, f64)], alive: &[bool], range_m: f64) -> Vec<usize> {
    positions
        .iter()
        .enumerate()
        .filter(|&(j, &p)| j != i && alive[j] && in_range(positions[i], p, range_m))
        .map(|(j, _)| j)
        .collect()
}

/// Battery state with a double-entry ledger: every joule drawn is also
/// recorded as transmit or receive airtime, so
/// `initial - residual == p_tx·tx_seconds + p_rx·rx_seconds` holds exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyState {
    pub initial_j: f64,
    pub residual_j: f64,
    pub p_tx_w: f64,
    pub p_rx_w: f64,
    pub tx_seconds: f64,
    pub rx_seconds: f64,
}

impl EnergyState {
    pub fn new(initial_j: f64, p_tx_w: f64, p_rx_w: f64) -> Self {
        EnergyState {
            initial_j,
            residual_j: initial_j,
            p_tx_w,
            p_rx_w,
            tx_seconds: 0.0,
            rx_seconds: 0.0,
        }
    }

    pub fn alive(&self) -> bool {
        self.residual_j > 0.0
    }

    /// Pay for `dt` seconds of transmission. Returns true when this charge
    /// is the one that kills the node.
    pub fn charge_tx(&mut self, dt: f64) -> bool {
        let was_alive = self.alive();
        self.residual_j -= self.p_tx_w * dt;
        self.tx_seconds += dt;
        was_alive && !self.alive()
    }

    /// Pay for `dt` seconds of reception. Returns true on the killing charge.
    pub fn charge_rx(&mut self, dt: f64) -> bool {
        let was_alive = self.alive();
        self.residual_j -= self.p_rx_w * dt;
        self.rx_seconds += dt;
        was_alive && !self.alive()
    }

    pub fn consumed_j(&self) -> f64 {
        self.initial_j - self.residual_j
    }

    /// Absolute disagreement between the battery and the airtime ledger.
    pub fn ledger_error_j(&self) -> f64 {
        (self.consumed_j() - (self.p_tx_w * self.tx_seconds + self.p_rx_w * self.rx_seconds)).abs()
    }
}

/// Outcome of an enqueue attempt.
#[derive(Debug, PartialEq, Eq)]
pub enum Enqueue {
    Accepted,
    /// The queue was full; the arriving item was dropped.
    Rejected,
}

/// Fixed-capacity drop-tail queue with two service classes: control items
/// are served before data, FIFO within each class. An arrival to a full
/// queue is rejected regardless of class.
#[derive(Debug)]
pub struct NodeQueue<T> {
    control: VecDeque<T>,
    data: VecDeque<T>,
    capacity: usize,
}

impl<T> NodeQueue<T> {
    pub fn new(capacity: usize) -> Self {
        NodeQueue {
            control: VecDeque::new(),
            data: VecDeque::new(),
            capacity,
        }
    }

    pub fn len(&self) -> usize {
        self.control.len() + self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn enqueue(&mut self, item: T, control: bool) -> Enqueue {
        if self.len() >= self.capacity {
            return Enqueue::Rejected;
        }
        if control {
            self.control.push_back(item);
        } else {
            self.data.push_back(item);
        }
        Enqueue::Accepted
    }

    /// Remove the head-of-line item: the oldest control item if any exist,
    /// otherwise the oldest data item.
    pub fn dequeue(&mut self) -> Option<T> {
        self.control.pop_front().or_else(|| self.data.pop_front())
    }

    /// Empty the queue in service order.
    pub fn drain_all(&mut self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.len());
        out.extend(self.control.drain(..));
        out.extend(self.data.drain(..));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serialization_time_matches_bitrate() {
        let link = LinkParams { range_m: 250.0, bitrate_bps: 2_000_000.0 };
        assert!((link.t_tx(512) - 2.048e-3).abs() < 1e-15);
        assert!((link.t_tx(24) - 9.6e-5).abs() < 1e-15);
    }

    #[test]
    fn transmit_and_receive_charges_match_hand_values() {
        let mut tx = EnergyState::new(50.0, 1.4, 1.0);
        let mut rx = EnergyState::new(100.0, 1.4, 1.0);
        let dt = 2.048e-3;
        assert!(!tx.charge_tx(dt));
        assert!(!rx.charge_rx(dt));
        assert!((tx.consumed_j() - 2.8672e-3).abs() < 1e-12);
        assert!((rx.consumed_j() - 2.048e-3).abs() < 1e-12);
        // consumed_j is computed as initial - residual, so the comparison
        // against p·dt carries half an ulp of the battery size (~1e-14 here).
        assert!(tx.ledger_error_j() < 1e-12);
        assert!(rx.ledger_error_j() < 1e-12);
    }

    #[test]
    fn killing_charge_is_reported_once() {
        let mut e = EnergyState::new(1e-6, 1.4, 1.0);
        assert!(e.alive());
        assert!(e.charge_tx(2.048e-3), "charge crossing zero kills the node");
        assert!(!e.alive());
        assert!(e.residual_j <= 0.0);
        assert!(!e.charge_tx(2.048e-3), "already dead: no second death");
        // The ledger still balances even past zero.
        assert!(e.ledger_error_j() < 1e-15);
    }

    #[test]
    fn residual_never_increases() {
        let mut e = EnergyState::new(50.0, 1.4, 1.0);
        let mut last = e.residual_j;
        for i in 0..1000 {
            if i % 2 == 0 {
                e.charge_tx(1e-3);
            } else {
                e.charge_rx(2e-3);
            }
            assert!(e.residual_j <= last);
            last = e.residual_j;
        }
        assert!(e.ledger_error_j() < 1e-9);
    }

    #[test]
    fn range_boundary_is_inclusive() {
        assert!(in_range((0.0, 0.0), (250.0, 0.0), 250.0));
        assert!(!in_range((0.0, 0.0), (250.0000001, 0.0), 250.0));
    }

    #[test]
    fn neighbor_scan_skips_self_and_dead_nodes() {
        let positions = vec![(0.0, 0.0), (100.0, 0.0), (240.0, 0.0), (600.0, 0.0)];
        let alive = vec![true, false, true, true];
        assert_eq!(neighbors_of(0, &positions, &alive, 250.0), vec![2]);
        let all_alive = vec![true; 4];
        assert_eq!(neighbors_of(0, &positions, &all_alive, 250.0), vec![1, 2]);
    }

    #[test]
    fn queue_serves_control_before_data_fifo_within_class() {
        let mut q: NodeQueue<u32> = NodeQueue::new(50);
        q.enqueue(1, false);
        q.enqueue(2, false);
        q.enqueue(10, true);
        q.enqueue(11, true);
        q.enqueue(3, false);
        assert_eq!(q.len(), 5);
        let order: Vec<u32> = std::iter::from_fn(|| q.dequeue()).collect();
        assert_eq!(order, vec![10, 11, 1, 2, 3]);
    }

    #[test]
    fn arrivals_to_a_full_queue_are_rejected() {
        let mut q: NodeQueue<u32> = NodeQueue::new(50);
        for i in 0..50 {
            assert_eq!(q.enqueue(i, false), Enqueue::Accepted);
        }
        assert_eq!(q.enqueue(99, false), Enqueue::Rejected);
        assert_eq!(q.enqueue(99, true), Enqueue::Rejected, "control is not exempt");
        assert_eq!(q.len(), 50);
        // Draining frees space again.
        q.dequeue();
        assert_eq!(q.enqueue(99, true), Enqueue::Accepted);
    }

    #[test]
    fn drain_preserves_service_order() {
        let mut q: NodeQueue<u32> = NodeQueue::new(10);
        q.enqueue(1, false);
        q.enqueue(10, true);
        q.enqueue(2, false);
        assert_eq!(q.drain_all(), vec![10, 1, 2]);
        assert!(q.is_empty());
    }
}
