//! Discrete-event engine: a monotonic simulation clock, a priority queue of
//! timestamped events, and reproducible named RNG streams.
//!
//! Events fire in `(time, insertion sequence)` order, so two events scheduled
//! for the same instant are processed FIFO. Cancellation is lazy: a cancelled
//! handle leaves a tombstone and the event is skipped when it surfaces.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Simulation time in seconds.
pub type SimTime = f64;

/// Opaque handle for a scheduled event, usable with [`Scheduler::cancel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EventHandle(u64);

#[derive(Debug, Error, PartialEq)]
#[error("cannot schedule event at t={requested} before current clock t={clock}")]
pub struct PastTimeError {
    pub requested: SimTime,
    pub clock: SimTime,
}

struct Scheduled<T> {
    fire_time: SimTime,
    seq: u64,
    payload: T,
}

impl<T> PartialEq for Scheduled<T> {
    fn eq(&self, other: &Self) -> bool {
        self.seq == other.seq
    }
}
impl<T> Eq for Scheduled<T> {}

impl<T> Ord for Scheduled<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap; invert so the earliest (time, seq) pops first.
        other
            .fire_time
            .total_cmp(&self.fire_time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}
impl<T> PartialOrd for Scheduled<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Event queue plus clock. `T` is the event payload the caller dispatches on.
pub struct Scheduler<T> {
    heap: BinaryHeap<Scheduled<T>>,
    /// Seqs that are scheduled and neither fired nor cancelled. Cancellation
    /// just removes the seq here; the heap entry becomes a tombstone that is
    /// skipped lazily when popped.
    live: HashSet<u64>,
    clock: SimTime,
    next_seq: u64,
    master_seed: u64,
}

impl<T> Scheduler<T> {
    pub fn new(master_seed: u64) -> Self {
        Scheduler {
            heap: BinaryHeap::new(),
            live: HashSet::new(),
            clock: 0.0,
            next_seq: 0,
            master_seed,
        }
    }

    pub fn clock(&self) -> SimTime {
        self.clock
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// Schedule `payload` to fire at `fire_time`. Ties with already-queued
    /// events at the same time resolve in insertion order.
    pub fn schedule(&mut self, fire_time: SimTime, payload: T) -> Result<EventHandle, PastTimeError> {
        if fire_time < self.clock {
            return Err(PastTimeError {
                requested: fire_time,
                clock: self.clock,
            });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.live.insert(seq);
        self.heap.push(Scheduled {
            fire_time,
            seq,
            payload,
        });
        Ok(EventHandle(seq))
    }

    /// Tombstone a pending event. Returns false if it already fired or was
    /// already cancelled.
    pub fn cancel(&mut self, handle: EventHandle) -> bool {
        self.live.remove(&handle.0)
    }

    /// Pop the next event with `fire_time <= t_end`, advancing the clock to
    /// its fire time. Returns `None` when nothing is due (the clock is then
    /// left where it was; call [`Scheduler::finish`] to advance it to `t_end`).
    pub fn pop_due(&mut self, t_end: SimTime) -> Option<(SimTime, T)> {
        while let Some(top) = self.heap.peek() {
            if top.fire_time > t_end {
                return None;
            }
            let ev = self.heap.pop().expect("peeked");
            if !self.live.remove(&ev.seq) {
                continue; // cancelled: skip the tombstone
            }
            debug_assert!(ev.fire_time >= self.clock, "clock must never run backwards");
            self.clock = ev.fire_time;
            return Some((ev.fire_time, ev.payload));
        }
        None
    }

    /// Process every event due at or before `t_end` with `handler`, then park
    /// the clock exactly at `t_end`. Returns the number of events processed.
    ///
    /// The handler may schedule further events; those due within the horizon
    /// are processed in the same call.
    pub fn run_until(&mut self, t_end: SimTime, mut handler: impl FnMut(&mut Self, SimTime, T)) -> u64 {
        let mut processed = 0;
        while let Some((t, payload)) = self.pop_due(t_end) {
            handler(self, t, payload);
            processed += 1;
        }
        self.finish(t_end);
        processed
    }

    /// Advance the clock to `t_end` (no-op if already past it).
    pub fn finish(&mut self, t_end: SimTime) {
        if t_end > self.clock {
            self.clock = t_end;
        }
    }

    /// Drain all still-queued events without advancing the clock. Used at end
    /// of run to account for in-flight work.
    pub fn drain_pending(&mut self) -> Vec<(SimTime, T)> {
        let mut out = Vec::with_capacity(self.live.len());
        while let Some(ev) = self.heap.pop() {
            if !self.live.remove(&ev.seq) {
                continue;
            }
            out.push((ev.fire_time, ev.payload));
        }
        out
    }

    pub fn pending_len(&self) -> usize {
        self.live.len()
    }

    /// Derive a named RNG stream from the master seed. The same
    /// `(master_seed, label)` pair always yields the identical sequence;
    /// distinct labels yield unrelated sequences.
    pub fn rng_stream(&self, label: &str) -> RngStream {
        RngStream::derive(self.master_seed, label)
    }
}

/// Deterministic random stream, identified by a label.
///
/// Draws come from ChaCha8 keyed by `SHA-256(master_seed || label)`, so
/// streams are stable across platforms and independent of each other.
#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn derive(master_seed: u64, label: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(master_seed.to_le_bytes());
        hasher.update([0u8]);
        hasher.update(label.as_bytes());
        let digest = hasher.finalize();
        let mut seed = [0u8; 32];
        seed.copy_from_slice(&digest);
        RngStream {
            rng: ChaCha8Rng::from_seed(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform draw in `[0, 1)` with 53 bits of precision.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in `[lo, hi)`. `lo == hi` returns `lo`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }
}
