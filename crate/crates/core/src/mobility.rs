//! Random-waypoint mobility over a rectangular area.
//!
//! A node repeatedly draws a uniform destination and speed, travels there in
//! a straight line, optionally pauses, and repeats. Positions are never
//! stepped — they are interpolated on demand from the current leg, so the
//! model costs O(1) per query regardless of how often anyone looks.

use crate::engine::RngStream;

/// Rectangular deployment area `[0, width] × [0, height]`, meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Area {
    pub width_m: f64,
    pub height_m: f64,
}

impl Area {
    pub fn uniform_point(&self, rng: &mut RngStream) -> (f64, f64) {
        let x = rng.uniform_in(0.0, self.width_m);
        let y = rng.uniform_in(0.0, self.height_m);
        (x, y)
    }
}

/// Speed and pause parameters for one node class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionParams {
    pub v_min_mps: f64,
    pub v_max_mps: f64,
    pub pause_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Phase {
    Moving,
    /// Parked at the leg's destination until `until`.
    Paused { until: f64 },
}

/// One node's current movement leg.
#[derive(Debug, Clone, PartialEq)]
pub struct WaypointState {
    pub origin: (f64, f64),
    pub destination: (f64, f64),
    pub speed_mps: f64,
    pub depart_time: f64,
    pub phase: Phase,
}

impl WaypointState {
    /// Place a node uniformly in the area and start its first leg.
    /// Draw order: position x, y; then the first leg's destination and speed.
    pub fn init(area: &Area, params: &MotionParams, rng: &mut RngStream, now: f64) -> WaypointState {
        let origin = area.uniform_point(rng);
        let mut st = WaypointState {
            origin,
            destination: origin,
            speed_mps: params.v_min_mps,
            depart_time: now,
            phase: Phase::Moving,
        };
        st.start_leg(area, params, rng, now);
        st
    }

    /// Draw a fresh destination and speed, departing from the current
    /// position at `now`. Returns the arrival time at the new destination.
    pub fn start_leg(&mut self, area: &Area, params: &MotionParams, rng: &mut RngStream, now: f64) -> f64 {
        let from = self.position_at(now);
        self.origin = from;
        self.destination = area.uniform_point(rng);
        self.speed_mps = rng.uniform_in(params.v_min_mps, params.v_max_mps);
        self.depart_time = now;
        self.phase = Phase::Moving;
        self.arrival_time()
    }

    /// Park at the destination until `until` (the caller resumes with
    /// [`WaypointState::start_leg`] when the pause ends).
    pub fn begin_pause(&mut self, until: f64) {
        self.origin = self.destination;
        self.phase = Phase::Paused { until };
    }

    fn leg_length(&self) -> f64 {
        let dx = self.destination.0 - self.origin.0;
        let dy = self.destination.1 - self.origin.1;
        (dx * dx + dy * dy).sqrt()
    }

    /// When the current leg reaches its destination.
    pub fn arrival_time(&self) -> f64 {
        self.depart_time + self.leg_length() / self.speed_mps
    }

    /// Position at time `t`, linearly interpolated along the current leg and
    /// clamped to its endpoints. While paused the position is constant.
    pub fn position_at(&self, t: f64) -> (f64, f64) {
        if let Phase::Paused { .. } = self.phase {
            return self.origin;
        }
        let len = self.leg_length();
        if len <= f64::EPSILON {
            return self.destination;
        }
        let travelled = (t - self.depart_time) * self.speed_mps;
        let frac = (travelled / len).clamp(0.0, 1.0);
        (
            self.origin.0 + frac * (self.destination.0 - self.origin.0),
            self.origin.1 + frac * (self.destination.1 - self.origin.1),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: (f64, f64), b: (f64, f64)) -> bool {
        (a.0 - b.0).abs() < 1e-9 && (a.1 - b.1).abs() < 1e-9
    }

    #[test]
    fn interpolates_halfway_along_a_leg() {
        let st = WaypointState {
            origin: (0.0, 0.0),
            destination: (300.0, 400.0),
            speed_mps: 2.0,
            depart_time: 100.0,
            phase: Phase::Moving,
        };
        // 500 m leg at 2 m/s: halfway after 125 s.
        assert!(close(st.position_at(225.0), (150.0, 200.0)));
        assert_eq!(st.arrival_time(), 350.0);
        assert!(close(st.position_at(350.0), (300.0, 400.0)));
        // Past arrival the position clamps to the destination.
        assert!(close(st.position_at(1000.0), (300.0, 400.0)));
        // Before departure it clamps to the origin.
        assert!(close(st.position_at(0.0), (0.0, 0.0)));
    }

    #[test]
    fn paused_nodes_do_not_move() {
        let mut st = WaypointState {
            origin: (10.0, 20.0),
            destination: (50.0, 20.0),
            speed_mps: 1.0,
            depart_time: 0.0,
            phase: Phase::Moving,
        };
        st.begin_pause(100.0);
        assert!(close(st.position_at(40.0), (50.0, 20.0)));
        assert!(close(st.position_at(99.0), (50.0, 20.0)));
    }

    #[test]
    fn init_is_reproducible_per_stream() {
        let area = Area { width_m: 1500.0, height_m: 500.0 };
        let params = MotionParams { v_min_mps: 0.1, v_max_mps: 2.0, pause_s: 10.0 };
        let mut r1 = crate::engine::RngStream::derive(9, "mobility/3");
        let mut r2 = crate::engine::RngStream::derive(9, "mobility/3");
        let a = WaypointState::init(&area, &params, &mut r1, 0.0);
        let b = WaypointState::init(&area, &params, &mut r2, 0.0);
        assert_eq!(a, b);
    }

    proptest! {
        /// Positions stay inside the closed area rectangle at all times.
        #[test]
        fn positions_stay_in_bounds(seed in 0u64..5000, samples in proptest::collection::vec(0.0_f64..4000.0, 1..20)) {
            let area = Area { width_m: 1500.0, height_m: 500.0 };
            let params = MotionParams { v_min_mps: 0.1, v_max_mps: 20.0, pause_s: 0.0 };
            let mut rng = crate::engine::RngStream::derive(seed, "mobility/prop");
            let mut st = WaypointState::init(&area, &params, &mut rng, 0.0);
            let mut legs = 0;
            for &t in &samples {
                // Advance legs lazily until the leg covers t.
                while matches!(st.phase, Phase::Moving) && st.arrival_time() < t && legs < 500 {
                    let at = st.arrival_time();
                    st.start_leg(&area, &params, &mut rng, at);
                    legs += 1;
                }
                let (x, y) = st.position_at(t);
                prop_assert!((0.0..=1500.0).contains(&x), "x = {x}");
                prop_assert!((0.0..=500.0).contains(&y), "y = {y}");
            }
        }

        /// Movement is continuous: displacement over a window never exceeds
        /// what the leg's speed allows.
        #[test]
        fn movement_is_speed_bounded(seed in 0u64..5000, t0 in 0.0_f64..500.0, dt in 0.0_f64..50.0) {
            let area = Area { width_m: 1500.0, height_m: 500.0 };
            let params = MotionParams { v_min_mps: 0.1, v_max_mps: 20.0, pause_s: 0.0 };
            let mut rng = crate::engine::RngStream::derive(seed, "mobility/cont");
            let st = WaypointState::init(&area, &params, &mut rng, 0.0);
            let (x0, y0) = st.position_at(t0);
            let (x1, y1) = st.position_at(t0 + dt);
            let dist = ((x1 - x0).powi(2) + (y1 - y0).powi(2)).sqrt();
            prop_assert!(dist <= st.speed_mps * dt + 1e-9, "moved {dist} in {dt}s at {} m/s", st.speed_mps);
        }
    }
}
