//! Deterministic event-driven simulator for mobile ad-hoc networks with
//! source routing and pluggable route-quality policies.
//!
//! The crate is organized in layers: [`engine`] (event queue and seeded RNG
//! streams), [`mobility`] (random-waypoint motion), [`netmodel`] (radio,
//! battery, queues), [`routing`] (packets, caches, route selection),
//! [`qos`] (route cost formulas and admission rules), [`traffic`] (payload
//! generation), [`sim`] (the world tying it all together), [`trace`] and
//! [`metrics`] (evidence and evaluation), [`scenario`] (configuration), and
//! [`batch`] (parameter sweeps and CSV reporting).

pub mod batch;
pub mod engine;
pub mod metrics;
pub mod mobility;
pub mod netmodel;
pub mod qos;
pub mod routing;
pub mod scenario;
pub mod sim;
pub mod trace;
pub mod traffic;

pub use batch::{run_batch, BatchError, BatchResult, BatchRow, SweepKey, SweepSpec};
pub use engine::{RngStream, Scheduler, SimTime};
pub use metrics::{MetricsContext, MetricsError, MetricsReport};
pub use qos::{Policy, PolicyKind, QosConfig, QosError};
pub use routing::{NodeId, Packet, PacketId, RouteCache, RouteCandidate};
pub use scenario::{NodeClass, Scenario, ScenarioError};
pub use sim::{run_replication, run_scenario, EventKind, MobilityPoint, NodeEnergy, RunOutput};
pub use trace::{DropReason, PacketType, TraceEvent, TraceKind, TraceLog};
pub use traffic::CbrFlow;
