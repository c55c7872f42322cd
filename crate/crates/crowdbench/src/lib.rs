//! Deterministic 2D crowd-robot navigation simulator and benchmark.
//!
//! A holonomic robot crosses a square arena filled with individual
//! pedestrians and cohesive human groups (static huddles or leader-driven
//! walking formations). Two classical reactive policies are included —
//! reciprocal collision avoidance and the social-force model — plus a
//! tangent-action wrapper that adds group awareness to any base policy by
//! steering around the inflated boundary disk of a detected group.
//!
//! The benchmark harness runs seeded episode suites, logs per-step traces,
//! and reports success/collision/group-collision/timeout rates alongside
//! navigation time and path length.

pub mod bench;
pub mod geom;
pub mod policy;
pub mod sim;
pub mod taga;

pub use geom::{Disk, Vec2};
pub use sim::{
    AgentState, EpisodeOutcome, GroupKind, GroupState, OutcomeKind, Role, ScenarioConfig,
    WorldObservation, WorldState,
};
