//! Multi-robot symmetric rendezvous search on a line.
//!
//! * [`schedule`]: the expansion radii `f(i) = r^i` and phase geometry.
//! * [`strategy`]: one robot's state machine (single, temporary boundary,
//!   internal) and its coin source.
//! * [`engine`]: exact event-driven simulation of all robots.
//! * [`bounds`]: closed-form expected-distance bounds and the ratio optimizer.
//! * [`oracle`]: exhaustive enumeration of coin scripts for small instances.
//! * [`harness`]: Monte Carlo parameter sweeps and plot-ready summaries.

pub mod bounds;
pub mod engine;
pub mod error;
pub mod harness;
pub mod oracle;
pub mod schedule;
pub mod strategy;
mod util;

pub use bounds::{BoundsInput, BoundsReport, OptimizeReport, Population};
pub use engine::{run, MeetingEvent, Trace, World, WorldConfig};
pub use error::{Error, Result};
pub use harness::{CellStats, Placement, SweepSpec, SweepTable};
pub use oracle::{EnumerationSpec, ExactReport};
pub use schedule::{ExpansionSchedule, Phase, PhaseGeometry};
pub use strategy::{CoinScript, CoinSource, Direction, Mode, RobotId, StrategyState};
