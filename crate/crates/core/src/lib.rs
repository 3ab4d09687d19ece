//! Simulation core for a cooperative two-player wildfire evacuation game.
//!
//! One player drives (brake and turn at intersections), the other triages
//! alerts and radio to navigate. The engine is a pure, deterministic tick
//! function over [`rules::GameState`]; the [`harness`] module runs it
//! headlessly with bots, records and replays traces, and decides whether a
//! scenario can be won at all.

pub mod cli;
pub mod harness;
pub mod hazard;
pub mod infochannel;
pub mod rules;
pub mod scenario;
pub mod session;
pub mod vehicle;
pub mod world;

#[cfg(test)]
pub(crate) mod testing;

pub use rules::{step, Game, GameState, InputFrame, LoseReason, NavigatorInput, Outcome};
pub use scenario::{parse_scenario, serialize_scenario, validate_scenario, ScenarioSpec};
pub use world::{Heading, RoadGraph, Turn};
