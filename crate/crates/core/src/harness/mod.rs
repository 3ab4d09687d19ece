//! Headless execution: bots, record/replay, the solvability oracle and corpus stats.

mod enumerate;
mod oracle;
pub mod policy;
pub mod replay;
pub mod stats;

use thiserror::Error;

use crate::rules::{state_digest, step, GameState, InputFrame, Outcome};
use crate::scenario::{init_state, ScenarioError, ScenarioSpec, Tick};
use crate::world::RoadGraph;

pub use enumerate::exhaustive_win;
pub use oracle::{solvable, solve, solve_within, OracleError};
pub use policy::{
    InformedPolicy, NaivePolicy, NavigatorView, Observation, ObservationKind, OmniscientPolicy, Policy,
    TracePolicy,
};
pub use replay::{replay, ReplayError, ReplayFile};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("max_ticks must be positive")]
    ZeroTicks,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunResult {
    pub outcome: Outcome,
    pub final_tick: Tick,
    /// Still in progress when the tick cap was hit.
    pub timed_out: bool,
    pub inputs: Vec<InputFrame>,
    /// Digest of the state after each step.
    pub digests: Vec<String>,
    pub final_digest: String,
}

/// Steps a fresh game under `policy` until it ends or `max_ticks` steps have run.
pub fn run_policy(spec: &ScenarioSpec, policy: &mut dyn Policy, max_ticks: Tick) -> Result<RunResult, HarnessError> {
    if max_ticks == 0 {
        return Err(HarnessError::ZeroTicks);
    }
    let state = init_state(spec)?;
    let graph = RoadGraph::build(spec).expect("validated scenario builds a graph");
    Ok(drive(spec, &graph, state, max_ticks, |state| match policy.observation() {
        ObservationKind::Omniscient => policy.decide(Observation::Omniscient(state), &graph),
        ObservationKind::NavigatorView => {
            let view = NavigatorView::build(state, &graph, spec);
            policy.decide(Observation::Navigator(&view), &graph)
        }
    }))
}

pub(crate) fn drive(
    spec: &ScenarioSpec,
    graph: &RoadGraph,
    mut state: GameState,
    max_ticks: Tick,
    mut decide: impl FnMut(&GameState) -> InputFrame,
) -> RunResult {
    let mut inputs = Vec::new();
    let mut digests = Vec::new();
    while !state.outcome.is_terminal() && state.tick < max_ticks {
        let input = decide(&state);
        state = step(&state, &input, graph, spec);
        inputs.push(input);
        digests.push(state_digest(&state));
    }
    let final_digest = state_digest(&state);
    RunResult {
        outcome: state.outcome,
        final_tick: state.tick,
        timed_out: !state.outcome.is_terminal(),
        inputs,
        digests,
        final_digest,
    }
}

/// Policy by CLI name.
#[must_use]
pub fn policy_by_name(name: &str, spec: &ScenarioSpec) -> Option<Box<dyn Policy>> {
    match name {
        "omniscient" => Some(Box::new(OmniscientPolicy::new(spec))),
        "naive" => Some(Box::new(NaivePolicy)),
        "informed" => Some(Box::new(InformedPolicy::new())),
        _ => None,
    }
}
