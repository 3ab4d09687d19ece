//! Brute force over every input the two players could give, through the real
//! engine. Exponential in principle; states reached by different input
//! strings are merged per tick, which is exact because `step` is pure.

use std::collections::hash_map::Entry;
use std::collections::HashMap;

use crate::rules::{step, GameState, InputFrame, NavigatorInput, Outcome};
use crate::scenario::{init_state, ScenarioError, ScenarioSpec, Tick};
use crate::vehicle::DriverInput;
use crate::world::{RoadGraph, Turn};

fn alphabet(radio: bool) -> Vec<InputFrame> {
    let radio_inputs: &[Option<bool>] = if radio { &[Some(false), Some(true)] } else { &[None] };
    let mut frames = Vec::new();
    for &brake_held in &[false, true] {
        for turn_request in [None, Some(Turn::Left), Some(Turn::Straight), Some(Turn::Right)] {
            for &radio_toggle in radio_inputs {
                frames.push(InputFrame {
                    driver: DriverInput { brake_held, turn_request },
                    navigator: NavigatorInput { radio_toggle },
                });
            }
        }
    }
    frames
}

/// A winning trace of at most `horizon` ticks, found by trying every input at
/// every tick.
pub fn exhaustive_win(spec: &ScenarioSpec, horizon: Tick) -> Result<Option<Vec<InputFrame>>, ScenarioError> {
    let graph = RoadGraph::build(spec).map_err(|_| {
        ScenarioError::InvalidScenario(crate::scenario::check_errors(spec))
    })?;
    let root = init_state(spec).or_else(|err| match err {
        // a burning start edge is still a game that can be played out
        ScenarioError::InvalidScenario(ref f) if f.iter().all(|x| x.code == "START_EDGE_BURNING") => {
            Ok(crate::scenario::initial_state_unchecked(spec, &graph))
        }
        other => Err(other),
    })?;
    let frames = alphabet(spec.radio_available);
    let mut layer: Vec<(GameState, Vec<InputFrame>)> = vec![(root, Vec::new())];
    for _ in 0..horizon {
        let mut next: HashMap<GameState, Vec<InputFrame>> = HashMap::new();
        let mut order = Vec::new();
        for (state, trace) in &layer {
            for input in &frames {
                let succ = step(state, input, &graph, spec);
                match succ.outcome {
                    Outcome::Win => {
                        let mut t = trace.clone();
                        t.push(*input);
                        return Ok(Some(t));
                    }
                    Outcome::Lose(_) => continue,
                    Outcome::InProgress => {}
                }
                if let Entry::Vacant(slot) = next.entry(succ) {
                    let mut t = trace.clone();
                    t.push(*input);
                    order.push(slot.key().clone());
                    slot.insert(t);
                }
            }
        }
        if order.is_empty() {
            return Ok(None);
        }
        layer = order
            .into_iter()
            .map(|s| {
                let t = next.remove(&s).expect("inserted above");
                (s, t)
            })
            .collect();
    }
    Ok(None)
}
