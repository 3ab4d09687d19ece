//! Line-oriented replay files.
//!
//! ```text
//! EVAC-REPLAY 1 <scenario-id> <scenario-digest>
//! t=0 brake=0 turn=- radio=-
//! t=1 brake=1 turn=L radio=1
//! outcome=win digest=<hex>
//! ```

use std::fmt::Write as _;

use thiserror::Error;

use crate::rules::{state_digest, step, InputFrame, NavigatorInput, Outcome};
use crate::scenario::{init_state, ScenarioError, ScenarioSpec, Tick};
use crate::vehicle::DriverInput;
use crate::world::{RoadGraph, Turn};

use super::RunResult;

const MAGIC: &str = "EVAC-REPLAY";
const VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayFile {
    pub scenario_id: String,
    pub scenario_digest: String,
    /// Input for tick `i` at index `i`.
    pub inputs: Vec<InputFrame>,
    pub outcome: Outcome,
    pub final_digest: String,
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("replay line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("replay was recorded against scenario {expected}, not {found}")]
    ScenarioMismatch { expected: String, found: String },
    #[error("replay diverged from the recording at tick {tick}")]
    DigestDivergence { tick: Tick },
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

impl ReplayFile {
    #[must_use]
    pub fn from_run(spec: &ScenarioSpec, run: &RunResult) -> Self {
        Self {
            scenario_id: spec.id.to_string(),
            scenario_digest: spec.content_digest(),
            inputs: run.inputs.clone(),
            outcome: run.outcome,
            final_digest: run.final_digest.clone(),
        }
    }

    #[must_use]
    pub fn to_text(&self) -> String {
        let mut out = format!("{MAGIC} {VERSION} {} {}\n", self.scenario_id, self.scenario_digest);
        for (tick, input) in self.inputs.iter().enumerate() {
            let turn = input.driver.turn_request.map_or('-', Turn::letter);
            let radio = match input.navigator.radio_toggle {
                None => '-',
                Some(false) => '0',
                Some(true) => '1',
            };
            let _ = writeln!(out, "t={tick} brake={} turn={turn} radio={radio}", u8::from(input.driver.brake_held));
        }
        let _ = writeln!(out, "outcome={} digest={}", self.outcome, self.final_digest);
        out
    }

    pub fn parse(text: &str) -> Result<Self, ReplayError> {
        let err = |line: usize, message: String| ReplayError::Parse { line, message };
        let lines: Vec<&str> = text.lines().collect();
        let Some((header, rest)) = lines.split_first() else {
            return Err(err(1, "empty file".into()));
        };
        let fields: Vec<&str> = header.split(' ').collect();
        let [magic, version, id, digest] = fields.as_slice() else {
            return Err(err(1, "header must be `EVAC-REPLAY 1 <id> <digest>`".into()));
        };
        if *magic != MAGIC || *version != VERSION {
            return Err(err(1, format!("unsupported header `{header}`")));
        }
        let Some((footer, records)) = rest.split_last() else {
            return Err(err(2, "missing footer".into()));
        };

        let mut inputs = Vec::with_capacity(records.len());
        for (i, line) in records.iter().enumerate() {
            let lineno = i + 2;
            let parts: Vec<&str> = line.split(' ').collect();
            let [t, brake, turn, radio] = parts.as_slice() else {
                return Err(err(lineno, format!("malformed record `{line}`")));
            };
            let field = |s: &'_ str, key: &str| -> Result<String, ReplayError> {
                s.strip_prefix(key)
                    .and_then(|v| v.strip_prefix('='))
                    .map(str::to_owned)
                    .ok_or_else(|| err(lineno, format!("expected `{key}=`")))
            };
            let tick: usize = field(t, "t")?.parse().map_err(|_| err(lineno, "bad tick".into()))?;
            if tick != i {
                return Err(err(lineno, format!("expected t={i}, found t={tick}")));
            }
            let brake_held = match field(brake, "brake")?.as_str() {
                "0" => false,
                "1" => true,
                other => return Err(err(lineno, format!("bad brake `{other}`"))),
            };
            let turn_request = match field(turn, "turn")?.as_str() {
                "-" => None,
                s => {
                    let mut chars = s.chars();
                    match (chars.next().and_then(Turn::from_letter), chars.next()) {
                        (Some(t), None) => Some(t),
                        _ => return Err(err(lineno, format!("bad turn `{s}`"))),
                    }
                }
            };
            let radio_toggle = match field(radio, "radio")?.as_str() {
                "-" => None,
                "0" => Some(false),
                "1" => Some(true),
                other => return Err(err(lineno, format!("bad radio `{other}`"))),
            };
            inputs.push(InputFrame {
                driver: DriverInput { brake_held, turn_request },
                navigator: NavigatorInput { radio_toggle },
            });
        }

        let footer_line = lines.len();
        let parts: Vec<&str> = footer.split(' ').collect();
        let [outcome, digest_field] = parts.as_slice() else {
            return Err(err(footer_line, "footer must be `outcome=<o> digest=<hex>`".into()));
        };
        let outcome = outcome
            .strip_prefix("outcome=")
            .ok_or_else(|| err(footer_line, "expected `outcome=`".into()))?
            .parse::<Outcome>()
            .map_err(|e| err(footer_line, e))?;
        let final_digest = digest_field
            .strip_prefix("digest=")
            .ok_or_else(|| err(footer_line, "expected `digest=`".into()))?
            .to_owned();
        Ok(Self {
            scenario_id: (*id).to_owned(),
            scenario_digest: (*digest).to_owned(),
            inputs,
            outcome,
            final_digest,
        })
    }
}

/// Re-runs a recording and checks it lands on the recorded final state.
///
/// Only the final digest is stored, so a divergence is reported at the tick
/// where the replayed game ended early, or else at the last recorded tick.
pub fn replay(file: &ReplayFile, spec: &ScenarioSpec) -> Result<RunResult, ReplayError> {
    let found = spec.content_digest();
    if file.scenario_digest != found || file.scenario_id != spec.id.as_str() {
        return Err(ReplayError::ScenarioMismatch {
            expected: format!("{} {}", file.scenario_id, file.scenario_digest),
            found: format!("{} {found}", spec.id),
        });
    }
    let mut state = init_state(spec)?;
    let graph = RoadGraph::build(spec).expect("validated scenario builds a graph");
    let mut digests = Vec::with_capacity(file.inputs.len());
    for input in &file.inputs {
        if state.outcome.is_terminal() {
            return Err(ReplayError::DigestDivergence { tick: state.tick });
        }
        state = step(&state, input, &graph, spec);
        digests.push(state_digest(&state));
    }
    let final_digest = state_digest(&state);
    if final_digest != file.final_digest || state.outcome != file.outcome {
        return Err(ReplayError::DigestDivergence { tick: state.tick.saturating_sub(1) });
    }
    Ok(RunResult {
        outcome: state.outcome,
        final_tick: state.tick,
        timed_out: !state.outcome.is_terminal(),
        inputs: file.inputs.clone(),
        digests,
        final_digest,
    })
}
