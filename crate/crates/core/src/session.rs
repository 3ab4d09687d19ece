//! The message boundary a front end drives the engine through.
//!
//! The UI sends [`CommandRecord`]s and receives [`RenderSnapshot`]s. Commands
//! that arrive between two ticks are folded into exactly one [`InputFrame`]:
//! the brake is level-triggered, the latest turn request wins, and radio
//! toggles net out. Wall time is carried for logging only and never reaches
//! the engine.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harness::{NavigatorView, ReplayFile};
use crate::hazard::TrafficKind;
use crate::infochannel::{CueKind, InfoMessage, MapView, ShelterBanner};
use crate::rules::{Game, InputFrame, LoseReason, NavigatorInput, Outcome};
use crate::scenario::{ScenarioError, ScenarioSpec, Tick};
use crate::vehicle::DriverInput;
use crate::world::Turn;

pub const SNAPSHOT_VERSION: u32 = 1;

pub const NO_RADIO_NOTICE: &str = "no radio in this region";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", content = "payload")]
pub enum UiCommand {
    BrakeDown,
    BrakeUp,
    TurnRequest { turn: Turn },
    RadioToggle,
    StartGame { scenario: String },
    Restart,
}

/// One command as it crosses the boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommandRecord {
    #[serde(flatten)]
    pub command: UiCommand,
    /// Seconds on the host clock. Not used by the engine.
    #[serde(default)]
    pub wall_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Ack {
    Accepted,
    /// Game over, or no game running.
    Ignored,
}

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DriverScene {
    pub speed: u32,
    pub brake_held: bool,
    /// Cells to the end of the current road.
    pub distance_to_intersection: u32,
    pub queued_turn: Option<Turn>,
    pub brake_lights_ahead: bool,
    pub emergency_behind: bool,
    pub forced_stop: bool,
    pub cues: Vec<CueKind>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RadioState {
    pub available: bool,
    pub on: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NavigatorScene {
    pub map: MapView,
    pub log: Vec<InfoMessage>,
    pub radio: RadioState,
    pub shelter_banner: Option<ShelterBanner>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutcomeScreen {
    pub outcome: Outcome,
    pub title: String,
    pub message: String,
    pub ticks: Tick,
    /// Traffic events where the driver braked in time.
    pub alerts_heeded: usize,
    pub can_restart: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Scene {
    pub scenario: String,
    pub driver: DriverScene,
    pub navigator: NavigatorScene,
    pub notice: Option<String>,
    pub outcome: Option<OutcomeScreen>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RenderSnapshot {
    pub version: u32,
    pub tick: Tick,
    pub scene: Scene,
}

impl RenderSnapshot {
    #[must_use]
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("snapshot serializes")
    }
}

fn outcome_text(outcome: Outcome, ticks: Tick) -> (String, String) {
    let (title, message) = match outcome {
        Outcome::InProgress => return (String::new(), String::new()),
        Outcome::Win => ("You made it out", format!("You reached the exit together in {ticks} ticks.")),
        Outcome::Lose(LoseReason::DeadEnd) => ("Dead end", "That road dead-ended. Try another route.".to_owned()),
        Outcome::Lose(LoseReason::ShelterIgnored) => (
            "Time to shelter",
            "A shelter warning went out and the time ran out before you stopped at a shelter. \
             When a warning comes in, pick the nearest shelter on the map and stop there."
                .to_owned(),
        ),
        Outcome::Lose(LoseReason::FireContact) => (
            "The fire reached your road",
            "Smoke and closure alerts point away from the fire. Try a road that keeps its distance.".to_owned(),
        ),
    };
    (title.to_owned(), message)
}

#[derive(Debug, Default, Clone, Copy)]
struct Pending {
    turn: Option<Turn>,
    radio: Option<bool>,
}

/// A live two-player game.
#[derive(Debug)]
pub struct Session {
    catalog: BTreeMap<String, ScenarioSpec>,
    game: Option<Game>,
    brake: bool,
    pending: Pending,
    inputs: Vec<InputFrame>,
    notice: Option<String>,
}

impl Session {
    /// A session that can start any scenario in `catalog`, keyed by id.
    #[must_use]
    pub fn new(catalog: impl IntoIterator<Item = ScenarioSpec>) -> Self {
        Self {
            catalog: catalog.into_iter().map(|s| (s.id.to_string(), s)).collect(),
            game: None,
            brake: false,
            pending: Pending::default(),
            inputs: Vec::new(),
            notice: None,
        }
    }

    /// Starts `scenario` right away.
    pub fn bind(scenario: ScenarioSpec) -> Result<Self, SessionError> {
        let id = scenario.id.to_string();
        let mut session = Self::new([scenario]);
        session.start(&id)?;
        Ok(session)
    }

    pub fn start(&mut self, scenario: &str) -> Result<(), SessionError> {
        let spec = self
            .catalog
            .get(scenario)
            .ok_or_else(|| SessionError::UnknownScenario(scenario.to_owned()))?;
        self.game = Some(Game::new(spec.clone())?);
        self.reset_inputs();
        Ok(())
    }

    fn reset_inputs(&mut self) {
        self.brake = false;
        self.pending = Pending::default();
        self.inputs.clear();
        self.notice = None;
    }

    #[must_use]
    pub fn game(&self) -> Option<&Game> {
        self.game.as_ref()
    }

    pub fn dispatch(&mut self, record: &CommandRecord) -> Result<Ack, SessionError> {
        if let UiCommand::StartGame { scenario } = &record.command {
            self.start(scenario)?;
            return Ok(Ack::Accepted);
        }
        let Some(game) = &mut self.game else { return Ok(Ack::Ignored) };
        if record.command == UiCommand::Restart {
            game.restart();
            self.reset_inputs();
            return Ok(Ack::Accepted);
        }
        if game.state().outcome.is_terminal() {
            return Ok(Ack::Ignored);
        }
        match &record.command {
            UiCommand::BrakeDown => self.brake = true,
            UiCommand::BrakeUp => self.brake = false,
            UiCommand::TurnRequest { turn } => self.pending.turn = Some(*turn),
            UiCommand::RadioToggle => {
                if game.spec().radio_available {
                    let want = !self.pending.radio.unwrap_or(game.state().radio_on);
                    self.pending.radio = (want != game.state().radio_on).then_some(want);
                } else {
                    self.notice = Some(NO_RADIO_NOTICE.to_owned());
                }
            }
            UiCommand::StartGame { .. } | UiCommand::Restart => unreachable!("handled above"),
        }
        Ok(Ack::Accepted)
    }

    /// The frame the next tick would consume.
    #[must_use]
    pub fn pending_frame(&self) -> InputFrame {
        InputFrame {
            driver: DriverInput { brake_held: self.brake, turn_request: self.pending.turn },
            navigator: NavigatorInput { radio_toggle: self.pending.radio },
        }
    }

    /// Runs one engine tick on the coalesced input and returns the new
    /// snapshot. A finished game is not stepped.
    pub fn tick(&mut self) -> Option<RenderSnapshot> {
        let frame = self.pending_frame();
        let game = self.game.as_mut()?;
        if !game.state().outcome.is_terminal() {
            game.step(&frame);
            self.inputs.push(frame);
            self.pending = Pending::default();
        }
        self.snapshot()
    }

    #[must_use]
    pub fn snapshot(&self) -> Option<RenderSnapshot> {
        let game = self.game.as_ref()?;
        let state = game.state();
        let graph = game.graph();
        let spec = game.spec();
        let view = NavigatorView::build(state, graph, spec);
        let vehicle = &state.vehicle;
        let length = graph.edge(&vehicle.edge).map_or(0, |e| e.length);
        let driver = DriverScene {
            speed: vehicle.speed,
            brake_held: vehicle.brake_held,
            distance_to_intersection: length.saturating_sub(vehicle.offset),
            queued_turn: vehicle.queued_turn,
            brake_lights_ahead: view.traffic.contains(&TrafficKind::BrakeLightsAhead),
            emergency_behind: view.traffic.contains(&TrafficKind::EmergencyBehind),
            forced_stop: vehicle.is_forced_stop(state.tick),
            cues: view.cues,
        };
        let navigator = NavigatorScene {
            shelter_banner: view.map.warning,
            map: view.map,
            log: view.log,
            radio: RadioState { available: spec.radio_available, on: state.radio_on },
        };
        let outcome = state.outcome.is_terminal().then(|| {
            let (title, message) = outcome_text(state.outcome, state.tick);
            OutcomeScreen {
                outcome: state.outcome,
                title,
                message,
                ticks: state.tick,
                alerts_heeded: state.compliance.values().filter(|r| r.brake_engaged && !r.violated).count(),
                can_restart: true,
            }
        });
        Some(RenderSnapshot {
            version: SNAPSHOT_VERSION,
            tick: state.tick,
            scene: Scene { scenario: spec.id.to_string(), driver, navigator, notice: self.notice.clone(), outcome },
        })
    }

    /// Everything played since the last start or restart, in replay format.
    #[must_use]
    pub fn export_replay(&self) -> Option<ReplayFile> {
        let game = self.game.as_ref()?;
        Some(ReplayFile {
            scenario_id: game.spec().id.to_string(),
            scenario_digest: game.spec().content_digest(),
            inputs: self.inputs.clone(),
            outcome: game.state().outcome,
            final_digest: game.digest(),
        })
    }
}
