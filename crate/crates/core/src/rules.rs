//! The tick step and the win/lose rules.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::hazard::{advance_fire, check_compliance, ComplianceRecord, FireState};
use crate::infochannel::{due_messages, fold_knowledge, Knowledge, Payload};
use crate::scenario::{init_state, Ident, ScenarioError, ScenarioSpec, Tick};
use crate::vehicle::{advance_vehicle, DriverInput, VehicleEvent, VehicleEventKind, VehicleState};
use crate::world::RoadGraph;

/// splitmix64. Carried in the state for cosmetic use only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    #[must_use]
    pub const fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    #[must_use]
    pub const fn raw(&self) -> u64 {
        self.state
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoseReason {
    DeadEnd,
    ShelterIgnored,
    FireContact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    InProgress,
    Win,
    Lose(LoseReason),
}

impl Outcome {
    #[must_use]
    pub fn is_terminal(self) -> bool {
        self != Self::InProgress
    }

    #[must_use]
    pub const fn as_str(self) -> &'static str {
        match self {
            Self::InProgress => "in_progress",
            Self::Win => "win",
            Self::Lose(LoseReason::DeadEnd) => "lose:dead_end",
            Self::Lose(LoseReason::ShelterIgnored) => "lose:shelter_ignored",
            Self::Lose(LoseReason::FireContact) => "lose:fire_contact",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Outcome {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "in_progress" => Self::InProgress,
            "win" => Self::Win,
            "lose:dead_end" => Self::Lose(LoseReason::DeadEnd),
            "lose:shelter_ignored" => Self::Lose(LoseReason::ShelterIgnored),
            "lose:fire_contact" => Self::Lose(LoseReason::FireContact),
            other => return Err(format!("unknown outcome `{other}`")),
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NavigatorInput {
    /// Sets the radio on or off. Ignored where there is no radio.
    pub radio_toggle: Option<bool>,
}

/// Everything both players did during one tick.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InputFrame {
    pub driver: DriverInput,
    pub navigator: NavigatorInput,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct GameState {
    /// Number of steps taken; the next step simulates this tick.
    pub tick: Tick,
    pub vehicle: VehicleState,
    pub fire: FireState,
    pub knowledge: Knowledge,
    pub radio_on: bool,
    pub compliance: BTreeMap<Ident, ComplianceRecord>,
    pub active_cues: BTreeSet<Ident>,
    pub last_event: Option<VehicleEvent>,
    pub outcome: Outcome,
    pub seed_stream: SplitMix64,
}

/// Advances the game by one tick. Terminal states are returned unchanged.
#[must_use]
pub fn step(state: &GameState, input: &InputFrame, graph: &RoadGraph, spec: &ScenarioSpec) -> GameState {
    if state.outcome.is_terminal() {
        return state.clone();
    }
    let tick = state.tick;
    let mut next = state.clone();

    if let Some(on) = input.navigator.radio_toggle {
        if spec.radio_available {
            next.radio_on = on;
        }
    }

    let delivered = due_messages(&spec.messages, tick, next.radio_on);
    if !delivered.is_empty() {
        next.knowledge = fold_knowledge(&next.knowledge, &delivered);
    }

    next.fire = advance_fire(&next.fire, &spec.fire_timeline, tick);

    for event in &spec.traffic_events {
        let active = event.is_active(&next.vehicle.edge, tick);
        let record = next.compliance.get(&event.id).copied().unwrap_or_default();
        let (result, record) = check_compliance(
            active.then_some(event),
            &record,
            input.driver.brake_held,
            tick,
            &spec.tuning,
        );
        if active {
            next.compliance.insert(event.id.clone(), record);
        }
        if let Some(until) = result.penalty_until {
            let current = next.vehicle.forced_stop_until.filter(|&u| u > tick);
            next.vehicle.forced_stop_until = Some(current.map_or(until, |u| u.max(until)));
        }
    }

    let (vehicle, event) = advance_vehicle(&next.vehicle, &input.driver, graph, tick, &spec.tuning);
    next.vehicle = vehicle;
    next.last_event = event;

    next.active_cues = spec
        .cues
        .iter()
        .filter(|cue| cue.is_visible(&next.vehicle.edge, tick))
        .map(|cue| cue.id.clone())
        .collect();

    next.outcome = evaluate_outcome(&next, graph);
    next.seed_stream.next_u64();
    next.tick += 1;
    next
}

/// Win/lose judgement for a state whose motion for `state.tick` has been applied.
///
/// Simultaneous conditions resolve as Win, then dead end, then ignored
/// shelter warning, then fire contact.
#[must_use]
pub fn evaluate_outcome(state: &GameState, graph: &RoadGraph) -> Outcome {
    let arrived = state
        .last_event
        .as_ref()
        .filter(|e| e.tick == state.tick)
        .map(|e| e.kind);
    if arrived == Some(VehicleEventKind::ReachedExit) {
        return Outcome::Win;
    }
    if arrived == Some(VehicleEventKind::ReachedDeadEnd) {
        return Outcome::Lose(LoseReason::DeadEnd);
    }
    if state.knowledge.active_shelter_warning == Some(state.tick) && !sheltered(&state.vehicle, graph) {
        return Outcome::Lose(LoseReason::ShelterIgnored);
    }
    if state.fire.is_burning(&state.vehicle.edge) {
        return Outcome::Lose(LoseReason::FireContact);
    }
    Outcome::InProgress
}

/// Standing still on a shelter node.
#[must_use]
pub fn sheltered(vehicle: &VehicleState, graph: &RoadGraph) -> bool {
    vehicle.speed == 0 && vehicle.at_node(graph).is_some_and(|node| graph.is_shelter(node))
}

struct Encoder {
    hasher: Sha256,
}

impl Encoder {
    fn u8(&mut self, v: u8) {
        self.hasher.update([v]);
    }

    fn u64(&mut self, v: u64) {
        self.hasher.update(v.to_le_bytes());
    }

    fn bool(&mut self, v: bool) {
        self.u8(u8::from(v));
    }

    fn str(&mut self, s: &str) {
        self.u64(s.len() as u64);
        self.hasher.update(s.as_bytes());
    }

    fn opt_u64(&mut self, v: Option<u64>) {
        match v {
            None => self.u8(0),
            Some(x) => {
                self.u8(1);
                self.u64(x);
            }
        }
    }
}

/// SHA-256 over a canonical binary encoding of every field, hex encoded.
#[must_use]
pub fn state_digest(state: &GameState) -> String {
    let mut enc = Encoder { hasher: Sha256::new() };
    enc.str("evac-state-v1");
    enc.u64(state.tick);

    let v = &state.vehicle;
    enc.str(v.edge.as_str());
    enc.str(v.from_node.as_str());
    enc.u64(u64::from(v.offset));
    enc.u8(v.heading.code());
    enc.u64(u64::from(v.speed));
    enc.bool(v.brake_held);
    enc.u8(v.queued_turn.map_or(0, |t| t as u8 + 1));
    enc.opt_u64(v.forced_stop_until);

    enc.u64(state.fire.burning.len() as u64);
    for edge in &state.fire.burning {
        enc.str(edge.as_str());
    }
    enc.u64(state.fire.cursor as u64);

    let k = &state.knowledge;
    enc.u64(k.road_status.len() as u64);
    for (edge, status) in &k.road_status {
        enc.str(edge.as_str());
        enc.bool(status.closed);
        enc.u64(status.stamp.0);
        enc.u64(u64::from(status.stamp.1));
        enc.u8(status.stamp.2 as u8);
    }
    enc.u64(k.known_closed.len() as u64);
    for edge in &k.known_closed {
        enc.str(edge.as_str());
    }
    enc.opt_u64(k.active_shelter_warning);
    enc.u64(k.message_log.len() as u64);
    for msg in &k.message_log {
        enc.str(msg.id.as_str());
        enc.u8(msg.channel as u8);
        enc.u64(msg.deliver_tick);
        enc.u64(u64::from(msg.sequence));
        match &msg.payload {
            Payload::RoadClosure { edge } => {
                enc.u8(0);
                enc.str(edge.as_str());
            }
            Payload::RoadReopened { edge } => {
                enc.u8(1);
                enc.str(edge.as_str());
            }
            Payload::ShelterWarning { deadline } => {
                enc.u8(2);
                enc.u64(*deadline);
            }
            Payload::AllClear => enc.u8(3),
            Payload::RouteInfo { text } => {
                enc.u8(4);
                enc.str(text);
            }
        }
    }

    enc.bool(state.radio_on);
    enc.u64(state.compliance.len() as u64);
    for (id, rec) in &state.compliance {
        enc.str(id.as_str());
        enc.opt_u64(rec.activated_at);
        enc.bool(rec.brake_engaged);
        enc.bool(rec.violated);
    }
    enc.u64(state.active_cues.len() as u64);
    for id in &state.active_cues {
        enc.str(id.as_str());
    }
    match &state.last_event {
        None => enc.u8(0),
        Some(ev) => {
            enc.u8(1);
            enc.u8(ev.kind as u8);
            enc.str(ev.node.as_str());
            enc.str(ev.edge.as_str());
            enc.u64(ev.tick);
        }
    }
    enc.str(state.outcome.as_str());
    enc.u64(state.seed_stream.raw());
    hex::encode(enc.hasher.finalize())
}

/// A scenario, its graph, and a live state.
#[derive(Debug, Clone)]
pub struct Game {
    spec: ScenarioSpec,
    graph: RoadGraph,
    state: GameState,
}

impl Game {
    pub fn new(spec: ScenarioSpec) -> Result<Self, ScenarioError> {
        let state = init_state(&spec)?;
        let graph = RoadGraph::build(&spec).expect("validated scenario builds a graph");
        Ok(Self { spec, graph, state })
    }

    pub fn step(&mut self, input: &InputFrame) -> &GameState {
        self.state = step(&self.state, input, &self.graph, &self.spec);
        &self.state
    }

    /// Back to tick 0. Nothing learned carries over.
    pub fn restart(&mut self) {
        self.state = init_state(&self.spec).expect("scenario validated on construction");
    }

    #[must_use]
    pub fn state(&self) -> &GameState {
        &self.state
    }

    #[must_use]
    pub fn graph(&self) -> &RoadGraph {
        &self.graph
    }

    #[must_use]
    pub fn spec(&self) -> &ScenarioSpec {
        &self.spec
    }

    #[must_use]
    pub fn digest(&self) -> String {
        state_digest(&self.state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infochannel::{Channel, InfoMessage};
    use crate::scenario::{EdgeId, Ignition, NodeId};
    use crate::testing::{lattice, minimal};
    use crate::world::Turn;

    fn idle() -> InputFrame {
        InputFrame::default()
    }

    fn brake() -> InputFrame {
        InputFrame { driver: DriverInput { brake_held: true, turn_request: None }, ..InputFrame::default() }
    }

    #[test]
    fn terminal_state_absorbs() {
        let mut game = Game::new(minimal()).unwrap();
        for _ in 0..3 {
            game.step(&idle());
        }
        assert_eq!(game.state().outcome, Outcome::Win);
        let before = game.state().clone();
        game.step(&brake());
        assert_eq!(*game.state(), before);
    }

    #[test]
    fn one_cell_from_exit_wins() {
        let mut game = Game::new(minimal()).unwrap();
        game.step(&idle());
        game.step(&idle());
        assert_eq!(game.state().vehicle.offset, 2);
        assert_eq!(game.step(&idle()).outcome, Outcome::Win);
        assert_eq!(game.state().tick, 3);
    }

    #[test]
    fn exit_at_shelter_deadline_is_a_win() {
        let mut spec = minimal();
        spec.messages.push(InfoMessage {
            id: Ident::new("w"),
            channel: Channel::Text,
            deliver_tick: 0,
            sequence: 0,
            payload: Payload::ShelterWarning { deadline: 2 },
        });
        let mut game = Game::new(spec).unwrap();
        game.step(&idle());
        game.step(&idle());
        assert_eq!(game.step(&idle()).outcome, Outcome::Win);
    }

    #[test]
    fn stopped_at_shelter_on_deadline_survives() {
        // lattice row 0: N0_0 -H0_0- N1_0 -H1_0- N2_0, shelter at N1_0
        let mut spec = lattice(3, 3, 2);
        spec.shelters.push(NodeId::new("N1_0"));
        spec.messages.push(InfoMessage {
            id: Ident::new("w"),
            channel: Channel::Text,
            deliver_tick: 0,
            sequence: 0,
            payload: Payload::ShelterWarning { deadline: 40 },
        });
        let mut game = Game::new(spec).unwrap();
        game.step(&idle());
        game.step(&idle());
        // entered H1_0 at offset 0, standing on N1_0
        assert_eq!(game.state().vehicle.offset, 0);
        while game.state().tick <= 40 {
            game.step(&brake());
        }
        assert_eq!(game.state().outcome, Outcome::InProgress);
    }

    #[test]
    fn missing_the_deadline_loses() {
        let mut spec = lattice(3, 3, 4);
        spec.shelters.push(NodeId::new("N0_2"));
        spec.messages.push(InfoMessage {
            id: Ident::new("w"),
            channel: Channel::Text,
            deliver_tick: 0,
            sequence: 0,
            payload: Payload::ShelterWarning { deadline: 5 },
        });
        let mut game = Game::new(spec).unwrap();
        for _ in 0..6 {
            game.step(&brake());
        }
        assert_eq!(game.state().outcome, Outcome::Lose(LoseReason::ShelterIgnored));
        assert_eq!(game.state().tick, 6);
    }

    #[test]
    fn driving_onto_fresh_fire_loses() {
        let mut spec = lattice(3, 3, 4);
        spec.fire_timeline.push(Ignition { tick: 2, edge: EdgeId::new("H0_0") });
        let mut game = Game::new(spec).unwrap();
        game.step(&idle());
        game.step(&idle());
        assert_eq!(game.state().outcome, Outcome::InProgress);
        assert_eq!(game.step(&idle()).outcome, Outcome::Lose(LoseReason::FireContact));
    }

    #[test]
    fn alert_at_tick_t_steers_tick_t() {
        // The closure lands on the same tick the car reaches the crossing.
        let mut spec = lattice(3, 3, 2);
        spec.messages.push(InfoMessage {
            id: Ident::new("c"),
            channel: Channel::Text,
            deliver_tick: 1,
            sequence: 0,
            payload: Payload::RoadClosure { edge: EdgeId::new("H1_0") },
        });
        let mut game = Game::new(spec).unwrap();
        game.step(&idle());
        let known = game.state().knowledge.known_closed.clone();
        assert!(known.is_empty());
        let input = InputFrame { driver: DriverInput { brake_held: false, turn_request: Some(Turn::Left) }, ..idle() };
        // a navigator reading the tick-1 closure can still turn at tick 1
        game.step(&input);
        assert!(game.state().knowledge.known_closed.contains(&EdgeId::new("H1_0")));
        assert_eq!(game.state().vehicle.edge, EdgeId::new("V1_0"));
    }

    #[test]
    fn radio_toggle_ignored_without_radio() {
        let mut game = Game::new(minimal()).unwrap();
        game.step(&InputFrame { navigator: NavigatorInput { radio_toggle: Some(true) }, ..idle() });
        assert!(!game.state().radio_on);
    }

    #[test]
    fn digest_distinguishes_ticks() {
        let game = Game::new(minimal()).unwrap();
        let a = game.state().clone();
        let mut b = a.clone();
        b.tick += 1;
        assert_eq!(state_digest(&a), state_digest(&a));
        assert_ne!(state_digest(&a), state_digest(&b));
        assert_eq!(state_digest(&a).len(), 64);
    }

    #[test]
    fn outcome_text_round_trips() {
        for o in [
            Outcome::InProgress,
            Outcome::Win,
            Outcome::Lose(LoseReason::DeadEnd),
            Outcome::Lose(LoseReason::ShelterIgnored),
            Outcome::Lose(LoseReason::FireContact),
        ] {
            assert_eq!(o.as_str().parse::<Outcome>().unwrap(), o);
        }
    }

    #[test]
    fn splitmix_reference_values() {
        // published splitmix64 outputs for seed 0
        let mut rng = SplitMix64::new(0);
        assert_eq!(rng.next_u64(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(rng.next_u64(), 0x6E78_9E6A_A1B9_65F4);
    }
}
