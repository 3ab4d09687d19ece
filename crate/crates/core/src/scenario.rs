//! Scenario documents: the JSON format, canonical serialization, semantic
//! validation, and construction of the initial game state.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::hazard::{FireState, TrafficEvent};
use crate::infochannel::{Channel, CueEvent, InfoMessage, Knowledge, Payload};
use crate::rules::{GameState, Outcome, SplitMix64};
use crate::vehicle::VehicleState;
use crate::world::{Heading, RoadGraph, WorldError};

pub type Tick = u64;

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            /// Wraps `s` without validation; parsed documents are checked on load.
            pub fn new(s: impl Into<String>) -> Self {
                Self(s.into())
            }

            #[must_use]
            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                if s.is_empty() || !s.is_ascii() {
                    return Err(serde::de::Error::custom(
                        "identifiers must be non-empty ASCII strings",
                    ));
                }
                Ok(Self(s))
            }
        }
    };
}

string_id!(
    /// Road intersection or endpoint.
    NodeId
);
string_id!(
    /// Road segment between two nodes.
    EdgeId
);
string_id!(Ident);

fn positive_u32<'de, D: Deserializer<'de>>(d: D) -> Result<u32, D::Error> {
    let v = u32::deserialize(d)?;
    if v == 0 {
        return Err(serde::de::Error::custom("expected a positive integer, found 0"));
    }
    Ok(v)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Node {
    pub id: NodeId,
    pub pos: [i64; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub id: EdgeId,
    pub a: NodeId,
    pub b: NodeId,
    /// Ticks to traverse at cruise speed 1.
    #[serde(deserialize_with = "positive_u32")]
    pub length: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StartPose {
    pub node: NodeId,
    pub heading: Heading,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ignition {
    pub tick: Tick,
    pub edge: EdgeId,
}

const fn default_cruise() -> u32 {
    1
}
const fn default_grace() -> u32 {
    3
}
const fn default_penalty() -> u32 {
    10
}
const fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuningConstants {
    #[serde(default = "default_cruise", deserialize_with = "positive_u32")]
    pub cruise_speed: u32,
    #[serde(default = "default_grace", deserialize_with = "positive_u32")]
    pub brake_grace: u32,
    #[serde(default = "default_penalty", deserialize_with = "positive_u32")]
    pub noncompliance_penalty: u32,
    #[serde(default = "yes")]
    pub shelter_all_clear: bool,
    #[serde(default)]
    pub radio_initially_on: bool,
}

impl Default for TuningConstants {
    fn default() -> Self {
        Self {
            cruise_speed: default_cruise(),
            brake_grace: default_grace(),
            noncompliance_penalty: default_penalty(),
            shelter_all_clear: true,
            radio_initially_on: false,
        }
    }
}

/// Everything that defines one playthrough.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub id: Ident,
    #[serde(deserialize_with = "positive_u32")]
    pub grid_unit: u32,
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub start: StartPose,
    pub exit: NodeId,
    pub shelters: Vec<NodeId>,
    pub fire_timeline: Vec<Ignition>,
    pub traffic_events: Vec<TrafficEvent>,
    pub messages: Vec<InfoMessage>,
    pub cues: Vec<CueEvent>,
    pub radio_available: bool,
    pub tuning: TuningConstants,
    pub seed: u64,
}

impl ScenarioSpec {
    /// Puts every list into canonical order.
    pub fn canonicalize(&mut self) {
        self.nodes.sort_by(|x, y| x.id.cmp(&y.id));
        self.edges.sort_by(|x, y| x.id.cmp(&y.id));
        self.shelters.sort();
        self.fire_timeline.sort();
        self.traffic_events
            .sort_by(|x, y| (x.start, &x.id).cmp(&(y.start, &y.id)));
        self.messages.sort_by(|x, y| x.delivery_key().cmp(&y.delivery_key()).then_with(|| x.id.cmp(&y.id)));
        self.cues.sort_by(|x, y| (x.start, &x.id).cmp(&(y.start, &y.id)));
    }

    #[must_use]
    pub fn canonical(mut self) -> Self {
        self.canonicalize();
        self
    }

    /// Search horizon used by the solvability oracle and as the default run cap.
    #[must_use]
    pub fn tick_bound(&self) -> Tick {
        let total: u64 = self.edges.iter().map(|e| u64::from(e.length)).sum();
        (total * 4).max(1)
    }

    /// SHA-256 of the canonical serialization, hex encoded.
    #[must_use]
    pub fn content_digest(&self) -> String {
        hex::encode(Sha256::digest(serialize_scenario(self).as_bytes()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
}

/// Parses a scenario document and sorts its lists into canonical order.
///
/// Only the document shape is checked here; see [`validate_scenario`].
pub fn parse_scenario(text: &str) -> Result<ScenarioSpec, ParseError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|err| ParseError::Syntax {
        line: err.line(),
        column: err.column(),
        message: err.to_string(),
    })?;
    let spec: ScenarioSpec = serde_path_to_error::deserialize(value).map_err(|err| {
        let path = err.path().to_string();
        ParseError::Schema { path, message: err.into_inner().to_string() }
    })?;
    Ok(spec.canonical())
}

/// Canonical text form: sorted keys, canonical list order, two-space indent,
/// trailing newline.
#[must_use]
pub fn serialize_scenario(spec: &ScenarioSpec) -> String {
    let canonical = spec.clone().canonical();
    // serde_json's map type is ordered by key, so this sorts object keys
    let value = serde_json::to_value(&canonical).expect("scenario types always serialize");
    let mut out = serde_json::to_string_pretty(&value).expect("values always serialize");
    out.push('\n');
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub code: &'static str,
    pub message: String,
    pub location: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub errors: Vec<Finding>,
    pub warnings: Vec<Finding>,
}

impl ValidationReport {
    #[must_use]
    pub fn is_accepted(&self) -> bool {
        self.errors.is_empty()
    }

    #[must_use]
    pub fn has_error(&self, code: &str) -> bool {
        self.errors.iter().any(|f| f.code == code)
    }

    #[must_use]
    pub fn has_warning(&self, code: &str) -> bool {
        self.warnings.iter().any(|f| f.code == code)
    }
}

fn finding(code: &'static str, message: impl Into<String>, location: impl Into<String>) -> Finding {
    Finding { code, message: message.into(), location: location.into() }
}

/// Error-level checks only. Cheap; never runs the solvability search.
#[must_use]
pub fn check_errors(spec: &ScenarioSpec) -> Vec<Finding> {
    let mut errors = Vec::new();
    let mut node_ids = BTreeSet::new();
    let mut positions = BTreeMap::new();
    for (i, node) in spec.nodes.iter().enumerate() {
        let loc = format!("nodes[{i}]");
        if !node_ids.insert(&node.id) {
            errors.push(finding("DUPLICATE_NODE_ID", format!("node id `{}` is used twice", node.id), &loc));
        }
        if let Some(other) = positions.insert(node.pos, &node.id) {
            errors.push(finding(
                "DUPLICATE_NODE_POS",
                format!("nodes `{other}` and `{}` share position {:?}", node.id, node.pos),
                &loc,
            ));
        }
    }

    let mut edge_ids = BTreeSet::new();
    let mut pairs = BTreeSet::new();
    for (i, edge) in spec.edges.iter().enumerate() {
        let loc = format!("edges[{i}]");
        if !edge_ids.insert(&edge.id) {
            errors.push(finding("DUPLICATE_EDGE_ID", format!("edge id `{}` is used twice", edge.id), &loc));
        }
        for end in [&edge.a, &edge.b] {
            if !node_ids.contains(end) {
                errors.push(finding(
                    "EDGE_UNKNOWN_NODE",
                    format!("edge `{}` references unknown node `{end}`", edge.id),
                    &loc,
                ));
            }
        }
        if edge.a == edge.b {
            errors.push(finding("SELF_LOOP", format!("edge `{}` is a self-loop", edge.id), &loc));
        }
        if edge.length == 0 {
            errors.push(finding("EDGE_LENGTH", format!("edge `{}` has zero length", edge.id), &loc));
        }
        let pair = if edge.a <= edge.b { (&edge.a, &edge.b) } else { (&edge.b, &edge.a) };
        if !pairs.insert(pair) {
            errors.push(finding(
                "PARALLEL_EDGE",
                format!("more than one edge joins `{}` and `{}`", pair.0, pair.1),
                &loc,
            ));
        }
    }

    let has_node = |id: &NodeId| node_ids.contains(id);
    let has_edge = |id: &EdgeId| edge_ids.contains(id);

    if !has_node(&spec.start.node) {
        errors.push(finding("START_MISSING", format!("start node `{}` does not exist", spec.start.node), "start.node"));
    }
    if !has_node(&spec.exit) {
        errors.push(finding("EXIT_MISSING", format!("exit node `{}` does not exist", spec.exit), "exit"));
    } else if spec.exit == spec.start.node {
        errors.push(finding("EXIT_IS_START", "exit and start are the same node", "exit"));
    }
    for (i, s) in spec.shelters.iter().enumerate() {
        if !has_node(s) {
            errors.push(finding("SHELTER_MISSING", format!("shelter `{s}` does not exist"), format!("shelters[{i}]")));
        }
    }
    for (i, ign) in spec.fire_timeline.iter().enumerate() {
        if !has_edge(&ign.edge) {
            errors.push(finding(
                "FIRE_UNKNOWN_EDGE",
                format!("ignition references unknown edge `{}`", ign.edge),
                format!("fire_timeline[{i}]"),
            ));
        }
    }

    let t = &spec.tuning;
    for (name, v) in [
        ("cruise_speed", t.cruise_speed),
        ("brake_grace", t.brake_grace),
        ("noncompliance_penalty", t.noncompliance_penalty),
    ] {
        if v == 0 {
            errors.push(finding("TUNING_NONPOSITIVE", format!("{name} must be positive"), format!("tuning.{name}")));
        }
    }

    let mut event_ids = BTreeSet::new();
    for (i, ev) in spec.traffic_events.iter().enumerate() {
        let loc = format!("traffic_events[{i}]");
        if !event_ids.insert(&ev.id) {
            errors.push(finding("DUPLICATE_EVENT_ID", format!("traffic event id `{}` is used twice", ev.id), &loc));
        }
        if !has_edge(&ev.edge) {
            errors.push(finding("TRAFFIC_UNKNOWN_EDGE", format!("traffic event `{}` references unknown edge `{}`", ev.id, ev.edge), &loc));
        }
        if ev.start >= ev.end {
            errors.push(finding("TRAFFIC_BAD_WINDOW", format!("traffic event `{}` window is empty", ev.id), &loc));
        } else if u64::from(t.brake_grace) >= ev.end - ev.start {
            errors.push(finding(
                "TRAFFIC_GRACE_TOO_LONG",
                format!("brake_grace {} is not shorter than event `{}` ({} ticks)", t.brake_grace, ev.id, ev.end - ev.start),
                &loc,
            ));
        }
    }

    let mut message_keys = BTreeSet::new();
    for (i, msg) in spec.messages.iter().enumerate() {
        let loc = format!("messages[{i}]");
        if !message_keys.insert((msg.channel, msg.deliver_tick, msg.sequence)) {
            errors.push(finding(
                "DUPLICATE_MESSAGE_KEY",
                format!("message `{}` repeats (channel, tick, sequence)", msg.id),
                &loc,
            ));
        }
        match &msg.payload {
            Payload::RoadClosure { edge } | Payload::RoadReopened { edge } if !has_edge(edge) => {
                errors.push(finding("MESSAGE_UNKNOWN_EDGE", format!("message `{}` references unknown edge `{edge}`", msg.id), &loc));
            }
            Payload::ShelterWarning { deadline } if *deadline <= msg.deliver_tick => {
                errors.push(finding(
                    "SHELTER_DEADLINE",
                    format!("message `{}` has a deadline at or before its delivery", msg.id),
                    &loc,
                ));
            }
            _ => {}
        }
    }

    for (i, cue) in spec.cues.iter().enumerate() {
        let loc = format!("cues[{i}]");
        if cue.start >= cue.end {
            errors.push(finding("CUE_BAD_WINDOW", format!("cue `{}` window is empty", cue.id), &loc));
        }
        if !has_edge(&cue.edge) {
            errors.push(finding("CUE_UNKNOWN_EDGE", format!("cue `{}` references unknown edge `{}`", cue.id, cue.edge), &loc));
        }
        if let crate::infochannel::CueKind::SignalsOut { node } = &cue.kind {
            if !has_node(node) {
                errors.push(finding("CUE_UNKNOWN_NODE", format!("cue `{}` references unknown node `{node}`", cue.id), &loc));
            }
        }
    }

    if !errors.is_empty() {
        return errors;
    }

    // topology-dependent checks need a graph
    let graph = match RoadGraph::build(spec) {
        Ok(g) => g,
        Err(WorldError::NotAxisAligned { edge }) => {
            errors.push(finding("EDGE_NOT_AXIS_ALIGNED", format!("edge `{edge}` is not axis-aligned"), "edges"));
            return errors;
        }
        Err(WorldError::DirectionConflict { node, heading }) => {
            errors.push(finding(
                "DIRECTION_CONFLICT",
                format!("node `{node}` has two roads leaving {heading}"),
                "edges",
            ));
            return errors;
        }
        Err(err) => {
            errors.push(finding("GRAPH", err.to_string(), "edges"));
            return errors;
        }
    };

    match graph.edge_toward(&spec.start.node, spec.start.heading) {
        Ok(Some(adj)) => {
            if spec.fire_timeline.iter().any(|ign| ign.tick == 0 && ign.edge == adj.edge) {
                errors.push(finding(
                    "START_EDGE_BURNING",
                    format!("start edge `{}` is on fire at tick 0", adj.edge),
                    "fire_timeline",
                ));
            }
        }
        _ => errors.push(finding(
            "START_NO_EDGE",
            format!("no road leaves `{}` heading {}", spec.start.node, spec.start.heading),
            "start.heading",
        )),
    }

    let dist = graph
        .distances_to(&spec.exit, &BTreeSet::new())
        .expect("exit checked above");
    if !dist.contains_key(&spec.start.node) {
        errors.push(finding("EXIT_UNREACHABLE", "no road route connects start and exit", "exit"));
    }
    errors
}

/// Full semantic check. Errors reject the scenario; warnings flag authoring problems.
#[must_use]
pub fn validate_scenario(spec: &ScenarioSpec) -> ValidationReport {
    let errors = check_errors(spec);
    let mut warnings = Vec::new();
    let structural = errors.iter().all(|f| {
        matches!(f.code, "EXIT_UNREACHABLE" | "START_EDGE_BURNING")
    });
    if structural {
        if let Ok(graph) = RoadGraph::build(spec) {
            collect_warnings(spec, &graph, &mut warnings);
            match crate::harness::solvable(spec) {
                Ok(true) => {}
                Ok(false) => warnings.push(finding(
                    "UNSOLVABLE",
                    "no input sequence reaches the exit under the fire timeline",
                    "fire_timeline",
                )),
                Err(err) => warnings.push(finding("SOLVABILITY_UNKNOWN", err.to_string(), "fire_timeline")),
            }
        }
    }
    ValidationReport { errors, warnings }
}

fn collect_warnings(spec: &ScenarioSpec, graph: &RoadGraph, warnings: &mut Vec<Finding>) {
    let cruise = u64::from(spec.tuning.cruise_speed.max(1));
    // nearest-shelter travel time from the start node, ignoring fire
    let mut shelter_eta: Option<u64> = None;
    for shelter in graph.shelters() {
        if let Ok(dist) = graph.distances_to(shelter, &BTreeSet::new()) {
            if let Some(&d) = dist.get(&spec.start.node) {
                let eta = d.div_ceil(cruise);
                shelter_eta = Some(shelter_eta.map_or(eta, |best| best.min(eta)));
            }
        }
    }

    for (i, msg) in spec.messages.iter().enumerate() {
        let loc = format!("messages[{i}]");
        if let Payload::ShelterWarning { deadline } = msg.payload {
            if shelter_eta.is_none_or(|eta| eta > deadline) {
                warnings.push(finding(
                    "SHELTER_UNREACHABLE",
                    format!("no shelter can be reached by tick {deadline} for message `{}`", msg.id),
                    &loc,
                ));
            }
            if spec.tuning.shelter_all_clear
                && !spec.messages.iter().any(|m| {
                    matches!(m.payload, Payload::AllClear) && m.delivery_key() > msg.delivery_key()
                })
            {
                warnings.push(finding(
                    "SHELTER_NO_ALL_CLEAR",
                    format!("shelter warning `{}` is never followed by an all-clear", msg.id),
                    &loc,
                ));
            }
        }
        if msg.channel == Channel::Radio && !spec.radio_available && msg.payload.is_critical() {
            warnings.push(finding(
                "RADIO_ONLY_CRITICAL",
                format!("message `{}` is radio-only in a scenario without radio", msg.id),
                &loc,
            ));
        }
        if let Some(later) = spec.messages.iter().find(|other| {
            other.deliver_tick == msg.deliver_tick
                && other.delivery_key() > msg.delivery_key()
                && msg.payload.supersedable_by(&other.payload)
        }) {
            warnings.push(finding(
                "MESSAGE_SUPERSEDED",
                format!("message `{}` is overridden by `{}` in the same tick", msg.id, later.id),
                &loc,
            ));
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("scenario failed validation with {} error(s)", .0.len())]
    InvalidScenario(Vec<Finding>),
}

/// Builds the tick-0 state: the car already rolling onto its start edge.
pub fn init_state(spec: &ScenarioSpec) -> Result<GameState, ScenarioError> {
    let errors = check_errors(spec);
    if !errors.is_empty() {
        return Err(ScenarioError::InvalidScenario(errors));
    }
    let graph = RoadGraph::build(spec).expect("validated scenario builds a graph");
    Ok(initial_state_unchecked(spec, &graph))
}

pub(crate) fn initial_state_unchecked(spec: &ScenarioSpec, graph: &RoadGraph) -> GameState {
    let adj = graph
        .edge_toward(&spec.start.node, spec.start.heading)
        .ok()
        .flatten()
        .expect("validated scenario has a start edge");
    let mut timeline = spec.fire_timeline.clone();
    timeline.sort();
    GameState {
        tick: 0,
        vehicle: VehicleState {
            edge: adj.edge.clone(),
            from_node: spec.start.node.clone(),
            offset: 0,
            heading: spec.start.heading,
            speed: spec.tuning.cruise_speed,
            brake_held: false,
            queued_turn: None,
            forced_stop_until: None,
        },
        fire: crate::hazard::advance_fire(&FireState::default(), &timeline, 0),
        knowledge: Knowledge::default(),
        radio_on: spec.radio_available && spec.tuning.radio_initially_on,
        compliance: BTreeMap::new(),
        active_cues: BTreeSet::new(),
        last_event: None,
        outcome: Outcome::InProgress,
        seed_stream: SplitMix64::new(spec.seed),
    }
}
