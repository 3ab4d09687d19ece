//! Bot players.
//!
//! A policy sees either the whole state (omniscient) or what the two humans
//! would see: the navigator's GPS view and alert log, plus what the driver can
//! see through the windscreen.

use std::collections::BTreeSet;

use crate::hazard::TrafficKind;
use crate::infochannel::{gps_snapshot, CueKind, InfoMessage, MapView};
use crate::rules::{GameState, InputFrame, NavigatorInput};
use crate::scenario::{EdgeId, NodeId, ScenarioSpec, Tick};
use crate::vehicle::DriverInput;
use crate::world::{RoadGraph, Turn};

use super::oracle;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservationKind {
    Omniscient,
    NavigatorView,
}

/// Everything the two players can perceive at one tick.
#[derive(Debug, Clone)]
pub struct NavigatorView {
    pub tick: Tick,
    pub map: MapView,
    pub log: Vec<InfoMessage>,
    pub shelter_deadline: Option<Tick>,
    pub radio_on: bool,
    pub radio_available: bool,
    /// Brake lights ahead / emergency vehicle behind, visible right now.
    pub traffic: Vec<TrafficKind>,
    pub cues: Vec<CueKind>,
    pub speed: u32,
}

impl NavigatorView {
    #[must_use]
    pub fn build(state: &GameState, graph: &RoadGraph, spec: &ScenarioSpec) -> Self {
        let tick = state.tick;
        let edge = &state.vehicle.edge;
        Self {
            tick,
            map: gps_snapshot(state, graph),
            log: state.knowledge.message_log.clone(),
            shelter_deadline: state.knowledge.active_shelter_warning,
            radio_on: state.radio_on,
            radio_available: spec.radio_available,
            traffic: spec
                .traffic_events
                .iter()
                .filter(|ev| ev.is_active(edge, tick))
                .map(|ev| ev.kind)
                .collect(),
            cues: spec
                .cues
                .iter()
                .filter(|c| c.is_visible(edge, tick))
                .map(|c| c.kind.clone())
                .collect(),
            speed: state.vehicle.speed,
        }
    }
}

pub enum Observation<'a> {
    Omniscient(&'a GameState),
    Navigator(&'a NavigatorView),
}

pub trait Policy {
    fn name(&self) -> &str;

    fn observation(&self) -> ObservationKind;

    /// Must be deterministic in its inputs and the policy's own history.
    fn decide(&mut self, obs: Observation<'_>, graph: &RoadGraph) -> InputFrame;
}

/// Follows the oracle's winning trace. Falls back to [`InformedPolicy`]
/// behaviour when no trace exists.
pub struct OmniscientPolicy {
    plan: Option<Vec<InputFrame>>,
    fallback: InformedPolicy,
    spec: ScenarioSpec,
}

impl OmniscientPolicy {
    #[must_use]
    pub fn new(spec: &ScenarioSpec) -> Self {
        Self { plan: oracle::solve(spec).ok().flatten(), fallback: InformedPolicy::new(), spec: spec.clone() }
    }

    #[must_use]
    pub fn has_plan(&self) -> bool {
        self.plan.is_some()
    }
}

impl Policy for OmniscientPolicy {
    fn name(&self) -> &str {
        "omniscient"
    }

    fn observation(&self) -> ObservationKind {
        ObservationKind::Omniscient
    }

    fn decide(&mut self, obs: Observation<'_>, graph: &RoadGraph) -> InputFrame {
        let Observation::Omniscient(state) = obs else {
            return InputFrame::default();
        };
        if let Some(frame) = self.plan.as_ref().and_then(|p| p.get(state.tick as usize)) {
            return *frame;
        }
        let view = NavigatorView::build(state, graph, &self.spec);
        self.fallback.decide(Observation::Navigator(&view), graph)
    }
}

/// A crew that ignores the phone: the driver keeps going straight, brakes for
/// what they can see, and picks the left-most road when the way ahead ends.
#[derive(Debug, Default)]
pub struct NaivePolicy;

impl Policy for NaivePolicy {
    fn name(&self) -> &str {
        "naive"
    }

    fn observation(&self) -> ObservationKind {
        ObservationKind::NavigatorView
    }

    fn decide(&mut self, obs: Observation<'_>, graph: &RoadGraph) -> InputFrame {
        let Observation::Navigator(view) = obs else {
            return InputFrame::default();
        };
        let car = &view.map.vehicle;
        let turn_request = graph.edge(&car.edge).and_then(|info| {
            let ahead = info.other(&car.from_node);
            let options = graph.relative_options(ahead, car.heading).ok()?;
            if options.is_empty() || options.contains_key(&Turn::Straight) {
                None
            } else {
                [Turn::Left, Turn::Right].into_iter().find(|t| options.contains_key(t))
            }
        });
        InputFrame {
            driver: DriverInput { brake_held: !view.traffic.is_empty(), turn_request },
            navigator: NavigatorInput::default(),
        }
    }
}

/// Heeds every alert: keeps the radio on, routes around announced closures,
/// and parks at the nearest shelter while a shelter warning stands.
#[derive(Debug, Default)]
pub struct InformedPolicy;

impl InformedPolicy {
    #[must_use]
    pub fn new() -> Self {
        Self
    }

    fn target(view: &NavigatorView, graph: &RoadGraph, from: &NodeId, closed: &BTreeSet<EdgeId>) -> NodeId {
        if view.shelter_deadline.is_some() {
            let nearest = view
                .map
                .shelters
                .iter()
                .filter_map(|s| {
                    let path = graph.shortest_path(from, s, closed).ok().flatten()?;
                    Some((graph.path_length(&path).ok()?, s.clone()))
                })
                .min();
            if let Some((_, shelter)) = nearest {
                return shelter;
            }
        }
        view.map.exit.clone()
    }
}

impl Policy for InformedPolicy {
    fn name(&self) -> &str {
        "informed"
    }

    fn observation(&self) -> ObservationKind {
        ObservationKind::NavigatorView
    }

    fn decide(&mut self, obs: Observation<'_>, graph: &RoadGraph) -> InputFrame {
        let Observation::Navigator(view) = obs else {
            return InputFrame::default();
        };
        let navigator = NavigatorInput { radio_toggle: (view.radio_available && !view.radio_on).then_some(true) };
        let car = &view.map.vehicle;
        let Some(info) = graph.edge(&car.edge) else {
            return InputFrame { navigator, ..InputFrame::default() };
        };
        let ahead = info.other(&car.from_node).clone();

        let standing_on = if car.offset == info.length {
            Some(&ahead)
        } else if car.offset == 0 {
            Some(&car.from_node)
        } else {
            None
        };
        let sheltering =
            view.shelter_deadline.is_some() && standing_on.is_some_and(|n| view.map.shelters.contains(n));

        // no U-turns: plan from the node ahead without the road we are on
        let mut closed = view.map.known_closed.clone();
        closed.insert(car.edge.clone());
        let target = Self::target(view, graph, &ahead, &closed);
        let turn_request = graph
            .shortest_path(&ahead, &target, &closed)
            .ok()
            .flatten()
            .and_then(|path| path.first().cloned())
            .and_then(|next| {
                let options = graph.relative_options(&ahead, car.heading).ok()?;
                options.into_iter().find(|(_, (edge, _))| *edge == next).map(|(turn, _)| turn)
            });

        InputFrame {
            driver: DriverInput { brake_held: !view.traffic.is_empty() || sheltering, turn_request },
            navigator,
        }
    }
}

/// Plays back a fixed trace, then idles.
#[derive(Debug, Clone)]
pub struct TracePolicy {
    frames: Vec<InputFrame>,
}

impl TracePolicy {
    #[must_use]
    pub fn new(frames: Vec<InputFrame>) -> Self {
        Self { frames }
    }
}

impl Policy for TracePolicy {
    fn name(&self) -> &str {
        "replay"
    }

    fn observation(&self) -> ObservationKind {
        ObservationKind::Omniscient
    }

    fn decide(&mut self, obs: Observation<'_>, _graph: &RoadGraph) -> InputFrame {
        match obs {
            Observation::Omniscient(state) => self.frames.get(state.tick as usize).copied().unwrap_or_default(),
            Observation::Navigator(view) => self.frames.get(view.tick as usize).copied().unwrap_or_default(),
        }
    }
}
