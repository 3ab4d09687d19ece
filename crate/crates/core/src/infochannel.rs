//! The navigator's side of the game: scripted alerts and radio, the knowledge
//! they build up, and the GPS view derived from that knowledge.
//!
//! Nothing here reads the fire. The map only ever shows what was announced.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::rules::GameState;
use crate::scenario::{EdgeId, Ident, NodeId, Tick};
use crate::world::{Heading, RoadGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Text,
    Radio,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Payload {
    RoadClosure { edge: EdgeId },
    RoadReopened { edge: EdgeId },
    ShelterWarning { deadline: Tick },
    AllClear,
    RouteInfo { text: String },
}

impl Payload {
    /// Anything that changes what the crew must do, as opposed to flavour text.
    #[must_use]
    pub fn is_critical(&self) -> bool {
        !matches!(self, Self::RouteInfo { .. })
    }

    /// Whether a later `other` overrides the effect of `self`.
    #[must_use]
    pub fn supersedable_by(&self, other: &Payload) -> bool {
        match (self.road_edge(), other.road_edge()) {
            (Some(a), Some(b)) => a == b,
            _ => self.is_shelter_state() && other.is_shelter_state(),
        }
    }

    fn road_edge(&self) -> Option<&EdgeId> {
        match self {
            Self::RoadClosure { edge } | Self::RoadReopened { edge } => Some(edge),
            _ => None,
        }
    }

    fn is_shelter_state(&self) -> bool {
        matches!(self, Self::ShelterWarning { .. } | Self::AllClear)
    }
}

/// One scripted alert or radio item.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InfoMessage {
    pub id: Ident,
    pub channel: Channel,
    pub deliver_tick: Tick,
    pub sequence: u32,
    pub payload: Payload,
}

/// Total delivery order. Text wins ties with radio at the same (tick, sequence).
pub type DeliveryKey = (Tick, u32, Channel);

impl InfoMessage {
    #[must_use]
    pub fn delivery_key(&self) -> DeliveryKey {
        (self.deliver_tick, self.sequence, self.channel)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CueKind {
    SmokeVisible { direction: Heading },
    SignalsOut { node: NodeId },
}

/// Something the driver can physically see out of the window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CueEvent {
    pub id: Ident,
    pub start: Tick,
    pub end: Tick,
    pub kind: CueKind,
    /// Visible only from this edge.
    pub edge: EdgeId,
}

impl CueEvent {
    #[must_use]
    pub fn is_visible(&self, vehicle_edge: &EdgeId, tick: Tick) -> bool {
        (self.start..self.end).contains(&tick) && *vehicle_edge == self.edge
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct RoadStatus {
    pub closed: bool,
    pub stamp: DeliveryKey,
}

/// What the navigator has been told, with later messages overriding earlier ones.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize)]
pub struct Knowledge {
    pub known_closed: BTreeSet<EdgeId>,
    pub road_status: BTreeMap<EdgeId, RoadStatus>,
    pub active_shelter_warning: Option<Tick>,
    shelter_stamp: Option<DeliveryKey>,
    pub message_log: Vec<InfoMessage>,
}

/// Messages delivered at `tick`. Radio items only arrive while the radio is on;
/// a broadcast nobody hears is gone for good.
#[must_use]
pub fn due_messages(script: &[InfoMessage], tick: Tick, radio_on: bool) -> Vec<InfoMessage> {
    let mut due: Vec<InfoMessage> = script
        .iter()
        .filter(|m| m.deliver_tick == tick)
        .filter(|m| m.channel == Channel::Text || radio_on)
        .cloned()
        .collect();
    due.sort_by_key(InfoMessage::delivery_key);
    due
}

/// Folds delivered messages into the navigator's knowledge.
#[must_use]
pub fn fold_knowledge(knowledge: &Knowledge, delivered: &[InfoMessage]) -> Knowledge {
    let mut next = knowledge.clone();
    for msg in delivered {
        let stamp = msg.delivery_key();
        match &msg.payload {
            Payload::RoadClosure { edge } | Payload::RoadReopened { edge } => {
                let closed = matches!(msg.payload, Payload::RoadClosure { .. });
                let newer = next.road_status.get(edge).is_none_or(|s| stamp >= s.stamp);
                if newer {
                    next.road_status.insert(edge.clone(), RoadStatus { closed, stamp });
                    if closed {
                        next.known_closed.insert(edge.clone());
                    } else {
                        next.known_closed.remove(edge);
                    }
                }
            }
            Payload::ShelterWarning { .. } | Payload::AllClear => {
                if next.shelter_stamp.is_none_or(|s| stamp >= s) {
                    next.shelter_stamp = Some(stamp);
                    next.active_shelter_warning = match msg.payload {
                        Payload::ShelterWarning { deadline } => Some(deadline),
                        _ => None,
                    };
                }
            }
            Payload::RouteInfo { .. } => {}
        }
        next.message_log.push(msg.clone());
    }
    next
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MapNode {
    pub id: NodeId,
    pub pos: [i64; 2],
    pub shelter: bool,
    pub exit: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MapEdge {
    pub id: EdgeId,
    pub a: NodeId,
    pub b: NodeId,
    pub length: u32,
    pub closed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VehicleMarker {
    pub edge: EdgeId,
    pub from_node: NodeId,
    pub offset: u32,
    pub heading: Heading,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ShelterBanner {
    pub deadline: Tick,
    pub ticks_left: Tick,
}

/// The navigator's GPS screen.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MapView {
    pub nodes: Vec<MapNode>,
    pub edges: Vec<MapEdge>,
    pub exit: NodeId,
    pub vehicle: VehicleMarker,
    pub known_closed: BTreeSet<EdgeId>,
    pub shelters: Vec<NodeId>,
    pub warning: Option<ShelterBanner>,
}

/// Builds the map from topology, knowledge and the car's pose. Ground-truth
/// fire is never consulted.
#[must_use]
pub fn gps_snapshot(state: &GameState, graph: &RoadGraph) -> MapView {
    let known = &state.knowledge;
    MapView {
        nodes: graph
            .nodes()
            .map(|(id, pos)| MapNode {
                id: id.clone(),
                pos,
                shelter: graph.is_shelter(id),
                exit: id == graph.exit(),
            })
            .collect(),
        edges: graph
            .edges()
            .map(|(id, info)| MapEdge {
                id: id.clone(),
                a: info.a.clone(),
                b: info.b.clone(),
                length: info.length,
                closed: known.known_closed.contains(id),
            })
            .collect(),
        exit: graph.exit().clone(),
        vehicle: VehicleMarker {
            edge: state.vehicle.edge.clone(),
            from_node: state.vehicle.from_node.clone(),
            offset: state.vehicle.offset,
            heading: state.vehicle.heading,
        },
        known_closed: known.known_closed.clone(),
        shelters: graph.shelters().iter().cloned().collect(),
        warning: known.active_shelter_warning.map(|deadline| ShelterBanner {
            deadline,
            ticks_left: deadline.saturating_sub(state.tick),
        }),
    }
}
