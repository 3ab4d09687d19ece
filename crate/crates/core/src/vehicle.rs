//! Vehicle kinematics. The car rolls forward every tick unless the brake is
//! down or a penalty stop is running, and only changes road at intersections.

use serde::{Deserialize, Serialize};

use crate::scenario::{EdgeId, NodeId, Tick, TuningConstants};
use crate::world::{Heading, RoadGraph, Turn, WorldError};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct VehicleState {
    pub edge: EdgeId,
    /// Endpoint the car entered `edge` from.
    pub from_node: NodeId,
    /// Cells travelled along `edge`, in `0..=length`.
    pub offset: u32,
    pub heading: Heading,
    /// Cells moved this tick: 0 or the cruise speed.
    pub speed: u32,
    pub brake_held: bool,
    pub queued_turn: Option<Turn>,
    /// Exclusive end of a penalty stop.
    pub forced_stop_until: Option<Tick>,
}

impl VehicleState {
    #[must_use]
    pub fn to_node<'g>(&self, graph: &'g RoadGraph) -> &'g NodeId {
        graph
            .edge(&self.edge)
            .expect("vehicle edge exists in its graph")
            .other(&self.from_node)
    }

    #[must_use]
    pub fn is_forced_stop(&self, tick: Tick) -> bool {
        self.forced_stop_until.is_some_and(|until| tick < until)
    }

    /// The node the car is standing on, if it is at either end of its edge.
    #[must_use]
    pub fn at_node<'a>(&'a self, graph: &'a RoadGraph) -> Option<&'a NodeId> {
        let length = graph.edge(&self.edge)?.length;
        if self.offset == length {
            Some(self.to_node(graph))
        } else if self.offset == 0 {
            Some(&self.from_node)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DriverInput {
    pub brake_held: bool,
    pub turn_request: Option<Turn>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VehicleEventKind {
    EnteredEdge,
    ReachedDeadEnd,
    ReachedExit,
    StoppedAtIntersection,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct VehicleEvent {
    pub kind: VehicleEventKind,
    pub node: NodeId,
    pub edge: EdgeId,
    pub tick: Tick,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Resolution {
    Proceed { edge: EdgeId, heading: Heading },
    WaitAtIntersection,
    DeadEnd,
    Exit,
}

/// Decides what happens when the car reaches `node` travelling `heading`.
///
/// The exit always wins; a degree-1 node is a dead end; otherwise the queued
/// turn is taken if that road exists, and with no queued turn the car goes
/// straight when it can. Everything else waits for directions.
pub fn resolve_turn(
    node: &NodeId,
    heading: Heading,
    queued: Option<Turn>,
    graph: &RoadGraph,
) -> Result<Resolution, WorldError> {
    let degree = graph.degree(node)?;
    if node == graph.exit() {
        return Ok(Resolution::Exit);
    }
    if degree == 1 {
        return Ok(Resolution::DeadEnd);
    }
    let options = graph.relative_options(node, heading)?;
    let choice = options.get(&queued.unwrap_or(Turn::Straight));
    Ok(match choice {
        Some((edge, heading)) => Resolution::Proceed { edge: edge.clone(), heading: *heading },
        None => Resolution::WaitAtIntersection,
    })
}

/// One tick of motion.
#[must_use]
pub fn advance_vehicle(
    v: &VehicleState,
    input: &DriverInput,
    graph: &RoadGraph,
    tick: Tick,
    tuning: &TuningConstants,
) -> (VehicleState, Option<VehicleEvent>) {
    let mut next = v.clone();
    next.brake_held = input.brake_held;
    if let Some(turn) = input.turn_request {
        next.queued_turn = Some(turn);
    }
    if next.brake_held || next.is_forced_stop(tick) {
        next.speed = 0;
        return (next, None);
    }

    let length = graph.edge(&next.edge).expect("vehicle edge exists").length;
    if next.offset < length {
        next.offset = (next.offset + tuning.cruise_speed).min(length);
        next.speed = tuning.cruise_speed;
        if next.offset < length {
            return (next, None);
        }
    }

    let node = next.to_node(graph).clone();
    let resolution = resolve_turn(&node, next.heading, next.queued_turn, graph)
        .expect("vehicle node exists");
    let kind = match resolution {
        Resolution::Proceed { edge, heading } => {
            next.edge = edge;
            next.from_node = node.clone();
            next.offset = 0;
            next.heading = heading;
            next.queued_turn = None;
            next.speed = tuning.cruise_speed;
            VehicleEventKind::EnteredEdge
        }
        Resolution::WaitAtIntersection => {
            next.speed = 0;
            VehicleEventKind::StoppedAtIntersection
        }
        Resolution::DeadEnd => VehicleEventKind::ReachedDeadEnd,
        Resolution::Exit => VehicleEventKind::ReachedExit,
    };
    let event = VehicleEvent { kind, node, edge: next.edge.clone(), tick };
    (next, Some(event))
}
