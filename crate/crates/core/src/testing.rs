//! Scenario builders shared by unit tests.

use crate::scenario::{Edge, EdgeId, Ident, Node, NodeId, ScenarioSpec, StartPose, TuningConstants};
use crate::world::Heading;

pub const MINIMAL_JSON: &str = r#"{
  "id": "minimal",
  "grid_unit": 1,
  "nodes": [
    {"id": "N1", "pos": [3, 0]},
    {"id": "N0", "pos": [0, 0]}
  ],
  "edges": [
    {"id": "E0", "a": "N0", "b": "N1", "length": 3}
  ],
  "start": {"node": "N0", "heading": "E"},
  "exit": "N1",
  "shelters": [],
  "fire_timeline": [],
  "traffic_events": [],
  "messages": [],
  "cues": [],
  "radio_available": false,
  "tuning": {},
  "seed": 0
}"#;

fn empty(id: &str, start: &str, heading: Heading, exit: &str) -> ScenarioSpec {
    ScenarioSpec {
        id: Ident::new(id),
        grid_unit: 1,
        nodes: Vec::new(),
        edges: Vec::new(),
        start: StartPose { node: NodeId::new(start), heading },
        exit: NodeId::new(exit),
        shelters: Vec::new(),
        fire_timeline: Vec::new(),
        traffic_events: Vec::new(),
        messages: Vec::new(),
        cues: Vec::new(),
        radio_available: false,
        tuning: TuningConstants::default(),
        seed: 0,
    }
}

fn node(id: &str, x: i64, y: i64) -> Node {
    Node { id: NodeId::new(id), pos: [x, y] }
}

fn edge(id: &str, a: &str, b: &str, length: u32) -> Edge {
    Edge { id: EdgeId::new(id), a: NodeId::new(a), b: NodeId::new(b), length }
}

pub fn minimal() -> ScenarioSpec {
    let mut spec = empty("minimal", "N0", Heading::E, "N1");
    spec.nodes = vec![node("N0", 0, 0), node("N1", 3, 0)];
    spec.edges = vec![edge("E0", "N0", "N1", 3)];
    spec
}

/// `w`×`h` lattice. Nodes `N{x}_{y}`, horizontal edges `H{x}_{y}` joining
/// (x,y)-(x+1,y), vertical edges `V{x}_{y}` joining (x,y)-(x,y+1). Start at the
/// south-west corner heading east, exit at the north-east corner.
pub fn lattice(w: i64, h: i64, length: u32) -> ScenarioSpec {
    let exit = format!("N{}_{}", w - 1, h - 1);
    let mut spec = empty(&format!("lattice{w}x{h}"), "N0_0", Heading::E, &exit);
    for y in 0..h {
        for x in 0..w {
            spec.nodes.push(node(&format!("N{x}_{y}"), x * i64::from(length), y * i64::from(length)));
            if x + 1 < w {
                spec.edges.push(edge(&format!("H{x}_{y}"), &format!("N{x}_{y}"), &format!("N{}_{y}", x + 1), length));
            }
            if y + 1 < h {
                spec.edges.push(edge(&format!("V{x}_{y}"), &format!("N{x}_{y}"), &format!("N{x}_{}", y + 1), length));
            }
        }
    }
    spec.canonical()
}

/// S —— J —— D (dead end), with the exit X north of J.
pub fn tee_junction() -> ScenarioSpec {
    let mut spec = empty("tee", "S", Heading::E, "X");
    spec.nodes = vec![node("S", 0, 0), node("J", 2, 0), node("D", 4, 0), node("X", 2, 2)];
    spec.edges = vec![edge("S-J", "S", "J", 2), edge("J-D", "J", "D", 2), edge("J-X", "J", "X", 2)];
    spec.canonical()
}
