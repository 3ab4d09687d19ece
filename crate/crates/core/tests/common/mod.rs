//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use evac_core::scenario::check_errors;
use evac_core::vehicle::DriverInput;
use evac_core::{parse_scenario, InputFrame, NavigatorInput, ScenarioSpec, Turn};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixtures_dir().join(name)).unwrap()
}

pub fn fixture(name: &str) -> ScenarioSpec {
    parse_scenario(&fixture_text(name)).unwrap()
}

/// Every fixture as (file name, text), sorted by name.
pub fn all_fixtures() -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = std::fs::read_dir(fixtures_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap()))
        .collect();
    out.sort();
    out
}

/// Fixtures whose road network is a rectangular lattice, with its size.
pub fn lattice_fixtures() -> Vec<(&'static str, usize, usize)> {
    vec![("grid3x3.json", 3, 3), ("grid4x4_radio.json", 4, 4), ("grid6x6_fire.json", 6, 6), ("sealed.json", 3, 3)]
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn random_frame(rng: &mut StdRng, radio: bool) -> InputFrame {
    let turn_request = match rng.random_range(0..6) {
        0 => Some(Turn::Left),
        1 => Some(Turn::Straight),
        2 => Some(Turn::Right),
        _ => None,
    };
    let radio_toggle = if radio && rng.random_bool(0.1) { Some(rng.random_bool(0.5)) } else { None };
    InputFrame {
        driver: DriverInput { brake_held: rng.random_bool(0.3), turn_request },
        navigator: NavigatorInput { radio_toggle },
    }
}

pub fn random_trace(rng: &mut StdRng, len: usize, radio: bool) -> Vec<InputFrame> {
    (0..len).map(|_| random_frame(rng, radio)).collect()
}

pub fn brake(held: bool) -> InputFrame {
    InputFrame { driver: DriverInput { brake_held: held, turn_request: None }, ..InputFrame::default() }
}

pub fn turn(t: Turn) -> InputFrame {
    InputFrame { driver: DriverInput { brake_held: false, turn_request: Some(t) }, ..InputFrame::default() }
}

/// A scenario document with empty hazard lists.
pub fn scenario_json(id: &str, nodes: &[(&str, i64, i64)], edges: &[(&str, &str, &str, u32)], start: (&str, &str), exit: &str) -> Value {
    json!({
        "id": id,
        "grid_unit": 1,
        "nodes": nodes.iter().map(|(n, x, y)| json!({"id": n, "pos": [x, y]})).collect::<Vec<_>>(),
        "edges": edges.iter().map(|(e, a, b, l)| json!({"id": e, "a": a, "b": b, "length": l})).collect::<Vec<_>>(),
        "start": {"node": start.0, "heading": start.1},
        "exit": exit,
        "shelters": [],
        "fire_timeline": [],
        "traffic_events": [],
        "messages": [],
        "cues": [],
        "radio_available": false,
        "tuning": {},
        "seed": 0
    })
}

pub fn from_json(v: &Value) -> ScenarioSpec {
    parse_scenario(&v.to_string()).unwrap()
}

fn lattice_json(w: usize, h: usize, len: u32) -> (Vec<Value>, Vec<(String, String, String)>) {
    let l = i64::from(len);
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    for y in 0..h {
        for x in 0..w {
            nodes.push(json!({"id": format!("N{x}_{y}"), "pos": [x as i64 * l, y as i64 * l]}));
            if x + 1 < w {
                edges.push((format!("H{x}_{y}"), format!("N{x}_{y}"), format!("N{}_{y}", x + 1)));
            }
            if y + 1 < h {
                edges.push((format!("V{x}_{y}"), format!("N{x}_{y}"), format!("N{x}_{}", y + 1)));
            }
        }
    }
    (nodes, edges)
}

/// A small random lattice scenario with fire, traffic, messages and shelters,
/// sized so that interesting play fits in about 30 ticks. Only scenarios that
/// pass validation are returned.
pub fn random_micro_scenario(rng: &mut StdRng, id: u64) -> ScenarioSpec {
    loop {
        let w = rng.random_range(2..=3);
        let h = rng.random_range(2..=3);
        let len: u32 = rng.random_range(1..=2);
        let (nodes, mut edges) = lattice_json(w, h, len);
        // knock out a few roads to make dead ends
        for _ in 0..rng.random_range(0..=2) {
            if edges.len() > 2 {
                let i = rng.random_range(0..edges.len());
                edges.remove(i);
            }
        }
        let node_ids: Vec<String> = nodes.iter().map(|n| n["id"].as_str().unwrap().to_owned()).collect();
        let edge_ids: Vec<String> = edges.iter().map(|e| e.0.clone()).collect();
        let pick_edge = |rng: &mut StdRng| edge_ids[rng.random_range(0..edge_ids.len())].clone();
        let exit = node_ids[rng.random_range(1..node_ids.len())].clone();
        let heading = if rng.random_bool(0.5) { "E" } else { "N" };
        let radio = rng.random_bool(0.5);
        let grace: u64 = rng.random_range(1..=3);

        let mut fire = Vec::new();
        for _ in 0..rng.random_range(0..=3) {
            fire.push(json!({"tick": rng.random_range(1..16), "edge": pick_edge(rng)}));
        }
        let mut traffic = Vec::new();
        for i in 0..rng.random_range(0..=2) {
            let start: u64 = rng.random_range(0..12);
            let dur = grace + rng.random_range(1..=5);
            let kind = if rng.random_bool(0.5) { "brake_lights_ahead" } else { "emergency_behind" };
            traffic.push(json!({"id": format!("T{i}"), "kind": kind, "start": start, "end": start + dur, "edge": pick_edge(rng)}));
        }
        let mut messages = Vec::new();
        for i in 0..rng.random_range(0..=3u32) {
            let t: u64 = rng.random_range(0..10);
            let payload = match rng.random_range(0..4) {
                0 => json!({"type": "road_closure", "edge": pick_edge(rng)}),
                1 => json!({"type": "road_reopened", "edge": pick_edge(rng)}),
                2 => json!({"type": "shelter_warning", "deadline": t + rng.random_range(4..16)}),
                _ => json!({"type": "all_clear"}),
            };
            let channel = if radio && rng.random_bool(0.5) { "radio" } else { "text" };
            messages.push(json!({"id": format!("M{i}"), "channel": channel, "deliver_tick": t, "sequence": i, "payload": payload}));
        }
        let shelters: Vec<String> = (0..rng.random_range(0..=2))
            .map(|_| node_ids[rng.random_range(0..node_ids.len())].clone())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();

        let doc = json!({
            "id": format!("micro{id}"),
            "grid_unit": 1,
            "nodes": nodes,
            "edges": edges.iter().map(|(e, a, b)| json!({"id": e, "a": a, "b": b, "length": len})).collect::<Vec<_>>(),
            "start": {"node": "N0_0", "heading": heading},
            "exit": exit,
            "shelters": shelters,
            "fire_timeline": fire,
            "traffic_events": traffic,
            "messages": messages,
            "cues": [],
            "radio_available": radio,
            "tuning": {
                "brake_grace": grace,
                "noncompliance_penalty": rng.random_range(2..=6),
                "radio_initially_on": radio && rng.random_bool(0.5)
            },
            "seed": id
        });
        let Ok(spec) = parse_scenario(&doc.to_string()) else { continue };
        if check_errors(&spec).is_empty() {
            return spec;
        }
    }
}
