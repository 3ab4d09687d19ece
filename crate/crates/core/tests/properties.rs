mod common;

use std::collections::BTreeSet;

use common::*;
use evac_core::infochannel::gps_snapshot;
use evac_core::scenario::{EdgeId, NodeId};
use evac_core::session::{CommandRecord, Session, UiCommand};
use evac_core::{parse_scenario, Game, RoadGraph, ScenarioSpec, Turn};
use proptest::prelude::*;
use rand::Rng;

const PLAYABLE: [&str; 8] = [
    "minimal.json",
    "grid3x3.json",
    "straightline.json",
    "trap.json",
    "trap_fire.json",
    "trap_shelter.json",
    "grid4x4_radio.json",
    "grid6x6_fire.json",
];

fn spec_for(pick: usize, seed: u64) -> ScenarioSpec {
    if pick < PLAYABLE.len() {
        fixture(PLAYABLE[pick])
    } else {
        random_micro_scenario(&mut rng(seed), seed)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn step_invariants_hold(pick in 0..PLAYABLE.len() + 4, seed: u64) {
        let spec = spec_for(pick, seed);
        let mut r = rng(seed ^ 0x5eed);
        let mut game = Game::new(spec.clone()).unwrap();
        let penalty = u64::from(spec.tuning.noncompliance_penalty);
        let mut settled = None;
        for _ in 0..spec.tick_bound().min(200) {
            let before = game.state().clone();
            game.step(&random_frame(&mut r, spec.radio_available));
            let after = game.state();
            if before.outcome.is_terminal() {
                prop_assert_eq!(&before, after);
                continue;
            }
            prop_assert_eq!(after.tick, before.tick + 1);
            if let Some(o) = settled {
                prop_assert_eq!(after.outcome, o);
            }
            if after.outcome.is_terminal() {
                settled = Some(after.outcome);
            }
            // no U-turns: same road means same direction of travel
            if after.vehicle.edge == before.vehicle.edge {
                prop_assert_eq!(&after.vehicle.from_node, &before.vehicle.from_node);
            }
            prop_assert!(after.vehicle.offset <= game.graph().edge(&after.vehicle.edge).unwrap().length);
            if after.vehicle.forced_stop_until != before.vehicle.forced_stop_until {
                let until = after.vehicle.forced_stop_until.unwrap();
                prop_assert!(until - before.tick <= penalty, "stop of {} ticks", until - before.tick);
            }
            prop_assert_eq!(gps_snapshot(after, game.graph()).exit, spec.exit.clone());
        }
    }

    #[test]
    fn session_coalesces_and_hides(pick in 0..PLAYABLE.len(), seed: u64) {
        let spec = fixture(PLAYABLE[pick]);
        let mut r = rng(seed);
        let mut session = Session::bind(spec.clone()).unwrap();
        let mut brake = false;
        let mut ticks = 0;
        for _ in 0..80 {
            let mut last_turn = None;
            for _ in 0..r.random_range(0..5) {
                let command = match r.random_range(0..5) {
                    0 => { brake = true; UiCommand::BrakeDown }
                    1 => { brake = false; UiCommand::BrakeUp }
                    2 => {
                        let t = [Turn::Left, Turn::Straight, Turn::Right][r.random_range(0..3)];
                        last_turn = Some(t);
                        UiCommand::TurnRequest { turn: t }
                    }
                    _ => UiCommand::RadioToggle,
                };
                session.dispatch(&CommandRecord { command, wall_time: r.random::<f64>() }).unwrap();
            }
            let over = session.game().unwrap().state().outcome.is_terminal();
            if !over {
                let frame = session.pending_frame();
                prop_assert_eq!(frame.driver.brake_held, brake);
                prop_assert_eq!(frame.driver.turn_request, last_turn);
                ticks += 1;
            }
            let snap = session.tick().unwrap();
            let game = session.game().unwrap();
            prop_assert_eq!(&snap.scene.navigator.map, &gps_snapshot(game.state(), game.graph()));
            prop_assert_eq!(&snap.scene.navigator.map.exit, &spec.exit);
            prop_assert_eq!(snap.tick, game.state().tick);
            if over { break; }
        }
        prop_assert_eq!(session.export_replay().unwrap().inputs.len(), ticks);
    }

    #[test]
    fn shortest_path_matches_brute_force(w in 2usize..=4, h in 2usize..=3, seed: u64) {
        let mut r = rng(seed);
        let spec = random_lengths_lattice(&mut r, w, h);
        let graph = RoadGraph::build(&spec).unwrap();
        let edges: Vec<EdgeId> = spec.edges.iter().map(|e| e.id.clone()).collect();
        let closed: BTreeSet<EdgeId> = edges.iter().filter(|_| r.random_bool(0.2)).cloned().collect();
        let nodes: Vec<NodeId> = spec.nodes.iter().map(|n| n.id.clone()).collect();
        prop_assert!(nodes.len() <= 12);
        let src = &nodes[r.random_range(0..nodes.len())];
        let dst = &nodes[r.random_range(0..nodes.len())];
        let brute = brute_force_shortest(&spec, src, dst, &closed);
        let found = graph.shortest_path(src, dst, &closed).unwrap();
        match (brute, found) {
            (None, None) => {}
            (Some(best), Some(path)) => {
                prop_assert_eq!(graph.path_length(&path).unwrap(), best);
                // the route is connected, starts at src, ends at dst and avoids closures
                let mut here = src.clone();
                for e in &path {
                    prop_assert!(!closed.contains(e));
                    here = graph.edge(e).unwrap().other(&here).clone();
                }
                prop_assert_eq!(&here, dst);
            }
            (b, f) => prop_assert!(false, "brute {b:?} vs found {f:?}"),
        }
    }
}

fn random_lengths_lattice(r: &mut rand::rngs::StdRng, w: usize, h: usize) -> ScenarioSpec {
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    for y in 0..h {
        for x in 0..w {
            nodes.push(serde_json::json!({"id": format!("N{x}_{y}"), "pos": [x as i64 * 10, y as i64 * 10]}));
            if x + 1 < w && r.random_bool(0.85) {
                edges.push(serde_json::json!({"id": format!("H{x}_{y}"), "a": format!("N{x}_{y}"), "b": format!("N{}_{y}", x + 1), "length": r.random_range(1..6)}));
            }
            if y + 1 < h && r.random_bool(0.85) {
                edges.push(serde_json::json!({"id": format!("V{x}_{y}"), "a": format!("N{x}_{y}"), "b": format!("N{x}_{}", y + 1), "length": r.random_range(1..6)}));
            }
        }
    }
    let mut doc = scenario_json("sp", &[], &[], ("N0_0", "E"), "N1_0");
    doc["nodes"] = nodes.into();
    doc["edges"] = edges.into();
    parse_scenario(&doc.to_string()).unwrap()
}

/// Minimum over every simple path, by depth-first enumeration.
fn brute_force_shortest(spec: &ScenarioSpec, src: &NodeId, dst: &NodeId, closed: &BTreeSet<EdgeId>) -> Option<u64> {
    fn dfs(spec: &ScenarioSpec, here: &NodeId, dst: &NodeId, closed: &BTreeSet<EdgeId>, seen: &mut Vec<NodeId>, len: u64, best: &mut Option<u64>) {
        if here == dst {
            *best = Some(best.map_or(len, |b| b.min(len)));
            return;
        }
        for e in &spec.edges {
            if closed.contains(&e.id) {
                continue;
            }
            let next = if &e.a == here { &e.b } else if &e.b == here { &e.a } else { continue };
            if seen.contains(next) {
                continue;
            }
            seen.push(next.clone());
            dfs(spec, next, dst, closed, seen, len + u64::from(e.length), best);
            seen.pop();
        }
    }
    let mut best = None;
    dfs(spec, src, dst, closed, &mut vec![src.clone()], 0, &mut best);
    best
}
