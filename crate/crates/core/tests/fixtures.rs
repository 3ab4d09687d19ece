mod common;

use std::collections::BTreeSet;

use common::*;
use evac_core::harness::{solvable, OracleError};
use evac_core::rules::state_digest;
use evac_core::scenario::init_state;
use evac_core::{parse_scenario, serialize_scenario, step, validate_scenario, Game, InputFrame, RoadGraph};

/// Golden digest of `straightline.json` after 20 ticks with no input. Pinned
/// from a verified run; the car takes a 10-tick penalty stop on the way.
const STRAIGHTLINE_20: &str = "f1429030ddf3a9395f4e7a663f1fa3cad65ad1dd0bc978ebce1cf49261e6d683";

#[test]
fn grid3x3_edge_count_matches_lattice_enumeration() {
    let spec = fixture("grid3x3.json");
    // count unit-distance node pairs on the 3x3 position grid
    let positions: Vec<[i64; 2]> = spec.nodes.iter().map(|n| n.pos).collect();
    let step = 3;
    let mut expected = 0;
    for (i, a) in positions.iter().enumerate() {
        for b in &positions[i + 1..] {
            let d = (a[0] - b[0]).abs() + (a[1] - b[1]).abs();
            if d == step {
                expected += 1;
            }
        }
    }
    assert_eq!(spec.nodes.len(), 9);
    assert_eq!(expected, 12);
    assert_eq!(spec.edges.len(), expected);
    assert_eq!(RoadGraph::build(&spec).unwrap().edge_count(), expected);
}

#[test]
fn grid3x3_is_clean() {
    let report = validate_scenario(&fixture("grid3x3.json"));
    assert!(report.errors.is_empty() && report.warnings.is_empty(), "{report:?}");
}

#[test]
fn grid3x3_serialization_is_a_fixed_point() {
    let once = serialize_scenario(&fixture("grid3x3.json"));
    let twice = serialize_scenario(&parse_scenario(&once).unwrap());
    assert_eq!(once, twice);
}

#[test]
fn fixture_files_are_canonical() {
    // authored files keep canonical list order, so reparsing changes nothing
    for (name, text) in all_fixtures() {
        let spec = parse_scenario(&text).unwrap();
        assert_eq!(spec.clone().canonical(), spec, "{name}");
    }
}

#[test]
fn straightline_golden_digest() {
    let spec = fixture("straightline.json");
    let mut game = Game::new(spec.clone()).unwrap();
    for _ in 0..20 {
        game.step(&InputFrame::default());
    }
    assert_eq!(game.digest(), STRAIGHTLINE_20);
    let v = &game.state().vehicle;
    assert_eq!(v.forced_stop_until, Some(18));
    assert_eq!((v.edge.as_str(), v.offset), ("E2", 0));

    // a second, independent stepping reaches the same digest
    let graph = RoadGraph::build(&spec).unwrap();
    let mut state = init_state(&spec).unwrap();
    for _ in 0..20 {
        state = step(&state, &InputFrame::default(), &graph, &spec);
    }
    assert_eq!(state_digest(&state), STRAIGHTLINE_20);
}

#[test]
fn unsolvable_warning_tracks_the_oracle() {
    for (name, text) in all_fixtures() {
        let spec = parse_scenario(&text).unwrap();
        let report = validate_scenario(&spec);
        match solvable(&spec) {
            Ok(yes) => assert_eq!(report.has_warning("UNSOLVABLE"), !yes, "{name}"),
            Err(OracleError::BoundExceeded { .. }) => assert!(report.has_warning("SOLVABILITY_UNKNOWN"), "{name}"),
            Err(e) => panic!("{name}: {e}"),
        }
    }
}

#[test]
fn brake_held_forever_never_dead_ends_or_burns_early() {
    for (name, text) in all_fixtures() {
        let spec = parse_scenario(&text).unwrap();
        let mut game = Game::new(spec.clone()).unwrap();
        let start_edge = game.state().vehicle.edge.clone();
        let first_fire = spec.fire_timeline.iter().filter(|i| i.edge == start_edge).map(|i| i.tick).min();
        for _ in 0..spec.tick_bound().min(300) {
            game.step(&brake(true));
            let out = game.state().outcome;
            assert_ne!(out, evac_core::Outcome::Lose(evac_core::LoseReason::DeadEnd), "{name}");
            if out == evac_core::Outcome::Lose(evac_core::LoseReason::FireContact) {
                assert!(first_fire.is_some_and(|t| t < game.state().tick), "{name}: burned before the fire arrived");
            }
        }
    }
}

#[test]
fn schema_doc_lists_every_top_level_key() {
    let doc = std::fs::read_to_string(fixtures_dir().join("../docs/scenario-schema.md")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&fixture_text("grid4x4_radio.json")).unwrap();
    let keys: BTreeSet<&String> = v.as_object().unwrap().keys().collect();
    assert_eq!(keys.len(), 14);
    for key in keys {
        assert!(doc.contains(&format!("`{key}`")), "{key} undocumented");
    }
}
