//! Solvability oracle: breadth-first search over the time-expanded state space.
//!
//! A configuration is the car's pose plus the little bookkeeping that can
//! change an outcome (penalty stop, per-event compliance, shelter deadline).
//! Layer `t` holds every configuration reachable after `t` steps; each layer is
//! deduplicated, so the search is polynomial in graph size and horizon. The
//! model is written independently of the engine and its witness traces are
//! replayed through the real `step` to confirm them.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::infochannel::{Channel, Payload};
use crate::rules::{InputFrame, NavigatorInput};
use crate::scenario::{ScenarioSpec, Tick};
use crate::vehicle::DriverInput;
use crate::world::{Heading, Turn};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("search reached the {bound}-tick bound without deciding")]
    BoundExceeded { bound: Tick },
    #[error("scenario is structurally broken: {0}")]
    Malformed(String),
}

/// Whether some input sequence wins within [`ScenarioSpec::tick_bound`] ticks.
pub fn solvable(spec: &ScenarioSpec) -> Result<bool, OracleError> {
    solve(spec).map(|w| w.is_some())
}

/// A winning input trace, if one exists within the default bound.
pub fn solve(spec: &ScenarioSpec) -> Result<Option<Vec<InputFrame>>, OracleError> {
    solve_within(spec, spec.tick_bound())
}

/// Like [`solve`] with an explicit horizon.
pub fn solve_within(spec: &ScenarioSpec, bound: Tick) -> Result<Option<Vec<InputFrame>>, OracleError> {
    Model::new(spec)?.search(bound)
}

#[derive(Debug)]
struct Road {
    ends: [usize; 2],
    length: u32,
    ignites_at: Option<Tick>,
}

#[derive(Debug)]
struct Event {
    road: usize,
    start: Tick,
    end: Tick,
}

#[derive(Debug)]
struct ShelterMsg {
    tick: Tick,
    radio: bool,
    /// `Some(deadline)` raises a warning, `None` clears it.
    deadline: Option<Tick>,
}

struct Model {
    pos: Vec<[i64; 2]>,
    /// Per node, the road leaving in each absolute direction.
    exits: Vec<[Option<usize>; 4]>,
    degree: Vec<usize>,
    shelter: Vec<bool>,
    exit: usize,
    roads: Vec<Road>,
    events: Vec<Event>,
    shelter_msgs: Vec<ShelterMsg>,
    start: Pose,
    radio: bool,
    cruise: u32,
    grace: Tick,
    penalty: u64,
    last_scripted: Tick,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Pose {
    road: usize,
    /// Index into `Road::ends` of the endpoint the car came from.
    from: u8,
    offset: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum EventRec {
    Idle,
    Open { since: Tick, engaged: bool },
    Settled,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Config {
    pose: Pose,
    /// Remaining penalty-stop ticks, counted from this layer's tick.
    stop_left: u64,
    events: Vec<EventRec>,
    deadline: Option<Tick>,
}

struct Entry {
    config: Config,
    parent: usize,
    input: InputFrame,
}

enum Motion {
    Still,
    Rolled(Pose),
    Waiting(Pose),
    Win,
    DeadEnd,
}

fn heading_index(h: Heading) -> usize {
    usize::from(h.code())
}

impl Model {
    fn new(spec: &ScenarioSpec) -> Result<Self, OracleError> {
        let malformed = |what: String| OracleError::Malformed(what);
        let node_ix: HashMap<&str, usize> =
            spec.nodes.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect();
        let road_ix: HashMap<&str, usize> =
            spec.edges.iter().enumerate().map(|(i, e)| (e.id.as_str(), i)).collect();
        let lookup_node = |id: &str| node_ix.get(id).copied().ok_or_else(|| malformed(format!("unknown node `{id}`")));
        let lookup_road = |id: &str| road_ix.get(id).copied().ok_or_else(|| malformed(format!("unknown edge `{id}`")));

        let pos: Vec<[i64; 2]> = spec.nodes.iter().map(|n| n.pos).collect();
        let mut exits = vec![[None; 4]; pos.len()];
        let mut degree = vec![0; pos.len()];
        let mut roads = Vec::with_capacity(spec.edges.len());
        for (i, e) in spec.edges.iter().enumerate() {
            let a = lookup_node(e.a.as_str())?;
            let b = lookup_node(e.b.as_str())?;
            let dir = Heading::between(pos[a], pos[b]).ok_or_else(|| malformed(format!("edge `{}` is diagonal", e.id)))?;
            exits[a][heading_index(dir)] = Some(i);
            exits[b][heading_index(dir.reverse())] = Some(i);
            degree[a] += 1;
            degree[b] += 1;
            roads.push(Road { ends: [a, b], length: e.length, ignites_at: None });
        }
        for ign in &spec.fire_timeline {
            let r = lookup_road(ign.edge.as_str())?;
            let at = &mut roads[r].ignites_at;
            *at = Some(at.map_or(ign.tick, |t| t.min(ign.tick)));
        }
        let events = spec
            .traffic_events
            .iter()
            .map(|ev| Ok(Event { road: lookup_road(ev.edge.as_str())?, start: ev.start, end: ev.end }))
            .collect::<Result<Vec<_>, OracleError>>()?;

        let mut msgs: Vec<_> = spec.messages.iter().collect();
        msgs.sort_by_key(|m| m.delivery_key());
        let shelter_msgs = msgs
            .iter()
            .filter_map(|m| {
                let deadline = match m.payload {
                    Payload::ShelterWarning { deadline } => Some(deadline),
                    Payload::AllClear => None,
                    _ => return None,
                };
                Some(ShelterMsg { tick: m.deliver_tick, radio: m.channel == Channel::Radio, deadline })
            })
            .collect::<Vec<_>>();

        let start_node = lookup_node(spec.start.node.as_str())?;
        let start_road = exits[start_node][heading_index(spec.start.heading)]
            .ok_or_else(|| malformed("no road leaves the start node in the start heading".into()))?;
        let from = u8::from(roads[start_road].ends[0] != start_node);

        let last_scripted = spec
            .fire_timeline
            .iter()
            .map(|i| i.tick)
            .chain(spec.traffic_events.iter().map(|e| e.end))
            .chain(spec.messages.iter().map(|m| m.deliver_tick))
            .chain(shelter_msgs.iter().filter_map(|m| m.deadline))
            .max()
            .unwrap_or(0);

        let mut shelter = vec![false; pos.len()];
        for s in &spec.shelters {
            shelter[lookup_node(s.as_str())?] = true;
        }
        Ok(Self {
            pos,
            exits,
            degree,
            shelter,
            exit: lookup_node(spec.exit.as_str())?,
            roads,
            events,
            shelter_msgs,
            start: Pose { road: start_road, from, offset: 0 },
            radio: spec.radio_available,
            cruise: spec.tuning.cruise_speed.max(1),
            grace: u64::from(spec.tuning.brake_grace),
            penalty: u64::from(spec.tuning.noncompliance_penalty),
            last_scripted,
        })
    }

    fn to_node(&self, pose: Pose) -> usize {
        self.roads[pose.road].ends[usize::from(1 - pose.from)]
    }

    fn origin(&self, pose: Pose) -> usize {
        self.roads[pose.road].ends[usize::from(pose.from)]
    }

    fn heading(&self, pose: Pose) -> Heading {
        Heading::between(self.pos[self.origin(pose)], self.pos[self.to_node(pose)])
            .expect("roads are axis-aligned")
    }

    fn burning(&self, road: usize, tick: Tick) -> bool {
        self.roads[road].ignites_at.is_some_and(|t| t <= tick)
    }

    fn enter(&self, node: usize, road: usize) -> Pose {
        Pose { road, from: u8::from(self.roads[road].ends[0] != node), offset: 0 }
    }

    /// Every way the car can leave `node`, paired with the turn request that
    /// produces it, plus waiting when some relative direction is missing.
    fn choices_at(&self, pose: Pose, out: &mut Vec<(Motion, Option<Turn>)>) {
        let node = self.to_node(pose);
        if node == self.exit {
            out.push((Motion::Win, None));
            return;
        }
        if self.degree[node] == 1 {
            out.push((Motion::DeadEnd, None));
            return;
        }
        let heading = self.heading(pose);
        let mut missing = None;
        for turn in Turn::ALL {
            match self.exits[node][heading_index(heading.turned(turn))] {
                Some(road) => out.push((Motion::Rolled(self.enter(node, road)), Some(turn))),
                None => missing = missing.or(Some(turn)),
            }
        }
        if let Some(turn) = missing {
            out.push((Motion::Waiting(Pose { offset: self.roads[pose.road].length, ..pose }), Some(turn)));
        }
    }

    fn stationary_at_shelter(&self, pose: Pose) -> bool {
        let length = self.roads[pose.road].length;
        (pose.offset == length && self.shelter[self.to_node(pose)])
            || (pose.offset == 0 && self.shelter[self.origin(pose)])
    }

    fn normalize(&self, mut c: Config, tick: Tick) -> Config {
        for (rec, ev) in c.events.iter_mut().zip(&self.events) {
            if tick >= ev.end {
                *rec = EventRec::Settled;
            }
        }
        if c.deadline.is_some_and(|d| d < tick) {
            c.deadline = None;
        }
        c
    }

    fn search(&self, bound: Tick) -> Result<Option<Vec<InputFrame>>, OracleError> {
        let root = Config {
            pose: self.start,
            stop_left: 0,
            events: vec![EventRec::Idle; self.events.len()],
            deadline: None,
        };
        let mut layers: Vec<Vec<Entry>> = vec![vec![Entry { config: root, parent: 0, input: InputFrame::default() }]];
        let mut motions = Vec::new();

        for tick in 0..bound {
            let current = layers.last().expect("at least one layer");
            let mut next: Vec<Entry> = Vec::new();
            let mut seen: HashMap<Config, usize> = HashMap::new();
            let radio_matters = self.radio && self.shelter_msgs.iter().any(|m| m.tick == tick && m.radio);
            let radio_options: &[Option<bool>] = if radio_matters { &[Some(true), Some(false)] } else { &[None] };

            for (index, entry) in current.iter().enumerate() {
                for &radio in radio_options {
                    let mut deadline = entry.config.deadline;
                    for m in self.shelter_msgs.iter().filter(|m| m.tick == tick) {
                        if !m.radio || radio == Some(true) {
                            deadline = m.deadline;
                        }
                    }
                    for brake in [false, true] {
                        let c = &entry.config;
                        let mut events = c.events.clone();
                        let mut stop_left = c.stop_left;
                        for (rec, ev) in events.iter_mut().zip(&self.events) {
                            let active = (ev.start..ev.end).contains(&tick) && ev.road == c.pose.road;
                            if !active {
                                continue;
                            }
                            let since = match *rec {
                                EventRec::Settled => continue,
                                EventRec::Idle => tick,
                                EventRec::Open { since, .. } => since,
                            };
                            let engaged = matches!(*rec, EventRec::Open { engaged: true, .. });
                            let violated = !brake && (engaged || tick >= since + self.grace);
                            if violated {
                                *rec = EventRec::Settled;
                                stop_left = stop_left.max(self.penalty);
                            } else {
                                *rec = EventRec::Open { since, engaged: engaged || brake };
                            }
                        }

                        motions.clear();
                        let pose = c.pose;
                        let length = self.roads[pose.road].length;
                        if brake || stop_left > 0 {
                            motions.push((Motion::Still, None));
                        } else if pose.offset < length {
                            let offset = (pose.offset + self.cruise).min(length);
                            if offset < length {
                                motions.push((Motion::Rolled(Pose { offset, ..pose }), None));
                            } else {
                                self.choices_at(Pose { offset, ..pose }, &mut motions);
                            }
                        } else {
                            self.choices_at(pose, &mut motions);
                        }

                        for (motion, turn) in motions.drain(..) {
                            let input = InputFrame {
                                driver: DriverInput { brake_held: brake, turn_request: turn },
                                navigator: NavigatorInput { radio_toggle: radio },
                            };
                            let (pose, still) = match motion {
                                Motion::Win => {
                                    return Ok(Some(Self::witness(&layers, index, input)));
                                }
                                Motion::DeadEnd => continue,
                                Motion::Still => (pose, true),
                                Motion::Waiting(p) => (p, true),
                                Motion::Rolled(p) => (p, false),
                            };
                            if deadline == Some(tick) && !(still && self.stationary_at_shelter(pose)) {
                                continue;
                            }
                            if self.burning(pose.road, tick) {
                                continue;
                            }
                            let config = self.normalize(
                                Config {
                                    pose,
                                    stop_left: stop_left.saturating_sub(1),
                                    events: events.clone(),
                                    deadline,
                                },
                                tick + 1,
                            );
                            if !seen.contains_key(&config) {
                                seen.insert(config.clone(), next.len());
                                next.push(Entry { config, parent: index, input });
                            }
                        }
                    }
                }
            }

            if next.is_empty() {
                return Ok(None);
            }
            // past the last scripted change nothing new can happen once the
            // reachable set stops changing
            if tick + 1 > self.last_scripted && next.len() == current.len() {
                let before: HashSet<&Config> = current.iter().map(|e| &e.config).collect();
                if next.iter().all(|e| before.contains(&e.config)) {
                    return Ok(None);
                }
            }
            layers.push(next);
        }
        Err(OracleError::BoundExceeded { bound })
    }

    fn witness(layers: &[Vec<Entry>], mut index: usize, last: InputFrame) -> Vec<InputFrame> {
        let mut trace = vec![last];
        for layer in layers.iter().skip(1).rev() {
            let entry = &layer[index];
            trace.push(entry.input);
            index = entry.parent;
        }
        trace.reverse();
        trace
    }
}
