//! Road-network queries over the scenario graph.
//!
//! Nodes sit on integer, axis-aligned coordinates so every edge leaving a node
//! has one of four absolute directions. That makes "left", "straight" and
//! "right" well defined relative to the car's heading.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scenario::{EdgeId, NodeId, ScenarioSpec};

/// Absolute travel direction. North is +y, east is +x.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Heading {
    N,
    E,
    S,
    W,
}

impl Heading {
    pub const ALL: [Heading; 4] = [Heading::N, Heading::E, Heading::S, Heading::W];

    #[must_use]
    pub const fn left(self) -> Self {
        match self {
            Self::N => Self::W,
            Self::W => Self::S,
            Self::S => Self::E,
            Self::E => Self::N,
        }
    }

    #[must_use]
    pub const fn right(self) -> Self {
        self.left().left().left()
    }

    #[must_use]
    pub const fn reverse(self) -> Self {
        self.left().left()
    }

    #[must_use]
    pub const fn turned(self, turn: Turn) -> Self {
        match turn {
            Turn::Left => self.left(),
            Turn::Straight => self,
            Turn::Right => self.right(),
        }
    }

    /// Unit step along this heading.
    #[must_use]
    pub const fn delta(self) -> (i64, i64) {
        match self {
            Self::N => (0, 1),
            Self::E => (1, 0),
            Self::S => (0, -1),
            Self::W => (-1, 0),
        }
    }

    /// Direction from `from` to `to`, if the two points differ along exactly one axis.
    #[must_use]
    pub fn between(from: [i64; 2], to: [i64; 2]) -> Option<Self> {
        let dx = to[0] - from[0];
        let dy = to[1] - from[1];
        match (dx.signum(), dy.signum()) {
            (1, 0) => Some(Self::E),
            (-1, 0) => Some(Self::W),
            (0, 1) => Some(Self::N),
            (0, -1) => Some(Self::S),
            _ => None,
        }
    }

    #[must_use]
    pub const fn as_str(self) -> &'static str {
        match self {
            Self::N => "N",
            Self::E => "E",
            Self::S => "S",
            Self::W => "W",
        }
    }

    pub(crate) const fn code(self) -> u8 {
        match self {
            Self::N => 0,
            Self::E => 1,
            Self::S => 2,
            Self::W => 3,
        }
    }
}

impl fmt::Display for Heading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A turn relative to the current heading. U-turns do not exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Turn {
    Left,
    Straight,
    Right,
}

impl Turn {
    pub const ALL: [Turn; 3] = [Turn::Left, Turn::Straight, Turn::Right];

    #[must_use]
    pub const fn letter(self) -> char {
        match self {
            Self::Left => 'L',
            Self::Straight => 'S',
            Self::Right => 'R',
        }
    }

    #[must_use]
    pub const fn from_letter(c: char) -> Option<Self> {
        match c {
            'L' => Some(Self::Left),
            'S' => Some(Self::Straight),
            'R' => Some(Self::Right),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WorldError {
    #[error("unknown node `{0}`")]
    UnknownNode(NodeId),
    #[error("unknown edge `{0}`")]
    UnknownEdge(EdgeId),
    #[error("edge `{edge}` is not axis-aligned")]
    NotAxisAligned { edge: EdgeId },
    #[error("node `{node}` has two roads heading {heading}")]
    DirectionConflict { node: NodeId, heading: Heading },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeInfo {
    pub a: NodeId,
    pub b: NodeId,
    pub length: u32,
}

impl EdgeInfo {
    /// The endpoint opposite `node`.
    #[must_use]
    pub fn other(&self, node: &NodeId) -> &NodeId {
        if *node == self.a {
            &self.b
        } else {
            &self.a
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjacent {
    pub edge: EdgeId,
    pub neighbor: NodeId,
    pub direction: Heading,
}

/// Immutable road network with a direction-annotated adjacency index.
#[derive(Debug, Clone)]
pub struct RoadGraph {
    nodes: BTreeMap<NodeId, [i64; 2]>,
    edges: BTreeMap<EdgeId, EdgeInfo>,
    adjacency: BTreeMap<NodeId, Vec<Adjacent>>,
    exit: NodeId,
    shelters: BTreeSet<NodeId>,
}

impl RoadGraph {
    /// Builds the graph. Fails on references to missing nodes, diagonal edges,
    /// or two roads leaving one node in the same direction.
    pub fn build(spec: &ScenarioSpec) -> Result<Self, WorldError> {
        let nodes: BTreeMap<NodeId, [i64; 2]> =
            spec.nodes.iter().map(|n| (n.id.clone(), n.pos)).collect();
        let mut adjacency: BTreeMap<NodeId, Vec<Adjacent>> =
            nodes.keys().map(|id| (id.clone(), Vec::new())).collect();
        let mut edges = BTreeMap::new();
        for edge in &spec.edges {
            let pa = *nodes
                .get(&edge.a)
                .ok_or_else(|| WorldError::UnknownNode(edge.a.clone()))?;
            let pb = *nodes
                .get(&edge.b)
                .ok_or_else(|| WorldError::UnknownNode(edge.b.clone()))?;
            let dir = Heading::between(pa, pb)
                .ok_or_else(|| WorldError::NotAxisAligned { edge: edge.id.clone() })?;
            for (node, neighbor, direction) in
                [(&edge.a, &edge.b, dir), (&edge.b, &edge.a, dir.reverse())]
            {
                let list = adjacency.get_mut(node).expect("node indexed above");
                if list.iter().any(|adj| adj.direction == direction) {
                    return Err(WorldError::DirectionConflict {
                        node: node.clone(),
                        heading: direction,
                    });
                }
                list.push(Adjacent {
                    edge: edge.id.clone(),
                    neighbor: neighbor.clone(),
                    direction,
                });
            }
            edges.insert(
                edge.id.clone(),
                EdgeInfo { a: edge.a.clone(), b: edge.b.clone(), length: edge.length },
            );
        }
        for list in adjacency.values_mut() {
            list.sort_by_key(|adj| adj.direction);
        }
        Ok(Self {
            nodes,
            edges,
            adjacency,
            exit: spec.exit.clone(),
            shelters: spec.shelters.iter().cloned().collect(),
        })
    }

    pub fn nodes(&self) -> impl Iterator<Item = (&NodeId, [i64; 2])> {
        self.nodes.iter().map(|(id, pos)| (id, *pos))
    }

    pub fn edges(&self) -> impl Iterator<Item = (&EdgeId, &EdgeInfo)> {
        self.edges.iter()
    }

    #[must_use]
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    #[must_use]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    #[must_use]
    pub fn position(&self, node: &NodeId) -> Option<[i64; 2]> {
        self.nodes.get(node).copied()
    }

    #[must_use]
    pub fn edge(&self, edge: &EdgeId) -> Option<&EdgeInfo> {
        self.edges.get(edge)
    }

    #[must_use]
    pub fn contains_node(&self, node: &NodeId) -> bool {
        self.nodes.contains_key(node)
    }

    pub fn adjacent(&self, node: &NodeId) -> Result<&[Adjacent], WorldError> {
        self.adjacency
            .get(node)
            .map(Vec::as_slice)
            .ok_or_else(|| WorldError::UnknownNode(node.clone()))
    }

    pub fn degree(&self, node: &NodeId) -> Result<usize, WorldError> {
        self.adjacent(node).map(<[Adjacent]>::len)
    }

    #[must_use]
    pub fn exit(&self) -> &NodeId {
        &self.exit
    }

    #[must_use]
    pub fn shelters(&self) -> &BTreeSet<NodeId> {
        &self.shelters
    }

    #[must_use]
    pub fn is_shelter(&self, node: &NodeId) -> bool {
        self.shelters.contains(node)
    }

    /// The edge leaving `node` in absolute direction `heading`.
    pub fn edge_toward(&self, node: &NodeId, heading: Heading) -> Result<Option<&Adjacent>, WorldError> {
        Ok(self.adjacent(node)?.iter().find(|adj| adj.direction == heading))
    }

    pub fn total_length(&self) -> u64 {
        self.edges.values().map(|e| u64::from(e.length)).sum()
    }

    /// Outgoing roads at `node` keyed by the turn a car travelling `heading` would make.
    pub fn relative_options(
        &self,
        node: &NodeId,
        heading: Heading,
    ) -> Result<BTreeMap<Turn, (EdgeId, Heading)>, WorldError> {
        let mut options = BTreeMap::new();
        for adj in self.adjacent(node)? {
            let turn = if adj.direction == heading {
                Turn::Straight
            } else if adj.direction == heading.left() {
                Turn::Left
            } else if adj.direction == heading.right() {
                Turn::Right
            } else {
                continue;
            };
            options.insert(turn, (adj.edge.clone(), adj.direction));
        }
        Ok(options)
    }

    /// Distance in cells from every node to `dst`, skipping `closed` edges.
    pub fn distances_to(
        &self,
        dst: &NodeId,
        closed: &BTreeSet<EdgeId>,
    ) -> Result<BTreeMap<NodeId, u64>, WorldError> {
        if !self.contains_node(dst) {
            return Err(WorldError::UnknownNode(dst.clone()));
        }
        let mut dist: BTreeMap<NodeId, u64> = BTreeMap::new();
        let mut heap = BinaryHeap::new();
        dist.insert(dst.clone(), 0);
        heap.push(Reverse((0u64, dst.clone())));
        while let Some(Reverse((d, node))) = heap.pop() {
            if dist.get(&node).is_some_and(|&best| d > best) {
                continue;
            }
            for adj in &self.adjacency[&node] {
                if closed.contains(&adj.edge) {
                    continue;
                }
                let nd = d + u64::from(self.edges[&adj.edge].length);
                if dist.get(&adj.neighbor).is_none_or(|&best| nd < best) {
                    dist.insert(adj.neighbor.clone(), nd);
                    heap.push(Reverse((nd, adj.neighbor.clone())));
                }
            }
        }
        Ok(dist)
    }

    /// Minimum-length route from `src` to `dst` that avoids `closed`.
    ///
    /// Among equally short routes, the one whose edge-id sequence is
    /// lexicographically smallest is returned.
    pub fn shortest_path(
        &self,
        src: &NodeId,
        dst: &NodeId,
        closed: &BTreeSet<EdgeId>,
    ) -> Result<Option<Vec<EdgeId>>, WorldError> {
        if !self.contains_node(src) {
            return Err(WorldError::UnknownNode(src.clone()));
        }
        let dist = self.distances_to(dst, closed)?;
        let Some(&total) = dist.get(src) else {
            return Ok(None);
        };
        let mut path = Vec::new();
        let mut here = src.clone();
        let mut remaining = total;
        while here != *dst {
            let next = self.adjacency[&here]
                .iter()
                .filter(|adj| !closed.contains(&adj.edge))
                .filter(|adj| {
                    let len = u64::from(self.edges[&adj.edge].length);
                    dist.get(&adj.neighbor).is_some_and(|&d| d + len == remaining)
                })
                .min_by(|x, y| x.edge.cmp(&y.edge))
                .expect("a neighbour on a shortest route always exists");
            remaining -= u64::from(self.edges[&next.edge].length);
            path.push(next.edge.clone());
            here = next.neighbor.clone();
        }
        Ok(Some(path))
    }

    /// Sum of edge lengths along `path`.
    pub fn path_length(&self, path: &[EdgeId]) -> Result<u64, WorldError> {
        path.iter()
            .map(|e| {
                self.edges
                    .get(e)
                    .map(|info| u64::from(info.length))
                    .ok_or_else(|| WorldError::UnknownEdge(e.clone()))
            })
            .sum()
    }
}
