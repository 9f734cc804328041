//! Water network graph model: nodes, pipes, incidence matrices and
//! structural graph queries.
//!
//! Node indices are assigned in construction (file) order and frozen; every
//! matrix in the crate uses this ordering.

mod graph;
mod incidence;
mod inp;
mod json;

pub use graph::{k_hop_neighborhood, shortest_path, shortest_path_distances};
pub use incidence::{approx_incidence_structural, edge_node_incidence, incidence_from_heads};
pub use inp::{parse_inp, InpDocument};
pub use json::{parse_network_json, serialize_network_json};

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Hazen-Williams flow exponent, `0.54 ~= 1/1.852`.
pub const HW_EXPONENT: f64 = 0.54;

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    /// Water-consuming inner node with a base demand in m3/s.
    Junction { base_demand: f64 },
    /// Water inlet with a fixed hydraulic head in m.
    Reservoir { head: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: String,
    /// Elevation above datum [m].
    pub elevation: f64,
    pub kind: NodeKind,
}

impl Node {
    pub fn junction(id: impl Into<String>, elevation: f64, base_demand: f64) -> Self {
        Node {
            id: id.into(),
            elevation,
            kind: NodeKind::Junction { base_demand },
        }
    }

    pub fn reservoir(id: impl Into<String>, head: f64) -> Self {
        Node {
            id: id.into(),
            elevation: head,
            kind: NodeKind::Reservoir { head },
        }
    }

    pub fn is_junction(&self) -> bool {
        matches!(self.kind, NodeKind::Junction { .. })
    }

    pub fn base_demand(&self) -> f64 {
        match self.kind {
            NodeKind::Junction { base_demand } => base_demand,
            NodeKind::Reservoir { .. } => 0.0,
        }
    }

    pub fn fixed_head(&self) -> Option<f64> {
        match self.kind {
            NodeKind::Reservoir { head } => Some(head),
            NodeKind::Junction { .. } => None,
        }
    }
}

/// A pipe as declared: `source -> sink` is the declared orientation, not a
/// statement about flow direction.
#[derive(Debug, Clone, PartialEq)]
pub struct Pipe {
    pub id: String,
    pub source: usize,
    pub sink: usize,
    /// Length [m].
    pub length: f64,
    /// Inner diameter [m].
    pub diameter: f64,
    /// Hazen-Williams roughness coefficient (dimensionless).
    pub roughness: f64,
}

/// Pipe conductivity `sigma = r^1.852 * d^4.87 / (10.67 * p)`.
pub fn conductivity(pipe: &Pipe) -> f64 {
    pipe.roughness.powf(1.852) * pipe.diameter.powf(4.87) / (10.67 * pipe.length)
}

/// Immutable network graph. Safe to share across threads.
#[derive(Debug, Clone)]
pub struct Network {
    nodes: Vec<Node>,
    pipes: Vec<Pipe>,
    index: HashMap<String, usize>,
    /// adjacency[v] = (neighbor node, pipe index), in pipe declaration order.
    adjacency: Vec<Vec<(usize, usize)>>,
}

/// Pipe endpoints by node id, used while building a network.
#[derive(Debug, Clone)]
pub struct PipeSpec {
    pub id: String,
    pub from: String,
    pub to: String,
    pub length: f64,
    pub diameter: f64,
    pub roughness: f64,
}

impl Network {
    pub fn new(nodes: Vec<Node>, pipe_specs: Vec<PipeSpec>) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, node) in nodes.iter().enumerate() {
            if index.insert(node.id.clone(), i).is_some() {
                return Err(Error::DuplicateId(node.id.clone()));
            }
            if let NodeKind::Junction { base_demand } = node.kind {
                if base_demand < 0.0 || !base_demand.is_finite() {
                    return Err(Error::InvalidNetwork(format!(
                        "junction {:?} has negative or non-finite demand",
                        node.id
                    )));
                }
            }
        }
        let mut pipes = Vec::with_capacity(pipe_specs.len());
        let mut pipe_ids = HashMap::new();
        for spec in pipe_specs {
            if pipe_ids.insert(spec.id.clone(), ()).is_some() {
                return Err(Error::DuplicateId(spec.id.clone()));
            }
            let source = *index.get(&spec.from).ok_or_else(|| Error::MissingEndpoint {
                pipe: spec.id.clone(),
                node: spec.from.clone(),
            })?;
            let sink = *index.get(&spec.to).ok_or_else(|| Error::MissingEndpoint {
                pipe: spec.id.clone(),
                node: spec.to.clone(),
            })?;
            if source == sink {
                return Err(Error::InvalidNetwork(format!(
                    "pipe {:?} connects node {:?} to itself",
                    spec.id, spec.from
                )));
            }
            if spec.length <= 0.0 || spec.diameter <= 0.0 || spec.roughness <= 0.0 {
                return Err(Error::InvalidNetwork(format!(
                    "pipe {:?} has non-positive length, diameter or roughness",
                    spec.id
                )));
            }
            pipes.push(Pipe {
                id: spec.id,
                source,
                sink,
                length: spec.length,
                diameter: spec.diameter,
                roughness: spec.roughness,
            });
        }

        let mut adjacency = vec![Vec::new(); nodes.len()];
        for (k, pipe) in pipes.iter().enumerate() {
            adjacency[pipe.source].push((pipe.sink, k));
            adjacency[pipe.sink].push((pipe.source, k));
        }

        let net = Network {
            nodes,
            pipes,
            index,
            adjacency,
        };
        if !net.nodes.iter().any(|n| !n.is_junction()) {
            return Err(Error::NoReservoir);
        }
        if !net.is_connected() {
            return Err(Error::DisconnectedGraph);
        }
        Ok(net)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn pipe_count(&self) -> usize {
        self.pipes.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn pipes(&self) -> &[Pipe] {
        &self.pipes
    }

    pub fn node(&self, i: usize) -> &Node {
        &self.nodes[i]
    }

    pub fn pipe(&self, k: usize) -> &Pipe {
        &self.pipes[k]
    }

    pub fn node_index(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownNode(id.to_string()))
    }

    /// `(neighbor, pipe)` pairs incident to node `v`.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    pub fn junction_indices(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&i| self.nodes[i].is_junction())
            .collect()
    }

    pub fn reservoir_indices(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&i| !self.nodes[i].is_junction())
            .collect()
    }

    /// Conductivity of every pipe, in pipe order.
    pub fn conductivities(&self) -> Vec<f64> {
        self.pipes.iter().map(conductivity).collect()
    }

    /// Base demand per node (reservoirs contribute 0).
    pub fn base_demands(&self) -> Vec<f64> {
        self.nodes.iter().map(Node::base_demand).collect()
    }

    fn is_connected(&self) -> bool {
        if self.nodes.is_empty() {
            return false;
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut visited = 1;
        while let Some(u) = stack.pop() {
            for &(v, _) in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    visited += 1;
                    stack.push(v);
                }
            }
        }
        visited == self.nodes.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn two_node() -> Network {
        Network::new(
            vec![
                Node::reservoir("r", 50.0),
                Node::junction("a", 0.0, 0.01),
            ],
            vec![PipeSpec {
                id: "p1".into(),
                from: "r".into(),
                to: "a".into(),
                length: 1000.0,
                diameter: 0.3,
                roughness: 130.0,
            }],
        )
        .unwrap()
    }

    #[test]
    fn conductivity_frozen_value() {
        let net = two_node();
        // independent high-precision evaluation of r^1.852 d^4.87 / (10.67 p)
        assert_relative_eq!(
            conductivity(net.pipe(0)),
            0.0021899751130566534,
            max_relative = 1e-14
        );
    }

    #[test]
    fn conductivity_halves_when_length_doubles() {
        let mut pipe = two_node().pipe(0).clone();
        let sigma = conductivity(&pipe);
        pipe.length *= 2.0;
        assert_relative_eq!(conductivity(&pipe), sigma / 2.0, max_relative = 1e-14);
    }

    #[test]
    fn conductivity_unit_cancellation() {
        let pipe = Pipe {
            id: "u".into(),
            source: 0,
            sink: 1,
            length: 1.0 / 10.67,
            diameter: 1.0,
            roughness: 1.0,
        };
        assert_relative_eq!(conductivity(&pipe), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn rejects_duplicate_node_id() {
        let err = Network::new(
            vec![Node::reservoir("r", 50.0), Node::junction("r", 0.0, 0.0)],
            vec![],
        )
        .unwrap_err();
        assert!(matches!(err, Error::DuplicateId(_)));
    }

    #[test]
    fn rejects_missing_endpoint() {
        let err = Network::new(
            vec![Node::reservoir("r", 50.0), Node::junction("a", 0.0, 0.0)],
            vec![PipeSpec {
                id: "p1".into(),
                from: "r".into(),
                to: "x9".into(),
                length: 10.0,
                diameter: 0.1,
                roughness: 100.0,
            }],
        )
        .unwrap_err();
        assert!(matches!(err, Error::MissingEndpoint { .. }));
    }

    #[test]
    fn rejects_disconnected_graph() {
        let err = Network::new(
            vec![
                Node::reservoir("r", 50.0),
                Node::junction("a", 0.0, 0.0),
                Node::junction("b", 0.0, 0.0),
            ],
            vec![PipeSpec {
                id: "p1".into(),
                from: "r".into(),
                to: "a".into(),
                length: 10.0,
                diameter: 0.1,
                roughness: 100.0,
            }],
        )
        .unwrap_err();
        assert!(matches!(err, Error::DisconnectedGraph));
    }

    #[test]
    fn rejects_all_junction_network() {
        let err = Network::new(
            vec![Node::junction("a", 0.0, 0.0), Node::junction("b", 0.0, 0.0)],
            vec![PipeSpec {
                id: "p1".into(),
                from: "a".into(),
                to: "b".into(),
                length: 10.0,
                diameter: 0.1,
                roughness: 100.0,
            }],
        )
        .unwrap_err();
        assert!(matches!(err, Error::NoReservoir));
    }

    proptest::proptest! {
        /// Conductivity is monotone: increasing in roughness and diameter,
        /// decreasing in length.
        #[test]
        fn conductivity_monotone(
            len in 1.0f64..5000.0,
            diam in 0.05f64..1.0,
            rough in 50.0f64..160.0,
            bump in 1.001f64..1.5,
        ) {
            let base = Pipe { id: "p".into(), source: 0, sink: 1, length: len, diameter: diam, roughness: rough };
            let sigma = conductivity(&base);
            let mut p = base.clone();
            p.roughness *= bump;
            proptest::prop_assert!(conductivity(&p) > sigma);
            let mut p = base.clone();
            p.diameter *= bump;
            proptest::prop_assert!(conductivity(&p) > sigma);
            let mut p = base;
            p.length *= bump;
            proptest::prop_assert!(conductivity(&p) < sigma);
        }
    }
}
