//! Native JSON network format, all values in SI units.
//!
//! Schema:
//! ```json
//! {"nodes":[{"id":"n1","kind":"junction","elevation":2.0,"demand":0.001},
//!           {"id":"r1","kind":"reservoir","elevation":50.0,"head":50.0}],
//!  "pipes":[{"id":"p1","from":"r1","to":"n1",
//!            "length":100.0,"diameter":0.2,"roughness":130.0}]}
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Network, Node, NodeKind, PipeSpec};

#[derive(Debug, Serialize, Deserialize)]
struct JsonNode {
    id: String,
    kind: String,
    elevation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    demand: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    head: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonPipe {
    id: String,
    from: String,
    to: String,
    length: f64,
    diameter: f64,
    roughness: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonNetwork {
    nodes: Vec<JsonNode>,
    pipes: Vec<JsonPipe>,
}

pub fn parse_network_json(text: &str) -> Result<Network> {
    let doc: JsonNetwork =
        serde_json::from_str(text).map_err(|e| Error::SchemaViolation(e.to_string()))?;
    let mut nodes = Vec::with_capacity(doc.nodes.len());
    for n in doc.nodes {
        match n.kind.as_str() {
            "junction" => nodes.push(Node::junction(n.id, n.elevation, n.demand.unwrap_or(0.0))),
            "reservoir" => {
                let head = n.head.ok_or_else(|| {
                    Error::SchemaViolation(format!("reservoir {:?} has no head", n.id))
                })?;
                nodes.push(Node {
                    id: n.id,
                    elevation: n.elevation,
                    kind: NodeKind::Reservoir { head },
                });
            }
            other => {
                return Err(Error::SchemaViolation(format!(
                    "unknown node kind {other:?}"
                )))
            }
        }
    }
    let pipes = doc
        .pipes
        .into_iter()
        .map(|p| PipeSpec {
            id: p.id,
            from: p.from,
            to: p.to,
            length: p.length,
            diameter: p.diameter,
            roughness: p.roughness,
        })
        .collect();
    Network::new(nodes, pipes)
}

pub fn serialize_network_json(net: &Network) -> String {
    let doc = JsonNetwork {
        nodes: net
            .nodes()
            .iter()
            .map(|n| JsonNode {
                id: n.id.clone(),
                kind: if n.is_junction() {
                    "junction".into()
                } else {
                    "reservoir".into()
                },
                elevation: n.elevation,
                demand: if n.is_junction() {
                    Some(n.base_demand())
                } else {
                    None
                },
                head: n.fixed_head(),
            })
            .collect(),
        pipes: net
            .pipes()
            .iter()
            .map(|p| JsonPipe {
                id: p.id.clone(),
                from: net.node(p.source).id.clone(),
                to: net.node(p.sink).id.clone(),
                length: p.length,
                diameter: p.diameter,
                roughness: p.roughness,
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("network serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_identity() {
        let net = crate::fixtures::grid3x3();
        let text = serialize_network_json(&net);
        let back = parse_network_json(&text).unwrap();
        assert_eq!(net.nodes(), back.nodes());
        assert_eq!(net.pipes(), back.pipes());
    }

    #[test]
    fn unknown_endpoint_is_reported() {
        let text = r#"{"nodes":[{"id":"r","kind":"reservoir","elevation":50.0,"head":50.0},
                                 {"id":"a","kind":"junction","elevation":0.0,"demand":0.0}],
                       "pipes":[{"id":"p","from":"r","to":"x9",
                                 "length":10.0,"diameter":0.1,"roughness":100.0}]}"#;
        assert!(matches!(
            parse_network_json(text),
            Err(Error::MissingEndpoint { .. })
        ));
    }

    #[test]
    fn grid3x3_has_expected_counts() {
        let net = crate::fixtures::grid3x3();
        assert_eq!(net.node_count(), 10);
        assert_eq!(net.pipe_count(), 13);
    }

    #[test]
    fn bad_kind_is_schema_violation() {
        let text = r#"{"nodes":[{"id":"t","kind":"tank","elevation":1.0}],"pipes":[]}"#;
        assert!(matches!(
            parse_network_json(text),
            Err(Error::SchemaViolation(_))
        ));
    }
}
