//! Parser for the gravity-fed subset of the EPANET INP dialect.
//!
//! Supported sections: [TITLE], [JUNCTIONS], [RESERVOIRS], [PIPES],
//! [DEMANDS], [PATTERNS], [OPTIONS], [COORDINATES], [END]. Anything with
//! active elements ([PUMPS], [VALVES], [TANKS]) or unknown to this dialect is
//! a hard error. Everything is converted to SI on the way in: flows to m3/s,
//! diameters from mm to m, lengths and heads stay in m.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{Network, Node, PipeSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FlowUnits {
    /// Liters per second.
    Lps,
    /// Cubic meters per second.
    Cms,
}

impl FlowUnits {
    fn to_si(self, flow: f64) -> f64 {
        match self {
            FlowUnits::Lps => flow * 1e-3,
            FlowUnits::Cms => flow,
        }
    }
}

/// A parsed INP file: the network plus sections retained for reporting.
#[derive(Debug, Clone)]
pub struct InpDocument {
    pub network: Network,
    pub title: String,
    /// Demand patterns by id, multipliers in file order.
    pub patterns: BTreeMap<String, Vec<f64>>,
    /// Node coordinates by id (kept for reports, ignored for computation).
    pub coordinates: BTreeMap<String, (f64, f64)>,
}

const SUPPORTED: &[&str] = &[
    "TITLE",
    "JUNCTIONS",
    "RESERVOIRS",
    "PIPES",
    "DEMANDS",
    "PATTERNS",
    "OPTIONS",
    "COORDINATES",
    "END",
];

struct RawLine {
    line_no: usize,
    text: String,
}

impl InpDocument {
    pub fn parse(text: &str) -> Result<InpDocument> {
        // first pass: group lines per section so section order is irrelevant
        let mut sections: BTreeMap<String, Vec<RawLine>> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find(';') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                let name = line
                    .trim_start_matches('[')
                    .trim_end_matches(']')
                    .trim()
                    .to_uppercase();
                if !SUPPORTED.contains(&name.as_str()) {
                    return Err(Error::UnsupportedSection {
                        section: name,
                        line: line_no,
                    });
                }
                current = Some(name.clone());
                sections.entry(name).or_default();
                continue;
            }
            match &current {
                Some(name) => sections.entry(name.clone()).or_default().push(RawLine {
                    line_no,
                    text: line.to_string(),
                }),
                None => {
                    return Err(Error::MalformedLine {
                        line: line_no,
                        reason: "content before first section header".into(),
                    })
                }
            }
        }

        let units = parse_units(sections.get("OPTIONS"))?;

        let title = sections
            .get("TITLE")
            .map(|ls| {
                ls.iter()
                    .map(|l| l.text.as_str())
                    .collect::<Vec<_>>()
                    .join("\n")
            })
            .unwrap_or_default();

        let mut nodes = Vec::new();
        if let Some(lines) = sections.get("JUNCTIONS") {
            for l in lines {
                let f = fields(&l.text);
                if f.len() < 2 {
                    return Err(malformed(l, "expected: ID Elevation [Demand] [Pattern]"));
                }
                let elevation = num(&f[1], l, "elevation")?;
                let demand = if f.len() >= 3 {
                    units.to_si(num(&f[2], l, "demand")?)
                } else {
                    0.0
                };
                if demand < 0.0 {
                    return Err(malformed(l, "negative demand"));
                }
                nodes.push(Node::junction(f[0].clone(), elevation, demand));
            }
        }
        if let Some(lines) = sections.get("RESERVOIRS") {
            for l in lines {
                let f = fields(&l.text);
                if f.len() < 2 {
                    return Err(malformed(l, "expected: ID Head [Pattern]"));
                }
                nodes.push(Node::reservoir(f[0].clone(), num(&f[1], l, "head")?));
            }
        }

        let mut pipes = Vec::new();
        if let Some(lines) = sections.get("PIPES") {
            for l in lines {
                let f = fields(&l.text);
                if f.len() < 6 {
                    return Err(malformed(
                        l,
                        "expected: ID Node1 Node2 Length Diameter Roughness [MinorLoss] [Status]",
                    ));
                }
                if f.len() >= 7 {
                    let minor = num(&f[6], l, "minor loss")?;
                    if minor != 0.0 {
                        return Err(malformed(l, "minor losses are not supported"));
                    }
                }
                if f.len() >= 8 && !f[7].eq_ignore_ascii_case("open") {
                    return Err(malformed(l, "only Open pipes are supported"));
                }
                pipes.push(PipeSpec {
                    id: f[0].clone(),
                    from: f[1].clone(),
                    to: f[2].clone(),
                    length: num(&f[3], l, "length")?,
                    // EPANET metric units carry diameters in millimeters
                    diameter: num(&f[4], l, "diameter")? * 1e-3,
                    roughness: num(&f[5], l, "roughness")?,
                });
            }
        }

        // [DEMANDS] entries are extra demand categories, cumulative with the
        // base demand from [JUNCTIONS]
        if let Some(lines) = sections.get("DEMANDS") {
            for l in lines {
                let f = fields(&l.text);
                if f.len() < 2 {
                    return Err(malformed(l, "expected: JunctionID Demand [Pattern]"));
                }
                let extra = units.to_si(num(&f[1], l, "demand")?);
                let node = nodes
                    .iter_mut()
                    .find(|n| n.id == f[0])
                    .ok_or_else(|| Error::UnknownNode(f[0].clone()))?;
                match &mut node.kind {
                    super::NodeKind::Junction { base_demand } => *base_demand += extra,
                    super::NodeKind::Reservoir { .. } => {
                        return Err(malformed(l, "demand assigned to a reservoir"))
                    }
                }
            }
        }

        let mut patterns: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        if let Some(lines) = sections.get("PATTERNS") {
            for l in lines {
                let f = fields(&l.text);
                if f.len() < 2 {
                    return Err(malformed(l, "expected: PatternID Multiplier..."));
                }
                let entry = patterns.entry(f[0].clone()).or_default();
                for v in &f[1..] {
                    entry.push(num(v, l, "multiplier")?);
                }
            }
        }

        let mut coordinates = BTreeMap::new();
        if let Some(lines) = sections.get("COORDINATES") {
            for l in lines {
                let f = fields(&l.text);
                if f.len() < 3 {
                    return Err(malformed(l, "expected: ID X Y"));
                }
                coordinates.insert(f[0].clone(), (num(&f[1], l, "x")?, num(&f[2], l, "y")?));
            }
        }

        Ok(InpDocument {
            network: Network::new(nodes, pipes)?,
            title,
            patterns,
            coordinates,
        })
    }
}

/// Parse an INP file into a [`Network`], discarding report-only sections.
pub fn parse_inp(text: &str) -> Result<Network> {
    Ok(InpDocument::parse(text)?.network)
}

fn fields(line: &str) -> Vec<String> {
    line.split_whitespace().map(str::to_string).collect()
}

fn malformed(l: &RawLine, reason: &str) -> Error {
    Error::MalformedLine {
        line: l.line_no,
        reason: reason.to_string(),
    }
}

fn num(s: &str, l: &RawLine, what: &str) -> Result<f64> {
    s.parse::<f64>().map_err(|_| Error::MalformedLine {
        line: l.line_no,
        reason: format!("cannot parse {what} from {s:?}"),
    })
}

fn parse_units(options: Option<&Vec<RawLine>>) -> Result<FlowUnits> {
    let lines = options.ok_or_else(|| Error::UnitsUnknown("no [OPTIONS] section".into()))?;
    for l in lines {
        let f = fields(&l.text);
        if f.is_empty() {
            continue;
        }
        if f[0].eq_ignore_ascii_case("units") {
            let v = f.get(1).map(String::as_str).unwrap_or("");
            return match v.to_uppercase().as_str() {
                "LPS" => Ok(FlowUnits::Lps),
                "CMS" => Ok(FlowUnits::Cms),
                other => Err(Error::UnitsUnknown(other.to_string())),
            };
        }
        if f[0].eq_ignore_ascii_case("headloss") {
            let v = f.get(1).map(String::as_str).unwrap_or("");
            if !v.eq_ignore_ascii_case("H-W") {
                return Err(Error::UnitsUnknown(format!(
                    "headloss formula {v:?} is not supported"
                )));
            }
        }
    }
    Err(Error::UnitsUnknown("no Units directive in [OPTIONS]".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const MINIMAL: &str = "\
[TITLE]
tiny test net

[JUNCTIONS]
;ID  Elev  Demand
 j1   2.0    1.5

[RESERVOIRS]
 r1  50.0

[PIPES]
;ID  From  To  Length  Diam  Rough
 p1   r1   j1  1000    300   130

[OPTIONS]
 Units LPS
 Headloss H-W

[END]
";

    #[test]
    fn parses_minimal_network() {
        let net = parse_inp(MINIMAL).unwrap();
        assert_eq!(net.node_count(), 2);
        assert_eq!(net.pipe_count(), 1);
        let j = net.node(net.node_index("j1").unwrap());
        assert_relative_eq!(j.base_demand(), 1.5e-3);
        let p = net.pipe(0);
        assert_relative_eq!(p.diameter, 0.3);
        assert_relative_eq!(p.length, 1000.0);
    }

    #[test]
    fn pumps_are_rejected() {
        let text = format!("{MINIMAL}\n[PUMPS]\n pu1 r1 j1 HEAD 1\n");
        let err = parse_inp(&text).unwrap_err();
        assert!(matches!(err, Error::UnsupportedSection { ref section, .. } if section == "PUMPS"));
    }

    #[test]
    fn missing_units_is_an_error() {
        let text = MINIMAL.replace(" Units LPS\n", "");
        assert!(matches!(parse_inp(&text), Err(Error::UnitsUnknown(_))));
    }

    #[test]
    fn gpm_units_are_rejected() {
        let text = MINIMAL.replace("Units LPS", "Units GPM");
        assert!(matches!(parse_inp(&text), Err(Error::UnitsUnknown(_))));
    }

    #[test]
    fn cms_units_skip_flow_scaling() {
        let text = MINIMAL.replace("Units LPS", "Units CMS");
        let net = parse_inp(&text).unwrap();
        let j = net.node(net.node_index("j1").unwrap());
        assert_relative_eq!(j.base_demand(), 1.5);
    }

    #[test]
    fn demands_section_accumulates() {
        let text = format!("{MINIMAL}\n[DEMANDS]\n j1  0.5\n");
        let net = parse_inp(&text).unwrap();
        let j = net.node(net.node_index("j1").unwrap());
        assert_relative_eq!(j.base_demand(), 2.0e-3);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let text = MINIMAL.replace(" p1   r1   j1  1000    300   130", " p1   r1   j1  oops");
        match parse_inp(&text) {
            Err(Error::MalformedLine { line, .. }) => assert!(line > 0),
            other => panic!("expected MalformedLine, got {other:?}"),
        }
    }

    #[test]
    fn patterns_are_collected() {
        let text = format!("{MINIMAL}\n[PATTERNS]\n pat1 0.5 0.6\n pat1 0.7\n");
        let doc = InpDocument::parse(&text).unwrap();
        assert_eq!(doc.patterns["pat1"], vec![0.5, 0.6, 0.7]);
        assert_eq!(doc.title, "tiny test net");
    }
}
