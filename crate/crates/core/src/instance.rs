//! Instance files: the structured-text schema for graphs, systems, covers,
//! cocycles, and factor maps, plus resolution into the library's types.
//!
//! Files are TOML with a fixed field order, so parsing and serializing are
//! mutually inverse on well-formed data and identical inputs always produce
//! identical in-memory instances. Angles are written as exact rationals in
//! turns (for example `"1/3"`); a complex literal `value = [re, im]` is
//! accepted for floating mode.

use std::collections::{BTreeMap, BTreeSet};

use num::complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor::FactorMap;
use crate::graph::{EdgeId, TopGraph};
use crate::groupoid::PartialSystem;
use crate::phase::Phase;
use crate::twist::CoverCocycle;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GraphSection {
    pub vertices: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edges: Vec<EdgeEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeEntry {
    pub name: String,
    pub range: String,
    pub source: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemSection {
    pub points: Vec<String>,
    /// Pairs `[point, image]`; points not listed are outside the domain.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub images: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverSection {
    pub charts: Vec<ChartEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartEntry {
    pub name: String,
    pub edges: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CocycleEntry {
    pub alpha: String,
    pub beta: String,
    pub edge: String,
    /// Exact rational turns, e.g. `"1/3"` or `"0"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<String>,
    /// Complex literal for floating mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorMapSection {
    pub name: String,
    pub domain: GraphSection,
    /// Pairs `[domain vertex, instance vertex]`, one per domain vertex.
    pub vertex_map: Vec<(String, String)>,
    /// Pairs `[domain edge, instance edge]`, one per domain edge.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edge_map: Vec<(String, String)>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OptionsSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl OptionsSection {
    pub fn is_default(&self) -> bool {
        *self == OptionsSection::default()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub graph: GraphSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cover: Option<CoverSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cocycle: Vec<CocycleEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub factor_maps: Vec<FactorMapSection>,
    #[serde(default, skip_serializing_if = "OptionsSection::is_default")]
    pub options: OptionsSection,
}

pub fn parse_instance(text: &str) -> Result<InstanceFile> {
    toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn serialize_instance(inst: &InstanceFile) -> Result<String> {
    toml::to_string(inst).map_err(|e| Error::Parse(e.to_string()))
}

fn resolve_graph(section: &GraphSection) -> Result<TopGraph> {
    let mut seen = BTreeSet::new();
    for v in &section.vertices {
        if !seen.insert(v.clone()) {
            return Err(Error::Parse(format!("duplicate vertex {v}")));
        }
    }
    let mut g = TopGraph::new();
    for v in &section.vertices {
        g.add_vertex(v);
    }
    let mut enames = BTreeSet::new();
    for e in &section.edges {
        if !enames.insert(e.name.clone()) {
            return Err(Error::Parse(format!("duplicate edge {}", e.name)));
        }
        let r = g
            .vertex_by_name(&e.range)
            .ok_or_else(|| Error::Parse(format!("edge {} has unknown range {}", e.name, e.range)))?;
        let s = g.vertex_by_name(&e.source).ok_or_else(|| {
            Error::Parse(format!("edge {} has unknown source {}", e.name, e.source))
        })?;
        g.add_edge(&e.name, r, s);
    }
    Ok(g)
}

/// Parse an exact angle given in turns: an integer or a fraction `p/q`.
pub fn parse_turns(text: &str) -> Result<Phase> {
    let parse_int = |s: &str| -> Result<i64> {
        s.trim()
            .parse::<i64>()
            .map_err(|_| Error::Parse(format!("bad rational component {s}")))
    };
    match text.split_once('/') {
        None => Ok(Phase::turns(parse_int(text)?, 1)),
        Some((p, q)) => {
            let den = parse_int(q)?;
            if den == 0 {
                return Err(Error::Parse("zero denominator".into()));
            }
            Ok(Phase::turns(parse_int(p)?, den))
        }
    }
}

/// Render a phase the way instance files spell angles.
pub fn turns_to_string(p: &Phase) -> String {
    match p {
        Phase::Turns(t) => format!("{}/{}", t.numer(), t.denom()),
        Phase::Approx(v) => format!("[{}, {}]", v.re, v.im),
    }
}

impl InstanceFile {
    pub fn to_graph(&self) -> Result<TopGraph> {
        resolve_graph(&self.graph)
    }

    pub fn to_system(&self) -> Result<Option<PartialSystem>> {
        let Some(sys) = &self.system else {
            return Ok(None);
        };
        let index = |name: &str| -> Result<usize> {
            sys.points
                .iter()
                .position(|p| p == name)
                .ok_or_else(|| Error::Parse(format!("unknown system point {name}")))
        };
        let mut sigma = vec![None; sys.points.len()];
        for (from, to) in &sys.images {
            let i = index(from)?;
            if sigma[i].is_some() {
                return Err(Error::Parse(format!("point {from} has two images")));
            }
            sigma[i] = Some(index(to)?);
        }
        PartialSystem::new(sys.points.clone(), sigma)
            .map(Some)
            .map_err(|e| Error::Parse(e.to_string()))
    }

    /// Resolve the cover and cocycle entries over the instance graph; with no
    /// cover section this is the trivial single-chart cocycle. Each entry
    /// fills both directions unless the conjugate entry is spelled out too.
    pub fn to_cocycle(&self, g: &TopGraph) -> Result<CoverCocycle> {
        let Some(cover) = &self.cover else {
            if let Some(entry) = self.cocycle.first() {
                return Err(Error::Parse(format!(
                    "cocycle entry on ({}, {}) without a cover section",
                    entry.alpha, entry.beta
                )));
            }
            return Ok(CoverCocycle::trivial(g));
        };
        let mut chart_names = Vec::new();
        let mut charts = Vec::new();
        for chart in &cover.charts {
            if chart_names.contains(&chart.name) {
                return Err(Error::Parse(format!("duplicate chart {}", chart.name)));
            }
            let mut edges = BTreeSet::new();
            for e in &chart.edges {
                let id = g
                    .edge_by_name(e)
                    .ok_or_else(|| Error::Parse(format!("chart {} lists unknown edge {e}", chart.name)))?;
                edges.insert(id);
            }
            chart_names.push(chart.name.clone());
            charts.push(edges);
        }
        let chart_index = |name: &str| -> Result<usize> {
            chart_names
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| Error::Parse(format!("unknown chart {name}")))
        };
        let mut transitions: BTreeMap<(usize, usize), BTreeMap<EdgeId, Phase>> = BTreeMap::new();
        let mut explicit: BTreeSet<(usize, usize, EdgeId)> = BTreeSet::new();
        for entry in &self.cocycle {
            let a = chart_index(&entry.alpha)?;
            let b = chart_index(&entry.beta)?;
            let e = g
                .edge_by_name(&entry.edge)
                .ok_or_else(|| Error::Parse(format!("unknown edge {}", entry.edge)))?;
            if a == b {
                return Err(Error::Parse(format!(
                    "diagonal cocycle entry on chart {}",
                    entry.alpha
                )));
            }
            if !charts[a].contains(&e) || !charts[b].contains(&e) {
                return Err(Error::Parse(format!(
                    "cocycle entry at edge {} outside the overlap of {} and {}",
                    entry.edge, entry.alpha, entry.beta
                )));
            }
            let phase = match (&entry.angle, &entry.value) {
                (Some(turns), None) => parse_turns(turns)?,
                (None, Some([re, im])) => Phase::approx(Complex64::new(*re, *im)),
                _ => {
                    return Err(Error::Parse(format!(
                        "cocycle entry at edge {} needs exactly one of angle or value",
                        entry.edge
                    )))
                }
            };
            if !explicit.insert((a, b, e)) {
                return Err(Error::Parse(format!(
                    "duplicate cocycle entry ({}, {}) at edge {}",
                    entry.alpha, entry.beta, entry.edge
                )));
            }
            transitions.entry((a, b)).or_default().insert(e, phase);
            // Fill the conjugate direction unless it is spelled out.
            let back = transitions.entry((b, a)).or_default();
            if !explicit.contains(&(b, a, e)) {
                back.insert(e, phase.conj());
            }
        }
        Ok(CoverCocycle {
            chart_names,
            charts,
            transitions,
        })
    }

    /// Resolve the factor-map sections: each yields its named domain graph
    /// and the tables into the instance graph.
    pub fn to_factor_maps(&self, g: &TopGraph) -> Result<Vec<(String, TopGraph, FactorMap)>> {
        let mut out = Vec::new();
        for section in &self.factor_maps {
            let f = resolve_graph(&section.domain)?;
            let mut m0 = Vec::with_capacity(f.vertex_count());
            for u in f.vertices() {
                let name = f.vertex_name(u);
                let (_, img) = section
                    .vertex_map
                    .iter()
                    .find(|(from, _)| from == name)
                    .ok_or_else(|| {
                        Error::Parse(format!("factor map {} misses vertex {name}", section.name))
                    })?;
                m0.push(g.vertex_by_name(img).ok_or_else(|| {
                    Error::Parse(format!("factor map {} targets unknown vertex {img}", section.name))
                })?);
            }
            let mut m1 = Vec::with_capacity(f.edge_count());
            for x in f.edges() {
                let name = f.edge_name(x);
                let (_, img) = section
                    .edge_map
                    .iter()
                    .find(|(from, _)| from == name)
                    .ok_or_else(|| {
                        Error::Parse(format!("factor map {} misses edge {name}", section.name))
                    })?;
                m1.push(g.edge_by_name(img).ok_or_else(|| {
                    Error::Parse(format!("factor map {} targets unknown edge {img}", section.name))
                })?);
            }
            out.push((section.name.clone(), f, FactorMap { m0, m1 }));
        }
        Ok(out)
    }
}

/// Describe a graph as an instance section, for generated corpora and
/// round-trip tests.
pub fn graph_to_section(g: &TopGraph) -> GraphSection {
    GraphSection {
        vertices: g.vertices().map(|v| g.vertex_name(v).to_string()).collect(),
        edges: g
            .edges()
            .map(|e| EdgeEntry {
                name: g.edge_name(e).to_string(),
                range: g.vertex_name(g.range(e)).to_string(),
                source: g.vertex_name(g.source(e)).to_string(),
            })
            .collect(),
    }
}

/// Describe a cocycle as cover and entry sections over its graph. Only the
/// lexicographically first direction of each transition pair is written; the
/// conjugate direction is implied.
pub fn cocycle_to_sections(
    g: &TopGraph,
    cc: &CoverCocycle,
) -> (CoverSection, Vec<CocycleEntry>) {
    let cover = CoverSection {
        charts: cc
            .charts
            .iter()
            .zip(&cc.chart_names)
            .map(|(chart, name)| ChartEntry {
                name: name.clone(),
                edges: chart.iter().map(|&e| g.edge_name(e).to_string()).collect(),
            })
            .collect(),
    };
    let mut entries = Vec::new();
    for (&(a, b), table) in &cc.transitions {
        if a > b {
            continue;
        }
        for (&e, phase) in table {
            entries.push(CocycleEntry {
                alpha: cc.chart_names[a].clone(),
                beta: cc.chart_names[b].clone(),
                edge: g.edge_name(e).to_string(),
                angle: match phase {
                    Phase::Turns(t) => Some(format!("{}/{}", t.numer(), t.denom())),
                    Phase::Approx(_) => None,
                },
                value: match phase {
                    Phase::Turns(_) => None,
                    Phase::Approx(v) => Some([v.re, v.im]),
                },
            });
        }
    }
    (cover, entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::graph::samples;

    const SAMPLE: &str = r#"
[graph]
vertices = ["v", "w"]

[[graph.edges]]
name = "e"
range = "v"
source = "w"

[cover]
charts = [
  { name = "a", edges = ["e"] },
  { name = "b", edges = ["e"] },
]

[[cocycle]]
alpha = "a"
beta = "b"
edge = "e"
angle = "1/3"

[options]
bound = 3
"#;

    #[test]
    fn sample_parses_and_resolves() {
        let inst = parse_instance(SAMPLE).unwrap();
        let g = inst.to_graph().unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edge_count(), 1);
        let cc = inst.to_cocycle(&g).unwrap();
        cc.validate(&g).unwrap();
        assert_eq!(cc.chart_count(), 2);
        let e = g.edge_by_name("e").unwrap();
        assert_eq!(cc.s(0, 1, e).unwrap(), Phase::turns(1, 3));
        assert_eq!(cc.s(1, 0, e).unwrap(), Phase::turns(-1, 3));
        assert_eq!(inst.options.bound, Some(3));
    }

    #[test]
    fn round_trip_is_a_fixpoint() {
        let inst = parse_instance(SAMPLE).unwrap();
        let text = serialize_instance(&inst).unwrap();
        let again = parse_instance(&text).unwrap();
        assert_eq!(inst, again);
        assert_eq!(text, serialize_instance(&again).unwrap());
    }

    #[test]
    fn generated_instances_round_trip() {
        for g in corpus::exhaustive_graphs(2, 2) {
            for nc in corpus::cocycle_family(&g, 5, 2) {
                let (cover, entries) = cocycle_to_sections(&g, &nc.cc);
                let inst = InstanceFile {
                    graph: graph_to_section(&g),
                    cover: Some(cover),
                    cocycle: entries,
                    ..InstanceFile::default()
                };
                let text = serialize_instance(&inst).unwrap();
                let back = parse_instance(&text).unwrap();
                assert_eq!(inst, back);
                let g2 = back.to_graph().unwrap();
                assert_eq!(corpus::graph_label(&g), corpus::graph_label(&g2));
                let cc2 = back.to_cocycle(&g2).unwrap();
                assert_eq!(nc.cc.charts, cc2.charts);
                assert_eq!(nc.cc.transitions, cc2.transitions);
            }
        }
    }

    #[test]
    fn system_and_factor_sections_resolve() {
        let text = r#"
[graph]
vertices = ["x", "y"]

[[graph.edges]]
name = "x"
range = "x"
source = "y"

[system]
points = ["x", "y"]
images = [["x", "y"]]

[[factor_maps]]
name = "self"
vertex_map = [["x", "x"], ["y", "y"]]
edge_map = [["x", "x"]]

[factor_maps.domain]
vertices = ["x", "y"]

[[factor_maps.domain.edges]]
name = "x"
range = "x"
source = "y"
"#;
        let inst = parse_instance(text).unwrap();
        let g = inst.to_graph().unwrap();
        let sys = inst.to_system().unwrap().unwrap();
        assert_eq!(sys.sigma, vec![Some(1), None]);
        let fms = inst.to_factor_maps(&g).unwrap();
        assert_eq!(fms.len(), 1);
        let (name, f, fm) = &fms[0];
        assert_eq!(name, "self");
        assert!(crate::factor::is_valid_factor_map(fm, f, &g).unwrap());
    }

    #[test]
    fn parse_rejects_malformed_files() {
        assert!(matches!(parse_instance("graph = 3"), Err(Error::Parse(_))));
        let unknown_vertex = r#"
[graph]
vertices = ["v"]

[[graph.edges]]
name = "e"
range = "v"
source = "nope"
"#;
        let inst = parse_instance(unknown_vertex).unwrap();
        assert!(matches!(inst.to_graph(), Err(Error::Parse(_))));
        let bad_angle = parse_turns("x/3");
        assert!(matches!(bad_angle, Err(Error::Parse(_))));
        assert_eq!(parse_turns("2/6").unwrap(), Phase::turns(1, 3));
        assert_eq!(parse_turns("1").unwrap(), Phase::one());
    }

    #[test]
    fn empty_graph_is_representable() {
        let inst = parse_instance("[graph]\nvertices = []\n").unwrap();
        let g = inst.to_graph().unwrap();
        assert_eq!(g.vertex_count(), 0);
        assert_eq!(samples::graph_a().vertex_count(), 2);
    }
}
