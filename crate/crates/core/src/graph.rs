//! Finite discrete topological graphs.
//!
//! A graph is a quadruple (vertices, edges, range, source). Everything is
//! finite and carries the discrete topology, so the usual continuity and
//! properness side conditions hold automatically and the interesting content
//! is combinatorial: which vertices receive edges, and how paths compose.
//!
//! Composition convention: in a path `e1.e2...en` consecutive edges satisfy
//! `source(e_i) = range(e_{i+1})`; the range of the path is `range(e1)` and
//! its source is `source(en)`. A length-0 path is a vertex.

use crate::error::{Error, Result};
use std::collections::BTreeSet;
use std::fmt;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct VertexId(pub u32);

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct EdgeId(pub u32);

/// A finite topological graph with named vertices and edges.
///
/// Ids are indices into the name tables; their numeric order is the stable
/// total order used everywhere determinism matters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TopGraph {
    vertex_names: Vec<String>,
    edge_names: Vec<String>,
    range: Vec<VertexId>,
    source: Vec<VertexId>,
    /// `r_pre[v]` = edges whose range is `v`, in id order.
    r_pre: Vec<Vec<EdgeId>>,
}

impl TopGraph {
    pub fn new() -> TopGraph {
        TopGraph {
            vertex_names: Vec::new(),
            edge_names: Vec::new(),
            range: Vec::new(),
            source: Vec::new(),
            r_pre: Vec::new(),
        }
    }

    /// Add a vertex; panics on a duplicate name (callers own name hygiene,
    /// parsed input goes through [`TopGraph::build`]).
    pub fn add_vertex(&mut self, name: &str) -> VertexId {
        assert!(
            !self.vertex_names.iter().any(|n| n == name),
            "duplicate vertex name {name}"
        );
        self.vertex_names.push(name.to_string());
        self.r_pre.push(Vec::new());
        VertexId(self.vertex_names.len() as u32 - 1)
    }

    pub fn add_edge(&mut self, name: &str, range: VertexId, source: VertexId) -> EdgeId {
        assert!(
            !self.edge_names.iter().any(|n| n == name),
            "duplicate edge name {name}"
        );
        assert!((range.0 as usize) < self.vertex_names.len());
        assert!((source.0 as usize) < self.vertex_names.len());
        self.edge_names.push(name.to_string());
        self.range.push(range);
        self.source.push(source);
        let e = EdgeId(self.edge_names.len() as u32 - 1);
        self.r_pre[range.0 as usize].push(e);
        e
    }

    /// Validating constructor for parsed input: `edges` are
    /// (name, range name, source name) triples.
    pub fn build(vertices: &[String], edges: &[(String, String, String)]) -> Result<TopGraph> {
        let mut g = TopGraph::new();
        let mut seen = BTreeSet::new();
        for v in vertices {
            if !seen.insert(v.clone()) {
                return Err(Error::InvalidGraph(format!("duplicate vertex {v}")));
            }
            g.add_vertex(v);
        }
        let mut eseen = BTreeSet::new();
        for (name, r, s) in edges {
            if !eseen.insert(name.clone()) {
                return Err(Error::InvalidGraph(format!("duplicate edge {name}")));
            }
            let rv = g
                .vertex_by_name(r)
                .ok_or_else(|| Error::InvalidGraph(format!("edge {name}: unknown range {r}")))?;
            let sv = g
                .vertex_by_name(s)
                .ok_or_else(|| Error::InvalidGraph(format!("edge {name}: unknown source {s}")))?;
            g.add_edge(name, rv, sv);
        }
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_names.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.vertex_names.len() as u32).map(VertexId)
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeId> {
        (0..self.edge_names.len() as u32).map(EdgeId)
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.vertex_names[v.0 as usize]
    }

    pub fn edge_name(&self, e: EdgeId) -> &str {
        &self.edge_names[e.0 as usize]
    }

    pub fn vertex_by_name(&self, name: &str) -> Option<VertexId> {
        self.vertex_names
            .iter()
            .position(|n| n == name)
            .map(|i| VertexId(i as u32))
    }

    pub fn edge_by_name(&self, name: &str) -> Option<EdgeId> {
        self.edge_names
            .iter()
            .position(|n| n == name)
            .map(|i| EdgeId(i as u32))
    }

    pub fn range(&self, e: EdgeId) -> VertexId {
        self.range[e.0 as usize]
    }

    pub fn source(&self, e: EdgeId) -> VertexId {
        self.source[e.0 as usize]
    }

    /// Edges whose range is `v` (the continuations of a path arriving at `v`).
    pub fn r_preimage(&self, v: VertexId) -> &[EdgeId] {
        &self.r_pre[v.0 as usize]
    }

    /// True when no path of length >= 1 returns to its own range vertex.
    pub fn is_acyclic(&self) -> bool {
        // Follow arcs range(e) -> source(e); a directed cycle there is a cycle
        // of composable edges.
        let n = self.vertex_count();
        let mut state = vec![0u8; n]; // 0 unvisited, 1 in stack, 2 done
        for start in 0..n {
            if state[start] != 0 {
                continue;
            }
            let mut stack = vec![(start, 0usize)];
            state[start] = 1;
            while let Some(&(v, i)) = stack.last() {
                let outs = &self.r_pre[v];
                if i < outs.len() {
                    stack.last_mut().unwrap().1 += 1;
                    let next = self.source(outs[i]).0 as usize;
                    match state[next] {
                        0 => {
                            state[next] = 1;
                            stack.push((next, 0));
                        }
                        1 => return false,
                        _ => {}
                    }
                } else {
                    state[v] = 2;
                    stack.pop();
                }
            }
        }
        true
    }
}

impl Default for TopGraph {
    fn default() -> Self {
        TopGraph::new()
    }
}

/// The range/source classification of a graph's vertices.
///
/// In the finite discrete setting every vertex is finite-receiving, sources
/// are exactly the vertices missed by the range map, regular = finite and not
/// a source, singular = not regular. `regular` and `singular` partition the
/// vertex set, and `sources ⊆ singular`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexClassification {
    pub finite: BTreeSet<VertexId>,
    pub sources: BTreeSet<VertexId>,
    pub regular: BTreeSet<VertexId>,
    pub singular: BTreeSet<VertexId>,
}

impl VertexClassification {
    pub fn is_regular(&self, v: VertexId) -> bool {
        self.regular.contains(&v)
    }

    pub fn is_singular(&self, v: VertexId) -> bool {
        self.singular.contains(&v)
    }
}

/// Classify every vertex of `g` by direct evaluation of the defining sets.
pub fn classify_vertices(g: &TopGraph) -> VertexClassification {
    let finite: BTreeSet<VertexId> = g.vertices().collect();
    let hit: BTreeSet<VertexId> = g.edges().map(|e| g.range(e)).collect();
    let sources: BTreeSet<VertexId> = finite.difference(&hit).copied().collect();
    let regular: BTreeSet<VertexId> = finite
        .iter()
        .filter(|v| !sources.contains(v))
        .copied()
        .collect();
    let singular: BTreeSet<VertexId> = finite.difference(&regular).copied().collect();
    VertexClassification {
        finite,
        sources,
        regular,
        singular,
    }
}

/// A finite path: a base vertex plus a (possibly empty) list of composable
/// edges whose range is the base. Ordered lexicographically by (base, edges),
/// which is the stable order used for reports.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct Path {
    base: VertexId,
    edges: Vec<EdgeId>,
}

impl Path {
    /// The length-0 path at `v`.
    pub fn vertex(v: VertexId) -> Path {
        Path {
            base: v,
            edges: Vec::new(),
        }
    }

    /// Build a path from a nonempty edge list, checking composability.
    pub fn from_edges(g: &TopGraph, edges: Vec<EdgeId>) -> Result<Path> {
        if edges.is_empty() {
            return Err(Error::NonComposable(
                "empty edge list; use Path::vertex for length-0 paths".into(),
            ));
        }
        for w in edges.windows(2) {
            if g.source(w[0]) != g.range(w[1]) {
                return Err(Error::NonComposable(format!(
                    "source({}) != range({})",
                    g.edge_name(w[0]),
                    g.edge_name(w[1])
                )));
            }
        }
        Ok(Path {
            base: g.range(edges[0]),
            edges,
        })
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn edge_at(&self, i: usize) -> EdgeId {
        self.edges[i]
    }

    /// Range vertex (left endpoint).
    pub fn range(&self) -> VertexId {
        self.base
    }

    /// Source vertex (right endpoint).
    pub fn source(&self, g: &TopGraph) -> VertexId {
        match self.edges.last() {
            Some(&e) => g.source(e),
            None => self.base,
        }
    }

    /// The initial segment consisting of the first `n` edges.
    pub fn prefix(&self, n: usize) -> Path {
        Path {
            base: self.base,
            edges: self.edges[..n].to_vec(),
        }
    }

    /// Drop the first `k` edges (the k-fold shift of a finite path).
    pub fn tail(&self, g: &TopGraph, k: usize) -> Path {
        if k == self.edges.len() {
            Path::vertex(self.source(g))
        } else {
            Path {
                base: g.range(self.edges[k]),
                edges: self.edges[k..].to_vec(),
            }
        }
    }

    pub fn is_prefix_of(&self, other: &Path) -> bool {
        self.base == other.base
            && self.edges.len() <= other.edges.len()
            && self.edges == other.edges[..self.edges.len()]
    }

    /// Concatenation `self · other`, defined when `source(self) = range(other)`.
    pub fn concat(&self, g: &TopGraph, other: &Path) -> Result<Path> {
        if self.source(g) != other.range() {
            return Err(Error::NonComposable(format!(
                "source {} != range {}",
                g.vertex_name(self.source(g)),
                g.vertex_name(other.range())
            )));
        }
        let mut edges = self.edges.clone();
        edges.extend_from_slice(&other.edges);
        Ok(Path {
            base: if self.edges.is_empty() && !other.edges.is_empty() {
                other.base
            } else {
                self.base
            },
            edges,
        })
    }

    /// Repeat a cycle (`source == range`) `k` times.
    pub fn repeat(&self, g: &TopGraph, k: usize) -> Result<Path> {
        let mut out = Path::vertex(self.range());
        for _ in 0..k {
            out = out.concat(g, self)?;
        }
        Ok(out)
    }

    pub fn display(&self, g: &TopGraph) -> String {
        if self.edges.is_empty() {
            g.vertex_name(self.base).to_string()
        } else {
            self.edges
                .iter()
                .map(|&e| g.edge_name(e))
                .collect::<Vec<_>>()
                .join(".")
        }
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.edges.is_empty() {
            write!(f, "v{}", self.base.0)
        } else {
            let parts: Vec<String> = self.edges.iter().map(|e| format!("e{}", e.0)).collect();
            write!(f, "{}", parts.join("."))
        }
    }
}

/// All paths of length exactly `n`, in lexicographic order.
pub fn paths_of_length(g: &TopGraph, n: usize) -> Vec<Path> {
    let mut cur: Vec<Path> = g.vertices().map(Path::vertex).collect();
    for _ in 0..n {
        let mut next = Vec::new();
        for p in &cur {
            // Extending on the right: next edge's range must equal the
            // current source.
            let v = p.source(g);
            for &e in g.r_preimage(v) {
                // r(e) = v = s(p), so p·e composes... but note the convention:
                // appended edge e satisfies source(prev) = range(e).
                let mut edges = p.edges.clone();
                edges.push(e);
                next.push(Path {
                    base: if p.edges.is_empty() { g.range(e) } else { p.base },
                    edges,
                });
            }
        }
        cur = next;
    }
    cur.sort();
    cur
}

/// All paths of length at most `n`, in (length, lexicographic) order.
pub fn paths_up_to(g: &TopGraph, n: usize) -> Vec<Path> {
    let mut out = Vec::new();
    for k in 0..=n {
        out.extend(paths_of_length(g, k));
    }
    out
}

/// Count paths of each length up to `n` via powers of the edge-count matrix;
/// independent of the path enumerator and used as its oracle in tests.
pub fn path_count_matrix_oracle(g: &TopGraph, n: usize) -> Vec<u64> {
    let v = g.vertex_count();
    // a[i][j] = number of edges with range i and source j.
    let mut a = vec![vec![0u64; v]; v];
    for e in g.edges() {
        a[g.range(e).0 as usize][g.source(e).0 as usize] += 1;
    }
    let mut counts = vec![v as u64];
    let mut power = {
        let mut id = vec![vec![0u64; v]; v];
        for (i, row) in id.iter_mut().enumerate() {
            row[i] = 1;
        }
        id
    };
    for _ in 0..n {
        let mut next = vec![vec![0u64; v]; v];
        for i in 0..v {
            for k in 0..v {
                if power[i][k] == 0 {
                    continue;
                }
                for j in 0..v {
                    next[i][j] += power[i][k] * a[k][j];
                }
            }
        }
        power = next;
        counts.push(power.iter().flatten().sum());
    }
    counts
}

/// Named graphs used across tests and docs.
pub mod samples {
    use super::*;

    /// Vertices {v, w}, one edge e with range v and source w.
    pub fn graph_a() -> TopGraph {
        let mut g = TopGraph::new();
        let v = g.add_vertex("v");
        let w = g.add_vertex("w");
        g.add_edge("e", v, w);
        g
    }

    /// One vertex with a single loop.
    pub fn loop_graph() -> TopGraph {
        let mut g = TopGraph::new();
        let v = g.add_vertex("v");
        g.add_edge("f", v, v);
        g
    }

    /// One vertex with two loops.
    pub fn two_loop_graph() -> TopGraph {
        let mut g = TopGraph::new();
        let v = g.add_vertex("v");
        g.add_edge("a", v, v);
        g.add_edge("b", v, v);
        g
    }

    /// Chain u -> v -> w: edges e1 (range u, source v) and e2 (range v, source w).
    pub fn two_edge_chain() -> TopGraph {
        let mut g = TopGraph::new();
        let u = g.add_vertex("u");
        let v = g.add_vertex("v");
        let w = g.add_vertex("w");
        g.add_edge("e1", u, v);
        g.add_edge("e2", v, w);
        g
    }
}

#[cfg(test)]
mod tests {
    use super::samples::*;
    use super::*;

    #[test]
    fn graph_a_classification() {
        let g = graph_a();
        let c = classify_vertices(&g);
        let v = g.vertex_by_name("v").unwrap();
        let w = g.vertex_by_name("w").unwrap();
        assert_eq!(c.finite, [v, w].into_iter().collect());
        assert_eq!(c.sources, [w].into_iter().collect());
        assert_eq!(c.regular, [v].into_iter().collect());
        assert_eq!(c.singular, [w].into_iter().collect());
    }

    #[test]
    fn loop_graph_classification() {
        let g = loop_graph();
        let c = classify_vertices(&g);
        let v = g.vertex_by_name("v").unwrap();
        assert!(c.sources.is_empty());
        assert_eq!(c.regular, [v].into_iter().collect());
        assert!(c.singular.is_empty());
    }

    #[test]
    fn chain_classification() {
        let g = two_edge_chain();
        let c = classify_vertices(&g);
        let u = g.vertex_by_name("u").unwrap();
        let v = g.vertex_by_name("v").unwrap();
        let w = g.vertex_by_name("w").unwrap();
        assert_eq!(c.regular, [u, v].into_iter().collect());
        assert_eq!(c.singular, [w].into_iter().collect());
        assert_eq!(c.sources, [w].into_iter().collect());
    }

    #[test]
    fn classification_partitions_vertices() {
        for g in [graph_a(), loop_graph(), two_loop_graph(), two_edge_chain()] {
            let c = classify_vertices(&g);
            let mut both = c.regular.clone();
            both.extend(c.singular.iter().copied());
            assert_eq!(both, c.finite);
            assert!(c.regular.intersection(&c.singular).next().is_none());
            assert!(c.sources.is_subset(&c.singular));
        }
    }

    #[test]
    fn graph_a_has_no_length_two_paths() {
        let g = graph_a();
        assert_eq!(paths_of_length(&g, 0).len(), 2);
        assert_eq!(paths_of_length(&g, 1).len(), 1);
        assert_eq!(paths_of_length(&g, 2).len(), 0);
    }

    #[test]
    fn path_counts_match_matrix_oracle() {
        for g in [graph_a(), loop_graph(), two_loop_graph(), two_edge_chain()] {
            let oracle = path_count_matrix_oracle(&g, 5);
            for (n, expect) in oracle.iter().enumerate() {
                assert_eq!(
                    paths_of_length(&g, n).len() as u64,
                    *expect,
                    "length {n} path count"
                );
            }
        }
    }

    #[test]
    fn concat_respects_endpoints() {
        let g = two_edge_chain();
        let e1 = g.edge_by_name("e1").unwrap();
        let e2 = g.edge_by_name("e2").unwrap();
        let p1 = Path::from_edges(&g, vec![e1]).unwrap();
        let p2 = Path::from_edges(&g, vec![e2]).unwrap();
        let p12 = p1.concat(&g, &p2).unwrap();
        assert_eq!(p12.len(), 2);
        assert_eq!(p12.range(), g.vertex_by_name("u").unwrap());
        assert_eq!(p12.source(&g), g.vertex_by_name("w").unwrap());
        assert!(p2.concat(&g, &p1).is_err());
        assert!(Path::from_edges(&g, vec![e2, e1]).is_err());

        // Length-0 units.
        let u = Path::vertex(g.vertex_by_name("u").unwrap());
        let v = Path::vertex(g.vertex_by_name("v").unwrap());
        assert_eq!(u.concat(&g, &p1).unwrap(), p1);
        assert_eq!(p1.concat(&g, &v).unwrap(), p1);
    }

    #[test]
    fn tail_and_prefix_are_inverse_slices() {
        let g = two_edge_chain();
        let e1 = g.edge_by_name("e1").unwrap();
        let e2 = g.edge_by_name("e2").unwrap();
        let p = Path::from_edges(&g, vec![e1, e2]).unwrap();
        assert_eq!(p.prefix(1).edges(), &[e1]);
        assert_eq!(p.tail(&g, 1).edges(), &[e2]);
        assert_eq!(p.tail(&g, 2), Path::vertex(g.vertex_by_name("w").unwrap()));
        assert!(p.prefix(1).is_prefix_of(&p));
    }

    #[test]
    fn acyclicity_detection() {
        assert!(samples::graph_a().is_acyclic());
        assert!(samples::two_edge_chain().is_acyclic());
        assert!(!samples::loop_graph().is_acyclic());
        assert!(!samples::two_loop_graph().is_acyclic());
    }
}
