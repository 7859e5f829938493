//! The shift groupoid over a boundary path space.
//!
//! Elements are triples `(x, k1 - k2, y)` of boundary points whose shifted
//! tails agree, `σ^{k1} x = σ^{k2} y`. Every element is stored with its
//! canonical witness pair — the lexicographically least `(k1, k2)` on the
//! diagonal `k1 - k2 = n` — so structural equality of elements is equality in
//! the groupoid.
//!
//! Finite singly generated dynamical systems are folded into the same
//! machinery: a partial map `σ : dom σ → T` becomes the graph with vertex set
//! `T`, one edge per domain point, range the identity and source `σ`, and the
//! boundary path space of that graph recovers `T` point for point.

use crate::boundary::{boundary_path_set, canonical_boundary_from, BoundaryPath};
use crate::error::{Error, Result};
use crate::graph::{classify_vertices, Path, TopGraph, VertexId};
use std::collections::BTreeSet;

/// Apply the one-step shift `k` times; `None` when the path is too short.
pub fn shift_times(g: &TopGraph, x: &BoundaryPath, k: usize) -> Option<BoundaryPath> {
    let mut cur = x.clone();
    for _ in 0..k {
        match cur.shift(g) {
            Ok(next) => cur = next,
            Err(_) => return None,
        }
    }
    Some(cur)
}

/// A groupoid element `(x, n, y)` with its canonical shift witnesses.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct GroupoidElement {
    pub x: BoundaryPath,
    pub n: i64,
    pub y: BoundaryPath,
    pub k1: usize,
    pub k2: usize,
}

impl GroupoidElement {
    pub fn range(&self) -> &BoundaryPath {
        &self.x
    }

    pub fn source(&self) -> &BoundaryPath {
        &self.y
    }

    pub fn display(&self, g: &TopGraph) -> String {
        format!("({}, {}, {})", self.x.display(g), self.n, self.y.display(g))
    }
}

/// How many shifts of `x` stay inside the cycle-free part, plus one full
/// cycle period (1 for finite paths): past this the tail states repeat.
fn tail_profile(x: &BoundaryPath) -> (usize, usize) {
    match x {
        BoundaryPath::Finite(p) => (p.len(), 1),
        BoundaryPath::EventuallyPeriodic { head, cycle } => (head.len(), cycle.len()),
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// The least witness pair `(k1, k2)` with `k1 - k2 = n` and
/// `σ^{k1} x = σ^{k2} y`, searched along the diagonal. Once both shifted
/// points sit inside their cycles the pair of tails recurs with period
/// lcm(cycle lengths), so the search is complete after preperiod + period
/// steps.
pub fn canonical_pair(
    g: &TopGraph,
    x: &BoundaryPath,
    n: i64,
    y: &BoundaryPath,
) -> Result<(usize, usize)> {
    let (hx, cx) = tail_profile(x);
    let (hy, cy) = tail_profile(y);
    let bound = hx + hy + (cx / gcd(cx, cy)) * cy + 1;
    let base1 = n.max(0) as usize;
    let base2 = (-n).max(0) as usize;
    for j in 0..=bound {
        let (k1, k2) = (base1 + j, base2 + j);
        match (shift_times(g, x, k1), shift_times(g, y, k2)) {
            (Some(a), Some(b)) => {
                if a == b {
                    return Ok((k1, k2));
                }
            }
            _ => break,
        }
    }
    Err(Error::NotInGroupoid(format!(
        "({}, {}, {})",
        x.display(g),
        n,
        y.display(g)
    )))
}

/// Build `(x, n, y)` with canonical witnesses, verifying membership.
pub fn make_element(
    g: &TopGraph,
    x: BoundaryPath,
    n: i64,
    y: BoundaryPath,
) -> Result<GroupoidElement> {
    let (k1, k2) = canonical_pair(g, &x, n, &y)?;
    Ok(GroupoidElement { x, n, y, k1, k2 })
}

/// The unit at a boundary point.
pub fn unit_at(g: &TopGraph, x: BoundaryPath) -> GroupoidElement {
    make_element(g, x.clone(), 0, x).expect("units always exist")
}

/// Composition `(x, m, y)(y, n, z) = (x, m + n, z)`.
pub fn compose(
    g: &TopGraph,
    a: &GroupoidElement,
    b: &GroupoidElement,
) -> Result<GroupoidElement> {
    if a.y != b.x {
        return Err(Error::NonComposable(format!(
            "{} then {}",
            a.display(g),
            b.display(g)
        )));
    }
    make_element(g, a.x.clone(), a.n + b.n, b.y.clone())
}

/// Inversion `(x, n, y)^{-1} = (y, -n, x)`.
pub fn inverse(g: &TopGraph, a: &GroupoidElement) -> GroupoidElement {
    make_element(g, a.y.clone(), -a.n, a.x.clone()).expect("inverse of a member is a member")
}

/// Enumerate groupoid elements over the boundary path space: all of them for
/// an acyclic graph, otherwise those visible within the bound (boundary paths
/// with |head| + |cycle| or length <= bound and shift counts <= bound).
pub fn boundary_groupoid_elements(
    g: &TopGraph,
    bound: Option<usize>,
) -> Result<(Vec<GroupoidElement>, bool)> {
    let bset = boundary_path_set(g, bound)?;
    let kmax = if bset.complete {
        g.vertex_count()
    } else {
        bound.unwrap_or(0)
    };
    let mut out: BTreeSet<GroupoidElement> = BTreeSet::new();
    for x in &bset.paths {
        for y in &bset.paths {
            for k1 in 0..=kmax {
                let Some(a) = shift_times(g, x, k1) else { break };
                for k2 in 0..=kmax {
                    let Some(b) = shift_times(g, y, k2) else { break };
                    if a == b {
                        let n = k1 as i64 - k2 as i64;
                        out.insert(make_element(g, x.clone(), n, y.clone())?);
                    }
                }
            }
        }
    }
    Ok((out.into_iter().collect(), bset.complete))
}

/// The graph of the one-step shift on a boundary path space: vertices are the
/// boundary points, edges the points with at least one edge, range the
/// identity and source the shift. Complete only for acyclic graphs.
#[derive(Clone, Debug)]
pub struct HatGraph {
    pub graph: TopGraph,
    /// `points[i]` is the boundary point behind vertex `i`.
    pub points: Vec<BoundaryPath>,
    /// `edge_points[j]` is the index into `points` behind edge `j`.
    pub edge_points: Vec<usize>,
}

pub fn hat_graph(g: &TopGraph) -> Result<HatGraph> {
    if !g.is_acyclic() {
        return Err(Error::CyclicGraph(
            "the shift graph is only materialized over a finite boundary".into(),
        ));
    }
    let points = boundary_path_set(g, None)?.paths;
    let mut hat = TopGraph::new();
    for p in &points {
        hat.add_vertex(&p.display(g));
    }
    let index_of = |p: &BoundaryPath| points.iter().position(|q| q == p).expect("closed set");
    let mut edge_points = Vec::new();
    for (i, p) in points.iter().enumerate() {
        if p.len() == Some(0) {
            continue;
        }
        let shifted = p.shift(g).expect("length >= 1");
        hat.add_edge(
            &p.display(g),
            VertexId(i as u32),
            VertexId(index_of(&shifted) as u32),
        );
        edge_points.push(i);
    }
    Ok(HatGraph {
        graph: hat,
        points,
        edge_points,
    })
}

/// A compact open bisection `Z(μ, ν)`: the set of `(μz, |μ| - |ν|, νz)` over
/// boundary points `z` with range `s(μ) = s(ν)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Bisection {
    pub mu: Path,
    pub nu: Path,
}

impl Bisection {
    pub fn new(g: &TopGraph, mu: Path, nu: Path) -> Result<Bisection> {
        if mu.source(g) != nu.source(g) {
            return Err(Error::NonComposable(format!(
                "Z({}, {}) needs a common source",
                mu.display(g),
                nu.display(g)
            )));
        }
        Ok(Bisection { mu, nu })
    }

    /// The degree `|μ| - |ν|` of every element of the bisection.
    pub fn degree(&self) -> i64 {
        self.mu.len() as i64 - self.nu.len() as i64
    }

    pub fn display(&self, g: &TopGraph) -> String {
        format!("Z({}, {})", self.mu.display(g), self.nu.display(g))
    }

    /// Does the groupoid element factor as `(μz, |μ| - |ν|, νz)`?
    pub fn contains(&self, g: &TopGraph, el: &GroupoidElement) -> bool {
        if el.n != self.degree() {
            return false;
        }
        let (m, n) = (self.mu.len(), self.nu.len());
        el.x.prefix(g, m).as_ref() == Some(&self.mu)
            && el.y.prefix(g, n).as_ref() == Some(&self.nu)
            && shift_times(g, &el.x, m) == shift_times(g, &el.y, n)
    }
}

/// A finite singly generated dynamical system: a partial self-map of a finite
/// point set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialSystem {
    pub names: Vec<String>,
    /// `sigma[i] = Some(j)` when point `i` maps to point `j`.
    pub sigma: Vec<Option<usize>>,
}

impl PartialSystem {
    pub fn new(names: Vec<String>, sigma: Vec<Option<usize>>) -> Result<PartialSystem> {
        if names.len() != sigma.len() {
            return Err(Error::InvalidGraph("system tables differ in length".into()));
        }
        let mut seen = BTreeSet::new();
        for n in &names {
            if !seen.insert(n.clone()) {
                return Err(Error::InvalidGraph(format!("duplicate point {n}")));
            }
        }
        if let Some(j) = sigma.iter().flatten().find(|&&j| j >= names.len()) {
            return Err(Error::InvalidGraph(format!("image index {j} out of range")));
        }
        Ok(PartialSystem { names, sigma })
    }

    /// The graph with one vertex per point and one edge per domain point,
    /// range the identity and source the map.
    pub fn to_graph(&self) -> TopGraph {
        let mut g = TopGraph::new();
        for n in &self.names {
            g.add_vertex(n);
        }
        for (i, img) in self.sigma.iter().enumerate() {
            if let Some(j) = *img {
                g.add_edge(&self.names[i], VertexId(i as u32), VertexId(j as u32));
            }
        }
        g
    }

    /// The boundary point of [`PartialSystem::to_graph`] tracing the maximal
    /// orbit of point `i`. Every vertex of the system graph has at most one
    /// incoming-range edge, so the orbit path is unique and this map is a
    /// bijection onto the boundary path space.
    pub fn point_to_boundary(&self, g: &TopGraph, i: usize) -> BoundaryPath {
        let class = classify_vertices(g);
        canonical_boundary_from(g, &class, VertexId(i as u32))
    }
}
