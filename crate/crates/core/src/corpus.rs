//! Deterministic corpora of small graphs, systems, and cocycles.
//!
//! The acceptance sweeps and the command-line `corpus` run both draw from
//! these generators. Everything is reproducible: exhaustive families
//! enumerate in a fixed order, and random families derive from a
//! caller-supplied seed through a counter-based generator, so one seed
//! always yields the same instances and the same report bytes.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{basis_bisections, AlgebraContext, AlgebraElement};
use crate::graph::{EdgeId, TopGraph, VertexId};
use crate::groupoid::{Bisection, PartialSystem};
use crate::phase::{Phase, Scalar};
use crate::twist::{apply_coboundary, CoverCocycle};

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A short, stable label for a generated graph: the vertex count plus the
/// sorted range-source pairs of its edges.
pub fn graph_label(g: &TopGraph) -> String {
    let mut pairs: Vec<String> = g
        .edges()
        .map(|e| format!("{}-{}", g.range(e).0, g.source(e).0))
        .collect();
    pairs.sort();
    format!("{}v:{}", g.vertex_count(), pairs.join(","))
}

/// A stable label for a system: the point count plus the image table.
pub fn system_label(sys: &PartialSystem) -> String {
    let imgs: Vec<String> = sys
        .sigma
        .iter()
        .map(|o| match o {
            None => "-".to_string(),
            Some(j) => j.to_string(),
        })
        .collect();
    format!("{}p:{}", sys.names.len(), imgs.join(","))
}

fn build_graph(v: usize, pairs: &[(usize, usize)]) -> TopGraph {
    let mut g = TopGraph::new();
    for i in 0..v {
        g.add_vertex(&format!("v{i}"));
    }
    for (k, &(r, s)) in pairs.iter().enumerate() {
        g.add_edge(&format!("e{k}"), VertexId(r as u32), VertexId(s as u32));
    }
    g
}

/// Every graph with `1..=max_vertices` vertices and at most `max_edges`
/// edges, one per multiset of (range, source) pairs, in a fixed order.
pub fn exhaustive_graphs(max_vertices: usize, max_edges: usize) -> Vec<TopGraph> {
    let mut out = Vec::new();
    for v in 1..=max_vertices {
        let slots: Vec<(usize, usize)> = (0..v)
            .flat_map(|r| (0..v).map(move |s| (r, s)))
            .collect();
        out.push(build_graph(v, &[]));
        // Multisets of slots as nondecreasing index sequences, by size.
        let mut level: Vec<Vec<usize>> = vec![Vec::new()];
        for _ in 1..=max_edges {
            let mut next = Vec::new();
            for m in &level {
                let start = *m.last().unwrap_or(&0);
                for slot in start..slots.len() {
                    let mut grown = m.clone();
                    grown.push(slot);
                    let pairs: Vec<(usize, usize)> = grown.iter().map(|&i| slots[i]).collect();
                    out.push(build_graph(v, &pairs));
                    next.push(grown);
                }
            }
            level = next;
        }
    }
    out
}

/// `count` random graphs within the given sizes, derived from the seed.
pub fn seeded_graphs(
    seed: u64,
    count: usize,
    max_vertices: usize,
    max_edges: usize,
) -> Vec<TopGraph> {
    let mut rng = rng_for(seed);
    (0..count)
        .map(|_| {
            let v = rng.gen_range(1..=max_vertices);
            let e = rng.gen_range(0..=max_edges);
            let pairs: Vec<(usize, usize)> = (0..e)
                .map(|_| (rng.gen_range(0..v), rng.gen_range(0..v)))
                .collect();
            build_graph(v, &pairs)
        })
        .collect()
}

/// Random acyclic graphs: every edge runs from a lower-indexed range to a
/// strictly higher-indexed source, so following a path strictly increases
/// the vertex index and no cycle can close.
pub fn seeded_acyclic_graphs(
    seed: u64,
    count: usize,
    max_vertices: usize,
    max_edges: usize,
) -> Vec<TopGraph> {
    let mut rng = rng_for(seed);
    (0..count)
        .map(|_| {
            let v = rng.gen_range(2..=max_vertices.max(2));
            let e = rng.gen_range(0..=max_edges);
            let pairs: Vec<(usize, usize)> = (0..e)
                .map(|_| {
                    let r = rng.gen_range(0..v - 1);
                    let s = rng.gen_range(r + 1..v);
                    (r, s)
                })
                .collect();
            build_graph(v, &pairs)
        })
        .collect()
}

/// Every partial self-map on `1..=max_points` named points.
pub fn exhaustive_systems(max_points: usize) -> Vec<PartialSystem> {
    let mut out = Vec::new();
    for n in 1..=max_points {
        let names: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
        let radix = n + 1;
        let total = radix.pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let mut sigma = Vec::with_capacity(n);
            for _ in 0..n {
                let d = c % radix;
                c /= radix;
                sigma.push(if d == 0 { None } else { Some(d - 1) });
            }
            out.push(PartialSystem::new(names.clone(), sigma).expect("well-formed tables"));
        }
    }
    out
}

/// A named cocycle over a fixed graph.
#[derive(Clone, Debug)]
pub struct NamedCocycle {
    pub name: String,
    pub cc: CoverCocycle,
}

/// The two-chart cover with both charts the whole edge set and the constant
/// transition `e(num/den)` from the first chart to the second.
pub fn two_chart_constant(g: &TopGraph, num: i64, den: i64) -> CoverCocycle {
    let all: BTreeSet<EdgeId> = g.edges().collect();
    let mut transitions = BTreeMap::new();
    if !all.is_empty() {
        transitions.insert(
            (0, 1),
            all.iter().map(|&e| (e, Phase::turns(num, den))).collect(),
        );
        transitions.insert(
            (1, 0),
            all.iter().map(|&e| (e, Phase::turns(-num, den))).collect(),
        );
    }
    CoverCocycle {
        chart_names: vec!["a".to_string(), "b".to_string()],
        charts: vec![all.clone(), all],
        transitions,
    }
}

/// One random diagonal phase family over the charts, with twelfth-of-turn
/// values, suitable for [`apply_coboundary`].
pub fn seeded_coboundary(
    cc: &CoverCocycle,
    rng: &mut ChaCha8Rng,
) -> Vec<BTreeMap<EdgeId, Phase>> {
    cc.charts
        .iter()
        .map(|chart| {
            chart
                .iter()
                .map(|&e| (e, Phase::turns(rng.gen_range(0..12), 12)))
                .collect()
        })
        .collect()
}

/// The cocycle family run over every corpus instance: the trivial cover, the
/// constant root-of-unity two-chart cover, and seeded coboundary twists of
/// the latter.
pub fn cocycle_family(g: &TopGraph, seed: u64, coboundaries: usize) -> Vec<NamedCocycle> {
    let mut out = vec![
        NamedCocycle {
            name: "trivial".to_string(),
            cc: CoverCocycle::trivial(g),
        },
        NamedCocycle {
            name: "two-chart".to_string(),
            cc: two_chart_constant(g, 1, 3),
        },
    ];
    let mut rng = rng_for(seed);
    let base = two_chart_constant(g, 1, 3);
    for i in 0..coboundaries {
        let t = seeded_coboundary(&base, &mut rng);
        out.push(NamedCocycle {
            name: format!("coboundary-{i}"),
            cc: apply_coboundary(&base, &t).expect("diagonal family matches the charts"),
        });
    }
    out
}

/// How many transition values the cocycle stores.
pub fn transition_count(cc: &CoverCocycle) -> usize {
    cc.transitions.values().map(BTreeMap::len).sum()
}

/// Multiply the `index`-th transition value (in table order) by `e(1/5)`,
/// which breaks conjugate symmetry; `None` past the last entry.
pub fn mutate_one_transition(cc: &CoverCocycle, index: usize) -> Option<CoverCocycle> {
    let mut flat = 0usize;
    for (&pair, table) in &cc.transitions {
        for (&e, &v) in table {
            if flat == index {
                let mut out = cc.clone();
                out.transitions
                    .get_mut(&pair)
                    .expect("key just seen")
                    .insert(e, v * Phase::turns(1, 5));
                return Some(out);
            }
            flat += 1;
        }
    }
    None
}

/// `count` pairs of homogeneous elements over the context: each element
/// combines one or two equal-degree basis bisections with random exact
/// coefficients (small integers times twelfth-of-turn phases).
pub fn seeded_homogeneous_pairs(
    ctx: &AlgebraContext,
    bound: usize,
    seed: u64,
    count: usize,
) -> Vec<(AlgebraElement, AlgebraElement)> {
    let mut by_degree: BTreeMap<i64, Vec<Bisection>> = BTreeMap::new();
    for b in basis_bisections(ctx, bound) {
        by_degree.entry(b.degree()).or_default().push(b);
    }
    let degrees: Vec<i64> = by_degree.keys().copied().collect();
    let mut rng = rng_for(seed);
    let element = |rng: &mut ChaCha8Rng| {
        let d = degrees[rng.gen_range(0..degrees.len())];
        let pool = &by_degree[&d];
        let n = rng.gen_range(1..=2usize.min(pool.len()));
        let mut el = AlgebraElement::zero();
        for _ in 0..n {
            let b = pool[rng.gen_range(0..pool.len())].clone();
            let c = Scalar::from_int(rng.gen_range(1..=3))
                .mul_phase(Phase::turns(rng.gen_range(0..12), 12));
            el.add_term(b, c);
        }
        el
    };
    (0..count)
        .map(|_| (element(&mut rng), element(&mut rng)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{gauge_degree, GaugeDegree};
    use crate::graph::samples;

    #[test]
    fn exhaustive_graph_count_is_frozen() {
        // Multisets of size ≤ 4 over v² slots: 5 + 70 + 715.
        let gs = exhaustive_graphs(3, 4);
        assert_eq!(gs.len(), 790);
        let labels: BTreeSet<String> = gs.iter().map(graph_label).collect();
        assert_eq!(labels.len(), gs.len(), "labels must be distinct");
    }

    #[test]
    fn exhaustive_system_count_is_frozen() {
        // (n+1)^n maps for n = 1, 2, 3.
        assert_eq!(exhaustive_systems(3).len(), 2 + 9 + 64);
    }

    #[test]
    fn seeded_families_are_reproducible_and_shaped() {
        let a = seeded_graphs(7, 40, 4, 5);
        let b = seeded_graphs(7, 40, 4, 5);
        assert_eq!(
            a.iter().map(graph_label).collect::<Vec<_>>(),
            b.iter().map(graph_label).collect::<Vec<_>>()
        );
        let c = seeded_graphs(8, 40, 4, 5);
        assert_ne!(
            a.iter().map(graph_label).collect::<Vec<_>>(),
            c.iter().map(graph_label).collect::<Vec<_>>()
        );
        for g in &a {
            assert!(g.vertex_count() <= 4 && g.edge_count() <= 5);
        }
        for g in seeded_acyclic_graphs(11, 60, 4, 5) {
            assert!(g.is_acyclic());
        }
    }

    #[test]
    fn cocycle_family_validates_everywhere() {
        for g in [samples::two_loop_graph(), samples::graph_a()] {
            for nc in cocycle_family(&g, 3, 4) {
                nc.cc.validate(&g).unwrap();
            }
        }
    }

    #[test]
    fn single_transition_mutations_break_validation() {
        let g = samples::two_loop_graph();
        let cc = two_chart_constant(&g, 1, 3);
        let n = transition_count(&cc);
        assert_eq!(n, 4);
        for i in 0..n {
            let bad = mutate_one_transition(&cc, i).unwrap();
            assert!(bad.validate(&g).is_err(), "mutation {i} slipped through");
        }
        assert!(mutate_one_transition(&cc, n).is_none());
    }

    #[test]
    fn homogeneous_pairs_are_homogeneous() {
        let ctx = AlgebraContext::untwisted(samples::two_loop_graph());
        for (a, b) in seeded_homogeneous_pairs(&ctx, 2, 5, 50) {
            for el in [&a, &b] {
                assert!(matches!(
                    gauge_degree(el),
                    GaugeDegree::Homogeneous(_) | GaugeDegree::Zero
                ));
            }
        }
    }
}
