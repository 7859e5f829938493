//! Factor maps between finite graphs and the homomorphisms they induce.
//!
//! A factor map `(m⁰, m¹) : F → E` sends vertices to vertices and edges to
//! edges, intertwines range and source, and lifts edges uniquely through
//! sources: for every edge `e` of `E` and every vertex `u` of `F` over the
//! source of `e`, exactly one edge of `F` over `e` has source `u`. Regular
//! factor maps — those carrying singular vertices to singular vertices —
//! induce homomorphisms of the convolution algebras in the opposite
//! direction, sending a bisection indicator to the sum of the indicators of
//! its compatible lifts.
//!
//! The canonical example is the covering of an acyclic graph by its shift
//! graph: every boundary point goes to its range vertex and every
//! positive-length point to its first edge. Iterating it yields composable
//! chains on which functoriality of the induced maps can be checked
//! mechanically.

use std::collections::BTreeMap;

use crate::algebra::{
    arrow_coordinates, convolve, elements_equal, involution, matrix_model, normal_form, to_matrix,
    AlgebraContext, AlgebraElement,
};
use crate::boundary::BoundaryPath;
use crate::error::{Error, Result};
use crate::graph::{classify_vertices, EdgeId, Path, TopGraph, VertexId};
use crate::groupoid::{boundary_groupoid_elements, hat_graph, Bisection, HatGraph};
use crate::phase::Scalar;
use crate::report::Report;
use crate::twist::pullback_cocycle;

/// A graph morphism `F → E` given by its two tables: `m0[u]` is the image of
/// vertex `u` and `m1[f]` the image of edge `f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorMap {
    pub m0: Vec<VertexId>,
    pub m1: Vec<EdgeId>,
}

impl FactorMap {
    /// The identity map of a graph onto itself.
    pub fn identity(g: &TopGraph) -> FactorMap {
        FactorMap {
            m0: g.vertices().collect(),
            m1: g.edges().collect(),
        }
    }

    pub fn vertex_image(&self, u: VertexId) -> VertexId {
        self.m0[u.0 as usize]
    }

    pub fn edge_image(&self, f: EdgeId) -> EdgeId {
        self.m1[f.0 as usize]
    }
}

/// The tables must cover exactly the domain and land inside the codomain;
/// anything else is malformed data rather than a failed check.
fn check_shape(fm: &FactorMap, f: &TopGraph, e: &TopGraph) -> Result<()> {
    if fm.m0.len() != f.vertex_count() || fm.m1.len() != f.edge_count() {
        return Err(Error::InvalidGraph(format!(
            "tables sized {}+{} over a domain with {} vertices and {} edges",
            fm.m0.len(),
            fm.m1.len(),
            f.vertex_count(),
            f.edge_count()
        )));
    }
    if fm.m0.iter().any(|v| v.0 as usize >= e.vertex_count())
        || fm.m1.iter().any(|x| x.0 as usize >= e.edge_count())
    {
        return Err(Error::InvalidGraph(
            "an image falls outside the codomain".into(),
        ));
    }
    Ok(())
}

/// Check the factor-map axioms exhaustively: both intertwining identities and
/// the unique-lifting property, one record each. Failure details name the
/// first offending edge or (edge, vertex) pair.
pub fn validate_factor_map(
    fm: &FactorMap,
    f: &TopGraph,
    e: &TopGraph,
    instance: &str,
) -> Result<Report> {
    check_shape(fm, f, e)?;
    let mut rep = Report::new();

    let mut range_fail = String::new();
    let mut source_fail = String::new();
    for fe in f.edges() {
        let img = fm.edge_image(fe);
        if range_fail.is_empty() && e.range(img) != fm.vertex_image(f.range(fe)) {
            range_fail = format!("at edge {}", f.edge_name(fe));
        }
        if source_fail.is_empty() && e.source(img) != fm.vertex_image(f.source(fe)) {
            source_fail = format!("at edge {}", f.edge_name(fe));
        }
    }
    rep.add(
        "factor_range_intertwines",
        instance,
        range_fail.is_empty(),
        range_fail,
    );
    rep.add(
        "factor_source_intertwines",
        instance,
        source_fail.is_empty(),
        source_fail,
    );

    let mut lift_fail = String::new();
    for ee in e.edges() {
        for u in f.vertices() {
            if fm.vertex_image(u) != e.source(ee) {
                continue;
            }
            let count = f
                .edges()
                .filter(|&fe| fm.edge_image(fe) == ee && f.source(fe) == u)
                .count();
            if count != 1 && lift_fail.is_empty() {
                lift_fail = format!(
                    "edge {} lifts {} times at vertex {}",
                    e.edge_name(ee),
                    count,
                    f.vertex_name(u)
                );
            }
        }
    }
    rep.add(
        "factor_unique_lifting",
        instance,
        lift_fail.is_empty(),
        lift_fail,
    );
    Ok(rep)
}

/// Whether the axioms hold, with no report.
pub fn is_valid_factor_map(fm: &FactorMap, f: &TopGraph, e: &TopGraph) -> Result<bool> {
    Ok(validate_factor_map(fm, f, e, "f")?.all_pass())
}

/// Decide regularity by all three equivalent criteria and record their
/// mutual agreement: images of singular vertices are singular; every vertex
/// over a regular vertex is regular; every vertex over a regular vertex
/// receives an edge. Returns the verdict together with a report whose
/// failure details name the first witness vertex.
pub fn is_regular(
    fm: &FactorMap,
    f: &TopGraph,
    e: &TopGraph,
    instance: &str,
) -> Result<(bool, Report)> {
    check_shape(fm, f, e)?;
    let fc = classify_vertices(f);
    let ec = classify_vertices(e);

    let w1 = f
        .vertices()
        .find(|&u| fc.is_singular(u) && !ec.is_singular(fm.vertex_image(u)));
    let w2 = f
        .vertices()
        .find(|&u| ec.is_regular(fm.vertex_image(u)) && !fc.is_regular(u));
    let w3 = f
        .vertices()
        .find(|&u| ec.is_regular(fm.vertex_image(u)) && f.r_preimage(u).is_empty());

    let describe = |w: Option<VertexId>| match w {
        None => String::new(),
        Some(u) => format!("witness vertex {}", f.vertex_name(u)),
    };
    let mut rep = Report::new();
    rep.add(
        "regular_singular_to_singular",
        instance,
        w1.is_none(),
        describe(w1),
    );
    rep.add(
        "regular_fiber_over_regular",
        instance,
        w2.is_none(),
        describe(w2),
    );
    rep.add(
        "regular_fiber_receives_edge",
        instance,
        w3.is_none(),
        describe(w3),
    );
    let agree = w1.is_none() == w2.is_none() && w2.is_none() == w3.is_none();
    rep.add("regularity_criteria_agree", instance, agree, "");
    Ok((w1.is_none() && agree, rep))
}

/// The composite of `m : F → E` after `n : G → F`, acting as `m ∘ n : G → E`.
/// The maps are composable only when every image of `n` indexes into the
/// tables of `m`.
pub fn compose_factor_maps(m: &FactorMap, n: &FactorMap) -> Result<FactorMap> {
    for &u in &n.m0 {
        if u.0 as usize >= m.m0.len() {
            return Err(Error::NonComposable(format!(
                "vertex image {} outside the middle graph",
                u.0
            )));
        }
    }
    for &x in &n.m1 {
        if x.0 as usize >= m.m1.len() {
            return Err(Error::NonComposable(format!(
                "edge image {} outside the middle graph",
                x.0
            )));
        }
    }
    Ok(FactorMap {
        m0: n.m0.iter().map(|&u| m.m0[u.0 as usize]).collect(),
        m1: n.m1.iter().map(|&x| m.m1[x.0 as usize]).collect(),
    })
}

/// The canonical covering of an acyclic graph by its shift graph: a boundary
/// point goes to its range vertex and a positive-length point to its first
/// edge. The result is always valid, regular, and surjective on both
/// vertices and edges.
pub fn boundary_factor_map(g: &TopGraph) -> Result<(HatGraph, FactorMap)> {
    let hat = hat_graph(g)?;
    let m0 = hat.points.iter().map(BoundaryPath::range).collect();
    let m1 = hat
        .edge_points
        .iter()
        .map(|&i| hat.points[i].edge_at(0).expect("positive length"))
        .collect();
    Ok((hat, FactorMap { m0, m1 }))
}

/// Every vertex of the codomain is hit.
pub fn vertex_surjective(fm: &FactorMap, e: &TopGraph) -> bool {
    e.vertices().all(|v| fm.m0.contains(&v))
}

/// Every edge of the codomain is hit.
pub fn edge_surjective(fm: &FactorMap, e: &TopGraph) -> bool {
    e.edges().all(|x| fm.m1.contains(&x))
}

/// All lifts of a path through the map: paths upstairs carried edgewise onto
/// the given one, a vertex path lifting through the vertex fiber.
pub fn path_lifts(fm: &FactorMap, f: &TopGraph, p: &Path) -> Vec<Path> {
    if p.is_empty() {
        return f
            .vertices()
            .filter(|&u| fm.vertex_image(u) == p.range())
            .map(Path::vertex)
            .collect();
    }
    let mut partial: Vec<Vec<EdgeId>> = vec![Vec::new()];
    for &ee in p.edges() {
        let mut next = Vec::new();
        for stem in &partial {
            for fe in f.edges() {
                if fm.edge_image(fe) != ee {
                    continue;
                }
                if let Some(&last) = stem.last() {
                    if f.source(last) != f.range(fe) {
                        continue;
                    }
                }
                let mut grown = stem.clone();
                grown.push(fe);
                next.push(grown);
            }
        }
        if next.is_empty() {
            return Vec::new();
        }
        partial = next;
    }
    partial
        .into_iter()
        .map(|edges| Path::from_edges(f, edges).expect("composability enforced stepwise"))
        .collect()
}

/// The target algebra context of an induced homomorphism: the domain graph of
/// the map, carrying the cocycle pulled back along its edge table.
pub fn pullback_context(src: &AlgebraContext, f: TopGraph, fm: &FactorMap) -> Result<AlgebraContext> {
    let cc = pullback_cocycle(&src.cc, &f, &fm.m1)?;
    AlgebraContext::new(f, cc)
}

/// The homomorphism induced by a regular factor map `fm : F → E`, carrying
/// elements over `E` to elements over `F`: each bisection indicator goes to
/// the sum of the indicators of its lift pairs with a common source. The
/// target context must carry the cocycle pulled back along the edge table,
/// so that distinguished trivializations correspond and coefficients
/// transfer unchanged; the result is returned in normal form.
pub fn induced_hom(
    src: &AlgebraContext,
    dst: &AlgebraContext,
    fm: &FactorMap,
    a: &AlgebraElement,
) -> Result<AlgebraElement> {
    if !validate_factor_map(fm, &dst.g, &src.g, "hom")?.all_pass() {
        return Err(Error::InvalidGraph(
            "induced homomorphisms need a factor map".into(),
        ));
    }
    let (regular, _) = is_regular(fm, &dst.g, &src.g, "hom")?;
    if !regular {
        return Err(Error::NotRegular(
            "only regular factor maps induce homomorphisms".into(),
        ));
    }
    let pulled = pullback_cocycle(&src.cc, &dst.g, &fm.m1)?;
    if pulled.charts != dst.cc.charts || pulled.transitions != dst.cc.transitions {
        return Err(Error::ContextMismatch(
            "the target cocycle must be the pullback along the edge table".into(),
        ));
    }
    a.validate_in(src)?;
    let mut out = AlgebraElement::zero();
    for (b, c) in &a.terms {
        for mu in path_lifts(fm, &dst.g, &b.mu) {
            for nu in path_lifts(fm, &dst.g, &b.nu) {
                if mu.source(&dst.g) == nu.source(&dst.g) {
                    out.add_term(
                        Bisection {
                            mu: mu.clone(),
                            nu,
                        },
                        c.clone(),
                    );
                }
            }
        }
    }
    normal_form(dst, &out)
}

/// The matrix-unit basis of an acyclic algebra: one indicator `Z(x, y)` per
/// groupoid arrow, each supported on that single arrow because boundary
/// sources receive no edges.
pub fn arrow_basis(ctx: &AlgebraContext) -> Result<Vec<AlgebraElement>> {
    let (arrows, _) = boundary_groupoid_elements(&ctx.g, None)?;
    let mut out = Vec::new();
    for el in &arrows {
        let (BoundaryPath::Finite(x), BoundaryPath::Finite(y)) = (&el.x, &el.y) else {
            return Err(Error::CyclicGraph(
                "the arrow basis needs an acyclic graph".into(),
            ));
        };
        let b = Bisection::new(&ctx.g, x.clone(), y.clone())?;
        out.push(AlgebraElement::term(b, Scalar::one()));
    }
    Ok(out)
}

/// The images of the arrow basis of an acyclic source algebra, expressed in
/// sparse arrow coordinates of the target matrix model.
pub fn induced_hom_rows(
    src: &AlgebraContext,
    dst: &AlgebraContext,
    fm: &FactorMap,
) -> Result<Vec<BTreeMap<(usize, usize), Scalar>>> {
    let mm = matrix_model(dst)?;
    let mut rows = Vec::new();
    for unit in arrow_basis(src)? {
        let img = induced_hom(src, dst, fm, &unit)?;
        rows.push(arrow_coordinates(dst, &mm, &img)?);
    }
    Ok(rows)
}

/// Row rank of sparse scalar vectors by cross-multiplication elimination:
/// `row_j ← c_i·row_j − c_j·row_i` needs no division, so exact coefficients
/// stay exact. Scalars embed in the complex numbers, so the scaling by a
/// nonzero `c_i` preserves rank.
pub fn scalar_rows_rank<K: Ord + Clone>(rows: &[BTreeMap<K, Scalar>]) -> usize {
    let mut work: Vec<BTreeMap<K, Scalar>> = rows.to_vec();
    let mut rank = 0;
    for i in 0..work.len() {
        work[i].retain(|_, v| !v.is_zero());
        let Some((key, ci)) = work[i].iter().next().map(|(k, v)| (k.clone(), v.clone()))
        else {
            continue;
        };
        rank += 1;
        for j in (i + 1)..work.len() {
            let Some(cj) = work[j].get(&key).cloned() else {
                continue;
            };
            let mut next: BTreeMap<K, Scalar> = BTreeMap::new();
            for (k, v) in &work[j] {
                next.insert(k.clone(), v * &ci);
            }
            for (k, v) in &work[i] {
                let cur = next.remove(k).unwrap_or_else(Scalar::zero);
                let val = &cur - &(v * &cj);
                if !val.is_zero() {
                    next.insert(k.clone(), val);
                }
            }
            work[j] = next;
        }
    }
    rank
}

/// Whether the induced map is injective, decided by the exact rank of its
/// action on the arrow basis (acyclic instances only).
pub fn induced_hom_injective(
    src: &AlgebraContext,
    dst: &AlgebraContext,
    fm: &FactorMap,
) -> Result<bool> {
    let rows = induced_hom_rows(src, dst, fm)?;
    Ok(scalar_rows_rank(&rows) == rows.len())
}

/// Check that the induced map is multiplicative and involutive on every pair
/// from the arrow basis, comparing in normal form over the target.
pub fn check_induced_hom_star(
    src: &AlgebraContext,
    dst: &AlgebraContext,
    fm: &FactorMap,
    instance: &str,
) -> Result<Report> {
    let basis = arrow_basis(src)?;
    let mut mult_fail = String::new();
    let mut star_fail = String::new();
    for (i, a) in basis.iter().enumerate() {
        let ha = induced_hom(src, dst, fm, a)?;
        let astar = involution(src, a)?;
        let h_astar = induced_hom(src, dst, fm, &astar)?;
        if star_fail.is_empty() && !elements_equal(dst, &h_astar, &involution(dst, &ha)?)? {
            star_fail = format!("basis element {i}");
        }
        for (j, b) in basis.iter().enumerate() {
            let hb = induced_hom(src, dst, fm, b)?;
            let h_ab = induced_hom(src, dst, fm, &convolve(src, a, b)?)?;
            if mult_fail.is_empty() && !elements_equal(dst, &h_ab, &convolve(dst, &ha, &hb)?)? {
                mult_fail = format!("basis pair ({i}, {j})");
            }
        }
    }
    let mut rep = Report::new();
    rep.add(
        "induced_hom_multiplicative",
        instance,
        mult_fail.is_empty(),
        mult_fail,
    );
    rep.add(
        "induced_hom_involutive",
        instance,
        star_fail.is_empty(),
        star_fail,
    );
    Ok(rep)
}

/// Functoriality over the chain of shift-graph coverings
/// `hat(hat(E)) → hat(E) → E`: the homomorphism induced by the composite
/// equals the composite of the induced homomorphisms, on every arrow basis
/// element, both in normal form and as matrices over the innermost model.
pub fn check_hat_functoriality(g: &TopGraph, instance: &str) -> Result<Report> {
    let e_ctx = AlgebraContext::untwisted(g.clone());
    let (hat, m) = boundary_factor_map(g)?;
    let f_ctx = pullback_context(&e_ctx, hat.graph.clone(), &m)?;
    let (hat2, n) = boundary_factor_map(&hat.graph)?;
    let g_ctx = pullback_context(&f_ctx, hat2.graph.clone(), &n)?;
    let mn = compose_factor_maps(&m, &n)?;

    let mut rep = Report::new();
    rep.extend(validate_factor_map(&mn, &g_ctx.g, &e_ctx.g, instance)?);
    let (reg, reg_rep) = is_regular(&mn, &g_ctx.g, &e_ctx.g, instance)?;
    rep.extend(reg_rep);
    rep.add("composite_regular", instance, reg, "");

    let mm = matrix_model(&g_ctx)?;
    let mut fail = String::new();
    for (i, unit) in arrow_basis(&e_ctx)?.iter().enumerate() {
        let direct = induced_hom(&e_ctx, &g_ctx, &mn, unit)?;
        let staged = induced_hom(&f_ctx, &g_ctx, &n, &induced_hom(&e_ctx, &f_ctx, &m, unit)?)?;
        let same_element = elements_equal(&g_ctx, &direct, &staged)?;
        let same_matrix = crate::algebra::mat_eq(
            &to_matrix(&g_ctx, &mm, &direct)?,
            &to_matrix(&g_ctx, &mm, &staged)?,
        );
        if fail.is_empty() && !(same_element && same_matrix) {
            fail = format!("basis element {i}");
        }
    }
    rep.add("induced_hom_functorial", instance, fail.is_empty(), fail);
    Ok(rep)
}
