//! The twisted convolution algebra of the boundary groupoid.
//!
//! Elements are finite linear combinations of indicator functions of compact
//! open bisections `Z(μ, ν)`. Each indicator is normalized over its
//! distinguished trivialization of the twist (witness pair `(|μ|, |ν|)`,
//! canonical charts, phase 1), so products and adjoints pick up transition
//! phases exactly where the twist dictates. Indicators are linearly
//! dependent — at a regular source vertex `1_{Z(μ, ν)} = Σ_e 1_{Z(μe, νe)}`
//! over the incoming edges — so a normal form (expand until supports are
//! disjoint, then contract full one-edge families) makes equality decidable.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};

use crate::boundary::{attach, boundary_path_set, canonical_boundary_from, BoundaryPath};
use crate::correspondence::{
    inner_product, left_action, phi_decomposition, right_action, BaseFunction,
    CorrespondenceElement,
};
use crate::error::{Error, Result};
use crate::graph::{
    classify_vertices, paths_up_to, EdgeId, Path, TopGraph, VertexClassification, VertexId,
};
use crate::groupoid::{boundary_groupoid_elements, Bisection, PartialSystem};
use crate::phase::{Phase, Scalar};
use crate::report::Report;
use crate::twist::{CoverCocycle, TwistContext, TwistElement};

/// A graph together with a validated cover cocycle: the ambient data every
/// algebra operation needs.
pub struct AlgebraContext {
    pub g: TopGraph,
    pub class: VertexClassification,
    pub cc: CoverCocycle,
}

impl AlgebraContext {
    pub fn new(g: TopGraph, cc: CoverCocycle) -> Result<AlgebraContext> {
        cc.validate(&g)?;
        let class = classify_vertices(&g);
        Ok(AlgebraContext { g, class, cc })
    }

    /// The untwisted algebra of a graph (one chart, no transitions).
    pub fn untwisted(g: TopGraph) -> AlgebraContext {
        let cc = CoverCocycle::trivial(&g);
        let class = classify_vertices(&g);
        AlgebraContext { g, class, cc }
    }

    /// The algebra of a finite partial dynamical system, through its graph
    /// presentation (one vertex per point, one edge per domain point).
    pub fn from_system(sys: &PartialSystem, cc: CoverCocycle) -> Result<AlgebraContext> {
        AlgebraContext::new(sys.to_graph(), cc)
    }

    fn twist(&self) -> TwistContext<'_> {
        TwistContext::new(&self.g, &self.cc)
    }
}

/// An element of the twisted convolution algebra: a finite span of bisection
/// indicators with nonzero coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AlgebraElement {
    pub terms: BTreeMap<Bisection, Scalar>,
}

impl AlgebraElement {
    pub fn zero() -> AlgebraElement {
        AlgebraElement::default()
    }

    pub fn term(b: Bisection, c: Scalar) -> AlgebraElement {
        let mut out = AlgebraElement::zero();
        out.add_term(b, c);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Accumulate a coefficient, dropping the term when it cancels.
    pub fn add_term(&mut self, b: Bisection, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(b) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let sum = o.get() + &c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &AlgebraElement) -> AlgebraElement {
        let mut out = self.clone();
        for (b, c) in &other.terms {
            out.add_term(b.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Scalar) -> AlgebraElement {
        let mut out = AlgebraElement::zero();
        for (b, v) in &self.terms {
            out.add_term(b.clone(), v * c);
        }
        out
    }

    pub fn sub(&self, other: &AlgebraElement) -> AlgebraElement {
        self.add(&other.scale(&Scalar::from_int(-1)))
    }

    /// Every path mentioned by the element must live in the context's graph.
    pub fn validate_in(&self, ctx: &AlgebraContext) -> Result<()> {
        for b in self.terms.keys() {
            for p in [&b.mu, &b.nu] {
                if !path_valid(&ctx.g, p) {
                    return Err(Error::ContextMismatch(format!(
                        "path {p} does not live in this graph"
                    )));
                }
            }
            if b.mu.source(&ctx.g) != b.nu.source(&ctx.g) {
                return Err(Error::ContextMismatch(format!(
                    "legs of {} end at different vertices here",
                    b.display(&ctx.g)
                )));
            }
        }
        Ok(())
    }

    pub fn display(&self, g: &TopGraph) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        self.terms
            .iter()
            .map(|(b, c)| format!("({}) {}", c, b.display(g)))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

fn path_valid(g: &TopGraph, p: &Path) -> bool {
    if (p.range().0 as usize) >= g.vertex_count() {
        return false;
    }
    if p.is_empty() {
        return true;
    }
    if p.edges().iter().any(|e| (e.0 as usize) >= g.edge_count()) {
        return false;
    }
    g.range(p.edge_at(0)) == p.range()
        && p.edges().windows(2).all(|w| g.source(w[0]) == g.range(w[1]))
}

/// The distinguished trivialization over an arrow of `b` with inner point
/// `z`: witness pair `(|μ|, |ν|)`, canonical charts, phase 1.
fn section_of(ctx: &AlgebraContext, b: &Bisection, z: &BoundaryPath) -> Result<TwistElement> {
    let x = attach(&ctx.g, &b.mu, z)?;
    let y = attach(&ctx.g, &b.nu, z)?;
    let charts_out = b
        .mu
        .edges()
        .iter()
        .map(|&e| ctx.cc.canonical_chart(e))
        .collect::<Result<Vec<_>>>()?;
    let charts_in = b
        .nu
        .edges()
        .iter()
        .map(|&e| ctx.cc.canonical_chart(e))
        .collect::<Result<Vec<_>>>()?;
    ctx.twist().element(
        x,
        y,
        b.mu.len(),
        b.nu.len(),
        Phase::one(),
        charts_out,
        charts_in,
    )
}

/// Evaluate the normalized indicator of `b` at a twist element lying over the
/// arrow of `b` with inner point `inner`: the circle coordinate relative to
/// the distinguished trivialization.
fn indicator_eval(
    ctx: &AlgebraContext,
    b: &Bisection,
    lam: &TwistElement,
    inner: &BoundaryPath,
) -> Result<Phase> {
    let tctx = ctx.twist();
    let s = section_of(ctx, b, inner)?;
    if lam.x != s.x || lam.y != s.y || lam.degree() != s.degree() {
        return Err(Error::NotInGroupoid(
            "element does not lie over the expected arrow".into(),
        ));
    }
    Ok(tctx.canonicalize(lam)?.phase * tctx.canonicalize(&s)?.phase.conj())
}

/// How representatives are presented while computing convolution phases. The
/// outcome never depends on the choice; exposing it makes that checkable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SectionChoice {
    /// Canonical charts, phase 1.
    Canonical,
    /// Re-present through the largest available chart at every level and
    /// shear by a fixed unit phase before use.
    Decorated,
}

fn alternative_chart(cc: &CoverCocycle, e: EdgeId) -> usize {
    (0..cc.charts.len())
        .rev()
        .find(|&a| cc.charts[a].contains(&e))
        .expect("validated cover")
}

fn decorate(ctx: &AlgebraContext, a: &TwistElement) -> Result<TwistElement> {
    let tctx = ctx.twist();
    let mut out = a.clone();
    for i in 0..out.k1 {
        let e = out.x.edge_at(i).expect("witness level");
        out = tctx.chart_change_out(&out, i, alternative_chart(&ctx.cc, e))?;
    }
    for j in 0..out.k2 {
        let e = out.y.edge_at(j).expect("witness level");
        out = tctx.chart_change_in(&out, j, alternative_chart(&ctx.cc, e))?;
    }
    out.phase = out.phase * Phase::turns(1, 7);
    Ok(out)
}

/// The product of two bisection indicators: `None` when no boundary point
/// matches both inner legs, otherwise the composed bisection together with
/// its unimodular structure factor. The factor is read off the twist at a
/// sample arrow via an arbitrary lift of the right factor — the formula is
/// lift-independent, which `SectionChoice::Decorated` exercises.
fn basis_product(
    ctx: &AlgebraContext,
    u: &Bisection,
    v: &Bisection,
    sec: SectionChoice,
) -> Result<Option<(Bisection, Phase)>> {
    let g = &ctx.g;
    let (w_bis, inner1, inner2, z0);
    if u.nu.is_prefix_of(&v.mu) {
        // ν' = ν β: the composite is Z(μ β, ξ).
        let beta = v.mu.tail(g, u.nu.len());
        let w = Bisection::new(g, u.mu.concat(g, &beta)?, v.nu.clone())?;
        let z = canonical_boundary_from(g, &ctx.class, w.nu.source(g));
        inner1 = attach(g, &beta, &z)?;
        inner2 = z.clone();
        z0 = z;
        w_bis = w;
    } else if v.mu.is_prefix_of(&u.nu) {
        // ν = ν' β: the composite is Z(μ, ξ β).
        let beta = u.nu.tail(g, v.mu.len());
        let w = Bisection::new(g, u.mu.clone(), v.nu.concat(g, &beta)?)?;
        let z = canonical_boundary_from(g, &ctx.class, w.nu.source(g));
        inner1 = z.clone();
        inner2 = attach(g, &beta, &z)?;
        z0 = z;
        w_bis = w;
    } else {
        return Ok(None);
    }
    let tctx = ctx.twist();
    let s_w = section_of(ctx, &w_bis, &z0)?;
    let s_v = section_of(ctx, v, &inner2)?;
    let lam2 = match sec {
        SectionChoice::Canonical => s_v,
        SectionChoice::Decorated => decorate(ctx, &s_v)?,
    };
    let chi_v = indicator_eval(ctx, v, &lam2, &inner2)?;
    let lam1 = tctx.mul(&s_w, &tctx.inv(&lam2)?)?;
    let chi_u = indicator_eval(ctx, u, &lam1, &inner1)?;
    Ok(Some((w_bis, chi_u * chi_v)))
}

/// Convolution with canonical sections.
pub fn convolve(
    ctx: &AlgebraContext,
    a: &AlgebraElement,
    b: &AlgebraElement,
) -> Result<AlgebraElement> {
    convolve_with_section(ctx, a, b, SectionChoice::Canonical)
}

/// Convolution with an explicit presentation choice; the result is returned
/// in normal form.
pub fn convolve_with_section(
    ctx: &AlgebraContext,
    a: &AlgebraElement,
    b: &AlgebraElement,
    sec: SectionChoice,
) -> Result<AlgebraElement> {
    a.validate_in(ctx)?;
    b.validate_in(ctx)?;
    let mut out = AlgebraElement::zero();
    for (u, c) in &a.terms {
        for (v, d) in &b.terms {
            if let Some((w, factor)) = basis_product(ctx, u, v, sec)? {
                out.add_term(w, (c * d).mul_phase(factor));
            }
        }
    }
    normal_form(ctx, &out)
}

/// The adjoint `f*(λ) = conj(f(λ⁻¹))`: legs swap and coefficients conjugate,
/// with the inversion factor read off the twist at a sample arrow.
pub fn involution(ctx: &AlgebraContext, a: &AlgebraElement) -> Result<AlgebraElement> {
    a.validate_in(ctx)?;
    let tctx = ctx.twist();
    let mut out = AlgebraElement::zero();
    for (b, c) in &a.terms {
        let flipped = Bisection::new(&ctx.g, b.nu.clone(), b.mu.clone())?;
        let z = canonical_boundary_from(&ctx.g, &ctx.class, flipped.mu.source(&ctx.g));
        let s_flip = section_of(ctx, &flipped, &z)?;
        let inv = tctx.inv(&s_flip)?;
        let chi = indicator_eval(ctx, b, &inv, &z)?;
        out.add_term(flipped, c.conj().mul_phase(chi.conj()));
    }
    normal_form(ctx, &out)
}

fn accumulate(terms: &mut BTreeMap<Bisection, Scalar>, b: Bisection, c: Scalar) {
    if c.is_zero() {
        return;
    }
    match terms.entry(b) {
        Entry::Vacant(v) => {
            v.insert(c);
        }
        Entry::Occupied(mut o) => {
            let sum = o.get() + &c;
            if sum.is_zero() {
                o.remove();
            } else {
                *o.get_mut() = sum;
            }
        }
    }
}

/// Is `child = parent · α` for a (possibly empty) common tail `α` appended to
/// both legs? An arrow shared by two bisections identifies one as such an
/// extension of the other, so non-extensions are disjoint.
fn is_extension_of(child: &Bisection, parent: &Bisection) -> bool {
    parent.mu.is_prefix_of(&child.mu)
        && parent.nu.is_prefix_of(&child.nu)
        && child.mu.len() - parent.mu.len() == child.nu.len() - parent.nu.len()
        && child.mu.edges()[parent.mu.len()..] == child.nu.edges()[parent.nu.len()..]
}

/// The canonical representative of an element: expand overlapping terms until
/// supports are pairwise disjoint, combine, then contract every full family
/// of one-edge extensions carrying a common coefficient back to its parent.
/// Two elements are equal as functions exactly when their normal forms
/// coincide.
pub fn normal_form(ctx: &AlgebraContext, a: &AlgebraElement) -> Result<AlgebraElement> {
    let g = &ctx.g;
    let mut terms: BTreeMap<Bisection, Scalar> = BTreeMap::new();
    for (b, c) in &a.terms {
        accumulate(&mut terms, b.clone(), c.clone());
    }
    // Expansion. A parent with a proper extension present splits one step;
    // its source is regular because the extension continues past it.
    loop {
        let mut target: Option<Bisection> = None;
        'search: for p in terms.keys() {
            for q in terms.keys() {
                if p != q && is_extension_of(q, p) {
                    target = Some(p.clone());
                    break 'search;
                }
            }
        }
        let Some(parent) = target else { break };
        let c = terms.remove(&parent).expect("just found");
        for &e in g.r_preimage(parent.mu.source(g)) {
            let step = Path::from_edges(g, vec![e])?;
            let child = Bisection::new(
                g,
                parent.mu.concat(g, &step)?,
                parent.nu.concat(g, &step)?,
            )?;
            accumulate(&mut terms, child, c.clone());
        }
    }
    // Contraction, bottom-up until stable.
    loop {
        let mut changed = false;
        let candidates: Vec<Bisection> = terms
            .keys()
            .filter_map(|t| {
                let (m, n) = (t.mu.len(), t.nu.len());
                if m >= 1 && n >= 1 && t.mu.edge_at(m - 1) == t.nu.edge_at(n - 1) {
                    Some(Bisection {
                        mu: t.mu.prefix(m - 1),
                        nu: t.nu.prefix(n - 1),
                    })
                } else {
                    None
                }
            })
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        for parent in candidates {
            let sibs = g.r_preimage(parent.mu.source(g));
            if sibs.is_empty() {
                continue;
            }
            let mut coeff: Option<Scalar> = None;
            let mut family = Vec::new();
            let mut full = true;
            for &e in sibs {
                let step = Path::from_edges(g, vec![e])?;
                let child = Bisection::new(
                    g,
                    parent.mu.concat(g, &step)?,
                    parent.nu.concat(g, &step)?,
                )?;
                match terms.get(&child) {
                    Some(c) => {
                        if let Some(c0) = &coeff {
                            if c0 != c {
                                full = false;
                                break;
                            }
                        } else {
                            coeff = Some(c.clone());
                        }
                        family.push(child);
                    }
                    None => {
                        full = false;
                        break;
                    }
                }
            }
            if full {
                if let Some(c) = coeff {
                    for child in family {
                        terms.remove(&child);
                    }
                    accumulate(&mut terms, parent, c);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    Ok(AlgebraElement { terms })
}

/// Equality as functions on the twist: the difference has empty normal form.
pub fn elements_equal(
    ctx: &AlgebraContext,
    a: &AlgebraElement,
    b: &AlgebraElement,
) -> Result<bool> {
    Ok(normal_form(ctx, &a.sub(b))?.is_zero())
}

/// The multiplicative identity: the sum of the vertex cylinders `Z(v, v)`.
pub fn unit_element(ctx: &AlgebraContext) -> AlgebraElement {
    let mut out = AlgebraElement::zero();
    for v in ctx.g.vertices() {
        let p = Path::vertex(v);
        out.add_term(
            Bisection {
                mu: p.clone(),
                nu: p,
            },
            Scalar::one(),
        );
    }
    out
}

/// The diagonal representation of a vertex function: `Σ_v h(v) · 1_{Z(v, v)}`.
pub fn pi_vertex(ctx: &AlgebraContext, h: &BaseFunction) -> AlgebraElement {
    let _ = ctx;
    let mut out = AlgebraElement::zero();
    for v in h.support().collect::<Vec<_>>() {
        let p = Path::vertex(v);
        out.add_term(
            Bisection {
                mu: p.clone(),
                nu: p,
            },
            h.eval(v),
        );
    }
    out
}

/// The diagonal representation of a scaled cylinder indicator `Z(μ)`.
pub fn pi_cylinder(ctx: &AlgebraContext, mu: &Path, c: Scalar) -> Result<AlgebraElement> {
    let b = Bisection::new(&ctx.g, mu.clone(), mu.clone())?;
    let out = AlgebraElement::term(b, c);
    out.validate_in(ctx)?;
    Ok(out)
}

/// The diagonal representation of a point mass. Finite boundary points are
/// isolated (their cylinder is the singleton); no other point mass has a
/// finite cylinder presentation.
pub fn pi_point_mass(ctx: &AlgebraContext, p: &BoundaryPath) -> Result<AlgebraElement> {
    match p {
        BoundaryPath::Finite(q) => {
            if !crate::boundary::is_boundary(&ctx.g, q) {
                return Err(Error::NotInDomain(format!(
                    "{} is not a boundary point",
                    q.display(&ctx.g)
                )));
            }
            pi_cylinder(ctx, q, Scalar::one())
        }
        BoundaryPath::EventuallyPeriodic { .. } => Err(Error::UnsupportedFunction(
            "a point mass at a non-isolated point is not locally constant".into(),
        )),
    }
}

/// The correspondence representation: `δ_e ↦ 1_{Z(e, s(e))}`, extended
/// linearly using canonical-chart values (so the image is independent of the
/// chart presentation of the argument).
pub fn psi(ctx: &AlgebraContext, x: &CorrespondenceElement) -> Result<AlgebraElement> {
    let mut out = AlgebraElement::zero();
    for e in ctx.g.edges() {
        let val = x.canonical_value(&ctx.cc, e)?;
        if val.is_zero() {
            continue;
        }
        let step = Path::from_edges(&ctx.g, vec![e])?;
        let b = Bisection::new(&ctx.g, step, Path::vertex(ctx.g.source(e)))?;
        out.add_term(b, val);
    }
    Ok(out)
}

/// The gauge degree of an element, when defined.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GaugeDegree {
    /// The zero element (homogeneous of every degree).
    Zero,
    /// All terms share the degree `|μ| - |ν|`.
    Homogeneous(i64),
    /// Terms of different degrees are mixed.
    Mixed,
}

/// Read the gauge degree off the presentation. Expansion and contraction
/// preserve term degrees, so the answer does not depend on the presentation.
pub fn gauge_degree(a: &AlgebraElement) -> GaugeDegree {
    let mut deg: Option<i64> = None;
    for b in a.terms.keys() {
        match deg {
            None => deg = Some(b.degree()),
            Some(d) if d == b.degree() => {}
            Some(_) => return GaugeDegree::Mixed,
        }
    }
    match deg {
        None => GaugeDegree::Zero,
        Some(d) => GaugeDegree::Homogeneous(d),
    }
}

/// Check the module identities tying the two representations together over a
/// spanning family: `ψ(x)* ψ(y) = π(⟨x, y⟩)`, `ψ(h·x) = π(h) ψ(x)`, and the
/// mirror identity `ψ(x·h) = ψ(x) π(h)`.
pub fn check_toeplitz(ctx: &AlgebraContext, instance: &str) -> Result<Report> {
    let g = &ctx.g;
    let mut rep = Report::new();
    let mut xs: Vec<CorrespondenceElement> = Vec::new();
    for e in g.edges() {
        xs.push(CorrespondenceElement::delta(&ctx.cc, e, Scalar::one())?);
        xs.push(CorrespondenceElement::delta(
            &ctx.cc,
            e,
            Scalar::from_phase(Phase::turns(1, 5)),
        )?);
    }
    let edges: Vec<EdgeId> = g.edges().collect();
    if edges.len() >= 2 {
        let d0 = CorrespondenceElement::delta(&ctx.cc, edges[0], Scalar::from_int(2))?;
        let d1 = CorrespondenceElement::delta(
            &ctx.cc,
            edges[1],
            Scalar::from_phase(Phase::turns(1, 3)),
        )?;
        xs.push(d0.add(&d1));
    }

    let mut ok = true;
    let mut detail = String::new();
    let mut pairs = 0usize;
    'outer: for x in &xs {
        for y in &xs {
            let lhs = convolve(ctx, &involution(ctx, &psi(ctx, x)?)?, &psi(ctx, y)?)?;
            let rhs = pi_vertex(ctx, &inner_product(g, &ctx.cc, x, y)?);
            pairs += 1;
            if !elements_equal(ctx, &lhs, &rhs)? {
                ok = false;
                detail = format!("inner identity fails at pair {pairs}");
                break 'outer;
            }
        }
    }
    rep.add(
        "toeplitz_inner",
        instance,
        ok,
        if ok { format!("{pairs} pairs") } else { detail },
    );

    let mut hs: Vec<BaseFunction> = g.vertices().map(BaseFunction::indicator).collect();
    hs.push(BaseFunction::new(
        g.vertices()
            .enumerate()
            .map(|(i, v)| {
                (
                    v,
                    Scalar::from_int(i as i64 + 1).mul_phase(Phase::turns(i as i64, 7)),
                )
            })
            .collect(),
    ));
    let mut left_ok = true;
    let mut left_detail = String::new();
    let mut right_ok = true;
    let mut right_detail = String::new();
    let mut cases = 0usize;
    for h in &hs {
        for x in &xs {
            cases += 1;
            let lhs = psi(ctx, &left_action(g, h, x))?;
            let rhs = convolve(ctx, &pi_vertex(ctx, h), &psi(ctx, x)?)?;
            if left_ok && !elements_equal(ctx, &lhs, &rhs)? {
                left_ok = false;
                left_detail = format!("left action fails at case {cases}");
            }
            let lhs_r = psi(ctx, &right_action(g, x, h))?;
            let rhs_r = convolve(ctx, &psi(ctx, x)?, &pi_vertex(ctx, h))?;
            if right_ok && !elements_equal(ctx, &lhs_r, &rhs_r)? {
                right_ok = false;
                right_detail = format!("right action fails at case {cases}");
            }
        }
    }
    rep.add(
        "toeplitz_left_action",
        instance,
        left_ok,
        if left_ok {
            format!("{cases} cases")
        } else {
            left_detail
        },
    );
    rep.add(
        "toeplitz_right_action",
        instance,
        right_ok,
        if right_ok {
            format!("{cases} cases")
        } else {
            right_detail
        },
    );
    Ok(rep)
}

/// Check covariance over the regular vertices: the one-edge frame of each
/// vertex indicator satisfies `Σ_i ψ(x_i) ψ(x_i)* = π(1_v)`. Singular
/// vertices must be rejected by the frame decomposition itself.
pub fn check_covariance(ctx: &AlgebraContext, instance: &str) -> Result<Report> {
    let g = &ctx.g;
    let mut rep = Report::new();
    let mut reg_ok = true;
    let mut reg_detail = String::new();
    let mut regs = 0usize;
    let mut sing_ok = true;
    let mut sing_detail = String::new();
    let mut sings = 0usize;
    for v in g.vertices() {
        let f = BaseFunction::indicator(v);
        if ctx.class.is_regular(v) {
            regs += 1;
            let xs = phi_decomposition(g, &ctx.cc, &f)?;
            let mut lhs = AlgebraElement::zero();
            for x in &xs {
                let px = psi(ctx, x)?;
                lhs = lhs.add(&convolve(ctx, &px, &involution(ctx, &px)?)?);
            }
            let rhs = pi_vertex(ctx, &f);
            if reg_ok && !elements_equal(ctx, &lhs, &rhs)? {
                reg_ok = false;
                reg_detail = format!("fails at vertex {}", g.vertex_name(v));
            }
        } else {
            sings += 1;
            if sing_ok && phi_decomposition(g, &ctx.cc, &f).is_ok() {
                sing_ok = false;
                sing_detail = format!(
                    "decomposition accepted singular vertex {}",
                    g.vertex_name(v)
                );
            }
        }
    }
    rep.add(
        "covariance_regular",
        instance,
        reg_ok,
        if reg_ok {
            format!("{regs} regular vertices")
        } else {
            reg_detail
        },
    );
    if sings > 0 {
        rep.add(
            "covariance_singular_excluded",
            instance,
            sing_ok,
            if sing_ok {
                format!("{sings} singular vertices")
            } else {
                sing_detail
            },
        );
    }
    Ok(rep)
}

pub type Matrix = Vec<Vec<Scalar>>;

pub fn mat_zero(n: usize) -> Matrix {
    vec![vec![Scalar::zero(); n]; n]
}

pub fn mat_identity(n: usize) -> Matrix {
    let mut m = mat_zero(n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Scalar::one();
    }
    m
}

pub fn mat_unit(n: usize, i: usize, j: usize) -> Matrix {
    let mut m = mat_zero(n);
    m[i][j] = Scalar::one();
    m
}

pub fn mat_add(a: &Matrix, b: &Matrix) -> Matrix {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + y).collect())
        .collect()
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let mut out = mat_zero(n);
    for i in 0..n {
        for (k, aik) in a[i].iter().enumerate() {
            if aik.is_zero() {
                continue;
            }
            for (j, bkj) in b[k].iter().enumerate() {
                if bkj.is_zero() {
                    continue;
                }
                out[i][j] = &out[i][j] + &(aik * bkj);
            }
        }
    }
    out
}

pub fn mat_adjoint(a: &Matrix) -> Matrix {
    let n = a.len();
    let mut out = mat_zero(n);
    for i in 0..n {
        for j in 0..n {
            out[j][i] = a[i][j].conj();
        }
    }
    out
}

pub fn mat_eq(a: &Matrix, b: &Matrix) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(ra, rb)| ra.len() == rb.len() && ra.iter().zip(rb).all(|(x, y)| x == y))
}

/// The boundary-point matrix model of an acyclic graph: points index rows and
/// columns, with one full matrix block per shift orbit.
#[derive(Clone, Debug)]
pub struct MatrixModel {
    pub points: Vec<BoundaryPath>,
    pub orbits: Vec<Vec<usize>>,
}

impl MatrixModel {
    pub fn index_of(&self, p: &BoundaryPath) -> Option<usize> {
        self.points.iter().position(|q| q == p)
    }

    /// `Σ |orbit|²`: the number of matrix units.
    pub fn dimension(&self) -> usize {
        self.orbits.iter().map(|o| o.len() * o.len()).sum()
    }
}

fn uf_find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Build the matrix model. Cyclic graphs have no finite model and are
/// rejected.
pub fn matrix_model(ctx: &AlgebraContext) -> Result<MatrixModel> {
    if !ctx.g.is_acyclic() {
        return Err(Error::CyclicGraph(
            "the finite matrix model needs an acyclic graph".into(),
        ));
    }
    let points = boundary_path_set(&ctx.g, None)?.paths;
    let (els, complete) = boundary_groupoid_elements(&ctx.g, None)?;
    debug_assert!(complete);
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for el in &els {
        let i = points.iter().position(|p| p == &el.x).expect("complete");
        let j = points.iter().position(|p| p == &el.y).expect("complete");
        let (ri, rj) = (uf_find(&mut parent, i), uf_find(&mut parent, j));
        if ri != rj {
            parent[ri.max(rj)] = ri.min(rj);
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = uf_find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    Ok(MatrixModel {
        points,
        orbits: groups.into_values().collect(),
    })
}

/// The nonzero matrix entries of an element, indexed by `(row, column)`
/// point indices: the entry at the arrow `(μz, νz)` is the coefficient of
/// `Z(μ, ν)` times the indicator's circle coordinate at the canonical
/// trivialization of that arrow. Each arrow carries an honest basis vector
/// of the model, so linear questions about elements (independence, rank)
/// reduce to linear algebra on these sparse maps.
pub fn arrow_coordinates(
    ctx: &AlgebraContext,
    mm: &MatrixModel,
    a: &AlgebraElement,
) -> Result<BTreeMap<(usize, usize), Scalar>> {
    a.validate_in(ctx)?;
    let tctx = ctx.twist();
    let mut out: BTreeMap<(usize, usize), Scalar> = BTreeMap::new();
    for (b, c) in &a.terms {
        let src = b.mu.source(&ctx.g);
        for z in &mm.points {
            if z.range() != src {
                continue;
            }
            let x = attach(&ctx.g, &b.mu, z)?;
            let y = attach(&ctx.g, &b.nu, z)?;
            let i = mm
                .index_of(&x)
                .ok_or_else(|| Error::NotInDomain(format!("missing point {}", x.display(&ctx.g))))?;
            let j = mm
                .index_of(&y)
                .ok_or_else(|| Error::NotInDomain(format!("missing point {}", y.display(&ctx.g))))?;
            let s = section_of(ctx, b, z)?;
            let coord = tctx.canonicalize(&s)?.phase.conj();
            let cur = out.remove(&(i, j)).unwrap_or_else(Scalar::zero);
            out.insert((i, j), &cur + &c.mul_phase(coord));
        }
    }
    out.retain(|_, v| !v.is_zero());
    Ok(out)
}

/// Represent an element as a dense block matrix over the model's points.
pub fn to_matrix(ctx: &AlgebraContext, mm: &MatrixModel, a: &AlgebraElement) -> Result<Matrix> {
    let n = mm.points.len();
    let mut m = mat_zero(n);
    for ((i, j), c) in arrow_coordinates(ctx, mm, a)? {
        m[i][j] = c;
    }
    Ok(m)
}

/// Every bisection with both legs of length at most `bound`, in order.
pub fn basis_bisections(ctx: &AlgebraContext, bound: usize) -> Vec<Bisection> {
    let ps = paths_up_to(&ctx.g, bound);
    let mut out = Vec::new();
    for mu in &ps {
        for nu in &ps {
            if mu.source(&ctx.g) == nu.source(&ctx.g) {
                out.push(Bisection {
                    mu: mu.clone(),
                    nu: nu.clone(),
                });
            }
        }
    }
    out.sort();
    out
}

/// The multiplication table of the bounded basis, every product in normal
/// form. Twisting the cocycle by a coboundary leaves this table unchanged.
pub fn structure_constants(
    ctx: &AlgebraContext,
    bound: usize,
) -> Result<BTreeMap<(Bisection, Bisection), AlgebraElement>> {
    let basis = basis_bisections(ctx, bound);
    let mut out = BTreeMap::new();
    for u in &basis {
        for v in &basis {
            let prod = convolve(
                ctx,
                &AlgebraElement::term(u.clone(), Scalar::one()),
                &AlgebraElement::term(v.clone(), Scalar::one()),
            )?;
            out.insert((u.clone(), v.clone()), prod);
        }
    }
    Ok(out)
}

/// The generator word `S_μ = ψ(δ_{μ₁}) ⋯ ψ(δ_{μ_k})`, with `π` of the base
/// vertex for `|μ| = 0`; its normal form is the indicator of `Z(μ, s(μ))`.
pub fn generator_word(ctx: &AlgebraContext, mu: &Path) -> Result<AlgebraElement> {
    if mu.is_empty() {
        return Ok(pi_vertex(ctx, &BaseFunction::indicator(mu.range())));
    }
    let mut acc: Option<AlgebraElement> = None;
    for &e in mu.edges() {
        let s = psi(
            ctx,
            &CorrespondenceElement::delta(&ctx.cc, e, Scalar::one())?,
        )?;
        acc = Some(match acc {
            None => s,
            Some(prev) => convolve(ctx, &prev, &s)?,
        });
    }
    Ok(acc.expect("nonempty path"))
}

fn finite_path(p: &BoundaryPath) -> Option<&Path> {
    match p {
        BoundaryPath::Finite(q) => Some(q),
        BoundaryPath::EventuallyPeriodic { .. } => None,
    }
}

/// Verify the structural isomorphism between the generator picture and the
/// groupoid picture of the algebra. Acyclic graphs get the complete
/// finite-dimensional comparison against the boundary matrix model; cyclic
/// graphs get the bounded formal comparison: all relations, the grading of
/// the generators, the unit, and derivability of every bounded bisection
/// indicator from generator words.
pub fn verify_main_isomorphism(
    ctx: &AlgebraContext,
    instance: &str,
    bound: usize,
) -> Result<Report> {
    let mut rep = Report::new();
    let g = &ctx.g;
    if g.is_acyclic() {
        let mm = matrix_model(ctx)?;
        let (arrows, _) = boundary_groupoid_elements(g, None)?;
        rep.add(
            "model_dimension",
            instance,
            arrows.len() == mm.dimension(),
            format!("{} arrows, dimension {}", arrows.len(), mm.dimension()),
        );

        let n = mm.points.len();
        let mut p_mats: BTreeMap<VertexId, Matrix> = BTreeMap::new();
        for v in g.vertices() {
            p_mats.insert(
                v,
                to_matrix(ctx, &mm, &pi_vertex(ctx, &BaseFunction::indicator(v)))?,
            );
        }
        let mut s_mats: BTreeMap<EdgeId, Matrix> = BTreeMap::new();
        for e in g.edges() {
            let x = CorrespondenceElement::delta(&ctx.cc, e, Scalar::one())?;
            s_mats.insert(e, to_matrix(ctx, &mm, &psi(ctx, &x)?)?);
        }

        let mut rel_ok = true;
        let mut rel_detail = String::new();
        let mut sum = mat_zero(n);
        for m in p_mats.values() {
            sum = mat_add(&sum, m);
        }
        if !mat_eq(&sum, &mat_identity(n)) {
            rel_ok = false;
            rel_detail = "vertex projections do not sum to the identity".into();
        }
        for (u, pu) in &p_mats {
            for (v, pv) in &p_mats {
                let expect = if u == v { pu.clone() } else { mat_zero(n) };
                if rel_ok && !mat_eq(&mat_mul(pu, pv), &expect) {
                    rel_ok = false;
                    rel_detail = "vertex projections are not orthogonal".into();
                }
            }
        }
        for (&e, se) in &s_mats {
            for (&f, sf) in &s_mats {
                let lhs = mat_mul(&mat_adjoint(se), sf);
                let expect = if e == f {
                    p_mats[&g.source(e)].clone()
                } else {
                    mat_zero(n)
                };
                if rel_ok && !mat_eq(&lhs, &expect) {
                    rel_ok = false;
                    rel_detail = format!(
                        "edge relation fails at ({}, {})",
                        g.edge_name(e),
                        g.edge_name(f)
                    );
                }
            }
        }
        for v in g.vertices().filter(|&v| ctx.class.is_regular(v)) {
            let mut acc = mat_zero(n);
            for &e in g.r_preimage(v) {
                acc = mat_add(&acc, &mat_mul(&s_mats[&e], &mat_adjoint(&s_mats[&e])));
            }
            if rel_ok && !mat_eq(&acc, &p_mats[&v]) {
                rel_ok = false;
                rel_detail = format!("sum relation fails at vertex {}", g.vertex_name(v));
            }
        }
        rep.add("generator_relations", instance, rel_ok, rel_detail);

        let mut derive_ok = true;
        let mut derive_detail = String::new();
        let mut derived: BTreeSet<(usize, usize)> = BTreeSet::new();
        let mut units: Vec<(Bisection, Matrix)> = Vec::new();
        for el in &arrows {
            let xp = finite_path(&el.x).expect("acyclic points are finite").clone();
            let yp = finite_path(&el.y).expect("acyclic points are finite").clone();
            let i = mm.index_of(&el.x).expect("complete");
            let j = mm.index_of(&el.y).expect("complete");
            let cand = convolve(
                ctx,
                &generator_word(ctx, &xp)?,
                &involution(ctx, &generator_word(ctx, &yp)?)?,
            )?;
            let target = mat_unit(n, i, j);
            let bis = Bisection::new(g, xp, yp)?;
            let direct = AlgebraElement::term(bis.clone(), Scalar::one());
            if derive_ok
                && (!mat_eq(&to_matrix(ctx, &mm, &cand)?, &target)
                    || !elements_equal(ctx, &cand, &direct)?)
            {
                derive_ok = false;
                derive_detail = format!("unit at ({i}, {j}) not derived");
            }
            derived.insert((i, j));
            units.push((bis, target));
        }
        rep.add(
            "matrix_units_derivable",
            instance,
            derive_ok && derived.len() == mm.dimension(),
            if derive_ok {
                format!("{} of {}", derived.len(), mm.dimension())
            } else {
                derive_detail
            },
        );

        let mut sc_ok = true;
        let mut sc_detail = String::new();
        let mut products = 0usize;
        'pairs: for (b1, m1) in &units {
            for (b2, m2) in &units {
                let sym = convolve(
                    ctx,
                    &AlgebraElement::term(b1.clone(), Scalar::one()),
                    &AlgebraElement::term(b2.clone(), Scalar::one()),
                )?;
                products += 1;
                if !mat_eq(&to_matrix(ctx, &mm, &sym)?, &mat_mul(m1, m2)) {
                    sc_ok = false;
                    sc_detail = format!(
                        "product {} · {} disagrees with the matrix product",
                        b1.display(g),
                        b2.display(g)
                    );
                    break 'pairs;
                }
            }
        }
        rep.add(
            "structure_constants_match",
            instance,
            sc_ok,
            if sc_ok {
                format!("{products} products")
            } else {
                sc_detail
            },
        );

        let mut adj_ok = true;
        let mut adj_detail = String::new();
        for (b1, m1) in &units {
            let star = involution(ctx, &AlgebraElement::term(b1.clone(), Scalar::one()))?;
            if adj_ok && !mat_eq(&to_matrix(ctx, &mm, &star)?, &mat_adjoint(m1)) {
                adj_ok = false;
                adj_detail = format!("adjoint of {} disagrees", b1.display(g));
            }
        }
        rep.add("involution_matches_adjoint", instance, adj_ok, adj_detail);
    } else {
        rep.extend(check_toeplitz(ctx, instance)?);
        rep.extend(check_covariance(ctx, instance)?);

        let mut grade_ok = true;
        for e in g.edges() {
            let x = CorrespondenceElement::delta(&ctx.cc, e, Scalar::one())?;
            if gauge_degree(&psi(ctx, &x)?) != GaugeDegree::Homogeneous(1) {
                grade_ok = false;
            }
        }
        for v in g.vertices() {
            if gauge_degree(&pi_vertex(ctx, &BaseFunction::indicator(v)))
                != GaugeDegree::Homogeneous(0)
            {
                grade_ok = false;
            }
        }
        rep.add("generator_grading", instance, grade_ok, "");

        let one = unit_element(ctx);
        let mut unit_ok = true;
        for e in g.edges() {
            let x = CorrespondenceElement::delta(&ctx.cc, e, Scalar::one())?;
            let s = psi(ctx, &x)?;
            if !elements_equal(ctx, &convolve(ctx, &one, &s)?, &s)?
                || !elements_equal(ctx, &convolve(ctx, &s, &one)?, &s)?
            {
                unit_ok = false;
            }
        }
        rep.add("unit_identity", instance, unit_ok, "");

        let basis = basis_bisections(ctx, bound);
        let mut gen_ok = true;
        let mut gen_detail = String::new();
        let mut count = 0usize;
        for b in &basis {
            let cand = convolve(
                ctx,
                &generator_word(ctx, &b.mu)?,
                &involution(ctx, &generator_word(ctx, &b.nu)?)?,
            )?;
            count += 1;
            if gen_ok
                && !elements_equal(
                    ctx,
                    &cand,
                    &AlgebraElement::term(b.clone(), Scalar::one()),
                )?
            {
                gen_ok = false;
                gen_detail = format!("{} is not a generator word", b.display(g));
            }
        }
        rep.add(
            "bisections_generated",
            instance,
            gen_ok,
            if gen_ok {
                format!("{count} bisections with legs up to length {bound}")
            } else {
                gen_detail
            },
        );
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::samples;
    use crate::twist::apply_coboundary;
    use proptest::prelude::*;

    fn vpath(g: &TopGraph, name: &str) -> Path {
        Path::vertex(g.vertex_by_name(name).unwrap())
    }

    fn epath(g: &TopGraph, names: &[&str]) -> Path {
        let edges = names
            .iter()
            .map(|n| g.edge_by_name(n).unwrap())
            .collect::<Vec<_>>();
        Path::from_edges(g, edges).unwrap()
    }

    fn bis(g: &TopGraph, mu: Path, nu: Path) -> Bisection {
        Bisection::new(g, mu, nu).unwrap()
    }

    fn one_term(g: &TopGraph, mu: Path, nu: Path) -> AlgebraElement {
        AlgebraElement::term(bis(g, mu, nu), Scalar::one())
    }

    fn two_chart_loop() -> AlgebraContext {
        let g = samples::loop_graph();
        let e = g.edge_by_name("f").unwrap();
        let cc = CoverCocycle {
            chart_names: vec!["a".into(), "b".into()],
            charts: vec![BTreeSet::from([e]), BTreeSet::from([e])],
            transitions: BTreeMap::from([
                ((0, 1), BTreeMap::from([(e, Phase::turns(1, 3))])),
                ((1, 0), BTreeMap::from([(e, Phase::turns(-1, 3))])),
            ]),
        };
        AlgebraContext::new(g, cc).unwrap()
    }

    fn twisted_two_loop() -> AlgebraContext {
        let g = samples::two_loop_graph();
        let a = g.edge_by_name("a").unwrap();
        let b = g.edge_by_name("b").unwrap();
        let cc = CoverCocycle {
            chart_names: vec!["big".into(), "small".into()],
            charts: vec![BTreeSet::from([a, b]), BTreeSet::from([a])],
            transitions: BTreeMap::from([
                ((0, 1), BTreeMap::from([(a, Phase::turns(1, 4))])),
                ((1, 0), BTreeMap::from([(a, Phase::turns(-1, 4))])),
            ]),
        };
        AlgebraContext::new(g, cc).unwrap()
    }

    #[test]
    fn products_compose_and_annihilate() {
        let ctx = AlgebraContext::untwisted(samples::graph_a());
        let g = &ctx.g;
        let zew = one_term(g, epath(g, &["e"]), vpath(g, "w"));
        let zwe = one_term(g, vpath(g, "w"), epath(g, &["e"]));
        let prod = convolve(&ctx, &zew, &zwe).unwrap();
        let zee = one_term(g, epath(g, &["e"]), epath(g, &["e"]));
        assert!(elements_equal(&ctx, &prod, &zee).unwrap());
        // The normal form contracts the full one-edge family at v.
        let zvv = one_term(g, vpath(g, "v"), vpath(g, "v"));
        assert_eq!(prod, zvv);

        let ctx2 = AlgebraContext::untwisted(samples::two_loop_graph());
        let g2 = &ctx2.g;
        let p = convolve(
            &ctx2,
            &one_term(g2, vpath(g2, "v"), epath(g2, &["a"])),
            &one_term(g2, epath(g2, &["b"]), vpath(g2, "v")),
        )
        .unwrap();
        assert!(p.is_zero());
    }

    #[test]
    fn normal_form_resolves_expansion_relations() {
        let ctx = AlgebraContext::untwisted(samples::two_loop_graph());
        let g = &ctx.g;
        let whole = one_term(g, vpath(g, "v"), vpath(g, "v"));
        let split = one_term(g, epath(g, &["a"]), epath(g, &["a"]))
            .add(&one_term(g, epath(g, &["b"]), epath(g, &["b"])));
        assert!(elements_equal(&ctx, &whole, &split).unwrap());
        assert!(normal_form(&ctx, &whole.sub(&split)).unwrap().is_zero());
        // Unequal coefficients do not contract.
        let uneven = one_term(g, epath(g, &["a"]), epath(g, &["a"]))
            .add(&one_term(g, epath(g, &["b"]), epath(g, &["b"])).scale(&Scalar::from_int(2)));
        assert_eq!(normal_form(&ctx, &uneven).unwrap().terms.len(), 2);
        assert!(!elements_equal(&ctx, &whole, &uneven).unwrap());
    }

    #[test]
    fn involution_swaps_legs_and_conjugates() {
        let ctx = AlgebraContext::untwisted(samples::graph_a());
        let g = &ctx.g;
        let a = AlgebraElement::term(
            bis(g, epath(g, &["e"]), vpath(g, "w")),
            Scalar::from_phase(Phase::turns(1, 3)),
        );
        let star = involution(&ctx, &a).unwrap();
        let expect = AlgebraElement::term(
            bis(g, vpath(g, "w"), epath(g, &["e"])),
            Scalar::from_phase(Phase::turns(-1, 3)),
        );
        assert_eq!(star, expect);
        assert_eq!(involution(&ctx, &star).unwrap(), a);
    }

    #[test]
    fn unit_is_identity() {
        let ctx = AlgebraContext::untwisted(samples::two_loop_graph());
        let g = &ctx.g;
        let one = unit_element(&ctx);
        let a = one_term(g, epath(g, &["a"]), epath(g, &["b", "a"]))
            .add(&one_term(g, vpath(g, "v"), epath(g, &["b"])).scale(&Scalar::from_int(2)));
        assert!(elements_equal(&ctx, &convolve(&ctx, &one, &a).unwrap(), &a).unwrap());
        assert!(elements_equal(&ctx, &convolve(&ctx, &a, &one).unwrap(), &a).unwrap());
    }

    #[test]
    fn generator_maps_hit_frozen_presentations() {
        let ctx = AlgebraContext::untwisted(samples::graph_a());
        let g = &ctx.g;
        let w = g.vertex_by_name("w").unwrap();
        let pi_w = pi_vertex(&ctx, &BaseFunction::indicator(w));
        assert_eq!(pi_w, one_term(g, vpath(g, "w"), vpath(g, "w")));

        let e = g.edge_by_name("e").unwrap();
        let de = CorrespondenceElement::delta(&ctx.cc, e, Scalar::one()).unwrap();
        let se = psi(&ctx, &de).unwrap();
        assert_eq!(se, one_term(g, epath(g, &["e"]), vpath(g, "w")));

        let pm = pi_point_mass(&ctx, &BoundaryPath::Finite(epath(g, &["e"]))).unwrap();
        assert_eq!(pm, one_term(g, epath(g, &["e"]), epath(g, &["e"])));

        let ctx2 = AlgebraContext::untwisted(samples::loop_graph());
        let g2 = &ctx2.g;
        let ep = BoundaryPath::eventually_periodic(
            g2,
            Path::vertex(g2.vertex_by_name("v").unwrap()),
            epath(g2, &["f"]),
        )
        .unwrap();
        assert!(matches!(
            pi_point_mass(&ctx2, &ep),
            Err(Error::UnsupportedFunction(_))
        ));
    }

    #[test]
    fn gauge_degree_cases() {
        let ctx = AlgebraContext::untwisted(samples::two_loop_graph());
        let g = &ctx.g;
        assert_eq!(gauge_degree(&AlgebraElement::zero()), GaugeDegree::Zero);
        let p = pi_vertex(&ctx, &BaseFunction::indicator(g.vertex_by_name("v").unwrap()));
        assert_eq!(gauge_degree(&p), GaugeDegree::Homogeneous(0));
        let a = one_term(g, epath(g, &["a"]), vpath(g, "v"));
        assert_eq!(gauge_degree(&a), GaugeDegree::Homogeneous(1));
        assert_eq!(gauge_degree(&p.add(&a)), GaugeDegree::Mixed);
        let b = one_term(g, epath(g, &["a", "b"]), vpath(g, "v"));
        let prod = convolve(&ctx, &involution(&ctx, &a).unwrap(), &b).unwrap();
        assert_eq!(gauge_degree(&prod), GaugeDegree::Homogeneous(1));
    }

    #[test]
    fn toeplitz_and_covariance_pass_on_samples() {
        let contexts = [
            AlgebraContext::untwisted(samples::graph_a()),
            AlgebraContext::untwisted(samples::two_edge_chain()),
            AlgebraContext::untwisted(samples::two_loop_graph()),
            two_chart_loop(),
            twisted_two_loop(),
        ];
        for (i, ctx) in contexts.iter().enumerate() {
            let name = format!("sample{i}");
            let rep = check_toeplitz(ctx, &name).unwrap();
            assert!(rep.all_pass(), "toeplitz on {name}:\n{}", rep.render());
            let rep = check_covariance(ctx, &name).unwrap();
            assert!(rep.all_pass(), "covariance on {name}:\n{}", rep.render());
        }
    }

    #[test]
    fn matrix_model_shapes_are_frozen() {
        let ctx = AlgebraContext::untwisted(samples::graph_a());
        let g = &ctx.g;
        let mm = matrix_model(&ctx).unwrap();
        assert_eq!(mm.points.len(), 2);
        assert_eq!(mm.orbits, vec![vec![0, 1]]);
        assert_eq!(mm.dimension(), 4);
        let zew = one_term(g, epath(g, &["e"]), vpath(g, "w"));
        let m = to_matrix(&ctx, &mm, &zew).unwrap();
        let i = mm
            .index_of(&BoundaryPath::Finite(epath(g, &["e"])))
            .unwrap();
        let j = mm.index_of(&BoundaryPath::Finite(vpath(g, "w"))).unwrap();
        assert!(mat_eq(&m, &mat_unit(2, i, j)));

        let chain = AlgebraContext::untwisted(samples::two_edge_chain());
        let mm = matrix_model(&chain).unwrap();
        assert_eq!(mm.points.len(), 3);
        assert_eq!(mm.dimension(), 9);

        let lone = TopGraph::build(&["u".to_string()], &[]).unwrap();
        let lone = AlgebraContext::untwisted(lone);
        assert_eq!(matrix_model(&lone).unwrap().dimension(), 1);

        assert!(matches!(
            matrix_model(&AlgebraContext::untwisted(samples::loop_graph())),
            Err(Error::CyclicGraph(_))
        ));
    }

    #[test]
    fn main_isomorphism_verifies_on_samples() {
        for (name, ctx, bound) in [
            ("graph_a", AlgebraContext::untwisted(samples::graph_a()), 2),
            (
                "chain",
                AlgebraContext::untwisted(samples::two_edge_chain()),
                2,
            ),
            (
                "two_loop",
                AlgebraContext::untwisted(samples::two_loop_graph()),
                2,
            ),
            ("twisted_loop", two_chart_loop(), 3),
            ("twisted_two_loop", twisted_two_loop(), 2),
        ] {
            let rep = verify_main_isomorphism(&ctx, name, bound).unwrap();
            assert!(rep.all_pass(), "{name}:\n{}", rep.render());
        }
    }

    #[test]
    fn section_choice_does_not_affect_products() {
        for ctx in [two_chart_loop(), twisted_two_loop()] {
            let basis = basis_bisections(&ctx, 2);
            for u in &basis {
                for v in &basis {
                    let a = AlgebraElement::term(u.clone(), Scalar::one());
                    let b = AlgebraElement::term(v.clone(), Scalar::one());
                    let p1 =
                        convolve_with_section(&ctx, &a, &b, SectionChoice::Canonical).unwrap();
                    let p2 =
                        convolve_with_section(&ctx, &a, &b, SectionChoice::Decorated).unwrap();
                    assert!(
                        elements_equal(&ctx, &p1, &p2).unwrap(),
                        "{} * {}",
                        u.display(&ctx.g),
                        v.display(&ctx.g)
                    );
                }
            }
        }
    }

    #[test]
    fn coboundary_preserves_structure_constants() {
        let ctx = two_chart_loop();
        let e = ctx.g.edge_by_name("f").unwrap();
        let t = vec![
            BTreeMap::from([(e, Phase::turns(1, 5))]),
            BTreeMap::from([(e, Phase::turns(2, 5))]),
        ];
        let cc2 = apply_coboundary(&ctx.cc, &t).unwrap();
        let ctx2 = AlgebraContext::new(ctx.g.clone(), cc2).unwrap();
        assert_eq!(
            structure_constants(&ctx, 2).unwrap(),
            structure_constants(&ctx2, 2).unwrap()
        );
    }

    #[test]
    fn foreign_elements_are_rejected() {
        let ctx = AlgebraContext::untwisted(samples::graph_a());
        let other = samples::two_loop_graph();
        let foreign = one_term(&other, epath(&other, &["b"]), epath(&other, &["b"]));
        let err = convolve(&ctx, &foreign, &foreign).unwrap_err();
        assert!(matches!(err, Error::ContextMismatch(_)));
    }

    fn small_scalar(i: usize) -> Scalar {
        match i % 4 {
            0 => Scalar::one(),
            1 => Scalar::from_int(-1),
            2 => Scalar::from_int(2),
            _ => Scalar::from_phase(Phase::turns(1, 3)),
        }
    }

    fn arb_element(
        basis: Vec<Bisection>,
    ) -> impl Strategy<Value = AlgebraElement> {
        let n = basis.len();
        proptest::collection::vec((0..n, 0..4usize), 0..3).prop_map(move |picks| {
            let mut out = AlgebraElement::zero();
            for (bi, si) in picks {
                out.add_term(basis[bi].clone(), small_scalar(si));
            }
            out
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn convolution_is_associative(
            xs in arb_element(basis_bisections(&twisted_two_loop(), 2)),
            ys in arb_element(basis_bisections(&twisted_two_loop(), 2)),
            zs in arb_element(basis_bisections(&twisted_two_loop(), 2)),
        ) {
            let ctx = twisted_two_loop();
            let l = convolve(&ctx, &convolve(&ctx, &xs, &ys)?, &zs)?;
            let r = convolve(&ctx, &xs, &convolve(&ctx, &ys, &zs)?)?;
            prop_assert!(elements_equal(&ctx, &l, &r)?);
        }

        #[test]
        fn involution_is_a_star_map(
            xs in arb_element(basis_bisections(&twisted_two_loop(), 2)),
            ys in arb_element(basis_bisections(&twisted_two_loop(), 2)),
        ) {
            let ctx = twisted_two_loop();
            let double = involution(&ctx, &involution(&ctx, &xs)?)?;
            prop_assert!(elements_equal(&ctx, &double, &xs)?);
            let l = involution(&ctx, &convolve(&ctx, &xs, &ys)?)?;
            let r = convolve(&ctx, &involution(&ctx, &ys)?, &involution(&ctx, &xs)?)?;
            prop_assert!(elements_equal(&ctx, &l, &r)?);
        }

        #[test]
        fn grading_is_additive(
            i in 0..9usize,
            j in 0..9usize,
            k in 1..4usize,
        ) {
            let ctx = twisted_two_loop();
            let basis = basis_bisections(&ctx, 2);
            let a = AlgebraElement::term(basis[i % basis.len()].clone(), small_scalar(k));
            let b = AlgebraElement::term(basis[j % basis.len()].clone(), Scalar::one());
            let (da, db) = (gauge_degree(&a), gauge_degree(&b));
            let prod = convolve(&ctx, &a, &b)?;
            if let (GaugeDegree::Homogeneous(x), GaugeDegree::Homogeneous(y)) = (da, db) {
                let dp = gauge_degree(&prod);
                prop_assert!(dp == GaugeDegree::Zero || dp == GaugeDegree::Homogeneous(x + y));
            }
            if let GaugeDegree::Homogeneous(x) = da {
                prop_assert_eq!(gauge_degree(&involution(&ctx, &a)?), GaugeDegree::Homogeneous(-x));
            }
        }
    }
}
