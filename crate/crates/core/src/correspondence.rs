//! The twisted graph correspondence in the cover-cocycle presentation.
//!
//! Elements carry one local value table per chart, compatible across overlaps
//! through the transition functions (`x_a = s_{a b} · x_b`). The base algebra
//! is the functions on the vertex set; the module structure and inner product
//! are computed chartwise and checked to be chart-independent. Two alternate
//! presentations — points of the glued complex line bundle, and equivariant
//! functions on the glued circle bundle — come with their own evaluation and
//! inner-product routines and conversion maps in both directions.

use crate::error::{Error, Result};
use crate::graph::{EdgeId, TopGraph, VertexId};
use crate::phase::{Phase, Scalar};
use crate::twist::{transport, CoverCocycle, GlueSide, LocalPoint};
use std::collections::BTreeMap;

/// A function on the vertex set (the base algebra).
#[derive(Clone, Debug, PartialEq, Default)]
pub struct BaseFunction {
    values: BTreeMap<VertexId, Scalar>,
}

impl BaseFunction {
    pub fn zero() -> BaseFunction {
        BaseFunction::default()
    }

    /// Normalizing constructor: explicit zeros are dropped so structural
    /// equality is pointwise equality.
    pub fn new(values: BTreeMap<VertexId, Scalar>) -> BaseFunction {
        BaseFunction {
            values: values.into_iter().filter(|(_, s)| !s.is_zero()).collect(),
        }
    }

    pub fn indicator(v: VertexId) -> BaseFunction {
        BaseFunction::new(BTreeMap::from([(v, Scalar::one())]))
    }

    pub fn constant(g: &TopGraph, s: &Scalar) -> BaseFunction {
        BaseFunction::new(g.vertices().map(|v| (v, s.clone())).collect())
    }

    pub fn eval(&self, v: VertexId) -> Scalar {
        self.values.get(&v).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn support(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.values.keys().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    pub fn conj(&self) -> BaseFunction {
        BaseFunction::new(
            self.values
                .iter()
                .map(|(v, s)| (*v, s.conj()))
                .collect(),
        )
    }

    pub fn mul_pointwise(&self, other: &BaseFunction) -> BaseFunction {
        BaseFunction::new(
            self.values
                .iter()
                .filter_map(|(v, s)| {
                    other.values.get(v).map(|t| (*v, s * t))
                })
                .collect(),
        )
    }

    pub fn add(&self, other: &BaseFunction) -> BaseFunction {
        let mut out = self.values.clone();
        for (v, s) in &other.values {
            let cur = out.remove(v).unwrap_or_else(Scalar::zero);
            out.insert(*v, &cur + s);
        }
        BaseFunction::new(out)
    }

    /// Is every value a non-negative real (within tolerance for approximate
    /// scalars)?
    pub fn is_nonneg(&self) -> bool {
        self.values.values().all(|s| {
            let c = s.to_complex();
            c.im.abs() <= crate::phase::TOL && c.re >= -crate::phase::TOL
        })
    }

    pub fn display(&self, g: &TopGraph) -> String {
        if self.values.is_empty() {
            return "0".to_string();
        }
        self.values
            .iter()
            .map(|(v, s)| format!("{}@{}", s, g.vertex_name(*v)))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// An element of the twisted correspondence: one total value table per chart,
/// glued by the transitions.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrespondenceElement {
    /// `locals[a][e]` for every `e` in chart `a`.
    pub locals: Vec<BTreeMap<EdgeId, Scalar>>,
}

impl CorrespondenceElement {
    pub fn zero(cc: &CoverCocycle) -> CorrespondenceElement {
        CorrespondenceElement {
            locals: cc
                .charts
                .iter()
                .map(|c| c.iter().map(|&e| (e, Scalar::zero())).collect())
                .collect(),
        }
    }

    /// Validating constructor: each table must cover its chart exactly and
    /// the overlap compatibility `x_a(e) = s_{a b}(e) · x_b(e)` must hold.
    pub fn new(
        cc: &CoverCocycle,
        locals: Vec<BTreeMap<EdgeId, Scalar>>,
    ) -> Result<CorrespondenceElement> {
        if locals.len() != cc.charts.len() {
            return Err(Error::ChartMismatch(
                "one value table per chart required".into(),
            ));
        }
        for (a, table) in locals.iter().enumerate() {
            let domain: std::collections::BTreeSet<EdgeId> = table.keys().copied().collect();
            if domain != cc.charts[a] {
                return Err(Error::ChartMismatch(format!(
                    "table {a} does not match its chart"
                )));
            }
        }
        for a in 0..locals.len() {
            for b in 0..locals.len() {
                if a == b {
                    continue;
                }
                for e in cc.charts[a].intersection(&cc.charts[b]) {
                    let glued = locals[b][e].mul_phase(cc.s(a, b, *e)?);
                    if locals[a][e] != glued {
                        return Err(Error::ChartMismatch(format!(
                            "incompatible values at edge {} between charts {a} and {b}",
                            e.0
                        )));
                    }
                }
            }
        }
        Ok(CorrespondenceElement { locals })
    }

    /// The element supported on one edge with the given value in that edge's
    /// canonical chart; other charts receive the glued value.
    pub fn delta(cc: &CoverCocycle, e: EdgeId, value: Scalar) -> Result<CorrespondenceElement> {
        let canon = cc.canonical_chart(e)?;
        let mut out = CorrespondenceElement::zero(cc);
        for (a, table) in out.locals.iter_mut().enumerate() {
            if cc.charts[a].contains(&e) {
                table.insert(e, value.mul_phase(cc.s(a, canon, e)?));
            }
        }
        Ok(out)
    }

    /// The value at `e` in its canonical chart.
    pub fn canonical_value(&self, cc: &CoverCocycle, e: EdgeId) -> Result<Scalar> {
        let a = cc.canonical_chart(e)?;
        Ok(self.locals[a][&e].clone())
    }

    pub fn value_in(&self, cc: &CoverCocycle, e: EdgeId, chart: usize) -> Result<Scalar> {
        if chart >= self.locals.len() || !cc.charts[chart].contains(&e) {
            return Err(Error::ChartMismatch(format!(
                "edge {} not in chart {chart}",
                e.0
            )));
        }
        Ok(self.locals[chart][&e].clone())
    }

    pub fn add(&self, other: &CorrespondenceElement) -> CorrespondenceElement {
        CorrespondenceElement {
            locals: self
                .locals
                .iter()
                .zip(&other.locals)
                .map(|(a, b)| a.iter().map(|(e, s)| (*e, s + &b[e])).collect())
                .collect(),
        }
    }

    pub fn scale(&self, c: &Scalar) -> CorrespondenceElement {
        CorrespondenceElement {
            locals: self
                .locals
                .iter()
                .map(|t| t.iter().map(|(e, s)| (*e, s * c)).collect())
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.locals
            .iter()
            .all(|t| t.values().all(Scalar::is_zero))
    }
}

/// The chart-independent pointwise pairing `[x|y](e) = conj(x_a(e)) y_a(e)`,
/// evaluated in every chart containing `e` and checked to agree.
pub fn pairing(
    g: &TopGraph,
    cc: &CoverCocycle,
    x: &CorrespondenceElement,
    y: &CorrespondenceElement,
) -> Result<BTreeMap<EdgeId, Scalar>> {
    let mut out = BTreeMap::new();
    for e in g.edges() {
        let mut value: Option<Scalar> = None;
        for (a, chart) in cc.charts.iter().enumerate() {
            if !chart.contains(&e) {
                continue;
            }
            let here = &x.locals[a][&e].conj() * &y.locals[a][&e];
            match &value {
                None => value = Some(here),
                Some(prev) => {
                    if *prev != here {
                        return Err(Error::ChartMismatch(format!(
                            "pairing at edge {} depends on the chart",
                            g.edge_name(e)
                        )));
                    }
                }
            }
        }
        let v = value.ok_or_else(|| {
            Error::InvalidCocycle(format!("edge {} not covered", g.edge_name(e)))
        })?;
        out.insert(e, v);
    }
    Ok(out)
}

/// `⟨x, y⟩(v) = Σ_{s(e) = v} [x|y](e)`.
pub fn inner_product(
    g: &TopGraph,
    cc: &CoverCocycle,
    x: &CorrespondenceElement,
    y: &CorrespondenceElement,
) -> Result<BaseFunction> {
    let p = pairing(g, cc, x, y)?;
    let mut acc: BTreeMap<VertexId, Scalar> = BTreeMap::new();
    for (e, s) in p {
        let v = g.source(e);
        let cur = acc.remove(&v).unwrap_or_else(Scalar::zero);
        acc.insert(v, &cur + &s);
    }
    Ok(BaseFunction::new(acc))
}

/// `(x · f)_a = x_a · (f ∘ s)`.
pub fn right_action(
    g: &TopGraph,
    x: &CorrespondenceElement,
    f: &BaseFunction,
) -> CorrespondenceElement {
    CorrespondenceElement {
        locals: x
            .locals
            .iter()
            .map(|t| {
                t.iter()
                    .map(|(e, s)| (*e, s * &f.eval(g.source(*e))))
                    .collect()
            })
            .collect(),
    }
}

/// `(f · x)_a = (f ∘ r) · x_a`.
pub fn left_action(
    g: &TopGraph,
    f: &BaseFunction,
    x: &CorrespondenceElement,
) -> CorrespondenceElement {
    CorrespondenceElement {
        locals: x
            .locals
            .iter()
            .map(|t| {
                t.iter()
                    .map(|(e, s)| (*e, s * &f.eval(g.range(*e))))
                    .collect()
            })
            .collect(),
    }
}

/// A finite sum of rank-one operators `Θ_{x, y}(z) = x · ⟨y, z⟩`.
#[derive(Clone, Debug)]
pub struct FiniteRankOp {
    pub terms: Vec<(CorrespondenceElement, CorrespondenceElement)>,
}

pub fn rank_one(x: &CorrespondenceElement, y: &CorrespondenceElement) -> FiniteRankOp {
    FiniteRankOp {
        terms: vec![(x.clone(), y.clone())],
    }
}

impl FiniteRankOp {
    pub fn apply(
        &self,
        g: &TopGraph,
        cc: &CoverCocycle,
        z: &CorrespondenceElement,
    ) -> Result<CorrespondenceElement> {
        let mut out = CorrespondenceElement::zero(cc);
        for (x, y) in &self.terms {
            out = out.add(&right_action(g, x, &inner_product(g, cc, y, z)?));
        }
        Ok(out)
    }

    /// The matrix of the operator over the canonical-chart delta basis,
    /// computed from the closed form
    /// `Θ_{x,y}(δ_e)(e') = x(e') conj(y(e)) [s(e) = s(e')]`
    /// rather than by applying the operator.
    pub fn matrix_oracle(
        &self,
        g: &TopGraph,
        cc: &CoverCocycle,
    ) -> Result<BTreeMap<(EdgeId, EdgeId), Scalar>> {
        let mut out = BTreeMap::new();
        for e_out in g.edges() {
            for e_in in g.edges() {
                let mut acc = Scalar::zero();
                if g.source(e_out) == g.source(e_in) {
                    for (x, y) in &self.terms {
                        let term = &x.canonical_value(cc, e_out)?
                            * &y.canonical_value(cc, e_in)?.conj();
                        acc = &acc + &term;
                    }
                }
                if !acc.is_zero() {
                    out.insert((e_out, e_in), acc);
                }
            }
        }
        Ok(out)
    }
}

/// The matrix of an operator computed by applying it to every delta element.
pub fn operator_matrix(
    g: &TopGraph,
    cc: &CoverCocycle,
    apply: impl Fn(&CorrespondenceElement) -> Result<CorrespondenceElement>,
) -> Result<BTreeMap<(EdgeId, EdgeId), Scalar>> {
    let mut out = BTreeMap::new();
    for e_in in g.edges() {
        let image = apply(&CorrespondenceElement::delta(cc, e_in, Scalar::one())?)?;
        for e_out in g.edges() {
            let v = image.canonical_value(cc, e_out)?;
            if !v.is_zero() {
                out.insert((e_out, e_in), v);
            }
        }
    }
    Ok(out)
}

/// Decompose the left action of a non-negative function supported on the
/// regular vertices into rank-one operators: one term per edge over the
/// support, `x_e = δ_e · sqrt(f(r(e)))` in the canonical chart (the singleton
/// cover with indicator partition of unity). The identity
/// `φ(f) = Σ Θ_{x_e, x_e}` is verified on the delta spanning set before
/// returning.
pub fn phi_decomposition(
    g: &TopGraph,
    cc: &CoverCocycle,
    f: &BaseFunction,
) -> Result<Vec<CorrespondenceElement>> {
    let class = crate::graph::classify_vertices(g);
    if !f.is_nonneg() {
        return Err(Error::UnsupportedSupport(
            "left action decomposes for non-negative functions only".into(),
        ));
    }
    for v in f.support() {
        if !class.is_regular(v) {
            return Err(Error::UnsupportedSupport(format!(
                "support contains the non-regular vertex {}",
                g.vertex_name(v)
            )));
        }
    }
    let mut xs = Vec::new();
    for e in g.edges() {
        let fv = f.eval(g.range(e));
        if fv.is_zero() {
            continue;
        }
        xs.push(CorrespondenceElement::delta(cc, e, fv.sqrt()?)?);
    }
    let op = FiniteRankOp {
        terms: xs.iter().map(|x| (x.clone(), x.clone())).collect(),
    };
    for e in g.edges() {
        let d = CorrespondenceElement::delta(cc, e, Scalar::one())?;
        let via_op = op.apply(g, cc, &d)?;
        let via_phi = left_action(g, f, &d);
        if via_op != via_phi {
            return Err(Error::UnsupportedSupport(format!(
                "decomposition mismatch at edge {}",
                g.edge_name(e)
            )));
        }
    }
    Ok(xs)
}

/// The line-bundle presentation: one total-space point per edge.
#[derive(Clone, Debug, PartialEq)]
pub struct LinePicture {
    pub points: BTreeMap<EdgeId, LocalPoint>,
}

/// `Φ(x)(e) = (e, x_a(e), a)` at the canonical chart.
pub fn to_line_bundle_picture(
    cc: &CoverCocycle,
    x: &CorrespondenceElement,
) -> Result<LinePicture> {
    let mut points = BTreeMap::new();
    for (a, chart) in cc.charts.iter().enumerate() {
        for &e in chart {
            if cc.canonical_chart(e)? == a {
                points.insert(
                    e,
                    LocalPoint {
                        e,
                        chart: a,
                        value: x.locals[a][&e].clone(),
                    },
                );
            }
        }
    }
    Ok(LinePicture { points })
}

/// Inverse of [`to_line_bundle_picture`]: spread each point over every chart
/// containing its edge with the line-bundle gluing.
pub fn from_line_bundle_picture(
    cc: &CoverCocycle,
    p: &LinePicture,
) -> Result<CorrespondenceElement> {
    let mut locals: Vec<BTreeMap<EdgeId, Scalar>> = cc
        .charts
        .iter()
        .map(|c| c.iter().map(|&e| (e, Scalar::zero())).collect())
        .collect();
    for (e, pt) in &p.points {
        for (a, chart) in cc.charts.iter().enumerate() {
            if chart.contains(e) {
                locals[a].insert(*e, transport(cc, GlueSide::Left, pt, a)?.value);
            }
        }
    }
    CorrespondenceElement::new(cc, locals)
}

/// Inner product computed inside the line picture: transport the second point
/// into the first point's chart and pair there.
pub fn line_inner_product(
    g: &TopGraph,
    cc: &CoverCocycle,
    p: &LinePicture,
    q: &LinePicture,
) -> Result<BaseFunction> {
    let mut acc: BTreeMap<VertexId, Scalar> = BTreeMap::new();
    for e in g.edges() {
        let a = p
            .points
            .get(&e)
            .ok_or_else(|| Error::ChartMismatch(format!("no point over edge {}", e.0)))?;
        let b = q
            .points
            .get(&e)
            .ok_or_else(|| Error::ChartMismatch(format!("no point over edge {}", e.0)))?;
        let b_here = transport(cc, GlueSide::Left, b, a.chart)?;
        let term = &a.value.conj() * &b_here.value;
        let v = g.source(e);
        let cur = acc.remove(&v).unwrap_or_else(Scalar::zero);
        acc.insert(v, &cur + &term);
    }
    Ok(BaseFunction::new(acc))
}

/// The circle-bundle presentation: an equivariant function on the glued
/// circle bundle, tabulated on the canonical points `(e, 1, a)` of every
/// chart.
#[derive(Clone, Debug, PartialEq)]
pub struct CirclePicture {
    pub tables: Vec<BTreeMap<EdgeId, Scalar>>,
}

/// `Φ(x)(e, z, a) = z · x_a(e)`.
pub fn to_circle_bundle_picture(x: &CorrespondenceElement) -> CirclePicture {
    CirclePicture {
        tables: x.locals.clone(),
    }
}

/// Evaluate the equivariant function at a circle-bundle point `(e, z, a)`.
pub fn circle_eval(
    cc: &CoverCocycle,
    f: &CirclePicture,
    e: EdgeId,
    z: Phase,
    chart: usize,
) -> Result<Scalar> {
    if chart >= f.tables.len() || !cc.charts[chart].contains(&e) {
        return Err(Error::ChartMismatch(format!(
            "edge {} not in chart {chart}",
            e.0
        )));
    }
    Ok(f.tables[chart][&e].mul_phase(z))
}

/// Inverse of [`to_circle_bundle_picture`]; validates the gluing rule.
pub fn from_circle_bundle_picture(
    cc: &CoverCocycle,
    f: &CirclePicture,
) -> Result<CorrespondenceElement> {
    CorrespondenceElement::new(cc, f.tables.clone())
}

/// Inner product computed inside the circle picture, by evaluation at a
/// nontrivial circle point of each fiber (the phase cancels between the
/// conjugate and the plain factor).
pub fn circle_inner_product(
    g: &TopGraph,
    cc: &CoverCocycle,
    f: &CirclePicture,
    h: &CirclePicture,
) -> Result<BaseFunction> {
    let probe = Phase::turns(1, 8);
    let mut acc: BTreeMap<VertexId, Scalar> = BTreeMap::new();
    for e in g.edges() {
        let a = cc.canonical_chart(e)?;
        let fv = circle_eval(cc, f, e, probe, a)?;
        let hv = circle_eval(cc, h, e, probe, a)?;
        let term = &fv.conj() * &hv;
        let v = g.source(e);
        let cur = acc.remove(&v).unwrap_or_else(Scalar::zero);
        acc.insert(v, &cur + &term);
    }
    Ok(BaseFunction::new(acc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::samples::*;
    use num::Rational64;
    use std::collections::BTreeSet;

    fn two_chart_loop() -> (TopGraph, CoverCocycle) {
        let g = loop_graph();
        let f = g.edge_by_name("f").unwrap();
        let charts = vec![BTreeSet::from([f]), BTreeSet::from([f])];
        let mut transitions = BTreeMap::new();
        transitions.insert((0, 1), BTreeMap::from([(f, Phase::turns(1, 3))]));
        transitions.insert((1, 0), BTreeMap::from([(f, Phase::turns(-1, 3))]));
        (
            g,
            CoverCocycle {
                chart_names: vec!["a".into(), "b".into()],
                charts,
                transitions,
            },
        )
    }

    #[test]
    fn delta_elements_glue_by_transitions() {
        let (g, cc) = two_chart_loop();
        let f = g.edge_by_name("f").unwrap();
        let x = CorrespondenceElement::delta(&cc, f, Scalar::one()).unwrap();
        // canonical chart is 0; chart 1 sees s_{1 0} = e(-1/3).
        assert!(x.value_in(&cc, f, 0).unwrap().is_one());
        assert_eq!(
            x.value_in(&cc, f, 1).unwrap(),
            Scalar::from_phase(Phase::turns(-1, 3))
        );
        // The validating constructor accepts exactly this compatibility...
        assert!(CorrespondenceElement::new(&cc, x.locals.clone()).is_ok());
        // ...and rejects a broken one.
        let mut bad = x.locals.clone();
        bad[1].insert(f, Scalar::one());
        assert!(CorrespondenceElement::new(&cc, bad).is_err());
    }

    #[test]
    fn inner_products_match_frozen_examples() {
        let g = graph_a();
        let cc = CoverCocycle::trivial(&g);
        let e = g.edge_by_name("e").unwrap();
        let w = g.vertex_by_name("w").unwrap();
        let x = CorrespondenceElement::delta(&cc, e, Scalar::one()).unwrap();
        let ip = inner_product(&g, &cc, &x, &x).unwrap();
        assert_eq!(ip, BaseFunction::indicator(w));
        // Zero pairs to zero.
        let z = CorrespondenceElement::zero(&cc);
        assert!(inner_product(&g, &cc, &z, &x).unwrap().is_zero());

        // Loop graph with |c|^2 = 2 at the only vertex.
        let (gl, ccl) = two_chart_loop();
        let fe = gl.edge_by_name("f").unwrap();
        let v = gl.vertex_by_name("v").unwrap();
        let c = Scalar::sqrt_rat(Rational64::new(2, 1)).unwrap();
        let y = CorrespondenceElement::delta(&ccl, fe, c).unwrap();
        let ip = inner_product(&gl, &ccl, &y, &y).unwrap();
        assert_eq!(ip.eval(v), Scalar::from_int(2));
    }

    #[test]
    fn pairing_is_hermitian_and_positive() {
        let (g, cc) = two_chart_loop();
        let f = g.edge_by_name("f").unwrap();
        let x = CorrespondenceElement::delta(&cc, f, Scalar::from_phase(Phase::turns(1, 5)))
            .unwrap();
        let y = CorrespondenceElement::delta(&cc, f, Scalar::from_int(3)).unwrap();
        let pxy = pairing(&g, &cc, &x, &y).unwrap();
        let pyx = pairing(&g, &cc, &y, &x).unwrap();
        for (e, s) in &pxy {
            assert_eq!(s.conj(), pyx[e]);
        }
        let pxx = pairing(&g, &cc, &x, &x).unwrap();
        for s in pxx.values() {
            let c = s.to_complex();
            assert!(c.im.abs() <= crate::phase::TOL && c.re >= 0.0);
        }
    }

    #[test]
    fn module_actions_interact_with_the_inner_product() {
        let g = two_edge_chain();
        let cc = CoverCocycle::trivial(&g);
        let e1 = g.edge_by_name("e1").unwrap();
        let e2 = g.edge_by_name("e2").unwrap();
        let x = CorrespondenceElement::delta(&cc, e1, Scalar::from_int(2))
            .unwrap()
            .add(&CorrespondenceElement::delta(&cc, e2, Scalar::from_phase(Phase::turns(1, 4))).unwrap());
        let y = CorrespondenceElement::delta(&cc, e1, Scalar::one()).unwrap();
        let one = BaseFunction::constant(&g, &Scalar::one());
        assert_eq!(right_action(&g, &x, &one), x);
        assert_eq!(left_action(&g, &one, &x), x);
        // ⟨x, y·f⟩ = ⟨x,y⟩·f
        let f = BaseFunction::new(BTreeMap::from([
            (g.vertex_by_name("v").unwrap(), Scalar::from_int(5)),
            (g.vertex_by_name("w").unwrap(), Scalar::from_phase(Phase::turns(1, 3))),
        ]));
        let lhs = inner_product(&g, &cc, &x, &right_action(&g, &y, &f)).unwrap();
        let rhs = inner_product(&g, &cc, &x, &y).unwrap().mul_pointwise(&f);
        assert_eq!(lhs, rhs);
        // Left action by a vertex indicator kills the other ranges.
        let ind_u = BaseFunction::indicator(g.vertex_by_name("u").unwrap());
        let cut = left_action(&g, &ind_u, &x);
        assert_eq!(cut.canonical_value(&cc, e1).unwrap(), Scalar::from_int(2));
        assert!(cut.canonical_value(&cc, e2).unwrap().is_zero());
    }

    #[test]
    fn rank_one_matches_its_matrix_oracle() {
        let (g, cc) = two_chart_loop();
        let f = g.edge_by_name("f").unwrap();
        let x = CorrespondenceElement::delta(&cc, f, Scalar::from_phase(Phase::turns(1, 6)))
            .unwrap();
        let y = CorrespondenceElement::delta(&cc, f, Scalar::from_int(2)).unwrap();
        let op = rank_one(&x, &y);
        let by_apply = operator_matrix(&g, &cc, |z| op.apply(&g, &cc, z)).unwrap();
        let direct = op.matrix_oracle(&g, &cc).unwrap();
        assert_eq!(by_apply, direct);
        // Θ_{x, 0} = 0.
        let zop = rank_one(&x, &CorrespondenceElement::zero(&cc));
        assert!(zop.apply(&g, &cc, &y).unwrap().is_zero());
    }

    #[test]
    fn phi_decomposition_frozen_examples() {
        // Graph A, f = indicator of v: one term, value 1 at e.
        let g = graph_a();
        let cc = CoverCocycle::trivial(&g);
        let v = g.vertex_by_name("v").unwrap();
        let e = g.edge_by_name("e").unwrap();
        let xs = phi_decomposition(&g, &cc, &BaseFunction::indicator(v)).unwrap();
        assert_eq!(xs.len(), 1);
        assert!(xs[0].canonical_value(&cc, e).unwrap().is_one());
        // f = 0: empty list.
        assert!(phi_decomposition(&g, &cc, &BaseFunction::zero())
            .unwrap()
            .is_empty());
        // Loop graph, f = 2·indicator: |x(f)|^2 = 2.
        let (gl, ccl) = two_chart_loop();
        let vl = gl.vertex_by_name("v").unwrap();
        let fe = gl.edge_by_name("f").unwrap();
        let f2 = BaseFunction::new(BTreeMap::from([(vl, Scalar::from_int(2))]));
        let xs = phi_decomposition(&gl, &ccl, &f2).unwrap();
        assert_eq!(xs.len(), 1);
        let val = xs[0].canonical_value(&ccl, fe).unwrap();
        assert_eq!(&val.conj() * &val, Scalar::from_int(2));
        // Unsupported support: a singular vertex.
        let w = g.vertex_by_name("w").unwrap();
        assert!(matches!(
            phi_decomposition(&g, &cc, &BaseFunction::indicator(w)),
            Err(Error::UnsupportedSupport(_))
        ));
    }

    #[test]
    fn three_pictures_round_trip_and_agree() {
        let (g, cc) = two_chart_loop();
        let f = g.edge_by_name("f").unwrap();
        let x = CorrespondenceElement::delta(&cc, f, Scalar::from_phase(Phase::turns(2, 7)))
            .unwrap();
        let y = CorrespondenceElement::delta(&cc, f, Scalar::from_int(3)).unwrap();
        // Line picture round trip.
        let lp = to_line_bundle_picture(&cc, &x).unwrap();
        assert_eq!(from_line_bundle_picture(&cc, &lp).unwrap(), x);
        // Circle picture round trip.
        let cp = to_circle_bundle_picture(&x);
        assert_eq!(from_circle_bundle_picture(&cc, &cp).unwrap(), x);
        // All three inner products agree.
        let base = inner_product(&g, &cc, &x, &y).unwrap();
        let via_line = line_inner_product(
            &g,
            &cc,
            &to_line_bundle_picture(&cc, &x).unwrap(),
            &to_line_bundle_picture(&cc, &y).unwrap(),
        )
        .unwrap();
        let via_circle =
            circle_inner_product(&g, &cc, &to_circle_bundle_picture(&x), &to_circle_bundle_picture(&y))
                .unwrap();
        assert_eq!(base, via_line);
        assert_eq!(base, via_circle);
        // Equivariance: evaluating at a rotated point rotates the value.
        let rotated = circle_eval(&cc, &cp, f, Phase::turns(1, 3), 0).unwrap();
        let still = circle_eval(&cc, &cp, f, Phase::turns(0, 1), 0).unwrap();
        assert_eq!(rotated, still.mul_phase(Phase::turns(1, 3)));
        // Gluing rule: the two charts' tabulated values name the same bundle
        // function: F(e, 1, chart1) = F(e, s_{0 1}, chart0).
        let via_chart1 = circle_eval(&cc, &cp, f, Phase::turns(0, 1), 1).unwrap();
        let via_chart0 = circle_eval(&cc, &cp, f, Phase::turns(-1, 3), 0).unwrap();
        assert_eq!(via_chart1, via_chart0);
    }
}
