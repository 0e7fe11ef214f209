//! Local analysis at curve points: multiplicity, tangent cone, tangent
//! lines, intersection multiplicities with lines, and verification of the
//! singularity classification of the family.
//!
//! A point is moved to (0 : 0 : 1) by a deterministic linear change of
//! coordinates; the multiplicity is the least total degree in the affine
//! chart and the tangent cone is the corresponding lowest homogeneous part,
//! a binary form in the two chart variables. Intersection multiplicities
//! with lines are vanishing orders of the restricted equation, which for a
//! point with a single branch equals the ramification-relevant order on the
//! normalization; that identification is assumed for unibranch points and
//! flagged in reports.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::fncurve::Curve;
use crate::geom::{enumerate_plane, lies_on_fq_line, line_through, Mat3, ProjLine, ProjPoint};
use crate::poly::BinaryForm;
use crate::{Error, Result};

/// Classification of a singular point of the family by (m > 1?, membership
/// in S, membership in the base plane, q = 2?).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum SingularCase {
    /// m > 1, point off every rational line: multiplicity q^m, unibranch,
    /// unique tangent with contact q^m + 1.
    AI,
    /// m > 1, on a rational line but not rational itself: multiplicity
    /// q^m - 1, unibranch, unique tangent with contact q^m.
    AII,
    /// m > 1, rational point: ordinary of multiplicity q^m - q, every
    /// tangent with contact q^n - q.
    AIII,
    /// m = 1, q > 2, off every rational line: multiplicity q, unibranch,
    /// contact q + 1.
    BI,
    /// m = 1, q > 2, on a rational line, not rational: multiplicity q - 1,
    /// unibranch, contact q.
    BII,
    /// (m, q) = (1, 2): multiplicity 2, unibranch, contact 3.
    C,
}

impl SingularCase {
    pub fn label(&self) -> &'static str {
        match self {
            SingularCase::AI => "a-i",
            SingularCase::AII => "a-ii",
            SingularCase::AIII => "a-iii",
            SingularCase::BI => "b-i",
            SingularCase::BII => "b-ii",
            SingularCase::C => "c",
        }
    }

    pub fn is_ordinary(&self) -> bool {
        matches!(self, SingularCase::AIII)
    }

    /// Unibranch in the sense that the normalization has one point over it.
    pub fn is_unibranch(&self) -> bool {
        !self.is_ordinary()
    }
}

impl fmt::Display for SingularCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// Expected (multiplicity, tangent line count, tangent contact order) for a
/// case at the curve's parameters.
pub fn expected_local_data(curve: &Curve, case: SingularCase) -> (u32, u32, u32) {
    let q = curve.params().q;
    let (n, m) = (curve.params().n, curve.params().m);
    let (qm, qn) = (q.pow(m), q.pow(n));
    match case {
        SingularCase::AI => (qm as u32, 1, (qm + 1) as u32),
        SingularCase::AII => ((qm - 1) as u32, 1, qm as u32),
        SingularCase::AIII => ((qm - q) as u32, (qm - q) as u32, (qn - q) as u32),
        SingularCase::BI => (q as u32, 1, (q + 1) as u32),
        SingularCase::BII => ((q - 1) as u32, 1, q as u32),
        SingularCase::C => (2, 1, 3),
    }
}

/// Case label from the membership data; None when no singular point with
/// that membership pattern exists for the parameters.
pub fn classify(curve: &Curve, in_s: bool, in_base_plane: bool) -> Option<SingularCase> {
    let q = curve.params().q;
    let m = curve.params().m;
    if m > 1 {
        Some(if in_base_plane {
            SingularCase::AIII
        } else if in_s {
            SingularCase::AII
        } else {
            SingularCase::AI
        })
    } else if q > 2 {
        if in_base_plane {
            None
        } else if in_s {
            Some(SingularCase::BII)
        } else {
            Some(SingularCase::BI)
        }
    } else if in_s {
        None
    } else {
        Some(SingularCase::C)
    }
}

/// One tangent direction at a point.
#[derive(Debug, Clone)]
pub struct TangentData {
    pub line: ProjLine,
    /// Multiplicity of the direction inside the tangent cone.
    pub cone_mult: u32,
    /// Intersection multiplicity of the curve with the tangent line here.
    pub imult: u32,
}

/// Full local record of a singular point.
#[derive(Debug, Clone)]
pub struct SingularRecord {
    pub point: ProjPoint,
    pub multiplicity: u32,
    pub tangents: Vec<TangentData>,
    /// Whether the tangent cone factored completely over the ambient field.
    pub cone_split: bool,
    pub in_s: bool,
    pub in_base_plane: bool,
    pub case: Option<SingularCase>,
    pub ordinary: bool,
}

/// Deterministic coordinate change sending (0 : 0 : 1) to the given point:
/// the point becomes the third column, the other two columns are the
/// standard basis vectors away from its pivot coordinate.
pub fn chart_matrix(ctx: &Arc<crate::field::FieldCtx>, q: &ProjPoint) -> Mat3 {
    let pivot = q.coords().iter().position(|&c| c != 0).unwrap();
    let others: Vec<usize> = (0..3).filter(|&i| i != pivot).collect();
    let mut rows = [[0u64; 3]; 3];
    for (col, &axis) in others.iter().enumerate() {
        rows[axis][col] = 1;
    }
    let qc = q.coords();
    for i in 0..3 {
        rows[i][2] = qc[i];
    }
    let m = Mat3::new(ctx, rows);
    debug_assert_ne!(m.det(), 0);
    m
}

/// A second chart for the same point (the two free columns swapped); used to
/// check that local data does not depend on the chart.
pub fn chart_matrix_alt(ctx: &Arc<crate::field::FieldCtx>, q: &ProjPoint) -> Mat3 {
    let m = chart_matrix(ctx, q);
    let r = m.rows();
    let rows = [
        [r[0][1], r[0][0], r[0][2]],
        [r[1][1], r[1][0], r[1][2]],
        [r[2][1], r[2][0], r[2][2]],
    ];
    Mat3::new(ctx, rows)
}

fn local_expansion(curve: &Curve, q: &ProjPoint, chart: &Mat3) -> crate::poly::TriPoly {
    debug_assert_eq!(chart.apply(&ProjPoint::new(curve.ctx(), [0, 0, 1]).unwrap()), *q);
    curve.f().substitute_linear(&chart.rows())
}

/// Multiplicity of the curve at a point of it: the least total chart degree.
/// Returns 1 at smooth points.
pub fn multiplicity_at(curve: &Curve, q: &ProjPoint) -> Result<u32> {
    if !curve.is_on_curve(q) {
        return Err(Error::NotOnCurve(q.to_string()));
    }
    let chart = chart_matrix(curve.ctx(), q);
    Ok(multiplicity_of_expansion(&local_expansion(curve, q, &chart)))
}

fn multiplicity_of_expansion(g: &crate::poly::TriPoly) -> u32 {
    g.terms().map(|(m, _)| m.x + m.y).min().expect("expansion of the zero polynomial")
}

/// Tangent cone at a point of the curve, as a binary form in the chart
/// variables, with the tangent lines it factors into over the ambient field
/// and a flag telling whether the factorization is complete.
pub fn tangent_cone_at(
    curve: &Curve,
    q: &ProjPoint,
) -> Result<(BinaryForm, Vec<TangentData>, bool)> {
    if !curve.is_on_curve(q) {
        return Err(Error::NotOnCurve(q.to_string()));
    }
    let ctx = curve.ctx();
    let chart = chart_matrix(ctx, q);
    let expansion = local_expansion(curve, q, &chart);
    let mu = multiplicity_of_expansion(&expansion);
    let mut coeffs = vec![0u64; mu as usize + 1];
    for (mono, c) in expansion.terms() {
        if mono.x + mono.y == mu {
            coeffs[mono.x as usize] = ctx.add_raw(coeffs[mono.x as usize], c);
        }
    }
    let cone = BinaryForm::new(ctx, coeffs);
    assert!(!cone.is_zero());
    let codes: Vec<u64> = (0..ctx.size()).collect();
    let report = cone.squarefree_and_roots(&codes);
    let rows = chart.rows();
    let mut tangents = Vec::with_capacity(report.roots.len());
    for ((s, t), cone_mult) in report.roots {
        // direction (s, t, 0) in the chart, mapped back to the plane
        let dir = [
            dot3(ctx, rows[0], [s, t, 0]),
            dot3(ctx, rows[1], [s, t, 0]),
            dot3(ctx, rows[2], [s, t, 0]),
        ];
        let dir_pt = ProjPoint::new(ctx, dir).unwrap();
        let line = line_through(q, &dir_pt)?;
        let imult = intersection_multiplicity(curve, &line, q)?;
        tangents.push(TangentData { line, cone_mult, imult });
    }
    tangents.sort_by_key(|t| t.line.coords());
    Ok((cone, tangents, report.fully_split))
}

fn dot3(ctx: &crate::field::FieldCtx, a: [u64; 3], b: [u64; 3]) -> u64 {
    let mut acc = 0;
    for i in 0..3 {
        acc = ctx.add_raw(acc, ctx.mul_raw(a[i], b[i]));
    }
    acc
}

/// Intersection multiplicity of the curve with a line at a point of both:
/// the vanishing order of the restricted equation at the point's parameter.
pub fn intersection_multiplicity(curve: &Curve, line: &ProjLine, q: &ProjPoint) -> Result<u32> {
    if !line.contains(q) {
        return Err(Error::NotOnLine(q.to_string(), line.to_string()));
    }
    let (b, d) = line.span_points();
    let dir = if d == *q { b } else { d };
    let form = curve.f().restrict(q.coords(), dir.coords());
    if form.is_zero() {
        // cannot happen for an irreducible curve of degree > 1
        return Err(Error::InfiniteOrder);
    }
    // the base point has parameter (1 : 0)
    form.vanish_order(1, 0)
}

/// Scan report for the singular locus.
#[derive(Debug)]
pub struct SingularReport {
    pub records: Vec<SingularRecord>,
    pub predicted: Vec<(ProjPoint, SingularCase)>,
    pub scanned_ext: u32,
    pub mismatches: Vec<String>,
}

impl SingularReport {
    pub fn matches_prediction(&self) -> bool {
        self.mismatches.is_empty()
    }

    pub fn rows(&self) -> Vec<SingRow> {
        self.records
            .iter()
            .map(|r| SingRow {
                point: r.point.to_string(),
                mult: r.multiplicity,
                case: r.case.map(|c| c.label().to_string()).unwrap_or_else(|| "unclassified".into()),
                ordinary: r.ordinary,
                tangents: r
                    .tangents
                    .iter()
                    .map(|t| TangentRow { line: t.line.to_string(), imult: t.imult })
                    .collect(),
                in_s: r.in_s,
                in_fq: r.in_base_plane,
            })
            .collect()
    }

    pub fn summary(&self, q: u64) -> SingSummary {
        SingSummary {
            predicted_count: self.predicted.len(),
            found_count: self.records.len(),
            matches: self.matches_prediction(),
            verified_within: format!("GF({}^{})", q, self.scanned_ext),
            unibranch_identification_assumed: self
                .records
                .iter()
                .any(|r| r.case.is_some_and(|c| c.is_unibranch())),
        }
    }
}

/// Serializable row of the singularity report.
#[derive(Debug, Clone, Serialize)]
pub struct SingRow {
    pub point: String,
    pub mult: u32,
    pub case: String,
    pub ordinary: bool,
    pub tangents: Vec<TangentRow>,
    pub in_s: bool,
    #[serde(rename = "in_Fq")]
    pub in_fq: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TangentRow {
    pub line: String,
    pub imult: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct SingSummary {
    pub predicted_count: usize,
    pub found_count: usize,
    #[serde(rename = "match")]
    pub matches: bool,
    pub verified_within: String,
    /// Contact orders at unibranch points are plane intersection
    /// multiplicities; reading them as orders on the normalization assumes
    /// a single branch.
    pub unibranch_identification_assumed: bool,
}

/// The predicted singular locus for the parameters, over the ambient field.
pub fn predicted_singular_points(curve: &Curve) -> Result<Vec<(ProjPoint, SingularCase)>> {
    let params = curve.params();
    let q = params.q;
    let (n, m) = (params.n, params.m);
    let mut out = Vec::new();
    if m > 1 {
        for r in enumerate_plane(curve.ctx(), q, n - m)? {
            let in_fq = r.in_subplane(q, 1);
            let in_s = lies_on_fq_line(&r, q);
            out.push((r, classify(curve, in_s, in_fq).unwrap()));
        }
    } else if q > 2 {
        for r in enumerate_plane(curve.ctx(), q, n - 1)? {
            if r.in_subplane(q, 1) {
                continue;
            }
            let in_s = lies_on_fq_line(&r, q);
            out.push((r.clone(), classify(curve, in_s, false).unwrap()));
        }
    } else {
        for r in enumerate_plane(curve.ctx(), q, n - 1)? {
            if lies_on_fq_line(&r, 2) {
                continue;
            }
            out.push((r, SingularCase::C));
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

/// Scan P^2(GF(q^j)) for all j <= max_ext for singular points, build a full
/// record per point found, and compare against the predicted locus and local
/// data. Absence of singular points beyond the scanned range is taken from
/// the classification of the family, not re-proved.
pub fn find_singular_points(curve: &Curve, max_ext: u32) -> Result<SingularReport> {
    let params = curve.params();
    let q = params.q;
    let needed = (params.n - params.m).max(params.n - 1);
    if max_ext < needed {
        return Err(Error::InvalidParams(format!(
            "max_ext = {} does not cover the predicted locus (need {})",
            max_ext, needed
        )));
    }
    let mut points: Vec<ProjPoint> = Vec::new();
    for j in 1..=max_ext {
        let plane = match enumerate_plane(curve.ctx(), q, j) {
            Ok(p) => p,
            Err(Error::BadExtension(_)) => continue, // degree not inside the ambient field
            Err(e) => return Err(e),
        };
        // keep only points defined exactly over GF(q^j), avoiding duplicates
        points.extend(plane.into_iter().filter(|r| r.field_of_definition(q) == j));
    }
    let [fx, fy, fz] = curve.partials();
    let singular: Vec<ProjPoint> = points
        .into_par_iter()
        .filter(|r| {
            let c = r.coords();
            curve.f().eval_raw(c) == 0
                && fx.eval_raw(c) == 0
                && fy.eval_raw(c) == 0
                && fz.eval_raw(c) == 0
        })
        .collect();
    let mut records: Vec<SingularRecord> = singular
        .into_par_iter()
        .map(|r| build_record(curve, r))
        .collect::<Result<Vec<_>>>()?;
    records.sort_by(|a, b| a.point.cmp(&b.point));

    let predicted = predicted_singular_points(curve)?;
    let mut mismatches = Vec::new();
    let found_set: BTreeMap<&ProjPoint, &SingularRecord> =
        records.iter().map(|r| (&r.point, r)).collect();
    for (p, case) in &predicted {
        match found_set.get(p) {
            None => mismatches.push(format!("predicted singular point {} not found", p)),
            Some(rec) => {
                let (mult, tcount, imult) = expected_local_data(curve, *case);
                if rec.case != Some(*case) {
                    mismatches.push(format!(
                        "{}: case {:?} found, {} predicted",
                        p,
                        rec.case.map(|c| c.label()),
                        case
                    ));
                }
                if rec.multiplicity != mult {
                    mismatches.push(format!(
                        "{}: multiplicity {} found, {} predicted",
                        p, rec.multiplicity, mult
                    ));
                }
                if rec.tangents.len() as u32 != tcount {
                    mismatches.push(format!(
                        "{}: {} tangent lines found, {} predicted",
                        p,
                        rec.tangents.len(),
                        tcount
                    ));
                }
                if rec.tangents.iter().any(|t| t.imult != imult) {
                    mismatches.push(format!("{}: tangent contact orders differ from {}", p, imult));
                }
                if rec.ordinary != case.is_ordinary() {
                    mismatches.push(format!("{}: ordinary flag mismatch", p));
                }
                if case.is_unibranch()
                    && rec.tangents.first().map(|t| t.cone_mult) != Some(mult)
                {
                    mismatches.push(format!(
                        "{}: tangent cone is not a single direction of multiplicity {}",
                        p, mult
                    ));
                }
                if !rec.cone_split {
                    mismatches.push(format!("{}: tangent cone did not split", p));
                }
            }
        }
    }
    for r in &records {
        if !predicted.iter().any(|(p, _)| p == &r.point) {
            mismatches.push(format!("unpredicted singular point {}", r.point));
        }
    }
    Ok(SingularReport { records, predicted, scanned_ext: max_ext, mismatches })
}

/// Build the full record for one singular point.
pub fn build_record(curve: &Curve, point: ProjPoint) -> Result<SingularRecord> {
    let q = curve.params().q;
    let multiplicity = multiplicity_at(curve, &point)?;
    assert!(multiplicity >= 2, "record requested at a non-singular point");
    let (cone, tangents, cone_split) = tangent_cone_at(curve, &point)?;
    let in_s = lies_on_fq_line(&point, q);
    let in_base_plane = point.in_subplane(q, 1);
    let ordinary = cone.is_squarefree() && tangents.len() as u32 == multiplicity;
    Ok(SingularRecord {
        case: classify(curve, in_s, in_base_plane),
        point,
        multiplicity,
        tangents,
        cone_split,
        in_s,
        in_base_plane,
        ordinary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fncurve::CurveParams;

    fn curve(q: u64, n: u32, m: u32) -> Curve {
        Curve::build(CurveParams::new(q, n, m).unwrap()).unwrap()
    }

    #[test]
    fn smooth_points_have_multiplicity_one() {
        let c = curve(2, 3, 1);
        // the quartic misses P^2(F_2) but meets P^2(GF(4))
        let pts = enumerate_plane(c.ctx(), 2, 2).unwrap();
        let on: Vec<_> = pts.into_iter().filter(|r| c.is_on_curve(r)).collect();
        assert!(!on.is_empty());
        for r in &on {
            assert_eq!(multiplicity_at(&c, r).unwrap(), 1);
        }
        let off = ProjPoint::new(c.ctx(), [1, 0, 0]).unwrap();
        assert!(matches!(multiplicity_at(&c, &off), Err(Error::NotOnCurve(_))));
    }

    #[test]
    fn multiplicity_is_chart_independent() {
        let c = curve(2, 3, 2);
        for r in enumerate_plane(c.ctx(), 2, 1).unwrap() {
            let m1 =
                multiplicity_of_expansion(&local_expansion(&c, &r, &chart_matrix(c.ctx(), &r)));
            let m2 =
                multiplicity_of_expansion(&local_expansion(&c, &r, &chart_matrix_alt(c.ctx(), &r)));
            assert_eq!(m1, m2);
            assert_eq!(m1, 2); // q^m - q = 2 at rational points
        }
    }

    #[test]
    fn rational_points_of_3_2_2_are_ordinary_double_points() {
        let c = curve(2, 3, 2);
        for r in enumerate_plane(c.ctx(), 2, 1).unwrap() {
            let rec = build_record(&c, r).unwrap();
            assert_eq!(rec.multiplicity, 2);
            assert!(rec.ordinary);
            assert_eq!(rec.case, Some(SingularCase::AIII));
            assert_eq!(rec.tangents.len(), 2);
            for t in &rec.tangents {
                assert_eq!(t.imult, 6); // q^n - q
                assert_eq!(t.cone_mult, 1);
            }
        }
    }

    #[test]
    fn smooth_point_tangent_is_the_gradient_line() {
        let c = curve(2, 3, 1);
        let pts = enumerate_plane(c.ctx(), 2, 2).unwrap();
        let r = pts.iter().find(|r| c.is_on_curve(r)).unwrap();
        let (_, tangents, split) = tangent_cone_at(&c, r).unwrap();
        assert!(split);
        assert_eq!(tangents.len(), 1);
        assert_eq!(tangents[0].line, c.gradient_line(r).unwrap());
        assert!(tangents[0].imult >= 2);
    }

    #[test]
    fn singular_scan_3_2_2() {
        let c = curve(2, 3, 2);
        let report = find_singular_points(&c, 2).unwrap();
        assert_eq!(report.records.len(), 7);
        assert!(report.matches_prediction(), "{:?}", report.mismatches);
    }

    #[test]
    fn singular_scan_3_1_2_is_empty() {
        // P^2(GF(4)) is covered by rational lines, so the quartic is smooth
        let c = curve(2, 3, 1);
        let report = find_singular_points(&c, 2).unwrap();
        assert!(report.records.is_empty());
        assert!(report.predicted.is_empty());
        assert!(report.matches_prediction());
    }

    #[test]
    fn singular_scan_3_1_3() {
        let c = curve(3, 3, 1);
        let report = find_singular_points(&c, 2).unwrap();
        // P^2(GF(9)) minus P^2(GF(3)): 91 - 13 points, all on rational lines
        assert_eq!(report.records.len(), 78);
        assert!(report.records.iter().all(|r| r.case == Some(SingularCase::BII)));
        assert!(report.matches_prediction(), "{:?}", report.mismatches);
    }

    #[test]
    fn bezout_along_lines() {
        let c = curve(2, 3, 2);
        let ctx = c.ctx();
        let d = c.degree();
        let codes: Vec<u64> = (0..ctx.size()).collect();
        for raw in [[1u64, 1, 1], [1, 2, 3], [0, 1, 5], [1, 0, 9]] {
            let line = ProjLine::new(ctx, raw).unwrap();
            let (b, dir) = line.span_points();
            let form = c.f().restrict(b.coords(), dir.coords());
            let report = form.squarefree_and_roots(&codes);
            let total: u32 = report.roots.iter().map(|&(_, m)| m).sum();
            assert!(total <= d);
            if report.fully_split {
                assert_eq!(total, d);
            }
            // each root is a point of the curve on the line, and its
            // multiplicity there is the intersection multiplicity
            for ((s, t), mult) in report.roots {
                let coords = crate::geom::combine(ctx, s, b.coords(), t, dir.coords());
                let pt = ProjPoint::new(ctx, coords).unwrap();
                assert!(c.is_on_curve(&pt) && line.contains(&pt));
                assert_eq!(intersection_multiplicity(&c, &line, &pt).unwrap(), mult);
            }
        }
    }

    #[test]
    fn multiplicity_bounds_intersection() {
        let c = curve(2, 3, 2);
        let ctx = c.ctx();
        let q0 = ProjPoint::new(ctx, [1, 0, 0]).unwrap(); // rational, multiplicity 2
        let mu = multiplicity_at(&c, &q0).unwrap();
        let mut saw_equality = false;
        for t in 0..8u64 {
            for u in 0..8u64 {
                if (t, u) == (0, 0) {
                    continue;
                }
                let other = ProjPoint::new(ctx, [0, t, u]).unwrap();
                let line = line_through(&q0, &other).unwrap();
                let i = intersection_multiplicity(&c, &line, &q0).unwrap();
                assert!(i >= mu);
                saw_equality |= i == mu;
            }
        }
        assert!(saw_equality);
    }

    #[test]
    fn wrong_line_is_rejected() {
        let c = curve(2, 3, 2);
        let ctx = c.ctx();
        let q0 = ProjPoint::new(ctx, [1, 0, 0]).unwrap();
        let line = ProjLine::new(ctx, [1, 0, 0]).unwrap(); // x = 0 misses (1:0:0)
        assert!(matches!(intersection_multiplicity(&c, &line, &q0), Err(Error::NotOnLine(..))));
    }
}
