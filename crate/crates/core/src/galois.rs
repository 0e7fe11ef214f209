//! Projection analysis from candidate centers: covering degree, branch-level
//! ramification data, certification of Galois points through an explicit
//! linear deck group, and certification of non-Galois points through
//! ramification obstructions.
//!
//! The positive direction conjugates the center to (0 : 1 : 0), enumerates
//! the pencil-fixing matrices x -> x, y -> gamma*x + mu*y + beta*z, z -> z,
//! keeps those stabilizing the curve, and certifies a Galois covering when
//! the group order equals the covering degree (a deck group acting with
//! order equal to the degree forces the covering to be Galois).
//!
//! The negative direction assembles fibers of the projection line by line
//! and applies consequences of Galois coverings: all points of one fiber
//! share a single ramification index, that index divides the covering
//! degree, and lines through ramification data of a doubly Frobenius
//! nonclassical curve are forced to be rational. A concrete violation is a
//! certificate of non-Galoisness; a point where no rule fires remains
//! INCONCLUSIVE, never positively certified. Nonlinear deck transformations
//! are not searched, so a deck count below the degree is never read as a
//! proof of non-Galoisness.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::field::FieldCtx;
use crate::fncurve::Curve;
use crate::geom::{enumerate_plane, fq_lines, line_through, Mat3, ProjLine, ProjPoint};
use crate::local::{
    build_record, find_singular_points, intersection_multiplicity, SingularRecord,
};
use crate::poly::unipoly;
use crate::{Error, Result};

/// Tuning knobs of the analysis engine. Defaults fit the desk-scale runs.
#[derive(Debug, Clone)]
pub struct EngineConfig {
    /// Seed for all randomized line sampling.
    pub seed: u64,
    /// Number of seeded random lines tried per candidate after the
    /// structured queue is exhausted.
    pub random_line_budget: usize,
    /// Largest plane size enumerated when caching low-degree curve points.
    pub low_point_plane_cap: u64,
    /// Extension degree over GF(q) searched for deck-group parameters.
    pub search_ext: u32,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig { seed: 0, random_line_budget: 200, low_point_plane_cap: 10_000, search_ext: 1 }
    }
}

/// Where a branch index value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BranchSource {
    /// Smooth point of the curve: index = intersection multiplicity.
    SmoothExact,
    /// Singular point with one branch: index = intersection multiplicity.
    UnibranchExact,
    /// Branch of an ordinary singularity, split by tangency.
    OrdinarySplit,
    /// Candidate set from the singularity classification, used when exact
    /// splitting is unavailable.
    ClassificationCandidates,
    /// Branch over a smooth center (tangent-line fiber).
    CenterSmooth,
    /// Branch over an ordinary singular center.
    CenterOrdinary,
    /// Branch over a unibranch singular center.
    CenterUnibranch,
}

/// Exact index or a candidate set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BranchValue {
    Exact(u32),
    Candidates(Vec<u32>),
}

/// One branch of the fiber over a line, with its ramification index.
#[derive(Debug, Clone)]
pub struct BranchIndex {
    pub point: ProjPoint,
    pub branch_id: u32,
    pub e: BranchValue,
    pub source: BranchSource,
}

/// Fiber of the projection over the point of P^1 given by a line through
/// the center. `leftover_degree` is intersection mass on the line that did
/// not split over the ambient field; by the classification of the singular
/// locus it sits at smooth points of the curve.
#[derive(Debug, Clone)]
pub struct FiberData {
    pub line: ProjLine,
    pub branches: Vec<BranchIndex>,
    pub leftover_degree: u32,
    pub fully_split: bool,
}

/// Obstruction rules, consequences of the covering being Galois.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ObstructionRule {
    /// A ramification index does not divide the covering degree.
    R1Divisibility,
    /// Two branches of one fiber carry different indices.
    R2EqualIndices,
    /// No common index is compatible with the fiber sum / unsplit mass.
    R3FiberSum,
    /// A smooth ramification point seen from an outer or singular center
    /// lies on a non-rational line.
    R4Rationality,
    /// Rationality forced at a smooth center (tangent line or secant with a
    /// second smooth point) is violated.
    R5RationalityInner,
    /// No location for ramification is available at all, yet a covering of
    /// degree at least 2 must ramify somewhere.
    R6Unramified,
}

impl ObstructionRule {
    pub fn label(&self) -> &'static str {
        match self {
            ObstructionRule::R1Divisibility => "R1-divisibility",
            ObstructionRule::R2EqualIndices => "R2-equal-indices",
            ObstructionRule::R3FiberSum => "R3-fiber-sum",
            ObstructionRule::R4Rationality => "R4-rationality",
            ObstructionRule::R5RationalityInner => "R5-rationality-inner",
            ObstructionRule::R6Unramified => "R6-unramified",
        }
    }
}

impl fmt::Display for ObstructionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// A concrete witness that the covering cannot be Galois.
#[derive(Debug, Clone)]
pub struct Obstruction {
    pub rule: ObstructionRule,
    pub line: ProjLine,
    pub witnesses: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "GALOIS-certified")]
    GaloisCertified,
    #[serde(rename = "NOT-GALOIS-certified")]
    NotGaloisCertified,
    #[serde(rename = "INCONCLUSIVE")]
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::GaloisCertified => "GALOIS-certified",
            Verdict::NotGaloisCertified => "NOT-GALOIS-certified",
            Verdict::Inconclusive => "INCONCLUSIVE",
        };
        write!(f, "{}", s)
    }
}

/// Full per-center result.
#[derive(Debug)]
pub struct GaloisVerdict {
    pub center: ProjPoint,
    pub degree: u32,
    pub deck: Vec<(Mat3, u64)>,
    pub verdict: Verdict,
    pub obstruction: Option<Obstruction>,
    /// Lines whose fibers were skipped (unsplit or unresolved center data).
    pub skipped_lines: Vec<String>,
}

impl GaloisVerdict {
    pub fn deck_order(&self) -> usize {
        self.deck.len()
    }
}

/// Serializable verdict row.
#[derive(Debug, Clone, Serialize)]
pub struct VerdictRow {
    pub point: String,
    pub degree: u32,
    pub deck_order: usize,
    pub verdict: Verdict,
    pub obstruction: Option<ObstructionRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ObstructionRow {
    pub rule: String,
    pub line: String,
    pub witnesses: Vec<String>,
}

impl GaloisVerdict {
    pub fn row(&self) -> VerdictRow {
        VerdictRow {
            point: self.center.to_string(),
            degree: self.degree,
            deck_order: self.deck_order(),
            verdict: self.verdict,
            obstruction: self.obstruction.as_ref().map(|o| ObstructionRow {
                rule: o.rule.label().to_string(),
                line: o.line.to_string(),
                witnesses: o.witnesses.clone(),
            }),
        }
    }
}

/// What the center looks like locally.
enum CenterData {
    OffCurve,
    Smooth { tangent: ProjLine },
    /// Singular center with its record; `unibranch` distinguishes the single
    /// tangent direction case from the ordinary case.
    Singular { record: SingularRecord, unibranch: bool },
}

/// Per-curve analysis context: the singular locus and cached low-degree
/// curve points are shared by every candidate center.
pub struct ProjectionAnalyzer<'c> {
    curve: &'c Curve,
    config: EngineConfig,
    sing: Vec<SingularRecord>,
    sing_index: BTreeMap<ProjPoint, usize>,
    /// Smooth curve points over small extensions with their tangent lines.
    low_points: Vec<(ProjPoint, ProjLine)>,
}

impl<'c> ProjectionAnalyzer<'c> {
    pub fn new(curve: &'c Curve, config: EngineConfig) -> Result<ProjectionAnalyzer<'c>> {
        let params = curve.params();
        let scan_ext = (params.n - params.m).max(params.n - 1);
        let report = find_singular_points(curve, scan_ext)?;
        if !report.matches_prediction() {
            // obstruction soundness leans on the verified singular locus
            return Err(Error::EngineInconsistency(format!(
                "singular locus of {} does not match its classification: {:?}",
                params, report.mismatches
            )));
        }
        let sing = report.records;
        let sing_index = sing.iter().enumerate().map(|(i, r)| (r.point.clone(), i)).collect();

        let ctx = curve.ctx();
        let q = params.q;
        let ambient_over_q = ctx.degree() / params.e();
        let mut low_points = Vec::new();
        for w in 1..=ambient_over_q {
            if ambient_over_q % w != 0 {
                continue;
            }
            let plane_size = match q.checked_pow(2 * w) {
                Some(s) => s + q.pow(w) + 1,
                None => continue,
            };
            if plane_size > config.low_point_plane_cap {
                continue;
            }
            for r in enumerate_plane(ctx, q, w)? {
                if r.field_of_definition(q) == w && curve.is_on_curve(&r) {
                    if let Some(t) = curve.gradient_line(&r) {
                        low_points.push((r, t));
                    }
                }
            }
        }
        low_points.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(ProjectionAnalyzer { curve, config, sing, sing_index, low_points })
    }

    pub fn curve(&self) -> &Curve {
        self.curve
    }

    pub fn singular_records(&self) -> &[SingularRecord] {
        &self.sing
    }

    fn center_data(&self, p: &ProjPoint) -> Result<CenterData> {
        if !self.curve.is_on_curve(p) {
            return Ok(CenterData::OffCurve);
        }
        if let Some(t) = self.curve.gradient_line(p) {
            return Ok(CenterData::Smooth { tangent: t });
        }
        let record = match self.sing_index.get(p) {
            Some(&i) => self.sing[i].clone(),
            None => build_record(self.curve, p.clone())?,
        };
        let unibranch =
            record.tangents.len() == 1 && record.tangents[0].cone_mult == record.multiplicity;
        Ok(CenterData::Singular { record, unibranch })
    }

    /// deg F minus the multiplicity of the center on the curve.
    pub fn projection_degree(&self, p: &ProjPoint) -> Result<u32> {
        let mult = match self.center_data(p)? {
            CenterData::OffCurve => 0,
            CenterData::Smooth { .. } => 1,
            CenterData::Singular { record, .. } => record.multiplicity,
        };
        Ok(self.curve.degree() - mult)
    }

    // -- positive direction -------------------------------------------------

    /// A deterministic invertible matrix sending (0 : 1 : 0) to the center.
    fn conjugation_matrix(&self, p: &ProjPoint) -> Mat3 {
        let ctx = self.curve.ctx();
        let pivot = p.coords().iter().position(|&c| c != 0).unwrap();
        let others: Vec<usize> = (0..3).filter(|&i| i != pivot).collect();
        let mut rows = [[0u64; 3]; 3];
        rows[others[0]][0] = 1;
        rows[others[1]][2] = 1;
        let pc = p.coords();
        for i in 0..3 {
            rows[i][1] = pc[i];
        }
        let m = Mat3::new(ctx, rows);
        debug_assert_ne!(m.det(), 0);
        m
    }

    /// All linear deck transformations of the projection from P found by the
    /// pencil-fixing search with parameters in GF(q^search_ext): the
    /// conjugates of x -> x, y -> gamma*x + mu*y + beta*z, z -> z that
    /// stabilize the curve. The returned set is verified to be closed under
    /// composition and to fix the pencil through P.
    pub fn linear_deck_group(&self, p: &ProjPoint, search_ext: u32) -> Result<Vec<(Mat3, u64)>> {
        let curve = self.curve;
        let ctx = curve.ctx();
        let q = curve.params().q;
        let codes = crate::geom::subfield_codes_checked(ctx, q, search_ext)?;
        let m = self.conjugation_matrix(p);
        let m_inv = m.inverse()?;
        // sample curve points for the cheap stabilizer pre-filter
        let samples: Vec<[u64; 3]> = self
            .low_points
            .iter()
            .rev()
            .take(4)
            .map(|(r, _)| r.coords())
            .collect();
        let mut candidates = Vec::new();
        for &mu in codes.iter().filter(|&&c| c != 0) {
            for &gamma in &codes {
                for &beta in &codes {
                    candidates.push((gamma, mu, beta));
                }
            }
        }
        let found: Vec<(Mat3, u64)> = candidates
            .into_par_iter()
            .filter_map(|(gamma, mu, beta)| {
                let b = Mat3::new(ctx, [[1, 0, 0], [gamma, mu, beta], [0, 0, 1]]);
                let a = m.mul(&b).mul(&m_inv);
                // pre-filter: a stabilizer maps curve points to curve points
                for s in &samples {
                    let img = [
                        row_dot(ctx, a.rows()[0], *s),
                        row_dot(ctx, a.rows()[1], *s),
                        row_dot(ctx, a.rows()[2], *s),
                    ];
                    if curve.f().eval_raw(img) != 0 {
                        return None;
                    }
                }
                match curve.stabilizes(&a) {
                    Ok(Some(lambda)) => Some((a, lambda)),
                    _ => None,
                }
            })
            .collect();
        // soundness: closure under composition (mod scalar) and pencil fixing
        let keys: BTreeSet<[[u64; 3]; 3]> =
            found.iter().map(|(a, _)| a.normalized().rows()).collect();
        for (a, _) in &found {
            for (b, _) in &found {
                let prod = a.mul(b).normalized();
                assert!(
                    keys.contains(&prod.rows()),
                    "deck set not closed under composition at {}",
                    p
                );
            }
        }
        for (a, _) in found.iter().take(8) {
            assert!(self.fixes_pencil(p, a), "deck element does not fix the pencil at {}", p);
        }
        Ok(found)
    }

    /// Does the transformation map every line through P to itself (checked
    /// on three sample lines)?
    fn fixes_pencil(&self, p: &ProjPoint, a: &Mat3) -> bool {
        let ctx = self.curve.ctx();
        let mut seen = 0;
        for raw in [[1u64, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 0], [1, 0, 1]] {
            let Ok(r) = ProjPoint::new(ctx, raw) else { continue };
            if r == *p {
                continue;
            }
            let line = line_through(p, &r).unwrap();
            let (u, v) = line.span_points();
            let img = line_through(&a.apply(&u), &a.apply(&v)).unwrap();
            if img != line {
                return false;
            }
            seen += 1;
            if seen == 3 {
                break;
            }
        }
        true
    }

    /// Positive certification: a linear deck group of order equal to the
    /// covering degree forces the covering to be Galois.
    pub fn certify_galois(&self, p: &ProjPoint, search_ext: u32) -> Result<GaloisVerdict> {
        let degree = self.projection_degree(p)?;
        let deck = self.linear_deck_group(p, search_ext)?;
        let verdict = if deck.len() as u32 == degree && degree > 1 {
            self.verify_deck_structure(p, &deck)?;
            Verdict::GaloisCertified
        } else {
            Verdict::Inconclusive
        };
        Ok(GaloisVerdict {
            center: p.clone(),
            degree,
            deck,
            verdict,
            obstruction: None,
            skipped_lines: Vec::new(),
        })
    }

    /// Check the shear/dilation presentation of a certified deck group: the
    /// shears form a subgroup with parameters adding componentwise, and
    /// conjugating a shear by a dilation scales both parameters by mu.
    fn verify_deck_structure(&self, p: &ProjPoint, deck: &[(Mat3, u64)]) -> Result<()> {
        let ctx = self.curve.ctx();
        let m = self.conjugation_matrix(p);
        let m_inv = m.inverse()?;
        let mut params = Vec::with_capacity(deck.len());
        for (a, _) in deck {
            let b = m_inv.mul(a).mul(&m).normalized();
            let r = b.rows();
            // expect rows (1,0,0), (gamma,mu,beta), (0,0,1) after scaling
            assert_eq!(r[0], [1, 0, 0], "deck element not in pencil normal form at {}", p);
            assert_eq!(r[2], [0, 0, 1], "deck element not in pencil normal form at {}", p);
            params.push((r[1][0], r[1][1], r[1][2])); // (gamma, mu, beta)
        }
        let key: BTreeSet<(u64, u64, u64)> = params.iter().copied().collect();
        for &(g1, mu1, b1) in &params {
            for &(g2, mu2, b2) in &params {
                // composite parameters of the product of two pencil maps
                let g = ctx.add_raw(g1, ctx.mul_raw(mu1, g2));
                let mu = ctx.mul_raw(mu1, mu2);
                let b = ctx.add_raw(b1, ctx.mul_raw(mu1, b2));
                assert!(key.contains(&(g, mu, b)), "group not closed in parameters at {}", p);
                if mu1 == 1 && mu2 == 1 {
                    // shears compose by adding parameters
                    assert_eq!((g, b), (ctx.add_raw(g1, g2), ctx.add_raw(b1, b2)));
                }
            }
        }
        // tau_mu sigma_{g,b} tau_mu^{-1} = sigma_{mu g, mu b}
        let dilations: Vec<u64> =
            params.iter().filter(|&&(g, _, b)| g == 0 && b == 0).map(|&(_, mu, _)| mu).collect();
        let shears: Vec<(u64, u64)> =
            params.iter().filter(|&&(_, mu, _)| mu == 1).map(|&(g, _, b)| (g, b)).collect();
        for &mu in &dilations {
            for &(g, b) in &shears {
                let conj = (ctx.mul_raw(mu, g), 1, ctx.mul_raw(mu, b));
                assert!(
                    key.contains(&conj),
                    "dilation conjugate of a shear missing at {}",
                    p
                );
            }
        }
        Ok(())
    }

    // -- negative direction -------------------------------------------------

    /// Fiber data over a line through the center, allowing unsplit residual
    /// mass. `Err` is returned only for structural problems (line off the
    /// center, unresolved center tangency).
    pub fn fiber_data(&self, p: &ProjPoint, line: &ProjLine) -> Result<FiberData> {
        if !line.contains(p) {
            return Err(Error::NotOnLine(p.to_string(), line.to_string()));
        }
        let curve = self.curve;
        let ctx = curve.ctx();
        let (b, d) = line.span_points();
        let form = curve.f().restrict(b.coords(), d.coords());
        if form.is_zero() {
            return Err(Error::InfiniteOrder);
        }
        let codes: Vec<u64> = (0..ctx.size()).collect();
        let report = form.squarefree_and_roots(&codes);
        let mut branches: Vec<BranchIndex> = Vec::new();
        let mut center_imult = 0u32;
        let mut bezout_known = 0u32;
        for ((s, t), imult) in &report.roots {
            let coords = crate::geom::combine(ctx, *s, b.coords(), *t, d.coords());
            let r = ProjPoint::new(ctx, coords).unwrap();
            bezout_known += imult;
            if r == *p {
                center_imult = *imult;
                continue;
            }
            self.branches_at(&r, *imult, &mut branches)?;
        }
        // center branches: only the branch tangent to this very line lands
        // in this fiber, with index (contact along the line) - (multiplicity)
        match self.center_data(p)? {
            CenterData::OffCurve => {}
            CenterData::Smooth { tangent } => {
                if tangent == *line {
                    let e = center_imult
                        .checked_sub(1)
                        .expect("tangent line contact must exceed zero");
                    if e >= 1 {
                        branches.push(BranchIndex {
                            point: p.clone(),
                            branch_id: 0,
                            e: BranchValue::Exact(e),
                            source: BranchSource::CenterSmooth,
                        });
                    }
                }
            }
            CenterData::Singular { record, unibranch } => {
                if !record.cone_split {
                    return Err(Error::InvalidParams(format!(
                        "tangent cone at center {} did not split; fiber bookkeeping unavailable",
                        p
                    )));
                }
                let mu = record.multiplicity;
                let tangent_here = record.tangents.iter().any(|t| t.line == *line);
                if tangent_here {
                    let e = center_imult - mu;
                    let source = if unibranch {
                        BranchSource::CenterUnibranch
                    } else {
                        BranchSource::CenterOrdinary
                    };
                    if e >= 1 {
                        branches.push(BranchIndex {
                            point: p.clone(),
                            branch_id: 0,
                            e: BranchValue::Exact(e),
                            source,
                        });
                    }
                }
            }
        }
        branches.sort_by_key(|b| (b.point.clone(), b.branch_id));
        let leftover = curve.degree() - bezout_known;
        Ok(FiberData {
            line: line.clone(),
            branches,
            leftover_degree: leftover,
            fully_split: leftover == 0,
        })
    }

    /// Branch indices over a non-center point of the fiber with known
    /// intersection multiplicity along the line.
    fn branches_at(&self, r: &ProjPoint, imult: u32, out: &mut Vec<BranchIndex>) -> Result<()> {
        match self.sing_index.get(r) {
            None => {
                // smooth by the verified classification; checked cheaply
                debug_assert!(self.curve.gradient_line(r).is_some());
                out.push(BranchIndex {
                    point: r.clone(),
                    branch_id: 0,
                    e: BranchValue::Exact(imult),
                    source: BranchSource::SmoothExact,
                });
            }
            Some(&idx) => {
                let rec = &self.sing[idx];
                let mu = rec.multiplicity;
                let unibranch = rec.case.map_or(
                    rec.tangents.len() == 1 && rec.tangents[0].cone_mult == mu,
                    |c| c.is_unibranch(),
                );
                if unibranch {
                    let e = BranchValue::Exact(imult);
                    if let Some(case) = rec.case {
                        // classification cross-check: the contact along any
                        // line is the multiplicity or the tangent contact
                        let (mult, _, contact) = crate::local::expected_local_data(self.curve, case);
                        debug_assert!(
                            imult == mult || imult == contact,
                            "unexpected unibranch contact {} at {}",
                            imult,
                            r
                        );
                    }
                    out.push(BranchIndex {
                        point: r.clone(),
                        branch_id: 0,
                        e,
                        source: BranchSource::UnibranchExact,
                    });
                } else {
                    // ordinary point: branches are smooth with distinct
                    // tangents, so at most one meets the line with excess
                    debug_assert!(imult >= mu);
                    let excess = imult - mu;
                    for i in 0..mu {
                        let e = if i == 0 && excess > 0 { 1 + excess } else { 1 };
                        out.push(BranchIndex {
                            point: r.clone(),
                            branch_id: i,
                            e: BranchValue::Exact(e),
                            source: BranchSource::OrdinarySplit,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// The public strict fiber operation: errors when the fiber does not
    /// split completely over the ambient field, naming the extension needed.
    pub fn ramification_profile(&self, p: &ProjPoint, line: &ProjLine) -> Result<FiberData> {
        let fiber = self.fiber_data(p, line)?;
        if !fiber.fully_split {
            let params = self.curve.params();
            let ambient_over_q = self.curve.ctx().degree() / params.e();
            // degree over GF(q) of the smallest field gaining a fiber point
            let needed = self.residual_extension(line) * ambient_over_q;
            return Err(Error::UnsplitFiber {
                line: line.to_string(),
                q: params.q,
                searched: ambient_over_q,
                leftover: fiber.leftover_degree,
                needed,
            });
        }
        Ok(fiber)
    }

    /// Smallest extension degree of the ambient field over which the
    /// residual part of the fiber would gain a point.
    fn residual_extension(&self, line: &ProjLine) -> u32 {
        let ctx = self.curve.ctx();
        let (b, d) = line.span_points();
        let form = self.curve.f().restrict(b.coords(), d.coords());
        // strip the located linear factors: divide the dehomogenization by
        // (u - root) per multiplicity, tracking the residual polynomial
        let mut g: Vec<u64> = form.coeffs().to_vec();
        unipoly::trim(&mut g);
        for code in 0..ctx.size() {
            while !g.is_empty() && unipoly::eval(ctx, &g, code) == 0 {
                g = unipoly::deflate(ctx, &g, code);
            }
        }
        if g.len() <= 1 {
            return 1;
        }
        unipoly::smallest_splitting_extension(ctx, &g)
    }

    fn is_fq_line(&self, line: &ProjLine) -> bool {
        line.frobenius(self.curve.params().q) == *line
    }

    /// Evaluate the obstruction rules on one fiber.
    fn check_fiber(
        &self,
        p: &ProjPoint,
        center: &CenterData,
        fiber: &FiberData,
        degree: u32,
    ) -> Option<Obstruction> {
        let line = &fiber.line;
        // R1: every exact index divides the covering degree
        for br in &fiber.branches {
            if let BranchValue::Exact(e) = br.e {
                if e > 0 && degree % e != 0 {
                    return Some(Obstruction {
                        rule: ObstructionRule::R1Divisibility,
                        line: line.clone(),
                        witnesses: vec![format!(
                            "{} carries branch index {} which does not divide deg = {}",
                            br.point, e, degree
                        )],
                    });
                }
            }
        }
        // R2 and R3: a single common index must be consistent with every
        // branch and with the unsplit smooth mass
        if !fiber.branches.is_empty() {
            let mut common: Option<BTreeSet<u32>> = None;
            let mut first_exact: Option<&BranchIndex> = None;
            for br in &fiber.branches {
                let set: BTreeSet<u32> = match &br.e {
                    BranchValue::Exact(e) => {
                        if let Some(prev) = first_exact {
                            if let BranchValue::Exact(pe) = prev.e {
                                if pe != *e {
                                    return Some(Obstruction {
                                        rule: ObstructionRule::R2EqualIndices,
                                        line: line.clone(),
                                        witnesses: vec![
                                            format!("{} has branch index {}", prev.point, pe),
                                            format!("{} has branch index {}", br.point, e),
                                        ],
                                    });
                                }
                            }
                        } else {
                            first_exact = Some(br);
                        }
                        [*e].into_iter().collect()
                    }
                    BranchValue::Candidates(cands) => cands.iter().copied().collect(),
                };
                common = Some(match common {
                    None => set,
                    Some(cur) => cur.intersection(&set).copied().collect(),
                });
            }
            let common = common.unwrap();
            if common.is_empty() {
                return Some(Obstruction {
                    rule: ObstructionRule::R2EqualIndices,
                    line: line.clone(),
                    witnesses: vec!["no index is compatible with every branch".to_string()],
                });
            }
            let feasible: Vec<u32> = common
                .into_iter()
                .filter(|&e| {
                    if fiber.leftover_degree > 0 {
                        // unsplit mass sits at smooth points, each absorbing e
                        e > 0 && fiber.leftover_degree % e == 0
                    } else {
                        // fully split: indices sum to the covering degree
                        e as usize * fiber.branches.len() == degree as usize
                    }
                })
                .collect();
            if feasible.is_empty() {
                return Some(Obstruction {
                    rule: ObstructionRule::R3FiberSum,
                    line: line.clone(),
                    witnesses: vec![format!(
                        "no common index fits {} branches, unsplit mass {}, deg = {}",
                        fiber.branches.len(),
                        fiber.leftover_degree,
                        degree
                    )],
                });
            }
        }
        // R4 / R5: rationality constraints on lines through smooth
        // ramification data of the doubly Frobenius nonclassical curve
        if !self.is_fq_line(line) {
            let smooth_ram: Vec<&BranchIndex> = fiber
                .branches
                .iter()
                .filter(|b| {
                    b.source == BranchSource::SmoothExact
                        && matches!(b.e, BranchValue::Exact(e) if e >= 2)
                })
                .collect();
            match center {
                CenterData::OffCurve | CenterData::Singular { .. } => {
                    if let Some(br) = smooth_ram.first() {
                        return Some(Obstruction {
                            rule: ObstructionRule::R4Rationality,
                            line: line.clone(),
                            witnesses: vec![format!(
                                "smooth ramification point {} (index {:?}) on a non-rational line",
                                br.point, br.e
                            )],
                        });
                    }
                }
                CenterData::Smooth { tangent } => {
                    // tangent at a ramified smooth center must be rational
                    if tangent == line {
                        if let Some(cb) = fiber.branches.iter().find(|b| {
                            b.source == BranchSource::CenterSmooth
                                && matches!(b.e, BranchValue::Exact(e) if e >= 2)
                        }) {
                            return Some(Obstruction {
                                rule: ObstructionRule::R5RationalityInner,
                                line: line.clone(),
                                witnesses: vec![format!(
                                    "center {} is ramified (index {:?}) on a non-rational tangent",
                                    p, cb.e
                                )],
                            });
                        }
                    }
                    // a smooth ramification point plus a second smooth point
                    // on the secant forces rationality
                    if let Some(br) = smooth_ram.first() {
                        let second = fiber.branches.iter().find(|b| {
                            b.source == BranchSource::SmoothExact && b.point != br.point
                        });
                        if let Some(other) = second {
                            return Some(Obstruction {
                                rule: ObstructionRule::R5RationalityInner,
                                line: line.clone(),
                                witnesses: vec![
                                    format!(
                                        "smooth ramification point {} (index {:?})",
                                        br.point, br.e
                                    ),
                                    format!("second smooth point {} on the same line", other.point),
                                ],
                            });
                        }
                    }
                }
            }
        }
        None
    }

    /// Deterministic queue of candidate lines through the center, ordered to
    /// find witnesses fast: lines to singular points, tangent lines at the
    /// center, tangent lines of cached and polar-located smooth points,
    /// rational lines, lines to low-degree points, then seeded random lines.
    fn line_queue(&self, p: &ProjPoint) -> Result<Vec<ProjLine>> {
        let curve = self.curve;
        let ctx = curve.ctx();
        let q = curve.params().q;
        let mut queue: Vec<ProjLine> = Vec::new();
        let mut seen: BTreeSet<[u64; 3]> = BTreeSet::new();
        let mut push = |queue: &mut Vec<ProjLine>, line: ProjLine| {
            if seen.insert(line.coords()) {
                queue.push(line);
            }
        };
        for rec in &self.sing {
            if rec.point != *p {
                push(&mut queue, line_through(p, &rec.point)?);
            }
        }
        match self.center_data(p)? {
            CenterData::OffCurve => {}
            CenterData::Smooth { tangent } => push(&mut queue, tangent),
            CenterData::Singular { record, .. } => {
                for t in &record.tangents {
                    push(&mut queue, t.line.clone());
                }
            }
        }
        for (r, tangent) in &self.low_points {
            if r != p && tangent.contains(p) {
                push(&mut queue, tangent.clone());
            }
        }
        for r in self.polar_tangency_points(p) {
            if r != *p {
                push(&mut queue, line_through(p, &r)?);
            }
        }
        for l in fq_lines(ctx, q)? {
            if l.contains(p) {
                push(&mut queue, l);
            }
        }
        for r in enumerate_plane(ctx, q, 2.min(ctx.degree() / curve.params().e()))? {
            if r != *p {
                push(&mut queue, line_through(p, &r)?);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed ^ hash_point(p));
        let mut budget = self.config.random_line_budget;
        let mut attempts = 0;
        while budget > 0 && attempts < 100 * self.config.random_line_budget {
            attempts += 1;
            let raw = [
                rng.random_range(0..ctx.size()),
                rng.random_range(0..ctx.size()),
                rng.random_range(0..ctx.size()),
            ];
            let Ok(r) = ProjPoint::new(ctx, raw) else { continue };
            if r == *p {
                continue;
            }
            let line = line_through(p, &r)?;
            if seen.insert(line.coords()) {
                queue.push(line);
                budget -= 1;
            }
        }
        Ok(queue)
    }

    /// All points of the curve over the ambient field whose tangent line
    /// passes through the center: common zeros of F and the polar of the
    /// center, located slice by slice.
    pub fn polar_tangency_points(&self, p: &ProjPoint) -> Vec<ProjPoint> {
        let curve = self.curve;
        let ctx = curve.ctx();
        let [fx, fy, fz] = curve.partials();
        let pc = p.coords();
        let polar = fx
            .scale(pc[0])
            .add(&fy.scale(pc[1]))
            .add(&fz.scale(pc[2]));
        if polar.is_zero() {
            return Vec::new();
        }
        let codes: Vec<u64> = (0..ctx.size()).collect();
        let mut out: Vec<ProjPoint> = codes
            .par_iter()
            .flat_map_iter(|&x0| {
                let f_y = curve.f().univariate_in_y(x0, 1);
                let g_y = polar.univariate_in_y(x0, 1);
                let g = unipoly::gcd(ctx, &f_y, &g_y);
                let mut pts = Vec::new();
                if g.len() > 1 {
                    for y0 in unipoly::roots_by_scan(ctx, &g, &codes) {
                        pts.push(ProjPoint::new(ctx, [x0, y0, 1]).unwrap());
                    }
                }
                pts
            })
            .collect();
        // the line z = 0
        let f_inf = curve.f().restrict([1, 0, 0], [0, 1, 0]);
        let p_inf = polar.restrict([1, 0, 0], [0, 1, 0]);
        if !f_inf.is_zero() && !p_inf.is_zero() {
            let g = f_inf.gcd(&p_inf);
            if g.degree() > 0 {
                for ((s, t), _) in g.squarefree_and_roots(&codes).roots {
                    out.push(ProjPoint::new(ctx, [s, t, 0]).unwrap());
                }
            }
        }
        out.retain(|r| curve.gradient_line(r).is_some());
        out.sort();
        out.dedup();
        out
    }

    /// Negative certification: search the line queue for a fiber violating a
    /// Galois-covering consequence, then fall back to the global
    /// no-ramification-locus rule.
    pub fn obstruction_check(&self, p: &ProjPoint) -> Result<GaloisVerdict> {
        let degree = self.projection_degree(p)?;
        let center = self.center_data(p)?;
        let mut skipped = Vec::new();
        let mut obstruction = None;
        for line in self.line_queue(p)? {
            let fiber = match self.fiber_data(p, &line) {
                Ok(f) => f,
                Err(Error::InvalidParams(msg)) => {
                    skipped.push(msg);
                    continue;
                }
                Err(e) => return Err(e),
            };
            if !fiber.fully_split && fiber.branches.is_empty() {
                skipped.push(format!(
                    "{}: fiber did not split (residual degree {})",
                    line, fiber.leftover_degree
                ));
                continue;
            }
            if let Some(found) = self.check_fiber(p, &center, &fiber, degree) {
                obstruction = Some(found);
                break;
            }
        }
        if obstruction.is_none() {
            obstruction = self.global_unramified_obstruction(p, degree)?;
        }
        let verdict = if obstruction.is_some() {
            Verdict::NotGaloisCertified
        } else {
            Verdict::Inconclusive
        };
        Ok(GaloisVerdict {
            center: p.clone(),
            degree,
            deck: Vec::new(),
            verdict,
            obstruction,
            skipped_lines: skipped,
        })
    }

    /// Every covering of the line of degree at least 2 ramifies somewhere.
    /// For an off-curve center a Galois covering can only ramify at a
    /// singular point of the curve, at a smooth point whose joining line is
    /// rational (rationality is forced by the double Frobenius
    /// nonclassicality), or nowhere. If every singular point is ordinary and
    /// met transversally from the center, ordinary branches are unramified;
    /// if in addition every rational line through the center has a fully
    /// split fiber free of ramification, no ramification locus remains and
    /// the covering cannot be Galois.
    fn global_unramified_obstruction(
        &self,
        p: &ProjPoint,
        degree: u32,
    ) -> Result<Option<Obstruction>> {
        if degree < 2 || self.curve.is_on_curve(p) {
            return Ok(None);
        }
        if !self.sing.iter().all(|r| r.ordinary) {
            // unibranch singular points ramify for every center
            return Ok(None);
        }
        let mut evidence_line = None;
        for rec in &self.sing {
            let line = line_through(p, &rec.point)?;
            let i = intersection_multiplicity(self.curve, &line, &rec.point)?;
            if i != rec.multiplicity {
                // tangent from the center: that fiber genuinely ramifies
                return Ok(None);
            }
            evidence_line.get_or_insert(line);
        }
        let q = self.curve.params().q;
        for l in fq_lines(self.curve.ctx(), q)? {
            if !l.contains(p) {
                continue;
            }
            let fiber = self.fiber_data(p, &l)?;
            let ramified = !fiber.fully_split
                || fiber
                    .branches
                    .iter()
                    .any(|b| !matches!(b.e, BranchValue::Exact(1)));
            if ramified {
                return Ok(None);
            }
            evidence_line.get_or_insert(l);
        }
        let evidence_line = match evidence_line {
            Some(l) => l,
            // no singular points and no rational line through the center:
            // use a representative pencil line for the report
            None => {
                let r = enumerate_plane(self.curve.ctx(), q, 1)?
                    .into_iter()
                    .find(|r| r != p)
                    .unwrap();
                line_through(p, &r)?
            }
        };
        Ok(Some(Obstruction {
            rule: ObstructionRule::R6Unramified,
            line: evidence_line,
            witnesses: vec![
                format!("covering degree {} needs a ramification point", degree),
                "center is off the curve, so no center branch ramifies".to_string(),
                "every singular point is ordinary and met transversally, so its branches are unramified in a Galois covering".to_string(),
                "a smooth ramification point forces a rational line through the center, and every such line has a fully split transverse fiber".to_string(),
            ],
        }))
    }

    /// Full per-candidate analysis: both engines, with the consistency
    /// guarantee that no point is certified in both directions.
    pub fn analyze(&self, p: &ProjPoint) -> Result<GaloisVerdict> {
        let positive = self.certify_galois(p, self.config.search_ext)?;
        let negative = self.obstruction_check(p)?;
        if positive.verdict == Verdict::GaloisCertified {
            if negative.verdict == Verdict::NotGaloisCertified {
                return Err(Error::EngineInconsistency(format!(
                    "{} certified Galois and non-Galois simultaneously",
                    p
                )));
            }
            return Ok(GaloisVerdict { skipped_lines: negative.skipped_lines, ..positive });
        }
        Ok(GaloisVerdict {
            center: p.clone(),
            degree: positive.degree,
            deck: positive.deck,
            verdict: negative.verdict,
            obstruction: negative.obstruction,
            skipped_lines: negative.skipped_lines,
        })
    }

    /// Analyze a list of candidates; verdict order follows the input.
    pub fn scan(&self, candidates: &[ProjPoint]) -> Result<Vec<GaloisVerdict>> {
        candidates.par_iter().map(|p| self.analyze(p)).collect()
    }

    /// Seeded sample of points off the curve over the ambient field.
    pub fn sample_off_curve(&self, count: usize) -> Vec<ProjPoint> {
        let ctx = self.curve.ctx();
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed.wrapping_add(0x0ff));
        let mut out = BTreeSet::new();
        while out.len() < count {
            let raw = [
                rng.random_range(0..ctx.size()),
                rng.random_range(0..ctx.size()),
                rng.random_range(0..ctx.size()),
            ];
            if let Ok(r) = ProjPoint::new(ctx, raw) {
                if !self.curve.is_on_curve(&r) {
                    out.insert(r);
                }
            }
        }
        out.into_iter().collect()
    }
}

fn row_dot(ctx: &FieldCtx, row: [u64; 3], v: [u64; 3]) -> u64 {
    let mut acc = 0u64;
    for i in 0..3 {
        acc = ctx.add_raw(acc, ctx.mul_raw(row[i], v[i]));
    }
    acc
}

fn hash_point(p: &ProjPoint) -> u64 {
    let c = p.coords();
    c[0].wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ c[1].wrapping_mul(0xC2B2_AE3D_27D4_EB4F)
        ^ c[2].wrapping_mul(0x1656_67B1_9E37_79F9)
}
