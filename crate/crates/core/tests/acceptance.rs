//! Acceptance suite: one test per criterion, each printing a PASS line.
//!
//! The parameter sets exercised throughout are the nine desk-scale members
//! of the family: (n, m) in {(3,1), (3,2), (4,1), (4,3), (5,2), (5,3),
//! (5,4)} over GF(2) and (3,1), (3,2) over GF(3).

use std::time::Instant;

use fncurve::field::FieldCtx;
use fncurve::fncurve::{
    build_determinant, rational_line_product, sigma_matrix, tau_matrix, Curve, CurveParams,
};
use fncurve::galois::{EngineConfig, ProjectionAnalyzer, Verdict};
use fncurve::geom::{det3, enumerate_plane, lies_on_fq_line, ProjPoint};
use fncurve::local::find_singular_points;
use fncurve::poly::{Mono, TriPoly};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const DESK_PARAMS: [(u64, u32, u32); 9] = [
    (2, 3, 1),
    (2, 3, 2),
    (3, 3, 1),
    (3, 3, 2),
    (2, 4, 1),
    (2, 4, 3),
    (2, 5, 2),
    (2, 5, 3),
    (2, 5, 4),
];

fn build(q: u64, n: u32, m: u32) -> Curve {
    Curve::build(CurveParams::new(q, n, m).unwrap()).unwrap()
}

#[test]
fn criterion_1_construction() {
    // q^n + q^m - q^2 - q per parameter set
    let expected_degrees = [4u32, 6, 18, 24, 12, 18, 30, 34, 42];
    let t0 = Instant::now();
    for (&(q, n, m), &deg) in DESK_PARAMS.iter().zip(expected_degrees.iter()) {
        // Curve::build performs the exact division and asserts the
        // recomposition D2 * F = D1; a nonzero remainder would error here.
        let curve = build(q, n, m);
        assert_eq!(curve.f().homogeneous_degree(), Some(deg), "degree at ({}, {}, {})", n, m, q);
        assert!(curve.d2().mul(curve.f()).sub(curve.d1()).is_zero());
        // all coefficients live in the base field
        assert!(curve.f().coeffs_in_subfield(q));
    }
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs() < 10, "construction took {:?}", elapsed);
    println!("criterion 1 (construction, all nine parameter sets): PASS in {:?}", elapsed);
}

#[test]
fn criterion_2_golden_quartic() {
    let curve = build(2, 3, 1);
    let golden = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/testdata/golden_quartic.txt"
    ))
    .unwrap();
    assert_eq!(curve.f().to_string(), golden.trim());
    // structural form: (x^2 + xz)^2 + (x^2 + xz)(y^2 + yz) + (y^2 + yz)^2 + z^4
    let ctx = curve.ctx();
    let term = |x, y, z| TriPoly::monomial(ctx, Mono::new(x, y, z), 1);
    let a = term(2, 0, 0).add(&term(1, 0, 1));
    let b = term(0, 2, 0).add(&term(0, 1, 1));
    let expected = a.mul(&a).add(&a.mul(&b)).add(&b.mul(&b)).add(&term(0, 0, 4));
    // exact coefficient match (the division is monic here, scalar = 1)
    assert!(curve.f().sub(&expected).is_zero());
    println!("criterion 2 (golden quartic): PASS");
}

#[test]
fn criterion_3_double_frobenius_nonclassicality() {
    for (q, n, m) in DESK_PARAMS {
        let curve = build(q, n, m);
        assert!(
            curve.check_frobenius_nonclassical(n).unwrap(),
            "identity fails for N = n at ({}, {}, {})",
            n,
            m,
            q
        );
        assert!(
            curve.check_frobenius_nonclassical(m).unwrap(),
            "identity fails for N = m at ({}, {}, {})",
            n,
            m,
            q
        );
        // independent point oracle: the tangent line at each of 200 sampled
        // smooth points passes through both Frobenius images
        let mut rng = ChaCha8Rng::seed_from_u64(oracle_seed(q, n, m));
        let pts = curve.sample_smooth_points(200, &mut rng);
        assert_eq!(pts.len(), 200, "not enough smooth points at ({}, {}, {})", n, m, q);
        for r in &pts {
            assert!(curve.tangent_meets_frobenius_image(r, n));
            assert!(curve.tangent_meets_frobenius_image(r, m));
        }
    }
    println!("criterion 3 (double Frobenius nonclassicality + point oracle): PASS");
}

fn oracle_seed(q: u64, n: u32, m: u32) -> u64 {
    q.wrapping_mul(1_000_003) ^ ((n as u64) << 8) ^ m as u64
}

#[test]
fn criterion_4_singularity_classification() {
    let t0 = Instant::now();
    for (q, n, m) in DESK_PARAMS {
        let curve = build(q, n, m);
        let max_ext = (n - m).max(n - 1);
        let report = find_singular_points(&curve, max_ext).unwrap();
        assert!(
            report.matches_prediction(),
            "classification mismatch at ({}, {}, {}): {:?}",
            n,
            m,
            q,
            report.mismatches
        );
    }
    println!("criterion 4 (singularity classification, zero mismatches): PASS in {:?}", t0.elapsed());
}

#[test]
fn criterion_5_base_plane_galois_certification() {
    for (q, n, m) in [(2u64, 3u32, 1u32), (2, 3, 2), (3, 3, 1), (3, 3, 2)] {
        let curve = build(q, n, m);
        let analyzer = ProjectionAnalyzer::new(&curve, EngineConfig::default()).unwrap();
        let expected = (q * q * (q - 1)) as u32;
        assert_eq!(expected, (q.pow(3) - q * q) as u32);
        for p in enumerate_plane(curve.ctx(), q, 1).unwrap() {
            // analyze runs the deck search (including the shear/dilation
            // structure relations) and the obstruction engine
            let v = analyzer.analyze(&p).unwrap();
            assert_eq!(v.verdict, Verdict::GaloisCertified, "at {} on ({}, {}, {})", p, n, m, q);
            assert_eq!(v.degree, expected);
            assert_eq!(v.deck_order() as u32, expected);
        }
        // the shear/dilation presentation at the matrix level
        let ctx = curve.ctx();
        for gamma in 0..q {
            for beta in 0..q {
                for gamma2 in 0..q {
                    for beta2 in 0..q {
                        let lhs = sigma_matrix(ctx, gamma, beta)
                            .mul(&sigma_matrix(ctx, gamma2, beta2));
                        let rhs = sigma_matrix(
                            ctx,
                            ctx.add_raw(gamma, gamma2),
                            ctx.add_raw(beta, beta2),
                        );
                        assert_eq!(lhs.rows(), rhs.rows());
                    }
                }
                for mu in 1..q {
                    let t = tau_matrix(ctx, mu);
                    let conj = t
                        .mul(&sigma_matrix(ctx, gamma, beta))
                        .mul(&t.inverse().unwrap());
                    let expected_m =
                        sigma_matrix(ctx, ctx.mul_raw(mu, gamma), ctx.mul_raw(mu, beta));
                    assert_eq!(conj.rows(), expected_m.rows());
                }
            }
        }
    }
    println!("criterion 5 (every base point Galois with deck order q^2(q-1)): PASS");
}

#[test]
fn criterion_6_galois_refutation_everywhere() {
    let t0 = Instant::now();
    for (q, n, m) in [(2u64, 4u32, 1u32), (2, 4, 3), (2, 5, 2), (2, 5, 3)] {
        let curve = build(q, n, m);
        let analyzer = ProjectionAnalyzer::new(&curve, EngineConfig::default()).unwrap();
        // P^2(GF(q^2)) contains the whole base plane, so this covers every
        // rational point plus more than 20 points of the quadratic extension
        let candidates_plane: Vec<ProjPoint> = enumerate_plane(curve.ctx(), q, 2).unwrap();
        assert!(candidates_plane.len() >= 20);
        let base = enumerate_plane(curve.ctx(), q, 1).unwrap();
        assert!(base.iter().all(|b| candidates_plane.contains(b)));
        let mut candidates = candidates_plane;
        let off = analyzer.sample_off_curve(20);
        assert_eq!(off.len(), 20);
        candidates.extend(off);
        let verdicts = analyzer.scan(&candidates).unwrap();
        for v in &verdicts {
            assert_eq!(
                v.verdict,
                Verdict::NotGaloisCertified,
                "{} on ({}, {}, {}) was not refuted",
                v.center,
                n,
                m,
                q
            );
            let o = v.obstruction.as_ref().expect("refutation must carry a witness");
            assert!(!o.witnesses.is_empty());
        }
        assert!(verdicts.iter().all(|v| v.verdict != Verdict::GaloisCertified));
    }
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs() < 1800, "negative half took {:?}", elapsed);
    println!("criterion 6 (negative half, every candidate refuted with witness): PASS in {:?}", elapsed);
}

#[test]
fn criterion_7_engine_consistency() {
    // No candidate may be certified both ways, and every fully split fiber's
    // exact branch data must sum to the covering degree.
    for (q, n, m) in [(2u64, 3u32, 2u32), (2, 4, 3), (2, 5, 2)] {
        let curve = build(q, n, m);
        let analyzer = ProjectionAnalyzer::new(&curve, EngineConfig::default()).unwrap();
        let candidates = enumerate_plane(curve.ctx(), q, 1).unwrap();
        for p in &candidates {
            // analyze() returns an engine-inconsistency error if both
            // engines certify; unwrap doubles as the assertion
            let v = analyzer.analyze(p).unwrap();
            assert!(
                !(v.verdict == Verdict::GaloisCertified && v.obstruction.is_some()),
                "double certification at {}",
                p
            );
            let degree = analyzer.projection_degree(p).unwrap();
            // fiber-sum conservation across a deterministic line sample
            let mut checked = 0;
            for r in enumerate_plane(curve.ctx(), q, 2).unwrap() {
                if r == *p {
                    continue;
                }
                let line = fncurve::geom::line_through(p, &r).unwrap();
                let Ok(fiber) = analyzer.fiber_data(p, &line) else { continue };
                if !fiber.fully_split {
                    continue;
                }
                let sum: u32 = fiber
                    .branches
                    .iter()
                    .map(|b| match b.e {
                        fncurve::galois::BranchValue::Exact(e) => e,
                        _ => 0,
                    })
                    .sum();
                assert_eq!(sum, degree, "fiber over {} does not sum to the degree", line);
                checked += 1;
                if checked >= 8 {
                    break;
                }
            }
            assert!(checked > 0, "no fully split fibers checked at {}", p);
        }
    }
    println!("criterion 7 (engine consistency and fiber sums): PASS");
}

#[test]
fn criterion_8_geometry_cross_check() {
    for (p, k, q) in [(2u32, 3u32, 2u64), (3, 3, 3)] {
        let ctx = FieldCtx::new(p, k).unwrap();
        let d2 = build_determinant(&ctx, [1, q, q * q]);
        let points = enumerate_plane(&ctx, q, 3).unwrap();
        assert_eq!(points.len() as u64, q.pow(6) + q.pow(3) + 1);
        for r in &points {
            let via_poly = d2.eval_raw(r.coords()) == 0;
            let via_det = det3(
                &ctx,
                [r.coords(), r.frobenius(q).coords(), r.frobenius(q * q).coords()],
            ) == 0;
            assert_eq!(via_poly, via_det, "routes disagree at {}", r);
            // membership in the union of rational lines agrees as well
            assert_eq!(via_det, lies_on_fq_line(r, q));
        }
        // the Moore determinant is a scalar multiple of the product of all
        // q^2 + q + 1 rational line forms
        let prod = rational_line_product(&ctx, q).unwrap();
        let (lead, c1) = d2.leading().unwrap();
        let c2 = prod.coeff(lead);
        assert_ne!(c2, 0);
        let lambda = ctx.mul_raw(c1, ctx.inv_raw(c2).unwrap());
        assert!(d2.sub(&prod.scale(lambda)).is_zero());
    }
    println!("criterion 8 (Moore determinant vs collinearity, exhaustive): PASS");
}
