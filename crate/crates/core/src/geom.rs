//! Projective points, lines, and 3x3 matrices over GF(q^j).
//!
//! Points and lines always live in one ambient field context; membership in
//! a subplane P^2(GF(q^j)) is decided through Frobenius fixed points. Both
//! points and lines are normalized so the first nonzero coordinate is 1,
//! which makes equality plain coordinate equality and enumeration orders
//! reproducible.

use std::fmt;
use std::sync::Arc;

use crate::field::FieldCtx;
use crate::poly::{BinaryForm, TriPoly};
use crate::{Error, Result};

fn normalize(ctx: &FieldCtx, mut v: [u64; 3]) -> Option<[u64; 3]> {
    let pivot = v.iter().position(|&c| c != 0)?;
    let inv = ctx.inv_raw(v[pivot]).unwrap();
    for c in &mut v {
        *c = ctx.mul_raw(*c, inv);
    }
    Some(v)
}

fn format_triple(ctx: &FieldCtx, v: &[u64; 3]) -> String {
    format!(
        "({} : {} : {})",
        ctx.format_raw(v[0]),
        ctx.format_raw(v[1]),
        ctx.format_raw(v[2])
    )
}

fn parse_triple(ctx: &Arc<FieldCtx>, s: &str) -> Option<[u64; 3]> {
    let inner = s.trim().strip_prefix('(')?.strip_suffix(')')?;
    let parts: Vec<&str> = inner.split(':').collect();
    if parts.len() != 3 {
        return None;
    }
    let mut v = [0u64; 3];
    for (i, part) in parts.iter().enumerate() {
        v[i] = ctx.parse_raw(part.trim())?;
    }
    Some(v)
}

macro_rules! proj_triple {
    ($name:ident, $doc:expr) => {
        #[doc = $doc]
        #[derive(Clone)]
        pub struct $name {
            ctx: Arc<FieldCtx>,
            coords: [u64; 3],
        }

        impl $name {
            /// Build from raw coordinates, normalizing so the first nonzero
            /// coordinate is 1. All-zero input is rejected.
            pub fn new(ctx: &Arc<FieldCtx>, coords: [u64; 3]) -> Result<$name> {
                let coords = normalize(ctx, coords)
                    .ok_or_else(|| Error::InvalidParams("all-zero projective triple".into()))?;
                Ok($name { ctx: Arc::clone(ctx), coords })
            }

            pub fn ctx(&self) -> &Arc<FieldCtx> {
                &self.ctx
            }

            pub fn coords(&self) -> [u64; 3] {
                self.coords
            }

            /// Coordinate-wise q-power Frobenius (stays normalized because
            /// the leading 1 is fixed).
            pub fn frobenius(&self, q: u64) -> $name {
                let c = self.coords;
                $name {
                    ctx: Arc::clone(&self.ctx),
                    coords: [
                        self.ctx.pow_raw(c[0], q),
                        self.ctx.pow_raw(c[1], q),
                        self.ctx.pow_raw(c[2], q),
                    ],
                }
            }

            /// Smallest j >= 1 with `self^(q^j) = self`.
            pub fn field_of_definition(&self, q: u64) -> u32 {
                let mut img = self.frobenius(q);
                let mut j = 1;
                while img.coords != self.coords {
                    img = img.frobenius(q);
                    j += 1;
                }
                j
            }

            /// True when all coordinates lie in GF(q^j).
            pub fn in_subplane(&self, q: u64, j: u32) -> bool {
                self.coords.iter().all(|&c| self.ctx.in_subfield_raw(c, q, j))
            }

            pub fn parse(ctx: &Arc<FieldCtx>, s: &str) -> Option<$name> {
                $name::new(ctx, parse_triple(ctx, s)?).ok()
            }
        }

        impl PartialEq for $name {
            fn eq(&self, other: &Self) -> bool {
                self.coords == other.coords
            }
        }
        impl Eq for $name {}

        impl PartialOrd for $name {
            fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
                Some(self.cmp(other))
            }
        }
        impl Ord for $name {
            fn cmp(&self, other: &Self) -> std::cmp::Ordering {
                self.coords.cmp(&other.coords)
            }
        }

        impl std::hash::Hash for $name {
            fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
                self.coords.hash(state);
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", format_triple(&self.ctx, &self.coords))
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                fmt::Display::fmt(self, f)
            }
        }
    };
}

proj_triple!(ProjPoint, "A normalized point of P^2 over the ambient field.");
proj_triple!(
    ProjLine,
    "A line a*x + b*y + c*z = 0 of P^2, stored as the normalized coefficient triple (a : b : c)."
);

impl ProjLine {
    /// Incidence test.
    pub fn contains(&self, p: &ProjPoint) -> bool {
        let ctx = &self.ctx;
        let a = self.coords;
        let b = p.coords();
        let mut acc = 0u64;
        for i in 0..3 {
            acc = ctx.add_raw(acc, ctx.mul_raw(a[i], b[i]));
        }
        acc == 0
    }

    /// Two deterministic distinct points spanning the line.
    pub fn span_points(&self) -> (ProjPoint, ProjPoint) {
        let ctx = &self.ctx;
        let [a, b, c] = self.coords;
        let (u, v) = if a != 0 {
            ([ctx.neg_raw(b), a, 0], [ctx.neg_raw(c), 0, a])
        } else if b != 0 {
            ([1, 0, 0], [0, ctx.neg_raw(c), b])
        } else {
            ([1, 0, 0], [0, 1, 0])
        };
        (ProjPoint::new(ctx, u).unwrap(), ProjPoint::new(ctx, v).unwrap())
    }

    /// All points of the line with coordinates spanned over the given code
    /// list (typically a subfield): s*B + t*D for (s : t) in P^1.
    pub fn points_over(&self, codes: &[u64]) -> Vec<ProjPoint> {
        let (b, d) = self.span_points();
        let ctx = &self.ctx;
        let mut out = Vec::with_capacity(codes.len() + 1);
        for &t in codes {
            let coords = combine(ctx, 1, b.coords(), t, d.coords());
            out.push(ProjPoint::new(ctx, coords).unwrap());
        }
        out.push(d);
        out
    }
}

/// s*B + t*D on raw coordinates.
pub fn combine(ctx: &FieldCtx, s: u64, b: [u64; 3], t: u64, d: [u64; 3]) -> [u64; 3] {
    let mut out = [0u64; 3];
    for i in 0..3 {
        out[i] = ctx.add_raw(ctx.mul_raw(s, b[i]), ctx.mul_raw(t, d[i]));
    }
    out
}

fn cross(ctx: &FieldCtx, a: [u64; 3], b: [u64; 3]) -> [u64; 3] {
    let m = |i: usize, j: usize| ctx.sub_raw(ctx.mul_raw(a[i], b[j]), ctx.mul_raw(a[j], b[i]));
    [m(1, 2), m(2, 0), m(0, 1)]
}

/// 3x3 determinant on raw rows.
pub fn det3(ctx: &FieldCtx, r: [[u64; 3]; 3]) -> u64 {
    let c = cross(ctx, r[1], r[2]);
    let mut acc = 0u64;
    for i in 0..3 {
        acc = ctx.add_raw(acc, ctx.mul_raw(r[0][i], c[i]));
    }
    acc
}

/// The unique line through two distinct points.
pub fn line_through(p: &ProjPoint, q: &ProjPoint) -> Result<ProjLine> {
    if p == q {
        return Err(Error::PointsEqual(p.to_string()));
    }
    let ctx = p.ctx();
    ProjLine::new(ctx, cross(ctx, p.coords(), q.coords()))
}

/// Intersection point of two distinct lines.
pub fn lines_meet(l1: &ProjLine, l2: &ProjLine) -> Result<ProjPoint> {
    if l1 == l2 {
        return Err(Error::PointsEqual(l1.to_string()));
    }
    let ctx = l1.ctx();
    ProjPoint::new(ctx, cross(ctx, l1.coords(), l2.coords()))
}

/// Restriction of a homogeneous polynomial to the line spanned by two
/// distinct points: G(s, t) = f(s*base + t*dir).
pub fn restrict_to_line(f: &TriPoly, base: &ProjPoint, dir: &ProjPoint) -> Result<BinaryForm> {
    if base == dir {
        return Err(Error::PointsEqual(base.to_string()));
    }
    Ok(f.restrict(base.coords(), dir.coords()))
}

/// The parameter (s : t) of a point R on the line spanned by (B, D),
/// normalized as a P^1 point: R ~ s*B + t*D.
pub fn line_parameter(b: &ProjPoint, d: &ProjPoint, r: &ProjPoint) -> (u64, u64) {
    let ctx = b.ctx();
    // R x B = t (D x B), R x D = s (B x D)
    let rb = cross(ctx, r.coords(), b.coords());
    let db = cross(ctx, d.coords(), b.coords());
    let rd = cross(ctx, r.coords(), d.coords());
    let bd = cross(ctx, b.coords(), d.coords());
    let idx_t = (0..3).find(|&i| db[i] != 0).expect("degenerate span");
    let idx_s = (0..3).find(|&i| bd[i] != 0).expect("degenerate span");
    let t = ctx.mul_raw(rb[idx_t], ctx.inv_raw(db[idx_t]).unwrap());
    let s = ctx.mul_raw(rd[idx_s], ctx.inv_raw(bd[idx_s]).unwrap());
    debug_assert!((s, t) != (0, 0));
    // normalize the P^1 representative
    if s != 0 {
        let inv = ctx.inv_raw(s).unwrap();
        (1, ctx.mul_raw(t, inv))
    } else {
        (0, 1)
    }
}

/// Largest plane that [`enumerate_plane`] will materialize.
pub const MAX_PLANE_POINTS: u64 = 1 << 22;

/// All q^{2j} + q^j + 1 points of P^2(GF(q^j)) inside the ambient field, in
/// deterministic lexicographic order of normalized coordinates.
pub fn enumerate_plane(ctx: &Arc<FieldCtx>, q: u64, j: u32) -> Result<Vec<ProjPoint>> {
    let count = q
        .checked_pow(2 * j)
        .and_then(|s| s.checked_add(q.pow(j) + 1))
        .ok_or(Error::BadExtension(j))?;
    if count > MAX_PLANE_POINTS {
        return Err(Error::EnumerationTooLarge { q, j, count });
    }
    let codes = subfield_codes_checked(ctx, q, j)?;
    let mut out = Vec::with_capacity(codes.len() * codes.len() + codes.len() + 1);
    for &b in &codes {
        for &c in &codes {
            out.push(ProjPoint::new(ctx, [1, b, c]).unwrap());
        }
    }
    for &c in &codes {
        out.push(ProjPoint::new(ctx, [0, 1, c]).unwrap());
    }
    out.push(ProjPoint::new(ctx, [0, 0, 1]).unwrap());
    Ok(out)
}

/// All q^2 + q + 1 lines with GF(q)-rational coefficients.
pub fn fq_lines(ctx: &Arc<FieldCtx>, q: u64) -> Result<Vec<ProjLine>> {
    let codes = subfield_codes_checked(ctx, q, 1)?;
    let mut out = Vec::new();
    for &b in &codes {
        for &c in &codes {
            out.push(ProjLine::new(ctx, [1, b, c]).unwrap());
        }
    }
    for &c in &codes {
        out.push(ProjLine::new(ctx, [0, 1, c]).unwrap());
    }
    out.push(ProjLine::new(ctx, [0, 0, 1]).unwrap());
    Ok(out)
}

/// Codes of GF(q^j) inside the ambient context, with a size sanity check.
pub fn subfield_codes_checked(ctx: &Arc<FieldCtx>, q: u64, j: u32) -> Result<Vec<u64>> {
    let expect = q.checked_pow(j).ok_or(Error::BadExtension(j))?;
    if expect > ctx.size() {
        return Err(Error::BadExtension(j));
    }
    let codes = ctx.subfield_codes(q, j);
    if codes.len() as u64 != expect {
        return Err(Error::BadExtension(j));
    }
    Ok(codes)
}

/// Membership in S, the union of all GF(q)-rational lines: R lies on an
/// F_q-line exactly when R, R^q, R^{q^2} are collinear. The incidence route
/// over the q^2 + q + 1 rational lines is computed as a cross-check.
pub fn lies_on_fq_line(r: &ProjPoint, q: u64) -> bool {
    let ctx = r.ctx();
    let det = det3(
        ctx,
        [r.coords(), r.frobenius(q).coords(), r.frobenius(q * q).coords()],
    );
    let by_det = det == 0;
    if let Ok(lines) = fq_lines(ctx, q) {
        let by_incidence = lines.iter().any(|l| l.contains(r));
        assert_eq!(by_det, by_incidence, "S-membership routes disagree at {}", r);
    }
    by_det
}

// ---------------------------------------------------------------------------
// 3x3 matrices
// ---------------------------------------------------------------------------

/// A 3x3 matrix over the ambient field, acting on points as column vectors.
#[derive(Clone, PartialEq, Eq)]
pub struct Mat3 {
    ctx: Arc<FieldCtx>,
    rows: [[u64; 3]; 3],
}

impl Mat3 {
    pub fn new(ctx: &Arc<FieldCtx>, rows: [[u64; 3]; 3]) -> Mat3 {
        Mat3 { ctx: Arc::clone(ctx), rows }
    }

    pub fn identity(ctx: &Arc<FieldCtx>) -> Mat3 {
        Mat3::new(ctx, [[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn rows(&self) -> [[u64; 3]; 3] {
        self.rows
    }

    pub fn det(&self) -> u64 {
        det3(&self.ctx, self.rows)
    }

    pub fn mul(&self, other: &Mat3) -> Mat3 {
        let ctx = &self.ctx;
        let mut out = [[0u64; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = 0u64;
                for k in 0..3 {
                    acc = ctx.add_raw(acc, ctx.mul_raw(self.rows[i][k], other.rows[k][j]));
                }
                out[i][j] = acc;
            }
        }
        Mat3::new(ctx, out)
    }

    pub fn inverse(&self) -> Result<Mat3> {
        let ctx = &self.ctx;
        let det = self.det();
        if det == 0 {
            return Err(Error::SingularMatrix);
        }
        let det_inv = ctx.inv_raw(det).unwrap();
        let r = &self.rows;
        let minor = |i0: usize, i1: usize, j0: usize, j1: usize| {
            ctx.sub_raw(ctx.mul_raw(r[i0][j0], r[i1][j1]), ctx.mul_raw(r[i0][j1], r[i1][j0]))
        };
        let adj = [
            [minor(1, 2, 1, 2), ctx.neg_raw(minor(0, 2, 1, 2)), minor(0, 1, 1, 2)],
            [ctx.neg_raw(minor(1, 2, 0, 2)), minor(0, 2, 0, 2), ctx.neg_raw(minor(0, 1, 0, 2))],
            [minor(1, 2, 0, 1), ctx.neg_raw(minor(0, 2, 0, 1)), minor(0, 1, 0, 1)],
        ];
        let mut out = [[0u64; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = ctx.mul_raw(adj[i][j], det_inv);
            }
        }
        Ok(Mat3::new(ctx, out))
    }

    pub fn apply(&self, p: &ProjPoint) -> ProjPoint {
        let ctx = &self.ctx;
        let v = p.coords();
        let mut out = [0u64; 3];
        for i in 0..3 {
            let mut acc = 0u64;
            for k in 0..3 {
                acc = ctx.add_raw(acc, ctx.mul_raw(self.rows[i][k], v[k]));
            }
            out[i] = acc;
        }
        ProjPoint::new(ctx, out).expect("invertible matrix sent a point to zero")
    }

    /// Scale so that the first nonzero entry (row-major) is 1; canonical
    /// representative modulo scalars.
    pub fn normalized(&self) -> Mat3 {
        let ctx = &self.ctx;
        let flat = self.rows.iter().flatten().copied().collect::<Vec<u64>>();
        let pivot = flat.iter().position(|&c| c != 0).expect("zero matrix");
        let inv = ctx.inv_raw(flat[pivot]).unwrap();
        let mut rows = self.rows;
        for row in &mut rows {
            for c in row {
                *c = ctx.mul_raw(*c, inv);
            }
        }
        Mat3::new(ctx, rows)
    }
}

impl fmt::Debug for Mat3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fr = |r: &[u64; 3]| {
            format!(
                "[{}, {}, {}]",
                self.ctx.format_raw(r[0]),
                self.ctx.format_raw(r[1]),
                self.ctx.format_raw(r[2])
            )
        };
        write!(f, "[{}, {}, {}]", fr(&self.rows[0]), fr(&self.rows[1]), fr(&self.rows[2]))
    }
}

impl fmt::Display for Mat3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}
