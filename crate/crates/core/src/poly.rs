//! Sparse homogeneous trivariate polynomials and binary forms over a finite
//! field.
//!
//! The trivariate representation is a map from exponent triples to nonzero
//! coefficients; the monomial order is graded lexicographic with x > y > z,
//! fixed globally so that division remainders and printed output are
//! deterministic. Exponents are 32-bit, large enough for the Frobenius
//! powers that appear in the curve determinants at desk scale.
//!
//! Binary forms G(s, t) hold restrictions of curve equations to lines; roots
//! are found by exhaustive scan over P^1 of a search field and vanishing
//! orders by repeated synthetic division, both exact.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::field::FieldCtx;
use crate::{Error, Result};

/// An exponent triple (x, y, z); term maps order these graded
/// lexicographically with x > y > z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Mono {
    pub x: u32,
    pub y: u32,
    pub z: u32,
}

impl Mono {
    pub const fn new(x: u32, y: u32, z: u32) -> Mono {
        Mono { x, y, z }
    }

    pub fn total_degree(&self) -> u32 {
        self.x + self.y + self.z
    }

    /// Graded lexicographic order with x > y > z.
    fn cmp_graded_lex(&self, other: &Mono) -> std::cmp::Ordering {
        (self.total_degree(), self.x, self.y).cmp(&(other.total_degree(), other.x, other.y))
    }

    fn divides(&self, other: &Mono) -> bool {
        self.x <= other.x && self.y <= other.y && self.z <= other.z
    }
}

/// Ordering key wrapper so the term map iterates in graded-lex order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct OrdMono(Mono);

impl PartialOrd for OrdMono {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OrdMono {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.cmp_graded_lex(&other.0)
    }
}

/// A sparse trivariate polynomial. Zero coefficients are never stored.
#[derive(Clone)]
pub struct TriPoly {
    ctx: Arc<FieldCtx>,
    terms: BTreeMap<OrdMono, u64>,
}

impl TriPoly {
    pub fn zero(ctx: &Arc<FieldCtx>) -> TriPoly {
        TriPoly { ctx: Arc::clone(ctx), terms: BTreeMap::new() }
    }

    /// The single monomial `c * x^i y^j z^k`.
    pub fn monomial(ctx: &Arc<FieldCtx>, mono: Mono, coeff: u64) -> TriPoly {
        let mut terms = BTreeMap::new();
        if coeff != 0 {
            terms.insert(OrdMono(mono), coeff);
        }
        TriPoly { ctx: Arc::clone(ctx), terms }
    }

    pub fn variable(ctx: &Arc<FieldCtx>, var: Var) -> TriPoly {
        let mono = match var {
            Var::X => Mono::new(1, 0, 0),
            Var::Y => Mono::new(0, 1, 0),
            Var::Z => Mono::new(0, 0, 1),
        };
        Self::monomial(ctx, mono, 1)
    }

    pub fn from_terms(ctx: &Arc<FieldCtx>, list: impl IntoIterator<Item = (Mono, u64)>) -> TriPoly {
        let mut out = Self::zero(ctx);
        for (m, c) in list {
            out.add_term(m, c);
        }
        out
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (Mono, u64)> + '_ {
        self.terms.iter().map(|(m, &c)| (m.0, c))
    }

    pub fn coeff(&self, mono: Mono) -> u64 {
        self.terms.get(&OrdMono(mono)).copied().unwrap_or(0)
    }

    /// Total degree (max over terms); None for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.0.total_degree()).max()
    }

    /// Some(d) if every term has total degree d.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let d = self.degree()?;
        if self.terms.keys().all(|m| m.0.total_degree() == d) {
            Some(d)
        } else {
            None
        }
    }

    /// Leading term in graded-lex order.
    pub fn leading(&self) -> Option<(Mono, u64)> {
        self.terms.last_key_value().map(|(m, &c)| (m.0, c))
    }

    fn add_term(&mut self, mono: Mono, coeff: u64) {
        if coeff == 0 {
            return;
        }
        let entry = self.terms.entry(OrdMono(mono)).or_insert(0);
        *entry = self.ctx.add_raw(*entry, coeff);
        if *entry == 0 {
            self.terms.remove(&OrdMono(mono));
        }
    }

    fn assert_same_ctx(&self, other: &TriPoly) {
        assert!(
            Arc::ptr_eq(&self.ctx, &other.ctx) || *self.ctx == *other.ctx,
            "polynomial context mismatch"
        );
    }

    pub fn add(&self, other: &TriPoly) -> TriPoly {
        self.assert_same_ctx(other);
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(m, c);
        }
        out
    }

    pub fn neg(&self) -> TriPoly {
        let ctx = &self.ctx;
        TriPoly {
            ctx: Arc::clone(ctx),
            terms: self.terms.iter().map(|(m, &c)| (*m, ctx.neg_raw(c))).collect(),
        }
    }

    pub fn sub(&self, other: &TriPoly) -> TriPoly {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: u64) -> TriPoly {
        if c == 0 {
            return Self::zero(&self.ctx);
        }
        let ctx = &self.ctx;
        TriPoly {
            ctx: Arc::clone(ctx),
            terms: self.terms.iter().map(|(m, &a)| (*m, ctx.mul_raw(a, c))).collect(),
        }
    }

    pub fn mul(&self, other: &TriPoly) -> TriPoly {
        self.assert_same_ctx(other);
        let mut out = Self::zero(&self.ctx);
        for (ma, ca) in self.terms() {
            for (mb, cb) in other.terms() {
                let m = Mono::new(ma.x + mb.x, ma.y + mb.y, ma.z + mb.z);
                out.add_term(m, self.ctx.mul_raw(ca, cb));
            }
        }
        out
    }

    /// Multiply by a single term in place-ish (returns new).
    fn mul_term(&self, mono: Mono, coeff: u64) -> TriPoly {
        let ctx = &self.ctx;
        TriPoly {
            ctx: Arc::clone(ctx),
            terms: self
                .terms
                .iter()
                .map(|(m, &c)| {
                    (
                        OrdMono(Mono::new(m.0.x + mono.x, m.0.y + mono.y, m.0.z + mono.z)),
                        ctx.mul_raw(c, coeff),
                    )
                })
                .collect(),
        }
    }

    /// Long division by `g` under the graded-lex order: returns (quotient,
    /// remainder) with `self = q*g + r` and no term of `r` divisible by the
    /// leading term of `g`.
    pub fn divmod(&self, g: &TriPoly) -> (TriPoly, TriPoly) {
        self.assert_same_ctx(g);
        let (lt_m, lt_c) = g.leading().expect("division by the zero polynomial");
        let lt_c_inv = self.ctx.inv_raw(lt_c).unwrap();
        let mut quotient = Self::zero(&self.ctx);
        let mut remainder = Self::zero(&self.ctx);
        let mut work = self.clone();
        while let Some((m, c)) = work.leading() {
            if lt_m.divides(&m) {
                let qm = Mono::new(m.x - lt_m.x, m.y - lt_m.y, m.z - lt_m.z);
                let qc = self.ctx.mul_raw(c, lt_c_inv);
                quotient.add_term(qm, qc);
                work = work.sub(&g.mul_term(qm, qc));
            } else {
                remainder.add_term(m, c);
                work.terms.pop_last();
            }
        }
        (quotient, remainder)
    }

    /// Exact division: `self / g` with zero remainder, otherwise an error.
    /// A nonzero remainder is a meaningful outcome, not a crash.
    pub fn exact_divide(&self, g: &TriPoly) -> Result<TriPoly> {
        if g.is_zero() {
            return Err(Error::NotDivisible(self.to_string(), "0".into()));
        }
        let (q, r) = self.divmod(g);
        if r.is_zero() {
            Ok(q)
        } else {
            Err(Error::NotDivisible(self.to_string(), g.to_string()))
        }
    }

    /// Remainder of long division by `g`.
    pub fn reduce_mod(&self, g: &TriPoly) -> TriPoly {
        self.divmod(g).1
    }

    /// Formal partial derivative in characteristic p.
    pub fn partial(&self, var: Var) -> TriPoly {
        let mut out = Self::zero(&self.ctx);
        for (m, c) in self.terms() {
            let (e, dm) = match var {
                Var::X => (m.x, Mono::new(m.x.wrapping_sub(1), m.y, m.z)),
                Var::Y => (m.y, Mono::new(m.x, m.y.wrapping_sub(1), m.z)),
                Var::Z => (m.z, Mono::new(m.x, m.y, m.z.wrapping_sub(1))),
            };
            if e == 0 {
                continue;
            }
            let factor = (e as u64) % self.ctx.characteristic() as u64;
            out.add_term(dm, self.ctx.mul_raw(c, factor));
        }
        out
    }

    /// Evaluate at raw coordinates.
    pub fn eval_raw(&self, pt: [u64; 3]) -> u64 {
        let ctx = &self.ctx;
        let mut acc = 0u64;
        for (m, c) in self.terms() {
            let v = ctx.mul_raw(
                ctx.mul_raw(ctx.pow_raw(pt[0], m.x as u64), ctx.pow_raw(pt[1], m.y as u64)),
                ctx.pow_raw(pt[2], m.z as u64),
            );
            acc = ctx.add_raw(acc, ctx.mul_raw(c, v));
        }
        acc
    }

    /// True when every coefficient is fixed by the q-Frobenius, i.e. lies in
    /// the subfield GF(q).
    pub fn coeffs_in_subfield(&self, q: u64) -> bool {
        self.terms.values().all(|&c| self.ctx.pow_raw(c, q) == c)
    }

    /// Substitute each variable by a linear form: the result is
    /// `self(r0 . v, r1 . v, r2 . v)` where `rows[i]` are the coefficients of
    /// the form replacing the i-th variable.
    pub fn substitute_linear(&self, rows: &[[u64; 3]; 3]) -> TriPoly {
        let ctx = &self.ctx;
        let forms: Vec<TriPoly> = rows
            .iter()
            .map(|r| {
                Self::from_terms(
                    ctx,
                    [
                        (Mono::new(1, 0, 0), r[0]),
                        (Mono::new(0, 1, 0), r[1]),
                        (Mono::new(0, 0, 1), r[2]),
                    ],
                )
            })
            .collect();
        // Power ladders per variable, up to the largest exponent used.
        let max_exp = |f: fn(&Mono) -> u32| self.terms.keys().map(|m| f(&m.0)).max().unwrap_or(0);
        let maxes = [max_exp(|m| m.x), max_exp(|m| m.y), max_exp(|m| m.z)];
        let mut ladders: Vec<Vec<TriPoly>> = Vec::with_capacity(3);
        for (form, &mx) in forms.iter().zip(maxes.iter()) {
            let mut ladder = Vec::with_capacity(mx as usize + 1);
            ladder.push(Self::monomial(ctx, Mono::new(0, 0, 0), 1));
            for e in 1..=mx {
                let next = ladder[e as usize - 1].mul(form);
                ladder.push(next);
            }
            ladders.push(ladder);
        }
        let mut out = Self::zero(ctx);
        for (m, c) in self.terms() {
            let prod = ladders[0][m.x as usize]
                .mul(&ladders[1][m.y as usize])
                .mul(&ladders[2][m.z as usize]);
            for (pm, pc) in prod.terms() {
                out.add_term(pm, ctx.mul_raw(pc, c));
            }
        }
        out
    }

    /// Restrict to the line spanned by `base` and `dir`: the binary form
    /// `G(s, t) = self(s*base + t*dir)`. The input must be homogeneous.
    pub fn restrict(&self, base: [u64; 3], dir: [u64; 3]) -> BinaryForm {
        let d = self.homogeneous_degree().expect("restricting a non-homogeneous polynomial");
        let ctx = &self.ctx;
        let pascal = Pascal::new(ctx, d);
        // powers of each coordinate of base and dir
        let mut pow_b = [const { Vec::new() }; 3];
        let mut pow_d = [const { Vec::new() }; 3];
        for i in 0..3 {
            pow_b[i] = power_table(ctx, base[i], d);
            pow_d[i] = power_table(ctx, dir[i], d);
        }
        let mut coeffs = vec![0u64; d as usize + 1];
        for (m, c) in self.terms() {
            let exps = [m.x, m.y, m.z];
            // expand prod_v (s*B_v + t*D_v)^{e_v}
            let mut partial: Vec<(u32, u64)> = vec![(0, c)]; // (s-exponent, coeff)
            for v in 0..3 {
                let e = exps[v];
                if e == 0 {
                    continue;
                }
                let mut next: BTreeMap<u32, u64> = BTreeMap::new();
                for &(s_exp, pc) in &partial {
                    for u in 0..=e {
                        let term = ctx.mul_raw(
                            pascal.get(e, u),
                            ctx.mul_raw(pow_b[v][u as usize], pow_d[v][(e - u) as usize]),
                        );
                        if term == 0 {
                            continue;
                        }
                        let entry = next.entry(s_exp + u).or_insert(0);
                        *entry = ctx.add_raw(*entry, ctx.mul_raw(pc, term));
                    }
                }
                partial = next.into_iter().filter(|&(_, c)| c != 0).collect();
            }
            for (s_exp, pc) in partial {
                coeffs[s_exp as usize] = ctx.add_raw(coeffs[s_exp as usize], pc);
            }
        }
        BinaryForm { ctx: Arc::clone(ctx), coeffs }
    }

    /// Coefficients of the univariate polynomial in y obtained by fixing
    /// x = x0, z = z0.
    pub fn univariate_in_y(&self, x0: u64, z0: u64) -> Vec<u64> {
        let ctx = &self.ctx;
        let maxy = self.terms.keys().map(|m| m.0.y).max().unwrap_or(0);
        let maxd = self.degree().unwrap_or(0);
        let px = power_table(ctx, x0, maxd);
        let pz = power_table(ctx, z0, maxd);
        let mut out = vec![0u64; maxy as usize + 1];
        for (m, c) in self.terms() {
            let v = ctx.mul_raw(c, ctx.mul_raw(px[m.x as usize], pz[m.z as usize]));
            out[m.y as usize] = ctx.add_raw(out[m.y as usize], v);
        }
        unipoly::trim(&mut out);
        out
    }
}

impl fmt::Display for TriPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut parts = Vec::with_capacity(self.terms.len());
        for (m, c) in self.terms.iter().rev() {
            parts.push(format_term(&self.ctx, c, &[("x", m.0.x), ("y", m.0.y), ("z", m.0.z)]));
        }
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for TriPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn format_term(ctx: &FieldCtx, &coeff: &u64, vars: &[(&str, u32)]) -> String {
    let mut var_parts: Vec<String> = Vec::new();
    for &(name, e) in vars {
        match e {
            0 => {}
            1 => var_parts.push(name.to_string()),
            _ => var_parts.push(format!("{}^{}", name, e)),
        }
    }
    let coeff_str = ctx.format_raw(coeff);
    let coeff_str = if coeff_str.contains('+') { format!("({})", coeff_str) } else { coeff_str };
    if var_parts.is_empty() {
        coeff_str
    } else if coeff == 1 {
        var_parts.join("*")
    } else {
        format!("{}*{}", coeff_str, var_parts.join("*"))
    }
}

/// Variable selector for [`TriPoly::partial`] and constructors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
    Z,
}

/// Pascal's triangle reduced mod p, as field codes of prime-subfield
/// constants.
struct Pascal {
    rows: Vec<Vec<u64>>,
}

impl Pascal {
    fn new(ctx: &FieldCtx, max_n: u32) -> Pascal {
        let p = ctx.characteristic() as u64;
        let mut rows: Vec<Vec<u64>> = Vec::with_capacity(max_n as usize + 1);
        rows.push(vec![1]);
        for n in 1..=max_n as usize {
            let prev = &rows[n - 1];
            let mut row = vec![1u64; n + 1];
            for k in 1..n {
                row[k] = (prev[k - 1] + prev[k]) % p;
            }
            rows.push(row);
        }
        Pascal { rows }
    }

    fn get(&self, n: u32, k: u32) -> u64 {
        self.rows[n as usize][k as usize]
    }
}

fn power_table(ctx: &FieldCtx, a: u64, max: u32) -> Vec<u64> {
    let mut out = Vec::with_capacity(max as usize + 1);
    out.push(1u64);
    for _ in 0..max {
        out.push(ctx.mul_raw(*out.last().unwrap(), a));
    }
    out
}

// ---------------------------------------------------------------------------
// Binary forms
// ---------------------------------------------------------------------------

/// A homogeneous binary form G(s, t) of fixed degree, stored as the
/// coefficient vector of s^i t^(d-i) for i = 0..=d. All coefficients zero
/// encodes the zero form.
#[derive(Clone)]
pub struct BinaryForm {
    ctx: Arc<FieldCtx>,
    coeffs: Vec<u64>,
}

impl BinaryForm {
    pub fn new(ctx: &Arc<FieldCtx>, coeffs: Vec<u64>) -> BinaryForm {
        assert!(!coeffs.is_empty());
        BinaryForm { ctx: Arc::clone(ctx), coeffs }
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn degree(&self) -> u32 {
        self.coeffs.len() as u32 - 1
    }

    /// Coefficient of s^i t^(d-i).
    pub fn coeff(&self, i: u32) -> u64 {
        self.coeffs[i as usize]
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn eval(&self, s: u64, t: u64) -> u64 {
        let ctx = &self.ctx;
        let d = self.degree();
        // Horner in s with t-powers folded in.
        let mut acc = 0u64;
        for i in (0..=d).rev() {
            acc = ctx.mul_raw(acc, s);
            acc = ctx.add_raw(acc, ctx.mul_raw(self.coeffs[i as usize], ctx.pow_raw(t, (d - i) as u64)));
        }
        acc
    }

    /// Largest r such that (t0*s - s0*t)^r divides the form; an error for
    /// the zero form.
    pub fn vanish_order(&self, s0: u64, t0: u64) -> Result<u32> {
        assert!(s0 != 0 || t0 != 0, "(0, 0) is not a point of P^1");
        if self.is_zero() {
            return Err(Error::InfiniteOrder);
        }
        let d = self.degree();
        let hi = (0..=d).rev().find(|&i| self.coeffs[i as usize] != 0).unwrap();
        if t0 == 0 {
            // order of t, i.e. of the point (1 : 0)
            return Ok(d - hi);
        }
        // Affine root u0 = s0 / t0 of g(u) = G(u, 1); repeated synthetic division.
        let ctx = &self.ctx;
        let u0 = ctx.mul_raw(s0, ctx.inv_raw(t0)?);
        let mut g: Vec<u64> = self.coeffs[..=hi as usize].to_vec();
        unipoly::trim(&mut g);
        let mut order = 0u32;
        loop {
            if g.is_empty() || unipoly::eval(ctx, &g, u0) != 0 {
                return Ok(order);
            }
            g = unipoly::deflate(ctx, &g, u0);
            order += 1;
        }
    }

    /// Formal s-derivative (degree drops by one).
    pub fn derivative_s(&self) -> BinaryForm {
        let ctx = &self.ctx;
        let d = self.degree();
        if d == 0 {
            return BinaryForm::new(ctx, vec![0]);
        }
        let p = ctx.characteristic() as u64;
        let mut out = vec![0u64; d as usize];
        for i in 1..=d as usize {
            out[i - 1] = ctx.mul_raw(self.coeffs[i], (i as u64) % p);
        }
        BinaryForm::new(ctx, out)
    }

    /// Formal t-derivative.
    pub fn derivative_t(&self) -> BinaryForm {
        let ctx = &self.ctx;
        let d = self.degree();
        if d == 0 {
            return BinaryForm::new(ctx, vec![0]);
        }
        let p = ctx.characteristic() as u64;
        let mut out = vec![0u64; d as usize];
        for i in 0..d as usize {
            out[i] = ctx.mul_raw(self.coeffs[i], ((d as usize - i) as u64) % p);
        }
        BinaryForm::new(ctx, out)
    }

    /// Decompose as s^a * t^b * h(s, t) with h(0 : 1), h(1 : 0) nonzero;
    /// returns (a, b, dehomogenized h as univariate in u = s/t).
    fn split_st(&self) -> (u32, u32, Vec<u64>) {
        assert!(!self.is_zero());
        let d = self.degree();
        let lo = (0..=d).find(|&i| self.coeffs[i as usize] != 0).unwrap();
        let hi = (0..=d).rev().find(|&i| self.coeffs[i as usize] != 0).unwrap();
        let h: Vec<u64> = self.coeffs[lo as usize..=hi as usize].to_vec();
        (lo, d - hi, h)
    }

    /// Greatest common divisor of two binary forms (monic-normalized).
    pub fn gcd(&self, other: &BinaryForm) -> BinaryForm {
        let ctx = &self.ctx;
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let (a1, b1, h1) = self.split_st();
        let (a2, b2, h2) = other.split_st();
        let g = unipoly::gcd(ctx, &h1, &h2);
        let a = a1.min(a2);
        let b = b1.min(b2);
        // re-homogenize: s^a t^b * G(s/t) t^(deg g)
        let dg = g.len() as u32 - 1;
        let mut coeffs = vec![0u64; (a + b + dg) as usize + 1];
        for (i, &c) in g.iter().enumerate() {
            coeffs[a as usize + i] = c;
        }
        BinaryForm::new(ctx, coeffs)
    }

    /// True when the form has no repeated factor over the algebraic closure:
    /// gcd(G, dG/ds, dG/dt) is a (nonzero) constant.
    pub fn is_squarefree(&self) -> bool {
        if self.is_zero() {
            return false;
        }
        if self.degree() == 0 {
            return true;
        }
        let g = self.gcd(&self.derivative_s()).gcd(&self.derivative_t());
        g.coeffs.len() == 1 && g.coeffs[0] != 0
    }

    /// All projective roots with multiplicities over the points of P^1 whose
    /// affine coordinate ranges over `codes` (plus the point at infinity),
    /// together with the squarefree flag. The boolean in the result records
    /// whether the located roots account for the full degree.
    pub fn squarefree_and_roots(&self, codes: &[u64]) -> RootReport {
        assert!(!self.is_zero(), "root search on the zero form");
        let mut roots = Vec::new();
        let mut found = 0u32;
        for &c in codes {
            let ord = self.vanish_order(c, 1).unwrap();
            if ord > 0 {
                roots.push(((c, 1u64), ord));
                found += ord;
            }
        }
        let ord_inf = self.vanish_order(1, 0).unwrap();
        if ord_inf > 0 {
            roots.push(((1, 0), ord_inf));
            found += ord_inf;
        }
        RootReport {
            roots,
            squarefree: self.is_squarefree(),
            fully_split: found == self.degree(),
            unsplit_degree: self.degree() - found,
        }
    }
}

/// Result of a root scan over P^1 of a search field.
#[derive(Debug, Clone)]
pub struct RootReport {
    /// Normalized (s, t) pairs with multiplicities.
    pub roots: Vec<((u64, u64), u32)>,
    pub squarefree: bool,
    pub fully_split: bool,
    pub unsplit_degree: u32,
}

impl fmt::Display for BinaryForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let d = self.degree();
        let mut parts = Vec::new();
        for i in (0..=d).rev() {
            let c = self.coeffs[i as usize];
            if c == 0 {
                continue;
            }
            parts.push(format_term(&self.ctx, &c, &[("s", i), ("t", d - i)]));
        }
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for BinaryForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

// ---------------------------------------------------------------------------
// Dense univariate utilities over a FieldCtx (codes, low degree first).
// ---------------------------------------------------------------------------

pub(crate) mod unipoly {
    use crate::field::FieldCtx;

    pub fn trim(v: &mut Vec<u64>) {
        while v.last() == Some(&0) {
            v.pop();
        }
    }

    pub fn eval(ctx: &FieldCtx, f: &[u64], x: u64) -> u64 {
        let mut acc = 0u64;
        for &c in f.iter().rev() {
            acc = ctx.add_raw(ctx.mul_raw(acc, x), c);
        }
        acc
    }

    /// Divide by (u - u0) assuming u0 is a root; returns the quotient.
    pub fn deflate(ctx: &FieldCtx, f: &[u64], u0: u64) -> Vec<u64> {
        let mut out = vec![0u64; f.len() - 1];
        let mut carry = 0u64;
        for i in (0..f.len() - 1).rev() {
            carry = ctx.add_raw(f[i + 1], ctx.mul_raw(carry, u0));
            out[i] = carry;
        }
        debug_assert_eq!(ctx.add_raw(f[0], ctx.mul_raw(carry, u0)), 0, "deflate at a non-root");
        out
    }

    pub fn rem(ctx: &FieldCtx, a: &[u64], b: &[u64]) -> Vec<u64> {
        let mut r = a.to_vec();
        trim(&mut r);
        let db = b.len() - 1;
        let lead_inv = ctx.inv_raw(b[db]).unwrap();
        while r.len() > db {
            let c = ctx.mul_raw(*r.last().unwrap(), lead_inv);
            let shift = r.len() - 1 - db;
            if c != 0 {
                for i in 0..=db {
                    r[shift + i] = ctx.sub_raw(r[shift + i], ctx.mul_raw(c, b[i]));
                }
            }
            r.pop();
            trim(&mut r);
            if r.len() <= db {
                break;
            }
        }
        r
    }

    /// Monic gcd.
    pub fn gcd(ctx: &FieldCtx, a: &[u64], b: &[u64]) -> Vec<u64> {
        let mut a = a.to_vec();
        let mut b = b.to_vec();
        trim(&mut a);
        trim(&mut b);
        while !b.is_empty() {
            let r = rem(ctx, &a, &b);
            a = b;
            b = r;
        }
        if let Some(&lead) = a.last() {
            let inv = ctx.inv_raw(lead).unwrap();
            for c in &mut a {
                *c = ctx.mul_raw(*c, inv);
            }
        }
        a
    }

    /// Roots among the supplied codes (each at most once; multiplicity is
    /// not reported here).
    pub fn roots_by_scan(ctx: &FieldCtx, f: &[u64], codes: &[u64]) -> Vec<u64> {
        codes.iter().copied().filter(|&c| eval(ctx, f, c) == 0).collect()
    }

    pub fn mulmod(ctx: &FieldCtx, a: &[u64], b: &[u64], m: &[u64]) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut prod = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = ctx.add_raw(prod[i + j], ctx.mul_raw(x, y));
            }
        }
        rem(ctx, &prod, m)
    }

    /// Smallest d >= 1 such that f has a root in the degree-d extension of
    /// the coefficient field, found by Frobenius powering: the least d with
    /// gcd(x^{S^d} - x, f) nontrivial, S the field size.
    pub fn smallest_splitting_extension(ctx: &FieldCtx, f: &[u64]) -> u32 {
        let deg = f.len() - 1;
        let mut frob = vec![0u64, 1]; // x
        for d in 1..=deg as u32 {
            // one more S-power: frob <- frob^S mod f
            let mut e = ctx.size();
            let mut acc = vec![1u64];
            let mut base = frob.clone();
            while e > 0 {
                if e & 1 == 1 {
                    acc = mulmod(ctx, &acc, &base, f);
                }
                base = mulmod(ctx, &base, &base, f);
                e >>= 1;
            }
            frob = acc;
            let mut diff = frob.clone();
            if diff.len() < 2 {
                diff.resize(2, 0);
            }
            diff[1] = ctx.sub_raw(diff[1], 1);
            trim(&mut diff);
            let g = gcd(ctx, f, &diff);
            if g.len() > 1 {
                return d;
            }
        }
        deg as u32
    }
}
