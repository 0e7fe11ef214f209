//! Exact arithmetic in GF(p) and its extensions GF(p^k).
//!
//! Elements are stored in polynomial-basis coordinates with respect to a
//! deterministically chosen modulus: the lexicographically smallest monic
//! irreducible polynomial of degree `k` over GF(p), so that every run of the
//! tool produces bit-identical field representations. An element is packed
//! into a single integer code `sum(c_i * p^i)`, which doubles as the
//! deterministic enumeration order.
//!
//! For fields with at most 2^16 elements a discrete-log table pair is built
//! at construction time; multiplication, inversion and powering then cost a
//! few table lookups. Larger fields (up to the enforced cap of 2^32
//! elements) fall back to schoolbook polynomial arithmetic.
//!
//! Extension towers are flattened: GF(q^j) for q = p^e lives inside a single
//! ambient GF(p^{e*j}) and subfield membership is decided by Frobenius fixed
//! points, never by coercion between separate representations.

use std::fmt;
use std::sync::Arc;

/// Hard cap on field size so that element codes stay in exact integer range.
pub const MAX_FIELD_SIZE: u64 = 1 << 32;

/// Field sizes up to this bound get exp/log tables.
const TABLE_SIZE_LIMIT: u64 = 1 << 16;

/// Error type for field construction and arithmetic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldError {
    /// `p` is not prime.
    NotPrime(u32),
    /// Requested field would exceed [`MAX_FIELD_SIZE`].
    TooLarge { p: u32, k: u32 },
    /// Supplied modulus is not monic of the right degree or not irreducible.
    BadModulus,
    /// Operands belong to different field contexts.
    CtxMismatch,
    /// Multiplicative inverse of zero requested.
    InvZero,
    /// Frobenius exponent is not a power of the characteristic.
    NotPowerOfChar { q: u64, p: u32 },
    /// Embedding requested between incompatible fields.
    BadEmbedding,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldError::NotPrime(p) => write!(f, "{} is not prime", p),
            FieldError::TooLarge { p, k } => {
                write!(f, "field GF({}^{}) exceeds the 2^32 size cap", p, k)
            }
            FieldError::BadModulus => write!(f, "modulus is not a monic irreducible of the requested degree"),
            FieldError::CtxMismatch => write!(f, "operands live in different field contexts"),
            FieldError::InvZero => write!(f, "inverse of zero"),
            FieldError::NotPowerOfChar { q, p } => {
                write!(f, "{} is not a power of the characteristic {}", q, p)
            }
            FieldError::BadEmbedding => write!(f, "no embedding between these fields"),
        }
    }
}

impl std::error::Error for FieldError {}

/// Discrete-log tables for small fields.
struct Tables {
    /// `exp[i] = g^i` for a fixed generator g, `i` in `0..size-1`.
    exp: Vec<u32>,
    /// `log[code]` with `log[exp[i]] = i`; entry 0 is unused.
    log: Vec<u32>,
}

/// An immutable finite-field context GF(p^k).
///
/// Shared behind an `Arc`; all operations are pure, so a context may be used
/// from many threads at once.
pub struct FieldCtx {
    p: u32,
    k: u32,
    size: u64,
    /// Monic modulus, `modulus[i]` the coefficient of t^i, length k+1.
    modulus: Vec<u32>,
    tables: Option<Tables>,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldCtx(GF({}^{}))", self.p, self.k)
    }
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.k == other.k && self.modulus == other.modulus
    }
}
impl Eq for FieldCtx {}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    let n = n as u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Prime factors of `n`, without multiplicity.
fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

// ---------------------------------------------------------------------------
// Dense univariate arithmetic over GF(p), used for modulus selection and for
// bootstrap multiplication before any tables exist.
// ---------------------------------------------------------------------------

mod univar {
    /// Trim trailing zero coefficients.
    pub fn trim(v: &mut Vec<u32>) {
        while v.last() == Some(&0) {
            v.pop();
        }
    }

    pub fn rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
        // m monic
        let mut r: Vec<u32> = a.to_vec();
        let dm = m.len() - 1;
        while r.len() > dm {
            let lead = *r.last().unwrap();
            let shift = r.len() - 1 - dm;
            if lead != 0 {
                for i in 0..=dm {
                    let idx = shift + i;
                    let sub = (lead as u64 * m[i] as u64) % p as u64;
                    r[idx] = ((r[idx] as u64 + p as u64 * p as u64 - sub) % p as u64) as u32;
                }
            }
            r.pop();
        }
        trim(&mut r);
        r
    }

    pub fn mulmod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Vec<u32> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut prod = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p as u64;
            }
        }
        let prod: Vec<u32> = prod.into_iter().map(|c| c as u32).collect();
        rem(&prod, m, p)
    }

    pub fn powmod(base: &[u32], mut e: u64, m: &[u32], p: u32) -> Vec<u32> {
        let mut result = vec![1u32];
        let mut b = rem(base, m, p);
        while e > 0 {
            if e & 1 == 1 {
                result = mulmod(&result, &b, m, p);
            }
            b = mulmod(&b, &b, m, p);
            e >>= 1;
        }
        result
    }

    pub fn gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let mut a = a.to_vec();
        let mut b = b.to_vec();
        trim(&mut a);
        trim(&mut b);
        while !b.is_empty() {
            // make b monic for rem()
            let lead = *b.last().unwrap();
            let inv = mod_inv(lead, p);
            let monic: Vec<u32> = b.iter().map(|&c| (c as u64 * inv as u64 % p as u64) as u32).collect();
            let r = rem(&a, &monic, p);
            a = b;
            b = r;
        }
        a
    }

    pub fn mod_inv(a: u32, p: u32) -> u32 {
        // Fermat; p prime, a != 0 mod p
        let mut result = 1u64;
        let mut b = a as u64 % p as u64;
        let mut e = p as u64 - 2;
        while e > 0 {
            if e & 1 == 1 {
                result = result * b % p as u64;
            }
            b = b * b % p as u64;
            e >>= 1;
        }
        result as u32
    }

    /// Rabin irreducibility test for a monic polynomial of degree k over GF(p).
    pub fn is_irreducible(f: &[u32], p: u32) -> bool {
        let k = f.len() - 1;
        if k == 0 {
            return false;
        }
        let x = vec![0u32, 1];
        // x^{p^k} == x (mod f): iterate k successive p-th powers of x mod f.
        let mut g = x.clone();
        for _ in 0..k {
            g = powmod(&g, p as u64, f, p);
        }
        let mut diff = g.clone();
        sub_in_place(&mut diff, &x, p);
        if !rem(&diff, f, p).is_empty() {
            return false;
        }
        // gcd(x^{p^{k/r}} - x, f) == 1 for every prime r | k.
        for r in super::prime_factors(k as u64) {
            let j = k as u64 / r;
            let mut h = x.clone();
            for _ in 0..j {
                h = powmod(&h, p as u64, f, p);
            }
            sub_in_place(&mut h, &x, p);
            let g = gcd(f, &h, p);
            if g.len() != 1 {
                return false;
            }
        }
        true
    }

    pub fn sub_in_place(a: &mut Vec<u32>, b: &[u32], p: u32) {
        if a.len() < b.len() {
            a.resize(b.len(), 0);
        }
        for (i, &c) in b.iter().enumerate() {
            a[i] = ((a[i] as u64 + p as u64 - c as u64) % p as u64) as u32;
        }
        trim(a);
    }
}

impl FieldCtx {
    /// Construct GF(p^k) with the lexicographically smallest monic
    /// irreducible modulus of degree k (ordered by the base-p value of the
    /// non-leading coefficient vector).
    pub fn new(p: u32, k: u32) -> Result<Arc<FieldCtx>, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if k == 0 || (p as u64).checked_pow(k).is_none_or(|s| s > MAX_FIELD_SIZE) {
            return Err(FieldError::TooLarge { p, k });
        }
        let modulus = smallest_irreducible(p, k);
        Self::with_modulus(p, k, modulus)
    }

    /// Construct GF(p^k) with an explicitly supplied monic irreducible
    /// modulus (coefficient vector of length k+1, low degree first).
    pub fn with_modulus(p: u32, k: u32, modulus: Vec<u32>) -> Result<Arc<FieldCtx>, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        let size = (p as u64).checked_pow(k).filter(|&s| s <= MAX_FIELD_SIZE && k >= 1);
        let size = size.ok_or(FieldError::TooLarge { p, k })?;
        if modulus.len() != k as usize + 1
            || modulus[k as usize] != 1
            || modulus.iter().any(|&c| c >= p)
            || !univar::is_irreducible(&modulus, p)
        {
            return Err(FieldError::BadModulus);
        }
        let mut ctx = FieldCtx { p, k, size, modulus, tables: None };
        if size <= TABLE_SIZE_LIMIT {
            ctx.build_tables();
        }
        Ok(Arc::new(ctx))
    }

    fn build_tables(&mut self) {
        let n = self.size - 1;
        let factors = prime_factors(n);
        // Smallest code that generates the multiplicative group.
        let mut gen = 0u64;
        for cand in 2..self.size {
            if factors.iter().all(|&r| self.pow_slow(cand, n / r) != 1) {
                gen = cand;
                break;
            }
        }
        assert!(gen != 0 || self.size == 2, "no generator found");
        if self.size == 2 {
            gen = 1;
        }
        let mut exp = vec![0u32; n as usize];
        let mut log = vec![0u32; self.size as usize];
        let mut acc = 1u64;
        for i in 0..n as usize {
            exp[i] = acc as u32;
            log[acc as usize] = i as u32;
            acc = self.mul_coords(acc, gen);
        }
        debug_assert_eq!(acc, 1);
        self.tables = Some(Tables { exp, log });
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.k
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    /// Modulus coefficients, low degree first, length k+1.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    // -- raw code arithmetic ------------------------------------------------
    //
    // These operate directly on packed element codes. The `FieldElement`
    // wrapper below adds context checking; hot loops (point scans, binary
    // form evaluation) use the raw layer.

    pub fn coords_of(&self, code: u64) -> Vec<u32> {
        let mut c = code;
        let mut out = Vec::with_capacity(self.k as usize);
        for _ in 0..self.k {
            out.push((c % self.p as u64) as u32);
            c /= self.p as u64;
        }
        out
    }

    pub fn code_of(&self, coords: &[u32]) -> u64 {
        let mut code = 0u64;
        for &c in coords.iter().rev() {
            debug_assert!(c < self.p);
            code = code * self.p as u64 + c as u64;
        }
        code
    }

    #[inline]
    pub fn add_raw(&self, a: u64, b: u64) -> u64 {
        if self.p == 2 {
            return a ^ b;
        }
        let p = self.p as u64;
        let mut out = 0u64;
        let mut mult = 1u64;
        let (mut a, mut b) = (a, b);
        for _ in 0..self.k {
            out += (a % p + b % p) % p * mult;
            a /= p;
            b /= p;
            mult *= p;
        }
        out
    }

    #[inline]
    pub fn neg_raw(&self, a: u64) -> u64 {
        if self.p == 2 {
            return a;
        }
        let p = self.p as u64;
        let mut out = 0u64;
        let mut mult = 1u64;
        let mut a = a;
        for _ in 0..self.k {
            out += (p - a % p) % p * mult;
            a /= p;
            mult *= p;
        }
        out
    }

    #[inline]
    pub fn sub_raw(&self, a: u64, b: u64) -> u64 {
        if self.p == 2 {
            return a ^ b;
        }
        self.add_raw(a, self.neg_raw(b))
    }

    /// Schoolbook coordinate multiplication; used to bootstrap the tables
    /// and as the fallback for fields above the table size limit.
    fn mul_coords(&self, a: u64, b: u64) -> u64 {
        let p = self.p as u64;
        let k = self.k as usize;
        let ca = self.coords_of(a);
        let cb = self.coords_of(b);
        let mut prod = vec![0u64; 2 * k - 1];
        for (i, &x) in ca.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in cb.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p;
            }
        }
        // reduce by the monic modulus
        for i in (k..2 * k - 1).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            prod[i] = 0;
            for j in 0..k {
                let sub = c * self.modulus[j] as u64 % p;
                prod[i - k + j] = (prod[i - k + j] + p - sub) % p;
            }
        }
        let coords: Vec<u32> = prod[..k].iter().map(|&c| c as u32).collect();
        self.code_of(&coords)
    }

    #[inline]
    pub fn mul_raw(&self, a: u64, b: u64) -> u64 {
        if a == 0 || b == 0 {
            return 0;
        }
        if let Some(t) = &self.tables {
            let n = self.size - 1;
            let s = t.log[a as usize] as u64 + t.log[b as usize] as u64;
            let s = if s >= n { s - n } else { s };
            return t.exp[s as usize] as u64;
        }
        self.mul_coords(a, b)
    }

    fn pow_slow(&self, base: u64, mut e: u64) -> u64 {
        let mut result = 1u64;
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul_coords(result, b);
            }
            b = self.mul_coords(b, b);
            e >>= 1;
        }
        result
    }

    /// `a^e` with the convention `0^0 = 1`.
    #[inline]
    pub fn pow_raw(&self, a: u64, e: u64) -> u64 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let n = self.size - 1;
        if let Some(t) = &self.tables {
            let idx = (t.log[a as usize] as u128 * (e % n) as u128 % n as u128) as usize;
            return t.exp[idx] as u64;
        }
        self.pow_slow(a, e % n)
    }

    #[inline]
    pub fn inv_raw(&self, a: u64) -> Result<u64, FieldError> {
        if a == 0 {
            return Err(FieldError::InvZero);
        }
        if let Some(t) = &self.tables {
            let n = self.size - 1;
            let l = t.log[a as usize] as u64;
            return Ok(t.exp[((n - l) % n) as usize] as u64);
        }
        Ok(self.pow_slow(a, self.size - 2))
    }

    /// Frobenius power `a^Q` where `Q` must be a power of the characteristic.
    pub fn frob_raw(&self, a: u64, q_power: u64) -> Result<u64, FieldError> {
        let mut q = q_power;
        if q == 0 {
            return Err(FieldError::NotPowerOfChar { q: q_power, p: self.p });
        }
        while q % self.p as u64 == 0 {
            q /= self.p as u64;
        }
        if q != 1 {
            return Err(FieldError::NotPowerOfChar { q: q_power, p: self.p });
        }
        Ok(self.pow_raw(a, q_power))
    }

    /// Smallest j >= 1 with `a^(q^j) = a`, for `q` a power of p.
    pub fn subfield_degree_raw(&self, a: u64, q: u64) -> Result<u32, FieldError> {
        self.frob_raw(1, q)?; // validate q
        let mut b = self.pow_raw(a, q);
        let mut j = 1u32;
        while b != a {
            b = self.pow_raw(b, q);
            j += 1;
            assert!(j <= self.k * 64, "subfield degree search did not terminate");
        }
        Ok(j)
    }

    /// All codes fixed by the q^j-Frobenius, ascending; this is the subfield
    /// GF(q^j) whenever it is contained in this field.
    pub fn subfield_codes(&self, q: u64, j: u32) -> Vec<u64> {
        let qj = q.pow(j);
        (0..self.size).filter(|&a| self.pow_raw(a, qj) == a).collect()
    }

    /// True if `a` is fixed by the q^j-Frobenius.
    #[inline]
    pub fn in_subfield_raw(&self, a: u64, q: u64, j: u32) -> bool {
        self.pow_raw(a, q.pow(j)) == a
    }

    pub fn zero(self: &Arc<Self>) -> FieldElement {
        FieldElement { ctx: Arc::clone(self), code: 0 }
    }

    pub fn one(self: &Arc<Self>) -> FieldElement {
        FieldElement { ctx: Arc::clone(self), code: 1 }
    }

    /// The polynomial-basis generator t (code p); for k = 1 this is 0.
    pub fn gen(self: &Arc<Self>) -> FieldElement {
        FieldElement { ctx: Arc::clone(self), code: if self.k > 1 { self.p as u64 } else { 0 } }
    }

    pub fn element(self: &Arc<Self>, code: u64) -> FieldElement {
        assert!(code < self.size, "element code out of range");
        FieldElement { ctx: Arc::clone(self), code }
    }

    pub fn from_coords(self: &Arc<Self>, coords: &[u32]) -> FieldElement {
        assert!(coords.len() <= self.k as usize);
        let mut c = coords.to_vec();
        c.resize(self.k as usize, 0);
        self.element(self.code_of(&c))
    }

    /// An integer constant reduced into the prime subfield.
    pub fn from_int(self: &Arc<Self>, n: i64) -> FieldElement {
        let p = self.p as i64;
        let r = n.rem_euclid(p) as u64;
        self.element(r)
    }

    /// All p^k elements, each exactly once, in deterministic (code) order.
    pub fn enumerate(self: &Arc<Self>) -> impl Iterator<Item = FieldElement> + '_ {
        let ctx = Arc::clone(self);
        (0..self.size).map(move |code| FieldElement { ctx: Arc::clone(&ctx), code })
    }

    /// Render a code in polynomial-basis notation, e.g. `t^2+2*t+1`.
    pub fn format_raw(&self, code: u64) -> String {
        if code == 0 {
            return "0".to_string();
        }
        let coords = self.coords_of(code);
        let mut parts: Vec<String> = Vec::new();
        for (i, &c) in coords.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let part = match (i, c) {
                (0, _) => format!("{}", c),
                (1, 1) => "t".to_string(),
                (1, _) => format!("{}*t", c),
                (_, 1) => format!("t^{}", i),
                (_, _) => format!("{}*t^{}", c, i),
            };
            parts.push(part);
        }
        parts.join("+")
    }

    /// Parse polynomial-basis notation produced by [`FieldCtx::format_raw`].
    pub fn parse_raw(&self, s: &str) -> Option<u64> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return None;
        }
        let mut coords = vec![0u32; self.k as usize];
        for term in s.split('+') {
            let (coeff, power) = if let Some(rest) = term.strip_prefix("t^") {
                (1u32, rest.parse::<usize>().ok()?)
            } else if term == "t" {
                (1, 1)
            } else if let Some((c, tpart)) = term.split_once("*t") {
                let coeff = c.parse::<u32>().ok()?;
                let power = if tpart.is_empty() {
                    1
                } else {
                    tpart.strip_prefix('^')?.parse::<usize>().ok()?
                };
                (coeff, power)
            } else {
                (term.parse::<u32>().ok()?, 0)
            };
            if power >= coords.len() && coeff % self.p != 0 {
                return None;
            }
            if power < coords.len() {
                coords[power] = (coords[power] + coeff) % self.p;
            }
        }
        Some(self.code_of(&coords))
    }
}

/// Lexicographically smallest monic irreducible of degree k over GF(p),
/// ordering the non-leading coefficient vectors by their base-p value.
fn smallest_irreducible(p: u32, k: u32) -> Vec<u32> {
    let k = k as usize;
    let total = (p as u64).pow(k as u32);
    for code in 0..total {
        let mut f: Vec<u32> = Vec::with_capacity(k + 1);
        let mut c = code;
        for _ in 0..k {
            f.push((c % p as u64) as u32);
            c /= p as u64;
        }
        f.push(1);
        if univar::is_irreducible(&f, p) {
            return f;
        }
    }
    unreachable!("irreducible polynomials of every degree exist")
}

/// An element of GF(p^k), carrying its context.
#[derive(Clone)]
pub struct FieldElement {
    ctx: Arc<FieldCtx>,
    code: u64,
}

impl FieldElement {
    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn code(&self) -> u64 {
        self.code
    }

    pub fn coords(&self) -> Vec<u32> {
        self.ctx.coords_of(self.code)
    }

    pub fn is_zero(&self) -> bool {
        self.code == 0
    }

    fn same_ctx(&self, other: &FieldElement) -> bool {
        Arc::ptr_eq(&self.ctx, &other.ctx) || *self.ctx == *other.ctx
    }

    pub fn checked_add(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        if !self.same_ctx(other) {
            return Err(FieldError::CtxMismatch);
        }
        Ok(FieldElement { ctx: Arc::clone(&self.ctx), code: self.ctx.add_raw(self.code, other.code) })
    }

    pub fn checked_mul(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        if !self.same_ctx(other) {
            return Err(FieldError::CtxMismatch);
        }
        Ok(FieldElement { ctx: Arc::clone(&self.ctx), code: self.ctx.mul_raw(self.code, other.code) })
    }

    pub fn inv(&self) -> Result<FieldElement, FieldError> {
        Ok(FieldElement { ctx: Arc::clone(&self.ctx), code: self.ctx.inv_raw(self.code)? })
    }

    pub fn neg(&self) -> FieldElement {
        FieldElement { ctx: Arc::clone(&self.ctx), code: self.ctx.neg_raw(self.code) }
    }

    pub fn pow(&self, e: u64) -> FieldElement {
        FieldElement { ctx: Arc::clone(&self.ctx), code: self.ctx.pow_raw(self.code, e) }
    }

    /// `a^Q` for `Q` a power of the characteristic.
    pub fn frobenius(&self, q_power: u64) -> Result<FieldElement, FieldError> {
        Ok(FieldElement { ctx: Arc::clone(&self.ctx), code: self.ctx.frob_raw(self.code, q_power)? })
    }

    /// Smallest j >= 1 with `self^(q^j) = self`.
    pub fn subfield_degree(&self, q: u64) -> Result<u32, FieldError> {
        self.ctx.subfield_degree_raw(self.code, q)
    }
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.code == other.code && self.same_ctx(other)
    }
}
impl Eq for FieldElement {}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.ctx.format_raw(self.code))
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.ctx.format_raw(self.code))
    }
}

macro_rules! binop {
    ($trait:ident, $fn:ident, $checked:ident) => {
        impl std::ops::$trait for &FieldElement {
            type Output = FieldElement;
            fn $fn(self, rhs: &FieldElement) -> FieldElement {
                self.$checked(rhs).expect("field context mismatch")
            }
        }
    };
}
binop!(Add, add, checked_add);
binop!(Mul, mul, checked_mul);

impl std::ops::Sub for &FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: &FieldElement) -> FieldElement {
        self.checked_add(&rhs.neg()).expect("field context mismatch")
    }
}

/// An embedding GF(p^a) -> GF(p^{ab}), fixed by mapping the source generator
/// to the lexicographically first root of the source modulus in the target.
pub struct Embedding {
    src: Arc<FieldCtx>,
    dst: Arc<FieldCtx>,
    /// Images of t^0, t^1, ..., t^{a-1}.
    gen_powers: Vec<u64>,
}

impl Embedding {
    pub fn new(src: &Arc<FieldCtx>, dst: &Arc<FieldCtx>) -> Result<Embedding, FieldError> {
        if src.p != dst.p || dst.k % src.k != 0 {
            return Err(FieldError::BadEmbedding);
        }
        // Find the first root of the source modulus in the target field.
        let root = (0..dst.size)
            .find(|&c| {
                let mut acc = 0u64;
                for &m in src.modulus.iter().rev() {
                    acc = dst.add_raw(dst.mul_raw(acc, c), m as u64);
                }
                acc == 0
            })
            .ok_or(FieldError::BadEmbedding)?;
        let mut gen_powers = Vec::with_capacity(src.k as usize);
        let mut acc = 1u64;
        for _ in 0..src.k {
            gen_powers.push(acc);
            acc = dst.mul_raw(acc, root);
        }
        Ok(Embedding { src: Arc::clone(src), dst: Arc::clone(dst), gen_powers })
    }

    pub fn apply(&self, a: &FieldElement) -> FieldElement {
        assert!(**a.ctx() == *self.src, "element not in the embedding source");
        let coords = a.coords();
        let mut code = 0u64;
        for (i, &c) in coords.iter().enumerate() {
            code = self.dst.add_raw(code, self.dst.mul_raw(c as u64, self.gen_powers[i]));
        }
        FieldElement { ctx: Arc::clone(&self.dst), code }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(p: u32, k: u32) -> Arc<FieldCtx> {
        FieldCtx::new(p, k).unwrap()
    }

    #[test]
    fn modulus_is_deterministic() {
        assert_eq!(gf(2, 2).modulus(), &[1, 1, 1]); // t^2 + t + 1
        assert_eq!(gf(3, 2).modulus(), &[1, 0, 1]); // t^2 + 1
        assert_eq!(gf(2, 1).modulus(), &[0, 1]); // t
    }

    #[test]
    fn char2_addition() {
        let f4 = gf(2, 2);
        let t = f4.gen();
        assert!(t.checked_add(&t).unwrap().is_zero());
        let a = f4.element(3);
        assert_eq!(a.checked_add(&f4.zero()).unwrap(), a);
    }

    #[test]
    fn gf3_addition() {
        let f3 = gf(3, 1);
        let two = f3.from_int(2);
        assert_eq!(two.checked_add(&two).unwrap(), f3.one());
    }

    #[test]
    fn gf4_multiplication_and_inverse() {
        let f4 = gf(2, 2);
        let t = f4.gen();
        let t1 = f4.from_coords(&[1, 1]); // t + 1
        assert_eq!(t.checked_mul(&t).unwrap(), t1); // t^2 = t + 1
        assert_eq!(t.inv().unwrap(), t1); // t(t+1) = 1
    }

    #[test]
    fn gf8_inverses_exhaustive() {
        let f8 = gf(2, 3);
        for a in f8.enumerate().skip(1) {
            let prod = a.checked_mul(&a.inv().unwrap()).unwrap();
            assert_eq!(prod, f8.one());
        }
    }

    #[test]
    fn inv_zero_is_error() {
        let f4 = gf(2, 2);
        assert_eq!(f4.zero().inv(), Err(FieldError::InvZero));
    }

    #[test]
    fn ctx_mismatch_is_error() {
        let a = gf(2, 2).one();
        let b = gf(2, 3).one();
        assert_eq!(a.checked_add(&b), Err(FieldError::CtxMismatch));
    }

    #[test]
    fn frobenius_fixes_whole_field() {
        for (p, k) in [(2u32, 3u32), (3, 2), (5, 1)] {
            let f = gf(p, k);
            let q = (p as u64).pow(k);
            for a in f.enumerate() {
                assert_eq!(a.frobenius(q).unwrap(), a);
            }
        }
    }

    #[test]
    fn frobenius_on_gf4_generator() {
        let f4 = gf(2, 2);
        let t = f4.gen();
        assert_eq!(t.frobenius(2).unwrap(), f4.from_coords(&[1, 1]));
    }

    #[test]
    fn frobenius_rejects_non_power() {
        let f4 = gf(2, 2);
        assert!(matches!(f4.one().frobenius(6), Err(FieldError::NotPowerOfChar { .. })));
        assert!(matches!(f4.one().frobenius(0), Err(FieldError::NotPowerOfChar { .. })));
    }

    #[test]
    fn frobenius_fixed_points_are_the_subfield() {
        // Inside GF(2^3) the 2-Frobenius fixes exactly the 2 elements of GF(2).
        let f = gf(2, 3);
        let fixed = f.enumerate().filter(|a| a.frobenius(2).unwrap() == *a).count();
        assert_eq!(fixed, 2);
        // Inside GF(2^6) the 4-Frobenius fixes exactly GF(4).
        let f = gf(2, 6);
        assert_eq!(f.subfield_codes(2, 2).len(), 4);
    }

    #[test]
    fn subfield_degrees() {
        let f4 = gf(2, 2);
        assert_eq!(f4.one().subfield_degree(2).unwrap(), 1);
        assert_eq!(f4.gen().subfield_degree(2).unwrap(), 2);
        // All degrees over GF(2^6) divide 6.
        let f = gf(2, 6);
        for a in f.enumerate() {
            let d = a.subfield_degree(2).unwrap();
            assert!([1, 2, 3, 6].contains(&d));
        }
    }

    #[test]
    fn enumeration_is_complete_and_ordered() {
        let f2 = gf(2, 1);
        let codes: Vec<u64> = f2.enumerate().map(|a| a.code()).collect();
        assert_eq!(codes, vec![0, 1]);
        assert_eq!(gf(3, 2).enumerate().count(), 9);
        // Sum of all elements of GF(4) is 0.
        let f4 = gf(2, 2);
        let sum = f4.enumerate().fold(f4.zero(), |acc, a| &acc + &a);
        assert!(sum.is_zero());
    }

    #[test]
    fn field_axioms_small_fields() {
        for (p, k) in [(2u32, 2u32), (2, 3), (2, 6), (3, 1), (3, 2), (5, 1), (7, 1)] {
            let f = gf(p, k);
            let els: Vec<FieldElement> = f.enumerate().collect();
            for a in &els {
                for b in &els {
                    // commutativity
                    assert_eq!(a + b, b + a);
                    assert_eq!(a * b, b * a);
                    for c in &els {
                        assert_eq!(&(a + b) + c, a + &(b + c));
                        assert_eq!(&(a * b) * c, a * &(b * c));
                        assert_eq!(a * &(b + c), &(a * b) + &(a * c));
                    }
                }
            }
        }
    }

    #[test]
    fn frobenius_is_additive_and_multiplicative() {
        for (p, k, q) in [(2u32, 6u32, 2u64), (3, 2, 3), (2, 4, 4)] {
            let f = gf(p, k);
            let els: Vec<FieldElement> = f.enumerate().collect();
            for a in &els {
                for b in &els {
                    let lhs = (a + b).frobenius(q).unwrap();
                    let rhs = &a.frobenius(q).unwrap() + &b.frobenius(q).unwrap();
                    assert_eq!(lhs, rhs);
                    let lhs = (a * b).frobenius(q).unwrap();
                    let rhs = &a.frobenius(q).unwrap() * &b.frobenius(q).unwrap();
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn embedding_commutes_with_arithmetic() {
        let small = gf(2, 2);
        let big = gf(2, 6);
        let emb = Embedding::new(&small, &big).unwrap();
        let els: Vec<FieldElement> = small.enumerate().collect();
        for a in &els {
            for b in &els {
                assert_eq!(emb.apply(&(a + b)), &emb.apply(a) + &emb.apply(b));
                assert_eq!(emb.apply(&(a * b)), &emb.apply(a) * &emb.apply(b));
            }
        }
        // The image lands in the GF(4) subfield of GF(2^6).
        for a in &els {
            assert!(big.in_subfield_raw(emb.apply(a).code(), 2, 2));
        }
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert_eq!(FieldCtx::new(4, 2).unwrap_err(), FieldError::NotPrime(4));
        assert!(matches!(FieldCtx::new(2, 33), Err(FieldError::TooLarge { .. })));
        assert!(matches!(FieldCtx::new(2, 0), Err(FieldError::TooLarge { .. })));
        // t^2 + 1 = (t + 1)^2 over GF(2)
        assert_eq!(FieldCtx::with_modulus(2, 2, vec![1, 0, 1]).unwrap_err(), FieldError::BadModulus);
        // wrong length
        assert_eq!(FieldCtx::with_modulus(2, 2, vec![1, 1]).unwrap_err(), FieldError::BadModulus);
        // a valid explicit modulus works: t^3 + t + 1
        assert!(FieldCtx::with_modulus(2, 3, vec![1, 1, 0, 1]).is_ok());
    }

    #[test]
    fn big_field_without_tables() {
        // 3^11 = 177147 > 2^16, exercises the schoolbook fallback.
        let f = FieldCtx::new(3, 11).unwrap();
        let a = f.element(177_000);
        let b = f.element(12_345);
        assert_eq!(&(&a * &b) * &a.inv().unwrap(), b);
        assert_eq!(a.frobenius(3u64.pow(11)).unwrap(), a);
    }

    #[test]
    fn format_and_parse_round_trip() {
        let f = gf(3, 3);
        for a in f.enumerate() {
            let s = f.format_raw(a.code());
            assert_eq!(f.parse_raw(&s), Some(a.code()));
        }
        assert_eq!(f.format_raw(f.parse_raw("2*t^2+1").unwrap()), "2*t^2+1");
    }
}
