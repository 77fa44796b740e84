//! Arithmetic over GF(q) for prime powers q = p^e up to 2^16.
//!
//! Elements are canonical integers in `[0, q)`: the base-p digits of the
//! integer are the coefficients `c_0, c_1, ..` of the residue polynomial.
//! Prime fields use modular arithmetic; extension fields multiply through
//! exp/log tables built from a primitive element.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported field order.
pub const MAX_ORDER: u64 = 1 << 16;

/// Serialized form of a field: `{p, e, poly: [c_0..c_e]}`.
///
/// An empty `poly` selects the default modulus (smallest irreducible monic
/// polynomial of degree `e`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u32,
    #[serde(default = "one")]
    pub e: u32,
    #[serde(default)]
    pub poly: Vec<u32>,
}

fn one() -> u32 {
    1
}

impl FieldSpec {
    pub fn build(&self) -> Result<Gf> {
        if self.poly.is_empty() {
            Gf::new(self.p, self.e)
        } else {
            Gf::with_poly(self.p, self.e, self.poly.clone())
        }
    }
}

struct Inner {
    p: u32,
    e: u32,
    q: u32,
    poly: Vec<u32>,
    exp: Vec<u32>,
    log: Vec<u32>,
}

/// A finite field. Cheap to clone; the tables are shared.
#[derive(Clone)]
pub struct Gf(Arc<Inner>);

impl PartialEq for Gf {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.p == other.0.p && self.0.e == other.0.e && self.0.poly == other.0.poly)
    }
}

impl Eq for Gf {}

impl fmt::Debug for Gf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Gf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.e == 1 {
            write!(f, "GF({})", self.0.p)
        } else {
            write!(f, "GF({}^{}, poly={:?})", self.0.p, self.0.e, self.0.poly)
        }
    }
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits a prime power into `(p, e)`.
pub fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let mut rest = q;
    let mut e = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        e += 1;
    }
    (rest == 1).then_some((p, e))
}

impl Gf {
    /// GF(p^e) with the default modulus.
    pub fn new(p: u32, e: u32) -> Result<Self> {
        check_order(p, e)?;
        let poly = if e == 1 {
            vec![0, 1]
        } else {
            smallest_irreducible(p, e as usize)
        };
        Self::build(p, e, poly)
    }

    pub fn with_poly(p: u32, e: u32, poly: Vec<u32>) -> Result<Self> {
        check_order(p, e)?;
        if poly.len() != e as usize + 1 {
            return Err(Error::usage(format!(
                "reduction polynomial for GF({p}^{e}) needs {} coefficients, got {}",
                e + 1,
                poly.len()
            )));
        }
        if poly.iter().any(|&c| c >= p) {
            return Err(Error::usage("polynomial coefficients must lie in [0, p)"));
        }
        if poly[e as usize] != 1 {
            return Err(Error::usage("reduction polynomial must be monic"));
        }
        if e > 1 && !is_irreducible(&poly, p) {
            return Err(Error::usage(format!(
                "polynomial {poly:?} is reducible over GF({p})"
            )));
        }
        Self::build(p, e, poly)
    }

    pub fn prime(p: u32) -> Result<Self> {
        Self::new(p, 1)
    }

    /// Field of the given order with the default modulus.
    pub fn of_order(q: u32) -> Result<Self> {
        let (p, e) =
            prime_power(q).ok_or_else(|| Error::usage(format!("{q} is not a prime power")))?;
        Self::new(p, e)
    }

    fn build(p: u32, e: u32, poly: Vec<u32>) -> Result<Self> {
        let q = p.pow(e);
        let mut inner = Inner {
            p,
            e,
            q,
            poly,
            exp: Vec::new(),
            log: Vec::new(),
        };
        let generator = (2..q.max(3))
            .find(|&g| multiplicative_order(&inner, g) == q - 1)
            .unwrap_or(1);
        let order = (q - 1) as usize;
        let mut exp = vec![0u32; 2 * order.max(1)];
        let mut log = vec![0u32; q as usize];
        let mut x = 1u32;
        for (i, slot) in exp.iter_mut().take(order).enumerate() {
            *slot = x;
            log[x as usize] = i as u32;
            x = slow_mul(&inner, x, generator);
        }
        for i in order..exp.len() {
            exp[i] = exp[i - order];
        }
        inner.exp = exp;
        inner.log = log;
        Ok(Gf(Arc::new(inner)))
    }

    pub fn p(&self) -> u32 {
        self.0.p
    }

    pub fn e(&self) -> u32 {
        self.0.e
    }

    pub fn q(&self) -> u32 {
        self.0.q
    }

    pub fn poly(&self) -> &[u32] {
        &self.0.poly
    }

    pub fn spec(&self) -> FieldSpec {
        FieldSpec {
            p: self.0.p,
            e: self.0.e,
            poly: self.0.poly.clone(),
        }
    }

    pub fn elements(&self) -> std::ops::Range<u32> {
        0..self.0.q
    }

    /// Wraps a representative, checking its range.
    pub fn element(&self, value: u32) -> Result<FieldElement> {
        if value >= self.0.q {
            return Err(Error::usage(format!(
                "representative {value} out of range for {self}"
            )));
        }
        Ok(FieldElement {
            field: self.clone(),
            value,
        })
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        let s = &self.0;
        if s.e == 1 {
            let t = a + b;
            if t >= s.p {
                t - s.p
            } else {
                t
            }
        } else if s.p == 2 {
            a ^ b
        } else {
            digitwise(s.p, s.e, a, b, |x, y| (x + y) % s.p)
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        let s = &self.0;
        if a == 0 || s.p == 2 {
            a
        } else if s.e == 1 {
            s.p - a
        } else {
            digitwise(s.p, s.e, a, 0, |x, _| (s.p - x) % s.p)
        }
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        let s = &self.0;
        if a == 0 || b == 0 {
            0
        } else if s.e == 1 {
            ((a as u64 * b as u64) % s.p as u64) as u32
        } else {
            s.exp[(s.log[a as usize] + s.log[b as usize]) as usize]
        }
    }

    pub fn inv(&self, a: u32) -> Result<u32> {
        if a == 0 {
            return Err(Error::Domain("zero has no multiplicative inverse".into()));
        }
        let s = &self.0;
        let order = s.q - 1;
        Ok(s.exp[((order - s.log[a as usize]) % order) as usize])
    }

    pub fn div(&self, a: u32, b: u32) -> Result<u32> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: u32, k: u64) -> u32 {
        if k == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let s = &self.0;
        let order = (s.q - 1) as u64;
        let l = (s.log[a as usize] as u64 * (k % order)) % order;
        s.exp[l as usize]
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        rng.gen_range(0..self.0.q)
    }

    /// Uniformly random element, wrapped.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        FieldElement {
            field: self.clone(),
            value: self.sample(rng),
        }
    }

    /// Base-p digits of a representative, low order first, `e` entries.
    pub fn digits(&self, a: u32) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.0.e as usize);
        let mut v = a;
        for _ in 0..self.0.e {
            out.push(v % self.0.p);
            v /= self.0.p;
        }
        out
    }

    pub fn from_digits(&self, digits: &[u32]) -> u32 {
        digits.iter().rev().fold(0, |acc, &d| acc * self.0.p + d)
    }
}

fn check_order(p: u32, e: u32) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::usage(format!("characteristic {p} is not prime")));
    }
    if e == 0 {
        return Err(Error::usage("extension degree must be at least 1"));
    }
    let q = (p as u64).checked_pow(e).unwrap_or(u64::MAX);
    if q > MAX_ORDER {
        return Err(Error::usage(format!(
            "field order {p}^{e} exceeds the supported maximum {MAX_ORDER}"
        )));
    }
    Ok(())
}

#[inline]
fn digitwise(p: u32, e: u32, a: u32, b: u32, f: impl Fn(u32, u32) -> u32) -> u32 {
    let (mut a, mut b) = (a, b);
    let mut out = 0;
    let mut place = 1;
    for _ in 0..e {
        out += f(a % p, b % p) * place;
        a /= p;
        b /= p;
        place *= p;
    }
    out
}

fn to_poly(s: &Inner, a: u32) -> Vec<u32> {
    let mut v = a;
    (0..s.e)
        .map(|_| {
            let d = v % s.p;
            v /= s.p;
            d
        })
        .collect()
}

/// Polynomial multiplication followed by reduction; used only to build tables.
fn slow_mul(s: &Inner, a: u32, b: u32) -> u32 {
    if s.e == 1 {
        return ((a as u64 * b as u64) % s.p as u64) as u32;
    }
    let pa = to_poly(s, a);
    let pb = to_poly(s, b);
    let prod = poly_mul(&pa, &pb, s.p);
    let r = poly_rem(&prod, &s.poly, s.p);
    r.iter().rev().fold(0, |acc, &d| acc * s.p + d)
}

fn multiplicative_order(s: &Inner, g: u32) -> u32 {
    if g == 0 {
        return 0;
    }
    let mut x = g;
    let mut k = 1;
    while x != 1 {
        x = slow_mul(s, x, g);
        k += 1;
        if k > s.q {
            return 0;
        }
    }
    k
}

fn trim(mut v: Vec<u32>) -> Vec<u32> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

pub(crate) fn poly_mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    trim(out.into_iter().map(|c| c as u32).collect())
}

/// Remainder of `a` modulo a monic-or-not nonzero `m` over GF(p).
pub(crate) fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let m = trim(m.to_vec());
    let mut r = trim(a.to_vec());
    let dm = m.len() - 1;
    let lead_inv = mod_inv(m[dm], p);
    while r.len() > dm {
        let dr = r.len() - 1;
        let factor = (r[dr] as u64 * lead_inv as u64 % p as u64) as u32;
        for (i, &mi) in m.iter().enumerate() {
            let idx = dr - dm + i;
            let sub = (factor as u64 * mi as u64 % p as u64) as u32;
            r[idx] = (r[idx] + p - sub) % p;
        }
        r = trim(r);
    }
    r
}

fn mod_inv(a: u32, p: u32) -> u32 {
    let (mut t, mut new_t) = (0i64, 1i64);
    let (mut r, mut new_r) = (p as i64, a as i64);
    while new_r != 0 {
        let k = r / new_r;
        (t, new_t) = (new_t, t - k * new_t);
        (r, new_r) = (new_r, r - k * new_r);
    }
    t.rem_euclid(p as i64) as u32
}

/// Irreducibility by trial division against every monic polynomial of
/// degree 1..=deg/2.
pub fn is_irreducible(poly: &[u32], p: u32) -> bool {
    let f = trim(poly.to_vec());
    if f.len() < 2 {
        return false;
    }
    let deg = f.len() - 1;
    for d in 1..=deg / 2 {
        let count = (p as u64).pow(d as u32);
        for low in 0..count {
            let mut divisor = Vec::with_capacity(d + 1);
            let mut v = low;
            for _ in 0..d {
                divisor.push((v % p as u64) as u32);
                v /= p as u64;
            }
            divisor.push(1);
            if poly_rem(&f, &divisor, p).is_empty() {
                return false;
            }
        }
    }
    true
}

/// Smallest irreducible monic polynomial of degree `e`, ordered by the
/// base-p value of its coefficients with `c_e` most significant.
pub fn smallest_irreducible(p: u32, e: usize) -> Vec<u32> {
    let count = (p as u64).pow(e as u32);
    (0..count)
        .map(|low| {
            let mut poly = Vec::with_capacity(e + 1);
            let mut v = low;
            for _ in 0..e {
                poly.push((v % p as u64) as u32);
                v /= p as u64;
            }
            poly.push(1);
            poly
        })
        .find(|poly| is_irreducible(poly, p))
        .expect("an irreducible polynomial of every degree exists")
}

/// A field element paired with its field, for checked arithmetic across
/// API boundaries. Hot loops work on raw `u32` representatives instead.
#[derive(Clone, PartialEq, Eq)]
pub struct FieldElement {
    field: Gf,
    value: u32,
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.value, self.field)
    }
}

impl FieldElement {
    pub fn value(&self) -> u32 {
        self.value
    }

    pub fn field(&self) -> &Gf {
        &self.field
    }

    fn same_field(&self, other: &Self) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch {
                left: self.field.to_string(),
                right: other.field.to_string(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_field(other)?;
        Ok(Self {
            field: self.field.clone(),
            value: self.field.add(self.value, other.value),
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_field(other)?;
        Ok(Self {
            field: self.field.clone(),
            value: self.field.mul(self.value, other.value),
        })
    }

    pub fn inv(&self) -> Result<Self> {
        Ok(Self {
            field: self.field.clone(),
            value: self.field.inv(self.value)?,
        })
    }
}
