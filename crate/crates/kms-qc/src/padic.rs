//! Elements of Q_p with per-element absolute precision.
//!
//! Every element stores at most `precision` digits of relative precision
//! (the context cap) and carries the absolute precision `m` to which it is
//! known. Arithmetic propagates `m` by the usual rules, so the precision of
//! any result is computed rather than assumed.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const EXACT: i64 = i64::MAX;

thread_local! {
    static POWERS: RefCell<HashMap<u64, Vec<BigUint>>> = RefCell::new(HashMap::new());
}

/// p^k, cached per thread.
pub(crate) fn ppow(p: u64, k: u32) -> BigUint {
    POWERS.with(|cache| {
        let mut cache = cache.borrow_mut();
        let v = cache.entry(p).or_insert_with(|| vec![BigUint::one()]);
        while v.len() <= k as usize {
            let next = v.last().unwrap() * p;
            v.push(next);
        }
        v[k as usize].clone()
    })
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// v_p(n) and the cofactor, for nonzero n.
fn split_p(n: &BigUint, p: u64) -> (i64, BigUint) {
    let pb = BigUint::from(p);
    let mut v = 0;
    let mut n = n.clone();
    loop {
        let (q, r) = n.div_rem(&pb);
        if !r.is_zero() {
            return (v, n);
        }
        n = q;
        v += 1;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PadicContext {
    p: u64,
    precision: u32,
}

impl PadicContext {
    pub fn new(p: u64, precision: u32) -> Result<Self> {
        if p == 2 || !is_prime(p) {
            return Err(Error::Invalid(format!("p = {p} must be an odd prime")));
        }
        if precision == 0 {
            return Err(Error::Invalid("precision must be at least 1".into()));
        }
        Ok(PadicContext { p, precision })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn with_precision(&self, precision: u32) -> Self {
        PadicContext { p: self.p, precision: precision.max(1) }
    }

    pub fn zero(&self) -> Padic {
        Padic { p: self.p, cap: self.precision, val: EXACT, unit: BigUint::zero(), prec: EXACT }
    }

    pub fn one(&self) -> Padic {
        self.from_int(1)
    }

    /// O(p^m).
    pub fn big_o(&self, m: i64) -> Padic {
        Padic { p: self.p, cap: self.precision, val: m, unit: BigUint::zero(), prec: m }
    }

    pub fn from_int(&self, n: i64) -> Padic {
        self.from_bigint(&BigInt::from(n))
    }

    pub fn from_bigint(&self, n: &BigInt) -> Padic {
        if n.is_zero() {
            return self.zero();
        }
        let (v, u) = split_p(n.magnitude(), self.p);
        self.make_unit(v, u, n.sign() == Sign::Minus, EXACT)
    }

    pub fn from_ratio(&self, num: i64, den: i64) -> Padic {
        self.from_rational(&BigRational::new(num.into(), den.into()))
    }

    pub fn from_rational(&self, q: &BigRational) -> Padic {
        if q.is_zero() {
            return self.zero();
        }
        let (vn, un) = split_p(q.numer().magnitude(), self.p);
        let (vd, ud) = split_p(q.denom().magnitude(), self.p);
        let m = ppow(self.p, self.precision);
        let inv = ud.modinv(&m).expect("unit denominator");
        let neg = q.is_negative();
        self.make_unit(vn - vd, (un * inv) % &m, neg, EXACT)
    }

    /// s*p^v with relative precision min(cap, prec - v).
    pub(crate) fn make_unit(&self, v: i64, u: BigUint, negative: bool, prec: i64) -> Padic {
        let rel = (self.precision as i64).min(prec.saturating_sub(v));
        if rel <= 0 {
            return self.big_o(prec);
        }
        let m = ppow(self.p, rel as u32);
        let mut u = u % &m;
        if negative && !u.is_zero() {
            u = &m - u;
        }
        Padic { p: self.p, cap: self.precision, val: v, unit: u, prec: v + rel }
    }

    /// Parses `c*p^v + ... + O(p^m)`, `O(p^m)`, `0`, or an exact rational.
    pub fn parse(&self, s: &str) -> Result<Padic> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t == "0" {
            return Ok(self.zero());
        }
        let bad = || Error::Parse(format!("bad p-adic literal {s:?}"));
        let pp = format!("{}^", self.p);
        let parse_big_o = |o: &str| -> Result<i64> {
            let inner = o.strip_prefix("O(").and_then(|r| r.strip_suffix(')')).ok_or_else(bad)?;
            inner.strip_prefix(&pp).ok_or_else(bad)?.parse::<i64>().map_err(|_| bad())
        };
        if t.starts_with("O(") {
            return Ok(self.big_o(parse_big_o(&t)?));
        }
        if let Some((head, o)) = t.split_once("+O(") {
            let m = parse_big_o(&format!("O({o}"))?;
            let mut acc = BigRational::zero();
            for term in head.split('+') {
                let (c, k) = match term.split_once('*') {
                    Some((c, e)) => (c.parse::<BigInt>().map_err(|_| bad())?, e),
                    None if term.starts_with(&self.p.to_string()) && term.contains('^') => (BigInt::one(), term),
                    None => (term.parse::<BigInt>().map_err(|_| bad())?, "0"),
                };
                let k: i64 = if k == "0" {
                    0
                } else if k == self.p.to_string() {
                    1
                } else {
                    k.strip_prefix(&pp).ok_or_else(bad)?.parse().map_err(|_| bad())?
                };
                let pk = BigRational::from_integer(BigInt::from(self.p).pow(k.unsigned_abs() as u32));
                acc += BigRational::from_integer(c) * if k >= 0 { pk } else { pk.recip() };
            }
            let x = self.from_rational(&acc);
            if x.valuation_bound() >= m && !acc.is_zero() {
                return Err(bad());
            }
            return Ok(if acc.is_zero() { self.big_o(m) } else { x.truncate(m) });
        }
        let q = parse_rational(&t)?;
        Ok(self.from_rational(&q))
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Parse(format!("bad rational {s:?}"));
    match t.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.parse().map_err(|_| bad())?;
            let d: BigInt = d.parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(t.parse().map_err(|_| bad())?)),
    }
}

/// A p-adic number `unit * p^val + O(p^prec)`.
///
/// Exact zero has `val = prec = +inf`; an element with no known nonzero digit
/// is `O(p^prec)` and is distinct from exact zero.
#[derive(Clone, Debug)]
pub struct Padic {
    p: u64,
    cap: u32,
    val: i64,
    unit: BigUint,
    prec: i64,
}

impl Padic {
    pub fn context(&self) -> PadicContext {
        PadicContext { p: self.p, precision: self.cap }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn is_exact_zero(&self) -> bool {
        self.prec == EXACT
    }

    /// No digit is known to be nonzero: `O(p^m)`.
    pub fn is_indistinguishable_zero(&self) -> bool {
        self.prec != EXACT && self.unit.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.unit.is_zero()
    }

    /// Valuation of a certified nonzero element.
    pub fn valuation(&self) -> Option<i64> {
        if self.unit.is_zero() {
            None
        } else {
            Some(self.val)
        }
    }

    /// Lower bound for the valuation: exact for nonzero elements, the
    /// absolute precision for `O(p^m)`, `i64::MAX` for exact zero.
    pub fn valuation_bound(&self) -> i64 {
        self.val
    }

    pub fn abs_precision(&self) -> Option<i64> {
        if self.prec == EXACT {
            None
        } else {
            Some(self.prec)
        }
    }

    /// Absolute precision with exact zero reported as `i64::MAX`.
    pub fn precision_bound(&self) -> i64 {
        self.prec
    }

    pub fn rel_precision(&self) -> i64 {
        if self.unit.is_zero() {
            0
        } else {
            self.prec - self.val
        }
    }

    pub fn unit(&self) -> &BigUint {
        &self.unit
    }

    fn check(&self, o: &Padic) {
        assert!(
            self.p == o.p && self.cap == o.cap,
            "p-adic context mismatch: (p={}, N={}) vs (p={}, N={})",
            self.p,
            self.cap,
            o.p,
            o.cap
        );
    }

    fn ctx_check(&self, o: &Padic) -> Result<()> {
        if self.p == o.p && self.cap == o.cap {
            Ok(())
        } else {
            Err(Error::ContextMismatch(format!("p={} N={} vs p={} N={}", self.p, self.cap, o.p, o.cap)))
        }
    }

    pub fn checked_add(&self, o: &Padic) -> Result<Padic> {
        self.ctx_check(o)?;
        Ok(self.add_impl(o, false))
    }

    pub fn checked_mul(&self, o: &Padic) -> Result<Padic> {
        self.ctx_check(o)?;
        Ok(self.mul_impl(o))
    }

    /// Division; an `O(p^m)` divisor is a precision error, distinct from
    /// division by exact zero.
    pub fn checked_div(&self, o: &Padic) -> Result<Padic> {
        self.ctx_check(o)?;
        if o.is_exact_zero() {
            return Err(Error::DivisionByZero);
        }
        if o.unit.is_zero() {
            return Err(Error::Precision(format!("division by {o}")));
        }
        if self.is_exact_zero() {
            return Ok(self.clone());
        }
        let ctx = self.context();
        if self.unit.is_zero() {
            return Ok(ctx.big_o(self.prec - o.val));
        }
        let rel = self.rel_precision().min(o.rel_precision());
        let m = ppow(self.p, rel as u32);
        let inv = (&o.unit % &m).modinv(&m).expect("unit");
        let u = (&self.unit * inv) % &m;
        let v = self.val - o.val;
        Ok(Padic { p: self.p, cap: self.cap, val: v, unit: u, prec: v + rel })
    }

    pub fn inv(&self) -> Result<Padic> {
        self.context().one().checked_div(self)
    }

    fn add_impl(&self, o: &Padic, negate: bool) -> Padic {
        if o.is_exact_zero() {
            return self.clone();
        }
        if self.is_exact_zero() {
            return if negate { -o } else { o.clone() };
        }
        let prec = self.prec.min(o.prec);
        let vmin = self.val.min(o.val);
        let ctx = self.context();
        if vmin >= prec {
            return ctx.big_o(prec);
        }
        let n = (prec - vmin) as u32;
        let m = ppow(self.p, n);
        let lift = |x: &Padic| -> BigUint {
            if x.unit.is_zero() || x.val >= prec {
                BigUint::zero()
            } else {
                &x.unit * ppow(x.p, (x.val - vmin) as u32)
            }
        };
        let a = lift(self);
        let b = lift(o) % &m;
        let s = if negate { (a + &m - b) % &m } else { (a + b) % &m };
        if s.is_zero() {
            return ctx.big_o(prec);
        }
        let (dv, u) = split_p(&s, self.p);
        ctx.make_unit(vmin + dv, u, false, prec)
    }

    fn mul_impl(&self, o: &Padic) -> Padic {
        let ctx = self.context();
        if self.is_exact_zero() || o.is_exact_zero() {
            return ctx.zero();
        }
        if self.unit.is_zero() || o.unit.is_zero() {
            // O(p^m) * x lies in p^(m + v(x)); for two O-terms v(x) is their precision.
            return ctx.big_o(self.val.saturating_add(o.val));
        }
        let rel = self.rel_precision().min(o.rel_precision());
        let m = ppow(self.p, rel as u32);
        let u = (&self.unit * &o.unit) % &m;
        let v = self.val + o.val;
        Padic { p: self.p, cap: self.cap, val: v, unit: u, prec: v + rel }
    }

    pub fn pow(&self, mut e: u64) -> Padic {
        let mut base = self.clone();
        let mut acc = self.context().one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Multiply by p^k (k may be negative).
    pub fn shift(&self, k: i64) -> Padic {
        if self.is_exact_zero() {
            return self.clone();
        }
        let mut r = self.clone();
        r.val += k;
        r.prec += k;
        r
    }

    /// Multiply by an integer; division by it is `div_int`.
    pub fn mul_int(&self, n: i64) -> Padic {
        self * &self.context().from_int(n)
    }

    pub fn div_int(&self, n: i64) -> Padic {
        self.checked_div(&self.context().from_int(n)).expect("nonzero integer divisor")
    }

    /// Lower the absolute precision to at most `m`.
    pub fn truncate(&self, m: i64) -> Padic {
        if m >= self.prec {
            return self.clone();
        }
        let ctx = self.context();
        if self.unit.is_zero() || self.val >= m {
            return ctx.big_o(m);
        }
        ctx.make_unit(self.val, self.unit.clone(), false, m)
    }

    /// The same digits and precision in another context with the same p;
    /// relative digits beyond the new cap are dropped.
    pub fn in_context(&self, ctx: &PadicContext) -> Padic {
        assert_eq!(self.p, ctx.p, "in_context needs the same prime");
        if self.is_exact_zero() {
            ctx.zero()
        } else if self.unit.is_zero() {
            ctx.big_o(self.prec)
        } else {
            ctx.make_unit(self.val, self.unit.clone(), false, self.prec)
        }
    }

    /// Whether `self` and `o` agree to the smaller of their precisions.
    pub fn agrees_with(&self, o: &Padic) -> bool {
        (self - o).is_zero()
    }

    /// Number of digits to which `self` and `o` are certified to agree:
    /// the valuation of the difference, or its precision when it vanishes.
    pub fn agreement(&self, o: &Padic) -> i64 {
        (self - o).valuation_bound()
    }

    /// Equality that refuses to answer when the difference is only known
    /// to be `O(p^m)` with `m` below the requested precision.
    pub fn eq_mod(&self, o: &Padic, m: i64) -> Result<bool> {
        let d = self - o;
        if d.unit.is_zero() {
            if d.prec >= m {
                Ok(true)
            } else {
                Err(Error::Precision(format!("difference known only to O({}^{})", self.p, d.prec)))
            }
        } else {
            Ok(d.val >= m)
        }
    }

    /// Does the value agree with the rational `q` to the element's precision?
    pub fn matches_rational(&self, q: &BigRational) -> bool {
        self.agrees_with(&self.context().from_rational(q))
    }

    /// The rational number `s * p^v` for the stored representative.
    pub fn lift(&self) -> BigRational {
        if self.unit.is_zero() {
            return BigRational::zero();
        }
        let s = BigRational::from_integer(BigInt::from_biguint(Sign::Plus, self.unit.clone()));
        let pp = BigRational::from_integer(BigInt::from_biguint(Sign::Plus, ppow(self.p, self.val.unsigned_abs() as u32)));
        if self.val >= 0 {
            s * pp
        } else {
            s / pp
        }
    }

    /// Representative of an integral element in (-p^m/2, p^m/2].
    pub fn centered_lift(&self) -> Option<BigInt> {
        if self.unit.is_zero() {
            return Some(BigInt::zero());
        }
        if self.val < 0 || self.prec == EXACT {
            return None;
        }
        let m = BigInt::from_biguint(Sign::Plus, ppow(self.p, self.prec as u32));
        let s = BigInt::from_biguint(Sign::Plus, &self.unit * ppow(self.p, self.val as u32));
        if &s * 2 > m {
            Some(s - m)
        } else {
            Some(s)
        }
    }

    /// Digits d_k for k = valuation .. abs_precision - 1.
    pub fn digits(&self) -> Vec<(i64, u64)> {
        let mut out = Vec::new();
        if self.unit.is_zero() {
            return out;
        }
        let mut u = self.unit.clone();
        let pb = BigUint::from(self.p);
        for k in self.val..self.prec {
            let (q, r) = u.div_rem(&pb);
            let d = r.to_u64().unwrap();
            if d != 0 {
                out.push((k, d));
            }
            u = q;
        }
        out
    }

    /// Power-series notation, e.g. `2*3^-1 + 1 + 2*3 + O(3^7)`.
    pub fn to_series_string(&self) -> String {
        let p = self.p;
        if self.is_exact_zero() {
            return "0".into();
        }
        let mut terms: Vec<String> = self
            .digits()
            .into_iter()
            .map(|(k, d)| match (k, d) {
                (0, d) => format!("{d}"),
                (1, 1) => format!("{p}"),
                (1, d) => format!("{d}*{p}"),
                (k, 1) => format!("{p}^{k}"),
                (k, d) => format!("{d}*{p}^{k}"),
            })
            .collect();
        terms.push(format!("O({p}^{})", self.prec));
        terms.join(" + ")
    }

    pub fn to_json(&self) -> PadicJson {
        let zero = self.unit.is_zero();
        PadicJson {
            p: self.p,
            valuation: if self.is_exact_zero() { None } else { Some(self.val) },
            unit: if zero { "0".into() } else { self.unit.to_string() },
            abs_precision: self.abs_precision(),
        }
    }

    pub fn from_json(ctx: &PadicContext, j: &PadicJson) -> Result<Padic> {
        if j.p != ctx.p {
            return Err(Error::ContextMismatch(format!("p={} in JSON, p={} in context", j.p, ctx.p)));
        }
        match (j.valuation, j.abs_precision) {
            (None, None) => Ok(ctx.zero()),
            (Some(_), Some(m)) if j.unit == "0" => Ok(ctx.big_o(m)),
            (Some(v), Some(m)) => ctx.parse(&format!("{}*{}^{} + O({}^{})", j.unit, ctx.p, v, ctx.p, m)),
            _ => Err(Error::Parse("inconsistent p-adic JSON".into())),
        }
    }

    /// Square root whose unit part is congruent to `residue` mod p.
    pub fn sqrt(&self, residue: u64) -> Result<Padic> {
        let ctx = self.context();
        if self.is_exact_zero() {
            return Ok(self.clone());
        }
        if self.unit.is_zero() {
            return Ok(ctx.big_o(self.prec.div_euclid(2) + self.prec.rem_euclid(2)));
        }
        if self.val.rem_euclid(2) != 0 {
            return Err(Error::OddValuation(self.val));
        }
        let p = self.p;
        let r0 = residue % p;
        let u0 = (&self.unit % p).to_u64().unwrap();
        if (r0 as u128 * r0 as u128 % p as u128) as u64 != u0 {
            return Err(Error::NonResidue(format!("{u0} (requested root {r0})")));
        }
        let rel = self.rel_precision() as u32;
        let m = ppow(p, rel);
        let inv2 = BigUint::from(2u32).modinv(&m).unwrap();
        let mut r = BigUint::from(r0);
        let mut k = 1u32;
        while k < rel {
            k = (2 * k).min(rel);
            let rinv = r.modinv(&m).unwrap();
            r = ((&r + &self.unit * rinv) * &inv2) % &m;
        }
        Ok(ctx.make_unit(self.val / 2, r, false, self.val / 2 + rel as i64))
    }

    /// The (p-1)-th root of unity congruent to `self` mod p.
    pub fn teichmuller(&self) -> Result<Padic> {
        match self.valuation() {
            Some(0) => {}
            Some(v) => return Err(Error::NonzeroValuation(v)),
            None => return Err(Error::Precision("Teichmuller lift of zero".into())),
        }
        let m = ppow(self.p, self.cap);
        let pb = BigUint::from(self.p);
        let mut x = &self.unit % self.p;
        loop {
            let y = x.modpow(&pb, &m);
            if y == x {
                break;
            }
            x = y;
        }
        Ok(self.context().make_unit(0, x, false, EXACT))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PadicJson {
    pub p: u64,
    pub valuation: Option<i64>,
    pub unit: String,
    pub abs_precision: Option<i64>,
}

impl fmt::Display for Padic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_exact_zero() {
            write!(f, "0")
        } else if self.unit.is_zero() {
            write!(f, "O({}^{})", self.p, self.prec)
        } else {
            write!(f, "{}*{}^{} + O({}^{})", self.unit, self.p, self.val, self.p, self.prec)
        }
    }
}

impl<'a> Add<&'a Padic> for &'a Padic {
    type Output = Padic;
    fn add(self, o: &Padic) -> Padic {
        self.check(o);
        self.add_impl(o, false)
    }
}

impl<'a> Sub<&'a Padic> for &'a Padic {
    type Output = Padic;
    fn sub(self, o: &Padic) -> Padic {
        self.check(o);
        self.add_impl(o, true)
    }
}

impl<'a> Mul<&'a Padic> for &'a Padic {
    type Output = Padic;
    fn mul(self, o: &Padic) -> Padic {
        self.check(o);
        self.mul_impl(o)
    }
}

impl<'a> Div<&'a Padic> for &'a Padic {
    type Output = Padic;
    fn div(self, o: &Padic) -> Padic {
        self.checked_div(o).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Neg for &Padic {
    type Output = Padic;
    fn neg(self) -> Padic {
        if self.unit.is_zero() {
            return self.clone();
        }
        let m = ppow(self.p, self.rel_precision() as u32);
        Padic { unit: &m - &self.unit, ..self.clone() }
    }
}

impl Neg for Padic {
    type Output = Padic;
    fn neg(self) -> Padic {
        -&self
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<Padic> for Padic {
            type Output = Padic;
            fn $m(self, o: Padic) -> Padic { (&self).$m(&o) }
        }
        impl<'a> $tr<&'a Padic> for Padic {
            type Output = Padic;
            fn $m(self, o: &Padic) -> Padic { (&self).$m(o) }
        }
        impl<'a> $tr<Padic> for &'a Padic {
            type Output = Padic;
            fn $m(self, o: Padic) -> Padic { self.$m(&o) }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul, Div div);

/// Dense matrix over Q_p, row-major.
#[derive(Clone, Debug)]
pub struct PadicMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Padic>,
}

impl PadicMatrix {
    pub fn zeros(ctx: &PadicContext, rows: usize, cols: usize) -> Self {
        PadicMatrix { rows, cols, data: vec![ctx.zero(); rows * cols] }
    }

    pub fn identity(ctx: &PadicContext, n: usize) -> Self {
        let mut m = Self::zeros(ctx, n, n);
        for i in 0..n {
            m.set(i, i, ctx.one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Padic>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged matrix");
        PadicMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn column(v: Vec<Padic>) -> Self {
        PadicMatrix { rows: v.len(), cols: 1, data: v }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Padic {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: Padic) {
        self.data[i * self.cols + j] = x;
    }

    pub fn col(&self, j: usize) -> Vec<Padic> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn map(&self, f: impl Fn(&Padic) -> Padic) -> Self {
        PadicMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn to_rows(&self) -> Vec<Vec<Padic>> {
        self.data.chunks(self.cols.max(1)).map(|r| r.to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j).clone());
            }
        }
        PadicMatrix { rows: self.cols, cols: self.rows, data }
    }

    pub fn mul(&self, o: &PadicMatrix) -> Self {
        assert_eq!(self.cols, o.rows, "dimension mismatch");
        let ctx = self.data[0].context();
        let mut out = Self::zeros(&ctx, self.rows, o.cols);
        for i in 0..self.rows {
            for j in 0..o.cols {
                let mut acc = ctx.zero();
                for k in 0..self.cols {
                    acc = &acc + &(self.get(i, k) * o.get(k, j));
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn sub(&self, o: &PadicMatrix) -> Self {
        assert!(self.rows == o.rows && self.cols == o.cols, "dimension mismatch");
        let data = self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect();
        PadicMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn submatrix(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Self {
        let data = rows.clone().flat_map(|i| cols.clone().map(move |j| (i, j))).map(|(i, j)| self.get(i, j).clone()).collect();
        PadicMatrix { rows: rows.len(), cols: cols.len(), data }
    }

    pub fn trace(&self) -> Padic {
        let ctx = self.data[0].context();
        (0..self.rows.min(self.cols)).fold(ctx.zero(), |acc, i| &acc + self.get(i, i))
    }

    /// Smallest absolute precision among the entries.
    pub fn min_precision(&self) -> i64 {
        self.data.iter().map(|x| x.precision_bound()).min().unwrap_or(EXACT)
    }

    /// Gaussian elimination; the pivot in each column is an entry of least
    /// valuation.
    fn eliminate(&self, rhs: Option<&PadicMatrix>) -> Result<(Vec<Vec<Padic>>, bool)> {
        assert_eq!(self.rows, self.cols, "square matrix required");
        let n = self.rows;
        let extra = rhs.map_or(0, |r| {
            assert_eq!(r.rows, n, "dimension mismatch");
            r.cols
        });
        let mut a: Vec<Vec<Padic>> = (0..n)
            .map(|i| {
                let mut row: Vec<Padic> = (0..n).map(|j| self.get(i, j).clone()).collect();
                if let Some(r) = rhs {
                    row.extend((0..extra).map(|j| r.get(i, j).clone()));
                }
                row
            })
            .collect();
        let mut swapped = false;
        for c in 0..n {
            let piv = (c..n)
                .filter(|&r| !a[r][c].is_zero())
                .min_by_key(|&r| a[r][c].valuation_bound())
                .ok_or(Error::Singular)?;
            if piv != c {
                a.swap(piv, c);
                swapped = !swapped;
            }
            let inv = a[c][c].inv()?;
            for r in (c + 1)..n {
                if a[r][c].is_exact_zero() {
                    continue;
                }
                let f = &a[r][c] * &inv;
                for k in c..(n + extra) {
                    let t = &f * &a[c][k];
                    a[r][k] = &a[r][k] - &t;
                }
            }
        }
        Ok((a, swapped))
    }

    /// Solve `self * x = rhs`; precision losses from pivots are tracked.
    pub fn solve(&self, rhs: &PadicMatrix) -> Result<PadicMatrix> {
        let n = self.rows;
        let (a, _) = self.eliminate(Some(rhs))?;
        let ctx = self.data[0].context();
        let mut x = Self::zeros(&ctx, n, rhs.cols);
        for j in 0..rhs.cols {
            for i in (0..n).rev() {
                let mut s = a[i][n + j].clone();
                for k in (i + 1)..n {
                    s = &s - &(&a[i][k] * x.get(k, j));
                }
                x.set(i, j, s.checked_div(&a[i][i])?);
            }
        }
        Ok(x)
    }

    pub fn det(&self) -> Result<Padic> {
        let ctx = self.data[0].context();
        match self.eliminate(None) {
            Ok((a, swapped)) => {
                let d = (0..self.rows).fold(ctx.one(), |acc, i| &acc * &a[i][i]);
                Ok(if swapped { -d } else { d })
            }
            Err(Error::Singular) => {
                // Some column is zero at working precision; the determinant is O(...).
                Err(Error::Precision("determinant indistinguishable from zero".into()))
            }
            Err(e) => Err(e),
        }
    }

    /// Characteristic polynomial det(T - A), coefficients low degree first
    /// (Faddeev-LeVerrier).
    pub fn charpoly(&self) -> Vec<Padic> {
        let n = self.rows;
        let ctx = self.data[0].context();
        let mut c = vec![ctx.zero(); n + 1];
        c[n] = ctx.one();
        let id = Self::identity(&ctx, n);
        let mut mk = Self::zeros(&ctx, n, n);
        for k in 1..=n {
            let mut next = self.mul(&mk);
            for i in 0..n {
                let d = next.get(i, i) + &c[n + 1 - k];
                next.set(i, i, d);
            }
            mk = next;
            let tr = self.mul(&mk).trace();
            c[n - k] = (-tr).div_int(k as i64);
        }
        let _ = id;
        c
    }
}

pub fn solve_linear(a: &PadicMatrix, rhs: &PadicMatrix) -> Result<PadicMatrix> {
    a.solve(rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx(p: u64, n: u32) -> PadicContext {
        PadicContext::new(p, n).unwrap()
    }

    #[test]
    fn context_rejects_even_and_composite() {
        assert!(PadicContext::new(2, 5).is_err());
        assert!(PadicContext::new(9, 5).is_err());
        assert!(PadicContext::new(3, 0).is_err());
    }

    #[test]
    fn add_examples() {
        let c = ctx(3, 5);
        let a = c.from_int(1).truncate(5);
        let b = c.from_int(2).truncate(5);
        let s = &a + &b;
        assert_eq!(s.valuation(), Some(1));
        assert_eq!(s.abs_precision(), Some(5));
        assert!(s.matches_rational(&BigRational::from_integer(3.into())));
        let z = &a + &c.zero();
        assert_eq!(z.to_string(), a.to_string());

        let a = c.from_ratio(2, 3).truncate(3);
        let b = c.from_ratio(1, 3).truncate(3);
        let s = &a + &b;
        assert_eq!(s.to_string(), "1*3^0 + O(3^3)");
    }

    #[test]
    fn mul_div_examples() {
        let c = ctx(3, 10);
        let three = c.from_int(3).truncate(6);
        let sq = &three * &three;
        assert_eq!(sq.to_string(), "1*3^2 + O(3^7)");

        let c4 = ctx(3, 4);
        let g = &c4.one() / &c4.from_int(-2);
        assert_eq!(g.to_string(), "40*3^0 + O(3^4)");

        let a = c.from_ratio(7, 9);
        let q = &a / &a;
        assert_eq!(q.to_string(), "1*3^0 + O(3^10)");
    }

    #[test]
    fn context_change_keeps_digits() {
        let a = PadicContext::new(5, 10).unwrap();
        let b = PadicContext::new(5, 30).unwrap();
        let x = a.from_ratio(3, 7).shift(-2);
        let y = x.in_context(&b);
        assert_eq!(y.precision_bound(), x.precision_bound());
        assert_eq!(y.to_string(), x.to_string());
        assert!(b.from_ratio(3, 7).shift(-2).agrees_with(&y));
        assert!(a.big_o(4).in_context(&b).is_indistinguishable_zero());
        assert!(a.zero().in_context(&b).is_exact_zero());
    }

    #[test]
    fn zero_states_differ() {
        let c = ctx(5, 6);
        assert!(matches!(c.one().checked_div(&c.zero()), Err(Error::DivisionByZero)));
        assert!(matches!(c.one().checked_div(&c.big_o(3)), Err(Error::Precision(_))));
        let x = &c.from_int(5) - &c.from_int(5).truncate(4);
        assert!(x.is_indistinguishable_zero());
        assert!(x.eq_mod(&c.zero(), 6).is_err());
        assert!(x.eq_mod(&c.zero(), 4).unwrap());
    }

    #[test]
    fn big_o_times_element() {
        let c = ctx(3, 8);
        let x = &c.big_o(4) * &c.from_int(9);
        assert_eq!(x.to_string(), "O(3^6)");
    }

    #[test]
    fn sqrt_examples() {
        let c = ctx(3, 7);
        assert_eq!(c.one().sqrt(1).unwrap().to_string(), "1*3^0 + O(3^7)");
        assert_eq!(c.from_int(4).sqrt(2).unwrap().to_string(), "2*3^0 + O(3^7)");
        let c6 = ctx(3, 6);
        let r = c6.from_int(7).sqrt(1).unwrap();
        let brute = (0..729u64).filter(|r| r % 3 == 1 && (r * r) % 729 == 7).collect::<Vec<_>>();
        assert_eq!(brute.len(), 1);
        assert_eq!(r.unit().to_u64(), Some(brute[0]));
        assert!(matches!(c.from_int(2).sqrt(1), Err(Error::NonResidue(_))));
        assert!(matches!(c.from_int(3).sqrt(1), Err(Error::OddValuation(1))));
        assert_eq!(c.from_int(36).sqrt(2).unwrap().to_string(), "2*3^1 + O(3^8)");
    }

    #[test]
    fn teichmuller_examples() {
        let c = ctx(3, 5);
        assert_eq!(c.one().teichmuller().unwrap().to_string(), "1*3^0 + O(3^5)");
        let t = c.from_int(2).teichmuller().unwrap();
        assert!(t.agrees_with(&c.from_int(-1)));
        let c7 = ctx(7, 12);
        let t = c7.from_int(3).teichmuller().unwrap();
        assert!(t.pow(6).agrees_with(&c7.one()));
        assert!(matches!(c.from_int(3).teichmuller(), Err(Error::NonzeroValuation(1))));
    }

    #[test]
    fn string_and_json_round_trip() {
        let c = ctx(3, 9);
        for x in [c.from_ratio(-5, 27), c.zero(), c.big_o(4), c.from_int(81).truncate(7)] {
            let s = x.to_string();
            assert_eq!(c.parse(&s).unwrap().to_string(), s);
            let j = serde_json::to_string(&x.to_json()).unwrap();
            let back: PadicJson = serde_json::from_str(&j).unwrap();
            assert_eq!(Padic::from_json(&c, &back).unwrap().to_string(), s);
        }
    }

    #[test]
    fn series_notation() {
        let c = ctx(3, 8);
        let x = c.from_ratio(5, 3).truncate(3);
        assert_eq!(x.to_series_string(), "2*3^-1 + 1 + O(3^3)");
    }

    #[test]
    fn solve_diag_loses_digit() {
        let c = ctx(3, 10);
        let a = PadicMatrix::from_rows(vec![vec![c.from_int(3), c.zero()], vec![c.zero(), c.one()]]);
        let rhs = PadicMatrix::column(vec![c.from_int(3).truncate(10), c.one().truncate(10)]);
        let x = a.solve(&rhs).unwrap();
        assert_eq!(x.get(0, 0).to_string(), "1*3^0 + O(3^9)");
        assert_eq!(x.get(1, 0).to_string(), "1*3^0 + O(3^10)");
        let id = PadicMatrix::identity(&c, 2);
        assert_eq!(id.solve(&rhs).unwrap().get(0, 0).to_string(), rhs.get(0, 0).to_string());
    }

    #[test]
    fn singular_is_reported() {
        let c = ctx(5, 6);
        let a = PadicMatrix::from_rows(vec![vec![c.one(), c.from_int(2)], vec![c.from_int(2), c.from_int(4)]]);
        assert!(matches!(a.solve(&PadicMatrix::column(vec![c.one(), c.one()])), Err(Error::Singular)));
    }

    #[test]
    fn charpoly_of_companion() {
        let c = ctx(5, 10);
        // companion matrix of T^2 - 3T + 2
        let a = PadicMatrix::from_rows(vec![vec![c.zero(), c.from_int(-2)], vec![c.one(), c.from_int(3)]]);
        let cp = a.charpoly();
        assert!(cp[0].matches_rational(&BigRational::from_integer(2.into())));
        assert!(cp[1].matches_rational(&BigRational::from_integer((-3).into())));
        assert!(a.det().unwrap().matches_rational(&BigRational::from_integer(2.into())));
    }

    fn rat() -> impl Strategy<Value = BigRational> {
        (-10_000i64..10_000, 1i64..2000).prop_map(|(n, d)| BigRational::new(n.into(), d.into()))
    }

    proptest! {
        #[test]
        fn field_ops_match_rationals(a in rat(), b in rat(), p in prop::sample::select(vec![3u64, 5, 7, 11])) {
            let c = ctx(p, 12);
            let (x, y) = (c.from_rational(&a), c.from_rational(&b));
            prop_assert!((&x + &y).matches_rational(&(&a + &b)));
            prop_assert!((&x - &y).matches_rational(&(&a - &b)));
            prop_assert!((&x * &y).matches_rational(&(&a * &b)));
            if !b.is_zero() {
                prop_assert!((&x / &y).matches_rational(&(&a / &b)));
            }
        }

        #[test]
        fn sqrt_squares_back(n in 1i64..100_000, p in prop::sample::select(vec![3u64, 5, 7, 13])) {
            let c = ctx(p, 15);
            let x = c.from_int(n);
            let sq = &x * &x;
            let r0 = (&x.unit % p).to_u64().unwrap();
            let r = sq.sqrt(r0).unwrap();
            prop_assert!((&r * &r).agrees_with(&sq));
            prop_assert!(r.agrees_with(&x));
        }

        #[test]
        fn teichmuller_is_root_of_unity(n in 1i64..1000, p in prop::sample::select(vec![3u64, 5, 7, 11])) {
            prop_assume!(n % p as i64 != 0);
            let c = ctx(p, 20);
            let t = c.from_int(n).teichmuller().unwrap();
            let one = t.pow(p - 1);
            prop_assert_eq!(one.to_string(), c.one().to_string());
            prop_assert!((&t - &c.from_int(n)).valuation_bound() >= 1);
        }

        #[test]
        fn solve_round_trip(entries in prop::collection::vec(-50i64..50, 16), b in prop::collection::vec(-50i64..50, 4)) {
            let c = ctx(5, 20);
            let rows: Vec<Vec<Padic>> = entries.chunks(4).map(|r| r.iter().map(|&v| c.from_int(v)).collect()).collect();
            let a = PadicMatrix::from_rows(rows);
            let d = a.det();
            prop_assume!(matches!(d.as_ref().map(|d| d.valuation()), Ok(Some(0))));
            let rhs = PadicMatrix::column(b.iter().map(|&v| c.from_int(v)).collect());
            let x = a.solve(&rhs).unwrap();
            let back = a.mul(&x);
            for i in 0..4 {
                prop_assert!(back.get(i, 0).agrees_with(rhs.get(i, 0)));
                prop_assert!(x.get(i, 0).precision_bound() >= 18);
            }
        }
    }
}
