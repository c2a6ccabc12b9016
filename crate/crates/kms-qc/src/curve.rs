//! Even-degree hyperelliptic curves y^2 = f(x), their points, residue disks
//! and local coordinates.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{parse_rational, Padic, PadicContext};
use crate::poly::Poly;
use crate::ring::Coeff;
use crate::series::Series;

// ---------- arithmetic in F_p ----------

pub(crate) fn fp_pow(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u128;
    let mut b128 = (b % p) as u128;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b128 % p as u128;
        }
        b128 = b128 * b128 % p as u128;
        e >>= 1;
    }
    b = r as u64;
    b
}

/// Legendre symbol of `a` mod `p` as 0, 1 or -1.
pub fn legendre(a: u64, p: u64) -> i32 {
    let a = a % p;
    if a == 0 {
        0
    } else if fp_pow(a, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

/// A square root of a quadratic residue mod p (Tonelli-Shanks), the
/// smaller of the two representatives.
pub fn fp_sqrt(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if legendre(a, p) != 1 {
        return None;
    }
    let mul = |x: u64, y: u64| ((x as u128 * y as u128) % p as u128) as u64;
    let (mut q, mut s) = (p - 1, 0u32);
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let z = (2..p).find(|&z| legendre(z, p) == -1).unwrap();
    let (mut m, mut c, mut t, mut r) = (s, fp_pow(z, q, p), fp_pow(a, q, p), fp_pow(a, q.div_ceil(2), p));
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = mul(tt, tt);
            i += 1;
        }
        let b = fp_pow(c, 1 << (m - i - 1), p);
        m = i;
        c = mul(b, b);
        t = mul(t, c);
        r = mul(r, b);
    }
    Some(r.min(p - r))
}

fn rational_mod_p(q: &BigRational, p: u64) -> Option<u64> {
    let pb = BigInt::from(p);
    let d = q.denom().mod_floor(&pb);
    if d.is_zero() {
        return None;
    }
    let n = q.numer().mod_floor(&pb).to_u64().unwrap();
    let d = d.to_u64().unwrap();
    Some(((n as u128 * fp_pow(d, p - 2, p) as u128) % p as u128) as u64)
}

fn fp_poly_eval(f: &[u64], x: u64, p: u64) -> u64 {
    f.iter().rev().fold(0u64, |acc, &c| ((acc as u128 * x as u128 + c as u128) % p as u128) as u64)
}

/// gcd over F_p, coefficient lists low degree first.
fn fp_poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let trim = |mut v: Vec<u64>| {
        while v.last() == Some(&0) {
            v.pop();
        }
        v
    };
    let (mut a, mut b) = (trim(a.to_vec()), trim(b.to_vec()));
    while !b.is_empty() {
        let inv = fp_pow(*b.last().unwrap(), p - 2, p);
        while a.len() >= b.len() {
            let c = ((*a.last().unwrap() as u128 * inv as u128) % p as u128) as u64;
            let shift = a.len() - b.len();
            for (i, &bi) in b.iter().enumerate() {
                let sub = ((c as u128 * bi as u128) % p as u128) as u64;
                a[shift + i] = (a[shift + i] + p - sub) % p;
            }
            a = trim(a);
            if a.is_empty() {
                break;
            }
        }
        std::mem::swap(&mut a, &mut b);
    }
    a
}

// ---------- quadratic field coordinates ----------

/// a + b*sqrt(d) with rational a, b.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadraticNumber {
    pub a: BigRational,
    pub b: BigRational,
    pub d: i64,
}

impl QuadraticNumber {
    pub fn rational(a: BigRational) -> Self {
        QuadraticNumber { a, b: BigRational::zero(), d: 1 }
    }

    /// Parses sums of terms `q`, `q*sqrt(d)`, `sqrt(d)*q` or `sqrt(d)`.
    pub fn parse(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::Parse(format!("bad coordinate {s:?}"));
        if t.is_empty() {
            return Err(bad());
        }
        let mut terms = Vec::new();
        let mut cur = String::new();
        for (i, ch) in t.chars().enumerate() {
            if (ch == '+' || ch == '-') && i > 0 && !cur.ends_with('(') {
                terms.push(std::mem::take(&mut cur));
            }
            cur.push(ch);
        }
        terms.push(cur);
        let mut out = QuadraticNumber { a: BigRational::zero(), b: BigRational::zero(), d: 1 };
        for term in terms {
            let (neg, body) = match term.strip_prefix('-') {
                Some(r) => (true, r.to_string()),
                None => (false, term.trim_start_matches('+').to_string()),
            };
            let mut coef = BigRational::one();
            let mut surd = None;
            for factor in body.split('*') {
                if let Some(r) = factor.strip_prefix("sqrt(").and_then(|r| r.strip_suffix(')')) {
                    surd = Some(r.parse::<i64>().map_err(|_| bad())?);
                } else {
                    coef *= parse_rational(factor)?;
                }
            }
            if neg {
                coef = -coef;
            }
            match surd {
                None => out.a += coef,
                Some(d) => {
                    if out.d != 1 && out.d != d {
                        return Err(Error::Parse(format!("two different surds in {s:?}")));
                    }
                    out.d = d;
                    out.b += coef;
                }
            }
        }
        Ok(out)
    }

    /// Image in Q_p given sqrt(d) as a p-adic number.
    pub fn embed(&self, ctx: &PadicContext, root: Option<&Padic>) -> Result<Padic> {
        let a = ctx.from_rational(&self.a);
        if self.b.is_zero() {
            return Ok(a);
        }
        let r = root.ok_or_else(|| Error::Invalid(format!("no embedding given for sqrt({})", self.d)))?;
        Ok(&a + &(&ctx.from_rational(&self.b) * r))
    }
}

impl fmt::Display for QuadraticNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", self.a)
        } else {
            write!(f, "{} + {}*sqrt({})", self.a, self.b, self.d)
        }
    }
}

/// Embedding of Q(sqrt(d)) into Q_p fixed by the residue of sqrt(d) mod p.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SqrtEmbedding {
    pub d: i64,
    pub residue: u64,
}

impl SqrtEmbedding {
    pub fn root(&self, ctx: &PadicContext) -> Result<Padic> {
        ctx.from_int(self.d).sqrt(self.residue)
    }
}

// ---------- curve ----------

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HyperellipticCurve {
    f: Vec<BigRational>,
    genus: usize,
    kms: Option<BigRational>,
}

impl fmt::Display for HyperellipticCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(a) = &self.kms {
            return write!(f, "y^2 = x^6 + {a}*x^4 + {a}*x^2 + 1");
        }
        let mut terms = Vec::new();
        for (i, c) in self.f.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            terms.push(match i {
                0 => format!("{c}"),
                1 => format!("{c}*x"),
                _ if c.is_one() => format!("x^{i}"),
                _ => format!("{c}*x^{i}"),
            });
        }
        write!(f, "y^2 = {}", terms.join(" + "))
    }
}

impl HyperellipticCurve {
    /// y^2 = f(x) with f monic of degree 2g+2 >= 4 and squarefree.
    pub fn new(f: Vec<BigRational>) -> Result<Self> {
        let fq = Poly::new(f, BigRational::zero());
        let deg = fq.degree().unwrap_or(0);
        if deg < 4 || deg % 2 != 0 {
            return Err(Error::Invalid(format!("f must have even degree at least 4, got {deg}")));
        }
        if !fq.coeff(deg).is_one() {
            return Err(Error::Invalid("f must be monic".into()));
        }
        if crate::poly::xgcd(&fq, &fq.deriv()).is_err() {
            return Err(Error::Invalid("f is not squarefree".into()));
        }
        Ok(HyperellipticCurve { f: fq.coeffs().to_vec(), genus: deg / 2 - 1, kms: None })
    }

    /// The genus-2 curve y^2 = x^6 + a x^4 + a x^2 + 1.
    pub fn kms(a: BigRational) -> Result<Self> {
        let z = BigRational::zero;
        let one = BigRational::one;
        let mut c = Self::new(vec![one(), z(), a.clone(), z(), a.clone(), z(), one()])?;
        c.kms = Some(a);
        Ok(c)
    }

    pub fn kms_int(a: i64) -> Result<Self> {
        Self::kms(BigRational::from_integer(a.into()))
    }

    pub fn kms_parameter(&self) -> Option<&BigRational> {
        self.kms.as_ref()
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn f_coefficients(&self) -> &[BigRational] {
        &self.f
    }

    pub fn f_rational(&self) -> Poly<BigRational> {
        Poly::new(self.f.clone(), BigRational::zero())
    }

    pub fn f_padic(&self, ctx: &PadicContext) -> Poly<Padic> {
        self.f_rational().map(&ctx.zero(), |c| ctx.from_rational(c))
    }

    fn f_mod_p(&self, p: u64) -> Option<Vec<u64>> {
        self.f.iter().map(|c| rational_mod_p(c, p)).collect()
    }

    /// p-integral coefficients and f mod p squarefree of full degree.
    pub fn check_good_reduction(&self, p: u64) -> Result<()> {
        if p == 2 {
            return Err(Error::BadReduction(p));
        }
        let fb = self.f_mod_p(p).ok_or(Error::BadReduction(p))?;
        let d: Vec<u64> = fb.iter().enumerate().skip(1).map(|(i, &c)| ((i as u128 * c as u128) % p as u128) as u64).collect();
        let g = fp_poly_gcd(&fb, &d, p);
        if g.len() != 1 {
            return Err(Error::BadReduction(p));
        }
        Ok(())
    }

    /// #X(F_p) for the smooth model, including the two points at infinity.
    pub fn count_points(&self, p: u64) -> Result<u64> {
        self.check_good_reduction(p)?;
        let fb = self.f_mod_p(p).unwrap();
        let affine: u64 = (0..p).map(|x| (1 + legendre(fp_poly_eval(&fb, x, p), p)) as u64).sum();
        Ok(affine + 2)
    }

    /// Residue disks ordered by x mod p, then y mod p, then infinity + and -.
    pub fn enumerate_disks(&self, p: u64) -> Result<Vec<ResidueDisk>> {
        self.check_good_reduction(p)?;
        let fb = self.f_mod_p(p).unwrap();
        let mut out = Vec::new();
        for x in 0..p {
            let v = fp_poly_eval(&fb, x, p);
            if v == 0 {
                out.push(ResidueDisk { kind: DiskKind::Weierstrass, x, y: 0, p });
            } else if let Some(r) = fp_sqrt(v, p) {
                out.push(ResidueDisk { kind: DiskKind::Affine, x, y: r, p });
                out.push(ResidueDisk { kind: DiskKind::Affine, x, y: p - r, p });
            }
        }
        out.push(ResidueDisk { kind: DiskKind::Infinite, x: 0, y: 1, p });
        out.push(ResidueDisk { kind: DiskKind::Infinite, x: 0, y: p - 1, p });
        Ok(out)
    }

    pub fn is_on_curve(&self, pt: &RationalPoint) -> bool {
        match pt {
            RationalPoint::Affine { x, y } => self.f_rational().eval(x) == y * y,
            _ => true,
        }
    }

    /// Residual of y^2 - f(x) for a p-adic point (zero to its precision if on the curve).
    pub fn equation_residual(&self, pt: &CurvePoint) -> Option<Padic> {
        match pt {
            CurvePoint::Affine { x, y } => Some(y * y - self.f_padic(&x.context()).eval(x)),
            _ => None,
        }
    }

    /// The disk containing a p-adic point.
    pub fn reduce_mod_p(&self, pt: &CurvePoint) -> Result<ResidueDisk> {
        let (x, y) = match pt {
            CurvePoint::Infinity(s) => {
                let p = s.p;
                let y = if s.sign > 0 { 1 } else { p - 1 };
                return Ok(ResidueDisk { kind: DiskKind::Infinite, x: 0, y, p });
            }
            CurvePoint::Affine { x, y } => (x, y),
        };
        let p = x.p();
        if x.valuation_bound() < 0 {
            // y / x^(g+1) tends to +-1
            let r = y / &x.pow(self.genus as u64 + 1);
            let rb = residue_of(&r)?;
            let sign = if rb == 1 {
                1
            } else if rb == p - 1 {
                p - 1
            } else {
                return Err(Error::Invalid("point is not on the curve near infinity".into()));
            };
            return Ok(ResidueDisk { kind: DiskKind::Infinite, x: 0, y: sign, p });
        }
        if y.valuation_bound() < 0 {
            return Err(Error::Invalid("affine point with non-integral y".into()));
        }
        let (xb, yb) = (residue_of(x)?, residue_of(y)?);
        let kind = if yb == 0 { DiskKind::Weierstrass } else { DiskKind::Affine };
        Ok(ResidueDisk { kind, x: xb, y: yb, p })
    }

    /// Frobenius-fixed representative of an affine or infinite disk.
    pub fn disk_center(&self, ctx: &PadicContext, disk: &ResidueDisk) -> Result<CurvePoint> {
        match disk.kind {
            DiskKind::Infinite => Ok(CurvePoint::Infinity(InfinitySign::new(ctx.p(), disk.infinity_sign()))),
            DiskKind::Affine => {
                let x0 = if disk.x == 0 { ctx.zero() } else { ctx.from_int(disk.x as i64).teichmuller()? };
                let y0 = self.f_padic(ctx).eval(&x0).sqrt(disk.y)?;
                Ok(CurvePoint::Affine { x: x0, y: y0 })
            }
            DiskKind::Weierstrass => {
                let f = self.f_padic(ctx);
                let fp = f.deriv();
                let mut x = ctx.from_int(disk.x as i64);
                for _ in 0..=(64 - (ctx.precision() as u64).leading_zeros()) {
                    x = &x - &(&f.eval(&x) / &fp.eval(&x));
                }
                Ok(CurvePoint::Affine { x, y: ctx.zero() })
            }
        }
    }

    /// (x(t), y(t)) about an affine point with t = x - x0.
    pub fn affine_expansion<C: Coeff>(&self, f: &Poly<C>, x0: &C, y0: &C, order: i64) -> Result<(Series<C>, Series<C>)> {
        let z = x0.zero_like();
        let xs = Series::new(0, vec![x0.clone(), z.one_like()], order, &z);
        let fx = Series::from_poly(&shift_poly(f, x0), order);
        let ys = fx.sqrt(y0)?;
        Ok((xs, ys))
    }

    /// (x(u), y(u)) at infinity with u = 1/x and y ~ sign * u^-(g+1).
    pub fn infinity_expansion<C: Coeff>(&self, f: &Poly<C>, sign: i64, order: i64) -> Result<(Series<C>, Series<C>)> {
        let z = f.zero_elem().clone();
        let g1 = self.genus as i64 + 1;
        let rev: Vec<C> = (0..=2 * g1 as usize).map(|i| f.coeff(2 * g1 as usize - i)).collect();
        // s(u)^2 = u^(2g+2) f(1/u); y = sign * u^-(g+1) s(u)
        let s = Series::new(0, rev, order + g1, &z).sqrt(&z.one_like())?;
        let ys = s.shift(-g1).scale(&z.from_i64_like(sign));
        let xs = Series::monomial(z.one_like(), -1, i64::MAX / 4);
        Ok((xs, ys))
    }

    /// (x(t), y(t)) at a Weierstrass point (x0, 0) with t = y.
    pub fn weierstrass_expansion<C: Coeff>(&self, f: &Poly<C>, x0: &C, order: i64) -> Result<(Series<C>, Series<C>)> {
        let z = x0.zero_like();
        let t = Series::monomial(z.one_like(), 1, order);
        let t2 = t.mul(&t);
        let fp = f.deriv();
        let mut xs = Series::constant(x0.clone(), order);
        // Newton: x <- x - (f(x) - t^2) / f'(x); the error in t-adic valuation doubles.
        let mut prec = 1;
        while prec < 2 * order {
            let fx = eval_poly_series(f, &xs);
            let dx = eval_poly_series(&fp, &xs);
            let step = fx.sub(&t2).mul(&dx.inverse()?);
            xs = xs.sub(&step).truncate(order);
            prec *= 2;
        }
        Ok((xs, t))
    }

    /// Local expansion at a disk's center (or at infinity) over Q_p.
    pub fn local_expansion(&self, ctx: &PadicContext, disk: &ResidueDisk, order: i64) -> Result<(Series<Padic>, Series<Padic>)> {
        let f = self.f_padic(ctx);
        match (disk.kind, self.disk_center(ctx, disk)?) {
            (DiskKind::Infinite, _) => self.infinity_expansion(&f, disk.infinity_sign(), order),
            (DiskKind::Affine, CurvePoint::Affine { x, y }) => self.affine_expansion(&f, &x, &y, order),
            (DiskKind::Weierstrass, CurvePoint::Affine { x, .. }) => self.weierstrass_expansion(&f, &x, order),
            _ => unreachable!(),
        }
    }

    /// The images under f1: (x, y) -> (x^2, y) and f2: (x, y) -> (x^-2, y x^-3)
    /// on E: y^2 = x^3 + a x^2 + a x + 1.
    pub fn kms_quotient_maps(&self, pt: &RationalPoint) -> Result<(EllipticPoint, EllipticPoint)> {
        let a = self.kms.clone().ok_or_else(|| Error::Invalid("not a KMS curve".into()))?;
        let (x, y) = match pt {
            RationalPoint::Affine { x, y } => (x.clone(), y.clone()),
            _ => return Err(Error::Invalid("quotient maps are evaluated at affine points".into())),
        };
        if x.is_zero() {
            return Err(Error::Invalid("f2 is undefined at x = 0".into()));
        }
        let e1 = EllipticPoint { x: &x * &x, y: y.clone(), a: a.clone() };
        let x3 = &x * &x * &x;
        let e2 = EllipticPoint { x: (&x * &x).recip(), y: y / x3, a };
        Ok((e1, e2))
    }
}

fn residue_of(x: &Padic) -> Result<u64> {
    if x.valuation_bound() > 0 {
        return Ok(0);
    }
    if x.precision_bound() < 1 {
        return Err(Error::Precision("cannot reduce mod p".into()));
    }
    Ok((x.unit() % x.p()).to_u64().unwrap())
}

/// f(x0 + t) as a polynomial in t.
pub fn shift_poly<C: Coeff>(f: &Poly<C>, x0: &C) -> Poly<C> {
    let z = x0.zero_like();
    let lin = Poly::new(vec![x0.clone(), z.one_like()], z.clone());
    let mut acc = Poly::zero(&z);
    for c in f.coeffs().iter().rev() {
        acc = acc.mul(&lin).add(&Poly::constant(c.clone()));
    }
    acc
}

/// f(s) for a polynomial f and a series s.
pub fn eval_poly_series<C: Coeff>(f: &Poly<C>, s: &Series<C>) -> Series<C> {
    let z = f.zero_elem();
    let mut acc = Series::zero(z, i64::MAX / 4);
    for c in f.coeffs().iter().rev() {
        acc = acc.mul(s).add(&Series::constant(c.clone(), i64::MAX / 4));
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DiskKind {
    Affine,
    Weierstrass,
    Infinite,
}

/// A residue disk, named by its reduction. Infinite disks store the residue
/// of y/x^(g+1) (1 for infinity+, p-1 for infinity-) in `y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResidueDisk {
    pub kind: DiskKind,
    pub x: u64,
    pub y: u64,
    pub p: u64,
}

impl ResidueDisk {
    pub fn infinity_sign(&self) -> i64 {
        if self.y == 1 {
            1
        } else {
            -1
        }
    }

    /// The disk of w(P) for P in this one.
    pub fn involution(&self) -> ResidueDisk {
        ResidueDisk { y: (self.p - self.y) % self.p, ..*self }
    }

    pub fn parameter(&self) -> &'static str {
        match self.kind {
            DiskKind::Affine => "t = x - x0",
            DiskKind::Weierstrass => "t = y",
            DiskKind::Infinite => "u = 1/x",
        }
    }

    /// Label in the style (x, y) with signed residues, or inf+/inf-.
    pub fn label(&self) -> String {
        let s = |v: u64| if v > self.p / 2 { v as i64 - self.p as i64 } else { v as i64 };
        match self.kind {
            DiskKind::Infinite => if self.y == 1 { "inf+".into() } else { "inf-".into() },
            _ => format!("({}, {})", s(self.x), s(self.y)),
        }
    }
}

impl fmt::Display for ResidueDisk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct InfinitySign {
    pub p: u64,
    pub sign: i64,
}

impl InfinitySign {
    pub fn new(p: u64, sign: i64) -> Self {
        InfinitySign { p, sign: sign.signum() }
    }
}

/// A point over Q_p.
#[derive(Clone, Debug)]
pub enum CurvePoint {
    Affine { x: Padic, y: Padic },
    Infinity(InfinitySign),
}

impl CurvePoint {
    pub fn involution(&self) -> CurvePoint {
        match self {
            CurvePoint::Affine { x, y } => CurvePoint::Affine { x: x.clone(), y: -y },
            CurvePoint::Infinity(s) => CurvePoint::Infinity(InfinitySign::new(s.p, -s.sign)),
        }
    }

    pub fn x(&self) -> Option<&Padic> {
        match self {
            CurvePoint::Affine { x, .. } => Some(x),
            _ => None,
        }
    }
}

impl fmt::Display for CurvePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurvePoint::Affine { x, y } => write!(f, "({x}, {y})"),
            CurvePoint::Infinity(s) => write!(f, "{}", if s.sign > 0 { "inf+" } else { "inf-" }),
        }
    }
}

/// A point with exact rational (or quadratic) coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RationalPoint {
    Affine { x: BigRational, y: BigRational },
    InfinityPlus,
    InfinityMinus,
}

impl RationalPoint {
    pub fn affine(x: i64, y: i64) -> Self {
        RationalPoint::Affine { x: BigRational::from_integer(x.into()), y: BigRational::from_integer(y.into()) }
    }

    pub fn from_ratios(x: (i64, i64), y: (i64, i64)) -> Self {
        RationalPoint::Affine { x: BigRational::new(x.0.into(), x.1.into()), y: BigRational::new(y.0.into(), y.1.into()) }
    }

    /// Parses `(x,y)`, `inf+` or `inf-`.
    pub fn parse(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        match t.as_str() {
            "inf+" | "oo+" | "∞+" => return Ok(RationalPoint::InfinityPlus),
            "inf-" | "oo-" | "∞-" => return Ok(RationalPoint::InfinityMinus),
            _ => {}
        }
        let inner = t
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| Error::Parse(format!("bad point {s:?}")))?;
        let (x, y) = inner.split_once(',').ok_or_else(|| Error::Parse(format!("bad point {s:?}")))?;
        Ok(RationalPoint::Affine { x: parse_rational(x)?, y: parse_rational(y)? })
    }

    pub fn involution(&self) -> Self {
        match self {
            RationalPoint::Affine { x, y } => RationalPoint::Affine { x: x.clone(), y: -y },
            RationalPoint::InfinityPlus => RationalPoint::InfinityMinus,
            RationalPoint::InfinityMinus => RationalPoint::InfinityPlus,
        }
    }

    pub fn to_padic(&self, ctx: &PadicContext) -> CurvePoint {
        match self {
            RationalPoint::Affine { x, y } => CurvePoint::Affine { x: ctx.from_rational(x), y: ctx.from_rational(y) },
            RationalPoint::InfinityPlus => CurvePoint::Infinity(InfinitySign::new(ctx.p(), 1)),
            RationalPoint::InfinityMinus => CurvePoint::Infinity(InfinitySign::new(ctx.p(), -1)),
        }
    }
}

impl fmt::Display for RationalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RationalPoint::Affine { x, y } => write!(f, "({x}, {y})"),
            RationalPoint::InfinityPlus => write!(f, "inf+"),
            RationalPoint::InfinityMinus => write!(f, "inf-"),
        }
    }
}

/// Parses a point whose coordinates may involve sqrt(d), embedding it in Q_p.
pub fn parse_point(s: &str, ctx: &PadicContext, emb: Option<&SqrtEmbedding>) -> Result<CurvePoint> {
    if let Ok(r) = RationalPoint::parse(s) {
        return Ok(r.to_padic(ctx));
    }
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let inner = t
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| Error::Parse(format!("bad point {s:?}")))?;
    let (x, y) = inner.split_once(',').ok_or_else(|| Error::Parse(format!("bad point {s:?}")))?;
    let root = emb.map(|e| e.root(ctx)).transpose()?;
    let coord = |c: &str| -> Result<Padic> {
        match QuadraticNumber::parse(c) {
            Ok(q) => {
                if let (Some(e), false) = (emb, q.b.is_zero()) {
                    if e.d != q.d {
                        return Err(Error::Invalid(format!("sqrt({}) used but the embedding is for sqrt({})", q.d, e.d)));
                    }
                }
                q.embed(ctx, root.as_ref())
            }
            Err(_) => ctx.parse(c),
        }
    };
    Ok(CurvePoint::Affine { x: coord(x)?, y: coord(y)? })
}

/// A point on E_a: y^2 = x^3 + a x^2 + a x + 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EllipticPoint {
    pub x: BigRational,
    pub y: BigRational,
    pub a: BigRational,
}

impl EllipticPoint {
    pub fn is_on_curve(&self) -> bool {
        let x = &self.x;
        let rhs = x * x * x + &self.a * x * x + &self.a * x + BigRational::one();
        &self.y * &self.y == rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn sqrt_mod_p() {
        for p in [3u64, 5, 7, 11, 13, 17, 97, 101] {
            for a in 1..p {
                match fp_sqrt(a, p) {
                    Some(r) => assert_eq!(r * r % p, a),
                    None => assert_eq!(legendre(a, p), -1),
                }
            }
        }
    }

    #[test]
    fn involution_examples() {
        let b = RationalPoint::affine(0, 1);
        assert_eq!(b.involution(), RationalPoint::affine(0, -1));
        assert_eq!(b.involution().involution(), b);
        assert_eq!(RationalPoint::InfinityPlus.involution(), RationalPoint::InfinityMinus);
    }

    #[test]
    fn disks_for_a31_p3() {
        let c = HyperellipticCurve::kms_int(31).unwrap();
        let ctx = PadicContext::new(3, 10).unwrap();
        let disks = c.enumerate_disks(3).unwrap();
        assert_eq!(disks.len() as u64, c.count_points(3).unwrap());
        let affine: Vec<(u64, u64)> = disks.iter().filter(|d| d.kind == DiskKind::Affine).map(|d| (d.x, d.y)).collect();
        assert_eq!(affine, vec![(0, 1), (0, 2), (1, 1), (1, 2), (2, 1), (2, 2)]);
        assert!(disks.iter().all(|d| d.kind != DiskKind::Weierstrass));

        let d = c.reduce_mod_p(&RationalPoint::affine(0, 1).to_padic(&ctx)).unwrap();
        assert_eq!((d.kind, d.x, d.y), (DiskKind::Affine, 0, 1));
        let d = c.reduce_mod_p(&RationalPoint::affine(7, 440).to_padic(&ctx)).unwrap();
        assert_eq!((d.x, d.y), (1, 2));
        let x = ctx.from_ratio(5, 3);
        let y = c.f_padic(&ctx).eval(&x).shift(6).sqrt(1).unwrap().shift(-3);
        let d = c.reduce_mod_p(&CurvePoint::Affine { x, y }).unwrap();
        assert_eq!(d.kind, DiskKind::Infinite);
    }

    #[test]
    fn bad_reduction_detected() {
        // a = 3 gives (x^2+1)^3, singular over Q
        assert!(HyperellipticCurve::kms_int(3).is_err());
        let c = HyperellipticCurve::kms_int(31).unwrap();
        assert!(c.check_good_reduction(3).is_ok());
        assert!(c.check_good_reduction(2).is_err());
        // mod 3, a = 6 reduces to x^6 + 1 = (x^2+1)^3
        let c = HyperellipticCurve::kms_int(6).unwrap();
        assert!(matches!(c.check_good_reduction(3), Err(Error::BadReduction(3))));
        let c = HyperellipticCurve::kms(q(1, 3)).unwrap();
        assert!(c.check_good_reduction(3).is_err());
    }

    #[test]
    fn involution_commutes_with_reduction() {
        let c = HyperellipticCurve::kms_int(31).unwrap();
        let ctx = PadicContext::new(3, 10).unwrap();
        for pt in [RationalPoint::affine(7, 440), RationalPoint::affine(-1, 8), RationalPoint::from_ratios((1, 7), (440, 343))] {
            let p = pt.to_padic(&ctx);
            assert_eq!(c.reduce_mod_p(&p.involution()).unwrap(), c.reduce_mod_p(&p).unwrap().involution());
        }
    }

    #[test]
    fn expansions_round_trip() {
        let c = HyperellipticCurve::kms_int(31).unwrap();
        let ctx = PadicContext::new(3, 20).unwrap();
        let order = 3 * 20;
        let f = c.f_padic(&ctx);
        for d in c.enumerate_disks(3).unwrap() {
            let (x, y) = c.local_expansion(&ctx, &d, order).unwrap();
            let res = y.mul(&y).sub(&eval_poly_series(&f, &x));
            for (k, a) in res.terms() {
                assert!(a.is_zero(), "disk {d} t^{k}: {a}");
            }
            assert!(res.order() >= order - 10);
        }
        // at (0,1) over Q the expansion starts 1 + (31/2) t^2
        let fq = c.f_rational();
        let (_, y) = c.affine_expansion(&fq, &q(0, 1), &q(1, 1), 8).unwrap();
        assert_eq!(y.coeff(2), q(31, 2));
        let (_, y) = c.infinity_expansion(&fq, 1, 6).unwrap();
        assert_eq!(y.min_exponent(), -3);
    }

    #[test]
    fn weierstrass_expansion_round_trip() {
        let fq = Poly::new(vec![q(-2, 1), q(0, 1), q(0, 1), q(0, 1), q(1, 1)], q(0, 1));
        let c = HyperellipticCurve::new(fq.coeffs().to_vec()).unwrap();
        let ctx = PadicContext::new(7, 20).unwrap();
        // x^4 - 2 has a root mod 7 (2 = 4^2, 4 = 2^2)
        let f = c.f_padic(&ctx);
        let x0 = ctx.from_int(2);
        let mut x = x0;
        for _ in 0..8 {
            x = &x - &(&f.eval(&x) / &f.deriv().eval(&x));
        }
        let (xs, ys) = c.weierstrass_expansion(&f, &x, 12).unwrap();
        let res = ys.mul(&ys).sub(&eval_poly_series(&f, &xs));
        assert!(res.terms().all(|(_, a)| a.is_zero()));
        let lead = xs.coeff(2);
        assert!((&lead * &f.deriv().eval(&x)).agrees_with(&ctx.one()));
    }

    #[test]
    fn quotient_maps() {
        let c = HyperellipticCurve::kms_int(31).unwrap();
        let (e1, e2) = c.kms_quotient_maps(&RationalPoint::affine(7, 440)).unwrap();
        assert!(e1.is_on_curve() && e2.is_on_curve());
        assert_eq!((e2.x.clone(), e2.y.clone()), (q(1, 49), q(440, 343)));
        let (e1, _) = c.kms_quotient_maps(&RationalPoint::affine(1, 8)).unwrap();
        assert_eq!((e1.x, e1.y), (q(1, 1), q(8, 1)));
        assert!(c.kms_quotient_maps(&RationalPoint::affine(0, 1)).is_err());
    }

    #[test]
    fn quadratic_coordinates() {
        let z = QuadraticNumber::parse("-24*sqrt(3)+40").unwrap();
        assert_eq!((z.a, z.b, z.d), (q(40, 1), q(-24, 1), 3));
        let z = QuadraticNumber::parse("98/71 - 39/71*sqrt(3)").unwrap();
        assert_eq!((z.a, z.b), (q(98, 71), q(-39, 71)));
        let ctx = PadicContext::new(11, 10).unwrap();
        let emb = SqrtEmbedding { d: 3, residue: 5 };
        let c = HyperellipticCurve::kms_int(19).unwrap();
        let pt = parse_point("(sqrt(3), 16)", &ctx, Some(&emb)).unwrap();
        assert!(c.equation_residual(&pt).unwrap().is_zero());
    }
}
