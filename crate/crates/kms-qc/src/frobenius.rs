//! Frobenius on H^1_dR of the affine curve Y = X - {inf+, inf-}.
//!
//! With the lift phi(x) = x^p, phi^*(omega_i) for omega_i = x^i dx/(2y) is a
//! finite sum of R(x) dx / y^n (n odd) once the binomial series for
//! y^{-p} (1 + E/f^p)^{-1/2}, E = f(x^p) - f(x)^p, is truncated. Pole-order
//! reduction against f' at finite poles and a degree-drop recursion at
//! infinity bring it back to the omega basis plus an exact differential dF_i.
//!
//! The same machinery on the x-line (even differentials R dx / f^l) gives the
//! Frobenius action on x^m dx / f, which the double-integral constants need.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::curve::HyperellipticCurve;
use crate::error::{Error, Result};
use crate::padic::{ppow, Padic, PadicContext, PadicMatrix};
use crate::poly::{xgcd, Poly};
use crate::series::Series;

pub type PPoly = Poly<Padic>;

/// Sum of B_n(x) y^{-n} over odd n; n = -1 stands for Q(x) y.
#[derive(Clone, Debug, Default)]
pub struct OddFunction {
    pub levels: BTreeMap<i64, PPoly>,
}

/// Sum of R_n(x) dx / y^n over odd n >= 1.
#[derive(Clone, Debug, Default)]
pub struct OddDifferential {
    pub levels: BTreeMap<i64, PPoly>,
}

/// Sum of R_l(x) / f^l over l >= 0 (a function on the x-line).
#[derive(Clone, Debug, Default)]
pub struct XLineFunction {
    pub levels: BTreeMap<i64, PPoly>,
}

/// Sum of R_l(x) dx / f^l over l >= 0.
#[derive(Clone, Debug, Default)]
pub struct XLineDifferential {
    pub levels: BTreeMap<i64, PPoly>,
}

fn add_level(map: &mut BTreeMap<i64, PPoly>, n: i64, p: PPoly) {
    if p.is_empty() {
        return;
    }
    match map.get_mut(&n) {
        Some(e) => *e = e.add(&p),
        None => {
            map.insert(n, p);
        }
    }
}

impl OddFunction {
    pub fn add_scaled(&mut self, other: &OddFunction, c: &Padic) {
        if c.is_exact_zero() {
            return;
        }
        for (n, b) in &other.levels {
            add_level(&mut self.levels, *n, b.scale(c));
        }
    }

    /// Value at an affine point with y a unit (or any y where 1/y exists).
    pub fn eval(&self, x: &Padic, y: &Padic) -> Result<Padic> {
        let yinv = y.inv()?;
        let mut acc = x.context().zero();
        for (n, b) in &self.levels {
            let yp = if *n == -1 { y.clone() } else { yinv.pow(*n as u64) };
            acc = &acc + &(&b.eval(x) * &yp);
        }
        Ok(acc)
    }

    /// d(self) as an odd differential: d(B y^-n) = B' y^-n - (n/2) B f' y^-(n+2),
    /// with B' y dx rewritten as B' f dx / y.
    pub fn d(&self, f: &PPoly, fp: &PPoly) -> OddDifferential {
        let mut out = BTreeMap::new();
        for (&n, b) in &self.levels {
            if n == -1 {
                add_level(&mut out, 1, b.deriv().mul(f));
            } else {
                add_level(&mut out, n, b.deriv());
            }
            add_level(&mut out, n + 2, b.mul(fp).scale(&b.zero_elem().context().from_ratio(-n, 2)));
        }
        OddDifferential { levels: out }
    }

    /// Product with an odd differential, as an x-line differential.
    pub fn mul_diff(&self, w: &OddDifferential, f: &PPoly) -> XLineDifferential {
        XLineDifferential { levels: odd_product(&self.levels, &w.levels, f) }
    }

    /// Product of two odd functions, as an x-line function.
    pub fn mul_fn(&self, o: &OddFunction, f: &PPoly) -> XLineFunction {
        XLineFunction { levels: odd_product(&self.levels, &o.levels, f) }
    }

    pub fn max_level(&self) -> i64 {
        self.levels.keys().next_back().copied().unwrap_or(-1)
    }
}

/// y^-n * y^-m = f^-((n+m)/2); negative total levels become powers of f.
fn odd_product(a: &BTreeMap<i64, PPoly>, b: &BTreeMap<i64, PPoly>, f: &PPoly) -> BTreeMap<i64, PPoly> {
    if a.len() * b.len() > 64 {
        if let Some(out) = kronecker_product(a, b, f) {
            return out;
        }
    }
    let mut out = BTreeMap::new();
    for (&n, pa) in a {
        for (&m, pb) in b {
            let mut l = (n + m) / 2;
            let mut prod = pa.mul(pb);
            while l < 0 {
                prod = prod.mul(f);
                l += 1;
            }
            add_level(&mut out, l, prod);
        }
    }
    out
}

/// The same product as one big-integer multiplication (Kronecker
/// substitution) of exact representatives; each output level is then
/// truncated to the precision the level-by-level product would certify.
fn kronecker_product(a: &BTreeMap<i64, PPoly>, b: &BTreeMap<i64, PPoly>, f: &PPoly) -> Option<BTreeMap<i64, PPoly>> {
    let (&amin, &amax) = (a.keys().next()?, a.keys().next_back()?);
    let (&bmin, &bmax) = (b.keys().next()?, b.keys().next_back()?);
    if a.keys().any(|n| (n - amin) % 2 != 0) || b.keys().any(|n| (n - bmin) % 2 != 0) {
        return None;
    }
    let ctx = f.coeffs().first()?.context();
    let p = ctx.p();
    // per level: (min valuation, min absolute precision); empty levels are None
    let rows = |m: &BTreeMap<i64, PPoly>, min: i64, len: usize| {
        let mut r = vec![None; len];
        let mut d = 0usize;
        for (n, poly) in m {
            d = d.max(poly.len());
            let (mut v, mut pr) = (i64::MAX, i64::MAX);
            for c in poly.coeffs() {
                if !c.is_exact_zero() {
                    v = v.min(c.valuation_bound());
                    pr = pr.min(c.precision_bound());
                }
            }
            if v < i64::MAX {
                r[((n - min) / 2) as usize] = Some((v, pr));
            }
        }
        (r, d)
    };
    let (la, lb) = (((amax - amin) / 2 + 1) as usize, ((bmax - bmin) / 2 + 1) as usize);
    let (ra, da) = rows(a, amin, la);
    let (rb, db) = rows(b, bmin, lb);
    let va = ra.iter().flatten().map(|r| r.0).min()?;
    let vb = rb.iter().flatten().map(|r| r.0).min()?;
    let ea = ra.iter().flatten().map(|r| r.1 - va).max()?;
    let eb = rb.iter().flatten().map(|r| r.1 - vb).max()?;
    let ncols = da + db - 1;
    let slot_bits = ((ea + eb) as f64 * (p as f64).log2()).ceil() as usize + 64;
    let slot = slot_bits.div_ceil(32);
    let pack = |m: &BTreeMap<i64, PPoly>, min: i64, vmin: i64, len: usize| -> BigUint {
        let mut digits = vec![0u32; len * ncols * slot];
        for (n, poly) in m {
            let row = ((n - min) / 2) as usize;
            for (i, c) in poly.coeffs().iter().enumerate() {
                if c.unit().is_zero() {
                    continue;
                }
                let v = c.unit() * ppow(p, (c.valuation_bound() - vmin) as u32);
                let at = (row * ncols + i) * slot;
                for (k, d) in v.to_u32_digits().into_iter().enumerate() {
                    digits[at + k] = d;
                }
            }
        }
        BigUint::new(digits)
    };
    let prod = pack(a, amin, va, la) * pack(b, bmin, vb, lb);
    let digits = prod.to_u32_digits();
    let mut out = BTreeMap::new();
    for k in 0..(la + lb - 1) {
        let mut prec = i64::MAX;
        for ia in k.saturating_sub(lb - 1)..=k.min(la - 1) {
            if let (Some((v1, p1)), Some((v2, p2))) = (ra[ia], rb[k - ia]) {
                prec = prec.min(p1.saturating_add(v2)).min(p2.saturating_add(v1));
            }
        }
        if prec == i64::MAX {
            continue;
        }
        let coeffs: Vec<Padic> = (0..ncols)
            .map(|i| {
                let at = (k * ncols + i) * slot;
                let s = if at < digits.len() { BigUint::from_slice(&digits[at..(at + slot).min(digits.len())]) } else { BigUint::zero() };
                if s.is_zero() {
                    ctx.big_o(prec)
                } else {
                    ctx.from_bigint(&BigInt::from(s)).shift(va + vb).truncate(prec)
                }
            })
            .collect();
        let mut l = (amin + bmin) / 2 + k as i64;
        let mut poly = Poly::new(coeffs, ctx.zero());
        while l < 0 {
            poly = poly.mul(f);
            l += 1;
        }
        add_level(&mut out, l, poly);
    }
    Some(out)
}

impl OddDifferential {
    /// x^i dx / (2y)
    pub fn omega(ctx: &PadicContext, i: usize) -> Self {
        let mut levels = BTreeMap::new();
        levels.insert(1, Poly::monomial(ctx.from_ratio(1, 2), i));
        OddDifferential { levels }
    }

    /// Sum of c_i omega_i.
    pub fn omega_combination(coeffs: &[Padic]) -> Self {
        let ctx = coeffs[0].context();
        let levels = BTreeMap::from([(1, Poly::new(coeffs.iter().map(|c| c.div_int(2)).collect(), ctx.zero()))]);
        OddDifferential { levels }
    }
}

impl XLineFunction {
    pub fn eval(&self, x: &Padic, fx: &Padic) -> Result<Padic> {
        let finv = fx.inv()?;
        let mut acc = x.context().zero();
        for (l, b) in &self.levels {
            acc = &acc + &(&b.eval(x) * &finv.pow(*l as u64));
        }
        Ok(acc)
    }
}

pub(crate) fn binom_neg_half(k: usize) -> BigRational {
    let mut r = BigRational::one();
    for i in 0..k {
        r = r * (BigRational::new((-1).into(), 2.into()) - BigRational::from_integer(BigInt::from(i))) / BigRational::from_integer(BigInt::from(i + 1));
    }
    r
}

/// Precomputed data for pole reduction on y^2 = f(x) over Q_p.
#[derive(Clone, Debug)]
pub struct Reducer {
    pub ctx: PadicContext,
    pub g: usize,
    pub f: PPoly,
    pub fp: PPoly,
    /// t with s f + t f' = 1
    t: PPoly,
}

impl Reducer {
    pub fn new(curve: &HyperellipticCurve, ctx: &PadicContext) -> Result<Self> {
        let fq = curve.f_rational();
        let (_, t) = xgcd(&fq, &fq.deriv())?;
        let to_p = |p: &Poly<BigRational>| p.map(&ctx.zero(), |c| ctx.from_rational(c));
        let f = to_p(&fq);
        Ok(Reducer { ctx: *ctx, g: curve.genus(), fp: f.deriv(), f, t: to_p(&t) })
    }

    /// Split R = A f + B f' with deg B < deg f.
    fn split(&self, r: &PPoly) -> Result<(PPoly, PPoly)> {
        let (_, rm) = r.divrem(&self.f)?;
        let (_, b) = rm.mul(&self.t).divrem(&self.f)?;
        let (a, rem) = r.sub(&b.mul(&self.fp)).divrem(&self.f)?;
        if let Some(c) = rem.coeffs().iter().find(|c| !c.is_zero()) {
            return Err(Error::Precision(format!("pole reduction left remainder {c}")));
        }
        Ok((a, b))
    }

    /// Reduce a differential with odd pole orders to (coefficients on
    /// omega_0..omega_2g, primitive F) with input = dF + sum v_i omega_i.
    pub fn reduce_odd(&self, diff: &OddDifferential) -> Result<(Vec<Padic>, OddFunction)> {
        let mut levels = diff.levels.clone();
        if let Some((&n, _)) = levels.iter().find(|(n, _)| **n < 1 || **n % 2 == 0) {
            return Err(Error::Invalid(format!("level {n} in an odd differential")));
        }
        let mut prim = BTreeMap::new();
        let top = levels.keys().next_back().copied().unwrap_or(1);
        let mut n = top;
        while n >= 3 {
            if let Some(r) = levels.remove(&n) {
                let (a, b) = self.split(&r)?;
                let k = n - 2;
                let next = a.add(&b.deriv().scale(&self.ctx.from_ratio(2, k)));
                add_level(&mut levels, k, next);
                add_level(&mut prim, k, b.scale(&self.ctx.from_ratio(-2, k)));
            }
            n -= 2;
        }
        let mut r = levels.remove(&1).unwrap_or_else(|| Poly::zero(&self.ctx.zero()));
        let g = self.g;
        let mut q: Vec<Padic> = Vec::new();
        // R dx / y with deg R >= 2g+1: subtract c d(x^m y), d(x^m y) = (m x^{m-1} f + x^m f'/2) dx / y
        while r.len() > 2 * g + 1 {
            let deg = r.len() - 1;
            let m = deg - (2 * g + 1);
            let c = r.coeff(deg).div_int((m + g + 1) as i64);
            let mut num = self.fp.scale(&self.ctx.from_ratio(1, 2)).shift(m);
            if m >= 1 {
                num = num.add(&self.f.scale(&self.ctx.from_int(m as i64)).shift(m - 1));
            }
            let mut coeffs = r.sub(&num.scale(&c)).coeffs().to_vec();
            coeffs.truncate(deg);
            r = Poly::new(coeffs, self.ctx.zero());
            if q.len() <= m {
                q.resize(m + 1, self.ctx.zero());
            }
            q[m] = &q[m] + &c;
        }
        add_level(&mut prim, -1, Poly::new(q, self.ctx.zero()));
        let v = (0..=2 * g).map(|i| r.coeff(i).mul_int(2)).collect();
        Ok((v, OddFunction { levels: prim }))
    }

    /// Reduce an x-line differential to (coefficients on x^m dx / f,
    /// m = 0..2g+1, primitive G).
    pub fn reduce_even(&self, diff: &XLineDifferential) -> Result<(Vec<Padic>, XLineFunction)> {
        let mut levels = diff.levels.clone();
        let mut prim = BTreeMap::new();
        let top = levels.keys().next_back().copied().unwrap_or(0);
        let mut l = top;
        while l >= 2 {
            if let Some(r) = levels.remove(&l) {
                let (a, b) = self.split(&r)?;
                let k = l - 1;
                add_level(&mut levels, k, a.add(&b.deriv().scale(&self.ctx.from_ratio(1, k))));
                add_level(&mut prim, k, b.scale(&self.ctx.from_ratio(-1, k)));
            }
            l -= 1;
        }
        let zero = Poly::zero(&self.ctx.zero());
        let (q, rem) = levels.remove(&1).unwrap_or_else(|| zero.clone()).divrem(&self.f)?;
        let poly = q.add(&levels.remove(&0).unwrap_or(zero));
        add_level(&mut prim, 0, poly.integral());
        let v = (0..2 * self.g + 2).map(|m| rem.coeff(m)).collect();
        Ok((v, XLineFunction { levels: prim }))
    }

    /// E = f(x^p) - f(x)^p.
    pub fn frobenius_error(&self) -> PPoly {
        let p = self.ctx.p() as usize;
        let z = self.ctx.zero();
        let mut fxp = vec![z.clone(); (self.f.len() - 1) * p + 1];
        for (i, c) in self.f.coeffs().iter().enumerate() {
            fxp[i * p] = c.clone();
        }
        let mut fpow = Poly::constant(self.ctx.one());
        for _ in 0..p {
            fpow = fpow.mul(&self.f);
        }
        Poly::new(fxp, z).sub(&fpow)
    }
}

/// phi(1/y) = y^-p sum_k binom(-1/2, k) E^k y^{-2pk}, truncated to k < terms.
pub fn frobenius_lift_expansion(red: &Reducer, terms: usize) -> OddFunction {
    let p = red.ctx.p() as i64;
    let e = red.frobenius_error();
    let mut ek = Poly::constant(red.ctx.one());
    let mut levels = BTreeMap::new();
    for k in 0..terms {
        levels.insert(p * (2 * k as i64 + 1), ek.scale(&red.ctx.from_rational(&binom_neg_half(k))));
        ek = ek.mul(&e);
    }
    OddFunction { levels }
}

/// Lower bound on the valuation of everything dropped by truncating the
/// binomial series after `terms` terms, after reduction. Term k has
/// valuation >= k; reducing a pole of order n costs at most
/// floor(log_p n) digits, counted twice for the finite and infinite steps.
pub fn truncation_bound(p: u64, terms: usize, g: usize) -> i64 {
    let n = p as i64 * (2 * terms as i64 + 3) + 2 * g as i64 + 2;
    terms as i64 - 2 * ilog(p, n)
}

pub fn ilog(p: u64, n: i64) -> i64 {
    let mut k = 0;
    let mut v = p as i64;
    while v <= n {
        v = v.saturating_mul(p as i64);
        k += 1;
    }
    k
}

/// Number of binomial terms needed for the truncation to be invisible at
/// absolute precision `target`.
pub fn terms_for(p: u64, target: i64, g: usize) -> usize {
    let mut k = target.max(1) as usize;
    while truncation_bound(p, k, g) < target {
        k += 1;
    }
    k
}

#[derive(Clone, Debug)]
pub struct FrobeniusData {
    pub ctx: PadicContext,
    pub genus: usize,
    /// M with phi^* omega_i = dF_i + sum_j M[j][i] omega_j.
    pub matrix: PadicMatrix,
    pub primitives: Vec<OddFunction>,
    pub certified_precision: i64,
    pub terms: usize,
}

/// Frobenius matrix on the omega basis with truncation chosen for absolute
/// precision `target` (the context cap bounds what can be certified).
pub fn frobenius_matrix(curve: &HyperellipticCurve, ctx: &PadicContext, target: i64) -> Result<FrobeniusData> {
    curve.check_good_reduction(ctx.p())?;
    let red = Reducer::new(curve, ctx)?;
    frobenius_with(&red, target)
}

pub fn frobenius_with(red: &Reducer, target: i64) -> Result<FrobeniusData> {
    let ctx = red.ctx;
    let g = red.g;
    let p = ctx.p() as usize;
    let terms = terms_for(ctx.p(), target, g);
    let lift = frobenius_lift_expansion(red, terms);
    let half_p = ctx.from_ratio(p as i64, 2);
    let cols: Vec<Result<(Vec<Padic>, OddFunction)>> = (0..=2 * g)
        .into_par_iter()
        .map(|i| {
            // phi^*(x^i dx / 2y) = (p/2) x^{p(i+1)-1} phi(1/y) dx
            let pre = Poly::monomial(half_p.clone(), p * (i + 1) - 1);
            let levels = lift.levels.iter().map(|(n, b)| (*n, b.mul(&pre))).collect();
            red.reduce_odd(&OddDifferential { levels })
        })
        .collect();
    let n = 2 * g + 1;
    let mut m = PadicMatrix::zeros(&ctx, n, n);
    let mut prims = Vec::with_capacity(n);
    for (i, c) in cols.into_iter().enumerate() {
        let (v, f) = c?;
        for (j, x) in v.into_iter().enumerate() {
            m.set(j, i, x);
        }
        prims.push(f);
    }
    let bound = truncation_bound(ctx.p(), terms, g);
    let certified = m.min_precision().min(bound);
    Ok(FrobeniusData { ctx, genus: g, matrix: m, primitives: prims, certified_precision: certified, terms })
}

/// Frobenius on the x-line differentials nu_m = x^m dx / f, m = 0..2g+1.
#[derive(Clone, Debug)]
pub struct XLineFrobenius {
    /// N with phi^* nu_m = dH_m + sum_j N[j][m] nu_j.
    pub matrix: PadicMatrix,
    pub primitives: Vec<XLineFunction>,
    pub certified_precision: i64,
}

pub fn xline_frobenius(red: &Reducer, target: i64) -> Result<XLineFrobenius> {
    let ctx = red.ctx;
    let g = red.g;
    let p = ctx.p() as usize;
    let terms = terms_for(ctx.p(), target, g);
    let e = red.frobenius_error();
    let mut powers = Vec::with_capacity(terms);
    let mut ek = Poly::constant(ctx.one());
    for k in 0..terms {
        let sign = if k % 2 == 0 { 1 } else { -1 };
        powers.push(ek.scale(&ctx.from_int(sign)));
        ek = ek.mul(&e);
    }
    let n = 2 * g + 2;
    let cols: Vec<Result<(Vec<Padic>, XLineFunction)>> = (0..n)
        .into_par_iter()
        .map(|m| {
            // phi^*(x^m dx / f) = p x^{p(m+1)-1} sum_k (-1)^k E^k f^{-p(k+1)} dx
            let pre = Poly::monomial(ctx.from_int(p as i64), p * (m + 1) - 1);
            let levels = powers.iter().enumerate().map(|(k, ek)| ((p * (k + 1)) as i64, ek.mul(&pre))).collect();
            red.reduce_even(&XLineDifferential { levels })
        })
        .collect();
    let mut mat = PadicMatrix::zeros(&ctx, n, n);
    let mut prims = Vec::with_capacity(n);
    for (m, c) in cols.into_iter().enumerate() {
        let (v, h) = c?;
        for (j, x) in v.into_iter().enumerate() {
            mat.set(j, m, x);
        }
        prims.push(h);
    }
    let certified = mat.min_precision().min(truncation_bound(ctx.p(), terms, g));
    Ok(XLineFrobenius { matrix: mat, primitives: prims, certified_precision: certified })
}

/// Columns eta_0..eta_{2g-1} (a basis of H^1_dR(X)) followed by omega_g,
/// written in the omega basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CohomologyBasisChange {
    pub columns: Vec<Vec<BigRational>>,
}

impl CohomologyBasisChange {
    /// For the KMS family eta = (omega_0, omega_1, a omega_2 + 2 omega_4, omega_3);
    /// otherwise eta_i = omega_i for i < g and, for i > g, omega_i minus the
    /// multiple of omega_g with the same residue at infinity.
    pub fn for_curve(curve: &HyperellipticCurve) -> Self {
        let g = curve.genus();
        let n = 2 * g + 1;
        let z = BigRational::zero;
        let unit = |i: usize, c: BigRational| {
            let mut v = vec![z(); n];
            v[i] = c;
            v
        };
        let mut columns = Vec::with_capacity(n);
        if let Some(a) = curve.kms_parameter() {
            let two = BigRational::from_integer(2.into());
            columns.push(unit(0, BigRational::one()));
            columns.push(unit(1, BigRational::one()));
            let mut e2 = unit(2, a.clone());
            e2[4] = two;
            columns.push(e2);
            columns.push(unit(3, BigRational::one()));
        } else {
            let res = residues_at_infinity(curve);
            for i in 0..g {
                columns.push(unit(i, BigRational::one()));
            }
            for i in (g + 1)..=(2 * g) {
                let mut v = unit(i, BigRational::one());
                v[g] = -(&res[i] / &res[g]);
                columns.push(v);
            }
        }
        columns.push(unit(g, BigRational::one()));
        CohomologyBasisChange { columns }
    }

    pub fn matrix(&self, ctx: &PadicContext) -> PadicMatrix {
        let n = self.columns.len();
        let mut m = PadicMatrix::zeros(ctx, n, n);
        for (j, col) in self.columns.iter().enumerate() {
            for (i, c) in col.iter().enumerate() {
                m.set(i, j, ctx.from_rational(c));
            }
        }
        m
    }

    /// eta_i as coefficients on omega_0..omega_2g.
    pub fn eta(&self, i: usize) -> &[BigRational] {
        &self.columns[i]
    }
}

/// res_{inf+}(omega_i) for i = 0..2g (the residues at inf- are the negatives).
pub fn residues_at_infinity(curve: &HyperellipticCurve) -> Vec<BigRational> {
    let g = curve.genus();
    let fq = curve.f_rational();
    let (_, y) = curve.infinity_expansion(&fq, 1, 2 * g as i64 + 4).expect("expansion at infinity");
    // omega_i = x^i dx / (2y) with x = 1/u, dx = -du/u^2
    let yinv = y.inverse().expect("y invertible");
    (0..=2 * g)
        .map(|i| {
            let w = yinv.shift(-(i as i64) - 2).scale(&BigRational::new((-1).into(), 2.into()));
            w.coeff(-1)
        })
        .collect()
}

impl FrobeniusData {
    /// Frobenius matrix in the basis eta_0..eta_{2g-1}, omega_g.
    pub fn in_eta_basis(&self, change: &CohomologyBasisChange) -> Result<PadicMatrix> {
        let ph = change.matrix(&self.ctx);
        let id = PadicMatrix::identity(&self.ctx, ph.rows());
        let phinv = ph.solve(&id)?;
        Ok(phinv.mul(&self.matrix).mul(&ph))
    }

    /// The 2g x 2g block acting on H^1_dR(X).
    pub fn h1_block(&self, change: &CohomologyBasisChange) -> Result<PadicMatrix> {
        let m = self.in_eta_basis(change)?;
        let n = 2 * self.genus;
        Ok(m.submatrix(0..n, 0..n))
    }

    /// Primitive of phi^* eta_i - sum_j Mhat[j][i] eta_j.
    pub fn eta_primitive(&self, change: &CohomologyBasisChange, i: usize) -> OddFunction {
        let mut out = OddFunction::default();
        for (k, c) in change.columns[i].iter().enumerate() {
            if !c.is_zero() {
                out.add_scaled(&self.primitives[k], &self.ctx.from_rational(c));
            }
        }
        out
    }
}

/// Series of an odd function in a disk, given x(t), 1/y(t) and y(t).
pub fn odd_function_series(fun: &OddFunction, x: &Series<Padic>, y: &Series<Padic>, yinv: &Series<Padic>) -> Series<Padic> {
    let z = x.zero_elem().clone();
    let order = x.order().min(y.order());
    let mut out = Series::zero(&z, i64::MAX / 4);
    if let Some(q) = fun.levels.get(&-1) {
        out = out.add(&crate::curve::eval_poly_series(q, x).mul(y));
    }
    // Horner in w = y^-2 over the odd levels >= 1
    let top = fun.max_level();
    if top >= 1 {
        let w = yinv.mul(yinv);
        let mut acc = Series::zero(&z, i64::MAX / 4);
        let mut n = top;
        while n >= 1 {
            let b = fun.levels.get(&n).map(|b| crate::curve::eval_poly_series(b, x)).unwrap_or_else(|| Series::zero(&z, i64::MAX / 4));
            acc = if n == top { b } else { acc.mul(&w).add(&b) };
            n -= 2;
        }
        out = out.add(&acc.mul(yinv));
    }
    let _ = order;
    out
}

/// Series of an x-line function in a disk, given x(t) and 1/f(x(t)).
pub fn xline_function_series(fun: &XLineFunction, x: &Series<Padic>, finv: &Series<Padic>) -> Series<Padic> {
    let z = x.zero_elem().clone();
    let top = fun.levels.keys().next_back().copied().unwrap_or(0);
    let mut acc = Series::zero(&z, i64::MAX / 4);
    let mut l = top;
    while l >= 0 {
        let b = fun.levels.get(&l).map(|b| crate::curve::eval_poly_series(b, x)).unwrap_or_else(|| Series::zero(&z, i64::MAX / 4));
        acc = if l == top { b } else { acc.mul(finv).add(&b) };
        l -= 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(a: i64, p: u64, n: u32) -> (HyperellipticCurve, PadicContext, Reducer) {
        let c = HyperellipticCurve::kms_int(a).unwrap();
        let ctx = PadicContext::new(p, n).unwrap();
        let r = Reducer::new(&c, &ctx).unwrap();
        (c, ctx, r)
    }

    #[test]
    fn basic_differentials_reduce_to_themselves() {
        let (_, ctx, red) = setup(31, 3, 20);
        let (v, f) = red.reduce_odd(&OddDifferential::omega(&ctx, 3)).unwrap();
        for (i, c) in v.iter().enumerate() {
            let want = if i == 3 { 1 } else { 0 };
            assert!(c.agrees_with(&ctx.from_int(want)), "omega_{i}: {c}");
        }
        assert!(f.levels.values().all(|b| b.is_empty()));
    }

    #[test]
    fn exact_forms_reduce_to_zero() {
        let (_, ctx, red) = setup(31, 3, 20);
        // d(x/y)
        let mut fun = OddFunction::default();
        fun.levels.insert(1, Poly::monomial(ctx.one(), 1));
        let (v, prim) = red.reduce_odd(&fun.d(&red.f, &red.fp)).unwrap();
        assert!(v.iter().all(|c| c.is_zero()));
        let pt = (ctx.from_int(2), ctx.from_int(5));
        let want = fun.eval(&pt.0, &pt.1).unwrap();
        let got = prim.eval(&pt.0, &pt.1).unwrap();
        // primitives agree up to a constant
        let pt2 = (ctx.from_int(4), ctx.from_int(7));
        let d1 = &want - &fun.eval(&pt2.0, &pt2.1).unwrap();
        let d2 = &got - &prim.eval(&pt2.0, &pt2.1).unwrap();
        assert!(d1.agrees_with(&d2));
        // d(x^2 y) reduces to zero too
        let mut fun = OddFunction::default();
        fun.levels.insert(-1, Poly::monomial(ctx.one(), 2));
        let (v, _) = red.reduce_odd(&fun.d(&red.f, &red.fp)).unwrap();
        assert!(v.iter().all(|c| c.is_zero()));
    }

    #[test]
    fn one_step_reduction_of_high_degree() {
        // x^5 dx / (2y) on genus 2: one degree-drop step against d(y)
        let (_, ctx, red) = setup(31, 3, 20);
        let (v, prim) = red.reduce_odd(&OddDifferential::omega(&ctx, 5)).unwrap();
        // d(y) = f'/(2y) dx = (6x^5 + 124x^3 + 62x)/(2y) dx, so omega_5 = dy/6 - (124 omega_3 + 62 omega_1)/6
        assert!(v[3].agrees_with(&ctx.from_ratio(-124, 6)));
        assert!(v[1].agrees_with(&ctx.from_ratio(-62, 6)));
        assert!(prim.levels[&-1].coeff(0).agrees_with(&ctx.from_ratio(1, 6)));
    }

    #[test]
    fn trace_and_determinant_a31_p3() {
        let (c, ctx, _) = setup(31, 3, 30);
        let fd = frobenius_matrix(&c, &ctx, 20).unwrap();
        let change = CohomologyBasisChange::for_curve(&c);
        let h1 = fd.h1_block(&change).unwrap();
        assert!(fd.certified_precision >= 15, "certified {}", fd.certified_precision);
        let count = c.count_points(3).unwrap() as i64;
        assert!(h1.trace().agrees_with(&ctx.from_int(3 + 1 - count)));
        assert!(h1.det().unwrap().agrees_with(&ctx.from_int(9)));
        let mh = fd.in_eta_basis(&change).unwrap();
        for j in 0..4 {
            assert!(mh.get(4, j).is_zero(), "row 4 col {j}: {}", mh.get(4, j));
        }
        assert_eq!(mh.get(4, 4).valuation(), Some(1));
    }

    #[test]
    fn residues_match_kms_basis() {
        let c = HyperellipticCurve::kms_int(31).unwrap();
        let r = residues_at_infinity(&c);
        assert_eq!(r[2], BigRational::new((-1).into(), 2.into()));
        assert_eq!(r[4], BigRational::new(31.into(), 4.into()));
        assert!(r[0].is_zero() && r[1].is_zero() && r[3].is_zero());
    }

    #[test]
    fn lift_expansion_squares_to_frobenius_of_f() {
        let (c, ctx, red) = setup(31, 3, 30);
        let terms = 25;
        let lift = frobenius_lift_expansion(&red, terms);
        assert!(lift.levels[&3].coeff(0).agrees_with(&ctx.one()));
        // at a point with x, y units: phi(1/y)^2 * f(x^p) = 1
        let x = ctx.from_int(4);
        let fx = c.f_padic(&ctx).eval(&x);
        let y = fx.sqrt(1).unwrap();
        let v = lift.eval(&x, &y).unwrap();
        let fxp = c.f_padic(&ctx).eval(&x.pow(3));
        let one = &(&v * &v) * &fxp;
        assert!((&one - &ctx.one()).valuation_bound() >= terms as i64 - 2);
    }

    #[test]
    fn xline_frobenius_eigenvalues() {
        let (_, ctx, red) = setup(31, 3, 25);
        let xf = xline_frobenius(&red, 15).unwrap();
        // log differentials: Frobenius acts with all eigenvalues p on the six residues
        let cp = xf.matrix.charpoly();
        // (T - 3)^3 (T + 3)^3 = T^6 - 27 T^4 + 243 T^2 - 729
        let want = [-729, 0, 243, 0, -27, 0, 1];
        for (c, w) in cp.iter().zip(want) {
            assert!(c.agrees_with(&ctx.from_int(w)), "{c} vs {w}");
        }
    }
}
