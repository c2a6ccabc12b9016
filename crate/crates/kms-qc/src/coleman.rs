//! Single and double Coleman integrals of omega_0..omega_2g.
//!
//! All integrals are taken from a Frobenius-fixed anchor point. For each
//! residue disk the integrals from the anchor to the disk's Teichmüller center
//! (or, at infinity, the constant terms of the local expansions) come from the
//! Frobenius-equivariance systems; inside a disk everything is a series in the
//! local parameter.
//!
//! Nesting: the double integral of omega_i omega_j from P to Q has derivative
//! omega_i(Q) * int_P^Q omega_j in Q.

use rayon::prelude::*;
use serde::Serialize;

use crate::curve::{eval_poly_series, CurvePoint, DiskKind, HyperellipticCurve, ResidueDisk};
use crate::error::{Error, Result};
use crate::frobenius::{frobenius_with, ilog, xline_frobenius, FrobeniusData, OddDifferential, OddFunction, Reducer, XLineFrobenius, XLineFunction};
use crate::padic::{Padic, PadicContext, PadicMatrix};
use crate::series::Series;

/// A reduced x-line differential dG + sum v_m nu_m, with G(anchor) cached.
#[derive(Clone, Debug)]
struct Reduced {
    coeffs: Vec<Padic>,
    prim: XLineFunction,
    at_anchor: Padic,
}

#[derive(Clone, Debug, Serialize)]
pub struct ColemanResult {
    #[serde(serialize_with = "ser_padic")]
    pub value: Padic,
    pub certified_precision: i64,
    pub path_note: String,
}

fn ser_padic<S: serde::Serializer>(v: &Padic, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// Lower bound for the valuation of sum_{n >= order} a_n t^n when
/// v(a_n) >= base - 2 floor(log_p n) and v(t) >= vt >= 1.
pub fn series_tail_bound(p: u64, order: i64, vt: i64, base: i64) -> i64 {
    if vt >= i64::MAX / 8 {
        return i64::MAX / 4;
    }
    let order = order.max(1);
    // n vt - 2 log_p n is increasing past order except for drops at powers of p
    let mut best = i64::MAX;
    let mut n = order;
    while n <= order.saturating_mul(p as i64) + p as i64 {
        best = best.min(n * vt - 2 * ilog(p, n));
        n += 1;
    }
    best + base
}

pub struct ColemanEngine {
    pub curve: HyperellipticCurve,
    pub ctx: PadicContext,
    pub genus: usize,
    pub target: i64,
    pub series_order: i64,
    pub reducer: Reducer,
    pub frobenius: FrobeniusData,
    pub xline: XLineFrobenius,
    pub anchor: ResidueDisk,
    /// Digits certified for integrals from the anchor to disk centers.
    pub certified: i64,
    pub double_certified: i64,
    anchor_point: (Padic, Padic),
    f_anchor: Vec<Padic>,
    h_anchor: Vec<Padic>,
    i_minus_mt: PadicMatrix,
    i_minus_nt: PadicMatrix,
    /// F_j dF_i for j <= i, indexed [j][i - j]
    f_df: Vec<Vec<Reduced>>,
    /// F_i omega_l, indexed [i][l]
    f_om: Vec<Vec<Reduced>>,
}

/// Everything known about one residue disk.
#[derive(Clone, Debug)]
pub struct DiskData {
    pub disk: ResidueDisk,
    pub center: CurvePoint,
    pub x: Series<Padic>,
    pub y: Series<Padic>,
    /// omega_i = w_i(t) dt
    pub omega: Vec<Series<Padic>>,
    /// t^-1 coefficients of w_i
    pub residues: Vec<Padic>,
    /// the log-free part of int_0^t omega_i
    pub local: Vec<Series<Padic>>,
    /// integrals (constant terms at infinity) from the anchor to the center
    pub single: Vec<Padic>,
    pub double: Vec<Vec<Padic>>,
    pub order: i64,
}

impl ColemanEngine {
    /// Sets up Frobenius data and the product reductions at absolute
    /// precision `target`, anchored at the Teichmüller point of `anchor`.
    pub fn new(curve: &HyperellipticCurve, ctx: &PadicContext, target: i64, anchor: &ResidueDisk) -> Result<Self> {
        curve.check_good_reduction(ctx.p())?;
        if anchor.kind != DiskKind::Affine {
            return Err(Error::Unsupported(format!("anchor disk {anchor} must be affine and non-Weierstrass")));
        }
        let red = Reducer::new(curve, ctx)?;
        let (frob, xline) = rayon::join(|| frobenius_with(&red, target), || xline_frobenius(&red, target));
        let (frob, xline) = (frob?, xline?);
        let (bx, by) = match curve.disk_center(ctx, anchor)? {
            CurvePoint::Affine { x, y } => (x, y),
            CurvePoint::Infinity(_) => unreachable!(),
        };
        let g = curve.genus();
        let n = 2 * g + 1;
        let f_anchor = frob.primitives.iter().map(|f| f.eval(&bx, &by)).collect::<Result<Vec<_>>>()?;
        let fb = red.f.eval(&bx);
        let h_anchor = xline.primitives.iter().map(|h| h.eval(&bx, &fb)).collect::<Result<Vec<_>>>()?;
        let i_minus_mt = PadicMatrix::identity(ctx, n).sub(&frob.matrix.transpose());
        let i_minus_nt = PadicMatrix::identity(ctx, n + 1).sub(&xline.matrix.transpose());

        let reduce = |d: crate::frobenius::XLineDifferential| -> Result<Reduced> {
            let (coeffs, prim) = red.reduce_even(&d)?;
            let at_anchor = prim.eval(&bx, &fb)?;
            Ok(Reduced { coeffs, prim, at_anchor })
        };
        let dfs: Vec<OddDifferential> = frob.primitives.iter().map(|f| f.d(&red.f, &red.fp)).collect();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|j| (j..n).map(move |i| (j, i))).collect();
        let reduced: Vec<Result<Reduced>> =
            pairs.par_iter().map(|&(j, i)| reduce(frob.primitives[j].mul_diff(&dfs[i], &red.f))).collect();
        let mut f_df: Vec<Vec<Reduced>> = vec![Vec::new(); n];
        for (&(j, _), r) in pairs.iter().zip(reduced) {
            f_df[j].push(r?);
        }
        let om: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |l| (i, l))).collect();
        let reduced: Vec<Result<Reduced>> = om
            .par_iter()
            .map(|&(i, l)| reduce(frob.primitives[i].mul_diff(&OddDifferential::omega(ctx, l), &red.f)))
            .collect();
        let mut f_om: Vec<Vec<Reduced>> = vec![Vec::new(); n];
        for (&(i, _), r) in om.iter().zip(reduced) {
            f_om[i].push(r?);
        }
        let series_order = target + 2 * ilog(ctx.p(), target.max(1)) + 4;
        // products F_j dF_i reach pole orders about twice those of F_i; their
        // reduction costs floor(log_p n) digits per step type
        let top = frob.primitives.iter().map(|f| f.max_level()).max().unwrap_or(1).max(1);
        let certified = frob.certified_precision.min(xline.certified_precision);
        let double_certified = certified - 2 * ilog(ctx.p(), 2 * top + 2 * g as i64 + 2);
        Ok(ColemanEngine {
            curve: curve.clone(),
            ctx: *ctx,
            genus: g,
            target,
            series_order,
            reducer: red,
            frobenius: frob,
            xline,
            anchor: *anchor,
            certified,
            double_certified,
            anchor_point: (bx, by),
            f_anchor,
            h_anchor,
            i_minus_mt,
            i_minus_nt,
            f_df,
            f_om,
        })
    }

    pub fn anchor_point(&self) -> CurvePoint {
        CurvePoint::Affine { x: self.anchor_point.0.clone(), y: self.anchor_point.1.clone() }
    }

    fn dim(&self) -> usize {
        2 * self.genus + 1
    }

    /// Integrals from the anchor to the center of `disk` plus its local series.
    pub fn disk_data(&self, disk: &ResidueDisk) -> Result<DiskData> {
        let ctx = &self.ctx;
        let n = self.dim();
        let g = self.genus as i64;
        if disk.kind == DiskKind::Weierstrass {
            return Err(Error::Unsupported(format!("Weierstrass disk {disk}")));
        }
        let center = self.curve.disk_center(ctx, disk)?;
        let infinite = disk.kind == DiskKind::Infinite;

        // Values of primitives at the center; at infinity, constant terms of
        // Laurent expansions. There F_i has a pole of order at most `pole`.
        let prims = &self.frobenius.primitives;
        let pole = if infinite { prims.iter().map(|f| pole_order_at_infinity(f, g)).max().unwrap_or(0) } else { 0 };
        let order = self.series_order.max(pole + 2);
        let (x, y) = self.curve.local_expansion(ctx, disk, order + pole + 2 * g + 4)?;
        let yinv = y.inverse()?;
        let base = x.derivative().mul(&yinv).scale(&ctx.from_ratio(1, 2));
        let mut omega = Vec::with_capacity(n);
        let mut xp = Series::constant(ctx.one(), i64::MAX / 4);
        for _ in 0..n {
            omega.push(xp.mul(&base).truncate(order));
            xp = xp.mul(&x);
        }
        let (local, residues): (Vec<_>, Vec<_>) = omega.iter().map(|w| w.integrate_split()).unzip();

        let (fc, fser) = if infinite {
            let fser: Vec<Series<Padic>> =
                prims.iter().map(|f| odd_series_at_infinity(f, &x, &y, &yinv, pole + 1)).collect::<Result<_>>()?;
            (fser.iter().map(|s| s.coeff(0)).collect::<Vec<_>>(), Some(fser))
        } else {
            let CurvePoint::Affine { x: x0, y: y0 } = &center else { unreachable!() };
            (prims.iter().map(|f| f.eval(x0, y0)).collect::<Result<Vec<_>>>()?, None)
        };
        let xline_value = |h: &XLineFunction| -> Result<Padic> {
            match &center {
                CurvePoint::Affine { x: x0, .. } => h.eval(x0, &self.reducer.f.eval(x0)),
                // levels >= 1 have numerator degree < deg f and vanish at infinity
                CurvePoint::Infinity(_) => Ok(h.levels.get(&0).map(|b| b.coeff(0)).unwrap_or_else(|| ctx.zero())),
            }
        };
        let hc = self.xline.primitives.iter().map(xline_value).collect::<Result<Vec<_>>>()?;
        let rhs: Vec<Padic> = hc.iter().zip(&self.h_anchor).map(|(a, b)| a - b).collect();
        let dv = self.i_minus_nt.solve(&PadicMatrix::column(rhs))?.col(0);
        let xint = |r: &Reduced| -> Result<Padic> {
            let mut v = &xline_value(&r.prim)? - &r.at_anchor;
            for (c, d) in r.coeffs.iter().zip(&dv) {
                v = &v + &(c * d);
            }
            Ok(v)
        };

        let fb = &self.f_anchor;
        let rhs: Vec<Padic> = fc.iter().zip(fb).map(|(a, b)| a - b).collect();
        let cs: Vec<Padic> = self.i_minus_mt.solve(&PadicMatrix::column(rhs))?.col(0).iter().map(|c| c.truncate(self.certified)).collect();

        // [F_i F_j]_0 and [F_i I_l]_0
        let prod = |i: usize, j: usize| -> Padic {
            match &fser {
                Some(s) => s[i].mul(&s[j]).coeff(0),
                None => &fc[i] * &fc[j],
            }
        };
        let fi0 = |i: usize, l: usize| -> Padic {
            let mut v = &fc[i] * &cs[l];
            if let Some(s) = &fser {
                for k in 1..=pole {
                    let a = s[i].coeff(-k);
                    if !a.is_exact_zero() {
                        v = &v + &(&a * &local[l].coeff(k));
                    }
                }
            }
            v
        };
        // int F_j dF_i, using F_j dF_i + F_i dF_j = d(F_i F_j) when j > i
        let mut fdf = vec![vec![ctx.zero(); n]; n];
        for j in 0..n {
            for i in j..n {
                fdf[j][i] = xint(&self.f_df[j][i - j])?;
            }
        }
        for j in 0..n {
            for i in 0..j {
                let d = &prod(i, j) - &(&fb[i] * &fb[j]);
                fdf[j][i] = &d - &fdf[i][j];
            }
        }
        let mut fom = vec![vec![ctx.zero(); n]; n];
        for i in 0..n {
            for l in 0..n {
                fom[i][l] = xint(&self.f_om[i][l])?;
            }
        }
        let m = &self.frobenius.matrix;
        let mut a = PadicMatrix::zeros(ctx, n * n, n * n);
        let mut rhs = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut c = &fdf[j][i] - &(&fb[j] * &(&fc[i] - &fb[i]));
                for l in 0..n {
                    c = &c + &(m.get(l, j) * &(&fi0(i, l) - &fom[i][l]));
                }
                for k in 0..n {
                    c = &c + &(m.get(k, i) * &(&fom[j][k] - &(&fb[j] * &cs[k])));
                }
                rhs.push(c);
                for k in 0..n {
                    for l in 0..n {
                        let delta = if (k, l) == (i, j) { ctx.one() } else { ctx.zero() };
                        a.set(n * i + j, n * k + l, &delta - &(m.get(k, i) * m.get(l, j)));
                    }
                }
            }
        }
        let cd = a.solve(&PadicMatrix::column(rhs))?.col(0);
        let double = (0..n).map(|i| cd[n * i..n * (i + 1)].iter().map(|c| c.truncate(self.double_certified)).collect()).collect();
        Ok(DiskData { disk: *disk, center, x, y, omega, residues, local, single: cs, double, order })
    }

    /// Local parameter of a point in `d` (t = x - x0 or u = 1/x).
    pub fn parameter(&self, d: &DiskData, z: &CurvePoint) -> Result<Padic> {
        let disk = self.curve.reduce_mod_p(z)?;
        if disk != d.disk {
            return Err(Error::Invalid(format!("point {z} lies in disk {disk}, not {}", d.disk)));
        }
        match (z, &d.center) {
            (CurvePoint::Infinity(_), _) => Ok(self.ctx.zero()),
            (CurvePoint::Affine { x, .. }, CurvePoint::Affine { x: x0, .. }) => Ok(x - x0),
            (CurvePoint::Affine { x, .. }, CurvePoint::Infinity(_)) => x.inv(),
        }
    }

    /// Certified value of a disk series at parameter t, given a lower bound
    /// `base` on min(0, valuations of the constants the series was built from).
    pub fn eval_series(&self, s: &Series<Padic>, t: &Padic, base: i64) -> Result<Padic> {
        let v = s.eval(t)?;
        let vt = if t.is_exact_zero() { i64::MAX / 4 } else { t.valuation_bound() };
        if vt < 1 {
            return Err(Error::Invalid("parameter outside the residue disk".into()));
        }
        let tail = series_tail_bound(self.ctx.p(), s.order(), vt, base);
        Ok(v.truncate(tail))
    }

    fn combo_single(&self, d: &DiskData, alpha: &[Padic]) -> Result<Series<Padic>> {
        let mut res = self.ctx.zero();
        let mut s = Series::constant(dot(alpha, &d.single), i64::MAX / 4);
        for (c, (l, r)) in alpha.iter().zip(d.local.iter().zip(&d.residues)) {
            if c.is_exact_zero() {
                continue;
            }
            s = s.add(&l.scale(c));
            res = &res + &(c * r);
        }
        if !res.is_zero() {
            return Err(Error::Residue(format!("combination has residue {res} in disk {}", d.disk)));
        }
        Ok(s)
    }

    /// Series of int_anchor sum_k alpha_k omega_k in the disk.
    pub fn single_series(&self, d: &DiskData, alpha: &[Padic]) -> Result<Series<Padic>> {
        self.combo_single(d, alpha)
    }

    /// Series of sum over terms c * int_anchor omega_alpha omega_beta.
    pub fn double_series(&self, d: &DiskData, terms: &[(Padic, Vec<Padic>, Vec<Padic>)]) -> Result<Series<Padic>> {
        let z = self.ctx.zero();
        let mut integrand = Series::zero(&z, i64::MAX / 4);
        let mut constant = z.clone();
        for (c, alpha, beta) in terms {
            let ib = self.combo_single(d, beta)?;
            let wa = combo(&d.omega, alpha);
            integrand = integrand.add(&wa.mul(&ib).scale(c));
            for (k, a) in alpha.iter().enumerate() {
                for (l, b) in beta.iter().enumerate() {
                    if !a.is_exact_zero() && !b.is_exact_zero() {
                        constant = &constant + &(&(c * &(a * b)) * &d.double[k][l]);
                    }
                }
            }
        }
        let s = integrand.formal_integrate().map_err(|e| match e {
            Error::Residue(r) => Error::Residue(format!("double integrand has residue {r} in disk {}", d.disk)),
            e => e,
        })?;
        Ok(s.add(&Series::constant(constant, i64::MAX / 4)))
    }

    /// min(0, valuations of the disk constants), the base of the tail bound.
    pub fn tail_base(&self, d: &DiskData) -> i64 {
        let mut b = 0;
        for c in d.single.iter().chain(d.double.iter().flatten()) {
            b = b.min(c.valuation_bound().min(c.abs_precision().unwrap_or(0)));
        }
        b - 1
    }

    fn unit(&self, i: usize) -> Vec<Padic> {
        (0..self.dim()).map(|k| if k == i { self.ctx.one() } else { self.ctx.zero() }).collect()
    }

    fn locate(&self, z: &CurvePoint) -> Result<DiskData> {
        self.disk_data(&self.curve.reduce_mod_p(z)?)
    }

    /// int_anchor^z omega_alpha
    fn from_anchor_single(&self, d: &DiskData, z: &CurvePoint, alpha: &[Padic]) -> Result<Padic> {
        let t = self.parameter(d, z)?;
        self.eval_series(&self.combo_single(d, alpha)?, &t, self.tail_base(d))
    }

    fn from_anchor_double(&self, d: &DiskData, z: &CurvePoint, alpha: &[Padic], beta: &[Padic]) -> Result<Padic> {
        let t = self.parameter(d, z)?;
        let s = self.double_series(d, &[(self.ctx.one(), alpha.to_vec(), beta.to_vec())])?;
        self.eval_series(&s, &t, self.tail_base(d))
    }

    fn note(&self, p: &CurvePoint, q: &CurvePoint) -> String {
        let dp = self.curve.reduce_mod_p(p).map(|d| d.label()).unwrap_or_default();
        let dq = self.curve.reduce_mod_p(q).map(|d| d.label()).unwrap_or_default();
        format!("tiny {p} -> center {dp}; Frobenius {dp} -> anchor {} -> {dq}; tiny center {dq} -> {q}", self.anchor.label())
    }

    /// int_P^Q sum_k alpha_k omega_k.
    pub fn single_integral_combo(&self, alpha: &[Padic], p: &CurvePoint, q: &CurvePoint) -> Result<ColemanResult> {
        let (dp, dq) = (self.locate(p)?, self.locate(q)?);
        let v = &self.from_anchor_single(&dq, q, alpha)? - &self.from_anchor_single(&dp, p, alpha)?;
        Ok(result(v, self.note(p, q)))
    }

    /// (int_P^Q omega_i)_i for i = 0..2g.
    pub fn single_integrals(&self, p: &CurvePoint, q: &CurvePoint) -> Result<Vec<ColemanResult>> {
        let (dp, dq) = (self.locate(p)?, self.locate(q)?);
        (0..self.dim())
            .map(|i| {
                let a = self.unit(i);
                let v = &self.from_anchor_single(&dq, q, &a)? - &self.from_anchor_single(&dp, p, &a)?;
                Ok(result(v, self.note(p, q)))
            })
            .collect()
    }

    /// int_P^Q omega_alpha omega_beta.
    pub fn double_integral_combo(&self, alpha: &[Padic], beta: &[Padic], p: &CurvePoint, q: &CurvePoint) -> Result<ColemanResult> {
        let (dp, dq) = (self.locate(p)?, self.locate(q)?);
        // X(Q) - X(P) - I_beta(P) (I_alpha(Q) - I_alpha(P)), all from the anchor
        let xq = self.from_anchor_double(&dq, q, alpha, beta)?;
        let xp = self.from_anchor_double(&dp, p, alpha, beta)?;
        let ia = &self.from_anchor_single(&dq, q, alpha)? - &self.from_anchor_single(&dp, p, alpha)?;
        let ib = self.from_anchor_single(&dp, p, beta)?;
        Ok(result(&(&xq - &xp) - &(&ib * &ia), self.note(p, q)))
    }

    pub fn double_integral(&self, i: usize, j: usize, p: &CurvePoint, q: &CurvePoint) -> Result<ColemanResult> {
        self.double_integral_combo(&self.unit(i), &self.unit(j), p, q)
    }

    /// int_P^Q omega_alpha for P, Q in one disk, straight from the local series.
    pub fn tiny_integral(&self, alpha: &[Padic], p: &CurvePoint, q: &CurvePoint) -> Result<ColemanResult> {
        let dp = self.curve.reduce_mod_p(p)?;
        if dp != self.curve.reduce_mod_p(q)? {
            return Err(Error::Invalid("tiny integral between different disks".into()));
        }
        let d = self.disk_data(&dp)?;
        let mut s = Series::zero(&self.ctx.zero(), i64::MAX / 4);
        let mut res = self.ctx.zero();
        for (c, (l, r)) in alpha.iter().zip(d.local.iter().zip(&d.residues)) {
            s = s.add(&l.scale(c));
            res = &res + &(c * r);
        }
        if !res.is_zero() {
            return Err(Error::Residue(res.to_string()));
        }
        let (tp, tq) = (self.parameter(&d, p)?, self.parameter(&d, q)?);
        let v = &self.eval_series(&s, &tq, 0)? - &self.eval_series(&s, &tp, 0)?;
        Ok(result(v, format!("tiny in disk {dp}")))
    }

    /// int_{w(b)}^b omega_i.
    pub fn integral_between_conjugates(&self, i: usize, b: &CurvePoint) -> Result<ColemanResult> {
        self.single_integral_combo(&self.unit(i), &b.involution(), b)
    }
}

fn result(v: Padic, path_note: String) -> ColemanResult {
    let certified_precision = v.abs_precision().unwrap_or(i64::MAX);
    ColemanResult { value: v, certified_precision, path_note }
}

fn dot(a: &[Padic], b: &[Padic]) -> Padic {
    let mut acc = a[0].context().zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_exact_zero() {
            acc = &acc + &(x * y);
        }
    }
    acc
}

fn combo(series: &[Series<Padic>], alpha: &[Padic]) -> Series<Padic> {
    let z = series[0].zero_elem().clone();
    let mut s = Series::zero(&z, i64::MAX / 4);
    for (c, w) in alpha.iter().zip(series) {
        if !c.is_exact_zero() {
            s = s.add(&w.scale(c));
        }
    }
    s
}

/// Pole order at infinity of sum B_n y^-n: B_n(1/u) u^((g+1)n).
fn pole_order_at_infinity(f: &OddFunction, g: i64) -> i64 {
    f.levels
        .iter()
        .filter_map(|(n, b)| b.degree().map(|d| d as i64 - (g + 1) * n))
        .max()
        .unwrap_or(0)
        .max(0)
}

/// Expansion at infinity known below exponent `order`. Only levels whose
/// terms start below `order` are needed.
fn odd_series_at_infinity(f: &OddFunction, x: &Series<Padic>, y: &Series<Padic>, yinv: &Series<Padic>, order: i64) -> Result<Series<Padic>> {
    let g = (y.min_exponent().unsigned_abs() as i64) - 1;
    let z = x.zero_elem().clone();
    let mut out = Series::zero(&z, i64::MAX / 4);
    for (&n, b) in &f.levels {
        let Some(deg) = b.degree() else { continue };
        if (g + 1) * n - deg as i64 >= order {
            continue;
        }
        let yp = if n == -1 { y.clone() } else { yinv.pow(n as u32) };
        out = out.add(&eval_poly_series(b, x).mul(&yp));
    }
    if out.order() < order {
        return Err(Error::Precision(format!("expansion at infinity known only below u^{}", out.order())));
    }
    Ok(out.truncate(order))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::RationalPoint;

    fn engine() -> ColemanEngine {
        let c = HyperellipticCurve::kms_int(31).unwrap();
        let ctx = PadicContext::new(3, 24).unwrap();
        let b = c.reduce_mod_p(&RationalPoint::affine(0, 1).to_padic(&ctx)).unwrap();
        ColemanEngine::new(&c, &ctx, 14, &b).unwrap()
    }

    fn pt(e: &ColemanEngine, s: &str) -> CurvePoint {
        RationalPoint::parse(s).unwrap().to_padic(&e.ctx)
    }

    #[test]
    fn tail_bound_is_a_lower_bound() {
        for p in [3u64, 5, 11] {
            for t in 1..200 {
                let b = series_tail_bound(p, t, 1, 0);
                for n in t..20 * t {
                    assert!(n - 2 * ilog(p, n) >= b, "p={p} t={t} n={n}");
                }
            }
        }
    }

    #[test]
    fn shuffle_and_antisymmetry() {
        let e = engine();
        let b = pt(&e, "(0,1)");
        let z = pt(&e, "(7,440)");
        let si = e.single_integrals(&b, &z).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let ij = e.double_integral(i, j, &b, &z).unwrap().value;
                let ji = e.double_integral(j, i, &b, &z).unwrap().value;
                let prod = &si[i].value * &si[j].value;
                assert!((&ij + &ji).agrees_with(&prod), "shuffle {i} {j}");
            }
        }
        // w^* omega_i = -omega_i and w fixes nothing here
        let wz = z.involution();
        let wb = b.involution();
        let sw = e.single_integrals(&wb, &wz).unwrap();
        for i in 0..5 {
            assert!((&sw[i].value + &si[i].value).is_zero(), "antisymmetry {i}");
        }
    }

    #[test]
    fn teichmuller_routes_agree() {
        let e = engine();
        let b = pt(&e, "(0,1)");
        let wb = b.involution();
        let z = pt(&e, "(1,8)");
        let direct = e.single_integrals(&wb, &b).unwrap();
        let via1 = e.single_integrals(&wb, &z).unwrap();
        let via2 = e.single_integrals(&z, &b).unwrap();
        for i in 0..5 {
            assert!(direct[i].value.agrees_with(&(&via1[i].value + &via2[i].value)));
        }
    }

    #[test]
    fn tiny_matches_global_in_one_disk() {
        let e = engine();
        // (1,8) and (7,440) share the disk over (1, -1)
        let p = pt(&e, "(1,8)");
        let q2 = pt(&e, "(7,440)");
        let a = e.unit(0);
        let t = e.tiny_integral(&a, &p, &q2).unwrap();
        let g = e.single_integral_combo(&a, &p, &q2).unwrap();
        assert!(t.value.agrees_with(&g.value));
        assert!(t.certified_precision >= 10);
    }

    #[test]
    fn path_composition_for_double_integrals() {
        let e = engine();
        let p = pt(&e, "(0,1)");
        let q = pt(&e, "(1,-8)");
        let r = pt(&e, "(-7,440)");
        let sqr = e.single_integrals(&q, &r).unwrap();
        let spq = e.single_integrals(&p, &q).unwrap();
        for (i, j) in [(0, 1), (1, 0), (2, 4), (3, 3)] {
            let pr = e.double_integral(i, j, &p, &r).unwrap().value;
            let pq = e.double_integral(i, j, &p, &q).unwrap().value;
            let qr = e.double_integral(i, j, &q, &r).unwrap().value;
            let rhs = &(&pq + &qr) + &(&sqr[i].value * &spq[j].value);
            assert!(pr.agrees_with(&rhs), "({i},{j})");
        }
    }

    #[test]
    fn same_disk_double_integral_is_nested_tiny() {
        let e = engine();
        let p = pt(&e, "(1,8)");
        let q = pt(&e, "(7,440)");
        let d = e.disk_data(&e.curve.reduce_mod_p(&p).unwrap()).unwrap();
        let (tp, tq) = (e.parameter(&d, &p).unwrap(), e.parameter(&d, &q).unwrap());
        // int_P^t omega_1 as a series, then int_P^Q omega_0 (that)
        let inner = d.local[1].sub(&Series::constant(d.local[1].eval(&tp).unwrap(), i64::MAX / 4));
        let outer = d.omega[0].mul(&inner).formal_integrate().unwrap();
        let want = &outer.eval(&tq).unwrap() - &outer.eval(&tp).unwrap();
        let got = e.double_integral(0, 1, &p, &q).unwrap().value;
        assert!(got.agrees_with(&want));
    }
}
