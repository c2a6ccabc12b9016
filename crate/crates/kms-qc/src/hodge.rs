//! Hodge filtration data at the two points at infinity, computed exactly
//! over Q.
//!
//! At each of inf+ and inf- (parameter u = 1/x) we form
//!   f_i = I(S(eta_i)),  h_ik = sum_j tau_ijk f_j,
//!   g_k = -I(S(sum_i (df_i - eta_i) h_ik + sum_ij tau_ijk f_i eta_j - xi_k)),
//! where S keeps the exponents <= -2 and I integrates termwise. The
//! third-kind differentials xi_k (multiples of omega_g) absorb the residues of
//! the bracket. The tails g_k then decompose as loc(r_k) + sum_i c_ik f_i with
//! r_k a function regular away from infinity and r_k(b) = 0.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::curve::HyperellipticCurve;
use crate::error::{Error, Result};
use crate::frobenius::CohomologyBasisChange;
use crate::poly::Poly;
use crate::series::Series;

type Q = BigRational;
type QSeries = Series<Q>;

fn q(n: i64) -> Q {
    Q::from_integer(n.into())
}

/// tau_ijk for 0 <= i, j < 2g and 0 <= k < d, antisymmetric in (i, j).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairingConstants {
    pub dim: usize,
    pub d: usize,
    tau: Vec<Q>,
}

impl PairingConstants {
    pub fn zero(dim: usize, d: usize) -> Self {
        PairingConstants { dim, d, tau: vec![Q::zero(); dim * dim * d] }
    }

    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dim + j) * self.d + k
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> &Q {
        &self.tau[self.idx(i, j, k)]
    }

    /// Sets tau_ijk = v and tau_jik = -v.
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: Q) {
        let a = self.idx(i, j, k);
        let b = self.idx(j, i, k);
        self.tau[b] = -v.clone();
        self.tau[a] = v;
    }

    /// tau(T0 ^ T1) = -S0, tau(T0 ^ T3) = -tau(T1 ^ T2) = -S1, tau(T2 ^ T3) = -S2.
    pub fn kms() -> Self {
        let mut t = PairingConstants::zero(4, 3);
        t.set(0, 1, 0, q(-1));
        t.set(0, 3, 1, q(-1));
        t.set(1, 2, 1, q(1));
        t.set(2, 3, 2, q(-1));
        t
    }

    pub fn is_antisymmetric(&self) -> bool {
        (0..self.dim).all(|i| (0..self.dim).all(|j| (0..self.d).all(|k| (self.get(i, j, k) + self.get(j, i, k)).is_zero())))
    }

    /// sum_{i<j} cup_ij tau_ijk for each k; all must vanish.
    pub fn cup_defects(&self, cup: &[Vec<Q>]) -> Vec<Q> {
        (0..self.d)
            .map(|k| {
                let mut s = Q::zero();
                for i in 0..self.dim {
                    for j in (i + 1)..self.dim {
                        s += &cup[i][j] * self.get(i, j, k);
                    }
                }
                s
            })
            .collect()
    }

    pub fn to_table(&self) -> Vec<(usize, usize, usize, String)> {
        let mut out = Vec::new();
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                for k in 0..self.d {
                    let v = self.get(i, j, k);
                    if !v.is_zero() {
                        out.push((i, j, k, v.to_string()));
                    }
                }
            }
        }
        out
    }
}

/// Expansions of eta_0..eta_{2g-1} and omega_g at inf+ (sign 1) or inf-,
/// as coefficients of du.
pub fn infinity_differentials(curve: &HyperellipticCurve, change: &CohomologyBasisChange, sign: i64, order: i64) -> Result<(Vec<QSeries>, QSeries)> {
    let g = curve.genus();
    let fq = curve.f_rational();
    let (x, y) = curve.infinity_expansion(&fq, sign, order + 2 * g as i64 + 4)?;
    let base = x.derivative().mul(&y.inverse()?).scale(&Q::new(1.into(), 2.into()));
    let mut omegas = Vec::with_capacity(2 * g + 1);
    let mut xp = Series::constant(Q::one(), i64::MAX / 4);
    for _ in 0..=2 * g {
        omegas.push(xp.mul(&base).truncate(order));
        xp = xp.mul(&x);
    }
    let eta = (0..2 * g)
        .map(|i| {
            let mut s = Series::zero(&Q::zero(), i64::MAX / 4);
            for (k, c) in change.eta(i).iter().enumerate() {
                if !c.is_zero() {
                    s = s.add(&omegas[k].scale(c));
                }
            }
            s
        })
        .collect();
    Ok((eta, omegas[g].clone()))
}

/// I(S(s)): the integral of the part with exponents <= -2.
fn i_s(s: &QSeries) -> QSeries {
    s.tail_section().formal_integrate().expect("no residue after the tail section")
}

#[derive(Clone, Debug)]
pub struct InfinityCharts {
    pub sign: i64,
    pub eta: Vec<QSeries>,
    pub f: Vec<QSeries>,
    /// h[i][k]
    pub h: Vec<Vec<QSeries>>,
    pub g: Vec<QSeries>,
    /// residues of the bracket in g_k before the xi correction
    pub residues: Vec<Q>,
    omega_g: QSeries,
}

fn expansion_order(g: usize) -> i64 {
    4 * g as i64 + 8
}

/// f_{i,x} for x = inf+ and inf- (exponents <= -1 in u).
pub fn chart_f(curve: &HyperellipticCurve, change: &CohomologyBasisChange, sign: i64) -> Result<(Vec<QSeries>, Vec<QSeries>, QSeries)> {
    let (eta, wg) = infinity_differentials(curve, change, sign, expansion_order(curve.genus()))?;
    let f = eta.iter().map(i_s).collect();
    Ok((eta, f, wg))
}

/// [eta_i] cup [eta_j] = sum over inf+- of res(F_i eta_j), F_i a local
/// primitive of eta_i.
pub fn cup_products(curve: &HyperellipticCurve, change: &CohomologyBasisChange) -> Result<Vec<Vec<Q>>> {
    let n = 2 * curve.genus();
    let mut cup = vec![vec![Q::zero(); n]; n];
    for sign in [1, -1] {
        let (eta, _) = infinity_differentials(curve, change, sign, expansion_order(curve.genus()))?;
        let prim = eta.iter().map(|e| e.formal_integrate()).collect::<Result<Vec<_>>>()?;
        for i in 0..n {
            for j in 0..n {
                cup[i][j] += prim[i].mul(&eta[j]).residue();
            }
        }
    }
    Ok(cup)
}

/// The charts at inf+ and inf-, with g_k computed after the xi correction.
pub fn infinity_chart_functions(curve: &HyperellipticCurve, change: &CohomologyBasisChange, tau: &PairingConstants) -> Result<[InfinityCharts; 2]> {
    let n = 2 * curve.genus();
    if tau.dim != n {
        return Err(Error::Invalid(format!("tau has dimension {} but H^1 has dimension {n}", tau.dim)));
    }
    if !tau.is_antisymmetric() {
        return Err(Error::Invalid("tau is not antisymmetric".into()));
    }
    let cup = cup_products(curve, change)?;
    let defects = tau.cup_defects(&cup);
    if let Some((k, d)) = defects.iter().enumerate().find(|(_, d)| !d.is_zero()) {
        return Err(Error::Residue(format!("tau violates the cup-product relation for k = {k} (defect {d})")));
    }
    let mut charts = Vec::with_capacity(2);
    for sign in [1, -1] {
        let (eta, f, wg) = chart_f(curve, change, sign)?;
        let zero = Series::zero(&Q::zero(), i64::MAX / 4);
        let h: Vec<Vec<QSeries>> = (0..n)
            .map(|i| {
                (0..tau.d)
                    .map(|k| {
                        let mut s = zero.clone();
                        for (j, fj) in f.iter().enumerate() {
                            let t = tau.get(i, j, k);
                            if !t.is_zero() {
                                s = s.add(&fj.scale(t));
                            }
                        }
                        s
                    })
                    .collect()
            })
            .collect();
        let brackets: Vec<QSeries> = (0..tau.d).map(|k| bracket(&eta, &f, &h, tau, k)).collect();
        let residues = brackets.iter().map(|b| b.residue()).collect();
        charts.push(InfinityCharts { sign, eta, f, h, g: brackets, residues, omega_g: wg });
    }
    let [plus, minus]: [InfinityCharts; 2] = charts.try_into().unwrap();
    let xi = solve_xi_from(&plus, &minus)?;
    let finish = |mut c: InfinityCharts| {
        c.g = c.g.iter().zip(&xi).map(|(b, x)| i_s(&b.sub(&c.omega_g.scale(x))).neg()).collect();
        c
    };
    Ok([finish(plus), finish(minus)])
}

fn bracket(eta: &[QSeries], f: &[QSeries], h: &[Vec<QSeries>], tau: &PairingConstants, k: usize) -> QSeries {
    let n = eta.len();
    let mut s = Series::zero(&Q::zero(), i64::MAX / 4);
    for i in 0..n {
        s = s.add(&f[i].derivative().sub(&eta[i]).mul(&h[i][k]));
        for j in 0..n {
            let t = tau.get(i, j, k);
            if !t.is_zero() {
                s = s.add(&f[i].mul(&eta[j]).scale(t));
            }
        }
    }
    s
}

/// Multiples c_k of omega_g with the residues of the brackets at both points.
fn solve_xi_from(plus: &InfinityCharts, minus: &InfinityCharts) -> Result<Vec<Q>> {
    let rp = plus.omega_g.residue();
    let rm = minus.omega_g.residue();
    plus.residues
        .iter()
        .zip(&minus.residues)
        .enumerate()
        .map(|(k, (a, b))| {
            if !(a + b).is_zero() {
                return Err(Error::Residue(format!("residues of xi_{k} sum to {} instead of 0", a + b)));
            }
            let c = a / &rp;
            debug_assert_eq!(&c * &rm, *b);
            Ok(c)
        })
        .collect()
}

/// xi_k as coefficient vectors on omega_0..omega_2g.
pub fn solve_xi(curve: &HyperellipticCurve, change: &CohomologyBasisChange, tau: &PairingConstants) -> Result<Vec<Vec<Q>>> {
    let charts = infinity_chart_functions(curve, change, tau)?;
    let [plus, minus] = &charts;
    let c = solve_xi_from(plus, minus)?;
    let g = curve.genus();
    Ok(c
        .into_iter()
        .map(|ck| {
            let mut v = vec![Q::zero(); 2 * g + 1];
            v[g] = ck;
            v
        })
        .collect())
}

/// A function a(x) + b(x) y, regular away from infinity.
#[derive(Clone, Debug)]
pub struct HodgeFunction {
    pub a: Poly<Q>,
    pub b: Poly<Q>,
}

impl HodgeFunction {
    pub fn eval(&self, x: &Q, y: &Q) -> Q {
        self.a.eval(x) + self.b.eval(x) * y
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_empty() && self.b.is_empty()
    }
}

fn fmt_poly(p: &Poly<Q>, var: &str) -> Vec<String> {
    p.coeffs()
        .iter()
        .enumerate()
        .rev()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| match i {
            0 => c.to_string(),
            1 => format!("{c}*{var}"),
            _ => format!("{c}*{var}^{i}"),
        })
        .collect()
}

impl fmt::Display for HodgeFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = fmt_poly(&self.a, "x");
        terms.extend(fmt_poly(&self.b, "x").into_iter().map(|t| format!("({t})*y")));
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + ").replace("+ -", "- "))
        }
    }
}

/// Solves rows * v = rhs exactly; errors if inconsistent or not unique.
pub fn solve_rational(mut rows: Vec<Vec<Q>>, mut rhs: Vec<Q>) -> Result<Vec<Q>> {
    let n = rows.first().map(|r| r.len()).unwrap_or(0);
    let m = rows.len();
    let mut piv = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(k) = (r..m).find(|&k| !rows[k][c].is_zero()) else {
            return Err(Error::Singular);
        };
        rows.swap(r, k);
        rhs.swap(r, k);
        let inv = Q::one() / &rows[r][c];
        for v in rows[r].iter_mut() {
            *v *= &inv;
        }
        rhs[r] *= &inv;
        for k in 0..m {
            if k != r && !rows[k][c].is_zero() {
                let fct = rows[k][c].clone();
                for cc in 0..n {
                    let d = &fct * &rows[r][cc];
                    rows[k][cc] -= d;
                }
                let d = &fct * &rhs[r];
                rhs[k] -= d;
            }
        }
        piv.push(c);
        r += 1;
    }
    if rhs[r..].iter().any(|v| !v.is_zero()) {
        return Err(Error::Invalid("inconsistent principal-part system".into()));
    }
    Ok(rhs[..n].to_vec())
}

/// Decomposes tails (t_+, t_-) as loc(r) + sum_{i >= g} c_i f_i up to a
/// constant, with r(b) = 0. Returns (c on eta_0..eta_{2g-1}, r).
pub fn compute_cr(curve: &HyperellipticCurve, charts: &[InfinityCharts; 2], tails: [&QSeries; 2], b: (&Q, &Q)) -> Result<(Vec<Q>, HodgeFunction)> {
    let g = curve.genus();
    let g1 = g as i64 + 1;
    let pole = tails
        .iter()
        .map(|t| if t.is_zero() { 0 } else { -t.min_exponent() })
        .chain(charts.iter().flat_map(|c| c.f.iter().map(|f| if f.is_zero() { 0 } else { -f.min_exponent() })))
        .max()
        .unwrap_or(0)
        .max(0);
    let na = pole as usize + 1;
    let nb = (pole - g1 + 1).max(0) as usize;
    let nmu = g;
    let nvar = na + nb + nmu;
    let fq = curve.f_rational();
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for (c, tail) in charts.iter().zip(tails) {
        let (x, y) = curve.infinity_expansion(&fq, c.sign, pole + 2)?;
        let ymons: Vec<QSeries> = (0..nb).map(|m| x.pow(m as u32).mul(&y)).collect();
        for e in 1..=pole {
            let mut row = vec![Q::zero(); nvar];
            // x^m = u^-m
            row[e as usize] = Q::one();
            for (m, s) in ymons.iter().enumerate() {
                row[na + m] = s.coeff(-e);
            }
            for i in 0..nmu {
                row[na + nb + i] = c.f[g + i].coeff(-e);
            }
            rows.push(row);
            rhs.push(tail.coeff(-e));
        }
    }
    let mut row = vec![Q::zero(); nvar];
    let mut xp = Q::one();
    for m in 0..na {
        row[m] = xp.clone();
        xp *= b.0;
    }
    let mut xp = Q::one();
    for m in 0..nb {
        row[na + m] = &xp * b.1;
        xp *= b.0;
    }
    rows.push(row);
    rhs.push(Q::zero());
    let sol = solve_rational(rows, rhs)?;
    let a = Poly::new(sol[..na].to_vec(), Q::zero());
    let bb = Poly::new(sol[na..na + nb].to_vec(), Q::zero());
    let mut c = vec![Q::zero(); 2 * g];
    c[g..].clone_from_slice(&sol[na + nb..]);
    Ok((c, HodgeFunction { a, b: bb }))
}

#[derive(Clone, Debug)]
pub struct HodgeConstants {
    /// c_h[i][k]
    pub c_h: Vec<Vec<Q>>,
    pub r_h: Vec<HodgeFunction>,
    /// xi_k on the omega basis
    pub xi: Vec<Vec<Q>>,
    pub tau: PairingConstants,
    /// g_k at inf+ and inf- (principal parts in u = 1/x)
    pub g_plus: Vec<QSeries>,
    pub g_minus: Vec<QSeries>,
}

#[derive(Serialize)]
pub struct HodgeReport {
    pub c_h: Vec<Vec<String>>,
    pub r_h: Vec<String>,
    pub xi: Vec<Vec<String>>,
    pub tau: Vec<(usize, usize, usize, String)>,
    pub g_inf_plus: Vec<String>,
    pub g_inf_minus: Vec<String>,
}

impl HodgeConstants {
    pub fn report(&self) -> HodgeReport {
        let s = |v: &Vec<Q>| v.iter().map(|x| x.to_string()).collect();
        HodgeReport {
            c_h: self.c_h.iter().map(s).collect(),
            r_h: self.r_h.iter().map(|r| r.to_string()).collect(),
            xi: self.xi.iter().map(s).collect(),
            tau: self.tau.to_table(),
            g_inf_plus: self.g_plus.iter().map(|g| tail_in_x(g).to_string()).collect(),
            g_inf_minus: self.g_minus.iter().map(|g| tail_in_x(g).to_string()).collect(),
        }
    }

    pub fn all_c_zero(&self) -> bool {
        self.c_h.iter().flatten().all(|c| c.is_zero())
    }

    pub fn all_xi_zero(&self) -> bool {
        self.xi.iter().flatten().all(|c| c.is_zero())
    }
}

/// A principal part in u = 1/x rewritten as a polynomial in x.
pub fn tail_in_x(s: &QSeries) -> HodgeFunction {
    let deg = if s.is_zero() { 0 } else { (-s.min_exponent()).max(0) as usize };
    let a = Poly::new((0..=deg).map(|m| if m == 0 { Q::zero() } else { s.coeff(-(m as i64)) }).collect(), Q::zero());
    HodgeFunction { a, b: Poly::zero(&Q::zero()) }
}

pub fn hodge_constants(curve: &HyperellipticCurve, tau: &PairingConstants, b: (&Q, &Q)) -> Result<HodgeConstants> {
    let change = CohomologyBasisChange::for_curve(curve);
    let charts = infinity_chart_functions(curve, &change, tau)?;
    let xi = solve_xi(curve, &change, tau)?;
    let n = 2 * curve.genus();
    let mut c_h = vec![vec![Q::zero(); tau.d]; n];
    let mut r_h = Vec::with_capacity(tau.d);
    for k in 0..tau.d {
        let (c, r) = compute_cr(curve, &charts, [&charts[0].g[k], &charts[1].g[k]], b)?;
        for i in 0..n {
            c_h[i][k] = c[i].clone();
        }
        r_h.push(r);
    }
    let [plus, minus] = charts;
    Ok(HodgeConstants { c_h, r_h, xi, tau: tau.clone(), g_plus: plus.g, g_minus: minus.g })
}

/// Pole order at infinity of r (used to check r in H^0(X, O(D[1]))).
pub fn pole_order(curve: &HyperellipticCurve, r: &HodgeFunction) -> i64 {
    let g1 = curve.genus() as i64 + 1;
    let a = r.a.coeffs().iter().rposition(|c| !c.is_zero()).map(|d| d as i64).unwrap_or(0);
    let b = r.b.coeffs().iter().rposition(|c| !c.is_zero()).map(|d| d as i64 + g1).unwrap_or(0);
    a.max(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn kms(a: i64) -> HyperellipticCurve {
        HyperellipticCurve::kms_int(a).unwrap()
    }

    #[test]
    fn kms_constants() {
        let c = kms(31);
        let h = hodge_constants(&c, &PairingConstants::kms(), (&q(0), &q(1))).unwrap();
        assert!(h.all_c_zero());
        assert!(h.all_xi_zero());
        assert!(h.r_h[0].is_zero());
        assert_eq!(h.r_h[1].a.coeffs(), &[q(0), Q::new(1.into(), 2.into())]);
        assert!(h.r_h[1].b.is_empty());
        assert_eq!(h.r_h[1].to_string(), "1/2*x");
        // g_2 = -31/4 x - x^3/12 at both points
        let g2 = tail_in_x(&h.g_plus[2]);
        assert_eq!(g2.a.coeffs(), &[q(0), Q::new((-31).into(), 4.into()), q(0), Q::new((-1).into(), 12.into())]);
        assert_eq!(tail_in_x(&h.g_minus[2]).a.coeffs(), g2.a.coeffs());
    }

    #[test]
    fn basepoint_shifts_only_the_constant() {
        let c = kms(31);
        let h = hodge_constants(&c, &PairingConstants::kms(), (&q(7), &q(440))).unwrap();
        assert!(h.all_c_zero());
        assert_eq!(h.r_h[1].a.coeffs(), &[Q::new((-7).into(), 2.into()), Q::new(1.into(), 2.into())]);
        assert_eq!(h.r_h[1].eval(&q(7), &q(440)), q(0));
    }

    #[test]
    fn charts_are_odd_under_involution() {
        let c = kms(19);
        let change = CohomologyBasisChange::for_curve(&c);
        let (_, fp, _) = chart_f(&c, &change, 1).unwrap();
        let (_, fm, _) = chart_f(&c, &change, -1).unwrap();
        for (a, b) in fp.iter().zip(&fm) {
            assert!(a.add(b).is_zero());
            assert!(a.terms().all(|(k, _)| k <= -1));
        }
        // eta_0, eta_1 holomorphic: no tails
        assert!(fp[0].is_zero() && fp[1].is_zero());
    }

    #[test]
    fn tau_violating_cup_relation_is_rejected() {
        let c = kms(31);
        let change = CohomologyBasisChange::for_curve(&c);
        let mut t = PairingConstants::zero(4, 1);
        t.set(0, 2, 0, q(1));
        let cup = cup_products(&c, &change).unwrap();
        assert!(!cup[0][2].is_zero());
        assert!(matches!(infinity_chart_functions(&c, &change, &t), Err(Error::Residue(_))));
    }

    #[test]
    fn symmetric_and_zero_tails() {
        let c = kms(31);
        let change = CohomologyBasisChange::for_curve(&c);
        let charts = infinity_chart_functions(&c, &change, &PairingConstants::kms()).unwrap();
        let zero = Series::zero(&Q::zero(), i64::MAX / 4);
        let (cz, rz) = compute_cr(&c, &charts, [&zero, &zero], (&q(0), &q(1))).unwrap();
        assert!(cz.iter().all(|x| x.is_zero()) && rz.is_zero());
        // s(x) = 3x^2 + x on both sheets is the global function s
        let s = Series::from_terms(&[(-2, q(3)), (-1, q(1))], i64::MAX / 4, &Q::zero());
        let (cs, rs) = compute_cr(&c, &charts, [&s, &s], (&q(0), &q(1))).unwrap();
        assert!(cs.iter().all(|x| x.is_zero()));
        assert_eq!(rs.a.coeffs(), &[q(0), q(1), q(3)]);
        // (s, -s) with s = x^3: carried by y or by the f_i
        let s3 = Series::from_terms(&[(-3, q(1))], i64::MAX / 4, &Q::zero());
        let (_, r3) = compute_cr(&c, &charts, [&s3, &s3.neg()], (&q(0), &q(1))).unwrap();
        assert!(!r3.b.is_empty());
    }

    #[test]
    fn cup_products_are_antisymmetric() {
        let c = kms(31);
        let cup = cup_products(&c, &CohomologyBasisChange::for_curve(&c)).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(cup[i][j], -cup[j][i].clone());
            }
        }
    }

    /// A tau satisfying the cup relation: random antisymmetric, then one
    /// entry adjusted.
    fn admissible_tau(cup: &[Vec<Q>], vals: &[i64], d: usize) -> PairingConstants {
        let n = cup.len();
        let mut t = PairingConstants::zero(n, d);
        let mut it = vals.iter().cycle();
        let (i0, j0) = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).find(|&(i, j)| !cup[i][j].is_zero()).unwrap();
        for k in 0..d {
            for i in 0..n {
                for j in (i + 1)..n {
                    if (i, j) != (i0, j0) {
                        t.set(i, j, k, q(*it.next().unwrap()));
                    }
                }
            }
            let mut s = Q::zero();
            for i in 0..n {
                for j in (i + 1)..n {
                    s += &cup[i][j] * t.get(i, j, k);
                }
            }
            t.set(i0, j0, k, -s / &cup[i0][j0]);
        }
        t
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn xi_and_c_vanish_for_even_models(
            coeffs in proptest::collection::vec(-5i64..6, 6..9),
            vals in proptest::collection::vec(-3i64..4, 4..8),
        ) {
            let mut f: Vec<Q> = coeffs.iter().map(|&c| q(c)).collect();
            if f.len() % 2 == 1 { f.pop(); }
            f[0] = q(1);
            f.push(q(1));
            let Ok(c) = HyperellipticCurve::new(f) else { return Ok(()); };
            let change = CohomologyBasisChange::for_curve(&c);
            let cup = cup_products(&c, &change).unwrap();
            let tau = admissible_tau(&cup, &vals, 2);
            let b0 = q(0);
            let b1 = q(1);
            let h = hodge_constants(&c, &tau, (&b0, &b1)).unwrap();
            prop_assert!(h.all_xi_zero());
            prop_assert!(h.all_c_zero());
            // r_k lies in H^0(X, O(D[1])) with D the polar divisor of the eta_i
            let (eta, _) = infinity_differentials(&c, &change, 1, 12).unwrap();
            let d = eta.iter().map(|e| -e.min_exponent()).max().unwrap();
            for r in &h.r_h {
                prop_assert!(pole_order(&c, r) <= d + 1);
                prop_assert!(r.eval(&b0, &b1).is_zero());
            }
        }
    }
}
