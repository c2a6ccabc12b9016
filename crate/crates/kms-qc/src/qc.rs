//! Quadratic Chabauty for y^2 = x^6 + a x^4 + a x^2 + 1.
//!
//! The two functions
//!
//! ```text
//! F1(z) = int_b^z (w0 w1 - w1 w0) + 1/2 int_b^z w0 * int_{w(b)}^b w1 - r_0(z)
//! F2(z) = 2 int_b^z (a w1 w2 + 2 w1 w4 - w0 w3) - int_b^z w0 * int_{w(b)}^b w3 - r_1(z)
//! ```
//!
//! (r = r^H, so r_0 = 0 and r_1 = (x - x(b))/2) give
//! G(z) = (F1(z) + A(z)) (F2(z0) + B(z0)) - (F1(z0) + A(z0)) (F2(z) + B(z)),
//! where A, B collect the bad-prime terms. Rational points lie in the zero
//! set of G, which is found disk by disk.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coleman::{series_tail_bound, ColemanEngine, DiskData};
use crate::curve::{eval_poly_series, CurvePoint, DiskKind, HyperellipticCurve, RationalPoint, ResidueDisk};
use crate::error::{Error, Result};
use crate::hodge::{hodge_constants, HodgeConstants, HodgeFunction, PairingConstants};
use crate::padic::{Padic, PadicContext};
use crate::series::Series;

/// Constants attached to one potential type V place.
#[derive(Clone, Debug)]
pub struct BadPrimeEntry {
    pub place: String,
    pub lambda: Padic,
    pub mu: Padic,
    pub alpha: Padic,
    pub pi_b: Padic,
    pub pi_z0: Padic,
}

#[derive(Clone, Debug, Default)]
pub struct BadPrimeData {
    pub entries: Vec<BadPrimeEntry>,
}

#[derive(Deserialize)]
struct BadPrimeFile {
    entries: Vec<BadPrimeFileEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BadPrimeFileEntry {
    place: String,
    lambda: String,
    mu: String,
    alpha: String,
    pi_b: String,
    pi_z0: String,
}

/// The four offsets entering G.
#[derive(Clone, Debug)]
pub struct BadPrimeOffsets {
    /// sum lambda_v (alpha_v - pi_v(b)), added to F1(z)
    pub f1_z: Padic,
    /// sum lambda_v (pi_v(z0) - pi_v(b)), added to F1(z0)
    pub f1_z0: Padic,
    pub f2_z: Padic,
    pub f2_z0: Padic,
}

impl BadPrimeData {
    /// Reads `{"entries": [{"place", "lambda", "mu", "alpha", "pi_b", "pi_z0"}]}`
    /// with every value a rational or a p-adic digit string.
    pub fn from_json(ctx: &PadicContext, text: &str) -> Result<Self> {
        let file: BadPrimeFile = serde_json::from_str(text).map_err(|e| Error::Parse(format!("bad-prime file: {e}")))?;
        let entries = file
            .entries
            .into_iter()
            .map(|e| {
                Ok(BadPrimeEntry {
                    lambda: ctx.parse(&e.lambda)?,
                    mu: ctx.parse(&e.mu)?,
                    alpha: ctx.parse(&e.alpha)?,
                    pi_b: ctx.parse(&e.pi_b)?,
                    pi_z0: ctx.parse(&e.pi_z0)?,
                    place: e.place,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BadPrimeData { entries })
    }

    pub fn offsets(&self, ctx: &PadicContext) -> BadPrimeOffsets {
        let mut o = BadPrimeOffsets { f1_z: ctx.zero(), f1_z0: ctx.zero(), f2_z: ctx.zero(), f2_z0: ctx.zero() };
        for e in &self.entries {
            let at_z = &e.alpha - &e.pi_b;
            let at_z0 = &e.pi_z0 - &e.pi_b;
            o.f1_z = &o.f1_z + &(&e.lambda * &at_z);
            o.f1_z0 = &o.f1_z0 + &(&e.lambda * &at_z0);
            o.f2_z = &o.f2_z + &(&e.mu * &at_z);
            o.f2_z0 = &o.f2_z0 + &(&e.mu * &at_z0);
        }
        o
    }
}

/// Input to the solver. `precision` is the number of digits wanted in the
/// output; the work is carried out at [`QCProblem::working_precision`].
#[derive(Clone, Debug)]
pub struct QCProblem {
    pub curve: HyperellipticCurve,
    pub a: BigRational,
    pub p: u64,
    pub precision: i64,
    pub basepoint: RationalPoint,
    /// Auxiliary point as given (rational or already p-adic).
    pub z0: AuxPoint,
    pub bad_primes: Option<String>,
    pub known_points: Vec<RationalPoint>,
    /// Extra digits on top of the default working precision.
    pub extra_precision: i64,
}

#[derive(Clone, Debug)]
pub enum AuxPoint {
    Rational(RationalPoint),
    /// A point given by a closure-free description: coordinates parsed later
    /// in the working context (e.g. quadratic points via an embedding).
    Text(String),
}

impl std::fmt::Display for AuxPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AuxPoint::Rational(r) => write!(f, "{r}"),
            AuxPoint::Text(s) => write!(f, "{s}"),
        }
    }
}

impl QCProblem {
    /// b = (0,1), z0 = (7,440), no bad-prime data.
    pub fn kms(a: BigRational, p: u64, precision: i64) -> Result<Self> {
        let curve = HyperellipticCurve::kms(a.clone())?;
        if precision < 3 {
            return Err(Error::Invalid(format!("precision {precision} is below 3")));
        }
        curve.check_good_reduction(p)?;
        Ok(QCProblem {
            curve,
            a,
            p,
            precision,
            basepoint: RationalPoint::affine(0, 1),
            z0: AuxPoint::Rational(RationalPoint::affine(7, 440)),
            bad_primes: None,
            known_points: Vec::new(),
            extra_precision: 0,
        })
    }

    pub fn kms_int(a: i64, p: u64, precision: i64) -> Result<Self> {
        Self::kms(BigRational::from_integer(a.into()), p, precision)
    }

    pub fn with_basepoint(mut self, b: RationalPoint) -> Self {
        self.basepoint = b;
        self
    }

    pub fn with_z0(mut self, z0: RationalPoint) -> Self {
        self.z0 = AuxPoint::Rational(z0);
        self
    }

    /// z0 with coordinates to be parsed in the working context, e.g.
    /// `(sqrt(3),16)` together with an embedding.
    pub fn with_z0_text(mut self, z0: &str) -> Self {
        self.z0 = AuxPoint::Text(z0.to_string());
        self
    }

    pub fn with_known_points(mut self, pts: Vec<RationalPoint>) -> Self {
        self.known_points = pts;
        self
    }

    pub fn with_bad_primes(mut self, json: String) -> Self {
        self.bad_primes = Some(json);
        self
    }

    pub fn with_extra_precision(mut self, extra: i64) -> Self {
        self.extra_precision = extra;
        self
    }

    /// N + g ceil(log_p N) + 4 digits, plus any requested extra.
    pub fn working_precision(&self) -> i64 {
        let n = self.precision;
        let g = self.curve.genus() as i64;
        let mut c = 0;
        let mut q = 1i64;
        while q < n {
            q = q.saturating_mul(self.p as i64);
            c += 1;
        }
        n + g * c + 4 + self.extra_precision
    }

    /// The sixteen known rational points of the a = 31 curve.
    pub fn example_one_points() -> Vec<RationalPoint> {
        let mut v = Vec::new();
        for (x, y) in [((0, 1), (1, 1)), ((1, 1), (8, 1)), ((7, 1), (440, 1)), ((1, 7), (440, 343))] {
            for sx in [1, -1] {
                if x.0 == 0 && sx == -1 {
                    continue;
                }
                for sy in [1, -1] {
                    v.push(RationalPoint::from_ratios((sx * x.0, x.1), (sy * y.0, y.1)));
                }
            }
        }
        v.push(RationalPoint::InfinityPlus);
        v.push(RationalPoint::InfinityMinus);
        v
    }

    fn validate(&self) -> Result<()> {
        if !self.curve.is_on_curve(&self.basepoint) {
            return Err(Error::Invalid(format!("basepoint {} is not on the curve", self.basepoint)));
        }
        if let AuxPoint::Rational(z0) = &self.z0 {
            if !self.curve.is_on_curve(z0) {
                return Err(Error::Invalid(format!("z0 = {z0} is not on the curve")));
            }
            if *z0 == self.basepoint || *z0 == self.basepoint.involution() {
                return Err(Error::Degenerate(format!("z0 = {z0} must differ from b and w(b); G vanishes identically")));
            }
        }
        for pt in &self.known_points {
            if !self.curve.is_on_curve(pt) {
                return Err(Error::Invalid(format!("known point {pt} is not on the curve")));
            }
        }
        Ok(())
    }
}

/// Integrals from b and the Hodge data needed to evaluate F1, F2 and G.
pub struct QCSolver {
    pub problem: QCProblem,
    pub engine: ColemanEngine,
    pub hodge: HodgeConstants,
    pub ctx: PadicContext,
    /// int_{w(b)}^b omega_i
    pub conjugate_integrals: Vec<Padic>,
    pub z0: CurvePoint,
    pub offsets: BadPrimeOffsets,
    f1: FSpec,
    f2: FSpec,
    /// F_i(z0) plus the bad-prime offsets
    column_z0: (Padic, Padic),
    cache: Mutex<HashMap<ResidueDisk, Arc<DiskData>>>,
}

/// sum c * int w_alpha w_beta + int w_lin - r, all from b.
#[derive(Clone)]
struct FSpec {
    terms: Vec<(Padic, Vec<Padic>, Vec<Padic>)>,
    lin: Vec<Padic>,
    r: HodgeFunction,
    /// value of the uncorrected series at b
    at_b: Padic,
}

/// G on one residue disk as a series in the disk parameter.
#[derive(Clone, Debug)]
pub struct DiskExpansion {
    pub disk: ResidueDisk,
    pub f1: Series<Padic>,
    pub f2: Series<Padic>,
    pub g: Series<Padic>,
    /// base of the coefficient tail bound v(g_n) >= base - 2 log_p n
    pub tail_base: i64,
}

impl QCSolver {
    pub fn new(problem: QCProblem) -> Result<Self> {
        Self::with_embedding(problem, None)
    }

    /// Like [`QCSolver::new`], using `emb` to place quadratic coordinates of
    /// z0 in Q_p.
    /// The working precision is raised until F1(z0), F2(z0) are certified to it.
    pub fn with_embedding(problem: QCProblem, emb: Option<&crate::curve::SqrtEmbedding>) -> Result<Self> {
        problem.validate()?;
        let work = problem.working_precision();
        // the product reductions cost about 2 log_p of their pole order
        let g = problem.curve.genus();
        let terms = crate::frobenius::terms_for(problem.p, work, g) as i64;
        let top = 2 * problem.p as i64 * (2 * terms + 3) + 2 * g as i64 + 2;
        let mut target = work + 2 * crate::frobenius::ilog(problem.p, top);
        for _ in 0..3 {
            let solver = Self::build(problem.clone(), emb, target)?;
            let (c1, c2) = solver.z0_column();
            let got = c1.precision_bound().min(c2.precision_bound());
            if got >= work {
                return solver.check_degenerate();
            }
            target += work - got;
        }
        Err(Error::Precision(format!("could not certify F1(z0), F2(z0) to {work} digits")))
    }

    fn check_degenerate(self) -> Result<Self> {
        let (c1, c2) = self.z0_column();
        if !(c1.is_zero() && c2.is_zero()) {
            return Ok(self);
        }
        Err(Error::Degenerate(format!(
            "F1(z0) and F2(z0) are both O({}^{}) for z0 = {}: G vanishes identically",
            self.ctx.p(),
            c1.precision_bound().min(c2.precision_bound()),
            self.problem.z0
        )))
    }

    fn build(problem: QCProblem, emb: Option<&crate::curve::SqrtEmbedding>, work: i64) -> Result<Self> {
        // reducing the products F_j dF_i loses tracked digits roughly in
        // proportion to the number of Frobenius terms
        let ctx = PadicContext::new(problem.p, (2 * work + 10) as u32)?;
        let curve = &problem.curve;
        let b = problem.basepoint.to_padic(&ctx);
        let (bx, by) = match &problem.basepoint {
            RationalPoint::Affine { x, y } => (x.clone(), y.clone()),
            _ => return Err(Error::Unsupported("basepoint at infinity".into())),
        };
        let anchor = curve.reduce_mod_p(&b)?;
        if anchor.kind != DiskKind::Affine {
            return Err(Error::Unsupported(format!("basepoint disk {anchor} is a Weierstrass disk")));
        }
        let z0 = match &problem.z0 {
            AuxPoint::Rational(r) => r.to_padic(&ctx),
            AuxPoint::Text(s) => crate::curve::parse_point(s, &ctx, emb)?,
        };
        if let Some(res) = curve.equation_residual(&z0) {
            if !res.is_zero() {
                return Err(Error::Invalid(format!("z0 = {z0} is not on the curve")));
            }
        }
        let z0_disk = curve.reduce_mod_p(&z0)?;
        if z0_disk.kind == DiskKind::Weierstrass {
            return Err(Error::Unsupported(format!("z0 lies in the Weierstrass disk {z0_disk}")));
        }

        let (engine, hodge) = rayon::join(
            || ColemanEngine::new(curve, &ctx, work, &anchor),
            || hodge_constants(curve, &PairingConstants::kms(), (&bx, &by)),
        );
        let (engine, hodge) = (engine?, hodge?);
        let conjugate_integrals = engine.single_integrals(&b.involution(), &b)?.into_iter().map(|r| r.value).collect::<Vec<_>>();

        let q = |n: i64, d: i64| ctx.from_ratio(n, d);
        let unit = |i: usize| -> Vec<Padic> { (0..5).map(|k| if k == i { ctx.one() } else { ctx.zero() }).collect() };
        let a = ctx.from_rational(&problem.a);
        let mut eta2 = unit(2);
        eta2[2] = a.clone();
        eta2[4] = ctx.from_int(2);
        let scaled = |c: &Padic, i: usize| -> Vec<Padic> { unit(i).iter().map(|u| u * c).collect() };
        let half_k1 = &q(1, 2) * &conjugate_integrals[1];
        let f1 = FSpec {
            terms: vec![(ctx.one(), unit(0), unit(1)), (-ctx.one(), unit(1), unit(0))],
            lin: scaled(&half_k1, 0),
            r: hodge.r_h[0].clone(),
            at_b: ctx.zero(),
        };
        let f2 = FSpec {
            terms: vec![(ctx.from_int(2), unit(1), eta2), (ctx.from_int(-2), unit(0), unit(3))],
            lin: scaled(&-&conjugate_integrals[3], 0),
            r: hodge.r_h[1].clone(),
            at_b: ctx.zero(),
        };
        let offsets = match &problem.bad_primes {
            Some(json) => BadPrimeData::from_json(&ctx, json)?.offsets(&ctx),
            None => BadPrimeData::default().offsets(&ctx),
        };
        let mut solver = QCSolver {
            problem,
            engine,
            hodge,
            ctx,
            conjugate_integrals,
            z0,
            offsets,
            f1,
            f2,
            column_z0: (ctx.zero(), ctx.zero()),
            cache: Mutex::new(HashMap::new()),
        };
        // normalize so that F_i(b) = 0
        let bd = solver.disk(&anchor)?;
        let tb = solver.engine.parameter(&bd, &b)?;
        let base = solver.engine.tail_base(&bd);
        let s1 = solver.raw_series(&bd, &solver.f1)?;
        let s2 = solver.raw_series(&bd, &solver.f2)?;
        solver.f1.at_b = solver.engine.eval_series(&s1, &tb, base)?;
        solver.f2.at_b = solver.engine.eval_series(&s2, &tb, base)?;
        let (f1z0, f2z0) = solver.eval_f(&solver.z0.clone())?;
        solver.column_z0 = (&f1z0 + &solver.offsets.f1_z0, &f2z0 + &solver.offsets.f2_z0);
        Ok(solver)
    }

    pub fn context(&self) -> &PadicContext {
        &self.ctx
    }

    /// The column (F1(z0) + A(z0), F2(z0) + B(z0)).
    pub fn z0_column(&self) -> (&Padic, &Padic) {
        (&self.column_z0.0, &self.column_z0.1)
    }

    pub fn disk(&self, disk: &ResidueDisk) -> Result<Arc<DiskData>> {
        if let Some(d) = self.cache.lock().unwrap().get(disk) {
            return Ok(d.clone());
        }
        let d = Arc::new(self.engine.disk_data(disk)?);
        self.cache.lock().unwrap().insert(*disk, d.clone());
        Ok(d)
    }

    fn raw_series(&self, d: &DiskData, spec: &FSpec) -> Result<Series<Padic>> {
        let e = &self.engine;
        let mut s = e.double_series(d, &spec.terms)?;
        // int_b^z w_a w_b = X(z) - X(b) - I_b(b) (I_a(z) - I_a(b)) in anchor terms;
        // the constants are absorbed into at_b
        let b = self.problem.basepoint.to_padic(&self.ctx);
        let bd = self.disk(&self.curve().reduce_mod_p(&b)?)?;
        let tb = e.parameter(&bd, &b)?;
        for (c, alpha, beta) in &spec.terms {
            let ib = e.eval_series(&e.single_series(&bd, beta)?, &tb, e.tail_base(&bd))?;
            s = s.sub(&e.single_series(d, alpha)?.scale(&(c * &ib)));
        }
        Ok(s.add(&e.single_series(d, &spec.lin)?))
    }

    fn curve(&self) -> &HyperellipticCurve {
        &self.problem.curve
    }

    /// r(x, y) along the local expansion of `d`.
    fn hodge_series(&self, d: &DiskData, r: &HodgeFunction) -> Series<Padic> {
        let emb = |p: &crate::poly::Poly<BigRational>| p.map(&self.ctx.zero(), |c| self.ctx.from_rational(c));
        let a = eval_poly_series(&emb(&r.a), &d.x);
        let b = eval_poly_series(&emb(&r.b), &d.x).mul(&d.y);
        a.add(&b).truncate(d.order)
    }

    fn f_series(&self, d: &DiskData, spec: &FSpec) -> Result<Series<Padic>> {
        let s = self.raw_series(d, spec)?;
        let c = Series::constant(spec.at_b.clone(), i64::MAX / 4);
        let s = s.sub(&c).sub(&self.hodge_series(d, &spec.r)).truncate(d.order);
        // at infinity the poles of the double integrals cancel against r
        if s.min_exponent() >= 0 {
            return Ok(s);
        }
        for k in s.min_exponent()..0 {
            let c = s.coeff(k);
            if !c.is_zero() {
                return Err(Error::Invalid(format!("F has a pole with coefficient {c} at t^{k} in disk {}", d.disk)));
            }
        }
        let c = (0..s.order()).map(|k| s.coeff(k)).collect();
        Ok(Series::new(0, c, s.order(), &self.ctx.zero()))
    }

    /// (F1, F2) at a point of good reduction.
    pub fn eval_f(&self, z: &CurvePoint) -> Result<(Padic, Padic)> {
        let disk = self.curve().reduce_mod_p(z)?;
        let d = self.disk(&disk)?;
        let t = self.engine.parameter(&d, z)?;
        let base = self.engine.tail_base(&d);
        let s1 = self.f_series(&d, &self.f1)?;
        let s2 = self.f_series(&d, &self.f2)?;
        Ok((self.engine.eval_series(&s1, &t, base)?, self.engine.eval_series(&s2, &t, base)?))
    }

    pub fn eval_f1(&self, z: &CurvePoint) -> Result<Padic> {
        Ok(self.eval_f(z)?.0)
    }

    pub fn eval_f2(&self, z: &CurvePoint) -> Result<Padic> {
        Ok(self.eval_f(z)?.1)
    }

    pub fn eval_g(&self, z: &CurvePoint) -> Result<Padic> {
        let (f1, f2) = self.eval_f(z)?;
        Ok(self.combine(&f1, &f2))
    }

    fn combine(&self, f1: &Padic, f2: &Padic) -> Padic {
        let (c1, c2) = &self.column_z0;
        &(&(f1 + &self.offsets.f1_z) * c2) - &(c1 * &(f2 + &self.offsets.f2_z))
    }

    /// F1, F2 and G as series in the local parameter of `disk`.
    pub fn expand_g_on_disk(&self, disk: &ResidueDisk) -> Result<DiskExpansion> {
        let d = self.disk(disk)?;
        let f1 = self.f_series(&d, &self.f1)?;
        let f2 = self.f_series(&d, &self.f2)?;
        let (c1, c2) = &self.column_z0;
        let o1 = Series::constant(self.offsets.f1_z.clone(), i64::MAX / 4);
        let o2 = Series::constant(self.offsets.f2_z.clone(), i64::MAX / 4);
        let g = f1.add(&o1).scale(c2).sub(&f2.add(&o2).scale(c1)).truncate(d.order);
        let vmin = [c1, c2, &self.offsets.f1_z, &self.offsets.f2_z, &self.f1.at_b, &self.f2.at_b]
            .iter()
            .map(|c| c.valuation_bound().min(0))
            .min()
            .unwrap_or(0);
        let tail_base = self.engine.tail_base(&d) + 2 * vmin - 2;
        Ok(DiskExpansion { disk: *disk, f1, f2, g, tail_base })
    }

    /// Candidate points of one disk.
    pub fn solve_disk(&self, disk: &ResidueDisk) -> Result<Vec<CandidatePoint>> {
        let ex = self.expand_g_on_disk(disk)?;
        let coeffs: Vec<Padic> = (0..ex.g.order()).map(|k| ex.g.coeff(k)).collect();
        let roots = find_roots(&coeffs, ex.tail_base, self.ctx.p(), self.engine.target + 4)
            .map_err(|e| match e {
                Error::Precision(m) => Error::Precision(format!("disk {disk}: {m}")),
                e => e,
            })?;
        let center = self.curve().disk_center(&self.ctx, disk)?;
        let mut out: Vec<CandidatePoint> = roots
            .into_iter()
            .map(|r| self.candidate(disk, &center, r))
            .collect::<Result<_>>()?;
        out.sort_by(|a, b| a.sort_key.cmp(&b.sort_key));
        Ok(out)
    }

    fn candidate(&self, disk: &ResidueDisk, center: &CurvePoint, r: LocalRoot) -> Result<CandidatePoint> {
        let sort_key = r.t.truncate(self.problem.precision).lift().to_integer();
        let x = match (disk.kind, center) {
            (DiskKind::Infinite, _) => {
                if r.t.is_zero() {
                    None
                } else {
                    Some(r.t.inv()?)
                }
            }
            (_, CurvePoint::Affine { x: x0, .. }) => Some(x0 + &r.t),
            _ => unreachable!(),
        };
        let x = x.map(|x| x.truncate(self.problem.precision));
        let point = match &x {
            None => CandidateX::Infinity(if disk.infinity_sign() > 0 { "inf+".into() } else { "inf-".into() }),
            Some(x) => CandidateX::Value(x.clone()),
        };
        let matched = self.match_known(disk, &point);
        Ok(CandidatePoint { disk: *disk, x: point, multiplicity: r.multiplicity, matched, sort_key })
    }

    fn match_known(&self, disk: &ResidueDisk, x: &CandidateX) -> Option<RationalPoint> {
        self.problem.known_points.iter().find_map(|pt| {
            let pp = pt.to_padic(&self.ctx);
            if self.curve().reduce_mod_p(&pp).ok()? != *disk {
                return None;
            }
            match (x, &pp) {
                (CandidateX::Infinity(_), CurvePoint::Infinity(_)) => Some(pt.clone()),
                (CandidateX::Value(v), CurvePoint::Affine { x, .. }) if v.agrees_with(x) => Some(pt.clone()),
                _ => None,
            }
        })
    }

    /// Every residue disk, in parallel; per-disk failures are recorded.
    pub fn solve(&self) -> Result<QCReport> {
        let disks = self.curve().enumerate_disks(self.ctx.p())?;
        let results: Vec<(ResidueDisk, Result<Vec<CandidatePoint>>)> =
            disks.par_iter().map(|d| (*d, self.solve_disk(d))).collect();
        let mut report = QCReport {
            curve: format!("y^2 = x^6 + {a}*x^4 + {a}*x^2 + 1", a = self.problem.a),
            a: self.problem.a.to_string(),
            p: self.ctx.p(),
            precision: self.problem.precision,
            working_precision: self.engine.target,
            basepoint: self.problem.basepoint.to_string(),
            z0: self.problem.z0.to_string(),
            disks: Vec::new(),
        };
        let mut all_precision = true;
        for (disk, res) in results {
            let entry = match res {
                Ok(roots) => {
                    all_precision = false;
                    DiskReport { center: disk.label(), kind: kind_name(disk.kind).into(), roots: roots.iter().map(|c| c.report()).collect(), error: None }
                }
                Err(e) => {
                    if !matches!(e, Error::Precision(_)) {
                        all_precision = false;
                    }
                    DiskReport { center: disk.label(), kind: kind_name(disk.kind).into(), roots: Vec::new(), error: Some(e.to_string()) }
                }
            };
            report.disks.push(entry);
        }
        if all_precision {
            return Err(Error::Precision("G is identically zero on every disk at the working precision".into()));
        }
        Ok(report)
    }
}

fn kind_name(k: DiskKind) -> &'static str {
    match k {
        DiskKind::Affine => "affine",
        DiskKind::Weierstrass => "weierstrass",
        DiskKind::Infinite => "infinite",
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Multiplicity {
    Simple,
    Flagged,
}

#[derive(Clone, Debug)]
pub enum CandidateX {
    Value(Padic),
    Infinity(String),
}

#[derive(Clone, Debug)]
pub struct CandidatePoint {
    pub disk: ResidueDisk,
    pub x: CandidateX,
    pub multiplicity: Multiplicity,
    pub matched: Option<RationalPoint>,
    sort_key: BigInt,
}

impl CandidatePoint {
    pub fn x_value(&self) -> Option<&Padic> {
        match &self.x {
            CandidateX::Value(v) => Some(v),
            CandidateX::Infinity(_) => None,
        }
    }

    fn report(&self) -> RootReport {
        let (x, precision) = match &self.x {
            CandidateX::Value(v) => (v.to_series_string(), v.abs_precision()),
            CandidateX::Infinity(s) => (s.clone(), None),
        };
        RootReport { x, precision, multiplicity: self.multiplicity.clone(), matched: self.matched.as_ref().map(|m| m.to_string()) }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RootReport {
    pub x: String,
    pub precision: Option<i64>,
    pub multiplicity: Multiplicity,
    pub matched: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiskReport {
    pub center: String,
    pub kind: String,
    pub roots: Vec<RootReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct QCReport {
    pub curve: String,
    pub a: String,
    pub p: u64,
    pub precision: i64,
    pub working_precision: i64,
    pub basepoint: String,
    pub z0: String,
    pub disks: Vec<DiskReport>,
}

impl QCReport {
    /// x-values of each disk family {P, w(P)}, merged and deduplicated.
    pub fn families(&self) -> Vec<(String, Vec<&RootReport>)> {
        let mut out: Vec<(String, Vec<&RootReport>)> = Vec::new();
        for d in &self.disks {
            let fam = family_label(&d.center);
            let idx = match out.iter().position(|(f, _)| *f == fam) {
                Some(i) => i,
                None => {
                    out.push((fam, Vec::new()));
                    out.len() - 1
                }
            };
            for r in &d.roots {
                let x = if r.x.starts_with("inf") { "inf±".to_string() } else { r.x.clone() };
                if !out[idx].1.iter().any(|s| s.x == x || (x == "inf±" && s.x.starts_with("inf"))) {
                    out[idx].1.push(r);
                }
            }
        }
        out
    }

    /// Candidate points (not x-values) with no matching known rational point.
    pub fn non_rational_count(&self) -> usize {
        self.disks.iter().map(|d| d.roots.iter().filter(|r| r.matched.is_none()).count()).sum()
    }

    /// Table with one row per x-value, grouped by disk family.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{}  p = {}  precision {}  b = {}  z0 = {}", self.curve, self.p, self.precision, self.basepoint, self.z0);
        let fams = self.families();
        let w = fams.iter().flat_map(|(_, rs)| rs.iter().map(|r| r.x.len())).max().unwrap_or(4).max(4);
        let _ = writeln!(s, "{:<12} | {:<w$} | rational", "disk", "x(z)");
        for (fam, rs) in &fams {
            let _ = writeln!(s, "{}", "-".repeat(w + 28));
            let errs: Vec<&String> = self.disks.iter().filter(|d| family_label(&d.center) == *fam).filter_map(|d| d.error.as_ref()).collect();
            if rs.is_empty() {
                let note = errs.first().map(|e| e.as_str()).unwrap_or("no roots");
                let _ = writeln!(s, "{fam:<12} | {note}");
                continue;
            }
            for (k, r) in rs.iter().enumerate() {
                let label = if k == 0 { fam.as_str() } else { "" };
                let x = if r.x.starts_with("inf") { "inf±" } else { r.x.as_str() };
                let mut m = r.matched.as_ref().map(|m| family_point(m)).unwrap_or_default();
                if r.multiplicity == Multiplicity::Flagged {
                    m.push_str(" (flagged)");
                }
                let _ = writeln!(s, "{label:<12} | {x:<w$} | {m}");
            }
        }
        let _ = writeln!(s, "{}", "-".repeat(w + 28));
        let _ = writeln!(s, "non-rational candidates: {}", self.non_rational_count());
        s
    }
}

/// "(1, 2)" -> "(1, ±2)"; "inf+" -> "inf±".
fn family_label(label: &str) -> String {
    if label.starts_with("inf") {
        return "inf±".into();
    }
    match label.trim_matches(|c| c == '(' || c == ')').split_once(", ") {
        Some((x, "0")) => format!("({x}, 0)"),
        Some((x, _)) => format!("({x}, ±y)").replace("±y", &format!("±{}", min_residue(label))),
        None => label.into(),
    }
}

fn min_residue(label: &str) -> String {
    label.trim_matches(|c| c == '(' || c == ')').split_once(", ").map(|(_, y)| y.trim_start_matches('-').to_string()).unwrap_or_default()
}

fn family_point(p: &str) -> String {
    if p.starts_with("inf") {
        return "inf±".into();
    }
    match p.trim_matches(|c| c == '(' || c == ')').split_once(", ") {
        Some((x, y)) => format!("({x}, ±{})", y.trim_start_matches('-')),
        None => p.into(),
    }
}

/// A zero t of a power series in p Z_p, with t = prefix + O(p^k) for flagged roots.
#[derive(Clone, Debug)]
pub struct LocalRoot {
    pub t: Padic,
    pub multiplicity: Multiplicity,
}

/// h(s) = sum h_n s^n with v(h_n) >= slope n + base - 2 log_p n beyond the
/// known coefficients; the original parameter is t = prefix + p^scale s.
struct Node {
    coeffs: Vec<Padic>,
    slope: i64,
    base: i64,
    prefix: Padic,
    scale: i64,
}

enum Degree {
    Known(usize),
    Unknown,
}

impl Node {
    fn tail(&self, p: u64) -> i64 {
        series_tail_bound(p, self.coeffs.len() as i64, self.slope, self.base)
    }

    /// Strassmann degree: the last index of minimal valuation.
    fn degree(&self, p: u64) -> Degree {
        let vmin = self.coeffs.iter().filter_map(|c| c.valuation()).min();
        let Some(vmin) = vmin else { return Degree::Unknown };
        let uncertain = self.coeffs.iter().any(|c| c.valuation().is_none() && c.precision_bound() <= vmin);
        if uncertain || self.tail(p) <= vmin {
            return Degree::Unknown;
        }
        let d = self.coeffs.iter().rposition(|c| c.valuation() == Some(vmin)).unwrap();
        Degree::Known(d)
    }

    fn eval(&self, s: &Padic, p: u64) -> (Padic, Padic) {
        let ctx = s.context();
        let (mut h, mut dh) = (ctx.zero(), ctx.zero());
        for (n, c) in self.coeffs.iter().enumerate().rev() {
            h = &(&h * s) + c;
            if n > 0 {
                dh = &(&dh * s) + &c.mul_int(n as i64);
            }
        }
        let t = self.tail(p);
        (h.truncate(t), dh.truncate(t))
    }

    /// h(r + p s)
    fn child(&self, r: u64, p: u64) -> Node {
        let ctx = self.coeffs[0].context();
        let n = self.coeffs.len();
        let rr = ctx.from_int(r as i64);
        // Taylor shift by r, then scale s -> p s
        let mut c = self.coeffs.clone();
        for i in 0..n {
            for j in (i..n - 1).rev() {
                let t = &c[j + 1] * &rr;
                c[j] = &c[j] + &t;
            }
        }
        let tail = self.tail(p);
        let coeffs = c.into_iter().enumerate().map(|(k, v)| v.shift(k as i64).truncate(tail + k as i64)).collect();
        let prefix = &self.prefix + &ctx.from_int(r as i64).shift(self.scale);
        Node { coeffs, slope: self.slope + 1, base: self.base - 2, prefix, scale: self.scale + 1 }
    }
}

/// Zeros in p Z_p of G(t) = sum g_n t^n, given g_0..g_{T-1} and
/// v(g_n) >= tail_base - 2 floor(log_p n) for n >= T.
pub fn find_roots(g: &[Padic], tail_base: i64, p: u64, max_depth: i64) -> Result<Vec<LocalRoot>> {
    if g.iter().all(|c| c.is_zero()) {
        return Err(Error::Precision("series is identically zero at certified precision".into()));
    }
    let ctx = g[0].context();
    let coeffs = g.iter().enumerate().map(|(n, c)| c.shift(n as i64)).collect();
    let root = Node { coeffs, slope: 1, base: tail_base, prefix: ctx.zero(), scale: 1 };
    let mut out = Vec::new();
    let mut stack = vec![root];
    while let Some(node) = stack.pop() {
        match node.degree(p) {
            Degree::Known(0) => {}
            Degree::Known(1) => out.push(newton(&node, p)?),
            Degree::Known(_) if node.scale < max_depth => {
                for r in (0..p).rev() {
                    stack.push(node.child(r, p));
                }
            }
            _ => out.push(LocalRoot { t: node.prefix.truncate(node.scale), multiplicity: Multiplicity::Flagged }),
        }
    }
    Ok(out)
}

fn newton(node: &Node, p: u64) -> Result<LocalRoot> {
    let ctx = node.prefix.context();
    let mut s = ctx.zero();
    for _ in 0..(4 * ctx.precision() as usize + 8) {
        let (h, dh) = node.eval(&s, p);
        let next = &s - &(&h / &dh);
        let done = next.agrees_with(&s) && next.precision_bound() == s.precision_bound();
        s = next;
        if done && h.is_indistinguishable_zero() {
            break;
        }
    }
    let t = &node.prefix + &s.shift(node.scale);
    Ok(LocalRoot { t, multiplicity: Multiplicity::Simple })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::sync::OnceLock;

    // planted polynomials have no tail
    const EXACT_TAIL: i64 = 1000;

    fn solver() -> &'static QCSolver {
        static S: OnceLock<QCSolver> = OnceLock::new();
        S.get_or_init(|| QCSolver::new(QCProblem::kms_int(31, 3, 7).unwrap()).unwrap())
    }

    /// Coefficients of prod (t - r_i) * (1 + t), exact at the context cap.
    fn planted(ctx: &PadicContext, roots: &[i64]) -> Vec<Padic> {
        let mut c = vec![ctx.one(), ctx.one()];
        for r in roots {
            let mut next = vec![ctx.zero(); c.len() + 1];
            for (i, a) in c.iter().enumerate() {
                next[i + 1] = &next[i + 1] + a;
                next[i] = &next[i] - &a.mul_int(*r);
            }
            c = next;
        }
        c
    }

    #[test]
    fn simple_root_at_zero() {
        let ctx = PadicContext::new(3, 20).unwrap();
        let roots = find_roots(&planted(&ctx, &[0]), EXACT_TAIL, 3, 20).unwrap();
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].multiplicity, Multiplicity::Simple);
        assert!(roots[0].t.is_zero());
    }

    #[test]
    fn planted_roots_recovered() {
        let ctx = PadicContext::new(3, 20).unwrap();
        let mut roots: Vec<i64> = find_roots(&planted(&ctx, &[3, 12, 5]), EXACT_TAIL, 3, 20)
            .unwrap()
            .iter()
            .map(|r| r.t.centered_lift().unwrap().try_into().unwrap())
            .collect();
        roots.sort();
        assert_eq!(roots, vec![3, 12]);
    }

    #[test]
    fn double_root_is_flagged() {
        let ctx = PadicContext::new(3, 12).unwrap();
        let roots = find_roots(&planted(&ctx, &[3, 3]), EXACT_TAIL, 3, 8).unwrap();
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].multiplicity, Multiplicity::Flagged);
        assert!(roots[0].t.agrees_with(&ctx.from_int(3)));
    }

    #[test]
    fn zero_series_is_a_precision_error() {
        let ctx = PadicContext::new(3, 12).unwrap();
        let g = vec![ctx.big_o(5); 6];
        assert!(matches!(find_roots(&g, 0, 3, 8), Err(Error::Precision(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn distinct_planted_roots(ks in proptest::collection::btree_set(0i64..5, 1..4), p in prop::sample::select(vec![5u64, 7])) {
            let ctx = PadicContext::new(p, 16).unwrap();
            // roots p k with k distinct mod p, plus a root outside p Z_p
            let mut planted_roots: Vec<i64> = ks.iter().map(|k| p as i64 * k).collect();
            planted_roots.push(1);
            let found = find_roots(&planted(&ctx, &planted_roots), EXACT_TAIL, p, 16).unwrap();
            prop_assert_eq!(found.len(), ks.len());
            for r in &found {
                prop_assert_eq!(&r.multiplicity, &Multiplicity::Simple);
                let v: i64 = r.t.centered_lift().unwrap().try_into().unwrap();
                prop_assert!(planted_roots[..ks.len()].contains(&v));
            }
        }
    }

    #[test]
    fn f_vanishes_at_b() {
        let s = solver();
        let b = RationalPoint::affine(0, 1).to_padic(s.context());
        let (f1, f2) = s.eval_f(&b).unwrap();
        assert!(f1.is_zero() && f2.is_zero());
        assert!(s.eval_g(&s.z0).unwrap().is_zero());
    }

    #[test]
    fn disk_series_matches_direct_value() {
        let s = solver();
        let z = RationalPoint::affine(7, 440).to_padic(s.context());
        let disk = s.problem.curve.reduce_mod_p(&z).unwrap();
        let ex = s.expand_g_on_disk(&disk).unwrap();
        let t = &z.x().unwrap().clone() - s.problem.curve.disk_center(s.context(), &disk).unwrap().x().unwrap();
        let v = ex.g.eval(&t).unwrap();
        assert!(v.agrees_with(&s.eval_g(&z).unwrap()));
        // the constant term of the disk of b is G at its Teichmüller center
        let b = RationalPoint::affine(0, 1).to_padic(s.context());
        let bd = s.problem.curve.reduce_mod_p(&b).unwrap();
        let ex = s.expand_g_on_disk(&bd).unwrap();
        let center = s.problem.curve.disk_center(s.context(), &bd).unwrap();
        assert!(ex.g.coeff(0).agrees_with(&s.eval_g(&center).unwrap()));
    }

    #[test]
    fn degenerate_auxiliary_points() {
        let base = || QCProblem::kms_int(31, 3, 5).unwrap();
        let e = QCSolver::new(base().with_z0(RationalPoint::affine(0, 1))).err().unwrap();
        assert!(matches!(e, Error::Degenerate(_)), "{e}");
        let e = QCSolver::new(base().with_z0(RationalPoint::affine(1, 8))).err().unwrap();
        assert!(matches!(e, Error::Degenerate(_)), "{e}");
    }

    #[test]
    fn bad_reduction_rejected() {
        // the discriminant of x^6 + 31x^4 + 31x^2 + 1 is -2^28 7^6
        assert!(matches!(QCProblem::kms_int(31, 7, 5), Err(Error::BadReduction(7))));
    }

    #[test]
    fn bad_prime_offsets() {
        let ctx = PadicContext::new(3, 10).unwrap();
        let json = r#"{"entries": [{"place": "2", "lambda": "1/2", "mu": "3", "alpha": "1", "pi_b": "1/4", "pi_z0": "0"}]}"#;
        let o = BadPrimeData::from_json(&ctx, json).unwrap().offsets(&ctx);
        assert!(o.f1_z.agrees_with(&ctx.from_ratio(3, 8)));
        assert!(o.f1_z0.agrees_with(&ctx.from_ratio(-1, 8)));
        assert!(o.f2_z.agrees_with(&ctx.from_ratio(9, 4)));
        assert!(o.f2_z0.agrees_with(&ctx.from_ratio(-3, 4)));
        assert!(BadPrimeData::from_json(&ctx, r#"{"entries": [{"place": "2"}]}"#).is_err());
    }

    #[test]
    fn working_precision_formula() {
        // 7 + 2 * ceil(log_3 7) + 4
        assert_eq!(QCProblem::kms_int(31, 3, 7).unwrap().working_precision(), 15);
    }
}
