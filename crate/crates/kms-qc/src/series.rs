//! Truncated Laurent series with an explicit truncation order.
//!
//! A `Series` stores coefficients for exponents `min .. min + len` and knows
//! nothing about exponents `>= order`. Every operation computes the order of
//! its result from the orders of its inputs.

use std::fmt;

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::ring::Coeff;

#[derive(Clone, Debug)]
pub struct Series<C: Coeff> {
    min: i64,
    c: Vec<C>,
    order: i64,
    zero: C,
}

impl<C: Coeff> Series<C> {
    pub fn new(min: i64, mut c: Vec<C>, order: i64, like: &C) -> Self {
        let keep = (order - min).max(0) as usize;
        c.truncate(keep);
        Series { min, c, order, zero: like.zero_like() }.normalized()
    }

    pub fn zero(like: &C, order: i64) -> Self {
        Series { min: 0, c: Vec::new(), order, zero: like.zero_like() }
    }

    pub fn constant(a: C, order: i64) -> Self {
        Series::new(0, vec![a.clone()], order, &a)
    }

    /// a * t^k
    pub fn monomial(a: C, k: i64, order: i64) -> Self {
        Series::new(k, vec![a.clone()], order, &a)
    }

    pub fn from_poly(p: &Poly<C>, order: i64) -> Self {
        Series::new(0, p.coeffs().to_vec(), order, p.zero_elem())
    }

    /// Builds from (exponent, coefficient) pairs.
    pub fn from_terms(terms: &[(i64, C)], order: i64, like: &C) -> Self {
        let Some(lo) = terms.iter().map(|t| t.0).min() else {
            return Series::zero(like, order);
        };
        let hi = terms.iter().map(|t| t.0).max().unwrap();
        let mut c = vec![like.zero_like(); (hi - lo + 1) as usize];
        for (k, a) in terms {
            c[(k - lo) as usize] = c[(k - lo) as usize].add(a);
        }
        Series::new(lo, c, order, like)
    }

    fn normalized(mut self) -> Self {
        let lead = self.c.iter().take_while(|a| a.is_exact_zero()).count();
        if lead == self.c.len() {
            self.c.clear();
            self.min = 0;
            return self;
        }
        self.c.drain(..lead);
        self.min += lead as i64;
        while self.c.last().is_some_and(|a| a.is_exact_zero()) {
            self.c.pop();
        }
        self
    }

    pub fn order(&self) -> i64 {
        self.order
    }

    pub fn zero_elem(&self) -> &C {
        &self.zero
    }

    /// Smallest exponent with a stored coefficient (the order if none).
    pub fn min_exponent(&self) -> i64 {
        if self.c.is_empty() {
            self.order
        } else {
            self.min
        }
    }

    /// Largest stored exponent + 1.
    pub fn end(&self) -> i64 {
        self.min + self.c.len() as i64
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Coefficient of t^k; panics if k is beyond the truncation order.
    pub fn coeff(&self, k: i64) -> C {
        assert!(k < self.order, "coefficient t^{k} is beyond O(t^{})", self.order);
        if k < self.min || k >= self.end() {
            self.zero.clone()
        } else {
            self.c[(k - self.min) as usize].clone()
        }
    }

    /// (exponent, coefficient) for every stored coefficient.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &C)> {
        self.c.iter().enumerate().map(move |(i, a)| (self.min + i as i64, a))
    }

    pub fn truncate(&self, order: i64) -> Self {
        let order = order.min(self.order);
        Series::new(self.min, self.c.clone(), order, &self.zero)
    }

    pub fn add(&self, o: &Self) -> Self {
        let order = self.order.min(o.order);
        if self.c.is_empty() {
            return o.truncate(order);
        }
        if o.c.is_empty() {
            return self.truncate(order);
        }
        let lo = self.min.min(o.min);
        let hi = self.end().max(o.end()).min(order);
        if hi <= lo {
            return Series::zero(&self.zero, order);
        }
        let c = (lo..hi)
            .map(|k| {
                let a = (k >= self.min && k < self.end()).then(|| &self.c[(k - self.min) as usize]);
                let b = (k >= o.min && k < o.end()).then(|| &o.c[(k - o.min) as usize]);
                match (a, b) {
                    (Some(a), Some(b)) => a.add(b),
                    (Some(a), None) => a.clone(),
                    (None, Some(b)) => b.clone(),
                    (None, None) => self.zero.clone(),
                }
            })
            .collect();
        Series::new(lo, c, order, &self.zero)
    }

    pub fn neg(&self) -> Self {
        Series { c: self.c.iter().map(|a| a.neg()).collect(), ..self.clone() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, s: &C) -> Self {
        Series::new(self.min, self.c.iter().map(|a| a.mul(s)).collect(), self.order, &self.zero)
    }

    /// Multiply by t^k.
    pub fn shift(&self, k: i64) -> Self {
        Series { min: self.min + k, order: self.order + k, ..self.clone() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let order = (self.order + o.min_exponent()).min(o.order + self.min_exponent());
        if self.c.is_empty() || o.c.is_empty() {
            return Series::zero(&self.zero, order);
        }
        let lo = self.min + o.min;
        let n = ((order - lo).max(0) as usize).min(self.c.len() + o.c.len() - 1);
        let mut out = vec![self.zero.clone(); n];
        for (i, a) in self.c.iter().enumerate() {
            if i >= n || a.is_exact_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate().take(n - i) {
                if !b.is_exact_zero() {
                    out[i + j] = out[i + j].add(&a.mul(b));
                }
            }
        }
        Series::new(lo, out, order, &self.zero)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Series::constant(self.zero.one_like(), i64::MAX / 4);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// 1/s for s with an invertible leading coefficient.
    pub fn inverse(&self) -> Result<Self> {
        if self.c.is_empty() {
            return Err(Error::DivisionByZero);
        }
        let v = self.min;
        let c0 = &self.c[0];
        let inv0 = c0.one_like().try_div(c0)?;
        let n = (self.order - v).max(0) as usize;
        let h: Vec<C> = self.c.iter().map(|a| a.mul(&inv0)).collect();
        let mut out: Vec<C> = Vec::with_capacity(n);
        for k in 0..n {
            if k == 0 {
                out.push(self.zero.one_like());
                continue;
            }
            let mut acc = self.zero.clone();
            for j in 1..=k.min(h.len() - 1) {
                if !h[j].is_exact_zero() {
                    acc = acc.add(&h[j].mul(&out[k - j]));
                }
            }
            out.push(acc.neg());
        }
        let out = out.into_iter().map(|a| a.mul(&inv0)).collect();
        Ok(Series::new(-v, out, self.order - 2 * v, &self.zero))
    }

    /// Square root with leading coefficient `branch` (which must square to
    /// the leading coefficient of `self`).
    pub fn sqrt(&self, branch: &C) -> Result<Self> {
        if self.c.is_empty() {
            return Err(Error::Invalid("square root of a zero series".into()));
        }
        if self.min.rem_euclid(2) != 0 {
            return Err(Error::Invalid(format!("leading exponent {} is odd", self.min)));
        }
        let c0 = &self.c[0];
        if !branch.mul(branch).sub(c0).is_zero_value() {
            return Err(Error::NonResidue(format!("{c0} (branch {branch})")));
        }
        let inv0 = c0.one_like().try_div(c0)?;
        let n = (self.order - self.min).max(0) as usize;
        let h: Vec<C> = self.c.iter().map(|a| a.mul(&inv0)).collect();
        let mut r: Vec<C> = Vec::with_capacity(n);
        for k in 0..n {
            if k == 0 {
                r.push(self.zero.one_like());
                continue;
            }
            let mut acc = h.get(k).cloned().unwrap_or_else(|| self.zero.clone());
            for j in 1..k {
                acc = acc.sub(&r[j].mul(&r[k - j]));
            }
            r.push(acc.div_int(2));
        }
        let r = r.into_iter().map(|a| a.mul(branch)).collect();
        let v = self.min / 2;
        Ok(Series::new(v, r, self.order - v, &self.zero))
    }

    /// self(inner(t)); inner must have positive valuation.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        let vi = inner.min_exponent();
        if vi < 1 {
            return Err(Error::Invalid("composition needs an inner series with zero constant term".into()));
        }
        let cap = self.order.saturating_mul(vi).min(i64::MAX / 4);
        let mut acc = Series::zero(&self.zero, cap);
        if self.end() > 0 {
            for k in (self.min.max(0)..self.end()).rev() {
                acc = acc.mul(inner).add(&Series::constant(self.coeff(k), cap));
            }
            if self.min > 0 {
                acc = acc.mul(&inner.pow(self.min as u32));
            }
        }
        if self.min < 0 {
            let inv = inner.inverse()?;
            let mut neg = Series::zero(&self.zero, cap);
            for k in (1..=(-self.min)).rev() {
                neg = neg.add(&Series::constant(self.coeff(-k), cap)).mul(&inv);
            }
            acc = acc.add(&neg);
        }
        Ok(acc.truncate(cap))
    }

    pub fn derivative(&self) -> Self {
        let c = self.c.iter().enumerate().map(|(i, a)| a.mul_int(self.min + i as i64)).collect();
        Series::new(self.min - 1, c, self.order - 1, &self.zero)
    }

    /// Termwise t^i -> t^(i+1)/(i+1); the t^{-1} coefficient must vanish.
    pub fn formal_integrate(&self) -> Result<Self> {
        let (s, res) = self.integrate_split();
        if !res.is_zero_value() {
            return Err(Error::Residue(res.to_string()));
        }
        // A residue known only as O(p^m) limits the constant of integration.
        Ok(if res.is_exact_zero() { s } else { s.add(&Series::constant(res, s.order)) })
    }

    /// Integral of everything except t^{-1}, together with that coefficient.
    pub fn integrate_split(&self) -> (Self, C) {
        let mut res = self.zero.clone();
        let c = self
            .c
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let k = self.min + i as i64;
                if k == -1 {
                    res = a.clone();
                    self.zero.clone()
                } else {
                    a.div_int(k + 1)
                }
            })
            .collect();
        (Series::new(self.min + 1, c, self.order + 1, &self.zero), res)
    }

    pub fn residue(&self) -> C {
        if self.order <= -1 {
            panic!("residue beyond truncation order");
        }
        self.coeff(-1)
    }

    /// The part with exponents <= -2.
    pub fn tail_section(&self) -> Self {
        let c = self.terms().filter(|(k, _)| *k <= -2).map(|(_, a)| a.clone()).collect();
        Series::new(self.min, c, self.order.max(-1), &self.zero).with_order(i64::MAX / 4)
    }

    /// The part with exponents < 0.
    pub fn principal_part(&self) -> Self {
        let c = self.terms().filter(|(k, _)| *k < 0).map(|(_, a)| a.clone()).collect();
        Series::new(self.min, c, self.order.max(0), &self.zero).with_order(i64::MAX / 4)
    }

    /// Replaces the truncation order; only for series known to be exact
    /// (e.g. finite principal parts).
    pub fn with_order(mut self, order: i64) -> Self {
        self.order = order;
        self
    }

    pub fn eval(&self, x: &C) -> Result<C> {
        let mut acc = self.zero.clone();
        let mut pw = x.one_like();
        for k in 0..self.end().max(0) {
            if k >= self.min {
                acc = acc.add(&self.c[(k - self.min) as usize].mul(&pw));
            }
            pw = pw.mul(x);
        }
        if self.min < 0 {
            let xi = x.one_like().try_div(x)?;
            let mut pw = xi.clone();
            for k in 1..=(-self.min) {
                if -k < self.end() {
                    acc = acc.add(&self.coeff(-k).mul(&pw));
                }
                pw = pw.mul(&xi);
            }
        }
        Ok(acc)
    }

    pub fn map<D: Coeff>(&self, like: &D, f: impl Fn(&C) -> D) -> Series<D> {
        Series::new(self.min, self.c.iter().map(f).collect(), self.order, like)
    }
}

impl<C: Coeff> fmt::Display for Series<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self
            .terms()
            .filter(|(_, a)| !a.is_exact_zero())
            .map(|(k, a)| match k {
                0 => format!("{a}"),
                1 => format!("({a})*t"),
                _ => format!("({a})*t^{k}"),
            })
            .collect();
        // exact series (e.g. polynomials) carry a huge sentinel order
        if self.order < i64::MAX / 8 {
            parts.push(format!("O(t^{})", self.order));
        }
        if parts.is_empty() {
            parts.push("0".into());
        }
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn qs(min: i64, c: &[(i64, i64)], order: i64) -> Series<BigRational> {
        Series::new(min, c.iter().map(|&(n, d)| q(n, d)).collect(), order, &q(0, 1))
    }

    fn coeffs(s: &Series<BigRational>, lo: i64, hi: i64) -> Vec<BigRational> {
        (lo..hi).map(|k| s.coeff(k)).collect()
    }

    #[test]
    fn product_and_derivative() {
        let a = qs(0, &[(1, 1), (1, 1)], 5);
        let b = qs(0, &[(1, 1), (-1, 1)], 5);
        let ab = a.mul(&b);
        assert_eq!(ab.order(), 5);
        assert_eq!(coeffs(&ab, 0, 5), vec![q(1, 1), q(0, 1), q(-1, 1), q(0, 1), q(0, 1)]);
        let t3 = Series::monomial(q(1, 1), 3, 10);
        assert_eq!(t3.derivative().coeff(2), q(3, 1));
    }

    #[test]
    fn compose_geometric() {
        let geo = qs(0, &[(1, 1); 8], 8);
        let u = qs(1, &[(1, 1), (1, 1)], 4);
        let c = geo.compose(&u).unwrap();
        assert_eq!(c.order(), 4);
        assert_eq!(coeffs(&c, 0, 4), vec![q(1, 1), q(1, 1), q(2, 1), q(3, 1)]);
        assert!(geo.compose(&qs(0, &[(1, 1), (1, 1)], 4)).is_err());
    }

    #[test]
    fn integration() {
        let t2 = Series::monomial(q(1, 1), 2, 10);
        assert_eq!(t2.formal_integrate().unwrap().coeff(3), q(1, 3));
        let s = Series::from_terms(&[(-3, q(3, 1)), (-2, q(-2, 1))], 5, &q(0, 1));
        let i = s.formal_integrate().unwrap();
        assert_eq!(i.coeff(-2), q(-3, 2));
        assert_eq!(i.coeff(-1), q(2, 1));
        assert_eq!(i.coeff(0), q(0, 1));
        let r = Series::from_terms(&[(-1, q(1, 1))], 5, &q(0, 1));
        assert!(matches!(r.formal_integrate(), Err(Error::Residue(_))));
        let neg = Series::from_terms(&[(-4, q(1, 1)), (-2, q(5, 1))], 3, &q(0, 1));
        assert!(neg.formal_integrate().unwrap().terms().all(|(k, _)| k < 0));
    }

    #[test]
    fn tail_section_examples() {
        let s = Series::from_terms(&[(-3, q(1, 1)), (-1, q(1, 1)), (0, q(1, 1)), (1, q(1, 1))], 6, &q(0, 1));
        let t = s.tail_section();
        assert_eq!(t.terms().map(|(k, a)| (k, a.clone())).collect::<Vec<_>>(), vec![(-3, q(1, 1))]);
        assert!(qs(0, &[(1, 1), (2, 1)], 5).tail_section().is_zero());
        let s = Series::from_terms(&[(-5, q(2, 1)), (-2, q(7, 1)), (-1, q(4, 1))], 6, &q(0, 1));
        let t = s.tail_section();
        assert_eq!(t.coeff(-5), q(2, 1));
        assert_eq!(t.coeff(-2), q(7, 1));
        assert_eq!(t.coeff(-1), q(0, 1));
    }

    #[test]
    fn sqrt_examples() {
        let s = qs(0, &[(1, 1), (0, 1), (1, 1)], 5);
        let r = s.sqrt(&q(1, 1)).unwrap();
        assert_eq!(coeffs(&r, 0, 5), vec![q(1, 1), q(0, 1), q(1, 2), q(0, 1), q(-1, 8)]);
        let u2 = Series::monomial(q(1, 1), 2, 10);
        let r = u2.sqrt(&q(1, 1)).unwrap();
        assert_eq!(r.coeff(1), q(1, 1));
        assert_eq!(r.coeff(2), q(0, 1));
        assert!(qs(0, &[(2, 1)], 4).sqrt(&q(1, 1)).is_err());
        // x^6 f(1/x) for the KMS curve with a = 31
        let f = qs(0, &[(1, 1), (0, 1), (31, 1), (0, 1), (31, 1), (0, 1), (1, 1)], 10);
        let r = f.sqrt(&q(1, 1)).unwrap();
        let back = r.mul(&r);
        assert_eq!(coeffs(&back, 0, 10), coeffs(&f, 0, 10));
    }

    #[test]
    fn inverse_laurent() {
        let s = qs(-2, &[(2, 1), (1, 1)], 4);
        let i = s.inverse().unwrap();
        let one = s.mul(&i);
        assert_eq!(one.coeff(0), q(1, 1));
        for k in 1..one.order() {
            assert_eq!(one.coeff(k), q(0, 1));
        }
    }

    proptest! {
        #[test]
        fn integrate_then_differentiate(c in prop::collection::vec(-20i64..20, 1..10), min in -6i64..3) {
            let s = Series::new(min, c.iter().map(|&n| q(n, 1)).collect(), min + 12, &q(0, 1));
            let s = s.sub(&Series::from_terms(&[(-1, s.coeff(-1))], 20, &q(0, 1)));
            let back = s.formal_integrate().unwrap().derivative();
            for k in s.min_exponent()..back.order().min(s.order()) {
                prop_assert_eq!(back.coeff(k), s.coeff(k));
            }
        }

        #[test]
        fn tail_section_idempotent_linear(a in prop::collection::vec(-9i64..9, 8), b in prop::collection::vec(-9i64..9, 8)) {
            let sa = Series::new(-5, a.iter().map(|&n| q(n, 1)).collect(), 3, &q(0, 1));
            let sb = Series::new(-5, b.iter().map(|&n| q(n, 1)).collect(), 3, &q(0, 1));
            let ta = sa.tail_section();
            prop_assert_eq!(ta.tail_section().to_string(), ta.to_string());
            let lhs = sa.add(&sb).tail_section();
            let rhs = ta.add(&sb.tail_section());
            for k in -5..-1 {
                prop_assert_eq!(lhs.coeff(k), rhs.coeff(k));
            }
            prop_assert!(sa.sub(&ta).min_exponent() >= -1);
        }

        #[test]
        fn sqrt_round_trip(c in prop::collection::vec(-30i64..30, 1..9)) {
            let mut v = vec![q(9, 4)];
            v.extend(c.iter().map(|&n| q(n, 7)));
            let s = Series::new(0, v, 10, &q(0, 1));
            let r = s.sqrt(&q(-3, 2)).unwrap();
            let back = r.mul(&r);
            for k in 0..10 {
                prop_assert_eq!(back.coeff(k), s.coeff(k));
            }
        }
    }
}
