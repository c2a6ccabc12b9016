//! Dense univariate polynomials, low degree first.

use std::fmt;

use crate::error::{Error, Result};
use crate::ring::Coeff;

#[derive(Clone, Debug)]
pub struct Poly<C: Coeff> {
    c: Vec<C>,
    zero: C,
}

impl<C: Coeff> Poly<C> {
    /// Trailing exact zeros are dropped; `O(p^m)` coefficients are kept.
    pub fn new(mut c: Vec<C>, zero: C) -> Self {
        while c.last().is_some_and(|x| x.is_exact_zero()) {
            c.pop();
        }
        Poly { c, zero: zero.zero_like() }
    }

    pub fn zero(like: &C) -> Self {
        Poly { c: Vec::new(), zero: like.zero_like() }
    }

    pub fn constant(a: C) -> Self {
        let z = a.zero_like();
        Poly::new(vec![a], z)
    }

    /// a * x^k
    pub fn monomial(a: C, k: usize) -> Self {
        let z = a.zero_like();
        let mut c = vec![z.clone(); k];
        c.push(a);
        Poly::new(c, z)
    }

    pub fn x(like: &C) -> Self {
        Poly::monomial(like.one_like(), 1)
    }

    pub fn coeffs(&self) -> &[C] {
        &self.c
    }

    pub fn zero_elem(&self) -> &C {
        &self.zero
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    /// Degree of the stored coefficient list (`None` for the zero polynomial).
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> C {
        self.c.get(i).cloned().unwrap_or_else(|| self.zero.clone())
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        let c = (0..n)
            .map(|i| match (self.c.get(i), o.c.get(i)) {
                (Some(a), Some(b)) => a.add(b),
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => unreachable!(),
            })
            .collect();
        Poly::new(c, self.zero.clone())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        Poly { c: self.c.iter().map(|a| a.neg()).collect(), zero: self.zero.clone() }
    }

    pub fn scale(&self, s: &C) -> Self {
        if s.is_exact_zero() {
            return Poly::zero(&self.zero);
        }
        Poly::new(self.c.iter().map(|a| a.mul(s)).collect(), self.zero.clone())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.c.is_empty() || o.c.is_empty() {
            return Poly::zero(&self.zero);
        }
        let mut out = vec![self.zero.clone(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_exact_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                if b.is_exact_zero() {
                    continue;
                }
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        Poly::new(out, self.zero.clone())
    }

    /// Multiply by x^k.
    pub fn shift(&self, k: usize) -> Self {
        if self.c.is_empty() {
            return self.clone();
        }
        let mut c = vec![self.zero.clone(); k];
        c.extend(self.c.iter().cloned());
        Poly { c, zero: self.zero.clone() }
    }

    pub fn deriv(&self) -> Self {
        let c = self.c.iter().enumerate().skip(1).map(|(i, a)| a.mul_int(i as i64)).collect();
        Poly::new(c, self.zero.clone())
    }

    /// Antiderivative with zero constant term.
    pub fn integral(&self) -> Self {
        let mut c = vec![self.zero.clone()];
        c.extend(self.c.iter().enumerate().map(|(i, a)| a.div_int(i as i64 + 1)));
        Poly::new(c, self.zero.clone())
    }

    pub fn eval(&self, x: &C) -> C {
        self.c.iter().rev().fold(self.zero.clone(), |acc, a| acc.mul(x).add(a))
    }

    /// Division with remainder by a polynomial whose leading coefficient is
    /// invertible.
    pub fn divrem(&self, d: &Self) -> Result<(Self, Self)> {
        let dl = d.c.last().ok_or(Error::DivisionByZero)?;
        let inv = dl.one_like().try_div(dl)?;
        let dn = d.c.len();
        let mut r = self.c.clone();
        if r.len() < dn {
            return Ok((Poly::zero(&self.zero), self.clone()));
        }
        let mut q = vec![self.zero.clone(); r.len() - dn + 1];
        for k in (0..q.len()).rev() {
            let top = r.pop().unwrap();
            if top.is_exact_zero() {
                continue;
            }
            let c = top.mul(&inv);
            for (i, b) in d.c[..dn - 1].iter().enumerate() {
                r[k + i] = r[k + i].sub(&c.mul(b));
            }
            q[k] = c;
        }
        Ok((Poly::new(q, self.zero.clone()), Poly::new(r, self.zero.clone())))
    }

    pub fn map<D: Coeff>(&self, zero: &D, f: impl Fn(&C) -> D) -> Poly<D> {
        Poly::new(self.c.iter().map(f).collect(), zero.zero_like())
    }

    /// Drops trailing coefficients that carry no known nonzero digit.
    pub fn trim_values(mut self) -> Self {
        while self.c.last().is_some_and(|x| x.is_zero_value()) {
            self.c.pop();
        }
        self
    }
}

/// Extended Euclid over a field: returns (s, t) with s*a + t*b = 1.
pub fn xgcd<C: Coeff>(a: &Poly<C>, b: &Poly<C>) -> Result<(Poly<C>, Poly<C>)> {
    let z = a.zero_elem().clone();
    let one = Poly::constant(z.one_like());
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut s0, mut s1) = (one.clone(), Poly::zero(&z));
    let (mut t0, mut t1) = (Poly::zero(&z), one);
    while !r1.is_empty() {
        let (q, r) = r0.divrem(&r1)?;
        let s2 = s0.sub(&q.mul(&s1));
        let t2 = t0.sub(&q.mul(&t1));
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s2;
        t0 = t1;
        t1 = t2;
    }
    if r0.degree() != Some(0) {
        return Err(Error::Invalid("polynomials are not coprime".into()));
    }
    let inv = z.one_like().try_div(&r0.coeff(0))?;
    Ok((s0.scale(&inv), t0.scale(&inv)))
}

impl<C: Coeff> fmt::Display for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .c
            .iter()
            .enumerate()
            .filter(|(_, a)| !a.is_exact_zero())
            .map(|(i, a)| match i {
                0 => format!("{a}"),
                1 => format!("({a})*x"),
                _ => format!("({a})*x^{i}"),
            })
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn qp(c: &[i64]) -> Poly<BigRational> {
        Poly::new(c.iter().map(|&n| q(n)).collect(), q(0))
    }

    #[test]
    fn divrem_and_xgcd() {
        let f = qp(&[1, 0, 31, 0, 31, 0, 1]);
        let fp = f.deriv();
        let (s, t) = xgcd(&f, &fp).unwrap();
        let one = s.mul(&f).add(&t.mul(&fp));
        assert_eq!(one.coeffs(), &[q(1)]);
        let (qq, r) = f.divrem(&qp(&[1, 1])).unwrap();
        assert_eq!(qq.mul(&qp(&[1, 1])).add(&r).coeffs(), f.coeffs());
        assert_eq!(r.coeffs(), &[q(64)]);
    }

    #[test]
    fn calculus() {
        let p = qp(&[5, 0, 3]);
        assert_eq!(p.deriv().coeffs(), &[q(0), q(6)]);
        assert_eq!(p.integral().deriv().coeffs(), p.coeffs());
        assert_eq!(p.eval(&q(2)), q(17));
    }
}
