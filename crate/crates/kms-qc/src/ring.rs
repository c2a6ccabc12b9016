//! The coefficient interface shared by polynomials and series: exact
//! rationals for the Hodge stage, p-adics everywhere else.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::padic::Padic;

pub trait Coeff: Clone + fmt::Debug + fmt::Display + Send + Sync {
    fn zero_like(&self) -> Self;
    fn from_i64_like(&self, n: i64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn try_div(&self, o: &Self) -> Result<Self>;
    /// Exactly zero (safe to drop from a sparse sum without losing information).
    fn is_exact_zero(&self) -> bool;
    /// No known nonzero digit; equals `is_exact_zero` for exact domains.
    fn is_zero_value(&self) -> bool;

    fn one_like(&self) -> Self {
        self.from_i64_like(1)
    }

    fn div_int(&self, n: i64) -> Self {
        self.try_div(&self.from_i64_like(n)).expect("division by a nonzero integer")
    }

    fn mul_int(&self, n: i64) -> Self {
        self.mul(&self.from_i64_like(n))
    }
}

impl Coeff for Padic {
    fn zero_like(&self) -> Self {
        self.context().zero()
    }
    fn from_i64_like(&self, n: i64) -> Self {
        self.context().from_int(n)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn try_div(&self, o: &Self) -> Result<Self> {
        self.checked_div(o)
    }
    fn is_exact_zero(&self) -> bool {
        Padic::is_exact_zero(self)
    }
    fn is_zero_value(&self) -> bool {
        self.is_zero()
    }
    fn div_int(&self, n: i64) -> Self {
        Padic::div_int(self, n)
    }
    fn mul_int(&self, n: i64) -> Self {
        Padic::mul_int(self, n)
    }
}

impl Coeff for BigRational {
    fn zero_like(&self) -> Self {
        BigRational::zero()
    }
    fn from_i64_like(&self, n: i64) -> Self {
        BigRational::from_integer(n.into())
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn try_div(&self, o: &Self) -> Result<Self> {
        if o.is_zero() {
            Err(Error::DivisionByZero)
        } else {
            Ok(self / o)
        }
    }
    fn is_exact_zero(&self) -> bool {
        self.is_zero()
    }
    fn is_zero_value(&self) -> bool {
        self.is_zero()
    }
    fn one_like(&self) -> Self {
        BigRational::one()
    }
}
