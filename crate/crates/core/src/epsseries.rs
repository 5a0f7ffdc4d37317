//! Truncated Laurent series in an infinitesimal `ε` with absolute-precision
//! tracking. Used as a coefficient ring to evaluate expressions on a
//! hyperplane where single terms have poles that cancel in the sum.

use crate::error::{Error, Result};
use crate::exactseries::{Rational, Scalar};
use num::{One, Zero};
use std::ops::{Add, Mul};

/// `Σ coeffs[i] ε^(start+i) + O(ε^(start+len))`, leading coefficient nonzero.
///
/// The zero element to precision `p` has `start = p` and no coefficients.
#[derive(Clone, Debug)]
pub struct EpsSeries {
    start: i32,
    coeffs: Vec<Rational>,
}

/// Relative precision of constants and of freshly built series.
pub const DEFAULT_PRECISION: usize = 8;

thread_local! {
    static PRECISION: std::cell::Cell<usize> = const { std::cell::Cell::new(DEFAULT_PRECISION) };
}

/// Runs `f` with constants carrying `prec` terms of relative precision.
pub fn with_precision<T>(prec: usize, f: impl FnOnce() -> T) -> T {
    let old = PRECISION.with(|p| p.replace(prec));
    let out = f();
    PRECISION.with(|p| p.set(old));
    out
}

fn precision() -> usize {
    PRECISION.with(|p| p.get())
}

impl EpsSeries {
    fn normalized(mut start: i32, mut coeffs: Vec<Rational>) -> Self {
        let lead = coeffs.iter().take_while(|c| c.is_zero()).count();
        coeffs.drain(..lead);
        start += lead as i32;
        Self { start, coeffs }
    }

    /// `c + c·ε`, i.e. `c(1+ε)`; exact to the current precision.
    pub fn one_plus_eps_times(c: &Rational) -> Self {
        let mut coeffs = vec![Rational::zero(); precision()];
        coeffs[0] = c.clone();
        if coeffs.len() > 1 {
            coeffs[1] = c.clone();
        }
        Self::normalized(0, coeffs)
    }

    pub fn valuation(&self) -> i32 {
        self.start
    }

    /// Absolute precision: the series is known modulo `ε^abs_precision`.
    pub fn abs_precision(&self) -> i32 {
        self.start + self.coeffs.len() as i32
    }

    /// Coefficient of `ε^k`, or `None` when `k` is beyond the known precision.
    pub fn coeff(&self, k: i32) -> Option<Rational> {
        if k >= self.abs_precision() {
            None
        } else if k < self.start {
            Some(Rational::zero())
        } else {
            Some(self.coeffs[(k - self.start) as usize].clone())
        }
    }

    /// The value at `ε = 0`: requires no negative powers and known `ε^0`.
    pub fn constant_term(&self) -> Result<Rational> {
        if self.start < 0 && !self.coeffs.is_empty() {
            return Err(Error::PoleAtEvaluation);
        }
        self.coeff(0)
            .ok_or_else(|| Error::Domain("insufficient ε precision".into()))
    }
}

impl PartialEq for EpsSeries {
    fn eq(&self, o: &Self) -> bool {
        self.start == o.start && self.coeffs == o.coeffs
    }
}

impl Zero for EpsSeries {
    fn zero() -> Self {
        Self {
            start: precision() as i32,
            coeffs: vec![],
        }
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

impl One for EpsSeries {
    fn one() -> Self {
        Self::from_rational(&Rational::one())
    }
}

impl Add for EpsSeries {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        self.plus(&o)
    }
}

impl Mul for EpsSeries {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        self.times(&o)
    }
}

impl Scalar for EpsSeries {
    fn from_rational(r: &Rational) -> Self {
        let mut coeffs = vec![Rational::zero(); precision()];
        coeffs[0] = r.clone();
        if r.is_zero() {
            return Self::zero();
        }
        Self::normalized(0, coeffs)
    }
    fn plus(&self, o: &Self) -> Self {
        let start = self.start.min(o.start);
        let end = self.abs_precision().min(o.abs_precision());
        if end <= start {
            return Self {
                start: end,
                coeffs: vec![],
            };
        }
        let mut coeffs = vec![Rational::zero(); (end - start) as usize];
        for s in [self, o] {
            for (i, c) in s.coeffs.iter().enumerate() {
                let k = s.start + i as i32;
                if k < end {
                    coeffs[(k - start) as usize] += c;
                }
            }
        }
        Self::normalized(start, coeffs)
    }
    fn minus(&self, o: &Self) -> Self {
        self.plus(&o.negated())
    }
    fn times(&self, o: &Self) -> Self {
        let len = self.coeffs.len().min(o.coeffs.len());
        let start = self.start + o.start;
        let mut coeffs = vec![Rational::zero(); len];
        for (i, a) in self.coeffs.iter().take(len).enumerate() {
            for (j, b) in o.coeffs.iter().take(len - i).enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Self::normalized(start, coeffs)
    }
    fn negated(&self) -> Self {
        Self {
            start: self.start,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
    fn recip(&self) -> Result<Self> {
        if self.coeffs.is_empty() {
            return Err(Error::PoleAtEvaluation);
        }
        let n = self.coeffs.len();
        let inv0 = num::rational::Ratio::recip(&self.coeffs[0]);
        let mut out: Vec<Rational> = Vec::with_capacity(n);
        out.push(inv0.clone());
        for k in 1..n {
            let mut acc = Rational::zero();
            for i in 1..=k {
                acc += &self.coeffs[i] * &out[k - i];
            }
            out.push(-(acc * &inv0));
        }
        Ok(Self::normalized(-self.start, out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactseries::{int, rat};

    fn eps() -> EpsSeries {
        EpsSeries::one_plus_eps_times(&int(1)).minus(&EpsSeries::one())
    }

    #[test]
    fn geometric_series() {
        // 1/(1-ε) = 1 + ε + ε² + …
        let s = EpsSeries::one().minus(&eps()).recip().unwrap();
        for k in 0..DEFAULT_PRECISION as i32 {
            assert_eq!(s.coeff(k), Some(int(1)));
        }
        assert_eq!(s.coeff(DEFAULT_PRECISION as i32), None);
    }

    #[test]
    fn simple_pole_cancels_in_a_difference() {
        // (1+ε)/ε - 1/ε = 1
        let e = eps();
        let a = EpsSeries::one().plus(&e).times(&e.recip().unwrap());
        let b = e.recip().unwrap();
        assert_eq!(a.minus(&b).constant_term().unwrap(), int(1));
    }

    #[test]
    fn surviving_pole_is_reported() {
        let e = eps().times(&EpsSeries::from_rational(&rat(1, 2)));
        assert_eq!(e.recip().unwrap().constant_term(), Err(Error::PoleAtEvaluation));
    }

    #[test]
    fn precision_drops_through_division() {
        let e = eps();
        let x = e.recip().unwrap().times(&e.recip().unwrap());
        assert_eq!(x.valuation(), -2);
        assert_eq!(x.abs_precision(), DEFAULT_PRECISION as i32 - 3);
    }
}
