//! Exact arithmetic kernel: rationals, Laurent monomials with half-integer
//! exponents, truncated power series in `q`, and evaluation points.
//!
//! Monomial exponents are stored doubled. A variable `v` is evaluated by
//! picking a positive rational `s` and setting `v = s²`, so every half power
//! of every variable is again rational.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num::{BigInt, BigRational, One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Formats a rational as `p` or `p/q`.
pub fn rational_to_string(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::Usage(format!("bad rational {s:?}"));
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Coefficient ring of a [`QSeries`].
///
/// Implemented by [`Rational`] and by [`crate::epsseries::EpsSeries`], which
/// lets the same theta kernel run on points that approach a hyperplane.
pub trait Scalar: Clone + PartialEq + fmt::Debug + Send + Sync + Zero + One {
    fn from_rational(r: &Rational) -> Self;
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn negated(&self) -> Self;
    /// Fails with [`Error::PoleAtEvaluation`] on (numerically) zero input.
    fn recip(&self) -> Result<Self>;

    fn powi(&self, e: i32) -> Result<Self> {
        let base = if e < 0 { self.recip()? } else { self.clone() };
        let mut n = e.unsigned_abs();
        let mut acc = Self::one();
        let mut sq = base;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.times(&sq);
            }
            n >>= 1;
            if n > 0 {
                sq = sq.times(&sq);
            }
        }
        Ok(acc)
    }
}

impl Scalar for Rational {
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negated(&self) -> Self {
        -self
    }
    fn recip(&self) -> Result<Self> {
        if Zero::is_zero(self) {
            Err(Error::PoleAtEvaluation)
        } else {
            Ok(num::rational::Ratio::recip(self))
        }
    }
}

/// Variable sorts. `T(k, a)` is `t^(k)_a`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Var {
    Z(u8),
    Mu(u8),
    Gamma(u8),
    T(u8, u8),
    H,
    Y,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Z(i) => write!(f, "z{i}"),
            Var::Mu(i) => write!(f, "mu{i}"),
            Var::Gamma(i) => write!(f, "gamma{i}"),
            Var::T(k, a) => write!(f, "t{k}_{a}"),
            Var::H => write!(f, "h"),
            Var::Y => write!(f, "y"),
        }
    }
}

impl FromStr for Var {
    type Err = Error;
    fn from_str(s: &str) -> Result<Var> {
        let bad = || Error::Usage(format!("unknown variable {s:?}"));
        let num = |t: &str| t.parse::<u8>().map_err(|_| bad());
        if s == "h" {
            Ok(Var::H)
        } else if s == "y" {
            Ok(Var::Y)
        } else if let Some(r) = s.strip_prefix("gamma") {
            Ok(Var::Gamma(num(r)?))
        } else if let Some(r) = s.strip_prefix("mu") {
            Ok(Var::Mu(num(r)?))
        } else if let Some(r) = s.strip_prefix('z') {
            Ok(Var::Z(num(r)?))
        } else if let Some(r) = s.strip_prefix('t') {
            let (k, a) = r.split_once('_').ok_or_else(bad)?;
            Ok(Var::T(num(k)?, num(a)?))
        } else {
            Err(bad())
        }
    }
}

/// Laurent monomial with exponents in ½ℤ, stored doubled and sparse.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct HalfMonomial {
    exps: Vec<(Var, i32)>,
}

impl HalfMonomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn var(v: Var) -> Self {
        Self { exps: vec![(v, 2)] }
    }

    /// Builds a monomial from integer (not doubled) exponents.
    pub fn from_ints(pairs: &[(Var, i32)]) -> Self {
        Self::from_doubled(pairs.iter().map(|&(v, e)| (v, 2 * e)))
    }

    pub fn from_doubled(pairs: impl IntoIterator<Item = (Var, i32)>) -> Self {
        let mut map: BTreeMap<Var, i32> = BTreeMap::new();
        for (v, e) in pairs {
            *map.entry(v).or_insert(0) += e;
        }
        Self {
            exps: map.into_iter().filter(|&(_, e)| e != 0).collect(),
        }
    }

    /// `num/den`, the most common shape of an argument.
    pub fn ratio(num: Var, den: Var) -> Self {
        Self::from_ints(&[(num, 1), (den, -1)])
    }

    pub fn exponents(&self) -> &[(Var, i32)] {
        &self.exps
    }

    pub fn doubled(&self, v: Var) -> i32 {
        self.exps
            .iter()
            .find(|(w, _)| *w == v)
            .map_or(0, |&(_, e)| e)
    }

    pub fn is_one(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.exps.iter().map(|&(v, _)| v)
    }

    pub fn is_integral(&self) -> bool {
        self.exps.iter().all(|&(_, e)| e % 2 == 0)
    }

    pub fn require_integral(&self) -> Result<()> {
        if self.is_integral() {
            Ok(())
        } else {
            Err(Error::LatticeViolation(self.to_string()))
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::from_doubled(self.exps.iter().chain(o.exps.iter()).copied())
    }

    pub fn div(&self, o: &Self) -> Self {
        self.mul(&o.inv())
    }

    pub fn inv(&self) -> Self {
        Self {
            exps: self.exps.iter().map(|&(v, e)| (v, -e)).collect(),
        }
    }

    pub fn pow(&self, k: i32) -> Self {
        if k == 0 {
            return Self::one();
        }
        Self {
            exps: self.exps.iter().map(|&(v, e)| (v, e * k)).collect(),
        }
    }

    /// Applies a ring map given on variables. Unmapped variables are kept.
    /// Images are raised to the doubled exponent and halved, so a variable
    /// with odd exponent must map to an integral monomial.
    pub fn substitute(&self, f: &impl Fn(Var) -> Option<HalfMonomial>) -> Self {
        let mut pairs = Vec::new();
        for &(v, e) in &self.exps {
            match f(v) {
                Some(img) => {
                    for &(w, d) in &img.exps {
                        debug_assert!((d * e) % 2 == 0, "half exponent of a composite image");
                        pairs.push((w, d * e / 2));
                    }
                }
                None => pairs.push((v, e)),
            }
        }
        Self::from_doubled(pairs)
    }

    /// Renames variables one-to-one.
    pub fn rename(&self, f: &impl Fn(Var) -> Var) -> Self {
        Self::from_doubled(self.exps.iter().map(|&(v, e)| (f(v), e)))
    }
}

fn write_power(f: &mut fmt::Formatter<'_>, v: Var, doubled: i32) -> fmt::Result {
    match doubled {
        2 => write!(f, "{v}"),
        d if d % 2 == 0 => write!(f, "{v}^{}", d / 2),
        d => write!(f, "{v}^({d}/2)"),
    }
}

impl fmt::Display for HalfMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let num: Vec<_> = self.exps.iter().filter(|e| e.1 > 0).collect();
        let den: Vec<_> = self.exps.iter().filter(|e| e.1 < 0).collect();
        if num.is_empty() {
            write!(f, "1")?;
        }
        for (i, &&(v, e)) in num.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            write_power(f, v, e)?;
        }
        if !den.is_empty() {
            write!(f, "/")?;
            if den.len() > 1 {
                write!(f, "(")?;
            }
            for (i, &&(v, e)) in den.iter().enumerate() {
                if i > 0 {
                    write!(f, "*")?;
                }
                write_power(f, v, -e)?;
            }
            if den.len() > 1 {
                write!(f, ")")?;
            }
        }
        Ok(())
    }
}

/// Truncated power series `c_0 + c_1 q + … + c_N q^N`.
#[derive(Clone, PartialEq, Debug)]
pub struct QSeries<R: Scalar = Rational> {
    coeffs: Vec<R>,
}

impl<R: Scalar> QSeries<R> {
    pub fn zero(order: usize) -> Self {
        Self {
            coeffs: vec![R::zero(); order + 1],
        }
    }

    pub fn constant(c: R, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    pub fn one(order: usize) -> Self {
        Self::constant(R::one(), order)
    }

    /// Builds a series from `coeffs`, padding with zeros or truncating to `order`.
    pub fn from_coeffs(mut coeffs: Vec<R>, order: usize) -> Self {
        coeffs.resize(order + 1, R::zero());
        Self { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[R] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> &R {
        &self.coeffs[i]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, o: &Self) -> Self {
        debug_assert_eq!(self.order(), o.order());
        Self {
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.plus(b)).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        debug_assert_eq!(self.order(), o.order());
        Self {
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.minus(b)).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(R::negated).collect(),
        }
    }

    pub fn scale(&self, c: &R) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|a| a.times(c)).collect(),
        }
    }

    /// Cauchy product truncated at the common order. Panics on mismatch;
    /// use [`qs_mul`] for the checked variant.
    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.order(), o.order(), "series order mismatch");
        let n = self.coeffs.len();
        let mut out = vec![R::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs[..n - i].iter().enumerate() {
                out[i + j] = out[i + j].plus(&a.times(b));
            }
        }
        Self { coeffs: out }
    }

    /// Multiplies in place by `1 - c q^n`.
    pub fn mul_one_minus(&mut self, c: &R, n: usize) {
        for i in (n..self.coeffs.len()).rev() {
            let t = self.coeffs[i - n].times(c);
            self.coeffs[i] = self.coeffs[i].minus(&t);
        }
    }

    pub fn invert(&self) -> Result<Self> {
        let inv0 = self.coeffs[0].recip()?;
        let n = self.coeffs.len();
        let mut out: Vec<R> = Vec::with_capacity(n);
        out.push(inv0.clone());
        for k in 1..n {
            let mut acc = R::zero();
            for i in 1..=k {
                if !self.coeffs[i].is_zero() {
                    acc = acc.plus(&self.coeffs[i].times(&out[k - i]));
                }
            }
            out.push(acc.times(&inv0).negated());
        }
        Ok(Self { coeffs: out })
    }

    pub fn pow(&self, e: i32) -> Result<Self> {
        let base = if e < 0 { self.invert()? } else { self.clone() };
        let mut acc = Self::one(self.order());
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base);
        }
        Ok(acc)
    }

    pub fn map<S: Scalar>(&self, f: impl Fn(&R) -> S) -> QSeries<S> {
        QSeries {
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }
}

impl QSeries<Rational> {
    pub fn from_ints(cs: &[i64]) -> Self {
        Self {
            coeffs: cs.iter().map(|&c| int(c)).collect(),
        }
    }
}

impl fmt::Display for QSeries<Rational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| match i {
                0 => rational_to_string(c),
                1 => format!("({})q", rational_to_string(c)),
                _ => format!("({})q^{i}", rational_to_string(c)),
            })
            .collect();
        write!(f, "{} + O(q^{})", parts.join(" + "), self.coeffs.len())
    }
}

pub fn qs_mul<R: Scalar>(a: &QSeries<R>, b: &QSeries<R>) -> Result<QSeries<R>> {
    if a.order() != b.order() {
        return Err(Error::OrderMismatch(a.order(), b.order()));
    }
    Ok(a.mul(b))
}

pub fn qs_invert<R: Scalar>(a: &QSeries<R>) -> Result<QSeries<R>> {
    a.invert()
}

/// Assignment `v ↦ s_v` of square roots; the value of `v` is `s_v²`.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalPoint<R: Scalar = Rational> {
    pub sqrt_assignment: BTreeMap<Var, R>,
    pub rng_seed: u64,
}

impl<R: Scalar> EvalPoint<R> {
    pub fn sqrt_of(&self, v: Var) -> Result<&R> {
        self.sqrt_assignment
            .get(&v)
            .ok_or_else(|| Error::Unassigned(v.to_string()))
    }

    pub fn value(&self, v: Var) -> Result<R> {
        let s = self.sqrt_of(v)?;
        Ok(s.times(s))
    }

    /// `∏ s_v^{d_v}`, the square root of `eval_monomial(m.pow(2))`.
    pub fn sqrt_monomial(&self, m: &HalfMonomial) -> Result<R> {
        m.require_integral()?;
        let mut acc = R::one();
        for &(v, d) in m.exponents() {
            acc = acc.times(&self.sqrt_of(v)?.powi(d / 2)?);
        }
        Ok(acc)
    }
}

impl EvalPoint<Rational> {
    pub fn new(pairs: impl IntoIterator<Item = (Var, Rational)>) -> Self {
        Self {
            sqrt_assignment: pairs.into_iter().collect(),
            rng_seed: 0,
        }
    }

    /// Draws `s_v = k/d` with `2 ≤ k, d ≤ 40`, `k ≠ d` for every variable.
    pub fn random(vars: &BTreeSet<Var>, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sqrt_assignment = vars
            .iter()
            .map(|&v| {
                let (k, d) = loop {
                    let k: i64 = rng.random_range(2..=40);
                    let d: i64 = rng.random_range(2..=40);
                    if k != d {
                        break (k, d);
                    }
                };
                (v, rat(k, d))
            })
            .collect();
        Self {
            sqrt_assignment,
            rng_seed: seed,
        }
    }

    pub fn lift<S: Scalar>(&self) -> EvalPoint<S> {
        EvalPoint {
            sqrt_assignment: self
                .sqrt_assignment
                .iter()
                .map(|(&v, s)| (v, S::from_rational(s)))
                .collect(),
            rng_seed: self.rng_seed,
        }
    }
}

impl fmt::Display for EvalPoint<Rational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .sqrt_assignment
            .iter()
            .map(|(v, s)| format!("{v}={}", rational_to_string(&(s * s))))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// `∏ s_v^{d_v}`: the exact value of `m` at `p`.
pub fn eval_monomial<R: Scalar>(m: &HalfMonomial, p: &EvalPoint<R>) -> Result<R> {
    let mut acc = R::one();
    for &(v, d) in m.exponents() {
        acc = acc.times(&p.sqrt_of(v)?.powi(d)?);
    }
    Ok(acc)
}

/// Seed for the `i`-th point derived from a base seed (splitmix64 step).
pub fn derive_seed(base: u64, i: u64) -> u64 {
    let mut z = base.wrapping_add(i.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// True when numerator and denominator are coprime and the denominator is positive.
pub fn is_canonical(r: &Rational) -> bool {
    use num::Integer;
    r.denom().is_positive() && r.numer().gcd(r.denom()).is_one()
}
