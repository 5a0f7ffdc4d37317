//! Rational-function expressions, decided by exact evaluation.
//!
//! These carry the `q⁰` limits of theta expressions and the components of
//! tuples acted on by the cohomological and K-theoretic Hecke operators.
//! Nodes are shared, so operator compositions stay small.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num::Zero;

use crate::error::{Error, Result};
use crate::exactseries::{eval_monomial, int, rational_to_string, EvalPoint, HalfMonomial, QSeries, Rational, Var};
use crate::theta::{check_equal, AtomKind, CheckConfig, FactoredExpr, Mismatch};

#[derive(Debug)]
enum Node {
    Const(Rational),
    Mono(HalfMonomial),
    Add(RatExpr, RatExpr),
    Mul(RatExpr, RatExpr),
    Neg(RatExpr),
    Inv(RatExpr),
}

#[derive(Clone, Debug)]
pub struct RatExpr(Arc<Node>);

impl RatExpr {
    fn node(n: Node) -> Self {
        RatExpr(Arc::new(n))
    }

    pub fn constant(c: Rational) -> Self {
        Self::node(Node::Const(c))
    }

    pub fn int(n: i64) -> Self {
        Self::constant(int(n))
    }

    pub fn zero() -> Self {
        Self::int(0)
    }

    pub fn one() -> Self {
        Self::int(1)
    }

    pub fn monomial(m: HalfMonomial) -> Self {
        Self::node(Node::Mono(m))
    }

    /// A single variable, used additively or multiplicatively alike.
    pub fn var(v: Var) -> Self {
        Self::monomial(HalfMonomial::var(v))
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::node(Node::Add(self.clone(), o.clone()))
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::node(Node::Mul(self.clone(), o.clone()))
    }

    pub fn div(&self, o: &Self) -> Self {
        self.mul(&o.inv())
    }

    pub fn neg(&self) -> Self {
        Self::node(Node::Neg(self.clone()))
    }

    pub fn inv(&self) -> Self {
        Self::node(Node::Inv(self.clone()))
    }

    /// `1 − m`.
    pub fn one_minus(m: &HalfMonomial) -> Self {
        Self::one().sub(&Self::monomial(m.clone()))
    }

    pub fn sum(items: impl IntoIterator<Item = RatExpr>) -> Self {
        items.into_iter().reduce(|a, b| a.add(&b)).unwrap_or_else(Self::zero)
    }

    pub fn product(items: impl IntoIterator<Item = RatExpr>) -> Self {
        items.into_iter().reduce(|a, b| a.mul(&b)).unwrap_or_else(Self::one)
    }

    pub fn map_monomials(&self, f: &impl Fn(&HalfMonomial) -> HalfMonomial) -> Self {
        match &*self.0 {
            Node::Const(_) => self.clone(),
            Node::Mono(m) => Self::monomial(f(m)),
            Node::Add(a, b) => a.map_monomials(f).add(&b.map_monomials(f)),
            Node::Mul(a, b) => a.map_monomials(f).mul(&b.map_monomials(f)),
            Node::Neg(a) => a.map_monomials(f).neg(),
            Node::Inv(a) => a.map_monomials(f).inv(),
        }
    }

    /// Exact value; a vanishing denominator is a pole.
    pub fn eval(&self, p: &EvalPoint) -> Result<Rational> {
        Ok(match &*self.0 {
            Node::Const(c) => c.clone(),
            Node::Mono(m) => eval_monomial(m, p)?,
            Node::Add(a, b) => a.eval(p)? + b.eval(p)?,
            Node::Mul(a, b) => {
                let x = a.eval(p)?;
                if x.is_zero() {
                    // still evaluate b so that poles are not masked
                    b.eval(p)?;
                    x
                } else {
                    x * b.eval(p)?
                }
            }
            Node::Neg(a) => -a.eval(p)?,
            Node::Inv(a) => {
                let x = a.eval(p)?;
                if x.is_zero() {
                    return Err(Error::PoleAtEvaluation);
                }
                x.recip()
            }
        })
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match &*self.0 {
            Node::Const(_) => {}
            Node::Mono(m) => out.extend(m.vars()),
            Node::Add(a, b) | Node::Mul(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Node::Neg(a) | Node::Inv(a) => a.collect_vars(out),
        }
    }
}

impl fmt::Display for RatExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            Node::Const(c) => write!(f, "{}", rational_to_string(c)),
            Node::Mono(m) => write!(f, "{m}"),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Mul(a, b) => write!(f, "{a}*{b}"),
            Node::Neg(a) => write!(f, "-({a})"),
            Node::Inv(a) => write!(f, "1/({a})"),
        }
    }
}

/// `lim_{q→0} δ(a, b) = (1 − 1/(ab)) / ((1 − 1/a)(1 − 1/b))`.
pub fn lim_delta(a: &HalfMonomial, b: &HalfMonomial) -> RatExpr {
    RatExpr::one_minus(&a.mul(b).inv()).div(&RatExpr::one_minus(&a.inv()).mul(&RatExpr::one_minus(&b.inv())))
}

/// `lim_{q→0} ϑ(m) = m^{1/2} − m^{−1/2}`; needs `m` in the integer lattice.
pub fn lim_theta(m: &HalfMonomial) -> Result<RatExpr> {
    m.require_integral()?;
    let half = HalfMonomial::from_doubled(m.exponents().iter().map(|&(v, d)| (v, d / 2)));
    Ok(RatExpr::monomial(half.clone()).sub(&RatExpr::monomial(half.inv())))
}

/// The `q⁰` coefficient of a theta expression, as a rational function.
pub fn q_zero_limit(e: &FactoredExpr) -> Result<RatExpr> {
    let mut terms = Vec::with_capacity(e.terms.len());
    for t in &e.terms {
        let mut acc = RatExpr::constant(t.scalar.clone());
        for a in &t.factors {
            let base = match &a.kind {
                AtomKind::ThetaPrimeOne => continue,
                AtomKind::Theta(m) => lim_theta(m)?,
                AtomKind::Delta(x, y) => lim_delta(x, y),
            };
            for _ in 0..a.power.unsigned_abs() {
                acc = if a.power > 0 { acc.mul(&base) } else { acc.div(&base) };
            }
        }
        terms.push(acc);
    }
    Ok(RatExpr::sum(terms))
}

/// Compares two rational expressions at `cfg.points` random points.
pub fn compare_rat(a: &RatExpr, b: &RatExpr, cfg: &CheckConfig) -> Result<Option<Mismatch>> {
    let mut vars = a.vars();
    vars.extend(b.vars());
    check_equal(&vars, cfg, |ev| {
        let p = ev.point().clone();
        Ok((
            QSeries::constant(a.eval(&p)?, 0),
            QSeries::constant(b.eval(&p)?, 0),
        ))
    })
}

/// True when the two expressions agree at all sampled points.
pub fn rat_equal(a: &RatExpr, b: &RatExpr, cfg: &CheckConfig) -> Result<bool> {
    Ok(compare_rat(a, b, cfg)?.is_none())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactseries::rat;
    use crate::theta::{delta_series, expr_eval};

    fn m(s: &str) -> HalfMonomial {
        s.parse().unwrap()
    }

    #[test]
    fn limit_of_delta_at_four_nine() {
        let p = EvalPoint::new([(Var::Z(1), rat(2, 1)), (Var::H, rat(3, 1))]);
        let v = lim_delta(&m("z1"), &m("h")).eval(&p).unwrap();
        assert_eq!(v, rat(35, 24));
        let s = delta_series(&m("z1"), &m("h"), &p, 2).unwrap();
        assert_eq!(s.coeff(0), &v);
    }

    #[test]
    fn limit_matches_constant_term_of_expressions() {
        let e: FactoredExpr = "delta(z2/z1, mu2/mu1)*theta(h)^2*theta'(1)^-1 - 3*delta(z1/z2, h)*theta(z1/z2)^-1"
            .parse()
            .unwrap();
        let lim = q_zero_limit(&e).unwrap();
        let vars = e.vars();
        for seed in 0..5 {
            let p = EvalPoint::random(&vars, seed);
            let series = expr_eval(&e, &p, 1).unwrap();
            assert_eq!(&lim.eval(&p).unwrap(), series.coeff(0));
        }
    }

    #[test]
    fn poles_are_reported() {
        let p = EvalPoint::new([(Var::Z(1), rat(1, 1))]);
        let e = RatExpr::one_minus(&m("z1")).inv();
        assert_eq!(e.eval(&p), Err(Error::PoleAtEvaluation));
        let masked = RatExpr::zero().mul(&e);
        assert_eq!(masked.eval(&p), Err(Error::PoleAtEvaluation));
    }

    #[test]
    fn half_lattice_theta_limit_is_rejected() {
        assert!(lim_theta(&m("h^(1/2)")).is_err());
    }
}
