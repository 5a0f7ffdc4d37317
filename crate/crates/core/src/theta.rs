//! The theta kernel.
//!
//! `ϑ(x) = x^{1/2}(1 − x^{-1}) ∏_{n≥1}(1 − qⁿx)(1 − qⁿ/x)` and
//! `δ(a,b) = ϑ(ab)ϑ′(1)/(ϑ(a)ϑ(b))`, formal sums of products of these
//! ([`FactoredExpr`]), their exact evaluation, and the randomized identity
//! checker every other module leans on.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use num::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exactseries::{
    derive_seed, int, parse_rational, rational_to_string, EvalPoint, HalfMonomial, QSeries,
    Rational, Scalar, Var,
};

/// `ϑ` at `m` evaluated at `p`, truncated at `order`.
pub fn theta_series<R: Scalar>(m: &HalfMonomial, p: &EvalPoint<R>, order: usize) -> Result<QSeries<R>> {
    let r = p.sqrt_monomial(m)?;
    let v = r.times(&r);
    let vinv = v.recip()?;
    let lead = r.minus(&r.recip()?);
    let mut s = QSeries::constant(lead, order);
    for n in 1..=order {
        s.mul_one_minus(&v, n);
        s.mul_one_minus(&vinv, n);
    }
    Ok(s)
}

/// `ϑ′(1) = ∏_{n≥1}(1 − qⁿ)²`.
pub fn theta_prime_one<R: Scalar>(order: usize) -> QSeries<R> {
    let mut s = QSeries::one(order);
    for n in 1..=order {
        s.mul_one_minus(&R::one(), n);
        s.mul_one_minus(&R::one(), n);
    }
    s
}

pub fn delta_series<R: Scalar>(
    a: &HalfMonomial,
    b: &HalfMonomial,
    p: &EvalPoint<R>,
    order: usize,
) -> Result<QSeries<R>> {
    a.require_integral()?;
    b.require_integral()?;
    let num = theta_series(&a.mul(b), p, order)?.mul(&theta_prime_one(order));
    let den = theta_series(a, p, order)?.mul(&theta_series(b, p, order)?);
    Ok(num.mul(&den.invert()?))
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum AtomKind {
    Theta(HalfMonomial),
    ThetaPrimeOne,
    Delta(HalfMonomial, HalfMonomial),
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Atom {
    pub kind: AtomKind,
    pub power: i32,
}

impl Atom {
    pub fn theta(m: HalfMonomial) -> Self {
        Self {
            kind: AtomKind::Theta(m),
            power: 1,
        }
    }

    pub fn delta(a: HalfMonomial, b: HalfMonomial) -> Self {
        Self {
            kind: AtomKind::Delta(a, b),
            power: 1,
        }
    }

    pub fn theta_prime_one() -> Self {
        Self {
            kind: AtomKind::ThetaPrimeOne,
            power: 1,
        }
    }

    pub fn pow(mut self, k: i32) -> Self {
        self.power *= k;
        self
    }

    pub fn map_monomials(&self, f: &impl Fn(&HalfMonomial) -> HalfMonomial) -> Self {
        let kind = match &self.kind {
            AtomKind::Theta(m) => AtomKind::Theta(f(m)),
            AtomKind::ThetaPrimeOne => AtomKind::ThetaPrimeOne,
            AtomKind::Delta(a, b) => AtomKind::Delta(f(a), f(b)),
        };
        Self {
            kind,
            power: self.power,
        }
    }
}

/// One summand: a rational scalar times a product of atoms.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Term {
    pub scalar: Rational,
    pub factors: Vec<Atom>,
}

impl Term {
    pub fn new(scalar: Rational, factors: Vec<Atom>) -> Self {
        let mut t = Self { scalar, factors };
        t.canonicalize();
        t
    }

    fn canonicalize(&mut self) {
        let mut merged: BTreeMap<AtomKind, i32> = BTreeMap::new();
        for a in self.factors.drain(..) {
            *merged.entry(a.kind).or_insert(0) += a.power;
        }
        self.factors = merged
            .into_iter()
            .filter(|&(_, p)| p != 0)
            .map(|(kind, power)| Atom { kind, power })
            .collect();
    }

    pub fn mul(&self, o: &Term) -> Term {
        let mut factors = self.factors.clone();
        factors.extend(o.factors.iter().cloned());
        Term::new(&self.scalar * &o.scalar, factors)
    }

    /// Number of Delta atoms, counted with multiplicity.
    pub fn delta_count(&self) -> i32 {
        self.factors
            .iter()
            .filter(|a| matches!(a.kind, AtomKind::Delta(..)))
            .map(|a| a.power.abs())
            .sum()
    }
}

/// Formal signed sum of products of atoms. The empty sum is zero.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct FactoredExpr {
    pub terms: Vec<Term>,
}

impl FactoredExpr {
    pub fn zero() -> Self {
        Self { terms: vec![] }
    }

    pub fn one() -> Self {
        Self::scalar(int(1))
    }

    pub fn scalar(c: Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: vec![Term::new(c, vec![])],
        }
    }

    pub fn atom(a: Atom) -> Self {
        Self {
            terms: vec![Term::new(int(1), vec![a])],
        }
    }

    pub fn product(atoms: Vec<Atom>) -> Self {
        Self {
            terms: vec![Term::new(int(1), atoms)],
        }
    }

    pub fn theta(m: HalfMonomial) -> Self {
        Self::atom(Atom::theta(m))
    }

    pub fn delta(a: HalfMonomial, b: HalfMonomial) -> Self {
        Self::atom(Atom::delta(a, b))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(o.terms.iter().cloned());
        Self { terms }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&int(-1))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| Term::new(&t.scalar * c, t.factors.clone()))
                .collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * o.terms.len());
        for a in &self.terms {
            for b in &o.terms {
                terms.push(a.mul(b));
            }
        }
        Self { terms }
    }

    pub fn mul_atoms(&self, atoms: &[Atom]) -> Self {
        self.mul(&Self::product(atoms.to_vec()))
    }

    /// Applies `f` to every monomial argument of every atom.
    pub fn map_monomials(&self, f: &impl Fn(&HalfMonomial) -> HalfMonomial) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| Term::new(t.scalar.clone(), t.factors.iter().map(|a| a.map_monomials(f)).collect()))
                .collect(),
        }
    }

    /// Ring map on variables, see [`HalfMonomial::substitute`].
    pub fn substitute(&self, f: &impl Fn(Var) -> Option<HalfMonomial>) -> Self {
        self.map_monomials(&|m| m.substitute(f))
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for t in &self.terms {
            for a in &t.factors {
                match &a.kind {
                    AtomKind::Theta(m) => out.extend(m.vars()),
                    AtomKind::ThetaPrimeOne => {}
                    AtomKind::Delta(x, y) => {
                        out.extend(x.vars());
                        out.extend(y.vars());
                    }
                }
            }
        }
        out
    }

    /// Drops terms that vanish identically because they contain `ϑ(1)` to a
    /// positive net power after flattening into theta factors.
    pub fn prune_vanishing(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|t| !matches!(flatten(t), Ok(None)))
                .cloned()
                .collect(),
        }
    }
}

/// Key of a flattened term: the power of `ϑ′(1)` and the oriented theta factors.
pub type ThetaMonomial = (i32, Vec<(HalfMonomial, i32)>);

/// Rewrites `e` as a sum of distinct theta monomials using only `δ`'s definition
/// and `ϑ(1/x) = −ϑ(x)`. Two expressions with equal normal forms coincide
/// without any theta-function identity.
pub fn theta_normal_form(e: &FactoredExpr) -> Result<BTreeMap<ThetaMonomial, Rational>> {
    let mut out: BTreeMap<ThetaMonomial, Rational> = BTreeMap::new();
    for t in &e.terms {
        if let Some(f) = flatten(t)? {
            *out.entry((f.tp1, f.thetas)).or_insert_with(Rational::zero) += f.scalar;
        }
    }
    out.retain(|_, c| !c.is_zero());
    Ok(out)
}

/// `ϑ(1/x) = −ϑ(x)`: picks a representative of `{m, m⁻¹}` and the sign.
fn theta_representative(m: &HalfMonomial) -> (HalfMonomial, bool) {
    match m.exponents().first() {
        Some(&(_, e)) if e < 0 => (m.inv(), true),
        _ => (m.clone(), false),
    }
}

/// A term rewritten as `scalar · ϑ′(1)^k · ∏ ϑ(m)^p` with merged powers.
struct FlatTerm {
    scalar: Rational,
    tp1: i32,
    thetas: Vec<(HalfMonomial, i32)>,
}

/// `Ok(None)` means the term is identically zero.
fn flatten(t: &Term) -> Result<Option<FlatTerm>> {
    let mut thetas: BTreeMap<HalfMonomial, i32> = BTreeMap::new();
    let mut tp1 = 0;
    let mut negate = false;
    let mut push = |m: HalfMonomial, p: i32, thetas: &mut BTreeMap<HalfMonomial, i32>| {
        let (rep, flip) = theta_representative(&m);
        if flip && p % 2 != 0 {
            negate = !negate;
        }
        *thetas.entry(rep).or_insert(0) += p;
    };
    for a in &t.factors {
        match &a.kind {
            AtomKind::Theta(m) => push(m.clone(), a.power, &mut thetas),
            AtomKind::ThetaPrimeOne => tp1 += a.power,
            AtomKind::Delta(x, y) => {
                x.require_integral()?;
                y.require_integral()?;
                push(x.mul(y), a.power, &mut thetas);
                push(x.clone(), -a.power, &mut thetas);
                push(y.clone(), -a.power, &mut thetas);
                tp1 += a.power;
            }
        }
    }
    match thetas.remove(&HalfMonomial::one()) {
        Some(p) if p > 0 => return Ok(None),
        Some(p) if p < 0 => return Err(Error::PoleAtEvaluation),
        _ => {}
    }
    let scalar = if negate { -t.scalar.clone() } else { t.scalar.clone() };
    Ok(Some(FlatTerm {
        scalar,
        tp1,
        thetas: thetas.into_iter().filter(|&(_, p)| p != 0).collect(),
    }))
}

/// Evaluates expressions at one point, caching theta series and inverses.
pub struct Evaluator<R: Scalar = Rational> {
    point: EvalPoint<R>,
    order: usize,
    thetas: HashMap<HalfMonomial, QSeries<R>>,
    inverses: HashMap<HalfMonomial, QSeries<R>>,
    tp1: QSeries<R>,
    tp1_inv: QSeries<R>,
}

impl<R: Scalar> Evaluator<R> {
    pub fn new(point: EvalPoint<R>, order: usize) -> Self {
        let tp1 = theta_prime_one(order);
        let tp1_inv = tp1.invert().expect("theta'(1) is a unit");
        Self {
            point,
            order,
            thetas: HashMap::new(),
            inverses: HashMap::new(),
            tp1,
            tp1_inv,
        }
    }

    pub fn point(&self) -> &EvalPoint<R> {
        &self.point
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn theta(&mut self, m: &HalfMonomial) -> Result<&QSeries<R>> {
        if !self.thetas.contains_key(m) {
            let s = theta_series(m, &self.point, self.order)?;
            self.thetas.insert(m.clone(), s);
        }
        Ok(&self.thetas[m])
    }

    fn theta_inv(&mut self, m: &HalfMonomial) -> Result<&QSeries<R>> {
        if !self.inverses.contains_key(m) {
            let inv = self.theta(m)?.invert()?;
            self.inverses.insert(m.clone(), inv);
        }
        Ok(&self.inverses[m])
    }

    fn eval_term(&mut self, t: &Term) -> Result<QSeries<R>> {
        let Some(flat) = flatten(t)? else {
            return Ok(QSeries::zero(self.order));
        };
        let mut acc = QSeries::constant(R::from_rational(&flat.scalar), self.order);
        let tp = if flat.tp1 >= 0 { self.tp1.clone() } else { self.tp1_inv.clone() };
        for _ in 0..flat.tp1.unsigned_abs() {
            acc = acc.mul(&tp);
        }
        for (m, p) in &flat.thetas {
            let s = if *p > 0 { self.theta(m)?.clone() } else { self.theta_inv(m)?.clone() };
            for _ in 0..p.unsigned_abs() {
                acc = acc.mul(&s);
            }
        }
        Ok(acc)
    }

    pub fn eval(&mut self, e: &FactoredExpr) -> Result<QSeries<R>> {
        let mut acc = QSeries::zero(self.order);
        for t in &e.terms {
            acc = acc.add(&self.eval_term(t)?);
        }
        Ok(acc)
    }
}

pub fn expr_eval<R: Scalar>(e: &FactoredExpr, p: &EvalPoint<R>, order: usize) -> Result<QSeries<R>> {
    Evaluator::new(p.clone(), order).eval(e)
}

/// Sampling parameters for identity checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckConfig {
    pub points: usize,
    pub order: usize,
    pub seed: u64,
}

pub const DEFAULT_SEED: u64 = 20240001;

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            points: 3,
            order: 4,
            seed: DEFAULT_SEED,
        }
    }
}

impl CheckConfig {
    pub fn new(points: usize, order: usize, seed: u64) -> Self {
        Self { points, order, seed }
    }
}

/// Resampling budget per check.
pub const MAX_ATTEMPTS: usize = 100;

/// A point where two sides disagree, with the first differing coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct Mismatch {
    pub point: EvalPoint,
    pub coeff_index: usize,
    pub lhs: Rational,
    pub rhs: Rational,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "q^{} coefficient differs at {} (seed {}): {} vs {}",
            self.coeff_index,
            self.point,
            self.point.rng_seed,
            rational_to_string(&self.lhs),
            rational_to_string(&self.rhs)
        )
    }
}

fn first_difference(point: &EvalPoint, lhs: &QSeries, rhs: &QSeries) -> Option<Mismatch> {
    (0..=lhs.order()).find(|&i| lhs.coeff(i) != rhs.coeff(i)).map(|i| Mismatch {
        point: point.clone(),
        coeff_index: i,
        lhs: lhs.coeff(i).clone(),
        rhs: rhs.coeff(i).clone(),
    })
}

/// Evaluates `sides` at `cfg.points` random pole-free points over `vars` and
/// compares the two returned series coefficientwise. Points where `sides`
/// reports a pole are resampled, up to [`MAX_ATTEMPTS`] in total.
pub fn check_equal<F>(vars: &BTreeSet<Var>, cfg: &CheckConfig, mut sides: F) -> Result<Option<Mismatch>>
where
    F: FnMut(&mut Evaluator) -> Result<(QSeries, QSeries)>,
{
    let mut attempts = 0;
    for i in 0..cfg.points {
        let base = derive_seed(cfg.seed, i as u64);
        let mut j = 0;
        loop {
            if attempts >= MAX_ATTEMPTS {
                return Err(Error::Exhausted(MAX_ATTEMPTS));
            }
            attempts += 1;
            let point = EvalPoint::random(vars, derive_seed(base, j));
            j += 1;
            let mut ev = Evaluator::new(point.clone(), cfg.order);
            match sides(&mut ev) {
                Ok((l, r)) => {
                    if let Some(m) = first_difference(&point, &l, &r) {
                        return Ok(Some(m));
                    }
                    break;
                }
                Err(Error::PoleAtEvaluation) => continue,
                Err(e) => return Err(e),
            }
        }
    }
    Ok(None)
}

/// Like [`check_equal`] for two expressions.
pub fn compare_exprs(e1: &FactoredExpr, e2: &FactoredExpr, cfg: &CheckConfig) -> Result<Option<Mismatch>> {
    let mut vars = e1.vars();
    vars.extend(e2.vars());
    check_equal(&vars, cfg, |ev| Ok((ev.eval(e1)?, ev.eval(e2)?)))
}

pub fn expr_equal(e1: &FactoredExpr, e2: &FactoredExpr, points: usize, order: usize, seed: u64) -> Result<bool> {
    Ok(compare_exprs(e1, e2, &CheckConfig::new(points, order, seed))?.is_none())
}

/// How an atom transforms under `v ↦ q·v`: it gets multiplied by
/// `sign · q^{qshift_doubled/2} · multiplier`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuasiFactor {
    pub sign: i32,
    pub multiplier: HalfMonomial,
    pub qshift_doubled: i32,
}

impl QuasiFactor {
    pub fn identity() -> Self {
        Self {
            sign: 1,
            multiplier: HalfMonomial::one(),
            qshift_doubled: 0,
        }
    }

    pub fn compose(&self, o: &Self) -> Self {
        Self {
            sign: self.sign * o.sign,
            multiplier: self.multiplier.mul(&o.multiplier),
            qshift_doubled: self.qshift_doubled + o.qshift_doubled,
        }
    }
}

fn integral_exponent(m: &HalfMonomial, v: Var) -> Result<i32> {
    m.require_integral()?;
    Ok(m.doubled(v) / 2)
}

/// `ϑ(q^r x) = (−1)^r q^{−r²/2} x^{−r} ϑ(x)`, raised to the atom's power;
/// for `δ(a,b)` with `a ∋ v^r`, `b ∋ v^s` this combines to `q^{−rs} a^{−s} b^{−r}`.
pub fn quasi_period_factor(a: &Atom, v: Var) -> Result<QuasiFactor> {
    let p = a.power;
    match &a.kind {
        AtomKind::ThetaPrimeOne => Ok(QuasiFactor::identity()),
        AtomKind::Theta(m) => {
            let r = integral_exponent(m, v)?;
            Ok(QuasiFactor {
                sign: if (r * p) % 2 == 0 { 1 } else { -1 },
                multiplier: m.pow(-r * p),
                qshift_doubled: -r * r * p,
            })
        }
        AtomKind::Delta(x, y) => {
            let r = integral_exponent(x, v)?;
            let s = integral_exponent(y, v)?;
            Ok(QuasiFactor {
                sign: 1,
                multiplier: x.pow(-s * p).mul(&y.pow(-r * p)),
                qshift_doubled: -2 * r * s * p,
            })
        }
    }
}

pub fn term_quasi_period_factor(t: &Term, v: Var) -> Result<QuasiFactor> {
    t.factors
        .iter()
        .try_fold(QuasiFactor::identity(), |acc, a| Ok(acc.compose(&quasi_period_factor(a, v)?)))
}

/// Truncated Laurent series in `q^{1/2}`: `Σ c_k q^{k/2}` for
/// `lo ≤ k < hi`, where everything from `q^{hi/2}` on is unknown.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfLaurent {
    lo: i32,
    coeffs: Vec<Rational>,
}

impl HalfLaurent {
    fn monomial(k: i32, c: Rational, hi: i32) -> Self {
        let mut coeffs = vec![Rational::zero(); (hi - k).max(0) as usize];
        if let Some(x) = coeffs.first_mut() {
            *x = c;
        }
        Self { lo: k, coeffs }
    }

    fn from_terms(terms: &[(i32, Rational)], hi: i32) -> Self {
        let lo = terms.iter().map(|t| t.0).min().unwrap_or(hi).min(hi);
        let mut coeffs = vec![Rational::zero(); (hi - lo) as usize];
        for (k, c) in terms {
            if *k < hi {
                coeffs[(k - lo) as usize] += c;
            }
        }
        Self { lo, coeffs }
    }

    pub fn hi(&self) -> i32 {
        self.lo + self.coeffs.len() as i32
    }

    /// Coefficient of `q^{k/2}`.
    pub fn coeff(&self, k: i32) -> Option<Rational> {
        if k >= self.hi() {
            None
        } else if k < self.lo {
            Some(Rational::zero())
        } else {
            Some(self.coeffs[(k - self.lo) as usize].clone())
        }
    }

    fn valuation(&self) -> Option<i32> {
        self.coeffs.iter().position(|c| !c.is_zero()).map(|i| self.lo + i as i32)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let (va, vb) = (self.valuation().unwrap_or(self.hi()), o.valuation().unwrap_or(o.hi()));
        let hi = (self.hi() + vb).min(o.hi() + va);
        let lo = self.lo + o.lo;
        let mut coeffs = vec![Rational::zero(); (hi - lo).max(0) as usize];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                let k = i + j;
                if (lo + k as i32) < hi && !b.is_zero() {
                    coeffs[k] += a * b;
                }
            }
        }
        Self { lo, coeffs }
    }

    pub fn invert(&self) -> Result<Self> {
        let v = self.valuation().ok_or(Error::PoleAtEvaluation)?;
        let rel = (self.hi() - v) as usize;
        let start = (v - self.lo) as usize;
        let a = &self.coeffs[start..];
        let inv0 = num::rational::Ratio::recip(&a[0]);
        let mut out: Vec<Rational> = vec![inv0.clone()];
        for k in 1..rel {
            let mut acc = Rational::zero();
            for i in 1..=k {
                acc += &a[i] * &out[k - i];
            }
            out.push(-(acc * &inv0));
        }
        Ok(Self { lo: -v, coeffs: out })
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self {
            lo: self.lo,
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }
}

/// `ϑ(q^r x)` at `x = eval(m)` as a Laurent series in `q^{1/2}`, expanded
/// directly from the product (not from the quasi-periodicity rule) and
/// correct through `q^{order}`.
pub fn shifted_theta_series(m: &HalfMonomial, r: i32, p: &EvalPoint, order: usize) -> Result<HalfLaurent> {
    let root = p.sqrt_monomial(m)?;
    let x = &root * &root;
    let xinv = num::rational::Ratio::recip(&x);
    let ra = r.abs();
    let n_top = order as i32 + ra + ra * (ra + 1) / 2 + 2;
    let big = 2 * (order as i32 + 2 * ra * ra + 4 * ra + 8);
    // (q^r x)^{1/2} (1 − q^{−r} x^{−1}) = q^{r/2} x^{1/2} − q^{−r/2} x^{−1/2}
    let mut acc = HalfLaurent::from_terms(&[(r, root.clone()), (-r, -(&root * &xinv))], big);
    for n in 1..=n_top {
        let f1 = HalfLaurent::from_terms(&[(0, int(1)), (2 * (n + r), -x.clone())], big);
        let f2 = HalfLaurent::from_terms(&[(0, int(1)), (2 * (n - r), -xinv.clone())], big);
        acc = acc.mul(&f1).mul(&f2);
    }
    // The omitted factors are 1 + O(q^{n_top+1−|r|}).
    let cap = 2 * (n_top + 1 - ra) + acc.valuation().unwrap_or(0);
    acc.coeffs.truncate((cap - acc.lo).max(0) as usize);
    Ok(acc)
}

/// Checks `t(v ↦ qv) = factor · t` at `p`, both sides expanded exactly in
/// `q^{1/2}` through `q^{order}`. Returns the doubled exponent of the first
/// disagreeing coefficient, if any.
pub fn quasi_period_residual(t: &Term, v: Var, p: &EvalPoint, order: usize) -> Result<Option<i32>> {
    let flat = flatten(t)?.ok_or_else(|| Error::Domain("identically zero term".into()))?;
    let hi = 2 * order as i32 + 2;
    let max_r = flat
        .thetas
        .iter()
        .map(|(m, _)| integral_exponent(m, v).map(i32::abs))
        .try_fold(0, |acc, r| r.map(|r| acc.max(r)))?;
    let work = order + 8 + (max_r * max_r) as usize;
    let roomy = 4 * work as i32 + 64;
    let mut shifted = HalfLaurent::monomial(0, flat.scalar.clone(), roomy);
    let mut plain = shifted.clone();
    let tp1 = theta_prime_one::<Rational>(work);
    let tp1 = HalfLaurent::from_terms(
        &tp1.coeffs().iter().enumerate().map(|(i, c)| (2 * i as i32, c.clone())).collect::<Vec<_>>(),
        2 * (work as i32 + 1),
    );
    let tp1 = if flat.tp1 >= 0 { tp1 } else { tp1.invert()? };
    for _ in 0..flat.tp1.unsigned_abs() {
        shifted = shifted.mul(&tp1);
        plain = plain.mul(&tp1);
    }
    for (m, pw) in &flat.thetas {
        let r = integral_exponent(m, v)?;
        let s = shifted_theta_series(m, r, p, work)?;
        let b = shifted_theta_series(m, 0, p, work)?;
        let (s, b) = if *pw > 0 { (s, b) } else { (s.invert()?, b.invert()?) };
        for _ in 0..pw.unsigned_abs() {
            shifted = shifted.mul(&s);
            plain = plain.mul(&b);
        }
    }
    let f = term_quasi_period_factor(t, v)?;
    let c = crate::exactseries::eval_monomial(&f.multiplier, p)? * int(f.sign as i64);
    let predicted = plain
        .mul(&HalfLaurent::monomial(f.qshift_doubled, int(1), f.qshift_doubled + roomy))
        .scale(&c);
    if shifted.hi() < hi || predicted.hi() < hi {
        return Err(Error::Domain("insufficient q precision in shifted expansion".into()));
    }
    let lo = shifted.lo.min(predicted.lo);
    Ok((lo..hi).find(|&k| shifted.coeff(k) != predicted.coeff(k)))
}

// ---------------------------------------------------------------------------
// Text form: `delta(z2/z1, mu2/mu1)*theta(h)^-1 - 3/2*theta'(1)^2`.

fn fmt_atom(f: &mut fmt::Formatter<'_>, a: &Atom) -> fmt::Result {
    match &a.kind {
        AtomKind::Theta(m) => write!(f, "theta({m})")?,
        AtomKind::ThetaPrimeOne => write!(f, "theta'(1)")?,
        AtomKind::Delta(x, y) => write!(f, "delta({x}, {y})")?,
    }
    if a.power != 1 {
        write!(f, "^{}", a.power)?;
    }
    Ok(())
}

impl fmt::Display for FactoredExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            let neg = t.scalar.is_negative();
            let mag = t.scalar.abs();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mut first = true;
            if !mag.is_one() || t.factors.is_empty() {
                write!(f, "{}", rational_to_string(&mag))?;
                first = false;
            }
            for a in &t.factors {
                if !first {
                    write!(f, "*")?;
                }
                fmt_atom(f, a)?;
                first = false;
            }
        }
        Ok(())
    }
}

fn parse_var_power(s: &str) -> Result<(Var, i32)> {
    let bad = || Error::Usage(format!("bad monomial factor {s:?}"));
    let (name, exp) = match s.split_once('^') {
        Some((n, e)) => (n, Some(e)),
        None => (s, None),
    };
    let v: Var = name.trim().parse()?;
    let d = match exp {
        None => 2,
        Some(e) => {
            let e = e.trim();
            if let Some(inner) = e.strip_prefix('(').and_then(|x| x.strip_suffix(')')) {
                let (n, two) = inner.split_once('/').ok_or_else(bad)?;
                if two.trim() != "2" {
                    return Err(bad());
                }
                n.trim().parse::<i32>().map_err(|_| bad())?
            } else {
                2 * e.parse::<i32>().map_err(|_| bad())?
            }
        }
    };
    Ok((v, d))
}

fn parse_product(s: &str) -> Result<Vec<(Var, i32)>> {
    let s = s.trim();
    let s = s.strip_prefix('(').and_then(|x| x.strip_suffix(')')).unwrap_or(s);
    if s == "1" {
        return Ok(vec![]);
    }
    s.split('*').map(parse_var_power).collect()
}

impl FromStr for HalfMonomial {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (num, den) = split_top_level_slash(s);
        let mut pairs = parse_product(&num)?;
        if let Some(d) = den {
            pairs.extend(parse_product(&d)?.into_iter().map(|(v, e)| (v, -e)));
        }
        Ok(HalfMonomial::from_doubled(pairs))
    }
}

fn split_top_level_slash(s: &str) -> (String, Option<String>) {
    let mut depth = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            '/' if depth == 0 => return (s[..i].to_string(), Some(s[i + 1..].to_string())),
            _ => {}
        }
    }
    (s.to_string(), None)
}

/// Splits at top-level occurrences of any of `seps`, keeping the separator.
fn split_top(s: &str, seps: &[char]) -> Vec<(Option<char>, String)> {
    let mut out = Vec::new();
    let mut depth = 0;
    let mut cur = String::new();
    let mut sep = None;
    let chars: Vec<char> = s.chars().collect();
    for (i, &c) in chars.iter().enumerate() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        // A '-' right after '^' is an exponent sign, not a separator.
        let after_caret = i > 0 && chars[i - 1] == '^';
        if depth == 0 && seps.contains(&c) && !after_caret {
            if !cur.trim().is_empty() || sep.is_some() {
                out.push((sep, std::mem::take(&mut cur)));
            }
            sep = Some(c);
        } else {
            cur.push(c);
        }
    }
    out.push((sep, cur));
    out
}

fn parse_factor(s: &str) -> Result<(Rational, Option<Atom>)> {
    let s = s.trim();
    let bad = || Error::Usage(format!("bad factor {s:?}"));
    let (body, power) = match s.rfind(")^") {
        Some(i) => (&s[..=i], s[i + 2..].trim().parse::<i32>().map_err(|_| bad())?),
        None => (s, 1),
    };
    if let Some(inner) = body.strip_prefix("delta(").and_then(|x| x.strip_suffix(')')) {
        let parts = split_top(inner, &[',']);
        if parts.len() != 2 {
            return Err(bad());
        }
        let a: HalfMonomial = parts[0].1.trim().parse()?;
        let b: HalfMonomial = parts[1].1.trim().parse()?;
        return Ok((int(1), Some(Atom::delta(a, b).pow(power))));
    }
    if body == "theta'(1)" {
        return Ok((int(1), Some(Atom::theta_prime_one().pow(power))));
    }
    if let Some(inner) = body.strip_prefix("theta(").and_then(|x| x.strip_suffix(')')) {
        return Ok((int(1), Some(Atom::theta(inner.trim().parse()?).pow(power))));
    }
    Ok((parse_rational(s)?, None))
}

impl FromStr for FactoredExpr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "0" {
            return Ok(FactoredExpr::zero());
        }
        let mut terms = Vec::new();
        for (sep, body) in split_top(s, &['+', '-']) {
            let mut scalar = if sep == Some('-') { int(-1) } else { int(1) };
            let mut atoms = Vec::new();
            // Scalars like `3/2` contain a slash; factors are split at '*' only.
            for (_, f) in split_top(&body, &['*']) {
                let (c, a) = parse_factor(&f)?;
                scalar *= c;
                atoms.extend(a);
            }
            terms.push(Term::new(scalar, atoms));
        }
        Ok(FactoredExpr { terms })
    }
}

// ---------------------------------------------------------------------------
// JSON form with doubled exponents.

#[derive(Serialize, Deserialize)]
struct JsonExpr {
    terms: Vec<JsonTerm>,
}

#[derive(Serialize, Deserialize)]
struct JsonTerm {
    scalar: String,
    factors: Vec<JsonFactor>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum JsonFactor {
    Delta {
        a: BTreeMap<String, i32>,
        b: BTreeMap<String, i32>,
        power: i32,
    },
    Theta {
        arg: BTreeMap<String, i32>,
        power: i32,
    },
    ThetaPrimeOne {
        power: i32,
    },
}

fn mono_to_json(m: &HalfMonomial) -> BTreeMap<String, i32> {
    m.exponents().iter().map(|(v, e)| (v.to_string(), *e)).collect()
}

fn mono_from_json(m: &BTreeMap<String, i32>) -> Result<HalfMonomial> {
    let pairs: Result<Vec<(Var, i32)>> = m.iter().map(|(k, e)| Ok((k.parse()?, *e))).collect();
    Ok(HalfMonomial::from_doubled(pairs?))
}

impl Serialize for FactoredExpr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let terms = self
            .terms
            .iter()
            .map(|t| JsonTerm {
                scalar: rational_to_string(&t.scalar),
                factors: t
                    .factors
                    .iter()
                    .map(|a| match &a.kind {
                        AtomKind::Delta(x, y) => JsonFactor::Delta {
                            a: mono_to_json(x),
                            b: mono_to_json(y),
                            power: a.power,
                        },
                        AtomKind::Theta(m) => JsonFactor::Theta {
                            arg: mono_to_json(m),
                            power: a.power,
                        },
                        AtomKind::ThetaPrimeOne => JsonFactor::ThetaPrimeOne { power: a.power },
                    })
                    .collect(),
            })
            .collect();
        JsonExpr { terms }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FactoredExpr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = JsonExpr::deserialize(d)?;
        let mut terms = Vec::new();
        for t in j.terms {
            let scalar = parse_rational(&t.scalar).map_err(D::Error::custom)?;
            let mut atoms = Vec::new();
            for f in t.factors {
                let atom = match f {
                    JsonFactor::Delta { a, b, power } => Atom::delta(
                        mono_from_json(&a).map_err(D::Error::custom)?,
                        mono_from_json(&b).map_err(D::Error::custom)?,
                    )
                    .pow(power),
                    JsonFactor::Theta { arg, power } => {
                        Atom::theta(mono_from_json(&arg).map_err(D::Error::custom)?).pow(power)
                    }
                    JsonFactor::ThetaPrimeOne { power } => Atom::theta_prime_one().pow(power),
                };
                atoms.push(atom);
            }
            terms.push(Term::new(scalar, atoms));
        }
        Ok(FactoredExpr { terms })
    }
}

// ---------------------------------------------------------------------------
// Identity oracles.

fn v(i: u8) -> HalfMonomial {
    HalfMonomial::var(Var::Z(i))
}

/// Fay's trisecant identity in multiplicative variables, as `lhs − rhs`,
/// with `a, b, c, d` given as monomials.
pub fn fay_residual_at(a: &HalfMonomial, b: &HalfMonomial, c: &HalfMonomial, d: &HalfMonomial) -> FactoredExpr {
    let th = |m: HalfMonomial| Atom::theta(m);
    let pair = |x: &HalfMonomial, y: &HalfMonomial| vec![th(x.mul(y)), th(x.div(y))];
    let prod = |l: Vec<Atom>, r: Vec<Atom>| FactoredExpr::product(l.into_iter().chain(r).collect());
    let lhs = prod(pair(a, c), pair(b, d));
    let rhs = prod(pair(a, b), pair(c, d)).add(&prod(pair(a, d), pair(b, c)));
    lhs.sub(&rhs)
}

/// Fay's identity with four free variables `z1..z4`.
pub fn fay_residual() -> FactoredExpr {
    fay_residual_at(&v(1), &v(2), &v(3), &v(4))
}

/// Both sides of the blow-up comparison: `t_i = z_i`, `h^{a_i} = μ_i`.
pub fn blowup_sides() -> (FactoredExpr, FactoredExpr) {
    let h = HalfMonomial::var(Var::H);
    let mu = |i| HalfMonomial::var(Var::Mu(i));
    let t1 = v(1);
    let t2 = v(2);
    let h1 = h.div(&mu(1));
    let h2 = h.div(&mu(2));
    let h12 = h.mul(&h).div(&mu(1)).div(&mu(2));
    let direct = FactoredExpr::product(vec![Atom::delta(t1.clone(), h1.clone()), Atom::delta(t2.clone(), h2.clone())]);
    let blown = FactoredExpr::product(vec![Atom::delta(t1.clone(), h12.clone()), Atom::delta(t2.div(&t1), h2)])
        .add(&FactoredExpr::product(vec![Atom::delta(t2.clone(), h12), Atom::delta(t1.div(&t2), h1)]));
    (direct, blown)
}

/// The two expressions for `E_id(X_{321})` along `s1s2s1` and `s2s1s2`.
pub fn four_term_sides() -> (FactoredExpr, FactoredExpr) {
    let l: FactoredExpr = "delta(z2/z1, mu3/mu2)*delta(z3/z2, mu3/mu1)*delta(z2/z1, mu2/mu1) \
         + delta(z1/z2, h)*delta(z3/z1, mu3/mu1)*delta(z2/z1, h)"
        .parse()
        .expect("static expression");
    let r: FactoredExpr = "delta(z3/z2, mu2/mu1)*delta(z2/z1, mu3/mu1)*delta(z3/z2, mu3/mu2) \
         + delta(z2/z3, h)*delta(z3/z1, mu3/mu1)*delta(z3/z2, h)"
        .parse()
        .expect("static expression");
    (l, r)
}

/// Compares `δ(a, b)` with the closed form of its first coefficients
/// `(1 − a⁻¹b⁻¹)/((1 − a⁻¹)(1 − b⁻¹)) + q(a⁻¹b⁻¹ − ab) + q²(a⁻²b⁻¹ + a⁻¹b⁻² − a²b − ab²)`
/// through `q²`, at `cfg.points` random points.
pub fn check_delta_expansion(cfg: &CheckConfig) -> Result<Option<Mismatch>> {
    let (va, vb) = (Var::Z(1), Var::Z(2));
    let e = FactoredExpr::delta(v(1), v(2));
    let cfg = CheckConfig { order: 2, ..*cfg };
    check_equal(&e.vars(), &cfg, |ev| {
        let a = ev.point().value(va)?;
        let b = ev.point().value(vb)?;
        let one = int(1);
        let (ai, bi) = (one.clone() / &a, one.clone() / &b);
        let c0 = (&one - &ai * &bi) / ((&one - &ai) * (&one - &bi));
        let c1 = &ai * &bi - &a * &b;
        let c2 = &ai * &ai * &bi + &ai * &bi * &bi - &a * &a * &b - &a * &b * &b;
        Ok((ev.eval(&e)?, QSeries::from_coeffs(vec![c0, c1, c2], 2)))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactseries::rat;

    fn pt(pairs: &[(Var, Rational)]) -> EvalPoint {
        EvalPoint::new(pairs.iter().cloned())
    }

    #[test]
    fn theta_at_one_has_zero_constant_term() {
        let p = pt(&[(Var::Z(1), int(3))]);
        let s = theta_series(&HalfMonomial::one(), &p, 3).unwrap();
        assert!(s.is_zero());
    }

    #[test]
    fn theta_hand_expansion_at_four() {
        let p = pt(&[(Var::Z(1), int(2))]);
        let s = theta_series(&v(1), &p, 2).unwrap();
        assert_eq!(s.coeff(0), &rat(3, 2));
        assert_eq!(s.coeff(1), &rat(-51, 8));
    }

    #[test]
    fn theta_is_odd() {
        let p = pt(&[(Var::Z(1), rat(7, 3))]);
        let a = theta_series(&v(1), &p, 5).unwrap();
        let b = theta_series(&v(1).inv(), &p, 5).unwrap();
        assert_eq!(a, b.neg());
    }

    fn brute_euler_squared(order: usize) -> Vec<i64> {
        let mut poly = vec![0i64; order + 1];
        poly[0] = 1;
        for n in 1..=order {
            for _ in 0..2 {
                for i in (n..=order).rev() {
                    poly[i] -= poly[i - n];
                }
            }
        }
        poly
    }

    #[test]
    fn theta_prime_one_expansions() {
        assert_eq!(theta_prime_one::<Rational>(0), QSeries::from_ints(&[1]));
        assert_eq!(theta_prime_one::<Rational>(3), QSeries::from_ints(&[1, -2, -1, 2]));
        assert_eq!(theta_prime_one::<Rational>(8), QSeries::from_ints(&brute_euler_squared(8)));
    }

    #[test]
    fn delta_coefficients_at_four_nine() {
        let p = pt(&[(Var::Z(1), int(2)), (Var::Z(2), int(3))]);
        let s = delta_series(&v(1), &v(2), &p, 2).unwrap();
        assert_eq!(s.coeff(0), &rat(35, 24));
        assert_eq!(s.coeff(1), &rat(-1295, 36));
        // a⁻²b⁻¹ + a⁻¹b⁻² − a²b − ab² at (4, 9)
        let (a, b) = (int(4), int(9));
        let expected = (&a * &a * &b).recip() + (&a * &b * &b).recip() - &a * &a * &b - &a * &b * &b;
        assert_eq!(expected, rat(-606515, 1296));
        assert_eq!(s.coeff(2), &expected);
    }

    #[test]
    fn delta_matches_closed_form_coefficients() {
        assert!(check_delta_expansion(&CheckConfig::new(5, 2, 11)).unwrap().is_none());
    }

    #[test]
    fn delta_pole_is_reported() {
        let p = pt(&[(Var::Z(1), int(2))]);
        let e = delta_series(&HalfMonomial::one(), &v(1), &p, 2).unwrap_err();
        assert_eq!(e, Error::PoleAtEvaluation);
    }

    #[test]
    fn delta_requires_integral_arguments() {
        let p = pt(&[(Var::H, int(2)), (Var::Z(1), int(3))]);
        let half = HalfMonomial::from_doubled([(Var::H, 1)]);
        assert!(matches!(delta_series(&half, &v(1), &p, 1), Err(Error::LatticeViolation(_))));
    }

    #[test]
    fn singleton_and_empty_expressions() {
        let p = pt(&[(Var::Z(1), rat(5, 3)), (Var::Z(2), rat(2, 7))]);
        let e = FactoredExpr::delta(v(1), v(2));
        assert_eq!(expr_eval(&e, &p, 4).unwrap(), delta_series(&v(1), &v(2), &p, 4).unwrap());
        assert!(expr_eval(&FactoredExpr::zero(), &p, 4).unwrap().is_zero());
    }

    #[test]
    fn reflexive_and_symmetric() {
        let e = FactoredExpr::delta(v(1), v(2).inv());
        assert!(expr_equal(&e, &e, 3, 4, 1).unwrap());
        let f = FactoredExpr::delta(v(2).inv(), v(1));
        assert!(expr_equal(&e, &f, 3, 4, 1).unwrap());
        let g = FactoredExpr::delta(v(2), v(1));
        assert!(!expr_equal(&e, &g, 3, 4, 1).unwrap());
    }

    #[test]
    fn fay_and_blowup_vanish() {
        let cfg = CheckConfig::new(5, 6, 11);
        assert!(compare_exprs(&fay_residual(), &FactoredExpr::zero(), &cfg).unwrap().is_none());
        let (a, b) = blowup_sides();
        assert!(compare_exprs(&a, &b, &cfg).unwrap().is_none());
        let (a, b) = four_term_sides();
        assert!(compare_exprs(&a, &b, &CheckConfig::new(3, 4, 5)).unwrap().is_none());
    }

    #[test]
    fn exhaustion_on_structural_pole() {
        let e = FactoredExpr::delta(HalfMonomial::one(), v(1));
        let err = compare_exprs(&e, &e, &CheckConfig::default()).unwrap_err();
        assert_eq!(err, Error::Exhausted(MAX_ATTEMPTS));
    }

    #[test]
    fn quasi_period_examples() {
        let th = Atom::theta(v(1));
        assert_eq!(
            quasi_period_factor(&th, Var::Z(1)).unwrap(),
            QuasiFactor {
                sign: -1,
                multiplier: v(1).inv(),
                qshift_doubled: -1
            }
        );
        let d = Atom::delta(v(1), v(2));
        assert_eq!(
            quasi_period_factor(&d, Var::Z(1)).unwrap(),
            QuasiFactor {
                sign: 1,
                multiplier: v(2).inv(),
                qshift_doubled: 0
            }
        );
        assert_eq!(quasi_period_factor(&d, Var::Z(3)).unwrap(), QuasiFactor::identity());
        assert_eq!(
            quasi_period_factor(&Atom::theta_prime_one(), Var::Z(1)).unwrap(),
            QuasiFactor::identity()
        );
    }

    #[test]
    fn quasi_periodicity_holds_on_expansions() {
        let p = pt(&[(Var::Z(1), rat(5, 3)), (Var::Z(2), rat(2, 7)), (Var::H, rat(9, 4))]);
        let exprs = [
            "theta(z1)",
            "theta(z1^2/z2)^-1",
            "delta(z1/z2, h)",
            "delta(z2/z1, z1*h)*theta'(1)^-2",
            "delta(z1^2, 1/z1)^2*theta(z2)",
        ];
        for s in exprs {
            let e: FactoredExpr = s.parse().unwrap();
            let r = quasi_period_residual(&e.terms[0], Var::Z(1), &p, 3).unwrap();
            assert_eq!(r, None, "{s}");
        }
    }

    #[test]
    fn text_round_trip() {
        let cases = [
            "delta(z2/z1, mu2/mu1)*delta(z3/z2, mu3/mu2) + delta(z1/z2, h)",
            "-3/2*theta(mu2*h/mu1)^-1*theta'(1)^2",
            "delta(1/z2^2, 1/mu2)",
            "1",
            "0",
            "theta(h^(1/2)/(z1*z2))",
        ];
        for c in cases {
            let e: FactoredExpr = c.parse().unwrap();
            let again: FactoredExpr = e.to_string().parse().unwrap();
            assert_eq!(e, again, "{c}");
        }
        let e: FactoredExpr = "delta(z2/z1, mu2/mu1) - delta(z1/z2, h)".parse().unwrap();
        assert_eq!(e.terms.len(), 2);
        assert_eq!(e.terms[1].scalar, int(-1));
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let e: FactoredExpr = "delta(z2/z1, mu2/mu1)*theta(h)^-2 - 5/3*theta'(1)".parse().unwrap();
        let s = serde_json::to_string(&e).unwrap();
        let back: FactoredExpr = serde_json::from_str(&s).unwrap();
        assert_eq!(back, e);
        assert_eq!(serde_json::to_string(&back).unwrap(), s);
        assert!(s.contains(r#""kind":"delta","a":{"z1":-2,"z2":2}"#), "{s}");
    }
}
