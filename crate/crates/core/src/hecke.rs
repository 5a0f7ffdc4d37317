//! Hecke-type operators on `W`-indexed tuples and a relation verifier.
//!
//! Components of elliptic tuples are theta expressions; the degenerate
//! operators act on rational-function tuples. In the cohomology sort the
//! `z` variables are additive.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ellclasses::{all_classes, c_step, kappa};
use crate::error::{Error, Result};
use crate::exactseries::{derive_seed, int, HalfMonomial, QSeries, Var};
use crate::report::{CheckResult, Status};
use crate::ratfunc::{compare_rat, lim_delta, q_zero_limit, RatExpr};
use crate::rootdata::{RootDatum, Sort, WeylElement};
use crate::theta::{check_equal, compare_exprs, Atom, CheckConfig, FactoredExpr};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TupleSort {
    /// Variables `z, μ, h`.
    Elliptic,
    /// Multiplicative `z` with `y`, `h` or `μ`.
    KTheory,
    /// Additive `z`.
    Cohomology,
}

/// A function on the fixed points `σ ∈ W`.
#[derive(Clone, Debug)]
pub struct ClassTuple<T> {
    pub sort: TupleSort,
    pub components: BTreeMap<WeylElement, T>,
}

pub type EllTuple = ClassTuple<FactoredExpr>;
pub type RatTuple = ClassTuple<RatExpr>;

impl<T: Clone> ClassTuple<T> {
    pub fn new(sort: TupleSort, components: BTreeMap<WeylElement, T>) -> Self {
        Self { sort, components }
    }

    pub fn map(&self, f: impl Fn(&WeylElement, &T) -> T) -> Self {
        Self {
            sort: self.sort,
            components: self.components.iter().map(|(s, v)| (s.clone(), f(s, v))).collect(),
        }
    }

    fn require(&self, sort: TupleSort) -> Result<()> {
        if self.sort != sort {
            return Err(Error::Usage(format!("operator needs a {sort:?} tuple, got {:?}", self.sort)));
        }
        Ok(())
    }
}

impl EllTuple {
    pub fn zero(datum: &RootDatum) -> Self {
        Self::new(
            TupleSort::Elliptic,
            datum.elements().into_iter().map(|w| (w, FactoredExpr::zero())).collect(),
        )
    }
}

/// `C_k = (δ^bd_k id + δ^int_k s^γ_k) s^μ_k`.
pub fn apply_c(datum: &RootDatum, k: usize, t: &EllTuple) -> Result<EllTuple> {
    t.require(TupleSort::Elliptic)?;
    Ok(EllTuple::new(TupleSort::Elliptic, c_step(datum, k, &t.components)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegenerateKind {
    D,
    A,
    B,
    Cq0,
    Ctilde,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegenerateOp {
    pub kind: DegenerateKind,
    pub k: usize,
    /// `b_j(λ)`, the integer part of `⟨λ, α_j∨⟩`, per simple index; only for `Ctilde`.
    pub alcove: Option<Vec<i64>>,
}

impl DegenerateOp {
    pub fn new(kind: DegenerateKind, k: usize) -> Self {
        Self { kind, k, alcove: None }
    }

    pub fn ctilde(k: usize, alcove: Vec<i64>) -> Self {
        Self {
            kind: DegenerateKind::Ctilde,
            k,
            alcove: Some(alcove),
        }
    }

    /// The operator seen by the inner factor of `op ∘ op`: the alcove of
    /// `s_kλ` at `k` is `−1 − b_k(λ)`.
    pub fn inner(&self) -> Self {
        let mut op = self.clone();
        if let Some(b) = op.alcove.as_mut() {
            b[self.k - 1] = -1 - b[self.k - 1];
        }
        op
    }

    fn sort(&self) -> TupleSort {
        match self.kind {
            DegenerateKind::D | DegenerateKind::A => TupleSort::Cohomology,
            _ => TupleSort::KTheory,
        }
    }
}

/// `c_1(L_k)_σ` as a linear form in additive `z`; for `GL_n` it is `z_{σ(k+1)} − z_{σ(k)}`.
pub fn chern_root(datum: &RootDatum, k: usize, sigma: &WeylElement) -> RatExpr {
    let v = datum.act_weight(sigma, &datum.simple_roots[k - 1]);
    RatExpr::sum(
        v.iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| RatExpr::int(-c).mul(&RatExpr::var(Sort::Z.var(i + 1)))),
    )
}

/// `(L_k⁻¹)_σ = z^{σ(α_k)}`.
pub fn inverse_line_char(datum: &RootDatum, k: usize, sigma: &WeylElement) -> HalfMonomial {
    datum.line_bundle_char(k, sigma).inv()
}

pub fn apply_degenerate(datum: &RootDatum, op: &DegenerateOp, t: &RatTuple) -> Result<RatTuple> {
    t.require(op.sort())?;
    let k = op.k;
    if k == 0 || k > datum.rank() {
        return Err(Error::Usage(format!("simple index {k} out of range")));
    }
    let sk = datum.simple(k);
    let h = HalfMonomial::var(Var::H);
    let one = RatExpr::one();
    let mu_twist = |e: &RatExpr| e.map_monomials(&|m| datum.act_on_sort(&sk, m, Sort::Mu));
    let b = match op.kind {
        DegenerateKind::Ctilde => {
            let a = op
                .alcove
                .as_ref()
                .ok_or_else(|| Error::Usage("Ctilde needs an alcove".into()))?;
            if a.len() != datum.rank() {
                return Err(Error::Usage(format!("alcove has {} entries, rank is {}", a.len(), datum.rank())));
            }
            a[k - 1]
        }
        _ if op.alcove.is_some() => return Err(Error::Usage("only Ctilde takes an alcove".into())),
        _ => 0,
    };
    let mut out = BTreeMap::new();
    for sigma in t.components.keys() {
        let f = &t.components[sigma];
        let g = &t.components[&datum.mul(sigma, &sk)];
        let v = match op.kind {
            DegenerateKind::D => chern_root(datum, k, sigma).inv().mul(&f.add(g)),
            DegenerateKind::A => {
                let c = chern_root(datum, k, sigma);
                f.div(&c).add(&one.add(&c).div(&c).mul(g))
            }
            DegenerateKind::B => {
                let x = RatExpr::monomial(inverse_line_char(datum, k, sigma));
                let y = RatExpr::var(Var::Y);
                let den = one.sub(&x);
                one.add(&y).mul(&x).div(&den).mul(f).add(&one.add(&y.mul(&x)).div(&den).mul(g))
            }
            DegenerateKind::Cq0 => {
                let l = datum.line_bundle_char(k, sigma);
                lim_delta(&l, &datum.nu(k))
                    .mul(&mu_twist(f))
                    .add(&lim_delta(&l, &h).mul(&mu_twist(g)))
            }
            DegenerateKind::Ctilde => {
                let l = datum.line_bundle_char(k, sigma);
                let bd = RatExpr::monomial(l.pow(-(b as i32) - 1)).div(&RatExpr::one_minus(&l.inv()));
                bd.mul(&mu_twist(f)).add(&lim_delta(&l, &h).mul(&mu_twist(g)))
            }
        };
        out.insert(sigma.clone(), v);
    }
    Ok(RatTuple::new(t.sort, out))
}

/// `Ĉ_k(f) = δ(L^γ_k, ν_k)·f(z, γ, s_kλ) + δ(L^γ_k, h)·f(z, s_kγ, s_kλ)` with `L^γ_k = γ_{k+1}/γ_k`.
///
/// The second summand permutes `γ`: that is what makes `Ĉ_k` restrict to `C_k`
/// at `γ_i = z_{σ(i)}`.
pub fn apply_chat(datum: &RootDatum, k: usize, f: &FactoredExpr) -> Result<FactoredExpr> {
    if !datum.is_type_a() {
        return Err(Error::Usage(format!("Ĉ is defined for type A only, got {}", datum.name)));
    }
    let sk = datum.simple(k);
    let lg = datum.line_bundle_char_in(k, &datum.identity(), Sort::Gamma);
    let h = HalfMonomial::var(Var::H);
    let mu = f.map_monomials(&|m| datum.act_on_sort(&sk, m, Sort::Mu));
    let both = mu.map_monomials(&|m| datum.act_on_sort(&sk, m, Sort::Gamma));
    Ok(mu
        .mul_atoms(&[Atom::delta(lg.clone(), datum.nu(k))])
        .add(&both.mul_atoms(&[Atom::delta(lg, h)])))
}

/// `κ_k = δ(h, ν_k)·δ(h, 1/ν_k)`.
pub fn kappa_k(datum: &RootDatum, k: usize) -> FactoredExpr {
    kappa(&datum.nu(k))
}

// ---------------------------------------------------------------------------
// Random inputs.

fn random_monomial(rng: &mut ChaCha8Rng, vars: &[Var]) -> HalfMonomial {
    loop {
        let pairs: Vec<(Var, i32)> = vars.iter().map(|&v| (v, rng.random_range(-1..=1))).collect();
        let m = HalfMonomial::from_ints(&pairs);
        if !m.is_one() {
            return m;
        }
    }
}

fn elliptic_vars(datum: &RootDatum) -> Vec<Var> {
    let n = datum.ambient_dim;
    (1..=n)
        .map(|i| Sort::Z.var(i))
        .chain((1..=n).map(|i| Sort::Mu.var(i)))
        .chain([Var::H])
        .collect()
}

/// A tuple of small random theta expressions depending on `z`, `μ` and `h`.
pub fn random_elliptic_tuple(datum: &RootDatum, seed: u64) -> EllTuple {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vars = elliptic_vars(datum);
    let comps = datum
        .elements()
        .into_iter()
        .map(|w| {
            let c = int(rng.random_range(1..=5));
            let atoms = vec![
                Atom::theta(random_monomial(&mut rng, &vars)),
                Atom::theta(random_monomial(&mut rng, &vars)).pow(-1),
                Atom::delta(random_monomial(&mut rng, &vars), random_monomial(&mut rng, &vars)),
            ];
            (w, FactoredExpr::product(atoms).scale(&c))
        })
        .collect();
    EllTuple::new(TupleSort::Elliptic, comps)
}

/// A tuple of random rational functions of the sort's variables.
pub fn random_rational_tuple(datum: &RootDatum, sort: TupleSort, seed: u64) -> RatTuple {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = datum.ambient_dim;
    let z: Vec<Var> = (1..=n).map(|i| Sort::Z.var(i)).collect();
    let mut mvars = z.clone();
    mvars.extend((1..=n).map(|i| Sort::Mu.var(i)));
    mvars.push(Var::H);
    let comps = datum
        .elements()
        .into_iter()
        .map(|w| {
            let v = match sort {
                TupleSort::Cohomology => {
                    let lin = |rng: &mut ChaCha8Rng| {
                        RatExpr::sum(
                            std::iter::once(RatExpr::int(rng.random_range(1..=4)))
                                .chain(z.iter().map(|&v| RatExpr::int(rng.random_range(-2..=2)).mul(&RatExpr::var(v)))),
                        )
                    };
                    let a = lin(&mut rng);
                    let b = lin(&mut rng);
                    let c = lin(&mut rng);
                    a.mul(&b).div(&c)
                }
                _ => {
                    let c = RatExpr::int(rng.random_range(1..=5));
                    let m1 = random_monomial(&mut rng, &mvars);
                    let m2 = random_monomial(&mut rng, &mvars);
                    let m3 = random_monomial(&mut rng, &mvars);
                    c.mul(&RatExpr::one_minus(&m1))
                        .div(&RatExpr::one_minus(&m2))
                        .add(&RatExpr::monomial(m3))
                }
            };
            (w, v)
        })
        .collect();
    RatTuple::new(sort, comps)
}

// ---------------------------------------------------------------------------
// Relation verifier.

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationFamily {
    Elliptic,
    Degenerate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationEntry {
    pub relation: String,
    pub datum: String,
    pub trial_seed: u64,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl From<&RelationEntry> for CheckResult {
    fn from(e: &RelationEntry) -> Self {
        CheckResult {
            id: format!("{} [{}, trial {:016x}]", e.relation, e.datum, e.trial_seed),
            status: e.status,
            detail: e.detail.clone(),
        }
    }
}

fn ell_tuples_differ(a: &EllTuple, b: &EllTuple, cfg: &CheckConfig) -> Result<Option<String>> {
    for (s, x) in &a.components {
        if let Some(m) = compare_exprs(x, &b.components[s], cfg)? {
            return Ok(Some(format!("component {s}: {m}")));
        }
    }
    Ok(None)
}

fn rat_tuples_differ(a: &RatTuple, b: &RatTuple, cfg: &CheckConfig) -> Result<Option<String>> {
    for (s, x) in &a.components {
        if let Some(m) = compare_rat(x, &b.components[s], cfg)? {
            return Ok(Some(format!("component {s}: {m}")));
        }
    }
    Ok(None)
}

fn ell_word(datum: &RootDatum, word: &[usize], t: &EllTuple) -> Result<EllTuple> {
    word.iter().rev().try_fold(t.clone(), |acc, &k| apply_c(datum, k, &acc))
}

fn rat_word(datum: &RootDatum, kind: DegenerateKind, word: &[usize], t: &RatTuple) -> Result<RatTuple> {
    word.iter()
        .rev()
        .try_fold(t.clone(), |acc, &k| apply_degenerate(datum, &DegenerateOp::new(kind, k), &acc))
}

/// The two sides of the braid relation between `j` and `k`, as words.
pub fn braid_words(datum: &RootDatum, j: usize, k: usize) -> (Vec<usize>, Vec<usize>) {
    let m = datum.braid_order(j, k);
    let alt = |a: usize, b: usize| (0..m).map(|i| if i % 2 == 0 { a } else { b }).collect();
    (alt(j, k), alt(k, j))
}

fn word_name(prefix: &str, w: &[usize]) -> String {
    w.iter().map(|k| format!("{prefix}{k}")).collect()
}

type Check = (String, u64, Box<dyn Fn(&CheckConfig) -> Result<Option<String>> + Send + Sync>);

fn elliptic_checks(datum: &RootDatum, trials: usize, seed: u64) -> Vec<Check> {
    let r = datum.rank();
    let mut out: Vec<Check> = Vec::new();
    for i in 0..trials {
        let ts = derive_seed(seed, i as u64);
        for k in 1..=r {
            let d = datum.clone();
            out.push((
                format!("C{k}^2 = kappa{k}"),
                ts,
                Box::new(move |cfg| {
                    let t = random_elliptic_tuple(&d, ts);
                    let lhs = apply_c(&d, k, &apply_c(&d, k, &t)?)?;
                    let kap = kappa_k(&d, k);
                    ell_tuples_differ(&lhs, &t.map(|_, v| v.mul(&kap)), cfg)
                }),
            ));
            let d = datum.clone();
            out.push((
                format!("q0 limit of C{k} = Cq0_{k}"),
                ts,
                Box::new(move |cfg| {
                    let t = random_elliptic_tuple(&d, ts);
                    let limit = |e: &EllTuple| -> Result<RatTuple> {
                        let comps = e
                            .components
                            .iter()
                            .map(|(s, v)| Ok((s.clone(), q_zero_limit(v)?)))
                            .collect::<Result<_>>()?;
                        Ok(RatTuple::new(TupleSort::KTheory, comps))
                    };
                    let lhs = limit(&apply_c(&d, k, &t)?)?;
                    let rhs = apply_degenerate(&d, &DegenerateOp::new(DegenerateKind::Cq0, k), &limit(&t)?)?;
                    rat_tuples_differ(&lhs, &rhs, cfg)
                }),
            ));
            for l in 1..=r {
                if l == k {
                    continue;
                }
                let d = datum.clone();
                out.push((
                    format!("kappa{k} C{l} = C{l} s{l}(kappa{k})"),
                    ts,
                    Box::new(move |cfg| {
                        let t = random_elliptic_tuple(&d, ts);
                        let kap = kappa_k(&d, k);
                        let sl = d.simple(l);
                        let twisted = kap.map_monomials(&|m| d.act_on_sort(&sl, m, Sort::Mu));
                        let lhs = apply_c(&d, l, &t)?.map(|_, v| v.mul(&kap));
                        let rhs = apply_c(&d, l, &t.map(|_, v| v.mul(&twisted)))?;
                        ell_tuples_differ(&lhs, &rhs, cfg)
                    }),
                ));
            }
        }
        for j in 1..=r {
            for k in j + 1..=r {
                let (a, b) = braid_words(datum, j, k);
                let d = datum.clone();
                out.push((
                    format!("{} = {}", word_name("C", &a), word_name("C", &b)),
                    ts,
                    Box::new(move |cfg| {
                        let t = random_elliptic_tuple(&d, ts);
                        ell_tuples_differ(&ell_word(&d, &a, &t)?, &ell_word(&d, &b, &t)?, cfg)
                    }),
                ));
            }
        }
    }
    out
}

/// `−y/(1+y)²` at `y = −1/h`.
pub fn ctilde_square_multiplier() -> RatExpr {
    let y = RatExpr::monomial(HalfMonomial::var(Var::H).inv()).neg();
    y.neg().div(&RatExpr::one().add(&y).mul(&RatExpr::one().add(&y)))
}

/// `lim δ(h, ν_k)·lim δ(h, 1/ν_k)`.
pub fn cq0_square_multiplier(datum: &RootDatum, k: usize) -> RatExpr {
    let h = HalfMonomial::var(Var::H);
    let nu = datum.nu(k);
    lim_delta(&nu.inv(), &h).mul(&lim_delta(&nu, &h))
}

/// Alcove vectors used to probe `λ`-independence.
pub const PROBE_ALCOVES: [i64; 4] = [-2, -1, 0, 3];

fn degenerate_checks(datum: &RootDatum, trials: usize, seed: u64) -> Vec<Check> {
    let r = datum.rank();
    let mut out: Vec<Check> = Vec::new();
    for i in 0..trials {
        let ts = derive_seed(seed, i as u64);
        for k in 1..=r {
            let d = datum.clone();
            out.push((
                format!("D{k}^2 = 0"),
                ts,
                Box::new(move |cfg| {
                    let t = random_rational_tuple(&d, TupleSort::Cohomology, ts);
                    let lhs = rat_word(&d, DegenerateKind::D, &[k, k], &t)?;
                    rat_tuples_differ(&lhs, &t.map(|_, _| RatExpr::zero()), cfg)
                }),
            ));
            let d = datum.clone();
            out.push((
                format!("A{k}^2 = id"),
                ts,
                Box::new(move |cfg| {
                    let t = random_rational_tuple(&d, TupleSort::Cohomology, ts);
                    rat_tuples_differ(&rat_word(&d, DegenerateKind::A, &[k, k], &t)?, &t, cfg)
                }),
            ));
            let d = datum.clone();
            out.push((
                format!("(B{k}+y)(B{k}+1) = 0"),
                ts,
                Box::new(move |cfg| {
                    let t = random_rational_tuple(&d, TupleSort::KTheory, ts);
                    let y = RatExpr::var(Var::Y);
                    let bk = |u: &RatTuple| apply_degenerate(&d, &DegenerateOp::new(DegenerateKind::B, k), u);
                    let inner = bk(&t)?;
                    let inner = inner.map(|s, v| v.add(&t.components[s]));
                    let outer = bk(&inner)?;
                    let lhs = outer.map(|s, v| v.add(&y.mul(&inner.components[s])));
                    rat_tuples_differ(&lhs, &t.map(|_, _| RatExpr::zero()), cfg)
                }),
            ));
            let d = datum.clone();
            out.push((
                format!("Cq0_{k}^2 = lim kappa{k}"),
                ts,
                Box::new(move |cfg| {
                    let t = random_rational_tuple(&d, TupleSort::KTheory, ts);
                    let lhs = rat_word(&d, DegenerateKind::Cq0, &[k, k], &t)?;
                    let m = cq0_square_multiplier(&d, k);
                    rat_tuples_differ(&lhs, &t.map(|_, v| v.mul(&m)), cfg)
                }),
            ));
            for b in PROBE_ALCOVES {
                let d = datum.clone();
                out.push((
                    format!("Ctilde{k}^2 = -y/(1+y)^2 at b{k} = {b}"),
                    ts,
                    Box::new(move |cfg| {
                        let t = random_rational_tuple(&d, TupleSort::KTheory, ts);
                        let mut alcove = vec![0; d.rank()];
                        alcove[k - 1] = b;
                        let op = DegenerateOp::ctilde(k, alcove);
                        let lhs = apply_degenerate(&d, &op, &apply_degenerate(&d, &op.inner(), &t)?)?;
                        let m = ctilde_square_multiplier();
                        rat_tuples_differ(&lhs, &t.map(|_, v| v.mul(&m)), cfg)
                    }),
                ));
            }
        }
        for j in 1..=r {
            for k in j + 1..=r {
                let (a, b) = braid_words(datum, j, k);
                for kind in [DegenerateKind::D, DegenerateKind::A, DegenerateKind::B] {
                    let d = datum.clone();
                    let (a, b) = (a.clone(), b.clone());
                    let sort = DegenerateOp::new(kind, 1).sort();
                    let name = format!("{kind:?}");
                    out.push((
                        format!("{} = {}", word_name(&name, &a), word_name(&name, &b)),
                        ts,
                        Box::new(move |cfg| {
                            let t = random_rational_tuple(&d, sort, ts);
                            rat_tuples_differ(&rat_word(&d, kind, &a, &t)?, &rat_word(&d, kind, &b, &t)?, cfg)
                        }),
                    ));
                }
            }
        }
    }
    out
}

/// Runs the relation checks of one family on `trials` random tuples.
/// Entries come back sorted by relation name, then trial seed.
pub fn verify_relations(
    family: RelationFamily,
    datum: &RootDatum,
    trials: usize,
    cfg: &CheckConfig,
) -> Vec<RelationEntry> {
    let checks = match family {
        RelationFamily::Elliptic => elliptic_checks(datum, trials, cfg.seed),
        RelationFamily::Degenerate => degenerate_checks(datum, trials, cfg.seed),
    };
    let mut out: Vec<RelationEntry> = checks
        .par_iter()
        .map(|(relation, trial_seed, f)| {
            let sub = CheckConfig { seed: *trial_seed, ..*cfg };
            let (status, detail) = match f(&sub) {
                Ok(None) => (Status::Pass, None),
                Ok(Some(d)) => (Status::Fail, Some(d)),
                Err(e) => (Status::Error, Some(e.to_string())),
            };
            RelationEntry {
                relation: relation.clone(),
                datum: datum.name.clone(),
                trial_seed: *trial_seed,
                status,
                detail,
            }
        })
        .collect();
    out.sort_by(|a, b| (&a.relation, a.trial_seed).cmp(&(&b.relation, b.trial_seed)));
    out
}

/// `q → 0` limits of the Schubert classes of `datum`.
///
/// Each class limit is compared with the constant term of the evaluated
/// theta series, and the limits of consecutive classes with one step of `Cq0`.
pub fn check_limits(datum: &RootDatum, cfg: &CheckConfig) -> Result<Vec<CheckResult>> {
    let classes = all_classes(datum);
    let limits: BTreeMap<WeylElement, RatTuple> = classes
        .par_iter()
        .map(|(w, f)| {
            let comps = f
                .iter()
                .map(|(s, e)| Ok((s.clone(), q_zero_limit(e)?)))
                .collect::<Result<_>>()?;
            Ok((w.clone(), RatTuple::new(TupleSort::KTheory, comps)))
        })
        .collect::<Result<_>>()?;
    let constant = CheckConfig { order: 0, ..*cfg };
    let mut out: Vec<CheckResult> = classes
        .par_iter()
        .flat_map_iter(|(w, f)| {
            let limits = &limits;
            f.iter().filter(|(_, e)| !e.is_zero()).map(move |(s, e)| {
                let lim = &limits[w].components[s];
                let outcome = check_equal(&e.vars(), &constant, |ev| {
                    let c = lim.eval(ev.point())?;
                    Ok((ev.eval(e)?, QSeries::constant(c, 0)))
                });
                CheckResult::from_outcome(
                    format!("constant term {} ω={w} σ={s}", datum.name),
                    outcome.map(|m| m.map(|m| m.to_string())),
                )
            })
        })
        .collect();
    for (w, t) in &limits {
        let Some((&k, prefix)) = w.word().split_last() else { continue };
        let prev = &limits[&datum.element(prefix)?];
        let outcome = apply_degenerate(datum, &DegenerateOp::new(DegenerateKind::Cq0, k), prev)
            .and_then(|got| rat_tuples_differ(&got, t, cfg));
        out.push(CheckResult::from_outcome(format!("Cq0 recursion {} ω={w}", datum.name), outcome));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ellclasses::identity_class;
    use crate::theta::fay_residual_at;

    fn cfg() -> CheckConfig {
        CheckConfig::new(2, 3, 5)
    }

    #[test]
    fn class_limits_follow_cq0() {
        for d in [RootDatum::gl(3), RootDatum::sp2()] {
            let rs = check_limits(&d, &cfg()).unwrap();
            let bad: Vec<_> = rs.iter().filter(|r| !r.is_ok()).collect();
            assert!(bad.is_empty(), "{bad:#?}");
        }
    }

    #[test]
    fn c1_on_the_identity_class() {
        let a2 = RootDatum::gl(3);
        let t = EllTuple::new(TupleSort::Elliptic, identity_class(&a2));
        let got = apply_c(&a2, 1, &t).unwrap();
        let s1 = a2.simple(1);
        assert_eq!(got.components[&a2.identity()], "delta(z2/z1, mu2/mu1)".parse().unwrap());
        assert_eq!(got.components[&s1], "delta(z1/z2, h)".parse().unwrap());
        assert!(got.components[&a2.simple(2)].is_zero());
        let z = apply_c(&a2, 2, &EllTuple::zero(&a2)).unwrap();
        assert!(z.components.values().all(FactoredExpr::is_zero));
    }

    #[test]
    fn wrong_sort_is_rejected() {
        let a1 = RootDatum::gl(2);
        let t = random_rational_tuple(&a1, TupleSort::KTheory, 1);
        assert!(apply_degenerate(&a1, &DegenerateOp::new(DegenerateKind::D, 1), &t).is_err());
        let bad = DegenerateOp {
            kind: DegenerateKind::Ctilde,
            k: 1,
            alcove: None,
        };
        assert!(apply_degenerate(&a1, &bad, &t).is_err());
        let mut e = EllTuple::zero(&a1);
        e.sort = TupleSort::KTheory;
        assert!(apply_c(&a1, 1, &e).is_err());
    }

    #[test]
    fn square_is_a_fay_instance() {
        // For GL_2 at σ = id the diagonal coefficient of C_1² minus κ_1, cleared
        // of denominators, is Fay's residual at a = h, b = z2/z1, c = ν_1, d = 1.
        let a1 = RootDatum::gl(2);
        let t = EllTuple::new(TupleSort::Elliptic, identity_class(&a1));
        let sq = apply_c(&a1, 1, &apply_c(&a1, 1, &t).unwrap()).unwrap();
        let diag = &sq.components[&a1.identity()];
        let nu = a1.nu(1);
        let h = HalfMonomial::var(Var::H);
        let b: HalfMonomial = "z2/z1".parse().unwrap();
        let clear = [
            Atom::theta(h.clone()).pow(2),
            Atom::theta(nu.clone()).pow(2),
            Atom::theta(b.clone()).pow(2),
            Atom::theta_prime_one().pow(-2),
        ];
        let lhs = diag.sub(&kappa_k(&a1, 1)).mul_atoms(&clear);
        let rhs = fay_residual_at(&h, &b, &nu, &HalfMonomial::one());
        assert!(compare_exprs(&lhs, &rhs, &cfg()).unwrap().is_none());
    }

    #[test]
    fn elliptic_relations_on_a2() {
        let a2 = RootDatum::gl(3);
        let rep = verify_relations(RelationFamily::Elliptic, &a2, 2, &cfg());
        assert!(!rep.is_empty());
        for e in &rep {
            assert_eq!(e.status, Status::Pass, "{e:?}");
        }
    }

    #[test]
    fn degenerate_relations_on_a2() {
        let a2 = RootDatum::gl(3);
        let rep = verify_relations(RelationFamily::Degenerate, &a2, 2, &cfg());
        for e in &rep {
            assert_eq!(e.status, Status::Pass, "{e:?}");
        }
    }

    #[test]
    fn ctilde_multiplier_matches_h_form() {
        let h = HalfMonomial::var(Var::H);
        let hinv = RatExpr::monomial(h.inv());
        let alt = hinv.div(&RatExpr::one_minus(&h.inv()).mul(&RatExpr::one_minus(&h.inv())));
        assert!(compare_rat(&ctilde_square_multiplier(), &alt, &cfg()).unwrap().is_none());
        let neg = alt.neg();
        assert!(compare_rat(&ctilde_square_multiplier(), &neg, &cfg()).unwrap().is_some());
    }

    #[test]
    fn chat_square_and_braid() {
        let a2 = RootDatum::gl(3);
        let vars: Vec<Var> = (1..=3).map(Var::Gamma).chain((1..=3).map(Var::Z)).chain([Var::Mu(1), Var::Mu(2), Var::Mu(3), Var::H]).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = FactoredExpr::product(vec![
            Atom::theta(random_monomial(&mut rng, &vars)),
            Atom::delta(random_monomial(&mut rng, &vars), random_monomial(&mut rng, &vars)),
        ]);
        for k in 1..=2 {
            let sq = apply_chat(&a2, k, &apply_chat(&a2, k, &f).unwrap()).unwrap();
            assert!(compare_exprs(&sq, &f.mul(&kappa_k(&a2, k)), &cfg()).unwrap().is_none());
        }
        let lhs = apply_chat(&a2, 1, &apply_chat(&a2, 2, &apply_chat(&a2, 1, &f).unwrap()).unwrap()).unwrap();
        let rhs = apply_chat(&a2, 2, &apply_chat(&a2, 1, &apply_chat(&a2, 2, &f).unwrap()).unwrap()).unwrap();
        assert!(compare_exprs(&lhs, &rhs, &cfg()).unwrap().is_none());
        assert!(apply_chat(&a2, 1, &FactoredExpr::zero()).unwrap().is_zero());
        assert!(apply_chat(&RootDatum::sp2(), 1, &f).is_err());
    }
}
