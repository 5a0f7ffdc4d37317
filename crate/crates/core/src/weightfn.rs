//! Type-A elliptic weight functions.
//!
//! Permutations are one-line vectors `ω(1)…ω(n)`, 1-based. The topological
//! variable `t^(k)_a` is [`Var::T`]`(k, a)` for `k < n`; `t^(n)_a` is `z_a`.

use std::collections::BTreeSet;

use itertools::Itertools;
use rayon::prelude::*;

use crate::ellclasses::{euler_class_ell, rescaled_class, schubert_local_bs};
use crate::epsseries::{with_precision, EpsSeries};
use crate::error::{Error, Result};
use crate::exactseries::{EvalPoint, HalfMonomial, QSeries, Var};
use crate::report::CheckResult;
use crate::rootdata::{RootDatum, WeylElement};
use crate::theta::{check_equal, compare_exprs, theta_normal_form, Atom, CheckConfig, Evaluator, FactoredExpr};

/// Largest `n` for which the symmetrization is expanded.
pub const WEIGHT_CAP: usize = 4;

/// Precision in `ε` used when evaluating on the diagonal `z_i = z_j`.
const GKM_PRECISION: usize = 8;

pub type Perm = Vec<usize>;

/// `ω^(k)_a`, `j_ω(k, a)` and `c_ω(k, a)` for a permutation `ω`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightIndexData {
    omega: Perm,
    /// `levels[k-1]` is `{ω(1), …, ω(k)}` in increasing order.
    levels: Vec<Vec<usize>>,
}

impl WeightIndexData {
    pub fn new(omega: &[usize]) -> Result<Self> {
        check_perm(omega)?;
        let levels = (1..=omega.len())
            .map(|k| omega[..k].iter().copied().sorted().collect())
            .collect();
        Ok(Self {
            omega: omega.to_vec(),
            levels,
        })
    }

    pub fn n(&self) -> usize {
        self.omega.len()
    }

    pub fn omega_k(&self, k: usize, a: usize) -> usize {
        self.levels[k - 1][a - 1]
    }

    pub fn j(&self, k: usize, a: usize) -> usize {
        let v = self.omega_k(k, a);
        self.omega.iter().position(|&x| x == v).expect("value of ω") + 1
    }

    pub fn c(&self, k: usize, a: usize) -> i32 {
        i32::from(self.omega[k] < self.omega_k(k, a))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightFunction {
    pub n: usize,
    pub omega: Perm,
    pub expr: FactoredExpr,
}

fn check_perm(p: &[usize]) -> Result<()> {
    let sorted: Vec<usize> = p.iter().copied().sorted().collect();
    if sorted != (1..=p.len()).collect::<Vec<_>>() {
        return Err(Error::Usage(format!("{p:?} is not a permutation")));
    }
    Ok(())
}

fn check_cap(n: usize) -> Result<()> {
    if n > WEIGHT_CAP {
        return Err(Error::Domain(format!("weight functions are expanded for n ≤ {WEIGHT_CAP}, got {n}")));
    }
    Ok(())
}

pub fn all_perms(n: usize) -> Vec<Perm> {
    (1..=n).permutations(n).collect()
}

pub fn length(w: &[usize]) -> usize {
    (0..w.len())
        .flat_map(|i| (i + 1..w.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| w[i] > w[j])
        .count()
}

pub fn inverse(w: &[usize]) -> Perm {
    let mut out = vec![0; w.len()];
    for (i, &v) in w.iter().enumerate() {
        out[v - 1] = i + 1;
    }
    out
}

/// `s_k ω`: exchanges the values `k` and `k + 1`.
pub fn left_simple(k: usize, w: &[usize]) -> Perm {
    w.iter()
        .map(|&v| match v {
            v if v == k => k + 1,
            v if v == k + 1 => k,
            v => v,
        })
        .collect()
}

/// `ω s_k`: exchanges the entries in positions `k` and `k + 1`.
pub fn right_simple(w: &[usize], k: usize) -> Perm {
    let mut out = w.to_vec();
    out.swap(k - 1, k);
    out
}

fn element(datum: &RootDatum, w: &[usize]) -> WeylElement {
    datum.from_permutation(w).expect("checked permutation")
}

pub fn bruhat_leq(sigma: &[usize], omega: &[usize]) -> bool {
    let datum = RootDatum::gl(omega.len());
    datum.bruhat_leq(&element(&datum, sigma), &element(&datum, omega))
}

fn var_h() -> HalfMonomial {
    HalfMonomial::var(Var::H)
}

fn ratio(a: Var, b: Var) -> HalfMonomial {
    HalfMonomial::ratio(a, b)
}

fn topological(n: usize, k: usize, a: usize) -> Var {
    if k == n {
        Var::Z(a as u8)
    } else {
        Var::T(k as u8, a as u8)
    }
}

/// `ψ_{ω,k,a,c}(x)` with the `ϑ(x)` of the first two cases cancelled against
/// the `δ` denominator, so restrictions never produce `ϑ(1)⁻¹`.
fn psi_atoms(d: &WeightIndexData, k: usize, a: usize, c: usize, x: &HalfMonomial) -> Vec<Atom> {
    let lower = d.omega_k(k + 1, c);
    let upper = d.omega_k(k, a);
    let shifted = |y: HalfMonomial| {
        vec![
            Atom::theta_prime_one(),
            Atom::theta(x.mul(&y)),
            Atom::theta(y).pow(-1),
        ]
    };
    match lower.cmp(&upper) {
        std::cmp::Ordering::Less => shifted(var_h()),
        std::cmp::Ordering::Equal => {
            let y = var_h()
                .pow(1 - d.c(k, a))
                .mul(&ratio(Var::Mu((k + 1) as u8), Var::Mu(d.j(k, a) as u8)));
            shifted(y)
        }
        std::cmp::Ordering::Greater => vec![Atom::theta(x.clone())],
    }
}

fn u_atoms(d: &WeightIndexData) -> Vec<Atom> {
    let n = d.n();
    let mut atoms = Vec::new();
    for k in 1..n {
        for a in 1..=k {
            let ta = topological(n, k, a);
            for c in 1..=k + 1 {
                atoms.extend(psi_atoms(d, k, a, c, &ratio(topological(n, k + 1, c), ta)));
            }
            for b in a + 1..=k {
                atoms.push(Atom::delta(ratio(topological(n, k, b), ta), var_h()));
            }
        }
    }
    atoms
}

/// `dim ∏_{k<n} GL_k`.
pub fn dim_g(n: usize) -> i32 {
    ((n - 1) * n * (2 * n - 1) / 6) as i32
}

/// `ww_ω`, with the symmetrization expanded into `∏_{k<n} k!` terms.
pub fn weight_function(omega: &[usize]) -> Result<WeightFunction> {
    let d = WeightIndexData::new(omega)?;
    let n = d.n();
    check_cap(n)?;
    if n <= 1 {
        return Ok(WeightFunction {
            n,
            omega: omega.to_vec(),
            expr: FactoredExpr::one(),
        });
    }
    let u = FactoredExpr::product(u_atoms(&d));
    let sym = (1..n)
        .map(|k| (1..=k).permutations(k))
        .multi_cartesian_product()
        .map(|perms| {
            u.map_monomials(&|m| {
                m.rename(&|v| match v {
                    Var::T(k, a) => Var::T(k, perms[k as usize - 1][a as usize - 1] as u8),
                    v => v,
                })
            })
        })
        .fold(FactoredExpr::zero(), |acc, t| acc.add(&t));
    let g = dim_g(n);
    let mut pre = vec![Atom::theta(var_h()).pow(g), Atom::theta_prime_one().pow(-g)];
    for k in 1..n {
        for i in 1..=k {
            for j in 1..=k {
                let m = var_h().mul(&ratio(Var::T(k as u8, i as u8), Var::T(k as u8, j as u8)));
                pre.push(Atom::theta(m).pow(-1));
            }
        }
    }
    Ok(WeightFunction {
        n,
        omega: omega.to_vec(),
        expr: sym.mul_atoms(&pre),
    })
}

/// `t^(k)_a ↦ γ_a` for every `k < n`.
pub fn modify(e: &FactoredExpr) -> FactoredExpr {
    e.map_monomials(&|m| {
        m.rename(&|v| match v {
            Var::T(_, a) => Var::Gamma(a),
            v => v,
        })
    })
}

/// `wwh_ω(γ, z, μ, h)`.
pub fn modified_weight_function(omega: &[usize]) -> Result<WeightFunction> {
    let mut w = weight_function(omega)?;
    w.expr = modify(&w.expr);
    Ok(w)
}

/// `γ_a ↦ z_{σ(a)}` and `t^(k)_a ↦ z_{σ(a)}`, without the Bruhat shortcut.
pub fn restrict(e: &FactoredExpr, sigma: &[usize]) -> FactoredExpr {
    e.map_monomials(&|m| {
        m.rename(&|v| match v {
            Var::T(_, a) | Var::Gamma(a) => Var::Z(sigma[a as usize - 1] as u8),
            v => v,
        })
    })
}

/// `ww_{ω,σ}`; identically zero unless `σ ≤ ω`.
pub fn restrict_weight_function(omega: &[usize], sigma: &[usize]) -> Result<FactoredExpr> {
    check_perm(sigma)?;
    let w = modified_weight_function(omega)?;
    if sigma.len() != omega.len() {
        return Err(Error::Usage(format!("{sigma:?} and {omega:?} have different sizes")));
    }
    if !bruhat_leq(sigma, omega) {
        return Ok(FactoredExpr::zero());
    }
    Ok(restrict(&w.expr, sigma).prune_vanishing())
}

/// `δ(μ_i/μ_j, h)` for `i < j` with `ω(i) > ω(j)`.
pub fn normalization_factors(omega: &[usize]) -> Vec<Atom> {
    let n = omega.len();
    (1..=n)
        .flat_map(|i| (i + 1..=n).map(move |j| (i, j)))
        .filter(|&(i, j)| omega[i - 1] > omega[j - 1])
        .map(|(i, j)| Atom::delta(ratio(Var::Mu(i as u8), Var::Mu(j as u8)), var_h()))
        .collect()
}

fn divide_by(e: &FactoredExpr, atoms: &[Atom]) -> FactoredExpr {
    let inv: Vec<Atom> = atoms.iter().map(|a| a.clone().pow(-1)).collect();
    e.mul_atoms(&inv)
}

/// `ww′_ω = ww_ω / ∏ δ(μ_i/μ_j, h)`.
pub fn normalized_weight_function(omega: &[usize]) -> Result<WeightFunction> {
    let mut w = weight_function(omega)?;
    w.expr = divide_by(&w.expr, &normalization_factors(omega));
    Ok(w)
}

/// `wwh′_ω`.
pub fn normalized_modified_weight_function(omega: &[usize]) -> Result<WeightFunction> {
    let mut w = normalized_weight_function(omega)?;
    w.expr = modify(&w.expr);
    Ok(w)
}

/// `ψ_ω(μ, h)`.
pub fn psi_constant(omega: &[usize]) -> Result<FactoredExpr> {
    check_perm(omega)?;
    let n = omega.len() as i32;
    let mut atoms = vec![Atom::theta(var_h()).pow(n * (n - 1) * (n - 2) / 3)];
    for i in 1..=omega.len() {
        for j in i + 1..=omega.len() {
            let mu = ratio(Var::Mu(j as u8), Var::Mu(i as u8));
            if omega[i - 1] < omega[j - 1] {
                atoms.push(Atom::theta(var_h().mul(&mu)));
            } else {
                atoms.push(Atom::theta(var_h()));
                atoms.push(Atom::theta(mu));
            }
        }
    }
    Ok(FactoredExpr::product(atoms))
}

/// `∏_{i<j} ϑ(x_{σ(j)}/x_{σ(i)})` for the variable family `x`.
pub fn euler_ell_perm(sigma: &[usize], x: fn(u8) -> Var) -> FactoredExpr {
    let n = sigma.len();
    FactoredExpr::product(
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| Atom::theta(ratio(x(sigma[j] as u8), x(sigma[i] as u8))))
            .collect(),
    )
}

/// The diagonal value `ww_{ω,ω}`.
pub fn diagonal_value(omega: &[usize]) -> FactoredExpr {
    let n = omega.len();
    let mut atoms = euler_ell_perm(omega, Var::Z).terms[0].factors.clone();
    for i in 0..n {
        for j in i + 1..n {
            if omega[i] > omega[j] {
                atoms.push(Atom::delta(ratio(Var::Z(omega[j] as u8), Var::Z(omega[i] as u8)), var_h()));
            }
        }
    }
    FactoredExpr::product(atoms)
}

/// Exchanges `x_k` and `x_{k+1}`.
pub fn swap(e: &FactoredExpr, k: usize, x: fn(u8) -> Var) -> FactoredExpr {
    let (a, b) = (x(k as u8), x((k + 1) as u8));
    e.map_monomials(&|m| m.rename(&|v| if v == a { b } else if v == b { a } else { v }))
}

fn mu(i: usize) -> Var {
    Var::Mu(i as u8)
}

fn z(i: usize) -> Var {
    Var::Z(i as u8)
}

fn perm_label(w: &[usize]) -> String {
    w.iter().map(|v| v.to_string()).collect()
}

fn compare(id: String, a: &FactoredExpr, b: &FactoredExpr, cfg: &CheckConfig) -> CheckResult {
    CheckResult::from_outcome(id, compare_exprs(a, b, cfg).map(|m| m.map(|m| m.to_string())))
}

fn pairs(n: usize) -> Vec<(Perm, usize)> {
    all_perms(n)
        .into_iter()
        .flat_map(|w| (1..n).map(move |k| (w.clone(), k)))
        .collect()
}

// ---------------------------------------------------------------------------
// Recursions.

/// Both sides of the R-matrix relation for `s^z_k ww_{s_kω}`.
pub fn rmatrix_sides(omega: &[usize], k: usize) -> Result<(FactoredExpr, FactoredExpr)> {
    let sk_omega = left_simple(k, omega);
    let w = weight_function(omega)?.expr;
    let w_sk = weight_function(&sk_omega)?.expr;
    let inv = inverse(omega);
    let (a, b) = (inv[k - 1], inv[k]);
    let zk = ratio(z(k), z(k + 1));
    let lhs = swap(&w_sk, k, Var::Z);
    let first = if length(&sk_omega) > length(omega) {
        w.mul_atoms(&[
            Atom::delta(ratio(mu(a), mu(b)), var_h()),
            Atom::delta(ratio(mu(b), mu(a)), var_h()),
            Atom::delta(zk.clone(), var_h()).pow(-1),
        ])
    } else {
        w.mul_atoms(&[Atom::delta(zk.clone(), var_h()).pow(-1)])
    };
    let second = w_sk.mul_atoms(&[
        Atom::delta(zk.inv(), ratio(mu(a), mu(b))),
        Atom::delta(zk, var_h()).pow(-1),
    ]);
    Ok((lhs, first.sub(&second)))
}

/// Both sides of the upgoing recursion `ww_{s_kω} = δ(z_{k+1}/z_k, μ_b/μ_a)·ww_ω + δ(z_k/z_{k+1}, h)·s^z_k ww_ω`.
pub fn upgoing_sides(omega: &[usize], k: usize, modified: bool) -> Result<(FactoredExpr, FactoredExpr)> {
    let get = |w: &[usize]| -> Result<FactoredExpr> {
        Ok(if modified {
            modified_weight_function(w)?.expr
        } else {
            weight_function(w)?.expr
        })
    };
    let w = get(omega)?;
    let inv = inverse(omega);
    let (a, b) = (inv[k - 1], inv[k]);
    let rhs = w
        .mul_atoms(&[Atom::delta(ratio(z(k + 1), z(k)), ratio(mu(b), mu(a)))])
        .add(&swap(&w, k, Var::Z).mul_atoms(&[Atom::delta(ratio(z(k), z(k + 1)), var_h())]));
    Ok((get(&left_simple(k, omega))?, rhs))
}

/// Both sides of the unified R-matrix recursion for `wwh′`.
pub fn uni_rw_sides(omega: &[usize], k: usize) -> Result<(FactoredExpr, FactoredExpr)> {
    let w = normalized_modified_weight_function(omega)?.expr;
    let inv = inverse(omega);
    let (a, b) = (inv[k - 1], inv[k]);
    let denom = Atom::delta(ratio(mu(a), mu(b)), var_h()).pow(-1);
    let rhs = w
        .mul_atoms(&[Atom::delta(ratio(mu(b), mu(a)), ratio(z(k + 1), z(k))), denom.clone()])
        .add(&swap(&w, k, Var::Z).mul_atoms(&[Atom::delta(ratio(z(k), z(k + 1)), var_h()), denom]));
    Ok((normalized_modified_weight_function(&left_simple(k, omega))?.expr, rhs))
}

/// Both sides of the unified Bott–Samelson recursion for `wwh′`, as free
/// functions of `γ`. They agree only after restriction to fixed points.
pub fn uni_bsw_sides(omega: &[usize], k: usize) -> Result<(FactoredExpr, FactoredExpr)> {
    let w = normalized_modified_weight_function(omega)?.expr;
    let smu = swap(&w, k, Var::Mu);
    let both = swap(&smu, k, Var::Gamma);
    let lg = ratio(Var::Gamma((k + 1) as u8), Var::Gamma(k as u8));
    let denom = Atom::delta(ratio(mu(k), mu(k + 1)), var_h()).pow(-1);
    let rhs = smu
        .mul_atoms(&[Atom::delta(lg.clone(), ratio(mu(k + 1), mu(k))), denom.clone()])
        .sub(&both.mul_atoms(&[Atom::delta(lg, var_h()), denom]));
    Ok((normalized_modified_weight_function(&right_simple(omega, k))?.expr, rhs))
}

pub fn check_rmatrix(n: usize, cfg: &CheckConfig) -> Vec<CheckResult> {
    pairs(n)
        .par_iter()
        .map(|(w, k)| {
            let up = length(&left_simple(*k, w)) > length(w);
            let id = format!(
                "R-matrix ({}) n={n} ω={} k={k}",
                if up { "up" } else { "down" },
                perm_label(w)
            );
            match rmatrix_sides(w, *k) {
                Ok((l, r)) => compare(id, &l, &r, cfg),
                Err(e) => CheckResult::from_outcome(id, Err(e)),
            }
        })
        .collect()
}

pub fn check_upgoing(n: usize, cfg: &CheckConfig) -> Vec<CheckResult> {
    pairs(n)
        .into_iter()
        .filter(|(w, k)| length(&left_simple(*k, w)) > length(w))
        .flat_map(|(w, k)| [(w.clone(), k, false), (w, k, true)])
        .collect::<Vec<_>>()
        .par_iter()
        .map(|(w, k, modified)| {
            let id = format!(
                "upgoing {} n={n} ω={} k={k}",
                if *modified { "wwh" } else { "ww" },
                perm_label(w)
            );
            match upgoing_sides(w, *k, *modified) {
                Ok((l, r)) => compare(id, &l, &r, cfg),
                Err(e) => CheckResult::from_outcome(id, Err(e)),
            }
        })
        .collect()
}

pub fn check_uni_rw(n: usize, cfg: &CheckConfig) -> Vec<CheckResult> {
    pairs(n)
        .par_iter()
        .map(|(w, k)| {
            let id = format!("unified R-matrix n={n} ω={} k={k}", perm_label(w));
            match uni_rw_sides(w, *k) {
                Ok((l, r)) => compare(id, &l, &r, cfg),
                Err(e) => CheckResult::from_outcome(id, Err(e)),
            }
        })
        .collect()
}

/// The unified Bott–Samelson recursion at every fixed point `σ`.
pub fn check_uni_bsw(n: usize, cfg: &CheckConfig) -> Vec<CheckResult> {
    pairs(n)
        .into_iter()
        .flat_map(|(w, k)| all_perms(n).into_iter().map(move |s| (w.clone(), k, s)))
        .collect::<Vec<_>>()
        .par_iter()
        .map(|(w, k, s)| {
            let id = format!(
                "unified Bott-Samelson n={n} ω={} k={k} σ={}",
                perm_label(w),
                perm_label(s)
            );
            match uni_bsw_sides(w, *k) {
                Ok((l, r)) => compare(id, &restrict(&l, s), &restrict(&r, s), cfg),
                Err(e) => CheckResult::from_outcome(id, Err(e)),
            }
        })
        .collect()
}

/// Passes when the unified Bott–Samelson relation fails for free `γ` at
/// `n = 2`, `ω = id`, `k = 1`: the relation holds on restrictions only.
pub fn check_uni_bsw_unrestricted_fails(cfg: &CheckConfig) -> CheckResult {
    let id = "unified Bott-Samelson is false before restriction (n=2, ω=12, k=1)";
    let outcome = uni_bsw_sides(&[1, 2], 1).and_then(|(l, r)| compare_exprs(&l, &r, cfg)).map(|m| match m {
        Some(_) => None,
        None => Some("the two sides agree at every sampled free-γ point".to_string()),
    });
    CheckResult::from_outcome(id, outcome)
}

/// `ww_ω` is unchanged by a transposition of `t^(k)_i` and `t^(k)_j`.
pub fn check_symmetry(n: usize, cfg: &CheckConfig) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for w in all_perms(n) {
        let e = weight_function(&w)?.expr;
        for k in 2..n {
            for i in 1..=k {
                for j in i + 1..=k {
                    let (a, b) = (Var::T(k as u8, i as u8), Var::T(k as u8, j as u8));
                    let swapped = e.map_monomials(&|m| m.rename(&|v| if v == a { b } else if v == b { a } else { v }));
                    let id = format!("symmetry n={n} ω={} t{k}_{i}<->t{k}_{j}", perm_label(&w));
                    out.push(compare(id, &e, &swapped, cfg));
                }
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Identification with local elliptic classes.

/// `ww_{ω,σ} = E_σ(X_ω)·e^{ell}(T_σ)` for each `σ`, over the given `ω`.
pub fn check_identification(n: usize, omegas: &[Perm], cfg: &CheckConfig) -> Vec<CheckResult> {
    let datum = RootDatum::gl(n);
    let jobs: Vec<(Perm, Perm)> = omegas
        .iter()
        .flat_map(|w| all_perms(n).into_iter().map(move |s| (w.clone(), s)))
        .collect();
    jobs.par_iter()
        .map(|(w, s)| {
            let id = format!("identification n={n} ω={} σ={}", perm_label(w), perm_label(s));
            let (we, se) = (element(&datum, w), element(&datum, s));
            let rhs = schubert_local_bs(&datum, &we, &se).mul(&euler_class_ell(&datum, &se));
            match restrict_weight_function(w, s) {
                Ok(lhs) => compare(id, &lhs, &rhs, cfg),
                Err(e) => CheckResult::from_outcome(id, Err(e)),
            }
        })
        .collect()
}

/// `ww′_{ω,σ} = Ê_σ(X_ω)·e^{ell}(T_σ)` with the rescaled classes.
pub fn check_normalized_identification(n: usize, cfg: &CheckConfig) -> Vec<CheckResult> {
    let datum = RootDatum::gl(n);
    let jobs: Vec<(Perm, Perm)> = all_perms(n)
        .into_iter()
        .flat_map(|w| all_perms(n).into_iter().map(move |s| (w.clone(), s)))
        .collect();
    jobs.par_iter()
        .map(|(w, s)| {
            let id = format!("rescaled identification n={n} ω={} σ={}", perm_label(w), perm_label(s));
            let (we, se) = (element(&datum, w), element(&datum, s));
            let rhs = rescaled_class(&datum, &we, &se).mul(&euler_class_ell(&datum, &se));
            match normalized_modified_weight_function(w) {
                Ok(lhs) => compare(id, &restrict(&lhs.expr, s), &rhs, cfg),
                Err(e) => CheckResult::from_outcome(id, Err(e)),
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Axioms.

/// Evaluates `a` and `b` at points where `z_i = z_j`, approached along
/// `√z_j = √z_i·(1+ε)`, and compares the `ε⁰` coefficients.
fn compare_on_diagonal(
    a: &FactoredExpr,
    b: &FactoredExpr,
    i: usize,
    j: usize,
    cfg: &CheckConfig,
) -> Result<Option<String>> {
    let mut vars: BTreeSet<Var> = a.vars();
    vars.extend(b.vars());
    vars.insert(z(i));
    vars.insert(z(j));
    let outcome = check_equal(&vars, cfg, |ev| {
        let point = ev.point().clone();
        with_precision(GKM_PRECISION, || {
            let mut lifted: EvalPoint<EpsSeries> = point.lift();
            let si = point.sqrt_of(z(i))?.clone();
            lifted.sqrt_assignment.insert(z(j), EpsSeries::one_plus_eps_times(&si));
            let mut ev = Evaluator::new(lifted, cfg.order);
            let flat = |s: QSeries<EpsSeries>| -> Result<QSeries> {
                let cs = s.coeffs().iter().map(EpsSeries::constant_term).collect::<Result<Vec<_>>>()?;
                Ok(QSeries::from_coeffs(cs, cfg.order))
            };
            let l = flat(ev.eval(a)?)?;
            let r = flat(ev.eval(b)?)?;
            Ok((l, r))
        })
    })?;
    Ok(outcome.map(|m| format!("{m} with z{j} → z{i}")))
}

/// The GKM relation, diagonal normalization and triangularity for all
/// `ω, σ ∈ S_n`; the remaining axioms are listed as skipped.
pub fn check_axioms(n: usize, cfg: &CheckConfig) -> Result<Vec<CheckResult>> {
    check_cap(n)?;
    let perms = all_perms(n);
    let wwh: Vec<(Perm, FactoredExpr)> = perms
        .iter()
        .map(|w| Ok((w.clone(), modified_weight_function(w)?.expr)))
        .collect::<Result<_>>()?;
    let mut jobs = Vec::new();
    for (w, e) in &wwh {
        for s in &perms {
            for k in 1..n {
                jobs.push((w, e, s, Some(k)));
            }
            jobs.push((w, e, s, None));
        }
    }
    let mut out: Vec<CheckResult> = jobs
        .par_iter()
        .filter_map(|&(w, e, s, k)| {
            let (wl, sl) = (perm_label(w), perm_label(s));
            match k {
                Some(k) => {
                    let id = format!("axiom GKM n={n} ω={wl} σ={sl} k={k}");
                    let s_k = right_simple(s, k);
                    let lhs = restrict(e, &s_k).prune_vanishing();
                    let rhs = restrict(e, s).prune_vanishing();
                    Some(CheckResult::from_outcome(id, compare_on_diagonal(&lhs, &rhs, s[k - 1], s[k], cfg)))
                }
                None if w == s => {
                    let id = format!("axiom normalization n={n} ω={wl}");
                    Some(compare(id, &restrict(e, s), &diagonal_value(w), cfg))
                }
                None if !bruhat_leq(s, w) => {
                    let id = format!("axiom triangularity n={n} ω={wl} σ={sl}");
                    Some(compare(id, &restrict(e, s), &FactoredExpr::zero(), cfg))
                }
                None => None,
            }
        })
        .collect();
    out.push(CheckResult::skipped(
        format!("axiom holomorphicity n={n}"),
        "not checked here",
    ));
    out.push(CheckResult::skipped(
        format!("axiom transformations n={n}"),
        "not checked here; see the transformation-form suite",
    ));
    out.push(CheckResult::skipped(format!("axiom support n={n}"), "not checked here"));
    Ok(out)
}

// ---------------------------------------------------------------------------
// Lexicographic-word experiment.

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalFormComparison {
    pub omega: Perm,
    pub sigma: Perm,
    pub coincide: bool,
}

/// Compares `ww_{ω,σ}/e^{ell}(T_σ)` with the Bott–Samelson class built from the
/// lexicographically smallest reduced word, as theta normal forms.
pub fn lex_word_experiment(n: usize) -> Result<Vec<NormalFormComparison>> {
    let datum = RootDatum::gl(n);
    let mut out = Vec::new();
    for w in all_perms(n) {
        for s in all_perms(n) {
            if !bruhat_leq(&s, &w) {
                continue;
            }
            let (we, se) = (element(&datum, &w), element(&datum, &s));
            let e = euler_class_ell(&datum, &se);
            let lhs = divide_by(&restrict_weight_function(&w, &s)?, &e.terms[0].factors);
            let rhs = schubert_local_bs(&datum, &we, &se);
            out.push(NormalFormComparison {
                omega: w.clone(),
                sigma: s,
                coincide: theta_normal_form(&lhs)? == theta_normal_form(&rhs)?,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hecke::apply_chat;

    fn e(s: &str) -> FactoredExpr {
        s.parse().unwrap()
    }

    fn cfg() -> CheckConfig {
        CheckConfig::new(3, 3, 7)
    }

    fn same(a: &FactoredExpr, b: &FactoredExpr) -> bool {
        compare_exprs(a, b, &cfg()).unwrap().is_none()
    }

    fn all_pass(rs: &[CheckResult]) {
        let bad: Vec<_> = rs.iter().filter(|r| !r.is_ok()).collect();
        assert!(bad.is_empty(), "{bad:#?}");
    }

    #[test]
    fn index_data_of_231() {
        let d = WeightIndexData::new(&[2, 3, 1]).unwrap();
        assert_eq!((d.omega_k(2, 1), d.omega_k(2, 2)), (2, 3));
        assert_eq!((d.j(2, 1), d.j(2, 2)), (1, 2));
        assert_eq!((d.c(1, 1), d.c(2, 1), d.c(2, 2)), (0, 1, 1));
        assert!(WeightIndexData::new(&[1, 1]).is_err());
    }

    #[test]
    fn n_one_is_one() {
        assert_eq!(weight_function(&[1]).unwrap().expr, FactoredExpr::one());
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(weight_function(&[1, 2, 3, 4, 5]), Err(Error::Domain(_))));
    }

    #[test]
    fn gl2_examples() {
        let w12 = weight_function(&[1, 2]).unwrap().expr;
        let w21 = weight_function(&[2, 1]).unwrap().expr;
        assert!(same(&w12, &e("theta(z2/t1_1)*theta(h*mu2*z1/(mu1*t1_1))*theta(h*mu2/mu1)^-1")));
        assert!(same(
            &w21,
            &e("theta'(1)*theta(h*z1/t1_1)*theta(mu2*z2/(mu1*t1_1))*theta(h)^-1*theta(mu2/mu1)^-1")
        ));
        // the unsimplified forms
        assert!(same(
            &w12,
            &e("theta'(1)^-1*theta(z1/t1_1)*theta(z2/t1_1)*delta(z1/t1_1, h*mu2/mu1)")
        ));
        let wh21 = modified_weight_function(&[2, 1]).unwrap().expr;
        assert!(same(
            &wh21,
            &e("theta'(1)^-1*theta(z1/gamma1)*theta(z2/gamma1)*delta(z1/gamma1, h)*delta(z2/gamma1, mu2/mu1)")
        ));
    }

    #[test]
    fn wwh_123_display() {
        let w = modified_weight_function(&[1, 2, 3]).unwrap().expr;
        let shown = e("theta(z2/gamma1)*theta(z3/gamma1)*theta(z3/gamma2)*theta(z1*h/gamma2)\
             *theta(z1*h*mu3/(gamma1*mu1))*theta(z2*h*mu3/(gamma2*mu2))\
             *theta(h*mu3/mu1)^-1*theta(h*mu3/mu2)^-1*theta(gamma1*h/gamma2)^-1");
        assert!(same(&w, &shown));
    }

    #[test]
    fn modifying_twice_is_modifying_once() {
        let w = modified_weight_function(&[2, 3, 1]).unwrap().expr;
        assert_eq!(modify(&w), w);
    }

    #[test]
    fn identity_restrictions() {
        let id = [1, 2, 3];
        let r = restrict_weight_function(&id, &id).unwrap();
        assert!(same(&r, &e("theta(z2/z1)*theta(z3/z1)*theta(z3/z2)")));
        for s in all_perms(3).into_iter().filter(|s| s != &id) {
            assert!(restrict_weight_function(&id, &s).unwrap().is_zero());
            assert!(same(&restrict(&modified_weight_function(&id).unwrap().expr, &s), &FactoredExpr::zero()));
        }
    }

    #[test]
    fn diagonal_of_longest_element() {
        let w0 = [3, 2, 1];
        let r = restrict_weight_function(&w0, &w0).unwrap();
        let shown = e("theta(z2/z3)*theta(z1/z3)*theta(z1/z2)*delta(z2/z3, h)*delta(z1/z3, h)*delta(z1/z2, h)");
        assert!(same(&r, &shown));
    }

    #[test]
    fn normalization_of_21_has_one_factor() {
        assert_eq!(normalization_factors(&[2, 1]), vec![Atom::delta(e_m("mu1/mu2"), e_m("h"))]);
        assert!(normalization_factors(&[1, 2, 3]).is_empty());
        assert_eq!(normalization_factors(&[3, 2, 1]).len(), 3);
    }

    fn e_m(s: &str) -> HalfMonomial {
        s.parse().unwrap()
    }

    #[test]
    fn psi_constants() {
        assert_eq!(psi_constant(&[1]).unwrap(), FactoredExpr::one());
        assert_eq!(psi_constant(&[2, 1]).unwrap(), e("theta(h)*theta(mu2/mu1)"));
        assert_eq!(
            psi_constant(&[1, 2, 3]).unwrap(),
            e("theta(h)^2*theta(h*mu2/mu1)*theta(h*mu3/mu1)*theta(h*mu3/mu2)")
        );
    }

    #[test]
    fn identification_gl2_gl3() {
        all_pass(&check_identification(2, &all_perms(2), &cfg()));
        all_pass(&check_identification(3, &all_perms(3), &cfg()));
    }

    #[test]
    fn rescaled_classes_match_normalized_weight_functions() {
        all_pass(&check_normalized_identification(2, &cfg()));
        all_pass(&check_normalized_identification(3, &cfg()));
    }

    #[test]
    fn recursions() {
        for n in [2, 3] {
            all_pass(&check_rmatrix(n, &cfg()));
            all_pass(&check_upgoing(n, &cfg()));
            all_pass(&check_uni_rw(n, &cfg()));
            all_pass(&check_uni_bsw(n, &cfg()));
        }
        all_pass(&[check_uni_bsw_unrestricted_fails(&cfg())]);
    }

    #[test]
    fn symmetric_in_each_level() {
        all_pass(&check_symmetry(3, &cfg()).unwrap());
    }

    #[test]
    fn axioms_gl3() {
        let rs = check_axioms(3, &CheckConfig::new(2, 2, 5)).unwrap();
        all_pass(&rs);
        assert_eq!(rs.iter().filter(|r| r.id.contains("GKM")).count(), 72);
        assert_eq!(rs.iter().filter(|r| r.id.contains("normalization")).count(), 6);
        assert_eq!(rs.iter().filter(|r| r.id.contains("triangularity")).count(), 36 - 19);
    }

    #[test]
    fn gkm_detects_a_wrong_restriction() {
        let a = restrict(&modified_weight_function(&[2, 1]).unwrap().expr, &[1, 2]);
        let b = a.mul(&e("theta(h*z1/z2)"));
        let out = compare_on_diagonal(&a, &b, 1, 2, &cfg()).unwrap();
        assert!(out.is_some());
    }

    #[test]
    fn chat_descends_to_restrictions() {
        let datum = RootDatum::gl(2);
        let w_id = modified_weight_function(&[1, 2])
            .unwrap()
            .expr
            .mul(&FactoredExpr::product(vec![Atom::theta(e_m("gamma2/gamma1")).pow(-1)]));
        assert!(same(
            &w_id,
            &e("theta(z2/gamma1)*theta(h*mu2*z1/(gamma1*mu1))*theta(gamma2/gamma1)^-1*theta(h*mu2/mu1)^-1")
        ));
        let w_s1 = apply_chat(&datum, 1, &w_id).unwrap();
        let shown = e("theta(gamma2*mu2/(gamma1*mu1))*theta(z2/gamma1)*theta(h*mu1*z1/(gamma1*mu2))\
             *theta(gamma2/gamma1)^-2*theta(mu2/mu1)^-1*theta(h*mu1/mu2)^-1\
             - theta(gamma2*h/gamma1)*theta(z2/gamma2)*theta(h*mu1*z1/(gamma2*mu2))\
             *theta(gamma2/gamma1)^-2*theta(h)^-1*theta(h*mu1/mu2)^-1");
        assert!(same(&w_s1, &shown.mul(&e("theta'(1)"))));
        for s in all_perms(2) {
            let se = element(&datum, &s);
            let class = schubert_local_bs(&datum, &element(&datum, &[2, 1]), &se);
            assert!(same(&restrict(&w_s1, &s), &class));
        }
    }

    #[test]
    fn longest_gl3_is_the_s1s2s1_expression() {
        let out = lex_word_experiment(3).unwrap();
        assert_eq!(out.len(), 19);
        let top = out.iter().find(|c| c.omega == [3, 2, 1] && c.sigma == [1, 2, 3]).unwrap();
        assert!(top.coincide);
    }
}
