//! Root data, Weyl groups and the monomial dictionaries.
//!
//! Simple reflections are numbered from 1. Words are read as compositions,
//! so `[1, 2]` is `s₁∘s₂`. Weights act on the ambient lattice through
//! `s_k(v) = v − ⟨v, α_k∨⟩ α_k`, coweights through `s_k(c) = c − ⟨α_k, c⟩ α_k∨`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactseries::{HalfMonomial, Var};

pub type Vector = Vec<i64>;

const ROOT_CAP: usize = 10_000;

fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn reflect(v: &[i64], root: &[i64], coroot: &[i64]) -> Vector {
    let c = dot(v, coroot);
    v.iter().zip(root).map(|(x, r)| x - c * r).collect()
}

/// Input form of a root datum.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DatumSpec {
    pub simple_roots: Vec<Vector>,
    pub simple_coroots: Vec<Vector>,
}

#[derive(Clone, Debug)]
pub struct RootDatum {
    pub name: String,
    pub ambient_dim: usize,
    pub simple_roots: Vec<Vector>,
    pub simple_coroots: Vec<Vector>,
    /// Positive roots, simple roots first, with their coroots.
    pub positive_roots: Vec<Vector>,
    pub positive_coroots: Vec<Vector>,
    root_index: BTreeMap<Vector, usize>,
}

impl RootDatum {
    pub fn new(name: &str, spec: DatumSpec) -> Result<Self> {
        let DatumSpec {
            simple_roots,
            simple_coroots,
        } = spec;
        let bad = |m: String| Error::InvalidDatum(m);
        if simple_roots.len() != simple_coroots.len() {
            return Err(bad("root and coroot counts differ".into()));
        }
        let ambient_dim = simple_roots.first().map_or(0, Vec::len);
        if simple_roots.iter().chain(&simple_coroots).any(|v| v.len() != ambient_dim) {
            return Err(bad("vectors of unequal length".into()));
        }
        let r = simple_roots.len();
        for j in 0..r {
            for k in 0..r {
                let a = dot(&simple_roots[j], &simple_coroots[k]);
                let b = dot(&simple_roots[k], &simple_coroots[j]);
                if j == k && a != 2 {
                    return Err(bad(format!("⟨α{0}, α{0}∨⟩ = {a}", j + 1)));
                }
                if j != k && (a > 0 || (a == 0) != (b == 0)) {
                    return Err(bad(format!("invalid Cartan entry at ({}, {})", j + 1, k + 1)));
                }
            }
        }
        if integer_rank(&simple_roots) != r {
            return Err(bad("simple roots are linearly dependent".into()));
        }

        // s_k permutes the positive roots other than α_k, so closing the
        // simple roots under that rule yields exactly the positive roots.
        let mut positive_roots = simple_roots.clone();
        let mut positive_coroots = simple_coroots.clone();
        let mut root_index: BTreeMap<Vector, usize> =
            positive_roots.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
        if root_index.len() != r {
            return Err(bad("repeated simple root".into()));
        }
        let mut queue: VecDeque<usize> = (0..r).collect();
        while let Some(i) = queue.pop_front() {
            for k in 0..r {
                if i == k {
                    continue;
                }
                let beta = reflect(&positive_roots[i], &simple_roots[k], &simple_coroots[k]);
                if root_index.contains_key(&beta) {
                    continue;
                }
                let beta_v = reflect(&positive_coroots[i], &simple_coroots[k], &simple_roots[k]);
                if positive_roots.len() >= ROOT_CAP {
                    return Err(bad(format!("more than {ROOT_CAP} positive roots")));
                }
                root_index.insert(beta.clone(), positive_roots.len());
                queue.push_back(positive_roots.len());
                positive_roots.push(beta);
                positive_coroots.push(beta_v);
            }
        }
        Ok(Self {
            name: name.to_string(),
            ambient_dim,
            simple_roots,
            simple_coroots,
            positive_roots,
            positive_coroots,
            root_index,
        })
    }

    /// Type A_{n−1} in GL_n coordinates.
    pub fn gl(n: usize) -> Self {
        let e = |k: usize| -> Vector { (0..n).map(|i| i64::from(i == k) - i64::from(i == k + 1)).collect() };
        let roots: Vec<Vector> = (0..n.saturating_sub(1)).map(e).collect();
        let spec = DatumSpec {
            simple_roots: roots.clone(),
            simple_coroots: roots,
        };
        let mut d = Self::new(&format!("a{}", n.saturating_sub(1)), spec).expect("type A datum");
        d.ambient_dim = n;
        d
    }

    /// Sp₂ (type C₂) with α₁ = (1,−1), α₂ = (0,2).
    pub fn sp2() -> Self {
        let spec = DatumSpec {
            simple_roots: vec![vec![1, -1], vec![0, 2]],
            simple_coroots: vec![vec![1, -1], vec![0, 1]],
        };
        Self::new("c2", spec).expect("C2 datum")
    }

    /// Built-in data: `a1`..`a4` (as GL_2..GL_5) and `c2`.
    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "c2" => Ok(Self::sp2()),
            _ => match name.strip_prefix('a').and_then(|r| r.parse::<usize>().ok()) {
                Some(r) if (1..=4).contains(&r) => Ok(Self::gl(r + 1)),
                _ => Err(Error::InvalidDatum(format!("unknown built-in {name:?}"))),
            },
        }
    }

    /// A built-in name or a path to a JSON [`DatumSpec`].
    pub fn load(name_or_path: &str) -> Result<Self> {
        if let Ok(d) = Self::builtin(name_or_path) {
            return Ok(d);
        }
        let text = std::fs::read_to_string(name_or_path)
            .map_err(|e| Error::InvalidDatum(format!("{name_or_path}: {e}")))?;
        let spec: DatumSpec =
            serde_json::from_str(&text).map_err(|e| Error::InvalidDatum(format!("{name_or_path}: {e}")))?;
        Self::new(name_or_path, spec)
    }

    pub fn rank(&self) -> usize {
        self.simple_roots.len()
    }

    /// Type A data in GL coordinates (Cartan type A and ambient e_i − e_{i+1} roots).
    pub fn is_type_a(&self) -> bool {
        let n = self.ambient_dim;
        self.rank() + 1 == n
            && (0..self.rank()).all(|k| {
                let e: Vector = (0..n).map(|i| i64::from(i == k) - i64::from(i == k + 1)).collect();
                self.simple_roots[k] == e && self.simple_coroots[k] == e
            })
    }

    pub fn cartan(&self, j: usize, k: usize) -> i64 {
        dot(&self.simple_roots[j - 1], &self.simple_coroots[k - 1])
    }

    /// Order of `s_j s_k` (the braid length).
    pub fn braid_order(&self, j: usize, k: usize) -> usize {
        if j == k {
            return 1;
        }
        match self.cartan(j, k) * self.cartan(k, j) {
            0 => 2,
            1 => 3,
            2 => 4,
            3 => 6,
            _ => unreachable!("finite Cartan product"),
        }
    }

    /// `Some(true)` for a positive root, `Some(false)` for a negative one.
    pub fn root_sign(&self, v: &[i64]) -> Option<bool> {
        if self.root_index.contains_key(v) {
            Some(true)
        } else {
            let neg: Vector = v.iter().map(|x| -x).collect();
            self.root_index.contains_key(&neg).then_some(false)
        }
    }

    /// The coroot of any root, positive or negative.
    pub fn coroot_of(&self, v: &[i64]) -> Option<Vector> {
        if let Some(&i) = self.root_index.get(v) {
            return Some(self.positive_coroots[i].clone());
        }
        let neg: Vector = v.iter().map(|x| -x).collect();
        self.root_index
            .get(&neg)
            .map(|&i| self.positive_coroots[i].iter().map(|x| -x).collect())
    }

    fn simple_matrix(&self, k: usize) -> Vec<i64> {
        let n = self.ambient_dim;
        let mut m = vec![0; n * n];
        for j in 0..n {
            let e: Vector = (0..n).map(|i| i64::from(i == j)).collect();
            let col = reflect(&e, &self.simple_roots[k - 1], &self.simple_coroots[k - 1]);
            for i in 0..n {
                m[i * n + j] = col[i];
            }
        }
        m
    }

    fn mat_mul(&self, a: &[i64], b: &[i64]) -> Vec<i64> {
        let n = self.ambient_dim;
        let mut c = vec![0; n * n];
        for i in 0..n {
            for k in 0..n {
                let x = a[i * n + k];
                if x != 0 {
                    for j in 0..n {
                        c[i * n + j] += x * b[k * n + j];
                    }
                }
            }
        }
        c
    }

    fn identity_matrix(&self) -> Vec<i64> {
        let n = self.ambient_dim;
        (0..n * n).map(|i| i64::from(i / n == i % n)).collect()
    }

    fn matrix_of_word(&self, word: &[usize]) -> Result<Vec<i64>> {
        let mut m = self.identity_matrix();
        for &k in word {
            if k == 0 || k > self.rank() {
                return Err(Error::Usage(format!("simple index {k} out of range 1..={}", self.rank())));
            }
            m = self.mat_mul(&m, &self.simple_matrix(k));
        }
        Ok(m)
    }

    fn apply_matrix(&self, m: &[i64], v: &[i64]) -> Vector {
        let n = self.ambient_dim;
        (0..n).map(|i| dot(&m[i * n..(i + 1) * n], v)).collect()
    }

    fn element_from_matrix(&self, matrix: Vec<i64>) -> WeylElement {
        // Peel off the smallest left descent each time: this builds the
        // lexicographically smallest reduced word.
        let mut word = Vec::new();
        let mut m = matrix.clone();
        loop {
            // k is a left descent iff w⁻¹(α_k) < 0.
            let k = (1..=self.rank()).find(|&k| {
                let v = solve_unimodular(&m, &self.simple_roots[k - 1], self.ambient_dim);
                self.root_sign(&v) == Some(false)
            });
            match k {
                Some(k) => {
                    word.push(k);
                    m = self.mat_mul(&self.simple_matrix(k), &m);
                }
                None => break,
            }
        }
        WeylElement { word, matrix }
    }

    pub fn identity(&self) -> WeylElement {
        WeylElement {
            word: vec![],
            matrix: self.identity_matrix(),
        }
    }

    pub fn simple(&self, k: usize) -> WeylElement {
        self.element(&[k]).expect("valid simple index")
    }

    /// The element represented by `word`; non-reduced words are allowed.
    pub fn element(&self, word: &[usize]) -> Result<WeylElement> {
        Ok(self.element_from_matrix(self.matrix_of_word(word)?))
    }

    pub fn mul(&self, a: &WeylElement, b: &WeylElement) -> WeylElement {
        self.element_from_matrix(self.mat_mul(&a.matrix, &b.matrix))
    }

    pub fn inverse(&self, a: &WeylElement) -> WeylElement {
        let rev: Vec<usize> = a.word.iter().rev().copied().collect();
        self.element(&rev).expect("valid word")
    }

    /// `σ(v)` for a weight `v`.
    pub fn act_weight(&self, w: &WeylElement, v: &[i64]) -> Vector {
        self.apply_matrix(&w.matrix, v)
    }

    /// `σ(c)` for a coweight `c`.
    pub fn act_coweight(&self, w: &WeylElement, c: &[i64]) -> Vector {
        let mut v = c.to_vec();
        for &k in w.word.iter().rev() {
            v = reflect(&v, &self.simple_coroots[k - 1], &self.simple_roots[k - 1]);
        }
        v
    }

    /// `#{α > 0 : w(α) < 0}`, computed from the roots rather than the word.
    pub fn inversion_count(&self, w: &WeylElement) -> usize {
        self.positive_roots
            .iter()
            .filter(|a| self.root_sign(&self.act_weight(w, a)) == Some(false))
            .count()
    }

    /// All elements, by breadth-first search from the identity; sorted by
    /// length, then canonical word.
    pub fn elements(&self) -> Vec<WeylElement> {
        let mut seen: BTreeSet<Vec<i64>> = BTreeSet::new();
        let mut out = Vec::new();
        let mut queue = VecDeque::from([self.identity()]);
        seen.insert(self.identity_matrix());
        while let Some(w) = queue.pop_front() {
            for k in 1..=self.rank() {
                let m = self.mat_mul(&w.matrix, &self.simple_matrix(k));
                if seen.insert(m.clone()) {
                    queue.push_back(self.element_from_matrix(m));
                }
            }
            out.push(w);
        }
        out.sort();
        out
    }

    pub fn longest(&self) -> WeylElement {
        self.elements().pop().expect("nonempty group")
    }

    /// Bruhat order via the lifting property: for a left descent s of ω,
    /// σ ≤ ω iff min(σ, sσ) ≤ sω.
    pub fn bruhat_leq(&self, sigma: &WeylElement, omega: &WeylElement) -> bool {
        if sigma.len() > omega.len() {
            return false;
        }
        let Some(&s) = omega.word.first() else {
            return sigma.is_identity();
        };
        let so = self.mul(&self.simple(s), omega);
        let ss = self.mul(&self.simple(s), sigma);
        let lower = if ss.len() < sigma.len() { ss } else { sigma.clone() };
        self.bruhat_leq(&lower, &so)
    }

    /// Every reduced word of `w`, sorted.
    pub fn reduced_words(&self, w: &WeylElement) -> Vec<Vec<usize>> {
        if w.is_identity() {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for k in 1..=self.rank() {
            let sw = self.mul(&self.simple(k), w);
            if sw.len() < w.len() {
                for mut rest in self.reduced_words(&sw) {
                    rest.insert(0, k);
                    out.push(rest);
                }
            }
        }
        out.sort();
        out
    }

    /// Applies `σ` to a monomial of one sort; `h` is fixed.
    ///
    /// The z- and γ-sorts transform as weights, the μ-sort as coweights.
    pub fn act_on_monomial(&self, w: &WeylElement, m: &HalfMonomial, sort: Sort) -> Result<HalfMonomial> {
        let n = self.ambient_dim;
        let mut vec = vec![0i64; n];
        let mut rest = Vec::new();
        for &(v, e) in m.exponents() {
            match (sort.index(v), v) {
                (Some(i), _) if (1..=n).contains(&i) => vec[i - 1] = i64::from(e),
                (None, Var::H) => rest.push((v, e)),
                _ => return Err(Error::Usage(format!("{v} is not of sort {sort:?} in {m}"))),
            }
        }
        let image = match sort {
            Sort::Mu => self.act_coweight(w, &vec),
            Sort::Z | Sort::Gamma => self.act_weight(w, &vec),
        };
        let pairs = image
            .iter()
            .enumerate()
            .map(|(i, &e)| (sort.var(i + 1), e as i32))
            .chain(rest);
        Ok(HalfMonomial::from_doubled(pairs))
    }

    /// Acts on the given sort of a mixed monomial, leaving other variables fixed.
    pub fn act_on_sort(&self, w: &WeylElement, m: &HalfMonomial, sort: Sort) -> HalfMonomial {
        let (mine, other): (Vec<_>, Vec<_>) = m.exponents().iter().partition(|(v, _)| sort.index(*v).is_some());
        let mine = HalfMonomial::from_doubled(mine);
        let acted = self.act_on_monomial(w, &mine, sort).expect("single-sort monomial");
        acted.mul(&HalfMonomial::from_doubled(other))
    }

    /// `z^v` for an integer weight `v` in the given sort.
    pub fn weight_monomial(&self, v: &[i64], sort: Sort) -> HalfMonomial {
        HalfMonomial::from_doubled(v.iter().enumerate().map(|(i, &e)| (sort.var(i + 1), 2 * e as i32)))
    }

    /// Fixed-point character of `L_k` at `x_σ`: `z^{−σ(α_k)}`.
    pub fn line_bundle_char(&self, k: usize, sigma: &WeylElement) -> HalfMonomial {
        self.line_bundle_char_in(k, sigma, Sort::Z)
    }

    pub fn line_bundle_char_in(&self, k: usize, sigma: &WeylElement, sort: Sort) -> HalfMonomial {
        let v: Vector = self.act_weight(sigma, &self.simple_roots[k - 1]).iter().map(|x| -x).collect();
        self.weight_monomial(&v, sort)
    }

    /// `h^{⟨λ, β∨⟩}` written as `∏ μ_i^{−β∨_i}`.
    pub fn coroot_mu_monomial(&self, coroot: &[i64]) -> HalfMonomial {
        let v: Vector = coroot.iter().map(|x| -x).collect();
        self.weight_monomial(&v, Sort::Mu)
    }

    /// `ν_k = h^{⟨λ, α_k∨⟩}`.
    pub fn nu(&self, k: usize) -> HalfMonomial {
        self.coroot_mu_monomial(&self.simple_coroots[k - 1])
    }

    /// Variables of the z- and μ-sorts together with `h`.
    pub fn class_vars(&self) -> BTreeSet<Var> {
        (1..=self.ambient_dim)
            .flat_map(|i| [Var::Z(i as u8), Var::Mu(i as u8)])
            .chain([Var::H])
            .collect()
    }

    /// One-line notation `σ(1)…σ(n)` for type A data.
    pub fn permutation(&self, w: &WeylElement) -> Option<Vec<usize>> {
        if !self.is_type_a() {
            return None;
        }
        let n = self.ambient_dim;
        Some(
            (0..n)
                .map(|j| (0..n).find(|&i| w.matrix[i * n + j] == 1).expect("permutation matrix") + 1)
                .collect(),
        )
    }

    /// The element with one-line notation `perm` (type A).
    pub fn from_permutation(&self, perm: &[usize]) -> Result<WeylElement> {
        let n = self.ambient_dim;
        let mut sorted = perm.to_vec();
        sorted.sort();
        if !self.is_type_a() || sorted != (1..=n).collect::<Vec<_>>() {
            return Err(Error::Usage(format!("{perm:?} is not a permutation of 1..={n}")));
        }
        let mut m = vec![0; n * n];
        for (j, &p) in perm.iter().enumerate() {
            m[(p - 1) * n + j] = 1;
        }
        Ok(self.element_from_matrix(m))
    }

    /// Parses `id`, `s1s2s1`, or (type A) one-line notation such as `321`.
    pub fn parse_element(&self, s: &str) -> Result<WeylElement> {
        let s = s.trim();
        if s == "id" || s == "e" {
            return Ok(self.identity());
        }
        if s.starts_with('s') {
            let word = s
                .split('s')
                .skip(1)
                .map(|t| t.parse::<usize>().map_err(|_| Error::Usage(format!("bad word {s:?}"))))
                .collect::<Result<Vec<_>>>()?;
            return self.element(&word);
        }
        let perm = s
            .chars()
            .map(|c| c.to_digit(10).map(|d| d as usize).ok_or_else(|| Error::Usage(format!("bad element {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        self.from_permutation(&perm)
    }
}

/// Solves `m·x = v` for an integer matrix with determinant ±1.
fn solve_unimodular(m: &[i64], v: &[i64], n: usize) -> Vector {
    // Fraction-free Gaussian elimination on the augmented matrix.
    let mut a: Vec<Vec<i128>> = (0..n)
        .map(|i| {
            let mut row: Vec<i128> = m[i * n..(i + 1) * n].iter().map(|&x| x as i128).collect();
            row.push(v[i] as i128);
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| a[r][col] != 0).expect("invertible matrix");
        a.swap(col, piv);
        for r in 0..n {
            if r != col && a[r][col] != 0 {
                let (p, q) = (a[col][col], a[r][col]);
                let pivot = a[col].clone();
                for (x, y) in a[r].iter_mut().zip(&pivot) {
                    *x = *x * p - y * q;
                }
            }
        }
    }
    (0..n)
        .map(|i| {
            debug_assert_eq!(a[i][n] % a[i][i], 0);
            (a[i][n] / a[i][i]) as i64
        })
        .collect()
}

fn integer_rank(rows: &[Vector]) -> usize {
    let mut a: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(piv) = (rank..a.len()).find(|&r| a[r][col] != 0) else {
            continue;
        };
        a.swap(rank, piv);
        for r in 0..a.len() {
            if r != rank && a[r][col] != 0 {
                let (p, q) = (a[rank][col], a[r][col]);
                let pivot = a[rank].clone();
                for (x, y) in a[r].iter_mut().zip(&pivot) {
                    *x = *x * p - y * q;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Variable sorts a Weyl group acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sort {
    Z,
    Mu,
    Gamma,
}

impl Sort {
    pub fn var(self, i: usize) -> Var {
        match self {
            Sort::Z => Var::Z(i as u8),
            Sort::Mu => Var::Mu(i as u8),
            Sort::Gamma => Var::Gamma(i as u8),
        }
    }

    pub fn index(self, v: Var) -> Option<usize> {
        match (self, v) {
            (Sort::Z, Var::Z(i)) | (Sort::Mu, Var::Mu(i)) | (Sort::Gamma, Var::Gamma(i)) => Some(i as usize),
            _ => None,
        }
    }
}

/// A Weyl group element with its lexicographically smallest reduced word.
///
/// Equality is equality of the action matrices; ordering is by length, then word.
#[derive(Clone, Debug)]
pub struct WeylElement {
    word: Vec<usize>,
    matrix: Vec<i64>,
}

impl WeylElement {
    pub fn word(&self) -> &[usize] {
        &self.word
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.word.is_empty()
    }

    pub fn action_matrix(&self) -> &[i64] {
        &self.matrix
    }
}

impl PartialEq for WeylElement {
    fn eq(&self, o: &Self) -> bool {
        self.matrix == o.matrix
    }
}

impl Eq for WeylElement {}

impl std::hash::Hash for WeylElement {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.matrix.hash(state);
    }
}

impl PartialOrd for WeylElement {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for WeylElement {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        (self.word.len(), &self.word).cmp(&(o.word.len(), &o.word))
    }
}

impl fmt::Display for WeylElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_empty() {
            return write!(f, "id");
        }
        for k in &self.word {
            write!(f, "s{k}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(s: &str) -> HalfMonomial {
        s.parse().unwrap()
    }

    #[test]
    fn positive_roots_and_group_orders() {
        let a2 = RootDatum::gl(3);
        let roots: BTreeSet<Vector> = a2.positive_roots.iter().cloned().collect();
        let expected: BTreeSet<Vector> = [vec![1, -1, 0], vec![0, 1, -1], vec![1, 0, -1]].into();
        assert_eq!(roots, expected);
        assert_eq!(a2.elements().len(), 6);

        let c2 = RootDatum::sp2();
        let roots: BTreeSet<Vector> = c2.positive_roots.iter().cloned().collect();
        let expected: BTreeSet<Vector> = [vec![1, -1], vec![0, 2], vec![1, 1], vec![2, 0]].into();
        assert_eq!(roots, expected);
        assert_eq!(c2.elements().len(), 8);

        assert_eq!(RootDatum::gl(2).positive_roots.len(), 1);
        assert_eq!(RootDatum::gl(2).elements().len(), 2);
        assert_eq!(RootDatum::gl(4).elements().len(), 24);
        assert_eq!(RootDatum::gl(5).elements().len(), 120);
    }

    #[test]
    fn coroots_follow_the_closure() {
        let c2 = RootDatum::sp2();
        assert_eq!(c2.coroot_of(&[1, 1]), Some(vec![1, 1]));
        assert_eq!(c2.coroot_of(&[2, 0]), Some(vec![1, 0]));
        assert_eq!(c2.coroot_of(&[-2, 0]), Some(vec![-1, 0]));
    }

    #[test]
    fn braid_words_agree() {
        let a2 = RootDatum::gl(3);
        let x = a2.element(&[1, 2, 1]).unwrap();
        assert_eq!(x, a2.element(&[2, 1, 2]).unwrap());
        assert_eq!(x.len(), 3);
        assert_eq!(x.word(), &[1, 2, 1]);
        assert_eq!(a2.permutation(&x).unwrap(), vec![3, 2, 1]);
        assert_eq!(a2.permutation(&a2.element(&[1, 2]).unwrap()).unwrap(), vec![2, 3, 1]);

        let c2 = RootDatum::sp2();
        let y = c2.element(&[1, 2, 1, 2]).unwrap();
        assert_eq!(y, c2.element(&[2, 1, 2, 1]).unwrap());
        assert_eq!(y.len(), 4);
        assert!(c2.element(&[]).unwrap().is_identity());
        assert!(c2.element(&[2, 2]).unwrap().is_identity());
        assert_eq!(c2.element(&[1, 2, 2, 1, 2]).unwrap().word(), &[2]);
    }

    #[test]
    fn bruhat_small_cases() {
        let a2 = RootDatum::gl(3);
        let e = |w: &[usize]| a2.element(w).unwrap();
        assert!(a2.bruhat_leq(&e(&[1]), &e(&[2, 1])));
        assert!(!a2.bruhat_leq(&e(&[1, 2]), &e(&[2, 1])));
        for w in a2.elements() {
            assert!(a2.bruhat_leq(&a2.identity(), &w));
            assert!(a2.bruhat_leq(&w, &w));
        }
    }

    #[test]
    fn monomial_actions() {
        let a2 = RootDatum::gl(3);
        let s1 = a2.simple(1);
        let s2 = a2.simple(2);
        assert_eq!(a2.act_on_monomial(&s1, &m("z1/z2"), Sort::Z).unwrap(), m("z2/z1"));
        assert_eq!(a2.act_on_monomial(&s2, &m("mu3/mu1"), Sort::Mu).unwrap(), m("mu2/mu1"));
        assert!(a2.act_on_monomial(&s2, &m("mu3/z1"), Sort::Mu).is_err());
        let c2 = RootDatum::sp2();
        assert_eq!(c2.act_on_monomial(&c2.simple(2), &m("z2^2"), Sort::Z).unwrap(), m("1/z2^2"));
    }

    #[test]
    fn characters_and_coroot_monomials() {
        let a2 = RootDatum::gl(3);
        let id = a2.identity();
        assert_eq!(a2.line_bundle_char(1, &id), m("z2/z1"));
        assert_eq!(a2.line_bundle_char(2, &id), m("z3/z2"));
        assert_eq!(a2.nu(1), m("mu2/mu1"));
        let c2 = RootDatum::sp2();
        assert_eq!(c2.line_bundle_char(2, &c2.identity()), m("1/z2^2"));
        assert_eq!(c2.nu(2), m("1/mu2"));
        assert!(c2.coroot_mu_monomial(&[0, 0]).is_one());
    }

    #[test]
    fn invalid_data_are_rejected() {
        let bad = DatumSpec {
            simple_roots: vec![vec![1, 0], vec![2, 0]],
            simple_coroots: vec![vec![2, 0], vec![1, 0]],
        };
        assert!(matches!(RootDatum::new("x", bad), Err(Error::InvalidDatum(_))));
        let bad = DatumSpec {
            simple_roots: vec![vec![1, -1]],
            simple_coroots: vec![vec![1, 0]],
        };
        assert!(RootDatum::new("x", bad).is_err());
        assert!(RootDatum::builtin("e8").is_err());
    }

    #[test]
    fn element_parsing() {
        let a2 = RootDatum::gl(3);
        assert_eq!(a2.parse_element("321").unwrap(), a2.longest());
        assert_eq!(a2.parse_element("s2s1s2").unwrap(), a2.longest());
        assert!(a2.parse_element("id").unwrap().is_identity());
        assert_eq!(a2.longest().to_string(), "s1s2s1");
    }
}
