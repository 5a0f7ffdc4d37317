//! Torus fixed points of Bott–Samelson resolutions and their local classes.

use crate::error::{Error, Result};
use crate::exactseries::{HalfMonomial, Var};
use crate::rootdata::{RootDatum, Sort, WeylElement};
use crate::theta::{Atom, FactoredExpr};

/// A fixed point of `Z_ω`, given by a 01-sequence over the letters of the word.
#[derive(Clone, Debug, PartialEq)]
pub struct BSFixedPoint {
    pub sequence: Vec<bool>,
    pub image: WeylElement,
    /// Tangent characters, one per letter, in z-variables.
    pub tangent_chars: Vec<HalfMonomial>,
    /// Chevalley multiplicity `h^{⟨λ, β∨⟩}` of the boundary divisor at each letter.
    pub boundary_mults: Vec<HalfMonomial>,
}

fn require_reduced(datum: &RootDatum, word: &[usize]) -> Result<WeylElement> {
    let w = datum.element(word)?;
    if w.len() != word.len() {
        return Err(Error::Usage(format!("word {word:?} is not reduced")));
    }
    Ok(w)
}

/// Boundary multiplicities of the canonical section, one per letter.
///
/// Splitting `ω = ω₁ s_{k_j} ω₂` at letter `j`, the multiplicity is
/// `⟨λ, β∨⟩` with `β∨ = ω₂⁻¹(α_{k_j}∨)`.
pub fn boundary_multiplicities(datum: &RootDatum, word: &[usize]) -> Result<Vec<HalfMonomial>> {
    require_reduced(datum, word)?;
    (0..word.len())
        .map(|j| {
            let omega2 = datum.element(&word[j + 1..])?;
            let beta = datum.act_coweight(&datum.inverse(&omega2), &datum.simple_coroots[word[j] - 1]);
            Ok(datum.coroot_mu_monomial(&beta))
        })
        .collect()
}

/// All `2^ℓ` fixed points of `Z_ω` in lexicographic order of their sequences.
pub fn enumerate_fixed_points(datum: &RootDatum, word: &[usize]) -> Result<Vec<BSFixedPoint>> {
    let mults = boundary_multiplicities(datum, word)?;
    let l = word.len();
    let mut out = Vec::with_capacity(1 << l);
    for bits in 0..(1u64 << l) {
        let sequence: Vec<bool> = (0..l).map(|j| bits >> (l - 1 - j) & 1 == 1).collect();
        let mut image = datum.identity();
        let mut tangent_chars = Vec::with_capacity(l);
        for (&k, &e) in word.iter().zip(&sequence) {
            let c = datum.line_bundle_char(k, &image);
            if e {
                tangent_chars.push(c.inv());
                image = datum.mul(&image, &datum.simple(k));
            } else {
                tangent_chars.push(c);
            }
        }
        out.push(BSFixedPoint {
            sequence,
            image,
            tangent_chars,
            boundary_mults: mults.clone(),
        });
    }
    Ok(out)
}

/// `∏ δ(t_i, h^{1−a_i})` where `mults[i]` is the monomial `h^{a_i}`.
///
/// A multiplicity equal to `h` (that is, `a_i = 1`) is outside the KLT range.
pub fn local_klt_class(tangent_chars: &[HalfMonomial], mults: &[HalfMonomial]) -> Result<FactoredExpr> {
    if tangent_chars.len() != mults.len() {
        return Err(Error::Usage(format!(
            "{} characters but {} multiplicities",
            tangent_chars.len(),
            mults.len()
        )));
    }
    let h = HalfMonomial::var(Var::H);
    let mut atoms = Vec::with_capacity(mults.len());
    for (t, a) in tangent_chars.iter().zip(mults) {
        if *a == h {
            return Err(Error::Domain(format!("multiplicity 1 on the divisor with character {t}")));
        }
        atoms.push(Atom::delta(t.clone(), h.div(a)));
    }
    Ok(FactoredExpr::product(atoms))
}

/// `E_x(Z_ω, λ)` by the letter-by-letter recursion: strip the last letter
/// `s_k`, compute the class of the shorter word at `s_kλ`, and multiply by
/// `δ((L_k)_{f(x')}, ν_k)` or `δ((L_k⁻¹)_{f(x')}, h)`.
pub fn bs_local_class(datum: &RootDatum, word: &[usize], x: &BSFixedPoint) -> Result<FactoredExpr> {
    require_reduced(datum, word)?;
    if x.sequence.len() != word.len() {
        return Err(Error::Usage("fixed point does not match the word".into()));
    }
    Ok(recurse(datum, word, &x.sequence).0)
}

fn recurse(datum: &RootDatum, word: &[usize], seq: &[bool]) -> (FactoredExpr, WeylElement) {
    let Some((&k, prefix)) = word.split_last() else {
        return (FactoredExpr::one(), datum.identity());
    };
    let (e, seq_prefix) = seq.split_last().expect("same length");
    let (prev, image) = recurse(datum, prefix, seq_prefix);
    let sk = datum.simple(k);
    let twisted = prev.map_monomials(&|m| datum.act_on_sort(&sk, m, Sort::Mu));
    let c = datum.line_bundle_char(k, &image);
    if *e {
        let atom = Atom::delta(c.inv(), HalfMonomial::var(Var::H));
        (twisted.mul_atoms(&[atom]), datum.mul(&image, &sk))
    } else {
        (twisted.mul_atoms(&[Atom::delta(c, datum.nu(k))]), image)
    }
}
