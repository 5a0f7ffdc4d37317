//! Equivariant elliptic classes of Schubert varieties, computed exactly.
//!
//! Classes are formal sums of products of theta functions ([`theta::FactoredExpr`]);
//! identities between them are decided by exact evaluation of truncated
//! `q`-series at random positive rational points.

pub mod bottsamelson;
pub mod ellclasses;
pub mod epsseries;
pub mod error;
pub mod exactseries;
pub mod hecke;
pub mod ratfunc;
pub mod report;
pub mod rootdata;
pub mod theta;
pub mod transforms;
pub mod weightfn;

pub use error::{Error, Result};
pub use exactseries::{EvalPoint, HalfMonomial, QSeries, Rational, Var};
pub use rootdata::{RootDatum, Sort, WeylElement};
pub use theta::{Atom, AtomKind, CheckConfig, FactoredExpr, Term};
