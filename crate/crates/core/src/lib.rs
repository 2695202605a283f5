//! Detection and classification of real geometric singularities of implicit
//! polynomial ODE systems.
//!
//! The pipeline: a differential system is parsed into jet-space polynomials,
//! the linear system cutting out the Vessiot spaces is assembled, a parametric
//! Gaussian elimination splits jet space into guarded cases, and each case is
//! pruned by a real-satisfiability check and classified as regular, regular
//! singular or irregular singular.
//!
//! Modules:
//!
//! - [`poly`] — exact sparse multivariate polynomials over jet variables and
//!   parameters, with rational coefficients.
//! - [`formula`] — quantifier-free formulas over polynomial atoms, guard
//!   conjunctions, DNF, simplification and the deduction procedure used by
//!   the elimination.
//! - [`jet`] — differential systems, contact fields, formal derivatives,
//!   prolongation and the Vessiot coefficient matrix.
//! - [`pgauss`] — parametric Gaussian elimination with guarded case splits.
//! - [`qelim`] — real satisfiability via virtual substitution, with an
//!   SMT-LIB process bridge as fallback.
//! - [`singular`] — the end-to-end singularity analysis and a point-wise
//!   rank oracle.
//! - [`cli`] — the input language, run configuration and report formats.

pub mod cli;
pub mod formula;
pub mod jet;
pub mod pgauss;
pub mod poly;
pub mod qelim;
pub mod singular;

pub use poly::{Poly, Rat, VariableId};
