//! Dempster-Shafer inference for multinomial data.
//!
//! The centerpiece is the Dirichlet random-set posterior for a multinomial
//! parameter: observing counts `N` focuses mass on the random subsets
//! `{theta : theta_k >= Z_k}` where `(Z_0, Z) ~ Dirichlet(1, N)`. Assertions
//! about `theta` are scored with the three-valued `(p, q, r)` calculus
//! ("for", "against", "don't know"). Companion modules cover the
//! simplex-uniform variant of the posterior (LP-backed rejection sampling),
//! the imprecise Dirichlet model, a Jeffreys-prior Bayes comparison, a
//! genetic-linkage worked example, and a DS test of independence for
//! bivariate data.

// Parameter guards are written `!(x > 0.0)` on purpose: the negation also
// rejects NaN, which `x <= 0.0` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dsm;
pub mod error;
pub mod idm;
pub mod independence;
pub mod ks;
pub mod linkage;
pub mod lp;
pub mod rng;
pub mod simplex_dsm;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
