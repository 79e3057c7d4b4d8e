//! Numerical toolkit for the quasi-factorization of quantum relative entropy.
//!
//! The crate evaluates every functional that enters the bound
//! `(1 + 2 ||H(sigma_AB)||_inf) Ent(rho_AB || sigma_AB) >= Ent(rho_A || sigma_A) + Ent(rho_B || sigma_B)`
//! and checks it, together with the intermediate inequalities that prove it,
//! on finite-dimensional bipartite states.
//!
//! - [`linalg`]: Hermitian operators, spectral calculus, partial traces, norms.
//! - [`entropy`]: relative entropy, mutual information, scaling identities.
//! - [`superops`]: the Lieb superoperator, `L(sigma_AB)`, `H(sigma_AB)`, channels.
//! - [`wlp`]: `rho`-weighted L^p norms and the L¹ contraction check.
//! - [`verify`]: per-inequality reports and the full breakdown.
//! - [`statesgen`]: seeded state ensembles.

#![forbid(unsafe_code)]

pub mod entropy;
pub mod error;
pub mod linalg;
pub mod matrix_json;
pub mod statesgen;
pub mod superops;
pub mod verify;
pub mod wlp;

pub use error::{Error, Result};
