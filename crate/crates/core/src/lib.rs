//! Exact and floating-point machinery for the entropy of Poisson–binomial
//! laws (sums of independent, non-identically distributed Bernoulli
//! variables) along one-coordinate parameter paths.
//!
//! The crate is organised bottom-up:
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`rational`] | exact rational scalar, literal parsing, `"num/den"` serde |
//! | [`bernoulli`] | parameter vectors, mass functions, leave-one-out, log-concavity minors |
//! | [`mixing`] | mixing coefficients α/β, the `A_p`/`B_p`/`Q_{m,p}` families, odd moments, the S-chain |
//! | [`entropy`] | Shannon/Rényi/Tsallis entropies, path derivatives, ψ and ψ_q, finite differences |
//! | [`verification`] | runnable check suites with witnesses and the seeded Tsallis search |
//! | [`sweep`] | parameter sweeps rendered as CSV or JSON |
//! | [`cli`] | the `polybern` command-line front end |
//!
//! Every sign-critical quantity (minors, moments, S-chain values, identity
//! residuals) is computed in exact rational arithmetic. Floating point only
//! enters where logarithms or real powers force it.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bernoulli;
pub mod cli;
pub mod entropy;
pub mod mixing;
pub mod rational;
pub mod sweep;
pub mod verification;

mod error;

pub use bernoulli::{
    brute_force_pmf, drop_last, leave_one_out, minors, pmf, shifted_mixture, Backend,
    MassFunction, MinorSequence, ParamVector, SheppOlkinPath,
};
pub use error::{Error, Result};
pub use mixing::{
    a_product, b_product, ipp_residual, mixing_profile, odd_central_moment, q_poly, s_chain,
    IndexedTable, MixingProfile, SChainReport,
};
pub use rational::Rational;
