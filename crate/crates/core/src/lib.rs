//! Maximal lotteries and the urn process that approximates them.
//!
//! The crate is organised around the majority margin matrix of a preference
//! profile. Everything downstream consumes it:
//!
//! * [`prefs`] parses profiles and builds majority and margin matrices with
//!   exact rational arithmetic.
//! * [`lottery`] solves `M̃ p ≤ 0` over the simplex with an exact simplex
//!   method and diagnoses uniqueness.
//! * [`urn`] simulates the mutation-perturbed urn Markov chain.
//! * [`chain_exact`] enumerates the finite state space, builds the transition
//!   kernel and computes stationary distributions.
//! * [`replicator`] integrates the mean-field ODE and locates its fixed point.
//! * [`bounds`] produces certified `(N, r)` recipes for profiles with a
//!   Condorcet winner.
//! * [`consistency`] checks approximate population- and Condorcet-consistency.

pub mod bounds;
pub mod catalog;
pub mod chain_exact;
pub mod consistency;
mod error;
pub mod lottery;
pub mod prefs;
pub mod replicator;
pub mod simplex;
pub mod urn;

pub use error::{Error, Result};
pub use num::BigRational as Rational;

/// Exact rational `numer / denom`.
pub fn rational(numer: i64, denom: i64) -> Rational {
    Rational::new(numer.into(), denom.into())
}

/// Serializes a rational as its `a/b` string, for `#[serde(serialize_with)]`.
pub fn serialize_rational<S: serde::Serializer>(x: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(x)
}
