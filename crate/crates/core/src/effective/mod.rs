//! Finite models of c.e. sets, their self-moduli, and monotone approximations
//! whose steps carry the oracle level they read.

mod approx;
mod ce;

use thiserror::Error;

pub use approx::{monotone_from_ce, phi_at_level, Cell, LevelPolicy, MonotoneApprox};
pub use ce::{dominates, modulus_decode, self_modulus, CeSetSpec, Domination, Modulus};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EffectiveError {
    #[error("invalid specification: {0}")]
    Invalid(String),
    #[error("g does not dominate the modulus at n = {n}: g(n) = {g} < f(n) = {f}")]
    NotDominating { n: u32, g: u32, f: u32 },
}
