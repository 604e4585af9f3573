//! Schwartz–Bruhat functions on Q_p: level functions, the ξ basis, translations,
//! and the passage to O^x-invariant functions on Q_p^x.

pub mod exact;
mod level;
mod mult;
mod padic;

pub use exact::{CyclotomicField, ExactLevelFunction, ExactMultSeq, ExactScalar, EXACT_CAPACITY};
pub use level::{LevelFunction, MAX_LEVEL_SIZE};
pub use mult::MultSeq;
pub use padic::QpElem;

use crate::error::Result;

/// `ξ_j = 1_{p^j Z_p}`.
pub fn xi_basis(p: u64, j: i32) -> Result<LevelFunction> {
    LevelFunction::xi(p, j)
}

/// `λ_a f(x) = f(a^-1 x)`.
pub fn translate(f: &LevelFunction, a: &QpElem) -> Result<LevelFunction> {
    f.translate(a)
}

pub fn to_multiplicative(f: &LevelFunction) -> Result<MultSeq> {
    f.to_multiplicative()
}

pub fn restrict_to_units_part(f: &LevelFunction) -> Result<MultSeq> {
    f.restrict_to_units_part()
}
