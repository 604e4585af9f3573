//! Numerical and exact checks of the local and global trace formulas over Q.
//!
//! The crate is organised bottom-up: Haar measures ([`measures`]), test
//! functions at finite places ([`bruhat`]) and at the real place ([`arch`]),
//! local Fourier transforms and the equivariant transform ([`fourier`]), local
//! Weil distributions ([`weil`]), Euler products and zeta ([`spectral`]),
//! discretised operator traces ([`trace`]) and global checks ([`global`]).

pub mod arch;
pub mod bruhat;
pub mod error;
pub mod fourier;
pub mod global;
pub mod measures;
pub mod quad;
mod rs_coeffs;
pub mod special;
pub mod spectral;
pub mod trace;
pub mod weil;
pub mod zeta;

pub use arch::{HermiteGaussian, LogProfile};
pub use bruhat::{ExactLevelFunction, ExactMultSeq, LevelFunction, MultSeq, QpElem};
pub use error::{Error, ErrorClass, Result};
pub use fourier::GammaFactor;
pub use global::{ExplicitFormulaReport, PrimeTable, ZeroTable};
pub use measures::{MeasureCtx, Place, PlaceKind};
pub use trace::{CutoffPhi, UGrid, UGridOperator};
pub use num_complex::Complex64;
pub use weil::PvContext;
