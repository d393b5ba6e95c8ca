//! Thermodynamic order and efficiency metrics for contribution histograms.
//!
//! A [`Collection`] is a histogram of positive integer contribution values
//! (for example, edits per editor). On top of it the crate computes:
//!
//! - entropy `S`, entropy reduction `R = ln N - S`, average energy `E` and
//!   entropy efficiency `Q = S / E` ([`thermo`]);
//! - discrete power-law machinery with `v_min = 1`: the zeta partition
//!   function, exponent estimators, Kolmogorov-Smirnov classification and a
//!   seeded sampler ([`powerlaw`]);
//! - logarithmic class decomposition, a constrained maximum-entropy solver
//!   and theoretical curves ([`structure`]);
//! - an ingestion and reporting pipeline for `ts,editor,page` event logs
//!   ([`wiki`]).
//!
//! All logarithms are natural and the Boltzmann constant is fixed to 1, so
//! the temperature of a power law with exponent `alpha` is `1 / alpha`.

pub mod collection;
mod error;
pub mod powerlaw;
pub mod structure;
pub mod thermo;
pub mod wiki;

pub use collection::{Collection, Distribution, EnergyModel};
pub use error::{Error, Result};
pub use powerlaw::{FitMethod, PowerLawFit};
pub use structure::{ClassDecomposition, TheoryCurve};
pub use thermo::ThermoReport;
