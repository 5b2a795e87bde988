//! Occupation-number dynamics of quantum oscillators linearly and fully
//! coupled to pairs of fermionic and/or bosonic heat baths.
//!
//! * [`model`] holds the parameter vocabulary.
//! * [`transport`] computes the time-dependent friction and diffusion
//!   coefficients and their asymptotic limits.
//! * [`dynamics`] integrates the occupation-number master equations and
//!   extracts observables.
//! * [`oracle`] evolves the exact moment equations of the oscillator plus a
//!   discretized bosonic bath for validation.

// `!(x > 0.0)` style guards reject NaN together with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod model;
pub mod numerics;
pub mod oracle;
pub mod transport;

pub use error::{Error, Result};
pub use model::{
    bare_frequency, equilibrium_occupation, mixing_fraction, spectral_density, BathSpec,
    CoupledSpec, OscillatorSpec, Statistics, StatisticsMode, SystemSpec,
};
