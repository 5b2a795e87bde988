//! Exact moment evolution of an oscillator coupled to discretized bosonic
//! baths, used to validate the master-equation kernels.

pub mod bath;
pub mod compare;
pub mod exact;

pub use bath::{sample_bath, DiscretizedBath};
pub use compare::{compare, compare_series, ComparisonReport};
pub use exact::{evolve_exact, CouplingForm, ExactOptions, ExactSeries, Generator, MomentState};
