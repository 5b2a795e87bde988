//! Master-equation integration and observables.

pub mod observables;
pub mod trajectory;

pub use crate::transport::asymptotic_occupation;
pub use observables::{
    antiphase_metric, delta_dissipation, detect_stationarity, dissipation_energy, estimate_period,
    sample_at_local_maxima, stationarity_of, DeltaDissipation, ObservableReport, PeriodEstimate,
    Stationarity,
};
pub use trajectory::{
    evolve_coupled, evolve_single, evolve_single_second_order, CoupledInit, Trajectory,
};
