//! Friction and diffusion coefficients, their kernels and asymptotic limits.

pub mod asymptotics;
pub mod bath_integral;
pub mod coefficients;
pub mod kernels;
pub mod roots;

pub use asymptotics::{
    asymptotic_bath_integral, asymptotic_occupation, markovian_asymptote,
    stationarity_condition_residual, stationarity_residual_from,
};
pub use bath_integral::{bath_integral, bath_integral_quadrature, BathIntegral, IntegralOptions};
pub use coefficients::{
    coefficients, mixed_coefficients, same_statistics_coefficients, CoefficientContext,
    CoefficientPoint, CoefficientSeries, KernelConfig, MixedComponents, TimeGrid,
};
pub use kernels::{
    amplitudes_ab, kernel_state, propagators_mn, Amplitudes, KernelState, Propagators,
};
pub use roots::{characteristic_roots, quartic_coefficients, RootSet};
