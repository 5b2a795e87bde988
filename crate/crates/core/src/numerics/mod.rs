//! Numerical building blocks: quadrature, special functions, polynomial roots
//! and interpolation.

pub mod expint;
pub mod interp;
pub mod poly;
pub mod quadrature;
