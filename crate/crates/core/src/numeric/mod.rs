//! Numeric workhorses: adaptive quadrature, root finding and maximization,
//! and tabulated inverse-CDF sampling.

pub mod interp;
pub mod optimize;
pub mod quad;
