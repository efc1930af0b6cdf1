//! Simulation of finite-resolution polarization measurements on single
//! photons and entangled photon pairs.
//!
//! A projective polarization measurement reads a Stokes component as exactly
//! ±1. This crate models the realistic counterpart: a measurement that
//! returns a continuous value s, Gaussian-blurred around the eigenvalues
//! with resolution δs, followed by a precise reading of a complementary
//! component. The exact joint statistics of such sequences decompose into
//! finitely many shifted Gaussians whose weights can be negative — a signed
//! quasi-probability structure that no classical noise model reproduces —
//! and, for entangled pairs, sustain a Bell-type combination above the local
//! bound 2 once the resolution is coarse enough.
//!
//! Module map:
//! - [`operator`]: complex states, Stokes operators, the Gaussian
//!   measurement operator, and the measurement postulate.
//! - [`mixture`]: signed Gaussian mixtures with exact densities, CDFs, and
//!   bin masses.
//! - [`table`]: finite signed tables over the discrete outcome grid.
//! - [`single`]: the one-photon sequence, its decompositions, and the
//!   anomalous squared-value/sign correlation.
//! - [`pair`]: the entangled-pair sequence, Bell combination, threshold
//!   resolution, and density-matrix decomposition.
//! - [`monte_carlo`]: reproducible chunked sampling and estimators.
//! - [`numeric`]: quadrature, root finding, maximization, and monotone
//!   inverse-CDF interpolation used by the physics layers.

pub mod error;
pub mod mixture;
pub mod monte_carlo;
pub mod numeric;
pub mod operator;
pub mod pair;
pub mod single;
pub mod table;

pub use error::{Error, Result};
pub use mixture::{GaussianComponent, SignedGaussianMixture};
pub use monte_carlo::{
    chi_square_survival, estimate_correlation_s1sq_s2, estimate_k, format_float17,
    records_to_csv, sample_pair, sample_single, EstimatorResult, SampleRecord,
};
pub use operator::{
    apply_measurement, apply_to_photon_a, apply_to_photon_b, measurement_operator,
    sandwich_product, stokes_operator, tensor_op, tensor_state, ComplexScalar, HermitianOp2,
    MeasurementKernel, Op4, PairKet, PolarizationKet,
};
pub use pair::{
    bell_point_value, bell_state, density_matrix_decomposition,
    density_matrix_decomposition_eigenvalues, density_matrix_decomposition_residual,
    gaussian_decomposition_pair, joint_density_pair, joint_density_pair_matrix, k_distribution,
    k_expectation, k_expectation_closed_form, k_threshold, k_threshold_closed_form,
    peak_locations, quasi_table_pair, verify_eigenstate_relations, BellCombination, KSource,
    PairDecomposition, Peak, PeakReport,
};
pub use single::{
    correlation_s1sq_s2, correlation_s1sq_s2_operator, discrete_quasi_table,
    gaussian_decomposition, joint_density, joint_density_closed_form, minus_channel_peak,
    pom_state, reference_state, s2_eigenstate, CorrelationSource, SingleDecomposition,
};
pub use table::{QuasiProbabilityTable, TableEntry};
