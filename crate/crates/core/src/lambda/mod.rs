//! Orthogonal-polynomial parameterisation of normalised REE patterns.
//!
//! A pattern `y(r) = ln(c / c_ref)` sampled at the lanthanide ionic radii is
//! written as `Σ_j λ_j f_j(r)`, where the `f_j` are fixed monic polynomials
//! orthogonal over the fourteen canonical radii. `λ0` is the mean level,
//! `λ1` the slope, `λ2` the curvature and `λ3` the cubic (sinusoidal)
//! component.
//!
//! Finer shape descriptors such as tetrad coefficients are not computed.
//! They would slot in as another consumer of [`fit::LambdaSet::residuals`],
//! which carries the per-element misfit left after the polynomial fit.

pub mod anomaly;
pub mod basis;
pub mod batch;
pub mod fit;

pub use anomaly::{anomaly_factors, anomaly_factors_with, AnomalyReport, ANOMALY_ELEMENTS};
pub use basis::{build_basis, OrthogonalBasis, DEFAULT_DEGREE_COUNT, MAX_DEGREE_COUNT, MIN_DEGREE_COUNT};
pub use batch::{
    fit_dataset, fit_pattern, lambda_csv_header, write_lambda_csv, DatasetFit, FitConfig, FitMetadata, SampleError,
    WeightsPolicy,
};
pub use fit::{fit_lambdas, reconstruct, weighted_squared_residual, LambdaSet, ReconstructedPoint, RANK_TOLERANCE};
