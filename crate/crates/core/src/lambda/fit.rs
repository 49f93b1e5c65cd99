use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::basis::OrthogonalBasis;
use crate::domain::{Element, ReferenceStandard};
use crate::error::FitError;
use crate::normalize::{denormalize, NormalizedPattern};

/// Smallest-to-largest singular value ratio below which a design matrix is
/// treated as rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Fitted coefficients for one sample, in natural-log units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaSet {
    pub sample_id: String,
    pub lambdas: Vec<f64>,
    /// `y_observed - y_fitted` for every included element.
    pub residuals: BTreeMap<Element, f64>,
    /// Weighted root-mean-square residual.
    pub rms_misfit: f64,
    /// Canonical elements not used in the fit (excluded or absent).
    pub excluded: BTreeSet<Element>,
    pub basis_id: String,
}

impl LambdaSet {
    pub fn degree_count(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambda(&self, index: usize) -> Option<f64> {
        self.lambdas.get(index).copied()
    }
}

/// Weighted least-squares fit of the basis to a normalised pattern.
///
/// Minimises `Σ w_i (y_i - Σ_j λ_j f_j(r_i))²` with an SVD of the
/// row-scaled design matrix `√w_i · f_j(r_i)`. Elements not named in
/// `weights` get weight 1.
pub fn fit_lambdas(
    np: &NormalizedPattern,
    basis: &OrthogonalBasis,
    weights: Option<&BTreeMap<Element, f64>>,
) -> Result<LambdaSet, FitError> {
    let k = basis.degree_count();
    let n = np.points.len();
    if n < k + 1 {
        return Err(FitError::TooFewPoints { sample_id: np.sample_id.clone(), usable: n, required: k + 1 });
    }

    let mut w = Vec::with_capacity(n);
    for p in &np.points {
        let wi = weights.and_then(|m| m.get(&p.element).copied()).unwrap_or(1.0);
        if !(wi > 0.0 && wi.is_finite()) {
            return Err(FitError::InvalidWeight { element: p.element, value: wi });
        }
        w.push(wi);
    }

    let rows: Vec<Vec<f64>> = np.points.iter().map(|p| basis.evaluate_all(p.radius_pm)).collect();
    let design = DMatrix::from_fn(n, k, |i, j| w[i].sqrt() * rows[i][j]);
    let rhs = DVector::from_iterator(n, np.points.iter().zip(&w).map(|(p, wi)| wi.sqrt() * p.y));

    let svd = design.svd(true, true);
    let s_max = svd.singular_values.max();
    let s_min = svd.singular_values.min();
    let ratio = if s_max > 0.0 { s_min / s_max } else { 0.0 };
    if ratio < RANK_TOLERANCE {
        return Err(FitError::RankDeficient { sample_id: np.sample_id.clone(), ratio });
    }
    let solution =
        svd.solve(&rhs, 0.0).map_err(|_| FitError::RankDeficient { sample_id: np.sample_id.clone(), ratio })?;
    let lambdas: Vec<f64> = solution.iter().copied().collect();

    let mut residuals = BTreeMap::new();
    let mut weighted_sq = 0.0;
    let mut weight_sum = 0.0;
    for ((p, row), wi) in np.points.iter().zip(&rows).zip(&w) {
        let fitted: f64 = row.iter().zip(&lambdas).map(|(f, l)| f * l).sum();
        let r = p.y - fitted;
        residuals.insert(p.element, r);
        weighted_sq += wi * r * r;
        weight_sum += wi;
    }

    Ok(LambdaSet {
        sample_id: np.sample_id.clone(),
        lambdas,
        residuals,
        rms_misfit: (weighted_sq / weight_sum).sqrt(),
        excluded: np.mask.clone(),
        basis_id: basis.id().to_string(),
    })
}

/// Weighted sum of squared residuals for arbitrary coefficients.
pub fn weighted_squared_residual(
    np: &NormalizedPattern,
    basis: &OrthogonalBasis,
    lambdas: &[f64],
    weights: Option<&BTreeMap<Element, f64>>,
) -> f64 {
    np.points
        .iter()
        .map(|p| {
            let w = weights.and_then(|m| m.get(&p.element).copied()).unwrap_or(1.0);
            let r = p.y - basis.combine(lambdas, p.radius_pm);
            w * r * r
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconstructedPoint {
    pub radius_pm: f64,
    pub y: f64,
    pub concentration_ppm: f64,
}

/// Forward model: normalised values and concentrations implied by `lambdas`
/// at the requested canonical elements. Y and Sc are skipped.
pub fn reconstruct(
    lambdas: &[f64],
    basis: &OrthogonalBasis,
    elements: &BTreeSet<Element>,
    standard: &ReferenceStandard,
) -> Result<BTreeMap<Element, ReconstructedPoint>, FitError> {
    if lambdas.len() != basis.degree_count() {
        return Err(FitError::LengthMismatch { expected: basis.degree_count(), got: lambdas.len() });
    }
    let y: BTreeMap<Element, f64> = elements
        .iter()
        .filter(|e| e.is_canonical())
        .map(|&e| (e, basis.combine(lambdas, basis.radii().radius(e))))
        .collect();
    let conc = denormalize(&y, standard);
    Ok(y.into_iter()
        .map(|(e, yv)| {
            let point = ReconstructedPoint { radius_pm: basis.radii().radius(e), y: yv, concentration_ppm: conc[&e] };
            (e, point)
        })
        .collect())
}
