use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::basis::OrthogonalBasis;
use super::fit::{fit_lambdas, reconstruct};
use crate::domain::{Element, RadiiTable, ReePattern, ReferenceStandard};
use crate::error::FitError;
use crate::normalize::{normalize_with, NonPositivePolicy};

/// Elements checked for redox anomalies.
pub const ANOMALY_ELEMENTS: [Element; 2] = [Element::Ce, Element::Eu];

/// Measured over predicted concentration for Ce and Eu.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalyReport {
    pub sample_id: String,
    pub factors: BTreeMap<Element, f64>,
    pub basis_id: String,
}

impl AnomalyReport {
    pub fn factor(&self, element: Element) -> Option<f64> {
        self.factors.get(&element).copied()
    }
}

/// `A_e = c_e / c*_e` for each of Ce and Eu carried with a positive value.
///
/// `c*_e` comes from a fit that leaves out both Ce and Eu, so an anomaly in
/// one of them cannot bend the prediction for the other.
pub fn anomaly_factors(
    pattern: &ReePattern,
    standard: &ReferenceStandard,
    radii: &RadiiTable,
    basis: &OrthogonalBasis,
) -> Result<AnomalyReport, FitError> {
    anomaly_factors_with(pattern, standard, radii, basis, &BTreeSet::new(), NonPositivePolicy::Reject, None)
}

pub fn anomaly_factors_with(
    pattern: &ReePattern,
    standard: &ReferenceStandard,
    radii: &RadiiTable,
    basis: &OrthogonalBasis,
    extra_exclusions: &BTreeSet<Element>,
    policy: NonPositivePolicy,
    weights: Option<&BTreeMap<Element, f64>>,
) -> Result<AnomalyReport, FitError> {
    let targets: Vec<(Element, f64)> = ANOMALY_ELEMENTS
        .iter()
        .filter_map(|&e| pattern.get(e).filter(|c| *c > 0.0 && c.is_finite()).map(|c| (e, c)))
        .collect();
    if targets.is_empty() {
        return Ok(AnomalyReport {
            sample_id: pattern.sample_id.clone(),
            factors: BTreeMap::new(),
            basis_id: basis.id().to_string(),
        });
    }

    let mut exclusions = extra_exclusions.clone();
    exclusions.extend(ANOMALY_ELEMENTS);
    let required = basis.degree_count() + 1;
    let np = normalize_with(pattern, standard, radii, &exclusions, policy, 0)?;
    if np.len() < required {
        return Err(FitError::TooFewPoints { sample_id: pattern.sample_id.clone(), usable: np.len(), required });
    }
    let fit = fit_lambdas(&np, basis, weights)?;
    let wanted: BTreeSet<Element> = targets.iter().map(|(e, _)| *e).collect();
    let predicted = reconstruct(&fit.lambdas, basis, &wanted, standard)?;
    let factors = targets.into_iter().map(|(e, c)| (e, c / predicted[&e].concentration_ppm)).collect();
    Ok(AnomalyReport { sample_id: pattern.sample_id.clone(), factors, basis_id: fit.basis_id })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{builtin_reference, canonical_radii};
    use crate::lambda::basis::build_basis;

    fn smooth(lambdas: &[f64], skip: &[Element]) -> (ReePattern, OrthogonalBasis, ReferenceStandard) {
        let ch = builtin_reference("chondrite").unwrap();
        let basis = build_basis(&canonical_radii(), lambdas.len()).unwrap();
        let wanted: BTreeSet<Element> = Element::CANONICAL.iter().filter(|e| !skip.contains(e)).copied().collect();
        let rec = reconstruct(lambdas, &basis, &wanted, &ch).unwrap();
        let conc = rec.iter().map(|(e, p)| (*e, p.concentration_ppm)).collect();
        (ReePattern::new("syn", conc).unwrap(), basis, ch)
    }

    #[test]
    fn smooth_pattern_has_unit_factors() {
        let (p, basis, ch) = smooth(&[3.0, -0.05, 0.002, 0.0001], &[]);
        let rep = anomaly_factors(&p, &ch, &canonical_radii(), &basis).unwrap();
        assert!((rep.factor(Element::Ce).unwrap() - 1.0).abs() < 1e-9);
        assert!((rep.factor(Element::Eu).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn halved_europium() {
        let (mut p, basis, ch) = smooth(&[3.0, -0.05, 0.002, 0.0001], &[]);
        *p.concentrations_ppm.get_mut(&Element::Eu).unwrap() *= 0.5;
        let rep = anomaly_factors(&p, &ch, &canonical_radii(), &basis).unwrap();
        assert!((rep.factor(Element::Eu).unwrap() - 0.5).abs() < 1e-6);
        assert!((rep.factor(Element::Ce).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn missing_europium_reports_only_cerium() {
        let (p, basis, ch) = smooth(&[1.0, 0.01, 0.0, 0.0], &[Element::Eu]);
        let rep = anomaly_factors(&p, &ch, &canonical_radii(), &basis).unwrap();
        assert_eq!(rep.factors.keys().copied().collect::<Vec<_>>(), vec![Element::Ce]);
    }

    #[test]
    fn too_few_remaining_points() {
        let keep = [Element::La, Element::Ce, Element::Pr, Element::Nd, Element::Eu, Element::Sm];
        let skip: Vec<Element> = Element::CANONICAL.iter().filter(|e| !keep.contains(e)).copied().collect();
        let (p, basis, ch) = smooth(&[1.0, 0.01, 0.0, 0.0], &skip);
        let err = anomaly_factors(&p, &ch, &canonical_radii(), &basis).unwrap_err();
        assert!(matches!(err, FitError::TooFewPoints { usable: 4, required: 5, .. }));
    }
}
