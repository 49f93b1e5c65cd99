//! Log-normalisation of concentrations against a reference standard.
//!
//! The fit space is the natural logarithm: `y = ln(c / c_ref)`. Output
//! metadata carries [`LOG_BASE`] so downstream consumers know which base the
//! lambda coefficients are expressed in.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::domain::{Element, RadiiTable, ReePattern, ReferenceStandard, MIN_PATTERN_ELEMENTS};
use crate::error::NormalizeError;

/// Base of the logarithm used for normalised values and lambdas.
pub const LOG_BASE: &str = "e";

/// What to do with zero, negative or below-detection values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NonPositivePolicy {
    /// Fail with a named error.
    #[default]
    Reject,
    /// Treat the value as absent.
    DropNonpositive,
    /// At ingestion, `<DL` cells become `DL / 2`. Once a pattern exists no
    /// detection limit is known, so normalisation treats it like
    /// `DropNonpositive`.
    ReplaceHalfDetectionLimit,
}

impl NonPositivePolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            NonPositivePolicy::Reject => "reject",
            NonPositivePolicy::DropNonpositive => "drop-nonpositive",
            NonPositivePolicy::ReplaceHalfDetectionLimit => "replace-half-detection-limit",
        }
    }
}

impl fmt::Display for NonPositivePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NonPositivePolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "reject" => Ok(NonPositivePolicy::Reject),
            "drop-nonpositive" | "drop" => Ok(NonPositivePolicy::DropNonpositive),
            "replace-half-detection-limit" | "half-dl" => Ok(NonPositivePolicy::ReplaceHalfDetectionLimit),
            other => Err(format!("unknown non-positive policy '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedPoint {
    pub element: Element,
    pub radius_pm: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedPattern {
    pub sample_id: String,
    /// Included points in canonical order (decreasing radius).
    pub points: Vec<NormalizedPoint>,
    /// Canonical elements left out of the fit: excluded, absent or dropped.
    pub mask: BTreeSet<Element>,
    pub reference_name: String,
}

impl NormalizedPattern {
    pub fn y(&self, element: Element) -> Option<f64> {
        self.points.iter().find(|p| p.element == element).map(|p| p.y)
    }

    pub fn y_map(&self) -> BTreeMap<Element, f64> {
        self.points.iter().map(|p| (p.element, p.y)).collect()
    }

    pub fn elements(&self) -> impl Iterator<Item = Element> + '_ {
        self.points.iter().map(|p| p.element)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Normalises with the default `Reject` policy.
pub fn normalize(
    pattern: &ReePattern,
    standard: &ReferenceStandard,
    radii: &RadiiTable,
    exclusions: &BTreeSet<Element>,
) -> Result<NormalizedPattern, NormalizeError> {
    normalize_with(pattern, standard, radii, exclusions, NonPositivePolicy::Reject, MIN_PATTERN_ELEMENTS)
}

/// Normalises a pattern, requiring at least `min_points` usable elements.
pub fn normalize_with(
    pattern: &ReePattern,
    standard: &ReferenceStandard,
    radii: &RadiiTable,
    exclusions: &BTreeSet<Element>,
    policy: NonPositivePolicy,
    min_points: usize,
) -> Result<NormalizedPattern, NormalizeError> {
    let mut points = Vec::with_capacity(Element::CANONICAL.len());
    let mut mask = BTreeSet::new();
    for element in Element::CANONICAL {
        if exclusions.contains(&element) {
            mask.insert(element);
            continue;
        }
        let Some(c) = pattern.get(element) else {
            mask.insert(element);
            continue;
        };
        if !(c > 0.0 && c.is_finite()) {
            match policy {
                NonPositivePolicy::Reject => {
                    return Err(NormalizeError::NonPositiveConcentration {
                        sample_id: pattern.sample_id.clone(),
                        element,
                        value: c,
                    })
                }
                NonPositivePolicy::DropNonpositive | NonPositivePolicy::ReplaceHalfDetectionLimit => {
                    mask.insert(element);
                    continue;
                }
            }
        }
        points.push(NormalizedPoint {
            element,
            radius_pm: radii.radius(element),
            y: (c / standard.value(element)).ln(),
        });
    }
    if points.len() < min_points {
        return Err(NormalizeError::TooFewElements {
            sample_id: pattern.sample_id.clone(),
            usable: points.len(),
            required: min_points,
        });
    }
    Ok(NormalizedPattern { sample_id: pattern.sample_id.clone(), points, mask, reference_name: standard.name.clone() })
}

/// Inverse of the log-normalisation: `c = c_ref · exp(y)`.
///
/// Elements the standard does not cover are skipped.
pub fn denormalize(y_values: &BTreeMap<Element, f64>, standard: &ReferenceStandard) -> BTreeMap<Element, f64> {
    y_values.iter().filter_map(|(&e, &y)| standard.get(e).map(|ch| (e, ch * y.exp()))).collect()
}
