//! Query-string parsing. Every field arrives as text so that bad values
//! surface as `ApiError` bodies rather than framework rejections.

use std::collections::BTreeSet;

use reekit_core::ingest::{ImportOptions, Unit};
use reekit_core::lambda::{FitConfig, WeightsPolicy, DEFAULT_DEGREE_COUNT, MAX_DEGREE_COUNT, MIN_DEGREE_COUNT};
use reekit_core::viz::{MarginalKind, VizKind, VizRequest};
use reekit_core::{builtin_reference, canonical_radii, Element, FitError, NonPositivePolicy, ReferenceStandard};
use serde::Deserialize;

use crate::error::ApiError;

fn invalid(name: &str, value: &str, expected: &str) -> ApiError {
    ApiError::bad_request("InvalidOption", format!("{name}='{value}': expected {expected}"))
}

fn parse_usize(name: &str, value: &str) -> Result<usize, ApiError> {
    value.trim().parse().map_err(|_| invalid(name, value, "a non-negative integer"))
}

pub fn standard(name: Option<&str>) -> Result<ReferenceStandard, ApiError> {
    Ok(builtin_reference(name.unwrap_or("chondrite"))?)
}

pub fn elements(name: &str, list: Option<&str>) -> Result<BTreeSet<Element>, ApiError> {
    match list {
        None => Ok(BTreeSet::new()),
        Some(s) if s.trim().is_empty() => Ok(BTreeSet::new()),
        Some(s) => Element::parse_list(s).map_err(|e| {
            let mut err = ApiError::from(e);
            err.message = format!("{name}: {}", err.message);
            err
        }),
    }
}

pub fn degree(value: Option<&str>) -> Result<usize, ApiError> {
    let degree = match value {
        None => DEFAULT_DEGREE_COUNT,
        Some(v) => parse_usize("degree", v)?,
    };
    check_degree(degree)?;
    Ok(degree)
}

pub fn check_degree(degree: usize) -> Result<(), ApiError> {
    if (MIN_DEGREE_COUNT..=MAX_DEGREE_COUNT).contains(&degree) {
        Ok(())
    } else {
        Err(FitError::DegreeOutOfRange { requested: degree }.into())
    }
}

#[derive(Debug, Default, Deserialize)]
pub struct FitQuery {
    pub standard: Option<String>,
    pub degree: Option<String>,
    pub exclude: Option<String>,
    pub weights: Option<String>,
    pub nonpositive: Option<String>,
}

impl FitQuery {
    pub fn config(&self) -> Result<FitConfig, ApiError> {
        let weights = match self.weights.as_deref() {
            None => WeightsPolicy::Uniform,
            Some(w) => w.parse().map_err(|_| invalid("weights", w, "uniform or inverse-variance"))?,
        };
        let nonpositive = match self.nonpositive.as_deref() {
            None => NonPositivePolicy::Reject,
            Some(p) => p
                .parse()
                .map_err(|_| invalid("nonpositive", p, "reject, drop-nonpositive or replace-half-detection-limit"))?,
        };
        Ok(FitConfig {
            standard: standard(self.standard.as_deref())?,
            radii: canonical_radii(),
            exclusions: elements("exclude", self.exclude.as_deref())?,
            degree_count: degree(self.degree.as_deref())?,
            weights,
            nonpositive,
        })
    }
}

#[derive(Debug, Default, Deserialize)]
pub struct UploadQuery {
    pub delimiter: Option<String>,
    pub unit: Option<String>,
    pub nonpositive: Option<String>,
    pub name: Option<String>,
}

impl UploadQuery {
    pub fn options(&self) -> Result<ImportOptions, ApiError> {
        let mut opts = ImportOptions::default();
        if let Some(d) = &self.delimiter {
            opts.delimiter = match d.as_str() {
                "," | "comma" => b',',
                ";" | "semicolon" => b';',
                "\t" | "tab" => b'\t',
                "|" | "pipe" => b'|',
                other => return Err(invalid("delimiter", other, "comma, semicolon, tab or pipe")),
            };
        }
        if let Some(u) = &self.unit {
            opts.unit = u.parse::<Unit>().map_err(|_| invalid("unit", u, "ppm or wt%"))?;
        }
        if let Some(p) = &self.nonpositive {
            opts.nonpositive = p
                .parse()
                .map_err(|_| invalid("nonpositive", p, "reject, drop-nonpositive or replace-half-detection-limit"))?;
        }
        if let Some(n) = &self.name {
            opts.source_name = n.clone();
        }
        Ok(opts)
    }
}

#[derive(Debug, Default, Deserialize)]
pub struct OutputQuery {
    #[serde(flatten)]
    pub fit: FitQuery,
    pub format: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl OutputQuery {
    pub fn format(&self) -> Result<Format, ApiError> {
        match self.format.as_deref().map(str::to_ascii_lowercase).as_deref() {
            None | Some("json") => Ok(Format::Json),
            Some("csv") => Ok(Format::Csv),
            Some(other) => Err(invalid("format", other, "json or csv")),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
pub struct VizQuery {
    #[serde(flatten)]
    pub fit: FitQuery,
    pub x: Option<String>,
    pub y: Option<String>,
    pub z: Option<String>,
    pub indices: Option<String>,
    pub color_by: Option<String>,
    pub group_by: Option<String>,
    pub marginal: Option<String>,
}

impl VizQuery {
    pub fn request(&self, kind: VizKind, degree_count: usize) -> Result<VizRequest, ApiError> {
        let indices = match &self.indices {
            Some(list) => list
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| parse_usize("indices", s))
                .collect::<Result<Vec<_>, _>>()?,
            None => {
                let mut idx = VizRequest::default_indices(kind, degree_count);
                for (slot, value, name) in [(0, &self.x, "x"), (1, &self.y, "y"), (2, &self.z, "z")] {
                    if let Some(v) = value {
                        let parsed = parse_usize(name, v)?;
                        if slot < idx.len() {
                            idx[slot] = parsed;
                        }
                    }
                }
                idx
            }
        };
        let marginal = match self.marginal.as_deref() {
            None => MarginalKind::Histogram,
            Some(m) => m.parse().map_err(|_| invalid("marginal", m, "histogram or rug"))?,
        };
        let color_by = self.color_by.clone().or_else(|| self.group_by.clone()).filter(|c| !c.is_empty());
        Ok(VizRequest { indices, color_by, marginal, ..Default::default() })
    }
}
