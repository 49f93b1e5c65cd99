use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::anomaly::{anomaly_factors_with, AnomalyReport};
use super::basis::{build_basis, OrthogonalBasis, DEFAULT_DEGREE_COUNT};
use super::fit::{fit_lambdas, LambdaSet};
use crate::domain::{builtin_reference, canonical_radii, Dataset, Element, RadiiTable, ReePattern, ReferenceStandard};
use crate::error::{ErrorCode, FitError};
use crate::normalize::{normalize_with, NonPositivePolicy, LOG_BASE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightsPolicy {
    #[default]
    Uniform,
    /// `w = (c / σ_c)²`, the inverse variance of `ln c` to first order.
    /// Elements without an uncertainty keep weight 1.
    InverseVariance,
}

impl FromStr for WeightsPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" => Ok(WeightsPolicy::Uniform),
            "inverse-variance" => Ok(WeightsPolicy::InverseVariance),
            other => Err(format!("unknown weights policy '{other}'")),
        }
    }
}

impl WeightsPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            WeightsPolicy::Uniform => "uniform",
            WeightsPolicy::InverseVariance => "inverse-variance",
        }
    }

    pub fn weights_for(self, pattern: &ReePattern) -> Option<BTreeMap<Element, f64>> {
        match self {
            WeightsPolicy::Uniform => None,
            WeightsPolicy::InverseVariance => {
                let sigma = pattern.uncertainties_ppm.as_ref()?;
                Some(
                    sigma
                        .iter()
                        .filter_map(|(e, s)| {
                            let c = pattern.get(*e)?;
                            (*s > 0.0 && c > 0.0).then(|| (*e, (c / s).powi(2)))
                        })
                        .collect(),
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub standard: ReferenceStandard,
    pub radii: RadiiTable,
    pub exclusions: BTreeSet<Element>,
    pub degree_count: usize,
    pub weights: WeightsPolicy,
    pub nonpositive: NonPositivePolicy,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            standard: builtin_reference("chondrite").expect("bundled"),
            radii: canonical_radii(),
            exclusions: BTreeSet::new(),
            degree_count: DEFAULT_DEGREE_COUNT,
            weights: WeightsPolicy::Uniform,
            nonpositive: NonPositivePolicy::Reject,
        }
    }
}

impl FitConfig {
    /// Stable text form of every setting that affects fit output.
    pub fn cache_key(&self) -> String {
        let excl: Vec<&str> = self.exclusions.iter().map(|e| e.symbol()).collect();
        let mut key = format!(
            "standard={};degree={};exclude={};weights={};nonpositive={};radii={}",
            self.standard.name,
            self.degree_count,
            excl.join(","),
            self.weights.as_str(),
            self.nonpositive.as_str(),
            self.radii.source_label,
        );
        for (e, v) in self.standard.iter() {
            let _ = write!(key, ";{e}={:x}", v.to_bits());
        }
        for (e, r) in self.radii.iter() {
            let _ = write!(key, ";r{e}={:x}", r.to_bits());
        }
        key
    }

    pub fn metadata(&self) -> FitMetadata {
        FitMetadata {
            standard: self.standard.name.clone(),
            standard_citation: self.standard.citation.clone(),
            radii_source: self.radii.source_label.clone(),
            degree_count: self.degree_count,
            exclusions: self.exclusions.iter().copied().collect(),
            weights: self.weights.as_str().to_string(),
            nonpositive_policy: self.nonpositive.as_str().to_string(),
            log_base: LOG_BASE.to_string(),
        }
    }
}

/// Settings echoed next to every fit result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitMetadata {
    pub standard: String,
    pub standard_citation: String,
    pub radii_source: String,
    pub degree_count: usize,
    pub exclusions: Vec<Element>,
    pub weights: String,
    pub nonpositive_policy: String,
    pub log_base: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleError {
    pub sample_id: String,
    pub code: String,
    pub message: String,
}

impl SampleError {
    fn new(sample_id: &str, err: &FitError) -> Self {
        Self { sample_id: sample_id.to_string(), code: err.code().to_string(), message: err.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetFit {
    pub lambdas: Vec<LambdaSet>,
    /// One per entry of `lambdas`, same order. Factors are empty when the
    /// anomaly fit was not possible.
    pub anomalies: Vec<AnomalyReport>,
    pub errors: Vec<SampleError>,
}

impl DatasetFit {
    pub fn get(&self, sample_id: &str) -> Option<(&LambdaSet, &AnomalyReport)> {
        let idx = self.lambdas.iter().position(|l| l.sample_id == sample_id)?;
        Some((&self.lambdas[idx], &self.anomalies[idx]))
    }
}

/// Fits one pattern under `config` with a prebuilt basis.
pub fn fit_pattern(
    pattern: &ReePattern,
    config: &FitConfig,
    basis: &OrthogonalBasis,
) -> Result<(LambdaSet, AnomalyReport), FitError> {
    let weights = config.weights.weights_for(pattern);
    let np = normalize_with(
        pattern,
        &config.standard,
        &config.radii,
        &config.exclusions,
        config.nonpositive,
        crate::domain::MIN_PATTERN_ELEMENTS,
    )?;
    let fit = fit_lambdas(&np, basis, weights.as_ref())?;
    let anomaly = anomaly_factors_with(
        pattern,
        &config.standard,
        &config.radii,
        basis,
        &config.exclusions,
        config.nonpositive,
        weights.as_ref(),
    )
    .unwrap_or_else(|_| AnomalyReport {
        sample_id: pattern.sample_id.clone(),
        factors: BTreeMap::new(),
        basis_id: basis.id().to_string(),
    });
    Ok((fit, anomaly))
}

/// Fits every pattern. A bad row becomes a [`SampleError`]; only an empty
/// dataset or an invalid configuration fails the whole call. Patterns are
/// fitted in parallel and results keep input order.
pub fn fit_dataset(ds: &Dataset, config: &FitConfig) -> Result<DatasetFit, FitError> {
    if ds.is_empty() {
        return Err(FitError::EmptyDataset);
    }
    let basis = build_basis(&config.radii, config.degree_count)?;
    let results: Vec<Result<(LambdaSet, AnomalyReport), SampleError>> = ds
        .patterns
        .par_iter()
        .map(|p| fit_pattern(p, config, &basis).map_err(|e| SampleError::new(&p.sample_id, &e)))
        .collect();

    let mut out = DatasetFit { lambdas: Vec::new(), anomalies: Vec::new(), errors: Vec::new() };
    for r in results {
        match r {
            Ok((l, a)) => {
                out.lambdas.push(l);
                out.anomalies.push(a);
            }
            Err(e) => out.errors.push(e),
        }
    }
    Ok(out)
}

/// Header of the lambda CSV for a given number of coefficients.
pub fn lambda_csv_header(degree_count: usize) -> String {
    let mut cols = vec!["sample".to_string()];
    cols.extend((0..degree_count).map(|j| format!("lambda{j}")));
    cols.extend(["rms_misfit", "ce_anomaly", "eu_anomaly", "excluded"].map(String::from));
    cols.join(",")
}

/// Renders fitted rows as CSV with columns
/// `sample,lambda0..lambdaK,rms_misfit,ce_anomaly,eu_anomaly,excluded`.
///
/// Numbers use Rust's shortest round-trip formatting; missing anomaly
/// factors are empty cells; `excluded` joins element symbols with `;`.
pub fn write_lambda_csv(fit: &DatasetFit, degree_count: usize) -> String {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    writer.write_record(lambda_csv_header(degree_count).split(',')).expect("in-memory write");
    for (l, a) in fit.lambdas.iter().zip(&fit.anomalies) {
        let mut row = vec![l.sample_id.clone()];
        row.extend(l.lambdas.iter().map(|v| v.to_string()));
        row.push(l.rms_misfit.to_string());
        for e in [Element::Ce, Element::Eu] {
            row.push(a.factor(e).map(|v| v.to_string()).unwrap_or_default());
        }
        let excl: Vec<&str> = l.excluded.iter().map(|e| e.symbol()).collect();
        row.push(excl.join(";"));
        writer.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("flush")).expect("utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Provenance;

    fn flat(id: &str, level: f64) -> ReePattern {
        let ch = builtin_reference("chondrite").unwrap();
        let conc = Element::CANONICAL.iter().map(|&e| (e, ch.value(e) * level)).collect();
        ReePattern::new(id, conc).unwrap()
    }

    fn dataset(patterns: Vec<ReePattern>) -> Dataset {
        Dataset::new("d", patterns, Provenance { source_name: "t".into(), imported_at: None }).unwrap()
    }

    #[test]
    fn three_valid_patterns() {
        let ds = dataset(vec![flat("a", 1.0), flat("b", 10.0), flat("c", 100.0)]);
        let fit = fit_dataset(&ds, &FitConfig::default()).unwrap();
        assert_eq!(fit.lambdas.len(), 3);
        assert_eq!(fit.anomalies.len(), 3);
        assert!(fit.errors.is_empty());
        assert!((fit.lambdas[1].lambdas[0] - 10f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn zero_concentration_is_a_per_sample_error() {
        let mut bad = flat("b", 2.0);
        bad.concentrations_ppm.insert(Element::Gd, 0.0);
        let ds = dataset(vec![flat("a", 1.0), bad, flat("c", 3.0)]);
        let fit = fit_dataset(&ds, &FitConfig::default()).unwrap();
        assert_eq!(fit.lambdas.len(), 2);
        assert_eq!(fit.errors.len(), 1);
        assert_eq!(fit.errors[0].sample_id, "b");
        assert_eq!(fit.errors[0].code, "NonPositiveConcentration");
    }

    #[test]
    fn empty_dataset() {
        let ds = dataset(vec![]);
        assert_eq!(fit_dataset(&ds, &FitConfig::default()), Err(FitError::EmptyDataset));
    }

    #[test]
    fn csv_contract() {
        let ds = dataset(vec![flat("a", 1.0)]);
        let config = FitConfig { exclusions: [Element::Ce, Element::Eu].into(), ..FitConfig::default() };
        let fit = fit_dataset(&ds, &config).unwrap();
        let csv = write_lambda_csv(&fit, 4);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "sample,lambda0,lambda1,lambda2,lambda3,rms_misfit,ce_anomaly,eu_anomaly,excluded"
        );
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[0], "a");
        assert_eq!(row[6], "1");
        assert_eq!(row[8], "Ce;Eu");
        assert_eq!(lambda_csv_header(5).split(',').nth(5), Some("lambda4"));
    }

    #[test]
    fn inverse_variance_weights() {
        let mut p = flat("a", 2.0);
        p.uncertainties_ppm = Some([(Element::La, p.get(Element::La).unwrap() * 0.1)].into());
        let w = WeightsPolicy::InverseVariance.weights_for(&p).unwrap();
        assert!((w[&Element::La] - 100.0).abs() < 1e-9);
        assert!(WeightsPolicy::Uniform.weights_for(&p).is_none());
    }

    #[test]
    fn cache_key_tracks_settings() {
        let a = FitConfig::default();
        let b = FitConfig { degree_count: 5, ..FitConfig::default() };
        let c = FitConfig { standard: builtin_reference("MORB").unwrap(), ..FitConfig::default() };
        assert_ne!(a.cache_key(), b.cache_key());
        assert_ne!(a.cache_key(), c.cache_key());
        assert_eq!(a.cache_key(), FitConfig::default().cache_key());
    }
}
