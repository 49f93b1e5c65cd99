//! Element set, ionic radii, reference standards and the pattern/dataset types
//! shared by every other module.
//!
//! Radii and reference standards ship as CSV files under `data/` with columns
//! `element,value,unit,citation`. They are compiled in with `include_str!` but
//! any file with the same layout can be loaded at runtime instead.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::DomainError;

/// Minimum number of canonical elements a pattern must carry.
pub const MIN_PATTERN_ELEMENTS: usize = 5;

/// Rare earth elements known to the toolkit. Pm is deliberately absent.
///
/// The derived `Ord` follows declaration order, so the fourteen lanthanides
/// sort by decreasing ionic radius (La first, Lu last) and Y, Sc trail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Element {
    La,
    Ce,
    Pr,
    Nd,
    Sm,
    Eu,
    Gd,
    Tb,
    Dy,
    Ho,
    Er,
    Tm,
    Yb,
    Lu,
    Y,
    Sc,
}

impl Element {
    /// The fourteen lanthanides used for fitting, in canonical order.
    pub const CANONICAL: [Element; 14] = [
        Element::La,
        Element::Ce,
        Element::Pr,
        Element::Nd,
        Element::Sm,
        Element::Eu,
        Element::Gd,
        Element::Tb,
        Element::Dy,
        Element::Ho,
        Element::Er,
        Element::Tm,
        Element::Yb,
        Element::Lu,
    ];

    /// Accepted on ingest, never fitted.
    pub const EXTENDED: [Element; 2] = [Element::Y, Element::Sc];

    pub const ALL: [Element; 16] = [
        Element::La,
        Element::Ce,
        Element::Pr,
        Element::Nd,
        Element::Sm,
        Element::Eu,
        Element::Gd,
        Element::Tb,
        Element::Dy,
        Element::Ho,
        Element::Er,
        Element::Tm,
        Element::Yb,
        Element::Lu,
        Element::Y,
        Element::Sc,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Element::La => "La",
            Element::Ce => "Ce",
            Element::Pr => "Pr",
            Element::Nd => "Nd",
            Element::Sm => "Sm",
            Element::Eu => "Eu",
            Element::Gd => "Gd",
            Element::Tb => "Tb",
            Element::Dy => "Dy",
            Element::Ho => "Ho",
            Element::Er => "Er",
            Element::Tm => "Tm",
            Element::Yb => "Yb",
            Element::Lu => "Lu",
            Element::Y => "Y",
            Element::Sc => "Sc",
        }
    }

    pub fn is_canonical(self) -> bool {
        self.canonical_index().is_some()
    }

    /// Position in [`Element::CANONICAL`], `None` for Y and Sc.
    pub fn canonical_index(self) -> Option<usize> {
        Element::CANONICAL.iter().position(|&e| e == self)
    }

    /// Standard atomic weight (IUPAC 2021 abridged values), g/mol.
    pub fn atomic_mass(self) -> f64 {
        match self {
            Element::La => 138.905_47,
            Element::Ce => 140.116,
            Element::Pr => 140.907_66,
            Element::Nd => 144.242,
            Element::Sm => 150.36,
            Element::Eu => 151.964,
            Element::Gd => 157.25,
            Element::Tb => 158.925_35,
            Element::Dy => 162.500,
            Element::Ho => 164.930_33,
            Element::Er => 167.259,
            Element::Tm => 168.934_22,
            Element::Yb => 173.045,
            Element::Lu => 174.966_8,
            Element::Y => 88.905_84,
            Element::Sc => 44.955_908,
        }
    }

    /// Parses a symbol case-insensitively. Pm is rejected like any other
    /// unknown token.
    pub fn from_symbol(token: &str) -> Option<Element> {
        let t = token.trim();
        Element::ALL.iter().copied().find(|e| e.symbol().eq_ignore_ascii_case(t))
    }

    /// Parses a comma or semicolon separated list such as `Ce,Eu`.
    pub fn parse_list(list: &str) -> Result<BTreeSet<Element>, DomainError> {
        list.split([',', ';']).map(str::trim).filter(|s| !s.is_empty()).map(|s| s.parse()).collect()
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Element {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Element::from_symbol(s).ok_or_else(|| DomainError::UnknownElement(s.trim().to_string()))
    }
}

/// One row of a bundled data file.
#[derive(Debug, Clone, Deserialize)]
struct DataRow {
    element: String,
    value: f64,
    unit: String,
    citation: String,
}

fn read_data_rows(text: &str, origin: &str) -> Result<Vec<DataRow>, DomainError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    reader
        .deserialize::<DataRow>()
        .map(|r| r.map_err(|e| DomainError::DataFile { origin: origin.to_string(), message: e.to_string() }))
        .collect()
}

fn merge_citations(rows: &[DataRow]) -> String {
    let mut seen: Vec<&str> = Vec::new();
    for row in rows {
        if !seen.contains(&row.citation.as_str()) {
            seen.push(&row.citation);
        }
    }
    seen.join("; ")
}

/// Ionic radius per canonical element, in picometres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiiTable {
    radius_pm: BTreeMap<Element, f64>,
    pub source_label: String,
}

impl RadiiTable {
    pub const RADIUS_BAND_PM: (f64, f64) = (90.0, 130.0);

    /// Validates coverage of all fourteen lanthanides, the sanity band, and
    /// strict decrease from La to Lu.
    pub fn new(radius_pm: BTreeMap<Element, f64>, source_label: impl Into<String>) -> Result<Self, DomainError> {
        let mut previous: Option<(Element, f64)> = None;
        for e in Element::CANONICAL {
            let r = *radius_pm.get(&e).ok_or(DomainError::MissingElement { table: "radii".into(), element: e })?;
            let (lo, hi) = Self::RADIUS_BAND_PM;
            if !(lo..=hi).contains(&r) {
                return Err(DomainError::RadiusOutOfBand { element: e, radius_pm: r });
            }
            if let Some((pe, pr)) = previous {
                if r >= pr {
                    return Err(DomainError::RadiiNotDecreasing { first: pe, second: e });
                }
            }
            previous = Some((e, r));
        }
        let radius_pm = radius_pm.into_iter().filter(|(e, _)| e.is_canonical()).collect();
        Ok(Self { radius_pm, source_label: source_label.into() })
    }

    pub fn from_csv_str(text: &str, origin: &str) -> Result<Self, DomainError> {
        let rows = read_data_rows(text, origin)?;
        let mut map = BTreeMap::new();
        for row in &rows {
            let e: Element = row.element.parse()?;
            let r = match row.unit.to_ascii_lowercase().as_str() {
                "pm" => row.value,
                "a" | "å" | "angstrom" => row.value * 100.0,
                other => {
                    return Err(DomainError::DataFile {
                        origin: origin.into(),
                        message: format!("unsupported radius unit '{other}'"),
                    })
                }
            };
            if e.is_canonical() && map.insert(e, r).is_some() {
                return Err(DomainError::DuplicateElement { table: origin.into(), element: e });
            }
        }
        Self::new(map, merge_citations(&rows))
    }

    pub fn from_path(path: &Path) -> Result<Self, DomainError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| DomainError::DataFile { origin: path.display().to_string(), message: e.to_string() })?;
        Self::from_csv_str(&text, &path.display().to_string())
    }

    pub fn get(&self, element: Element) -> Option<f64> {
        self.radius_pm.get(&element).copied()
    }

    /// Radius of a canonical element. Panics on Y/Sc, which the table does
    /// not carry.
    pub fn radius(&self, element: Element) -> f64 {
        self.radius_pm[&element]
    }

    /// Radii in canonical order.
    pub fn grid(&self) -> Vec<f64> {
        Element::CANONICAL.iter().map(|&e| self.radius(e)).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Element, f64)> + '_ {
        self.radius_pm.iter().map(|(&e, &r)| (e, r))
    }
}

/// The shipped eight-fold coordination radii.
pub fn canonical_radii() -> RadiiTable {
    RadiiTable::from_csv_str(include_str!("../data/radii_shannon_viii.csv"), "radii_shannon_viii.csv")
        .expect("bundled radii table is valid")
}

/// A named normalisation vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceStandard {
    pub name: String,
    values_ppm: BTreeMap<Element, f64>,
    pub citation: String,
}

impl ReferenceStandard {
    pub fn new(
        name: impl Into<String>,
        values_ppm: BTreeMap<Element, f64>,
        citation: impl Into<String>,
    ) -> Result<Self, DomainError> {
        let name = name.into();
        for e in Element::CANONICAL {
            match values_ppm.get(&e) {
                None => return Err(DomainError::MissingElement { table: name, element: e }),
                Some(&v) if !(v > 0.0 && v.is_finite()) => {
                    return Err(DomainError::NonPositiveReference { standard: name, element: e, value: v })
                }
                _ => {}
            }
        }
        for (&e, &v) in &values_ppm {
            if !(v > 0.0 && v.is_finite()) {
                return Err(DomainError::NonPositiveReference { standard: name, element: e, value: v });
            }
        }
        Ok(Self { name, values_ppm, citation: citation.into() })
    }

    pub fn from_csv_str(name: &str, text: &str) -> Result<Self, DomainError> {
        let rows = read_data_rows(text, name)?;
        let mut map = BTreeMap::new();
        for row in &rows {
            let e: Element = row.element.parse()?;
            let v = match row.unit.to_ascii_lowercase().as_str() {
                "ppm" | "ug/g" | "µg/g" => row.value,
                "ppb" | "ng/g" => row.value * 1e-3,
                "wt%" | "%" => row.value * 1e4,
                other => {
                    return Err(DomainError::DataFile {
                        origin: name.into(),
                        message: format!("unsupported concentration unit '{other}'"),
                    })
                }
            };
            if map.insert(e, v).is_some() {
                return Err(DomainError::DuplicateElement { table: name.into(), element: e });
            }
        }
        Self::new(name, map, merge_citations(&rows))
    }

    /// Loads a standard from a CSV file; the file stem becomes its name.
    pub fn from_path(path: &Path) -> Result<Self, DomainError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| DomainError::DataFile { origin: path.display().to_string(), message: e.to_string() })?;
        let name =
            path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string());
        Self::from_csv_str(&name, &text)
    }

    pub fn get(&self, element: Element) -> Option<f64> {
        self.values_ppm.get(&element).copied()
    }

    /// Reference value of a canonical element (always present).
    pub fn value(&self, element: Element) -> f64 {
        self.values_ppm[&element]
    }

    pub fn iter(&self) -> impl Iterator<Item = (Element, f64)> + '_ {
        self.values_ppm.iter().map(|(&e, &v)| (e, v))
    }

    pub fn len(&self) -> usize {
        self.values_ppm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values_ppm.is_empty()
    }
}

pub const BUILTIN_STANDARDS: [&str; 3] = ["chondrite", "MORB", "average-crust"];

/// Returns one of the shipped standards. Names match case-insensitively and
/// `_` is accepted in place of `-`.
pub fn builtin_reference(name: &str) -> Result<ReferenceStandard, DomainError> {
    let key = name.trim().to_ascii_lowercase().replace('_', "-");
    let (canonical, text) = match key.as_str() {
        "chondrite" => ("chondrite", include_str!("../data/chondrite.csv")),
        "morb" => ("MORB", include_str!("../data/morb.csv")),
        "average-crust" => ("average-crust", include_str!("../data/average_crust.csv")),
        _ => return Err(DomainError::UnknownStandard(name.to_string())),
    };
    Ok(ReferenceStandard::from_csv_str(canonical, text).expect("bundled standard is valid"))
}

/// Resolves a builtin name first, then a CSV path.
pub fn resolve_reference(name_or_path: &str) -> Result<ReferenceStandard, DomainError> {
    match builtin_reference(name_or_path) {
        Ok(s) => Ok(s),
        Err(DomainError::UnknownStandard(_)) if Path::new(name_or_path).is_file() => {
            ReferenceStandard::from_path(Path::new(name_or_path))
        }
        Err(e) => Err(e),
    }
}

/// One sample: element concentrations (ppm) plus category labels.
///
/// A key missing from `concentrations_ppm` means the element is absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReePattern {
    pub sample_id: String,
    pub concentrations_ppm: BTreeMap<Element, f64>,
    #[serde(default)]
    pub categories: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uncertainties_ppm: Option<BTreeMap<Element, f64>>,
}

impl ReePattern {
    pub fn new(sample_id: impl Into<String>, concentrations_ppm: BTreeMap<Element, f64>) -> Result<Self, DomainError> {
        let pattern = Self {
            sample_id: sample_id.into(),
            concentrations_ppm,
            categories: BTreeMap::new(),
            uncertainties_ppm: None,
        };
        pattern.validate()?;
        Ok(pattern)
    }

    pub fn with_categories(mut self, categories: BTreeMap<String, String>) -> Self {
        self.categories = categories;
        self
    }

    pub fn with_uncertainties(mut self, sigma: BTreeMap<Element, f64>) -> Self {
        self.uncertainties_ppm = Some(sigma);
        self
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        if self.sample_id.trim().is_empty() {
            return Err(DomainError::EmptySampleId);
        }
        for (&e, &c) in &self.concentrations_ppm {
            if !(c.is_finite() && c >= 0.0) {
                return Err(DomainError::InvalidConcentration {
                    sample_id: self.sample_id.clone(),
                    element: e,
                    value: c,
                });
            }
        }
        let present = self.canonical_present();
        if present < MIN_PATTERN_ELEMENTS {
            return Err(DomainError::TooFewElements {
                sample_id: self.sample_id.clone(),
                present,
                required: MIN_PATTERN_ELEMENTS,
            });
        }
        Ok(())
    }

    pub fn get(&self, element: Element) -> Option<f64> {
        self.concentrations_ppm.get(&element).copied()
    }

    pub fn canonical_present(&self) -> usize {
        self.concentrations_ppm.keys().filter(|e| e.is_canonical()).count()
    }

    pub fn category(&self, name: &str) -> Option<&str> {
        self.categories.get(name).map(String::as_str)
    }

    /// Same pattern with every concentration multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for v in out.concentrations_ppm.values_mut() {
            *v *= factor;
        }
        out
    }
}

/// Marker stored for a category cell that was empty in the source.
pub const UNKNOWN_CATEGORY: &str = "UNKNOWN";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub source_name: String,
    /// RFC 3339 import time. Set by the store, never by the parser, so that
    /// parsing stays deterministic.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub imported_at: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub dataset_id: String,
    pub patterns: Vec<ReePattern>,
    pub category_schema: Vec<String>,
    pub provenance: Provenance,
}

impl Dataset {
    /// Builds a dataset, filling the category schema from the union of
    /// pattern keys and padding missing values with [`UNKNOWN_CATEGORY`].
    pub fn new(
        dataset_id: impl Into<String>,
        mut patterns: Vec<ReePattern>,
        provenance: Provenance,
    ) -> Result<Self, DomainError> {
        let mut seen = BTreeSet::new();
        for p in &patterns {
            p.validate()?;
            if !seen.insert(p.sample_id.as_str()) {
                return Err(DomainError::DuplicateSampleId(p.sample_id.clone()));
            }
        }
        let mut schema: Vec<String> = Vec::new();
        for p in &patterns {
            for k in p.categories.keys() {
                if !schema.contains(k) {
                    schema.push(k.clone());
                }
            }
        }
        for p in &mut patterns {
            for k in &schema {
                p.categories.entry(k.clone()).or_insert_with(|| UNKNOWN_CATEGORY.to_string());
            }
        }
        Ok(Self { dataset_id: dataset_id.into(), patterns, category_schema: schema, provenance })
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn pattern(&self, sample_id: &str) -> Option<&ReePattern> {
        self.patterns.iter().find(|p| p.sample_id == sample_id)
    }

    pub fn has_category(&self, name: &str) -> bool {
        self.category_schema.iter().any(|c| c == name)
    }

    pub fn require_category(&self, name: &str) -> Result<(), DomainError> {
        if self.has_category(name) {
            Ok(())
        } else {
            Err(DomainError::UnknownCategory { requested: name.to_string(), available: self.category_schema.clone() })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chondrite_has_all_canonical_elements() {
        let ch = builtin_reference("chondrite").unwrap();
        for e in Element::CANONICAL {
            assert!(ch.value(e) > 0.0, "{e}");
        }
        let canonical = ch.iter().filter(|(e, _)| e.is_canonical()).count();
        assert_eq!(canonical, 14);
    }

    #[test]
    fn standards_are_distinct() {
        let ch = builtin_reference("chondrite").unwrap();
        let morb = builtin_reference("MORB").unwrap();
        let crust = builtin_reference("average-crust").unwrap();
        assert_ne!(ch.value(Element::La), morb.value(Element::La));
        assert_ne!(morb.value(Element::La), crust.value(Element::La));
        assert!(!ch.citation.is_empty());
    }

    #[test]
    fn unknown_standard() {
        assert!(matches!(builtin_reference("PAAS"), Err(DomainError::UnknownStandard(_))));
    }

    #[test]
    fn radii_ordering() {
        let radii = canonical_radii();
        assert!(radii.radius(Element::La) > radii.radius(Element::Ce));
        let min = radii.grid().into_iter().fold(f64::INFINITY, f64::min);
        assert_eq!(radii.radius(Element::Lu), min);
        for (e, r) in radii.iter() {
            assert!((90.0..=130.0).contains(&r), "{e} {r}");
        }
        let grid = radii.grid();
        assert!(grid.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn radii_rejects_non_monotone() {
        let mut map: BTreeMap<Element, f64> = canonical_radii().iter().collect();
        map.insert(Element::Ce, 117.0);
        assert!(matches!(
            RadiiTable::new(map, "x"),
            Err(DomainError::RadiiNotDecreasing { first: Element::La, second: Element::Ce })
        ));
    }

    #[test]
    fn promethium_is_not_an_element() {
        assert!("Pm".parse::<Element>().is_err());
        assert_eq!("lu".parse::<Element>().unwrap(), Element::Lu);
        assert!(!Element::Y.is_canonical());
    }

    #[test]
    fn dataset_fills_unknown_categories() {
        let conc: BTreeMap<Element, f64> = Element::CANONICAL.iter().map(|&e| (e, 1.0)).collect();
        let a = ReePattern::new("a", conc.clone())
            .unwrap()
            .with_categories([("mineral".to_string(), "apatite".to_string())].into());
        let b = ReePattern::new("b", conc).unwrap().with_categories([("hole".to_string(), "H1".to_string())].into());
        let prov = Provenance { source_name: "t".into(), imported_at: None };
        let ds = Dataset::new("id", vec![a, b], prov).unwrap();
        assert_eq!(ds.category_schema, vec!["mineral".to_string(), "hole".to_string()]);
        assert_eq!(ds.patterns[0].category("hole"), Some(UNKNOWN_CATEGORY));
        assert_eq!(ds.patterns[1].category("mineral"), Some(UNKNOWN_CATEGORY));
    }

    #[test]
    fn pattern_needs_five_elements() {
        let conc: BTreeMap<Element, f64> = Element::CANONICAL[..4].iter().map(|&e| (e, 1.0)).collect();
        assert!(matches!(ReePattern::new("s", conc), Err(DomainError::TooFewElements { present: 4, .. })));
    }
}
