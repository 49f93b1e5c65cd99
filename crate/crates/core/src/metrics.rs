//! Reporting metrics: TREO, NdPr share, LREE/HREE, chondrite-normalised
//! shape ratios and a price-weighted basket value.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::domain::{Element, ReePattern, ReferenceStandard};
use crate::error::MetricsError;
use crate::normalize::NormalizedPattern;

/// Standard atomic weight of oxygen.
pub const OXYGEN_MASS: f64 = 15.999;

/// Oxide stoichiometry used to convert metal ppm to oxide ppm. Every element
/// defaults to the sesquioxide `M2O3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OxideConfig {
    /// Report Ce as `CeO2`.
    pub ce_dioxide: bool,
    /// Report Pr as `Pr6O11`.
    pub pr6o11: bool,
}

impl OxideConfig {
    pub fn formula(&self, element: Element) -> (u32, u32) {
        match element {
            Element::Ce if self.ce_dioxide => (1, 2),
            Element::Pr if self.pr6o11 => (6, 11),
            _ => (2, 3),
        }
    }

    /// Oxide mass per unit metal mass.
    pub fn factor(&self, element: Element) -> f64 {
        let (m, o) = self.formula(element);
        let metal = element.atomic_mass() * m as f64;
        (metal + OXYGEN_MASS * o as f64) / metal
    }

    pub fn label(&self) -> String {
        let mut parts = vec!["M2O3"];
        if self.ce_dioxide {
            parts.push("CeO2");
        }
        if self.pr6o11 {
            parts.push("Pr6O11");
        }
        parts.join("+")
    }
}

/// Elements summed into TREO: the lanthanides plus Y. Sc is reported
/// separately in industry practice and left out.
fn treo_members(element: Element) -> bool {
    element != Element::Sc
}

pub fn oxide_ppm(pattern: &ReePattern, element: Element, oxides: &OxideConfig) -> Option<f64> {
    pattern.get(element).map(|c| c * oxides.factor(element))
}

/// Total rare earth oxides in ppm.
pub fn treo(pattern: &ReePattern, oxides: &OxideConfig) -> f64 {
    pattern.concentrations_ppm.iter().filter(|(e, _)| treo_members(**e)).map(|(&e, &c)| c * oxides.factor(e)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NdprBasis {
    #[default]
    Metal,
    Oxide,
}

/// `(Nd + Pr) / Σ lanthanides` by metal mass.
pub fn ndpr(pattern: &ReePattern) -> Result<f64, MetricsError> {
    ndpr_with(pattern, NdprBasis::Metal, &OxideConfig::default())
}

pub fn ndpr_with(pattern: &ReePattern, basis: NdprBasis, oxides: &OxideConfig) -> Result<f64, MetricsError> {
    let mass = |e: Element| {
        let c = pattern.get(e).unwrap_or(0.0);
        match basis {
            NdprBasis::Metal => c,
            NdprBasis::Oxide => c * oxides.factor(e),
        }
    };
    let total: f64 = Element::CANONICAL.iter().map(|&e| mass(e)).sum();
    if total <= 0.0 {
        return Err(MetricsError::ZeroTotal { sample_id: pattern.sample_id.clone() });
    }
    Ok((mass(Element::Nd) + mass(Element::Pr)) / total)
}

/// Light/heavy split: every lanthanide before `first_heavy` is light.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LreeHreeSplit {
    pub first_heavy: Element,
}

impl Default for LreeHreeSplit {
    fn default() -> Self {
        Self { first_heavy: Element::Gd }
    }
}

impl LreeHreeSplit {
    pub fn is_light(&self, element: Element) -> bool {
        match (element.canonical_index(), self.first_heavy.canonical_index()) {
            (Some(i), Some(b)) => i < b,
            _ => false,
        }
    }
}

/// Σ LREE / Σ HREE in ppm, `None` when the heavy sum is zero.
pub fn lree_hree_ratio(pattern: &ReePattern, split: &LreeHreeSplit) -> Option<f64> {
    let (mut light, mut heavy) = (0.0, 0.0);
    for e in Element::CANONICAL {
        let c = pattern.get(e).unwrap_or(0.0);
        if split.is_light(e) {
            light += c;
        } else {
            heavy += c;
        }
    }
    (heavy > 0.0).then(|| light / heavy)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ShapeRatio {
    #[serde(rename = "La/Lu")]
    LaLu,
    #[serde(rename = "La/Gd")]
    LaGd,
    #[serde(rename = "Gd/Lu")]
    GdLu,
}

impl ShapeRatio {
    pub const ALL: [ShapeRatio; 3] = [ShapeRatio::LaLu, ShapeRatio::LaGd, ShapeRatio::GdLu];

    pub fn pair(self) -> (Element, Element) {
        match self {
            ShapeRatio::LaLu => (Element::La, Element::Lu),
            ShapeRatio::LaGd => (Element::La, Element::Gd),
            ShapeRatio::GdLu => (Element::Gd, Element::Lu),
        }
    }
}

impl fmt::Display for ShapeRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.pair();
        write!(f, "{a}/{b}")
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ShapeRatios {
    pub values: BTreeMap<ShapeRatio, f64>,
    /// One line per ratio that could not be formed.
    pub notes: Vec<String>,
}

impl ShapeRatios {
    pub fn get(&self, ratio: ShapeRatio) -> Option<f64> {
        self.values.get(&ratio).copied()
    }
}

/// Ratios of normalised concentrations, `exp(y_a - y_b)`.
pub fn shape_ratios(np: &NormalizedPattern) -> ShapeRatios {
    ratios_from_y(&np.y_map())
}

fn ratios_from_y(y: &BTreeMap<Element, f64>) -> ShapeRatios {
    let mut out = ShapeRatios::default();
    for ratio in ShapeRatio::ALL {
        let (a, b) = ratio.pair();
        match (y.get(&a), y.get(&b)) {
            (Some(ya), Some(yb)) => {
                out.values.insert(ratio, (ya - yb).exp());
            }
            _ => {
                let missing: Vec<String> =
                    [a, b].iter().filter(|e| !y.contains_key(e)).map(|e| e.to_string()).collect();
                out.notes.push(format!("{ratio} omitted: {} not available", missing.join(", ")));
            }
        }
    }
    out
}

/// Ratios computed straight from a pattern, using every positive
/// concentration regardless of fit exclusions.
pub fn pattern_shape_ratios(pattern: &ReePattern, standard: &ReferenceStandard) -> ShapeRatios {
    let y: BTreeMap<Element, f64> = Element::CANONICAL
        .iter()
        .filter_map(|&e| {
            let c = pattern.get(e)?;
            (c > 0.0).then(|| (e, (c / standard.value(e)).ln()))
        })
        .collect();
    ratios_from_y(&y)
}

/// Oxide prices in USD per kilogram.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PriceTable {
    pub usd_per_kg_oxide: BTreeMap<Element, f64>,
}

impl PriceTable {
    pub fn new(prices: impl IntoIterator<Item = (Element, f64)>) -> Self {
        Self { usd_per_kg_oxide: prices.into_iter().collect() }
    }

    /// Parses `element,usd_per_kg_oxide`.
    pub fn from_csv_str(text: &str) -> Result<Self, MetricsError> {
        #[derive(Deserialize)]
        struct Row {
            element: String,
            usd_per_kg_oxide: f64,
        }
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let headers = reader.headers().map_err(|e| MetricsError::PriceFile(e.to_string()))?.clone();
        if !headers.iter().any(|h| h == "element") || !headers.iter().any(|h| h == "usd_per_kg_oxide") {
            return Err(MetricsError::PriceFile("expected columns element,usd_per_kg_oxide".to_string()));
        }
        let mut prices = BTreeMap::new();
        for (i, row) in reader.deserialize::<Row>().enumerate() {
            let row = row.map_err(|e| MetricsError::PriceFile(format!("row {}: {e}", i + 1)))?;
            let e: Element = row
                .element
                .parse()
                .map_err(|_| MetricsError::PriceFile(format!("row {}: unknown element '{}'", i + 1, row.element)))?;
            if !(row.usd_per_kg_oxide >= 0.0 && row.usd_per_kg_oxide.is_finite()) {
                return Err(MetricsError::PriceFile(format!("row {}: price must be non-negative", i + 1)));
            }
            if prices.insert(e, row.usd_per_kg_oxide).is_some() {
                return Err(MetricsError::PriceFile(format!("row {}: {e} listed twice", i + 1)));
            }
        }
        Ok(Self { usd_per_kg_oxide: prices })
    }

    pub fn get(&self, element: Element) -> Option<f64> {
        self.usd_per_kg_oxide.get(&element).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasketValue {
    pub usd_per_tonne: f64,
    /// Present elements with no price; they contribute zero.
    pub unpriced: Vec<Element>,
}

/// In-situ oxide value of one tonne of rock: `Σ oxide_ppm · 1e-6 · 1000 kg · price`.
pub fn basket_value(pattern: &ReePattern, prices: &PriceTable, oxides: &OxideConfig) -> BasketValue {
    let mut total = 0.0;
    let mut unpriced = Vec::new();
    for (&e, &c) in &pattern.concentrations_ppm {
        match prices.get(e) {
            Some(p) => total += c * oxides.factor(e) * 1e-6 * 1000.0 * p,
            None if c > 0.0 => unpriced.push(e),
            None => {}
        }
    }
    BasketValue { usd_per_tonne: total, unpriced }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    pub oxides: OxideConfig,
    pub ndpr_basis: NdprBasis,
    pub split: LreeHreeSplit,
    pub standard: ReferenceStandard,
}

impl MetricConfig {
    pub fn new(standard: ReferenceStandard) -> Self {
        Self { oxides: OxideConfig::default(), ndpr_basis: NdprBasis::Metal, split: LreeHreeSplit::default(), standard }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub sample_id: String,
    pub treo_ppm: f64,
    pub ndpr_fraction: Option<f64>,
    pub lree_hree_ratio: Option<f64>,
    pub ratios: ShapeRatios,
    pub basket_value_usd_per_tonne: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unpriced: Vec<Element>,
}

pub fn metric_report(pattern: &ReePattern, config: &MetricConfig, prices: Option<&PriceTable>) -> MetricReport {
    let basket = prices.map(|p| basket_value(pattern, p, &config.oxides));
    MetricReport {
        sample_id: pattern.sample_id.clone(),
        treo_ppm: treo(pattern, &config.oxides),
        ndpr_fraction: ndpr_with(pattern, config.ndpr_basis, &config.oxides).ok(),
        lree_hree_ratio: lree_hree_ratio(pattern, &config.split),
        ratios: pattern_shape_ratios(pattern, &config.standard),
        basket_value_usd_per_tonne: basket.as_ref().map(|b| b.usd_per_tonne),
        unpriced: basket.map(|b| b.unpriced).unwrap_or_default(),
    }
}

pub const METRICS_CSV_HEADER: &str =
    "sample,treo_ppm,ndpr_fraction,lree_hree_ratio,la_lu,la_gd,gd_lu,basket_value_usd_per_t,oxide_basis";

/// Metrics CSV. Unavailable values are empty cells; ratios are normalised to
/// the configured standard; `oxide_basis` records the TREO stoichiometry.
pub fn write_metrics_csv(reports: &[MetricReport], config: &MetricConfig) -> String {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    writer.write_record(METRICS_CSV_HEADER.split(',')).expect("in-memory write");
    let label = config.oxides.label();
    for r in reports {
        let row = [
            r.sample_id.clone(),
            r.treo_ppm.to_string(),
            opt(r.ndpr_fraction),
            opt(r.lree_hree_ratio),
            opt(r.ratios.get(ShapeRatio::LaLu)),
            opt(r.ratios.get(ShapeRatio::LaGd)),
            opt(r.ratios.get(ShapeRatio::GdLu)),
            opt(r.basket_value_usd_per_tonne),
            label.clone(),
        ];
        writer.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("flush")).expect("utf-8")
}

/// Elements named by a set of reports as unpriced.
pub fn unpriced_elements(reports: &[MetricReport]) -> BTreeSet<Element> {
    reports.iter().flat_map(|r| r.unpriced.iter().copied()).collect()
}
