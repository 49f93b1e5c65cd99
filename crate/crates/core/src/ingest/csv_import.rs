use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::domain::{Dataset, Element, Provenance, ReePattern, UNKNOWN_CATEGORY};
use crate::error::{DomainError, ErrorCode, IngestError};
use crate::normalize::NonPositivePolicy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Unit {
    #[default]
    #[serde(rename = "ppm")]
    Ppm,
    #[serde(rename = "wt%")]
    WtPercent,
}

impl Unit {
    pub fn to_ppm(self, value: f64) -> f64 {
        match self {
            Unit::Ppm => value,
            Unit::WtPercent => value * 1e4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Unit::Ppm => "ppm",
            Unit::WtPercent => "wt%",
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Unit {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ppm" => Ok(Unit::Ppm),
            "wt%" | "wt" | "wtpct" | "percent" => Ok(Unit::WtPercent),
            other => Err(IngestError::InvalidOption(format!("unit '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImportOptions {
    pub delimiter: u8,
    /// Unit for element columns whose header carries no unit suffix.
    pub unit: Unit,
    pub nonpositive: NonPositivePolicy,
    /// Recorded in the dataset provenance; does not affect the dataset id.
    pub source_name: String,
}

impl Default for ImportOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            unit: Unit::Ppm,
            nonpositive: NonPositivePolicy::Reject,
            source_name: "upload.csv".to_string(),
        }
    }
}

impl ImportOptions {
    fn fingerprint(&self) -> String {
        format!("delimiter={};unit={};nonpositive={}", self.delimiter, self.unit, self.nonpositive)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowRejection {
    /// 1-based data row number (the header is row 0).
    pub row: usize,
    pub code: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportReport {
    pub dataset_id: String,
    pub rows_accepted: usize,
    pub rows_rejected: Vec<RowRejection>,
    pub detected_elements: Vec<Element>,
    pub detected_categories: Vec<String>,
    pub unit_assumption: Unit,
    /// Non-fatal observations such as below-detection cells.
    pub notes: Vec<String>,
}

impl ImportReport {
    pub fn input_rows(&self) -> usize {
        self.rows_accepted + self.rows_rejected.len()
    }
}

#[derive(Debug, Clone)]
enum Column {
    Sample,
    Concentration { element: Element, unit: Unit },
    Uncertainty { element: Element },
    Category(String),
}

fn element_header_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?i)^([a-z]{1,2})(?:[\s_\-]*(?:\(\s*)?(ppm|wt\s*%|wt\.?\s*pct|wt|pct|%)(?:\s*\))?)?$")
            .expect("valid regex")
    })
}

fn uncertainty_header_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?i)^([a-z]{1,2})[\s_\-]*(?:\(\s*)?(?:ppm[\s_\-]*)?(sd|1sd|1s|2sd|2s|err|error|sigma|unc|uncertainty)(?:\s*\))?$")
            .expect("valid regex")
    })
}

fn classify(header: &str, default_unit: Unit) -> Column {
    let h = header.trim();
    if let Some(caps) = element_header_re().captures(h) {
        if let Some(element) = Element::from_symbol(&caps[1]) {
            let unit = match caps.get(2).map(|m| m.as_str().to_ascii_lowercase()) {
                None => default_unit,
                Some(u) if u == "ppm" => Unit::Ppm,
                Some(_) => Unit::WtPercent,
            };
            return Column::Concentration { element, unit };
        }
    }
    if let Some(caps) = uncertainty_header_re().captures(h) {
        if let Some(element) = Element::from_symbol(&caps[1]) {
            return Column::Uncertainty { element };
        }
    }
    Column::Category(h.to_string())
}

fn is_sample_header(header: &str) -> bool {
    let key: String = header.trim().to_ascii_lowercase().chars().filter(|c| !matches!(c, ' ' | '_' | '-')).collect();
    matches!(key.as_str(), "sample" | "id" | "sampleid" | "samplename")
}

fn is_missing_token(cell: &str) -> bool {
    matches!(
        cell.to_ascii_lowercase().as_str(),
        "" | "na" | "n/a" | "nan" | "null" | "none" | "-" | "--" | "nd" | "n.d." | "bdl" | "b.d.l."
    )
}

enum Cell {
    Absent,
    Value(f64),
    BelowDetection(f64),
}

fn parse_cell(raw: &str) -> Result<Cell, String> {
    let cell = raw.trim();
    if is_missing_token(cell) {
        return Ok(Cell::Absent);
    }
    if let Some(rest) = cell.strip_prefix('<') {
        let limit: f64 = rest.trim().parse().map_err(|_| format!("'{cell}' is not a number"))?;
        if !limit.is_finite() {
            return Err(format!("'{cell}' is not a finite number"));
        }
        return Ok(Cell::BelowDetection(limit));
    }
    let v: f64 = cell.parse().map_err(|_| format!("'{cell}' is not a number"))?;
    if !v.is_finite() {
        return Err(format!("'{cell}' is not a finite number"));
    }
    Ok(Cell::Value(v))
}

/// Fraction of non-empty cells in `record` that parse as numbers.
fn numeric_share(record: &csv::StringRecord) -> f64 {
    let cells: Vec<&str> = record.iter().map(str::trim).filter(|c| !c.is_empty()).collect();
    if cells.is_empty() {
        return 0.0;
    }
    let numeric = cells.iter().filter(|c| c.trim_start_matches('<').parse::<f64>().is_ok()).count();
    numeric as f64 / cells.len() as f64
}

pub fn content_id(bytes: &[u8], options: &ImportOptions) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    h.update([0u8]);
    h.update(options.fingerprint().as_bytes());
    hex::encode(&h.finalize()[..8])
}

struct RowOutcome {
    pattern: ReePattern,
    notes: Vec<String>,
}

struct Reject {
    code: &'static str,
    reason: String,
}

/// Parses a REE CSV into a dataset plus an import report.
///
/// Header tokens naming an element (`La`, `la`, `La_ppm`, `La (ppm)`,
/// `La wt%`) become concentration columns; `La_sd`, `La_err` and similar
/// become 1σ uncertainty columns. The first column called `sample`, `id` or
/// `sample_id` supplies sample ids (otherwise `row-N`). Every other column is
/// a category. Empty and `NA`-like cells are absent. Rows that fail
/// validation are rejected with a reason; the file as a whole only fails for
/// structural problems.
pub fn parse_csv(bytes: &[u8], options: &ImportOptions) -> Result<(Dataset, ImportReport), IngestError> {
    let text = std::str::from_utf8(bytes).map_err(|_| IngestError::InvalidUtf8)?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    if text.trim().is_empty() {
        return Err(IngestError::NoHeader);
    }

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .delimiter(options.delimiter)
        .from_reader(text.as_bytes());
    let mut records = Vec::new();
    for rec in reader.records() {
        records.push(rec.map_err(|e| IngestError::Malformed(e.to_string()))?);
    }
    let Some((header, rows)) = records.split_first() else {
        return Err(IngestError::NoHeader);
    };

    let mut columns: Vec<Column> = header.iter().map(|h| classify(h, options.unit)).collect();
    if let Some(idx) = header.iter().position(is_sample_header) {
        columns[idx] = Column::Sample;
    }

    let mut by_element: BTreeMap<Element, Vec<String>> = BTreeMap::new();
    for (h, c) in header.iter().zip(&columns) {
        if let Column::Concentration { element, .. } = c {
            by_element.entry(*element).or_default().push(h.trim().to_string());
        }
    }
    if by_element.is_empty() {
        return Err(if numeric_share(header) >= 0.5 { IngestError::NoHeader } else { IngestError::NoElementColumns });
    }
    if let Some((element, cols)) = by_element.iter().find(|(_, cols)| cols.len() > 1) {
        return Err(IngestError::AmbiguousColumn { element: *element, columns: cols.clone() });
    }

    // unique category names, blank headers get a positional name
    let mut category_names: Vec<String> = Vec::new();
    for (i, c) in columns.iter_mut().enumerate() {
        if let Column::Category(name) = c {
            let mut n = if name.is_empty() { format!("column_{}", i + 1) } else { name.clone() };
            let base = n.clone();
            let mut k = 2;
            while category_names.contains(&n) {
                n = format!("{base}_{k}");
                k += 1;
            }
            category_names.push(n.clone());
            *name = n;
        }
    }
    let has_sample_column = columns.iter().any(|c| matches!(c, Column::Sample));

    let mut patterns = Vec::new();
    let mut rejected = Vec::new();
    let mut notes = Vec::new();
    for (i, record) in rows.iter().enumerate() {
        let row_no = i + 1;
        match parse_row(row_no, record, &columns, has_sample_column, options) {
            Ok(outcome) => {
                notes.extend(outcome.notes);
                patterns.push(outcome.pattern);
            }
            Err(r) => rejected.push(RowRejection { row: row_no, code: r.code.to_string(), reason: r.reason }),
        }
    }

    let mut seen = BTreeSet::new();
    let mut dups = BTreeSet::new();
    for p in &patterns {
        if !seen.insert(p.sample_id.as_str()) {
            dups.insert(p.sample_id.clone());
        }
    }
    if !dups.is_empty() {
        return Err(IngestError::DuplicateSampleIds(dups.into_iter().collect()));
    }

    let dataset_id = content_id(bytes, options);
    let provenance = Provenance { source_name: options.source_name.clone(), imported_at: None };
    let mut dataset =
        Dataset::new(dataset_id.clone(), patterns, provenance).map_err(|e| IngestError::Malformed(e.to_string()))?;
    // keep column order from the file, even for columns absent in every row
    dataset.category_schema = category_names.clone();

    let report = ImportReport {
        dataset_id,
        rows_accepted: dataset.len(),
        rows_rejected: rejected,
        detected_elements: by_element.keys().copied().collect(),
        detected_categories: category_names,
        unit_assumption: options.unit,
        notes,
    };
    Ok((dataset, report))
}

fn parse_row(
    row_no: usize,
    record: &csv::StringRecord,
    columns: &[Column],
    has_sample_column: bool,
    options: &ImportOptions,
) -> Result<RowOutcome, Reject> {
    if record.len() != columns.len() {
        return Err(Reject {
            code: "RaggedRow",
            reason: format!("expected {} fields, found {}", columns.len(), record.len()),
        });
    }
    let mut sample_id = if has_sample_column { String::new() } else { format!("row-{row_no}") };
    let mut conc = BTreeMap::new();
    let mut sigma = BTreeMap::new();
    let mut categories = BTreeMap::new();
    let mut notes = Vec::new();

    for (raw, column) in record.iter().zip(columns) {
        match column {
            Column::Sample => sample_id = raw.trim().to_string(),
            Column::Category(name) => {
                let v = raw.trim();
                let v = if v.is_empty() { UNKNOWN_CATEGORY } else { v };
                categories.insert(name.clone(), v.to_string());
            }
            Column::Concentration { element, unit } => {
                let cell = parse_cell(raw)
                    .map_err(|reason| Reject { code: "InvalidNumber", reason: format!("{element}: {reason}") })?;
                match cell {
                    Cell::Absent => {}
                    Cell::BelowDetection(limit) => match options.nonpositive {
                        NonPositivePolicy::ReplaceHalfDetectionLimit if limit > 0.0 => {
                            conc.insert(*element, unit.to_ppm(limit / 2.0));
                        }
                        _ => notes.push(format!(
                            "row {row_no}: {element} below detection limit (<{limit}), treated as absent"
                        )),
                    },
                    Cell::Value(v) if v <= 0.0 => match options.nonpositive {
                        NonPositivePolicy::Reject => {
                            return Err(Reject { code: "NonPositiveConcentration", reason: format!("{element} = {v}") })
                        }
                        _ => notes.push(format!("row {row_no}: {element} = {v} treated as absent")),
                    },
                    Cell::Value(v) => {
                        conc.insert(*element, unit.to_ppm(v));
                    }
                }
            }
            Column::Uncertainty { element } => match parse_cell(raw) {
                Ok(Cell::Value(v)) if v > 0.0 => {
                    sigma.insert(*element, v);
                }
                Ok(_) => {}
                Err(reason) => {
                    return Err(Reject { code: "InvalidNumber", reason: format!("{element} uncertainty: {reason}") })
                }
            },
        }
    }

    // uncertainties share the unit of their element column
    for (element, s) in sigma.iter_mut() {
        if let Some(Column::Concentration { unit, .. }) =
            columns.iter().find(|c| matches!(c, Column::Concentration { element: e, .. } if e == element))
        {
            *s = unit.to_ppm(*s);
        }
    }

    let mut pattern = ReePattern { sample_id, concentrations_ppm: conc, categories, uncertainties_ppm: None };
    if !sigma.is_empty() {
        pattern.uncertainties_ppm = Some(sigma);
    }
    pattern.validate().map_err(|e: DomainError| Reject { code: e.code(), reason: e.to_string() })?;
    Ok(RowOutcome { pattern, notes })
}
