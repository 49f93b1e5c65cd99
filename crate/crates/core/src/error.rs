use thiserror::Error;

use crate::domain::Element;

/// Machine-readable error token. Every error in the crate maps to one name
/// from a closed set; the service sends it to clients as `code`.
pub trait ErrorCode {
    fn code(&self) -> &'static str;
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("unknown element '{0}'")]
    UnknownElement(String),
    #[error("unknown reference standard '{0}' (expected chondrite, MORB or average-crust)")]
    UnknownStandard(String),
    #[error("{origin}: {message}")]
    DataFile { origin: String, message: String },
    #[error("{table} is missing {element}")]
    MissingElement { table: String, element: Element },
    #[error("{table} lists {element} twice")]
    DuplicateElement { table: String, element: Element },
    #[error("radius of {element} ({radius_pm} pm) is outside the 90..130 pm band")]
    RadiusOutOfBand { element: Element, radius_pm: f64 },
    #[error("radii must decrease strictly from La to Lu ({first} -> {second})")]
    RadiiNotDecreasing { first: Element, second: Element },
    #[error("standard {standard} has non-positive {element} value {value}")]
    NonPositiveReference { standard: String, element: Element, value: f64 },
    #[error("sample id is empty")]
    EmptySampleId,
    #[error("sample {sample_id}: invalid {element} concentration {value}")]
    InvalidConcentration { sample_id: String, element: Element, value: f64 },
    #[error("sample {sample_id}: {present} canonical elements present, {required} required")]
    TooFewElements { sample_id: String, present: usize, required: usize },
    #[error("duplicate sample id '{0}'")]
    DuplicateSampleId(String),
    #[error("unknown category '{requested}' (available: {})", available.join(", "))]
    UnknownCategory { requested: String, available: Vec<String> },
}

impl ErrorCode for DomainError {
    fn code(&self) -> &'static str {
        match self {
            DomainError::UnknownElement(_) => "UnknownElement",
            DomainError::UnknownStandard(_) => "UnknownStandard",
            DomainError::DataFile { .. } => "DataFile",
            DomainError::MissingElement { .. } => "MissingElement",
            DomainError::DuplicateElement { .. } => "DuplicateElement",
            DomainError::RadiusOutOfBand { .. } => "RadiusOutOfBand",
            DomainError::RadiiNotDecreasing { .. } => "RadiiNotDecreasing",
            DomainError::NonPositiveReference { .. } => "NonPositiveReference",
            DomainError::EmptySampleId => "EmptySampleId",
            DomainError::InvalidConcentration { .. } => "InvalidConcentration",
            DomainError::TooFewElements { .. } => "TooFewElements",
            DomainError::DuplicateSampleId(_) => "DuplicateSampleIds",
            DomainError::UnknownCategory { .. } => "UnknownCategory",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NormalizeError {
    #[error("sample {sample_id}: non-positive {element} concentration {value}")]
    NonPositiveConcentration { sample_id: String, element: Element, value: f64 },
    #[error("sample {sample_id}: {usable} usable elements after exclusions, {required} required")]
    TooFewElements { sample_id: String, usable: usize, required: usize },
}

impl ErrorCode for NormalizeError {
    fn code(&self) -> &'static str {
        match self {
            NormalizeError::NonPositiveConcentration { .. } => "NonPositiveConcentration",
            NormalizeError::TooFewElements { .. } => "TooFewElements",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("degree count {requested} is outside 1..=6")]
    DegreeOutOfRange { requested: usize },
    #[error("sample {sample_id}: {usable} usable points, {required} required")]
    TooFewPoints { sample_id: String, usable: usize, required: usize },
    #[error("sample {sample_id}: design matrix is rank deficient (singular value ratio {ratio:e})")]
    RankDeficient { sample_id: String, ratio: f64 },
    #[error("expected {expected} lambda values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("weight for {element} must be finite and positive, got {value}")]
    InvalidWeight { element: Element, value: f64 },
    #[error("dataset has no patterns")]
    EmptyDataset,
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
}

impl ErrorCode for FitError {
    fn code(&self) -> &'static str {
        match self {
            FitError::DegreeOutOfRange { .. } => "DegreeOutOfRange",
            FitError::TooFewPoints { .. } => "TooFewPoints",
            FitError::RankDeficient { .. } => "RankDeficient",
            FitError::LengthMismatch { .. } => "LengthMismatch",
            FitError::InvalidWeight { .. } => "InvalidWeight",
            FitError::EmptyDataset => "EmptyDataset",
            FitError::Normalize(e) => e.code(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("sample {sample_id}: total REE is zero")]
    ZeroTotal { sample_id: String },
    #[error("price file: {0}")]
    PriceFile(String),
}

impl ErrorCode for MetricsError {
    fn code(&self) -> &'static str {
        match self {
            MetricsError::ZeroTotal { .. } => "ZeroTotal",
            MetricsError::PriceFile(_) => "PriceFile",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IngestError {
    #[error("input is not valid UTF-8")]
    InvalidUtf8,
    #[error("no header row found")]
    NoHeader,
    #[error("header has no rare earth element columns")]
    NoElementColumns,
    #[error("columns {columns:?} all map to {element}")]
    AmbiguousColumn { element: Element, columns: Vec<String> },
    #[error("duplicate sample ids: {}", .0.join(", "))]
    DuplicateSampleIds(Vec<String>),
    #[error("malformed CSV: {0}")]
    Malformed(String),
    #[error("invalid import option: {0}")]
    InvalidOption(String),
}

impl ErrorCode for IngestError {
    fn code(&self) -> &'static str {
        match self {
            IngestError::InvalidUtf8 => "InvalidUtf8",
            IngestError::NoHeader => "NoHeader",
            IngestError::NoElementColumns => "NoElementColumns",
            IngestError::AmbiguousColumn { .. } => "AmbiguousColumn",
            IngestError::DuplicateSampleIds(_) => "DuplicateSampleIds",
            IngestError::Malformed(_) => "Malformed",
            IngestError::InvalidOption(_) => "InvalidOption",
        }
    }
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("dataset '{0}' not found")]
    NotFound(String),
    #[error("store I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("stored dataset '{id}' is unreadable: {message}")]
    Corrupt { id: String, message: String },
}

impl ErrorCode for StoreError {
    fn code(&self) -> &'static str {
        match self {
            StoreError::NotFound(_) => "NotFound",
            StoreError::Io(_) => "StoreIo",
            StoreError::Corrupt { .. } => "StoreCorrupt",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VizError {
    #[error("lambda index {index} is out of range for {degree_count} coefficients")]
    IndexOutOfRange { index: usize, degree_count: usize },
    #[error("a scatter matrix needs at least two lambda indices")]
    TooFewIndices,
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("cannot render payload: {0}")]
    UnsupportedKind(String),
    #[error("unknown chart kind '{0}'")]
    UnknownKind(String),
}

impl ErrorCode for VizError {
    fn code(&self) -> &'static str {
        match self {
            VizError::IndexOutOfRange { .. } => "IndexOutOfRange",
            VizError::TooFewIndices => "TooFewIndices",
            VizError::Domain(e) => e.code(),
            VizError::UnsupportedKind(_) => "UnsupportedKind",
            VizError::UnknownKind(_) => "UnknownKind",
        }
    }
}
