//! Rare earth element pattern toolkit: chondrite normalisation, lambda
//! fitting with a fixed orthogonal polynomial basis, exploration metrics,
//! CSV ingestion with a content-addressed store, and render-agnostic chart
//! payloads with deterministic SVG export.

pub mod domain;
pub mod error;
pub mod ingest;
pub mod lambda;
pub mod metrics;
pub mod normalize;
pub mod viz;

pub use domain::{
    builtin_reference, canonical_radii, resolve_reference, Dataset, Element, Provenance, RadiiTable, ReePattern,
    ReferenceStandard,
};
pub use error::{DomainError, ErrorCode, FitError, IngestError, MetricsError, NormalizeError, StoreError, VizError};
pub use normalize::{denormalize, normalize, normalize_with, NonPositivePolicy, NormalizedPattern};
