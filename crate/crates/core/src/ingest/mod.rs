//! CSV import and on-disk dataset storage.

mod csv_import;
mod store;

pub use csv_import::{content_id, parse_csv, ImportOptions, ImportReport, RowRejection, Unit};
pub use store::{DatasetStore, DatasetSummary, ImportError, Manifest};
