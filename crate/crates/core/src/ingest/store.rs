use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::SystemTime;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::csv_import::{parse_csv, ImportOptions, ImportReport};
use crate::domain::{Dataset, Element};
use crate::error::{IngestError, StoreError};

const DATASET_FILE: &str = "dataset.json";
const MANIFEST_FILE: &str = "manifest.json";
const SOURCE_FILE: &str = "source.csv";
const REPORT_FILE: &str = "import_report.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub dataset_id: String,
    pub name: String,
    /// Full sha256 of the source bytes, when the dataset came from a file.
    pub source_sha256: Option<String>,
    pub options: Option<ImportOptions>,
    pub imported_at: String,
    pub rows: usize,
    pub categories: Vec<String>,
    pub elements: Vec<Element>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub dataset_id: String,
    pub name: String,
    pub rows: usize,
    pub categories: Vec<String>,
    pub imported_at: String,
}

impl From<&Manifest> for DatasetSummary {
    fn from(m: &Manifest) -> Self {
        Self {
            dataset_id: m.dataset_id.clone(),
            name: m.name.clone(),
            rows: m.rows,
            categories: m.categories.clone(),
            imported_at: m.imported_at.clone(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ImportError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Content-addressed dataset storage under a root directory.
///
/// Each dataset lives in `<root>/<dataset_id>/`. Writes go to a scratch
/// directory that is renamed into place, so a reader sees either the whole
/// dataset or nothing. Storing the same id twice keeps the first copy.
#[derive(Debug)]
pub struct DatasetStore {
    root: PathBuf,
    cache: RwLock<HashMap<String, Arc<Dataset>>>,
    write_locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
    scratch_counter: AtomicU64,
}

impl DatasetStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(Self {
            root,
            cache: RwLock::new(HashMap::new()),
            write_locks: Mutex::new(HashMap::new()),
            scratch_counter: AtomicU64::new(0),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn dir(&self, id: &str) -> PathBuf {
        self.root.join(id)
    }

    fn lock_for(&self, id: &str) -> Arc<Mutex<()>> {
        let mut locks = self.write_locks.lock().unwrap_or_else(|e| e.into_inner());
        locks.entry(id.to_string()).or_default().clone()
    }

    /// Parses `bytes` and stores the result along with the original file.
    pub fn import(&self, bytes: &[u8], options: &ImportOptions) -> Result<(Arc<Dataset>, ImportReport), ImportError> {
        let (dataset, report) = parse_csv(bytes, options)?;
        let stored = self.write(dataset, Some((bytes, options)), Some(&report))?;
        Ok((stored, report))
    }

    /// Stores an already-built dataset.
    pub fn put(&self, dataset: Dataset) -> Result<Arc<Dataset>, StoreError> {
        self.write(dataset, None, None)
    }

    fn write(
        &self,
        mut dataset: Dataset,
        source: Option<(&[u8], &ImportOptions)>,
        report: Option<&ImportReport>,
    ) -> Result<Arc<Dataset>, StoreError> {
        validate_id(&dataset.dataset_id)?;
        let id = dataset.dataset_id.clone();
        let lock = self.lock_for(&id);
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());

        if self.dir(&id).join(MANIFEST_FILE).exists() {
            return self.get(&id);
        }

        let imported_at = humantime::format_rfc3339_seconds(SystemTime::now()).to_string();
        dataset.provenance.imported_at = Some(imported_at.clone());
        let manifest = Manifest {
            dataset_id: id.clone(),
            name: dataset.provenance.source_name.clone(),
            source_sha256: source.map(|(b, _)| hex::encode(Sha256::digest(b))),
            options: source.map(|(_, o)| o.clone()),
            imported_at,
            rows: dataset.len(),
            categories: dataset.category_schema.clone(),
            elements: present_elements(&dataset),
        };

        let n = self.scratch_counter.fetch_add(1, Ordering::Relaxed);
        let scratch = self.root.join(format!(".tmp-{id}-{}-{n}", std::process::id()));
        let staged = (|| -> Result<(), StoreError> {
            fs::create_dir_all(&scratch)?;
            if let Some((bytes, _)) = source {
                fs::write(scratch.join(SOURCE_FILE), bytes)?;
            }
            if let Some(report) = report {
                fs::write(scratch.join(REPORT_FILE), to_json(report)?)?;
            }
            fs::write(scratch.join(DATASET_FILE), to_json(&dataset)?)?;
            // manifest last: its presence marks a complete dataset
            fs::write(scratch.join(MANIFEST_FILE), to_json(&manifest)?)?;
            fs::rename(&scratch, self.dir(&id))?;
            Ok(())
        })();
        if let Err(e) = staged {
            let _ = fs::remove_dir_all(&scratch);
            return Err(e);
        }

        let dataset = Arc::new(dataset);
        self.cache.write().unwrap_or_else(|e| e.into_inner()).insert(id, dataset.clone());
        Ok(dataset)
    }

    pub fn get(&self, id: &str) -> Result<Arc<Dataset>, StoreError> {
        if let Some(ds) = self.cache.read().unwrap_or_else(|e| e.into_inner()).get(id) {
            return Ok(ds.clone());
        }
        if validate_id(id).is_err() {
            return Err(StoreError::NotFound(id.to_string()));
        }
        let path = self.dir(id).join(DATASET_FILE);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(StoreError::NotFound(id.to_string())),
            Err(e) => return Err(e.into()),
        };
        let dataset: Dataset = serde_json::from_str(&text)
            .map_err(|e| StoreError::Corrupt { id: id.to_string(), message: e.to_string() })?;
        let dataset = Arc::new(dataset);
        self.cache.write().unwrap_or_else(|e| e.into_inner()).insert(id.to_string(), dataset.clone());
        Ok(dataset)
    }

    pub fn manifest(&self, id: &str) -> Result<Manifest, StoreError> {
        if validate_id(id).is_err() {
            return Err(StoreError::NotFound(id.to_string()));
        }
        read_manifest(&self.dir(id), id)
    }

    pub fn import_report(&self, id: &str) -> Result<Option<ImportReport>, StoreError> {
        self.manifest(id)?;
        match fs::read_to_string(self.dir(id).join(REPORT_FILE)) {
            Ok(text) => serde_json::from_str(&text)
                .map(Some)
                .map_err(|e| StoreError::Corrupt { id: id.to_string(), message: e.to_string() }),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    /// Summaries of every stored dataset, sorted by id.
    pub fn list(&self) -> Result<Vec<DatasetSummary>, StoreError> {
        let mut out = Vec::new();
        for entry in fs::read_dir(&self.root)? {
            let entry = entry?;
            let name = entry.file_name().to_string_lossy().into_owned();
            if name.starts_with('.') || !entry.file_type()?.is_dir() {
                continue;
            }
            match read_manifest(&entry.path(), &name) {
                Ok(m) => out.push(DatasetSummary::from(&m)),
                Err(StoreError::NotFound(_)) => continue,
                Err(e) => return Err(e),
            }
        }
        out.sort_by(|a, b| a.dataset_id.cmp(&b.dataset_id));
        Ok(out)
    }
}

fn read_manifest(dir: &Path, id: &str) -> Result<Manifest, StoreError> {
    let text = match fs::read_to_string(dir.join(MANIFEST_FILE)) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(StoreError::NotFound(id.to_string())),
        Err(e) => return Err(e.into()),
    };
    serde_json::from_str(&text).map_err(|e| StoreError::Corrupt { id: id.to_string(), message: e.to_string() })
}

fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>, StoreError> {
    serde_json::to_vec_pretty(value).map_err(|e| StoreError::Io(std::io::Error::other(e)))
}

fn present_elements(ds: &Dataset) -> Vec<Element> {
    let mut set = std::collections::BTreeSet::new();
    for p in &ds.patterns {
        set.extend(p.concentrations_ppm.keys().copied());
    }
    set.into_iter().collect()
}

/// Ids become directory names, so only a conservative alphabet is allowed.
fn validate_id(id: &str) -> Result<(), StoreError> {
    let ok = !id.is_empty()
        && id.len() <= 128
        && !id.starts_with('.')
        && id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
    if ok {
        Ok(())
    } else {
        Err(StoreError::Corrupt { id: id.to_string(), message: "invalid dataset id".to_string() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CSV: &str = "sample,La,Ce,Pr,Nd,Sm,Eu,Gd,unit\na,10,20,3,12,2.5,0.8,2.2,u1\nb,11,22,3.3,13,2.7,0.9,2.4,u2\n";

    #[test]
    fn round_trip_and_idempotent_import() {
        let dir = tempfile::tempdir().unwrap();
        let store = DatasetStore::open(dir.path()).unwrap();
        let (ds, report) = store.import(CSV.as_bytes(), &ImportOptions::default()).unwrap();
        assert_eq!(report.rows_accepted, 2);
        let (again, _) = store.import(CSV.as_bytes(), &ImportOptions::default()).unwrap();
        assert_eq!(ds.dataset_id, again.dataset_id);
        assert_eq!(ds, again);

        // a fresh store reads from disk
        let reopened = DatasetStore::open(dir.path()).unwrap();
        let loaded = reopened.get(&ds.dataset_id).unwrap();
        assert_eq!(*loaded, *ds);
        let list = reopened.list().unwrap();
        assert_eq!(list.len(), 1);
        assert_eq!(list[0].rows, 2);
        assert_eq!(list[0].categories, vec!["unit".to_string()]);
        let m = reopened.manifest(&ds.dataset_id).unwrap();
        assert_eq!(m.source_sha256.unwrap(), hex::encode(Sha256::digest(CSV.as_bytes())));
        assert_eq!(fs::read(dir.path().join(&ds.dataset_id).join(SOURCE_FILE)).unwrap(), CSV.as_bytes());
        assert_eq!(reopened.import_report(&ds.dataset_id).unwrap().unwrap(), report);
    }

    #[test]
    fn missing_and_hostile_ids() {
        let dir = tempfile::tempdir().unwrap();
        let store = DatasetStore::open(dir.path()).unwrap();
        assert!(matches!(store.get("deadbeef"), Err(StoreError::NotFound(_))));
        assert!(matches!(store.get("../etc"), Err(StoreError::NotFound(_))));
        assert!(matches!(store.manifest(".."), Err(StoreError::NotFound(_))));
    }

    #[test]
    fn concurrent_imports_of_same_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let store = Arc::new(DatasetStore::open(dir.path()).unwrap());
        let handles: Vec<_> = (0..8)
            .map(|_| {
                let s = store.clone();
                std::thread::spawn(move || s.import(CSV.as_bytes(), &ImportOptions::default()).unwrap().0)
            })
            .collect();
        let results: Vec<Arc<Dataset>> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        assert!(results.windows(2).all(|w| w[0] == w[1]));
        assert_eq!(store.list().unwrap().len(), 1);
        let leftovers = fs::read_dir(dir.path())
            .unwrap()
            .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with(".tmp"))
            .count();
        assert_eq!(leftovers, 0);
    }
}
