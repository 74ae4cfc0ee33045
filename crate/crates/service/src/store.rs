//! Content-addressed trace files plus an index, under one data directory:
//!
//! ```text
//! <data_dir>/traces/<sha256 of the document>.json
//! <data_dir>/index.json
//! ```
//!
//! Records are written once (temp file, then rename) and never modified.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use chrono::{DateTime, SecondsFormat, Utc};
use retrace_core::model::{decode_structured, encode_structured, Provenance};
use retrace_core::StructuredTrace;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("no trace with id {0:?}")]
    NotFound(String),
    #[error("stored trace {id} is unreadable: {reason}")]
    Corrupt { id: String, reason: String },
    #[error("storage I/O failed: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub created_at: String,
    pub annotator: Provenance,
    pub step_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub trace_id: String,
    pub structured: StructuredTrace,
    /// Canonical document the id was derived from.
    pub document: String,
    pub created_at: DateTime<Utc>,
    pub annotator: Provenance,
}

pub fn trace_id(document: &str) -> String {
    hex::encode(Sha256::digest(document.as_bytes()))
}

fn is_trace_id(id: &str) -> bool {
    id.len() == 64 && id.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'))
}

#[derive(Debug)]
pub struct TraceStore {
    root: PathBuf,
    index_lock: Mutex<()>,
}

impl TraceStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        fs::create_dir_all(root.join("traces"))?;
        Ok(TraceStore { root, index_lock: Mutex::new(()) })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn trace_path(&self, id: &str) -> PathBuf {
        self.root.join("traces").join(format!("{id}.json"))
    }

    fn index_path(&self) -> PathBuf {
        self.root.join("index.json")
    }

    /// Stores `structured` unless an identical document is already present.
    /// Returns the id and whether a new record was written.
    pub fn put(&self, structured: &StructuredTrace) -> Result<(String, bool), StoreError> {
        let document = encode_structured(structured);
        let id = trace_id(&document);
        let path = self.trace_path(&id);
        if path.exists() {
            return Ok((id, false));
        }
        atomic_write(&path, document.as_bytes())?;

        let _guard = self.index_lock.lock().unwrap_or_else(|p| p.into_inner());
        let mut index = self.read_index()?;
        index.entry(id.clone()).or_insert_with(|| IndexEntry {
            created_at: Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true),
            annotator: structured.provenance,
            step_count: structured.step_count,
        });
        let body = serde_json::to_vec_pretty(&index).map_err(io::Error::other)?;
        atomic_write(&self.index_path(), &body)?;
        log::info!("stored trace {id} ({} steps)", structured.step_count);
        Ok((id, true))
    }

    pub fn get(&self, id: &str) -> Result<TraceRecord, StoreError> {
        if !is_trace_id(id) {
            return Err(StoreError::NotFound(id.to_owned()));
        }
        let document = match fs::read_to_string(self.trace_path(id)) {
            Ok(d) => d,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Err(StoreError::NotFound(id.to_owned())),
            Err(e) => return Err(e.into()),
        };
        let corrupt = |reason: String| StoreError::Corrupt { id: id.to_owned(), reason };
        let structured = decode_structured(&document).map_err(|e| corrupt(e.to_string()))?;
        let entry = self.list()?.remove(id);
        let created_at = entry
            .as_ref()
            .and_then(|e| DateTime::parse_from_rfc3339(&e.created_at).ok())
            .map(|t| t.with_timezone(&Utc))
            .unwrap_or_default();
        Ok(TraceRecord { trace_id: id.to_owned(), annotator: structured.provenance, structured, document, created_at })
    }

    pub fn list(&self) -> Result<BTreeMap<String, IndexEntry>, StoreError> {
        let _guard = self.index_lock.lock().unwrap_or_else(|p| p.into_inner());
        self.read_index()
    }

    fn read_index(&self) -> Result<BTreeMap<String, IndexEntry>, StoreError> {
        match fs::read(self.index_path()) {
            Ok(bytes) => serde_json::from_slice(&bytes)
                .map_err(|e| StoreError::Corrupt { id: "index.json".into(), reason: e.to_string() }),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(BTreeMap::new()),
            Err(e) => Err(e.into()),
        }
    }
}

fn atomic_write(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().expect("store paths have a parent");
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
