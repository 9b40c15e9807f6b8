use std::collections::{BTreeMap, HashMap};
use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::job::Timings;
use crate::selector::{PreviewRecord, PreviewSystem};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StoreError {
    #[error("store {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("store {path}: line {line} is not a record: {reason}")]
    Corrupt { path: String, line: usize, reason: String },
}

/// One line of the store log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredRecord {
    /// Position in the log, 0-based.
    pub seq: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub job_id: Option<String>,
    #[serde(flatten)]
    pub record: PreviewRecord,
    #[serde(default)]
    pub timings: Timings,
}

struct Inner {
    file: File,
    records: Vec<StoredRecord>,
    active: HashMap<(String, PreviewSystem), usize>,
}

/// Append-only JSONL log with an in-memory index of the newest record per
/// `(episode_id, system)`. Older records stay in the log as superseded.
pub struct PreviewStore {
    path: PathBuf,
    inner: Mutex<Inner>,
}

impl std::fmt::Debug for PreviewStore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PreviewStore").field("path", &self.path).finish_non_exhaustive()
    }
}

impl PreviewStore {
    /// Opens or creates the log and rebuilds the index. A torn final line
    /// (no trailing newline, unparsable) is cut off; any other bad line is an
    /// error.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        let path = path.as_ref().to_path_buf();
        let shown = path.display().to_string();
        let io = |e: std::io::Error| StoreError::Io { path: shown.clone(), reason: e.to_string() };
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(io)?;
        }
        let mut file = OpenOptions::new().read(true).append(true).create(true).open(&path).map_err(io)?;
        let mut text = String::new();
        file.read_to_string(&mut text).map_err(io)?;

        let mut records = Vec::new();
        let mut active = HashMap::new();
        let mut offset = 0usize;
        let mut keep = 0usize;
        let lines: Vec<&str> = text.split_inclusive('\n').collect();
        for (i, raw) in lines.iter().enumerate() {
            let line_start = offset;
            offset += raw.len();
            let body = raw.trim_end_matches(['\n', '\r']);
            if body.trim().is_empty() {
                keep = offset;
                continue;
            }
            match serde_json::from_str::<StoredRecord>(body) {
                Ok(mut r) => {
                    r.seq = records.len() as u64;
                    active.insert((r.record.episode_id.clone(), r.record.system), records.len());
                    records.push(r);
                    keep = offset;
                }
                Err(e) if i + 1 == lines.len() && !raw.ends_with('\n') => {
                    log::warn!("store {shown}: dropping torn final line ({e})");
                    keep = line_start;
                }
                Err(e) => {
                    return Err(StoreError::Corrupt { path: shown, line: i + 1, reason: e.to_string() });
                }
            }
        }
        if keep < text.len() {
            file.set_len(keep as u64).map_err(io)?;
            file.seek(SeekFrom::End(0)).map_err(io)?;
        } else if !text.is_empty() && !text.ends_with('\n') {
            // complete record without its newline
            file.write_all(b"\n").map_err(io)?;
        }
        Ok(Self { path, inner: Mutex::new(Inner { file, records, active }) })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Appends one record and makes it the active one for its key.
    pub fn append(
        &self,
        record: PreviewRecord,
        job_id: Option<String>,
        timings: Timings,
    ) -> Result<StoredRecord, StoreError> {
        let mut inner = self.inner.lock().expect("store lock");
        let stored = StoredRecord { seq: inner.records.len() as u64, job_id, record, timings };
        let mut line = serde_json::to_string(&stored).expect("record serializes");
        line.push('\n');
        let io = |e: std::io::Error| StoreError::Io { path: self.path.display().to_string(), reason: e.to_string() };
        inner.file.write_all(line.as_bytes()).map_err(io)?;
        inner.file.flush().map_err(io)?;
        let idx = inner.records.len();
        inner.active.insert((stored.record.episode_id.clone(), stored.record.system), idx);
        inner.records.push(stored.clone());
        Ok(stored)
    }

    pub fn active(&self, episode_id: &str, system: PreviewSystem) -> Option<StoredRecord> {
        let inner = self.inner.lock().expect("store lock");
        inner.active.get(&(episode_id.to_string(), system)).map(|&i| inner.records[i].clone())
    }

    /// Active records of one episode, ordered by system.
    pub fn active_for_episode(&self, episode_id: &str) -> Vec<StoredRecord> {
        let inner = self.inner.lock().expect("store lock");
        let mut out: BTreeMap<PreviewSystem, StoredRecord> = BTreeMap::new();
        for ((ep, system), &i) in &inner.active {
            if ep == episode_id {
                out.insert(*system, inner.records[i].clone());
            }
        }
        out.into_values().collect()
    }

    /// All active records ordered by log position.
    pub fn active_records(&self) -> Vec<StoredRecord> {
        let inner = self.inner.lock().expect("store lock");
        let mut idx: Vec<usize> = inner.active.values().copied().collect();
        idx.sort_unstable();
        idx.into_iter().map(|i| inner.records[i].clone()).collect()
    }

    pub fn active_count(&self) -> usize {
        self.inner.lock().expect("store lock").active.len()
    }

    /// Records in the log, active and superseded.
    pub fn total_count(&self) -> usize {
        self.inner.lock().expect("store lock").records.len()
    }

    pub fn superseded_count(&self) -> usize {
        let inner = self.inner.lock().expect("store lock");
        inner.records.len() - inner.active.len()
    }
}
