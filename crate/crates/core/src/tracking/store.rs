//! File-based run store.
//!
//! ```text
//! <root>/index.jsonl       one line per run: run_id, step_name, fingerprint, revision
//! <root>/index.lock        advisory lock serializing every append
//! <root>/execution.log     step_name, run_id, event (tab separated)
//! <root>/runs/<run_id>/params.json
//!                     /status           running | success | failed
//!                     /metrics          step_index, name, value (tab separated, append-only)
//!                     /artifacts.jsonl  name, sha256, size (append-only; last entry wins)
//!                     /artifacts/<name>
//! ```

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Running,
    Success,
    Failed,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Running => "running",
            RunStatus::Success => "success",
            RunStatus::Failed => "failed",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "running" => Some(RunStatus::Running),
            "success" => Some(RunStatus::Success),
            "failed" => Some(RunStatus::Failed),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct IndexEntry {
    run_id: String,
    step_name: String,
    fingerprint: String,
    revision: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run_id: String,
    pub step_name: String,
    pub fingerprint: String,
    pub revision: String,
    pub status: RunStatus,
    pub params: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArtifactRef {
    pub run_id: String,
    pub name: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct ArtifactEntry {
    name: String,
    sha256: String,
    size: u64,
}

pub struct RunStore {
    root: PathBuf,
    append: Mutex<()>,
}

impl RunStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(root.join("runs")).map_err(|e| Error::io(&root, e))?;
        Ok(Self {
            root,
            append: Mutex::new(()),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn run_dir(&self, run_id: &str) -> PathBuf {
        self.root.join("runs").join(run_id)
    }

    /// Runs `f` holding both the in-process mutex and the advisory file lock.
    fn locked<T>(&self, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let _guard = self.append.lock().unwrap_or_else(|p| p.into_inner());
        let path = self.root.join("index.lock");
        let lock = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        lock.lock().map_err(|e| Error::io(&path, e))?;
        let out = f();
        let _ = lock.unlock();
        out
    }

    fn append_line(path: &Path, line: &str) -> Result<()> {
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        let mut buf = line.to_string();
        buf.push('\n');
        f.write_all(buf.as_bytes()).map_err(|e| Error::io(path, e))
    }

    fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
        let tmp = path.with_extension("tmp");
        {
            let mut f = File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
            f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
            f.sync_all().map_err(|e| Error::io(&tmp, e))?;
        }
        fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    }

    fn index(&self) -> Result<Vec<IndexEntry>> {
        let path = self.root.join("index.jsonl");
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(Error::io(&path, e)),
        };
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(|e| Error::Store(format!("index line: {e}"))))
            .collect()
    }

    fn status_of(&self, run_id: &str) -> Result<RunStatus> {
        let path = self.run_dir(run_id).join("status");
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        RunStatus::parse(&text).ok_or_else(|| Error::Store(format!("bad status for {run_id}")))
    }

    fn record(&self, entry: IndexEntry) -> Result<RunRecord> {
        let status = self.status_of(&entry.run_id)?;
        let params_path = self.run_dir(&entry.run_id).join("params.json");
        let params = match fs::read_to_string(&params_path) {
            Ok(t) => serde_json::from_str(&t).map_err(|e| Error::Store(format!("params: {e}")))?,
            Err(_) => serde_json::Value::Null,
        };
        Ok(RunRecord {
            run_id: entry.run_id,
            step_name: entry.step_name,
            fingerprint: entry.fingerprint,
            revision: entry.revision,
            status,
            params,
        })
    }

    /// A successful match if there is one; otherwise the most recent failed
    /// (or abandoned running) match; otherwise `None`.
    pub fn find_matching_run(&self, step_name: &str, fingerprint: &str, revision: &str) -> Result<Option<RunRecord>> {
        let mut resumable = None;
        for entry in self.index()? {
            if entry.step_name != step_name || entry.fingerprint != fingerprint || entry.revision != revision {
                continue;
            }
            let rec = self.record(entry)?;
            match rec.status {
                RunStatus::Success => return Ok(Some(rec)),
                _ => resumable = Some(rec),
            }
        }
        Ok(resumable)
    }

    pub fn load_run(&self, run_id: &str) -> Result<RunRecord> {
        let entry = self
            .index()?
            .into_iter()
            .find(|e| e.run_id == run_id)
            .ok_or_else(|| Error::UnknownRun(run_id.to_string()))?;
        self.record(entry)
    }

    pub fn list_runs(&self) -> Result<Vec<RunRecord>> {
        self.index()?.into_iter().map(|e| self.record(e)).collect()
    }

    /// Registers a new run with status `running`. Run ids are derived from
    /// the step, fingerprint and index position, never from the clock.
    pub fn create_run(
        &self,
        step_name: &str,
        fingerprint: &str,
        revision: &str,
        params: &serde_json::Value,
    ) -> Result<RunRecord> {
        self.locked(|| {
            let n = self.index()?.len();
            let slug: String = step_name
                .chars()
                .map(|c| if c.is_ascii_alphanumeric() { c } else { '-' })
                .collect();
            let run_id = format!("{n:05}-{slug}-{}", &fingerprint[..fingerprint.len().min(12)]);
            let dir = self.run_dir(&run_id);
            fs::create_dir_all(dir.join("artifacts")).map_err(|e| Error::io(&dir, e))?;
            let params_text = serde_json::to_string_pretty(params).expect("json");
            Self::write_atomic(&dir.join("params.json"), params_text.as_bytes())?;
            Self::write_atomic(&dir.join("status"), RunStatus::Running.as_str().as_bytes())?;
            let entry = IndexEntry {
                run_id: run_id.clone(),
                step_name: step_name.to_string(),
                fingerprint: fingerprint.to_string(),
                revision: revision.to_string(),
            };
            Self::append_line(&self.root.join("index.jsonl"), &serde_json::to_string(&entry).expect("json"))?;
            Ok(RunRecord {
                run_id,
                step_name: entry.step_name,
                fingerprint: entry.fingerprint,
                revision: entry.revision,
                status: RunStatus::Running,
                params: params.clone(),
            })
        })
    }

    /// Updates a run's status. A successful run is final.
    pub fn set_status(&self, run_id: &str, status: RunStatus) -> Result<()> {
        self.locked(|| {
            if self.status_of(run_id)? == RunStatus::Success {
                return Err(Error::Store(format!("run {run_id} already succeeded")));
            }
            Self::write_atomic(&self.run_dir(run_id).join("status"), status.as_str().as_bytes())
        })
    }

    pub fn log_metrics(&self, run_id: &str, rows: &[(usize, &str, f64)]) -> Result<()> {
        if rows.is_empty() {
            return Ok(());
        }
        let text: Vec<String> = rows.iter().map(|(s, n, v)| format!("{s}\t{n}\t{v}")).collect();
        self.locked(|| Self::append_line(&self.run_dir(run_id).join("metrics"), &text.join("\n")))
    }

    pub fn metrics(&self, run_id: &str) -> Result<Vec<(usize, String, f64)>> {
        let path = self.run_dir(run_id).join("metrics");
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(Error::io(&path, e)),
        };
        text.lines()
            .map(|l| {
                let mut f = l.split('\t');
                let bad = || Error::Store(format!("bad metric line in {run_id}: {l}"));
                let s = f.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
                let n = f.next().ok_or_else(bad)?.to_string();
                let v = f.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
                Ok((s, n, v))
            })
            .collect()
    }

    pub fn put_artifact(&self, run_id: &str, name: &str, bytes: &[u8]) -> Result<ArtifactRef> {
        if name.contains(['/', '\\']) || name.starts_with('.') {
            return Err(Error::Store(format!("invalid artifact name {name}")));
        }
        let sha256 = hex::encode(Sha256::digest(bytes));
        let dir = self.run_dir(run_id);
        self.locked(|| {
            Self::write_atomic(&dir.join("artifacts").join(name), bytes)?;
            let entry = ArtifactEntry {
                name: name.to_string(),
                sha256: sha256.clone(),
                size: bytes.len() as u64,
            };
            Self::append_line(&dir.join("artifacts.jsonl"), &serde_json::to_string(&entry).expect("json"))
        })?;
        Ok(ArtifactRef {
            run_id: run_id.to_string(),
            name: name.to_string(),
            sha256,
        })
    }

    fn artifact_entry(&self, run_id: &str, name: &str) -> Result<Option<ArtifactEntry>> {
        let path = self.run_dir(run_id).join("artifacts.jsonl");
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(Error::io(&path, e)),
        };
        let mut found = None;
        for line in text.lines().filter(|l| !l.is_empty()) {
            let e: ArtifactEntry =
                serde_json::from_str(line).map_err(|e| Error::Store(format!("artifact log: {e}")))?;
            if e.name == name {
                found = Some(e);
            }
        }
        Ok(found)
    }

    /// Reads an artifact, verifying its recorded digest.
    pub fn get_artifact(&self, run_id: &str, name: &str) -> Result<Vec<u8>> {
        let entry = self
            .artifact_entry(run_id, name)?
            .ok_or_else(|| Error::MissingArtifact(format!("{run_id}/{name}")))?;
        let path = self.run_dir(run_id).join("artifacts").join(name);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(Error::MissingArtifact(format!("{run_id}/{name}")))
            }
            Err(e) => return Err(Error::io(&path, e)),
        };
        if hex::encode(Sha256::digest(&bytes)) != entry.sha256 {
            return Err(Error::CorruptArtifact {
                name: format!("{run_id}/{name}"),
                message: "digest mismatch".into(),
            });
        }
        Ok(bytes)
    }

    pub fn has_artifact(&self, run_id: &str, name: &str) -> bool {
        self.run_dir(run_id).join("artifacts").join(name).exists()
    }

    /// Deletes a superseded artifact file (its log entry stays).
    pub fn discard_artifact(&self, run_id: &str, name: &str) -> Result<()> {
        let path = self.run_dir(run_id).join("artifacts").join(name);
        match fs::remove_file(&path) {
            Ok(()) => Ok(()),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(()),
            Err(e) => Err(Error::io(&path, e)),
        }
    }

    pub fn artifact_path(&self, run_id: &str, name: &str) -> PathBuf {
        self.run_dir(run_id).join("artifacts").join(name)
    }

    pub fn log_event(&self, step_name: &str, run_id: &str, event: &str) -> Result<()> {
        self.locked(|| Self::append_line(&self.root.join("execution.log"), &format!("{step_name}\t{run_id}\t{event}")))
    }

    /// Execution log lines as (step_name, run_id, event).
    pub fn events(&self) -> Result<Vec<(String, String, String)>> {
        let path = self.root.join("execution.log");
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(Error::io(&path, e)),
        };
        Ok(text
            .lines()
            .filter_map(|l| {
                let mut f = l.splitn(3, '\t');
                Some((f.next()?.to_string(), f.next()?.to_string(), f.next()?.to_string()))
            })
            .collect())
    }
}
