//! Checkpoint storage for long-running enumeration jobs.
//!
//! Enumeration splits into independent subtrees; each finished subtree is a
//! [`TaskResult`] keyed by its prefix index. A sink persists those results
//! so an interrupted run can resume without redoing completed subtrees.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::enumeration::TaskResult;

/// Where finished subtree results go and where resumed runs read them back.
/// `save` is called from inside the enumeration worker (serialized by the
/// engine), so implementations only need interior immutability.
pub trait CheckpointSink: Sync {
    /// Previously completed subtree results for a labeled job.
    fn load(&self, label: &str) -> BTreeMap<usize, TaskResult>;
    /// Persist one finished subtree. Failures must not panic; losing a
    /// checkpoint only costs recomputation.
    fn save(&self, label: &str, index: usize, task: &TaskResult);
}

/// Discards everything; every run starts from scratch.
pub struct NullCheckpoint;

impl CheckpointSink for NullCheckpoint {
    fn load(&self, _label: &str) -> BTreeMap<usize, TaskResult> {
        BTreeMap::new()
    }
    fn save(&self, _label: &str, _index: usize, _task: &TaskResult) {}
}

#[derive(Serialize, Deserialize)]
struct CheckpointLine {
    index: usize,
    task: TaskResult,
}

/// One NDJSON file per job label inside a directory; each line is one
/// finished subtree. Appends are line-buffered, so a killed run loses at
/// most the line being written (partial trailing lines are skipped on load).
pub struct DirCheckpoint {
    dir: PathBuf,
}

impl DirCheckpoint {
    pub fn new(dir: impl Into<PathBuf>) -> std::io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(DirCheckpoint { dir })
    }

    fn path(&self, label: &str) -> PathBuf {
        debug_assert!(
            label.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_'),
            "checkpoint labels must be plain file-name material"
        );
        self.dir.join(format!("{label}.ndjson"))
    }
}

impl CheckpointSink for DirCheckpoint {
    fn load(&self, label: &str) -> BTreeMap<usize, TaskResult> {
        let mut out = BTreeMap::new();
        let Ok(text) = fs::read_to_string(self.path(label)) else {
            return out;
        };
        for line in text.lines() {
            if let Ok(rec) = serde_json::from_str::<CheckpointLine>(line) {
                out.insert(rec.index, rec.task);
            }
        }
        out
    }

    fn save(&self, label: &str, index: usize, task: &TaskResult) {
        let rec = CheckpointLine {
            index,
            task: task.clone(),
        };
        let Ok(json) = serde_json::to_string(&rec) else {
            return;
        };
        let res = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(self.path(label))
            .and_then(|mut f| writeln!(f, "{json}"));
        if let Err(e) = res {
            eprintln!("warning: checkpoint write failed for {label}: {e}");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dir_round_trip_and_partial_line() {
        let tmp = tempfile::tempdir().unwrap();
        let sink = DirCheckpoint::new(tmp.path()).unwrap();
        let task = TaskResult {
            counts: [(5i64, 7u64)].into_iter().collect(),
            nodes: 42,
            vectors: None,
        };
        sink.save("job-a", 3, &task);
        sink.save("job-a", 1, &task);
        // a truncated trailing line must not poison the rest
        let path = tmp.path().join("job-a.ndjson");
        let mut text = fs::read_to_string(&path).unwrap();
        text.push_str("{\"index\": 9, \"task\"");
        fs::write(&path, text).unwrap();

        let loaded = sink.load("job-a");
        assert_eq!(loaded.len(), 2);
        assert_eq!(loaded[&1].nodes, 42);
        assert_eq!(loaded[&3].counts[&5], 7);
        assert!(sink.load("missing").is_empty());
    }
}
