//! `.pace.json` project documents.
//!
//! ```json
//! { "version": 1, "name": "...", "specs": [], "beats": [], "edges": [], "snapshots": [] }
//! ```
//!
//! Output is pretty-printed JSON with a fixed key order, so saving the same
//! project twice yields the same bytes.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chart::{
    id_counter, Beat, DependencyEdge, ExperienceChart, ExperienceSpec, Violation, BEAT_PREFIX,
};
use crate::paths::{validate_snapshot, PathSnapshot, SnapshotLog, SnapshotStatus};

pub const SCHEMA_VERSION: u32 = 1;
pub const FILE_EXTENSION: &str = ".pace.json";

#[derive(Clone, Debug, PartialEq)]
pub struct Project {
    pub name: String,
    pub chart: ExperienceChart,
    pub snapshots: SnapshotLog,
}

impl Project {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            chart: ExperienceChart::new(),
            snapshots: SnapshotLog::new(),
        }
    }

    pub fn with_chart(name: impl Into<String>, chart: ExperienceChart) -> Self {
        Self {
            name: name.into(),
            chart,
            snapshots: SnapshotLog::new(),
        }
    }

    /// Snapshots whose path no longer fits the chart.
    pub fn stale_snapshots(&self) -> Vec<&PathSnapshot> {
        self.snapshots
            .iter()
            .filter(|s| validate_snapshot(&self.chart, s) == SnapshotStatus::Stale)
            .collect()
    }

    pub fn to_document(&self) -> ProjectDocument {
        ProjectDocument {
            version: SCHEMA_VERSION,
            name: self.name.clone(),
            specs: self.chart.specs().cloned().collect(),
            beats: self.chart.beats().cloned().collect(),
            edges: self.chart.edges().cloned().collect(),
            snapshots: self.snapshots.as_slice().to_vec(),
        }
    }

    /// Checks the version and chart integrity of a parsed document.
    pub fn from_document(doc: ProjectDocument) -> Result<Self, StoreError> {
        if doc.version != SCHEMA_VERSION {
            return Err(StoreError::SchemaVersionUnsupported(doc.version));
        }
        let mut chart = ExperienceChart::from_parts(doc.specs, doc.beats, doc.edges);
        let violations = chart.validate();
        if !violations.is_empty() {
            return Err(StoreError::Integrity(violations));
        }
        // Keep beat ids referenced by old snapshots from being handed out again.
        let floor = doc
            .snapshots
            .iter()
            .flat_map(|s| s.path.beats.iter())
            .filter_map(|b| id_counter(b.as_str(), BEAT_PREFIX))
            .max()
            .unwrap_or(0);
        chart.reseed_counters(floor);
        Ok(Self {
            name: doc.name,
            chart,
            snapshots: SnapshotLog::from_entries(doc.snapshots),
        })
    }
}

/// On-disk shape of a project; field order is the key order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectDocument {
    pub version: u32,
    pub name: String,
    pub specs: Vec<ExperienceSpec>,
    pub beats: Vec<Beat>,
    pub edges: Vec<DependencyEdge>,
    pub snapshots: Vec<PathSnapshot>,
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("malformed project document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported schema version {0} (this build reads version 1)")]
    SchemaVersionUnsupported(u32),
    #[error("project violates chart invariants: {}", list(.0))]
    Integrity(Vec<Violation>),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn list(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

pub fn to_bytes(project: &Project) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(&project.to_document()).expect("documents serialize");
    bytes.push(b'\n');
    bytes
}

pub fn from_slice(bytes: &[u8]) -> Result<Project, StoreError> {
    // Peek at the version first so future documents with new fields report
    // the version rather than a field error.
    #[derive(Deserialize)]
    struct Version {
        version: u32,
    }
    let Version { version } = serde_json::from_slice(bytes)?;
    if version != SCHEMA_VERSION {
        return Err(StoreError::SchemaVersionUnsupported(version));
    }
    Project::from_document(serde_json::from_slice(bytes)?)
}

/// Writes the project and returns the number of bytes written.
pub fn save(project: &Project, sink: &mut impl Write) -> Result<usize, StoreError> {
    let bytes = to_bytes(project);
    sink.write_all(&bytes)?;
    Ok(bytes.len())
}

pub fn load(source: &mut impl Read) -> Result<Project, StoreError> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    from_slice(&bytes)
}

pub fn save_file(project: &Project, path: &std::path::Path) -> Result<usize, StoreError> {
    let bytes = to_bytes(project);
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, &bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(bytes.len())
}

pub fn load_file(path: &std::path::Path) -> Result<Project, StoreError> {
    from_slice(&std::fs::read(path)?)
}
