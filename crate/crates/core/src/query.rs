//! Diagram requests shared by the command line and the HTTP service, so
//! both produce the same bytes for the same query.
//!
//! A paths spec lists paths separated by `;`. Each entry is either a saved
//! snapshot id or a comma-separated list of beat ids or names:
//!
//! ```text
//! 1-small,2-small,3-small;snap-2
//! ```

use serde::Deserialize;
use thiserror::Error;

use crate::chart::ChartError;
use crate::diagram::{
    category_diagram, intensity_diagram, DiagramData, DiagramError, DiagramKind, IntensitySetting,
    TimeAxisMode,
};
use crate::export::{to_csv, to_svg};
use crate::paths::{Path, PathError, WeightMode};
use crate::store::Project;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QueryError {
    #[error("empty paths spec")]
    NoPaths,
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

impl From<ChartError> for QueryError {
    fn from(e: ChartError) -> Self {
        QueryError::Path(PathError::Chart(e))
    }
}

/// Resolves a paths spec against a project.
pub fn resolve_paths(project: &Project, spec: &str) -> Result<Vec<Path>, QueryError> {
    let mut paths = Vec::new();
    for entry in spec.split(';').map(str::trim).filter(|e| !e.is_empty()) {
        if !entry.contains(',') {
            if let Some(snapshot) = project.snapshots.get(entry) {
                paths.push(snapshot.path.clone());
                continue;
            }
        }
        let beats = entry
            .split(',')
            .map(|b| project.chart.resolve_beat(b.trim()))
            .collect::<Result<Vec<_>, _>>()?;
        paths.push(Path::from_beats(
            &project.chart,
            beats,
            WeightMode::HopCount,
        )?);
    }
    if paths.is_empty() {
        return Err(QueryError::NoPaths);
    }
    Ok(paths)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Svg,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct DiagramRequest {
    pub kind: DiagramKind,
    pub paths: String,
    #[serde(default = "default_setting")]
    pub setting: IntensitySetting,
    #[serde(default = "default_mode")]
    pub mode: String,
    #[serde(default)]
    pub timescale: Option<u32>,
    /// Comma-separated series ids to hide.
    #[serde(default)]
    pub hidden: Option<String>,
}

fn default_setting() -> IntensitySetting {
    IntensitySetting::Computed
}

fn default_mode() -> String {
    "beat".to_owned()
}

impl DiagramRequest {
    pub fn build(&self, project: &Project) -> Result<DiagramData, QueryError> {
        let axis = TimeAxisMode::parse(&self.mode, self.timescale)?;
        let paths = resolve_paths(project, &self.paths)?;
        let mut diagram = match self.kind {
            DiagramKind::Intensity => {
                intensity_diagram(&project.chart, &paths, self.setting, axis)?
            }
            DiagramKind::Category => category_diagram(&project.chart, &paths, axis)?,
        };
        for id in self.hidden.iter().flat_map(|h| h.split(',')).map(str::trim) {
            if !id.is_empty() && !diagram.is_hidden(id) {
                diagram.toggle_hidden(id)?;
            }
        }
        Ok(diagram)
    }

    pub fn export(&self, project: &Project, format: ExportFormat) -> Result<Vec<u8>, QueryError> {
        let diagram = self.build(project)?;
        Ok(match format {
            ExportFormat::Csv => to_csv(&diagram),
            ExportFormat::Svg => to_svg(&diagram),
        })
    }
}
