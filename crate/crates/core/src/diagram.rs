//! Pacing-diagram data: intensity series and gameplay-category timelines
//! along one or more paths, over event time (beats) or play time (seconds).

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chart::{BeatId, ExperienceChart, ExperienceSpec};
use crate::paths::Path;

/// Allowed play-time resolutions, in seconds.
pub const TIMESCALES: [u32; 8] = [1, 2, 5, 10, 30, 60, 120, 300];

/// Length given to zero-playtime beats in play-time diagrams so they stay
/// visible and x stays strictly increasing.
pub const ZERO_PLAYTIME_EPSILON: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntensitySetting {
    Computed,
    Gameplay,
    Narrative,
    All,
}

impl IntensitySetting {
    /// The scalar settings this one expands to.
    pub fn expand(self) -> &'static [IntensitySetting] {
        match self {
            IntensitySetting::Computed => &[IntensitySetting::Computed],
            IntensitySetting::Gameplay => &[IntensitySetting::Gameplay],
            IntensitySetting::Narrative => &[IntensitySetting::Narrative],
            IntensitySetting::All => &[
                IntensitySetting::Computed,
                IntensitySetting::Gameplay,
                IntensitySetting::Narrative,
            ],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            IntensitySetting::Computed => "Computed",
            IntensitySetting::Gameplay => "Gameplay",
            IntensitySetting::Narrative => "Narrative",
            IntensitySetting::All => "All",
        }
    }

    fn value(self, spec: &ExperienceSpec) -> f64 {
        match self {
            IntensitySetting::Computed | IntensitySetting::All => spec.computed_intensity(),
            IntensitySetting::Gameplay => spec.gameplay_intensity,
            IntensitySetting::Narrative => spec.narrative_intensity,
        }
    }
}

impl FromStr for IntensitySetting {
    type Err = DiagramError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "computed" => Ok(IntensitySetting::Computed),
            "gameplay" => Ok(IntensitySetting::Gameplay),
            "narrative" => Ok(IntensitySetting::Narrative),
            "all" => Ok(IntensitySetting::All),
            _ => Err(DiagramError::BadSetting(s.to_owned())),
        }
    }
}

/// Event time (one unit per beat) or play time at a fixed resolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum TimeAxisMode {
    Beat,
    Time { timescale: u32 },
}

impl TimeAxisMode {
    pub fn time(timescale: u32) -> Result<Self, DiagramError> {
        if TIMESCALES.contains(&timescale) {
            Ok(TimeAxisMode::Time { timescale })
        } else {
            Err(DiagramError::BadTimescale(timescale))
        }
    }

    /// Parses `beat` / `time`, the latter requiring a timescale.
    pub fn parse(mode: &str, timescale: Option<u32>) -> Result<Self, DiagramError> {
        match mode.to_ascii_lowercase().as_str() {
            "beat" => Ok(TimeAxisMode::Beat),
            "time" => Self::time(timescale.unwrap_or(TIMESCALES[0])),
            _ => Err(DiagramError::BadMode(mode.to_owned())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagramKind {
    Intensity,
    Category,
}

impl fmt::Display for DiagramKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DiagramKind::Intensity => "intensity",
            DiagramKind::Category => "category",
        })
    }
}

impl FromStr for DiagramKind {
    type Err = DiagramError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "intensity" => Ok(DiagramKind::Intensity),
            "category" => Ok(DiagramKind::Category),
            _ => Err(DiagramError::BadKind(s.to_owned())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntensitySeries {
    /// `path 1`, `path 2`, ... in request order.
    pub path_id: String,
    pub setting: String,
    pub points: Vec<Point>,
}

impl IntensitySeries {
    /// Stable identifier used for hiding, e.g. `path 2/Gameplay`.
    pub fn id(&self) -> String {
        format!("{}/{}", self.path_id, self.setting)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub category: String,
    pub start: f64,
    pub length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CategoryTimeline {
    pub path_id: String,
    pub segments: Vec<Segment>,
}

impl CategoryTimeline {
    pub fn id(&self) -> String {
        self.path_id.clone()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisMeta {
    pub axis: TimeAxisMode,
    pub x_label: String,
    pub y_label: String,
    pub x_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagramData {
    pub kind: DiagramKind,
    pub series: Vec<IntensitySeries>,
    pub timelines: Vec<CategoryTimeline>,
    pub axis: AxisMeta,
    /// Series or timeline ids left out of rendering; their data stays.
    pub hidden: BTreeSet<String>,
}

impl DiagramData {
    pub fn empty(kind: DiagramKind, axis: TimeAxisMode) -> Self {
        Self {
            kind,
            series: Vec::new(),
            timelines: Vec::new(),
            axis: axis_meta(kind, axis, 0.0),
            hidden: BTreeSet::new(),
        }
    }

    pub fn series_ids(&self) -> Vec<String> {
        self.series
            .iter()
            .map(IntensitySeries::id)
            .chain(self.timelines.iter().map(CategoryTimeline::id))
            .collect()
    }

    pub fn is_hidden(&self, id: &str) -> bool {
        self.hidden.contains(id)
    }

    /// Flips whether a series (or timeline) is hidden.
    pub fn toggle_hidden(&mut self, id: &str) -> Result<(), DiagramError> {
        if !self.series_ids().iter().any(|s| s == id) {
            return Err(DiagramError::UnknownSeries(id.to_owned()));
        }
        if !self.hidden.remove(id) {
            self.hidden.insert(id.to_owned());
        }
        Ok(())
    }
}

/// Consuming form of [`DiagramData::toggle_hidden`].
pub fn toggle_hidden(mut diagram: DiagramData, id: &str) -> Result<DiagramData, DiagramError> {
    diagram.toggle_hidden(id)?;
    Ok(diagram)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagramError {
    #[error("path {index} is not a valid path in this chart")]
    InvalidPath { index: usize },
    #[error("beat `{0}` has no experience specification")]
    MissingSpec(BeatId),
    #[error("unknown series `{0}`")]
    UnknownSeries(String),
    #[error("unsupported timescale {0}s (allowed: 1, 2, 5, 10, 30, 60, 120, 300)")]
    BadTimescale(u32),
    #[error("unknown intensity setting `{0}`")]
    BadSetting(String),
    #[error("unknown axis mode `{0}`")]
    BadMode(String),
    #[error("unknown diagram kind `{0}`")]
    BadKind(String),
}

pub fn path_label(index: usize) -> String {
    format!("path {}", index + 1)
}

fn axis_meta(kind: DiagramKind, axis: TimeAxisMode, x_max: f64) -> AxisMeta {
    let x_label = match axis {
        TimeAxisMode::Beat => "beat",
        TimeAxisMode::Time { .. } => "time (s)",
    };
    let y_label = match kind {
        DiagramKind::Intensity => "intensity",
        DiagramKind::Category => "category",
    };
    AxisMeta {
        axis,
        x_label: x_label.to_owned(),
        y_label: y_label.to_owned(),
        x_max,
    }
}

fn check_paths(chart: &ExperienceChart, paths: &[Path]) -> Result<(), DiagramError> {
    match paths.iter().position(|p| !p.is_valid_in(chart)) {
        Some(index) => Err(DiagramError::InvalidPath { index }),
        None => Ok(()),
    }
}

/// Number of samples a beat contributes in play-time mode.
pub fn samples_for(playtime: f64, timescale: u32) -> usize {
    ((playtime / f64::from(timescale)).ceil() as usize).max(1)
}

fn timed_length(playtime: f64) -> f64 {
    if playtime > 0.0 {
        playtime
    } else {
        ZERO_PLAYTIME_EPSILON
    }
}

fn sample_path(
    chart: &ExperienceChart,
    path: &Path,
    setting: IntensitySetting,
    axis: TimeAxisMode,
) -> Vec<Point> {
    let mut points = Vec::new();
    let mut clock = 0.0;
    for (index, beat) in path.beats.iter().enumerate() {
        let Some(spec) = chart.spec_of(beat) else {
            continue;
        };
        let y = setting.value(spec);
        match axis {
            TimeAxisMode::Beat => points.push(Point { x: index as f64, y }),
            TimeAxisMode::Time { timescale } => {
                let step = f64::from(timescale);
                for k in 0..samples_for(spec.expected_playtime, timescale) {
                    points.push(Point {
                        x: clock + k as f64 * step,
                        y,
                    });
                }
                clock += timed_length(spec.expected_playtime);
            }
        }
    }
    points
}

/// One series per path and per scalar setting (`All` gives three).
pub fn intensity_diagram(
    chart: &ExperienceChart,
    paths: &[Path],
    setting: IntensitySetting,
    axis: TimeAxisMode,
) -> Result<DiagramData, DiagramError> {
    check_paths(chart, paths)?;
    let mut series = Vec::new();
    let mut x_max: f64 = 0.0;
    for (index, path) in paths.iter().enumerate() {
        for &scalar in setting.expand() {
            let points = sample_path(chart, path, scalar, axis);
            if let Some(last) = points.last() {
                x_max = x_max.max(last.x);
            }
            series.push(IntensitySeries {
                path_id: path_label(index),
                setting: scalar.label().to_owned(),
                points,
            });
        }
        if let TimeAxisMode::Time { .. } = axis {
            let total: f64 = path
                .beats
                .iter()
                .filter_map(|b| chart.spec_of(b))
                .map(|s| timed_length(s.expected_playtime))
                .sum();
            x_max = x_max.max(total);
        }
    }
    Ok(DiagramData {
        kind: DiagramKind::Intensity,
        series,
        timelines: Vec::new(),
        axis: axis_meta(DiagramKind::Intensity, axis, x_max),
        hidden: BTreeSet::new(),
    })
}

/// One timeline per path; every beat must carry a spec.
pub fn category_diagram(
    chart: &ExperienceChart,
    paths: &[Path],
    axis: TimeAxisMode,
) -> Result<DiagramData, DiagramError> {
    check_paths(chart, paths)?;
    let mut timelines = Vec::new();
    let mut x_max: f64 = 0.0;
    for (index, path) in paths.iter().enumerate() {
        let mut segments = Vec::with_capacity(path.len());
        let mut clock = 0.0;
        for beat in &path.beats {
            let spec = chart
                .spec_of(beat)
                .ok_or_else(|| DiagramError::MissingSpec(beat.clone()))?;
            let length = match axis {
                TimeAxisMode::Beat => 1.0,
                TimeAxisMode::Time { .. } => timed_length(spec.expected_playtime),
            };
            segments.push(Segment {
                category: spec.gameplay_category.clone(),
                start: clock,
                length,
            });
            clock += length;
        }
        x_max = x_max.max(clock);
        timelines.push(CategoryTimeline {
            path_id: path_label(index),
            segments,
        });
    }
    Ok(DiagramData {
        kind: DiagramKind::Category,
        series: Vec::new(),
        timelines,
        axis: axis_meta(DiagramKind::Category, axis, x_max),
        hidden: BTreeSet::new(),
    })
}
