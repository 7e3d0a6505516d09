//! The experience chart: beats, dependency edges and the catalog of
//! experience specifications assigned to them.
//!
//! All mutation goes through [`ExperienceChart`] methods, which keep the
//! chart referentially intact. Cycles are allowed; self-loops and duplicate
//! `(from, to)` pairs are not.

use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(raw: impl Into<String>) -> Self {
                Self(raw.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(raw: &str) -> Self {
                Self(raw.to_owned())
            }
        }
    };
}

string_id!(
    /// Identifier of a beat, e.g. `beat-3`.
    BeatId
);
string_id!(
    /// Identifier of an experience specification, e.g. `spec-1`.
    SpecId
);
string_id!(
    /// Identifier of a dependency edge, e.g. `edge-12`.
    EdgeId
);

pub const BEAT_PREFIX: &str = "beat-";
pub const SPEC_PREFIX: &str = "spec-";
pub const EDGE_PREFIX: &str = "edge-";

/// Numeric suffix of an engine-generated id such as `beat-17`.
pub(crate) fn id_counter(raw: &str, prefix: &str) -> Option<u64> {
    raw.strip_prefix(prefix)?.parse().ok()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

/// A node of the experience chart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Beat {
    pub id: BeatId,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<SpecId>,
    /// Layout hint for editors; never read by the engine.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<Position>,
}

/// `to` follows after `from`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyEdge {
    pub id: EdgeId,
    pub from: BeatId,
    pub to: BeatId,
}

/// Rhythmic parameters shared by every beat the spec is assigned to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperienceSpec {
    pub id: SpecId,
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub narrative_intensity: f64,
    pub gameplay_intensity: f64,
    pub gameplay_category: String,
    /// Seconds.
    pub expected_playtime: f64,
}

impl ExperienceSpec {
    /// Overall intensity: the exact mean of narrative and gameplay intensity.
    pub fn computed_intensity(&self) -> f64 {
        computed_intensity(self.narrative_intensity, self.gameplay_intensity)
    }
}

pub fn computed_intensity(narrative: f64, gameplay: f64) -> f64 {
    (narrative + gameplay) / 2.0
}

/// Everything needed to create or overwrite a spec, minus its id.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecDraft {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub narrative_intensity: f64,
    pub gameplay_intensity: f64,
    pub gameplay_category: String,
    pub expected_playtime: f64,
}

impl SpecDraft {
    fn into_spec(self, id: SpecId) -> ExperienceSpec {
        ExperienceSpec {
            id,
            name: self.name,
            description: self.description,
            narrative_intensity: self.narrative_intensity,
            gameplay_intensity: self.gameplay_intensity,
            gameplay_category: self.gameplay_category,
            expected_playtime: self.expected_playtime,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChartError {
    #[error("unknown beat `{0}`")]
    UnknownBeat(String),
    #[error("unknown spec `{0}`")]
    UnknownSpec(String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("edge from `{0}` to itself")]
    SelfLoop(BeatId),
    #[error("edge `{from}` -> `{to}` already exists")]
    DuplicateEdge { from: BeatId, to: BeatId },
    #[error("invalid spec: {0}")]
    InvalidSpec(Violation),
    #[error("beat name `{0}` matches more than one beat")]
    AmbiguousBeat(String),
}

/// A broken chart invariant, as reported by [`ExperienceChart::validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Violation {
    DanglingEdge {
        edge: EdgeId,
        missing: BeatId,
    },
    SelfLoop {
        edge: EdgeId,
    },
    DuplicateEdge {
        edge: EdgeId,
        from: BeatId,
        to: BeatId,
    },
    UnknownSpec {
        beat: BeatId,
        spec: SpecId,
    },
    IntensityOutOfRange {
        spec: SpecId,
        field: String,
        value: f64,
    },
    NegativePlaytime {
        spec: SpecId,
        value: f64,
    },
    EmptyCategory {
        spec: SpecId,
    },
    EmptyId {
        element: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DanglingEdge { edge, missing } => {
                write!(f, "edge {edge} points at missing beat {missing}")
            }
            Violation::SelfLoop { edge } => write!(f, "edge {edge} is a self-loop"),
            Violation::DuplicateEdge { edge, from, to } => {
                write!(f, "edge {edge} duplicates {from} -> {to}")
            }
            Violation::UnknownSpec { beat, spec } => {
                write!(f, "beat {beat} references missing spec {spec}")
            }
            Violation::IntensityOutOfRange { spec, field, value } => {
                write!(f, "spec {spec}: {field} = {value} is outside [0, 100]")
            }
            Violation::NegativePlaytime { spec, value } => {
                write!(f, "spec {spec}: expected_playtime = {value} is negative")
            }
            Violation::EmptyCategory { spec } => write!(f, "spec {spec}: empty gameplay category"),
            Violation::EmptyId { element } => write!(f, "{element} has an empty id"),
        }
    }
}

fn intensity_in_range(value: f64) -> bool {
    (0.0..=100.0).contains(&value)
}

fn spec_violations(spec: &ExperienceSpec) -> Vec<Violation> {
    let mut out = Vec::new();
    for (field, value) in [
        ("narrative_intensity", spec.narrative_intensity),
        ("gameplay_intensity", spec.gameplay_intensity),
    ] {
        if !intensity_in_range(value) {
            out.push(Violation::IntensityOutOfRange {
                spec: spec.id.clone(),
                field: field.to_owned(),
                value,
            });
        }
    }
    // also catches NaN
    if !spec.expected_playtime.is_finite() || spec.expected_playtime < 0.0 {
        out.push(Violation::NegativePlaytime {
            spec: spec.id.clone(),
            value: spec.expected_playtime,
        });
    }
    if spec.gameplay_category.is_empty() {
        out.push(Violation::EmptyCategory {
            spec: spec.id.clone(),
        });
    }
    out
}

/// Directed graph of beats plus the spec catalog.
///
/// Ids are handed out from per-kind monotonic counters and never reused
/// within a session, so removed ids stay detectably gone (see snapshots).
#[derive(Clone, Debug, Default)]
pub struct ExperienceChart {
    pub(crate) beats: IndexMap<BeatId, Beat>,
    pub(crate) edges: IndexMap<EdgeId, DependencyEdge>,
    pub(crate) specs: IndexMap<SpecId, ExperienceSpec>,
    next_beat: u64,
    next_edge: u64,
    next_spec: u64,
}

impl PartialEq for ExperienceChart {
    fn eq(&self, other: &Self) -> bool {
        self.beats == other.beats && self.edges == other.edges && self.specs == other.specs
    }
}

impl ExperienceChart {
    pub fn new() -> Self {
        Self::default()
    }

    /// Assembles a chart from stored parts without checking invariants.
    /// Callers should run [`validate`](Self::validate) afterwards.
    pub fn from_parts(
        specs: Vec<ExperienceSpec>,
        beats: Vec<Beat>,
        edges: Vec<DependencyEdge>,
    ) -> Self {
        let mut chart = Self {
            beats: beats.into_iter().map(|b| (b.id.clone(), b)).collect(),
            edges: edges.into_iter().map(|e| (e.id.clone(), e)).collect(),
            specs: specs.into_iter().map(|s| (s.id.clone(), s)).collect(),
            ..Self::default()
        };
        chart.reseed_counters(0);
        chart
    }

    /// Moves every id counter past the largest id in use, and past `floor`.
    pub(crate) fn reseed_counters(&mut self, floor: u64) {
        let max_of = |ids: &mut dyn Iterator<Item = &str>, prefix: &str| {
            ids.filter_map(|raw| id_counter(raw, prefix))
                .max()
                .unwrap_or(0)
        };
        self.next_beat = self
            .next_beat
            .max(max_of(
                &mut self.beats.keys().map(BeatId::as_str),
                BEAT_PREFIX,
            ))
            .max(floor);
        self.next_edge = self.next_edge.max(max_of(
            &mut self.edges.keys().map(EdgeId::as_str),
            EDGE_PREFIX,
        ));
        self.next_spec = self.next_spec.max(max_of(
            &mut self.specs.keys().map(SpecId::as_str),
            SPEC_PREFIX,
        ));
    }

    pub fn beats(&self) -> impl ExactSizeIterator<Item = &Beat> {
        self.beats.values()
    }

    pub fn edges(&self) -> impl ExactSizeIterator<Item = &DependencyEdge> {
        self.edges.values()
    }

    pub fn specs(&self) -> impl ExactSizeIterator<Item = &ExperienceSpec> {
        self.specs.values()
    }

    pub fn beat(&self, id: &BeatId) -> Option<&Beat> {
        self.beats.get(id)
    }

    pub fn edge(&self, id: &EdgeId) -> Option<&DependencyEdge> {
        self.edges.get(id)
    }

    pub fn spec(&self, id: &SpecId) -> Option<&ExperienceSpec> {
        self.specs.get(id)
    }

    /// The spec assigned to `beat`, if any.
    pub fn spec_of(&self, beat: &BeatId) -> Option<&ExperienceSpec> {
        self.beats
            .get(beat)?
            .spec
            .as_ref()
            .and_then(|s| self.specs.get(s))
    }

    pub fn contains_beat(&self, id: &BeatId) -> bool {
        self.beats.contains_key(id)
    }

    pub fn find_edge(&self, from: &BeatId, to: &BeatId) -> Option<&DependencyEdge> {
        self.edges.values().find(|e| &e.from == from && &e.to == to)
    }

    pub fn has_edge(&self, from: &BeatId, to: &BeatId) -> bool {
        self.find_edge(from, to).is_some()
    }

    /// Successors of `beat`, sorted by id.
    pub fn successors(&self, beat: &BeatId) -> Vec<&BeatId> {
        let mut out: Vec<&BeatId> = self
            .edges
            .values()
            .filter(|e| &e.from == beat)
            .map(|e| &e.to)
            .collect();
        out.sort();
        out
    }

    /// Looks a beat up by id, falling back to a unique display name.
    pub fn resolve_beat(&self, reference: &str) -> Result<BeatId, ChartError> {
        let id = BeatId::from(reference);
        if self.beats.contains_key(&id) {
            return Ok(id);
        }
        let mut named = self.beats.values().filter(|b| b.name == reference);
        match (named.next(), named.next()) {
            (Some(beat), None) => Ok(beat.id.clone()),
            (Some(_), Some(_)) => Err(ChartError::AmbiguousBeat(reference.to_owned())),
            _ => Err(ChartError::UnknownBeat(reference.to_owned())),
        }
    }

    /// Like [`resolve_beat`](Self::resolve_beat), but a trailing `*` matches
    /// every beat whose name starts with the rest of the pattern.
    pub fn resolve_beats(&self, pattern: &str) -> Result<Vec<BeatId>, ChartError> {
        match pattern.strip_suffix('*') {
            Some(prefix) => {
                let found: Vec<BeatId> = self
                    .beats
                    .values()
                    .filter(|b| b.name.starts_with(prefix))
                    .map(|b| b.id.clone())
                    .collect();
                if found.is_empty() {
                    Err(ChartError::UnknownBeat(pattern.to_owned()))
                } else {
                    Ok(found)
                }
            }
            None => self.resolve_beat(pattern).map(|id| vec![id]),
        }
    }

    pub fn resolve_spec(&self, reference: &str) -> Result<SpecId, ChartError> {
        let id = SpecId::from(reference);
        if self.specs.contains_key(&id) {
            return Ok(id);
        }
        let mut named = self.specs.values().filter(|s| s.name == reference);
        match (named.next(), named.next()) {
            (Some(spec), None) => Ok(spec.id.clone()),
            _ => Err(ChartError::UnknownSpec(reference.to_owned())),
        }
    }

    fn require_beat(&self, id: &BeatId) -> Result<(), ChartError> {
        if self.beats.contains_key(id) {
            Ok(())
        } else {
            Err(ChartError::UnknownBeat(id.to_string()))
        }
    }

    fn require_spec(&self, id: &SpecId) -> Result<(), ChartError> {
        if self.specs.contains_key(id) {
            Ok(())
        } else {
            Err(ChartError::UnknownSpec(id.to_string()))
        }
    }

    pub fn add_spec(&mut self, draft: SpecDraft) -> Result<SpecId, ChartError> {
        let id = SpecId::new(format!("{SPEC_PREFIX}{}", self.next_spec + 1));
        let spec = draft.into_spec(id.clone());
        if let Some(v) = spec_violations(&spec).into_iter().next() {
            return Err(ChartError::InvalidSpec(v));
        }
        self.next_spec += 1;
        self.specs.insert(id.clone(), spec);
        Ok(id)
    }

    /// Overwrites every field of an existing spec.
    pub fn update_spec(&mut self, id: &SpecId, draft: SpecDraft) -> Result<(), ChartError> {
        self.require_spec(id)?;
        let spec = draft.into_spec(id.clone());
        if let Some(v) = spec_violations(&spec).into_iter().next() {
            return Err(ChartError::InvalidSpec(v));
        }
        self.specs.insert(id.clone(), spec);
        Ok(())
    }

    /// Deletes a spec and unassigns it from every beat; returns how many
    /// beats lost their assignment.
    pub fn remove_spec(&mut self, id: &SpecId) -> Result<usize, ChartError> {
        self.require_spec(id)?;
        self.specs.shift_remove(id);
        let mut unassigned = 0;
        for beat in self.beats.values_mut() {
            if beat.spec.as_ref() == Some(id) {
                beat.spec = None;
                unassigned += 1;
            }
        }
        Ok(unassigned)
    }

    pub fn add_beat(
        &mut self,
        name: impl Into<String>,
        spec: Option<SpecId>,
    ) -> Result<BeatId, ChartError> {
        if let Some(spec) = &spec {
            self.require_spec(spec)?;
        }
        self.next_beat += 1;
        let id = BeatId::new(format!("{BEAT_PREFIX}{}", self.next_beat));
        self.beats.insert(
            id.clone(),
            Beat {
                id: id.clone(),
                name: name.into(),
                spec,
                position: None,
            },
        );
        Ok(id)
    }

    pub fn rename_beat(&mut self, id: &BeatId, name: impl Into<String>) -> Result<(), ChartError> {
        let beat = self
            .beats
            .get_mut(id)
            .ok_or_else(|| ChartError::UnknownBeat(id.to_string()))?;
        beat.name = name.into();
        Ok(())
    }

    pub fn set_position(
        &mut self,
        id: &BeatId,
        position: Option<Position>,
    ) -> Result<(), ChartError> {
        let beat = self
            .beats
            .get_mut(id)
            .ok_or_else(|| ChartError::UnknownBeat(id.to_string()))?;
        beat.position = position;
        Ok(())
    }

    /// Removes a beat and every edge touching it; returns the number of
    /// edges removed.
    pub fn remove_beat(&mut self, id: &BeatId) -> Result<usize, ChartError> {
        self.require_beat(id)?;
        self.beats.shift_remove(id);
        let before = self.edges.len();
        self.edges.retain(|_, e| &e.from != id && &e.to != id);
        Ok(before - self.edges.len())
    }

    /// Sets (or with `None` clears) the spec of a beat, returning the
    /// previous assignment.
    pub fn assign_spec(
        &mut self,
        beat: &BeatId,
        spec: Option<SpecId>,
    ) -> Result<Option<SpecId>, ChartError> {
        self.require_beat(beat)?;
        if let Some(spec) = &spec {
            self.require_spec(spec)?;
        }
        let slot = &mut self.beats.get_mut(beat).expect("checked above").spec;
        Ok(std::mem::replace(slot, spec))
    }

    fn check_edge(
        &self,
        from: &BeatId,
        to: &BeatId,
        ignore: Option<&EdgeId>,
    ) -> Result<(), ChartError> {
        self.require_beat(from)?;
        self.require_beat(to)?;
        if from == to {
            return Err(ChartError::SelfLoop(from.clone()));
        }
        let clash = self
            .edges
            .values()
            .any(|e| Some(&e.id) != ignore && &e.from == from && &e.to == to);
        if clash {
            return Err(ChartError::DuplicateEdge {
                from: from.clone(),
                to: to.clone(),
            });
        }
        Ok(())
    }

    pub fn add_edge(&mut self, from: &BeatId, to: &BeatId) -> Result<EdgeId, ChartError> {
        self.check_edge(from, to, None)?;
        self.next_edge += 1;
        let id = EdgeId::new(format!("{EDGE_PREFIX}{}", self.next_edge));
        self.edges.insert(
            id.clone(),
            DependencyEdge {
                id: id.clone(),
                from: from.clone(),
                to: to.clone(),
            },
        );
        Ok(id)
    }

    /// Moves one or both endpoints of an existing edge.
    pub fn reconnect_edge(
        &mut self,
        id: &EdgeId,
        from: Option<BeatId>,
        to: Option<BeatId>,
    ) -> Result<(), ChartError> {
        let edge = self
            .edges
            .get(id)
            .ok_or_else(|| ChartError::UnknownEdge(id.to_string()))?;
        let from = from.unwrap_or_else(|| edge.from.clone());
        let to = to.unwrap_or_else(|| edge.to.clone());
        self.check_edge(&from, &to, Some(id))?;
        let edge = self.edges.get_mut(id).expect("checked above");
        edge.from = from;
        edge.to = to;
        Ok(())
    }

    pub fn remove_edge(&mut self, id: &EdgeId) -> Result<DependencyEdge, ChartError> {
        self.edges
            .shift_remove(id)
            .ok_or_else(|| ChartError::UnknownEdge(id.to_string()))
    }

    /// Lists every broken invariant; empty means the chart is well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (key, spec) in &self.specs {
            if key.as_str().is_empty() || key != &spec.id {
                out.push(Violation::EmptyId {
                    element: format!("spec `{}`", spec.name),
                });
            }
            out.extend(spec_violations(spec));
        }
        for (key, beat) in &self.beats {
            if key.as_str().is_empty() || key != &beat.id {
                out.push(Violation::EmptyId {
                    element: format!("beat `{}`", beat.name),
                });
            }
            if let Some(spec) = &beat.spec {
                if !self.specs.contains_key(spec) {
                    out.push(Violation::UnknownSpec {
                        beat: beat.id.clone(),
                        spec: spec.clone(),
                    });
                }
            }
        }
        let mut seen = std::collections::HashSet::new();
        for (key, edge) in &self.edges {
            if key.as_str().is_empty() || key != &edge.id {
                out.push(Violation::EmptyId {
                    element: format!("edge {} -> {}", edge.from, edge.to),
                });
            }
            for end in [&edge.from, &edge.to] {
                if !self.beats.contains_key(end) {
                    out.push(Violation::DanglingEdge {
                        edge: edge.id.clone(),
                        missing: end.clone(),
                    });
                }
            }
            if edge.from == edge.to {
                out.push(Violation::SelfLoop {
                    edge: edge.id.clone(),
                });
            }
            if !seen.insert((&edge.from, &edge.to)) {
                out.push(Violation::DuplicateEdge {
                    edge: edge.id.clone(),
                    from: edge.from.clone(),
                    to: edge.to.clone(),
                });
            }
        }
        out
    }
}
