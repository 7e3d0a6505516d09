//! Path selection over an [`ExperienceChart`].
//!
//! Shortest paths use Dijkstra with `(weight, beat-id sequence)` labels, so
//! among equally heavy paths the lexicographically smallest id sequence wins.
//! Weights are nonnegative in every mode.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, BinaryHeap, HashMap};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::chart::{BeatId, ChartError, ExperienceChart};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    /// Every edge costs 1.
    #[default]
    HopCount,
    /// An edge costs the expected playtime of its target beat's spec
    /// (0 when the target has no spec).
    ExpectedPlaytime,
}

impl WeightMode {
    pub fn edge_weight(self, chart: &ExperienceChart, target: &BeatId) -> f64 {
        match self {
            WeightMode::HopCount => 1.0,
            WeightMode::ExpectedPlaytime => {
                chart.spec_of(target).map_or(0.0, |s| s.expected_playtime)
            }
        }
    }
}

/// An ordered sequence of beats joined by chart edges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub beats: Vec<BeatId>,
    pub total_weight: f64,
}

impl Path {
    pub fn single(beat: BeatId) -> Self {
        Self {
            beats: vec![beat],
            total_weight: 0.0,
        }
    }

    /// Builds a path from an explicit beat list, checking every hop.
    pub fn from_beats(
        chart: &ExperienceChart,
        beats: Vec<BeatId>,
        mode: WeightMode,
    ) -> Result<Self, PathError> {
        if beats.is_empty() {
            return Err(PathError::Empty);
        }
        for beat in &beats {
            if !chart.contains_beat(beat) {
                return Err(ChartError::UnknownBeat(beat.to_string()).into());
            }
        }
        let mut total_weight = 0.0;
        for pair in beats.windows(2) {
            if !chart.has_edge(&pair[0], &pair[1]) {
                return Err(PathError::MissingEdge {
                    from: pair[0].clone(),
                    to: pair[1].clone(),
                });
            }
            total_weight += mode.edge_weight(chart, &pair[1]);
        }
        Ok(Self {
            beats,
            total_weight,
        })
    }

    pub fn len(&self) -> usize {
        self.beats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beats.is_empty()
    }

    pub fn first(&self) -> &BeatId {
        &self.beats[0]
    }

    pub fn last(&self) -> &BeatId {
        &self.beats[self.beats.len() - 1]
    }

    pub fn contains(&self, beat: &BeatId) -> bool {
        self.beats.contains(beat)
    }

    /// True when every beat exists and every consecutive pair is an edge.
    pub fn is_valid_in(&self, chart: &ExperienceChart) -> bool {
        !self.beats.is_empty()
            && self.beats.iter().all(|b| chart.contains_beat(b))
            && self.beats.windows(2).all(|p| chart.has_edge(&p[0], &p[1]))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PathError {
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error("a path needs at least one beat")]
    Empty,
    #[error("no edge from `{from}` to `{to}`")]
    MissingEdge { from: BeatId, to: BeatId },
}

/// Start, ordered intermediate beats, end.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathQuery {
    pub start: BeatId,
    #[serde(default)]
    pub via: Vec<BeatId>,
    pub end: BeatId,
    #[serde(default)]
    pub weight_mode: WeightMode,
}

/// Read-only adjacency view with beats indexed in id order, so comparing
/// index sequences compares id sequences.
struct Graph<'a> {
    ids: Vec<&'a BeatId>,
    index: HashMap<&'a BeatId, usize>,
    out: Vec<Vec<(usize, f64)>>,
}

impl<'a> Graph<'a> {
    fn new(chart: &'a ExperienceChart, mode: WeightMode) -> Self {
        let mut ids: Vec<&BeatId> = chart.beats().map(|b| &b.id).collect();
        ids.sort();
        let index: HashMap<&BeatId, usize> =
            ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
        let mut out = vec![Vec::new(); ids.len()];
        for edge in chart.edges() {
            if let (Some(&from), Some(&to)) = (index.get(&edge.from), index.get(&edge.to)) {
                out[from].push((to, mode.edge_weight(chart, &edge.to)));
            }
        }
        for list in &mut out {
            list.sort_by_key(|&(to, _)| to);
        }
        Self { ids, index, out }
    }

    fn node(&self, id: &BeatId) -> Result<usize, ChartError> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| ChartError::UnknownBeat(id.to_string()))
    }

    fn to_ids(&self, nodes: &[usize]) -> Vec<BeatId> {
        nodes.iter().map(|&i| self.ids[i].clone()).collect()
    }

    fn dijkstra(&self, source: usize, target: usize) -> Option<(Vec<usize>, f64)> {
        let mut best: Vec<Option<Label>> = vec![None; self.ids.len()];
        let mut settled = vec![false; self.ids.len()];
        let mut heap = BinaryHeap::new();
        let start = Label {
            cost: 0.0,
            nodes: vec![source],
        };
        best[source] = Some(start.clone());
        heap.push(Reverse(start));
        while let Some(Reverse(label)) = heap.pop() {
            let node = *label.nodes.last().expect("labels are never empty");
            if settled[node] {
                continue;
            }
            settled[node] = true;
            if node == target {
                return Some((label.nodes, label.cost));
            }
            for &(next, weight) in &self.out[node] {
                if settled[next] {
                    continue;
                }
                let mut nodes = label.nodes.clone();
                nodes.push(next);
                let candidate = Label {
                    cost: label.cost + weight,
                    nodes,
                };
                if best[next].as_ref().is_none_or(|cur| candidate < *cur) {
                    best[next] = Some(candidate.clone());
                    heap.push(Reverse(candidate));
                }
            }
        }
        None
    }
}

#[derive(Clone, Debug)]
struct Label {
    cost: f64,
    nodes: Vec<usize>,
}

impl PartialEq for Label {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Label {}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Label {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then_with(|| self.nodes.cmp(&other.nodes))
    }
}

/// Minimum-weight path from `from` to `to`, or `None` when unreachable.
pub fn shortest_path(
    chart: &ExperienceChart,
    from: &BeatId,
    to: &BeatId,
    mode: WeightMode,
) -> Result<Option<Path>, ChartError> {
    let graph = Graph::new(chart, mode);
    let source = graph.node(from)?;
    let target = graph.node(to)?;
    Ok(graph
        .dijkstra(source, target)
        .map(|(nodes, total_weight)| Path {
            beats: graph.to_ids(&nodes),
            total_weight,
        }))
}

/// Minimum-hop path. The chart may be cyclic, so this is the shortest
/// rather than the longest dependency chain.
pub fn critical_path(
    chart: &ExperienceChart,
    from: &BeatId,
    to: &BeatId,
) -> Result<Option<Path>, ChartError> {
    shortest_path(chart, from, to, WeightMode::HopCount)
}

/// Stitches shortest segments `start -> via.. -> end`, visiting the
/// waypoints in order. Segments are simple on their own; the stitched
/// result may revisit a beat.
pub fn waypoint_path(
    chart: &ExperienceChart,
    query: &PathQuery,
) -> Result<Option<Path>, ChartError> {
    let graph = Graph::new(chart, query.weight_mode);
    let mut stops = Vec::with_capacity(query.via.len() + 2);
    stops.push(graph.node(&query.start)?);
    for via in &query.via {
        stops.push(graph.node(via)?);
    }
    stops.push(graph.node(&query.end)?);

    let mut nodes = vec![stops[0]];
    let mut total_weight = 0.0;
    for leg in stops.windows(2) {
        let Some((segment, weight)) = graph.dijkstra(leg[0], leg[1]) else {
            return Ok(None);
        };
        nodes.extend_from_slice(&segment[1..]);
        total_weight += weight;
    }
    Ok(Some(Path {
        beats: graph.to_ids(&nodes),
        total_weight,
    }))
}

pub const DEFAULT_MAX_ROUTES: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RouteSet {
    pub routes: Vec<Path>,
    /// More routes existed than `max_routes`.
    pub truncated: bool,
}

/// Every simple path from any source to any sink, in lexicographic order of
/// beat-id sequence, weighted by hop count.
pub fn enumerate_routes(
    chart: &ExperienceChart,
    sources: &[BeatId],
    sinks: &[BeatId],
    max_routes: usize,
) -> Result<RouteSet, ChartError> {
    let graph = Graph::new(chart, WeightMode::HopCount);
    let mut starts = sources
        .iter()
        .map(|s| graph.node(s))
        .collect::<Result<Vec<_>, _>>()?;
    starts.sort_unstable();
    starts.dedup();
    let mut is_sink = vec![false; graph.ids.len()];
    for sink in sinks {
        is_sink[graph.node(sink)?] = true;
    }

    let mut found = Vec::new();
    let mut truncated = false;
    let mut on_path = vec![false; graph.ids.len()];
    let mut stack = Vec::new();

    // Iterative DFS: each frame is (node, next child position). Preorder
    // emission plus sorted children yields lexicographic order.
    'sources: for start in starts {
        stack.push((start, 0usize));
        on_path[start] = true;
        if is_sink[start] {
            found.push(vec![start]);
        }
        while let Some(&mut (node, ref mut child)) = stack.last_mut() {
            if found.len() > max_routes {
                truncated = true;
                break 'sources;
            }
            match graph.out[node].get(*child) {
                Some(&(next, _)) => {
                    *child += 1;
                    if on_path[next] {
                        continue;
                    }
                    on_path[next] = true;
                    stack.push((next, 0));
                    if is_sink[next] {
                        found.push(stack.iter().map(|&(n, _)| n).collect());
                    }
                }
                None => {
                    on_path[node] = false;
                    stack.pop();
                }
            }
        }
    }
    if found.len() > max_routes {
        truncated = true;
        found.truncate(max_routes);
    }
    Ok(RouteSet {
        routes: found
            .iter()
            .map(|nodes| Path {
                beats: graph.to_ids(nodes),
                total_weight: (nodes.len() - 1) as f64,
            })
            .collect(),
        truncated,
    })
}

/// Boolean condition over the beats a path visits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoutePredicate {
    ContainsAnyOf(BTreeSet<BeatId>),
    ContainsNoneOf(BTreeSet<BeatId>),
    And(Vec<RoutePredicate>),
    Or(Vec<RoutePredicate>),
    Not(Box<RoutePredicate>),
}

impl RoutePredicate {
    pub fn holds(&self, path: &Path) -> bool {
        match self {
            RoutePredicate::ContainsAnyOf(set) => path.beats.iter().any(|b| set.contains(b)),
            RoutePredicate::ContainsNoneOf(set) => !path.beats.iter().any(|b| set.contains(b)),
            RoutePredicate::And(all) => all.iter().all(|p| p.holds(path)),
            RoutePredicate::Or(any) => any.iter().any(|p| p.holds(path)),
            RoutePredicate::Not(inner) => !inner.holds(path),
        }
    }

    /// Beats referenced anywhere in the predicate.
    pub fn beats(&self) -> Vec<&BeatId> {
        match self {
            RoutePredicate::ContainsAnyOf(set) | RoutePredicate::ContainsNoneOf(set) => {
                set.iter().collect()
            }
            RoutePredicate::And(list) | RoutePredicate::Or(list) => {
                list.iter().flat_map(RoutePredicate::beats).collect()
            }
            RoutePredicate::Not(inner) => inner.beats(),
        }
    }

    /// Rewrites beat references (ids or unique names) into ids.
    pub fn resolve(&self, chart: &ExperienceChart) -> Result<Self, ChartError> {
        let resolve_set = |set: &BTreeSet<BeatId>| {
            set.iter()
                .map(|b| chart.resolve_beat(b.as_str()))
                .collect::<Result<BTreeSet<_>, _>>()
        };
        Ok(match self {
            RoutePredicate::ContainsAnyOf(set) => RoutePredicate::ContainsAnyOf(resolve_set(set)?),
            RoutePredicate::ContainsNoneOf(set) => {
                RoutePredicate::ContainsNoneOf(resolve_set(set)?)
            }
            RoutePredicate::And(list) => RoutePredicate::And(
                list.iter()
                    .map(|p| p.resolve(chart))
                    .collect::<Result<_, _>>()?,
            ),
            RoutePredicate::Or(list) => RoutePredicate::Or(
                list.iter()
                    .map(|p| p.resolve(chart))
                    .collect::<Result<_, _>>()?,
            ),
            RoutePredicate::Not(inner) => RoutePredicate::Not(Box::new(inner.resolve(chart)?)),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RouteRule {
    pub label: String,
    pub predicate: RoutePredicate,
}

impl RouteRule {
    pub fn new(label: impl Into<String>, predicate: RoutePredicate) -> Self {
        Self {
            label: label.into(),
            predicate,
        }
    }
}

/// Labels of every rule whose predicate holds, in rule order.
pub fn classify_route(path: &Path, rules: &[RouteRule]) -> Vec<String> {
    rules
        .iter()
        .filter(|r| r.predicate.holds(path))
        .map(|r| r.label.clone())
        .collect()
}

/// A frozen copy of a path, kept for comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSnapshot {
    pub id: String,
    pub label: String,
    pub path: Path,
    pub created_at: DateTime<Utc>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnapshotStatus {
    Fresh,
    Stale,
}

pub const SNAPSHOT_PREFIX: &str = "snap-";

/// Append-only list of snapshots with its own id counter.
#[derive(Clone, Debug, Default)]
pub struct SnapshotLog {
    entries: Vec<PathSnapshot>,
    next: u64,
}

impl PartialEq for SnapshotLog {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl SnapshotLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: Vec<PathSnapshot>) -> Self {
        let next = entries
            .iter()
            .filter_map(|s| crate::chart::id_counter(&s.id, SNAPSHOT_PREFIX))
            .max()
            .unwrap_or(0);
        Self { entries, next }
    }

    pub fn take(&mut self, path: Path, label: impl Into<String>) -> &PathSnapshot {
        self.take_at(path, label, Utc::now())
    }

    pub fn take_at(
        &mut self,
        path: Path,
        label: impl Into<String>,
        created_at: DateTime<Utc>,
    ) -> &PathSnapshot {
        self.next += 1;
        self.entries.push(PathSnapshot {
            id: format!("{SNAPSHOT_PREFIX}{}", self.next),
            label: label.into(),
            path,
            created_at,
        });
        self.entries.last().expect("just pushed")
    }

    pub fn get(&self, id: &str) -> Option<&PathSnapshot> {
        self.entries.iter().find(|s| s.id == id)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, PathSnapshot> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn as_slice(&self) -> &[PathSnapshot] {
        &self.entries
    }
}

/// Stale iff a beat or hop of the frozen path no longer exists.
pub fn validate_snapshot(chart: &ExperienceChart, snapshot: &PathSnapshot) -> SnapshotStatus {
    if snapshot.path.is_valid_in(chart) {
        SnapshotStatus::Fresh
    } else {
        SnapshotStatus::Stale
    }
}
