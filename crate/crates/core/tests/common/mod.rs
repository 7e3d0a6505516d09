//! Random inputs and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use pacemaker::chart::{BeatId, ExperienceChart, Position, SpecDraft};
use pacemaker::diagram::{
    CategoryTimeline, DiagramData, DiagramKind, IntensitySeries, Point, Segment, TimeAxisMode,
};
use pacemaker::paths::{Path, WeightMode};
use pacemaker::store::Project;
use rand::rngs::StdRng;
use rand::Rng;

pub const CATEGORIES: [&str; 5] = ["Platforming", "Enemy", "Pit", "Reward", "Cinematic, intro"];

pub fn random_draft(rng: &mut StdRng, i: usize) -> SpecDraft {
    SpecDraft {
        name: format!("spec {i}"),
        description: if rng.gen_bool(0.5) {
            String::new()
        } else {
            format!("\"quoted\", line {i}")
        },
        narrative_intensity: f64::from(rng.gen_range(0..=200u32)) / 2.0,
        gameplay_intensity: f64::from(rng.gen_range(0..=200u32)) / 2.0,
        gameplay_category: CATEGORIES[rng.gen_range(0..CATEGORIES.len())].to_owned(),
        expected_playtime: f64::from(rng.gen_range(0..=240u32)) / 4.0,
    }
}

/// `n` beats named `b0..`, each ordered pair joined with probability
/// `density`, and roughly half the beats carrying one of a few specs.
pub fn random_chart(rng: &mut StdRng, n: usize, density: f64) -> (ExperienceChart, Vec<BeatId>) {
    let mut chart = ExperienceChart::new();
    let specs: Vec<_> = (0..rng.gen_range(1..=4))
        .map(|i| chart.add_spec(random_draft(rng, i)).unwrap())
        .collect();
    let beats: Vec<BeatId> = (0..n)
        .map(|i| {
            let spec = rng
                .gen_bool(0.8)
                .then(|| specs[rng.gen_range(0..specs.len())].clone());
            chart.add_beat(format!("b{i}"), spec).unwrap()
        })
        .collect();
    for from in &beats {
        for to in &beats {
            if from != to && rng.gen_bool(density) {
                chart.add_edge(from, to).unwrap();
            }
        }
    }
    (chart, beats)
}

/// Like [`random_chart`] but every beat has a spec.
pub fn random_specced_chart(
    rng: &mut StdRng,
    n: usize,
    density: f64,
) -> (ExperienceChart, Vec<BeatId>) {
    let (mut chart, beats) = random_chart(rng, n, density);
    let spec = chart.specs().next().unwrap().id.clone();
    for b in &beats {
        if chart.spec_of(b).is_none() {
            chart.assign_spec(b, Some(spec.clone())).unwrap();
        }
    }
    (chart, beats)
}

/// Breadth-first hop distance.
pub fn bfs_distance(chart: &ExperienceChart, from: &BeatId, to: &BeatId) -> Option<usize> {
    let mut dist = BTreeMap::from([(from.clone(), 0usize)]);
    let mut queue = VecDeque::from([from.clone()]);
    while let Some(b) = queue.pop_front() {
        if &b == to {
            return dist.get(&b).copied();
        }
        let d = dist[&b];
        for e in chart.edges().filter(|e| e.from == b) {
            if !dist.contains_key(&e.to) {
                dist.insert(e.to.clone(), d + 1);
                queue.push_back(e.to.clone());
            }
        }
    }
    None
}

/// Every simple path from `from` to `to`, by plain recursion over the
/// edge list.
pub fn simple_paths(chart: &ExperienceChart, from: &BeatId, to: &BeatId) -> Vec<Vec<BeatId>> {
    fn go(
        chart: &ExperienceChart,
        current: &mut Vec<BeatId>,
        to: &BeatId,
        out: &mut Vec<Vec<BeatId>>,
    ) {
        let last = current.last().unwrap().clone();
        if &last == to {
            out.push(current.clone());
            return;
        }
        for e in chart.edges().filter(|e| e.from == last) {
            if !current.contains(&e.to) {
                current.push(e.to.clone());
                go(chart, current, to, out);
                current.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(chart, &mut vec![from.clone()], to, &mut out);
    out
}

pub fn path_weight(chart: &ExperienceChart, beats: &[BeatId], mode: WeightMode) -> f64 {
    beats
        .windows(2)
        .map(|w| mode.edge_weight(chart, &w[1]))
        .sum()
}

/// Minimum weight over all simple paths.
pub fn brute_force_min(
    chart: &ExperienceChart,
    from: &BeatId,
    to: &BeatId,
    mode: WeightMode,
) -> Option<f64> {
    simple_paths(chart, from, to)
        .iter()
        .map(|p| path_weight(chart, p, mode))
        .min_by(f64::total_cmp)
}

/// A random walk from `start` of at most `max_len` beats.
pub fn random_walk(
    rng: &mut StdRng,
    chart: &ExperienceChart,
    start: &BeatId,
    max_len: usize,
) -> Path {
    let mut beats = vec![start.clone()];
    while beats.len() < max_len {
        let next = chart.successors(beats.last().unwrap());
        if next.is_empty() {
            break;
        }
        let pick = next[rng.gen_range(0..next.len())].clone();
        beats.push(pick);
    }
    Path::from_beats(chart, beats, WeightMode::HopCount).unwrap()
}

/// A project with a random chart, some snapshots (some stale) and
/// positions, reaching every serialized field.
pub fn random_project(rng: &mut StdRng) -> Project {
    let n = rng.gen_range(0..10);
    let density = rng.gen_range(0.0..0.6);
    let (chart, beats) = random_chart(rng, n, density);
    let mut project = Project::with_chart(format!("project \"{}\"", rng.gen::<u16>()), chart);
    for b in &beats {
        if rng.gen_bool(0.3) {
            let position = Position {
                x: rng.gen_range(-1000.0..1000.0),
                y: rng.gen_range(-1000.0..1000.0),
            };
            project.chart.set_position(b, Some(position)).unwrap();
        }
    }
    if let Some(start) = beats.first() {
        for i in 0..rng.gen_range(0..3) {
            let path = random_walk(rng, &project.chart, start, 5);
            project.snapshots.take(path, format!("snap {i}"));
        }
        if rng.gen_bool(0.3) {
            let victim = beats[rng.gen_range(0..beats.len())].clone();
            project.chart.remove_beat(&victim).unwrap();
        }
    }
    project
}

/// Diagram data whose numbers survive six-decimal CSV formatting.
pub fn random_diagram(rng: &mut StdRng) -> DiagramData {
    let kind = if rng.gen_bool(0.5) {
        DiagramKind::Intensity
    } else {
        DiagramKind::Category
    };
    let mut d = DiagramData::empty(kind, TimeAxisMode::Beat);
    let settings = ["Computed", "Gameplay", "Narrative"];
    for p in 0..rng.gen_range(1..4) {
        match kind {
            DiagramKind::Intensity => {
                for setting in &settings[..rng.gen_range(1..=3)] {
                    let mut x = 0.0;
                    let points = (0..rng.gen_range(1..12))
                        .map(|_| {
                            x += f64::from(rng.gen_range(1..=40u32)) / 4.0;
                            Point {
                                x,
                                y: f64::from(rng.gen_range(0..=200u32)) / 2.0,
                            }
                        })
                        .collect();
                    d.series.push(IntensitySeries {
                        path_id: format!("path {}", p + 1),
                        setting: (*setting).to_owned(),
                        points,
                    });
                }
            }
            DiagramKind::Category => {
                let mut start = 0.0;
                let segments = (0..rng.gen_range(1..10))
                    .map(|_| {
                        let length = f64::from(rng.gen_range(1..=40u32)) / 4.0;
                        let s = Segment {
                            category: CATEGORIES[rng.gen_range(0..CATEGORIES.len())].to_owned(),
                            start,
                            length,
                        };
                        start += length;
                        s
                    })
                    .collect();
                d.timelines.push(CategoryTimeline {
                    path_id: format!("path {}", p + 1),
                    segments,
                });
            }
        }
    }
    let ids: Vec<String> = d.series_ids();
    for id in ids {
        if rng.gen_bool(0.25) {
            d.toggle_hidden(&id).unwrap();
        }
    }
    d
}

/// `(path, series, x, y)` for intensity and `(path, index, category,
/// start, length)` for category diagrams, as plain tuples.
pub fn intensity_tuples(d: &DiagramData) -> Vec<(String, String, f64, f64)> {
    d.series
        .iter()
        .flat_map(|s| {
            s.points
                .iter()
                .map(|p| (s.path_id.clone(), s.setting.clone(), p.x, p.y))
        })
        .collect()
}

pub fn category_tuples(d: &DiagramData) -> Vec<(String, usize, String, f64, f64)> {
    d.timelines
        .iter()
        .flat_map(|t| {
            t.segments
                .iter()
                .enumerate()
                .map(|(i, s)| (t.path_id.clone(), i, s.category.clone(), s.start, s.length))
        })
        .collect()
}

pub fn visible_series(d: &DiagramData) -> usize {
    d.series_ids().iter().filter(|id| !d.is_hidden(id)).count()
}

pub fn names(chart: &ExperienceChart, beats: &[BeatId]) -> Vec<String> {
    beats
        .iter()
        .map(|b| chart.beat(b).unwrap().name.clone())
        .collect()
}

pub fn name_set(chart: &ExperienceChart) -> BTreeSet<String> {
    chart.beats().map(|b| b.name.clone()).collect()
}

/// Sends one request through the router and returns status, revision
/// (from `ETag`) and the body.
pub async fn call(
    app: &axum::Router,
    method: &str,
    uri: &str,
    body: Option<serde_json::Value>,
    if_match: Option<u64>,
) -> (axum::http::StatusCode, Option<u64>, Vec<u8>) {
    use http_body_util::BodyExt;
    use tower::ServiceExt;

    let mut request = axum::http::Request::builder().method(method).uri(uri);
    if let Some(revision) = if_match {
        request = request.header("if-match", format!("\"{revision}\""));
    }
    let request = match body {
        Some(json) => request
            .header("content-type", "application/json")
            .body(axum::body::Body::from(json.to_string())),
        None => request.body(axum::body::Body::empty()),
    }
    .unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let revision = response
        .headers()
        .get("etag")
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.trim_matches('"').parse().ok());
    let bytes = response
        .into_body()
        .collect()
        .await
        .unwrap()
        .to_bytes()
        .to_vec();
    (status, revision, bytes)
}

pub fn json(bytes: &[u8]) -> serde_json::Value {
    serde_json::from_slice(bytes)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(bytes)))
}
