//! CSV and SVG serialization of [`DiagramData`].
//!
//! Both writers are deterministic. CSV carries every series, hidden or not;
//! SVG draws only the visible ones.
//!
//! CSV layout: a `# kind: intensity|category` line, then either
//! `path,series,x,y` rows or `path,segment_index,category,start,length`
//! rows. Numbers are rounded to six decimals with trailing zeros dropped.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::diagram::{
    AxisMeta, CategoryTimeline, DiagramData, DiagramKind, IntensitySeries, Point, Segment,
    TimeAxisMode,
};

pub const INTENSITY_HEADER: &str = "path,series,x,y";
pub const CATEGORY_HEADER: &str = "path,segment_index,category,start,length";

pub const SVG_WIDTH: f64 = 960.0;
pub const SVG_HEIGHT: f64 = 540.0;

pub const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("missing `# kind:` line")]
    MissingKind,
    #[error("unknown diagram kind `{0}`")]
    UnknownKind(String),
    #[error("expected header `{expected}`, found `{found}`")]
    BadHeader {
        expected: &'static str,
        found: String,
    },
    #[error("line {line}: {message}")]
    BadRow { line: usize, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Renders a number with at most six decimals and no trailing zeros.
pub fn format_number(value: f64) -> String {
    format_fixed(value, 6)
}

fn format_fixed(value: f64, decimals: usize) -> String {
    let mut s = format!("{value:.decimals$}");
    if s.contains('.') {
        let trimmed = s.trim_end_matches('0').trim_end_matches('.').len();
        s.truncate(trimmed);
    }
    if s == "-0" {
        s = "0".to_owned();
    }
    s
}

/// The value a number reads back as after a CSV round trip.
pub fn quantize(value: f64) -> f64 {
    format_number(value)
        .parse()
        .expect("formatted numbers parse")
}

fn csv_writer(out: &mut Vec<u8>) -> csv::Writer<&mut Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .has_headers(false)
        .from_writer(out)
}

pub fn to_csv(diagram: &DiagramData) -> Vec<u8> {
    let mut out = format!("# kind: {}\n", diagram.kind).into_bytes();
    match diagram.kind {
        DiagramKind::Intensity => {
            out.extend_from_slice(INTENSITY_HEADER.as_bytes());
            out.push(b'\n');
            let mut w = csv_writer(&mut out);
            for series in &diagram.series {
                for p in &series.points {
                    w.write_record([
                        series.path_id.as_str(),
                        series.setting.as_str(),
                        &format_number(p.x),
                        &format_number(p.y),
                    ])
                    .expect("writing to memory");
                }
            }
            w.flush().expect("writing to memory");
        }
        DiagramKind::Category => {
            out.extend_from_slice(CATEGORY_HEADER.as_bytes());
            out.push(b'\n');
            let mut w = csv_writer(&mut out);
            for timeline in &diagram.timelines {
                for (i, s) in timeline.segments.iter().enumerate() {
                    w.write_record([
                        timeline.path_id.as_str(),
                        &i.to_string(),
                        s.category.as_str(),
                        &format_number(s.start),
                        &format_number(s.length),
                    ])
                    .expect("writing to memory");
                }
            }
            w.flush().expect("writing to memory");
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntensityRow {
    pub path: String,
    pub series: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CategoryRow {
    pub path: String,
    pub segment_index: usize,
    pub category: String,
    pub start: f64,
    pub length: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CsvTable {
    Intensity(Vec<IntensityRow>),
    Category(Vec<CategoryRow>),
}

impl CsvTable {
    /// Rebuilds diagram data from parsed rows, grouping consecutive rows
    /// that share a path (and series). Axis metadata is not part of the CSV
    /// and comes back as a beat axis.
    pub fn into_diagram(self) -> DiagramData {
        match self {
            CsvTable::Intensity(rows) => {
                let mut d = DiagramData::empty(DiagramKind::Intensity, TimeAxisMode::Beat);
                for row in rows {
                    let same = d
                        .series
                        .last()
                        .is_some_and(|s| s.path_id == row.path && s.setting == row.series);
                    if !same {
                        d.series.push(IntensitySeries {
                            path_id: row.path,
                            setting: row.series,
                            points: Vec::new(),
                        });
                    }
                    let series = d.series.last_mut().expect("pushed above");
                    series.points.push(Point { x: row.x, y: row.y });
                    d.axis.x_max = d.axis.x_max.max(row.x);
                }
                d
            }
            CsvTable::Category(rows) => {
                let mut d = DiagramData::empty(DiagramKind::Category, TimeAxisMode::Beat);
                for row in rows {
                    if d.timelines.last().is_none_or(|t| t.path_id != row.path) {
                        d.timelines.push(CategoryTimeline {
                            path_id: row.path,
                            segments: Vec::new(),
                        });
                    }
                    d.axis.x_max = d.axis.x_max.max(row.start + row.length);
                    d.timelines
                        .last_mut()
                        .expect("pushed above")
                        .segments
                        .push(Segment {
                            category: row.category,
                            start: row.start,
                            length: row.length,
                        });
                }
                d
            }
        }
    }
}

fn parse_number(field: &str, line: usize) -> Result<f64, ExportError> {
    field.parse().map_err(|_| ExportError::BadRow {
        line,
        message: format!("`{field}` is not a number"),
    })
}

/// Parses a document produced by [`to_csv`].
pub fn parse_csv(input: &str) -> Result<CsvTable, ExportError> {
    let (first, rest) = input.split_once('\n').unwrap_or((input, ""));
    let kind = first
        .strip_prefix("# kind: ")
        .ok_or(ExportError::MissingKind)?
        .trim_end_matches('\r');
    let (header, body) = rest.split_once('\n').unwrap_or((rest, ""));
    let expected = match kind {
        "intensity" => INTENSITY_HEADER,
        "category" => CATEGORY_HEADER,
        other => return Err(ExportError::UnknownKind(other.to_owned())),
    };
    if header.trim_end_matches('\r') != expected {
        return Err(ExportError::BadHeader {
            expected,
            found: header.to_owned(),
        });
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(body.as_bytes());
    let width = expected.split(',').count();
    let mut intensity = Vec::new();
    let mut category = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let line = i + 3;
        if record.len() != width {
            return Err(ExportError::BadRow {
                line,
                message: format!("expected {width} fields, found {}", record.len()),
            });
        }
        if kind == "intensity" {
            intensity.push(IntensityRow {
                path: record[0].to_owned(),
                series: record[1].to_owned(),
                x: parse_number(&record[2], line)?,
                y: parse_number(&record[3], line)?,
            });
        } else {
            category.push(CategoryRow {
                path: record[0].to_owned(),
                segment_index: record[1].parse().map_err(|_| ExportError::BadRow {
                    line,
                    message: format!("`{}` is not a segment index", &record[1]),
                })?,
                category: record[2].to_owned(),
                start: parse_number(&record[3], line)?,
                length: parse_number(&record[4], line)?,
            });
        }
    }
    Ok(if kind == "intensity" {
        CsvTable::Intensity(intensity)
    } else {
        CsvTable::Category(category)
    })
}

fn escape_xml(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    for c in raw.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

fn coord(v: f64) -> String {
    format_fixed(v, 2)
}

/// Tick step from the 1-2-5 ladder giving at most ten intervals.
fn tick_step(span: f64) -> f64 {
    let mut magnitude = 10f64.powi(span.log10().floor() as i32 - 1);
    loop {
        for m in [1.0, 2.0, 5.0] {
            if span / (m * magnitude) <= 10.0 {
                return m * magnitude;
            }
        }
        magnitude *= 10.0;
    }
}

struct Frame {
    left: f64,
    right: f64,
    top: f64,
    bottom: f64,
    x_span: f64,
}

impl Frame {
    fn new(axis: &AxisMeta) -> Self {
        Self {
            left: 70.0,
            right: 760.0,
            top: 30.0,
            bottom: 480.0,
            x_span: if axis.x_max > 0.0 { axis.x_max } else { 1.0 },
        }
    }

    fn x(&self, value: f64) -> f64 {
        self.left + value / self.x_span * (self.right - self.left)
    }

    fn y_percent(&self, value: f64) -> f64 {
        self.bottom - value / 100.0 * (self.bottom - self.top)
    }
}

fn write_x_axis(svg: &mut String, frame: &Frame, axis: &AxisMeta) {
    let _ = writeln!(
        svg,
        r#"<line class="axis" x1="{l}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/>"#,
        l = coord(frame.left),
        r = coord(frame.right),
        b = coord(frame.bottom),
    );
    let step = tick_step(frame.x_span);
    let mut k = 0u32;
    loop {
        let value = f64::from(k) * step;
        if value > frame.x_span + step * 1e-9 {
            break;
        }
        let x = coord(frame.x(value));
        let _ = writeln!(
            svg,
            r#"<line class="tick" x1="{x}" y1="{b}" x2="{x}" y2="{b2}" stroke="black"/><text x="{x}" y="{ty}" font-size="11" text-anchor="middle">{label}</text>"#,
            b = coord(frame.bottom),
            b2 = coord(frame.bottom + 5.0),
            ty = coord(frame.bottom + 18.0),
            label = format_fixed(value, 3),
        );
        k += 1;
    }
    let _ = writeln!(
        svg,
        r#"<text x="{x}" y="{y}" font-size="12" text-anchor="middle">{label}</text>"#,
        x = coord((frame.left + frame.right) / 2.0),
        y = coord(frame.bottom + 40.0),
        label = escape_xml(&axis.x_label),
    );
}

fn write_y_axis(svg: &mut String, frame: &Frame, label: &str) {
    let _ = writeln!(
        svg,
        r#"<line class="axis" x1="{l}" y1="{t}" x2="{l}" y2="{b}" stroke="black"/>"#,
        l = coord(frame.left),
        t = coord(frame.top),
        b = coord(frame.bottom),
    );
    let _ = writeln!(
        svg,
        r#"<text x="20" y="{y}" font-size="12" text-anchor="middle" transform="rotate(-90 20 {y})">{label}</text>"#,
        y = coord((frame.top + frame.bottom) / 2.0),
        label = escape_xml(label),
    );
}

fn write_legend_entry(
    svg: &mut String,
    row: usize,
    color: &str,
    label: &str,
    hidden: bool,
    line: bool,
) {
    let y = 40.0 + row as f64 * 20.0;
    let opacity = if hidden { r#" opacity="0.35""# } else { "" };
    let _ = write!(svg, r#"<g class="legend-entry"{opacity}>"#);
    if line {
        let _ = write!(
            svg,
            r#"<line x1="780" y1="{y}" x2="800" y2="{y}" stroke="{color}" stroke-width="3"/>"#,
            y = coord(y),
        );
    } else {
        let _ = write!(
            svg,
            r#"<rect x="780" y="{y}" width="20" height="10" fill="{color}"/>"#,
            y = coord(y - 5.0),
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="808" y="{y}" font-size="12">{label}</text></g>"#,
        y = coord(y + 4.0),
        label = escape_xml(label),
    );
}

pub fn to_svg(diagram: &DiagramData) -> Vec<u8> {
    let frame = Frame::new(&diagram.axis);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w} {h}" width="{w}" height="{h}">"#,
        w = SVG_WIDTH,
        h = SVG_HEIGHT,
    );
    let _ = writeln!(
        svg,
        r#"<rect x="0" y="0" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" fill="white"/>"#
    );
    write_x_axis(&mut svg, &frame, &diagram.axis);
    match diagram.kind {
        DiagramKind::Intensity => write_intensity(&mut svg, &frame, diagram),
        DiagramKind::Category => write_category(&mut svg, &frame, diagram),
    }
    svg.push_str("</svg>\n");
    svg.into_bytes()
}

fn write_intensity(svg: &mut String, frame: &Frame, diagram: &DiagramData) {
    write_y_axis(svg, frame, &diagram.axis.y_label);
    for tick in [0.0, 25.0, 50.0, 75.0, 100.0] {
        let y = coord(frame.y_percent(tick));
        let _ = writeln!(
            svg,
            r#"<line class="tick" x1="{l2}" y1="{y}" x2="{l}" y2="{y}" stroke="black"/><text x="{tx}" y="{ty}" font-size="11" text-anchor="end">{label}</text>"#,
            l = coord(frame.left),
            l2 = coord(frame.left - 5.0),
            tx = coord(frame.left - 8.0),
            ty = coord(frame.y_percent(tick) + 4.0),
            label = format_fixed(tick, 0),
        );
    }
    for (index, series) in diagram.series.iter().enumerate() {
        let color = PALETTE[index % PALETTE.len()];
        let id = series.id();
        let hidden = diagram.is_hidden(&id);
        write_legend_entry(
            svg,
            index,
            color,
            &format!("{} {}", series.path_id, series.setting),
            hidden,
            true,
        );
        if hidden {
            continue;
        }
        let points: Vec<String> = series
            .points
            .iter()
            .map(|p| format!("{},{}", coord(frame.x(p.x)), coord(frame.y_percent(p.y))))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline data-series="{id}" fill="none" stroke="{color}" stroke-width="2" points="{points}"/>"#,
            id = escape_xml(&id),
            points = points.join(" "),
        );
    }
}

fn write_category(svg: &mut String, frame: &Frame, diagram: &DiagramData) {
    write_y_axis(svg, frame, &diagram.axis.y_label);
    let mut categories: Vec<&str> = Vec::new();
    for t in &diagram.timelines {
        for s in &t.segments {
            if !categories.contains(&s.category.as_str()) {
                categories.push(&s.category);
            }
        }
    }
    let color_of = |category: &str| {
        let i = categories.iter().position(|c| *c == category).unwrap_or(0);
        PALETTE[i % PALETTE.len()]
    };
    let rows = diagram.timelines.len().max(1) as f64;
    let row_height = (frame.bottom - frame.top) / rows;
    let bar = (row_height * 0.6).min(40.0);
    let visible: BTreeSet<usize> = diagram
        .timelines
        .iter()
        .enumerate()
        .filter(|(_, t)| !diagram.is_hidden(&t.id()))
        .map(|(i, _)| i)
        .collect();
    for (row, timeline) in diagram.timelines.iter().enumerate() {
        let center = frame.top + (row as f64 + 0.5) * row_height;
        let _ = writeln!(
            svg,
            r#"<text x="{x}" y="{y}" font-size="11" text-anchor="end">{label}</text>"#,
            x = coord(frame.left - 8.0),
            y = coord(center + 4.0),
            label = escape_xml(&timeline.path_id),
        );
        if !visible.contains(&row) {
            continue;
        }
        let _ = writeln!(
            svg,
            r#"<g class="timeline" data-series="{}">"#,
            escape_xml(&timeline.id())
        );
        for s in &timeline.segments {
            let x0 = frame.x(s.start);
            let x1 = frame.x(s.start + s.length);
            let _ = writeln!(
                svg,
                r#"<rect x="{x}" y="{y}" width="{w}" height="{h}" fill="{fill}" stroke="white"><title>{title}</title></rect>"#,
                x = coord(x0),
                y = coord(center - bar / 2.0),
                w = coord(x1 - x0),
                h = coord(bar),
                fill = color_of(&s.category),
                title = escape_xml(&s.category),
            );
        }
        svg.push_str("</g>\n");
    }
    let mut row = 0;
    for (i, timeline) in diagram.timelines.iter().enumerate() {
        write_legend_entry(
            svg,
            row,
            "#000000",
            &timeline.path_id,
            !visible.contains(&i),
            true,
        );
        row += 1;
    }
    for category in &categories {
        write_legend_entry(svg, row, color_of(category), category, false, false);
        row += 1;
    }
}
