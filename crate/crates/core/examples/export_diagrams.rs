//! Writes a pacing diagram as CSV and SVG, then reads the CSV back.
//!
//! Usage: `cargo run --example export_diagrams [OUT_DIR]`

use pacemaker::diagram::DiagramKind;
use pacemaker::export::parse_csv;
use pacemaker::level::{build_demo_chart, world_1_1};
use pacemaker::query::{DiagramRequest, ExportFormat};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .map_or_else(std::env::temp_dir, Into::into);
    let project = build_demo_chart(&world_1_1())?;
    let request = DiagramRequest {
        kind: DiagramKind::Intensity,
        paths: "1-small,2-small,3-small,4-small,5-small;1-small,2-big,3-big,4-big,5-big".into(),
        setting: pacemaker::diagram::IntensitySetting::All,
        mode: "time".into(),
        timescale: Some(5),
        hidden: Some("path 2/Narrative".into()),
    };

    let csv = request.export(&project, ExportFormat::Csv)?;
    let svg = request.export(&project, ExportFormat::Svg)?;
    let csv_file = out.join("world-1-1-intensity.csv");
    let svg_file = out.join("world-1-1-intensity.svg");
    std::fs::write(&csv_file, &csv)?;
    std::fs::write(&svg_file, &svg)?;
    println!("wrote {} and {}", csv_file.display(), svg_file.display());

    let text = String::from_utf8(csv)?;
    for line in text.lines().take(4) {
        println!("  {line}");
    }
    let back = parse_csv(&text)?.into_diagram();
    println!("read back {} series", back.series.len());
    Ok(())
}
