//! Generates the World 1-1 chart from its section description and prints
//! each section's beats with their intensity and category.

use std::collections::BTreeMap;

use pacemaker::level::{build_demo_chart, parse_beat_name, world_1_1};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let level = world_1_1();
    let project = build_demo_chart(&level)?;
    let chart = &project.chart;
    println!(
        "{}: {} sections, {} beats, {} edges, {} specs",
        level.name,
        level.sections.len(),
        chart.beats().len(),
        chart.edges().len(),
        chart.specs().len()
    );

    let mut by_section: BTreeMap<u32, Vec<String>> = BTreeMap::new();
    for beat in chart.beats() {
        let (section, state) = parse_beat_name(&beat.name)?;
        let spec = chart
            .spec_of(&beat.id)
            .expect("generated beats carry specs");
        by_section.entry(section).or_default().push(format!(
            "{state} ({}, {})",
            spec.gameplay_intensity, spec.gameplay_category
        ));
    }
    for (section, beats) in by_section {
        println!("section {section:>2}: {}", beats.join(", "));
    }

    // the first five sections alone
    let opening = build_demo_chart(&level.prefix(5))?;
    let mut names: Vec<&str> = opening.chart.beats().map(|b| b.name.as_str()).collect();
    names.sort();
    println!("\nopening beats: {}", names.join(" "));
    Ok(())
}
