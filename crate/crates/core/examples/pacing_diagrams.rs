//! Compares three World 1-1 routes as intensity and category diagrams, on
//! the beat axis and on a ten-second play-time axis.

use pacemaker::diagram::{category_diagram, intensity_diagram, IntensitySetting, TimeAxisMode};
use pacemaker::level::{build_demo_chart, world_1_1};
use pacemaker::paths::{Path, WeightMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let project = build_demo_chart(&world_1_1())?;
    let chart = &project.chart;
    let route = |names: &str| -> Result<Path, Box<dyn std::error::Error>> {
        let beats = names
            .split(',')
            .map(|n| chart.resolve_beat(n))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Path::from_beats(chart, beats, WeightMode::HopCount)?)
    };
    let paths = [
        route("1-small,2-small,3-small,4-small,5-small,6-small,7-small,8-small,9-small,10-small,11-small,12-small,13-small")?,
        route("1-small,2-big,3-big,4-big,5-big,6-big,7-big,8-big-star,9-big-star,10-big,11-big,12-big,13-big")?,
        route("1-small,2-small,3-small,4-small,14-small,12-small,13-small")?,
    ];

    let beats = intensity_diagram(
        chart,
        &paths,
        IntensitySetting::Computed,
        TimeAxisMode::Beat,
    )?;
    for series in &beats.series {
        let ys: Vec<String> = series.points.iter().map(|p| p.y.to_string()).collect();
        println!("{:<16} {}", series.id(), ys.join(" "));
    }

    let mut timed = intensity_diagram(
        chart,
        &paths,
        IntensitySetting::All,
        TimeAxisMode::time(10)?,
    )?;
    timed.toggle_hidden("path 2/Narrative")?;
    println!(
        "\n{} series over {} s, hidden: {:?}",
        timed.series.len(),
        timed.axis.x_max,
        timed.hidden
    );

    let categories = category_diagram(chart, &paths, TimeAxisMode::Beat)?;
    for timeline in &categories.timelines {
        let cats: Vec<&str> = timeline
            .segments
            .iter()
            .map(|s| s.category.as_str())
            .collect();
        println!("{:<7} {}", timeline.path_id, cats.join(" "));
    }
    Ok(())
}
