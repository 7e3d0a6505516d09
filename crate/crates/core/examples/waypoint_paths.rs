//! Shortest, critical and waypoint paths through the World 1-1 chart.

use pacemaker::level::{build_demo_chart, world_1_1};
use pacemaker::paths::{critical_path, shortest_path, waypoint_path, Path, PathQuery, WeightMode};
use pacemaker::store::Project;

fn show(project: &Project, label: &str, path: Option<Path>) {
    match path {
        Some(p) => {
            let names: Vec<&str> = p
                .beats
                .iter()
                .map(|b| {
                    project
                        .chart
                        .beat(b)
                        .expect("path beats exist")
                        .name
                        .as_str()
                })
                .collect();
            println!(
                "{label} (weight {}): {}",
                p.total_weight,
                names.join(" -> ")
            );
        }
        None => println!("{label}: no path"),
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let project = build_demo_chart(&world_1_1())?;
    let chart = &project.chart;
    let start = chart.resolve_beat("1-small")?;
    let goal = chart.resolve_beat("13-small")?;

    show(
        &project,
        "fewest sections",
        critical_path(chart, &start, &goal)?,
    );
    show(
        &project,
        "least playtime",
        shortest_path(chart, &start, &goal, WeightMode::ExpectedPlaytime)?,
    );

    let star = PathQuery {
        start: start.clone(),
        via: vec![chart.resolve_beat("8-big-star")?],
        end: chart.resolve_beat("13-big")?,
        weight_mode: WeightMode::HopCount,
    };
    show(
        &project,
        "through the star as big Mario",
        waypoint_path(chart, &star)?,
    );

    let backwards = PathQuery {
        start: chart.resolve_beat("5-small")?,
        via: vec![start],
        end: goal,
        weight_mode: WeightMode::HopCount,
    };
    show(
        &project,
        "waypoints out of order",
        waypoint_path(chart, &backwards)?,
    );
    Ok(())
}
