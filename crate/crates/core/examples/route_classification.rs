//! Enumerates every route from the start of World 1-1 to the flagpole and
//! sorts them into the route classes of the level.

use std::collections::BTreeMap;

use pacemaker::level::{build_demo_chart, route_rules, world_1_1};
use pacemaker::paths::{classify_route, enumerate_routes, DEFAULT_MAX_ROUTES};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let level = world_1_1();
    let project = build_demo_chart(&level)?;
    let chart = &project.chart;
    let rules = route_rules(&level, chart);

    let sources = chart.resolve_beats("1-small")?;
    let sinks = chart.resolve_beats("13-*")?;
    let routes = enumerate_routes(chart, &sources, &sinks, DEFAULT_MAX_ROUTES)?;

    let mut per_label: BTreeMap<String, usize> = BTreeMap::new();
    for route in &routes.routes {
        for label in classify_route(route, &rules) {
            *per_label.entry(label).or_default() += 1;
        }
    }
    println!(
        "{} routes (truncated: {})",
        routes.routes.len(),
        routes.truncated
    );
    for (label, count) in per_label {
        println!("  {label:<8} {count}");
    }
    Ok(())
}
