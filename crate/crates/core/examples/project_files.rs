//! Saves a project with a path snapshot, edits the chart so the snapshot
//! goes stale, and loads the file again.

use pacemaker::level::{build_demo_chart, world_1_1};
use pacemaker::paths::{Path, WeightMode};
use pacemaker::store::{load_file, save_file, FILE_EXTENSION};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir();
    let file = dir.join(format!("world-1-1{FILE_EXTENSION}"));

    let mut project = build_demo_chart(&world_1_1())?;
    let beats = ["1-small", "2-big", "3-big", "4-big", "14-big"]
        .iter()
        .map(|n| project.chart.resolve_beat(n))
        .collect::<Result<Vec<_>, _>>()?;
    let path = Path::from_beats(&project.chart, beats, WeightMode::HopCount)?;
    let id = project
        .snapshots
        .take(path, "pipe shortcut as big")
        .id
        .clone();

    let bytes = save_file(&project, &file)?;
    println!("saved {} bytes to {}", bytes, file.display());
    assert_eq!(load_file(&file)?, project);

    // closing the pipe invalidates the snapshot, which is kept and flagged
    let pipe = project.chart.resolve_beat("14-big")?;
    project.chart.remove_beat(&pipe)?;
    save_file(&project, &file)?;
    let reloaded = load_file(&file)?;
    for stale in reloaded.stale_snapshots() {
        println!("snapshot {} ({}) is stale", stale.id, stale.label);
    }
    assert_eq!(reloaded.stale_snapshots()[0].id, id);
    std::fs::remove_file(file)?;
    Ok(())
}
