//! Builds a small experience chart by hand: a cinematic opening, a
//! platforming stretch, a dialogue, then a choice between a puzzle and an
//! action scene before the boss.

use pacemaker::chart::{ExperienceChart, SpecDraft};

fn spec(name: &str, narrative: f64, gameplay: f64, category: &str, playtime: f64) -> SpecDraft {
    SpecDraft {
        name: name.to_owned(),
        description: String::new(),
        narrative_intensity: narrative,
        gameplay_intensity: gameplay,
        gameplay_category: category.to_owned(),
        expected_playtime: playtime,
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut chart = ExperienceChart::new();
    let calm = chart.add_spec(spec("calm", 60.0, 0.0, "Cinematic", 45.0))?;
    let run = chart.add_spec(spec("run", 20.0, 50.0, "Platforming", 120.0))?;
    let talk = chart.add_spec(spec("talk", 70.0, 0.0, "Dialogue", 60.0))?;
    let think = chart.add_spec(spec("think", 30.0, 40.0, "Puzzle", 180.0))?;
    let fight = chart.add_spec(spec("fight", 30.0, 80.0, "Action", 90.0))?;
    let boss = chart.add_spec(spec("boss", 90.0, 100.0, "Boss", 150.0))?;

    let intro = chart.add_beat("cinematic", Some(calm))?;
    let platforming = chart.add_beat("platforming", Some(run))?;
    let dialogue = chart.add_beat("dialogue", Some(talk))?;
    let puzzle = chart.add_beat("puzzle", Some(think))?;
    let action = chart.add_beat("action", Some(fight))?;
    let finale = chart.add_beat("boss", Some(boss))?;
    for (a, b) in [
        (&intro, &platforming),
        (&platforming, &dialogue),
        (&dialogue, &puzzle),
        (&dialogue, &action),
        (&puzzle, &finale),
        (&action, &finale),
    ] {
        chart.add_edge(a, b)?;
    }

    for beat in chart.beats() {
        let spec = chart.spec_of(&beat.id).expect("every beat has a spec");
        println!(
            "{:<12} {:<11} computed intensity {:>5}",
            beat.name,
            spec.gameplay_category,
            spec.computed_intensity()
        );
    }

    // invalid edits are rejected and leave the chart untouched
    println!("self loop: {}", chart.add_edge(&intro, &intro).unwrap_err());
    println!(
        "duplicate: {}",
        chart.add_edge(&intro, &platforming).unwrap_err()
    );
    assert!(chart.validate().is_empty());
    Ok(())
}
