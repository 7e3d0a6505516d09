//! Pacing charts for games.
//!
//! A designer describes a level as an [`chart::ExperienceChart`]: beats
//! (moments of play) joined by dependency edges, each beat carrying an
//! [`chart::ExperienceSpec`] with narrative and gameplay intensity, a
//! gameplay category and an expected playtime. Paths through the chart
//! are compared as intensity and category diagrams, exported as CSV or
//! SVG, and stored as `.pace.json` project files.
//!
//! [`level`] derives a chart from a section-by-section level description,
//! with World 1-1 of Super Mario Bros. built in.

pub mod api;
pub mod chart;
pub mod cli;
pub mod diagram;
pub mod export;
pub mod level;
pub mod paths;
pub mod query;
pub mod store;
