//! Command-line driver.
//!
//! Exit status: 0 on success, 1 for domain failures (no path, invariant
//! violations, bad references), 2 for usage errors and unreadable input.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::api::{serve, ServeConfig, DEFAULT_PORT};
use crate::chart::BeatId;
use crate::diagram::{DiagramKind, IntensitySetting};
use crate::level::{build_demo_chart, world_1_1, LevelConfig};
use crate::paths::{
    classify_route, enumerate_routes, waypoint_path, PathQuery, RouteRule, WeightMode,
    DEFAULT_MAX_ROUTES,
};
use crate::query::{DiagramRequest, ExportFormat};
use crate::store::{self, Project, StoreError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "pacemaker", version, about = "Pacing charts for game levels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a project file against the chart invariants.
    Validate { file: PathBuf },
    /// Shortest path through optional waypoints; prints one beat per line.
    Path {
        file: PathBuf,
        #[arg(long)]
        from: String,
        #[arg(long)]
        via: Vec<String>,
        #[arg(long)]
        to: String,
        #[arg(long, value_enum, default_value_t = Weight::Hop)]
        weight: Weight,
    },
    /// List simple routes between beat groups. A trailing `*` matches a
    /// name prefix, so `--from '1-*'` means every beat of section 1.
    Routes {
        file: PathBuf,
        #[arg(long, required = true)]
        from: Vec<String>,
        #[arg(long, required = true)]
        to: Vec<String>,
        #[arg(long, default_value_t = DEFAULT_MAX_ROUTES)]
        max: usize,
        /// JSON array of `{"label": .., "predicate": ..}` rules.
        #[arg(long)]
        classify: Option<PathBuf>,
    },
    /// Export an intensity or category diagram.
    Diagram {
        file: PathBuf,
        /// Paths separated by `;`; each is a snapshot id or comma-separated beats.
        #[arg(long)]
        paths: String,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, value_enum, default_value_t = Setting::Computed)]
        setting: Setting,
        #[arg(long, default_value = "beat")]
        mode: String,
        #[arg(long)]
        timescale: Option<u32>,
        #[arg(long, value_enum)]
        format: Format,
        /// Comma-separated series ids to hide.
        #[arg(long)]
        hide: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a demo project.
    Demo {
        #[arg(value_enum)]
        which: Demo,
        /// Level description for `demo level`.
        #[arg(long, required_if_eq("which", "level"))]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value_t = DEFAULT_PORT)]
        port: u16,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Weight {
    Hop,
    Time,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Intensity,
    Category,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Setting {
    Computed,
    Gameplay,
    Narrative,
    All,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Svg,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Demo {
    Mario,
    Level,
}

/// A failure with the exit status it maps to.
struct Failure {
    status: i32,
    message: String,
}

impl Failure {
    fn domain(message: impl ToString) -> Self {
        Self {
            status: EXIT_FAILURE,
            message: message.to_string(),
        }
    }

    fn usage(message: impl ToString) -> Self {
        Self {
            status: EXIT_USAGE,
            message: message.to_string(),
        }
    }
}

impl From<StoreError> for Failure {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::Integrity(_) => Failure::domain(e),
            _ => Failure::usage(e),
        }
    }
}

/// Runs one invocation; `argv[0]` is the program name.
pub fn run<I, T>(argv: I, stdout: &mut impl Write, stderr: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let status = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return status;
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(failure) => {
            let _ = writeln!(stderr, "error: {}", failure.message);
            failure.status
        }
    }
}

fn load(file: &std::path::Path) -> Result<Project, Failure> {
    store::load_file(file).map_err(|e| match e {
        StoreError::Io(io) => Failure::usage(format!("{}: {io}", file.display())),
        other => other.into(),
    })
}

fn write_out(path: &std::path::Path, bytes: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, bytes).map_err(|e| Failure::domain(format!("{}: {e}", path.display())))
}

fn beat_names(project: &Project, beats: &[BeatId]) -> Vec<String> {
    beats
        .iter()
        .map(|b| {
            project
                .chart
                .beat(b)
                .map_or_else(|| b.to_string(), |beat| beat.name.clone())
        })
        .collect()
}

fn execute(
    command: Command,
    stdout: &mut impl Write,
    stderr: &mut impl Write,
) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::domain(e);
    match command {
        Command::Validate { file } => {
            let project = load(&file)?;
            for stale in project.stale_snapshots() {
                writeln!(
                    stderr,
                    "warning: snapshot {} ({}) is stale",
                    stale.id, stale.label
                )
                .map_err(io)?;
            }
            writeln!(
                stdout,
                "ok: {} beats, {} edges, {} specs",
                project.chart.beats().count(),
                project.chart.edges().count(),
                project.chart.specs().count()
            )
            .map_err(io)?;
        }
        Command::Path {
            file,
            from,
            via,
            to,
            weight,
        } => {
            let project = load(&file)?;
            let chart = &project.chart;
            let query = PathQuery {
                start: chart.resolve_beat(&from).map_err(Failure::domain)?,
                via: via
                    .iter()
                    .map(|b| chart.resolve_beat(b))
                    .collect::<Result<_, _>>()
                    .map_err(Failure::domain)?,
                end: chart.resolve_beat(&to).map_err(Failure::domain)?,
                weight_mode: match weight {
                    Weight::Hop => WeightMode::HopCount,
                    Weight::Time => WeightMode::ExpectedPlaytime,
                },
            };
            let path = waypoint_path(chart, &query)
                .map_err(Failure::domain)?
                .ok_or_else(|| Failure::domain("no path"))?;
            for name in beat_names(&project, &path.beats) {
                writeln!(stdout, "{name}").map_err(io)?;
            }
        }
        Command::Routes {
            file,
            from,
            to,
            max,
            classify,
        } => {
            let project = load(&file)?;
            let chart = &project.chart;
            let group = |refs: &[String]| -> Result<Vec<BeatId>, Failure> {
                let mut ids = Vec::new();
                for r in refs {
                    ids.extend(chart.resolve_beats(r).map_err(Failure::domain)?);
                }
                Ok(ids)
            };
            let rules: Vec<RouteRule> = match classify {
                None => Vec::new(),
                Some(rules_file) => {
                    let text = std::fs::read(&rules_file)
                        .map_err(|e| Failure::usage(format!("{}: {e}", rules_file.display())))?;
                    let raw: Vec<RouteRule> = serde_json::from_slice(&text)
                        .map_err(|e| Failure::usage(format!("{}: {e}", rules_file.display())))?;
                    raw.into_iter()
                        .map(|r| {
                            r.predicate
                                .resolve(chart)
                                .map(|predicate| RouteRule::new(r.label, predicate))
                        })
                        .collect::<Result<_, _>>()
                        .map_err(Failure::domain)?
                }
            };
            let set = enumerate_routes(chart, &group(&from)?, &group(&to)?, max)
                .map_err(Failure::domain)?;
            for route in &set.routes {
                let line = beat_names(&project, &route.beats).join(" -> ");
                if rules.is_empty() {
                    writeln!(stdout, "{line}").map_err(io)?;
                } else {
                    let labels = classify_route(route, &rules).join(",");
                    writeln!(stdout, "{line}\t[{labels}]").map_err(io)?;
                }
            }
            if set.truncated {
                writeln!(stderr, "warning: stopped after {max} routes").map_err(io)?;
            }
        }
        Command::Diagram {
            file,
            paths,
            kind,
            setting,
            mode,
            timescale,
            format,
            hide,
            out,
        } => {
            let project = load(&file)?;
            let request = DiagramRequest {
                kind: match kind {
                    Kind::Intensity => DiagramKind::Intensity,
                    Kind::Category => DiagramKind::Category,
                },
                paths,
                setting: match setting {
                    Setting::Computed => IntensitySetting::Computed,
                    Setting::Gameplay => IntensitySetting::Gameplay,
                    Setting::Narrative => IntensitySetting::Narrative,
                    Setting::All => IntensitySetting::All,
                },
                mode,
                timescale,
                hidden: hide,
            };
            let format = match format {
                Format::Csv => ExportFormat::Csv,
                Format::Svg => ExportFormat::Svg,
            };
            let bytes = request.export(&project, format).map_err(Failure::domain)?;
            write_out(&out, &bytes)?;
        }
        Command::Demo { which, config, out } => {
            let level = match which {
                Demo::Mario => world_1_1(),
                Demo::Level => {
                    let path = config.expect("clap requires --config for `demo level`");
                    let text = std::fs::read(&path)
                        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
                    serde_json::from_slice::<LevelConfig>(&text)
                        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?
                }
            };
            let project = build_demo_chart(&level).map_err(Failure::domain)?;
            write_out(&out, &store::to_bytes(&project))?;
        }
        Command::Serve { port } => {
            let runtime = tokio::runtime::Runtime::new().map_err(io)?;
            let config = ServeConfig::from_env(port);
            writeln!(stderr, "listening on http://{}", config.addr).map_err(io)?;
            runtime.block_on(serve(config)).map_err(Failure::domain)?;
        }
    }
    Ok(())
}
