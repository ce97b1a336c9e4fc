//! Command-line front end.
//!
//! Exit status is 0 on success, 1 when a scenario cannot be loaded or
//! validated or an output cannot be written, and 2 on a usage error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Parser, Subcommand};

use crate::experiment::{nasch_ensemble, nasch_queue_series, nasch_spacetime, run_fcm};
use crate::metrics::sweep_fundamental_diagram;
use crate::sim_io::output::{write_fd_csv, write_pgm, write_queue_csv};
use crate::sim_io::scenario::{
    load_scenario_file, ModelKind, OutputKind, Scenario, ScenarioConfig,
};

#[derive(Debug, Parser)]
#[command(
    name = "fuzzycell",
    version,
    about = "Fuzzy cellular traffic simulator"
)]
pub struct Cli {
    /// Base seed for NaSch runs, replacing the scenario's.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory receiving output files.
    #[arg(long, global = true, env = "FUZZYCELL_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
    /// Number of time steps, replacing the scenario's.
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    /// Fuzziness parameter in (0, 1], replacing the scenario's.
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate the configured model and write its space-time image.
    Run { scenario: PathBuf },
    /// Write the queue-length series of the configured model.
    QueueExperiment { scenario: PathBuf },
    /// Sweep densities on a ring for both models.
    FundamentalDiagram {
        scenario: PathBuf,
        /// Comma-separated densities; defaults to the scenario's list.
        #[arg(long, value_delimiter = ',')]
        densities: Option<Vec<f64>>,
    },
    /// Run the fuzzy model and the NaSch ensemble on the same scenario.
    Compare { scenario: PathBuf },
}

pub fn main() -> std::process::ExitCode {
    std::process::ExitCode::from(run(std::env::args_os()))
}

/// Parses `argv`, executes the command and returns the exit status.
pub fn run<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(lines) => {
            for line in lines {
                println!("{line}");
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

/// Runs a parsed command and returns one summary line per written file.
pub fn execute(cli: &Cli) -> anyhow::Result<Vec<String>> {
    let (path, scenario) = match &cli.command {
        Command::Run { scenario }
        | Command::QueueExperiment { scenario }
        | Command::FundamentalDiagram { scenario, .. }
        | Command::Compare { scenario } => (scenario, load(cli, scenario)?),
    };
    std::fs::create_dir_all(&cli.out_dir)
        .with_context(|| format!("cannot create {}", cli.out_dir.display()))?;
    let out = Outputs {
        dir: &cli.out_dir,
        scenario: &scenario,
        stem: stem(path, &scenario.config),
    };
    let mut lines = Vec::new();
    match &cli.command {
        Command::Run { .. } => {
            let model = scenario.config.model;
            let img = match model {
                ModelKind::Fcm => run_fcm(&scenario)?.spacetime(),
                ModelKind::Nasch => nasch_spacetime(&scenario)?,
            };
            let file = out.path(OutputKind::Spacetime, None);
            write_pgm(&img, &file).with_context(|| write_err(&file))?;
            lines.push(format!(
                "wrote {} ({} space-time, {} steps x {} cells)",
                file.display(),
                model_name(model),
                img.height(),
                img.width
            ));
        }
        Command::QueueExperiment { .. } => {
            let series = match scenario.config.model {
                ModelKind::Fcm => run_fcm(&scenario)?.queue_series(),
                ModelKind::Nasch => nasch_queue_series(&nasch_ensemble(&scenario)?),
            };
            let file = out.path(OutputKind::Queue, None);
            write_queue_csv(&series, &file).with_context(|| write_err(&file))?;
            lines.push(format!(
                "wrote {} ({} queue length, {} steps)",
                file.display(),
                model_name(scenario.config.model),
                series.len()
            ));
        }
        Command::FundamentalDiagram { densities, .. } => {
            let densities = densities
                .clone()
                .unwrap_or_else(|| scenario.fundamental().densities);
            for model in [ModelKind::Fcm, ModelKind::Nasch] {
                let fd = sweep_fundamental_diagram(&scenario, model, &densities)?;
                let file = out.path(OutputKind::Fundamental, Some(model));
                write_fd_csv(&fd, &file).with_context(|| write_err(&file))?;
                lines.push(format!(
                    "wrote {} ({} fundamental diagram, {} densities)",
                    file.display(),
                    model_name(model),
                    densities.len()
                ));
            }
        }
        Command::Compare { .. } => {
            let fcm = run_fcm(&scenario)?;
            let ensemble = nasch_ensemble(&scenario)?;
            let runs = ensemble.runs.len();
            for (model, series) in [
                (ModelKind::Fcm, fcm.queue_series()),
                (ModelKind::Nasch, nasch_queue_series(&ensemble)),
            ] {
                let file = out.path(OutputKind::Queue, Some(model));
                write_queue_csv(&series, &file).with_context(|| write_err(&file))?;
                let what = match model {
                    ModelKind::Fcm => "fcm queue length".to_string(),
                    ModelKind::Nasch => format!("nasch queue distribution over {runs} runs"),
                };
                lines.push(format!(
                    "wrote {} ({what}, {} steps)",
                    file.display(),
                    series.len()
                ));
            }
            for (model, img) in [
                (ModelKind::Fcm, fcm.spacetime()),
                (ModelKind::Nasch, nasch_spacetime(&scenario)?),
            ] {
                let file = out.path(OutputKind::Spacetime, Some(model));
                write_pgm(&img, &file).with_context(|| write_err(&file))?;
                lines.push(format!(
                    "wrote {} ({} space-time, {} steps x {} cells)",
                    file.display(),
                    model_name(model),
                    img.height(),
                    img.width
                ));
            }
        }
    }
    Ok(lines)
}

fn load(cli: &Cli, path: &Path) -> anyhow::Result<Scenario> {
    let mut config = load_scenario_file(path)?;
    if let Some(seed) = cli.seed {
        config.nasch.base_seed = seed;
    }
    if let Some(steps) = cli.steps {
        config.steps = steps;
    }
    if let Some(alpha) = cli.alpha {
        config.alpha = alpha;
    }
    Ok(config.validate()?)
}

fn stem(path: &Path, config: &ScenarioConfig) -> String {
    if !config.name.is_empty() {
        return config.name.clone();
    }
    path.file_stem().map_or_else(
        || "scenario".to_string(),
        |s| s.to_string_lossy().into_owned(),
    )
}

fn model_name(model: ModelKind) -> &'static str {
    match model {
        ModelKind::Fcm => "fcm",
        ModelKind::Nasch => "nasch",
    }
}

fn write_err(path: &Path) -> String {
    format!("cannot write {}", path.display())
}

struct Outputs<'a> {
    dir: &'a Path,
    scenario: &'a Scenario,
    stem: String,
}

impl Outputs<'_> {
    /// Path for an output kind. A scenario-declared path is used as given
    /// (relative to the output directory); `model` is inserted before the
    /// extension when one command writes the same kind for both models.
    fn path(&self, kind: OutputKind, model: Option<ModelKind>) -> PathBuf {
        let ext = match kind {
            OutputKind::Spacetime => "pgm",
            OutputKind::Queue | OutputKind::Fundamental => "csv",
        };
        let declared = self
            .scenario
            .config
            .outputs
            .iter()
            .find(|o| o.kind == kind)
            .map(|o| PathBuf::from(&o.path));
        let base = declared.unwrap_or_else(|| {
            let kind_name = match kind {
                OutputKind::Spacetime => "spacetime",
                OutputKind::Queue => "queue",
                OutputKind::Fundamental => "fundamental",
            };
            PathBuf::from(format!("{}_{kind_name}.{ext}", self.stem))
        });
        let base = match model {
            None => base,
            Some(m) => {
                let stem = base
                    .file_stem()
                    .unwrap_or_default()
                    .to_string_lossy()
                    .into_owned();
                let ext = base
                    .extension()
                    .map_or(ext.to_string(), |e| e.to_string_lossy().into_owned());
                base.with_file_name(format!("{stem}_{}.{ext}", model_name(m)))
            }
        };
        self.dir.join(base)
    }
}
