//! Command-line front end: simulate runs, emit region maps, check hit-count
//! invariance and gather ensemble statistics from JSON scenario files.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use reduxsim::config::ScenarioConfig;
use reduxsim::ensemble::run_ensemble_with_oracle;
use reduxsim::minkowski::{invariance_report, region_map, write_region_csv, GridSpec};
use reduxsim::{run_scenario, Error, HitPair, LorentzFrame, RunLog};

#[derive(Parser)]
#[command(name = "reduxsim", version, about = "Stochastic state-reduction simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one seeded simulation and write its log as JSON.
    Simulate(Common),
    /// Label a spacetime grid by reduction region and write CSV.
    Regionmap {
        #[command(flatten)]
        common: Common,
        /// Grid as t0,t1,x0,x1,nt,nx.
        #[arg(long, allow_hyphen_values = true)]
        grid: GridSpec,
        /// Evaluation frame velocity; one CSV per frame.
        #[arg(long = "frame", allow_hyphen_values = true)]
        frames: Vec<f64>,
    },
    /// Simulate, then count reduction boundaries in each frame.
    Invariance {
        #[command(flatten)]
        common: Common,
        /// Frame velocity; overrides the scenario's list.
        #[arg(long = "frame", allow_hyphen_values = true)]
        frames: Vec<f64>,
    },
    /// Run an ensemble and compare first-hit frequencies with quadrature.
    Ensemble {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10_000)]
        runs: usize,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Falls back to REDUXSIM_SEED, then to the scenario's seed.
    #[arg(long, env = "REDUXSIM_SEED")]
    seed: Option<u64>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure with its process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_numerical() {
            3
        } else if matches!(e, Error::Config(_)) {
            2
        } else {
            1
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: 1,
            message: e.to_string(),
        }
    }
}

fn config_error(path: &Path, message: impl std::fmt::Display) -> Failure {
    Failure {
        code: 2,
        message: format!("{}: {message}", path.display()),
    }
}

impl Common {
    fn load(&self) -> Result<(ScenarioConfig, u64), Failure> {
        let text = fs::read_to_string(&self.config).map_err(|e| config_error(&self.config, e))?;
        let cfg = ScenarioConfig::from_json(&text).map_err(|e| config_error(&self.config, e))?;
        let seed = self.seed.unwrap_or(cfg.seed);
        Ok((cfg, seed))
    }

    fn emit(&self, text: &str) -> Result<(), Failure> {
        match &self.out {
            Some(path) => fs::write(path, text)?,
            None => io::stdout().lock().write_all(text.as_bytes())?,
        }
        Ok(())
    }
}

fn simulate(cfg: &ScenarioConfig, seed: u64) -> Result<RunLog, Failure> {
    let initial = cfg.initial_state()?;
    Ok(run_scenario(&initial, cfg.model(), &cfg.settings(seed))?)
}

fn frames_from(velocities: &[f64], fallback: &ScenarioConfig) -> Result<Vec<LorentzFrame>, Failure> {
    if velocities.is_empty() {
        return Ok(fallback.frames());
    }
    velocities
        .iter()
        .map(|&v| {
            LorentzFrame::new(v).map_err(|e| Failure {
                code: 2,
                message: e.to_string(),
            })
        })
        .collect()
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// `out.csv` becomes `out_v0.5.csv` when several frames are written.
fn frame_path(base: &Path, v: f64) -> PathBuf {
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("regionmap");
    let ext = base.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    base.with_file_name(format!("{stem}_v{v}.{ext}"))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate(common) => {
            let (cfg, seed) = common.load()?;
            common.emit(&to_json(&simulate(&cfg, seed)?))
        }
        Command::Regionmap { common, grid, frames } => {
            let (cfg, seed) = common.load()?;
            let hits = match cfg.hits {
                Some(h) => h,
                None => HitPair::from_hits(&simulate(&cfg, seed)?.hits),
            };
            if hits.a.is_none() && hits.b.is_none() {
                return Err(config_error(
                    &common.config,
                    "no hits to map: the run produced none and none are listed",
                ));
            }
            let mut frames = frames_from(&frames, &cfg)?;
            if frames.is_empty() {
                frames.push(LorentzFrame::REST);
            }
            let render = |frame: &LorentzFrame| -> Result<String, Failure> {
                let mut buf = Vec::new();
                write_region_csv(&mut buf, &region_map(&grid, cfg.strategy, &hits, frame))?;
                Ok(String::from_utf8(buf).expect("csv is utf-8"))
            };
            match (&common.out, frames.as_slice()) {
                (Some(base), many) if many.len() > 1 => {
                    for f in many {
                        fs::write(frame_path(base, f.velocity()), render(f)?)?;
                    }
                    Ok(())
                }
                _ => {
                    let text: Vec<String> = frames.iter().map(render).collect::<Result<_, _>>()?;
                    common.emit(&text.concat())
                }
            }
        }
        Command::Invariance { common, frames } => {
            let (cfg, seed) = common.load()?;
            let frames = frames_from(&frames, &cfg)?;
            let log = simulate(&cfg, seed)?;
            common.emit(&to_json(&invariance_report(&log, &frames)))
        }
        Command::Ensemble { common, runs } => {
            let (cfg, seed) = common.load()?;
            common.emit(&to_json(&run_ensemble_with_oracle(&cfg, runs, seed)?))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
