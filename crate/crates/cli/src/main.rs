//! `stit`: simulate STIT and Poisson hyperplane tessellations, evaluate the
//! encapsulation bound and run the verification experiments.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Deserialize;
use serde_json::Value;
use stit_core::encapsulation::{build_window, lower_bound, BoundParams, WindowKnobs};
use stit_core::json::{format_g17, to_string_pretty};
use stit_core::pht::simulate_pht;
use stit_core::svg::{render_pattern, render_tessellation};
use stit_core::{simulate, DrivingMeasure, Method, Polytope, RandomStream, StitError};
use stit_harness::{run_experiment, HarnessError, EXPERIMENTS};

#[derive(Parser)]
#[command(name = "stit", version, about = "STIT tessellation simulator and verification suite")]
struct Cli {
    /// Worker threads for replicate pools (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one tessellation and write it as JSON.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Also render the tessellation as SVG (planar windows only).
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Print the encapsulation lower bound on a time grid as CSV.
    Bound {
        /// JSON with either `lambda_inner` and `band_masses`, or `measure`,
        /// `inner` and optional `knobs` to build the window.
        #[arg(long, conflicts_with_all = ["lambda_inner", "masses"])]
        config: Option<PathBuf>,
        #[arg(long)]
        lambda_inner: Option<f64>,
        /// Comma-separated band masses.
        #[arg(long, value_delimiter = ',')]
        masses: Vec<f64>,
        /// Comma-separated times.
        #[arg(long = "t", value_delimiter = ',', default_values_t = [0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0])]
        times: Vec<f64>,
    },
    /// Run a named experiment, or `all`, and write CSV and JSON reports.
    Verify {
        name: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Multiplies every sample size.
        #[arg(long, default_value_t = 1.0)]
        n_scale: f64,
        #[arg(long, default_value = "reports")]
        out_dir: PathBuf,
        /// Experiment config overriding the defaults (single experiment only).
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Runtime(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

impl From<StitError> for Failure {
    fn from(e: StitError) -> Self {
        HarnessError::from(e).into()
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Failure + '_ {
    move |e| Failure::Runtime(format!("{}: {e}", path.display()))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

#[derive(Debug, Deserialize, Default, Clone, Copy, PartialEq)]
#[serde(rename_all = "lowercase")]
enum Process {
    #[default]
    Stit,
    Pht,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateConfig {
    #[serde(default)]
    process: Process,
    measure: DrivingMeasure,
    window: Polytope,
    /// Time horizon (STIT only).
    #[serde(default)]
    t: Option<f64>,
    /// Intensity factor (PHT only).
    #[serde(default)]
    rho: Option<f64>,
    #[serde(default)]
    method: Method,
    #[serde(default)]
    seed: u64,
}

fn cmd_simulate(config: &Path, seed: Option<u64>, out: &Path, svg: Option<&Path>) -> Result<(), Failure> {
    let cfg: SimulateConfig = read_json(config)?;
    let mut rng = RandomStream::new(seed.unwrap_or(cfg.seed), 0);
    let (json, picture) = match cfg.process {
        Process::Stit => {
            let t = cfg.t.ok_or_else(|| Failure::Config("missing `t`".into()))?;
            let tree = simulate(&cfg.measure, &cfg.window, t, &mut rng, cfg.method)?;
            let picture = svg.map(|_| render_tessellation(&tree.live())).transpose()?;
            (to_string_pretty(&tree), picture)
        }
        Process::Pht => {
            let rho = cfg.rho.ok_or_else(|| Failure::Config("missing `rho`".into()))?;
            let pattern = simulate_pht(&cfg.measure, rho, &cfg.window, &mut rng)?;
            let picture = svg.map(|_| render_pattern(&pattern)).transpose()?;
            (to_string_pretty(&pattern), picture)
        }
    };
    let mut json = json.map_err(|e| Failure::Runtime(e.to_string()))?;
    json.push('\n');
    fs::write(out, json).map_err(io_err(out))?;
    if let (Some(path), Some(picture)) = (svg, picture) {
        fs::write(path, picture).map_err(io_err(path))?;
    }
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsConfig {
    lambda_inner: f64,
    band_masses: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WindowConfig {
    measure: DrivingMeasure,
    inner: Polytope,
    #[serde(default)]
    knobs: WindowKnobs,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum BoundConfig {
    Params(ParamsConfig),
    Window(WindowConfig),
}

fn cmd_bound(
    config: Option<&Path>,
    lambda_inner: Option<f64>,
    masses: &[f64],
    times: &[f64],
) -> Result<String, Failure> {
    let params = match config {
        Some(path) => match read_json::<BoundConfig>(path)? {
            BoundConfig::Params(p) => BoundParams::new(p.lambda_inner, p.band_masses)?,
            BoundConfig::Window(w) => build_window(&w.inner, &w.measure, w.knobs)?.bound_params()?,
        },
        None => {
            let l =
                lambda_inner.ok_or_else(|| Failure::Config("need --lambda-inner and --masses, or --config".into()))?;
            BoundParams::new(l, masses.to_vec())?
        }
    };
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Failure::Config("times must be finite and non-negative".into()));
    }
    let mut out = String::from("t,lower_bound\n");
    for t in times {
        out.push_str(&format!(
            "{},{}\n",
            format_g17(*t),
            format_g17(lower_bound(*t, &params))
        ));
    }
    Ok(out)
}

/// Returns whether every experiment passed.
fn cmd_verify(name: &str, seed: u64, n_scale: f64, out_dir: &Path, config: Option<&Path>) -> Result<bool, Failure> {
    let names: Vec<&str> = match name {
        "all" => EXPERIMENTS.to_vec(),
        n if EXPERIMENTS.contains(&n) => vec![n],
        other => return Err(HarnessError::UnknownExperiment(other.to_string()).into()),
    };
    let config: Option<Value> = match config {
        Some(_) if names.len() > 1 => return Err(Failure::Config("--config applies to a single experiment".into())),
        Some(path) => Some(read_json(path)?),
        None => None,
    };
    let mut all = true;
    for n in names {
        let report = run_experiment(n, config.as_ref(), seed, n_scale)?;
        report.write(out_dir).map_err(Failure::from)?;
        println!(
            "{} {} config_hash={}",
            report.verdict(),
            report.experiment,
            report.config_hash
        );
        for note in &report.notes {
            println!("  note: {note}");
        }
        all &= report.pass;
    }
    Ok(all)
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    pool.install(|| match &cli.command {
        Command::Simulate { config, seed, out, svg } => cmd_simulate(config, *seed, out, svg.as_deref()).map(|_| true),
        Command::Bound {
            config,
            lambda_inner,
            masses,
            times,
        } => {
            print!("{}", cmd_bound(config.as_deref(), *lambda_inner, masses, times)?);
            Ok(true)
        }
        Command::Verify {
            name,
            seed,
            n_scale,
            out_dir,
            config,
        } => cmd_verify(name, *seed, *n_scale, out_dir, config.as_deref()),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
