//! Command-line front end. Each subcommand reads its inputs, calls one
//! library operation and writes the result; there is no numerics here.
//!
//! Settings are merged as profile defaults < config file < flags. Exit code
//! 0 means success, 1 a domain or numerical error, 2 a usage error.

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::Error;
use crate::experiments::{
    fd_green_oracle, fd_harmonic_measures, locality_experiment, mc_harmonic_measure_oracle, phase_experiment,
    render_svg, LocalityOptions, PhaseOptions, SvgOptions,
};
use crate::geometry::{CircularSlitDisk, ModuliState};
use crate::loewner::{compute_trace, FlowOptions, SCHEMA_VERSION};
use crate::schiffer::{IdentityReport, Resolution};
use crate::sde::{batch_simulate, simulate_driving, with_jobs, RunRecord, SdeConfig};

#[derive(Debug, Parser)]
#[command(name = "slitsle", version, about = "Radial SLE in circular slit disks")]
pub struct Cli {
    /// Preset resolutions and tolerances.
    #[arg(long, value_enum, default_value_t = Profile::Standard, global = true)]
    pub profile: Profile,
    /// Worker threads for ensembles (0 uses every core).
    #[arg(long, default_value_t = 0, global = true)]
    pub jobs: usize,
    /// TOML or JSON settings file with sections sde, flow, locality, phases, oracle.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Profile {
    Quick,
    Standard,
    Precise,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Domain file utilities.
    Domain {
        #[command(subcommand)]
        action: DomainAction,
    },
    /// Solve the potential problems of one state and report identity checks.
    Potential(PotentialArgs),
    /// Simulate driving paths of the Schiffer diffusion.
    Simulate(SimulateArgs),
    /// Compute the trace of a simulated run as CSV.
    Trace(TraceArgs),
    /// Ensemble experiments.
    Experiment {
        #[command(subcommand)]
        kind: ExperimentKind,
    },
    /// Render a domain and traces as SVG.
    Plot(PlotArgs),
    /// Independent reference values.
    Oracle {
        #[command(subcommand)]
        kind: OracleKind,
    },
}

#[derive(Debug, Subcommand)]
pub enum DomainAction {
    /// Check a domain file and print its normalized form.
    Validate {
        #[arg(long)]
        domain: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct Output {
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SdeFlags {
    #[arg(long, allow_hyphen_values = true)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta0: Option<f64>,
    #[arg(long)]
    pub stop_delta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PotentialArgs {
    #[arg(long)]
    pub domain: PathBuf,
    /// Angle of the driving point.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub gamma: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub domain: PathBuf,
    #[command(flatten)]
    pub sde: SdeFlags,
    /// Number of paths; more than one writes a batch file.
    #[arg(long, default_value_t = 1)]
    pub paths: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    /// Run file written by `simulate`.
    #[arg(long)]
    pub run: PathBuf,
    /// Number of uniform sample intervals.
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Subcommand)]
pub enum ExperimentKind {
    /// Compare stopped tip angles in the slit domain and in the disk.
    Locality(LocalityArgs),
    /// Compare self-approach fractions for two values of kappa.
    Phases(PhasesArgs),
}

#[derive(Debug, Args)]
pub struct LocalityArgs {
    #[arg(long)]
    pub domain: PathBuf,
    #[command(flatten)]
    pub sde: SdeFlags,
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub stop_distance: Option<f64>,
    #[arg(long)]
    pub inner_radius: Option<f64>,
    /// Reported arc as `start,length`.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub target_arc: Option<(f64, f64)>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct PhasesArgs {
    #[arg(long)]
    pub domain: PathBuf,
    #[command(flatten)]
    pub sde: SdeFlags,
    /// The two kappas as `low,high`.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub kappas: Option<(f64, f64)>,
    #[arg(long)]
    pub traces: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long)]
    pub domain: PathBuf,
    /// Trace CSV files written by `trace`.
    #[arg(long)]
    pub trace: Vec<PathBuf>,
    #[arg(long)]
    pub size: Option<u32>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Subcommand)]
pub enum OracleKind {
    /// Finite-volume Green function and harmonic measures.
    Fd(FdArgs),
    /// Walk-on-spheres harmonic measure.
    Mc(McArgs),
}

#[derive(Debug, Args)]
pub struct FdArgs {
    #[arg(long)]
    pub domain: PathBuf,
    /// Pole as `x,y`.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub pole: Complex64,
    /// Evaluation points as `x,y`; repeatable.
    #[arg(long = "at", value_parser = parse_point, required = true, allow_hyphen_values = true)]
    pub at: Vec<Complex64>,
    #[arg(long)]
    pub grid_h: Option<f64>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[arg(long)]
    pub domain: PathBuf,
    #[arg(long = "at", value_parser = parse_point, allow_hyphen_values = true)]
    pub at: Complex64,
    #[arg(long)]
    pub walks: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: Output,
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected two comma separated numbers, got {s:?}"))?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    Ok((num(a)?, num(b)?))
}

fn parse_point(s: &str) -> Result<Complex64, String> {
    parse_pair(s).map(|(x, y)| Complex64::new(x, y))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSettings {
    pub grid_h: f64,
    pub walks: usize,
}

/// Everything a subcommand may read from a profile or config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub sde: SdeConfig,
    pub flow: FlowOptions,
    pub locality: LocalityOptions,
    pub phases: PhaseOptions,
    pub oracle: OracleSettings,
}

impl Settings {
    pub fn profile(p: Profile) -> Self {
        let mut s = Settings {
            sde: SdeConfig::default(),
            flow: FlowOptions::default(),
            locality: LocalityOptions::default(),
            phases: PhaseOptions::default(),
            oracle: OracleSettings {
                grid_h: 1.0 / 400.0,
                walks: 100_000,
            },
        };
        match p {
            Profile::Quick => {
                s.sde.resolution = Resolution {
                    n_circle: 128,
                    n_slit: 32,
                    ..Resolution::default()
                };
                s.sde.dt = 2e-3;
                s.oracle = OracleSettings {
                    grid_h: 1.0 / 100.0,
                    walks: 10_000,
                };
            }
            Profile::Standard => {}
            Profile::Precise => {
                s.sde.resolution = Resolution {
                    n_circle: 512,
                    n_slit: 96,
                    ..Resolution::default()
                };
                s.sde.dt = 5e-4;
                s.flow.step_factor = 0.02;
                s.oracle = OracleSettings {
                    grid_h: 1.0 / 800.0,
                    walks: 1_000_000,
                };
            }
        }
        s
    }

    /// Overlay a TOML or JSON document; unknown keys are rejected.
    pub fn overlay(&self, text: &str, json_format: bool) -> Result<Self, String> {
        let over: Value = if json_format {
            serde_json::from_str(text).map_err(|e| e.to_string())?
        } else {
            let table: toml::Table = toml::from_str(text).map_err(|e| e.to_string())?;
            serde_json::to_value(table).map_err(|e| e.to_string())?
        };
        let mut base = serde_json::to_value(self).map_err(|e| e.to_string())?;
        merge(&mut base, over, "")?;
        serde_json::from_value(base).map_err(|e| e.to_string())
    }
}

fn merge(base: &mut Value, over: Value, prefix: &str) -> Result<(), String> {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                let slot = b.get_mut(&k).ok_or_else(|| format!("unknown config key {prefix}{k}"))?;
                merge(slot, v, &format!("{prefix}{k}."))?;
            }
            Ok(())
        }
        (slot, v) => {
            *slot = v;
            Ok(())
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failure(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(m) => CliError::Usage(m),
            e => CliError::Failure(e),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failure(e.into())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parse `args` (program name first), run the subcommand and return the exit code.
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}\n\nFor more information, try '--help'.");
            2
        }
        Err(CliError::Failure(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn settings(cli: &Cli) -> CliResult<Settings> {
    let base = Settings::profile(cli.profile);
    match &cli.config {
        None => Ok(base),
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            let json_format = path.extension().is_some_and(|e| e == "json");
            base.overlay(&text, json_format)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
        }
    }
}

fn apply_sde(cfg: &mut SdeConfig, f: &SdeFlags) {
    let set = |slot: &mut f64, v: Option<f64>| {
        if let Some(v) = v {
            *slot = v;
        }
    };
    set(&mut cfg.kappa, f.kappa);
    set(&mut cfg.dt, f.dt);
    set(&mut cfg.t_max, f.tmax);
    set(&mut cfg.theta0, f.theta0);
    set(&mut cfg.stop_delta, f.stop_delta);
    if let Some(s) = f.seed {
        cfg.seed = s;
    }
}

fn read_domain(path: &Path) -> CliResult<CircularSlitDisk> {
    Ok(CircularSlitDisk::from_json(&fs::read_to_string(path)?)?)
}

fn emit(out: &Output, text: &str) -> CliResult<()> {
    match &out.out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn emit_json(out: &Output, value: &impl Serialize) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    text.push('\n');
    emit(out, &text)
}

pub fn run(cli: &Cli) -> CliResult<()> {
    let mut s = settings(cli)?;
    match &cli.command {
        Command::Domain {
            action: DomainAction::Validate { domain },
        } => {
            let d = read_domain(domain)?;
            emit_json(
                &Output { out: None },
                &json!({ "schema_version": SCHEMA_VERSION, "connectivity": d.connectivity(), "domain": d }),
            )
        }
        Command::Potential(a) => {
            let d = read_domain(&a.domain)?;
            let report = IdentityReport::compute(&ModuliState::new(0.0, a.gamma, d), &s.sde.resolution)?;
            emit_json(&a.output, &report)
        }
        Command::Simulate(a) => {
            let d = read_domain(&a.domain)?;
            apply_sde(&mut s.sde, &a.sde);
            s.sde.validate()?;
            if a.paths == 0 {
                return Err(CliError::Usage("--paths must be at least 1".into()));
            }
            if a.paths == 1 {
                let run = with_jobs(cli.jobs, || simulate_driving(&d, s.sde.theta0, &s.sde))??;
                return emit(&a.output, &(run.to_json() + "\n"));
            }
            let runs = with_jobs(cli.jobs, || batch_simulate(&d, &s.sde, a.paths))?;
            let runs: Vec<Value> = runs
                .into_iter()
                .map(|r| match r {
                    Ok(run) => serde_json::to_value(run).unwrap_or(Value::Null),
                    Err(e) => json!({ "error": e.to_string() }),
                })
                .collect();
            emit_json(&a.output, &json!({ "schema_version": SCHEMA_VERSION, "runs": runs }))
        }
        Command::Trace(a) => {
            let mut run = RunRecord::from_json(&fs::read_to_string(&a.run)?)?;
            if a.samples == 0 {
                return Err(CliError::Usage("--samples must be at least 1".into()));
            }
            run.path.ensure_fields(&run.config.resolution)?;
            let t_end = run.path.t_end();
            let times: Vec<f64> = (0..=a.samples).map(|k| t_end * k as f64 / a.samples as f64).collect();
            let trace = with_jobs(cli.jobs, || compute_trace(&run.path, &times, &s.flow))??;
            emit(&a.output, &format!("# schema_version: {SCHEMA_VERSION}\n{}", trace.to_csv()))
        }
        Command::Experiment {
            kind: ExperimentKind::Locality(a),
        } => {
            let d = read_domain(&a.domain)?;
            apply_sde(&mut s.sde, &a.sde);
            let o = &mut s.locality;
            o.n_paths = a.paths.unwrap_or(o.n_paths);
            o.stop_distance = a.stop_distance.unwrap_or(o.stop_distance);
            o.inner_radius = a.inner_radius.unwrap_or(o.inner_radius);
            o.target_arc = a.target_arc.unwrap_or(o.target_arc);
            o.flow = s.flow;
            let report = with_jobs(cli.jobs, || locality_experiment(&d, &s.sde, &s.locality))??;
            emit_json(&a.output, &report)
        }
        Command::Experiment {
            kind: ExperimentKind::Phases(a),
        } => {
            let d = read_domain(&a.domain)?;
            apply_sde(&mut s.sde, &a.sde);
            let o = &mut s.phases;
            o.kappas = a.kappas.unwrap_or(o.kappas);
            o.n_traces = a.traces.unwrap_or(o.n_traces);
            o.samples = a.samples.unwrap_or(o.samples);
            o.epsilon = a.epsilon.unwrap_or(o.epsilon);
            o.flow = s.flow;
            let report = with_jobs(cli.jobs, || phase_experiment(&d, &s.sde, &s.phases))??;
            emit_json(&a.output, &report)
        }
        Command::Plot(a) => {
            let d = read_domain(&a.domain)?;
            let traces = a.trace.iter().map(|p| read_trace_csv(p)).collect::<CliResult<Vec<_>>>()?;
            let mut opts = SvgOptions::default();
            opts.size = a.size.unwrap_or(opts.size);
            let svg = render_svg(&d, &traces, &opts);
            let svg = svg.replacen('\n', &format!("\n<!-- schema_version: {SCHEMA_VERSION} -->\n"), 1);
            emit(&a.output, &svg)
        }
        Command::Oracle {
            kind: OracleKind::Fd(a),
        } => {
            let d = read_domain(&a.domain)?;
            let h = a.grid_h.unwrap_or(s.oracle.grid_h);
            let g = fd_green_oracle(&d, a.pole, h)?;
            let om = fd_harmonic_measures(&d, h)?;
            let points: Vec<Value> = a
                .at
                .iter()
                .map(|&w| {
                    json!({
                        "at": [w.re, w.im],
                        "green": g.value(w),
                        "omega": om.iter().map(|o| o.value(w)).collect::<Vec<_>>(),
                    })
                })
                .collect();
            emit_json(
                &a.output,
                &json!({
                    "schema_version": SCHEMA_VERSION,
                    "domain": d,
                    "pole": [a.pole.re, a.pole.im],
                    "grid_h": h,
                    "points": points,
                }),
            )
        }
        Command::Oracle {
            kind: OracleKind::Mc(a),
        } => {
            let d = read_domain(&a.domain)?;
            if d.distance_to_boundary(a.at) <= 0.0 {
                return Err(CliError::Usage("--at must be an interior point".into()));
            }
            let walks = a.walks.unwrap_or(s.oracle.walks);
            let est = mc_harmonic_measure_oracle(&d, a.at, walks, a.seed);
            emit_json(
                &a.output,
                &json!({
                    "schema_version": SCHEMA_VERSION,
                    "domain": d,
                    "at": [a.at.re, a.at.im],
                    "seed": a.seed,
                    "estimate": est,
                }),
            )
        }
    }
}

/// Read the points of a trace CSV; `#` lines are comments.
fn read_trace_csv(path: &Path) -> CliResult<Vec<Complex64>> {
    let text = fs::read_to_string(path)?;
    let bad = |line: usize| CliError::Failure(Error::Serde(format!("{}:{line}: malformed trace row", path.display())));
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.starts_with('#') || line.starts_with("t,") || line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() < 3 {
            return Err(bad(i + 1));
        }
        let re: f64 = cols[1].parse().map_err(|_| bad(i + 1))?;
        let im: f64 = cols[2].parse().map_err(|_| bad(i + 1))?;
        points.push(Complex64::new(re, im));
    }
    Ok(points)
}
