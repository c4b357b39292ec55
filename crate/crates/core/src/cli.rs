//! Command-line front end: `entangle`, `speed`, `echo-fit` and `sweep`.
//!
//! Every flag can also come from a JSON config file (`--config`); flags win
//! over file values. `XXZ_SEED` sets the default seed. Angles accept plain
//! numbers or multiples of pi such as `pi/18`, `-3pi/32` or `2*pi`.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fmt::sig;
use crate::fitting::{fit_quadratic_decay, read_samples_csv, speed_from_fit, echo_samples, reference_alpha_grid, write_samples_csv, Weighting};
use crate::gates::ModelParams;
use crate::protocols::PrepAngles;
use crate::sampling::{RngSeed, DEFAULT_SHOTS};
use crate::sweep::{run_single, run_sweep, write_sweep_csv, Mode, Param, PointParams, Report, SweepSpec};

pub const SEED_ENV: &str = "XXZ_SEED";
pub const DEFAULT_SEED: u64 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INCONSISTENT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "xxz", version, about = "Entanglement distance and evolution speed of a two-spin XXZ system")]
#[command(allow_negative_numbers = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Entanglement distance of qubit 0 after evolution.
    Entangle(PointArgs),
    /// Energy variance and speed of evolution of the prepared state.
    Speed(PointArgs),
    /// Recover the speed from the small-α decay of the echo.
    EchoFit(EchoFitArgs),
    /// Two-parameter sweep written as CSV.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct PointArgs {
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub theta0: Option<f64>,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub theta1: Option<f64>,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub phi0: Option<f64>,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub phi1: Option<f64>,
    /// Coupling J.
    #[arg(short = 'J', value_parser = parse_angle, allow_hyphen_values = true)]
    pub j: Option<f64>,
    /// Anisotropy d.
    #[arg(short = 'd', value_parser = parse_angle, allow_hyphen_values = true)]
    pub d: Option<f64>,
    /// Evolution time (ħ = 1).
    #[arg(short = 't', value_parser = parse_angle, allow_hyphen_values = true)]
    pub t: Option<f64>,
    /// Shots per circuit, or `exact` to skip sampling.
    #[arg(long, value_parser = parse_shots)]
    pub shots: Option<Shots>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file (JSON summary for single runs, CSV for sweeps).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EchoFitArgs {
    #[command(flatten)]
    pub point: PointArgs,
    /// Also write the decay samples as CSV (alpha,s2,std_error).
    #[arg(long)]
    pub samples_out: Option<PathBuf>,
    /// Fit samples read from CSV instead of simulating them.
    #[arg(long)]
    pub samples_in: Option<PathBuf>,
    /// Inverse-variance weights (error bars floored at 1/shots).
    #[arg(long)]
    pub weighted: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub point: PointArgs,
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<Mode>,
    /// Two comma-separated names from theta0, theta1, phi0, phi1, J, d.
    #[arg(long)]
    pub vary: Option<String>,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub start: Option<f64>,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub stop: Option<f64>,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub step: Option<f64>,
    /// Evaluate grid points one at a time.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Shots {
    Count(u64),
    Exact(ExactTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExactTag {
    Exact,
}

impl Shots {
    fn count(self) -> Option<u64> {
        match self {
            Shots::Count(n) => Some(n),
            Shots::Exact(_) => None,
        }
    }
}

/// A number or a pi-multiple string in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Number(f64),
    Expr(String),
}

impl Value {
    fn get(&self) -> Result<f64> {
        match self {
            Value::Number(x) => Ok(*x),
            Value::Expr(s) => parse_angle(s).map_err(Error::InvalidInput),
        }
    }
}

/// Config file contents; every field is optional and mirrors a flag.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub theta0: Option<Value>,
    pub theta1: Option<Value>,
    pub phi0: Option<Value>,
    pub phi1: Option<Value>,
    #[serde(rename = "J")]
    pub j: Option<Value>,
    pub d: Option<Value>,
    pub t: Option<Value>,
    pub shots: Option<Shots>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub mode: Option<Mode>,
    pub vary: Option<[Param; 2]>,
    pub start: Option<Value>,
    pub stop: Option<Value>,
    pub step: Option<Value>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::invalid(format!("config {}: {e}", path.display())))
    }
}

pub fn parse_angle(s: &str) -> std::result::Result<f64, String> {
    let raw = s.trim();
    let lower = raw.to_ascii_lowercase();
    let bad = || format!("cannot parse {raw:?} as a number or multiple of pi");
    let x = if let Some(pos) = lower.find("pi") {
        let (head, tail) = (&lower[..pos], &lower[pos + 2..]);
        let head = head.trim_end_matches('*').trim();
        let coeff = match head {
            "" | "+" => 1.0,
            "-" => -1.0,
            h => h.parse::<f64>().map_err(|_| bad())?,
        };
        let tail = tail.trim();
        let denom = if tail.is_empty() {
            1.0
        } else {
            tail.strip_prefix('/').ok_or_else(bad)?.trim().parse::<f64>().map_err(|_| bad())?
        };
        coeff * std::f64::consts::PI / denom
    } else {
        lower.parse::<f64>().map_err(|_| bad())?
    };
    if x.is_finite() { Ok(x) } else { Err(bad()) }
}

fn parse_shots(s: &str) -> std::result::Result<Shots, String> {
    if s.eq_ignore_ascii_case("exact") {
        return Ok(Shots::Exact(ExactTag::Exact));
    }
    match s.parse::<u64>() {
        Ok(0) | Err(_) => Err(format!("shots must be a positive integer or `exact`, got {s:?}")),
        Ok(n) => Ok(Shots::Count(n)),
    }
}

fn parse_mode(s: &str) -> std::result::Result<Mode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Flags and config merged into concrete settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub point: PointParams,
    pub shots: Option<u64>,
    pub seed: RngSeed,
    pub out: Option<PathBuf>,
}

/// Defaults: θ₀ = θ₁ = π/2, φ₀ = φ₁ = π/4, J = 1, d = 1, t = 1.
pub fn default_point() -> PointParams {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
    PointParams {
        prep: PrepAngles { theta0: FRAC_PI_2, theta1: FRAC_PI_2, phi0: FRAC_PI_4, phi1: FRAC_PI_4 },
        model: ModelParams { j: 1.0, d: 1.0, t: 1.0 },
    }
}

fn pick(flag: Option<f64>, file: &Option<Value>, default: f64) -> Result<f64> {
    match (flag, file) {
        (Some(x), _) => Ok(x),
        (None, Some(v)) => v.get(),
        (None, None) => Ok(default),
    }
}

pub fn resolve(args: &PointArgs, cfg: &Config, env_seed: Option<&str>) -> Result<Resolved> {
    let def = default_point();
    let prep = PrepAngles::new(
        pick(args.theta0, &cfg.theta0, def.prep.theta0)?,
        pick(args.theta1, &cfg.theta1, def.prep.theta1)?,
        pick(args.phi0, &cfg.phi0, def.prep.phi0)?,
        pick(args.phi1, &cfg.phi1, def.prep.phi1)?,
    )?;
    let model = ModelParams::new(
        pick(args.j, &cfg.j, def.model.j)?,
        pick(args.d, &cfg.d, def.model.d)?,
        pick(args.t, &cfg.t, def.model.t)?,
    )?;
    let shots = match args.shots.or(cfg.shots) {
        Some(s) => s.count(),
        None => Some(DEFAULT_SHOTS),
    };
    if shots == Some(0) {
        return Err(Error::invalid("shots must be positive"));
    }
    let seed = match (args.seed, cfg.seed, env_seed) {
        (Some(s), _, _) | (None, Some(s), _) => s,
        (None, None, Some(e)) => e
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("{SEED_ENV}={e:?} is not an unsigned integer")))?,
        (None, None, None) => DEFAULT_SEED,
    };
    Ok(Resolved {
        point: PointParams { prep, model },
        shots,
        seed: RngSeed(seed),
        out: args.out.clone().or_else(|| cfg.out.clone()),
    })
}

fn load_config(args: &PointArgs) -> Result<Config> {
    args.config.as_deref().map(Config::load).transpose().map(Option::unwrap_or_default)
}

fn env_seed() -> Option<String> {
    std::env::var(SEED_ENV).ok()
}

pub fn sweep_spec(args: &SweepArgs, cfg: &Config, env_seed: Option<&str>) -> Result<(SweepSpec, Option<PathBuf>)> {
    let r = resolve(&args.point, cfg, env_seed)?;
    let mode = args.mode.or(cfg.mode).unwrap_or(Mode::Entanglement);
    let vary = match (&args.vary, cfg.vary) {
        (Some(v), _) => {
            let names: Vec<&str> = v.split(',').map(str::trim).collect();
            match names[..] {
                [a, b] => (a.parse::<Param>()?, b.parse::<Param>()?),
                _ => return Err(Error::invalid(format!("--vary needs two comma-separated names, got {v:?}"))),
            }
        }
        (None, Some([a, b])) => (a, b),
        (None, None) => (Param::Theta0, Param::Theta1),
    };
    let step_default = std::f64::consts::PI / 18.0;
    let range = (
        pick(args.start, &cfg.start, 0.0)?,
        pick(args.stop, &cfg.stop, std::f64::consts::PI)?,
        pick(args.step, &cfg.step, step_default)?,
    );
    let spec = SweepSpec { mode, vary, range, fixed: r.point, shots: r.shots, seed: r.seed };
    spec.validate()?;
    Ok((spec, r.out))
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn print_report(r: &Report, w: &mut dyn Write) -> io::Result<()> {
    let n = |x: f64| sig(x, 10);
    let p = &r.params;
    writeln!(w, "mode       {}", r.mode)?;
    writeln!(
        w,
        "params     theta0={} theta1={} phi0={} phi1={} J={} d={} t={}",
        n(p.prep.theta0), n(p.prep.theta1), n(p.prep.phi0), n(p.prep.phi1), n(p.model.j), n(p.model.d), n(p.model.t)
    )?;
    let label = match r.mode {
        Mode::Entanglement => "E",
        Mode::Speed | Mode::EchoFit => "v/gamma",
    };
    writeln!(w, "exact      {label} = {}", n(r.exact))?;
    if let Some(s) = r.sampled {
        write!(w, "sampled    {label} = {}", n(s))?;
        if let Some(se) = r.std_error {
            write!(w, " ± {}", n(se))?;
        }
        writeln!(w)?;
        writeln!(w, "difference {}", n(s - r.exact))?;
        if let Some(z) = r.z_score() {
            writeln!(w, "z-score    {z:.3}")?;
        }
    }
    if let Some(f) = &r.echo_fit {
        writeln!(w, "fit        |S|^2 = 1 - c·alpha^2, c = {}", n(f.fit.c))?;
        writeln!(w, "           <dH^2>/J^2 per alpha^2 = {}", n(f.fit.var_h_per_alpha2))?;
        writeln!(w, "           <dH^2>/J^2 per (Jt)^2  = {}", n(f.fit.var_h_per_jt2))?;
        writeln!(w, "           rms residual = {}", n(f.fit.rms_residual))?;
        writeln!(w, "noise-free c = {} (per (Jt)^2: {})", n(f.noise_free.c), n(f.noise_free.var_h_per_jt2))?;
    }
    writeln!(w, "seed       {}", r.seed)
}

fn write_json_summary(r: &Report, out: &Option<PathBuf>) -> Result<()> {
    if let Some(path) = out {
        let mut f = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut f, r)?;
        writeln!(f)?;
    }
    Ok(())
}

fn single(mode: Mode, args: &PointArgs) -> Result<()> {
    let cfg = load_config(args)?;
    let r = resolve(args, &cfg, env_seed().as_deref())?;
    let report = run_single(mode, &r.point, r.shots, r.seed)?;
    print_report(&report, &mut io::stdout().lock())?;
    write_json_summary(&report, &r.out)
}

fn echo_fit_cmd(args: &EchoFitArgs) -> Result<()> {
    let cfg = load_config(&args.point)?;
    let r = resolve(&args.point, &cfg, env_seed().as_deref())?;
    let weighting = if args.weighted {
        Weighting::InverseVariance { floor: 1.0 / r.shots.unwrap_or(DEFAULT_SHOTS) as f64 }
    } else {
        Weighting::Unweighted
    };

    let samples = match &args.samples_in {
        Some(path) => read_samples_csv(File::open(path)?)?,
        None => echo_samples(&r.point.prep, r.point.model.d, &reference_alpha_grid(), r.shots, r.seed)?,
    };
    if let Some(path) = &args.samples_out {
        write_samples_csv(&samples, BufWriter::new(File::create(path)?))?;
    }

    let mut report = run_single(Mode::EchoFit, &r.point, r.shots, r.seed)?;
    if args.samples_in.is_some() || args.weighted {
        let fit = fit_quadratic_decay(&samples, weighting)?;
        let v = speed_from_fit(&fit, r.point.model.j)?;
        if let Some(e) = report.echo_fit.as_mut() {
            e.fit = fit;
            e.v_over_gamma_fit = v;
        }
        report.sampled = Some(v);
        report.std_error = None;
    }
    print_report(&report, &mut io::stdout().lock())?;
    write_json_summary(&report, &r.out)
}

#[derive(Serialize)]
struct SweepSummary<'a> {
    mode: Mode,
    params: PointParams,
    vary: [Param; 2],
    range: [f64; 3],
    shots: Option<u64>,
    seed: u64,
    rows: usize,
    out: Option<&'a Path>,
}

fn sweep_cmd(args: &SweepArgs) -> Result<()> {
    let cfg = load_config(&args.point)?;
    let (spec, out) = sweep_spec(args, &cfg, env_seed().as_deref())?;
    let exec = if args.sequential { Execution::Sequential } else { Execution::Parallel };
    let rows = run_sweep(&spec, exec)?;
    write_sweep_csv(&rows, open_out(&out)?)?;
    let summary = SweepSummary {
        mode: spec.mode,
        params: spec.fixed,
        vary: [spec.vary.0, spec.vary.1],
        range: [spec.range.0, spec.range.1, spec.range.2],
        shots: spec.shots,
        seed: spec.seed.0,
        rows: rows.len(),
        out: out.as_deref(),
    };
    eprintln!("{}", serde_json::to_string(&summary)?);
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Entangle(a) => single(Mode::Entanglement, a),
        Command::Speed(a) => single(Mode::Speed, a),
        Command::EchoFit(a) => echo_fit_cmd(a),
        Command::Sweep(a) => sweep_cmd(a),
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidInput(_) | Error::DegenerateFit(_) | Error::Json(_) | Error::Csv(_) => EXIT_USAGE,
        Error::Inconsistent(_) => EXIT_INCONSISTENT,
        Error::FitQuality(_) | Error::Io(_) => EXIT_FAILURE,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("0.5").unwrap(), 0.5);
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("-pi").unwrap(), -PI);
        assert_eq!(parse_angle("pi/18").unwrap(), PI / 18.0);
        assert_eq!(parse_angle("-3pi/32").unwrap(), -3.0 * PI / 32.0);
        assert_eq!(parse_angle("2*pi").unwrap(), 2.0 * PI);
        assert_eq!(parse_angle(" PI / 4 ").unwrap(), PI / 4.0);
        assert!(parse_angle("pie").is_err());
        assert!(parse_angle("x").is_err());
        assert!(parse_angle("pi/0").is_err());
    }

    #[test]
    fn shots_values() {
        assert_eq!(parse_shots("exact").unwrap(), Shots::Exact(ExactTag::Exact));
        assert_eq!(parse_shots("1024").unwrap(), Shots::Count(1024));
        assert!(parse_shots("0").is_err());
        assert!(parse_shots("-1").is_err());
    }

    #[test]
    fn flags_override_config_and_env_sets_default_seed() {
        let cfg: Config = serde_json::from_str(r#"{"theta0": "pi/3", "J": 2.0, "shots": "exact", "seed": 9}"#).unwrap();
        let args = PointArgs { j: Some(0.5), ..Default::default() };
        let r = resolve(&args, &cfg, Some("77")).unwrap();
        assert_eq!(r.point.prep.theta0, PI / 3.0);
        assert_eq!(r.point.model.j, 0.5);
        assert_eq!(r.shots, None);
        assert_eq!(r.seed, RngSeed(9));

        let r = resolve(&PointArgs::default(), &Config::default(), Some("77")).unwrap();
        assert_eq!((r.seed, r.shots), (RngSeed(77), Some(DEFAULT_SHOTS)));
        assert_eq!(r.point, default_point());
        assert!(resolve(&PointArgs::default(), &Config::default(), Some("x")).is_err());
    }

    #[test]
    fn config_rejects_unknown_keys() {
        assert!(serde_json::from_str::<Config>(r#"{"theta2": 1}"#).is_err());
        let cfg: Config = serde_json::from_str(r#"{"vary": ["J", "d"], "mode": "speed", "step": "pi/18"}"#).unwrap();
        assert_eq!(cfg.vary, Some([Param::J, Param::D]));
    }

    #[test]
    fn sweep_spec_defaults_and_errors() {
        let args = SweepArgs {
            point: PointArgs::default(),
            mode: None,
            vary: Some("phi0, phi1".into()),
            start: None,
            stop: Some(2.0 * PI),
            step: None,
            sequential: false,
        };
        let (spec, _) = sweep_spec(&args, &Config::default(), None).unwrap();
        assert_eq!(spec.vary, (Param::Phi0, Param::Phi1));
        assert_eq!(spec.points().unwrap().len(), 37 * 37);

        let bad = SweepArgs { vary: Some("phi0".into()), ..args.clone() };
        assert!(sweep_spec(&bad, &Config::default(), None).is_err());
        let bad = SweepArgs { step: Some(-0.1), ..args };
        assert!(sweep_spec(&bad, &Config::default(), None).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::invalid("x")), EXIT_USAGE);
        assert_eq!(exit_code(&Error::Inconsistent("x".into())), EXIT_INCONSISTENT);
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
