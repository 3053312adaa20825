use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cvtp::average::average_value;
use cvtp::optimize::{maximize_three_param, Objective, OptimizationResult};
use cvtp::oracle::{oracle_average_fidelity, oracle_state_fidelity};
use cvtp::sweep::{self, SecondaryAxis, SweepSpec, PRESETS};
use cvtp::{
    state_fidelity, ChannelSqueezing, CoherentAmplitude, FamilyKind, InputDistribution,
    ProtocolSettings,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

/// Teleportation fidelity of coherent states through a finitely squeezed channel.
#[derive(Parser)]
#[command(name = "cvtp", version)]
struct Cli {
    /// File of key=value lines supplying defaults for any flag.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fidelity of one coherent state under given settings.
    Fidelity(FidelityArgs),
    /// Best settings for an input family.
    Optimize(OptimizeArgs),
    /// Optimize over a grid and emit CSV.
    Sweep(SweepArgs),
    /// Compare the simulation oracle against the closed forms.
    OracleCheck(OracleCheckArgs),
}

#[derive(Args)]
struct FidelityArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    alpha_re: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    alpha_im: f64,
    /// Channel squeezing parameter.
    #[arg(long)]
    r: f64,
    /// Beam-splitter angle in radians.
    #[arg(long)]
    theta: f64,
    #[arg(long, allow_negative_numbers = true)]
    gu: f64,
    #[arg(long, allow_negative_numbers = true)]
    gv: f64,
    /// Also evaluate by wavefunction simulation.
    #[arg(long)]
    oracle: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    ClosedForm,
    Quadrature,
    Simulation,
}

#[derive(Args)]
struct ObjectiveFlags {
    /// How averaged fidelities are evaluated.
    #[arg(long, value_enum, default_value = "closed-form")]
    objective: ObjectiveArg,
    /// Nodes per axis for the simulation objective.
    #[arg(long, default_value_t = 16)]
    budget: usize,
}

impl ObjectiveFlags {
    fn objective(&self) -> Objective {
        match self.objective {
            ObjectiveArg::ClosedForm => Objective::ClosedForm,
            ObjectiveArg::Quadrature => Objective::Quadrature,
            ObjectiveArg::Simulation => Objective::Simulation {
                budget: self.budget,
            },
        }
    }
}

#[derive(Args)]
struct OptimizeArgs {
    #[arg(long, value_parser = parse_family)]
    family: FamilyKind,
    /// Radius of the line, circle or disk.
    #[arg(long = "R", alias = "radius")]
    radius: Option<f64>,
    /// Inverse variance of the Gaussian.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    beta_re: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    beta_im: f64,
    #[arg(long)]
    r: f64,
    #[command(flatten)]
    objective: ObjectiveFlags,
    /// Also print the result as a CSV row with header.
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// Named sweep; custom flags below are ignored except --objective.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(PRESETS))]
    preset: Option<String>,
    #[arg(long, value_parser = parse_family, required_unless_present = "preset")]
    family: Option<FamilyKind>,
    #[arg(long = "R", alias = "radius", default_value_t = 1.0)]
    radius: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 0.0)]
    beta_abs: f64,
    /// Argument of β in degrees.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    beta_arg: f64,
    /// Squeezing values: a comma list or start:stop:step.
    #[arg(long, value_parser = parse_grid)]
    r_grid: Option<Grid>,
    /// Family parameter varied by the secondary grid: R, lambda, beta-abs or beta-arg.
    #[arg(long, value_parser = parse_axis)]
    secondary: Option<SecondaryAxis>,
    #[arg(long, value_parser = parse_grid)]
    secondary_grid: Option<Grid>,
    #[command(flatten)]
    objective: ObjectiveFlags,
    /// CSV destination; stdout when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct OracleCheckArgs {
    /// Random state fidelities to compare.
    #[arg(long, default_value_t = 20)]
    samples: usize,
    /// Random averaged fidelities to compare per family.
    #[arg(long, default_value_t = 1)]
    averages: usize,
    /// Nodes per axis for averaged fidelities.
    #[arg(long, default_value_t = 12)]
    budget: usize,
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone)]
struct Grid(Vec<f64>);

fn parse_family(s: &str) -> Result<FamilyKind, String> {
    FamilyKind::parse(s)
        .ok_or_else(|| format!("unknown family `{s}` (real, imag, circle, disk, gaussian)"))
}

fn parse_axis(s: &str) -> Result<SecondaryAxis, String> {
    SecondaryAxis::parse(s)
        .ok_or_else(|| format!("unknown axis `{s}` (R, lambda, beta-abs, beta-arg)"))
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    let parts: Vec<&str> = s.split(':').collect();
    if let [start, stop, step] = parts[..] {
        let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
        if step.is_nan() || step <= 0.0 || stop.is_nan() || start.is_nan() || stop < start {
            return Err("range needs start <= stop and a positive step".into());
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        return Ok(Grid((0..=n).map(|k| start + k as f64 * step).collect()));
    }
    s.split(',').map(num).collect::<Result<_, _>>().map(Grid)
}

/// Reads `key=value` lines into flags. Blank lines and `#` comments are skipped;
/// `true`/`false` values toggle switches.
fn config_flags(path: &PathBuf) -> Result<Vec<(String, Vec<OsString>)>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("{}:{}: expected key=value", path.display(), n + 1))?;
        let key = key.trim().trim_start_matches("--").to_string();
        let flag = OsString::from(format!("--{key}"));
        let args = match value.trim() {
            "true" => vec![flag],
            "false" => vec![],
            v => vec![flag, OsString::from(v)],
        };
        out.push((key, args));
    }
    Ok(out)
}

fn find_config(args: &[OsString]) -> Option<PathBuf> {
    let mut iter = args.iter().map(|a| a.to_string_lossy());
    while let Some(a) = iter.next() {
        if a == "--config" {
            return iter.next().map(|p| PathBuf::from(p.as_ref()));
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

/// Splices config entries in after the subcommand, skipping keys already given
/// on the command line.
fn merge_config(mut args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(path) = find_config(&args) else {
        return Ok(args);
    };
    let given: Vec<String> = args
        .iter()
        .filter_map(|a| {
            a.to_str()?
                .strip_prefix("--")
                .map(|k| k.split('=').next().unwrap_or(k).to_string())
        })
        .collect();
    let Some(pos) = args.iter().position(|a| {
        matches!(
            a.to_str(),
            Some("fidelity" | "optimize" | "sweep" | "oracle-check")
        )
    }) else {
        return Ok(args);
    };
    let extra: Vec<OsString> = config_flags(&path)?
        .into_iter()
        .filter(|(key, _)| key != "config" && !given.contains(key))
        .flat_map(|(_, a)| a)
        .collect();
    args.splice(pos + 1..pos + 1, extra);
    Ok(args)
}

/// Twelve significant digits.
fn sig12(v: f64) -> String {
    // Round first so values like 0.9999999999999 pick up the carried digit.
    let v: f64 = format!("{v:.11e}").parse().unwrap_or(v);
    let mag = v.abs();
    if v == 0.0 || !v.is_finite() {
        format!("{v}")
    } else if (1e-4..1e12).contains(&mag) {
        let decimals = (11 - mag.log10().floor() as i32).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{v:.11e}")
    }
}

fn exit_for(e: &cvtp::Error) -> u8 {
    match e {
        cvtp::Error::InvalidParameter { .. } | cvtp::Error::InvalidSweep(_) => EXIT_USAGE,
        cvtp::Error::Io(_) => EXIT_FAILURE,
        _ => EXIT_NUMERICAL,
    }
}

fn fail(e: cvtp::Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(exit_for(&e))
}

fn cmd_fidelity(a: &FidelityArgs) -> Result<ExitCode, cvtp::Error> {
    let r = ChannelSqueezing::new(a.r)?;
    let s = ProtocolSettings::new(a.theta, a.gu, a.gv)?;
    let alpha = CoherentAmplitude::new(a.alpha_re, a.alpha_im);
    let f = state_fidelity(alpha, r, &s);
    println!("fidelity {}", sig12(f));
    if a.oracle {
        let o = oracle_state_fidelity(alpha, r, &s)?;
        println!("oracle {}", sig12(o));
        println!("difference {:.3e}", (f - o).abs());
    }
    Ok(ExitCode::SUCCESS)
}

fn family_of(a: &OptimizeArgs) -> Result<InputDistribution, cvtp::Error> {
    let radius = || {
        a.radius.ok_or_else(|| {
            cvtp::Error::InvalidSweep(format!("--R is required for the {} family", a.family))
        })
    };
    match a.family {
        FamilyKind::RealLine => InputDistribution::real_line(radius()?),
        FamilyKind::ImagLine => InputDistribution::imag_line(radius()?),
        FamilyKind::Circumference => InputDistribution::circumference(radius()?),
        FamilyKind::Disk => InputDistribution::disk(radius()?),
        FamilyKind::Gaussian => {
            let lambda = a.lambda.ok_or_else(|| {
                cvtp::Error::InvalidSweep("--lambda is required for the gaussian family".into())
            })?;
            InputDistribution::gaussian(lambda, CoherentAmplitude::new(a.beta_re, a.beta_im))
        }
    }
}

fn print_result(res: &OptimizationResult, objective: Objective) {
    let s = res.settings;
    println!("family {}", res.family.kind());
    println!("objective {}", objective.name());
    println!("r {}", res.r.value());
    println!("theta {}", sig12(s.theta));
    println!("g_u {}", sig12(s.g_u));
    println!("g_v {}", sig12(s.g_v));
    println!("fidelity {}", sig12(res.value));
    println!("one_param {}", sig12(res.baseline_one_param));
    println!("original {}", sig12(res.baseline_original));
    println!("residual {:.3e}", res.stationarity_residual);
    println!("starts {}", res.starts_tried);
    println!("converged {}", res.converged);
}

fn cmd_optimize(a: &OptimizeArgs) -> Result<ExitCode, cvtp::Error> {
    let family = family_of(a)?;
    let objective = a.objective.objective();
    let res = maximize_three_param(&family, ChannelSqueezing::new(a.r)?, objective)?;
    print_result(&res, objective);
    if a.csv {
        let (p1, p2) = match family {
            InputDistribution::Gaussian { lambda, beta } => (lambda, beta.magnitude()),
            _ => (a.radius.unwrap_or(0.0), 0.0),
        };
        let row = sweep::SweepRow {
            family: family.kind().name().to_string(),
            param1: p1,
            param2: p2,
            r: a.r,
            theta_opt: res.settings.theta,
            gu_opt: res.settings.g_u,
            gv_opt: res.settings.g_v,
            f_opt: res.value,
            f_one_param: res.baseline_one_param,
            f_original: res.baseline_original,
            residual: res.stationarity_residual,
            converged: res.converged,
        };
        sweep::write_csv(&[row], io::stdout().lock())?;
    }
    if !res.converged {
        eprintln!("error: optimizer did not converge");
        return Ok(ExitCode::from(EXIT_NUMERICAL));
    }
    Ok(ExitCode::SUCCESS)
}

fn sweep_spec(a: &SweepArgs) -> Result<SweepSpec, cvtp::Error> {
    let mut spec = match (&a.preset, a.family) {
        (Some(name), _) => sweep::preset(name)
            .ok_or_else(|| cvtp::Error::InvalidSweep(format!("no preset {name}")))?,
        (None, Some(family)) => {
            let mut spec = SweepSpec::new(family, sweep::default_r_grid());
            spec.radius = a.radius;
            spec.lambda = a.lambda;
            spec.beta_magnitude = a.beta_abs;
            spec.beta_arg_deg = a.beta_arg;
            if let Some(axis) = a.secondary {
                spec.secondary = axis;
            }
            spec.secondary_grid = match &a.secondary_grid {
                Some(Grid(g)) => g.clone(),
                None => vec![match spec.secondary {
                    SecondaryAxis::Radius => a.radius,
                    SecondaryAxis::Lambda => a.lambda,
                    SecondaryAxis::BetaMagnitude => a.beta_abs,
                    SecondaryAxis::BetaArgDeg => a.beta_arg,
                }],
            };
            if let Some(Grid(g)) = &a.r_grid {
                spec.r_grid = g.clone();
            }
            spec
        }
        (None, None) => {
            return Err(cvtp::Error::InvalidSweep(
                "either --preset or --family is required".into(),
            ))
        }
    };
    spec.objective = a.objective.objective();
    spec.validate()?;
    Ok(spec)
}

fn cmd_sweep(a: &SweepArgs) -> Result<ExitCode, cvtp::Error> {
    let spec = sweep_spec(a)?;
    let rows = sweep::run_sweep(&spec)?;
    match &a.output {
        Some(path) => sweep::write_csv(&rows, BufWriter::new(File::create(path)?))?,
        None => sweep::write_csv(&rows, io::stdout().lock())?,
    }
    let failed = rows.iter().filter(|r| !r.converged).count();
    if failed > 0 {
        eprintln!("warning: {failed} of {} rows did not converge", rows.len());
    }
    Ok(ExitCode::SUCCESS)
}

fn random_settings(rng: &mut ChaCha8Rng) -> ProtocolSettings {
    ProtocolSettings {
        theta: rng.gen_range(0.1..1.47),
        g_u: rng.gen_range(0.0..3.0),
        g_v: rng.gen_range(0.0..3.0),
    }
}

fn cmd_oracle_check(a: &OracleCheckArgs) -> Result<ExitCode, cvtp::Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut worst_state: f64 = 0.0;
    for _ in 0..a.samples {
        let r = ChannelSqueezing::new(rng.gen_range(0.0..1.5))?;
        let alpha = CoherentAmplitude::from_polar(
            3.0 * rng.gen::<f64>().sqrt(),
            rng.gen_range(0.0..std::f64::consts::TAU),
        );
        let s = random_settings(&mut rng);
        let dev = (oracle_state_fidelity(alpha, r, &s)? - state_fidelity(alpha, r, &s)).abs();
        worst_state = worst_state.max(dev);
    }
    println!(
        "state fidelity: {} samples, max deviation {worst_state:.3e}",
        a.samples
    );

    let mut worst_avg: f64 = 0.0;
    for kind in FamilyKind::ALL {
        let mut worst: f64 = 0.0;
        for _ in 0..a.averages {
            let r = ChannelSqueezing::new(rng.gen_range(0.0..1.5))?;
            let s = random_settings(&mut rng);
            let radius = rng.gen_range(0.2..2.0);
            let family = match kind {
                FamilyKind::RealLine => InputDistribution::real_line(radius)?,
                FamilyKind::ImagLine => InputDistribution::imag_line(radius)?,
                FamilyKind::Circumference => InputDistribution::circumference(radius)?,
                FamilyKind::Disk => InputDistribution::disk(radius)?,
                FamilyKind::Gaussian => InputDistribution::gaussian(
                    rng.gen_range(0.5..4.0),
                    CoherentAmplitude::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                )?,
            };
            let oracle = oracle_average_fidelity(&family, r, &s, a.budget)?;
            worst = worst.max((oracle.value - average_value(&family, r, &s)?).abs());
        }
        println!(
            "{kind} average: {} samples, max deviation {worst:.3e}",
            a.averages
        );
        worst_avg = worst_avg.max(worst);
    }
    let worst = worst_state.max(worst_avg);
    println!("max deviation {worst:.3e}");
    if worst > a.tolerance {
        eprintln!("error: deviation exceeds tolerance {:.1e}", a.tolerance);
        return Ok(ExitCode::from(EXIT_FAILURE));
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let args = match merge_config(std::env::args_os().collect()) {
        Ok(args) => args,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let cli = Cli::parse_from(args);
    let outcome = match &cli.command {
        Command::Fidelity(a) => cmd_fidelity(a),
        Command::Optimize(a) => cmd_optimize(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::OracleCheck(a) => cmd_oracle_check(a),
    };
    let code = outcome.unwrap_or_else(fail);
    let _ = io::stdout().flush();
    code
}
