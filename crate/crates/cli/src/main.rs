mod config;
mod diagnose;
mod error;
mod simulate;
mod table;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nldiff::diagnostics::log_times;
use nldiff::profile::f_mu_grid;
use nldiff::{solve_a, AsymptoticConstants, Execution, InitialCondition, OdeControls, ProfileSpec};
use serde_json::json;

use config::{FlagObject, RunConfig, Solver};
use diagnose::{parse_profile_arg, parse_window, DiagnoseInputs};
use error::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "nldiff", version, about = "Diffusion with a mass-dependent diffusivity: solvers and diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solver and write profiles, moments and a manifest.
    Simulate(SimulateArgs),
    /// Integrate the rescaled-time ODE and write (t, a, M).
    MassOde(MassOdeArgs),
    /// Fit decay laws and measure the approach to the attractor.
    Diagnose(DiagnoseArgs),
    /// Tabulate a self-similar profile f_mu.
    Profile(ProfileArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON run config; its keys override the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    solver: Option<Solver>,
    /// Domain length (fd and kernel).
    #[arg(long = "length", alias = "L")]
    length: Option<f64>,
    /// Number of grid nodes.
    #[arg(long = "nx")]
    nodes: Option<usize>,
    #[arg(long)]
    t_end: Option<f64>,
    /// Comma-separated output times.
    #[arg(long, value_delimiter = ',')]
    outputs: Option<Vec<f64>>,
    /// Comma-separated moment-only times.
    #[arg(long, value_delimiter = ',')]
    moment_times: Option<Vec<f64>>,
    /// Initial condition as JSON, e.g. '{"variant":"indicator","params":{"a":1,"b":2}}'.
    #[arg(long)]
    ic: Option<String>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    modes: Option<usize>,
    #[arg(long)]
    rtol: Option<f64>,
    #[arg(long)]
    atol: Option<f64>,
    /// Gauss-Legendre nodes per kernel quadrature panel.
    #[arg(long)]
    quad_nodes: Option<usize>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    label: Option<String>,
    /// Run every loop on the calling thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct MassOdeArgs {
    #[arg(long)]
    ic: String,
    #[arg(long)]
    t_end: f64,
    /// First nonzero output time; rows are log-spaced from here to t_end.
    #[arg(long, default_value_t = 1e-3)]
    t_min: f64,
    #[arg(long, default_value_t = 400)]
    points: usize,
    #[arg(long)]
    rtol: Option<f64>,
    #[arg(long)]
    atol: Option<f64>,
    /// CSV path for the (t, a, M) table.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DiagnoseArgs {
    /// Moments CSV (t, M, M1, ...).
    #[arg(long)]
    moments: Option<PathBuf>,
    /// (t, a, M) CSV from mass-ode or a simulate run.
    #[arg(long)]
    mass_ode: Option<PathBuf>,
    /// Profile CSV as T=PATH; repeatable.
    #[arg(long = "profile", value_parser = parse_profile_arg)]
    profiles: Vec<(f64, PathBuf)>,
    /// First moment for the attractor; defaults to the first moments row after t = 0.
    #[arg(long)]
    m1: Option<f64>,
    #[arg(long, value_parser = parse_window, default_value = "5e3,5e4")]
    mass_window: (f64, f64),
    #[arg(long, value_parser = parse_window, default_value = "5e3,5e4")]
    a_window: (f64, f64),
    #[arg(long, default_value_t = 10.0)]
    eta_max: f64,
    #[arg(long, default_value_t = 0.01)]
    c_step: f64,
    /// Report path; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ProfileArgs {
    #[arg(long)]
    mu: f64,
    #[arg(long, default_value_t = 0.0)]
    xi_min: f64,
    #[arg(long, default_value_t = 6.0)]
    xi_max: f64,
    #[arg(long, default_value_t = 0.01)]
    xi_step: f64,
    /// CSV path; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_ic(text: &str) -> CliResult<InitialCondition> {
    serde_json::from_str(text).map_err(|e| CliError::input(format!("initial condition: {e}")))
}

fn simulate(args: SimulateArgs) -> CliResult<()> {
    let mut f = FlagObject::default();
    f.set(&["solver"], args.solver)?;
    f.set(&["length"], args.length)?;
    f.set(&["nodes"], args.nodes)?;
    f.set(&["t_end"], args.t_end)?;
    f.set(&["outputs"], args.outputs)?;
    f.set(&["moment_times"], args.moment_times)?;
    if let Some(text) = &args.ic {
        f.set(&["ic"], Some(parse_ic(text)?))?;
    }
    f.set(&["controls", "dt"], args.dt)?;
    f.set(&["controls", "theta"], args.theta)?;
    f.set(&["controls", "modes"], args.modes)?;
    f.set(&["controls", "ode", "rtol"], args.rtol)?;
    f.set(&["controls", "ode", "atol"], args.atol)?;
    f.set(&["controls", "spectral_ode", "rtol"], args.rtol)?;
    f.set(&["controls", "spectral_ode", "atol"], args.atol)?;
    f.set(&["controls", "kernel", "nodes"], args.quad_nodes)?;
    f.set(&["controls", "kernel", "kappa"], args.kappa)?;
    f.set(&["out_dir"], args.out_dir)?;
    f.set(&["label"], args.label)?;
    f.set(&["execution"], args.sequential.then_some(Execution::Sequential))?;
    let cfg = RunConfig::assemble(f.into_value(), args.config.as_deref())?;
    let manifest = simulate::simulate(&cfg)?;
    println!(
        "{}",
        json!({
            "out_dir": cfg.out_dir,
            "profiles": manifest.profiles.len(),
            "derived": manifest.derived,
            "wall_clock_seconds": manifest.wall_clock_seconds,
        })
    );
    Ok(())
}

fn mass_ode(args: MassOdeArgs) -> CliResult<()> {
    let ic = parse_ic(&args.ic)?;
    let mut ctl = OdeControls::default();
    ctl.rtol = args.rtol.unwrap_or(ctl.rtol);
    ctl.atol = args.atol.unwrap_or(ctl.atol);
    if !(args.t_min > 0.0 && args.t_min < args.t_end) || args.points < 2 {
        return Err(CliError::input("need 0 < t_min < t_end and at least 2 points"));
    }
    let resc = solve_a(&ic, args.t_end, &ctl)?;
    let mut times = vec![0.0];
    times.extend(log_times(args.t_min, args.t_end, args.points));
    let rows = resc.sample(&times)?;
    table::write_csv_file(&args.out, &["t", "a", "M"], rows.iter().map(|r| vec![r.t, r.a, r.mass]))?;
    let m1 = ic.first_moment().finite();
    let last = rows[rows.len() - 1];
    println!(
        "{}",
        json!({
            "m0": ic.mass(),
            "m1": m1,
            "c_predicted": m1.and_then(|m| AsymptoticConstants::new(m).ok()).map(|c| c.c),
            "t_end": last.t,
            "a_end": last.a,
            "mass_end": last.mass,
            "rows": rows.len(),
        })
    );
    Ok(())
}

fn diagnose(args: DiagnoseArgs) -> CliResult<()> {
    let inputs = DiagnoseInputs {
        moments: args.moments,
        mass_ode: args.mass_ode,
        profiles: args.profiles,
        m1: args.m1,
        mass_window: args.mass_window,
        a_window: args.a_window,
        eta_max: args.eta_max,
        c_step: args.c_step,
    };
    let report = diagnose::diagnose(&inputs)?;
    let text = serde_json::to_string_pretty(&report)? + "\n";
    match args.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn profile(args: ProfileArgs) -> CliResult<()> {
    let spec = ProfileSpec::new(args.mu)?;
    if !(args.xi_min >= 0.0 && args.xi_max > args.xi_min && args.xi_step > 0.0) {
        return Err(CliError::input("need 0 <= xi_min < xi_max and xi_step > 0"));
    }
    let n = ((args.xi_max - args.xi_min) / args.xi_step).round() as usize;
    let xis: Vec<f64> = (0..=n).map(|k| args.xi_min + k as f64 * args.xi_step).collect();
    let values = f_mu_grid(&spec, &xis, Execution::default())?;
    let rows = xis.iter().zip(&values).map(|(x, v)| vec![*x, *v]);
    match args.out {
        Some(path) => table::write_csv_file(&path, &["xi", "f_mu"], rows),
        None => table::write_csv(std::io::stdout().lock(), &["xi", "f_mu"], rows),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", CliError::input(e.render().to_string().trim()).to_json());
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::MassOde(a) => mass_ode(a),
        Command::Diagnose(a) => diagnose(a),
        Command::Profile(a) => profile(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
