//! `pvt-energy`: run scenarios and sweeps from a TOML config.

mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use pvt_energy::config::ConfigFile;
use pvt_energy::harness::{
    figure_suite, run_scenario, run_sweep, write_sweep_csv, RunSettings, SchemeSelection, SweepRow, SweepSpec,
};
use pvt_energy::network::NetworkConfig;
use pvt_energy::{Error, Exec};

use manifest::RunManifest;

#[derive(Parser)]
#[command(name = "pvt-energy", version, about = "Energy efficiency of MIMO Poisson-Voronoi cellular networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the figure suite, or one sweep with --sweep.
    Run(RunArgs),
    /// Check a config and print it normalised, with derived constants.
    Validate(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// TOML config; built-in defaults when omitted.
    config: Option<PathBuf>,
    /// Override one parameter, `name=value` (repeatable).
    #[arg(long = "set", value_name = "NAME=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Sweep one parameter, `name=v1,v2,...`.
    #[arg(long, value_name = "NAME=V1,V2,...")]
    sweep: Option<String>,
    #[arg(long)]
    scheme: Option<SchemeSelection>,
    #[arg(long)]
    replications: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Run replications on one thread.
    #[arg(long)]
    sequential: bool,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } => 2,
        Error::Io(_) => 1,
        _ => 3,
    }
}

fn split_pair(s: &str, flag: &str) -> Result<(String, String), Error> {
    s.split_once('=')
        .map(|(a, b)| (a.trim().to_string(), b.trim().to_string()))
        .ok_or_else(|| Error::Config {
            field: flag.to_string(),
            reason: format!("expected name=value, got `{s}`"),
        })
}

fn parse_number(field: &str, text: &str) -> Result<f64, Error> {
    text.parse::<f64>().map_err(|_| Error::Config {
        field: field.to_string(),
        reason: format!("`{text}` is not a number"),
    })
}

/// Loads the config and applies `--set` overrides.
fn load(common: &CommonArgs) -> Result<(ConfigFile, NetworkConfig), Error> {
    let file = match &common.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let mut cfg = file.validate()?;
    for s in &common.set {
        let (name, value) = split_pair(s, "set")?;
        cfg = cfg.with_param(&name, parse_number(&name, &value)?)?;
    }
    Ok((ConfigFile::from_network(&cfg, file.simulation.clone()), cfg))
}

fn validate(args: &CommonArgs) -> Result<(), Error> {
    let (file, cfg) = load(args)?;
    let law = cfg.interference_law()?;
    print!("{}", file.to_toml());
    println!();
    println!("# derived");
    println!("# alpha = {}", cfg.alpha());
    println!("# shadowing_lambda = {}", cfg.fading.lambda_shape);
    println!("# shadowing_omega = {}", cfg.fading.omega);
    println!("# stable_delta = {:e}", law.delta);
    println!("# laplace_scale = {:e}", law.laplace_scale());
    println!("# load_ratio = {}", cfg.load_ratio());
    println!("# atom_at_zero = {:e}", (-cfg.load_ratio()).exp());
    println!("# mean_cell_traffic_nat = {}", cfg.mean_cell_traffic()?);
    Ok(())
}

fn run(args: &RunArgs) -> Result<(), Error> {
    let start = Instant::now();
    let (mut file, cfg) = load(&args.common)?;
    let sim = &mut file.simulation;
    if let Some(s) = args.scheme {
        sim.scheme = s;
    }
    if let Some(r) = args.replications {
        sim.replications = r;
    }
    if let Some(s) = args.seed {
        sim.seed = s;
    }
    let settings = RunSettings {
        replications: sim.replications,
        seed: sim.seed,
        schemes: sim.scheme,
        exec: if args.sequential { Exec::Sequential } else { Exec::Parallel },
    };
    settings.validate()?;
    std::fs::create_dir_all(&args.out)?;

    let mut manifest = RunManifest::new(&file, &settings);
    let mut first_failure: Option<Error> = None;
    match &args.sweep {
        Some(s) => {
            let (name, values) = split_pair(s, "sweep")?;
            let values = values
                .split(',')
                .map(|v| parse_number(&name, v.trim()))
                .collect::<Result<Vec<f64>, Error>>()?;
            let spec = SweepSpec::new(&name, values, cfg)?;
            let outcome = run_sweep(&spec, &settings)?;
            let path = args.out.join(format!("sweep_{name}.csv"));
            write_sweep_csv(&outcome.rows, &path)?;
            manifest.outputs.push(path);
            manifest.unconverged_points = outcome.unconverged();
            for (x, scheme, e) in &outcome.failures {
                eprintln!("error: {scheme} at {name}={x}: {e}");
                manifest.failures.push(format!("{scheme} at {name}={x}: {e}"));
            }
            first_failure = outcome.failures.into_iter().next().map(|f| f.2);
        }
        None => {
            let scenario = run_scenario(&cfg, &settings)?;
            let rows: Vec<SweepRow> = scenario
                .reports
                .iter()
                .map(|r| scenario_row(&cfg, r, &settings))
                .collect();
            let path = args.out.join("scenario.csv");
            write_sweep_csv(&rows, &path)?;
            manifest.outputs.push(path);
            manifest.average_sup_distance = scenario.average_check;
            let suite = figure_suite(&cfg, &settings, &args.out)?;
            manifest.outputs.extend(suite.outputs);
            manifest.unconverged_points = suite.unconverged;
            for f in &suite.failures {
                eprintln!("error: {f}");
            }
            manifest.failures.extend(suite.failures);
        }
    }
    if manifest.unconverged_points > 0 {
        eprintln!(
            "warning: {} point(s) above the 2% EE standard-error target; raise --replications",
            manifest.unconverged_points
        );
    }
    manifest.wall_time_s = start.elapsed().as_secs_f64();
    let path = args.out.join("manifest.toml");
    manifest.write(&path)?;
    for p in &manifest.outputs {
        println!("{}", p.display());
    }
    println!("{}", path.display());
    match first_failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn scenario_row(cfg: &NetworkConfig, r: &pvt_energy::energy::EnergyReport, settings: &RunSettings) -> SweepRow {
    let converged = r.ee_stderr.map_or(true, |se| se <= pvt_energy::harness::CONVERGENCE_TARGET * r.ee);
    SweepRow {
        series: String::new(),
        parameter: "lambda_ratio".to_string(),
        value: cfg.load_ratio(),
        scheme: r.scheme,
        ee_nat_per_joule: r.ee,
        ee_stderr: r.ee_stderr,
        mean_real_power_watt: r.mean_real_power,
        non_outage: r.non_outage,
        mean_traffic_nat: r.mean_traffic,
        seed: settings.seed,
        replications: settings.replications,
        converged,
    }
}

fn report(path: Option<&Path>, e: &Error) {
    match path {
        Some(p) => eprintln!("error: {}: {e}", p.display()),
        None => eprintln!("error: {e}"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (result, path) = match &cli.command {
        Command::Run(a) => (run(a), a.common.config.as_deref()),
        Command::Validate(a) => (validate(a), a.config.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(path, &e);
            ExitCode::from(exit_code(&e))
        }
    }
}
