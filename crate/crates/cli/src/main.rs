use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use llocv::attack::{attack_report, critical_distance, null_key_distance};
use llocv::countermeasure::conservative_key_rate;
use llocv::figures::{run_figure, FigureId};
use llocv::keyrate::key_rate;
use llocv::montecarlo::simulate_batch;
use llocv::params::{ChiTMode, Config, KeffDenominator, PAPER2017};
use llocv::sweep::{run_sweep, SweepAxis, SweepSpec};
use llocv::table::ReportRow;
use llocv::validate::run_mc_validate;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] llocv::Error),
    #[error("cannot read config {path}: {source}")]
    ConfigFile { path: PathBuf, source: llocv::Error },
    #[error("{0}")]
    NotFound(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use llocv::Error as E;
        match self {
            CliError::ConfigFile { .. } => 2,
            CliError::NotFound(_) => 4,
            CliError::Core(e) => match e {
                E::Config(_) | E::Domain(_) | E::Json(_) => 2,
                E::Numerical { .. } | E::InsufficientData { .. } => 3,
                E::Io(_) | E::Csv(_) => 1,
            },
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "llocv", version, about = "Noise, key-rate and attack analysis for LLO CV-QKD")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// JSON configuration file.
    #[arg(long, global = true, value_name = "PATH", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in parameter preset, used when no config file is given.
    #[arg(long, global = true, value_name = "NAME")]
    preset: Option<String>,
    /// Directory for CSV, SVG and JSON outputs.
    #[arg(long, global = true, value_name = "PATH", default_value = "out")]
    out_dir: PathBuf,
    #[arg(long, global = true, value_name = "U64", default_value_t = 42)]
    seed: u64,
    /// Pulses per Monte Carlo batch.
    #[arg(long, global = true, value_name = "N", default_value_t = 1_000_000)]
    samples: usize,
    #[arg(long, global = true, value_name = "as_printed|reconciled")]
    keff_denominator: Option<KeffDenominator>,
    #[arg(long, global = true, value_name = "fixed_point|one_shot")]
    chi_t_mode: Option<ChiTMode>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Key rate without attack.
    Keyrate {
        #[arg(long)]
        length_km: Option<f64>,
    },
    /// Full attack report for one scenario.
    Attack {
        #[arg(long)]
        length_km: Option<f64>,
        #[arg(long)]
        alpha_low: Option<f64>,
    },
    /// Write figure data and plots (fig4, fig5, fig6, fig7 or all).
    Figure {
        #[arg(default_value = "all")]
        id: String,
    },
    /// Sweep one parameter and write the standard report CSV.
    Sweep {
        /// alpha_low, length_km, ref_amp_ratio or v_a.
        #[arg(long)]
        axis: SweepAxis,
        #[arg(long)]
        start: f64,
        #[arg(long)]
        stop: f64,
        #[arg(long)]
        steps: usize,
    },
    /// Check the analytic model against simulated pulses.
    McValidate {
        /// Also write every simulated pulse to CSV (large).
        #[arg(long)]
        dump_batch: bool,
    },
    /// Shortest length at which the attack efficiency reaches the target.
    CriticalDistance {
        #[arg(long)]
        alpha_low: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        target: f64,
    },
}

fn load_config(g: &Global) -> CliResult<Config> {
    let mut config = match &g.config {
        Some(path) => Config::from_path(path).map_err(|source| CliError::ConfigFile {
            path: path.clone(),
            source,
        })?,
        None => Config::preset(g.preset.as_deref().unwrap_or(PAPER2017))?,
    };
    if let Some(d) = g.keff_denominator {
        config.options.keff_denominator = d;
    }
    if let Some(m) = g.chi_t_mode {
        config.options.chi_t_mode = m;
    }
    Ok(config)
}

fn print_json<T: Serialize>(value: &T) -> CliResult<String> {
    let text = serde_json::to_string_pretty(value).map_err(llocv::Error::from)?;
    println!("{text}");
    Ok(text)
}

fn write_out(dir: &Path, name: &str, contents: &str) -> CliResult<PathBuf> {
    fs::create_dir_all(dir).map_err(llocv::Error::from)?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(llocv::Error::from)?;
    Ok(path)
}

#[derive(Serialize)]
struct AttackOutput {
    report: llocv::AttackReport,
    key_rate_conservative: f64,
    row: ReportRow,
}

#[derive(Serialize)]
struct DistanceOutput {
    alpha_low: f64,
    target_keff: f64,
    keff_denominator: KeffDenominator,
    critical_km: Option<f64>,
    null_key_km: Option<f64>,
}

fn run(cli: Cli) -> CliResult<()> {
    let mut config = load_config(&cli.global)?;
    let out_dir = &cli.global.out_dir;
    match cli.command {
        Command::Keyrate { length_km } => {
            let length = length_km.unwrap_or(config.scenario.length_km);
            print_json(&key_rate(&config.params, length, config.options.chi_t_mode)?)?;
        }
        Command::Attack { length_km, alpha_low } => {
            config.scenario.length_km = length_km.unwrap_or(config.scenario.length_km);
            config.scenario.alpha_low = alpha_low.unwrap_or(config.scenario.alpha_low);
            let report = attack_report(&config.params, &config.scenario, &config.options)?;
            print_json(&AttackOutput {
                key_rate_conservative: conservative_key_rate(&config.params, &config.scenario, &config.options)?,
                row: ReportRow::from_report(&report, config.params.beta),
                report,
            })?;
        }
        Command::Figure { id } => {
            let ids = if id == "all" {
                FigureId::ALL.to_vec()
            } else {
                vec![id.parse::<FigureId>()?]
            };
            for id in ids {
                let files = run_figure(id, &config.params, &config.options, out_dir)?;
                println!("{}\n{}", files.csv.display(), files.svg.display());
            }
        }
        Command::Sweep { axis, start, stop, steps } => {
            let table = run_sweep(&SweepSpec {
                axis,
                start,
                stop,
                steps,
                config,
            })?;
            let path = write_out(out_dir, &format!("sweep_{axis}.csv"), &table.to_csv_string()?)?;
            println!("{}", path.display());
        }
        Command::McValidate { dump_batch } => {
            let n = cli.global.samples;
            let seed = cli.global.seed;
            let summary = run_mc_validate(&config, n, seed)?;
            let text = print_json(&summary)?;
            write_out(out_dir, "mc_validate.json", &text)?;
            if dump_batch {
                for (attack_on, name) in [(false, "pulses_attack_off.csv"), (true, "pulses_attack_on.csv")] {
                    let batch = simulate_batch(
                        &config.params,
                        &config.scenario,
                        &config.options,
                        attack_on,
                        n,
                        seed.wrapping_add(attack_on as u64),
                    )?;
                    fs::create_dir_all(out_dir).map_err(llocv::Error::from)?;
                    batch.write_csv(fs::File::create(out_dir.join(name)).map_err(llocv::Error::from)?)?;
                }
            }
        }
        Command::CriticalDistance { alpha_low, target } => {
            let alpha_low = alpha_low.unwrap_or(config.scenario.alpha_low);
            let critical_km = critical_distance(&config.params, &config.options, alpha_low, target)?;
            let out = DistanceOutput {
                alpha_low,
                target_keff: target,
                keff_denominator: config.options.keff_denominator,
                critical_km,
                null_key_km: null_key_distance(&config.params, config.options.chi_t_mode)?,
            };
            print_json(&out)?;
            if critical_km.is_none() {
                return Err(CliError::NotFound(format!(
                    "attack efficiency never reaches {target} for alpha_low = {alpha_low}"
                )));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
