//! Command-line front end for `thermal-packets`.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use output::Format;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    Reduced,
    #[value(name = "si", alias = "SI")]
    Si,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StatsArg {
    Fermion,
    Boson,
}

impl From<StatsArg> for thermal_packets::Statistics {
    fn from(s: StatsArg) -> Self {
        match s {
            StatsArg::Fermion => thermal_packets::Statistics::Fermion,
            StatsArg::Boson => thermal_packets::Statistics::Boson,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PartitionMode {
    Exact,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum G1Method {
    Closed,
    Mc,
    Eigen,
    All,
}

/// Wave-packet decompositions of thermal states of free quantum gases.
#[derive(Debug, Parser, Serialize)]
#[command(name = "thermal-packets", version, about)]
pub struct Cli {
    /// Unit system for lengths, times and momenta.
    #[arg(long, global = true, value_enum, default_value = "reduced")]
    pub units: Units,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,
    /// Seed of the counter-based random streams.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    pub threads: Option<u32>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum Command {
    /// Two-packet coordinate representation on a collinear (R, R') grid.
    Fig2(Fig2Args),
    /// Single-packet and thermal correlation moduli over (R1, R2, t1).
    Fig3(Fig3Args),
    /// Two-packet density profiles for a list of separations.
    Fig4(Fig4Args),
    /// Canonical partition function, exact or Monte Carlo.
    Partition(PartitionArgs),
    /// One-particle thermal correlation function at one (dR, b) point.
    G1(G1Args),
    /// Draws from the decomposition measure.
    Sample(SampleArgs),
    /// Thermal wavelength and packet widths of an element.
    Units(UnitsArgs),
    /// Runs the built-in checks and prints PASS/FAIL per check.
    Selftest,
}

#[derive(Debug, Args, Serialize)]
pub struct Fig2Args {
    /// First packet centre in units of the packet width.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub r1: f64,
    /// Second packet centre in units of the packet width.
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    pub r2: f64,
    /// Points per axis.
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct Fig3Args {
    /// Mean momentum as lambda p / hbar.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub lambda_p: f64,
    /// Points per position axis.
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
    /// Number of reduced times t1 / (beta hbar) in [0, b-max].
    #[arg(long, default_value_t = 5)]
    pub t_points: usize,
    #[arg(long, default_value_t = 1.0)]
    pub b_max: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct Fig4Args {
    /// Packet separations in units of lambda.
    #[arg(long, value_delimiter = ',', default_value = "0,0.5,1,2,4")]
    pub separations: Vec<f64>,
    /// Points of each density profile.
    #[arg(long, default_value_t = 128)]
    pub grid: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct PartitionArgs {
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Volume over lambda cubed.
    #[arg(long, default_value_t = 1000.0)]
    pub v_over_lambda3: f64,
    #[arg(long, value_enum, default_value = "fermion")]
    pub statistics: StatsArg,
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: PartitionMode,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    /// Share of the temperature carried by the packet width.
    #[arg(long, default_value_t = 0.5)]
    pub ts: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct G1Args {
    /// Separation R2 - R1 along x, in lambda (reduced) or angstrom (SI).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub dr: f64,
    /// Reduced time difference (t2 - t1) / (beta hbar).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub b: f64,
    #[arg(long, value_enum, default_value = "all")]
    pub method: G1Method,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1000.0)]
    pub v_over_lambda3: f64,
    #[arg(long, default_value_t = 0.5)]
    pub ts: f64,
    /// Argon temperature in kelvin, used with --units si.
    #[arg(long, default_value_t = 300.0)]
    pub temperature: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct SampleArgs {
    /// Packets per draw.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Number of draws.
    #[arg(long, default_value_t = 10)]
    pub count: u64,
    #[arg(long, default_value_t = 100.0)]
    pub v_over_lambda3: f64,
    #[arg(long, default_value_t = 0.5)]
    pub ts: f64,
    /// Argon temperature in kelvin, used with --units si.
    #[arg(long, default_value_t = 300.0)]
    pub temperature: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct UnitsArgs {
    #[arg(long, default_value = "argon")]
    pub element: String,
    /// Temperature in kelvin.
    #[arg(long, default_value_t = 300.0)]
    pub temperature: f64,
    /// Width temperature T_s in kelvin; defaults to the temperature.
    #[arg(long)]
    pub ts_temperature: Option<f64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                e.exit();
            }
            let text = e.to_string();
            eprintln!("{}", text.lines().next().unwrap_or("invalid arguments"));
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n as usize).build_global()?;
    }
    commands::dispatch(cli)
}
