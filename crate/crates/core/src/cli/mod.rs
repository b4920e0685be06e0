//! The `relaysec` command line: analytic tables, Monte-Carlo runs, sweeps
//! and packet-file codec transforms.
//!
//! Exit codes: 0 on success, 2 for configuration or input errors, 3 for
//! numeric failures such as a non-terminating packet race.

mod config;
mod output;
mod packet_file;

pub use config::{ConfigFile, RunSection, SweepSection};
pub use output::{deviations_json, to_csv, to_json, OutputRow, CSV_COLUMNS, UNDERFLOW};
pub use packet_file::{read_packet_file, write_packet_file, PacketFile, PacketFileError};

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::analytic::AnalyticError;
use crate::codec::{decode, encode, pad_to_even, CodecError, PacketBlock};
use crate::simulator::{sweep, SimError, SweepGrid, SweepOutput};

#[derive(Debug, Parser)]
#[command(name = "relaysec", version, about = "XOR self-encryption and intercept analysis for untrusted relay networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form per-packet and message intercept probabilities.
    Analyze(RunArgs),
    /// Monte-Carlo estimates next to the analytic columns.
    Simulate(RunArgs),
    /// Analytic and simulated rows over the config's [sweep] axes.
    Sweep(RunArgs),
    /// XOR-encode a packet file, padding odd packet counts.
    CodecEncode(CodecArgs),
    /// Decode a packet file and drop the pad packet if flagged.
    CodecDecode(CodecArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Overrides [run].seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides [run].trials.
    #[arg(long)]
    pub trials: Option<u64>,
}

#[derive(Debug, Args)]
pub struct CodecArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Seed for the random pad packet.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("numeric error: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Input(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match &e {
            SimError::NonTerminating { .. }
            | SimError::Analytic(
                AnalyticError::Negative(_)
                | AnalyticError::Probability(_)
                | AnalyticError::Unsupported(_)
                | AnalyticError::RaceNeverEnds(_),
            ) => CliError::Numeric(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<CodecError> for CliError {
    fn from(e: CodecError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<PacketFileError> for CliError {
    fn from(e: PacketFileError) -> Self {
        CliError::Input(e.to_string())
    }
}

fn read_config(path: &Path) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let config = ConfigFile::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    config
        .scenario
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(config)
}

fn write_bytes(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::Input(e.to_string())),
    }
}

/// Where the deviations report goes when the table itself is CSV.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".deviations.json");
    PathBuf::from(name)
}

fn emit(args: &RunArgs, result: &SweepOutput) -> Result<(), CliError> {
    let rows: Vec<OutputRow> = result.rows.iter().map(OutputRow::from_sweep).collect();
    let encode_err = |e: &dyn std::fmt::Display| CliError::Numeric(format!("output encoding: {e}"));
    match args.format {
        Format::Json => {
            let bytes = to_json(&rows, &result.deviations).map_err(|e| encode_err(&e))?;
            write_bytes(args.out.as_deref(), &bytes)
        }
        Format::Csv => {
            let bytes = to_csv(&rows).map_err(|e| encode_err(&e))?;
            write_bytes(args.out.as_deref(), &bytes)?;
            if result.deviations.is_empty() {
                return Ok(());
            }
            let report = deviations_json(&result.deviations).map_err(|e| encode_err(&e))?;
            match &args.out {
                Some(out) => write_bytes(Some(&sidecar_path(out)), &report),
                None => {
                    let _ = std::io::stderr().write_all(&report);
                    Ok(())
                }
            }
        }
    }
}

fn run_grid(args: &RunArgs, build: impl FnOnce(&ConfigFile, u64, u64) -> SweepGrid) -> Result<(), CliError> {
    let config = read_config(&args.config)?;
    let trials = args.trials.unwrap_or(config.run.trials);
    let seed = args.seed.unwrap_or(config.run.seed);
    if trials == 0 {
        return Err(CliError::Config("trials must be at least 1".into()));
    }
    let grid = build(&config, trials, seed);
    emit(args, &sweep(&grid)?)
}

pub fn cmd_analyze(args: &RunArgs) -> Result<(), CliError> {
    run_grid(args, |c, _, seed| SweepGrid::single(&c.scenario, c.n_values(), None, seed))
}

pub fn cmd_simulate(args: &RunArgs) -> Result<(), CliError> {
    run_grid(args, |c, trials, seed| {
        SweepGrid::single(&c.scenario, c.n_values(), Some(trials), seed)
    })
}

pub fn cmd_sweep(args: &RunArgs) -> Result<(), CliError> {
    run_grid(args, |c, trials, seed| c.grid(trials, seed))
}

fn read_packets(path: &Path) -> Result<PacketFile, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(read_packet_file(&bytes)?)
}

pub fn cmd_codec_encode(args: &CodecArgs) -> Result<(), CliError> {
    let file = read_packets(&args.input)?;
    if file.padded {
        return Err(CliError::Input("input is already padded; encode expects raw packets".into()));
    }
    let (block, meta) = pad_to_even(&file.block, args.seed);
    let encoded = PacketFile {
        block: encode(&block)?,
        padded: meta.padded,
    };
    write_bytes(Some(&args.out), &write_packet_file(&encoded))
}

pub fn cmd_codec_decode(args: &CodecArgs) -> Result<(), CliError> {
    let file = read_packets(&args.input)?;
    let decoded = decode(&file.block)?;
    let block = if file.padded {
        let mut packets = decoded.into_packets();
        packets.pop();
        PacketBlock::new(packets)?
    } else {
        decoded
    };
    write_bytes(
        Some(&args.out),
        &write_packet_file(&PacketFile { block, padded: false }),
    )
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Analyze(a) => cmd_analyze(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::CodecEncode(a) => cmd_codec_encode(a),
        Command::CodecDecode(a) => cmd_codec_decode(a),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Errors are reported on stderr.
pub fn main_with_args<I, T>(args: I) -> i32
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
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("relaysec: {e}");
            e.exit_code()
        }
    }
}
