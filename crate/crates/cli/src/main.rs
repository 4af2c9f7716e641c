//! `snrw`: batch driver for the snr-core workbench.
//!
//! Every subcommand writes one report (to `--out` or stdout) and exits 0
//! when all checked properties pass, 1 when one fails, 2 on bad usage or
//! input, 3 on internal errors.

mod commands;
mod inputs;
mod report;

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Internal(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

impl From<snr_core::Error> for CliError {
    fn from(e: snr_core::Error) -> Self {
        match e {
            snr_core::Error::InvariantBreach(_) | snr_core::Error::OracleContract { .. } => {
                CliError::Internal(e.to_string())
            }
            other => CliError::Usage(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "snrw", version, about = "Bounded DNR/SNR workbench: lemma checks, reductions, numberings, forcing")]
struct Cli {
    /// `key = value` file supplying flags; flags on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Write the report here instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the bushy-tree union and closure lemmas on a finite universe.
    VerifyLemmas(VerifyLemmas),
    /// Run a reduction against seeded oracles and check its guarantees.
    RunReduction(RunReduction),
    /// Build a numbering construction and check what it is built to do.
    BuildNumbering(BuildNumbering),
    /// Report canonical-immunity violations of a numbering from a spec file.
    CheckImmunity(CheckImmunity),
    /// Report endemic entries of a numbering, or defeat it with a sparse set.
    CheckPandemic(CheckPandemic),
    /// Run the budgeted forcing construction and re-verify every stage.
    SimulateForcing(SimulateForcing),
    /// Run one program on inputs within a step budget.
    Eval(Eval),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Lemma {
    Union,
    Closure,
    Both,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyLemmas {
    /// Alphabet size, i.e. `h = const:K`; ignored when --h is given.
    #[arg(long, default_value_t = 2)]
    pub alphabet: u64,
    /// Bound on string entries as an order-function spec.
    #[arg(long)]
    pub h: Option<String>,
    #[arg(long, default_value_t = 2)]
    pub maxlen: usize,
    #[arg(long, default_value_t = 3)]
    pub nmax: u32,
    /// Defaults to --nmax.
    #[arg(long)]
    pub mmax: Option<u32>,
    #[arg(long, value_enum, default_value_t = Lemma::Both)]
    pub lemma: Lemma,
    /// Random instances per lemma; 0 checks every instance.
    #[arg(long, default_value_t = 0)]
    pub random: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = snr_core::bushy::DEFAULT_CAP)]
    pub cap: u128,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    /// DNR to SNR_h, bound h given.
    #[value(name = "1")]
    One,
    /// DNR_g to SNPR_h, oracle bound g given.
    #[value(name = "2")]
    Two,
    /// One avoiding value for several computations.
    Avoid,
    /// Infinitely-often matching against a computable table.
    IoMatch,
}

#[derive(Debug, Args, Serialize)]
pub struct RunReduction {
    #[arg(long, value_enum)]
    pub theorem: Theorem,
    /// Oracle bound for theorem 2.
    #[arg(long, default_value = "const:3")]
    pub g: String,
    /// Output bound for theorem 1.
    #[arg(long, default_value = "linear:2,2")]
    pub h: String,
    /// Largest input examined.
    #[arg(long, default_value_t = 8)]
    pub horizon: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of random oracles, seeded from --seed upward.
    #[arg(long, default_value_t = 100)]
    pub oracles: u64,
    /// Steps allowed to each phi_e(x) when looking for agreements.
    #[arg(long, default_value_t = 10_000)]
    pub budget: u64,
    /// Steps the DNR oracles spend detecting phi_x(x).
    #[arg(long, default_value_t = 20_000)]
    pub oracle_budget: u64,
    /// Alphabet for `avoid`.
    #[arg(long, default_value_t = 2)]
    pub a: u64,
    /// Number of computations avoided by `avoid`.
    #[arg(long, default_value_t = 2)]
    pub c: u64,
    /// Table for `io-match`, comma separated; random when absent.
    #[arg(long)]
    pub table: Option<String>,
    #[arg(long, default_value_t = 16)]
    pub table_len: u64,
    /// Escaping function for `io-match`.
    #[arg(long, default_value = "linear:7,3")]
    pub hesc: String,
    #[arg(long, default_value_t = 8)]
    pub stages: u64,
    #[arg(long, default_value_t = 600)]
    pub max_stage: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Construction {
    DefeatCi,
    EiWitness,
    Pandemic,
}

#[derive(Debug, Args, Serialize)]
pub struct BuildNumbering {
    #[arg(long, value_enum)]
    pub construction: Construction,
    #[arg(long, default_value = "evens")]
    pub r: String,
    #[arg(long, default_value = "const:2")]
    pub h: String,
    /// Enumeration stage bound for `ei-witness`.
    #[arg(long, default_value = "linear:1,10")]
    pub g: String,
    /// Search time for `pandemic`.
    #[arg(long, default_value = "linear:150,0")]
    pub f: String,
    /// Family of sets for `pandemic`.
    #[arg(long)]
    pub family: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    pub horizon: u64,
    #[arg(long, default_value_t = 100_000)]
    pub search_cap: u64,
    /// Steps and candidates allowed when measuring enumeration times.
    #[arg(long, default_value_t = 3_000)]
    pub frontier_cap: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct CheckImmunity {
    #[arg(long)]
    pub numbering: PathBuf,
    #[arg(long, default_value = "all")]
    pub r: String,
    #[arg(long, default_value = "const:2")]
    pub h: String,
    #[arg(long, default_value_t = 20)]
    pub horizon: u64,
    /// Also evaluate the Schnorr-test layer with this index.
    #[arg(long)]
    pub schnorr: Option<u64>,
    /// Fail when any violation is found.
    #[arg(long)]
    pub expect_clean: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct CheckPandemic {
    /// Numbering spec file.
    #[arg(long, conflicts_with = "family")]
    pub numbering: Option<PathBuf>,
    /// Family file: check the pandemic numbering built from it instead.
    #[arg(long)]
    pub family: Option<PathBuf>,
    #[arg(long, default_value = "all")]
    pub r: String,
    #[arg(long, default_value = "const:2")]
    pub h: String,
    #[arg(long, default_value = "linear:150,0")]
    pub f: String,
    #[arg(long, default_value_t = 20)]
    pub horizon: u64,
    /// Endemic entries required on the horizon.
    #[arg(long, default_value_t = 1)]
    pub min_witnesses: u64,
    /// Build the sparse set defeating the numbering and check it.
    #[arg(long)]
    pub defeat: bool,
    #[arg(long, default_value_t = 100_000)]
    pub search_cap: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateForcing {
    #[arg(long, default_value = "linear:2,2")]
    pub h: String,
    #[arg(long, default_value = "const:2")]
    pub g: String,
    #[arg(long, default_value_t = 6)]
    pub stages: u64,
    #[arg(long, default_value_t = 2_000)]
    pub oracle_budget: u64,
    #[arg(long, default_value_t = 1)]
    pub window: usize,
    #[arg(long, default_value_t = 1 << 16)]
    pub universe_cap: usize,
    /// Recorded only; the simulation itself is deterministic.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct Eval {
    /// Program index.
    #[arg(long, conflicts_with = "program", required_unless_present = "program")]
    pub index: Option<String>,
    /// `.urm` program file.
    #[arg(long)]
    pub program: Option<PathBuf>,
    /// Comma-separated inputs.
    #[arg(long, default_value = "")]
    pub input: String,
    #[arg(long, default_value_t = 10_000)]
    pub budget: u64,
    /// Comma-separated oracle string.
    #[arg(long)]
    pub oracle: Option<String>,
}

/// Reads `key = value` lines (or `key: value`) into flags. A `command` key
/// names the subcommand when the command line does not.
fn config_args(path: &Path) -> Result<(Option<String>, Vec<OsString>), CliError> {
    let text = inputs::read(path)?;
    let mut command = None;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .or_else(|| line.split_once(':'))
            .ok_or_else(|| CliError::usage(format!("{}:{}: expected `key = value`", path.display(), i + 1)))?;
        let (k, v) = (k.trim().replace('_', "-"), v.trim().trim_matches('"'));
        match (k.as_str(), v) {
            ("command", v) => command = Some(v.to_string()),
            (_, "false") => {}
            (k, "true") => out.push(format!("--{k}").into()),
            (k, v) => {
                out.push(format!("--{k}").into());
                out.push(v.into());
            }
        }
    }
    Ok((command, out))
}

fn flag_name(arg: &OsString) -> Option<String> {
    let s = arg.to_str()?;
    let long = s.strip_prefix("--")?;
    Some(long.split('=').next().unwrap_or(long).to_string())
}

/// Splices the config file's flags in after the subcommand, dropping any
/// the command line sets itself.
fn merged_args() -> Result<Vec<OsString>, CliError> {
    let raw: Vec<OsString> = std::env::args_os().collect();
    let Some(pos) = raw.iter().position(|a| a == "--config") else {
        return Ok(raw);
    };
    let path = raw
        .get(pos + 1)
        .map(PathBuf::from)
        .ok_or_else(|| CliError::usage("--config needs a file"))?;
    let (command, extra) = config_args(&path)?;
    let given: BTreeSet<String> = raw.iter().filter_map(flag_name).collect();
    let mut rest: Vec<OsString> = raw[1..].to_vec();
    let sub_pos = rest.iter().position(|a| {
        a.to_str()
            .is_some_and(Command::has_name)
    });
    let insert_at = match sub_pos {
        Some(p) => p + 1,
        None => {
            let Some(cmd) = command else {
                return Err(CliError::usage("no subcommand on the command line or in the config"));
            };
            rest.insert(0, cmd.into());
            1
        }
    };
    let mut kept = Vec::new();
    let mut it = extra.into_iter().peekable();
    while let Some(flag) = it.next() {
        let skip = flag_name(&flag).is_some_and(|n| given.contains(&n));
        let value = match it.peek() {
            Some(v) if flag_name(v).is_none() => it.next(),
            _ => None,
        };
        if !skip {
            kept.push(flag);
            kept.extend(value);
        }
    }
    rest.splice(insert_at..insert_at, kept);
    let mut out = vec![raw[0].clone()];
    out.extend(rest);
    Ok(out)
}

impl Command {
    fn has_name(s: &str) -> bool {
        use clap::CommandFactory;
        Cli::command().get_subcommands().any(|c| c.get_name() == s)
    }
}

fn run() -> Result<bool, CliError> {
    let args = merged_args()?;
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let report = match &cli.command {
        Command::VerifyLemmas(a) => commands::verify_lemmas(a)?,
        Command::RunReduction(a) => commands::run_reduction(a)?,
        Command::BuildNumbering(a) => commands::build_numbering(a)?,
        Command::CheckImmunity(a) => commands::check_immunity(a)?,
        Command::CheckPandemic(a) => commands::check_pandemic(a)?,
        Command::SimulateForcing(a) => commands::simulate_forcing(a)?,
        Command::Eval(a) => commands::eval_program(a)?,
    };
    report.write(cli.out.as_deref())?;
    Ok(report.passed)
}

fn main() -> ExitCode {
    let Ok(outcome) = std::panic::catch_unwind(run) else {
        return ExitCode::from(3);
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Usage(msg)) => {
            eprintln!("snrw: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("snrw: internal error: {msg}");
            ExitCode::from(3)
        }
    }
}
