//! Command-line front end for the `butson-core` library.

pub mod render;
pub mod report;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use butson_core::conjecture::{builtin, conjecture_test_with};
use butson_core::matrices::{parse_matrix, verify_bh, RootMatrix};
use butson_core::search::{run_search_with, RankRange, SearchConfig, SearchOptions};
use butson_core::spectra::spectrum_report;
use butson_core::Error;
use clap::{ArgGroup, Args, Parser, Subcommand};

use report::{exit, ConjectureResult, InputFingerprint, ResultPayload, RunReport, VerifyResult};

#[derive(Debug, Parser)]
#[command(
    name = "butson",
    version,
    about = "Butson-Hadamard matrices: verification, spectra, and the scaled-power conjecture"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Print a JSON report instead of text.
    #[arg(long, global = true)]
    pub json: bool,

    /// Report elapsed time as 0 so output is byte-stable.
    #[arg(long, global = true)]
    pub no_timing: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check M M* = m I exactly and report structural properties.
    Verify(MatrixInput),
    /// Eigenvalues of M/sqrt(m), their orders, and the common order k.
    Spectrum(MatrixInput),
    /// Classify the scaled powers sqrt(m)^(1-i) M^i for i coprime to k.
    Conjecture(MatrixInput),
    /// Exhaustively scan circulant BH(m, l) matrices by first row.
    Search(SearchArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["path", "builtin"])))]
pub struct MatrixInput {
    /// Matrix file (`bh m l` or `circ m l` format).
    pub path: Option<PathBuf>,

    /// One of the built-in example matrices.
    #[arg(long, value_parser = ["ex1", "ex2", "ex3"])]
    pub builtin: Option<String>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    pub m: usize,
    pub l: usize,

    /// Process one representative per rotation/shift orbit.
    #[arg(long)]
    pub dedup: bool,

    /// Half-open rank range `lo..hi`.
    #[arg(long, value_parser = parse_range)]
    pub range: Option<RankRange>,

    /// Resume from and periodically update this checkpoint file.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,

    #[arg(long, default_value_t = 1)]
    pub workers: usize,

    /// Rows per shard between checkpoint writes.
    #[arg(long, default_value_t = 4096)]
    pub checkpoint_every: u64,
}

fn parse_range(s: &str) -> Result<RankRange, String> {
    let (lo, hi) = s.split_once("..").ok_or("expected lo..hi")?;
    let lo = lo.trim().parse().map_err(|e| format!("bad lower bound: {e}"))?;
    let hi = hi.trim().parse().map_err(|e| format!("bad upper bound: {e}"))?;
    Ok(RankRange { lo, hi })
}

fn load(input: &MatrixInput) -> Result<(String, RootMatrix), String> {
    if let Some(name) = &input.builtin {
        let named = builtin(name).ok_or_else(|| format!("unknown builtin `{name}`"))?;
        return Ok((format!("builtin:{name}"), named.matrix));
    }
    let path = input.path.as_ref().expect("clap enforces a source");
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mat = parse_matrix(&text).map_err(|e| format!("{}:{}:{}: {}", path.display(), e.line, e.column, e.message))?;
    Ok((path.display().to_string(), mat))
}

/// Runs a parsed command line, writing the report to `out` and diagnostics
/// to `err`. Returns the process exit status.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let start = Instant::now();
    let (command, input, result) = match &cli.command {
        Command::Verify(inp) | Command::Spectrum(inp) | Command::Conjecture(inp) => {
            let (source, mat) = match load(inp) {
                Ok(v) => v,
                Err(msg) => {
                    let _ = writeln!(err, "error: {msg}");
                    return exit::INPUT;
                }
            };
            let name = match cli.command {
                Command::Verify(_) => "verify",
                Command::Spectrum(_) => "spectrum",
                _ => "conjecture",
            };
            (name, InputFingerprint::of_matrix(source, &mat), matrix_command(&cli.command, &mat, err))
        }
        Command::Search(args) => {
            let mut cfg = SearchConfig::new(args.m, args.l);
            cfg.dedup = args.dedup;
            cfg.range = args.range;
            cfg.checkpoint_every = args.checkpoint_every;
            let opts = SearchOptions { workers: args.workers, checkpoint: args.checkpoint.clone() };
            let hash = cfg.hash();
            match (hash, run_search_with(&cfg, &opts)) {
                (Ok(hash), Ok(rep)) => {
                    let input = InputFingerprint { source: "search".into(), m: args.m, l: args.l, hash };
                    ("search", input, ResultPayload::Search(rep))
                }
                (Err(e), _) | (_, Err(e)) => {
                    let _ = writeln!(err, "error: {e}");
                    return exit::INPUT;
                }
            }
        }
    };
    let elapsed_ms = if cli.no_timing { 0 } else { start.elapsed().as_millis() as u64 };
    let report = RunReport { command: command.to_string(), input, result, elapsed_ms };
    let text = if cli.json {
        serde_json::to_string_pretty(&report).expect("report serializes") + "\n"
    } else {
        render::human(&report, !cli.no_timing)
    };
    let _ = out.write_all(text.as_bytes());
    report.exit_code()
}

fn matrix_command(command: &Command, mat: &RootMatrix, err: &mut dyn Write) -> ResultPayload {
    let bh = verify_bh(mat);
    if !matches!(command, Command::Verify(_)) && !bh.is_bh {
        let _ = writeln!(err, "error: input is not Butson-Hadamard");
    }
    if matches!(command, Command::Verify(_)) || !bh.is_bh {
        return ResultPayload::Verify(VerifyResult::new(mat, bh));
    }
    let spectrum = match spectrum_report(mat) {
        Ok(s) => s,
        Err(Error::NumericFailure { index }) => return ResultPayload::NumericFailure { index },
        Err(e) => unreachable!("BH input was verified: {e}"),
    };
    if matches!(command, Command::Spectrum(_)) {
        return ResultPayload::Spectrum(spectrum);
    }
    let verdict = match conjecture_test_with(mat, &spectrum) {
        Ok(v) => Some(v),
        Err(Error::NoCommonOrder(_)) => None,
        Err(e) => unreachable!("BH input with a spectrum: {e}"),
    };
    ResultPayload::Conjecture(ConjectureResult { spectrum, verdict })
}
