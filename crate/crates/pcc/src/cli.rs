//! Command-line front end: estimation, PSD checking, exhaustive sweeps,
//! counterexample generation, and Monte Carlo validation over stable file
//! formats.
//!
//! Input is CSV with rows as samples and columns as channels; `--complex`
//! reads consecutive column pairs as the real and imaginary parts of one
//! channel.  Inputs whose values are all exactly +/-1 are treated as
//! pre-extracted signs.  Output is JSON by default (complex numbers as
//! `[re, im]` pairs, numbers printed so they round-trip exactly), with a
//! CSV matrix dump available where a matrix is the payload.
//!
//! Exit codes: 0 success (including a passing validation), 1 usage or
//! input errors and failed validations, 2 reserved for `--fail-on-npsd`
//! verdicts.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use crate::enumeration::{
    counterexample_complex, counterexample_real, enumerate_complex, enumerate_real, EnumOptions,
    EnumerationSummary, DEFAULT_WITNESS_CAP,
};
use crate::error::{Error, Result};
use crate::estimator::{
    pcc_matrix_complex, pcc_matrix_real, sample_corr_complex, sample_corr_real, CorrMatrix, Mode,
};
use crate::psd::{check_psd, PsdReport, DEFAULT_TOLERANCE};
use crate::sampling::{
    clt_tolerance_complex, clt_tolerance_real, mc_arcsine_complex, mc_arcsine_real,
    mc_arcsine_real_t, McReport, DEFAULT_SEED,
};
use crate::signs::{ComplexSignSequence, SignSequence};

#[derive(Parser)]
#[command(
    name = "pcc",
    version,
    about = "Sign-based (polarity coincidence) correlation estimation toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the sign-based correlation matrix from CSV samples
    Estimate(EstimateArgs),
    /// Check a correlation matrix (CSV) for positive semidefiniteness
    CheckPsd(CheckPsdArgs),
    /// Exhaustively sweep every sign configuration at a small size
    Enumerate(EnumerateArgs),
    /// Emit a sign configuration whose estimate is not PSD
    Counterexample(CounterexampleArgs),
    /// Monte Carlo validation of the arcsine law on synthetic data
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum OutputFormat {
    /// Full JSON report
    Json,
    /// Bare matrix as CSV rows
    Csv,
}

#[derive(Args)]
struct EstimateArgs {
    /// CSV input: rows are samples, columns are channels
    input: PathBuf,
    /// Read consecutive column pairs as (re, im) complex channels
    #[arg(long)]
    complex: bool,
    /// Subtract each column's median before extracting signs (off by
    /// default: channels are assumed zero-mean)
    #[arg(long)]
    center_median: bool,
    /// Also report the mean-centered sample correlation matrix
    #[arg(long)]
    baseline: bool,
    /// PSD verdict tolerance
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tolerance: f64,
    /// Exit with code 2 when the estimate is not PSD
    #[arg(long)]
    fail_on_npsd: bool,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    /// Write the report here instead of standard output
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CheckPsdArgs {
    /// CSV input: one matrix row per line (2p columns with --complex)
    input: PathBuf,
    /// Read consecutive column pairs as (re, im) matrix entries
    #[arg(long)]
    complex: bool,
    /// PSD verdict tolerance
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tolerance: f64,
    /// Exit with code 2 when the matrix is not PSD
    #[arg(long)]
    fail_on_npsd: bool,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    /// Write the report here instead of standard output
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EnumerateArgs {
    /// Number of channels
    #[arg(long)]
    p: usize,
    /// Samples per channel
    #[arg(long)]
    n: usize,
    /// Sweep quadrant signs instead of real signs
    #[arg(long)]
    complex: bool,
    /// Visit all configurations instead of pinning channel 0 to all-plus
    /// (real mode; complex sweeps always run in full)
    #[arg(long)]
    full: bool,
    /// Violation threshold on the smallest eigenvalue
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tolerance: f64,
    /// Refuse sweeps larger than 2^this many configurations
    #[arg(long, default_value_t = 32)]
    budget_log2: u32,
    /// Worker threads (the report is identical for any worker count)
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Violating configurations to retain, first in visit order
    #[arg(long, default_value_t = DEFAULT_WITNESS_CAP)]
    witness_cap: usize,
    /// Write the report here instead of standard output
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CounterexampleArgs {
    /// Number of channels (real: at least 4; complex: at least 3)
    #[arg(long)]
    p: usize,
    /// Produce the complex construction
    #[arg(long)]
    complex: bool,
    /// Write the report here instead of standard output
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Target correlation (real part)
    #[arg(long, allow_negative_numbers = true)]
    target: f64,
    /// Imaginary part of the target; implies complex mode
    #[arg(long, allow_negative_numbers = true)]
    target_im: Option<f64>,
    /// Validate the complex moment relation
    #[arg(long)]
    complex: bool,
    /// Sample count
    #[arg(long, default_value_t = 1_000_000)]
    n: usize,
    /// Generator seed (default: PCC_SEED environment variable, then 42)
    #[arg(long)]
    seed: Option<u64>,
    /// Pass/fail tolerance on the sign moment (default: five-sigma CLT band)
    #[arg(long)]
    tolerance: Option<f64>,
    /// Draw from a Student-t with this many degrees of freedom instead of
    /// a Gaussian (real mode only; the arcsine prediction is unchanged)
    #[arg(long)]
    heavy_tail_df: Option<u32>,
    /// Write the report here instead of standard output
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Parses arguments from the process environment, runs the selected
/// command, and returns the exit code for the process.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            1
        }
    }
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Estimate(args) => cmd_estimate(args),
        Command::CheckPsd(args) => cmd_check_psd(args),
        Command::Enumerate(args) => cmd_enumerate(args),
        Command::Counterexample(args) => cmd_counterexample(args),
        Command::Validate(args) => cmd_validate(args),
    }
}

// ---------------------------------------------------------------------------
// JSON shapes.  Field order is the struct declaration order and is part of
// the output contract; complex numbers serialize as [re, im] pairs.

#[derive(Serialize)]
#[serde(untagged)]
enum EntryDto {
    Real(f64),
    Complex([f64; 2]),
}

impl EntryDto {
    fn new(mode: Mode, value: Complex64) -> Self {
        match mode {
            Mode::Real => EntryDto::Real(value.re),
            Mode::Complex => EntryDto::Complex([value.re, value.im]),
        }
    }
}

#[derive(Serialize)]
struct MatrixDto {
    p: usize,
    mode: &'static str,
    entries: Vec<Vec<EntryDto>>,
}

impl MatrixDto {
    fn new(m: &CorrMatrix) -> Self {
        let p = m.p();
        Self {
            p,
            mode: m.mode().as_str(),
            entries: (0..p)
                .map(|i| {
                    (0..p)
                        .map(|j| EntryDto::new(m.mode(), m.get(i, j)))
                        .collect()
                })
                .collect(),
        }
    }
}

#[derive(Serialize)]
struct PsdDto {
    eigenvalues: Vec<f64>,
    min_eig: f64,
    is_psd: bool,
    tolerance: f64,
}

impl PsdDto {
    fn new(report: &PsdReport) -> Self {
        Self {
            eigenvalues: report.eigenvalues.clone(),
            min_eig: report.min_eig,
            is_psd: report.is_psd,
            tolerance: report.tolerance,
        }
    }
}

#[derive(Serialize)]
struct EstimateDto {
    command: &'static str,
    mode: &'static str,
    input_kind: &'static str,
    centering: &'static str,
    channels: usize,
    samples: usize,
    pcc: MatrixDto,
    #[serde(skip_serializing_if = "Option::is_none")]
    sample_corr: Option<MatrixDto>,
    psd: PsdDto,
}

#[derive(Serialize)]
struct CheckPsdDto {
    command: &'static str,
    mode: &'static str,
    matrix: MatrixDto,
    psd: PsdDto,
}

#[derive(Serialize)]
struct WitnessDto {
    index: u64,
    channels: Vec<String>,
    matrix: MatrixDto,
    psd: PsdDto,
}

#[derive(Serialize)]
struct EnumerateDto {
    command: &'static str,
    mode: &'static str,
    p: usize,
    n: usize,
    total_configs: u64,
    violations: u64,
    min_min_eig: f64,
    tolerance: f64,
    symmetry_reduce: bool,
    witnesses: Vec<WitnessDto>,
}

impl EnumerateDto {
    fn new(summary: &EnumerationSummary) -> Self {
        Self {
            command: "enumerate",
            mode: summary.mode.as_str(),
            p: summary.p,
            n: summary.n,
            total_configs: summary.total_configs,
            violations: summary.violations,
            min_min_eig: summary.min_min_eig,
            tolerance: summary.tolerance,
            symmetry_reduce: summary.symmetry_reduce,
            witnesses: summary
                .witnesses
                .iter()
                .map(|w| WitnessDto {
                    index: w.index,
                    channels: w.channels.clone(),
                    matrix: MatrixDto::new(&w.matrix),
                    psd: PsdDto::new(&w.report),
                })
                .collect(),
        }
    }
}

#[derive(Serialize)]
struct CounterexampleDto {
    command: &'static str,
    mode: &'static str,
    p: usize,
    channels: Vec<String>,
    matrix: MatrixDto,
    psd: PsdDto,
}

#[derive(Serialize)]
struct ValidateDto {
    command: &'static str,
    mode: &'static str,
    distribution: String,
    target: EntryDto,
    n_samples: usize,
    seed: u64,
    empirical_sign_moment: EntryDto,
    predicted_sign_moment: EntryDto,
    recovered: EntryDto,
    abs_error: f64,
    tolerance: f64,
    pass: bool,
}

impl ValidateDto {
    fn new(report: &McReport, distribution: String) -> Self {
        let mode = report.mode;
        Self {
            command: "validate",
            mode: mode.as_str(),
            distribution,
            target: EntryDto::new(mode, report.target),
            n_samples: report.n_samples,
            seed: report.seed,
            empirical_sign_moment: EntryDto::new(mode, report.empirical_sign_moment),
            predicted_sign_moment: EntryDto::new(mode, report.predicted_sign_moment),
            recovered: EntryDto::new(mode, report.recovered),
            abs_error: report.abs_error,
            tolerance: report.tolerance,
            pass: report.pass,
        }
    }
}

// ---------------------------------------------------------------------------
// Input plumbing.

/// Reads a rectangular numeric CSV table.  Blank lines and lines starting
/// with `#` are skipped; diagnostics carry 1-based line/column positions.
fn read_numeric_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        action: "read",
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line_idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut row = Vec::with_capacity(rows.first().map_or(4, Vec::len));
        for (col_idx, field) in trimmed.split(',').enumerate() {
            let field = field.trim();
            match field.parse::<f64>() {
                Ok(v) => row.push(v),
                Err(_) => {
                    return Err(Error::Parse {
                        line: line_idx + 1,
                        column: col_idx + 1,
                        message: format!("expected a number, found {field:?}"),
                    })
                }
            }
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Parse {
                    line: line_idx + 1,
                    column: row.len() + 1,
                    message: format!(
                        "row has {} fields, previous rows have {}",
                        row.len(),
                        first.len()
                    ),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(rows)
}

fn real_columns(table: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let cols = table[0].len();
    (0..cols)
        .map(|j| table.iter().map(|row| row[j]).collect())
        .collect()
}

fn complex_columns(table: &[Vec<f64>]) -> Result<Vec<Vec<(f64, f64)>>> {
    let cols = table[0].len();
    if !cols.is_multiple_of(2) {
        return Err(Error::InvalidDimension {
            p: cols,
            reason: "complex input needs an even number of columns (re, im pairs)".to_string(),
        });
    }
    Ok((0..cols / 2)
        .map(|j| {
            table
                .iter()
                .map(|row| (row[2 * j], row[2 * j + 1]))
                .collect()
        })
        .collect())
}

fn is_sign_value(v: f64) -> bool {
    v == 1.0 || v == -1.0
}

/// Subtracts each column's median in place (for complex input the re and
/// im columns are centered independently).  Median of an even count is
/// the average of the two middle values.
fn center_columns_by_median(table: &mut [Vec<f64>]) {
    let cols = table[0].len();
    let mut column = Vec::with_capacity(table.len());
    for j in 0..cols {
        column.clear();
        column.extend(table.iter().map(|row| row[j]));
        column.sort_by(f64::total_cmp);
        let mid = column.len() / 2;
        let median = if column.len() % 2 == 1 {
            column[mid]
        } else {
            0.5 * (column[mid - 1] + column[mid])
        };
        for row in table.iter_mut() {
            row[j] -= median;
        }
    }
}

fn emit(text: String, output: Option<&Path>) -> Result<()> {
    let mut text = text;
    text.push('\n');
    match output {
        Some(path) => std::fs::write(path, text.as_bytes()).map_err(|e| Error::Io {
            action: "write",
            path: path.display().to_string(),
            message: e.to_string(),
        }),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
                Ok(()) => Ok(()),
                // A closed pipe downstream (e.g. `pcc ... | head`) is not an
                // error worth reporting.
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                Err(e) => Err(Error::Io {
                    action: "write",
                    path: "standard output".to_string(),
                    message: e.to_string(),
                }),
            }
        }
    }
}

fn to_json<T: Serialize>(dto: &T) -> String {
    serde_json::to_string_pretty(dto).expect("reports contain only finite values")
}

fn matrix_csv(m: &CorrMatrix) -> String {
    let p = m.p();
    (0..p)
        .map(|i| {
            (0..p)
                .map(|j| {
                    let v = m.get(i, j);
                    match m.mode() {
                        Mode::Real => format!("{}", v.re),
                        Mode::Complex => format!("{},{}", v.re, v.im),
                    }
                })
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var("PCC_SEED") {
        Ok(text) => text.trim().parse().map_err(|_| Error::Io {
            action: "parse",
            path: "PCC_SEED".to_string(),
            message: format!("expected an unsigned 64-bit integer, got {text:?}"),
        }),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

// ---------------------------------------------------------------------------
// Commands.

fn cmd_estimate(args: EstimateArgs) -> Result<i32> {
    let mut table = read_numeric_csv(&args.input)?;
    if args.center_median {
        center_columns_by_median(&mut table);
    }
    let table = table;
    let samples = table.len();
    let all_signs = table.iter().flatten().all(|&v| is_sign_value(v));
    let input_kind = if all_signs { "signs" } else { "samples" };

    let (pcc, baseline) = if args.complex {
        let channels = complex_columns(&table)?;
        let seqs: Vec<ComplexSignSequence> = if all_signs {
            channels
                .iter()
                .map(|ch| {
                    let re: Vec<i8> = ch.iter().map(|&(re, _)| re as i8).collect();
                    let im: Vec<i8> = ch.iter().map(|&(_, im)| im as i8).collect();
                    ComplexSignSequence::pack(&re, &im)
                })
                .collect::<Result<_>>()?
        } else {
            channels
                .iter()
                .map(|ch| ComplexSignSequence::from_samples(ch))
                .collect::<Result<_>>()?
        };
        let pcc = pcc_matrix_complex(&seqs)?;
        let baseline = if args.baseline {
            let complex_channels: Vec<Vec<Complex64>> = channels
                .iter()
                .map(|ch| ch.iter().map(|&(re, im)| Complex64::new(re, im)).collect())
                .collect();
            Some(sample_corr_complex(&complex_channels)?)
        } else {
            None
        };
        (pcc, baseline)
    } else {
        let channels = real_columns(&table);
        let seqs: Vec<SignSequence> = if all_signs {
            channels
                .iter()
                .map(|ch| {
                    let signs: Vec<i8> = ch.iter().map(|&v| v as i8).collect();
                    SignSequence::pack(&signs)
                })
                .collect::<Result<_>>()?
        } else {
            channels
                .iter()
                .map(|ch| SignSequence::from_samples(ch))
                .collect::<Result<_>>()?
        };
        let pcc = pcc_matrix_real(&seqs)?;
        let baseline = if args.baseline {
            Some(sample_corr_real(&channels)?)
        } else {
            None
        };
        (pcc, baseline)
    };

    let report = check_psd(&pcc, args.tolerance)?;
    let text = match args.format {
        OutputFormat::Json => to_json(&EstimateDto {
            command: "estimate",
            mode: pcc.mode().as_str(),
            input_kind,
            centering: if args.center_median { "median" } else { "none" },
            channels: pcc.p(),
            samples,
            pcc: MatrixDto::new(&pcc),
            sample_corr: baseline.as_ref().map(MatrixDto::new),
            psd: PsdDto::new(&report),
        }),
        OutputFormat::Csv => matrix_csv(&pcc),
    };
    emit(text, args.output.as_deref())?;
    Ok(if args.fail_on_npsd && !report.is_psd {
        2
    } else {
        0
    })
}

fn cmd_check_psd(args: CheckPsdArgs) -> Result<i32> {
    let table = read_numeric_csv(&args.input)?;
    let p = table.len();
    let cols = table[0].len();
    let (mode, entries) = if args.complex {
        if cols != 2 * p {
            return Err(Error::InvalidDimension {
                p,
                reason: format!(
                    "complex matrix input needs {} columns ({} re,im pairs) for {p} rows, got {cols}",
                    2 * p,
                    p
                ),
            });
        }
        let entries: Vec<Complex64> = table
            .iter()
            .flat_map(|row| (0..p).map(move |j| Complex64::new(row[2 * j], row[2 * j + 1])))
            .collect();
        (Mode::Complex, entries)
    } else {
        if cols != p {
            return Err(Error::InvalidDimension {
                p,
                reason: format!("matrix input must be square, got {p} rows by {cols} columns"),
            });
        }
        let entries: Vec<Complex64> = table
            .iter()
            .flat_map(|row| row.iter().map(|&v| Complex64::new(v, 0.0)))
            .collect();
        (Mode::Real, entries)
    };
    let matrix = CorrMatrix::from_entries(p, mode, &entries)?;
    let report = check_psd(&matrix, args.tolerance)?;
    let text = match args.format {
        OutputFormat::Json => to_json(&CheckPsdDto {
            command: "check-psd",
            mode: matrix.mode().as_str(),
            matrix: MatrixDto::new(&matrix),
            psd: PsdDto::new(&report),
        }),
        OutputFormat::Csv => matrix_csv(&matrix),
    };
    emit(text, args.output.as_deref())?;
    Ok(if args.fail_on_npsd && !report.is_psd {
        2
    } else {
        0
    })
}

fn cmd_enumerate(args: EnumerateArgs) -> Result<i32> {
    let opts = EnumOptions {
        tolerance: args.tolerance,
        budget: 1u128 << args.budget_log2.min(62),
        workers: args.workers,
        witness_cap: args.witness_cap,
    };
    let summary = if args.complex {
        enumerate_complex(args.p, args.n, &opts)?
    } else {
        enumerate_real(args.p, args.n, !args.full, &opts)?
    };
    emit(
        to_json(&EnumerateDto::new(&summary)),
        args.output.as_deref(),
    )?;
    Ok(0)
}

fn cmd_counterexample(args: CounterexampleArgs) -> Result<i32> {
    let (channels, matrix, report) = if args.complex {
        let (seqs, matrix, report) = counterexample_complex(args.p)?;
        let channels = seqs.iter().map(ComplexSignSequence::to_pattern).collect();
        (channels, matrix, report)
    } else {
        let (seqs, matrix, report) = counterexample_real(args.p)?;
        let channels = seqs.iter().map(SignSequence::to_pattern).collect();
        (channels, matrix, report)
    };
    let dto = CounterexampleDto {
        command: "counterexample",
        mode: matrix.mode().as_str(),
        p: matrix.p(),
        channels,
        matrix: MatrixDto::new(&matrix),
        psd: PsdDto::new(&report),
    };
    emit(to_json(&dto), args.output.as_deref())?;
    Ok(0)
}

fn cmd_validate(args: ValidateArgs) -> Result<i32> {
    let complex_mode = args.complex || args.target_im.is_some();
    let seed = resolve_seed(args.seed)?;
    let tolerance = args.tolerance.unwrap_or_else(|| {
        if complex_mode {
            clt_tolerance_complex(args.n)
        } else {
            clt_tolerance_real(args.n)
        }
    });
    let (report, distribution) = if complex_mode {
        if args.heavy_tail_df.is_some() {
            return Err(Error::InvalidDistribution {
                reason: "heavy-tail validation is available in real mode only".to_string(),
            });
        }
        let target = Complex64::new(args.target, args.target_im.unwrap_or(0.0));
        (
            mc_arcsine_complex(target, args.n, seed, tolerance)?,
            "gaussian".to_string(),
        )
    } else if let Some(nu) = args.heavy_tail_df {
        (
            mc_arcsine_real_t(args.target, args.n, nu, seed, tolerance)?,
            format!("student-t(nu={nu})"),
        )
    } else {
        (
            mc_arcsine_real(args.target, args.n, seed, tolerance)?,
            "gaussian".to_string(),
        )
    };
    emit(
        to_json(&ValidateDto::new(&report, distribution)),
        args.output.as_deref(),
    )?;
    Ok(if report.pass { 0 } else { 1 })
}
