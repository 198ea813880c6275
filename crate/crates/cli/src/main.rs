//! `slspec`: forward solve, validate, reduce, reconstruct and round-trip from the shell.
//!
//! Exit status is 0 on Accept or convergence, 2 on Reject or non-convergence,
//! and 1 on any error. Nothing is written unless the whole subcommand succeeds.

mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use slspec::io::{SpectralDataFile, TwoSpectraFile};
use slspec::reconstruct::ReconstructionStatus;
use slspec::{
    compute_spectrum, norming_constants, norming_from_two_spectra, reconstruct_sigma, roundtrip_report, validate_pair,
    BoundaryData, BoundaryValue, PiecewiseSigma, RegimePair, SpectralData,
};

use output::Outputs;

#[derive(Parser)]
#[command(name = "slspec", version, about = "Spectral toolkit for Sturm–Liouville operators with singular potentials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues (and norming constants when h is finite) of a potential.
    Forward(ForwardArgs),
    /// Check a pair of spectra against the admissibility conditions.
    Validate(ValidateArgs),
    /// Turn a pair of spectra into eigenvalues with norming constants.
    Reduce(ReduceArgs),
    /// Fit σ to eigenvalues with norming constants.
    Reconstruct(ReconstructArgs),
    /// Forward solve, reduce and reconstruct, reporting every stage error.
    Roundtrip(RoundtripArgs),
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct ForwardArgs {
    #[arg(long)]
    sigma: PathBuf,
    /// Parameter at x = 0, a number or "inf".
    #[arg(long = "H", default_value = "inf")]
    left: BoundaryValue,
    /// Parameter at x = 1, a number or "inf".
    #[arg(long = "h")]
    right: BoundaryValue,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    #[arg(long, default_value = "spectrum.json")]
    out: PathBuf,
    /// Written only when h is finite.
    #[arg(long, default_value = "spectral_data.json")]
    data_out: PathBuf,
    /// Also solve with this second right parameter and write the pair.
    #[arg(long)]
    h2: Option<BoundaryValue>,
    #[arg(long, default_value = "two_spectra.json")]
    pair_out: PathBuf,
    /// Directory for CSV series.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    pair: PathBuf,
    /// Overrides the regime recorded in the pair file.
    #[arg(long)]
    regime: Option<RegimePair>,
    #[arg(long, default_value = "validation_report.json")]
    report: PathBuf,
}

#[derive(Args)]
struct ReduceArgs {
    #[arg(long)]
    pair: PathBuf,
    #[arg(long)]
    regime: Option<RegimePair>,
    #[arg(long, default_value = "spectral_data.json")]
    out: PathBuf,
    #[arg(long, default_value = "validation_report.json")]
    report: PathBuf,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ReconstructArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    cells: u64,
    /// Total-variation weight.
    #[arg(long, default_value_t = 1e-8)]
    reg: f64,
    #[arg(long, default_value = "sigma.json")]
    out: PathBuf,
    /// Full fit summary (h, H, misfit, status).
    #[arg(long)]
    result: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct RoundtripArgs {
    #[arg(long)]
    sigma: PathBuf,
    #[arg(long)]
    regime: RegimePair,
    #[arg(long)]
    h1: BoundaryValue,
    #[arg(long)]
    h2: BoundaryValue,
    /// Left parameter for the Neumann regimes; defaults to "inf" or 0 by regime.
    #[arg(long = "H")]
    left: Option<BoundaryValue>,
    #[arg(long, default_value_t = 60, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u64).range(1..))]
    cells: u64,
    #[arg(long, default_value_t = 1e-8)]
    reg: f64,
    #[arg(long, default_value = "report.json")]
    report: PathBuf,
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// Whether the subcommand reached a positive verdict.
enum Outcome {
    Positive,
    Negative,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Forward(a) => forward(a),
        Command::Validate(a) => validate(a),
        Command::Reduce(a) => reduce(a),
        Command::Reconstruct(a) => reconstruct(a),
        Command::Roundtrip(a) => roundtrip(a),
    };
    match result {
        Ok(Outcome::Positive) => ExitCode::SUCCESS,
        Ok(Outcome::Negative) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn non_negative(reg: f64) -> Result<f64> {
    if !(reg >= 0.0 && reg.is_finite()) {
        bail!("--reg must be a nonnegative number, got {reg}");
    }
    Ok(reg)
}

fn forward(a: ForwardArgs) -> Result<Outcome> {
    let sigma: PiecewiseSigma = read_json(&a.sigma)?;
    let bc = BoundaryData {
        left: a.left,
        right: a.right,
    };
    let spectrum = compute_spectrum(&sigma, bc, a.n as usize)?;
    let mut out = Outputs::default();
    out.json(&a.out, &spectrum)?;
    out.csv(a.csv.as_deref(), "eigenvalue_residuals.csv", spectrum.residuals());
    if !bc.right.is_infinite() {
        let data = norming_constants(&sigma, bc, &spectrum)?;
        out.json(&a.data_out, &SpectralDataFile::from(&data))?;
        out.csv(a.csv.as_deref(), "alphas.csv", data.norming_constants.iter().copied());
    }
    if let Some(h2) = a.h2 {
        let regime = RegimePair::classify(bc.left, bc.right, h2)?;
        let second = compute_spectrum(&sigma, BoundaryData { left: bc.left, right: h2 }, a.n as usize)?;
        out.json(&a.pair_out, &TwoSpectraFile::new(regime, &spectrum, &second))?;
    }
    out.commit()?;
    println!("{} eigenvalues, regime {}", spectrum.len(), spectrum.regime().name());
    Ok(Outcome::Positive)
}

fn validate(a: ValidateArgs) -> Result<Outcome> {
    let pair: TwoSpectraFile = read_json(&a.pair)?;
    let (regime, lams, mus) = pair.spectra(a.regime)?;
    let report = validate_pair(&lams, &mus, regime)?;
    let mut out = Outputs::default();
    out.json(&a.report, &report)?;
    out.commit()?;
    print_verdict(&report);
    Ok(if report.accepted() {
        Outcome::Positive
    } else {
        Outcome::Negative
    })
}

fn print_verdict(report: &slspec::ValidationReport) {
    println!("{:?} ({})", report.verdict, report.regime);
    for reason in &report.reasons {
        println!("  {reason}");
    }
}

fn reduce(a: ReduceArgs) -> Result<Outcome> {
    let pair: TwoSpectraFile = read_json(&a.pair)?;
    let (regime, lams, mus) = pair.spectra(a.regime)?;
    let report = validate_pair(&lams, &mus, regime)?;
    let mut out = Outputs::default();
    out.json(&a.report, &report)?;
    print_verdict(&report);
    if !report.accepted() {
        out.commit()?;
        return Ok(Outcome::Negative);
    }
    let mut data = norming_from_two_spectra(&lams, &mus, regime)?;
    data.left = regime.left();
    out.json(&a.out, &SpectralDataFile::from(&data))?;
    out.csv(a.csv.as_deref(), "alphas.csv", data.norming_constants.iter().copied());
    out.commit()?;
    Ok(Outcome::Positive)
}

fn reconstruct(a: ReconstructArgs) -> Result<Outcome> {
    let file: SpectralDataFile = read_json(&a.data)?;
    let data = SpectralData::try_from(file).with_context(|| format!("checking {}", a.data.display()))?;
    let result = reconstruct_sigma(&data, a.cells as usize, non_negative(a.reg)?)?;
    let mut out = Outputs::default();
    out.json(&a.out, &result.sigma_hat)?;
    if let Some(path) = &a.result {
        out.json(path, &result)?;
    }
    out.csv(a.csv.as_deref(), "sigma_hat.csv", result.sigma_hat.values().iter().copied());
    out.commit()?;
    println!(
        "{:?} after {} iterations, data rms {:e}, h = {:e}",
        result.status, result.iterations, result.data_rms, result.h1_hat
    );
    Ok(match result.status {
        ReconstructionStatus::Converged => Outcome::Positive,
        ReconstructionStatus::NotConverged => Outcome::Negative,
    })
}

fn roundtrip(a: RoundtripArgs) -> Result<Outcome> {
    let sigma: PiecewiseSigma = read_json(&a.sigma)?;
    let left = a.left.unwrap_or_else(|| a.regime.left());
    let realized = RegimePair::classify(left, a.h1, a.h2)?;
    if realized != a.regime {
        bail!(
            "H = {left}, h1 = {}, h2 = {} describe the {realized} regime, not {}",
            a.h1,
            a.h2,
            a.regime
        );
    }
    let report = roundtrip_report(
        &sigma,
        left,
        a.h1,
        a.h2,
        a.n as usize,
        a.cells as usize,
        non_negative(a.reg)?,
    )?;
    let mut out = Outputs::default();
    out.json(&a.report, &report)?;
    let csv = a.csv.as_deref();
    out.csv(csv, "alpha_two_spectra.csv", report.alpha_table.iter().map(|r| r.two_spectra));
    out.csv(csv, "alpha_quadrature.csv", report.alpha_table.iter().map(|r| r.quadrature));
    out.csv(csv, "sigma_hat.csv", report.reconstruction.sigma_hat.values().iter().copied());
    out.commit()?;
    println!(
        "{}: alpha {:e}, sigma L2 {:e}, second spectrum {:e}, within thresholds: {}",
        report.regime,
        report.alpha_max_relative_error,
        report.sigma_l2_error,
        report.mu_resolved_max_relative_error,
        report.all_within_thresholds
    );
    Ok(if report.all_within_thresholds {
        Outcome::Positive
    } else {
        Outcome::Negative
    })
}
