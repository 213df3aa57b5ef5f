//! Command-line front end: builds billiard polygons in an ellipse with a
//! confocal elliptic caustic, verifies their invariants, and renders the
//! grid of extended-side intersections.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration error,
//! 3 numerical/runtime error.

mod artifacts;
mod config;
mod svg;

use clap::{Args, Parser, Subcommand};
use config::{OutputKind, ValidatedConfig};
use poncelet::billiard::{build_billiard, poncelet_grid, Billiard};
use poncelet::invariants::{all_pass, sweep_motion, verify_billiard, InvariantReport};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const DEFAULT_SAMPLES: usize = 50;

/// A failure with an exit code class.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or arguments (exit 2).
    Config(String),
    /// Numerical or runtime failure (exit 3).
    Numeric(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numeric(m) => m,
        }
    }
}

/// Classifies a library error raised while *using* a valid configuration.
pub fn map_lib_error(e: poncelet::Error) -> CliError {
    use poncelet::Error;
    match e {
        Error::InvalidConfig(_)
        | Error::InvalidSemiaxes { .. }
        | Error::ModulusOutOfRange(_)
        | Error::CircularFamily => CliError::Config(e.to_string()),
        _ => CliError::Numeric(e.to_string()),
    }
}

/// Classifies a library error raised while *validating* a configuration:
/// everything is the configuration's fault.
pub fn map_config_error(e: poncelet::Error) -> CliError {
    CliError::Config(e.to_string())
}

#[derive(Parser)]
#[command(
    name = "poncelet",
    version,
    about = "Billiards in an ellipse with a confocal elliptic caustic: \
             construction, invariant verification, and the grid of \
             extended-side intersections."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct the polygon (or open chain) and write billiard.json.
    Build(BuildArgs),
    /// Check every invariant of a periodic polygon and sweep its motion;
    /// writes billiard.json, report.json, and sweep.csv.
    Verify(VerifyArgs),
    /// Compute the grid of extended-side intersections; writes
    /// billiard.json, grid.json, and grid.svg.
    Grid(GridArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Override a tolerance knob: NAME=VALUE (repeatable).
    #[arg(long = "tolerance", value_name = "NAME=VALUE")]
    tolerance: Vec<String>,
    /// Number of sweep samples (overrides the config).
    #[arg(long)]
    samples: Option<usize>,
    /// Seed for pseudo-random sweep offsets (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Highest grid level to compute (overrides the config).
    #[arg(long)]
    j_max: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Build(args) => cmd_build(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Grid(args) => cmd_grid(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

/// Whether an artifact should be written under the config's whitelist.
fn wanted(vc: &ValidatedConfig, kind: OutputKind) -> bool {
    match &vc.outputs {
        None => true,
        Some(list) => list.contains(&kind),
    }
}

fn check_outputs_allowed(vc: &ValidatedConfig, allowed: &[OutputKind]) -> Result<(), CliError> {
    if let Some(list) = &vc.outputs {
        for kind in list {
            if !allowed.contains(kind) {
                return Err(CliError::Config(format!(
                    "output '{}' is not produced by this subcommand",
                    kind.filename()
                )));
            }
        }
    }
    Ok(())
}

fn write_artifact(dir: &Path, kind: OutputKind, text: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Numeric(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(kind.filename());
    std::fs::write(&path, text)
        .map_err(|e| CliError::Numeric(format!("cannot write {}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn build_from(vc: &ValidatedConfig) -> Result<Billiard, CliError> {
    build_billiard(&vc.billiard).map_err(map_lib_error)
}

fn require_closed(b: &Billiard, what: &str) -> Result<(), CliError> {
    if !b.is_closed() {
        return Err(CliError::Config(format!(
            "{what} requires a closed periodic polygon (n with count = n)"
        )));
    }
    Ok(())
}

fn cmd_build(args: BuildArgs) -> Result<ExitCode, CliError> {
    let vc = config::load(&args.common.config)?;
    check_outputs_allowed(&vc, &[OutputKind::Billiard])?;
    if vc.perturb.is_some() {
        return Err(CliError::Config(
            "perturb is a verification hook; it has no effect on build".to_string(),
        ));
    }
    if vc.sweep_window.is_some() {
        return Err(CliError::Config(
            "u0 given as a window is only meaningful for verify".to_string(),
        ));
    }
    let billiard = build_from(&vc)?;
    if wanted(&vc, OutputKind::Billiard) {
        let doc = artifacts::billiard_doc(&billiard)?;
        write_artifact(&args.common.out, OutputKind::Billiard, &artifacts::to_json(&doc)?)?;
    }
    Ok(ExitCode::SUCCESS)
}

/// Re-judges reports against user-supplied tolerance knobs.
fn apply_tolerances(reports: &mut [InvariantReport], knobs: &BTreeMap<String, f64>) {
    for r in reports.iter_mut() {
        if let Some(&tol) = knobs.get(config::tolerance_key_for(&r.name)) {
            r.tolerance = tol;
            if r.applicable {
                r.pass = r.max_residual <= tol;
            }
        }
    }
}

fn print_report_line(r: &InvariantReport) {
    if !r.applicable {
        println!("SKIP {} (not applicable for this period)", r.name);
    } else if r.pass {
        println!(
            "PASS {}  residual {:.3e} (tolerance {:.1e})",
            r.name, r.max_residual, r.tolerance
        );
    } else {
        println!(
            "FAIL {}  residual {:.3e} exceeds tolerance {:.1e}",
            r.name, r.max_residual, r.tolerance
        );
    }
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, CliError> {
    let vc = config::load(&args.common.config)?;
    check_outputs_allowed(
        &vc,
        &[OutputKind::Billiard, OutputKind::Report, OutputKind::Sweep],
    )?;

    let mut knobs = vc.tolerances.clone();
    for flag in &args.tolerance {
        let (name, value) = config::parse_tolerance_flag(flag)?;
        knobs.insert(name, value);
    }
    if vc.sweep_window.is_some() && args.samples.is_some() {
        return Err(CliError::Config(
            "u0 given as a window already fixes the sample count; drop --samples".to_string(),
        ));
    }
    let seed = args.seed.or(vc.seed);

    let mut billiard = build_from(&vc)?;
    require_closed(&billiard, "verify")?;
    if let Some(p) = vc.perturb {
        billiard.displace_vertex(p.index, p.dx, p.dy);
    }

    let mut polygon_checks = verify_billiard(&billiard).map_err(map_lib_error)?;
    let (sweep_cfg, samples) = match vc.sweep_window {
        Some((start, count)) => (vc.billiard.with_start(start).map_err(map_lib_error)?, count),
        None => (
            vc.billiard,
            args.samples.or(vc.samples).unwrap_or(DEFAULT_SAMPLES),
        ),
    };
    let sweep = sweep_motion(&sweep_cfg, samples, seed).map_err(map_lib_error)?;
    let mut sweep_checks = sweep.reports.clone();
    apply_tolerances(&mut polygon_checks, &knobs);
    apply_tolerances(&mut sweep_checks, &knobs);

    for r in polygon_checks.iter().chain(sweep_checks.iter()) {
        print_report_line(r);
    }
    let ok = all_pass(&polygon_checks) && all_pass(&sweep_checks);
    let applicable = polygon_checks
        .iter()
        .chain(sweep_checks.iter())
        .filter(|r| r.applicable)
        .count();
    println!(
        "verification: {} ({applicable} applicable checks)",
        if ok { "PASS" } else { "FAIL" }
    );

    if wanted(&vc, OutputKind::Billiard) {
        let doc = artifacts::billiard_doc(&billiard)?;
        write_artifact(&args.common.out, OutputKind::Billiard, &artifacts::to_json(&doc)?)?;
    }
    if wanted(&vc, OutputKind::Report) {
        let doc = artifacts::ReportDoc {
            config: &vc.raw,
            samples,
            seed,
            all_pass: ok,
            polygon_checks: polygon_checks.iter().map(artifacts::CheckDoc::from_report).collect(),
            sweep_checks: sweep_checks.iter().map(artifacts::CheckDoc::from_report).collect(),
        };
        write_artifact(&args.common.out, OutputKind::Report, &artifacts::to_json(&doc)?)?;
    }
    if wanted(&vc, OutputKind::Sweep) {
        write_artifact(&args.common.out, OutputKind::Sweep, &artifacts::sweep_csv(&sweep))?;
    }

    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_grid(args: GridArgs) -> Result<ExitCode, CliError> {
    let vc = config::load(&args.common.config)?;
    check_outputs_allowed(
        &vc,
        &[OutputKind::Billiard, OutputKind::Grid, OutputKind::Svg],
    )?;
    if vc.perturb.is_some() {
        return Err(CliError::Config(
            "perturb is a verification hook; it has no effect on grid".to_string(),
        ));
    }
    if vc.sweep_window.is_some() {
        return Err(CliError::Config(
            "u0 given as a window is only meaningful for verify".to_string(),
        ));
    }
    let billiard = build_from(&vc)?;
    require_closed(&billiard, "grid")?;
    let j_max = args.j_max.or(vc.j_max);
    let grid = poncelet_grid(&billiard, j_max).map_err(map_lib_error)?;

    if wanted(&vc, OutputKind::Billiard) {
        let doc = artifacts::billiard_doc(&billiard)?;
        write_artifact(&args.common.out, OutputKind::Billiard, &artifacts::to_json(&doc)?)?;
    }
    if wanted(&vc, OutputKind::Grid) {
        let doc = artifacts::grid_doc(&billiard, &grid);
        write_artifact(&args.common.out, OutputKind::Grid, &artifacts::to_json(&doc)?)?;
    }
    if wanted(&vc, OutputKind::Svg) {
        write_artifact(
            &args.common.out,
            OutputKind::Svg,
            &svg::render_scene(&billiard, Some(&grid)),
        )?;
    }
    Ok(ExitCode::SUCCESS)
}
