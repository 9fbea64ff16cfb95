//! The `r2p` command-line driver.
//!
//! One static binary exposes every capability as a subcommand:
//!
//! * `solve` — synthesize a planar physical-space field from boundary data,
//! * `certify` — run the certification suites and aggregate a verdict,
//! * `scan-lopatinski` — certify the sector lower bound of the scaled
//!   Lopatinski function,
//! * `scan-kh` — certify the kinetic-symbol lower bound on a shifted sector,
//! * `check-multipliers` — certify the symbol-class claims of the
//!   coefficient table,
//! * `oracle-compare` — cross-validate the closed form against the
//!   collocation oracle,
//! * `kernel-probe` — probe spatial kernel decay in the plane.
//!
//! Configuration comes from an optional sectioned text file (`--config`),
//! overridden value-by-value with `--set SECTION.KEY=VALUE`. Every run
//! creates a fresh directory under `--out` named by timestamp and config
//! hash, writes its data files there (floats at 17 significant digits), and
//! finishes with a `manifest.json` referencing each artifact.
//!
//! Exit codes are a stable contract for CI: 0 success, 2 configuration or
//! validation error, 3 runtime numerical error, 4 certification failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{ArgAction, Parser, Subcommand};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::Config;
use crate::lopatinski::{self, GridPreset, ScanGrid};
use crate::mode_solver::{
    self, extend_profile, extension_coefficients_exact, sample_boundary_data,
    sample_sector_point, BoundaryData, SyntheticData,
};
use crate::multipliers::{self, KernelKind, KernelProbeConfig, KernelSymbol};
use crate::oracle::{self, CollocationConfig};
use crate::params::{validate_params, PhysicalParams, ValidatedParams};
use crate::report::{self, format_float as ff, RunManifest};
use crate::symbols::{characteristic_roots, SpectralPoint};

/// Exit code: success.
pub const EXIT_OK: i32 = 0;
/// Exit code: configuration or validation error.
pub const EXIT_CONFIG: i32 = 2;
/// Exit code: runtime numerical or IO error.
pub const EXIT_RUNTIME: i32 = 3;
/// Exit code: a certification suite failed.
pub const EXIT_CERTIFICATION: i32 = 4;

/// Residual threshold the residual suite certifies against.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Identity threshold for the determinant-route and `frak_m` checks.
pub const IDENTITY_TOL: f64 = 1e-10;
/// Oracle-agreement threshold at converged collocation order.
pub const ORACLE_TOL: f64 = 1e-6;
/// Required error-drop factor per collocation-order doubling, pre-floor.
pub const CONVERGENCE_RATIO: f64 = 10.0;
/// Relative drift under grid refinement below which a scanned infimum
/// counts as stable.
pub const DRIFT_TOL: f64 = 0.05;
/// Allowed relative deviation of `K_H / (omega3 A)` from 1 in the limit
/// probe.
pub const OMEGA3_TOL: f64 = 0.01;

/// The command-line interface.
#[derive(Debug, Parser)]
#[command(
    name = "r2p",
    version,
    about = "Certified numerics for a linearized two-phase resolvent problem",
    long_about = "Explicit solution operators of the linearized \
                  compressible/incompressible two-phase resolvent problem on \
                  adjacent half-spaces, with numerical certification: \
                  exact-solution residuals, Lopatinski lower bounds, kinetic \
                  symbol bounds, multiplier classes, and kernel decay."
)]
pub struct Cli {
    /// Sectioned config file; missing sections fall back to defaults.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Override one config value (repeatable): SECTION.KEY=VALUE.
    #[arg(
        long = "set",
        global = true,
        value_name = "SECTION.KEY=VALUE",
        action = ArgAction::Append
    )]
    pub set: Vec<String>,

    /// Root directory for run outputs.
    #[arg(long, global = true, value_name = "DIR", default_value = "runs")]
    pub out: PathBuf,

    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "K")]
    pub threads: Option<usize>,

    /// Scan-grid density preset (smoke, default, deep).
    #[arg(long = "grid-preset", global = true, value_name = "NAME")]
    pub grid_preset: Option<String>,

    /// Run only the named certification suite (certify only).
    #[arg(long, global = true, value_name = "NAME")]
    pub suite: Option<String>,

    /// The subcommand.
    #[command(subcommand)]
    pub command: Command,
}

/// The subcommands of the binary.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize a planar physical-space field from boundary data.
    ///
    /// Field synthesis is the planar capability: the params dimension is
    /// forced to N = 2 for this command.
    Solve,
    /// Run the certification suites and aggregate a verdict.
    Certify,
    /// Scan the scaled Lopatinski function for its sector lower bound.
    ScanLopatinski,
    /// Scan the kinetic symbol |lambda + K_H| / w for its lower bound.
    ScanKh,
    /// Certify the symbol-class claims of the coefficient table.
    CheckMultipliers,
    /// Cross-validate the closed form against the collocation oracle.
    OracleCompare,
    /// Probe spatial kernel decay in the plane (params forced to N = 2).
    KernelProbe,
}

/// A command failure carrying its exit code.
#[derive(Debug)]
enum Failure {
    /// Configuration or validation problem (exit 2).
    Config(String),
    /// Runtime numerical or IO problem (exit 3).
    Runtime(String),
    /// One or more certificates failed (exit 4).
    Certification(String),
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => EXIT_CONFIG,
            Failure::Runtime(_) => EXIT_RUNTIME,
            Failure::Certification(_) => EXIT_CERTIFICATION,
        }
    }
    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Runtime(m) | Failure::Certification(m) => m,
        }
    }
}

/// The enum-variant name from a `Debug` rendering ("EqualDensities(2.0)"
/// -> "EqualDensities"), so error printouts name the module error.
fn variant_name<E: std::fmt::Debug>(e: &E) -> String {
    let dbg = format!("{e:?}");
    dbg.split(|c: char| c == '(' || c == '{' || c.is_whitespace())
        .next()
        .unwrap_or("Error")
        .to_string()
}

fn config_failure<E: std::fmt::Debug + std::fmt::Display>(e: E) -> Failure {
    Failure::Config(format!("{}: {}", variant_name(&e), e))
}

fn runtime_failure<E: std::fmt::Debug + std::fmt::Display>(e: E) -> Failure {
    Failure::Runtime(format!("{}: {}", variant_name(&e), e))
}

/// Runs the CLI on the given arguments and returns the process exit code.
///
/// Errors are printed to stderr with the module error named in the message;
/// certification failures are reported on stdout suite by suite before the
/// nonzero exit.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp
                | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_CONFIG,
            };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            failure.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<i32, Failure> {
    if let Some(k) = cli.threads {
        if k == 0 {
            return Err(Failure::Config(
                "BadValue: --threads must be at least 1".to_string(),
            ));
        }
        // A second initialization (tests driving run() repeatedly) is fine:
        // the first pool wins.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }

    let mut cfg = match &cli.config {
        Some(path) => Config::load(path).map_err(config_failure)?,
        None => Config::default(),
    };
    for spec in &cli.set {
        cfg.apply_override(spec).map_err(config_failure)?;
    }
    // Flags that change results land in the config so they are hashed and
    // echoed like any other value.
    if let Some(preset) = &cli.grid_preset {
        preset
            .parse::<GridPreset>()
            .map_err(|e| Failure::Config(format!("BadValue: {e}")))?;
        cfg.set("scan", "preset", preset);
    }
    if let Some(suite) = &cli.suite {
        cfg.set("certify", "suite", suite);
    }

    match cli.command {
        Command::Solve => cmd_solve(&cli.out, &cfg),
        Command::Certify => cmd_certify(&cli.out, &cfg),
        Command::ScanLopatinski => cmd_scan_lopatinski(&cli.out, &cfg),
        Command::ScanKh => cmd_scan_kh(&cli.out, &cfg),
        Command::CheckMultipliers => cmd_check_multipliers(&cli.out, &cfg),
        Command::OracleCompare => cmd_oracle_compare(&cli.out, &cfg),
        Command::KernelProbe => cmd_kernel_probe(&cli.out, &cfg),
    }
}

/// Resolves and validates the physical parameters. Commands whose
/// capability is inherently planar force `dim = 2` before validation.
fn resolved_params(
    cfg: &Config,
    force_planar: bool,
) -> Result<(PhysicalParams, ValidatedParams), Failure> {
    let mut raw = cfg.physical_params().map_err(config_failure)?;
    if force_planar {
        raw.dim = 2;
    }
    let validated = validate_params(&raw).map_err(config_failure)?;
    Ok((raw, validated))
}

/// An open run directory with its manifest under construction.
struct Run {
    dir: PathBuf,
    manifest: RunManifest,
}

impl Run {
    fn start(
        out: &Path,
        cfg: &Config,
        command: &str,
        params: PhysicalParams,
    ) -> Result<Run, Failure> {
        let canonical = cfg.canonical_string();
        let dir = report::create_run_dir(out, &canonical).map_err(runtime_failure)?;
        Ok(Run {
            dir,
            manifest: RunManifest::new(command, &canonical, params),
        })
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), Failure> {
        report::write_json(&self.dir.join(name), value).map_err(runtime_failure)?;
        self.manifest.artifact(name);
        Ok(())
    }

    fn write_csv(
        &mut self,
        name: &str,
        header: &[&str],
        rows: &[Vec<String>],
    ) -> Result<(), Failure> {
        report::write_csv(&self.dir.join(name), header, rows).map_err(runtime_failure)?;
        self.manifest.artifact(name);
        Ok(())
    }

    /// Writes the manifest (always the last artifact) and prints the
    /// closing status line.
    fn finish(mut self, status: &str, passed: bool) -> Result<i32, Failure> {
        self.manifest
            .verdict("aggregate", if passed { "pass" } else { "fail" });
        self.manifest.write(&self.dir).map_err(runtime_failure)?;
        println!(
            "{} {} (run dir {})",
            status,
            if passed { "PASS" } else { "FAIL" },
            self.dir.display()
        );
        Ok(if passed { EXIT_OK } else { EXIT_CERTIFICATION })
    }
}

fn scan_rows_to_csv(rows: &[lopatinski::ScanRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            vec![
                ff(r.lambda_abs),
                ff(r.lambda_arg),
                ff(r.a),
                r.ratio.map(ff).unwrap_or_default(),
                r.regime.clone(),
            ]
        })
        .collect()
}

const SCAN_CSV_HEADER: [&str; 5] = ["lambda_abs", "lambda_arg", "a", "ratio", "regime"];

/// The scan grid from `[scan]`: `preset` (smoke/default/deep) and `eps`.
fn scan_grid_from(cfg: &Config) -> Result<ScanGrid, Failure> {
    let preset: GridPreset = cfg
        .str_or("scan", "preset", "default")
        .parse()
        .map_err(|e| Failure::Config(format!("BadValue: {e}")))?;
    let eps = sector_eps(cfg)?;
    Ok(ScanGrid::preset(preset, eps))
}

fn sector_eps(cfg: &Config) -> Result<f64, Failure> {
    let eps = cfg
        .f64_or("scan", "eps", std::f64::consts::FRAC_PI_3)
        .map_err(config_failure)?;
    if !(eps > 0.0 && eps < std::f64::consts::PI) {
        return Err(Failure::Config(format!(
            "BadValue: [scan] eps = {eps} must lie strictly between 0 and pi"
        )));
    }
    Ok(eps)
}

/// Worst homogeneity residual of the Lopatinski function over a small
/// deterministic probe set spanning the grid's decades.
fn homogeneity_probe(p: &ValidatedParams, grid: &ScanGrid) -> f64 {
    let mut worst: f64 = 0.0;
    let mags = [
        10f64.powi(grid.lambda_decade_min),
        1.0,
        10f64.powi(grid.lambda_decade_max),
    ];
    let amags = [
        10f64.powi(grid.a_decade_min),
        1.0,
        10f64.powi(grid.a_decade_max),
    ];
    let half = std::f64::consts::PI - grid.eps;
    for &mag in &mags {
        for frac in [-1.0, 0.0, 1.0] {
            for &a in &amags {
                let pt =
                    SpectralPoint::new(Complex64::from_polar(mag, frac * half), &[a]);
                if let Some(res) = lopatinski::homogeneity_residual(p, &pt) {
                    worst = worst.max(res);
                }
            }
        }
    }
    worst
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct SolveSummary {
    tool_version: String,
    params: PhysicalParams,
    lambda: (f64, f64),
    length: f64,
    samples: usize,
    stations: Vec<f64>,
    data: String,
    max_imag_leakage: f64,
    verdict: String,
}

fn cmd_solve(out: &Path, cfg: &Config) -> Result<i32, Failure> {
    let (raw, p) = resolved_params(cfg, true)?;
    let get_f = |key: &str, d: f64| cfg.f64_or("solve", key, d).map_err(config_failure);
    let lambda = Complex64::new(get_f("lambda_re", 1.0)?, get_f("lambda_im", 0.5)?);
    let length = get_f("length", std::f64::consts::TAU)?;
    if !(length > 0.0) {
        return Err(Failure::Config(format!(
            "BadValue: [solve] length = {length} must be positive"
        )));
    }
    let samples = cfg.usize_or("solve", "samples", 64).map_err(config_failure)?;
    if samples < 4 {
        return Err(Failure::Config(format!(
            "BadValue: [solve] samples = {samples} must be at least 4"
        )));
    }
    let stations = cfg
        .f64_list_or("solve", "stations", &[0.4, 0.1, 0.0, -0.1, -0.4])
        .map_err(config_failure)?;
    let kind = cfg.str_or("solve", "data", "harmonic");
    let data = boundary_samples(cfg, &kind, samples, length)?;

    let mut run = Run::start(out, cfg, "solve", raw)?;
    let field = mode_solver::synthesize_field(&p, lambda, &data, length, &stations)
        .map_err(runtime_failure)?;

    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut push = |x: f64, st: f64, comp: &str, value: f64| {
        // The synthesized field is real by construction (Hermitian
        // symmetrization); the imaginary column is kept for format
        // stability and is exactly zero.
        rows.push(vec![ff(x), ff(st), comp.to_string(), ff(value), ff(0.0)]);
    };
    for (si, &st) in field.stations.iter().enumerate() {
        for (ci, comp) in ["u_1", "u_2"].iter().enumerate() {
            for (ix, &x) in field.x_prime.iter().enumerate() {
                push(x, st, comp, field.u[si][ci][ix]);
            }
        }
        let scalar_name = if st >= 0.0 { "rho_plus" } else { "pi_minus" };
        for (ix, &x) in field.x_prime.iter().enumerate() {
            push(x, st, scalar_name, field.scalar[si][ix]);
        }
    }
    for (ix, &x) in field.x_prime.iter().enumerate() {
        push(x, 0.0, "height", field.height[ix]);
    }
    run.write_csv(
        "field.csv",
        &["x_prime", "station", "component", "re", "im"],
        &rows,
    )?;

    let summary = SolveSummary {
        tool_version: report::TOOL_VERSION.to_string(),
        params: raw,
        lambda: (lambda.re, lambda.im),
        length,
        samples,
        stations: stations.clone(),
        data: kind,
        max_imag_leakage: field.max_imag_leakage,
        verdict: "ok".to_string(),
    };
    run.write_json("summary.json", &summary)?;
    run.manifest.verdict("solve", "ok");
    run.finish("solve:", true)
}

/// Builds the boundary samples for `solve` from the configured generator.
fn boundary_samples(
    cfg: &Config,
    kind: &str,
    n: usize,
    length: f64,
) -> Result<SyntheticData, Failure> {
    let get_f = |key: &str, d: f64| cfg.f64_or("solve", key, d).map_err(config_failure);
    let xs: Vec<f64> = (0..n).map(|i| length * i as f64 / n as f64).collect();
    match kind {
        "harmonic" => {
            let h_mode = cfg.usize_or("solve", "h_mode", 1).map_err(config_failure)?;
            let d_mode = cfg.usize_or("solve", "d_mode", 2).map_err(config_failure)?;
            let h_amp = get_f("h_amp", 1.0)?;
            let d_amp = get_f("d_amp", 0.5)?;
            let check_mode = |name: &str, m: usize| -> Result<(), Failure> {
                if m == 0 || m > (n - 1) / 2 {
                    return Err(Failure::Config(format!(
                        "BadValue: [solve] {name} = {m} must lie in 1..={} for \
                         {n} samples (the zero mode is excluded: inputs have \
                         zero mean)",
                        (n - 1) / 2
                    )));
                }
                Ok(())
            };
            check_mode("h_mode", h_mode)?;
            check_mode("d_mode", d_mode)?;
            let tau = std::f64::consts::TAU;
            Ok(SyntheticData {
                h: xs
                    .iter()
                    .map(|&x| h_amp * (tau * h_mode as f64 * x / length).cos())
                    .collect(),
                d: xs
                    .iter()
                    .map(|&x| d_amp * (tau * d_mode as f64 * x / length).sin())
                    .collect(),
            })
        }
        "gaussian" => {
            // Periodized Gaussian bumps; the mean is removed because the
            // zero-frequency mode is excluded from the synthesis.
            let h_amp = get_f("h_amp", 1.0)?;
            let d_amp = get_f("d_amp", 0.5)?;
            let width = get_f("width", 0.08)? * length;
            if !(width > 0.0) {
                return Err(Failure::Config(
                    "BadValue: [solve] width must be positive".to_string(),
                ));
            }
            let bump = |center: f64, amp: f64| -> Vec<f64> {
                let mut v: Vec<f64> = xs
                    .iter()
                    .map(|&x| {
                        // Nearest periodic image.
                        let mut dx = x - center;
                        dx -= (dx / length).round() * length;
                        amp * (-0.5 * (dx / width).powi(2)).exp()
                    })
                    .collect();
                let mean = v.iter().sum::<f64>() / n as f64;
                v.iter_mut().for_each(|y| *y -= mean);
                v
            };
            Ok(SyntheticData {
                h: bump(0.35 * length, h_amp),
                d: bump(0.65 * length, d_amp),
            })
        }
        "csv" => {
            let h_file = cfg.get("solve", "h_file").ok_or_else(|| {
                Failure::Config(
                    "BadValue: [solve] h_file is required for data = csv".to_string(),
                )
            })?;
            let d_file = cfg.get("solve", "d_file").ok_or_else(|| {
                Failure::Config(
                    "BadValue: [solve] d_file is required for data = csv".to_string(),
                )
            })?;
            let h = read_csv_column(Path::new(h_file))?;
            let d = read_csv_column(Path::new(d_file))?;
            if h.len() != d.len() || h.len() < 4 {
                return Err(Failure::Config(format!(
                    "BadValue: boundary CSVs must have equal length >= 4 \
                     (got {} and {})",
                    h.len(),
                    d.len()
                )));
            }
            Ok(SyntheticData { h, d })
        }
        other => Err(Failure::Config(format!(
            "BadValue: unknown [solve] data generator {other:?} (expected \
             harmonic, gaussian, or csv)"
        ))),
    }
}

/// Reads the last column of a CSV file as floats; a non-numeric first row
/// is treated as a header.
fn read_csv_column(path: &Path) -> Result<Vec<f64>, Failure> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .map_err(|e| {
            Failure::Config(format!("Io: cannot open {}: {e}", path.display()))
        })?;
    let mut vals = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| {
            Failure::Config(format!("BadValue: {}: {e}", path.display()))
        })?;
        let Some(cell) = rec.iter().last() else { continue };
        match cell.trim().parse::<f64>() {
            Ok(v) => vals.push(v),
            Err(_) if i == 0 && vals.is_empty() => continue,
            Err(_) => {
                return Err(Failure::Config(format!(
                    "BadValue: {}: row {} value {:?} is not a float",
                    path.display(),
                    i + 1,
                    cell
                )))
            }
        }
    }
    Ok(vals)
}

// ---------------------------------------------------------------------------
// scan-lopatinski
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct LopatinskiSummary {
    tool_version: String,
    params: PhysicalParams,
    report: lopatinski::LowerBoundReport,
    homogeneity_max: f64,
    empirical_constants: lopatinski::RegimeConstantsReport,
}

fn cmd_scan_lopatinski(out: &Path, cfg: &Config) -> Result<i32, Failure> {
    let (raw, p) = resolved_params(cfg, false)?;
    let grid = scan_grid_from(cfg)?;
    let mut run = Run::start(out, cfg, "scan-lopatinski", raw)?;

    let rows = lopatinski::lower_bound_rows(&p, &grid);
    run.write_csv("scan.csv", &SCAN_CSV_HEADER, &scan_rows_to_csv(&rows))?;

    let rep = lopatinski::scan_lower_bound(&p, &grid);
    let homogeneity_max = homogeneity_probe(&p, &grid);
    let constants = lopatinski::empirical_regime_constants(&p, grid.eps);
    let passed = rep.infimum > 0.0
        && rep.refinement_drift < DRIFT_TOL
        && homogeneity_max <= IDENTITY_TOL;
    println!(
        "scan-lopatinski: infimum {} at |lambda| = {}, A = {} over {} points \
         (drift {:.2}%, homogeneity max {:.2e})",
        ff(rep.infimum),
        ff((rep.argmin_lambda.0.powi(2) + rep.argmin_lambda.1.powi(2)).sqrt()),
        ff(rep.argmin_a),
        rep.n_points,
        100.0 * rep.refinement_drift,
        homogeneity_max,
    );
    let summary = LopatinskiSummary {
        tool_version: report::TOOL_VERSION.to_string(),
        params: raw,
        report: rep,
        homogeneity_max,
        empirical_constants: constants,
    };
    run.write_json("summary.json", &summary)?;
    run.manifest
        .verdict("lopatinski", if passed { "pass" } else { "fail" });
    run.finish("scan-lopatinski:", passed)
}

// ---------------------------------------------------------------------------
// scan-kh
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct KineticSummary {
    tool_version: String,
    params: PhysicalParams,
    report: lopatinski::KineticBoundReport,
}

fn cmd_scan_kh(out: &Path, cfg: &Config) -> Result<i32, Failure> {
    let (raw, p) = resolved_params(cfg, false)?;
    let grid = scan_grid_from(cfg)?;
    let mut run = Run::start(out, cfg, "scan-kh", raw)?;

    match lopatinski::scan_kinetic_bound(&p, &grid) {
        Ok(rep) => {
            let rows = lopatinski::kinetic_bound_rows(&p, &grid, rep.lambda0);
            run.write_csv("scan.csv", &SCAN_CSV_HEADER, &scan_rows_to_csv(&rows))?;
            let omega3_ok =
                p.derived().omega3 == 0.0 || rep.omega3_limit_deviation <= OMEGA3_TOL;
            let passed =
                rep.infimum > 0.0 && rep.refinement_drift < DRIFT_TOL && omega3_ok;
            println!(
                "scan-kh: lambda0 = {} infimum {} over {} points (drift {:.2}%, \
                 omega3 limit deviation {:.3e})",
                ff(rep.lambda0),
                ff(rep.infimum),
                rep.n_points,
                100.0 * rep.refinement_drift,
                rep.omega3_limit_deviation,
            );
            let summary = KineticSummary {
                tool_version: report::TOOL_VERSION.to_string(),
                params: raw,
                report: rep,
            };
            run.write_json("summary.json", &summary)?;
            run.manifest
                .verdict("kinetic", if passed { "pass" } else { "fail" });
            run.finish("scan-kh:", passed)
        }
        Err(e) => {
            println!("scan-kh: {e}");
            run.manifest.verdict("kinetic", format!("fail: {e}"));
            run.finish("scan-kh:", false)
        }
    }
}

// ---------------------------------------------------------------------------
// check-multipliers
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct MultiplierSummary {
    tool_version: String,
    params: PhysicalParams,
    n_claims: usize,
    n_bounded: usize,
    reports: Vec<multipliers::ClassEstimateReport>,
}

/// File-name slug for one claim (index keeps similar names unique).
fn claim_slug(idx: usize, claim: &multipliers::ClassClaim) -> String {
    let mut slug = String::new();
    for ch in format!("{}", claim.target).chars() {
        match ch {
            'a'..='z' | '0'..='9' => slug.push(ch),
            'A'..='Z' => slug.push(ch.to_ascii_lowercase()),
            '+' => slug.push('p'),
            '-' => slug.push('m'),
            _ => {
                if !slug.ends_with('-') {
                    slug.push('-');
                }
            }
        }
    }
    format!("claim-{idx:03}-{}", slug.trim_matches('-'))
}

fn class_scan_grid(cfg: &Config) -> Result<ScanGrid, Failure> {
    let preset: GridPreset = cfg
        .str_or("scan", "preset", "default")
        .parse()
        .map_err(|e| Failure::Config(format!("BadValue: {e}")))?;
    let mut grid = multipliers::class_grid(sector_eps(cfg)?);
    match preset {
        GridPreset::Smoke => {
            grid.lambda_per_decade = 2;
            grid.a_per_decade = 2;
            grid.n_args = 3;
        }
        GridPreset::Default => {}
        GridPreset::Deep => {
            grid.lambda_per_decade = 5;
            grid.a_per_decade = 5;
            grid.n_args = 7;
        }
    }
    Ok(grid)
}

fn cmd_check_multipliers(out: &Path, cfg: &Config) -> Result<i32, Failure> {
    let (raw, p) = resolved_params(cfg, false)?;
    let grid = class_scan_grid(cfg)?;
    let mut run = Run::start(out, cfg, "check-multipliers", raw)?;

    let claims = multipliers::standard_claims(p.dim());
    let reports: Vec<multipliers::ClassEstimateReport> = claims
        .par_iter()
        .map(|claim| multipliers::class_estimate(&p, claim, &grid))
        .collect();

    for (idx, rep) in reports.iter().enumerate() {
        let rows: Vec<Vec<String>> = rep
            .per_combo
            .iter()
            .map(|combo| {
                vec![
                    combo.alpha.0.to_string(),
                    combo.alpha.1.to_string(),
                    combo.s_tau.to_string(),
                    ff(combo.sup),
                ]
            })
            .collect();
        run.write_csv(
            &format!("{}.csv", claim_slug(idx, &rep.claim)),
            &["alpha_1", "alpha_2", "s_tau", "sup"],
            &rows,
        )?;
    }

    let n_bounded = reports.iter().filter(|r| r.bounded).count();
    let passed = n_bounded == reports.len();
    for rep in reports.iter().filter(|r| !r.bounded) {
        println!(
            "check-multipliers: UNBOUNDED {} (order {}, {:?}): sup {} grew \
             {:.2}% under refinement",
            rep.claim.target,
            rep.claim.order,
            rep.claim.mtype,
            ff(rep.sup_constant),
            100.0 * rep.growth,
        );
    }
    println!(
        "check-multipliers: {n_bounded}/{} claims refinement-stable",
        reports.len()
    );
    let summary = MultiplierSummary {
        tool_version: report::TOOL_VERSION.to_string(),
        params: raw,
        n_claims: reports.len(),
        n_bounded,
        reports,
    };
    run.write_json("summary.json", &summary)?;
    run.manifest
        .verdict("multipliers", if passed { "pass" } else { "fail" });
    run.finish("check-multipliers:", passed)
}

// ---------------------------------------------------------------------------
// oracle-compare
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct OracleSummary {
    tool_version: String,
    params: PhysicalParams,
    lambda: (f64, f64),
    xi: Vec<f64>,
    kinetic: bool,
    comparison: oracle::OracleComparison,
    convergence: Vec<oracle::ConvergenceRow>,
}

/// The spectral point and boundary data configured under `[mode]`.
fn configured_mode_point(
    cfg: &Config,
    p: &ValidatedParams,
) -> Result<(SpectralPoint, BoundaryData), Failure> {
    let lambda = Complex64::new(
        cfg.f64_or("mode", "lambda_re", 0.618033988749894_9)
            .map_err(config_failure)?,
        cfg.f64_or("mode", "lambda_im", 1.902113032590307_1)
            .map_err(config_failure)?,
    );
    let default_xi = &[0.7, -0.4][..p.dim() - 1];
    let xi = cfg
        .f64_list_or("mode", "xi", default_xi)
        .map_err(config_failure)?;
    if xi.len() != p.dim() - 1 {
        return Err(Failure::Config(format!(
            "BadValue: [mode] xi needs {} components for N = {(}",
            p.dim() - 1,
            p.dim()
        )));
    }
    if xi.iter().map(|v| v * v).sum::<f64>() == 0.0 {
        return Err(Failure::Config(
            "BadValue: [mode] xi must be nonzero (A > 0)".to_string(),
        ));
    }
    let kinetic = cfg.usize_or("mode", "kinetic", 1).map_err(config_failure)? != 0;
    let n_t = p.dim() - 1;
    let h: Vec<Complex64> = (0..n_t)
        .map(|j| Complex64::new(1.0, if j == 0 { 0.0 } else { -0.5 }))
        .collect();
    let data = if kinetic {
        BoundaryData::Kinetic {
            h,
            d: Complex64::new(0.5, 0.25),
        }
    } else {
        BoundaryData::Prescribed {
            h,
            height: Complex64::new(0.5, 0.25),
        }
    };
    Ok((SpectralPoint::new(lambda, &xi), data))
}

fn cmd_oracle_compare(out: &Path, cfg: &Config) -> Result<i32, Failure> {
    let (raw, p) = resolved_params(cfg, false)?;
    let (pt, data) = configured_mode_point(cfg, &p)?;
    let n = cfg.usize_or("oracle", "n", 48).map_err(config_failure)?;
    let orders = cfg
        .f64_list_or("oracle", "orders", &[12.0, 24.0, 48.0])
        .map_err(config_failure)?
        .into_iter()
        .map(|v| v as usize)
        .collect::<Vec<_>>();
    let mut run = Run::start(out, cfg, "oracle-compare", raw)?;

    let cc = CollocationConfig {
        n,
        ..CollocationConfig::default()
    };
    let comparison = oracle::compare(&p, &pt, &data, &cc).map_err(runtime_failure)?;
    let convergence =
        oracle::convergence(&p, &pt, &data, &orders).map_err(runtime_failure)?;

    let rows: Vec<Vec<String>> = convergence
        .iter()
        .map(|r| vec![r.n.to_string(), ff(r.max_rel)])
        .collect();
    run.write_csv("convergence.csv", &["n", "max_rel"], &rows)?;

    let spectral = convergence.windows(2).all(|w| {
        w[1].max_rel <= w[0].max_rel / CONVERGENCE_RATIO || w[1].max_rel <= 1e-9
    });
    let passed = comparison.max_rel <= ORACLE_TOL && spectral;
    println!(
        "oracle-compare: n = {} max relative disagreement {} \
         (convergence {})",
        comparison.n,
        ff(comparison.max_rel),
        convergence
            .iter()
            .map(|r| format!("{}:{:.3e}", r.n, r.max_rel))
            .collect::<Vec<_>>()
            .join(" -> "),
    );
    let summary = OracleSummary {
        tool_version: report::TOOL_VERSION.to_string(),
        params: raw,
        lambda: (pt.lambda.re, pt.lambda.im),
        xi: pt.xi_prime().to_vec(),
        kinetic: matches!(data, BoundaryData::Kinetic { .. }),
        comparison,
        convergence,
    };
    run.write_json("comparison.json", &summary)?;
    run.manifest
        .verdict("oracle", if passed { "pass" } else { "fail" });
    run.finish("oracle-compare:", passed)
}

// ---------------------------------------------------------------------------
// kernel-probe
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct KernelSummary {
    tool_version: String,
    params: PhysicalParams,
    reports: Vec<multipliers::KernelDecayReport>,
}

/// Parses a comma-separated list of `re:im` complex values.
fn parse_lambda_list(text: &str) -> Result<Vec<Complex64>, Failure> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let bad = || {
                Failure::Config(format!(
                    "BadValue: lambda entry {s:?} is not of the form re:im"
                ))
            };
            let (re, im) = s.split_once(':').ok_or_else(bad)?;
            Ok(Complex64::new(
                re.trim().parse().map_err(|_| bad())?,
                im.trim().parse().map_err(|_| bad())?,
            ))
        })
        .collect()
}

fn cmd_kernel_probe(out: &Path, cfg: &Config) -> Result<i32, Failure> {
    let (raw, p) = resolved_params(cfg, true)?;
    let kind: KernelKind = cfg
        .str_or("kernel", "kind", "k0")
        .parse()
        .map_err(|e| Failure::Config(format!("BadValue: {e}")))?;
    let symbol: KernelSymbol = cfg
        .str_or("kernel", "symbol", "q_plus_nn_1")
        .parse()
        .map_err(|e| Failure::Config(format!("BadValue: {e}")))?;
    let lambdas =
        parse_lambda_list(&cfg.str_or("kernel", "lambdas", "1:0, 0.5:0.8, 2:-1"))?;
    if lambdas.is_empty() {
        return Err(Failure::Config(
            "BadValue: [kernel] lambdas must name at least one point".to_string(),
        ));
    }
    let mut probe_cfg = KernelProbeConfig::default();
    probe_cfg.n_radii = cfg
        .usize_or("kernel", "n_radii", probe_cfg.n_radii)
        .map_err(config_failure)?;
    if probe_cfg.n_radii < 3 {
        return Err(Failure::Config(
            "BadValue: [kernel] n_radii must be at least 3".to_string(),
        ));
    }
    let mut run = Run::start(out, cfg, "kernel-probe", raw)?;

    let mut reports = Vec::new();
    for &lambda in &lambdas {
        let rep = multipliers::kernel_decay_probe(&p, kind, symbol, lambda, &probe_cfg)
            .map_err(runtime_failure)?;
        reports.push(rep);
    }

    let mut rows: Vec<Vec<String>> = Vec::new();
    for rep in &reports {
        for (i, &r) in rep.radii.iter().enumerate() {
            rows.push(vec![
                ff(rep.lambda.0),
                ff(rep.lambda.1),
                ff(r),
                ff(rep.weighted_sup[i]),
            ]);
        }
    }
    run.write_csv(
        "decay.csv",
        &["lambda_re", "lambda_im", "radius", "weighted_sup"],
        &rows,
    )?;

    let passed = reports.iter().all(|r| r.sup_finite && r.non_increasing);
    for rep in &reports {
        println!(
            "kernel-probe: lambda = {}+{}i outer-decade ratio {:.3} \
             ({} radii, finite: {})",
            ff(rep.lambda.0),
            ff(rep.lambda.1),
            rep.outer_decade_ratio,
            rep.radii.len(),
            rep.sup_finite,
        );
    }
    let summary = KernelSummary {
        tool_version: report::TOOL_VERSION.to_string(),
        params: raw,
        reports,
    };
    run.write_json("summary.json", &summary)?;
    run.manifest
        .verdict("kernel", if passed { "pass" } else { "fail" });
    run.finish("kernel-probe:", passed)
}

// ---------------------------------------------------------------------------
// certify
// ---------------------------------------------------------------------------

/// Per-suite effort knobs derived from the grid preset.
#[derive(Clone, Copy)]
struct Effort {
    residual_draws: usize,
    identity_points: usize,
    oracle_points: usize,
    oracle_n: usize,
    kernel_lambdas: usize,
    kernel_radii: usize,
}

fn effort_from(preset: GridPreset) -> Effort {
    match preset {
        GridPreset::Smoke => Effort {
            residual_draws: 20,
            identity_points: 500,
            oracle_points: 2,
            oracle_n: 32,
            kernel_lambdas: 1,
            kernel_radii: 7,
        },
        GridPreset::Default => Effort {
            residual_draws: 60,
            identity_points: 2000,
            oracle_points: 5,
            oracle_n: 48,
            kernel_lambdas: 2,
            kernel_radii: 9,
        },
        GridPreset::Deep => Effort {
            residual_draws: 200,
            identity_points: 10_000,
            oracle_points: 20,
            oracle_n: 48,
            kernel_lambdas: 3,
            kernel_radii: 13,
        },
    }
}

#[derive(Serialize)]
struct SuiteEntry {
    name: String,
    passed: bool,
    detail: String,
}

#[derive(Serialize)]
struct Certificate {
    tool_version: String,
    params: PhysicalParams,
    preset: String,
    seed: u64,
    eps: f64,
    suites: Vec<SuiteEntry>,
    all_passed: bool,
}

const SUITE_NAMES: [&str; 8] = [
    "residuals",
    "identities",
    "lopatinski",
    "kinetic",
    "multipliers",
    "oracle",
    "extension",
    "kernel",
];

fn cmd_certify(out: &Path, cfg: &Config) -> Result<i32, Failure> {
    let (raw, p) = resolved_params(cfg, false)?;
    let preset_name = cfg.str_or("scan", "preset", "default");
    let preset: GridPreset = preset_name
        .parse()
        .map_err(|e| Failure::Config(format!("BadValue: {e}")))?;
    let effort = effort_from(preset);
    let eps = sector_eps(cfg)?;
    let seed = cfg.usize_or("certify", "seed", 20_240_817).map_err(config_failure)?
        as u64;
    let only = cfg.get("certify", "suite").map(str::to_string);
    if let Some(name) = &only {
        if !SUITE_NAMES.contains(&name.as_str()) {
            return Err(Failure::Config(format!(
                "BadValue: unknown suite {name:?} (expected one of {})",
                SUITE_NAMES.join(", ")
            )));
        }
    }
    let scan_grid = ScanGrid::preset(preset, eps);
    let class_grid = class_scan_grid(cfg)?;

    let mut run = Run::start(out, cfg, "certify", raw)?;
    let mut entries: Vec<SuiteEntry> = Vec::new();

    let wants = |name: &str| only.as_deref().map_or(true, |o| o == name);
    type SuiteFn<'a> = Box<dyn FnOnce(&mut Run) -> Result<(bool, String), Failure> + 'a>;
    let suites: Vec<(&str, SuiteFn)> = vec![
        (
            "residuals",
            Box::new(|run: &mut Run| {
                suite_residuals(run, &p, eps, seed, effort.residual_draws)
            }),
        ),
        (
            "identities",
            Box::new(|run: &mut Run| {
                suite_identities(run, &p, eps, seed, effort.identity_points)
            }),
        ),
        (
            "lopatinski",
            Box::new(|run: &mut Run| suite_lopatinski(run, &p, &scan_grid)),
        ),
        (
            "kinetic",
            Box::new(|run: &mut Run| suite_kinetic(run, &p, &scan_grid)),
        ),
        (
            "multipliers",
            Box::new(|run: &mut Run| suite_multipliers(run, &p, &class_grid)),
        ),
        (
            "oracle",
            Box::new(|run: &mut Run| {
                suite_oracle(run, &p, eps, seed, effort.oracle_points, effort.oracle_n)
            }),
        ),
        (
            "extension",
            Box::new(|run: &mut Run| suite_extension(run)),
        ),
        (
            "kernel",
            Box::new(|run: &mut Run| {
                suite_kernel(run, &raw, effort.kernel_lambdas, effort.kernel_radii)
            }),
        ),
    ];

    for (name, suite) in suites {
        if !wants(name) {
            continue;
        }
        let t0 = Instant::now();
        let (passed, detail) = suite(&mut run)?;
        let dt = t0.elapsed().as_secs_f64();
        println!(
            "suite {name}: {} ({dt:.2} s) - {detail}",
            if passed { "PASS" } else { "FAIL" }
        );
        run.manifest
            .verdict(name, if passed { "pass" } else { "fail" });
        entries.push(SuiteEntry {
            name: name.to_string(),
            passed,
            detail,
        });
    }

    let all_passed = entries.iter().all(|e| e.passed) && !entries.is_empty();
    let certificate = Certificate {
        tool_version: report::TOOL_VERSION.to_string(),
        params: raw,
        preset: preset_name,
        seed,
        eps,
        suites: entries,
        all_passed,
    };
    run.write_json("certificate.json", &certificate)?;
    run.finish("certify:", all_passed)
}

/// Draws an admissible point/data pair, redrawing on the rare degenerate
/// rejections near root collisions.
fn draw_mode_case(
    rng: &mut ChaCha8Rng,
    p: &ValidatedParams,
    eps: f64,
    kinetic: bool,
) -> Result<(SpectralPoint, BoundaryData, mode_solver::ModeSolution), Failure> {
    for _ in 0..64 {
        let pt = sample_sector_point(rng, p.dim(), eps, (1e-2, 1e2), (1e-2, 1e2));
        let data = sample_boundary_data(rng, p.dim(), kinetic);
        match mode_solver::solve_mode(p, &pt, &data) {
            Ok(sol) => return Ok((pt, data, sol)),
            Err(_) => continue,
        }
    }
    Err(Failure::Runtime(
        "SolveFailed: 64 consecutive draws were rejected as degenerate"
            .to_string(),
    ))
}

#[derive(Serialize)]
struct ResidualSuiteReport {
    draws: usize,
    worst_residual: f64,
    worst_lambda: (f64, f64),
    worst_a: f64,
    tolerance: f64,
}

fn suite_residuals(
    run: &mut Run,
    p: &ValidatedParams,
    eps: f64,
    seed: u64,
    draws: usize,
) -> Result<(bool, String), Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut worst_pt = (Complex64::new(0.0, 0.0), 0.0);
    for i in 0..draws {
        let (pt, _data, sol) = draw_mode_case(&mut rng, p, eps, i % 2 == 0)?;
        let rep = mode_solver::residual_mode(p, &sol);
        if rep.max_rel > worst {
            worst = rep.max_rel;
            worst_pt = (pt.lambda, pt.a());
        }
    }
    let passed = worst <= RESIDUAL_TOL;
    let report = ResidualSuiteReport {
        draws,
        worst_residual: worst,
        worst_lambda: (worst_pt.0.re, worst_pt.0.im),
        worst_a: worst_pt.1,
        tolerance: RESIDUAL_TOL,
    };
    run.write_json("residuals.json", &report)?;
    Ok((
        passed,
        format!("{draws} draws, worst residual {worst:.3e} (tol {RESIDUAL_TOL:.1e})"),
    ))
}

#[derive(Serialize)]
struct IdentitySuiteReport {
    points: usize,
    worst_det_route: f64,
    worst_m_identity: f64,
    vieta_residual: f64,
    min_root_margin: f64,
    empirical_c1: f64,
    tolerance: f64,
}

fn suite_identities(
    run: &mut Run,
    p: &ValidatedParams,
    eps: f64,
    seed: u64,
    points: usize,
) -> Result<(bool, String), Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1de0_7611);
    let pts: Vec<SpectralPoint> = (0..points)
        .map(|_| sample_sector_point(&mut rng, p.dim(), eps, (1e-2, 1e2), (1e-2, 1e2)))
        .collect();
    let (mut det_worst, mut m_worst) = (0.0f64, 0.0f64);
    let mut min_margin = f64::INFINITY;
    let mut c1 = f64::INFINITY;
    let mut evaluated = 0usize;
    for pt in &pts {
        let Ok(s) = characteristic_roots(p, pt) else { continue };
        evaluated += 1;
        let margin = s
            .b_plus
            .re
            .min(s.b_minus.re)
            .min(s.t1.re)
            .min(s.t2.re);
        min_margin = min_margin.min(margin);
        c1 = c1.min(s.b_plus.re.min(s.b_minus.re) / pt.weight());
        if let Ok(data) = lopatinski::lopatinski_data(p, pt, &s) {
            det_worst = det_worst.max(data.det_route_residual);
            m_worst = m_worst.max(data.m_identity_residual);
        }
    }
    let d = p.derived();
    let vieta = {
        let sum = d.s1 + d.s2;
        let prod = d.s1 * d.s2;
        let sum_target = Complex64::new(d.s_sum, 0.0);
        let prod_target = Complex64::new(d.s_prod, 0.0);
        ((sum - sum_target).norm() / sum_target.norm())
            .max((prod - prod_target).norm() / prod_target.norm())
    };
    let passed = det_worst <= IDENTITY_TOL
        && m_worst <= IDENTITY_TOL
        && vieta <= 1e-12
        && min_margin > 0.0
        && c1 > 0.0
        && evaluated > 0;
    let report = IdentitySuiteReport {
        points: evaluated,
        worst_det_route: det_worst,
        worst_m_identity: m_worst,
        vieta_residual: vieta,
        min_root_margin: min_margin,
        empirical_c1: c1,
        tolerance: IDENTITY_TOL,
    };
    run.write_json("identities.json", &report)?;
    Ok((
        passed,
        format!(
            "{evaluated} points, det-route {det_worst:.3e}, frak_m {m_worst:.3e}, \
             Vieta {vieta:.3e}, empirical c1 {c1:.3e}"
        ),
    ))
}

fn suite_lopatinski(
    run: &mut Run,
    p: &ValidatedParams,
    grid: &ScanGrid,
) -> Result<(bool, String), Failure> {
    let rep = lopatinski::scan_lower_bound(p, grid);
    let homogeneity = homogeneity_probe(p, grid);
    let constants = lopatinski::empirical_regime_constants(p, grid.eps);
    let passed = rep.infimum > 0.0
        && rep.refinement_drift < DRIFT_TOL
        && homogeneity <= IDENTITY_TOL;
    let detail = format!(
        "infimum {:.6e} over {} points, drift {:.2}%, homogeneity {:.2e}",
        rep.infimum,
        rep.n_points,
        100.0 * rep.refinement_drift,
        homogeneity
    );
    #[derive(Serialize)]
    struct LopatinskiSuiteReport {
        report: lopatinski::LowerBoundReport,
        homogeneity_max: f64,
        empirical_constants: lopatinski::RegimeConstantsReport,
    }
    run.write_json(
        "lopatinski.json",
        &LopatinskiSuiteReport {
            report: rep,
            homogeneity_max: homogeneity,
            empirical_constants: constants,
        },
    )?;
    Ok((passed, detail))
}

fn suite_kinetic(
    run: &mut Run,
    p: &ValidatedParams,
    grid: &ScanGrid,
) -> Result<(bool, String), Failure> {
    match lopatinski::scan_kinetic_bound(p, grid) {
        Ok(rep) => {
            let omega3_ok =
                p.derived().omega3 == 0.0 || rep.omega3_limit_deviation <= OMEGA3_TOL;
            let passed =
                rep.infimum > 0.0 && rep.refinement_drift < DRIFT_TOL && omega3_ok;
            let detail = format!(
                "lambda0 = {:.3e}, infimum {:.6e}, drift {:.2}%, omega3 \
                 deviation {:.3e}",
                rep.lambda0,
                rep.infimum,
                100.0 * rep.refinement_drift,
                rep.omega3_limit_deviation
            );
            run.write_json("kinetic.json", &rep)?;
            Ok((passed, detail))
        }
        Err(e) => Ok((false, format!("{e}"))),
    }
}

fn suite_multipliers(
    run: &mut Run,
    p: &ValidatedParams,
    grid: &ScanGrid,
) -> Result<(bool, String), Failure> {
    let claims = multipliers::standard_claims(p.dim());
    let reports: Vec<multipliers::ClassEstimateReport> = claims
        .par_iter()
        .map(|claim| multipliers::class_estimate(p, claim, grid))
        .collect();
    let n_bounded = reports.iter().filter(|r| r.bounded).count();
    let passed = n_bounded == reports.len();
    let mut detail = format!("{n_bounded}/{} claims refinement-stable", reports.len());
    if let Some(bad) = reports.iter().find(|r| !r.bounded) {
        let _ = write!(detail, " (first failure: {})", bad.claim.target);
    }
    run.write_json("multipliers.json", &reports)?;
    Ok((passed, detail))
}

#[derive(Serialize)]
struct OracleSuiteReport {
    comparisons: Vec<oracle::OracleComparison>,
    convergence: Vec<oracle::ConvergenceRow>,
    worst_rel: f64,
    tolerance: f64,
}

fn suite_oracle(
    run: &mut Run,
    p: &ValidatedParams,
    eps: f64,
    seed: u64,
    points: usize,
    n: usize,
) -> Result<(bool, String), Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0rac1e_u64);
    let cc = CollocationConfig {
        n,
        ..CollocationConfig::default()
    };
    let mut comparisons = Vec::new();
    let mut worst = 0.0f64;
    let mut first_case: Option<(SpectralPoint, BoundaryData)> = None;
    for i in 0..points {
        // Moderate magnitudes keep the truncated domain well conditioned;
        // regime coverage comes from the ratio of the two magnitudes.
        let (pt, data, _sol) = loop {
            let pt = sample_sector_point(&mut rng, p.dim(), eps, (1e-1, 1e1), (1e-1, 1e1));
            let data = sample_boundary_data(&mut rng, p.dim(), i % 2 == 0);
            if let Ok(sol) = mode_solver::solve_mode(p, &pt, &data) {
                break (pt, data, sol);
            }
        };
        let cmp = oracle::compare(p, &pt, &data, &cc).map_err(runtime_failure)?;
        worst = worst.max(cmp.max_rel);
        if first_case.is_none() {
            first_case = Some((pt, data));
        }
        comparisons.push(cmp);
    }
    let (pt, data) = first_case.expect("at least one oracle point");
    let convergence = oracle::convergence(p, &pt, &data, &[12, 24, n.max(48)])
        .map_err(runtime_failure)?;
    let spectral = convergence.windows(2).all(|w| {
        w[1].max_rel <= w[0].max_rel / CONVERGENCE_RATIO || w[1].max_rel <= 1e-9
    });
    let passed = worst <= ORACLE_TOL && spectral;
    let detail = format!(
        "{points} points, worst disagreement {worst:.3e} (tol {ORACLE_TOL:.1e}), \
         convergence {}",
        convergence
            .iter()
            .map(|r| format!("{}:{:.1e}", r.n, r.max_rel))
            .collect::<Vec<_>>()
            .join(" -> ")
    );
    run.write_json(
        "oracle.json",
        &OracleSuiteReport {
            comparisons,
            convergence,
            worst_rel: worst,
            tolerance: ORACLE_TOL,
        },
    )?;
    Ok((passed, detail))
}

#[derive(Serialize)]
struct ExtensionSuiteReport {
    coefficients: Vec<(i64, i64)>,
    moment_identities_exact: bool,
    cubic_worst: f64,
    generic_worst_k2: f64,
    generic_worst_k3: f64,
}

/// One-sided 4th-order finite-difference jets of an extended profile above
/// and below 0; returns the worst relative mismatch for derivative `k`.
fn extension_mismatch(f: &dyn Fn(f64) -> Complex64, h: f64, k: usize) -> f64 {
    // Order-4 one-sided stencils for derivatives 1..3.
    let stencils: [&[f64]; 3] = [
        &[-25.0 / 12.0, 4.0, -3.0, 4.0 / 3.0, -1.0 / 4.0],
        &[15.0 / 4.0, -77.0 / 6.0, 107.0 / 6.0, -13.0, 61.0 / 12.0, -5.0 / 6.0],
        &[-49.0 / 8.0, 29.0, -461.0 / 8.0, 62.0, -307.0 / 8.0, 13.0, -15.0 / 8.0],
    ];
    let stencil = stencils[k - 1];
    let scale = h.powi(k as i32);
    let above: Complex64 = stencil
        .iter()
        .enumerate()
        .map(|(i, &c)| c * extend_profile(f, i as f64 * h))
        .sum::<Complex64>()
        / scale;
    let below: Complex64 = stencil
        .iter()
        .enumerate()
        .map(|(i, &c)| c * extend_profile(f, -(i as f64) * h))
        .sum::<Complex64>()
        / scale
        * if k % 2 == 1 { -1.0 } else { 1.0 };
    (above - below).norm() / above.norm().max(below.norm()).max(1e-300)
}

fn suite_extension(run: &mut Run) -> Result<(bool, String), Failure> {
    let coeffs = extension_coefficients_exact();
    let expected = [(10i64, 1i64), (-20, 1), (15, 1), (-4, 1)];
    let coeffs_ok = coeffs == expected;
    // Moment identities sum_j a_j (-j)^k = 1 in integer arithmetic.
    let moments_ok = (0..4).all(|k| {
        let s: i64 = coeffs
            .iter()
            .enumerate()
            .map(|(j, &(num, den))| {
                assert_eq!(den, 1, "integral solution expected");
                num * (-((j + 1) as i64)).pow(k)
            })
            .sum();
        s == 1
    });
    // Cubic profile: order-4 one-sided stencils are exact on cubics, so the
    // only error is rounding — this certifies the moment identities through
    // the extension code path.
    let cubic = |x: f64| -> Complex64 {
        Complex64::new(0.8, -0.3)
            + Complex64::new(0.25, 0.1) * x
            + Complex64::new(-0.125, 0.05) * x * x
            + Complex64::new(0.0625, -0.02) * x * x * x
    };
    let cubic_worst = (1..=3)
        .map(|k| extension_mismatch(&cubic, 0.25, k))
        .fold(0.0f64, f64::max);
    // Gentle generic profile: k = 1, 2 reach 1e-8; the f64 floor for
    // third-derivative one-sided stencils is ~1e-6 at any step size.
    let generic = |x: f64| -> Complex64 {
        (Complex64::new(-0.15, 0.1) * x).exp() * Complex64::new(1.0 + 0.05 * x, 0.1)
    };
    let g1 = extension_mismatch(&generic, 1e-2, 1);
    let g2 = extension_mismatch(&generic, 1e-2, 2);
    let g3 = extension_mismatch(&generic, 1e-2, 3);
    let passed = coeffs_ok
        && moments_ok
        && cubic_worst <= 1e-8
        && g1 <= 1e-8
        && g2 <= 1e-8
        && g3 <= 1e-4;
    let report = ExtensionSuiteReport {
        coefficients: coeffs.to_vec(),
        moment_identities_exact: moments_ok,
        cubic_worst,
        generic_worst_k2: g1.max(g2),
        generic_worst_k3: g3,
    };
    run.write_json("extension.json", &report)?;
    Ok((
        passed,
        format!(
            "a = (10, -20, 15, -4) exact; C3 mismatch cubic {cubic_worst:.2e}, \
             generic {:.2e}/{g3:.2e}",
            g1.max(g2)
        ),
    ))
}

fn suite_kernel(
    run: &mut Run,
    raw: &PhysicalParams,
    n_lambdas: usize,
    n_radii: usize,
) -> Result<(bool, String), Failure> {
    // Kernel reconstruction is planar; certify builds the planar twin of
    // the configured parameter set.
    let mut planar = *raw;
    planar.dim = 2;
    let p = validate_params(&planar).map_err(config_failure)?;
    let lambdas = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.5, 0.8),
        Complex64::new(2.0, -1.0),
    ];
    let mut cfg = KernelProbeConfig::default();
    cfg.n_radii = n_radii;
    let mut reports = Vec::new();
    for &lambda in lambdas.iter().take(n_lambdas) {
        reports.push(
            multipliers::kernel_decay_probe(
                &p,
                KernelKind::K0,
                KernelSymbol::QPlusNn1,
                lambda,
                &cfg,
            )
            .map_err(runtime_failure)?,
        );
    }
    let passed = reports.iter().all(|r| r.sup_finite && r.non_increasing);
    let detail = format!(
        "{} lambda points, outer-decade ratios {}",
        reports.len(),
        reports
            .iter()
            .map(|r| format!("{:.3}", r.outer_decade_ratio))
            .collect::<Vec<_>>()
            .join(", ")
    );
    run.write_json("kernel.json", &reports)?;
    Ok((passed, detail))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variant_names_strip_payloads() {
        #[derive(Debug)]
        #[allow(dead_code)]
        enum Demo {
            EqualDensities(f64),
            Structured { value: f64 },
            Bare,
        }
        assert_eq!(variant_name(&Demo::EqualDensities(2.0)), "EqualDensities");
        assert_eq!(variant_name(&Demo::Structured { value: 1.0 }), "Structured");
        assert_eq!(variant_name(&Demo::Bare), "Bare");
    }

    #[test]
    fn lambda_lists_parse_and_reject() {
        let v = parse_lambda_list("1:0, 0.5:0.8,2:-1").unwrap();
        assert_eq!(v.len(), 3);
        assert_eq!(v[1], Complex64::new(0.5, 0.8));
        assert!(parse_lambda_list("1,2").is_err());
        assert!(parse_lambda_list("a:b").is_err());
    }

    #[test]
    fn claim_slugs_are_filesystem_safe() {
        for (idx, claim) in multipliers::standard_claims(3).iter().enumerate() {
            let slug = claim_slug(idx, claim);
            assert!(
                slug.chars()
                    .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-'),
                "slug {slug:?} contains unsafe characters"
            );
        }
    }
}
