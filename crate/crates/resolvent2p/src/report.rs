//! Reproducible run artifacts: manifests, run directories, and writers.
//!
//! Every command of the companion binary deposits its outputs in a fresh run
//! directory named `<timestamp>-<config hash>` and finishes by writing a
//! `manifest.json` that echoes the tool version, the fully resolved
//! configuration, the physical parameters, per-suite verdicts, and the path
//! of every data file the run emitted. Reruns with the same configuration
//! produce identical numerical content, so the manifest plus the config hash
//! identify a run's artifacts completely.
//!
//! Floating-point values in CSV artifacts are printed with 17 significant
//! digits ([`format_float`]), which round-trips `f64` exactly; JSON artifacts
//! go through `serde_json`, which also round-trips.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::PhysicalParams;

/// The crate version, echoed into every manifest.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Errors from artifact emission.
#[derive(Debug, Error)]
pub enum ReportError {
    /// Filesystem failure while creating or writing an artifact.
    #[error("io failure on {path}: {source}")]
    Io {
        /// The path being created or written.
        path: PathBuf,
        /// The underlying error.
        #[source]
        source: std::io::Error,
    },
    /// A value could not be serialized to JSON.
    #[error("json serialization failure: {0}")]
    Json(#[from] serde_json::Error),
}

/// Formats a float with 17 significant digits, enough to round-trip `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// 64-bit FNV-1a hash of the canonical configuration text, as fixed-width
/// hex. Stable across runs and platforms; used to name run directories.
pub fn config_hash(canonical: &str) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in canonical.as_bytes() {
        h ^= u64::from(*byte);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}

/// The current UTC time as `YYYYMMDDTHHMMSSZ`.
///
/// Computed from the Unix epoch with the standard civil-from-days algorithm,
/// so the binary needs no clock or timezone dependencies.
pub fn timestamp_utc() -> String {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format_timestamp(secs)
}

/// Formats a Unix timestamp (seconds) as `YYYYMMDDTHHMMSSZ`.
pub fn format_timestamp(unix_secs: u64) -> String {
    let days = (unix_secs / 86_400) as i64;
    let rem = unix_secs % 86_400;
    let (hh, mm, ss) = (rem / 3600, (rem / 60) % 60, rem % 60);
    // Civil-from-days: shift the epoch to 0000-03-01 so leap days land at
    // the end of the 400-year era.
    let z = days + 719_468;
    let era = if z >= 0 { z } else { z - 146_096 } / 146_097;
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let year = yoe + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let day = doy - (153 * mp + 2) / 5 + 1;
    let month = if mp < 10 { mp + 3 } else { mp - 9 };
    let year = if month <= 2 { year + 1 } else { year };
    format!("{year:04}{month:02}{day:02}T{hh:02}{mm:02}{ss:02}Z")
}

/// Creates a fresh run directory `<out>/<timestamp>-<hash8>`.
///
/// Run directories are append-only: if the name is already taken (two runs
/// in the same second with the same configuration) a `-N` suffix
/// disambiguates rather than reusing the directory.
pub fn create_run_dir(out: &Path, canonical_config: &str) -> Result<PathBuf, ReportError> {
    let stamp = timestamp_utc();
    let hash8 = &config_hash(canonical_config)[..8];
    let base = format!("{stamp}-{hash8}");
    for attempt in 0..1000 {
        let name = if attempt == 0 {
            base.clone()
        } else {
            format!("{base}-{attempt}")
        };
        let dir = out.join(&name);
        match std::fs::create_dir_all(out)
            .and_then(|()| std::fs::create_dir(&dir))
        {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(ReportError::Io { path: dir, source: e }),
        }
    }
    Err(ReportError::Io {
        path: out.join(base),
        source: std::io::Error::new(
            std::io::ErrorKind::AlreadyExists,
            "could not find a fresh run directory name",
        ),
    })
}

/// The self-describing record written at the end of every run.
///
/// Each emitted data file is referenced by exactly one manifest (the one in
/// its own run directory), so artifacts are never orphaned.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    /// Crate version that produced the run.
    pub tool_version: String,
    /// UTC creation time, `YYYYMMDDTHHMMSSZ`.
    pub created_utc: String,
    /// The subcommand that ran.
    pub command: String,
    /// FNV-1a hash of `resolved_config`.
    pub config_hash: String,
    /// The fully resolved configuration text (defaults + file + overrides).
    pub resolved_config: String,
    /// Echo of the validated physical parameters.
    pub params: PhysicalParams,
    /// Per-suite (or per-stage) verdicts: `"pass"` / `"fail"` / info text.
    pub verdicts: BTreeMap<String, String>,
    /// Run-relative paths of every data file this run emitted.
    pub artifacts: Vec<String>,
}

impl RunManifest {
    /// Starts a manifest with empty verdicts and artifacts.
    pub fn new(command: &str, resolved_config: &str, params: PhysicalParams) -> Self {
        RunManifest {
            tool_version: TOOL_VERSION.to_string(),
            created_utc: timestamp_utc(),
            command: command.to_string(),
            config_hash: config_hash(resolved_config),
            resolved_config: resolved_config.to_string(),
            params,
            verdicts: BTreeMap::new(),
            artifacts: Vec::new(),
        }
    }

    /// Records a verdict line for one suite or stage.
    pub fn verdict(&mut self, name: &str, value: impl Into<String>) {
        self.verdicts.insert(name.to_string(), value.into());
    }

    /// Registers an artifact path (relative to the run directory).
    pub fn artifact(&mut self, rel_path: &str) {
        self.artifacts.push(rel_path.to_string());
    }

    /// Writes the manifest as `manifest.json` inside `dir`.
    pub fn write(&self, dir: &Path) -> Result<PathBuf, ReportError> {
        let path = dir.join("manifest.json");
        write_json(&path, self)?;
        Ok(path)
    }
}

/// Writes any serializable value as pretty-printed JSON.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ReportError> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text.as_bytes()).map_err(|e| ReportError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Writes a CSV artifact from preformatted cells.
///
/// The caller formats every numeric cell (via [`format_float`] for floats)
/// so the 17-significant-digit contract is visible at the call site.
pub fn write_csv(
    path: &Path,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<(), ReportError> {
    let wrap = |e: csv::Error| -> ReportError {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => ReportError::Io { path: path.to_path_buf(), source: io },
            other => ReportError::Io {
                path: path.to_path_buf(),
                source: std::io::Error::new(
                    std::io::ErrorKind::InvalidData,
                    format!("csv failure: {other:?}"),
                ),
            },
        }
    };
    let file = std::fs::File::create(path).map_err(|e| ReportError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    w.write_record(header).map_err(wrap)?;
    for row in rows {
        w.write_record(row).map_err(wrap)?;
    }
    w.flush().map_err(|e| ReportError::Io { path: path.to_path_buf(), source: e })?;
    Ok(())
}

/// Writes a plain text artifact (used for PASS/FAIL certificate echoes).
pub fn write_text(path: &Path, text: &str) -> Result<(), ReportError> {
    let file = std::fs::File::create(path).map_err(|e| ReportError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut w = std::io::BufWriter::new(file);
    w.write_all(text.as_bytes()).map_err(|e| ReportError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips_exactly() {
        for &x in &[
            0.1,
            -3.0,
            std::f64::consts::PI,
            1.0 / 3.0,
            6.02e23,
            -1.7976931348623157e308,
            5e-324,
            0.0,
        ] {
            let s = format_float(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "round-trip of {x} via {s}");
        }
    }

    #[test]
    fn fnv_hash_matches_reference_vectors() {
        // Standard FNV-1a 64 test vectors.
        assert_eq!(config_hash(""), "cbf29ce484222325");
        assert_eq!(config_hash("a"), "af63dc4c8601ec8c");
        assert_eq!(config_hash("foobar"), "85944171f73967e8");
    }

    #[test]
    fn timestamps_match_known_dates() {
        assert_eq!(format_timestamp(0), "19700101T000000Z");
        // 2000-03-01 00:00:00 UTC.
        assert_eq!(format_timestamp(951_868_800), "20000301T000000Z");
        // 2020-02-29 23:59:59 UTC (leap day).
        assert_eq!(format_timestamp(1_583_020_799), "20200229T235959Z");
        // 2038-01-19 03:14:07 UTC (the 32-bit rollover second).
        assert_eq!(format_timestamp(2_147_483_647), "20380119T031407Z");
    }

    #[test]
    fn run_dirs_never_collide() {
        let tmp = std::env::temp_dir().join(format!(
            "r2p-report-test-{}-{}",
            std::process::id(),
            timestamp_utc()
        ));
        let d1 = create_run_dir(&tmp, "config a").unwrap();
        let d2 = create_run_dir(&tmp, "config a").unwrap();
        assert_ne!(d1, d2, "same-second, same-config runs must not collide");
        assert!(d1.is_dir() && d2.is_dir());
        std::fs::remove_dir_all(&tmp).unwrap();
    }

    #[test]
    fn manifest_round_trips_through_json() {
        let params = PhysicalParams {
            dim: 2,
            rho_plus: 1.4,
            mu_plus: 1.5,
            nu_plus: 2.0,
            kappa_plus: 4.0 / 3.0,
            rho_minus: 2.0,
            mu_minus: 1.25,
            sigma: 0.3,
        };
        let mut m = RunManifest::new("certify", "[params]\nrho_plus = 1.4\n", params);
        m.verdict("residuals", "pass");
        m.artifact("certificate.json");
        let text = serde_json::to_string(&m).unwrap();
        let back: RunManifest = serde_json::from_str(&text).unwrap();
        assert_eq!(back.command, "certify");
        assert_eq!(back.verdicts["residuals"], "pass");
        assert_eq!(back.artifacts, vec!["certificate.json".to_string()]);
        assert_eq!(back.config_hash, m.config_hash);
    }
}
