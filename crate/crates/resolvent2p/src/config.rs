//! Flat, sectioned configuration for the companion binary.
//!
//! The format is deliberately small: `[section]` headers group `key = value`
//! lines, `#` or `;` starts a full-line comment, and values are free text
//! until end of line. Every value can be overridden from the command line
//! with `--set SECTION.KEY=VALUE`, and the fully resolved configuration is
//! echoed (canonically ordered) into each run manifest so a run can be
//! reproduced from its artifacts alone.
//!
//! Unknown sections and keys are preserved rather than rejected: each
//! command reads the keys it documents and ignores the rest, so one config
//! file can drive several commands.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::params::PhysicalParams;

/// Why a configuration could not be parsed or interpreted.
#[derive(Debug, Error)]
pub enum ConfigError {
    /// A line is neither a section header, a comment, nor `key = value`.
    #[error("malformed config line {line}: {text:?}")]
    Malformed {
        /// 1-based line number.
        line: usize,
        /// The offending text.
        text: String,
    },
    /// A `--set` override is not of the form `SECTION.KEY=VALUE`.
    #[error("malformed override {text:?} (expected SECTION.KEY=VALUE)")]
    MalformedOverride {
        /// The offending argument.
        text: String,
    },
    /// A value failed to parse as the requested type.
    #[error("bad value for [{section}] {key}: {value:?} is not a {ty}")]
    BadValue {
        /// Section of the offending key.
        section: String,
        /// The key.
        key: String,
        /// The raw value.
        value: String,
        /// The expected type.
        ty: &'static str,
    },
    /// The config file could not be read.
    #[error("cannot read config {path}: {source}")]
    Io {
        /// The path that failed.
        path: PathBuf,
        /// The underlying error.
        #[source]
        source: std::io::Error,
    },
}

/// A parsed configuration: ordered sections of ordered `key = value` pairs.
#[derive(Debug, Clone, Default)]
pub struct Config {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl Config {
    /// Parses configuration text.
    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        let mut cfg = Config::default();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                section = name.trim().to_ascii_lowercase();
                cfg.sections.entry(section.clone()).or_default();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Malformed {
                    line: idx + 1,
                    text: raw.to_string(),
                });
            };
            if section.is_empty() {
                return Err(ConfigError::Malformed {
                    line: idx + 1,
                    text: raw.to_string(),
                });
            }
            cfg.set(&section, key.trim(), value.trim());
        }
        Ok(cfg)
    }

    /// Reads and parses a config file.
    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Config::parse(&text)
    }

    /// Applies one `SECTION.KEY=VALUE` command-line override.
    pub fn apply_override(&mut self, spec: &str) -> Result<(), ConfigError> {
        let bad = || ConfigError::MalformedOverride { text: spec.to_string() };
        let (path, value) = spec.split_once('=').ok_or_else(bad)?;
        let (section, key) = path.split_once('.').ok_or_else(bad)?;
        let (section, key) = (section.trim(), key.trim());
        if section.is_empty() || key.is_empty() {
            return Err(bad());
        }
        self.set(section, key, value.trim());
        Ok(())
    }

    /// Sets one value.
    pub fn set(&mut self, section: &str, key: &str, value: &str) {
        self.sections
            .entry(section.to_ascii_lowercase())
            .or_default()
            .insert(key.to_ascii_lowercase().to_string(), value.to_string());
    }

    /// Looks up one raw value.
    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections
            .get(&section.to_ascii_lowercase())
            .and_then(|s| s.get(&key.to_ascii_lowercase()))
            .map(String::as_str)
    }

    /// String value with a default.
    pub fn str_or(&self, section: &str, key: &str, default: &str) -> String {
        self.get(section, key).unwrap_or(default).to_string()
    }

    /// `f64` value with a default; present-but-unparsable is an error.
    pub fn f64_or(&self, section: &str, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.get(section, key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| self.bad(section, key, v, "float")),
        }
    }

    /// `usize` value with a default; present-but-unparsable is an error.
    pub fn usize_or(
        &self,
        section: &str,
        key: &str,
        default: usize,
    ) -> Result<usize, ConfigError> {
        match self.get(section, key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| self.bad(section, key, v, "integer")),
        }
    }

    /// Comma-separated `f64` list with a default.
    pub fn f64_list_or(
        &self,
        section: &str,
        key: &str,
        default: &[f64],
    ) -> Result<Vec<f64>, ConfigError> {
        match self.get(section, key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse()
                        .map_err(|_| self.bad(section, key, v, "float list"))
                })
                .collect(),
        }
    }

    fn bad(&self, section: &str, key: &str, value: &str, ty: &'static str) -> ConfigError {
        ConfigError::BadValue {
            section: section.to_string(),
            key: key.to_string(),
            value: value.to_string(),
            ty,
        }
    }

    /// The canonical text form: sections and keys sorted, one `key = value`
    /// per line. This is what gets hashed into run-directory names and
    /// echoed into manifests, so equal configurations hash equally no
    /// matter how they were written or overridden.
    pub fn canonical_string(&self) -> String {
        let mut out = String::new();
        for (name, entries) in &self.sections {
            if entries.is_empty() {
                continue;
            }
            out.push('[');
            out.push_str(name);
            out.push_str("]\n");
            for (k, v) in entries {
                out.push_str(k);
                out.push_str(" = ");
                out.push_str(v);
                out.push('\n');
            }
            out.push('\n');
        }
        out
    }

    /// The physical parameters from `[params]`, with the documented default
    /// set filling any gaps. Validation (positivity, distinct densities,
    /// the viscosity threshold) happens separately in `params`.
    pub fn physical_params(&self) -> Result<PhysicalParams, ConfigError> {
        Ok(PhysicalParams {
            dim: self.usize_or("params", "dim", 3)?,
            rho_plus: self.f64_or("params", "rho_plus", 1.4)?,
            mu_plus: self.f64_or("params", "mu_plus", 1.5)?,
            nu_plus: self.f64_or("params", "nu_plus", 2.0)?,
            kappa_plus: self.f64_or("params", "kappa_plus", 4.0 / 3.0)?,
            rho_minus: self.f64_or("params", "rho_minus", 2.0)?,
            mu_minus: self.f64_or("params", "mu_minus", 1.25)?,
            sigma: self.f64_or("params", "sigma", 0.3)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_comments_and_values() {
        let cfg = Config::parse(
            "# leading comment\n\
             [Params]\n\
             rho_plus = 1.1\n\
             ; another comment\n\
             dim = 2\n\
             [scan]\n\
             preset = deep\n",
        )
        .unwrap();
        assert_eq!(cfg.get("params", "rho_plus"), Some("1.1"));
        assert_eq!(cfg.get("params", "dim"), Some("2"));
        assert_eq!(cfg.get("scan", "preset"), Some("deep"));
        assert_eq!(cfg.get("scan", "missing"), None);
    }

    #[test]
    fn rejects_malformed_lines_and_orphan_keys() {
        let err = Config::parse("[a]\nnot a pair\n").unwrap_err();
        assert!(matches!(err, ConfigError::Malformed { line: 2, .. }), "{err}");
        let err = Config::parse("key = before any section\n").unwrap_err();
        assert!(matches!(err, ConfigError::Malformed { line: 1, .. }), "{err}");
    }

    #[test]
    fn overrides_follow_the_section_key_value_shape() {
        let mut cfg = Config::default();
        cfg.apply_override("params.rho_plus=2.5").unwrap();
        assert_eq!(cfg.get("params", "rho_plus"), Some("2.5"));
        cfg.apply_override("scan.preset = smoke").unwrap();
        assert_eq!(cfg.get("scan", "preset"), Some("smoke"));
        for bad in ["no_equals", "nodot=1", ".key=1", "sec.=1"] {
            assert!(
                matches!(
                    cfg.apply_override(bad),
                    Err(ConfigError::MalformedOverride { .. })
                ),
                "{bad:?} should be rejected"
            );
        }
    }

    #[test]
    fn typed_getters_default_and_reject() {
        let mut cfg = Config::default();
        cfg.set("solve", "samples", "128");
        cfg.set("solve", "lambda_re", "0.75");
        cfg.set("solve", "stations", "0.5, 0.0, -0.25");
        cfg.set("solve", "bogus", "xyz");
        assert_eq!(cfg.usize_or("solve", "samples", 64).unwrap(), 128);
        assert_eq!(cfg.usize_or("solve", "absent", 64).unwrap(), 64);
        assert_eq!(cfg.f64_or("solve", "lambda_re", 1.0).unwrap(), 0.75);
        assert_eq!(
            cfg.f64_list_or("solve", "stations", &[]).unwrap(),
            vec![0.5, 0.0, -0.25]
        );
        assert!(matches!(
            cfg.f64_or("solve", "bogus", 1.0),
            Err(ConfigError::BadValue { .. })
        ));
    }

    #[test]
    fn canonical_string_is_order_insensitive() {
        let a = Config::parse("[b]\ny = 2\nx = 1\n[a]\nk = v\n").unwrap();
        let b = Config::parse("[a]\nk = v\n[b]\nx = 1\ny = 2\n").unwrap();
        assert_eq!(a.canonical_string(), b.canonical_string());
        assert_eq!(
            a.canonical_string(),
            "[a]\nk = v\n\n[b]\nx = 1\ny = 2\n\n"
        );
    }

    #[test]
    fn default_params_are_the_documented_main_set() {
        let p = Config::default().physical_params().unwrap();
        assert_eq!(p.dim, 3);
        assert_eq!(p.rho_plus, 1.4);
        assert_eq!(p.kappa_plus, 4.0 / 3.0);
        assert_eq!(p.sigma, 0.3);
        // Overridden values flow through.
        let mut cfg = Config::default();
        cfg.apply_override("params.sigma=0").unwrap();
        assert_eq!(cfg.physical_params().unwrap().sigma, 0.0);
    }
}
