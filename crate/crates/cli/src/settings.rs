//! Merging of the flat JSON config file with command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use stargen::models::{ModelId, ModelKind};
use stargen::{Axis, PhaseGrid};

use crate::args::{Common, Format, Indices};
use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    One(String),
    Many(Vec<String>),
}

/// Every key a config file may carry. Flags win over file values.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub model: Option<String>,
    pub hbar: Option<f64>,
    pub mass: Option<f64>,
    pub omega: Option<f64>,
    pub grid: Option<GridSpec>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub tolerance: Option<f64>,
    pub n: Option<u32>,
    pub m: Option<u32>,
    pub r: Option<u32>,
    pub s: Option<i32>,
    pub sprime: Option<i32>,
    pub e: Option<f64>,
    pub eprime: Option<f64>,
    pub suite: Option<String>,
    #[serde(alias = "max-n")]
    pub max_n: Option<u32>,
    pub observable: Option<String>,
    pub t: Option<f64>,
    pub table: Option<PathBuf>,
    pub what: Option<String>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
    }
}

/// Resolved settings shared by every subcommand.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: ModelId,
    /// Axis specs as given, in the order q1..qN, p1..pN.
    pub grid: Vec<String>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub tolerance: Option<f64>,
}

impl RunConfig {
    pub fn resolve(common: &Common, file: &ConfigFile) -> Result<Self, CliError> {
        let name = common.model.clone().or_else(|| file.model.clone()).unwrap_or_else(|| "ho1d".into());
        let kind: ModelKind = name.parse().map_err(|e: stargen::StargenError| CliError::Usage(e.to_string()))?;
        let hbar = common.hbar.or(file.hbar).unwrap_or(1.0);
        let mass = common.mass.or(file.mass).unwrap_or(1.0);
        let omega = common.omega.or(file.omega).unwrap_or(1.0);
        let model = ModelId::new(kind, hbar, mass, omega).map_err(|e| CliError::Usage(e.to_string()))?;
        let grid = if !common.grid.is_empty() {
            common.grid.clone()
        } else {
            match &file.grid {
                Some(GridSpec::One(s)) => vec![s.clone()],
                Some(GridSpec::Many(v)) => v.clone(),
                None => vec![],
            }
        };
        let tolerance = common.tolerance.or(file.tolerance);
        if let Some(t) = tolerance {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Usage(format!("tolerance must be positive, got {t}")));
            }
        }
        Ok(Self {
            model,
            grid,
            output: common.output.clone().or_else(|| file.output.clone()),
            format: common.format.or(file.format),
            tolerance,
        })
    }

    /// The configured grid, or `default` on every axis.
    pub fn phase_grid(&self, default: &str) -> Result<PhaseGrid, CliError> {
        let cfg = self.model.config;
        let n = cfg.dim_n;
        let specs: Vec<String> = match self.grid.len() {
            0 => vec![default.to_string(); 2 * n],
            1 => vec![self.grid[0].clone(); 2 * n],
            k if k == 2 * n => self.grid.clone(),
            k => {
                return Err(CliError::Usage(format!(
                    "model {} needs 1 or {} grid axes, got {k}",
                    self.model.kind,
                    2 * n
                )))
            }
        };
        let user: Vec<Axis> = specs
            .iter()
            .map(|s| Axis::parse(s))
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        // user order is (q, p); internal order is (p, q)
        let axes = user[n..].iter().chain(&user[..n]).copied().collect();
        PhaseGrid::new(cfg, axes).map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn format_or(&self, default: Format) -> Format {
        self.format.or_else(|| format_from_extension(self.output.as_deref())).unwrap_or(default)
    }

    pub fn tolerance_or(&self, default: f64) -> f64 {
        self.tolerance.unwrap_or(default)
    }
}

pub fn format_from_extension(path: Option<&Path>) -> Option<Format> {
    match path?.extension()?.to_str()? {
        "csv" => Some(Format::Csv),
        "json" => Some(Format::Json),
        _ => None,
    }
}

/// Indices with config-file fallbacks.
pub fn merge_indices(flags: &Indices, file: &ConfigFile) -> Indices {
    Indices {
        n: flags.n.or(file.n),
        m: flags.m.or(file.m),
        r: flags.r.or(file.r),
        s: flags.s.or(file.s),
        sprime: flags.sprime.or(file.sprime),
        e: flags.e.or(file.e),
        eprime: flags.eprime.or(file.eprime),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file: ConfigFile =
            serde_json::from_str(r#"{"model": "ho2d", "hbar": 0.5, "grid": "-1:1:0.5", "max-n": 3}"#).unwrap();
        let common = Common { hbar: Some(2.0), ..Common::default() };
        let rc = RunConfig::resolve(&common, &file).unwrap();
        assert_eq!(rc.model.kind, ModelKind::Ho2d);
        assert_eq!(rc.model.config.hbar, 2.0);
        assert_eq!(rc.phase_grid("-3:3:1").unwrap().len(), 5usize.pow(4));
        assert_eq!(file.max_n, Some(3));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<ConfigFile>(r#"{"modle": "ho1d"}"#).is_err());
    }

    #[test]
    fn per_axis_grid_is_reordered() {
        let common = Common { grid: vec!["-1:1:1".into(), "0:4:1".into()], ..Common::default() };
        let rc = RunConfig::resolve(&common, &ConfigFile::default()).unwrap();
        let g = rc.phase_grid("-1:1:1").unwrap();
        // internal order is (p, q)
        assert_eq!(g.axes[0].len(), 5);
        assert_eq!(g.axes[1].len(), 3);
        let bad = Common { grid: vec!["-1:1:1".into(); 3], ..Common::default() };
        assert!(RunConfig::resolve(&bad, &ConfigFile::default()).unwrap().phase_grid("-1:1:1").is_err());
    }
}
