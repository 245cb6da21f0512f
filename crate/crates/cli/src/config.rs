//! Run configuration assembled from an optional config file and the flags,
//! flags taking precedence.

use crate::error::{CliError, Result};
use bgsemi::bernstein::{parse_config_table, FamilyConfig};
use bgsemi::BernsteinFunction;
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

const FAMILY_KEYS: [&str; 15] =
    ["family", "alpha", "m", "a", "b", "lambda", "k", "d", "v", "weight", "rate", "atoms", "parts", "outer", "inner"];

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_COUNT: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ContourChoice {
    Fixed,
    Saddle,
}

/// Flags shared by every subcommand. Unset flags are omitted when the set is
/// turned into a table, so config-file values survive.
#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct Flags {
    /// Config file: TOML, or the one-line `family = "log", lambda = 1.0` form
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// identity, constant, power_shifted, gauss_laguerre, gamma_ratio, log, bounded_ratio, triplet
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Killing rate (triplet) or the constant value
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    /// Drift (triplet)
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    /// Built-in Lévy density: exp_over_y, exponential, tempered_stable
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,

    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    /// Derivative order
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nmax: Option<usize>,
    /// Single grid point; overrides the grid range
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xmin: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xmax: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[arg(long, global = true, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spacing: Option<Spacing>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Contour for density inversion
    #[arg(long, global = true, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contour: Option<ContourChoice>,
    /// Abscissa of a fixed contour
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    /// Output file; standard output when absent
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Settings {
    t: Option<f64>,
    n: Option<u32>,
    nmax: Option<usize>,
    x: Option<f64>,
    xmin: Option<f64>,
    xmax: Option<f64>,
    count: Option<usize>,
    spacing: Option<Spacing>,
    tol: Option<f64>,
    contour: Option<ContourChoice>,
    c: Option<f64>,
    out: Option<PathBuf>,
    format: Option<Format>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    family: Option<FamilyConfig>,
    settings: Settings,
}

impl RunConfig {
    pub fn from_flags(flags: &Flags) -> Result<Self> {
        let mut table = match &flags.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
                parse_config_table(&text)?
            }
            None => toml::Table::new(),
        };
        let overrides = toml::Table::try_from(flags).map_err(|e| CliError::config(e.to_string()))?;
        table.extend(overrides);
        Self::from_table(table)
    }

    fn from_table(mut table: toml::Table) -> Result<Self> {
        let mut fam = toml::Table::new();
        for key in FAMILY_KEYS {
            if let Some(v) = table.remove(key) {
                fam.insert(key.to_string(), v);
            }
        }
        let family = if fam.is_empty() {
            None
        } else {
            Some(fam.try_into::<FamilyConfig>().map_err(|e| CliError::config(format!("family: {}", e.message())))?)
        };
        let settings: Settings = table.try_into().map_err(|e| CliError::config(e.message().to_string()))?;
        let cfg = RunConfig { family, settings };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if let Some(tol) = self.settings.tol {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(CliError::config("tol must be > 0"));
            }
        }
        if self.settings.count == Some(0) {
            return Err(CliError::config("count must be >= 1"));
        }
        if let Some(f) = &self.family {
            f.build()?;
        }
        Ok(())
    }

    pub fn family(&self) -> Result<&FamilyConfig> {
        self.family.as_ref().ok_or_else(|| CliError::config("no family given (use --family or --config)"))
    }

    pub fn phi(&self) -> Result<BernsteinFunction> {
        Ok(self.family()?.build()?)
    }

    pub fn t_or(&self, default: f64) -> f64 {
        self.settings.t.unwrap_or(default)
    }

    pub fn require_t(&self) -> Result<f64> {
        self.settings.t.ok_or_else(|| CliError::config("--t is required"))
    }

    pub fn n(&self) -> u32 {
        self.settings.n.unwrap_or(0)
    }

    pub fn nmax(&self) -> Option<usize> {
        self.settings.nmax
    }

    pub fn tol(&self) -> f64 {
        self.settings.tol.unwrap_or(DEFAULT_TOL)
    }

    pub fn contour(&self) -> Option<ContourChoice> {
        self.settings.contour
    }

    pub fn c(&self) -> Option<f64> {
        self.settings.c
    }

    pub fn out(&self) -> Option<&Path> {
        self.settings.out.as_deref()
    }

    pub fn format(&self) -> Option<Format> {
        self.settings.format
    }

    /// The x-grid: a single `x`, or `count` points from `xmin` to `xmax`.
    pub fn grid(&self) -> Result<Vec<f64>> {
        let s = &self.settings;
        if let Some(x) = s.x {
            return Ok(vec![x]);
        }
        let (lo, hi) = match (s.xmin, s.xmax) {
            (Some(lo), Some(hi)) => (lo, hi),
            _ => return Err(CliError::config("need --x or both --xmin and --xmax")),
        };
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(CliError::config("need finite xmin <= xmax"));
        }
        let count = s.count.unwrap_or(DEFAULT_COUNT);
        let spacing = s.spacing.unwrap_or(Spacing::Linear);
        if spacing == Spacing::Log && lo <= 0.0 {
            return Err(CliError::config("log spacing needs xmin > 0"));
        }
        if count == 1 {
            return Ok(vec![lo]);
        }
        let step = |i: usize| i as f64 / (count - 1) as f64;
        Ok((0..count)
            .map(|i| match spacing {
                Spacing::Linear => lo + (hi - lo) * step(i),
                Spacing::Log => (lo.ln() + (hi.ln() - lo.ln()) * step(i)).exp(),
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(text: &str) -> toml::Table {
        parse_config_table(text).unwrap()
    }

    #[test]
    fn one_line_config() {
        let cfg = RunConfig::from_table(table(r#"family = "power_shifted", alpha = 0.5, m = 1, t = 2, x = 3"#)).unwrap();
        assert_eq!(cfg.family().unwrap(), &FamilyConfig::PowerShifted { alpha: 0.5, m: 1.0 });
        assert_eq!(cfg.t_or(1.0), 2.0);
        assert_eq!(cfg.grid().unwrap(), vec![3.0]);
    }

    #[test]
    fn grid_spacing() {
        let cfg = RunConfig::from_table(table("xmin = 1\nxmax = 100\ncount = 3\nspacing = \"log\"\n")).unwrap();
        let g = cfg.grid().unwrap();
        assert_eq!(g.len(), 3);
        assert!((g[1] - 10.0).abs() < 1e-12);
        let lin = RunConfig::from_table(table("xmin = 0\nxmax = 1\ncount = 5\n")).unwrap();
        assert_eq!(lin.grid().unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn rejects_bad_settings() {
        assert!(RunConfig::from_table(table("tol = 0")).is_err());
        assert!(RunConfig::from_table(table("count = 0")).is_err());
        assert!(RunConfig::from_table(table("bogus = 1")).is_err());
        assert!(RunConfig::from_table(table(r#"family = "log", lambda = -1"#)).is_err());
        assert!(RunConfig::from_table(table("")).unwrap().phi().is_err());
    }

    #[test]
    fn flags_override_file_values() {
        let flags = Flags { t: Some(3.0), family: Some("identity".into()), ..Flags::default() };
        let mut t = table(r#"family = "log", lambda = 1, t = 1"#);
        t.remove("lambda");
        t.extend(toml::Table::try_from(&flags).unwrap());
        let cfg = RunConfig::from_table(t).unwrap();
        assert_eq!(cfg.t_or(0.0), 3.0);
        assert_eq!(cfg.family().unwrap(), &FamilyConfig::Identity);
    }
}
