//! Numerical parameters, settable from a TOML file and overridden by flags.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Every field is optional so that a config file and the command line can be
/// layered; commands fill in their own defaults.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Params {
    /// Inverse temperature of the heat bath.
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    /// Inverse temperature of the charge (spin) bath.
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Swap energy for a single protocol run.
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    #[arg(long, global = true)]
    pub eps_min: Option<f64>,
    #[arg(long, global = true)]
    pub eps_max: Option<f64>,
    #[arg(long, global = true)]
    pub eps_count: Option<usize>,
    #[arg(long, global = true)]
    pub alpha_min: Option<f64>,
    #[arg(long, global = true)]
    pub alpha_max: Option<f64>,
    #[arg(long, global = true)]
    pub alpha_count: Option<usize>,
    /// Level spacing of the discrete spin bath.
    #[arg(long, global = true)]
    pub hbar: Option<f64>,
    /// Number of increments for the energy raise.
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    #[arg(long, global = true)]
    pub tail_tol: Option<f64>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of random instances for sampled checks.
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Number of copies for passivity checks.
    #[arg(long, global = true)]
    pub copies: Option<usize>,
    /// Disc radius of the approximate pancake map.
    #[arg(long, global = true)]
    pub radius: Option<f64>,
    /// Height of the approximate pancake map.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub z_offset: Option<f64>,
    /// Grid resolution for the complete-positivity boundary scan.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Output file (a directory for `demo`); standard output when absent.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

macro_rules! layer {
    ($top:expr, $base:expr, $($field:ident),*) => {
        Params { $($field: $top.$field.or($base.$field)),* }
    };
}

impl Params {
    /// Values in `self` win over values in `base`.
    pub fn over(self, base: Params) -> Params {
        layer!(
            self,
            base,
            beta,
            alpha,
            eps,
            eps_min,
            eps_max,
            eps_count,
            alpha_min,
            alpha_max,
            alpha_count,
            hbar,
            steps,
            tail_tol,
            tol,
            max_iter,
            seed,
            trials,
            copies,
            radius,
            z_offset,
            grid,
            input,
            output,
            format
        )
    }

    pub fn from_toml(text: &str) -> Result<Params, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> Result<Params, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Params::from_toml(&text).map_err(|e| format!("config {}: {e}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_line_wins() {
        let file = Params::from_toml("beta = 2.0\nalpha = 3.0\neps-count = 7\nformat = \"json\"").unwrap();
        let cli = Params { beta: Some(0.5), ..Params::default() };
        let merged = cli.over(file);
        assert_eq!(merged.beta, Some(0.5));
        assert_eq!(merged.alpha, Some(3.0));
        assert_eq!(merged.eps_count, Some(7));
        assert_eq!(merged.format, Some(Format::Json));
        assert_eq!(merged.seed, None);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = Params::from_toml("betta = 1.0").unwrap_err();
        assert!(err.contains("betta"), "{err}");
    }
}
