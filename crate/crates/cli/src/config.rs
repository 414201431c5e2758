//! Experiment configuration: a single JSON document whose fields mirror the
//! command-line flags (`n_d` in JSON is `--n-d` on the command line). Flags
//! override values read from the file.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Result};
use clap::Args;
use serde::{Deserialize, Serialize};
use torusct::TorusError;

macro_rules! config {
    ($( $(#[$meta:meta])* $field:ident : $ty:ty ),* $(,)?) => {
        #[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct ExperimentConfig {
            $( $(#[$meta])* #[serde(default, skip_serializing_if = "Option::is_none")] pub $field: Option<$ty>, )*
        }

        impl ExperimentConfig {
            /// Field-wise merge; values set in `self` win.
            pub fn or(self, base: ExperimentConfig) -> ExperimentConfig {
                ExperimentConfig { $( $field: self.$field.or(base.$field), )* }
            }
        }
    };
}

config! {
    /// Phantom name: flag, shepp-logan, gaussian or constant.
    #[arg(long)]
    name: String,
    /// Phantom rotation about (0.5, 0.5), in degrees.
    #[arg(long, allow_negative_numbers = true)]
    theta: f64,
    /// Phantom grid size.
    #[arg(long)]
    n: usize,
    /// Forward model: A1, A2, AT2, or radon (writes a parallel-beam sinogram).
    #[arg(long)]
    model: String,
    /// Absolute tolerance of the A2 quadrature.
    #[arg(long)]
    tol: f64,
    /// Rays per projection angle for radon sinograms.
    #[arg(long)]
    rays: usize,
    /// Parallel-beam sinogram read by the AT2 model.
    #[arg(long)]
    sinogram: PathBuf,
    /// Direction radius for forward runs, coefficient radius otherwise.
    #[arg(long)]
    r: f64,
    /// Samples per direction profile.
    #[arg(long = "n-d")]
    n_d: usize,
    /// Sampling rule: left or mid.
    #[arg(long)]
    rule: String,
    /// Standard deviation of the additive Gaussian noise.
    #[arg(long)]
    sigma: f64,
    /// Noise (or trial) seed.
    #[arg(long)]
    seed: u64,
    /// Tikhonov parameter alpha.
    #[arg(long)]
    alpha: f64,
    /// Sobolev index of the filter.
    #[arg(long)]
    s: f64,
    /// Evaluation grid size.
    #[arg(long = "n-eval")]
    n_eval: usize,
    /// Accept DFT indices that alias with the sample count.
    #[arg(long = "allow-aliasing", num_args = 0..=1, default_missing_value = "true")]
    allow_aliasing: bool,
    /// Input file of the command.
    #[arg(long)]
    input: PathBuf,
    /// Output file of the command.
    #[arg(long)]
    out: PathBuf,
    /// Optional image output (.pgm or .csv) of the reconstruction.
    #[arg(long)]
    image: PathBuf,
    /// Coefficient table (CSV with JSON sidecar).
    #[arg(long)]
    table: PathBuf,
    /// Reference image (.pgm or .csv); a phantom spec is used when absent.
    #[arg(long)]
    reference: PathBuf,
    /// Error norm: 1, 2 or inf.
    #[arg(long)]
    p: String,
    /// Restrict errors to the support of the reference.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    mask: bool,
    /// Metric: error or cutoff.
    #[arg(long)]
    metric: String,
    /// Extra smoothness delta of the bound.
    #[arg(long)]
    delta: f64,
    /// Noise level epsilon of the bound.
    #[arg(long)]
    eps: f64,
    /// Norm of f in H^(r + delta) for the bound.
    #[arg(long)]
    fnorm: f64,
    /// Sobolev index of the noise for strategy checks.
    #[arg(long)]
    t: f64,
    /// Run this many random strategy checks instead of evaluating the bound.
    #[arg(long)]
    trials: usize,
    /// Print only the number of directions.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    count: bool,
    /// Print the projection angle of every direction as JSON.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    angles: bool,
    /// Comma-separated coefficient tables to average.
    #[arg(long, value_delimiter = ',')]
    tables: Vec<PathBuf>,
    /// Comma-separated rotation angles in degrees, one per table.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    thetas: Vec<f64>,
}

impl ExperimentConfig {
    /// Reads a configuration file and overlays the command-line values.
    pub fn resolve(flags: ExperimentConfig, file: Option<&Path>) -> Result<ExperimentConfig> {
        let Some(path) = file else { return Ok(flags) };
        let text = std::fs::read_to_string(path)
            .map_err(|source| TorusError::Io { path: path.to_path_buf(), source })?;
        let base: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| anyhow!("invalid config {}: {e}", path.display()))?;
        Ok(flags.or(base))
    }
}

/// Unwraps a required field, naming the flag when it is missing.
pub fn required<T: Clone>(value: &Option<T>, flag: &str) -> Result<T> {
    match value {
        Some(v) => Ok(v.clone()),
        None => bail!("missing required field --{flag}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let flags = ExperimentConfig { r: Some(3.0), ..Default::default() };
        let file = ExperimentConfig { r: Some(50.0), n_d: Some(128), ..Default::default() };
        let merged = flags.or(file);
        assert_eq!(merged.r, Some(3.0));
        assert_eq!(merged.n_d, Some(128));
    }

    #[test]
    fn unknown_json_fields_are_rejected() {
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"r": 2, "bogus": 1}"#).is_err());
        let c: ExperimentConfig = serde_json::from_str(r#"{"r": 2, "n_d": 16, "rule": "mid"}"#).unwrap();
        assert_eq!(c.n_d, Some(16));
    }

    #[test]
    fn missing_fields_are_named() {
        let err = required::<f64>(&None, "sinogram").unwrap_err().to_string();
        assert!(err.contains("--sinogram"));
    }
}
