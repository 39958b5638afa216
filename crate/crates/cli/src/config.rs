use std::path::Path;

use serde::{Deserialize, Serialize};

use qsw_core::discrimination::{EnsembleSpec, StateEnsemble};
use qsw_core::topology::{LayerSpec, NetworkTopology};
use qsw_core::{OptimizeOptions, SchemeId};

use crate::CliError;

/// A run configuration, read from a single JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub topology: LayerSpec,
    /// `"paper-binary"`, `"paper-4ary"` or an inline ensemble document.
    pub ensemble: EnsembleSpec,
    #[serde(default = "all_schemes")]
    pub schemes: Vec<SchemeId>,
    #[serde(default = "default_p_grid")]
    pub p_grid: Vec<f64>,
    #[serde(default = "default_tau_grid")]
    pub tau_grid: Vec<f64>,
    #[serde(default)]
    pub optimizer: OptimizerSection,
    #[serde(default = "default_gamma_s")]
    pub gamma_s: f64,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerSection {
    pub n_restarts: usize,
    pub max_iters: usize,
    pub ftol: f64,
    pub seed: u64,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        let d = OptimizeOptions::default();
        Self {
            n_restarts: d.n_restarts,
            max_iters: d.max_iters,
            ftol: d.ftol,
            seed: d.seed,
        }
    }
}

/// File names, relative to `--out-dir`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub bounds_csv: String,
    pub sweep_csv: String,
    pub sweep_svg: String,
    pub sweep_thetas: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            bounds_csv: "bounds.csv".into(),
            sweep_csv: "sweep.csv".into(),
            sweep_svg: "sweep.svg".into(),
            sweep_thetas: "sweep_thetas.json".into(),
        }
    }
}

fn all_schemes() -> Vec<SchemeId> {
    SchemeId::ALL.to_vec()
}

fn default_p_grid() -> Vec<f64> {
    OptimizeOptions::default().p_grid
}

fn default_tau_grid() -> Vec<f64> {
    OptimizeOptions::default().tau_grid
}

fn default_gamma_s() -> f64 {
    1.0
}

/// Everything a command needs, resolved and validated.
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    pub config: RunConfig,
    pub topology: NetworkTopology,
    pub ensemble: StateEnsemble,
    pub options: OptimizeOptions,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn options(&self) -> OptimizeOptions {
        OptimizeOptions {
            n_restarts: self.optimizer.n_restarts,
            max_iters: self.optimizer.max_iters,
            ftol: self.optimizer.ftol,
            seed: self.optimizer.seed,
            p_grid: self.p_grid.clone(),
            tau_grid: self.tau_grid.clone(),
        }
    }

    pub fn resolve(self, seed_override: Option<u64>) -> Result<ResolvedRun, CliError> {
        let config_err = |e: qsw_core::Error| CliError::Config(e.to_string());
        let topology = self.topology.build().map_err(config_err)?;
        let ensemble = self.ensemble.resolve().map_err(config_err)?;
        if ensemble.dim() != topology.n_input() {
            return Err(CliError::Config(format!(
                "ensemble dimension {} does not match the {} input nodes",
                ensemble.dim(),
                topology.n_input()
            )));
        }
        if ensemble.len() > topology.n_output() {
            return Err(CliError::Config(format!(
                "{} hypotheses but only {} sinks",
                ensemble.len(),
                topology.n_output()
            )));
        }
        if !(self.gamma_s > 0.0 && self.gamma_s.is_finite()) {
            return Err(CliError::Config(format!(
                "gamma_s must be positive, got {}",
                self.gamma_s
            )));
        }
        if self.schemes.is_empty() {
            return Err(CliError::Config("no schemes selected".into()));
        }
        let mut options = self.options();
        if let Some(seed) = seed_override {
            options.seed = seed;
        }
        options.validate().map_err(config_err)?;
        Ok(ResolvedRun {
            config: self,
            topology,
            ensemble,
            options,
        })
    }
}
