use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use serde::{Deserialize, Serialize};

use qsw_core::discrimination::{optimal_bound, Bound, DiscriminationTask};
use qsw_core::dynamics::trace_residual;
use qsw_core::optimizer::sweep as run_sweep;
use qsw_core::schemes::param_count;
use qsw_core::{SchemeId, SweepRecord};

use crate::config::ResolvedRun;
use crate::plot::render_sweep_svg;
use crate::report::{bounds_csv, format_sig, method_name, sweep_csv, thetas_json};
use crate::CliError;

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(path)
}

fn compute_bound(run: &ResolvedRun) -> Result<Bound, CliError> {
    optimal_bound(&run.ensemble).map_err(|e| match e {
        qsw_core::Error::UnsupportedEnsemble(msg) => CliError::Config(format!(
            "no closed-form bound for this ensemble ({msg}); supported: two states (Helstrom), \
             equal-prior commuting states, or equal-prior states with an optimal square-root measurement"
        )),
        other => CliError::Core(other),
    })
}

#[derive(Debug, Clone)]
pub struct BoundsOutput {
    pub bound: Bound,
    pub csv_path: PathBuf,
}

impl BoundsOutput {
    pub fn summary(&self) -> String {
        format!(
            "bound = {} (method: {}; {})",
            format_sig(self.bound.value),
            method_name(&self.bound),
            self.bound.method.formula()
        )
    }
}

pub fn bounds(run: &ResolvedRun, out_dir: &Path) -> Result<BoundsOutput, CliError> {
    let bound = compute_bound(run)?;
    let csv = bounds_csv(
        &run.config.ensemble.label(),
        run.ensemble.len(),
        run.ensemble.dim(),
        &bound,
    );
    let csv_path = write_file(out_dir, &run.config.output.bounds_csv, &csv)?;
    Ok(BoundsOutput { bound, csv_path })
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub records: Vec<SweepRecord>,
    pub bound: Option<f64>,
    pub csv_path: PathBuf,
    pub svg_path: PathBuf,
    pub thetas_path: PathBuf,
}

/// Runs the grid, writes CSV, SVG and the optimized parameters. Fails with
/// [`CliError::SweepFailed`] only if no grid point succeeded; the files are
/// written either way.
pub fn sweep(run: &ResolvedRun, out_dir: &Path) -> Result<SweepOutput, CliError> {
    let bound = match compute_bound(run) {
        Ok(b) => Some(b.value),
        Err(e) => {
            warn!("plotting without a bound line: {e}");
            None
        }
    };
    info!(
        "sweeping {} schemes x {} p x {} tau on {}",
        run.config.schemes.len(),
        run.options.p_grid.len(),
        run.options.tau_grid.len(),
        run.topology.label()
    );
    let records = run_sweep(
        &run.config.schemes,
        &run.topology,
        &run.ensemble,
        run.config.gamma_s,
        &run.options,
    )?;

    let out = &run.config.output;
    let csv_path = write_file(out_dir, &out.sweep_csv, &sweep_csv(&records))?;
    let thetas_path = write_file(out_dir, &out.sweep_thetas, &thetas_json(&records))?;
    let tau_plot = run
        .options
        .tau_grid
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let title = format!(
        "{} network, {}, tau = {}",
        run.topology.label(),
        run.config.ensemble.label(),
        tau_plot
    );
    let svg = render_sweep_svg(&records, &run.config.schemes, tau_plot, bound, &title);
    let svg_path = write_file(out_dir, &out.sweep_svg, &svg)?;

    if let Some(first) = records.iter().find(|r| r.is_ok()) {
        info!(
            "first successful point: scheme {} pc {}",
            first.scheme, first.pc
        );
    } else {
        let msg = records
            .first()
            .and_then(|r| r.error.clone())
            .unwrap_or_else(|| "empty grid".into());
        return Err(CliError::SweepFailed(msg));
    }
    Ok(SweepOutput {
        records,
        bound,
        csv_path,
        svg_path,
        thetas_path,
    })
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ThetaFile {
    Plain(Vec<f64>),
    Wrapped { theta: Vec<f64> },
}

/// Reads a parameter vector: either a bare JSON array or an object with a
/// `theta` array.
pub fn load_theta(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let parsed: ThetaFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("invalid theta file {}: {e}", path.display())))?;
    Ok(match parsed {
        ThetaFile::Plain(v) | ThetaFile::Wrapped { theta: v } => v,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    pub index: usize,
    pub prior: f64,
    pub sink_populations: Vec<f64>,
    pub correct_sink_population: f64,
    pub non_sink_residual: f64,
    pub trace_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationReport {
    pub network: String,
    pub scheme: SchemeId,
    pub p: f64,
    pub tau: f64,
    pub gamma_s: f64,
    pub pc: f64,
    pub max_trace_residual: f64,
    pub hypotheses: Vec<HypothesisReport>,
}

pub fn simulate(
    run: &ResolvedRun,
    scheme: SchemeId,
    theta: &[f64],
    p: f64,
    tau: f64,
) -> Result<SimulationReport, CliError> {
    let expected = param_count(scheme, &run.topology);
    if theta.len() != expected {
        return Err(CliError::Config(format!(
            "scheme {scheme} on {} needs {expected} parameters, got {}",
            run.topology.label(),
            theta.len()
        )));
    }
    let task = DiscriminationTask::new(
        run.topology.clone(),
        run.ensemble.clone(),
        p,
        tau,
        run.config.gamma_s,
    )
    .map_err(|e| CliError::Config(e.to_string()))?;
    let outcomes = task.outcomes(scheme, theta)?;
    let pc = task.prob_correct(scheme, theta)?;
    let hypotheses: Vec<HypothesisReport> = outcomes
        .iter()
        .zip(run.ensemble.priors())
        .enumerate()
        .map(|(n, (o, &prior))| HypothesisReport {
            index: n,
            prior,
            sink_populations: o.sinks.populations.clone(),
            correct_sink_population: o.sinks.populations[n],
            non_sink_residual: o.sinks.residual,
            trace_residual: trace_residual(&o.state),
        })
        .collect();
    let max_trace_residual = hypotheses
        .iter()
        .map(|h| h.trace_residual)
        .fold(0.0, f64::max);
    Ok(SimulationReport {
        network: run.topology.label(),
        scheme,
        p,
        tau,
        gamma_s: run.config.gamma_s,
        pc,
        max_trace_residual,
        hypotheses,
    })
}

pub fn simulation_json(report: &SimulationReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

pub fn write_simulation(report: &SimulationReport, out_dir: &Path) -> Result<PathBuf, CliError> {
    write_file(out_dir, "simulate.json", &simulation_json(report))
}
