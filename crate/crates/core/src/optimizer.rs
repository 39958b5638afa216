//! Maximisation of the probability of correct detection and the `(p, tau)`
//! sweep.
//!
//! Continuous schemes use multi-start Nelder-Mead on `-P_c`; scheme (b) is
//! searched over bit vectors, exhaustively when the edge count allows it.

use log::{debug, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discrimination::{DiscriminationTask, StateEnsemble};
use crate::error::{Error, Result};
use crate::schemes::{bits_to_theta, param_count, SchemeId};
use crate::topology::NetworkTopology;

/// Largest edge count searched exhaustively by scheme (b).
pub const EXHAUSTIVE_EDGE_LIMIT: usize = 20;

/// Initial simplex edge length.
const SIMPLEX_STEP: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizeOptions {
    pub n_restarts: usize,
    pub max_iters: usize,
    pub ftol: f64,
    pub seed: u64,
    pub p_grid: Vec<f64>,
    pub tau_grid: Vec<f64>,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            n_restarts: 16,
            max_iters: 2000,
            ftol: 1e-7,
            seed: 0,
            p_grid: (0..=10).map(|k| k as f64 / 10.0).collect(),
            tau_grid: vec![1.0, 3.0, 10.0, 30.0, 100.0],
        }
    }
}

impl OptimizeOptions {
    pub fn validate(&self) -> Result<()> {
        let sorted = |g: &[f64]| g.windows(2).all(|w| w[0] < w[1]);
        if self.p_grid.is_empty() || self.tau_grid.is_empty() {
            return Err(Error::InvalidArgument(
                "p and tau grids must be non-empty".into(),
            ));
        }
        if !sorted(&self.p_grid) || !sorted(&self.tau_grid) {
            return Err(Error::InvalidArgument(
                "grids must be strictly ascending".into(),
            ));
        }
        if self.p_grid.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidArgument("p grid must lie in [0, 1]".into()));
        }
        if self.tau_grid.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return Err(Error::InvalidArgument(
                "tau grid must be finite and non-negative".into(),
            ));
        }
        if self.ftol.is_nan() || self.ftol <= 0.0 {
            return Err(Error::InvalidArgument("ftol must be positive".into()));
        }
        if self.n_restarts == 0 {
            return Err(Error::InvalidArgument("need at least one restart".into()));
        }
        Ok(())
    }
}

/// Outcome of one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub scheme: SchemeId,
    pub p: f64,
    pub tau: f64,
    /// NaN when the grid point failed.
    pub pc: f64,
    pub theta: Vec<f64>,
    pub restarts_used: usize,
    pub evaluations: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SweepRecord {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub iterations: usize,
}

/// Minimises `f` with Nelder-Mead, using dimension-adaptive coefficients.
///
/// Stops after `max_iters` iterations or once the spread of function values
/// over the simplex drops to `ftol`. A converged simplex is rebuilt around
/// its best vertex while iterations remain and the last rebuild still
/// improved the minimum by more than `ftol`.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], max_iters: usize, ftol: f64) -> Result<SimplexResult>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let n = x0.len();
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64], evaluations: &mut usize| -> Result<f64> {
        *evaluations += 1;
        let v = f(x)?;
        if v.is_nan() {
            return Err(Error::Optimization("objective returned NaN".into()));
        }
        Ok(v)
    };

    let f0 = eval(x0, &mut evaluations)?;
    if max_iters == 0 || n == 0 {
        return Ok(SimplexResult {
            x: x0.to_vec(),
            value: f0,
            evaluations,
            iterations: 0,
        });
    }

    let nf = n as f64;
    let (alpha, beta, gamma, delta) = if n >= 3 {
        (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf)
    } else {
        (1.0, 2.0, 0.5, 0.5)
    };

    let build = |centre: &[f64],
                 f_centre: f64,
                 evaluations: &mut usize,
                 eval: &mut dyn FnMut(&[f64], &mut usize) -> Result<f64>|
     -> Result<Vec<(Vec<f64>, f64)>> {
        let mut simplex = vec![(centre.to_vec(), f_centre)];
        for i in 0..n {
            let mut x = centre.to_vec();
            x[i] += SIMPLEX_STEP;
            let v = eval(&x, evaluations)?;
            simplex.push((x, v));
        }
        Ok(simplex)
    };

    let mut simplex = build(x0, f0, &mut evaluations, &mut eval)?;
    let mut iterations = 0usize;
    let mut last_rebuild_best = f0;
    let mut centroid = vec![0.0; n];
    let point = |from: &[f64], towards: &[f64], t: f64| -> Vec<f64> {
        from.iter()
            .zip(towards)
            .map(|(c, w)| c + t * (w - c))
            .collect()
    };

    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        let converged = (worst - best).abs() <= ftol;
        if iterations >= max_iters {
            break;
        }
        if converged {
            if last_rebuild_best - best > ftol {
                last_rebuild_best = best;
                let (x, v) = simplex[0].clone();
                simplex = build(&x, v, &mut evaluations, &mut eval)?;
                continue;
            }
            break;
        }
        iterations += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / nf;
            }
        }
        let worst_x = simplex[n].0.clone();
        let second = simplex[n - 1].1;

        let xr = point(&centroid, &worst_x, -alpha);
        let fr = eval(&xr, &mut evaluations)?;
        if fr < best {
            let xe = point(&centroid, &worst_x, -alpha * beta);
            let fe = eval(&xe, &mut evaluations)?;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < second {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < worst {
            let xc = point(&centroid, &xr, gamma);
            let fc = eval(&xc, &mut evaluations)?;
            (xc, fc)
        } else {
            let xc = point(&centroid, &worst_x, gamma);
            let fc = eval(&xc, &mut evaluations)?;
            (xc, fc)
        };
        if fc < worst.min(fr) {
            simplex[n] = (xc, fc);
            continue;
        }
        let anchor = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x = point(&anchor, &vertex.0, delta);
            let v = eval(&x, &mut evaluations)?;
            *vertex = (x, v);
        }
    }
    let (x, value) = simplex.swap_remove(0);
    Ok(SimplexResult {
        x,
        value,
        evaluations,
        iterations,
    })
}

fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(restart as u64))
}

fn failed_record(scheme: SchemeId, p: f64, tau: f64, seed: u64, error: &Error) -> SweepRecord {
    SweepRecord {
        scheme,
        p,
        tau,
        pc: f64::NAN,
        theta: Vec::new(),
        restarts_used: 0,
        evaluations: 0,
        seed,
        error: Some(error.to_string()),
    }
}

/// Multi-start Nelder-Mead for schemes (a), (c) and (d).
pub fn maximize_continuous(
    scheme: SchemeId,
    task: &DiscriminationTask,
    opts: &OptimizeOptions,
) -> Result<SweepRecord> {
    maximize_continuous_from(scheme, task, opts, None)
}

/// As [`maximize_continuous`], with `warm_start` run as one extra restart
/// after the random ones. A warm start of the wrong length is ignored.
pub fn maximize_continuous_from(
    scheme: SchemeId,
    task: &DiscriminationTask,
    opts: &OptimizeOptions,
    warm_start: Option<&[f64]>,
) -> Result<SweepRecord> {
    if !scheme.is_continuous() {
        return Err(Error::InvalidArgument(
            "scheme (b) is binary; use maximize_binary".into(),
        ));
    }
    if opts.n_restarts == 0 {
        return Err(Error::InvalidArgument("need at least one restart".into()));
    }
    let dim = param_count(scheme, task.topology());
    let warm = warm_start.filter(|w| w.len() == dim);
    let n_runs = opts.n_restarts + usize::from(warm.is_some());
    let runs: Vec<Result<SimplexResult>> = (0..n_runs)
        .into_par_iter()
        .map(|r| {
            let x0: Vec<f64> = match warm {
                Some(w) if r == opts.n_restarts => w.to_vec(),
                _ => {
                    let mut rng = restart_rng(opts.seed, r);
                    (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect()
                }
            };
            nelder_mead(
                |theta| task.prob_correct(scheme, theta).map(|pc| -pc),
                &x0,
                opts.max_iters,
                opts.ftol,
            )
        })
        .collect();

    let mut best: Option<SimplexResult> = None;
    let mut evaluations = 0;
    let mut restarts_used = 0;
    let mut last_error = None;
    for (r, run) in runs.into_iter().enumerate() {
        match run {
            Ok(res) => {
                restarts_used += 1;
                evaluations += res.evaluations;
                debug!(
                    "scheme {scheme} p={} tau={} restart {r}: pc={}",
                    task.p(),
                    task.tau(),
                    -res.value
                );
                if best.as_ref().is_none_or(|b| res.value < b.value) {
                    best = Some(res);
                }
            }
            Err(e) => {
                warn!(
                    "scheme {scheme} p={} tau={} restart {r} discarded: {e}",
                    task.p(),
                    task.tau()
                );
                last_error = Some(e);
            }
        }
    }
    let best = best.ok_or_else(|| {
        Error::Optimization(format!(
            "all {n_runs} restarts failed; last error: {}",
            last_error.map_or_else(String::new, |e| e.to_string())
        ))
    })?;
    Ok(SweepRecord {
        scheme,
        p: task.p(),
        tau: task.tau(),
        pc: -best.value,
        theta: best.x,
        restarts_used,
        evaluations,
        seed: opts.seed,
        error: None,
    })
}

/// Search strategy for scheme (b).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinarySearch {
    /// Exhaustive up to [`EXHAUSTIVE_EDGE_LIMIT`] edges, hill climbing beyond.
    Auto,
    Exhaustive,
    HillClimb,
}

pub fn maximize_binary(task: &DiscriminationTask, opts: &OptimizeOptions) -> Result<SweepRecord> {
    maximize_binary_with(task, opts, BinarySearch::Auto)
}

fn bits_of(mask: u64, e: usize) -> Vec<bool> {
    (0..e).map(|k| mask >> k & 1 == 1).collect()
}

pub fn maximize_binary_with(
    task: &DiscriminationTask,
    opts: &OptimizeOptions,
    strategy: BinarySearch,
) -> Result<SweepRecord> {
    maximize_binary_from(task, opts, strategy, None)
}

/// As [`maximize_binary_with`]; hill climbing also starts once from the
/// 0/1 vector `warm_start`. Exhaustive search ignores it.
pub fn maximize_binary_from(
    task: &DiscriminationTask,
    opts: &OptimizeOptions,
    strategy: BinarySearch,
    warm_start: Option<&[f64]>,
) -> Result<SweepRecord> {
    let e = task.topology().n_edges();
    let eval = |bits: &[bool]| task.prob_correct(SchemeId::B, &bits_to_theta(bits));
    let record = |bits: &[bool], pc: f64, evaluations: usize, restarts_used: usize| SweepRecord {
        scheme: SchemeId::B,
        p: task.p(),
        tau: task.tau(),
        pc,
        theta: bits_to_theta(bits),
        restarts_used,
        evaluations,
        seed: opts.seed,
        error: None,
    };

    if e == 0 {
        return Ok(record(&[], eval(&[])?, 1, 1));
    }
    let exhaustive = match strategy {
        BinarySearch::Auto => e <= EXHAUSTIVE_EDGE_LIMIT,
        BinarySearch::Exhaustive => {
            if e > 40 {
                return Err(Error::InvalidArgument(format!(
                    "{e} edges are too many for exhaustive search"
                )));
            }
            true
        }
        BinarySearch::HillClimb => false,
    };

    if exhaustive {
        let total = 1u64 << e;
        // ties resolve to the smallest mask, independent of scheduling
        let (mask, pc) = (0..total)
            .into_par_iter()
            .map(|mask| eval(&bits_of(mask, e)).map(|pc| (mask, pc)))
            .try_reduce(
                || (u64::MAX, f64::NEG_INFINITY),
                |a, b| {
                    Ok(if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
                        b
                    } else {
                        a
                    })
                },
            )?;
        return Ok(record(&bits_of(mask, e), pc, total as usize, 1));
    }

    let warm: Option<Vec<bool>> = warm_start
        .filter(|w| w.len() == e && w.iter().all(|&x| x == 0.0 || x == 1.0))
        .map(|w| w.iter().map(|&x| x == 1.0).collect());
    let n_runs = opts.n_restarts + usize::from(warm.is_some());
    let runs: Vec<Result<(Vec<bool>, f64, usize)>> = (0..n_runs)
        .into_par_iter()
        .map(|r| {
            let start = match &warm {
                Some(w) if r == opts.n_restarts => w.clone(),
                _ if r == 0 => vec![true; e],
                _ => {
                    let mut rng = restart_rng(opts.seed, r);
                    (0..e).map(|_| rng.random_bool(0.5)).collect()
                }
            };
            hill_climb(&eval, start, opts.max_iters)
        })
        .collect();

    let mut best: Option<(Vec<bool>, f64)> = None;
    let mut evaluations = 0;
    let mut restarts_used = 0;
    let mut last_error = None;
    for (r, run) in runs.into_iter().enumerate() {
        match run {
            Ok((bits, pc, evals)) => {
                restarts_used += 1;
                evaluations += evals;
                if best.as_ref().is_none_or(|b| pc > b.1) {
                    best = Some((bits, pc));
                }
            }
            Err(err) => {
                warn!("scheme b restart {r} discarded: {err}");
                last_error = Some(err);
            }
        }
    }
    let (bits, pc) = best.ok_or_else(|| {
        Error::Optimization(format!(
            "all restarts failed; last error: {}",
            last_error.map_or_else(String::new, |e| e.to_string())
        ))
    })?;
    Ok(record(&bits, pc, evaluations, restarts_used))
}

/// Steepest-ascent single-bit-flip search from `start`.
fn hill_climb<F>(eval: &F, start: Vec<bool>, max_iters: usize) -> Result<(Vec<bool>, f64, usize)>
where
    F: Fn(&[bool]) -> Result<f64>,
{
    let mut current = start;
    let mut value = eval(&current)?;
    let mut evaluations = 1;
    for _ in 0..max_iters {
        let mut best_flip: Option<(usize, f64)> = None;
        for k in 0..current.len() {
            current[k] = !current[k];
            let v = eval(&current)?;
            current[k] = !current[k];
            evaluations += 1;
            if v > value && best_flip.is_none_or(|(_, b)| v > b) {
                best_flip = Some((k, v));
            }
        }
        match best_flip {
            Some((k, v)) => {
                current[k] = !current[k];
                value = v;
            }
            None => break,
        }
    }
    Ok((current, value, evaluations))
}

/// Dispatches to the continuous or binary optimizer.
pub fn maximize(
    scheme: SchemeId,
    task: &DiscriminationTask,
    opts: &OptimizeOptions,
) -> Result<SweepRecord> {
    maximize_from(scheme, task, opts, None)
}

pub fn maximize_from(
    scheme: SchemeId,
    task: &DiscriminationTask,
    opts: &OptimizeOptions,
    warm_start: Option<&[f64]>,
) -> Result<SweepRecord> {
    if scheme.is_continuous() {
        maximize_continuous_from(scheme, task, opts, warm_start)
    } else {
        maximize_binary_from(task, opts, BinarySearch::Auto, warm_start)
    }
}

/// One optimized record per `(scheme, p, tau)`, ordered by scheme, then `p`,
/// then `tau`. Failed grid points become NaN rows carrying the error.
///
/// For each `(scheme, p)` the tau grid is walked in ascending order and the
/// best parameters found so far seed an extra restart at the next tau. Sink
/// populations never decrease in tau for fixed parameters, so the swept
/// `P_c` is non-decreasing along the tau grid.
pub fn sweep(
    schemes: &[SchemeId],
    topo: &NetworkTopology,
    ens: &StateEnsemble,
    gamma_s: f64,
    opts: &OptimizeOptions,
) -> Result<Vec<SweepRecord>> {
    opts.validate()?;
    let mut lines = Vec::new();
    for &scheme in schemes {
        for &p in &opts.p_grid {
            lines.push((scheme, p));
        }
    }
    let records: Vec<Vec<SweepRecord>> = lines
        .into_par_iter()
        .map(|(scheme, p)| {
            let mut warm: Option<Vec<f64>> = None;
            let mut out = Vec::with_capacity(opts.tau_grid.len());
            for &tau in &opts.tau_grid {
                let rec = DiscriminationTask::new(topo.clone(), ens.clone(), p, tau, gamma_s)
                    .and_then(|task| maximize_from(scheme, &task, opts, warm.as_deref()))
                    .unwrap_or_else(|e| {
                        warn!("grid point scheme {scheme} p={p} tau={tau} failed: {e}");
                        failed_record(scheme, p, tau, opts.seed, &e)
                    });
                if rec.is_ok() {
                    warm = Some(rec.theta.clone());
                }
                out.push(rec);
            }
            out
        })
        .collect();
    Ok(records.into_iter().flatten().collect())
}
