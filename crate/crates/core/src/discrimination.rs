//! State ensembles, the network's probability of correct detection, and the
//! optimal discrimination bounds it is compared against.

use std::f64::consts::PI;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::dynamics::{CompactGenerator, SinkReport};
use crate::error::{Error, Result};
use crate::numerics::{
    hermitian_eig, hermitian_eigenvalues, max_abs, trace_norm, trace_of_product, ComplexMatrix,
    DensityMatrix, C64, ONE, ZERO,
};
use crate::schemes::{materialize, SchemeId, WalkParameters};
use crate::topology::NetworkTopology;

/// Slack used for PSD and completeness checks on measurements.
const MEASUREMENT_TOL: f64 = 1e-9;

/// Known states with prior probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct StateEnsemble {
    states: Vec<DensityMatrix>,
    priors: Vec<f64>,
}

impl StateEnsemble {
    pub fn new(states: Vec<DensityMatrix>, priors: Vec<f64>) -> Result<Self> {
        if states.is_empty() || states.len() != priors.len() {
            return Err(Error::InvalidArgument(format!(
                "{} states with {} priors",
                states.len(),
                priors.len()
            )));
        }
        let dim = states[0].dim();
        if let Some(s) = states.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: s.dim(),
            });
        }
        if priors.iter().any(|&p| p.is_nan() || p < 0.0) {
            return Err(Error::InvalidArgument("priors must be non-negative".into()));
        }
        let total: f64 = priors.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "priors sum to {total}, expected 1"
            )));
        }
        Ok(Self { states, priors })
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    fn has_equal_priors(&self) -> bool {
        let p0 = self.priors[0];
        self.priors.iter().all(|&p| (p - p0).abs() <= 1e-12)
    }

    pub fn to_doc(&self) -> EnsembleDoc {
        EnsembleDoc {
            states: self
                .states
                .iter()
                .map(|s| {
                    let m = s.matrix();
                    (0..m.nrows())
                        .map(|i| {
                            (0..m.ncols())
                                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                                .collect()
                        })
                        .collect()
                })
                .collect(),
            priors: self.priors.clone(),
        }
    }
}

/// JSON form of an ensemble: row-major matrices of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleDoc {
    pub states: Vec<Vec<Vec<[f64; 2]>>>,
    pub priors: Vec<f64>,
}

impl EnsembleDoc {
    pub fn to_ensemble(&self) -> Result<StateEnsemble> {
        let mut states = Vec::with_capacity(self.states.len());
        for (k, rows) in self.states.iter().enumerate() {
            let n = rows.len();
            if rows.iter().any(|r| r.len() != n) {
                return Err(Error::InvalidArgument(format!("state {k} is not square")));
            }
            let entries: Vec<C64> = rows
                .iter()
                .flat_map(|r| r.iter().map(|&[re, im]| C64::new(re, im)))
                .collect();
            let m = ComplexMatrix::from_row_slice(n, n, &entries);
            states.push(
                DensityMatrix::new(m)
                    .map_err(|e| Error::InvalidArgument(format!("state {k}: {e}")))?,
            );
        }
        StateEnsemble::new(states, self.priors.clone())
    }
}

/// Either a built-in ensemble name or an inline document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EnsembleSpec {
    Named(String),
    Inline(EnsembleDoc),
}

pub const BUILTIN_BINARY: &str = "paper-binary";
pub const BUILTIN_FOURARY: &str = "paper-4ary";

impl EnsembleSpec {
    pub fn resolve(&self) -> Result<StateEnsemble> {
        match self {
            EnsembleSpec::Named(name) => builtin_ensemble(name),
            EnsembleSpec::Inline(doc) => doc.to_ensemble(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            EnsembleSpec::Named(name) => name.clone(),
            EnsembleSpec::Inline(_) => "inline".into(),
        }
    }
}

pub fn builtin_ensemble(name: &str) -> Result<StateEnsemble> {
    match name {
        BUILTIN_BINARY => Ok(binary_pair_paper()),
        BUILTIN_FOURARY => symmetric_ensemble(4, 0.7, 4),
        other => Err(Error::InvalidArgument(format!(
            "unknown ensemble {other:?}; built-ins are {BUILTIN_BINARY:?} and {BUILTIN_FOURARY:?}"
        ))),
    }
}

/// The pure/mixed qubit pair used with the 2-2-2 network, equal priors.
pub fn binary_pair_paper() -> StateEnsemble {
    let s2 = 2f64.sqrt();
    let rho1 = ComplexMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new((2.0 + s2) / 4.0, 0.0),
            C64::new(0.25, 0.25),
            C64::new(0.25, -0.25),
            C64::new((2.0 - s2) / 4.0, 0.0),
        ],
    );
    let rho2 = ComplexMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(0.68, 0.0),
            C64::new(-0.13, -0.13),
            C64::new(-0.13, 0.13),
            C64::new(0.32, 0.0),
        ],
    );
    StateEnsemble::new(
        vec![
            DensityMatrix::new(rho1).expect("valid state"),
            DensityMatrix::new(rho2).expect("valid state"),
        ],
        vec![0.5, 0.5],
    )
    .expect("valid ensemble")
}

/// Noisy Fourier-basis states `(1-alpha) I/d + alpha |phi_m><phi_m|` with
/// `|phi_m> = sum_k exp(-2 pi i m k / d) / sqrt(d) |k>`, equal priors.
pub fn symmetric_ensemble(n_states: usize, alpha: f64, dim: usize) -> Result<StateEnsemble> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!(
            "alpha = {alpha} outside [0, 1]"
        )));
    }
    if n_states == 0 || dim != n_states {
        return Err(Error::InvalidArgument(format!(
            "need as many states as dimensions (got {n_states} states in dimension {dim})"
        )));
    }
    let norm = 1.0 / (dim as f64).sqrt();
    let mixed = ComplexMatrix::identity(dim, dim).scale((1.0 - alpha) / dim as f64);
    let states = (1..=n_states)
        .map(|m| {
            let phi = DVector::from_iterator(
                dim,
                (1..=dim).map(|k| C64::from_polar(norm, -2.0 * PI * (m * k) as f64 / dim as f64)),
            );
            let rho = &mixed + (&phi * phi.adjoint()).scale(alpha);
            DensityMatrix::new(rho)
        })
        .collect::<Result<Vec<_>>>()?;
    StateEnsemble::new(states, vec![1.0 / n_states as f64; n_states])
}

/// POVM elements, positive and summing to the identity.
#[derive(Debug, Clone)]
pub struct MeasurementSet {
    operators: Vec<ComplexMatrix>,
}

impl MeasurementSet {
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        let Some(first) = operators.first() else {
            return Err(Error::InvalidArgument("empty measurement".into()));
        };
        let d = first.nrows();
        let mut total = ComplexMatrix::zeros(d, d);
        for (k, op) in operators.iter().enumerate() {
            let min = hermitian_eigenvalues(op)?.first().copied().unwrap_or(0.0);
            if min < -MEASUREMENT_TOL {
                return Err(Error::Consistency(format!(
                    "measurement operator {k} has eigenvalue {min:e}"
                )));
            }
            total += op;
        }
        let defect = max_abs(&(total - ComplexMatrix::identity(d, d)));
        if defect > MEASUREMENT_TOL {
            return Err(Error::Consistency(format!(
                "measurement is incomplete (defect {defect:e})"
            )));
        }
        Ok(Self { operators })
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    /// `sum_n p_n tr(Pi_n rho_n)`.
    pub fn success_probability(&self, ens: &StateEnsemble) -> f64 {
        self.operators
            .iter()
            .zip(ens.states().iter().zip(ens.priors()))
            .map(|(pi, (rho, &p))| p * trace_of_product(pi, rho.matrix()).re)
            .sum()
    }

    /// Optimality conditions: `Y = sum p_n Pi_n rho_n` Hermitian and
    /// `Y - p_n rho_n` positive semidefinite for every `n`.
    pub fn is_optimal_for(&self, ens: &StateEnsemble, tol: f64) -> Result<bool> {
        let d = ens.dim();
        let mut y = ComplexMatrix::zeros(d, d);
        for (pi, (rho, &p)) in self
            .operators
            .iter()
            .zip(ens.states().iter().zip(ens.priors()))
        {
            y += (pi * rho.matrix()).scale(p);
        }
        if crate::numerics::hermitian_deviation(&y) > tol {
            return Ok(false);
        }
        let y = (&y + y.adjoint()).scale(0.5);
        for (rho, &p) in ens.states().iter().zip(ens.priors()) {
            let gap = &y - rho.matrix().scale(p);
            let min = hermitian_eigenvalues(&gap)?.first().copied().unwrap_or(0.0);
            if min < -tol {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// `1/2 (1 + || p1 rho1 - (1 - p1) rho2 ||_1)`.
pub fn helstrom_binary(rho1: &DensityMatrix, rho2: &DensityMatrix, p1: f64) -> Result<f64> {
    check_pair(rho1, rho2, p1)?;
    if rho1 == rho2 {
        // guessing the likelier hypothesis is optimal; skip the rounding
        return Ok(p1.max(1.0 - p1));
    }
    let diff = rho1.matrix().scale(p1) - rho2.matrix().scale(1.0 - p1);
    Ok(0.5 * (1.0 + trace_norm(&diff)?))
}

/// `(1 + sqrt(1 - 4 p1 p2 tr(rho1 rho2))) / 2`, valid for pure states only.
pub fn helstrom_pure(rho1: &DensityMatrix, rho2: &DensityMatrix, p1: f64) -> Result<f64> {
    check_pair(rho1, rho2, p1)?;
    for rho in [rho1, rho2] {
        let purity = rho.purity();
        if (purity - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "pure-state formula applied to a state of purity {purity}"
            )));
        }
    }
    let overlap = trace_of_product(rho1.matrix(), rho2.matrix()).re;
    let disc = (1.0 - 4.0 * p1 * (1.0 - p1) * overlap).max(0.0);
    Ok(0.5 * (1.0 + disc.sqrt()))
}

fn check_pair(rho1: &DensityMatrix, rho2: &DensityMatrix, p1: f64) -> Result<()> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho1.dim(),
            got: rho2.dim(),
        });
    }
    if !(0.0..=1.0).contains(&p1) {
        return Err(Error::InvalidArgument(format!("prior {p1} outside [0, 1]")));
    }
    Ok(())
}

/// Best projective measurement over a `grid x grid` mesh of Bloch-sphere
/// directions, plus the two trivial measurements that always answer the
/// same hypothesis. Never exceeds the Helstrom value; approaches it as the mesh
/// is refined.
pub fn brute_force_binary_bound(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    p1: f64,
    grid: usize,
) -> Result<f64> {
    check_pair(rho1, rho2, p1)?;
    if rho1.dim() != 2 {
        return Err(Error::InvalidArgument(
            "Bloch-grid search needs qubit states".into(),
        ));
    }
    let grid = grid.max(1);
    let (r1, r2) = (rho1.matrix(), rho2.matrix());
    let expect = |r: &ComplexMatrix, v: [C64; 2]| -> f64 {
        let mut acc = ZERO;
        for i in 0..2 {
            for j in 0..2 {
                acc += v[i].conj() * r[(i, j)] * v[j];
            }
        }
        acc.re
    };
    let mut best = p1.max(1.0 - p1);
    for a in 0..grid {
        let polar = if grid > 1 {
            PI * a as f64 / (grid - 1) as f64
        } else {
            0.0
        };
        let (s, c) = (0.5 * polar).sin_cos();
        for b in 0..grid {
            let phase = C64::from_polar(1.0, 2.0 * PI * b as f64 / grid as f64);
            let v = [C64::new(c, 0.0), phase * s];
            let v_perp = [-phase.conj() * s, C64::new(c, 0.0)];
            let value = p1 * expect(r1, v) + (1.0 - p1) * expect(r2, v_perp);
            best = best.max(value);
        }
    }
    Ok(best)
}

/// How an optimal bound was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundMethod {
    /// Trace-norm Helstrom formula for two hypotheses.
    Helstrom,
    /// Maximum likelihood in the common eigenbasis of commuting states.
    CommonEigenbasis,
    /// Square-root measurement, certified optimal.
    SquareRoot,
}

impl BoundMethod {
    pub fn formula(self) -> &'static str {
        match self {
            BoundMethod::Helstrom => "1/2 (1 + ||p1 rho1 - p2 rho2||_1)",
            BoundMethod::CommonEigenbasis => {
                "sum_k max_m p_m <v_k|rho_m|v_k> over the common eigenbasis"
            }
            BoundMethod::SquareRoot => {
                "sum_m p_m tr(S^-1/2 p_m rho_m S^-1/2 rho_m), S = sum_m p_m rho_m"
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Bound {
    pub value: f64,
    pub method: BoundMethod,
    pub measurement: Option<MeasurementSet>,
}

/// Optimal success probability for an equal-prior ensemble that is either
/// commuting or admits an optimal square-root measurement.
pub fn symmetric_bound(ens: &StateEnsemble) -> Result<(f64, MeasurementSet, BoundMethod)> {
    if !ens.has_equal_priors() {
        return Err(Error::UnsupportedEnsemble(
            "closed-form bounds need equal priors".into(),
        ));
    }
    if let Some(povm) = common_eigenbasis_measurement(ens)? {
        let value = povm.success_probability(ens);
        return Ok((value, povm, BoundMethod::CommonEigenbasis));
    }
    let povm = square_root_measurement(ens)?;
    if povm.is_optimal_for(ens, 1e-8)? {
        let value = povm.success_probability(ens);
        return Ok((value, povm, BoundMethod::SquareRoot));
    }
    Err(Error::UnsupportedEnsemble(
        "states neither commute nor admit an optimal square-root measurement; \
         use the Helstrom solver for two states or the Bloch-grid search for qubits"
            .into(),
    ))
}

fn common_eigenbasis_measurement(ens: &StateEnsemble) -> Result<Option<MeasurementSet>> {
    let states = ens.states();
    for (a, ra) in states.iter().enumerate() {
        for rb in &states[a + 1..] {
            let comm = ra.matrix() * rb.matrix() - rb.matrix() * ra.matrix();
            if max_abs(&comm) > 1e-9 {
                return Ok(None);
            }
        }
    }
    // a generic combination separates the joint eigenspaces
    let d = ens.dim();
    let mut mix = ComplexMatrix::zeros(d, d);
    for (m, rho) in states.iter().enumerate() {
        let weight = 1.0 + ((m + 1) as f64 * 0.618_033_988_749_895).fract();
        mix += rho.matrix().scale(weight);
    }
    let basis = hermitian_eig(&mix)?.vectors;
    let mut operators = vec![ComplexMatrix::zeros(d, d); ens.len()];
    for k in 0..d {
        let v = basis.column(k);
        let mut best = (0usize, f64::NEG_INFINITY);
        for (m, (rho, &p)) in states.iter().zip(ens.priors()).enumerate() {
            let w = p * (v.adjoint() * rho.matrix() * v)[(0, 0)].re;
            if w > best.1 + 1e-15 {
                best = (m, w);
            }
        }
        operators[best.0] += v * v.adjoint();
    }
    let povm = MeasurementSet::new(operators)?;
    // the basis must actually diagonalise every state
    if !povm.is_optimal_for(ens, 1e-9)? {
        return Ok(None);
    }
    Ok(Some(povm))
}

fn square_root_measurement(ens: &StateEnsemble) -> Result<MeasurementSet> {
    let d = ens.dim();
    let mut s = ComplexMatrix::zeros(d, d);
    for (rho, &p) in ens.states().iter().zip(ens.priors()) {
        s += rho.matrix().scale(p);
    }
    let eig = hermitian_eig(&s)?;
    let mut inv_sqrt = ComplexMatrix::zeros(d, d);
    let mut kernel = ComplexMatrix::zeros(d, d);
    for (k, &lambda) in eig.values.iter().enumerate() {
        let v = eig.vectors.column(k);
        let proj = v * v.adjoint();
        if lambda > 1e-12 {
            inv_sqrt += proj.scale(1.0 / lambda.sqrt());
        } else {
            kernel += proj;
        }
    }
    let mut operators: Vec<ComplexMatrix> = ens
        .states()
        .iter()
        .zip(ens.priors())
        .map(|(rho, &p)| {
            let op = &inv_sqrt * rho.matrix().scale(p) * &inv_sqrt;
            (&op + op.adjoint()).scale(0.5)
        })
        .collect();
    operators[0] += kernel;
    MeasurementSet::new(operators)
}

/// Optimal bound for any supported ensemble: Helstrom for two hypotheses,
/// [`symmetric_bound`] otherwise.
pub fn optimal_bound(ens: &StateEnsemble) -> Result<Bound> {
    if ens.len() == 2 {
        let value = helstrom_binary(&ens.states()[0], &ens.states()[1], ens.priors()[0])?;
        return Ok(Bound {
            value,
            method: BoundMethod::Helstrom,
            measurement: None,
        });
    }
    let (value, measurement, method) = symmetric_bound(ens)?;
    Ok(Bound {
        value,
        method,
        measurement: Some(measurement),
    })
}

/// A fixed discrimination task: network, ensemble, `p`, `tau` and sink rate.
/// Evaluates many parameter vectors against the same initial states.
#[derive(Debug, Clone)]
pub struct DiscriminationTask {
    topo: NetworkTopology,
    ensemble: StateEnsemble,
    p: f64,
    tau: f64,
    gamma_s: f64,
}

/// Per-hypothesis outcome of one evaluation.
#[derive(Debug, Clone)]
pub struct HypothesisOutcome {
    pub sinks: SinkReport,
    pub state: DensityMatrix,
}

impl DiscriminationTask {
    pub fn new(
        topo: NetworkTopology,
        ensemble: StateEnsemble,
        p: f64,
        tau: f64,
        gamma_s: f64,
    ) -> Result<Self> {
        if ensemble.dim() != topo.n_input() {
            return Err(Error::InvalidArgument(format!(
                "ensemble lives in dimension {} but the network has {} input nodes",
                ensemble.dim(),
                topo.n_input()
            )));
        }
        if ensemble.len() > topo.n_output() {
            return Err(Error::InvalidArgument(format!(
                "{} hypotheses need at least as many sinks, network has {}",
                ensemble.len(),
                topo.n_output()
            )));
        }
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "invalid evolution time {tau}"
            )));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("p = {p} outside [0, 1]")));
        }
        Ok(Self {
            topo,
            ensemble,
            p,
            tau,
            gamma_s,
        })
    }

    pub fn topology(&self) -> &NetworkTopology {
        &self.topo
    }

    pub fn ensemble(&self) -> &StateEnsemble {
        &self.ensemble
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn gamma_s(&self) -> f64 {
        self.gamma_s
    }

    fn walk(&self, scheme: SchemeId, theta: &[f64]) -> Result<WalkParameters> {
        WalkParameters::new(
            materialize(scheme, &self.topo, theta)?,
            self.p,
            self.gamma_s,
        )
    }

    /// Propagates every hypothesis and reports sink populations and final
    /// states. The propagator is computed once and shared.
    pub fn outcomes(&self, scheme: SchemeId, theta: &[f64]) -> Result<Vec<HypothesisOutcome>> {
        let wp = self.walk(scheme, theta)?;
        let generator = CompactGenerator::new(&wp, &self.topo)?;
        let propagator = generator.propagator(self.tau)?;
        self.ensemble
            .states()
            .iter()
            .map(|rho| {
                let coords = generator.initial_coordinates(rho)?;
                let state = propagator.full_state(&coords, &self.topo)?;
                let sinks = crate::dynamics::sink_populations(&state, &self.topo)?;
                Ok(HypothesisOutcome { sinks, state })
            })
            .collect()
    }

    /// `P_c = sum_n p_n <sink_n| rho_n(tau) |sink_n>`; mass outside the
    /// sinks counts as failure.
    pub fn prob_correct(&self, scheme: SchemeId, theta: &[f64]) -> Result<f64> {
        let outcomes = self.outcomes(scheme, theta)?;
        let pc: f64 = outcomes
            .iter()
            .zip(self.ensemble.priors())
            .enumerate()
            .map(|(n, (o, &prior))| prior * o.sinks.populations[n])
            .sum();
        Ok(pc.clamp(0.0, 1.0))
    }
}

/// One-shot evaluation of the probability of correct detection.
pub fn prob_correct(
    scheme: SchemeId,
    theta: &[f64],
    topo: &NetworkTopology,
    ens: &StateEnsemble,
    p: f64,
    tau: f64,
    gamma_s: f64,
) -> Result<f64> {
    DiscriminationTask::new(topo.clone(), ens.clone(), p, tau, gamma_s)?.prob_correct(scheme, theta)
}

/// `|k><k|` on `dim` levels.
pub fn basis_projector(dim: usize, k: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(dim, dim);
    m[(k, k)] = ONE;
    m
}
