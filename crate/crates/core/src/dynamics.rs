//! Open-system dynamics of the walk.
//!
//! The generator is
//!
//! ```text
//! d rho/dt = -(1-p) i [H, rho]
//!            + p  sum_{ij} D[sqrt(T_ij) |i><j|](rho)
//!            + 2 Gamma_s sum_n D[|n><s_n|](rho)
//! D[L](rho) = L rho L^† - {L^† L, rho} / 2
//! ```
//!
//! The sink channel is not weighted by `p`, so sinks absorb in the quantum
//! limit as well. The whole sink bracket is scaled by `2 Gamma_s`, which is
//! the only trace-preserving reading.
//!
//! Two representations are provided:
//!
//! - [`Liouvillian`]: the full `d^2 x d^2` complex superoperator on the
//!   column-stacked density matrix.
//! - [`CompactGenerator`]: a real generator on the Hermitian block of the
//!   non-sink nodes plus one population accumulator per sink. Sinks never
//!   feed back into the rest of the network, so for initial states without
//!   sink support this is exact and much smaller. The optimizer uses it.

use crate::error::{Error, Result};
use crate::numerics::{
    hermitian_deviation, matrix_exponential, real_matrix_exponential, trace, validate_density,
    ComplexMatrix, DensityMatrix, RealMatrix, C64, I, ZERO,
};
use crate::schemes::WalkParameters;
use crate::topology::NetworkTopology;

/// Tolerance for re-validating propagated states.
pub const PROPAGATION_TOL: f64 = 1e-7;

/// Fixed step of the reference integrator, in seconds.
pub const REFERENCE_STEP: f64 = 1e-3;

fn check_params(wp: &WalkParameters, topo: &NetworkTopology) -> Result<()> {
    let d = topo.dim();
    for (name, m) in [("H", &wp.hamiltonian), ("T", &wp.transition)] {
        if m.shape() != (d, d) {
            return Err(Error::InvalidArgument(format!(
                "{name} is {}x{}, network has {d} nodes",
                m.nrows(),
                m.ncols()
            )));
        }
    }
    if !(0.0..=1.0).contains(&wp.p) {
        return Err(Error::InvalidArgument(format!(
            "p = {} outside [0, 1]",
            wp.p
        )));
    }
    Ok(())
}

/// Per-node total outgoing rate `gamma_j = p sum_i T_ij + 2 Gamma_s [j is a sinker]`.
fn loss_rates(wp: &WalkParameters, topo: &NetworkTopology) -> Vec<f64> {
    let d = topo.dim();
    let mut gamma: Vec<f64> = (0..d)
        .map(|j| wp.p * wp.transition.column(j).sum())
        .collect();
    for &(sinker, _) in topo.sink_map() {
        gamma[sinker] += 2.0 * wp.gamma_s;
    }
    gamma
}

/// Matrix of the full generator acting on `vec(rho)` (column stacking).
#[derive(Debug, Clone)]
pub struct Liouvillian {
    dim: usize,
    matrix: ComplexMatrix,
}

impl Liouvillian {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Largest |sum_a L[(a,a), col]|, i.e. how far `vec(I)^†` is from a left
    /// null vector.
    pub fn trace_defect(&self) -> f64 {
        let d = self.dim;
        (0..d * d)
            .map(|col| {
                (0..d)
                    .map(|a| self.matrix[(a + a * d, col)])
                    .sum::<C64>()
                    .norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let v = &self.matrix * vectorize(rho);
        unvectorize(v.as_slice(), self.dim)
    }

    pub fn propagator(&self, tau: f64) -> Result<Propagator> {
        check_time(tau)?;
        Ok(Propagator {
            dim: self.dim,
            matrix: matrix_exponential(&self.matrix.scale(tau))?,
        })
    }
}

fn check_time(tau: f64) -> Result<()> {
    if tau >= 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "evolution time {tau} must be finite and non-negative"
        )))
    }
}

fn vectorize(rho: &ComplexMatrix) -> nalgebra::DVector<C64> {
    // nalgebra stores column-major, which is exactly column stacking
    nalgebra::DVector::from_column_slice(rho.as_slice())
}

fn unvectorize(v: &[C64], d: usize) -> ComplexMatrix {
    ComplexMatrix::from_column_slice(d, d, v)
}

pub fn build_liouvillian(wp: &WalkParameters, topo: &NetworkTopology) -> Result<Liouvillian> {
    check_params(wp, topo)?;
    let d = topo.dim();
    let idx = |r: usize, c: usize| r + c * d;
    let mut m = ComplexMatrix::zeros(d * d, d * d);
    let h = &wp.hamiltonian;
    let coherent = 1.0 - wp.p;

    // -i c (H rho - rho H)
    if coherent != 0.0 {
        for a in 0..d {
            for b in 0..d {
                let row = idx(a, b);
                for k in 0..d {
                    if h[(a, k)] != 0.0 {
                        m[(row, idx(k, b))] += -I * (coherent * h[(a, k)]);
                    }
                    if h[(k, b)] != 0.0 {
                        m[(row, idx(a, k))] += I * (coherent * h[(k, b)]);
                    }
                }
            }
        }
    }

    // anticommutator part of every dissipator is diagonal in this basis
    let gamma = loss_rates(wp, topo);
    for a in 0..d {
        for b in 0..d {
            m[(idx(a, b), idx(a, b))] -= C64::from(0.5 * (gamma[a] + gamma[b]));
        }
    }
    // jump terms: population j -> i
    for j in 0..d {
        for i in 0..d {
            let rate = wp.p * wp.transition[(i, j)];
            if rate != 0.0 {
                m[(idx(i, i), idx(j, j))] += C64::from(rate);
            }
        }
    }
    for &(sinker, sink) in topo.sink_map() {
        m[(idx(sink, sink), idx(sinker, sinker))] += C64::from(2.0 * wp.gamma_s);
    }

    let l = Liouvillian { dim: d, matrix: m };
    let scale = 1.0 + crate::numerics::max_abs(&l.matrix);
    let defect = l.trace_defect();
    if defect > 1e-10 * scale {
        return Err(Error::Consistency(format!(
            "Liouvillian is not trace preserving (defect {defect:e})"
        )));
    }
    Ok(l)
}

/// `exp(L tau)` for a fixed generator and time, reusable across initial states.
#[derive(Debug, Clone)]
pub struct Propagator {
    dim: usize,
    matrix: ComplexMatrix,
}

impl Propagator {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn apply(&self, rho0: &DensityMatrix) -> Result<DensityMatrix> {
        if rho0.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: rho0.dim(),
            });
        }
        let v = &self.matrix * vectorize(rho0.matrix());
        revalidate(unvectorize(v.as_slice(), self.dim))
    }
}

/// Symmetrises a propagated state and checks it is still a density matrix.
fn revalidate(rho: ComplexMatrix) -> Result<DensityMatrix> {
    let drift = hermitian_deviation(&rho);
    if drift > PROPAGATION_TOL {
        return Err(Error::NumericalInstability {
            source: Box::new(Error::NotHermitian { deviation: drift }),
        });
    }
    let sym = (&rho + rho.adjoint()).scale(0.5);
    validate_density(sym, PROPAGATION_TOL).map_err(|e| Error::NumericalInstability {
        source: Box::new(e),
    })
}

/// `vec(rho(tau)) = exp(L tau) vec(rho0)`.
pub fn propagate(rho0: &DensityMatrix, l: &Liouvillian, tau: f64) -> Result<DensityMatrix> {
    l.propagator(tau)?.apply(rho0)
}

/// Probability mass collected by each sink.
#[derive(Debug, Clone, PartialEq)]
pub struct SinkReport {
    /// One entry per sink, in output-layer order.
    pub populations: Vec<f64>,
    /// Mass still outside the sinks.
    pub residual: f64,
}

impl SinkReport {
    fn from_populations(populations: Vec<f64>) -> Self {
        let residual = 1.0 - populations.iter().sum::<f64>();
        Self {
            populations,
            residual,
        }
    }
}

pub fn sink_populations(rho: &DensityMatrix, topo: &NetworkTopology) -> Result<SinkReport> {
    if rho.dim() != topo.dim() {
        return Err(Error::DimensionMismatch {
            expected: topo.dim(),
            got: rho.dim(),
        });
    }
    let populations = topo.sinks().map(|s| rho.matrix()[(s, s)].re).collect();
    Ok(SinkReport::from_populations(populations))
}

/// Continuous-time random walk `q(tau) = exp((T - I) tau) q0`.
///
/// `T` may carry a diagonal so that arbitrary rate matrices can be expressed
/// as `T = I + Q`.
pub fn classical_propagate(q0: &[f64], t: &RealMatrix, tau: f64) -> Result<Vec<f64>> {
    check_time(tau)?;
    let n = crate::numerics::check_square(t)?;
    if q0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: q0.len(),
        });
    }
    if q0.iter().any(|&q| q < 0.0) || (q0.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(
            "initial distribution must be non-negative and sum to 1".into(),
        ));
    }
    let generator = (t - RealMatrix::identity(n, n)).scale(tau);
    let q = real_matrix_exponential(&generator)? * nalgebra::DVector::from_column_slice(q0);
    Ok(q.iter().copied().collect())
}

/// Direct evaluation of `d rho / dt` on a full density matrix.
pub fn lindblad_rhs(
    wp: &WalkParameters,
    topo: &NetworkTopology,
    rho: &ComplexMatrix,
) -> ComplexMatrix {
    let d = topo.dim();
    let h = crate::numerics::to_complex(&wp.hamiltonian);
    let mut out = (&h * rho - rho * &h) * (-I * (1.0 - wp.p));
    let gamma = loss_rates(wp, topo);
    for a in 0..d {
        for b in 0..d {
            out[(a, b)] -= rho[(a, b)] * (0.5 * (gamma[a] + gamma[b]));
        }
    }
    for j in 0..d {
        let pop = rho[(j, j)];
        for i in 0..d {
            let rate = wp.p * wp.transition[(i, j)];
            if rate != 0.0 {
                out[(i, i)] += pop * rate;
            }
        }
    }
    for &(sinker, sink) in topo.sink_map() {
        out[(sink, sink)] += rho[(sinker, sinker)] * (2.0 * wp.gamma_s);
    }
    out
}

/// Fixed-step classical Runge-Kutta integration of the master equation.
///
/// Slow; exists to cross-check the exponential propagators.
pub fn rk4_reference(
    rho0: &DensityMatrix,
    wp: &WalkParameters,
    topo: &NetworkTopology,
    tau: f64,
    step: f64,
) -> Result<ComplexMatrix> {
    check_time(tau)?;
    if step.is_nan() || step <= 0.0 {
        return Err(Error::InvalidArgument("step must be positive".into()));
    }
    let steps = (tau / step).ceil() as usize;
    if steps == 0 {
        return Ok(rho0.matrix().clone());
    }
    let dt = tau / steps as f64;
    let mut rho = rho0.matrix().clone();
    for _ in 0..steps {
        let k1 = lindblad_rhs(wp, topo, &rho);
        let k2 = lindblad_rhs(wp, topo, &(&rho + &k1 * C64::from(0.5 * dt)));
        let k3 = lindblad_rhs(wp, topo, &(&rho + &k2 * C64::from(0.5 * dt)));
        let k4 = lindblad_rhs(wp, topo, &(&rho + &k3 * C64::from(dt)));
        rho += (k1 + k2 * C64::from(2.0) + k3 * C64::from(2.0) + k4) * C64::from(dt / 6.0);
    }
    Ok(rho)
}

/// Real-coordinate generator on the non-sink block plus sink accumulators.
///
/// Coordinates: for `a <= b` over the active nodes, `X_aa` for diagonal
/// entries and `(Re X_ab, Im X_ab)` for `a < b`; then one population per sink.
#[derive(Debug, Clone)]
pub struct CompactGenerator {
    n_active: usize,
    n_sinks: usize,
    matrix: RealMatrix,
}

/// Position of the coordinates of `X_ab`, `a <= b`, in a packed layout.
#[derive(Debug, Clone)]
struct PackedIndex {
    n: usize,
    offsets: Vec<usize>,
}

impl PackedIndex {
    fn new(n: usize) -> Self {
        // row a starts with X_aa, then (re, im) for b = a+1..n
        let mut offsets = Vec::with_capacity(n);
        let mut next = 0;
        for a in 0..n {
            offsets.push(next);
            next += 1 + 2 * (n - a - 1);
        }
        Self { n, offsets }
    }

    fn len(&self) -> usize {
        self.n * self.n
    }

    fn diag(&self, a: usize) -> usize {
        self.offsets[a]
    }

    /// `(re, im)` slots of `X_ab` for `a < b`.
    fn off(&self, a: usize, b: usize) -> (usize, usize) {
        let base = self.offsets[a] + 1 + 2 * (b - a - 1);
        (base, base + 1)
    }

    /// Expresses `X_uv` as a complex combination of coordinates.
    fn expand(&self, u: usize, v: usize) -> [(usize, C64); 2] {
        use std::cmp::Ordering::*;
        match u.cmp(&v) {
            Equal => [(self.diag(u), C64::new(1.0, 0.0)), (usize::MAX, ZERO)],
            Less => {
                let (re, im) = self.off(u, v);
                [(re, C64::new(1.0, 0.0)), (im, C64::new(0.0, 1.0))]
            }
            Greater => {
                let (re, im) = self.off(v, u);
                [(re, C64::new(1.0, 0.0)), (im, C64::new(0.0, -1.0))]
            }
        }
    }

    fn pack(&self, x: &ComplexMatrix, out: &mut [f64]) {
        for a in 0..self.n {
            out[self.diag(a)] = x[(a, a)].re;
            for b in a + 1..self.n {
                let (re, im) = self.off(a, b);
                out[re] = x[(a, b)].re;
                out[im] = x[(a, b)].im;
            }
        }
    }

    fn unpack(&self, coords: &[f64]) -> ComplexMatrix {
        let mut x = ComplexMatrix::zeros(self.n, self.n);
        for a in 0..self.n {
            x[(a, a)] = C64::new(coords[self.diag(a)], 0.0);
            for b in a + 1..self.n {
                let (re, im) = self.off(a, b);
                x[(a, b)] = C64::new(coords[re], coords[im]);
                x[(b, a)] = C64::new(coords[re], -coords[im]);
            }
        }
        x
    }
}

impl CompactGenerator {
    pub fn new(wp: &WalkParameters, topo: &NetworkTopology) -> Result<Self> {
        check_params(wp, topo)?;
        let n = topo.n_active();
        let packed = PackedIndex::new(n);
        let size = packed.len() + topo.n_output();
        let mut g = RealMatrix::zeros(size, size);

        // dX_ab += kappa * X_uv, for a <= b
        let push = |g: &mut RealMatrix, a: usize, b: usize, kappa: C64, u: usize, v: usize| {
            for (col, w) in packed.expand(u, v) {
                if col == usize::MAX {
                    continue;
                }
                let z = kappa * w;
                if a == b {
                    g[(packed.diag(a), col)] += z.re;
                } else {
                    let (re, im) = packed.off(a, b);
                    g[(re, col)] += z.re;
                    g[(im, col)] += z.im;
                }
            }
        };

        let h = &wp.hamiltonian;
        let coherent = 1.0 - wp.p;
        let gamma = loss_rates(wp, topo);
        for a in 0..n {
            for b in a..n {
                if coherent != 0.0 {
                    for k in 0..n {
                        if h[(a, k)] != 0.0 {
                            push(&mut g, a, b, -I * (coherent * h[(a, k)]), k, b);
                        }
                        if h[(k, b)] != 0.0 {
                            push(&mut g, a, b, I * (coherent * h[(k, b)]), a, k);
                        }
                    }
                }
                let damping = -0.5 * (gamma[a] + gamma[b]);
                if damping != 0.0 {
                    push(&mut g, a, b, C64::from(damping), a, b);
                }
            }
            for j in 0..n {
                let rate = wp.p * wp.transition[(a, j)];
                if rate != 0.0 {
                    push(&mut g, a, a, C64::from(rate), j, j);
                }
            }
        }
        let base = packed.len();
        for (k, &(sinker, _)) in topo.sink_map().iter().enumerate() {
            g[(base + k, packed.diag(sinker))] += 2.0 * wp.gamma_s;
        }
        Ok(Self {
            n_active: n,
            n_sinks: topo.n_output(),
            matrix: g,
        })
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.matrix
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    /// Packs an active-block state (dimension `n_active` or smaller, padded
    /// with zeros) into coordinates with empty sinks.
    pub fn initial_coordinates(&self, rho: &DensityMatrix) -> Result<nalgebra::DVector<f64>> {
        if rho.dim() > self.n_active {
            return Err(Error::DimensionMismatch {
                expected: self.n_active,
                got: rho.dim(),
            });
        }
        let embedded = rho.embed(self.n_active)?;
        let packed = PackedIndex::new(self.n_active);
        let mut v = nalgebra::DVector::zeros(self.size());
        packed.pack(embedded.matrix(), v.as_mut_slice());
        Ok(v)
    }

    pub fn propagator(&self, tau: f64) -> Result<CompactPropagator> {
        check_time(tau)?;
        Ok(CompactPropagator {
            n_active: self.n_active,
            n_sinks: self.n_sinks,
            matrix: real_matrix_exponential(&self.matrix.scale(tau))?,
        })
    }

    /// Largest column sum of the trace functional applied to the generator.
    pub fn trace_defect(&self) -> f64 {
        let packed = PackedIndex::new(self.n_active);
        let base = packed.len();
        (0..self.size())
            .map(|col| {
                let mut s: f64 = (0..self.n_active)
                    .map(|a| self.matrix[(packed.diag(a), col)])
                    .sum();
                s += (0..self.n_sinks)
                    .map(|k| self.matrix[(base + k, col)])
                    .sum::<f64>();
                s.abs()
            })
            .fold(0.0, f64::max)
    }
}

/// `exp(G tau)` of a [`CompactGenerator`].
#[derive(Debug, Clone)]
pub struct CompactPropagator {
    n_active: usize,
    n_sinks: usize,
    matrix: RealMatrix,
}

impl CompactPropagator {
    pub fn evolve(&self, coords: &nalgebra::DVector<f64>) -> nalgebra::DVector<f64> {
        &self.matrix * coords
    }

    /// Sink populations reached from `rho0` (supported on the active block).
    pub fn sink_report(&self, coords: &nalgebra::DVector<f64>) -> SinkReport {
        let out = self.evolve(coords);
        let base = self.n_active * self.n_active;
        SinkReport::from_populations(out.as_slice()[base..base + self.n_sinks].to_vec())
    }

    /// Population of one sink, without materialising the full state.
    pub fn sink_population(&self, coords: &nalgebra::DVector<f64>, sink: usize) -> f64 {
        let row = self.n_active * self.n_active + sink;
        self.matrix.row(row).dot(&coords.transpose())
    }

    /// Rebuilds the full `d x d` density matrix from evolved coordinates.
    /// Coherences involving sinks are identically zero for these states.
    pub fn full_state(
        &self,
        coords: &nalgebra::DVector<f64>,
        topo: &NetworkTopology,
    ) -> Result<DensityMatrix> {
        let out = self.evolve(coords);
        let packed = PackedIndex::new(self.n_active);
        let block = packed.unpack(&out.as_slice()[..packed.len()]);
        let d = topo.dim();
        let mut rho = ComplexMatrix::zeros(d, d);
        rho.view_mut((0, 0), (self.n_active, self.n_active))
            .copy_from(&block);
        for (k, s) in topo.sinks().enumerate() {
            rho[(s, s)] = C64::new(out[packed.len() + k], 0.0);
        }
        revalidate(rho)
    }
}

/// Trace of a propagated state minus one, for reporting.
pub fn trace_residual(rho: &DensityMatrix) -> f64 {
    (trace(rho.matrix()).re - 1.0).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{ONE, ZERO};
    use crate::schemes::{materialize, Couplings, SchemeId};
    use crate::topology::build_layered;

    fn walk(
        topo: &NetworkTopology,
        scheme: SchemeId,
        theta: &[f64],
        p: f64,
        gamma: f64,
    ) -> WalkParameters {
        WalkParameters::new(materialize(scheme, topo, theta).unwrap(), p, gamma).unwrap()
    }

    fn basis_state(d: usize, k: usize) -> DensityMatrix {
        let mut m = ComplexMatrix::zeros(d, d);
        m[(k, k)] = ONE;
        DensityMatrix::new(m).unwrap()
    }

    #[test]
    fn zero_time_is_identity() {
        let topo = build_layered(2, 2, 2, false, false).unwrap();
        let wp = walk(&topo, SchemeId::B, &[1.0; 6], 0.5, 1.0);
        let l = build_liouvillian(&wp, &topo).unwrap();
        let rho0 = basis_state(6, 0);
        let rho = propagate(&rho0, &l, 0.0).unwrap();
        assert!(crate::numerics::max_abs(&(rho.matrix() - rho0.matrix())) < 1e-15);
    }

    #[test]
    fn rabi_half_period() {
        // two nodes coupled by H = sigma_x, no sinks active
        let topo = build_layered(1, 1, 1, false, false).unwrap();
        let wp = walk(&topo, SchemeId::B, &[1.0], 0.0, 0.0);
        let l = build_liouvillian(&wp, &topo).unwrap();
        let rho = propagate(&basis_state(3, 0), &l, std::f64::consts::FRAC_PI_2).unwrap();
        assert!((rho.matrix()[(1, 1)].re - 1.0).abs() < 1e-12);
        assert!(rho.matrix()[(0, 0)].norm() < 1e-12);
    }

    #[test]
    fn negative_time_rejected() {
        let topo = build_layered(1, 1, 1, false, false).unwrap();
        let wp = walk(&topo, SchemeId::B, &[1.0], 0.3, 1.0);
        let l = build_liouvillian(&wp, &topo).unwrap();
        assert!(matches!(
            propagate(&basis_state(3, 0), &l, -1.0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn classical_limit_has_no_coherent_part() {
        let topo = build_layered(2, 2, 2, false, false).unwrap();
        let theta: Vec<f64> = (0..18).map(|k| 0.1 * k as f64 - 0.7).collect();
        let wp = walk(&topo, SchemeId::D, &theta, 1.0, 1.0);
        let l = build_liouvillian(&wp, &topo).unwrap();
        // populations only couple to populations
        let d = 6;
        for a in 0..d {
            for b in 0..d {
                if a != b {
                    for c in 0..d {
                        assert_eq!(l.matrix()[(c + c * d, a + b * d)], ZERO);
                    }
                }
            }
        }
    }

    #[test]
    fn sink_report_examples() {
        let topo = build_layered(2, 2, 2, false, false).unwrap();
        let r =
            sink_populations(&DensityMatrix::maximally_mixed(2).embed(6).unwrap(), &topo).unwrap();
        assert_eq!(r.populations, vec![0.0, 0.0]);
        assert_eq!(r.residual, 1.0);
        let r = sink_populations(&basis_state(6, 4), &topo).unwrap();
        assert_eq!(r.populations, vec![1.0, 0.0]);
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn classical_examples() {
        let q = classical_propagate(&[0.3, 0.7], &RealMatrix::identity(2, 2), 0.0).unwrap();
        assert_eq!(q, vec![0.3, 0.7]);
        let q = classical_propagate(&[0.3, 0.7], &RealMatrix::identity(2, 2), 50.0).unwrap();
        assert!((q[0] - 0.3).abs() < 1e-15 && (q[1] - 0.7).abs() < 1e-15);
        let swap = RealMatrix::from_row_slice(2, 2, &[0., 1., 1., 0.]);
        let q = classical_propagate(&[1.0, 0.0], &swap, 40.0).unwrap();
        assert!((q[0] - 0.5).abs() < 1e-12 && (q[1] - 0.5).abs() < 1e-12);
        assert!(classical_propagate(&[0.5, 0.6], &swap, 1.0).is_err());
    }

    #[test]
    fn compact_matches_full_liouvillian() {
        let topo = build_layered(2, 2, 2, false, false).unwrap();
        let rho0 = DensityMatrix::new(ComplexMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(0.7, 0.0),
                C64::new(0.1, 0.2),
                C64::new(0.1, -0.2),
                C64::new(0.3, 0.0),
            ],
        ))
        .unwrap();
        for (scheme, p) in [
            (SchemeId::A, 0.0),
            (SchemeId::C, 0.4),
            (SchemeId::D, 0.8),
            (SchemeId::D, 1.0),
        ] {
            let n = crate::schemes::param_count(scheme, &topo);
            let theta: Vec<f64> = (0..n).map(|k| ((k * 7 % 11) as f64 - 5.0) / 4.0).collect();
            let wp = walk(&topo, scheme, &theta, p, 1.0);
            let compact = CompactGenerator::new(&wp, &topo).unwrap();
            assert!(compact.trace_defect() < 1e-12);
            let full = build_liouvillian(&wp, &topo).unwrap();
            for tau in [0.3, 4.0] {
                let a = full
                    .propagator(tau)
                    .unwrap()
                    .apply(&rho0.embed(6).unwrap())
                    .unwrap();
                let cp = compact.propagator(tau).unwrap();
                let b = cp
                    .full_state(&compact.initial_coordinates(&rho0).unwrap(), &topo)
                    .unwrap();
                assert!(crate::numerics::max_abs(&(a.matrix() - b.matrix())) < 1e-11);
            }
        }
    }

    #[test]
    fn rhs_matches_liouvillian_action() {
        let topo = build_layered(2, 2, 2, false, false).unwrap();
        let theta: Vec<f64> = (0..12).map(|k| (k as f64 * 0.37).sin()).collect();
        let wp = walk(&topo, SchemeId::C, &theta, 0.35, 1.0);
        let l = build_liouvillian(&wp, &topo).unwrap();
        let mut rho = ComplexMatrix::zeros(6, 6);
        for a in 0..6 {
            for b in 0..6 {
                rho[(a, b)] = C64::new((a + 2 * b) as f64 * 0.01, (a as f64 - b as f64) * 0.02);
            }
        }
        let diff = l.apply(&rho) - lindblad_rhs(&wp, &topo, &rho);
        assert!(crate::numerics::max_abs(&diff) < 1e-14);
    }

    #[test]
    fn rejects_mismatched_parameters() {
        let topo = build_layered(2, 2, 2, false, false).unwrap();
        let wp = WalkParameters::new(
            Couplings {
                hamiltonian: RealMatrix::zeros(3, 3),
                transition: RealMatrix::zeros(3, 3),
            },
            0.5,
            1.0,
        )
        .unwrap();
        assert!(build_liouvillian(&wp, &topo).is_err());
    }
}
