#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qsw_core::numerics::{ComplexMatrix, DensityMatrix, C64};
use qsw_core::schemes::{materialize, param_count, WalkParameters};
use qsw_core::topology::{build_layered, NetworkTopology};
use qsw_core::SchemeId;

pub fn model_222() -> NetworkTopology {
    build_layered(2, 2, 2, false, false).unwrap()
}

pub fn model_4r44() -> NetworkTopology {
    build_layered(4, 4, 4, true, false).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Parameters drawn like the optimizer's starting points, scaled by `spread`.
/// Scheme (b) gets random bits.
pub fn random_theta(
    rng: &mut ChaCha8Rng,
    scheme: SchemeId,
    topo: &NetworkTopology,
    spread: f64,
) -> Vec<f64> {
    let n = param_count(scheme, topo);
    if scheme == SchemeId::B {
        (0..n)
            .map(|_| if rng.random_bool(0.5) { 1.0 } else { 0.0 })
            .collect()
    } else {
        (0..n)
            .map(|_| spread * rng.random_range(-1.0..=1.0))
            .collect()
    }
}

pub fn random_walk(
    rng: &mut ChaCha8Rng,
    scheme: SchemeId,
    topo: &NetworkTopology,
    p: f64,
    gamma_s: f64,
) -> WalkParameters {
    let theta = random_theta(rng, scheme, topo, 2.0);
    WalkParameters::new(materialize(scheme, topo, &theta).unwrap(), p, gamma_s).unwrap()
}

/// Random mixed state on the first `support` levels of a `dim`-level system.
pub fn random_state(rng: &mut ChaCha8Rng, support: usize, dim: usize) -> DensityMatrix {
    let g = DMatrix::from_fn(support, support, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let mut rho = &g * g.adjoint();
    let tr: f64 = (0..support).map(|k| rho[(k, k)].re).sum();
    rho /= C64::from(tr);
    let mut full = ComplexMatrix::zeros(dim, dim);
    full.view_mut((0, 0), (support, support)).copy_from(&rho);
    DensityMatrix::new(full).unwrap()
}

/// `|k><k|` on `dim` levels.
pub fn basis_state(dim: usize, k: usize) -> DensityMatrix {
    let mut m = ComplexMatrix::zeros(dim, dim);
    m[(k, k)] = C64::from(1.0);
    DensityMatrix::new(m).unwrap()
}

pub fn max_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
