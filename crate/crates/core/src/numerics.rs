//! Dense complex-matrix primitives: Hermitian eigendecomposition, trace norm,
//! matrix exponential and density-matrix validation.
//!
//! Storage and the heavy kernels come from `nalgebra`. Everything here is a
//! pure function of its arguments.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use nalgebra::Complex;

pub type C64 = Complex<f64>;
pub type ComplexMatrix = DMatrix<C64>;
pub type RealMatrix = DMatrix<f64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Tolerances used when validating density matrices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// max |m_ij - conj(m_ji)|
    pub hermitian: f64,
    /// |tr(m) - 1|
    pub trace: f64,
    /// allowed negative slack on the smallest eigenvalue
    pub psd: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: 1e-10,
            trace: 1e-9,
            psd: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn uniform(tol: f64) -> Self {
        Self {
            hermitian: tol,
            trace: tol,
            psd: tol,
        }
    }
}

/// Eigendecomposition `m = V diag(values) V†` with eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Eigenvectors stored as columns, in the same order as `values`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut scaled = self.vectors.clone();
        for (j, &v) in self.values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(v);
        }
        &scaled * self.vectors.adjoint()
    }
}

pub fn check_square<T>(m: &DMatrix<T>) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

pub fn check_finite(m: &ComplexMatrix) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

/// Largest |m_ij - conj(m_ji)|.
pub fn hermitian_deviation(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn check_hermitian(m: &ComplexMatrix, tol: f64) -> Result<()> {
    check_square(m)?;
    check_finite(m)?;
    let deviation = hermitian_deviation(m);
    if deviation > tol {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix (Householder tridiagonalisation
/// followed by implicit QR, via `nalgebra`).
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermitianEigen> {
    check_hermitian(m, Tolerances::default().hermitian)?;
    let n = m.nrows();
    if n == 0 {
        return Ok(HermitianEigen {
            values: Vec::new(),
            vectors: ComplexMatrix::zeros(0, 0),
        });
    }
    // Feed the exactly Hermitian part so the solver never sees the drift.
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(HermitianEigen { values, vectors })
}

pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    hermitian_eig(m).map(|e| e.values)
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(m)?.iter().map(|v| v.abs()).sum())
}

/// `exp(m)` by scaling and squaring around a Padé core.
pub fn matrix_exponential(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_square(m)?;
    check_finite(m)?;
    if m.nrows() == 0 {
        return Ok(m.clone());
    }
    Ok(m.exp())
}

/// Real counterpart of [`matrix_exponential`], used on the real-coordinate
/// generators in the optimizer hot path.
pub fn real_matrix_exponential(m: &RealMatrix) -> Result<RealMatrix> {
    check_square(m)?;
    if let Some(k) = m.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            row: k % m.nrows(),
            col: k / m.nrows(),
        });
    }
    if m.nrows() == 0 {
        return Ok(m.clone());
    }
    Ok(m.exp())
}

pub fn trace(m: &ComplexMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// tr(a b) without forming the product.
pub fn trace_of_product(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

pub fn to_complex(m: &RealMatrix) -> ComplexMatrix {
    m.map(|v| C64::new(v, 0.0))
}

/// Unit-trace positive semidefinite Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    /// Validates with the default tolerances.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        validate_density_with(matrix, &Tolerances::default())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn purity(&self) -> f64 {
        trace_of_product(&self.0, &self.0).re
    }

    pub fn pure(amplitudes: &[C64]) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(amplitudes);
        Self::new(&v * v.adjoint())
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim, dim).unscale(dim as f64))
    }

    /// Embeds the state in the leading block of a `dim`-dimensional space.
    pub fn embed(&self, dim: usize) -> Result<Self> {
        if dim < self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: dim,
            });
        }
        let mut out = ComplexMatrix::zeros(dim, dim);
        out.view_mut((0, 0), (self.dim(), self.dim()))
            .copy_from(&self.0);
        Ok(Self(out))
    }
}

/// Checks Hermiticity, unit trace and positivity, each at `tol`.
pub fn validate_density(rho: ComplexMatrix, tol: f64) -> Result<DensityMatrix> {
    validate_density_with(rho, &Tolerances::uniform(tol))
}

pub fn validate_density_with(rho: ComplexMatrix, tol: &Tolerances) -> Result<DensityMatrix> {
    check_square(&rho)?;
    check_finite(&rho)?;
    let deviation = hermitian_deviation(&rho);
    if deviation > tol.hermitian {
        return Err(Error::NotHermitian { deviation });
    }
    let tr = trace(&rho).re;
    if (tr - 1.0).abs() > tol.trace {
        return Err(Error::Trace {
            trace: tr,
            deviation: (tr - 1.0).abs(),
        });
    }
    let sym = (&rho + rho.adjoint()).scale(0.5);
    let min_eigenvalue = hermitian_eigenvalues(&sym)?.first().copied().unwrap_or(0.0);
    if min_eigenvalue < -tol.psd {
        return Err(Error::NegativeEigenvalue { min_eigenvalue });
    }
    Ok(DensityMatrix(rho))
}
