//! Parameterisations of the walk generators.
//!
//! Each scheme maps an unconstrained real vector `theta` onto a Hamiltonian
//! `H` and a transition matrix `T` supported on the topology mask:
//!
//! | scheme | parameters | `H` | `T` |
//! |--------|-----------|-----|-----|
//! | (a) | `E` | `H_e = theta_e^2` | `H D_H^-1` |
//! | (b) | `E` bits | `H_e in {0, 1}` | `H D_H^-1` |
//! | (c) | `2E` | `-max(T_ij, T_ji)`, Laplacian diagonal | logistic(theta), un-normalised |
//! | (d) | `E + 2E` | `H_e = theta_e` (signed) | `theta_ij^2 / sum_k theta_kj^2` |
//!
//! `E` is the number of undirected masked edges. Parameters follow
//! [`NetworkTopology::edges`] order; directed parameters follow
//! [`NetworkTopology::directed_edges`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::RealMatrix;
use crate::topology::NetworkTopology;

/// Columns whose squared weight falls below this map to the zero column.
const COLUMN_EPS: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SchemeId {
    #[serde(rename = "a")]
    A,
    #[serde(rename = "b")]
    B,
    #[serde(rename = "c")]
    C,
    #[serde(rename = "d")]
    D,
}

impl SchemeId {
    pub const ALL: [SchemeId; 4] = [SchemeId::A, SchemeId::B, SchemeId::C, SchemeId::D];

    /// Scheme (b) is searched combinatorially; the rest by simplex descent.
    pub fn is_continuous(self) -> bool {
        self != SchemeId::B
    }

    pub fn letter(self) -> char {
        match self {
            SchemeId::A => 'a',
            SchemeId::B => 'b',
            SchemeId::C => 'c',
            SchemeId::D => 'd',
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a" => Ok(SchemeId::A),
            "b" => Ok(SchemeId::B),
            "c" => Ok(SchemeId::C),
            "d" => Ok(SchemeId::D),
            other => Err(Error::InvalidArgument(format!(
                "unknown scheme {other:?}, expected one of a, b, c, d"
            ))),
        }
    }
}

/// The `(H, T)` pair produced by a scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct Couplings {
    pub hamiltonian: RealMatrix,
    pub transition: RealMatrix,
}

/// Couplings plus the interpolation weight `p` and the sink rate `gamma_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkParameters {
    pub hamiltonian: RealMatrix,
    pub transition: RealMatrix,
    pub p: f64,
    pub gamma_s: f64,
}

impl WalkParameters {
    pub fn new(couplings: Couplings, p: f64, gamma_s: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("p = {p} outside [0, 1]")));
        }
        if !(gamma_s >= 0.0 && gamma_s.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "sink rate {gamma_s} must be finite and non-negative"
            )));
        }
        Ok(Self {
            hamiltonian: couplings.hamiltonian,
            transition: couplings.transition,
            p,
            gamma_s,
        })
    }
}

pub fn param_count(scheme: SchemeId, topo: &NetworkTopology) -> usize {
    let e = topo.n_edges();
    match scheme {
        SchemeId::A | SchemeId::B => e,
        SchemeId::C => 2 * e,
        SchemeId::D => 3 * e,
    }
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let z = x.exp();
        z / (1.0 + z)
    }
}

/// Inverse of the scheme (c) squash; handy for building parameter vectors
/// that realise chosen rates.
pub fn logit(t: f64) -> f64 {
    (t / (1.0 - t)).ln()
}

fn symmetric_from_edges(topo: &NetworkTopology, weights: impl Iterator<Item = f64>) -> RealMatrix {
    let d = topo.dim();
    let mut h = RealMatrix::zeros(d, d);
    for (&(i, j), w) in topo.edges().iter().zip(weights) {
        h[(i, j)] = w;
        h[(j, i)] = w;
    }
    h
}

fn column_normalised(h: &RealMatrix) -> RealMatrix {
    let mut t = h.clone();
    for j in 0..t.ncols() {
        let degree: f64 = h.column(j).sum();
        if degree > 0.0 {
            t.column_mut(j).unscale_mut(degree);
        } else {
            t.column_mut(j).fill(0.0);
        }
    }
    t
}

/// Maps `theta` to `(H, T)` for the given scheme.
pub fn materialize(scheme: SchemeId, topo: &NetworkTopology, theta: &[f64]) -> Result<Couplings> {
    let expected = param_count(scheme, topo);
    if theta.len() != expected {
        return Err(Error::ParamLength {
            expected,
            got: theta.len(),
        });
    }
    if let Some(k) = theta.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "parameter {k} is not finite"
        )));
    }
    let e = topo.n_edges();
    let d = topo.dim();
    let couplings = match scheme {
        SchemeId::A => {
            let h = symmetric_from_edges(topo, theta.iter().map(|v| v * v));
            let t = column_normalised(&h);
            Couplings {
                hamiltonian: h,
                transition: t,
            }
        }
        SchemeId::B => {
            if let Some(index) = theta.iter().position(|&v| v != 0.0 && v != 1.0) {
                return Err(Error::NonBinary {
                    index,
                    value: theta[index],
                });
            }
            let h = symmetric_from_edges(topo, theta.iter().copied());
            let t = column_normalised(&h);
            Couplings {
                hamiltonian: h,
                transition: t,
            }
        }
        SchemeId::C => {
            let mut t = RealMatrix::zeros(d, d);
            for ((r, c), &raw) in topo.directed_edges().zip(theta) {
                t[(r, c)] = logistic(raw);
            }
            let mut h = RealMatrix::zeros(d, d);
            for &(i, j) in topo.edges() {
                let w = -t[(i, j)].max(t[(j, i)]);
                h[(i, j)] = w;
                h[(j, i)] = w;
            }
            for i in 0..d {
                h[(i, i)] = -h.column(i).sum();
            }
            Couplings {
                hamiltonian: h,
                transition: t,
            }
        }
        SchemeId::D => {
            let h = symmetric_from_edges(topo, theta[..e].iter().copied());
            let mut t = RealMatrix::zeros(d, d);
            for ((r, c), &raw) in topo.directed_edges().zip(&theta[e..]) {
                t[(r, c)] = raw * raw;
            }
            for j in 0..d {
                let norm: f64 = t.column(j).sum();
                if norm < COLUMN_EPS {
                    t.column_mut(j).fill(0.0);
                } else {
                    t.column_mut(j).unscale_mut(norm);
                }
            }
            Couplings {
                hamiltonian: h,
                transition: t,
            }
        }
    };
    Ok(couplings)
}

/// Scheme (b) from an explicit bit vector.
pub fn materialize_bits(topo: &NetworkTopology, bits: &[bool]) -> Result<Couplings> {
    materialize(SchemeId::B, topo, &bits_to_theta(bits))
}

pub fn bits_to_theta(bits: &[bool]) -> Vec<f64> {
    bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
}

impl Couplings {
    /// Checks the structural invariants every scheme must satisfy.
    pub fn check(&self, scheme: SchemeId, topo: &NetworkTopology) -> Result<()> {
        let d = topo.dim();
        let mask = topo.adjacency();
        let (h, t) = (&self.hamiltonian, &self.transition);
        if h.shape() != (d, d) || t.shape() != (d, d) {
            return Err(Error::Consistency(
                "coupling matrices have wrong shape".into(),
            ));
        }
        for i in 0..d {
            for j in 0..d {
                if h[(i, j)] != h[(j, i)] {
                    return Err(Error::Consistency(format!("H not symmetric at ({i}, {j})")));
                }
                if i != j && mask[(i, j)] == 0.0 && (h[(i, j)] != 0.0 || t[(i, j)] != 0.0) {
                    return Err(Error::Consistency(format!(
                        "coupling outside mask at ({i}, {j})"
                    )));
                }
                if !(0.0..=1.0).contains(&t[(i, j)]) {
                    return Err(Error::Consistency(format!(
                        "T[{i}][{j}] = {} outside [0, 1]",
                        t[(i, j)]
                    )));
                }
            }
            if t[(i, i)] != 0.0 {
                return Err(Error::Consistency(format!("T has a self-loop on node {i}")));
            }
            let diag_expected = if scheme == SchemeId::C {
                (0..d).filter(|&j| j != i).map(|j| -h[(j, i)]).sum()
            } else {
                0.0
            };
            if (h[(i, i)] - diag_expected).abs() > 1e-12 {
                return Err(Error::Consistency(format!("H diagonal wrong on node {i}")));
            }
            if scheme != SchemeId::C {
                let s: f64 = t.column(i).sum();
                if !(s == 0.0 || (s - 1.0).abs() <= 1e-10) {
                    return Err(Error::Consistency(format!("T column {i} sums to {s}")));
                }
            }
        }
        Ok(())
    }
}
