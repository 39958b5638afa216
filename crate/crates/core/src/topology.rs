//! Layered `M-N-O` networks.
//!
//! Nodes are numbered inputs first (`0..M`), then intermediates (`M..M+N`),
//! then sinks (`M+N..M+N+O`). Intermediate node `k` of the middle layer is the
//! sinker of output node `k`. Sinks carry no adjacency at all: they only
//! receive population through the sink channel of the dynamics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::RealMatrix;

/// Serialized form of a layered network, as found in run configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    #[serde(rename = "M")]
    pub n_input: usize,
    #[serde(rename = "N")]
    pub n_intermediate: usize,
    #[serde(rename = "O")]
    pub n_output: usize,
    #[serde(default)]
    pub reduced_input: bool,
    #[serde(default)]
    pub reduced_intermediate: bool,
}

impl LayerSpec {
    pub fn build(&self) -> Result<NetworkTopology> {
        build_layered(
            self.n_input,
            self.n_intermediate,
            self.n_output,
            self.reduced_input,
            self.reduced_intermediate,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkTopology {
    n_input: usize,
    n_intermediate: usize,
    n_output: usize,
    adjacency: RealMatrix,
    sink_map: Vec<(usize, usize)>,
    reduced_input: bool,
    reduced_intermediate: bool,
    edges: Vec<(usize, usize)>,
}

/// Builds the default layered network: every layer fully connected
/// internally (unless flagged as reduced) and to the next layer, with
/// intermediate node `k` feeding output node `k`.
pub fn build_layered(
    m: usize,
    n: usize,
    o: usize,
    reduced_input: bool,
    reduced_intermediate: bool,
) -> Result<NetworkTopology> {
    if m == 0 || n == 0 || o == 0 {
        return Err(Error::Topology(format!(
            "every layer needs at least one node (got {m}-{n}-{o})"
        )));
    }
    if o > n {
        return Err(Error::Topology(format!(
            "{o} sinks need {o} distinct sinkers but only {n} intermediate nodes exist"
        )));
    }
    let dim = m + n + o;
    let mut adjacency = RealMatrix::zeros(dim, dim);
    let mut link = |a: usize, b: usize| {
        adjacency[(a, b)] = 1.0;
        adjacency[(b, a)] = 1.0;
    };
    let inputs = 0..m;
    let middle = m..m + n;
    if !reduced_input {
        for a in inputs.clone() {
            for b in a + 1..m {
                link(a, b);
            }
        }
    }
    for a in inputs {
        for b in middle.clone() {
            link(a, b);
        }
    }
    if !reduced_intermediate {
        for a in middle.clone() {
            for b in a + 1..m + n {
                link(a, b);
            }
        }
    }
    let sink_map = (0..o).map(|k| (m + k, m + n + k)).collect();
    NetworkTopology::from_parts(
        m,
        n,
        o,
        adjacency,
        sink_map,
        reduced_input,
        reduced_intermediate,
    )
}

impl NetworkTopology {
    /// Assembles and validates a network from an explicit mask. Useful for
    /// degenerate or hand-made layouts; [`build_layered`] covers the usual case.
    pub fn from_parts(
        n_input: usize,
        n_intermediate: usize,
        n_output: usize,
        adjacency: RealMatrix,
        sink_map: Vec<(usize, usize)>,
        reduced_input: bool,
        reduced_intermediate: bool,
    ) -> Result<Self> {
        let dim = n_input + n_intermediate + n_output;
        if adjacency.nrows() != dim || adjacency.ncols() != dim {
            return Err(Error::Topology(format!(
                "adjacency is {}x{}, expected {dim}x{dim}",
                adjacency.nrows(),
                adjacency.ncols()
            )));
        }
        for i in 0..dim {
            if adjacency[(i, i)] != 0.0 {
                return Err(Error::Topology(format!("self-loop on node {}", i + 1)));
            }
            for j in 0..dim {
                let a = adjacency[(i, j)];
                if a != 0.0 && a != 1.0 {
                    return Err(Error::Topology(format!(
                        "adjacency entry ({}, {}) is {a}, expected 0 or 1",
                        i + 1,
                        j + 1
                    )));
                }
                if a != adjacency[(j, i)] {
                    return Err(Error::Topology("adjacency is not symmetric".into()));
                }
            }
        }
        let first_sink = n_input + n_intermediate;
        for s in first_sink..dim {
            if adjacency.column(s).iter().any(|&a| a != 0.0) {
                return Err(Error::Topology(format!(
                    "sink node {} has adjacency links",
                    s + 1
                )));
            }
        }
        if sink_map.len() != n_output {
            return Err(Error::Topology(format!(
                "sink map has {} entries for {n_output} sinks",
                sink_map.len()
            )));
        }
        let mut seen_sinker = vec![false; dim];
        let mut seen_sink = vec![false; dim];
        for &(sinker, sink) in &sink_map {
            if !(n_input..first_sink).contains(&sinker) {
                return Err(Error::Topology(format!(
                    "sinker {} is not an intermediate node",
                    sinker + 1
                )));
            }
            if !(first_sink..dim).contains(&sink) {
                return Err(Error::Topology(format!(
                    "sink {} is not an output node",
                    sink + 1
                )));
            }
            if std::mem::replace(&mut seen_sinker[sinker], true)
                || std::mem::replace(&mut seen_sink[sink], true)
            {
                return Err(Error::Topology("sink map is not injective".into()));
            }
        }
        let mut edges = Vec::new();
        for i in 0..dim {
            for j in i + 1..dim {
                if adjacency[(i, j)] != 0.0 {
                    edges.push((i, j));
                }
            }
        }
        Ok(Self {
            n_input,
            n_intermediate,
            n_output,
            adjacency,
            sink_map,
            reduced_input,
            reduced_intermediate,
            edges,
        })
    }

    pub fn n_input(&self) -> usize {
        self.n_input
    }

    pub fn n_intermediate(&self) -> usize {
        self.n_intermediate
    }

    pub fn n_output(&self) -> usize {
        self.n_output
    }

    pub fn dim(&self) -> usize {
        self.n_input + self.n_intermediate + self.n_output
    }

    /// Number of nodes that can hold coherences (inputs and intermediates).
    pub fn n_active(&self) -> usize {
        self.n_input + self.n_intermediate
    }

    pub fn adjacency(&self) -> &RealMatrix {
        &self.adjacency
    }

    /// `(sinker, sink)` pairs in output-layer order, 0-based.
    pub fn sink_map(&self) -> &[(usize, usize)] {
        &self.sink_map
    }

    pub fn sinks(&self) -> impl Iterator<Item = usize> + '_ {
        self.sink_map.iter().map(|&(_, s)| s)
    }

    pub fn reduced_input(&self) -> bool {
        self.reduced_input
    }

    pub fn reduced_intermediate(&self) -> bool {
        self.reduced_intermediate
    }

    /// Undirected edges `(i, j)` with `i < j`, in row-major order. This order
    /// fixes the layout of every scheme's parameter vector.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Directed edges: for each undirected `(i, j)`, first `(i, j)` then
    /// `(j, i)`, where `(r, c)` addresses the matrix entry `T[r][c]`
    /// (a hop from `c` to `r`).
    pub fn directed_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().flat_map(|&(i, j)| [(i, j), (j, i)])
    }

    pub fn layer_spec(&self) -> LayerSpec {
        LayerSpec {
            n_input: self.n_input,
            n_intermediate: self.n_intermediate,
            n_output: self.n_output,
            reduced_input: self.reduced_input,
            reduced_intermediate: self.reduced_intermediate,
        }
    }

    /// Short `M-N-O` label, with `r` marking reduced layers.
    pub fn label(&self) -> String {
        let r = |flag: bool| if flag { "r" } else { "" };
        format!(
            "{}{}-{}{}-{}",
            self.n_input,
            r(self.reduced_input),
            self.n_intermediate,
            r(self.reduced_intermediate),
            self.n_output
        )
    }
}

fn check_non_negative(a: &RealMatrix) -> Result<usize> {
    let n = crate::numerics::check_square(a)?;
    for j in 0..n {
        for i in 0..n {
            let value = a[(i, j)];
            if value < 0.0 || value.is_nan() {
                return Err(Error::NegativeEntry {
                    row: i,
                    col: j,
                    value,
                });
            }
        }
    }
    Ok(n)
}

/// Diagonal matrix of column sums, `D_i = sum_j A_ji`.
pub fn degree_matrix(a: &RealMatrix) -> Result<RealMatrix> {
    let n = check_non_negative(a)?;
    let mut d = RealMatrix::zeros(n, n);
    for i in 0..n {
        d[(i, i)] = a.column(i).sum();
    }
    Ok(d)
}

/// `T = A D^-1`. Zero-degree columns stay zero, so sinks never emit.
pub fn transition_from_adjacency(a: &RealMatrix) -> Result<RealMatrix> {
    let n = check_non_negative(a)?;
    let mut t = a.clone();
    for j in 0..n {
        let degree = a.column(j).sum();
        if degree > 0.0 {
            t.column_mut(j).unscale_mut(degree);
        }
    }
    Ok(t)
}
