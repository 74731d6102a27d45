//! Load-sharing networks, in-degree, in-Laplacian and Gershgorin discs.
//!
//! Adjacency follows the column convention of the load equations: entry
//! `(A)_{ji} = a_ji` is the weight of the edge `j → i`, so node `i`'s
//! in-degree is the `i`-th column sum and `Λ = D − A` satisfies `Λᵀ·1 = 0`.
//!
//! All matrices are dense; the eigenvalue step downstream costs `O(n³)`,
//! which keeps networks practical up to a few thousand nodes.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weighted directed network of base stations.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    adjacency: DMatrix<f64>,
    positions: Option<Vec<[f64; 2]>>,
}

impl Network {
    /// Wraps an adjacency matrix, checking it is square, finite,
    /// non-negative and has zero diagonal.
    pub fn new(adjacency: DMatrix<f64>) -> Result<Self> {
        let (r, c) = adjacency.shape();
        if r != c {
            return Err(Error::Shape(format!("adjacency is {r}x{c}")));
        }
        for j in 0..r {
            for i in 0..c {
                let a = adjacency[(j, i)];
                if !a.is_finite() {
                    return Err(Error::Data(format!("a[{j}][{i}] is not finite")));
                }
                if a < 0.0 {
                    return Err(Error::Data(format!("a[{j}][{i}] = {a} is negative")));
                }
                if i == j && a != 0.0 {
                    return Err(Error::Data(format!("self-loop at node {i}")));
                }
            }
        }
        Ok(Self {
            adjacency,
            positions: None,
        })
    }

    /// Builds a network from `(j, i, weight)` triples, each meaning `j → i`.
    /// Repeated triples accumulate.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut a = DMatrix::zeros(n, n);
        for &(j, i, w) in edges {
            if j >= n || i >= n {
                return Err(Error::Shape(format!("edge ({j}, {i}) out of range for n = {n}")));
            }
            a[(j, i)] += w;
        }
        Self::new(a)
    }

    /// Network with no edges.
    pub fn empty(n: usize) -> Self {
        Self {
            adjacency: DMatrix::zeros(n, n),
            positions: None,
        }
    }

    /// Undirected unit-weight graph (both directions of every listed pair).
    pub fn undirected(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let edges: Vec<_> = pairs.iter().flat_map(|&(u, v)| [(u, v, 1.0), (v, u, 1.0)]).collect();
        Self::from_edges(n, &edges)
    }

    pub fn with_positions(mut self, positions: Vec<[f64; 2]>) -> Result<Self> {
        if positions.len() != self.n() {
            return Err(Error::Shape(format!(
                "{} positions for {} nodes",
                positions.len(),
                self.n()
            )));
        }
        self.positions = Some(positions);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.adjacency.nrows()
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.adjacency
    }

    /// Weight `a_ji` of edge `j → i`.
    pub fn weight(&self, j: usize, i: usize) -> f64 {
        self.adjacency[(j, i)]
    }

    pub fn positions(&self) -> Option<&[[f64; 2]]> {
        self.positions.as_deref()
    }

    /// Directed edges `(j, i, a_ji)` with positive weight, in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let n = self.n();
        let mut out = Vec::new();
        for j in 0..n {
            for i in 0..n {
                let w = self.adjacency[(j, i)];
                if w > 0.0 {
                    out.push((j, i, w));
                }
            }
        }
        out
    }

    /// Sources `j` with `a_ji > 0`, for each target `i`.
    pub fn in_neighbours(&self) -> Vec<Vec<(usize, f64)>> {
        let n = self.n();
        (0..n)
            .map(|i| {
                (0..n)
                    .filter_map(|j| {
                        let w = self.adjacency[(j, i)];
                        (w > 0.0).then_some((j, w))
                    })
                    .collect()
            })
            .collect()
    }

    pub fn is_symmetric(&self) -> bool {
        self.adjacency == self.adjacency.transpose()
    }

    /// True when every positive weight equals one.
    pub fn is_unit_weighted(&self) -> bool {
        self.adjacency.iter().all(|&a| a == 0.0 || a == 1.0)
    }
}

/// Weighted in-degree `w_i = Σ_j a_ji`.
pub fn in_degree(network: &Network) -> DVector<f64> {
    let a = network.adjacency();
    DVector::from_iterator(a.ncols(), a.column_iter().map(|col| col.sum()))
}

/// Weighted in-Laplacian `Λ = diag(w) − A`.
#[derive(Debug, Clone, PartialEq)]
pub struct Laplacian(DMatrix<f64>);

impl Laplacian {
    /// Accepts an externally built Laplacian; only squareness is checked.
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Shape(format!("Laplacian is {}x{}", m.nrows(), m.ncols())));
        }
        Ok(Self(m))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    /// `‖Λᵀ·1‖∞`, zero up to rounding for any in-Laplacian.
    pub fn kernel_residual(&self) -> f64 {
        self.0.column_iter().map(|col| col.sum().abs()).fold(0.0, f64::max)
    }
}

pub fn in_laplacian(network: &Network) -> Laplacian {
    let w = in_degree(network);
    Laplacian(DMatrix::from_diagonal(&w) - network.adjacency())
}

/// Which off-diagonal sums define the disc radii.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiscMode {
    Rows,
    Columns,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GershgorinDisc {
    pub center: f64,
    pub radius: f64,
}

impl GershgorinDisc {
    /// Distance from `z` to the disc (zero inside).
    pub fn distance(&self, z: Complex64) -> f64 {
        ((z - Complex64::new(self.center, 0.0)).norm() - self.radius).max(0.0)
    }

    pub fn contains(&self, z: Complex64, tol: f64) -> bool {
        self.distance(z) <= tol
    }

    /// Rightmost real point of the disc.
    pub fn right_edge(&self) -> f64 {
        self.center + self.radius
    }
}

/// Disc `i` is centred at `M_ii` with radius `Σ_{k≠i} |M_ik|` (rows) or
/// `Σ_{k≠i} |M_ki|` (columns).
pub fn gershgorin_discs(m: &DMatrix<f64>, mode: DiscMode) -> Result<Vec<GershgorinDisc>> {
    if !m.is_square() {
        return Err(Error::Shape(format!("matrix is {}x{}", m.nrows(), m.ncols())));
    }
    let n = m.nrows();
    Ok((0..n)
        .map(|i| {
            let radius = (0..n)
                .filter(|&k| k != i)
                .map(|k| match mode {
                    DiscMode::Rows => m[(i, k)].abs(),
                    DiscMode::Columns => m[(k, i)].abs(),
                })
                .sum();
            GershgorinDisc {
                center: m[(i, i)],
                radius,
            }
        })
        .collect())
}

/// Whether `z` lies within `tol` of the union of `discs`.
pub fn in_disc_union(discs: &[GershgorinDisc], z: Complex64, tol: f64) -> bool {
    discs.iter().any(|d| d.contains(z, tol))
}
