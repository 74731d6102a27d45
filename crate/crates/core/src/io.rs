//! File formats: network JSON, eigenvalue / disc / Laplacian / trajectory CSV
//! and initial-condition JSON.
//!
//! Network JSON:
//!
//! ```json
//! { "n": 3, "positions": [[0.1, 0.2], ...], "edges": [[0, 1, 1.0], ...],
//!   "seed": 42, "generator": { ... } }
//! ```
//!
//! Each edge `[j, i, w]` is the link `j → i` with weight `a_ji = w`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::graph::{GershgorinDisc, Laplacian, Network};
use crate::spectral::Spectrum;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDocument {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<[f64; 2]>>,
    pub edges: Vec<(usize, usize, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<serde_json::Value>,
}

impl NetworkDocument {
    pub fn from_network(network: &Network, seed: Option<u64>, generator: Option<serde_json::Value>) -> Self {
        Self {
            n: network.n(),
            positions: network.positions().map(<[_]>::to_vec),
            edges: network.edges(),
            seed,
            generator,
        }
    }

    pub fn to_network(&self) -> Result<Network> {
        let net = Network::from_edges(self.n, &self.edges)?;
        match &self.positions {
            Some(p) => net.with_positions(p.clone()),
            None => Ok(net),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Data(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Data(format!("network JSON: {e}")))
    }
}

/// `re,im` rows in solver order.
pub fn spectrum_csv(spectrum: &Spectrum) -> String {
    let mut out = String::from("re,im\n");
    for z in spectrum.eigenvalues() {
        let _ = writeln!(out, "{},{}", z.re, z.im);
    }
    out
}

/// `mode,index,center,radius` rows for row discs then column discs.
pub fn discs_csv(rows: &[GershgorinDisc], columns: &[GershgorinDisc]) -> String {
    let mut out = String::from("mode,index,center,radius\n");
    for (mode, discs) in [("rows", rows), ("columns", columns)] {
        for (i, d) in discs.iter().enumerate() {
            let _ = writeln!(out, "{mode},{i},{},{}", d.center, d.radius);
        }
    }
    out
}

/// Dense matrix, one CSV row per matrix row, no header.
pub fn laplacian_csv(lap: &Laplacian) -> String {
    let m = lap.matrix();
    let mut out = String::new();
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// `t,x1,...,xn` rows.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t");
    for k in 1..=traj.dim() {
        let _ = write!(out, ",x{k}");
    }
    out.push('\n');
    for (t, x) in traj.times.iter().zip(&traj.states) {
        let _ = write!(out, "{t}");
        for v in x {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

/// Initial state for a simulation, plus demands for the capacity system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialCondition {
    pub x0: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demands: Option<Vec<f64>>,
}

impl InitialCondition {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Data(format!("initial-condition JSON: {e}")))
    }
}
