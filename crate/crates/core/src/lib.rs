//! Stability analysis of load-balancing dynamics on base-station networks.
//!
//! Each base station `i` carries a load `l_i` that relaxes under its own
//! dynamics `f` and exchanges load with neighbours through a coupling `g`:
//!
//! ```text
//! dl_i/dt = f(l_i) + Σ_j a_ji g(l_j − l_i)
//! ```
//!
//! At the uniform equilibrium `r·1` (with `f(r) = 0`) the Jacobian is
//! `f'(r)·I − γ·Λᵀ`, where `γ = g'(0)` and `Λ = D − A` is the weighted
//! in-Laplacian. Stability therefore reduces to the sign of `f'(r)`, the sign
//! of `γ`, and the Laplacian spectral abscissa `ρ`.
//!
//! | Module | Purpose |
//! |--------|---------|
//! | [`netgen`] | PPP / Matérn-cluster layouts and distance/probability connectivity |
//! | [`graph`] | [`Network`], in-degree, in-Laplacian, Gershgorin discs |
//! | [`spectral`] | Dense eigenvalues, spectral abscissa, Jacobian assembly |
//! | [`stability`] | Scenario classifier and spectral oracle |
//! | [`dynamics`] | RK4 simulation of load and capacity dynamics |
//! | [`prob`] | Stability probability under uniform parameter noise |
//! | [`io`] | JSON / CSV file formats |

pub mod dynamics;
pub mod error;
pub mod graph;
pub mod io;
pub mod netgen;
pub mod prob;
pub mod quad;
pub mod rng;
pub mod spectral;
pub mod stability;
pub mod tol;

pub use error::{Error, ErrorCategory, Result};
pub use graph::{in_degree, in_laplacian, GershgorinDisc, Laplacian, Network};
pub use spectral::{assemble_jacobian, eigenvalues, spectral_abscissa, JacobianSpec, Spectrum};
pub use stability::{classify, verify_by_spectrum, Outcome, Scenario, StabilityVerdict};
