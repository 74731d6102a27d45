//! Numerical tolerances shared across the crate.

/// Zero tolerance for exact identities such as `Λᵀ·1 = 0`.
pub const KERNEL: f64 = 1e-12;

/// Distance tolerance for eigenvalue-in-disc containment checks and for
/// the strict negativity margin of the spectral stability oracle.
pub const CONTAINMENT: f64 = 1e-9;

/// Relative tolerance at which `|f'(r)|` and `|γ|ρ` are considered equal.
pub const BOUNDARY_REL: f64 = 1e-9;

/// Maximum admissible `|g(0)|` for a general coupling function.
pub const COUPLING_AT_ZERO: f64 = 1e-12;

/// Capacity values at or below this are treated as the singular set.
pub const CAPACITY_FLOOR: f64 = 1e-12;

/// Largest accepted equilibrium residual `‖F(eq)‖∞`.
pub const EQUILIBRIUM_RESIDUAL: f64 = 1e-10;

/// Target residual `|f(r)|` for bracketed root finding.
pub const ROOT_RESIDUAL: f64 = 1e-12;
