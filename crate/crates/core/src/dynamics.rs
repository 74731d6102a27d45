//! Load dynamics on a network, the capacity-space transform, uniform
//! equilibria and contraction rates.
//!
//! Three families share one vector field interface:
//!
//! ```text
//! LinearLoad          dl_i/dt = β(1 − l_i) + Σ_j a_ji γ(l_j − l_i)
//! GeneralScalar       dl_i/dt = f(l_i) + Σ_j a_ji g(l_j − l_i)
//! CapacityTransformed dc_i/dt = β c_i(1 − c_i/d_i) + Σ_j γ a_ji c_i(1 − c_i d_j/(c_j d_i))
//! ```
//!
//! The capacity system is the load system seen through `c_i = d_i / l_i`;
//! its equilibrium `(d_1, …, d_n)` corresponds to `l = 1`.

// Negated comparisons below deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{in_laplacian, Network};
use crate::spectral::JacobianSpec;
use crate::tol;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// User-supplied self-dynamics `f` and coupling `g`, with a bracket in
/// which `f` changes sign. Both are assumed twice differentiable.
#[derive(Clone)]
pub struct GeneralScalar {
    f: ScalarFn,
    g: ScalarFn,
    bracket: (f64, f64),
}

impl GeneralScalar {
    pub fn new(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
        bracket: (f64, f64),
    ) -> Result<Self> {
        let g0 = g(0.0);
        if !(g0.abs() < tol::COUPLING_AT_ZERO) {
            return Err(Error::param("g", format!("g(0) must vanish, got {g0:e}")));
        }
        let (lo, hi) = bracket;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::param(
                "bracket",
                format!("need finite lo < hi, got [{lo}, {hi}]"),
            ));
        }
        Ok(Self {
            f: Arc::new(f),
            g: Arc::new(g),
            bracket,
        })
    }

    pub fn f(&self, l: f64) -> f64 {
        (self.f)(l)
    }

    pub fn g(&self, x: f64) -> f64 {
        (self.g)(x)
    }

    pub fn bracket(&self) -> (f64, f64) {
        self.bracket
    }
}

impl fmt::Debug for GeneralScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneralScalar")
            .field("bracket", &self.bracket)
            .finish_non_exhaustive()
    }
}

/// Linear load dynamics written in capacity coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityTransformed {
    pub beta: f64,
    pub gamma: f64,
    demands: Vec<f64>,
}

impl CapacityTransformed {
    pub fn new(beta: f64, gamma: f64, demands: Vec<f64>) -> Result<Self> {
        finite("beta", beta)?;
        finite("gamma", gamma)?;
        if let Some(d) = demands.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
            return Err(Error::param("demands", format!("every d_i must be > 0, got {d}")));
        }
        Ok(Self { beta, gamma, demands })
    }

    pub fn demands(&self) -> &[f64] {
        &self.demands
    }
}

#[derive(Debug, Clone)]
pub enum DynamicsSpec {
    LinearLoad { beta: f64, gamma: f64 },
    GeneralScalar(GeneralScalar),
    CapacityTransformed(CapacityTransformed),
}

impl DynamicsSpec {
    pub fn linear(beta: f64, gamma: f64) -> Result<Self> {
        finite("beta", beta)?;
        finite("gamma", gamma)?;
        Ok(DynamicsSpec::LinearLoad { beta, gamma })
    }

    fn check_dimension(&self, network: &Network) -> Result<()> {
        if let DynamicsSpec::CapacityTransformed(cap) = self {
            if cap.demands.len() != network.n() {
                return Err(Error::Shape(format!(
                    "{} demands for {} nodes",
                    cap.demands.len(),
                    network.n()
                )));
            }
        }
        Ok(())
    }

    /// `(f'(r), g'(0))` at the uniform equilibrium `r`. Exact for the
    /// linear family, a five-point central difference for general `f, g`.
    pub fn linearization(&self, r: f64) -> Result<(f64, f64)> {
        match self {
            DynamicsSpec::LinearLoad { beta, gamma } => Ok((-beta, *gamma)),
            DynamicsSpec::GeneralScalar(gs) => {
                let h = 1e-3 * r.abs().max(1.0);
                let d = |func: &dyn Fn(f64) -> f64, x: f64| {
                    (func(x - 2.0 * h) - 8.0 * func(x - h) + 8.0 * func(x + h) - func(x + 2.0 * h)) / (12.0 * h)
                };
                Ok((d(&*gs.f, r), d(&*gs.g, 0.0)))
            }
            DynamicsSpec::CapacityTransformed(_) => Err(Error::Domain(
                "capacity dynamics are not of the f/g form; linearize in load space".into(),
            )),
        }
    }

    /// Evaluates the vector field at `x`.
    pub fn rate(&self, network: &Network, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dimension(network)?;
        if x.len() != network.n() {
            return Err(Error::Shape(format!(
                "state has {} entries for {} nodes",
                x.len(),
                network.n()
            )));
        }
        let field = Field::new(self, network);
        let mut out = vec![0.0; x.len()];
        field.eval(x, &mut out, 0.0)?;
        Ok(out)
    }
}

fn finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be finite, got {v}")))
    }
}

/// Vector field with in-neighbour lists precomputed.
struct Field<'a> {
    spec: &'a DynamicsSpec,
    nbrs: Vec<Vec<(usize, f64)>>,
}

impl<'a> Field<'a> {
    fn new(spec: &'a DynamicsSpec, network: &Network) -> Self {
        Self {
            spec,
            nbrs: network.in_neighbours(),
        }
    }

    fn eval(&self, x: &[f64], out: &mut [f64], t: f64) -> Result<()> {
        match self.spec {
            DynamicsSpec::LinearLoad { beta, gamma } => {
                for (i, o) in out.iter_mut().enumerate() {
                    let coupling: f64 = self.nbrs[i].iter().map(|&(j, a)| a * (x[j] - x[i])).sum();
                    *o = beta * (1.0 - x[i]) + gamma * coupling;
                }
            }
            DynamicsSpec::GeneralScalar(gs) => {
                for (i, o) in out.iter_mut().enumerate() {
                    let coupling: f64 = self.nbrs[i].iter().map(|&(j, a)| a * gs.g(x[j] - x[i])).sum();
                    *o = gs.f(x[i]) + coupling;
                }
            }
            DynamicsSpec::CapacityTransformed(cap) => {
                if let Some((node, &value)) = x.iter().enumerate().find(|(_, c)| !(**c > tol::CAPACITY_FLOOR)) {
                    return Err(Error::Singularity { node, value, time: t });
                }
                let d = &cap.demands;
                for (i, o) in out.iter_mut().enumerate() {
                    let ci = x[i];
                    let coupling: f64 = self.nbrs[i]
                        .iter()
                        .map(|&(j, a)| a * ci * (1.0 - ci * d[j] / (x[j] * d[i])))
                        .sum();
                    *o = cap.beta * ci * (1.0 - ci / d[i]) + cap.gamma * coupling;
                }
            }
        }
        Ok(())
    }
}

/// Sampled solution: `states[k]` is the state at `times[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Every `stride`-th sample plus the final one.
    pub fn thinned(&self, stride: usize) -> Trajectory {
        let stride = stride.max(1);
        let last = self.len().saturating_sub(1);
        let keep: Vec<usize> = (0..self.len()).filter(|k| k % stride == 0 || *k == last).collect();
        Trajectory {
            times: keep.iter().map(|&k| self.times[k]).collect(),
            states: keep.iter().map(|&k| self.states[k].clone()).collect(),
        }
    }
}

/// Fixed-step classical RK4 from `x0` over `[0, t_end]`. The last step is
/// shortened when `t_end` is not a multiple of `dt`.
pub fn simulate(spec: &DynamicsSpec, network: &Network, x0: &[f64], t_end: f64, dt: f64) -> Result<Trajectory> {
    spec.check_dimension(network)?;
    let n = network.n();
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::param("dt", format!("dt > 0 required, got {dt}")));
    }
    if !(t_end.is_finite() && t_end >= dt) {
        return Err(Error::param("t_end", format!("t_end ≥ dt required, got {t_end}")));
    }
    if x0.len() != n {
        return Err(Error::Shape(format!(
            "initial state has {} entries for {n} nodes",
            x0.len()
        )));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("x0", "initial state must be finite"));
    }
    if matches!(spec, DynamicsSpec::CapacityTransformed(_)) && x0.iter().any(|&c| !(c > tol::CAPACITY_FLOOR)) {
        return Err(Error::param("c0", "initial capacities must be strictly positive"));
    }

    let field = Field::new(spec, network);
    let steps = ((t_end / dt) - 1e-9).ceil().max(1.0) as usize;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(0.0);
    states.push(x0.to_vec());

    let mut x = x0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    let mut t = 0.0;
    for step in 1..=steps {
        let t_next = if step == steps { t_end } else { step as f64 * dt };
        let h = t_next - t;
        field.eval(&x, &mut k1, t)?;
        axpy(&x, 0.5 * h, &k1, &mut tmp);
        field.eval(&tmp, &mut k2, t + 0.5 * h)?;
        axpy(&x, 0.5 * h, &k2, &mut tmp);
        field.eval(&tmp, &mut k3, t + 0.5 * h)?;
        axpy(&x, h, &k3, &mut tmp);
        field.eval(&tmp, &mut k4, t + h)?;
        for i in 0..n {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        t = t_next;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { time: t });
        }
        if matches!(spec, DynamicsSpec::CapacityTransformed(_)) {
            if let Some((node, &value)) = x.iter().enumerate().find(|(_, c)| !(**c > tol::CAPACITY_FLOOR)) {
                return Err(Error::Singularity { node, value, time: t });
            }
        }
        times.push(t);
        states.push(x.clone());
    }
    Ok(Trajectory { times, states })
}

fn axpy(x: &[f64], a: f64, k: &[f64], out: &mut [f64]) {
    for ((o, xi), ki) in out.iter_mut().zip(x).zip(k) {
        *o = xi + a * ki;
    }
}

/// Simulates the capacity system from strictly positive `c0`.
pub fn simulate_capacity(
    spec: &CapacityTransformed,
    network: &Network,
    c0: &[f64],
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    simulate(&DynamicsSpec::CapacityTransformed(spec.clone()), network, c0, t_end, dt)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport {
    /// Root of the self-dynamics in load space.
    pub r: f64,
    pub equilibrium: Vec<f64>,
    /// `‖F(equilibrium)‖∞`.
    pub residual: f64,
}

/// Uniform equilibrium `r·1` (or `d` for the capacity system) with its
/// vector-field residual on `network`.
pub fn find_uniform_equilibrium(spec: &DynamicsSpec, network: &Network) -> Result<EquilibriumReport> {
    spec.check_dimension(network)?;
    let n = network.n();
    let (r, equilibrium) = match spec {
        DynamicsSpec::LinearLoad { .. } => (1.0, vec![1.0; n]),
        DynamicsSpec::GeneralScalar(gs) => {
            let r = bracket_root(|l| gs.f(l), gs.bracket)?;
            (r, vec![r; n])
        }
        DynamicsSpec::CapacityTransformed(cap) => (1.0, cap.demands.clone()),
    };
    let residual = spec
        .rate(network, &equilibrium)?
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    if !(residual < tol::EQUILIBRIUM_RESIDUAL) {
        return Err(Error::Domain(format!("equilibrium residual {residual:e} too large")));
    }
    Ok(EquilibriumReport {
        r,
        equilibrium,
        residual,
    })
}

/// Bisection to floating-point resolution on a sign-changing bracket.
fn bracket_root(f: impl Fn(f64) -> f64, (lo, hi): (f64, f64)) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::RootNotFound { lo, hi });
    }
    for _ in 0..2000 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    let r = if f(a).abs() <= f(b).abs() { a } else { b };
    if f(r).abs() < tol::ROOT_RESIDUAL {
        Ok(r)
    } else {
        Err(Error::RootNotFound { lo, hi })
    }
}

/// Linearization at the uniform equilibrium, ready for
/// [`assemble_jacobian`](crate::spectral::assemble_jacobian).
pub fn jacobian_spec(spec: &DynamicsSpec, network: &Network) -> Result<JacobianSpec> {
    let eq = find_uniform_equilibrium(spec, network)?;
    let (fprime_r, gamma) = spec.linearization(eq.r)?;
    Ok(JacobianSpec {
        fprime_r,
        gamma,
        laplacian: in_laplacian(network),
    })
}

/// Central-difference Jacobian of the vector field at `x` with step `h`.
pub fn numerical_jacobian(spec: &DynamicsSpec, network: &Network, x: &[f64], h: f64) -> Result<DMatrix<f64>> {
    let n = network.n();
    let mut jac = DMatrix::zeros(n, n);
    let mut xp = x.to_vec();
    for k in 0..n {
        xp[k] = x[k] + h;
        let fp = spec.rate(network, &xp)?;
        xp[k] = x[k] - h;
        let fm = spec.rate(network, &xp)?;
        xp[k] = x[k];
        for i in 0..n {
            jac[(i, k)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// Decay rate of `‖x(t) − eq‖₂`: negated least-squares slope of its log
/// over the final half of the samples, where the slowest mode dominates.
pub fn estimate_contraction_rate(traj: &Trajectory, equilibrium: &[f64]) -> Result<f64> {
    if traj.len() < 4 {
        return Err(Error::Estimation(format!(
            "need at least 4 samples, got {}",
            traj.len()
        )));
    }
    if traj.dim() != equilibrium.len() {
        return Err(Error::Shape(format!(
            "equilibrium has {} entries, trajectory {}",
            equilibrium.len(),
            traj.dim()
        )));
    }
    let dev: Vec<f64> = traj
        .states
        .iter()
        .map(|x| {
            x.iter()
                .zip(equilibrium)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    let (first, last) = (dev[0], dev[dev.len() - 1]);
    if !(last < first) {
        return Err(Error::Estimation(format!(
            "trajectory does not converge (deviation {first:e} → {last:e})"
        )));
    }
    let start = traj.len() / 2;
    let window = start..traj.len();
    if let Some(k) = window.clone().find(|&k| !(dev[k] > tol::KERNEL)) {
        return Err(Error::Estimation(format!(
            "deviation {:e} at t = {} is below the fitting floor",
            dev[k], traj.times[k]
        )));
    }
    let m = window.len() as f64;
    let ts = &traj.times[window.clone()];
    let ys: Vec<f64> = dev[window].iter().map(|d| d.ln()).collect();
    let t_mean = ts.iter().sum::<f64>() / m;
    let y_mean = ys.iter().sum::<f64>() / m;
    let sxy: f64 = ts.iter().zip(&ys).map(|(t, y)| (t - t_mean) * (y - y_mean)).sum();
    let sxx: f64 = ts.iter().map(|t| (t - t_mean).powi(2)).sum();
    Ok(-sxy / sxx)
}
