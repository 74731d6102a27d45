//! Stability probability under uniform parameter noise.
//!
//! The perturbed linear system is
//!
//! ```text
//! dl_i/dt = (β + ζ_i)(1 − l_i) + Σ_j a_ji (γ + ξ_ji)(l_j − l_i)
//! ζ_i ~ U[−b, b],   ξ_ji ~ U[−c, c]   (independent, one ξ per ordered edge)
//! ```
//!
//! Row `i` of its Jacobian has Gershgorin right edge
//! `s_i = −β − ζ_i + Σ_j a_ji (|γ + ξ_ji| − γ − ξ_ji)`, and `s_i < 0` for
//! every node certifies stability. The events `{s_i < 0}` involve disjoint
//! noise variables, so `Π_i P(s_i < 0)` is an exact probability and a lower
//! bound on the probability that the system is stable.
//!
//! On unit-weight networks each in-edge contributes `X = |γ+ξ| − γ − ξ`,
//! which is `0` with probability `(1 + γ/c)/2` and `U[0, 2(c − γ)]`
//! otherwise. Their sum `Y` over the `w_i` in-edges is a binomial mixture of
//! scaled Irwin–Hall laws plus an atom at zero.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Network;
use crate::quad;
use crate::rng::{substream, StreamRng, STREAM_MC_BASE, STREAM_PERTURB};
use crate::spectral::{eigenvalues, spectral_abscissa};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Half-width of the noise on β.
    pub b: f64,
    /// Half-width of the noise on γ.
    pub c: f64,
}

impl NoiseModel {
    pub fn new(b: f64, c: f64) -> Result<Self> {
        let m = Self { b, c };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b.is_finite() && self.b >= 0.0) {
            return Err(Error::param("b", format!("b ≥ 0 required, got {}", self.b)));
        }
        if !(self.c.is_finite() && self.c >= 0.0) {
            return Err(Error::param("c", format!("c ≥ 0 required, got {}", self.c)));
        }
        Ok(())
    }
}

/// One draw of every noise variable.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationSample {
    pub zeta: Vec<f64>,
    /// `ξ_ji` keyed by ordered edge `(j, i)`.
    pub xi: BTreeMap<(usize, usize), f64>,
}

fn uniform_sym(half_width: f64, rng: &mut StreamRng) -> f64 {
    if half_width == 0.0 {
        0.0
    } else {
        rng.random_range(-half_width..=half_width)
    }
}

fn draw_with(network: &Network, noise: &NoiseModel, rng: &mut StreamRng) -> PerturbationSample {
    let zeta = (0..network.n()).map(|_| uniform_sym(noise.b, rng)).collect();
    let xi = network
        .edges()
        .into_iter()
        .map(|(j, i, _)| ((j, i), uniform_sym(noise.c, rng)))
        .collect();
    PerturbationSample { zeta, xi }
}

/// Draws `ζ` for every node and `ξ` for every edge, in row-major edge order.
pub fn draw_perturbation(network: &Network, noise: &NoiseModel, seed: u64) -> Result<PerturbationSample> {
    noise.validate()?;
    let mut rng = substream(seed, STREAM_PERTURB);
    Ok(draw_with(network, noise, &mut rng))
}

fn check_sample(network: &Network, sample: &PerturbationSample) -> Result<()> {
    if sample.zeta.len() != network.n() {
        return Err(Error::Shape(format!(
            "{} ζ values for {} nodes",
            sample.zeta.len(),
            network.n()
        )));
    }
    if let Some(&(j, i)) = sample.xi.keys().find(|&&(j, i)| j >= network.n() || i >= network.n()) {
        return Err(Error::Shape(format!("ξ for edge ({j}, {i}) outside the network")));
    }
    Ok(())
}

fn check_rates(beta: f64, gamma: f64) -> Result<()> {
    if !(beta.is_finite() && gamma.is_finite()) {
        return Err(Error::Data(format!("non-finite rates β = {beta}, γ = {gamma}")));
    }
    Ok(())
}

/// `J_ii = −β − ζ_i − Σ_j a_ji(γ + ξ_ji)`, `J_ij = a_ji(γ + ξ_ji)`.
pub fn perturbed_jacobian(
    network: &Network,
    beta: f64,
    gamma: f64,
    sample: &PerturbationSample,
) -> Result<DMatrix<f64>> {
    check_rates(beta, gamma)?;
    check_sample(network, sample)?;
    let n = network.n();
    let mut jac = DMatrix::zeros(n, n);
    for i in 0..n {
        jac[(i, i)] = -beta - sample.zeta[i];
    }
    for (j, i, a) in network.edges() {
        let xi = sample.xi.get(&(j, i)).copied().unwrap_or(0.0);
        let rate = a * (gamma + xi);
        jac[(i, j)] += rate;
        jac[(i, i)] -= rate;
    }
    Ok(jac)
}

/// Draws one perturbation from `seed` and assembles its Jacobian.
pub fn sample_perturbed_jacobian(
    network: &Network,
    beta: f64,
    gamma: f64,
    noise: &NoiseModel,
    seed: u64,
) -> Result<DMatrix<f64>> {
    let sample = draw_perturbation(network, noise, seed)?;
    perturbed_jacobian(network, beta, gamma, &sample)
}

/// `s_i = −β − ζ_i + Σ_j a_ji (|γ + ξ_ji| − γ − ξ_ji)`.
pub fn gershgorin_margin(network: &Network, beta: f64, gamma: f64, sample: &PerturbationSample) -> Result<Vec<f64>> {
    check_rates(beta, gamma)?;
    check_sample(network, sample)?;
    let mut s: Vec<f64> = sample.zeta.iter().map(|z| -beta - z).collect();
    for (j, i, a) in network.edges() {
        let rate = gamma + sample.xi.get(&(j, i)).copied().unwrap_or(0.0);
        s[i] += a * (rate.abs() - rate);
    }
    Ok(s)
}

/// Law of `Y = X_1 + … + X_n` for gated uniforms `X_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct GatedUniformSum {
    n_terms: usize,
    width: f64,
    /// `P(#active = m)` for `m = 0..=n_terms`.
    weights: Vec<f64>,
}

impl GatedUniformSum {
    pub fn new(n_terms: usize, gamma: f64, c: f64) -> Result<Self> {
        if !(gamma.is_finite() && c.is_finite()) {
            return Err(Error::Data(format!("non-finite γ = {gamma} or c = {c}")));
        }
        if gamma < 0.0 {
            return Err(Error::param("gamma", format!("γ ≥ 0 required, got {gamma}")));
        }
        if c <= gamma {
            return Err(Error::Domain(format!(
                "c = {c} ≤ γ = {gamma}: every X is 0, use the deterministic branch"
            )));
        }
        let p = 0.5 * (1.0 - gamma / c);
        let q = 0.5 * (1.0 + gamma / c);
        Ok(Self {
            n_terms,
            width: 2.0 * (c - gamma),
            weights: binomial_pmf(n_terms, p, q),
        })
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    /// Support of each active term is `[0, width]`.
    pub fn width(&self) -> f64 {
        self.width
    }

    /// `P(Y = 0)`.
    pub fn atom(&self) -> f64 {
        self.weights[0]
    }

    /// Density of the continuous part of `Y`.
    pub fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 || self.n_terms == 0 {
            return 0.0;
        }
        let u = x / self.width;
        let ih = irwin_hall_table(u, self.n_terms, Kind::Density);
        (1..=self.n_terms).map(|m| self.weights[m] * ih[m - 1]).sum::<f64>() / self.width
    }

    /// `P(Y ≤ x)`, atom included.
    pub fn cdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        if self.n_terms == 0 {
            return 1.0;
        }
        let u = x / self.width;
        let ih = irwin_hall_table(u, self.n_terms, Kind::Cumulative);
        let v = self.atom() + (1..=self.n_terms).map(|m| self.weights[m] * ih[m - 1]).sum::<f64>();
        v.min(1.0)
    }
}

fn binomial_pmf(n: usize, p: f64, q: f64) -> Vec<f64> {
    let ln_fact: Vec<f64> = std::iter::once(0.0)
        .chain((1..=n).scan(0.0, |acc, k| {
            *acc += (k as f64).ln();
            Some(*acc)
        }))
        .collect();
    (0..=n)
        .map(|m| {
            let ln_c = ln_fact[n] - ln_fact[m] - ln_fact[n - m];
            let ln_pm = if m == 0 { 0.0 } else { m as f64 * p.ln() };
            let ln_qm = if n == m { 0.0 } else { (n - m) as f64 * q.ln() };
            (ln_c + ln_pm + ln_qm).exp()
        })
        .collect()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Density,
    Cumulative,
}

/// Standard Irwin–Hall density or CDF at `u` for `m = 1..=n_max` terms.
///
/// Uses `f_m(u) = [u f_{m−1}(u) + (m − u) f_{m−1}(u − 1)] / (m − 1)` and
/// `F_m(u) = [u F_{m−1}(u) + (m − u) F_{m−1}(u − 1)] / m`, evaluated only
/// inside the support where both weights are positive, so no cancellation
/// occurs (unlike the alternating closed form).
fn irwin_hall_table(u: f64, n_max: usize, kind: Kind) -> Vec<f64> {
    let outside = |v: f64, m: usize| -> Option<f64> {
        if v <= 0.0 {
            Some(0.0)
        } else if v >= m as f64 {
            Some(if kind == Kind::Cumulative { 1.0 } else { 0.0 })
        } else {
            None
        }
    };
    let mut out = Vec::with_capacity(n_max);
    if n_max == 0 {
        return out;
    }
    let mut cur: Vec<f64> = (0..n_max)
        .map(|k| {
            let v = u - k as f64;
            outside(v, 1).unwrap_or(match kind {
                Kind::Density => 1.0,
                Kind::Cumulative => v,
            })
        })
        .collect();
    out.push(cur[0]);
    for m in 2..=n_max {
        let mf = m as f64;
        let denom = match kind {
            Kind::Density => mf - 1.0,
            Kind::Cumulative => mf,
        };
        for k in 0..=(n_max - m) {
            let v = u - k as f64;
            cur[k] = outside(v, m).unwrap_or_else(|| (v * cur[k] + (mf - v) * cur[k + 1]) / denom);
        }
        out.push(cur[0]);
    }
    out
}

/// Continuous-part density of `Y` at `x` for `n_terms` gated uniforms.
/// The atom `P(Y = 0)` is available from [`GatedUniformSum::atom`].
pub fn irwin_hall_mixture_pdf(x: f64, n_terms: usize, gamma: f64, c: f64) -> Result<f64> {
    if n_terms == 0 {
        return Err(Error::param("n_terms", "at least one term required"));
    }
    if !x.is_finite() {
        return Err(Error::Data(format!("x = {x}")));
    }
    Ok(GatedUniformSum::new(n_terms, gamma, c)?.pdf(x))
}

/// `P(−β − ζ < 0)` for `ζ ~ U[−b, b]`.
fn uniform_tail(beta: f64, b: f64) -> f64 {
    if b > 0.0 {
        ((beta + b) / (2.0 * b)).clamp(0.0, 1.0)
    } else if beta > 0.0 {
        1.0
    } else {
        0.0
    }
}

/// `P(s_i < 0)` for a node with `degree` unit-weight in-edges.
///
/// Computed as `(1/2b) ∫_{−b}^{b} P(Y < β + z) dz` with adaptive
/// Gauss–Kronrod, split at the knots of the piecewise-polynomial CDF.
pub fn prob_s_negative(beta: f64, b: f64, gamma: f64, c: f64, degree: usize) -> Result<f64> {
    if ![beta, b, gamma, c].iter().all(|v| v.is_finite()) {
        return Err(Error::Data(format!(
            "non-finite input β = {beta}, b = {b}, γ = {gamma}, c = {c}"
        )));
    }
    if beta <= 0.0 {
        return Err(Error::param("beta", format!("β > 0 required, got {beta}")));
    }
    if gamma < 0.0 {
        return Err(Error::param("gamma", format!("γ ≥ 0 required, got {gamma}")));
    }
    NoiseModel::new(b, c)?;

    if c <= gamma && b < beta {
        return Ok(1.0);
    }
    if c <= gamma || degree == 0 {
        return Ok(uniform_tail(beta, b));
    }
    let y = GatedUniformSum::new(degree, gamma, c)?;
    if b == 0.0 {
        return Ok(y.cdf(beta));
    }
    let knots: Vec<f64> = (0..=degree).map(|k| k as f64 * y.width() - beta).collect();
    let integral = quad::integrate(|z| y.cdf(beta + z), -b, b, &knots, 1e-10);
    Ok((integral / (2.0 * b)).clamp(0.0, 1.0))
}

/// Monte Carlo estimate of the stability probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub trials: u64,
    pub stable: u64,
    pub estimate: f64,
    pub std_error: f64,
    pub ci95: [f64; 2],
    pub seed: u64,
    /// Trials where every `s_i < 0`.
    pub margin_certified: u64,
    /// Certified trials whose spectrum was nonetheless unstable; always 0
    /// unless the Gershgorin argument or the eigensolver is broken.
    pub sufficiency_violations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityBound {
    pub beta: f64,
    pub b: f64,
    pub gamma: f64,
    pub c: f64,
    pub degrees: Vec<usize>,
    pub per_node_prob: Vec<f64>,
    pub lower_bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc: Option<McEstimate>,
}

/// Product of per-node `P(s_i < 0)` using each node's in-degree.
/// Requires a unit-weight network.
pub fn stability_lower_bound(network: &Network, beta: f64, b: f64, gamma: f64, c: f64) -> Result<StabilityBound> {
    if !network.is_unit_weighted() {
        return Err(Error::Domain("the probability bound needs unit edge weights".into()));
    }
    let degrees: Vec<usize> = network.in_neighbours().iter().map(Vec::len).collect();
    let mut cache: BTreeMap<usize, f64> = BTreeMap::new();
    let mut per_node_prob = Vec::with_capacity(degrees.len());
    for &d in &degrees {
        let p = match cache.get(&d) {
            Some(&p) => p,
            None => {
                let p = prob_s_negative(beta, b, gamma, c, d)?;
                cache.insert(d, p);
                p
            }
        };
        per_node_prob.push(p);
    }
    let lower_bound = per_node_prob.iter().product::<f64>().clamp(0.0, 1.0);
    Ok(StabilityBound {
        beta,
        b,
        gamma,
        c,
        degrees,
        per_node_prob,
        lower_bound,
        mc: None,
    })
}

/// Fraction of sampled perturbed Jacobians with `max Re(eig) < 0`.
///
/// Trial `k` draws from its own substream of `seed`, so the result does not
/// depend on how rayon schedules the trials.
pub fn mc_stability_probability(
    network: &Network,
    beta: f64,
    gamma: f64,
    noise: &NoiseModel,
    trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    check_rates(beta, gamma)?;
    noise.validate()?;
    if trials == 0 {
        return Err(Error::param("trials", "at least one trial required"));
    }
    let (stable, certified, violations) = (0..trials)
        .into_par_iter()
        .map(|k| -> Result<(u64, u64, u64)> {
            let mut rng = substream(seed, STREAM_MC_BASE + k);
            let sample = draw_with(network, noise, &mut rng);
            let jac = perturbed_jacobian(network, beta, gamma, &sample)?;
            let is_stable = spectral_abscissa(&eigenvalues(&jac)?)? < 0.0;
            let certified = gershgorin_margin(network, beta, gamma, &sample)?
                .iter()
                .all(|&s| s < 0.0);
            Ok((is_stable as u64, certified as u64, (certified && !is_stable) as u64))
        })
        .try_reduce(|| (0, 0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1, a.2 + b.2)))?;

    let estimate = stable as f64 / trials as f64;
    let std_error = (estimate * (1.0 - estimate) / trials as f64).sqrt();
    Ok(McEstimate {
        trials,
        stable,
        estimate,
        std_error,
        ci95: [
            (estimate - 1.96 * std_error).max(0.0),
            (estimate + 1.96 * std_error).min(1.0),
        ],
        seed,
        margin_certified: certified,
        sufficiency_violations: violations,
    })
}
