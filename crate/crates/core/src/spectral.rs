//! Dense eigenvalues, spectral abscissa and Jacobian assembly at `r·1`.
//!
//! The eigensolver balances the matrix, reduces it to upper Hessenberg form
//! with Householder reflections, and runs the Francis implicit double-shift
//! QR iteration. Eigenvalues of a real matrix come out as exact conjugate
//! pairs. Cost is `O(n³)` time and `O(n²)` memory, single threaded.

#![allow(clippy::needless_range_loop)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Laplacian;

/// Multiset of eigenvalues of an `n × n` real matrix, in solver order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(eigenvalues: Vec<Complex64>) -> Self {
        Self { eigenvalues }
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn source_dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Eigenvalues sorted by real part, then imaginary part.
    pub fn sorted(&self) -> Vec<Complex64> {
        let mut v = self.eigenvalues.clone();
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    pub fn min_real(&self) -> Option<f64> {
        self.eigenvalues.iter().map(|z| z.re).reduce(f64::min)
    }

    /// Largest distance between the spectrum and its complex conjugate.
    pub fn conjugate_pairing_error(&self) -> f64 {
        let conj: Vec<_> = self.eigenvalues.iter().map(|z| z.conj()).collect();
        greedy_match_distance(&self.eigenvalues, &conj).unwrap_or(f64::INFINITY)
    }
}

/// `max Re(λ)` over a non-empty spectrum.
pub fn spectral_abscissa(s: &Spectrum) -> Result<f64> {
    s.eigenvalues
        .iter()
        .map(|z| z.re)
        .reduce(f64::max)
        .ok_or_else(|| Error::Data("spectral abscissa of an empty spectrum".into()))
}

/// Pairs each element of `a` with its nearest unused element of `b` and
/// returns the largest pair distance; `None` when the lengths differ.
pub fn greedy_match_distance(a: &[Complex64], b: &[Complex64]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut used = vec![false; b.len()];
    let mut worst = 0.0_f64;
    for za in a {
        let (k, d) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, zb)| (k, (za - zb).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))?;
        used[k] = true;
        worst = worst.max(d);
    }
    Some(worst)
}

/// All eigenvalues of a square real matrix.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Spectrum> {
    if !m.is_square() {
        return Err(Error::Shape(format!("matrix is {}x{}", m.nrows(), m.ncols())));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::Data("matrix has non-finite entries".into()));
    }
    let n = m.nrows();
    let mut a = Dense::from_matrix(m);
    a.balance();
    a.reduce_to_hessenberg();
    let eigenvalues = a.hessenberg_qr().ok_or(Error::NoConvergence(n))?;
    Ok(Spectrum { eigenvalues })
}

/// Row-major working copy used by the eigensolver.
struct Dense {
    n: usize,
    a: Vec<f64>,
}

impl Dense {
    fn from_matrix(m: &DMatrix<f64>) -> Self {
        let n = m.nrows();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = m[(i, j)];
            }
        }
        Self { n, a }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    #[inline]
    fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.a[i * self.n + j]
    }

    /// Diagonal similarity by powers of two so that row and column norms
    /// are comparable. Exact in floating point.
    fn balance(&mut self) {
        const RADIX: f64 = 2.0;
        let n = self.n;
        let sqrdx = RADIX * RADIX;
        let mut done = false;
        while !done {
            done = true;
            for i in 0..n {
                let mut c = 0.0;
                let mut r = 0.0;
                for j in 0..n {
                    if j != i {
                        c += self.at(j, i).abs();
                        r += self.at(i, j).abs();
                    }
                }
                if c == 0.0 || r == 0.0 {
                    continue;
                }
                let s = c + r;
                let mut f = 1.0;
                let mut g = r / RADIX;
                while c < g {
                    f *= RADIX;
                    c *= sqrdx;
                }
                g = r * RADIX;
                while c > g {
                    f /= RADIX;
                    c /= sqrdx;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    let ginv = 1.0 / f;
                    for j in 0..n {
                        *self.at_mut(i, j) *= ginv;
                    }
                    for j in 0..n {
                        *self.at_mut(j, i) *= f;
                    }
                }
            }
        }
    }

    /// Orthogonal similarity to upper Hessenberg form.
    fn reduce_to_hessenberg(&mut self) {
        let n = self.n;
        if n < 3 {
            return;
        }
        let mut v = vec![0.0; n];
        for k in 0..n - 2 {
            let scale: f64 = (k + 1..n).map(|i| self.at(i, k).abs()).sum();
            if scale == 0.0 {
                continue;
            }
            let mut norm2 = 0.0;
            for i in k + 1..n {
                v[i] = self.at(i, k) / scale;
                norm2 += v[i] * v[i];
            }
            let alpha = -v[k + 1].signum() * norm2.sqrt();
            // ‖v − α e₁‖² = 2(‖v‖² − α v₁)
            let h = norm2 - alpha * v[k + 1];
            v[k + 1] -= alpha;
            // H = I − v vᵀ / h
            for j in 0..n {
                let dot: f64 = (k + 1..n).map(|i| v[i] * self.at(i, j)).sum();
                let f = dot / h;
                for i in k + 1..n {
                    *self.at_mut(i, j) -= f * v[i];
                }
            }
            for i in 0..n {
                let dot: f64 = (k + 1..n).map(|j| self.at(i, j) * v[j]).sum();
                let f = dot / h;
                for j in k + 1..n {
                    *self.at_mut(i, j) -= f * v[j];
                }
            }
            *self.at_mut(k + 1, k) = alpha * scale;
            for i in k + 2..n {
                *self.at_mut(i, k) = 0.0;
            }
        }
    }

    /// Francis double-shift QR on an upper Hessenberg matrix. Returns `None`
    /// if some eigenvalue fails to deflate within the iteration budget.
    fn hessenberg_qr(mut self) -> Option<Vec<Complex64>> {
        const MAX_ITS: usize = 60;
        let n = self.n;
        let eps = f64::EPSILON;
        let mut wr = vec![Complex64::new(0.0, 0.0); n];
        if n == 0 {
            return Some(wr);
        }

        let mut anorm = 0.0;
        for i in 0..n {
            for j in i.saturating_sub(1)..n {
                anorm += self.at(i, j).abs();
            }
        }

        let mut nn = n as isize - 1;
        let mut t = 0.0;
        while nn >= 0 {
            let mut its = 0;
            loop {
                // Look for a single small subdiagonal element.
                let mut l = nn;
                while l > 0 {
                    let (lu, lm) = (l as usize, l as usize - 1);
                    let mut s = self.at(lm, lm).abs() + self.at(lu, lu).abs();
                    if s == 0.0 {
                        s = anorm;
                    }
                    if self.at(lu, lm).abs() <= eps * s {
                        *self.at_mut(lu, lm) = 0.0;
                        break;
                    }
                    l -= 1;
                }
                let nu = nn as usize;
                let mut x = self.at(nu, nu);
                if l == nn {
                    // One root found.
                    wr[nu] = Complex64::new(x + t, 0.0);
                    nn -= 1;
                    break;
                }
                let mut y = self.at(nu - 1, nu - 1);
                let mut w = self.at(nu, nu - 1) * self.at(nu - 1, nu);
                if l == nn - 1 {
                    // Two roots found.
                    let p = 0.5 * (y - x);
                    let q = p * p + w;
                    let mut z = q.abs().sqrt();
                    x += t;
                    if q >= 0.0 {
                        z = p + z.copysign(p);
                        wr[nu - 1] = Complex64::new(x + z, 0.0);
                        wr[nu] = if z != 0.0 {
                            Complex64::new(x - w / z, 0.0)
                        } else {
                            Complex64::new(x + z, 0.0)
                        };
                    } else {
                        wr[nu] = Complex64::new(x + p, -z);
                        wr[nu - 1] = wr[nu].conj();
                    }
                    nn -= 2;
                    break;
                }

                if its == MAX_ITS {
                    return None;
                }
                if its > 0 && its % 10 == 0 {
                    // Exceptional shift.
                    t += x;
                    for i in 0..=nu {
                        *self.at_mut(i, i) -= x;
                    }
                    let s = self.at(nu, nu - 1).abs() + self.at(nu - 1, nu - 2).abs();
                    x = 0.75 * s;
                    y = x;
                    w = -0.4375 * s * s;
                }
                its += 1;

                // Form the shift and look for two consecutive small
                // subdiagonal elements.
                let lu = l as usize;
                let mut m = nu - 2;
                let (mut p, mut q, mut r);
                loop {
                    let z = self.at(m, m);
                    let rr = x - z;
                    let ss = y - z;
                    p = (rr * ss - w) / self.at(m + 1, m) + self.at(m, m + 1);
                    q = self.at(m + 1, m + 1) - z - rr - ss;
                    r = self.at(m + 2, m + 1);
                    let s = p.abs() + q.abs() + r.abs();
                    p /= s;
                    q /= s;
                    r /= s;
                    if m == lu {
                        break;
                    }
                    let u = self.at(m, m - 1).abs() * (q.abs() + r.abs());
                    let v = p.abs() * (self.at(m - 1, m - 1).abs() + z.abs() + self.at(m + 1, m + 1).abs());
                    if u <= eps * v {
                        break;
                    }
                    m -= 1;
                }
                for i in m..nu - 1 {
                    *self.at_mut(i + 2, i) = 0.0;
                    if i != m {
                        *self.at_mut(i + 2, i - 1) = 0.0;
                    }
                }

                // Double QR step on rows l..=nn and columns m..=nn.
                for k in m..nu {
                    if k != m {
                        p = self.at(k, k - 1);
                        q = self.at(k + 1, k - 1);
                        r = if k + 1 != nu { self.at(k + 2, k - 1) } else { 0.0 };
                        x = p.abs() + q.abs() + r.abs();
                        if x != 0.0 {
                            p /= x;
                            q /= x;
                            r /= x;
                        }
                    }
                    let s = (p * p + q * q + r * r).sqrt().copysign(p);
                    if s == 0.0 {
                        continue;
                    }
                    if k == m {
                        if lu != m {
                            *self.at_mut(k, k - 1) = -self.at(k, k - 1);
                        }
                    } else {
                        *self.at_mut(k, k - 1) = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    let z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nu {
                        let mut pp = self.at(k, j) + q * self.at(k + 1, j);
                        if k + 1 != nu {
                            pp += r * self.at(k + 2, j);
                            *self.at_mut(k + 2, j) -= pp * z;
                        }
                        *self.at_mut(k + 1, j) -= pp * y;
                        *self.at_mut(k, j) -= pp * x;
                    }
                    let mmin = nu.min(k + 3);
                    for i in lu..=mmin {
                        let mut pp = x * self.at(i, k) + y * self.at(i, k + 1);
                        if k + 1 != nu {
                            pp += z * self.at(i, k + 2);
                            *self.at_mut(i, k + 2) -= pp * r;
                        }
                        *self.at_mut(i, k + 1) -= pp * q;
                        *self.at_mut(i, k) -= pp;
                    }
                }
            }
        }
        Some(wr)
    }
}

/// Linearization data at the uniform equilibrium: `f'(r)`, `γ = g'(0)` and `Λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianSpec {
    pub fprime_r: f64,
    pub gamma: f64,
    pub laplacian: Laplacian,
}

/// `J(r·1) = f'(r)·I − γ·Λᵀ`.
pub fn assemble_jacobian(spec: &JacobianSpec) -> Result<DMatrix<f64>> {
    if !spec.fprime_r.is_finite() || !spec.gamma.is_finite() {
        return Err(Error::Data(format!(
            "non-finite linearization (f'(r) = {}, γ = {})",
            spec.fprime_r, spec.gamma
        )));
    }
    let lap = spec.laplacian.matrix();
    if !lap.is_square() {
        return Err(Error::Shape(format!("Laplacian is {}x{}", lap.nrows(), lap.ncols())));
    }
    let n = lap.nrows();
    Ok(DMatrix::identity(n, n) * spec.fprime_r - lap.transpose() * spec.gamma)
}

/// One eigenvalue as a CSV/JSON row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenRow {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for EigenRow {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{in_laplacian, Network};
    use nalgebra::DVector;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Smallest residual `‖(M − λI)v‖ / ‖v‖` reachable by inverse iteration.
    fn eigen_residual(m: &DMatrix<f64>, lambda: Complex64) -> f64 {
        let n = m.nrows();
        let mc: DMatrix<Complex64> = m.map(|x| c(x, 0.0));
        let shift = lambda + c(1e-10 * (1.0 + lambda.norm()), 1e-10);
        let a = &mc - DMatrix::identity(n, n) * shift;
        let lu = a.lu();
        let mut v = DVector::from_element(n, c(1.0, 0.0));
        for _ in 0..3 {
            v = lu.solve(&v).unwrap_or(v);
            let norm = v.norm();
            v /= c(norm, 0.0);
        }
        let r = &mc * &v - &v * lambda;
        r.norm()
    }

    #[test]
    fn diagonal_matrix() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -2.0, 0.0]));
        let s = eigenvalues(&m).unwrap();
        let d = greedy_match_distance(s.eigenvalues(), &[c(1.0, 0.0), c(-2.0, 0.0), c(0.0, 0.0)]);
        assert!(d.unwrap() < 1e-14);
    }

    #[test]
    fn rotation_generator() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let s = eigenvalues(&m).unwrap();
        let d = greedy_match_distance(s.eigenvalues(), &[c(0.0, 1.0), c(0.0, -1.0)]);
        assert!(d.unwrap() < 1e-14);
    }

    #[test]
    fn triangle_laplacian_spectrum_matches_characteristic_polynomial() {
        // det(λI − Λ) = λ(λ − 3)² for the undirected triangle.
        let net = Network::undirected(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let lap = in_laplacian(&net);
        let s = eigenvalues(lap.matrix()).unwrap();
        let d = greedy_match_distance(s.eigenvalues(), &[c(0.0, 0.0), c(3.0, 0.0), c(3.0, 0.0)]);
        assert!(d.unwrap() < 1e-9);
    }

    #[test]
    fn companion_matrix_roots() {
        // (x−1)(x−2)(x−3)(x²+1) = x⁵ − 6x⁴ + 12x³ − 12x² + 11x − 6
        let coeffs = [-6.0, 11.0, -12.0, 12.0, -6.0];
        let n = 5;
        let mut m = DMatrix::zeros(n, n);
        for i in 1..n {
            m[(i, i - 1)] = 1.0;
        }
        for (i, a) in coeffs.iter().enumerate() {
            m[(i, n - 1)] = -a;
        }
        let s = eigenvalues(&m).unwrap();
        let want = [c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(0.0, 1.0), c(0.0, -1.0)];
        assert!(greedy_match_distance(s.eigenvalues(), &want).unwrap() < 1e-9);
    }

    #[test]
    fn residuals_and_conjugate_pairs_on_random_matrices() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for trial in 0..40 {
            let n = 1 + trial % 25;
            let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-3.0..3.0));
            let s = eigenvalues(&m).unwrap();
            assert_eq!(s.source_dim(), n);
            assert!(s.conjugate_pairing_error() < 1e-9);
            let mnorm = m.norm();
            for &z in s.eigenvalues() {
                assert!(eigen_residual(&m, z) <= 1e-8 * mnorm, "n={n} λ={z}");
            }
            let trace: f64 = m.trace();
            let sum: Complex64 = s.eigenvalues().iter().sum();
            assert!((sum.re - trace).abs() < 1e-9 * (1.0 + mnorm));
        }
    }

    #[test]
    fn agrees_with_nalgebra_schur() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for n in [4usize, 9, 17, 30] {
            let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let ours = eigenvalues(&m).unwrap();
            let theirs: Vec<Complex64> = m.clone().complex_eigenvalues().iter().copied().collect();
            assert!(greedy_match_distance(ours.eigenvalues(), &theirs).unwrap() < 1e-8);
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(eigenvalues(&DMatrix::zeros(2, 3)), Err(Error::Shape(_))));
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 1)] = f64::INFINITY;
        assert!(matches!(eigenvalues(&m), Err(Error::Data(_))));
        assert!(spectral_abscissa(&Spectrum::new(vec![])).is_err());
        assert_eq!(eigenvalues(&DMatrix::zeros(0, 0)).unwrap().source_dim(), 0);
    }

    #[test]
    fn abscissa_examples() {
        let s = Spectrum::new(vec![c(0.0, 0.0), c(3.0, 0.0), c(3.0, 0.0)]);
        assert_eq!(spectral_abscissa(&s).unwrap(), 3.0);
        let s = Spectrum::new(vec![c(-1.0, 2.0), c(-0.5, 0.0)]);
        assert_eq!(spectral_abscissa(&s).unwrap(), -0.5);
        let single = eigenvalues(in_laplacian(&Network::empty(1)).matrix()).unwrap();
        assert_eq!(spectral_abscissa(&single).unwrap(), 0.0);
    }

    #[test]
    fn jacobian_single_edge() {
        let lap = in_laplacian(&Network::from_edges(2, &[(0, 1, 1.0)]).unwrap());
        let spec = JacobianSpec {
            fprime_r: -1.0,
            gamma: 0.5,
            laplacian: lap,
        };
        let j = assemble_jacobian(&spec).unwrap();
        assert_eq!(j, DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.5, -1.5]));
        let s = eigenvalues(&j).unwrap();
        assert!(greedy_match_distance(s.eigenvalues(), &[c(-1.0, 0.0), c(-1.5, 0.0)]).unwrap() < 1e-14);
    }

    #[test]
    fn jacobian_decoupled_and_zero_shift() {
        let net = Network::undirected(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let lap = in_laplacian(&net);
        let j = assemble_jacobian(&JacobianSpec {
            fprime_r: -0.7,
            gamma: 0.0,
            laplacian: lap.clone(),
        })
        .unwrap();
        assert_eq!(j, DMatrix::identity(4, 4) * -0.7);
        let j = assemble_jacobian(&JacobianSpec {
            fprime_r: 0.0,
            gamma: 1.0,
            laplacian: lap.clone(),
        })
        .unwrap();
        assert_eq!(j, -lap.matrix().transpose());
        let neg: Vec<_> = eigenvalues(lap.matrix())
            .unwrap()
            .eigenvalues()
            .iter()
            .map(|z| -z)
            .collect();
        let got = eigenvalues(&j).unwrap();
        assert!(greedy_match_distance(got.eigenvalues(), &neg).unwrap() < 1e-9);
    }

    #[test]
    fn jacobian_rejects_non_finite() {
        let lap = in_laplacian(&Network::empty(2));
        let spec = JacobianSpec {
            fprime_r: f64::NAN,
            gamma: 1.0,
            laplacian: lap,
        };
        assert!(matches!(assemble_jacobian(&spec), Err(Error::Data(_))));
    }
}
