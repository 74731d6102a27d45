//! Spatial base-station layouts and percolation connectivity.
//!
//! Layouts come from a homogeneous Poisson point process or a Poisson
//! cluster process (Matérn by default, Thomas optional). Nodes are joined by
//! a symmetric distance/probability rule: each pair within radius `R` gets a
//! link in both directions with probability `P`.

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Network;
use crate::rng::{substream, StreamRng, STREAM_CONNECT, STREAM_PCP, STREAM_PPP};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Window {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let w = Self {
            x_min,
            x_max,
            y_min,
            y_max,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn unit() -> Self {
        Self {
            x_min: 0.0,
            x_max: 1.0,
            y_min: 0.0,
            y_max: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::param("window", "bounds must be finite"));
        }
        if !(self.x_max > self.x_min && self.y_max > self.y_min) {
            return Err(Error::param(
                "window",
                format!(
                    "empty window [{}, {}] x [{}, {}]",
                    self.x_min, self.x_max, self.y_min, self.y_max
                ),
            ));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        p[0] >= self.x_min && p[0] <= self.x_max && p[1] >= self.y_min && p[1] <= self.y_max
    }

    fn dilate(&self, margin: f64) -> Self {
        Self {
            x_min: self.x_min - margin,
            x_max: self.x_max + margin,
            y_min: self.y_min - margin,
            y_max: self.y_max + margin,
        }
    }

    fn uniform_point(&self, rng: &mut StreamRng) -> [f64; 2] {
        [
            self.x_min + self.width() * rng.random::<f64>(),
            self.y_min + self.height() * rng.random::<f64>(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    pub points: Vec<[f64; 2]>,
    pub window: Window,
    pub seed: u64,
}

impl PointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PppParams {
    /// Expected nodes per unit area.
    pub intensity: f64,
}

impl PppParams {
    pub fn validate(&self) -> Result<()> {
        positive("intensity", self.intensity)
    }
}

/// Displacement of daughters around their parent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterKernel {
    /// Uniform in the disc of radius `cluster_radius`.
    #[default]
    Matern,
    /// Isotropic Gaussian with standard deviation `cluster_radius`.
    Thomas,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PcpParams {
    pub parent_intensity: f64,
    pub cluster_radius: f64,
    pub mean_daughters: f64,
    #[serde(default)]
    pub kernel: ClusterKernel,
}

impl PcpParams {
    pub fn matern(parent_intensity: f64, cluster_radius: f64, mean_daughters: f64) -> Self {
        Self {
            parent_intensity,
            cluster_radius,
            mean_daughters,
            kernel: ClusterKernel::Matern,
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("parent_intensity", self.parent_intensity)?;
        positive("cluster_radius", self.cluster_radius)?;
        positive("mean_daughters", self.mean_daughters)
    }

    /// Parents further than this from the window cannot place daughters in it
    /// (Matérn) or do so with negligible probability (Thomas, 6σ).
    fn reach(&self) -> f64 {
        match self.kernel {
            ClusterKernel::Matern => self.cluster_radius,
            ClusterKernel::Thomas => 6.0 * self.cluster_radius,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConnectivityParams {
    /// Percolation radius `R`.
    pub radius: f64,
    /// Link probability `P`.
    pub prob: f64,
}

impl ConnectivityParams {
    pub fn new(radius: f64, prob: f64) -> Result<Self> {
        let c = Self { radius, prob };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.radius.is_finite() || self.radius < 0.0 {
            return Err(Error::param("R", format!("R ≥ 0 required, got {}", self.radius)));
        }
        if !(0.0..=1.0).contains(&self.prob) {
            return Err(Error::param("P", format!("P ∈ [0,1] required, got {}", self.prob)));
        }
        Ok(())
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be finite and > 0, got {v}")))
    }
}

fn poisson_count(mean: f64, rng: &mut StreamRng) -> Result<usize> {
    let dist = Poisson::new(mean).map_err(|e| Error::param("intensity", e.to_string()))?;
    Ok(dist.sample(rng) as usize)
}

/// Homogeneous PPP: `Poisson(λ·area)` points i.i.d. uniform on the window.
pub fn sample_ppp(params: &PppParams, window: &Window, seed: u64) -> Result<PointSet> {
    params.validate()?;
    window.validate()?;
    let mut rng = substream(seed, STREAM_PPP);
    let count = poisson_count(params.intensity * window.area(), &mut rng)?;
    let points = (0..count).map(|_| window.uniform_point(&mut rng)).collect();
    Ok(PointSet {
        points,
        window: *window,
        seed,
    })
}

/// Cluster-process sample together with its (unreturned) parent layer.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSample {
    pub daughters: PointSet,
    pub parents: Vec<[f64; 2]>,
    /// Index into `parents` for every daughter.
    pub parent_of: Vec<usize>,
}

/// Poisson cluster process restricted to the window; only daughters are
/// returned as nodes. See [`sample_pcp_with_parents`].
pub fn sample_pcp(params: &PcpParams, window: &Window, seed: u64) -> Result<PointSet> {
    sample_pcp_with_parents(params, window, seed).map(|s| s.daughters)
}

/// Parents form a PPP on the window dilated by the cluster reach, so the
/// daughter process seen inside the window is stationary with intensity
/// `λ_p·μ_d`. Each parent spawns `Poisson(μ_d)` daughters; those landing
/// outside the window are discarded.
pub fn sample_pcp_with_parents(params: &PcpParams, window: &Window, seed: u64) -> Result<ClusterSample> {
    params.validate()?;
    window.validate()?;
    let mut rng = substream(seed, STREAM_PCP);
    let parent_window = window.dilate(params.reach());
    let n_parents = poisson_count(params.parent_intensity * parent_window.area(), &mut rng)?;
    let gauss = Normal::new(0.0, params.cluster_radius).map_err(|e| Error::param("cluster_radius", e.to_string()))?;

    let mut parents = Vec::with_capacity(n_parents);
    let mut points = Vec::new();
    let mut parent_of = Vec::new();
    for k in 0..n_parents {
        let parent = parent_window.uniform_point(&mut rng);
        parents.push(parent);
        let n_daughters = poisson_count(params.mean_daughters, &mut rng)?;
        for _ in 0..n_daughters {
            let (dx, dy) = match params.kernel {
                ClusterKernel::Matern => {
                    let r = params.cluster_radius * rng.random::<f64>().sqrt();
                    let theta = std::f64::consts::TAU * rng.random::<f64>();
                    (r * theta.cos(), r * theta.sin())
                }
                ClusterKernel::Thomas => (gauss.sample(&mut rng), gauss.sample(&mut rng)),
            };
            let p = [parent[0] + dx, parent[1] + dy];
            if window.contains(p) {
                points.push(p);
                parent_of.push(k);
            }
        }
    }
    Ok(ClusterSample {
        daughters: PointSet {
            points,
            window: *window,
            seed,
        },
        parents,
        parent_of,
    })
}

/// Links every pair within distance `R` in both directions (unit weight)
/// with independent probability `P`. One uniform is drawn per in-range pair
/// regardless of `P`, so different `P` on the same seed thin the same
/// candidate set.
pub fn connect_rgg(points: &PointSet, conn: &ConnectivityParams, seed: u64) -> Result<Network> {
    conn.validate()?;
    if points.is_empty() {
        return Err(Error::param("points", "cannot connect an empty point set"));
    }
    let mut rng = substream(seed, STREAM_CONNECT);
    let pts = &points.points;
    let n = pts.len();
    let r2 = conn.radius * conn.radius;
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let dx = pts[i][0] - pts[j][0];
            let dy = pts[i][1] - pts[j][1];
            if dx * dx + dy * dy <= r2 {
                let u: f64 = rng.random();
                if u < conn.prob {
                    edges.push((i, j, 1.0));
                    edges.push((j, i, 1.0));
                }
            }
        }
    }
    Network::from_edges(n, &edges)?.with_positions(pts.clone())
}
