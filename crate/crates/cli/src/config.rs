//! Run configuration: a flat TOML file and command-line flags share one key
//! set ([`Settings`]); flags override the file, and `LOADSTAB_SEED` is the
//! fallback seed. [`RunConfig::resolve`] validates the merged settings for the
//! selected command.
//!
//! ```toml
//! command = "generate"
//! seed = 1
//! out = "runs/ppp"
//! process = "ppp"
//! lambda = 100.0
//! radius = 0.15
//! prob = 0.8
//! ```

use std::path::{Path, PathBuf};

use loadstab_core::netgen::{ClusterKernel, ConnectivityParams, PcpParams, PppParams, Window};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SEED_ENV: &str = "LOADSTAB_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Generate,
    Spectrum,
    Classify,
    Simulate,
    Probbound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ProcessKind {
    Ppp,
    Pcp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Matern,
    Thomas,
}

/// Which state the simulation integrates: loads `l` or capacities `c = d/l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    #[default]
    Load,
    Capacity,
}

/// Every configurable key, all optional. Used for both the TOML file and the
/// flags before merging.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub command: Option<CommandKind>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub initial: Option<PathBuf>,
    pub svg: Option<bool>,

    pub process: Option<ProcessKind>,
    pub lambda: Option<f64>,
    pub lambda_p: Option<f64>,
    pub r_c: Option<f64>,
    pub mu_d: Option<f64>,
    pub kernel: Option<KernelKind>,
    /// `[x_min, x_max, y_min, y_max]`.
    pub window: Option<[f64; 4]>,
    pub radius: Option<f64>,
    pub prob: Option<f64>,

    pub family: Option<Family>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub stride: Option<usize>,

    pub b: Option<f64>,
    pub c: Option<f64>,
    pub trials: Option<u64>,
}

macro_rules! overlay_fields {
    ($base:ident, $top:ident; $($f:ident),* $(,)?) => {
        Settings { $($f: $top.$f.or($base.$f)),* }
    };
}

impl Settings {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {}", e.message())))
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Usage(m) => CliError::Usage(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Keys set in `top` win over keys set in `self`.
    pub fn overlay(self, top: Settings) -> Settings {
        let base = self;
        overlay_fields!(base, top;
            command, seed, out, input, initial, svg,
            process, lambda, lambda_p, r_c, mu_d, kernel, window, radius, prob,
            family, beta, gamma, dt, t_end, stride,
            b, c, trials,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "process", rename_all = "lowercase")]
pub enum Process {
    Ppp(PppParams),
    Pcp(PcpParams),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenerateTask {
    #[serde(flatten)]
    pub process: Process,
    pub window: Window,
    pub connectivity: ConnectivityParams,
    #[serde(skip)]
    pub svg: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumTask {
    pub input: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifyTask {
    pub input: PathBuf,
    pub beta: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateTask {
    pub input: PathBuf,
    pub initial: Option<PathBuf>,
    pub family: Family,
    pub beta: f64,
    pub gamma: f64,
    pub dt: f64,
    pub t_end: f64,
    pub stride: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbboundTask {
    pub input: PathBuf,
    pub beta: f64,
    pub gamma: f64,
    pub b: f64,
    pub c: f64,
    pub trials: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Task {
    Generate(GenerateTask),
    Spectrum(SpectrumTask),
    Classify(ClassifyTask),
    Simulate(SimulateTask),
    Probbound(ProbboundTask),
}

/// A validated run. Every output file is a function of this value alone.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub task: Task,
}

pub const DEFAULT_RADIUS: f64 = 0.15;
pub const DEFAULT_PROB: f64 = 1.0;
pub const DEFAULT_DT: f64 = 1e-2;
pub const DEFAULT_T_END: f64 = 10.0;
pub const DEFAULT_STRIDE: usize = 10;
pub const DEFAULT_TRIALS: u64 = 1000;

fn required<T>(key: &str, v: Option<T>) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::usage(key, "required but not set"))
}

fn finite(key: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::usage(key, format!("must be finite, got {v}")))
    }
}

fn positive(key: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::usage(key, format!("{key} > 0 required, got {v}")))
    }
}

fn nonnegative(key: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(CliError::usage(key, format!("{key} ≥ 0 required, got {v}")))
    }
}

fn seed_from(flag_or_file: Option<u64>, env: Option<&str>) -> Result<u64, CliError> {
    match (flag_or_file, env) {
        (Some(s), _) => Ok(s),
        (None, Some(text)) => text
            .trim()
            .parse()
            .map_err(|_| CliError::usage(SEED_ENV, format!("unsigned integer required, got {text:?}"))),
        (None, None) => Ok(0),
    }
}

impl RunConfig {
    /// Merges `file` under `flags`, falls back to `env_seed`, and validates
    /// every key the command uses. Keys the command does not use are ignored,
    /// so one file can drive a whole pipeline.
    pub fn resolve(file: Settings, flags: Settings, env_seed: Option<&str>) -> Result<Self, CliError> {
        let s = file.overlay(flags);
        let command = s.command.ok_or_else(|| {
            CliError::usage(
                "command",
                "required: one of generate, spectrum, classify, simulate, probbound",
            )
        })?;
        let seed = seed_from(s.seed, env_seed)?;
        let out = s.out.clone().unwrap_or_else(|| PathBuf::from("."));
        let task = match command {
            CommandKind::Generate => Task::Generate(generate_task(&s)?),
            CommandKind::Spectrum => Task::Spectrum(SpectrumTask {
                input: required("input", s.input)?,
            }),
            CommandKind::Classify => Task::Classify(ClassifyTask {
                input: required("input", s.input)?,
                beta: finite("beta", required("beta", s.beta)?)?,
                gamma: finite("gamma", required("gamma", s.gamma)?)?,
            }),
            CommandKind::Simulate => Task::Simulate(simulate_task(&s)?),
            CommandKind::Probbound => Task::Probbound(ProbboundTask {
                input: required("input", s.input)?,
                beta: positive("beta", required("beta", s.beta)?)?,
                gamma: nonnegative("gamma", required("gamma", s.gamma)?)?,
                b: nonnegative("b", required("b", s.b)?)?,
                c: nonnegative("c", required("c", s.c)?)?,
                trials: s.trials.unwrap_or(DEFAULT_TRIALS),
            }),
        };
        Ok(RunConfig { seed, out, task })
    }

    pub fn command(&self) -> CommandKind {
        match self.task {
            Task::Generate(_) => CommandKind::Generate,
            Task::Spectrum(_) => CommandKind::Spectrum,
            Task::Classify(_) => CommandKind::Classify,
            Task::Simulate(_) => CommandKind::Simulate,
            Task::Probbound(_) => CommandKind::Probbound,
        }
    }
}

fn generate_task(s: &Settings) -> Result<GenerateTask, CliError> {
    let window = match s.window {
        None => Window::unit(),
        Some([x0, x1, y0, y1]) => Window::new(x0, x1, y0, y1).map_err(|e| CliError::usage("window", e))?,
    };
    let process = match s.process.unwrap_or(ProcessKind::Ppp) {
        ProcessKind::Ppp => Process::Ppp(PppParams {
            intensity: positive("lambda", required("lambda", s.lambda)?)?,
        }),
        ProcessKind::Pcp => Process::Pcp(PcpParams {
            parent_intensity: positive("lambda_p", required("lambda_p", s.lambda_p)?)?,
            cluster_radius: positive("r_c", required("r_c", s.r_c)?)?,
            mean_daughters: positive("mu_d", required("mu_d", s.mu_d)?)?,
            kernel: match s.kernel.unwrap_or(KernelKind::Matern) {
                KernelKind::Matern => ClusterKernel::Matern,
                KernelKind::Thomas => ClusterKernel::Thomas,
            },
        }),
    };
    let radius = s.radius.unwrap_or(DEFAULT_RADIUS);
    if !(radius.is_finite() && radius >= 0.0) {
        return Err(CliError::usage("radius", format!("R ≥ 0 required, got {radius}")));
    }
    let prob = s.prob.unwrap_or(DEFAULT_PROB);
    if !(0.0..=1.0).contains(&prob) {
        return Err(CliError::usage("prob", format!("P ∈ [0,1] required, got {prob}")));
    }
    Ok(GenerateTask {
        process,
        window,
        connectivity: ConnectivityParams { radius, prob },
        svg: s.svg.unwrap_or(false),
    })
}

fn simulate_task(s: &Settings) -> Result<SimulateTask, CliError> {
    let family = s.family.unwrap_or_default();
    let beta = required("beta", s.beta)?;
    let beta = match family {
        Family::Load => finite("beta", beta)?,
        Family::Capacity => positive("beta", beta)?,
    };
    let dt = positive("dt", s.dt.unwrap_or(DEFAULT_DT))?;
    let t_end = positive("t_end", s.t_end.unwrap_or(DEFAULT_T_END))?;
    let stride = s.stride.unwrap_or(DEFAULT_STRIDE);
    if stride == 0 {
        return Err(CliError::usage("stride", "stride ≥ 1 required, got 0"));
    }
    if family == Family::Capacity && s.initial.is_none() {
        return Err(CliError::usage(
            "initial",
            "the capacity family needs an initial-condition file with demands",
        ));
    }
    Ok(SimulateTask {
        input: required("input", s.input.clone())?,
        initial: s.initial.clone(),
        family,
        beta,
        gamma: finite("gamma", required("gamma", s.gamma)?)?,
        dt,
        t_end,
        stride,
    })
}
