use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{CommandKind, Family, KernelKind, ProcessKind, Settings};

#[derive(Debug, Parser)]
#[command(
    name = "loadstab",
    version,
    about = "Stability of load-balancing dynamics on base-station networks",
    after_help = "Flags override keys in --config; LOADSTAB_SEED is used when no seed is given."
)]
pub struct Cli {
    /// TOML file with any of the run keys.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Optional when the config file sets `command`.
    #[command(subcommand)]
    pub command: Option<CommandArgs>,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Sample a PPP or PCP deployment and connect it as a random geometric graph.
    Generate(GenerateArgs),
    /// Laplacian eigenvalues and Gershgorin discs of a network.
    Spectrum(InputArgs),
    /// Stability verdict for the linear family at the uniform equilibrium.
    #[command(allow_negative_numbers = true)]
    Classify(ClassifyArgs),
    /// Integrate the load (or capacity) dynamics and fit the contraction rate.
    #[command(allow_negative_numbers = true)]
    Simulate(SimulateArgs),
    /// Gershgorin lower bound on the stability probability, with Monte Carlo.
    Probbound(ProbboundArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Network JSON.
    #[arg(long, short)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RateArgs {
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub process: Option<ProcessKind>,
    /// PPP intensity.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// PCP parent intensity.
    #[arg(long)]
    pub lambda_p: Option<f64>,
    /// PCP cluster radius.
    #[arg(long)]
    pub r_c: Option<f64>,
    /// Mean daughters per PCP parent.
    #[arg(long)]
    pub mu_d: Option<f64>,
    #[arg(long, value_enum)]
    pub kernel: Option<KernelKind>,
    /// x_min,x_max,y_min,y_max
    #[arg(long, value_parser = parse_window, allow_hyphen_values = true)]
    pub window: Option<[f64; 4]>,
    /// Percolation radius R.
    #[arg(long, short = 'R')]
    pub radius: Option<f64>,
    /// Link probability P.
    #[arg(long, short = 'P')]
    pub prob: Option<f64>,
    /// Also write network.svg.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub rates: RateArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub rates: RateArgs,
    /// Initial-condition JSON: {"x0": [...], "demands": [...]}.
    #[arg(long)]
    pub initial: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Keep every k-th step in trajectory.csv.
    #[arg(long)]
    pub stride: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ProbboundArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub rates: RateArgs,
    /// Half-width of the noise on β.
    #[arg(long)]
    pub b: Option<f64>,
    /// Half-width of the noise on γ.
    #[arg(long)]
    pub c: Option<f64>,
    /// Monte Carlo trials; 0 skips the simulation.
    #[arg(long)]
    pub trials: Option<u64>,
}

fn parse_window(text: &str) -> Result<[f64; 4], String> {
    let v: Vec<f64> = text
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<_, _>>()?;
    v.try_into()
        .map_err(|v: Vec<f64>| format!("expected x_min,x_max,y_min,y_max, got {} values", v.len()))
}

impl Cli {
    /// Flag values as a [`Settings`] layer.
    pub fn settings(&self) -> Settings {
        let mut s = Settings {
            seed: self.seed,
            out: self.out.clone(),
            ..Settings::default()
        };
        let Some(cmd) = &self.command else { return s };
        match cmd {
            CommandArgs::Generate(a) => {
                s.command = Some(CommandKind::Generate);
                s.process = a.process;
                s.lambda = a.lambda;
                s.lambda_p = a.lambda_p;
                s.r_c = a.r_c;
                s.mu_d = a.mu_d;
                s.kernel = a.kernel;
                s.window = a.window;
                s.radius = a.radius;
                s.prob = a.prob;
                s.svg = a.svg.then_some(true);
            }
            CommandArgs::Spectrum(a) => {
                s.command = Some(CommandKind::Spectrum);
                s.input = a.input.clone();
            }
            CommandArgs::Classify(a) => {
                s.command = Some(CommandKind::Classify);
                s.input = a.input.input.clone();
                (s.beta, s.gamma) = (a.rates.beta, a.rates.gamma);
            }
            CommandArgs::Simulate(a) => {
                s.command = Some(CommandKind::Simulate);
                s.input = a.input.input.clone();
                (s.beta, s.gamma) = (a.rates.beta, a.rates.gamma);
                s.initial = a.initial.clone();
                s.family = a.family;
                s.dt = a.dt;
                s.t_end = a.t_end;
                s.stride = a.stride;
            }
            CommandArgs::Probbound(a) => {
                s.command = Some(CommandKind::Probbound);
                s.input = a.input.input.clone();
                (s.beta, s.gamma) = (a.rates.beta, a.rates.gamma);
                s.b = a.b;
                s.c = a.c;
                s.trials = a.trials;
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_map_to_keys() {
        let cli = Cli::parse_from([
            "loadstab",
            "--seed",
            "7",
            "generate",
            "--lambda",
            "100",
            "-R",
            "0.2",
            "-P",
            "0.8",
            "--window",
            "-1,2,-1,1",
            "--svg",
        ]);
        let s = cli.settings();
        assert_eq!(s.command, Some(CommandKind::Generate));
        assert_eq!(s.seed, Some(7));
        assert_eq!(s.lambda, Some(100.0));
        assert_eq!(s.radius, Some(0.2));
        assert_eq!(s.prob, Some(0.8));
        assert_eq!(s.window, Some([-1.0, 2.0, -1.0, 1.0]));
        assert_eq!(s.svg, Some(true));
        assert_eq!(s.beta, None);
    }

    #[test]
    fn negative_rates_and_global_flags_after_subcommand() {
        let cli = Cli::parse_from([
            "loadstab", "classify", "-i", "n.json", "--beta", "1", "--gamma", "-0.5", "--out", "o",
        ]);
        let s = cli.settings();
        assert_eq!(s.gamma, Some(-0.5));
        assert_eq!(s.out, Some(PathBuf::from("o")));
        assert_eq!(s.input, Some(PathBuf::from("n.json")));
    }

    #[test]
    fn window_needs_four_values() {
        assert!(Cli::try_parse_from(["loadstab", "generate", "--window", "0,1,0"]).is_err());
        assert!(Cli::try_parse_from(["loadstab", "generate", "--window", "0,1,0,x"]).is_err());
    }

    #[test]
    fn no_subcommand_is_allowed() {
        let cli = Cli::parse_from(["loadstab", "--config", "run.toml"]);
        assert!(cli.command.is_none());
        assert_eq!(cli.settings(), Settings::default());
    }
}
