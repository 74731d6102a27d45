use std::path::{Path, PathBuf};

use loadstab_core::dynamics::{
    estimate_contraction_rate, find_uniform_equilibrium, simulate, CapacityTransformed, DynamicsSpec,
};
use loadstab_core::graph::{gershgorin_discs, DiscMode};
use loadstab_core::io::{discs_csv, spectrum_csv, trajectory_csv, InitialCondition, NetworkDocument};
use loadstab_core::netgen::{connect_rgg, sample_pcp, sample_ppp};
use loadstab_core::prob::{mc_stability_probability, stability_lower_bound, NoiseModel};
use loadstab_core::rng::substream;
use loadstab_core::{
    assemble_jacobian, classify, eigenvalues, in_laplacian, spectral_abscissa, JacobianSpec, Network, StabilityVerdict,
};
use rand::Rng;
use serde::Serialize;

use crate::config::{
    ClassifyTask, Family, GenerateTask, ProbboundTask, Process, RunConfig, SimulateTask, SpectrumTask, Task,
};
use crate::error::CliError;
use crate::svg::Canvas;

/// Substream for the default initial state of `simulate`.
const STREAM_INITIAL: u64 = 5;

/// Runs the command and returns the paths written, in order.
pub fn execute(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(&cfg.out).map_err(|e| CliError::io(&cfg.out, e))?;
    let mut out = Output {
        dir: cfg.out.clone(),
        written: Vec::new(),
    };
    match &cfg.task {
        Task::Generate(t) => generate(t, cfg.seed, &mut out)?,
        Task::Spectrum(t) => spectrum(t, &mut out)?,
        Task::Classify(t) => classify_cmd(t, &mut out)?,
        Task::Simulate(t) => simulate_cmd(t, cfg.seed, &mut out)?,
        Task::Probbound(t) => probbound(t, cfg.seed, &mut out)?,
    }
    Ok(out.written)
}

struct Output {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Output {
    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Data(e.to_string()))?;
        text.push('\n');
        self.write(name, &text)
    }
}

pub fn read_network(path: &Path) -> Result<Network, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let doc = NetworkDocument::from_json(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(doc.to_network()?)
}

fn generate(t: &GenerateTask, seed: u64, out: &mut Output) -> Result<(), CliError> {
    let points = match &t.process {
        Process::Ppp(p) => sample_ppp(p, &t.window, seed)?,
        Process::Pcp(p) => sample_pcp(p, &t.window, seed)?,
    };
    let net = connect_rgg(&points, &t.connectivity, seed)?;
    let generator = serde_json::to_value(t).map_err(|e| CliError::Data(e.to_string()))?;
    let mut text = NetworkDocument::from_network(&net, Some(seed), Some(generator)).to_json()?;
    text.push('\n');
    out.write("network.json", &text)?;
    if t.svg {
        let w = t.window;
        out.write("network.svg", &network_svg(&net, [w.x_min, w.x_max, w.y_min, w.y_max]))?;
    }
    Ok(())
}

/// Nodes and links; nodes without positions are placed on a circle.
pub fn network_svg(net: &Network, bounds: [f64; 4]) -> String {
    let n = net.n();
    let pos: Vec<[f64; 2]> = match net.positions() {
        Some(p) => p.to_vec(),
        None => (0..n)
            .map(|k| {
                let a = std::f64::consts::TAU * k as f64 / n.max(1) as f64;
                [0.5 + 0.45 * a.cos(), 0.5 + 0.45 * a.sin()]
            })
            .collect(),
    };
    let bounds = if net.positions().is_some() {
        bounds
    } else {
        [0.0, 1.0, 0.0, 1.0]
    };
    let mut canvas = Canvas::new(bounds[0], bounds[1], bounds[2], bounds[3]);
    for (j, i, _) in net.edges() {
        // Draw a reciprocal pair once.
        if j < i || net.weight(i, j) == 0.0 {
            canvas.line(pos[j], pos[i], "#9ab", 0.6);
        }
    }
    for p in &pos {
        canvas.dot(*p, 2.5, "#135");
    }
    canvas.finish()
}

fn spectrum(t: &SpectrumTask, out: &mut Output) -> Result<(), CliError> {
    let net = read_network(&t.input)?;
    let lap = in_laplacian(&net);
    let spec = eigenvalues(lap.matrix())?;
    let rows = gershgorin_discs(lap.matrix(), DiscMode::Rows)?;
    let cols = gershgorin_discs(lap.matrix(), DiscMode::Columns)?;
    out.write("eigenvalues.csv", &spectrum_csv(&spec))?;
    out.write("gershgorin.csv", &discs_csv(&rows, &cols))?;

    let (mut x_min, mut x_max, mut y_min, mut y_max) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for d in rows.iter().chain(&cols) {
        x_min = x_min.min(d.center - d.radius);
        x_max = x_max.max(d.center + d.radius);
        y_min = y_min.min(-d.radius);
        y_max = y_max.max(d.radius);
    }
    for z in spec.eigenvalues() {
        x_min = x_min.min(z.re);
        x_max = x_max.max(z.re);
        y_min = y_min.min(z.im);
        y_max = y_max.max(z.im);
    }
    let pad = 0.05 * (x_max - x_min).max(y_max - y_min).max(1.0);
    let mut canvas = Canvas::new(x_min - pad, x_max + pad, y_min - pad, y_max + pad);
    canvas.axes();
    for d in &rows {
        canvas.ring([d.center, 0.0], d.radius, "#aaa", false);
    }
    for d in &cols {
        canvas.ring([d.center, 0.0], d.radius, "#36c", true);
    }
    for z in spec.eigenvalues() {
        canvas.dot([z.re, z.im], 2.5, "#c22");
    }
    out.write("spectrum.svg", &canvas.finish())
}

#[derive(Debug, Serialize)]
struct SpectralCheck {
    abscissa: f64,
    stable: bool,
}

#[derive(Debug, Serialize)]
struct VerdictReport {
    beta: f64,
    gamma: f64,
    verdict: StabilityVerdict,
    spectral: SpectralCheck,
    /// `None` when the verdict is indeterminate.
    agrees: Option<bool>,
}

fn classify_cmd(t: &ClassifyTask, out: &mut Output) -> Result<(), CliError> {
    let net = read_network(&t.input)?;
    let lap = in_laplacian(&net);
    let rho = spectral_abscissa(&eigenvalues(lap.matrix())?)?.max(0.0);
    let fprime_r = -t.beta;
    let verdict = classify(fprime_r, t.gamma, rho)?;
    let jac = assemble_jacobian(&JacobianSpec {
        fprime_r,
        gamma: t.gamma,
        laplacian: lap,
    })?;
    let abscissa = spectral_abscissa(&eigenvalues(&jac)?)?;
    let stable = abscissa < -loadstab_core::tol::CONTAINMENT;
    let agrees = match verdict.outcome {
        loadstab_core::Outcome::Stable => Some(stable),
        loadstab_core::Outcome::Unstable => Some(!stable),
        loadstab_core::Outcome::Indeterminate => None,
    };
    out.json(
        "verdict.json",
        &VerdictReport {
            beta: t.beta,
            gamma: t.gamma,
            verdict,
            spectral: SpectralCheck { abscissa, stable },
            agrees,
        },
    )
}

#[derive(Debug, Serialize)]
struct ContractionReport {
    family: Family,
    beta: f64,
    gamma: f64,
    equilibrium: Vec<f64>,
    rate: f64,
    /// `−max Re eig(J)` for the load family.
    #[serde(skip_serializing_if = "Option::is_none")]
    predicted_rate: Option<f64>,
    final_deviation: f64,
}

fn simulate_cmd(t: &SimulateTask, seed: u64, out: &mut Output) -> Result<(), CliError> {
    let net = read_network(&t.input)?;
    let n = net.n();
    let initial = match &t.initial {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            Some(InitialCondition::from_json(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?)
        }
        None => None,
    };
    let (spec, x0) = match t.family {
        Family::Load => {
            let x0 = match &initial {
                Some(ic) => ic.x0.clone(),
                None => {
                    let mut rng = substream(seed, STREAM_INITIAL);
                    (0..n).map(|_| 1.0 + rng.random_range(-0.5..0.5)).collect()
                }
            };
            (DynamicsSpec::linear(t.beta, t.gamma)?, x0)
        }
        Family::Capacity => {
            let ic = initial.ok_or_else(|| CliError::usage("initial", "required for the capacity family"))?;
            let demands = ic
                .demands
                .ok_or_else(|| CliError::usage("initial", "demands required for the capacity family"))?;
            (
                DynamicsSpec::CapacityTransformed(CapacityTransformed::new(t.beta, t.gamma, demands)?),
                ic.x0,
            )
        }
    };
    if x0.len() != n {
        return Err(CliError::Data(format!(
            "initial state has {} entries for {n} nodes",
            x0.len()
        )));
    }
    let traj = simulate(&spec, &net, &x0, t.t_end, t.dt)?;
    out.write("trajectory.csv", &trajectory_csv(&traj.thinned(t.stride)))?;

    let eq = find_uniform_equilibrium(&spec, &net)?;
    let final_deviation = traj
        .final_state()
        .iter()
        .zip(&eq.equilibrium)
        .map(|(x, e)| (x - e).abs())
        .fold(0.0, f64::max);
    let rate = estimate_contraction_rate(&traj, &eq.equilibrium)?;
    let predicted_rate = match t.family {
        Family::Load => {
            let js = loadstab_core::dynamics::jacobian_spec(&spec, &net)?;
            Some(-spectral_abscissa(&eigenvalues(&assemble_jacobian(&js)?)?)?)
        }
        Family::Capacity => None,
    };
    out.json(
        "contraction.json",
        &ContractionReport {
            family: t.family,
            beta: t.beta,
            gamma: t.gamma,
            equilibrium: eq.equilibrium,
            rate,
            predicted_rate,
            final_deviation,
        },
    )
}

fn probbound(t: &ProbboundTask, seed: u64, out: &mut Output) -> Result<(), CliError> {
    let net = read_network(&t.input)?;
    let mut bound = stability_lower_bound(&net, t.beta, t.b, t.gamma, t.c)?;
    if t.trials > 0 {
        let noise = NoiseModel::new(t.b, t.c)?;
        bound.mc = Some(mc_stability_probability(&net, t.beta, t.gamma, &noise, t.trials, seed)?);
    }
    out.json("bound.json", &bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Settings;

    fn run(dir: &Path, toml: &str) -> Result<Vec<PathBuf>, CliError> {
        let flags = Settings {
            out: Some(dir.to_path_buf()),
            ..Settings::default()
        };
        execute(&RunConfig::resolve(Settings::from_toml(toml)?, flags, None)?)
    }

    fn triangle(dir: &Path) -> PathBuf {
        let path = dir.join("tri.json");
        std::fs::write(
            &path,
            r#"{"n": 3, "edges": [[0,1,1],[1,0,1],[1,2,1],[2,1,1],[0,2,1],[2,0,1]]}"#,
        )
        .unwrap();
        path
    }

    fn read_json(path: &Path) -> serde_json::Value {
        serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
    }

    #[test]
    fn classify_triangle_both_sides_of_threshold() {
        let dir = tempfile::tempdir().unwrap();
        let input = triangle(dir.path());
        for (gamma, outcome, scenario) in [
            (0.5, "Stable", "DefaultLoadBalancing"),
            (-0.2, "Stable", "NegativeGammaStable"),
            (-0.5, "Unstable", "NegativeGammaUnstable"),
        ] {
            let toml = format!("command = \"classify\"\ninput = {input:?}\nbeta = 1.0\ngamma = {gamma}\n");
            let files = run(dir.path(), &toml).unwrap();
            let v = read_json(&files[0]);
            assert_eq!(v["verdict"]["outcome"], outcome);
            assert_eq!(v["verdict"]["scenario"], scenario);
            assert_eq!(v["agrees"], true);
            assert!((v["verdict"]["evidence"]["rho"].as_f64().unwrap() - 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn simulate_and_bound_on_triangle() {
        let dir = tempfile::tempdir().unwrap();
        let input = triangle(dir.path());
        let toml =
            format!("command = \"simulate\"\ninput = {input:?}\nbeta = 1.0\ngamma = 2.0\nt_end = 8.0\nstride = 100\n");
        let files = run(dir.path(), &toml).unwrap();
        let csv = std::fs::read_to_string(&files[0]).unwrap();
        assert!(csv.starts_with("t,x1,x2,x3\n0,"));
        assert_eq!(csv.lines().count(), 1 + 9);
        let c = read_json(&files[1]);
        assert!((c["rate"].as_f64().unwrap() - 1.0).abs() < 0.05);
        assert!((c["predicted_rate"].as_f64().unwrap() - 1.0).abs() < 1e-9);

        let toml = format!(
            "command = \"probbound\"\ninput = {input:?}\nbeta = 1.0\ngamma = 0.5\nb = 0.5\nc = 1.0\ntrials = 200\n"
        );
        let b = read_json(&run(dir.path(), &toml).unwrap()[0]);
        assert_eq!(b["degrees"], serde_json::json!([2, 2, 2]));
        assert_eq!(b["mc"]["trials"], 200);
        assert!(b["lower_bound"].as_f64().unwrap() <= 1.0);
    }

    #[test]
    fn capacity_simulation_needs_demands() {
        let dir = tempfile::tempdir().unwrap();
        let input = triangle(dir.path());
        let ic = dir.path().join("ic.json");
        std::fs::write(&ic, r#"{"x0": [1.0, 2.0, 3.0]}"#).unwrap();
        let toml = format!("command = \"simulate\"\ninput = {input:?}\ninitial = {ic:?}\nfamily = \"capacity\"\nbeta = 1.0\ngamma = 0.5\n");
        assert_eq!(run(dir.path(), &toml).unwrap_err().exit_code(), 1);
        std::fs::write(&ic, r#"{"x0": [1.0, 2.0, 3.0], "demands": [2.0, 2.0, 2.0]}"#).unwrap();
        let files = run(dir.path(), &toml).unwrap();
        let c = read_json(&files[1]);
        assert_eq!(c["equilibrium"], serde_json::json!([2.0, 2.0, 2.0]));
        assert!(c.get("predicted_rate").is_none());
    }

    #[test]
    fn unstable_simulation_is_a_numeric_error() {
        let dir = tempfile::tempdir().unwrap();
        let input = triangle(dir.path());
        let toml = format!("command = \"simulate\"\ninput = {input:?}\nbeta = -1.0\ngamma = 0.5\nt_end = 5.0\n");
        let err = run(dir.path(), &toml).unwrap_err();
        assert_eq!(err.exit_code(), 3, "{err}");
        assert!(dir.path().join("trajectory.csv").exists());
    }

    #[test]
    fn missing_input_is_a_data_error() {
        let dir = tempfile::tempdir().unwrap();
        let err = run(
            dir.path(),
            "command = \"spectrum\"\ninput = \"/nonexistent/net.json\"\n",
        )
        .unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn svg_without_positions() {
        let net = Network::undirected(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let svg = network_svg(&net, [0.0, 1.0, 0.0, 1.0]);
        assert_eq!(svg.matches("<line").count(), 3);
        assert_eq!(svg.matches("<circle").count(), 4);
    }
}
