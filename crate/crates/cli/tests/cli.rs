use std::path::Path;
use std::process::{Command, Output};

fn loadstab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loadstab"))
        .args(args)
        .current_dir(cwd)
        .env_remove("LOADSTAB_SEED")
        .output()
        .unwrap()
}

fn ok(out: &Output) {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

fn read(path: impl AsRef<Path>) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn generate_spectrum_classify_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&loadstab(
        &[
            "--seed", "42", "--out", "gen", "generate", "--lambda", "100", "-R", "0.15", "-P", "1", "--svg",
        ],
        d,
    ));
    let net: serde_json::Value = serde_json::from_str(&read(d.join("gen/network.json"))).unwrap();
    assert_eq!(net["seed"], 42);
    assert_eq!(net["generator"]["process"], "ppp");
    assert!(net["n"].as_u64().unwrap() > 50);
    assert!(read(d.join("gen/network.svg")).contains("<circle"));

    ok(&loadstab(&["--out", "spec", "spectrum", "-i", "gen/network.json"], d));
    let csv = read(d.join("spec/eigenvalues.csv"));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("re,im"));
    let re: Vec<f64> = lines.map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(re.len() as u64, net["n"].as_u64().unwrap());
    assert!(re.iter().all(|&x| x >= -1e-9));
    assert!(read(d.join("spec/gershgorin.csv")).starts_with("mode,index,center,radius\n"));
    assert!(read(d.join("spec/spectrum.svg")).starts_with("<svg"));

    ok(&loadstab(
        &[
            "--out",
            "cls",
            "classify",
            "-i",
            "gen/network.json",
            "--beta",
            "1",
            "--gamma",
            "0.5",
        ],
        d,
    ));
    let v: serde_json::Value = serde_json::from_str(&read(d.join("cls/verdict.json"))).unwrap();
    assert_eq!(v["verdict"]["outcome"], "Stable");
    assert_eq!(v["verdict"]["scenario"], "DefaultLoadBalancing");
    assert_eq!(v["spectral"]["stable"], true);
    assert_eq!(v["agrees"], true);
}

#[test]
fn config_file_flags_and_env_seed() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("run.toml"),
        "command = \"generate\"\nlambda = 30.0\nradius = 0.3\nprob = 0.5\nout = \"a\"\n",
    )
    .unwrap();

    let run = |extra: &[&str], env: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_loadstab"));
        cmd.arg("--config")
            .arg("run.toml")
            .args(extra)
            .current_dir(d)
            .env_remove("LOADSTAB_SEED");
        if let Some(s) = env {
            cmd.env("LOADSTAB_SEED", s);
        }
        cmd.output().unwrap()
    };
    ok(&run(&[], Some("11")));
    let a = read(d.join("a/network.json"));
    assert!(a.contains("\"seed\": 11"));

    ok(&run(&["--seed", "12", "--out", "b"], Some("11")));
    let b = read(d.join("b/network.json"));
    assert!(b.contains("\"seed\": 12"));
    assert_ne!(a, b);

    // Flag overrides the file value for lambda.
    ok(&run(&["--out", "c", "generate", "--lambda", "60"], Some("11")));
    let c: serde_json::Value = serde_json::from_str(&read(d.join("c/network.json"))).unwrap();
    assert_eq!(c["generator"]["intensity"], 60.0);
    assert_eq!(c["generator"]["connectivity"]["prob"], 0.5);
}

#[test]
fn exit_codes_by_category() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    let out = loadstab(&["generate", "--lambda", "100", "-P", "1.5"], d);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("P ∈ [0,1]"));

    std::fs::write(d.join("bad.toml"), "command = \"generate\"\nlambda = 1.0\nfoo = 2\n").unwrap();
    let out = loadstab(&["--config", "bad.toml"], d);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("foo"));

    assert_eq!(loadstab(&["generate", "--lambda"], d).status.code(), Some(1));
    assert_eq!(loadstab(&["--help"], d).status.code(), Some(0));

    std::fs::write(d.join("broken.json"), "{\"n\": 2, \"edges\": [[0, 9, 1.0]]}").unwrap();
    let out = loadstab(&["spectrum", "-i", "broken.json"], d);
    assert_eq!(out.status.code(), Some(2));

    std::fs::write(d.join("pair.json"), "{\"n\": 2, \"edges\": [[0, 1, 1.0], [1, 0, 1.0]]}").unwrap();
    let out = loadstab(
        &[
            "simulate",
            "-i",
            "pair.json",
            "--beta",
            "-2",
            "--gamma",
            "0.1",
            "--t-end",
            "50",
        ],
        d,
    );
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));

    let out = loadstab(
        &[
            "probbound",
            "-i",
            "pair.json",
            "--beta",
            "1",
            "--gamma",
            "0.5",
            "--b",
            "0.1",
            "--c",
            "0.4",
        ],
        d,
    );
    ok(&out);
    let weighted = "{\"n\": 2, \"edges\": [[0, 1, 2.0], [1, 0, 1.0]]}";
    std::fs::write(d.join("weighted.json"), weighted).unwrap();
    let out = loadstab(
        &[
            "probbound",
            "-i",
            "weighted.json",
            "--beta",
            "1",
            "--gamma",
            "0.5",
            "--b",
            "0.1",
            "--c",
            "0.4",
        ],
        d,
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("pipeline.toml"),
        "seed = 5\nprocess = \"pcp\"\nlambda_p = 4.0\nmu_d = 25.0\nr_c = 0.08\nradius = 0.15\nprob = 0.8\n\
         svg = true\ninput = \"net/network.json\"\nbeta = 1.0\ngamma = 0.5\nb = 0.3\nc = 0.8\ntrials = 300\nt_end = 4.0\n",
    )
    .unwrap();
    ok(&loadstab(&["--config", "pipeline.toml", "--out", "net", "generate"], d));
    ok(&loadstab(
        &["--config", "pipeline.toml", "--out", "r2/net", "generate"],
        d,
    ));
    assert_eq!(
        std::fs::read(d.join("net/network.json")).unwrap(),
        std::fs::read(d.join("r2/net/network.json")).unwrap()
    );
    assert_eq!(
        std::fs::read(d.join("net/network.svg")).unwrap(),
        std::fs::read(d.join("r2/net/network.svg")).unwrap()
    );
    for round in ["r1", "r2"] {
        for cmd in ["spectrum", "classify", "simulate", "probbound"] {
            ok(&loadstab(
                &["--config", "pipeline.toml", "--out", &format!("{round}/{cmd}"), cmd],
                d,
            ));
        }
    }
    for (cmd, file) in [
        ("spectrum", "eigenvalues.csv"),
        ("spectrum", "gershgorin.csv"),
        ("spectrum", "spectrum.svg"),
        ("classify", "verdict.json"),
        ("simulate", "trajectory.csv"),
        ("simulate", "contraction.json"),
        ("probbound", "bound.json"),
    ] {
        let a = std::fs::read(d.join(format!("r1/{cmd}/{file}"))).unwrap();
        let b = std::fs::read(d.join(format!("r2/{cmd}/{file}"))).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b, "{cmd}/{file}");
    }
}
