use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn gtkit(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gtkit"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn norms_prints_requested_indices_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = gtkit(&["norms", "--out", "o", "--set", "solver.s_list=[-1, 0, 1]"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    for s in ["H^-1 norm", "H^0 norm", "H^1 norm"] {
        assert!(out.contains(s), "{out}");
    }
    let report = fs::read_to_string(dir.path().join("o/report.jsonl")).unwrap();
    let v: serde_json::Value = serde_json::from_str(report.lines().next().unwrap()).unwrap();
    assert_eq!(v["command"], "norms");
    // Default Gaussian: a = 1, sigma = 2, mass = a^2 sigma sqrt(2 pi).
    let mass = v["report"]["mass"].as_f64().unwrap();
    assert!((mass - 2.0 * (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-10);
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "[grid]\nd = 1\nn = [128]\nl = [48.0]\n\n[solver]\ndt = 0.01\nt_final = 0.2\ns_list = [0.5]\n",
    )
    .unwrap();
    for out in ["a", "b"] {
        let o = gtkit(&["simulate", "--config", "run.toml", "--out", out, "--quiet"], dir.path());
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert!(stdout(&o).is_empty());
    }
    for f in ["records.csv", "report.jsonl", "final.gts", "config.toml"] {
        let a = fs::read(dir.path().join("a").join(f)).unwrap();
        let b = fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f} differs between identical runs");
    }
    let csv = fs::read_to_string(dir.path().join("a/records.csv")).unwrap();
    assert!(csv.starts_with(
        "t,mass,kinetic,potential,energy,variance,vdot1,equip_ratio,boundary_frac,hs_norm_0.5\n"
    ));
    assert_eq!(csv.lines().count(), 22);
}

#[test]
fn snapshot_data_feeds_a_second_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = gtkit(&["simulate", "--out", "a", "--set", "solver.t_final=0.05", "--quiet"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = gtkit(
        &["norms", "--out", "b", "--set", "data.kind=snapshot", "--set", "data.path=a/final.gts"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = gtkit(
        &[
            "norms",
            "--out",
            "c",
            "--set",
            "data.kind=snapshot",
            "--set",
            "data.path=a/final.gts",
            "--set",
            "grid.n=[512]",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn odd_power_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = gtkit(&["simulate", "--set", "model.p=3"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("p must be even ≥ 2"), "{}", stderr(&o));
}

#[test]
fn zero_dispersion_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = gtkit(&["simulate", "--set", "model.gamma=0.0"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nonzero net dispersion"), "{}", stderr(&o));
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = gtkit(&["simulate", "--set", "solver.dtt=0.1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("dtt"), "{}", stderr(&o));
}

#[test]
fn experiment_must_match_the_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let o = gtkit(&["ipscale", "--set", "experiment.id=symmetry"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("not `ipscale`"), "{}", stderr(&o));
}

#[test]
fn scaling_table_passes_and_fails_on_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let o = gtkit(&["inflate-energy", "--out", "ok"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("PASS H^s norm exponent"));

    let o = gtkit(&["inflate-energy", "--out", "tight", "--set", "experiment.tol_exponent=1e-9"], dir.path());
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn collapsing_step_is_inconclusive() {
    let dir = tempfile::tempdir().unwrap();
    let o = gtkit(
        &[
            "simulate",
            "--quiet",
            "--set",
            "grid.n=[128]",
            "--set",
            "grid.l=[24.0]",
            "--set",
            "model.p=8",
            "--set",
            "data.a=1.6",
            "--set",
            "data.sigma=1.0",
            "--set",
            "solver.dt=-0.001",
            "--set",
            "solver.t_final=-2.0",
            "--set",
            "solver.tail_tol=1e-6",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}
