use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nibp-lab"))
        .args(args)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn ok(o: &Output) {
    assert!(
        o.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn channel_subcommand_reports_class() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.json",
        r#"{"name": "amplitude_damping", "params": {"p": 0.36}}"#,
    );
    let out = tmp.path().join("out");
    let o = run(&["channel", "--config", &cfg, "--out", out.to_str().unwrap()]);
    ok(&o);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("channel.json")).unwrap()).unwrap();
    assert_eq!(report["class"], "hs_contractive_nonunital");
    let c = report["c_bloch"].as_array().unwrap();
    assert!((c[2].as_f64().unwrap() - 0.36).abs() < 1e-12);
}

#[test]
fn experiment_is_reproducible_and_guards_output() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "e.json",
        r#"{"preset": "layers_sweep", "n": 2, "L": [2, 3], "p": 0.3, "instances": 2, "thetas": 3}"#,
    );
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    ok(&run(&[
        "experiment",
        "--config",
        &cfg,
        "--out",
        a.to_str().unwrap(),
        "--seed",
        "5",
    ]));
    ok(&run(&[
        "experiment",
        "--config",
        &cfg,
        "--out",
        b.to_str().unwrap(),
        "--seed",
        "5",
    ]));
    let ca = fs::read(a.join("layers_sweep.csv")).unwrap();
    assert_eq!(ca, fs::read(b.join("layers_sweep.csv")).unwrap());
    assert!(a.join("plot_layers_sweep.py").exists());
    assert!(a.join("metadata.json").exists());

    let again = run(&[
        "experiment",
        "--config",
        &cfg,
        "--out",
        a.to_str().unwrap(),
        "--seed",
        "5",
    ]);
    assert!(!again.status.success());
    ok(&run(&[
        "experiment",
        "--config",
        &cfg,
        "--out",
        a.to_str().unwrap(),
        "--seed",
        "5",
        "--force",
    ]));
    assert_eq!(ca, fs::read(a.join("layers_sweep.csv")).unwrap());
}

#[test]
fn grad_scan_train_and_bound_report() {
    let tmp = tempfile::tempdir().unwrap();
    let circuit = r#"{"n": 2, "L": 3, "noise": {"type": "depolarizing", "p": 0.1}}"#;
    let g = write(
        tmp.path(),
        "g.json",
        &format!(r#"{{"circuit": {circuit}, "hamiltonians": 2, "thetas": 2}}"#),
    );
    let out = tmp.path().join("g");
    ok(&run(&[
        "grad-scan",
        "--config",
        &g,
        "--out",
        out.to_str().unwrap(),
    ]));
    let csv = fs::read_to_string(out.join("grad_scan.csv")).unwrap();
    assert!(csv
        .starts_with("n,L,p,noise_type,layer,slot,mean_abs_grad,var_grad,min,max,samples,seed\n"));

    let t = write(
        tmp.path(),
        "t.json",
        &format!(r#"{{"circuit": {circuit}, "spsa": {{"maxiter": 10}}}}"#),
    );
    let out = tmp.path().join("t");
    ok(&run(&[
        "train",
        "--config",
        &t,
        "--out",
        out.to_str().unwrap(),
    ]));
    let trace = fs::read_to_string(out.join("train.csv")).unwrap();
    assert!(trace.starts_with("iter,cost,step_size\n"));
    assert_eq!(trace.lines().count(), 11);

    let b = write(
        tmp.path(),
        "b.json",
        &format!(r#"{{"circuit": {circuit}}}"#),
    );
    let out = tmp.path().join("b");
    ok(&run(&[
        "bound-report",
        "--config",
        &b,
        "--out",
        out.to_str().unwrap(),
    ]));
    let rep: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("bound_report.json")).unwrap()).unwrap();
    assert!(rep["r"].as_f64().unwrap() < 1.0);
}

#[test]
fn bad_config_fails_cleanly() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "e.json",
        r#"{"preset": "layers_sweep", "instances": 0}"#,
    );
    let o = run(&[
        "experiment",
        "--config",
        &cfg,
        "--out",
        tmp.path().join("o").to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("instances"));
}
