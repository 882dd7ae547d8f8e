use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_levyfluct"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("cfg.toml");
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn compute_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "process = \"brownian\"\n");
    let o = run(&["compute", "V", &cfg, "--grid", "0.5,2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,V,V_hat"));
    // for ψ(ξ) = ξ² the renewal function is the identity up to normalisation
    let v: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!((v[1] / v[0] - 4.0).abs() < 1e-3, "{v:?}");

    let o = run(&["compute", "psi", &cfg, "--grid", "1e-1:1e1:3"]);
    assert_eq!(stdout(&o).lines().count(), 4);

    let out = dir.path().join("h.csv");
    let o = run(&["compute", "h", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(std::fs::read_to_string(out).unwrap().starts_with("r,h,b_r,sup_re_psi"));
}

#[test]
fn model_show_reports_gates() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[process]\nfamily = \"stable\"\nalpha = 0.8\n");
    let o = run(&["model", "show", &cfg]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["gates"]["wlsc"], false);
    assert_eq!(v["family"]["alpha"], 0.8);
}

#[test]
fn verify_writes_results_and_report_reads_them() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        &format!(
            "process = \"stable-0.8\"\nclaims = [\"h-sandwich\", \"product-bound\"]\noutput = {:?}\n",
            out.to_str().unwrap()
        ),
    );
    let o = run(&["verify", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("PASS  h-sandwich"));
    assert!(text.contains("SKIP  product-bound") && text.contains("WLSC α>1 gate failed"));
    assert!(out.join("result.json").exists());
    assert!(out.join("h-sandwich.csv").exists());

    let o = run(&["report", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("pass 1  fail 0  skipped 1"));
}

#[test]
fn failing_claim_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        &format!(
            "process = \"brownian\"\noutput = {:?}\n[bands.h-sandwich]\nkind = \"upper\"\nupper = 0.5\n",
            out.to_str().unwrap()
        ),
    );
    let o = run(&["verify", &cfg, "--claims", "h-sandwich"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL  h-sandwich"));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "process = \"brownian\"\n");
    for args in [
        vec!["verify", cfg.as_str(), "--claims", "no-such-claim"],
        vec!["verify", cfg.as_str()],
        vec!["compute", "h", cfg.as_str(), "--grid", "x:y"],
        vec!["compute", "nonsense", cfg.as_str()],
        vec!["model", "show", "/nonexistent.toml"],
        vec!["report", "/nonexistent-dir"],
        vec!["frobnicate"],
    ] {
        assert_eq!(run(&args).status.code(), Some(2), "{args:?}");
    }
    let bad = write_config(dir.path(), "process = \"not-a-preset\"\n");
    assert_eq!(run(&["model", "show", &bad]).status.code(), Some(2));
}
