use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

const H3: &str = "[space]\nfamily = \"RealHyp\"\nk = 3\n";

fn run(dir: &Path, config: &str, args: &[&str]) -> Output {
    let cfg = dir.join("run.toml");
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_oscmult"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap()
}

fn json(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("out").join(name)).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn transform_round_trip_and_manifest() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &format!("{H3}[params]\nfunction = \"gauss\"\n"), &["transform"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(d.path(), "report.json");
    assert!(r["roundtrip_rel_err"].as_f64().unwrap() < 1e-6);
    let m = json(d.path(), "manifest.json");
    assert_eq!(m["config_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(m["config"]["params"]["support"].as_f64(), Some(9.0));
    assert_eq!(m["config"]["numerics"]["tol"].as_f64(), Some(1e-8));
    let csv = std::fs::read_to_string(d.path().join("out/inverse.csv")).unwrap();
    assert!(csv.starts_with("# t: geodesic distance"));
}

#[test]
fn missing_block_is_a_usage_error() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), "[params]\nfunction = \"gauss\"\n", &["transform"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("[space]"), "{}", stderr(&o));
    let o = run(d.path(), H3, &["kernel"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("[multiplier]"));
}

#[test]
fn tighter_tolerance_shrinks_threshold_or_fails() {
    let d = tempfile::tempdir().unwrap();
    let base = json_after(d.path(), &format!("{H3}[numerics]\ntol = 1e-8\n"));
    for tol in ["1e-9", "1e-12"] {
        let o = run(d.path(), &format!("{H3}[numerics]\ntol = {tol}\n"), &["transform"]);
        let r = json(d.path(), "report.json");
        let (err, thr) = (r["roundtrip_rel_err"].as_f64().unwrap(), r["threshold"].as_f64().unwrap());
        assert!(thr < base["threshold"].as_f64().unwrap());
        match o.status.code() {
            Some(0) => assert!(err <= thr),
            Some(2) => assert!(!r["pass"].as_bool().unwrap()),
            c => panic!("unexpected exit {c:?}"),
        }
    }
}

fn json_after(dir: &Path, config: &str) -> Value {
    let o = run(dir, config, &["transform"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    json(dir, "report.json")
}

#[test]
fn parse_errors_name_the_line() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), "[space]\nfamily = \"RealHyp\"\nk = \"three\"\n", &["transform"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("run.toml:3:"), "{}", stderr(&o));
    let o = run(d.path(), &format!("{H3}[numerics]\nlamda_max = 10\n"), &["transform"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("run.toml:5:"), "{}", stderr(&o));
}

#[test]
fn outputs_are_byte_identical_across_thread_counts() {
    let cfg = format!("{H3}[multiplier]\nalpha = 0.5\nbeta_re = 1.0\n");
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(run(a.path(), &cfg, &["kernel", "--threads", "1"]).status.code(), Some(0));
    assert_eq!(run(b.path(), &cfg, &["kernel", "--threads", "4"]).status.code(), Some(0));
    let read = |d: &Path| std::fs::read(d.join("out/kernel.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
    assert_eq!(json(a.path(), "manifest.json")["config_sha256"], json(b.path(), "manifest.json")["config_sha256"]);
}

#[test]
fn task_from_config() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &format!("task = \"group poincare\"\n[group]\nkind = \"cyclic\"\ntranslation = 1.3\nL = 5\n{H3}"), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(d.path().join("out/poincare.csv").exists());
    let o = run(d.path(), &format!("task = \"plot\"\n{H3}"), &[]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn kernel_routes_and_integrability() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &format!("{H3}[multiplier]\nalpha = 1.5\nbeta_re = 1.0\n"), &["kernel"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(d.path(), "report.json")["contour_points"].as_u64(), Some(0));
    let o = run(d.path(), &format!("{H3}[multiplier]\nalpha = 0.5\n[numerics]\neps = 0.0\n"), &["kernel"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn decay_command() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &format!("{H3}[params]\nsigma = 1.0\n"), &["decay"]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(d.path(), "report.json");
    assert!(r["stable"].as_bool().unwrap() && r["control_growth"].as_f64().unwrap() >= 10.0);
    assert!(r["stabilized_at"].as_f64().unwrap() <= 5.0);
    let o = run(d.path(), &format!("{H3}[params]\nsigma = 4.0\n"), &["decay"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn subordination_command() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &format!("{H3}[multiplier]\nalpha = 1.0\nbeta_re = 2.0\n"), &["subordination"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(json(d.path(), "report.json")["max_rel_diff"].as_f64().unwrap() < 1e-3);
    let o = run(d.path(), &format!("{H3}[multiplier]\nalpha = 0.5\nbeta_re = 1.0\n"), &["subordination"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = run(d.path(), &format!("{H3}[multiplier]\nalpha = 1.0\nbeta_re = -0.5\n"), &["subordination"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn ksbound_command() {
    let d = tempfile::tempdir().unwrap();
    let cfg = format!("{H3}[multiplier]\nalpha = 0.5\n[params]\np = 4.0\neta_ratio = 0.9\n");
    let o = run(d.path(), &cfg, &["ksbound"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(d.path(), "report.json");
    assert!(r["converged"].as_bool().unwrap());
    assert_eq!(r["meets_order"].as_bool(), Some(true));
    assert_eq!(r["order"].as_u64(), Some(5));
    let o = run(d.path(), &format!("{cfg}j_max = 8\n"), &["ksbound"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn certify_command() {
    let d = tempfile::tempdir().unwrap();
    let verdict = |alpha: f64, beta: f64, p: f64, flag: bool| {
        let cfg = format!(
            "{H3}[multiplier]\nalpha = {alpha}\nbeta_re = {beta}\n[params]\np = {p}\ndelta_lt_2rho = {flag}\nj_max = 30\n"
        );
        let o = run(d.path(), &cfg, &["certify"]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        json(d.path(), "certificate.json")["verdict"].as_str().unwrap().to_string()
    };
    assert_eq!(verdict(0.5, 0.375 + 1e-9, 4.0, false), "BoundedCertified");
    assert_eq!(verdict(0.5, 0.375 - 1e-9, 4.0, false), "NotCovered");
    assert_eq!(verdict(2.0, 1.0, 3.0, false), "L2Only");
    assert_eq!(verdict(1.0, 0.6, 4.0, true), "BoundedCertified");
    assert_eq!(verdict(1.0, 0.6, 4.0, false), "NotCovered");
}

#[test]
fn group_commands() {
    let d = tempfile::tempdir().unwrap();
    let cyc = |l: u32| format!("[group]\nkind = \"cyclic\"\ntranslation = 1.3\nL = {l}\n[params]\ns = [2.0]\n");
    let o = run(d.path(), &cyc(6), &["group", "poincare"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(d.path().join("out/poincare.csv")).unwrap();
    let sum: f64 = csv.lines().last().unwrap().split(',').nth(1).unwrap().parse().unwrap();
    let q = (-2.6f64).exp();
    assert!((sum - (1.0 + 2.0 * q * (1.0 - q.powi(6)) / (1.0 - q))).abs() < 1e-12);
    let orbit = std::fs::read_to_string(d.path().join("out/orbit.csv")).unwrap();
    assert_eq!(orbit.lines().filter(|l| !l.starts_with('#')).count(), 1 + 13);

    let o = run(d.path(), "[group]\nkind = \"freefuchsian\"\npreset = \"gamma2\"\ndim = 2\nL = 12\n", &["group", "delta"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(d.path(), "report.json");
    assert!((r["estimate"]["delta_hat"].as_f64().unwrap() - 1.0).abs() < 0.1);

    let quot = |l: u32| {
        let cfg = format!("[group]\nkind = \"cyclic\"\ntranslation = 2.0\nL = {l}\n[params]\nsigma = 1.0\nx = [0.2, 0.1, 1.0]\n");
        let o = run(d.path(), &cfg, &["group", "quotient"]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let r = json(d.path(), "report.json");
        let v = &r["value"];
        (v[0].as_f64().unwrap(), v[1].as_f64().unwrap(), r["tail_bound"].as_f64().unwrap())
    };
    let (a, b, tail) = quot(4);
    let (c, e, _) = quot(6);
    assert!(((a - c).powi(2) + (b - e).powi(2)).sqrt() <= tail);

    let o = run(d.path(), H3, &["group", "delta"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("[group]"));
}
