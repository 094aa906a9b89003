use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lab() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_contact-lab"));
    c.env_remove("CONTACT_LAB_OUT");
    c
}

fn run(args: &[&str]) -> Output {
    lab().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn config(dir: &Path, text: &str) -> String {
    let p = dir.join("config.toml");
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn json(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn list_prints_ten_scenarios() {
    for o in [run(&[]), run(&["list"])] {
        assert!(o.status.success());
        assert_eq!(stdout(&o).lines().count(), 10);
    }
    let o = run(&["list", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let ids: Vec<&str> = v.as_array().unwrap().iter().map(|s| s["id"].as_str().unwrap()).collect();
    assert_eq!(ids.len(), 10);
    assert!(ids.contains(&"exprop-compose") && ids.contains(&"coiso-sweep"));
    assert_eq!(v[2]["defaults"]["k_list"], serde_json::json!([1, 2, 4, 8, 16]));
}

#[test]
fn unknown_ids_list_the_valid_ones() {
    for args in [&["list", "nope"][..], &["nope"][..]] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(2));
        assert!(stderr(&o).contains("flow-verify, coiso-sweep"), "{}", stderr(&o));
    }
}

#[test]
fn schema_listing_is_a_valid_default_config() {
    let o = run(&["list", "collapse-wall"]);
    assert!(o.status.success());
    let text: String = stdout(&o).lines().skip(1).collect::<Vec<_>>().join("\n");
    let table: toml::Table = text.parse().unwrap();
    assert_eq!(table["preset"].as_str(), Some("fourfinite"));
}

#[test]
fn invalid_configs_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    for (scenario, text, key) in [
        ("energy-cutoff", "k_list = []", "k_list"),
        ("flow-verify", "bogus = 1", "bogus"),
        ("flow-verify", "t = \"long\"", "t"),
        ("collapse-approximants", "m_list = [1.0]", "m_list"),
        ("bo-build", "target = \"file\"", "samples_file"),
    ] {
        let cfg = config(dir.path(), text);
        let out = dir.path().join("out");
        let o = run(&[scenario, "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{scenario}: {text}");
        let err = stderr(&o);
        assert!(err.contains(key) && err.contains("schema for"), "{err}");
        assert!(!out.join("report.json").exists());
    }
}

#[test]
fn dilation_flow_reports_exponential_factor() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "t = 1.0\nsamples = 5\n");
    let o = run(&["flow-verify", "--config", &cfg, "--out", dir.path().to_str().unwrap(), "--seed", "7"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let r = json(dir.path());
    assert_eq!(r["seed"], 7);
    assert_eq!(r["failures"], 0);
    let checks = r["checks"].as_array().unwrap();
    assert!(checks.iter().any(|c| c["name"] == "H = z gives f = e^t" && c["pass"] == true));
    let traj = fs::read_to_string(dir.path().join("trajectory_000.csv")).unwrap();
    assert!(traj.starts_with("t,x1,y1,z,logf\n"));
    // logf = t along the flow of H = z
    let last: Vec<f64> = traj.lines().last().unwrap().split(',').map(|s| s.parse().unwrap()).collect();
    assert!((last[0] - 1.0).abs() < 1e-12 && (last[4] - 1.0).abs() < 1e-8);
}

#[test]
fn text_and_json_reports_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "germs = 50\npoints = 11\n");
    let o = run(&["coiso-sweep", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let text = fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert_eq!(text, stdout(&o));
    let r = json(dir.path());
    let lines: Vec<&str> = text.lines().filter(|l| l.starts_with("  PASS ") || l.starts_with("  FAIL ")).collect();
    let checks = r["checks"].as_array().unwrap();
    assert_eq!(lines.len(), checks.len());
    for (l, c) in lines.iter().zip(checks) {
        let tag = if c["pass"].as_bool().unwrap() { "PASS" } else { "FAIL" };
        assert!(l.starts_with(&format!("  {tag} {}", c["name"].as_str().unwrap())), "{l}");
    }
    for (k, v) in r["config"].as_object().unwrap() {
        assert!(text.contains(&format!("  {k} = ")), "{k} = {v}");
    }
    assert!(text.contains(&format!("failures {}", r["failures"])));
    for a in r["artifacts"].as_array().unwrap() {
        assert!(dir.path().join(a.as_str().unwrap()).exists());
    }
}

#[test]
fn failing_checks_set_the_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "hamiltonian = \"random\"\nsamples = 3\nresidual_tol = 0.0\n");
    let o = run(&["flow-verify", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("failed check: pullback residual"));
    assert_eq!(json(dir.path())["failures"], 1);
}

#[test]
fn golden_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = config(a.path(), "hamiltonian = \"random\"\nsamples = 4\nt = 0.3\n");
    for d in [&a, &b] {
        let o = run(&["flow-verify", "--config", &cfg, "--out", d.path().to_str().unwrap(), "--golden", "--seed", "3"]);
        assert!(o.status.success(), "{}", stdout(&o));
    }
    for f in ["samples.csv", "trajectory_000.csv", "trajectory_001.csv", "report.json"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    assert_eq!(json(a.path())["golden"], true);
}

#[test]
fn environment_sets_the_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "t_list = [0.5]\nsamples = 3\n");
    let out = dir.path().join("env-out");
    let o = lab().args(["collapse-square", "--config", &cfg]).env("CONTACT_LAB_OUT", &out).output().unwrap();
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(out.join("report.txt").exists() && out.join("envelope.csv").exists());
}

#[test]
fn fourfinite_wall_is_cubic() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["collapse-wall", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stdout(&o));
    let mut r = csv::Reader::from_path(dir.path().join("wall.csv")).unwrap();
    let mut rows = 0;
    for rec in r.records() {
        let v: Vec<f64> = rec.unwrap().iter().map(|s| s.parse().unwrap()).collect();
        assert!((v[1] - v[0].powi(3)).abs() <= 1e-9 * v[0].powi(3).abs());
        rows += 1;
    }
    assert_eq!(rows, 42);
}

#[test]
fn targets_load_from_sample_files() {
    let dir = tempfile::tempdir().unwrap();
    let samples = dir.path().join("tent.csv");
    let mut s = String::from("w1,value\n");
    for i in 0..=8 {
        let w = -0.4 + 0.1 * i as f64;
        s.push_str(&format!("{w},{}\n", 0.3 * (1.0 - w.abs() / 0.4).max(0.0)));
    }
    fs::write(&samples, s).unwrap();
    let cfg = config(dir.path(), &format!("target = \"file\"\nsamples_file = {:?}\nm = 2\n", samples.to_str().unwrap()));
    let o = run(&["bo-build", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    let stages = fs::read_to_string(dir.path().join("stages.csv")).unwrap();
    assert_eq!(stages.lines().count(), 3);
}

#[test]
fn energy_scenario_runs_a_short_list() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "k_list = [2, 8]\nresolution = 7\n");
    let o = run(&["energy-cutoff", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stdout(&o));
    let table = fs::read_to_string(dir.path().join("energy.csv")).unwrap();
    assert!(table.starts_with("k,energy,bound,M,"));
    assert_eq!(table.lines().count(), 3);
}

#[test]
fn composite_scenario_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "m = 2\nline_points = 4\nper_axis = 2\n");
    let o = run(&["exprop-compose", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(dir.path().join("line.csv").exists() && dir.path().join("ratios.csv").exists());
}
