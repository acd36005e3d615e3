use densitylab::model::Grid;
use densitylab::profiles::{build_profile, RadialProfile};
use densitylab::table::CsvTable;
use std::path::Path;
use std::process::{Command, Output};

fn densitylab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_densitylab"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn density_writes_profile_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = densitylab(&["density", "--entry", "euclidean_catenoid", "--grid", "1.05:50:200", "--out", "prof.csv"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let t = CsvTable::read_file(&dir.path().join("prof.csv")).unwrap();
    assert_eq!(t.rows.len(), 200);
    assert_eq!(t.get_meta("config.entry"), Some("euclidean_catenoid"));
    assert!(t.get_meta("version").is_some());
}

#[test]
fn profile_csv_round_trips_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let o = densitylab(&["density", "--entry", "euclidean_cone_clifford", "--grid", "0.5:20:40", "--out", "p.csv"], dir.path());
    assert_eq!(code(&o), 0);
    let read = RadialProfile::from_table(&CsvTable::read_file(&dir.path().join("p.csv")).unwrap()).unwrap();
    let p = read.params();
    let entry = densitylab::catalog::make_entry(read.entry.id, *p, 0.0).unwrap();
    let direct = build_profile(&entry, &Grid::linspace(0.5, 20.0, 40).unwrap()).unwrap();
    for (a, b) in read.theta.iter().zip(&direct.theta) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
    for (a, b) in read.err_energy_e.iter().zip(&direct.err_energy_e) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
}

#[test]
fn repeated_runs_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a.csv", "b.csv"] {
        let o = densitylab(&["spectrum", "--entry", "totally_geodesic", "--lambda", "1", "--count", "2", "--out", out], dir.path());
        assert_eq!(code(&o), 0);
    }
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    let strip = |x: &[u8]| String::from_utf8_lossy(x).replace("a.csv", "").replace("b.csv", "");
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn monotone_reads_csv_and_json_profiles() {
    let dir = tempfile::tempdir().unwrap();
    let o = densitylab(
        &["density", "--entry", "euclidean_catenoid", "--grid", "1.05:30:200", "--out", "p.csv", "--json", "p.json"],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    for file in ["p.csv", "p.json"] {
        let o = densitylab(&["monotone", "--profile", file, "--with-comparison"], dir.path());
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(v["pass"], true);
        assert_eq!(v["monotone"]["theta"]["pass"], true);
    }
}

#[test]
fn flow_verdicts_set_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let finite = densitylab(&["flow", "--alpha", "2", "--start", "10", "--s-max", "1e5", "--out", "f.csv", "--json", "f.json"], dir.path());
    assert_eq!(code(&finite), 0);
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("f.json")).unwrap()).unwrap();
    assert_eq!(v["criterion"]["verdict"], "finite");
    let divergent = densitylab(&["flow", "--alpha", "1", "--start", "10", "--s-max", "1e5", "--out", "g.csv"], dir.path());
    assert_eq!(code(&divergent), 2);
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), "[flow]\nalpha = 1.0\nstart = 10.0\ns_max = 1e5\n").unwrap();
    let o = densitylab(&["--config", "run.toml", "flow", "--out", "f.csv"], dir.path());
    assert_eq!(code(&o), 2);
    let o = densitylab(&["--config", "run.toml", "flow", "--alpha", "2", "--out", "f.csv"], dir.path());
    assert_eq!(code(&o), 0);
    let t = CsvTable::read_file(&dir.path().join("f.csv")).unwrap();
    assert_eq!(t.get_meta("config.alpha"), Some("2.0"));
    assert_eq!(t.get_meta("config.s_max"), Some("100000.0"));
}

#[test]
fn usage_and_configuration_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&densitylab(&["density", "--entry", "no_such_entry"], dir.path())), 1);
    assert_eq!(code(&densitylab(&["bogus"], dir.path())), 1);
    assert_eq!(code(&densitylab(&["spectrum", "--entry", "totally_geodesic", "--k", "1", "--lambda", "0.1"], dir.path())), 1);
    assert_eq!(code(&densitylab(&["monotone"], dir.path())), 1);
    std::fs::write(dir.path().join("bad.toml"), "[flow]\nalhpa = 2\n").unwrap();
    assert_eq!(code(&densitylab(&["--config", "bad.toml", "flow"], dir.path())), 1);
    assert_eq!(code(&densitylab(&["--config", "missing.toml", "flow"], dir.path())), 1);
    assert_eq!(code(&densitylab(&["--help"], dir.path())), 0);
    assert_eq!(code(&densitylab(&["--version"], dir.path())), 0);
}

#[test]
fn models_and_ode_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = densitylab(&["models", "--m", "6", "--k", "1", "--grid", "0.1:10:50", "--out", "m.csv"], dir.path());
    assert_eq!(code(&o), 0);
    let t = CsvTable::read_file(&dir.path().join("m.csv")).unwrap();
    assert_eq!(t.rows.len(), 50);
    let o = densitylab(&["ode", "--k", "1", "--form", "exp_tail", "--c", "1", "--a", "1", "--out", "g.csv", "--json", "g.json"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("g.json")).unwrap()).unwrap();
    assert_eq!(v["limits"]["checks"].as_array().unwrap().len(), 5);
    // an s^-3 tail has not settled to the limit tolerances by s = 40
    let o = densitylab(&["ode", "--k", "1", "--form", "power_tail", "--c", "1", "--p", "3", "--json", "h.json", "--out", "h.csv"], dir.path());
    assert_eq!(code(&o), 2);
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("h.json")).unwrap()).unwrap();
    assert_eq!(v["pass"], false);
    let o = densitylab(&["ode", "--form", "table"], dir.path());
    assert_eq!(code(&o), 1);
}

#[test]
fn all_writes_a_suite() {
    let dir = tempfile::tempdir().unwrap();
    let o = densitylab(&["all", "--out-dir", "suite"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("suite/summary.json")).unwrap()).unwrap();
    assert_eq!(v["pass"], true);
    assert!(v["verdicts"].as_array().unwrap().len() >= 15);
}
