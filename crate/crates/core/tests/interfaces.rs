//! File formats and the command-line contract, exercised through the real
//! binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rainbowbf::beamformer::{objective_f, JptaBeamformer};
use rainbowbf::cli::ScenarioConfig;
use rainbowbf::evaluation::Scenario;

const SMALL: &str = "\
plan.subcarriers = 32
users.count = 6
evaluation.seeds = 2
evaluation.k_values = [2, 6]
evaluation.bandwidths_hz = [0.7e9, 1.4e9]
evaluation.grid_resolution = 64
evaluation.footprint_subcarriers = 3
evaluation.footprint_resolution = 64
allocation.users = 3
allocation.subcarriers = 4
allocation.seeds = 4
allocation.kappas_db = [0.0, 30.0]
bench.subcarriers = [16, 32]
bench.array_sides = [2, 4]
bench.array_subcarriers = 16
bench.runs = 1
";

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_rainbowbf"));
    c.env_remove("RAINBOWBF_OUT");
    c
}

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    let o = bin()
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    o
}

fn small_config(dir: &Path) -> std::path::PathBuf {
    let p = dir.join("small.toml");
    fs::write(&p, SMALL).unwrap();
    p
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect::<Vec<_>>();
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    for r in &rows {
        assert_eq!(r.len(), header.len(), "{}", path.display());
    }
    (header, rows)
}

/// Floats are written as `d.dddddddde±x`: nine significant digits.
fn assert_float(field: &str) {
    let (mant, exp) = field.split_once('e').unwrap_or_else(|| panic!("not a float: {field}"));
    let digits = mant.trim_start_matches('-');
    assert_eq!(digits.len(), 10, "{field}");
    assert_eq!(&digits[1..2], ".", "{field}");
    exp.parse::<i32>().unwrap();
    field.parse::<f64>().unwrap();
}

#[test]
fn run_writes_documented_tables_deterministically() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run(&["run", "--seed", "7"], &cfg, &a);
    run(&["run", "--seed", "7", "--jobs", "2"], &cfg, &b);

    let expected: &[(&str, &[&str], &[usize])] = &[
        ("throughput_vs_K.csv", &["users", "scheme", "seeds", "throughput_bps", "throughput_std_bps", "approx_throughput_bps"], &[3, 4, 5]),
        ("active_ratio.csv", &["users", "scheme", "seeds", "active_ratio", "footprint_bound"], &[3, 4]),
        ("throughput_vs_bandwidth.csv", &["bandwidth_hz", "users", "scheme", "seeds", "throughput_bps", "throughput_std_bps", "approx_throughput_bps"], &[0, 4, 5, 6]),
        ("beam_metrics.csv", &["mapping", "array", "m", "frequency_hz", "u_des", "v_des", "u_opt", "v_opt", "matching_error", "gain"], &[3, 4, 5, 6, 7, 8, 9]),
        ("footprints.csv", &["scheme", "m", "x_km", "y_km"], &[2, 3]),
        ("allocation_comparison.csv", &["kappa_db", "allocator", "seeds", "throughput_bps", "approx_throughput_bps"], &[0, 3, 4]),
    ];
    for (name, header, floats) in expected {
        let bytes = fs::read(a.join(name)).unwrap();
        assert_eq!(bytes, fs::read(b.join(name)).unwrap(), "{name} differs between runs");
        let (h, rows) = read_csv(&a.join(name));
        assert_eq!(&h, header, "{name}");
        assert!(!rows.is_empty(), "{name}");
        for r in &rows {
            for &i in *floats {
                assert_float(&r[i]);
            }
        }
    }
    assert_eq!(fs::read(a.join("report.json")).unwrap(), fs::read(b.join("report.json")).unwrap());

    // 2 user counts × 4 schemes; 2 mappings × 2 arrays × 32 subcarriers.
    assert_eq!(read_csv(&a.join("throughput_vs_K.csv")).1.len(), 8);
    assert_eq!(read_csv(&a.join("beam_metrics.csv")).1.len(), 128);
    let (_, alloc) = read_csv(&a.join("allocation_comparison.csv"));
    let labels: Vec<&str> = alloc.iter().take(6).map(|r| r[1].as_str()).collect();
    assert_eq!(labels, ["jspa:waterfill", "jspa:equal", "maxch:waterfill", "maxch:equal", "exhaustive", "upper_bound"]);

    let report: serde_json::Value = serde_json::from_slice(&fs::read(a.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["users"], 6);
    assert_eq!(report["schemes"].as_array().unwrap().len(), 4);

    // The echoed configuration reproduces the input.
    let echoed = ScenarioConfig::load(a.join("config.toml")).unwrap();
    assert_eq!(echoed, ScenarioConfig::parse(SMALL).unwrap());
}

#[test]
fn other_seed_changes_results() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run(&["run", "--seed", "7"], &cfg, &a);
    run(&["run", "--seed", "8"], &cfg, &b);
    assert_ne!(
        fs::read(a.join("throughput_vs_K.csv")).unwrap(),
        fs::read(b.join("throughput_vs_K.csv")).unwrap()
    );
}

#[test]
fn optimize_output_reloads_to_same_objective() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = tmp.path().join("empty.toml");
    fs::write(&empty, "").unwrap();
    run(&["optimize"], &empty, tmp.path());

    let text = fs::read_to_string(tmp.path().join("beamformer.json")).unwrap();
    let (bf, plan) = JptaBeamformer::from_json(&text).unwrap();
    let sc = Scenario::reference();
    assert_eq!(plan, sc.plan);
    let mapping = sc.mapping().unwrap();
    let reloaded = objective_f(&bf, &mapping, &plan).unwrap();
    let direct = sc.design_rainbow().unwrap();
    let fresh = objective_f(&direct.beamformer, &mapping, &plan).unwrap();
    assert!((reloaded - fresh).abs() <= 1e-12 * fresh, "{reloaded} vs {fresh}");

    let (h, rows) = read_csv(&tmp.path().join("f_trace.csv"));
    assert_eq!(h, ["iteration", "objective"]);
    assert_eq!(rows.len(), direct.trace.len());
    let last: f64 = rows.last().unwrap()[1].parse().unwrap();
    assert!((last - reloaded).abs() <= 1e-8 * reloaded);
}

#[test]
fn bench_and_witness_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    run(&["bench"], &cfg, tmp.path());
    let (h, rows) = read_csv(&tmp.path().join("runtime.csv"));
    assert_eq!(h, ["sweep", "m", "n_rx", "runs", "mean_seconds", "mean_iterations", "seconds_per_iteration"]);
    assert_eq!(rows.len(), 4);
    assert_eq!((rows[0][0].as_str(), rows[3][2].as_str()), ("m", "16"));

    run(&["witness", "--m", "3", "--seeds", "4"], &cfg, tmp.path());
    let w: serde_json::Value =
        serde_json::from_slice(&fs::read(tmp.path().join("witness.json")).unwrap()).unwrap();
    assert_eq!(w["subcarriers"], 3);
    assert_eq!(w["positive"], 4);
    assert!(w["min_residual"].as_f64().unwrap() > 1e-3);
}

#[test]
fn failures_print_one_error_line() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.toml");
    fs::write(&bad, "plan.bandwidth_hz = -1.0\n").unwrap();
    let o = bin().args(["run", "--config"]).arg(&bad).arg("--out").arg(tmp.path()).output().unwrap();
    assert!(!o.status.success());
    let err = String::from_utf8(o.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with("error: code=E_CONFIG_FIELD message="), "{err}");
    assert!(err.contains("bandwidth"));

    let o = bin().args(["run", "--config", "/nonexistent/cfg.toml"]).output().unwrap();
    assert!(String::from_utf8(o.stderr).unwrap().starts_with("error: code=E_IO"));

    let o = bin().args(["explode"]).output().unwrap();
    assert!(!o.status.success());
    assert!(String::from_utf8(o.stderr).unwrap().starts_with("error: code=E_USAGE"));
}

#[test]
fn output_directory_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let target = tmp.path().join("from_env");
    let o = bin()
        .args(["witness", "--m", "3", "--seeds", "2", "--config"])
        .arg(&cfg)
        .env("RAINBOWBF_OUT", &target)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(target.join("witness.json").exists());
}
