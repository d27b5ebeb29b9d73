//! The four subcommands. Each one reads a validated configuration, writes
//! its artifacts into an output directory and returns the written paths.

use std::fs;
use std::path::{Path, PathBuf};

use super::config::ScenarioConfig;
use crate::beamformer::{infeasibility_witness, optimize_rainbow, OptimizationResult, UvGrid};
use crate::channel::{ArrayGeometry, FrequencyPlan};
use crate::evaluation::{
    allocation_comparison, beam_metrics, beam_sharing_beamformer, bh_beamformer, footprint_3db,
    run_scenario, runtime_benchmark, sweep_bandwidth, sweep_users, MappingKind, Scenario,
    RuntimeRow,
};
use crate::geometry::UvDirection;
use crate::rng::{tag, SeedTree};
use crate::{Error, Result};

/// Nine significant digits.
fn num(x: f64) -> String {
    format!("{x:.8e}")
}

/// Minimal CSV builder; no field ever needs quoting.
struct Csv {
    text: String,
}

impl Csv {
    fn new(header: &[&str]) -> Self {
        Csv {
            text: header.join(",") + "\n",
        }
    }

    fn row(&mut self, fields: &[String]) {
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    fn write(&self, dir: &Path, name: &str) -> Result<PathBuf> {
        write_file(dir, name, &self.text)
    }
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

fn prepare(out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))
}

fn trace_csv(result: &OptimizationResult) -> Csv {
    let mut csv = Csv::new(&["iteration", "objective"]);
    for (i, f) in result.trace.iter().enumerate() {
        csv.row(&[i.to_string(), num(*f)]);
    }
    csv
}

/// Fits the rainbow beam; writes `beamformer.json` and `f_trace.csv`.
pub fn cmd_optimize(cfg: &ScenarioConfig, seed: u64, out: &Path) -> Result<Vec<PathBuf>> {
    prepare(out)?;
    let sc = cfg.scenario(seed)?;
    let result = sc.design_rainbow()?;
    let json = result.beamformer.to_json(&sc.plan)?;
    Ok(vec![
        write_file(out, "beamformer.json", &json)?,
        trace_csv(&result).write(out, "f_trace.csv")?,
    ])
}

fn with_mapping(sc: &Scenario, kind: MappingKind) -> Scenario {
    let mut s = sc.clone();
    s.mapping.kind = kind;
    s
}

fn evenly_spaced(count: usize, len: usize) -> Vec<usize> {
    match count.min(len) {
        0 => vec![],
        1 => vec![len / 2],
        c => {
            let mut v: Vec<usize> = (0..c).map(|i| (i * (len - 1) + (c - 1) / 2) / (c - 1)).collect();
            v.dedup();
            v
        }
    }
}

/// Runs the evaluation: user and bandwidth sweeps, per-subcarrier beam
/// metrics for both mappings, footprints, the allocator comparison and one
/// full report.
pub fn cmd_run(cfg: &ScenarioConfig, seed: u64, out: &Path) -> Result<Vec<PathBuf>> {
    prepare(out)?;
    let ev = &cfg.evaluation;
    let sc = cfg.scenario(seed)?;
    let master = SeedTree::new(seed);
    let mut written = vec![write_file(out, "config.toml", &cfg.to_toml())?];

    let rows = sweep_users(&sc, &ev.k_values, ev.seeds, &master)?;
    let mut thr = Csv::new(&[
        "users",
        "scheme",
        "seeds",
        "throughput_bps",
        "throughput_std_bps",
        "approx_throughput_bps",
    ]);
    let mut act = Csv::new(&["users", "scheme", "seeds", "active_ratio", "footprint_bound"]);
    for r in &rows {
        thr.row(&[
            r.users.to_string(),
            r.scheme.to_string(),
            r.seeds.to_string(),
            num(r.throughput_bps),
            num(r.throughput_std_bps),
            num(r.approx_throughput_bps),
        ]);
        act.row(&[
            r.users.to_string(),
            r.scheme.to_string(),
            r.seeds.to_string(),
            num(r.active_ratio),
            num(r.footprint_bound),
        ]);
    }
    written.push(thr.write(out, "throughput_vs_K.csv")?);
    written.push(act.write(out, "active_ratio.csv")?);

    let rows = sweep_bandwidth(&sc, &ev.bandwidths_hz, ev.seeds, &master)?;
    let mut bw = Csv::new(&[
        "bandwidth_hz",
        "users",
        "scheme",
        "seeds",
        "throughput_bps",
        "throughput_std_bps",
        "approx_throughput_bps",
    ]);
    for r in &rows {
        bw.row(&[
            num(r.bandwidth_hz),
            r.users.to_string(),
            r.scheme.to_string(),
            r.seeds.to_string(),
            num(r.throughput_bps),
            num(r.throughput_std_bps),
            num(r.approx_throughput_bps),
        ]);
    }
    written.push(bw.write(out, "throughput_vs_bandwidth.csv")?);

    // Both mappings, with and without delays.
    let grid = UvGrid {
        resolution: ev.grid_resolution,
    };
    let mut bm = Csv::new(&[
        "mapping",
        "array",
        "m",
        "frequency_hz",
        "u_des",
        "v_des",
        "u_opt",
        "v_opt",
        "matching_error",
        "gain",
    ]);
    let mut designed = None;
    for (kind, label) in [(MappingKind::Spiral, "spiral"), (MappingKind::Lines, "lines")] {
        let s = with_mapping(&sc, kind);
        let mapping = s.mapping()?;
        for (array, tau_max) in [("jpta", s.optimizer.tau_max), ("pa", 0.0)] {
            let mut settings = s.optimizer.clone();
            settings.tau_max = tau_max;
            let r = optimize_rainbow(&mapping, &s.plan, &s.geometry, &settings)?;
            for row in beam_metrics(&r.beamformer, &mapping, &s.plan, grid, label, array)? {
                bm.row(&[
                    row.mapping,
                    row.array,
                    row.m.to_string(),
                    num(row.frequency_hz),
                    num(row.desired.u),
                    num(row.desired.v),
                    num(row.measured.u),
                    num(row.measured.v),
                    num(row.matching_error),
                    num(row.gain),
                ]);
            }
            if kind == sc.mapping.kind && array == "jpta" {
                designed = Some(r);
            }
        }
    }
    written.push(bm.write(out, "beam_metrics.csv")?);
    let designed = designed.expect("configured mapping was fitted");

    // Footprints of the rainbow beam and of the baselines for one user drop.
    let drop = master.path(&[tag::REPORT]);
    let users = sc.draw_users(&drop)?;
    let dirs: Vec<UvDirection> = users.iter().map(|u| u.direction).collect();
    let fp_grid = UvGrid {
        resolution: ev.footprint_resolution,
    };
    let picks = evenly_spaced(ev.footprint_subcarriers, sc.plan.subcarriers);
    let mut fp = Csv::new(&["scheme", "m", "x_km", "y_km"]);
    let schemes = [
        ("rainbow", designed.beamformer.all_weights(&sc.plan)),
        ("bh_squint", bh_beamformer(dirs[0], &sc.plan, &sc.geometry, true)),
        ("bh_no_squint", bh_beamformer(dirs[0], &sc.plan, &sc.geometry, false)),
        ("beam_sharing", beam_sharing_beamformer(&dirs, &sc.geometry)?),
    ];
    for (label, weights) in &schemes {
        for &m in &picks {
            for p in footprint_3db(weights, &sc.plan, m, &sc.geometry, &sc.satellite, fp_grid)? {
                let (x, y) = p.planar();
                fp.row(&[label.to_string(), m.to_string(), num(x / 1e3), num(y / 1e3)]);
            }
        }
    }
    written.push(fp.write(out, "footprints.csv")?);

    let a = &cfg.allocation;
    let small = Scenario {
        plan: FrequencyPlan::from_bandwidth(sc.plan.center, sc.plan.bandwidth(), a.subcarriers)?,
        ..sc.with_users(a.users)
    };
    let mut ac = Csv::new(&["kappa_db", "allocator", "seeds", "throughput_bps", "approx_throughput_bps"]);
    for r in allocation_comparison(&small, &a.kappas_db, a.seeds, &master.child(tag::ALLOCATION))? {
        ac.row(&[
            num(r.kappa_db),
            r.allocator,
            r.seeds.to_string(),
            num(r.throughput_bps),
            num(r.approx_throughput_bps),
        ]);
    }
    written.push(ac.write(out, "allocation_comparison.csv")?);

    let report = run_scenario(&sc, &drop, Some(&designed))?;
    let json = serde_json::to_string_pretty(&report)?;
    written.push(write_file(out, "report.json", &json)?);
    Ok(written)
}

/// Times the optimizer over the configured problem sizes; writes
/// `runtime.csv`.
pub fn cmd_bench(cfg: &ScenarioConfig, seed: u64, out: &Path) -> Result<Vec<PathBuf>> {
    prepare(out)?;
    let b = &cfg.bench;
    let sc = cfg.scenario(seed)?;
    let by_m = runtime_benchmark(&sc, &b.subcarriers, &[sc.geometry], b.runs, &sc.optimizer)?;
    let arrays = b
        .array_sides
        .iter()
        .map(|&n| ArrayGeometry::new(n, n))
        .collect::<Result<Vec<_>>>()?;
    let by_n = runtime_benchmark(&sc, &[b.array_subcarriers], &arrays, b.runs, &sc.optimizer)?;
    let mut csv = Csv::new(&[
        "sweep",
        "m",
        "n_rx",
        "runs",
        "mean_seconds",
        "mean_iterations",
        "seconds_per_iteration",
    ]);
    let mut push = |sweep: &str, r: &RuntimeRow| {
        csv.row(&[
            sweep.to_string(),
            r.m.to_string(),
            r.n_rx.to_string(),
            r.runs.to_string(),
            num(r.mean_seconds),
            num(r.mean_iterations),
            num(r.seconds_per_iteration()),
        ])
    };
    by_m.iter().for_each(|r| push("m", r));
    by_n.iter().for_each(|r| push("n_rx", r));
    Ok(vec![csv.write(out, "runtime.csv")?])
}

/// Runs the infeasibility witness; writes `witness.json`.
pub fn cmd_witness(
    cfg: &ScenarioConfig,
    seed: u64,
    subcarriers: usize,
    seeds: usize,
    out: &Path,
) -> Result<Vec<PathBuf>> {
    prepare(out)?;
    let wc = cfg.witness(subcarriers, seeds)?;
    let report = infeasibility_witness(&wc, &SeedTree::new(seed))?;
    let json = serde_json::to_string_pretty(&report)?;
    Ok(vec![write_file(out, "witness.json", &json)?])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_of_sampled_subcarriers() {
        assert_eq!(evenly_spaced(3, 9), vec![0, 4, 8]);
        assert_eq!(evenly_spaced(1, 9), vec![4]);
        assert_eq!(evenly_spaced(20, 4), vec![0, 1, 2, 3]);
        assert!(evenly_spaced(0, 4).is_empty());
    }

    #[test]
    fn nine_significant_digits() {
        assert_eq!(num(1.0 / 3.0), "3.33333333e-1");
        assert_eq!(num(-1400e6), "-1.40000000e9");
    }
}
