//! Optimizer wall-clock against subcarrier count and array size.

use rainbowbf::beamformer::OptimizerSettings;
use rainbowbf::channel::ArrayGeometry;
use rainbowbf::evaluation::{loglog_slope, runtime_benchmark, Scenario};

fn main() -> rainbowbf::Result<()> {
    let sc = Scenario::reference();
    // A fixed iteration count isolates the per-iteration cost.
    let settings = OptimizerSettings {
        convergence_tol: 0.0,
        max_iterations: 3,
        ..OptimizerSettings::default()
    };
    let by_m = runtime_benchmark(&sc, &[128, 256, 512, 1024], &[ArrayGeometry::new(8, 8)?], 2, &settings)?;
    let arrays = [ArrayGeometry::new(4, 4)?, ArrayGeometry::new(8, 8)?, ArrayGeometry::new(16, 16)?];
    let by_n = runtime_benchmark(&sc, &[256], &arrays, 2, &settings)?;
    for r in by_m.iter().chain(&by_n) {
        println!("M = {:>5}, N = {:>4}: {:.4} s per iteration", r.m, r.n_rx, r.seconds_per_iteration());
    }
    let slope = |rows: &[rainbowbf::evaluation::RuntimeRow], x: fn(&rainbowbf::evaluation::RuntimeRow) -> usize| {
        let xs: Vec<f64> = rows.iter().map(|r| x(r) as f64).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.seconds_per_iteration()).collect();
        loglog_slope(&xs, &ys)
    };
    println!("log-log slope in M {:.2}, in N {:.2}", slope(&by_m, |r| r.m), slope(&by_n, |r| r.n_rx));
    Ok(())
}
