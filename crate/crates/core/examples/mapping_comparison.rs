//! Spiral versus line mapping, each fitted with delays (JPTA) and without
//! them (phase shifters only).
//!
//! `cargo run --release --example mapping_comparison -- [subcarriers]`

use rainbowbf::beamformer::{optimize_rainbow, OptimizerSettings, UvGrid};
use rainbowbf::channel::FrequencyPlan;
use rainbowbf::evaluation::{beam_metrics, MappingSpec, Scenario};

fn main() -> rainbowbf::Result<()> {
    let m: usize = std::env::args().nth(1).map_or(256, |s| s.parse().expect("subcarrier count"));
    let sc = Scenario {
        plan: FrequencyPlan::from_bandwidth(14e9, 1.4e9, m)?,
        ..Scenario::reference()
    };
    let u_max = sc.u_max()?;
    let mn = (m * sc.geometry.n_rx()) as f64;
    println!("{:<8} {:<5} {:>7} {:>15} {:>10}", "mapping", "array", "F/MN", "matching_error", "mean_gain");
    for (label, spec) in [("spiral", MappingSpec::spiral()), ("lines", MappingSpec::lines())] {
        let mapping = spec.build(m, u_max, &sc.geometry)?;
        for (array, tau_max) in [("jpta", sc.optimizer.tau_max), ("pa", 0.0)] {
            let settings = OptimizerSettings {
                tau_max,
                ..sc.optimizer.clone()
            };
            let r = optimize_rainbow(&mapping, &sc.plan, &sc.geometry, &settings)?;
            let rows = beam_metrics(&r.beamformer, &mapping, &sc.plan, UvGrid::default(), label, array)?;
            let n = rows.len() as f64;
            println!(
                "{label:<8} {array:<5} {:>7.3} {:>15.4} {:>10.1}",
                r.objective() / mn,
                rows.iter().map(|x| x.matching_error).sum::<f64>() / n,
                rows.iter().map(|x| x.gain).sum::<f64>() / n
            );
        }
    }
    Ok(())
}
