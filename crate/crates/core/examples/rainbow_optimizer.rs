//! Fits the JPTA delays and phases to a frequency-direction mapping and
//! writes the result as JSON.
//!
//! `cargo run --release --example rainbow_optimizer -- [subcarriers] [out.json]`

use rainbowbf::beamformer::{objective_f, residual, JptaBeamformer};
use rainbowbf::channel::FrequencyPlan;
use rainbowbf::evaluation::Scenario;

fn main() -> rainbowbf::Result<()> {
    let mut args = std::env::args().skip(1);
    let m: usize = args.next().map_or(256, |s| s.parse().expect("subcarrier count"));
    let out = args.next();

    let sc = Scenario {
        plan: FrequencyPlan::from_bandwidth(14e9, 1.4e9, m)?,
        ..Scenario::reference()
    };
    let mapping = sc.mapping()?;
    let r = sc.design_rainbow()?;
    let mn = (m * sc.geometry.n_rx()) as f64;
    for (i, f) in r.trace.iter().enumerate() {
        println!("iter {i:>3}  F/MN = {:.6}", f / mn);
    }
    println!(
        "converged {} after {} iterations in {:.2?}; residual {:.1}",
        r.converged,
        r.iterations(),
        r.elapsed,
        residual(&r.beamformer, &mapping, &sc.plan)?
    );
    let max_delay = r.beamformer.delays.iter().cloned().fold(0.0, f64::max);
    println!("largest delay {:.3} ns", max_delay * 1e9);

    let json = r.beamformer.to_json(&sc.plan)?;
    let (back, plan) = JptaBeamformer::from_json(&json)?;
    assert_eq!(objective_f(&back, &mapping, &plan)?, objective_f(&r.beamformer, &mapping, &sc.plan)?);
    if let Some(path) = out {
        std::fs::write(&path, json).expect("write beamformer");
        println!("wrote {path}");
    }
    Ok(())
}
