//! Three subcarriers with random target directions can generally not all be
//! hit exactly; one subcarrier always can.

use rainbowbf::beamformer::{infeasibility_witness, WitnessConfig};
use rainbowbf::rng::SeedTree;

fn main() -> rainbowbf::Result<()> {
    let cfg = WitnessConfig {
        seeds: 20,
        ..WitnessConfig::default()
    };
    let r = infeasibility_witness(&cfg, &SeedTree::new(2024))?;
    println!(
        "M = {}: {}/{} mappings keep a residual above {}; smallest {:.3}",
        r.subcarriers, r.positive, r.seeds, r.tolerance, r.min_residual
    );
    println!("M = 1 control residual {:.2e}", r.control_single_residual);
    println!("M = 2 control residual {:.2e}", r.control_pair_residual);
    let c = &r.consistency;
    println!(
        "frequencies ({:.3}, {:.3}, {:.3}): integers consistent {}, one half excluded {}",
        c.f_p, c.f_q, c.f_s, c.integers_included, c.half_excluded
    );
    Ok(())
}
