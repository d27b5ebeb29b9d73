//! 3 dB ground footprints: a few rainbow subcarriers versus one
//! beam-hopping beam.

use rainbowbf::beamformer::UvGrid;
use rainbowbf::channel::FrequencyPlan;
use rainbowbf::evaluation::{bh_beamformer, footprint_3db, Scenario};
use rainbowbf::geometry::UvDirection;

fn main() -> rainbowbf::Result<()> {
    let sc = Scenario {
        plan: FrequencyPlan::from_bandwidth(14e9, 1.4e9, 128)?,
        ..Scenario::reference()
    };
    let grid = UvGrid { resolution: 256 };
    // Each grid cell covers (2/256)² in UV; report its count and centroid.
    let summary = |label: &str, w, m| -> rainbowbf::Result<()> {
        let cells = footprint_3db(w, &sc.plan, m, &sc.geometry, &sc.satellite, grid)?;
        let n = cells.len().max(1) as f64;
        let (x, y) = cells.iter().fold((0.0, 0.0), |(a, b), p| {
            let (x, y) = p.planar();
            (a + x / 1e3, b + y / 1e3)
        });
        println!("{label:<12} m = {m:>3}: {:>5} cells, centroid ({:>7.1}, {:>7.1}) km", cells.len(), x / n, y / n);
        Ok(())
    };
    let rainbow = sc.design_rainbow()?.beamformer.all_weights(&sc.plan);
    for m in [0, 32, 64, 96, 127] {
        summary("rainbow", &rainbow, m)?;
    }
    let bh = bh_beamformer(UvDirection::new(0.3, 0.2)?, &sc.plan, &sc.geometry, true);
    for m in [0, 64, 127] {
        summary("bh_squint", &bh, m)?;
    }
    Ok(())
}
