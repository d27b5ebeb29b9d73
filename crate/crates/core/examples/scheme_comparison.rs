//! Rainbow beam against beam hopping and beam sharing as the number of
//! users grows. Desk scale: 256 subcarriers.

use rainbowbf::channel::FrequencyPlan;
use rainbowbf::evaluation::{sweep_users, Scenario};
use rainbowbf::rng::SeedTree;

fn main() -> rainbowbf::Result<()> {
    let base = Scenario {
        plan: FrequencyPlan::from_bandwidth(14e9, 1.4e9, 256)?,
        ..Scenario::reference()
    };
    let rows = sweep_users(&base, &[1, 4, 16, 64], 3, &SeedTree::new(2024))?;
    println!("{:>4} {:<28} {:>10} {:>7} {:>7}", "K", "scheme", "Mbps", "active", "bound");
    for r in rows {
        println!(
            "{:>4} {:<28} {:>10.1} {:>7.3} {:>7.3}",
            r.users,
            r.scheme.to_string(),
            r.throughput_bps / 1e6,
            r.active_ratio,
            r.footprint_bound
        );
    }
    Ok(())
}
