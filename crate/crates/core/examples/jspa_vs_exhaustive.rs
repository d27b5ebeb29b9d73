//! Greedy allocation against exhaustive search on small rainbow instances
//! (5 users, 8 subcarriers), for several Rician factors.

use rainbowbf::channel::FrequencyPlan;
use rainbowbf::evaluation::{allocation_comparison, Scenario};
use rainbowbf::rng::{tag, SeedTree};

fn main() -> rainbowbf::Result<()> {
    let seeds: usize = std::env::args().nth(1).map_or(100, |s| s.parse().expect("seed count"));
    let base = Scenario {
        plan: FrequencyPlan::from_bandwidth(14e9, 1.4e9, 8)?,
        ..Scenario::reference().with_users(5)
    };
    let rows = allocation_comparison(&base, &[0.0, 10.0, 20.0, 30.0], seeds, &SeedTree::new(2024).child(tag::ALLOCATION))?;
    println!("{:>6} {:<16} {:>12} {:>12}", "kappa", "allocator", "Mbps", "approx_Mbps");
    for r in rows {
        println!(
            "{:>6.0} {:<16} {:>12.2} {:>12.2}",
            r.kappa_db,
            r.allocator,
            r.throughput_bps / 1e6,
            r.approx_throughput_bps / 1e6
        );
    }
    Ok(())
}
