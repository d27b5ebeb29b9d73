//! Scenario files: partial input, defaults filled in, dotted-key output.

use rainbowbf::cli::ScenarioConfig;

fn main() -> rainbowbf::Result<()> {
    let cfg = ScenarioConfig::parse(
        "plan.subcarriers = 256\nusers.count = 16\nevaluation.schemes = [\"rainbow\", \"bh_squint:maxch\"]\n",
    )?;
    print!("{}", cfg.to_toml());
    let sc = cfg.scenario(cfg.evaluation.seed)?;
    println!("# per-user budget {:.3} W, kappa {:.1}, u_max {:.4}", sc.power_budget, sc.rician_kappa, sc.u_max()?);

    match ScenarioConfig::parse("plan.bandwidth_hz = -1") {
        Err(e) => println!("# rejected: {} ({})", e, e.code()),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
