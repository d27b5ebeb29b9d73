//! Water-filling over one user's subcarriers.

use rainbowbf::allocation::water_fill;

fn main() -> rainbowbf::Result<()> {
    let gammas = [10.0, 4.0, 1.0, 0.1, 0.0];
    for budget in [0.1, 1.0, 10.0] {
        let wf = water_fill(&gammas, budget)?;
        let rate: f64 = gammas.iter().zip(&wf.powers).map(|(g, p)| (1.0 + g * p).log2()).sum();
        let powers: Vec<String> = wf.powers.iter().map(|p| format!("{p:.3}")).collect();
        println!(
            "P = {budget:>5}: level {:.3}, powers [{}], rate {rate:.3} bit/s/Hz",
            wf.water_level,
            powers.join(", ")
        );
    }
    Ok(())
}
