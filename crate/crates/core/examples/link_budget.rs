//! Path loss, noise and the average SNR a single user sees through a
//! perfectly steered beam.

use rainbowbf::channel::{
    average_snr, mean_channel_power, noise_power, steering_vector, ArrayGeometry, FrequencyPlan,
    LinkBudget,
};
use rainbowbf::geometry::{user_geometry, GroundUserPosition, SatelliteGeometry};
use rainbowbf::{db_to_linear, dbm_to_watts, linear_to_db};

fn main() -> rainbowbf::Result<()> {
    let plan = FrequencyPlan::from_bandwidth(14e9, 1.4e9, 1024)?;
    let isotropic = LinkBudget::new(1.0, 1.0, 290.0)?;
    let fspl = linear_to_db(mean_channel_power(14e9, 500e3, &isotropic));
    println!("free-space channel power at 500 km, 14 GHz: {fspl:.2} dB");

    let link = LinkBudget::new(1.0, db_to_linear(43.2), 290.0)?;
    let sigma2 = noise_power(&plan, &link);
    println!("noise per subcarrier ({:.3} MHz): {:.2} dBm", plan.spacing / 1e6, linear_to_db(sigma2) + 30.0);

    let sat = SatelliteGeometry::with_altitude(500e3)?;
    let geom = ArrayGeometry::new(8, 8)?;
    let p = dbm_to_watts(23.0);
    for arc in [0.0, 250e3, 500e3] {
        let (dir, d) = user_geometry(&sat, &GroundUserPosition::new(arc, 0.0)?)?;
        let a = steering_vector(1.0, &geom, dir);
        let eta = mean_channel_power(plan.center, d, &link);
        let gamma = average_snr(&a, &a, eta, sigma2, geom.n_rx())?;
        println!(
            "user {:>3.0} km off nadir: slant {:.0} km, SNR with 23 dBm on one subcarrier {:.1} dB",
            arc / 1e3,
            d / 1e3,
            linear_to_db(p * gamma)
        );
    }
    Ok(())
}
