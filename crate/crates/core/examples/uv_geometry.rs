//! Users on a curved Earth and where they land in the UV plane.

use rainbowbf::geometry::{sample_users, user_geometry, SatelliteGeometry};
use rainbowbf::rng::{tag, SeedTree};

fn main() -> rainbowbf::Result<()> {
    let sat = SatelliteGeometry::with_altitude(500e3)?;
    let edge = sat.uv_radius_at(500e3)?;
    println!("coverage edge at 500 km maps to UV radius {edge:.4}");
    println!("horizon central angle {:.2} deg", sat.horizon_central_angle().to_degrees());

    let mut rng = SeedTree::new(1).stream(&[tag::USERS]);
    let users = sample_users(6, 500e3, sat.earth_radius, &mut rng)?;
    println!("{:>10} {:>9} {:>8} {:>8} {:>11}", "arc_km", "bearing", "u", "v", "slant_km");
    for p in &users {
        let (dir, slant) = user_geometry(&sat, p)?;
        println!(
            "{:>10.1} {:>9.3} {:>8.4} {:>8.4} {:>11.1}",
            p.arc_distance / 1e3,
            p.bearing,
            dir.u,
            dir.v,
            slant / 1e3
        );
        // And back again.
        let back = sat.ground_from_uv(dir).expect("below the horizon");
        assert!((back.arc_distance - p.arc_distance).abs() < 1e-3);
    }
    Ok(())
}
