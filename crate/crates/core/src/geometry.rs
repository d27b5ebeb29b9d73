//! Curved-Earth satellite/user geometry and the spherical-to-UV mapping.
//!
//! The satellite sits at altitude `h` above the sub-satellite point, looking
//! straight down. A ground user is described by its great-circle distance from
//! the sub-satellite point and a bearing; both map one-to-one onto the
//! off-nadir/azimuth angles seen from the satellite and hence onto the UV
//! plane `u = sin(θna)·cos(θaz)`, `v = sin(θna)·sin(θaz)`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Mean Earth radius used when none is configured, in meters.
pub const DEFAULT_EARTH_RADIUS: f64 = 6_371_000.0;

const UV_SLACK: f64 = 1e-12;

/// A beam or arrival direction in the UV plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UvDirection {
    pub u: f64,
    pub v: f64,
}

impl UvDirection {
    /// Builds a direction, rejecting points outside the unit disk.
    pub fn new(u: f64, v: f64) -> Result<Self> {
        if !u.is_finite() || !v.is_finite() || u * u + v * v > 1.0 + UV_SLACK {
            return Err(Error::Domain(format!(
                "({u}, {v}) lies outside the unit UV disk"
            )));
        }
        Ok(UvDirection { u, v })
    }

    pub const fn origin() -> Self {
        UvDirection { u: 0.0, v: 0.0 }
    }

    /// Distance from the UV origin, `sin(θna)`.
    pub fn radius(&self) -> f64 {
        self.u.hypot(self.v)
    }

    /// Off-nadir and azimuth angles `(θna, θaz)` with `θaz ∈ [0, 2π)`.
    pub fn to_angles(&self) -> (f64, f64) {
        let na = self.radius().min(1.0).asin();
        let az = self.v.atan2(self.u).rem_euclid(TAU);
        (na, az)
    }
}

/// Maps off-nadir/azimuth angles to the UV plane.
pub fn uv_from_angles(theta_nadir: f64, theta_azimuth: f64) -> Result<UvDirection> {
    if !(0.0..=FRAC_PI_2).contains(&theta_nadir) {
        return Err(Error::Domain(format!(
            "off-nadir angle {theta_nadir} outside [0, π/2]"
        )));
    }
    if !(0.0..TAU).contains(&theta_azimuth) {
        return Err(Error::Domain(format!(
            "azimuth {theta_azimuth} outside [0, 2π)"
        )));
    }
    let s = theta_nadir.sin();
    Ok(UvDirection {
        u: s * theta_azimuth.cos(),
        v: s * theta_azimuth.sin(),
    })
}

/// Great-circle position of a ground user relative to the sub-satellite point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundUserPosition {
    /// Surface distance from the sub-satellite point, meters.
    pub arc_distance: f64,
    /// Bearing from the +x axis, radians in `[0, 2π)`.
    pub bearing: f64,
}

impl GroundUserPosition {
    pub fn new(arc_distance: f64, bearing: f64) -> Result<Self> {
        if !(arc_distance.is_finite() && arc_distance >= 0.0) {
            return Err(Error::Domain(format!(
                "arc distance {arc_distance} must be finite and non-negative"
            )));
        }
        if !bearing.is_finite() {
            return Err(Error::Domain("bearing must be finite".into()));
        }
        Ok(GroundUserPosition {
            arc_distance,
            bearing: bearing.rem_euclid(TAU),
        })
    }

    /// Azimuthal-equidistant ground coordinates `(x, y)` in meters.
    pub fn planar(&self) -> (f64, f64) {
        (
            self.arc_distance * self.bearing.cos(),
            self.arc_distance * self.bearing.sin(),
        )
    }
}

/// Satellite altitude and Earth radius; defines the nadir-centered frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SatelliteGeometry {
    pub altitude: f64,
    pub earth_radius: f64,
}

impl SatelliteGeometry {
    pub fn new(altitude: f64, earth_radius: f64) -> Result<Self> {
        if !(altitude > 0.0 && altitude.is_finite()) {
            return Err(Error::Domain(format!("altitude {altitude} must be positive")));
        }
        if !(earth_radius > 0.0 && earth_radius.is_finite()) {
            return Err(Error::Domain(format!(
                "earth radius {earth_radius} must be positive"
            )));
        }
        Ok(SatelliteGeometry {
            altitude,
            earth_radius,
        })
    }

    /// Satellite at `altitude` over a 6371 km Earth.
    pub fn with_altitude(altitude: f64) -> Result<Self> {
        Self::new(altitude, DEFAULT_EARTH_RADIUS)
    }

    fn orbit_radius(&self) -> f64 {
        self.earth_radius + self.altitude
    }

    /// Central angle of the geometric horizon seen from the satellite.
    pub fn horizon_central_angle(&self) -> f64 {
        (self.earth_radius / self.orbit_radius()).acos()
    }

    /// UV radius `sin(θna)` of a ground ring at the given arc distance.
    pub fn uv_radius_at(&self, arc_distance: f64) -> Result<f64> {
        let pos = GroundUserPosition::new(arc_distance, 0.0)?;
        Ok(user_geometry(self, &pos)?.0.u)
    }

    /// Inverse of [`user_geometry`]: the ground point hit by a UV direction,
    /// or `None` when the ray misses the Earth.
    pub fn ground_from_uv(&self, dir: UvDirection) -> Option<GroundUserPosition> {
        let (na, az) = dir.to_angles();
        let r = self.earth_radius;
        let rs = self.orbit_radius();
        let (s, c) = na.sin_cos();
        let disc = r * r - rs * rs * s * s;
        if disc < 0.0 {
            return None;
        }
        // nearer of the two sphere intersections
        let slant = rs * c - disc.sqrt();
        let psi = (slant * s).atan2(rs - slant * c);
        Some(GroundUserPosition {
            arc_distance: r * psi,
            bearing: az,
        })
    }
}

/// UV direction and slant distance of a ground user.
///
/// The user sits at central angle `ψ = arc/R`; the slant range follows from the
/// law of cosines and the off-nadir angle from the law of sines.
pub fn user_geometry(
    sat: &SatelliteGeometry,
    pos: &GroundUserPosition,
) -> Result<(UvDirection, f64)> {
    let r = sat.earth_radius;
    let rs = sat.orbit_radius();
    let psi = pos.arc_distance / r;
    if psi > sat.horizon_central_angle() {
        return Err(Error::Domain(format!(
            "user at arc distance {} m is beyond the satellite horizon",
            pos.arc_distance
        )));
    }
    let slant = (r * r + rs * rs - 2.0 * r * rs * psi.cos()).sqrt();
    let sin_na = if slant > 0.0 {
        (r * psi.sin() / slant).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let na = sin_na.asin();
    let dir = uv_from_angles(na, pos.bearing.rem_euclid(TAU))?;
    Ok((dir, slant))
}

/// Draws `count` users uniformly over the spherical cap of the given radius.
///
/// The cap area up to central angle `ψ` is proportional to `1 − cos ψ`, so
/// `cos ψ` is drawn uniformly between `cos ψmax` and 1.
pub fn sample_users<R: Rng + ?Sized>(
    count: usize,
    coverage_radius: f64,
    earth_radius: f64,
    rng: &mut R,
) -> Result<Vec<GroundUserPosition>> {
    if count == 0 {
        return Err(Error::InvalidInput("user count must be at least 1".into()));
    }
    if !(coverage_radius > 0.0) || !(earth_radius > 0.0) {
        return Err(Error::InvalidInput(
            "coverage and earth radius must be positive".into(),
        ));
    }
    let psi_max = coverage_radius / earth_radius;
    if psi_max > PI {
        return Err(Error::InvalidInput(
            "coverage radius exceeds half the Earth circumference".into(),
        ));
    }
    let one_minus_cos_max = 1.0 - psi_max.cos();
    let users = (0..count)
        .map(|_| {
            let x: f64 = rng.gen();
            let cos_psi = 1.0 - x * one_minus_cos_max;
            let arc = (earth_radius * cos_psi.clamp(-1.0, 1.0).acos()).min(coverage_radius);
            let bearing = rng.gen::<f64>() * TAU;
            GroundUserPosition {
                arc_distance: arc,
                bearing: bearing.rem_euclid(TAU),
            }
        })
        .collect();
    Ok(users)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedTree;
    use std::f64::consts::FRAC_PI_6;

    fn leo() -> SatelliteGeometry {
        SatelliteGeometry::new(500e3, 6371e3).unwrap()
    }

    #[test]
    fn uv_from_angles_examples() {
        let o = uv_from_angles(0.0, 1.234).unwrap();
        assert_eq!((o.u, o.v), (0.0, 0.0));
        let h = uv_from_angles(FRAC_PI_2, 0.0).unwrap();
        assert!((h.u - 1.0).abs() < 1e-15 && h.v.abs() < 1e-15);
        let p = uv_from_angles(FRAC_PI_6, FRAC_PI_2).unwrap();
        assert!(p.u.abs() < 1e-15 && (p.v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn uv_from_angles_rejects_out_of_range() {
        assert!(uv_from_angles(-0.1, 0.0).is_err());
        assert!(uv_from_angles(2.0, 0.0).is_err());
        assert!(uv_from_angles(0.5, TAU).is_err());
        assert!(UvDirection::new(0.8, 0.8).is_err());
    }

    #[test]
    fn sub_satellite_point() {
        let (dir, d) = user_geometry(&leo(), &GroundUserPosition::new(0.0, 1.0).unwrap()).unwrap();
        assert_eq!((dir.u, dir.v), (0.0, 0.0));
        assert!((d - 500e3).abs() < 1e-6);
    }

    #[test]
    fn edge_of_coverage_matches_law_of_cosines() {
        // values from an independent law-of-cosines evaluation
        let (dir, d) =
            user_geometry(&leo(), &GroundUserPosition::new(500e3, 0.0).unwrap()).unwrap();
        assert!((d - 720_750.855_036_867_1).abs() / d < 1e-12);
        assert!((dir.u - 0.693_009_085_322_881_2).abs() < 1e-12);
        assert!(dir.v.abs() < 1e-15);
    }

    #[test]
    fn small_angle_series() {
        let sat = leo();
        let (r, h) = (sat.earth_radius, sat.altitude);
        let arc = 1e3;
        let psi = arc / r;
        let d2 = h * h + r * (r + h) * psi * psi - r * (r + h) * psi.powi(4) / 12.0;
        let d_series = d2.sqrt();
        let sin_psi = psi - psi.powi(3) / 6.0;
        let na_series = (r * sin_psi / d_series).asin();
        let (dir, d) = user_geometry(&sat, &GroundUserPosition::new(arc, 0.0).unwrap()).unwrap();
        assert!((d - d_series).abs() / d_series < 1e-6);
        assert!((dir.u.asin() - na_series).abs() / na_series < 1e-6);
    }

    #[test]
    fn beyond_horizon_is_a_domain_error() {
        let sat = leo();
        let arc = sat.horizon_central_angle() * sat.earth_radius * 1.01;
        assert!(user_geometry(&sat, &GroundUserPosition::new(arc, 0.0).unwrap()).is_err());
    }

    #[test]
    fn ground_from_uv_inverts_user_geometry() {
        let sat = leo();
        for &(arc, b) in &[(0.0, 0.0), (12e3, 2.0), (250e3, 4.0), (500e3, 5.5)] {
            let pos = GroundUserPosition::new(arc, b).unwrap();
            let (dir, _) = user_geometry(&sat, &pos).unwrap();
            let back = sat.ground_from_uv(dir).unwrap();
            assert!((back.arc_distance - arc).abs() < 1e-5, "{arc} vs {}", back.arc_distance);
            if arc > 0.0 {
                assert!((back.bearing - b).abs() < 1e-9);
            }
        }
        assert!(sat.ground_from_uv(UvDirection::new(0.99, 0.0).unwrap()).is_none());
    }

    #[test]
    fn sampling_is_deterministic_and_bounded() {
        let tree = SeedTree::new(9);
        let a = sample_users(4, 500e3, DEFAULT_EARTH_RADIUS, &mut tree.rng()).unwrap();
        let b = sample_users(4, 500e3, DEFAULT_EARTH_RADIUS, &mut tree.rng()).unwrap();
        assert_eq!(a, b);
        assert!(sample_users(0, 500e3, DEFAULT_EARTH_RADIUS, &mut tree.rng()).is_err());
    }

    #[test]
    fn sampling_matches_cap_mean() {
        let r = DEFAULT_EARTH_RADIUS;
        let radius = 500e3;
        let users = sample_users(100_000, radius, r, &mut SeedTree::new(3).rng()).unwrap();
        let mean_cos: f64 =
            users.iter().map(|p| (p.arc_distance / r).cos()).sum::<f64>() / users.len() as f64;
        let analytic = (1.0 + (radius / r).cos()) / 2.0;
        assert!((mean_cos - analytic).abs() / analytic < 0.01);
        // the cos-mean is nearly 1 at this scale, so also check the area fraction
        // inside half the radius: (1 - cos(ψ/2)) / (1 - cos ψ)
        let inner = users.iter().filter(|p| p.arc_distance <= radius / 2.0).count() as f64
            / users.len() as f64;
        let expect = (1.0 - (radius / (2.0 * r)).cos()) / (1.0 - (radius / r).cos());
        assert!((inner - expect).abs() < 0.01, "{inner} vs {expect}");
    }
}
