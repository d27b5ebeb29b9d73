//! Reference beamformers the rainbow beam is compared against.

use crate::channel::{steering_vector, ArrayGeometry, BeamWeights, FrequencyPlan};
use crate::geometry::UvDirection;
use crate::{Complex, Error, Result};

/// Beam-hopping weights aimed at `target`.
///
/// With `squint` the array only has phase shifters: every subcarrier uses the
/// center-frequency steering vector, so off-center subcarriers point slightly
/// off target. Without it each subcarrier gets its own steering vector, an
/// ideal time-delay array.
pub fn bh_beamformer(
    target: UvDirection,
    plan: &FrequencyPlan,
    geom: &ArrayGeometry,
    squint: bool,
) -> BeamWeights {
    if squint {
        BeamWeights::Flat(steering_vector(1.0, geom, target))
    } else {
        let mut data = Vec::with_capacity(geom.n_rx() * plan.subcarriers);
        for r in plan.ratios() {
            data.extend(steering_vector(r, geom, target));
        }
        BeamWeights::PerSubcarrier {
            n_rx: geom.n_rx(),
            data,
        }
    }
}

/// One frequency-flat multi-lobe beam: the normalized sum of the
/// center-frequency steering vectors toward every user, scaled so that
/// `‖w‖² = N_rx`.
pub fn beam_sharing_beamformer(
    user_dirs: &[UvDirection],
    geom: &ArrayGeometry,
) -> Result<BeamWeights> {
    if user_dirs.is_empty() {
        return Err(Error::InvalidInput("beam sharing needs at least one user".into()));
    }
    let mut sum = vec![Complex::new(0.0, 0.0); geom.n_rx()];
    for &d in user_dirs {
        for (s, a) in sum.iter_mut().zip(steering_vector(1.0, geom, d)) {
            *s += a;
        }
    }
    let norm = sum.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if norm <= 1e-9 * (geom.n_rx() as f64).sqrt() {
        return Err(Error::DegenerateBeam(
            "steering vectors of the users cancel out".into(),
        ));
    }
    let scale = (geom.n_rx() as f64).sqrt() / norm;
    Ok(BeamWeights::Flat(sum.into_iter().map(|x| x * scale).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beamformer::{peak_direction, UvGrid};
    use crate::channel::weighted_response;

    fn setup() -> (FrequencyPlan, ArrayGeometry) {
        (
            FrequencyPlan::from_bandwidth(14e9, 1.4e9, 64).unwrap(),
            ArrayGeometry::new(8, 8).unwrap(),
        )
    }

    fn gain(w: &BeamWeights, plan: &FrequencyPlan, geom: &ArrayGeometry, m: usize, d: UvDirection) -> f64 {
        weighted_response(w.get(m), plan.ratio(m).unwrap(), geom, d).norm_sqr()
    }

    #[test]
    fn no_squint_is_full_gain_everywhere() {
        let (plan, geom) = setup();
        let t = UvDirection::new(0.5, -0.3).unwrap();
        let w = bh_beamformer(t, &plan, &geom, false);
        for m in 0..plan.subcarriers {
            assert!((gain(&w, &plan, &geom, m, t) - 4096.0).abs() < 1e-7);
        }
    }

    #[test]
    fn squint_loses_gain_at_band_edge() {
        // Center subcarrier of an odd plan sits exactly at f_c.
        let plan = FrequencyPlan::from_bandwidth(14e9, 1.4e9, 65).unwrap();
        let geom = ArrayGeometry::new(8, 8).unwrap();
        let t = UvDirection::new(0.6, 0.0).unwrap();
        let w = bh_beamformer(t, &plan, &geom, true);
        assert!((gain(&w, &plan, &geom, 32, t) - 4096.0).abs() < 1e-7);
        let edge = gain(&w, &plan, &geom, 64, t);
        // Oracle: separable closed form |Σ_n exp(jπ(r−1)·n·0.6)|²·N_y² at r = f_64/f_c.
        let r = plan.ratio(64).unwrap();
        let x: Complex = (0..8)
            .map(|n| Complex::from_polar(1.0, std::f64::consts::PI * (r - 1.0) * n as f64 * 0.6))
            .sum();
        assert!((edge - x.norm_sqr() * 64.0).abs() < 1e-7);
        assert!(edge < 4096.0);
        // The beam at the upper band edge points to u·f_c/f_m < 0.6.
        let (d, _) = peak_direction(w.get(64), r, &geom, UvGrid::default());
        assert!(d.u < 0.6 && (d.u - 0.6 / r).abs() < 2.0 / 512.0);
    }

    #[test]
    fn sharing_single_user_is_steering() {
        let (plan, geom) = setup();
        let d = UvDirection::new(0.1, 0.2).unwrap();
        let w = beam_sharing_beamformer(&[d], &geom).unwrap();
        let norm: f64 = w.get(0).iter().map(|x| x.norm_sqr()).sum();
        assert!((norm - 64.0).abs() < 1e-9);
        let p = FrequencyPlan::new(14e9, 1, 1e6).unwrap();
        assert!((gain(&w, &p, &geom, 0, d) - 4096.0).abs() < 1e-7);
        assert!(w.is_frequency_flat() && plan.subcarriers == 64);
    }

    #[test]
    fn sharing_two_symmetric_users() {
        let geom = ArrayGeometry::new(8, 8).unwrap();
        let p = FrequencyPlan::new(14e9, 1, 1e6).unwrap();
        let (a, b) = (UvDirection::new(0.5, 0.0).unwrap(), UvDirection::new(-0.5, 0.0).unwrap());
        let w = beam_sharing_beamformer(&[a, b], &geom).unwrap();
        // Oracle: the two steering vectors are orthogonal here (Σ_n e^{jπn} over
        // 8 elements vanishes), so each user keeps half the power: N²/2.
        for d in [a, b] {
            assert!((gain(&w, &p, &geom, 0, d) - 2048.0).abs() < 1e-7);
        }
    }

    #[test]
    fn sharing_rejects_empty() {
        let geom = ArrayGeometry::new(2, 2).unwrap();
        assert_eq!(beam_sharing_beamformer(&[], &geom).unwrap_err().code(), "E_INPUT");
    }
}
