//! Numerical witness that a full-gain rainbow beam does not exist in general
//! once three or more subcarriers carry arbitrary directions.

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{optimize_rainbow, residual, DirectionMapping, OptimizerSettings};
use crate::channel::{ArrayGeometry, FrequencyPlan};
use crate::rng::{tag, SeedTree};
use crate::{Error, Result};

/// Problem sizes and tolerances for [`infeasibility_witness`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessConfig {
    pub subcarriers: usize,
    pub seeds: usize,
    pub center: f64,
    pub bandwidth: f64,
    pub geometry: ArrayGeometry,
    /// Radius of the disk the random directions are drawn from.
    pub u_max: f64,
    /// Residuals above this count as a positive witness.
    pub tolerance: f64,
    pub optimizer: OptimizerSettings,
    /// Delay grid for the two-subcarrier control, fine enough to fit it.
    pub control_optimizer: OptimizerSettings,
}

impl Default for WitnessConfig {
    fn default() -> Self {
        WitnessConfig {
            subcarriers: 3,
            seeds: 100,
            center: 14e9,
            bandwidth: 1.4e9,
            geometry: ArrayGeometry { n_x: 8, n_y: 8 },
            u_max: 0.693,
            tolerance: 1e-3,
            optimizer: OptimizerSettings::default(),
            control_optimizer: OptimizerSettings {
                tau_max: 2e-9,
                grid_step: 0.1e-12,
                ..OptimizerSettings::default()
            },
        }
    }
}

/// Result of the closed-form three-frequency consistency check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyCheck {
    pub f_p: f64,
    pub f_q: f64,
    pub f_s: f64,
    /// Every integer in `[−5, 5]` is reachable.
    pub integers_included: bool,
    /// `ε = 0.5` is not reachable.
    pub half_excluded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub subcarriers: usize,
    pub seeds: usize,
    pub tolerance: f64,
    /// Terminal residual `2·M·N − 2F` per seed.
    pub residuals: Vec<f64>,
    pub min_residual: f64,
    /// Seeds whose residual exceeds `tolerance`.
    pub positive: usize,
    pub converged: usize,
    pub control_single_residual: f64,
    pub control_pair_residual: f64,
    pub consistency: ConsistencyCheck,
}

/// True when `ε = β/(2π(f_p − f_q)) − β'/(2π(f_p − f_s))` for some integers
/// `|β| ≤ max_beta`, `β'`, to within `tol`.
pub fn epsilon_in_consistency_set(
    epsilon: f64,
    f_p: f64,
    f_q: f64,
    f_s: f64,
    max_beta: i64,
    tol: f64,
) -> bool {
    let a = 1.0 / (TAU * (f_p - f_q));
    let b = 1.0 / (TAU * (f_p - f_s));
    (-max_beta..=max_beta).any(|beta| {
        let beta_p = ((beta as f64 * a - epsilon) / b).round();
        (beta as f64 * a - beta_p * b - epsilon).abs() <= tol
    })
}

fn random_mapping(count: usize, u_max: f64, seeds: &SeedTree) -> DirectionMapping {
    let mut rng = seeds.rng();
    let dirs: Vec<_> = (0..count)
        .map(|_| {
            let r = u_max * rng.gen::<f64>().sqrt();
            let w = TAU * rng.gen::<f64>();
            crate::geometry::UvDirection { u: r * w.cos(), v: r * w.sin() }
        })
        .collect();
    DirectionMapping::from_directions(&dirs)
}

fn terminal_residual(
    mapping: &DirectionMapping,
    plan: &FrequencyPlan,
    geom: &ArrayGeometry,
    settings: &OptimizerSettings,
) -> Result<(f64, bool)> {
    let r = optimize_rainbow(mapping, plan, geom, settings)?;
    let res = residual(&r.beamformer, mapping, plan)?;
    Ok((res.max(0.0), r.converged))
}

/// Fits random `M ≥ 3` mappings and reports how far each stays from a perfect
/// fit, next to one- and two-subcarrier controls that can be fitted exactly.
pub fn infeasibility_witness(config: &WitnessConfig, seeds: &SeedTree) -> Result<WitnessReport> {
    if config.subcarriers < 3 {
        return Err(Error::InvalidInput(format!(
            "the witness needs at least 3 subcarriers, got {}",
            config.subcarriers
        )));
    }
    let geom = config.geometry;
    let plan = FrequencyPlan::from_bandwidth(config.center, config.bandwidth, config.subcarriers)?;
    let mut residuals = Vec::with_capacity(config.seeds);
    let mut converged = 0;
    for s in 0..config.seeds {
        let mapping = random_mapping(
            config.subcarriers,
            config.u_max,
            &seeds.path(&[tag::MAPPING, s as u64]),
        );
        let (res, ok) = terminal_residual(&mapping, &plan, &geom, &config.optimizer)?;
        residuals.push(res);
        converged += usize::from(ok);
    }

    let control = seeds.path(&[tag::MAPPING, u64::MAX]);
    let single = FrequencyPlan::new(config.center, 1, config.bandwidth)?;
    let (control_single_residual, _) = terminal_residual(
        &random_mapping(1, config.u_max, &control.child(1)),
        &single,
        &geom,
        &config.optimizer,
    )?;
    let pair = FrequencyPlan::from_bandwidth(config.center, config.bandwidth, 2)?;
    let (control_pair_residual, _) = terminal_residual(
        &random_mapping(2, config.u_max, &control.child(2)),
        &pair,
        &geom,
        &config.control_optimizer,
    )?;

    let (f_p, f_q, f_s) = (1.5 / TAU, 1.0 / TAU, 0.5 / TAU);
    let consistency = ConsistencyCheck {
        f_p,
        f_q,
        f_s,
        integers_included: (-5..=5)
            .all(|k| epsilon_in_consistency_set(k as f64, f_p, f_q, f_s, 50, 1e-9)),
        half_excluded: !epsilon_in_consistency_set(0.5, f_p, f_q, f_s, 50, 1e-9),
    };

    Ok(WitnessReport {
        subcarriers: config.subcarriers,
        seeds: config.seeds,
        tolerance: config.tolerance,
        min_residual: residuals.iter().copied().fold(f64::INFINITY, f64::min),
        positive: residuals.iter().filter(|&&r| r > config.tolerance).count(),
        residuals,
        converged,
        control_single_residual,
        control_pair_residual,
        consistency,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn appendix_frequencies_give_integers() {
        let (p, q, s) = (1.5 / TAU, 1.0 / TAU, 0.5 / TAU);
        for k in -3..=3 {
            assert!(epsilon_in_consistency_set(k as f64, p, q, s, 10, 1e-9));
        }
        assert!(!epsilon_in_consistency_set(0.5, p, q, s, 10, 1e-9));
        assert!(!epsilon_in_consistency_set(-2.25, p, q, s, 10, 1e-9));
    }

    #[test]
    fn needs_three_subcarriers() {
        let cfg = WitnessConfig { subcarriers: 2, ..Default::default() };
        let e = infeasibility_witness(&cfg, &SeedTree::new(1)).unwrap_err();
        assert_eq!(e.code(), "E_INPUT");
    }

    #[test]
    fn small_witness_is_positive() {
        let cfg = WitnessConfig {
            seeds: 3,
            geometry: ArrayGeometry { n_x: 4, n_y: 4 },
            ..Default::default()
        };
        let r = infeasibility_witness(&cfg, &SeedTree::new(7)).unwrap();
        assert_eq!(r.positive, 3);
        assert!(r.control_single_residual < 1e-9);
        assert!(r.control_pair_residual < 1e-4);
        assert!(r.consistency.integers_included && r.consistency.half_excluded);
    }
}
