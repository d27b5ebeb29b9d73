//! Monte-Carlo sweeps and the per-subcarrier beam and runtime measurements.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_scenario, MetricsReport, Scenario, Scheme};
use crate::allocation::{
    exhaustive_search, jspa_greedy, maxch_allocate, throughput, DEFAULT_SEARCH_CAP,
};
use crate::beamformer::{
    beam_gain, matching_error, measured_beam_direction, optimize_rainbow, DirectionMapping,
    JptaBeamformer, OptimizerSettings, UvGrid,
};
use crate::channel::{
    draw_fading, gain_matrix, noise_power, snr_matrix, ArrayGeometry, FrequencyPlan,
};
use crate::geometry::UvDirection;
use crate::rng::{tag, SeedTree};
use crate::{Error, Result};

/// Seed-averaged metrics of one scheme at one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub users: usize,
    pub bandwidth_hz: f64,
    pub scheme: Scheme,
    pub seeds: usize,
    pub throughput_bps: f64,
    pub throughput_std_bps: f64,
    pub approx_throughput_bps: f64,
    pub active_ratio: f64,
    pub footprint_bound: f64,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var.sqrt())
}

fn summarize(reports: &[MetricsReport]) -> Vec<SweepRow> {
    let first = &reports[0];
    first
        .schemes
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let col = |f: fn(&super::SchemeMetrics) -> f64| -> Vec<f64> {
                reports.iter().map(|r| f(&r.schemes[i])).collect()
            };
            let (thr, std) = mean_std(&col(|m| m.throughput_bps));
            SweepRow {
                users: first.users,
                bandwidth_hz: first.bandwidth_hz,
                scheme: s.scheme,
                seeds: reports.len(),
                throughput_bps: thr,
                throughput_std_bps: std,
                approx_throughput_bps: mean_std(&col(|m| m.approx_throughput_bps)).0,
                active_ratio: mean_std(&col(|m| m.active_ratio)).0,
                footprint_bound: mean_std(&col(|m| m.footprint_bound)).0,
            }
        })
        .collect()
}

fn run_seeds(
    scenario: &Scenario,
    seeds: usize,
    master: &SeedTree,
    point: u64,
    rainbow: Option<&crate::beamformer::OptimizationResult>,
) -> Result<Vec<SweepRow>> {
    if seeds == 0 {
        return Err(Error::field("evaluation.seeds", "must be at least 1"));
    }
    let reports: Vec<MetricsReport> = (0..seeds as u64)
        .into_par_iter()
        .map(|s| run_scenario(scenario, &master.path(&[tag::INSTANCE, point, s]), rainbow))
        .collect::<Result<_>>()?;
    Ok(summarize(&reports))
}

fn needs_rainbow(scenario: &Scenario) -> bool {
    scenario.schemes.iter().any(|s| s.beam == super::BeamScheme::Rainbow)
}

/// Throughput and active-user ratio for every user count in `k_values`.
/// The rainbow beam is fitted once and shared by all points.
pub fn sweep_users(
    base: &Scenario,
    k_values: &[usize],
    seeds: usize,
    master: &SeedTree,
) -> Result<Vec<SweepRow>> {
    let design = if needs_rainbow(base) {
        Some(base.design_rainbow()?)
    } else {
        None
    };
    let mut rows = Vec::new();
    for &k in k_values {
        rows.extend(run_seeds(&base.with_users(k), seeds, master, k as u64, design.as_ref())?);
    }
    Ok(rows)
}

/// Throughput for every total bandwidth in `bandwidths`, with the rainbow
/// beam refitted at each point.
pub fn sweep_bandwidth(
    base: &Scenario,
    bandwidths: &[f64],
    seeds: usize,
    master: &SeedTree,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for (i, &bw) in bandwidths.iter().enumerate() {
        let sc = base.with_bandwidth(bw)?;
        let design = if needs_rainbow(&sc) {
            Some(sc.design_rainbow()?)
        } else {
            None
        };
        rows.extend(run_seeds(&sc, seeds, master, 1_000 + i as u64, design.as_ref())?);
    }
    Ok(rows)
}

/// Desired versus measured beam direction of one subcarrier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamMetricRow {
    pub mapping: String,
    pub array: String,
    pub m: usize,
    pub frequency_hz: f64,
    pub desired: UvDirection,
    pub measured: UvDirection,
    pub matching_error: f64,
    /// Gain `|w^H a|²` toward the desired direction.
    pub gain: f64,
}

/// Measured direction, matching error and desired-direction gain for every
/// subcarrier.
pub fn beam_metrics(
    bf: &JptaBeamformer,
    mapping: &DirectionMapping,
    plan: &FrequencyPlan,
    grid: UvGrid,
    mapping_label: &str,
    array_label: &str,
) -> Result<Vec<BeamMetricRow>> {
    (0..plan.subcarriers)
        .into_par_iter()
        .map(|m| {
            let desired = mapping.direction(m);
            let measured = measured_beam_direction(bf, plan, m, grid)?;
            Ok(BeamMetricRow {
                mapping: mapping_label.to_string(),
                array: array_label.to_string(),
                m,
                frequency_hz: plan.frequency(m)?,
                desired,
                measured,
                matching_error: matching_error(measured, desired),
                gain: beam_gain(bf, plan, m, desired)?,
            })
        })
        .collect()
}

/// Allocation strategies compared on small instances, in report order.
pub const ALLOCATION_LABELS: [&str; 6] = [
    "jspa:waterfill",
    "jspa:equal",
    "maxch:waterfill",
    "maxch:equal",
    "exhaustive",
    "upper_bound",
];

/// Throughput of every strategy in [`ALLOCATION_LABELS`] on one instance:
/// `(realized, approximate)` pairs in bit/s.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationInstance {
    pub results: [(f64, f64); 6],
}

/// Seed-averaged throughput of one allocation strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationRow {
    pub kappa_db: f64,
    pub allocator: String,
    pub seeds: usize,
    pub throughput_bps: f64,
    pub approx_throughput_bps: f64,
}

/// Runs every strategy on `seeds` user drops with the rainbow beam of
/// `base`, each with one Rician draw at factor `kappa_db`.
///
/// `exhaustive` is the best assignment for the average SNRs; `upper_bound`
/// is the best assignment when the Rician draw is known in advance.
pub fn allocation_instances(
    base: &Scenario,
    design: &JptaBeamformer,
    kappa_db: f64,
    seeds: usize,
    master: &SeedTree,
) -> Result<Vec<AllocationInstance>> {
    let weights = design.all_weights(&base.plan);
    let sigma2 = noise_power(&base.plan, &base.link);
    let sc = Scenario {
        rician_kappa: crate::db_to_linear(kappa_db),
        ..base.clone()
    };
    let df = sc.plan.spacing;
    (0..seeds as u64)
        .into_par_iter()
        .map(|s| {
            let tree = master.path(&[tag::INSTANCE, s]);
            let users = sc.draw_users(&tree)?;
            let dirs: Vec<UvDirection> = users.iter().map(|u| u.direction).collect();
            let budgets: Vec<f64> = users.iter().map(|u| u.power_budget).collect();
            let beam = gain_matrix(&weights, &sc.plan, &sc.geometry, &dirs)?;
            let gamma = snr_matrix(&users, &beam, sc.geometry.n_rx(), sigma2);
            let gains = draw_fading(&users, &tree.child(tag::FADING));
            let mut instant = gamma.clone();
            for ((k, m), g) in instant.indexed_iter_mut() {
                *g *= gains[[k, m]].norm_sqr() / users[k].eta[m];
            }
            let order = || tree.stream(&[tag::SUBCARRIER_ORDER]);
            let equal = |mut a: crate::allocation::Allocation| -> Result<_> {
                a.power = crate::allocation::equal_power(&a.assignment(), &budgets)?;
                Ok(a)
            };
            let jspa = jspa_greedy(&gamma, &budgets, &mut order())?;
            let maxch = maxch_allocate(&gamma, &budgets)?;
            let allocs = [
                jspa.clone(),
                equal(jspa)?,
                maxch.clone(),
                equal(maxch)?,
                exhaustive_search(&gamma, &budgets, DEFAULT_SEARCH_CAP)?,
            ];
            let mut results = [(0.0, 0.0); 6];
            for (r, a) in results.iter_mut().zip(&allocs) {
                *r = (
                    super::realized_throughput(a, &gamma, &gains, &users, df),
                    throughput(a, &gamma, df),
                );
            }
            let ub = exhaustive_search(&instant, &budgets, DEFAULT_SEARCH_CAP)?;
            let ub_rate = throughput(&ub, &instant, df);
            results[5] = (ub_rate, ub_rate);
            Ok(AllocationInstance { results })
        })
        .collect()
}

/// Seed means of [`allocation_instances`] for every Rician factor, one row
/// per strategy. `base` fixes the plan (keep `K^M` small) and user count.
pub fn allocation_comparison(
    base: &Scenario,
    kappas_db: &[f64],
    seeds: usize,
    master: &SeedTree,
) -> Result<Vec<AllocationRow>> {
    let design = base.design_rainbow()?;
    let mut rows = Vec::new();
    for &kdb in kappas_db {
        let inst = allocation_instances(base, &design.beamformer, kdb, seeds, master)?;
        let n = inst.len() as f64;
        for (i, label) in ALLOCATION_LABELS.iter().enumerate() {
            rows.push(AllocationRow {
                kappa_db: kdb,
                allocator: label.to_string(),
                seeds,
                throughput_bps: inst.iter().map(|r| r.results[i].0).sum::<f64>() / n,
                approx_throughput_bps: inst.iter().map(|r| r.results[i].1).sum::<f64>() / n,
            });
        }
    }
    Ok(rows)
}

/// Mean wall-clock of the optimizer at one problem size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuntimeRow {
    pub m: usize,
    pub n_rx: usize,
    pub runs: usize,
    pub mean_seconds: f64,
    pub mean_iterations: f64,
}

impl RuntimeRow {
    pub fn seconds_per_iteration(&self) -> f64 {
        self.mean_seconds / self.mean_iterations
    }
}

/// Times the optimizer for every pair of subcarrier count and array.
/// `base` supplies the carrier, bandwidth, geometry and mapping.
pub fn runtime_benchmark(
    base: &Scenario,
    subcarriers: &[usize],
    arrays: &[ArrayGeometry],
    runs: usize,
    settings: &OptimizerSettings,
) -> Result<Vec<RuntimeRow>> {
    if runs == 0 {
        return Err(Error::field("runs", "must be at least 1"));
    }
    let u_max = base.u_max()?;
    let mut rows = Vec::new();
    for geom in arrays {
        for &m in subcarriers {
            let plan = FrequencyPlan::from_bandwidth(base.plan.center, base.plan.bandwidth(), m)?;
            let mapping = base.mapping.build(m, u_max, geom)?;
            let (mut secs, mut iters) = (0.0, 0.0);
            for _ in 0..runs {
                let start = Instant::now();
                let r = optimize_rainbow(&mapping, &plan, geom, settings)?;
                secs += start.elapsed().as_secs_f64();
                iters += r.iterations() as f64;
            }
            rows.push(RuntimeRow {
                m,
                n_rx: geom.n_rx(),
                runs,
                mean_seconds: secs / runs as f64,
                mean_iterations: iters / runs as f64,
            });
        }
    }
    Ok(rows)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::{Allocator, PowerRule};

    #[test]
    fn slope_of_power_law() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(1.5)).collect();
        assert!((loglog_slope(&xs, &ys) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn sample_std() {
        let (m, s) = mean_std(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn allocation_rows_respect_oracle() {
        let mut sc = Scenario::reference().with_users(3);
        sc.plan = FrequencyPlan::from_bandwidth(14e9, 1.4e9, 5).unwrap();
        sc.geometry = ArrayGeometry::new(4, 4).unwrap();
        let rows = allocation_comparison(&sc, &[10.0, 30.0], 4, &SeedTree::new(2)).unwrap();
        assert_eq!(rows.len(), 12);
        for block in rows.chunks(6) {
            let best = block[4].approx_throughput_bps * (1.0 + 1e-12);
            assert!(block[..4].iter().all(|r| r.approx_throughput_bps <= best));
            assert!(block[5].throughput_bps >= block[4].throughput_bps * (1.0 - 1e-12));
        }
    }

    #[test]
    fn scheme_order_is_kept() {
        let mut sc = Scenario::reference().with_users(2);
        sc.plan = FrequencyPlan::from_bandwidth(14e9, 1.4e9, 16).unwrap();
        sc.geometry = ArrayGeometry::new(4, 4).unwrap();
        sc.schemes = vec![
            Scheme::new(super::super::BeamScheme::BhSquint, Allocator::Maxch, PowerRule::Equal),
            Scheme::new(super::super::BeamScheme::BeamSharing, Allocator::Jspa, PowerRule::Waterfill),
        ];
        let rows = sweep_users(&sc, &[1, 2], 2, &SeedTree::new(0)).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].scheme, sc.schemes[0]);
        assert_eq!(rows[3].users, 2);
    }
}
