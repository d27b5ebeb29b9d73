//! Multi-user uplink simulation: schemes, time slots and metrics.
//!
//! A scenario drops `K` users uniformly over the coverage disk, builds each
//! scheme's receive beam, turns beam gains into average SNRs, allocates
//! subcarriers and power, and scores the allocation against Rician channel
//! draws. Beam hopping serves one target user per slot with `L = K` slots;
//! rainbow and beam-sharing beams are static, so their allocation is computed
//! once and only the channel draw changes between slots.

mod baselines;
mod footprint;
mod sweeps;

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

pub use baselines::{beam_sharing_beamformer, bh_beamformer};
pub use footprint::{footprint_3db, footprint_coverage};
pub use sweeps::{
    allocation_comparison, allocation_instances, beam_metrics, loglog_slope, runtime_benchmark,
    sweep_bandwidth, sweep_users, AllocationInstance, AllocationRow, BeamMetricRow, RuntimeRow,
    SweepRow, ALLOCATION_LABELS,
};

use crate::allocation::{
    active_user_ratio, equal_power, jspa_greedy, maxch_allocate, throughput, Allocation,
};
use crate::beamformer::{
    mapping_lines_with, mapping_spiral, optimize_rainbow, spiral_turns_for, DirectionMapping,
    LineSweep, OptimizationResult, OptimizerSettings,
};
use crate::channel::{
    draw_fading, gain_matrix, noise_power, snr_matrix, ArrayGeometry, BeamWeights,
    FrequencyPlan, LinkBudget, UserChannelModel,
};
use crate::geometry::{sample_users, user_geometry, SatelliteGeometry, UvDirection};
use crate::rng::{tag, SeedTree};
use crate::{Complex, Error, Result};

/// Receive beam strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BeamScheme {
    Rainbow,
    BhSquint,
    BhNoSquint,
    BeamSharing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Allocator {
    Jspa,
    Maxch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PowerRule {
    Waterfill,
    Equal,
}

/// A beam strategy with its allocator, written `beam:allocator:power`,
/// for example `rainbow:jspa:waterfill`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Scheme {
    pub beam: BeamScheme,
    pub allocator: Allocator,
    pub power: PowerRule,
}

impl Scheme {
    pub const fn new(beam: BeamScheme, allocator: Allocator, power: PowerRule) -> Self {
        Scheme {
            beam,
            allocator,
            power,
        }
    }

    /// The four beam strategies, each with greedy allocation and
    /// water-filling.
    pub fn standard() -> Vec<Scheme> {
        [
            BeamScheme::Rainbow,
            BeamScheme::BhSquint,
            BeamScheme::BhNoSquint,
            BeamScheme::BeamSharing,
        ]
        .into_iter()
        .map(|b| Scheme::new(b, Allocator::Jspa, PowerRule::Waterfill))
        .collect()
    }

    pub fn is_beam_hopping(&self) -> bool {
        matches!(self.beam, BeamScheme::BhSquint | BeamScheme::BhNoSquint)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let beam = match self.beam {
            BeamScheme::Rainbow => "rainbow",
            BeamScheme::BhSquint => "bh_squint",
            BeamScheme::BhNoSquint => "bh_no_squint",
            BeamScheme::BeamSharing => "beam_sharing",
        };
        let alloc = match self.allocator {
            Allocator::Jspa => "jspa",
            Allocator::Maxch => "maxch",
        };
        let power = match self.power {
            PowerRule::Waterfill => "waterfill",
            PowerRule::Equal => "equal",
        };
        write!(f, "{beam}:{alloc}:{power}")
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::field("evaluation.schemes", format!("unknown scheme {s:?}"));
        let parts: Vec<&str> = s.split(':').collect();
        let (beam, alloc, power) = match parts.as_slice() {
            [b] => (*b, "jspa", "waterfill"),
            [b, a] => (*b, *a, "waterfill"),
            [b, a, p] => (*b, *a, *p),
            _ => return Err(bad()),
        };
        let beam = match beam {
            "rainbow" => BeamScheme::Rainbow,
            "bh_squint" => BeamScheme::BhSquint,
            "bh_no_squint" => BeamScheme::BhNoSquint,
            "beam_sharing" => BeamScheme::BeamSharing,
            _ => return Err(bad()),
        };
        let allocator = match alloc {
            "jspa" => Allocator::Jspa,
            "maxch" => Allocator::Maxch,
            _ => return Err(bad()),
        };
        let power = match power {
            "waterfill" => PowerRule::Waterfill,
            "equal" => PowerRule::Equal,
            _ => return Err(bad()),
        };
        Ok(Scheme::new(beam, allocator, power))
    }
}

impl TryFrom<String> for Scheme {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Scheme> for String {
    fn from(s: Scheme) -> String {
        s.to_string()
    }
}

/// Which fixed frequency-direction mapping the rainbow beam is fitted to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MappingKind {
    Spiral,
    Lines,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MappingSpec {
    pub kind: MappingKind,
    /// Spiral turns; derived from the array size when unset.
    pub spiral_turns: Option<f64>,
    /// Line count; twice the derived spiral turn count when unset, which
    /// gives both mappings the same track spacing.
    pub n_lines: Option<usize>,
    pub sweep: LineSweep,
}

impl Default for MappingSpec {
    fn default() -> Self {
        MappingSpec {
            kind: MappingKind::Lines,
            spiral_turns: None,
            n_lines: None,
            sweep: LineSweep::Raster,
        }
    }
}

impl MappingSpec {
    pub fn spiral() -> Self {
        MappingSpec {
            kind: MappingKind::Spiral,
            ..Default::default()
        }
    }

    pub fn lines() -> Self {
        MappingSpec::default()
    }

    pub fn build(&self, subcarriers: usize, u_max: f64, geom: &ArrayGeometry) -> Result<DirectionMapping> {
        let turns = self.spiral_turns.unwrap_or_else(|| spiral_turns_for(u_max, geom.n_x));
        match self.kind {
            MappingKind::Spiral => mapping_spiral(subcarriers, u_max, turns),
            MappingKind::Lines => {
                let lines = self
                    .n_lines
                    .unwrap_or(2 * spiral_turns_for(u_max, geom.n_x) as usize);
                mapping_lines_with(subcarriers, u_max, lines, self.sweep)
            }
        }
    }
}

/// Whether the Rician draw is renewed every slot or held for all slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FadingMode {
    PerSlot,
    Static,
}

/// A fully specified simulation setup in linear units.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub plan: FrequencyPlan,
    pub geometry: ArrayGeometry,
    pub link: LinkBudget,
    pub satellite: SatelliteGeometry,
    /// Coverage disk radius as a great-circle distance, meters.
    pub coverage_radius: f64,
    pub users: usize,
    pub rician_kappa: f64,
    /// Per-user transmit power budget, watts.
    pub power_budget: f64,
    pub optimizer: OptimizerSettings,
    pub mapping: MappingSpec,
    pub schemes: Vec<Scheme>,
    pub fading: FadingMode,
}

impl Scenario {
    /// Table I of the reference setup: 14 GHz carrier, 1.4 GHz over 1024
    /// subcarriers, 8×8 array, 43.2 dBi terminals at 23 dBm, κ = 10 dB,
    /// 290 K, 500 km altitude and coverage radius.
    pub fn reference() -> Self {
        Scenario {
            plan: FrequencyPlan::from_bandwidth(14e9, 1.4e9, 1024).expect("valid plan"),
            geometry: ArrayGeometry { n_x: 8, n_y: 8 },
            link: LinkBudget {
                g_sat: 1.0,
                g_ut: crate::db_to_linear(43.2),
                noise_temperature: 290.0,
            },
            satellite: SatelliteGeometry::with_altitude(500e3).expect("valid altitude"),
            coverage_radius: 500e3,
            users: 64,
            rician_kappa: 10.0,
            power_budget: crate::dbm_to_watts(23.0),
            optimizer: OptimizerSettings::default(),
            mapping: MappingSpec::default(),
            schemes: Scheme::standard(),
            fading: FadingMode::PerSlot,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.users == 0 {
            return Err(Error::field("users.count", "must be at least 1"));
        }
        if self.schemes.is_empty() {
            return Err(Error::field("evaluation.schemes", "at least one scheme is required"));
        }
        if !(self.rician_kappa >= 0.0 && self.rician_kappa.is_finite()) {
            return Err(Error::field("users.rician_k_db", "must be finite"));
        }
        if !(self.power_budget > 0.0 && self.power_budget.is_finite()) {
            return Err(Error::field("users.power_dbm", "must be finite"));
        }
        if !(self.coverage_radius > 0.0) {
            return Err(Error::field("geometry.coverage_radius_m", "must be positive"));
        }
        self.optimizer.validate()?;
        self.u_max().map(|_| ())
    }

    /// UV radius of the coverage edge.
    pub fn u_max(&self) -> Result<f64> {
        self.satellite
            .uv_radius_at(self.coverage_radius)
            .map_err(|e| Error::field("geometry.coverage_radius_m", e.to_string()))
    }

    pub fn mapping(&self) -> Result<DirectionMapping> {
        self.mapping.build(self.plan.subcarriers, self.u_max()?, &self.geometry)
    }

    /// Fits the rainbow beam to the configured mapping.
    pub fn design_rainbow(&self) -> Result<OptimizationResult> {
        optimize_rainbow(&self.mapping()?, &self.plan, &self.geometry, &self.optimizer)
    }

    pub fn with_users(&self, users: usize) -> Self {
        Scenario {
            users,
            ..self.clone()
        }
    }

    /// Same subcarrier count spread over a different bandwidth.
    pub fn with_bandwidth(&self, bandwidth: f64) -> Result<Self> {
        Ok(Scenario {
            plan: FrequencyPlan::from_bandwidth(self.plan.center, bandwidth, self.plan.subcarriers)?,
            ..self.clone()
        })
    }

    /// Drops the users and computes their large-scale channels.
    pub fn draw_users(&self, seeds: &SeedTree) -> Result<Vec<UserChannelModel>> {
        let mut rng = seeds.stream(&[tag::USERS]);
        let positions = sample_users(
            self.users,
            self.coverage_radius,
            self.satellite.earth_radius,
            &mut rng,
        )?;
        positions
            .iter()
            .map(|p| {
                let (dir, d) = user_geometry(&self.satellite, p)?;
                UserChannelModel::new(dir, d, self.rician_kappa, self.power_budget, &self.plan, &self.link)
            })
            .collect()
    }
}

/// Per-scheme results of one scenario run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeMetrics {
    pub scheme: Scheme,
    /// Time-averaged sum throughput over the Rician draws, bit/s.
    pub throughput_bps: f64,
    /// Time-averaged sum throughput with `|g|²` replaced by its mean, bit/s.
    pub approx_throughput_bps: f64,
    pub active_ratio_per_slot: Vec<f64>,
    pub active_ratio: f64,
    /// Mean over slots of the fraction of users inside a 3 dB footprint.
    pub footprint_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub users: usize,
    pub subcarriers: usize,
    pub bandwidth_hz: f64,
    pub slots: usize,
    pub schemes: Vec<SchemeMetrics>,
    /// Objective after every optimizer iteration of the rainbow beam.
    pub f_trace: Vec<f64>,
    /// Optimizer wall-clock; excluded from the serialized report so that
    /// reports are reproducible byte for byte.
    #[serde(skip)]
    pub optimizer_seconds: f64,
}

impl MetricsReport {
    pub fn scheme(&self, s: Scheme) -> Option<&SchemeMetrics> {
        self.schemes.iter().find(|m| m.scheme == s)
    }
}

fn allocate(
    scheme: Scheme,
    avg_snr: &Array2<f64>,
    budgets: &[f64],
    seeds: &SeedTree,
) -> Result<Allocation> {
    let mut alloc = match scheme.allocator {
        Allocator::Jspa => jspa_greedy(avg_snr, budgets, &mut seeds.rng())?,
        Allocator::Maxch => maxch_allocate(avg_snr, budgets)?,
    };
    if scheme.power == PowerRule::Equal {
        alloc.power = equal_power(&alloc.assignment(), budgets)?;
    }
    Ok(alloc)
}

/// Throughput when the Rician draw `gains` is applied to the allocation.
fn realized_throughput(
    alloc: &Allocation,
    avg_snr: &Array2<f64>,
    gains: &Array2<Complex>,
    users: &[UserChannelModel],
    delta_f: f64,
) -> f64 {
    alloc
        .owner
        .iter()
        .enumerate()
        .filter_map(|(m, o)| {
            o.map(|k| {
                let fade = gains[[k, m]].norm_sqr() / users[k].eta[m];
                (1.0 + alloc.power[[k, m]] * avg_snr[[k, m]] * fade).log2()
            })
        })
        .sum::<f64>()
        * delta_f
}

/// Runs every configured scheme on one user drop.
///
/// `rainbow` supplies an already fitted rainbow beam for the scenario's
/// plan; without it the beam is fitted here. The result depends only on the
/// scenario and `seeds`.
pub fn run_scenario(
    scenario: &Scenario,
    seeds: &SeedTree,
    rainbow: Option<&OptimizationResult>,
) -> Result<MetricsReport> {
    scenario.validate()?;
    let needs_rainbow = scenario.schemes.iter().any(|s| s.beam == BeamScheme::Rainbow);
    let designed;
    let rainbow = match rainbow {
        Some(r) => Some(r),
        None if needs_rainbow => {
            designed = scenario.design_rainbow()?;
            Some(&designed)
        }
        None => None,
    };
    let plan = &scenario.plan;
    let geom = &scenario.geometry;
    let users = scenario.draw_users(seeds)?;
    let dirs: Vec<UvDirection> = users.iter().map(|u| u.direction).collect();
    let budgets: Vec<f64> = users.iter().map(|u| u.power_budget).collect();
    let sigma2 = noise_power(plan, &scenario.link);
    let slots = scenario.users;
    let fading_seeds = |slot: usize| {
        let slot = match scenario.fading {
            FadingMode::PerSlot => slot as u64,
            FadingMode::Static => 0,
        };
        seeds.path(&[tag::FADING, slot])
    };

    let rainbow_weights = rainbow.map(|r| r.beamformer.all_weights(plan));
    let mut out = Vec::with_capacity(scenario.schemes.len());
    for (i, &scheme) in scenario.schemes.iter().enumerate() {
        let order_seeds = seeds.path(&[tag::SUBCARRIER_ORDER, i as u64]);
        let static_weights = match scheme.beam {
            BeamScheme::Rainbow => rainbow_weights.clone(),
            BeamScheme::BeamSharing => Some(beam_sharing_beamformer(&dirs, geom)?),
            _ => None,
        };
        let evaluate = |w: &BeamWeights, order: &SeedTree| -> Result<(Array2<f64>, Allocation, f64)> {
            let beam = gain_matrix(w, plan, geom, &dirs)?;
            let gamma = snr_matrix(&users, &beam, geom.n_rx(), sigma2);
            let alloc = allocate(scheme, &gamma, &budgets, order)?;
            Ok((gamma, alloc, footprint_coverage(&beam, geom.n_rx())))
        };
        let fixed = match &static_weights {
            Some(w) => Some(evaluate(w, &order_seeds)?),
            None => None,
        };

        let (mut thr, mut approx, mut bound) = (0.0, 0.0, 0.0);
        let mut ratios = Vec::with_capacity(slots);
        for slot in 0..slots {
            let per_slot;
            let (gamma, alloc, cover) = match &fixed {
                Some(f) => f,
                None => {
                    let w = bh_beamformer(dirs[slot], plan, geom, scheme.beam == BeamScheme::BhSquint);
                    per_slot = evaluate(&w, &order_seeds.child(slot as u64))?;
                    &per_slot
                }
            };
            let gains = draw_fading(&users, &fading_seeds(slot));
            thr += realized_throughput(alloc, gamma, &gains, &users, plan.spacing);
            approx += throughput(alloc, gamma, plan.spacing);
            bound += cover;
            ratios.push(active_user_ratio(alloc, scenario.users));
        }
        let l = slots as f64;
        out.push(SchemeMetrics {
            scheme,
            throughput_bps: thr / l,
            approx_throughput_bps: approx / l,
            active_ratio: ratios.iter().sum::<f64>() / l,
            active_ratio_per_slot: ratios,
            footprint_bound: bound / l,
        });
    }
    Ok(MetricsReport {
        users: scenario.users,
        subcarriers: plan.subcarriers,
        bandwidth_hz: plan.bandwidth(),
        slots,
        schemes: out,
        f_trace: rainbow.map(|r| r.trace.clone()).unwrap_or_default(),
        optimizer_seconds: rainbow.map_or(0.0, |r| r.elapsed.as_secs_f64()),
    })
}
