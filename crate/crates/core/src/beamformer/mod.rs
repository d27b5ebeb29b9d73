//! Rainbow beamformer built from true-time-delay lines and phase shifters.
//!
//! Element `n` of the receive array applies a delay `τ_n` and a phase `φ_n`,
//! so its weight on subcarrier `m` is `exp(j(φ_n − 2π f_m τ_n))`. Because the
//! delay term grows with frequency, each subcarrier sees a different beam.

mod mapping;
mod optimizer;
mod witness;

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

pub use mapping::{
    mapping_lines, mapping_lines_with, mapping_spiral, spiral_turns_for, DirectionMapping,
    LineSweep,
};
pub use optimizer::{
    line_search_ttd, objective_f, optimal_alpha, optimal_phase_shifts, optimize_rainbow,
    residual, AlphaInit, OptimizationResult, OptimizerSettings,
};
pub use witness::{epsilon_in_consistency_set, infeasibility_witness, WitnessConfig, WitnessReport};

use crate::channel::{weighted_response, ArrayGeometry, BeamWeights, FrequencyPlan};
use crate::geometry::UvDirection;
use crate::{Complex, Error, Result};

/// Delays, phases and per-subcarrier alignment phases of one rainbow beam.
///
/// `delays` and `phases` are row-major over `(nx, ny)`. The unit-modulus
/// alignment vector α is kept as its phases so that a JSON round trip is
/// lossless.
#[derive(Debug, Clone, PartialEq)]
pub struct JptaBeamformer {
    pub geometry: ArrayGeometry,
    pub delays: Vec<f64>,
    pub phases: Vec<f64>,
    pub alpha_phases: Vec<f64>,
}

impl JptaBeamformer {
    pub fn new(
        geometry: ArrayGeometry,
        delays: Vec<f64>,
        phases: Vec<f64>,
        alpha_phases: Vec<f64>,
    ) -> Result<Self> {
        let n = geometry.n_rx();
        if delays.len() != n || phases.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} delays and {} phases for {n} elements",
                delays.len(),
                phases.len()
            )));
        }
        if let Some(t) = delays.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(Error::Domain(format!("delay {t} must be finite and non-negative")));
        }
        if let Some(p) = phases.iter().chain(&alpha_phases).find(|p| !p.is_finite()) {
            return Err(Error::Domain(format!("phase {p} is not finite")));
        }
        Ok(JptaBeamformer {
            geometry,
            delays,
            phases,
            alpha_phases,
        })
    }

    /// All-zero delays and phases: a broadside beam on every subcarrier.
    pub fn broadside(geometry: ArrayGeometry, subcarriers: usize) -> Self {
        let n = geometry.n_rx();
        JptaBeamformer {
            geometry,
            delays: vec![0.0; n],
            phases: vec![0.0; n],
            alpha_phases: vec![0.0; subcarriers],
        }
    }

    pub fn alpha(&self) -> Vec<Complex> {
        self.alpha_phases.iter().map(|&p| Complex::from_polar(1.0, p)).collect()
    }

    /// Weight vector on subcarrier `m`.
    pub fn weights(&self, plan: &FrequencyPlan, m: usize) -> Result<Vec<Complex>> {
        let f = plan.frequency(m)?;
        Ok(jpta_weights(&self.delays, &self.phases, f))
    }

    /// Weights for every subcarrier of `plan`.
    pub fn all_weights(&self, plan: &FrequencyPlan) -> BeamWeights {
        let n = self.geometry.n_rx();
        let mut data = Vec::with_capacity(n * plan.subcarriers);
        for f in plan.frequencies() {
            data.extend(jpta_weights(&self.delays, &self.phases, f));
        }
        BeamWeights::PerSubcarrier { n_rx: n, data }
    }

    pub fn to_json(&self, plan: &FrequencyPlan) -> Result<String> {
        let doc = BeamformerDocument {
            n_x: self.geometry.n_x,
            n_y: self.geometry.n_y,
            tau_seconds: self.delays.clone(),
            phi_radians: self.phases.clone(),
            alpha_phases_radians: self.alpha_phases.clone(),
            plan: PlanDocument {
                f_c_hz: plan.center,
                m: plan.subcarriers,
                delta_f_hz: plan.spacing,
            },
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    /// Parses a document written by [`JptaBeamformer::to_json`].
    pub fn from_json(text: &str) -> Result<(Self, FrequencyPlan)> {
        let doc: BeamformerDocument = serde_json::from_str(text)?;
        let plan = FrequencyPlan::new(doc.plan.f_c_hz, doc.plan.m, doc.plan.delta_f_hz)?;
        let geometry = ArrayGeometry::new(doc.n_x, doc.n_y)?;
        if doc.alpha_phases_radians.len() != plan.subcarriers {
            return Err(Error::DimensionMismatch(format!(
                "{} alpha phases for {} subcarriers",
                doc.alpha_phases_radians.len(),
                plan.subcarriers
            )));
        }
        let bf = JptaBeamformer::new(
            geometry,
            doc.tau_seconds,
            doc.phi_radians,
            doc.alpha_phases_radians,
        )?;
        Ok((bf, plan))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BeamformerDocument {
    n_x: usize,
    n_y: usize,
    tau_seconds: Vec<f64>,
    phi_radians: Vec<f64>,
    alpha_phases_radians: Vec<f64>,
    plan: PlanDocument,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanDocument {
    f_c_hz: f64,
    m: usize,
    delta_f_hz: f64,
}

/// `w_n = exp(j(φ_n − 2π f τ_n))`.
pub fn jpta_weights(delays: &[f64], phases: &[f64], frequency: f64) -> Vec<Complex> {
    delays
        .iter()
        .zip(phases)
        .map(|(&t, &p)| Complex::from_polar(1.0, p - wrapped_delay_phase(frequency, t)))
        .collect()
}

/// `2π f τ` reduced modulo `2π` before scaling, which keeps full precision
/// for delays of many carrier periods.
pub(crate) fn wrapped_delay_phase(frequency: f64, delay: f64) -> f64 {
    TAU * (frequency * delay).rem_euclid(1.0)
}

/// Beam gain `|w^(m)H a^(m)(dir)|²`.
pub fn beam_gain(
    bf: &JptaBeamformer,
    plan: &FrequencyPlan,
    m: usize,
    dir: UvDirection,
) -> Result<f64> {
    let w = bf.weights(plan, m)?;
    Ok(weighted_response(&w, plan.ratio(m)?, &bf.geometry, dir).norm_sqr())
}

/// Uniform search grid over the unit disk with `resolution + 1` points per
/// axis, `−1 + 2i/resolution`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UvGrid {
    pub resolution: usize,
}

impl Default for UvGrid {
    fn default() -> Self {
        UvGrid { resolution: 512 }
    }
}

impl UvGrid {
    pub fn axis(&self) -> Vec<f64> {
        let r = self.resolution.max(1);
        (0..=r).map(|i| -1.0 + 2.0 * i as f64 / r as f64).collect()
    }
}

/// Per-axis phasor tables `exp(−jπ·ratio·n·x)` for every grid coordinate.
fn axis_table(axis: &[f64], count: usize, ratio: f64) -> Vec<Complex> {
    let mut out = Vec::with_capacity(axis.len() * count);
    for &x in axis {
        for n in 0..count {
            out.push(Complex::from_polar(1.0, -PI * ratio * n as f64 * x));
        }
    }
    out
}

/// Gain `|w^H a(u, v)|²` over every grid point inside the unit disk, visited
/// in ascending `u` then `v`. The callback receives `(u, v, gain)`.
pub fn scan_gain(
    weights: &[Complex],
    ratio: f64,
    geom: &ArrayGeometry,
    grid: UvGrid,
    mut visit: impl FnMut(f64, f64, f64),
) {
    let axis = grid.axis();
    let tx = axis_table(&axis, geom.n_x, ratio);
    let ty = axis_table(&axis, geom.n_y, ratio);
    let mut partial = vec![Complex::new(0.0, 0.0); geom.n_y];
    for (i, &u) in axis.iter().enumerate() {
        let ex = &tx[i * geom.n_x..(i + 1) * geom.n_x];
        for (ny, p) in partial.iter_mut().enumerate() {
            *p = (0..geom.n_x)
                .map(|nx| weights[nx * geom.n_y + ny].conj() * ex[nx])
                .sum();
        }
        for (j, &v) in axis.iter().enumerate() {
            if u * u + v * v > 1.0 + 1e-12 {
                continue;
            }
            let ey = &ty[j * geom.n_y..(j + 1) * geom.n_y];
            let z: Complex = partial.iter().zip(ey).map(|(p, e)| p * e).sum();
            visit(u, v, z.norm_sqr());
        }
    }
}

/// Grid direction of maximum gain. Near-ties (relative 1e−12) keep the point
/// with the smaller `u`, then the smaller `v`.
pub fn peak_direction(
    weights: &[Complex],
    ratio: f64,
    geom: &ArrayGeometry,
    grid: UvGrid,
) -> (UvDirection, f64) {
    let mut best: Option<(UvDirection, f64)> = None;
    scan_gain(weights, ratio, geom, grid, |u, v, g| {
        if best.is_none_or(|(_, b)| g > b + 1e-12 * b) {
            best = Some((UvDirection { u, v }, g));
        }
    });
    best.expect("the grid contains the origin")
}

/// Measured beam direction of subcarrier `m`.
pub fn measured_beam_direction(
    bf: &JptaBeamformer,
    plan: &FrequencyPlan,
    m: usize,
    grid: UvGrid,
) -> Result<UvDirection> {
    let w = bf.weights(plan, m)?;
    Ok(peak_direction(&w, plan.ratio(m)?, &bf.geometry, grid).0)
}

/// Euclidean distance between two UV points.
pub fn matching_error(a: UvDirection, b: UvDirection) -> f64 {
    (a.u - b.u).hypot(a.v - b.v)
}
