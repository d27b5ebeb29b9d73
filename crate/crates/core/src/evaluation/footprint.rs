//! 3 dB beam footprints on the ground and the coverage they imply.

use ndarray::Array2;

use crate::beamformer::{scan_gain, UvGrid};
use crate::channel::{ArrayGeometry, BeamWeights, FrequencyPlan};
use crate::geometry::{GroundUserPosition, SatelliteGeometry, UvDirection};
use crate::Result;

/// Ground points of the UV grid cells whose gain on subcarrier `m` is within
/// 3 dB of that subcarrier's peak. Cells beyond the horizon are dropped.
pub fn footprint_3db(
    weights: &BeamWeights,
    plan: &FrequencyPlan,
    m: usize,
    geom: &ArrayGeometry,
    sat: &SatelliteGeometry,
    grid: UvGrid,
) -> Result<Vec<GroundUserPosition>> {
    let ratio = plan.ratio(m)?;
    let w = weights.get(m);
    let mut cells = Vec::new();
    let mut peak = 0.0_f64;
    scan_gain(w, ratio, geom, grid, |u, v, g| {
        peak = peak.max(g);
        cells.push((u, v, g));
    });
    Ok(cells
        .into_iter()
        .filter(|&(_, _, g)| g >= 0.5 * peak)
        .filter_map(|(u, v, _)| sat.ground_from_uv(UvDirection { u, v }))
        .collect())
}

/// Fraction of users inside the 3 dB footprint of at least one subcarrier,
/// taking `N_rx²` as the peak gain. `beam_gains` is the `K × M` matrix of
/// `|w^H a|²`.
pub fn footprint_coverage(beam_gains: &Array2<f64>, n_rx: usize) -> f64 {
    let k = beam_gains.nrows();
    if k == 0 {
        return 0.0;
    }
    let half = 0.5 * (n_rx * n_rx) as f64;
    let covered = beam_gains
        .rows()
        .into_iter()
        .filter(|row| row.iter().any(|&g| g >= half))
        .count();
    covered as f64 / k as f64
}
