//! Fixed frequency-direction mappings.
//!
//! A mapping assigns every subcarrier a desired beam direction in the UV
//! plane. Two families are provided: an Archimedean spiral growing outward
//! with frequency, and a set of parallel lines that scan the coverage disk.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::geometry::UvDirection;
use crate::{Error, Result};

/// Desired UV direction per subcarrier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionMapping {
    u: Vec<f64>,
    v: Vec<f64>,
}

impl DirectionMapping {
    pub fn new(u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::DimensionMismatch(format!(
                "u has {} entries, v has {}",
                u.len(),
                v.len()
            )));
        }
        for (i, (&a, &b)) in u.iter().zip(&v).enumerate() {
            UvDirection::new(a, b)
                .map_err(|e| Error::Domain(format!("subcarrier {i}: {e}")))?;
        }
        Ok(DirectionMapping { u, v })
    }

    pub fn from_directions(dirs: &[UvDirection]) -> Self {
        DirectionMapping {
            u: dirs.iter().map(|d| d.u).collect(),
            v: dirs.iter().map(|d| d.v).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn direction(&self, m: usize) -> UvDirection {
        UvDirection {
            u: self.u[m],
            v: self.v[m],
        }
    }

    pub fn directions(&self) -> impl Iterator<Item = UvDirection> + '_ {
        (0..self.len()).map(|m| self.direction(m))
    }
}

fn check_radius(u_max: f64) -> Result<()> {
    if !(u_max > 0.0 && u_max <= 1.0) {
        return Err(Error::InvalidInput(format!("u_max {u_max} outside (0, 1]")));
    }
    Ok(())
}

/// Spiral turn count whose arm spacing is about one broadside null-to-null
/// half width `2/Nx`.
pub fn spiral_turns_for(u_max: f64, n_x: usize) -> f64 {
    (u_max / (2.0 / n_x as f64)).ceil().max(1.0)
}

/// Mapping I: Archimedean spiral from the origin out to radius `u_max`.
///
/// Subcarrier `m` sits at radius `u_max·sqrt(m/(M−1))` and angle
/// `2π·turns·m/(M−1)`; the square root keeps the point density uniform over
/// the disk.
pub fn mapping_spiral(subcarriers: usize, u_max: f64, turns: f64) -> Result<DirectionMapping> {
    check_radius(u_max)?;
    if subcarriers == 0 {
        return Err(Error::InvalidInput("mapping needs at least one subcarrier".into()));
    }
    let span = (subcarriers.max(2) - 1) as f64;
    let (u, v) = (0..subcarriers)
        .map(|m| {
            let t = m as f64 / span;
            let r = u_max * t.sqrt();
            let w = TAU * turns * t;
            (r * w.cos(), r * w.sin())
        })
        .unzip();
    Ok(DirectionMapping { u, v })
}

/// Scan order of the lines in [`mapping_lines_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineSweep {
    /// Every line is scanned from −u to +u.
    Raster,
    /// Consecutive lines alternate direction.
    Boustrophedon,
}

/// Mapping II with the default [`LineSweep::Raster`] order.
pub fn mapping_lines(subcarriers: usize, u_max: f64, n_lines: usize) -> Result<DirectionMapping> {
    mapping_lines_with(subcarriers, u_max, n_lines, LineSweep::Raster)
}

/// Mapping II: `n_lines` horizontal lines across the disk of radius `u_max`.
///
/// Line `i` sits at the center of the `i`-th of `n_lines` equal bands in
/// `[−u_max, u_max]`. Subcarriers are dealt out contiguously, line by line,
/// in proportion to chord length (largest-remainder rounding), so the
/// along-line pitch is the same on every line. Points are cell centers of
/// each chord.
pub fn mapping_lines_with(
    subcarriers: usize,
    u_max: f64,
    n_lines: usize,
    sweep: LineSweep,
) -> Result<DirectionMapping> {
    check_radius(u_max)?;
    if n_lines == 0 {
        return Err(Error::InvalidInput("at least one line is required".into()));
    }
    if subcarriers == 0 {
        return Err(Error::InvalidInput("mapping needs at least one subcarrier".into()));
    }
    let band = 2.0 * u_max / n_lines as f64;
    let levels: Vec<f64> = (0..n_lines)
        .map(|i| -u_max + (i as f64 + 0.5) * band)
        .collect();
    let half_chords: Vec<f64> = levels
        .iter()
        .map(|v| (u_max * u_max - v * v).max(0.0).sqrt())
        .collect();
    let counts = apportion(subcarriers, &half_chords);

    let mut u = Vec::with_capacity(subcarriers);
    let mut v = Vec::with_capacity(subcarriers);
    for (i, (&count, (&level, &c))) in counts.iter().zip(levels.iter().zip(&half_chords)).enumerate() {
        let reverse = sweep == LineSweep::Boustrophedon && i % 2 == 1;
        for j in 0..count {
            let jj = if reverse { count - 1 - j } else { j };
            u.push(-c + (jj as f64 + 0.5) * 2.0 * c / count as f64);
            v.push(level);
        }
    }
    Ok(DirectionMapping { u, v })
}

/// Largest-remainder split of `total` proportional to `weights`.
fn apportion(total: usize, weights: &[f64]) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    let exact: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut counts: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let mut left = total - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        counts[i] += 1;
        left -= 1;
    }
    counts
}
