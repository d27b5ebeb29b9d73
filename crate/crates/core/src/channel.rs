//! Frequency plan, URA array responses, link budget and Rician channels.
//!
//! Subcarrier indices are zero-based throughout the crate: subcarrier `m`
//! (`0 ≤ m < M`) sits at `f_c + (m − (M−1)/2)·Δf`, which is the usual
//! one-based `f_c + (m − (M+1)/2)·Δf` shifted by one.
//!
//! Element `(nx, ny)` of an `Nx × Ny` array has linear index `nx·Ny + ny`,
//! matching the Kronecker product `a_x ⊗ a_y`. Element spacing is half a
//! wavelength at the center frequency.

use std::f64::consts::PI;

use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::UvDirection;
use crate::rng::SeedTree;
use crate::{Complex, Error, Result, BOLTZMANN, SPEED_OF_LIGHT};

/// OFDM frequency plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyPlan {
    /// Center frequency `f_c`, Hz.
    pub center: f64,
    /// Number of subcarriers `M`.
    pub subcarriers: usize,
    /// Subcarrier spacing `Δf`, Hz.
    pub spacing: f64,
}

impl FrequencyPlan {
    pub fn new(center: f64, subcarriers: usize, spacing: f64) -> Result<Self> {
        if subcarriers == 0 {
            return Err(Error::InvalidInput("at least one subcarrier is required".into()));
        }
        if !(center.is_finite() && center > 0.0) || !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidInput(
                "center frequency and spacing must be positive".into(),
            ));
        }
        let plan = FrequencyPlan {
            center,
            subcarriers,
            spacing,
        };
        if plan.raw_frequency(0) <= 0.0 {
            return Err(Error::InvalidInput(
                "lowest subcarrier frequency must be positive".into(),
            ));
        }
        Ok(plan)
    }

    /// Plan with `Δf = bandwidth / M`.
    pub fn from_bandwidth(center: f64, bandwidth: f64, subcarriers: usize) -> Result<Self> {
        if subcarriers == 0 {
            return Err(Error::InvalidInput("at least one subcarrier is required".into()));
        }
        Self::new(center, subcarriers, bandwidth / subcarriers as f64)
    }

    pub fn bandwidth(&self) -> f64 {
        self.spacing * self.subcarriers as f64
    }

    fn raw_frequency(&self, m: usize) -> f64 {
        self.center + (m as f64 - (self.subcarriers as f64 - 1.0) / 2.0) * self.spacing
    }

    /// Absolute frequency of subcarrier `m`.
    pub fn frequency(&self, m: usize) -> Result<f64> {
        self.check(m)?;
        Ok(self.raw_frequency(m))
    }

    /// `f_m / f_c`, the factor that scales steering phases.
    pub fn ratio(&self, m: usize) -> Result<f64> {
        Ok(self.frequency(m)? / self.center)
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.subcarriers).map(|m| self.raw_frequency(m)).collect()
    }

    pub fn ratios(&self) -> Vec<f64> {
        (0..self.subcarriers)
            .map(|m| self.raw_frequency(m) / self.center)
            .collect()
    }

    pub(crate) fn check(&self, m: usize) -> Result<()> {
        if m >= self.subcarriers {
            return Err(Error::IndexOutOfRange {
                index: m,
                len: self.subcarriers,
            });
        }
        Ok(())
    }
}

/// Uniform rectangular array dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    pub n_x: usize,
    pub n_y: usize,
}

impl ArrayGeometry {
    pub fn new(n_x: usize, n_y: usize) -> Result<Self> {
        if n_x == 0 || n_y == 0 {
            return Err(Error::InvalidInput("array needs at least one element per axis".into()));
        }
        Ok(ArrayGeometry { n_x, n_y })
    }

    pub fn n_rx(&self) -> usize {
        self.n_x * self.n_y
    }

    /// Linear index of element `(nx, ny)` (zero-based).
    pub fn index(&self, nx: usize, ny: usize) -> usize {
        nx * self.n_y + ny
    }
}

/// Antenna gains and receiver noise temperature, all linear.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub g_sat: f64,
    pub g_ut: f64,
    pub noise_temperature: f64,
}

impl LinkBudget {
    pub fn new(g_sat: f64, g_ut: f64, noise_temperature: f64) -> Result<Self> {
        for (name, x) in [
            ("satellite gain", g_sat),
            ("terminal gain", g_ut),
            ("noise temperature", noise_temperature),
        ] {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::InvalidInput(format!("{name} must be positive")));
            }
        }
        Ok(LinkBudget {
            g_sat,
            g_ut,
            noise_temperature,
        })
    }
}

fn axis_phasors(count: usize, phase_step: f64) -> impl Iterator<Item = Complex> {
    (0..count).map(move |n| Complex::from_polar(1.0, -(n as f64) * phase_step))
}

/// Writes the steering vector for frequency ratio `ratio = f/f_c` into `out`.
pub(crate) fn steering_into(ratio: f64, geom: &ArrayGeometry, dir: UvDirection, out: &mut [Complex]) {
    debug_assert_eq!(out.len(), geom.n_rx());
    let ay: Vec<Complex> = axis_phasors(geom.n_y, PI * ratio * dir.v).collect();
    for (nx, ax) in axis_phasors(geom.n_x, PI * ratio * dir.u).enumerate() {
        let row = &mut out[nx * geom.n_y..(nx + 1) * geom.n_y];
        for (o, y) in row.iter_mut().zip(&ay) {
            *o = ax * y;
        }
    }
}

/// Steering vector at an arbitrary frequency ratio `f/f_c`.
pub fn steering_vector(ratio: f64, geom: &ArrayGeometry, dir: UvDirection) -> Vec<Complex> {
    let mut out = vec![Complex::new(0.0, 0.0); geom.n_rx()];
    steering_into(ratio, geom, dir, &mut out);
    out
}

/// Frequency-dependent array response `a^(m)(u, v) = a_x(u) ⊗ a_y(v)`.
pub fn array_response(
    plan: &FrequencyPlan,
    m: usize,
    geom: &ArrayGeometry,
    dir: UvDirection,
) -> Result<Vec<Complex>> {
    Ok(steering_vector(plan.ratio(m)?, geom, dir))
}

/// `w^H a(u, v)` at frequency ratio `ratio`, using the separable URA structure.
pub fn weighted_response(
    weights: &[Complex],
    ratio: f64,
    geom: &ArrayGeometry,
    dir: UvDirection,
) -> Complex {
    debug_assert_eq!(weights.len(), geom.n_rx());
    let ay: Vec<Complex> = axis_phasors(geom.n_y, PI * ratio * dir.v).collect();
    axis_phasors(geom.n_x, PI * ratio * dir.u)
        .enumerate()
        .map(|(nx, ax)| {
            let row = &weights[nx * geom.n_y..(nx + 1) * geom.n_y];
            let inner: Complex = row.iter().zip(&ay).map(|(w, y)| w.conj() * y).sum();
            ax * inner
        })
        .sum()
}

/// Average channel power `η = G_sat·G_ut·(c / (4π f d))²`.
pub fn mean_channel_power(frequency: f64, distance: f64, budget: &LinkBudget) -> f64 {
    debug_assert!(distance > 0.0);
    let x = SPEED_OF_LIGHT / (4.0 * PI * frequency * distance);
    budget.g_sat * budget.g_ut * x * x
}

/// Draws a Rician gain with `E|g|² = η` and Rician factor `κ`.
pub fn sample_gain<R: Rng + ?Sized>(eta: f64, kappa: f64, rng: &mut R) -> Complex {
    debug_assert!(eta > 0.0 && kappa >= 0.0);
    let mean = (kappa * eta / (2.0 * (kappa + 1.0))).sqrt();
    let std = (eta / (2.0 * (kappa + 1.0))).sqrt();
    let n = Normal::new(mean, std).expect("finite Rician parameters");
    Complex::new(n.sample(rng), n.sample(rng))
}

/// Per-subcarrier noise power `σ² = k_B·Δf·T`.
pub fn noise_power(plan: &FrequencyPlan, budget: &LinkBudget) -> f64 {
    BOLTZMANN * plan.spacing * budget.noise_temperature
}

/// Average SNR per watt: `η·|w^H a|² / (N_rx σ²)`.
pub fn average_snr(
    weights: &[Complex],
    response: &[Complex],
    eta: f64,
    sigma2: f64,
    n_rx: usize,
) -> Result<f64> {
    if weights.len() != response.len() || weights.len() != n_rx {
        return Err(Error::DimensionMismatch(format!(
            "weights {}, response {}, n_rx {n_rx}",
            weights.len(),
            response.len()
        )));
    }
    let inner: Complex = weights.iter().zip(response).map(|(w, a)| w.conj() * a).sum();
    Ok(eta * inner.norm_sqr() / (n_rx as f64 * sigma2))
}

/// Receive weights, either shared by all subcarriers or one vector each.
#[derive(Debug, Clone, PartialEq)]
pub enum BeamWeights {
    /// A single frequency-flat weight vector.
    Flat(Vec<Complex>),
    /// `M` weight vectors of length `n_rx`, stored back to back.
    PerSubcarrier { n_rx: usize, data: Vec<Complex> },
}

impl BeamWeights {
    pub fn n_rx(&self) -> usize {
        match self {
            BeamWeights::Flat(w) => w.len(),
            BeamWeights::PerSubcarrier { n_rx, .. } => *n_rx,
        }
    }

    /// Weights applied on subcarrier `m`.
    pub fn get(&self, m: usize) -> &[Complex] {
        match self {
            BeamWeights::Flat(w) => w,
            BeamWeights::PerSubcarrier { n_rx, data } => &data[m * n_rx..(m + 1) * n_rx],
        }
    }

    pub fn is_frequency_flat(&self) -> bool {
        matches!(self, BeamWeights::Flat(_))
    }

    fn check(&self, plan: &FrequencyPlan, geom: &ArrayGeometry) -> Result<()> {
        if self.n_rx() != geom.n_rx() {
            return Err(Error::DimensionMismatch(format!(
                "weights have {} elements, array has {}",
                self.n_rx(),
                geom.n_rx()
            )));
        }
        if let BeamWeights::PerSubcarrier { n_rx, data } = self {
            if data.len() != n_rx * plan.subcarriers {
                return Err(Error::DimensionMismatch(format!(
                    "{} weight entries for {} subcarriers",
                    data.len(),
                    plan.subcarriers
                )));
            }
        }
        Ok(())
    }
}

/// Beam gains `|w^(m)H a^(m)(u_k, v_k)|²` as a `K × M` matrix.
pub fn gain_matrix(
    weights: &BeamWeights,
    plan: &FrequencyPlan,
    geom: &ArrayGeometry,
    dirs: &[UvDirection],
) -> Result<Array2<f64>> {
    weights.check(plan, geom)?;
    let ratios = plan.ratios();
    let rows: Vec<Vec<f64>> = dirs
        .par_iter()
        .map(|&dir| {
            ratios
                .iter()
                .enumerate()
                .map(|(m, &r)| weighted_response(weights.get(m), r, geom, dir).norm_sqr())
                .collect()
        })
        .collect();
    let mut out = Array2::zeros((dirs.len(), plan.subcarriers));
    for (k, row) in rows.into_iter().enumerate() {
        for (m, g) in row.into_iter().enumerate() {
            out[[k, m]] = g;
        }
    }
    Ok(out)
}

/// Large-scale channel description of one user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserChannelModel {
    pub direction: UvDirection,
    pub slant_distance: f64,
    pub rician_kappa: f64,
    /// Mean channel power per subcarrier (linear).
    pub eta: Vec<f64>,
    /// Transmit power budget, watts.
    pub power_budget: f64,
}

impl UserChannelModel {
    /// Builds the model, computing `η` for every subcarrier of `plan`.
    pub fn new(
        direction: UvDirection,
        slant_distance: f64,
        rician_kappa: f64,
        power_budget: f64,
        plan: &FrequencyPlan,
        link: &LinkBudget,
    ) -> Result<Self> {
        if !(slant_distance > 0.0) {
            return Err(Error::InvalidInput("slant distance must be positive".into()));
        }
        if !(rician_kappa >= 0.0) || !(power_budget > 0.0) {
            return Err(Error::InvalidInput(
                "Rician factor must be >= 0 and power budget > 0".into(),
            ));
        }
        let eta = plan
            .frequencies()
            .into_iter()
            .map(|f| mean_channel_power(f, slant_distance, link))
            .collect();
        Ok(UserChannelModel {
            direction,
            slant_distance,
            rician_kappa,
            eta,
            power_budget,
        })
    }
}

/// One draw of the per-subcarrier channel gains plus the average SNRs.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// Complex gains `g_k^(m)`, `K × M`.
    pub gains: Array2<Complex>,
    /// Average SNR per watt `γ_k^(m)`, `K × M`.
    pub avg_snr: Array2<f64>,
}

/// Average SNR matrix `γ_k^(m) = η_k^(m)·G_k^(m) / (N_rx σ²)` from beam gains.
pub fn snr_matrix(users: &[UserChannelModel], gains: &Array2<f64>, n_rx: usize, sigma2: f64) -> Array2<f64> {
    let mut out = gains.clone();
    for (k, mut row) in out.rows_mut().into_iter().enumerate() {
        for (m, g) in row.iter_mut().enumerate() {
            *g *= users[k].eta[m] / (n_rx as f64 * sigma2);
        }
    }
    out
}

/// Draws Rician gains for every user/subcarrier and evaluates the average SNRs.
///
/// User `k` draws from substream `k` of `seeds`, so realizations are
/// independent of evaluation order.
pub fn realize_channels(
    users: &[UserChannelModel],
    plan: &FrequencyPlan,
    geom: &ArrayGeometry,
    weights: &BeamWeights,
    sigma2: f64,
    seeds: &SeedTree,
) -> Result<ChannelRealization> {
    for u in users {
        if u.eta.len() != plan.subcarriers {
            return Err(Error::DimensionMismatch(format!(
                "user has {} η entries, plan has {} subcarriers",
                u.eta.len(),
                plan.subcarriers
            )));
        }
    }
    let dirs: Vec<UvDirection> = users.iter().map(|u| u.direction).collect();
    let beam = gain_matrix(weights, plan, geom, &dirs)?;
    let avg_snr = snr_matrix(users, &beam, geom.n_rx(), sigma2);
    Ok(ChannelRealization {
        gains: draw_fading(users, seeds),
        avg_snr,
    })
}

/// Rician gains for every user and subcarrier; user `k` draws from
/// substream `k` of `seeds`. The draw does not depend on the beamformer.
pub fn draw_fading(users: &[UserChannelModel], seeds: &SeedTree) -> Array2<Complex> {
    let m_count = users.first().map_or(0, |u| u.eta.len());
    let mut gains = Array2::from_elem((users.len(), m_count), Complex::new(0.0, 0.0));
    for (k, u) in users.iter().enumerate() {
        let mut rng = seeds.stream(&[k as u64]);
        for (m, &eta) in u.eta.iter().enumerate() {
            gains[[k, m]] = sample_gain(eta, u.rician_kappa, &mut rng);
        }
    }
    gains
}
