//! Alternating optimization of delays, phases and alignment phases.
//!
//! The beamformer is fitted to a desired frequency-direction mapping by
//! minimizing `Σ_m ‖α_m a^(m) − w^(m)‖²` over the delays `T`, the phases `Φ`
//! and the unit-modulus alignment vector α. Expanding the norm, this is
//! `2·M·N − 2F` with `F = Σ_m Re(α_m* a^(m)H w^(m))`, so each block update
//! maximizes `F`:
//!
//! * α has the closed form `α_m = exp(j∠(a^(m)H w^(m)))`;
//! * for fixed α and `τ_n`, `φ_n = −∠S_n` with
//!   `S_n = Σ_m exp(j(δ_mn − 2π f_m τ_n))`;
//! * `τ_n` maximizes `|S_n|` over a uniform delay grid.

use std::f64::consts::{PI, TAU};
use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{wrapped_delay_phase, DirectionMapping, JptaBeamformer};
use crate::channel::{ArrayGeometry, FrequencyPlan};
use crate::rng::SeedTree;
use crate::{Complex, Error, Result};

/// Starting point for α.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaInit {
    /// `α = 1` on every subcarrier.
    Ones,
    /// Independent uniform phases drawn from the given seed.
    RandomPhases(u64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSettings {
    /// Largest delay on the search grid, seconds.
    pub tau_max: f64,
    /// Delay grid step, seconds.
    pub grid_step: f64,
    /// Stop once `|F_k − F_{k−1}| ≤ tol·|F_{k−1}|`.
    pub convergence_tol: f64,
    pub max_iterations: usize,
    pub alpha_init: AlphaInit,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        OptimizerSettings {
            tau_max: 50e-9,
            grid_step: 25e-12,
            convergence_tol: 1e-6,
            max_iterations: 100,
            alpha_init: AlphaInit::Ones,
        }
    }
}

impl OptimizerSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau_max.is_finite() && self.tau_max >= 0.0) {
            return Err(Error::field("optimizer.tau_max_s", "must be finite and non-negative"));
        }
        if !(self.grid_step.is_finite() && self.grid_step > 0.0) {
            return Err(Error::field("optimizer.tau_step_s", "must be positive"));
        }
        if self.grid_points() > 50_000_000 {
            return Err(Error::field("optimizer.tau_step_s", "delay grid is too fine"));
        }
        if !(self.convergence_tol >= 0.0) {
            return Err(Error::field("optimizer.tolerance", "must be non-negative"));
        }
        if self.max_iterations == 0 {
            return Err(Error::field("optimizer.max_iterations", "must be at least 1"));
        }
        Ok(())
    }

    /// Number of grid points `{0, Δτ, …, τ_max}`.
    pub fn grid_points(&self) -> usize {
        (self.tau_max / self.grid_step + 1e-9).floor() as usize + 1
    }
}

/// Output of [`optimize_rainbow`].
#[derive(Debug, Clone)]
pub struct OptimizationResult {
    pub beamformer: JptaBeamformer,
    /// `F` after every iteration.
    pub trace: Vec<f64>,
    /// False when the iteration cap was hit before the tolerance was met.
    pub converged: bool,
    pub elapsed: Duration,
}

impl OptimizationResult {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }

    pub fn objective(&self) -> f64 {
        self.trace.last().copied().unwrap_or(0.0)
    }
}

/// Precomputed frequencies and steering phases for one mapping.
struct Problem {
    n_rx: usize,
    freqs: Vec<f64>,
    /// `π (f_m/f_c)(nx·u_m + ny·v_m)`, element-major: `theta[n·M + m]`.
    theta: Vec<f64>,
}

impl Problem {
    fn new(mapping: &DirectionMapping, plan: &FrequencyPlan, geom: &ArrayGeometry) -> Result<Self> {
        if mapping.len() != plan.subcarriers {
            return Err(Error::DimensionMismatch(format!(
                "mapping has {} directions for {} subcarriers",
                mapping.len(),
                plan.subcarriers
            )));
        }
        let m_count = plan.subcarriers;
        let ratios = plan.ratios();
        let mut theta = Vec::with_capacity(geom.n_rx() * m_count);
        for nx in 0..geom.n_x {
            for ny in 0..geom.n_y {
                theta.extend((0..m_count).map(|m| {
                    PI * ratios[m] * (nx as f64 * mapping.u()[m] + ny as f64 * mapping.v()[m])
                }));
            }
        }
        Ok(Problem {
            n_rx: geom.n_rx(),
            freqs: plan.frequencies(),
            theta,
        })
    }

    fn m(&self) -> usize {
        self.freqs.len()
    }

    fn theta(&self, n: usize) -> &[f64] {
        &self.theta[n * self.m()..(n + 1) * self.m()]
    }

    /// `exp(jδ_mn)` for element `n`.
    fn coefficients(&self, n: usize, alpha_phases: &[f64]) -> Vec<Complex> {
        self.theta(n)
            .iter()
            .zip(alpha_phases)
            .map(|(t, a)| Complex::from_polar(1.0, t - a))
            .collect()
    }

    /// `z_m = a^(m)H w^(m)` for every subcarrier.
    fn responses(&self, delays: &[f64], phases: &[f64]) -> Vec<Complex> {
        (0..self.m())
            .into_par_iter()
            .map(|m| {
                let f = self.freqs[m];
                (0..self.n_rx)
                    .map(|n| {
                        let ph = self.theta[n * self.m() + m] + phases[n]
                            - wrapped_delay_phase(f, delays[n]);
                        Complex::from_polar(1.0, ph)
                    })
                    .sum()
            })
            .collect()
    }

    fn best_delay_and_phase(&self, n: usize, alpha_phases: &[f64], settings: &OptimizerSettings) -> (f64, f64) {
        let c = self.coefficients(n, alpha_phases);
        let tau = settings.grid_step * search_grid(&c, &self.freqs, settings) as f64;
        let s = phasor_sum(&c, &self.freqs, tau);
        (tau, phase_from_sum(s))
    }
}

fn phase_from_sum(s: Complex) -> f64 {
    if s == Complex::new(0.0, 0.0) {
        0.0
    } else {
        (-s.arg()).rem_euclid(TAU)
    }
}

/// `Σ_m c_m exp(−j2π f_m τ)` evaluated directly.
fn phasor_sum(c: &[Complex], freqs: &[f64], tau: f64) -> Complex {
    c.iter()
        .zip(freqs)
        .map(|(c, &f)| c * Complex::from_polar(1.0, -wrapped_delay_phase(f, tau)))
        .sum()
}

/// Grid steps between exact reseeds of the phasor recurrence.
const RESEED: usize = 256;

/// Index of the delay grid point maximizing `|Σ_m c_m exp(−j2π f_m τ)|`.
///
/// The phasors advance by a fixed rotation per grid step, so each point costs
/// `M` complex multiply-adds. They are recomputed exactly every [`RESEED`]
/// steps to bound drift. Points within a relative `1e−10` of the running best
/// do not replace it, which resolves ties toward the smallest delay.
fn search_grid(c: &[Complex], freqs: &[f64], settings: &OptimizerSettings) -> usize {
    let m = c.len();
    let step = settings.grid_step;
    let (rr, ri): (Vec<f64>, Vec<f64>) = freqs
        .iter()
        .map(|&f| {
            let w = Complex::from_polar(1.0, -wrapped_delay_phase(f, step));
            (w.re, w.im)
        })
        .unzip();
    let mut pr = vec![0.0; m];
    let mut pi = vec![0.0; m];
    let (mut best_g, mut best) = (0, f64::NEG_INFINITY);
    let total = settings.grid_points();
    let mut g0 = 0;
    while g0 < total {
        let tau0 = g0 as f64 * step;
        for k in 0..m {
            let p = c[k] * Complex::from_polar(1.0, -wrapped_delay_phase(freqs[k], tau0));
            pr[k] = p.re;
            pi[k] = p.im;
        }
        for g in g0..(g0 + RESEED).min(total) {
            let (sr, si) = sum_and_rotate(&mut pr, &mut pi, &rr, &ri);
            let val = sr * sr + si * si;
            if val > best * (1.0 + 1e-10) {
                best = val;
                best_g = g;
            }
        }
        g0 += RESEED;
    }
    best_g
}

/// Returns `Σ p` and advances `p ← p·r` in place.
#[inline]
fn sum_and_rotate(pr: &mut [f64], pi: &mut [f64], rr: &[f64], ri: &[f64]) -> (f64, f64) {
    const L: usize = 4;
    let mut sr = [0.0; L];
    let mut si = [0.0; L];
    let body = pr.len() / L * L;
    let (pr_b, pr_t) = pr.split_at_mut(body);
    let (pi_b, pi_t) = pi.split_at_mut(body);
    for (((a, b), c), d) in pr_b
        .chunks_exact_mut(L)
        .zip(pi_b.chunks_exact_mut(L))
        .zip(rr[..body].chunks_exact(L))
        .zip(ri[..body].chunks_exact(L))
    {
        for l in 0..L {
            sr[l] += a[l];
            si[l] += b[l];
            let x = a[l] * c[l] - b[l] * d[l];
            let y = a[l] * d[l] + b[l] * c[l];
            a[l] = x;
            b[l] = y;
        }
    }
    let mut tr = 0.0;
    let mut ti = 0.0;
    for (k, (a, b)) in pr_t.iter_mut().zip(pi_t.iter_mut()).enumerate() {
        let (c, d) = (rr[body + k], ri[body + k]);
        tr += *a;
        ti += *b;
        let x = *a * c - *b * d;
        *b = *a * d + *b * c;
        *a = x;
    }
    (
        sr.iter().sum::<f64>() + tr,
        si.iter().sum::<f64>() + ti,
    )
}

fn alpha_phases_of(alpha: &[Complex]) -> Vec<f64> {
    alpha.iter().map(|a| a.arg()).collect()
}

fn check_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::DimensionMismatch(format!("{what} has {got} entries, expected {want}")));
    }
    Ok(())
}

/// `F = Σ_m Re(α_m* a^(m)H w^(m))` for the mapping's directions.
pub fn objective_f(bf: &JptaBeamformer, mapping: &DirectionMapping, plan: &FrequencyPlan) -> Result<f64> {
    let p = Problem::new(mapping, plan, &bf.geometry)?;
    check_len("alpha", bf.alpha_phases.len(), plan.subcarriers)?;
    let z = p.responses(&bf.delays, &bf.phases);
    Ok(z.iter()
        .zip(&bf.alpha_phases)
        .map(|(z, a)| (Complex::from_polar(1.0, -a) * z).re)
        .sum())
}

/// Fitting residual `Σ_m ‖α_m a^(m) − w^(m)‖²`, evaluated term by term.
pub fn residual(bf: &JptaBeamformer, mapping: &DirectionMapping, plan: &FrequencyPlan) -> Result<f64> {
    check_len("mapping", mapping.len(), plan.subcarriers)?;
    check_len("alpha", bf.alpha_phases.len(), plan.subcarriers)?;
    let mut total = 0.0;
    for m in 0..plan.subcarriers {
        let a = crate::channel::array_response(plan, m, &bf.geometry, mapping.direction(m))?;
        let w = bf.weights(plan, m)?;
        let al = Complex::from_polar(1.0, bf.alpha_phases[m]);
        total += a.iter().zip(&w).map(|(a, w)| (al * a - w).norm_sqr()).sum::<f64>();
    }
    Ok(total)
}

/// Closed-form α for fixed delays and phases. Subcarriers with a zero
/// response get `α = 1`.
pub fn optimal_alpha(
    delays: &[f64],
    phases: &[f64],
    mapping: &DirectionMapping,
    plan: &FrequencyPlan,
    geom: &ArrayGeometry,
) -> Result<Vec<Complex>> {
    check_len("delays", delays.len(), geom.n_rx())?;
    check_len("phases", phases.len(), geom.n_rx())?;
    let p = Problem::new(mapping, plan, geom)?;
    Ok(p.responses(delays, phases)
        .into_iter()
        .map(|z| {
            if z == Complex::new(0.0, 0.0) {
                Complex::new(1.0, 0.0)
            } else {
                z / z.norm()
            }
        })
        .collect())
}

/// Optimal phase shifts `φ_n = (−∠S_n) mod 2π` for fixed α and delays.
pub fn optimal_phase_shifts(
    alpha: &[Complex],
    delays: &[f64],
    mapping: &DirectionMapping,
    plan: &FrequencyPlan,
    geom: &ArrayGeometry,
) -> Result<Vec<f64>> {
    check_len("alpha", alpha.len(), plan.subcarriers)?;
    check_len("delays", delays.len(), geom.n_rx())?;
    let p = Problem::new(mapping, plan, geom)?;
    let ap = alpha_phases_of(alpha);
    Ok((0..geom.n_rx())
        .map(|n| phase_from_sum(phasor_sum(&p.coefficients(n, &ap), &p.freqs, delays[n])))
        .collect())
}

/// Grid delay maximizing `|S_n|` for element `(nx, ny)`.
pub fn line_search_ttd(
    alpha: &[Complex],
    nx: usize,
    ny: usize,
    mapping: &DirectionMapping,
    plan: &FrequencyPlan,
    geom: &ArrayGeometry,
    settings: &OptimizerSettings,
) -> Result<f64> {
    settings.validate()?;
    check_len("alpha", alpha.len(), plan.subcarriers)?;
    if nx >= geom.n_x || ny >= geom.n_y {
        return Err(Error::IndexOutOfRange {
            index: nx.max(ny),
            len: if nx >= geom.n_x { geom.n_x } else { geom.n_y },
        });
    }
    let p = Problem::new(mapping, plan, geom)?;
    let c = p.coefficients(geom.index(nx, ny), &alpha_phases_of(alpha));
    Ok(settings.grid_step * search_grid(&c, &p.freqs, settings) as f64)
}

/// Alternates the delay/phase and α updates until `F` stalls.
pub fn optimize_rainbow(
    mapping: &DirectionMapping,
    plan: &FrequencyPlan,
    geom: &ArrayGeometry,
    settings: &OptimizerSettings,
) -> Result<OptimizationResult> {
    settings.validate()?;
    let start = Instant::now();
    let p = Problem::new(mapping, plan, geom)?;
    let mut alpha_phases = match settings.alpha_init {
        AlphaInit::Ones => vec![0.0; plan.subcarriers],
        AlphaInit::RandomPhases(seed) => {
            let mut rng = SeedTree::new(seed).rng();
            (0..plan.subcarriers).map(|_| rng.gen_range(0.0..TAU)).collect()
        }
    };
    let mut delays = vec![0.0; p.n_rx];
    let mut phases = vec![0.0; p.n_rx];
    let mut trace = Vec::new();
    let mut converged = false;
    for _ in 0..settings.max_iterations {
        let updates: Vec<(f64, f64)> = (0..p.n_rx)
            .into_par_iter()
            .map(|n| p.best_delay_and_phase(n, &alpha_phases, settings))
            .collect();
        for (n, (t, ph)) in updates.into_iter().enumerate() {
            delays[n] = t;
            phases[n] = ph;
        }
        let z = p.responses(&delays, &phases);
        for (a, z) in alpha_phases.iter_mut().zip(&z) {
            *a = if *z == Complex::new(0.0, 0.0) { 0.0 } else { z.arg() };
        }
        let f: f64 = z.iter().map(|z| z.norm()).sum();
        let stalled = trace
            .last()
            .is_some_and(|&prev: &f64| (f - prev).abs() <= settings.convergence_tol * prev.abs());
        trace.push(f);
        if stalled {
            converged = true;
            break;
        }
    }
    Ok(OptimizationResult {
        beamformer: JptaBeamformer::new(*geom, delays, phases, alpha_phases)?,
        trace,
        converged,
        elapsed: start.elapsed(),
    })
}
