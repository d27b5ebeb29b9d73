//! Scenario configuration files.
//!
//! The format is TOML written with flat dotted keys, one setting per line:
//!
//! ```toml
//! plan.bandwidth_hz = 1.4e9
//! users.count = 32
//! evaluation.schemes = ["rainbow", "bh_squint:jspa:equal"]
//! ```
//!
//! Every key is optional and an empty file yields the reference setup.
//! Gains, powers and the Rician factor are given in dB/dBm here and turned
//! into linear units by [`ScenarioConfig::scenario`].

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::beamformer::{AlphaInit, LineSweep, OptimizerSettings, WitnessConfig};
use crate::channel::{ArrayGeometry, FrequencyPlan, LinkBudget};
use crate::evaluation::{FadingMode, MappingKind, MappingSpec, Scenario, Scheme};
use crate::geometry::SatelliteGeometry;
use crate::{db_to_linear, dbm_to_watts, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanConfig {
    pub center_hz: f64,
    pub bandwidth_hz: f64,
    pub subcarriers: usize,
}

impl Default for PlanConfig {
    fn default() -> Self {
        PlanConfig {
            center_hz: 14e9,
            bandwidth_hz: 1.4e9,
            subcarriers: 1024,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArrayConfig {
    pub n_x: usize,
    pub n_y: usize,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        ArrayConfig { n_x: 8, n_y: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkConfig {
    pub g_sat_dbi: f64,
    pub g_ut_dbi: f64,
    pub noise_temperature_k: f64,
}

impl Default for LinkConfig {
    fn default() -> Self {
        LinkConfig {
            g_sat_dbi: 0.0,
            g_ut_dbi: 43.2,
            noise_temperature_k: 290.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub altitude_m: f64,
    pub coverage_radius_m: f64,
    pub earth_radius_m: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig {
            altitude_m: 500e3,
            coverage_radius_m: 500e3,
            earth_radius_m: 6371e3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UsersConfig {
    pub count: usize,
    pub rician_k_db: f64,
    pub power_dbm: f64,
}

impl Default for UsersConfig {
    fn default() -> Self {
        UsersConfig {
            count: 64,
            rician_k_db: 10.0,
            power_dbm: 23.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaStart {
    Ones,
    /// Uniform phases seeded from the master seed.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub tau_max_s: f64,
    pub tau_step_s: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub alpha_init: AlphaStart,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        let d = OptimizerSettings::default();
        OptimizerConfig {
            tau_max_s: d.tau_max,
            tau_step_s: d.grid_step,
            tolerance: d.convergence_tol,
            max_iterations: d.max_iterations,
            alpha_init: AlphaStart::Ones,
        }
    }
}

impl OptimizerConfig {
    pub fn settings(&self, seed: u64) -> OptimizerSettings {
        OptimizerSettings {
            tau_max: self.tau_max_s,
            grid_step: self.tau_step_s,
            convergence_tol: self.tolerance,
            max_iterations: self.max_iterations,
            alpha_init: match self.alpha_init {
                AlphaStart::Ones => AlphaInit::Ones,
                AlphaStart::Random => AlphaInit::RandomPhases(seed),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MappingConfig {
    pub kind: MappingKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spiral_turns: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_lines: Option<usize>,
    pub sweep: LineSweep,
}

impl Default for MappingConfig {
    fn default() -> Self {
        let d = MappingSpec::default();
        MappingConfig {
            kind: d.kind,
            spiral_turns: d.spiral_turns,
            n_lines: d.n_lines,
            sweep: d.sweep,
        }
    }
}

impl MappingConfig {
    pub fn spec(&self) -> MappingSpec {
        MappingSpec {
            kind: self.kind,
            spiral_turns: self.spiral_turns,
            n_lines: self.n_lines,
            sweep: self.sweep,
        }
    }
}

/// Monte-Carlo settings for `run`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationConfig {
    pub seed: u64,
    /// User drops averaged per sweep point.
    pub seeds: usize,
    pub schemes: Vec<Scheme>,
    pub fading: FadingMode,
    pub k_values: Vec<usize>,
    pub bandwidths_hz: Vec<f64>,
    /// Resolution of the UV grid used to locate beam peaks.
    pub grid_resolution: usize,
    /// Subcarriers drawn per footprint map, evenly spaced over the band.
    pub footprint_subcarriers: usize,
    pub footprint_resolution: usize,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        EvaluationConfig {
            seed: 2024,
            seeds: 5,
            schemes: Scheme::standard(),
            fading: FadingMode::PerSlot,
            k_values: vec![1, 2, 4, 8, 16, 32, 64],
            bandwidths_hz: vec![0.7e9, 1.4e9, 2.1e9],
            grid_resolution: 512,
            footprint_subcarriers: 8,
            footprint_resolution: 128,
        }
    }
}

/// Small instances on which the allocators are compared with exhaustive
/// search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AllocationConfig {
    pub users: usize,
    pub subcarriers: usize,
    pub seeds: usize,
    pub kappas_db: Vec<f64>,
}

impl Default for AllocationConfig {
    fn default() -> Self {
        AllocationConfig {
            users: 5,
            subcarriers: 8,
            seeds: 100,
            kappas_db: vec![0.0, 10.0, 20.0, 30.0],
        }
    }
}

/// Problem sizes timed by `bench`: subcarrier counts on the configured
/// array, then square arrays at `array_subcarriers`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub subcarriers: Vec<usize>,
    pub array_sides: Vec<usize>,
    pub array_subcarriers: usize,
    pub runs: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            subcarriers: vec![128, 256, 512, 1024],
            array_sides: vec![4, 8, 16],
            array_subcarriers: 256,
            runs: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub plan: PlanConfig,
    pub array: ArrayConfig,
    pub link: LinkConfig,
    pub geometry: GeometryConfig,
    pub users: UsersConfig,
    pub optimizer: OptimizerConfig,
    pub mapping: MappingConfig,
    pub evaluation: EvaluationConfig,
    pub allocation: AllocationConfig,
    pub bench: BenchConfig,
    pub output: OutputConfig,
}

fn positive(field: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::field(field, format!("must be positive and finite, got {x}")))
    }
}

fn finite(field: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::field(field, format!("must be finite, got {x}")))
    }
}

fn at_least_one(field: &str, n: usize) -> Result<()> {
    if n >= 1 {
        Ok(())
    } else {
        Err(Error::field(field, "must be at least 1"))
    }
}

impl ScenarioConfig {
    /// Parses TOML text and validates it.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Renders the configuration as flat dotted keys. Unset optional keys
    /// are left out.
    pub fn to_toml(&self) -> String {
        let value = toml::Value::try_from(self).expect("config is representable in TOML");
        let mut out = String::new();
        flatten(&value, "", &mut out);
        out
    }

    pub fn validate(&self) -> Result<()> {
        positive("plan.center_hz", self.plan.center_hz)?;
        positive("plan.bandwidth_hz", self.plan.bandwidth_hz)?;
        at_least_one("plan.subcarriers", self.plan.subcarriers)?;
        at_least_one("array.n_x", self.array.n_x)?;
        at_least_one("array.n_y", self.array.n_y)?;
        finite("link.g_sat_dbi", self.link.g_sat_dbi)?;
        finite("link.g_ut_dbi", self.link.g_ut_dbi)?;
        positive("link.noise_temperature_k", self.link.noise_temperature_k)?;
        positive("geometry.altitude_m", self.geometry.altitude_m)?;
        positive("geometry.coverage_radius_m", self.geometry.coverage_radius_m)?;
        positive("geometry.earth_radius_m", self.geometry.earth_radius_m)?;
        at_least_one("users.count", self.users.count)?;
        finite("users.rician_k_db", self.users.rician_k_db)?;
        finite("users.power_dbm", self.users.power_dbm)?;
        if let Some(t) = self.mapping.spiral_turns {
            positive("mapping.spiral_turns", t)?;
        }
        if let Some(n) = self.mapping.n_lines {
            at_least_one("mapping.n_lines", n)?;
        }
        let e = &self.evaluation;
        at_least_one("evaluation.seeds", e.seeds)?;
        if e.schemes.is_empty() {
            return Err(Error::field("evaluation.schemes", "at least one scheme is required"));
        }
        if e.k_values.contains(&0) {
            return Err(Error::field("evaluation.k_values", "user counts must be at least 1"));
        }
        for &b in &e.bandwidths_hz {
            positive("evaluation.bandwidths_hz", b)?;
        }
        at_least_one("evaluation.grid_resolution", e.grid_resolution)?;
        at_least_one("evaluation.footprint_resolution", e.footprint_resolution)?;
        let a = &self.allocation;
        at_least_one("allocation.users", a.users)?;
        at_least_one("allocation.subcarriers", a.subcarriers)?;
        at_least_one("allocation.seeds", a.seeds)?;
        for &k in &a.kappas_db {
            finite("allocation.kappas_db", k)?;
        }
        let b = &self.bench;
        if b.subcarriers.contains(&0) {
            return Err(Error::field("bench.subcarriers", "must be at least 1"));
        }
        if b.array_sides.contains(&0) {
            return Err(Error::field("bench.array_sides", "must be at least 1"));
        }
        at_least_one("bench.array_subcarriers", b.array_subcarriers)?;
        at_least_one("bench.runs", b.runs)?;
        self.scenario(e.seed)?.validate()
    }

    pub fn plan(&self) -> Result<FrequencyPlan> {
        FrequencyPlan::from_bandwidth(self.plan.center_hz, self.plan.bandwidth_hz, self.plan.subcarriers)
            .map_err(|e| Error::field("plan", e.to_string()))
    }

    /// The simulation setup in linear units. `seed` only matters for a
    /// random α start.
    pub fn scenario(&self, seed: u64) -> Result<Scenario> {
        let g = &self.geometry;
        let satellite = SatelliteGeometry::new(g.altitude_m, g.earth_radius_m)
            .map_err(|e| Error::field("geometry", e.to_string()))?;
        Ok(Scenario {
            plan: self.plan()?,
            geometry: ArrayGeometry::new(self.array.n_x, self.array.n_y)?,
            link: LinkBudget::new(
                db_to_linear(self.link.g_sat_dbi),
                db_to_linear(self.link.g_ut_dbi),
                self.link.noise_temperature_k,
            )
            .map_err(|e| Error::field("link", e.to_string()))?,
            satellite,
            coverage_radius: g.coverage_radius_m,
            users: self.users.count,
            rician_kappa: db_to_linear(self.users.rician_k_db),
            power_budget: dbm_to_watts(self.users.power_dbm),
            optimizer: self.optimizer.settings(seed),
            mapping: self.mapping.spec(),
            schemes: self.evaluation.schemes.clone(),
            fading: self.evaluation.fading,
        })
    }

    /// Witness settings on this configuration's band, array and coverage.
    pub fn witness(&self, subcarriers: usize, seeds: usize) -> Result<WitnessConfig> {
        let sc = self.scenario(self.evaluation.seed)?;
        Ok(WitnessConfig {
            subcarriers,
            seeds,
            center: self.plan.center_hz,
            bandwidth: self.plan.bandwidth_hz,
            geometry: sc.geometry,
            u_max: sc.u_max()?,
            optimizer: sc.optimizer.clone(),
            ..WitnessConfig::default()
        })
    }
}

fn flatten(value: &toml::Value, prefix: &str, out: &mut String) {
    match value {
        toml::Value::Table(t) => {
            for (k, v) in t {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(v, &key, out);
            }
        }
        leaf => {
            out.push_str(prefix);
            out.push_str(" = ");
            out.push_str(&leaf.to_string());
            out.push('\n');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_reference_setup() {
        let cfg = ScenarioConfig::parse("").unwrap();
        assert_eq!(cfg, ScenarioConfig::default());
        let sc = cfg.scenario(0).unwrap();
        assert_eq!(sc, Scenario::reference());
    }

    #[test]
    fn negative_bandwidth_names_field() {
        let err = ScenarioConfig::parse("plan.bandwidth_hz = -1.0").unwrap_err();
        assert_eq!(err.code(), "E_CONFIG_FIELD");
        assert!(err.to_string().contains("bandwidth"), "{err}");
    }

    #[test]
    fn round_trip_through_dotted_keys() {
        let mut cfg = ScenarioConfig::default();
        cfg.users.count = 7;
        cfg.mapping.n_lines = Some(4);
        cfg.evaluation.schemes = vec!["bh_squint:maxch:equal".parse().unwrap()];
        cfg.plan.bandwidth_hz = 0.1 + 0.2;
        let text = cfg.to_toml();
        assert!(text.lines().all(|l| !l.starts_with('[')), "{text}");
        assert!(text.contains("users.count = 7"));
        assert_eq!(ScenarioConfig::parse(&text).unwrap(), cfg);
    }

    #[test]
    fn unknown_key_and_syntax_errors() {
        let e = ScenarioConfig::parse("plan.centre_hz = 1.0").unwrap_err();
        assert_eq!(e.code(), "E_CONFIG_PARSE");
        assert!(e.to_string().contains("centre_hz"));
        let e = ScenarioConfig::parse("users.count = 3\nplan.subcarriers = = 2").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
    }

    #[test]
    fn bad_scheme_and_zero_users() {
        let e = ScenarioConfig::parse("evaluation.schemes = [\"rainbow:greedy\"]").unwrap_err();
        assert!(e.to_string().contains("rainbow:greedy"), "{e}");
        let e = ScenarioConfig::parse("users.count = 0").unwrap_err();
        assert!(e.to_string().contains("users.count"));
    }
}
