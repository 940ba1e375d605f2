//! JSON configuration of scenarios, sweeps and designs.
//!
//! Every field has a default, so `{}` is the reference configuration. Keys
//! can be overridden from the command line with dotted paths
//! (`sweep.trials=50`).

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{Vector2, Vector3};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use wgms_core::channel::{random_dft_combiner, RxArray, Scenario, Target};
use wgms_core::designer::{
    DesignOptions, ExtractionMode, LambdaStructure, ModelChoice, P1Options, TraceBudget, DEFAULT_SAMPLE_DRAWS,
};
use wgms_core::em::{OperatingPoint, PanelGeometry};

use crate::placement::PlacementSpec;
use crate::seeds::{Purpose, TrialSeeds};
use crate::{HarnessError, Result};

/// `10^((dBm - 30) / 10)` watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub scenario: ScenarioConfig,
    pub sweep: SweepConfig,
    pub design: DesignConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub frequency_hz: f64,
    pub panel: PanelConfig,
    /// `Gamma_n / w0`, the same for every element.
    pub damping_ratio: f64,
    pub targets: Vec<[f64; 3]>,
    /// Reflection magnitude; phases are drawn uniformly per trial.
    pub reflection_magnitude: f64,
    pub receiver: ReceiverConfig,
    pub noise_power_dbm: f64,
    pub tx_power_dbm: f64,
    pub pilots: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PanelConfig {
    pub width_m: f64,
    pub depth_m: f64,
    pub height_wavelengths: f64,
    /// Feed offset from the aperture center.
    pub feed_m: [f64; 2],
    pub min_spacing_wavelengths: f64,
    /// Radius around the feed kept free of elements.
    pub feed_exclusion_wavelengths: f64,
    /// Rejection-sampling budget per layout.
    pub max_attempts: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Combiner {
    /// Columns of the DFT codebook in a per-trial random order.
    RandomDft,
    /// Columns in natural order.
    Dft,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReceiverConfig {
    pub center_m: [f64; 3],
    pub rows: usize,
    pub cols: usize,
    pub row_axis: [f64; 3],
    pub col_axis: [f64; 3],
    pub combiner: Combiner,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PlacementKind {
    Random,
    UniformGrid,
    GaussianCluster { variance_m2: f64 },
}

impl fmt::Display for PlacementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlacementKind::Random => write!(f, "random"),
            PlacementKind::UniformGrid => write!(f, "uniform-grid"),
            PlacementKind::GaussianCluster { variance_m2 } => write!(f, "gaussian-cluster:{variance_m2}"),
        }
    }
}

impl FromStr for PlacementKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(PlacementKind::Random),
            "uniform-grid" => Ok(PlacementKind::UniformGrid),
            _ => s
                .strip_prefix("gaussian-cluster:")
                .and_then(|v| v.parse().ok())
                .map(|variance_m2| PlacementKind::GaussianCluster { variance_m2 })
                .ok_or_else(|| HarnessError::config(format!("unknown placement '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Baselines {
    pub fully_digital: bool,
    pub random_strength: bool,
}

impl Default for Baselines {
    fn default() -> Self {
        Self { fully_digital: true, random_strength: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub elements: Vec<usize>,
    pub placements: Vec<PlacementKind>,
    pub trials: usize,
    pub baselines: Baselines,
    /// Wall time makes the CSV run-dependent, so it is off by default.
    pub record_wall_time: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Extraction {
    RankOne,
    Sample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Lambda {
    Diagonal,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Budget {
    Achievable,
    PassivityLimit,
    Absolute(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Retraction {
    Auto,
    Neumann,
    LocalField,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesignConfig {
    pub lambda: Lambda,
    pub extraction: Extraction,
    pub sample_draws: usize,
    pub budget: Budget,
    pub retraction: Retraction,
    pub sdp_tolerance: f64,
    pub sdp_max_iterations: usize,
    /// Per-iteration solver log on stderr.
    pub verbose: bool,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 20_240_601,
            scenario: ScenarioConfig::default(),
            sweep: SweepConfig::default(),
            design: DesignConfig::default(),
        }
    }
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            frequency_hz: 20e9,
            panel: PanelConfig::default(),
            damping_ratio: 0.01,
            targets: vec![[5.4, 5.3, 4.0], [7.1, 3.5, 5.25]],
            reflection_magnitude: 1.0,
            receiver: ReceiverConfig::default(),
            noise_power_dbm: -80.0,
            tx_power_dbm: 1.0,
            pilots: 100,
        }
    }
}

impl Default for PanelConfig {
    fn default() -> Self {
        Self {
            width_m: 0.5,
            depth_m: 0.5,
            height_wavelengths: 0.2,
            feed_m: [0.0, 0.0],
            min_spacing_wavelengths: 0.25,
            feed_exclusion_wavelengths: 0.25,
            max_attempts: 100_000,
        }
    }
}

impl Default for ReceiverConfig {
    fn default() -> Self {
        Self {
            center_m: [10.0, 5.0, 5.0],
            rows: 4,
            cols: 4,
            row_axis: [0.0, 0.0, 1.0],
            col_axis: [0.0, 1.0, 0.0],
            combiner: Combiner::RandomDft,
        }
    }
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            elements: vec![16, 64, 256, 512],
            placements: vec![
                PlacementKind::Random,
                PlacementKind::UniformGrid,
                PlacementKind::GaussianCluster { variance_m2: 0.05 },
                PlacementKind::GaussianCluster { variance_m2: 0.25 },
            ],
            trials: 500,
            baselines: Baselines::default(),
            record_wall_time: false,
        }
    }
}

impl Default for DesignConfig {
    fn default() -> Self {
        Self {
            lambda: Lambda::Diagonal,
            // best of several draws; the library default is rank-one
            extraction: Extraction::Sample,
            sample_draws: DEFAULT_SAMPLE_DRAWS,
            budget: Budget::Achievable,
            retraction: Retraction::Auto,
            sdp_tolerance: 1e-8,
            sdp_max_iterations: 100,
            verbose: false,
        }
    }
}

fn vec3(a: [f64; 3]) -> Vector3<f64> {
    Vector3::new(a[0], a[1], a[2])
}

/// Sets `path` (dot separated) in a JSON tree, creating objects on the way.
/// The value is parsed as JSON when possible and kept as a string otherwise.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| HarnessError::config(format!("override '{assignment}' is not of the form key=value")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(HarnessError::config(format!("empty key in override '{assignment}'")));
    }
    for key in &keys[..keys.len() - 1] {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| HarnessError::config(format!("'{path}' descends into a non-object")))?;
        node = obj.entry(key.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    node.as_object_mut()
        .ok_or_else(|| HarnessError::config(format!("'{path}' descends into a non-object")))?
        .insert(keys[keys.len() - 1].to_string(), value);
    Ok(())
}

impl Config {
    /// Parses JSON text and applies `key=value` overrides before validation.
    pub fn from_json(text: &str, overrides: &[String]) -> Result<Self> {
        let mut root: Value = serde_json::from_str(text).map_err(|e| HarnessError::config(format!("invalid JSON: {e}")))?;
        if !root.is_object() {
            return Err(HarnessError::config("configuration must be a JSON object"));
        }
        for o in overrides {
            apply_override(&mut root, o)?;
        }
        let config: Config = serde_json::from_value(root).map_err(|e| HarnessError::config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_json(&text, overrides).map_err(|e| match e {
            HarnessError::Config(msg) => HarnessError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        let s = &self.scenario;
        let p = &s.panel;
        let positive = [
            ("scenario.frequency_hz", s.frequency_hz),
            ("scenario.damping_ratio", s.damping_ratio),
            ("scenario.reflection_magnitude", s.reflection_magnitude),
            ("scenario.panel.width_m", p.width_m),
            ("scenario.panel.depth_m", p.depth_m),
            ("scenario.panel.height_wavelengths", p.height_wavelengths),
            ("design.sdp_tolerance", self.design.sdp_tolerance),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        for (name, v) in [
            ("scenario.panel.min_spacing_wavelengths", p.min_spacing_wavelengths),
            ("scenario.panel.feed_exclusion_wavelengths", p.feed_exclusion_wavelengths),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be non-negative, got {v}"));
            }
        }
        if !(s.noise_power_dbm.is_finite() && s.tx_power_dbm.is_finite()) {
            return bad("powers must be finite".into());
        }
        if p.feed_m[0].abs() > p.width_m / 2.0 || p.feed_m[1].abs() > p.depth_m / 2.0 {
            return bad("scenario.panel.feed_m lies outside the aperture".into());
        }
        if p.max_attempts == 0 {
            return bad("scenario.panel.max_attempts must be at least 1".into());
        }
        if s.targets.is_empty() {
            return bad("scenario.targets is empty".into());
        }
        if s.targets.iter().flatten().any(|v| !v.is_finite()) {
            return bad("scenario.targets must be finite".into());
        }
        if s.pilots == 0 {
            return bad("scenario.pilots must be at least 1".into());
        }
        if s.receiver.rows == 0 || s.receiver.cols == 0 {
            return bad("scenario.receiver needs at least one row and one column".into());
        }
        let sw = &self.sweep;
        if sw.trials == 0 {
            return bad("sweep.trials must be at least 1".into());
        }
        if sw.elements.is_empty() || sw.elements.contains(&0) {
            return bad("sweep.elements must list positive element counts".into());
        }
        if sw.placements.is_empty() {
            return bad("sweep.placements is empty".into());
        }
        for kind in &sw.placements {
            if let PlacementKind::GaussianCluster { variance_m2 } = kind {
                if !(variance_m2.is_finite() && *variance_m2 > 0.0) {
                    return bad(format!("gaussian variance must be positive, got {variance_m2}"));
                }
            }
        }
        if self.design.sample_draws == 0 {
            return bad("design.sample_draws must be at least 1".into());
        }
        if let Budget::Absolute(v) = self.design.budget {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("design.budget must be positive, got {v}"));
            }
        }
        self.operating_point()?;
        self.receiver(0)?;
        Ok(())
    }

    pub fn operating_point(&self) -> Result<OperatingPoint<f64>> {
        OperatingPoint::new(self.scenario.frequency_hz).map_err(|e| HarnessError::config(e.to_string()))
    }

    pub fn wavelength(&self) -> f64 {
        self.operating_point().map_or(f64::NAN, |op| op.wavelength)
    }

    /// Placement request for `n` elements on the configured aperture.
    pub fn placement_spec(&self, kind: PlacementKind, n: usize, seed: u64) -> PlacementSpec {
        let p = &self.scenario.panel;
        let lam = self.wavelength();
        PlacementSpec {
            kind,
            elements: n,
            width: p.width_m,
            depth: p.depth_m,
            height: p.height_wavelengths * lam,
            min_spacing: p.min_spacing_wavelengths * lam,
            feed: Vector2::new(p.feed_m[0], p.feed_m[1]),
            feed_exclusion: p.feed_exclusion_wavelengths * lam,
            max_attempts: p.max_attempts,
            seed,
        }
    }

    pub fn panel(&self, elements: Vec<Vector2<f64>>) -> Result<PanelGeometry<f64>> {
        let p = &self.scenario.panel;
        let lam = self.wavelength();
        Ok(PanelGeometry::new(
            p.width_m,
            p.depth_m,
            p.height_wavelengths * lam,
            elements,
            Vector2::new(p.feed_m[0], p.feed_m[1]),
            p.min_spacing_wavelengths * lam,
        )?)
    }

    pub fn receiver(&self, seed: u64) -> Result<RxArray<f64>> {
        let r = &self.scenario.receiver;
        let rx = RxArray::uniform_planar(vec3(r.center_m), r.rows, r.cols, self.wavelength(), vec3(r.row_axis), vec3(r.col_axis))
            .map_err(|e| HarnessError::config(format!("scenario.receiver: {e}")))?;
        Ok(match r.combiner {
            Combiner::RandomDft => rx.with_combiner(random_dft_combiner(r.rows * r.cols, seed))?,
            Combiner::Dft => rx,
        })
    }

    /// Targets with reflection phases drawn from `seed`.
    pub fn targets(&self, seed: u64) -> Result<Vec<Target<f64>>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mag = self.scenario.reflection_magnitude;
        self.scenario
            .targets
            .iter()
            .map(|p| {
                let phase = rng.random_range(0.0..std::f64::consts::TAU);
                Ok(Target::new(vec3(*p), Complex::from_polar(mag, phase))?)
            })
            .collect()
    }

    /// Scenario of one trial on a given layout.
    pub fn scenario(&self, panel: PanelGeometry<f64>, seeds: &TrialSeeds) -> Result<Scenario<f64>> {
        let op = self.operating_point()?;
        let s = &self.scenario;
        let scenario = Scenario {
            damping: vec![s.damping_ratio * op.omega; panel.len()],
            op,
            panel,
            targets: self.targets(seeds.get(Purpose::Reflection))?,
            rx: self.receiver(seeds.get(Purpose::Combiner))?,
            noise_variance: dbm_to_watts(s.noise_power_dbm),
            pilots: s.pilots,
            pilot_power: dbm_to_watts(s.tx_power_dbm),
        };
        scenario.validate()?;
        Ok(scenario)
    }

    /// Designer options for one trial.
    pub fn design_options(&self, seed: u64) -> DesignOptions {
        let d = &self.design;
        let mut p1 = P1Options {
            structure: match d.lambda {
                Lambda::Diagonal => LambdaStructure::Diagonal,
                Lambda::Full => LambdaStructure::Full,
            },
            ..Default::default()
        };
        p1.sdp.tolerance = d.sdp_tolerance;
        p1.sdp.max_iterations = d.sdp_max_iterations;
        p1.sdp.verbose = d.verbose;
        DesignOptions {
            p1,
            extraction: match d.extraction {
                Extraction::RankOne => ExtractionMode::RankOne,
                Extraction::Sample => ExtractionMode::Sample,
            },
            sample_draws: d.sample_draws,
            seed,
            budget: match d.budget {
                Budget::Achievable => TraceBudget::Achievable,
                Budget::PassivityLimit => TraceBudget::PassivityLimit,
                Budget::Absolute(v) => TraceBudget::Absolute(v),
            },
            model: match d.retraction {
                Retraction::Auto => ModelChoice::Auto,
                Retraction::Neumann => ModelChoice::Neumann,
                Retraction::LocalField => ModelChoice::LocalField,
            },
            ..Default::default()
        }
    }
}
