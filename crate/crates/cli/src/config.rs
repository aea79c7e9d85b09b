//! Experiment configuration, stored as TOML.

use std::fmt;
use std::path::PathBuf;

use falconer_core::{CantorSpec, Weight};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Cantor,
    Regularity,
    Energy,
    Spherical,
    Solid,
    Stationary,
    Mattila,
    Distance,
    Thresholds,
    FullReport,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 10] = [
        ExperimentKind::Cantor,
        ExperimentKind::Regularity,
        ExperimentKind::Energy,
        ExperimentKind::Spherical,
        ExperimentKind::Solid,
        ExperimentKind::Stationary,
        ExperimentKind::Mattila,
        ExperimentKind::Distance,
        ExperimentKind::Thresholds,
        ExperimentKind::FullReport,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Cantor => "cantor",
            ExperimentKind::Regularity => "regularity",
            ExperimentKind::Energy => "energy",
            ExperimentKind::Spherical => "spherical",
            ExperimentKind::Solid => "solid",
            ExperimentKind::Stationary => "stationary",
            ExperimentKind::Mattila => "mattila",
            ExperimentKind::Distance => "distance",
            ExperimentKind::Thresholds => "thresholds",
            ExperimentKind::FullReport => "full-report",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `count` geometrically spaced points from `lo` to `hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Sweep {
    pub fn points(&self) -> Vec<f64> {
        falconer_core::fit::geometric_sweep(self.lo, self.hi, self.count)
    }

    fn validate(&self, field: &'static str) -> Result<(), CliError> {
        if self.count < 3 {
            return Err(CliError::invalid(
                field,
                format!("needs at least 3 points, got {}", self.count),
            ));
        }
        if !(self.lo > 0.0 && self.hi > self.lo && self.hi.is_finite()) {
            return Err(CliError::invalid(
                field,
                format!(
                    "range [{}, {}] must be increasing and positive",
                    self.lo, self.hi
                ),
            ));
        }
        Ok(())
    }
}

/// Sphere quadrature; Monte Carlo seeds come from the experiment seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum QuadratureConfig {
    UniformAngle,
    MonteCarlo { samples: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegularityConfig {
    /// Largest acceptable regularity constant.
    pub cap: f64,
}

impl Default for RegularityConfig {
    fn default() -> Self {
        RegularityConfig { cap: 4.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StationaryConfig {
    /// Gap vectors `x - y`.
    pub gaps: Vec<[f64; 2]>,
    /// `t |gap|` range; t values are nudged so `t |gap|` is an integer.
    pub sweep: Sweep,
}

impl Default for StationaryConfig {
    fn default() -> Self {
        let gaps = [15.0f64, 30.0, 45.0, 60.0, 75.0, 0.0]
            .iter()
            .map(|deg| {
                let (s, c) = deg.to_radians().sin_cos();
                [c, s]
            })
            .collect();
        StationaryConfig {
            gaps,
            sweep: Sweep {
                lo: 1e2,
                hi: 1e4,
                count: 13,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MattilaConfig {
    /// Truncation `T`; defaults to the validity cap, at most `3^5`.
    pub t_max: Option<f64>,
    pub points_per_octave: usize,
}

impl Default for MattilaConfig {
    fn default() -> Self {
        MattilaConfig {
            t_max: None,
            points_per_octave: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistanceConfig {
    /// Factors are rebuilt at no more than this level before the pair loop.
    pub max_level: u32,
    pub bin_width: f64,
    pub pair_budget: u64,
    /// Coordinate whose gap weights the weighted distance measure.
    pub axis: usize,
    pub coverage_widths: Vec<f64>,
    /// Riesz exponents for the energy integral.
    pub energy_exponents: Vec<f64>,
}

impl Default for DistanceConfig {
    fn default() -> Self {
        DistanceConfig {
            max_level: 6,
            bin_width: 1.0 / 512.0,
            pair_budget: falconer_core::geometry::DEFAULT_PAIR_BUDGET,
            axis: 1,
            coverage_widths: vec![1.0 / 256.0, 1.0 / 64.0, 1.0 / 16.0],
            energy_exponents: vec![0.5, 1.0, 1.25],
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdConfig {
    /// Declared dimensions as decimals or fractions (`"2/3"`); defaults to
    /// the factor dimension hints.
    pub dims: Vec<String>,
    /// Regularity constant for the equal-dimension criterion; measured
    /// from the first factor when absent.
    pub c_nu: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    /// Output directory; never part of the config hash.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default = "default_factors")]
    pub factors: Vec<CantorSpec>,
    #[serde(default = "default_gamma0")]
    pub gamma0: f64,
    #[serde(default = "default_dz_k")]
    pub dz_k: f64,
    #[serde(default = "default_cutoff_scale")]
    pub cutoff_scale: f64,
    #[serde(default = "default_weight")]
    pub weight: Weight,
    /// Defaults to uniform angles for d = 2 and 20000 Monte Carlo samples above.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<QuadratureConfig>,
    /// Frequencies for the Fourier experiments; capped per measure when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_sweep: Option<Sweep>,
    /// Energy scales; dyadic from `4 delta` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_sweep: Option<Sweep>,
    #[serde(default)]
    pub regularity: RegularityConfig,
    #[serde(default)]
    pub stationary: StationaryConfig,
    #[serde(default)]
    pub mattila: MattilaConfig,
    #[serde(default)]
    pub distance: DistanceConfig,
    #[serde(default)]
    pub thresholds: ThresholdConfig,
}

fn default_parallelism() -> usize {
    1
}

fn default_factors() -> Vec<CantorSpec> {
    vec![CantorSpec::middle_thirds(8), CantorSpec::middle_thirds(8)]
}

fn default_gamma0() -> f64 {
    0.1
}

fn default_dz_k() -> f64 {
    falconer_core::energy::DEFAULT_DZ_K
}

fn default_cutoff_scale() -> f64 {
    2.0
}

fn default_weight() -> Weight {
    Weight::SinTheta
}

pub const DEFAULT_MONTE_CARLO_SAMPLES: usize = 20_000;

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            kind,
            seed: Some(0),
            parallelism: default_parallelism(),
            output: None,
            factors: default_factors(),
            gamma0: default_gamma0(),
            dz_k: default_dz_k(),
            cutoff_scale: default_cutoff_scale(),
            weight: default_weight(),
            quadrature: None,
            t_sweep: None,
            r_sweep: None,
            regularity: RegularityConfig::default(),
            stationary: StationaryConfig::default(),
            mattila: MattilaConfig::default(),
            distance: DistanceConfig::default(),
            thresholds: ThresholdConfig::default(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the serialized config without the output directory and
    /// worker count, neither of which can change an artifact.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output = None;
        canonical.parallelism = default_parallelism();
        hex::encode(Sha256::digest(canonical.to_toml().as_bytes()))
    }

    pub fn dimension(&self) -> usize {
        self.factors.len()
    }

    pub fn quadrature(&self) -> QuadratureConfig {
        self.quadrature.unwrap_or(if self.dimension() == 2 {
            QuadratureConfig::UniformAngle
        } else {
            QuadratureConfig::MonteCarlo {
                samples: DEFAULT_MONTE_CARLO_SAMPLES,
            }
        })
    }

    fn uses_sphere(&self) -> bool {
        matches!(
            self.kind,
            ExperimentKind::Spherical | ExperimentKind::Mattila | ExperimentKind::FullReport
        )
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.parallelism == 0 {
            return Err(CliError::invalid("parallelism", "must be at least 1"));
        }
        if self.factors.is_empty() {
            return Err(CliError::invalid(
                "factors",
                "at least one factor is required",
            ));
        }
        for f in &self.factors {
            f.validate()?;
        }
        let needs_product = self.uses_sphere() || self.kind == ExperimentKind::Distance;
        if needs_product && self.factors.len() < 2 {
            return Err(CliError::invalid(
                "factors",
                format!("{} needs a product of at least 2 factors", self.kind),
            ));
        }
        if !(self.gamma0 > 0.0 && self.gamma0 < 0.5) {
            return Err(CliError::invalid(
                "gamma0",
                format!("{} outside (0, 1/2)", self.gamma0),
            ));
        }
        if !(self.dz_k > 0.0 && self.dz_k.is_finite()) {
            return Err(CliError::invalid(
                "dz_k",
                format!("{} must be positive", self.dz_k),
            ));
        }
        if !(self.cutoff_scale > 1.0 && self.cutoff_scale.is_finite()) {
            return Err(CliError::invalid(
                "cutoff_scale",
                format!("{} must exceed 1", self.cutoff_scale),
            ));
        }
        if let Some(s) = &self.t_sweep {
            s.validate("t_sweep")?;
        }
        if let Some(s) = &self.r_sweep {
            s.validate("r_sweep")?;
        }
        self.stationary.sweep.validate("stationary.sweep")?;
        if self.mattila.points_per_octave == 0 {
            return Err(CliError::invalid(
                "mattila.points_per_octave",
                "must be positive",
            ));
        }
        if let QuadratureConfig::MonteCarlo { samples } = self.quadrature() {
            if samples < 2 {
                return Err(CliError::invalid(
                    "quadrature.samples",
                    "needs at least 2 samples",
                ));
            }
            if self.uses_sphere() && self.seed.is_none() {
                return Err(CliError::invalid(
                    "seed",
                    "required when Monte Carlo quadrature is used",
                ));
            }
        }
        if self.quadrature() == QuadratureConfig::UniformAngle
            && self.uses_sphere()
            && self.dimension() != 2
        {
            return Err(CliError::invalid(
                "quadrature",
                "uniform_angle needs exactly 2 factors",
            ));
        }
        if self.distance.axis >= self.dimension() && self.kind == ExperimentKind::Distance {
            return Err(CliError::invalid(
                "distance.axis",
                format!(
                    "axis {} out of range for d = {}",
                    self.distance.axis,
                    self.dimension()
                ),
            ));
        }
        if self.regularity.cap <= 0.0 {
            return Err(CliError::invalid("regularity.cap", "must be positive"));
        }
        Ok(())
    }
}
