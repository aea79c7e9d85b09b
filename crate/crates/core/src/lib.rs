//! Desk-scale numerics for the Falconer distance problem on Cartesian
//! products `A_1 x ... x A_d`.
//!
//! * [`measures`] builds discretized Cantor measures, their products, and
//!   audits Frostman / Ahlfors-David regularity.
//! * [`energy`] computes additive energy at scale `r`, by quadruple
//!   enumeration and through the sumset distribution, and the
//!   Dyatlov-Zahl exponent gain.
//! * [`fourier`] evaluates transforms, spherical and solid averages of
//!   `|mu^|^2`, the stationary-phase expansion of the `|sin theta|`-weighted
//!   circle integral, and the angular decomposition behind the energy bound.
//! * [`geometry`] covers distance measures, truncated Mattila integrals,
//!   Riesz energies and the dimension thresholds.
//!
//! All quantities are finite sums or converged quadratures; reductions run
//! in a fixed order so repeated runs are bitwise identical.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

/// Version string recorded in experiment manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod energy;
pub mod error;
pub mod fit;
pub mod fourier;
pub mod geometry;
pub mod measures;
pub mod quadrature;

pub use energy::{
    additive_energy, dz_beta, energy_profile, smoothed_energy, sumset_autocorrelation, DzParams,
    EnergyAlgorithm, EnergyProfile, SmoothedEnergy, SumsetDistribution,
};
pub use error::{Error, Result};
pub use fit::{loglog_fit, LoglogFit};
pub use fourier::{
    angular_decomposition, measure_ft, product_ft, solid_average, spherical_average,
    spherical_series, stationary_phase_check, AngularDecomposition, CutoffFunction,
    SphereQuadrature, SphericalAverageSeries, SphericalSample, StationaryPhaseReport, Weight,
};
pub use geometry::{
    coverage_report, derive_delta, distance_measure, energy_integral, mattila_truncated,
    threshold_report, weighted_mass, CoverageReport, DeltaDerivation, Dimension, DistanceMeasure,
    MattilaEstimate, PairWeight, ThresholdInputs, ThresholdReport,
};
pub use measures::{
    build_cantor, build_product, check_regularity, frostman_fit, AtomicMeasure, CantorSpec,
    GridMeasure, ProductMeasure, RegularityReport,
};
