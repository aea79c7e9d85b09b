//! Distance measures, truncated Mattila integrals, Riesz energies, coverage
//! proxies for the distance set, and the dimension thresholds for product
//! sets.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::dz_beta;
use crate::error::{Error, Result};
use crate::fit::loglog_fit;
use crate::fourier::{spherical_average, validity_cap, SphereQuadrature, Weight};
use crate::measures::{AtomicMeasure, ProductMeasure};

/// Default cap on ordered atom pairs visited by [`distance_measure`].
pub const DEFAULT_PAIR_BUDGET: u64 = 50_000_000;

/// Per-pair factor applied when binning distances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairWeight {
    Unweighted,
    /// `|x_k - y_k| / |x - y|` for the given coordinate `k`; coincident
    /// pairs get weight zero.
    Axis(usize),
}

/// Histogram of `|x - y|` under `mu x mu`, optionally weighted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMeasure {
    pub bin_width: f64,
    /// `(floor(|x - y| / h), mass)`, sorted by bin.
    pub bins: Vec<(u64, f64)>,
    pub weight: PairWeight,
    pub total_mass: f64,
    /// Mass of pairs with `x = y`, reported whether or not it was binned.
    pub diagonal_mass: f64,
}

impl DistanceMeasure {
    pub fn is_weighted(&self) -> bool {
        self.weight != PairWeight::Unweighted
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("bin_index,bin_left,mass\n");
        for &(k, m) in &self.bins {
            writeln!(s, "{k},{:?},{m:?}", k as f64 * self.bin_width).unwrap();
        }
        writeln!(s, "# bin_width={:?}", self.bin_width).unwrap();
        let weight = match self.weight {
            PairWeight::Unweighted => "none".to_string(),
            PairWeight::Axis(k) => format!("axis{k}"),
        };
        writeln!(s, "# weight={weight}").unwrap();
        writeln!(s, "# total_mass={:?}", self.total_mass).unwrap();
        writeln!(s, "# diagonal_mass={:?}", self.diagonal_mass).unwrap();
        s
    }
}

/// Bins every ordered pair of atoms by distance. Visits `N^2` pairs, so
/// the atom count is checked against `pair_budget` first.
pub fn distance_measure(
    mu: &ProductMeasure,
    h: f64,
    weight: PairWeight,
    pair_budget: u64,
) -> Result<DistanceMeasure> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::invalid(
            "h",
            format!("bin width {h} must be positive"),
        ));
    }
    if let PairWeight::Axis(k) = weight {
        if k >= mu.dimension() {
            return Err(Error::invalid(
                "weight",
                format!("axis {k} out of range for d = {}", mu.dimension()),
            ));
        }
    }
    let n = mu.atom_count() as u64;
    let pairs = n.saturating_mul(n);
    if pairs > pair_budget {
        return Err(Error::Budget(format!(
            "{pairs} atom pairs exceed the budget of {pair_budget}; coarsen the factor levels"
        )));
    }
    let pc = mu.point_cloud();
    let d = pc.dim;
    let max_bin = ((d as f64).sqrt() / h).ceil() as usize + 1;
    let mut dense = if max_bin <= 1 << 24 {
        Some(vec![0.0f64; max_bin + 1])
    } else {
        None
    };
    let mut sparse: BTreeMap<u64, f64> = BTreeMap::new();
    let mut diagonal = 0.0;
    for i in 0..pc.len() {
        let x = pc.point(i);
        let wx = pc.weights[i];
        for j in 0..pc.len() {
            let y = pc.point(j);
            let mass = wx * pc.weights[j];
            let dist = x
                .iter()
                .zip(y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if i == j {
                diagonal += mass;
            }
            let factor = match weight {
                PairWeight::Unweighted => 1.0,
                PairWeight::Axis(k) => {
                    if dist == 0.0 {
                        0.0
                    } else {
                        (x[k] - y[k]).abs() / dist
                    }
                }
            };
            let bin = (dist / h).floor() as u64;
            match dense.as_mut() {
                Some(v) => v[bin as usize] += mass * factor,
                None => *sparse.entry(bin).or_insert(0.0) += mass * factor,
            }
        }
    }
    let bins: Vec<(u64, f64)> = match dense {
        // a bin touched only by zero-weight pairs carries no mass and is dropped
        Some(v) => v
            .into_iter()
            .enumerate()
            .filter(|b| b.1 > 0.0)
            .map(|(k, m)| (k as u64, m))
            .collect(),
        None => sparse.into_iter().filter(|b| b.1 > 0.0).collect(),
    };
    let total_mass = bins.iter().map(|b| b.1).sum();
    Ok(DistanceMeasure {
        bin_width: h,
        bins,
        weight,
        total_mass,
        diagonal_mass: diagonal,
    })
}

/// `sum_{x, y} w_x w_y |x_k - y_k| / |x - y|`, the mass of the
/// axis-weighted distance measure; zero exactly when coordinate `k` is
/// degenerate.
pub fn weighted_mass(mu: &ProductMeasure, axis: usize) -> Result<f64> {
    if axis >= mu.dimension() {
        return Err(Error::invalid(
            "axis",
            format!("axis {axis} out of range for d = {}", mu.dimension()),
        ));
    }
    let pc = mu.point_cloud();
    let mut total = 0.0;
    for i in 0..pc.len() {
        let x = pc.point(i);
        for j in 0..pc.len() {
            if i == j {
                continue;
            }
            let y = pc.point(j);
            let dist = x
                .iter()
                .zip(y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if dist > 0.0 {
                total += pc.weights[i] * pc.weights[j] * (x[axis] - y[axis]).abs() / dist;
            }
        }
    }
    Ok(total)
}

/// `I_s(mu) = sum_{x != y} w_x w_y |x - y|^{-s}`. The diagonal is excluded:
/// on atoms it would be infinite for every `s > 0`.
pub fn energy_integral<M: AtomicMeasure + ?Sized>(mu: &M, s: f64) -> Result<f64> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::invalid("s", format!("{s} must be nonnegative")));
    }
    let pc = mu.point_cloud();
    let mut total = 0.0;
    for i in 0..pc.len() {
        let x = pc.point(i);
        for j in 0..pc.len() {
            if i == j {
                continue;
            }
            let dist = x
                .iter()
                .zip(pc.point(j))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            total += pc.weights[i] * pc.weights[j] * dist.powf(-s);
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MattilaSample {
    pub t: f64,
    pub sigma_w: f64,
    /// `sigma_w(t)^2 t^{d-1}`.
    pub integrand: f64,
    /// Integral from 1 up to this `t`.
    pub partial_value: f64,
}

/// `int_1^T sigma_w(t)^2 t^{d-1} dt` on a geometric grid, with convergence
/// diagnostics. Convergence is never asserted: the integrand slope (below
/// -1 when convergent) and the doubling ratios are reported instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MattilaEstimate {
    pub t_max: f64,
    pub value: f64,
    pub weight: Weight,
    pub samples: Vec<MattilaSample>,
    pub integrand_slope: Option<f64>,
    /// `value(2^{k+1}) / value(2^k)` for `k >= 1` while `2^{k+1} <= T`.
    pub doubling_ratios: Vec<f64>,
}

impl MattilaEstimate {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,sigma_w,integrand,partial_value\n");
        for p in &self.samples {
            writeln!(
                s,
                "{:?},{:?},{:?},{:?}",
                p.t, p.sigma_w, p.integrand, p.partial_value
            )
            .unwrap();
        }
        writeln!(s, "# weight={}", self.weight.name()).unwrap();
        writeln!(s, "# value={:?}", self.value).unwrap();
        match self.integrand_slope {
            Some(v) => writeln!(s, "# integrand_slope={v:?}").unwrap(),
            None => writeln!(s, "# integrand_slope=none").unwrap(),
        }
        let ratios: Vec<String> = self
            .doubling_ratios
            .iter()
            .map(|r| format!("{r:?}"))
            .collect();
        writeln!(s, "# doubling_ratios={}", ratios.join(";")).unwrap();
        s
    }
}

/// Exact integral of the power law through `(t0, f0)` and `(t1, f1)`.
fn power_law_segment(t0: f64, f0: f64, t1: f64, f1: f64) -> f64 {
    if f0 <= 0.0 || f1 <= 0.0 {
        return 0.5 * (f0 + f1) * (t1 - t0);
    }
    let ratio = t1 / t0;
    let p = (f1 / f0).ln() / ratio.ln();
    if (p + 1.0).abs() < 1e-12 {
        f0 * t0 * ratio.ln()
    } else {
        f0 * t0 / (p + 1.0) * (ratio.powf(p + 1.0) - 1.0)
    }
}

pub fn mattila_truncated(
    mu: &ProductMeasure,
    t_max: f64,
    weight: Weight,
    quadrature: &SphereQuadrature,
    points_per_octave: usize,
) -> Result<MattilaEstimate> {
    let cap = validity_cap(mu);
    if !(t_max >= 1.0 && t_max <= cap * (1.0 + 1e-12)) {
        return Err(Error::invalid(
            "t_max",
            format!("{t_max} outside [1, {cap}] (validity cap of the coarsest factor grid)"),
        ));
    }
    if points_per_octave == 0 {
        return Err(Error::invalid("points_per_octave", "must be positive"));
    }
    let m = points_per_octave as f64;
    let mut grid = Vec::new();
    let mut j = 0u32;
    loop {
        let t = 2f64.powf(j as f64 / m);
        if t >= t_max * (1.0 - 1e-12) {
            break;
        }
        grid.push(t);
        j += 1;
    }
    grid.push(t_max);
    let d = mu.dimension() as i32;
    let sigmas = grid
        .par_iter()
        .map(|&t| spherical_average(mu, t, weight, quadrature).map(|s| s.sigma))
        .collect::<Result<Vec<_>>>()?;
    let mut samples = Vec::with_capacity(grid.len());
    let mut partial = 0.0;
    for (k, (&t, &sigma)) in grid.iter().zip(&sigmas).enumerate() {
        let integrand = sigma * sigma * t.powi(d - 1);
        if k > 0 {
            let prev: &MattilaSample = &samples[k - 1];
            partial += power_law_segment(prev.t, prev.integrand, t, integrand);
        }
        samples.push(MattilaSample {
            t,
            sigma_w: sigma,
            integrand,
            partial_value: partial,
        });
    }
    let positive: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.integrand > 0.0)
        .map(|s| (s.t, s.integrand))
        .collect();
    let integrand_slope = if positive.len() >= 3 {
        Some(loglog_fit(&positive)?.slope)
    } else {
        None
    };
    let mut doubling_ratios = Vec::new();
    let step = points_per_octave;
    let mut k = 1;
    while (k + 1) * step < samples.len() {
        let lower = samples[k * step].partial_value;
        let upper = samples[(k + 1) * step].partial_value;
        doubling_ratios.push(upper / lower);
        k += 1;
    }
    Ok(MattilaEstimate {
        t_max,
        value: partial,
        weight,
        samples,
        integrand_slope,
        doubling_ratios,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageRow {
    pub width: f64,
    /// Number of occupied bins times the width.
    pub covered_length: f64,
    /// `sum (mass / width)^2 * width`.
    pub density_l2: f64,
}

/// Re-binned views of a distance measure at several widths: a covered
/// length that stabilizes suggests a distance set of positive length, one
/// that shrinks with the width suggests a null set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub native_width: f64,
    pub rows: Vec<CoverageRow>,
}

impl CoverageReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("width,covered_length,density_l2\n");
        for r in &self.rows {
            writeln!(s, "{:?},{:?},{:?}", r.width, r.covered_length, r.density_l2).unwrap();
        }
        s
    }
}

pub fn coverage_report(dm: &DistanceMeasure, widths: &[f64]) -> Result<CoverageReport> {
    let h = dm.bin_width;
    let mut rows = Vec::with_capacity(widths.len());
    for &w in widths {
        if !(w >= h * (1.0 - 1e-9) && w.is_finite()) {
            return Err(Error::invalid(
                "widths",
                format!("width {w} is finer than the native bin width {h}"),
            ));
        }
        let mut merged: BTreeMap<u64, f64> = BTreeMap::new();
        for &(k, m) in &dm.bins {
            let idx = (k as f64 * h / w + 1e-9).floor() as u64;
            *merged.entry(idx).or_insert(0.0) += m;
        }
        let occupied = merged.values().filter(|&&m| m > 0.0).count();
        let density_l2 = merged.values().map(|m| (m / w) * (m / w) * w).sum();
        rows.push(CoverageRow {
            width: w,
            covered_length: occupied as f64 * w,
            density_l2,
        });
    }
    Ok(CoverageReport {
        native_width: h,
        rows,
    })
}

pub type Rational = Ratio<i128>;

/// A declared dimension, kept exact when given as a fraction or a
/// terminating decimal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dimension {
    Exact(Rational),
    Approx(f64),
}

impl Dimension {
    pub fn value(&self) -> f64 {
        match *self {
            Dimension::Exact(r) => *r.numer() as f64 / *r.denom() as f64,
            Dimension::Approx(v) => v,
        }
    }

    pub fn exact(&self) -> Option<Rational> {
        match *self {
            Dimension::Exact(r) => Some(r),
            Dimension::Approx(_) => None,
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dimension::Exact(r) => write!(f, "{r}"),
            Dimension::Approx(v) => write!(f, "{v:?}"),
        }
    }
}

impl FromStr for Dimension {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::invalid("dims", format!("cannot parse dimension `{s}`"));
        if let Some((p, q)) = s.split_once('/') {
            let p: i128 = p.trim().parse().map_err(|_| bad())?;
            let q: i128 = q.trim().parse().map_err(|_| bad())?;
            if q == 0 {
                return Err(bad());
            }
            return Ok(Dimension::Exact(Rational::new(p, q)));
        }
        let plain = s
            .chars()
            .all(|c| c.is_ascii_digit() || c == '.' || c == '-');
        if plain && s.matches('.').count() <= 1 && s.len() <= 30 {
            let negative = s.starts_with('-');
            let digits = s.trim_start_matches('-');
            let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
            if int.is_empty() && frac.is_empty() {
                return Err(bad());
            }
            let mut numer: i128 = 0;
            for c in int.chars().chain(frac.chars()) {
                numer = numer * 10 + c.to_digit(10).ok_or_else(bad)? as i128;
            }
            let denom = 10i128.pow(frac.len() as u32);
            let r = Rational::new(if negative { -numer } else { numer }, denom);
            return Ok(Dimension::Exact(r));
        }
        let v: f64 = s.parse().map_err(|_| bad())?;
        Ok(Dimension::Approx(v))
    }
}

/// A threshold margin; `exact` is filled when every input was rational.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Margin {
    pub value: f64,
    pub exact: Option<Rational>,
}

impl Margin {
    fn from_parts(exact: Option<Rational>, approx: f64) -> Self {
        match exact {
            Some(r) => Margin {
                value: *r.numer() as f64 / *r.denom() as f64,
                exact: Some(r),
            },
            None => Margin {
                value: approx,
                exact: None,
            },
        }
    }

    pub fn is_positive(&self) -> bool {
        match self.exact {
            Some(r) => r > Rational::from_integer(0),
            None => self.value > 0.0,
        }
    }
}

impl fmt::Display for Margin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exact {
            Some(r) => write!(f, "{r}"),
            None => write!(f, "{:?}", self.value),
        }
    }
}

/// AD-regularity data for the equal-dimension case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularInputs {
    pub alpha: f64,
    pub c_nu: f64,
    pub k: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdInputs {
    pub dims: Vec<Dimension>,
    pub regular: Option<RegularInputs>,
}

/// The three sufficient conditions for a distance set of positive length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// `s_A + s_B + max(s_A, s_B) > 2` for `A x B` in the plane.
    Imbalance,
    /// Equal dimensions `alpha > 2/3 - delta` with an AD-regular factor.
    RegularEnergy,
    /// `sum s_j > d^2 / (2d - 1)` for `A_1 x ... x A_d`.
    ProductThreshold,
}

impl Criterion {
    pub fn name(self) -> &'static str {
        match self {
            Criterion::Imbalance => "imbalance",
            Criterion::RegularEnergy => "regular_energy",
            Criterion::ProductThreshold => "product_threshold",
        }
    }
}

/// Output of [`derive_delta`]: the exponent gain obtained by balancing the
/// small-angle and Cauchy-Schwarz contributions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaDerivation {
    pub alpha: f64,
    pub beta: f64,
    /// Gain of the Cauchy-Schwarz piece, `beta / 2`.
    pub gamma: f64,
    pub gamma0: f64,
    pub delta: f64,
}

fn check_delta_inputs(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid("alpha", format!("{alpha} outside (0, 1)")));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::invalid("beta", format!("{beta} must be positive")));
    }
    Ok(())
}

/// Maximizes `min(gamma0 (1 - alpha), beta/2 - gamma0/2)` in closed form:
/// the two lines cross at `gamma0 = gamma / (3/2 - alpha)`.
pub fn derive_delta(alpha: f64, beta: f64) -> Result<DeltaDerivation> {
    check_delta_inputs(alpha, beta)?;
    let gamma = beta / 2.0;
    let gamma0 = gamma / (1.0 - alpha + 0.5);
    Ok(DeltaDerivation {
        alpha,
        beta,
        gamma,
        gamma0,
        delta: gamma0 * (1.0 - alpha),
    })
}

/// The same maximization by a grid scan of `(0, 2 gamma)` followed by a
/// ternary refinement around the best grid point.
pub fn derive_delta_by_search(
    alpha: f64,
    beta: f64,
    grid_points: usize,
) -> Result<DeltaDerivation> {
    check_delta_inputs(alpha, beta)?;
    let gamma = beta / 2.0;
    let gain = |g0: f64| (g0 * (1.0 - alpha)).min(gamma - g0 / 2.0);
    let n = grid_points.max(3);
    let step = 2.0 * gamma / n as f64;
    let best = (1..n)
        .map(|i| i as f64 * step)
        .fold((0.0, f64::NEG_INFINITY), |acc, g| {
            if gain(g) > acc.1 {
                (g, gain(g))
            } else {
                acc
            }
        });
    let (mut lo, mut hi) = ((best.0 - step).max(0.0), (best.0 + step).min(2.0 * gamma));
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if gain(m1) < gain(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let gamma0 = 0.5 * (lo + hi);
    Ok(DeltaDerivation {
        alpha,
        beta,
        gamma,
        gamma0,
        delta: gain(gamma0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularDerivation {
    pub inputs: RegularInputs,
    pub beta: f64,
    pub derivation: DeltaDerivation,
    /// `2/3 - delta`.
    pub alpha_threshold: f64,
    /// `alpha - (2/3 - delta)`.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdReport {
    pub d: usize,
    pub dims: Vec<Dimension>,
    /// `d^2 / (2d - 1)`.
    pub product_threshold: Rational,
    /// `sum s_j - d^2 / (2d - 1)`.
    pub product_margin: Margin,
    /// `s_A + s_B + max(s_A, s_B) - 2`, planar products only.
    pub imbalance_margin: Option<Margin>,
    pub regular: Option<RegularDerivation>,
    pub applicable: Vec<Criterion>,
}

impl ThresholdReport {
    /// Flat `key=value` block.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "d={}", self.d).unwrap();
        let dims: Vec<String> = self.dims.iter().map(|x| x.to_string()).collect();
        writeln!(s, "dims={}", dims.join(";")).unwrap();
        let total: f64 = self.dims.iter().map(Dimension::value).sum();
        writeln!(s, "total_dim={total:?}").unwrap();
        writeln!(s, "product_threshold={}", self.product_threshold).unwrap();
        writeln!(
            s,
            "product_threshold_value={:?}",
            *self.product_threshold.numer() as f64 / *self.product_threshold.denom() as f64
        )
        .unwrap();
        writeln!(s, "product_margin={}", self.product_margin).unwrap();
        if let Some(m) = &self.imbalance_margin {
            writeln!(s, "imbalance_margin={m}").unwrap();
        }
        if let Some(r) = &self.regular {
            writeln!(s, "regular_alpha={:?}", r.inputs.alpha).unwrap();
            writeln!(s, "regular_c_nu={:?}", r.inputs.c_nu).unwrap();
            writeln!(s, "regular_dz_k={:?}", r.inputs.k).unwrap();
            writeln!(s, "regular_beta={:?}", r.beta).unwrap();
            writeln!(s, "regular_gamma0={:?}", r.derivation.gamma0).unwrap();
            writeln!(s, "regular_delta={:?}", r.derivation.delta).unwrap();
            writeln!(s, "regular_delta_kind=derived candidate").unwrap();
            writeln!(s, "regular_alpha_threshold={:?}", r.alpha_threshold).unwrap();
            writeln!(s, "regular_margin={:?}", r.margin).unwrap();
        }
        let names: Vec<&str> = self.applicable.iter().map(|c| c.name()).collect();
        writeln!(s, "applicable={}", names.join(";")).unwrap();
        s
    }
}

pub fn threshold_report(inputs: &ThresholdInputs) -> Result<ThresholdReport> {
    let d = inputs.dims.len();
    if d < 2 {
        return Err(Error::invalid(
            "dims",
            format!("need at least 2 dimensions, got {d}"),
        ));
    }
    if let Some(x) = inputs
        .dims
        .iter()
        .find(|x| !(0.0..=1.0).contains(&x.value()))
    {
        return Err(Error::invalid("dims", format!("{x} outside [0, 1]")));
    }
    let di = d as i128;
    let product_threshold = Rational::new(di * di, 2 * di - 1);
    let exact: Option<Vec<Rational>> = inputs.dims.iter().map(Dimension::exact).collect();
    let approx: Vec<f64> = inputs.dims.iter().map(Dimension::value).collect();
    let threshold_value = *product_threshold.numer() as f64 / *product_threshold.denom() as f64;

    let product_margin = Margin::from_parts(
        exact
            .as_ref()
            .map(|v| v.iter().copied().sum::<Rational>() - product_threshold),
        approx.iter().sum::<f64>() - threshold_value,
    );
    let imbalance_margin = (d == 2).then(|| {
        Margin::from_parts(
            exact
                .as_ref()
                .map(|v| v[0] + v[1] + v[0].max(v[1]) - Rational::from_integer(2)),
            approx[0] + approx[1] + approx[0].max(approx[1]) - 2.0,
        )
    });
    let regular = match inputs.regular {
        Some(reg) => {
            let params = dz_beta(reg.alpha, reg.c_nu, reg.k)?;
            let derivation = derive_delta(reg.alpha, params.beta)?;
            let alpha_threshold = 2.0 / 3.0 - derivation.delta;
            Some(RegularDerivation {
                inputs: reg,
                beta: params.beta,
                derivation,
                alpha_threshold,
                margin: reg.alpha - alpha_threshold,
            })
        }
        None => None,
    };

    let mut applicable = Vec::new();
    if imbalance_margin.is_some_and(|m| m.is_positive()) {
        applicable.push(Criterion::Imbalance);
    }
    if let Some(r) = &regular {
        let equal = d == 2 && approx.iter().all(|s| (s - r.inputs.alpha).abs() < 1e-12);
        if equal && r.margin > 0.0 {
            applicable.push(Criterion::RegularEnergy);
        }
    }
    if product_margin.is_positive() {
        applicable.push(Criterion::ProductThreshold);
    }
    Ok(ThresholdReport {
        d,
        dims: inputs.dims.clone(),
        product_threshold,
        product_margin,
        imbalance_margin,
        regular,
        applicable,
    })
}
