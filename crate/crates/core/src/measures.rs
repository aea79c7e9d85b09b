//! Discretized Cantor-type measures on `[0, 1)`, their Cartesian products,
//! and Frostman / Ahlfors-David regularity audits.
//!
//! A [`GridMeasure`] lives on the grid `{ i * base^-level : 0 <= i < base^level }`.
//! Atoms are addressed by their integer index so sums and differences of
//! positions are exact; real positions are only formed when a real-valued
//! quantity (a ball radius, a Fourier phase) demands it.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{loglog_fit, LoglogFit};

/// Tolerance on the total mass of a measure.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Largest grid a measure may live on.
pub const MAX_GRID_SIZE: u64 = 1 << 40;

/// Relative tolerance for deciding that a real radius sits exactly on a grid multiple.
const TIE_TOLERANCE: f64 = 1e-9;

/// Largest integer `k` with `k * delta <= r`, treating near-ties as exact.
pub(crate) fn closed_grid_radius(r: f64, delta: f64) -> u64 {
    let x = r / delta;
    let n = x.round();
    if (x - n).abs() <= TIE_TOLERANCE * x.max(1.0) {
        n as u64
    } else {
        x.floor() as u64
    }
}

/// Largest integer `k` with `k * delta < r`; a radius landing on a grid
/// multiple excludes that multiple.
pub(crate) fn open_grid_radius(r: f64, delta: f64) -> u64 {
    let x = r / delta;
    let n = x.round();
    if (x - n).abs() <= TIE_TOLERANCE * x.max(1.0) {
        (n as u64).saturating_sub(1)
    } else {
        x.floor() as u64
    }
}

/// Digit description of a self-similar Cantor set: keep the sub-intervals
/// listed in `digits` out of `base` at each of `level` refinement steps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CantorSpec {
    pub base: u32,
    pub digits: Vec<u32>,
    pub level: u32,
}

impl CantorSpec {
    pub fn new(base: u32, digits: Vec<u32>, level: u32) -> Self {
        CantorSpec {
            base,
            digits,
            level,
        }
    }

    /// The classical middle-thirds set at the given depth.
    pub fn middle_thirds(level: u32) -> Self {
        CantorSpec::new(3, vec![0, 2], level)
    }

    /// Every digit kept: the uniform measure on the level grid.
    pub fn full(base: u32, level: u32) -> Self {
        CantorSpec::new(base, (0..base).collect(), level)
    }

    pub fn validate(&self) -> Result<()> {
        if self.base < 2 {
            return Err(Error::invalid(
                "base",
                format!("must be >= 2, got {}", self.base),
            ));
        }
        if self.digits.is_empty() {
            return Err(Error::invalid("digits", "must be nonempty"));
        }
        if let Some(&d) = self.digits.iter().find(|&&d| d >= self.base) {
            return Err(Error::invalid(
                "digits",
                format!("digit {d} out of range for base {}", self.base),
            ));
        }
        if self.digits.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("digits", "must be strictly increasing"));
        }
        grid_size(self.base, self.level).map(|_| ())
    }

    /// `log |digits| / log base`.
    pub fn dimension(&self) -> f64 {
        (self.digits.len() as f64).ln() / (self.base as f64).ln()
    }
}

fn grid_size(base: u32, level: u32) -> Result<u64> {
    (base as u64)
        .checked_pow(level)
        .filter(|&n| n <= MAX_GRID_SIZE)
        .ok_or_else(|| {
            Error::invalid(
                "level",
                format!("grid {base}^{level} exceeds {MAX_GRID_SIZE} points"),
            )
        })
}

/// A probability measure carried by finitely many points of the grid
/// `base^-level * Z` inside `[0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMeasure {
    base: u32,
    level: u32,
    atoms: Vec<(u64, f64)>,
    dimension_hint: Option<f64>,
}

impl GridMeasure {
    /// Validates and wraps an atom list. Indices must be strictly
    /// increasing and on the grid; weights nonnegative with unit total.
    pub fn from_atoms(
        base: u32,
        level: u32,
        atoms: Vec<(u64, f64)>,
        dimension_hint: Option<f64>,
    ) -> Result<Self> {
        if base < 2 {
            return Err(Error::invalid("base", format!("must be >= 2, got {base}")));
        }
        let size = grid_size(base, level)?;
        if atoms.is_empty() {
            return Err(Error::invalid("atoms", "measure has no atoms"));
        }
        if atoms.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::invalid(
                "atoms",
                "indices must be strictly increasing",
            ));
        }
        if let Some(&(i, _)) = atoms.iter().find(|a| a.0 >= size) {
            return Err(Error::invalid(
                "atoms",
                format!("index {i} outside grid of size {size}"),
            ));
        }
        if let Some(&(i, w)) = atoms.iter().find(|a| !(a.1 >= 0.0 && a.1.is_finite())) {
            return Err(Error::invalid(
                "atoms",
                format!("atom {i} has invalid weight {w}"),
            ));
        }
        let total = compensated_sum(atoms.iter().map(|a| a.1));
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::invalid(
                "atoms",
                format!("total mass {total} is not 1"),
            ));
        }
        if let Some(h) = dimension_hint {
            if !(0.0..=1.0).contains(&h) {
                return Err(Error::invalid(
                    "dimension_hint",
                    format!("{h} outside [0, 1]"),
                ));
            }
        }
        Ok(GridMeasure {
            base,
            level,
            atoms,
            dimension_hint,
        })
    }

    /// Sorts, merges duplicate indices, drops zero weights and rescales
    /// the result to unit mass.
    pub fn normalized(base: u32, level: u32, mut atoms: Vec<(u64, f64)>) -> Result<Self> {
        atoms.sort_by_key(|a| a.0);
        let mut merged: Vec<(u64, f64)> = Vec::with_capacity(atoms.len());
        for (i, w) in atoms {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::invalid(
                    "atoms",
                    format!("atom {i} has invalid weight {w}"),
                ));
            }
            match merged.last_mut() {
                Some(last) if last.0 == i => last.1 += w,
                _ => merged.push((i, w)),
            }
        }
        merged.retain(|a| a.1 > 0.0);
        let total = compensated_sum(merged.iter().map(|a| a.1));
        if total <= 0.0 {
            return Err(Error::invalid("atoms", "total mass is zero"));
        }
        for a in &mut merged {
            a.1 /= total;
        }
        Self::from_atoms(base, level, merged, None)
    }

    pub fn uniform(base: u32, level: u32) -> Result<Self> {
        build_cantor(&CantorSpec::full(base, level))
    }

    /// Unit mass at `index`, declared zero-dimensional.
    pub fn point_mass(base: u32, level: u32, index: u64) -> Result<Self> {
        Self::from_atoms(base, level, vec![(index, 1.0)], Some(0.0))
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Number of grid points, `base^level`.
    pub fn grid_size(&self) -> u64 {
        (self.base as u64).pow(self.level)
    }

    /// Grid spacing `base^-level`.
    pub fn resolution(&self) -> f64 {
        (self.base as f64).powi(-(self.level as i32))
    }

    pub fn atoms(&self) -> &[(u64, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        compensated_sum(self.atoms.iter().map(|a| a.1))
    }

    pub fn dimension_hint(&self) -> Option<f64> {
        self.dimension_hint
    }

    pub fn with_dimension_hint(mut self, hint: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&hint) {
            return Err(Error::invalid(
                "dimension_hint",
                format!("{hint} outside [0, 1]"),
            ));
        }
        self.dimension_hint = Some(hint);
        Ok(self)
    }

    /// Left-endpoint positions of the atoms.
    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        let delta = self.resolution();
        self.atoms.iter().map(move |a| a.0 as f64 * delta)
    }

    /// Distance between the extreme atoms.
    pub fn diameter(&self) -> f64 {
        let first = self.atoms.first().unwrap().0;
        let last = self.atoms.last().unwrap().0;
        (last - first) as f64 * self.resolution()
    }

    /// Mass of the level-`j` cylinder whose index prefix (top `j` base
    /// digits) equals `prefix`.
    pub fn cylinder_mass(&self, j: u32, prefix: u64) -> f64 {
        assert!(j <= self.level);
        let width = (self.base as u64).pow(self.level - j);
        self.atoms
            .iter()
            .filter(|a| a.0 / width == prefix)
            .map(|a| a.1)
            .sum()
    }

    /// `nu([x - r, x + r])` for every atom centre `x`, in atom order.
    pub fn ball_masses(&self, r: f64) -> Vec<f64> {
        let k = closed_grid_radius(r, self.resolution());
        let mut prefix = Vec::with_capacity(self.atoms.len() + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for a in &self.atoms {
            acc += a.1;
            prefix.push(acc);
        }
        let n = self.atoms.len();
        let (mut lo, mut hi) = (0usize, 0usize);
        let mut out = Vec::with_capacity(n);
        for &(i, _) in &self.atoms {
            let left = i.saturating_sub(k);
            let right = i.saturating_add(k);
            while self.atoms[lo].0 < left {
                lo += 1;
            }
            while hi < n && self.atoms[hi].0 <= right {
                hi += 1;
            }
            out.push(prefix[hi] - prefix[lo]);
        }
        out
    }

    /// Line-oriented text form: a header recording the grid, then one
    /// `index,weight` row per atom. Weights use shortest round-trip
    /// formatting, so [`GridMeasure::from_text`] restores them bit for bit.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# grid-measure").unwrap();
        writeln!(s, "# base={}", self.base).unwrap();
        writeln!(s, "# level={}", self.level).unwrap();
        if let Some(h) = self.dimension_hint {
            writeln!(s, "# dimension_hint={h:?}").unwrap();
        }
        writeln!(s, "index,weight").unwrap();
        for (i, w) in &self.atoms {
            writeln!(s, "{i},{w:?}").unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut base = None;
        let mut level = None;
        let mut hint = None;
        let mut atoms = Vec::new();
        let mut seen_columns = false;
        for (n, raw) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = raw.trim();
            let parse_err = |reason: String| Error::Parse {
                line: line_no,
                reason,
            };
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                let meta = meta.trim();
                if meta == "grid-measure" {
                    continue;
                }
                let (key, value) = meta
                    .split_once('=')
                    .ok_or_else(|| parse_err(format!("malformed header `{meta}`")))?;
                match key.trim() {
                    "base" => {
                        base = Some(
                            value
                                .trim()
                                .parse::<u32>()
                                .map_err(|e| parse_err(e.to_string()))?,
                        )
                    }
                    "level" => {
                        level = Some(
                            value
                                .trim()
                                .parse::<u32>()
                                .map_err(|e| parse_err(e.to_string()))?,
                        )
                    }
                    "dimension_hint" => {
                        hint = Some(
                            value
                                .trim()
                                .parse::<f64>()
                                .map_err(|e| parse_err(e.to_string()))?,
                        )
                    }
                    other => return Err(parse_err(format!("unknown header key `{other}`"))),
                }
                continue;
            }
            if !seen_columns {
                if line != "index,weight" {
                    return Err(parse_err(format!("expected `index,weight`, got `{line}`")));
                }
                seen_columns = true;
                continue;
            }
            let (i, w) = line
                .split_once(',')
                .ok_or_else(|| parse_err(format!("expected `index,weight`, got `{line}`")))?;
            let i = i
                .trim()
                .parse::<u64>()
                .map_err(|e| parse_err(e.to_string()))?;
            let w = w
                .trim()
                .parse::<f64>()
                .map_err(|e| parse_err(e.to_string()))?;
            atoms.push((i, w));
        }
        let missing = |what: &str| Error::Parse {
            line: 0,
            reason: format!("missing `{what}` header"),
        };
        let base = base.ok_or_else(|| missing("base"))?;
        let level = level.ok_or_else(|| missing("level"))?;
        Self::from_atoms(base, level, atoms, hint)
    }
}

/// Neumaier summation; a plain sum drifts past the mass tolerance at
/// around a million atoms.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// Builds the level-`k` Cantor measure: one atom per `k`-digit expansion
/// over `digits`, each of mass `|digits|^-k`.
pub fn build_cantor(spec: &CantorSpec) -> Result<GridMeasure> {
    spec.validate()?;
    let m = spec.digits.len();
    let weight = (m as f64).powi(-(spec.level as i32));
    let mut indices = vec![0u64];
    for _ in 0..spec.level {
        let mut next = Vec::with_capacity(indices.len() * m);
        for &i in &indices {
            for &d in &spec.digits {
                next.push(i * spec.base as u64 + d as u64);
            }
        }
        indices = next;
    }
    let atoms = indices.into_iter().map(|i| (i, weight)).collect();
    GridMeasure::from_atoms(spec.base, spec.level, atoms, Some(spec.dimension()))
}

/// `mu = nu_1 x ... x nu_d` with declared factor dimensions `s_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductMeasure {
    factors: Vec<GridMeasure>,
    dims: Vec<f64>,
}

impl ProductMeasure {
    pub fn factors(&self) -> &[GridMeasure] {
        &self.factors
    }

    pub fn dims(&self) -> &[f64] {
        &self.dims
    }

    /// `s = sum s_j`.
    pub fn total_dim(&self) -> f64 {
        self.dims.iter().sum()
    }

    /// Ambient dimension `d`.
    pub fn dimension(&self) -> usize {
        self.factors.len()
    }

    pub fn atom_count(&self) -> usize {
        self.factors.iter().map(GridMeasure::len).product()
    }

    /// Coarsest grid spacing among the factors.
    pub fn coarsest_resolution(&self) -> f64 {
        self.factors
            .iter()
            .map(GridMeasure::resolution)
            .fold(0.0, f64::max)
    }

    /// Same factors in a different coordinate order.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let factors = order.iter().map(|&i| self.factors[i].clone()).collect();
        let dims = order.iter().map(|&i| self.dims[i]).collect();
        build_product(factors, dims)
    }
}

pub fn build_product(factors: Vec<GridMeasure>, dims: Vec<f64>) -> Result<ProductMeasure> {
    if factors.len() < 2 {
        return Err(Error::invalid(
            "factors",
            format!("a product needs at least 2 factors, got {}", factors.len()),
        ));
    }
    if dims.len() != factors.len() {
        return Err(Error::invalid(
            "dims",
            format!("{} dimensions for {} factors", dims.len(), factors.len()),
        ));
    }
    if let Some(s) = dims.iter().find(|s| !(0.0..=1.0).contains(*s)) {
        return Err(Error::invalid("dims", format!("{s} outside [0, 1]")));
    }
    Ok(ProductMeasure { factors, dims })
}

/// Product whose factor dimensions are the factors' own hints.
pub fn product_from_hints(factors: Vec<GridMeasure>) -> Result<ProductMeasure> {
    let dims = factors
        .iter()
        .map(|f| {
            f.dimension_hint()
                .ok_or_else(|| Error::invalid("dims", "factor has no dimension hint"))
        })
        .collect::<Result<Vec<_>>>()?;
    build_product(factors, dims)
}

/// Weighted point set in `R^dim`, coordinates stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub dim: usize,
    pub coords: Vec<f64>,
    pub weights: Vec<f64>,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }
}

/// Anything that can be flattened to weighted atoms in Euclidean space.
pub trait AtomicMeasure {
    fn point_cloud(&self) -> PointCloud;
}

impl AtomicMeasure for GridMeasure {
    fn point_cloud(&self) -> PointCloud {
        PointCloud {
            dim: 1,
            coords: self.positions().collect(),
            weights: self.atoms.iter().map(|a| a.1).collect(),
        }
    }
}

impl AtomicMeasure for ProductMeasure {
    fn point_cloud(&self) -> PointCloud {
        let d = self.dimension();
        let n = self.atom_count();
        let mut coords = Vec::with_capacity(n * d);
        let mut weights = Vec::with_capacity(n);
        let positions: Vec<Vec<f64>> = self
            .factors
            .iter()
            .map(|f| f.positions().collect())
            .collect();
        let mut counter = vec![0usize; d];
        for _ in 0..n {
            let mut w = 1.0;
            for (j, &c) in counter.iter().enumerate() {
                coords.push(positions[j][c]);
                w *= self.factors[j].atoms[c].1;
            }
            weights.push(w);
            // odometer, last coordinate fastest
            for j in (0..d).rev() {
                counter[j] += 1;
                if counter[j] < self.factors[j].len() {
                    break;
                }
                counter[j] = 0;
            }
        }
        PointCloud {
            dim: d,
            coords,
            weights,
        }
    }
}

/// Extremal ball-mass ratios at one scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleRatios {
    pub r: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub alpha: f64,
    pub scales: Vec<ScaleRatios>,
    pub c_lower: f64,
    pub c_upper: f64,
    /// `max(c_upper, 1 / c_lower)`.
    pub c_nu: f64,
    pub cap: f64,
    pub pass: bool,
}

impl RegularityReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,min_ratio,max_ratio\n");
        for sc in &self.scales {
            writeln!(s, "{:?},{:?},{:?}", sc.r, sc.min_ratio, sc.max_ratio).unwrap();
        }
        writeln!(s, "# alpha={:?}", self.alpha).unwrap();
        writeln!(s, "# c_lower={:?}", self.c_lower).unwrap();
        writeln!(s, "# c_upper={:?}", self.c_upper).unwrap();
        writeln!(s, "# c_nu={:?}", self.c_nu).unwrap();
        writeln!(s, "# cap={:?}", self.cap).unwrap();
        writeln!(s, "# pass={}", self.pass).unwrap();
        s
    }
}

/// Audits two-sided ball bounds `C^-1 r^alpha <= nu(B(x, r)) <= C r^alpha`
/// over every atom centre `x` and every listed scale. Balls are closed.
pub fn check_regularity(
    nu: &GridMeasure,
    alpha: f64,
    scales: &[f64],
    cap: f64,
) -> Result<RegularityReport> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid("alpha", format!("{alpha} outside (0, 1]")));
    }
    if scales.is_empty() {
        return Err(Error::invalid("scales", "no scales given"));
    }
    if !(cap > 0.0) {
        return Err(Error::invalid("cap", format!("{cap} must be positive")));
    }
    let delta = nu.resolution();
    if let Some(&r) = scales
        .iter()
        .find(|&&r| !(r >= delta * (1.0 - TIE_TOLERANCE) && r <= 1.0))
    {
        return Err(Error::invalid(
            "scales",
            format!(
                "scale {r} outside [{delta}, 1]: regularity is meaningless below the grid spacing"
            ),
        ));
    }
    let mut per_scale = Vec::with_capacity(scales.len());
    for &r in scales {
        let norm = r.powf(alpha);
        let (lo, hi) = nu
            .ball_masses(r)
            .into_iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), m| {
                (lo.min(m / norm), hi.max(m / norm))
            });
        per_scale.push(ScaleRatios {
            r,
            min_ratio: lo,
            max_ratio: hi,
        });
    }
    let c_lower = per_scale
        .iter()
        .map(|s| s.min_ratio)
        .fold(f64::INFINITY, f64::min);
    let c_upper = per_scale.iter().map(|s| s.max_ratio).fold(0.0, f64::max);
    let c_nu = c_upper.max(1.0 / c_lower).max(1.0);
    Ok(RegularityReport {
        alpha,
        scales: per_scale,
        c_lower,
        c_upper,
        c_nu,
        cap,
        pass: c_nu <= cap,
    })
}

/// Empirical upper Frostman exponent: slope of `log max_x nu(B(x, r))`
/// against `log r`.
pub fn frostman_fit(nu: &GridMeasure, scales: &[f64]) -> Result<LoglogFit> {
    if scales.len() < 3 {
        return Err(Error::Regression(format!(
            "need at least 3 scales, got {}",
            scales.len()
        )));
    }
    let points: Vec<(f64, f64)> = scales
        .iter()
        .map(|&r| {
            let max = nu.ball_masses(r).into_iter().fold(0.0, f64::max);
            (r, max)
        })
        .collect();
    loglog_fit(&points)
}

/// Scales `base^-j` for `j = 1..=level`, the natural regularity sweep.
pub fn natural_scales(nu: &GridMeasure) -> Vec<f64> {
    (1..=nu.level())
        .map(|j| (nu.base() as f64).powi(-(j as i32)))
        .collect()
}
