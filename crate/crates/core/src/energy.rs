//! Additive energy at scale `r`,
//!
//! ```text
//! E(nu, r) = nu^4 { (u1, u2, u3, u4) : |(u1 + u2) - (u3 + u4)| < r },
//! ```
//!
//! computed two ways: by enumerating quadruples, and through the sumset
//! distribution `q = nu * nu` followed by a sliding window over sum indices.
//! The smoothed fourth moment `int |nu^(t u)|^4 psi^(u) du` is evaluated on
//! both sides of the Parseval identity.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::loglog_fit;
use crate::fourier::{measure_ft, CutoffFunction};
use crate::measures::{open_grid_radius, GridMeasure};
use crate::quadrature::{self, Doubling};

/// Quadruple enumeration is refused above this many atoms.
pub const BRUTEFORCE_MAX_ATOMS: usize = 200;

/// The distribution of `u1 + u2` under `nu x nu`, keyed by sum index.
#[derive(Debug, Clone, PartialEq)]
pub struct SumsetDistribution {
    pub base: u32,
    pub level: u32,
    /// `(sum index, q(sum index))`, sorted by index, zero entries omitted.
    pub entries: Vec<(u64, f64)>,
}

impl SumsetDistribution {
    pub fn resolution(&self) -> f64 {
        (self.base as f64).powi(-(self.level as i32))
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    /// Span of the sumset support in real units.
    pub fn diameter(&self) -> f64 {
        let first = self.entries.first().map_or(0, |e| e.0);
        let last = self.entries.last().map_or(0, |e| e.0);
        (last - first) as f64 * self.resolution()
    }

    /// `sum_{|a - b| delta < r} q(a) q(b)`, using prefix sums over a
    /// two-pointer window. Linear in the number of sum entries.
    pub fn energy(&self, r: f64) -> f64 {
        let w = open_grid_radius(r, self.resolution());
        let n = self.entries.len();
        let mut prefix = Vec::with_capacity(n + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for e in &self.entries {
            acc += e.1;
            prefix.push(acc);
        }
        let (mut lo, mut hi) = (0usize, 0usize);
        let mut total = 0.0;
        for &(s, q) in &self.entries {
            let left = s.saturating_sub(w);
            let right = s.saturating_add(w);
            while self.entries[lo].0 < left {
                lo += 1;
            }
            while hi < n && self.entries[hi].0 <= right {
                hi += 1;
            }
            total += q * (prefix[hi] - prefix[lo]);
        }
        total
    }

    /// `R(k) = sum_a q(a) q(a + k)` for `k = 0 ..= span`.
    fn autocorrelation(&self) -> Vec<f64> {
        let first = self.entries.first().map_or(0, |e| e.0);
        let last = self.entries.last().map_or(0, |e| e.0);
        let mut r = vec![0.0; (last - first) as usize + 1];
        for (i, &(a, qa)) in self.entries.iter().enumerate() {
            for &(b, qb) in &self.entries[i..] {
                r[(b - a) as usize] += qa * qb;
            }
        }
        r
    }
}

/// `q(s) = sum_{i + j = s} w_i w_j`, accumulated with `i` outer and `j`
/// inner in ascending index order.
pub fn sumset_autocorrelation(nu: &GridMeasure) -> SumsetDistribution {
    let atoms = nu.atoms();
    let first = atoms[0].0;
    let last = atoms[atoms.len() - 1].0;
    let span = 2 * (last - first) as usize + 1;
    let n = atoms.len();
    let entries = if span <= 1 << 26 || span <= 8 * n * n {
        let mut dense = vec![0.0f64; span];
        for &(i, wi) in atoms {
            for &(j, wj) in atoms {
                dense[(i + j - 2 * first) as usize] += wi * wj;
            }
        }
        dense
            .into_iter()
            .enumerate()
            .filter(|e| e.1 != 0.0)
            .map(|(s, q)| (s as u64 + 2 * first, q))
            .collect()
    } else {
        let mut sparse = std::collections::BTreeMap::new();
        for &(i, wi) in atoms {
            for &(j, wj) in atoms {
                *sparse.entry(i + j).or_insert(0.0) += wi * wj;
            }
        }
        sparse.into_iter().filter(|e| e.1 != 0.0).collect()
    };
    SumsetDistribution {
        base: nu.base(),
        level: nu.level(),
        entries,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnergyAlgorithm {
    /// Enumerate all `N^4` quadruples of atoms.
    Bruteforce,
    /// Sumset convolution followed by a windowed pair sum.
    Autocorrelation,
}

/// Scale-`r` additive energy of `nu` with the strict window `< r`.
pub fn additive_energy(nu: &GridMeasure, r: f64, algorithm: EnergyAlgorithm) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::invalid("r", format!("{r} must be positive")));
    }
    match algorithm {
        EnergyAlgorithm::Autocorrelation => Ok(sumset_autocorrelation(nu).energy(r)),
        EnergyAlgorithm::Bruteforce => {
            if nu.len() > BRUTEFORCE_MAX_ATOMS {
                return Err(Error::Budget(format!(
                    "brute-force additive energy is limited to {BRUTEFORCE_MAX_ATOMS} atoms, measure has {}",
                    nu.len()
                )));
            }
            Ok(bruteforce_energy(nu, r))
        }
    }
}

fn bruteforce_energy(nu: &GridMeasure, r: f64) -> f64 {
    let pts: Vec<(f64, f64)> = nu.positions().zip(nu.atoms().iter().map(|a| a.1)).collect();
    // gaps within this relative distance of r count as ties and are excluded
    let tie = 1e-9 * r;
    let mut total = 0.0;
    for &(u1, w1) in &pts {
        for &(u2, w2) in &pts {
            let s12 = u1 + u2;
            let w12 = w1 * w2;
            for &(u3, w3) in &pts {
                for &(u4, w4) in &pts {
                    let gap = (s12 - (u3 + u4)).abs();
                    if gap < r - tie {
                        total += w12 * w3 * w4;
                    }
                }
            }
        }
    }
    total
}

/// Sampled energies with a log-log slope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyProfile {
    /// `(r, E(r))` in the order requested.
    pub samples: Vec<(f64, f64)>,
    pub fitted_exponent: f64,
    pub stderr: f64,
    /// The dimension the exponent is compared against.
    pub alpha_ref: f64,
}

impl EnergyProfile {
    /// Excess of the fitted exponent over `alpha_ref`.
    pub fn excess(&self) -> f64 {
        self.fitted_exponent - self.alpha_ref
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,E,log_r,log_E\n");
        for &(r, e) in &self.samples {
            writeln!(s, "{r:?},{e:?},{:?},{:?}", r.ln(), e.ln()).unwrap();
        }
        writeln!(s, "# fitted_slope={:?}", self.fitted_exponent).unwrap();
        writeln!(s, "# stderr={:?}", self.stderr).unwrap();
        writeln!(s, "# alpha_ref={:?}", self.alpha_ref).unwrap();
        s
    }
}

/// Energies at each `r` through the autocorrelation path, plus the
/// least-squares slope of `log E` against `log r`.
pub fn energy_profile(nu: &GridMeasure, r_values: &[f64], alpha: f64) -> Result<EnergyProfile> {
    if r_values.len() < 3 {
        return Err(Error::invalid(
            "r_values",
            format!("need at least 3 scales, got {}", r_values.len()),
        ));
    }
    let delta = nu.resolution();
    if let Some(r) = r_values
        .iter()
        .find(|&&r| !(r >= delta * (1.0 - 1e-9) && r.is_finite()))
    {
        return Err(Error::invalid(
            "r_values",
            format!("scale {r} below the grid spacing {delta}"),
        ));
    }
    let q = sumset_autocorrelation(nu);
    let samples: Vec<(f64, f64)> = r_values.par_iter().map(|&r| (r, q.energy(r))).collect();
    let fit = loglog_fit(&samples)?;
    Ok(EnergyProfile {
        samples,
        fitted_exponent: fit.slope,
        stderr: fit.stderr,
        alpha_ref: alpha,
    })
}

/// Powers of two between `4 delta` and the sumset diameter.
pub fn dyadic_sweep(nu: &GridMeasure) -> Vec<f64> {
    let lo = 4.0 * nu.resolution();
    let hi = 2.0 * nu.diameter();
    if hi < lo {
        return Vec::new();
    }
    let j_lo = lo.log2().ceil() as i32;
    let j_hi = hi.log2().floor() as i32;
    (j_lo..=j_hi).map(|j| 2f64.powi(j)).collect()
}

/// Both sides of `int |nu^(t u)|^4 psi^(u) du = sum q(a) q(b) psi(t (a - b) delta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothedEnergy {
    pub t: f64,
    /// Pair sum over the sumset distribution.
    pub space_side: f64,
    /// Quadrature over the compact support of the cutoff transform.
    pub fourier_side: f64,
    pub fourier_nodes: usize,
}

pub fn smoothed_energy(
    nu: &GridMeasure,
    t: f64,
    cutoff: &CutoffFunction,
) -> Result<SmoothedEnergy> {
    if !(t >= 1.0 && t.is_finite()) {
        return Err(Error::invalid("t", format!("{t} must be >= 1")));
    }
    cutoff.validate()?;
    let q = sumset_autocorrelation(nu);
    let delta = q.resolution();
    let corr = q.autocorrelation();
    let mut space_side = corr[0] * cutoff.value(0.0);
    for (k, &rk) in corr.iter().enumerate().skip(1) {
        if rk != 0.0 {
            space_side += 2.0 * rk * cutoff.value(t * k as f64 * delta);
        }
    }

    // |nu^|^4 is even in u, and psi^ has kinks only at 0 and the support edge
    let support = cutoff.transform_support();
    let integrand = |u: f64| {
        let z = measure_ft(nu, t * u).norm_sqr();
        z * z * cutoff.transform(u)
    };
    let oscillations = 2.0 * t * support * (2.0 * nu.diameter()).max(1e-3);
    let policy = Doubling {
        initial_panels: (oscillations.ceil() as usize).max(4),
        rel_tol: 1e-11,
        abs_tol: 1e-15,
        max_panels: 1 << 22,
    };
    let half = quadrature::integrate(&integrand, 0.0, support, policy)?;
    Ok(SmoothedEnergy {
        t,
        space_side,
        fourier_side: 2.0 * half.value,
        fourier_nodes: 2 * half.nodes,
    })
}

/// Parameters of the Dyatlov-Zahl energy improvement
/// `E(r) <= C~ r^(alpha + beta)` with
/// `beta = alpha * exp(-exp(K sqrt(1 + ln C_nu) / sqrt(1 - alpha)))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DzParams {
    pub alpha: f64,
    pub c_nu: f64,
    pub k: f64,
    pub beta: f64,
    /// The theorem's multiplicative constant has no closed form; never computed.
    pub c_tilde: Option<f64>,
}

pub const DEFAULT_DZ_K: f64 = 1.0;

pub fn dz_beta(alpha: f64, c_nu: f64, k: f64) -> Result<DzParams> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid("alpha", format!("{alpha} outside (0, 1)")));
    }
    if !(c_nu >= 1.0 && c_nu.is_finite()) {
        return Err(Error::invalid("c_nu", format!("{c_nu} must be >= 1")));
    }
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::invalid("k", format!("{k} must be positive")));
    }
    let inner = k * (1.0 + c_nu.ln()).sqrt() / (1.0 - alpha).sqrt();
    let beta = alpha * (-inner.exp()).exp();
    Ok(DzParams {
        alpha,
        c_nu,
        k,
        beta,
        c_tilde: None,
    })
}
