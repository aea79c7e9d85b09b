//! Fourier transforms of grid and product measures, and the averages of
//! `|mu^|^2` built from them.
//!
//! Transforms use `nu^(xi) = sum_j w_j exp(-2 pi i x_j xi)`. Only magnitudes
//! enter the averages, so the sign convention is fixed for reproducibility
//! rather than meaning.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::smoothed_energy;
use crate::error::{Error, Result};
use crate::fit::loglog_fit;
use crate::measures::{GridMeasure, ProductMeasure};
use crate::quadrature::{self, Converged, Doubling};

/// Frequencies beyond `VALIDITY_FACTOR / delta` resolve the grid rather
/// than the fractal it approximates.
pub const VALIDITY_FACTOR: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CutoffKind {
    /// `psi(x) = (sin(pi x) / (pi x))^2`, whose transform is the triangle
    /// `max(0, 1 - |u|)`.
    Fejer,
}

/// A nonnegative cutoff `psi_s(x) = psi(s x)` with nonnegative transform
/// `psi_s^(u) = psi^(u / s) / s` supported in `[-s, s]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffFunction {
    pub kind: CutoffKind,
    pub scale: f64,
}

impl CutoffFunction {
    pub fn fejer(scale: f64) -> Result<Self> {
        let c = CutoffFunction {
            kind: CutoffKind::Fejer,
            scale,
        };
        c.validate()?;
        Ok(c)
    }

    /// Rejects cutoffs whose transform is not a compactly supported
    /// nonnegative function.
    pub fn validate(&self) -> Result<()> {
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::invalid(
                "cutoff",
                format!(
                    "scale {} must be positive and finite for a compactly supported transform",
                    self.scale
                ),
            ));
        }
        Ok(())
    }

    pub fn value(&self, x: f64) -> f64 {
        match self.kind {
            CutoffKind::Fejer => {
                let y = PI * self.scale * x;
                if y.abs() < 1e-8 {
                    1.0 - y * y / 3.0
                } else {
                    let s = y.sin() / y;
                    s * s
                }
            }
        }
    }

    pub fn transform(&self, u: f64) -> f64 {
        match self.kind {
            CutoffKind::Fejer => (1.0 - (u / self.scale).abs()).max(0.0) / self.scale,
        }
    }

    /// Radius of the transform's support.
    pub fn transform_support(&self) -> f64 {
        self.scale
    }
}

/// `nu^(xi) = sum_j w_j exp(-2 pi i x_j xi)`.
pub fn measure_ft(nu: &GridMeasure, xi: f64) -> Complex64 {
    let delta = nu.resolution();
    let mut re = 0.0;
    let mut im = 0.0;
    for &(i, w) in nu.atoms() {
        let (s, c) = (-2.0 * PI * (i as f64 * delta) * xi).sin_cos();
        re += w * c;
        im += w * s;
    }
    Complex64::new(re, im)
}

/// `mu^(xi) = prod_j nu_j^(xi_j)`.
pub fn product_ft(mu: &ProductMeasure, xi: &[f64]) -> Result<Complex64> {
    if xi.len() != mu.dimension() {
        return Err(Error::invalid(
            "xi",
            format!(
                "frequency has {} coordinates, measure lives in R^{}",
                xi.len(),
                mu.dimension()
            ),
        ));
    }
    Ok(mu
        .factors()
        .iter()
        .zip(xi)
        .fold(Complex64::new(1.0, 0.0), |acc, (f, &x)| {
            acc * measure_ft(f, x)
        }))
}

fn product_power(mu: &ProductMeasure, xi: &[f64]) -> f64 {
    mu.factors()
        .iter()
        .zip(xi)
        .map(|(f, &x)| measure_ft(f, x).norm_sqr())
        .product()
}

/// Angular weight applied to `|mu^(t omega)|^2` on the sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weight {
    None,
    /// `|omega_d|`: the sine of the angle between `omega` and `{x_d = 0}`.
    SinTheta,
    /// `sqrt(1 - omega_d^2)`, the complementary weight.
    CosTheta,
}

impl Weight {
    fn at(self, omega: &[f64]) -> f64 {
        let last = omega[omega.len() - 1];
        match self {
            Weight::None => 1.0,
            Weight::SinTheta => last.abs(),
            Weight::CosTheta => (1.0 - last * last).max(0.0).sqrt(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Weight::None => "none",
            Weight::SinTheta => "sin_theta",
            Weight::CosTheta => "cos_theta",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SphereQuadrature {
    /// Composite Gauss-Legendre panels in the angle, doubled to convergence (d = 2 only).
    UniformAngle,
    /// Seeded isotropic sampling of the sphere.
    MonteCarlo { samples: usize, seed: u64 },
}

impl SphereQuadrature {
    pub fn name(&self) -> &'static str {
        match self {
            SphereQuadrature::UniformAngle => "uniform_angle",
            SphereQuadrature::MonteCarlo { .. } => "monte_carlo_sphere",
        }
    }
}

/// Surface measure of the unit sphere in `R^d`.
pub fn sphere_area(d: usize) -> f64 {
    assert!(d >= 1);
    // |S^{d-1}| = 2 pi^{d/2} / Gamma(d/2), Gamma at integers and half-integers by recursion
    let half = d as f64 / 2.0;
    let mut gamma = if d % 2 == 0 { 1.0 } else { PI.sqrt() };
    let mut x = if d % 2 == 0 { 1.0 } else { 0.5 };
    while x < half {
        gamma *= x;
        x += 1.0;
    }
    2.0 * PI.powf(half) / gamma
}

/// Largest frequency for which `spherical_average` accepts `t`.
pub fn validity_cap(mu: &ProductMeasure) -> f64 {
    VALIDITY_FACTOR / mu.coarsest_resolution()
}

/// One value of `sigma(t) = int_{S^{d-1}} |mu^(t omega)|^2 w(omega) d omega`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalSample {
    pub t: f64,
    pub sigma: f64,
    pub nodes: usize,
    /// Monte Carlo standard error; zero for deterministic quadrature.
    pub stderr: f64,
}

pub fn spherical_average(
    mu: &ProductMeasure,
    t: f64,
    weight: Weight,
    quadrature: &SphereQuadrature,
) -> Result<SphericalSample> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid("t", format!("{t} must be nonnegative")));
    }
    let cap = validity_cap(mu);
    if t > cap * (1.0 + 1e-12) {
        return Err(Error::invalid(
            "t",
            format!("{t} exceeds the validity cap {cap} of the coarsest factor grid"),
        ));
    }
    let d = mu.dimension();
    match *quadrature {
        SphereQuadrature::UniformAngle => {
            if d != 2 {
                return Err(Error::invalid(
                    "quadrature",
                    format!("uniform_angle quadrature needs d = 2, got d = {d}"),
                ));
            }
            // the integrand is invariant under omega -> -omega, so integrate a half circle
            let f = |theta: f64| {
                let (s, c) = theta.sin_cos();
                let omega = [c, s];
                product_power(mu, &[t * c, t * s]) * weight.at(&omega)
            };
            // an even panel count puts a panel edge at pi/2, where |cos| has its kink
            let panels = 2 * ((1.5 * t).ceil() as usize).max(4);
            let policy = Doubling {
                initial_panels: panels,
                rel_tol: 1e-9,
                abs_tol: 1e-300,
                max_panels: 1 << 22,
            };
            let c = quadrature::integrate(&f, 0.0, PI, policy)?;
            Ok(SphericalSample {
                t,
                sigma: 2.0 * c.value,
                nodes: 2 * c.nodes,
                stderr: 0.0,
            })
        }
        SphereQuadrature::MonteCarlo { samples, seed } => {
            if samples < 2 {
                return Err(Error::invalid(
                    "quadrature",
                    "Monte Carlo needs at least 2 samples",
                ));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut omega = vec![0.0; d];
            let mut xi = vec![0.0; d];
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            for _ in 0..samples {
                let mut norm = 0.0f64;
                while norm < 1e-300 {
                    norm = 0.0;
                    for o in omega.iter_mut() {
                        *o = StandardNormal.sample(&mut rng);
                        norm += *o * *o;
                    }
                }
                let norm = norm.sqrt();
                for (o, x) in omega.iter_mut().zip(xi.iter_mut()) {
                    *o /= norm;
                    *x = t * *o;
                }
                let v = product_power(mu, &xi) * weight.at(&omega);
                sum += v;
                sum_sq += v * v;
            }
            let n = samples as f64;
            let mean = sum / n;
            let var = ((sum_sq / n - mean * mean) * n / (n - 1.0)).max(0.0);
            let area = sphere_area(d);
            Ok(SphericalSample {
                t,
                sigma: area * mean,
                nodes: samples,
                stderr: area * (var / n).sqrt(),
            })
        }
    }
}

/// `sigma(t)` over a sweep, with the fitted log-log decay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphericalAverageSeries {
    pub samples: Vec<SphericalSample>,
    pub weight: Weight,
    pub quadrature: SphereQuadrature,
    pub fitted_decay: f64,
    pub stderr: f64,
}

impl SphericalAverageSeries {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,sigma,weight,quadrature_nodes,stderr\n");
        for p in &self.samples {
            writeln!(
                s,
                "{:?},{:?},{},{},{:?}",
                p.t,
                p.sigma,
                self.weight.name(),
                p.nodes,
                p.stderr
            )
            .unwrap();
        }
        writeln!(s, "# quadrature={}", self.quadrature.name()).unwrap();
        writeln!(s, "# fitted_decay={:?}", self.fitted_decay).unwrap();
        writeln!(s, "# fit_stderr={:?}", self.stderr).unwrap();
        s
    }
}

pub fn spherical_series(
    mu: &ProductMeasure,
    t_values: &[f64],
    weight: Weight,
    quadrature: &SphereQuadrature,
) -> Result<SphericalAverageSeries> {
    if let Some(t) = t_values.iter().find(|&&t| !(t >= 1.0)) {
        return Err(Error::invalid("t_values", format!("{t} below 1")));
    }
    let samples = t_values
        .par_iter()
        .map(|&t| spherical_average(mu, t, weight, quadrature))
        .collect::<Result<Vec<_>>>()?;
    let fit = loglog_fit(&samples.iter().map(|s| (s.t, s.sigma)).collect::<Vec<_>>())?;
    Ok(SphericalAverageSeries {
        samples,
        weight,
        quadrature: *quadrature,
        fitted_decay: fit.slope,
        stderr: fit.stderr,
    })
}

/// `int_a^b |nu^(t u)|^2 du`.
pub fn solid_average(nu: &GridMeasure, t: f64, a: f64, b: f64) -> Result<Converged<f64>> {
    if !(t >= 1.0 && t.is_finite()) {
        return Err(Error::invalid("t", format!("{t} must be >= 1")));
    }
    if !(a < b) {
        return Err(Error::invalid("interval", format!("[{a}, {b}] is empty")));
    }
    let f = |u: f64| measure_ft(nu, t * u).norm_sqr();
    let oscillations = t * (b - a) * nu.diameter().max(1e-3);
    let policy = Doubling {
        initial_panels: (oscillations.ceil() as usize).max(4),
        rel_tol: 1e-9,
        abs_tol: 1e-300,
        max_panels: 1 << 22,
    };
    quadrature::integrate(&f, a, b, policy)
}

/// Window of `t |gap|` on which residual slopes are fitted.
pub const STATIONARY_FIT_WINDOW: (f64, f64) = (1e2, 1e4);
/// Below this `t |gap|` the expansion is pre-asymptotic and never fitted.
pub const STATIONARY_MIN_ARGUMENT: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryPhaseRow {
    pub t: f64,
    pub exact_re: f64,
    pub exact_im: f64,
    pub main: f64,
    pub resid: f64,
}

/// Exact `int_0^{2 pi} exp(2 pi i t gap . omega) |sin theta| d theta`
/// against its two-point stationary-phase main term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryPhaseReport {
    pub gap: [f64; 2],
    pub rows: Vec<StationaryPhaseRow>,
    /// Slope of `log |resid|` against `log (t |gap|)` on the fit window,
    /// when at least three rows fall inside it.
    pub residual_slope: Option<f64>,
}

impl StationaryPhaseReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,exact_re,exact_im,main,resid\n");
        for r in &self.rows {
            writeln!(
                s,
                "{:?},{:?},{:?},{:?},{:?}",
                r.t, r.exact_re, r.exact_im, r.main, r.resid
            )
            .unwrap();
        }
        writeln!(s, "# gap={:?},{:?}", self.gap[0], self.gap[1]).unwrap();
        match self.residual_slope {
            Some(v) => writeln!(s, "# residual_slope={v:?}").unwrap(),
            None => writeln!(s, "# residual_slope=none").unwrap(),
        }
        s
    }
}

/// `2 R^{-1/2} cos(2 pi (R - 1/8)) |sin theta_gap|` with `R = t |gap|`.
pub fn stationary_main_term(gap: [f64; 2], t: f64) -> f64 {
    let norm = gap[0].hypot(gap[1]);
    let sin_gap = gap[1].abs() / norm;
    if sin_gap == 0.0 {
        return 0.0;
    }
    let r = t * norm;
    2.0 / r.sqrt() * (2.0 * PI * (r - 0.125)).cos() * sin_gap
}

/// The oscillatory circle integral, with at least 16 nodes per period of the phase.
pub fn weighted_circle_integral(gap: [f64; 2], t: f64) -> Result<Complex64> {
    let f = |theta: f64| {
        let (s, c) = theta.sin_cos();
        let phase = 2.0 * PI * t * (gap[0] * c + gap[1] * s);
        let (ps, pc) = phase.sin_cos();
        Complex64::new(pc, ps) * s.abs()
    };
    let r = t * gap[0].hypot(gap[1]);
    let policy = Doubling {
        initial_panels: ((2.0 * r).ceil() as usize).max(16),
        rel_tol: 1e-10,
        abs_tol: 1e-14,
        max_panels: 1 << 24,
    };
    // |sin| has kinks at 0 and pi; integrate each smooth half separately
    let upper = quadrature::integrate(&f, 0.0, PI, policy)?;
    let lower = quadrature::integrate(&f, PI, 2.0 * PI, policy)?;
    Ok(upper.value + lower.value)
}

pub fn stationary_phase_check(gap: [f64; 2], t_values: &[f64]) -> Result<StationaryPhaseReport> {
    let norm = gap[0].hypot(gap[1]);
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::invalid("gap", "gap vector must be nonzero"));
    }
    if let Some(t) = t_values.iter().find(|&&t| !(t > 0.0 && t.is_finite())) {
        return Err(Error::invalid("t_values", format!("{t} must be positive")));
    }
    let rows = t_values
        .par_iter()
        .map(|&t| {
            let exact = weighted_circle_integral(gap, t)?;
            let main = stationary_main_term(gap, t);
            Ok(StationaryPhaseRow {
                t,
                exact_re: exact.re,
                exact_im: exact.im,
                main,
                resid: exact.re - main,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (lo, hi) = STATIONARY_FIT_WINDOW;
    let window: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.t * norm, r.resid.abs()))
        .filter(|&(arg, res)| arg >= lo.max(STATIONARY_MIN_ARGUMENT) && arg <= hi && res > 0.0)
        .collect();
    let residual_slope = if window.len() >= 3 {
        Some(loglog_fit(&window)?.slope)
    } else {
        None
    };
    Ok(StationaryPhaseReport {
        gap,
        rows,
        residual_slope,
    })
}

/// Frequencies `t` for which `t |gap|` runs through `count` distinct
/// integers spaced geometrically over `[lo, hi]`. Holding the phase of the
/// main term fixed this way exposes the power-law envelope of the residual.
pub fn integer_phase_t_values(gap: [f64; 2], lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let norm = gap[0].hypot(gap[1]);
    let mut args: Vec<f64> = crate::fit::geometric_sweep(lo, hi, count)
        .into_iter()
        .map(f64::round)
        .collect();
    args.dedup();
    args.into_iter().map(|r| r / norm).collect()
}

/// The pieces of `int_0^{pi/2} |nu_A^(t cos)|^2 |nu_B^(t sin)|^2 d theta`
/// split at `eps = t^{-gamma0}`, with the smoothed fourth moments bounding
/// the middle piece.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularDecomposition {
    pub t: f64,
    pub gamma0: f64,
    /// Width of each end piece, `min(t^{-gamma0}, pi/4)`.
    pub epsilon: f64,
    pub near_zero: f64,
    pub near_half_pi: f64,
    pub middle: f64,
    /// Smoothed fourth moment of the first factor.
    pub i: f64,
    /// Smoothed fourth moment of the second factor.
    pub ii: f64,
    /// The constant in `cs_bound = constant * t^gamma0 * sqrt(I II)`.
    pub constant: f64,
    pub cs_bound: f64,
}

impl AngularDecomposition {
    pub fn total(&self) -> f64 {
        self.near_zero + self.middle + self.near_half_pi
    }
}

/// Exponent of the small-angle bound `t^{-gamma0 (1 - alpha)} t^{-alpha}`.
pub fn near_zero_exponent(alpha: f64, gamma0: f64) -> f64 {
    -gamma0 * (1.0 - alpha) - alpha
}

pub fn angular_decomposition(
    mu: &ProductMeasure,
    t: f64,
    gamma0: f64,
    cutoff: &CutoffFunction,
) -> Result<AngularDecomposition> {
    if mu.dimension() != 2 {
        return Err(Error::invalid(
            "mu",
            format!("needs d = 2, got d = {}", mu.dimension()),
        ));
    }
    if !(gamma0 > 0.0 && gamma0 < 0.5) {
        return Err(Error::invalid(
            "gamma0",
            format!("{gamma0} outside (0, 1/2)"),
        ));
    }
    if !(t >= 1.0 && t.is_finite()) {
        return Err(Error::invalid("t", format!("{t} must be >= 1")));
    }
    cutoff.validate()?;
    // the cutoff transform must stay bounded below on [0, 1]
    let floor = cutoff.transform(1.0);
    if !(floor > 0.0) {
        return Err(Error::invalid(
            "cutoff",
            format!(
                "transform vanishes on [0, 1] at scale {}; need scale > 1",
                cutoff.scale
            ),
        ));
    }
    let (a, b) = (&mu.factors()[0], &mu.factors()[1]);
    let f = |theta: f64| {
        let (s, c) = theta.sin_cos();
        measure_ft(a, t * c).norm_sqr() * measure_ft(b, t * s).norm_sqr()
    };
    let piece = |lo: f64, hi: f64| -> Result<f64> {
        if hi <= lo {
            return Ok(0.0);
        }
        let policy = Doubling {
            initial_panels: ((2.0 * t * (hi - lo)).ceil() as usize).max(4),
            rel_tol: 1e-10,
            abs_tol: 1e-300,
            max_panels: 1 << 22,
        };
        Ok(quadrature::integrate(&f, lo, hi, policy)?.value)
    };
    let half_pi = PI / 2.0;
    let epsilon = t.powf(-gamma0).min(PI / 4.0);
    let near_zero = piece(0.0, epsilon)?;
    let near_half_pi = piece(half_pi - epsilon, half_pi)?;
    let middle = piece(epsilon, half_pi - epsilon)?;
    let i = smoothed_energy(a, t, cutoff)?.space_side;
    let ii = smoothed_energy(b, t, cutoff)?.space_side;
    // 1/sin <= (pi/2)/eps on the middle piece, and int_0^1 <= (1 / 2 floor) int psi^
    let constant = PI / (4.0 * floor);
    let cs_bound = constant * t.powf(gamma0) * (i * ii).sqrt();
    Ok(AngularDecomposition {
        t,
        gamma0,
        epsilon,
        near_zero,
        near_half_pi,
        middle,
        i,
        ii,
        constant,
        cs_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{build_cantor, build_product, CantorSpec};

    fn point_product() -> ProductMeasure {
        let p = GridMeasure::point_mass(2, 10, 0).unwrap();
        build_product(vec![p.clone(), p], vec![0.0, 0.0]).unwrap()
    }

    #[test]
    fn cutoff_shape() {
        let c = CutoffFunction::fejer(1.0).unwrap();
        assert_eq!(c.value(0.0), 1.0);
        assert!(c.value(1.0) < 1e-30);
        assert!((c.value(0.5) - 4.0 / (PI * PI)).abs() < 1e-15);
        assert_eq!(c.transform(0.0), 1.0);
        assert_eq!(c.transform(1.0), 0.0);
        assert_eq!(c.transform(-1.5), 0.0);
        let c2 = CutoffFunction::fejer(2.0).unwrap();
        assert_eq!(c2.transform(1.0), 0.25);
        assert!(CutoffFunction::fejer(0.0).is_err());
        assert!(CutoffFunction::fejer(f64::NAN).is_err());
    }

    #[test]
    fn transform_of_point_mass_and_zero() {
        let p = GridMeasure::point_mass(2, 3, 0).unwrap();
        assert_eq!(measure_ft(&p, 17.3), Complex64::new(1.0, 0.0));
        let two = GridMeasure::from_atoms(2, 1, vec![(0, 0.5), (1, 0.5)], None).unwrap();
        assert!(measure_ft(&two, 1.0).norm() < 1e-15);
        let mt = build_cantor(&CantorSpec::middle_thirds(5)).unwrap();
        assert!((measure_ft(&mt, 0.0) - 1.0).norm() < 1e-15);
        let z = measure_ft(&mt, 2.7);
        assert!((measure_ft(&mt, -2.7) - z.conj()).norm() < 1e-14);
    }

    #[test]
    fn product_transform() {
        let two = GridMeasure::from_atoms(2, 1, vec![(0, 0.5), (1, 0.5)], None).unwrap();
        let p = GridMeasure::point_mass(2, 1, 0).unwrap();
        let mu = build_product(vec![two, p.clone()], vec![0.0, 0.0]).unwrap();
        assert!(product_ft(&mu, &[1.0, 0.0]).unwrap().norm() < 1e-15);
        assert!(product_ft(&mu, &[1.0]).is_err());
        let pp = build_product(vec![p.clone(), p], vec![0.0, 0.0]).unwrap();
        assert_eq!(
            product_ft(&pp, &[3.3, -1.2]).unwrap(),
            Complex64::new(1.0, 0.0)
        );
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
    }

    #[test]
    fn point_mass_spherical_averages() {
        let mu = point_product();
        let q = SphereQuadrature::UniformAngle;
        for t in [0.0, 1.0, 25.0, 100.0] {
            let s = spherical_average(&mu, t, Weight::None, &q).unwrap();
            assert!((s.sigma - 2.0 * PI).abs() < 1e-12);
            let w = spherical_average(&mu, t, Weight::SinTheta, &q).unwrap();
            assert!((w.sigma - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn validity_cap_is_enforced() {
        let mu = point_product();
        let cap = validity_cap(&mu);
        assert!((cap - 102.4).abs() < 1e-9);
        let err = spherical_average(&mu, 200.0, Weight::None, &SphereQuadrature::UniformAngle)
            .unwrap_err();
        assert!(err.to_string().contains("102.4"));
    }

    #[test]
    fn monte_carlo_point_mass_in_three_dimensions() {
        let p = GridMeasure::point_mass(2, 10, 0).unwrap();
        let mu = build_product(vec![p.clone(), p.clone(), p], vec![0.0; 3]).unwrap();
        let q = SphereQuadrature::MonteCarlo {
            samples: 4000,
            seed: 7,
        };
        let s = spherical_average(&mu, 10.0, Weight::None, &q).unwrap();
        assert!((s.sigma - 4.0 * PI).abs() < 1e-9);
        // E|omega_3| = 1/2 on S^2, so the weighted average is 2 pi
        let w = spherical_average(&mu, 10.0, Weight::SinTheta, &q).unwrap();
        assert!((w.sigma - 2.0 * PI).abs() < 4.0 * w.stderr);
        assert!(
            spherical_average(&mu, 1.0, Weight::None, &SphereQuadrature::UniformAngle).is_err()
        );
    }

    #[test]
    fn solid_average_of_point_mass() {
        let p = GridMeasure::point_mass(3, 4, 2).unwrap();
        for t in [1.0, 10.0, 300.0] {
            let s = solid_average(&p, t, -1.0, 1.0).unwrap();
            assert!((s.value - 2.0).abs() < 1e-12);
        }
        assert!(solid_average(&p, 2.0, 1.0, 1.0).is_err());
        assert!(solid_average(&p, 0.5, -1.0, 1.0).is_err());
    }

    #[test]
    fn axis_aligned_gap_has_no_main_term() {
        let rep = stationary_phase_check([1.0, 0.0], &[10.0, 100.0, 400.0]).unwrap();
        assert!(rep.rows.iter().all(|r| r.main == 0.0));
        assert!(stationary_phase_check([0.0, 0.0], &[1.0]).is_err());
    }

    #[test]
    fn vertical_gap_at_t_100() {
        let rep = stationary_phase_check([0.0, 1.0], &[100.0]).unwrap();
        let row = rep.rows[0];
        let main = 2.0 / 10.0 * (2.0 * PI * (100.0 - 0.125)).cos();
        assert!((row.main - main).abs() < 1e-14);
        assert!((row.resid / row.main).abs() <= 0.1);
        assert!(row.exact_im.abs() < 1e-10);
    }

    #[test]
    fn angular_pieces_of_point_masses() {
        let mu = point_product();
        let c = CutoffFunction::fejer(2.0).unwrap();
        let t = 50.0;
        let dec = angular_decomposition(&mu, t, 0.2, &c).unwrap();
        assert!((dec.near_zero - t.powf(-0.2)).abs() < 1e-12);
        assert!((dec.total() - PI / 2.0).abs() < 1e-12);
        assert!(dec.middle <= dec.cs_bound);
        assert!(angular_decomposition(&mu, t, 0.5, &c).is_err());
        assert!(angular_decomposition(&mu, t, 0.0, &c).is_err());
        assert!(angular_decomposition(&mu, t, 0.1, &CutoffFunction::fejer(1.0).unwrap()).is_err());
    }
}
