//! Reference values obtained by independent routes: closed forms, dense
//! quadrature, exhaustive enumeration.

mod common;

use common::{energy_oracle, rel_diff};
use falconer_core::energy::dyadic_sweep;
use falconer_core::fit::geometric_sweep;
use falconer_core::fourier::{integer_phase_t_values, SphereQuadrature};
use falconer_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn alpha_mt() -> f64 {
    2f64.ln() / 3f64.ln()
}

fn mt(level: u32) -> GridMeasure {
    build_cantor(&CantorSpec::middle_thirds(level)).unwrap()
}

/// CDF of the sum of four independent uniforms on [0, 1].
fn irwin_hall4(x: f64) -> f64 {
    let binom = [1.0, 4.0, 6.0, 4.0, 1.0];
    let mut total = 0.0;
    for (k, &c) in binom.iter().enumerate() {
        let y = x - k as f64;
        if y > 0.0 {
            total += if k % 2 == 0 { c } else { -c } * y.powi(4);
        }
    }
    (total / 24.0).clamp(0.0, 1.0)
}

#[test]
fn uniform_energy_matches_continuum() {
    let u = GridMeasure::uniform(2, 10).unwrap();
    let delta = u.resolution();
    for j in 1..=6 {
        let r = 2f64.powi(-j);
        // X + Y + (1 - Z) + (1 - W) is Irwin-Hall, centred at 2
        let exact = irwin_hall4(2.0 + r) - irwin_hall4(2.0 - r);
        let e = additive_energy(&u, r, EnergyAlgorithm::Autocorrelation).unwrap();
        assert!(
            rel_diff(e, exact) <= 3.0 * delta / r,
            "r {r}: {e} vs {exact}"
        );
    }
    let profile = energy_profile(&u, &dyadic_sweep(&u), 1.0).unwrap();
    assert!(
        (profile.fitted_exponent - 1.0).abs() <= 0.05,
        "{}",
        profile.fitted_exponent
    );

    let small = GridMeasure::uniform(2, 5).unwrap();
    for r in dyadic_sweep(&small) {
        let brute = additive_energy(&small, r, EnergyAlgorithm::Bruteforce).unwrap();
        let fast = additive_energy(&small, r, EnergyAlgorithm::Autocorrelation).unwrap();
        let oracle = energy_oracle(&small, r);
        assert!(rel_diff(brute, oracle) <= 1e-12 && rel_diff(fast, oracle) <= 1e-12);
    }
}

#[test]
fn middle_thirds_energy_profile() {
    let a = alpha_mt();
    let m = mt(9);
    let rs: Vec<f64> = (1..=8).map(|j| 3f64.powi(-j)).collect();
    let profile = energy_profile(&m, &rs, a).unwrap();
    assert!(profile.fitted_exponent >= a - 0.05 && profile.fitted_exponent <= a + 1.0);
    assert!(profile.excess() > 0.0);

    // two anchor points by exhaustive enumeration at level 4
    let m4 = mt(4);
    for r in [1.0 / 3.0, 1.0 / 9.0] {
        let fast = additive_energy(&m4, r, EnergyAlgorithm::Autocorrelation).unwrap();
        assert!(rel_diff(fast, energy_oracle(&m4, r)) <= 1e-12);
    }
}

#[test]
fn parseval_on_two_atoms() {
    let m = GridMeasure::from_atoms(2, 1, vec![(0, 0.5), (1, 0.5)], None).unwrap();
    let c = CutoffFunction::fejer(2.0).unwrap();
    let s = smoothed_energy(&m, 10.0, &c).unwrap();
    // sumset {0: 1/4, 1: 1/2, 2: 1/4}, pair sum written out by hand
    let q = [0.25, 0.5, 0.25];
    let mut direct = 0.0;
    for (a, qa) in q.iter().enumerate() {
        for (b, qb) in q.iter().enumerate() {
            direct += qa * qb * c.value(10.0 * (a as f64 - b as f64) * 0.5);
        }
    }
    assert!((s.space_side - direct).abs() <= 1e-15);
    assert!((s.fourier_side - direct).abs() <= 1e-6);
}

#[test]
fn spherical_average_matches_dense_trapezoid() {
    let m = mt(6);
    let mu = build_product(vec![m.clone(), m], vec![alpha_mt(); 2]).unwrap();
    let t = 27.0;
    let n = 1usize << 16;
    for weight in [Weight::None, Weight::SinTheta, Weight::CosTheta] {
        let mut reference = 0.0;
        for k in 0..n {
            let theta = 2.0 * PI * k as f64 / n as f64;
            let omega = [theta.cos(), theta.sin()];
            let w = match weight {
                Weight::None => 1.0,
                Weight::SinTheta => omega[1].abs(),
                Weight::CosTheta => omega[0].abs(),
            };
            reference += product_ft(&mu, &[t * omega[0], t * omega[1]])
                .unwrap()
                .norm_sqr()
                * w;
        }
        reference *= 2.0 * PI / n as f64;
        let s = spherical_average(&mu, t, weight, &SphereQuadrature::UniformAngle).unwrap();
        assert!(
            rel_diff(s.sigma, reference) <= 1e-6,
            "{weight:?}: {} vs {reference}",
            s.sigma
        );
    }
}

#[test]
fn spherical_average_is_self_consistent() {
    let m = mt(6);
    let mu = build_product(vec![m.clone(), m], vec![alpha_mt(); 2]).unwrap();
    for t in [5.0, 20.0, 60.0] {
        let s =
            spherical_average(&mu, t, Weight::SinTheta, &SphereQuadrature::UniformAngle).unwrap();
        // rerun with twice the accepted node count on the same composite rule
        let f = |theta: f64| {
            let (sn, cs) = theta.sin_cos();
            product_ft(&mu, &[t * cs, t * sn]).unwrap().norm_sqr() * sn.abs()
        };
        let panels = s.nodes / falconer_core::quadrature::GL_ORDER;
        let finer = 2.0 * falconer_core::quadrature::composite(&f, 0.0, PI, panels);
        assert!(rel_diff(s.sigma, finer) < 1e-6);
    }
}

#[test]
fn solid_average_decay() {
    let a = alpha_mt();
    let m = mt(8);
    let pts: Vec<(f64, f64)> = (1..=6)
        .map(|j| {
            let t = 3f64.powi(j);
            (t, solid_average(&m, t, -1.0, 1.0).unwrap().value)
        })
        .collect();
    assert!(loglog_fit(&pts).unwrap().slope <= -a + 0.1);

    let u = GridMeasure::uniform(2, 10).unwrap();
    let pts: Vec<(f64, f64)> = geometric_sweep(3.0, 100.0, 8)
        .into_iter()
        .map(|t| (t, solid_average(&u, t, -1.0, 1.0).unwrap().value))
        .collect();
    assert!((loglog_fit(&pts).unwrap().slope + 1.0).abs() <= 0.05);
}

#[test]
fn stationary_phase_on_vertical_gap() {
    let t = 100.0;
    let exact = fourier::weighted_circle_integral([0.0, 1.0], t).unwrap();
    let main = 2.0 * t.powf(-0.5) * (2.0 * PI * (t - 0.125)).cos();
    assert!((fourier::stationary_main_term([0.0, 1.0], t) - main).abs() < 1e-12);
    assert!((exact.re - main).abs() <= 0.1 * main.abs());
    assert!(exact.im.abs() < 1e-10);

    // residual / main drops by ~2 per doubling at fixed phase
    let ratio = |t: f64| {
        let e = fourier::weighted_circle_integral([0.0, 1.0], t).unwrap().re;
        let m = fourier::stationary_main_term([0.0, 1.0], t);
        ((e - m) / m).abs()
    };
    let drop = ratio(200.0) / ratio(400.0);
    assert!((1.6..=2.5).contains(&drop), "{drop}");
}

#[test]
fn stationary_phase_on_axis_gap() {
    let ts = integer_phase_t_values([1.0, 0.0], 100.0, 10000.0, 9);
    let rep = stationary_phase_check([1.0, 0.0], &ts).unwrap();
    for row in &rep.rows {
        assert_eq!(row.main, 0.0);
    }
    // off the integer phase the exact value is 2 sin(2 pi t) / (pi t)
    for t in [100.25, 1000.25, 5000.75] {
        let v = fourier::weighted_circle_integral([1.0, 0.0], t).unwrap();
        let closed = 2.0 * (2.0 * PI * t).sin() / (PI * t);
        assert!(
            (v.re - closed).abs() <= 1e-6 * closed.abs(),
            "{t}: {} vs {closed}",
            v.re
        );
    }
}

#[test]
fn angular_split_at_three_to_the_fifth() {
    let m = mt(8);
    let mu = build_product(vec![m.clone(), m], vec![alpha_mt(); 2]).unwrap();
    let c = CutoffFunction::fejer(2.0).unwrap();
    let d = angular_decomposition(&mu, 243.0, 0.1, &c).unwrap();
    assert!(d.middle <= d.cs_bound * (1.0 + 1e-6));
    // the three pieces tile the quarter circle
    let f = |theta: f64| {
        let (s, co) = theta.sin_cos();
        product_ft(&mu, &[243.0 * co, 243.0 * s])
            .unwrap()
            .norm_sqr()
    };
    let whole = falconer_core::quadrature::composite(&f, 0.0, PI / 2.0, 4096);
    assert!(rel_diff(d.total(), whole) <= 1e-8);
}

#[test]
fn unit_square_distances_cover_the_diagonal() {
    let u = GridMeasure::uniform(2, 6).unwrap();
    let mu = build_product(vec![u.clone(), u], vec![1.0, 1.0]).unwrap();
    let dm = distance_measure(&mu, 1.0 / 256.0, PairWeight::Unweighted, 1 << 26).unwrap();
    let widths = [1.0 / 64.0, 1.0 / 32.0, 1.0 / 16.0];
    let report = coverage_report(&dm, &widths).unwrap();
    // grid diameter is sqrt(2) (1 - 1/64)
    for row in &report.rows {
        assert!(
            (row.covered_length - 2f64.sqrt()).abs() <= 2.0 * row.width,
            "{row:?}"
        );
    }
}

#[test]
fn mattila_slope_for_middle_thirds_square() {
    let m = mt(8);
    let mu = build_product(vec![m.clone(), m], vec![alpha_mt(); 2]).unwrap();
    let est = mattila_truncated(
        &mu,
        243.0,
        Weight::SinTheta,
        &SphereQuadrature::UniformAngle,
        4,
    )
    .unwrap();
    assert!(est.integrand_slope.is_some());
    assert!(est.value > 0.0);
    assert!(!est.doubling_ratios.is_empty());
}

#[test]
fn noisy_power_law_fit() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let pts: Vec<(f64, f64)> = geometric_sweep(1.0, 1e4, 20)
        .into_iter()
        .map(|x| {
            (
                x,
                3.0 * x * x * (1.0 + 0.01 * (2.0 * rng.random::<f64>() - 1.0)),
            )
        })
        .collect();
    let fit = loglog_fit(&pts).unwrap();
    assert!((fit.slope - 2.0).abs() <= 0.05);
    assert!(fit.r_squared > 0.999);
}
