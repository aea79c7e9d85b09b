//! The ten acceptance criteria, run in order. Each prints one line:
//! `criterion N ... PASS|FAIL (details)`. Lines go straight to stdout so
//! they show up without `--nocapture`.

use std::fs;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use falconer_cli::config::QuadratureConfig;
use falconer_cli::{run_experiment, ExperimentConfig, ExperimentKind, Sweep};
use falconer_core::fit::geometric_sweep;
use falconer_core::fourier::{integer_phase_t_values, near_zero_exponent, SphereQuadrature};
use falconer_core::geometry::{derive_delta_by_search, Rational};
use falconer_core::measures::natural_scales;
use falconer_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, details: String) -> Outcome {
    if ok {
        Ok(details)
    } else {
        Err(details)
    }
}

fn alpha_mt() -> f64 {
    2f64.ln() / 3f64.ln()
}

fn mt(level: u32) -> GridMeasure {
    build_cantor(&CantorSpec::middle_thirds(level)).unwrap()
}

fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn random_measure(rng: &mut ChaCha8Rng, max_atoms: usize) -> GridMeasure {
    let base = rng.random_range(2..=5u32);
    let n = rng.random_range(1..=max_atoms);
    // smallest level whose grid holds n atoms, plus some room
    let mut level = 1;
    while (base as u64).pow(level) < n as u64 {
        level += 1;
    }
    level += rng.random_range(0..=2);
    let size = (base as u64).pow(level);
    let mut atoms = std::collections::BTreeMap::new();
    while atoms.len() < n {
        atoms.insert(
            rng.random_range(0..size),
            rng.random_range(1..=1000u32) as f64,
        );
    }
    GridMeasure::normalized(base, level, atoms.into_iter().collect()).unwrap()
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let m = random_measure(&mut rng, 40);
        for j in 0..8 {
            let r = 2f64.powi(-j);
            let brute = additive_energy(&m, r, EnergyAlgorithm::Bruteforce).unwrap();
            let fast = additive_energy(&m, r, EnergyAlgorithm::Autocorrelation).unwrap();
            worst = worst.max(rel_diff(brute, fast));
        }
    }
    let elapsed = start.elapsed();
    check(
        worst <= 1e-10 && elapsed < Duration::from_secs(10),
        format!(
            "1600 pairs, max rel diff {worst:.2e}, {:.2}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn parseval() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    let mut largest = 0;
    for k in 0..50 {
        let m = if k % 2 == 0 {
            random_measure(&mut rng, 1024)
        } else {
            // Cantor measures up to 1024 atoms
            let base = rng.random_range(3..=6u32);
            let digits = vec![0, rng.random_range(1..base)];
            let level = rng.random_range(3..=10u32);
            build_cantor(&CantorSpec::new(base, digits, level)).unwrap()
        };
        largest = largest.max(m.len());
        let t = rng.random_range(1.0..60.0);
        let c = CutoffFunction::fejer(rng.random_range(1.5..4.0)).unwrap();
        let s = smoothed_energy(&m, t, &c).unwrap();
        worst = worst.max((s.space_side - s.fourier_side).abs());
    }
    check(
        worst <= 1e-6,
        format!("50 measures (up to {largest} atoms), max |space - fourier| {worst:.2e}"),
    )
}

fn middle_thirds_suite() -> Outcome {
    let a = alpha_mt();
    let m8 = mt(8);
    let scales: Vec<f64> = natural_scales(&m8)[..7].to_vec();
    let reg = check_regularity(&m8, a, &scales, 4.0).unwrap();
    let start = Instant::now();
    let m9 = mt(9);
    let rs: Vec<f64> = (1..=8).map(|j| 3f64.powi(-j)).collect();
    let profile = energy_profile(&m9, &rs, a).unwrap();
    let elapsed = start.elapsed();
    check(
        reg.pass && reg.c_nu <= 4.0 && profile.fitted_exponent >= a - 0.05 && elapsed < Duration::from_secs(30),
        format!(
            "C_nu {:.3}, energy exponent {:.4} >= {:.4}, excess over alpha {:+.4}, level 9 in {:.2}s",
            reg.c_nu,
            profile.fitted_exponent,
            a - 0.05,
            profile.excess(),
            elapsed.as_secs_f64()
        ),
    )
}

fn solid_average_decay() -> Outcome {
    let a = alpha_mt();
    let m = mt(8);
    let pts: Vec<(f64, f64)> = (1..=6)
        .map(|j| {
            let t = 3f64.powi(j);
            (t, solid_average(&m, t, -1.0, 1.0).unwrap().value)
        })
        .collect();
    let slope = loglog_fit(&pts).unwrap().slope;
    check(
        slope <= -a + 0.1,
        format!("slope {slope:.4} <= {:.4}", -a + 0.1),
    )
}

fn weighted_spherical_bound() -> Outcome {
    let a = alpha_mt();
    let m = mt(8);
    let mu = build_product(vec![m.clone(), m.clone()], vec![a, a]).unwrap();
    let ts = geometric_sweep(3.0, 243.0, 9);
    let series =
        spherical_series(&mu, &ts, Weight::SinTheta, &SphereQuadrature::UniformAngle).unwrap();
    let mut worst: f64 = 0.0;
    for s in &series.samples {
        let solid = solid_average(&m, s.t, -1.0, 1.0).unwrap().value;
        worst = worst.max(s.sigma / (2.0 * solid));
    }
    check(
        worst <= 1.0 + 1e-6 && series.fitted_decay <= -a + 0.1,
        format!(
            "max sigma / 2 solid {worst:.4} over {} t, decay slope {:.4} <= {:.4}",
            ts.len(),
            series.fitted_decay,
            -a + 0.1
        ),
    )
}

fn stationary_phase() -> Outcome {
    let mut slopes = Vec::new();
    for deg in [15.0f64, 30.0, 45.0, 60.0, 75.0] {
        let (s, c) = deg.to_radians().sin_cos();
        let gap = [c, s];
        let ts = integer_phase_t_values(gap, 1e2, 1e4, 13);
        let rep = stationary_phase_check(gap, &ts).unwrap();
        slopes.push(rep.residual_slope.unwrap_or(f64::INFINITY));
    }
    let axis = stationary_phase_check([1.0, 0.0], &geometric_sweep(1e2, 1e4, 13)).unwrap();
    let zero = axis.rows.iter().all(|r| r.main == 0.0);
    let worst = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    check(
        worst <= -1.4 && zero,
        format!("worst residual slope {worst:.4} over 5 gaps, axis main term zero: {zero}"),
    )
}

fn mattila_closed_forms() -> Outcome {
    let p = GridMeasure::point_mass(2, 10, 0).unwrap();
    let mu = build_product(vec![p.clone(), p], vec![0.0, 0.0]).unwrap();
    let t = 100.0;
    let q = SphereQuadrature::UniformAngle;
    let plain = mattila_truncated(&mu, t, Weight::None, &q, 4)
        .unwrap()
        .value;
    let weighted = mattila_truncated(&mu, t, Weight::SinTheta, &q, 4)
        .unwrap()
        .value;
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    let e1 = rel_diff(plain, 2.0 * pi2 * (t * t - 1.0));
    let e2 = rel_diff(weighted, 8.0 * (t * t - 1.0));
    check(
        e1 <= 1e-6 && e2 <= 1e-6,
        format!("rel errors {e1:.2e} (unweighted), {e2:.2e} (weighted)"),
    )
}

fn cauchy_schwarz_split() -> Outcome {
    let products = [
        ("3{0,2}", CantorSpec::middle_thirds(8)),
        ("5{0,2,4}", CantorSpec::new(5, vec![0, 2, 4], 6)),
        ("4{0,3}", CantorSpec::new(4, vec![0, 3], 7)),
    ];
    let cutoff = CutoffFunction::fejer(2.0).unwrap();
    // same sweep as the spherical experiment; shorter sweeps ending on a
    // base power are dominated by the resonance there
    let ts = geometric_sweep(3.0, 243.0, 9);
    let mut worst_ratio: f64 = 0.0;
    let mut gaps = Vec::new();
    let mut ok = true;
    for (name, spec) in &products {
        let mut worst_gap = f64::NEG_INFINITY;
        let m = build_cantor(spec).unwrap();
        let a = m.dimension_hint().unwrap();
        let mu = build_product(vec![m.clone(), m], vec![a, a]).unwrap();
        for gamma0 in [0.05, 0.1, 0.2] {
            let mut pts = Vec::new();
            for &t in &ts {
                let d = angular_decomposition(&mu, t, gamma0, &cutoff).unwrap();
                worst_ratio = worst_ratio.max(d.middle / d.cs_bound);
                ok &= d.middle <= d.cs_bound * (1.0 + 1e-6);
                pts.push((t, d.near_zero));
            }
            let slope = loglog_fit(&pts).unwrap().slope;
            let gap = slope - near_zero_exponent(a, gamma0);
            worst_gap = worst_gap.max(gap);
            ok &= gap <= 0.1;
        }
        gaps.push(format!("{name} {worst_gap:+.3}"));
    }
    check(
        ok,
        format!(
            "max middle / cs_bound {worst_ratio:.3e}, worst near-zero slope minus predicted (<= 0.1): {}",
            gaps.join(", ")
        ),
    )
}

fn thresholds() -> Outcome {
    let report = |dims: &[&str]| {
        let dims = dims
            .iter()
            .map(|s| s.parse::<Dimension>().unwrap())
            .collect();
        threshold_report(&ThresholdInputs {
            dims,
            regular: None,
        })
        .unwrap()
    };
    let r2 = report(&["1/2", "2/3"]);
    let r3 = report(&["0.6", "0.6", "0.6"]);
    let mut ok =
        r2.product_threshold == Rational::new(4, 3) && r3.product_threshold == Rational::new(9, 5);
    ok &= r2.product_margin.exact == Some(Rational::new(-1, 6));
    ok &= r2.imbalance_margin.and_then(|m| m.exact) == Some(Rational::new(-1, 6));
    ok &= r3.product_margin.exact == Some(Rational::new(0, 1)) && !r3.product_margin.is_positive();
    let r4 = report(&["0.7", "0.7"]);
    ok &= r4.product_margin.exact == Some(Rational::new(1, 15));
    let mut worst: f64 = 0.0;
    for (alpha, beta) in [(0.5, 8.2e-3), (0.63, 3.5e-3), (0.9, 1e-6), (0.1, 0.05)] {
        let closed = derive_delta(alpha, beta).unwrap();
        let search = derive_delta_by_search(alpha, beta, 10_000).unwrap();
        worst = worst
            .max((closed.delta - search.delta).abs())
            .max((closed.gamma0 - search.gamma0).abs());
    }
    ok &= worst <= 1e-6;
    check(
        ok,
        format!("4/3 and 9/5 exact, rational margins exact, derive_delta vs search max diff {worst:.2e}"),
    )
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}

fn determinism() -> Outcome {
    let mut config = ExperimentConfig::new(ExperimentKind::FullReport);
    config.factors = vec![CantorSpec::middle_thirds(6), CantorSpec::middle_thirds(6)];
    config.seed = Some(42);
    config.parallelism = 4;
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_experiment(&config, a.path()).unwrap();
    run_experiment(&config, b.path()).unwrap();
    let (sa, sb) = (snapshot(a.path()), snapshot(b.path()));
    let manifests = sa.iter().filter(|f| f.0.starts_with("manifest-")).count();

    let mut mc = ExperimentConfig::new(ExperimentKind::Spherical);
    mc.factors = vec![CantorSpec::middle_thirds(5); 3];
    mc.quadrature = Some(QuadratureConfig::MonteCarlo { samples: 4000 });
    mc.t_sweep = Some(Sweep {
        lo: 2.0,
        hi: 8.0,
        count: 3,
    });
    mc.seed = Some(7);
    let runs: Vec<_> = [1, 4]
        .into_iter()
        .map(|workers| {
            mc.parallelism = workers;
            let dir = tempfile::tempdir().unwrap();
            run_experiment(&mc, dir.path()).unwrap();
            snapshot(dir.path())
        })
        .collect();
    let mc_same = runs[0] == runs[1];
    check(
        sa == sb && manifests == 9 && mc_same,
        format!(
            "full report twice: {} files, {manifests} manifests, identical: {}; d = 3 Monte Carlo run identical across worker counts: {mc_same}",
            sa.len(),
            sa == sb
        ),
    )
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        ("oracle equivalence", oracle_equivalence),
        ("Parseval", parseval),
        ("middle-thirds suite", middle_thirds_suite),
        ("solid average decay", solid_average_decay),
        ("weighted spherical average bound", weighted_spherical_bound),
        ("stationary phase", stationary_phase),
        ("Mattila closed forms", mattila_closed_forms),
        ("Cauchy-Schwarz split", cauchy_schwarz_split),
        ("thresholds", thresholds),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    let mut stdout = std::io::stdout();
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let (verdict, details) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        writeln!(
            stdout,
            "criterion {:>2} {name:<34} {verdict} ({details}) [{:.1}s]",
            k + 1,
            start.elapsed().as_secs_f64()
        )
        .unwrap();
        if outcome.is_err() {
            failed.push(k + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
