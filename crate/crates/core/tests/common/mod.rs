//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use falconer_core::{CantorSpec, GridMeasure};
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

/// Counts quadruples with `|a + b - c - d| < r` using integer index gaps.
pub fn energy_oracle(nu: &GridMeasure, r: f64) -> f64 {
    let delta = nu.resolution();
    let atoms = nu.atoms();
    let mut total = 0.0;
    for &(a, wa) in atoms {
        for &(b, wb) in atoms {
            for &(c, wc) in atoms {
                for &(d, wd) in atoms {
                    let gap = (a as i64 + b as i64 - c as i64 - d as i64).unsigned_abs();
                    if (gap as f64) * delta < r * (1.0 - 1e-9) {
                        total += wa * wb * wc * wd;
                    }
                }
            }
        }
    }
    total
}

pub fn ft_oracle(nu: &GridMeasure, xi: f64) -> Complex64 {
    nu.atoms()
        .iter()
        .zip(nu.positions())
        .map(|(&(_, w), x)| Complex64::from_polar(w, -2.0 * PI * x * xi))
        .sum()
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Random measure on a small grid with at most `max_atoms` atoms.
pub fn arb_measure(max_atoms: usize) -> impl Strategy<Value = GridMeasure> {
    (2u32..=5, 1u32..=6)
        .prop_flat_map(move |(base, level)| {
            let size = (base as u64).pow(level);
            let n = (size as usize).min(max_atoms);
            (
                Just(base),
                Just(level),
                prop::collection::btree_map(0..size, 1u32..=1000, 1..=n),
            )
        })
        .prop_map(|(base, level, atoms)| {
            let atoms = atoms.into_iter().map(|(i, w)| (i, w as f64)).collect();
            GridMeasure::normalized(base, level, atoms).unwrap()
        })
}

/// A Cantor spec with at least one digit and a moderate grid.
pub fn arb_spec(levels: std::ops::RangeInclusive<u32>) -> impl Strategy<Value = CantorSpec> {
    (2u32..=7, levels).prop_flat_map(|(base, level)| {
        prop::collection::btree_set(0..base, 1..=base as usize)
            .prop_map(move |digits| CantorSpec::new(base, digits.into_iter().collect(), level))
    })
}

/// Compensated sum, so mass checks do not inherit naive rounding drift.
pub fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}
