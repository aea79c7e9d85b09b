//! Composite Gauss-Legendre rules with panel doubling.

use std::ops::{AddAssign, Mul};
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Nodes per Gauss-Legendre panel.
pub const GL_ORDER: usize = 16;

fn gauss_legendre() -> &'static ([f64; GL_ORDER], [f64; GL_ORDER]) {
    static RULE: OnceLock<([f64; GL_ORDER], [f64; GL_ORDER])> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_ORDER;
        let mut nodes = [0.0; GL_ORDER];
        let mut weights = [0.0; GL_ORDER];
        for i in 0..n {
            // Chebyshev guess, then Newton on P_n
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}

/// Integrates `f` over `[a, b]` with `panels` equal Gauss-Legendre panels.
/// Summation runs left to right, so results are reproducible bit for bit.
pub fn composite<T, F>(f: &F, a: f64, b: f64, panels: usize) -> T
where
    T: Copy + Default + AddAssign + Mul<f64, Output = T>,
    F: Fn(f64) -> T + ?Sized,
{
    let (nodes, weights) = gauss_legendre();
    let width = (b - a) / panels as f64;
    let half = 0.5 * width;
    let mut total = T::default();
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * width;
        let mut panel = T::default();
        for (x, w) in nodes.iter().zip(weights) {
            panel += f(mid + half * x) * *w;
        }
        total += panel * half;
    }
    total
}

/// Panel-doubling policy: start at `initial_panels`, double until two
/// successive estimates differ by less than `rel_tol` relative (or
/// `abs_tol` absolute), giving up past `max_panels`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Doubling {
    pub initial_panels: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for Doubling {
    fn default() -> Self {
        Doubling {
            initial_panels: 8,
            rel_tol: 1e-6,
            abs_tol: 1e-300,
            max_panels: 1 << 20,
        }
    }
}

/// A converged quadrature value together with the node count that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Converged<T> {
    pub value: T,
    pub nodes: usize,
}

pub(crate) trait Magnitude {
    fn magnitude(&self) -> f64;
}

impl Magnitude for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Magnitude for num_complex::Complex64 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

pub(crate) fn integrate<T, F>(f: &F, a: f64, b: f64, policy: Doubling) -> Result<Converged<T>>
where
    T: Copy + Default + AddAssign + Mul<f64, Output = T> + std::ops::Sub<Output = T> + Magnitude,
    F: Fn(f64) -> T + ?Sized,
{
    let mut panels = policy.initial_panels.max(1);
    let mut previous: T = composite(f, a, b, panels);
    loop {
        let next_panels = panels * 2;
        if next_panels > policy.max_panels {
            return Err(Error::Quadrature(format!(
                "no convergence on [{a}, {b}] within {} panels",
                policy.max_panels
            )));
        }
        let current: T = composite(f, a, b, next_panels);
        let diff = (current - previous).magnitude();
        if diff <= policy.rel_tol * current.magnitude() || diff <= policy.abs_tol {
            return Ok(Converged {
                value: current,
                nodes: next_panels * GL_ORDER,
            });
        }
        previous = current;
        panels = next_panels;
    }
}
