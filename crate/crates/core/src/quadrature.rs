//! Tensor-product Gauss-Legendre quadrature with panel doubling.
//!
//! Each axis of a box is cut into equal panels carrying a Gauss-Legendre
//! rule. The tensor sums of two rule orders on the same panels are compared;
//! when they disagree the panel count is doubled. Integrands here are
//! Gaussians (times phases), for which the error falls geometrically once the
//! panels resolve the narrowest width.

use std::ops::{Add, Mul};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Values that can be integrated: real or complex scalars.
pub trait QuadValue: Copy + Send + Sync + Add<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// Fixed-size vector of reals integrated componentwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VecValue<const K: usize>(pub [f64; K]);

impl<const K: usize> Add for VecValue<K> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a += b;
        }
        self
    }
}

impl<const K: usize> Mul<f64> for VecValue<K> {
    type Output = Self;
    fn mul(mut self, s: f64) -> Self {
        for a in self.0.iter_mut() {
            *a *= s;
        }
        self
    }
}

impl<const K: usize> QuadValue for VecValue<K> {
    fn zero() -> Self {
        VecValue([0.0; K])
    }
    fn magnitude(self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Converged estimate together with the refinement that produced it.
#[derive(Debug, Clone, Copy)]
pub struct QuadEstimate<T> {
    pub value: T,
    /// Magnitude of the change between the last two refinements.
    pub change: f64,
    /// Panels per axis in the accepted rule.
    pub panels: usize,
}

/// Configuration of the panel-doubling product rule.
#[derive(Debug, Clone, Copy)]
pub struct ProductRule {
    pub order: usize,
    /// Lower order used for the error estimate.
    pub check_order: usize,
    pub initial_panels: usize,
    pub max_doublings: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for ProductRule {
    fn default() -> Self {
        Self {
            order: 24,
            check_order: 20,
            initial_panels: 6,
            max_doublings: 4,
            rel_tol: 1e-12,
            abs_tol: 1e-300,
        }
    }
}

impl ProductRule {
    pub fn with_tolerance(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_initial_panels(mut self, panels: usize) -> Self {
        self.initial_panels = panels.max(1);
        self
    }

    /// Integrates `f` over the box `bounds`.
    pub fn integrate<T, F, const D: usize>(&self, f: F, bounds: [(f64, f64); D]) -> Result<QuadEstimate<T>>
    where
        T: QuadValue,
        F: Fn([f64; D]) -> T + Sync,
    {
        let (gx, gw) = gauss_legendre(self.order);
        let (cx, cw) = gauss_legendre(self.check_order);
        let mut panels = self.initial_panels.max(1);
        let mut last = (T::zero(), f64::INFINITY);
        for _ in 0..=self.max_doublings {
            let value = tensor_sum(&f, &bounds, panels, &gx, &gw);
            let check = tensor_sum(&f, &bounds, panels, &cx, &cw);
            let change = (value + check * -1.0).magnitude();
            if change <= self.abs_tol.max(self.rel_tol * value.magnitude()) {
                return Ok(QuadEstimate { value, change, panels });
            }
            last = (value, change);
            panels *= 2;
        }
        Err(Error::NotConverged {
            estimate: last.0.magnitude(),
            change: last.1,
            tolerance: self.abs_tol.max(self.rel_tol * last.0.magnitude()),
            levels: self.max_doublings,
        })
    }
}

/// Nodes and weights of the composite rule on one axis.
fn axis_rule(lo: f64, hi: f64, panels: usize, gx: &[f64], gw: &[f64]) -> Vec<(f64, f64)> {
    let width = (hi - lo) / panels as f64;
    let half = 0.5 * width;
    let mut out = Vec::with_capacity(panels * gx.len());
    for k in 0..panels {
        let mid = lo + (k as f64 + 0.5) * width;
        for (x, w) in gx.iter().zip(gw) {
            out.push((mid + half * x, half * w));
        }
    }
    out
}

fn tensor_sum<T, F, const D: usize>(f: &F, bounds: &[(f64, f64); D], panels: usize, gx: &[f64], gw: &[f64]) -> T
where
    T: QuadValue,
    F: Fn([f64; D]) -> T + Sync,
{
    if D == 0 {
        return f([0.0; D]);
    }
    let axes: Vec<Vec<(f64, f64)>> = bounds
        .iter()
        .map(|&(lo, hi)| axis_rule(lo, hi, panels, gx, gw))
        .collect();
    let per_axis = axes[0].len();
    let inner_count: usize = axes[1..].iter().map(Vec::len).product();
    // One parallel task per outer node; partial sums are combined in order.
    let partials: Vec<T> = (0..per_axis)
        .into_par_iter()
        .map(|i0| {
            let (x0, w0) = axes[0][i0];
            let mut acc = T::zero();
            let mut point = [0.0; D];
            point[0] = x0;
            for flat in 0..inner_count {
                let mut rem = flat;
                let mut w = w0;
                for d in (1..D).rev() {
                    let n = axes[d].len();
                    let (x, wd) = axes[d][rem % n];
                    rem /= n;
                    point[d] = x;
                    w *= wd;
                }
                acc = acc + f(point) * w;
            }
            acc
        })
        .collect();
    partials.into_iter().fold(T::zero(), |a, b| a + b)
}
