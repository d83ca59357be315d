//! Trapezoidal quadrature of contour integrals over circles.
//!
//! For a function analytic in an annulus around the circle the trapezoid rule
//! converges geometrically, so node doubling gives both the value and an
//! honest error estimate.

use core::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A positively oriented circle discretised with `nodes` equispaced points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    pub center: Complex64,
    pub radius: f64,
    pub nodes: usize,
}

impl ContourSpec {
    pub fn new(center: Complex64, radius: f64, nodes: usize) -> Self {
        ContourSpec {
            center,
            radius,
            nodes,
        }
    }

    /// The `j`-th node `z_j` and the weight `(z_j - c) / N`, so that
    /// `(1/2 pi i) oint f dz ~ sum_j f(z_j) * weight_j`.
    #[inline]
    pub fn node(&self, j: usize) -> (Complex64, Complex64) {
        let th = 2.0 * PI * (j as f64) / (self.nodes as f64);
        let d = Complex64::from_polar(self.radius, th);
        (self.center + d, d / (self.nodes as f64))
    }

    pub fn with_nodes(&self, nodes: usize) -> Self {
        ContourSpec { nodes, ..*self }
    }

    pub fn contains(&self, p: Complex64) -> bool {
        (p - self.center).norm() < self.radius
    }
}

/// `(1/2 pi i) oint f(z) dz` by the trapezoid rule on `c`; also returns the
/// sum of the absolute values of the terms (the rounding scale).
pub fn circle_integral<F: FnMut(Complex64) -> Complex64>(c: &ContourSpec, mut f: F) -> (Complex64, f64) {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut abs = 0.0;
    for j in 0..c.nodes {
        let (z, w) = c.node(j);
        let t = f(z) * w;
        abs += t.norm();
        acc += t;
    }
    (acc, abs)
}

/// Stopping rule for node doubling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Adaptive {
    pub start: usize,
    pub max: usize,
    /// Stop when successive values differ by less than `rtol * max(1, |I|)`.
    pub rtol: f64,
}

impl Default for Adaptive {
    fn default() -> Self {
        Adaptive {
            start: 64,
            max: 1 << 16,
            rtol: 1e-12,
        }
    }
}

/// Result of an adaptive quadrature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub value: Complex64,
    pub est_error: f64,
    pub nodes: usize,
}

/// Doubles the node count until the value settles. `eval(n)` returns the
/// `n`-node approximation and its rounding scale; differences below a few
/// hundred ulps of that scale count as converged.
pub fn adaptive<F: FnMut(usize) -> (Complex64, f64)>(rule: &Adaptive, mut eval: F) -> Result<Quadrature> {
    let mut n = rule.start.max(4);
    let (mut prev, _) = eval(n);
    loop {
        let next_n = n * 2;
        if next_n > rule.max {
            let (cur, _) = eval(n);
            return Err(Error::Quadrature {
                nodes: n,
                last_change: (cur - prev).norm(),
                value: cur.re,
            });
        }
        let (cur, abs) = eval(next_n);
        let change = (cur - prev).norm();
        let floor = 256.0 * f64::EPSILON * abs;
        let tol = rule.rtol * cur.norm().max(1.0);
        if change <= tol.max(floor) {
            return Ok(Quadrature {
                value: cur,
                est_error: change.max(floor),
                nodes: next_n,
            });
        }
        prev = cur;
        n = next_n;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residue_of_simple_pole() {
        let c = ContourSpec::new(Complex64::new(0.0, 0.0), 0.5, 64);
        let (v, _) = circle_integral(&c, |z| 1.0 / z);
        assert!((v - 1.0).norm() < 1e-14);
    }

    #[test]
    fn taylor_coefficient_of_exp() {
        // [w^3] e^w = 1/6
        let r = Adaptive::default();
        let q = adaptive(&r, |n| {
            let c = ContourSpec::new(Complex64::new(0.0, 0.0), 1.0, n);
            circle_integral(&c, |w| w.exp() / (w * w * w * w))
        })
        .unwrap();
        assert!((q.value.re - 1.0 / 6.0).abs() < 1e-14);
    }
}
