//! Macroscopic geometry of the rough region.
//!
//! A point `(nu, eta, tau)` is in the domain when `sqrt(nu)`, `sqrt(eta)`,
//! `sqrt(tau)` are the sides of a nondegenerate triangle. The angles opposite
//! to them are `pi_nu`, `pi_eta`, `pi_tau`, and `Omega` is the upper
//! intersection of `|z| = sqrt(eta/tau)` with `|1 - z| = sqrt(nu/tau)`.

use core::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MacroPoint {
    pub nu: f64,
    pub eta: f64,
    pub tau: f64,
}

impl MacroPoint {
    pub fn new(nu: f64, eta: f64, tau: f64) -> Result<Self> {
        if !(nu > 0.0 && eta > 0.0 && tau > 0.0) || !(nu + eta + tau).is_finite() {
            return Err(Error::InvalidArgument("macroscopic coordinates must be positive and finite".into()));
        }
        Ok(MacroPoint { nu, eta, tau })
    }

    /// Strict triangle inequalities for the square roots.
    pub fn in_domain(&self) -> bool {
        let (a, b, c) = (libm::sqrt(self.nu), libm::sqrt(self.eta), libm::sqrt(self.tau));
        a < b + c && b < a + c && c < a + b
    }

    /// The same condition read as two circles meeting in two points.
    pub fn circles_intersect(&self) -> bool {
        let r0 = libm::sqrt(self.eta / self.tau);
        let r1 = libm::sqrt(self.nu / self.tau);
        libm::fabs(r0 - r1) < 1.0 && 1.0 < r0 + r1
    }

    /// `4 eta tau - (eta + tau - nu)^2`, positive exactly on the domain.
    pub fn discriminant(&self) -> f64 {
        let s = self.eta + self.tau - self.nu;
        4.0 * self.eta * self.tau - s * s
    }

    fn require(&self) -> Result<()> {
        if self.discriminant() > 0.0 && self.in_domain() {
            Ok(())
        } else {
            Err(Error::Domain(alloc::format!(
                "({}, {}, {}) is not in the rough region",
                self.nu,
                self.eta,
                self.tau
            )))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangleAngles {
    pub pi_nu: f64,
    pub pi_eta: f64,
    pub pi_tau: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitShapeValue {
    pub h: f64,
    pub h_nu: f64,
    pub h_eta: f64,
    pub h_tau: f64,
    /// `Im G(Omega)`.
    pub gamma: f64,
    /// `2 tau Im Omega`.
    pub kappa: f64,
}

pub fn omega(p: &MacroPoint) -> Result<Complex64> {
    p.require()?;
    let re = (p.eta + p.tau - p.nu) / (2.0 * p.tau);
    let im = libm::sqrt(p.discriminant()) / (2.0 * p.tau);
    Ok(Complex64::new(re, im))
}

/// Angles from the arguments of `Omega` and `1 - Omega`.
pub fn angles(p: &MacroPoint) -> Result<TriangleAngles> {
    let w = omega(p)?;
    let pi_nu = w.arg();
    let pi_eta = -(Complex64::new(1.0, 0.0) - w).arg();
    Ok(TriangleAngles {
        pi_nu,
        pi_eta,
        pi_tau: PI - pi_nu - pi_eta,
    })
}

/// Angles from the cosine rule.
pub fn angles_cosine(p: &MacroPoint) -> Result<TriangleAngles> {
    p.require()?;
    let (nu, eta, tau) = (p.nu, p.eta, p.tau);
    let acos = |c: f64| libm::acos(c.clamp(-1.0, 1.0));
    Ok(TriangleAngles {
        pi_nu: acos((tau + eta - nu) / (2.0 * libm::sqrt(tau * eta))),
        pi_eta: acos((tau + nu - eta) / (2.0 * libm::sqrt(tau * nu))),
        pi_tau: acos((eta + nu - tau) / (2.0 * libm::sqrt(nu * eta))),
    })
}

/// Asymptotic particle density `pi_eta / pi`.
pub fn density(p: &MacroPoint) -> Result<f64> {
    Ok(angles(p)?.pi_eta / PI)
}

pub fn limit_shape(p: &MacroPoint) -> Result<LimitShapeValue> {
    let a = angles(p)?;
    let w = omega(p)?;
    let h_tau = libm::sin(a.pi_nu) * libm::sin(a.pi_eta) / (PI * libm::sin(a.pi_tau));
    let h = (-p.nu * a.pi_eta + p.eta * (PI - a.pi_nu)) / PI + p.tau * h_tau;
    Ok(LimitShapeValue {
        h,
        h_nu: -a.pi_eta / PI,
        h_eta: 1.0 - a.pi_nu / PI,
        h_tau,
        gamma: p.tau * w.im - p.nu * a.pi_eta - p.eta * a.pi_nu,
        kappa: 2.0 * p.tau * w.im,
    })
}

/// `G(w) = tau w + nu ln(1 - w) - eta ln w` (principal logarithms).
pub fn g_fn(p: &MacroPoint, w: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    p.tau * w + p.nu * (one - w).ln() - p.eta * w.ln()
}

pub fn g_prime(p: &MacroPoint, w: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    p.tau - p.nu / (one - w) - p.eta / w
}

pub fn g_second(p: &MacroPoint, w: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    -p.nu / ((one - w) * (one - w)) + p.eta / (w * w)
}

/// `-i kappa / (Omega (1 - Omega))`.
pub fn g_second_closed(p: &MacroPoint) -> Result<Complex64> {
    let w = omega(p)?;
    let kappa = 2.0 * p.tau * w.im;
    Ok(Complex64::new(0.0, -kappa) / (w * (1.0 - w)))
}

/// `(d/dnu, d/deta, d/dtau) Omega` in closed form.
pub fn omega_gradient(p: &MacroPoint) -> Result<[Complex64; 3]> {
    let w = omega(p)?;
    let i_k = Complex64::new(0.0, 1.0 / (2.0 * p.tau * w.im));
    Ok([i_k * w, i_k * (1.0 - w), -i_k * w * (1.0 - w)])
}

fn fd<F: Fn(&MacroPoint) -> Result<Complex64>>(p: &MacroPoint, axis: usize, h: f64, f: F) -> Result<Complex64> {
    let shift = |s: f64| {
        let mut q = *p;
        match axis {
            0 => q.nu += s,
            1 => q.eta += s,
            _ => q.tau += s,
        }
        q
    };
    Ok((f(&shift(h))? - f(&shift(-h))?) / (2.0 * h))
}

/// Central-difference gradient of `Omega`.
pub fn omega_gradient_fd(p: &MacroPoint, step: f64) -> Result<[Complex64; 3]> {
    Ok([fd(p, 0, step, omega)?, fd(p, 1, step, omega)?, fd(p, 2, step, omega)?])
}

/// Largest discrepancy between the differenced `Omega`, the closed-form
/// gradient, and the relations `(1 - Omega) d_nu Omega = Omega d_eta Omega =
/// -d_tau Omega`.
pub fn burgers_check(p: &MacroPoint, step: f64) -> Result<f64> {
    let w = omega(p)?;
    let g = omega_gradient_fd(p, step)?;
    let c = omega_gradient(p)?;
    let mut r: f64 = 0.0;
    for k in 0..3 {
        r = r.max((g[k] - c[k]).norm());
    }
    let a = (1.0 - w) * g[0];
    let b = w * g[1];
    let d = -g[2];
    r = r.max((a - b).norm()).max((b - d).norm());
    Ok(r)
}

/// Central-difference slopes of the limit shape.
pub fn slopes_fd(p: &MacroPoint, step: f64) -> Result<[f64; 3]> {
    let h = |q: &MacroPoint| limit_shape(q).map(|v| Complex64::new(v.h, 0.0));
    Ok([fd(p, 0, step, h)?.re, fd(p, 1, step, h)?.re, fd(p, 2, step, h)?.re])
}

/// Central-difference `(d_nu, d_eta) Im G(Omega)`.
pub fn gamma_gradient_fd(p: &MacroPoint, step: f64) -> Result<[f64; 2]> {
    let g = |q: &MacroPoint| limit_shape(q).map(|v| Complex64::new(v.gamma, 0.0));
    Ok([fd(p, 0, step, g)?.re, fd(p, 1, step, g)?.re])
}

fn slope_domain(h_nu: f64, h_eta: f64) -> Result<()> {
    let open = |v: f64| v > 0.0 && v < 1.0;
    if open(h_nu) && open(h_eta) && open(h_nu + h_eta) {
        Ok(())
    } else {
        Err(Error::Domain("slopes must satisfy h_nu, h_eta, h_nu + h_eta in (0, 1)".into()))
    }
}

fn velocity_expr(a: f64, b: f64) -> f64 {
    -libm::sin(PI * a) * libm::sin(PI * b) / (PI * libm::sin(PI * (a + b)))
}

/// `v = -(1/pi) sin(pi h_nu) sin(pi h_eta) / sin(pi (h_nu + h_eta))` on
/// `h_nu, h_eta, h_nu + h_eta in (0, 1)`. Negative there.
pub fn growth_velocity(h_nu: f64, h_eta: f64) -> Result<f64> {
    slope_domain(h_nu, h_eta)?;
    Ok(velocity_expr(h_nu, h_eta))
}

/// The same expression at the actual slopes of the limit shape
/// (`h_nu in (-1, 0)`), where it equals `d h / d tau > 0`.
pub fn growth_speed(h_nu: f64, h_eta: f64) -> Result<f64> {
    if !(h_nu > -1.0 && h_nu < 0.0 && h_eta > 0.0 && h_eta < 1.0 && h_nu + h_eta > 0.0 && h_nu + h_eta < 1.0) {
        return Err(Error::Domain("slopes outside the rough region".into()));
    }
    Ok(velocity_expr(h_nu, h_eta))
}

/// `-4 pi^2 sin^2(pi h_nu) sin^2(pi h_eta) / sin^4(pi (h_nu + h_eta))`.
pub fn hessian_det(h_nu: f64, h_eta: f64) -> Result<f64> {
    slope_domain(h_nu, h_eta)?;
    let (a, b, s) = (
        libm::sin(PI * h_nu),
        libm::sin(PI * h_eta),
        libm::sin(PI * (h_nu + h_eta)),
    );
    Ok(-4.0 * PI * PI * a * a * b * b / (s * s * s * s))
}

/// Finite-difference Hessian determinant of the velocity expression, with
/// fourth-order stencils (the determinant cancels heavily near the edges).
pub fn hessian_det_fd(h_nu: f64, h_eta: f64, step: f64) -> f64 {
    const C2: [(f64, f64); 5] = [(-2.0, -1.0), (-1.0, 16.0), (0.0, -30.0), (1.0, 16.0), (2.0, -1.0)];
    const C1: [(f64, f64); 4] = [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)];
    let v = velocity_expr;
    let (a, b, e) = (h_nu, h_eta, step);
    let vaa: f64 = C2.iter().map(|&(k, w)| w * v(a + k * e, b)).sum::<f64>() / (12.0 * e * e);
    let vbb: f64 = C2.iter().map(|&(k, w)| w * v(a, b + k * e)).sum::<f64>() / (12.0 * e * e);
    let mut vab = 0.0;
    for &(i, wi) in &C1 {
        for &(j, wj) in &C1 {
            vab += wi * wj * v(a + i * e, b + j * e);
        }
    }
    vab /= 144.0 * e * e;
    vaa * vbb - vab * vab
}

/// Dirichlet Green function of the upper half plane.
pub fn green_covariance(w1: Complex64, w2: Complex64) -> Result<f64> {
    if !(w1.im > 0.0 && w2.im > 0.0) {
        return Err(Error::Domain("points must lie in the open upper half plane".into()));
    }
    if w1 == w2 {
        return Err(Error::Singular("coincident points".into()));
    }
    Ok(-libm::log((w1 - w2).norm() / (w1 - w2.conj()).norm()) / (2.0 * PI))
}

/// `pi (2 pi i)^{-2} int_{conj w1}^{w1} int_{conj w2}^{w2} dz1 dz2 / (z1 - z2)^2`
/// summed over the four endpoint pairs.
pub fn green_pair_sum(w1: Complex64, w2: Complex64) -> Result<f64> {
    if w1 == w2 || w1 == w2.conj() {
        return Err(Error::Singular("coincident points".into()));
    }
    let mut acc = 0.0;
    for (z1, s1) in [(w1, 1.0), (w1.conj(), -1.0)] {
        for (z2, s2) in [(w2, 1.0), (w2.conj(), -1.0)] {
            acc += s1 * s2 * libm::log((z1 - z2).norm());
        }
    }
    Ok(-acc / (4.0 * PI))
}
