//! The determinantal correlation kernel.
//!
//! Two kernels appear throughout:
//!
//! * `calK(x1, n1, t1; x2, n2, t2)` in particle coordinates (level `n` lives on
//!   `x >= -n`), whose determinants give joint occupation probabilities;
//! * the shifted kernel `K(x1, n1, t1; x2, n2, t2) = (-1)^{n1-n2}
//!   calK(x1 - n1, n1, t1; x2 - n2, n2, t2)` on `x >= 0`.
//!
//! `K` is evaluated from
//!
//! ```text
//! K = (1/(2 pi i)^2) oint_{G1} dz oint_{G0} dw  F(z) G(w) / (w - z)  [+ R if (n1,t1) < (n2,t2)]
//! F(z) = z^{n1} e^{t1 (1-z)} (1-z)^{-x1-1},   G(w) = e^{-t2 (1-w)} (1-w)^{x2} w^{-n2}
//! ```
//!
//! with `G0` around 0 and `G1` around 1. Neither factor has an essential
//! singularity, so `t = 0` is fine. The circles are chosen per call to
//! minimise the size of the integrand; when the `z` circle is allowed to
//! swallow the `w` circle, the residue at `z = w` is added back exactly.
//! `R` is a residue at `z = 1` and is summed in closed form.

pub mod charlier;

use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::interlacing::{LozengeType, SpaceTimePoint};
use crate::linalg::det;
use crate::quad::{adaptive, Adaptive, ContourSpec};

pub use charlier::{charlier, charlier_contour, height_variance, kernel_fixed, log_weight, q_all, q_fn};

/// A kernel value with its quadrature error estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    pub value: f64,
    pub est_error: f64,
}

impl KernelValue {
    pub fn exact(value: f64) -> Self {
        KernelValue {
            value,
            est_error: 0.0,
        }
    }
}

/// Which representation evaluates the kernel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Repr {
    /// Double contour; Charlier at equal `(n, t)` if quadrature fails.
    Auto,
    /// Double contour in the `F`, `G` form above.
    Contour,
    /// Double contour in the original variables, with the essential
    /// singularities `e^{t1/w}`, `e^{-t2/z}`. Slow and less accurate for large
    /// `t`; kept as an independent check.
    Literal,
    /// Christoffel-Darboux form; only for `(n1, t1) = (n2, t2)`, `t > 0`.
    Charlier,
}

/// Forces the precedence branch (needed to differentiate across `t1 = t2`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Auto,
    Precedes,
    NotPrecedes,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelOptions {
    pub repr: Repr,
    pub branch: Branch,
    /// Node doubling for the double integral (nodes per circle).
    pub double: Adaptive,
    /// Node doubling for single integrals.
    pub single: Adaptive,
}

impl Default for KernelOptions {
    fn default() -> Self {
        KernelOptions {
            repr: Repr::Auto,
            branch: Branch::Auto,
            double: Adaptive {
                start: 64,
                max: 1 << 12,
                rtol: 1e-12,
            },
            single: Adaptive::default(),
        }
    }
}

/// `(n1, t1) < (n2, t2)` iff `n1 <= n2`, `t1 >= t2` and the pairs differ.
pub fn precedes(n1: usize, t1: f64, n2: usize, t2: f64) -> bool {
    n1 <= n2 && t1 >= t2 && (n1, t1) != (n2, t2)
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(invalid("time must be finite and >= 0"));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// exact pieces

/// Generalised binomial coefficient `b (b-1) ... (b-j+1) / j!`.
fn binom(b: i64, j: usize) -> f64 {
    let mut acc = 1.0;
    for i in 0..j {
        acc *= (b - i as i64) as f64 / (i + 1) as f64;
    }
    acc
}

/// `[u^k] (1 + u)^a e^{c u}`.
fn coeff_binom_exp(k: i64, a: i64, c: f64) -> f64 {
    if k < 0 {
        return 0.0;
    }
    let k = k as usize;
    let mut acc = 0.0;
    // c^{k-j}/(k-j)! built from j = k downwards
    let mut pw = 1.0;
    for j in (0..=k).rev() {
        acc += binom(a, j) * pw;
        let m = (k - j + 1) as f64;
        pw *= c / m;
    }
    acc
}

/// Residue at `z = 1` of `z^{n1-n2} e^{(t1-t2)(1-z)} (1-z)^{x2-x1-1}`.
fn precedence_term(x1: i64, n1: usize, t1: f64, x2: i64, n2: usize, t2: f64) -> f64 {
    let k = x1 - x2;
    if k < 0 {
        return 0.0;
    }
    let sign = if (k + 1) % 2 == 0 { 1.0 } else { -1.0 };
    sign * coeff_binom_exp(k, n1 as i64 - n2 as i64, t2 - t1)
}

/// Residue at `w = 0` of `F(w) G(w)`.
fn nested_correction(x1: i64, n1: usize, t1: f64, x2: i64, n2: usize, t2: f64) -> f64 {
    let k = n2 as i64 - n1 as i64 - 1;
    if k < 0 {
        return 0.0;
    }
    // e^{t1-t2} [w^k] e^{-(t1-t2) w} (1-w)^{x2-x1-1}; (1-w)^b = (1+u)^b at u = -w
    let b = x2 - x1 - 1;
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    libm::exp(t1 - t2) * sign * coeff_binom_exp(k, b, t1 - t2)
}

// ---------------------------------------------------------------------------
// contour selection

#[derive(Clone, Copy, Debug)]
struct Placement {
    z: ContourSpec,
    w: ContourSpec,
    nested: bool,
}

const PROBE: usize = 64;

fn log_max_on(center: f64, r: f64, f: &dyn Fn(Complex64) -> f64) -> f64 {
    let c = ContourSpec::new(Complex64::new(center, 0.0), r, PROBE);
    let mut m = f64::NEG_INFINITY;
    for j in 0..PROBE {
        let (z, _) = c.node(j);
        let v = f(z);
        if v > m {
            m = v;
        }
    }
    m
}

fn geometric_grid(a: f64, b: f64, k: usize) -> Vec<f64> {
    let q = libm::pow(b / a, 1.0 / (k - 1) as f64);
    (0..k).map(|i| a * libm::pow(q, i as f64)).collect()
}

/// Picks circles for `z` (around 1) and `w` (around 0) minimising
/// `max|F| max|G| r0 r1 / dist`, among disjoint pairs and, if allowed,
/// pairs with the `w` circle inside the `z` circle.
fn place(lf: &dyn Fn(Complex64) -> f64, lg: &dyn Fn(Complex64) -> f64, allow_nested: bool, cap: usize) -> Placement {
    let small = geometric_grid(0.02, 0.96, 24);
    let fz_small: Vec<f64> = small.iter().map(|&r| log_max_on(1.0, r, lf)).collect();
    let gw_small: Vec<f64> = small.iter().map(|&r| log_max_on(0.0, r, lg)).collect();
    let nodes_for = |rho: f64| 40.0 / -libm::log(rho);
    let mut best = (f64::INFINITY, 0.5, 0.45, false);
    for (i, &r1) in small.iter().enumerate() {
        for (j, &r0) in small.iter().enumerate() {
            let d = 1.0 - r0 - r1;
            if d < 0.02 {
                continue;
            }
            let rmax = r0.max(r1);
            if nodes_for(rmax / (rmax + d)) > cap as f64 {
                continue;
            }
            let v = fz_small[i] + gw_small[j] + libm::log(r0 * r1 / d);
            if v < best.0 {
                best = (v, r1, r0, false);
            }
        }
    }
    if allow_nested {
        let big = geometric_grid(1.05, 12.0, 24);
        let inner = geometric_grid(0.02, 10.0, 28);
        let fz_big: Vec<f64> = big.iter().map(|&r| log_max_on(1.0, r, lf)).collect();
        let gw_in: Vec<f64> = inner.iter().map(|&r| log_max_on(0.0, r, lg)).collect();
        for (i, &rz) in big.iter().enumerate() {
            for (j, &r0) in inner.iter().enumerate() {
                let d = rz - 1.0 - r0;
                if d < 0.02 * rz {
                    continue;
                }
                let rho = ((1.0 + r0) / rz).max(r0 / (rz - 1.0));
                if nodes_for(rho) > cap as f64 {
                    continue;
                }
                let v = fz_big[i] + gw_in[j] + libm::log(r0 * rz / d);
                if v < best.0 {
                    best = (v, rz, r0, true);
                }
            }
        }
    }
    Placement {
        z: ContourSpec::new(Complex64::new(1.0, 0.0), best.1, 0),
        w: ContourSpec::new(Complex64::new(0.0, 0.0), best.2, 0),
        nested: best.3,
    }
}

/// `(1/(2 pi i)^2) oint oint F(z) G(w) / (w - z)` with `N` nodes per circle.
fn double_sum(p: &Placement, n: usize, lf: &dyn Fn(Complex64) -> Complex64, lg: &dyn Fn(Complex64) -> Complex64) -> (Complex64, f64) {
    let zc = p.z.with_nodes(n);
    let wc = p.w.with_nodes(n);
    let zs: Vec<(Complex64, Complex64)> = (0..n)
        .map(|j| {
            let (z, h) = zc.node(j);
            (z, lf(z).exp() * h)
        })
        .collect();
    let ws: Vec<(Complex64, Complex64)> = (0..n)
        .map(|j| {
            let (w, h) = wc.node(j);
            (w, lg(w).exp() * h)
        })
        .collect();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut abs = 0.0;
    for &(z, fz) in &zs {
        let mut row = Complex64::new(0.0, 0.0);
        let mut row_abs = 0.0;
        for &(w, gw) in &ws {
            let t = gw / (w - z);
            row += t;
            row_abs += t.norm();
        }
        acc += fz * row;
        abs += fz.norm() * row_abs;
    }
    (acc, abs)
}

// ---------------------------------------------------------------------------
// evaluation

/// Rounding noise from cancelling terms can pass the convergence test while
/// swamping the value; treat that as a failed quadrature.
pub(crate) fn check_precision(value: f64, est_error: f64, nodes: usize) -> Result<()> {
    if est_error > 1e-8 * value.abs().max(1.0) {
        return Err(Error::Quadrature {
            nodes,
            last_change: est_error,
            value,
        });
    }
    Ok(())
}

fn contour_shifted(x1: i64, n1: usize, t1: f64, x2: i64, n2: usize, t2: f64, prec: bool, opts: &KernelOptions) -> Result<KernelValue> {
    let single = if prec {
        precedence_term(x1, n1, t1, x2, n2, t2)
    } else {
        0.0
    };
    // F has no pole at 1 when x1 < 0, and G none at 0 when n2 = 0
    if x1 < 0 || n2 == 0 {
        return Ok(KernelValue::exact(single));
    }
    let one = Complex64::new(1.0, 0.0);
    let (a1, b1, c1) = (n1 as f64, t1, (x1 + 1) as f64);
    let (a2, b2, c2) = (n2 as f64, t2, x2 as f64);
    let lf = move |z: Complex64| a1 * z.ln() + b1 * (one - z) - c1 * (one - z).ln();
    let lg = move |w: Complex64| -b2 * (one - w) + c2 * (one - w).ln() - a2 * w.ln();
    let lf_re = move |z: Complex64| lf(z).re;
    let lg_re = move |w: Complex64| lg(w).re;
    let p = place(&lf_re, &lg_re, true, opts.double.max);
    let q = adaptive(&opts.double, |n| double_sum(&p, n, &lf, &lg))?;
    check_precision(q.value.re, q.est_error, q.nodes)?;
    let corr = if p.nested {
        nested_correction(x1, n1, t1, x2, n2, t2)
    } else {
        0.0
    };
    Ok(KernelValue {
        value: q.value.re + corr + single,
        est_error: q.est_error,
    })
}

/// `calK` in particle coordinates from the original double integral.
fn literal_calk(x1: i64, n1: usize, t1: f64, x2: i64, n2: usize, t2: f64, prec: bool, opts: &KernelOptions) -> Result<KernelValue> {
    let one = Complex64::new(1.0, 0.0);
    let (xa, xb) = (x1 as f64, x2 as f64);
    let (na, nb) = (n1 as f64, n2 as f64);
    // z around 1: e^{-t2/z} (1-z)^{-n2} z^{-x2-1}; w around 0: e^{t1/w} (1-w)^{n1} w^{x1}
    let lf = move |z: Complex64| -t2 / z - nb * (one - z).ln() - (xb + 1.0) * z.ln();
    let lg = move |w: Complex64| t1 / w + na * (one - w).ln() + xa * w.ln();
    let lf_re = move |z: Complex64| lf(z).re;
    let lg_re = move |w: Complex64| lg(w).re;
    let p = place(&lf_re, &lg_re, false, opts.double.max);
    // the original orientation is oint_{G0} dw oint_{G1} dz ... / (w - z)
    let q = adaptive(&opts.double, |n| double_sum(&p, n, &lf, &lg))?;
    let mut value = q.value.re;
    let mut err = q.est_error;
    if prec {
        let d = (x2 - x1 + 1) as f64;
        let e = n2 as f64 - n1 as f64;
        let ls = move |w: Complex64| (t1 - t2) / w - d * w.ln() - e * (one - w).ln();
        let rs = geometric_grid(0.02, 0.96, 48);
        let mut best = (f64::INFINITY, 0.5);
        for &r in &rs {
            let v = log_max_on(0.0, r, &|w| ls(w).re) + libm::log(r);
            if v < best.0 {
                best = (v, r);
            }
        }
        let s = adaptive(&opts.single, |n| {
            let c = ContourSpec::new(Complex64::new(0.0, 0.0), best.1, n);
            crate::quad::circle_integral(&c, |w| ls(w).exp())
        })?;
        value -= s.value.re;
        err += s.est_error;
    }
    Ok(KernelValue {
        value,
        est_error: err,
    })
}

/// The shifted kernel `K(x1, n1, t1; x2, n2, t2)`, `n1 >= 0`, `n2 >= 0`.
pub fn kernel_shifted(x1: i64, n1: usize, t1: f64, x2: i64, n2: usize, t2: f64, opts: &KernelOptions) -> Result<KernelValue> {
    check_time(t1)?;
    check_time(t2)?;
    let prec = match opts.branch {
        Branch::Auto => precedes(n1, t1, n2, t2),
        Branch::Precedes => true,
        Branch::NotPrecedes => false,
    };
    let same = n1 == n2 && t1 == t2;
    let charlier_shifted = || -> Result<KernelValue> {
        if !same || t1 <= 0.0 || n1 == 0 {
            return Err(invalid("the Charlier form needs equal (n, t) with t > 0 and n >= 1"));
        }
        if x1 < 0 || x2 < 0 {
            return Ok(KernelValue::exact(0.0));
        }
        let k = kernel_fixed(n1, t1, x1, x2)?;
        let g = libm::exp(0.5 * (log_weight(x1, t1) - log_weight(x2, t1)));
        Ok(KernelValue::exact(g * k.value))
    };
    match opts.repr {
        Repr::Contour => contour_shifted(x1, n1, t1, x2, n2, t2, prec, opts),
        Repr::Charlier => charlier_shifted(),
        Repr::Literal => {
            let v = literal_calk(x1 - n1 as i64, n1, t1, x2 - n2 as i64, n2, t2, prec, opts)?;
            let s = if (n1 + n2) % 2 == 0 { 1.0 } else { -1.0 };
            Ok(KernelValue {
                value: s * v.value,
                est_error: v.est_error,
            })
        }
        Repr::Auto => match contour_shifted(x1, n1, t1, x2, n2, t2, prec, opts) {
            Ok(v) => Ok(v),
            Err(e @ Error::Quadrature { .. }) => {
                if same && t1 > 0.0 && n1 > 0 && opts.branch == Branch::Auto {
                    charlier_shifted()
                } else {
                    Err(e)
                }
            }
            Err(e) => Err(e),
        },
    }
}

/// `calK(p1; p2)` in particle coordinates.
pub fn kernel_spacetime(p1: &SpaceTimePoint, p2: &SpaceTimePoint) -> Result<KernelValue> {
    kernel_spacetime_with(p1, p2, &KernelOptions::default())
}

pub fn kernel_spacetime_with(p1: &SpaceTimePoint, p2: &SpaceTimePoint, opts: &KernelOptions) -> Result<KernelValue> {
    let v = kernel_shifted(p1.x + p1.n as i64, p1.n, p1.t, p2.x + p2.n as i64, p2.n, p2.t, opts)?;
    let s = if (p1.n + p2.n) % 2 == 0 { 1.0 } else { -1.0 };
    Ok(KernelValue {
        value: s * v.value,
        est_error: v.est_error,
    })
}

/// Three-case lozenge kernel; points in particle coordinates.
pub fn lozenge_kernel(p1: &SpaceTimePoint, th1: LozengeType, p2: &SpaceTimePoint, opts: &KernelOptions) -> Result<KernelValue> {
    let (x1, n1) = (p1.x + p1.n as i64, p1.n);
    let (x2, n2) = (p2.x + p2.n as i64, p2.n);
    let (a, m, s) = match th1 {
        LozengeType::I => (x1, n1, 1.0),
        LozengeType::II => (x1, n1 - 1, -1.0),
        LozengeType::III => (x1 - 1, n1 - 1, 1.0),
    };
    let v = kernel_shifted(a, m, p1.t, x2, n2, p2.t, opts)?;
    Ok(KernelValue {
        value: s * v.value,
        est_error: v.est_error,
    })
}

/// A black (`n >= 0`) or white (`n >= 1`) triangle at `(x, n, t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Triangle {
    pub x: i64,
    pub n: usize,
    pub t: f64,
}

/// `(-1)^{x - x' + n - n'} calK(x, n, t; x', n', t')` for a black triangle `b`
/// and a white triangle `w`.
pub fn triangle_kernel(b: &Triangle, w: &Triangle, opts: &KernelOptions) -> Result<KernelValue> {
    let v = kernel_shifted(b.x + b.n as i64, b.n, b.t, w.x + w.n as i64, w.n, w.t, opts)?;
    let s = if (b.x - w.x).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    Ok(KernelValue {
        value: s * v.value,
        est_error: v.est_error,
    })
}

/// Triangles of a lozenge of type `th` at white site `(x, n, t)`.
pub fn lozenge_triangles(x: i64, n: usize, t: f64, th: LozengeType) -> (Triangle, Triangle) {
    let white = Triangle { x, n, t };
    let black = match th {
        LozengeType::I => Triangle { x, n, t },
        LozengeType::II => Triangle { x: x + 1, n: n - 1, t },
        LozengeType::III => Triangle { x, n: n - 1, t },
    };
    (black, white)
}

fn check_spacelike(points: &[SpaceTimePoint]) -> Result<()> {
    for w in points.windows(2) {
        if !(w[0].t <= w[1].t && w[0].n >= w[1].n) {
            return Err(invalid(
                "points must satisfy t_1 <= ... <= t_N and n_1 >= ... >= n_N",
            ));
        }
    }
    Ok(())
}

/// `det[calK(p_i, p_j)]`, or with lozenge types `det[K_theta(p_i, th_i; p_j)]`.
pub fn corr_det(points: &[SpaceTimePoint], types: Option<&[LozengeType]>, opts: &KernelOptions) -> Result<f64> {
    check_spacelike(points)?;
    let n = points.len();
    if let Some(ty) = types {
        if ty.len() != n {
            return Err(invalid("one lozenge type per point"));
        }
    }
    let mut m = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let v = match types {
                // conjugation by (-1)^n leaves the determinant unchanged
                None => kernel_shifted(
                    points[i].x + points[i].n as i64,
                    points[i].n,
                    points[i].t,
                    points[j].x + points[j].n as i64,
                    points[j].n,
                    points[j].t,
                    opts,
                )?,
                Some(ty) => lozenge_kernel(&points[i], ty[i], &points[j], opts)?,
            };
            m.push(v.value);
        }
    }
    Ok(det(m, n))
}

/// Relative discrepancy of `-d/dt2 K(p1; x2, n2, t2) = K(p1; x2 + 1, n2, t2)`
/// with a central difference of step `h`. The precedence branch is frozen at
/// its value at `t2` unless forced.
pub fn flux_derivative_check(p1: &SpaceTimePoint, p2: &SpaceTimePoint, h: f64, branch: Branch) -> Result<f64> {
    if !(h > 0.0) || p2.t - h < 0.0 {
        return Err(invalid("need 0 < h <= t2"));
    }
    let mut opts = KernelOptions::default();
    opts.repr = Repr::Contour;
    opts.branch = match branch {
        Branch::Auto => {
            if precedes(p1.n, p1.t, p2.n, p2.t) {
                Branch::Precedes
            } else {
                Branch::NotPrecedes
            }
        }
        b => b,
    };
    let (x1, x2) = (p1.x + p1.n as i64, p2.x + p2.n as i64);
    let k = |x: i64, t: f64| kernel_shifted(x1, p1.n, p1.t, x, p2.n, t, &opts).map(|v| v.value);
    let fd = -(k(x2, p2.t + h)? - k(x2, p2.t - h)?) / (2.0 * h);
    let rhs = k(x2 + 1, p2.t)?;
    Ok(libm::fabs(fd - rhs) / libm::fabs(rhs).max(1e-300))
}

/// `sum_{j<n2} (t1^{x1}/x1!) C_{n1-n2+j}(x1, t1) e^{-t2} t2^j/j! C_j(x2, t2)`,
/// the extended kernel for `n1 >= n2`, `t1 <= t2` (never preceding).
#[cfg_attr(not(test), allow(dead_code))]
fn kernel_extended(x1: i64, n1: usize, t1: f64, x2: i64, n2: usize, t2: f64) -> Result<f64> {
    if n1 < n2 {
        return Err(invalid("extended sum implemented for n1 >= n2"));
    }
    if x1 < 0 || x2 < 0 {
        return Ok(0.0);
    }
    let lpsi = (x1 as f64) * libm::log(t1) - libm::lgamma(x1 as f64 + 1.0);
    let mut acc = 0.0;
    for j in 0..n2 {
        let lphi = -t2 + (j as f64) * libm::log(t2) - libm::lgamma(j as f64 + 1.0);
        acc += libm::exp(lpsi + lphi) * charlier(n1 - n2 + j, x1, t1)? * charlier(j, x2, t2)?;
    }
    Ok(acc)
}
