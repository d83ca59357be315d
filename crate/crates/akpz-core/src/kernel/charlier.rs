//! Charlier polynomials, the orthonormal functions `q_k(x, t)` and the
//! fixed-`(n, t)` kernel in Christoffel-Darboux form.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::quad::{adaptive, circle_integral, Adaptive, ContourSpec};

use super::KernelValue;

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(invalid("Charlier functions need t > 0"));
    }
    Ok(())
}

/// `C_k(x, t)` by the three-term recurrence
/// `t C_{k+1} = (k + t - x) C_k - k C_{k-1}`, `C_0 = 1`, `C_1 = 1 - x/t`.
pub fn charlier(k: usize, x: i64, t: f64) -> Result<f64> {
    check_t(t)?;
    if x < 0 {
        return Err(invalid("Charlier polynomials are evaluated at x >= 0"));
    }
    let x = x as f64;
    let (mut prev, mut cur) = (1.0, 1.0 - x / t);
    if k == 0 {
        return Ok(prev);
    }
    for j in 1..k {
        let j = j as f64;
        let next = ((j + t - x) * cur - j * prev) / t;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// `C_k(x, t) = (k!/t^k) (1/2 pi i) oint (1-w)^x e^{wt} / w^{k+1} dw` by
/// quadrature on the circle that minimises the integrand bound.
pub fn charlier_contour(k: usize, x: i64, t: f64, rule: &Adaptive) -> Result<KernelValue> {
    check_t(t)?;
    if x < 0 {
        return Err(invalid("Charlier polynomials are evaluated at x >= 0"));
    }
    let (kf, xf) = (k as f64, x as f64);
    let one = Complex64::new(1.0, 0.0);
    let lf = move |w: Complex64| xf * (one - w).ln() + w * t - (kf + 1.0) * w.ln();
    // radius minimising the largest term on the circle
    let mut best = (f64::INFINITY, 1.0);
    for i in 0..64 {
        let r = 1e-3 * libm::pow(5e4, i as f64 / 63.0);
        let c = ContourSpec::new(Complex64::new(0.0, 0.0), r, 64);
        let m = (0..64).map(|j| lf(c.node(j).0).re).fold(f64::NEG_INFINITY, f64::max) + libm::log(r);
        if m < best.0 {
            best = (m, r);
        }
    }
    let r = best.1;
    let lpre = libm::lgamma(kf + 1.0) - kf * libm::log(t);
    let q = adaptive(rule, |n| {
        let c = ContourSpec::new(Complex64::new(0.0, 0.0), r, n);
        circle_integral(&c, |w| (lf(w) + lpre).exp())
    })?;
    super::check_precision(q.value.re, q.est_error, q.nodes)?;
    Ok(KernelValue {
        value: q.value.re,
        est_error: q.est_error,
    })
}

/// `ln w_t(x) = -t + x ln t - ln x!`.
pub fn log_weight(x: i64, t: f64) -> f64 {
    -t + (x as f64) * libm::log(t) - libm::lgamma(x as f64 + 1.0)
}

const BIG: f64 = 1e150;

/// `m e^s` without underflowing an intermediate `e^s`.
fn scaled(m: f64, s: f64) -> f64 {
    if m == 0.0 {
        return 0.0;
    }
    libm::copysign(libm::exp(s + libm::log(libm::fabs(m))), m)
}

/// `q_0(x,t), ..., q_kmax(x,t)` with
/// `q_k = w_t(x)^{1/2} t^{k/2} / sqrt(k!) C_k(x, t)`.
///
/// Forward recurrence in `k` is stable up to the turning point
/// `(sqrt x + sqrt t)^2`; beyond it the minimal solution is obtained by
/// backward (Miller) recurrence matched to the forward values. Magnitudes are
/// carried as mantissa plus log scale, so nothing overflows for `x, k, t` in
/// the ten thousands; values below the `f64` range come out as zero.
pub fn q_all(kmax: usize, x: i64, t: f64) -> Result<Vec<f64>> {
    check_t(t)?;
    if x < 0 {
        return Err(invalid("q_k(x, t) needs x >= 0"));
    }
    let xf = x as f64;
    let turn = libm::pow(libm::sqrt(xf) + libm::sqrt(t), 2.0);
    let kfwd = if (kmax as f64) <= turn { kmax } else { (turn as usize).max(1) };

    // forward: mantissa m_k and log scale s_k
    let mut m = vec![0.0f64; kfwd + 1];
    let mut s = vec![0.0f64; kfwd + 1];
    let mut scale = 0.5 * log_weight(x, t);
    m[0] = 1.0;
    s[0] = scale;
    let (mut a, mut b) = (0.0f64, 1.0f64); // m_{k-1}, m_k in the current scale
    for k in 0..kfwd {
        let kf = k as f64;
        let next = ((kf + t - xf) * b - libm::sqrt(kf * t) * a) / libm::sqrt((kf + 1.0) * t);
        a = b;
        b = next;
        if libm::fabs(b) > BIG {
            a /= BIG;
            b /= BIG;
            scale += libm::log(BIG);
        }
        m[k + 1] = b;
        s[k + 1] = scale;
    }
    let mut out: Vec<f64> = (0..=kfwd).map(|k| scaled(m[k], s[k])).collect();
    if kfwd == kmax {
        return Ok(out);
    }

    // backward from well past kmax
    let top = kmax + 100 + kmax / 2;
    let k0 = kfwd;
    let mut bm = vec![0.0f64; top + 2];
    let mut bs = vec![0.0f64; top + 2];
    bm[top] = 1.0;
    let mut bscale = 0.0;
    let (mut hi, mut cur) = (0.0f64, 1.0f64); // b_{k+1}, b_k
    for k in (k0.saturating_sub(1) + 1..=top).rev() {
        let kf = k as f64;
        // sqrt(k t) b_{k-1} = (k + t - x) b_k - sqrt((k+1) t) b_{k+1}
        let prev = ((kf + t - xf) * cur - libm::sqrt((kf + 1.0) * t) * hi) / libm::sqrt(kf * t);
        hi = cur;
        cur = prev;
        if libm::fabs(cur) > BIG {
            hi /= BIG;
            cur /= BIG;
            bscale += libm::log(BIG);
        }
        bm[k - 1] = cur;
        bs[k - 1] = bscale;
    }
    // match on k0 - 1 and k0 by least squares in a common scale
    let ks = [k0 - 1, k0];
    let ref_s = bs[k0 - 1];
    let fwd_s = s[k0];
    let mut num = 0.0;
    let mut den = 0.0;
    for &k in &ks {
        let bv = bm[k] * libm::exp(bs[k] - ref_s);
        let fv = m[k] * libm::exp(s[k] - fwd_s);
        num += fv * bv;
        den += bv * bv;
    }
    if den == 0.0 {
        return Err(invalid("backward recurrence lost all significance"));
    }
    let c = num / den;
    out.truncate(k0 + 1);
    for k in k0 + 1..=kmax {
        out.push(scaled(c * bm[k], bs[k] - ref_s + fwd_s));
    }
    Ok(out)
}

/// `q_k(x, t)`.
pub fn q_fn(k: usize, x: i64, t: f64) -> Result<f64> {
    Ok(q_all(k, x, t)?[k])
}

/// `K_{n,t}(x, y) = sqrt(n t) (q_{n-1}(x) q_n(y) - q_n(x) q_{n-1}(y)) / (x - y)`,
/// and `sum_{k<n} q_k(x)^2` on the diagonal. Symmetric gauge; the space-time
/// kernel at equal `(n, t)` is `sqrt(w_t(x)/w_t(y)) K_{n,t}(x, y)`.
pub fn kernel_fixed(n: usize, t: f64, x: i64, y: i64) -> Result<KernelValue> {
    if n == 0 {
        return Err(invalid("need n >= 1"));
    }
    if x < 0 || y < 0 {
        return Ok(KernelValue::exact(0.0));
    }
    let qx = q_all(n, x, t)?;
    let value = if x == y {
        qx[..n].iter().map(|v| v * v).sum()
    } else {
        let qy = q_all(n, y, t)?;
        libm::sqrt(n as f64 * t) * (qx[n - 1] * qy[n] - qx[n] * qy[n - 1]) / ((x - y) as f64)
    };
    Ok(KernelValue::exact(value))
}

/// Rows `K_{n,t}(x, y)` for all `x, y` in `0..=xmax`, sharing the `q` tables.
pub fn kernel_fixed_matrix(n: usize, t: f64, xmax: i64) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(invalid("need n >= 1"));
    }
    let q: Vec<Vec<f64>> = (0..=xmax).map(|x| q_all(n, x, t)).collect::<Result<_>>()?;
    let c = libm::sqrt(n as f64 * t);
    let mut out = vec![vec![0.0; (xmax + 1) as usize]; (xmax + 1) as usize];
    for x in 0..=xmax as usize {
        for y in 0..=xmax as usize {
            out[x][y] = if x == y {
                q[x][..n].iter().map(|v| v * v).sum()
            } else {
                c * (q[x][n - 1] * q[y][n] - q[x][n] * q[y][n - 1]) / (x as f64 - y as f64)
            };
        }
    }
    Ok(out)
}

/// Truncation point for sums over `x >= 0` against the Poisson-type weight
/// with `n` particles: past the right edge `(sqrt n + sqrt t)^2` of the
/// support by a wide margin, so the mass beyond it is below `1e-30`.
pub fn tail_cutoff(n: usize, t: f64) -> i64 {
    let m = libm::pow(libm::sqrt(n as f64) + libm::sqrt(t), 2.0);
    (m + 14.0 * libm::sqrt(m + 1.0) + 40.0) as i64
}

/// Exact variance of the number of level-`n` particles at shifted positions
/// `> m`, `sum_{x > m} sum_{y <= m} K_{n,t}(x, y)^2`.
pub fn height_variance(n: usize, t: f64, m: i64) -> Result<f64> {
    let cut = tail_cutoff(n, t).max(m + 1);
    let qs: Vec<Vec<f64>> = (0..=cut).map(|x| q_all(n, x, t)).collect::<Result<_>>()?;
    let c = libm::sqrt(n as f64 * t);
    let mut acc = 0.0;
    for x in (m + 1).max(0)..=cut {
        let qx = &qs[x as usize];
        for y in 0..=m.min(cut) {
            let qy = &qs[y as usize];
            let k = c * (qx[n - 1] * qy[n] - qx[n] * qy[n - 1]) / ((x - y) as f64);
            acc += k * k;
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `sum_j (-1)^j binom(k,j) binom(x,j) j! t^{-j}`
    fn explicit(k: usize, x: i64, t: f64) -> f64 {
        let mut acc = 0.0;
        let mut term = 1.0;
        for j in 0..=k.min(x as usize) {
            if j > 0 {
                let jf = j as f64;
                term *= -((k as f64 - jf + 1.0) * (x as f64 - jf + 1.0)) / (jf * t);
            }
            acc += term;
        }
        acc
    }

    #[test]
    fn small_values() {
        assert_eq!(charlier(0, 7, 2.0).unwrap(), 1.0);
        assert!((charlier(1, 3, 2.0).unwrap() + 0.5).abs() < 1e-15);
        assert!((charlier(2, 3, 2.0).unwrap() + 0.5).abs() < 1e-15);
        assert!(charlier(1, 3, 0.0).is_err());
    }

    #[test]
    fn recurrence_matches_explicit_sum() {
        for k in 0..12 {
            for x in 0..15 {
                for &t in &[0.5, 2.0, 7.0] {
                    let a = charlier(k, x, t).unwrap();
                    let b = explicit(k, x, t);
                    assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0), "{k} {x} {t}: {a} {b}");
                }
            }
        }
    }

    #[test]
    fn symmetry_in_degree_and_argument() {
        for k in 0..10 {
            for x in 0..10 {
                let a = charlier(k, x, 3.0).unwrap();
                let b = charlier(x as usize, k as i64, 3.0).unwrap();
                assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
            }
        }
    }

    #[test]
    fn q_zero_is_root_weight() {
        for x in 0..30 {
            let q = q_fn(0, x, 4.0).unwrap();
            assert!((q * q - libm::exp(log_weight(x, 4.0))).abs() < 1e-16);
        }
    }

    #[test]
    fn q_symmetric_and_no_overflow() {
        for k in 0..25 {
            for x in 0..25 {
                let a = q_fn(k, x, 6.0).unwrap();
                let b = q_fn(x as usize, k as i64, 6.0).unwrap();
                assert!((a - b).abs() < 1e-12, "{k} {x}: {a} {b}");
            }
        }
        let v = q_all(10_000, 10_000, 10_000.0).unwrap();
        assert!(v.iter().all(|a| a.is_finite()));
        let v = q_all(10_000, 3, 1.0).unwrap();
        assert!(v.iter().all(|a| a.is_finite()));
    }

    #[test]
    fn backward_branch_is_normalised() {
        // k beyond the turning point (sqrt 5 + sqrt 2)^2 ~ 13.3
        let qs = q_all(60, 5, 2.0).unwrap();
        let sym: Vec<f64> = (0..=60).map(|k| q_all(5, k, 2.0).unwrap()[5]).collect();
        for k in 0..=60 {
            assert!((qs[k] - sym[k]).abs() <= 1e-12 * sym[k].abs().max(1e-300) + 1e-300, "{k}");
        }
    }

    #[test]
    fn one_particle_diagonal() {
        let t = 2.5;
        for x in 0..20 {
            let k = kernel_fixed(1, t, x, x).unwrap().value;
            assert!((k - libm::exp(log_weight(x, t))).abs() < 1e-15);
        }
    }
}
