//! Stochastic evolution of interlacing arrays.
//!
//! * continuous time: every particle carries a rate one clock, jumps right by
//!   one, is blocked by the level below and pushes the diagonal string above;
//! * discrete time, sequential update: four Toeplitz step families, levels
//!   updated from 1 to n given the already updated level below;
//! * discrete time, parallel update with `1 + beta_t / z`, and its Aztec
//!   diamond specialisation;
//! * the TASEP simulator used as an independent check of the leftmost row.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Exp, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::interlacing::{offset, InterlacingArray};
use crate::rng::RngStream;
use crate::transfer::Symbol;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum StepFamily {
    /// `1 + beta / z`: Bernoulli jumps to the right.
    BernoulliRight(f64),
    /// `1 + beta z`: Bernoulli jumps to the left.
    BernoulliLeft(f64),
    /// `(1 - gamma / z)^{-1}`: geometric jumps to the right.
    GeometricRight(f64),
    /// `(1 - gamma z)^{-1}`: geometric jumps to the left.
    GeometricLeft(f64),
}

impl StepFamily {
    pub fn symbol(&self) -> Symbol<f64> {
        match *self {
            StepFamily::BernoulliRight(b) => Symbol::BernoulliRight(b),
            StepFamily::BernoulliLeft(b) => Symbol::BernoulliLeft(b),
            StepFamily::GeometricRight(g) => Symbol::GeometricRight(g),
            StepFamily::GeometricLeft(g) => Symbol::GeometricLeft(g),
        }
    }
}

/// One step family together with the level weights `alpha_1..alpha_n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepLaw {
    pub family: StepFamily,
    pub alphas: Vec<f64>,
}

impl StepLaw {
    pub fn new(family: StepFamily, alphas: Vec<f64>) -> Result<Self> {
        if alphas.is_empty() || alphas.iter().any(|&a| !(a > 0.0) || !a.is_finite()) {
            return Err(invalid("level weights must be positive and finite"));
        }
        let amin = alphas.iter().cloned().fold(f64::INFINITY, f64::min);
        let amax = alphas.iter().cloned().fold(0.0, f64::max);
        match family {
            StepFamily::BernoulliRight(b) | StepFamily::BernoulliLeft(b) => {
                if !(b > 0.0) || !b.is_finite() {
                    return Err(invalid("beta must be positive"));
                }
            }
            StepFamily::GeometricLeft(g) => {
                if !(g > 0.0 && g < amin) {
                    return Err(invalid("need 0 < gamma+ < min alpha"));
                }
            }
            StepFamily::GeometricRight(g) => {
                if !(g > 0.0 && g * amax < 1.0) {
                    return Err(invalid("need 0 < gamma- < min 1/alpha"));
                }
            }
        }
        Ok(StepLaw { family, alphas })
    }

    /// All level weights equal to one.
    pub fn uniform(family: StepFamily, n: usize) -> Result<Self> {
        StepLaw::new(family, vec![1.0; n])
    }
}

fn check_valid(a: &InterlacingArray) -> Result<()> {
    a.validate()
        .map_err(|v| invalid(alloc::format!("input array: {v}")))
}

// ---------------------------------------------------------------------------
// continuous time

/// A pushing move of the continuous-time chain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CtmcEvent {
    pub t: f64,
    pub k: usize,
    pub m: usize,
    /// Length of the pushed string; 0 when the clock ring was blocked.
    pub c: usize,
}

/// Continuous-time blocking/pushing chain on `n` levels.
///
/// All `n(n+1)/2` clocks have rate one, so an event picks a uniform particle.
/// Blocked rings are kept: they consume time exactly like in the generator.
#[derive(Clone, Debug)]
pub struct Ctmc {
    state: InterlacingArray,
    level_of: Vec<u32>,
    time: f64,
}

impl Ctmc {
    pub fn new(state: InterlacingArray) -> Result<Self> {
        check_valid(&state)?;
        let n = state.n();
        let mut level_of = Vec::with_capacity(offset(n + 1));
        for m in 1..=n {
            for _ in 0..m {
                level_of.push(m as u32);
            }
        }
        Ok(Ctmc {
            state,
            level_of,
            time: 0.0,
        })
    }

    pub fn packed(n: usize) -> Result<Self> {
        Ctmc::new(InterlacingArray::packed(n)?)
    }

    pub fn state(&self) -> &InterlacingArray {
        &self.state
    }

    pub fn into_state(self) -> InterlacingArray {
        self.state
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn total_rate(&self) -> f64 {
        self.level_of.len() as f64
    }

    /// Rings the clock of `x_k^m` and returns the number of particles moved.
    pub fn fire(&mut self, k: usize, m: usize) -> usize {
        assert!(m >= 1 && m <= self.state.n() && k >= 1 && k <= m);
        self.fire_flat(offset(m) + k - 1)
    }

    #[inline]
    fn fire_flat(&mut self, i: usize) -> usize {
        let n = self.state.n();
        let m = self.level_of[i] as usize;
        let k = i - offset(m) + 1;
        let x = self.state.flat_mut();
        let v = x[i];
        // x_k^{m-1} sits m-1 slots to the left in the flat buffer
        if m > k && x[i - (m - 1)] == v + 1 {
            return 0;
        }
        let mut j = i;
        let mut mm = m;
        let mut c = 0;
        loop {
            x[j] += 1;
            c += 1;
            if mm == n {
                break;
            }
            // x_{k+1}^{m+1} sits m + 1 slots to the right
            let up = j + mm + 1;
            if x[up] != v {
                break;
            }
            j = up;
            mm += 1;
        }
        c
    }

    /// Advances by `dt`: the number of rings is Poisson(rate * dt), each at a
    /// uniform particle.
    pub fn advance<R: Rng + ?Sized>(&mut self, dt: f64, rng: &mut R) -> Result<()> {
        if !(dt >= 0.0) || !dt.is_finite() {
            return Err(invalid("duration must be finite and >= 0"));
        }
        let mean = self.total_rate() * dt;
        if mean > 0.0 {
            let count: f64 = Poisson::new(mean)
                .map_err(|_| invalid("bad Poisson mean"))?
                .sample(rng);
            let len = self.level_of.len() as u32;
            for _ in 0..count as u64 {
                let i = rng.random_range(0..len) as usize;
                self.fire_flat(i);
            }
        }
        self.time += dt;
        debug_assert!(self.state.validate().is_ok());
        Ok(())
    }

    /// Same law as [`advance`](Self::advance) but with explicit exponential
    /// waiting times, reporting every ring (blocked ones with `c = 0`).
    pub fn advance_traced<R: Rng + ?Sized, F: FnMut(CtmcEvent)>(
        &mut self,
        dt: f64,
        rng: &mut R,
        mut log: F,
    ) -> Result<()> {
        if !(dt >= 0.0) || !dt.is_finite() {
            return Err(invalid("duration must be finite and >= 0"));
        }
        let end = self.time + dt;
        let exp = Exp::new(self.total_rate()).map_err(|_| invalid("bad rate"))?;
        let len = self.level_of.len() as u32;
        loop {
            let gap: f64 = exp.sample(rng);
            if self.time + gap > end {
                break;
            }
            self.time += gap;
            let i = rng.random_range(0..len) as usize;
            let m = self.level_of[i] as usize;
            let k = i - offset(m) + 1;
            let c = self.fire_flat(i);
            log(CtmcEvent {
                t: self.time,
                k,
                m,
                c,
            });
        }
        self.time = end;
        Ok(())
    }
}

/// Runs the continuous-time chain for `duration` from `a`.
pub fn ctmc_run(a: &InterlacingArray, duration: f64, rng: &RngStream) -> Result<InterlacingArray> {
    let mut sim = Ctmc::new(a.clone())?;
    sim.advance(duration, &mut rng.rng())?;
    Ok(sim.into_state())
}

// ---------------------------------------------------------------------------
// discrete time, sequential update

/// Samples `J` in `0..=width` with `P(J = j)` proportional to `q^j`,
/// `0 < q < 1`, by inverting the distribution function. `width = None` means
/// no upper bound.
pub fn truncated_geometric(q: f64, width: Option<u64>, u: f64) -> u64 {
    if width == Some(0) {
        return 0;
    }
    let lq = libm::log(q);
    // mass of 0..=width
    let z = match width {
        Some(w) => -libm::expm1((w as f64 + 1.0) * lq),
        None => 1.0,
    };
    let j = libm::ceil(libm::log1p(-u * z) / lq) - 1.0;
    let j = if j < 0.0 { 0 } else { j as u64 };
    match width {
        Some(w) => j.min(w),
        None => j,
    }
}

fn empty_segment(k: usize, m: usize) -> Error {
    Error::InternalInvariant(alloc::format!(
        "empty conditioning segment at (k={k}, m={m})"
    ))
}

/// One step of the sequential chain: levels are updated from 1 to n, each
/// level conditioned on the already updated level below.
pub fn seq_update<R: Rng + ?Sized>(
    a: &InterlacingArray,
    law: &StepLaw,
    rng: &mut R,
) -> Result<InterlacingArray> {
    let n = a.n();
    if law.alphas.len() < n {
        return Err(invalid("need one level weight per level"));
    }
    let mut out = a.clone();
    let mut old: Vec<i64> = Vec::with_capacity(n);
    for m in 1..=n {
        old.clear();
        old.extend_from_slice(a.level(m));
        let alpha = law.alphas[m - 1];
        let low: Vec<i64> = if m > 1 { out.level(m - 1).to_vec() } else { Vec::new() };
        // y_j of the updated level below, None when it does not exist
        let y = |j: usize| -> Option<i64> {
            if j >= 1 && j <= m - 1 {
                Some(low[j - 1])
            } else {
                None
            }
        };
        let lv = out.level_mut(m);
        for k in 1..=m {
            let x = old[k - 1];
            let new = match law.family {
                StepFamily::BernoulliRight(beta) => {
                    if y(k) == Some(x + 1) {
                        x
                    } else if y(k - 1) == Some(x + 1) {
                        x + 1
                    } else {
                        let p = beta * alpha / (1.0 + beta * alpha);
                        x + rng.random_bool(p) as i64
                    }
                }
                StepFamily::BernoulliLeft(beta) => {
                    if y(k - 1) == Some(x) {
                        x
                    } else if y(k) == Some(x) {
                        x - 1
                    } else {
                        let p = beta / (alpha + beta);
                        x - rng.random_bool(p) as i64
                    }
                }
                StepFamily::GeometricLeft(gamma) => {
                    let mut lo: Option<i64> = None;
                    if k > 1 {
                        lo = Some(old[k - 2] + 1);
                    }
                    if let Some(v) = y(k - 1) {
                        lo = Some(lo.map_or(v, |l| l.max(v)));
                    }
                    let mut hi = x;
                    if let Some(v) = y(k) {
                        hi = hi.min(v - 1);
                    }
                    if let Some(l) = lo {
                        if l > hi {
                            return Err(empty_segment(k, m));
                        }
                    }
                    let width = lo.map(|l| (hi - l) as u64);
                    let j = truncated_geometric(gamma / alpha, width, rng.random());
                    hi - j as i64
                }
                StepFamily::GeometricRight(gamma) => {
                    let mut lo = x;
                    if let Some(v) = y(k - 1) {
                        lo = lo.max(v);
                    }
                    let mut hi: Option<i64> = None;
                    if k < m {
                        hi = Some(old[k] - 1);
                    }
                    if let Some(v) = y(k) {
                        hi = Some(hi.map_or(v - 1, |h| h.min(v - 1)));
                    }
                    if let Some(h) = hi {
                        if lo > h {
                            return Err(empty_segment(k, m));
                        }
                    }
                    let width = hi.map(|h| (h - lo) as u64);
                    let j = truncated_geometric(alpha * gamma, width, rng.random());
                    lo + j as i64
                }
            };
            lv[k - 1] = new;
        }
    }
    debug_assert!(out.validate().is_ok());
    Ok(out)
}

// ---------------------------------------------------------------------------
// discrete time, parallel update

/// Relaxed interlacing of the parallel chain:
/// `x_k^m < x_k^{m-1} <= x_{k+1}^m + 1`, plus strict increase per level.
pub fn validate_relaxed(a: &InterlacingArray) -> bool {
    for m in 1..=a.n() {
        let lv = a.level(m);
        if lv.windows(2).any(|w| w[0] >= w[1]) {
            return false;
        }
        if m > 1 {
            let below = a.level(m - 1);
            for k in 1..m {
                if !(lv[k - 1] < below[k - 1] && below[k - 1] <= lv[k] + 1) {
                    return false;
                }
            }
        }
    }
    true
}

/// One step of the parallel chain with `F_t(z) = 1 + beta_t / z`.
///
/// Every particle is updated independently from the previous state. Level `m`
/// at step `t` uses `betas[t + n - m]`.
pub fn parallel_update<R: Rng + ?Sized>(
    a: &InterlacingArray,
    betas: &[f64],
    alphas: &[f64],
    t: usize,
    rng: &mut R,
) -> Result<InterlacingArray> {
    let n = a.n();
    if alphas.len() < n {
        return Err(invalid("need one level weight per level"));
    }
    if t + n - 1 >= betas.len() {
        return Err(invalid(alloc::format!(
            "schedule index {} out of range (length {})",
            t + n - 1,
            betas.len()
        )));
    }
    if betas.iter().any(|&b| !(b >= 0.0)) {
        return Err(invalid("schedule entries must be >= 0"));
    }
    let mut out = a.clone();
    for m in 1..=n {
        let beta = betas[t + n - m];
        let alpha = alphas[m - 1];
        let cur = a.level(m);
        let below: &[i64] = if m > 1 { a.level(m - 1) } else { &[] };
        let lv = out.level_mut(m);
        for k in 1..=m {
            let x = cur[k - 1];
            let mut lo = x;
            if k >= 2 {
                lo = lo.max(below[k - 2]);
            }
            let mut hi = x + 1;
            if k <= m - 1 {
                hi = hi.min(below[k - 1] - 1);
            }
            if lo > hi {
                return Err(empty_segment(k, m));
            }
            lv[k - 1] = if lo == hi {
                lo
            } else if beta == 0.0 {
                x
            } else {
                let p = alpha * beta / (1.0 + alpha * beta);
                x + rng.random_bool(p) as i64
            };
        }
    }
    debug_assert!(validate_relaxed(&out));
    Ok(out)
}

/// Schedule `beta_k = beta` for `k >= n - 1` and `0` below, long enough for
/// `n` steps.
pub fn aztec_schedule(n: usize, beta: f64) -> Vec<f64> {
    (0..2 * n)
        .map(|k| if k + 1 >= n { beta } else { 0.0 })
        .collect()
}

/// Domino shuffling of the Aztec diamond of size `n` as a parallel chain:
/// all `alpha = 1`, packed start, `n` steps.
pub fn aztec_shuffle<R: Rng + ?Sized>(n: usize, beta: f64, rng: &mut R) -> Result<InterlacingArray> {
    if n == 0 {
        return Err(invalid("size must be >= 1"));
    }
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(invalid("beta must be positive"));
    }
    let betas = aztec_schedule(n, beta);
    let alphas = vec![1.0; n];
    let mut a = InterlacingArray::packed(n)?;
    for t in 0..n {
        a = parallel_update(&a, &betas, &alphas, t, rng)?;
    }
    Ok(a)
}

// ---------------------------------------------------------------------------
// projections and the TASEP reference

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Leftmost,
    Rightmost,
}

pub fn project_row(a: &InterlacingArray, which: Side) -> Vec<i64> {
    match which {
        Side::Leftmost => a.leftmost(),
        Side::Rightmost => a.rightmost(),
    }
}

/// Direct TASEP with step initial condition `x_m(0) = -m`: particle `m`
/// jumps right at rate one unless particle `m-1` occupies the target.
pub fn tasep_reference<R: Rng + ?Sized>(n: usize, t: f64, rng: &mut R) -> Result<Vec<i64>> {
    if n == 0 {
        return Err(invalid("need n >= 1"));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(invalid("time must be finite and >= 0"));
    }
    let mut x: Vec<i64> = (1..=n as i64).map(|m| -m).collect();
    let mean = n as f64 * t;
    if mean > 0.0 {
        let count: f64 = Poisson::new(mean)
            .map_err(|_| invalid("bad Poisson mean"))?
            .sample(rng);
        for _ in 0..count as u64 {
            let i = rng.random_range(0..n);
            if i == 0 || x[i - 1] != x[i] + 1 {
                x[i] += 1;
            }
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn push_string_from_bottom() {
        let mut c = Ctmc::packed(3).unwrap();
        assert_eq!(c.fire(1, 1), 3);
        assert_eq!(c.state().levels(), vec![vec![0], vec![-2, 0], vec![-3, -2, 0]]);
        assert!(c.state().validate().is_ok());
    }

    #[test]
    fn blocked_by_level_below() {
        let mut c = Ctmc::packed(2).unwrap();
        assert_eq!(c.fire(1, 2), 0);
        assert_eq!(c.state(), &InterlacingArray::packed(2).unwrap());
    }

    #[test]
    fn zero_duration_is_identity() {
        let a = InterlacingArray::packed(4).unwrap();
        assert_eq!(ctmc_run(&a, 0.0, &RngStream::new(1, 0)).unwrap(), a);
    }

    #[test]
    fn truncated_geometric_edges() {
        assert_eq!(truncated_geometric(0.5, Some(0), 0.99), 0);
        assert_eq!(truncated_geometric(0.5, Some(3), 0.0), 0);
        assert_eq!(truncated_geometric(0.5, Some(3), 0.999_999), 3);
        // P(J=0) = 1/2 untruncated
        assert_eq!(truncated_geometric(0.5, None, 0.49), 0);
        assert_eq!(truncated_geometric(0.5, None, 0.51), 1);
    }

    #[test]
    fn aztec_schedule_shape() {
        assert_eq!(aztec_schedule(3, 2.0), vec![0.0, 0.0, 2.0, 2.0, 2.0, 2.0]);
    }

    #[test]
    fn frozen_level_when_beta_zero() {
        let a = InterlacingArray::packed(3).unwrap();
        let mut r = RngStream::new(3, 0).rng();
        // level m reads betas[t + n - m]; with t = 0 only level 1 sees beta
        let b = parallel_update(&a, &[0.0, 0.0, 5.0, 5.0], &[1.0; 3], 0, &mut r).unwrap();
        assert_eq!(b.level(2), a.level(2));
        assert_eq!(b.level(3), a.level(3));
        assert!(parallel_update(&a, &[1.0, 1.0], &[1.0; 3], 0, &mut r).is_err());
    }
}
