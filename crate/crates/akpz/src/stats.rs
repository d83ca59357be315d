//! Monte Carlo harness: ensembles of the continuous-time chain from the packed
//! state, and the estimators compared against the kernel and the macroscopic
//! geometry.
//!
//! Replica `r` always uses the stream `(seed, r)`, and every reduction runs in
//! replica order with pairwise summation, so reports do not depend on the
//! number of worker threads.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::Instant;

use akpz_core::dynamics::{project_row, tasep_reference, Ctmc, Side};
use akpz_core::geometry::{green_covariance, limit_shape, omega, MacroPoint};
use akpz_core::kernel::{corr_det, height_variance, KernelOptions};
use akpz_core::{LozengeType, RngStream, SpaceTimePoint};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::Result;

/// `1/(2 pi^2)`, the coefficient of `ln t` in the height variance.
pub const LOG_VARIANCE_COEFF: f64 = 1.0 / (2.0 * PI * PI);

const BOOTSTRAP_TAG: u64 = 0xb007;
const TASEP_TAG: u64 = 0x7a5e;

// ---------------------------------------------------------------------------
// reductions

pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 16 {
        v.iter().sum()
    } else {
        let (a, b) = v.split_at(v.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

pub fn mean(v: &[f64]) -> f64 {
    pairwise_sum(v) / v.len() as f64
}

/// Unbiased sample covariance.
pub fn covariance(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).collect();
    pairwise_sum(&d) / (a.len() as f64 - 1.0)
}

pub fn variance(v: &[f64]) -> f64 {
    covariance(v, v)
}

/// Standard error of the sample variance from the fourth central moment.
pub fn variance_stderr(v: &[f64]) -> f64 {
    let r = v.len() as f64;
    let m = mean(v);
    let c2: Vec<f64> = v.iter().map(|x| (x - m).powi(2)).collect();
    let c4: Vec<f64> = v.iter().map(|x| (x - m).powi(4)).collect();
    let (m2, m4) = (mean(&c2), mean(&c4));
    ((m4 - m2 * m2 * (r - 3.0) / (r - 1.0)) / r).max(0.0).sqrt()
}

/// Ordinary least squares `y = a + b x`, returns `(b, a)`.
pub fn ols(x: &[f64], y: &[f64]) -> (f64, f64) {
    let (mx, my) = (mean(x), mean(y));
    let sxy: Vec<f64> = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).collect();
    let sxx: Vec<f64> = x.iter().map(|a| (a - mx).powi(2)).collect();
    let b = pairwise_sum(&sxy) / pairwise_sum(&sxx);
    (b, my - b * mx)
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let f = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] * (1.0 - f) + sorted[i + 1] * f
    } else {
        sorted[i]
    }
}

/// `[v]` for a lattice coordinate `v = a L`, tolerant of rounding in `a L`.
pub fn lattice(v: f64) -> i64 {
    (v + 1e-9).floor() as i64
}

// ---------------------------------------------------------------------------
// replicas

/// Runs `f` on replicas `0..replicas` in parallel. Replicas not started
/// before `deadline` are skipped; the rest come back in replica order.
fn replicate<T, F>(replicas: usize, seed: u64, deadline: Option<Instant>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(RngStream) -> Result<T> + Sync,
{
    let out: Vec<Option<T>> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            if deadline.is_some_and(|d| Instant::now() > d) {
                return Ok(None);
            }
            f(RngStream::new(seed, r as u64)).map(Some)
        })
        .collect::<Result<_>>()?;
    Ok(out.into_iter().flatten().collect())
}

/// Height queries `(x, n)` to read at each stop time.
type Stops = [(f64, Vec<(i64, usize)>)];

/// One run from `packed(levels)`, reading the queries at each stop.
fn heights_along(levels: usize, stops: &Stops, stream: RngStream) -> Result<Vec<f64>> {
    let mut sim = Ctmc::packed(levels)?;
    let mut rng = stream.rng();
    let mut out = Vec::new();
    for (t, qs) in stops {
        sim.advance((t - sim.time()).max(0.0), &mut rng)?;
        for &(x, n) in qs {
            out.push(sim.state().height(x, n)? as f64);
        }
    }
    Ok(out)
}

fn column(samples: &[Vec<f64>], j: usize) -> Vec<f64> {
    samples.iter().map(|s| s[j]).collect()
}

// ---------------------------------------------------------------------------
// ensembles

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    /// Number of levels simulated.
    pub n: usize,
    pub times: Vec<f64>,
    /// Height queries `(x, n)`.
    pub query_points: Vec<(i64, usize)>,
    pub replicas: usize,
    pub seed: u64,
    /// Wall-clock budget; replicas not started in time are dropped.
    #[serde(default)]
    pub max_seconds: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryStats {
    pub x: i64,
    pub n: usize,
    pub t: f64,
    pub mean: f64,
    pub variance: f64,
    /// Standard error of the mean.
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    /// Time-major: all queries at `times[0]`, then at `times[1]`, ...
    pub queries: Vec<QueryStats>,
    /// Sample covariance between any two entries of `queries`.
    pub covariance: Vec<Vec<f64>>,
    pub replicas: usize,
    pub requested: usize,
    pub partial: bool,
    pub wall_time: f64,
}

impl EnsembleSpec {
    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("need at least one level"));
        }
        if self.replicas < 2 {
            return Err(invalid("need at least two replicas"));
        }
        if self.times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
            return Err(invalid("times must be finite and >= 0"));
        }
        if self.times.windows(2).any(|w| w[0] > w[1]) {
            return Err(invalid("times must be nondecreasing"));
        }
        if self.query_points.iter().any(|&(_, m)| m == 0 || m > self.n) {
            return Err(invalid(format!("query levels must lie in 1..={}", self.n)));
        }
        Ok(())
    }
}

pub fn run_ensemble(spec: &EnsembleSpec) -> Result<EnsembleReport> {
    spec.validate()?;
    let start = Instant::now();
    let deadline = spec
        .max_seconds
        .map(|s| start + std::time::Duration::from_secs_f64(s.max(0.0)));
    let stops: Vec<(f64, Vec<(i64, usize)>)> = spec
        .times
        .iter()
        .map(|&t| (t, spec.query_points.clone()))
        .collect();
    let samples = replicate(spec.replicas, spec.seed, deadline, |s| heights_along(spec.n, &stops, s))?;
    if samples.len() < 2 {
        return Err(invalid("fewer than two replicas finished within the time budget"));
    }
    let r = samples.len();
    let cols: Vec<Vec<f64>> = (0..stops.len() * spec.query_points.len())
        .map(|j| column(&samples, j))
        .collect();
    let mut queries = Vec::with_capacity(cols.len());
    for &t in &spec.times {
        for &(x, n) in &spec.query_points {
            let c = &cols[queries.len()];
            let v = variance(c);
            queries.push(QueryStats {
                x,
                n,
                t,
                mean: mean(c),
                variance: v,
                stderr: (v / r as f64).sqrt(),
            });
        }
    }
    let covariance = cols
        .iter()
        .map(|a| cols.iter().map(|b| covariance(a, b)).collect())
        .collect();
    Ok(EnsembleReport {
        queries,
        covariance,
        replicas: r,
        requested: spec.replicas,
        partial: r < spec.replicas,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

// ---------------------------------------------------------------------------
// variance growth

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariancePoint {
    pub x: i64,
    pub n: usize,
    pub t: f64,
    pub variance: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceSlope {
    pub lambda: f64,
    pub c: f64,
    pub points: Vec<VariancePoint>,
    pub slope: f64,
    pub intercept: f64,
    /// Bootstrap standard deviation of the slope.
    pub slope_stderr: f64,
    /// Bootstrap 95% percentile interval.
    pub ci: [f64; 2],
    pub replicas: usize,
    pub bootstrap: usize,
}

pub const BOOTSTRAP_RESAMPLES: usize = 200;

/// Height query `h([(lambda - c) t], [c t], t)` along the ray.
pub fn ray_point(lambda: f64, c: f64, t: f64) -> (i64, usize) {
    (lattice((lambda - c) * t), lattice(c * t).max(0) as usize)
}

fn check_ray(lambda: f64, c: f64, times: &[f64]) -> Result<()> {
    if !(c > 0.0) {
        return Err(invalid("c must be positive"));
    }
    let (lo, hi) = ((1.0 - c.sqrt()).powi(2), (1.0 + c.sqrt()).powi(2));
    if !(lambda > lo && lambda < hi) {
        return Err(invalid(format!("lambda must lie in ({lo}, {hi})")));
    }
    if times.len() < 3 {
        return Err(invalid("need at least three times"));
    }
    if times.windows(2).any(|w| !(w[0] < w[1])) || !(times[0] > 0.0) {
        return Err(invalid("times must be positive and increasing"));
    }
    if times.iter().any(|&t| ray_point(lambda, c, t).1 == 0) {
        return Err(invalid("c t must be at least 1 at every time"));
    }
    Ok(())
}

/// Regresses `Var h` on `ln t` along the ray `(lambda, c)` with a replica
/// bootstrap. All times come from the same runs.
pub fn variance_slope(lambda: f64, c: f64, times: &[f64], replicas: usize, seed: u64) -> Result<VarianceSlope> {
    check_ray(lambda, c, times)?;
    if replicas < 10 {
        return Err(invalid("need at least 10 replicas for a bootstrap interval"));
    }
    let pts: Vec<(i64, usize)> = times.iter().map(|&t| ray_point(lambda, c, t)).collect();
    let levels = pts.iter().map(|p| p.1).max().unwrap_or(1);
    let stops: Vec<(f64, Vec<(i64, usize)>)> = times.iter().zip(&pts).map(|(&t, &p)| (t, vec![p])).collect();
    let samples = replicate(replicas, seed, None, |s| heights_along(levels, &stops, s))?;
    slope_from_samples(lambda, c, times, &pts, &samples, seed)
}

fn slope_from_samples(
    lambda: f64,
    c: f64,
    times: &[f64],
    pts: &[(i64, usize)],
    samples: &[Vec<f64>],
    seed: u64,
) -> Result<VarianceSlope> {
    let lnt: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let cols: Vec<Vec<f64>> = (0..times.len()).map(|j| column(samples, j)).collect();
    let vars: Vec<f64> = cols.iter().map(|c| variance(c)).collect();
    let (slope, intercept) = ols(&lnt, &vars);

    let r = samples.len();
    let mut rng = RngStream::new(seed, 0).derived(BOOTSTRAP_TAG).rng();
    let mut boot = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    let mut col = vec![0.0; r];
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let idx: Vec<usize> = (0..r).map(|_| rng.random_range(0..r)).collect();
        let v: Vec<f64> = (0..times.len())
            .map(|j| {
                for (k, &i) in idx.iter().enumerate() {
                    col[k] = samples[i][j];
                }
                variance(&col)
            })
            .collect();
        boot.push(ols(&lnt, &v).0);
    }
    let sd = variance(&boot).sqrt();
    boot.sort_by(f64::total_cmp);
    let points = times
        .iter()
        .zip(pts)
        .zip(&cols)
        .map(|((&t, &(x, n)), c)| VariancePoint {
            x,
            n,
            t,
            variance: variance(c),
            stderr: variance_stderr(c),
        })
        .collect();
    Ok(VarianceSlope {
        lambda,
        c,
        points,
        slope,
        intercept,
        slope_stderr: sd,
        ci: [quantile(&boot, 0.025), quantile(&boot, 0.975)],
        replicas: r,
        bootstrap: BOOTSTRAP_RESAMPLES,
    })
}

/// Exact `Var h(x, n, t)` from the kernel double sum.
pub fn exact_height_variance(x: i64, n: usize, t: f64) -> Result<f64> {
    Ok(height_variance(n, t, x + n as i64)?)
}

/// Slope of the exact variances along the ray, same regression.
pub fn exact_variance_slope(lambda: f64, c: f64, times: &[f64]) -> Result<(f64, Vec<f64>)> {
    check_ray(lambda, c, times)?;
    let vars: Vec<f64> = times
        .iter()
        .map(|&t| {
            let (x, n) = ray_point(lambda, c, t);
            exact_height_variance(x, n, t)
        })
        .collect::<Result<_>>()?;
    let lnt: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    Ok((ols(&lnt, &vars).0, vars))
}

// ---------------------------------------------------------------------------
// limit shape

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaledHeight {
    pub point: [f64; 3],
    pub l: f64,
    pub x: i64,
    pub n: usize,
    pub t: f64,
    /// Sample mean of `h / L`.
    pub mean: f64,
    pub stderr: f64,
    pub replicas: usize,
}

/// `E h([(nu - eta) L], [eta L], tau L) / L` at any positive point.
pub fn mean_height_scaled(p: &MacroPoint, l: f64, replicas: usize, seed: u64) -> Result<ScaledHeight> {
    if !(l > 0.0) || !l.is_finite() {
        return Err(invalid("L must be positive"));
    }
    if replicas < 2 {
        return Err(invalid("need at least two replicas"));
    }
    let x = lattice((p.nu - p.eta) * l);
    let n = lattice(p.eta * l);
    if n < 1 {
        return Err(invalid("eta L must be at least 1"));
    }
    let n = n as usize;
    let t = p.tau * l;
    let stops = [(t, vec![(x, n)])];
    let hs: Vec<f64> = replicate(replicas, seed, None, |s| heights_along(n, &stops, s))?
        .into_iter()
        .map(|v| v[0] / l)
        .collect();
    Ok(ScaledHeight {
        point: [p.nu, p.eta, p.tau],
        l,
        x,
        n,
        t,
        mean: mean(&hs),
        stderr: (variance(&hs) / replicas as f64).sqrt(),
        replicas,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeError {
    pub sample: ScaledHeight,
    pub target: f64,
    pub rel_error: f64,
    pub rel_stderr: f64,
}

/// Relative distance of the scaled mean height from the limit shape.
pub fn shape_error(p: &MacroPoint, l: f64, replicas: usize, seed: u64) -> Result<ShapeError> {
    let target = limit_shape(p)?.h;
    let sample = mean_height_scaled(p, l, replicas, seed)?;
    Ok(ShapeError {
        rel_error: (sample.mean - target).abs() / target,
        rel_stderr: sample.stderr / target,
        target,
        sample,
    })
}

// ---------------------------------------------------------------------------
// fluctuation covariance

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceEstimate {
    /// `E[H_L(p1) H_L(p2)]` with `H_L = sqrt(pi) (h - mean h)`.
    pub value: f64,
    pub stderr: f64,
    /// Green function at `(Omega_1, Omega_2)`; absent when they coincide.
    pub target: Option<f64>,
    pub omega1: [f64; 2],
    pub omega2: [f64; 2],
    /// Lattice points `(x, n, t)` read out.
    pub sites: [(i64, usize, f64); 2],
    pub replicas: usize,
}

fn space_like(a: &MacroPoint, b: &MacroPoint) -> bool {
    a.tau <= b.tau && a.eta >= b.eta
}

/// `sqrt(pi)`-scaled height covariance at two macroscopic points, using
/// the ensemble mean for `E h`. The pair must be space-like in some order;
/// the result does not depend on the order given.
pub fn covariance_pair(p1: &MacroPoint, p2: &MacroPoint, l: f64, replicas: usize, seed: u64) -> Result<CovarianceEstimate> {
    if !(l > 0.0) || !l.is_finite() {
        return Err(invalid("L must be positive"));
    }
    if replicas < 3 {
        return Err(invalid("need at least three replicas"));
    }
    let (w1, w2) = (omega(p1)?, omega(p2)?);
    if !space_like(p1, p2) && !space_like(p2, p1) {
        return Err(invalid("points must be space-like: tau1 <= tau2 and eta1 >= eta2"));
    }
    let site = |p: &MacroPoint| {
        let n = lattice(p.eta * l);
        (lattice((p.nu - p.eta) * l), n, p.tau * l)
    };
    let (s1, s2) = (site(p1), site(p2));
    if s1.1 < 1 || s2.1 < 1 {
        return Err(invalid("eta L must be at least 1"));
    }
    let (s1, s2) = ((s1.0, s1.1 as usize, s1.2), (s2.0, s2.1 as usize, s2.2));
    // simulate in time order so that swapping the arguments replays the same runs
    let (a, b) = if (s1.2, s1.0, s1.1) <= (s2.2, s2.0, s2.1) { (s1, s2) } else { (s2, s1) };
    let stops = [(a.2, vec![(a.0, a.1)]), (b.2, vec![(b.0, b.1)])];
    let levels = a.1.max(b.1);
    let samples = replicate(replicas, seed, None, |s| heights_along(levels, &stops, s))?;
    let (ha, hb) = (column(&samples, 0), column(&samples, 1));
    let (ma, mb) = (mean(&ha), mean(&hb));
    let prod: Vec<f64> = ha.iter().zip(&hb).map(|(x, y)| PI * (x - ma) * (y - mb)).collect();
    let r = replicas as f64;
    let value = PI * covariance(&ha, &hb);
    let stderr = (variance(&prod) / r).sqrt();
    let target = green_covariance(w1, w2).ok();
    Ok(CovarianceEstimate {
        value,
        stderr,
        target,
        omega1: [w1.re, w1.im],
        omega2: [w2.re, w2.im],
        sites: [s1, s2],
        replicas,
    })
}

// ---------------------------------------------------------------------------
// correlation frequencies

/// Joint event: every point occupied, or carrying the given lozenge type.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub points: Vec<SpaceTimePoint>,
    #[serde(default)]
    pub types: Option<Vec<LozengeType>>,
}

impl Event {
    pub fn occupied(points: Vec<SpaceTimePoint>) -> Self {
        Event { points, types: None }
    }

    pub fn lozenges(points: Vec<SpaceTimePoint>, types: Vec<LozengeType>) -> Self {
        Event {
            points,
            types: Some(types),
        }
    }

    pub fn label(&self) -> String {
        let parts: Vec<String> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let ty = self.types.as_ref().map_or("", |t| t[i].as_str());
                format!("{ty}({},{},{})", p.x, p.n, p.t)
            })
            .collect();
        parts.join(" ")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyRow {
    pub event: String,
    pub frequency: f64,
    pub determinant: f64,
    pub stderr: f64,
    pub z: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyReport {
    pub rows: Vec<FrequencyRow>,
    pub max_abs_z: f64,
    pub replicas: usize,
}

/// `(count - R p) / sqrt(R p (1 - p))`; a degenerate `p` only tolerates the
/// matching deterministic count.
pub fn binomial_z(count: u64, r: u64, p: f64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    let var = r as f64 * p * (1.0 - p);
    let diff = count as f64 - r as f64 * p;
    if var < 1e-12 {
        return if diff.abs() < 0.5 { 0.0 } else { f64::INFINITY };
    }
    diff / var.sqrt()
}

/// Empirical frequencies of each event over CTMC replicas against the
/// determinantal formula.
pub fn frequency_vs_determinant(events: &[Event], replicas: usize, seed: u64) -> Result<FrequencyReport> {
    if replicas < 1 {
        return Err(invalid("need at least one replica"));
    }
    let opts = KernelOptions::default();
    let mut dets = Vec::with_capacity(events.len());
    for e in events {
        if e.points.is_empty() {
            return Err(invalid("empty event"));
        }
        if e.types.as_ref().is_some_and(|t| t.len() != e.points.len()) {
            return Err(invalid("one lozenge type per point"));
        }
        dets.push(corr_det(&e.points, e.types.as_deref(), &opts)?);
    }
    let levels = events.iter().flat_map(|e| e.points.iter().map(|p| p.n)).max().unwrap_or(1);
    let mut times: Vec<f64> = events.iter().flat_map(|e| e.points.iter().map(|p| p.t)).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();

    let hits = replicate(replicas, seed, None, |s| {
        let mut sim = Ctmc::packed(levels)?;
        let mut rng = s.rng();
        let mut ok = vec![true; events.len()];
        for &t in &times {
            sim.advance((t - sim.time()).max(0.0), &mut rng)?;
            let a = sim.state();
            for (e, flag) in events.iter().zip(ok.iter_mut()) {
                for (i, p) in e.points.iter().enumerate() {
                    if p.t != t || !*flag {
                        continue;
                    }
                    *flag = match &e.types {
                        None => a.is_occupied(p.x, p.n),
                        Some(ty) => a.classify_lozenge(p.x, p.n)? == ty[i],
                    };
                }
            }
        }
        Ok(ok)
    })?;
    let r = hits.len() as u64;
    let mut rows = Vec::with_capacity(events.len());
    let mut max_abs_z: f64 = 0.0;
    for (j, e) in events.iter().enumerate() {
        let count = hits.iter().filter(|h| h[j]).count() as u64;
        let p = dets[j];
        let z = binomial_z(count, r, p);
        max_abs_z = max_abs_z.max(z.abs());
        rows.push(FrequencyRow {
            event: e.label(),
            frequency: count as f64 / r as f64,
            determinant: p,
            stderr: (p.clamp(0.0, 1.0) * (1.0 - p.clamp(0.0, 1.0)) / r as f64).sqrt(),
            z,
        });
    }
    Ok(FrequencyReport {
        rows,
        max_abs_z,
        replicas: r as usize,
    })
}

// ---------------------------------------------------------------------------
// TASEP projection

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginalCell {
    pub level: usize,
    pub x: i64,
    pub projected: u64,
    pub reference: u64,
    pub z: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginalComparison {
    pub cells: Vec<MarginalCell>,
    pub max_abs_z: f64,
    pub replicas: usize,
}

/// Per-level position histograms of the leftmost particles of the array
/// against an independent TASEP run, two-sample z per cell. Cells with fewer
/// than ten expected hits are pooled per level.
pub fn tasep_marginal(n: usize, t: f64, replicas: usize, seed: u64) -> Result<MarginalComparison> {
    if replicas < 2 {
        return Err(invalid("need at least two replicas"));
    }
    let proj = replicate(replicas, seed, None, |s| {
        let mut sim = Ctmc::packed(n)?;
        sim.advance(t, &mut s.rng())?;
        Ok(project_row(sim.state(), Side::Leftmost))
    })?;
    let reference = replicate(replicas, seed ^ TASEP_TAG, None, |s| Ok(tasep_reference(n, t, &mut s.rng())?))?;
    let r = replicas as f64;
    let mut cells = Vec::new();
    let mut max_abs_z: f64 = 0.0;
    for m in 0..n {
        let mut hist: BTreeMap<i64, (u64, u64)> = BTreeMap::new();
        for v in &proj {
            hist.entry(v[m]).or_default().0 += 1;
        }
        for v in &reference {
            hist.entry(v[m]).or_default().1 += 1;
        }
        let mut pooled = (0u64, 0u64);
        let push = |x: i64, a: u64, b: u64, cells: &mut Vec<MarginalCell>| {
            let (pa, pb) = (a as f64 / r, b as f64 / r);
            let pp = (pa + pb) / 2.0;
            let sd = (2.0 * pp * (1.0 - pp) / r).sqrt();
            let z = if sd > 0.0 { (pa - pb) / sd } else { 0.0 };
            cells.push(MarginalCell {
                level: m + 1,
                x,
                projected: a,
                reference: b,
                z,
            });
            z.abs()
        };
        for (&x, &(a, b)) in &hist {
            if (a + b) as f64 / 2.0 >= 10.0 {
                max_abs_z = max_abs_z.max(push(x, a, b, &mut cells));
            } else {
                pooled.0 += a;
                pooled.1 += b;
            }
        }
        if pooled.0 + pooled.1 > 0 {
            // x = i64::MIN marks the pooled rare cells
            max_abs_z = max_abs_z.max(push(i64::MIN, pooled.0, pooled.1, &mut cells));
        }
    }
    Ok(MarginalComparison {
        cells,
        max_abs_z,
        replicas,
    })
}

// ---------------------------------------------------------------------------
// reports

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub name: String,
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn new(name: impl Into<String>, value: f64, stderr: f64) -> Self {
        Estimate {
            name: name.into(),
            value,
            stderr,
        }
    }
}

/// The JSON verdict of a `stats` run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub spec: serde_json::Value,
    pub estimates: Vec<Estimate>,
    pub pass: bool,
}

impl VarianceSlope {
    /// Passes when the slope is within `rel_tol` of `1/(2 pi^2)` and the
    /// bootstrap interval covers it.
    pub fn passes(&self, rel_tol: f64) -> bool {
        let k = LOG_VARIANCE_COEFF;
        (self.slope - k).abs() <= rel_tol * k && self.ci[0] <= k && k <= self.ci[1]
    }

    pub fn report(&self, spec: serde_json::Value, rel_tol: f64) -> Report {
        let mut estimates = vec![
            Estimate::new("slope", self.slope, self.slope_stderr),
            Estimate::new("slope_ci_low", self.ci[0], 0.0),
            Estimate::new("slope_ci_high", self.ci[1], 0.0),
            Estimate::new("target", LOG_VARIANCE_COEFF, 0.0),
        ];
        for p in &self.points {
            estimates.push(Estimate::new(format!("variance_t{}", p.t), p.variance, p.stderr));
        }
        Report {
            spec,
            estimates,
            pass: self.passes(rel_tol),
        }
    }
}

impl ShapeError {
    pub fn report(&self, spec: serde_json::Value, rel_tol: f64) -> Report {
        Report {
            spec,
            estimates: vec![
                Estimate::new("mean_h_over_L", self.sample.mean, self.sample.stderr),
                Estimate::new("limit_shape", self.target, 0.0),
                Estimate::new("relative_error", self.rel_error, self.rel_stderr),
            ],
            pass: self.rel_error < rel_tol,
        }
    }
}

impl CovarianceEstimate {
    /// Within `max(rel_tol |G|, 3 stderr)` of the Green function.
    pub fn passes(&self, rel_tol: f64) -> bool {
        match self.target {
            Some(g) => (self.value - g).abs() <= (rel_tol * g.abs()).max(3.0 * self.stderr),
            None => false,
        }
    }

    pub fn report(&self, spec: serde_json::Value, rel_tol: f64) -> Report {
        let mut estimates = vec![Estimate::new("covariance", self.value, self.stderr)];
        if let Some(g) = self.target {
            estimates.push(Estimate::new("green_function", g, 0.0));
        }
        Report {
            spec,
            estimates,
            pass: self.passes(rel_tol),
        }
    }
}

impl FrequencyReport {
    pub fn report(&self, spec: serde_json::Value, z_max: f64) -> Report {
        let mut estimates: Vec<Estimate> = self
            .rows
            .iter()
            .flat_map(|r| {
                [
                    Estimate::new(format!("freq {}", r.event), r.frequency, r.stderr),
                    Estimate::new(format!("det {}", r.event), r.determinant, 0.0),
                ]
            })
            .collect();
        estimates.push(Estimate::new("max_abs_z", self.max_abs_z, 0.0));
        Report {
            spec,
            estimates,
            pass: self.max_abs_z < z_max,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive() {
        let v: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        let naive: f64 = v.iter().sum();
        assert!((pairwise_sum(&v) - naive).abs() < 1e-12);
    }

    #[test]
    fn ols_exact_line() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 0.5 * v).collect();
        let (b, a) = ols(&x, &y);
        assert!((b + 0.5).abs() < 1e-14 && (a - 3.0).abs() < 1e-14);
    }

    #[test]
    fn lattice_is_rounding_safe() {
        assert_eq!(lattice((1.5 - 0.8) * 300.0), 210);
        assert_eq!(lattice(-0.5), -1);
    }

    #[test]
    fn z_degenerate() {
        assert_eq!(binomial_z(0, 100, 0.0), 0.0);
        assert_eq!(binomial_z(100, 100, 1.0), 0.0);
        assert!(binomial_z(1, 100, 0.0).is_infinite());
    }
}
