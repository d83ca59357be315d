//! Toeplitz-like transition matrices restricted to finite position windows.
//!
//! For a symbol `F(z) = sum_m f(m) z^m` and level weights `alpha_1..alpha_n`
//!
//! ```text
//! T_n(X, Y)       = det[alpha_i^{y_j}] / det[alpha_i^{x_j}] * det[f(x_i - y_j)] / prod_j F(1/alpha_j)
//! T^n_{n-1}(X, Y) = same with y_n virtual, f(x - virt) = alpha_n^x, and
//!                   prod_{j<n} F(1/alpha_j) in the denominator
//! ```
//!
//! `Lambda = T^n_{n-1}((1 - alpha_n z)^{-1})` links level `n` to level `n-1`.
//! When every weight is equal the Vandermonde-type ratios are replaced by
//! their confluent limits.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{Num, Signed};
use serde::{Deserialize, Serialize};

use crate::dynamics::{StepFamily, StepLaw};
use crate::error::{invalid, Error, Result};
use crate::interlacing::InterlacingArray;
use crate::linalg::{det, ipow, vandermonde};

// ---------------------------------------------------------------------------
// symbols

/// The elementary symbols `F(z)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Symbol<T> {
    /// `1 + p z`
    BernoulliLeft(T),
    /// `1 + beta / z`
    BernoulliRight(T),
    /// `(1 - q z)^{-1}`
    GeometricLeft(T),
    /// `(1 - gamma / z)^{-1}`
    GeometricRight(T),
    /// `p + q z (1 - q z)^{-1}`
    Mixed(T, T),
}

impl<T: Clone + Num> Symbol<T> {
    /// Fourier coefficient `f(m) = [z^m] F(z)`.
    pub fn coeff(&self, m: i64) -> T {
        match self {
            Symbol::BernoulliLeft(p) => match m {
                0 => T::one(),
                1 => p.clone(),
                _ => T::zero(),
            },
            Symbol::BernoulliRight(b) => match m {
                0 => T::one(),
                -1 => b.clone(),
                _ => T::zero(),
            },
            Symbol::GeometricLeft(q) => {
                if m >= 0 {
                    ipow(q, m)
                } else {
                    T::zero()
                }
            }
            Symbol::GeometricRight(g) => {
                if m <= 0 {
                    ipow(g, -m)
                } else {
                    T::zero()
                }
            }
            Symbol::Mixed(p, q) => {
                if m == 0 {
                    p.clone()
                } else if m > 0 {
                    ipow(q, m)
                } else {
                    T::zero()
                }
            }
        }
    }

    /// Smallest and largest index of a nonzero coefficient (`None` = unbounded).
    pub fn support(&self) -> (Option<i64>, Option<i64>) {
        match self {
            Symbol::BernoulliLeft(_) => (Some(0), Some(1)),
            Symbol::BernoulliRight(_) => (Some(-1), Some(0)),
            Symbol::GeometricLeft(_) | Symbol::Mixed(..) => (Some(0), None),
            Symbol::GeometricRight(_) => (None, Some(0)),
        }
    }
}

impl Symbol<f64> {
    pub fn eval(&self, z: f64) -> f64 {
        match *self {
            Symbol::BernoulliLeft(p) => 1.0 + p * z,
            Symbol::BernoulliRight(b) => 1.0 + b / z,
            Symbol::GeometricLeft(q) => 1.0 / (1.0 - q * z),
            Symbol::GeometricRight(g) => 1.0 / (1.0 - g / z),
            Symbol::Mixed(p, q) => p + q * z / (1.0 - q * z),
        }
    }
}

impl From<StepFamily> for Symbol<f64> {
    fn from(f: StepFamily) -> Self {
        f.symbol()
    }
}

/// A finite product of elementary symbols; coefficients by convolution.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    factors: Vec<Symbol<f64>>,
}

impl From<Symbol<f64>> for Series {
    fn from(s: Symbol<f64>) -> Self {
        Series { factors: vec![s] }
    }
}

impl From<StepFamily> for Series {
    fn from(f: StepFamily) -> Self {
        Series::from(f.symbol())
    }
}

impl Series {
    pub fn product(factors: Vec<Symbol<f64>>) -> Self {
        Series { factors }
    }

    pub fn times(&self, other: &Series) -> Series {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        Series { factors }
    }

    pub fn factors(&self) -> &[Symbol<f64>] {
        &self.factors
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.factors.iter().map(|s| s.eval(z)).product()
    }

    fn support_of(f: &[Symbol<f64>]) -> (Option<i64>, Option<i64>) {
        let mut lo = Some(0i64);
        let mut hi = Some(0i64);
        for s in f {
            let (a, b) = s.support();
            lo = lo.zip(a).map(|(u, v)| u + v);
            hi = hi.zip(b).map(|(u, v)| u + v);
        }
        (lo, hi)
    }

    /// Coefficient of `z^m`; infinite convolutions are summed until the
    /// geometric tail drops below `1e-18` of the partial sum.
    pub fn coeff(&self, m: i64) -> f64 {
        conv(&self.factors, m)
    }

    /// Coefficients on `-w..=w`, the only ones a window of width `w` needs.
    pub fn table(&self, w: i64) -> CoeffTable {
        CoeffTable {
            w,
            vals: (-w..=w).map(|m| self.coeff(m)).collect(),
        }
    }
}

fn conv(f: &[Symbol<f64>], m: i64) -> f64 {
    match f.len() {
        0 => (m == 0) as i64 as f64,
        1 => f[0].coeff(m),
        _ => {
            let (a, rest) = (&f[0], &f[1..]);
            let (alo, ahi) = a.support();
            let (rlo, rhi) = Series::support_of(rest);
            // j ranges over supp(a) with m - j in supp(rest)
            let lo = match (alo, rhi) {
                (Some(u), Some(v)) => Some(u.max(m - v)),
                (Some(u), None) => Some(u),
                (None, Some(v)) => Some(m - v),
                (None, None) => None,
            };
            let hi = match (ahi, rlo) {
                (Some(u), Some(v)) => Some(u.min(m - v)),
                (Some(u), None) => Some(u),
                (None, Some(v)) => Some(m - v),
                (None, None) => None,
            };
            let term = |j: i64| a.coeff(j) * conv(rest, m - j);
            match (lo, hi) {
                (Some(l), Some(h)) => (l..=h).map(term).sum(),
                (Some(l), None) => tail_sum((l..).map(term)),
                (None, Some(h)) => tail_sum((0..).map(|i| term(h - i))),
                (None, None) => tail_sum((0..).map(|i| term(i))) + tail_sum((1..).map(|i| term(-i))),
            }
        }
    }
}

fn tail_sum<I: Iterator<Item = f64>>(it: I) -> f64 {
    let mut acc = 0.0;
    let mut small = 0;
    for (i, v) in it.enumerate() {
        acc += v;
        if libm::fabs(v) <= 1e-18 * libm::fabs(acc) {
            small += 1;
            if small >= 4 {
                break;
            }
        } else {
            small = 0;
        }
        if i > 200_000 {
            break;
        }
    }
    acc
}

/// Precomputed coefficients `f(-w..=w)`.
#[derive(Clone, Debug)]
pub struct CoeffTable {
    w: i64,
    vals: Vec<f64>,
}

impl CoeffTable {
    #[inline]
    pub fn get(&self, m: i64) -> f64 {
        if m < -self.w || m > self.w {
            panic!("coefficient index {m} outside table of half width {}", self.w);
        }
        self.vals[(m + self.w) as usize]
    }
}

// ---------------------------------------------------------------------------
// minors

fn check_increasing(v: &[i64], what: &str) -> Result<()> {
    if v.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid(alloc::format!("{what} must be strictly increasing")));
    }
    Ok(())
}

/// `det[f(x_i - y_j)]` by elimination. With `virt = Some(a)` the tuple `y`
/// has one entry less and the last column is `a^{x_i}`.
pub fn minor_det_direct<T>(sym: &Symbol<T>, x: &[i64], y: &[i64], virt: Option<&T>) -> Result<T>
where
    T: Clone + Num + Signed + PartialOrd,
{
    let n = x.len();
    let expect = if virt.is_some() { n.saturating_sub(1) } else { n };
    if y.len() != expect || (virt.is_some() && n == 0) {
        return Err(invalid("tuple lengths do not match"));
    }
    let mut a = Vec::with_capacity(n * n);
    for &xi in x {
        for &yj in y {
            a.push(sym.coeff(xi - yj));
        }
        if let Some(v) = virt {
            a.push(ipow(v, xi));
        }
    }
    Ok(det(a, n))
}

/// Closed-form minors for `1 + pz`, `(1 - qz)^{-1}`, `p + qz(1 - qz)^{-1}`
/// and, by reflection `x -> -x`, for `1 + beta/z` and `(1 - gamma/z)^{-1}`.
///
/// A virtual column is supported for the geometric and mixed symbols, with
/// base equal to `q`.
pub fn minor_det_closed<T>(sym: &Symbol<T>, x: &[i64], y: &[i64], virt: Option<&T>) -> Result<T>
where
    T: Clone + Num + Signed + PartialOrd,
{
    check_increasing(x, "x")?;
    check_increasing(y, "y")?;
    let n = x.len();
    let sum = |v: &[i64]| v.iter().sum::<i64>();
    match virt {
        None => {
            if y.len() != n {
                return Err(invalid("tuple lengths do not match"));
            }
            match sym {
                Symbol::BernoulliLeft(p) => {
                    if x.iter().zip(y).all(|(a, b)| b - a == 0 || b - a == -1) {
                        Ok(ipow(p, sum(x) - sum(y)))
                    } else {
                        Ok(T::zero())
                    }
                }
                Symbol::GeometricLeft(q) => {
                    let ok = (0..n).all(|i| y[i] <= x[i] && (i == 0 || x[i - 1] < y[i]));
                    Ok(if ok { ipow(q, sum(x) - sum(y)) } else { T::zero() })
                }
                Symbol::Mixed(p, q) => {
                    let ok = (0..n).all(|i| y[i] <= x[i] && (i == 0 || x[i - 1] <= y[i]));
                    if !ok {
                        return Ok(T::zero());
                    }
                    let same = (0..n).filter(|&i| x[i] == y[i]).count();
                    let prev = (1..n).filter(|&i| x[i - 1] == y[i]).count();
                    Ok(ipow(q, sum(x) - sum(y))
                        * ipow(p, same as i64)
                        * ipow(&(T::one() - p.clone()), prev as i64))
                }
                Symbol::BernoulliRight(b) => {
                    let (xr, yr) = (reflect(x), reflect(y));
                    minor_det_closed(&Symbol::BernoulliLeft(b.clone()), &xr, &yr, None)
                }
                Symbol::GeometricRight(g) => {
                    let (xr, yr) = (reflect(x), reflect(y));
                    minor_det_closed(&Symbol::GeometricLeft(g.clone()), &xr, &yr, None)
                }
            }
        }
        Some(a) => {
            if n == 0 || y.len() != n - 1 {
                return Err(invalid("tuple lengths do not match"));
            }
            let sign = if (n - 1) % 2 == 0 { T::one() } else { -T::one() };
            match sym {
                Symbol::GeometricLeft(q) if q == a => {
                    let ok = (0..n - 1).all(|i| x[i] < y[i] && y[i] <= x[i + 1]);
                    Ok(if ok { sign * ipow(q, sum(x) - sum(y)) } else { T::zero() })
                }
                Symbol::Mixed(p, q) if q == a => {
                    let ok = (0..n - 1).all(|i| x[i] <= y[i] && y[i] <= x[i + 1]);
                    if !ok {
                        return Ok(T::zero());
                    }
                    let next = (0..n - 1).filter(|&i| x[i + 1] == y[i]).count();
                    let same = (0..n - 1).filter(|&i| x[i] == y[i]).count();
                    Ok(sign
                        * ipow(q, sum(x) - sum(y))
                        * ipow(p, next as i64)
                        * ipow(&(T::one() - p.clone()), same as i64))
                }
                _ => Err(invalid("no closed form for this symbol with a virtual column")),
            }
        }
    }
}

fn reflect(v: &[i64]) -> Vec<i64> {
    v.iter().rev().map(|&a| -a).collect()
}

// ---------------------------------------------------------------------------
// windows and matrices

/// Positions restricted to `lo..=hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub lo: i64,
    pub hi: i64,
}

impl Window {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(invalid("window bounds reversed"));
        }
        Ok(Window { lo, hi })
    }

    pub fn width(&self) -> i64 {
        self.hi - self.lo
    }

    /// All strictly increasing `n`-tuples inside the window, lexicographic.
    pub fn states(&self, n: usize) -> Vec<Vec<i64>> {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(n);
        fn rec(w: &Window, n: usize, start: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
            if cur.len() == n {
                out.push(cur.clone());
                return;
            }
            let left = (n - cur.len()) as i64;
            let mut v = start;
            while v + left - 1 <= w.hi {
                cur.push(v);
                rec(w, n, v + 1, cur, out);
                cur.pop();
                v += 1;
            }
        }
        rec(self, n, self.lo, &mut cur, &mut out);
        out
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        v.iter().all(|&a| a >= self.lo && a <= self.hi)
    }
}

/// Level weights with the confluent case detected once.
#[derive(Clone, Debug, PartialEq)]
pub struct Weights {
    alphas: Vec<f64>,
    confluent: bool,
}

impl Weights {
    pub fn new(alphas: &[f64]) -> Result<Self> {
        if alphas.is_empty() {
            return Err(invalid("need at least one level weight"));
        }
        if alphas.iter().any(|&a| !(a > 0.0) || !a.is_finite()) {
            return Err(invalid("level weights must be positive"));
        }
        let confluent = alphas.iter().all(|&a| a == alphas[0]);
        if !confluent {
            for i in 0..alphas.len() {
                for j in 0..i {
                    if alphas[i] == alphas[j] {
                        return Err(invalid(
                            "level weights must be all distinct or all equal",
                        ));
                    }
                }
            }
        }
        Ok(Weights {
            alphas: alphas.to_vec(),
            confluent,
        })
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn is_confluent(&self) -> bool {
        self.confluent
    }

    pub fn first(&self, m: usize) -> Result<Weights> {
        if m == 0 || m > self.alphas.len() {
            return Err(invalid("level out of range for the weights"));
        }
        Weights::new(&self.alphas[..m])
    }

    fn alpha_det(&self, x: &[i64]) -> f64 {
        let k = x.len();
        let mut a = Vec::with_capacity(k * k);
        for i in 0..k {
            for &xj in x {
                a.push(libm::pow(self.alphas[i], xj as f64));
            }
        }
        det(a, k)
    }

    /// `det[alpha_i^{y_j}] / det[alpha_i^{x_j}]` for tuples of equal length.
    fn ratio(&self, x: &[i64], y: &[i64]) -> f64 {
        if self.confluent {
            let c = self.alphas[0];
            let e: i64 = y.iter().sum::<i64>() - x.iter().sum::<i64>();
            libm::pow(c, e as f64) * vandermonde(y) / vandermonde(x)
        } else {
            self.alpha_det(y) / self.alpha_det(x)
        }
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Evaluates single entries of `T_n(F)`, `T^n_{n-1}(F)` and `Lambda`.
#[derive(Clone, Debug)]
pub struct Toeplitz {
    w: Weights,
    f: Series,
    table: CoeffTable,
    norm: f64,
}

impl Toeplitz {
    /// `span` bounds `|x_i - y_j|` over all queried entries.
    pub fn new(weights: &Weights, f: &Series, span: i64) -> Result<Self> {
        let norm: f64 = weights.alphas.iter().map(|&a| f.eval(1.0 / a)).product();
        if !(norm.is_finite()) || norm == 0.0 {
            return Err(invalid("F(1/alpha_j) must be finite and nonzero"));
        }
        Ok(Toeplitz {
            w: weights.clone(),
            f: f.clone(),
            table: f.table(span),
            norm,
        })
    }

    pub fn n(&self) -> usize {
        self.w.alphas.len()
    }

    pub fn series(&self) -> &Series {
        &self.f
    }

    fn fdet(&self, x: &[i64], y: &[i64]) -> f64 {
        let k = x.len();
        let mut a = Vec::with_capacity(k * k);
        for &xi in x {
            for &yj in y {
                a.push(self.table.get(xi - yj));
            }
        }
        det(a, k)
    }

    /// `T_n(F)(X, Y)`.
    pub fn entry(&self, x: &[i64], y: &[i64]) -> f64 {
        let d = self.fdet(x, y);
        if d == 0.0 {
            return 0.0;
        }
        self.w.ratio(x, y) * d / self.norm
    }
}

/// `T^n_{n-1}(F)` with distinct weights.
#[derive(Clone, Debug)]
pub struct Link {
    w: Weights,
    table: CoeffTable,
    norm: f64,
}

impl Link {
    pub fn new(weights: &Weights, f: &Series, span: i64) -> Result<Self> {
        if weights.confluent && weights.alphas.len() > 1 {
            return Err(Error::Singular(
                "T^n_{n-1} with equal weights has no generic form; use Lambda".into(),
            ));
        }
        let n = weights.alphas.len();
        let norm: f64 = weights.alphas[..n - 1].iter().map(|&a| f.eval(1.0 / a)).product();
        if !(norm.is_finite()) || norm == 0.0 {
            return Err(invalid("F(1/alpha_j) must be finite and nonzero"));
        }
        Ok(Link {
            w: weights.clone(),
            table: f.table(span),
            norm,
        })
    }

    pub fn entry(&self, x: &[i64], y: &[i64]) -> f64 {
        let n = x.len();
        let an = self.w.alphas[n - 1];
        let mut a = Vec::with_capacity(n * n);
        for &xi in x {
            for &yj in y {
                a.push(self.table.get(xi - yj));
            }
            a.push(libm::pow(an, xi as f64));
        }
        let d = det(a, n);
        if d == 0.0 {
            return 0.0;
        }
        let lower = Weights {
            alphas: self.w.alphas[..n - 1].to_vec(),
            confluent: false,
        };
        lower.alpha_det(y) / self.w.alpha_det(x) * d / self.norm
    }
}

/// `Lambda = T^n_{n-1}((1 - alpha_n z)^{-1})` in closed form:
/// support `x_i < y_i <= x_{i+1}`, value
/// `det[alpha_i^{y_j}]_{n-1} / det[alpha_i^{x_j}]_n * (-1)^{n-1} alpha_n^{sum x - sum y} * prod_{j<n}(1 - alpha_n/alpha_j)`,
/// and `(n-1)! Delta(Y)/Delta(X)` when all weights are equal.
#[derive(Clone, Debug)]
pub struct Lambda {
    w: Weights,
}

impl Lambda {
    pub fn new(weights: &Weights) -> Result<Self> {
        let n = weights.alphas.len();
        if n < 2 {
            return Err(invalid("Lambda needs n >= 2"));
        }
        if !weights.confluent {
            let an = weights.alphas[n - 1];
            if weights.alphas[..n - 1].iter().any(|&a| a <= an) {
                return Err(invalid("Lambda needs alpha_n < alpha_j for j < n"));
            }
        }
        Ok(Lambda { w: weights.clone() })
    }

    pub fn interlaces(x: &[i64], y: &[i64]) -> bool {
        y.len() + 1 == x.len() && (0..y.len()).all(|i| x[i] < y[i] && y[i] <= x[i + 1])
    }

    pub fn entry(&self, x: &[i64], y: &[i64]) -> f64 {
        if !Lambda::interlaces(x, y) {
            return 0.0;
        }
        let n = x.len();
        if self.w.confluent {
            return factorial(n - 1) * vandermonde(y) / vandermonde(x);
        }
        let an = self.w.alphas[n - 1];
        let lower = Weights {
            alphas: self.w.alphas[..n - 1].to_vec(),
            confluent: false,
        };
        let sign = if (n - 1) % 2 == 0 { 1.0 } else { -1.0 };
        let e: i64 = x.iter().sum::<i64>() - y.iter().sum::<i64>();
        let norm: f64 = self.w.alphas[..n - 1].iter().map(|&a| 1.0 - an / a).product();
        lower.alpha_det(y) / self.w.alpha_det(x) * sign * libm::pow(an, e as f64) * norm
    }

    /// All `y` with `Lambda(x, y) > 0`.
    pub fn support(x: &[i64]) -> Vec<Vec<i64>> {
        let ranges: Vec<(i64, i64)> = (0..x.len().saturating_sub(1)).map(|i| (x[i] + 1, x[i + 1])).collect();
        product_ranges(&ranges)
    }
}

/// Cartesian product of inclusive integer ranges.
pub fn product_ranges(r: &[(i64, i64)]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for &(a, b) in r {
        let mut next = Vec::new();
        for p in &out {
            for v in a..=b {
                let mut q = p.clone();
                q.push(v);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

/// A dense matrix over window states.
#[derive(Clone, Debug)]
pub struct TransitionMatrix {
    pub rows: Vec<Vec<i64>>,
    pub cols: Vec<Vec<i64>>,
    pub data: Vec<f64>,
    row_index: BTreeMap<Vec<i64>, usize>,
    col_index: BTreeMap<Vec<i64>, usize>,
}

impl TransitionMatrix {
    fn from_fn(rows: Vec<Vec<i64>>, cols: Vec<Vec<i64>>, f: impl Fn(&[i64], &[i64]) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols.len());
        for r in &rows {
            for c in &cols {
                data.push(f(r, c));
            }
        }
        let row_index = rows.iter().cloned().enumerate().map(|(i, r)| (r, i)).collect();
        let col_index = cols.iter().cloned().enumerate().map(|(i, r)| (r, i)).collect();
        TransitionMatrix {
            rows,
            cols,
            data,
            row_index,
            col_index,
        }
    }

    pub fn get(&self, x: &[i64], y: &[i64]) -> Option<f64> {
        let i = *self.row_index.get(x)?;
        let j = *self.col_index.get(y)?;
        Some(self.data[i * self.cols.len() + j])
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        let c = self.cols.len();
        self.data[i * c..(i + 1) * c].iter().sum()
    }

    /// `1 - row sum` for every row.
    pub fn leaks(&self) -> Vec<f64> {
        (0..self.rows.len()).map(|i| 1.0 - self.row_sum(i)).collect()
    }
}

pub fn build_t(alphas: &[f64], f: &Series, window: Window) -> Result<TransitionMatrix> {
    let w = Weights::new(alphas)?;
    let t = Toeplitz::new(&w, f, window.width())?;
    let states = window.states(alphas.len());
    Ok(TransitionMatrix::from_fn(states.clone(), states, |x, y| t.entry(x, y)))
}

/// `T^n_{n-1}(F)` on the window; for equal weights only `Lambda` has a closed
/// form, so `f` must then be `None`.
pub fn build_tlink(alphas: &[f64], f: Option<&Series>, window: Window) -> Result<TransitionMatrix> {
    let w = Weights::new(alphas)?;
    let n = alphas.len();
    if n < 2 {
        return Err(invalid("link matrices need n >= 2"));
    }
    let rows = window.states(n);
    let cols = window.states(n - 1);
    match f {
        Some(f) => {
            let l = Link::new(&w, f, window.width())?;
            Ok(TransitionMatrix::from_fn(rows, cols, |x, y| l.entry(x, y)))
        }
        None => {
            let l = Lambda::new(&w)?;
            Ok(TransitionMatrix::from_fn(rows, cols, |x, y| l.entry(x, y)))
        }
    }
}

// ---------------------------------------------------------------------------
// identities

/// `max |(Lambda T_{n-1}(F) - T_n(F) Lambda)(x*, y)|` over `x*`, `y` inside
/// `interior`; intermediate sums run over `window`.
pub fn commutation_check(alphas: &[f64], f: &Series, window: Window, interior: Window) -> Result<f64> {
    let n = alphas.len();
    let w = Weights::new(alphas)?;
    let lam = Lambda::new(&w)?;
    let span = window.width() + 2;
    let tn = Toeplitz::new(&w, f, span)?;
    let tm = Toeplitz::new(&w.first(n - 1)?, f, span)?;
    let mut worst: f64 = 0.0;
    for xs in interior.states(n) {
        let lam_row: Vec<(Vec<i64>, f64)> = Lambda::support(&xs)
            .into_iter()
            .map(|x| {
                let v = lam.entry(&xs, &x);
                (x, v)
            })
            .collect();
        for y in interior.states(n - 1) {
            let lhs: f64 = lam_row.iter().map(|(x, v)| v * tm.entry(x, &y)).sum();
            // y* interlacing y: y*_i < y_i <= y*_{i+1}
            let mut ranges = Vec::with_capacity(n);
            ranges.push((window.lo, y[0] - 1));
            for i in 1..n - 1 {
                ranges.push((y[i - 1], y[i] - 1));
            }
            ranges.push((y[n - 2], window.hi));
            let mut rhs = 0.0;
            for ys in product_ranges(&ranges) {
                let l = lam.entry(&ys, &y);
                if l != 0.0 {
                    rhs += tn.entry(&xs, &ys) * l;
                }
            }
            worst = worst.max(libm::fabs(lhs - rhs));
        }
    }
    Ok(worst)
}

/// `max |(T_n(F1) T_n(F2) - T_n(F1 F2))(x, y)|` over interior `x`, `y`.
pub fn semigroup_check(alphas: &[f64], f1: &Series, f2: &Series, window: Window, interior: Window) -> Result<f64> {
    let n = alphas.len();
    let w = Weights::new(alphas)?;
    let span = window.width() + 2;
    let a = Toeplitz::new(&w, f1, span)?;
    let b = Toeplitz::new(&w, f2, span)?;
    let ab = Toeplitz::new(&w, &f1.times(f2), span)?;
    let mids = window.states(n);
    let mut worst: f64 = 0.0;
    for x in interior.states(n) {
        let row: Vec<(usize, f64)> = mids
            .iter()
            .enumerate()
            .map(|(i, z)| (i, a.entry(&x, z)))
            .filter(|&(_, v)| v != 0.0)
            .collect();
        for y in interior.states(n) {
            let lhs: f64 = row.iter().map(|&(i, v)| v * b.entry(&mids[i], &y)).sum();
            worst = worst.max(libm::fabs(lhs - ab.entry(&x, &y)));
        }
    }
    Ok(worst)
}

/// `Delta(x*, y) = sum_x Lambda(x*, x) T_{n-1}(x, y)`.
pub fn delta_entry(lam: &Lambda, lower: &Toeplitz, xs: &[i64], y: &[i64]) -> f64 {
    Lambda::support(xs)
        .iter()
        .map(|x| lam.entry(xs, x) * lower.entry(x, y))
        .sum()
}

// ---------------------------------------------------------------------------
// bivariate conditionals

/// Law of the updated level `y*` given `x*` (level n) and the conditioning
/// level `y` (n - 1 entries): independent coordinates on explicit segments.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalLaw {
    family: StepFamily,
    alpha: f64,
    x_star: Vec<i64>,
    segments: Vec<(Option<i64>, Option<i64>)>,
}

/// Closed-form conditional law of the bivariate chain. Passing the old lower
/// level in place of `y` gives the parallel (`Delta`) version.
pub fn bivariate_conditional(family: StepFamily, alpha_n: f64, x_star: &[i64], y: &[i64]) -> Result<ConditionalLaw> {
    check_increasing(x_star, "x*")?;
    check_increasing(y, "y")?;
    let n = x_star.len();
    if y.len() + 1 != n {
        return Err(invalid("y must have one entry less than x*"));
    }
    let yk = |k: usize| if k >= 1 && k < n { Some(y[k - 1]) } else { None };
    let xk = |k: usize| if k >= 1 && k <= n { Some(x_star[k - 1]) } else { None };
    let max = |a: Option<i64>, b: Option<i64>| match (a, b) {
        (Some(u), Some(v)) => Some(u.max(v)),
        (u, None) => u,
        (None, v) => v,
    };
    let min = |a: Option<i64>, b: Option<i64>| match (a, b) {
        (Some(u), Some(v)) => Some(u.min(v)),
        (u, None) => u,
        (None, v) => v,
    };
    let mut segments = Vec::with_capacity(n);
    for k in 1..=n {
        let x = x_star[k - 1];
        let seg = match family {
            StepFamily::BernoulliLeft(_) => (max(Some(x - 1), yk(k - 1)), min(Some(x), yk(k).map(|v| v - 1))),
            StepFamily::BernoulliRight(_) => (max(Some(x), yk(k - 1)), min(Some(x + 1), yk(k).map(|v| v - 1))),
            StepFamily::GeometricLeft(_) => (
                max(xk(k - 1).map(|v| v + 1), yk(k - 1)),
                min(Some(x), yk(k).map(|v| v - 1)),
            ),
            StepFamily::GeometricRight(_) => (max(Some(x), yk(k - 1)), min(xk(k + 1), yk(k)).map(|v| v - 1)),
        };
        if let (Some(a), Some(b)) = seg {
            if a > b {
                return Err(invalid(alloc::format!("empty segment for coordinate {k}")));
            }
        }
        segments.push(seg);
    }
    Ok(ConditionalLaw {
        family,
        alpha: alpha_n,
        x_star: x_star.to_vec(),
        segments,
    })
}

impl ConditionalLaw {
    pub fn segments(&self) -> &[(Option<i64>, Option<i64>)] {
        &self.segments
    }

    fn coord_prob(&self, k: usize, v: i64) -> f64 {
        let (lo, hi) = self.segments[k];
        if lo.is_some_and(|l| v < l) || hi.is_some_and(|h| v > h) {
            return 0.0;
        }
        if lo.is_some() && lo == hi {
            return 1.0;
        }
        let a = self.alpha;
        let x = self.x_star[k];
        match self.family {
            StepFamily::BernoulliLeft(b) => {
                if v == x - 1 {
                    b / (a + b)
                } else {
                    a / (a + b)
                }
            }
            StepFamily::BernoulliRight(b) => {
                if v == x {
                    1.0 / (1.0 + a * b)
                } else {
                    a * b / (1.0 + a * b)
                }
            }
            StepFamily::GeometricLeft(g) => {
                let q = g / a;
                let h = hi.expect("upper end is x*");
                let mass = match lo {
                    Some(l) => -libm::expm1((h - l + 1) as f64 * libm::log(q)),
                    None => 1.0,
                };
                libm::pow(q, (h - v) as f64) * (1.0 - q) / mass
            }
            StepFamily::GeometricRight(g) => {
                let q = a * g;
                let l = lo.expect("lower end is x*");
                let mass = match hi {
                    Some(h) => -libm::expm1((h - l + 1) as f64 * libm::log(q)),
                    None => 1.0,
                };
                libm::pow(q, (v - l) as f64) * (1.0 - q) / mass
            }
        }
    }

    pub fn prob(&self, ys: &[i64]) -> f64 {
        if ys.len() != self.segments.len() {
            return 0.0;
        }
        ys.iter().enumerate().map(|(k, &v)| self.coord_prob(k, v)).product()
    }

    /// Support points clipped to the window, with probabilities.
    pub fn enumerate(&self, window: Window) -> Vec<(Vec<i64>, f64)> {
        let ranges: Vec<(i64, i64)> = self
            .segments
            .iter()
            .map(|&(a, b)| (a.unwrap_or(window.lo).max(window.lo), b.unwrap_or(window.hi).min(window.hi)))
            .collect();
        product_ranges(&ranges)
            .into_iter()
            .filter(|v| v.windows(2).all(|w| w[0] < w[1]))
            .map(|v| {
                let p = self.prob(&v);
                (v, p)
            })
            .collect()
    }
}

/// The same conditional as a ratio of matrix entries,
/// `T_n(x*, y*) Lambda(y*, y) / Delta(x*, y)`, for each requested `y*`.
pub fn conditional_from_matrices(
    family: StepFamily,
    alphas: &[f64],
    x_star: &[i64],
    y: &[i64],
    candidates: &[Vec<i64>],
) -> Result<Vec<f64>> {
    let n = alphas.len();
    let w = Weights::new(alphas)?;
    let f = Series::from(family);
    let span = candidates
        .iter()
        .flat_map(|c| c.iter())
        .chain(x_star.iter())
        .chain(y.iter())
        .fold((i64::MAX, i64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
    let span = span.1 - span.0 + 2;
    let lam = Lambda::new(&w)?;
    let tn = Toeplitz::new(&w, &f, span)?;
    let tm = Toeplitz::new(&w.first(n - 1)?, &f, span)?;
    let d = delta_entry(&lam, &tm, x_star, y);
    if !(d > 0.0) {
        return Err(invalid("Delta(x*, y) vanishes"));
    }
    Ok(candidates
        .iter()
        .map(|ys| tn.entry(x_star, ys) * lam.entry(ys, y) / d)
        .collect())
}

// ---------------------------------------------------------------------------
// multilevel chains

/// Per-level matrices for the sequential and parallel chains.
struct Levels {
    t: Vec<Toeplitz>,
    lam: Vec<Option<Lambda>>,
}

impl Levels {
    fn new(alphas: &[f64], f: &Series, n: usize, span: i64) -> Result<Self> {
        let w = Weights::new(&alphas[..n])?;
        let mut t = Vec::with_capacity(n);
        let mut lam = Vec::with_capacity(n);
        for m in 1..=n {
            let wm = w.first(m)?;
            t.push(Toeplitz::new(&wm, f, span)?);
            lam.push(if m >= 2 { Some(Lambda::new(&wm)?) } else { None });
        }
        Ok(Levels { t, lam })
    }
}

fn array_span(a: &InterlacingArray, b: &InterlacingArray) -> i64 {
    let (lo, hi) = a
        .flat()
        .iter()
        .chain(b.flat())
        .fold((i64::MAX, i64::MIN), |(l, h), &v| (l.min(v), h.max(v)));
    hi - lo + 4
}

/// One-step probability of the sequential chain
/// `P_1(x^1, y^1) prod_m P_m(x^m, y^m) Lambda(y^m, y^{m-1}) / Delta(x^m, y^{m-1})`.
pub fn seq_transition_prob(law: &StepLaw, from: &InterlacingArray, to: &InterlacingArray) -> Result<f64> {
    let n = from.n();
    if to.n() != n || law.alphas.len() < n {
        return Err(invalid("level counts do not match"));
    }
    let lv = Levels::new(&law.alphas, &Series::from(law.family), n, array_span(from, to))?;
    let mut p = lv.t[0].entry(from.level(1), to.level(1));
    for m in 2..=n {
        if p == 0.0 {
            return Ok(0.0);
        }
        let lam = lv.lam[m - 1].as_ref().expect("m >= 2");
        let d = delta_entry(lam, &lv.t[m - 2], from.level(m), to.level(m - 1));
        if d == 0.0 {
            return Ok(0.0);
        }
        p *= lv.t[m - 1].entry(from.level(m), to.level(m)) * lam.entry(to.level(m), to.level(m - 1)) / d;
    }
    Ok(p)
}

/// One-step probability of the parallel chain with `F_s = 1 + beta_s / z`:
/// `P_1(x^1, y^1 | s_1) prod_m P_m(x^m, y^m | s_m) Lambda(y^m, x^{m-1}) / Delta(x^m, x^{m-1} | s_m)`,
/// `s_m = t + n - m`, and `Delta(s) = P_m(s) Lambda`.
pub fn par_transition_prob(
    betas: &[f64],
    alphas: &[f64],
    t: usize,
    from: &InterlacingArray,
    to: &InterlacingArray,
) -> Result<f64> {
    let n = from.n();
    if to.n() != n || alphas.len() < n {
        return Err(invalid("level counts do not match"));
    }
    if t + n - 1 >= betas.len() {
        return Err(invalid("schedule index out of range"));
    }
    let span = array_span(from, to);
    let w = Weights::new(&alphas[..n])?;
    let mut p = 1.0;
    for m in 1..=n {
        let f = Series::from(Symbol::BernoulliRight(betas[t + n - m]));
        let wm = w.first(m)?;
        let tm = Toeplitz::new(&wm, &f, span)?;
        let (xm, ym) = (from.level(m), to.level(m));
        if m == 1 {
            p *= tm.entry(xm, ym);
            continue;
        }
        let lam = Lambda::new(&wm)?;
        let below = from.level(m - 1);
        // Delta = P_m Lambda; the rows of P_m live on x^m + {0,1}^m
        let ranges: Vec<(i64, i64)> = xm.iter().map(|&v| (v, v + 1)).collect();
        let d: f64 = product_ranges(&ranges)
            .iter()
            .map(|ys| {
                let l = lam.entry(ys, below);
                if l == 0.0 {
                    0.0
                } else {
                    tm.entry(xm, ys) * l
                }
            })
            .sum();
        if d == 0.0 {
            return Ok(0.0);
        }
        p *= tm.entry(xm, ym) * lam.entry(ym, below) / d;
        if p == 0.0 {
            return Ok(0.0);
        }
    }
    Ok(p)
}

/// Exact law after `steps` parallel steps from `start`, keyed by levels.
pub fn parallel_law_exact(
    betas: &[f64],
    alphas: &[f64],
    start: &InterlacingArray,
    steps: usize,
) -> Result<BTreeMap<Vec<Vec<i64>>, f64>> {
    let n = start.n();
    let mut law: BTreeMap<Vec<Vec<i64>>, f64> = BTreeMap::new();
    law.insert(start.levels(), 1.0);
    for t in 0..steps {
        let mut next = BTreeMap::new();
        for (lv, p) in &law {
            let from = InterlacingArray::from_levels(lv.clone())?;
            let ranges: Vec<(i64, i64)> = from.flat().iter().map(|&v| (v, v + 1)).collect();
            for cand in product_ranges(&ranges) {
                let mut levels = Vec::with_capacity(n);
                let mut i = 0;
                for m in 1..=n {
                    levels.push(cand[i..i + m].to_vec());
                    i += m;
                }
                if levels.iter().any(|l| l.windows(2).any(|w| w[0] >= w[1])) {
                    continue;
                }
                let to = InterlacingArray::from_levels(levels.clone())?;
                let q = par_transition_prob(betas, alphas, t, &from, &to)?;
                if q > 0.0 {
                    *next.entry(levels).or_insert(0.0) += p * q;
                }
            }
        }
        law = next;
    }
    Ok(law)
}

/// Matrix form of the two-level intertwining: start from
/// `m*(x2) Lambda(x2, x1)`, apply one sequential step and compare with
/// `(m* P*)(y2) Lambda(y2, y1)`. Returns the max absolute residual over
/// `y2` in `window` states. `m_star` is a list of `(x2, mass)`.
pub fn intertwining_check(law: &StepLaw, m_star: &[(Vec<i64>, f64)], window: Window) -> Result<f64> {
    if law.alphas.len() < 2 {
        return Err(invalid("need two level weights"));
    }
    let w = Weights::new(&law.alphas[..2])?;
    let f = Series::from(law.family);
    let span = window.width() + 4;
    let t2 = Toeplitz::new(&w, &f, span)?;
    let t1 = Toeplitz::new(&w.first(1)?, &f, span)?;
    let lam = Lambda::new(&w)?;
    let mut evolved: BTreeMap<(Vec<i64>, i64), f64> = BTreeMap::new();
    for (x2, mass) in m_star {
        if !window.contains(x2) {
            return Err(invalid("initial support must lie inside the window"));
        }
        for x1 in Lambda::support(x2) {
            let mu = mass * lam.entry(x2, &x1);
            for y1 in window.lo..=window.hi {
                let p1 = t1.entry(&x1, &[y1]);
                if p1 == 0.0 {
                    continue;
                }
                let law2 = bivariate_conditional(law.family, w.alphas[1], x2, &[y1]);
                let Ok(law2) = law2 else { continue };
                for (y2, q) in law2.enumerate(window) {
                    if q > 0.0 {
                        *evolved.entry((y2, y1)).or_insert(0.0) += mu * p1 * q;
                    }
                }
            }
        }
    }
    let mut worst: f64 = 0.0;
    for y2 in window.states(2) {
        let ms: f64 = m_star.iter().map(|(x2, m)| m * t2.entry(x2, &y2)).sum();
        for y1 in Lambda::support(&y2) {
            let target = ms * lam.entry(&y2, &y1);
            let got = evolved.get(&(y2.clone(), y1[0])).copied().unwrap_or(0.0);
            worst = worst.max(libm::fabs(target - got));
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficients() {
        assert_eq!(Symbol::BernoulliLeft(0.3).coeff(1), 0.3);
        assert_eq!(Symbol::GeometricLeft(0.5).coeff(3), 0.125);
        assert_eq!(Symbol::Mixed(0.2, 0.5).coeff(0), 0.2);
        assert_eq!(Symbol::BernoulliRight(0.7).coeff(-1), 0.7);
        assert_eq!(Symbol::GeometricRight(0.5).coeff(-2), 0.25);
        assert_eq!(Symbol::GeometricRight(0.5).coeff(2), 0.0);
    }

    #[test]
    fn product_coefficients() {
        // (1 + p z)/(1 - q z): f(m) = q^m + p q^{m-1}
        let s = Series::product(vec![Symbol::BernoulliLeft(0.3), Symbol::GeometricLeft(0.5)]);
        assert!((s.coeff(3) - (0.125 + 0.3 * 0.25)).abs() < 1e-15);
        // (1 - qz)^{-1} (1 - g/z)^{-1}: f(m) = q^m / (1 - q g), m >= 0
        let s = Series::product(vec![Symbol::GeometricLeft(0.5), Symbol::GeometricRight(0.4)]);
        assert!((s.coeff(2) - 0.25 / 0.8).abs() < 1e-14);
        assert!((s.coeff(-2) - 0.16 / 0.8).abs() < 1e-14);
    }

    #[test]
    fn one_level_bernoulli_right() {
        let w = Weights::new(&[1.0]).unwrap();
        let t = Toeplitz::new(&w, &Series::from(Symbol::BernoulliRight(0.5)), 4).unwrap();
        assert!((t.entry(&[0], &[0]) - 1.0 / 1.5).abs() < 1e-15);
        assert!((t.entry(&[0], &[1]) - 0.5 / 1.5).abs() < 1e-15);
        assert_eq!(t.entry(&[0], &[-1]), 0.0);
    }

    #[test]
    fn window_states() {
        let w = Window::new(0, 3).unwrap();
        assert_eq!(w.states(2).len(), 6);
        assert_eq!(w.states(4), vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn direct_examples() {
        let s = Symbol::BernoulliLeft(0.5);
        assert_eq!(minor_det_direct(&s, &[0], &[-1], None).unwrap(), 0.5);
        assert_eq!(minor_det_direct(&s, &[0], &[1], None).unwrap(), 0.0);
        let g = Symbol::GeometricLeft(0.5);
        assert_eq!(minor_det_direct(&g, &[0, 2], &[0, 1], None).unwrap(), 0.5);
        assert_eq!(minor_det_closed(&s, &[0, 1], &[-1, 0], None).unwrap(), 0.25);
        assert!(minor_det_closed(&s, &[1, 0], &[0, 1], None).is_err());
    }

    #[test]
    fn lambda_support_and_sums() {
        let w = Weights::new(&[1.0, 1.0, 1.0]).unwrap();
        let l = Lambda::new(&w).unwrap();
        let x = [-3, 0, 4];
        let s: f64 = Lambda::support(&x).iter().map(|y| l.entry(&x, y)).sum();
        assert!((s - 1.0).abs() < 1e-13);
        assert_eq!(l.entry(&x, &[-3, 1]), 0.0);
    }
}
