//! Interlacing arrays (Gelfand-Tsetlin patterns), the height function and the
//! lozenge picture.
//!
//! Level `m` holds `m` strictly increasing integers `x_1^m < ... < x_m^m` and
//! neighbouring levels interlace: `x_k^{m+1} < x_k^m <= x_{k+1}^{m+1}`.
//! Levels are stored back to back in one buffer, level `m` starting at offset
//! `m(m-1)/2`, which makes the pushing string `(k,m) -> (k+1,m+1)` a constant
//! stride `m` away.

use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[inline]
pub(crate) fn offset(m: usize) -> usize {
    m * (m - 1) / 2
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "ArrayRepr", try_from = "ArrayRepr")]
pub struct InterlacingArray {
    n: usize,
    x: Vec<i64>,
}

#[derive(Serialize, Deserialize)]
struct ArrayRepr {
    n: usize,
    levels: Vec<Vec<i64>>,
}

impl From<InterlacingArray> for ArrayRepr {
    fn from(a: InterlacingArray) -> Self {
        ArrayRepr {
            n: a.n,
            levels: a.levels(),
        }
    }
}

impl TryFrom<ArrayRepr> for InterlacingArray {
    type Error = Error;
    fn try_from(r: ArrayRepr) -> Result<Self> {
        if r.levels.len() != r.n {
            return Err(invalid("field n does not match the number of levels"));
        }
        InterlacingArray::from_levels(r.levels)
    }
}

/// Which inequality failed, see [`InterlacingArray::validate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    /// `x_{k-1}^m < x_k^m` fails.
    NotIncreasing,
    /// `x_k^m < x_k^{m-1}` fails.
    LeftInterlace,
    /// `x_{k-1}^{m-1} <= x_k^m` fails.
    RightInterlace,
}

/// First violated inequality, reported at particle `(k, m)` of the upper level.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Violation {
    pub k: usize,
    pub m: usize,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            ViolationKind::NotIncreasing => "x_{k-1}^m < x_k^m",
            ViolationKind::LeftInterlace => "x_k^m < x_k^{m-1}",
            ViolationKind::RightInterlace => "x_{k-1}^{m-1} <= x_k^m",
        };
        write!(f, "violation at (k={}, m={}): {} fails", self.k, self.m, what)
    }
}

impl InterlacingArray {
    /// Fully packed state `x_k^m = k - m - 1`.
    pub fn packed(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("packed state needs n >= 1"));
        }
        let mut x = Vec::with_capacity(offset(n + 1));
        for m in 1..=n {
            for k in 1..=m {
                x.push(k as i64 - m as i64 - 1);
            }
        }
        Ok(InterlacingArray { n, x })
    }

    /// Builds an array from explicit levels. Only the shape is checked here;
    /// call [`validate`](Self::validate) for the ordering constraints.
    pub fn from_levels(levels: Vec<Vec<i64>>) -> Result<Self> {
        let n = levels.len();
        if n == 0 {
            return Err(invalid("an array needs at least one level"));
        }
        let mut x = Vec::with_capacity(offset(n + 1));
        for (i, lv) in levels.iter().enumerate() {
            if lv.len() != i + 1 {
                return Err(invalid(alloc::format!(
                    "level {} has {} entries, expected {}",
                    i + 1,
                    lv.len(),
                    i + 1
                )));
            }
            x.extend_from_slice(lv);
        }
        Ok(InterlacingArray { n, x })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Level `m` (1-based), `x_1^m < ... < x_m^m`.
    pub fn level(&self, m: usize) -> &[i64] {
        assert!(m >= 1 && m <= self.n, "level {m} out of range");
        &self.x[offset(m)..offset(m) + m]
    }

    pub fn level_mut(&mut self, m: usize) -> &mut [i64] {
        assert!(m >= 1 && m <= self.n, "level {m} out of range");
        let o = offset(m);
        &mut self.x[o..o + m]
    }

    /// `x_k^m`, both indices 1-based.
    pub fn get(&self, k: usize, m: usize) -> i64 {
        self.level(m)[k - 1]
    }

    pub fn levels(&self) -> Vec<Vec<i64>> {
        (1..=self.n).map(|m| self.level(m).to_vec()).collect()
    }

    pub(crate) fn flat(&self) -> &[i64] {
        &self.x
    }

    pub(crate) fn flat_mut(&mut self) -> &mut [i64] {
        &mut self.x
    }

    /// Restriction to levels `1..=n`.
    pub fn truncate(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.n {
            return Err(invalid("truncation level out of range"));
        }
        Ok(InterlacingArray {
            n,
            x: self.x[..offset(n + 1)].to_vec(),
        })
    }

    pub fn validate(&self) -> core::result::Result<(), Violation> {
        for m in 1..=self.n {
            let lv = self.level(m);
            for k in 2..=m {
                if lv[k - 2] >= lv[k - 1] {
                    return Err(Violation {
                        k,
                        m,
                        kind: ViolationKind::NotIncreasing,
                    });
                }
            }
            if m == 1 {
                continue;
            }
            let below = self.level(m - 1);
            for k in 1..=m {
                if k < m && lv[k - 1] >= below[k - 1] {
                    return Err(Violation {
                        k,
                        m,
                        kind: ViolationKind::LeftInterlace,
                    });
                }
                if k > 1 && below[k - 2] > lv[k - 1] {
                    return Err(Violation {
                        k,
                        m,
                        kind: ViolationKind::RightInterlace,
                    });
                }
            }
        }
        Ok(())
    }

    /// `h(x, n) = #{k : x_k^n > x}`. Level 0 is empty, so `h(x, 0) = 0`.
    pub fn height(&self, x: i64, n: usize) -> Result<usize> {
        if n > self.n {
            return Err(invalid(alloc::format!(
                "level {n} out of range 0..={}",
                self.n
            )));
        }
        Ok(self.height_unchecked(x, n))
    }

    #[inline]
    pub(crate) fn height_unchecked(&self, x: i64, n: usize) -> usize {
        if n == 0 {
            return 0;
        }
        let lv = self.level(n);
        lv.len() - lv.partition_point(|&v| v <= x)
    }

    pub fn is_occupied(&self, x: i64, n: usize) -> bool {
        n >= 1 && n <= self.n && self.level(n).binary_search(&x).is_ok()
    }

    /// Lozenge whose white triangle sits at `(x, n)`.
    pub fn classify_lozenge(&self, x: i64, n: usize) -> Result<LozengeType> {
        if n == 0 || n > self.n {
            return Err(invalid(alloc::format!(
                "level {n} out of range 1..={}",
                self.n
            )));
        }
        if self.is_occupied(x, n) {
            return Ok(LozengeType::I);
        }
        let flat = self.height_unchecked(x, n) == self.height_unchecked(x, n - 1);
        Ok(if flat { FLAT_STEP } else { flat_step_other() })
    }

    /// Leftmost particles `(x_1^1, ..., x_1^n)`: the TASEP projection.
    pub fn leftmost(&self) -> Vec<i64> {
        (1..=self.n).map(|m| self.get(1, m)).collect()
    }

    /// Rightmost particles `(x_1^1, x_2^2, ..., x_n^n)`: the PushASEP projection.
    pub fn rightmost(&self) -> Vec<i64> {
        (1..=self.n).map(|m| self.get(m, m)).collect()
    }
}

/// Type assigned to an empty site whose height does not change between
/// levels `n-1` and `n`. The other empty sites get the remaining type.
pub const FLAT_STEP: LozengeType = LozengeType::III;

const fn flat_step_other() -> LozengeType {
    match FLAT_STEP {
        LozengeType::III => LozengeType::II,
        _ => LozengeType::III,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LozengeType {
    I,
    II,
    III,
}

impl LozengeType {
    pub const ALL: [LozengeType; 3] = [LozengeType::I, LozengeType::II, LozengeType::III];

    pub fn as_str(self) -> &'static str {
        match self {
            LozengeType::I => "I",
            LozengeType::II => "II",
            LozengeType::III => "III",
        }
    }
}

impl core::str::FromStr for LozengeType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" | "1" => Ok(LozengeType::I),
            "II" | "2" => Ok(LozengeType::II),
            "III" | "3" => Ok(LozengeType::III),
            _ => Err(invalid(alloc::format!("unknown lozenge type {s:?}"))),
        }
    }
}

/// Argument `(x, n, t)` of the correlation kernel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimePoint {
    pub x: i64,
    pub n: usize,
    pub t: f64,
}

impl SpaceTimePoint {
    pub fn new(x: i64, n: usize, t: f64) -> Result<Self> {
        if n == 0 {
            return Err(invalid("level must be >= 1"));
        }
        if !(t >= 0.0) || !t.is_finite() {
            return Err(invalid("time must be finite and >= 0"));
        }
        Ok(SpaceTimePoint { x, n, t })
    }
}
