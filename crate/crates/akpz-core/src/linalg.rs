//! Small dense determinants, generic over the scalar so that the same
//! elimination runs in exact rational arithmetic and in `f64`.

use alloc::vec::Vec;

use num_traits::{Num, Signed};

/// Determinant of the `n x n` row-major matrix `a` by Gaussian elimination
/// with partial pivoting on the largest absolute value.
pub fn det<T>(mut a: Vec<T>, n: usize) -> T
where
    T: Clone + Num + Signed + PartialOrd,
{
    assert_eq!(a.len(), n * n);
    let mut sign_flip = false;
    let mut acc = T::one();
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col * n + col].abs();
        for r in col + 1..n {
            let v = a[r * n + col].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best.is_zero() {
            return T::zero();
        }
        if piv != col {
            for c in 0..n {
                a.swap(piv * n + c, col * n + c);
            }
            sign_flip = !sign_flip;
        }
        let p = a[col * n + col].clone();
        for r in col + 1..n {
            let f = a[r * n + col].clone() / p.clone();
            if f.is_zero() {
                continue;
            }
            for c in col + 1..n {
                let sub = f.clone() * a[col * n + c].clone();
                a[r * n + c] = a[r * n + c].clone() - sub;
            }
        }
        acc = acc * p;
    }
    if sign_flip {
        -acc
    } else {
        acc
    }
}

/// `a^e` for any integer `e` (negative powers through the reciprocal).
pub fn ipow<T: Clone + Num>(a: &T, e: i64) -> T {
    let p = num_traits::pow(a.clone(), e.unsigned_abs() as usize);
    if e >= 0 {
        p
    } else {
        T::one() / p
    }
}

/// Vandermonde-type product `prod_{i<j} (x_j - x_i)`.
pub fn vandermonde(x: &[i64]) -> f64 {
    let mut v = 1.0;
    for j in 0..x.len() {
        for i in 0..j {
            v *= (x[j] - x[i]) as f64;
        }
    }
    v
}
