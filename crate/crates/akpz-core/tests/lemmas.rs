//! Closed-form minors against direct elimination in exact arithmetic.

use akpz_core::transfer::{minor_det_closed, minor_det_direct, Symbol};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Q = BigRational;

fn q(a: i64, b: i64) -> Q {
    Q::new(BigInt::from(a), BigInt::from(b))
}

fn increasing<R: Rng>(rng: &mut R, n: usize) -> Vec<i64> {
    loop {
        let mut v: Vec<i64> = (0..n).map(|_| rng.random_range(-6..=6)).collect();
        v.sort();
        v.dedup();
        if v.len() == n {
            return v;
        }
    }
}

/// Y close to X so that the support conditions are met often enough.
fn nearby<R: Rng>(rng: &mut R, x: &[i64], len: usize) -> Vec<i64> {
    loop {
        let mut v: Vec<i64> = (0..len)
            .map(|i| (x[i.min(x.len() - 1)] + rng.random_range(-2..=1)).clamp(-6, 6))
            .collect();
        v.sort();
        v.dedup();
        if v.len() == len {
            return v;
        }
    }
}

fn random_symbol<R: Rng>(rng: &mut R) -> Symbol<Q> {
    let r = |rng: &mut R| q(rng.random_range(1..=9), rng.random_range(1..=9));
    match rng.random_range(0..5) {
        0 => Symbol::BernoulliLeft(r(rng)),
        1 => Symbol::BernoulliRight(r(rng)),
        2 => Symbol::GeometricLeft(r(rng)),
        3 => Symbol::GeometricRight(r(rng)),
        _ => Symbol::Mixed(r(rng), r(rng)),
    }
}

#[test]
fn coefficient_examples() {
    assert_eq!(Symbol::BernoulliLeft(q(1, 3)).coeff(1), q(1, 3));
    assert_eq!(Symbol::GeometricLeft(q(1, 2)).coeff(3), q(1, 8));
    assert_eq!(Symbol::Mixed(q(2, 5), q(1, 2)).coeff(0), q(2, 5));
    assert_eq!(Symbol::Mixed(q(2, 5), q(1, 2)).coeff(2), q(1, 4));
    assert_eq!(Symbol::BernoulliRight(q(3, 4)).coeff(-1), q(3, 4));
    assert_eq!(Symbol::GeometricRight(q(1, 3)).coeff(-2), q(1, 9));
    assert_eq!(Symbol::GeometricRight(q(1, 3)).coeff(1), q(0, 1));
}

#[test]
fn direct_examples() {
    let p = q(2, 7);
    let s = Symbol::BernoulliLeft(p.clone());
    assert_eq!(minor_det_direct(&s, &[0], &[0], None).unwrap(), q(1, 1));
    assert_eq!(minor_det_direct(&s, &[0], &[-1], None).unwrap(), p.clone());
    assert_eq!(minor_det_direct(&s, &[0], &[1], None).unwrap(), q(0, 1));
    assert_eq!(minor_det_closed(&s, &[0, 1], &[-1, 0], None).unwrap(), p.clone() * p.clone());
    let g = Symbol::GeometricLeft(q(1, 3));
    assert_eq!(minor_det_direct(&g, &[0, 2], &[0, 1], None).unwrap(), q(1, 3));
    let m = Symbol::Mixed(p.clone(), q(1, 3));
    assert_eq!(minor_det_closed(&m, &[0], &[0], None).unwrap(), p);
    // hand computation: q^2 (1 - p)
    let x = [0, 1];
    let y = [-1, 0];
    let want = q(1, 9) * q(5, 7);
    assert_eq!(minor_det_direct(&m, &x, &y, None).unwrap(), want);
    assert_eq!(minor_det_closed(&m, &x, &y, None).unwrap(), want);
}

#[test]
fn closed_rejects_unsorted_input() {
    let s = Symbol::GeometricLeft(q(1, 2));
    assert!(minor_det_closed(&s, &[1, 0], &[0, 1], None).is_err());
    assert!(minor_det_closed(&s, &[0, 1], &[1, 1], None).is_err());
}

#[test]
fn thousand_random_instances_agree_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1e44a);
    let mut nonzero = 0;
    for _ in 0..1000 {
        let n = rng.random_range(1..=4);
        let x = increasing(&mut rng, n);
        let s = random_symbol(&mut rng);
        let y = if rng.random_bool(0.7) {
            nearby(&mut rng, &x, n)
        } else {
            increasing(&mut rng, n)
        };
        let a = minor_det_direct(&s, &x, &y, None).unwrap();
        let b = minor_det_closed(&s, &x, &y, None).unwrap();
        assert_eq!(a, b, "{s:?} X={x:?} Y={y:?}");
        if a != q(0, 1) {
            nonzero += 1;
        }
    }
    assert!(nonzero > 200, "only {nonzero} instances inside the support");
}

#[test]
fn random_instances_with_virtual_column() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xab8);
    let mut nonzero = 0;
    for i in 0..1000 {
        let n = rng.random_range(1..=4);
        let x = increasing(&mut rng, n);
        let base = q(rng.random_range(1..=9), rng.random_range(1..=9));
        let s = if i % 2 == 0 {
            Symbol::GeometricLeft(base.clone())
        } else {
            Symbol::Mixed(q(rng.random_range(1..=9), rng.random_range(1..=9)), base.clone())
        };
        let y = if n == 1 {
            vec![]
        } else if rng.random_bool(0.7) {
            // y_i in [x_i, x_{i+1}]
            loop {
                let v: Vec<i64> = (0..n - 1).map(|k| rng.random_range(x[k]..=x[k + 1])).collect();
                if v.windows(2).all(|w| w[0] < w[1]) {
                    break v;
                }
            }
        } else {
            increasing(&mut rng, n - 1)
        };
        let a = minor_det_direct(&s, &x, &y, Some(&base)).unwrap();
        let b = minor_det_closed(&s, &x, &y, Some(&base)).unwrap();
        assert_eq!(a, b, "{s:?} X={x:?} Y={y:?}");
        if a != q(0, 1) {
            nonzero += 1;
        }
    }
    assert!(nonzero > 200);
}

#[test]
fn float_path_matches_to_1e12() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..300 {
        let n = rng.random_range(1..=4);
        let x = increasing(&mut rng, n);
        let y = nearby(&mut rng, &x, n);
        let p: f64 = rng.random_range(0.1..0.9);
        let s = match rng.random_range(0..3) {
            0 => Symbol::BernoulliLeft(p),
            1 => Symbol::GeometricRight(p),
            _ => Symbol::Mixed(p, 0.5 * p),
        };
        let a = minor_det_direct(&s, &x, &y, None).unwrap();
        let b = minor_det_closed(&s, &x, &y, None).unwrap();
        assert!((a - b).abs() < 1e-12, "{s:?} {x:?} {y:?}: {a} {b}");
    }
}
