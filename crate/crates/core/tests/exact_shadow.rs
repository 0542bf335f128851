//! GENP in exact rational arithmetic breaks down exactly when some leading
//! minor vanishes; the minors come from the fraction-free determinant.

use genp_core::harness::{exact_determinant_int, is_strongly_nonsingular_int};
use genp_core::randgen::{finite_set_integers, FiniteSet, MatrixKind, Seed};
use num_rational::Ratio;
use proptest::prelude::*;

type Q = Ratio<i128>;

/// Pivots of rational GENP, or the 1-based step of the first zero pivot.
fn rational_genp(m: &[Vec<i64>]) -> Result<Vec<Q>, usize> {
    let n = m.len();
    let mut a: Vec<Vec<Q>> = m.iter().map(|r| r.iter().map(|&v| Q::from_integer(v as i128)).collect()).collect();
    let mut pivots = Vec::with_capacity(n);
    for k in 0..n {
        let p = a[k][k];
        if p == Q::from_integer(0) {
            return Err(k + 1);
        }
        pivots.push(p);
        for i in k + 1..n {
            let l = a[i][k] / p;
            for j in k..n {
                let t = a[k][j];
                a[i][j] -= l * t;
            }
        }
    }
    Ok(pivots)
}

fn leading_minors(m: &[Vec<i64>]) -> Vec<i128> {
    (1..=m.len())
        .map(|j| {
            let lead: Vec<Vec<i64>> = m[..j].iter().map(|r| r[..j].to_vec()).collect();
            exact_determinant_int(&lead).unwrap()
        })
        .collect()
}

fn check(m: &[Vec<i64>]) {
    let minors = leading_minors(m);
    let first_zero = minors.iter().position(|&d| d == 0);
    match rational_genp(m) {
        Ok(pivots) => {
            assert_eq!(first_zero, None);
            assert!(is_strongly_nonsingular_int(m).unwrap());
            // pivot k is the ratio of consecutive leading minors
            let mut prev = 1i128;
            for (p, &d) in pivots.iter().zip(&minors) {
                assert_eq!(*p, Q::new(d, prev));
                prev = d;
            }
            let det: Q = pivots.iter().product();
            assert_eq!(det, Q::from_integer(exact_determinant_int(m).unwrap()));
        }
        Err(step) => {
            assert_eq!(first_zero, Some(step - 1));
            assert!(!is_strongly_nonsingular_int(m).unwrap());
        }
    }
}

#[test]
fn small_digit_matrices() {
    // {0, 1, 2} makes vanishing minors common enough to hit both branches
    let small = FiniteSet::range(0, 2).unwrap();
    let (mut broke, mut ran) = (0, 0);
    for t in 0..2000u64 {
        for kind in [MatrixKind::Dense, MatrixKind::Toeplitz] {
            let m = finite_set_integers(Seed::new(11).with_stream(t), 4, 4, &small, kind).unwrap();
            check(&m);
            if rational_genp(&m).is_ok() {
                ran += 1;
            } else {
                broke += 1;
            }
        }
    }
    assert!(broke > 100 && ran > 100, "broke {broke}, ran {ran}");
}

proptest! {
    #[test]
    fn shadow_agrees_with_minors(entries in proptest::collection::vec(-9i64..=9, 25)) {
        let m: Vec<Vec<i64>> = entries.chunks(5).map(|r| r.to_vec()).collect();
        check(&m);
    }
}
