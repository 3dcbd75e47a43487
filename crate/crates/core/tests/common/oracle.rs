//! Exact polynomial least squares over the rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Exact least squares through the normal equations over the rationals.
pub fn normal_equations(ys: &[i64], degree: usize) -> Vec<BigRational> {
    let m = degree + 1;
    let mut a = vec![vec![BigRational::zero(); m + 1]; m];
    for (i, &y) in ys.iter().enumerate() {
        let x = BigRational::from_integer(BigInt::from(i));
        let powers: Vec<BigRational> = (0..m)
            .map(|p| {
                let mut v = BigRational::one();
                for _ in 0..(degree - p) {
                    v *= &x;
                }
                v
            })
            .collect();
        for r in 0..m {
            for c in 0..m {
                a[r][c] += &powers[r] * &powers[c];
            }
            a[r][m] += &powers[r] * BigRational::from_integer(BigInt::from(y));
        }
    }
    for col in 0..m {
        let pivot = (col..m).find(|&r| !a[r][col].is_zero()).expect("singular");
        a.swap(col, pivot);
        for r in 0..m {
            if r != col && !a[r][col].is_zero() {
                let f = &a[r][col] / &a[col][col];
                for c in col..=m {
                    let t = &f * &a[col][c];
                    a[r][c] -= t;
                }
            }
        }
    }
    (0..m).map(|r| &a[r][m] / &a[r][r]).collect()
}
