//! Polynomials as coefficient slices, highest degree first.

use super::Scalar;

pub fn eval<T: Scalar>(coeffs: &[T], x: T) -> T {
    coeffs.iter().fold(T::zero(), |acc, &c| acc * x + c)
}

pub fn derivative<T: Scalar>(coeffs: &[T]) -> Vec<T> {
    let d = coeffs.len().saturating_sub(1);
    coeffs[..d]
        .iter()
        .enumerate()
        .map(|(i, &c)| c * T::from_usize(d - i).unwrap())
        .collect()
}

/// Roots of `p` strictly inside `(lo, hi)` at which `p` changes sign, ascending.
///
/// The interval is cut at the sign-changing roots of `p'`, so `p` is monotone
/// on every piece and each piece holds at most one crossing, found by bisection.
pub fn sign_changing_roots<T: Scalar>(coeffs: &[T], lo: T, hi: T) -> Vec<T> {
    let first = coeffs.iter().position(|c| *c != T::zero());
    let Some(first) = first else { return Vec::new() };
    let p = &coeffs[first..];
    match p.len() {
        0 | 1 => Vec::new(),
        2 => {
            let r = -p[1] / p[0];
            if r > lo && r < hi {
                vec![r]
            } else {
                Vec::new()
            }
        }
        _ => {
            let mut cuts = vec![lo];
            cuts.extend(sign_changing_roots(&derivative(p), lo, hi));
            cuts.push(hi);
            let mut roots = Vec::new();
            for w in cuts.windows(2) {
                let (a, b) = (w[0], w[1]);
                let (fa, fb) = (eval(p, a), eval(p, b));
                if fa == T::zero() && a > lo && a < hi {
                    // crossing exactly at a cut: decide by the neighbours
                    if roots.last() != Some(&a) && crosses_at(p, a, lo, hi) {
                        roots.push(a);
                    }
                }
                if (fa < T::zero() && fb > T::zero()) || (fa > T::zero() && fb < T::zero()) {
                    roots.push(bisect(p, a, b, fa));
                }
            }
            roots
        }
    }
}

fn crosses_at<T: Scalar>(p: &[T], x: T, lo: T, hi: T) -> bool {
    let h = (hi - lo) * T::from_f64(1e-9).unwrap();
    let (l, r) = (eval(p, x - h), eval(p, x + h));
    (l < T::zero() && r > T::zero()) || (l > T::zero() && r < T::zero())
}

fn bisect<T: Scalar>(p: &[T], mut a: T, mut b: T, mut fa: T) -> T {
    let two = T::one() + T::one();
    for _ in 0..200 {
        let m = (a + b) / two;
        if m <= a || m >= b {
            break;
        }
        let fm = eval(p, m);
        if fm == T::zero() {
            return m;
        }
        if (fm < T::zero()) == (fa < T::zero()) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    (a + b) / two
}

/// Local extrema of the polynomial strictly inside `(lo, hi)`.
pub fn interior_extrema<T: Scalar>(coeffs: &[T], lo: T, hi: T) -> Vec<T> {
    sign_changing_roots(&derivative(coeffs), lo, hi)
}
