//! Levenberg-Marquardt for small nonlinear least-squares problems.

use super::Scalar;

/// A model `f(params, x)` with its gradient in the parameters.
pub trait Model<T: Scalar> {
    fn arity(&self) -> usize;
    fn eval(&self, params: &[T], x: T) -> T;
    fn gradient(&self, params: &[T], x: T, out: &mut [T]);
    /// Rejects parameter vectors outside the model's domain.
    fn admissible(&self, _params: &[T]) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LmOptions<T> {
    pub max_iterations: usize,
    /// Stop once an accepted step improves `ss_res` by less than this fraction.
    pub rel_tolerance: T,
}

impl<T: Scalar> Default for LmOptions<T> {
    fn default() -> Self {
        LmOptions { max_iterations: 200, rel_tolerance: T::from_f64(1e-10).unwrap() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmReport<T> {
    pub params: Vec<T>,
    pub ss_res: T,
    pub iterations: usize,
    pub converged: bool,
    /// `ss_res` at the start and after every accepted step.
    pub trace: Vec<T>,
}

pub fn sum_sq<T: Scalar, M: Model<T>>(model: &M, params: &[T], xs: &[T], ys: &[T]) -> T {
    xs.iter().zip(ys).fold(T::zero(), |acc, (&x, &y)| {
        let r = y - model.eval(params, x);
        acc + r * r
    })
}

pub fn minimize<T: Scalar, M: Model<T>>(
    model: &M,
    xs: &[T],
    ys: &[T],
    start: &[T],
    options: LmOptions<T>,
) -> LmReport<T> {
    let m = model.arity();
    let ten = T::from_f64(10.0).unwrap();
    let lambda_max = T::from_f64(1e16).unwrap();
    let tiny = T::min_positive_value().sqrt();

    let mut params = start.to_vec();
    let mut ss = sum_sq(model, &params, xs, ys);
    let mut trace = vec![ss];
    if !ss.is_finite() || !model.admissible(&params) {
        return LmReport { params, ss_res: T::infinity(), iterations: 0, converged: false, trace };
    }
    let mut lambda = T::from_f64(1e-3).unwrap();
    let mut grad = vec![T::zero(); m];
    let mut jtj = vec![T::zero(); m * m];
    let mut jtr = vec![T::zero(); m];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < options.max_iterations {
        iterations += 1;
        jtj.iter_mut().for_each(|v| *v = T::zero());
        jtr.iter_mut().for_each(|v| *v = T::zero());
        for (&x, &y) in xs.iter().zip(ys) {
            model.gradient(&params, x, &mut grad);
            let r = y - model.eval(&params, x);
            for i in 0..m {
                jtr[i] = jtr[i] + grad[i] * r;
                for j in 0..=i {
                    jtj[i * m + j] = jtj[i * m + j] + grad[i] * grad[j];
                }
            }
        }
        if jtj.iter().chain(&jtr).any(|v| !v.is_finite()) {
            break;
        }
        for i in 0..m {
            for j in 0..i {
                jtj[j * m + i] = jtj[i * m + j];
            }
        }

        let mut accepted = false;
        while lambda <= lambda_max {
            // Marquardt's damping: scale by each parameter's own curvature.
            let mut damped = jtj.clone();
            for i in 0..m {
                damped[i * m + i] = jtj[i * m + i] + lambda * jtj[i * m + i].max(tiny);
            }
            let Some(step) = solve_small(damped, jtr.clone(), m) else {
                lambda = lambda * ten;
                continue;
            };
            let candidate: Vec<T> = params.iter().zip(&step).map(|(&p, &d)| p + d).collect();
            let candidate_ss = if model.admissible(&candidate) {
                sum_sq(model, &candidate, xs, ys)
            } else {
                T::infinity()
            };
            if candidate_ss.is_finite() && candidate_ss < ss {
                let improvement = (ss - candidate_ss) / ss.max(tiny);
                params = candidate;
                ss = candidate_ss;
                trace.push(ss);
                lambda = (lambda / ten).max(T::from_f64(1e-12).unwrap());
                accepted = true;
                if improvement < options.rel_tolerance {
                    converged = true;
                }
                break;
            }
            lambda = lambda * ten;
        }
        if !accepted {
            // No damping produces a decrease: a (local) minimum up to rounding.
            converged = true;
        }
        if converged || ss == T::zero() {
            converged = true;
            break;
        }
    }
    LmReport { params, ss_res: ss, iterations, converged, trace }
}

/// Gaussian elimination with partial pivoting on a row-major m×m system.
fn solve_small<T: Scalar>(mut a: Vec<T>, mut b: Vec<T>, m: usize) -> Option<Vec<T>> {
    for col in 0..m {
        let pivot = (col..m).max_by(|&i, &j| a[i * m + col].abs().partial_cmp(&a[j * m + col].abs()).unwrap())?;
        if !(a[pivot * m + col].abs() > T::zero()) {
            return None;
        }
        if pivot != col {
            for c in 0..m {
                a.swap(pivot * m + c, col * m + c);
            }
            b.swap(pivot, col);
        }
        for r in (col + 1)..m {
            let f = a[r * m + col] / a[col * m + col];
            for c in col..m {
                a[r * m + c] = a[r * m + c] - f * a[col * m + c];
            }
            b[r] = b[r] - f * b[col];
        }
    }
    let mut x = vec![T::zero(); m];
    for r in (0..m).rev() {
        let s = ((r + 1)..m).fold(b[r], |s, c| s - a[r * m + c] * x[c]);
        x[r] = s / a[r * m + r];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}
