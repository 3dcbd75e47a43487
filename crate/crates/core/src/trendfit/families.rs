use super::linalg::{lstsq_refined, Matrix};
use super::lm::{self, LmOptions, Model};
use super::{poly, FitConfig, FitResult, ModelFamily, Scalar};

fn k<T: Scalar>(v: f64) -> T {
    T::from_f64(v).unwrap()
}

fn xs<T: Scalar>(n: usize) -> Vec<T> {
    (0..n).map(|i| T::from_usize(i).unwrap()).collect()
}

/// y = a·e^{βx} + c, reported as (a, b = e^β, c). Fitting in β keeps b > 0.
struct Exponential;

impl<T: Scalar> Model<T> for Exponential {
    fn arity(&self) -> usize {
        3
    }
    fn eval(&self, p: &[T], x: T) -> T {
        p[0] * (p[1] * x).exp() + p[2]
    }
    fn gradient(&self, p: &[T], x: T, out: &mut [T]) {
        let e = (p[1] * x).exp();
        out[0] = e;
        out[1] = p[0] * x * e;
        out[2] = T::one();
    }
}

/// y = L·σ(k(x − x0)) + b
struct Sigmoid;

pub fn logistic<T: Scalar>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

impl<T: Scalar> Model<T> for Sigmoid {
    fn arity(&self) -> usize {
        4
    }
    fn eval(&self, p: &[T], x: T) -> T {
        p[0] * logistic(p[1] * (x - p[2])) + p[3]
    }
    fn gradient(&self, p: &[T], x: T, out: &mut [T]) {
        let s = logistic(p[1] * (x - p[2]));
        let ds = s * (T::one() - s);
        out[0] = s;
        out[1] = p[0] * ds * (x - p[2]);
        out[2] = -p[0] * ds * p[1];
        out[3] = T::one();
    }
}

/// Evaluates a family's curve with reported coefficients.
pub fn predict<T: Scalar>(family: ModelFamily, coeffs: &[T], x: T) -> T {
    match family {
        ModelFamily::Linear => coeffs[0] * x + coeffs[1],
        ModelFamily::Exponential => coeffs[0] * coeffs[1].powf(x) + coeffs[2],
        ModelFamily::Logarithmic => coeffs[0] * (coeffs[1] * (x + T::one())).ln() + coeffs[2],
        ModelFamily::Sigmoid => Sigmoid.eval(coeffs, x),
        ModelFamily::Polynomial(_) => poly::eval(coeffs, x),
    }
}

pub(super) struct Raw<T> {
    pub coefficients: Vec<T>,
    pub converged: bool,
}

pub(super) fn fit_raw<T: Scalar>(ys: &[T], family: ModelFamily, config: &FitConfig<T>) -> Option<Raw<T>> {
    let n = ys.len();
    let x: Vec<T> = xs(n);
    let options = LmOptions { max_iterations: config.max_iterations, ..LmOptions::default() };
    match family {
        ModelFamily::Linear => polyfit(&x, ys, 1).map(closed),
        ModelFamily::Polynomial(d) => polyfit(&x, ys, d as usize).map(closed),
        ModelFamily::Logarithmic => {
            let a = Matrix::from_fn(n, 2, |r, c| if c == 0 { (x[r] + T::one()).ln() } else { T::one() });
            let s = lstsq_refined(&a, ys)?;
            Some(closed(vec![s[0], T::one(), s[1]]))
        }
        ModelFamily::Exponential => fit_exponential(&x, ys, options),
        ModelFamily::Sigmoid => fit_sigmoid(&x, ys, options),
    }
}

fn closed<T: Scalar>(coefficients: Vec<T>) -> Raw<T> {
    Raw { coefficients, converged: true }
}

/// Least-squares polynomial of degree `d`, highest coefficient first.
pub fn polyfit<T: Scalar>(x: &[T], y: &[T], d: usize) -> Option<Vec<T>> {
    let a = Matrix::from_fn(x.len(), d + 1, |r, c| x[r].powi((d - c) as i32));
    lstsq_refined(&a, y)
}

fn fit_exponential<T: Scalar>(x: &[T], ys: &[T], options: LmOptions<T>) -> Option<Raw<T>> {
    let (lo, hi) = min_max(ys);
    let mut best: Option<(T, lm::LmReport<T>)> = None;
    for rising in [true, false] {
        // log-linear start on the series shifted to be ≥ 1
        let z: Vec<T> = ys
            .iter()
            .map(|&y| if rising { y - lo + T::one() } else { hi - y + T::one() }.ln())
            .collect();
        let Some(line) = polyfit(x, &z, 1) else { continue };
        let (slope, intercept) = (line[0], line[1]);
        let start = if rising {
            [intercept.exp(), slope, lo - T::one()]
        } else {
            [-intercept.exp(), slope, hi + T::one()]
        };
        let report = lm::minimize(&Exponential, x, ys, &start, options);
        if !report.ss_res.is_finite() {
            continue;
        }
        if best.as_ref().map_or(true, |(ss, _)| report.ss_res < *ss) {
            best = Some((report.ss_res, report));
        }
    }
    best.map(|(_, r)| Raw { coefficients: vec![r.params[0], r.params[1].exp(), r.params[2]], converged: r.converged })
}

/// Offsets of the midpoint and factors on the steepness for the restarts;
/// the first entry is the unjittered start.
const SIGMOID_STARTS: [(f64, f64); 6] = [(0.0, 1.0), (-0.5, 1.0), (0.5, 1.0), (0.0, 0.5), (0.0, 2.0), (0.0, 0.25)];

fn fit_sigmoid<T: Scalar>(x: &[T], ys: &[T], options: LmOptions<T>) -> Option<Raw<T>> {
    let (lo, hi) = min_max(ys);
    let range = hi - lo;
    if range <= T::zero() {
        return None;
    }
    let mut steepest = 0;
    let mut steepest_diff = T::neg_infinity();
    for (i, w) in ys.windows(2).enumerate() {
        let d = (w[1] - w[0]).abs();
        if d > steepest_diff {
            steepest_diff = d;
            steepest = i;
        }
    }
    let net = ys[ys.len() - 1] - ys[0];
    let direction = if net < T::zero() { -T::one() } else { T::one() };
    // commits strictly between the plateaus
    let width = ys
        .iter()
        .filter(|&&y| {
            let u = (y - lo) / range;
            u > k(0.12) && u < k(0.88)
        })
        .count()
        .max(1);
    let base_k = direction * k::<T>(4.0) / T::from_usize(width).unwrap();
    let base_x0 = T::from_usize(steepest).unwrap() + k(0.5);

    let mut best: Option<lm::LmReport<T>> = None;
    for (dx, kf) in SIGMOID_STARTS {
        let start = [range, base_k * k(kf), base_x0 + k(dx), lo];
        let report = lm::minimize(&Sigmoid, x, ys, &start, options);
        if !report.ss_res.is_finite() {
            continue;
        }
        if best.as_ref().map_or(true, |b| report.ss_res < b.ss_res) {
            best = Some(report);
        }
    }
    best.map(|r| Raw { coefficients: r.params, converged: r.converged })
}

fn min_max<T: Scalar>(ys: &[T]) -> (T, T) {
    ys.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), &y| (lo.min(y), hi.max(y)))
}

/// Fits `ys` with `family` and scores it; the caller handles length checks.
pub(super) fn fit_scored<T: Scalar>(ys: &[T], family: ModelFamily, config: &FitConfig<T>) -> FitResult<T> {
    let raw = fit_raw(ys, family, config);
    let Some(raw) = raw else {
        return FitResult::failed(family, super::Discard::NoSolution);
    };
    let predicted: Vec<T> = xs::<T>(ys.len()).into_iter().map(|x| predict(family, &raw.coefficients, x)).collect();
    let (ss_res, r2) = match super::residual_sum(ys, &predicted) {
        Ok(s) => (s.ss_res, s.r2),
        Err(_) => {
            let ss: T = ys.iter().zip(&predicted).map(|(&y, &f)| (y - f) * (y - f)).sum();
            (ss, if ss == T::zero() { T::one() } else { T::neg_infinity() })
        }
    };
    let finite = raw.coefficients.iter().all(|c| c.is_finite()) && r2.is_finite() && !r2.is_nan();
    FitResult {
        family,
        coefficients: raw.coefficients,
        ss_res,
        r2,
        converged: raw.converged,
        discarded: if finite { None } else { Some(super::Discard::NoSolution) },
    }
}

