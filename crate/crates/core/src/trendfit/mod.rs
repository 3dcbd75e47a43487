//! Curve fitting and trend classification of per-commit feature series.
//!
//! Every routine is generic over the scalar; `f64` is what the pipeline uses.

mod families;
pub mod linalg;
pub mod lm;
pub mod poly;
mod table;

use std::fmt;
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive};
use serde::{Deserialize, Serialize};

pub use families::{polyfit, predict};
pub use table::{tabulate, TrendRow, TrendTable};

pub trait Scalar: Float + FromPrimitive + Sum + fmt::Debug + fmt::Display + Send + Sync + 'static {}

impl<T> Scalar for T where T: Float + FromPrimitive + Sum + fmt::Debug + fmt::Display + Send + Sync + 'static {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelFamily {
    Linear,
    Exponential,
    Logarithmic,
    Sigmoid,
    /// Degree 2 to 4.
    Polynomial(u8),
}

impl ModelFamily {
    /// The fitted forms, in priority order.
    pub const CANDIDATES: [ModelFamily; 7] = [
        ModelFamily::Linear,
        ModelFamily::Exponential,
        ModelFamily::Logarithmic,
        ModelFamily::Sigmoid,
        ModelFamily::Polynomial(2),
        ModelFamily::Polynomial(3),
        ModelFamily::Polynomial(4),
    ];

    pub fn arity(self) -> usize {
        match self {
            ModelFamily::Linear => 2,
            ModelFamily::Exponential | ModelFamily::Logarithmic => 3,
            ModelFamily::Sigmoid => 4,
            ModelFamily::Polynomial(d) => d as usize + 1,
        }
    }

    /// Lower wins when two fits are within delta of each other.
    pub fn priority(self) -> u8 {
        match self {
            ModelFamily::Linear => 0,
            ModelFamily::Exponential => 1,
            ModelFamily::Logarithmic => 2,
            ModelFamily::Sigmoid => 3,
            ModelFamily::Polynomial(_) => 4,
        }
    }
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelFamily::Linear => f.write_str("linear"),
            ModelFamily::Exponential => f.write_str("exponential"),
            ModelFamily::Logarithmic => f.write_str("logarithmic"),
            ModelFamily::Sigmoid => f.write_str("sigmoid"),
            ModelFamily::Polynomial(d) => write!(f, "polynomial{d}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Discard {
    /// Fewer points than coefficients + 1.
    TooShort,
    /// The solver produced no finite solution.
    NoSolution,
    /// Leading coefficient vanished all the way down to degree 1.
    Simplified,
    TooFewExtrema,
    MidpointOutside,
    DecreasingLogarithm,
    /// a < 0 with 0 < b < 1: a rising curve that flattens, which is the
    /// logarithmic family's shape.
    ConcaveExponential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult<T> {
    pub family: ModelFamily,
    /// Linear (a, b); Exponential (a, b, c); Logarithmic (a, b, c) with b = 1;
    /// Sigmoid (L, k, x0, b); Polynomial highest degree first.
    pub coefficients: Vec<T>,
    pub ss_res: T,
    pub r2: T,
    pub converged: bool,
    pub discarded: Option<Discard>,
}

impl<T: Scalar> FitResult<T> {
    fn failed(family: ModelFamily, reason: Discard) -> Self {
        FitResult {
            family,
            coefficients: Vec::new(),
            ss_res: T::infinity(),
            r2: T::neg_infinity(),
            converged: false,
            discarded: Some(reason),
        }
    }

    pub fn is_live(&self) -> bool {
        self.discarded.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[allow(clippy::upper_case_acronyms)]
pub enum TrendLabel {
    CR,
    CD,
    S,
    SR,
    SD,
    SRP,
    PGR,
    PGD,
    PSR,
    PSD,
    I,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Bucket {
    Inc,
    Dec,
    Unstable,
    Stable,
}

impl TrendLabel {
    pub const ALL: [TrendLabel; 11] = [
        TrendLabel::CR,
        TrendLabel::CD,
        TrendLabel::S,
        TrendLabel::SR,
        TrendLabel::SD,
        TrendLabel::SRP,
        TrendLabel::PGR,
        TrendLabel::PGD,
        TrendLabel::PSR,
        TrendLabel::PSD,
        TrendLabel::I,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TrendLabel::CR => "CR",
            TrendLabel::CD => "CD",
            TrendLabel::S => "S",
            TrendLabel::SR => "SR",
            TrendLabel::SD => "SD",
            TrendLabel::SRP => "SRP",
            TrendLabel::PGR => "PGR",
            TrendLabel::PGD => "PGD",
            TrendLabel::PSR => "PSR",
            TrendLabel::PSD => "PSD",
            TrendLabel::I => "I",
        }
    }

    pub fn bucket(self) -> Bucket {
        use TrendLabel::*;
        match self {
            CR | SR | SRP | PGR | PSR => Bucket::Inc,
            CD | SD | PGD | PSD => Bucket::Dec,
            I => Bucket::Unstable,
            S => Bucket::Stable,
        }
    }
}

impl fmt::Display for TrendLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TrendLabel {
    type Err = TrendError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TrendLabel::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| TrendError::UnknownLabel(s.to_string()))
    }
}

impl Bucket {
    pub fn name(self) -> &'static str {
        match self {
            Bucket::Inc => "Inc",
            Bucket::Dec => "Dec",
            Bucket::Unstable => "Unstable",
            Bucket::Stable => "Stable",
        }
    }
}

impl fmt::Display for Bucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig<T> {
    pub delta: T,
    pub poly_threshold: T,
    /// Largest sigmoid transition width (in commits) still called sudden.
    pub sudden_width: T,
    pub max_iterations: usize,
}

impl<T: Scalar> Default for FitConfig<T> {
    fn default() -> Self {
        FitConfig {
            delta: T::from_f64(0.01).unwrap(),
            poly_threshold: T::from_f64(1e-4).unwrap(),
            sudden_width: T::from_f64(2.0).unwrap(),
            max_iterations: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrendError {
    #[error("series is constant")]
    ConstantSeries,
    #[error("series and prediction lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {need} values, got {got}")]
    TooShort { need: usize, got: usize },
    #[error("series contains a non-finite value")]
    NonFinite,
    #[error("all candidate fits were discarded")]
    AllDiscarded,
    #[error("unknown trend label {0:?}")]
    UnknownLabel(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals<T> {
    pub ss_res: T,
    pub ss_tot: T,
    pub r2: T,
}

pub fn residual_sum<T: Scalar>(series: &[T], prediction: &[T]) -> Result<Residuals<T>, TrendError> {
    if series.len() != prediction.len() {
        return Err(TrendError::LengthMismatch(series.len(), prediction.len()));
    }
    if series.len() < 2 {
        return Err(TrendError::TooShort { need: 2, got: series.len() });
    }
    let n = T::from_usize(series.len()).unwrap();
    let mean = series.iter().copied().sum::<T>() / n;
    let ss_tot: T = series.iter().map(|&y| (y - mean) * (y - mean)).sum();
    let ss_res: T = series.iter().zip(prediction).map(|(&y, &f)| (y - f) * (y - f)).sum();
    if ss_tot == T::zero() {
        return Err(TrendError::ConstantSeries);
    }
    Ok(Residuals { ss_res, ss_tot, r2: T::one() - ss_res / ss_tot })
}

/// Fits one family against commit indices 0..n.
pub fn fit<T: Scalar>(series: &[T], family: ModelFamily, config: &FitConfig<T>) -> FitResult<T> {
    if series.len() < family.arity() + 1 {
        return FitResult::failed(family, Discard::TooShort);
    }
    families::fit_scored(series, family, config)
}

/// Applies the family-specific discard rules and polynomial simplification.
pub fn postprocess<T: Scalar>(fits: Vec<FitResult<T>>, series: &[T], config: &FitConfig<T>) -> Vec<FitResult<T>> {
    let last = T::from_usize(series.len().saturating_sub(1)).unwrap();
    fits.into_iter()
        .map(|mut f| {
            if !f.is_live() {
                return f;
            }
            let c = &f.coefficients;
            match f.family {
                ModelFamily::Linear => {}
                ModelFamily::Exponential => {
                    if c[0] < T::zero() && c[1] < T::one() {
                        f.discarded = Some(Discard::ConcaveExponential);
                    }
                }
                ModelFamily::Logarithmic => {
                    if c[0] <= T::zero() {
                        f.discarded = Some(Discard::DecreasingLogarithm);
                    }
                }
                ModelFamily::Sigmoid => {
                    if !(c[2] >= T::zero() && c[2] <= last) {
                        f.discarded = Some(Discard::MidpointOutside);
                    }
                }
                ModelFamily::Polynomial(_) => {
                    f = simplify_polynomial(f, series, config);
                    if f.is_live() && poly::interior_extrema(&f.coefficients, T::zero(), last).len() < 2 {
                        f.discarded = Some(Discard::TooFewExtrema);
                    }
                }
            }
            f
        })
        .collect()
}

/// Re-fits a polynomial one degree lower while its leading coefficient is
/// below the threshold in magnitude.
pub fn simplify_polynomial<T: Scalar>(mut fit_result: FitResult<T>, series: &[T], config: &FitConfig<T>) -> FitResult<T> {
    while let ModelFamily::Polynomial(d) = fit_result.family {
        if !fit_result.is_live() || fit_result.coefficients[0].abs() >= config.poly_threshold {
            break;
        }
        if d <= 2 {
            fit_result.discarded = Some(Discard::Simplified);
            break;
        }
        fit_result = fit(series, ModelFamily::Polynomial(d - 1), config);
    }
    fit_result
}

/// Highest r2 wins; fits within `delta` of it are ranked by family priority.
pub fn select<T: Scalar>(fits: &[FitResult<T>], delta: T) -> Result<&FitResult<T>, TrendError> {
    let live = || fits.iter().filter(|f| f.is_live() && !f.r2.is_nan());
    let best = live().map(|f| f.r2).fold(T::neg_infinity(), T::max);
    if best == T::neg_infinity() {
        return Err(TrendError::AllDiscarded);
    }
    // absorb the rounding in e.g. 0.96 - 0.95
    let slack = delta + T::epsilon() * T::from_f64(8.0).unwrap();
    live()
        .filter(|f| best - f.r2 <= slack)
        .min_by_key(|f| match f.family {
            ModelFamily::Polynomial(d) => (f.family.priority(), d),
            other => (other.priority(), 0),
        })
        .ok_or(TrendError::AllDiscarded)
}

pub fn classify<T: Scalar>(best: &FitResult<T>, series: &[T], config: &FitConfig<T>) -> TrendLabel {
    let c = &best.coefficients;
    match best.family {
        ModelFamily::Linear => {
            let n = T::from_usize(series.len().max(1)).unwrap();
            let mean_abs = series.iter().map(|y| y.abs()).sum::<T>() / n;
            let eps = T::from_f64(1e-6).unwrap() * mean_abs.max(T::one());
            if c[0] > eps {
                TrendLabel::CR
            } else if c[0] < -eps {
                TrendLabel::CD
            } else {
                TrendLabel::S
            }
        }
        ModelFamily::Exponential => {
            if c[0] * c[1].ln() > T::zero() {
                TrendLabel::SR
            } else {
                TrendLabel::SD
            }
        }
        ModelFamily::Logarithmic => TrendLabel::SRP,
        ModelFamily::Sigmoid => {
            let rising = c[0] * c[1] > T::zero();
            let width = T::from_f64(4.0).unwrap() / c[1].abs();
            match (rising, width <= config.sudden_width) {
                (true, true) => TrendLabel::PSR,
                (true, false) => TrendLabel::PGR,
                (false, true) => TrendLabel::PSD,
                (false, false) => TrendLabel::PGD,
            }
        }
        ModelFamily::Polynomial(_) => TrendLabel::I,
    }
}

/// Why a series was labelled without fitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shortcut {
    SinglePoint,
    TwoPoints,
    Constant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis<T> {
    pub label: TrendLabel,
    /// The chosen fit; `None` when a shortcut applied.
    pub selected: Option<FitResult<T>>,
    /// Every candidate after postprocessing.
    pub candidates: Vec<FitResult<T>>,
    pub shortcut: Option<Shortcut>,
}

/// Fits every family, postprocesses, selects and classifies.
pub fn analyze<T: Scalar>(series: &[T], config: &FitConfig<T>) -> Result<Analysis<T>, TrendError> {
    if series.iter().any(|y| !y.is_finite()) {
        return Err(TrendError::NonFinite);
    }
    let shortcut = |label, why| Ok(Analysis { label, selected: None, candidates: Vec::new(), shortcut: Some(why) });
    match series {
        [] => return Err(TrendError::TooShort { need: 1, got: 0 }),
        [_] => return shortcut(TrendLabel::S, Shortcut::SinglePoint),
        [a, b] => {
            let label = if b > a {
                TrendLabel::CR
            } else if b < a {
                TrendLabel::CD
            } else {
                TrendLabel::S
            };
            return shortcut(label, Shortcut::TwoPoints);
        }
        _ => {}
    }
    if series.iter().all(|y| *y == series[0]) {
        return shortcut(TrendLabel::S, Shortcut::Constant);
    }
    let fits: Vec<FitResult<T>> = ModelFamily::CANDIDATES.iter().map(|&f| fit(series, f, config)).collect();
    let candidates = postprocess(fits, series, config);
    let selected = match select(&candidates, config.delta) {
        Ok(f) => f.clone(),
        Err(_) => candidates[0].clone(),
    };
    let label = classify(&selected, series, config);
    Ok(Analysis { label, selected: Some(selected), candidates, shortcut: None })
}

/// `analyze` for raw per-commit counts.
pub fn analyze_counts(series: &[u64], config: &FitConfig<f64>) -> Result<Analysis<f64>, TrendError> {
    let values: Vec<f64> = series.iter().map(|&v| v as f64).collect();
    analyze(&values, config)
}
