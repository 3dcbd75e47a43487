//! Kotlin feature detection, adoption metrics and evolution-trend fitting.

pub mod detect;
pub mod history;
pub mod metrics;
pub mod syntax;
pub mod trendfit;

/// The pipeline's scalar.
pub type Fit = trendfit::FitResult<f64>;
pub type Fit32 = trendfit::FitResult<f32>;
pub type FitConfig = trendfit::FitConfig<f64>;
pub type Analysis = trendfit::Analysis<f64>;
