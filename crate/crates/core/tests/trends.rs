mod common;

use common::oracle::normal_equations;
use common::trends::{noisy, rounded, LENGTHS};
use featrend_core::trendfit::{
    analyze, classify, fit, polyfit, postprocess, predict, residual_sum, select, simplify_polynomial, Discard, FitConfig, FitResult,
    ModelFamily, TrendError, TrendLabel,
};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cfg() -> FitConfig<f64> {
    FitConfig::default()
}

#[test]
fn exact_recovery_on_every_trend_and_length() {
    let mut misses = Vec::new();
    for label in TrendLabel::ALL {
        for n in LENGTHS {
            let got = analyze(&rounded(label, n), &cfg()).unwrap().label;
            if got != label {
                misses.push(format!("{label} n={n} -> {got}"));
            }
        }
    }
    assert!(misses.is_empty(), "{misses:?}");
}

#[test]
fn noise_robustness() {
    let mut correct = 0;
    let mut per_label = Vec::new();
    for (li, label) in TrendLabel::ALL.into_iter().enumerate() {
        let mut hits = 0;
        for seed in 0..100u64 {
            let n = LENGTHS[(seed % 3) as usize];
            let series = noisy(label, n, 1000 * li as u64 + seed);
            if analyze(&series, &cfg()).unwrap().label == label {
                hits += 1;
            }
        }
        per_label.push((label, hits));
        correct += hits;
    }
    let rate = correct as f64 / 1100.0;
    eprintln!("noise robustness {correct}/1100 = {rate:.4}: {per_label:?}");
    assert!(rate >= 0.90, "rate {rate}: {per_label:?}");
}

#[test]
fn closed_forms_match_exact_normal_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst = 0.0f64;
    for case in 0..50 {
        let n = rng.gen_range(6..=100);
        let ys: Vec<i64> = (0..n).map(|_| rng.gen_range(0..200)).collect();
        let yf: Vec<f64> = ys.iter().map(|&y| y as f64).collect();
        let xs: Vec<f64> = (0..n).map(|i| i as f64).collect();
        for degree in 1..=4 {
            let got = polyfit(&xs, &yf, degree).unwrap();
            let want = normal_equations(&ys, degree);
            for (g, w) in got.iter().zip(&want) {
                let err = (BigRational::from_float(*g).unwrap() - w).abs();
                let rel = if w.is_zero() { err } else { err / w.abs() };
                let rel = rel.to_f64().unwrap();
                worst = worst.max(rel);
                assert!(rel < 1e-9, "case {case} n={n} degree {degree}: {g} vs {}", w.to_f64().unwrap());
            }
        }
        let lin = fit(&yf, ModelFamily::Linear, &cfg());
        assert_eq!(lin.coefficients, polyfit(&xs, &yf, 1).unwrap());
    }
    eprintln!("worst relative coefficient error {worst:e}");
}

#[test]
fn nonlinear_fits_are_exact_on_their_own_curves() {
    let xs: Vec<f64> = (0..30).map(f64::from).collect();
    let cases: [(ModelFamily, Vec<f64>); 5] = [
        (ModelFamily::Exponential, vec![3.0, 1.1, 5.0]),
        (ModelFamily::Exponential, vec![-2.0, 1.08, 40.0]),
        (ModelFamily::Exponential, vec![30.0, 0.9, 1.0]),
        (ModelFamily::Sigmoid, vec![20.0, 0.7, 12.0, 3.0]),
        (ModelFamily::Sigmoid, vec![-15.0, 1.5, 20.5, 18.0]),
    ];
    for (family, truth) in cases {
        let ys: Vec<f64> = xs.iter().map(|&x| predict(family, &truth, x)).collect();
        let f = fit(&ys, family, &cfg());
        assert!((f.r2 - 1.0).abs() <= 1e-6, "{family} {truth:?}: r2 {} {:?}", f.r2, f.coefficients);
    }
    let ys: Vec<f64> = xs.iter().map(|&x| 4.0 * (x + 1.0).ln() + 2.0).collect();
    let f = fit(&ys, ModelFamily::Logarithmic, &cfg());
    assert!((f.r2 - 1.0).abs() <= 1e-12);
    assert!((f.coefficients[0] - 4.0).abs() < 1e-10 && (f.coefficients[2] - 2.0).abs() < 1e-10);
}

#[test]
fn residual_sum_examples() {
    assert_eq!(residual_sum(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap().r2, 1.0);
    assert_eq!(residual_sum(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]).unwrap().r2, 0.0);
    assert_eq!(residual_sum(&[4.0, 4.0, 4.0], &[1.0, 2.0, 3.0]), Err(TrendError::ConstantSeries));
    assert!(matches!(residual_sum(&[1.0], &[1.0]), Err(TrendError::TooShort { .. })));
    assert!(matches!(residual_sum(&[1.0, 2.0], &[1.0]), Err(TrendError::LengthMismatch(2, 1))));
}

#[test]
fn fit_examples() {
    let line: Vec<f64> = (0..10).map(|x| 2.0 * x as f64 + 3.0).collect();
    let f = fit(&line, ModelFamily::Linear, &cfg());
    assert!((f.coefficients[0] - 2.0).abs() < 1e-12 && (f.coefficients[1] - 3.0).abs() < 1e-12);
    assert_eq!(f.r2, 1.0);

    let sig: Vec<f64> = (0..10).map(|x| (10.0 / (1.0 + (-5.0 * (x as f64 - 4.0)).exp()) + 1.0).round()).collect();
    let f = fit(&sig, ModelFamily::Sigmoid, &cfg());
    assert!(f.r2 >= 0.99, "{f:?}");
    assert!((f.coefficients[2] - 4.0).abs() <= 0.5, "{f:?}");

    let f = fit(&[1.0, 2.0, 4.0, 8.0, 16.0], ModelFamily::Exponential, &cfg());
    assert!((f.coefficients[1] - 2.0).abs() < 1e-6 && f.r2 >= 0.999, "{f:?}");

    let f = fit(&[1.0, 2.0, 3.0], ModelFamily::Sigmoid, &cfg());
    assert_eq!(f.discarded, Some(Discard::TooShort));
    let f = fit(&[1.0, 2.0, 4.0, 3.0], ModelFamily::Exponential, &cfg());
    assert_ne!(f.discarded, Some(Discard::TooShort));
}

fn candidate(family: ModelFamily, r2: f64) -> FitResult<f64> {
    FitResult { family, coefficients: vec![1.0; family.arity()], ss_res: 1.0 - r2, r2, converged: true, discarded: None }
}

#[test]
fn selection_rules() {
    use ModelFamily::*;
    let pick = |c: Vec<FitResult<f64>>| select(&c, 0.01).unwrap().family;
    // within delta: priority decides
    assert_eq!(pick(vec![candidate(Linear, 0.95), candidate(Sigmoid, 0.955)]), Linear);
    assert_eq!(pick(vec![candidate(Linear, 0.95), candidate(Sigmoid, 0.96)]), Linear);
    // outside delta: r2 decides
    assert_eq!(pick(vec![candidate(Linear, 0.80), candidate(Sigmoid, 0.95)]), Sigmoid);
    assert_eq!(pick(vec![candidate(Linear, 0.95), candidate(Sigmoid, 0.9601)]), Sigmoid);
    // exact ties walk the whole chain
    let all = |r2| ModelFamily::CANDIDATES.iter().map(|&f| candidate(f, r2)).collect::<Vec<_>>();
    assert_eq!(pick(all(0.9)), Linear);
    assert_eq!(pick(all(0.9)[1..].to_vec()), Exponential);
    assert_eq!(pick(all(0.9)[2..].to_vec()), Logarithmic);
    assert_eq!(pick(all(0.9)[3..].to_vec()), Sigmoid);
    assert_eq!(pick(all(0.9)[4..].to_vec()), Polynomial(2));
    assert_eq!(pick(vec![candidate(Polynomial(4), 0.9), candidate(Polynomial(3), 0.9)]), Polynomial(3));
    // a better fit two deltas away cannot be reached through a chain of near ties
    assert_eq!(pick(vec![candidate(Linear, 0.97), candidate(Logarithmic, 0.985), candidate(Sigmoid, 0.99)]), Logarithmic);
    // discarded fits never compete
    let mut best = candidate(Exponential, 0.999);
    best.discarded = Some(Discard::ConcaveExponential);
    assert_eq!(pick(vec![candidate(Linear, 0.9), best.clone()]), Linear);
    assert_eq!(pick(vec![candidate(Linear, 0.5)]), Linear);
    assert_eq!(select(&[best], 0.01), Err(TrendError::AllDiscarded));
}

#[test]
fn polynomial_simplification_threshold_is_exact() {
    let xs: Vec<f64> = (0..20).map(f64::from).collect();
    for (a3, keeps_cubic) in [(1.0001e-4, true), (0.9999e-4, false), (5e-5, false)] {
        let ys: Vec<f64> = xs.iter().map(|&x| a3 * x.powi(3) - 0.02 * x * x + 0.5 * x + 3.0).collect();
        let f = fit(&ys, ModelFamily::Polynomial(3), &cfg());
        assert!((f.coefficients[0] - a3).abs() < 1e-12);
        let out = postprocess(vec![f], &ys, &cfg());
        let degree = match out[0].family {
            ModelFamily::Polynomial(d) => d,
            _ => unreachable!(),
        };
        assert_eq!(degree == 3, keeps_cubic, "a3 = {a3}: {:?}", out[0]);
    }
    // at exactly the threshold the cubic survives
    let at = FitResult {
        family: ModelFamily::Polynomial(3),
        coefficients: vec![1e-4, 0.0, 0.0, 0.0],
        ss_res: 0.0,
        r2: 1.0,
        converged: true,
        discarded: None,
    };
    assert_eq!(simplify_polynomial(at.clone(), &xs, &cfg()), at);
    // a quadratic whose leading coefficient vanishes is dropped in favour of Linear
    let ys: Vec<f64> = xs.iter().map(|&x| 5e-5 * x * x + x).collect();
    let out = postprocess(vec![fit(&ys, ModelFamily::Polynomial(2), &cfg())], &ys, &cfg());
    assert_eq!(out[0].discarded, Some(Discard::Simplified));
}

#[test]
fn sigmoid_midpoint_discard_is_exact() {
    let ys: Vec<f64> = (0..10).map(f64::from).collect();
    let sig = |x0: f64| FitResult {
        family: ModelFamily::Sigmoid,
        coefficients: vec![10.0, 1.0, x0, 0.0],
        ss_res: 0.0,
        r2: 1.0,
        converged: true,
        discarded: None,
    };
    for (x0, kept) in [(-3.0, false), (-1e-9, false), (0.0, true), (4.5, true), (9.0, true), (9.0 + 1e-9, false)] {
        let out = postprocess(vec![sig(x0)], &ys, &cfg());
        assert_eq!(out[0].is_live(), kept, "x0 = {x0}");
        if !kept {
            assert_eq!(out[0].discarded, Some(Discard::MidpointOutside));
        }
    }
}

#[test]
fn polynomial_extrema_rule() {
    let ys: Vec<f64> = (0..10).map(|x| ((x as f64) - 20.0).powi(2)).collect();
    let out = postprocess(vec![fit(&ys, ModelFamily::Polynomial(2), &cfg())], &ys, &cfg());
    assert_eq!(out[0].discarded, Some(Discard::TooFewExtrema));
}

#[test]
fn classify_examples() {
    let series = [0.0, 1.2, 2.4];
    let lin = FitResult { family: ModelFamily::Linear, coefficients: vec![1.2, 0.0], ss_res: 0.0, r2: 1.0, converged: true, discarded: None };
    assert_eq!(classify(&lin, &series, &cfg()), TrendLabel::CR);
    assert_eq!(analyze(&[3.0, 3.0, 3.0, 3.0], &cfg()).unwrap().label, TrendLabel::S);

    let sig = FitResult { family: ModelFamily::Sigmoid, coefficients: vec![20.0, 4.0, 5.0, 0.0], ss_res: 0.0, r2: 1.0, converged: true, discarded: None };
    assert_eq!(classify(&sig, &[0.0; 12], &cfg()), TrendLabel::PSR);
    let mut gradual = sig.clone();
    gradual.coefficients[1] = 1.0;
    assert_eq!(classify(&gradual, &[0.0; 12], &cfg()), TrendLabel::PGR);
    gradual.coefficients[0] = -20.0;
    assert_eq!(classify(&gradual, &[0.0; 12], &cfg()), TrendLabel::PGD);
    // exactly two commits wide still counts as sudden
    let mut edge = sig.clone();
    edge.coefficients = vec![-20.0, 2.0, 5.0, 30.0];
    assert_eq!(classify(&edge, &[0.0; 12], &cfg()), TrendLabel::PSD);

    let exp = |a: f64, b: f64| FitResult { family: ModelFamily::Exponential, coefficients: vec![a, b, 0.0], ss_res: 0.0, r2: 1.0, converged: true, discarded: None };
    assert_eq!(classify(&exp(1.0, 2.0), &series, &cfg()), TrendLabel::SR);
    assert_eq!(classify(&exp(-1.0, 2.0), &series, &cfg()), TrendLabel::SD);
    assert_eq!(classify(&exp(1.0, 0.5), &series, &cfg()), TrendLabel::SD);
}

#[test]
fn short_series_are_labelled_directly() {
    assert_eq!(analyze(&[5.0], &cfg()).unwrap().label, TrendLabel::S);
    assert_eq!(analyze(&[5.0, 6.0], &cfg()).unwrap().label, TrendLabel::CR);
    assert_eq!(analyze(&[5.0, 4.0], &cfg()).unwrap().label, TrendLabel::CD);
    assert_eq!(analyze(&[5.0, 5.0], &cfg()).unwrap().label, TrendLabel::S);
    assert!(analyze::<f64>(&[], &cfg()).is_err());
    let three = analyze(&[1.0, 2.0, 4.0], &cfg()).unwrap();
    assert!(three.selected.is_some());
}

#[test]
fn selected_fit_beats_linear_outside_delta() {
    for label in TrendLabel::ALL {
        for seed in 0..6 {
            let a = analyze(&noisy(label, LENGTHS[seed % 3], seed as u64), &cfg()).unwrap();
            let (Some(sel), Some(lin)) = (&a.selected, a.candidates.first()) else { continue };
            if sel.family != ModelFamily::Linear {
                assert!(sel.r2 >= lin.r2, "{label}: {sel:?} vs {lin:?}");
            }
        }
    }
}

#[test]
fn analysis_is_deterministic_and_f32_agrees() {
    for label in TrendLabel::ALL {
        let y = rounded(label, 30);
        let a = analyze(&y, &cfg()).unwrap();
        assert_eq!(a, analyze(&y, &cfg()).unwrap());
        let y32: Vec<f32> = y.iter().map(|&v| v as f32).collect();
        let b = analyze(&y32, &FitConfig::<f32>::default()).unwrap();
        assert_eq!(a.label, b.label, "{label}");
    }
}
