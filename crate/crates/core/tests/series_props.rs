use bigamma::bigamma::bigamma;
use bigamma::gamma_ref::beta;
use bigamma::loglog::{build_table, CoeffTable, TableKind};
use bigamma::quad::IterationOrder;
use bigamma::series::{bigamma_double_integral, SeriesOptions};
use bigamma::{beta_series, bigamma_series, Error, EvalConfig};
use std::sync::OnceLock;

fn cfg() -> EvalConfig {
    EvalConfig::default()
}

fn gl() -> &'static CoeffTable {
    static T: OnceLock<CoeffTable> = OnceLock::new();
    T.get_or_init(|| build_table(TableKind::GammaLn, 13, 13, &cfg()).unwrap())
}

fn bi() -> &'static CoeffTable {
    static T: OnceLock<CoeffTable> = OnceLock::new();
    T.get_or_init(|| build_table(TableKind::BigammaInt, 13, 13, &cfg()).unwrap())
}

#[test]
fn last_shell_shrinks_with_order() {
    let opts = SeriesOptions::default();
    for (x, y) in [(1.2, 1.2), (0.8, 0.9)] {
        let shells: Vec<f64> = (6..=12)
            .map(|k| bigamma_series(x, y, k, gl(), &opts).unwrap().last_shell_magnitude)
            .collect();
        assert!(shells.last().unwrap() < shells.first().unwrap(), "({x},{y}) {shells:?}");
    }
}

#[test]
fn higher_order_is_closer() {
    let opts = SeriesOptions::default();
    for (x, y) in [(1.2, 1.2), (0.8, 0.9), (1.3, 0.75), (1.1, 1.25)] {
        let g = bigamma(x, y, &cfg()).unwrap().value;
        let e4 = (bigamma_series(x, y, 4, gl(), &opts).unwrap().value - g).abs();
        let e12 = (bigamma_series(x, y, 12, gl(), &opts).unwrap().value - g).abs();
        assert!(e12 < e4, "({x},{y}): {e12} vs {e4}");

        let b = beta(x, y).unwrap();
        let e4 = (beta_series(x, y, 4, bi(), &opts).unwrap().value - b).abs();
        let e12 = (beta_series(x, y, 12, bi(), &opts).unwrap().value - b).abs();
        assert!(e12 < e4, "beta ({x},{y}): {e12} vs {e4}");
    }
}

#[test]
fn order_zero_is_constant_term() {
    let s = bigamma_series(1.1, 0.9, 0, gl(), &SeriesOptions::default()).unwrap();
    assert_eq!(s.value, 1.0);
    let s = bigamma_series(1.0, 1.0, 12, gl(), &SeriesOptions::default()).unwrap();
    assert_eq!(s.value, 1.0);
}

#[test]
fn radius_can_be_waived() {
    let opts = SeriesOptions { trust_radius: 0.5, enforce_radius: false };
    assert!(bigamma_series(1.7, 1.0, 12, gl(), &opts).is_ok());
    assert!(bigamma_series(1.7, 1.0, 12, gl(), &SeriesOptions::default()).is_err());
}

// The integrand is not integrable on the square: neither order may claim
// convergence, and where both produce a value they must agree.
#[test]
fn double_integral_orders_agree() {
    let a = bigamma_double_integral(&cfg(), IterationOrder::XThenY);
    let b = bigamma_double_integral(&cfg(), IterationOrder::YThenX);
    for r in [&a, &b] {
        match r {
            Ok(q) => assert!(!q.converged, "{q:?}"),
            Err(e) => assert!(matches!(e, Error::Blowup2d { .. }), "{e}"),
        }
    }
    if let (Ok(a), Ok(b)) = (a, b) {
        assert!((a.value - b.value).abs() <= 2.0 * (a.err_estimate + b.err_estimate), "{a:?} {b:?}");
    }
}

