//! Double-exponential (tanh-sinh) quadrature.
//!
//! The engine integrates over a finite open interval by the substitution
//! `t = tanh(π/2 · sinh τ)` followed by the trapezoid rule in `τ`. Each level
//! halves the step and only evaluates the new (odd) nodes, so refinement
//! reuses every previous sample. Node tables are generated lazily, once per
//! level, and shared by every caller.
//!
//! Abscissas are kept as *distances from the nearest endpoint*. Integrands
//! that need `1 - t` or `-ln t` near `t = 1` should use [`tanh_sinh_nodes`],
//! which hands them a [`Node`] carrying both distances, so nothing is lost
//! to cancellation even when the node sits `1e-300` away from an endpoint.

use std::cell::Cell;
use std::f64::consts::FRAC_PI_2;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Highest refinement level for which node tables can be generated.
pub const MAX_LEVEL_CAP: u32 = 16;

/// Tolerances, level caps and domain caps shared by every numeric routine.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Refinement cap for the tanh-sinh engine.
    pub max_level: u32,
    /// Hard budget on integrand evaluations per quadrature.
    pub max_evals: u64,
    /// Upper bound accepted for the Bigamma arguments `x` and `y`.
    pub domain_cap: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_level: 12,
            max_evals: 2_000_000,
            domain_cap: 50.0,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::Config(format!("abs_tol must be > 0, got {}", self.abs_tol)));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::Config(format!("rel_tol must be > 0, got {}", self.rel_tol)));
        }
        if self.max_level < 3 || self.max_level > MAX_LEVEL_CAP {
            return Err(Error::Config(format!(
                "max_level must lie in [3, {MAX_LEVEL_CAP}], got {}",
                self.max_level
            )));
        }
        if self.max_evals < 100 {
            return Err(Error::Config(format!("max_evals must be >= 100, got {}", self.max_evals)));
        }
        if !(self.domain_cap > 0.0) {
            return Err(Error::Config(format!("domain_cap must be > 0, got {}", self.domain_cap)));
        }
        Ok(())
    }

    /// Same config with both tolerances multiplied by `factor`.
    pub fn scaled_tolerances(&self, factor: f64) -> Self {
        Self {
            abs_tol: self.abs_tol * factor,
            rel_tol: self.rel_tol * factor,
            ..*self
        }
    }

    /// Tolerance the convergence test applies to a value of magnitude `|value|`.
    pub fn tolerance_for(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// Outcome of one quadrature run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub err_estimate: f64,
    pub evals: u64,
    pub converged: bool,
    /// Set when the caller relaxed tolerances for a near-degenerate argument.
    pub reduced_confidence: bool,
}

impl QuadResult {
    pub(crate) fn exact(value: f64) -> Self {
        Self {
            value,
            err_estimate: 0.0,
            evals: 0,
            converged: true,
            reduced_confidence: false,
        }
    }

    /// Combine two independent results of a sum `self + other`.
    pub fn plus(self, other: QuadResult) -> QuadResult {
        QuadResult {
            value: self.value + other.value,
            err_estimate: self.err_estimate + other.err_estimate,
            evals: self.evals + other.evals,
            converged: self.converged && other.converged,
            reduced_confidence: self.reduced_confidence || other.reduced_confidence,
        }
    }

    /// `self - other`, errors added.
    pub fn minus(self, other: QuadResult) -> QuadResult {
        self.plus(QuadResult {
            value: -other.value,
            ..other
        })
    }

    pub fn scaled(self, factor: f64) -> QuadResult {
        QuadResult {
            value: self.value * factor,
            err_estimate: self.err_estimate * factor.abs(),
            ..self
        }
    }
}

/// Evaluate a combination of quadratures (`eval` adds or subtracts parts run
/// at the config it is given). If cancellation between the parts leaves the
/// combined error above `cfg`'s tolerance, the parts are rerun once with the
/// absolute tolerance the combined value needs. The returned `converged`
/// always refers to the combined value.
pub(crate) fn combine_to_tolerance<F>(cfg: &EvalConfig, eval: F) -> Result<QuadResult>
where
    F: Fn(&EvalConfig) -> Result<QuadResult>,
{
    let mut r = eval(cfg)?;
    let target = cfg.tolerance_for(r.value);
    if r.converged && r.err_estimate > target {
        let tight = EvalConfig {
            abs_tol: 0.25 * target,
            rel_tol: f64::MIN_POSITIVE,
            ..*cfg
        };
        r = eval(&tight)?;
    }
    r.converged &= r.err_estimate <= cfg.tolerance_for(r.value);
    Ok(r)
}

/// A quadrature abscissa in `(a, b)` together with its exact distances to both ends.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Node {
    pub x: f64,
    pub from_lower: f64,
    pub to_upper: f64,
}

/// One node of the normalized rule on `(-1, 1)`, mirrored about the origin.
#[derive(Clone, Copy, Debug)]
struct Abscissa {
    /// `1 - |t|`, the distance to the nearest endpoint of `(-1, 1)`.
    complement: f64,
    /// Weight without the step factor.
    weight: f64,
}

fn abscissa(tau: f64) -> Abscissa {
    let u = FRAC_PI_2 * tau.sinh();
    let e = (-2.0 * u).exp();
    let denom = 1.0 + e;
    Abscissa {
        complement: 2.0 * e / denom,
        weight: FRAC_PI_2 * tau.cosh() * 4.0 * e / (denom * denom),
    }
}

/// New nodes introduced at `level` (for level 0 this includes `τ = 0`), in increasing `τ`.
fn level_nodes(level: u32) -> &'static [Abscissa] {
    static TABLES: [OnceLock<Vec<Abscissa>>; MAX_LEVEL_CAP as usize + 1] =
        [const { OnceLock::new() }; MAX_LEVEL_CAP as usize + 1];
    TABLES[level as usize].get_or_init(|| {
        let h = (0.5f64).powi(level as i32);
        let (first, stride) = if level == 0 { (0u64, 1u64) } else { (1, 2) };
        let mut out = Vec::new();
        let mut k = first;
        loop {
            let a = abscissa(k as f64 * h);
            // Nodes closer than the smallest normal double cannot be represented
            // as distances without losing all precision.
            if a.complement < f64::MIN_POSITIVE || a.weight < f64::MIN_POSITIVE {
                break;
            }
            out.push(a);
            k += stride;
        }
        out
    })
}

/// Why an integrand aborted the sweep.
pub(crate) enum Stop {
    Fail(Error),
    Budget,
}

impl From<Error> for Stop {
    fn from(e: Error) -> Self {
        Stop::Fail(e)
    }
}

/// The two outermost samples on one side, used to extrapolate the integral
/// over the sliver between the last node and the endpoint.
#[derive(Default)]
struct SideTail {
    outer: Option<(f64, f64, f64)>,
    inner: Option<(f64, f64, f64)>,
}

impl SideTail {
    fn record(&mut self, tau: f64, dist: f64, value: f64) {
        let s = (tau, dist, value.abs());
        match self.outer {
            Some(o) if tau < o.0 => {
                if self.inner.is_none_or(|i| tau > i.0) {
                    self.inner = Some(s);
                }
            }
            _ => {
                self.inner = self.outer;
                self.outer = Some(s);
            }
        }
    }

    /// Mass beyond the outermost node assuming `|f| ~ d^(β-1)` there.
    fn mass(&self) -> f64 {
        let Some((_, d1, v1)) = self.outer else { return 0.0 };
        let mass = d1 * v1;
        if mass == 0.0 {
            return 0.0;
        }
        let Some((_, d2, v2)) = self.inner else { return mass };
        if v2 == 0.0 || d1 == d2 {
            return mass;
        }
        let beta = 1.0 + (v1 / v2).ln() / (d1 / d2).ln();
        if beta <= 0.0 {
            f64::INFINITY
        } else {
            mass / beta.min(1.0)
        }
    }
}

/// Engine core. `budgeted` disables the per-level evaluation prediction and
/// leaves budgeting to the integrand (used by the iterated 2-D rule).
/// The integrand also receives the node's weight; the returned level is the
/// one whose step produced the final estimate.
pub(crate) fn run<F>(mut f: F, a: f64, b: f64, cfg: &EvalConfig, budgeted: bool) -> Result<(QuadResult, u32)>
where
    F: FnMut(Node, f64) -> std::result::Result<f64, Stop>,
{
    cfg.validate()?;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::Domain(format!("need finite a < b, got ({a}, {b})")));
    }
    let half = 0.5 * (b - a);
    let mid = a + half;

    let mut sample = |node: Node, weight: f64| -> std::result::Result<f64, Stop> {
        let v = f(node, weight)?;
        if !v.is_finite() {
            return Err(Stop::Fail(Error::Blowup { abscissa: node.x, value: v }));
        }
        Ok(v * weight)
    };

    let mut sum = 0.0;
    let mut abs_sum = 0.0;
    let mut evals = 0u64;
    let mut left_tail = SideTail::default();
    let mut right_tail = SideTail::default();
    let mut prev: Option<f64> = None;
    let mut best: Option<(QuadResult, u32)> = None;

    for level in 0..=cfg.max_level {
        let nodes = level_nodes(level);
        let h = (0.5f64).powi(level as i32);
        let planned = if level == 0 { 2 * nodes.len() as u64 - 1 } else { 2 * nodes.len() as u64 };
        if budgeted && evals + planned > cfg.max_evals {
            break;
        }

        let mut level_sum = 0.0;
        let mut level_abs = 0.0;
        let mut outcome: std::result::Result<(), Stop> = Ok(());
        for (i, node) in nodes.iter().enumerate() {
            let tau = if level == 0 { i as f64 } else { (2 * i + 1) as f64 * h };
            let dist = half * node.complement;
            let w = half * node.weight;
            if level == 0 && i == 0 {
                let centre = Node { x: mid, from_lower: half, to_upper: half };
                match sample(centre, w) {
                    Ok(v) => {
                        level_sum += v;
                        level_abs += v.abs();
                        evals += 1;
                    }
                    Err(s) => {
                        outcome = Err(s);
                        break;
                    }
                }
                continue;
            }
            let left = Node { x: a + dist, from_lower: dist, to_upper: 2.0 * half - dist };
            let right = Node { x: b - dist, from_lower: 2.0 * half - dist, to_upper: dist };
            let pair = sample(left, w).and_then(|l| sample(right, w).map(|r| (l, r)));
            match pair {
                Ok((l, r)) => {
                    level_sum += l + r;
                    level_abs += l.abs() + r.abs();
                    evals += 2;
                    left_tail.record(tau, dist, l / w);
                    right_tail.record(tau, dist, r / w);
                }
                Err(s) => {
                    outcome = Err(s);
                    break;
                }
            }
        }
        match outcome {
            Ok(()) => {}
            Err(Stop::Budget) => break,
            Err(Stop::Fail(e)) => return Err(e),
        }

        sum += level_sum;
        abs_sum += level_abs;
        let estimate = h * sum;
        let roundoff = 4.0 * f64::EPSILON * h * abs_sum;
        let tail = left_tail.mass() + right_tail.mass();
        let diff = match prev {
            Some(p) => (estimate - p).abs(),
            None => f64::INFINITY,
        };
        let err = diff.max(roundoff) + tail;
        let converged = level >= 2 && err <= cfg.tolerance_for(estimate);
        let result = QuadResult {
            value: estimate,
            err_estimate: err,
            evals,
            converged,
            reduced_confidence: false,
        };
        best = Some((result, level));
        if converged {
            break;
        }
        prev = Some(estimate);
    }

    best.map(|(mut r, level)| {
        // Level 0 never carries a difference-based estimate.
        if !r.err_estimate.is_finite() {
            r.err_estimate = f64::MAX;
        }
        r.evals = evals.max(r.evals);
        (r, level)
    })
    .ok_or_else(|| Error::Config("evaluation budget too small for a single level".into()))
}

/// Integrate `f` over the open interval `(a, b)`. Endpoints are never sampled.
pub fn tanh_sinh<F>(f: F, a: f64, b: f64, cfg: &EvalConfig) -> Result<QuadResult>
where
    F: Fn(f64) -> f64,
{
    run(|n: Node, _| Ok(f(n.x)), a, b, cfg, true).map(|r| r.0)
}

/// Like [`tanh_sinh`], but the integrand receives the node with its exact
/// distances to both endpoints.
pub fn tanh_sinh_nodes<F>(f: F, a: f64, b: f64, cfg: &EvalConfig) -> Result<QuadResult>
where
    F: Fn(Node) -> f64,
{
    run(|n: Node, _| Ok(f(n)), a, b, cfg, true).map(|r| r.0)
}

/// `-ln u` for a node of `(0, 1)`, accurate at both ends.
pub fn neg_ln_unit(n: Node) -> f64 {
    if n.from_lower <= 0.5 {
        -n.from_lower.ln()
    } else {
        -(-n.to_upper).ln_1p()
    }
}

/// Integrate `f` over `(a, ∞)` through the substitution `t = a - ln u`, `u ∈ (0, 1)`.
pub fn integrate_semi_infinite<F>(f: F, a: f64, cfg: &EvalConfig) -> Result<QuadResult>
where
    F: Fn(f64) -> f64,
{
    if !a.is_finite() {
        return Err(Error::Domain(format!("lower limit must be finite, got {a}")));
    }
    run(
        |n: Node, _| {
            let t = a + neg_ln_unit(n);
            let u = if n.from_lower <= 0.5 { n.from_lower } else { 1.0 - n.to_upper };
            Ok(f(t) / u)
        },
        0.0,
        1.0,
        cfg,
        true,
    )
    .map(|r| r.0)
}

/// Order of the iterated 2-D rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IterationOrder {
    /// Inner integral over `y`, outer over `x`.
    XThenY,
    /// Inner integral over `x`, outer over `y`.
    YThenX,
}

/// Iterated integral of `f(x, y)` over the open unit square, inner over `y`.
pub fn integrate_2d<F>(f: F, cfg: &EvalConfig) -> Result<QuadResult>
where
    F: Fn(f64, f64) -> f64,
{
    integrate_2d_ordered(f, cfg, IterationOrder::XThenY)
}

/// Iterated integral over the unit square in the requested order.
pub fn integrate_2d_ordered<F>(f: F, cfg: &EvalConfig, order: IterationOrder) -> Result<QuadResult>
where
    F: Fn(f64, f64) -> f64,
{
    integrate_2d_nodes(|x: Node, y: Node| f(x.x, y.x), cfg, order)
}

/// Iterated 2-D rule whose integrand receives both coordinates as [`Node`]s.
/// The error estimate is the outer estimate plus the outer rule applied to
/// the inner estimates, and `evals` counts every call of `f`.
pub fn integrate_2d_nodes<F>(f: F, cfg: &EvalConfig, order: IterationOrder) -> Result<QuadResult>
where
    F: Fn(Node, Node) -> f64,
{
    cfg.validate()?;
    let total = Cell::new(0u64);
    let weighted_inner = Cell::new(0.0f64);
    let inner_ok = Cell::new(true);
    let inner_reduced = Cell::new(false);

    let outer = |n: Node, weight: f64| -> std::result::Result<f64, Stop> {
        let used = total.get();
        if used >= cfg.max_evals {
            return Err(Stop::Budget);
        }
        let inner_cfg = EvalConfig {
            max_evals: (cfg.max_evals - used).max(100),
            ..*cfg
        };
        let res = run(
            |m: Node, _| {
                let (x, y) = match order {
                    IterationOrder::XThenY => (n, m),
                    IterationOrder::YThenX => (m, n),
                };
                let v = f(x, y);
                if !v.is_finite() {
                    return Err(Stop::Fail(Error::Blowup2d { x: x.x, y: y.x, value: v }));
                }
                Ok(v)
            },
            0.0,
            1.0,
            &inner_cfg,
            true,
        )
        .map_err(Stop::Fail)?
        .0;
        total.set(used + res.evals);
        weighted_inner.set(weighted_inner.get() + weight * res.err_estimate);
        if !res.converged {
            inner_ok.set(false);
        }
        inner_reduced.set(inner_reduced.get() || res.reduced_confidence);
        Ok(res.value)
    };

    let (mut res, level) = run(outer, 0.0, 1.0, &EvalConfig { max_evals: u64::MAX, ..*cfg }, false)?;
    res.evals = total.get();
    res.err_estimate += (0.5f64).powi(level as i32) * weighted_inner.get();
    res.converged = res.converged && inner_ok.get() && res.err_estimate <= cfg.tolerance_for(res.value);
    res.reduced_confidence = inner_reduced.get();
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> EvalConfig {
        EvalConfig::default()
    }

    #[test]
    fn constant_integrand() {
        let r = tanh_sinh(|_| 1.0, 0.0, 1.0, &cfg()).unwrap();
        assert!(r.converged);
        assert!((r.value - 1.0).abs() < 1e-12, "{r:?}");
    }

    #[test]
    fn log_power_gives_gamma_two() {
        let r = tanh_sinh(|t: f64| -t.ln(), 0.0, 1.0, &cfg()).unwrap();
        assert!(r.converged);
        assert!((r.value - 1.0).abs() < 1e-12, "{r:?}");
    }

    #[test]
    fn inverse_sqrt_endpoint_singularity() {
        let r = tanh_sinh(|t: f64| 1.0 / t.sqrt(), 0.0, 1.0, &cfg()).unwrap();
        assert!(r.converged);
        assert!((r.value - 2.0).abs() < 1e-10, "{r:?}");
    }

    #[test]
    fn semi_infinite_examples() {
        let c = cfg();
        let r = integrate_semi_infinite(|t: f64| (-t).exp(), 0.0, &c).unwrap();
        assert!((r.value - 1.0).abs() < 1e-11, "{r:?}");
        let r = integrate_semi_infinite(|t: f64| t * (-t).exp(), 0.0, &c).unwrap();
        assert!((r.value - 1.0).abs() < 1e-11, "{r:?}");
        let r = integrate_semi_infinite(|t: f64| t.powi(4) * (-t).exp(), 0.0, &c).unwrap();
        assert!((r.value - 24.0).abs() < 24.0 * 1e-10, "{r:?}");
        assert!(r.converged);
    }

    #[test]
    fn semi_infinite_shifted_origin() {
        // ∫_2^∞ e^{-t} dt = e^{-2}
        let r = integrate_semi_infinite(|t: f64| (-t).exp(), 2.0, &cfg()).unwrap();
        assert!((r.value - (-2.0f64).exp()).abs() < 1e-12, "{r:?}");
    }

    #[test]
    fn square_examples() {
        let c = cfg();
        let r = integrate_2d(|_, _| 1.0, &c).unwrap();
        assert!((r.value - 1.0).abs() < 1e-11 && r.converged, "{r:?}");
        let r = integrate_2d(|x, y| x * y, &c).unwrap();
        assert!((r.value - 0.25).abs() < 1e-11 && r.converged, "{r:?}");
    }

    #[test]
    fn square_orders_agree_on_asymmetric_integrand() {
        let c = cfg();
        let f = |x: Node, y: Node| x.x.powf(-0.5) * y.to_upper.powf(-0.25) * (x.x + 2.0 * y.x).exp();
        let a = integrate_2d_nodes(f, &c, IterationOrder::XThenY).unwrap();
        let b = integrate_2d_nodes(f, &c, IterationOrder::YThenX).unwrap();
        assert!(a.converged && b.converged, "{a:?} {b:?}");
        assert!((a.value - b.value).abs() <= 2.0 * (a.err_estimate + b.err_estimate), "{a:?} {b:?}");
    }

    #[test]
    fn blowup_reports_abscissa() {
        let err = tanh_sinh(|t: f64| if (t - 0.5).abs() < 1e-15 { f64::NAN } else { 1.0 }, 0.0, 1.0, &cfg())
            .unwrap_err();
        match err {
            Error::Blowup { abscissa, .. } => assert!((abscissa - 0.5).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn blowup_in_square_reports_pair() {
        let err = integrate_2d(|x, y| if x == 0.5 && y == 0.5 { f64::INFINITY } else { 1.0 }, &cfg())
            .unwrap_err();
        assert!(matches!(err, Error::Blowup2d { x, y, .. } if x == 0.5 && y == 0.5), "{err:?}");
    }

    #[test]
    fn budget_exhaustion_is_not_an_error() {
        let c = EvalConfig { max_evals: 100, ..cfg() };
        // Oscillatory enough that three levels do not settle within 1e-12.
        let r = tanh_sinh(|t: f64| (40.0 * t).sin() / t.sqrt(), 0.0, 1.0, &c).unwrap();
        assert!(!r.converged);
        assert!(r.evals <= 100);
    }

    #[test]
    fn invalid_interval_and_config() {
        assert!(matches!(tanh_sinh(|_| 1.0, 1.0, 0.0, &cfg()), Err(Error::Domain(_))));
        let bad = EvalConfig { max_level: 2, ..cfg() };
        assert!(matches!(tanh_sinh(|_| 1.0, 0.0, 1.0, &bad), Err(Error::Config(_))));
        let bad = EvalConfig { abs_tol: 0.0, ..cfg() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn node_distances_are_exact_near_the_upper_end() {
        // ∫_0^1 (1 - t)^{-0.9} dt = 10; needs the upper distance, not 1 - x.
        let r = tanh_sinh_nodes(|n| n.to_upper.powf(-0.9), 0.0, 1.0, &cfg()).unwrap();
        assert!((r.value - 10.0).abs() < 1e-8, "{r:?}");
    }

    #[test]
    fn lost_endpoint_mass_blocks_convergence() {
        // t^{-0.995}: almost a fifth of the mass sits below the smallest normal double.
        let r = tanh_sinh_nodes(|n| n.from_lower.powf(-0.995), 0.0, 1.0, &cfg()).unwrap();
        assert!(!r.converged, "{r:?}");
        assert!(r.err_estimate > 1.0, "{r:?}");
    }

    #[test]
    fn tables_are_shared_across_threads() {
        let handles: Vec<_> = (0..8)
            .map(|_| std::thread::spawn(|| tanh_sinh(|t: f64| t * t, 0.0, 1.0, &EvalConfig::default()).unwrap()))
            .collect();
        for h in handles {
            let r = h.join().unwrap();
            assert!((r.value - 1.0 / 3.0).abs() < 1e-12);
        }
    }
}
