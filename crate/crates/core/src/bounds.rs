//! Certifier for the identities and inequalities satisfied by `Γ(x, y)`.
//!
//! Every check returns a [`CheckResult`]. Strict inequalities are tested as
//! non-strict ones with a tolerance, and the tolerance always covers the
//! quadrature error bars of both sides, so a FAIL is never within noise.
//! [`run_suite`] sweeps a [`GridSpec`] over a list of named checks.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::RwLock;

use rayon::prelude::*;

use crate::bigamma::{bigamma, bigamma_scaled, bigamma_unit_interval, incomplete, incomplete_direct, neg_ln_complement, ratio};
use crate::error::{Error, Result};
use crate::gamma_ref::{beta, gamma, log_gamma, shared_derivs};
use crate::loglog::{gamma_ln, COEFF_CAP};
use crate::quad::{neg_ln_unit, tanh_sinh_nodes, EvalConfig, Node, QuadResult};

/// Relative tolerance for equality checks.
pub const EQ_REL_TOL: f64 = 1e-8;
/// Absolute floor on the tolerance of inequality margins.
pub const INEQ_ABS_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "LE",
            Relation::Ge => "GE",
            Relation::Eq => "EQ",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Verdict {
    Pass,
    Inconclusive,
    Fail,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

/// One verdict. `margin` is signed so that a satisfied relation is positive
/// (for `EQ` it is `-|lhs - rhs|`).
#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub point: Vec<(String, f64)>,
    pub lhs: f64,
    pub rhs: f64,
    pub relation: Relation,
    pub margin: f64,
    pub tol: f64,
    pub verdict: Verdict,
}

impl CheckResult {
    /// Build a result. Any unconverged input makes it INCONCLUSIVE; otherwise
    /// it passes iff `margin ≥ -tol`.
    pub fn new(
        name: &str,
        point: Vec<(String, f64)>,
        lhs: f64,
        rhs: f64,
        relation: Relation,
        tol: f64,
        converged: bool,
    ) -> Self {
        let margin = match relation {
            Relation::Le => rhs - lhs,
            Relation::Ge => lhs - rhs,
            Relation::Eq => -(lhs - rhs).abs(),
        };
        let verdict = if !converged {
            Verdict::Inconclusive
        } else if margin >= -tol {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        Self {
            name: name.to_string(),
            point,
            lhs,
            rhs,
            relation,
            margin,
            tol,
            verdict,
        }
    }

    fn inconclusive(name: &str, point: Vec<(String, f64)>) -> Self {
        Self::new(name, point, f64::NAN, f64::NAN, Relation::Eq, 0.0, false)
    }

    /// Slack left before the verdict flips; negative for failures.
    pub fn slack(&self) -> f64 {
        self.margin + self.tol
    }
}

/// The binding part of a multi-part check: worst verdict, then least slack.
fn binding(parts: Vec<CheckResult>) -> CheckResult {
    parts
        .into_iter()
        .max_by(|a, b| {
            a.verdict
                .cmp(&b.verdict)
                .then(b.slack().partial_cmp(&a.slack()).unwrap_or(std::cmp::Ordering::Equal))
        })
        .expect("a check has at least one part")
}

type Point = Vec<(String, f64)>;

fn pt(pairs: &[(&str, f64)]) -> Vec<(String, f64)> {
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

fn eq_tol(lhs: f64, rhs: f64, err: f64) -> f64 {
    (EQ_REL_TOL * lhs.abs().max(rhs.abs())).max(err)
}

fn ineq_tol(err: f64) -> f64 {
    INEQ_ABS_TOL.max(err)
}

/// `Γ(x) / y^x`, evaluated in log space.
fn envelope(x: f64, y: f64) -> Result<f64> {
    Ok((log_gamma(x)? - x * y.ln()).exp())
}

/// Bigamma evaluations shared between checks, keyed symmetrically.
struct Evaluator {
    cfg: EvalConfig,
    memo: Option<RwLock<HashMap<(u64, u64), QuadResult>>>,
}

impl Evaluator {
    fn plain(cfg: &EvalConfig) -> Self {
        Self { cfg: *cfg, memo: None }
    }

    fn memoized(cfg: &EvalConfig) -> Self {
        Self {
            cfg: *cfg,
            memo: Some(RwLock::new(HashMap::new())),
        }
    }

    fn big(&self, x: f64, y: f64) -> Result<QuadResult> {
        let Some(memo) = &self.memo else {
            return bigamma(x, y, &self.cfg);
        };
        let key = if x <= y { (x.to_bits(), y.to_bits()) } else { (y.to_bits(), x.to_bits()) };
        if let Some(r) = memo.read().expect("memo poisoned").get(&key) {
            return Ok(*r);
        }
        let r = bigamma(x, y, &self.cfg)?;
        memo.write().expect("memo poisoned").insert(key, r);
        Ok(r)
    }

    /// `Γ'(1)` with its error.
    fn gamma_prime(&self) -> Result<(f64, f64, bool)> {
        let e = shared_derivs().get(1, &self.cfg)?;
        Ok((e.value, e.err, e.converged))
    }
}

fn check_open_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must lie in (0, 1), got {v}")))
    }
}

fn lemma1(ev: &Evaluator, alpha: f64, x: f64) -> Result<CheckResult> {
    if !(alpha > -1.0) || !(x > 0.0) {
        return Err(Error::Domain(format!("lemma1 needs alpha > -1 and x > 0, got ({alpha}, {x})")));
    }
    let q = tanh_sinh_nodes(
        |n: Node| (alpha * n.from_lower.ln() + (x - 1.0) * neg_ln_unit(n).ln()).exp(),
        0.0,
        1.0,
        &ev.cfg,
    )?;
    let rhs = (log_gamma(x)? - x * (alpha + 1.0).ln()).exp();
    Ok(CheckResult::new(
        "lemma1",
        pt(&[("alpha", alpha), ("x", x)]),
        q.value,
        rhs,
        Relation::Eq,
        eq_tol(q.value, rhs, q.err_estimate),
        q.converged,
    ))
}

/// `∫₀¹ t^α (-ln t)^(x-1) dt = Γ(x) / (α+1)^x`.
pub fn lemma1_check(alpha: f64, x: f64, cfg: &EvalConfig) -> Result<CheckResult> {
    lemma1(&Evaluator::plain(cfg), alpha, x)
}

fn quadrant(ev: &Evaluator, x: f64, y: f64) -> Result<CheckResult> {
    let g = ev.big(x, y)?;
    let env_x = envelope(x, y)?;
    let env_y = envelope(y, x)?;
    let tol = ineq_tol(g.err_estimate);
    let point = pt(&[("x", x), ("y", y)]);
    let part = |rhs: f64, rel: Relation| CheckResult::new("quadrant", point.clone(), g.value, rhs, rel, tol, g.converged);
    let mut parts = Vec::new();
    // Points on x = 1 or y = 1 fall under every adjacent case.
    if x >= 1.0 && y >= 1.0 {
        parts.extend([part(env_x, Relation::Ge), part(env_y, Relation::Ge)]);
    }
    if x >= 1.0 && y <= 1.0 {
        parts.extend([part(env_y, Relation::Ge), part(env_x, Relation::Le)]);
    }
    if x <= 1.0 && y >= 1.0 {
        parts.extend([part(env_x, Relation::Ge), part(env_y, Relation::Le)]);
    }
    if x <= 1.0 && y <= 1.0 {
        parts.extend([part(env_x, Relation::Le), part(env_y, Relation::Le)]);
    }
    Ok(binding(parts))
}

/// Quadrant envelopes of `Γ(x, y)` by `Γ(x)/y^x` and `Γ(y)/x^y`.
pub fn quadrant_check(x: f64, y: f64, cfg: &EvalConfig) -> Result<CheckResult> {
    quadrant(&Evaluator::plain(cfg), x, y)
}

fn diag(ev: &Evaluator, x: f64) -> Result<CheckResult> {
    let g = ev.big(x, x)?;
    let rhs = envelope(x, x)?;
    let tol = ineq_tol(g.err_estimate);
    let point = pt(&[("x", x)]);
    let mut parts = Vec::new();
    if x >= 1.0 {
        parts.push(CheckResult::new("diag", point.clone(), g.value, rhs, Relation::Ge, tol, g.converged));
    }
    if x <= 1.0 {
        parts.push(CheckResult::new("diag", point, g.value, rhs, Relation::Le, tol, g.converged));
    }
    Ok(binding(parts))
}

/// `Γ(x, x)` against `Γ(x)/x^x`.
pub fn diag_check(x: f64, cfg: &EvalConfig) -> Result<CheckResult> {
    diag(&Evaluator::plain(cfg), x)
}

fn recip(ev: &Evaluator, x: f64) -> Result<CheckResult> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("recip needs x > 0, got {x}")));
    }
    let g = ev.big(x, 1.0 / x)?;
    let lo = (log_gamma(1.0 / x)? - x.ln() / x).exp();
    let hi = (log_gamma(x)? + x * x.ln()).exp();
    let tol = ineq_tol(g.err_estimate);
    let point = pt(&[("x", x)]);
    let part = |rhs: f64, rel: Relation| CheckResult::new("recip", point.clone(), g.value, rhs, rel, tol, g.converged);
    let mut parts = Vec::new();
    if x >= 1.0 {
        parts.extend([part(lo, Relation::Ge), part(hi, Relation::Le)]);
    }
    if x <= 1.0 {
        parts.extend([part(lo, Relation::Le), part(hi, Relation::Ge)]);
    }
    Ok(binding(parts))
}

/// `x^(-1/x) Γ(1/x) ≤ Γ(x, 1/x) ≤ x^x Γ(x)` for `x ≥ 1`, reversed below 1.
pub fn recip_check(x: f64, cfg: &EvalConfig) -> Result<CheckResult> {
    recip(&Evaluator::plain(cfg), x)
}

fn beta_compare(ev: &Evaluator, x: f64, y: f64) -> Result<CheckResult> {
    let rel = if x >= 1.0 && y >= 1.0 {
        Relation::Ge
    } else if x <= 1.0 && y <= 1.0 {
        Relation::Le
    } else {
        return Err(Error::Domain(format!(
            "beta comparison is only stated for x, y on the same side of 1, got ({x}, {y})"
        )));
    };
    let g = ev.big(x, y)?;
    let b = beta(x, y)?;
    Ok(CheckResult::new(
        "beta_compare",
        pt(&[("x", x), ("y", y)]),
        g.value,
        b,
        rel,
        ineq_tol(g.err_estimate),
        g.converged,
    ))
}

/// `Γ(x, y) ≥ B(x, y)` for `x, y ≥ 1`, reversed for `x, y ≤ 1`.
pub fn beta_compare_check(x: f64, y: f64, cfg: &EvalConfig) -> Result<CheckResult> {
    beta_compare(&Evaluator::plain(cfg), x, y)
}

fn reflection_upper(ev: &Evaluator, x: f64) -> Result<CheckResult> {
    check_open_unit("x", x)?;
    let g = ev.big(x, 1.0 - x)?;
    let rhs = PI / (PI * x).sin();
    Ok(CheckResult::new(
        "reflection_upper",
        pt(&[("x", x)]),
        g.value,
        rhs,
        Relation::Le,
        ineq_tol(g.err_estimate),
        g.converged,
    ))
}

/// `Γ(x, 1-x) ≤ π / sin(πx)`.
pub fn reflection_upper_check(x: f64, cfg: &EvalConfig) -> Result<CheckResult> {
    reflection_upper(&Evaluator::plain(cfg), x)
}

fn reflection_lower(ev: &Evaluator, x: f64) -> Result<CheckResult> {
    check_open_unit("x", x)?;
    let g = ev.big(x, 1.0 - x)?;
    let (d1, e1, ok) = ev.gamma_prime()?;
    let rhs = (-d1).exp();
    Ok(CheckResult::new(
        "reflection_lower",
        pt(&[("x", x)]),
        g.value,
        rhs,
        Relation::Ge,
        ineq_tol(g.err_estimate + rhs * e1),
        g.converged && ok,
    ))
}

/// `Γ(x, 1-x) ≥ e^(-Γ'(1))`.
pub fn reflection_lower_check(x: f64, cfg: &EvalConfig) -> Result<CheckResult> {
    reflection_lower(&Evaluator::plain(cfg), x)
}

fn jensen(ev: &Evaluator, x: f64, y: f64) -> Result<CheckResult> {
    let g = ev.big(x, y)?;
    let (d1, e1, ok) = ev.gamma_prime()?;
    let k = x + y - 2.0;
    let rhs = (k * d1).exp();
    Ok(CheckResult::new(
        "jensen",
        pt(&[("x", x), ("y", y)]),
        g.value,
        rhs,
        Relation::Ge,
        ineq_tol(g.err_estimate + rhs * k.abs() * e1),
        g.converged && ok,
    ))
}

/// `Γ(x, y) ≥ exp((x + y - 2) Γ'(1))`.
pub fn jensen_check(x: f64, y: f64, cfg: &EvalConfig) -> Result<CheckResult> {
    jensen(&Evaluator::plain(cfg), x, y)
}

/// `(a/e)^(x-1) ((1-x)/(1-a))^(x-1)`, with the `x = 1` limit taken exactly.
fn scaling_prefactor(x: f64, a: f64) -> f64 {
    if x == 1.0 {
        return 1.0;
    }
    ((x - 1.0) * (a.ln() - 1.0 + ((1.0 - x) / (1.0 - a)).ln())).exp()
}

fn scaling_ineq(ev: &Evaluator, x: f64, y: f64, a: f64) -> Result<CheckResult> {
    if !(x > 0.0 && y > 0.0 && a > 0.0) || a == 1.0 {
        return Err(Error::Domain(format!("scaling_ineq needs x, y, a > 0 and a != 1, got ({x}, {y}, {a})")));
    }
    let rel = if x <= 1.0 && a < 1.0 {
        Relation::Ge
    } else if x >= 1.0 && a > 1.0 && y > (a - 1.0) / a {
        Relation::Le
    } else {
        return Err(Error::Domain(format!(
            "scaling_ineq needs x ≤ 1 with a < 1, or x ≥ 1 with a > 1 and y > (a-1)/a; got ({x}, {y}, {a})"
        )));
    };
    let g = ev.big(x, y)?;
    let k = (1.0 - a) / a;
    let integral = tanh_sinh_nodes(
        |n: Node| (k * n.from_lower.ln() + (y - 1.0) * neg_ln_complement(n).ln()).exp(),
        0.0,
        1.0,
        &ev.cfg,
    )?;
    let pref = scaling_prefactor(x, a);
    let rhs = pref * integral.value;
    Ok(CheckResult::new(
        "scaling_ineq",
        pt(&[("x", x), ("y", y), ("a", a)]),
        g.value,
        rhs,
        rel,
        ineq_tol(g.err_estimate + pref * integral.err_estimate),
        g.converged && integral.converged,
    ))
}

/// The scaling inequality: `Γ(x, y) ≥ (a/e)^(x-1) ((1-x)/(1-a))^(x-1) ∫₀¹ t^((1-a)/a) (-ln(1-t))^(y-1) dt`
/// for `x ≤ 1, a < 1`, reversed for `x ≥ 1, a > 1, y > (a-1)/a`.
pub fn scaling_ineq_check(x: f64, y: f64, a: f64, cfg: &EvalConfig) -> Result<CheckResult> {
    scaling_ineq(&Evaluator::plain(cfg), x, y, a)
}

fn corollary_a(ev: &Evaluator, x: f64, y: f64, a: f64) -> Result<CheckResult> {
    if !(x > 0.0 && x <= 1.0 && y >= 1.0) {
        return Err(Error::Domain(format!("corollary_a needs 0 < x ≤ 1 ≤ y, got ({x}, {y})")));
    }
    check_open_unit("a", a)?;
    let g = ev.big(x, y)?;
    let rhs = a / (1.0 + a * (y - 1.0)) * scaling_prefactor(x, a);
    Ok(CheckResult::new(
        "corollary_a",
        pt(&[("x", x), ("y", y), ("a", a)]),
        g.value,
        rhs,
        Relation::Ge,
        ineq_tol(g.err_estimate),
        g.converged,
    ))
}

/// `Γ(x, y) ≥ a/(1 + a(y-1)) · (a/e)^(x-1) ((1-x)/(1-a))^(x-1)` for `x ≤ 1 ≤ y`, `0 < a < 1`.
pub fn corollary_a_check(x: f64, y: f64, a: f64, cfg: &EvalConfig) -> Result<CheckResult> {
    corollary_a(&Evaluator::plain(cfg), x, y, a)
}

/// `Γ(x) ≥ a^x e^(1-x) ((1-x)/(1-a))^(x-1)` for `0 < x ≤ 1`, `0 < a < 1`.
pub fn gamma_lower_check(x: f64, a: f64) -> Result<CheckResult> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::Domain(format!("gamma_lower needs 0 < x ≤ 1, got {x}")));
    }
    check_open_unit("a", a)?;
    let lhs = gamma(x)?;
    // a^x e^(1-x) = a · (a/e)^(x-1)
    let rhs = a * scaling_prefactor(x, a);
    Ok(CheckResult::new(
        "gamma_lower",
        pt(&[("x", x), ("a", a)]),
        lhs,
        rhs,
        Relation::Ge,
        INEQ_ABS_TOL,
        true,
    ))
}

fn logconvex(ev: &Evaluator, p1: (f64, f64), p2: (f64, f64), p: f64) -> Result<CheckResult> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("logconvex needs p in [0, 1], got {p}")));
    }
    let q = 1.0 - p;
    let mid = ev.big(p * p1.0 + q * p2.0, p * p1.1 + q * p2.1)?;
    let g1 = ev.big(p1.0, p1.1)?;
    let g2 = ev.big(p2.0, p2.1)?;
    let rhs = (p * g1.value.ln() + q * g2.value.ln()).exp();
    let err = mid.err_estimate + rhs * (p * g1.err_estimate / g1.value + q * g2.err_estimate / g2.value);
    Ok(CheckResult::new(
        "logconvex",
        pt(&[("x1", p1.0), ("y1", p1.1), ("x2", p2.0), ("y2", p2.1), ("p", p)]),
        mid.value,
        rhs,
        Relation::Le,
        (EQ_REL_TOL * rhs.abs()).max(err),
        mid.converged && g1.converged && g2.converged,
    ))
}

/// `Γ(p P1 + (1-p) P2) ≤ Γ(P1)^p Γ(P2)^(1-p)`.
pub fn logconvex_check(p1: (f64, f64), p2: (f64, f64), p: f64, cfg: &EvalConfig) -> Result<CheckResult> {
    logconvex(&Evaluator::plain(cfg), p1, p2, p)
}

/// Coefficient bounds on `Γ_ln(m, n)` from the derivative constants `D(k) = Γ⁽ᵏ⁾(1)`:
/// `|Γ_ln| ≤ ½D(2m-2) + ½D(2n-2)`, `Γ_ln² ≤ D(2m-2) D(2n-2)` and, on the
/// diagonal, `|Γ_ln(n, n)| ≤ D(2n-2)`. The binding part is reported.
pub fn hoelder_coeff_check(m: u32, n: u32, cfg: &EvalConfig) -> Result<CheckResult> {
    if m == 0 || n == 0 || m > COEFF_CAP || n > COEFF_CAP {
        return Err(Error::Domain(format!("hoelder_coeff needs 1 ≤ m, n ≤ {COEFF_CAP}, got ({m}, {n})")));
    }
    let c = gamma_ln(m, n, cfg)?;
    let dm = shared_derivs().get(2 * m - 2, cfg)?;
    let dn = shared_derivs().get(2 * n - 2, cfg)?;
    let ok = c.converged && dm.converged && dn.converged;
    let point = pt(&[("m", m as f64), ("n", n as f64)]);
    let abs_c = c.value.abs();
    let mut parts = vec![
        CheckResult::new(
            "hoelder_coeff",
            point.clone(),
            abs_c,
            0.5 * (dm.value + dn.value),
            Relation::Le,
            ineq_tol(c.err_estimate + 0.5 * (dm.err + dn.err)),
            ok,
        ),
        CheckResult::new(
            "hoelder_coeff",
            point.clone(),
            c.value * c.value,
            dm.value * dn.value,
            Relation::Le,
            ineq_tol(2.0 * abs_c * c.err_estimate + dm.value.abs() * dn.err + dn.value.abs() * dm.err),
            ok,
        ),
    ];
    if m == n {
        parts.push(CheckResult::new(
            "hoelder_coeff",
            point,
            abs_c,
            dm.value,
            Relation::Le,
            ineq_tol(c.err_estimate + dm.err),
            ok,
        ));
    }
    Ok(binding(parts))
}

/// The raw unit-interval path is symmetric in `(x, y)` within its error bars.
pub fn symmetry_check(x: f64, y: f64, cfg: &EvalConfig) -> Result<CheckResult> {
    let a = bigamma_unit_interval(x, y, cfg)?;
    let b = bigamma_unit_interval(y, x, cfg)?;
    Ok(CheckResult::new(
        "symmetry",
        pt(&[("x", x), ("y", y)]),
        a.value,
        b.value,
        Relation::Eq,
        eq_tol(a.value, b.value, 10.0 * (a.err_estimate + b.err_estimate)),
        a.converged && b.converged,
    ))
}

fn scaling_identity(ev: &Evaluator, x: f64, y: f64, a: f64) -> Result<CheckResult> {
    let s = bigamma_scaled(x, y, a, &ev.cfg)?;
    let g = ev.big(x, y)?;
    Ok(CheckResult::new(
        "scaling_identity",
        pt(&[("x", x), ("y", y), ("a", a)]),
        s.value,
        g.value,
        Relation::Eq,
        eq_tol(s.value, g.value, s.err_estimate + g.err_estimate),
        s.converged && g.converged,
    ))
}

/// The scaled representation agrees with `Γ(x, y)` for any `a > 0`.
pub fn scaling_identity_check(x: f64, y: f64, a: f64, cfg: &EvalConfig) -> Result<CheckResult> {
    scaling_identity(&Evaluator::plain(cfg), x, y, a)
}

fn additivity(ev: &Evaluator, x: f64, y: f64, z: f64) -> Result<CheckResult> {
    check_open_unit("z", z)?;
    let g = ev.big(x, y)?;
    let lo = incomplete_direct(x, y, z, &ev.cfg)?;
    let hi = incomplete_direct(y, x, 1.0 - z, &ev.cfg)?;
    let rhs = lo.value + hi.value;
    Ok(CheckResult::new(
        "additivity",
        pt(&[("x", x), ("y", y), ("z", z)]),
        g.value,
        rhs,
        Relation::Eq,
        eq_tol(g.value, rhs, g.err_estimate + lo.err_estimate + hi.err_estimate),
        g.converged && lo.converged && hi.converged,
    ))
}

/// `Γ(x, y) = Γ_z(x, y) + Γ_{1-z}(y, x)`, both incomplete parts by direct quadrature.
pub fn additivity_check(x: f64, y: f64, z: f64, cfg: &EvalConfig) -> Result<CheckResult> {
    additivity(&Evaluator::plain(cfg), x, y, z)
}

fn ratio_reflection(ev: &Evaluator, x: f64, y: f64, z: f64) -> Result<CheckResult> {
    check_open_unit("z", z)?;
    let r = ratio(x, y, z, &ev.cfg)?;
    let num = incomplete_direct(y, x, 1.0 - z, &ev.cfg)?;
    let den = ev.big(y, x)?;
    let q = num.value / den.value;
    let rhs = 1.0 - q;
    let err = r.err_estimate + (num.err_estimate + q.abs() * den.err_estimate) / den.value;
    Ok(CheckResult::new(
        "ratio_reflection",
        pt(&[("x", x), ("y", y), ("z", z)]),
        r.value,
        rhs,
        Relation::Eq,
        EQ_REL_TOL.max(err),
        r.converged && num.converged && den.converged,
    ))
}

/// `I_z(x, y) = 1 - I_{1-z}(y, x)`, the right side by direct quadrature.
pub fn ratio_reflection_check(x: f64, y: f64, z: f64, cfg: &EvalConfig) -> Result<CheckResult> {
    ratio_reflection(&Evaluator::plain(cfg), x, y, z)
}

/// Strict growth `Γ_{z1}(x, y) < Γ_{z2}(x, y)` for `z1 < z2`. The right side
/// carries both error bars and the tolerance is zero, so a PASS means the
/// increase exceeds the combined quadrature error.
pub fn monotone_z_check(x: f64, y: f64, z1: f64, z2: f64, cfg: &EvalConfig) -> Result<CheckResult> {
    if !(z1 < z2) {
        return Err(Error::Domain(format!("monotone_z needs z1 < z2, got ({z1}, {z2})")));
    }
    let a = incomplete(x, y, z1, cfg)?;
    let b = incomplete(x, y, z2, cfg)?;
    Ok(CheckResult::new(
        "monotone_z",
        pt(&[("x", x), ("y", y), ("z", z1), ("z_next", z2)]),
        b.value,
        a.value + a.err_estimate + b.err_estimate,
        Relation::Ge,
        0.0,
        a.converged && b.converged,
    ))
}

/// Names accepted by [`run_suite`], in default execution order.
pub const CHECK_NAMES: &[&str] = &[
    "lemma1",
    "quadrant",
    "diag",
    "recip",
    "beta_compare",
    "reflection_upper",
    "reflection_lower",
    "jensen",
    "scaling_ineq",
    "corollary_a",
    "gamma_lower",
    "logconvex",
    "hoelder_coeff",
    "symmetry",
    "scaling_identity",
    "additivity",
    "ratio_reflection",
    "monotone_z",
];

const GRID_SYMBOLS: &[&str] = &["x", "y", "z", "a", "p", "m", "n"];

/// Per-symbol value lists; each check sweeps the cartesian product of the
/// symbols it uses. Symbols left out have no values, so checks that need
/// them produce no points.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GridSpec {
    values: BTreeMap<String, Vec<f64>>,
}

impl GridSpec {
    pub fn new() -> Self {
        Self::default()
    }

    /// The default verification grid.
    pub fn default_grid() -> Self {
        let xy = vec![0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 5.0];
        let mn: Vec<f64> = (1..=6).map(f64::from).collect();
        Self::new()
            .with("x", xy.clone())
            .and_then(|g| g.with("y", xy))
            .and_then(|g| g.with("z", vec![0.1, 0.25, 0.5, 0.75, 0.9]))
            .and_then(|g| g.with("a", vec![0.25, 0.5, 0.75, 1.5, 2.0, 4.0]))
            .and_then(|g| g.with("p", vec![0.0, 0.3, 0.5, 0.7, 1.0]))
            .and_then(|g| g.with("m", mn.clone()))
            .and_then(|g| g.with("n", mn))
            .expect("default grid is valid")
    }

    /// Set the values of one symbol.
    pub fn with(mut self, symbol: &str, values: Vec<f64>) -> Result<Self> {
        if !GRID_SYMBOLS.contains(&symbol) {
            return Err(Error::Config(format!(
                "unknown grid symbol `{symbol}` (expected one of {})",
                GRID_SYMBOLS.join(", ")
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Config(format!("grid value {v} for `{symbol}` is not finite")));
        }
        if matches!(symbol, "m" | "n") {
            if let Some(v) = values.iter().find(|v| !(v.fract() == 0.0 && **v >= 1.0)) {
                return Err(Error::Config(format!("`{symbol}` takes positive integers, got {v}")));
            }
        }
        self.values.insert(symbol.to_string(), values);
        Ok(self)
    }

    pub fn get(&self, symbol: &str) -> &[f64] {
        self.values.get(symbol).map_or(&[], Vec::as_slice)
    }

    pub fn is_empty(&self) -> bool {
        self.values.values().all(Vec::is_empty)
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    /// `x=0.5,1,2;y=1;z=0.25`: symbols separated by `;`, values by `,`.
    fn from_str(s: &str) -> Result<Self> {
        let mut grid = GridSpec::new();
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (sym, vals) = part
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("grid entry `{part}` lacks `=`")))?;
            let values = vals
                .split(',')
                .map(str::trim)
                .filter(|v| !v.is_empty())
                .map(|v| v.parse::<f64>().map_err(|_| Error::Config(format!("bad grid value `{v}`"))))
                .collect::<Result<Vec<f64>>>()?;
            grid = grid.with(sym.trim(), values)?;
        }
        Ok(grid)
    }
}

/// A grid point a check declined, with the precondition it violated.
#[derive(Clone, Debug, PartialEq)]
pub struct Skipped {
    pub check: String,
    pub point: Vec<(String, f64)>,
    pub reason: String,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SuiteSummary {
    pub pass: usize,
    pub fail: usize,
    pub inconclusive: usize,
    pub skipped: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SuiteReport {
    pub results: Vec<CheckResult>,
    pub skipped: Vec<Skipped>,
}

impl SuiteReport {
    pub fn summary(&self) -> SuiteSummary {
        let count = |v| self.results.iter().filter(|r| r.verdict == v).count();
        SuiteSummary {
            pass: count(Verdict::Pass),
            fail: count(Verdict::Fail),
            inconclusive: count(Verdict::Inconclusive),
            skipped: self.skipped.len(),
        }
    }

    pub fn failures(&self) -> Vec<&CheckResult> {
        self.results.iter().filter(|r| r.verdict == Verdict::Fail).collect()
    }
}

fn product(grid: &GridSpec, symbols: &[&str]) -> Vec<Vec<(String, f64)>> {
    let mut out: Vec<Vec<(String, f64)>> = vec![Vec::new()];
    for &s in symbols {
        let vals = grid.get(s);
        out = out
            .into_iter()
            .flat_map(|prefix| {
                vals.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push((s.to_string(), v));
                    p
                })
            })
            .collect();
    }
    out
}

fn sweep_points(name: &str, grid: &GridSpec) -> Vec<Vec<(String, f64)>> {
    match name {
        // α runs over y - 1 so the default grid exercises α ∈ (-1, 4].
        "lemma1" => product(grid, &["x", "y"])
            .into_iter()
            .map(|p| pt(&[("alpha", p[1].1 - 1.0), ("x", p[0].1)]))
            .collect(),
        "quadrant" | "beta_compare" | "jensen" | "symmetry" => product(grid, &["x", "y"]),
        "diag" | "recip" | "reflection_upper" | "reflection_lower" => product(grid, &["x"]),
        "scaling_ineq" | "corollary_a" | "scaling_identity" => product(grid, &["x", "y", "a"]),
        "gamma_lower" => product(grid, &["x", "a"]),
        "hoelder_coeff" => product(grid, &["m", "n"]),
        "additivity" | "ratio_reflection" => product(grid, &["x", "y", "z"]),
        "logconvex" => {
            // Unordered pairs of (x, y) points; p ↔ 1-p covers the other order.
            let pts = product(grid, &["x", "y"]);
            let mut out = Vec::new();
            for (i, a) in pts.iter().enumerate() {
                for b in &pts[i..] {
                    for &p in grid.get("p") {
                        out.push(pt(&[("x1", a[0].1), ("y1", a[1].1), ("x2", b[0].1), ("y2", b[1].1), ("p", p)]));
                    }
                }
            }
            out
        }
        "monotone_z" => {
            let mut ladder = grid.get("z").to_vec();
            ladder.sort_by(f64::total_cmp);
            ladder.dedup();
            let mut out = Vec::new();
            for p in product(grid, &["x", "y"]) {
                for w in ladder.windows(2) {
                    out.push(pt(&[("x", p[0].1), ("y", p[1].1), ("z", w[0]), ("z_next", w[1])]));
                }
            }
            out
        }
        _ => unreachable!("check names are validated before sweeping"),
    }
}

fn run_point(name: &str, ev: &Evaluator, v: &[f64]) -> Result<CheckResult> {
    let cfg = &ev.cfg;
    match name {
        "lemma1" => lemma1(ev, v[0], v[1]),
        "quadrant" => quadrant(ev, v[0], v[1]),
        "diag" => diag(ev, v[0]),
        "recip" => recip(ev, v[0]),
        "beta_compare" => beta_compare(ev, v[0], v[1]),
        "reflection_upper" => reflection_upper(ev, v[0]),
        "reflection_lower" => reflection_lower(ev, v[0]),
        "jensen" => jensen(ev, v[0], v[1]),
        "scaling_ineq" => scaling_ineq(ev, v[0], v[1], v[2]),
        "corollary_a" => corollary_a(ev, v[0], v[1], v[2]),
        "gamma_lower" => gamma_lower_check(v[0], v[1]),
        "logconvex" => logconvex(ev, (v[0], v[1]), (v[2], v[3]), v[4]),
        "hoelder_coeff" => hoelder_coeff_check(v[0] as u32, v[1] as u32, cfg),
        "symmetry" => symmetry_check(v[0], v[1], cfg),
        "scaling_identity" => scaling_identity(ev, v[0], v[1], v[2]),
        "additivity" => additivity(ev, v[0], v[1], v[2]),
        "ratio_reflection" => ratio_reflection(ev, v[0], v[1], v[2]),
        "monotone_z" => monotone_z_check(v[0], v[1], v[2], v[3], cfg),
        _ => unreachable!("check names are validated before sweeping"),
    }
}

/// Run the named checks (all of them when `which` is empty) over `grid`.
///
/// Points violating a check's preconditions are recorded as skipped. A
/// quadrature that errors out yields an INCONCLUSIVE record. Output order is
/// check order, then grid order, whatever the parallel schedule. With
/// `fail_fast` the run stops after the first check that produced a FAIL.
pub fn run_suite(grid: &GridSpec, which: &[String], cfg: &EvalConfig, fail_fast: bool) -> Result<SuiteReport> {
    cfg.validate()?;
    let names: Vec<&str> = if which.is_empty() {
        CHECK_NAMES.to_vec()
    } else {
        which
            .iter()
            .map(|w| {
                CHECK_NAMES
                    .iter()
                    .copied()
                    .find(|n| n == w)
                    .ok_or_else(|| Error::UnknownCheck(w.clone()))
            })
            .collect::<Result<_>>()?
    };
    let ev = Evaluator::memoized(cfg);
    let mut report = SuiteReport::default();
    for name in names {
        let outcomes: Vec<(Point, Result<CheckResult>)> = sweep_points(name, grid)
            .into_par_iter()
            .map(|point| {
                let vals: Vec<f64> = point.iter().map(|p| p.1).collect();
                let r = run_point(name, &ev, &vals);
                (point, r)
            })
            .collect();
        for (point, r) in outcomes {
            match r {
                Ok(c) => report.results.push(c),
                Err(e @ (Error::Domain(_) | Error::Range(_))) => report.skipped.push(Skipped {
                    check: name.to_string(),
                    point,
                    reason: e.to_string(),
                }),
                Err(_) => report.results.push(CheckResult::inconclusive(name, point)),
            }
        }
        if fail_fast && report.results.iter().any(|r| r.verdict == Verdict::Fail) {
            break;
        }
    }
    Ok(report)
}
