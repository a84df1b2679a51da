//! Truncated double power series of `Γ(x, y)` and `B(x, y)` around `(1, 1)`,
//! the mixed-partial identities behind them, and the two double-integral
//! corollaries.
//!
//! `Γ(x, y) = Σ (x-1)^m (y-1)^n / (m! n!) · Γ_ln(m+1, n+1)` and
//! `B(x, y) = Σ (1-x)^m (1-y)^n / (m! n!) · Γ(m+1, n+1)`, with `m, n ≥ 0`
//! independent. Partial sums are accumulated shell by shell (constant `m + n`)
//! from the constant term outwards.

use std::cell::Cell;

use crate::bigamma::bigamma;
use crate::bounds::{CheckResult, Relation};
use crate::error::{Error, Result};
use crate::gamma_ref::beta;
use crate::loglog::{CoeffTable, TableKind};
use crate::quad::{integrate_2d_nodes, EvalConfig, IterationOrder, Node, QuadResult};

/// Default distance from `(1, 1)` inside which series values are reported.
pub const DEFAULT_TRUST_RADIUS: f64 = 0.5;

/// Highest total derivative order the finite-difference checks support.
pub const FD_ORDER_LIMIT: u32 = 4;

const FD_STEP: f64 = 1e-2;
const FD_REL_TOL: f64 = 1e-3;
const DOUBLE_INTEGRAL_TOL: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesOptions {
    /// Largest `|x-1|` and `|y-1|` accepted.
    pub trust_radius: f64,
    /// When false, points outside the radius are summed anyway.
    pub enforce_radius: bool,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self {
            trust_radius: DEFAULT_TRUST_RADIUS,
            enforce_radius: true,
        }
    }
}

/// A truncated double sum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesEstimate {
    pub value: f64,
    /// Largest index used for `m` and `n`.
    pub order: u32,
    /// Largest `|term|` with `m + n = order`; a heuristic truncation indicator.
    pub last_shell_magnitude: f64,
    /// Propagated coefficient uncertainty, `Σ |weight| · err`.
    pub coeff_err_bound: f64,
}

fn factorials(n: u32) -> Vec<f64> {
    let mut f = vec![1.0; n as usize + 1];
    for k in 1..=n as usize {
        f[k] = f[k - 1] * k as f64;
    }
    f
}

fn check_radius(x: f64, y: f64, opts: &SeriesOptions) -> Result<()> {
    if !(x.is_finite() && y.is_finite()) {
        return Err(Error::Domain(format!("series arguments must be finite, got ({x}, {y})")));
    }
    let r = opts.trust_radius;
    if opts.enforce_radius && ((x - 1.0).abs() > r || (y - 1.0).abs() > r) {
        return Err(Error::Domain(format!(
            "({x}, {y}) lies outside the series trust radius {r} around (1, 1)"
        )));
    }
    Ok(())
}

fn check_kind(table: &CoeffTable, kind: TableKind) -> Result<()> {
    if table.kind != kind {
        return Err(Error::Schema(format!("series needs a {kind} table, got {}", table.kind)));
    }
    Ok(())
}

/// Shell-ordered partial sum of `Σ u^m v^n / (m! n!) · c(m+1, n+1)` over `0 ≤ m, n ≤ order`.
fn shell_sum(u: f64, v: f64, order: u32, table: &CoeffTable) -> Result<SeriesEstimate> {
    // Coverage is checked up front so a short table fails before any arithmetic.
    for m in 1..=order + 1 {
        for n in 1..=order + 1 {
            table.require(m, n)?;
        }
    }
    let fact = factorials(order);
    let mut total = 0.0;
    let mut err = 0.0;
    let mut last_shell = 0.0f64;
    for s in 0..=2 * order {
        let mut shell = 0.0;
        for m in s.saturating_sub(order)..=s.min(order) {
            let n = s - m;
            let w = u.powi(m as i32) * v.powi(n as i32) / (fact[m as usize] * fact[n as usize]);
            if w == 0.0 {
                // Skip rather than multiply, so flagged coefficients cannot leak NaN.
                continue;
            }
            let c = table.require(m + 1, n + 1)?;
            let term = w * c.value;
            shell += term;
            err += w.abs() * c.err;
            if s == order {
                last_shell = last_shell.max(term.abs());
            }
        }
        total += shell;
    }
    Ok(SeriesEstimate {
        value: total,
        order,
        last_shell_magnitude: last_shell,
        coeff_err_bound: err,
    })
}

/// Truncated Taylor series of `Γ(x, y)` at `(1, 1)` from a `GAMMA_LN` table.
pub fn bigamma_series(x: f64, y: f64, order: u32, table: &CoeffTable, opts: &SeriesOptions) -> Result<SeriesEstimate> {
    check_kind(table, TableKind::GammaLn)?;
    check_radius(x, y, opts)?;
    shell_sum(x - 1.0, y - 1.0, order, table)
}

/// Truncated series of `B(x, y)` at `(1, 1)` from a `BIGAMMA_INT` table.
/// The `(-1)^(m+n)` sign is carried by expanding in `1 - x` and `1 - y`.
pub fn beta_series(x: f64, y: f64, order: u32, table: &CoeffTable, opts: &SeriesOptions) -> Result<SeriesEstimate> {
    check_kind(table, TableKind::BigammaInt)?;
    check_radius(x, y, opts)?;
    shell_sum(1.0 - x, 1.0 - y, order, table)
}

// Second-order central stencils for the k-th derivative, as (offset, weight)
// pairs in units of h; the derivative is Σ w f(x + k h) / h^k.
fn stencil(k: u32) -> &'static [(f64, f64)] {
    match k {
        0 => &[(0.0, 1.0)],
        1 => &[(-1.0, -0.5), (1.0, 0.5)],
        2 => &[(-1.0, 1.0), (0.0, -2.0), (1.0, 1.0)],
        3 => &[(-2.0, -0.5), (-1.0, 1.0), (1.0, -1.0), (2.0, 0.5)],
        4 => &[(-2.0, 1.0), (-1.0, -4.0), (0.0, 6.0), (1.0, -4.0), (2.0, 1.0)],
        _ => unreachable!("stencil order checked by caller"),
    }
}

/// `∂^(i+j) f / ∂x^i ∂y^j` at `(1, 1)` by central differences with one
/// Richardson step (`h` and `h/2`).
fn mixed_partial<F>(f: F, i: u32, j: u32) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    let at = |h: f64| -> Result<f64> {
        let mut acc = 0.0;
        for &(a, wa) in stencil(i) {
            for &(b, wb) in stencil(j) {
                acc += wa * wb * f(1.0 + a * h, 1.0 + b * h)?;
            }
        }
        Ok(acc / h.powi((i + j) as i32))
    };
    if i + j == 0 {
        return f(1.0, 1.0);
    }
    let coarse = at(FD_STEP)?;
    let fine = at(0.5 * FD_STEP)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

fn check_fd_order(m: u32, n: u32) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(Error::Domain(format!("indices start at 1, got ({m}, {n})")));
    }
    if m + n - 2 > FD_ORDER_LIMIT {
        return Err(Error::Domain(format!(
            "derivative order {} exceeds the finite-difference limit {FD_ORDER_LIMIT}",
            m + n - 2
        )));
    }
    Ok(())
}

// The stencils divide by h^4 at worst, so the samples need far tighter
// tolerances than the check itself.
fn fd_config(cfg: &EvalConfig) -> EvalConfig {
    EvalConfig {
        abs_tol: cfg.abs_tol.min(1e-15),
        rel_tol: cfg.rel_tol.min(1e-14),
        ..*cfg
    }
}

fn fd_point(m: u32, n: u32) -> Vec<(String, f64)> {
    vec![("m".into(), m as f64), ("n".into(), n as f64)]
}

/// `∂^(m+n-2) Γ / ∂x^(m-1) ∂y^(n-1) (1, 1)` by finite differences against `Γ_ln(m, n)`.
pub fn check_partial_derivative_gamma(m: u32, n: u32, cfg: &EvalConfig) -> Result<CheckResult> {
    check_fd_order(m, n)?;
    let fine = fd_config(cfg);
    let converged = Cell::new(true);
    let lhs = mixed_partial(
        |x, y| {
            let r = bigamma(x, y, &fine)?;
            converged.set(converged.get() && r.converged);
            Ok(r.value)
        },
        m - 1,
        n - 1,
    )?;
    let coeff = crate::loglog::gamma_ln(m, n, cfg)?;
    let tol = (FD_REL_TOL * coeff.value.abs()).max(coeff.err_estimate);
    Ok(CheckResult::new(
        "partial_derivative_gamma",
        fd_point(m, n),
        lhs,
        coeff.value,
        Relation::Eq,
        tol,
        converged.get() && coeff.converged,
    ))
}

/// `(-1)^(m+n) ∂^(m+n-2) B / ∂x^(m-1) ∂y^(n-1) (1, 1)` against `Γ(m, n)`.
pub fn check_partial_derivative_beta(m: u32, n: u32, cfg: &EvalConfig) -> Result<CheckResult> {
    check_fd_order(m, n)?;
    let d = mixed_partial(beta, m - 1, n - 1)?;
    let lhs = if (m + n) % 2 == 0 { d } else { -d };
    let g = bigamma(m as f64, n as f64, cfg)?;
    let tol = (FD_REL_TOL * g.value.abs()).max(g.err_estimate);
    Ok(CheckResult::new(
        "partial_derivative_beta",
        fd_point(m, n),
        lhs,
        g.value,
        Relation::Eq,
        tol,
        g.converged,
    ))
}

/// Budget for the double integrals: outer rule capped at level 6 and 20 000
/// integrand calls; each inner evaluation capped at level 8.
pub fn double_integral_config(cfg: &EvalConfig) -> (EvalConfig, EvalConfig) {
    let outer = EvalConfig {
        max_level: cfg.max_level.min(6),
        max_evals: cfg.max_evals.min(20_000),
        ..*cfg
    };
    let inner = EvalConfig {
        max_level: cfg.max_level.min(8),
        ..*cfg
    };
    (outer, inner)
}

/// `∫₀¹∫₀¹ Γ(x, y) dx dy` by the iterated rule. Inner Bigamma evaluations
/// that fail to converge mark the result unconverged.
pub fn bigamma_double_integral(cfg: &EvalConfig, order: IterationOrder) -> Result<QuadResult> {
    let (outer, inner) = double_integral_config(cfg);
    let ok = Cell::new(true);
    let mut r = integrate_2d_nodes(
        |x: Node, y: Node| match bigamma(x.x, y.x, &inner) {
            Ok(q) => {
                ok.set(ok.get() && q.converged);
                q.value
            }
            Err(_) => f64::NAN,
        },
        &outer,
        order,
    )?;
    r.converged &= ok.get();
    Ok(r)
}

/// `∫₀¹∫₀¹ B(x, y) dx dy` by the iterated rule.
pub fn beta_double_integral(cfg: &EvalConfig, order: IterationOrder) -> Result<QuadResult> {
    let (outer, _) = double_integral_config(cfg);
    integrate_2d_nodes(
        |x: Node, y: Node| beta(x.x, y.x).unwrap_or(f64::NAN),
        &outer,
        order,
    )
}

/// `Σ_{m,n=1}^{order} sign(m+n) c(m, n) / (m! n!)` and its coefficient error.
fn corollary_sum(order: u32, table: &CoeffTable, alternating: bool) -> Result<(f64, f64)> {
    let fact = factorials(order);
    let mut total = 0.0;
    let mut err = 0.0;
    for s in 2..=2 * order {
        for m in s.saturating_sub(order).max(1)..=(s - 1).min(order) {
            let n = s - m;
            let c = table.require(m, n)?;
            let mut w = 1.0 / (fact[m as usize] * fact[n as usize]);
            if alternating && s % 2 == 1 {
                w = -w;
            }
            total += w * c.value;
            err += w.abs() * c.err;
        }
    }
    Ok((total, err))
}

fn double_integral_check(
    name: &str,
    order: u32,
    table: &CoeffTable,
    kind: TableKind,
    lhs: Result<QuadResult>,
) -> Result<CheckResult> {
    if order == 0 {
        return Err(Error::Domain("corollary sums start at order 1".into()));
    }
    check_kind(table, kind)?;
    let (rhs, coeff_err) = corollary_sum(order, table, kind == TableKind::GammaLn)?;
    let point = vec![("order".into(), order as f64)];
    let (value, err, converged) = match lhs {
        Ok(q) => (q.value, q.err_estimate, q.converged),
        // A blow-up in the integrand is a failed quadrature, not a refutation.
        Err(Error::Blowup { .. } | Error::Blowup2d { .. }) => (f64::INFINITY, f64::INFINITY, false),
        Err(e) => return Err(e),
    };
    let tol = DOUBLE_INTEGRAL_TOL.max(if converged { err + coeff_err } else { 0.0 });
    Ok(CheckResult::new(name, point, value, rhs, Relation::Eq, tol, converged))
}

/// `∫∫ Γ = Σ_{m,n≥1} (-1)^(m+n) Γ_ln(m, n) / (m! n!)`, truncated at `order`.
pub fn check_double_integral_gamma(order: u32, table: &CoeffTable, cfg: &EvalConfig) -> Result<CheckResult> {
    let lhs = bigamma_double_integral(cfg, IterationOrder::XThenY);
    double_integral_check("double_integral_gamma", order, table, TableKind::GammaLn, lhs)
}

/// `∫∫ B = Σ_{m,n≥1} Γ(m, n) / (m! n!)`, truncated at `order`.
pub fn check_double_integral_beta(order: u32, table: &CoeffTable, cfg: &EvalConfig) -> Result<CheckResult> {
    let lhs = beta_double_integral(cfg, IterationOrder::XThenY);
    double_integral_check("double_integral_beta", order, table, TableKind::BigammaInt, lhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::Verdict;
    use crate::loglog::build_table;

    fn cfg() -> EvalConfig {
        EvalConfig::default()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn collapse_point_is_exact() {
        let gl = build_table(TableKind::GammaLn, 4, 4, &cfg()).unwrap();
        let bi = build_table(TableKind::BigammaInt, 4, 4, &cfg()).unwrap();
        let opts = SeriesOptions::default();
        for order in 0..=3 {
            assert_eq!(bigamma_series(1.0, 1.0, order, &gl, &opts).unwrap().value, 1.0);
            assert!((beta_series(1.0, 1.0, order, &bi, &opts).unwrap().value - 1.0).abs() < 1e-12);
        }
        assert_eq!(bigamma_series(1.3, 0.8, 0, &gl, &opts).unwrap().value, 1.0);
        let h = 0.1;
        let b1 = beta_series(1.0 + h, 1.0, 1, &bi, &opts).unwrap().value;
        // 1 - h Γ(2,1) at first order; Γ(2,1) = 1 up to quadrature error
        assert!((b1 - (1.0 - h)).abs() < 1e-10, "{b1}");
    }

    #[test]
    fn order_twelve_matches_references() {
        let gl = build_table(TableKind::GammaLn, 13, 13, &cfg()).unwrap();
        let bi = build_table(TableKind::BigammaInt, 13, 13, &cfg()).unwrap();
        let opts = SeriesOptions::default();
        let s = bigamma_series(1.2, 0.9, 12, &gl, &opts).unwrap();
        let q = bigamma(1.2, 0.9, &cfg()).unwrap().value;
        assert!(rel(s.value, q) < 1e-6, "{s:?} vs {q}");
        let b = beta_series(1.1, 1.1, 12, &bi, &opts).unwrap();
        assert!(rel(b.value, beta(1.1, 1.1).unwrap()) < 1e-6, "{b:?}");
    }

    #[test]
    fn coverage_kind_and_radius_errors() {
        let gl = build_table(TableKind::GammaLn, 3, 3, &cfg()).unwrap();
        let opts = SeriesOptions::default();
        assert_eq!(
            bigamma_series(1.1, 1.1, 3, &gl, &opts).unwrap_err(),
            Error::Coverage { m: 1, n: 4 }
        );
        assert!(matches!(beta_series(1.1, 1.1, 1, &gl, &opts), Err(Error::Schema(_))));
        assert!(matches!(bigamma_series(3.0, 3.0, 1, &gl, &opts), Err(Error::Domain(_))));
        let loose = SeriesOptions { enforce_radius: false, ..opts };
        assert!(bigamma_series(3.0, 3.0, 1, &gl, &loose).is_ok());
    }

    #[test]
    fn partial_derivative_identities() {
        for (m, n) in [(1, 1), (2, 1), (1, 2), (2, 2), (3, 1)] {
            let g = check_partial_derivative_gamma(m, n, &cfg()).unwrap();
            assert_eq!(g.verdict, Verdict::Pass, "{g:?}");
            let b = check_partial_derivative_beta(m, n, &cfg()).unwrap();
            assert_eq!(b.verdict, Verdict::Pass, "{b:?}");
        }
        assert!(matches!(check_partial_derivative_gamma(3, 4, &cfg()), Err(Error::Domain(_))));
    }

    #[test]
    fn corollary_sums() {
        let gl = build_table(TableKind::GammaLn, 3, 3, &cfg()).unwrap();
        let (s1, _) = corollary_sum(1, &gl, true).unwrap();
        assert_eq!(s1, 1.0);
        let bi = build_table(TableKind::BigammaInt, 3, 3, &cfg()).unwrap();
        assert!(bi.entries.values().all(|e| e.value > 0.0));
        let (b1, _) = corollary_sum(1, &bi, false).unwrap();
        assert!((b1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn beta_double_integral_does_not_converge() {
        // B(x, y) ~ 1/x near x = 0, so the square integral diverges.
        let r = beta_double_integral(&cfg(), IterationOrder::XThenY).unwrap();
        assert!(!r.converged, "{r:?}");
    }
}
