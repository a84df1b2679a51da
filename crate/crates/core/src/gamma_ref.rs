//! Reference Gamma and Beta functions and the derivative constants `Γ⁽ⁿ⁾(1)`.
//!
//! `log_gamma` is the primitive; `gamma` and `beta` are derived from it so
//! that inequality checks at large arguments stay in log space until the
//! last step. `beta_integral` and `gamma_deriv_at_one` go through the
//! quadrature engine and serve as independent routes.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::{OnceLock, RwLock};

use crate::error::{Error, Result};
use crate::quad::{neg_ln_unit, tanh_sinh_nodes, EvalConfig, Node, QuadResult};

/// Largest order accepted by [`gamma_deriv_at_one`].
pub const DERIV_ORDER_CAP: u32 = 40;

/// Above this argument `Γ(x)` overflows a double.
const GAMMA_OVERFLOW: f64 = 171.624_376_956_302_7;

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} requires a finite positive argument, got {x}")))
    }
}

/// `ln Γ(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    check_positive("log_gamma", x)?;
    if x < 0.5 {
        // Γ(x) = Γ(x + 1) / x keeps the Lanczos sum away from its poles.
        return Ok(lanczos_ln_gamma(x + 1.0) - x.ln());
    }
    Ok(lanczos_ln_gamma(x))
}

fn lanczos_ln_gamma(x: f64) -> f64 {
    let z = x - 1.0;
    let series = LANCZOS
        .iter()
        .enumerate()
        .skip(1)
        .fold(LANCZOS[0], |acc, (i, &c)| acc + c / (z + i as f64));
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + series.ln()
}

/// `Γ(x)`; fails with a range error where the result would overflow.
pub fn gamma(x: f64) -> Result<f64> {
    check_positive("gamma", x)?;
    if x > GAMMA_OVERFLOW {
        return Err(Error::Range(format!(
            "Γ({x}) overflows a double; use log_gamma instead"
        )));
    }
    Ok(log_gamma(x)?.exp())
}

/// `ln B(x, y)`.
pub fn log_beta(x: f64, y: f64) -> Result<f64> {
    check_positive("beta", x)?;
    check_positive("beta", y)?;
    Ok(log_gamma(x)? + log_gamma(y)? - log_gamma(x + y)?)
}

/// `B(x, y) = Γ(x)Γ(y)/Γ(x+y)`.
pub fn beta(x: f64, y: f64) -> Result<f64> {
    Ok(log_beta(x, y)?.exp())
}

/// `B(x, y)` by direct quadrature of `t^(x-1) (1-t)^(y-1)` over `(0, 1)`.
pub fn beta_integral(x: f64, y: f64, cfg: &EvalConfig) -> Result<QuadResult> {
    check_positive("beta_integral", x)?;
    check_positive("beta_integral", y)?;
    tanh_sinh_nodes(
        |n: Node| ((x - 1.0) * n.from_lower.ln() + (y - 1.0) * n.to_upper.ln()).exp(),
        0.0,
        1.0,
        cfg,
    )
}

/// `Γ⁽ⁿ⁾(1) = ∫₀¹ (ln(-ln t))ⁿ dt`, returned as `(value, error estimate)`.
///
/// Orders above [`DERIV_ORDER_CAP`] are rejected: the integrand's mass moves
/// to within `e^-n` of `t = 1` and the values grow like `n!`.
pub fn gamma_deriv_at_one(n: u32, cfg: &EvalConfig) -> Result<(f64, f64)> {
    let r = gamma_deriv_quad(n, cfg)?;
    Ok((r.value, r.err_estimate))
}

fn gamma_deriv_quad(n: u32, cfg: &EvalConfig) -> Result<QuadResult> {
    if n > DERIV_ORDER_CAP {
        return Err(Error::Domain(format!(
            "derivative order {n} exceeds the cap {DERIV_ORDER_CAP}"
        )));
    }
    if n == 0 {
        return Ok(QuadResult::exact(1.0));
    }
    let k = n as i32;
    tanh_sinh_nodes(|node: Node| neg_ln_unit(node).ln().powi(k), 0.0, 1.0, cfg)
}

/// One cached derivative constant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivEntry {
    pub value: f64,
    pub err: f64,
    pub converged: bool,
}

/// Cache of `Γ⁽ⁿ⁾(1)` values. Reads share the lock; a miss computes outside
/// the lock and then takes it exclusively to insert.
#[derive(Debug, Default)]
pub struct DerivTable {
    values: RwLock<BTreeMap<u32, DerivEntry>>,
}

impl DerivTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Cached entry for `n` if it meets `cfg`'s tolerance, else a fresh computation.
    pub fn get(&self, n: u32, cfg: &EvalConfig) -> Result<DerivEntry> {
        if let Some(e) = self.values.read().expect("deriv table poisoned").get(&n) {
            if e.converged && e.err <= cfg.tolerance_for(e.value) {
                return Ok(*e);
            }
        }
        let r = gamma_deriv_quad(n, cfg)?;
        let entry = DerivEntry {
            value: r.value,
            err: r.err_estimate,
            converged: r.converged,
        };
        let mut guard = self.values.write().expect("deriv table poisoned");
        let slot = guard.entry(n).or_insert(entry);
        if entry.converged && (!slot.converged || entry.err < slot.err) {
            *slot = entry;
        }
        Ok(entry)
    }

    pub fn entries(&self) -> BTreeMap<u32, DerivEntry> {
        self.values.read().expect("deriv table poisoned").clone()
    }
}

/// Process-wide derivative cache.
pub fn shared_derivs() -> &'static DerivTable {
    static TABLE: OnceLock<DerivTable> = OnceLock::new();
    TABLE.get_or_init(DerivTable::new)
}
