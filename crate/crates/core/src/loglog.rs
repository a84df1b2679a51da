//! Log-log coefficients `Γ_ln(m, n)` and persisted coefficient tables.
//!
//! `Γ_ln(m, n) = ∫₀¹ (ln(-ln t))^(m-1) (ln(-ln(1-t)))^(n-1) dt` are the Taylor
//! coefficients of the Bigamma function at `(1, 1)`; the integer-grid values
//! `Γ(m, n)` play the same role for the Beta function. Both families are
//! symmetric, so tables compute `m ≤ n` only and mirror.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::bigamma::bigamma;
use crate::error::{Error, Result};
use crate::quad::{combine_to_tolerance, tanh_sinh_nodes, EvalConfig, Node, QuadResult};

/// Largest index accepted for either coefficient family.
pub const COEFF_CAP: u32 = 20;

const HEADER_TAG: &str = "#bigamma-coeff-table v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TableKind {
    /// `Γ_ln(m, n)`.
    GammaLn,
    /// `Γ(m, n)` at integer arguments.
    BigammaInt,
}

impl fmt::Display for TableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TableKind::GammaLn => "GAMMA_LN",
            TableKind::BigammaInt => "BIGAMMA_INT",
        })
    }
}

impl FromStr for TableKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "GAMMA_LN" => Ok(TableKind::GammaLn),
            "BIGAMMA_INT" => Ok(TableKind::BigammaInt),
            other => Err(Error::Schema(format!("unknown table kind `{other}`"))),
        }
    }
}

/// One coefficient with its quadrature error bar.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoeffEntry {
    pub value: f64,
    pub err: f64,
}

/// Tolerances a table was built with; persisted in the file header.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TableTolerances {
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl From<&EvalConfig> for TableTolerances {
    fn from(cfg: &EvalConfig) -> Self {
        Self {
            abs_tol: cfg.abs_tol,
            rel_tol: cfg.rel_tol,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoeffTable {
    pub kind: TableKind,
    pub max_m: u32,
    pub max_n: u32,
    pub entries: BTreeMap<(u32, u32), CoeffEntry>,
    pub build_config: TableTolerances,
}

impl CoeffTable {
    pub fn get(&self, m: u32, n: u32) -> Option<CoeffEntry> {
        self.entries.get(&(m, n)).copied()
    }

    /// Entry `(m, n)` or a coverage error naming it.
    pub fn require(&self, m: u32, n: u32) -> Result<CoeffEntry> {
        self.get(m, n).ok_or(Error::Coverage { m, n })
    }

    /// Whether an entry met the tolerances the table was built with.
    pub fn entry_converged(&self, e: &CoeffEntry) -> bool {
        e.value.is_finite()
            && e.err <= self.build_config.abs_tol.max(self.build_config.rel_tol * e.value.abs())
    }

    /// Entries that failed to converge or whose quadrature errored.
    pub fn flagged(&self) -> Vec<(u32, u32)> {
        self.entries
            .iter()
            .filter(|(_, e)| !self.entry_converged(e))
            .map(|(k, _)| *k)
            .collect()
    }

    pub fn max_err(&self) -> f64 {
        self.entries.values().map(|e| e.err).fold(0.0, f64::max)
    }

    fn in_shape(max_m: u32, max_n: u32, m: u32, n: u32) -> bool {
        (m <= max_m && n <= max_n) || (n <= max_m && m <= max_n)
    }

    /// Serialize in the versioned text format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{HEADER_TAG} kind={} max_m={} max_n={} abs_tol={:e} rel_tol={:e}",
            self.kind, self.max_m, self.max_n, self.build_config.abs_tol, self.build_config.rel_tol
        );
        for ((m, n), e) in &self.entries {
            let _ = writeln!(out, "{m},{n},{:e},{:e}", e.value, e.err);
        }
        out
    }

    /// Parse and validate the text format.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let hline = hline + 1;
        let rest = header.strip_prefix(HEADER_TAG).ok_or_else(|| Error::Parse {
            line: hline,
            msg: format!("header must start with `{HEADER_TAG}`"),
        })?;
        let mut fields = BTreeMap::new();
        for tok in rest.split_whitespace() {
            let (k, v) = tok.split_once('=').ok_or_else(|| Error::Parse {
                line: hline,
                msg: format!("malformed header field `{tok}`"),
            })?;
            fields.insert(k, v);
        }
        let field = |k: &str| {
            fields.get(k).copied().ok_or_else(|| Error::Parse {
                line: hline,
                msg: format!("header lacks `{k}`"),
            })
        };
        let bad = |k: &str| Error::Parse {
            line: hline,
            msg: format!("header field `{k}` is malformed"),
        };
        let kind: TableKind = field("kind")?.parse()?;
        let max_m: u32 = field("max_m")?.parse().map_err(|_| bad("max_m"))?;
        let max_n: u32 = field("max_n")?.parse().map_err(|_| bad("max_n"))?;
        let abs_tol: f64 = field("abs_tol")?.parse().map_err(|_| bad("abs_tol"))?;
        let rel_tol: f64 = field("rel_tol")?.parse().map_err(|_| bad("rel_tol"))?;
        check_dims(max_m, max_n).map_err(|e| Error::Schema(e.to_string()))?;

        let mut entries = BTreeMap::new();
        for (i, line) in lines {
            let line_no = i + 1;
            let perr = |msg: String| Error::Parse { line: line_no, msg };
            let cols: Vec<&str> = line.trim().split(',').collect();
            if cols.len() != 4 {
                return Err(perr(format!("expected 4 comma-separated fields, found {}", cols.len())));
            }
            let m: u32 = cols[0].trim().parse().map_err(|_| perr(format!("bad index `{}`", cols[0])))?;
            let n: u32 = cols[1].trim().parse().map_err(|_| perr(format!("bad index `{}`", cols[1])))?;
            let value: f64 = cols[2].trim().parse().map_err(|_| perr(format!("bad value `{}`", cols[2])))?;
            let err: f64 = cols[3].trim().parse().map_err(|_| perr(format!("bad error `{}`", cols[3])))?;
            if m == 0 || n == 0 {
                return Err(perr("indices start at 1".into()));
            }
            if !Self::in_shape(max_m, max_n, m, n) {
                return Err(Error::Schema(format!(
                    "entry ({m},{n}) lies outside the declared {max_m}x{max_n} shape"
                )));
            }
            if entries.insert((m, n), CoeffEntry { value, err }).is_some() {
                return Err(perr(format!("duplicate entry ({m},{n})")));
            }
        }
        if entries.is_empty() {
            return Err(Error::EmptyTable);
        }
        for (&(m, n), e) in &entries {
            match entries.get(&(n, m)) {
                None => return Err(Error::Schema(format!("entry ({m},{n}) has no mirror ({n},{m})"))),
                Some(mirror) if mirror.value.to_bits() != e.value.to_bits() => {
                    return Err(Error::Schema(format!("entries ({m},{n}) and ({n},{m}) differ")))
                }
                _ => {}
            }
        }
        for m in 1..=max_m {
            for n in 1..=max_n {
                if !entries.contains_key(&(m, n)) {
                    return Err(Error::Schema(format!("missing entry ({m},{n})")));
                }
            }
        }
        Ok(Self {
            kind,
            max_m,
            max_n,
            entries,
            build_config: TableTolerances { abs_tol, rel_tol },
        })
    }
}

fn check_dims(max_m: u32, max_n: u32) -> Result<()> {
    for (name, v) in [("max_m", max_m), ("max_n", max_n)] {
        if v == 0 || v > COEFF_CAP {
            return Err(Error::Domain(format!("{name} must lie in [1, {COEFF_CAP}], got {v}")));
        }
    }
    Ok(())
}

/// `∫₀^(1/2) (ln(-ln t))^(m-1) (ln(-ln(1-t)))^(n-1) dt`.
fn lower_half(m: u32, n: u32, cfg: &EvalConfig) -> Result<QuadResult> {
    let (p, q) = ((m - 1) as i32, (n - 1) as i32);
    tanh_sinh_nodes(
        |node: Node| {
            let t = node.x;
            (-t.ln()).ln().powi(p) * (-(-t).ln_1p()).ln().powi(q)
        },
        0.0,
        0.5,
        cfg,
    )
}

/// `Γ_ln(m, n)`. The integrand changes sign at `t = 1/e`, so the value is signed.
pub fn gamma_ln(m: u32, n: u32, cfg: &EvalConfig) -> Result<QuadResult> {
    if m == 0 || n == 0 || m > COEFF_CAP || n > COEFF_CAP {
        return Err(Error::Domain(format!(
            "Γ_ln indices must lie in [1, {COEFF_CAP}], got ({m}, {n})"
        )));
    }
    combine_to_tolerance(cfg, |c| {
        let a = lower_half(m, n, c)?;
        if m == n {
            return Ok(a.scaled(2.0));
        }
        // ψ_{m,n}(1 - t) = ψ_{n,m}(t)
        Ok(a.plus(lower_half(n, m, c)?))
    })
}

fn coefficient(kind: TableKind, m: u32, n: u32, cfg: &EvalConfig) -> CoeffEntry {
    let r = match kind {
        TableKind::GammaLn => gamma_ln(m, n, cfg),
        TableKind::BigammaInt => bigamma(m as f64, n as f64, cfg),
    };
    match r {
        Ok(q) if q.converged => CoeffEntry { value: q.value, err: q.err_estimate },
        // Keep the estimate but make sure the entry reads as unconverged.
        Ok(q) => CoeffEntry {
            value: q.value,
            err: q.err_estimate.max(f64::MAX),
        },
        Err(_) => CoeffEntry { value: f64::NAN, err: f64::INFINITY },
    }
}

/// Fill every `(m, n)` with `m ≤ max_m`, `n ≤ max_n` together with its mirror.
/// Entries are independent and computed in parallel; failures are kept as
/// flagged entries rather than aborting the build.
pub fn build_table(kind: TableKind, max_m: u32, max_n: u32, cfg: &EvalConfig) -> Result<CoeffTable> {
    check_dims(max_m, max_n)?;
    cfg.validate()?;
    let mut pairs = Vec::new();
    for m in 1..=max_m.max(max_n) {
        for n in m..=max_m.max(max_n) {
            if CoeffTable::in_shape(max_m, max_n, m, n) {
                pairs.push((m, n));
            }
        }
    }
    let computed: Vec<((u32, u32), CoeffEntry)> = pairs
        .par_iter()
        .map(|&(m, n)| ((m, n), coefficient(kind, m, n, cfg)))
        .collect();
    let mut entries = BTreeMap::new();
    for ((m, n), e) in computed {
        entries.insert((m, n), e);
        entries.insert((n, m), e);
    }
    Ok(CoeffTable {
        kind,
        max_m,
        max_n,
        entries,
        build_config: cfg.into(),
    })
}

pub fn save_table(table: &CoeffTable, path: &Path) -> Result<()> {
    std::fs::write(path, table.to_text())?;
    Ok(())
}

pub fn load_table(path: &Path) -> Result<CoeffTable> {
    CoeffTable::from_text(&std::fs::read_to_string(path)?)
}

/// Load a table and insist on its kind.
pub fn load_table_of_kind(path: &Path, kind: TableKind) -> Result<CoeffTable> {
    let t = load_table(path)?;
    if t.kind != kind {
        return Err(Error::Schema(format!("expected a {kind} table, found {}", t.kind)));
    }
    Ok(t)
}
