//! The Bigamma function `Γ(x, y) = ∫₀¹ (-ln t)^(x-1) (-ln(1-t))^(y-1) dt`,
//! its incomplete form, its log-log Taylor coefficients, and a certifier for
//! the inequalities it satisfies.

pub mod bigamma;
pub mod bounds;
pub mod cli;
pub mod error;
pub mod gamma_ref;
pub mod loglog;
pub mod quad;
pub mod series;

pub use crate::bigamma::{bigamma, bigamma_scaled, bigamma_unit_interval, incomplete, ratio, BigammaPoint};
pub use crate::bounds::{run_suite, CheckResult, GridSpec, Relation, Verdict};
pub use crate::error::{Error, Result};
pub use crate::loglog::{build_table, gamma_ln, load_table, save_table, CoeffTable, TableKind};
pub use crate::quad::{EvalConfig, QuadResult};
pub use crate::series::{beta_series, bigamma_series, SeriesEstimate};
