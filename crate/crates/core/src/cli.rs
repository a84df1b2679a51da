//! Command-line front end. [`run`] takes the argument list and output streams
//! and returns the process exit code, so the binary is a thin wrapper and the
//! tests can drive it in-process.
//!
//! Exit codes: 0 clean, 1 usage/domain/I/O error, 2 a numerical outcome that
//! is not clean (non-convergence for `eval`/`table`/`coeffs`, any FAIL for
//! `verify`). CSV and JSON print floats with 17 significant digits.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;
use serde_json::value::RawValue;

use crate::bigamma::{bigamma, incomplete, ratio};
use crate::bounds::{run_suite, CheckResult, GridSpec, SuiteReport, Verdict};
use crate::error::{Error, Result};
use crate::gamma_ref::beta;
use crate::loglog::{build_table, load_table_of_kind, save_table, TableKind};
use crate::quad::EvalConfig;
use crate::series::{beta_series, bigamma_series, SeriesOptions, DEFAULT_TRUST_RADIUS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
    Human,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SeriesKind {
    Gamma,
    Beta,
}

#[derive(Debug, Parser)]
#[command(name = "bigamma", version, about = "Evaluate and verify the Bigamma function Γ(x, y)")]
struct Cli {
    #[command(flatten)]
    tol: TolArgs,

    /// Output format (default: csv for `table`, human otherwise)
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,

    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, Args)]
struct TolArgs {
    #[arg(long, global = true, env = "BIGAMMA_ABS_TOL")]
    abs_tol: Option<f64>,
    #[arg(long, global = true, env = "BIGAMMA_REL_TOL")]
    rel_tol: Option<f64>,
    #[arg(long, global = true, env = "BIGAMMA_MAX_LEVEL")]
    max_level: Option<u32>,
}

impl TolArgs {
    fn config(&self) -> Result<EvalConfig> {
        let mut cfg = EvalConfig::default();
        if let Some(v) = self.abs_tol {
            cfg.abs_tol = v;
        }
        if let Some(v) = self.rel_tol {
            cfg.rel_tol = v;
        }
        if let Some(v) = self.max_level {
            cfg.max_level = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Γ(x, y), and with --z also Γ_z(x, y) and I_z(x, y)
    #[command(allow_negative_numbers = true)]
    Eval {
        x: f64,
        y: f64,
        #[arg(long)]
        z: Option<f64>,
    },
    /// Γ(x, y) over a grid; CSV columns x,y,value,err,converged
    #[command(allow_negative_numbers = true)]
    Table {
        /// Comma-separated x values (default 0.5,1,2)
        #[arg(long)]
        xs: Option<String>,
        /// Comma-separated y values (default 0.5,1,2)
        #[arg(long)]
        ys: Option<String>,
    },
    /// Build a coefficient table and save it
    Coeffs {
        #[arg(long, value_parser = parse_kind)]
        kind: TableKind,
        #[arg(long)]
        max_m: u32,
        #[arg(long)]
        max_n: u32,
        #[arg(long)]
        out: PathBuf,
        /// Overwrite an existing file
        #[arg(long)]
        force: bool,
    },
    /// Truncated series at (x, y) against the quadrature or closed-form value
    #[command(allow_negative_numbers = true)]
    Series {
        x: f64,
        y: f64,
        #[arg(long, default_value_t = 12)]
        order: u32,
        #[arg(long)]
        table: PathBuf,
        #[arg(long, value_enum, default_value = "gamma")]
        which: SeriesKind,
        #[arg(long, default_value_t = DEFAULT_TRUST_RADIUS)]
        radius: f64,
    },
    /// Run the verification suite
    Verify {
        /// Grid as `x=0.5,1;y=2;...` (default: the built-in grid)
        #[arg(long)]
        grid: Option<String>,
        /// Comma-separated check names (default: all)
        #[arg(long, value_delimiter = ',')]
        checks: Vec<String>,
        /// Stop after the first check that produces a FAIL
        #[arg(long)]
        fail_fast: bool,
    },
}

fn parse_kind(s: &str) -> std::result::Result<TableKind, String> {
    s.to_ascii_uppercase().parse().map_err(|e: Error| e.to_string())
}

/// A float printed with 17 significant digits; `null` in JSON when not finite.
#[derive(Clone, Copy, Debug)]
pub struct F17(pub f64);

impl std::fmt::Display for F17 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.16e}", self.0)
    }
}

impl Serialize for F17 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(self.to_string()).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

/// Labelled point serialized as an object in its given order.
struct Point<'a>(&'a [(String, f64)]);

impl Serialize for Point<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0 {
            m.serialize_entry(k, &F17(*v))?;
        }
        m.end()
    }
}

fn point_text(p: &[(String, f64)]) -> String {
    p.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
}

/// Run the CLI on `args` (program name first); returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let is_info = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            if is_info {
                let _ = write!(out, "{}", e.render());
                return 0;
            }
            let _ = write!(err, "{}", e.render());
            return 1;
        }
    };
    match dispatch(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let cfg = cli.tol.config()?;
    let fmt = |default| cli.format.unwrap_or(default);
    match &cli.cmd {
        Command::Eval { x, y, z } => cmd_eval(*x, *y, *z, &cfg, fmt(OutputFormat::Human), out, err),
        Command::Table { xs, ys } => cmd_table(xs.as_deref(), ys.as_deref(), &cfg, fmt(OutputFormat::Csv), out),
        Command::Coeffs {
            kind,
            max_m,
            max_n,
            out: path,
            force,
        } => cmd_coeffs(*kind, *max_m, *max_n, path, *force, &cfg, fmt(OutputFormat::Human), out),
        Command::Series {
            x,
            y,
            order,
            table,
            which,
            radius,
        } => cmd_series(*x, *y, *order, table, *which, *radius, &cfg, fmt(OutputFormat::Human), out),
        Command::Verify { grid, checks, fail_fast } => {
            cmd_verify(grid.as_deref(), checks, *fail_fast, &cfg, fmt(OutputFormat::Human), out)
        }
    }
}

fn csv_out(out: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn json_line(out: &mut dyn Write, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(out, "{text}")?;
    Ok(())
}

#[derive(Serialize)]
struct EvalRecord {
    quantity: &'static str,
    x: F17,
    y: F17,
    z: Option<F17>,
    value: F17,
    err: F17,
    converged: bool,
}

fn cmd_eval(
    x: f64,
    y: f64,
    z: Option<f64>,
    cfg: &EvalConfig,
    fmt: OutputFormat,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32> {
    let g = bigamma(x, y, cfg)?;
    let mut records = vec![EvalRecord {
        quantity: "bigamma",
        x: F17(x),
        y: F17(y),
        z: None,
        value: F17(g.value),
        err: F17(g.err_estimate),
        converged: g.converged,
    }];
    if let Some(z) = z {
        let inc = incomplete(x, y, z, cfg)?;
        let r = ratio(x, y, z, cfg)?;
        if r.out_of_range {
            writeln!(err, "warning: I_z = {} lies outside [0, 1] beyond its error bar", r.value)?;
        }
        records.push(EvalRecord {
            quantity: "incomplete",
            x: F17(x),
            y: F17(y),
            z: Some(F17(z)),
            value: F17(inc.value),
            err: F17(inc.err_estimate),
            converged: inc.converged,
        });
        records.push(EvalRecord {
            quantity: "ratio",
            x: F17(x),
            y: F17(y),
            z: Some(F17(z)),
            value: F17(r.value),
            err: F17(r.err_estimate),
            converged: r.converged,
        });
    }
    match fmt {
        OutputFormat::Json => json_line(out, &records)?,
        OutputFormat::Csv => {
            let mut w = csv_out(out);
            w.write_record(["quantity", "x", "y", "z", "value", "err", "converged"]).map_err(csv_err)?;
            for r in &records {
                let z = r.z.map(|z| z.to_string()).unwrap_or_default();
                w.write_record([
                    r.quantity.to_string(),
                    r.x.to_string(),
                    r.y.to_string(),
                    z,
                    r.value.to_string(),
                    r.err.to_string(),
                    r.converged.to_string(),
                ])
                .map_err(csv_err)?;
            }
            w.flush()?;
        }
        OutputFormat::Human => {
            for r in &records {
                let label = match r.quantity {
                    "bigamma" => format!("Γ({x}, {y})"),
                    "incomplete" => format!("Γ_{}({x}, {y})", r.z.unwrap().0),
                    _ => format!("I_{}({x}, {y})", r.z.unwrap().0),
                };
                let flag = if r.converged { "" } else { "  [not converged]" };
                writeln!(out, "{label} = {} ± {:.2e}{flag}", r.value.0, r.err.0)?;
            }
        }
    }
    Ok(if records.iter().all(|r| r.converged) { 0 } else { 2 })
}

fn parse_list(name: &str, s: Option<&str>) -> Result<Vec<f64>> {
    let Some(s) = s else {
        return Ok(vec![0.5, 1.0, 2.0]);
    };
    let vals = s
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| v.parse::<f64>().map_err(|_| Error::Config(format!("bad {name} value `{v}`"))))
        .collect::<Result<Vec<_>>>()?;
    if vals.is_empty() {
        return Err(Error::Config(format!("--{name} is empty")));
    }
    Ok(vals)
}

#[derive(Serialize)]
struct TableRow {
    x: F17,
    y: F17,
    value: F17,
    err: F17,
    converged: bool,
}

fn cmd_table(xs: Option<&str>, ys: Option<&str>, cfg: &EvalConfig, fmt: OutputFormat, out: &mut dyn Write) -> Result<i32> {
    let xs = parse_list("xs", xs)?;
    let ys = parse_list("ys", ys)?;
    let mut rows = Vec::with_capacity(xs.len() * ys.len());
    for &x in &xs {
        for &y in &ys {
            let g = bigamma(x, y, cfg)?;
            rows.push(TableRow {
                x: F17(x),
                y: F17(y),
                value: F17(g.value),
                err: F17(g.err_estimate),
                converged: g.converged,
            });
        }
    }
    match fmt {
        OutputFormat::Json => json_line(out, &rows)?,
        OutputFormat::Csv => {
            let mut w = csv_out(out);
            w.write_record(["x", "y", "value", "err", "converged"]).map_err(csv_err)?;
            for r in &rows {
                w.write_record([
                    r.x.to_string(),
                    r.y.to_string(),
                    r.value.to_string(),
                    r.err.to_string(),
                    r.converged.to_string(),
                ])
                .map_err(csv_err)?;
            }
            w.flush()?;
        }
        OutputFormat::Human => {
            for r in &rows {
                writeln!(out, "Γ({}, {}) = {} ± {:.2e}", r.x.0, r.y.0, r.value.0, r.err.0)?;
            }
        }
    }
    Ok(if rows.iter().all(|r| r.converged) { 0 } else { 2 })
}

#[allow(clippy::too_many_arguments)]
fn cmd_coeffs(
    kind: TableKind,
    max_m: u32,
    max_n: u32,
    path: &Path,
    force: bool,
    cfg: &EvalConfig,
    fmt: OutputFormat,
    out: &mut dyn Write,
) -> Result<i32> {
    if path.exists() && !force {
        return Err(Error::Io(format!("{} exists; pass --force to overwrite", path.display())));
    }
    let table = build_table(kind, max_m, max_n, cfg)?;
    save_table(&table, path)?;
    let flagged = table.flagged();
    match fmt {
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Summary<'a> {
                kind: String,
                path: String,
                entries: usize,
                max_err: F17,
                flagged: &'a [(u32, u32)],
            }
            json_line(
                out,
                &Summary {
                    kind: kind.to_string(),
                    path: path.display().to_string(),
                    entries: table.entries.len(),
                    max_err: F17(table.max_err()),
                    flagged: &flagged,
                },
            )?;
        }
        OutputFormat::Csv => {
            let mut w = csv_out(out);
            w.write_record(["kind", "path", "entries", "max_err", "flagged"]).map_err(csv_err)?;
            w.write_record([
                kind.to_string(),
                path.display().to_string(),
                table.entries.len().to_string(),
                F17(table.max_err()).to_string(),
                flagged.len().to_string(),
            ])
            .map_err(csv_err)?;
            w.flush()?;
        }
        OutputFormat::Human => {
            writeln!(
                out,
                "wrote {kind} {max_m}x{max_n} table to {}: {} entries, max err {:.3e}",
                path.display(),
                table.entries.len(),
                table.max_err()
            )?;
            for (m, n) in &flagged {
                writeln!(out, "  entry ({m},{n}) did not converge")?;
            }
        }
    }
    Ok(if flagged.is_empty() { 0 } else { 2 })
}

#[allow(clippy::too_many_arguments)]
fn cmd_series(
    x: f64,
    y: f64,
    order: u32,
    table: &Path,
    which: SeriesKind,
    radius: f64,
    cfg: &EvalConfig,
    fmt: OutputFormat,
    out: &mut dyn Write,
) -> Result<i32> {
    let opts = SeriesOptions {
        trust_radius: radius,
        enforce_radius: true,
    };
    let (est, reference, converged) = match which {
        SeriesKind::Gamma => {
            let t = load_table_of_kind(table, TableKind::GammaLn)?;
            let est = bigamma_series(x, y, order, &t, &opts)?;
            let q = bigamma(x, y, cfg)?;
            (est, q.value, q.converged)
        }
        SeriesKind::Beta => {
            let t = load_table_of_kind(table, TableKind::BigammaInt)?;
            let est = beta_series(x, y, order, &t, &opts)?;
            (est, beta(x, y)?, true)
        }
    };
    let abs_dev = (est.value - reference).abs();
    let rel_dev = abs_dev / reference.abs();
    let which_name = match which {
        SeriesKind::Gamma => "gamma",
        SeriesKind::Beta => "beta",
    };
    match fmt {
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Rec {
                which: &'static str,
                x: F17,
                y: F17,
                order: u32,
                series: F17,
                reference: F17,
                abs_dev: F17,
                rel_dev: F17,
                last_shell_magnitude: F17,
                coeff_err_bound: F17,
            }
            json_line(
                out,
                &Rec {
                    which: which_name,
                    x: F17(x),
                    y: F17(y),
                    order,
                    series: F17(est.value),
                    reference: F17(reference),
                    abs_dev: F17(abs_dev),
                    rel_dev: F17(rel_dev),
                    last_shell_magnitude: F17(est.last_shell_magnitude),
                    coeff_err_bound: F17(est.coeff_err_bound),
                },
            )?;
        }
        OutputFormat::Csv => {
            let mut w = csv_out(out);
            w.write_record([
                "which",
                "x",
                "y",
                "order",
                "series",
                "reference",
                "abs_dev",
                "rel_dev",
                "last_shell_magnitude",
                "coeff_err_bound",
            ])
            .map_err(csv_err)?;
            w.write_record([
                which_name.to_string(),
                F17(x).to_string(),
                F17(y).to_string(),
                order.to_string(),
                F17(est.value).to_string(),
                F17(reference).to_string(),
                F17(abs_dev).to_string(),
                F17(rel_dev).to_string(),
                F17(est.last_shell_magnitude).to_string(),
                F17(est.coeff_err_bound).to_string(),
            ])
            .map_err(csv_err)?;
            w.flush()?;
        }
        OutputFormat::Human => {
            writeln!(out, "series ({which_name}, order {order}) at ({x}, {y}): {}", est.value)?;
            writeln!(out, "reference: {reference}")?;
            writeln!(out, "deviation: {abs_dev:.3e} abs, {rel_dev:.3e} rel")?;
            writeln!(out, "last shell magnitude: {:.3e}", est.last_shell_magnitude)?;
            writeln!(out, "coefficient error bound: {:.3e}", est.coeff_err_bound)?;
        }
    }
    Ok(if converged { 0 } else { 2 })
}

#[derive(Serialize)]
struct VerifyRecord<'a> {
    check: &'a str,
    point: Point<'a>,
    lhs: F17,
    rhs: F17,
    relation: String,
    margin: F17,
    tol: F17,
    verdict: String,
}

impl<'a> From<&'a CheckResult> for VerifyRecord<'a> {
    fn from(r: &'a CheckResult) -> Self {
        Self {
            check: &r.name,
            point: Point(&r.point),
            lhs: F17(r.lhs),
            rhs: F17(r.rhs),
            relation: r.relation.to_string(),
            margin: F17(r.margin),
            tol: F17(r.tol),
            verdict: r.verdict.to_string(),
        }
    }
}

#[derive(Serialize)]
struct SkipRecord<'a> {
    check: &'a str,
    point: Point<'a>,
    reason: &'a str,
}

fn write_report(report: &SuiteReport, fmt: OutputFormat, out: &mut dyn Write) -> Result<()> {
    let s = report.summary();
    match fmt {
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Summary {
                pass: usize,
                fail: usize,
                inconclusive: usize,
                skipped: usize,
            }
            #[derive(Serialize)]
            struct Doc<'a> {
                records: Vec<VerifyRecord<'a>>,
                skipped: Vec<SkipRecord<'a>>,
                summary: Summary,
            }
            let doc = Doc {
                records: report.results.iter().map(VerifyRecord::from).collect(),
                skipped: report
                    .skipped
                    .iter()
                    .map(|k| SkipRecord {
                        check: &k.check,
                        point: Point(&k.point),
                        reason: &k.reason,
                    })
                    .collect(),
                summary: Summary {
                    pass: s.pass,
                    fail: s.fail,
                    inconclusive: s.inconclusive,
                    skipped: s.skipped,
                },
            };
            json_line(out, &doc)?;
        }
        OutputFormat::Csv => {
            let mut w = csv_out(out);
            w.write_record(["check", "point", "lhs", "rhs", "relation", "margin", "tol", "verdict"])
                .map_err(csv_err)?;
            for r in &report.results {
                w.write_record([
                    r.name.clone(),
                    point_text(&r.point),
                    F17(r.lhs).to_string(),
                    F17(r.rhs).to_string(),
                    r.relation.to_string(),
                    F17(r.margin).to_string(),
                    F17(r.tol).to_string(),
                    r.verdict.to_string(),
                ])
                .map_err(csv_err)?;
            }
            w.flush()?;
        }
        OutputFormat::Human => {
            for r in report.results.iter().filter(|r| r.verdict != Verdict::Pass) {
                writeln!(
                    out,
                    "{:<12} {:<18} {} lhs={} rhs={} {} margin={:.3e} tol={:.3e}",
                    r.verdict,
                    r.name,
                    point_text(&r.point),
                    r.lhs,
                    r.rhs,
                    r.relation,
                    r.margin,
                    r.tol
                )?;
            }
            writeln!(
                out,
                "{} PASS, {} FAIL, {} INCONCLUSIVE, {} skipped",
                s.pass, s.fail, s.inconclusive, s.skipped
            )?;
        }
    }
    Ok(())
}

fn cmd_verify(
    grid: Option<&str>,
    checks: &[String],
    fail_fast: bool,
    cfg: &EvalConfig,
    fmt: OutputFormat,
    out: &mut dyn Write,
) -> Result<i32> {
    let grid = match grid {
        Some(g) => g.parse::<GridSpec>()?,
        None => GridSpec::default_grid(),
    };
    let report = run_suite(&grid, checks, cfg, fail_fast)?;
    write_report(&report, fmt, out)?;
    Ok(if report.summary().fail == 0 { 0 } else { 2 })
}
