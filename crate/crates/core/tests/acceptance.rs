//! Acceptance criteria C1-C12. Each test prints one `[PASS]`/`[FAIL]` line;
//! run with `cargo test --test acceptance -- --nocapture --test-threads=1`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use ::bigamma::bounds::{lemma1_check, run_suite, GridSpec, Verdict};
use ::bigamma::gamma_ref::{beta, gamma, gamma_deriv_at_one};
use ::bigamma::loglog::{build_table, load_table, save_table, CoeffTable, TableKind};
use ::bigamma::series::{
    check_double_integral_beta, check_double_integral_gamma, check_partial_derivative_beta,
    check_partial_derivative_gamma, SeriesOptions,
};
use ::bigamma::{
    beta_series, bigamma, bigamma_scaled, bigamma_series, bigamma_unit_interval, cli, CheckResult, EvalConfig,
};

fn cfg() -> EvalConfig {
    EvalConfig::default()
}

fn tight() -> EvalConfig {
    EvalConfig {
        abs_tol: 1e-14,
        rel_tol: 1e-14,
        ..EvalConfig::default()
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn table(kind: TableKind) -> &'static CoeffTable {
    static GL: OnceLock<CoeffTable> = OnceLock::new();
    static BI: OnceLock<CoeffTable> = OnceLock::new();
    let cell = match kind {
        TableKind::GammaLn => &GL,
        TableKind::BigammaInt => &BI,
    };
    cell.get_or_init(|| build_table(kind, 13, 13, &cfg()).unwrap())
}

/// Print the criterion line, then fail the test with the collected problems.
fn report(id: &str, what: &str, problems: Vec<String>) {
    let tag = if problems.is_empty() { "PASS" } else { "FAIL" };
    println!("[{tag}] {id} {what}");
    for p in &problems {
        println!("       {p}");
    }
    assert!(problems.is_empty(), "{id}: {}", problems.join("; "));
}

fn describe(r: &CheckResult) -> String {
    let pt: Vec<String> = r.point.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!(
        "{} [{}] lhs={:e} rhs={:e} margin={:e} tol={:e} {}",
        r.name,
        pt.join(","),
        r.lhs,
        r.rhs,
        r.margin,
        r.tol,
        r.verdict
    )
}

#[test]
fn c01_identity_anchors() {
    let mut bad = Vec::new();
    let r = bigamma(1.0, 1.0, &cfg()).unwrap();
    if !r.converged || (r.value - 1.0).abs() > 1e-10 {
        bad.push(format!("Γ(1,1) = {:?}", r));
    }
    for x in [0.5, 1.0, 1.5, 2.0, 3.5, 7.0] {
        let g = gamma(x).unwrap();
        for (a, b) in [(x, 1.0), (1.0, x)] {
            let r = bigamma(a, b, &cfg()).unwrap();
            if !r.converged || rel(r.value, g) > 1e-8 {
                bad.push(format!("Γ({a},{b}) = {:e}, Γ({x}) = {g:e}", r.value));
            }
        }
    }
    report("C1", "Γ(1,1)=1 and Γ(x,1)=Γ(1,x)=Γ(x)", bad);
}

#[test]
fn c02_closed_form_anchor() {
    let want = 2.0 - PI * PI / 6.0;
    let mut bad = Vec::new();
    let half = bigamma(2.0, 2.0, &tight()).unwrap();
    let unit = bigamma_unit_interval(2.0, 2.0, &tight()).unwrap();
    for (path, r) in [("half-domain", half), ("unit-interval", unit)] {
        if !r.converged || rel(r.value, want) > 1e-9 {
            bad.push(format!("{path}: {r:?}"));
        }
    }
    report("C2", "Γ(2,2) = 2 - π²/6 by both quadrature paths", bad);
}

#[test]
fn c03_euler_constant() {
    let (v, err) = gamma_deriv_at_one(1, &tight()).unwrap();
    let mut bad = Vec::new();
    if (v + 0.577_215_664_901_532_9).abs() > 1e-10 {
        bad.push(format!("Γ'(1) = {v:e} ± {err:e}"));
    }
    report("C3", "Γ'(1) = -γ", bad);
}

#[test]
fn c04_lemma_grid() {
    let mut bad = Vec::new();
    for alpha in [0.0, 0.5, 1.0, 2.0] {
        for x in [0.5, 1.0, 1.7, 3.0] {
            let r = lemma1_check(alpha, x, &cfg()).unwrap();
            if r.verdict != Verdict::Pass || r.margin.abs() > 1e-8 * r.rhs.abs() {
                bad.push(describe(&r));
            }
        }
    }
    report("C4", "power/log lemma on the (α,x) grid", bad);
}

#[test]
fn c05_scaling_invariance() {
    let mut bad = Vec::new();
    for (x, y) in [(2.0, 2.0), (1.3, 0.8), (0.6, 3.0), (4.0, 0.5)] {
        let reference = bigamma(x, y, &cfg()).unwrap().value;
        for a in [0.25, 0.5, 1.0, 2.0, 4.0] {
            let r = bigamma_scaled(x, y, a, &cfg()).unwrap();
            if !r.converged || rel(r.value, reference) > 1e-7 {
                bad.push(format!("({x},{y}) a={a}: {:e} vs {reference:e}", r.value));
            }
        }
    }
    report("C5", "scaled integral independent of a", bad);
}

#[test]
fn c06_default_suite() {
    let report_ = run_suite(&GridSpec::default_grid(), &[], &cfg(), false).unwrap();
    let s = report_.summary();
    let mut bad: Vec<String> = report_.failures().iter().map(|r| describe(r)).collect();
    let mut collapses = 0;
    for r in &report_.results {
        let at = |k: &str| r.point.iter().find(|(n, _)| n == k).map(|p| p.1);
        let collapse = at("x") == Some(1.0)
            && at("y") == Some(1.0)
            && at("a").is_none()
            && at("z").is_none()
            && at("alpha").is_none();
        collapses += usize::from(collapse);
        if collapse && r.margin.abs() > 1e-9 {
            bad.push(format!("collapse point: {}", describe(r)));
        }
    }
    let what = format!(
        "default bounds suite: {} pass, {} fail, {} inconclusive, {} skipped; {collapses} collapse points at (1,1)",
        s.pass, s.fail, s.inconclusive, s.skipped
    );
    if collapses == 0 {
        bad.push("no results at (1,1)".into());
    }
    report("C6", &what, bad);
}

#[test]
fn c07_series_fidelity() {
    let opts = SeriesOptions::default();
    let grid = [0.7, 0.85, 1.0, 1.15, 1.3];
    let mut bad = Vec::new();
    for &x in &grid {
        for &y in &grid {
            let g = bigamma(x, y, &cfg()).unwrap();
            let s = bigamma_series(x, y, 12, table(TableKind::GammaLn), &opts).unwrap();
            if !g.converged || rel(s.value, g.value) > 1e-6 {
                bad.push(format!("Γ series ({x},{y}): {:e} vs {:e}", s.value, g.value));
            }
            let b = beta(x, y).unwrap();
            let s = beta_series(x, y, 12, table(TableKind::BigammaInt), &opts).unwrap();
            if rel(s.value, b) > 1e-6 {
                bad.push(format!("B series ({x},{y}): {:e} vs {b:e}", s.value));
            }
        }
    }
    report("C7", "order-12 series on the 5x5 grid around (1,1)", bad);
}

#[test]
fn c08_partial_derivatives() {
    let mut bad = Vec::new();
    for m in 1..=3 {
        for n in 1..=(4 - m) {
            for r in [
                check_partial_derivative_gamma(m, n, &cfg()).unwrap(),
                check_partial_derivative_beta(m, n, &cfg()).unwrap(),
            ] {
                if r.verdict != Verdict::Pass || r.margin.abs() > 1e-3 * r.rhs.abs() {
                    bad.push(describe(&r));
                }
            }
        }
    }
    report("C8", "finite-difference derivatives at (1,1) for m+n ≤ 4", bad);
}

#[test]
fn c09_double_integrals() {
    let mut bad = Vec::new();
    for r in [
        check_double_integral_gamma(12, table(TableKind::GammaLn), &cfg()).unwrap(),
        check_double_integral_beta(12, table(TableKind::BigammaInt), &cfg()).unwrap(),
    ] {
        if r.verdict != Verdict::Pass || r.margin.abs() > 1e-5 {
            bad.push(describe(&r));
        }
    }
    report("C9", "double integrals against order-12 coefficient sums", bad);
}

#[test]
fn c10_incomplete_contract() {
    let checks: Vec<String> = ["additivity", "ratio_reflection", "monotone_z"].map(String::from).to_vec();
    let rep = run_suite(&GridSpec::default_grid(), &checks, &cfg(), false).unwrap();
    let mut bad = Vec::new();
    for r in &rep.results {
        let strict = r.name == "monotone_z";
        if r.verdict != Verdict::Pass || (!strict && r.margin.abs() > 1e-8) {
            bad.push(describe(r));
        }
    }
    if rep.results.is_empty() {
        bad.push("no incomplete-function checks ran".into());
    }
    let what = format!("additivity, I_z reflection, monotonicity in z ({} checks)", rep.results.len());
    report("C10", &what, bad);
}

#[test]
fn c11_coefficient_bounds() {
    let mut bad = Vec::new();
    for m in 1..=6 {
        for n in 1..=6 {
            let r = ::bigamma::bounds::hoelder_coeff_check(m, n, &cfg()).unwrap();
            if r.verdict != Verdict::Pass {
                bad.push(describe(&r));
            }
        }
    }
    report("C11", "coefficient bounds for 1 ≤ m,n ≤ 6", bad);
}

fn run_cli(args: &[&str]) -> (i32, Vec<u8>) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cli::run(std::iter::once("bigamma").chain(args.iter().copied()), &mut out, &mut err);
    (code, out)
}

#[test]
fn c12_persistence_and_determinism() {
    let mut bad = Vec::new();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("gamma_ln.tbl");
    let t = build_table(TableKind::GammaLn, 6, 6, &cfg()).unwrap();
    save_table(&t, &path).unwrap();
    let back = load_table(&path).unwrap();
    let same = back.kind == t.kind
        && back.entries.len() == t.entries.len()
        && t.entries.iter().all(|(k, e)| {
            back.entries
                .get(k)
                .is_some_and(|b| b.value.to_bits() == e.value.to_bits() && b.err.to_bits() == e.err.to_bits())
        });
    if !same {
        bad.push("6x6 GAMMA_LN table changed on save/load".into());
    }

    for args in [
        &["table", "--xs", "0.5,1,2", "--ys", "0.5,1,2"][..],
        &["--format", "json", "eval", "1.3", "0.8", "--z", "0.37"][..],
        &["--format", "csv", "verify", "--checks", "quadrant,jensen,additivity"][..],
    ] {
        let first = run_cli(args);
        for _ in 0..2 {
            if run_cli(args) != first {
                bad.push(format!("non-deterministic output for {args:?}"));
            }
        }
    }
    report("C12", "bit-exact table round-trip and byte-identical CLI runs", bad);
}
