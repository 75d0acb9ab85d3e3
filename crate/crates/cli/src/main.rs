use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use bandcf_core::band::{parse_spec, AnySpec, BandSpec};
use bandcf_core::ensemble::{moment_reports, EnsembleSpec};
use bandcf_core::mcf::{cf_target, run_cf, CfContext, Tail};
use bandcf_core::pade::{contact_order, probe_width, ContactReport};
use bandcf_core::paths::{
    path_weight, visit_paths, weight_polynomial_brute_with_budget, LatticePath, PathConstraint, DEFAULT_BUDGET,
};
use bandcf_core::resolvent::series_by_powers;
use bandcf_core::scalar::{fmt_f64, Scalar};
use bandcf_core::series::SeriesMatrix;
use bandcf_core::verify::{run_verify, SuiteParams};
use bandcf_core::{Error, Result};

const SCHEMA: &str = "bandcf/1";

#[derive(Parser)]
#[command(name = "bandcf", version, about = "Lattice-path series, banded resolvents and matrix continued fractions")]
struct Cli {
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    json: bool,
    /// CSV output, to PATH or to stdout.
    #[arg(long, global = true, num_args = 0..=1, value_name = "PATH")]
    csv: Option<Option<PathBuf>>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Band specification utilities.
    Spec {
        #[command(subcommand)]
        action: SpecCmd,
    },
    /// Enumerate lattice paths.
    Paths(PathsArgs),
    /// Generating series of a path family.
    Series(SeriesArgs),
    /// Evaluate a matrix continued fraction.
    Cf(CfArgs),
    /// Contact order of truncation resolvents.
    Pade(PadeArgs),
    /// Monte Carlo spectral moments of a random band ensemble.
    Random(RandomArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
}

#[derive(Subcommand)]
enum SpecCmd {
    /// Parse a spec and print its normalized form.
    Validate {
        file: PathBuf,
        /// Also require coefficients for paths within heights LO,HI.
        #[arg(long, value_delimiter = ',', num_args = 1, allow_hyphen_values = true, value_name = "LO,HI")]
        heights: Option<Vec<i64>>,
    },
}

#[derive(Args)]
struct PathsArgs {
    #[arg(long)]
    len: usize,
    #[arg(long, allow_hyphen_values = true)]
    from: i64,
    #[arg(long, allow_hyphen_values = true)]
    to: i64,
    /// d, p, dhat or band:N
    #[arg(long, default_value = "p")]
    constraint: String,
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Print each path's weight (needs --spec).
    #[arg(long)]
    weights: bool,
    /// Print only the count and weight polynomial.
    #[arg(long)]
    count_only: bool,
    /// Bands only: p and q without a spec file.
    #[arg(long, value_delimiter = ',', num_args = 1, value_name = "P,Q")]
    band: Option<Vec<i64>>,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
}

#[derive(Args)]
struct SeriesArgs {
    /// a, ak:K, w, v, zeta or rn:N
    #[arg(long)]
    family: String,
    #[arg(long, allow_hyphen_values = true)]
    i: i64,
    #[arg(long, allow_hyphen_values = true)]
    j: i64,
    #[arg(long, default_value_t = 24)]
    width: usize,
    #[arg(long)]
    spec: PathBuf,
}

#[derive(Args)]
struct CfArgs {
    /// alpha, beta, rho or nu
    #[arg(long)]
    flavor: String,
    #[arg(long)]
    levels: usize,
    /// exact, zero or diag
    #[arg(long, default_value = "exact")]
    tail: String,
    #[arg(long, default_value_t = 24)]
    width: usize,
    #[arg(long)]
    spec: PathBuf,
    /// Truncation size for the rho flavor.
    #[arg(long)]
    n: Option<i64>,
    /// Compare against the independently computed target; exit 1 on mismatch.
    #[arg(long)]
    check: bool,
}

#[derive(Args)]
struct PadeArgs {
    #[arg(long)]
    n: i64,
    #[arg(long)]
    i: Option<i64>,
    #[arg(long)]
    j: Option<i64>,
    #[arg(long)]
    all: bool,
    /// Defaults to the largest L over the cells plus 3.
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    spec: PathBuf,
}

#[derive(Args)]
struct RandomArgs {
    #[arg(long)]
    ensemble: PathBuf,
    #[arg(long, default_value_t = 4)]
    ell_max: usize,
    #[arg(long, value_delimiter = ',', default_value = "50,100,200")]
    sizes: Vec<i64>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
}

#[derive(Args)]
struct VerifyArgs {
    suite: String,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    max_len: Option<usize>,
    #[arg(long)]
    max_idx: Option<i64>,
    #[arg(long)]
    n_max: Option<i64>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<i64>>,
    #[arg(long)]
    ell_max: Option<usize>,
}

struct Output {
    json: bool,
    csv: Option<Option<PathBuf>>,
    text: String,
}

impl Output {
    fn line(&mut self, s: impl AsRef<str>) {
        self.text.push_str(s.as_ref());
        self.text.push('\n');
    }

    fn document(&mut self, mut v: Value) {
        if let Value::Object(m) = &mut v {
            m.shift_insert(0, "schema".into(), json!(SCHEMA));
        }
        self.line(serde_json::to_string_pretty(&v).expect("serializable"));
    }

    fn json_line(&mut self, mut v: Value) {
        if let Value::Object(m) = &mut v {
            m.shift_insert(0, "schema".into(), json!(SCHEMA));
        }
        self.line(serde_json::to_string(&v).expect("serializable"));
    }

    /// Writes CSV rows to the requested file; returns true when they went to stdout instead.
    fn csv(&mut self, header: &str, rows: &[String]) -> Result<bool> {
        let mut body = String::from(header);
        body.push('\n');
        for r in rows {
            body.push_str(r);
            body.push('\n');
        }
        match &self.csv {
            Some(Some(path)) => {
                fs::write(path, body).map_err(|e| Error::Invalid(format!("writing {}: {e}", path.display())))?;
                Ok(false)
            }
            Some(None) => {
                self.text.push_str(&body);
                Ok(true)
            }
            None => Ok(false),
        }
    }

    fn csv_to_stdout(&self) -> bool {
        matches!(self.csv, Some(None))
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Invalid(format!("reading {}: {e}", path.display())))
}

fn load_spec(path: &Path) -> Result<AnySpec> {
    parse_spec(&read(path)?)
}

fn csv_value<C: Scalar>(c: &C) -> String {
    c.render()
}

/// Runs `$body` with `$s` bound to the spec in its own ring.
macro_rules! with_ring {
    ($spec:expr, $s:ident => $body:expr) => {
        match $spec {
            AnySpec::Rational($s) => $body,
            AnySpec::Complex($s) => $body,
        }
    };
}

fn cmd_spec(action: SpecCmd, out: &mut Output) -> Result<bool> {
    let SpecCmd::Validate { file, heights } = action;
    let spec = load_spec(&file)?;
    if let Some(h) = &heights {
        if h.len() != 2 {
            return Err(Error::Invalid("--heights takes LO,HI".into()));
        }
        with_ring!(&spec, s => s.check_heights(h[0], h[1]))?;
    }
    if out.json {
        out.document(json!({"valid": true, "spec": spec.to_json()}));
    } else {
        let (p, q) = with_ring!(&spec, s => (s.p(), s.q()));
        out.line(format!("valid: p={p} q={q} ring={}", spec.ring().name()));
        out.line(serde_json::to_string(&spec.to_json()).expect("serializable"));
    }
    Ok(true)
}

fn paths_with_spec<C: Scalar>(a: &PathsArgs, c: PathConstraint, spec: &BandSpec<C>, out: &mut Output) -> Result<bool> {
    if a.count_only {
        let mut count = 0u64;
        visit_paths(a.len, a.from, a.to, c, spec.params(), a.budget, |_| {
            count += 1;
            Ok(())
        })?;
        let w = weight_polynomial_brute_with_budget(a.len, a.from, a.to, c, spec, a.budget)?;
        if out.json {
            out.document(json!({"count": count, "weightPolynomial": w.to_json()}));
        } else {
            out.line(format!("count: {count}"));
            out.line(format!("weight polynomial: {}", w.render()));
        }
        return Ok(true);
    }
    let mut rows = Vec::new();
    let mut total = C::zero();
    visit_paths(a.len, a.from, a.to, c, spec.params(), a.budget, |h| {
        let path = LatticePath::new(h.to_vec());
        let w = path_weight(&path, spec)?;
        total = total.plus(&w);
        rows.push((path, w));
        Ok(())
    })?;
    if out.json {
        let paths: Vec<Value> = rows
            .iter()
            .map(|(p, w)| {
                let mut o = json!({"heights": p.heights});
                if a.weights {
                    o["weight"] = w.to_json();
                }
                o
            })
            .collect();
        out.document(json!({"count": rows.len(), "weightPolynomial": total.to_json(), "paths": paths}));
    } else if out.csv.is_some() {
        let lines: Vec<String> = rows
            .iter()
            .map(|(p, w)| format!("\"{p}\",{}", if a.weights { csv_value(w) } else { String::new() }))
            .collect();
        out.csv("heights,weight", &lines)?;
    } else {
        for (p, w) in &rows {
            if a.weights {
                out.line(format!("{p}\t{}", w.render()));
            } else {
                out.line(p.to_string());
            }
        }
    }
    Ok(true)
}

fn cmd_paths(a: PathsArgs, out: &mut Output) -> Result<bool> {
    let c = PathConstraint::parse(&a.constraint)?;
    if let Some(path) = &a.spec {
        let spec = load_spec(path)?;
        return with_ring!(&spec, s => paths_with_spec(&a, c, s, out));
    }
    if a.weights {
        return Err(Error::Invalid("--weights needs --spec".into()));
    }
    let (p, q) = match a.band.as_deref() {
        Some([p, q]) => (*p, *q),
        Some(_) => return Err(Error::Invalid("--band takes P,Q".into())),
        None => (1, 1),
    };
    let params = bandcf_core::band::BandParameters::new(p, q)?;
    let mut heights = Vec::new();
    let count = visit_paths(a.len, a.from, a.to, c, params, a.budget, |h| {
        if !a.count_only {
            heights.push(LatticePath::new(h.to_vec()));
        }
        Ok(())
    })?;
    if out.json {
        let mut doc = json!({"count": count});
        if !a.count_only {
            doc["paths"] = heights.iter().map(|p| json!({"heights": p.heights})).collect();
        }
        out.document(doc);
    } else if a.count_only {
        out.line(format!("count: {count}"));
    } else if out.csv.is_some() {
        let lines: Vec<String> = heights.iter().map(|p| format!("\"{p}\",")).collect();
        out.csv("heights,weight", &lines)?;
    } else {
        for p in &heights {
            out.line(p.to_string());
        }
    }
    Ok(true)
}

fn series_out<C: Scalar>(a: &SeriesArgs, spec: &BandSpec<C>, out: &mut Output) -> Result<bool> {
    let s = series_by_powers(&a.family, a.i, a.j, a.width, spec)?;
    if out.json {
        out.document(json!({
            "family": a.family, "i": a.i, "j": a.j, "width": a.width, "ring": C::RING.name(), "series": s.to_json(),
        }));
    } else if out.csv.is_some() {
        let rows: Vec<String> = s
            .coeffs()
            .iter()
            .enumerate()
            .map(|(t, c)| format!("{},{}", s.hi() - t as i64, csv_value(c)))
            .collect();
        out.csv("exponent,coefficient", &rows)?;
    } else {
        out.line(format!("{}[{},{}] = {}", a.family, a.i, a.j, s.pretty()));
    }
    Ok(true)
}

fn matrix_rows<C: Scalar>(m: &SeriesMatrix<C>) -> Vec<String> {
    let mut rows = Vec::new();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let s = m.get(i, j);
            for (t, c) in s.coeffs().iter().enumerate() {
                rows.push(format!("{i},{j},{},{}", s.hi() - t as i64, csv_value(c)));
            }
        }
    }
    rows
}

fn cf_out<C: Scalar>(a: &CfArgs, spec: &BandSpec<C>, out: &mut Output) -> Result<bool> {
    let mut ctx = CfContext::new(spec.clone(), a.width);
    if let Some(n) = a.n {
        ctx = ctx.with_n(n);
    }
    let tail = Tail::parse(&a.tail)?;
    let m = run_cf(&a.flavor, a.levels, tail, &ctx)?;
    let matches = if a.check { Some(m.agrees_with(&cf_target(&a.flavor, &ctx)?)) } else { None };
    if out.json {
        let mut doc = json!({
            "flavor": a.flavor, "levels": a.levels, "tail": a.tail, "width": a.width, "n": a.n,
            "ring": C::RING.name(), "matrix": m.to_json(),
        });
        if let Some(ok) = matches {
            doc["matchesTarget"] = json!(ok);
        }
        out.document(doc);
    } else if out.csv.is_some() {
        out.csv("i,j,exponent,coefficient", &matrix_rows(&m))?;
    } else {
        out.line(format!("{} continued fraction, {} levels, {} tail ({}×{})", a.flavor, a.levels, a.tail, m.rows(), m.cols()));
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                out.line(format!("  [{i},{j}] {}", m.get(i, j).pretty()));
            }
        }
        if let Some(ok) = matches {
            out.line(format!("matches target: {ok}"));
        }
    }
    Ok(matches.unwrap_or(true))
}

fn report_json(r: &ContactReport) -> Value {
    serde_json::to_value(r).expect("serializable")
}

fn pade_out<C: Scalar>(a: &PadeArgs, spec: &BandSpec<C>, out: &mut Output) -> Result<bool> {
    let cells: Vec<(i64, i64)> = if a.all {
        (0..a.n).flat_map(|i| (0..a.n).map(move |j| (i, j))).collect()
    } else {
        match (a.i, a.j) {
            (Some(i), Some(j)) => vec![(i, j)],
            _ => return Err(Error::Invalid("pass --i and --j, or --all".into())),
        }
    };
    let width = a.width.unwrap_or_else(|| probe_width(a.n, spec.p(), spec.q()));
    let reps = cells
        .iter()
        .map(|&(i, j)| contact_order(spec, a.n, i, j, width))
        .collect::<Result<Vec<_>>>()?;
    let min_slack = reps.iter().map(|r| r.observed_match - r.predicted_l).min().unwrap_or(0);
    let ok = reps.iter().all(|r| r.slack() >= 0);
    if out.json {
        for r in &reps {
            out.json_line(report_json(r));
        }
        out.json_line(json!({"summary": {"cells": reps.len(), "minMatchMinusL": min_slack, "boundHolds": ok}}));
    } else if out.csv.is_some() {
        let rows: Vec<String> = reps
            .iter()
            .map(|r| format!("{},{},{},{},{},{}", r.n, r.i, r.j, r.predicted_l, r.observed_match, r.strict_at_next))
            .collect();
        out.csv("n,i,j,predictedL,observedMatch,strictAtNext", &rows)?;
    } else {
        out.line(format!("{:>4} {:>4} {:>4} {:>6} {:>9} {:>7}", "n", "i", "j", "L", "observed", "strict"));
        for r in &reps {
            out.line(format!(
                "{:>4} {:>4} {:>4} {:>6} {:>9} {:>7}",
                r.n, r.i, r.j, r.predicted_l, r.observed_match, r.strict_at_next
            ));
        }
        out.line(format!("min observedMatch − predictedL over {} cells: {min_slack}", reps.len()));
    }
    Ok(ok)
}

fn cmd_random(a: RandomArgs, seed: u64, out: &mut Output) -> Result<bool> {
    let ens = EnsembleSpec::parse(&read(&a.ensemble)?)?;
    let reports = moment_reports(&ens, &a.sizes, a.ell_max, a.trials, seed)?;
    if out.csv.is_some() {
        let mut rows = Vec::new();
        for r in &reports {
            for e in &r.estimates {
                rows.push(format!("{},{},{},{},{}", r.ell, e.n, fmt_f64(e.mean), fmt_f64(e.stderr), fmt_f64(r.limit())));
            }
        }
        if out.csv("ell,n,mean,stderr,limit", &rows)? {
            return Ok(true);
        }
    }
    if out.json {
        for r in &reports {
            let mut v = r.to_json();
            v["trials"] = json!(a.trials);
            v["seed"] = json!(seed);
            out.json_line(v);
        }
    } else if !out.csv_to_stdout() {
        out.line(format!("{:>4} {:>7} {:>24} {:>24} {:>24}", "ell", "n", "mean", "stderr", "limit"));
        for r in &reports {
            for e in &r.estimates {
                out.line(format!(
                    "{:>4} {:>7} {:>24} {:>24} {:>24}",
                    r.ell,
                    e.n,
                    fmt_f64(e.mean),
                    fmt_f64(e.stderr),
                    fmt_f64(r.limit())
                ));
            }
        }
    }
    Ok(true)
}

fn cmd_verify(a: VerifyArgs, seed: u64, out: &mut Output) -> Result<bool> {
    let sp = SuiteParams {
        seed,
        trials: a.trials,
        width: a.width,
        max_len: a.max_len,
        max_idx: a.max_idx,
        n_max: a.n_max,
        levels: a.levels,
        depth: a.depth,
        sizes: a.sizes,
        ell_max: a.ell_max,
    };
    let report = run_verify(&a.suite, &sp)?;
    if out.json {
        out.document(report.to_json());
    } else if out.csv.is_some() {
        let rows: Vec<String> = report
            .checks
            .iter()
            .map(|c| format!("\"{}\",{},{}", c.name.replace('"', "'"), c.pass, fmt_f64(c.residual)))
            .collect();
        out.csv("check,pass,residual", &rows)?;
    } else {
        out.line(format!(
            "{}: {} ({} checks, {} failures, max residual {})",
            report.suite,
            if report.pass() { "PASS" } else { "FAIL" },
            report.checks.len(),
            report.failures(),
            fmt_f64(report.max_residual())
        ));
        for c in report.checks.iter().filter(|c| !c.pass) {
            let mut msg = String::new();
            let _ = write!(msg, "  failed: {} residual {} {}", c.name, fmt_f64(c.residual), c.detail);
            out.line(msg);
        }
    }
    Ok(report.pass())
}

fn run(cli: Cli, out: &mut Output) -> Result<bool> {
    match cli.cmd {
        Cmd::Spec { action } => cmd_spec(action, out),
        Cmd::Paths(a) => cmd_paths(a, out),
        Cmd::Series(a) => {
            let spec = load_spec(&a.spec)?;
            with_ring!(&spec, s => series_out(&a, s, out))
        }
        Cmd::Cf(a) => {
            let spec = load_spec(&a.spec)?;
            with_ring!(&spec, s => cf_out(&a, s, out))
        }
        Cmd::Pade(a) => {
            let spec = load_spec(&a.spec)?;
            with_ring!(&spec, s => pade_out(&a, s, out))
        }
        Cmd::Random(a) => cmd_random(a, cli.seed, out),
        Cmd::Verify(a) => cmd_verify(a, cli.seed, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let mut out = Output { json: cli.json, csv: cli.csv.clone(), text: String::new() };
    let result = run(cli, &mut out);
    print!("{}", out.text);
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            if out.json {
                out.text.clear();
                out.document(json!({"error": {"kind": e.kind(), "message": e.to_string()}}));
                print!("{}", out.text);
            }
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
