//! One line per acceptance criterion: pass/fail and elapsed time against its budget.

use std::process::Command;
use std::time::Instant;

use bandcf_core::verify::{
    alpha_group, beta_group, contact_group, double_cf_group, limit_group, middle_identity_group, nu_group,
    oracle_paths, relations_group, rho_group, t_roundtrip, zeta_group, Group, SuiteParams,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn groups(gs: &[Group]) -> Outcome {
    let checks: usize = gs.iter().map(|g| g.checks.len()).sum();
    let failures: usize = gs.iter().map(|g| g.failures()).sum();
    Outcome { pass: failures == 0 && checks > 0, detail: format!("{checks} checks, {failures} failures") }
}

fn fixture(name: &str) -> String {
    format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn cli_bytes(args: &[&str]) -> (Option<i32>, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_bandcf")).args(args).output().expect("spawn bandcf");
    (out.status.code(), out.stdout)
}

fn determinism() -> Outcome {
    let (tri, band, uni) = (fixture("tridiagonal.json"), fixture("band21.json"), fixture("uniform.json"));
    let runs: Vec<Vec<&str>> = vec![
        vec!["--json", "verify", "theorem51", "--trials", "4"],
        vec!["--json", "verify", "prop75", "--trials", "50"],
        vec!["--json", "random", "--ensemble", &uni, "--ell-max", "3", "--sizes", "20,40", "--trials", "30"],
        vec!["--json", "cf", "--flavor", "beta", "--levels", "3", "--width", "10", "--spec", &band, "--check"],
        vec!["--json", "pade", "--n", "5", "--all", "--spec", &tri],
    ];
    let mut bad = Vec::new();
    for args in &runs {
        let first = cli_bytes(args);
        let again = cli_bytes(args);
        let mut jobs = args.clone();
        jobs.extend(["--jobs", "2"]);
        let threaded = cli_bytes(&jobs);
        if first.0 != Some(0) || first != again || first != threaded {
            bad.push(args[1..3].join(" "));
        }
    }
    Outcome { pass: bad.is_empty(), detail: format!("{} invocations, differing: {bad:?}", runs.len()) }
}

fn main() {
    let sp = SuiteParams::default();
    type Run<'a> = Box<dyn Fn() -> Outcome + 'a>;
    let criteria: Vec<(u32, &str, f64, Run)> = vec![
        (1, "oracle equivalence", 60.0, Box::new(|| groups(&[oracle_paths(&sp)]))),
        (2, "exact relation residuals", 30.0, Box::new(|| groups(&[relations_group(&sp)]))),
        (3, "T round trip", 10.0, Box::new(|| groups(&[t_roundtrip(&sp)]))),
        (4, "alpha expansion", 60.0, Box::new(|| groups(&[alpha_group(&sp)]))),
        (5, "zeta corner, beta and nu expansions", 120.0, Box::new(|| groups(&[zeta_group(&sp), beta_group(&sp), nu_group(&sp)]))),
        (6, "scalar double CF", 10.0, Box::new(|| groups(&[double_cf_group(&sp)]))),
        (7, "contact order and rho expansion", 120.0, Box::new(|| groups(&[contact_group(&sp), rho_group(&sp)]))),
        (8, "middle-index exact identity", 60.0, Box::new(|| groups(&[middle_identity_group(&sp)]))),
        (9, "uniform tridiagonal limit", 120.0, Box::new(|| groups(&[limit_group(&sp)]))),
        (10, "byte-identical CLI output", f64::INFINITY, Box::new(determinism)),
    ];
    let mut failed = Vec::new();
    for (id, name, budget, run) in &criteria {
        let t0 = Instant::now();
        let o = run();
        let secs = t0.elapsed().as_secs_f64();
        let ok = o.pass && secs < *budget;
        let limit = if budget.is_finite() { format!("budget {budget}s") } else { "no budget".into() };
        println!("criterion {id}: {} ({name}; {}; {secs:.2}s, {limit})", if ok { "PASS" } else { "FAIL" }, o.detail);
        if !ok {
            failed.push(*id);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
