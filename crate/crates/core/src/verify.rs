//! Named verification suites producing machine-readable reports.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::band::BandSpec;
use crate::ensemble::{
    exact_expected_diagonal, exact_expected_trace, expected_weight_polynomial, middle_margin, sample_trace_moments,
    Distribution, EnsembleSpec,
};
use crate::error::{Error, Result};
use crate::mcf::{cf_target, run_cf, scalar_double_cf, transform_t, transform_t_inv, CfContext, Tail};
use crate::pade::{contact_all, probe_width};
use crate::paths::{weight_polynomial_table, weight_polynomial_table_scaled, PathConstraint};
use crate::registry::Registry;
use crate::resolvent::{corner_matrix, relation_residuals, series_by_powers, series_table};
use crate::scalar::{json_f64, ratio, rational_text, Rational};
use crate::series::SeriesMatrix;
use crate::testgen::{random_params, random_series_matrix, random_spec, random_spec_with, rng_for};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SuiteParams {
    pub seed: u64,
    pub trials: Option<usize>,
    pub width: Option<usize>,
    pub max_len: Option<usize>,
    pub max_idx: Option<i64>,
    pub n_max: Option<i64>,
    pub levels: Option<usize>,
    pub depth: Option<usize>,
    pub sizes: Option<Vec<i64>>,
    pub ell_max: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckRecord {
    pub name: String,
    pub pass: bool,
    pub residual: f64,
    pub detail: Value,
}

impl CheckRecord {
    fn new(name: impl Into<String>, pass: bool, residual: f64, detail: Value) -> Self {
        CheckRecord { name: name.into(), pass, residual, detail }
    }

    pub fn to_json(&self) -> Value {
        json!({"name": self.name, "pass": self.pass, "residual": json_f64(self.residual), "detail": self.detail})
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub suite: String,
    pub params: Value,
    pub checks: Vec<CheckRecord>,
    pub summary: Value,
}

impl SuiteReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.pass).count()
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.residual).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "suite": self.suite,
            "pass": self.pass(),
            "params": self.params,
            "checks": self.checks.len(),
            "failures": self.failures(),
            "maxResidual": json_f64(self.max_residual()),
            "summary": self.summary,
            "results": self.checks.iter().map(CheckRecord::to_json).collect::<Vec<_>>(),
        })
    }
}

/// A group of checks run together, with the parameters it actually used.
pub struct Group {
    pub params: Value,
    pub checks: Vec<CheckRecord>,
    pub summary: Value,
}

impl Group {
    fn into_report(self, suite: &str) -> SuiteReport {
        SuiteReport { suite: suite.to_string(), params: self.params, checks: self.checks, summary: self.summary }
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.pass).count()
    }
}

fn merge(groups: Vec<(&str, Group)>) -> Group {
    let mut params = serde_json::Map::new();
    let mut summary = serde_json::Map::new();
    let mut checks = Vec::new();
    for (name, g) in groups {
        params.insert(name.to_string(), g.params);
        summary.insert(name.to_string(), g.summary);
        checks.extend(g.checks.into_iter().map(|mut c| {
            c.name = format!("{name}/{}", c.name);
            c
        }));
    }
    Group { params: Value::Object(params), checks, summary: Value::Object(summary) }
}

fn matrix_check(name: String, got: &SeriesMatrix<Rational>, want: &SeriesMatrix<Rational>) -> CheckRecord {
    let ok = got.agrees_with(want);
    let floor = got.prec().max(want.prec());
    CheckRecord::new(name, ok, got.max_abs_diff(want), json!({"comparedDownTo": floor}))
}

fn error_check(name: String, e: Error) -> CheckRecord {
    CheckRecord::new(name, false, f64::INFINITY, json!({"error": e.to_string()}))
}

/// Runs `f` for every trial in parallel and concatenates the records in trial order.
fn per_trial<F>(trials: usize, f: F) -> Vec<CheckRecord>
where
    F: Fn(u64) -> Result<Vec<CheckRecord>> + Sync,
{
    let parts: Vec<Vec<CheckRecord>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| f(t).unwrap_or_else(|e| vec![error_check(format!("trial {t}"), e)]))
        .collect();
    parts.into_iter().flatten().collect()
}

/// Brute-force path sums against matrix-power coefficients for A, W, V and Rₙ.
pub fn oracle_paths(sp: &SuiteParams) -> Group {
    let trials = sp.trials.unwrap_or(50);
    let max_len = sp.max_len.unwrap_or(7);
    let max_idx = sp.max_idx.unwrap_or(4);
    let width = max_len + 1;
    let checks = per_trial(trials, |t| {
        let mut rng = rng_for(sp.seed, t);
        let (p, q) = random_params(&mut rng, 3);
        let spec = random_spec(&mut rng, p, q);
        let n = rng.gen_range(max_idx + 1..=max_idx + 4);
        let rn = format!("rn:{n}");
        let families: [(&str, PathConstraint, bool); 4] = [
            ("a", PathConstraint::NonNegative, false),
            ("w", PathConstraint::Free, false),
            ("v", PathConstraint::BelowMinusOne, true),
            (rn.as_str(), PathConstraint::band(n)?, false),
        ];
        let mut out = Vec::new();
        for (family, c, negative) in families {
            let mut compared = 0;
            let mut fallbacks = 0;
            let mut mismatches = Vec::new();
            let targets = if negative { (-max_idx - 1, -1) } else { (0, max_idx) };
            for a in targets.0..=targets.1 {
                let brute = match weight_polynomial_table_scaled(max_len, a, targets, c, &spec)? {
                    Some(t) => t,
                    None => {
                        fallbacks += 1;
                        weight_polynomial_table(max_len, a, targets, c, &spec)?
                    }
                };
                for b in targets.0..=targets.1 {
                    let s = series_by_powers(family, a, b, width, &spec)?;
                    for (len, row) in brute.iter().enumerate() {
                        compared += 1;
                        if row[(b - targets.0) as usize] != s.coefficient(-(len as i64) - 1)? {
                            mismatches.push(json!([a, b, len]));
                        }
                    }
                }
            }
            out.push(CheckRecord::new(
                format!("trial {t} p={p} q={q} family={family}"),
                mismatches.is_empty(),
                mismatches.len() as f64,
                json!({"compared": compared, "rationalFallbacks": fallbacks, "mismatches": mismatches}),
            ));
        }
        Ok(out)
    });
    Group {
        params: json!({"trials": trials, "maxLen": max_len, "maxIdx": max_idx, "seed": sp.seed}),
        summary: json!({"comparisons": checks.iter().map(|c| c.detail["compared"].as_i64().unwrap_or(0)).sum::<i64>()}),
        checks,
    }
}

/// Residuals of the one-sided relations and both linear recurrences.
pub fn relations_group(sp: &SuiteParams) -> Group {
    let trials = sp.trials.unwrap_or(20);
    let width = sp.width.unwrap_or(10);
    let max_idx = sp.max_idx.unwrap_or(3);
    let checks = per_trial(trials, |t| {
        let mut rng = rng_for(sp.seed, t);
        let (p, q) = random_params(&mut rng, 3);
        let spec = random_spec(&mut rng, p, q);
        let rep = relation_residuals(&spec, width, max_idx)?;
        let relations: Vec<Value> = rep
            .checks
            .iter()
            .filter(|c| !c.zero)
            .map(|c| json!({"relation": c.relation, "i": c.i, "j": c.j, "residual": json_f64(c.residual)}))
            .collect();
        Ok(vec![CheckRecord::new(
            format!("trial {t} p={p} q={q}"),
            rep.all_zero(),
            rep.max_residual(),
            json!({"identities": rep.checks.len(), "nonzero": relations}),
        )])
    });
    Group {
        params: json!({"trials": trials, "width": width, "maxIdx": max_idx, "seed": sp.seed}),
        summary: json!({}),
        checks,
    }
}

/// T∘T⁻¹ and T⁻¹∘T on random matrices of every shape up to 3×3.
pub fn t_roundtrip(sp: &SuiteParams) -> Group {
    let trials = sp.trials.unwrap_or(100);
    let width = sp.width.unwrap_or(8);
    let checks = per_trial(trials, |t| {
        let mut rng = rng_for(sp.seed, t);
        let (q, p) = ((t % 3 + 1) as usize, ((t / 3) % 3 + 1) as usize);
        let a = random_series_matrix(&mut rng, q, p, (0, 0), -1, -1, width);
        let b = random_series_matrix(&mut rng, q, p, (q - 1, p - 1), 1, 0, width);
        let a_back = transform_t_inv(&transform_t(&a, None)?, None)?;
        let b_back = transform_t(&transform_t_inv(&b, None)?, None)?;
        Ok(vec![
            matrix_check(format!("trial {t} {q}x{p} Tinv(T(A))"), &a_back, &a),
            matrix_check(format!("trial {t} {q}x{p} T(Tinv(B))"), &b_back, &b),
        ])
    });
    Group { params: json!({"trials": trials, "width": width, "seed": sp.seed}), summary: json!({}), checks }
}

/// First-step identity, exact-tail alpha fractions and the zero-tail prefix property.
pub fn alpha_group(sp: &SuiteParams) -> Group {
    let trials = sp.trials.unwrap_or(10);
    let width = sp.width.unwrap_or(8);
    let levels = sp.levels.unwrap_or(5);
    let checks = per_trial(trials, |t| {
        let mut rng = rng_for(sp.seed, t);
        let (p, q) = random_params(&mut rng, 3);
        let ctx = CfContext::new(random_spec(&mut rng, p, q), width);
        let f = cf_target("alpha", &ctx)?;
        let flavors = crate::mcf::flavor_registry::<Rational>();
        let alpha = flavors.get("alpha")?;
        let l0 = alpha.level(0, &ctx)?;
        let f1 = alpha.exact_tail(1, &ctx)?;
        let rhs = l0.lin.mat_add(&l0.left.mat_mul(&f1)?.mat_mul(&l0.right)?)?;
        let mut out = vec![matrix_check(format!("trial {t} p={p} q={q} T(F)=first step"), &transform_t(&f, None)?, &rhs)];
        for k in 0..=levels {
            let got = run_cf("alpha", k, Tail::Exact, &ctx)?;
            out.push(matrix_check(format!("trial {t} p={p} q={q} alpha k={k} exact tail"), &got, &f));
        }
        for k in 1..=levels {
            let got = run_cf("alpha", k, Tail::Zero, &ctx)?;
            let mut short = Vec::new();
            for i in 0..q {
                for j in 0..p {
                    let kk = k as i64;
                    let depth = ((kk - i + q - 1) / q + (kk - j + p - 1) / p).min(width as i64);
                    let (x, y) = (got.get(i as usize, j as usize), f.get(i as usize, j as usize));
                    for e in 1..=depth {
                        if x.coefficient(-e)? != y.coefficient(-e)? {
                            short.push(json!([i, j, e]));
                            break;
                        }
                    }
                }
            }
            out.push(CheckRecord::new(
                format!("trial {t} p={p} q={q} alpha k={k} zero-tail prefix"),
                short.is_empty(),
                short.len() as f64,
                json!({"mismatches": short}),
            ));
        }
        Ok(out)
    });
    Group {
        params: json!({"trials": trials, "width": width, "levels": levels, "seed": sp.seed}),
        summary: json!({}),
        checks,
    }
}

/// ζ = W on the q×p corner.
pub fn zeta_group(sp: &SuiteParams) -> Group {
    let trials = sp.trials.unwrap_or(10);
    let width = sp.width.unwrap_or(10);
    let checks = per_trial(trials, |t| {
        let mut rng = rng_for(sp.seed, t);
        let (p, q) = random_params(&mut rng, 3);
        let spec = random_spec(&mut rng, p, q);
        let zeta = corner_matrix(&spec, "zeta", width)?;
        let w = corner_matrix(&spec, "w", width)?;
        let m = p.min(q) + 1;
        let zt = series_table(&spec, "zeta", m, m, width)?;
        let wt = series_table(&spec, "w", m, m, width)?;
        let mut bad = Vec::new();
        for i in 0..=m {
            for j in 0..=m {
                if !zt[&(i, j)].agrees_with(&wt[&(i, j)]) {
                    bad.push(json!([i, j]));
                }
            }
        }
        Ok(vec![
            matrix_check(format!("trial {t} p={p} q={q} zeta=W corner"), &zeta, &w),
            CheckRecord::new(
                format!("trial {t} p={p} q={q} zeta=W on 0..={m}"),
                bad.is_empty(),
                bad.len() as f64,
                json!({"mismatches": bad}),
            ),
        ])
    });
    Group { params: json!({"trials": trials, "width": width, "seed": sp.seed}), summary: json!({}), checks }
}

fn flavor_group(sp: &SuiteParams, flavor: &'static str) -> Group {
    let trials = sp.trials.unwrap_or(10);
    let width = sp.width.unwrap_or(8);
    let levels = sp.levels.unwrap_or(4);
    let checks = per_trial(trials, |t| {
        let mut rng = rng_for(sp.seed, t);
        let (p, q) = random_params(&mut rng, 3);
        let ctx = CfContext::new(random_spec(&mut rng, p, q), width);
        let target = cf_target(flavor, &ctx)?;
        (0..=levels)
            .map(|k| {
                let got = run_cf(flavor, k, Tail::Exact, &ctx)?;
                Ok(matrix_check(format!("trial {t} p={p} q={q} {flavor} k={k} exact tail"), &got, &target))
            })
            .collect()
    });
    Group {
        params: json!({"trials": trials, "width": width, "levels": levels, "seed": sp.seed}),
        summary: json!({}),
        checks,
    }
}

/// Beta levels over the exact K tail reproduce the two-sided corner G.
pub fn beta_group(sp: &SuiteParams) -> Group {
    flavor_group(sp, "beta")
}

/// Nu levels over the exact tail reproduce the V matrix.
pub fn nu_group(sp: &SuiteParams) -> Group {
    flavor_group(sp, "nu")
}

/// Scalar double continued fraction against W₀₀.
pub fn double_cf_group(sp: &SuiteParams) -> Group {
    let trials = sp.trials.unwrap_or(10);
    let max_depth = sp.depth.unwrap_or(10);
    let checks = per_trial(trials, |t| {
        let mut rng = rng_for(sp.seed, t);
        let spec = random_spec(&mut rng, 1, 1);
        let width = 2 * max_depth + 2;
        let w00 = series_by_powers("w", 0, 0, width, &spec)?;
        (1..=max_depth)
            .map(|d| {
                let s = scalar_double_cf(&spec, d, d, width)?;
                let matched = crate::pade::leading_agreement(&s, &w00, width)?;
                Ok(CheckRecord::new(
                    format!("trial {t} depth={d}"),
                    matched >= d as i64,
                    0.0_f64.max(d as f64 - matched as f64),
                    json!({"matchedCoefficients": matched}),
                ))
            })
            .collect()
    });
    Group { params: json!({"trials": trials, "maxDepth": max_depth, "seed": sp.seed}), summary: json!({}), checks }
}

/// Contact order of truncation resolvents, every n ≤ n_max and every cell.
pub fn contact_group(sp: &SuiteParams) -> Group {
    let trials = sp.trials.unwrap_or(20);
    let n_max = sp.n_max.unwrap_or(8);
    let parts: Vec<Result<(Vec<CheckRecord>, i64, usize, usize)>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_for(sp.seed, t);
            let (p, q) = random_params(&mut rng, 3);
            let spec = random_spec(&mut rng, p, q);
            let mut out = Vec::new();
            let (mut min_slack, mut strict, mut cells) = (i64::MAX, 0, 0);
            let mut violations = Vec::new();
            for n in 1..=n_max {
                let reps = contact_all(&spec, n, probe_width(n, p, q))?;
                for r in &reps {
                    min_slack = min_slack.min(r.slack());
                    strict += r.strict_at_next as usize;
                    cells += 1;
                    if r.slack() < 0 {
                        violations.push(json!({"n": r.n, "i": r.i, "j": r.j, "L": r.predicted_l, "observed": r.observed_match}));
                    }
                }
            }
            out.push(CheckRecord::new(
                format!("trial {t} p={p} q={q}"),
                violations.is_empty(),
                violations.len() as f64,
                json!({"minSlack": min_slack, "cells": cells, "strictAtNext": strict, "violations": violations}),
            ));
            Ok((out, min_slack, strict, cells))
        })
        .collect();
    let (mut checks, mut min_slack, mut strict, mut cells) = (Vec::new(), i64::MAX, 0, 0);
    for (t, part) in parts.into_iter().enumerate() {
        match part {
            Ok((c, s, st, ce)) => {
                checks.extend(c);
                min_slack = min_slack.min(s);
                strict += st;
                cells += ce;
            }
            Err(e) => checks.push(error_check(format!("trial {t}"), e)),
        }
    }
    let probe = genericity_probe(sp.seed, trials, n_max);
    Group {
        params: json!({"trials": trials, "nMax": n_max, "seed": sp.seed}),
        summary: json!({"minSlack": min_slack, "cells": cells, "strictAtNext": strict, "genericityProbe": probe}),
        checks,
    }
}

/// Rho levels over diag(1/z) give Rₙ exactly, for every n ≤ n_max.
pub fn rho_group(sp: &SuiteParams) -> Group {
    let trials = sp.trials.unwrap_or(20);
    let n_max = sp.n_max.unwrap_or(8);
    let width = sp.width.unwrap_or(12);
    let checks = per_trial(trials, |t| {
        let mut rng = rng_for(sp.seed, t);
        let (p, q) = random_params(&mut rng, 3);
        let spec = random_spec(&mut rng, p, q);
        (1..=n_max)
            .map(|n| {
                let ctx = CfContext::new(spec.clone(), width).with_n(n);
                let got = run_cf("rho", n as usize, Tail::DiagOneOverZ, &ctx)?;
                Ok(matrix_check(format!("trial {t} p={p} q={q} n={n}"), &got, &cf_target("rho", &ctx)?))
            })
            .collect()
    });
    Group {
        params: json!({"trials": trials, "nMax": n_max, "width": width, "seed": sp.seed}),
        summary: json!({}),
        checks,
    }
}

/// Random ensemble with exact rational moments on every diagonal.
pub fn random_rational_ensemble(rng: &mut rand_chacha::ChaCha8Rng, p: i64, q: i64) -> Result<EnsembleSpec> {
    let params = crate::band::BandParameters::new(p, q)?;
    let mut diagonals = std::collections::BTreeMap::new();
    for k in params.diagonals() {
        let d = match rng.gen_range(0..4) {
            0 => Distribution::PointMass(ratio(rng.gen_range(-3..=3), rng.gen_range(1..=2))),
            1 => Distribution::Rademacher,
            2 => {
                let a = rng.gen_range(-2..=1);
                Distribution::uniform(ratio(a, 1), ratio(a + rng.gen_range(1..=2), 1))?
            }
            _ => {
                let w = rng.gen_range(1..=3);
                Distribution::discrete(
                    vec![ratio(rng.gen_range(-2..=0), 1), ratio(rng.gen_range(1..=3), 2)],
                    vec![ratio(w, 4), ratio(4 - w, 4)],
                )?
            }
        };
        diagonals.insert(k, d);
    }
    EnsembleSpec::new(params, diagonals)
}

/// Middle diagonal entries of E[Hₙ^ℓ] equal E[W_{[ℓ,0,0]}] exactly.
pub fn middle_identity_group(sp: &SuiteParams) -> Group {
    let trials = sp.trials.unwrap_or(10);
    let ell_max = sp.ell_max.unwrap_or(4);
    let checks = per_trial(trials, |t| {
        let mut rng = rng_for(sp.seed, t);
        let (p, q) = random_params(&mut rng, 2);
        let ens = random_rational_ensemble(&mut rng, p, q)?;
        (0..=ell_max)
            .map(|ell| {
                let big_n = middle_margin(p, q, ell);
                let n = 2 * big_n + 1 + rng.gen_range(0..=2);
                let limit = expected_weight_polynomial(&ens, ell)?;
                let mut bad = Vec::new();
                for i in big_n..=n - 1 - big_n {
                    let d = exact_expected_diagonal(&ens, n, ell, i)?;
                    if d != limit {
                        bad.push(json!({"i": i, "value": rational_text(&d)}));
                    }
                }
                Ok(CheckRecord::new(
                    format!("trial {t} p={p} q={q} ell={ell} n={n}"),
                    bad.is_empty(),
                    bad.len() as f64,
                    json!({"N": big_n, "limit": rational_text(&limit), "mismatches": bad}),
                ))
            })
            .collect()
    });
    Group { params: json!({"trials": trials, "ellMax": ell_max, "seed": sp.seed}), summary: json!({}), checks }
}

/// Monte Carlo trace moments lie within 5 standard errors of the exact finite-n expectation.
pub fn monte_carlo_group(sp: &SuiteParams) -> Group {
    let ensembles = 4;
    let ell_max = sp.ell_max.unwrap_or(4);
    let trials = sp.trials.unwrap_or(400);
    let n = sp.n_max.unwrap_or(8);
    let mut checks = Vec::new();
    for e in 0..ensembles as u64 {
        let mut rng = rng_for(sp.seed ^ 0x5eed, e);
        let (p, q) = random_params(&mut rng, 2);
        let mut run = || -> Result<Vec<CheckRecord>> {
            let ens = random_rational_ensemble(&mut rng, p, q)?;
            let est = sample_trace_moments(&ens, n, ell_max, trials, sp.seed.wrapping_add(e))?;
            (0..=ell_max)
                .map(|ell| {
                    let exact = exact_expected_trace(&ens, n, ell)?;
                    let x: f64 = num_traits::ToPrimitive::to_f64(&exact).unwrap_or(f64::NAN);
                    let s = est[ell];
                    let z = if s.stderr > 0.0 { (s.mean - x).abs() / s.stderr } else { (s.mean - x).abs() * 1e12 };
                    Ok(CheckRecord::new(
                        format!("ensemble {e} p={p} q={q} ell={ell} n={n}"),
                        z <= 5.0,
                        z,
                        json!({"mean": json_f64(s.mean), "stderr": json_f64(s.stderr), "exact": rational_text(&exact)}),
                    ))
                })
                .collect()
        };
        match run() {
            Ok(c) => checks.extend(c),
            Err(err) => checks.push(error_check(format!("ensemble {e}"), err)),
        }
    }
    Group {
        params: json!({"ensembles": ensembles, "trials": trials, "n": n, "ellMax": ell_max, "seed": sp.seed}),
        summary: json!({}),
        checks,
    }
}

/// Outcome of the moment-limit experiment on the uniform(0,1) tridiagonal ensemble.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitLadder {
    pub sizes: Vec<i64>,
    pub means: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub limit: Rational,
    pub z_last: f64,
    pub errors_decrease: bool,
    /// Least-squares slope of log|error| against log n.
    pub slope: f64,
}

pub fn limit_ladder(sp: &SuiteParams) -> Result<LimitLadder> {
    let sizes = sp.sizes.clone().unwrap_or_else(|| vec![100, 200, 400]);
    let trials = sp.trials.unwrap_or(200);
    let ell = 2;
    let ens = EnsembleSpec::iid(1, 1, Distribution::uniform(ratio(0, 1), ratio(1, 1))?)?;
    let limit = expected_weight_polynomial(&ens, ell)?;
    let lf = num_traits::ToPrimitive::to_f64(&limit).unwrap_or(f64::NAN);
    let mut means = Vec::new();
    let mut stderrs = Vec::new();
    for &n in &sizes {
        let est = sample_trace_moments(&ens, n, ell, trials, sp.seed)?;
        means.push(est[ell].mean);
        stderrs.push(est[ell].stderr);
    }
    let errs: Vec<f64> = means.iter().map(|m| (m - lf).abs()).collect();
    let errors_decrease = errs.windows(2).all(|w| w[1] < w[0]);
    let z_last = errs.last().copied().unwrap_or(f64::NAN) / stderrs.last().copied().unwrap_or(f64::NAN);
    let xs: Vec<f64> = sizes.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.max(f64::MIN_POSITIVE).ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / xs.len() as f64, ys.iter().sum::<f64>() / ys.len() as f64);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(LimitLadder { sizes, means, stderrs, limit, z_last, errors_decrease, slope: sxy / sxx })
}

pub fn limit_group(sp: &SuiteParams) -> Group {
    let params = json!({
        "sizes": sp.sizes.clone().unwrap_or_else(|| vec![100, 200, 400]),
        "trials": sp.trials.unwrap_or(200),
        "ell": 2,
        "seed": sp.seed,
    });
    match limit_ladder(sp) {
        Ok(l) => {
            let detail = json!({
                "means": l.means.iter().map(|m| json_f64(*m)).collect::<Vec<_>>(),
                "stderrs": l.stderrs.iter().map(|m| json_f64(*m)).collect::<Vec<_>>(),
                "limitExact": rational_text(&l.limit),
            });
            Group {
                params,
                summary: json!({"slope": json_f64(l.slope)}),
                checks: vec![
                    CheckRecord::new("largest size within 5 standard errors", l.z_last <= 5.0, l.z_last, detail.clone()),
                    CheckRecord::new("error decreases along the ladder", l.errors_decrease, 0.0, detail),
                ],
            }
        }
        Err(e) => Group { params, summary: json!({}), checks: vec![error_check("ladder".into(), e)] },
    }
}

pub trait VerifySuite: Send + Sync {
    fn describe(&self) -> &'static str;
    fn run(&self, sp: &SuiteParams) -> Group;
}

struct Simple(&'static str, fn(&SuiteParams) -> Group);

impl VerifySuite for Simple {
    fn describe(&self) -> &'static str {
        self.0
    }
    fn run(&self, sp: &SuiteParams) -> Group {
        (self.1)(sp)
    }
}

struct Combined(&'static str, Vec<(&'static str, fn(&SuiteParams) -> Group)>);

impl VerifySuite for Combined {
    fn describe(&self) -> &'static str {
        self.0
    }
    fn run(&self, sp: &SuiteParams) -> Group {
        merge(self.1.iter().map(|(n, f)| (*n, f(sp))).collect())
    }
}

pub fn suite_registry() -> Registry<dyn VerifySuite> {
    let r: Registry<dyn VerifySuite> = Registry::new("verify suite");
    r.with("theorem1", Box::new(Simple("one-sided relations and linear recurrences", relations_group)))
        .with("theorem2", Box::new(Simple("path sums equal matrix-power coefficients", oracle_paths)))
        .with("theorem51", Box::new(Simple("K resolvent equals the two-sided corner", zeta_group)))
        .with(
            "theorem62",
            Box::new(Combined(
                "T transform round trip and alpha continued fractions",
                vec![("roundtrip", t_roundtrip), ("alpha", alpha_group)],
            )),
        )
        .with(
            "theorem64",
            Box::new(Combined(
                "beta continued fractions and the scalar double fraction",
                vec![("beta", beta_group), ("scalardcf", double_cf_group)],
            )),
        )
        .with("prop65", Box::new(Simple("nu continued fractions give V", nu_group)))
        .with("theorem73", Box::new(Simple("contact order of truncation resolvents", contact_group)))
        .with("prop74", Box::new(Simple("finite rho fraction equals the truncation resolvent", rho_group)))
        .with(
            "prop75",
            Box::new(Combined(
                "middle expected diagonals and Monte Carlo consistency",
                vec![("middle", middle_identity_group), ("montecarlo", monte_carlo_group)],
            )),
        )
        .with("theorem81", Box::new(Simple("spectral moment limit", limit_group)))
}

pub fn run_verify(name: &str, sp: &SuiteParams) -> Result<SuiteReport> {
    let reg = suite_registry();
    let suite = reg.get(name).map_err(|_| Error::UnknownSuite(name.to_string()))?;
    Ok(suite.run(sp).into_report(name))
}

/// Times a closure in seconds.
pub fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

/// Share of wide-coefficient specs whose (0,0) contact is exactly L+1; reported only.
pub fn genericity_probe(seed: u64, trials: usize, n_max: i64) -> Value {
    let outcomes: Vec<Result<bool>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_for(seed ^ 0x9e37, t);
            let (p, q) = random_params(&mut rng, 3);
            let n = rng.gen_range(1..=n_max.max(1));
            let spec: BandSpec<Rational> = random_spec_with(&mut rng, p, q, 1000, 997);
            let r = crate::pade::contact_order(&spec, n, 0, 0, probe_width(n, p, q))?;
            Ok(r.strict_at_next && r.slack() == 0)
        })
        .collect();
    let strict = outcomes.iter().filter(|o| matches!(o, Ok(true))).count();
    json!({"trials": trials, "strictAtL": strict, "majority": 2 * strict > trials})
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SuiteParams {
        SuiteParams { trials: Some(2), ..SuiteParams::default() }
    }

    #[test]
    fn unknown_suite() {
        assert!(matches!(run_verify("unknown", &small()), Err(Error::UnknownSuite(_))));
    }

    #[test]
    fn light_suites_pass() {
        for name in ["theorem1", "theorem51", "theorem62", "theorem64", "prop65", "prop74"] {
            let mut sp = small();
            sp.width = Some(6);
            sp.levels = Some(2);
            sp.n_max = Some(4);
            sp.depth = Some(4);
            let r = run_verify(name, &sp).unwrap();
            assert!(r.pass(), "{name}: {}", r.to_json());
        }
    }

    #[test]
    fn oracle_small() {
        let sp = SuiteParams { trials: Some(2), max_len: Some(4), max_idx: Some(2), ..SuiteParams::default() };
        let r = run_verify("theorem2", &sp).unwrap();
        assert!(r.pass());
        assert_eq!(r.max_residual(), 0.0);
    }

    #[test]
    fn reports_are_reproducible() {
        let sp = SuiteParams { trials: Some(2), n_max: Some(3), ..SuiteParams::default() };
        let a = run_verify("theorem73", &sp).unwrap().to_json().to_string();
        let b = run_verify("theorem73", &sp).unwrap().to_json().to_string();
        assert_eq!(a, b);
    }
}
