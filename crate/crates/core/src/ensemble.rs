//! Random banded matrices with i.i.d. diagonals: exact expected moments and
//! Monte Carlo trace moments.

use std::collections::BTreeMap;

use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::band::BandParameters;
use crate::error::{Error, Result};
use crate::paths::{label_multiset, visit_paths, LatticePath, PathConstraint, DEFAULT_BUDGET};
use crate::scalar::{json_f64, ratio, rational_text, Rational};
use crate::testgen::rng_for;

#[derive(Clone, Debug, PartialEq)]
pub enum Distribution {
    PointMass(Rational),
    Rademacher,
    Uniform { a: Rational, b: Rational },
    Discrete { values: Vec<Rational>, probs: Vec<Rational> },
}

fn rpow(x: &Rational, r: usize) -> Rational {
    num_traits::pow(x.clone(), r)
}

fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

impl Distribution {
    pub fn uniform(a: Rational, b: Rational) -> Result<Self> {
        if a >= b {
            return Err(Error::Invalid(format!("uniform needs a < b (got {a}, {b})")));
        }
        Ok(Distribution::Uniform { a, b })
    }

    pub fn discrete(values: Vec<Rational>, probs: Vec<Rational>) -> Result<Self> {
        if values.is_empty() || values.len() != probs.len() {
            return Err(Error::Invalid("discrete law needs matching nonempty values and probs".into()));
        }
        if probs.iter().any(|p| p.is_negative()) {
            return Err(Error::Invalid("negative probability".into()));
        }
        let total: Rational = probs.iter().cloned().sum();
        if !total.is_one() {
            return Err(Error::Invalid(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Distribution::Discrete { values, probs })
    }

    /// Exact r-th moment.
    pub fn moment(&self, r: usize) -> Rational {
        match self {
            Distribution::PointMass(c) => rpow(c, r),
            Distribution::Rademacher => {
                if r % 2 == 0 { Rational::one() } else { Rational::zero() }
            }
            Distribution::Uniform { a, b } => {
                (rpow(b, r + 1) - rpow(a, r + 1)) / (ratio(r as i64 + 1, 1) * (b - a))
            }
            Distribution::Discrete { values, probs } => {
                values.iter().zip(probs).map(|(v, p)| rpow(v, r) * p).sum()
            }
        }
    }

    /// Inverse-CDF draw from a uniform u in [0, 1).
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            Distribution::PointMass(c) => to_f64(c),
            Distribution::Rademacher => {
                if u < 0.5 { -1.0 } else { 1.0 }
            }
            Distribution::Uniform { a, b } => {
                let (a, b) = (to_f64(a), to_f64(b));
                a + (b - a) * u
            }
            Distribution::Discrete { values, probs } => {
                let mut cum = Rational::zero();
                for (v, p) in values.iter().zip(probs) {
                    cum += p;
                    if u < to_f64(&cum) {
                        return to_f64(v);
                    }
                }
                to_f64(values.last().expect("nonempty"))
            }
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| Error::Invalid(format!("distribution must be an object, got {v}")))?;
        let field = |name: &str| -> Result<Rational> {
            <Rational as crate::scalar::Scalar>::from_json(obj.get(name).ok_or_else(|| Error::Invalid(format!("missing field {name:?}")))?)
        };
        let list = |names: &[&str]| -> Result<Vec<Rational>> {
            let arr = names
                .iter()
                .find_map(|n| obj.get(*n))
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Invalid(format!("missing list {:?}", names[0])))?;
            arr.iter().map(<Rational as crate::scalar::Scalar>::from_json).collect()
        };
        match obj.get("kind").and_then(Value::as_str) {
            Some("pointMass") => Ok(Distribution::PointMass(field("c")?)),
            Some("rademacher") => Ok(Distribution::Rademacher),
            Some("uniform") => Self::uniform(field("a")?, field("b")?),
            Some("discrete") => Self::discrete(list(&["values"])?, list(&["probs", "probabilities"])?),
            other => Err(Error::UnknownName(format!("distribution kind {other:?}"))),
        }
    }

    pub fn to_json(&self) -> Value {
        let txt = |r: &Rational| Value::String(rational_text(r));
        match self {
            Distribution::PointMass(c) => json!({"kind": "pointMass", "c": txt(c)}),
            Distribution::Rademacher => json!({"kind": "rademacher"}),
            Distribution::Uniform { a, b } => json!({"kind": "uniform", "a": txt(a), "b": txt(b)}),
            Distribution::Discrete { values, probs } => json!({
                "kind": "discrete",
                "values": values.iter().map(txt).collect::<Vec<_>>(),
                "probs": probs.iter().map(txt).collect::<Vec<_>>(),
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleSpec {
    pub params: BandParameters,
    pub diagonals: BTreeMap<i64, Distribution>,
}

impl EnsembleSpec {
    pub fn new(params: BandParameters, diagonals: BTreeMap<i64, Distribution>) -> Result<Self> {
        let want: Vec<i64> = params.diagonals().collect();
        let got: Vec<i64> = diagonals.keys().copied().collect();
        if want != got {
            return Err(Error::ShapeMismatch(format!(
                "need one distribution per diagonal {want:?}, got {got:?}"
            )));
        }
        Ok(EnsembleSpec { params, diagonals })
    }

    /// The same law on every diagonal.
    pub fn iid(p: i64, q: i64, d: Distribution) -> Result<Self> {
        let params = BandParameters::new(p, q)?;
        let diagonals = params.diagonals().map(|k| (k, d.clone())).collect();
        Self::new(params, diagonals)
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let int = |name: &str| {
            v.get(name)
                .and_then(Value::as_i64)
                .ok_or_else(|| Error::Invalid(format!("ensemble needs integer {name:?}")))
        };
        let params = BandParameters::new(int("p")?, int("q")?)?;
        let diags = v
            .get("diagonals")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::Invalid("ensemble needs a \"diagonals\" object".into()))?;
        let mut out = BTreeMap::new();
        for (key, d) in diags {
            let k: i64 = key.parse().map_err(|_| Error::Invalid(format!("bad diagonal key {key:?}")))?;
            out.insert(k, Distribution::from_json(d)?);
        }
        Self::new(params, out)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Invalid(format!("ensemble JSON: {e}")))?;
        Self::from_json(&v)
    }

    pub fn to_json(&self) -> Value {
        let mut d = Map::new();
        for (k, dist) in &self.diagonals {
            d.insert(k.to_string(), dist.to_json());
        }
        json!({"p": self.params.p, "q": self.params.q, "diagonals": d})
    }

    fn law(&self, k: i64) -> &Distribution {
        &self.diagonals[&k]
    }
}

fn expected_over_paths(ens: &EnsembleSpec, len: usize, i: i64, j: i64, c: PathConstraint) -> Result<Rational> {
    let mut total = Rational::zero();
    visit_paths(len, i, j, c, ens.params, DEFAULT_BUDGET, |h| {
        let path = LatticePath::new(h.to_vec());
        let mut w = Rational::one();
        for ((k, _), mult) in label_multiset(&path) {
            w *= ens.law(k).moment(mult);
        }
        total += w;
        Ok(())
    })?;
    Ok(total)
}

/// E[W_{[ℓ,0,0]}]: moment-substituted sum over unconstrained paths.
pub fn expected_weight_polynomial(ens: &EnsembleSpec, ell: usize) -> Result<Rational> {
    expected_over_paths(ens, ell, 0, 0, PathConstraint::Free)
}

/// E[(Hₙ^ℓ)_{i,i}] from the paths confined to 0..=n−1.
pub fn exact_expected_diagonal(ens: &EnsembleSpec, n: i64, ell: usize, i: i64) -> Result<Rational> {
    if i < 0 || i >= n {
        return Err(Error::IndexOutOfRange(format!("diagonal index {i} outside 0..{n}")));
    }
    expected_over_paths(ens, ell, i, i, PathConstraint::band(n)?)
}

/// E[(1/n) Tr Hₙ^ℓ].
pub fn exact_expected_trace(ens: &EnsembleSpec, n: i64, ell: usize) -> Result<Rational> {
    let mut t = Rational::zero();
    for i in 0..n {
        t += exact_expected_diagonal(ens, n, ell, i)?;
    }
    Ok(t / ratio(n, 1))
}

/// N = ⌊pqℓ/(p+q)⌋ + max(p,q) + 1; indices N..=n−1−N see no boundary.
pub fn middle_margin(p: i64, q: i64, ell: usize) -> i64 {
    p * q * ell as i64 / (p + q) + p.max(q) + 1
}

/// Coefficients of one draw of Hₙ, indexed [m·(p+q+1) + k + p]. Labels are drawn
/// m-major, k ascending, one uniform per label, so smaller sizes see a prefix.
pub fn draw_coefficients(ens: &EnsembleSpec, n: i64, seed: u64, trial: u64) -> Vec<f64> {
    let mut rng = rng_for(seed, trial);
    let mut out = Vec::with_capacity((n as usize) * ens.params.width());
    for _m in 0..n {
        for k in ens.params.diagonals() {
            let u: f64 = rng.gen();
            out.push(ens.law(k).quantile(u));
        }
    }
    out
}

/// (1/n) Tr Hₙ^ℓ for ℓ = 0..=ell_max by repeated band products on each basis vector.
pub fn trace_moments(coeffs: &[f64], params: BandParameters, n: i64, ell_max: usize) -> Vec<f64> {
    let (p, q) = (params.p, params.q);
    let w = params.width() as i64;
    let entry = |r: i64, c: i64| coeffs[(r.min(c) * w + (c - r) + p) as usize];
    let mut traces = vec![0.0; ell_max + 1];
    let mut v = Vec::new();
    let mut next = Vec::new();
    for col in 0..n {
        let (mut lo, mut hi) = (col, col);
        v.clear();
        v.push(1.0);
        traces[0] += 1.0;
        for t in traces.iter_mut().skip(1) {
            let (nlo, nhi) = ((lo - q).max(0), (hi + p).min(n - 1));
            next.clear();
            for r in nlo..=nhi {
                let mut s = 0.0;
                for c in (r - p).max(lo)..=(r + q).min(hi) {
                    s += entry(r, c) * v[(c - lo) as usize];
                }
                next.push(s);
            }
            std::mem::swap(&mut v, &mut next);
            lo = nlo;
            hi = nhi;
            *t += v[(col - lo) as usize];
        }
    }
    traces.iter().map(|t| t / n as f64).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SizeEstimate {
    pub n: i64,
    pub mean: f64,
    pub stderr: f64,
}

/// Per-ℓ means and standard errors of (1/n) Tr Hₙ^ℓ over `trials` draws.
pub fn sample_trace_moments(
    ens: &EnsembleSpec,
    n: i64,
    ell_max: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<SizeEstimate>> {
    if n < 1 || trials < 1 {
        return Err(Error::Invalid("need n ≥ 1 and trials ≥ 1".into()));
    }
    let per_trial: Vec<Vec<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| trace_moments(&draw_coefficients(ens, n, seed, t), ens.params, n, ell_max))
        .collect();
    let tn = trials as f64;
    Ok((0..=ell_max)
        .map(|l| {
            let mean = per_trial.iter().map(|x| x[l]).sum::<f64>() / tn;
            let stderr = if trials > 1 {
                let ss: f64 = per_trial.iter().map(|x| (x[l] - mean).powi(2)).sum();
                (ss / (tn - 1.0) / tn).sqrt()
            } else {
                0.0
            };
            SizeEstimate { n, mean, stderr }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentReport {
    pub ell: usize,
    pub sizes: Vec<i64>,
    pub estimates: Vec<SizeEstimate>,
    pub limit_exact: Rational,
}

impl MomentReport {
    pub fn limit(&self) -> f64 {
        to_f64(&self.limit_exact)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "ell": self.ell,
            "sizes": self.sizes,
            "estimates": self.estimates.iter().map(|e| json!({
                "n": e.n, "mean": json_f64(e.mean), "stderr": json_f64(e.stderr),
            })).collect::<Vec<_>>(),
            "limitExact": rational_text(&self.limit_exact),
            "limit": json_f64(self.limit()),
        })
    }
}

pub fn moment_reports(
    ens: &EnsembleSpec,
    sizes: &[i64],
    ell_max: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<MomentReport>> {
    let per_size = sizes
        .iter()
        .map(|&n| sample_trace_moments(ens, n, ell_max, trials, seed))
        .collect::<Result<Vec<_>>>()?;
    (0..=ell_max)
        .map(|l| {
            Ok(MomentReport {
                ell: l,
                sizes: sizes.to_vec(),
                estimates: per_size.iter().map(|s| s[l]).collect(),
                limit_exact: expected_weight_polynomial(ens, l)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u01() -> Distribution {
        Distribution::uniform(ratio(0, 1), ratio(1, 1)).unwrap()
    }

    #[test]
    fn moments() {
        assert_eq!(Distribution::Rademacher.moment(2), ratio(1, 1));
        assert_eq!(Distribution::Rademacher.moment(1), ratio(0, 1));
        assert_eq!(u01().moment(2), ratio(1, 3));
        assert_eq!(Distribution::PointMass(ratio(-2, 3)).moment(3), ratio(-8, 27));
        let d = Distribution::discrete(vec![ratio(-1, 1), ratio(2, 1)], vec![ratio(2, 3), ratio(1, 3)]).unwrap();
        assert_eq!(d.moment(1), ratio(0, 1));
        assert_eq!(d.moment(2), ratio(2, 1));
        assert!(Distribution::discrete(vec![ratio(1, 1)], vec![ratio(1, 2)]).is_err());
    }

    #[test]
    fn expected_weights() {
        let ens = EnsembleSpec::iid(1, 1, u01()).unwrap();
        assert_eq!(expected_weight_polynomial(&ens, 0).unwrap(), ratio(1, 1));
        assert_eq!(expected_weight_polynomial(&ens, 2).unwrap(), ratio(5, 6));
        assert_eq!(exact_expected_diagonal(&ens, 10, 2, 0).unwrap(), ratio(7, 12));
        assert_eq!(exact_expected_diagonal(&ens, 10, 1, 4).unwrap(), ratio(1, 2));
        let rad = EnsembleSpec::iid(1, 1, Distribution::Rademacher).unwrap();
        assert_eq!(expected_weight_polynomial(&rad, 2).unwrap(), ratio(1, 1));
        let n = 400;
        let exact = exact_expected_trace(&ens, n, 2).unwrap();
        assert_eq!(exact, ratio(5, 6) - ratio(1, 2 * n));
    }

    #[test]
    fn trace_matches_dense_product() {
        let ens = EnsembleSpec::iid(2, 1, u01()).unwrap();
        let n = 7;
        let c = draw_coefficients(&ens, n, 3, 1);
        let w = ens.params.width() as i64;
        let mut h = vec![vec![0.0; n as usize]; n as usize];
        for r in 0..n {
            for col in 0..n {
                let k = col - r;
                if (-2..=1).contains(&k) {
                    h[r as usize][col as usize] = c[(r.min(col) * w + k + 2) as usize];
                }
            }
        }
        let mut pw = h.clone();
        let tr = trace_moments(&c, ens.params, n, 4);
        for (l, t) in tr.iter().enumerate().skip(1) {
            let dense: f64 = (0..n as usize).map(|i| pw[i][i]).sum::<f64>() / n as f64;
            assert!((dense - t).abs() < 1e-12, "ℓ={l}");
            pw = (0..n as usize)
                .map(|i| (0..n as usize).map(|j| (0..n as usize).map(|m| pw[i][m] * h[m][j]).sum()).collect())
                .collect();
        }
        assert_eq!(tr[0], 1.0);
    }

    #[test]
    fn point_mass_has_no_variance() {
        let ens = EnsembleSpec::iid(1, 1, Distribution::PointMass(ratio(1, 2))).unwrap();
        let est = sample_trace_moments(&ens, 9, 3, 5, 0).unwrap();
        let exact = exact_expected_trace(&ens, 9, 3).unwrap();
        assert_eq!(est[3].stderr, 0.0);
        assert!((est[3].mean - to_f64(&exact)).abs() < 1e-12);
    }

    #[test]
    fn draws_nest_across_sizes() {
        let ens = EnsembleSpec::iid(1, 2, u01()).unwrap();
        let small = draw_coefficients(&ens, 5, 11, 2);
        let big = draw_coefficients(&ens, 9, 11, 2);
        assert_eq!(&big[..small.len()], &small[..]);
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"p":1,"q":1,"diagonals":{"0":{"kind":"uniform","a":0,"b":1},"1":{"kind":"rademacher"},"-1":{"kind":"rademacher"}}}"#;
        let ens = EnsembleSpec::parse(text).unwrap();
        assert_eq!(EnsembleSpec::from_json(&ens.to_json()).unwrap(), ens);
        assert!(EnsembleSpec::parse(r#"{"p":1,"q":1,"diagonals":{"0":{"kind":"rademacher"}}}"#).is_err());
    }
}
