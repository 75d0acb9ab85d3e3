//! Coefficient data of the banded matrices H, W, E, H^[k] and Hₙ.

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::scalar::{Complex, Rational, Ring, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BandParameters {
    pub p: i64,
    pub q: i64,
}

impl BandParameters {
    pub fn new(p: i64, q: i64) -> Result<Self> {
        if p < 1 || q < 1 {
            return Err(Error::Invalid(format!("band needs p, q ≥ 1 (got p={p}, q={q})")));
        }
        Ok(BandParameters { p, q })
    }

    /// Diagonal indices −p..=q.
    pub fn diagonals(&self) -> impl Iterator<Item = i64> {
        -self.p..=self.q
    }

    pub fn width(&self) -> usize {
        (self.p + self.q + 1) as usize
    }
}

/// Values of one diagonal sequence a^{(k)}_n over `lo..lo+len`, with an optional default.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientWindow<C> {
    pub k: i64,
    pub lo: i64,
    pub values: Vec<C>,
    pub default: Option<C>,
}

impl<C: Scalar> CoefficientWindow<C> {
    pub fn hi(&self) -> i64 {
        self.lo + self.values.len() as i64 - 1
    }

    pub fn covers(&self, n: i64) -> bool {
        self.default.is_some() || (self.lo..=self.hi()).contains(&n)
    }

    pub fn get(&self, n: i64) -> Result<C> {
        if (self.lo..=self.hi()).contains(&n) {
            return Ok(self.values[(n - self.lo) as usize].clone());
        }
        self.default.clone().ok_or(Error::WindowMiss { k: self.k, n })
    }

    pub fn get_ref(&self, n: i64) -> Result<&C> {
        if (self.lo..=self.hi()).contains(&n) {
            return Ok(&self.values[(n - self.lo) as usize]);
        }
        self.default.as_ref().ok_or(Error::WindowMiss { k: self.k, n })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BandSpec<C> {
    params: BandParameters,
    windows: Vec<CoefficientWindow<C>>,
}

impl<C: Scalar> BandSpec<C> {
    pub fn new(params: BandParameters, mut windows: Vec<CoefficientWindow<C>>) -> Result<Self> {
        windows.sort_by_key(|w| w.k);
        let ks: Vec<i64> = windows.iter().map(|w| w.k).collect();
        let want: Vec<i64> = params.diagonals().collect();
        if ks != want {
            return Err(Error::ShapeMismatch(format!(
                "need exactly one window per diagonal {:?}, got {:?}",
                want, ks
            )));
        }
        Ok(BandSpec { params, windows })
    }

    /// Spec whose windows cover `lo..=hi` on every diagonal, filled from `f(k, n)`.
    pub fn from_fn(p: i64, q: i64, lo: i64, hi: i64, mut f: impl FnMut(i64, i64) -> C) -> Result<Self> {
        let params = BandParameters::new(p, q)?;
        let windows = params
            .diagonals()
            .map(|k| CoefficientWindow {
                k,
                lo,
                values: (lo..=hi).map(|n| f(k, n)).collect(),
                default: None,
            })
            .collect();
        Self::new(params, windows)
    }

    /// Spec constant along every diagonal: a^{(k)}_n = f(k).
    pub fn constant(p: i64, q: i64, mut f: impl FnMut(i64) -> C) -> Result<Self> {
        let params = BandParameters::new(p, q)?;
        let windows = params
            .diagonals()
            .map(|k| CoefficientWindow { k, lo: 0, values: Vec::new(), default: Some(f(k)) })
            .collect();
        Self::new(params, windows)
    }

    pub fn params(&self) -> BandParameters {
        self.params
    }

    pub fn p(&self) -> i64 {
        self.params.p
    }

    pub fn q(&self) -> i64 {
        self.params.q
    }

    pub fn ring(&self) -> Ring {
        C::RING
    }

    pub fn windows(&self) -> &[CoefficientWindow<C>] {
        &self.windows
    }

    pub fn window(&self, k: i64) -> &CoefficientWindow<C> {
        &self.windows[(k + self.params.p) as usize]
    }

    /// a^{(k)}_n.
    pub fn a(&self, k: i64, n: i64) -> Result<C> {
        if k < -self.params.p || k > self.params.q {
            return Ok(C::zero());
        }
        self.window(k).get(n)
    }

    /// Two-sided entry w_{i,j} = a^{(j−i)}_{min(i,j)} inside the band.
    pub fn entry_w(&self, i: i64, j: i64) -> Result<C> {
        self.a(j - i, i.min(j))
    }

    /// One-sided entry h_{i,j}.
    pub fn entry_h(&self, i: i64, j: i64) -> Result<C> {
        if i < 0 || j < 0 {
            return Err(Error::IndexOutOfRange(format!("H entry ({i},{j})")));
        }
        self.entry_w(i, j)
    }

    /// Spec of H^[k]: new a_n = old a_{n+k}.
    pub fn shift(&self, k: i64) -> Self {
        let windows = self
            .windows
            .iter()
            .map(|w| CoefficientWindow { lo: w.lo - k, ..w.clone() })
            .collect();
        BandSpec { params: self.params, windows }
    }

    /// Spec of E: new a^{(m)}_n = old a^{(m)}_{−(n+|m|+1)}.
    pub fn reflect(&self) -> Self {
        let windows = self
            .windows
            .iter()
            .map(|w| {
                let mut values = w.values.clone();
                values.reverse();
                CoefficientWindow {
                    k: w.k,
                    lo: -w.hi() - w.k.abs() - 1,
                    values,
                    default: w.default.clone(),
                }
            })
            .collect();
        BandSpec { params: self.params, windows }
    }

    /// Dense principal n×n truncation of H.
    pub fn truncate_h(&self, n: usize) -> Result<Vec<Vec<C>>> {
        self.check_heights(0, n as i64 - 1)?;
        (0..n as i64)
            .map(|i| (0..n as i64).map(|j| self.entry_h(i, j)).collect())
            .collect()
    }

    /// Label indices of diagonal `k` used by steps between heights in [h_lo, h_hi].
    pub fn required_window(&self, k: i64, h_lo: i64, h_hi: i64) -> Option<(i64, i64)> {
        let hi = h_hi - k.abs();
        (hi >= h_lo).then_some((h_lo, hi))
    }

    /// Fails with `WindowMiss` unless every label reachable inside [h_lo, h_hi] is covered.
    pub fn check_heights(&self, h_lo: i64, h_hi: i64) -> Result<()> {
        for w in &self.windows {
            if w.default.is_some() {
                continue;
            }
            if let Some((lo, hi)) = self.required_window(w.k, h_lo, h_hi) {
                if lo < w.lo {
                    return Err(Error::WindowMiss { k: w.k, n: lo });
                }
                if hi > w.hi() {
                    return Err(Error::WindowMiss { k: w.k, n: hi });
                }
            }
        }
        Ok(())
    }

    /// Copy with a^{(k)}_n replaced; `n` must lie in the explicit window.
    pub fn with_coefficient(&self, k: i64, n: i64, value: C) -> Result<Self> {
        let mut out = self.clone();
        let p = self.params.p;
        let w = &mut out.windows[(k + p) as usize];
        if !(w.lo..=w.hi()).contains(&n) {
            return Err(Error::WindowMiss { k, n });
        }
        w.values[(n - w.lo) as usize] = value;
        Ok(out)
    }

    /// Same data with every coefficient mapped through `f`.
    pub fn map<D: Scalar>(&self, f: impl Fn(&C) -> D) -> BandSpec<D> {
        let windows = self
            .windows
            .iter()
            .map(|w| CoefficientWindow {
                k: w.k,
                lo: w.lo,
                values: w.values.iter().map(&f).collect(),
                default: w.default.as_ref().map(&f),
            })
            .collect();
        BandSpec { params: self.params, windows }
    }

    pub fn to_json(&self) -> Value {
        let mut diagonals = Map::new();
        for w in &self.windows {
            let mut entry = Map::new();
            entry.insert("lo".into(), json!(w.lo));
            entry.insert("values".into(), Value::Array(w.values.iter().map(|c| c.to_json()).collect()));
            if let Some(d) = &w.default {
                entry.insert("default".into(), d.to_json());
            }
            diagonals.insert(w.k.to_string(), Value::Object(entry));
        }
        json!({
            "p": self.params.p,
            "q": self.params.q,
            "ring": C::RING.name(),
            "diagonals": diagonals,
        })
    }

    fn from_json_body(p: i64, q: i64, diagonals: &Map<String, Value>) -> Result<Self> {
        let params = BandParameters::new(p, q)?;
        let mut windows = Vec::new();
        for (key, body) in diagonals {
            let k: i64 = key
                .parse()
                .map_err(|_| Error::Invalid(format!("diagonal key {key:?} is not an integer")))?;
            if k < -p || k > q {
                return Err(Error::ShapeMismatch(format!("diagonal {k} outside [-{p}, {q}]")));
            }
            let lo = body.get("lo").map_or(Some(0), Value::as_i64).ok_or_else(|| {
                Error::Invalid(format!("diagonal {k}: lo must be an integer"))
            })?;
            let values = match body.get("values") {
                None => Vec::new(),
                Some(Value::Array(vs)) => vs.iter().map(C::from_json).collect::<Result<Vec<_>>>()?,
                Some(_) => return Err(Error::Invalid(format!("diagonal {k}: values must be a list"))),
            };
            let default = match body.get("default") {
                None | Some(Value::Null) => None,
                Some(v) => Some(C::from_json(v)?),
            };
            windows.push(CoefficientWindow { k, lo, values, default });
        }
        Self::new(params, windows)
    }
}

/// A spec with its ring resolved at runtime.
#[derive(Clone, Debug, PartialEq)]
pub enum AnySpec {
    Rational(BandSpec<Rational>),
    Complex(BandSpec<Complex>),
}

impl AnySpec {
    pub fn ring(&self) -> Ring {
        match self {
            AnySpec::Rational(_) => Ring::Rational,
            AnySpec::Complex(_) => Ring::Complex,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            AnySpec::Rational(s) => s.to_json(),
            AnySpec::Complex(s) => s.to_json(),
        }
    }

    pub fn rational(self) -> Result<BandSpec<Rational>> {
        match self {
            AnySpec::Rational(s) => Ok(s),
            AnySpec::Complex(_) => Err(Error::ExactRingRequired),
        }
    }
}

/// Parses the JSON spec format.
pub fn parse_spec(text: &str) -> Result<AnySpec> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Invalid(format!("spec JSON: {e}")))?;
    spec_from_value(&v)
}

pub fn spec_from_value(v: &Value) -> Result<AnySpec> {
    let int = |name: &str| {
        v.get(name)
            .and_then(Value::as_i64)
            .ok_or_else(|| Error::Invalid(format!("spec needs integer field {name:?}")))
    };
    let (p, q) = (int("p")?, int("q")?);
    let diagonals = v
        .get("diagonals")
        .and_then(Value::as_object)
        .ok_or_else(|| Error::Invalid("spec needs a \"diagonals\" object".into()))?;
    match v.get("ring").and_then(Value::as_str).unwrap_or("rational") {
        "rational" => Ok(AnySpec::Rational(BandSpec::from_json_body(p, q, diagonals)?)),
        "complex" => Ok(AnySpec::Complex(BandSpec::from_json_body(p, q, diagonals)?)),
        other => Err(Error::RingMismatch(format!("unknown ring {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    /// a^{(k)}_n = 100·k + n, a distinct value per label.
    fn labelled(p: i64, q: i64) -> BandSpec<Rational> {
        BandSpec::from_fn(p, q, -20, 20, |k, n| ratio(100 * k + n, 1)).unwrap()
    }

    fn label(k: i64, n: i64) -> Rational {
        ratio(100 * k + n, 1)
    }

    #[test]
    fn entry_examples() {
        let s = labelled(4, 3);
        assert_eq!(s.entry_h(1, 0).unwrap(), label(-1, 0));
        assert_eq!(s.entry_h(0, 0).unwrap(), label(0, 0));
        assert_eq!(s.entry_h(0, 4).unwrap(), ratio(0, 1));
        assert_eq!(s.entry_w(-1, -1).unwrap(), label(0, -1));
        assert_eq!(s.entry_w(-1, 0).unwrap(), label(1, -1));
        assert_eq!(s.entry_w(5, -5).unwrap(), ratio(0, 1));
        assert!(s.entry_h(-1, 0).is_err());
    }

    #[test]
    fn window_miss_without_default() {
        let s = labelled(1, 1);
        assert_eq!(s.a(0, 21), Err(Error::WindowMiss { k: 0, n: 21 }));
        assert!(s.check_heights(0, 20).is_ok());
        assert!(s.check_heights(0, 21).is_err());
        assert!(s.check_heights(-21, 0).is_err());
    }

    #[test]
    fn shift_examples() {
        let s = labelled(1, 1);
        assert_eq!(s.shift(0), s);
        assert_eq!(s.shift(1).entry_h(0, 0).unwrap(), label(0, 1));
        assert_eq!(
            s.shift(1).shift(2).truncate_h(6).unwrap(),
            s.shift(3).truncate_h(6).unwrap()
        );
    }

    #[test]
    fn reflect_examples() {
        let s = labelled(2, 3);
        let e = s.reflect();
        assert_eq!(e.entry_h(0, 0).unwrap(), label(0, -1));
        assert_eq!(e.entry_h(0, 3).unwrap(), label(3, -4));
        for i in 0..6 {
            for j in 0..6 {
                let d = j - i;
                if (-2..=3).contains(&d) {
                    assert_eq!(e.entry_h(i, j).unwrap(), label(d, -(i.max(j) + 1)));
                }
            }
        }
        let s = BandSpec::from_fn(2, 3, -12, 11, |k, n| ratio(100 * k + n, 1)).unwrap();
        assert_eq!(s.reflect().reflect().truncate_h(8).unwrap(), s.truncate_h(8).unwrap());
    }

    #[test]
    fn truncation_examples() {
        let s = labelled(1, 1);
        assert_eq!(s.truncate_h(1).unwrap(), vec![vec![label(0, 0)]]);
        let ones = BandSpec::constant(1, 1, |_| ratio(1, 1)).unwrap();
        let t = ones.truncate_h(3).unwrap();
        for i in 0..3usize {
            for j in 0..3usize {
                let want = if i.abs_diff(j) <= 1 { 1 } else { 0 };
                assert_eq!(t[i][j], ratio(want, 1));
            }
        }
    }

    #[test]
    fn band_count() {
        let t = labelled(2, 1).truncate_h(8).unwrap();
        let nonzero_diagonals = (-7i64..=7)
            .filter(|d| {
                (0..8i64).any(|i| {
                    let j = i + d;
                    (0..8).contains(&j) && t[i as usize][j as usize] != ratio(0, 1)
                })
            })
            .count();
        assert!(nonzero_diagonals <= 4);
    }

    #[test]
    fn json_round_trip() {
        let s = labelled(1, 2);
        let text = s.to_json().to_string();
        assert_eq!(parse_spec(&text).unwrap(), AnySpec::Rational(s));
        let c = r#"{"p":1,"q":1,"ring":"complex","diagonals":{"-1":{"default":[1,0]},"0":{"lo":0,"values":[[0.5,1]]},"1":{"default":1}}}"#;
        let AnySpec::Complex(c) = parse_spec(c).unwrap() else { panic!() };
        assert_eq!(c.a(0, 0).unwrap(), Complex::new(0.5, 1.0));
        let missing = r#"{"p":1,"q":1,"diagonals":{"0":{"default":"1"}}}"#;
        assert!(matches!(parse_spec(missing), Err(Error::ShapeMismatch(_))));
        let wrong_ring = r#"{"p":1,"q":1,"ring":"rational","diagonals":{"-1":{"default":[1,0]},"0":{"default":"1"},"1":{"default":"1"}}}"#;
        assert!(matches!(parse_spec(wrong_ring), Err(Error::RingMismatch(_))));
    }
}
