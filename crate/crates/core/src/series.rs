//! Truncated Laurent series in z⁻¹ with per-series precision floors.
//!
//! A series stores coefficients for exponents `hi` down to `prec`; everything
//! at exponents ≤ `prec − 1` is unknown. Series whose floor is [`EXACT`] are
//! known completely (polynomials in z and z⁻¹) and store only their nonzero
//! span.

use std::fmt;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Precision floor of exactly known series.
pub const EXACT: i64 = i64::MIN / 4;

fn clamp(prec: i64) -> i64 {
    prec.max(EXACT)
}

/// Lowest stored exponent over the nonempty operands.
fn exact_low<C: Scalar>(a: &Series<C>, b: &Series<C>) -> Option<i64> {
    [a, b]
        .iter()
        .filter(|s| !s.is_zero())
        .map(|s| s.lowest_stored())
        .min()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Degree {
    MinusInfinity,
    Finite(i64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Series<C> {
    hi: i64,
    prec: i64,
    coeffs: Vec<C>,
}

impl<C: Scalar> Series<C> {
    /// Dense series: `coeffs[t]` is the coefficient of z^(hi−t), `prec = hi − len + 1`.
    pub fn new(hi: i64, coeffs: Vec<C>) -> Self {
        let prec = hi - coeffs.len() as i64 + 1;
        Self::with_prec(hi, prec, coeffs).expect("dense series is consistent")
    }

    pub fn with_prec(hi: i64, prec: i64, coeffs: Vec<C>) -> Result<Self> {
        if prec > hi + 1 || coeffs.len() as i64 != hi - prec + 1 {
            return Err(Error::Invalid(format!(
                "series with hi={hi}, prec={prec} needs {} coefficients, got {}",
                hi - prec + 1,
                coeffs.len()
            )));
        }
        let mut s = Series { hi, prec, coeffs };
        s.normalize();
        Ok(s)
    }

    /// Exactly known series with the given coefficients from `hi` downward.
    pub fn exact(hi: i64, coeffs: Vec<C>) -> Self {
        let mut s = Series { hi, prec: EXACT, coeffs };
        s.normalize();
        s
    }

    /// The series O(z^(prec−1)).
    pub fn zero(prec: i64) -> Self {
        let prec = clamp(prec);
        Series { hi: prec - 1, prec, coeffs: Vec::new() }
    }

    pub fn exact_zero() -> Self {
        Self::zero(EXACT)
    }

    pub fn constant(c: C) -> Self {
        Self::exact(0, vec![c])
    }

    pub fn monomial(c: C, e: i64) -> Self {
        Self::exact(e, vec![c])
    }

    /// z − c.
    pub fn z_minus(c: &C) -> Self {
        Self::exact(1, vec![C::one(), c.negated()])
    }

    fn normalize(&mut self) {
        let lead = self.coeffs.iter().take_while(|c| c.is_exact_zero()).count();
        if lead > 0 {
            self.coeffs.drain(..lead);
            self.hi -= lead as i64;
        }
        if self.is_exact() {
            while self.coeffs.last().is_some_and(|c| c.is_exact_zero()) {
                self.coeffs.pop();
            }
        }
        if self.coeffs.is_empty() {
            self.hi = self.prec - 1;
        }
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn prec(&self) -> i64 {
        self.prec
    }

    pub fn is_exact(&self) -> bool {
        self.prec <= EXACT
    }

    /// Number of known exponents; `None` for exact series.
    pub fn width(&self) -> Option<i64> {
        (!self.is_exact()).then(|| self.hi - self.prec + 1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Stored coefficients from `hi` downward.
    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    fn lowest_stored(&self) -> i64 {
        self.hi - self.coeffs.len() as i64 + 1
    }

    fn get(&self, e: i64) -> C {
        if e > self.hi || e < self.lowest_stored() {
            C::zero()
        } else {
            self.coeffs[(self.hi - e) as usize].clone()
        }
    }

    fn max_magnitude(&self) -> f64 {
        self.coeffs.iter().map(|c| c.magnitude()).fold(0.0, f64::max)
    }

    /// [z^e] of the series.
    pub fn coefficient(&self, e: i64) -> Result<C> {
        if e < self.prec {
            return Err(Error::PrecisionMiss { exponent: e, prec: self.prec });
        }
        Ok(self.get(e))
    }

    fn leading_index(&self) -> Option<usize> {
        let scale = self.max_magnitude();
        self.coeffs.iter().position(|c| !c.negligible(scale))
    }

    pub fn degree(&self) -> Degree {
        match self.leading_index() {
            Some(t) => Degree::Finite(self.hi - t as i64),
            None => Degree::MinusInfinity,
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let prec = clamp(self.prec.max(o.prec));
        let hi = self.hi.max(o.hi);
        let low = if prec <= EXACT {
            match exact_low(self, o) {
                Some(low) => low,
                None => return Self::zero(prec),
            }
        } else {
            prec
        };
        if hi < low {
            return Self::zero(prec);
        }
        let coeffs = (0..=(hi - low)).map(|t| self.get(hi - t).plus(&o.get(hi - t))).collect();
        let mut s = Series { hi, prec, coeffs };
        s.normalize();
        s
    }

    pub fn neg(&self) -> Self {
        Series {
            hi: self.hi,
            prec: self.prec,
            coeffs: self.coeffs.iter().map(|c| c.negated()).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut s = Series {
            hi: self.hi,
            prec: self.prec,
            coeffs: self.coeffs.iter().map(|x| x.times(c)).collect(),
        };
        s.normalize();
        s
    }

    /// Multiplication by z^e.
    pub fn shift(&self, e: i64) -> Self {
        if self.is_exact() {
            let mut s = self.clone();
            s.hi += e;
            if s.coeffs.is_empty() {
                s.hi = EXACT - 1;
            }
            return s;
        }
        Series { hi: self.hi + e, prec: self.prec + e, coeffs: self.coeffs.clone() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let prec = clamp((self.prec.saturating_add(o.hi)).max(o.prec.saturating_add(self.hi)));
        if self.is_zero() || o.is_zero() {
            return Self::zero(prec);
        }
        let hi = self.hi + o.hi;
        let low = if prec <= EXACT {
            self.lowest_stored() + o.lowest_stored()
        } else {
            prec
        };
        if hi < low {
            return Self::zero(prec);
        }
        let n = (hi - low + 1) as usize;
        let mut coeffs = vec![C::zero(); n];
        for (s, a) in self.coeffs.iter().enumerate() {
            if s >= n || a.is_exact_zero() {
                continue;
            }
            for (u, b) in o.coeffs.iter().enumerate().take(n - s) {
                let t = s + u;
                coeffs[t] = coeffs[t].plus(&a.times(b));
            }
        }
        let mut r = Series { hi, prec, coeffs };
        r.normalize();
        r
    }

    /// Drops everything below `floor` (no effect when `floor ≤ prec`).
    pub fn truncate(&self, floor: i64) -> Self {
        if floor <= self.prec {
            return self.clone();
        }
        if self.hi < floor {
            return Self::zero(floor);
        }
        let coeffs = (0..=(self.hi - floor)).map(|t| self.get(self.hi - t)).collect();
        let mut s = Series { hi: self.hi, prec: floor, coeffs };
        s.normalize();
        s
    }

    /// Multiplicative inverse, keeping the width of the input.
    pub fn invert(&self) -> Result<Self> {
        self.invert_to(None)
    }

    /// Multiplicative inverse; `floor` caps the expansion of exact inputs and
    /// may raise (never lower) the natural floor of finite ones.
    pub fn invert_to(&self, floor: Option<i64>) -> Result<Self> {
        let t0 = self.leading_index().ok_or_else(|| {
            Error::ZeroLeadingCoefficient(format!("cannot invert {}", self.pretty()))
        })?;
        let d = self.hi - t0 as i64;
        let lead = &self.coeffs[t0];
        let c_inv = lead
            .recip()
            .ok_or_else(|| Error::ZeroLeadingCoefficient("leading coefficient is zero".into()))?;
        let tail: Vec<C> = self.coeffs[t0 + 1..].to_vec();
        let out_prec = if self.is_exact() {
            if tail.is_empty() {
                return Ok(Self::monomial(c_inv, -d));
            }
            floor.ok_or_else(|| {
                Error::Invalid("inverting an exactly known non-monomial series needs a floor".into())
            })?
        } else {
            let natural = self.prec - 2 * d;
            floor.map_or(natural, |f| f.max(natural))
        };
        let terms = -d - out_prec + 1;
        if terms <= 0 {
            return Ok(Self::zero(out_prec));
        }
        let terms = terms as usize;
        let neg_c_inv = c_inv.negated();
        let mut b: Vec<C> = Vec::with_capacity(terms);
        b.push(c_inv);
        for t in 1..terms {
            let mut acc = C::zero();
            for s in 1..=t.min(tail.len()) {
                acc = acc.plus(&tail[s - 1].times(&b[t - s]));
            }
            b.push(acc.times(&neg_c_inv));
        }
        Self::with_prec(-d, out_prec, b)
    }

    /// a / b.
    pub fn div(&self, b: &Self, floor: Option<i64>) -> Result<Self> {
        Ok(self.mul(&b.invert_to(floor)?))
    }

    /// Coefficientwise equality at all exponents ≥ `floor`.
    pub fn equal_to_precision(&self, o: &Self, floor: i64) -> Result<bool> {
        let shared = self.prec.max(o.prec);
        if floor < shared {
            return Err(Error::PrecisionMiss { exponent: floor, prec: shared });
        }
        let scale = self.max_magnitude().max(o.max_magnitude());
        let hi = self.hi.max(o.hi);
        let low = if floor <= EXACT {
            match exact_low(self, o) {
                Some(low) => low,
                None => return Ok(true),
            }
        } else {
            floor
        };
        Ok((low..=hi).all(|e| self.get(e).minus(&o.get(e)).negligible(scale)))
    }

    /// Equality at the shared floor of both operands.
    pub fn agrees_with(&self, o: &Self) -> bool {
        let floor = self.prec.max(o.prec);
        self.equal_to_precision(o, floor).unwrap_or(false)
    }

    /// Shared floor and the largest coefficient magnitude of `self − o` above it.
    pub fn max_abs_diff(&self, o: &Self) -> (i64, f64) {
        let d = self.sub(o);
        (d.prec, d.max_magnitude())
    }

    pub fn to_json(&self) -> Value {
        let prec = if self.is_exact() { Value::Null } else { json!(self.prec) };
        json!({
            "hi": self.hi,
            "prec": prec,
            "coeffs": self.coeffs.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = || Error::Invalid(format!("malformed series {v}"));
        let hi = v.get("hi").and_then(Value::as_i64).ok_or_else(bad)?;
        let coeffs = v
            .get("coeffs")
            .and_then(Value::as_array)
            .ok_or_else(bad)?
            .iter()
            .map(C::from_json)
            .collect::<Result<Vec<_>>>()?;
        match v.get("prec") {
            Some(Value::Null) | None => Ok(Self::exact(hi, coeffs)),
            Some(p) => Self::with_prec(hi, p.as_i64().ok_or_else(bad)?, coeffs),
        }
    }

    /// `c·z^e + … + O(z^{prec-1})`.
    pub fn pretty(&self) -> String {
        let mut terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_exact_zero())
            .map(|(t, c)| format!("{}·z^{}", c.render(), self.hi - t as i64))
            .collect();
        if !self.is_exact() {
            terms.push(format!("O(z^{})", self.prec - 1));
        }
        if terms.is_empty() {
            "0".to_string()
        } else {
            terms.join(" + ")
        }
    }
}

impl<C: Scalar> fmt::Display for Series<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pretty())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeriesMatrix<C> {
    rows: usize,
    cols: usize,
    entries: Vec<Series<C>>,
}

impl<C: Scalar> SeriesMatrix<C> {
    pub fn new(rows: usize, cols: usize, entries: Vec<Series<C>>) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{rows}×{cols} matrix with {} entries",
                entries.len()
            )));
        }
        Ok(SeriesMatrix { rows, cols, entries })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Series<C>) -> Self {
        let entries = (0..rows * cols).map(|t| f(t / cols, t % cols)).collect();
        SeriesMatrix { rows, cols, entries }
    }

    pub fn try_from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Result<Series<C>>,
    ) -> Result<Self> {
        let entries = (0..rows * cols).map(|t| f(t / cols, t % cols)).collect::<Result<_>>()?;
        Ok(SeriesMatrix { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| Series::exact_zero())
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(n, n, Series::constant(C::one()))
    }

    /// `d` on the main diagonal, exact zeros elsewhere.
    pub fn diagonal(rows: usize, cols: usize, d: Series<C>) -> Self {
        Self::from_fn(rows, cols, |i, j| if i == j { d.clone() } else { Series::exact_zero() })
    }

    /// Embeds a row-major scalar matrix.
    pub fn scalar_embed(values: &[C], rows: usize, cols: usize) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} scalars for a {rows}×{cols} matrix",
                values.len()
            )));
        }
        Ok(Self::from_fn(rows, cols, |i, j| Series::constant(values[i * cols + j].clone())))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Series<C> {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, s: Series<C>) {
        self.entries[i * self.cols + j] = s;
    }

    pub fn entries(&self) -> &[Series<C>] {
        &self.entries
    }

    /// Smallest entry floor.
    pub fn prec(&self) -> i64 {
        self.entries.iter().map(Series::prec).min().unwrap_or(EXACT)
    }

    /// Largest entry floor: every entry is known at least down to it.
    pub fn floor(&self) -> i64 {
        self.entries.iter().map(Series::prec).max().unwrap_or(EXACT)
    }

    pub fn mat_mul(&self, o: &Self) -> Result<Self> {
        if self.cols != o.rows {
            return Err(Error::ShapeMismatch(format!(
                "{}×{} times {}×{}",
                self.rows, self.cols, o.rows, o.cols
            )));
        }
        Ok(Self::from_fn(self.rows, o.cols, |i, j| {
            (0..self.cols).fold(Series::exact_zero(), |acc, t| {
                let a = self.get(i, t);
                let b = o.get(t, j);
                if a.is_zero() && a.is_exact() || b.is_zero() && b.is_exact() {
                    acc
                } else {
                    acc.add(&a.mul(b))
                }
            })
        }))
    }

    pub fn mat_add(&self, o: &Self) -> Result<Self> {
        if self.rows != o.rows || self.cols != o.cols {
            return Err(Error::ShapeMismatch(format!(
                "{}×{} plus {}×{}",
                self.rows, self.cols, o.rows, o.cols
            )));
        }
        Ok(Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j).add(o.get(i, j))))
    }

    pub fn truncate(&self, floor: i64) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j).truncate(floor))
    }

    /// Entrywise agreement at each pair's shared floor.
    pub fn agrees_with(&self, o: &Self) -> bool {
        self.rows == o.rows
            && self.cols == o.cols
            && self.entries.iter().zip(&o.entries).all(|(a, b)| a.agrees_with(b))
    }

    /// Largest coefficient discrepancy over all entries.
    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        self.entries
            .iter()
            .zip(&o.entries)
            .map(|(a, b)| a.max_abs_diff(b).1)
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "rows": self.rows,
            "cols": self.cols,
            "entries": (0..self.rows)
                .map(|i| (0..self.cols).map(|j| self.get(i, j).to_json()).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        })
    }
}
