//! Generating series of the banded operators by iterated band·vector products.

use std::collections::HashMap;

use crate::band::{BandParameters, BandSpec};
use crate::error::{Error, Result};
use crate::paths::min_steps;
use crate::registry::{split_param, Registry};
use crate::scalar::{Ring, Scalar};
use crate::series::{Series, SeriesMatrix};

/// Inclusive index bounds of an operator's rows and columns.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IndexSet {
    pub lo: Option<i64>,
    pub hi: Option<i64>,
}

impl IndexSet {
    pub const NONNEGATIVE: IndexSet = IndexSet { lo: Some(0), hi: None };
    pub const ALL: IndexSet = IndexSet { lo: None, hi: None };
    pub const NEGATIVE: IndexSet = IndexSet { lo: None, hi: Some(-1) };

    pub fn strip(n: i64) -> IndexSet {
        IndexSet { lo: Some(0), hi: Some(n - 1) }
    }

    pub fn contains(&self, h: i64) -> bool {
        self.lo.is_none_or(|lo| h >= lo) && self.hi.is_none_or(|hi| h <= hi)
    }

    fn clip(&self, lo: i64, hi: i64) -> (i64, i64) {
        (self.lo.map_or(lo, |l| lo.max(l)), self.hi.map_or(hi, |h| hi.min(h)))
    }
}

/// Heights that lie on some path of at most `steps` steps from a row in
/// `rows` to column `j`, clipped to `set`.
pub fn reachable_heights(
    rows: (i64, i64),
    j: i64,
    steps: i64,
    params: BandParameters,
    set: IndexSet,
) -> (i64, i64) {
    let mut hi = rows.1.max(j);
    while min_steps(rows.1, hi + 1, params) + min_steps(hi + 1, j, params) <= steps {
        hi += 1;
    }
    let mut lo = rows.0.min(j);
    while min_steps(rows.0, lo - 1, params) + min_steps(lo - 1, j, params) <= steps {
        lo -= 1;
    }
    set.clip(lo, hi)
}

fn check_block(set: IndexSet, rows: (i64, i64), j: i64) -> Result<()> {
    if rows.0 > rows.1 || !set.contains(rows.0) || !set.contains(rows.1) || !set.contains(j) {
        return Err(Error::IndexOutOfRange(format!(
            "rows {}..={} / column {j} outside the index set",
            rows.0, rows.1
        )));
    }
    Ok(())
}

/// Series Σ_ℓ (M^ℓ)_{i,j} z^{−(ℓ+1)} for each row i in `rows`, where M is the
/// two-sided matrix restricted to `set`.
pub fn scalar_power_block<C: Scalar>(
    spec: &BandSpec<C>,
    set: IndexSet,
    rows: (i64, i64),
    j: i64,
    width: usize,
) -> Result<Vec<Series<C>>> {
    check_block(set, rows, j)?;
    if width == 0 {
        return Ok(vec![Series::zero(0); (rows.1 - rows.0 + 1) as usize]);
    }
    let (p, q) = (spec.p(), spec.q());
    let (lo, hi) = reachable_heights(rows, j, width as i64 - 1, spec.params(), set);
    spec.check_heights(lo, hi)?;
    let n = (hi - lo + 1) as usize;
    let band = (p + q + 1) as usize;
    let mut table = vec![C::zero(); n * band];
    for r in 0..n as i64 {
        for d in -p..=q {
            let c = r + d;
            if c >= 0 && c < n as i64 {
                table[r as usize * band + (d + p) as usize] = spec.entry_w(lo + r, lo + c)?;
            }
        }
    }
    let mut v = vec![C::zero(); n];
    v[(j - lo) as usize] = C::one();
    let nrows = (rows.1 - rows.0 + 1) as usize;
    let mut coeffs: Vec<Vec<C>> = vec![Vec::with_capacity(width); nrows];
    for step in 0..width {
        for (t, c) in coeffs.iter_mut().enumerate() {
            c.push(v[(rows.0 + t as i64 - lo) as usize].clone());
        }
        if step + 1 == width {
            break;
        }
        let mut next = vec![C::zero(); n];
        for (r, slot) in next.iter_mut().enumerate() {
            let mut acc = C::zero();
            for d in -p..=q {
                let c = r as i64 + d;
                if c < 0 || c >= n as i64 || v[c as usize].is_exact_zero() {
                    continue;
                }
                acc = acc.plus(&table[r * band + (d + p) as usize].times(&v[c as usize]));
            }
            *slot = acc;
        }
        v = next;
    }
    Ok(coeffs.into_iter().map(|c| Series::new(-1, c)).collect())
}

/// The matrix K: H with its p×q top-left corner corrected by V-series terms,
/// optionally with its first `offset` rows and columns removed.
#[derive(Clone, Debug)]
pub struct KProvider<C> {
    spec: BandSpec<C>,
    width: usize,
    corner: Vec<Series<C>>,
    offset: i64,
}

impl<C: Scalar> KProvider<C> {
    pub fn build(spec: &BandSpec<C>, width: usize) -> Result<Self> {
        let (p, q) = (spec.p(), spec.q());
        let mut v: HashMap<(i64, i64), Series<C>> = HashMap::new();
        for m in 1..=q {
            let block = scalar_power_block(spec, IndexSet::NEGATIVE, (-p, -1), -m, width)?;
            for (t, s) in block.into_iter().enumerate() {
                v.insert((-p + t as i64, -m), s);
            }
        }
        let mut corner = Vec::with_capacity((p * q) as usize);
        for i in 0..p {
            for j in 0..q {
                let mut k = Series::constant(spec.entry_h(i, j)?);
                for l in 1..=p - i {
                    for m in 1..=q - j {
                        let c = spec.a(-(l + i), -l)?.times(&spec.a(m + j, -m)?);
                        k = k.add(&v[&(-l, -m)].scale(&c));
                    }
                }
                corner.push(k);
            }
        }
        Ok(KProvider { spec: spec.clone(), width, corner, offset: 0 })
    }

    pub fn params(&self) -> BandParameters {
        self.spec.params()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    /// K with its first `r` rows and columns deleted.
    pub fn shifted(&self, r: i64) -> Self {
        KProvider { offset: self.offset + r, ..self.clone() }
    }

    pub fn entry(&self, i: i64, j: i64) -> Result<Series<C>> {
        if i < 0 || j < 0 {
            return Err(Error::IndexOutOfRange(format!("K entry ({i},{j})")));
        }
        let (a, b) = (i + self.offset, j + self.offset);
        let (p, q) = (self.spec.p(), self.spec.q());
        if a < p && b < q {
            return Ok(self.corner[(a * q + b) as usize].clone());
        }
        Ok(Series::constant(self.spec.entry_h(a, b)?))
    }

    /// Neumann expansion of (zI − K)^{-1} for the rows in `rows`, column `j`.
    pub fn resolvent_block(&self, rows: (i64, i64), j: i64, width: usize) -> Result<Vec<Series<C>>> {
        check_block(IndexSet::NONNEGATIVE, rows, j)?;
        let nrows = (rows.1 - rows.0 + 1) as usize;
        let w = width as i64;
        if width == 0 {
            return Ok(vec![Series::zero(0); nrows]);
        }
        let params = self.params();
        let (p, q) = (params.p, params.q);
        let (lo, hi) = reachable_heights(rows, j, w - 1, params, IndexSet::NONNEGATIVE);
        self.spec.check_heights(lo + self.offset, hi + self.offset)?;
        let n = (hi - lo + 1) as usize;
        let band = (p + q + 1) as usize;
        let mut table: Vec<Series<C>> = vec![Series::exact_zero(); n * band];
        for r in 0..n as i64 {
            for d in -p..=q {
                let c = r + d;
                if c >= 0 && c < n as i64 {
                    table[r as usize * band + (d + p) as usize] = self.entry(lo + r, lo + c)?;
                }
            }
        }
        let mut v: Vec<Series<C>> = vec![Series::exact_zero(); n];
        v[(j - lo) as usize] = Series::constant(C::one());
        let mut acc: Vec<Series<C>> = vec![Series::exact_zero(); nrows];
        for step in 0..w {
            let keep = -(w - step - 1);
            for (t, a) in acc.iter_mut().enumerate() {
                let term = v[(rows.0 + t as i64 - lo) as usize].truncate(keep).shift(-(step + 1));
                *a = a.add(&term);
            }
            if step + 1 == w {
                break;
            }
            let floor = -(w - step - 2);
            let next: Vec<Series<C>> = (0..n)
                .map(|r| {
                    let mut s = Series::exact_zero();
                    for d in -p..=q {
                        let c = r as i64 + d;
                        if c < 0 || c >= n as i64 || (v[c as usize].is_zero() && v[c as usize].is_exact()) {
                            continue;
                        }
                        let k = &table[r * band + (d + p) as usize];
                        if k.is_zero() && k.is_exact() {
                            continue;
                        }
                        s = s.add(&k.mul(&v[c as usize]).truncate(floor));
                    }
                    s.truncate(floor)
                })
                .collect();
            v = next;
        }
        Ok(acc)
    }
}

/// A family of generating series, selected by name.
pub trait SeriesFamily<C: Scalar>: Send + Sync {
    /// Series for each row in `rows` against column `j`.
    fn block(
        &self,
        spec: &BandSpec<C>,
        param: Option<i64>,
        rows: (i64, i64),
        j: i64,
        width: usize,
    ) -> Result<Vec<Series<C>>>;

    fn series(&self, spec: &BandSpec<C>, param: Option<i64>, i: i64, j: i64, width: usize) -> Result<Series<C>> {
        Ok(self.block(spec, param, (i, i), j, width)?.remove(0))
    }
}

fn no_param(name: &str, param: Option<i64>) -> Result<()> {
    match param {
        None => Ok(()),
        Some(_) => Err(Error::Invalid(format!("family {name:?} takes no parameter"))),
    }
}

fn need_param(name: &str, param: Option<i64>, min: i64) -> Result<i64> {
    match param {
        Some(v) if v >= min => Ok(v),
        _ => Err(Error::Invalid(format!("family {name:?} needs an integer parameter ≥ {min}"))),
    }
}

struct OneSided;
struct Shifted;
struct TwoSided;
struct Reflected;
struct Zeta;
struct Truncated;

impl<C: Scalar> SeriesFamily<C> for OneSided {
    fn block(&self, spec: &BandSpec<C>, param: Option<i64>, rows: (i64, i64), j: i64, width: usize) -> Result<Vec<Series<C>>> {
        no_param("a", param)?;
        scalar_power_block(spec, IndexSet::NONNEGATIVE, rows, j, width)
    }
}

impl<C: Scalar> SeriesFamily<C> for Shifted {
    fn block(&self, spec: &BandSpec<C>, param: Option<i64>, rows: (i64, i64), j: i64, width: usize) -> Result<Vec<Series<C>>> {
        let k = need_param("ak", param, 0)?;
        scalar_power_block(&spec.shift(k), IndexSet::NONNEGATIVE, rows, j, width)
    }
}

impl<C: Scalar> SeriesFamily<C> for TwoSided {
    fn block(&self, spec: &BandSpec<C>, param: Option<i64>, rows: (i64, i64), j: i64, width: usize) -> Result<Vec<Series<C>>> {
        no_param("w", param)?;
        scalar_power_block(spec, IndexSet::ALL, rows, j, width)
    }
}

impl<C: Scalar> SeriesFamily<C> for Reflected {
    fn block(&self, spec: &BandSpec<C>, param: Option<i64>, rows: (i64, i64), j: i64, width: usize) -> Result<Vec<Series<C>>> {
        no_param("v", param)?;
        scalar_power_block(spec, IndexSet::NEGATIVE, rows, j, width)
    }
}

impl<C: Scalar> SeriesFamily<C> for Zeta {
    fn block(&self, spec: &BandSpec<C>, param: Option<i64>, rows: (i64, i64), j: i64, width: usize) -> Result<Vec<Series<C>>> {
        no_param("zeta", param)?;
        KProvider::build(spec, width)?.resolvent_block(rows, j, width)
    }
}

impl<C: Scalar> SeriesFamily<C> for Truncated {
    fn block(&self, spec: &BandSpec<C>, param: Option<i64>, rows: (i64, i64), j: i64, width: usize) -> Result<Vec<Series<C>>> {
        let n = need_param("rn", param, 1)?;
        scalar_power_block(spec, IndexSet::strip(n), rows, j, width)
    }
}

pub fn family_registry<C: Scalar>() -> Registry<dyn SeriesFamily<C>> {
    let r: Registry<dyn SeriesFamily<C>> = Registry::new("series family");
    r.with("a", Box::new(OneSided))
        .with("ak", Box::new(Shifted))
        .with("w", Box::new(TwoSided))
        .with("v", Box::new(Reflected))
        .with("zeta", Box::new(Zeta))
        .with("rn", Box::new(Truncated))
}

/// Series of `family` (`a`, `ak:K`, `w`, `v`, `zeta` or `rn:N`) at (i, j).
pub fn series_by_powers<C: Scalar>(
    family: &str,
    i: i64,
    j: i64,
    width: usize,
    spec: &BandSpec<C>,
) -> Result<Series<C>> {
    let (name, param) = split_param(family)?;
    family_registry::<C>().get(name)?.series(spec, param, i, j, width)
}

/// The q×p matrix of `family` series at 0 ≤ i < q, 0 ≤ j < p.
pub fn corner_matrix<C: Scalar>(spec: &BandSpec<C>, family: &str, width: usize) -> Result<SeriesMatrix<C>> {
    let (name, param) = split_param(family)?;
    let reg = family_registry::<C>();
    let fam = reg.get(name)?;
    let (q, p) = (spec.q() as usize, spec.p() as usize);
    let mut cols = Vec::with_capacity(p);
    for j in 0..p as i64 {
        cols.push(fam.block(spec, param, (0, q as i64 - 1), j, width)?);
    }
    Ok(SeriesMatrix::from_fn(q, p, |i, j| cols[j][i].clone()))
}

/// Numerator and monic denominator of a truncation resolvent, ascending powers.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalFunctionPair<C> {
    pub numerator: Vec<C>,
    pub denominator: Vec<C>,
}

fn poly_series<C: Scalar>(ascending: &[C]) -> Series<C> {
    let deg = ascending.len() as i64 - 1;
    Series::exact(deg, ascending.iter().rev().cloned().collect())
}

impl<C: Scalar> RationalFunctionPair<C> {
    /// Laurent expansion at infinity through z^{−width}.
    pub fn expand(&self, width: usize) -> Result<Series<C>> {
        let num = poly_series(&self.numerator);
        let den = poly_series(&self.denominator);
        let n = self.denominator.len() as i64 - 1;
        let w = width as i64;
        let inv = den.invert_to(Some(-w - (n - 1).max(0)))?;
        Ok(num.mul(&inv).truncate(-w))
    }
}

/// Characteristic polynomial of Hₙ and the adjugate of (zI − Hₙ) by the
/// Faddeev–LeVerrier recursion. Returns (Q ascending, P[i][j] ascending).
#[allow(clippy::type_complexity)]
pub fn faddeev_leverrier<C: Scalar>(spec: &BandSpec<C>, n: usize) -> Result<(Vec<C>, Vec<Vec<Vec<C>>>)> {
    if C::RING != Ring::Rational {
        return Err(Error::ExactRingRequired);
    }
    if n == 0 {
        return Err(Error::Invalid("truncation size must be ≥ 1".into()));
    }
    let h = spec.truncate_h(n)?;
    let matmul = |a: &Vec<Vec<C>>, b: &Vec<Vec<C>>| -> Vec<Vec<C>> {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).fold(C::zero(), |acc, t| acc.plus(&a[i][t].times(&b[t][j]))))
                    .collect()
            })
            .collect()
    };
    let mut c = vec![C::zero(); n + 1];
    c[n] = C::one();
    // adjugate coefficient of z^{n−k} is M_k
    let mut ms: Vec<Vec<Vec<C>>> = Vec::with_capacity(n);
    let mut m = vec![vec![C::zero(); n]; n];
    for k in 1..=n {
        let mut next = matmul(&h, &m);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] = row[i].plus(&c[n - k + 1]);
        }
        let am = matmul(&h, &next);
        let tr = (0..n).fold(C::zero(), |acc, i| acc.plus(&am[i][i]));
        let inv_k = C::from_i64(k as i64).recip().expect("k ≥ 1");
        c[n - k] = tr.times(&inv_k).negated();
        ms.push(next.clone());
        m = next;
    }
    let p = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|e| ms[n - 1 - e][i][j].clone()).collect())
                .collect()
        })
        .collect();
    Ok((c, p))
}

pub fn trunc_resolvent_rational<C: Scalar>(
    spec: &BandSpec<C>,
    n: usize,
    i: usize,
    j: usize,
) -> Result<RationalFunctionPair<C>> {
    if i >= n || j >= n {
        return Err(Error::IndexOutOfRange(format!("({i},{j}) outside 0..{n}")));
    }
    let (q, mut p) = faddeev_leverrier(spec, n)?;
    let mut numerator = std::mem::take(&mut p[i][j]);
    while numerator.len() > 1 && numerator.last().is_some_and(C::is_exact_zero) {
        numerator.pop();
    }
    Ok(RationalFunctionPair { numerator, denominator: q })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualCheck {
    pub relation: &'static str,
    pub i: i64,
    pub j: i64,
    /// Exponents at or above this floor were compared.
    pub floor: i64,
    pub residual: f64,
    pub zero: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelationReport {
    pub width: usize,
    pub max_idx: i64,
    pub checks: Vec<ResidualCheck>,
}

impl RelationReport {
    pub fn max_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.residual).fold(0.0, f64::max)
    }

    pub fn all_zero(&self) -> bool {
        self.checks.iter().all(|c| c.zero)
    }
}

/// Series indexed by (i, j).
pub type SeriesTable<C> = HashMap<(i64, i64), Series<C>>;

/// Table of `family` series for 0 ≤ i ≤ rows, 0 ≤ j ≤ cols.
pub fn series_table<C: Scalar>(
    spec: &BandSpec<C>,
    family: &str,
    rows: i64,
    cols: i64,
    width: usize,
) -> Result<SeriesTable<C>> {
    let (name, param) = split_param(family)?;
    let reg = family_registry::<C>();
    let fam = reg.get(name)?;
    let mut t = SeriesTable::new();
    for j in 0..=cols {
        for (i, s) in fam.block(spec, param, (0, rows), j, width)?.into_iter().enumerate() {
            t.insert((i as i64, j), s);
        }
    }
    Ok(t)
}

fn residual<C: Scalar>(relation: &'static str, i: i64, j: i64, lhs: &Series<C>, rhs: &Series<C>) -> ResidualCheck {
    let d = lhs.sub(rhs);
    let scale = lhs
        .coeffs()
        .iter()
        .chain(rhs.coeffs())
        .map(|c| c.magnitude())
        .fold(0.0, f64::max);
    let residual = d.coeffs().iter().map(|c| c.magnitude()).fold(0.0, f64::max);
    let zero = d.coeffs().iter().all(|c| c.negligible(scale));
    ResidualCheck { relation, i, j, floor: d.prec(), residual, zero }
}

/// Tables needed by [`relations_from_tables`].
pub fn relation_tables<C: Scalar>(
    spec: &BandSpec<C>,
    width: usize,
    max_idx: i64,
) -> Result<(SeriesTable<C>, SeriesTable<C>)> {
    let a = series_table(spec, "a", max_idx + spec.q(), max_idx + spec.p(), width)?;
    let a1 = series_table(&spec.shift(1), "a", max_idx.max(spec.q()), max_idx.max(spec.p()), width)?;
    Ok((a, a1))
}

pub fn relation_residuals<C: Scalar>(spec: &BandSpec<C>, width: usize, max_idx: i64) -> Result<RelationReport> {
    let (a, a1) = relation_tables(spec, width, max_idx)?;
    relations_from_tables(spec, width, max_idx, &a, &a1)
}

/// Residuals of the four one-sided relations and the two linear
/// recurrences, given tables of A and A^{(1)}.
pub fn relations_from_tables<C: Scalar>(
    spec: &BandSpec<C>,
    width: usize,
    max_idx: i64,
    a: &SeriesTable<C>,
    a1: &SeriesTable<C>,
) -> Result<RelationReport> {
    let (p, q) = (spec.p(), spec.q());
    let get = |t: &SeriesTable<C>, i: i64, j: i64| -> Result<Series<C>> {
        t.get(&(i, j))
            .cloned()
            .ok_or_else(|| Error::IndexOutOfRange(format!("series table lacks ({i},{j})")))
    };
    let mut checks = Vec::new();
    let a00 = get(a, 0, 0)?;

    let mut d = Series::z_minus(&spec.a(0, 0)?);
    for i in 1..=q {
        for j in 1..=p {
            let c = spec.a(i, 0)?.times(&spec.a(-j, 0)?);
            d = d.sub(&get(a1, i - 1, j - 1)?.scale(&c));
        }
    }
    checks.push(residual("a00", 0, 0, &a00, &d.invert()?));

    for j in 1..=max_idx {
        let mut s = Series::exact_zero();
        for i in 1..=q {
            s = s.add(&get(a1, i - 1, j - 1)?.scale(&spec.a(i, 0)?));
        }
        checks.push(residual("a0j", 0, j, &get(a, 0, j)?, &a00.mul(&s)));
    }
    for i in 1..=max_idx {
        let mut s = Series::exact_zero();
        for j in 1..=p {
            s = s.add(&get(a1, i - 1, j - 1)?.scale(&spec.a(-j, 0)?));
        }
        checks.push(residual("ai0", i, 0, &get(a, i, 0)?, &a00.mul(&s)));
    }
    let a00_inv = a00.invert()?;
    for i in 1..=max_idx {
        for j in 1..=max_idx {
            let rhs = get(a, i, 0)?
                .mul(&get(a, 0, j)?)
                .mul(&a00_inv)
                .add(&get(a1, i - 1, j - 1)?);
            checks.push(residual("aij", i, j, &get(a, i, j)?, &rhs));
        }
    }
    let z = Series::monomial(C::one(), 1);
    for i in 0..=max_idx {
        for j in 0..=max_idx {
            let delta = Series::constant(if i == j { C::one() } else { C::zero() });
            let lhs = z.mul(&get(a, i, j)?).sub(&delta);
            let mut col = Series::exact_zero();
            for r in 1..=p {
                col = col.add(&get(a, i, j + r)?.scale(&spec.a(-r, j)?));
            }
            for r in 0..=j.min(q) {
                col = col.add(&get(a, i, j - r)?.scale(&spec.a(r, j - r)?));
            }
            checks.push(residual("newrel2", i, j, &lhs, &col));
            let mut row = Series::exact_zero();
            for r in 1..=q {
                row = row.add(&get(a, i + r, j)?.scale(&spec.a(r, i)?));
            }
            for r in 0..=i.min(p) {
                row = row.add(&get(a, i - r, j)?.scale(&spec.a(-r, i - r)?));
            }
            checks.push(residual("newrel3", i, j, &lhs, &row));
        }
    }
    Ok(RelationReport { width, max_idx, checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::{weight_polynomial_brute, PathConstraint};
    use crate::scalar::{ratio, Rational};

    fn ones(p: i64, q: i64) -> BandSpec<Rational> {
        BandSpec::constant(p, q, |_| ratio(1, 1)).unwrap()
    }

    fn coeffs(s: &Series<Rational>, width: i64) -> Vec<Rational> {
        (1..=width).map(|e| s.coefficient(-e).unwrap()).collect()
    }

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&n| ratio(n, 1)).collect()
    }

    fn varied(p: i64, q: i64) -> BandSpec<Rational> {
        BandSpec::from_fn(p, q, -40, 40, |k, n| ratio(((3 * k + 5 * n).rem_euclid(7)) - 3, 1 + (n.rem_euclid(2)))).unwrap()
    }

    #[test]
    fn motzkin_series() {
        let s = series_by_powers("a", 0, 0, 7, &ones(1, 1)).unwrap();
        assert_eq!(s.prec(), -7);
        assert_eq!(coeffs(&s, 7), ints(&[1, 1, 2, 4, 9, 21, 51]));
        let w = series_by_powers("w", 0, 0, 5, &ones(1, 1)).unwrap();
        assert_eq!(coeffs(&w, 5), ints(&[1, 1, 3, 7, 19]));
        let off = series_by_powers("a", 0, 1, 4, &ones(1, 1)).unwrap();
        assert_eq!(off.coefficient(-1).unwrap(), ratio(0, 1));
        assert_eq!(off.coefficient(-2).unwrap(), ratio(1, 1));
    }

    #[test]
    fn families_match_brute_force() {
        let spec = varied(2, 3);
        for (fam, c, shift) in [
            ("a", PathConstraint::NonNegative, 0),
            ("w", PathConstraint::Free, 0),
            ("v", PathConstraint::BelowMinusOne, -5),
            ("rn:4", PathConstraint::band(4).unwrap(), 0),
        ] {
            for i in 0..3 {
                for j in 0..3 {
                    let (i, j) = (i + shift, j + shift);
                    let s = series_by_powers(fam, i, j, 6, &spec).unwrap();
                    for l in 0..6 {
                        let want = weight_polynomial_brute(l, i, j, c, &spec).unwrap();
                        assert_eq!(s.coefficient(-(l as i64) - 1).unwrap(), want, "{fam} {i} {j} {l}");
                    }
                }
            }
        }
        let ak = series_by_powers("ak:2", 1, 0, 5, &spec).unwrap();
        assert_eq!(ak, series_by_powers("a", 1, 0, 5, &spec.shift(2)).unwrap());
    }

    #[test]
    fn window_is_checked_before_computing() {
        let spec = BandSpec::from_fn(1, 1, 0, 3, |_, _| ratio(1, 1)).unwrap();
        assert!(matches!(
            series_by_powers("a", 0, 0, 10, &spec),
            Err(Error::WindowMiss { .. })
        ));
        assert!(series_by_powers("a", 0, 0, 7, &spec).is_ok());
        assert!(matches!(series_by_powers("v", 0, 0, 3, &spec), Err(Error::IndexOutOfRange(_))));
        assert!(series_by_powers("rn:2", 0, 2, 3, &spec).is_err());
        assert!(series_by_powers("q", 0, 0, 3, &spec).is_err());
    }

    #[test]
    fn k_corner() {
        let spec = varied(1, 1);
        let k = KProvider::build(&spec, 6).unwrap();
        let v = series_by_powers("v", -1, -1, 6, &spec).unwrap();
        let want = Series::constant(spec.a(0, 0).unwrap())
            .add(&v.scale(&(spec.a(-1, -1).unwrap() * spec.a(1, -1).unwrap())));
        assert_eq!(k.entry(0, 0).unwrap(), want);
        let spec = varied(2, 3);
        let k = KProvider::build(&spec, 6).unwrap();
        for (i, j) in [(2, 0), (0, 3), (2, 3), (4, 5), (3, 1)] {
            assert_eq!(k.entry(i, j).unwrap(), Series::constant(spec.entry_h(i, j).unwrap()));
        }
        let positive_only = BandSpec::from_fn(2, 2, -40, 40, |k, n| {
            if n < 0 { ratio(0, 1) } else { ratio(k + n + 2, 3) }
        })
        .unwrap();
        let k = KProvider::build(&positive_only, 6).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let h = Series::constant(positive_only.entry_h(i, j).unwrap());
                assert!(k.entry(i, j).unwrap().agrees_with(&h));
            }
        }
        let zeta = series_by_powers("zeta", 1, 0, 6, &positive_only).unwrap();
        assert!(zeta.agrees_with(&series_by_powers("a", 1, 0, 6, &positive_only).unwrap()));
    }

    #[test]
    fn zeta_equals_w() {
        let spec = varied(2, 2);
        for i in 0..3 {
            for j in 0..3 {
                let z = series_by_powers("zeta", i, j, 7, &spec).unwrap();
                let w = series_by_powers("w", i, j, 7, &spec).unwrap();
                assert!(z.agrees_with(&w), "{i} {j}");
                assert_eq!(z.prec(), -7);
            }
        }
    }

    #[test]
    fn faddeev_leverrier_examples() {
        let spec = varied(1, 1);
        let r = trunc_resolvent_rational(&spec, 1, 0, 0).unwrap();
        assert_eq!(r.denominator, vec![-spec.a(0, 0).unwrap(), ratio(1, 1)]);
        assert_eq!(r.numerator, ints(&[1]));
        let r = trunc_resolvent_rational(&ones(1, 1), 2, 0, 0).unwrap();
        assert_eq!(r.denominator, ints(&[0, -2, 1]));
        assert_eq!(r.numerator, ints(&[-1, 1]));
        let c = spec.map(|x| crate::scalar::Complex::from_rational(x));
        assert_eq!(trunc_resolvent_rational(&c, 2, 0, 0), Err(Error::ExactRingRequired));
    }

    #[test]
    fn rational_expansion_matches_rn() {
        let spec = varied(2, 1);
        for n in 1..=5usize {
            for i in 0..n {
                for j in 0..n {
                    let r = trunc_resolvent_rational(&spec, n, i, j).unwrap();
                    let s = r.expand(9).unwrap();
                    let want = series_by_powers(&format!("rn:{n}"), i as i64, j as i64, 9, &spec).unwrap();
                    assert!(s.agrees_with(&want));
                    assert_eq!(s.prec(), -9);
                }
            }
        }
    }

    #[test]
    fn relations_vanish_and_corruption_is_detected() {
        let spec = varied(2, 2);
        let rep = relation_residuals(&spec, 10, 3).unwrap();
        assert!(rep.all_zero(), "{:?}", rep.checks.iter().find(|c| !c.zero));
        assert!(rep.checks.iter().all(|c| c.floor <= -9));
        let zero = BandSpec::constant(2, 2, |_| ratio(0, 1)).unwrap();
        assert!(relation_residuals(&zero, 10, 3).unwrap().all_zero());
        let (a, mut a1) = relation_tables(&spec, 10, 3).unwrap();
        let s = &a1[&(0, 0)];
        let bumped = s.add(&Series::monomial(ratio(1, 1), -3));
        a1.insert((0, 0), bumped);
        let rep = relations_from_tables(&spec, 10, 3, &a, &a1).unwrap();
        assert!(!rep.all_zero());
        assert!(rep.max_residual() > 0.0);
    }
}
