//! Brute-force enumeration of weighted lattice paths.

use std::collections::BTreeMap;
use std::fmt;

use crate::band::{BandParameters, BandSpec};
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use crate::scalar::{Rational, Scalar};

/// Default cap on the number of enumerated paths.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PathConstraint {
    /// Never below height 0.
    NonNegative,
    Free,
    /// Never above height −1.
    BelowMinusOne,
    /// Confined to 0..=ceiling.
    Band { ceiling: i64 },
}

impl PathConstraint {
    /// The strip 0..=n−1.
    pub fn band(n: i64) -> Result<Self> {
        if n < 1 {
            return Err(Error::Invalid(format!("band constraint needs n ≥ 1 (got {n})")));
        }
        Ok(PathConstraint::Band { ceiling: n - 1 })
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "d" => Ok(PathConstraint::NonNegative),
            "p" => Ok(PathConstraint::Free),
            "dhat" => Ok(PathConstraint::BelowMinusOne),
            _ => match text.strip_prefix("band:") {
                Some(n) => Self::band(
                    n.parse().map_err(|_| Error::Invalid(format!("bad band size {n:?}")))?,
                ),
                None => Err(Error::UnknownName(format!("path constraint {text:?}"))),
            },
        }
    }

    /// Inclusive height bounds.
    pub fn bounds(&self) -> (Option<i64>, Option<i64>) {
        match *self {
            PathConstraint::NonNegative => (Some(0), None),
            PathConstraint::Free => (None, None),
            PathConstraint::BelowMinusOne => (None, Some(-1)),
            PathConstraint::Band { ceiling } => (Some(0), Some(ceiling)),
        }
    }

    pub fn admits(&self, h: i64) -> bool {
        let (lo, hi) = self.bounds();
        lo.is_none_or(|lo| h >= lo) && hi.is_none_or(|hi| h <= hi)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LatticePath {
    pub heights: Vec<i64>,
}

impl LatticePath {
    pub fn new(heights: Vec<i64>) -> Self {
        assert!(!heights.is_empty(), "a path has at least one vertex");
        LatticePath { heights }
    }

    /// Number of steps.
    pub fn len(&self) -> usize {
        self.heights.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn steps(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        self.heights.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn is_legal(&self, params: BandParameters) -> bool {
        self.steps().all(|(a, b)| (-params.p..=params.q).contains(&(b - a)))
    }

    pub fn satisfies(&self, c: PathConstraint) -> bool {
        self.heights.iter().all(|&h| c.admits(h))
    }
}

impl fmt::Display for LatticePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.heights.iter().map(i64::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

/// Label (k, m) of the step a → b: weight a^{(k)}_m.
pub fn step_label(a: i64, b: i64) -> (i64, i64) {
    (b - a, a.min(b))
}

/// Fewest steps from `from` to `to`.
pub fn min_steps(from: i64, to: i64, params: BandParameters) -> i64 {
    if to >= from {
        (to - from + params.q - 1) / params.q
    } else {
        (from - to + params.p - 1) / params.p
    }
}

struct Walk<'a, F> {
    target: i64,
    c: PathConstraint,
    params: BandParameters,
    budget: u64,
    found: u64,
    heights: Vec<i64>,
    visit: &'a mut F,
}

impl<F: FnMut(&[i64]) -> Result<()>> Walk<'_, F> {
    fn go(&mut self, remaining: i64) -> Result<()> {
        let h = *self.heights.last().expect("nonempty");
        if remaining == 0 {
            if h == self.target {
                self.found += 1;
                if self.found > self.budget {
                    return Err(Error::BudgetExceeded { limit: self.budget });
                }
                (self.visit)(&self.heights)?;
            }
            return Ok(());
        }
        for d in -self.params.p..=self.params.q {
            let next = h + d;
            if !self.c.admits(next) || min_steps(next, self.target, self.params) > remaining - 1 {
                continue;
            }
            self.heights.push(next);
            let r = self.go(remaining - 1);
            self.heights.pop();
            r?;
        }
        Ok(())
    }
}

/// Calls `visit` on every path of length `len` from `i` to `j` under `c`, in
/// lexicographic order of height sequences. Returns the number visited.
pub fn visit_paths<F: FnMut(&[i64]) -> Result<()>>(
    len: usize,
    i: i64,
    j: i64,
    c: PathConstraint,
    params: BandParameters,
    budget: u64,
    mut visit: F,
) -> Result<u64> {
    if !c.admits(i) || !c.admits(j) || min_steps(i, j, params) > len as i64 {
        return Ok(0);
    }
    let mut walk = Walk {
        target: j,
        c,
        params,
        budget,
        found: 0,
        heights: vec![i],
        visit: &mut visit,
    };
    walk.go(len as i64)?;
    Ok(walk.found)
}

pub fn enumerate_paths(
    len: usize,
    i: i64,
    j: i64,
    c: PathConstraint,
    params: BandParameters,
) -> Result<Vec<LatticePath>> {
    let mut out = Vec::new();
    visit_paths(len, i, j, c, params, DEFAULT_BUDGET, |h| {
        out.push(LatticePath::new(h.to_vec()));
        Ok(())
    })?;
    Ok(out)
}

pub fn path_weight<C: Scalar>(path: &LatticePath, spec: &BandSpec<C>) -> Result<C> {
    let mut w = C::one();
    for (a, b) in path.steps() {
        let (k, m) = step_label(a, b);
        if k < -spec.p() || k > spec.q() {
            return Err(Error::Invalid(format!("illegal step {a} → {b}")));
        }
        w = w.times(&spec.a(k, m)?);
    }
    Ok(w)
}

pub fn weight_polynomial_brute<C: Scalar>(
    len: usize,
    i: i64,
    j: i64,
    c: PathConstraint,
    spec: &BandSpec<C>,
) -> Result<C> {
    weight_polynomial_brute_with_budget(len, i, j, c, spec, DEFAULT_BUDGET)
}

/// Sum of path weights, carrying prefix products down the search tree.
pub fn weight_polynomial_brute_with_budget<C: Scalar>(
    len: usize,
    i: i64,
    j: i64,
    c: PathConstraint,
    spec: &BandSpec<C>,
    budget: u64,
) -> Result<C> {
    struct Acc<'a, C> {
        spec: &'a BandSpec<C>,
        target: i64,
        c: PathConstraint,
        budget: u64,
        found: u64,
        total: C,
    }
    impl<C: Scalar> Acc<'_, C> {
        fn go(&mut self, h: i64, remaining: i64, prefix: &C) -> Result<()> {
            if remaining == 0 {
                if h == self.target {
                    self.found += 1;
                    if self.found > self.budget {
                        return Err(Error::BudgetExceeded { limit: self.budget });
                    }
                    self.total = self.total.plus(prefix);
                }
                return Ok(());
            }
            let params = self.spec.params();
            for d in -params.p..=params.q {
                let next = h + d;
                if !self.c.admits(next) || min_steps(next, self.target, params) > remaining - 1 {
                    continue;
                }
                let (k, m) = step_label(h, next);
                let w = prefix.times(&self.spec.a(k, m)?);
                self.go(next, remaining - 1, &w)?;
            }
            Ok(())
        }
    }
    if !c.admits(i) || !c.admits(j) || min_steps(i, j, spec.params()) > len as i64 {
        return Ok(C::zero());
    }
    let mut acc = Acc { spec, target: j, c, budget, found: 0, total: C::zero() };
    acc.go(i, len as i64, &C::one())?;
    Ok(acc.total)
}

/// Path sums from `i` for every length up to `max_len` and every endpoint in
/// `targets` (inclusive), from one walk over the prefix tree. Indexed [len][j − targets.0].
pub fn weight_polynomial_table<C: Scalar>(
    max_len: usize,
    i: i64,
    targets: (i64, i64),
    c: PathConstraint,
    spec: &BandSpec<C>,
) -> Result<Vec<Vec<C>>> {
    struct Tree<'a, C> {
        spec: &'a BandSpec<C>,
        c: PathConstraint,
        targets: (i64, i64),
        max_len: i64,
        table: Vec<Vec<C>>,
    }
    impl<C: Scalar> Tree<'_, C> {
        fn distance(&self, h: i64) -> i64 {
            let params = self.spec.params();
            if h < self.targets.0 {
                min_steps(h, self.targets.0, params)
            } else if h > self.targets.1 {
                min_steps(h, self.targets.1, params)
            } else {
                0
            }
        }

        fn go(&mut self, h: i64, depth: i64, prefix: &C) -> Result<()> {
            if (self.targets.0..=self.targets.1).contains(&h) {
                let slot = &mut self.table[depth as usize][(h - self.targets.0) as usize];
                *slot = slot.plus(prefix);
            }
            if depth == self.max_len {
                return Ok(());
            }
            let params = self.spec.params();
            for d in -params.p..=params.q {
                let next = h + d;
                if !self.c.admits(next) || self.distance(next) > self.max_len - depth - 1 {
                    continue;
                }
                let (k, m) = step_label(h, next);
                let w = prefix.times(self.spec.window(k).get_ref(m)?);
                self.go(next, depth + 1, &w)?;
            }
            Ok(())
        }
    }
    let cols = (targets.1 - targets.0 + 1).max(0) as usize;
    let mut tree = Tree {
        spec,
        c,
        targets,
        max_len: max_len as i64,
        table: vec![vec![C::zero(); cols]; max_len + 1],
    };
    if c.admits(i) && tree.distance(i) <= max_len as i64 {
        tree.go(i, 0, &C::one())?;
    }
    Ok(tree.table)
}

/// [`weight_polynomial_table`] over the rationals, run on integers after clearing
/// denominators. `None` when an intermediate value leaves i128.
pub fn weight_polynomial_table_scaled(
    max_len: usize,
    i: i64,
    targets: (i64, i64),
    c: PathConstraint,
    spec: &BandSpec<Rational>,
) -> Result<Option<Vec<Vec<Rational>>>> {
    let mut lcd = BigInt::one();
    for w in spec.windows() {
        for v in w.values.iter().chain(w.default.iter()) {
            lcd = lcd.lcm(v.denom());
        }
    }
    let Some(d) = lcd.to_i128() else { return Ok(None) };
    let scaled = |v: &Rational| (v * Rational::from_integer(lcd.clone())).to_integer().to_i128();
    let mut windows = Vec::new();
    for w in spec.windows() {
        let values: Option<Vec<i128>> = w.values.iter().map(scaled).collect();
        let default = match &w.default {
            Some(v) => Some(scaled(v)),
            None => None,
        };
        match (values, default) {
            (Some(vals), None) => windows.push((w.lo, vals, None)),
            (Some(vals), Some(Some(x))) => windows.push((w.lo, vals, Some(x))),
            _ => return Ok(None),
        }
    }

    struct Tree<'a> {
        params: BandParameters,
        windows: &'a [(i64, Vec<i128>, Option<i128>)],
        c: PathConstraint,
        targets: (i64, i64),
        max_len: i64,
        table: Vec<Vec<i128>>,
        overflow: bool,
    }
    impl Tree<'_> {
        fn coefficient(&self, k: i64, m: i64) -> Result<i128> {
            let (lo, vals, default) = &self.windows[(k + self.params.p) as usize];
            let t = m - lo;
            if t >= 0 && (t as usize) < vals.len() {
                return Ok(vals[t as usize]);
            }
            default.ok_or(Error::WindowMiss { k, n: m })
        }

        fn distance(&self, h: i64) -> i64 {
            if h < self.targets.0 {
                min_steps(h, self.targets.0, self.params)
            } else if h > self.targets.1 {
                min_steps(h, self.targets.1, self.params)
            } else {
                0
            }
        }

        fn go(&mut self, h: i64, depth: i64, prefix: i128) -> Result<()> {
            if self.overflow {
                return Ok(());
            }
            if (self.targets.0..=self.targets.1).contains(&h) {
                let slot = &mut self.table[depth as usize][(h - self.targets.0) as usize];
                match slot.checked_add(prefix) {
                    Some(v) => *slot = v,
                    None => {
                        self.overflow = true;
                        return Ok(());
                    }
                }
            }
            if depth == self.max_len {
                return Ok(());
            }
            for step in -self.params.p..=self.params.q {
                let next = h + step;
                if !self.c.admits(next) || self.distance(next) > self.max_len - depth - 1 {
                    continue;
                }
                let (k, m) = step_label(h, next);
                match prefix.checked_mul(self.coefficient(k, m)?) {
                    Some(w) => self.go(next, depth + 1, w)?,
                    None => {
                        self.overflow = true;
                        return Ok(());
                    }
                }
            }
            Ok(())
        }
    }
    let cols = (targets.1 - targets.0 + 1).max(0) as usize;
    let mut tree = Tree {
        params: spec.params(),
        windows: &windows,
        c,
        targets,
        max_len: max_len as i64,
        table: vec![vec![0; cols]; max_len + 1],
        overflow: false,
    };
    if c.admits(i) && tree.distance(i) <= max_len as i64 {
        tree.go(i, 0, 1)?;
    }
    if tree.overflow {
        return Ok(None);
    }
    let mut scale = BigInt::one();
    let mut out = Vec::with_capacity(max_len + 1);
    for row in tree.table {
        out.push(row.into_iter().map(|x| Rational::new(BigInt::from(x), scale.clone())).collect());
        scale *= BigInt::from(d);
    }
    Ok(Some(out))
}

/// Reverse, negate, then shift down by one.
pub fn reflect_path(path: &LatticePath) -> LatticePath {
    LatticePath::new(path.heights.iter().rev().map(|h| -h - 1).collect())
}

pub type LabelMultiset = BTreeMap<(i64, i64), usize>;

pub fn label_multiset(path: &LatticePath) -> LabelMultiset {
    let mut m = LabelMultiset::new();
    for (a, b) in path.steps() {
        *m.entry(step_label(a, b)).or_insert(0) += 1;
    }
    m
}

pub fn height_range(path: &LatticePath) -> (i64, i64) {
    let lo = *path.heights.iter().min().expect("nonempty");
    let hi = *path.heights.iter().max().expect("nonempty");
    (lo, hi)
}
