//! The T transform, its inverse, level coefficients and matrix continued fractions.

use std::collections::HashMap;
use std::sync::OnceLock;

use crate::band::BandSpec;
use crate::error::{Error, Result};
use crate::registry::Registry;
use crate::resolvent::{corner_matrix, scalar_power_block, series_by_powers, IndexSet, KProvider};
use crate::scalar::Scalar;
use crate::series::{Series, SeriesMatrix};

fn invert_entry<C: Scalar>(s: &Series<C>, floor: Option<i64>, what: &str) -> Result<Series<C>> {
    s.invert_to(floor).map_err(|e| match e {
        Error::ZeroLeadingCoefficient(m) => Error::ZeroLeadingCoefficient(format!("{what}: {m}")),
        other => other,
    })
}

/// B = T(A) for a q×p matrix A with invertible a₀₀.
pub fn transform_t<C: Scalar>(a: &SeriesMatrix<C>, floor: Option<i64>) -> Result<SeriesMatrix<C>> {
    let (q, p) = (a.rows(), a.cols());
    let inv = invert_entry(a.get(0, 0), floor, "a_{0,0}")?;
    let mut b = SeriesMatrix::zeros(q, p);
    for i in 0..q - 1 {
        for j in 0..p - 1 {
            let cross = a.get(0, j + 1).mul(a.get(i + 1, 0)).mul(&inv);
            b.set(i, j, a.get(i + 1, j + 1).sub(&cross));
        }
    }
    for j in 0..p - 1 {
        b.set(q - 1, j, a.get(0, j + 1).mul(&inv).neg());
    }
    for i in 0..q - 1 {
        b.set(i, p - 1, a.get(i + 1, 0).mul(&inv));
    }
    b.set(q - 1, p - 1, inv);
    Ok(b)
}

/// The pseudo-quotient A = 1/B, inverse of [`transform_t`].
pub fn transform_t_inv<C: Scalar>(b: &SeriesMatrix<C>, floor: Option<i64>) -> Result<SeriesMatrix<C>> {
    let (q, p) = (b.rows(), b.cols());
    let inv = invert_entry(b.get(q - 1, p - 1), floor, "b_{q-1,p-1}")?;
    let mut a = SeriesMatrix::zeros(q, p);
    a.set(0, 0, inv.clone());
    for j in 0..p - 1 {
        a.set(0, j + 1, b.get(q - 1, j).mul(&inv).neg());
    }
    for i in 0..q - 1 {
        a.set(i + 1, 0, b.get(i, p - 1).mul(&inv));
    }
    for i in 0..q - 1 {
        for j in 0..p - 1 {
            let cross = b.get(i, p - 1).mul(b.get(q - 1, j)).mul(&inv);
            a.set(i + 1, j + 1, b.get(i, j).sub(&cross));
        }
    }
    Ok(a)
}

/// Coefficients of one continued-fraction level: X ↦ 1/(lin + left·X·right).
#[derive(Clone, Debug, PartialEq)]
pub struct CFLevel<C> {
    pub flavor: &'static str,
    pub k: usize,
    pub lin: SeriesMatrix<C>,
    pub left: SeriesMatrix<C>,
    pub right: SeriesMatrix<C>,
}

/// Level built from a diagonal entry `center`, the entries `up(c)` to its
/// right (c = 1..=q) and `down(r)` below it (r = 1..=p).
pub fn level_from_entries<C: Scalar>(
    flavor: &'static str,
    k: usize,
    p: usize,
    q: usize,
    center: Series<C>,
    up: impl Fn(usize) -> Result<Series<C>>,
    down: impl Fn(usize) -> Result<Series<C>>,
) -> Result<CFLevel<C>> {
    let mut lin = SeriesMatrix::zeros(q, p);
    lin.set(q - 1, p - 1, Series::monomial(C::one(), 1).sub(&center));
    let mut left = SeriesMatrix::identity(q);
    for c in 0..q {
        left.set(q - 1, c, up(c + 1)?.neg());
    }
    let mut right = SeriesMatrix::identity(p);
    for r in 0..p {
        right.set(r, p - 1, down(r + 1)?);
    }
    Ok(CFLevel { flavor, k, lin, left, right })
}

fn level_from_matrix<C: Scalar>(
    flavor: &'static str,
    k: usize,
    spec: &BandSpec<C>,
    entry: impl Fn(i64, i64) -> Result<C>,
) -> Result<CFLevel<C>> {
    let kk = k as i64;
    level_from_entries(
        flavor,
        k,
        spec.p() as usize,
        spec.q() as usize,
        Series::constant(entry(kk, kk)?),
        |c| Ok(Series::constant(entry(kk, kk + c as i64)?)),
        |r| Ok(Series::constant(entry(kk + r as i64, kk)?)),
    )
}

/// Folds the levels innermost-out over `tail`.
pub fn eval_cf<C: Scalar>(
    levels: &[CFLevel<C>],
    tail: &SeriesMatrix<C>,
    floor: Option<i64>,
) -> Result<SeriesMatrix<C>> {
    let mut x = tail.clone();
    for level in levels.iter().rev() {
        let y = level.lin.mat_add(&level.left.mat_mul(&x)?.mat_mul(&level.right)?)?;
        x = transform_t_inv(&y, floor).map_err(|e| match e {
            Error::ZeroLeadingCoefficient(m) => {
                Error::ZeroLeadingCoefficient(format!("level {}: {m}", level.k))
            }
            other => other,
        })?;
    }
    Ok(x)
}

/// Inputs shared by the level schemes; K and the V table are built on first use.
pub struct CfContext<C> {
    pub spec: BandSpec<C>,
    pub width: usize,
    pub n: Option<i64>,
    k: OnceLock<Result<KProvider<C>>>,
    v: OnceLock<Result<HashMap<(i64, i64), Series<C>>>>,
}

impl<C: Scalar> CfContext<C> {
    pub fn new(spec: BandSpec<C>, width: usize) -> Self {
        CfContext { spec, width, n: None, k: OnceLock::new(), v: OnceLock::new() }
    }

    pub fn with_n(mut self, n: i64) -> Self {
        self.n = Some(n);
        self
    }

    pub fn floor(&self) -> i64 {
        -(self.width as i64)
    }

    pub fn k_provider(&self) -> Result<&KProvider<C>> {
        self.k
            .get_or_init(|| KProvider::build(&self.spec, self.width))
            .as_ref()
            .map_err(Clone::clone)
    }

    /// V_{−l,−m} for 1 ≤ l ≤ p, 1 ≤ m ≤ q.
    pub fn v_table(&self) -> Result<&HashMap<(i64, i64), Series<C>>> {
        self.v
            .get_or_init(|| {
                let (p, q) = (self.spec.p(), self.spec.q());
                let mut t = HashMap::new();
                for m in 1..=q {
                    let col = scalar_power_block(&self.spec, IndexSet::NEGATIVE, (-p, -1), -m, self.width)?;
                    for (r, s) in col.into_iter().enumerate() {
                        t.insert((r as i64 - p, -m), s);
                    }
                }
                Ok(t)
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    fn need_n(&self) -> Result<i64> {
        match self.n {
            Some(n) if n >= 1 => Ok(n),
            _ => Err(Error::Invalid("the rho scheme needs a truncation size n ≥ 1".into())),
        }
    }
}

/// One flavor of matrix continued fraction.
pub trait CfFlavor<C: Scalar>: Send + Sync {
    fn level(&self, k: usize, ctx: &CfContext<C>) -> Result<CFLevel<C>>;
    /// The exact remainder after `k` levels.
    fn exact_tail(&self, k: usize, ctx: &CfContext<C>) -> Result<SeriesMatrix<C>>;
    /// The matrix the fraction represents, computed without it.
    fn target(&self, ctx: &CfContext<C>) -> Result<SeriesMatrix<C>>;
}

struct Alpha;
struct Beta;
struct Rho;
struct Nu;

impl<C: Scalar> CfFlavor<C> for Alpha {
    fn level(&self, k: usize, ctx: &CfContext<C>) -> Result<CFLevel<C>> {
        level_from_matrix("alpha", k, &ctx.spec, |i, j| ctx.spec.entry_h(i, j))
    }
    fn exact_tail(&self, k: usize, ctx: &CfContext<C>) -> Result<SeriesMatrix<C>> {
        corner_matrix(&ctx.spec.shift(k as i64), "a", ctx.width)
    }
    fn target(&self, ctx: &CfContext<C>) -> Result<SeriesMatrix<C>> {
        corner_matrix(&ctx.spec, "a", ctx.width)
    }
}

/// d_k^{(i)} (i = offset ≥ 0 above the diagonal) or d_k^{(−j)} (below).
fn d_coefficient<C: Scalar>(ctx: &CfContext<C>, k: i64, up: i64, down: i64) -> Result<Series<C>> {
    let spec = &ctx.spec;
    let (p, q) = (spec.p(), spec.q());
    let v = ctx.v_table()?;
    let diag = up - down;
    let mut d = Series::constant(spec.a(diag, k)?);
    for l in 1..=p - k - down {
        for m in 1..=q - k - up {
            let c = spec.a(-(l + k + down), -l)?.times(&spec.a(m + k + up, -m)?);
            d = d.add(&v[&(-l, -m)].scale(&c));
        }
    }
    Ok(d)
}

impl<C: Scalar> CfFlavor<C> for Beta {
    fn level(&self, k: usize, ctx: &CfContext<C>) -> Result<CFLevel<C>> {
        let (p, q) = (ctx.spec.p() as usize, ctx.spec.q() as usize);
        if k >= p.min(q) {
            let mut l = Alpha.level(k, ctx)?;
            l.flavor = "beta";
            return Ok(l);
        }
        let kk = k as i64;
        level_from_entries(
            "beta",
            k,
            p,
            q,
            d_coefficient(ctx, kk, 0, 0)?,
            |i| d_coefficient(ctx, kk, i as i64, 0),
            |j| d_coefficient(ctx, kk, 0, j as i64),
        )
    }
    fn exact_tail(&self, k: usize, ctx: &CfContext<C>) -> Result<SeriesMatrix<C>> {
        let kr = ctx.k_provider()?.shifted(k as i64);
        let (q, p) = (ctx.spec.q() as usize, ctx.spec.p() as usize);
        let mut cols = Vec::with_capacity(p);
        for j in 0..p as i64 {
            cols.push(kr.resolvent_block((0, q as i64 - 1), j, ctx.width)?);
        }
        Ok(SeriesMatrix::from_fn(q, p, |i, j| cols[j][i].clone()))
    }
    fn target(&self, ctx: &CfContext<C>) -> Result<SeriesMatrix<C>> {
        corner_matrix(&ctx.spec, "w", ctx.width)
    }
}

/// Spec of Hₙ padded with zeros: labels reaching height n or beyond vanish.
pub fn padded_spec<C: Scalar>(spec: &BandSpec<C>, n: i64) -> Result<BandSpec<C>> {
    let mut out = BandSpec::from_fn(spec.p(), spec.q(), 0, n - 1, |_, _| C::zero())?;
    for k in spec.params().diagonals() {
        for m in 0..n - k.abs() {
            out = out.with_coefficient(k, m, spec.a(k, m)?)?;
        }
    }
    let windows = out
        .windows()
        .iter()
        .map(|w| crate::band::CoefficientWindow { default: Some(C::zero()), ..w.clone() })
        .collect();
    BandSpec::new(out.params(), windows)
}

impl<C: Scalar> CfFlavor<C> for Rho {
    fn level(&self, k: usize, ctx: &CfContext<C>) -> Result<CFLevel<C>> {
        let n = ctx.need_n()?;
        let kk = k as i64;
        let spec = &ctx.spec;
        let b = |diag: i64| -> Result<Series<C>> {
            if kk + diag.abs() <= n - 1 {
                Ok(Series::constant(spec.a(diag, kk)?))
            } else {
                Ok(Series::exact_zero())
            }
        };
        level_from_entries(
            "rho",
            k,
            spec.p() as usize,
            spec.q() as usize,
            b(0)?,
            |i| b(i as i64),
            |j| b(-(j as i64)),
        )
    }
    fn exact_tail(&self, k: usize, ctx: &CfContext<C>) -> Result<SeriesMatrix<C>> {
        let n = ctx.need_n()?;
        corner_matrix(&padded_spec(&ctx.spec, n)?.shift(k as i64), "a", ctx.width)
    }
    fn target(&self, ctx: &CfContext<C>) -> Result<SeriesMatrix<C>> {
        let n = ctx.need_n()?;
        let (q, p) = (ctx.spec.q() as usize, ctx.spec.p() as usize);
        let family = format!("rn:{n}");
        SeriesMatrix::try_from_fn(q, p, |i, j| {
            let (i, j) = (i as i64, j as i64);
            if i < n && j < n {
                series_by_powers(&family, i, j, ctx.width, &ctx.spec)
            } else if i == j {
                Ok(Series::monomial(C::one(), -1))
            } else {
                Ok(Series::exact_zero())
            }
        })
    }
}

impl<C: Scalar> CfFlavor<C> for Nu {
    fn level(&self, k: usize, ctx: &CfContext<C>) -> Result<CFLevel<C>> {
        let e = ctx.spec.reflect();
        level_from_matrix("nu", k, &e, |i, j| e.entry_h(i, j))
    }
    fn exact_tail(&self, k: usize, ctx: &CfContext<C>) -> Result<SeriesMatrix<C>> {
        corner_matrix(&ctx.spec.reflect().shift(k as i64), "a", ctx.width)
    }
    fn target(&self, ctx: &CfContext<C>) -> Result<SeriesMatrix<C>> {
        let (q, p) = (ctx.spec.q() as usize, ctx.spec.p() as usize);
        SeriesMatrix::try_from_fn(q, p, |i, j| {
            series_by_powers("v", -(j as i64) - 1, -(i as i64) - 1, ctx.width, &ctx.spec)
        })
    }
}

pub fn flavor_registry<C: Scalar>() -> Registry<dyn CfFlavor<C>> {
    let r: Registry<dyn CfFlavor<C>> = Registry::new("continued-fraction flavor");
    r.with("alpha", Box::new(Alpha))
        .with("beta", Box::new(Beta))
        .with("rho", Box::new(Rho))
        .with("nu", Box::new(Nu))
}

pub fn level_coefficients<C: Scalar>(flavor: &str, k: usize, ctx: &CfContext<C>) -> Result<CFLevel<C>> {
    flavor_registry::<C>().get(flavor)?.level(k, ctx)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tail {
    Exact,
    Zero,
    DiagOneOverZ,
}

impl Tail {
    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "exact" => Ok(Tail::Exact),
            "zero" => Ok(Tail::Zero),
            "diag" => Ok(Tail::DiagOneOverZ),
            _ => Err(Error::UnknownName(format!("tail {text:?}"))),
        }
    }
}

/// Tail matrix after `k` levels.
pub fn tail_matrix<C: Scalar>(flavor: &str, tail: Tail, k: usize, ctx: &CfContext<C>) -> Result<SeriesMatrix<C>> {
    let (q, p) = (ctx.spec.q() as usize, ctx.spec.p() as usize);
    match tail {
        Tail::Exact => flavor_registry::<C>().get(flavor)?.exact_tail(k, ctx),
        Tail::Zero => Ok(SeriesMatrix::zeros(q, p)),
        Tail::DiagOneOverZ => Ok(SeriesMatrix::diagonal(q, p, Series::monomial(C::one(), -1))),
    }
}

/// Evaluates `levels` levels of `flavor` over the chosen tail.
pub fn run_cf<C: Scalar>(flavor: &str, levels: usize, tail: Tail, ctx: &CfContext<C>) -> Result<SeriesMatrix<C>> {
    let reg = flavor_registry::<C>();
    let f = reg.get(flavor)?;
    let coeffs = (0..levels).map(|k| f.level(k, ctx)).collect::<Result<Vec<_>>>()?;
    let t = tail_matrix(flavor, tail, levels, ctx)?;
    eval_cf(&coeffs, &t, Some(ctx.floor()))
}

/// Target matrix of `flavor` (F, G, Rₙ or V).
pub fn cf_target<C: Scalar>(flavor: &str, ctx: &CfContext<C>) -> Result<SeriesMatrix<C>> {
    flavor_registry::<C>().get(flavor)?.target(ctx)
}

/// The p = q = 1 double continued fraction for W₀₀: the main branch runs
/// `depth_plus` levels upward, the V₋₁,₋₁ branch `depth_minus` levels downward.
pub fn scalar_double_cf<C: Scalar>(
    spec: &BandSpec<C>,
    depth_plus: usize,
    depth_minus: usize,
    width: usize,
) -> Result<Series<C>> {
    if spec.p() != 1 || spec.q() != 1 {
        return Err(Error::ShapeMismatch(format!(
            "double continued fraction needs p = q = 1 (got p={}, q={})",
            spec.p(),
            spec.q()
        )));
    }
    if depth_plus == 0 {
        return Err(Error::Invalid("depth_plus must be ≥ 1".into()));
    }
    let floor = -(width as i64);
    let couple = |m: i64| -> Result<C> { Ok(spec.a(-1, m)?.times(&spec.a(1, m)?)) };
    let step = |m: i64, deeper: Series<C>, coupling: i64| -> Result<Series<C>> {
        let mut d = Series::z_minus(&spec.a(0, m)?);
        if !deeper.is_zero() {
            d = d.sub(&deeper.scale(&couple(coupling)?));
        }
        Ok(d.invert_to(Some(floor))?.truncate(floor))
    };
    let mut v = Series::exact_zero();
    for m in (1..=depth_minus as i64).rev() {
        v = step(-m, v, -(m + 1))?;
    }
    let mut y = Series::exact_zero();
    for k in (1..depth_plus as i64).rev() {
        y = step(k, y, k)?;
    }
    let mut d = Series::z_minus(&spec.a(0, 0)?);
    if !v.is_zero() {
        d = d.sub(&v.scale(&couple(-1)?));
    }
    if !y.is_zero() {
        d = d.sub(&y.scale(&couple(0)?));
    }
    Ok(d.invert_to(Some(floor))?.truncate(floor))
}
