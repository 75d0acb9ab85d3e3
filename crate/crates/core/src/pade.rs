//! Contact order between one-sided series and truncation resolvents.

use serde::Serialize;

use crate::band::BandSpec;
use crate::error::{Error, Result};
use crate::resolvent::series_by_powers;
use crate::scalar::Scalar;
use crate::series::Series;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ContactReport {
    pub n: i64,
    pub i: i64,
    pub j: i64,
    #[serde(rename = "predictedL")]
    pub predicted_l: i64,
    pub observed_match: i64,
    pub strict_at_next: bool,
    pub width: usize,
}

impl ContactReport {
    /// observedMatch − (L + 1); nonnegative when the bound holds.
    pub fn slack(&self) -> i64 {
        self.observed_match - self.predicted_l - 1
    }
}

/// L = ⌊(n−1−i)/q⌋ + ⌊(n−1−j)/p⌋ + 1.
pub fn predicted_l(n: i64, i: i64, j: i64, p: i64, q: i64) -> Result<i64> {
    if i < 0 || j < 0 || i >= n || j >= n {
        return Err(Error::IndexOutOfRange(format!("({i},{j}) outside 0..{n}")));
    }
    Ok((n - 1 - i) / q + (n - 1 - j) / p + 1)
}

/// Number of leading coefficients z⁻¹, z⁻², … on which `a` and `b` agree, up to `width`.
pub fn leading_agreement<C: Scalar>(a: &Series<C>, b: &Series<C>, width: usize) -> Result<i64> {
    for e in 1..=width as i64 {
        let (x, y) = (a.coefficient(-e)?, b.coefficient(-e)?);
        let scale = x.magnitude().max(y.magnitude());
        if !x.minus(&y).negligible(scale) {
            return Ok(e - 1);
        }
    }
    Ok(width as i64)
}

pub fn contact_order<C: Scalar>(spec: &BandSpec<C>, n: i64, i: i64, j: i64, width: usize) -> Result<ContactReport> {
    let l = predicted_l(n, i, j, spec.p(), spec.q())?;
    let a = series_by_powers("a", i, j, width, spec)?;
    let r = series_by_powers(&format!("rn:{n}"), i, j, width, spec)?;
    let m = leading_agreement(&a, &r, width)?;
    Ok(ContactReport {
        n,
        i,
        j,
        predicted_l: l,
        observed_match: m,
        strict_at_next: m < width as i64,
        width,
    })
}

/// Width giving every cell of size `n` a strictness probe.
pub fn probe_width(n: i64, p: i64, q: i64) -> usize {
    ((n - 1) / q + (n - 1) / p + 1 + 3) as usize
}

/// Reports for every cell 0 ≤ i, j ≤ n−1, row-major.
pub fn contact_all<C: Scalar>(spec: &BandSpec<C>, n: i64, width: usize) -> Result<Vec<ContactReport>> {
    let mut out = Vec::with_capacity((n * n) as usize);
    for i in 0..n {
        for j in 0..n {
            out.push(contact_order(spec, n, i, j, width)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;
    use crate::testgen::{random_spec, rng_for};

    #[test]
    fn formula_values() {
        assert_eq!(predicted_l(5, 0, 0, 1, 1).unwrap(), 9);
        assert_eq!(predicted_l(5, 4, 4, 1, 1).unwrap(), 1);
        assert_eq!(predicted_l(10, 1, 2, 2, 3).unwrap(), 6);
        assert!(matches!(predicted_l(3, 3, 0, 1, 1), Err(Error::IndexOutOfRange(_))));
    }

    #[test]
    fn tridiagonal_n4() {
        let spec = random_spec(&mut rng_for(7, 0), 1, 1);
        let r = contact_order(&spec, 4, 0, 0, 10).unwrap();
        assert_eq!(r.predicted_l, 7);
        assert!(r.observed_match >= 8);
        let one = contact_order(&spec, 1, 0, 0, 4).unwrap();
        assert!(one.observed_match >= 2);
    }

    #[test]
    fn exact_truncation_matches_everywhere() {
        let spec = BandSpec::from_fn(1, 1, -10, 30, |k, n| {
            if n + k.abs() <= 2 && n >= 0 { ratio(n + 2 * k + 3, 1) } else { ratio(0, 1) }
        })
        .unwrap();
        let r = contact_order(&spec, 3, 0, 1, 12).unwrap();
        assert_eq!(r.observed_match, 12);
        assert!(!r.strict_at_next);
    }
}
