//! Closed-form and dense-matrix oracles, computed independently of the library routes.

use bandcf_core::band::BandSpec;
use bandcf_core::ensemble::{exact_expected_diagonal, exact_expected_trace, Distribution, EnsembleSpec};
use bandcf_core::mcf::scalar_double_cf;
use bandcf_core::paths::{weight_polynomial_brute, PathConstraint};
use bandcf_core::resolvent::{series_by_powers, trunc_resolvent_rational};
use bandcf_core::scalar::{ratio, Rational};
use bandcf_core::testgen::{random_spec, rng_for};

fn motzkin(n: usize) -> Vec<i64> {
    let mut m = vec![1i64, 1];
    while m.len() <= n {
        let k = m.len();
        let mut next = m[k - 1];
        for t in 0..=k - 2 {
            next += m[t] * m[k - 2 - t];
        }
        m.push(next);
    }
    m
}

fn catalan(n: usize) -> i64 {
    (0..n as i64).fold(1, |c, k| c * 2 * (2 * k + 1) / (k + 2))
}

#[test]
fn motzkin_and_catalan_counts() {
    let ones = BandSpec::constant(1, 1, |_| ratio(1, 1)).unwrap();
    let hollow = BandSpec::constant(1, 1, |k| ratio((k != 0) as i64, 1)).unwrap();
    let m = motzkin(10);
    let a = series_by_powers("a", 0, 0, 11, &ones).unwrap();
    let c = series_by_powers("a", 0, 0, 11, &hollow).unwrap();
    for len in 0..=10usize {
        let b = weight_polynomial_brute(len, 0, 0, PathConstraint::NonNegative, &ones).unwrap();
        assert_eq!(b, ratio(m[len], 1), "len {len}");
        assert_eq!(a.coefficient(-(len as i64) - 1).unwrap(), ratio(m[len], 1));
        let want = if len % 2 == 0 { catalan(len / 2) } else { 0 };
        assert_eq!(c.coefficient(-(len as i64) - 1).unwrap(), ratio(want, 1));
    }
    assert_eq!(m[6], 51);
}

fn dense(spec: &BandSpec<Rational>, n: i64) -> Vec<Vec<Rational>> {
    (0..n).map(|i| (0..n).map(|j| spec.entry_h(i, j).unwrap()).collect()).collect()
}

fn matmul(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| &a[i][k] * &b[k][j]).sum()).collect())
        .collect()
}

#[test]
fn truncation_resolvent_matches_dense_powers() {
    for seed in 0..6u64 {
        let mut rng = rng_for(seed, 1);
        let (p, q) = (1 + (seed % 2) as i64, 1 + (seed % 3) as i64);
        let spec = random_spec(&mut rng, p, q);
        let n = 4;
        let h = dense(&spec, n);
        let mut pow: Vec<Vec<Rational>> =
            (0..n).map(|i| (0..n).map(|j| ratio((i == j) as i64, 1)).collect()).collect();
        let width = 9;
        let mut by_ell = Vec::new();
        for _ in 0..width {
            by_ell.push(pow.clone());
            pow = matmul(&pow, &h);
        }
        for i in 0..n as usize {
            for j in 0..n as usize {
                let s = series_by_powers(&format!("rn:{n}"), i as i64, j as i64, width, &spec).unwrap();
                let f = trunc_resolvent_rational(&spec, n as usize, i, j).unwrap().expand(width).unwrap();
                for (ell, m) in by_ell.iter().enumerate() {
                    let e = -(ell as i64) - 1;
                    assert_eq!(s.coefficient(e).unwrap(), m[i][j]);
                    assert_eq!(f.coefficient(e).unwrap(), m[i][j]);
                }
            }
        }
    }
}

#[test]
fn uniform_tridiagonal_second_moment() {
    let ens = EnsembleSpec::iid(1, 1, Distribution::uniform(ratio(0, 1), ratio(1, 1)).unwrap()).unwrap();
    for n in [1i64, 2, 5, 12] {
        let t = exact_expected_trace(&ens, n, 2).unwrap();
        assert_eq!(t, ratio(5, 6) - ratio(1, 2 * n));
    }
    assert_eq!(exact_expected_diagonal(&ens, 8, 2, 0).unwrap(), ratio(7, 12));
    assert_eq!(exact_expected_diagonal(&ens, 8, 2, 4).unwrap(), ratio(1, 3) + ratio(1, 2));
}

#[test]
fn rademacher_fourth_moment() {
    // Each label (step, lower height) is an independent ±1; a closed walk
    // contributes 1 exactly when every label occurs an even number of times.
    let ens = EnsembleSpec::iid(1, 1, Distribution::Rademacher).unwrap();
    let w = bandcf_core::ensemble::expected_weight_polynomial(&ens, 4).unwrap();
    let mut count = 0i64;
    for s in 0..81u32 {
        let steps: Vec<i64> = (0..4).map(|t| (s / 3u32.pow(t) % 3) as i64 - 1).collect();
        if steps.iter().sum::<i64>() != 0 {
            continue;
        }
        let mut by_label = std::collections::BTreeMap::new();
        let mut h = 0i64;
        for d in &steps {
            *by_label.entry((*d, h.min(h + d))).or_insert(0u32) += 1;
            h += d;
        }
        if by_label.values().all(|c| c % 2 == 0) {
            count += 1;
        }
    }
    assert_eq!(w, ratio(count, 1));
}

#[test]
fn double_cf_on_constant_tridiagonal() {
    // Constant a^{(±1)} = 1, a^{(0)} = 0: W₀₀ is the two-sided walk generating
    // function, z^{-1}·Σ binom(2k, k) z^{-2k}.
    let spec = BandSpec::constant(1, 1, |k| ratio((k != 0) as i64, 1)).unwrap();
    let s = scalar_double_cf(&spec, 6, 6, 14).unwrap();
    let binom = |n: i64, k: i64| (0..k).fold(1i64, |c, t| c * (n - t) / (t + 1));
    for k in 0..6i64 {
        assert_eq!(s.coefficient(-(2 * k) - 1).unwrap(), ratio(binom(2 * k, k), 1), "k {k}");
        assert_eq!(s.coefficient(-(2 * k) - 2).unwrap(), ratio(0, 1));
    }
}
