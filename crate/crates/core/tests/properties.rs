use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::Rng;

use bandcf_core::band::BandSpec;
use bandcf_core::mcf::{transform_t, transform_t_inv};
use bandcf_core::paths::{
    enumerate_paths, path_weight, reflect_path, weight_polynomial_brute, LatticePath, PathConstraint,
};
use bandcf_core::pade::predicted_l;
use bandcf_core::ensemble::middle_margin;
use bandcf_core::resolvent::series_by_powers;
use bandcf_core::scalar::{ratio, Rational};
use bandcf_core::series::Series;
use bandcf_core::testgen::{random_params, random_series, random_series_matrix, random_spec, rng_for};

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

fn series_triple(seed: u64) -> (Series<Rational>, Series<Rational>, Series<Rational>) {
    let mut rng = rng_for(seed, 0);
    let one = |rng: &mut rand_chacha::ChaCha8Rng| {
        let hi = rng.gen_range(-2..=2);
        let w = rng.gen_range(3..=9);
        random_series(rng, hi, w)
    };
    (one(&mut rng), one(&mut rng), one(&mut rng))
}

fn floor_of(xs: &[&Series<Rational>]) -> i64 {
    xs.iter().map(|s| s.prec()).max().unwrap()
}

/// Same known coefficients, plus arbitrary ones below the precision floor.
fn extend_below(s: &Series<Rational>, extra: usize, seed: u64) -> Series<Rational> {
    let mut rng = rng_for(seed, 99);
    let mut coeffs = s.coeffs().to_vec();
    for _ in 0..extra {
        coeffs.push(ratio(rng.gen_range(-9..=9), rng.gen_range(1..=4)));
    }
    Series::new(s.hi(), coeffs)
}

/// Coefficients at exponents ≥ r.prec() are identical in r and r2.
fn same_above_floor(r: &Series<Rational>, r2: &Series<Rational>) -> bool {
    (r.prec()..=r.hi().max(r2.hi())).all(|e| r.coefficient(e).unwrap() == r2.coefficient(e).unwrap())
}

proptest! {
    #![proptest_config(cfg(64))]

    #[test]
    fn ring_axioms_to_precision(seed in any::<u64>()) {
        let (a, b, c) = series_triple(seed);
        let ab = a.mul(&b);
        let ba = b.mul(&a);
        prop_assert!(ab.equal_to_precision(&ba, floor_of(&[&ab, &ba])).unwrap());
        let s1 = a.add(&b);
        let s2 = b.add(&a);
        prop_assert!(s1.equal_to_precision(&s2, floor_of(&[&s1, &s2])).unwrap());
        let l = ab.mul(&c);
        let r = a.mul(&b.mul(&c));
        prop_assert!(l.equal_to_precision(&r, floor_of(&[&l, &r])).unwrap());
        let l = a.add(&b).add(&c);
        let r = a.add(&b.add(&c));
        prop_assert!(l.equal_to_precision(&r, floor_of(&[&l, &r])).unwrap());
        let l = a.mul(&b.add(&c));
        let r = ab.add(&a.mul(&c));
        prop_assert!(l.equal_to_precision(&r, floor_of(&[&l, &r])).unwrap());
    }

    #[test]
    fn invert_is_two_sided(seed in any::<u64>()) {
        let (a, _, _) = series_triple(seed);
        let inv = a.invert().unwrap();
        let one = Series::constant(ratio(1, 1));
        for prod in [a.mul(&inv), inv.mul(&a)] {
            prop_assert!(prod.equal_to_precision(&one, prod.prec()).unwrap());
        }
        let back = inv.invert().unwrap();
        prop_assert!(back.equal_to_precision(&a, floor_of(&[&back, &a])).unwrap());
    }

    #[test]
    fn precision_is_never_overclaimed(seed in any::<u64>(), extra in 1usize..5) {
        let (a, b, _) = series_triple(seed);
        let (a2, b2) = (extend_below(&a, extra, seed), extend_below(&b, extra, seed ^ 1));
        prop_assert!(same_above_floor(&a.add(&b), &a2.add(&b2)));
        prop_assert!(same_above_floor(&a.mul(&b), &a2.mul(&b2)));
        prop_assert!(same_above_floor(&a.invert().unwrap(), &a2.invert().unwrap()));
        prop_assert!(same_above_floor(&a.div(&b, None).unwrap(), &a2.div(&b2, None).unwrap()));
    }

    #[test]
    fn t_transform_respects_precision(seed in any::<u64>()) {
        let mut rng = rng_for(seed, 3);
        let (q, p) = (rng.gen_range(1..=3usize), rng.gen_range(1..=3usize));
        let a = random_series_matrix(&mut rng, q, p, (0, 0), -1, -1, 6);
        let a2 = bandcf_core::series::SeriesMatrix::from_fn(q, p, |i, j| extend_below(a.get(i, j), 3, seed + (i * 3 + j) as u64));
        let (b, b2) = (transform_t(&a, None).unwrap(), transform_t(&a2, None).unwrap());
        for i in 0..q {
            for j in 0..p {
                prop_assert!(same_above_floor(b.get(i, j), b2.get(i, j)));
            }
        }
    }

    #[test]
    fn t_round_trip(seed in any::<u64>()) {
        let mut rng = rng_for(seed, 4);
        let (q, p) = (rng.gen_range(1..=3usize), rng.gen_range(1..=3usize));
        let a = random_series_matrix(&mut rng, q, p, (0, 0), -1, -1, 8);
        prop_assert!(transform_t_inv(&transform_t(&a, None).unwrap(), None).unwrap().agrees_with(&a));
        let b = random_series_matrix(&mut rng, q, p, (q - 1, p - 1), 1, 0, 8);
        prop_assert!(transform_t(&transform_t_inv(&b, None).unwrap(), None).unwrap().agrees_with(&b));
    }

    #[test]
    fn matrix_product_is_associative(seed in any::<u64>()) {
        let mut rng = rng_for(seed, 5);
        let a = random_series_matrix(&mut rng, 2, 3, (0, 0), 0, 0, 6);
        let b = random_series_matrix(&mut rng, 3, 2, (0, 0), 0, -1, 6);
        let c = random_series_matrix(&mut rng, 2, 2, (0, 0), -1, -1, 6);
        let l = a.mat_mul(&b).unwrap().mat_mul(&c).unwrap();
        let r = a.mat_mul(&b.mat_mul(&c).unwrap()).unwrap();
        prop_assert!(l.agrees_with(&r));
    }
}

fn spec_for(seed: u64) -> BandSpec<Rational> {
    let mut rng = rng_for(seed, 7);
    let (p, q) = random_params(&mut rng, 3);
    random_spec(&mut rng, p, q)
}

proptest! {
    #![proptest_config(cfg(48))]

    #[test]
    fn band_structure_and_shift(seed in any::<u64>(), k in 0i64..5) {
        let spec = spec_for(seed);
        let (p, q) = (spec.p(), spec.q());
        for i in 0..10 {
            for j in 0..10 {
                let h = spec.entry_h(i, j).unwrap();
                if j - i > q || i - j > p {
                    prop_assert_eq!(h, ratio(0, 1));
                }
                prop_assert_eq!(spec.shift(k).entry_h(i, j).unwrap(), spec.entry_h(i + k, j + k).unwrap());
                prop_assert_eq!(spec.entry_w(i - 5, j - 5).unwrap(), spec.a(j - i, i.min(j) - 5).unwrap());
            }
        }
    }

    #[test]
    fn reflect_is_an_involution(seed in any::<u64>()) {
        let spec = spec_for(seed);
        let twice = spec.reflect().reflect();
        for k in -spec.p()..=spec.q() {
            for n in -40..40 {
                prop_assert_eq!(twice.a(k, n).unwrap(), spec.a(k, n).unwrap());
            }
        }
    }

    #[test]
    fn reflected_paths_transport_weights(seed in any::<u64>(), len in 0usize..7, i in 0i64..4, j in 0i64..4) {
        let spec = spec_for(seed);
        let params = spec.params();
        let d = enumerate_paths(len, i, j, PathConstraint::NonNegative, params).unwrap();
        let dhat = enumerate_paths(len, -(j + 1), -(i + 1), PathConstraint::BelowMinusOne, params).unwrap();
        prop_assert_eq!(d.len(), dhat.len());
        let image: BTreeSet<Vec<i64>> = d.iter().map(|g| reflect_path(g).heights).collect();
        let target: BTreeSet<Vec<i64>> = dhat.iter().map(|g| g.heights.clone()).collect();
        prop_assert_eq!(image, target);
        let e = spec.reflect();
        for g in &d {
            prop_assert_eq!(reflect_path(&reflect_path(g)).heights, g.heights.clone());
            prop_assert_eq!(path_weight(&reflect_path(g), &spec).unwrap(), path_weight(g, &e).unwrap());
        }
    }

    #[test]
    fn v_series_transport(seed in any::<u64>(), i in 0i64..4, j in 0i64..4) {
        let spec = spec_for(seed);
        let v = series_by_powers("v", -(j + 1), -(i + 1), 8, &spec).unwrap();
        let a = series_by_powers("a", i, j, 8, &spec.reflect()).unwrap();
        prop_assert!(v.agrees_with(&a));
    }

    #[test]
    fn constraints_nest(seed in any::<u64>(), len in 0usize..7, i in 0i64..4, j in 0i64..4, n in 1i64..6) {
        let params = spec_for(seed).params();
        let set = |c| -> BTreeSet<Vec<i64>> {
            enumerate_paths(len, i, j, c, params).unwrap().into_iter().map(|g| g.heights).collect()
        };
        let band = set(PathConstraint::band(n).unwrap());
        let d = set(PathConstraint::NonNegative);
        let free = set(PathConstraint::Free);
        prop_assert!(band.is_subset(&d));
        prop_assert!(d.is_subset(&free));
        for h in &free {
            prop_assert!(LatticePath::new(h.clone()).is_legal(params));
        }
    }

    #[test]
    fn short_paths_do_not_feel_the_ceiling(seed in any::<u64>(), n in 1i64..7, i in 0i64..6, j in 0i64..6) {
        prop_assume!(i < n && j < n);
        let spec = spec_for(seed);
        let params = spec.params();
        let l = predicted_l(n, i, j, spec.p(), spec.q()).unwrap();
        for len in 0..=l.min(7) as usize {
            let band = enumerate_paths(len, i, j, PathConstraint::band(n).unwrap(), params).unwrap();
            let d = enumerate_paths(len, i, j, PathConstraint::NonNegative, params).unwrap();
            prop_assert_eq!(band, d);
        }
    }

    #[test]
    fn middle_paths_are_shifted_free_paths(seed in any::<u64>(), ell in 0usize..5, slack in 0i64..3) {
        let params = spec_for(seed).params();
        let (p, q) = (params.p, params.q);
        prop_assume!(p <= 2 && q <= 2);
        let big_n = middle_margin(p, q, ell);
        let n = 2 * big_n + 1 + slack;
        let free: Vec<Vec<i64>> = enumerate_paths(ell, 0, 0, PathConstraint::Free, params).unwrap()
            .into_iter().map(|g| g.heights).collect();
        for i in big_n..=n - 1 - big_n {
            let band: Vec<Vec<i64>> = enumerate_paths(ell, i, i, PathConstraint::band(n).unwrap(), params).unwrap()
                .into_iter().map(|g| g.heights.iter().map(|h| h - i).collect()).collect();
            prop_assert_eq!(&band, &free);
        }
    }

    #[test]
    fn brute_matches_series(seed in any::<u64>(), i in 0i64..3, j in 0i64..3) {
        let spec = spec_for(seed);
        let s = series_by_powers("w", i, j, 6, &spec).unwrap();
        for len in 0..6usize {
            let b = weight_polynomial_brute(len, i, j, PathConstraint::Free, &spec).unwrap();
            prop_assert_eq!(b, s.coefficient(-(len as i64) - 1).unwrap());
        }
    }
}
