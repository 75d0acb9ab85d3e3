//! Seeded generators of random rational specs and series matrices.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::band::BandSpec;
use crate::scalar::{ratio, Rational};
use crate::series::{Series, SeriesMatrix};

/// Generator for stream `stream` under `seed`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Half-width of the index windows of generated specs.
pub const SPAN: i64 = 60;

/// Nonzero rational num/den with |num| ≤ `numer_max` and den in 1..=`den_max`.
pub fn random_rational(rng: &mut ChaCha8Rng, numer_max: i64, den_max: i64) -> Rational {
    let mut n = 0;
    while n == 0 {
        n = rng.gen_range(-numer_max..=numer_max);
    }
    ratio(n, rng.gen_range(1..=den_max))
}

pub fn random_spec_with(rng: &mut ChaCha8Rng, p: i64, q: i64, numer_max: i64, den_max: i64) -> BandSpec<Rational> {
    BandSpec::from_fn(p, q, -SPAN, SPAN, |_, _| random_rational(rng, numer_max, den_max))
        .expect("valid band parameters")
}

/// Spec with coefficients from {±1..±4}/{1,2,3} on windows −60..=60.
pub fn random_spec(rng: &mut ChaCha8Rng, p: i64, q: i64) -> BandSpec<Rational> {
    random_spec_with(rng, p, q, 4, 3)
}

/// (p, q) uniform on 1..=max each.
pub fn random_params(rng: &mut ChaCha8Rng, max: i64) -> (i64, i64) {
    (rng.gen_range(1..=max), rng.gen_range(1..=max))
}

/// Dense series with `width` coefficients from z^{hi} down; the leading one is nonzero.
pub fn random_series(rng: &mut ChaCha8Rng, hi: i64, width: usize) -> Series<Rational> {
    let coeffs = (0..width)
        .map(|t| {
            if t == 0 {
                random_rational(rng, 4, 3)
            } else {
                ratio(rng.gen_range(-4..=4), rng.gen_range(1..=3))
            }
        })
        .collect();
    Series::new(hi, coeffs)
}

/// Random rows×cols matrix whose (pivot) entry has degree `pivot_hi` and the rest
/// degree at most `other_hi`; all entries carry `width` coefficients.
pub fn random_series_matrix(
    rng: &mut ChaCha8Rng,
    rows: usize,
    cols: usize,
    pivot: (usize, usize),
    pivot_hi: i64,
    other_hi: i64,
    width: usize,
) -> SeriesMatrix<Rational> {
    SeriesMatrix::from_fn(rows, cols, |i, j| {
        if (i, j) == pivot {
            random_series(rng, pivot_hi, width)
        } else {
            let drop = rng.gen_range(0..=1);
            random_series(rng, other_hi - drop, width)
        }
    })
}
