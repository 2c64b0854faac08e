//! Low-discrepancy sample points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::maps::{PhasePoint, Rect};

/// Radical inverse of `i` in base `b`.
pub fn radical_inverse(mut i: u64, b: u64) -> f64 {
    let inv = 1.0 / b as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % b) as f64;
        i /= b;
        f *= inv;
    }
    r
}

/// Halton (2, 3) points in the unit square with a seeded Cranley–Patterson
/// rotation. Index 0 of the sequence is skipped.
pub fn halton_unit(count: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: [f64; 2] = [rng.gen(), rng.gen()];
    (1..=count as u64)
        .map(|i| {
            let u = (radical_inverse(i, 2) + shift[0]).fract();
            let v = (radical_inverse(i, 3) + shift[1]).fract();
            [u, v]
        })
        .collect()
}

/// `count` quasi-random points in `region`.
pub fn halton_points(region: &Rect, count: usize, seed: u64) -> Vec<PhasePoint> {
    halton_unit(count, seed)
        .into_iter()
        .map(|u| region.at(u))
        .collect()
}
