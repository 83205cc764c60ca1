//! Deterministic sample sets for the class verifiers.

use crate::objective::Point;

/// `n` equally spaced points on `[lo, hi]`, endpoints included.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<Point> {
    match n {
        0 => Vec::new(),
        1 => vec![Point::from_element(1, 0.5 * (lo + hi))],
        _ => (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                Point::from_element(1, lo + t * (hi - lo))
            })
            .collect(),
    }
}

/// Tensor grid with `per_axis` points per coordinate on `[lo, hi]^dim`.
pub fn tensor_grid(dim: usize, lo: f64, hi: f64, per_axis: usize) -> Vec<Point> {
    let axis: Vec<f64> = uniform_grid(lo, hi, per_axis).iter().map(|p| p[0]).collect();
    let total = per_axis.pow(dim as u32);
    (0..total)
        .map(|mut idx| {
            let mut p = Point::zeros(dim);
            for c in 0..dim {
                p[c] = axis[idx % per_axis];
                idx /= per_axis;
            }
            p
        })
        .collect()
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while i > 0 {
        out += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    out
}

/// First `n` points of the Halton sequence mapped onto `[lo, hi]^dim`.
///
/// Indexing starts at 1 so the origin of the unit cube is skipped.
/// Supports up to 16 dimensions.
pub fn halton(dim: usize, lo: f64, hi: f64, n: usize) -> Vec<Point> {
    assert!(dim <= PRIMES.len(), "halton: at most {} dimensions", PRIMES.len());
    (1..=n as u64)
        .map(|i| Point::from_fn(dim, |c, _| lo + (hi - lo) * radical_inverse(i, PRIMES[c])))
        .collect()
}

/// A deterministic sample set of roughly `n` points for `[lo, hi]^dim`:
/// a uniform grid in 1D, Halton points otherwise.
pub fn box_samples(dim: usize, lo: f64, hi: f64, n: usize) -> Vec<Point> {
    if dim == 1 {
        uniform_grid(lo, hi, n)
    } else {
        halton(dim, lo, hi, n)
    }
}
