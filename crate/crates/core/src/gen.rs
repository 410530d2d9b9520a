//! Seeded synthetic datasets for experiments and tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::points::PointSet;

pub(crate) fn unit_direction(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Samples `n` points uniformly from the d-dimensional unit ball.
///
/// Direction from a normalized Gaussian, radius as U^(1/d); output is
/// bit-identical for a fixed `(n, d, seed)`.
pub fn gen_uniform_ball(n: usize, d: usize, seed: u64) -> PointSet {
    assert!(n >= 1 && d >= 1, "n and d must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(n * d);
    for _ in 0..n {
        let dir = unit_direction(&mut rng, d);
        let radius = rng.random::<f64>().powf(1.0 / d as f64);
        values.extend(dir.into_iter().map(|x| x * radius));
    }
    PointSet::new(d, values).expect("generated coordinates are finite")
}

/// Samples `n` points uniformly from the unit cube `[0, 1]^d`.
pub fn gen_uniform_cube(n: usize, d: usize, seed: u64) -> PointSet {
    assert!(n >= 1 && d >= 1, "n and d must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<f64> = (0..n * d).map(|_| rng.random::<f64>()).collect();
    PointSet::new(d, values).expect("generated coordinates are finite")
}

/// Zero-mean Gaussian with per-axis scales decaying geometrically, so a few
/// directions dominate the norms.
pub fn gen_anisotropic_gaussian(n: usize, d: usize, seed: u64) -> PointSet {
    assert!(n >= 1 && d >= 1, "n and d must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scales: Vec<f64> = (0..d).map(|j| 3.0 * 0.7_f64.powi(j as i32)).collect();
    let mut values = Vec::with_capacity(n * d);
    for _ in 0..n {
        for &s in &scales {
            let g: f64 = rng.sample(StandardNormal);
            values.push(s * g);
        }
    }
    PointSet::new(d, values).expect("generated coordinates are finite")
}

/// Mixture of anisotropic Gaussian clusters with well-separated centers.
pub fn gen_gaussian_mixture(n: usize, d: usize, components: usize, seed: u64) -> PointSet {
    assert!(
        n >= 1 && d >= 1 && components >= 1,
        "n, d, and components must be positive"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<Vec<f64>> = (0..components)
        .map(|_| {
            (0..d)
                .map(|_| 8.0 * rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();
    let scales: Vec<Vec<f64>> = (0..components)
        .map(|_| (0..d).map(|_| 0.3 + 1.2 * rng.random::<f64>()).collect())
        .collect();
    let mut values = Vec::with_capacity(n * d);
    for i in 0..n {
        let c = i % components;
        for j in 0..d {
            let g: f64 = rng.sample(StandardNormal);
            values.push(centers[c][j] + scales[c][j] * g);
        }
    }
    PointSet::new(d, values).expect("generated coordinates are finite")
}
