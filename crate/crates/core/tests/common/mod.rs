//! Seeded generators shared by the integration tests.
#![allow(dead_code)]

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trisheet::{build_config, BranchConfig, Complex64, CurveParams};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn r(x: f64) -> Complex64 {
    c(x, 0.0)
}

pub fn point(rng: &mut ChaCha8Rng, half: f64) -> Complex64 {
    c(rng.random_range(-half..half), rng.random_range(-half..half))
}

/// Four branch points in `[-2, 2]^2`, pairwise at least `0.1` apart.
pub fn config(rng: &mut ChaCha8Rng) -> BranchConfig {
    loop {
        let p: Vec<Complex64> = (0..4).map(|_| point(rng, 2.0)).collect();
        let separated = (0..4).all(|i| (i + 1..4).all(|j| (p[i] - p[j]).norm() > 0.1));
        if separated {
            if let Ok(cfg) = build_config(p[0], p[1], p[2], p[3]) {
                return cfg;
            }
        }
    }
}

pub fn params(rng: &mut ChaCha8Rng) -> CurveParams {
    CurveParams::new(point(rng, 1.0), point(rng, 1.0))
}

/// Distance from `z` to the nearest of `pts`.
pub fn distance(pts: &[Complex64], z: Complex64) -> f64 {
    pts.iter().map(|p| (z - p).norm()).fold(f64::INFINITY, f64::min)
}
