//! Field generators shared by the integration tests.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use plap::{Field, Mesh};

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// `sin(πs) + Σ_{k≥2} c_k sin(kπs)/k` in each axis, `s = x/L`. Since
/// `|sin kθ| ≤ k sin θ` on `[0, π]` and `Σ|c_k| < 1`, the field is positive in
/// the interior.
pub fn smooth_positive(mesh: &Mesh, rng: &mut ChaCha8Rng) -> Field {
    let ext = mesh.spec().extents.clone();
    let two_d = mesh.dimension() == 2;
    let c: Vec<f64> = (0..4).map(|_| rng.gen_range(-0.2..0.2)).collect();
    let d: Vec<f64> = (0..4).map(|_| rng.gen_range(-0.2..0.2)).collect();
    let amp = rng.gen_range(0.5..2.0);
    let series = |s: f64, coef: &[f64]| {
        let pi = std::f64::consts::PI;
        (pi * s).sin()
            + coef
                .iter()
                .enumerate()
                .map(|(k, a)| a * ((k as f64 + 2.0) * pi * s).sin() / (k as f64 + 2.0))
                .sum::<f64>()
    };
    mesh.field_from_fn(|x, y| {
        let fx = series(x / ext[0], &c);
        let fy = if two_d { series(y / ext[1], &d) } else { 1.0 };
        amp * fx * fy
    })
}

/// Interior values uniform in `[lo, hi]`.
pub fn noise(mesh: &Mesh, rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Field {
    let vals = (0..mesh.len()).map(|_| rng.gen_range(lo..hi)).collect();
    mesh.field_masked(vals).unwrap()
}
