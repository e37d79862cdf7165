//! Estimate of the parameter threshold below which the three-solution
//! structure is guaranteed, together with the mountain radius `ρ` and an
//! endpoint `w` beyond the mountain.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fibering;
use crate::functionals::{self, ExponentConfig};
use crate::mesh::{self, Field, Mesh};
use crate::roots::bisect;

use super::sphere::{descend, SphereMetric};
use super::SolverOptions;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaStar {
    pub lambda_star: f64,
    pub rho: f64,
    pub witness: Field,
    /// Maximizer of `B` on the unit sphere.
    pub v_star: Field,
    pub b_max: f64,
    pub a_max: f64,
    pub c_star: f64,
    /// Bound from requiring `Φ̃` to have a positive hump for every unit `v`.
    pub lambda_hump: f64,
    /// Bound from requiring a positive energy barrier for every unit `v`.
    pub lambda_barrier: f64,
    /// Largest `λ` for which the energy along `v*`, without its `A` term,
    /// still dips below zero.
    pub lambda_dip: f64,
}

/// Smooth positive bump used to seed the sphere ascent.
fn bump(mesh: &Mesh) -> Field {
    let ext = mesh.spec().extents.clone();
    let lx = ext[0];
    let ly = ext.get(1).copied().unwrap_or(1.0);
    let two_d = mesh.dimension() == 2;
    mesh.field_from_fn(|x, y| {
        let bx = x * (lx - x);
        if two_d {
            bx * y * (ly - y)
        } else {
            bx
        }
    })
}

/// Maximizes `∫|v|^q` over the unit sphere of `W₀^{1,p}`.
pub fn maximize_power_on_sphere(mesh: &Mesh, q: f64, p: f64, opts: &SolverOptions) -> Result<Field> {
    opts.validate()?;
    if !(q > 1.0) {
        return Err(Error::InvalidArgument(format!("power q = {q} must exceed 1")));
    }
    let metric = SphereMetric::new(mesh, p)?;
    let weights = mesh.weights();
    let outcome = descend(&metric, &bump(mesh), opts, |v| {
        let val = mesh::power_sum(mesh, v, q);
        let mut g: Vec<f64> = v
            .values()
            .iter()
            .zip(weights)
            .map(|(&x, &w)| -q * w * x.abs().powf(q - 1.0).copysign(x))
            .collect();
        mesh.mask(&mut g);
        Ok(Some((-val, Field::from_raw(g))))
    })?;
    // the Armijo floor sits near √ε; accept anything within a decade of it
    if !(outcome.stationary || outcome.angle < 1e-6) {
        return Err(Error::NotConverged(format!(
            "sphere ascent of ∫|v|^{q} stopped after {} iterations with tangential ratio {:.3e}",
            outcome.iterations, outcome.angle
        )));
    }
    Ok(outcome.v)
}

pub fn maximize_b_on_sphere(mesh: &Mesh, cfg: &ExponentConfig, opts: &SolverOptions) -> Result<Field> {
    maximize_power_on_sphere(mesh, cfg.beta, cfg.p, opts)
}

pub fn maximize_a_on_sphere(mesh: &Mesh, cfg: &ExponentConfig, opts: &SolverOptions) -> Result<Field> {
    maximize_power_on_sphere(mesh, cfg.alpha, cfg.p, opts)
}

/// `max_{t>0} (c_lo t^{lo} − c_hi t^{hi})` for `0 < lo < hi`; returns
/// `(argmax, max)`.
pub fn max_truncated_hump(c_lo: f64, lo: f64, c_hi: f64, hi: f64) -> (f64, f64) {
    let t = (c_lo * lo / (c_hi * hi)).powf(1.0 / (hi - lo));
    (t, c_lo * t.powf(lo) - c_hi * t.powf(hi))
}

/// Minimum over `t > 0` of `t^p/p − B t^β/β + λC t^γ/γ`, with its minimizer
/// (`t = 0` when the function never drops below zero).
fn dip(lambda: f64, b: f64, c: f64, cfg: &ExponentConfig) -> (f64, f64) {
    let (p, be, ga) = (cfg.p, cfg.beta, cfg.gamma);
    let f = |t: f64| t.powf(p) / p - b * t.powf(be) / be + lambda * c * t.powf(ga) / ga;
    // f'(t) = t^{p−1} q(t), q convex-shaped with a single minimum
    let q = |t: f64| 1.0 - b * t.powf(be - p) + lambda * c * t.powf(ga - p);
    if lambda * c <= 0.0 {
        return (f64::INFINITY, f64::NEG_INFINITY);
    }
    let tq = ((be - p) * b / (lambda * (ga - p) * c)).powf(1.0 / (ga - be));
    if q(tq) >= 0.0 {
        return (0.0, 0.0);
    }
    let mut hi = 2.0 * tq;
    while q(hi) < 0.0 {
        hi *= 2.0;
    }
    let t = bisect(q, tq, hi);
    let v = f(t);
    if v < 0.0 {
        (t, v)
    } else {
        (0.0, 0.0)
    }
}

/// Threshold estimate: `0.9·min(λ_hump, λ_barrier, λ_dip)`, the mountain
/// radius `ρ` and an endpoint `w` along `v*` with `J̄(w) ≤ 0`.
pub fn estimate_lambda_star(mesh: &Mesh, cfg: &ExponentConfig, opts: &SolverOptions) -> Result<LambdaStar> {
    let (al, p, be) = (cfg.alpha, cfg.p, cfg.beta);
    let v_star = maximize_b_on_sphere(mesh, cfg, opts)?;
    let a_star = maximize_a_on_sphere(mesh, cfg, opts)?;
    let unit = cfg.with_lambda(1.0);
    let mv = functionals::moments(mesh, &v_star, &unit)?;
    let b_max = mv.b;
    let c_star = mv.c;
    let a_max = functionals::moments(mesh, &a_star, &unit)?.a.max(mv.a);

    let (_, hump) = max_truncated_hump(1.0, p - al, b_max, be - al);
    let lambda_hump = hump / a_max;
    let (rho, barrier) = max_truncated_hump(1.0 / p, p - al, b_max / be, be - al);
    let lambda_barrier = al * barrier / a_max;

    let dips = |l: f64| dip(l, b_max, c_star, cfg).1 < 0.0;
    let mut hi = lambda_hump.max(lambda_barrier).max(1e-300);
    while dips(hi) {
        hi *= 2.0;
    }
    let mut lo = hi;
    while !dips(lo) {
        lo *= 0.5;
        if lo < 1e-300 {
            return Err(Error::NotConverged("no λ gives a negative dip along v*".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if dips(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda_dip = lo;
    let lambda_star = 0.9 * lambda_hump.min(lambda_barrier).min(lambda_dip);

    let at_star = cfg.with_lambda(lambda_star);
    let (t_dip, _) = dip(lambda_star, b_max, c_star, cfg);
    let mut witness = v_star.scaled(1.2 * t_dip);
    if functionals::j_bar_lambda(mesh, &witness, &at_star)? > 0.0 {
        witness = v_star.scaled(t_dip);
    }
    Ok(LambdaStar {
        lambda_star,
        rho,
        witness,
        v_star,
        b_max,
        a_max,
        c_star,
        lambda_hump,
        lambda_barrier,
        lambda_dip,
    })
}

impl LambdaStar {
    /// The three defining inequalities at parameter `lambda`.
    pub fn conditions_hold(&self, lambda: f64, cfg: &ExponentConfig) -> [bool; 3] {
        let (al, p, be) = (cfg.alpha, cfg.p, cfg.beta);
        let (_, hump) = max_truncated_hump(1.0, p - al, self.b_max, be - al);
        let (_, barrier) = max_truncated_hump(1.0 / p, p - al, self.b_max / be, be - al);
        [
            hump > lambda * self.a_max,
            barrier > lambda / al * self.a_max,
            dip(lambda, self.b_max, self.c_star, cfg).1 < 0.0,
        ]
    }

    /// Fibering roots along `v*` at `lambda`.
    pub fn roots_along_v_star(
        &self,
        mesh: &Mesh,
        cfg: &ExponentConfig,
        lambda: f64,
    ) -> Result<fibering::FiberingRoots> {
        let c = cfg.with_lambda(lambda);
        fibering::find_roots(&functionals::moments(mesh, &self.v_star, &c)?, &c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hump_closed_form() {
        // max_t t^{1/2} − 2t^{3/2} at t = 1/6 with value (2/3)/√6
        let (t, v) = max_truncated_hump(1.0, 0.5, 2.0, 1.5);
        assert!((t - 1.0 / 6.0).abs() < 1e-15);
        assert!((v - (2.0 / 3.0) / 6f64.sqrt()).abs() < 1e-15);
        // dense grid oracle
        let grid_max = (1..200_000)
            .map(|i| i as f64 * 1e-5)
            .map(|t| t.sqrt() - 2.0 * t.powf(1.5))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((grid_max - v).abs() < 1e-9);
        assert!((v - 0.27217).abs() < 1e-5);
    }
}
