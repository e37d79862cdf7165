//! Radial reduction of the energy along rays `t ↦ t·v`.
//!
//! For a direction `v` with moments `(A, B, C)` the scaled energy is
//! `Ĵ(t, v) = t^p/p + R_λ(t·v)` and its normalized derivative
//!
//! ```text
//! Φ(t) = t^{-α} ∂Ĵ/∂t = t^{p−α} − B t^{β−α} + λC t^{γ−α} − λA
//! ```
//!
//! has at most three positive roots. `Φ'(t) = t^{p−α−1} ψ(t)` where `ψ` is
//! convex in the right variable and has a single minimum, so `Φ` splits into
//! at most three monotone pieces; each piece holds at most one root and is
//! solved by bisection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{self, r_lambda, ExponentConfig, Moments};
use crate::mesh::{Field, Mesh};
use crate::roots::bisect;

/// Two roots closer than this (relative) are treated as a double root.
pub const DOUBLE_ROOT_RTOL: f64 = 1e-6;

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("t = {t} must be positive")));
    }
    Ok(())
}

#[inline]
fn phi_raw(t: f64, m: &Moments, cfg: &ExponentConfig) -> f64 {
    let (al, la) = (cfg.alpha, cfg.lambda);
    t.powf(cfg.p - al) - t.powf(cfg.beta - al) * m.b + la * t.powf(cfg.gamma - al) * m.c - la * m.a
}

#[inline]
fn phi_prime_raw(t: f64, m: &Moments, cfg: &ExponentConfig) -> f64 {
    let (al, la) = (cfg.alpha, cfg.lambda);
    (cfg.p - al) * t.powf(cfg.p - al - 1.0) - (cfg.beta - al) * t.powf(cfg.beta - al - 1.0) * m.b
        + la * (cfg.gamma - al) * t.powf(cfg.gamma - al - 1.0) * m.c
}

#[inline]
fn phi_tilde_raw(t: f64, m: &Moments, cfg: &ExponentConfig) -> f64 {
    let al = cfg.alpha;
    t.powf(cfg.p - al) - t.powf(cfg.beta - al) * m.b - cfg.lambda * m.a
}

/// Sum of the magnitudes of the terms of `Φ(t)`; the rounding scale.
fn phi_scale(t: f64, m: &Moments, cfg: &ExponentConfig) -> f64 {
    let (al, la) = (cfg.alpha, cfg.lambda);
    t.powf(cfg.p - al) + t.powf(cfg.beta - al) * m.b + la * t.powf(cfg.gamma - al) * m.c + la * m.a
}

pub fn phi(t: f64, m: &Moments, cfg: &ExponentConfig) -> Result<f64> {
    check_t(t)?;
    Ok(phi_raw(t, m, cfg))
}

pub fn phi_prime(t: f64, m: &Moments, cfg: &ExponentConfig) -> Result<f64> {
    check_t(t)?;
    Ok(phi_prime_raw(t, m, cfg))
}

pub fn phi_tilde(t: f64, m: &Moments, cfg: &ExponentConfig) -> Result<f64> {
    check_t(t)?;
    Ok(phi_tilde_raw(t, m, cfg))
}

/// `Ĵ(t, v) = t^p/p + R_λ(t·v)` evaluated from the moments of `v`.
pub fn j_hat(t: f64, m: &Moments, cfg: &ExponentConfig) -> f64 {
    t.powf(cfg.p) / cfg.p + r_lambda(&m.scaled(t, cfg), cfg)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Slope {
    Rising,
    Falling,
    Flat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberingRoots {
    pub roots: Vec<f64>,
    pub slopes: Vec<Slope>,
    /// Set when two roots nearly merge or a critical value of `Φ` is zero
    /// to rounding.
    pub degenerate: bool,
}

impl FiberingRoots {
    pub fn count(&self) -> usize {
        self.roots.len()
    }

    pub fn first(&self) -> Option<f64> {
        self.roots.first().copied()
    }
}

/// Critical points of `Φ` on `(0, ∞)`: local max then local min.
fn critical_points(m: &Moments, cfg: &ExponentConfig) -> Vec<f64> {
    let (al, p, be, ga, la) = (cfg.alpha, cfg.p, cfg.beta, cfg.gamma, cfg.lambda);
    if m.b <= 0.0 {
        return Vec::new();
    }
    let psi = |t: f64| (p - al) - (be - al) * m.b * t.powf(be - p) + la * (ga - al) * m.c * t.powf(ga - p);
    if la * m.c <= 0.0 {
        return vec![((p - al) / ((be - al) * m.b)).powf(1.0 / (be - p))];
    }
    let tm = ((be - al) * (be - p) * m.b / (la * (ga - al) * (ga - p) * m.c)).powf(1.0 / (ga - be));
    if !(psi(tm) < 0.0) {
        return Vec::new();
    }
    let mut hi = 2.0 * tm;
    while psi(hi) < 0.0 {
        hi *= 2.0;
    }
    vec![bisect(psi, 0.0, tm), bisect(psi, tm, hi)]
}

/// Sign of `Φ` at `0⁺`.
fn sign_at_zero(m: &Moments, cfg: &ExponentConfig) -> f64 {
    if cfg.lambda * m.a > 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Sign of `Φ` as `t → ∞`.
fn sign_at_infinity(m: &Moments, cfg: &ExponentConfig) -> f64 {
    if cfg.lambda * m.c > 0.0 || m.b <= 0.0 {
        1.0
    } else {
        -1.0
    }
}

pub fn find_roots(m: &Moments, cfg: &ExponentConfig) -> Result<FiberingRoots> {
    if m.is_zero() {
        return Err(Error::Degenerate("all moments vanish".into()));
    }
    if !(m.a >= 0.0 && m.b >= 0.0 && m.c >= 0.0) {
        return Err(Error::InvalidArgument("moments must be nonnegative".into()));
    }
    let f = |t: f64| phi_raw(t, m, cfg);
    let crit = critical_points(m, cfg);
    let mut degenerate = crit
        .iter()
        .any(|&s| f(s).abs() <= 64.0 * f64::EPSILON * phi_scale(s, m, cfg));

    // piece boundaries with the sign of Φ there
    let mut knots: Vec<(f64, f64)> = vec![(0.0, sign_at_zero(m, cfg))];
    knots.extend(crit.iter().map(|&s| (s, f(s).signum())));
    let end_sign = sign_at_infinity(m, cfg);

    let mut roots = Vec::new();
    for (k, &(a, sa)) in knots.iter().enumerate() {
        let (b, sb) = match knots.get(k + 1) {
            Some(&(b, sb)) => (b, sb),
            None => (f64::INFINITY, end_sign),
        };
        if sa == 0.0 && a > 0.0 {
            // tangency exactly at a critical point
            roots.push(a);
            continue;
        }
        if sa == 0.0 || sb == 0.0 || sa == sb {
            continue;
        }
        let hi = if b.is_finite() {
            b
        } else {
            let mut hi = if a > 0.0 { 2.0 * a } else { 1.0 };
            while f(hi).signum() != sb {
                hi *= 2.0;
            }
            hi
        };
        roots.push(bisect(f, a, hi));
    }
    roots.dedup();
    if roots.windows(2).any(|w| (w[1] - w[0]) <= DOUBLE_ROOT_RTOL * w[1]) {
        degenerate = true;
    }
    let slopes = roots
        .iter()
        .map(|&t| {
            let d = phi_prime_raw(t, m, cfg);
            if d > 0.0 {
                Slope::Rising
            } else if d < 0.0 {
                Slope::Falling
            } else {
                Slope::Flat
            }
        })
        .collect();
    Ok(FiberingRoots {
        roots,
        slopes,
        degenerate,
    })
}

/// Membership in the three-root region.
pub fn in_u_lambda(m: &Moments, cfg: &ExponentConfig) -> bool {
    matches!(find_roots(m, cfg), Ok(r) if r.count() == 3 && !r.degenerate)
}

/// The two positive roots of `Φ̃(t) = t^{p−α} − B t^{β−α} − λA`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TildeRoots {
    pub t1: f64,
    pub t2: f64,
}

pub fn tilde_roots(m: &Moments, cfg: &ExponentConfig) -> Result<TildeRoots> {
    let (al, p, be) = (cfg.alpha, cfg.p, cfg.beta);
    if !(m.b > 0.0 && cfg.lambda * m.a > 0.0) {
        return Err(Error::Precondition(
            "truncated equation needs B > 0 and λA > 0 for two roots".into(),
        ));
    }
    let f = |t: f64| phi_tilde_raw(t, m, cfg);
    let tmax = ((p - al) / ((be - al) * m.b)).powf(1.0 / (be - p));
    if !(f(tmax) > 0.0) {
        return Err(Error::Precondition(
            "truncated equation has no positive hump; lambda too large".into(),
        ));
    }
    let mut hi = 2.0 * tmax;
    while f(hi) >= 0.0 {
        hi *= 2.0;
    }
    Ok(TildeRoots {
        t1: bisect(f, 0.0, tmax),
        t2: bisect(f, tmax, hi),
    })
}

/// Checks `t₁ < t̃₁ < t̃₂ < t₂` for a member of the three-root region.
pub fn interlacing(m: &Moments, cfg: &ExponentConfig) -> Result<(TildeRoots, bool)> {
    if !(m.c > 0.0) || cfg.lambda == 0.0 {
        return Err(Error::Precondition(
            "C = 0 or λ = 0 makes Φ coincide with its truncation".into(),
        ));
    }
    let roots = find_roots(m, cfg)?;
    if roots.count() != 3 || roots.degenerate {
        return Err(Error::OutsideThreeRootRegion);
    }
    let tilde = tilde_roots(m, cfg)?;
    let ok = roots.roots[0] < tilde.t1 && tilde.t1 < tilde.t2 && tilde.t2 < roots.roots[1];
    Ok((tilde, ok))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchId {
    First,
    Third,
}

/// Root, moments and value of a branch functional at one direction.
#[derive(Clone, Copy, Debug)]
pub struct FiberPoint {
    pub t: f64,
    pub moments: Moments,
    pub value: f64,
}

pub fn branch_root(m: &Moments, branch: BranchId, cfg: &ExponentConfig) -> Result<f64> {
    let r = find_roots(m, cfg)?;
    match branch {
        BranchId::First => r
            .first()
            .filter(|_| r.slopes[0] == Slope::Rising)
            .ok_or_else(|| Error::Precondition("fibering equation has no rising first root".into())),
        BranchId::Third => {
            if r.count() == 3 && !r.degenerate {
                Ok(r.roots[2])
            } else {
                Err(Error::OutsideThreeRootRegion)
            }
        }
    }
}

pub fn fiber_point(mesh: &Mesh, v: &Field, branch: BranchId, cfg: &ExponentConfig) -> Result<FiberPoint> {
    if v.is_zero() {
        return Err(Error::Degenerate("branch functional of the zero field".into()));
    }
    let m = functionals::moments(mesh, v, cfg)?;
    let t = branch_root(&m, branch, cfg)?;
    Ok(FiberPoint {
        t,
        moments: m,
        value: j_hat(t, &m, cfg),
    })
}

/// `I_i(v) = Ĵ(t_i(v), v)` for the first or third root.
pub fn fibered_value(mesh: &Mesh, v: &Field, branch: BranchId, cfg: &ExponentConfig) -> Result<f64> {
    Ok(fiber_point(mesh, v, branch, cfg)?.value)
}

/// Envelope gradient `t·∇R_λ(t·v)`, valid because `∂Ĵ/∂t = 0` at the root.
pub fn fibered_gradient(mesh: &Mesh, v: &Field, branch: BranchId, cfg: &ExponentConfig) -> Result<Field> {
    let pt = fiber_point(mesh, v, branch, cfg)?;
    fibered_gradient_at(mesh, v, &pt, cfg)
}

pub(crate) fn fibered_gradient_at(mesh: &Mesh, v: &Field, pt: &FiberPoint, cfg: &ExponentConfig) -> Result<Field> {
    let slope = phi_prime_raw(pt.t, &pt.moments, cfg);
    let scale = phi_scale(pt.t, &pt.moments, cfg) / pt.t;
    if slope.abs() <= 1e-10 * scale {
        return Err(Error::Precondition(format!(
            "fibering root t = {} is nearly degenerate",
            pt.t
        )));
    }
    Ok(functionals::r_gradient(mesh, &v.scaled(pt.t), cfg)?.scaled(pt.t))
}
