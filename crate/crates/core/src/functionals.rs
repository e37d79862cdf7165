//! Energy `J_λ`, its perturbation part `R_λ`, the truncated energy `J̄_λ`, and
//! their exact gradients with respect to nodal values.
//!
//! ```text
//! J_λ(v) = (1/p)∫|∇v|^p − (λ/α)A(v) − (1/β)B(v) + (λ/γ)C(v)
//! A = ∫|v|^α,  B = ∫|v|^β,  C = ∫|v|^γ
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::BandMatrix;
use crate::mesh::{self, Field, Mesh, Rectify};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentConfig {
    pub alpha: f64,
    pub p: f64,
    pub beta: f64,
    pub gamma: f64,
    pub lambda: f64,
    /// Space dimension `N`, used only for the critical Sobolev exponent.
    pub dimension: usize,
}

impl ExponentConfig {
    pub fn new(alpha: f64, p: f64, beta: f64, gamma: f64, lambda: f64, dimension: usize) -> Result<Self> {
        let cfg = ExponentConfig {
            alpha,
            p,
            beta,
            gamma,
            lambda,
            dimension,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        ExponentConfig { lambda, ..*self }
    }

    /// Critical Sobolev exponent; infinite when `p ≥ N`.
    pub fn critical_exponent(&self) -> f64 {
        let n = self.dimension as f64;
        if self.p < n {
            self.p * n / (n - self.p)
        } else {
            f64::INFINITY
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ExponentConfig {
            alpha,
            p,
            beta,
            gamma,
            lambda,
            dimension,
        } = *self;
        if ![alpha, p, beta, gamma, lambda].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidConfig("non-finite parameter".into()));
        }
        if !(1.0 < alpha && alpha < p && p < beta && beta < gamma) {
            return Err(Error::InvalidConfig(format!(
                "need 1 < alpha < p < beta < gamma, got alpha={alpha} p={p} beta={beta} gamma={gamma}"
            )));
        }
        if dimension == 0 {
            return Err(Error::InvalidConfig("dimension must be positive".into()));
        }
        let pstar = self.critical_exponent();
        if gamma >= pstar {
            return Err(Error::InvalidConfig(format!(
                "gamma={gamma} is not below the critical exponent {pstar}"
            )));
        }
        if lambda < 0.0 {
            return Err(Error::InvalidConfig(format!("lambda={lambda} is negative")));
        }
        Ok(())
    }
}

/// The power integrals `(A, B, C)` of a field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Moments {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Moments { a, b, c }
    }

    /// Moments of `t·v` given those of `v`.
    pub fn scaled(&self, t: f64, cfg: &ExponentConfig) -> Moments {
        Moments {
            a: t.powf(cfg.alpha) * self.a,
            b: t.powf(cfg.beta) * self.b,
            c: t.powf(cfg.gamma) * self.c,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0.0 && self.b == 0.0 && self.c == 0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub kinetic: f64,
    #[serde(rename = "termA")]
    pub term_a: f64,
    #[serde(rename = "termB")]
    pub term_b: f64,
    #[serde(rename = "termC")]
    pub term_c: f64,
    pub total: f64,
    pub residual: f64,
}

pub fn moments(mesh: &Mesh, v: &Field, cfg: &ExponentConfig) -> Result<Moments> {
    mesh.check_field(v)?;
    Ok(Moments {
        a: mesh::power_sum(mesh, v, cfg.alpha),
        b: mesh::power_sum(mesh, v, cfg.beta),
        c: mesh::power_sum(mesh, v, cfg.gamma),
    })
}

pub fn r_lambda(m: &Moments, cfg: &ExponentConfig) -> f64 {
    -cfg.lambda / cfg.alpha * m.a - m.b / cfg.beta + cfg.lambda / cfg.gamma * m.c
}

pub fn j_lambda(mesh: &Mesh, v: &Field, cfg: &ExponentConfig) -> Result<EnergyBreakdown> {
    let kinetic = mesh::dirichlet_p_energy(mesh, v, cfg.p)?;
    let m = moments(mesh, v, cfg)?;
    let term_a = cfg.lambda / cfg.alpha * m.a;
    let term_b = m.b / cfg.beta;
    let term_c = cfg.lambda / cfg.gamma * m.c;
    let grad = grad_j_lambda(mesh, v, cfg)?;
    Ok(EnergyBreakdown {
        kinetic,
        term_a,
        term_b,
        term_c,
        total: kinetic - term_a - term_b + term_c,
        residual: residual_norm(mesh, &grad),
    })
}

/// Energy total only, without the gradient pass.
pub fn j_total(mesh: &Mesh, v: &Field, cfg: &ExponentConfig) -> Result<f64> {
    let kinetic = mesh::dirichlet_p_energy(mesh, v, cfg.p)?;
    Ok(kinetic + r_lambda(&moments(mesh, v, cfg)?, cfg))
}

pub fn j_bar_lambda(mesh: &Mesh, v: &Field, cfg: &ExponentConfig) -> Result<f64> {
    let kinetic = mesh::dirichlet_p_energy(mesh, v, cfg.p)?;
    let plus = mesh::rectify(v, Rectify::PositivePart);
    Ok(kinetic + r_lambda(&moments(mesh, &plus, cfg)?, cfg))
}

/// Gradient of `(1/p)∫|∇v|^p` with respect to every nodal value, boundary
/// entries included (callers mask them).
pub(crate) fn kinetic_gradient_raw(mesh: &Mesh, v: &Field, p: f64) -> Vec<f64> {
    let h = mesh.spacing();
    let edges = mesh.edges();
    let grad: Vec<f64> = edges.iter().map(|e| (v[e.head] - v[e.tail]) / h[e.axis]).collect();
    let mut out = vec![0.0; v.len()];
    for cell in mesh.cells() {
        let ids = &cell.edges[..cell.len];
        let sq: f64 = ids.iter().map(|&e| grad[e] * grad[e]).sum();
        if sq == 0.0 {
            continue;
        }
        let factor = cell.measure * sq.powf(0.5 * (p - 2.0));
        for &e in ids {
            let edge = edges[e];
            let flux = factor * grad[e] / h[edge.axis];
            out[edge.head] += flux;
            out[edge.tail] -= flux;
        }
    }
    out
}

pub fn kinetic_gradient(mesh: &Mesh, v: &Field, p: f64) -> Result<Field> {
    mesh::check_p(p)?;
    mesh.check_field(v)?;
    let mut g = kinetic_gradient_raw(mesh, v, p);
    mesh.mask(&mut g);
    Ok(Field::from_raw(g))
}

#[inline]
fn signed_pow(x: f64, e: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.abs().powf(e).copysign(x)
    }
}

/// Gradient of `R_λ` at `v`, masked.
pub fn r_gradient(mesh: &Mesh, v: &Field, cfg: &ExponentConfig) -> Result<Field> {
    mesh.check_field(v)?;
    let mut g: Vec<f64> = v
        .values()
        .iter()
        .zip(mesh.weights())
        .map(|(&x, &w)| {
            w * (-cfg.lambda * signed_pow(x, cfg.alpha - 1.0) - signed_pow(x, cfg.beta - 1.0)
                + cfg.lambda * signed_pow(x, cfg.gamma - 1.0))
        })
        .collect();
    mesh.mask(&mut g);
    Ok(Field::from_raw(g))
}

pub fn grad_j_lambda(mesh: &Mesh, v: &Field, cfg: &ExponentConfig) -> Result<Field> {
    let k = kinetic_gradient(mesh, v, cfg.p)?;
    let r = r_gradient(mesh, v, cfg)?;
    Ok(k.axpy(1.0, &r))
}

pub fn grad_j_bar_lambda(mesh: &Mesh, v: &Field, cfg: &ExponentConfig) -> Result<Field> {
    let k = kinetic_gradient(mesh, v, cfg.p)?;
    let r = r_gradient(mesh, &mesh::rectify(v, Rectify::PositivePart), cfg)?;
    Ok(k.axpy(1.0, &r))
}

/// Quadrature-weighted L² norm of the strong-form residual `g_i / w_i`.
pub fn residual_norm(mesh: &Mesh, grad: &Field) -> f64 {
    grad.values()
        .iter()
        .zip(mesh.weights())
        .zip(mesh.boundary())
        .filter(|(_, &b)| !b)
        .map(|((g, w), _)| g * g / w)
        .sum::<f64>()
        .sqrt()
}

/// Residual of `grad` relative to the size of the kinetic gradient at `v`,
/// so that thresholds do not depend on the amplitude of the solution.
pub fn relative_residual(mesh: &Mesh, v: &Field, grad: &Field, p: f64) -> Result<f64> {
    let k = kinetic_gradient(mesh, v, p)?;
    let scale = residual_norm(mesh, &k);
    let r = residual_norm(mesh, grad);
    Ok(if scale > 0.0 { r / scale } else { r })
}

/// Hessian of the discrete energy `(1/p)∫|∇v|^p`, with the kernel
/// `(|G|² + ε²)^{(p−2)/2}` and Dirichlet rows pinned.
pub(crate) fn kinetic_hessian(mesh: &Mesh, v: &Field, p: f64, eps: f64) -> BandMatrix {
    let h = mesh.spacing();
    let edges = mesh.edges();
    let grad: Vec<f64> = edges.iter().map(|e| (v[e.head] - v[e.tail]) / h[e.axis]).collect();
    let mut m = BandMatrix::zeros(mesh.len(), mesh.bandwidth());
    for cell in mesh.cells() {
        let ids = &cell.edges[..cell.len];
        let sq: f64 = ids.iter().map(|&e| grad[e] * grad[e]).sum::<f64>() + eps * eps;
        let base = if p == 2.0 { 1.0 } else { sq.powf(0.5 * (p - 2.0)) };
        for (a, &ea) in ids.iter().enumerate() {
            for (b, &eb) in ids.iter().enumerate() {
                let mut hab = if a == b { base } else { 0.0 };
                if p != 2.0 {
                    hab += base * (p - 2.0) * grad[ea] * grad[eb] / sq;
                }
                let coef = cell.measure * hab / (h[edges[ea].axis] * h[edges[eb].axis]);
                let (e1, e2) = (edges[ea], edges[eb]);
                m.add(e1.head, e2.head, coef);
                m.add(e1.head, e2.tail, -coef);
                m.add(e1.tail, e2.head, -coef);
                m.add(e1.tail, e2.tail, coef);
            }
        }
    }
    for i in 0..mesh.len() {
        if mesh.is_boundary(i) {
            m.pin(i);
        }
    }
    m
}

/// Stiffness matrix of `½∫|∇v|²`, used as the Sobolev metric by the solvers.
pub(crate) fn stiffness(mesh: &Mesh) -> BandMatrix {
    kinetic_hessian(mesh, &mesh.zero_field(), 2.0, 0.0)
}

/// Hessian of `J_λ`, or of `J̄_λ` when `truncated` (nonlinearity only at
/// nodes where `v > 0`), for Newton refinement.
pub(crate) fn j_hessian(mesh: &Mesh, v: &Field, cfg: &ExponentConfig, eps: f64, truncated: bool) -> BandMatrix {
    let mut m = kinetic_hessian(mesh, v, cfg.p, eps);
    for (i, (&x, &w)) in v.values().iter().zip(mesh.weights()).enumerate() {
        if mesh.is_boundary(i) || x == 0.0 || (truncated && x < 0.0) {
            continue;
        }
        let ax = x.abs();
        let d = -cfg.lambda * (cfg.alpha - 1.0) * ax.powf(cfg.alpha - 2.0) - (cfg.beta - 1.0) * ax.powf(cfg.beta - 2.0)
            + cfg.lambda * (cfg.gamma - 1.0) * ax.powf(cfg.gamma - 2.0);
        m.add(i, i, w * d);
    }
    m
}

/// Lower bound for `R_λ` over all fields from Hölder's inequality:
/// `min_{s≥0} (λ/γ)s^γ − c₁s^β − λc₂s^α` with `c₁ = |Ω|^{1−β/γ}/β`,
/// `c₂ = |Ω|^{1−α/γ}/α` and `s = ‖v‖_{L^γ}`.
pub fn coercivity_bound(cfg: &ExponentConfig, domain_measure: f64) -> Result<f64> {
    if !(cfg.lambda > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "coercivity bound needs lambda > 0, got {}",
            cfg.lambda
        )));
    }
    if !(domain_measure > 0.0) {
        return Err(Error::InvalidArgument("domain measure must be positive".into()));
    }
    let (al, be, ga, la) = (cfg.alpha, cfg.beta, cfg.gamma, cfg.lambda);
    let c1 = domain_measure.powf(1.0 - be / ga) / be;
    let c2 = domain_measure.powf(1.0 - al / ga) / al;
    let f = |s: f64| la / ga * s.powf(ga) - c1 * s.powf(be) - la * c2 * s.powf(al);
    // f'(s) = s^{α−1} h(s); h has a single sign change from − to +.
    let h = |s: f64| la * s.powf(ga - al) - be * c1 * s.powf(be - al) - la * al * c2;
    let mut hi = 1.0;
    while h(hi) <= 0.0 {
        hi *= 2.0;
    }
    let s = crate::roots::bisect(h, 0.0, hi);
    Ok(f(s).min(0.0))
}
