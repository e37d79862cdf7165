use crate::error::{Error, Result};
use crate::functionals::{self, ExponentConfig};
use crate::mesh::{self, Field, Mesh};

use super::SolverOptions;

pub(crate) const NEWTON_MAX_REL: f64 = 1e-1;

/// Outcome of Newton polishing.
#[derive(Clone, Debug)]
pub struct Refinement {
    pub solution: Field,
    pub residual: f64,
    pub initial_residual: f64,
    pub iterations: usize,
    pub improved: bool,
    /// The linearization could not be factored.
    pub singular: bool,
}

/// Newton iteration on the truncated residual `DJ̄_λ(u) = 0`, which equals
/// `DJ_λ` on nonnegative fields. The kinetic Hessian uses the kernel
/// `(|G|² + ε²)^{(p−2)/2}` with `ε = 1e-10·mean|∇u|`. Steps are damped by
/// halving until the residual norm decreases; iteration stops once it no
/// longer does. Energy is not monitored.
pub fn refine_critical_point(
    mesh: &Mesh,
    u0: &Field,
    cfg: &ExponentConfig,
    opts: &SolverOptions,
) -> Result<Refinement> {
    let residual = |u: &Field| -> Result<f64> {
        Ok(functionals::residual_norm(
            mesh,
            &functionals::grad_j_bar_lambda(mesh, u, cfg)?,
        ))
    };
    let g0 = functionals::grad_j_bar_lambda(mesh, u0, cfg)?;
    let rel = functionals::relative_residual(mesh, u0, &g0, cfg.p)?;
    if rel > NEWTON_MAX_REL {
        return Err(Error::Precondition(format!(
            "relative residual {rel:.3e} is too large for Newton refinement"
        )));
    }
    let initial = functionals::residual_norm(mesh, &g0);
    let mut u = u0.clone();
    let mut r = initial;
    let mut iterations = 0;
    let mut singular = false;
    let max_iter = opts.max_iterations.min(100);
    while iterations < max_iter && r > 0.0 {
        let g = functionals::grad_j_bar_lambda(mesh, &u, cfg)?;
        let grads = mesh::gradient(mesh, &u)?;
        let mean_grad = grads.iter().map(|x| x.abs()).sum::<f64>() / grads.len() as f64;
        let hess = functionals::j_hessian(mesh, &u, cfg, 1e-10 * mean_grad, true);
        let lu = match hess.factor() {
            Ok(lu) => lu,
            Err(_) => {
                singular = true;
                break;
            }
        };
        let mut delta: Vec<f64> = g.values().iter().map(|x| -x).collect();
        lu.solve(&mut delta);
        mesh.mask(&mut delta);
        let delta = Field::from_raw(delta);
        let mut s = 1.0;
        let mut next = None;
        for _ in 0..30 {
            let cand = u.axpy(s, &delta);
            let rc = residual(&cand)?;
            if rc < r {
                next = Some((cand, rc));
                break;
            }
            s *= 0.5;
        }
        iterations += 1;
        match next {
            Some((cand, rc)) => {
                let stalled = rc > 0.5 * r && r < 1e-6 * initial.max(f64::MIN_POSITIVE);
                u = cand;
                r = rc;
                if stalled {
                    break;
                }
            }
            None => break,
        }
    }
    let improved = r < initial;
    Ok(Refinement {
        solution: if improved { u } else { u0.clone() },
        residual: r.min(initial),
        initial_residual: initial,
        iterations,
        improved,
        singular,
    })
}
