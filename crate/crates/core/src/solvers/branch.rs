use crate::error::{Error, Result};
use crate::fibering::{self, BranchId};
use crate::functionals::{self, ExponentConfig};
use crate::mesh::{self, Field, Mesh};

use super::sphere::{descend, SphereMetric};
use super::{refine_critical_point, SolveBranch, SolveResult, SolverOptions};

/// Minimizes `I_i(v) = Ĵ(t_i(v), v)` over the unit sphere and returns the
/// critical point `u = t_i(v*)·v*`.
///
/// Each iteration steps along the tangential Sobolev gradient with Armijo
/// backtracking, folds the iterate with `|·|` and renormalizes. For the third
/// branch, trial directions outside the three-root region are rejected by
/// halving the step. Non-convergence is reported through `converged`.
pub fn minimize_branch(
    mesh: &Mesh,
    v0: &Field,
    branch: BranchId,
    cfg: &ExponentConfig,
    opts: &SolverOptions,
) -> Result<SolveResult> {
    opts.validate()?;
    if v0.is_zero() {
        return Err(Error::Degenerate("initial direction is the zero field".into()));
    }
    let metric = SphereMetric::new(mesh, cfg.p)?;
    let start = metric.project(&mesh::rectify(v0, mesh::Rectify::Absolute))?;
    if branch == BranchId::Third {
        let m = functionals::moments(mesh, &start, cfg)?;
        if !fibering::in_u_lambda(&m, cfg) {
            return Err(Error::OutsideThreeRootRegion);
        }
    }

    let outcome = descend(&metric, &start, opts, |v| {
        match fibering::fiber_point(mesh, v, branch, cfg) {
            Ok(pt) => {
                let g = fibering::fibered_gradient_at(mesh, v, &pt, cfg)?;
                Ok(Some((pt.value, g)))
            }
            Err(Error::OutsideThreeRootRegion) | Err(Error::Precondition(_)) => Ok(None),
            Err(e) => Err(e),
        }
    })?;

    let t = fibering::fiber_point(mesh, &outcome.v, branch, cfg)?.t;
    let mut u = outcome.v.scaled(t);
    let mut residual = functionals::residual_norm(mesh, &functionals::grad_j_lambda(mesh, &u, cfg)?);
    if opts.polish && residual > opts.tolerance {
        if let Ok(r) = refine_critical_point(mesh, &u, cfg, opts) {
            if r.improved {
                u = r.solution;
                residual = r.residual;
            }
        }
    }
    let scale = mesh::w1p_norm(mesh, &u, cfg.p)?;
    let direction = u.scaled(1.0 / scale);
    let energy = functionals::j_lambda(mesh, &u, cfg)?;
    Ok(SolveResult {
        branch: match branch {
            BranchId::First => SolveBranch::First,
            BranchId::Third => SolveBranch::Third,
        },
        solution: u,
        energy,
        iterations: outcome.iterations,
        converged: residual <= opts.tolerance && energy.residual <= opts.tolerance,
        t_scale: scale,
        direction: Some(direction),
        history: outcome.history,
    })
}
