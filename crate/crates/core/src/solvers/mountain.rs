//! Discrete mountain-pass search on the truncated energy `J̄_λ`.
//!
//! A polygonal path joins `0` to an endpoint `w` below the mountain. Each
//! sweep relocates the highest vertex to the maximum of `J̄` on its two
//! adjacent segments, then pushes it downhill along the Sobolev gradient with
//! the path-tangent component removed. Vertices are redistributed to equal
//! Sobolev arc length every ten sweeps. Once the top vertex is roughly
//! stationary, Newton refinement is tried; its result is kept only if it is
//! nonnegative and lies between zero and the path maximum in energy.

use crate::error::{Error, Result};
use crate::functionals::{self, ExponentConfig};
use crate::mesh::{self, Field, Mesh};
use crate::roots::golden_max;

use super::newton::NEWTON_MAX_REL;
use super::sphere::SphereMetric;
use super::{refine_critical_point, SolveBranch, SolveResult, SolverOptions};

const REDISTRIBUTE_EVERY: usize = 10;

pub fn mountain_pass(mesh: &Mesh, w: &Field, cfg: &ExponentConfig, opts: &SolverOptions) -> Result<SolveResult> {
    mountain_pass_with_radius(mesh, w, None, cfg, opts)
}

/// As [`mountain_pass`], additionally requiring `‖w‖ > ρ`.
pub fn mountain_pass_with_radius(
    mesh: &Mesh,
    w: &Field,
    rho: Option<f64>,
    cfg: &ExponentConfig,
    opts: &SolverOptions,
) -> Result<SolveResult> {
    opts.validate()?;
    mesh.check_field(w)?;
    let jw = functionals::j_bar_lambda(mesh, w, cfg)?;
    if jw > 0.0 {
        return Err(Error::Precondition(format!(
            "endpoint energy {jw:.6e} is positive; w lies inside the mountain"
        )));
    }
    if let Some(rho) = rho {
        let nw = mesh::w1p_norm(mesh, w, cfg.p)?;
        if !(nw > rho) {
            return Err(Error::Precondition(format!(
                "endpoint norm {nw:.6e} does not exceed the mountain radius {rho:.6e}"
            )));
        }
    }

    let metric = SphereMetric::new(mesh, cfg.p)?;
    let energy = |z: &Field| functionals::j_bar_lambda(mesh, z, cfg);
    let m = opts.path_points;
    let mut path: Vec<Field> = (0..m).map(|j| w.scaled(j as f64 / (m - 1) as f64)).collect();
    let mut levels: Vec<f64> = path.iter().map(&energy).collect::<Result<_>>()?;

    let mut step: Option<f64> = None;
    let mut switch = NEWTON_MAX_REL;
    let mut sweeps = 0;
    let mut history = Vec::new();
    let mut best: Option<(Field, f64)> = None;
    while sweeps < opts.max_iterations {
        sweeps += 1;
        if sweeps % REDISTRIBUTE_EVERY == 0 {
            path = redistribute(&metric, &path);
            levels = path.iter().map(&energy).collect::<Result<_>>()?;
        }
        let k = (1..m - 1)
            .max_by(|&a, &b| levels[a].total_cmp(&levels[b]))
            .expect("path has interior vertices");

        // re-centre the vertex on the local maximum of the polyline
        let (prev, next) = (path[k - 1].clone(), path[k + 1].clone());
        let here = path[k].clone();
        let along = |a: &Field, b: &Field, s: f64| a.axpy(s, &b.sub(a));
        let (s1, e1) = golden_max(|s| energy(&along(&prev, &here, s)).unwrap_or(f64::NAN), 0.0, 1.0, 60);
        let (s2, e2) = golden_max(|s| energy(&along(&here, &next, s)).unwrap_or(f64::NAN), 0.0, 1.0, 60);
        if e1.max(e2) > levels[k] {
            path[k] = if e1 >= e2 {
                along(&prev, &here, s1)
            } else {
                along(&here, &next, s2)
            };
            levels[k] = e1.max(e2);
        }

        let z = path[k].clone();
        let g = functionals::grad_j_bar_lambda(mesh, &z, cfg)?;
        let res = functionals::residual_norm(mesh, &g);
        history.push(levels[k]);
        if levels[k] > 0.0 && res <= opts.tolerance {
            best = Some((z, res));
            break;
        }
        if opts.polish {
            let rel = functionals::relative_residual(mesh, &z, &g, cfg.p)?;
            if rel <= switch {
                if let Some((u, r)) = try_newton(mesh, &z, levels[k], cfg, opts)? {
                    best = Some((u, r));
                    break;
                }
                switch *= 0.1;
            }
        }

        let d = metric.sobolev(&g);
        let tangent = path[k + 1].sub(&path[k - 1]);
        let tt = metric.inner(&tangent, &tangent);
        let d_perp = if tt > 0.0 {
            d.axpy(-g.dot(&tangent) / tt, &tangent)
        } else {
            d
        };
        let slope = g.dot(&d_perp);
        if !(slope > 0.0) {
            continue;
        }
        let mut s = step.unwrap_or(opts.step_size / slope.sqrt());
        let mut moved = false;
        for _ in 0..60 {
            let cand = z.axpy(-s, &d_perp);
            let ec = energy(&cand)?;
            if ec <= levels[k] - opts.armijo * s * slope && ec < levels[k] {
                path[k] = cand;
                levels[k] = ec;
                moved = true;
                break;
            }
            s *= 0.5;
        }
        step = Some(if moved { 2.0 * s } else { opts.step_size / slope.sqrt() });
    }

    let (u, _) = match best {
        Some(b) => b,
        None => {
            let k = (1..m - 1)
                .max_by(|&a, &b| levels[a].total_cmp(&levels[b]))
                .expect("path has interior vertices");
            let g = functionals::grad_j_bar_lambda(mesh, &path[k], cfg)?;
            (path[k].clone(), functionals::residual_norm(mesh, &g))
        }
    };
    let energy = functionals::j_lambda(mesh, &u, cfg)?;
    let residual_bar = functionals::residual_norm(mesh, &functionals::grad_j_bar_lambda(mesh, &u, cfg)?);
    let jbar = functionals::j_bar_lambda(mesh, &u, cfg)?;
    Ok(SolveResult {
        branch: SolveBranch::Pass,
        converged: residual_bar <= opts.tolerance && jbar > 0.0 && u.min_value() >= -1e-10,
        solution: u,
        energy,
        iterations: sweeps,
        t_scale: 0.0,
        direction: None,
        history,
    })
}

/// Newton from a near-saddle vertex; accepted only if it lands on a
/// nonnegative critical point with positive energy no higher than the
/// current path maximum `ceiling`.
fn try_newton(
    mesh: &Mesh,
    z: &Field,
    ceiling: f64,
    cfg: &ExponentConfig,
    opts: &SolverOptions,
) -> Result<Option<(Field, f64)>> {
    let r = match refine_critical_point(mesh, z, cfg, opts) {
        Ok(r) => r,
        Err(Error::Precondition(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    if !r.improved || r.residual > opts.tolerance {
        return Ok(None);
    }
    let u = r.solution;
    let level = functionals::j_bar_lambda(mesh, &u, cfg)?;
    if u.min_value() < -1e-10 || level <= 0.0 || level > ceiling * (1.0 + 1e-9) {
        return Ok(None);
    }
    Ok(Some((u, r.residual)))
}

/// Resamples the polyline at equal Sobolev arc length, endpoints fixed.
fn redistribute(metric: &SphereMetric<'_>, path: &[Field]) -> Vec<Field> {
    let m = path.len();
    let mut cum = vec![0.0];
    for w in path.windows(2) {
        let l = metric.norm(&w[1].sub(&w[0]));
        cum.push(cum.last().unwrap() + l);
    }
    let total = *cum.last().unwrap();
    if !(total > 0.0) {
        return path.to_vec();
    }
    let mut out = Vec::with_capacity(m);
    out.push(path[0].clone());
    let mut seg = 0;
    for j in 1..m - 1 {
        let target = total * j as f64 / (m - 1) as f64;
        while seg + 1 < m - 1 && cum[seg + 1] < target {
            seg += 1;
        }
        let len = cum[seg + 1] - cum[seg];
        let s = if len > 0.0 { (target - cum[seg]) / len } else { 0.0 };
        out.push(path[seg].axpy(s, &path[seg + 1].sub(&path[seg])));
    }
    out.push(path[m - 1].clone());
    out
}
