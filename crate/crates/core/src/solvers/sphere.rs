//! Projected descent on the unit sphere of `W₀^{1,p}` in the Sobolev metric
//! of the `p = 2` stiffness matrix.

use crate::error::Result;
use crate::functionals::{self, stiffness};
use crate::linalg::BandLu;
use crate::mesh::{self, Field, Mesh, Rectify};

use super::SolverOptions;

/// Factored stiffness matrix `K` plus the sphere exponent.
pub struct SphereMetric<'m> {
    mesh: &'m Mesh,
    p: f64,
    k: crate::linalg::BandMatrix,
    lu: BandLu,
}

impl<'m> SphereMetric<'m> {
    pub fn new(mesh: &'m Mesh, p: f64) -> Result<Self> {
        let k = stiffness(mesh);
        let lu = k.clone().factor()?;
        Ok(SphereMetric { mesh, p, k, lu })
    }

    pub fn mesh(&self) -> &Mesh {
        self.mesh
    }

    /// Riesz representative `K⁻¹g` of a nodal gradient.
    pub fn sobolev(&self, g: &Field) -> Field {
        let mut x = g.values().to_vec();
        self.mesh.mask(&mut x);
        self.lu.solve(&mut x);
        self.mesh.mask(&mut x);
        Field::from_raw(x)
    }

    /// `xᵀKy`
    pub fn inner(&self, x: &Field, y: &Field) -> f64 {
        let kx = self.k.mul_vec(x.values());
        kx.iter().zip(y.values()).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self, x: &Field) -> f64 {
        self.inner(x, x).max(0.0).sqrt()
    }

    pub fn project(&self, v: &Field) -> Result<Field> {
        mesh::project_sphere(self.mesh, v, self.p)
    }

    /// Sobolev gradient with the component normal to the sphere at `v`
    /// removed. Returns the direction and `gᵀd_t`, `gᵀd`.
    pub fn tangential(&self, v: &Field, g: &Field) -> Result<(Field, f64, f64)> {
        let d = self.sobolev(g);
        let normal = functionals::kinetic_gradient(self.mesh, v, self.p)?;
        let n_s = self.sobolev(&normal);
        let denom = normal.dot(&n_s);
        let dt = if denom > 0.0 {
            d.axpy(-normal.dot(&d) / denom, &n_s)
        } else {
            d.clone()
        };
        Ok((dt.clone(), g.dot(&dt).max(0.0), g.dot(&d).max(0.0)))
    }
}

pub(crate) struct DescentOutcome {
    pub v: Field,
    pub iterations: usize,
    pub stationary: bool,
    /// Tangential over total gradient size at the final iterate.
    pub angle: f64,
    pub history: Vec<f64>,
}

/// Minimizes `objective` over the unit sphere. The objective returns `None`
/// for infeasible directions; such steps are halved like failed Armijo
/// tests. Every iterate is rectified with `|·|` and renormalized.
pub(crate) fn descend<F>(
    metric: &SphereMetric<'_>,
    v0: &Field,
    opts: &SolverOptions,
    mut objective: F,
) -> Result<DescentOutcome>
where
    F: FnMut(&Field) -> Result<Option<(f64, Field)>>,
{
    let retract = |x: &Field| metric.project(&mesh::rectify(x, Rectify::Absolute));
    let mut v = retract(v0)?;
    let (mut f, mut g) =
        objective(&v)?.ok_or_else(|| crate::Error::Precondition("initial direction is not admissible".into()))?;
    let mut history = vec![f];
    let mut step: Option<f64> = None;
    let mut angle = f64::INFINITY;
    let mut iterations = 0;
    let mut stationary = false;

    while iterations < opts.max_iterations {
        let (dt, gt, gfull) = metric.tangential(&v, &g)?;
        angle = if gfull > 0.0 { (gt / gfull).sqrt() } else { 0.0 };
        if angle <= opts.stationarity || gt == 0.0 {
            stationary = true;
            break;
        }
        let dt_norm = gt.sqrt();
        let mut s = step.unwrap_or(opts.step_size / dt_norm);
        let mut accepted = None;
        for _ in 0..60 {
            let cand = retract(&v.axpy(-s, &dt))?;
            if let Some((fc, gc)) = objective(&cand)? {
                if fc <= f - opts.armijo * s * gt && fc < f {
                    accepted = Some((cand, fc, gc));
                    break;
                }
            }
            s *= 0.5;
        }
        iterations += 1;
        match accepted {
            Some((cand, fc, gc)) => {
                v = cand;
                f = fc;
                g = gc;
                history.push(f);
                step = Some(2.0 * s);
            }
            None => break,
        }
    }
    Ok(DescentOutcome {
        v,
        iterations,
        stationary,
        angle,
        history,
    })
}
