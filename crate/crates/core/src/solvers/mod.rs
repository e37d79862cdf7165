//! Critical-point solvers: branch minimization on the unit sphere, the
//! mountain pass, threshold estimation and Newton refinement.

mod branch;
mod mountain;
mod newton;
mod sphere;
mod threshold;

use serde::{Deserialize, Serialize};

use crate::functionals::EnergyBreakdown;
use crate::mesh::Field;

pub use branch::minimize_branch;
pub use mountain::{mountain_pass, mountain_pass_with_radius};
pub use newton::{refine_critical_point, Refinement};
pub use sphere::SphereMetric;
pub use threshold::{
    estimate_lambda_star, max_truncated_hump, maximize_a_on_sphere, maximize_b_on_sphere, maximize_power_on_sphere,
    LambdaStar,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Length of the first trial step, measured in the Sobolev norm.
    pub step_size: f64,
    /// Sufficient-decrease constant of the Armijo test.
    pub armijo: f64,
    /// Absolute residual target for a converged critical point.
    pub tolerance: f64,
    /// Stop sphere descent once the tangential part of the gradient is this
    /// small relative to the whole gradient.
    pub stationarity: f64,
    pub path_points: usize,
    pub seed: u64,
    /// Finish with Newton refinement.
    pub polish: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iterations: 5000,
            step_size: 0.1,
            armijo: 1e-4,
            tolerance: 1e-8,
            stationarity: 1e-8,
            path_points: 30,
            seed: 0,
            polish: true,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> crate::Result<()> {
        let ok = self.max_iterations > 0
            && self.step_size > 0.0
            && self.armijo > 0.0
            && self.armijo < 1.0
            && self.tolerance > 0.0
            && self.stationarity > 0.0
            && self.path_points >= 3;
        if ok {
            Ok(())
        } else {
            Err(crate::Error::InvalidConfig(format!("invalid solver options {self:?}")))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveBranch {
    First,
    Pass,
    Third,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub branch: SolveBranch,
    pub solution: Field,
    pub energy: EnergyBreakdown,
    pub iterations: usize,
    pub converged: bool,
    /// Fibering scale `t` with `solution = t·direction`; zero for the pass.
    pub t_scale: f64,
    /// Unit-norm direction for the fibered branches.
    pub direction: Option<Field>,
    /// Objective values at accepted descent iterations.
    #[serde(skip)]
    pub history: Vec<f64>,
}
