use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::ExponentConfig;
use crate::io::fmt_float;
use crate::mesh::{build_mesh, Mesh};
use crate::solvers::{self, LambdaStar};

use super::config::ScenarioConfig;
use super::scenario::solve_triple;

/// One parameter value of a sweep. Roots are those of the fibering equation
/// along the fixed direction `v*`; energies and scales come from full solves
/// and are present only at requested fractions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub fraction: f64,
    pub in_u_lambda: bool,
    pub root_count: usize,
    pub t1: Option<f64>,
    pub t2: Option<f64>,
    pub t3: Option<f64>,
    pub solved: bool,
    pub j1: Option<f64>,
    pub j2: Option<f64>,
    pub j3: Option<f64>,
    pub t_scale1: Option<f64>,
    pub t_scale3: Option<f64>,
    pub converged1: bool,
    pub converged2: bool,
    pub converged3: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BifurcationTable {
    pub lambda_star: f64,
    pub rows: Vec<SweepRow>,
}

pub const SWEEP_HEADER: [&str; 17] = [
    "lambda",
    "fraction",
    "in_u_lambda",
    "root_count",
    "t1",
    "t2",
    "t3",
    "solved",
    "j1",
    "j2",
    "j3",
    "t_scale1",
    "t_scale3",
    "converged1",
    "converged2",
    "converged3",
    "error",
];

impl BifurcationTable {
    pub fn to_csv(&self) -> Result<String> {
        let opt = |x: Option<f64>| x.map(fmt_float).unwrap_or_default();
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    fmt_float(r.lambda),
                    fmt_float(r.fraction),
                    r.in_u_lambda.to_string(),
                    r.root_count.to_string(),
                    opt(r.t1),
                    opt(r.t2),
                    opt(r.t3),
                    r.solved.to_string(),
                    opt(r.j1),
                    opt(r.j2),
                    opt(r.j3),
                    opt(r.t_scale1),
                    opt(r.t_scale3),
                    r.converged1.to_string(),
                    r.converged2.to_string(),
                    r.converged3.to_string(),
                    r.error.clone().unwrap_or_default(),
                ]
            })
            .collect();
        crate::io::table_to_csv(&SWEEP_HEADER, &rows)
    }

    /// Smallest sampled `λ` at which the three-root region is lost along `v*`.
    pub fn first_loss(&self) -> Option<f64> {
        self.rows.iter().find(|r| !r.in_u_lambda).map(|r| r.lambda)
    }

    /// True when no row regains the three-root region after losing it.
    pub fn loss_is_monotone(&self) -> bool {
        let mut lost = false;
        for r in &self.rows {
            if lost && r.in_u_lambda {
                return false;
            }
            lost |= !r.in_u_lambda;
        }
        true
    }

    /// Least-squares slope of `log t₁` against `log λ` over the rows inside
    /// the three-root region with `λ ≤ lambda_max`.
    pub fn t1_decay_exponent(&self, lambda_max: f64) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.in_u_lambda && r.lambda <= lambda_max)
            .filter_map(|r| Some((r.lambda.ln(), r.t1?.ln())))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        (sxx > 0.0).then(|| sxy / sxx)
    }
}

fn sweep_row(
    mesh: &Mesh,
    base: &ExponentConfig,
    sc: &ScenarioConfig,
    star: &LambdaStar,
    fraction: f64,
    solve: bool,
) -> SweepRow {
    let lambda = fraction * star.lambda_star;
    let mut row = SweepRow {
        lambda,
        fraction,
        in_u_lambda: false,
        root_count: 0,
        t1: None,
        t2: None,
        t3: None,
        solved: false,
        j1: None,
        j2: None,
        j3: None,
        t_scale1: None,
        t_scale3: None,
        converged1: false,
        converged2: false,
        converged3: false,
        error: None,
    };
    match star.roots_along_v_star(mesh, base, lambda) {
        Ok(roots) => {
            row.root_count = roots.count();
            row.in_u_lambda = roots.count() == 3 && !roots.degenerate;
            row.t1 = roots.roots.first().copied();
            row.t2 = roots.roots.get(1).copied();
            row.t3 = roots.roots.get(2).copied();
        }
        Err(e) => row.error = Some(format!("roots: {e}")),
    }
    if solve {
        row.solved = true;
        let cfg = base.with_lambda(lambda);
        let t = solve_triple(mesh, &cfg, sc, star);
        let mut errors = Vec::new();
        match t.first {
            Ok(r) => {
                row.j1 = Some(r.energy.total);
                row.t_scale1 = Some(r.t_scale);
                row.converged1 = r.converged;
            }
            Err(e) => errors.push(format!("first: {e}")),
        }
        match t.pass {
            Ok(r) => {
                row.j2 = Some(r.energy.total);
                row.converged2 = r.converged;
            }
            Err(e) => errors.push(format!("pass: {e}")),
        }
        match t.third {
            Ok(r) => {
                row.j3 = Some(r.energy.total);
                row.t_scale3 = Some(r.t_scale);
                row.converged3 = r.converged;
            }
            Err(e) => errors.push(format!("third: {e}")),
        }
        if !errors.is_empty() {
            let mut all: Vec<String> = row.error.take().into_iter().collect();
            all.extend(errors);
            row.error = Some(all.join("; "));
        }
    }
    row
}

/// Fibering analysis along `v*` at each `fraction·λ*` of `grid`, with full
/// solves at the fractions listed in `config.solve_fractions`. Rows run in
/// parallel and come back sorted by `λ`.
pub fn sweep_lambda(config: &ScenarioConfig, grid: &[f64]) -> Result<BifurcationTable> {
    config.validate()?;
    if let Some(f) = grid.iter().find(|f| !(f.is_finite() && **f > 0.0)) {
        return Err(Error::InvalidArgument(format!("sweep fraction {f} must be positive")));
    }
    let mesh = build_mesh(&config.mesh)?;
    let base = config.exponents()?;
    let star = solvers::estimate_lambda_star(&mesh, &base, &config.threshold)?;
    let mut fractions = grid.to_vec();
    fractions.sort_by(f64::total_cmp);
    fractions.dedup();
    let rows = fractions
        .par_iter()
        .map(|&f| {
            let solve = config.solve_fractions.contains(&f);
            sweep_row(&mesh, &base, config, &star, f, solve)
        })
        .collect();
    Ok(BifurcationTable {
        lambda_star: star.lambda_star,
        rows,
    })
}
