use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fibering::BranchId;
use crate::functionals::{self, ExponentConfig};
use crate::mesh::{self, build_mesh, Field, Mesh};
use crate::solvers::{self, LambdaStar, SolveResult};

use super::config::{LambdaMode, ScenarioConfig};

/// Relative sup-norm gap required between distinct solutions.
pub const DISTINCT_RTOL: f64 = 1e-3;
/// Most negative nodal value still counted as nonnegative.
pub const NONNEG_FLOOR: f64 = -1e-10;
/// Random directions sampled on the sphere of radius `ρ`.
pub const GEOMETRY_SAMPLES: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Measured quantities behind the verdict.
    pub values: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    fn new(name: &str, passed: bool, values: &[(&str, f64)]) -> Self {
        Check {
            name: name.to_string(),
            passed,
            values: values
                .iter()
                .filter(|(_, v)| v.is_finite())
                .map(|(k, v)| (k.to_string(), *v))
                .collect(),
            note: None,
        }
    }

    fn missing(name: &str, what: &str) -> Self {
        Check {
            name: name.to_string(),
            passed: false,
            values: BTreeMap::new(),
            note: Some(format!("{what} unavailable")),
        }
    }
}

/// Pairwise sup-norm distances between the three solutions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Distances {
    pub first_pass: f64,
    pub first_third: f64,
    pub pass_third: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub passed: bool,
    pub config: ScenarioConfig,
    pub lambda: Option<f64>,
    pub lambda_star: Option<f64>,
    pub rho: Option<f64>,
    pub first: Option<SolveResult>,
    pub pass: Option<SolveResult>,
    pub third: Option<SolveResult>,
    pub distances: Option<Distances>,
    pub checks: Vec<Check>,
    /// Errors met along the pipeline, in order.
    pub diagnostics: Vec<String>,
}

impl Report {
    fn empty(config: &ScenarioConfig) -> Self {
        Report {
            passed: false,
            config: config.clone(),
            lambda: None,
            lambda_star: None,
            rho: None,
            first: None,
            pass: None,
            third: None,
            distances: None,
            checks: Vec::new(),
            diagnostics: Vec::new(),
        }
    }

    pub fn results(&self) -> [Option<&SolveResult>; 3] {
        [self.first.as_ref(), self.pass.as_ref(), self.third.as_ref()]
    }

    /// Recomputes the solution checks from the stored solutions, keeps any
    /// other stored check, and updates the verdict.
    pub fn reverify(&mut self) {
        self.distances = distances(self);
        let fresh = verify_main_theorem(self);
        let names: Vec<String> = fresh.iter().map(|c| c.name.clone()).collect();
        self.checks.retain(|c| !names.contains(&c.name));
        let mut checks = fresh;
        checks.append(&mut self.checks);
        self.checks = checks;
        self.passed = !self.checks.is_empty() && self.checks.iter().all(|c| c.passed);
    }
}

fn distances(report: &Report) -> Option<Distances> {
    let [a, b, c] = report.results();
    let (a, b, c) = (&a?.solution, &b?.solution, &c?.solution);
    if a.len() != b.len() || a.len() != c.len() {
        return None;
    }
    Some(Distances {
        first_pass: a.sub(b).sup_norm(),
        first_third: a.sub(c).sup_norm(),
        pass_third: b.sub(c).sup_norm(),
    })
}

/// The five checks of the three-solution statement, computed from the stored
/// results. Missing results fail the checks that need them.
pub fn verify_main_theorem(report: &Report) -> Vec<Check> {
    let cfg = &report.config;
    let mut checks = Vec::with_capacity(5);
    let [first, pass, third] = report.results();

    checks.push(match (first, pass, third) {
        (Some(a), Some(b), Some(c)) => {
            let (j1, j2, j3) = (a.energy.total, b.energy.total, c.energy.total);
            Check::new(
                "energy_ordering",
                j1.max(j3) < 0.0 && 0.0 < j2,
                &[("j_first", j1), ("j_pass", j2), ("j_third", j3)],
            )
        }
        _ => Check::missing("energy_ordering", "a solution"),
    });

    let tol = [cfg.first.tolerance, cfg.pass.tolerance, cfg.third.tolerance];
    let names = ["first", "pass", "third"];
    checks.push(if report.results().iter().all(Option::is_some) {
        let mut ok = true;
        let mut vals = Vec::new();
        for ((r, t), n) in report.results().iter().zip(tol).zip(names) {
            let r = r.expect("checked above");
            ok &= r.converged && r.energy.residual <= t;
            vals.push((n, r.energy.residual));
        }
        Check::new("residuals", ok, &vals)
    } else {
        Check::missing("residuals", "a solution")
    });

    checks.push(if report.results().iter().all(Option::is_some) {
        let mins: Vec<(&str, f64)> = report
            .results()
            .iter()
            .zip(names)
            .map(|(r, n)| (n, r.expect("checked above").solution.min_value()))
            .collect();
        Check::new("nonnegativity", mins.iter().all(|(_, m)| *m >= NONNEG_FLOOR), &mins)
    } else {
        Check::missing("nonnegativity", "a solution")
    });

    checks.push(match (distances(report), first, pass, third) {
        (Some(d), Some(a), Some(b), Some(c)) => {
            let (s1, s2, s3) = (a.solution.sup_norm(), b.solution.sup_norm(), c.solution.sup_norm());
            let ok = d.first_pass > DISTINCT_RTOL * s1.max(s2)
                && d.first_third > DISTINCT_RTOL * s1.max(s3)
                && d.pass_third > DISTINCT_RTOL * s2.max(s3);
            Check::new(
                "distinctness",
                ok,
                &[
                    ("first_pass", d.first_pass),
                    ("first_third", d.first_third),
                    ("pass_third", d.pass_third),
                    ("sup_first", s1),
                    ("sup_pass", s2),
                    ("sup_third", s3),
                ],
            )
        }
        _ => Check::missing("distinctness", "a solution"),
    });

    checks.push(match (first, third) {
        (Some(a), Some(c)) => Check::new(
            "t_scale_separation",
            c.t_scale > a.t_scale,
            &[("t_first", a.t_scale), ("t_third", c.t_scale)],
        ),
        _ => Check::missing("t_scale_separation", "a fibered solution"),
    });
    checks
}

/// Positivity of `J̄` on the sphere of radius `rho` and nonpositivity at
/// `endpoint`, at the parameter carried by `cfg`. The sampled directions are
/// `v*` plus seeded random nodal noise.
pub fn mountain_geometry(
    mesh: &Mesh,
    cfg: &ExponentConfig,
    star: &LambdaStar,
    rho: f64,
    endpoint: &Field,
    seed: u64,
) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_sphere = f64::INFINITY;
    let mut dirs = vec![star.v_star.clone()];
    for _ in 0..GEOMETRY_SAMPLES {
        let vals = (0..mesh.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        dirs.push(mesh.field_masked(vals)?);
    }
    for d in &dirs {
        let unit = mesh::project_sphere(mesh, d, cfg.p)?;
        min_sphere = min_sphere.min(functionals::j_bar_lambda(mesh, &unit.scaled(rho), cfg)?);
    }
    let origin = functionals::j_bar_lambda(mesh, &mesh.zero_field(), cfg)?;
    let end = functionals::j_bar_lambda(mesh, endpoint, cfg)?;
    Ok(Check::new(
        "mountain_geometry",
        min_sphere > 0.0 && origin == 0.0 && end <= 0.0,
        &[
            ("min_on_sphere", min_sphere),
            ("at_origin", origin),
            ("at_endpoint", end),
            ("rho", rho),
        ],
    ))
}

/// Mountain-pass endpoint along the third-branch solution: the first of
/// `c·u₃`, `c ∈ {1.2, 1.5, 2, 4}`, with `J̄ ≤ 0`.
pub fn pass_endpoint(mesh: &Mesh, u3: &Field, cfg: &ExponentConfig) -> Result<Field> {
    for c in [1.2, 1.5, 2.0, 4.0] {
        let w = u3.scaled(c);
        if functionals::j_bar_lambda(mesh, &w, cfg)? <= 0.0 {
            return Ok(w);
        }
    }
    Err(Error::Precondition(
        "no multiple of the third-branch solution lies below the mountain".into(),
    ))
}

/// Resolves `λ` from the configuration and threshold estimate.
pub fn resolve_lambda(mode: LambdaMode, lambda_star: f64) -> f64 {
    match mode {
        LambdaMode::Explicit(l) => l,
        LambdaMode::Fraction(f) => f * lambda_star,
    }
}

/// The three solutions at one parameter value.
pub(crate) struct Triple {
    pub first: Result<SolveResult>,
    pub third: Result<SolveResult>,
    pub pass: Result<SolveResult>,
    pub endpoint: Option<Field>,
}

pub(crate) fn solve_triple(mesh: &Mesh, cfg: &ExponentConfig, sc: &ScenarioConfig, star: &LambdaStar) -> Triple {
    let (first, third) = rayon::join(
        || solvers::minimize_branch(mesh, &star.v_star, BranchId::First, cfg, &sc.first),
        || solvers::minimize_branch(mesh, &star.v_star, BranchId::Third, cfg, &sc.third),
    );
    let mut endpoint = None;
    let pass = match &third {
        Ok(r3) => pass_endpoint(mesh, &r3.solution, cfg).and_then(|w| {
            let r = solvers::mountain_pass_with_radius(mesh, &w, Some(star.rho), cfg, &sc.pass);
            endpoint = Some(w);
            r
        }),
        Err(e) => Err(Error::Precondition(format!(
            "no pass endpoint without the third branch: {e}"
        ))),
    };
    Triple {
        first,
        third,
        pass,
        endpoint,
    }
}

/// Full pipeline: threshold, the three solutions, and the checks. Only an
/// invalid configuration is an error; solver failures give a FAIL report.
pub fn run_scenario(config: &ScenarioConfig) -> Result<Report> {
    config.validate()?;
    let mesh = build_mesh(&config.mesh)?;
    let base = config.exponents()?;
    let mut report = Report::empty(config);

    match solvers::estimate_lambda_star(&mesh, &base, &config.threshold) {
        Err(e) => report.diagnostics.push(format!("threshold: {e}")),
        Ok(star) => {
            let lambda = resolve_lambda(config.lambda, star.lambda_star);
            report.lambda = Some(lambda);
            report.lambda_star = Some(star.lambda_star);
            report.rho = Some(star.rho);
            let cfg = base.with_lambda(lambda);
            let t = solve_triple(&mesh, &cfg, config, &star);
            for (slot, res, name) in [
                (&mut report.first, t.first, "first"),
                (&mut report.third, t.third, "third"),
                (&mut report.pass, t.pass, "pass"),
            ] {
                match res {
                    Ok(r) => {
                        if !r.converged {
                            report.diagnostics.push(format!(
                                "{name}: not converged after {} iterations (residual {:e})",
                                r.iterations, r.energy.residual
                            ));
                        }
                        *slot = Some(r);
                    }
                    Err(e) => report.diagnostics.push(format!("{name}: {e}")),
                }
            }
            let (geo_cfg, endpoint) = match t.endpoint {
                Some(w) => (cfg, w),
                None => (base.with_lambda(star.lambda_star), star.witness.clone()),
            };
            match mountain_geometry(&mesh, &geo_cfg, &star, star.rho, &endpoint, config.seed) {
                Ok(c) => report.checks.push(c),
                Err(e) => report.diagnostics.push(format!("mountain geometry: {e}")),
            }
        }
    }
    report.reverify();
    Ok(report)
}
