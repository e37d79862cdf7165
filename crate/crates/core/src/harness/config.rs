use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::ExponentConfig;
use crate::mesh::MeshSpec;
use crate::solvers::SolverOptions;

/// How the problem parameter is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LambdaMode {
    Explicit(f64),
    /// Fraction of the computed threshold estimate, in `(0, 1]`.
    Fraction(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub mesh: MeshSpec,
    pub alpha: f64,
    pub p: f64,
    pub beta: f64,
    pub gamma: f64,
    pub lambda: LambdaMode,
    /// Sphere ascents used by the threshold estimate.
    pub threshold: SolverOptions,
    pub first: SolverOptions,
    pub third: SolverOptions,
    pub pass: SolverOptions,
    pub output_dir: Option<PathBuf>,
    pub seed: u64,
    /// Fractions of `λ*` probed by a sweep.
    pub sweep_fractions: Vec<f64>,
    /// Sweep fractions at which all three solutions are computed.
    pub solve_fractions: Vec<f64>,
}

impl Default for ScenarioConfig {
    /// The canonical scenario: `Ω = (0,1)`, 201 nodes, `(α,p,β,γ) =
    /// (1.5,2,3,4)`, `λ = λ*/2`.
    fn default() -> Self {
        ScenarioConfig {
            mesh: MeshSpec::interval(1.0, 201),
            alpha: 1.5,
            p: 2.0,
            beta: 3.0,
            gamma: 4.0,
            lambda: LambdaMode::Fraction(0.5),
            threshold: SolverOptions::default(),
            first: SolverOptions::default(),
            third: SolverOptions::default(),
            pass: SolverOptions {
                max_iterations: 20_000,
                ..SolverOptions::default()
            },
            output_dir: None,
            seed: 0,
            sweep_fractions: vec![0.1, 0.3, 0.5, 0.9, 2.0, 5.0, 20.0],
            solve_fractions: vec![0.5],
        }
    }
}

impl ScenarioConfig {
    pub fn exponents(&self) -> Result<ExponentConfig> {
        ExponentConfig::new(self.alpha, self.p, self.beta, self.gamma, 0.0, self.mesh.dimension)
    }

    pub fn validate(&self) -> Result<()> {
        self.mesh.validate()?;
        self.exponents()?;
        match self.lambda {
            LambdaMode::Explicit(l) if !(l.is_finite() && l > 0.0) => {
                return Err(Error::InvalidConfig(format!("λ = {l} must be positive")));
            }
            LambdaMode::Fraction(f) if !(f > 0.0 && f <= 1.0) => {
                return Err(Error::InvalidConfig(format!("λ fraction {f} is outside (0, 1]")));
            }
            _ => {}
        }
        for opts in [&self.threshold, &self.first, &self.third, &self.pass] {
            opts.validate()?;
        }
        for &f in self.sweep_fractions.iter().chain(&self.solve_fractions) {
            if !(f.is_finite() && f > 0.0) {
                return Err(Error::InvalidConfig(format!("sweep fraction {f} must be positive")));
            }
        }
        Ok(())
    }

    /// Parses the flat key-value format. Every key is optional and falls back
    /// to the canonical scenario:
    ///
    /// ```toml
    /// dimension = 1
    /// extents = [1.0]
    /// nodes = [201]
    /// alpha = 1.5
    /// p = 2.0
    /// beta = 3.0
    /// gamma = 4.0
    /// lambda_fraction = 0.5      # or: lambda = 0.01
    /// seed = 0
    /// output_dir = "out"
    /// solver.tolerance = 1e-8    # shared by every solver
    /// pass.max_iterations = 20000
    /// sweep.fractions = [0.1, 0.5, 2.0]
    /// sweep.solve = [0.5]
    /// ```
    ///
    /// `solver.*` sets options for all solvers; `threshold.*`, `first.*`,
    /// `third.*` and `pass.*` override them per solver.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let mut cfg = ScenarioConfig::default();
        if raw.dimension.is_some() || raw.extents.is_some() || raw.nodes.is_some() {
            let dimension = raw.dimension.unwrap_or(cfg.mesh.dimension);
            let extents = raw.extents.unwrap_or_else(|| vec![1.0; dimension]);
            let nodes = raw
                .nodes
                .ok_or_else(|| Error::InvalidConfig("mesh keys given without nodes".into()))?;
            cfg.mesh = MeshSpec {
                dimension,
                extents,
                nodes,
            };
        }
        cfg.alpha = raw.alpha.unwrap_or(cfg.alpha);
        cfg.p = raw.p.unwrap_or(cfg.p);
        cfg.beta = raw.beta.unwrap_or(cfg.beta);
        cfg.gamma = raw.gamma.unwrap_or(cfg.gamma);
        cfg.lambda = match (raw.lambda, raw.lambda_fraction) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidConfig(
                    "give either lambda or lambda_fraction, not both".into(),
                ));
            }
            (Some(l), None) => LambdaMode::Explicit(l),
            (None, Some(f)) => LambdaMode::Fraction(f),
            (None, None) => cfg.lambda,
        };
        cfg.seed = raw.seed.unwrap_or(cfg.seed);
        cfg.output_dir = raw.output_dir.or(cfg.output_dir);
        let shared = raw.solver.unwrap_or_default();
        cfg.threshold = merge(&cfg.threshold, &shared, raw.threshold.as_ref())?;
        cfg.first = merge(&cfg.first, &shared, raw.first.as_ref())?;
        cfg.third = merge(&cfg.third, &shared, raw.third.as_ref())?;
        cfg.pass = merge(&cfg.pass, &shared, raw.pass.as_ref())?;
        if let Some(sweep) = raw.sweep {
            cfg.sweep_fractions = sweep.fractions.unwrap_or(cfg.sweep_fractions);
            cfg.solve_fractions = sweep.solve.unwrap_or(cfg.solve_fractions);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml_str(&crate::io::read_text(path)?)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    dimension: Option<usize>,
    extents: Option<Vec<f64>>,
    nodes: Option<Vec<usize>>,
    alpha: Option<f64>,
    p: Option<f64>,
    beta: Option<f64>,
    gamma: Option<f64>,
    lambda: Option<f64>,
    lambda_fraction: Option<f64>,
    seed: Option<u64>,
    output_dir: Option<PathBuf>,
    solver: Option<toml::Table>,
    threshold: Option<toml::Table>,
    first: Option<toml::Table>,
    third: Option<toml::Table>,
    pass: Option<toml::Table>,
    sweep: Option<RawSweep>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    fractions: Option<Vec<f64>>,
    solve: Option<Vec<f64>>,
}

fn merge(base: &SolverOptions, shared: &toml::Table, specific: Option<&toml::Table>) -> Result<SolverOptions> {
    let mut table = toml::Table::try_from(base).map_err(|e| Error::Parse(e.to_string()))?;
    table.extend(shared.clone());
    if let Some(s) = specific {
        table.extend(s.clone());
    }
    toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| Error::InvalidConfig(e.to_string()))
}
