//! Solves the canonical one-dimensional scenario and prints the three
//! solutions with their checks.

use plap::harness::{run_scenario, ScenarioConfig};

fn main() -> plap::Result<()> {
    let report = run_scenario(&ScenarioConfig::default())?;
    if let (Some(l), Some(ls)) = (report.lambda, report.lambda_star) {
        println!("lambda = {l:.6e} (lambda* = {ls:.6e})");
    }
    for r in report.results().into_iter().flatten() {
        println!(
            "{:<6} J = {:>13.6e}  sup = {:>11.4e}  residual = {:.1e}",
            format!("{:?}", r.branch).to_lowercase(),
            r.energy.total,
            r.solution.sup_norm(),
            r.energy.residual
        );
    }
    for c in &report.checks {
        println!("{} {}", if c.passed { "PASS" } else { "FAIL" }, c.name);
    }
    Ok(())
}
