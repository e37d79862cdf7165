//! Acceptance suite: nine criteria, one PASS/FAIL line each. Exits nonzero if
//! any criterion fails.

mod common;

use std::time::{Duration, Instant};

use rand::Rng;

use plap::fibering::{self, BranchId};
use plap::functionals::{self, coercivity_bound};
use plap::harness::{self, run_scenario, sweep_lambda, Format, ScenarioConfig};
use plap::solvers::{estimate_lambda_star, LambdaStar, SolverOptions};
use plap::{build_mesh, mesh, ExponentConfig, Field, Mesh, MeshSpec, Moments};

/// Residual required of each canonical solution.
const RESIDUAL_TOL: f64 = 1e-8;
/// Wall-clock budget for the canonical run.
const RUNTIME_BUDGET: Duration = Duration::from_secs(60);
const NONNEG_FLOOR: f64 = -1e-10;
const DISTINCT_RTOL: f64 = 1e-3;

const GRAD_FIELDS: usize = 20;
const GRAD_RTOL_P2: f64 = 1e-6;
const GRAD_RTOL_P3: f64 = 1e-4;

const ROOT_TRIPLES: usize = 1000;
const ROOT_SCAN_POINTS: usize = 100_000;
const ROOT_ATOL: f64 = 1e-10;

const INTERLACE_SAMPLES: usize = 200;

const GEOMETRY_DIRECTIONS: usize = 20;

const SWEEP_MAX_FRACTION: f64 = 20.0;

const COERCIVITY_FIELDS: usize = 100;
const COERCIVITY_RAYS: usize = 10;
const RAY_LEVEL: f64 = 1.0;
const RAY_LIMIT: f64 = 1e6;

const MESH_STABILITY_RTOL: f64 = 0.02;

fn canonical() -> ExponentConfig {
    ExponentConfig::new(1.5, 2.0, 3.0, 4.0, 0.0, 1).unwrap()
}

fn canonical_mesh(n: usize) -> Mesh {
    build_mesh(&MeshSpec::interval(1.0, n)).unwrap()
}

fn threshold(mesh: &Mesh) -> LambdaStar {
    estimate_lambda_star(mesh, &canonical(), &SolverOptions::default()).unwrap()
}

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn three_solutions() -> Outcome {
    let start = Instant::now();
    let report = run_scenario(&ScenarioConfig::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let failed: Vec<&str> = report
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.as_str())
        .collect();
    ensure(report.passed, || {
        format!("failed checks {failed:?}; {:?}", report.diagnostics)
    })?;
    let [a, b, c] = report.results().map(|r| r.expect("present in a passing report"));
    for r in [a, b, c] {
        ensure(r.converged && r.energy.residual < RESIDUAL_TOL, || {
            format!("{:?} residual {:e}", r.branch, r.energy.residual)
        })?;
        ensure(r.solution.min_value() >= NONNEG_FLOOR, || {
            format!("{:?} goes negative", r.branch)
        })?;
    }
    let (j1, j2, j3) = (a.energy.total, b.energy.total, c.energy.total);
    ensure(j1.max(j3) < 0.0 && 0.0 < j2, || {
        format!("energies {j1:e} {j2:e} {j3:e}")
    })?;
    let d = report.distances.expect("three solutions");
    let sup = [a, b, c].map(|r| r.solution.sup_norm());
    let gaps = [
        (d.first_pass, sup[0].max(sup[1])),
        (d.first_third, sup[0].max(sup[2])),
        (d.pass_third, sup[1].max(sup[2])),
    ];
    ensure(gaps.iter().all(|(g, s)| *g > DISTINCT_RTOL * s), || {
        format!("distances {gaps:?}")
    })?;
    ensure(elapsed < RUNTIME_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "J = ({j1:.3e}, {j2:.3e}, {j3:.3e}), max residual {:.1e}, {:.2?}",
        a.energy.residual.max(b.energy.residual).max(c.energy.residual),
        elapsed
    ))
}

fn central_difference(mesh: &Mesh, v: &Field, f: impl Fn(&Field) -> f64) -> Vec<f64> {
    let scale = v.sup_norm().max(1.0);
    let h = 1e-5 * scale;
    (0..mesh.len())
        .map(|i| {
            if mesh.is_boundary(i) {
                return 0.0;
            }
            let mut e = vec![0.0; mesh.len()];
            e[i] = h;
            let e = mesh.field_masked(e).unwrap();
            (f(&v.axpy(1.0, &e)) - f(&v.axpy(-1.0, &e))) / (2.0 * h)
        })
        .collect()
}

fn rel_error(g: &Field, fd: &[f64]) -> f64 {
    let num: f64 = g.values().iter().zip(fd).map(|(a, b)| (a - b).powi(2)).sum();
    let den: f64 = g.values().iter().map(|a| a * a).sum();
    (num / den).sqrt()
}

fn gradient_oracle() -> Outcome {
    let mut worst = [0.0f64; 2];
    let mut fibered = 0;
    for (slot, (p, beta, gamma, tol)) in [(2.0, 3.0, 4.0, GRAD_RTOL_P2), (3.0, 4.0, 5.0, GRAD_RTOL_P3)]
        .into_iter()
        .enumerate()
    {
        let mut rng = common::rng(100 + slot as u64);
        let meshes = [
            canonical_mesh(41),
            build_mesh(&MeshSpec::rectangle(1.0, 1.0, 9, 9)).unwrap(),
        ];
        for k in 0..GRAD_FIELDS {
            let mesh = &meshes[k % 2];
            let cfg = ExponentConfig::new(1.5, p, beta, gamma, 0.3, mesh.dimension()).unwrap();
            let v = common::smooth_positive(mesh, &mut rng).axpy(1.0, &common::noise(mesh, &mut rng, 0.0, 0.05));
            let g = functionals::grad_j_lambda(mesh, &v, &cfg).unwrap();
            let fd = central_difference(mesh, &v, |z| functionals::j_total(mesh, z, &cfg).unwrap());
            let e = rel_error(&g, &fd);
            worst[slot] = worst[slot].max(e);
            ensure(e < tol, || format!("p = {p}, field {k}: energy gradient error {e:e}"))?;

            // the fibered functional on the unit sphere, first and (if it
            // exists) third branch
            let u = mesh::project_sphere(mesh, &v, p).unwrap();
            let m = functionals::moments(mesh, &u, &cfg).unwrap();
            let mut lam = 0.3;
            while !fibering::in_u_lambda(&m, &cfg.with_lambda(lam)) && lam > 1e-12 {
                lam *= 0.5;
            }
            let fc = cfg.with_lambda(lam);
            for branch in [BranchId::First, BranchId::Third] {
                let Ok(g) = fibering::fibered_gradient(mesh, &u, branch, &fc) else {
                    continue;
                };
                let fd = central_difference(mesh, &u, |z| fibering::fibered_value(mesh, z, branch, &fc).unwrap());
                let e = rel_error(&g, &fd);
                worst[slot] = worst[slot].max(e);
                fibered += 1;
                ensure(e < tol, || {
                    format!("p = {p}, field {k}, {branch:?} branch: fibered gradient error {e:e}")
                })?;
            }
        }
    }
    ensure(fibered >= 2 * GRAD_FIELDS, || {
        format!("only {fibered} fibered gradients checked")
    })?;
    Ok(format!(
        "worst relative error {:.1e} (p = 2), {:.1e} (p = 3); {fibered} fibered gradients",
        worst[0], worst[1]
    ))
}

/// Independent root scan: sign changes of `Φ` on a log grid covering every
/// possible root, refined by plain bisection.
fn scan_roots(m: &Moments, cfg: &ExponentConfig) -> Vec<f64> {
    let (al, p, be, ga, la) = (cfg.alpha, cfg.p, cfg.beta, cfg.gamma, cfg.lambda);
    let phi = |t: f64| t.powf(p - al) - m.b * t.powf(be - al) + la * m.c * t.powf(ga - al) - la * m.a;
    // Φ < 0 below min((λA/2)^{1/(p−α)}, (A/2C)^{1/(γ−α)}); Φ > 0 above
    // max((2B/λC)^{1/(γ−β)}, (2A/C)^{1/(γ−α)})
    let lo = (la * m.a / 2.0)
        .powf(1.0 / (p - al))
        .min((m.a / (2.0 * m.c)).powf(1.0 / (ga - al)));
    let hi = (2.0 * m.b / (la * m.c))
        .powf(1.0 / (ga - be))
        .max((2.0 * m.a / m.c).powf(1.0 / (ga - al)));
    let (l0, l1) = ((lo / 2.0).ln(), (hi * 2.0).ln());
    let grid: Vec<f64> = (0..ROOT_SCAN_POINTS)
        .map(|i| (l0 + (l1 - l0) * i as f64 / (ROOT_SCAN_POINTS - 1) as f64).exp())
        .collect();
    let mut roots = Vec::new();
    for w in grid.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let (fa, fb) = (phi(a), phi(b));
        if fa == 0.0 {
            roots.push(a);
            continue;
        }
        if fa.signum() == fb.signum() {
            continue;
        }
        loop {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if phi(mid).signum() == fa.signum() {
                a = mid;
            } else {
                b = mid;
            }
        }
        roots.push(0.5 * (a + b));
    }
    roots
}

fn root_oracle() -> Outcome {
    let mut rng = common::rng(7);
    let mut three = 0;
    let mut worst = 0.0f64;
    for k in 0..ROOT_TRIPLES {
        let lg = |rng: &mut rand_chacha::ChaCha8Rng, lo: f64, hi: f64| 10f64.powf(rng.gen_range(lo..hi));
        let m = Moments::new(
            lg(&mut rng, -1.0, 1.0),
            lg(&mut rng, -1.0, 1.0),
            lg(&mut rng, -1.0, 1.0),
        );
        let cfg = canonical().with_lambda(lg(&mut rng, -2.0, 0.0));
        let found = fibering::find_roots(&m, &cfg).map_err(|e| format!("triple {k}: {e}"))?;
        ensure(found.count() <= 3, || format!("triple {k}: {} roots", found.count()))?;
        let want = scan_roots(&m, &cfg);
        ensure(want.len() == found.count(), || {
            format!(
                "triple {k} {m:?} λ = {}: {:?} vs scan {want:?}",
                cfg.lambda, found.roots
            )
        })?;
        for (a, b) in found.roots.iter().zip(&want) {
            worst = worst.max((a - b).abs());
            ensure((a - b).abs() <= ROOT_ATOL, || {
                format!("triple {k}: root {a} vs scan {b}")
            })?;
        }
        three += usize::from(found.count() == 3);
    }
    Ok(format!(
        "{ROOT_TRIPLES} triples ({three} with three roots), worst gap {worst:.1e}"
    ))
}

/// Unit-sphere samples in the three-root region at `λ = λ*/2`.
fn region_samples(mesh: &Mesh, cfg: &ExponentConfig, count: usize, seed: u64) -> Result<Vec<(Field, Moments)>, String> {
    let mut rng = common::rng(seed);
    let mut out = Vec::new();
    let mut tries = 0;
    while out.len() < count {
        tries += 1;
        if tries > 50 * count {
            return Err(format!("only {} of {count} samples fell in the region", out.len()));
        }
        let v = common::smooth_positive(mesh, &mut rng);
        let v = mesh::project_sphere(mesh, &v, cfg.p).map_err(|e| e.to_string())?;
        let m = functionals::moments(mesh, &v, cfg).map_err(|e| e.to_string())?;
        if fibering::in_u_lambda(&m, cfg) {
            out.push((v, m));
        }
    }
    Ok(out)
}

fn interlacing_check(mesh: &Mesh, star: &LambdaStar) -> Outcome {
    let cfg = canonical().with_lambda(0.5 * star.lambda_star);
    let samples = region_samples(mesh, &cfg, INTERLACE_SAMPLES, 11)?;
    let mut min_gap = f64::INFINITY;
    for (k, (_, m)) in samples.iter().enumerate() {
        let (tilde, ok) = fibering::interlacing(m, &cfg).map_err(|e| format!("sample {k}: {e}"))?;
        let r = fibering::find_roots(m, &cfg).map_err(|e| e.to_string())?.roots;
        let gaps = [tilde.t1 - r[0], tilde.t2 - tilde.t1, r[1] - tilde.t2];
        ensure(ok && gaps.iter().all(|g| *g > 0.0), || {
            format!("sample {k}: gaps {gaps:?}")
        })?;
        let upper = [tilde.t1, tilde.t2, r[1]];
        min_gap = gaps.iter().zip(upper).map(|(g, u)| g / u).fold(min_gap, f64::min);
    }
    Ok(format!(
        "{INTERLACE_SAMPLES} samples, smallest relative gap {min_gap:.2e}"
    ))
}

fn sign_structure(mesh: &Mesh, star: &LambdaStar) -> Outcome {
    let cfg = canonical().with_lambda(0.5 * star.lambda_star);
    let samples = region_samples(mesh, &cfg, INTERLACE_SAMPLES, 13)?;
    for (k, (_, m)) in samples.iter().enumerate() {
        let r = fibering::find_roots(m, &cfg).map_err(|e| e.to_string())?.roots;
        let (j1, j2) = (fibering::j_hat(r[0], m, &cfg), fibering::j_hat(r[1], m, &cfg));
        ensure(j1 < 0.0 && 0.0 < j2, || {
            format!("sample {k}: Ĵ(t₁) = {j1:e}, Ĵ(t₂) = {j2:e}")
        })?;
    }
    let w = mesh::project_sphere(mesh, &star.witness, cfg.p).map_err(|e| e.to_string())?;
    let m = functionals::moments(mesh, &w, &cfg).map_err(|e| e.to_string())?;
    let r = fibering::find_roots(&m, &cfg).map_err(|e| e.to_string())?;
    ensure(r.count() == 3, || format!("witness direction has {} roots", r.count()))?;
    let j3 = fibering::j_hat(r.roots[2], &m, &cfg);
    ensure(j3 < 0.0, || format!("Ĵ(t₃(w)) = {j3:e}"))?;
    Ok(format!("{INTERLACE_SAMPLES} samples; witness Ĵ(t₃) = {j3:.3e}"))
}

fn mountain_geometry(mesh: &Mesh, star: &LambdaStar) -> Outcome {
    let cfg = canonical().with_lambda(star.lambda_star);
    let mut rng = common::rng(17);
    let mut lowest = f64::INFINITY;
    for k in 0..GEOMETRY_DIRECTIONS {
        // half rough, half smooth directions
        let d = if k % 2 == 0 {
            common::noise(mesh, &mut rng, -1.0, 1.0)
        } else {
            common::smooth_positive(mesh, &mut rng)
        };
        let u = mesh::project_sphere(mesh, &d, cfg.p).map_err(|e| e.to_string())?;
        let j = functionals::j_bar_lambda(mesh, &u.scaled(star.rho), &cfg).map_err(|e| e.to_string())?;
        lowest = lowest.min(j);
        ensure(j > 0.0, || {
            format!("direction {k}: J̄ = {j:e} on the sphere of radius ρ")
        })?;
    }
    let origin = functionals::j_bar_lambda(mesh, &mesh.zero_field(), &cfg).map_err(|e| e.to_string())?;
    let end = functionals::j_bar_lambda(mesh, &star.witness, &cfg).map_err(|e| e.to_string())?;
    ensure(origin == 0.0, || format!("J̄(0) = {origin:e}"))?;
    ensure(end <= 0.0, || format!("J̄(w) = {end:e}"))?;
    let wn = mesh::w1p_norm(mesh, &star.witness, cfg.p).map_err(|e| e.to_string())?;
    ensure(wn > star.rho, || format!("‖w‖ = {wn} inside radius ρ = {}", star.rho))?;
    Ok(format!(
        "ρ = {:.3}, min J̄ on sphere {lowest:.3e}, J̄(w) = {end:.3e}",
        star.rho
    ))
}

fn threshold_behavior() -> Outcome {
    let small = [1e-6, 1e-5, 1e-4, 1e-3, 1e-2];
    let inside = [0.1, 0.3, 0.5, 0.9];
    let beyond = [2.0, 5.0, SWEEP_MAX_FRACTION];
    let grid: Vec<f64> = small.iter().chain(&inside).chain(&beyond).copied().collect();
    let config = ScenarioConfig {
        solve_fractions: inside.to_vec(),
        ..ScenarioConfig::default()
    };
    let table = sweep_lambda(&config, &grid).map_err(|e| e.to_string())?;
    ensure(table.rows.windows(2).all(|w| w[0].lambda < w[1].lambda), || {
        "rows not sorted".into()
    })?;
    for r in table.rows.iter().filter(|r| r.fraction <= 0.9) {
        ensure(r.in_u_lambda, || {
            format!("three-root region missing at {}·λ*", r.fraction)
        })?;
    }
    for r in table.rows.iter().filter(|r| r.solved) {
        let (j1, j3) = (r.j1.unwrap_or(f64::NAN), r.j3.unwrap_or(f64::NAN));
        ensure(j1 < 0.0 && j3 < 0.0, || {
            format!("at {}·λ*: J(u₁) = {j1:e}, J(u₃) = {j3:e}", r.fraction)
        })?;
    }
    let lost = table.first_loss().ok_or("three-root region never lost up to 20·λ*")?;
    ensure(table.loss_is_monotone(), || {
        "three-root region regained after loss".into()
    })?;
    let slope = table
        .t1_decay_exponent(1e-2 * table.lambda_star)
        .ok_or("not enough small-λ rows to fit")?;
    ensure(slope > 0.0, || format!("t₁ decay exponent {slope}"))?;
    Ok(format!(
        "region lost at {:.2}·λ*, t₁ ~ λ^{slope:.3}",
        lost / table.lambda_star
    ))
}

fn coercivity(mesh: &Mesh, star: &LambdaStar) -> Outcome {
    let cfg = canonical().with_lambda(0.5 * star.lambda_star);
    let bound = coercivity_bound(&cfg, mesh.measure()).map_err(|e| e.to_string())?;
    let mut rng = common::rng(23);
    let mut slack = f64::INFINITY;
    for k in 0..COERCIVITY_FIELDS {
        let amp = 10f64.powf(rng.gen_range(-3.0..3.0));
        let v = if k % 2 == 0 {
            common::noise(mesh, &mut rng, -amp, amp)
        } else {
            common::smooth_positive(mesh, &mut rng).scaled(amp)
        };
        let r = functionals::r_lambda(&functionals::moments(mesh, &v, &cfg).map_err(|e| e.to_string())?, &cfg);
        slack = slack.min(r - bound);
        ensure(bound <= r, || format!("field {k}: R = {r:e} below bound {bound:e}"))?;
    }
    let mut crossing = 0.0f64;
    for k in 0..COERCIVITY_RAYS {
        let d = common::smooth_positive(mesh, &mut rng).axpy(1.0, &common::noise(mesh, &mut rng, -0.2, 0.2));
        let v = mesh::project_sphere(mesh, &d, cfg.p).map_err(|e| e.to_string())?;
        let mut t = 1.0;
        loop {
            let j = functionals::j_total(mesh, &v.scaled(t), &cfg).map_err(|e| e.to_string())?;
            if j > RAY_LEVEL {
                crossing = crossing.max(t);
                break;
            }
            t *= 1.05;
            ensure(t < RAY_LIMIT, || {
                format!("ray {k} stays below {RAY_LEVEL} up to t = {RAY_LIMIT:e}")
            })?;
        }
    }
    Ok(format!(
        "bound {bound:.3e} (min slack {slack:.2e}); rays cross +1 by t = {crossing:.3e}"
    ))
}

fn determinism_and_stability() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = ScenarioConfig {
        seed: 42,
        ..ScenarioConfig::default()
    };
    let a = run_scenario(&config).map_err(|e| e.to_string())?;
    let b = run_scenario(&config).map_err(|e| e.to_string())?;
    let (pa, pb) = (dir.path().join("a.json"), dir.path().join("b.json"));
    harness::export_report(&a, Format::Json, &pa).map_err(|e| e.to_string())?;
    harness::export_report(&b, Format::Json, &pb).map_err(|e| e.to_string())?;
    let (ba, bb) = (std::fs::read(&pa).unwrap(), std::fs::read(&pb).unwrap());
    ensure(ba == bb, || "reports differ byte-wise".into())?;

    let coarse = run_scenario(&ScenarioConfig {
        mesh: MeshSpec::interval(1.0, 101),
        ..config.clone()
    })
    .map_err(|e| e.to_string())?;
    ensure(a.passed && coarse.passed, || "a canonical run failed".into())?;
    let mut worst = 0.0f64;
    for (f, c) in a.results().iter().zip(coarse.results()) {
        let (f, c) = (f.unwrap().energy.total, c.unwrap().energy.total);
        let rel = (f - c).abs() / f.abs().max(c.abs());
        worst = worst.max(rel);
        ensure(rel < MESH_STABILITY_RTOL, || {
            format!("energies {c:e} (n=101) vs {f:e} (n=201)")
        })?;
    }
    Ok(format!(
        "{} identical bytes; worst n=101/201 energy gap {:.2}%",
        ba.len(),
        100.0 * worst
    ))
}

fn main() {
    let mesh = canonical_mesh(201);
    let star = threshold(&mesh);
    let criteria: Vec<Criterion> = vec![
        ("three-solution reproduction", Box::new(three_solutions)),
        ("gradient oracle", Box::new(gradient_oracle)),
        ("fibering root oracle", Box::new(root_oracle)),
        ("interlacing", Box::new(|| interlacing_check(&mesh, &star))),
        ("sign structure", Box::new(|| sign_structure(&mesh, &star))),
        ("mountain geometry", Box::new(|| mountain_geometry(&mesh, &star))),
        ("threshold behavior", Box::new(threshold_behavior)),
        ("coercivity", Box::new(|| coercivity(&mesh, &star))),
        ("determinism and mesh stability", Box::new(determinism_and_stability)),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome =
            std::panic::catch_unwind(std::panic::AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail} [{took:.2?}]", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {}: FAIL {name}: {detail} [{took:.2?}]", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
