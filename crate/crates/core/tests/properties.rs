mod common;

use proptest::prelude::*;

use plap::fibering::{self, BranchId};
use plap::functionals::{self, ExponentConfig, Moments};
use plap::mesh::{self, Rectify};
use plap::{build_mesh, Mesh, MeshSpec};

fn cfg(lambda: f64) -> ExponentConfig {
    ExponentConfig::new(1.5, 2.0, 3.0, 4.0, lambda, 1).unwrap()
}

fn any_mesh() -> impl Strategy<Value = Mesh> {
    prop_oneof![
        (0.5..3.0f64, 5usize..60).prop_map(|(l, n)| build_mesh(&MeshSpec::interval(l, n)).unwrap()),
        (0.5..2.0f64, 0.5..2.0f64, 4usize..12, 4usize..12)
            .prop_map(|(a, b, nx, ny)| build_mesh(&MeshSpec::rectangle(a, b, nx, ny)).unwrap()),
    ]
}

fn moments() -> impl Strategy<Value = Moments> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
        .prop_map(|(a, b, c)| Moments::new(10f64.powf(a), 10f64.powf(b), 10f64.powf(c)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn energy_and_powers_are_homogeneous(mesh in any_mesh(), seed in any::<u64>(), t in -5.0..5.0f64, p in 1.2..4.0f64, q in 1.0..6.0f64) {
        let v = common::noise(&mesh, &mut common::rng(seed), -1.0, 1.0);
        let tv = v.scaled(t);
        let e = mesh::dirichlet_p_energy(&mesh, &v, p).unwrap();
        let et = mesh::dirichlet_p_energy(&mesh, &tv, p).unwrap();
        prop_assert!((et - t.abs().powf(p) * e).abs() <= 1e-12 * et.abs().max(1.0));
        let a = mesh::integrate_power(&mesh, &v, q).unwrap();
        let at = mesh::integrate_power(&mesh, &tv, q).unwrap();
        prop_assert!((at - t.abs().powf(q) * a).abs() <= 1e-12 * at.abs().max(1.0));
    }

    #[test]
    fn boundary_stays_zero(mesh in any_mesh(), seed in any::<u64>(), c in -3.0..3.0f64) {
        let mut rng = common::rng(seed);
        let v = common::noise(&mesh, &mut rng, -1.0, 1.0);
        let w = common::noise(&mesh, &mut rng, -1.0, 1.0);
        let cfg = ExponentConfig { dimension: mesh.dimension(), ..cfg(0.3) };
        let fields = [
            v.axpy(c, &w),
            mesh::project_sphere(&mesh, &v, 2.0).unwrap(),
            mesh::rectify(&v, Rectify::Absolute),
            mesh::rectify(&v, Rectify::PositivePart),
            functionals::grad_j_lambda(&mesh, &v, &cfg).unwrap(),
            functionals::grad_j_bar_lambda(&mesh, &v, &cfg).unwrap(),
        ];
        for f in &fields {
            prop_assert!(mesh.check_field(f).is_ok());
            for i in (0..mesh.len()).filter(|&i| mesh.is_boundary(i)) {
                prop_assert_eq!(f.values()[i], 0.0);
            }
        }
    }

    /// A tent with its apex on a node is piecewise linear, so the trapezoid
    /// rule and the cell gradients are exact.
    #[test]
    fn tent_quadrature_is_exact(len in 0.2..5.0f64, half in 2usize..50, p in 1.2..5.0f64) {
        let n = 2 * half + 1;
        let mesh = build_mesh(&MeshSpec::interval(len, n)).unwrap();
        let v = mesh.field_from_fn(|x, _| x.min(len - x));
        let area = mesh::integrate_power(&mesh, &v, 1.0).unwrap();
        prop_assert!((area - len * len / 4.0).abs() <= 1e-12 * len * len);
        let e = mesh::dirichlet_p_energy(&mesh, &v, p).unwrap();
        prop_assert!((e - len / p).abs() <= 1e-12 * len);
    }

    #[test]
    fn roots_solve_the_fibering_equation(m in moments(), lam in -2.0..0.0f64) {
        let cfg = cfg(10f64.powf(lam));
        let r = fibering::find_roots(&m, &cfg).unwrap();
        prop_assert!(r.count() <= 3);
        prop_assert!(r.roots.windows(2).all(|w| w[0] < w[1]));
        for &t in &r.roots {
            let (al, p, be, ga) = (cfg.alpha, cfg.p, cfg.beta, cfg.gamma);
            let scale = t.powf(p - al) + m.b * t.powf(be - al) + cfg.lambda * (m.c * t.powf(ga - al) + m.a);
            let f = fibering::phi(t, &m, &cfg).unwrap();
            prop_assert!(f.abs() <= 1e-10 * scale, "Φ({t}) = {f:e}");
        }
    }

    /// Membership survives a small perturbation of λ unless a root is nearly
    /// double.
    #[test]
    fn three_root_region_is_open(m in moments(), lam in -2.0..0.0f64, sign in prop::bool::ANY) {
        let cfg = cfg(10f64.powf(lam));
        prop_assume!(fibering::in_u_lambda(&m, &cfg));
        let r = fibering::find_roots(&m, &cfg).unwrap();
        let robust = r.roots.iter().all(|&t| {
            let scale = t.powf(cfg.p - cfg.alpha) + m.b * t.powf(cfg.beta - cfg.alpha);
            (t * fibering::phi_prime(t, &m, &cfg).unwrap()).abs() > 1e-3 * scale
        });
        prop_assume!(robust);
        let eps = if sign { 1e-9 } else { -1e-9 };
        prop_assert!(fibering::in_u_lambda(&m, &cfg.with_lambda(cfg.lambda * (1.0 + eps))));
    }

    /// `Ĵ' = t^{α−1}Φ`, so `Ĵ` rises between the first two roots and falls
    /// between the last two.
    #[test]
    fn fiber_energy_is_monotone_between_roots(m in moments(), lam in -2.0..0.0f64) {
        let cfg = cfg(10f64.powf(lam));
        prop_assume!(fibering::in_u_lambda(&m, &cfg));
        let r = fibering::find_roots(&m, &cfg).unwrap().roots;
        let samples = |a: f64, b: f64| -> Vec<f64> {
            (0..100).map(|i| fibering::j_hat(a + (b - a) * i as f64 / 99.0, &m, &cfg)).collect()
        };
        let tol = |x: f64| 1e-12 * x.abs().max(1.0);
        prop_assert!(samples(r[0], r[1]).windows(2).all(|w| w[1] >= w[0] - tol(w[0])));
        prop_assert!(samples(r[1], r[2]).windows(2).all(|w| w[1] <= w[0] + tol(w[0])));
        prop_assert!(fibering::j_hat(r[0], &m, &cfg) < fibering::j_hat(r[1], &m, &cfg));
    }

    /// When no gradient cell sees both signs, the nonlinearity acts on `v⁺`
    /// only and `⟨DJ̄(v), v⁻⟩ = ∫|∇v⁻|^p`.
    #[test]
    fn pairing_with_negative_part(n in 12usize..80, split in 0.2..0.8f64, p in 1.5..4.0f64, seed in any::<u64>()) {
        let mesh = build_mesh(&MeshSpec::interval(1.0, n)).unwrap();
        let mut rng = common::rng(seed);
        let k = ((n as f64 * split) as usize).clamp(3, n - 4);
        let raw = common::noise(&mesh, &mut rng, 0.1, 1.0);
        let vals: Vec<f64> = raw
            .values()
            .iter()
            .enumerate()
            .map(|(i, &x)| if i < k { x } else if i == k { 0.0 } else { -x })
            .collect();
        let v = mesh.field_masked(vals).unwrap();
        let neg = v.axpy(-1.0, &mesh::rectify(&v, Rectify::PositivePart));
        let cfg = ExponentConfig::new(1.2, p, p + 0.5, p + 1.5, 0.4, 1).unwrap();
        let g = functionals::grad_j_bar_lambda(&mesh, &v, &cfg).unwrap();
        let lhs = g.dot(&neg);
        let rhs = p * mesh::dirichlet_p_energy(&mesh, &neg, p).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1.0), "{lhs:e} vs {rhs:e}");
    }

    #[test]
    fn truncation_is_invisible_on_nonnegative_fields(mesh in any_mesh(), seed in any::<u64>()) {
        let v = common::noise(&mesh, &mut common::rng(seed), 0.0, 2.0);
        let cfg = ExponentConfig { dimension: mesh.dimension(), ..cfg(0.2) };
        let j = functionals::j_total(&mesh, &v, &cfg).unwrap();
        let jb = functionals::j_bar_lambda(&mesh, &v, &cfg).unwrap();
        prop_assert!((j - jb).abs() <= 1e-12 * j.abs().max(1.0));
        let g = functionals::grad_j_lambda(&mesh, &v, &cfg).unwrap();
        let gb = functionals::grad_j_bar_lambda(&mesh, &v, &cfg).unwrap();
        prop_assert!(g.sub(&gb).sup_norm() <= 1e-12 * g.sup_norm().max(1.0));
    }

    /// On the unit sphere the fibered value is the energy at the fibered
    /// point.
    #[test]
    fn fibered_value_is_energy_on_the_ray(seed in any::<u64>()) {
        let mesh = build_mesh(&MeshSpec::interval(1.0, 41)).unwrap();
        let v = common::smooth_positive(&mesh, &mut common::rng(seed));
        let v = mesh::project_sphere(&mesh, &v, 2.0).unwrap();
        let m = functionals::moments(&mesh, &v, &cfg(0.0)).unwrap();
        let mut c = cfg(0.05);
        while !fibering::in_u_lambda(&m, &c) {
            c = c.with_lambda(0.5 * c.lambda);
        }
        for branch in [BranchId::First, BranchId::Third] {
            let pt = fibering::fiber_point(&mesh, &v, branch, &c).unwrap();
            let j = functionals::j_total(&mesh, &v.scaled(pt.t), &c).unwrap();
            prop_assert!((j - pt.value).abs() <= 1e-12 * j.abs().max(1.0));
        }
    }
}
