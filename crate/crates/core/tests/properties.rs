use proptest::prelude::*;
use serrin_core::fem2d::{DomainSpec, Mesh, Shape};
use serrin_core::identities::{radial_reports, verify_divergence, IdentityKind, TestFunction, Tolerances};
use serrin_core::radial::{
    solve_ball_closed_form, solve_ball_numeric, solve_slab, BallProblem, SlabProblem, SolveOptions,
};
use serrin_core::{Interval, Warp, WarpModel};

fn model_strategy() -> impl Strategy<Value = (WarpModel, f64)> {
    (2usize..=6, 0usize..5, -2.0f64..2.0, -1.5f64..1.5).prop_map(|(n, which, fiber, k)| {
        let (warp, t) = match which {
            0 => (Warp::Exp, 0.3),
            1 => (Warp::Cosh, 0.8),
            2 => (Warp::Sphere { k: 1.0 }, 1.0),
            3 => (Warp::Hyperbolic { k: -1.0 }, 0.7),
            _ => (Warp::from_name("custom:t + 0.1*t^3", 0.0).unwrap(), 1.1),
        };
        let fiber = if n == 2 { 0.0 } else { fiber };
        let model = WarpModel::new(n, warp, Interval::new(0.05, 3.0).unwrap(), fiber, k).unwrap();
        (model, t)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn scalar_curvature_is_the_ricci_trace((model, t) in model_strategy()) {
        let s = model.curvature_sample(t).unwrap();
        let n = model.dim();
        let trace = s.ric_radial + (n - 1.0) * s.ric_fiber;
        prop_assert!((trace - s.scalar).abs() <= 1e-12 * (1.0 + s.scalar.abs()));
    }

    #[test]
    fn condition_bracket_is_a_multiple_of_the_laplacian((model, t) in model_strategy()) {
        let s = model.curvature_sample(t).unwrap();
        let n = model.dim();
        let k = model.k;
        let lhs = s.phi * (-s.scalar + n * (n - 1.0) * k) - 0.5 * s.xr;
        let rhs = (n - 1.0) * (s.laplacian_phi(model.n) + n * k * s.phi);
        let scale = 1.0 + (s.phi * s.scalar).abs() + s.xr.abs() + (n * n * k * s.phi).abs();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * scale, "{lhs} vs {rhs}");
    }

    #[test]
    fn numeric_ball_matches_closed_form(n in 2usize..=5, k in -1.5f64..1.5, frac in 0.1f64..0.9) {
        let model = WarpModel::space_form(n, k).unwrap();
        let radius = if k > 0.0 { frac * std::f64::consts::FRAC_PI_2 / k.sqrt() } else { 2.0 * frac };
        let p = BallProblem { model, radius };
        let exact = solve_ball_closed_form(&p, SolveOptions::default()).unwrap();
        let numeric = solve_ball_numeric(&p, SolveOptions::default()).unwrap();
        prop_assert!((exact.c - numeric.c).abs() <= 1e-9 * exact.c);
        let mid = 0.5 * radius;
        prop_assert!((exact.eval(mid)[0] - numeric.eval(mid)[0]).abs() <= 1e-9 * exact.eval(0.0)[0]);
    }

    #[test]
    fn divergence_theorem_on_slabs(n in 2usize..=5, k in -1.0f64..0.3, a in 0.3f64..1.0, width in 0.2f64..1.0) {
        let model = WarpModel::space_form(n, k).unwrap();
        let sol = solve_slab(&SlabProblem { model, a, b: a + width }, SolveOptions::default()).unwrap();
        let r = verify_divergence(&sol, 1e-8);
        prop_assert!(r.pass, "{:?}", r);
    }

    #[test]
    fn pass_implies_hypothesis(n in 2usize..=4, k in -1.0f64..0.0, a in 0.3f64..1.0, width in 0.2f64..1.0) {
        let model = WarpModel::space_form(n, k).unwrap();
        let sol = solve_slab(&SlabProblem { model, a, b: a + width }, SolveOptions::default()).unwrap();
        let kinds = IdentityKind::parse_list("all").unwrap();
        for r in radial_reports(&sol, &kinds, TestFunction::Square, &Tolerances::default()).unwrap() {
            prop_assert!(!r.pass || r.hypothesis_met, "{:?}", r);
            prop_assert!((r.residual_abs - (r.lhs - r.rhs).abs()).abs() <= 1e-15 * r.residual_abs.max(1.0) || !r.hypothesis_met);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn mesh_text_round_trip(which in 0usize..3, k in -1.0f64..1.0, h in 0.15f64..0.4) {
        let shape = match which {
            0 => Shape::Disk { radius: 0.7 },
            1 => Shape::Ellipse { a: 0.9, b: 0.6 },
            _ => Shape::PerturbedDisk { radius: 0.7, eps: 0.1, m: 3 },
        };
        let spec = DomainSpec::new(shape, k, h).unwrap();
        let mesh = Mesh::generate(&spec).unwrap();
        let back = Mesh::from_text(&mesh.to_text(), k).unwrap();
        prop_assert_eq!(back, mesh);
    }
}
