use lorentz_comparison::comparison_ode::{f_c, f_c_inverse, solve_h, CurvatureProfile};
use lorentz_comparison::estimates::{check_estimate, Direction};
use lorentz_comparison::experiment::{run, ExperimentConfig};
use lorentz_comparison::hypersurface::{construct_hypersurface, shape_data, HypersurfaceSpec};
use lorentz_comparison::spacetime::SpacetimeModel;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // h'² − G h² is conserved and equals h'(0)² = 1.
    #[test]
    fn first_integral_is_conserved(g in -2.0f64..2.0) {
        let sol = solve_h(&CurvatureProfile::constant(g), 2.0, 1e-3).unwrap();
        for i in (0..sol.grid.n).step_by(37) {
            let e = sol.h_prime[i].powi(2) - g * sol.h[i].powi(2);
            prop_assert!((e - 1.0).abs() < 1e-9, "t = {}: {e}", sol.grid.t(i));
        }
    }

    #[test]
    fn slope_inverse_round_trips(c in prop::sample::select(vec![-1.0, 0.0, 1.0]), t in 0.05f64..1.5) {
        let back = f_c_inverse(c, f_c(c, t).unwrap()).unwrap();
        prop_assert!((back - t).abs() < 1e-9);
    }

    #[test]
    fn spheres_have_mean_curvature_f_c(c in prop::sample::select(vec![-1.0, 0.0, 1.0]), t in 0.2f64..1.4) {
        let model = SpacetimeModel::space_form(c, 2);
        let h = construct_hypersurface(&model, &HypersurfaceSpec::sphere(t, 3)).unwrap();
        let sd = shape_data(&h).unwrap();
        let f = if c < 0.0 { 1.0 / t.tan() } else if c > 0.0 { 1.0 / t.tanh() } else { 1.0 / t };
        for node in &sd.nodes {
            prop_assert!((node.h[1] - f).abs() < 1e-9);
            prop_assert!((node.h[2] - f * f).abs() < 1e-9);
        }
    }
}

#[test]
fn estimate_inequality_survives_grid_refinement() {
    let model = SpacetimeModel::minkowski(2);
    let g = CurvatureProfile::constant(0.0);
    let mut slacks = Vec::new();
    for nx in [9, 17] {
        let spec = HypersurfaceSpec::graph(
            "builtin:perturbed-hyperboloid",
            lorentz_comparison::hypersurface::ParamBox::cube(2, 0.6),
            nx,
        )
        .with_params(&[("shift", -0.25)]);
        let h = construct_hypersurface(&model, &spec).unwrap();
        let r = check_estimate(&h, &model, &h.vertex, &g, 1, Direction::InfLe, 1e-6).unwrap();
        assert!(r.pass);
        slacks.push(r.slack);
    }
    // Both grids contain the centre, where u peaks, so rhs agrees; lhs can
    // only decrease on the finer grid.
    assert!(slacks[1] >= slacks[0] - 1e-12, "{slacks:?}");
}

#[test]
fn config_round_trips_through_json() {
    let text = r#"{"experiment":"hypersurface-props","model":{"c":-1,"n":2},"G":{"kind":"constant","value":-1},
        "hypersurface":{"kind":"sphere","t":0.7,"nx":5},"side":"both","k":[0,1],
        "tolerances":{"margin":1e-6},"output":{"format":"json","path":"out"}}"#;
    let cfg = ExperimentConfig::from_json(text).unwrap();
    let again = ExperimentConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
    assert_eq!(serde_json::to_value(&cfg).unwrap(), serde_json::to_value(&again).unwrap());
    let out = run(&again).unwrap();
    assert!(out.pass(), "{}", out.summary());
    assert_eq!(out.artifacts.len(), 5);
}
