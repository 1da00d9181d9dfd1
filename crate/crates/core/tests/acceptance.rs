//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Expected values come from closed forms written out here (space-form
//! slopes, Minkowski distance, brute-force symmetric functions, graph mean
//! curvature by divergence), not from the library's own helpers.

use std::f64::consts::PI;
use std::time::Instant;

use lorentz_comparison::comparison_ode::{
    riccati_compare, riccati_solve, solve_h, sturm_verify, CurvatureProfile, RiccatiFamily, RiccatiOptions,
    SampledFunction, UniformGrid,
};
use lorentz_comparison::estimates::{bernstein_check, check_estimate, Direction};
use lorentz_comparison::experiment::{emit, run, ExperimentConfig, OutputFormat, OutputSpec};
use lorentz_comparison::hypersurface::{
    construct_hypersurface, gauss_residual, newton_matrices, shape_data, verify_prop_lk, GaussOptions,
    HypersurfaceSpec, NodeShape, PropSide, ShapeRoute,
};
use lorentz_comparison::radial_geometry::{
    bochner_residual, hess_r, lorentz_distance, verify_hessian_comparison, verify_laplacian_comparison, BoundSide,
    HessMethod, RadialSampling,
};
use lorentz_comparison::spacetime::SpacetimeModel;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// `h'/h` for constant curvature `c`.
fn slope_oracle(c: f64, t: f64) -> f64 {
    if c > 0.0 {
        c.sqrt() / (c.sqrt() * t).tanh()
    } else if c < 0.0 {
        (-c).sqrt() / ((-c).sqrt() * t).tan()
    } else {
        1.0 / t
    }
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Normalized mean curvatures `H_0..H_{n+1}` from principal curvatures by
/// summing over subsets: `C(n,k)H_k = (−1)^k S_k`.
fn h_oracle(kappa: &[f64]) -> Vec<f64> {
    let n = kappa.len();
    let mut s = vec![0.0; n + 2];
    for mask in 0u32..(1 << n) {
        let prod: f64 = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| kappa[i]).product();
        s[mask.count_ones() as usize] += prod;
    }
    (0..n + 2).map(|k| if k > n { 0.0 } else { (-1f64).powi(k as i32) * s[k] / binom(n, k) }).collect()
}

fn random_hyperboloid(n: usize, seed: u64, shift: f64, half: f64, nx: usize) -> HypersurfaceSpec {
    let mut spec = HypersurfaceSpec::graph("builtin:random-hyperboloid", cube(n, half), nx);
    if let HypersurfaceSpec::Graph { params, .. } = &mut spec {
        params.insert("seed".into(), seed as f64);
        params.insert("shift".into(), shift);
    }
    spec
}

fn cube(n: usize, half: f64) -> lorentz_comparison::hypersurface::ParamBox {
    lorentz_comparison::hypersurface::ParamBox::cube(n, half)
}

fn criterion_1() -> Outcome {
    let neg = solve_h(&CurvatureProfile::constant(-1.0), 4.0, 1e-3).map_err(err)?;
    let r0 = neg.r0.ok_or("no zero found for G ≡ −1")?;
    let sup = |sol: &lorentz_comparison::comparison_ode::ComparisonSolution, f: fn(f64) -> f64| {
        (0..sol.grid.n)
            .filter(|&i| sol.grid.t(i) <= 3.0 + 1e-12)
            .map(|i| (sol.h[i] - f(sol.grid.t(i))).abs())
            .fold(0.0, f64::max)
    };
    let e_sin = sup(&neg, f64::sin);
    let pos = solve_h(&CurvatureProfile::constant(1.0), 3.0, 1e-3).map_err(err)?;
    let e_sinh = sup(&pos, f64::sinh);
    let detail = format!("|r0−π| = {:.1e}, sup|h−sin| = {e_sin:.1e}, sup|h−sinh| = {e_sinh:.1e}", (r0 - PI).abs());
    ensure((r0 - PI).abs() <= 1e-6 && e_sin <= 1e-8 && e_sinh <= 1e-7, || detail.clone())?;
    Ok(detail)
}

fn criterion_2() -> Outcome {
    let grid = UniformGrid { t0: 0.0, dt: PI / 2000.0, n: 2001 };
    let sin = SampledFunction::from_fn(grid, f64::sin, f64::cos);
    let sinh = SampledFunction::from_fn(grid, f64::sinh, f64::cosh);
    let fwd = sturm_verify(&sin, &sinh, PI, 1e-6).map_err(err)?;
    let swapped = sturm_verify(&sinh, &sin, PI, 1e-6).map_err(err)?;
    ensure(fwd.holds && !swapped.holds, || format!("sturm forward {fwd:?}, swapped {swapped:?}"))?;

    let solve =
        |c: f64, fam| riccati_solve(&CurvatureProfile::constant(c), 1.0, fam, 4.0, 1e-3, RiccatiOptions::default());
    let mut worst = f64::INFINITY;
    for (c1, c2) in [(-1.0, -1.0), (0.0, 0.0), (1.0, 1.0), (-1.0, 0.0), (0.0, 1.0), (-1.0, 1.0)] {
        let g1 = solve(c1, RiccatiFamily::Lower).map_err(err)?;
        let g2 = solve(c2, RiccatiFamily::Upper).map_err(err)?;
        let (t1, t2) = (g1.blow_up_or_inf(), g2.blow_up_or_inf());
        let t_expected = |c: f64| if c < 0.0 { PI / (-c).sqrt() } else { f64::INFINITY };
        ensure(t1 <= t2, || format!("T1 = {t1} > T2 = {t2} for G = ({c1}, {c2})"))?;
        for (t, c) in [(t1, c1), (t2, c2)] {
            let te = t_expected(c);
            ensure(if te.is_finite() { (t - te).abs() < 1e-4 } else { t.is_infinite() }, || {
                format!("blow-up {t} for G = {c}, expected {te}")
            })?;
        }
        let v = riccati_compare(&g1, &g2, 1e-6).map_err(err)?;
        ensure(v.min_margin >= -1e-6, || format!("G = ({c1}, {c2}): {v:?}"))?;
        worst = worst.min(v.min_margin);
    }
    Ok(format!("sturm swapped margin {:.2}, riccati min_margin {worst:.1e}", swapped.min_margin))
}

fn criterion_3() -> Outcome {
    let model = SpacetimeModel::minkowski(3);
    let p = DVector::zeros(4);
    let mut rng = ChaCha8Rng::seed_from_u64(20240);
    let mut worst = [0.0f64; 6];
    for i in 0..100 {
        let r = rng.gen_range(0.2..2.0);
        let w = loop {
            let w = DVector::<f64>::from_fn(3, |_, _| rng.gen_range(-0.5..0.5));
            if w.norm() < 0.8 {
                break w;
            }
        };
        let gamma = 1.0 / (1.0 - w.norm_squared()).sqrt();
        let q = DVector::from_fn(4, |a, _| r * gamma * if a == 0 { 1.0 } else { w[a - 1] });
        let r_oracle = (q[0] * q[0] - q.rows(1, 3).norm_squared()).sqrt();
        let (_, r_lib) = lorentz_distance(&model, &p, &q).map_err(err)?;
        let data = hess_r(&model, &p, &q, HessMethod::FiniteDifference).map_err(err)?;
        let ev_err =
            data.transverse_eigenvalues().map_err(err)?.iter().map(|e| (e + 1.0 / r_oracle).abs()).fold(0.0, f64::max);
        let lap_err = (data.laplacian.ok_or("no laplacian")? + 3.0 / r_oracle).abs();
        let bochner = bochner_residual(&model, &p, &q, HessMethod::FiniteDifference).map_err(err)?.abs();
        let sample = [
            (r_lib - r_oracle).abs(),
            ev_err,
            lap_err,
            bochner,
            data.eikonal_defect(&model),
            data.radial_nullity().map_err(err)?,
        ];
        for (w, s) in worst.iter_mut().zip(sample) {
            *w = w.max(s);
        }
        ensure(sample[1] <= 1e-5 && sample[2] <= 1e-5 && sample[3] <= 1e-4, || {
            format!("sample {i} (r = {r_oracle}): {sample:?}")
        })?;
    }
    let detail = format!(
        "|Δr| {:.1e}, eig {:.1e}, Δ̄r {:.1e}, bochner {:.1e}, eikonal {:.1e}, nullity {:.1e}",
        worst[0], worst[1], worst[2], worst[3], worst[4], worst[5]
    );
    ensure(worst[0] <= 1e-10 && worst[4] <= 1e-8 && worst[5] <= 1e-5, || detail.clone())?;
    Ok(detail)
}

fn criterion_4() -> Outcome {
    let sampling = RadialSampling { count: 40, seed: 4, ..RadialSampling::default() };
    let mut worst: f64 = 0.0;
    for c in [-1.0, 0.0, 1.0] {
        let model = SpacetimeModel::space_form(c, 3);
        let p = DVector::zeros(4);
        let g = CurvatureProfile::constant(c);
        let hess = verify_hessian_comparison(&model, &p, &g, &sampling, BoundSide::UpperG, 1e-4).map_err(err)?;
        let lap = verify_laplacian_comparison(&model, &p, &g, &sampling, 1e-4).map_err(err)?;
        for rep in [&hess, &lap] {
            let margins = rep.table.column("margin").unwrap();
            let m = margins.iter().map(|v| v.abs()).fold(0.0, f64::max);
            worst = worst.max(m);
            ensure(m <= 1e-4, || format!("{} c = {c}: max |margin| {m:e}", rep.experiment))?;
        }
        // The library's bound against the closed-form slope.
        let (r, b) = (hess.table.column("r").unwrap(), hess.table.column("bound").unwrap());
        let dev = r.iter().zip(&b).map(|(r, b)| (b + slope_oracle(c, *r)).abs()).fold(0.0, f64::max);
        ensure(dev <= 1e-6, || format!("c = {c}: bound deviates from −f_c(r) by {dev:e}"))?;
    }
    let model = SpacetimeModel::minkowski(3);
    let p = DVector::zeros(4);
    let g = CurvatureProfile::constant(1.0);
    let hess = verify_hessian_comparison(&model, &p, &g, &sampling, BoundSide::UpperG, 1e-4).map_err(err)?;
    let lap = verify_laplacian_comparison(&model, &p, &g, &sampling, 1e-4).map_err(err)?;
    let strict_h = hess.table.column("slack").unwrap().into_iter().fold(f64::INFINITY, f64::min);
    let strict_l = lap.table.column("margin").unwrap().into_iter().fold(f64::INFINITY, f64::min);
    let detail = format!("sharp |margin| ≤ {worst:.1e}; c=0<G=1 min margins {strict_h:.3e}, {strict_l:.3e}");
    ensure(strict_h > 0.0 && strict_l > 0.0, || detail.clone())?;
    Ok(detail)
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for trial in 0..1000 {
        let n = rng.gen_range(1..=8);
        let m = DMatrix::<f64>::from_fn(n, n, |_, _| rng.gen_range(-2.0..2.0));
        let a = (&m + m.transpose()) * 0.5;
        let kappa: Vec<f64> = a.clone().symmetric_eigenvalues().iter().copied().collect();
        let h = h_oracle(&kappa);
        let p = newton_matrices(&a, &NodeShape::of(&a));
        let a2 = &a * &a;
        for (k, pk) in p.iter().enumerate() {
            let ck = (n - k) as f64 * binom(n, k);
            let h2 = if k + 2 <= n { h[k + 2] } else { 0.0 };
            let pairs = [
                (pk.trace(), ck * h[k]),
                ((&a * pk).trace(), -ck * h[k + 1]),
                ((&a2 * pk).trace(), binom(n, k + 1) * (n as f64 * h[1] * h[k + 1] - (n - k - 1) as f64 * h2)),
            ];
            for (j, (lhs, rhs)) in pairs.into_iter().enumerate() {
                let rel = (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1.0);
                worst = worst.max(rel);
                ensure(rel <= 1e-9, || format!("trial {trial}, n = {n}, k = {k}, identity {}: {lhs} vs {rhs}", j + 1))?;
            }
        }
    }
    Ok(format!("max relative residual {worst:.1e} over 1000 matrices"))
}

fn criterion_6() -> Outcome {
    let mut worst = [0.0f64; 2];
    for c in [-1.0, 0.0, 1.0] {
        let model = SpacetimeModel::space_form(c, 3);
        for t in [0.5, 1.0, 2.0] {
            let f = slope_oracle(c, t);
            for (route, nx, tol, slot) in [(ShapeRoute::Analytic, 5, 1e-8, 0), (ShapeRoute::Fd, 33, 1e-4, 1)] {
                let spec = HypersurfaceSpec::sphere(t, nx).with_route(route);
                let h = construct_hypersurface(&model, &spec).map_err(err)?;
                let sd = shape_data(&h).map_err(err)?;
                for k in 1..=3 {
                    let e = sd.nodes.iter().map(|s| (s.h[k] - f.powi(k as i32)).abs()).fold(0.0, f64::max);
                    worst[slot] = worst[slot].max(e);
                    ensure(e <= tol, || format!("c = {c}, t = {t}, k = {k}, {route:?}: error {e:e}"))?;
                }
            }
        }
    }
    Ok(format!("closed form {:.1e}, FD pipeline {:.1e}", worst[0], worst[1]))
}

fn criterion_7() -> Outcome {
    let mut eq: f64 = 0.0;
    for c in [-1.0, 0.0, 1.0] {
        let model = SpacetimeModel::space_form(c, 3);
        let g = CurvatureProfile::constant(c);
        for t in [0.5, 1.0] {
            let h = construct_hypersurface(&model, &HypersurfaceSpec::sphere(t, 7)).map_err(err)?;
            for k in 0..3 {
                for side in [PropSide::Lower, PropSide::Upper] {
                    let rep = verify_prop_lk(&h, &model, &h.vertex, &g, k, side, 1e-6).map_err(err)?;
                    let (l, r) = (rep.table.column("lk_u").unwrap(), rep.table.column("rhs").unwrap());
                    let d = l.iter().zip(&r).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    eq = eq.max(d);
                    ensure(d <= 1e-6, || format!("sphere c = {c}, t = {t}, k = {k}: |L_k u − rhs| = {d:e}"))?;
                }
            }
        }
    }
    let model = SpacetimeModel::minkowski(3);
    let (mut low, mut up) = (f64::INFINITY, f64::INFINITY);
    for seed in 0..10u64 {
        let n = 2 + (seed % 2) as usize;
        let model = if n == 3 { model.clone() } else { SpacetimeModel::minkowski(2) };
        let h = construct_hypersurface(&model, &random_hyperboloid(n, seed, 0.0, 0.5, 9)).map_err(err)?;
        for k in 0..n {
            let lower =
                verify_prop_lk(&h, &model, &h.vertex, &CurvatureProfile::constant(1.0), k, PropSide::Lower, 1e-5)
                    .map_err(err)?;
            let upper =
                verify_prop_lk(&h, &model, &h.vertex, &CurvatureProfile::constant(-0.5), k, PropSide::Upper, 1e-5)
                    .map_err(err)?;
            // Upper-side slacks are negated margins: margin ≤ 1e−5 ⇔ slack ≥ −1e−5.
            low = low.min(lower.min_margin);
            up = up.min(upper.min_margin);
            ensure(lower.pass && upper.pass, || {
                format!("graph seed {seed}, k = {k}: lower {:e}, upper {:e}", lower.min_margin, upper.min_margin)
            })?;
        }
    }
    Ok(format!("sphere equality {eq:.1e}; graphs G=1 min margin {low:.2e}, G=−0.5 max margin {:.2e}", -up))
}

/// Perturbed hyperboloid `s + √(1 + |x|²) + a sin(κx₀)` written out, with
/// its gradient.
fn graph_grad(x: &DVector<f64>, a: f64, kappa: f64) -> DVector<f64> {
    let w = (1.0 + x.norm_squared()).sqrt();
    let mut g = x / w;
    g[0] += a * kappa * (kappa * x[0]).cos();
    g
}

fn graph_u(x: &DVector<f64>, s: f64, a: f64, kappa: f64) -> f64 {
    let phi = s + (1.0 + x.norm_squared()).sqrt() + a * (kappa * x[0]).sin();
    (phi * phi - x.norm_squared()).sqrt()
}

/// `H_1 = div(∇φ/√(1 − |∇φ|²))/n` by central differences.
fn graph_h1(x: &DVector<f64>, a: f64, kappa: f64) -> f64 {
    let n = x.len();
    let e = 1e-4;
    let field = |y: &DVector<f64>| {
        let g = graph_grad(y, a, kappa);
        &g / (1.0 - g.norm_squared()).sqrt()
    };
    (0..n)
        .map(|i| {
            let (mut yp, mut ym) = (x.clone(), x.clone());
            yp[i] += e;
            ym[i] -= e;
            (field(&yp)[i] - field(&ym)[i]) / (2.0 * e)
        })
        .sum::<f64>()
        / n as f64
}

fn criterion_8() -> Outcome {
    let model = SpacetimeModel::minkowski(2);
    let g = CurvatureProfile::constant(0.0);
    let (s, a, kappa, half, nx) = (-0.25, 0.05, 1.0, 0.6, 13);
    let spec = HypersurfaceSpec::graph("builtin:perturbed-hyperboloid", cube(2, half), nx).with_params(&[
        ("shift", s),
        ("amplitude", a),
        ("wavenumber", kappa),
    ]);
    let h = construct_hypersurface(&model, &spec).map_err(err)?;
    let mut min_slack = f64::INFINITY;

    // Oracle on the same interior nodes.
    let dx = 2.0 * half / (nx - 1) as f64;
    let (mut h1_min, mut u_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..nx {
        for j in 0..nx {
            let x = DVector::from_vec(vec![-half + i as f64 * dx, -half + j as f64 * dx]);
            u_max = u_max.max(graph_u(&x, s, a, kappa));
            if (1..nx - 1).contains(&i) && (1..nx - 1).contains(&j) {
                h1_min = h1_min.min(graph_h1(&x, a, kappa));
            }
        }
    }
    for k in [1, 2] {
        let rep = check_estimate(&h, &model, &h.vertex, &g, k, Direction::InfLe, 1e-6).map_err(err)?;
        ensure(rep.hypotheses_met.iter().any(|m| m.contains("H_2 > 0")) || k == 1, || {
            format!("k = 2 hypotheses: {:?}", rep.hypotheses_met)
        })?;
        ensure((rep.rhs - 1.0 / u_max).abs() <= 1e-9, || format!("rhs {} vs 1/sup u = {}", rep.rhs, 1.0 / u_max))?;
        if k == 1 {
            ensure((rep.lhs - h1_min).abs() <= 1e-6, || format!("inf H_1 {} vs divergence oracle {h1_min}", rep.lhs))?;
        }
        ensure(rep.slack >= -1e-6, || format!("graph k = {k}: slack {:e}", rep.slack))?;
        min_slack = min_slack.min(rep.slack);
    }
    for seed in 0..4u64 {
        let h = construct_hypersurface(&model, &random_hyperboloid(2, seed, -0.25, 0.6, 13)).map_err(err)?;
        for k in [1, 2] {
            let rep = check_estimate(&h, &model, &h.vertex, &g, k, Direction::InfLe, 1e-6).map_err(err)?;
            ensure(rep.slack >= -1e-6, || format!("random graph {seed}, k = {k}: slack {:e}", rep.slack))?;
            min_slack = min_slack.min(rep.slack);
        }
    }

    let mut sharp: f64 = 0.0;
    for (c, ts) in [
        (-1.0, &[0.3, 0.6, 0.9, 1.2, 1.5][..]),
        (0.0, &[0.5, 1.0, 1.5, 2.0, 2.5][..]),
        (1.0, &[0.5, 1.0, 1.5, 2.0, 2.5][..]),
    ] {
        let model = SpacetimeModel::space_form(c, 3);
        let g = CurvatureProfile::constant(c);
        for &t in ts {
            let h = construct_hypersurface(&model, &HypersurfaceSpec::sphere(t, 5)).map_err(err)?;
            for k in 1..=3 {
                for dir in [Direction::InfLe, Direction::SupGe] {
                    let rep = check_estimate(&h, &model, &h.vertex, &g, k, dir, 1e-5).map_err(err)?;
                    let expected = slope_oracle(c, t).abs();
                    ensure((rep.rhs - expected).abs() <= 1e-6, || format!("sphere rhs {} vs {expected}", rep.rhs))?;
                    sharp = sharp.max(rep.slack.abs());
                    ensure(rep.slack.abs() <= 1e-5, || {
                        format!("sphere c = {c}, t = {t}, k = {k}: slack {:e}", rep.slack)
                    })?;
                }
            }
        }
    }
    Ok(format!("graphs min slack {min_slack:.3e}; sphere sweep max |slack| {sharp:.1e}"))
}

fn criterion_9() -> Outcome {
    let (mut width, mut radius) = (0.0f64, 0.0f64);
    for (c, ts) in [(-1.0, &[0.5, 1.0][..]), (0.0, &[0.5, 1.0, 2.0][..]), (1.0, &[0.5, 1.0, 2.0][..])] {
        let model = SpacetimeModel::space_form(c, 3);
        for &t in ts {
            let h = construct_hypersurface(&model, &HypersurfaceSpec::sphere(t, 5)).map_err(err)?;
            for k in 1..=3 {
                let v = bernstein_check(&h, &model, &h.vertex, k, 1e-7).map_err(err)?;
                width = width.max(v.band_width);
                radius = radius.max((v.rho - t).abs());
                ensure(v.level_set && v.band_width <= 1e-5 && (v.rho - t).abs() <= 1e-6, || {
                    format!("c = {c}, t = {t}, k = {k}: {v:?}")
                })?;
            }
        }
    }
    Ok(format!("max band width {width:.1e}, max |ρ − t| {radius:.1e}"))
}

fn criterion_10() -> Outcome {
    let opts = GaussOptions::default();
    let (mut res, mut margin, mut suites) = (0.0f64, f64::INFINITY, 0);
    let mut check = |model: &SpacetimeModel, spec: HypersurfaceSpec, k_expected: Option<f64>| -> Result<(), String> {
        let h = construct_hypersurface(model, &spec).map_err(err)?;
        let rep = gauss_residual(&h, model, &opts).map_err(err)?;
        let r = rep.extra["max_residual"].as_f64().unwrap();
        res = res.max(r);
        margin = margin.min(rep.min_margin);
        suites += 1;
        ensure(r <= 1e-4 && rep.min_margin >= -1e-6, || {
            format!("{spec:?}: residual {r:e}, margin {:e}", rep.min_margin)
        })?;
        if let Some(k) = k_expected {
            let d = rep.table.column("k_intrinsic").unwrap().iter().map(|v| (v - k).abs()).fold(0.0, f64::max);
            ensure(d <= 1e-4, || format!("{spec:?}: intrinsic curvature off {k} by {d:e}"))?;
        }
        Ok(())
    };
    for c in [-1.0, 0.0, 1.0] {
        let model = SpacetimeModel::space_form(c, 3);
        for t in [0.5, 1.0] {
            let f = slope_oracle(c, t);
            check(&model, HypersurfaceSpec::sphere(t, 5), Some(c - f * f))?;
        }
    }
    let m2 = SpacetimeModel::minkowski(2);
    check(&m2, HypersurfaceSpec::graph("builtin:constant", cube(2, 0.5), 5), Some(0.0))?;
    check(&m2, HypersurfaceSpec::graph("builtin:perturbed-hyperboloid", cube(2, 0.5), 7), None)?;
    for seed in 0..10u64 {
        check(&m2, random_hyperboloid(2, seed, 0.0, 0.5, 7), None)?;
    }
    Ok(format!("{suites} suites: max residual {res:.1e}, min bound margin {margin:.3e}"))
}

fn criterion_11() -> Outcome {
    let configs = [
        r#"{"experiment":"radial-hessian","model":{"c":1,"n":2},"sampling":{"count":10,"seed":3}}"#,
        r#"{"experiment":"bochner","model":{"c":-1,"n":2},"sampling":{"count":6,"seed":3}}"#,
        r#"{"experiment":"newton-identities","n":5,"sampling":{"count":200,"seed":3}}"#,
        r#"{"experiment":"hypersurface-props","model":{"c":0,"n":2},"G":{"kind":"constant","value":1},
            "hypersurface":{"kind":"graph","phi":"builtin:random-hyperboloid","params":{"seed":3},
            "box":{"lo":[-0.5,-0.5],"hi":[0.5,0.5]},"nx":7}}"#,
        r#"{"experiment":"sphere-sharpness","model":{"c":1,"n":3},"t":[0.5,1.0]}"#,
    ];
    let dir = tempfile::tempdir().map_err(err)?;
    let mut files = 0;
    for (i, text) in configs.iter().enumerate() {
        let cfg = ExperimentConfig::from_json(text).map_err(err)?;
        let mut runs = Vec::new();
        for (j, threads) in [0usize, 1, 3].into_iter().enumerate() {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(err)?;
            let out = pool.install(|| run(&cfg)).map_err(err)?;
            let spec = OutputSpec { format: OutputFormat::Both, path: dir.path().join(format!("{i}-{j}")) };
            let mut written = emit(&out, &spec).map_err(err)?;
            written.sort();
            runs.push(written.iter().map(std::fs::read).collect::<Result<Vec<_>, _>>().map_err(err)?);
        }
        files += runs[0].len();
        ensure(runs.windows(2).all(|w| w[0] == w[1]), || format!("config {i} differs between runs"))?;
    }
    Ok(format!("{} configs, {files} files identical across 3 runs and thread counts", configs.len()))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("ODE core", criterion_1),
        ("Sturm/Riccati", criterion_2),
        ("Minkowski radial oracle", criterion_3),
        ("comparison sharpness", criterion_4),
        ("Newton algebra", criterion_5),
        ("sphere curvature table", criterion_6),
        ("L_k propositions", criterion_7),
        ("estimate theorems", criterion_8),
        ("Bernstein squeeze", criterion_9),
        ("Gauss equation", criterion_10),
        ("reproducibility", criterion_11),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} ({secs:.1}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
