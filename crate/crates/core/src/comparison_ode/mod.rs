//! Comparison ODEs: the Cauchy problem `h'' = G h`, `h(0) = 0`, `h'(0) = 1`,
//! its logarithmic derivative, the Riccati families built from it, and
//! nodewise certification of the Sturm and Riccati comparison statements.

mod profile;
mod riccati;
mod sturm;

pub use profile::{CurvatureProfile, EvenTable, ProfileDescriptor};
pub use riccati::{riccati_compare, riccati_solve, RiccatiFamily, RiccatiOptions, RiccatiSolution};
pub use sturm::{sturm_verify, ComparisonVerdict, SampledFunction};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default absolute tolerance on comparison margins.
pub const DEFAULT_TOL: f64 = 1e-6;

/// Below this time `slope` switches to the two-term vertex series.
pub const T_SERIES: f64 = 1e-3;

/// Uniform sample grid `t_i = t0 + i·dt`, `i < n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub t0: f64,
    pub dt: f64,
    pub n: usize,
}

impl UniformGrid {
    pub fn t(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.t(self.n.saturating_sub(1))
    }

    pub fn is_aligned_with(&self, other: &UniformGrid) -> bool {
        let scale = self.dt.abs().max(other.dt.abs());
        (self.t0 - other.t0).abs() <= 1e-12 * scale.max(1.0) && (self.dt - other.dt).abs() <= 1e-12 * scale
    }
}

/// Sampled solution of `h'' = G h`, `h(0) = 0`, `h'(0) = 1`.
#[derive(Clone, Debug)]
pub struct ComparisonSolution {
    pub profile: CurvatureProfile,
    pub grid: UniformGrid,
    pub h: Vec<f64>,
    pub h_prime: Vec<f64>,
    /// First positive zero of `h`; `None` when `h` stays positive on the
    /// whole grid.
    pub r0: Option<f64>,
}

impl ComparisonSolution {
    /// Right end of the positivity interval `I = [0, r0)`, `+∞` when no zero
    /// was found on the grid.
    pub fn r0_or_inf(&self) -> f64 {
        self.r0.unwrap_or(f64::INFINITY)
    }

    /// Whether node `i` lies in the positivity interval.
    pub fn in_interval(&self, i: usize) -> bool {
        self.grid.t(i) < self.r0_or_inf()
    }

    /// `(h, h')` at an arbitrary `t` in `[0, t_max]`, from a partial
    /// integration step off the nearest node to the left.
    pub fn dense(&self, t: f64) -> Result<(f64, f64)> {
        if !(0.0..=self.grid.t_end() + 1e-12).contains(&t) {
            return Err(Error::Domain(format!("t = {t} outside the sampled range [0, {}]", self.grid.t_end())));
        }
        let i = ((t / self.grid.dt).floor() as usize).min(self.grid.n - 1);
        let s = t - self.grid.t(i);
        if s == 0.0 {
            return Ok((self.h[i], self.h_prime[i]));
        }
        rk4_step(&self.profile, self.grid.t(i), [self.h[i], self.h_prime[i]], s).map(|y| (y[0], y[1]))
    }

    pub fn sampled(&self) -> SampledFunction {
        SampledFunction { grid: self.grid, values: self.h.clone(), derivs: self.h_prime.clone() }
    }

    /// Wire form `{kind, params, grid, values}`; `values` holds `[h, h']`
    /// pairs.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "kind": "comparison-solution",
            "params": { "profile": self.profile, "r0": self.r0 },
            "grid": self.grid,
            "values": self.h.iter().zip(&self.h_prime).map(|(a, b)| [*a, *b]).collect::<Vec<_>>(),
        })
    }
}

fn rk4_step(g: &CurvatureProfile, t: f64, y: [f64; 2], dt: f64) -> Result<[f64; 2]> {
    let f = |t: f64, y: [f64; 2]| -> Result<[f64; 2]> { Ok([y[1], g.try_value(t)? * y[0]]) };
    let k1 = f(t, y)?;
    let k2 = f(t + 0.5 * dt, [y[0] + 0.5 * dt * k1[0], y[1] + 0.5 * dt * k1[1]])?;
    let k3 = f(t + 0.5 * dt, [y[0] + 0.5 * dt * k2[0], y[1] + 0.5 * dt * k2[1]])?;
    let k4 = f(t + dt, [y[0] + dt * k3[0], y[1] + dt * k3[1]])?;
    Ok([
        y[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ])
}

/// Integrates `h'' = G h`, `h(0) = 0`, `h'(0) = 1` on `[0, t_max]` with the
/// classical fourth-order Runge–Kutta scheme and locates the first positive
/// zero of `h`.
///
/// The step is adjusted to `t_max / round(t_max / step)` so that the grid
/// ends exactly at `t_max`. Nodes past `r0` are kept; use
/// [`ComparisonSolution::in_interval`] to tell them apart.
pub fn solve_h(g: &CurvatureProfile, t_max: f64, step: f64) -> Result<ComparisonSolution> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::Domain(format!("t_max must be positive, got {t_max}")));
    }
    if !(step > 0.0 && step <= t_max / 10.0) {
        return Err(Error::Domain(format!("step must lie in (0, t_max/10] = (0, {}], got {step}", t_max / 10.0)));
    }
    let cells = (t_max / step).round() as usize;
    let dt = t_max / cells as f64;
    let grid = UniformGrid { t0: 0.0, dt, n: cells + 1 };

    let mut h = Vec::with_capacity(grid.n);
    let mut hp = Vec::with_capacity(grid.n);
    h.push(0.0);
    hp.push(1.0);
    let mut r0 = None;

    for i in 0..cells {
        let t = grid.t(i);
        let gi = g.try_value(t)?;
        // Half an oscillation per step cannot be bracketed by sign changes.
        if gi < 0.0 && dt * (-gi).sqrt() >= std::f64::consts::FRAC_PI_2 {
            return Err(Error::Resolution { step: dt, t });
        }
        let y = rk4_step(g, t, [h[i], hp[i]], dt)?;
        if !(y[0].is_finite() && y[1].is_finite()) {
            return Err(Error::ProfileDomain { t: t + dt, reason: "solution overflowed".into() });
        }
        if r0.is_none() && i > 0 {
            if h[i] > 0.0 && y[0] <= 0.0 {
                r0 = Some(bisect_zero(g, t, [h[i], hp[i]], dt)?);
            } else if h[i] > 0.0 && y[0] > 0.0 && hp[i] < 0.0 && y[1] > 0.0 {
                // h' turned around inside the step: make sure h did not dip
                // through zero and come back.
                let (s_min, h_min) = hermite_min(h[i], y[0], hp[i], y[1], dt);
                if h_min <= 0.0 {
                    return Err(Error::Resolution { step: dt, t: t + s_min });
                }
            }
        }
        h.push(y[0]);
        hp.push(y[1]);
    }

    Ok(ComparisonSolution { profile: g.clone(), grid, h, h_prime: hp, r0 })
}

/// Bisection on partial RK4 steps from `(t, y)` for the zero of `h` in
/// `(t, t + dt]`, to within `dt·1e-6`.
fn bisect_zero(g: &CurvatureProfile, t: f64, y: [f64; 2], dt: f64) -> Result<f64> {
    let (mut lo, mut hi) = (0.0, dt);
    while hi - lo > dt * 1e-6 {
        let mid = 0.5 * (lo + hi);
        if rk4_step(g, t, y, mid)?[0] > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(t + 0.5 * (lo + hi))
}

/// Minimum of the cubic Hermite interpolant on one step.
fn hermite_min(y0: f64, y1: f64, d0: f64, d1: f64, dt: f64) -> (f64, f64) {
    (0..=64)
        .map(|j| {
            let s = j as f64 / 64.0;
            let s2 = s * s;
            let s3 = s2 * s;
            let v = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
                + (s3 - 2.0 * s2 + s) * dt * d0
                + (-2.0 * s3 + 3.0 * s2) * y1
                + (s3 - s2) * dt * d1;
            (s * dt, v)
        })
        .fold((0.0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
}

/// `h'/h` at `t ∈ (0, r0)`. Below [`T_SERIES`] the vertex series
/// `1/t + G(0)·t/3` is used.
pub fn slope(sol: &ComparisonSolution, t: f64) -> Result<f64> {
    if !(t > 0.0) || t >= sol.r0_or_inf() {
        return Err(Error::Domain(format!("slope needs 0 < t < r0 = {}, got t = {t}", sol.r0_or_inf())));
    }
    if t < T_SERIES {
        return Ok(1.0 / t + sol.profile.try_value(0.0)? * t / 3.0);
    }
    let (h, hp) = sol.dense(t)?;
    Ok(hp / h)
}

/// Closed-form `h'/h` for constant curvature `c`.
pub fn f_c(c: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("f_c needs t > 0, got {t}")));
    }
    if c > 0.0 {
        let s = c.sqrt();
        Ok(s / (s * t).tanh())
    } else if c == 0.0 {
        Ok(1.0 / t)
    } else {
        let s = (-c).sqrt();
        let bound = std::f64::consts::PI / s;
        if t >= bound {
            return Err(Error::Domain(format!("f_c with c = {c} needs t < π/√(−c) = {bound}, got {t}")));
        }
        Ok(s / (s * t).tan())
    }
}

/// First positive zero of `h` for constant `c`: `π/√(−c)` when `c < 0`.
pub fn r0_constant(c: f64) -> f64 {
    if c < 0.0 {
        std::f64::consts::PI / (-c).sqrt()
    } else {
        f64::INFINITY
    }
}

/// Inverse of the decreasing function `t ↦ f_c(t)` by bisection
/// (80 iterations) on `(0, r0)`.
pub fn f_c_inverse(c: f64, value: f64) -> Result<f64> {
    let upper = if c < 0.0 {
        r0_constant(c)
    } else {
        // f_c(t) → √c (c > 0) or 0 (c = 0) as t → ∞.
        let floor = if c > 0.0 { c.sqrt() } else { 0.0 };
        if value <= floor {
            return Err(Error::Domain(format!("f_c with c = {c} only takes values above {floor}, got {value}")));
        }
        let mut hi = 1.0;
        while f_c(c, hi)? > value {
            hi *= 2.0;
        }
        hi
    };
    let (mut lo, mut hi) = (0.0, upper);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if f_c(c, mid)? > value {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sup_err(sol: &ComparisonSolution, t_hi: f64, exact: impl Fn(f64) -> f64) -> f64 {
        (0..sol.grid.n)
            .filter(|&i| sol.grid.t(i) <= t_hi)
            .map(|i| (sol.h[i] - exact(sol.grid.t(i))).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn flat_profile_gives_linear_solution() {
        let sol = solve_h(&CurvatureProfile::constant(0.0), 4.0, 1e-2).unwrap();
        assert!(sup_err(&sol, 4.0, |t| t) < 1e-13);
        assert!(sol.r0.is_none());
        assert!((slope(&sol, 2.0).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn negative_curvature_profile_gives_sine_and_first_zero_pi() {
        let sol = solve_h(&CurvatureProfile::constant(-1.0), 4.0, 1e-3).unwrap();
        assert!((sol.r0.unwrap() - PI).abs() < 1e-9);
        assert!(sup_err(&sol, 3.0, f64::sin) < 1e-11);
        assert!(slope(&sol, PI / 2.0).unwrap().abs() < 1e-10);
        assert!(sol.in_interval(3000));
        assert!(!sol.in_interval(3200));
    }

    #[test]
    fn positive_curvature_profile_gives_sinh() {
        let sol = solve_h(&CurvatureProfile::constant(1.0), 4.0, 1e-3).unwrap();
        assert!(sol.r0.is_none());
        assert!(sup_err(&sol, 3.0, f64::sinh) < 1e-9);
        // coth(1) from its exponential form.
        let e2 = (2.0f64).exp();
        let coth1 = (e2 + 1.0) / (e2 - 1.0);
        assert!((slope(&sol, 1.0).unwrap() - coth1).abs() < 1e-10);
        assert!((coth1 - 1.3130).abs() < 1e-4);
    }

    #[test]
    fn slope_rejects_points_outside_interval() {
        let sol = solve_h(&CurvatureProfile::constant(-1.0), 4.0, 1e-3).unwrap();
        assert!(matches!(slope(&sol, 0.0), Err(Error::Domain(_))));
        assert!(matches!(slope(&sol, 3.5), Err(Error::Domain(_))));
        // Series branch agrees with cot near the vertex.
        let t = 5e-4;
        assert!((slope(&sol, t).unwrap() - 1.0 / t.tan()).abs() < 1e-9);
    }

    #[test]
    fn solve_h_validates_arguments() {
        let g = CurvatureProfile::constant(0.0);
        assert!(solve_h(&g, -1.0, 0.1).is_err());
        assert!(solve_h(&g, 1.0, 0.5).is_err());
    }

    #[test]
    fn coarse_step_on_fast_oscillation_is_a_resolution_error() {
        let g = CurvatureProfile::constant(-400.0);
        assert!(matches!(solve_h(&g, 10.0, 0.1), Err(Error::Resolution { .. })));
    }

    #[test]
    fn table_outside_domain_is_profile_error() {
        let table = EvenTable::new(vec![0.0, 1.0], vec![0.0, 0.0]).unwrap();
        let g = CurvatureProfile::TabulatedEven(table);
        assert!(matches!(solve_h(&g, 2.0, 0.1), Err(Error::ProfileDomain { .. })));
    }

    #[test]
    fn f_c_closed_forms() {
        assert_eq!(f_c(0.0, 2.0).unwrap(), 0.5);
        assert!(f_c(-1.0, PI / 2.0).unwrap().abs() < 1e-15);
        assert!((f_c(1.0, 1.0).unwrap() - 1.313_035_285_499_331).abs() < 1e-12);
        let err = f_c(-1.0, 3.2).unwrap_err().to_string();
        assert!(err.contains("π/√(−c)"), "{err}");
        assert!(f_c(0.0, 0.0).is_err());
    }

    #[test]
    fn f_c_inverse_round_trips() {
        for &c in &[-1.0, 0.0, 1.0, 0.25] {
            for &t in &[0.3, 1.0, 2.0] {
                let v = f_c(c, t).unwrap();
                assert!((f_c_inverse(c, v).unwrap() - t).abs() < 1e-12, "c={c} t={t}");
            }
        }
        assert!(f_c_inverse(1.0, 0.5).is_err());
    }

    #[test]
    fn slope_is_decreasing_for_constant_profiles() {
        for &c in &[-1.0, 0.0, 1.0] {
            let sol = solve_h(&CurvatureProfile::constant(c), 3.0, 1e-3).unwrap();
            let vals: Vec<f64> =
                (1..sol.grid.n - 1).filter(|&i| sol.in_interval(i)).map(|i| sol.h_prime[i] / sol.h[i]).collect();
            assert!(vals.windows(2).all(|w| w[1] < w[0]), "c = {c}");
        }
    }

    #[test]
    fn refinement_witnesses_fourth_order() {
        let g = CurvatureProfile::EvenPolynomial(vec![-1.0, -0.3]);
        let r0s: Vec<f64> = [0.2, 0.1, 0.05, 0.025].iter().map(|&s| solve_h(&g, 4.0, s).unwrap().r0.unwrap()).collect();
        let d: Vec<f64> = r0s.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        for w in d.windows(2) {
            let ratio = w[0] / w[1];
            assert!((10.0..=24.0).contains(&ratio), "ratio {ratio}, diffs {d:?}");
        }
    }

    #[test]
    fn json_wire_form_has_documented_keys() {
        let sol = solve_h(&CurvatureProfile::constant(-1.0), 1.0, 0.1).unwrap();
        let v = sol.to_json();
        for key in ["kind", "params", "grid", "values"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["grid"]["n"], 11);
    }
}
