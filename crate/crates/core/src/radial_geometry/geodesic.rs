use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spacetime::SpacetimeModel;

/// Sampled timelike geodesic `γ_v` with `γ_v(0) = p`, `γ_v'(0) = v`.
#[derive(Clone, Debug, Serialize)]
pub struct TimelikeGeodesic {
    pub p: DVector<f64>,
    pub v: DVector<f64>,
    pub step: f64,
    pub positions: Vec<DVector<f64>>,
    pub velocities: Vec<DVector<f64>>,
    /// Set when the path was cut short at the edge of the chart.
    pub hit_boundary: bool,
}

impl TimelikeGeodesic {
    pub fn t(&self, i: usize) -> f64 {
        i as f64 * self.step
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// `max |⟨γ', γ'⟩ + 1|` over the nodes.
    pub fn speed_defect(&self, model: &SpacetimeModel) -> f64 {
        self.positions.iter().zip(&self.velocities).map(|(x, v)| (model.inner(x, v, v) + 1.0).abs()).fold(0.0, f64::max)
    }

    /// Nodewise defect of the second-order system, with derivatives taken by
    /// central differences of the samples.
    pub fn geodesic_residual(&self, model: &SpacetimeModel) -> Result<f64> {
        let dt = self.step;
        let mut worst: f64 = 0.0;
        for i in 1..self.len().saturating_sub(1) {
            let gamma = model.connection_coefficients(&self.positions[i])?;
            let v = &self.velocities[i];
            let acc = (&self.velocities[i + 1] - &self.velocities[i - 1]) / (2.0 * dt) + gamma.contract(v, v);
            let vel = (&self.positions[i + 1] - &self.positions[i - 1]) / (2.0 * dt) - v;
            worst = worst.max(acc.amax()).max(vel.amax());
        }
        Ok(worst)
    }
}

fn geodesic_rhs(model: &SpacetimeModel, x: &DVector<f64>, v: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
    let gamma = model.connection_coefficients(x)?;
    Ok((v.clone(), -gamma.contract(v, v)))
}

/// One classical RK4 step of `x' = v`, `v' = −Γ(v, v)`.
pub(crate) fn geodesic_step(
    model: &SpacetimeModel,
    x: &DVector<f64>,
    v: &DVector<f64>,
    dt: f64,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let (k1x, k1v) = geodesic_rhs(model, x, v)?;
    let (k2x, k2v) = geodesic_rhs(model, &(x + &k1x * (0.5 * dt)), &(v + &k1v * (0.5 * dt)))?;
    let (k3x, k3v) = geodesic_rhs(model, &(x + &k2x * (0.5 * dt)), &(v + &k2v * (0.5 * dt)))?;
    let (k4x, k4v) = geodesic_rhs(model, &(x + &k3x * dt), &(v + &k3v * dt))?;
    Ok((x + (k1x + k2x * 2.0 + k3x * 2.0 + k4x) * (dt / 6.0), v + (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (dt / 6.0)))
}

/// Fixed-step flow over `[0, t_end]` in `cells` steps. Stops early (and
/// reports it) when a stage leaves the chart.
fn flow(
    model: &SpacetimeModel,
    x0: &DVector<f64>,
    v0: &DVector<f64>,
    t_end: f64,
    cells: usize,
) -> (Vec<DVector<f64>>, Vec<DVector<f64>>, bool) {
    let dt = t_end / cells as f64;
    let mut xs = vec![x0.clone()];
    let mut vs = vec![v0.clone()];
    for _ in 0..cells {
        let (x, v) = (xs.last().unwrap(), vs.last().unwrap());
        match geodesic_step(model, x, v, dt) {
            Ok((nx, nv)) if model.contains(&nx) => {
                xs.push(nx);
                vs.push(nv);
            }
            _ => return (xs, vs, true),
        }
    }
    (xs, vs, false)
}

/// Integrates the geodesic equation from `p` with future unit timelike
/// initial velocity `v` over `[0, t_max]`.
pub fn integrate_geodesic(
    model: &SpacetimeModel,
    p: &DVector<f64>,
    v: &DVector<f64>,
    t_max: f64,
    step: f64,
) -> Result<TimelikeGeodesic> {
    let norm = model.inner(p, v, v);
    if (norm + 1.0).abs() > 1e-8 || v[0] <= 0.0 {
        return Err(Error::Contract(format!(
            "initial velocity must be future unit timelike, ⟨v,v⟩ = {norm}, v⁰ = {}",
            v[0]
        )));
    }
    if !(t_max > 0.0 && step > 0.0) {
        return Err(Error::Domain(format!("need t_max > 0 and step > 0, got {t_max}, {step}")));
    }
    let cells = (t_max / step).ceil().max(1.0) as usize;
    let (positions, velocities, hit_boundary) = flow(model, p, v, t_max, cells);
    Ok(TimelikeGeodesic { p: p.clone(), v: v.clone(), step: t_max / cells as f64, positions, velocities, hit_boundary })
}

/// Result of the geodesic boundary value problem `exp_p(w) = q`.
#[derive(Clone, Debug)]
pub struct ShootingResult {
    /// Initial velocity for the affine parameter on `[0, 1]`.
    pub w: DVector<f64>,
    /// Velocity on arrival at `q`.
    pub arrival: DVector<f64>,
    pub residual: f64,
    pub iterations: usize,
}

impl ShootingResult {
    /// Lorentzian length `√(−⟨w, w⟩)` of the connecting geodesic.
    pub fn length(&self, model: &SpacetimeModel, p: &DVector<f64>) -> f64 {
        (-model.inner(p, &self.w, &self.w)).max(0.0).sqrt()
    }
}

pub const SHOOTING_TARGET: f64 = 1e-10;
pub const SHOOTING_ACCEPT: f64 = 1e-8;
pub const SHOOTING_CAP: usize = 50;

/// Damped Newton iteration on the initial velocity. The Jacobian of the
/// endpoint map is taken by central differences; steps are halved until the
/// endpoint residual decreases.
pub fn shoot(
    model: &SpacetimeModel,
    p: &DVector<f64>,
    q: &DVector<f64>,
    init: Option<DVector<f64>>,
    step: f64,
) -> Result<ShootingResult> {
    let d = p.len();
    let mut w = init.unwrap_or_else(|| q - p);
    let cells = (w.norm().max(1.0) / step).ceil() as usize;
    let endpoint = |w: &DVector<f64>| -> Option<(DVector<f64>, DVector<f64>)> {
        let (xs, vs, cut) = flow(model, p, w, 1.0, cells);
        (!cut).then(|| (xs.last().unwrap() - q, vs.last().unwrap().clone()))
    };
    let (mut f, mut arrival) = endpoint(&w).ok_or(Error::Convergence { residual: f64::INFINITY, iterations: 0 })?;
    let mut iterations = 0;
    while f.norm() > SHOOTING_TARGET && iterations < SHOOTING_CAP {
        iterations += 1;
        let mut jac = DMatrix::zeros(d, d);
        for k in 0..d {
            let eps = 1e-6 * w[k].abs().max(1.0);
            let mut wp = w.clone();
            let mut wm = w.clone();
            wp[k] += eps;
            wm[k] -= eps;
            let (Some((fp, _)), Some((fm, _))) = (endpoint(&wp), endpoint(&wm)) else {
                return Err(Error::Convergence { residual: f.norm(), iterations });
            };
            jac.set_column(k, &((fp - fm) / (2.0 * eps)));
        }
        let Some(delta) = jac.lu().solve(&(-&f)) else {
            return Err(Error::Convergence { residual: f.norm(), iterations });
        };
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial = &w + &delta * lambda;
            if let Some((ft, at)) = endpoint(&trial) {
                if ft.norm() < f.norm() {
                    w = trial;
                    f = ft;
                    arrival = at;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let residual = f.norm();
    if residual > SHOOTING_ACCEPT {
        return Err(Error::Convergence { residual, iterations });
    }
    Ok(ShootingResult { w, arrival, residual, iterations })
}
