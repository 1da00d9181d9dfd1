//! The Lorentzian distance `r = d_p` from a fixed vertex, its gradient,
//! Hessian and Laplacian, and nodewise checks of the Hessian and Laplacian
//! comparison theorems and the Bochner identity.
//!
//! Sign convention: `Hess r(X, Y) = ⟨∇̄_X ∇̄r, Y⟩`. In Minkowski space this
//! gives `−1/r` on the orthogonal complement of `∇̄r`, and every operator
//! here is anchored to that value.

mod geodesic;
mod hessian;
mod verify;

pub use geodesic::{
    integrate_geodesic, shoot, ShootingResult, TimelikeGeodesic, SHOOTING_ACCEPT, SHOOTING_CAP, SHOOTING_TARGET,
};
pub use hessian::{bochner_residual, hess_r, laplacian_r, HessMethod, JACOBI_STEP};
pub use verify::{
    sample_chronological_point, verify_hessian_comparison, verify_laplacian_comparison, BoundSide, RadialSampling,
};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spacetime::{ChartKind, SpaceFormChart, SpacetimeModel};

/// `(C, S, C', S')` for the unit-speed timelike geodesics of the space form
/// of curvature `c`: `γ(s) = C(s)P + S(s)V` in the ambient space.
pub fn geodesic_coefficients(c: f64, s: f64) -> (f64, f64, f64, f64) {
    if c > 0.0 {
        let k = c.sqrt();
        let (sh, ch) = ((k * s).sinh(), (k * s).cosh());
        (ch, sh / k, k * sh, ch)
    } else if c < 0.0 {
        let k = (-c).sqrt();
        let (sn, cs) = (k * s).sin_cos();
        (cs, sn / k, -k * sn, cs)
    } else {
        (1.0, s, 0.0, 1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChronologyReason {
    Chronological,
    NotChronological,
    /// Related beyond the first conjugate distance `π/√(−c)` (or outside
    /// the chart).
    OutsideDomain,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChronologyCheck {
    pub related: bool,
    pub reason: ChronologyReason,
}

impl ChronologyCheck {
    fn of(reason: ChronologyReason) -> Self {
        ChronologyCheck { related: reason == ChronologyReason::Chronological, reason }
    }
}

/// The maximizing unit-speed geodesic from `p` to `q` in a space form,
/// held in ambient form.
#[derive(Clone, Debug)]
pub struct RadialGeodesic {
    pub c: f64,
    pub chart: SpaceFormChart,
    pub r: f64,
    pub big_p: DVector<f64>,
    pub big_v: DVector<f64>,
}

impl RadialGeodesic {
    pub fn ambient_point(&self, s: f64) -> DVector<f64> {
        let (cc, ss, _, _) = geodesic_coefficients(self.c, s);
        &self.big_p * cc + &self.big_v * ss
    }

    pub fn ambient_velocity(&self, s: f64) -> DVector<f64> {
        let (_, _, dc, ds) = geodesic_coefficients(self.c, s);
        &self.big_p * dc + &self.big_v * ds
    }

    pub fn point(&self, s: f64) -> Result<DVector<f64>> {
        self.chart
            .chart_point(&self.ambient_point(s))
            .filter(|x| self.chart.contains(x))
            .ok_or_else(|| Error::Domain(format!("geodesic leaves the chart at s = {s}")))
    }

    /// `γ'(s)` in chart components.
    pub fn velocity(&self, s: f64) -> Result<DVector<f64>> {
        let x = self.point(s)?;
        Ok(self.chart.pull_back(&x, &self.ambient_velocity(s)))
    }
}

/// Closed-form chronology test and connecting geodesic for space forms.
pub fn radial_geodesic(
    model: &SpacetimeModel,
    p: &DVector<f64>,
    q: &DVector<f64>,
) -> Result<(ChronologyCheck, Option<RadialGeodesic>)> {
    let SpacetimeModel::SpaceForm { c, chart, .. } = model else {
        return Err(Error::Contract("the Lorentzian distance is only available on space forms".into()));
    };
    let c = *c;
    use ChronologyReason::*;
    if !chart.contains(p) || !chart.contains(q) {
        return Ok((ChronologyCheck::of(OutsideDomain), None));
    }
    let big_p = chart.embed(p);
    let big_q = chart.embed(q);
    let (r, big_v) = if c == 0.0 {
        let d = &big_q - &big_p;
        let norm = chart.ambient_inner(&d, &d);
        if norm >= 0.0 || d[0] <= 0.0 {
            return Ok((ChronologyCheck::of(NotChronological), None));
        }
        let r = (-norm).sqrt();
        (r, d / r)
    } else {
        let w = c * chart.ambient_inner(&big_p, &big_q);
        let r = if c > 0.0 {
            if w <= 1.0 {
                return Ok((ChronologyCheck::of(NotChronological), None));
            }
            w.acosh() / c.sqrt()
        } else {
            let dt = q[0] - p[0];
            let ell = 1.0 / (-c).sqrt();
            if !(w > -1.0 && w < 1.0) || dt <= 0.0 {
                // Past the antipodal focus every point is related, but only
                // by curves that are no longer radial geodesics.
                let reason = if dt >= std::f64::consts::PI * ell { OutsideDomain } else { NotChronological };
                return Ok((ChronologyCheck::of(reason), None));
            }
            w.acos() * ell
        };
        let (cc, ss, _, _) = geodesic_coefficients(c, r);
        (r, (&big_q - &big_p * cc) / ss)
    };
    let v_chart = chart.pull_back(p, &big_v);
    if v_chart[0] <= 0.0 {
        // In the static chart a past-pointing embedded geodesic can still
        // end at a later chart time, after wrapping once around the time
        // circle: then q lies beyond the antipodal focus.
        let reason = match chart.kind {
            ChartKind::AntiDeSitterStatic { ell } if q[0] - p[0] >= std::f64::consts::PI * ell => OutsideDomain,
            _ => NotChronological,
        };
        return Ok((ChronologyCheck::of(reason), None));
    }
    Ok((ChronologyCheck::of(Chronological), Some(RadialGeodesic { c, chart: chart.clone(), r, big_p, big_v })))
}

/// `d(p, q)` on a space form, `0` off the chronological future.
pub fn lorentz_distance(model: &SpacetimeModel, p: &DVector<f64>, q: &DVector<f64>) -> Result<(ChronologyCheck, f64)> {
    let (check, geo) = radial_geodesic(model, p, q)?;
    Ok((check, geo.map_or(0.0, |g| g.r)))
}

/// Distance data at `q` for the vertex `p`.
///
/// `frame` is orthonormal with `frame[0] = −grad` (future unit timelike) and
/// `frame[1..]` spanning `grad⊥`. `hess` holds the bilinear form
/// `⟨∇̄_{E_j}∇̄r, E_i⟩` in that frame, so the operator matrix is
/// `diag(−1, 1, …, 1)·hess`.
#[derive(Clone, Debug, Serialize)]
pub struct RadialData {
    pub p: DVector<f64>,
    pub q: DVector<f64>,
    pub r: f64,
    pub grad: DVector<f64>,
    pub frame: Vec<DVector<f64>>,
    pub hess: Option<DMatrix<f64>>,
    pub laplacian: Option<f64>,
}

impl RadialData {
    /// `|⟨grad, grad⟩ + 1|`.
    pub fn eikonal_defect(&self, model: &SpacetimeModel) -> f64 {
        (model.inner(&self.q, &self.grad, &self.grad) + 1.0).abs()
    }

    fn hess_or_err(&self) -> Result<&DMatrix<f64>> {
        self.hess.as_ref().ok_or_else(|| Error::Contract("Hessian not computed for this sample".into()))
    }

    /// Frame norm of `Hess r(grad)`.
    pub fn radial_nullity(&self) -> Result<f64> {
        Ok(self.hess_or_err()?.column(0).norm())
    }

    pub fn asymmetry(&self) -> Result<f64> {
        let h = self.hess_or_err()?;
        Ok((h - h.transpose()).amax())
    }

    /// Eigenvalues of the Hessian restricted to `grad⊥`, ascending.
    pub fn transverse_eigenvalues(&self) -> Result<Vec<f64>> {
        let h = self.hess_or_err()?;
        let n = h.nrows() - 1;
        let block = h.view((1, 1), (n, n)).into_owned();
        let block = (&block + block.transpose()) * 0.5;
        let mut ev: Vec<f64> = block.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        Ok(ev)
    }

    /// `Hess r(X, X)` for `X` given by its frame coefficients.
    pub fn hess_form(&self, x: &DVector<f64>) -> Result<f64> {
        Ok((x.transpose() * self.hess_or_err()? * x)[(0, 0)])
    }

    /// The operator `X ↦ ∇̄_X∇̄r` as a matrix in the frame.
    pub fn operator(&self) -> Result<DMatrix<f64>> {
        let mut m = self.hess_or_err()?.clone();
        m.row_mut(0).neg_mut();
        Ok(m)
    }

    /// Chart components of the vector with frame coefficients `x`.
    pub fn frame_vector(&self, x: &DVector<f64>) -> DVector<f64> {
        self.frame.iter().zip(x.iter()).fold(DVector::zeros(self.q.len()), |acc, (e, a)| acc + e * *a)
    }
}

/// `r` and `∇̄r` at `q`: `∇̄r = −γ'(r)` along the radial geodesic.
pub fn radial_frame(model: &SpacetimeModel, p: &DVector<f64>, q: &DVector<f64>) -> Result<RadialData> {
    let (check, geo) = radial_geodesic(model, p, q)?;
    let geo =
        geo.ok_or_else(|| Error::Precondition(format!("q is not in the radial domain of p: {:?}", check.reason)))?;
    let arrival = geo.chart.pull_back(q, &geo.ambient_velocity(geo.r));
    let frame = model.orthonormal_frame(q, Some(&arrival))?;
    Ok(RadialData { p: p.clone(), q: q.clone(), r: geo.r, grad: -arrival, frame, hess: None, laplacian: None })
}

/// Shooting version of [`radial_frame`], independent of the closed forms.
pub fn radial_frame_shooting(
    model: &SpacetimeModel,
    p: &DVector<f64>,
    q: &DVector<f64>,
    step: f64,
) -> Result<RadialData> {
    let init = match radial_geodesic(model, p, q) {
        Ok((_, Some(geo))) => Some(geo.chart.pull_back(p, &geo.big_v) * geo.r),
        _ => None,
    };
    let shot = shoot(model, p, q, init, step)?;
    let r = shot.length(model, p);
    if !(r > 0.0) || shot.w[0] <= 0.0 {
        return Err(Error::Precondition("connecting geodesic is not future timelike".into()));
    }
    let arrival = &shot.arrival / r;
    let frame = model.orthonormal_frame(q, Some(&arrival))?;
    Ok(RadialData { p: p.clone(), q: q.clone(), r, grad: -arrival, frame, hess: None, laplacian: None })
}

/// Bilinear form `⟨H E_j, E_i⟩` of a chart operator `H` in a frame.
pub(crate) fn form_in_frame(g: &DMatrix<f64>, frame: &[DVector<f64>], op: &DMatrix<f64>) -> DMatrix<f64> {
    let d = frame.len();
    let images: Vec<DVector<f64>> = frame.iter().map(|e| op * e).collect();
    DMatrix::from_fn(d, d, |i, j| (frame[i].transpose() * g * &images[j])[(0, 0)])
}
