use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{form_in_frame, radial_frame, radial_geodesic, RadialData, RadialGeodesic};
use crate::error::{Error, Result};
use crate::spacetime::{SpacetimeModel, TangentVector};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HessMethod {
    /// Central differences of the gradient field, Richardson-combined.
    #[default]
    FiniteDifference,
    /// Matrix Jacobi equation along the radial geodesic.
    Jacobi,
}

/// RK4 step for the Jacobi system, in units of arc length.
pub const JACOBI_STEP: f64 = 5e-3;

/// Relative spacing of the gradient-field stencil.
const FD_REL_STEP: f64 = 1e-3;

fn geodesic_to(model: &SpacetimeModel, p: &DVector<f64>, q: &DVector<f64>) -> Result<RadialGeodesic> {
    let (check, geo) = radial_geodesic(model, p, q)?;
    geo.ok_or_else(|| Error::Precondition(format!("q is not in the radial domain of p: {:?}", check.reason)))
}

fn grad_at(model: &SpacetimeModel, p: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let geo = geodesic_to(model, p, y)?;
    Ok(-geo.chart.pull_back(y, &geo.ambient_velocity(geo.r)))
}

/// `H^a_b = ∂_b grad^a + Γ^a_{bc} grad^c` by central differences.
fn hess_operator_fd(model: &SpacetimeModel, data: &RadialData) -> Result<DMatrix<f64>> {
    let q = &data.q;
    let d = q.len();
    let h0 = FD_REL_STEP * data.r;
    let mut op = DMatrix::zeros(d, d);
    for b in 0..d {
        let central = |h: f64| -> Result<DVector<f64>> {
            let mut qp = q.clone();
            let mut qm = q.clone();
            qp[b] += h;
            qm[b] -= h;
            Ok((grad_at(model, &data.p, &qp)? - grad_at(model, &data.p, &qm)?) / (2.0 * h))
        };
        let col = (central(0.5 * h0)? * 4.0 - central(h0)?) / 3.0;
        op.set_column(b, &col);
    }
    let gamma = model.connection_coefficients(q)?;
    for a in 0..d {
        for b in 0..d {
            op[(a, b)] += (0..d).map(|c| gamma.get(a, b, c) * data.grad[c]).sum::<f64>();
        }
    }
    Ok(op)
}

/// Packed state `(x, v, F, A, A')` of the Jacobi system.
struct JacobiLayout {
    d: usize,
    n: usize,
}

impl JacobiLayout {
    fn len(&self) -> usize {
        2 * self.d + self.d * self.n + 2 * self.n * self.n
    }
    fn x(&self, y: &DVector<f64>) -> DVector<f64> {
        y.rows(0, self.d).into_owned()
    }
    fn v(&self, y: &DVector<f64>) -> DVector<f64> {
        y.rows(self.d, self.d).into_owned()
    }
    fn frame(&self, y: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_column_slice(self.d, self.n, y.rows(2 * self.d, self.d * self.n).as_slice())
    }
    fn a(&self, y: &DVector<f64>, which: usize) -> DMatrix<f64> {
        let nn = self.n * self.n;
        let off = 2 * self.d + self.d * self.n + which * nn;
        DMatrix::from_column_slice(self.n, self.n, y.rows(off, nn).as_slice())
    }
    fn pack(
        &self,
        x: &DVector<f64>,
        v: &DVector<f64>,
        f: &DMatrix<f64>,
        a: &DMatrix<f64>,
        ap: &DMatrix<f64>,
    ) -> DVector<f64> {
        let mut y = DVector::zeros(self.len());
        let mut off = 0;
        for part in [x.as_slice(), v.as_slice(), f.as_slice(), a.as_slice(), ap.as_slice()] {
            y.rows_mut(off, part.len()).copy_from_slice(part);
            off += part.len();
        }
        y
    }
}

fn jacobi_rhs(model: &SpacetimeModel, lay: &JacobiLayout, y: &DVector<f64>) -> Result<DVector<f64>> {
    let x = lay.x(y);
    let v = lay.v(y);
    let f = lay.frame(y);
    let gamma = model.connection_coefficients(&x)?;
    let riem = model.curvature(&x)?;
    let g = model.metric(&x);
    let dv = -gamma.contract(&v, &v);
    let mut df = DMatrix::zeros(lay.d, lay.n);
    let mut rmat = DMatrix::zeros(lay.n, lay.n);
    let cols: Vec<DVector<f64>> = (0..lay.n).map(|k| f.column(k).into_owned()).collect();
    for (j, fj) in cols.iter().enumerate() {
        df.set_column(j, &(-gamma.contract(&v, fj)));
        let rj = riem.apply(fj, &v, &v);
        let grj = &g * rj;
        for (i, fi) in cols.iter().enumerate() {
            rmat[(i, j)] = fi.dot(&grj);
        }
    }
    let a = lay.a(y, 0);
    let ap = lay.a(y, 1);
    Ok(lay.pack(&v, &dv, &df, &ap, &(-(rmat * a))))
}

/// `−A'(r)A(r)⁻¹` from `A'' + R_γ A = 0`, `A(0) = 0`, `A'(0) = I`, in a
/// parallel orthonormal frame of `γ'⊥`; returned as a chart operator
/// (vanishing on `γ'`).
fn hess_operator_jacobi(model: &SpacetimeModel, data: &RadialData) -> Result<DMatrix<f64>> {
    let geo = geodesic_to(model, &data.p, &data.q)?;
    let p = &data.p;
    let d = p.len();
    let n = d - 1;
    let lay = JacobiLayout { d, n };
    let v0 = geo.chart.pull_back(p, &geo.big_v);
    let frame0 = model.orthonormal_frame(p, Some(&v0))?;
    let f0 = DMatrix::from_columns(&frame0[1..]);
    let mut y = lay.pack(p, &frame0[0], &f0, &DMatrix::zeros(n, n), &DMatrix::identity(n, n));

    let cells = (data.r / JACOBI_STEP).ceil().max(4.0) as usize;
    let dt = data.r / cells as f64;
    for i in 0..cells {
        let k1 = jacobi_rhs(model, &lay, &y)?;
        let k2 = jacobi_rhs(model, &lay, &(&y + &k1 * (0.5 * dt)))?;
        let k3 = jacobi_rhs(model, &lay, &(&y + &k2 * (0.5 * dt)))?;
        let k4 = jacobi_rhs(model, &lay, &(&y + &k3 * dt))?;
        y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        if i + 1 < cells && lay.a(&y, 0).determinant() <= 0.0 {
            return Err(Error::ConjugatePoint((i + 1) as f64 * dt));
        }
    }
    let a = lay.a(&y, 0);
    let ap = lay.a(&y, 1);
    let a_inv = a.clone().try_inverse().filter(|_| a.determinant() > 0.0).ok_or(Error::ConjugatePoint(data.r))?;
    let m = -(ap * a_inv);
    let f = lay.frame(&y);
    let g = model.metric(&data.q);
    // H X = Σ F_k M_kl ⟨X, F_l⟩
    Ok(&f * m * f.transpose() * g)
}

/// Distance data at `q` including the Hessian (frame form) and Laplacian.
pub fn hess_r(model: &SpacetimeModel, p: &DVector<f64>, q: &DVector<f64>, method: HessMethod) -> Result<RadialData> {
    let mut data = radial_frame(model, p, q)?;
    let op = match method {
        HessMethod::FiniteDifference => hess_operator_fd(model, &data)?,
        HessMethod::Jacobi => hess_operator_jacobi(model, &data)?,
    };
    let g = model.metric(q);
    let form = form_in_frame(&g, &data.frame, &op);
    data.laplacian = Some(lorentz_trace(&form));
    data.hess = Some(form);
    Ok(data)
}

/// Trace of the operator whose frame form is `form`.
fn lorentz_trace(form: &DMatrix<f64>) -> f64 {
    -form[(0, 0)] + (1..form.nrows()).map(|i| form[(i, i)]).sum::<f64>()
}

/// `Δ̄r` at `q`.
pub fn laplacian_r(model: &SpacetimeModel, p: &DVector<f64>, q: &DVector<f64>, method: HessMethod) -> Result<f64> {
    Ok(hess_r(model, p, q, method)?.laplacian.expect("set by hess_r"))
}

/// `tr(Hess r)² + Ric(∇̄r, ∇̄r) + ⟨∇̄Δ̄r, ∇̄r⟩`, which vanishes identically.
/// The last term is `−(d/ds)Δ̄r` along the radial geodesic, taken by
/// Richardson-combined central differences.
pub fn bochner_residual(model: &SpacetimeModel, p: &DVector<f64>, q: &DVector<f64>, method: HessMethod) -> Result<f64> {
    let data = hess_r(model, p, q, method)?;
    let op = data.operator()?;
    let tr_sq = (&op * &op).trace();
    let ric = model.ricci_timelike(&TangentVector::new(q.clone(), data.grad.clone()))?;

    let geo = geodesic_to(model, p, q)?;
    let lap_at = |s: f64| -> Result<f64> { laplacian_r(model, p, &geo.point(s)?, method) };
    let delta = 0.02 * data.r;
    let central = |h: f64| -> Result<f64> { Ok((lap_at(data.r + h)? - lap_at(data.r - h)?) / (2.0 * h)) };
    let d_lap = (central(0.5 * delta)? * 4.0 - central(delta)?) / 3.0;
    Ok(tr_sq + ric - d_lap)
}
