use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{newton_family, shape_data, Hypersurface, NewtonFamily, ShapeData};
use crate::comparison_ode::{f_c, slope, solve_h, CurvatureProfile};
use crate::error::{Error, Result};
use crate::radial_geometry::radial_geodesic;
use crate::report::{Argmin, Table, VerificationReport};
use crate::spacetime::SpacetimeModel;

/// `u = d_p∘ψ` with its intrinsic gradient and `⟨∇̄r, ν⟩` at every node.
#[derive(Clone, Debug, Serialize)]
pub struct DistanceField {
    pub u: Vec<f64>,
    /// Frame coefficients of `∇u`.
    pub grad: Vec<DVector<f64>>,
    pub normal_component: Vec<f64>,
    /// Largest `|⟨∇̄r,ν⟩² − ‖∇u‖² − 1|`.
    pub max_decomposition_defect: f64,
}

impl DistanceField {
    pub fn range(&self) -> (f64, f64) {
        self.u.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    pub fn grad_norm(&self, i: usize) -> f64 {
        self.grad[i].norm()
    }
}

/// Splits `∇̄r = ∇u − ⟨∇̄r, ν⟩ν` at every node.
pub fn distance_restriction(h: &Hypersurface, model: &SpacetimeModel, p: &DVector<f64>) -> Result<DistanceField> {
    let chart = &h.chart;
    let rows = h
        .nodes
        .par_iter()
        .enumerate()
        .map(|(i, node)| -> Result<(f64, DVector<f64>, f64)> {
            let (check, geo) = radial_geodesic(model, p, &node.point)?;
            let geo = geo.ok_or_else(|| {
                Error::Domain(format!("node {i} is not in the radial domain of the vertex: {:?}", check.reason))
            })?;
            let grad_bar = -geo.ambient_velocity(geo.r);
            let nc = chart.ambient_inner(&grad_bar, &node.normal);
            let grad_u = &grad_bar + &node.normal * nc;
            let e = &node.tangents * &node.frame;
            let coeffs = DVector::from_fn(e.ncols(), |a, _| chart.ambient_inner(&grad_u, &e.column(a).into_owned()));
            Ok((geo.r, coeffs, nc))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = DistanceField { u: vec![], grad: vec![], normal_component: vec![], max_decomposition_defect: 0.0 };
    for (u, g, nc) in rows {
        out.max_decomposition_defect = out.max_decomposition_defect.max((nc * nc - g.norm_squared() - 1.0).abs());
        out.u.push(u);
        out.grad.push(g);
        out.normal_component.push(nc);
    }
    Ok(out)
}

/// `L_k f = Tr(P_k ∘ Hess f)` with the intrinsic Hessian from second-order
/// central differences at `spacing` grid cells. Nodes closer than
/// `spacing` to the boundary give `None`.
pub fn lk_apply(h: &Hypersurface, nf: &NewtonFamily, k: usize, f: &[f64], spacing: usize) -> Result<Vec<Option<f64>>> {
    let n = h.n();
    if k >= n {
        return Err(Error::Contract(format!("L_k needs k < n = {n}, got {k}")));
    }
    if f.len() != h.len() {
        return Err(Error::Contract("field length differs from the node count".into()));
    }
    if spacing == 0 {
        return Err(Error::Contract("stencil spacing must be positive".into()));
    }
    let s = spacing as isize;
    let grid = &h.grid;
    Ok((0..h.len())
        .into_par_iter()
        .map(|i| {
            if !grid.is_interior(i, spacing) {
                return None;
            }
            let nb = |shifts: &[(usize, isize)]| {
                let idx = shifts.iter().fold(i, |j, &(a, o)| grid.neighbor(j, a, o).expect("interior"));
                f[idx]
            };
            let step: Vec<f64> = (0..n).map(|a| grid.spacing(a) * spacing as f64).collect();
            let grad = DVector::from_fn(n, |a, _| (nb(&[(a, s)]) - nb(&[(a, -s)])) / (2.0 * step[a]));
            let mut hess = DMatrix::zeros(n, n);
            for a in 0..n {
                hess[(a, a)] = (nb(&[(a, s)]) - 2.0 * f[i] + nb(&[(a, -s)])) / (step[a] * step[a]);
                for b in 0..a {
                    let v = (nb(&[(a, s), (b, s)]) - nb(&[(a, s), (b, -s)]) - nb(&[(a, -s), (b, s)])
                        + nb(&[(a, -s), (b, -s)]))
                        / (4.0 * step[a] * step[b]);
                    hess[(a, b)] = v;
                    hess[(b, a)] = v;
                }
            }
            let node = &h.nodes[i];
            for a in 0..n {
                for b in 0..n {
                    hess[(a, b)] -= (0..n).map(|l| node.christoffel.get(l, a, b) * grad[l]).sum::<f64>();
                }
            }
            let framed = node.frame.transpose() * hess * &node.frame;
            Some((&nf.p[i][k] * framed).trace())
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropSide {
    /// Sectional curvature at most `G`: `L_k u` bounded below.
    Lower,
    /// Sectional curvature at least `G`: `L_k u` bounded above.
    Upper,
}

/// `h'/h` for `G`, closed form when `G` is constant.
pub(crate) struct SlopeFn {
    constant: Option<f64>,
    sol: Option<crate::comparison_ode::ComparisonSolution>,
}

impl SlopeFn {
    pub(crate) fn new(g: &CurvatureProfile, t_max: f64) -> Result<Self> {
        if let Some(c) = g.as_constant() {
            return Ok(SlopeFn { constant: Some(c), sol: None });
        }
        let sol = solve_h(g, t_max.max(0.1) * 1.05, 1e-3)?;
        Ok(SlopeFn { constant: None, sol: Some(sol) })
    }

    pub(crate) fn r0(&self) -> f64 {
        match (&self.constant, &self.sol) {
            (Some(c), _) => crate::comparison_ode::r0_constant(*c),
            (_, Some(sol)) => sol.r0_or_inf(),
            _ => unreachable!(),
        }
    }

    pub(crate) fn eval(&self, t: f64) -> Result<f64> {
        match (&self.constant, &self.sol) {
            (Some(c), _) => f_c(*c, t),
            (_, Some(sol)) => slope(sol, t),
            _ => unreachable!(),
        }
    }
}

/// Checks the space-form side of the curvature hypothesis on `[lo, hi]`.
pub(crate) fn curvature_side_holds(c: f64, g: &CurvatureProfile, lo: f64, hi: f64, c_le_g: bool) -> bool {
    let (gmin, gmax) = g.range_on(lo, hi);
    let slack = 1e-12 * c.abs().max(1.0);
    if c_le_g {
        c <= gmin + slack
    } else {
        c >= gmax - slack
    }
}

pub(crate) fn require_psd(nf: &NewtonFamily, k: usize) -> Result<()> {
    for (i, pk) in nf.p.iter().enumerate() {
        let m = &pk[k];
        let ev = m.clone().symmetric_eigenvalues().min();
        if ev < -1e-9 * (1.0 + m.amax()) {
            return Err(Error::Precondition(format!(
                "P_{k} is not positive semidefinite at node {i} (eigenvalue {ev:e})"
            )));
        }
    }
    Ok(())
}

/// Nodewise margin `L_k u − RHS` of the `L_k` comparison, where
/// `RHS = −(h'/h)(u)(c_k H_k + ⟨∇u, P_k∇u⟩) + √(1 + ‖∇u‖²) c_k H_{k+1}`.
///
/// `L_k u` is the Richardson combination of stencils at one and two cells;
/// their difference over three is reported as the `envelope` column.
/// On the `Lower` side margins must be `≥ −tol`, on `Upper` `≤ tol`.
pub fn verify_prop_lk(
    h: &Hypersurface,
    model: &SpacetimeModel,
    p: &DVector<f64>,
    g: &CurvatureProfile,
    k: usize,
    side: PropSide,
    tol: f64,
) -> Result<VerificationReport> {
    let sd: ShapeData = shape_data(h)?;
    let nf = newton_family(&sd)?;
    let dist = distance_restriction(h, model, p)?;
    let (umin, umax) = dist.range();
    let c = h.c;
    let c_le_g = side == PropSide::Lower;
    if !curvature_side_holds(c, g, umin, umax, c_le_g) {
        return Err(Error::Precondition(format!(
            "model curvature c = {c} is not {} G on [{umin}, {umax}]",
            if c_le_g { "≤" } else { "≥" }
        )));
    }
    let slope_fn = SlopeFn::new(g, umax)?;
    if umax >= slope_fn.r0() {
        return Err(Error::Precondition(format!("image leaves B⁺(p, r0): sup u = {umax} ≥ r0 = {}", slope_fn.r0())));
    }
    if k > 0 {
        require_psd(&nf, k)?;
    }
    let l1 = lk_apply(h, &nf, k, &dist.u, 1)?;
    let l2 = lk_apply(h, &nf, k, &dist.u, 2)?;
    let ck = sd.c[k];
    let mut table = Table::new(&["node", "u", "grad_norm", "lk_u", "rhs", "margin", "envelope"]);
    let mut slacks = Vec::new();
    let mut max_envelope: f64 = 0.0;
    let (mut kept, mut excluded) = (0, 0);
    for i in 0..h.len() {
        let (Some(a), Some(b)) = (l1[i], l2[i]) else {
            excluded += 1;
            continue;
        };
        kept += 1;
        let lk = (4.0 * a - b) / 3.0;
        let envelope = (a - b).abs() / 3.0;
        max_envelope = max_envelope.max(envelope);
        let u = dist.u[i];
        let gu = &dist.grad[i];
        let s = &sd.nodes[i];
        let quad = (gu.transpose() * &nf.p[i][k] * gu)[(0, 0)];
        let rhs = -slope_fn.eval(u)? * (ck * s.h[k] + quad) + (1.0 + gu.norm_squared()).sqrt() * ck * s.h[k + 1];
        let margin = lk - rhs;
        let slack = if c_le_g { margin } else { -margin };
        table.push(vec![i as f64, u, gu.norm(), lk, rhs, margin, envelope]);
        slacks.push((Argmin { sample: i, item: k, at: u }, slack));
    }
    let name = match side {
        PropSide::Lower => "prop-lk-lower",
        PropSide::Upper => "prop-lk-upper",
    };
    Ok(VerificationReport::from_slacks(name, model.descriptor(), Some(g.clone()), kept, excluded, slacks, tol, table)?
        .with_extra("k", k)
        .with_extra("side", side)
        .with_extra("max_envelope", max_envelope)
        .with_extra("max_decomposition_defect", dist.max_decomposition_defect)
        .with_extra("hypersurface", &h.spec))
}
