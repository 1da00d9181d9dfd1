//! Spacelike hypersurfaces of the space forms, sampled on a parameter
//! lattice: induced geometry, shape operator, higher-order mean curvatures,
//! Newton transformations and the operators `L_k`.
//!
//! Sign convention: `A = −∇̄ν` for the future unit normal `ν`, so
//! `⟨AX, Y⟩ = ⟨ν, ∇̄_X Y⟩`. Spheres `d_p = t` then have `A = −f_c(t)·Id`
//! and `H_k = f_c(t)^k`.

mod gauss;
mod immersion;
mod operators;
mod shape;

pub use gauss::{gauss_residual, GaussOptions};
pub use immersion::{GraphFunction, Immersion, Jet, Mode, ShapeRoute};
pub(crate) use operators::{curvature_side_holds, SlopeFn};
pub use operators::{distance_restriction, lk_apply, verify_prop_lk, DistanceField, PropSide};
pub use shape::{
    binomial, ellipticity_check, newton_family, newton_matrices, shape_data, trace_residuals, EllipticityCertificate,
    NewtonFamily, NodeShape, ShapeData, ALGEBRA_TOL,
};

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::comparison_ode::r0_constant;
use crate::error::{Error, Result};
use crate::spacetime::{Christoffel, SpaceFormChart, SpacetimeModel};
use immersion::null_vector;

/// Tolerance on `⟨ν, ν⟩ = −1` and `⟨ν, ∂_iΨ⟩ = 0`.
pub const NORMAL_TOL: f64 = 1e-8;

/// Largest admissible asymmetry of `A` in an orthonormal frame.
pub const FRAME_TOL: f64 = 1e-6;

pub const DEFAULT_NX: usize = 33;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl ParamBox {
    pub fn cube(n: usize, half_width: f64) -> Self {
        ParamBox { lo: vec![-half_width; n], hi: vec![half_width; n] }
    }
}

fn default_nx() -> usize {
    DEFAULT_NX
}

/// JSON description of a hypersurface.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HypersurfaceSpec {
    /// Graph `x⁰ = φ(x)` over a box of spatial chart coordinates.
    Graph {
        phi: String,
        #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
        params: BTreeMap<String, f64>,
        #[serde(rename = "box")]
        bbox: ParamBox,
        #[serde(default = "default_nx")]
        nx: usize,
        #[serde(default)]
        shape: ShapeRoute,
    },
    /// The level set `d_p = t`, parametrized over a box of the unit
    /// hyperboloid in `T_pM` (default `[−½, ½]ⁿ`).
    Sphere {
        t: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        vertex: Option<Vec<f64>>,
        #[serde(default, rename = "box", skip_serializing_if = "Option::is_none")]
        bbox: Option<ParamBox>,
        #[serde(default = "default_nx")]
        nx: usize,
        #[serde(default)]
        shape: ShapeRoute,
    },
}

impl HypersurfaceSpec {
    pub fn sphere(t: f64, nx: usize) -> Self {
        HypersurfaceSpec::Sphere { t, vertex: None, bbox: None, nx, shape: ShapeRoute::Analytic }
    }

    pub fn graph(phi: &str, bbox: ParamBox, nx: usize) -> Self {
        HypersurfaceSpec::Graph { phi: phi.into(), params: BTreeMap::new(), bbox, nx, shape: ShapeRoute::Analytic }
    }

    pub fn with_params(mut self, kv: &[(&str, f64)]) -> Self {
        if let HypersurfaceSpec::Graph { params, .. } = &mut self {
            params.extend(kv.iter().map(|(k, v)| (k.to_string(), *v)));
        }
        self
    }

    pub fn with_route(mut self, route: ShapeRoute) -> Self {
        match &mut self {
            HypersurfaceSpec::Graph { shape, .. } | HypersurfaceSpec::Sphere { shape, .. } => *shape = route,
        }
        self
    }
}

/// Uniform lattice over a box; the first axis varies slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamGrid {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub nx: usize,
}

impl ParamGrid {
    pub fn n(&self) -> usize {
        self.lo.len()
    }

    pub fn len(&self) -> usize {
        self.nx.pow(self.n() as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.hi[axis] - self.lo[axis]) / (self.nx - 1) as f64
    }

    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let n = self.n();
        let mut m = vec![0; n];
        for axis in (0..n).rev() {
            m[axis] = idx % self.nx;
            idx /= self.nx;
        }
        m
    }

    pub fn linear_index(&self, m: &[usize]) -> usize {
        m.iter().fold(0, |acc, &i| acc * self.nx + i)
    }

    pub fn coords(&self, idx: usize) -> DVector<f64> {
        let m = self.multi_index(idx);
        DVector::from_fn(self.n(), |a, _| self.lo[a] + m[a] as f64 * self.spacing(a))
    }

    /// Node shifted by `offset` along `axis`, if it stays on the grid.
    pub fn neighbor(&self, idx: usize, axis: usize, offset: isize) -> Option<usize> {
        let mut m = self.multi_index(idx);
        let j = m[axis] as isize + offset;
        if j < 0 || j >= self.nx as isize {
            return None;
        }
        m[axis] = j as usize;
        Some(self.linear_index(&m))
    }

    /// At least `margin` nodes from every face.
    pub fn is_interior(&self, idx: usize, margin: usize) -> bool {
        self.multi_index(idx).iter().all(|&i| i >= margin && i + margin < self.nx)
    }
}

/// Cached geometry at one lattice node.
#[derive(Clone, Debug)]
pub struct Node {
    pub y: DVector<f64>,
    /// Chart coordinates of `Ψ(y)`.
    pub point: DVector<f64>,
    pub ambient: DVector<f64>,
    /// Columns `∂_iΨ` in ambient components.
    pub tangents: DMatrix<f64>,
    pub metric: DMatrix<f64>,
    /// `B` with `Bᵀ g B = I`: column `a` holds the parameter components of
    /// the orthonormal tangent vector `e_a`.
    pub frame: DMatrix<f64>,
    /// Future unit normal, ambient components.
    pub normal: DVector<f64>,
    /// `⟨A e_b, e_a⟩` in the orthonormal frame.
    pub shape: DMatrix<f64>,
    /// Intrinsic Levi-Civita coefficients in the parameters.
    pub christoffel: Christoffel,
    pub normal_defect: f64,
    pub asymmetry: f64,
}

impl Node {
    /// Parameter components of the tangent vector with frame coefficients `x`.
    pub fn frame_vector(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.frame * x
    }
}

#[derive(Clone, Debug)]
pub struct Hypersurface {
    pub spec: HypersurfaceSpec,
    pub c: f64,
    pub chart: SpaceFormChart,
    pub immersion: Immersion,
    pub route: ShapeRoute,
    pub grid: ParamGrid,
    /// Default vertex for the distance function: the sphere's centre, or
    /// the chart origin for graphs.
    pub vertex: DVector<f64>,
    pub nodes: Vec<Node>,
}

/// Builds the node cache. Rejects non-spacelike nodes and nodes whose image
/// leaves the chart.
pub fn construct_hypersurface(model: &SpacetimeModel, spec: &HypersurfaceSpec) -> Result<Hypersurface> {
    let SpacetimeModel::SpaceForm { c, n, chart } = model else {
        return Err(Error::Contract("hypersurfaces are only built in space forms".into()));
    };
    let (c, n) = (*c, *n);
    let origin = DVector::zeros(n + 1);
    let (immersion, bbox, nx, route, vertex) = match spec {
        HypersurfaceSpec::Graph { phi, params, bbox, nx, shape } => {
            let phi = GraphFunction::builtin(phi, n, params)?;
            (Immersion::Graph { chart: chart.clone(), phi }, bbox.clone(), *nx, *shape, origin)
        }
        HypersurfaceSpec::Sphere { t, vertex, bbox, nx, shape } => {
            if !(*t > 0.0) || *t >= r0_constant(c) {
                return Err(Error::Precondition(format!("sphere radius t = {t} must lie in (0, {})", r0_constant(c))));
            }
            let p = match vertex {
                Some(v) if v.len() != n + 1 => {
                    return Err(Error::Config(format!("vertex needs {} coordinates", n + 1)))
                }
                Some(v) => DVector::from_column_slice(v),
                None => origin,
            };
            if !chart.contains(&p) {
                return Err(Error::Domain("sphere vertex outside the chart".into()));
            }
            let frame = model.orthonormal_frame(&p, None)?;
            let basis = frame.iter().map(|e| chart.push_forward(&p, e)).collect();
            let imm = Immersion::Sphere { chart: chart.clone(), c, t: *t, big_p: chart.embed(&p), basis };
            (imm, bbox.clone().unwrap_or_else(|| ParamBox::cube(n, 0.5)), *nx, *shape, p)
        }
    };
    if bbox.lo.len() != n || bbox.hi.len() != n {
        return Err(Error::Config(format!("parameter box must have {n} coordinates")));
    }
    if bbox.lo.iter().zip(&bbox.hi).any(|(a, b)| !(b > a)) {
        return Err(Error::Config("parameter box needs lo < hi on every axis".into()));
    }
    if nx < 3 {
        return Err(Error::Config(format!("nx = {nx}: need at least 3 nodes per axis")));
    }
    let grid = ParamGrid { lo: bbox.lo, hi: bbox.hi, nx };
    let fd_step = (0..n).map(|a| grid.spacing(a)).fold(f64::INFINITY, f64::min);
    let nodes = (0..grid.len())
        .into_par_iter()
        .map(|i| build_node(&immersion, route, fd_step, c, i, grid.coords(i)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Hypersurface { spec: spec.clone(), c, chart: chart.clone(), immersion, route, grid, vertex, nodes })
}

fn jet_for(imm: &Immersion, route: ShapeRoute, fd_step: f64, y: &DVector<f64>) -> Jet {
    match route {
        ShapeRoute::Analytic => imm.jet(y),
        ShapeRoute::Fd => imm.jet_fd(y, fd_step),
    }
}

fn gram(chart: &SpaceFormChart, cols: &DMatrix<f64>) -> DMatrix<f64> {
    let eta = chart.eta();
    let n = cols.ncols();
    DMatrix::from_fn(n, n, |i, j| cols.column(i).component_mul(&eta).dot(&cols.column(j)))
}

/// Orthonormalizing matrix `B = L⁻ᵀ` for `g = L Lᵀ`.
fn orthonormalizer(g: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let l = g.clone().cholesky()?.l();
    l.transpose().try_inverse()
}

fn build_node(imm: &Immersion, route: ShapeRoute, fd_step: f64, c: f64, idx: usize, y: DVector<f64>) -> Result<Node> {
    let chart = imm.chart();
    let fail = |reason: String| Error::Construction { node: idx, reason };
    let jet = jet_for(imm, route, fd_step, &y);
    if jet.pos.iter().any(|v| !v.is_finite()) {
        return Err(fail("immersion is not finite".into()));
    }
    let point = chart
        .chart_point(&jet.pos)
        .filter(|x| chart.contains(x))
        .ok_or_else(|| fail("image leaves the chart".into()))?;
    let n = y.len();
    let metric = gram(chart, &jet.d1);
    let frame = orthonormalizer(&metric)
        .ok_or_else(|| fail("induced metric is not positive definite (not spacelike)".into()))?;

    let eta = chart.eta();
    let big = chart.ambient_dim();
    let mut rows: Vec<DVector<f64>> = (0..n).map(|i| jet.d1.column(i).component_mul(&eta)).collect();
    if c != 0.0 {
        rows.push(jet.pos.component_mul(&eta));
    }
    let m = DMatrix::from_fn(rows.len(), big, |i, j| rows[i][j]);
    let mut normal = null_vector(&m);
    let q = chart.ambient_inner(&normal, &normal);
    if !(q < 0.0) {
        return Err(fail(format!("normal is not timelike (⟨ν,ν⟩ = {q:e})")));
    }
    normal /= (-q).sqrt();
    if chart.pull_back(&point, &normal)[0] < 0.0 {
        normal = -normal;
    }
    let normal_defect = (0..n)
        .map(|i| chart.ambient_inner(&normal, &jet.d1.column(i).into_owned()).abs())
        .fold((chart.ambient_inner(&normal, &normal) + 1.0).abs(), f64::max);
    if normal_defect > NORMAL_TOL {
        return Err(fail(format!("normal defect {normal_defect:e}")));
    }

    let second = DMatrix::from_fn(n, n, |i, j| chart.ambient_inner(&normal, &jet.d2[i * n + j]));
    let shape = frame.transpose() * &second * &frame;
    let asymmetry = (&shape - shape.transpose()).amax();
    if asymmetry > FRAME_TOL {
        return Err(Error::Frame { node: idx, asymmetry });
    }
    let shape = (&shape + shape.transpose()) * 0.5;

    let ginv = metric.clone().try_inverse().ok_or_else(|| fail("singular metric".into()))?;
    let mut christoffel = Christoffel::zeros(n);
    let proj = DMatrix::from_fn(n, n * n, |l, ij| chart.ambient_inner(&jet.d2[ij], &jet.d1.column(l).into_owned()));
    let lifted = &ginv * proj;
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                christoffel.set(k, i, j, lifted[(k, i * n + j)]);
            }
        }
    }
    Ok(Node {
        y,
        point,
        ambient: jet.pos,
        tangents: jet.d1,
        metric,
        frame,
        normal,
        shape,
        christoffel,
        normal_defect,
        asymmetry,
    })
}

impl Hypersurface {
    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn fd_step(&self) -> f64 {
        (0..self.n()).map(|a| self.grid.spacing(a)).fold(f64::INFINITY, f64::min)
    }

    /// Induced metric at an arbitrary parameter point, along the same route
    /// as the node cache.
    pub fn metric_at(&self, y: &DVector<f64>) -> DMatrix<f64> {
        let d1 = match self.route {
            ShapeRoute::Analytic => self.immersion.jet(y).d1,
            ShapeRoute::Fd => self.immersion.jet_fd(y, self.fd_step()).d1,
        };
        gram(&self.chart, &d1)
    }

    /// Node table: parameters, chart point and `H_1…H_n`.
    pub fn node_table(&self, sd: &ShapeData) -> crate::report::Table {
        let n = self.n();
        let mut headers: Vec<String> = (0..n).map(|i| format!("y{i}")).collect();
        headers.extend((0..=n).map(|a| format!("x{a}")));
        headers.extend((1..=n).map(|k| format!("H{k}")));
        let refs: Vec<&str> = headers.iter().map(String::as_str).collect();
        let mut table = crate::report::Table::new(&refs);
        for (node, s) in self.nodes.iter().zip(&sd.nodes) {
            let mut row: Vec<f64> = node.y.iter().copied().collect();
            row.extend(node.point.iter().copied());
            row.extend((1..=n).map(|k| s.h[k]));
            table.push(row);
        }
        table
    }
}
