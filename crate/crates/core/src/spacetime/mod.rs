//! Model spacetimes: the Lorentzian space forms in explicit charts and a
//! small catalogue of coordinate metrics whose connection and curvature are
//! obtained by finite differences.
//!
//! Signature is `(−, +, …, +)`; coordinate 0 is time and its positive
//! direction is declared future in every model.

mod chart;
mod tensor;

pub use chart::{ChartKind, SpaceFormChart};
pub use tensor::{Christoffel, Riemann};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream;

/// Relative finite-difference step for metric derivatives.
pub const FD_STEP: f64 = 1e-4;

/// Causal character tolerance on `⟨v, v⟩`.
pub const CAUSAL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BuiltinMetric {
    Minkowski,
    /// `−dτ² + e^{2τ}|dx|²`.
    DeSitterFlat,
    /// Static anti-de Sitter chart with `ℓ = 1`.
    AntiDeSitterStatic,
    /// Matter-dominated Friedmann–Robertson–Walker, `−dτ² + τ^{4/3}|dx|²`,
    /// `τ > 0`. Its timelike sectional curvatures are not constant.
    FrwMatter,
}

impl BuiltinMetric {
    pub fn parse(name: &str) -> Result<Self> {
        let key = name.strip_prefix("builtin:").unwrap_or(name);
        serde_json::from_value(serde_json::Value::String(key.to_string()))
            .map_err(|_| Error::Config(format!("unknown builtin metric '{name}'")))
    }

    pub fn name(self) -> &'static str {
        match self {
            BuiltinMetric::Minkowski => "minkowski",
            BuiltinMetric::DeSitterFlat => "de-sitter-flat",
            BuiltinMetric::AntiDeSitterStatic => "anti-de-sitter-static",
            BuiltinMetric::FrwMatter => "frw-matter",
        }
    }

    fn components(self, n: usize, x: &DVector<f64>) -> DMatrix<f64> {
        match self {
            BuiltinMetric::Minkowski => minkowski_metric(n),
            BuiltinMetric::DeSitterFlat => SpaceFormChart::new(1.0, n).metric(x),
            BuiltinMetric::AntiDeSitterStatic => SpaceFormChart::new(-1.0, n).metric(x),
            BuiltinMetric::FrwMatter => {
                let a2 = x[0].powf(4.0 / 3.0);
                DMatrix::from_fn(n + 1, n + 1, |i, j| match (i, j) {
                    (0, 0) => -1.0,
                    (i, j) if i == j => a2,
                    _ => 0.0,
                })
            }
        }
    }
}

pub fn minkowski_metric(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n + 1, n + 1, |i, j| match (i, j) {
        (0, 0) => -1.0,
        (i, j) if i == j => 1.0,
        _ => 0.0,
    })
}

/// Axis-aligned coordinate box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl DomainBox {
    /// Whether `x` is inside with at least `margin` to every face.
    pub fn contains_with_margin(&self, x: &DVector<f64>, margin: &[f64]) -> bool {
        (0..x.len()).all(|i| x[i] - margin[i] > self.lo[i] && x[i] + margin[i] < self.hi[i])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SpacetimeModel {
    SpaceForm { c: f64, n: usize, chart: SpaceFormChart },
    CoordinateMetric { n: usize, metric: BuiltinMetric, domain: DomainBox },
}

/// JSON model descriptor. `kind` defaults to `space_form`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDescriptor {
    #[serde(default = "default_kind")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainBox>,
}

fn default_kind() -> String {
    "space_form".into()
}

impl ModelDescriptor {
    pub fn space_form(c: f64, n: usize) -> Self {
        ModelDescriptor { kind: default_kind(), c: Some(c), n, components: None, domain: None }
    }

    pub fn build(&self) -> Result<SpacetimeModel> {
        if self.n == 0 {
            return Err(Error::Config("model dimension n must be at least 1".into()));
        }
        match self.kind.as_str() {
            "space_form" => {
                let c = self.c.ok_or_else(|| Error::Config("space_form model needs 'c'".into()))?;
                if !c.is_finite() {
                    return Err(Error::Config("curvature c must be finite".into()));
                }
                Ok(SpacetimeModel::space_form(c, self.n))
            }
            "coordinate_metric" => {
                let name = self
                    .components
                    .as_deref()
                    .ok_or_else(|| Error::Config("coordinate_metric needs 'components'".into()))?;
                let metric = BuiltinMetric::parse(name)?;
                let domain =
                    self.domain.clone().ok_or_else(|| Error::Config("coordinate_metric needs 'domain'".into()))?;
                if domain.lo.len() != self.n + 1 || domain.hi.len() != self.n + 1 {
                    return Err(Error::Config(format!("domain box must have {} coordinates", self.n + 1)));
                }
                Ok(SpacetimeModel::CoordinateMetric { n: self.n, metric, domain })
            }
            other => Err(Error::Config(format!("unknown model kind '{other}'"))),
        }
    }
}

impl SpacetimeModel {
    pub fn space_form(c: f64, n: usize) -> Self {
        SpacetimeModel::SpaceForm { c, n, chart: SpaceFormChart::new(c, n) }
    }

    pub fn minkowski(n: usize) -> Self {
        SpacetimeModel::space_form(0.0, n)
    }

    pub fn coordinate(n: usize, metric: BuiltinMetric, domain: DomainBox) -> Self {
        SpacetimeModel::CoordinateMetric { n, metric, domain }
    }

    pub fn descriptor(&self) -> ModelDescriptor {
        match self {
            SpacetimeModel::SpaceForm { c, n, .. } => ModelDescriptor::space_form(*c, *n),
            SpacetimeModel::CoordinateMetric { n, metric, domain } => ModelDescriptor {
                kind: "coordinate_metric".into(),
                c: None,
                n: *n,
                components: Some(format!("builtin:{}", metric.name())),
                domain: Some(domain.clone()),
            },
        }
    }

    /// Spatial dimension `n`; the spacetime has dimension `n + 1`.
    pub fn n(&self) -> usize {
        match self {
            SpacetimeModel::SpaceForm { n, .. } | SpacetimeModel::CoordinateMetric { n, .. } => *n,
        }
    }

    pub fn dim(&self) -> usize {
        self.n() + 1
    }

    pub fn space_form_curvature(&self) -> Option<f64> {
        match self {
            SpacetimeModel::SpaceForm { c, .. } => Some(*c),
            _ => None,
        }
    }

    pub fn chart(&self) -> Option<&SpaceFormChart> {
        match self {
            SpacetimeModel::SpaceForm { chart, .. } => Some(chart),
            _ => None,
        }
    }

    pub fn contains(&self, x: &DVector<f64>) -> bool {
        match self {
            SpacetimeModel::SpaceForm { chart, .. } => chart.contains(x),
            SpacetimeModel::CoordinateMetric { domain, .. } => domain.contains_with_margin(x, &vec![0.0; x.len()]),
        }
    }

    pub fn metric(&self, x: &DVector<f64>) -> DMatrix<f64> {
        match self {
            SpacetimeModel::SpaceForm { chart, .. } => chart.metric(x),
            SpacetimeModel::CoordinateMetric { n, metric, .. } => metric.components(*n, x),
        }
    }

    pub fn inner(&self, x: &DVector<f64>, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        (u.transpose() * self.metric(x) * v)[(0, 0)]
    }

    fn fd_steps(&self, x: &DVector<f64>) -> Vec<f64> {
        x.iter().map(|v| FD_STEP * v.abs().max(1.0)).collect()
    }

    fn check_stencil(&self, x: &DVector<f64>, width: f64) -> Result<()> {
        let steps: Vec<f64> = self.fd_steps(x).iter().map(|s| s * width).collect();
        let ok = match self {
            SpacetimeModel::SpaceForm { chart, .. } => {
                chart.contains(x)
                    && (0..x.len()).all(|k| {
                        let mut y = x.clone();
                        y[k] += steps[k];
                        let mut z = x.clone();
                        z[k] -= steps[k];
                        chart.contains(&y) && chart.contains(&z)
                    })
            }
            SpacetimeModel::CoordinateMetric { domain, .. } => domain.contains_with_margin(x, &steps),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Stencil(format!("{:?}", x.as_slice())))
        }
    }

    /// Metric derivatives `∂_k g` by central differences at steps `h` and
    /// `h/2`, combined by Richardson extrapolation.
    fn metric_derivatives_fd(&self, x: &DVector<f64>) -> Vec<DMatrix<f64>> {
        let steps = self.fd_steps(x);
        (0..x.len())
            .map(|k| {
                let central = |h: f64| {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[k] += h;
                    xm[k] -= h;
                    (self.metric(&xp) - self.metric(&xm)) / (2.0 * h)
                };
                let coarse = central(steps[k]);
                let fine = central(0.5 * steps[k]);
                (fine * 4.0 - coarse) / 3.0
            })
            .collect()
    }

    /// Levi-Civita coefficients: closed form for space forms (through the
    /// embedding, `Γ^k_{ij} = g^{kl}⟨∂_i∂_j X, ∂_l X⟩`), central differences
    /// of the metric otherwise.
    pub fn connection_coefficients(&self, x: &DVector<f64>) -> Result<Christoffel> {
        match self {
            SpacetimeModel::SpaceForm { chart, .. } => {
                if !chart.contains(x) {
                    return Err(Error::Stencil(format!("{:?}", x.as_slice())));
                }
                Ok(space_form_christoffel(chart, x))
            }
            SpacetimeModel::CoordinateMetric { .. } => self.connection_coefficients_fd(x),
        }
    }

    /// Finite-difference connection coefficients, available for every model.
    pub fn connection_coefficients_fd(&self, x: &DVector<f64>) -> Result<Christoffel> {
        self.check_stencil(x, 1.0)?;
        let g = self.metric(x);
        let dg = self.metric_derivatives_fd(x);
        Christoffel::from_metric_derivatives(&g, &dg).ok_or_else(|| Error::Model("degenerate metric".into()))
    }

    /// Curvature tensor: the constant-curvature closed form for space forms,
    /// finite differences of the connection otherwise.
    pub fn curvature(&self, x: &DVector<f64>) -> Result<Riemann> {
        match self {
            SpacetimeModel::SpaceForm { c, chart, .. } => {
                if !chart.contains(x) {
                    return Err(Error::Stencil(format!("{:?}", x.as_slice())));
                }
                Ok(Riemann::constant_curvature(*c, &chart.metric(x)))
            }
            SpacetimeModel::CoordinateMetric { .. } => self.curvature_fd(x),
        }
    }

    /// Curvature from central differences of the connection coefficients
    /// (Richardson-combined), for any model.
    pub fn curvature_fd(&self, x: &DVector<f64>) -> Result<Riemann> {
        self.check_stencil(x, 2.0)?;
        let gamma = self.connection_coefficients(x)?;
        let steps = self.fd_steps(x);
        let mut dgamma = Vec::with_capacity(x.len());
        for k in 0..x.len() {
            let central = |h: f64| -> Result<Vec<f64>> {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[k] += h;
                xm[k] -= h;
                let gp = self.connection_coefficients(&xp)?;
                let gm = self.connection_coefficients(&xm)?;
                let d = gp.dim();
                let mut out = vec![0.0; d * d * d];
                for a in 0..d {
                    for b in 0..d {
                        for c in 0..d {
                            out[(a * d + b) * d + c] = (gp.get(a, b, c) - gm.get(a, b, c)) / (2.0 * h);
                        }
                    }
                }
                Ok(out)
            };
            let coarse = central(steps[k])?;
            let fine = central(0.5 * steps[k])?;
            let d = gamma.dim();
            let mut dk = Christoffel::zeros(d);
            for a in 0..d {
                for b in 0..d {
                    for c in 0..d {
                        let i = (a * d + b) * d + c;
                        dk.set(a, b, c, (4.0 * fine[i] - coarse[i]) / 3.0);
                    }
                }
            }
            dgamma.push(dk);
        }
        Ok(Riemann::from_christoffel(&gamma, &dgamma))
    }

    pub fn causal_type(&self, v: &TangentVector) -> CausalType {
        let q = self.inner(&v.base, &v.components, &v.components);
        if q < -CAUSAL_TOL {
            CausalType::Timelike
        } else if q > CAUSAL_TOL {
            CausalType::Spacelike
        } else {
            CausalType::Null
        }
    }

    /// Gram–Schmidt in the metric: returns `[e₀, e₁, …, e_n]` with `e₀`
    /// future unit timelike and the rest unit spacelike. If `first` is given
    /// it must be timelike; it is normalized (and made future-pointing) and
    /// used as `e₀`.
    pub fn orthonormal_frame(&self, x: &DVector<f64>, first: Option<&DVector<f64>>) -> Result<Vec<DVector<f64>>> {
        orthonormal_frame(&self.metric(x), first)
    }

    /// `K(Π) = ⟨R(V,X)X, V⟩ / (⟨V,V⟩⟨X,X⟩ − ⟨V,X⟩²)`.
    pub fn sectional_timelike(&self, plane: &TimelikePlane) -> Result<f64> {
        let x = &plane.base;
        let g = self.metric(x);
        let ip = |a: &DVector<f64>, b: &DVector<f64>| (a.transpose() * &g * b)[(0, 0)];
        let gram = ip(&plane.v, &plane.v) * ip(&plane.x, &plane.x) - ip(&plane.v, &plane.x).powi(2);
        if gram.abs() < 1e-10 {
            return Err(Error::Degenerate(gram));
        }
        let r = self.curvature(x)?;
        let rvxx = r.apply(&plane.v, &plane.x, &plane.x);
        Ok(ip(&rvxx, &plane.v) / gram)
    }

    /// `Ric(V, V)` as the trace of `Z ↦ R(Z, V)V` over an orthonormal frame
    /// completing the unit timelike `V`.
    pub fn ricci_timelike(&self, v: &TangentVector) -> Result<f64> {
        let x = &v.base;
        let g = self.metric(x);
        let norm = (v.components.transpose() * &g * &v.components)[(0, 0)];
        if (norm + 1.0).abs() > 1e-8 {
            return Err(Error::Contract(format!("Ric(V,V) needs ⟨V,V⟩ = −1, got {norm}")));
        }
        let frame = orthonormal_frame(&g, Some(&v.components))?;
        let r = self.curvature(x)?;
        Ok(frame[1..].iter().map(|e| (r.apply(e, &v.components, &v.components).transpose() * &g * e)[(0, 0)]).sum())
    }

    /// Random timelike plane at `x`, reproducible from `(seed, index)`.
    pub fn sample_timelike_plane(&self, x: &DVector<f64>, seed: u64, index: u64) -> Result<TimelikePlane> {
        let mut rng = stream(seed, index);
        let frame = self.orthonormal_frame(x, None)?;
        let n = self.n();
        let g = self.metric(x);
        let ip = |a: &DVector<f64>, b: &DVector<f64>| (a.transpose() * &g * b)[(0, 0)];

        let mut w: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let wn = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        if wn > 0.9 {
            w.iter_mut().for_each(|v| *v *= 0.9 / wn);
        }
        let gamma = 1.0 / (1.0 - w.iter().map(|v| v * v).sum::<f64>()).sqrt();
        let mut v = frame[0].clone();
        for i in 0..n {
            v += &frame[i + 1] * w[i];
        }
        v *= gamma;

        let spatial = loop {
            let mut z = DVector::zeros(n + 1);
            for e in frame.iter() {
                z += e * rng.gen_range(-1.0..1.0);
            }
            // ⟨V,V⟩ = −1, so the projection adds ⟨z,V⟩V.
            let proj = &z + &v * ip(&z, &v);
            let q = ip(&proj, &proj);
            if q > 1e-6 {
                break proj / q.sqrt();
            }
        };
        Ok(TimelikePlane { base: x.clone(), v, x: spatial })
    }
}

fn space_form_christoffel(chart: &SpaceFormChart, x: &DVector<f64>) -> Christoffel {
    let d = chart.dim();
    if let ChartKind::Minkowski = chart.kind {
        return Christoffel::zeros(d);
    }
    let j = chart.jacobian(x);
    let hs = chart.hessian(x);
    let eta = chart.eta();
    let g = chart.metric(x);
    let ginv = g.try_inverse().expect("space-form chart metric is nondegenerate");
    // proj[l][(i,j)] = ⟨∂_i∂_j X, ∂_l X⟩
    let proj: Vec<DMatrix<f64>> = (0..d)
        .map(|l| DMatrix::from_fn(d, d, |i, k| (0..eta.len()).map(|a| eta[a] * hs[a][(i, k)] * j[(a, l)]).sum()))
        .collect();
    let mut out = Christoffel::zeros(d);
    for a in 0..d {
        for b in 0..d {
            for c in b..d {
                let v: f64 = (0..d).map(|l| ginv[(a, l)] * proj[l][(b, c)]).sum();
                out.set(a, b, c, v);
                out.set(a, c, b, v);
            }
        }
    }
    out
}

pub fn orthonormal_frame(g: &DMatrix<f64>, first: Option<&DVector<f64>>) -> Result<Vec<DVector<f64>>> {
    let d = g.nrows();
    let ip = |a: &DVector<f64>, b: &DVector<f64>| (a.transpose() * g * b)[(0, 0)];
    let mut frame: Vec<DVector<f64>> = Vec::with_capacity(d);
    let mut signs: Vec<f64> = Vec::with_capacity(d);

    let e0 = match first {
        Some(v) => v.clone(),
        None => DVector::from_fn(d, |i, _| if i == 0 { 1.0 } else { 0.0 }),
    };
    let q0 = ip(&e0, &e0);
    if q0 >= -1e-14 {
        return Err(Error::Model(format!("first frame vector is not timelike (⟨v,v⟩ = {q0})")));
    }
    let mut e0 = e0 / (-q0).sqrt();
    if e0[0] < 0.0 {
        e0 = -e0;
    }
    frame.push(e0);
    signs.push(-1.0);

    for k in 0..d {
        if frame.len() == d {
            break;
        }
        let mut w = DVector::from_fn(d, |i, _| if i == k { 1.0 } else { 0.0 });
        // Two passes of modified Gram–Schmidt for stability.
        for _ in 0..2 {
            for (e, s) in frame.iter().zip(&signs) {
                let c = ip(&w, e) * s;
                w -= e * c;
            }
        }
        let q = ip(&w, &w);
        let scale = g.diagonal().iter().map(|v| v.abs()).fold(0.0, f64::max).max(1.0);
        if q.abs() < 1e-10 * scale {
            continue;
        }
        if q < 0.0 {
            return Err(Error::Model("more than one timelike direction: metric is not Lorentzian".into()));
        }
        frame.push(w / q.sqrt());
        signs.push(1.0);
    }
    if frame.len() != d {
        return Err(Error::Model("frame completion failed".into()));
    }
    Ok(frame)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CausalType {
    Timelike,
    Spacelike,
    Null,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    pub base: DVector<f64>,
    pub components: DVector<f64>,
}

impl TangentVector {
    pub fn new(base: DVector<f64>, components: DVector<f64>) -> Self {
        TangentVector { base, components }
    }

    /// Future-pointing: positive chart time component.
    pub fn is_future(&self) -> bool {
        self.components[0] > 0.0
    }
}

/// Orthonormal timelike pair `(V, X)` at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct TimelikePlane {
    pub base: DVector<f64>,
    pub v: DVector<f64>,
    pub x: DVector<f64>,
}

impl TimelikePlane {
    /// Largest deviation from `⟨V,V⟩ = −1`, `⟨X,X⟩ = 1`, `⟨V,X⟩ = 0`.
    pub fn orthonormality_defect(&self, model: &SpacetimeModel) -> f64 {
        let b = &self.base;
        (model.inner(b, &self.v, &self.v) + 1.0)
            .abs()
            .max((model.inner(b, &self.x, &self.x) - 1.0).abs())
            .max(model.inner(b, &self.v, &self.x).abs())
    }
}
