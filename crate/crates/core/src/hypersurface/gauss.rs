use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{shape_data, Hypersurface};
use crate::error::{Error, Result};
use crate::report::{Argmin, Table, VerificationReport};
use crate::rng::stream;
use crate::spacetime::{Christoffel, Riemann, SpacetimeModel};

/// Step of the nested metric stencils for intrinsic curvature.
const CURVATURE_STEP: f64 = 1e-2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaussOptions {
    pub planes_per_node: usize,
    pub seed: u64,
    pub residual_tol: f64,
    pub bound_tol: f64,
}

impl Default for GaussOptions {
    fn default() -> Self {
        GaussOptions { planes_per_node: 3, seed: 0, residual_tol: 1e-4, bound_tol: 1e-6 }
    }
}

/// Fourth-order five-point derivative of `f` along `axis`.
fn d5<T, F>(y: &DVector<f64>, axis: usize, h: f64, f: F, lin: impl Fn(&[(f64, &T)]) -> T) -> Result<T>
where
    F: Fn(&DVector<f64>) -> Result<T>,
{
    let at = |s: f64| {
        let mut z = y.clone();
        z[axis] += s;
        f(&z)
    };
    let (p1, m1, p2, m2) = (at(h)?, at(-h)?, at(2.0 * h)?, at(-2.0 * h)?);
    let w = 1.0 / (12.0 * h);
    Ok(lin(&[(8.0 * w, &p1), (-8.0 * w, &m1), (-w, &p2), (w, &m2)]))
}

fn lin_matrix(terms: &[(f64, &DMatrix<f64>)]) -> DMatrix<f64> {
    terms.iter().fold(DMatrix::zeros(terms[0].1.nrows(), terms[0].1.ncols()), |acc, (w, m)| acc + *m * *w)
}

fn lin_christoffel(terms: &[(f64, &Christoffel)]) -> Christoffel {
    let d = terms[0].1.dim();
    let mut out = Christoffel::zeros(d);
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                out.set(a, b, c, terms.iter().map(|(w, g)| w * g.get(a, b, c)).sum());
            }
        }
    }
    out
}

fn christoffel_at(h: &Hypersurface, y: &DVector<f64>) -> Result<Christoffel> {
    let n = y.len();
    let metric = |z: &DVector<f64>| -> Result<DMatrix<f64>> {
        let g = h.metric_at(z);
        if g.iter().all(|v| v.is_finite()) {
            Ok(g)
        } else {
            Err(Error::Stencil(format!("{z:?}")))
        }
    };
    let dg = (0..n).map(|a| d5(y, a, CURVATURE_STEP, metric, lin_matrix)).collect::<Result<Vec<_>>>()?;
    Christoffel::from_metric_derivatives(&metric(y)?, &dg).ok_or_else(|| Error::Stencil(format!("{y:?}")))
}

/// Intrinsic curvature tensor at a parameter point by nested differences
/// of the induced metric.
pub(crate) fn intrinsic_curvature(h: &Hypersurface, y: &DVector<f64>) -> Result<Riemann> {
    let n = y.len();
    let gamma = christoffel_at(h, y)?;
    let dgamma = (0..n)
        .map(|a| d5(y, a, CURVATURE_STEP, |z: &DVector<f64>| christoffel_at(h, z), lin_christoffel))
        .collect::<Result<Vec<_>>>()?;
    Ok(Riemann::from_christoffel(&gamma, &dgamma))
}

fn random_orthonormal_pair(rng: &mut impl Rng, n: usize) -> (DVector<f64>, DVector<f64>) {
    loop {
        let x = DVector::<f64>::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let y = DVector::<f64>::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let nx = x.norm();
        if nx < 1e-3 {
            continue;
        }
        let x = x / nx;
        let y = &y - &x * x.dot(&y);
        let ny = y.norm();
        if ny > 1e-3 {
            return (x, y / ny);
        }
    }
}

/// Compares the intrinsic sectional curvature of random tangent planes
/// with `c − ⟨AX,X⟩⟨AY,Y⟩ + ⟨AX,Y⟩²`, and checks `K ≥ c − n²H_1²`.
///
/// The bound's margins are the report's slacks (tolerance `bound_tol`) and
/// are taken only at nodes where `A` is semidefinite: the bound uses
/// `⟨AX,X⟩⟨AY,Y⟩ ≤ (Tr A)²`, which needs principal curvatures of one
/// sign. Other nodes are counted in `extra.indefinite_nodes`. The residual
/// test adds its own verdict (`residual_pass`) to `pass`.
pub fn gauss_residual(h: &Hypersurface, model: &SpacetimeModel, opts: &GaussOptions) -> Result<VerificationReport> {
    let n = h.n();
    if n < 2 {
        return Err(Error::Precondition("the Gauss equation needs n ≥ 2".into()));
    }
    let sd = shape_data(h)?;
    let c = h.c;
    let nn = (n * n) as f64;
    let per_node = h
        .nodes
        .par_iter()
        .enumerate()
        .map(|(i, node)| -> Option<Vec<[f64; 5]>> {
            let riem = intrinsic_curvature(h, &node.y).ok()?;
            let mut rng = stream(opts.seed, i as u64);
            let s = &sd.nodes[i];
            let a = &node.shape;
            let rows = (0..opts.planes_per_node)
                .map(|_| {
                    let (x, y) = random_orthonormal_pair(&mut rng, n);
                    let (xc, yc) = (node.frame_vector(&x), node.frame_vector(&y));
                    let k_fd = (riem.apply(&xc, &yc, &yc).transpose() * &node.metric * &xc)[(0, 0)];
                    let axx = (x.transpose() * a * &x)[(0, 0)];
                    let ayy = (y.transpose() * a * &y)[(0, 0)];
                    let axy = (x.transpose() * a * &y)[(0, 0)];
                    let k_gauss = c - axx * ayy + axy * axy;
                    let bound = c - nn * s.h[1] * s.h[1];
                    [k_fd, k_gauss, (k_fd - k_gauss).abs(), bound, k_gauss - bound]
                })
                .collect();
            Some(rows)
        })
        .collect::<Vec<_>>();

    let mut table =
        Table::new(&["node", "plane", "k_intrinsic", "k_gauss", "residual", "bound", "margin", "semidefinite"]);
    let mut slacks = Vec::new();
    let (mut kept, mut excluded, mut indefinite) = (0, 0, 0);
    let mut max_residual: f64 = 0.0;
    for (i, rows) in per_node.into_iter().enumerate() {
        let Some(rows) = rows else {
            excluded += 1;
            continue;
        };
        kept += 1;
        let semidefinite = sd.nodes[i].is_semidefinite(1e-12);
        if !semidefinite {
            indefinite += 1;
        }
        for (j, r) in rows.into_iter().enumerate() {
            max_residual = max_residual.max(r[2]);
            table.push(vec![i as f64, j as f64, r[0], r[1], r[2], r[3], r[4], semidefinite as u8 as f64]);
            if semidefinite {
                slacks.push((Argmin { sample: i, item: j, at: r[1] }, r[4]));
            }
        }
    }
    let mut report = VerificationReport::from_slacks(
        "gauss",
        model.descriptor(),
        None,
        kept,
        excluded,
        slacks,
        opts.bound_tol,
        table,
    )?;
    let residual_pass = max_residual <= opts.residual_tol;
    report.pass &= residual_pass;
    Ok(report
        .with_extra("max_residual", max_residual)
        .with_extra("residual_tol", opts.residual_tol)
        .with_extra("residual_pass", residual_pass)
        .with_extra("indefinite_nodes", indefinite)
        .with_extra("seed", opts.seed)
        .with_extra("hypersurface", &h.spec))
}
