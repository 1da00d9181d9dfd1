use nalgebra::DMatrix;
use serde::Serialize;

use super::{Hypersurface, FRAME_TOL};
use crate::error::{Error, Result};

/// Relative tolerance of the Newton trace identities.
pub const ALGEBRA_TOL: f64 = 1e-8;

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Curvature data at one node. `s` and `h` are padded with zeros up to
/// index `n + 2`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NodeShape {
    /// Principal curvatures, ascending.
    pub principal: Vec<f64>,
    pub s: Vec<f64>,
    pub h: Vec<f64>,
}

impl NodeShape {
    pub fn of(a: &DMatrix<f64>) -> Self {
        let n = a.nrows();
        let sym = (a + a.transpose()) * 0.5;
        let mut principal: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
        principal.sort_by(f64::total_cmp);
        let mut s = vec![0.0; n + 3];
        s[0] = 1.0;
        for (m, &lam) in principal.iter().enumerate() {
            for k in (1..=m + 1).rev() {
                s[k] += lam * s[k - 1];
            }
        }
        let h = (0..n + 3).map(|k| if k > n { 0.0 } else { sign(k) * s[k] / binomial(n, k) }).collect();
        NodeShape { principal, s, h }
    }

    /// `A` negative definite.
    pub fn is_elliptic(&self) -> bool {
        self.principal.last().is_some_and(|&k| k < 0.0)
    }

    /// All principal curvatures of one sign (zero allowed).
    pub fn is_semidefinite(&self, tol: f64) -> bool {
        self.principal.iter().all(|&k| k <= tol) || self.principal.iter().all(|&k| k >= -tol)
    }

    /// `H_k^{1/k}` for `H_k > 0` (any sign when `k = 1`).
    pub fn root(&self, k: usize) -> Option<f64> {
        let hk = self.h[k];
        if k == 1 {
            Some(hk)
        } else if hk > 0.0 {
            Some(hk.powf(1.0 / k as f64))
        } else {
            None
        }
    }
}

fn sign(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

#[derive(Clone, Debug)]
pub struct ShapeData {
    pub n: usize,
    pub shape: Vec<DMatrix<f64>>,
    pub nodes: Vec<NodeShape>,
    /// `c_k = (n − k)·C(n, k)` for `k = 0…n`.
    pub c: Vec<f64>,
}

impl ShapeData {
    /// From symmetric matrices in orthonormal frames.
    pub fn from_matrices(shape: Vec<DMatrix<f64>>) -> Result<Self> {
        let n = shape.first().map_or(0, |a| a.nrows());
        for (i, a) in shape.iter().enumerate() {
            let asymmetry = (a - a.transpose()).amax();
            if asymmetry > FRAME_TOL {
                return Err(Error::Frame { node: i, asymmetry });
            }
        }
        let nodes = shape.iter().map(NodeShape::of).collect();
        let c = (0..=n).map(|k| (n - k) as f64 * binomial(n, k)).collect();
        Ok(ShapeData { n, shape, nodes, c })
    }

    pub fn h_range(&self, k: usize) -> (f64, f64) {
        self.nodes.iter().map(|s| s.h[k]).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }
}

pub fn shape_data(h: &Hypersurface) -> Result<ShapeData> {
    ShapeData::from_matrices(h.nodes.iter().map(|nd| nd.shape.clone()).collect())
}

#[derive(Clone, Debug)]
pub struct NewtonFamily {
    /// `p[node][k]` for `k = 0…n−1`.
    pub p: Vec<Vec<DMatrix<f64>>>,
    /// Largest relative residual of each trace identity over nodes and `k`.
    pub max_residual: [f64; 3],
    /// Largest `‖P_k A − A P_k‖` and `‖P_k − P_kᵀ‖`.
    pub max_commutator: f64,
}

/// The three trace residuals at one node, relative to the scale
/// `n(1 + ρ)^{n+2}` with `ρ` the spectral radius of `A`.
pub fn trace_residuals(a: &DMatrix<f64>, s: &NodeShape, p: &[DMatrix<f64>], c: &[f64]) -> Vec<[f64; 3]> {
    let n = a.nrows();
    let rho = s.principal.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let scale = n as f64 * (1.0 + rho).powi(n as i32 + 2);
    let h = &s.h;
    let a2 = a * a;
    p.iter()
        .enumerate()
        .map(|(k, pk)| {
            let t0 = pk.trace() - c[k] * h[k];
            let t1 = (a * pk).trace() + c[k] * h[k + 1];
            let t2 = (&a2 * pk).trace()
                - binomial(n, k + 1) * (n as f64 * h[1] * h[k + 1] - (n as f64 - k as f64 - 1.0) * h[k + 2]);
            [t0.abs() / scale, t1.abs() / scale, t2.abs() / scale]
        })
        .collect()
}

/// `P_0, …, P_{n−1}` of `A` by the recursion, without checks.
pub fn newton_matrices(a: &DMatrix<f64>, s: &NodeShape) -> Vec<DMatrix<f64>> {
    let n = a.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let mut out = vec![id.clone()];
    for k in 1..n {
        let next = &id * (binomial(n, k) * s.h[k]) + a * &out[k - 1];
        out.push(next);
    }
    out
}

/// `P_0 = I`, `P_k = C(n,k)H_k·I + A P_{k−1}`, checked against the trace
/// identities `Tr P_k = c_k H_k`, `Tr(A P_k) = −c_k H_{k+1}` and
/// `Tr(A² P_k) = C(n,k+1)(nH_1H_{k+1} − (n−k−1)H_{k+2})`.
pub fn newton_family(sd: &ShapeData) -> Result<NewtonFamily> {
    let mut p = Vec::with_capacity(sd.nodes.len());
    let mut max_residual = [0.0f64; 3];
    let mut max_commutator = 0.0f64;
    for (a, s) in sd.shape.iter().zip(&sd.nodes) {
        let pk = newton_matrices(a, s);
        for (k, r) in trace_residuals(a, s, &pk, &sd.c).into_iter().enumerate() {
            for (i, v) in r.into_iter().enumerate() {
                if !(v <= ALGEBRA_TOL) {
                    return Err(Error::Algebra { identity: i + 1, k, residual: v });
                }
                max_residual[i] = max_residual[i].max(v);
            }
        }
        for m in &pk {
            max_commutator = max_commutator.max((m * a - a * m).amax()).max((m - m.transpose()).amax());
        }
        p.push(pk);
    }
    Ok(NewtonFamily { p, max_residual, max_commutator })
}

#[derive(Clone, Debug, Serialize)]
pub struct EllipticityCertificate {
    pub k: usize,
    /// `P_j` positive definite for all `1 ≤ j ≤ k−1`, per node.
    pub node_positive_definite: Vec<bool>,
    pub positive_definite: bool,
    /// `(node, j, smallest eigenvalue)` of the first failure.
    pub witness: Option<(usize, usize, f64)>,
    pub min_eigenvalue: f64,
    pub elliptic_point_found: bool,
    pub elliptic_nodes: usize,
    pub hypotheses_met: Vec<String>,
}

pub fn ellipticity_check(sd: &ShapeData, nf: &NewtonFamily, k: usize) -> Result<EllipticityCertificate> {
    if k == 0 || k > sd.n {
        return Err(Error::Contract(format!("ellipticity needs 1 ≤ k ≤ n, got {k}")));
    }
    let mut node_pd = Vec::with_capacity(nf.p.len());
    let mut witness = None;
    let mut min_eigenvalue = f64::INFINITY;
    for (i, pk) in nf.p.iter().enumerate() {
        let mut ok = true;
        for (j, m) in pk.iter().enumerate().take(k).skip(1) {
            let ev = m.clone().symmetric_eigenvalues().min();
            min_eigenvalue = min_eigenvalue.min(ev);
            if !(ev > 0.0) {
                ok = false;
                if witness.is_none() {
                    witness = Some((i, j, ev));
                }
            }
        }
        node_pd.push(ok);
    }
    let elliptic_nodes = sd.nodes.iter().filter(|s| s.is_elliptic()).count();
    let positive_definite = node_pd.iter().all(|&b| b);
    let hk_positive = sd.nodes.iter().all(|s| s.h[k] > 0.0);
    let mut hypotheses_met = Vec::new();
    if sd.nodes.iter().all(|s| s.h[2] > 0.0) && sd.n >= 2 {
        hypotheses_met.push("H_2 > 0".to_string());
    }
    if elliptic_nodes > 0 {
        hypotheses_met.push("elliptic point".to_string());
    }
    if hk_positive {
        hypotheses_met.push(format!("H_{k} > 0"));
    }
    if positive_definite && k >= 2 {
        hypotheses_met.push(format!("P_1..P_{} positive definite", k - 1));
    }
    Ok(EllipticityCertificate {
        k,
        node_positive_definite: node_pd,
        positive_definite,
        witness,
        min_eigenvalue,
        elliptic_point_found: elliptic_nodes > 0,
        elliptic_nodes,
        hypotheses_met,
    })
}
