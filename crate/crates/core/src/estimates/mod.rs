//! Curvature estimates for spacelike hypersurfaces in terms of the distance
//! from a vertex, checked on compact lattices where exact extrema of `u`
//! stand in for almost-maximizing sequences.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::comparison_ode::{f_c, f_c_inverse, CurvatureProfile};
use crate::error::{Error, Result};
use crate::hypersurface::{curvature_side_holds, SlopeFn};
use crate::hypersurface::{
    distance_restriction, ellipticity_check, lk_apply, newton_family, shape_data, DistanceField, Hypersurface,
    HypersurfaceSpec, NewtonFamily, ShapeData,
};
use crate::spacetime::{ModelDescriptor, SpacetimeModel};

/// Tolerance on nodewise variation of `H_k` for the rigidity check.
pub const CONSTANCY_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `inf H_k^{1/k} ≤ |h'/h(sup u)|` under `K ≤ G`.
    InfLe,
    /// `sup H_k^{1/k} ≥ h'/h(inf u)` under `K ≥ G`.
    SupGe,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorMode {
    /// Weights use `|h'/h(u)|` nodewise.
    SupSide,
    /// Weights use `h'/h(inf u)`.
    InfSide,
}

/// `w_j = (1 + ‖∇u‖²)^{−(k−1−j)/2} F^{k−1−j} c_{k−1}/c_j` for `j < k`.
pub fn proof_operator_weights(k: usize, c: &[f64], grad_norm: f64, big_f: f64) -> Vec<f64> {
    let w = (1.0 + grad_norm * grad_norm).sqrt();
    (0..k)
        .map(|j| {
            let e = (k - 1 - j) as i32;
            (big_f / w).powi(e) * c[k - 1] / c[j]
        })
        .collect()
}

/// `𝓛u = Σ_{j<k} w_j L_j u` at interior nodes. Needs `P_1…P_{k−1}`
/// positive definite.
pub fn proof_operator_eval(
    h: &Hypersurface,
    sd: &ShapeData,
    nf: &NewtonFamily,
    dist: &DistanceField,
    g: &CurvatureProfile,
    k: usize,
    mode: OperatorMode,
) -> Result<Vec<Option<f64>>> {
    if k == 0 || k > h.n() {
        return Err(Error::Contract(format!("the proof operator needs 1 ≤ k ≤ n, got {k}")));
    }
    if k >= 2 {
        let cert = ellipticity_check(sd, nf, k)?;
        if !cert.positive_definite {
            let (node, j, ev) = cert.witness.expect("failure has a witness");
            return Err(Error::Precondition(format!(
                "P_{j} is not positive definite at node {node} (eigenvalue {ev:e})"
            )));
        }
    }
    let (umin, umax) = dist.range();
    let slope = SlopeFn::new(g, umax)?;
    let inf_value = slope.eval(umin)?;
    let lj = (0..k).map(|j| lk_apply(h, nf, j, &dist.u, 1)).collect::<Result<Vec<_>>>()?;
    (0..h.len())
        .map(|i| {
            let big_f = match mode {
                OperatorMode::SupSide => slope.eval(dist.u[i])?.abs(),
                OperatorMode::InfSide => inf_value,
            };
            let w = proof_operator_weights(k, &sd.c, dist.grad_norm(i), big_f);
            Ok(lj.iter().zip(&w).map(|(l, wj)| l[i].map(|v| v * wj)).sum::<Option<f64>>())
        })
        .collect()
}

/// Exact extrema of `u` standing in for the almost-maximizing sequences.
#[derive(Clone, Debug, Serialize)]
pub struct ExtremumSurrogate {
    pub max_node: usize,
    pub min_node: usize,
    pub u_max: f64,
    pub u_min: f64,
    pub grad_at_max: f64,
    pub grad_at_min: f64,
    /// Whether the global extremum is attained (within rounding) away from
    /// the lattice boundary.
    pub interior_max: bool,
    pub interior_min: bool,
    pub operator_at_max: Option<f64>,
    pub operator_at_min: Option<f64>,
}

impl ExtremumSurrogate {
    pub fn locate(h: &Hypersurface, dist: &DistanceField, operator: Option<&[Option<f64>]>) -> Self {
        let (umin, umax) = dist.range();
        let slop = 1e-12 * umax.abs().max(1.0);
        let interior: Vec<usize> = (0..h.len()).filter(|&i| h.grid.is_interior(i, 1)).collect();
        let pick = |better: &dyn Fn(f64, f64) -> bool| {
            interior.iter().copied().fold(None, |best: Option<usize>, i| match best {
                Some(b) if !better(dist.u[i], dist.u[b]) => Some(b),
                _ => Some(i),
            })
        };
        let max_node = pick(&|a, b| a > b).unwrap_or(0);
        let min_node = pick(&|a, b| a < b).unwrap_or(0);
        let op_at = |i: usize| operator.and_then(|o| o[i]);
        ExtremumSurrogate {
            max_node,
            min_node,
            u_max: umax,
            u_min: umin,
            grad_at_max: dist.grad_norm(max_node),
            grad_at_min: dist.grad_norm(min_node),
            interior_max: !interior.is_empty() && dist.u[max_node] >= umax - slop,
            interior_min: !interior.is_empty() && dist.u[min_node] <= umin + slop,
            operator_at_max: op_at(max_node),
            operator_at_min: op_at(min_node),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EstimateReport {
    pub k: usize,
    pub direction: Direction,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub tol: f64,
    pub pass: bool,
    pub hypotheses_met: Vec<String>,
    pub surrogate: ExtremumSurrogate,
    pub model: ModelDescriptor,
    #[serde(rename = "G")]
    pub g: CurvatureProfile,
    pub hypersurface: HypersurfaceSpec,
    pub n_nodes: usize,
}

impl EstimateReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Fixed-width table with columns k, direction, lhs, rhs, slack,
    /// hypotheses.
    pub fn to_table(reports: &[EstimateReport]) -> String {
        let mut s = format!("{:>3}  {:<7}  {:>22}  {:>22}  {:>22}  hypotheses\n", "k", "dir", "lhs", "rhs", "slack");
        for r in reports {
            let dir = match r.direction {
                Direction::InfLe => "inf_le",
                Direction::SupGe => "sup_ge",
            };
            let _ = writeln!(
                s,
                "{:>3}  {:<7}  {:>22e}  {:>22e}  {:>22e}  {}",
                r.k,
                dir,
                r.lhs,
                r.rhs,
                r.slack,
                r.hypotheses_met.join("; ")
            );
        }
        s
    }

    /// Writes `<stem>.json` and `<stem>.txt`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("{stem}.json")), self.to_json() + "\n")?;
        std::fs::write(dir.join(format!("{stem}.txt")), Self::to_table(std::slice::from_ref(self)))?;
        Ok(())
    }
}

/// Hypotheses of the estimate in direction `dir`; failures are returned
/// as `Err` listing every unmet item.
fn gather_hypotheses(
    h: &Hypersurface,
    sd: &ShapeData,
    nf: &NewtonFamily,
    g: &CurvatureProfile,
    k: usize,
    dir: Direction,
    surrogate: &ExtremumSurrogate,
) -> Result<Vec<String>> {
    let c = h.c;
    let n = h.n();
    let (umin, umax) = (surrogate.u_min, surrogate.u_max);
    let mut met = Vec::new();
    let mut failed = Vec::new();
    let mut check = |ok: bool, label: String| if ok { met.push(label) } else { failed.push(label) };

    let le = dir == Direction::InfLe;
    check(
        curvature_side_holds(c, g, 0.0, umax, le),
        format!("K {} G (space form c = {c})", if le { "≤" } else { "≥" }),
    );
    let r0 = SlopeFn::new(g, umax)?.r0();
    check(umax < r0, format!("image in B⁺(p, r0), r0 = {r0}"));
    if c < 0.0 {
        check(umin < std::f64::consts::PI / (-c).sqrt(), "inf u < π/√(−c)".into());
    }
    let (hmin, _) = sd.h_range(k);
    match k {
        1 => {
            if le {
                check(curvature_side_holds(c, g, 0.0, umax, true), "Ric(∇r,∇r) ≥ −nG(r)".into());
            }
        }
        2 => {
            check(hmin > 0.0, "H_2 > 0".into());
            check(true, "sup H_1 < ∞ (compact grid)".into());
        }
        _ => {
            let cert = ellipticity_check(sd, nf, k)?;
            check(cert.elliptic_point_found, "elliptic point".into());
            check(hmin > 0.0, format!("H_{k} > 0"));
        }
    }
    if k >= 2 && k <= n {
        let cert = ellipticity_check(sd, nf, k)?;
        check(cert.positive_definite, format!("P_1..P_{} positive definite", k - 1));
    }
    if le {
        check(surrogate.interior_max, "interior maximum of u".into());
    } else {
        check(surrogate.interior_min, "interior minimum of u".into());
    }
    if failed.is_empty() {
        Ok(met)
    } else {
        Err(Error::Precondition(format!("unmet: {}", failed.join("; "))))
    }
}

/// Evaluates one estimate inequality over the interior nodes.
pub fn check_estimate(
    h: &Hypersurface,
    model: &SpacetimeModel,
    p: &DVector<f64>,
    g: &CurvatureProfile,
    k: usize,
    direction: Direction,
    tol: f64,
) -> Result<EstimateReport> {
    if k == 0 || k > h.n() {
        return Err(Error::Contract(format!("estimates need 1 ≤ k ≤ n, got {k}")));
    }
    let sd = shape_data(h)?;
    let nf = newton_family(&sd)?;
    let dist = distance_restriction(h, model, p)?;
    let mode = match direction {
        Direction::InfLe => OperatorMode::SupSide,
        Direction::SupGe => OperatorMode::InfSide,
    };
    let (_, umax) = dist.range();
    let operator = if umax < SlopeFn::new(g, umax)?.r0() {
        proof_operator_eval(h, &sd, &nf, &dist, g, k, mode).ok()
    } else {
        None
    };
    let surrogate = ExtremumSurrogate::locate(h, &dist, operator.as_deref());
    let hypotheses_met = gather_hypotheses(h, &sd, &nf, g, k, direction, &surrogate)?;

    let roots: Vec<f64> = (0..h.len())
        .filter(|&i| h.grid.is_interior(i, 1))
        .map(|i| sd.nodes[i].root(k).ok_or_else(|| Error::Precondition(format!("H_{k} ≤ 0 at node {i}"))))
        .collect::<Result<_>>()?;
    let slope = SlopeFn::new(g, umax)?;
    let (lhs, rhs, slack) = match direction {
        Direction::InfLe => {
            let lhs = roots.iter().copied().fold(f64::INFINITY, f64::min);
            let rhs = slope.eval(surrogate.u_max)?.abs();
            (lhs, rhs, rhs - lhs)
        }
        Direction::SupGe => {
            let lhs = roots.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let rhs = slope.eval(surrogate.u_min)?;
            (lhs, rhs, lhs - rhs)
        }
    };
    Ok(EstimateReport {
        k,
        direction,
        lhs,
        rhs,
        slack,
        tol,
        pass: slack >= -tol,
        hypotheses_met,
        surrogate,
        model: model.descriptor(),
        g: g.clone(),
        hypersurface: h.spec.clone(),
        n_nodes: h.len(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BernsteinVerdict {
    pub k: usize,
    pub c: f64,
    /// Mean of `H_k` over the nodes, and its nodewise variation.
    pub h_k: f64,
    pub variation: f64,
    /// `H_k^{1/k}`.
    pub value: f64,
    /// `f_c⁻¹(H_k^{1/k})`: the radius of the only admissible level set.
    pub rho: f64,
    pub band: [f64; 2],
    pub band_width: f64,
    pub u_min: f64,
    pub u_max: f64,
    pub inequalities_hold: bool,
    pub level_set: bool,
    pub hypotheses_met: Vec<String>,
}

/// Squeeze `f_c(sup u) ≥ H_k^{1/k} ≥ f_c(inf u)` and, since `f_c`
/// decreases, `inf u ≥ f_c⁻¹(H_k^{1/k}) ≥ sup u`. At tolerance `tol` the
/// image must lie in `[f_c⁻¹(H + tol), f_c⁻¹(H − tol)]`.
pub fn bernstein_check(
    h: &Hypersurface,
    model: &SpacetimeModel,
    p: &DVector<f64>,
    k: usize,
    tol: f64,
) -> Result<BernsteinVerdict> {
    if k == 0 || k > h.n() {
        return Err(Error::Contract(format!("rigidity needs 1 ≤ k ≤ n, got {k}")));
    }
    let c = h.c;
    let sd = shape_data(h)?;
    let nf = newton_family(&sd)?;
    let (hmin, hmax) = sd.h_range(k);
    let variation = hmax - hmin;
    if variation > CONSTANCY_TOL * hmax.abs().max(1.0) {
        return Err(Error::Precondition(format!("H_{k} is not constant (variation {variation:e})")));
    }
    let mut met = vec![format!("H_{k} constant")];
    if !(hmin > 0.0) {
        return Err(Error::Precondition(format!("H_{k} must be positive")));
    }
    met.push(format!("H_{k} > 0"));
    if k >= 3 {
        if !ellipticity_check(&sd, &nf, k)?.elliptic_point_found {
            return Err(Error::Precondition("no elliptic point".into()));
        }
        met.push("elliptic point".into());
    }
    let dist = distance_restriction(h, model, p)?;
    let (umin, umax) = dist.range();
    let h_k = sd.nodes.iter().map(|s| s.h[k]).sum::<f64>() / sd.nodes.len() as f64;
    let value = h_k.powf(1.0 / k as f64);
    let rho = f_c_inverse(c, value)?;
    let band = [f_c_inverse(c, value + tol)?, f_c_inverse(c, value - tol)?];
    let inequalities_hold = f_c(c, umax)? >= value - tol && value + tol >= f_c(c, umin)?;
    let level_set = inequalities_hold && umin >= band[0] && umax <= band[1];
    Ok(BernsteinVerdict {
        k,
        c,
        h_k,
        variation,
        value,
        rho,
        band,
        band_width: band[1] - band[0],
        u_min: umin,
        u_max: umax,
        inequalities_hold,
        level_set,
        hypotheses_met: met,
    })
}
