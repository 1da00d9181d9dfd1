use nalgebra::DVector;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{geodesic_coefficients, hess_r, HessMethod, RadialData};
use crate::comparison_ode::{slope, solve_h, CurvatureProfile};
use crate::error::{Error, Result};
use crate::report::{Argmin, Table, VerificationReport};
use crate::rng::stream;
use crate::spacetime::{SpacetimeModel, TangentVector, TimelikePlane};

/// Samples within this distance of `0` or of `r0` are excluded.
pub const EXCLUSION_BAND: f64 = 1e-3;

const H_STEP: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundSide {
    /// Sectional curvature bounded above by `G`: `Hess r ≥ −(h'/h)⟨,⟩`.
    #[serde(rename = "upper_G")]
    UpperG,
    /// Sectional curvature bounded below by `G`: `Hess r ≤ −(h'/h)⟨,⟩`.
    #[serde(rename = "lower_G")]
    LowerG,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadialSampling {
    pub count: usize,
    pub seed: u64,
    pub r_range: [f64; 2],
    pub planes_per_point: usize,
    /// Bound on `|w|` for the initial direction `(e₀ + w)/√(1 − |w|²)`.
    pub max_rapidity: f64,
    pub method: HessMethod,
}

impl Default for RadialSampling {
    fn default() -> Self {
        RadialSampling {
            count: 100,
            seed: 0,
            r_range: [0.2, 2.0],
            planes_per_point: 8,
            max_rapidity: 0.6,
            method: HessMethod::FiniteDifference,
        }
    }
}

/// Draws `q = exp_p(r u)` with `r` uniform in `r_range` and `u` a future
/// unit timelike vector of bounded rapidity relative to the coordinate
/// frame at `p`.
pub fn sample_chronological_point(
    model: &SpacetimeModel,
    p: &DVector<f64>,
    r_range: [f64; 2],
    max_rapidity: f64,
    rng: &mut ChaCha8Rng,
) -> Result<DVector<f64>> {
    let (Some(c), Some(chart)) = (model.space_form_curvature(), model.chart()) else {
        return Err(Error::Contract("radial sampling needs a space form".into()));
    };
    let frame = model.orthonormal_frame(p, None)?;
    let n = model.n();
    let w: Vec<f64> = loop {
        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0) * max_rapidity).collect();
        if w.iter().map(|a| a * a).sum::<f64>() < max_rapidity * max_rapidity {
            break w;
        }
    };
    let gamma = 1.0 / (1.0 - w.iter().map(|a| a * a).sum::<f64>()).sqrt();
    let mut u = frame[0].clone();
    for (e, wi) in frame[1..].iter().zip(&w) {
        u += e * *wi;
    }
    u *= gamma;
    let r = rng.gen_range(r_range[0]..=r_range[1]);
    let (cc, ss, _, _) = geodesic_coefficients(c, r);
    let big = chart.embed(p) * cc + chart.push_forward(p, &u) * ss;
    chart
        .chart_point(&big)
        .filter(|q| chart.contains(q))
        .ok_or_else(|| Error::Domain(format!("sample at r = {r} leaves the chart")))
}

fn random_transverse(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    loop {
        let x = DVector::from_fn(n + 1, |i, _| if i == 0 { 0.0 } else { rng.gen_range(-1.0..1.0) });
        let norm = x.norm();
        if norm > 1e-3 {
            return x / norm;
        }
    }
}

enum Outcome {
    Excluded,
    Kept { data: Box<RadialData>, rows: Vec<Vec<f64>>, slacks: Vec<(usize, f64)> },
}

struct Diagnostics {
    eikonal: f64,
    nullity: f64,
    asymmetry: f64,
}

fn diagnostics(model: &SpacetimeModel, outcomes: &[Outcome]) -> Result<Diagnostics> {
    let mut d = Diagnostics { eikonal: 0.0, nullity: 0.0, asymmetry: 0.0 };
    for o in outcomes {
        if let Outcome::Kept { data, .. } = o {
            d.eikonal = d.eikonal.max(data.eikonal_defect(model));
            d.nullity = d.nullity.max(data.radial_nullity()?);
            d.asymmetry = d.asymmetry.max(data.asymmetry()?);
        }
    }
    Ok(d)
}

fn assemble(
    experiment: &str,
    model: &SpacetimeModel,
    g: &CurvatureProfile,
    sampling: &RadialSampling,
    outcomes: Vec<Outcome>,
    headers: &[&str],
    tol: f64,
) -> Result<VerificationReport> {
    let diag = diagnostics(model, &outcomes)?;
    let mut table = Table::new(headers);
    let mut slacks = Vec::new();
    let (mut kept, mut excluded) = (0, 0);
    for (i, o) in outcomes.into_iter().enumerate() {
        match o {
            Outcome::Excluded => excluded += 1,
            Outcome::Kept { data, rows, slacks: s } => {
                kept += 1;
                rows.into_iter().for_each(|r| table.push(r));
                slacks.extend(s.into_iter().map(|(item, v)| (Argmin { sample: i, item, at: data.r }, v)));
            }
        }
    }
    Ok(VerificationReport::from_slacks(
        experiment,
        model.descriptor(),
        Some(g.clone()),
        kept,
        excluded,
        slacks,
        tol,
        table,
    )?
    .with_extra("method", sampling.method)
    .with_extra("seed", sampling.seed)
    .with_extra("max_eikonal_defect", diag.eikonal)
    .with_extra("max_radial_nullity", diag.nullity)
    .with_extra("max_asymmetry", diag.asymmetry))
}

fn admissible(r: f64, r0: f64) -> bool {
    r > EXCLUSION_BAND && r < r0 - EXCLUSION_BAND
}

/// For every sampled `q` and unit `X ⊥ ∇̄r`, the margin
/// `Hess r(X, X) + (h'/h)(r)`. On the `UpperG` side margins must be
/// `≥ −tol`; on `LowerG` they must be `≤ tol`.
///
/// The curvature hypothesis is checked on each sampled plane
/// `span(∇̄r, X)`; a violation is a precondition error.
pub fn verify_hessian_comparison(
    model: &SpacetimeModel,
    p: &DVector<f64>,
    g: &CurvatureProfile,
    sampling: &RadialSampling,
    side: BoundSide,
    tol: f64,
) -> Result<VerificationReport> {
    let sol = solve_h(g, sampling.r_range[1] + 10.0 * H_STEP, H_STEP)?;
    let r0 = sol.r0_or_inf();
    let n = model.n();
    let outcomes = (0..sampling.count)
        .into_par_iter()
        .map(|i| -> Result<Outcome> {
            let mut rng = stream(sampling.seed, i as u64);
            let q = sample_chronological_point(model, p, sampling.r_range, sampling.max_rapidity, &mut rng)?;
            let data = hess_r(model, p, &q, sampling.method)?;
            if !admissible(data.r, r0) {
                return Ok(Outcome::Excluded);
            }
            let bound = -slope(&sol, data.r)?;
            let gr = g.try_value(data.r)?;
            let mut rows = Vec::new();
            let mut slacks = Vec::new();
            for j in 0..sampling.planes_per_point {
                let x = random_transverse(&mut rng, n);
                let plane = TimelikePlane { base: q.clone(), v: data.frame[0].clone(), x: data.frame_vector(&x) };
                let k = model.sectional_timelike(&plane)?;
                let hyp_slack = 1e-9 * gr.abs().max(1.0);
                let ok = match side {
                    BoundSide::UpperG => k <= gr + hyp_slack,
                    BoundSide::LowerG => k >= gr - hyp_slack,
                };
                if !ok {
                    return Err(Error::Precondition(format!(
                        "sectional curvature {k} vs G(r) = {gr} at sample {i} violates the {side:?} hypothesis"
                    )));
                }
                let hxx = data.hess_form(&x)?;
                let margin = hxx - bound;
                let slack = match side {
                    BoundSide::UpperG => margin,
                    BoundSide::LowerG => -margin,
                };
                rows.push(vec![i as f64, j as f64, data.r, hxx, bound, margin, slack]);
                slacks.push((j, slack));
            }
            Ok(Outcome::Kept { data: Box::new(data), rows, slacks })
        })
        .collect::<Result<Vec<_>>>()?;
    let name = match side {
        BoundSide::UpperG => "radial-hessian-upper",
        BoundSide::LowerG => "radial-hessian-lower",
    };
    Ok(assemble(
        name,
        model,
        g,
        sampling,
        outcomes,
        &["sample", "plane", "r", "hess_xx", "bound", "margin", "slack"],
        tol,
    )?
    .with_extra("side", side))
}

/// For every sampled `q`, the margin `Δ̄r + n(h'/h)(r)`, which must be
/// `≥ −tol` when `Ric(∇̄r, ∇̄r) ≥ −nG(r)`.
pub fn verify_laplacian_comparison(
    model: &SpacetimeModel,
    p: &DVector<f64>,
    g: &CurvatureProfile,
    sampling: &RadialSampling,
    tol: f64,
) -> Result<VerificationReport> {
    let sol = solve_h(g, sampling.r_range[1] + 10.0 * H_STEP, H_STEP)?;
    let r0 = sol.r0_or_inf();
    let n = model.n() as f64;
    let outcomes = (0..sampling.count)
        .into_par_iter()
        .map(|i| -> Result<Outcome> {
            let mut rng = stream(sampling.seed, i as u64);
            let q = sample_chronological_point(model, p, sampling.r_range, sampling.max_rapidity, &mut rng)?;
            let data = hess_r(model, p, &q, sampling.method)?;
            if !admissible(data.r, r0) {
                return Ok(Outcome::Excluded);
            }
            let gr = g.try_value(data.r)?;
            let ric = model.ricci_timelike(&TangentVector::new(q.clone(), data.grad.clone()))?;
            if ric < -n * gr - 1e-9 * (n * gr).abs().max(1.0) {
                return Err(Error::Precondition(format!("Ric(∇r,∇r) = {ric} < −nG(r) = {} at sample {i}", -n * gr)));
            }
            let lap = data.laplacian.expect("set by hess_r");
            let bound = -n * slope(&sol, data.r)?;
            let margin = lap - bound;
            Ok(Outcome::Kept {
                rows: vec![vec![i as f64, data.r, ric, lap, bound, margin]],
                data: Box::new(data),
                slacks: vec![(0, margin)],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    assemble(
        "radial-laplacian",
        model,
        g,
        sampling,
        outcomes,
        &["sample", "r", "ricci", "laplacian", "bound", "margin"],
        tol,
    )
}
