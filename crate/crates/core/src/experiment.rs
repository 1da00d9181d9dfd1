//! Configuration-driven experiment runner.
//!
//! An [`ExperimentConfig`] names one experiment and its inputs; [`run`]
//! dispatches it and returns one [`VerificationReport`] per artifact, and
//! [`emit`] writes them. Exit codes: 0 when every report passes, 1 on a
//! verified violation, and [`Error::exit_code`] for rejected inputs (2) or
//! numerical and I/O failures (3).

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::comparison_ode::{f_c, r0_constant, slope, solve_h, CurvatureProfile, ProfileDescriptor};
use crate::error::{Error, Result};
use crate::estimates::{bernstein_check, check_estimate, Direction, EstimateReport};
use crate::hypersurface::{
    construct_hypersurface, gauss_residual, newton_matrices, trace_residuals, verify_prop_lk, GaussOptions,
    Hypersurface, HypersurfaceSpec, NodeShape, PropSide, ShapeData,
};
use crate::radial_geometry::{
    bochner_residual, lorentz_distance, sample_chronological_point, verify_hessian_comparison,
    verify_laplacian_comparison, BoundSide, RadialSampling,
};
use crate::report::{Argmin, Table, VerificationReport};
use crate::rng::stream;
use crate::spacetime::{ModelDescriptor, SpacetimeModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Ode,
    RadialHessian,
    RadialLaplacian,
    Bochner,
    HypersurfaceProps,
    NewtonIdentities,
    Estimates,
    SphereSharpness,
    Bernstein,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 9] = [
        ExperimentKind::Ode,
        ExperimentKind::RadialHessian,
        ExperimentKind::RadialLaplacian,
        ExperimentKind::Bochner,
        ExperimentKind::HypersurfaceProps,
        ExperimentKind::NewtonIdentities,
        ExperimentKind::Estimates,
        ExperimentKind::SphereSharpness,
        ExperimentKind::Bernstein,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Ode => "ode",
            ExperimentKind::RadialHessian => "radial-hessian",
            ExperimentKind::RadialLaplacian => "radial-laplacian",
            ExperimentKind::Bochner => "bochner",
            ExperimentKind::HypersurfaceProps => "hypersurface-props",
            ExperimentKind::NewtonIdentities => "newton-identities",
            ExperimentKind::Estimates => "estimates",
            ExperimentKind::SphereSharpness => "sphere-sharpness",
            ExperimentKind::Bernstein => "bernstein",
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            ExperimentKind::Ode => "solve h'' = G h; closed-form error (constant G) or slope bracket",
            ExperimentKind::RadialHessian => "Hessian comparison for the distance from a vertex",
            ExperimentKind::RadialLaplacian => "Laplacian comparison for the distance from a vertex",
            ExperimentKind::Bochner => "Bochner identity residual along radial geodesics",
            ExperimentKind::HypersurfaceProps => "L_k inequalities for u = r|Σ and the Gauss equation",
            ExperimentKind::NewtonIdentities => "trace identities of Newton tensors of random symmetric matrices",
            ExperimentKind::Estimates => "higher-order mean curvature estimates at extrema of u",
            ExperimentKind::SphereSharpness => "equality of the estimates on model spheres",
            ExperimentKind::Bernstein => "rigidity: constant H_k forces a level set of r",
        }
    }
}

/// A scalar or a list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    #[default]
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub format: OutputFormat,
    pub path: PathBuf,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { format: OutputFormat::Both, path: PathBuf::from("reports") }
    }
}

/// `margin` overrides the experiment's main tolerance; `residual` the
/// Gauss residual tolerance.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub margin: Option<f64>,
    pub residual: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SideChoice {
    Lower,
    Upper,
    Both,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelDescriptor>,
    /// Kept in wire form so that profile validation errors keep their kind.
    #[serde(rename = "G", default, skip_serializing_if = "Option::is_none")]
    pub g: Option<ProfileDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hypersurface: Option<HypersurfaceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling: Option<RadialSampling>,
    /// Vertex `p` in chart coordinates; the chart origin by default, the
    /// sphere centre for sphere hypersurfaces.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertex: Option<Vec<f64>>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputSpec,
    /// Sphere radius (or radii) for `sphere-sharpness` and `bernstein`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<OneOrMany<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<OneOrMany<usize>>,
    /// Curvature hypothesis of the radial Hessian comparison.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<BoundSide>,
    /// Side of the `L_k` inequalities.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<SideChoice>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
    /// Largest matrix size for `newton-identities`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gauss: Option<GaussOptions>,
}

/// Command-line overrides.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overlay {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        ExperimentConfig {
            experiment,
            model: None,
            g: None,
            hypersurface: None,
            sampling: None,
            vertex: None,
            tolerances: Tolerances::default(),
            output: OutputSpec::default(),
            t: None,
            t_max: None,
            step: None,
            k: None,
            bound: None,
            side: None,
            direction: None,
            n: None,
            gauss: None,
        }
    }

    /// Parses JSON; malformed input and unknown keys are configuration
    /// errors.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// The seed goes to the sampler, the Gauss plane draws and
    /// `random-hyperboloid` graphs that do not fix their own.
    pub fn apply(&mut self, overlay: &Overlay) {
        if let Some(seed) = overlay.seed {
            let kind = self.experiment;
            self.sampling.get_or_insert_with(|| default_sampling(kind)).seed = seed;
            self.gauss.get_or_insert_with(GaussOptions::default).seed = seed;
            if let Some(HypersurfaceSpec::Graph { phi, params, .. }) = &mut self.hypersurface {
                if phi.ends_with("random-hyperboloid") {
                    params.entry("seed".into()).or_insert(seed as f64);
                }
            }
        }
        if let Some(out) = &overlay.out {
            self.output.path = out.clone();
        }
        if let Some(tol) = overlay.tol {
            self.tolerances.margin = Some(tol);
        }
    }

    fn model(&self) -> Result<(ModelDescriptor, SpacetimeModel)> {
        let d = self
            .model
            .clone()
            .ok_or_else(|| Error::Config(format!("experiment '{}' needs 'model'", self.experiment.name())))?;
        let m = d.build()?;
        Ok((d, m))
    }

    fn profile(&self) -> Result<Option<CurvatureProfile>> {
        self.g.clone().map(CurvatureProfile::try_from).transpose()
    }

    /// `G`, defaulting to the model's constant curvature.
    fn profile_or_model(&self, model: &SpacetimeModel) -> Result<CurvatureProfile> {
        match self.profile()? {
            Some(g) => Ok(g),
            None => model
                .space_form_curvature()
                .map(CurvatureProfile::constant)
                .ok_or_else(|| Error::Config("'G' is required off space forms".into())),
        }
    }

    fn vertex_or(&self, default: DVector<f64>) -> Result<DVector<f64>> {
        match &self.vertex {
            None => Ok(default),
            Some(v) if v.len() == default.len() => Ok(DVector::from_column_slice(v)),
            Some(v) => Err(Error::Config(format!("vertex needs {} coordinates, got {}", default.len(), v.len()))),
        }
    }

    fn tol(&self, default: f64) -> f64 {
        self.tolerances.margin.unwrap_or(default)
    }

    fn sampling(&self) -> RadialSampling {
        self.sampling.clone().unwrap_or_else(|| default_sampling(self.experiment))
    }

    fn ks(&self, default: Vec<usize>) -> Vec<usize> {
        self.k.as_ref().map_or(default, OneOrMany::to_vec)
    }

    fn hypersurface(&self, model: &SpacetimeModel) -> Result<Hypersurface> {
        let spec = self
            .hypersurface
            .as_ref()
            .ok_or_else(|| Error::Config(format!("experiment '{}' needs 'hypersurface'", self.experiment.name())))?;
        construct_hypersurface(model, spec)
    }
}

fn default_sampling(kind: ExperimentKind) -> RadialSampling {
    let count = if kind == ExperimentKind::NewtonIdentities { 1000 } else { 100 };
    RadialSampling { count, ..RadialSampling::default() }
}

/// One report and the file stem it is written under. `text` is an
/// optional human-readable companion (`<stem>.txt`).
#[derive(Clone, Debug)]
pub struct Artifact {
    pub stem: String,
    pub report: VerificationReport,
    pub text: Option<String>,
}

impl Artifact {
    fn new(stem: impl Into<String>, report: VerificationReport) -> Self {
        Artifact { stem: stem.into(), report, text: None }
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub experiment: ExperimentKind,
    pub artifacts: Vec<Artifact>,
}

impl RunOutcome {
    pub fn pass(&self) -> bool {
        self.artifacts.iter().all(|a| a.report.pass)
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass() {
            0
        } else {
            1
        }
    }

    /// One line per artifact: verdict, stem, smallest slack and location.
    pub fn summary(&self) -> String {
        self.artifacts
            .iter()
            .map(|a| {
                let r = &a.report;
                let at =
                    r.argmin.map_or(String::new(), |m| format!(" at sample {} item {} ({})", m.sample, m.item, m.at));
                format!(
                    "{} {}: min_margin {:e} (tol {:e}){at}\n",
                    if r.pass { "PASS" } else { "FAIL" },
                    a.stem,
                    r.min_margin,
                    r.tol
                )
            })
            .collect()
    }
}

/// Runs the configured experiment.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let artifacts = match cfg.experiment {
        ExperimentKind::Ode => vec![run_ode(cfg)?],
        ExperimentKind::RadialHessian | ExperimentKind::RadialLaplacian => vec![run_radial(cfg)?],
        ExperimentKind::Bochner => vec![run_bochner(cfg)?],
        ExperimentKind::HypersurfaceProps => run_props(cfg)?,
        ExperimentKind::NewtonIdentities => vec![run_newton(cfg)?],
        ExperimentKind::Estimates => vec![run_estimates(cfg)?],
        ExperimentKind::SphereSharpness => vec![run_sharpness(cfg)?],
        ExperimentKind::Bernstein => vec![run_bernstein(cfg)?],
    };
    Ok(RunOutcome { experiment: cfg.experiment, artifacts })
}

/// Writes `<stem>.json` and/or `<stem>.csv` into `dir`, returning the
/// paths written.
pub fn emit_report(report: &VerificationReport, stem: &str, format: OutputFormat, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    if format != OutputFormat::Csv {
        let path = dir.join(format!("{stem}.json"));
        std::fs::write(&path, report.to_json() + "\n")?;
        written.push(path);
    }
    if format != OutputFormat::Json {
        let path = dir.join(format!("{stem}.csv"));
        report.table.write_csv(std::fs::File::create(&path)?)?;
        written.push(path);
    }
    Ok(written)
}

/// Writes every artifact of `outcome` under `output.path`.
pub fn emit(outcome: &RunOutcome, output: &OutputSpec) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for a in &outcome.artifacts {
        written.extend(emit_report(&a.report, &a.stem, output.format, &output.path)?);
        if let Some(text) = &a.text {
            let path = output.path.join(format!("{}.txt", a.stem));
            std::fs::write(&path, text)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// `h` for constant curvature `c`.
fn h_closed(c: f64, t: f64) -> f64 {
    if c > 0.0 {
        (c.sqrt() * t).sinh() / c.sqrt()
    } else if c < 0.0 {
        ((-c).sqrt() * t).sin() / (-c).sqrt()
    } else {
        t
    }
}

fn run_ode(cfg: &ExperimentConfig) -> Result<Artifact> {
    let g = cfg.profile()?.ok_or_else(|| Error::Config("experiment 'ode' needs 'G'".into()))?;
    let t_max = cfg.t_max.unwrap_or(4.0);
    let sol = solve_h(&g, t_max, cfg.step.unwrap_or(1e-3))?;
    let model = cfg.model.clone().unwrap_or_else(|| ModelDescriptor::space_form(g.value(0.0), 1));
    let grid = sol.grid;

    if let Some(c) = g.as_constant() {
        // Closed form on every node, plus the first zero.
        let mut table = Table::new(&["t", "h", "h_prime", "reference", "error"]);
        let mut slacks = Vec::with_capacity(grid.n + 1);
        for i in 0..grid.n {
            let t = grid.t(i);
            let reference = h_closed(c, t);
            let err = (sol.h[i] - reference).abs() / reference.abs().max(1.0);
            table.push(vec![t, sol.h[i], sol.h_prime[i], reference, err]);
            slacks.push((Argmin { sample: i, item: 0, at: t }, -err));
        }
        let r0_ref = r0_constant(c);
        if r0_ref <= t_max {
            let err = sol.r0.map_or(f64::INFINITY, |r0| (r0 - r0_ref).abs());
            slacks.push((Argmin { sample: grid.n, item: 1, at: r0_ref }, -err));
        }
        let report = VerificationReport::from_slacks("ode", model, Some(g), grid.n, 0, slacks, cfg.tol(1e-7), table)?
            .with_extra("r0", sol.r0)
            .with_extra("r0_reference", r0_ref.is_finite().then_some(r0_ref))
            .with_extra("t_max", t_max)
            .with_extra("step", grid.dt);
        return Ok(Artifact::new("ode", report));
    }

    // f_{min G} ≤ h'/h ≤ f_{max G} wherever both sides are defined.
    let (lo, hi) = g.range_on(0.0, t_max);
    let end = sol.r0_or_inf().min(r0_constant(lo)) - 1e-3;
    let mut table = Table::new(&["t", "h", "h_prime", "slope", "lower", "upper", "margin"]);
    let mut slacks = Vec::new();
    let mut excluded = 0;
    for i in 1..grid.n {
        let t = grid.t(i);
        if t >= end {
            excluded += 1;
            continue;
        }
        let s = slope(&sol, t)?;
        let (fl, fu) = (f_c(lo, t)?, f_c(hi, t)?);
        let margin = (s - fl).min(fu - s);
        table.push(vec![t, sol.h[i], sol.h_prime[i], s, fl, fu, margin]);
        slacks.push((Argmin { sample: i, item: 0, at: t }, margin));
    }
    let kept = table.rows.len();
    let report = VerificationReport::from_slacks("ode", model, Some(g), kept, excluded, slacks, cfg.tol(1e-6), table)?
        .with_extra("r0", sol.r0)
        .with_extra("g_range", [lo, hi])
        .with_extra("t_max", t_max)
        .with_extra("step", grid.dt);
    Ok(Artifact::new("ode", report))
}

fn run_radial(cfg: &ExperimentConfig) -> Result<Artifact> {
    let (_, model) = cfg.model()?;
    let g = cfg.profile_or_model(&model)?;
    let p = cfg.vertex_or(DVector::zeros(model.dim()))?;
    let sampling = cfg.sampling();
    let tol = cfg.tol(1e-4);
    if cfg.experiment == ExperimentKind::RadialLaplacian {
        let report = verify_laplacian_comparison(&model, &p, &g, &sampling, tol)?;
        return Ok(Artifact::new("radial-laplacian", report));
    }
    let side = match cfg.bound {
        Some(side) => side,
        None => {
            let c = model.space_form_curvature().unwrap_or(0.0);
            let (lo, _) = g.range_on(0.0, sampling.r_range[1]);
            if c <= lo {
                BoundSide::UpperG
            } else {
                BoundSide::LowerG
            }
        }
    };
    let report = verify_hessian_comparison(&model, &p, &g, &sampling, side, tol)?;
    Ok(Artifact::new(report.experiment.clone(), report))
}

fn run_bochner(cfg: &ExperimentConfig) -> Result<Artifact> {
    let (descriptor, model) = cfg.model()?;
    let p = cfg.vertex_or(DVector::zeros(model.dim()))?;
    let s = cfg.sampling();
    let rows = (0..s.count)
        .into_par_iter()
        .map(|i| -> Result<[f64; 2]> {
            let mut rng = stream(s.seed, i as u64);
            let q = sample_chronological_point(&model, &p, s.r_range, s.max_rapidity, &mut rng)?;
            let (_, r) = lorentz_distance(&model, &p, &q)?;
            Ok([r, bochner_residual(&model, &p, &q, s.method)?])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(&["sample", "r", "residual"]);
    let mut slacks = Vec::with_capacity(rows.len());
    for (i, [r, res]) in rows.iter().enumerate() {
        table.push(vec![i as f64, *r, *res]);
        slacks.push((Argmin { sample: i, item: 0, at: *r }, -res.abs()));
    }
    let report =
        VerificationReport::from_slacks("bochner", descriptor, None, rows.len(), 0, slacks, cfg.tol(1e-4), table)?
            .with_extra("seed", s.seed);
    Ok(Artifact::new("bochner", report))
}

fn run_props(cfg: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let (_, model) = cfg.model()?;
    let g = cfg.profile_or_model(&model)?;
    let h = cfg.hypersurface(&model)?;
    let p = cfg.vertex_or(h.vertex.clone())?;
    let sides = match cfg.side {
        Some(SideChoice::Lower) => vec![PropSide::Lower],
        Some(SideChoice::Upper) => vec![PropSide::Upper],
        Some(SideChoice::Both) => vec![PropSide::Lower, PropSide::Upper],
        None => {
            let (lo, hi) = g.range_on(0.0, 10.0);
            let c = h.c;
            match (c <= lo, c >= hi) {
                (true, true) => vec![PropSide::Lower, PropSide::Upper],
                (true, false) => vec![PropSide::Lower],
                _ => vec![PropSide::Upper],
            }
        }
    };
    let tol = cfg.tol(1e-5);
    let mut out = Vec::new();
    for side in sides {
        for k in cfg.ks((0..h.n()).collect()) {
            let report = verify_prop_lk(&h, &model, &p, &g, k, side, tol)?;
            out.push(Artifact::new(format!("{}-k{k}", report.experiment), report));
        }
    }
    if h.n() >= 2 {
        let mut opts = cfg.gauss.clone().unwrap_or_default();
        if let Some(r) = cfg.tolerances.residual {
            opts.residual_tol = r;
        }
        out.push(Artifact::new("gauss", gauss_residual(&h, &model, &opts)?));
    }
    Ok(out)
}

fn random_symmetric(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    let m = DMatrix::<f64>::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    (&m + m.transpose()) * 0.5
}

fn run_newton(cfg: &ExperimentConfig) -> Result<Artifact> {
    let n_max = cfg.n.unwrap_or(8);
    if n_max < 1 {
        return Err(Error::Config("newton-identities needs n ≥ 1".into()));
    }
    let RadialSampling { count, seed, .. } = cfg.sampling();
    let rows = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i as u64);
            let n = rng.gen_range(1..=n_max);
            let a = random_symmetric(&mut rng, n);
            let s = NodeShape::of(&a);
            let c = ShapeData::from_matrices(vec![a.clone()]).map(|sd| sd.c)?;
            let res = trace_residuals(&a, &s, &newton_matrices(&a, &s), &c);
            let worst = res.iter().fold([0.0f64; 3], |m, r| [m[0].max(r[0]), m[1].max(r[1]), m[2].max(r[2])]);
            Ok((n, worst))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(&["sample", "n", "identity1", "identity2", "identity3"]);
    let mut slacks = Vec::with_capacity(3 * rows.len());
    for (i, (n, r)) in rows.iter().enumerate() {
        table.push(vec![i as f64, *n as f64, r[0], r[1], r[2]]);
        for (j, v) in r.iter().enumerate() {
            slacks.push((Argmin { sample: i, item: j + 1, at: *n as f64 }, -v));
        }
    }
    let model = cfg.model.clone().unwrap_or_else(|| ModelDescriptor::space_form(0.0, n_max));
    let report =
        VerificationReport::from_slacks("newton-identities", model, None, rows.len(), 0, slacks, cfg.tol(1e-9), table)?
            .with_extra("seed", seed)
            .with_extra("n_max", n_max);
    Ok(Artifact::new("newton-identities", report))
}

fn direction_code(d: Direction) -> f64 {
    match d {
        Direction::InfLe => 0.0,
        Direction::SupGe => 1.0,
    }
}

/// Wraps estimate reports as one verification report; the fixed-width
/// table becomes the text companion.
fn estimates_artifact(
    stem: &str,
    descriptor: ModelDescriptor,
    g: CurvatureProfile,
    rows: Vec<(f64, EstimateReport)>,
    sharp: bool,
    tol: f64,
) -> Result<Artifact> {
    let mut table = Table::new(&["t", "k", "direction", "lhs", "rhs", "slack"]);
    let mut slacks = Vec::with_capacity(rows.len());
    for (i, (t, r)) in rows.iter().enumerate() {
        table.push(vec![*t, r.k as f64, direction_code(r.direction), r.lhs, r.rhs, r.slack]);
        let s = if sharp { -r.slack.abs() } else { r.slack };
        slacks.push((Argmin { sample: i, item: r.k, at: *t }, s));
    }
    let reports: Vec<EstimateReport> = rows.into_iter().map(|(_, r)| r).collect();
    let text = EstimateReport::to_table(&reports);
    let report = VerificationReport::from_slacks(stem, descriptor, Some(g), reports.len(), 0, slacks, tol, table)?
        .with_extra("estimates", &reports);
    Ok(Artifact { stem: stem.into(), report, text: Some(text) })
}

fn run_estimates(cfg: &ExperimentConfig) -> Result<Artifact> {
    let (descriptor, model) = cfg.model()?;
    let g = cfg.profile_or_model(&model)?;
    let h = cfg.hypersurface(&model)?;
    let p = cfg.vertex_or(h.vertex.clone())?;
    let dir = cfg.direction.unwrap_or(Direction::InfLe);
    let tol = cfg.tol(1e-6);
    let rows = cfg
        .ks(vec![1])
        .into_iter()
        .map(|k| Ok((f64::NAN, check_estimate(&h, &model, &p, &g, k, dir, tol)?)))
        .collect::<Result<Vec<_>>>()?;
    estimates_artifact("estimates", descriptor, g, rows, false, tol)
}

fn sphere_spec(cfg: &ExperimentConfig, t: f64) -> HypersurfaceSpec {
    match &cfg.hypersurface {
        Some(HypersurfaceSpec::Sphere { vertex, bbox, nx, shape, .. }) => {
            HypersurfaceSpec::Sphere { t, vertex: vertex.clone(), bbox: bbox.clone(), nx: *nx, shape: *shape }
        }
        _ => HypersurfaceSpec::sphere(t, 5),
    }
}

fn sphere_radii(cfg: &ExperimentConfig) -> Result<Vec<f64>> {
    match (&cfg.t, &cfg.hypersurface) {
        (Some(t), _) => Ok(t.to_vec()),
        (None, Some(HypersurfaceSpec::Sphere { t, .. })) => Ok(vec![*t]),
        _ => Err(Error::Config(format!("experiment '{}' needs 't'", cfg.experiment.name()))),
    }
}

fn run_sharpness(cfg: &ExperimentConfig) -> Result<Artifact> {
    let (descriptor, model) = cfg.model()?;
    let c =
        model.space_form_curvature().ok_or_else(|| Error::Contract("sphere-sharpness needs a space form".into()))?;
    let g = CurvatureProfile::constant(c);
    if let Some(given) = cfg.profile()? {
        if given != g {
            return Err(Error::Precondition(format!("sharpness is stated for G ≡ c = {c}")));
        }
    }
    let tol = cfg.tol(1e-5);
    let mut rows = Vec::new();
    for t in sphere_radii(cfg)? {
        let h = construct_hypersurface(&model, &sphere_spec(cfg, t))?;
        let p = h.vertex.clone();
        for k in cfg.ks((1..=model.n()).collect()) {
            for dir in [Direction::InfLe, Direction::SupGe] {
                rows.push((t, check_estimate(&h, &model, &p, &g, k, dir, tol)?));
            }
        }
    }
    estimates_artifact("sphere-sharpness", descriptor, g, rows, true, tol)
}

fn run_bernstein(cfg: &ExperimentConfig) -> Result<Artifact> {
    let (descriptor, model) = cfg.model()?;
    let specs = match &cfg.hypersurface {
        Some(spec @ HypersurfaceSpec::Graph { .. }) => vec![(f64::NAN, spec.clone())],
        _ => sphere_radii(cfg)?.into_iter().map(|t| (t, sphere_spec(cfg, t))).collect(),
    };
    let band_tol = 1e-7;
    let mut table =
        Table::new(&["t", "k", "h_k", "value", "rho", "band_lo", "band_hi", "band_width", "u_min", "u_max", "slack"]);
    let mut slacks = Vec::new();
    let mut verdicts = Vec::new();
    for (t, spec) in specs {
        let h = construct_hypersurface(&model, &spec)?;
        let p = cfg.vertex_or(h.vertex.clone())?;
        for k in cfg.ks(vec![h.n().min(2)]) {
            let v = bernstein_check(&h, &model, &p, k, band_tol)?;
            // Distance of the image of u from the band's ends.
            let slack =
                if v.inequalities_hold { (v.u_min - v.band[0]).min(v.band[1] - v.u_max) } else { f64::NEG_INFINITY };
            table.push(vec![
                t,
                k as f64,
                v.h_k,
                v.value,
                v.rho,
                v.band[0],
                v.band[1],
                v.band_width,
                v.u_min,
                v.u_max,
                slack,
            ]);
            slacks.push((Argmin { sample: verdicts.len(), item: k, at: v.rho }, slack));
            verdicts.push(v);
        }
    }
    let report = VerificationReport::from_slacks(
        "bernstein",
        descriptor,
        None,
        verdicts.len(),
        0,
        slacks,
        cfg.tol(1e-12),
        table,
    )?
    .with_extra("band_tol", band_tol)
    .with_extra("verdicts", &verdicts);
    Ok(Artifact::new("bernstein", report))
}
