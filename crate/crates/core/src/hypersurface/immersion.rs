use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radial_geometry::geodesic_coefficients;
use crate::rng::stream;
use crate::spacetime::SpaceFormChart;

/// Position and first two parameter derivatives of an immersion, in
/// ambient coordinates. `d2[i * n + j]` is `∂_i∂_jΨ`.
#[derive(Clone, Debug)]
pub struct Jet {
    pub pos: DVector<f64>,
    pub d1: DMatrix<f64>,
    pub d2: Vec<DVector<f64>>,
}

/// Chart time as a function of the spatial chart coordinates, with its
/// gradient and Hessian in closed form.
#[derive(Clone, Debug, PartialEq)]
pub enum GraphFunction {
    Constant(f64),
    /// `s + √(b² + |x|²) + Σ a_m sin(k_m·x + θ_m)`: the sphere of radius `b`
    /// about the Minkowski point `(s, 0)`, optionally perturbed.
    Hyperboloid {
        shift: f64,
        radius: f64,
        modes: Vec<Mode>,
    },
    /// `base + Σ a_m sin(k_m·x + θ_m)`.
    Waves {
        base: f64,
        modes: Vec<Mode>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mode {
    pub amplitude: f64,
    pub wave: DVector<f64>,
    pub phase: f64,
}

impl Mode {
    fn along_first_axis(n: usize, amplitude: f64, k: f64) -> Self {
        let wave = DVector::from_fn(n, |i, _| if i == 0 { k } else { 0.0 });
        Mode { amplitude, wave, phase: 0.0 }
    }

    fn add_to(&self, x: &DVector<f64>, v: &mut f64, g: &mut DVector<f64>, h: &mut DMatrix<f64>) {
        let arg = self.wave.dot(x) + self.phase;
        let (s, c) = arg.sin_cos();
        *v += self.amplitude * s;
        *g += &self.wave * (self.amplitude * c);
        *h -= &self.wave * self.wave.transpose() * (self.amplitude * s);
    }
}

fn param(params: &BTreeMap<String, f64>, key: &str, default: f64) -> f64 {
    params.get(key).copied().unwrap_or(default)
}

impl GraphFunction {
    /// Resolves `builtin:<name>` with optional numeric parameters.
    pub fn builtin(name: &str, n: usize, params: &BTreeMap<String, f64>) -> Result<Self> {
        let key = name.strip_prefix("builtin:").unwrap_or(name);
        let allowed: &[&str] = match key {
            "constant" => &["value"],
            "hyperboloid" => &["radius", "shift"],
            "sine" => &["base", "amplitude", "wavenumber"],
            "perturbed-hyperboloid" => &["radius", "shift", "amplitude", "wavenumber"],
            "random-hyperboloid" => &["radius", "shift", "amplitude", "modes", "seed"],
            _ => return Err(Error::Config(format!("unknown graph function '{name}'"))),
        };
        if let Some(bad) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::Config(format!("graph '{key}' has no parameter '{bad}'")));
        }
        let p = |k, d| param(params, k, d);
        Ok(match key {
            "constant" => GraphFunction::Constant(p("value", 2.0)),
            "hyperboloid" => {
                GraphFunction::Hyperboloid { shift: p("shift", 0.0), radius: p("radius", 1.0), modes: vec![] }
            }
            "sine" => GraphFunction::Waves {
                base: p("base", 2.0),
                modes: vec![Mode::along_first_axis(n, p("amplitude", 0.1), p("wavenumber", 1.0))],
            },
            "perturbed-hyperboloid" => GraphFunction::Hyperboloid {
                shift: p("shift", 0.0),
                radius: p("radius", 1.0),
                modes: vec![Mode::along_first_axis(n, p("amplitude", 0.05), p("wavenumber", 1.0))],
            },
            _ => GraphFunction::random_hyperboloid(
                n,
                p("radius", 1.0),
                p("shift", 0.0),
                p("amplitude", 0.02),
                p("modes", 3.0) as usize,
                p("seed", 0.0) as u64,
            ),
        })
    }

    /// A hyperboloid with a few random low-frequency ripples, drawn from
    /// the stream `(seed, m)` for mode `m`.
    pub fn random_hyperboloid(n: usize, radius: f64, shift: f64, amplitude: f64, modes: usize, seed: u64) -> Self {
        let modes = (0..modes)
            .map(|m| {
                let mut rng = stream(seed, m as u64);
                Mode {
                    amplitude: amplitude * rng.gen_range(-1.0..1.0) / (m + 1) as f64,
                    wave: DVector::from_fn(n, |_, _| rng.gen_range(-1.5..1.5)),
                    phase: rng.gen_range(0.0..std::f64::consts::TAU),
                }
            })
            .collect();
        GraphFunction::Hyperboloid { shift, radius, modes }
    }

    /// `(φ, ∇φ, ∇²φ)` at `x`.
    pub fn eval(&self, x: &DVector<f64>) -> (f64, DVector<f64>, DMatrix<f64>) {
        let n = x.len();
        let (mut v, mut g, mut h, modes) = match self {
            GraphFunction::Constant(c) => (*c, DVector::zeros(n), DMatrix::zeros(n, n), &[][..]),
            GraphFunction::Waves { base, modes } => (*base, DVector::zeros(n), DMatrix::zeros(n, n), &modes[..]),
            GraphFunction::Hyperboloid { shift, radius, modes } => {
                let w = (radius * radius + x.norm_squared()).sqrt();
                let h = (DMatrix::identity(n, n) - x * x.transpose() / (w * w)) / w;
                (shift + w, x / w, h, &modes[..])
            }
        };
        for m in modes {
            m.add_to(x, &mut v, &mut g, &mut h);
        }
        (v, g, h)
    }
}

/// The two families of hypersurfaces.
#[derive(Clone, Debug)]
pub enum Immersion {
    /// `x ↦ (φ(x), x)` in the chart.
    Graph { chart: SpaceFormChart, phi: GraphFunction },
    /// `Σ_c(t)` about `p`, parametrized by `y ↦ C(t)P + S(t)V(y)` with
    /// `V(y) = √(1 + |y|²)E₀ + Σ yᵢEᵢ` on the unit future hyperboloid of
    /// `T_pM`.
    Sphere { chart: SpaceFormChart, c: f64, t: f64, big_p: DVector<f64>, basis: Vec<DVector<f64>> },
}

impl Immersion {
    pub fn chart(&self) -> &SpaceFormChart {
        match self {
            Immersion::Graph { chart, .. } | Immersion::Sphere { chart, .. } => chart,
        }
    }

    pub fn position(&self, y: &DVector<f64>) -> DVector<f64> {
        match self {
            Immersion::Graph { chart, phi } => {
                let (v, _, _) = phi.eval(y);
                chart.embed(&graph_point(v, y))
            }
            Immersion::Sphere { c, t, big_p, basis, .. } => {
                let (cc, ss, _, _) = geodesic_coefficients(*c, *t);
                big_p * cc + hyperboloid_point(basis, y) * ss
            }
        }
    }

    /// Closed-form jet.
    pub fn jet(&self, y: &DVector<f64>) -> Jet {
        let n = y.len();
        match self {
            Immersion::Graph { chart, phi } => {
                let (v, gphi, hphi) = phi.eval(y);
                let x = graph_point(v, y);
                let jac = chart.jacobian(&x);
                let hess = chart.hessian(&x);
                // ∂_i x = (∂_iφ, e_i)
                let dx: Vec<DVector<f64>> = (0..n)
                    .map(|i| {
                        DVector::from_fn(n + 1, |a, _| {
                            if a == 0 {
                                gphi[i]
                            } else if a == i + 1 {
                                1.0
                            } else {
                                0.0
                            }
                        })
                    })
                    .collect();
                let d1 = DMatrix::from_columns(&dx.iter().map(|v| &jac * v).collect::<Vec<_>>());
                let mut d2 = Vec::with_capacity(n * n);
                for i in 0..n {
                    for j in 0..n {
                        let col0 = jac.column(0) * hphi[(i, j)];
                        d2.push(DVector::from_fn(jac.nrows(), |a, _| {
                            (dx[i].transpose() * &hess[a] * &dx[j])[(0, 0)] + col0[a]
                        }));
                    }
                }
                Jet { pos: chart.embed(&x), d1, d2 }
            }
            Immersion::Sphere { c, t, big_p, basis, .. } => {
                let (cc, ss, _, _) = geodesic_coefficients(*c, *t);
                let w = (1.0 + y.norm_squared()).sqrt();
                let pos = big_p * cc + hyperboloid_point(basis, y) * ss;
                let d1 = DMatrix::from_columns(
                    &(0..n).map(|i| (&basis[0] * (y[i] / w) + &basis[i + 1]) * ss).collect::<Vec<_>>(),
                );
                let mut d2 = Vec::with_capacity(n * n);
                for i in 0..n {
                    for j in 0..n {
                        let delta = if i == j { 1.0 } else { 0.0 };
                        d2.push(&basis[0] * (ss * (delta / w - y[i] * y[j] / (w * w * w))));
                    }
                }
                Jet { pos, d1, d2 }
            }
        }
    }

    /// Jet from fourth-order central differences of [`position`] at
    /// spacing `h`.
    ///
    /// [`position`]: Self::position
    pub fn jet_fd(&self, y: &DVector<f64>, h: f64) -> Jet {
        let n = y.len();
        let at = |shifts: &[(usize, f64)]| {
            let mut z = y.clone();
            for &(i, s) in shifts {
                z[i] += s;
            }
            self.position(&z)
        };
        let pos = self.position(y);
        let mut d1 = DMatrix::zeros(pos.len(), n);
        let mut d2 = vec![DVector::zeros(pos.len()); n * n];
        for i in 0..n {
            let (p1, m1, p2, m2) = (at(&[(i, h)]), at(&[(i, -h)]), at(&[(i, 2.0 * h)]), at(&[(i, -2.0 * h)]));
            d1.set_column(i, &((&m2 - &p2 + (&p1 - &m1) * 8.0) / (12.0 * h)));
            d2[i * n + i] = ((&p1 + &m1) * 16.0 - &p2 - &m2 - &pos * 30.0) / (12.0 * h * h);
            for j in 0..i {
                let mixed = |s: f64| {
                    (at(&[(i, s), (j, s)]) - at(&[(i, s), (j, -s)]) - at(&[(i, -s), (j, s)]) + at(&[(i, -s), (j, -s)]))
                        / (4.0 * s * s)
                };
                let v = (mixed(0.5 * h) * 4.0 - mixed(h)) / 3.0;
                d2[i * n + j] = v.clone();
                d2[j * n + i] = v;
            }
        }
        Jet { pos, d1, d2 }
    }
}

fn graph_point(v: f64, y: &DVector<f64>) -> DVector<f64> {
    DVector::from_fn(y.len() + 1, |a, _| if a == 0 { v } else { y[a - 1] })
}

fn hyperboloid_point(basis: &[DVector<f64>], y: &DVector<f64>) -> DVector<f64> {
    let w = (1.0 + y.norm_squared()).sqrt();
    y.iter().enumerate().fold(&basis[0] * w, |acc, (i, yi)| acc + &basis[i + 1] * *yi)
}

/// Generalized cross product: a vector orthogonal (Euclidean) to the `m − 1`
/// rows of `rows` in `ℝ^m`, with components the signed maximal minors.
pub(crate) fn null_vector(rows: &DMatrix<f64>) -> DVector<f64> {
    let m = rows.ncols();
    debug_assert_eq!(rows.nrows(), m - 1);
    DVector::from_fn(m, |a, _| {
        let minor = rows.clone().remove_column(a);
        let sign = if a % 2 == 0 { 1.0 } else { -1.0 };
        sign * minor.determinant()
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeRoute {
    /// Closed-form jets of the parametrization.
    #[default]
    Analytic,
    /// Fourth-order finite differences of the immersion at grid spacing.
    Fd,
}
