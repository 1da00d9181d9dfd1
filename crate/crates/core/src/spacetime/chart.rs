//! Explicit charts for the Lorentzian space forms, given as embeddings into
//! a flat ambient space.
//!
//! * `c = 0`: the global inertial chart of Minkowski space, ambient = itself.
//! * `c > 0`: de Sitter space as the hyperquadric `⟨X,X⟩ = ℓ²` in
//!   `ℝ^{1,n+1}`, charted by the expanding flat slicing
//!   `−dτ² + e^{2τ/ℓ}|dx|²`. The chart covers a future set, so it contains
//!   the chronological future of each of its points.
//! * `c < 0`: anti-de Sitter space as `⟨X,X⟩ = −ℓ²` in `ℝ^{2,n}` in the
//!   static chart `X = (ρ cos(t/ℓ), y, ρ sin(t/ℓ))`, `ρ = √(ℓ² + |y|²)`,
//!   restricted to `|t| < πℓ`. It contains every point reached from the
//!   chart origin by a timelike geodesic of length below `πℓ`.
//!
//! Ambient vectors are ordered `(X₀, X₁…X_n, X_{n+1})` with `X₀` timelike.

use nalgebra::{DMatrix, DVector};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChartKind {
    Minkowski,
    DeSitterFlat { ell: f64 },
    AntiDeSitterStatic { ell: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpaceFormChart {
    pub kind: ChartKind,
    pub n: usize,
}

impl SpaceFormChart {
    pub fn new(c: f64, n: usize) -> Self {
        let kind = if c == 0.0 {
            ChartKind::Minkowski
        } else if c > 0.0 {
            ChartKind::DeSitterFlat { ell: 1.0 / c.sqrt() }
        } else {
            ChartKind::AntiDeSitterStatic { ell: 1.0 / (-c).sqrt() }
        };
        SpaceFormChart { kind, n }
    }

    /// Chart dimension `n + 1`.
    pub fn dim(&self) -> usize {
        self.n + 1
    }

    pub fn ambient_dim(&self) -> usize {
        match self.kind {
            ChartKind::Minkowski => self.n + 1,
            _ => self.n + 2,
        }
    }

    /// Diagonal of the ambient flat metric.
    pub fn eta(&self) -> DVector<f64> {
        let big = self.ambient_dim();
        DVector::from_fn(big, |i, _| match (self.kind, i) {
            (_, 0) => -1.0,
            (ChartKind::AntiDeSitterStatic { .. }, i) if i == big - 1 => -1.0,
            _ => 1.0,
        })
    }

    pub fn ambient_inner(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        let eta = self.eta();
        (0..a.len()).map(|i| eta[i] * a[i] * b[i]).sum()
    }

    pub fn contains(&self, x: &DVector<f64>) -> bool {
        x.iter().all(|v| v.is_finite())
            && match self.kind {
                ChartKind::AntiDeSitterStatic { ell } => x[0].abs() < std::f64::consts::PI * ell,
                _ => true,
            }
    }

    pub fn embed(&self, x: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        match self.kind {
            ChartKind::Minkowski => x.clone(),
            ChartKind::DeSitterFlat { ell } => {
                let tau = x[0];
                let a = (tau / ell).exp();
                let s: f64 = x.rows(1, n).norm_squared();
                let mut out = DVector::zeros(n + 2);
                out[0] = ell * (tau / ell).sinh() + s * a / (2.0 * ell);
                for i in 1..=n {
                    out[i] = a * x[i];
                }
                out[n + 1] = ell * (tau / ell).cosh() - s * a / (2.0 * ell);
                out
            }
            ChartKind::AntiDeSitterStatic { ell } => {
                let theta = x[0] / ell;
                let rho = (ell * ell + x.rows(1, n).norm_squared()).sqrt();
                let mut out = DVector::zeros(n + 2);
                out[0] = rho * theta.cos();
                for i in 1..=n {
                    out[i] = x[i];
                }
                out[n + 1] = rho * theta.sin();
                out
            }
        }
    }

    /// Inverse of [`embed`](Self::embed) on the image of the chart.
    pub fn chart_point(&self, big: &DVector<f64>) -> Option<DVector<f64>> {
        let n = self.n;
        match self.kind {
            ChartKind::Minkowski => Some(big.clone()),
            ChartKind::DeSitterFlat { ell } => {
                let sum = big[0] + big[n + 1];
                if sum <= 0.0 {
                    return None;
                }
                let tau = ell * (sum / ell).ln();
                let a = (tau / ell).exp();
                Some(DVector::from_fn(n + 1, |i, _| if i == 0 { tau } else { big[i] / a }))
            }
            ChartKind::AntiDeSitterStatic { ell } => {
                let t = ell * big[n + 1].atan2(big[0]);
                Some(DVector::from_fn(n + 1, |i, _| if i == 0 { t } else { big[i] }))
            }
        }
    }

    /// `∂X/∂x`, an `(ambient) × (n+1)` matrix.
    pub fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let n = self.n;
        match self.kind {
            ChartKind::Minkowski => DMatrix::identity(n + 1, n + 1),
            ChartKind::DeSitterFlat { ell } => {
                let tau = x[0];
                let a = (tau / ell).exp();
                let s: f64 = x.rows(1, n).norm_squared();
                let mut j = DMatrix::zeros(n + 2, n + 1);
                j[(0, 0)] = (tau / ell).cosh() + s * a / (2.0 * ell * ell);
                j[(n + 1, 0)] = (tau / ell).sinh() - s * a / (2.0 * ell * ell);
                for i in 1..=n {
                    j[(i, 0)] = a * x[i] / ell;
                    j[(0, i)] = a * x[i] / ell;
                    j[(n + 1, i)] = -a * x[i] / ell;
                    j[(i, i)] = a;
                }
                j
            }
            ChartKind::AntiDeSitterStatic { ell } => {
                let theta = x[0] / ell;
                let (sn, cs) = theta.sin_cos();
                let rho = (ell * ell + x.rows(1, n).norm_squared()).sqrt();
                let mut j = DMatrix::zeros(n + 2, n + 1);
                j[(0, 0)] = -rho * sn / ell;
                j[(n + 1, 0)] = rho * cs / ell;
                for i in 1..=n {
                    j[(0, i)] = x[i] / rho * cs;
                    j[(n + 1, i)] = x[i] / rho * sn;
                    j[(i, i)] = 1.0;
                }
                j
            }
        }
    }

    /// Second derivatives: entry `[A]` is the symmetric matrix
    /// `∂²X_A/∂x_i∂x_j`.
    pub fn hessian(&self, x: &DVector<f64>) -> Vec<DMatrix<f64>> {
        let n = self.n;
        let d = n + 1;
        match self.kind {
            ChartKind::Minkowski => vec![DMatrix::zeros(d, d); d],
            ChartKind::DeSitterFlat { ell } => {
                let tau = x[0];
                let a = (tau / ell).exp();
                let s: f64 = x.rows(1, n).norm_squared();
                let l2 = ell * ell;
                let mut h = vec![DMatrix::zeros(d, d); n + 2];
                h[0][(0, 0)] = (tau / ell).sinh() / ell + s * a / (2.0 * l2 * ell);
                h[n + 1][(0, 0)] = (tau / ell).cosh() / ell - s * a / (2.0 * l2 * ell);
                for i in 1..=n {
                    h[i][(0, 0)] = a * x[i] / l2;
                    h[i][(0, i)] = a / ell;
                    h[i][(i, 0)] = a / ell;
                    h[0][(0, i)] = a * x[i] / l2;
                    h[0][(i, 0)] = a * x[i] / l2;
                    h[n + 1][(0, i)] = -a * x[i] / l2;
                    h[n + 1][(i, 0)] = -a * x[i] / l2;
                    h[0][(i, i)] = a / ell;
                    h[n + 1][(i, i)] = -a / ell;
                }
                h
            }
            ChartKind::AntiDeSitterStatic { ell } => {
                let theta = x[0] / ell;
                let (sn, cs) = theta.sin_cos();
                let rho = (ell * ell + x.rows(1, n).norm_squared()).sqrt();
                let rho3 = rho * rho * rho;
                let mut h = vec![DMatrix::zeros(d, d); n + 2];
                h[0][(0, 0)] = -rho * cs / (ell * ell);
                h[n + 1][(0, 0)] = -rho * sn / (ell * ell);
                for i in 1..=n {
                    let dr = x[i] / rho;
                    h[0][(0, i)] = -dr * sn / ell;
                    h[0][(i, 0)] = -dr * sn / ell;
                    h[n + 1][(0, i)] = dr * cs / ell;
                    h[n + 1][(i, 0)] = dr * cs / ell;
                    for k in 1..=n {
                        let delta = if i == k { 1.0 } else { 0.0 };
                        let d2r = delta / rho - x[i] * x[k] / rho3;
                        h[0][(i, k)] = d2r * cs;
                        h[n + 1][(i, k)] = d2r * sn;
                    }
                }
                h
            }
        }
    }

    /// Pulled-back metric `Jᵀ η J`.
    pub fn metric(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let j = self.jacobian(x);
        let eta = DMatrix::from_diagonal(&self.eta());
        j.transpose() * eta * j
    }

    /// Chart components of an ambient vector tangent to the quadric at `x`.
    pub fn pull_back(&self, x: &DVector<f64>, big: &DVector<f64>) -> DVector<f64> {
        let j = self.jacobian(x);
        let eta = DMatrix::from_diagonal(&self.eta());
        let g = j.transpose() * &eta * &j;
        let rhs = j.transpose() * eta * big;
        g.lu().solve(&rhs).expect("chart metric is nondegenerate")
    }

    pub fn push_forward(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        self.jacobian(x) * v
    }
}
