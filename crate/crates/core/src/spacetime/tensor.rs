use nalgebra::{DMatrix, DVector};

/// Connection coefficients `Γ^a_{bc}`, stored densely.
#[derive(Clone, Debug, PartialEq)]
pub struct Christoffel {
    dim: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn zeros(dim: usize) -> Self {
        Christoffel { dim, data: vec![0.0; dim * dim * dim] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.data[(a * self.dim + b) * self.dim + c]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, c: usize, v: f64) {
        self.data[(a * self.dim + b) * self.dim + c] = v;
    }

    /// `Γ^a_{bc} u^b v^c`.
    pub fn contract(&self, u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let d = self.dim;
        DVector::from_fn(d, |a, _| {
            let mut s = 0.0;
            for b in 0..d {
                for c in 0..d {
                    s += self.get(a, b, c) * u[b] * v[c];
                }
            }
            s
        })
    }

    /// Levi-Civita coefficients from the metric and its first derivatives
    /// (`dg[k]` is `∂_k g`).
    pub fn from_metric_derivatives(g: &DMatrix<f64>, dg: &[DMatrix<f64>]) -> Option<Self> {
        let d = g.nrows();
        let ginv = g.clone().try_inverse()?;
        let mut out = Christoffel::zeros(d);
        for a in 0..d {
            for b in 0..d {
                for c in b..d {
                    let mut s = 0.0;
                    for e in 0..d {
                        s += ginv[(a, e)] * (dg[b][(e, c)] + dg[c][(e, b)] - dg[e][(b, c)]);
                    }
                    out.set(a, b, c, 0.5 * s);
                    out.set(a, c, b, 0.5 * s);
                }
            }
        }
        Some(out)
    }

    pub fn max_abs_diff(&self, other: &Christoffel) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

/// Curvature tensor `R^a_{bcd}` with `R(∂_c, ∂_d)∂_b = R^a_{bcd} ∂_a` and
/// `R(X, Y) = ∇_X∇_Y − ∇_Y∇_X − ∇_{[X,Y]}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Riemann {
    dim: usize,
    data: Vec<f64>,
}

impl Riemann {
    pub fn zeros(dim: usize) -> Self {
        Riemann { dim, data: vec![0.0; dim.pow(4)] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn idx(&self, a: usize, b: usize, c: usize, d: usize) -> usize {
        ((a * self.dim + b) * self.dim + c) * self.dim + d
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.data[self.idx(a, b, c, d)]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, c: usize, d: usize, v: f64) {
        let i = self.idx(a, b, c, d);
        self.data[i] = v;
    }

    /// Constant-curvature tensor `c(⟨Y,Z⟩X − ⟨X,Z⟩Y)` in components.
    pub fn constant_curvature(c: f64, g: &DMatrix<f64>) -> Self {
        let d = g.nrows();
        let mut r = Riemann::zeros(d);
        for a in 0..d {
            for b in 0..d {
                for cc in 0..d {
                    for dd in 0..d {
                        let da_c = if a == cc { 1.0 } else { 0.0 };
                        let da_d = if a == dd { 1.0 } else { 0.0 };
                        r.set(a, b, cc, dd, c * (da_c * g[(b, dd)] - da_d * g[(b, cc)]));
                    }
                }
            }
        }
        r
    }

    /// Assembles `R` from `Γ` at the point and its coordinate derivatives
    /// (`dgamma[k]` is `∂_k Γ`).
    pub fn from_christoffel(gamma: &Christoffel, dgamma: &[Christoffel]) -> Self {
        let d = gamma.dim();
        let mut r = Riemann::zeros(d);
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    for dd in 0..d {
                        let mut v = dgamma[c].get(a, dd, b) - dgamma[dd].get(a, c, b);
                        for e in 0..d {
                            v += gamma.get(a, c, e) * gamma.get(e, dd, b) - gamma.get(a, dd, e) * gamma.get(e, c, b);
                        }
                        r.set(a, b, c, dd, v);
                    }
                }
            }
        }
        r
    }

    /// `R(X, Y)Z`.
    pub fn apply(&self, x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>) -> DVector<f64> {
        let d = self.dim;
        DVector::from_fn(d, |a, _| {
            let mut s = 0.0;
            for b in 0..d {
                if z[b] == 0.0 {
                    continue;
                }
                for c in 0..d {
                    for e in 0..d {
                        s += self.get(a, b, c, e) * z[b] * x[c] * y[e];
                    }
                }
            }
            s
        })
    }

    /// Fully covariant components `R_{abcd} = g_{ae} R^e_{bcd}`.
    pub fn lowered(&self, g: &DMatrix<f64>) -> Riemann {
        let d = self.dim;
        let mut out = Riemann::zeros(d);
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    for dd in 0..d {
                        let s = (0..d).map(|e| g[(a, e)] * self.get(e, b, c, dd)).sum();
                        out.set(a, b, c, dd, s);
                    }
                }
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Riemann) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Largest violation among the algebraic symmetries of the covariant
    /// tensor: antisymmetry in each pair, pair symmetry, first Bianchi.
    pub fn symmetry_defect(&self, g: &DMatrix<f64>) -> f64 {
        let low = self.lowered(g);
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    for e in 0..d {
                        let r = low.get(a, b, c, e);
                        worst = worst
                            .max((r + low.get(b, a, c, e)).abs())
                            .max((r + low.get(a, b, e, c)).abs())
                            .max((r - low.get(c, e, a, b)).abs())
                            .max((r + low.get(a, c, e, b) + low.get(a, e, b, c)).abs());
                    }
                }
            }
        }
        worst
    }
}
