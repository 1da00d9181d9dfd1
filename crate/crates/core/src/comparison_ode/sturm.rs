use serde::{Deserialize, Serialize};

use super::UniformGrid;
use crate::error::{Error, Result};

/// A function and its derivative sampled on a uniform grid.
#[derive(Clone, Debug)]
pub struct SampledFunction {
    pub grid: UniformGrid,
    pub values: Vec<f64>,
    pub derivs: Vec<f64>,
}

impl SampledFunction {
    pub fn from_fn(grid: UniformGrid, f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64) -> Self {
        let ts = (0..grid.n).map(|i| grid.t(i));
        SampledFunction { grid, values: ts.clone().map(&f).collect(), derivs: ts.map(&df).collect() }
    }
}

/// Outcome of a nodewise comparison.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonVerdict {
    pub holds: bool,
    /// Smallest signed slack; negative means the inequality is violated.
    pub min_margin: f64,
    pub argmin_t: f64,
    pub tol: f64,
}

impl ComparisonVerdict {
    pub(crate) fn from_margins(margins: impl IntoIterator<Item = (f64, f64)>, tol: f64) -> Self {
        let (argmin_t, min_margin) =
            margins.into_iter().fold(
                (f64::NAN, f64::INFINITY),
                |best, (t, m)| {
                    if m < best.1 || m.is_nan() {
                        (t, m)
                    } else {
                        best
                    }
                },
            );
        ComparisonVerdict { holds: min_margin >= -tol, min_margin, argmin_t, tol }
    }
}

/// Checks the two conclusions of the Sturm comparison lemma nodewise on the
/// open interval `(0, T)`: `φ'/φ ≤ ψ'/ψ` and `ψ ≥ φ`.
///
/// The hypotheses on the inputs themselves (`φ > 0` on `(0, T)`,
/// `ψ'(0) ≥ φ'(0)`) are preconditions. The differential inequalities are not
/// checked here: a pair violating them shows up as a negative margin.
pub fn sturm_verify(phi: &SampledFunction, psi: &SampledFunction, t_end: f64, tol: f64) -> Result<ComparisonVerdict> {
    if !phi.grid.is_aligned_with(&psi.grid) || phi.grid.n != psi.grid.n {
        return Err(Error::Alignment(format!("φ on {:?}, ψ on {:?}", phi.grid, psi.grid)));
    }
    if phi.grid.t0 != 0.0 {
        return Err(Error::Alignment("grids must start at t = 0".into()));
    }
    if psi.derivs[0] < phi.derivs[0] {
        return Err(Error::Precondition(format!("ψ'(0) = {} < φ'(0) = {}", psi.derivs[0], phi.derivs[0])));
    }
    let interior: Vec<usize> = (1..phi.grid.n).filter(|&i| phi.grid.t(i) < t_end).collect();
    if let Some(&i) = interior.iter().find(|&&i| phi.values[i] <= 0.0) {
        return Err(Error::Precondition(format!("φ is not positive at t = {}", phi.grid.t(i))));
    }
    let margins = interior.iter().flat_map(|&i| {
        let t = phi.grid.t(i);
        let log_phi = phi.derivs[i] / phi.values[i];
        let log_psi = psi.derivs[i] / psi.values[i];
        [(t, log_psi - log_phi), (t, psi.values[i] - phi.values[i])]
    });
    Ok(ComparisonVerdict::from_margins(margins, tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> UniformGrid {
        UniformGrid { t0: 0.0, dt: PI / 1000.0, n: 1001 }
    }

    #[test]
    fn sine_below_sinh() {
        let phi = SampledFunction::from_fn(grid(), f64::sin, f64::cos);
        let psi = SampledFunction::from_fn(grid(), f64::sinh, f64::cosh);
        let v = sturm_verify(&phi, &psi, PI, 1e-6).unwrap();
        assert!(v.holds);
        assert!(v.min_margin >= 0.0);
    }

    #[test]
    fn equal_linear_pair_has_zero_margin() {
        let phi = SampledFunction::from_fn(grid(), |t| t, |_| 1.0);
        let v = sturm_verify(&phi, &phi.clone(), PI, 1e-6).unwrap();
        assert!(v.holds);
        assert_eq!(v.min_margin, 0.0);
    }

    #[test]
    fn swapped_pair_fails() {
        let phi = SampledFunction::from_fn(grid(), f64::sinh, f64::cosh);
        let psi = SampledFunction::from_fn(grid(), f64::sin, f64::cos);
        let v = sturm_verify(&phi, &psi, PI, 1e-6).unwrap();
        assert!(!v.holds);
        assert!(v.min_margin < 0.0);
    }

    #[test]
    fn misaligned_grids_are_rejected() {
        let phi = SampledFunction::from_fn(grid(), |t| t, |_| 1.0);
        let other = UniformGrid { t0: 0.0, dt: 0.01, n: 1001 };
        let psi = SampledFunction::from_fn(other, |t| t, |_| 1.0);
        assert!(matches!(sturm_verify(&phi, &psi, 1.0, 1e-6), Err(Error::Alignment(_))));
    }

    #[test]
    fn smaller_initial_slope_is_a_precondition_failure() {
        let phi = SampledFunction::from_fn(grid(), |t| t, |_| 1.0);
        let psi = SampledFunction::from_fn(grid(), |t| 0.5 * t, |_| 0.5);
        assert!(matches!(sturm_verify(&phi, &psi, 1.0, 1e-6), Err(Error::Precondition(_))));
    }
}
