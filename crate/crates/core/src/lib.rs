// Negated float comparisons (`!(x > 0.0)`) are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod comparison_ode;
pub mod error;
pub mod estimates;
pub mod experiment;
pub mod hypersurface;
pub mod radial_geometry;
pub mod report;
pub mod rng;
pub mod spacetime;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/comparison-ode.md")]
    mod comparison_ode {}
    #[doc = include_str!("../../../book/src/distance.md")]
    mod distance {}
    #[doc = include_str!("../../../book/src/hypersurfaces.md")]
    mod hypersurfaces {}
    #[doc = include_str!("../../../book/src/estimates.md")]
    mod estimates {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
