//! Exact computation with staircase-encoded multiparameter persistence modules.
//!
//! Everything here is built from four layers:
//!
//! * [`linalg`]: dense exact linear algebra over a prime field `F_p`.
//! * [`poset`] and [`staircase`]: finite posets with monotone maps, and
//!   staircase subsets of `R^n` held as unions of grid cells over rational
//!   breakpoints.
//! * [`encoding`] and [`persistence`]: monotone cell labelings into finite
//!   posets, and pointwise finite-dimensional modules over those posets,
//!   with kernels, images, cokernels, hom spaces, colimits and counit
//!   diagnostics.
//! * [`oracle`], [`generate`], [`suites`]: independent sample-grid
//!   cross-checks, seeded random generators, and the randomized law suites
//!   built from them.
//!
//! The central pipeline takes two encoded modules, forms a common encoding,
//! refines it so every fiber is order-connected (which makes the pullback
//! fully faithful), and then applies the requested pointwise abelian
//! operation over the refined finite poset.

pub mod encoding;
pub mod error;
pub mod generate;
pub mod linalg;
pub mod oracle;
pub mod persistence;
pub mod poset;
pub mod rational;
pub mod staircase;
pub mod suites;

pub use error::{Error, Result};
