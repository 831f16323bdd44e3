//! Forward and inverse solvers for generalized Robin-Regge spectral
//! problems: Sturm-Liouville equations with a complex potential and an
//! eigenvalue-dependent boundary condition.
//!
//! The crate is organized around the data flow of the inverse problem:
//!
//! - [`grid`]: uniform grids, complex sampled functions, quadrature.
//! - [`problem`]: the forward problem object and indexed spectra.
//! - [`ode`], [`delta`]: boundary traces and the characteristic function.
//! - [`goursat`]: the transmutation kernel (forward and backward marches).
//! - [`cauchy`]: Cauchy data, Weyl diagnostics, potential recovery.
//! - [`exppoly`], [`hermite`], [`moment`]: the exponential moment system
//!   with Hermite repair of split multiple eigenvalues.
//! - [`spectrum`]: eigenvalue computation by contour counting plus Newton.
//! - [`pipeline`]: the end-to-end spectrum -> potential inversion.
//! - [`io`]: text file formats shared with the CLI.
//!
//! All types are plain owned data and all operations are pure functions, so
//! values can be shared freely across threads.

pub mod cauchy;
pub mod delta;
pub mod error;
pub mod exppoly;
pub mod goursat;
pub mod grid;
pub mod ode;
pub mod problem;
pub mod spectrum;

pub use error::{Error, Result};
pub use grid::{inner_product, l2_distance, l2_norm, parity_split, ComplexSignal, Grid, GridKind};
pub use problem::{AsymptoticFit, Branch, RobinReggeProblem, Spectrum};

pub use num_complex::Complex64;
