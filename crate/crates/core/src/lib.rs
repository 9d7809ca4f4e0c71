//! Generalized convolution quadrature (gCQ) on variable time grids.
//!
//! The crate evaluates one-sided convolutions `K(∂t) g` and solves convolution
//! equations `K(∂t) g = φ` for a Laplace-domain transfer symbol `K(s)`. The
//! discrete operator is built from the trapezoidal rule, variable-step BDF2 or
//! backward Euler applied to `u' = s u + g` at every node of a complex contour.
//!
//! Module map:
//! - [`elliptic`]: complete elliptic integral `K(m)` and Jacobi `sn`, `cn`, `dn`.
//! - [`mesh`]: validated time grids, including algebraically graded meshes.
//! - [`contour`]: the Jacobi-parametrized circle quadrature used for every
//!   contour integral.
//! - [`symbol`]: transfer symbols, a small kernel expression language and a
//!   registry of built-in kernels.
//! - [`gcq`]: one-step recursions and the forward/backward solve drivers, plus
//!   the uniform-step CQ baseline.
//! - [`divdiff`]: explicit gCQ weights, classical and modified divided
//!   differences and the executable identities built on them.
//! - [`harness`]: reference problems, convergence studies, CSV output and the
//!   identity check suites.

pub mod contour;
pub mod divdiff;
pub mod elliptic;
mod error;
pub mod gcq;
pub mod harness;
pub mod mesh;
pub mod sum;
pub mod symbol;

pub use num_complex::Complex64;

pub use contour::{ContourGeometry, ContourParams, ContourRule};
pub use elliptic::{EllipticParameter, JacobiTriple};
pub use error::{GcqError, Result};
pub use gcq::{BackwardIndex, Bdf2Coefficients, SolveOptions, StepperKind};
pub use mesh::{MeshStats, TimeMesh};
pub use symbol::{SymbolExpr, TransferSymbol};
