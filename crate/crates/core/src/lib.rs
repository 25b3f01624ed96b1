//! Verification workbench for noncommutative Poisson geometry.
//!
//! * [`algebra`]: structure-constant algebras, center, derivations.
//! * [`hochschild`]: cochains, the differential `b`, pre-Lie product,
//!   Gerstenhaber bracket, coboundary solving and low-degree cohomology.
//! * [`poisson`]: noncommutative Poisson structures, Hamiltonian derivations
//!   and the bracket they induce on the center.
//! * [`torus`]: the truncated noncommutative torus.
//! * [`classical`]: Poisson bivectors on ℝᵈ evaluated pointwise.
//! * [`foliation`]: the convolution algebra of a discretized fibration
//!   foliation with transverse symplectic structure.
//! * [`suites`]: verification suites, convergence studies and flow demos.

pub mod algebra;
pub mod classical;
pub mod error;
pub mod foliation;
pub mod hochschild;
mod linalg;
pub mod poisson;
pub mod report;
pub mod rng;
pub mod suites;
pub mod torus;

pub use algebra::{Algebra, Element, StructureConstants};
pub use error::{Error, Result};
pub use hochschild::Cochain;
pub use poisson::PoissonStructure;
pub use report::{CheckEntry, VerificationReport};
pub use torus::TorusElement;

pub use num_complex::Complex64;
