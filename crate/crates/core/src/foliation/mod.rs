//! A fibration `M = Tᵖ × T^q → T^q` with leaves `Tᵖ × {y}`, symplectic base
//! and trivial holonomy, discretized on uniform periodic grids.
//!
//! Kernels `k(x, x′, y)` form the convolution algebra of the holonomy
//! groupoid with respect to the leafwise density `f(x,y) dx`. Derivatives in
//! `y` are spectral and leaf integrals use the trapezoid rule.

pub mod bracket;
pub mod hamiltonian;
pub mod kernel;
pub mod model;
pub mod spectral;

pub use bracket::{
    extended_bracket, extended_p1_residual, leibniz_residual, p1_residual, p2_check, poisson_bracket_kernels, second_differential, transverse_differential,
    witness_kernels, EnlargedElement, P2Check,
};
pub use hamiltonian::{
    check_lemma, check_main_theorem, hamiltonian_derivation, hamiltonian_field, lie_derivative_operator, main_theorem_residual_kernel, HamiltonianField,
    LemmaCheck, MainTheoremReport,
};
pub use kernel::{FormDegree, GroupoidKernel};
pub use model::{BaseFunction, Density, FoliatedTorusModel, MFunction};
