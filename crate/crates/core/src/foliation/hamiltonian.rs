//! Hamiltonian fields of leafwise-constant functions, the lifted Lie
//! derivative on kernels, and the checks relating them to the bracket.

use num_complex::Complex64;
use serde::Serialize;

use super::bracket::{corrected_derivative, extended_bracket, EnlargedElement};
use super::kernel::{FormDegree, GroupoidKernel};
use super::model::{BaseFunction, FoliatedTorusModel, MFunction};
use crate::error::{Error, Result};

/// `v_h^l(y) = Σ_j Λ^{jl} ∂_{y_j} h(y)`, purely transverse.
#[derive(Clone, Debug)]
pub struct HamiltonianField {
    model: FoliatedTorusModel,
    /// `components[l][iy]`.
    components: Vec<Vec<f64>>,
}

impl HamiltonianField {
    pub fn model(&self) -> &FoliatedTorusModel {
        &self.model
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    pub fn at(&self, iy: usize) -> Vec<f64> {
        self.components.iter().map(|c| c[iy]).collect()
    }

    /// `v_h(a) = Σ_l v_h^l ∂_{y_l} a` for `a` on M.
    pub fn apply(&self, a: &MFunction) -> Result<MFunction> {
        self.model.check_same(a.model())?;
        let grad = a.transverse_gradient();
        let x = self.model.leaf_points();
        let values = (0..a.values().len())
            .map(|i| self.components.iter().zip(&grad).map(|(v, g)| v[i / x] * g[i]).sum())
            .collect();
        MFunction::from_values(&self.model, values)
    }
}

pub fn hamiltonian_field(h: &BaseFunction) -> HamiltonianField {
    let m = h.model();
    let grad = h.gradient();
    let lambda = m.lambda();
    let q = m.q();
    let components = (0..q)
        .map(|l| (0..m.base_points()).map(|iy| (0..q).map(|j| lambda[(j, l)] * grad[j][iy]).sum()).collect())
        .collect();
    HamiltonianField { model: m.clone(), components }
}

/// `(L_{v̂_h}k)(x,x′,y) = Σ_l v_h^l(y) (∂_{y_l}k + ½(κ_l(x,y) + κ_l(x′,y)) k)`.
pub fn lie_derivative_operator(h: &BaseFunction, k: &GroupoidKernel) -> Result<GroupoidKernel> {
    if k.degree() != FormDegree::Scalar {
        return Err(Error::FormDegree);
    }
    let m = k.model();
    m.check_same(h.model())?;
    let v = hamiltonian_field(h);
    let x = m.leaf_points();
    let mut out = vec![Complex64::new(0.0, 0.0); k.component(0).len()];
    for (l, vl) in v.components.iter().enumerate() {
        let d = corrected_derivative(m, k.component(0), l);
        for (i, z) in out.iter_mut().enumerate() {
            *z += vl[i / (x * x)] * d[i];
        }
    }
    GroupoidKernel::scalar(m, out)
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaCheck {
    pub residual: f64,
    /// `sup |Λ(d_Hh, d_Ha)|`, to show the check is not vacuous.
    pub magnitude: f64,
}

/// `sup |Σ Λ^{jl} ∂_jh ∂_la − v_h(a)|`. The left side differentiates `h`
/// spectrally on the grid; `v_h` uses the exact gradient when available.
pub fn check_lemma(h: &BaseFunction, a: &MFunction) -> Result<LemmaCheck> {
    let m = h.model();
    m.check_same(a.model())?;
    let dh = h.to_m_function().transverse_gradient();
    let da = a.transverse_gradient();
    let lambda = m.lambda();
    let rhs = hamiltonian_field(h).apply(a)?;
    let (mut residual, mut magnitude) = (0.0_f64, 0.0_f64);
    for (i, r) in rhs.values().iter().enumerate() {
        let mut lhs = Complex64::new(0.0, 0.0);
        for j in 0..m.q() {
            for l in 0..m.q() {
                lhs += lambda[(j, l)] * dh[j][i] * da[l][i];
            }
        }
        residual = residual.max((lhs - r).norm());
        magnitude = magnitude.max(lhs.norm());
    }
    Ok(LemmaCheck { residual, magnitude })
}

#[derive(Clone, Debug, Serialize)]
pub struct MainTheoremReport {
    /// `‖½(Π(h,k) − Π(k,h)) − L_{v̂_h}k‖_∞`.
    pub kernel_residual: f64,
    /// `‖½(Π(h,a) − Π(a,h)) − v_h(a)‖_∞`, zero when no function part is given.
    pub function_residual: f64,
    pub residual: f64,
    /// `‖L_{v̂_h}k‖_∞`, the size of what is being compared.
    pub magnitude: f64,
    pub n_x: usize,
    pub n_y: usize,
    pub tolerance: f64,
    pub pass: bool,
}

/// `X_h(e) = ½(Π(h,e) − Π(e,h))` in the enlarged algebra.
pub fn hamiltonian_derivation(h: &BaseFunction, e: &EnlargedElement) -> Result<EnlargedElement> {
    e.kernel.model().check_same(h.model())?;
    let e_h = EnlargedElement::from_function(h.to_m_function());
    extended_bracket(&e_h, e)?
        .sub(&extended_bracket(e, &e_h)?)
        .map(|d| d.scale(Complex64::new(0.5, 0.0)))
}

/// Pointwise `½(Π(h,k) − Π(k,h)) − L_{v̂_h}k`.
pub fn main_theorem_residual_kernel(h: &BaseFunction, k: &GroupoidKernel) -> Result<GroupoidKernel> {
    let derivation = hamiltonian_derivation(h, &EnlargedElement::from_kernel(k.clone())?)?;
    derivation.kernel.sub(&lie_derivative_operator(h, k)?)
}

/// Compares the Hamiltonian derivation `½(Π(h,·) − Π(·,h))` of the enlarged
/// algebra with `L_{v̂_h}k + v_h(a)` on `k + a`.
pub fn check_main_theorem(h: &BaseFunction, k: &GroupoidKernel, a: Option<&MFunction>, tolerance: f64) -> Result<MainTheoremReport> {
    let m = k.model();
    m.check_same(h.model())?;
    let e = match a {
        Some(a) => EnlargedElement::new(k.clone(), a.clone())?,
        None => EnlargedElement::from_kernel(k.clone())?,
    };
    let derivation = hamiltonian_derivation(h, &e)?;
    let lie = lie_derivative_operator(h, k)?;
    let kernel_residual = derivation.kernel.sub(&lie)?.norm_inf();
    let function_residual = match a {
        Some(a) => derivation.function.sub(&hamiltonian_field(h).apply(a)?)?.norm_inf(),
        None => derivation.function.norm_inf(),
    };
    let residual = kernel_residual.max(function_residual);
    Ok(MainTheoremReport {
        kernel_residual,
        function_residual,
        residual,
        magnitude: lie.norm_inf(),
        n_x: m.n_x(),
        n_y: m.n_y(),
        tolerance,
        pass: residual <= tolerance,
    })
}

/// Accepts `h` as a function on M, rejecting it unless leafwise constant.
pub fn check_main_theorem_on_m(h: &MFunction, k: &GroupoidKernel, a: Option<&MFunction>, tolerance: f64) -> Result<MainTheoremReport> {
    let base = BaseFunction::from_m_function(h, 1e-12)?;
    check_main_theorem(&base, k, a, tolerance)
}
