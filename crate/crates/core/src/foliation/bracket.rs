//! The corrected transverse differential `D_H`, the bracket `Π_H`, its
//! second-order witness, and the unital enlargement `k + a`.

use num_complex::Complex64;

use super::kernel::{convolve_raw, sym_index, FormDegree, GroupoidKernel};
use super::model::{FoliatedTorusModel, MFunction};
use super::spectral;
use crate::error::{Error, Result};

/// `D_j k = ∂_{y_j} k + ½(κ_j(x,y) + κ_j(x′,y)) k` on a raw scalar array.
pub(crate) fn corrected_derivative(model: &FoliatedTorusModel, data: &[Complex64], j: usize) -> Vec<Complex64> {
    let mut out = spectral::derivative(data, &model.kernel_shape(), j);
    let x = model.leaf_points();
    let kappa = &model.mean_curvature_form()[j];
    for (i, z) in out.iter_mut().enumerate() {
        let (iy, rest) = (i / (x * x), i % (x * x));
        let c = 0.5 * (kappa[iy * x + rest / x] + kappa[iy * x + rest % x]);
        *z += c * data[i];
    }
    out
}

/// `D_H`: scalar kernels go to 1-forms, 1-forms to 2-forms via
/// `(D_H ω)_{jl} = D_j ω_l − D_l ω_j`.
pub fn transverse_differential(k: &GroupoidKernel) -> Result<GroupoidKernel> {
    let m = k.model();
    let q = m.q();
    match k.degree() {
        FormDegree::Scalar => {
            let c = (0..q).map(|j| corrected_derivative(m, k.component(0), j)).collect();
            GroupoidKernel::from_components(m, FormDegree::OneForm, c)
        }
        FormDegree::OneForm => {
            let mut c = Vec::new();
            for j in 0..q {
                for l in j + 1..q {
                    let a = corrected_derivative(m, k.component(l), j);
                    let b = corrected_derivative(m, k.component(j), l);
                    c.push(a.iter().zip(&b).map(|(x, y)| x - y).collect());
                }
            }
            GroupoidKernel::from_components(m, FormDegree::TwoForm, c)
        }
        _ => Err(Error::FormDegree),
    }
}

/// `(D²k)_{jm} = D_j D_m k`, stored on `j ≤ m`. The `D_j` commute because
/// `κ` is a gradient, so the tensor is symmetric.
pub fn second_differential(k: &GroupoidKernel) -> Result<GroupoidKernel> {
    if k.degree() != FormDegree::Scalar {
        return Err(Error::FormDegree);
    }
    let m = k.model();
    let q = m.q();
    let first: Vec<Vec<Complex64>> = (0..q).map(|j| corrected_derivative(m, k.component(0), j)).collect();
    let mut c = Vec::with_capacity(q * (q + 1) / 2);
    for j in 0..q {
        for l in j..q {
            c.push(corrected_derivative(m, &first[l], j));
        }
    }
    GroupoidKernel::from_components(m, FormDegree::SymTwo, c)
}

/// `max_{j<m} ‖D_j D_m k − D_m D_j k‖_∞`.
pub fn second_differential_symmetry_defect(k: &GroupoidKernel) -> Result<f64> {
    if k.degree() != FormDegree::Scalar {
        return Err(Error::FormDegree);
    }
    let m = k.model();
    let q = m.q();
    let first: Vec<Vec<Complex64>> = (0..q).map(|j| corrected_derivative(m, k.component(0), j)).collect();
    let mut defect = 0.0_f64;
    for j in 0..q {
        for l in j + 1..q {
            let a = corrected_derivative(m, &first[l], j);
            let b = corrected_derivative(m, &first[j], l);
            defect = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(defect, f64::max);
        }
    }
    Ok(defect)
}

fn require_scalar(k: &GroupoidKernel) -> Result<()> {
    if k.degree() != FormDegree::Scalar {
        return Err(Error::FormDegree);
    }
    Ok(())
}

fn accumulate(acc: &mut [Complex64], add: &[Complex64], c: f64) {
    for (a, b) in acc.iter_mut().zip(add) {
        *a += c * b;
    }
}

/// `Π_H(k₁,k₂) = Σ Λ^{jl} (D_Hk₁)_j ∗ (D_Hk₂)_l`.
pub fn poisson_bracket_kernels(k1: &GroupoidKernel, k2: &GroupoidKernel) -> Result<GroupoidKernel> {
    require_scalar(k1)?;
    require_scalar(k2)?;
    let m = k1.model();
    m.check_same(k2.model())?;
    let (d1, d2) = (transverse_differential(k1)?, transverse_differential(k2)?);
    let lambda = m.lambda();
    let mut out = vec![Complex64::new(0.0, 0.0); k1.component(0).len()];
    for j in 0..m.q() {
        for l in 0..m.q() {
            let c = lambda[(j, l)];
            if c != 0.0 {
                accumulate(&mut out, &convolve_raw(m, d1.component(j), d2.component(l)), c);
            }
        }
    }
    GroupoidKernel::scalar(m, out)
}

/// `Π₁(k₁,k₂) = −½ Σ Λ^{jl} Λ^{mn} (D²k₁)_{jm} ∗ (D²k₂)_{ln}`.
pub fn witness_kernels(k1: &GroupoidKernel, k2: &GroupoidKernel) -> Result<GroupoidKernel> {
    require_scalar(k1)?;
    require_scalar(k2)?;
    let m = k1.model();
    m.check_same(k2.model())?;
    let (s1, s2) = (second_differential(k1)?, second_differential(k2)?);
    let q = m.q();
    let lambda = m.lambda();
    let mut out = vec![Complex64::new(0.0, 0.0); k1.component(0).len()];
    for j in 0..q {
        for l in 0..q {
            if lambda[(j, l)] == 0.0 {
                continue;
            }
            for a in 0..q {
                for b in 0..q {
                    let c = -0.5 * lambda[(j, l)] * lambda[(a, b)];
                    if c != 0.0 {
                        accumulate(
                            &mut out,
                            &convolve_raw(m, s1.component(sym_index(q, j, a)), s2.component(sym_index(q, l, b))),
                            c,
                        );
                    }
                }
            }
        }
    }
    GroupoidKernel::scalar(m, out)
}

/// Hochschild coboundary `(bβ)(k₁,k₂,k₃) = k₁∗β(k₂,k₃) − β(k₁∗k₂,k₃) + β(k₁,k₂∗k₃) − β(k₁,k₂)∗k₃`
/// of a bilinear operation on scalar kernels.
pub fn kernel_coboundary(
    beta: impl Fn(&GroupoidKernel, &GroupoidKernel) -> Result<GroupoidKernel>,
    k1: &GroupoidKernel,
    k2: &GroupoidKernel,
    k3: &GroupoidKernel,
) -> Result<GroupoidKernel> {
    let t1 = k1.convolve(&beta(k2, k3)?)?;
    let t2 = beta(&k1.convolve(k2)?, k3)?;
    let t3 = beta(k1, &k2.convolve(k3)?)?;
    let t4 = beta(k1, k2)?.convolve(k3)?;
    t1.sub(&t2)?.add(&t3)?.sub(&t4)
}

/// `‖(k₁∗k₂)∗k₃ − k₁∗(k₂∗k₃)‖_∞`.
pub fn associativity_residual(k1: &GroupoidKernel, k2: &GroupoidKernel, k3: &GroupoidKernel) -> Result<f64> {
    let l = k1.convolve(k2)?.convolve(k3)?;
    let r = k1.convolve(&k2.convolve(k3)?)?;
    Ok(l.sub(&r)?.norm_inf())
}

/// `‖(k₁∗k₂)* − k₂*∗k₁*‖_∞`.
pub fn involution_residual(k1: &GroupoidKernel, k2: &GroupoidKernel) -> Result<f64> {
    let l = k1.convolve(k2)?.involution();
    let r = k2.involution().convolve(&k1.involution())?;
    Ok(l.sub(&r)?.norm_inf())
}

/// `‖D_H(k₁∗k₂) − D_Hk₁∗k₂ − k₁∗D_Hk₂‖_∞`.
pub fn leibniz_residual(k1: &GroupoidKernel, k2: &GroupoidKernel) -> Result<f64> {
    let lhs = transverse_differential(&k1.convolve(k2)?)?;
    let a = transverse_differential(k1)?.wedge_convolve(k2)?;
    let b = k1.wedge_convolve(&transverse_differential(k2)?)?;
    Ok(lhs.sub(&a)?.sub(&b)?.norm_inf())
}

/// Graded Leibniz rule `D_H(k∗ω) = D_Hk∧ω + k∗D_Hω` for a 1-form kernel `ω`.
pub fn graded_leibniz_residual(k: &GroupoidKernel, omega: &GroupoidKernel) -> Result<f64> {
    require_scalar(k)?;
    if omega.degree() != FormDegree::OneForm {
        return Err(Error::FormDegree);
    }
    let lhs = transverse_differential(&k.wedge_convolve(omega)?)?;
    let a = transverse_differential(k)?.wedge_convolve(omega)?;
    let b = k.wedge_convolve(&transverse_differential(omega)?)?;
    Ok(lhs.sub(&a)?.sub(&b)?.norm_inf())
}

/// `‖(bΠ_H)(k₁,k₂,k₃)‖_∞`, the cocycle condition.
pub fn p1_residual(k1: &GroupoidKernel, k2: &GroupoidKernel, k3: &GroupoidKernel) -> Result<f64> {
    Ok(kernel_coboundary(poisson_bracket_kernels, k1, k2, k3)?.norm_inf())
}

/// Jacobiator, witness coboundary and their difference.
#[derive(Clone, Debug)]
pub struct P2Check {
    pub residual: f64,
    pub jacobiator_norm: f64,
    pub coboundary_norm: f64,
}

/// Compares `Π(k₁,Π(k₂,k₃)) − Π(Π(k₁,k₂),k₃)` with `(bΠ₁)(k₁,k₂,k₃)`.
pub fn p2_check(k1: &GroupoidKernel, k2: &GroupoidKernel, k3: &GroupoidKernel) -> Result<P2Check> {
    let j = poisson_bracket_kernels(k1, &poisson_bracket_kernels(k2, k3)?)?.sub(&poisson_bracket_kernels(&poisson_bracket_kernels(k1, k2)?, k3)?)?;
    let b = kernel_coboundary(witness_kernels, k1, k2, k3)?;
    Ok(P2Check {
        residual: j.sub(&b)?.norm_inf(),
        jacobiator_norm: j.norm_inf(),
        coboundary_norm: b.norm_inf(),
    })
}

/// An element `k + a` of the unital enlargement, `a` acting by multiplication.
#[derive(Clone, Debug, PartialEq)]
pub struct EnlargedElement {
    pub kernel: GroupoidKernel,
    pub function: MFunction,
}

impl EnlargedElement {
    pub fn new(kernel: GroupoidKernel, function: MFunction) -> Result<Self> {
        require_scalar(&kernel)?;
        kernel.model().check_same(function.model())?;
        Ok(Self { kernel, function })
    }

    pub fn from_kernel(kernel: GroupoidKernel) -> Result<Self> {
        let f = MFunction::constant(kernel.model(), Complex64::new(0.0, 0.0));
        Self::new(kernel, f)
    }

    pub fn from_function(function: MFunction) -> Self {
        let k = GroupoidKernel::zeros(function.model(), FormDegree::Scalar);
        Self { kernel: k, function }
    }

    /// `(k₁+a₁)(k₂+a₂) = k₁∗k₂ + a₁·k₂ + k₁·a₂ + a₁a₂`.
    pub fn product(&self, other: &Self) -> Result<Self> {
        let k = self
            .kernel
            .convolve(&other.kernel)?
            .add(&other.kernel.left_action(&self.function)?)?
            .add(&self.kernel.right_action(&other.function)?)?;
        Ok(Self {
            kernel: k,
            function: self.function.mul(&other.function)?,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            kernel: self.kernel.add(&other.kernel)?,
            function: self.function.add(&other.function)?,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            kernel: self.kernel.sub(&other.kernel)?,
            function: self.function.sub(&other.function)?,
        })
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let values = self.function.values().iter().map(|z| z * s).collect();
        let function = MFunction::from_values(self.function.model(), values).expect("same shape");
        Self {
            kernel: self.kernel.scale(s),
            function,
        }
    }

    pub fn norm_inf(&self) -> f64 {
        self.kernel.norm_inf().max(self.function.norm_inf())
    }

    /// Kernel part `(D_Hk)_j`, function part `∂_{y_j}a`.
    fn differential(&self) -> (Vec<Vec<Complex64>>, Vec<Vec<Complex64>>) {
        let m = self.kernel.model();
        let dk = (0..m.q()).map(|j| corrected_derivative(m, self.kernel.component(0), j)).collect();
        (dk, self.function.transverse_gradient())
    }
}

/// `Π_H(k₁,k₂) + Λ(d_Ha₁, D_Hk₂) + Λ(D_Hk₁, d_Ha₂) + Λ(d_Ha₁, d_Ha₂)`.
/// In the mixed terms `d_Ha₁` is evaluated at the range `(x,y)` and `d_Ha₂`
/// at the source `(x′,y)`; the last term is a function on M.
pub fn extended_bracket(e1: &EnlargedElement, e2: &EnlargedElement) -> Result<EnlargedElement> {
    let m = e1.kernel.model();
    m.check_same(e2.kernel.model())?;
    let (dk1, da1) = e1.differential();
    let (dk2, da2) = e2.differential();
    let lambda = m.lambda();
    let x = m.leaf_points();
    let n = e1.kernel.component(0).len();
    let mut kernel = vec![Complex64::new(0.0, 0.0); n];
    let mut function = vec![Complex64::new(0.0, 0.0); m.base_points() * x];
    for j in 0..m.q() {
        for l in 0..m.q() {
            let c = lambda[(j, l)];
            if c == 0.0 {
                continue;
            }
            accumulate(&mut kernel, &convolve_raw(m, &dk1[j], &dk2[l]), c);
            for (i, z) in kernel.iter_mut().enumerate() {
                let (iy, rest) = (i / (x * x), i % (x * x));
                let (r, s) = (iy * x + rest / x, iy * x + rest % x);
                *z += c * (da1[j][r] * dk2[l][i] + dk1[j][i] * da2[l][s]);
            }
            for (i, z) in function.iter_mut().enumerate() {
                *z += c * da1[j][i] * da2[l][i];
            }
        }
    }
    Ok(EnlargedElement {
        kernel: GroupoidKernel::scalar(m, kernel)?,
        function: MFunction::from_values(m, function)?,
    })
}

/// `‖(bΠ)(e₁,e₂,e₃)‖_∞` for the extended bracket on the enlarged algebra.
pub fn extended_p1_residual(e1: &EnlargedElement, e2: &EnlargedElement, e3: &EnlargedElement) -> Result<f64> {
    let t1 = e1.product(&extended_bracket(e2, e3)?)?;
    let t2 = extended_bracket(&e1.product(e2)?, e3)?;
    let t3 = extended_bracket(e1, &e2.product(e3)?)?;
    let t4 = extended_bracket(e1, e2)?.product(e3)?;
    Ok(t1.sub(&t2)?.add(&t3)?.sub(&t4)?.norm_inf())
}
