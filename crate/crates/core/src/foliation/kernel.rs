//! Kernels on the holonomy groupoid `{(x, x′, y)}` of the fibration, with
//! values in scalars or in transverse forms.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

use super::model::{FoliatedTorusModel, MFunction};
use super::spectral;
use crate::error::{Error, Result};
use crate::rng::SeededRng;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// What a kernel takes values in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FormDegree {
    Scalar,
    /// `q` components `ω_j`.
    OneForm,
    /// Antisymmetric components `ω_{jl}`, `j < l`.
    TwoForm,
    /// Symmetric components `s_{jl}`, `j ≤ l`.
    SymTwo,
}

impl FormDegree {
    pub fn components(self, q: usize) -> usize {
        match self {
            FormDegree::Scalar => 1,
            FormDegree::OneForm => q,
            FormDegree::TwoForm => q * (q - 1) / 2,
            FormDegree::SymTwo => q * (q + 1) / 2,
        }
    }

    pub fn degree(self) -> usize {
        match self {
            FormDegree::Scalar => 0,
            FormDegree::OneForm => 1,
            FormDegree::TwoForm | FormDegree::SymTwo => 2,
        }
    }
}

/// Position of `(j, l)`, `j < l`, among antisymmetric components.
pub fn two_form_index(q: usize, j: usize, l: usize) -> usize {
    debug_assert!(j < l && l < q);
    j * (2 * q - j - 1) / 2 + (l - j - 1)
}

/// Position of `{j, l}` among symmetric components.
pub fn sym_index(q: usize, j: usize, l: usize) -> usize {
    let (a, b) = if j <= l { (j, l) } else { (l, j) };
    a * (2 * q - a + 1) / 2 + (b - a)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupoidKernel {
    model: FoliatedTorusModel,
    degree: FormDegree,
    components: Vec<Vec<Complex64>>,
}

impl GroupoidKernel {
    fn len(model: &FoliatedTorusModel) -> usize {
        let x = model.leaf_points();
        model.base_points() * x * x
    }

    pub fn zeros(model: &FoliatedTorusModel, degree: FormDegree) -> Self {
        let n = Self::len(model);
        Self {
            model: model.clone(),
            degree,
            components: vec![vec![ZERO; n]; degree.components(model.q())],
        }
    }

    pub fn from_components(model: &FoliatedTorusModel, degree: FormDegree, components: Vec<Vec<Complex64>>) -> Result<Self> {
        let want = degree.components(model.q());
        if components.len() != want {
            return Err(Error::Shape {
                expected: want,
                got: components.len(),
            });
        }
        let n = Self::len(model);
        if let Some(c) = components.iter().find(|c| c.len() != n) {
            return Err(Error::Shape { expected: n, got: c.len() });
        }
        Ok(Self {
            model: model.clone(),
            degree,
            components,
        })
    }

    pub fn scalar(model: &FoliatedTorusModel, values: Vec<Complex64>) -> Result<Self> {
        Self::from_components(model, FormDegree::Scalar, vec![values])
    }

    /// Samples `k(x, x′, y)`.
    pub fn from_fn(model: &FoliatedTorusModel, k: impl Fn(&[f64], &[f64], &[f64]) -> Complex64) -> Self {
        let (ny, nx) = (model.base_points(), model.leaf_points());
        let xs: Vec<Vec<f64>> = (0..nx).map(|i| model.leaf_coords(i)).collect();
        let mut v = Vec::with_capacity(ny * nx * nx);
        for iy in 0..ny {
            let y = model.base_coords(iy);
            for x in &xs {
                for xp in &xs {
                    v.push(k(x, xp, &y));
                }
            }
        }
        Self {
            model: model.clone(),
            degree: FormDegree::Scalar,
            components: vec![v],
        }
    }

    /// Random kernel with all frequencies bounded by `bandwidth`.
    pub fn random(model: &FoliatedTorusModel, degree: FormDegree, bandwidth: usize, rng: &mut SeededRng) -> Self {
        let shape = model.kernel_shape();
        let components = (0..degree.components(model.q()))
            .map(|_| spectral::random_band_limited(&shape, bandwidth, rng))
            .collect();
        Self {
            model: model.clone(),
            degree,
            components,
        }
    }

    pub fn model(&self) -> &FoliatedTorusModel {
        &self.model
    }

    pub fn degree(&self) -> FormDegree {
        self.degree
    }

    pub fn components(&self) -> &[Vec<Complex64>] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &[Complex64] {
        &self.components[i]
    }

    pub fn into_components(self) -> Vec<Vec<Complex64>> {
        self.components
    }

    /// Scalar values; panics on form-valued kernels.
    pub fn values(&self) -> &[Complex64] {
        assert_eq!(self.degree, FormDegree::Scalar, "values() on a form-valued kernel");
        &self.components[0]
    }

    pub fn at(&self, component: usize, iy: usize, ix: usize, ixp: usize) -> Complex64 {
        let x = self.model.leaf_points();
        self.components[component][(iy * x + ix) * x + ixp]
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        self.model.check_same(&other.model)?;
        if self.degree != other.degree {
            return Err(Error::FormDegree);
        }
        Ok(())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        self.check_same(other)?;
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| f(*x, *y)).collect())
            .collect();
        Ok(Self {
            model: self.model.clone(),
            degree: self.degree,
            components,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        out.components.iter_mut().flatten().for_each(|z| *z *= s);
        out
    }

    pub fn norm_inf(&self) -> f64 {
        self.components.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `(k₁∗k₂)(x,x′,y) = ∫ k₁(x,s,y) k₂(s,x′,y) f(s,y) ds` by the trapezoid rule.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        if self.degree != FormDegree::Scalar || other.degree != FormDegree::Scalar {
            return Err(Error::FormDegree);
        }
        self.model.check_same(&other.model)?;
        Ok(Self {
            model: self.model.clone(),
            degree: FormDegree::Scalar,
            components: vec![convolve_raw(&self.model, &self.components[0], &other.components[0])],
        })
    }

    /// `k*(x,x′,y) = conj k(x′,x,y)`, componentwise for forms.
    pub fn involution(&self) -> Self {
        let x = self.model.leaf_points();
        let components = self
            .components
            .iter()
            .map(|c| {
                let mut out = vec![ZERO; c.len()];
                for (b, block) in c.chunks(x * x).enumerate() {
                    for i in 0..x {
                        for j in 0..x {
                            out[b * x * x + j * x + i] = block[i * x + j].conj();
                        }
                    }
                }
                out
            })
            .collect();
        Self {
            model: self.model.clone(),
            degree: self.degree,
            components,
        }
    }

    /// `(a·k)(x,x′,y) = a(x,y) k(x,x′,y)`.
    pub fn left_action(&self, a: &MFunction) -> Result<Self> {
        self.model.check_same(a.model())?;
        Ok(self.map_points(|iy, ix, _| a.at(iy, ix)))
    }

    /// `(k·a)(x,x′,y) = k(x,x′,y) a(x′,y)`.
    pub fn right_action(&self, a: &MFunction) -> Result<Self> {
        self.model.check_same(a.model())?;
        Ok(self.map_points(|iy, _, ixp| a.at(iy, ixp)))
    }

    /// Multiplies every component pointwise by `w(iy, ix, ixp)`.
    pub(crate) fn map_points(&self, w: impl Fn(usize, usize, usize) -> Complex64) -> Self {
        let x = self.model.leaf_points();
        let mut out = self.clone();
        for c in out.components.iter_mut() {
            for (i, z) in c.iter_mut().enumerate() {
                let (iy, rest) = (i / (x * x), i % (x * x));
                *z *= w(iy, rest / x, rest % x);
            }
        }
        out
    }

    /// Convolution combined with the exterior product of the form parts.
    /// For two 1-forms the result is the 2-form `(ω₁∧ω₂)_{jl} = ω₁_j∗ω₂_l − ω₁_l∗ω₂_j`.
    pub fn wedge_convolve(&self, other: &Self) -> Result<Self> {
        self.model.check_same(&other.model)?;
        use FormDegree::*;
        let (d1, d2) = (self.degree, other.degree);
        if d1 == SymTwo || d2 == SymTwo {
            return Err(Error::FormDegree);
        }
        if d1.degree() + d2.degree() > 2 {
            return Err(Error::FormDegreeOverflow(d1.degree(), d2.degree()));
        }
        let m = &self.model;
        let components = match (d1, d2) {
            (Scalar, _) => other.components.iter().map(|c| convolve_raw(m, &self.components[0], c)).collect(),
            (_, Scalar) => self.components.iter().map(|c| convolve_raw(m, c, &other.components[0])).collect(),
            (OneForm, OneForm) => {
                let q = m.q();
                let mut out = Vec::with_capacity(TwoForm.components(q));
                for j in 0..q {
                    for l in j + 1..q {
                        let a = convolve_raw(m, &self.components[j], &other.components[l]);
                        let b = convolve_raw(m, &self.components[l], &other.components[j]);
                        out.push(a.iter().zip(&b).map(|(x, y)| x - y).collect());
                    }
                }
                out
            }
            _ => unreachable!("degree sum checked above"),
        };
        let degree = match d1.degree() + d2.degree() {
            0 => Scalar,
            1 => OneForm,
            _ => TwoForm,
        };
        Ok(Self {
            model: m.clone(),
            degree,
            components,
        })
    }

    /// CSV with columns `ix, ixp, iy1, …, iyq, re, im` for one component.
    pub fn to_csv(&self, component: usize) -> String {
        let m = &self.model;
        let (x, q, ny) = (m.leaf_points(), m.q(), m.n_y());
        let mut s = String::from("ix,ixp");
        for j in 0..q {
            let _ = write!(s, ",iy{}", j + 1);
        }
        s.push_str(",re,im\n");
        for (i, z) in self.components[component].iter().enumerate() {
            let (iy, rest) = (i / (x * x), i % (x * x));
            let _ = write!(s, "{},{}", rest / x, rest % x);
            let mut digits = vec![0; q];
            let mut t = iy;
            for d in digits.iter_mut().rev() {
                *d = t % ny;
                t /= ny;
            }
            for d in digits {
                let _ = write!(s, ",{d}");
            }
            let _ = writeln!(s, ",{:.17e},{:.17e}", z.re, z.im);
        }
        s
    }
}

/// Fibrewise `K₁(y) · diag(f(·,y)/N) · K₂(y)` on raw arrays.
pub(crate) fn convolve_raw(model: &FoliatedTorusModel, a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let x = model.leaf_points();
    let f = model.density_samples();
    let weight = 1.0 / x as f64;
    let mut out = vec![ZERO; a.len()];
    let mut row = vec![ZERO; x];
    for iy in 0..model.base_points() {
        let base = iy * x * x;
        let w = &f[iy * x..(iy + 1) * x];
        for i in 0..x {
            row.iter_mut().for_each(|z| *z = ZERO);
            for s in 0..x {
                let c = a[base + i * x + s] * (w[s] * weight);
                if c == ZERO {
                    continue;
                }
                let brow = &b[base + s * x..base + (s + 1) * x];
                for (r, bv) in row.iter_mut().zip(brow) {
                    *r += c * bv;
                }
            }
            out[base + i * x..base + (i + 1) * x].copy_from_slice(&row);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::foliation::model::Density;
    use crate::rng::seeded;
    use std::f64::consts::PI;

    fn model(n: usize, density: Density) -> FoliatedTorusModel {
        FoliatedTorusModel::new(1, 2, n, n, density).unwrap()
    }

    fn expsin(n: usize) -> FoliatedTorusModel {
        model(n, Density::ExpSin { amplitude: 1.0 })
    }

    #[test]
    fn index_helpers() {
        assert_eq!(two_form_index(4, 0, 1), 0);
        assert_eq!(two_form_index(4, 2, 3), 5);
        assert_eq!(sym_index(3, 0, 0), 0);
        assert_eq!(sym_index(3, 2, 2), 5);
        assert_eq!(sym_index(3, 2, 1), sym_index(3, 1, 2));
    }

    #[test]
    fn separable_convolution() {
        let m = model(16, Density::Const { value: 1.0 });
        let tau = 2.0 * PI;
        let u = |x: f64| Complex64::new((tau * x).cos(), 0.3);
        let v = |s: f64| Complex64::new(1.0 + (tau * s).sin(), -0.2 * (2.0 * tau * s).cos());
        let w = |s: f64| Complex64::new((tau * s).sin(), 0.5);
        let z = |xp: f64| Complex64::new(0.1, (tau * xp).cos());
        let k1 = GroupoidKernel::from_fn(&m, |x, s, _| u(x[0]) * v(s[0]).conj());
        let k2 = GroupoidKernel::from_fn(&m, |s, xp, _| w(s[0]) * z(xp[0]));
        let n = m.n_x();
        let inner: Complex64 = (0..n).map(|i| v(i as f64 / n as f64).conj() * w(i as f64 / n as f64)).sum::<Complex64>() / n as f64;
        let expect = GroupoidKernel::from_fn(&m, |x, xp, _| u(x[0]) * z(xp[0]) * inner);
        assert!(k1.convolve(&k2).unwrap().sub(&expect).unwrap().norm_inf() < 1e-14);
    }

    #[test]
    fn associativity_and_bilinearity() {
        let m = expsin(32);
        let mut rng = seeded(1);
        let k: Vec<GroupoidKernel> = (0..3).map(|_| GroupoidKernel::random(&m, FormDegree::Scalar, 2, &mut rng)).collect();
        let l = k[0].convolve(&k[1]).unwrap().convolve(&k[2]).unwrap();
        let r = k[0].convolve(&k[1].convolve(&k[2]).unwrap()).unwrap();
        assert!(l.sub(&r).unwrap().norm_inf() <= 1e-10);
        let s = Complex64::new(0.3, -1.2);
        let lhs = k[0].scale(s).add(&k[1]).unwrap().convolve(&k[2]).unwrap();
        let rhs = k[0].convolve(&k[2]).unwrap().scale(s).add(&k[1].convolve(&k[2]).unwrap()).unwrap();
        assert!(lhs.sub(&rhs).unwrap().norm_inf() <= 1e-13);
    }

    #[test]
    fn actions_are_compatible() {
        let m = expsin(16);
        let mut rng = seeded(2);
        let (k1, k2) = (
            GroupoidKernel::random(&m, FormDegree::Scalar, 2, &mut rng),
            GroupoidKernel::random(&m, FormDegree::Scalar, 2, &mut rng),
        );
        let a = MFunction::from_fn(&m, |x, y| Complex64::new((2.0 * PI * (x[0] + y[1])).cos(), y[0]));
        let l = k1.left_action(&a).unwrap().convolve(&k2).unwrap();
        let r = k1.convolve(&k2).unwrap().left_action(&a).unwrap();
        assert!(l.sub(&r).unwrap().norm_inf() <= 1e-12);
        let l = k1.convolve(&k2).unwrap().right_action(&a).unwrap();
        let r = k1.convolve(&k2.right_action(&a).unwrap()).unwrap();
        assert!(l.sub(&r).unwrap().norm_inf() <= 1e-12);
        // (k·a)∗k₂ = k∗(a·k₂)
        let l = k1.right_action(&a).unwrap().convolve(&k2).unwrap();
        let r = k1.convolve(&k2.left_action(&a).unwrap()).unwrap();
        assert!(l.sub(&r).unwrap().norm_inf() <= 1e-12);
    }

    #[test]
    fn involution_properties() {
        let m = expsin(16);
        let mut rng = seeded(3);
        let (k1, k2) = (
            GroupoidKernel::random(&m, FormDegree::Scalar, 2, &mut rng),
            GroupoidKernel::random(&m, FormDegree::Scalar, 2, &mut rng),
        );
        assert_eq!(k1.involution().involution(), k1);
        let l = k1.convolve(&k2).unwrap().involution();
        let r = k2.involution().convolve(&k1.involution()).unwrap();
        assert!(l.sub(&r).unwrap().norm_inf() <= 1e-12);
        let sym = GroupoidKernel::from_fn(&m, |x, xp, y| Complex64::new((2.0 * PI * (x[0] - xp[0])).cos() + y[0], 0.0));
        assert!(sym.involution().sub(&sym).unwrap().norm_inf() == 0.0);
    }

    #[test]
    fn wedge_products() {
        let m = model(8, Density::Const { value: 1.0 });
        let mut rng = seeded(4);
        let k = GroupoidKernel::random(&m, FormDegree::Scalar, 1, &mut rng);
        let k2 = GroupoidKernel::random(&m, FormDegree::Scalar, 1, &mut rng);
        assert_eq!(k.wedge_convolve(&k2).unwrap(), k.convolve(&k2).unwrap());
        // separable 1-form: ω_j = c_j · g with constant coefficients, so ω∧ω = 0
        // and (ω∧η)_{12} = c₁d₂ g∗g − c₂d₁ g∗g for η_j = d_j g.
        let g = GroupoidKernel::random(&m, FormDegree::Scalar, 1, &mut rng);
        let gg = g.convolve(&g).unwrap();
        let form = |c: [f64; 2]| {
            GroupoidKernel::from_components(
                &m,
                FormDegree::OneForm,
                c.iter().map(|&cj| g.scale(Complex64::new(cj, 0.0)).into_components().remove(0)).collect(),
            )
            .unwrap()
        };
        let (w, e) = (form([2.0, -1.0]), form([0.5, 3.0]));
        assert!(w.wedge_convolve(&w).unwrap().norm_inf() < 1e-14);
        let we = w.wedge_convolve(&e).unwrap();
        assert_eq!(we.degree(), FormDegree::TwoForm);
        let expect = gg.scale(Complex64::new(2.0 * 3.0 - -0.5, 0.0));
        assert!((0..we.component(0).len()).all(|i| (we.component(0)[i] - expect.values()[i]).norm() < 1e-13));
        let two = w.wedge_convolve(&e).unwrap();
        assert!(matches!(two.wedge_convolve(&w), Err(Error::FormDegreeOverflow(2, 1))));
    }

    #[test]
    fn csv_layout() {
        let m = model(4, Density::Const { value: 1.0 });
        let k = GroupoidKernel::from_fn(&m, |x, xp, y| Complex64::new(x[0] + 10.0 * xp[0], y[1]));
        let csv = k.to_csv(0);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "ix,ixp,iy1,iy2,re,im");
        assert_eq!(csv.lines().count(), 1 + 4 * 4 * 4 * 4);
        let second: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(&second[..4], &["0", "0", "0", "0"]);
    }
}
