//! The fibration `M = Tᵖ × T^q → T^q` with leaves `Tᵖ × {y}`, a leafwise density
//! `α = f dx`, and the standard symplectic form on the base.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::spectral;
use crate::error::{Error, Result};

/// One term `cos·cos(2π(kx·x + ky·y)) + sin·sin(2π(kx·x + ky·y))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierTerm {
    pub kx: Vec<i64>,
    pub ky: Vec<i64>,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

/// Leafwise density coefficient `f(x, y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Density {
    Const {
        value: f64,
    },
    /// `exp(amplitude · sin 2πy₁)`.
    ExpSin {
        amplitude: f64,
    },
    UserFourier {
        constant: f64,
        terms: Vec<FourierTerm>,
    },
}

pub const DENSITY_NAMES: [&str; 3] = ["const", "expsin", "userfourier"];

impl Density {
    /// `user_json` holds `{"constant": c, "terms": [...]}` for `userfourier`.
    pub fn by_name(name: &str, user_json: Option<&str>) -> Result<Self> {
        match name {
            "const" => Ok(Density::Const { value: 1.0 }),
            "expsin" => Ok(Density::ExpSin { amplitude: 1.0 }),
            "userfourier" => {
                #[derive(Deserialize)]
                struct Spec {
                    constant: f64,
                    terms: Vec<FourierTerm>,
                }
                let json = user_json.ok_or_else(|| Error::Config("userfourier density needs coefficients".into()))?;
                let s: Spec = serde_json::from_str(json)?;
                Ok(Density::UserFourier {
                    constant: s.constant,
                    terms: s.terms,
                })
            }
            other => Err(Error::Config(format!("unknown density '{other}' (expected one of {DENSITY_NAMES:?})"))),
        }
    }

    fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            Density::Const { value } => *value,
            Density::ExpSin { amplitude } => (amplitude * (2.0 * PI * y[0]).sin()).exp(),
            Density::UserFourier { constant, terms } => {
                constant
                    + terms
                        .iter()
                        .map(|t| {
                            let phase: f64 = t.kx.iter().zip(x).chain(t.ky.iter().zip(y)).map(|(&k, &c)| k as f64 * c).sum();
                            t.cos * (2.0 * PI * phase).cos() + t.sin * (2.0 * PI * phase).sin()
                        })
                        .sum::<f64>()
            }
        }
    }
}

struct ModelData {
    p: usize,
    q: usize,
    n_x: usize,
    n_y: usize,
    density: Density,
    f: Vec<f64>,
    kappa: Vec<Vec<f64>>,
    omega: DMatrix<f64>,
    lambda: DMatrix<f64>,
}

/// Shared handle to the discretized model. Clones are cheap and compare equal
/// only when they come from the same construction.
#[derive(Clone)]
pub struct FoliatedTorusModel(Arc<ModelData>);

impl fmt::Debug for FoliatedTorusModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FoliatedTorusModel")
            .field("p", &self.0.p)
            .field("q", &self.0.q)
            .field("n_x", &self.0.n_x)
            .field("n_y", &self.0.n_y)
            .field("density", &self.0.density)
            .finish()
    }
}

impl PartialEq for FoliatedTorusModel {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl FoliatedTorusModel {
    pub fn new(p: usize, q: usize, n_x: usize, n_y: usize, density: Density) -> Result<Self> {
        if p == 0 || q == 0 || !q.is_multiple_of(2) {
            return Err(Error::Config(format!("need p ≥ 1 and even q ≥ 2, got p = {p}, q = {q}")));
        }
        if n_x < 4 || n_y < 4 {
            return Err(Error::Config(format!("grids need at least 4 points, got n_x = {n_x}, n_y = {n_y}")));
        }
        let ny = n_y.pow(q as u32);
        let nx = n_x.pow(p as u32);
        let mut f = Vec::with_capacity(ny * nx);
        for iy in 0..ny {
            let y = coords(iy, q, n_y);
            for ix in 0..nx {
                f.push(density.eval(&coords(ix, p, n_x), &y));
            }
        }
        let min = f.iter().copied().fold(f64::INFINITY, f64::min);
        if !(min > 0.0) {
            return Err(Error::NonPositiveDensity(min));
        }
        let log_f: Vec<f64> = f.iter().map(|v| v.ln()).collect();
        let shape = function_shape(p, q, n_x, n_y);
        let kappa = (0..q).map(|j| spectral::derivative_real(&log_f, &shape, j)).collect();
        let mut omega = DMatrix::zeros(q, q);
        for i in 0..q / 2 {
            omega[(2 * i, 2 * i + 1)] = 1.0;
            omega[(2 * i + 1, 2 * i)] = -1.0;
        }
        let lambda = omega.clone().try_inverse().expect("standard symplectic matrix is invertible");
        Ok(Self(Arc::new(ModelData {
            p,
            q,
            n_x,
            n_y,
            density,
            f,
            kappa,
            omega,
            lambda,
        })))
    }

    pub fn p(&self) -> usize {
        self.0.p
    }

    pub fn q(&self) -> usize {
        self.0.q
    }

    pub fn n_x(&self) -> usize {
        self.0.n_x
    }

    pub fn n_y(&self) -> usize {
        self.0.n_y
    }

    pub fn density(&self) -> &Density {
        &self.0.density
    }

    /// Points on one leaf.
    pub fn leaf_points(&self) -> usize {
        self.0.n_x.pow(self.0.p as u32)
    }

    /// Points on the base.
    pub fn base_points(&self) -> usize {
        self.0.n_y.pow(self.0.q as u32)
    }

    /// Samples `f(x, y)` laid out `[y…, x…]`.
    pub fn density_samples(&self) -> &[f64] {
        &self.0.f
    }

    /// `κ_j = ∂_{y_j} log f`, one array per base direction, laid out like the density.
    pub fn mean_curvature_form(&self) -> &[Vec<f64>] {
        &self.0.kappa
    }

    /// `ω = Σ dy_{2i−1} ∧ dy_{2i}` as a matrix `Ω_{ij} = ω(∂_i, ∂_j)`.
    pub fn omega(&self) -> &DMatrix<f64> {
        &self.0.omega
    }

    /// `Λ = Ω⁻¹`, so that `v^l = Σ_j Λ^{jl} ∂_j h` solves `i_v ω = dh`.
    pub fn lambda(&self) -> &DMatrix<f64> {
        &self.0.lambda
    }

    /// Shape `[n_y; q] ++ [n_x; p]` of functions on M.
    pub fn function_shape(&self) -> Vec<usize> {
        function_shape(self.0.p, self.0.q, self.0.n_x, self.0.n_y)
    }

    /// Shape `[n_y; q] ++ [n_x; p] ++ [n_x; p]` of kernels.
    pub fn kernel_shape(&self) -> Vec<usize> {
        let mut s = self.function_shape();
        s.extend(std::iter::repeat_n(self.0.n_x, self.0.p));
        s
    }

    pub fn base_shape(&self) -> Vec<usize> {
        vec![self.0.n_y; self.0.q]
    }

    pub fn base_coords(&self, iy: usize) -> Vec<f64> {
        coords(iy, self.0.q, self.0.n_y)
    }

    pub fn leaf_coords(&self, ix: usize) -> Vec<f64> {
        coords(ix, self.0.p, self.0.n_x)
    }

    pub(crate) fn check_same(&self, other: &Self) -> Result<()> {
        if self != other {
            return Err(Error::ModelMismatch);
        }
        Ok(())
    }
}

fn function_shape(p: usize, q: usize, n_x: usize, n_y: usize) -> Vec<usize> {
    let mut s = vec![n_y; q];
    s.extend(std::iter::repeat_n(n_x, p));
    s
}

/// Grid coordinates in `[0,1)^d` of a row-major flat index.
fn coords(mut flat: usize, d: usize, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; d];
    for c in out.iter_mut().rev() {
        *c = (flat % n) as f64 / n as f64;
        flat /= n;
    }
    out
}

/// A function on M, laid out `[y…, x…]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MFunction {
    model: FoliatedTorusModel,
    values: Vec<Complex64>,
}

impl MFunction {
    pub fn from_fn(model: &FoliatedTorusModel, f: impl Fn(&[f64], &[f64]) -> Complex64) -> Self {
        let (ny, nx) = (model.base_points(), model.leaf_points());
        let mut values = Vec::with_capacity(ny * nx);
        for iy in 0..ny {
            let y = model.base_coords(iy);
            for ix in 0..nx {
                values.push(f(&model.leaf_coords(ix), &y));
            }
        }
        Self { model: model.clone(), values }
    }

    pub fn from_values(model: &FoliatedTorusModel, values: Vec<Complex64>) -> Result<Self> {
        let n = model.base_points() * model.leaf_points();
        if values.len() != n {
            return Err(Error::Shape {
                expected: n,
                got: values.len(),
            });
        }
        Ok(Self { model: model.clone(), values })
    }

    pub fn constant(model: &FoliatedTorusModel, c: Complex64) -> Self {
        Self::from_fn(model, |_, _| c)
    }

    pub fn model(&self) -> &FoliatedTorusModel {
        &self.model
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn at(&self, iy: usize, ix: usize) -> Complex64 {
        self.values[iy * self.model.leaf_points() + ix]
    }

    /// `d_H a = (∂_{y_j} a)_j`.
    pub fn transverse_gradient(&self) -> Vec<Vec<Complex64>> {
        let shape = self.model.function_shape();
        (0..self.model.q()).map(|j| spectral::derivative(&self.values, &shape, j)).collect()
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.model.check_same(&other.model)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Ok(Self {
            model: self.model.clone(),
            values,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.model.check_same(&other.model)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Self {
            model: self.model.clone(),
            values,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.model.check_same(&other.model)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(Self {
            model: self.model.clone(),
            values,
        })
    }

    pub fn norm_inf(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

type Gradient = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A leafwise-constant function `h(y)`, optionally with its exact gradient.
#[derive(Clone)]
pub struct BaseFunction {
    model: FoliatedTorusModel,
    values: Vec<f64>,
    gradient: Option<Vec<Vec<f64>>>,
}

impl fmt::Debug for BaseFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BaseFunction")
            .field("points", &self.values.len())
            .field("exact_gradient", &self.gradient.is_some())
            .finish()
    }
}

pub const BASE_FUNCTION_NAMES: [&str; 3] = ["const", "sin", "mixed"];

impl BaseFunction {
    pub fn from_fn(model: &FoliatedTorusModel, h: impl Fn(&[f64]) -> f64, gradient: Option<Gradient>) -> Self {
        let ny = model.base_points();
        let pts: Vec<Vec<f64>> = (0..ny).map(|iy| model.base_coords(iy)).collect();
        let values = pts.iter().map(|y| h(y)).collect();
        let gradient = gradient.map(|g| {
            let per_point: Vec<Vec<f64>> = pts.iter().map(|y| g(y)).collect();
            (0..model.q()).map(|j| per_point.iter().map(|v| v[j]).collect()).collect()
        });
        Self {
            model: model.clone(),
            values,
            gradient,
        }
    }

    /// `const` (h = 1), `sin` (sin 2πy₁) or `mixed` (sin 2πy₁ + ½ cos 2πy₂).
    pub fn preset(model: &FoliatedTorusModel, name: &str) -> Result<Self> {
        let q = model.q();
        let tau = 2.0 * PI;
        let h = match name {
            "const" => Self::from_fn(model, |_| 1.0, Some(Arc::new(move |_| vec![0.0; q]))),
            "sin" => Self::from_fn(
                model,
                |y| (tau * y[0]).sin(),
                Some(Arc::new(move |y: &[f64]| {
                    let mut g = vec![0.0; q];
                    g[0] = tau * (tau * y[0]).cos();
                    g
                })),
            ),
            "mixed" => Self::from_fn(
                model,
                |y| (tau * y[0]).sin() + 0.5 * (tau * y[1]).cos(),
                Some(Arc::new(move |y: &[f64]| {
                    let mut g = vec![0.0; q];
                    g[0] = tau * (tau * y[0]).cos();
                    g[1] = -0.5 * tau * (tau * y[1]).sin();
                    g
                })),
            ),
            other => {
                return Err(Error::Config(format!(
                    "unknown base function '{other}' (expected one of {BASE_FUNCTION_NAMES:?})"
                )))
            }
        };
        Ok(h)
    }

    /// Accepts a function on M if it does not vary along the leaves.
    pub fn from_m_function(a: &MFunction, tol: f64) -> Result<Self> {
        let model = a.model();
        let (ny, nx) = (model.base_points(), model.leaf_points());
        let mut variation = 0.0_f64;
        let mut values = Vec::with_capacity(ny);
        for iy in 0..ny {
            let v0 = a.at(iy, 0);
            for ix in 1..nx {
                variation = variation.max((a.at(iy, ix) - v0).norm());
            }
            variation = variation.max(v0.im.abs());
            values.push(v0.re);
        }
        if variation > tol {
            return Err(Error::NotLeafwiseConstant(variation));
        }
        Ok(Self {
            model: model.clone(),
            values,
            gradient: None,
        })
    }

    pub fn model(&self) -> &FoliatedTorusModel {
        &self.model
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn has_exact_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    /// `d_H h` by spectral differentiation on the base grid.
    pub fn spectral_gradient(&self) -> Vec<Vec<f64>> {
        let shape = self.model.base_shape();
        (0..self.model.q()).map(|j| spectral::derivative_real(&self.values, &shape, j)).collect()
    }

    /// The exact gradient when one was supplied, otherwise the spectral one.
    pub fn gradient(&self) -> Vec<Vec<f64>> {
        self.gradient.clone().unwrap_or_else(|| self.spectral_gradient())
    }

    /// The same function viewed on M.
    pub fn to_m_function(&self) -> MFunction {
        let nx = self.model.leaf_points();
        let values = self.values.iter().flat_map(|&v| std::iter::repeat_n(Complex64::new(v, 0.0), nx)).collect();
        MFunction {
            model: self.model.clone(),
            values,
        }
    }
}
