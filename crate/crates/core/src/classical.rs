//! Poisson bivectors on ℝᵈ, evaluated pointwise with finite differences.
//!
//! Fields are plain closures. Derivatives use fourth-order central stencils
//! with a step `h` (default `1e-3`), so nested brackets such as `{f,{g,h}}`
//! are themselves fields and can be differentiated again.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::quasi_random_points;

pub const DEFAULT_STEP: f64 = 1e-3;
pub const DEFAULT_SAMPLES: usize = 100;
/// Tolerance for the torsion and antisymmetry assertions.
pub const STRUCTURE_TOL: f64 = 1e-12;
pub const SYMMETRY_TOL: f64 = 1e-9;

type Fx<T> = Arc<dyn Fn(&[f64]) -> T + Send + Sync>;

#[derive(Clone)]
pub struct ScalarField {
    dim: usize,
    f: Fx<f64>,
}

impl ScalarField {
    pub fn new(dim: usize, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self { dim, f: Arc::new(f) }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Self::new(dim, move |_| c)
    }

    /// The coordinate function `x_i`.
    pub fn coordinate(dim: usize, i: usize) -> Self {
        Self::new(dim, move |x| x[i])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    pub fn product(&self, other: &ScalarField) -> Result<ScalarField> {
        same_dim(self.dim, other.dim)?;
        let (a, b) = (self.f.clone(), other.f.clone());
        Ok(Self::new(self.dim, move |x| a(x) * b(x)))
    }
}

#[derive(Clone)]
pub struct BivectorField {
    dim: usize,
    f: Fx<DMatrix<f64>>,
}

impl BivectorField {
    pub fn new(dim: usize, f: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static) -> Self {
        Self { dim, f: Arc::new(f) }
    }

    /// A constant bivector, checked for antisymmetry.
    pub fn constant(lambda: DMatrix<f64>) -> Result<Self> {
        let d = lambda.nrows();
        if lambda.ncols() != d {
            return Err(Error::Dimension(d, lambda.ncols()));
        }
        let asym = (&lambda + lambda.transpose()).amax();
        if asym > STRUCTURE_TOL {
            return Err(Error::Config(format!("bivector is not antisymmetric (defect {asym:.3e})")));
        }
        Ok(Self::new(d, move |_| lambda.clone()))
    }

    /// `Λ¹² = 1` on ℝ².
    pub fn canonical2d() -> Self {
        Self::constant(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])).expect("antisymmetric")
    }

    /// The Lie–Poisson structure of so(3)*: `Λ^{ij} = ε_{ijk} x_k`.
    pub fn so3star() -> Self {
        Self::new(3, |x| DMatrix::from_row_slice(3, 3, &[0.0, x[2], -x[1], -x[2], 0.0, x[0], x[1], -x[0], 0.0]))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, x: &[f64]) -> DMatrix<f64> {
        (self.f)(x)
    }

    pub fn antisymmetry_defect(&self, x: &[f64]) -> f64 {
        let l = self.eval(x);
        (&l + l.transpose()).amax()
    }
}

/// Christoffel symbols `Γᵏ_{ij}` stored as `gamma[(k*d + i)*d + j]`.
#[derive(Clone)]
pub struct Connection {
    dim: usize,
    f: Fx<Vec<f64>>,
}

impl Connection {
    pub fn new(dim: usize, f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        Self { dim, f: Arc::new(f) }
    }

    pub fn flat(dim: usize) -> Self {
        Self::new(dim, move |_| vec![0.0; dim * dim * dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        (self.f)(x)
    }

    pub fn torsion(&self, x: &[f64]) -> f64 {
        let d = self.dim;
        let g = self.eval(x);
        let mut worst = 0.0_f64;
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    worst = worst.max((g[(k * d + i) * d + j] - g[(k * d + j) * d + i]).abs());
                }
            }
        }
        worst
    }
}

#[derive(Clone)]
pub struct VectorField {
    dim: usize,
    f: Fx<Vec<f64>>,
}

impl VectorField {
    pub fn new(dim: usize, f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        Self { dim, f: Arc::new(f) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        (self.f)(x)
    }
}

fn same_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Dimension(a, b));
    }
    Ok(())
}

/// Fourth-order central difference of `g` along coordinate `i`.
fn d1<T, G>(g: G, x: &[f64], i: usize, h: f64) -> T
where
    G: Fn(&[f64]) -> T,
    T: std::ops::Sub<Output = T> + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
{
    let mut y = x.to_vec();
    let mut at = |s: f64| {
        y[i] = x[i] + s * h;
        g(&y)
    };
    let (p2, p1, m1, m2) = (at(2.0), at(1.0), at(-1.0), at(-2.0));
    (p1 - m1) * (8.0 / (12.0 * h)) + (m2 - p2) * (1.0 / (12.0 * h))
}

pub fn gradient(f: &ScalarField, x: &[f64], h: f64) -> Vec<f64> {
    (0..f.dim).map(|i| d1(|y| f.eval(y), x, i, h)).collect()
}

/// Second derivatives: the five-point stencil on the diagonal, nested first
/// differences off it.
pub fn hessian(f: &ScalarField, x: &[f64], h: f64) -> DMatrix<f64> {
    let d = f.dim;
    let mut out = DMatrix::zeros(d, d);
    let mut y = x.to_vec();
    for i in 0..d {
        let mut at = |s: f64| {
            y[i] = x[i] + s * h;
            let v = f.eval(&y);
            y[i] = x[i];
            v
        };
        out[(i, i)] = (-at(2.0) + 16.0 * at(1.0) - 30.0 * at(0.0) + 16.0 * at(-1.0) - at(-2.0)) / (12.0 * h * h);
        for j in 0..i {
            let v = d1(|z| d1(|w| f.eval(w), z, j, h), x, i, h);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

/// `{f, g}(x) = Σ Λ^{ij} ∂_i f ∂_j g`.
pub fn poisson_bracket(f: &ScalarField, g: &ScalarField, lambda: &BivectorField, x: &[f64], h: f64) -> Result<f64> {
    same_dim(f.dim, g.dim)?;
    same_dim(f.dim, lambda.dim)?;
    same_dim(f.dim, x.len())?;
    let (df, dg) = (gradient(f, x, h), gradient(g, x, h));
    let l = lambda.eval(x);
    let mut s = 0.0;
    for i in 0..f.dim {
        for j in 0..f.dim {
            s += l[(i, j)] * df[i] * dg[j];
        }
    }
    Ok(s)
}

/// `{f, g}` as a field, for nesting.
pub fn bracket_field(f: &ScalarField, g: &ScalarField, lambda: &BivectorField, h: f64) -> Result<ScalarField> {
    same_dim(f.dim, g.dim)?;
    same_dim(f.dim, lambda.dim)?;
    let (f, g, lambda) = (f.clone(), g.clone(), lambda.clone());
    Ok(ScalarField::new(f.dim, move |x| {
        poisson_bracket(&f, &g, &lambda, x, h).expect("dimensions checked")
    }))
}

/// `Σ_α (Λ^{αi}∂_αΛ^{jk} + Λ^{αj}∂_αΛ^{ki} + Λ^{αk}∂_αΛ^{ij})` at `x`.
pub fn schouten_jacobiator(lambda: &BivectorField, (i, j, k): (usize, usize, usize), x: &[f64], h: f64) -> Result<f64> {
    let d = lambda.dim;
    same_dim(d, x.len())?;
    if i >= d || j >= d || k >= d || i == j || j == k || i == k {
        return Err(Error::InvalidIndex(format!("({i}, {j}, {k}) in dimension {d}")));
    }
    let l = lambda.eval(x);
    let dl: Vec<DMatrix<f64>> = (0..d).map(|a| d1(|y| lambda.eval(y), x, a, h)).collect();
    let mut s = 0.0;
    for (a, dla) in dl.iter().enumerate() {
        s += l[(a, i)] * dla[(j, k)] + l[(a, j)] * dla[(k, i)] + l[(a, k)] * dla[(i, j)];
    }
    Ok(s)
}

/// Largest jacobiator over all distinct index triples and the given points.
pub fn schouten_residual(lambda: &BivectorField, points: &[Vec<f64>], h: f64) -> Result<f64> {
    let d = lambda.dim;
    let mut worst = 0.0_f64;
    for x in points {
        for i in 0..d {
            for j in i + 1..d {
                for k in j + 1..d {
                    worst = worst.max(schouten_jacobiator(lambda, (i, j, k), x, h)?.abs());
                }
            }
        }
    }
    Ok(worst)
}

/// `X_f^j = Σ_i Λ^{ij} ∂_i f`, so that `X_f(g) = {f, g}`.
pub fn hamiltonian_vector_field(f: &ScalarField, lambda: &BivectorField, h: f64) -> Result<VectorField> {
    same_dim(f.dim, lambda.dim)?;
    let (f, lambda) = (f.clone(), lambda.clone());
    let d = f.dim;
    Ok(VectorField::new(d, move |x| {
        let df = gradient(&f, x, h);
        let l = lambda.eval(x);
        (0..d).map(|j| (0..d).map(|i| l[(i, j)] * df[i]).sum()).collect()
    }))
}

/// `X(g)(x) = Σ X^j ∂_j g`.
pub fn apply_vector_field(v: &VectorField, g: &ScalarField, x: &[f64], h: f64) -> Result<f64> {
    same_dim(v.dim, g.dim)?;
    Ok(v.eval(x).iter().zip(gradient(g, x, h)).map(|(a, b)| a * b).sum())
}

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// `max_t |H(x_t) − H(x_0)| / max(1, |H(x_0)|)` for the supplied quantity.
    pub drift: Option<f64>,
}

impl Trajectory {
    pub fn last(&self) -> &[f64] {
        self.states.last().expect("trajectory holds the initial state")
    }

    pub fn to_csv(&self) -> String {
        let d = self.states.first().map_or(0, Vec::len);
        let mut s = String::from("t");
        for i in 0..d {
            s.push_str(&format!(",x{}", i + 1));
        }
        s.push('\n');
        for (t, x) in self.times.iter().zip(&self.states) {
            s.push_str(&format!("{t:.9e}"));
            for v in x {
                s.push_str(&format!(",{v:.15e}"));
            }
            s.push('\n');
        }
        s
    }
}

/// Classical Runge–Kutta with `ceil(T/dt)` equal steps.
pub fn integrate_flow(v: &VectorField, x0: &[f64], t_end: f64, dt: f64, conserved: Option<&ScalarField>) -> Result<Trajectory> {
    same_dim(v.dim, x0.len())?;
    if !(dt > 0.0) || !(t_end >= 0.0) {
        return Err(Error::Config(format!("need dt > 0 and T ≥ 0, got dt = {dt}, T = {t_end}")));
    }
    let steps = (t_end / dt).ceil().max(0.0) as usize;
    let step = if steps == 0 { 0.0 } else { t_end / steps as f64 };
    let axpy = |x: &[f64], a: f64, k: &[f64]| -> Vec<f64> { x.iter().zip(k).map(|(p, q)| p + a * q).collect() };
    let mut x = x0.to_vec();
    let mut times = vec![0.0];
    let mut states = vec![x.clone()];
    let h0 = conserved.map(|c| c.eval(x0));
    let mut drift = h0.map(|_| 0.0_f64);
    for n in 1..=steps {
        let k1 = v.eval(&x);
        let k2 = v.eval(&axpy(&x, 0.5 * step, &k1));
        let k3 = v.eval(&axpy(&x, 0.5 * step, &k2));
        let k4 = v.eval(&axpy(&x, step, &k3));
        for i in 0..x.len() {
            x[i] += step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t = n as f64 * step;
        if x.iter().any(|z| !z.is_finite()) {
            return Err(Error::NonFinite(t));
        }
        if let (Some(c), Some(e0), Some(dr)) = (conserved, h0, drift.as_mut()) {
            *dr = dr.max((c.eval(&x) - e0).abs() / e0.abs().max(1.0));
        }
        times.push(t);
        states.push(x.clone());
    }
    Ok(Trajectory { times, states, drift })
}

/// `(∇²f)_{ij} = ∂_i∂_j f − Σ_k Γᵏ_{ij} ∂_k f`.
pub fn hessian_with_connection(f: &ScalarField, gamma: &Connection, x: &[f64], h: f64) -> Result<DMatrix<f64>> {
    same_dim(f.dim, gamma.dim)?;
    same_dim(f.dim, x.len())?;
    let torsion = gamma.torsion(x);
    if torsion > STRUCTURE_TOL {
        return Err(Error::Torsion(torsion));
    }
    let d = f.dim;
    let g = gamma.eval(x);
    let df = gradient(f, x, h);
    let mut out = hessian(f, x, h);
    for i in 0..d {
        for j in 0..d {
            out[(i, j)] -= (0..d).map(|k| g[(k * d + i) * d + j] * df[k]).sum::<f64>();
        }
    }
    let asym = (&out - out.transpose()).amax();
    debug_assert!(asym <= SYMMETRY_TOL, "connection Hessian asymmetric by {asym:.3e}");
    Ok(out)
}

/// `⟨Λ⊗Λ, ∇²f ⊗ ∇²g⟩ = Σ Λ^{ij}Λ^{kl} (∇²f)_{ik} (∇²g)_{jl}`, without normalization.
pub fn classical_pi1(f: &ScalarField, g: &ScalarField, lambda: &BivectorField, gamma: &Connection, x: &[f64], h: f64) -> Result<f64> {
    same_dim(f.dim, g.dim)?;
    same_dim(f.dim, lambda.dim)?;
    let a = hessian_with_connection(f, gamma, x, h)?;
    let b = hessian_with_connection(g, gamma, x, h)?;
    let l = lambda.eval(x);
    // Σ_{ij} Λ^{ij} (A Λ B^T)_{ij}... written out for clarity of indices
    let d = f.dim;
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            if l[(i, j)] == 0.0 {
                continue;
            }
            for k in 0..d {
                for m in 0..d {
                    s += l[(i, j)] * l[(k, m)] * a[(i, k)] * b[(j, m)];
                }
            }
        }
    }
    Ok(s)
}

/// Result of comparing `{f,{g,h}} − {{f,g},h}` with `b(λ·Π₁)(f,g,h)` over samples.
#[derive(Clone, Debug, Serialize)]
pub struct ClassicalJacobiFit {
    /// Least-squares λ.
    pub fitted_lambda: f64,
    /// Largest defect with λ = −½.
    pub residual_at_minus_half: f64,
    /// Largest defect with the fitted λ.
    pub residual_fitted: f64,
    /// Largest magnitude of the Jacobiator itself, to show the check is not vacuous.
    pub jacobiator_scale: f64,
}

/// Samples the (P2) relation for the classical Π₁ at the given points.
pub fn fit_jacobi_witness(fgh: [&ScalarField; 3], lambda: &BivectorField, gamma: &Connection, points: &[Vec<f64>], h: f64) -> Result<ClassicalJacobiFit> {
    let [f, g, k] = fgh;
    // Nested differences amplify rounding by 1/h per level; the outer level uses a coarser step.
    let outer = h.max(1e-2);
    let gk = bracket_field(g, k, lambda, h)?;
    let fg = bracket_field(f, g, lambda, h)?;
    let (fgp, gkp) = (f.product(g)?, g.product(k)?);
    let mut jac = Vec::with_capacity(points.len());
    let mut cob = Vec::with_capacity(points.len());
    for x in points {
        let j = poisson_bracket(f, &gk, lambda, x, outer)? - poisson_bracket(&fg, k, lambda, x, outer)?;
        let p1 = |a: &ScalarField, b: &ScalarField| classical_pi1(a, b, lambda, gamma, x, h);
        let b = f.eval(x) * p1(g, k)? - p1(&fgp, k)? + p1(f, &gkp)? - p1(f, g)? * k.eval(x);
        jac.push(j);
        cob.push(b);
    }
    let bb: f64 = cob.iter().map(|b| b * b).sum();
    let fitted_lambda = if bb > 0.0 {
        jac.iter().zip(&cob).map(|(j, b)| j * b).sum::<f64>() / bb
    } else {
        0.0
    };
    let worst = |lam: f64| jac.iter().zip(&cob).map(|(j, b)| (j - lam * b).abs()).fold(0.0, f64::max);
    Ok(ClassicalJacobiFit {
        fitted_lambda,
        residual_at_minus_half: worst(-0.5),
        residual_fitted: worst(fitted_lambda),
        jacobiator_scale: jac.iter().map(|j| j.abs()).fold(0.0, f64::max),
    })
}

/// Seeded quasi-random points in `[−1, 1]ᵈ`.
pub fn sample_points(d: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    quasi_random_points(d, count, seed)
}

/// A monomial term `coef · Π x_i^{powers_i}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Monomial {
    pub coef: f64,
    pub powers: Vec<u32>,
}

/// A user system: constant bivector and polynomial Hamiltonian.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolynomialSystem {
    pub lambda: Vec<Vec<f64>>,
    pub hamiltonian: Vec<Monomial>,
}

impl PolynomialSystem {
    pub fn from_json(s: &str) -> Result<Self> {
        let sys: Self = serde_json::from_str(s)?;
        let d = sys.lambda.len();
        if d == 0 || sys.lambda.iter().any(|r| r.len() != d) {
            return Err(Error::Config("lambda must be a non-empty square matrix".into()));
        }
        if let Some(m) = sys.hamiltonian.iter().find(|m| m.powers.len() != d) {
            return Err(Error::Dimension(m.powers.len(), d));
        }
        Ok(sys)
    }

    fn polynomial(&self) -> ScalarField {
        let terms = self.hamiltonian.clone();
        ScalarField::new(self.lambda.len(), move |x| {
            terms
                .iter()
                .map(|m| m.coef * m.powers.iter().zip(x).map(|(&p, &xi)| xi.powi(p as i32)).product::<f64>())
                .sum()
        })
    }
}

/// A named Hamiltonian system from the built-in library.
#[derive(Clone)]
pub struct ClassicalSystem {
    pub name: String,
    pub lambda: BivectorField,
    pub hamiltonian: ScalarField,
    /// A Casimir whose drift is tracked in flow demos.
    pub casimir: Option<ScalarField>,
    pub default_x0: Vec<f64>,
}

pub const SYSTEM_NAMES: [&str; 4] = ["canonical2d", "so3star", "harmonic", "userpolynomial"];

impl ClassicalSystem {
    /// `user_json` is only consulted for `userpolynomial`.
    pub fn by_name(name: &str, user_json: Option<&str>) -> Result<Self> {
        let sys = match name {
            // pendulum
            "canonical2d" => Self {
                name: name.into(),
                lambda: BivectorField::canonical2d(),
                hamiltonian: ScalarField::new(2, |x| 0.5 * x[1] * x[1] + (1.0 - x[0].cos())),
                casimir: None,
                default_x0: vec![1.0, 0.0],
            },
            "so3star" => Self {
                name: name.into(),
                lambda: BivectorField::so3star(),
                hamiltonian: ScalarField::coordinate(3, 2),
                casimir: Some(ScalarField::new(3, |x| x.iter().map(|v| v * v).sum())),
                default_x0: vec![1.0, 0.0, 0.5],
            },
            "harmonic" => Self {
                name: name.into(),
                lambda: BivectorField::canonical2d(),
                hamiltonian: ScalarField::new(2, |x| 0.5 * (x[0] * x[0] + x[1] * x[1])),
                casimir: None,
                default_x0: vec![1.0, 0.0],
            },
            "userpolynomial" => {
                let json = user_json.ok_or_else(|| Error::Config("userpolynomial needs a JSON system file".into()))?;
                let p = PolynomialSystem::from_json(json)?;
                let d = p.lambda.len();
                let flat: Vec<f64> = p.lambda.iter().flatten().copied().collect();
                Self {
                    name: name.into(),
                    lambda: BivectorField::constant(DMatrix::from_row_slice(d, d, &flat))?,
                    hamiltonian: p.polynomial(),
                    casimir: None,
                    default_x0: vec![0.5; d],
                }
            }
            other => return Err(Error::Config(format!("unknown classical system '{other}' (expected one of {SYSTEM_NAMES:?})"))),
        };
        Ok(sys)
    }

    pub fn dim(&self) -> usize {
        self.lambda.dim()
    }

    pub fn vector_field(&self, h: f64) -> VectorField {
        hamiltonian_vector_field(&self.hamiltonian, &self.lambda, h).expect("library systems are consistent")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const H: f64 = DEFAULT_STEP;

    fn pts(d: usize) -> Vec<Vec<f64>> {
        sample_points(d, 20, 11)
    }

    #[test]
    fn canonical_and_antisymmetry() {
        let l = BivectorField::canonical2d();
        let (x1, x2) = (ScalarField::coordinate(2, 0), ScalarField::coordinate(2, 1));
        let f = ScalarField::new(2, |x| (x[0] * x[1]).sin());
        for x in pts(2) {
            assert!((poisson_bracket(&x1, &x2, &l, &x, H).unwrap() - 1.0).abs() < 1e-12);
            assert!(poisson_bracket(&f, &f, &l, &x, H).unwrap().abs() < 1e-14);
        }
    }

    #[test]
    fn so3_bracket_of_coordinates() {
        let l = BivectorField::so3star();
        let (x1, x2) = (ScalarField::coordinate(3, 0), ScalarField::coordinate(3, 1));
        for x in pts(3) {
            assert!((poisson_bracket(&x1, &x2, &l, &x, H).unwrap() - x[2]).abs() <= 1e-9);
        }
    }

    #[test]
    fn dimension_mismatch() {
        let l = BivectorField::canonical2d();
        let f = ScalarField::coordinate(3, 0);
        assert!(matches!(poisson_bracket(&f, &f, &l, &[0.0; 3], H), Err(Error::Dimension(3, 2))));
    }

    #[test]
    fn schouten() {
        let c = BivectorField::constant(DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 2.0, -1.0, 0.0, 3.0, -2.0, -3.0, 0.0])).unwrap();
        assert_eq!(schouten_residual(&c, &pts(3), H).unwrap(), 0.0);
        // Independent oracle for so(3)*: with Λ^{ab} = ε_{abc}x_c, ∂_αΛ^{jk} = ε_{jkα},
        // so the cyclic sum is Σ_α ε_{αic}x_c ε_{jkα} + cyclic, which vanishes by the ε-identity.
        assert!(schouten_residual(&BivectorField::so3star(), &pts(3), H).unwrap() <= 1e-9);
        // A non-Poisson bivector in 3D: Λ¹² = x₃, Λ²³ = x₂, Λ¹³ = 0. Only Λ^{α1}∂_αΛ^{23} = Λ^{21} = −x₃
        // survives; the other two cyclic terms meet Λ³¹ = 0 and Λ³³ = 0.
        let bad = BivectorField::new(3, |x| DMatrix::from_row_slice(3, 3, &[0.0, x[2], 0.0, -x[2], 0.0, x[1], 0.0, -x[1], 0.0]));
        let x = [0.3, -0.2, 0.7];
        let oracle = -x[2];
        assert!((schouten_jacobiator(&bad, (0, 1, 2), &x, H).unwrap() - oracle).abs() <= 1e-9);
        assert!(matches!(schouten_jacobiator(&c, (0, 0, 1), &x, H), Err(Error::InvalidIndex(_))));
        assert!(matches!(schouten_jacobiator(&c, (0, 1, 3), &x, H), Err(Error::InvalidIndex(_))));
    }

    #[test]
    fn hamiltonian_field_of_oscillator() {
        let l = BivectorField::canonical2d();
        let h = ScalarField::new(2, |x| 0.5 * (x[0] * x[0] + x[1] * x[1]));
        let g = ScalarField::new(2, |x| x[0].exp() * x[1]);
        let xh = hamiltonian_vector_field(&h, &l, H).unwrap();
        for x in pts(2) {
            let v = xh.eval(&x);
            assert!((v[0] + x[1]).abs() < 1e-10 && (v[1] - x[0]).abs() < 1e-10);
            let lhs = apply_vector_field(&xh, &g, &x, H).unwrap();
            assert!((lhs - poisson_bracket(&h, &g, &l, &x, H).unwrap()).abs() <= 1e-9);
            assert!(apply_vector_field(&xh, &h, &x, H).unwrap().abs() <= 1e-12);
        }
        let c = hamiltonian_vector_field(&ScalarField::constant(2, 3.0), &l, H).unwrap();
        assert_eq!(c.eval(&[0.2, 0.1]), vec![0.0, 0.0]);
    }

    #[test]
    fn bracket_is_a_derivation() {
        let l = BivectorField::so3star();
        let f = ScalarField::new(3, |x| x[0] * x[1] + x[2].sin());
        let g = ScalarField::new(3, |x| (x[0] - x[2]).cos());
        let k = ScalarField::new(3, |x| x[1].exp());
        let gk = g.product(&k).unwrap();
        for x in pts(3) {
            let lhs = poisson_bracket(&f, &gk, &l, &x, H).unwrap();
            let rhs = poisson_bracket(&f, &g, &l, &x, H).unwrap() * k.eval(&x) + g.eval(&x) * poisson_bracket(&f, &k, &l, &x, H).unwrap();
            assert!((lhs - rhs).abs() <= 1e-8);
        }
    }

    #[test]
    fn jacobi_on_so3() {
        let l = BivectorField::so3star();
        let f = ScalarField::new(3, |x| x[0] * x[0] + x[1]);
        let g = ScalarField::new(3, |x| x[1] * x[2]);
        let k = ScalarField::new(3, |x| (x[0] + x[2]).sin());
        let gk = bracket_field(&g, &k, &l, H).unwrap();
        let kf = bracket_field(&k, &f, &l, H).unwrap();
        let fg = bracket_field(&f, &g, &l, H).unwrap();
        for x in pts(3) {
            let j = poisson_bracket(&f, &gk, &l, &x, 1e-2).unwrap()
                + poisson_bracket(&g, &kf, &l, &x, 1e-2).unwrap()
                + poisson_bracket(&k, &fg, &l, &x, 1e-2).unwrap();
            assert!(j.abs() <= 1e-6, "{j}");
        }
    }

    #[test]
    fn fourth_order_convergence() {
        let l = BivectorField::so3star();
        let f = ScalarField::new(3, |x| (x[0] + 2.0 * x[1]).sin());
        let g = ScalarField::new(3, |x| (x[1] * x[2]).exp());
        let x: [f64; 3] = [0.3, -0.4, 0.5];
        // exact: ∇f = cos(u)(1,2,0), ∇g = e^{x₂x₃}(0, x₃, x₂)
        let u = x[0] + 2.0 * x[1];
        let df = [u.cos(), 2.0 * u.cos(), 0.0];
        let e = (x[1] * x[2]).exp();
        let dg = [0.0, x[2] * e, x[1] * e];
        let lm = l.eval(&x);
        let exact: f64 = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| lm[(i, j)] * df[i] * dg[j]).sum();
        let err = |h: f64| (poisson_bracket(&f, &g, &l, &x, h).unwrap() - exact).abs();
        let (e1, e2) = (err(0.1), err(0.05));
        assert!(e1 / e2 >= 8.0, "{e1} {e2}");
    }

    #[test]
    fn oscillator_flow_returns() {
        let sys = ClassicalSystem::by_name("harmonic", None).unwrap();
        let tr = integrate_flow(&sys.vector_field(H), &[1.0, 0.0], 2.0 * std::f64::consts::PI, 1e-3, Some(&sys.hamiltonian)).unwrap();
        let end = tr.last();
        assert!((end[0] - 1.0).abs() <= 1e-8 && end[1].abs() <= 1e-8, "{end:?}");
        let long = integrate_flow(&sys.vector_field(H), &[1.0, 0.0], 10.0, 1e-3, Some(&sys.hamiltonian)).unwrap();
        assert!(long.drift.unwrap() <= 1e-8);
    }

    #[test]
    fn zero_field_and_bad_step() {
        let z = VectorField::new(2, |_| vec![0.0, 0.0]);
        let tr = integrate_flow(&z, &[0.3, 0.4], 1.0, 0.1, None).unwrap();
        assert!(tr.states.iter().all(|s| s == &vec![0.3, 0.4]));
        assert!(integrate_flow(&z, &[0.3, 0.4], 1.0, 0.0, None).is_err());
        let blow = VectorField::new(1, |x| vec![x[0] * x[0]]);
        assert!(matches!(integrate_flow(&blow, &[1.0], 2.0, 1e-2, None), Err(Error::NonFinite(_))));
    }

    #[test]
    fn so3_rotation_conserves_casimir() {
        let sys = ClassicalSystem::by_name("so3star", None).unwrap();
        let x0 = [1.0, 0.0, 0.5];
        let t = 1.3;
        let tr = integrate_flow(&sys.vector_field(H), &x0, t, 1e-3, sys.casimir.as_ref()).unwrap();
        assert!(tr.drift.unwrap() <= 1e-8);
        // X_{x₃}^j = Λ^{3j}: ẋ₁ = x₂, ẋ₂ = −x₁, a rotation about the x₃ axis.
        let end = tr.last();
        assert!((end[0] - t.cos()).abs() <= 1e-8 && (end[1] + t.sin()).abs() <= 1e-8 && (end[2] - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn connection_hessian() {
        let flat = Connection::flat(2);
        let f = ScalarField::new(2, |x| x[0] * x[1]);
        let hs = hessian_with_connection(&f, &flat, &[0.2, 0.3], H).unwrap();
        assert!((hs[(0, 1)] - 1.0).abs() < 1e-9 && hs[(0, 0)].abs() < 1e-9 && hs[(1, 1)].abs() < 1e-9);
        let lin = ScalarField::new(2, |x| 3.0 * x[0] - x[1]);
        assert!(hessian_with_connection(&lin, &flat, &[0.2, 0.3], H).unwrap().amax() < 1e-9);
        // Γ¹₁₁ = c: (∇²x₁²)₁₁ = 2 − c·2x₁
        let c = 0.7;
        let gamma = Connection::new(2, move |_| {
            let mut g = vec![0.0; 8];
            g[0] = c;
            g
        });
        let sq = ScalarField::new(2, |x| x[0] * x[0]);
        let x = [0.4, -0.1];
        let hs = hessian_with_connection(&sq, &gamma, &x, H).unwrap();
        assert!((hs[(0, 0)] - (2.0 - 2.0 * c * x[0])).abs() <= 1e-8);
        let twisted = Connection::new(2, |_| {
            let mut g = vec![0.0; 8];
            g[1] = 1.0; // Γ¹₁₂ without Γ¹₂₁
            g
        });
        assert!(matches!(hessian_with_connection(&sq, &twisted, &x, H), Err(Error::Torsion(_))));
    }

    #[test]
    fn pi1_examples() {
        let l = BivectorField::canonical2d();
        let flat = Connection::flat(2);
        let f = ScalarField::new(2, |x| 0.5 * x[0] * x[0]);
        let g = ScalarField::new(2, |x| 0.5 * x[1] * x[1]);
        let lin = ScalarField::new(2, |x| x[0] + 2.0 * x[1]);
        let x = [0.1, 0.2];
        assert!((classical_pi1(&f, &g, &l, &flat, &x, H).unwrap() - 1.0).abs() < 1e-8);
        assert!(classical_pi1(&lin, &g, &l, &flat, &x, H).unwrap().abs() < 1e-8);
    }

    #[test]
    fn p2_fits_minus_half() {
        let l = BivectorField::canonical2d();
        let flat = Connection::flat(2);
        let f = ScalarField::new(2, |x| (x[0] + 0.5 * x[1]).sin());
        let g = ScalarField::new(2, |x| x[0] * x[1] * x[1]);
        let k = ScalarField::new(2, |x| (0.7 * x[0] - x[1]).exp());
        let fit = fit_jacobi_witness([&f, &g, &k], &l, &flat, &sample_points(2, 12, 5), H).unwrap();
        assert!(fit.jacobiator_scale > 0.1);
        assert!((fit.fitted_lambda + 0.5).abs() < 1e-6, "{fit:?}");
        assert!(fit.residual_at_minus_half <= 1e-6, "{fit:?}");
    }

    #[test]
    fn user_polynomial_system() {
        let json = r#"{"lambda": [[0, 1], [-1, 0]], "hamiltonian": [{"coef": 0.5, "powers": [2, 0]}, {"coef": 0.5, "powers": [0, 2]}]}"#;
        let sys = ClassicalSystem::by_name("userpolynomial", Some(json)).unwrap();
        assert!((sys.hamiltonian.eval(&[1.0, 2.0]) - 2.5).abs() < 1e-15);
        assert!(ClassicalSystem::by_name("userpolynomial", None).is_err());
        assert!(ClassicalSystem::by_name("nope", None).is_err());
        let bad = r#"{"lambda": [[0, 1], [-1, 0]], "hamiltonian": [{"coef": 1, "powers": [1]}]}"#;
        assert!(PolynomialSystem::from_json(bad).is_err());
    }
}
