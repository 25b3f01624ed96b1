//! Noncommutative Poisson structures: a Hochschild 2-cocycle Π together with a
//! 2-cochain Π₁ bounding its Jacobiator, Hamiltonian derivations of central
//! elements, and the bracket they induce on the center.

use num_complex::Complex64;

use crate::algebra::{Algebra, StructureConstants};
use crate::error::{Error, Result};
use crate::hochschild::{self, CoboundarySolution, Cochain};
use crate::linalg::{self, CMatrix};
use crate::rng::seeded;

/// Leibniz (cocycle) residual allowed for a Poisson structure.
pub const LEIBNIZ_TOL: f64 = 1e-10;
/// Jacobi-witness residual allowed for a Poisson structure.
pub const JACOBI_TOL: f64 = 1e-9;
/// Centrality threshold for Hamiltonians.
pub const CENTRAL_TOL: f64 = 1e-10;
/// Threshold for derived properties of Hamiltonian derivations.
pub const DERIVED_TOL: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const HALF: Complex64 = Complex64::new(0.5, 0.0);

/// `Π(e_i, v)` for a 2-cochain tensor.
fn eval_basis_vec(d: usize, pi: &[Complex64], i: usize, v: &[Complex64], w: Complex64, out: &mut [Complex64]) {
    for (m, vm) in v.iter().enumerate() {
        if *vm == ZERO {
            continue;
        }
        let s = w * vm;
        let row = &pi[(i * d + m) * d..(i * d + m + 1) * d];
        for (o, x) in out.iter_mut().zip(row) {
            *o += s * x;
        }
    }
}

/// `Π(v, e_j)` for a 2-cochain tensor.
fn eval_vec_basis(d: usize, pi: &[Complex64], v: &[Complex64], j: usize, w: Complex64, out: &mut [Complex64]) {
    for (m, vm) in v.iter().enumerate() {
        if *vm == ZERO {
            continue;
        }
        let s = w * vm;
        let row = &pi[(m * d + j) * d..(m * d + j + 1) * d];
        for (o, x) in out.iter_mut().zip(row) {
            *o += s * x;
        }
    }
}

fn pi_row(d: usize, pi: &[Complex64], i: usize, j: usize) -> &[Complex64] {
    &pi[(i * d + j) * d..(i * d + j + 1) * d]
}

/// `a₁Π(a₂,a₃) − Π(a₁a₂,a₃) + Π(a₁,a₂a₃) − Π(a₁,a₂)a₃` on basis triple `(i,j,k)`,
/// accumulated with weight `w`.
fn leibniz_defect_into(sc: &StructureConstants, pi: &[Complex64], (i, j, k): (usize, usize, usize), w: Complex64, out: &mut [Complex64]) {
    let d = sc.dim();
    sc.left_basis_mul_into(i, pi_row(d, pi, j, k), w, out);
    for &(m, c) in sc.basis_product(i, j) {
        for (o, x) in out.iter_mut().zip(pi_row(d, pi, m, k)) {
            *o -= w * c * x;
        }
    }
    for &(m, c) in sc.basis_product(j, k) {
        for (o, x) in out.iter_mut().zip(pi_row(d, pi, i, m)) {
            *o += w * c * x;
        }
    }
    sc.right_basis_mul_into(pi_row(d, pi, i, j), k, -w, out);
}

/// Sup over admitted basis triples of the (P1) defect.
pub fn leibniz_residual_on(sc: &StructureConstants, pi: &[Complex64], admit: impl Fn(usize, usize, usize) -> bool) -> f64 {
    let d = sc.dim();
    let mut worst = 0.0_f64;
    let mut buf = vec![ZERO; d];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                if !admit(i, j, k) {
                    continue;
                }
                buf.iter_mut().for_each(|z| *z = ZERO);
                leibniz_defect_into(sc, pi, (i, j, k), Complex64::new(1.0, 0.0), &mut buf);
                worst = worst.max(linalg::max_abs(&buf));
            }
        }
    }
    worst
}

/// `Π(a₁,Π(a₂,a₃)) − Π(Π(a₁,a₂),a₃)` on a basis triple, accumulated with weight `w`.
fn jacobiator_into(d: usize, pi: &[Complex64], (i, j, k): (usize, usize, usize), w: Complex64, out: &mut [Complex64]) {
    eval_basis_vec(d, pi, i, pi_row(d, pi, j, k), w, out);
    eval_vec_basis(d, pi, pi_row(d, pi, i, j), k, -w, out);
}

/// Sup over admitted basis triples of the (P2) defect.
pub fn jacobi_residual_on(sc: &StructureConstants, pi: &[Complex64], pi1: &[Complex64], admit: impl Fn(usize, usize, usize) -> bool) -> f64 {
    let d = sc.dim();
    let mut worst = 0.0_f64;
    let mut buf = vec![ZERO; d];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                if !admit(i, j, k) {
                    continue;
                }
                buf.iter_mut().for_each(|z| *z = ZERO);
                jacobiator_into(d, pi, (i, j, k), Complex64::new(1.0, 0.0), &mut buf);
                leibniz_defect_into(sc, pi1, (i, j, k), Complex64::new(-1.0, 0.0), &mut buf);
                worst = worst.max(linalg::max_abs(&buf));
            }
        }
    }
    worst
}

fn require_degree(c: &Cochain, k: usize) -> Result<()> {
    if c.degree() != k {
        return Err(Error::Shape { expected: k, got: c.degree() });
    }
    Ok(())
}

/// (P1): sup over basis triples of `‖a₁Π(a₂,a₃) − Π(a₁a₂,a₃) + Π(a₁,a₂a₃) − Π(a₁,a₂)a₃‖`.
pub fn check_leibniz(pi: &Cochain) -> Result<f64> {
    require_degree(pi, 2)?;
    Ok(leibniz_residual_on(pi.algebra(), pi.tensor(), |_, _, _| true))
}

/// (P2): sup over basis triples of the Jacobiator minus `b(Π₁)`.
pub fn check_jacobi_witness(pi: &Cochain, pi1: &Cochain) -> Result<f64> {
    require_degree(pi, 2)?;
    require_degree(pi1, 2)?;
    if pi.algebra() != pi1.algebra() {
        return Err(Error::AlgebraMismatch);
    }
    Ok(jacobi_residual_on(pi.algebra(), pi.tensor(), pi1.tensor(), |_, _, _| true))
}

/// The 3-cochain `(a₁,a₂,a₃) ↦ Π(a₁,Π(a₂,a₃)) − Π(Π(a₁,a₂),a₃)`.
pub fn jacobiator(pi: &Cochain) -> Result<Cochain> {
    require_degree(pi, 2)?;
    let alg = pi.algebra();
    let d = alg.dim();
    let mut tensor = vec![ZERO; d * d * d * d];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                let t = (i * d + j) * d + k;
                jacobiator_into(d, pi.tensor(), (i, j, k), Complex64::new(1.0, 0.0), &mut tensor[t * d..(t + 1) * d]);
            }
        }
    }
    Cochain::from_tensor(alg, 3, tensor)
}

fn leibniz_scale(pi: &Cochain) -> f64 {
    pi.norm_inf().max(1.0) * pi.algebra().scale()
}

#[derive(Clone, Debug)]
pub struct JacobiWitnessSolution {
    pub solution: CoboundarySolution,
    /// `‖J + ½[Π,Π]‖∞`, the sign-consistency check between the Jacobiator and the bracket.
    pub bracket_consistency: f64,
}

/// Solves `b(Π₁) = Π(·,Π(·,·)) − Π(Π(·,·),·)` for a minimum-norm witness.
pub fn solve_jacobi_witness(pi: &Cochain, tol: f64) -> Result<JacobiWitnessSolution> {
    let residual = check_leibniz(pi)?;
    if residual > LEIBNIZ_TOL * leibniz_scale(pi) {
        return Err(Error::NotCocycle { residual });
    }
    let j = jacobiator(pi)?;
    let half_bracket = pi.gerstenhaber(pi)?.scale(HALF);
    let bracket_consistency = j.add(&half_bracket)?.norm_inf();
    let solution = hochschild::solve_coboundary(&j, tol)?;
    Ok(JacobiWitnessSolution { solution, bracket_consistency })
}

/// A Hochschild 2-cocycle with an optional witness for its Jacobi rule.
#[derive(Clone, Debug)]
pub struct PoissonStructure {
    pi: Cochain,
    pi1: Option<Cochain>,
}

impl PoissonStructure {
    pub fn new(pi: Cochain, pi1: Option<Cochain>) -> Result<Self> {
        let residual = check_leibniz(&pi)?;
        if residual > LEIBNIZ_TOL * leibniz_scale(&pi) {
            return Err(Error::NotCocycle { residual });
        }
        if let Some(w) = &pi1 {
            let residual = check_jacobi_witness(&pi, w)?;
            if residual > JACOBI_TOL * leibniz_scale(&pi).powi(2) {
                return Err(Error::NotCoboundary { residual });
            }
        }
        Ok(Self { pi, pi1 })
    }

    /// Builds Π₁ by solving for it.
    pub fn with_solved_witness(pi: Cochain) -> Result<Self> {
        let sol = solve_jacobi_witness(&pi, hochschild::DEFAULT_SOLVE_TOL)?;
        let residual = sol.solution.residual;
        let w = sol.solution.witness.ok_or(Error::NotCoboundary { residual })?;
        Self::new(pi, Some(w))
    }

    pub fn pi(&self) -> &Cochain {
        &self.pi
    }

    pub fn witness(&self) -> Option<&Cochain> {
        self.pi1.as_ref()
    }

    pub fn algebra(&self) -> &Algebra {
        self.pi.algebra()
    }

    fn require_central(&self, c: &[Complex64]) -> Result<()> {
        let alg = self.algebra();
        if c.len() != alg.dim() {
            return Err(Error::Shape {
                expected: alg.dim(),
                got: c.len(),
            });
        }
        let residual = alg.centrality_residual(c);
        let scale = linalg::max_abs(c).max(1.0);
        if residual > CENTRAL_TOL * scale {
            return Err(Error::NotCentral { residual });
        }
        Ok(())
    }

    /// `½(Π(c,a) − Π(a,c))` without the centrality precondition.
    fn half_antisym(&self, c: &[Complex64], a: &[Complex64]) -> Vec<Complex64> {
        let p = self.pi.evaluate(&[c, a]).expect("degree 2");
        let q = self.pi.evaluate(&[a, c]).expect("degree 2");
        p.iter().zip(&q).map(|(x, y)| HALF * (x - y)).collect()
    }

    /// `X_c = ½[Π, c]`, i.e. `X_c(a) = ½(Π(c,a) − Π(a,c))`.
    pub fn hamiltonian_derivation(&self, c: &[Complex64]) -> Result<HamiltonianDerivation> {
        self.require_central(c)?;
        let alg = self.algebra();
        let cc = Cochain::from_tensor(alg, 0, c.to_vec())?;
        let field = self.pi.gerstenhaber(&cc)?.scale(HALF);
        let derivation_residual = alg.derivation_residual(&field.to_matrix()?)?;
        Ok(HamiltonianDerivation { field, derivation_residual })
    }

    /// `{c, e} = X_c(e)` on the center.
    pub fn center_bracket(&self, c: &[Complex64], e: &[Complex64]) -> Result<CenterBracket> {
        self.require_central(c)?;
        self.require_central(e)?;
        let value = self.half_antisym(c, e);
        let reverse = self.half_antisym(e, c);
        let antisymmetry_residual = value.iter().zip(&reverse).map(|(a, b)| (a + b).norm()).fold(0.0, f64::max);
        let centrality_residual = self.algebra().centrality_residual(&value);
        Ok(CenterBracket {
            value,
            antisymmetry_residual,
            centrality_residual,
        })
    }

    /// Sup over center-basis triples of `‖{a,{b,c}} + {b,{c,a}} + {c,{a,b}}‖`.
    pub fn center_jacobi_residual(&self) -> f64 {
        let basis: Vec<Vec<Complex64>> = self.algebra().center().into_iter().map(|z| z.into_coeffs()).collect();
        let br = |x: &[Complex64], y: &[Complex64]| self.half_antisym(x, y);
        let mut worst = 0.0_f64;
        for a in &basis {
            for b in &basis {
                for c in &basis {
                    let t1 = br(a, &br(b, c));
                    let t2 = br(b, &br(c, a));
                    let t3 = br(c, &br(a, b));
                    for k in 0..t1.len() {
                        worst = worst.max((t1[k] + t2[k] + t3[k]).norm());
                    }
                }
            }
        }
        worst
    }

    /// The three properties of Hamiltonian derivations for central `c`, `e`.
    pub fn check_proposition(&self, c: &[Complex64], e: &[Complex64], tol: f64) -> Result<PropositionReport> {
        let xc = self.hamiltonian_derivation(c)?;
        let xe = self.hamiltonian_derivation(e)?;
        let ce = self.center_bracket(c, e)?;
        let xce = self.hamiltonian_field_unchecked(&ce.value)?;

        let lie = xc.field.gerstenhaber(&self.pi)?;
        let lie_derivative = hochschild::solve_coboundary(&lie, tol)?;

        let commutator = xc.field.gerstenhaber(&xe.field)?;
        let stated = inner_derivation_residual(&commutator.add(&xce)?)?;
        let commuting = inner_derivation_residual(&commutator.sub(&xce)?)?;

        Ok(PropositionReport {
            lie_derivative_residual: lie_derivative.residual,
            commutator_plus_residual: stated,
            commutator_minus_residual: commuting,
            center_jacobi_residual: self.center_jacobi_residual(),
        })
    }

    /// `½[Π, z]` for a `z` already known to be (numerically) central.
    fn hamiltonian_field_unchecked(&self, z: &[Complex64]) -> Result<Cochain> {
        let zz = Cochain::from_tensor(self.algebra(), 0, z.to_vec())?;
        Ok(self.pi.gerstenhaber(&zz)?.scale(HALF))
    }
}

#[derive(Clone, Debug)]
pub struct HamiltonianDerivation {
    pub field: Cochain,
    pub derivation_residual: f64,
}

#[derive(Clone, Debug)]
pub struct CenterBracket {
    pub value: Vec<Complex64>,
    pub antisymmetry_residual: f64,
    pub centrality_residual: f64,
}

/// Residuals of the three properties, all measured up to inner derivations or
/// coboundaries (the Hamiltonian derivation is a class in H¹).
#[derive(Clone, Debug)]
pub struct PropositionReport {
    /// (i) `[X_c, Π]` as a 2-coboundary.
    pub lie_derivative_residual: f64,
    /// (ii) `[X_c, X_e] + X_{c,e}` as an inner derivation.
    pub commutator_plus_residual: f64,
    /// `[X_c, X_e] − X_{c,e}` as an inner derivation, the Jacobi-consistent sign.
    pub commutator_minus_residual: f64,
    /// (iii) Jacobi identity of the center bracket on a center basis.
    pub center_jacobi_residual: f64,
}

/// Distance from a 1-cochain to the inner derivations `x ↦ [a, x]`, with the
/// minimum-norm `a` (which removes the central part).
pub fn inner_derivation_residual(d: &Cochain) -> Result<f64> {
    require_degree(d, 1)?;
    let alg = d.algebra();
    let n = alg.dim();
    let mut m = CMatrix::zeros(n * n, n);
    for col in 0..n {
        let mut a = vec![ZERO; n];
        a[col] = Complex64::new(1.0, 0.0);
        let inner = alg.inner_derivation(&a);
        for i in 0..n {
            for j in 0..n {
                m[(i * n + j, col)] = inner[(j, i)];
            }
        }
    }
    let x = linalg::min_norm_solve(&m, d.tensor());
    let fit = linalg::matvec(&m, &x);
    Ok(fit.iter().zip(d.tensor()).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max))
}

/// Commuting derivations assembled into `Π = Σ Λ^{ij} D_i ⊗ D_j` with witness
/// `Π₁ = −½ Σ Λ^{ij}Λ^{kl} D_iD_k ⊗ D_jD_l`.
pub fn from_commuting_derivations(algebra: &Algebra, derivations: &[nalgebra::DMatrix<Complex64>], lambda: &[Vec<f64>]) -> Result<PoissonStructure> {
    let n = algebra.dim();
    let q = derivations.len();
    if lambda.len() != q || lambda.iter().any(|r| r.len() != q) {
        return Err(Error::Dimension(lambda.len(), q));
    }
    let outer = |a: &nalgebra::DMatrix<Complex64>, b: &nalgebra::DMatrix<Complex64>, w: f64, t: &mut [Complex64]| {
        for i in 0..n {
            for j in 0..n {
                let ai = a.column(i);
                let bj = b.column(j);
                let p = algebra.mul_coeffs(ai.as_slice(), bj.as_slice());
                for (k, v) in p.iter().enumerate() {
                    t[(i * n + j) * n + k] += w * v;
                }
            }
        }
    };
    let mut pi = vec![ZERO; n * n * n];
    let mut pi1 = vec![ZERO; n * n * n];
    for i in 0..q {
        for j in 0..q {
            if lambda[i][j] == 0.0 {
                continue;
            }
            outer(&derivations[i], &derivations[j], lambda[i][j], &mut pi);
            for k in 0..q {
                for l in 0..q {
                    let w = -0.5 * lambda[i][j] * lambda[k][l];
                    if w != 0.0 {
                        outer(&(&derivations[i] * &derivations[k]), &(&derivations[j] * &derivations[l]), w, &mut pi1);
                    }
                }
            }
        }
    }
    PoissonStructure::new(Cochain::from_tensor(algebra, 2, pi)?, Some(Cochain::from_tensor(algebra, 2, pi1)?))
}

/// The Euler derivation `t d/dt` on ℂ[t]/(t^k): `tⁱ ↦ i tⁱ`.
pub fn euler_derivation(k: usize) -> nalgebra::DMatrix<Complex64> {
    nalgebra::DMatrix::from_fn(k, k, |r, c| if r == c { Complex64::new(c as f64, 0.0) } else { ZERO })
}

/// Named Poisson structures used by the suites.
pub fn builtin_structures(seed: u64) -> Result<Vec<(String, PoissonStructure)>> {
    let mut rng = seeded(seed);
    let mut out = Vec::new();

    let m2 = Algebra::matrix(2);
    let mu = Cochain::multiplication(&m2);
    out.push(("m2_multiplication".to_string(), PoissonStructure::new(mu, Some(Cochain::zero(&m2, 2)?))?));

    let c0 = Cochain::random(&m2, 1, &mut rng)?;
    out.push(("m2_coboundary".to_string(), PoissonStructure::with_solved_witness(c0.differential()?)?));

    let s3 = Algebra::symmetric_group_s3();
    let c0 = Cochain::random(&s3, 1, &mut rng)?;
    out.push(("s3_coboundary".to_string(), PoissonStructure::with_solved_witness(c0.differential()?)?));

    let t3 = Algebra::truncated_polynomial(3);
    out.push((
        "t3_euler_square".to_string(),
        from_commuting_derivations(&t3, &[euler_derivation(3)], &[vec![1.0]])?,
    ));

    // ℂ[x,y]/(x³,y³) with {a,b} = (x∂x a)(y∂y b) − (y∂y a)(x∂x b)
    let xy = Algebra::tensor_product(&t3, &t3);
    let id = nalgebra::DMatrix::<Complex64>::identity(3, 3);
    let dx = euler_derivation(3).kronecker(&id);
    let dy = id.kronecker(&euler_derivation(3));
    let lambda = vec![vec![0.0, 1.0], vec![-1.0, 0.0]];
    out.push(("xy3_euler_wedge".to_string(), from_commuting_derivations(&xy, &[dx, dy], &lambda)?));

    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::random_coeffs;

    #[test]
    fn multiplication_satisfies_p1_and_p2() {
        let alg = Algebra::matrix(2);
        let mu = Cochain::multiplication(&alg);
        assert!(check_leibniz(&mu).unwrap() < 1e-14);
        let zero = Cochain::zero(&alg, 2).unwrap();
        assert!(check_jacobi_witness(&mu, &zero).unwrap() < 1e-14);
        let sol = solve_jacobi_witness(&mu, 1e-9).unwrap();
        assert!(sol.solution.witness.unwrap().norm_inf() < 1e-12);
    }

    #[test]
    fn leibniz_equals_differential() {
        let alg = Algebra::symmetric_group_s3();
        let pi = Cochain::random(&alg, 2, &mut seeded(3)).unwrap();
        let r = check_leibniz(&pi).unwrap();
        let b = pi.differential().unwrap().norm_inf();
        assert!((r - b).abs() < 1e-12);
        assert!(r > 0.1);
    }

    #[test]
    fn coboundaries_pass_leibniz() {
        let alg = Algebra::matrix(2);
        let c = Cochain::random(&alg, 1, &mut seeded(8)).unwrap();
        assert!(check_leibniz(&c.differential().unwrap()).unwrap() < 1e-12);
    }

    #[test]
    fn jacobiator_is_minus_half_self_bracket() {
        let alg = Algebra::matrix(2);
        let pi = Cochain::random(&alg, 2, &mut seeded(10)).unwrap();
        let j = jacobiator(&pi).unwrap();
        let half = pi.gerstenhaber(&pi).unwrap().scale(HALF);
        assert!(j.add(&half).unwrap().norm_inf() < 1e-12);
    }

    #[test]
    fn witness_is_defined_up_to_coboundaries() {
        let alg = Algebra::matrix(2);
        let mut rng = seeded(21);
        let pi = Cochain::random(&alg, 1, &mut rng).unwrap().differential().unwrap();
        let ps = PoissonStructure::with_solved_witness(pi.clone()).unwrap();
        let w = ps.witness().unwrap();
        let before = check_jacobi_witness(&pi, w).unwrap();
        let eta = Cochain::random(&alg, 1, &mut rng).unwrap().differential().unwrap();
        let after = check_jacobi_witness(&pi, &w.add(&eta).unwrap()).unwrap();
        assert!(before <= 1e-10 && after <= 1e-10);
        assert!((after - before).abs() <= 1e-12);
    }

    #[test]
    fn solve_refuses_non_cocycles() {
        let alg = Algebra::matrix(2);
        let pi = Cochain::random(&alg, 2, &mut seeded(30)).unwrap();
        assert!(matches!(solve_jacobi_witness(&pi, 1e-9), Err(Error::NotCocycle { .. })));
    }

    #[test]
    fn hamiltonian_of_identity_is_inner_on_matrix_coboundary() {
        let alg = Algebra::matrix(2);
        let pi = Cochain::random(&alg, 1, &mut seeded(1)).unwrap().differential().unwrap();
        let ps = PoissonStructure::new(pi, None).unwrap();
        let x = ps.hamiltonian_derivation(alg.unit()).unwrap();
        assert!(x.derivation_residual < 1e-12);
        assert!(inner_derivation_residual(&x.field).unwrap() < 1e-12);
        let not_central = alg.basis(1).into_coeffs();
        assert!(matches!(ps.hamiltonian_derivation(&not_central), Err(Error::NotCentral { .. })));
    }

    #[test]
    fn multiplication_gives_zero_hamiltonians() {
        let alg = Algebra::truncated_polynomial(3);
        let ps = PoissonStructure::new(Cochain::multiplication(&alg), None).unwrap();
        let c = random_coeffs(&mut seeded(2), 3);
        assert!(ps.hamiltonian_derivation(&c).unwrap().field.norm_inf() < 1e-12);
        let br = ps.center_bracket(&c, &alg.basis(1).into_coeffs()).unwrap();
        assert!(linalg::max_abs(&br.value) < 1e-12);
    }

    #[test]
    fn center_bracket_matches_direct_evaluation() {
        let t3 = Algebra::truncated_polynomial(3);
        let mut rng = seeded(4);
        // a generic cocycle: coboundary plus the Euler square
        let pi = Cochain::random(&t3, 1, &mut rng)
            .unwrap()
            .differential()
            .unwrap()
            .add(&from_commuting_derivations(&t3, &[euler_derivation(3)], &[vec![1.0]]).unwrap().pi().clone())
            .unwrap();
        let ps = PoissonStructure::new(pi.clone(), None).unwrap();
        let t = t3.basis(1).into_coeffs();
        let t2 = t3.basis(2).into_coeffs();
        let br = ps.center_bracket(&t, &t2).unwrap();
        let p = pi.value_on_basis(&[1, 2]);
        let q = pi.value_on_basis(&[2, 1]);
        for k in 0..3 {
            assert!((br.value[k] - HALF * (p[k] - q[k])).norm() < 1e-14);
        }
        let tt = ps.center_bracket(&t, &t).unwrap();
        assert!(linalg::max_abs(&tt.value) < 1e-15);
    }

    #[test]
    fn builtin_structures_are_poisson() {
        for (name, ps) in builtin_structures(1).unwrap() {
            let w = ps.witness().expect(&name);
            assert!(check_jacobi_witness(ps.pi(), w).unwrap() <= 1e-9, "{name}");
        }
    }

    #[test]
    fn xy3_bracket_is_nontrivial() {
        let all = builtin_structures(1).unwrap();
        let (_, ps) = all.iter().find(|(n, _)| n == "xy3_euler_wedge").unwrap();
        let alg = ps.algebra();
        // x = e_{1⊗0} index 3, y = e_{0⊗1} index 1
        let x = alg.basis(3).into_coeffs();
        let y = alg.basis(1).into_coeffs();
        let br = ps.center_bracket(&x, &y).unwrap();
        // {x, y} = xy, index 4
        assert!((br.value[4] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(ps.center_jacobi_residual() < 1e-12);
    }
}
