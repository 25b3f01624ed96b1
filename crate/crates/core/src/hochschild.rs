//! Hochschild cochains `C^k(A, A) = Hom(A^{⊗k}, A)` over a structure-constant
//! algebra, stored densely: `c(e_{i₁},…,e_{i_k}) = Σ_j T[i₁,…,i_k][j] e_j`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{Algebra, Element};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::rng::{random_coeffs, SeededRng};

/// Largest stored degree. Five is needed to hold `b(b(c))` for 3-cochains.
pub const MAX_DEGREE: usize = 5;

/// Entry budget for the matrices factored by [`cohomology_dimension`].
pub const COHOMOLOGY_ENTRY_LIMIT: usize = 200_000;

/// Entry budget for the least-squares system in [`solve_coboundary`].
pub const SOLVE_ENTRY_LIMIT: usize = 1_500_000;

/// Default acceptance threshold for coboundary witnesses.
pub const DEFAULT_SOLVE_TOL: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn sign(parity: i64) -> Complex64 {
    if parity.rem_euclid(2) == 0 {
        ONE
    } else {
        -ONE
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cochain {
    algebra: Algebra,
    degree: usize,
    tensor: Vec<Complex64>,
}

impl Cochain {
    pub fn zero(algebra: &Algebra, degree: usize) -> Result<Self> {
        if degree > MAX_DEGREE {
            return Err(Error::DegreeTooLarge(degree));
        }
        let len = algebra.dim().pow(degree as u32 + 1);
        Ok(Self {
            algebra: algebra.clone(),
            degree,
            tensor: vec![ZERO; len],
        })
    }

    pub fn from_tensor(algebra: &Algebra, degree: usize, tensor: Vec<Complex64>) -> Result<Self> {
        if degree > MAX_DEGREE {
            return Err(Error::DegreeTooLarge(degree));
        }
        let len = algebra.dim().pow(degree as u32 + 1);
        if tensor.len() != len {
            return Err(Error::Shape {
                expected: len,
                got: tensor.len(),
            });
        }
        Ok(Self {
            algebra: algebra.clone(),
            degree,
            tensor,
        })
    }

    pub fn random(algebra: &Algebra, degree: usize, rng: &mut SeededRng) -> Result<Self> {
        let len = algebra.dim().pow(degree as u32 + 1);
        Self::from_tensor(algebra, degree, random_coeffs(rng, len))
    }

    pub fn from_element(e: &Element) -> Self {
        Self {
            algebra: e.algebra().clone(),
            degree: 0,
            tensor: e.coeffs().to_vec(),
        }
    }

    /// The multiplication 2-cochain μ(a₁, a₂) = a₁a₂.
    pub fn multiplication(algebra: &Algebra) -> Self {
        let d = algebra.dim();
        let mut tensor = vec![ZERO; d * d * d];
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    tensor[(i * d + j) * d + k] = algebra.constant(i, j, k);
                }
            }
        }
        Self {
            algebra: algebra.clone(),
            degree: 2,
            tensor,
        }
    }

    /// A 1-cochain from a matrix acting on coefficient columns.
    pub fn from_linear_map(algebra: &Algebra, m: &DMatrix<Complex64>) -> Result<Self> {
        let d = algebra.dim();
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::Shape {
                expected: d,
                got: m.nrows().max(m.ncols()),
            });
        }
        let mut tensor = vec![ZERO; d * d];
        for i in 0..d {
            for j in 0..d {
                tensor[i * d + j] = m[(j, i)];
            }
        }
        Ok(Self {
            algebra: algebra.clone(),
            degree: 1,
            tensor,
        })
    }

    /// Matrix of a 1-cochain in the column convention.
    pub fn to_matrix(&self) -> Result<DMatrix<Complex64>> {
        if self.degree != 1 {
            return Err(Error::DegreeTooLarge(self.degree));
        }
        let d = self.dim();
        Ok(DMatrix::from_fn(d, d, |j, i| self.tensor[i * d + j]))
    }

    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn tensor(&self) -> &[Complex64] {
        &self.tensor
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    /// Value on a basis tuple, flattened row-major.
    pub fn row(&self, tuple: usize) -> &[Complex64] {
        let d = self.dim();
        &self.tensor[tuple * d..(tuple + 1) * d]
    }

    pub fn value_on_basis(&self, indices: &[usize]) -> &[Complex64] {
        self.row(flat_index(indices, self.dim()))
    }

    /// Multilinear evaluation on arbitrary elements (coefficient vectors).
    pub fn evaluate(&self, args: &[&[Complex64]]) -> Result<Vec<Complex64>> {
        if args.len() != self.degree {
            return Err(Error::Shape {
                expected: self.degree,
                got: args.len(),
            });
        }
        let d = self.dim();
        let mut cur = self.tensor.clone();
        for arg in args {
            if arg.len() != d {
                return Err(Error::Shape { expected: d, got: arg.len() });
            }
            let stride = cur.len() / d;
            let mut next = vec![ZERO; stride];
            for (i, a) in arg.iter().enumerate() {
                if *a == ZERO {
                    continue;
                }
                for (n, c) in next.iter_mut().zip(&cur[i * stride..(i + 1) * stride]) {
                    *n += a * c;
                }
            }
            cur = next;
        }
        Ok(cur)
    }

    fn check(&self, other: &Cochain) -> Result<()> {
        if self.algebra != other.algebra {
            return Err(Error::AlgebraMismatch);
        }
        if self.degree != other.degree {
            return Err(Error::Shape {
                expected: self.degree,
                got: other.degree,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Cochain) -> Result<Cochain> {
        self.check(other)?;
        let tensor = self.tensor.iter().zip(&other.tensor).map(|(a, b)| a + b).collect();
        Ok(Self { tensor, ..self.clone() })
    }

    pub fn sub(&self, other: &Cochain) -> Result<Cochain> {
        self.check(other)?;
        let tensor = self.tensor.iter().zip(&other.tensor).map(|(a, b)| a - b).collect();
        Ok(Self { tensor, ..self.clone() })
    }

    pub fn scale(&self, s: Complex64) -> Cochain {
        Self {
            tensor: self.tensor.iter().map(|a| a * s).collect(),
            ..self.clone()
        }
    }

    pub fn norm_inf(&self) -> f64 {
        linalg::max_abs(&self.tensor)
    }

    /// The Hochschild differential
    /// `(bc)(a₁,…,a_{k+1}) = a₁c(a₂,…) + Σᵢ(−1)ⁱ c(…,aᵢaᵢ₊₁,…) + (−1)^{k+1} c(a₁,…,a_k)a_{k+1}`.
    pub fn differential(&self) -> Result<Cochain> {
        let k = self.degree;
        let alg = &self.algebra;
        let d = alg.dim();
        let mut out = Cochain::zero(alg, k + 1)?;
        let rows = d.pow(k as u32 + 1);
        let mut digits = vec![0usize; k + 1];
        let mut inner = vec![0usize; k];
        for t in 0..rows {
            unflatten(t, d, &mut digits);
            let dst = &mut out.tensor[t * d..(t + 1) * d];
            // a₁ c(a₂, …)
            alg.left_basis_mul_into(digits[0], self.row(flat_index(&digits[1..], d)), ONE, dst);
            // contractions aᵢaᵢ₊₁
            for p in 0..k {
                let s = sign(p as i64 + 1);
                inner[..p].copy_from_slice(&digits[..p]);
                inner[p + 1..].copy_from_slice(&digits[p + 2..]);
                for &(m, cm) in alg.basis_product(digits[p], digits[p + 1]) {
                    inner[p] = m;
                    let w = s * cm;
                    for (o, v) in dst.iter_mut().zip(self.row(flat_index(&inner, d))) {
                        *o += w * v;
                    }
                }
            }
            // c(a₁, …, a_k) a_{k+1}
            alg.right_basis_mul_into(self.row(flat_index(&digits[..k], d)), digits[k], sign(k as i64 + 1), dst);
        }
        Ok(out)
    }

    /// The pre-Lie product
    /// `(U∗V)(a₁,…) = Σᵢ (−1)^{(i−1)(v−1)} U(a₁,…,a_{i−1}, V(aᵢ,…,a_{i+v−1}), …)`.
    pub fn pre_lie(&self, v: &Cochain) -> Result<Cochain> {
        if self.algebra != v.algebra {
            return Err(Error::AlgebraMismatch);
        }
        let (ud, vd) = (self.degree, v.degree);
        if ud == 0 && vd == 0 {
            return Err(Error::DegreeZeroProduct);
        }
        if ud == 0 {
            return Cochain::zero(&self.algebra, vd - 1);
        }
        let n = ud + vd - 1;
        let d = self.dim();
        let mut out = Cochain::zero(&self.algebra, n)?;
        let rows = d.pow(n as u32);
        let mut digits = vec![0usize; n];
        let mut u_args = vec![0usize; ud];
        for t in 0..rows {
            unflatten(t, d, &mut digits);
            let dst = &mut out.tensor[t * d..(t + 1) * d];
            for i in 0..ud {
                let s = sign(i as i64 * (vd as i64 - 1));
                let inserted = v.row(flat_index(&digits[i..i + vd], d));
                u_args[..i].copy_from_slice(&digits[..i]);
                u_args[i + 1..].copy_from_slice(&digits[i + vd..]);
                for (m, wm) in inserted.iter().enumerate() {
                    if *wm == ZERO {
                        continue;
                    }
                    u_args[i] = m;
                    let w = s * wm;
                    for (o, x) in dst.iter_mut().zip(self.row(flat_index(&u_args, d))) {
                        *o += w * x;
                    }
                }
            }
        }
        Ok(out)
    }

    /// The Gerstenhaber bracket `[U,V] = U∗V − (−1)^{(u−1)(v−1)} V∗U`.
    pub fn gerstenhaber(&self, v: &Cochain) -> Result<Cochain> {
        let uv = self.pre_lie(v)?;
        let vu = v.pre_lie(self)?;
        let s = sign((self.degree as i64 - 1) * (v.degree as i64 - 1));
        uv.sub(&vu.scale(s))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&CochainJson::from(self)).expect("cochain serializes")
    }

    pub fn from_json(algebra: &Algebra, s: &str) -> Result<Self> {
        let parsed: CochainJson = serde_json::from_str(s)?;
        parsed.into_cochain(algebra)
    }
}

/// `{"degree": k, "tensor": [[re, im], …]}` with the tensor flattened row-major.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CochainJson {
    pub degree: usize,
    pub tensor: Vec<[f64; 2]>,
}

impl From<&Cochain> for CochainJson {
    fn from(c: &Cochain) -> Self {
        Self {
            degree: c.degree,
            tensor: c.tensor.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl CochainJson {
    pub fn into_cochain(self, algebra: &Algebra) -> Result<Cochain> {
        let tensor = self.tensor.into_iter().map(|[re, im]| Complex64::new(re, im)).collect();
        Cochain::from_tensor(algebra, self.degree, tensor)
    }
}

pub(crate) fn flat_index(digits: &[usize], d: usize) -> usize {
    digits.iter().fold(0, |acc, &x| acc * d + x)
}

pub(crate) fn unflatten(mut t: usize, d: usize, digits: &mut [usize]) {
    for slot in digits.iter_mut().rev() {
        *slot = t % d;
        t /= d;
    }
}

/// Matrix of `b : C^k → C^{k+1}` in the flattened tensor coordinates.
pub fn differential_matrix(algebra: &Algebra, k: usize) -> Result<CMatrix> {
    let d = algebra.dim();
    let cols = d.pow(k as u32 + 1);
    let rows = d.pow(k as u32 + 2);
    let mut m = CMatrix::zeros(rows, cols);
    let mut unit = Cochain::zero(algebra, k)?;
    for col in 0..cols {
        unit.tensor[col] = ONE;
        let image = unit.differential()?;
        for (r, v) in image.tensor.iter().enumerate() {
            if *v != ZERO {
                m[(r, col)] = *v;
            }
        }
        unit.tensor[col] = ZERO;
    }
    Ok(m)
}

#[derive(Clone, Debug)]
pub struct CoboundarySolution {
    /// Present when the attained residual is within tolerance.
    pub witness: Option<Cochain>,
    pub residual: f64,
    pub tolerance: f64,
}

impl CoboundarySolution {
    pub fn is_coboundary(&self) -> bool {
        self.witness.is_some()
    }
}

/// Minimum-norm least-squares solve of `b(c) = w`.
pub fn solve_coboundary(w: &Cochain, tol: f64) -> Result<CoboundarySolution> {
    let k = w.degree;
    if k == 0 {
        return Err(Error::DegreeZeroCoboundary);
    }
    let d = w.dim();
    let entries = d.pow(k as u32 + 1) * d.pow(k as u32);
    if entries > SOLVE_ENTRY_LIMIT {
        return Err(Error::TooLarge {
            entries,
            limit: SOLVE_ENTRY_LIMIT,
        });
    }
    let a = differential_matrix(&w.algebra, k - 1)?;
    let x = linalg::min_norm_solve(&a, &w.tensor);
    let ax = linalg::matvec(&a, &x);
    let residual = ax.iter().zip(&w.tensor).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
    let witness = if residual <= tol {
        Some(Cochain::from_tensor(&w.algebra, k - 1, x)?)
    } else {
        None
    };
    Ok(CoboundarySolution {
        witness,
        residual,
        tolerance: tol,
    })
}

/// `dim H^k(A, A) = dim ker b_k − rank b_{k−1}` for `k ≤ 3`.
pub fn cohomology_dimension(algebra: &Algebra, k: usize) -> Result<usize> {
    if k > 3 {
        return Err(Error::DegreeTooLarge(k));
    }
    let d = algebra.dim();
    let entries = d.pow(k as u32 + 2) * d.pow(k as u32 + 1);
    if entries > COHOMOLOGY_ENTRY_LIMIT {
        return Err(Error::TooLarge {
            entries,
            limit: COHOMOLOGY_ENTRY_LIMIT,
        });
    }
    let bk = differential_matrix(algebra, k)?;
    let kernel = d.pow(k as u32 + 1) - linalg::rank(&bk);
    let image = if k == 0 { 0 } else { linalg::rank(&differential_matrix(algebra, k - 1)?) };
    Ok(kernel - image)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn e(alg: &Algebra, i: usize) -> Vec<Complex64> {
        alg.basis(i).into_coeffs()
    }

    #[test]
    fn degree_zero_differential_is_commutator() {
        let m2 = Algebra::matrix(2);
        let c = Cochain::from_element(&m2.basis(0)); // E11
        let bc = c.differential().unwrap();
        // (bc)(E12) = E12·E11 − E11·E12 = −E12
        let v = bc.evaluate(&[&e(&m2, 1)]).unwrap();
        let expected: Vec<Complex64> = e(&m2, 1).iter().map(|z| -z).collect();
        assert_eq!(v, expected);
    }

    #[test]
    fn differential_matches_brute_force_expansion() {
        // evaluate b(c) on random elements via the multilinear definition
        let alg = Algebra::symmetric_group_s3();
        let mut rng = seeded(5);
        let c = Cochain::random(&alg, 2, &mut rng).unwrap();
        let bc = c.differential().unwrap();
        let a: Vec<Vec<Complex64>> = (0..3).map(|_| random_coeffs(&mut rng, alg.dim())).collect();
        let m = |x: &[Complex64], y: &[Complex64]| alg.mul_coeffs(x, y);
        let ev = |x: &[Complex64], y: &[Complex64]| c.evaluate(&[x, y]).unwrap();
        let t1 = m(&a[0], &ev(&a[1], &a[2]));
        let t2 = ev(&m(&a[0], &a[1]), &a[2]);
        let t3 = ev(&a[0], &m(&a[1], &a[2]));
        let t4 = m(&ev(&a[0], &a[1]), &a[2]);
        let direct: Vec<Complex64> = (0..alg.dim()).map(|j| t1[j] - t2[j] + t3[j] - t4[j]).collect();
        let via = bc.evaluate(&[&a[0], &a[1], &a[2]]).unwrap();
        for (x, y) in direct.iter().zip(&via) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn multiplication_is_a_cocycle() {
        for alg in [Algebra::matrix(2), Algebra::symmetric_group_s3(), Algebra::truncated_polynomial(3)] {
            let mu = Cochain::multiplication(&alg);
            assert!(mu.differential().unwrap().norm_inf() < 1e-12);
            // μ∗μ is the associator
            assert!(mu.pre_lie(&mu).unwrap().norm_inf() < 1e-12);
        }
    }

    #[test]
    fn derivation_star_element_is_evaluation() {
        let alg = Algebra::matrix(2);
        let mut rng = seeded(9);
        let a = random_coeffs(&mut rng, 4);
        let x = Cochain::from_linear_map(&alg, &alg.inner_derivation(&random_coeffs(&mut rng, 4))).unwrap();
        let c = Cochain::from_tensor(&alg, 0, a.clone()).unwrap();
        let xa = x.pre_lie(&c).unwrap();
        assert_eq!(xa.degree(), 0);
        let direct = x.evaluate(&[&a]).unwrap();
        for (p, q) in xa.tensor().iter().zip(&direct) {
            assert!((p - q).norm() < 1e-12);
        }
        let ax = c.pre_lie(&x).unwrap();
        assert_eq!(ax.degree(), 0);
        assert_eq!(ax.norm_inf(), 0.0);
    }

    #[test]
    fn degree_zero_pair_is_rejected() {
        let alg = Algebra::matrix(2);
        let c = Cochain::from_element(&alg.one());
        assert!(matches!(c.pre_lie(&c), Err(Error::DegreeZeroProduct)));
        assert!(matches!(c.gerstenhaber(&c), Err(Error::DegreeZeroProduct)));
    }

    #[test]
    fn bracket_with_central_element() {
        let alg = Algebra::truncated_polynomial(3);
        let mut rng = seeded(2);
        let pi = Cochain::random(&alg, 2, &mut rng).unwrap();
        let c = random_coeffs(&mut rng, 3);
        let br = pi.gerstenhaber(&Cochain::from_tensor(&alg, 0, c.clone()).unwrap()).unwrap();
        for i in 0..3 {
            let a = e(&alg, i);
            let lhs = br.evaluate(&[&a]).unwrap();
            let p = pi.evaluate(&[&c, &a]).unwrap();
            let q = pi.evaluate(&[&a, &c]).unwrap();
            for j in 0..3 {
                assert!((lhs[j] - (p[j] - q[j])).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn self_bracket_parity() {
        let alg = Algebra::matrix(2);
        let mut rng = seeded(4);
        let pi = Cochain::random(&alg, 2, &mut rng).unwrap();
        let twice = pi.pre_lie(&pi).unwrap().scale(Complex64::new(2.0, 0.0));
        assert!(pi.gerstenhaber(&pi).unwrap().sub(&twice).unwrap().norm_inf() < 1e-12);
        let x = Cochain::random(&alg, 1, &mut rng).unwrap();
        assert!(x.gerstenhaber(&x).unwrap().norm_inf() < 1e-12);
        let t = Cochain::random(&alg, 3, &mut rng).unwrap();
        assert!(t.gerstenhaber(&t).unwrap().norm_inf() < 1e-12);
    }

    #[test]
    fn coboundaries_are_solved() {
        let alg = Algebra::matrix(2);
        let mut rng = seeded(12);
        let c0 = Cochain::random(&alg, 1, &mut rng).unwrap();
        let w = c0.differential().unwrap();
        let sol = solve_coboundary(&w, DEFAULT_SOLVE_TOL).unwrap();
        assert!(sol.residual <= 1e-10);
        let witness = sol.witness.unwrap();
        assert!(witness.differential().unwrap().sub(&w).unwrap().norm_inf() <= 1e-10);

        let zero = Cochain::zero(&alg, 2).unwrap();
        let sol = solve_coboundary(&zero, DEFAULT_SOLVE_TOL).unwrap();
        assert_eq!(sol.witness.unwrap().norm_inf(), 0.0);
        assert!(matches!(
            solve_coboundary(&Cochain::from_element(&alg.one()), 1e-9),
            Err(Error::DegreeZeroCoboundary)
        ));
    }

    #[test]
    fn non_cocycle_is_not_a_coboundary() {
        let alg = Algebra::matrix(2);
        let mut rng = seeded(13);
        let w = Cochain::random(&alg, 2, &mut rng).unwrap();
        let sol = solve_coboundary(&w, DEFAULT_SOLVE_TOL).unwrap();
        assert!(!sol.is_coboundary());
        assert!(sol.residual > 0.1);
    }

    #[test]
    fn cohomology_guard() {
        let alg = Algebra::matrix(3);
        assert!(matches!(cohomology_dimension(&alg, 2), Err(Error::TooLarge { .. })));
        assert!(matches!(cohomology_dimension(&alg, 4), Err(Error::DegreeTooLarge(4))));
    }

    #[test]
    fn json_round_trip() {
        let alg = Algebra::matrix(2);
        let c = Cochain::random(&alg, 2, &mut seeded(1)).unwrap();
        assert_eq!(Cochain::from_json(&alg, &c.to_json()).unwrap(), c);
        let bad = r#"{"degree": 1, "tensor": [[1.0, 0.0]]}"#;
        assert!(matches!(Cochain::from_json(&alg, bad), Err(Error::Shape { .. })));
    }
}
