//! Dense complex linear algebra used by the cohomology and center computations.
//!
//! Everything goes through a singular value decomposition with a relative
//! cutoff, so rank decisions and minimum-norm solutions share one threshold.

use nalgebra::{DMatrix, DVector};
use ndarray::Array2;
use ndarray_linalg::SVD;
use num_complex::Complex64;

/// Relative singular-value cutoff used for rank decisions.
pub const RANK_CUTOFF: f64 = 1e-9;

pub(crate) type CMatrix = DMatrix<Complex64>;

struct Decomposition {
    u: Option<Array2<Complex64>>,
    s: Vec<f64>,
    vt: Option<Array2<Complex64>>,
}

impl Decomposition {
    fn cutoff(&self) -> f64 {
        RANK_CUTOFF * self.s.iter().copied().fold(0.0_f64, f64::max)
    }
}

// LAPACK with full U and V^H, so V is square even for wide matrices.
fn decompose(a: &CMatrix, vectors: bool) -> Decomposition {
    let x = Array2::from_shape_fn((a.nrows(), a.ncols()), |(i, j)| a[(i, j)]);
    let (u, s, vt) = x.svd(vectors, vectors).expect("LAPACK SVD failed to converge");
    Decomposition { u, s: s.to_vec(), vt }
}

pub(crate) fn rank(a: &CMatrix) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let d = decompose(a, false);
    let cut = d.cutoff();
    d.s.iter().filter(|&&x| x > cut && x > 0.0).count()
}

/// Orthonormal basis of the null space.
pub(crate) fn null_space(a: &CMatrix) -> Vec<Vec<Complex64>> {
    let n = a.ncols();
    if n == 0 {
        return Vec::new();
    }
    if a.nrows() == 0 {
        return (0..n)
            .map(|i| (0..n).map(|j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)).collect())
            .collect();
    }
    let d = decompose(a, true);
    let vt = d.vt.as_ref().expect("requested V");
    let cut = d.cutoff();
    (0..n)
        .filter(|&r| d.s.get(r).is_none_or(|&s| s <= cut || s == 0.0))
        // rows of V^H are conjugated right singular vectors
        .map(|r| vt.row(r).iter().map(|z| z.conj()).collect())
        .collect()
}

/// Minimum-norm least-squares solution of `a x = b`.
pub(crate) fn min_norm_solve(a: &CMatrix, b: &[Complex64]) -> Vec<Complex64> {
    let n = a.ncols();
    let zero = Complex64::new(0.0, 0.0);
    if n == 0 || a.nrows() == 0 {
        return vec![zero; n];
    }
    let d = decompose(a, true);
    let (u, vt) = (d.u.as_ref().expect("requested U"), d.vt.as_ref().expect("requested V"));
    let cut = d.cutoff();
    let mut x = vec![zero; n];
    for (k, &s) in d.s.iter().enumerate() {
        if s <= cut || s == 0.0 {
            continue;
        }
        let coef: Complex64 = u.column(k).iter().zip(b).map(|(ui, bi)| ui.conj() * bi).sum::<Complex64>() / s;
        for (xj, v) in x.iter_mut().zip(vt.row(k).iter()) {
            *xj += coef * v.conj();
        }
    }
    x
}

pub(crate) fn max_abs(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub(crate) fn matvec(a: &CMatrix, x: &[Complex64]) -> Vec<Complex64> {
    let xv = DVector::from_column_slice(x);
    (a * xv).iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn rank_and_null_space_of_singular_matrix() {
        let a = CMatrix::from_row_slice(3, 3, &[c(1.0), c(2.0), c(3.0), c(2.0), c(4.0), c(6.0), c(1.0), c(0.0), c(1.0)]);
        assert_eq!(rank(&a), 2);
        let ns = null_space(&a);
        assert_eq!(ns.len(), 1);
        let r = matvec(&a, &ns[0]);
        assert!(max_abs(&r) < 1e-12);
    }

    #[test]
    fn wide_matrix_null_space() {
        let a = CMatrix::from_row_slice(1, 3, &[c(1.0), c(1.0), c(1.0)]);
        assert_eq!(null_space(&a).len(), 2);
    }

    #[test]
    fn min_norm_solution_is_orthogonal_to_kernel() {
        // x + y = 2 has minimum-norm solution (1, 1).
        let a = CMatrix::from_row_slice(1, 2, &[c(1.0), c(1.0)]);
        let x = min_norm_solve(&a, &[c(2.0)]);
        assert!((x[0] - c(1.0)).norm() < 1e-12);
        assert!((x[1] - c(1.0)).norm() < 1e-12);
    }
}
