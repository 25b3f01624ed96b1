//! Finite-dimensional unital associative algebras over ℂ given by structure
//! constants `e_i · e_j = Σ_k c[i][j][k] e_k`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// Identities are checked against `IDENTITY_TOL` times the operand scale.
pub const IDENTITY_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Raw structure constants with a sparse product table. No associativity
/// check is made here; see [`Algebra`] for the validated wrapper.
#[derive(Clone, Debug, PartialEq)]
pub struct StructureConstants {
    dim: usize,
    labels: Vec<String>,
    c: Vec<Complex64>,
    unit: Vec<Complex64>,
    products: Vec<Vec<(usize, Complex64)>>,
}

impl StructureConstants {
    pub fn new(labels: Vec<String>, c: Vec<Complex64>, unit: Vec<Complex64>) -> Result<Self> {
        let dim = labels.len();
        if dim == 0 {
            return Err(Error::Shape { expected: 1, got: 0 });
        }
        if c.len() != dim * dim * dim {
            return Err(Error::Shape {
                expected: dim * dim * dim,
                got: c.len(),
            });
        }
        if unit.len() != dim {
            return Err(Error::Shape {
                expected: dim,
                got: unit.len(),
            });
        }
        let mut products = Vec::with_capacity(dim * dim);
        for ij in 0..dim * dim {
            let row = &c[ij * dim..(ij + 1) * dim];
            products.push(row.iter().enumerate().filter(|(_, z)| z.norm() > 0.0).map(|(k, z)| (k, *z)).collect());
        }
        Ok(Self {
            dim,
            labels,
            c,
            unit,
            products,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn unit(&self) -> &[Complex64] {
        &self.unit
    }

    /// `c[i][j][k]`.
    pub fn constant(&self, i: usize, j: usize, k: usize) -> Complex64 {
        self.c[(i * self.dim + j) * self.dim + k]
    }

    /// Nonzero entries of `e_i · e_j`.
    pub fn basis_product(&self, i: usize, j: usize) -> &[(usize, Complex64)] {
        &self.products[i * self.dim + j]
    }

    pub(crate) fn scale(&self) -> f64 {
        self.c.iter().map(|z| z.norm()).fold(1.0, f64::max)
    }

    pub fn mul_coeffs(&self, a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.dim];
        for (i, ai) in a.iter().enumerate() {
            if *ai == ZERO {
                continue;
            }
            for (j, bj) in b.iter().enumerate() {
                if *bj == ZERO {
                    continue;
                }
                let w = ai * bj;
                for &(k, ck) in self.basis_product(i, j) {
                    out[k] += w * ck;
                }
            }
        }
        out
    }

    /// `e_i · v`, accumulated into `out` with weight `w`.
    pub(crate) fn left_basis_mul_into(&self, i: usize, v: &[Complex64], w: Complex64, out: &mut [Complex64]) {
        for (m, vm) in v.iter().enumerate() {
            if *vm == ZERO {
                continue;
            }
            let s = w * vm;
            for &(k, ck) in self.basis_product(i, m) {
                out[k] += s * ck;
            }
        }
    }

    /// `v · e_i`, accumulated into `out` with weight `w`.
    pub(crate) fn right_basis_mul_into(&self, v: &[Complex64], i: usize, w: Complex64, out: &mut [Complex64]) {
        for (m, vm) in v.iter().enumerate() {
            if *vm == ZERO {
                continue;
            }
            let s = w * vm;
            for &(k, ck) in self.basis_product(m, i) {
                out[k] += s * ck;
            }
        }
    }

    /// Largest associator coefficient over basis triples.
    pub fn associativity_residual(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0_f64;
        let mut lhs = vec![ZERO; d];
        let mut rhs = vec![ZERO; d];
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    lhs.iter_mut().for_each(|z| *z = ZERO);
                    rhs.iter_mut().for_each(|z| *z = ZERO);
                    for &(m, cij) in self.basis_product(i, j) {
                        for &(l, cmk) in self.basis_product(m, k) {
                            lhs[l] += cij * cmk;
                        }
                    }
                    for &(m, cjk) in self.basis_product(j, k) {
                        for &(l, cim) in self.basis_product(i, m) {
                            rhs[l] += cjk * cim;
                        }
                    }
                    for l in 0..d {
                        worst = worst.max((lhs[l] - rhs[l]).norm());
                    }
                }
            }
        }
        worst
    }

    pub fn unit_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for j in 0..self.dim {
            let mut e = vec![ZERO; self.dim];
            e[j] = ONE;
            let l = self.mul_coeffs(&self.unit, &e);
            let r = self.mul_coeffs(&e, &self.unit);
            for k in 0..self.dim {
                worst = worst.max((l[k] - e[k]).norm()).max((r[k] - e[k]).norm());
            }
        }
        worst
    }
}

/// A validated (associative, unital) algebra. Cloning is cheap.
#[derive(Clone)]
pub struct Algebra(Arc<StructureConstants>);

impl fmt::Debug for Algebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Algebra").field("dim", &self.0.dim).field("labels", &self.0.labels).finish()
    }
}

impl std::ops::Deref for Algebra {
    type Target = StructureConstants;
    fn deref(&self) -> &StructureConstants {
        &self.0
    }
}

impl PartialEq for Algebra {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || *self.0 == *other.0
    }
}

impl Algebra {
    pub fn new(labels: Vec<String>, c: Vec<Complex64>, unit: Vec<Complex64>) -> Result<Self> {
        Self::from_constants(StructureConstants::new(labels, c, unit)?)
    }

    pub fn from_constants(sc: StructureConstants) -> Result<Self> {
        let tol = IDENTITY_TOL * sc.scale() * sc.scale();
        let residual = sc.associativity_residual();
        if residual > tol {
            return Err(Error::NotAssociative { residual });
        }
        let residual = sc.unit_residual();
        if residual > IDENTITY_TOL * sc.scale() {
            return Err(Error::UnitLaw { residual });
        }
        Ok(Self(Arc::new(sc)))
    }

    pub fn constants(&self) -> &StructureConstants {
        &self.0
    }

    /// The full matrix algebra M_n(ℂ) on matrix units `E_ij`, index `i*n + j`.
    pub fn matrix(n: usize) -> Self {
        let dim = n * n;
        let mut c = vec![ZERO; dim * dim * dim];
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    // E_ij E_jl = E_il
                    let a = i * n + j;
                    let b = j * n + l;
                    let r = i * n + l;
                    c[(a * dim + b) * dim + r] = ONE;
                }
            }
        }
        let labels = (0..n).flat_map(|i| (0..n).map(move |j| format!("E{}{}", i + 1, j + 1))).collect();
        let mut unit = vec![ZERO; dim];
        for i in 0..n {
            unit[i * n + i] = ONE;
        }
        Self::new(labels, c, unit).expect("matrix units are associative")
    }

    /// Group algebra ℂ[G] from a multiplication table `table[g][h] = gh`.
    pub fn group_algebra(labels: Vec<String>, table: &[Vec<usize>]) -> Result<Self> {
        let dim = table.len();
        if labels.len() != dim {
            return Err(Error::Shape {
                expected: dim,
                got: labels.len(),
            });
        }
        let mut c = vec![ZERO; dim * dim * dim];
        for (g, row) in table.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Shape { expected: dim, got: row.len() });
            }
            for (h, &gh) in row.iter().enumerate() {
                if gh >= dim {
                    return Err(Error::InvalidIndex(format!("table entry {gh}")));
                }
                c[(g * dim + h) * dim + gh] = ONE;
            }
        }
        let identity = (0..dim)
            .find(|&e| (0..dim).all(|g| table[e][g] == g && table[g][e] == g))
            .ok_or(Error::UnitLaw { residual: 1.0 })?;
        let mut unit = vec![ZERO; dim];
        unit[identity] = ONE;
        Self::new(labels, c, unit)
    }

    /// ℂ[S₃], permutations of {0,1,2} in lexicographic order, composition `(gh)(x) = g(h(x))`.
    pub fn symmetric_group_s3() -> Self {
        let perms = permutations3();
        let table: Vec<Vec<usize>> = perms
            .iter()
            .map(|g| {
                perms
                    .iter()
                    .map(|h| {
                        let gh = [g[h[0]], g[h[1]], g[h[2]]];
                        perms.iter().position(|p| *p == gh).unwrap()
                    })
                    .collect()
            })
            .collect();
        let labels = perms.iter().map(|p| format!("({}{}{})", p[0], p[1], p[2])).collect();
        Self::group_algebra(labels, &table).expect("S3 table is a group")
    }

    /// ℂ[t]/(t^k) on the monomial basis 1, t, …, t^{k-1}.
    pub fn truncated_polynomial(k: usize) -> Self {
        assert!(k >= 1, "truncation order must be positive");
        let mut c = vec![ZERO; k * k * k];
        for i in 0..k {
            for j in 0..k {
                if i + j < k {
                    c[(i * k + j) * k + i + j] = ONE;
                }
            }
        }
        let labels = (0..k)
            .map(|i| match i {
                0 => "1".to_string(),
                1 => "t".to_string(),
                _ => format!("t^{i}"),
            })
            .collect();
        let mut unit = vec![ZERO; k];
        unit[0] = ONE;
        Self::new(labels, c, unit).expect("truncated polynomials are associative")
    }

    /// Tensor product A ⊗ B, basis index `i*dim(B) + j`.
    pub fn tensor_product(a: &Algebra, b: &Algebra) -> Self {
        let (da, db) = (a.dim, b.dim);
        let dim = da * db;
        let mut c = vec![ZERO; dim * dim * dim];
        for i1 in 0..da {
            for j1 in 0..db {
                for i2 in 0..da {
                    for j2 in 0..db {
                        let x = i1 * db + j1;
                        let y = i2 * db + j2;
                        for &(ka, ca) in a.basis_product(i1, i2) {
                            for &(kb, cb) in b.basis_product(j1, j2) {
                                c[(x * dim + y) * dim + ka * db + kb] += ca * cb;
                            }
                        }
                    }
                }
            }
        }
        let labels = a.labels.iter().flat_map(|la| b.labels.iter().map(move |lb| format!("{la}⊗{lb}"))).collect();
        let mut unit = vec![ZERO; dim];
        for i in 0..da {
            for j in 0..db {
                unit[i * db + j] = a.unit[i] * b.unit[j];
            }
        }
        Self::new(labels, c, unit).expect("tensor product of associative algebras")
    }

    pub fn element(&self, coeffs: Vec<Complex64>) -> Result<Element> {
        if coeffs.len() != self.dim {
            return Err(Error::Shape {
                expected: self.dim,
                got: coeffs.len(),
            });
        }
        Ok(Element { algebra: self.clone(), coeffs })
    }

    pub fn basis(&self, i: usize) -> Element {
        let mut coeffs = vec![ZERO; self.dim];
        coeffs[i] = ONE;
        Element { algebra: self.clone(), coeffs }
    }

    pub fn zero(&self) -> Element {
        Element {
            algebra: self.clone(),
            coeffs: vec![ZERO; self.dim],
        }
    }

    pub fn one(&self) -> Element {
        Element {
            algebra: self.clone(),
            coeffs: self.unit.clone(),
        }
    }

    /// Largest `‖[x, e_j]‖` over basis elements.
    pub fn centrality_residual(&self, x: &[Complex64]) -> f64 {
        let mut worst = 0.0_f64;
        for j in 0..self.dim {
            let mut comm = vec![ZERO; self.dim];
            self.right_basis_mul_into(x, j, ONE, &mut comm);
            self.left_basis_mul_into(j, x, -ONE, &mut comm);
            worst = worst.max(linalg::max_abs(&comm));
        }
        worst
    }

    /// Basis of the center, as the null space of the stacked maps x ↦ [x, e_j].
    pub fn center(&self) -> Vec<Element> {
        let d = self.dim;
        let mut m = CMatrix::zeros(d * d, d);
        for i in 0..d {
            for j in 0..d {
                for l in 0..d {
                    m[(j * d + l, i)] = self.constant(i, j, l) - self.constant(j, i, l);
                }
            }
        }
        linalg::null_space(&m)
            .into_iter()
            .map(|coeffs| Element { algebra: self.clone(), coeffs })
            .collect()
    }

    /// Leibniz defect `sup ‖d(e_i e_j) − d(e_i) e_j − e_i d(e_j)‖` of a linear map
    /// acting on coefficient columns.
    pub fn derivation_residual(&self, d: &DMatrix<Complex64>) -> Result<f64> {
        let n = self.dim;
        if d.nrows() != n || d.ncols() != n {
            return Err(Error::Shape {
                expected: n,
                got: d.nrows().max(d.ncols()),
            });
        }
        let image = |i: usize| -> Vec<Complex64> { d.column(i).iter().copied().collect() };
        let mut worst = 0.0_f64;
        for i in 0..n {
            let di = image(i);
            for j in 0..n {
                let dj = image(j);
                let mut r = vec![ZERO; n];
                for &(k, ck) in self.basis_product(i, j) {
                    for l in 0..n {
                        r[l] += ck * d[(l, k)];
                    }
                }
                self.right_basis_mul_into(&di, j, -ONE, &mut r);
                self.left_basis_mul_into(i, &dj, -ONE, &mut r);
                worst = worst.max(linalg::max_abs(&r));
            }
        }
        Ok(worst)
    }

    /// Returns `(passes, residual)` with the default identity tolerance.
    pub fn is_derivation(&self, d: &DMatrix<Complex64>) -> Result<(bool, f64)> {
        let r = self.derivation_residual(d)?;
        let scale = d.iter().map(|z| z.norm()).fold(1.0, f64::max) * self.scale();
        Ok((r <= IDENTITY_TOL * scale, r))
    }

    /// Matrix of x ↦ [a, x] in the column convention.
    pub fn inner_derivation(&self, a: &[Complex64]) -> DMatrix<Complex64> {
        let n = self.dim;
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut col = vec![ZERO; n];
            self.right_basis_mul_into(a, j, ONE, &mut col);
            self.left_basis_mul_into(j, a, -ONE, &mut col);
            for l in 0..n {
                m[(l, j)] = col[l];
            }
        }
        m
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: AlgebraFile = serde_json::from_str(s)?;
        file.into_algebra()
    }

    pub fn to_json(&self) -> String {
        let d = self.dim;
        let c = (0..d)
            .map(|i| (0..d).map(|j| (0..d).map(|k| JsonComplex::from(self.constant(i, j, k))).collect()).collect())
            .collect();
        let file = AlgebraFile {
            dim: d,
            labels: self.labels.clone(),
            c,
            unit: self.unit.iter().copied().map(JsonComplex::from).collect(),
        };
        serde_json::to_string(&file).expect("algebra serializes")
    }
}

fn permutations3() -> Vec<[usize; 3]> {
    vec![[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]]
}

/// A complex number in JSON, either a bare real or an `[re, im]` pair.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JsonComplex {
    Real(f64),
    Pair([f64; 2]),
}

impl From<JsonComplex> for Complex64 {
    fn from(z: JsonComplex) -> Self {
        match z {
            JsonComplex::Real(r) => Complex64::new(r, 0.0),
            JsonComplex::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

impl From<Complex64> for JsonComplex {
    fn from(z: Complex64) -> Self {
        if z.im == 0.0 {
            JsonComplex::Real(z.re)
        } else {
            JsonComplex::Pair([z.re, z.im])
        }
    }
}

/// On-disk algebra definition: `{"dim", "labels", "c", "unit"}`.
#[derive(Debug, Serialize, Deserialize)]
pub struct AlgebraFile {
    pub dim: usize,
    pub labels: Vec<String>,
    pub c: Vec<Vec<Vec<JsonComplex>>>,
    pub unit: Vec<JsonComplex>,
}

impl AlgebraFile {
    pub fn into_algebra(self) -> Result<Algebra> {
        let d = self.dim;
        if self.labels.len() != d {
            return Err(Error::Shape {
                expected: d,
                got: self.labels.len(),
            });
        }
        if self.c.len() != d {
            return Err(Error::Shape {
                expected: d,
                got: self.c.len(),
            });
        }
        let mut c = Vec::with_capacity(d * d * d);
        for row in self.c {
            if row.len() != d {
                return Err(Error::Shape { expected: d, got: row.len() });
            }
            for col in row {
                if col.len() != d {
                    return Err(Error::Shape { expected: d, got: col.len() });
                }
                c.extend(col.into_iter().map(Complex64::from));
            }
        }
        Algebra::new(self.labels, c, self.unit.into_iter().map(Complex64::from).collect())
    }
}

/// An element of a structure-constant algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct Element {
    algebra: Algebra,
    coeffs: Vec<Complex64>,
}

impl Element {
    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    fn check(&self, other: &Element) -> Result<()> {
        if self.algebra != other.algebra {
            return Err(Error::AlgebraMismatch);
        }
        Ok(())
    }

    pub fn mul(&self, other: &Element) -> Result<Element> {
        self.check(other)?;
        Ok(Element {
            algebra: self.algebra.clone(),
            coeffs: self.algebra.mul_coeffs(&self.coeffs, &other.coeffs),
        })
    }

    /// `[a, b] = ab − ba`.
    pub fn commutator(&self, other: &Element) -> Result<Element> {
        let ab = self.mul(other)?;
        let ba = other.mul(self)?;
        Ok(ab.sub(&ba))
    }

    pub fn add(&self, other: &Element) -> Element {
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Element {
            algebra: self.algebra.clone(),
            coeffs,
        }
    }

    pub fn sub(&self, other: &Element) -> Element {
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Element {
            algebra: self.algebra.clone(),
            coeffs,
        }
    }

    pub fn scale(&self, s: Complex64) -> Element {
        Element {
            algebra: self.algebra.clone(),
            coeffs: self.coeffs.iter().map(|a| a * s).collect(),
        }
    }

    pub fn norm_inf(&self) -> f64 {
        linalg::max_abs(&self.coeffs)
    }
}
