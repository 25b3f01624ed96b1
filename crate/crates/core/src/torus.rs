//! The noncommutative torus `A_θ`, truncated to modes `|n|, |m| ≤ N`.
//!
//! An element is a finite sum `Σ a_{nm} UⁿVᵐ` with `VU = e^{2πiθ} UV`, so
//! `(UⁿVᵐ)(Uⁿ′Vᵐ′) = e^{2πiθ m n′} U^{n+n′} V^{m+m′}`. Products whose modes leave
//! the box are dropped, and the result carries a flag saying whether that
//! happened. Identity checks are only meaningful when every flag stays set,
//! which is guaranteed when the support radii of the inputs add up to at most `N`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::StructureConstants;
use crate::error::{Error, Result};
use crate::poisson;
use crate::rng::SeededRng;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Largest truncation accepted by [`embed_as_finite_algebra`].
pub const MAX_EMBED_TRUNCATION: usize = 3;

/// The golden-ratio default for θ.
pub fn default_theta() -> f64 {
    (5.0_f64.sqrt() - 1.0) / 2.0
}

#[derive(Clone, Debug, PartialEq)]
pub struct TorusElement {
    theta: f64,
    n: usize,
    coeffs: Vec<Complex64>,
    support_radius: usize,
}

/// One stored mode in the sparse JSON form.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModeJson {
    pub n: i64,
    pub m: i64,
    pub re: f64,
    pub im: f64,
}

impl TorusElement {
    pub fn zero(theta: f64, n: usize) -> Self {
        let side = 2 * n + 1;
        Self {
            theta,
            n,
            coeffs: vec![ZERO; side * side],
            support_radius: 0,
        }
    }

    pub fn unit(theta: f64, n: usize) -> Self {
        Self::monomial(theta, n, 0, 0, ONE).expect("(0,0) is always in range")
    }

    /// `c UⁿVᵐ`.
    pub fn monomial(theta: f64, n: usize, p: i64, q: i64, c: Complex64) -> Result<Self> {
        let mut out = Self::zero(theta, n);
        out.set(p, q, c)?;
        Ok(out)
    }

    pub fn u(theta: f64, n: usize) -> Self {
        Self::monomial(theta, n, 1, 0, ONE).expect("N ≥ 1")
    }

    pub fn v(theta: f64, n: usize) -> Self {
        Self::monomial(theta, n, 0, 1, ONE).expect("N ≥ 1")
    }

    /// Builds from a dense `(2N+1)²` array indexed `[(n+N)(2N+1) + (m+N)]`.
    pub fn from_coeffs(theta: f64, n: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        let side = 2 * n + 1;
        if coeffs.len() != side * side {
            return Err(Error::Shape {
                expected: side * side,
                got: coeffs.len(),
            });
        }
        let mut out = Self {
            theta,
            n,
            coeffs,
            support_radius: 0,
        };
        out.refresh_support();
        Ok(out)
    }

    /// Random coefficients on the modes with `|n| + |m| ≤ radius`.
    pub fn random(theta: f64, n: usize, radius: usize, rng: &mut SeededRng) -> Self {
        let mut out = Self::zero(theta, n);
        let r = radius.min(2 * n) as i64;
        for (p, q) in out.modes() {
            if p.abs() + q.abs() <= r {
                let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let i = out.index(p, q);
                out.coeffs[i] = z;
            }
        }
        out.refresh_support();
        out
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn truncation(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn support_radius(&self) -> usize {
        self.support_radius
    }

    fn side(&self) -> usize {
        2 * self.n + 1
    }

    fn index(&self, p: i64, q: i64) -> usize {
        let n = self.n as i64;
        ((p + n) as usize) * self.side() + (q + n) as usize
    }

    fn in_box(&self, p: i64, q: i64) -> bool {
        let n = self.n as i64;
        p.abs() <= n && q.abs() <= n
    }

    /// All modes in storage order.
    pub fn modes(&self) -> impl Iterator<Item = (i64, i64)> {
        let n = self.n as i64;
        (-n..=n).flat_map(move |p| (-n..=n).map(move |q| (p, q)))
    }

    pub fn get(&self, p: i64, q: i64) -> Complex64 {
        if self.in_box(p, q) {
            self.coeffs[self.index(p, q)]
        } else {
            ZERO
        }
    }

    pub fn set(&mut self, p: i64, q: i64, c: Complex64) -> Result<()> {
        if !self.in_box(p, q) {
            return Err(Error::InvalidIndex(format!("mode ({p}, {q}) outside truncation {}", self.n)));
        }
        let i = self.index(p, q);
        self.coeffs[i] = c;
        self.refresh_support();
        Ok(())
    }

    fn refresh_support(&mut self) {
        let mut r = 0;
        for (p, q) in self.modes() {
            if self.coeffs[self.index(p, q)] != ZERO {
                r = r.max((p.abs() + q.abs()) as usize);
            }
        }
        self.support_radius = r;
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.theta != other.theta || self.n != other.n {
            return Err(Error::TorusMismatch);
        }
        Ok(())
    }

    /// Twisted product. The flag is `false` when some mode fell outside the box.
    pub fn multiply(&self, other: &Self) -> Result<(Self, bool)> {
        self.check_compatible(other)?;
        let mut out = Self::zero(self.theta, self.n);
        let mut exact = true;
        let twist = 2.0 * PI * self.theta;
        for (p, q) in self.modes() {
            let a = self.coeffs[self.index(p, q)];
            if a == ZERO {
                continue;
            }
            for (pp, qq) in other.modes() {
                let b = other.coeffs[other.index(pp, qq)];
                if b == ZERO {
                    continue;
                }
                let (s, t) = (p + pp, q + qq);
                if !out.in_box(s, t) {
                    exact = false;
                    continue;
                }
                let phase = Complex64::from_polar(1.0, twist * (q * pp) as f64);
                let i = out.index(s, t);
                out.coeffs[i] += a * b * phase;
            }
        }
        out.refresh_support();
        Ok((out, exact))
    }

    fn map_modes(&self, f: impl Fn(i64, i64) -> Complex64) -> Self {
        let mut out = self.clone();
        for (p, q) in self.modes() {
            let i = self.index(p, q);
            out.coeffs[i] *= f(p, q);
        }
        out.refresh_support();
        out
    }

    /// `δ₁(UⁿVᵐ) = 2πi n UⁿVᵐ`.
    pub fn delta1(&self) -> Self {
        self.map_modes(|p, _| Complex64::new(0.0, 2.0 * PI * p as f64))
    }

    /// `δ₂(UⁿVᵐ) = 2πi m UⁿVᵐ`.
    pub fn delta2(&self) -> Self {
        self.map_modes(|_, q| Complex64::new(0.0, 2.0 * PI * q as f64))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Self::from_coeffs(self.theta, self.n, coeffs)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-ONE))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|z| *z *= s);
        out.refresh_support();
        out
    }

    pub fn norm_inf(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `p_k(a) = sup (|n|+|m|)ᵏ |a_{nm}|`, with `0⁰ = 1`.
    pub fn seminorm(&self, k: u32) -> f64 {
        self.modes()
            .map(|(p, q)| ((p.abs() + q.abs()) as f64).powi(k as i32) * self.get(p, q).norm())
            .fold(0.0, f64::max)
    }

    /// Sparse form listing the nonzero modes.
    pub fn to_json(&self) -> String {
        let modes: Vec<ModeJson> = self
            .modes()
            .filter_map(|(p, q)| {
                let z = self.get(p, q);
                (z != ZERO).then_some(ModeJson {
                    n: p,
                    m: q,
                    re: z.re,
                    im: z.im,
                })
            })
            .collect();
        serde_json::to_string(&modes).expect("plain data serializes")
    }

    pub fn from_json(theta: f64, n: usize, s: &str) -> Result<Self> {
        let modes: Vec<ModeJson> = serde_json::from_str(s)?;
        let mut out = Self::zero(theta, n);
        for md in modes {
            if !out.in_box(md.n, md.m) {
                return Err(Error::InvalidIndex(format!("mode ({}, {}) outside truncation {n}", md.n, md.m)));
            }
            let i = out.index(md.n, md.m);
            out.coeffs[i] += Complex64::new(md.re, md.im);
        }
        out.refresh_support();
        Ok(out)
    }
}

fn mul2(a: &TorusElement, b: &TorusElement) -> Result<(TorusElement, bool)> {
    a.multiply(b)
}

/// `Π(a₁, a₂) = δ₁(a₁) δ₂(a₂)`.
pub fn canonical_poisson(a1: &TorusElement, a2: &TorusElement) -> Result<(TorusElement, bool)> {
    mul2(&a1.delta1(), &a2.delta2())
}

/// `Π₁(a₁, a₂) = −½ δ₁²(a₁) δ₂²(a₂)`.
pub fn canonical_witness(a1: &TorusElement, a2: &TorusElement) -> Result<(TorusElement, bool)> {
    let (p, exact) = mul2(&a1.delta1().delta1(), &a2.delta2().delta2())?;
    Ok((p.scale(Complex64::new(-0.5, 0.0)), exact))
}

type Bilinear = fn(&TorusElement, &TorusElement) -> Result<(TorusElement, bool)>;

/// `a₁P(a₂,a₃) − P(a₁a₂,a₃) + P(a₁,a₂a₃) − P(a₁,a₂)a₃`, with the magnitude of
/// its largest term and the combined exactness flag.
fn coboundary_of(p: Bilinear, a1: &TorusElement, a2: &TorusElement, a3: &TorusElement) -> Result<(TorusElement, f64, bool)> {
    let (p23, e1) = p(a2, a3)?;
    let (t1, e2) = a1.multiply(&p23)?;
    let (a12, e3) = a1.multiply(a2)?;
    let (t2, e4) = p(&a12, a3)?;
    let (a23, e5) = a2.multiply(a3)?;
    let (t3, e6) = p(a1, &a23)?;
    let (p12, e7) = p(a1, a2)?;
    let (t4, e8) = p12.multiply(a3)?;
    let scale = [&t1, &t2, &t3, &t4].iter().map(|t| t.norm_inf()).fold(0.0, f64::max);
    let out = t1.sub(&t2)?.add(&t3)?.sub(&t4)?;
    Ok((out, scale, e1 && e2 && e3 && e4 && e5 && e6 && e7 && e8))
}

/// A pointwise identity residual with its scale.
#[derive(Clone, Copy, Debug)]
pub struct TorusResidual {
    pub absolute: f64,
    /// `absolute / max(1, largest term)`.
    pub relative: f64,
    pub exact: bool,
}

impl TorusResidual {
    fn new(defect: &TorusElement, scale: f64, exact: bool) -> Self {
        let absolute = defect.norm_inf();
        Self {
            absolute,
            relative: absolute / scale.max(1.0),
            exact,
        }
    }
}

/// (P1) for the canonical structure on one triple.
pub fn leibniz_residual(a1: &TorusElement, a2: &TorusElement, a3: &TorusElement) -> Result<TorusResidual> {
    let (d, scale, exact) = coboundary_of(canonical_poisson, a1, a2, a3)?;
    Ok(TorusResidual::new(&d, scale, exact))
}

/// (P2) for the canonical structure and witness on one triple:
/// `Π(a₁,Π(a₂,a₃)) − Π(Π(a₁,a₂),a₃) − (bΠ₁)(a₁,a₂,a₃)`.
pub fn jacobi_residual(a1: &TorusElement, a2: &TorusElement, a3: &TorusElement) -> Result<TorusResidual> {
    let (p23, e1) = canonical_poisson(a2, a3)?;
    let (l, e2) = canonical_poisson(a1, &p23)?;
    let (p12, e3) = canonical_poisson(a1, a2)?;
    let (r, e4) = canonical_poisson(&p12, a3)?;
    let (b, bscale, e5) = coboundary_of(canonical_witness, a1, a2, a3)?;
    let scale = bscale.max(l.norm_inf()).max(r.norm_inf());
    let d = l.sub(&r)?.sub(&b)?;
    Ok(TorusResidual::new(&d, scale, e1 && e2 && e3 && e4 && e5))
}

/// Mode index helpers for the finite embedding.
fn mode_of(n: usize, idx: usize) -> (i64, i64) {
    let side = 2 * n + 1;
    ((idx / side) as i64 - n as i64, (idx % side) as i64 - n as i64)
}

/// The truncated torus as raw structure constants, together with Π and Π₁
/// as tensors on the monomial basis.
///
/// The truncated product is not associative at the boundary, so generic
/// checks are restricted to basis triples whose partial sums stay in the box
/// ([`TorusEmbedding::is_safe_triple`]).
#[derive(Clone, Debug)]
pub struct TorusEmbedding {
    pub theta: f64,
    pub truncation: usize,
    pub constants: StructureConstants,
    pub pi: Vec<Complex64>,
    pub pi1: Vec<Complex64>,
}

pub fn embed_as_finite_algebra(theta: f64, n_small: usize) -> Result<TorusEmbedding> {
    if n_small > MAX_EMBED_TRUNCATION || n_small == 0 {
        return Err(Error::InvalidIndex(format!(
            "embedding truncation must be 1..={MAX_EMBED_TRUNCATION}, got {n_small}"
        )));
    }
    let side = 2 * n_small + 1;
    let d = side * side;
    let basis: Vec<TorusElement> = (0..d)
        .map(|i| {
            let (p, q) = mode_of(n_small, i);
            TorusElement::monomial(theta, n_small, p, q, ONE).expect("mode in range")
        })
        .collect();
    let mut c = vec![ZERO; d * d * d];
    let mut pi = vec![ZERO; d * d * d];
    let mut pi1 = vec![ZERO; d * d * d];
    for i in 0..d {
        for j in 0..d {
            let row = (i * d + j) * d;
            c[row..row + d].copy_from_slice(basis[i].multiply(&basis[j])?.0.coeffs());
            pi[row..row + d].copy_from_slice(canonical_poisson(&basis[i], &basis[j])?.0.coeffs());
            pi1[row..row + d].copy_from_slice(canonical_witness(&basis[i], &basis[j])?.0.coeffs());
        }
    }
    let labels = (0..d)
        .map(|i| {
            let (p, q) = mode_of(n_small, i);
            format!("U^{p}V^{q}")
        })
        .collect();
    let constants = StructureConstants::new(labels, c, TorusElement::unit(theta, n_small).coeffs().to_vec())?;
    Ok(TorusEmbedding {
        theta,
        truncation: n_small,
        constants,
        pi,
        pi1,
    })
}

impl TorusEmbedding {
    pub fn dim(&self) -> usize {
        self.constants.dim()
    }

    fn fits(&self, p: i64, q: i64) -> bool {
        let n = self.truncation as i64;
        p.abs() <= n && q.abs() <= n
    }

    /// All pairwise and total mode sums of the triple lie in the box.
    pub fn is_safe_triple(&self, i: usize, j: usize, k: usize) -> bool {
        let (a, b, c) = (mode_of(self.truncation, i), mode_of(self.truncation, j), mode_of(self.truncation, k));
        self.fits(a.0 + b.0, a.1 + b.1) && self.fits(b.0 + c.0, b.1 + c.1) && self.fits(a.0 + b.0 + c.0, a.1 + b.1 + c.1)
    }

    pub fn safe_triple_count(&self) -> usize {
        let d = self.dim();
        (0..d * d * d).filter(|t| self.is_safe_triple(t / (d * d), (t / d) % d, t % d)).count()
    }

    pub fn associativity_residual(&self) -> f64 {
        let sc = &self.constants;
        let d = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    if !self.is_safe_triple(i, j, k) {
                        continue;
                    }
                    let ij = row(sc, i, j);
                    let jk = row(sc, j, k);
                    let mut l = vec![ZERO; d];
                    sc.right_basis_mul_into(&ij, k, ONE, &mut l);
                    sc.left_basis_mul_into(i, &jk, -ONE, &mut l);
                    worst = worst.max(l.iter().map(|z| z.norm()).fold(0.0, f64::max));
                }
            }
        }
        worst
    }

    /// (P1) over safe triples, through the generic cochain code.
    pub fn leibniz_residual(&self) -> f64 {
        poisson::leibniz_residual_on(&self.constants, &self.pi, |i, j, k| self.is_safe_triple(i, j, k))
    }

    /// (P2) over safe triples, through the generic cochain code.
    pub fn jacobi_residual(&self) -> f64 {
        poisson::jacobi_residual_on(&self.constants, &self.pi, &self.pi1, |i, j, k| self.is_safe_triple(i, j, k))
    }

    /// Null space of `x ↦ [x, g]` for `g ∈ {U^{±1}, V^{±1}}`, keeping only the
    /// commutator components that land inside the box.
    pub fn safe_center(&self) -> Vec<Vec<Complex64>> {
        let d = self.dim();
        let n = self.truncation as i64;
        let gens = [(1, 0), (-1, 0), (0, 1), (0, -1)];
        let mut m = crate::linalg::CMatrix::zeros(gens.len() * d, d);
        let twist = 2.0 * PI * self.theta;
        for (g, &(gp, gq)) in gens.iter().enumerate() {
            for x in 0..d {
                let (p, q) = mode_of(self.truncation, x);
                let (s, t) = (p + gp, q + gq);
                if s.abs() > n || t.abs() > n {
                    continue;
                }
                // x g − g x = (e^{2πiθ q gp} − e^{2πiθ gq p}) U^s V^t
                let coef = Complex64::from_polar(1.0, twist * (q * gp) as f64) - Complex64::from_polar(1.0, twist * (gq * p) as f64);
                let target = ((s + n) as usize) * (2 * self.truncation + 1) + (t + n) as usize;
                m[(g * d + target, x)] = coef;
            }
        }
        crate::linalg::null_space(&m)
    }

    /// Hamiltonian derivation `a ↦ ½(Π(c,a) − Π(a,c))` of `c` as a matrix on coefficient columns.
    pub fn hamiltonian_matrix(&self, c: &[Complex64]) -> nalgebra::DMatrix<Complex64> {
        let d = self.dim();
        nalgebra::DMatrix::from_fn(d, d, |k, a| {
            (0..d).map(|i| 0.5 * c[i] * (self.pi[(i * d + a) * d + k] - self.pi[(a * d + i) * d + k])).sum()
        })
    }
}

fn row(sc: &StructureConstants, i: usize, j: usize) -> Vec<Complex64> {
    let mut out = vec![ZERO; sc.dim()];
    for &(k, z) in sc.basis_product(i, j) {
        out[k] = z;
    }
    out
}
