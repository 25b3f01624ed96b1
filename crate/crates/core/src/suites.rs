//! Verification suites, grid-convergence studies and flow demonstrations.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::Algebra;
use crate::classical::{self, BivectorField, ClassicalSystem, Connection, ScalarField, Trajectory};
use crate::error::{Error, Result};
use crate::foliation::{self, BaseFunction, Density, FoliatedTorusModel, FormDegree, GroupoidKernel, MFunction};
use crate::hochschild::{self, Cochain};
use crate::poisson;
use crate::report::{CheckEntry, VerificationReport};
use crate::rng::{seeded, SeededRng};
use crate::torus::{self, TorusElement};

pub const SUITE_NAMES: [&str; 6] = ["hochschild", "matrix", "torus", "classical", "foliation", "all"];
pub const CONVERGENCE_CHECKS: [&str; 4] = ["leibniz", "theorem", "p2witness", "associativity"];

/// Largest kernel (grid points over `(x, x′, y)`) the foliation suite will allocate.
pub const MAX_KERNEL_POINTS: usize = 8_000_000;
/// Frequencies of random kernels are bounded by this on every axis.
pub const KERNEL_BANDWIDTH: usize = 2;

/// Settings shared by the suites. Missing keys take their defaults.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Rotation number of the torus.
    pub theta: f64,
    /// Torus modes kept: `|n|, |m| ≤ truncation`.
    pub truncation: usize,
    /// Seeded triples for the torus identities.
    pub torus_triples: usize,
    /// Random cochains per algebra in the Hochschild suite.
    pub cochains: usize,
    /// Sample points in the classical suite.
    pub classical_points: usize,
    pub p: usize,
    pub q: usize,
    /// Grid points per coordinate, leaves and base alike.
    pub grid: usize,
    /// Finer grid for the (P2) refinement check; `None` skips it.
    pub refine_grid: Option<usize>,
    pub density: String,
    /// JSON for the `userfourier` density.
    pub density_json: Option<String>,
    /// Base-function preset used as the Hamiltonian.
    pub hamiltonian: String,
    /// Replaces every check's tolerance when set.
    pub tol: Option<f64>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            theta: torus::default_theta(),
            truncation: 16,
            torus_triples: 50,
            cochains: 100,
            classical_points: 100,
            p: 1,
            q: 2,
            grid: 32,
            refine_grid: Some(48),
            density: "expsin".into(),
            density_json: None,
            hamiltonian: "sin".into(),
            tol: None,
        }
    }
}

impl SuiteConfig {
    pub fn density(&self) -> Result<Density> {
        Density::by_name(&self.density, self.density_json.as_deref())
    }

    pub fn model(&self, grid: usize) -> Result<FoliatedTorusModel> {
        let points = (grid as f64).powi((2 * self.p + self.q) as i32);
        if points > MAX_KERNEL_POINTS as f64 {
            return Err(Error::TooLarge {
                entries: points as usize,
                limit: MAX_KERNEL_POINTS,
            });
        }
        FoliatedTorusModel::new(self.p, self.q, grid, grid, self.density()?)
    }
}

/// Runs one suite, or every suite for `"all"`, and returns its report.
pub fn run_suite(name: &str, config: &SuiteConfig) -> Result<VerificationReport> {
    let start = Instant::now();
    let entries = match name {
        "hochschild" => hochschild_suite(config)?,
        "matrix" => matrix_suite(config)?,
        "torus" => torus_suite(config)?,
        "classical" => classical_suite(config)?,
        "foliation" => foliation_suite(config)?,
        "all" => {
            let mut all = Vec::new();
            for suite in &SUITE_NAMES[..5] {
                for mut e in run_suite(suite, config)?.entries {
                    e.check = format!("{suite}.{}", e.check);
                    all.push(e);
                }
            }
            all
        }
        other => return Err(Error::Config(format!("unknown suite '{other}' (expected one of {SUITE_NAMES:?})"))),
    };
    let echo = serde_json::to_value(config)?;
    let mut report = VerificationReport::new(name, echo, config.seed);
    report.extend(entries.into_iter().map(|e| match config.tol {
        Some(t) => CheckEntry::new(e.check, e.residual, t).with_witness(e.witness),
        None => e,
    }));
    report.finalize();
    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok(report)
}

fn relative(defect: f64, scale: f64) -> f64 {
    defect / scale.max(1.0)
}

// ---------------------------------------------------------------- Hochschild

/// Algebras exercised by the Hochschild suite.
pub fn hochschild_algebras() -> Vec<(&'static str, Algebra)> {
    vec![
        ("m2", Algebra::matrix(2)),
        ("m3", Algebra::matrix(3)),
        ("s3", Algebra::symmetric_group_s3()),
        ("t3", Algebra::truncated_polynomial(3)),
    ]
}

const HOCHSCHILD_TOL: f64 = 1e-12;

fn hochschild_suite(config: &SuiteConfig) -> Result<Vec<CheckEntry>> {
    let mut out = Vec::new();
    let mut rng = seeded(config.seed);
    for (name, alg) in hochschild_algebras() {
        let mut bb = 0.0_f64;
        for i in 0..config.cochains {
            let c = Cochain::random(&alg, i % 4, &mut rng)?;
            bb = bb.max(relative(c.differential()?.differential()?.norm_inf(), c.norm_inf()));
        }
        out.push(CheckEntry::new(format!("bb_zero/{name}"), bb, HOCHSCHILD_TOL));

        let mut anti = 0.0_f64;
        for (p, q) in [(0, 2), (1, 1), (1, 2), (2, 2), (1, 3), (2, 3)] {
            let u = Cochain::random(&alg, p, &mut rng)?;
            let v = Cochain::random(&alg, q, &mut rng)?;
            let s = if ((p as i64 - 1) * (q as i64 - 1)).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let sum = u.gerstenhaber(&v)?.add(&v.gerstenhaber(&u)?.scale(Complex64::new(s, 0.0)))?;
            anti = anti.max(relative(sum.norm_inf(), u.norm_inf() * v.norm_inf()));
        }
        out.push(CheckEntry::new(format!("bracket_antisymmetry/{name}"), anti, HOCHSCHILD_TOL));

        let pi = Cochain::random(&alg, 2, &mut rng)?;
        let twice = pi.pre_lie(&pi)?.scale(Complex64::new(2.0, 0.0));
        let defect = pi.gerstenhaber(&pi)?.sub(&twice)?.norm_inf();
        out.push(CheckEntry::new(
            format!("self_bracket/{name}"),
            relative(defect, pi.norm_inf().powi(2)),
            HOCHSCHILD_TOL,
        ));
    }

    let exact = |check: String, got: usize, want: usize| CheckEntry::new(check, got.abs_diff(want) as f64, 0.0);
    for n in [2, 3] {
        let alg = Algebra::matrix(n);
        out.push(exact(format!("h0_dim/m{n}"), hochschild::cohomology_dimension(&alg, 0)?, 1));
        out.push(exact(format!("h1_dim/m{n}"), hochschild::cohomology_dimension(&alg, 1)?, 0));
    }
    for (name, alg) in [
        ("t3", Algebra::truncated_polynomial(3)),
        (
            "t3xt3",
            Algebra::tensor_product(&Algebra::truncated_polynomial(3), &Algebra::truncated_polynomial(3)),
        ),
    ] {
        out.push(exact(format!("h0_dim/{name}"), hochschild::cohomology_dimension(&alg, 0)?, alg.dim()));
    }
    Ok(out)
}

// ------------------------------------------------------------ Matrix / Poisson

fn matrix_suite(config: &SuiteConfig) -> Result<Vec<CheckEntry>> {
    let tol = poisson::DERIVED_TOL;
    let mut out = Vec::new();
    for (name, ps) in poisson::builtin_structures(config.seed)? {
        let alg = ps.algebra().clone();
        let center: Vec<Vec<Complex64>> = alg.center().into_iter().map(|z| z.into_coeffs()).collect();
        let (mut derivation, mut antisym, mut plus, mut minus, mut lie) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
        for c in &center {
            derivation = derivation.max(ps.hamiltonian_derivation(c)?.derivation_residual);
            for e in &center {
                antisym = antisym.max(ps.center_bracket(c, e)?.antisymmetry_residual);
                let r = ps.check_proposition(c, e, tol)?;
                plus = plus.max(r.commutator_plus_residual);
                minus = minus.max(r.commutator_minus_residual);
                lie = lie.max(r.lie_derivative_residual);
            }
        }
        out.push(CheckEntry::new(format!("derivation/{name}"), derivation, tol));
        out.push(CheckEntry::new(format!("center_antisymmetry/{name}"), antisym, tol));
        out.push(CheckEntry::new(format!("center_jacobi/{name}"), ps.center_jacobi_residual(), tol));
        out.push(CheckEntry::new(format!("commutator_inner/{name}"), plus, tol));
        out.push(CheckEntry::new(format!("commutator_inner_jacobi_sign/{name}"), minus, tol));
        out.push(CheckEntry::new(format!("lie_derivative_coboundary/{name}"), lie, tol));
        if let Some(w) = ps.witness() {
            out.push(CheckEntry::new(
                format!("jacobi_witness/{name}"),
                poisson::check_jacobi_witness(ps.pi(), w)?,
                tol,
            ));
        }
    }
    Ok(out)
}

// --------------------------------------------------------------------- Torus

const TORUS_P1_TOL: f64 = 1e-12;
const TORUS_P2_TOL: f64 = 1e-10;

/// Random elements whose triple products stay inside the truncation box.
pub fn torus_safe_element(theta: f64, truncation: usize, rng: &mut SeededRng) -> TorusElement {
    TorusElement::random(theta, truncation, truncation / 3, rng)
}

fn torus_suite(config: &SuiteConfig) -> Result<Vec<CheckEntry>> {
    let (theta, n) = (config.theta, config.truncation);
    if n < 3 {
        return Err(Error::Config(format!("torus truncation must be at least 3, got {n}")));
    }
    let mut rng = seeded(config.seed);
    let (mut p1, mut p2, mut assoc, mut exact) = (0.0_f64, 0.0_f64, 0.0_f64, true);
    for _ in 0..config.torus_triples {
        let a: Vec<TorusElement> = (0..3).map(|_| torus_safe_element(theta, n, &mut rng)).collect();
        let r1 = torus::leibniz_residual(&a[0], &a[1], &a[2])?;
        let r2 = torus::jacobi_residual(&a[0], &a[1], &a[2])?;
        p1 = p1.max(r1.relative);
        p2 = p2.max(r2.relative);
        exact &= r1.exact && r2.exact;
        let (ab, _) = a[0].multiply(&a[1])?;
        let (bc, _) = a[1].multiply(&a[2])?;
        let (l, _) = ab.multiply(&a[2])?;
        let (r, _) = a[0].multiply(&bc)?;
        assoc = assoc.max(relative(l.sub(&r)?.norm_inf(), l.norm_inf()));
    }
    let mut out = vec![
        CheckEntry::new("p1", p1, TORUS_P1_TOL),
        CheckEntry::new("p2_witness", p2, TORUS_P2_TOL),
        CheckEntry::new("associativity", assoc, TORUS_P1_TOL),
        CheckEntry::flag("no_truncation", exact),
    ];
    let emb = torus::embed_as_finite_algebra(theta, 2)?;
    out.push(CheckEntry::new("embedded_associativity", emb.associativity_residual(), TORUS_P1_TOL));
    out.push(CheckEntry::new("embedded_p1", emb.leibniz_residual(), 1e-9));
    out.push(CheckEntry::new("embedded_p2_witness", emb.jacobi_residual(), 1e-7));
    Ok(out)
}

// ----------------------------------------------------------------- Classical

const SCHOUTEN_TOL: f64 = 1e-9;
const BRACKET_TOL: f64 = 1e-6;
const FLOW_TOL: f64 = 1e-8;

fn classical_suite(config: &SuiteConfig) -> Result<Vec<CheckEntry>> {
    let h = classical::DEFAULT_STEP;
    let n = config.classical_points;
    let mut out = Vec::new();

    let constant = BivectorField::constant(DMatrix::from_row_slice(
        4,
        4,
        &[0.0, 1.0, -0.5, 2.0, -1.0, 0.0, 0.3, 0.7, 0.5, -0.3, 0.0, -1.2, -2.0, -0.7, 1.2, 0.0],
    ))?;
    let pts4 = classical::sample_points(4, n, config.seed);
    let pts3 = classical::sample_points(3, n, config.seed);
    out.push(CheckEntry::new(
        "schouten/constant4d",
        classical::schouten_residual(&constant, &pts4, h)?,
        SCHOUTEN_TOL,
    ));
    let so3 = BivectorField::so3star();
    out.push(CheckEntry::new("schouten/so3star", classical::schouten_residual(&so3, &pts3, h)?, SCHOUTEN_TOL));

    let f = ScalarField::new(3, |x| x[0] * x[1] + x[2].sin());
    let g = ScalarField::new(3, |x| (x[0] - x[2]).cos());
    let k = ScalarField::new(3, |x| x[1].exp());
    let gk = g.product(&k)?;
    let (bgk, bkf, bfg) = (
        classical::bracket_field(&g, &k, &so3, h)?,
        classical::bracket_field(&k, &f, &so3, h)?,
        classical::bracket_field(&f, &g, &so3, h)?,
    );
    let (mut leibniz, mut jacobi) = (0.0_f64, 0.0_f64);
    // the nested brackets use a coarser outer step to keep rounding below truncation error
    let outer = 1e-2;
    for x in &pts3 {
        let lhs = classical::poisson_bracket(&f, &gk, &so3, x, h)?;
        let rhs = classical::poisson_bracket(&f, &g, &so3, x, h)? * k.eval(x) + g.eval(x) * classical::poisson_bracket(&f, &k, &so3, x, h)?;
        leibniz = leibniz.max((lhs - rhs).abs());
        let j = classical::poisson_bracket(&f, &bgk, &so3, x, outer)?
            + classical::poisson_bracket(&g, &bkf, &so3, x, outer)?
            + classical::poisson_bracket(&k, &bfg, &so3, x, outer)?;
        jacobi = jacobi.max(j.abs());
    }
    out.push(CheckEntry::new("bracket_leibniz/so3star", leibniz, BRACKET_TOL));
    out.push(CheckEntry::new("bracket_jacobi/so3star", jacobi, BRACKET_TOL));
    out.push(CheckEntry::new("fd_order/so3star", (finite_difference_order() - 4.0).abs(), 0.5));

    let closure = flow_demo("harmonic", Some(vec![1.0, 0.0]), 2.0 * PI, 1e-3, None)?.closure;
    out.push(CheckEntry::new("flow_closure/harmonic", closure, FLOW_TOL));
    let so3_flow = flow_demo("so3star", None, 10.0, 1e-3, None)?;
    out.push(CheckEntry::new("casimir_drift/so3star", so3_flow.casimir_drift.unwrap_or(f64::NAN), FLOW_TOL));

    let l = BivectorField::canonical2d();
    let fs = [
        ScalarField::new(2, |x| (x[0] + 0.5 * x[1]).sin()),
        ScalarField::new(2, |x| x[0] * x[1] * x[1]),
        ScalarField::new(2, |x| (0.7 * x[0] - x[1]).exp()),
    ];
    let fit = classical::fit_jacobi_witness(
        [&fs[0], &fs[1], &fs[2]],
        &l,
        &Connection::flat(2),
        &classical::sample_points(2, n.min(24), config.seed),
        h,
    )?;
    out.push(CheckEntry::new("p2_witness/canonical2d", fit.residual_at_minus_half, BRACKET_TOL));
    out.push(CheckEntry::new("p2_fitted_lambda_offset", (fit.fitted_lambda + 0.5).abs(), BRACKET_TOL));
    Ok(out)
}

/// Observed order of the bracket's finite differences, from steps 0.1 and 0.05.
pub fn finite_difference_order() -> f64 {
    let l = BivectorField::so3star();
    let f = ScalarField::new(3, |x| (x[0] + 2.0 * x[1]).sin());
    let g = ScalarField::new(3, |x| (x[1] * x[2]).exp());
    let x: [f64; 3] = [0.3, -0.4, 0.5];
    let u = x[0] + 2.0 * x[1];
    let df = [u.cos(), 2.0 * u.cos(), 0.0];
    let e = (x[1] * x[2]).exp();
    let dg = [0.0, x[2] * e, x[1] * e];
    let lm = l.eval(&x);
    let exact: f64 = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| lm[(i, j)] * df[i] * dg[j]).sum();
    let err = |h: f64| (classical::poisson_bracket(&f, &g, &l, &x, h).expect("dimensions agree") - exact).abs();
    (err(0.1) / err(0.05)).log2()
}

// ----------------------------------------------------------------- Foliation

const ASSOCIATIVITY_TOL: f64 = 1e-10;
const INVOLUTION_TOL: f64 = 1e-12;
const LEIBNIZ_TOL: f64 = 1e-9;
const LEMMA_TOL: f64 = 1e-12;
const THEOREM_TOL: f64 = 1e-9;
const P2_TOL: f64 = 1e-7;

/// Three seeded random kernels on the model.
pub fn random_kernels(model: &FoliatedTorusModel, seed: u64) -> [GroupoidKernel; 3] {
    let mut rng = seeded(seed);
    [0, 1, 2].map(|_| GroupoidKernel::random(model, FormDegree::Scalar, KERNEL_BANDWIDTH, &mut rng))
}

fn foliation_suite(config: &SuiteConfig) -> Result<Vec<CheckEntry>> {
    let m = config.model(config.grid)?;
    let tau = 2.0 * PI;
    let [k1, k2, k3] = random_kernels(&m, config.seed);
    let h = BaseFunction::preset(&m, &config.hamiltonian)?;
    let mut out = vec![
        CheckEntry::new("associativity", foliation::bracket::associativity_residual(&k1, &k2, &k3)?, ASSOCIATIVITY_TOL),
        CheckEntry::new("involution", foliation::bracket::involution_residual(&k1, &k2)?, INVOLUTION_TOL),
        CheckEntry::new("leibniz", foliation::leibniz_residual(&k1, &k2)?, LEIBNIZ_TOL),
        CheckEntry::new("d2_symmetry", foliation::bracket::second_differential_symmetry_defect(&k1)?, LEIBNIZ_TOL),
        CheckEntry::new("p1", foliation::p1_residual(&k1, &k2, &k3)?, LEIBNIZ_TOL),
    ];
    let omega = GroupoidKernel::random(&m, FormDegree::OneForm, KERNEL_BANDWIDTH, &mut seeded(config.seed ^ 0x5eed));
    out.push(CheckEntry::new(
        "graded_leibniz",
        foliation::bracket::graded_leibniz_residual(&k1, &omega)?,
        LEIBNIZ_TOL,
    ));

    let a: [MFunction; 3] = [
        MFunction::from_fn(&m, |x, y| Complex64::new((tau * y[0]).cos() + (tau * x[0]).sin(), 0.0)),
        MFunction::from_fn(&m, |x, y| Complex64::new(0.5, (tau * (y[1] - x[0])).sin())),
        MFunction::from_fn(&m, |_, y| Complex64::new((tau * (y[0] + y[1])).sin(), 0.0)),
    ];
    let e: Vec<foliation::EnlargedElement> = [&k1, &k2, &k3]
        .iter()
        .zip(&a)
        .map(|(k, a)| foliation::EnlargedElement::new((*k).clone(), a.clone()))
        .collect::<Result<_>>()?;
    out.push(CheckEntry::new(
        "p1_extended",
        foliation::extended_p1_residual(&e[0], &e[1], &e[2])?,
        LEIBNIZ_TOL,
    ));

    let lemma_a = MFunction::from_fn(&m, |x, y| Complex64::new((tau * y[1]).cos(), 0.3 * (tau * (x[0] + y[0])).sin()));
    out.push(CheckEntry::new("lemma", foliation::check_lemma(&h, &lemma_a)?.residual, LEMMA_TOL));
    let theorem_a = MFunction::from_fn(&m, |x, y| Complex64::new((tau * (x[0] - y[1])).cos(), 0.2 * (tau * y[0]).sin()));
    let thm = foliation::check_main_theorem(&h, &k1, Some(&theorem_a), THEOREM_TOL)?;
    out.push(CheckEntry::new("theorem", thm.kernel_residual, THEOREM_TOL));
    out.push(CheckEntry::new("theorem_function_part", thm.function_residual, THEOREM_TOL));
    let vh_h = foliation::hamiltonian_field(&h).apply(&h.to_m_function())?.norm_inf();
    out.push(CheckEntry::new("hamiltonian_annihilates_h", vh_h, 1e-10));
    let lie = |k: &GroupoidKernel| foliation::lie_derivative_operator(&h, k);
    let lie_defect = lie(&k1.convolve(&k2)?)?
        .sub(&lie(&k1)?.convolve(&k2)?)?
        .sub(&k1.convolve(&lie(&k2)?)?)?
        .norm_inf();
    out.push(CheckEntry::new("lie_derivation", lie_defect, LEIBNIZ_TOL));

    let p2 = foliation::p2_check(&k1, &k2, &k3)?;
    out.push(CheckEntry::new("p2_witness", p2.residual, P2_TOL));
    if let Some(fine) = config.refine_grid {
        let mf = config.model(fine)?;
        let [f1, f2, f3] = random_kernels(&mf, config.seed);
        let fine_p2 = foliation::p2_check(&f1, &f2, &f3)?;
        // ratio ≤ 1: the finer grid does at least as well
        out.push(CheckEntry::new(format!("p2_refinement_ratio/{fine}"), fine_p2.residual / p2.residual, 1.0));
    }
    Ok(out)
}

// --------------------------------------------------------------- Convergence

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRow {
    pub grid: usize,
    pub residual: f64,
    /// Size of the quantities compared, used for the roundoff floor.
    pub scale: f64,
    /// `log(r_prev / r) / log(n / n_prev)`; absent on the first row.
    pub order: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceStudy {
    pub check: String,
    pub rows: Vec<ConvergenceRow>,
    /// Every refinement gains a factor 10 or lands on the roundoff floor.
    pub monotone: bool,
}

/// Roundoff floor relative to the size of the compared quantities.
pub const FLOOR_RELATIVE: f64 = 1e-12;

impl ConvergenceStudy {
    pub fn floor(scale: f64) -> f64 {
        FLOOR_RELATIVE * scale.max(1.0)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("grid,residual,scale,order\n");
        for r in &self.rows {
            let order = r.order.map(|o| format!("{o:.3}")).unwrap_or_default();
            let _ = writeln!(s, "{},{:.6e},{:.6e},{}", r.grid, r.residual, r.scale, order);
        }
        s
    }
}

/// Residual of `check` and the scale it is measured against, on an `n`-point grid.
pub fn convergence_point(check: &str, n: usize, config: &SuiteConfig) -> Result<(f64, f64)> {
    let m = config.model(n)?;
    let [k1, k2, k3] = random_kernels(&m, config.seed);
    Ok(match check {
        "leibniz" => {
            let scale = foliation::transverse_differential(&k1.convolve(&k2)?)?.norm_inf();
            (foliation::leibniz_residual(&k1, &k2)?, scale)
        }
        "theorem" => {
            let h = BaseFunction::preset(&m, &config.hamiltonian)?;
            let r = foliation::check_main_theorem(&h, &k1, None, THEOREM_TOL)?;
            (r.residual, r.magnitude)
        }
        "p2witness" => {
            let r = foliation::p2_check(&k1, &k2, &k3)?;
            (r.residual, r.jacobiator_norm)
        }
        "associativity" => {
            let l = k1.convolve(&k2)?.convolve(&k3)?;
            (foliation::bracket::associativity_residual(&k1, &k2, &k3)?, l.norm_inf())
        }
        other => {
            return Err(Error::Config(format!(
                "unknown convergence check '{other}' (expected one of {CONVERGENCE_CHECKS:?})"
            )))
        }
    })
}

pub fn convergence_study(check: &str, grids: &[usize], config: &SuiteConfig) -> Result<ConvergenceStudy> {
    if !CONVERGENCE_CHECKS.contains(&check) {
        return Err(Error::Config(format!(
            "unknown convergence check '{check}' (expected one of {CONVERGENCE_CHECKS:?})"
        )));
    }
    if grids.is_empty() || grids.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("grids must be non-empty and strictly increasing".into()));
    }
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(grids.len());
    for &n in grids {
        let (residual, scale) = convergence_point(check, n, config)?;
        let order = rows.last().map(|p| (p.residual / residual).ln() / (n as f64 / p.grid as f64).ln());
        rows.push(ConvergenceRow {
            grid: n,
            residual,
            scale,
            order,
        });
    }
    let monotone = rows
        .windows(2)
        .all(|w| w[1].residual <= (w[0].residual / 10.0).max(ConvergenceStudy::floor(w[1].scale)));
    Ok(ConvergenceStudy {
        check: check.into(),
        rows,
        monotone,
    })
}

// ---------------------------------------------------------------------- Flow

#[derive(Clone, Debug, Serialize)]
pub struct FlowDemo {
    pub system: String,
    pub trajectory: Trajectory,
    /// Relative drift of the Hamiltonian.
    pub hamiltonian_drift: f64,
    /// Relative drift of the Casimir, for systems that have one.
    pub casimir_drift: Option<f64>,
    /// `‖x(T) − x(0)‖_∞`.
    pub closure: f64,
}

/// Integrates the Hamiltonian flow of a library system with RK4.
pub fn flow_demo(system: &str, x0: Option<Vec<f64>>, t_end: f64, dt: f64, user_json: Option<&str>) -> Result<FlowDemo> {
    let sys = ClassicalSystem::by_name(system, user_json)?;
    let x0 = x0.unwrap_or_else(|| sys.default_x0.clone());
    if x0.len() != sys.dim() {
        return Err(Error::Dimension(x0.len(), sys.dim()));
    }
    let trajectory = classical::integrate_flow(&sys.vector_field(classical::DEFAULT_STEP), &x0, t_end, dt, Some(&sys.hamiltonian))?;
    let casimir_drift = sys.casimir.as_ref().map(|c| {
        let c0 = c.eval(&x0);
        trajectory.states.iter().map(|x| (c.eval(x) - c0).abs() / c0.abs().max(1.0)).fold(0.0, f64::max)
    });
    let closure = trajectory.last().iter().zip(&x0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(FlowDemo {
        system: system.into(),
        hamiltonian_drift: trajectory.drift.unwrap_or(0.0),
        casimir_drift,
        closure,
        trajectory,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fast() -> SuiteConfig {
        SuiteConfig {
            grid: 16,
            refine_grid: None,
            cochains: 8,
            torus_triples: 5,
            classical_points: 10,
            ..SuiteConfig::default()
        }
    }

    #[test]
    fn unknown_names_are_errors() {
        assert!(matches!(run_suite("nope", &fast()), Err(Error::Config(_))));
        assert!(matches!(convergence_study("nope", &[8], &fast()), Err(Error::Config(_))));
        assert!(matches!(convergence_study("leibniz", &[16, 8], &fast()), Err(Error::Config(_))));
        assert!(matches!(flow_demo("nope", None, 1.0, 0.1, None), Err(Error::Config(_))));
    }

    #[test]
    fn oversized_models_are_refused() {
        let c = SuiteConfig {
            p: 2,
            grid: 64,
            ..SuiteConfig::default()
        };
        assert!(matches!(c.model(64), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn hochschild_suite_passes() {
        let r = run_suite("hochschild", &fast()).unwrap();
        assert!(r.all_pass(), "{:?}", r.failures().collect::<Vec<_>>());
        assert!(r.entry("h1_dim/m3").is_some());
    }

    #[test]
    fn tolerance_override_applies_to_every_entry() {
        let strict = SuiteConfig { tol: Some(0.0), ..fast() };
        let r = run_suite("torus", &strict).unwrap();
        assert!(r.entries.iter().all(|e| e.tolerance == 0.0));
        let loose = SuiteConfig { tol: Some(1e300), ..fast() };
        assert!(run_suite("torus", &loose).unwrap().all_pass());
    }

    #[test]
    fn flows() {
        let d = flow_demo("harmonic", Some(vec![1.0, 0.0]), 2.0 * PI, 1e-3, None).unwrap();
        assert!(d.closure <= 1e-8, "{}", d.closure);
        let zero = r#"{"lambda": [[0, 1], [-1, 0]], "hamiltonian": []}"#;
        let s = flow_demo("userpolynomial", Some(vec![0.3, -0.2]), 1.0, 0.1, Some(zero)).unwrap();
        assert_eq!(s.closure, 0.0);
        let so3 = flow_demo("so3star", None, 10.0, 1e-3, None).unwrap();
        assert!(so3.casimir_drift.unwrap() <= 1e-8);
        assert!(matches!(flow_demo("harmonic", Some(vec![1.0]), 1.0, 0.1, None), Err(Error::Dimension(1, 2))));
    }

    #[test]
    fn flat_density_leibniz_is_exact_once_resolved() {
        let c = SuiteConfig {
            density: "const".into(),
            ..fast()
        };
        // n = 8 aliases the products of the Hamiltonian with bandwidth-2 kernels.
        let s = convergence_study("leibniz", &[8, 16], &c).unwrap();
        assert!(s.rows[0].residual > 1e-3 && s.rows[1].residual <= 1e-12, "{s:?}");
        assert!(s.monotone);
        assert!(s.to_csv().starts_with("grid,residual,scale,order\n8,"));
    }

    #[test]
    fn config_round_trips_through_json() {
        let c = SuiteConfig::default();
        let v = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<SuiteConfig>(&v).unwrap(), c);
        let partial: SuiteConfig = serde_json::from_str(r#"{"grid": 16}"#).unwrap();
        assert_eq!(partial.grid, 16);
        assert_eq!(partial.seed, 42);
        assert!(serde_json::from_str::<SuiteConfig>(r#"{"gird": 16}"#).is_err());
    }
}
