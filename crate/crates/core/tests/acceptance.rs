//! Acceptance criteria for the whole library.
//!
//! Each test prints a `criterion N: PASS` or `criterion N: FAIL` line on
//! stderr (bypassing libtest capture), followed by the residual table it
//! judged. Tolerances are pinned here and compared against the ones the
//! suites report, so loosening a suite constant breaks this file.
//! The criteria run one at a time so the wall-clock limits are meaningful.

use std::io::Write;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use ncpoisson::suites::{self, convergence_study, run_suite, SuiteConfig};
use ncpoisson::VerificationReport;

static SERIAL: Mutex<()> = Mutex::new(());

fn say(line: &str) {
    let _ = writeln!(std::io::stderr(), "{line}");
}

/// A named requirement: every entry whose check name starts with `prefix`
/// must exist, carry exactly `tol`, and pass.
struct Pin {
    prefix: &'static str,
    tol: f64,
}

const fn pin(prefix: &'static str, tol: f64) -> Pin {
    Pin { prefix, tol }
}

/// Judges `report` against `pins` and the runtime limit, prints the verdict
/// and fails the test when anything is off.
fn judge(n: u32, report: &VerificationReport, pins: &[Pin], elapsed: Duration, limit: Duration) {
    let mut problems = Vec::new();
    for p in pins {
        let hits: Vec<_> = report
            .entries
            .iter()
            .filter(|e| e.check == p.prefix || e.check.starts_with(&format!("{}/", p.prefix)))
            .collect();
        if hits.is_empty() {
            problems.push(format!("no check named {}", p.prefix));
        }
        for e in hits {
            say(&format!(
                "    {} {:<44} {:>11.3e} <= {:.0e}",
                if e.pass { "ok  " } else { "FAIL" },
                e.check,
                e.residual,
                e.tolerance
            ));
            if e.tolerance != p.tol {
                problems.push(format!("{} reports tolerance {:e}, pinned {:e}", e.check, e.tolerance, p.tol));
            }
            if !e.pass {
                problems.push(format!("{}: residual {:.3e} exceeds {:.0e}", e.check, e.residual, e.tolerance));
            }
        }
    }
    if elapsed > limit {
        problems.push(format!("took {:.1}s, limit {:.0}s", elapsed.as_secs_f64(), limit.as_secs_f64()));
    }
    verdict(n, elapsed, problems);
}

fn verdict(n: u32, elapsed: Duration, problems: Vec<String>) {
    let status = if problems.is_empty() { "PASS" } else { "FAIL" };
    say(&format!("criterion {n}: {status} ({:.1}s)", elapsed.as_secs_f64()));
    for p in &problems {
        say(&format!("    {p}"));
    }
    assert!(problems.is_empty(), "criterion {n} failed:\n{}", problems.join("\n"));
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn lock() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

#[test]
fn criterion_1_hochschild() {
    let _g = lock();
    let config = SuiteConfig::default();
    assert_eq!(config.cochains, 100);
    let (report, t) = timed(|| run_suite("hochschild", &config).unwrap());
    let algebras = ["m2", "m3", "s3", "t3"];
    for check in ["bb_zero", "bracket_antisymmetry", "self_bracket"] {
        for a in algebras {
            assert!(report.entry(&format!("{check}/{a}")).is_some(), "missing {check}/{a}");
        }
    }
    let pins = [pin("bb_zero", 1e-12), pin("bracket_antisymmetry", 1e-12), pin("self_bracket", 1e-12)];
    judge(1, &report, &pins, t, Duration::from_secs(30));
}

#[test]
fn criterion_2_cohomology_dimensions() {
    let _g = lock();
    let (report, t) = timed(|| run_suite("hochschild", &SuiteConfig::default()).unwrap());
    for name in ["h0_dim/m2", "h0_dim/m3", "h1_dim/m2", "h1_dim/m3", "h0_dim/t3", "h0_dim/t3xt3"] {
        assert!(report.entry(name).is_some(), "missing {name}");
    }
    // Dimensions are integers: the residual is |computed − expected| with zero slack.
    judge(2, &report, &[pin("h0_dim", 0.0), pin("h1_dim", 0.0)], t, Duration::from_secs(30));
}

#[test]
fn criterion_3_noncommutative_torus() {
    let _g = lock();
    let config = SuiteConfig::default();
    assert!((config.theta - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-15);
    assert_eq!((config.truncation, config.torus_triples), (16, 50));
    let (report, t) = timed(|| run_suite("torus", &config).unwrap());
    judge(
        3,
        &report,
        &[pin("p1", 1e-12), pin("p2_witness", 1e-10), pin("associativity", 1e-12)],
        t,
        Duration::from_secs(60),
    );
}

#[test]
fn criterion_4_hamiltonian_derivations() {
    let _g = lock();
    let (report, t) = timed(|| run_suite("matrix", &SuiteConfig::default()).unwrap());
    let pins = [
        pin("derivation", 1e-9),
        pin("center_antisymmetry", 1e-9),
        pin("center_jacobi", 1e-9),
        pin("commutator_inner", 1e-9),
        pin("lie_derivative_coboundary", 1e-9),
    ];
    judge(4, &report, &pins, t, Duration::from_secs(60));
}

#[test]
fn criterion_5_classical() {
    let _g = lock();
    let config = SuiteConfig::default();
    assert_eq!(config.classical_points, 100);
    let (report, t) = timed(|| run_suite("classical", &config).unwrap());
    if let Some(e) = report.entry("p2_fitted_lambda_offset") {
        say(&format!("    fitted normalization: |λ + 1/2| = {:.3e}", e.residual));
    }
    let pins = [
        pin("schouten", 1e-9),
        pin("bracket_leibniz", 1e-6),
        pin("bracket_jacobi", 1e-6),
        pin("fd_order", 0.5),
        pin("flow_closure", 1e-8),
        pin("p2_witness", 1e-6),
        pin("p2_fitted_lambda_offset", 1e-6),
    ];
    judge(5, &report, &pins, t, Duration::from_secs(60));
}

#[test]
fn criterion_6_foliation() {
    let _g = lock();
    let config = SuiteConfig::default();
    assert_eq!((config.p, config.q, config.grid, config.refine_grid), (1, 2, 32, Some(48)));
    assert_eq!(config.density, "expsin");
    let (report, t) = timed(|| run_suite("foliation", &config).unwrap());
    let pins = [
        pin("associativity", 1e-10),
        pin("involution", 1e-12),
        pin("leibniz", 1e-9),
        pin("p1", 1e-9),
        pin("lemma", 1e-12),
        pin("theorem", 1e-9),
        pin("p2_witness", 1e-7),
        // The n = 48 residual must be below the n = 32 one: ratio ≤ 1.
        pin("p2_refinement_ratio", 1.0),
    ];
    judge(6, &report, &pins, t, Duration::from_secs(120));
}

#[test]
fn criterion_7_convergence() {
    let _g = lock();
    let config = SuiteConfig::default();
    let mut problems = Vec::new();
    let (_, t) = timed(|| {
        for check in ["theorem", "leibniz"] {
            let study = convergence_study(check, &[8, 16, 32], &config).unwrap();
            for r in &study.rows {
                say(&format!("    {check:<8} n = {:>2}  residual {:.3e}", r.grid, r.residual));
            }
            if !study.monotone {
                problems.push(format!("{check} does not gain a factor 10 per refinement or reach the floor"));
            }
        }
    });
    if t > Duration::from_secs(120) {
        problems.push(format!("took {:.1}s, limit 120s", t.as_secs_f64()));
    }
    verdict(7, t, problems);
}

#[test]
fn criterion_8_reproducibility() {
    let _g = lock();
    let mut problems = Vec::new();
    let small = SuiteConfig {
        grid: 16,
        refine_grid: None,
        seed: 1234,
        ..SuiteConfig::default()
    };
    let (_, t) = timed(|| {
        for suite in ["hochschild", "torus", "classical", "foliation"] {
            let a = run_suite(suite, &small).unwrap();
            let b = run_suite(suite, &small).unwrap();
            let same = a.body_json() == b.body_json();
            say(&format!("    {suite:<10} {}", if same { "identical" } else { "DIFFERENT" }));
            if !same {
                problems.push(format!("{suite} report bodies differ for identical input"));
            }
        }
    });
    assert!(suites::SUITE_NAMES.contains(&"all"));
    verdict(8, t, problems);
}
