//! `ncpoisson`: run verification suites, convergence studies and flow demos.
//!
//! Exit status: 0 when every check passes, 1 when any check fails, 2 on a
//! usage or configuration error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ncpoisson::foliation::{self, BaseFunction, FormDegree, GroupoidKernel};
use ncpoisson::rng::seeded;
use ncpoisson::suites::{self, SuiteConfig};
use ncpoisson::{Error, VerificationReport};

#[derive(Parser)]
#[command(name = "ncpoisson", version, about = "Verification workbench for noncommutative Poisson geometry")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite and emit a JSON report.
    Verify {
        /// hochschild, matrix, torus, classical, foliation or all.
        suite: String,
        #[command(flatten)]
        model: ModelArgs,
        /// Replace every check's tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate a foliation residual against the grid size.
    Converge {
        /// leibniz, theorem, p2witness or associativity.
        check: String,
        /// Comma-separated, strictly increasing grid sizes.
        #[arg(long, value_delimiter = ',', default_values_t = [8usize, 16, 32])]
        grids: Vec<usize>,
        #[command(flatten)]
        model: ModelArgs,
        /// Write the CSV table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the Hamiltonian flow of a classical system.
    Flow {
        /// canonical2d, so3star, harmonic or userpolynomial.
        system: String,
        /// Initial point, comma-separated; defaults to the system's own.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x0: Option<Vec<f64>>,
        /// Final time.
        #[arg(long = "T", default_value_t = 2.0 * std::f64::consts::PI)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// JSON description for the userpolynomial system.
        #[arg(long)]
        system_json: Option<PathBuf>,
        /// Write the trajectory CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dump a random kernel or the main-theorem residual field as CSV.
    Dump {
        what: DumpKind,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DumpKind {
    Kernel,
    Field,
}

/// Settings that override the config file, which overrides the defaults.
#[derive(Args, Default)]
struct ModelArgs {
    /// TOML file with any subset of the configuration keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    truncation: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    grid: Option<usize>,
    /// Finer grid for the (P2) refinement check; 0 disables it.
    #[arg(long)]
    refine_grid: Option<usize>,
    /// const, expsin or userfourier.
    #[arg(long)]
    density: Option<String>,
    /// JSON coefficients for the userfourier density.
    #[arg(long)]
    density_json: Option<PathBuf>,
    /// const, sin or mixed.
    #[arg(long)]
    hamiltonian: Option<String>,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::TooLarge { .. } | Error::Json(_) | Error::Dimension(..) | Error::NonPositiveDensity(_) => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", p.display()))),
        None => match std::io::stdout().lock().write_all(text.as_bytes()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::Runtime(format!("cannot write to stdout: {e}"))),
            _ => Ok(()),
        },
    }
}

impl ModelArgs {
    fn resolve(&self, tol: Option<f64>) -> Result<SuiteConfig, Failure> {
        let mut c = match &self.config {
            Some(path) => toml::from_str::<SuiteConfig>(&read(path)?).map_err(|e| Failure::Usage(format!("invalid config {}: {e}", path.display())))?,
            None => SuiteConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => { $( if let Some(v) = self.$field.clone() { c.$field = v; } )* };
        }
        set!(seed, theta, truncation, p, q, grid, density, hamiltonian);
        if let Some(n) = self.refine_grid {
            c.refine_grid = (n > 0).then_some(n);
        }
        if let Some(path) = &self.density_json {
            c.density_json = Some(read(path)?);
        }
        if tol.is_some() {
            c.tol = tol;
        }
        Ok(c)
    }
}

fn summarize(report: &VerificationReport) {
    for e in &report.entries {
        eprintln!(
            "{} {:<48} {:>11.3e} <= {:<9.1e}",
            if e.pass { "PASS" } else { "FAIL" },
            e.check,
            e.residual,
            e.tolerance
        );
    }
    let failed = report.failures().count();
    eprintln!(
        "{}: {} checks, {} failed, {:.1}s",
        report.suite,
        report.entries.len(),
        failed,
        report.wall_time_s
    );
}

fn run(cli: Cli) -> Result<bool, Failure> {
    match cli.command {
        Command::Verify { suite, model, tol, out } => {
            let config = model.resolve(tol)?;
            let report = suites::run_suite(&suite, &config)?;
            summarize(&report);
            write_or_print(out.as_deref(), &(report.to_json_pretty() + "\n"))?;
            Ok(report.all_pass())
        }
        Command::Converge { check, grids, model, out } => {
            let config = model.resolve(None)?;
            let study = suites::convergence_study(&check, &grids, &config)?;
            write_or_print(out.as_deref(), &study.to_csv())?;
            eprintln!("{check}: {}", if study.monotone { "converges" } else { "does not converge monotonically" });
            Ok(study.monotone)
        }
        Command::Flow {
            system,
            x0,
            t_end,
            dt,
            system_json,
            out,
        } => {
            let json = system_json.as_deref().map(read).transpose()?;
            let demo = suites::flow_demo(&system, x0, t_end, dt, json.as_deref())?;
            write_or_print(out.as_deref(), &demo.trajectory.to_csv())?;
            eprintln!("{system}: hamiltonian drift {:.3e}, closure {:.3e}", demo.hamiltonian_drift, demo.closure);
            if let Some(c) = demo.casimir_drift {
                eprintln!("{system}: casimir drift {c:.3e}");
            }
            Ok(true)
        }
        Command::Dump { what, model, out } => {
            let config = model.resolve(None)?;
            let m = config.model(config.grid)?;
            let k = GroupoidKernel::random(&m, FormDegree::Scalar, suites::KERNEL_BANDWIDTH, &mut seeded(config.seed));
            let data = match what {
                DumpKind::Kernel => k,
                DumpKind::Field => {
                    let h = BaseFunction::preset(&m, &config.hamiltonian)?;
                    foliation::main_theorem_residual_kernel(&h, &k)?
                }
            };
            write_or_print(out.as_deref(), &data.to_csv(0))?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
