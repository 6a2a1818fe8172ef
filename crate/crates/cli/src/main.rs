use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use stairsolve_core::experiment::{run_on_system, write_records_csv, write_records_json};
use stairsolve_core::io::{linearization_from_json, linearization_to_json, read_blocktri_file};
use stairsolve_core::problems::{CartPoleParams, PendulumParams};
use stairsolve_core::spectrum::write_spectrum_csv;
use stairsolve_core::{
    build_schur, linearize_problem, pcg_solve, preconditioned_spectrum, BenchmarkProblem, CostWeights, Integrator,
    PcgConfig, PhysicalParams, PreconditionerKind, PreconditionerOp, ProblemName,
};

#[derive(Parser)]
#[command(
    name = "stairsolve",
    version,
    about = "Stair preconditioners for block-tridiagonal Schur systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compare preconditioners on a benchmark problem's Schur system.
    Bench(BenchArgs),
    /// Write a benchmark problem's linearization as JSON.
    Linearize(LinearizeArgs),
    /// Solve the Schur system of a linearization file with PCG.
    Solve(SolveArgs),
    /// Preconditioned spectra of a block-tridiagonal matrix file.
    Spectrum(SpectrumArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum IntegratorArg {
    Euler,
    SemiImplicit,
}

#[derive(Args)]
struct ProblemArgs {
    /// pendulum or cartpole
    #[arg(long)]
    problem: ProblemName,
    /// Knot points.
    #[arg(long = "N", default_value_t = 16)]
    knots: usize,
    /// Timestep in seconds.
    #[arg(long, default_value_t = 0.1)]
    h: f64,
    #[arg(long, default_value_t = 1.0)]
    state_weight: f64,
    #[arg(long, default_value_t = 0.1)]
    control_weight: f64,
    #[arg(long, default_value_t = 10.0)]
    terminal_weight: f64,
    #[arg(long, value_enum, default_value_t = IntegratorArg::Euler)]
    integrator: IntegratorArg,
    /// Pendulum mass [kg].
    #[arg(long)]
    mass: Option<f64>,
    /// Pendulum or pole length [m].
    #[arg(long)]
    length: Option<f64>,
    /// Pendulum damping.
    #[arg(long)]
    damping: Option<f64>,
    #[arg(long)]
    gravity: Option<f64>,
    /// Cart mass [kg].
    #[arg(long)]
    cart_mass: Option<f64>,
    /// Pole mass [kg].
    #[arg(long)]
    pole_mass: Option<f64>,
}

impl ProblemArgs {
    fn problem(&self) -> Result<BenchmarkProblem> {
        let params = match self.problem {
            ProblemName::Pendulum => {
                let d = PendulumParams::default();
                if self.cart_mass.is_some() || self.pole_mass.is_some() {
                    bail!("--cart-mass/--pole-mass only apply to cartpole");
                }
                PhysicalParams::Pendulum(PendulumParams {
                    mass: self.mass.unwrap_or(d.mass),
                    length: self.length.unwrap_or(d.length),
                    damping: self.damping.unwrap_or(d.damping),
                    gravity: self.gravity.unwrap_or(d.gravity),
                })
            }
            ProblemName::CartPole => {
                let d = CartPoleParams::default();
                if self.mass.is_some() || self.damping.is_some() {
                    bail!("--mass/--damping only apply to pendulum");
                }
                PhysicalParams::CartPole(CartPoleParams {
                    cart_mass: self.cart_mass.unwrap_or(d.cart_mass),
                    pole_mass: self.pole_mass.unwrap_or(d.pole_mass),
                    length: self.length.unwrap_or(d.length),
                    gravity: self.gravity.unwrap_or(d.gravity),
                })
            }
        };
        let weights = CostWeights {
            state: self.state_weight,
            control: self.control_weight,
            terminal: self.terminal_weight,
        };
        let mut p = BenchmarkProblem::with_settings(self.problem, self.knots, self.h, weights, params);
        p.integrator = match self.integrator {
            IntegratorArg::Euler => Integrator::ExplicitEuler,
            IntegratorArg::SemiImplicit => Integrator::SemiImplicitEuler,
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Args)]
struct SolverArgs {
    /// Relative residual tolerance.
    #[arg(long, default_value = "1e-8")]
    tol: f64,
    #[arg(long, default_value_t = 1000)]
    max_iter: usize,
}

impl SolverArgs {
    fn config(&self) -> PcgConfig {
        PcgConfig {
            tol: self.tol,
            max_iter: self.max_iter,
            ..PcgConfig::default()
        }
    }
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Comma-separated kinds: jacobi, block-jacobi, additive-stair, symmetric-stair.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "jacobi,block-jacobi,additive-stair,symmetric-stair"
    )]
    precond: Vec<PreconditionerKind>,
    #[command(flatten)]
    solver: SolverArgs,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Also write every eigenvalue as CSV to this path.
    #[arg(long)]
    spectrum: Option<PathBuf>,
}

#[derive(Args)]
struct LinearizeArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// Linearization JSON file.
    #[arg(long)]
    linearization: PathBuf,
    #[arg(long, default_value = "symmetric-stair")]
    precond: PreconditionerKind,
    #[command(flatten)]
    solver: SolverArgs,
    /// Write the primal step (one value per line) to this path.
    #[arg(long)]
    step_out: Option<PathBuf>,
}

#[derive(Args)]
struct SpectrumArgs {
    /// Matrix in block-tridiagonal text format.
    #[arg(long)]
    matrix: PathBuf,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "jacobi,block-jacobi,additive-stair,symmetric-stair"
    )]
    precond: Vec<PreconditionerKind>,
    /// Label used in the problem column.
    #[arg(long, default_value = "matrix")]
    label: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn bench(args: &BenchArgs) -> Result<()> {
    let problem = args.problem.problem()?;
    let lin = linearize_problem(&problem)?;
    let system = build_schur(&lin)?;
    let outcome = run_on_system(&problem.name.to_string(), &system, &args.precond, &args.solver.config())?;

    let mut out = output(args.out.as_deref())?;
    match args.format {
        Format::Csv => write_records_csv(&mut out, &outcome.records)?,
        Format::Json => write_records_json(&mut out, &outcome.records)?,
    }
    out.flush()?;

    if let Some(path) = &args.spectrum {
        let mut f = output(Some(path))?;
        write_spectrum_csv(&mut f, &outcome.spectra)?;
        f.flush()?;
    }
    Ok(())
}

fn linearize(args: &LinearizeArgs) -> Result<()> {
    let lin = linearize_problem(&args.problem.problem()?)?;
    let mut out = output(args.out.as_deref())?;
    writeln!(out, "{}", linearization_to_json(&lin)?)?;
    out.flush()?;
    Ok(())
}

fn solve(args: &SolveArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.linearization)
        .with_context(|| format!("cannot read {}", args.linearization.display()))?;
    let lin = linearization_from_json(&text)?;
    let system = build_schur(&lin)?;
    let op = PreconditionerOp::build(&system.matrix, args.precond)?;
    let report = pcg_solve(&system.matrix, &system.rhs, &op, &args.solver.config())?;
    let step = system.recover_primal(&lin, &report.solution)?;

    let summary = serde_json::json!({
        "preconditioner": args.precond.to_string(),
        "n": system.matrix.n(),
        "m": system.matrix.m(),
        "iterations": report.iterations,
        "converged": report.converged,
        "final_residual": report.final_residual(),
        "residual_history": report.residual_history,
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);

    if let Some(path) = &args.step_out {
        let mut f = output(Some(path))?;
        for v in step.values.iter() {
            writeln!(f, "{v:.16e}")?;
        }
        f.flush()?;
    }
    if !report.converged {
        bail!("PCG did not converge in {} iterations", report.iterations);
    }
    Ok(())
}

fn spectrum(args: &SpectrumArgs) -> Result<()> {
    let s = read_blocktri_file(&args.matrix)?;
    let mut rows = Vec::with_capacity(args.precond.len());
    for &kind in &args.precond {
        let op = PreconditionerOp::build(&s, kind)?;
        let rep = preconditioned_spectrum(&s, &op).with_context(|| format!("spectrum of {kind}"))?;
        rows.push((args.label.clone(), kind.to_string(), rep));
    }
    let mut out = output(args.out.as_deref())?;
    write_spectrum_csv(&mut out, &rows)?;
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Bench(a) => bench(a),
        Command::Linearize(a) => linearize(a),
        Command::Solve(a) => solve(a),
        Command::Spectrum(a) => spectrum(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("stairsolve: error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
