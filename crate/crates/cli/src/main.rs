//! `msbem`: meshes, h-sweeps, condition studies and field probes for
//! multi-screen scattering.

mod args;
mod cond;
mod mesh;
mod output;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use msbem::spaces::Reduction;

use args::{parse_h, parse_point, parse_reduction, Geometry, Kappa, PrecondArg, ProblemArg, SolverOpts};
use sweep::SweepSpec;

#[derive(Parser, Debug)]
#[command(name = "msbem", version, about = "Boundary element solver for acoustic scattering by multi-screens")]
struct Cli {
    /// Run every loop sequentially; output is then independent of the thread count.
    #[arg(long, global = true)]
    deterministic: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a screen as OFF files plus a manifest.
    Mesh {
        #[arg(long, default_value = "trijunction")]
        geometry: Geometry,
        #[arg(long, value_parser = parse_h)]
        h: f64,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve over a list of mesh widths and reductions, one CSV row per solve.
    Sweep {
        #[command(flatten)]
        problem: ProblemOpts,
        /// Strictly decreasing mesh widths.
        #[arg(long, value_delimiter = ',', required = true, value_parser = parse_h)]
        h: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "full", value_parser = parse_reduction)]
        reductions: Vec<Reduction>,
        #[arg(long, value_enum, default_value_t = PrecondArg::Both)]
        precond: PrecondArg,
        /// Also compute the dense effective condition number and nullity.
        #[arg(long)]
        cond: bool,
        /// Directory receiving each system matrix as `re,im` CSV.
        #[arg(long)]
        export_matrix: Option<PathBuf>,
        #[command(flatten)]
        io: IoOpts,
    },
    /// Effective condition numbers with and without preconditioning.
    Cond {
        #[command(flatten)]
        problem: ProblemOpts,
        #[arg(long, value_delimiter = ',', required = true, value_parser = parse_h)]
        h: Vec<f64>,
        #[arg(long, default_value = "full", value_parser = parse_reduction)]
        reduction: Reduction,
        /// Replace each system by the identity of the same size, which must report
        /// condition number one; checks the estimator and the output path.
        #[arg(long)]
        self_test: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Solve once and list the scattered field at the probe points.
    Probe {
        #[command(flatten)]
        problem: ProblemOpts,
        #[arg(long, value_parser = parse_h)]
        h: f64,
        #[arg(long, default_value = "full", value_parser = parse_reduction)]
        reduction: Reduction,
        #[arg(long, value_enum, default_value_t = PrecondArg::On)]
        precond: PrecondArg,
        #[command(flatten)]
        io: IoOpts,
    },
}

#[derive(Args, Debug)]
struct ProblemOpts {
    #[arg(long, value_enum)]
    problem: ProblemArg,
    /// Wavenumber: `lf`, `mf`, a real number or `re+imi`.
    #[arg(long, default_value = "lf")]
    kappa: Kappa,
    /// `trijunction`, `mjunction:m` or `typeb`.
    #[arg(long, default_value = "trijunction")]
    geometry: Geometry,
    #[command(flatten)]
    solver: SolverOpts,
}

#[derive(Args, Debug)]
struct IoOpts {
    /// Probe point `x,y,z`; repeat for several. Defaults to the corners of a
    /// cube twice the screen diameter around its centroid.
    #[arg(long = "probe", value_parser = parse_point)]
    probes: Vec<[f64; 3]>,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

impl ProblemOpts {
    fn spec(&self, h_list: Vec<f64>, reductions: Vec<Reduction>, precond: PrecondArg, probes: &[[f64; 3]]) -> anyhow::Result<SweepSpec> {
        Ok(SweepSpec {
            problem: self.problem.into(),
            kappa: self.kappa,
            geometry: self.geometry,
            h_list,
            reductions,
            precond,
            cfg: self.solver.config(self.geometry)?,
            points: (!probes.is_empty()).then(|| probes.to_vec()),
            cond: false,
            export_matrix: None,
        })
    }
}

fn configure_threads(deterministic: bool) -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("MSBEM_THREADS") {
        let n: usize = v.trim().parse().with_context(|| format!("MSBEM_THREADS must be a positive integer, got '{v}'"))?;
        msbem::par::limit_threads(n)?;
    }
    if deterministic {
        msbem::par::set_deterministic(true);
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    configure_threads(cli.deterministic)?;
    match cli.command {
        Command::Mesh { geometry, h, out } => mesh::run(geometry, h, &out),
        Command::Sweep {
            problem,
            h,
            reductions,
            precond,
            cond,
            export_matrix,
            io,
        } => {
            let mut spec = problem.spec(h, reductions, precond, &io.probes)?;
            spec.cond = cond;
            spec.export_matrix = export_matrix;
            sweep::run(&spec, io.output.as_deref())
        }
        Command::Cond {
            problem,
            h,
            reduction,
            self_test,
            output,
        } => {
            let spec = problem.spec(h, vec![reduction], PrecondArg::On, &[])?;
            if self_test {
                cond::self_test(&spec, output.as_deref())
            } else {
                cond::run(&spec, output.as_deref())
            }
        }
        Command::Probe {
            problem,
            h,
            reduction,
            precond,
            io,
        } => {
            let spec = problem.spec(vec![h], vec![reduction], precond, &io.probes)?;
            sweep::run_probe(&spec, io.output.as_deref())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).format_timestamp(None).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
