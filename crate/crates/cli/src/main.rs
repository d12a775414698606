//! `tfk`: desk-scale experiments for t-function Fréchet derivatives,
//! condition numbers and nuclear-norm descent.
//!
//! Tables go to `--out` as CSV, or to stdout when no path is given.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use tfrechet::bench::{
    gen_convection_diffusion_scaled, run_cond_bench, run_frechet_bench, run_nucmin, CsvTable, ExperimentConfig,
    StencilScaling,
};
use tfrechet::frechet::Method;
use tfrechet::io::{read_tensor, write_tensor};
use tfrechet::random::{random_tensor, seeded};
use tfrechet::{ScalarFunction, Tensor3};

#[derive(Parser, Debug)]
#[command(name = "tfk", version, about = "Fréchet derivatives and condition numbers of tensor t-functions")]
struct Cli {
    /// Worker threads for the inner solvers (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compare the bcirc, lowrank and dft solvers on a convection-diffusion tensor.
    Frechet {
        #[arg(long, default_value_t = 36)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        p: usize,
        /// exp, sqrt, invsqrt, inv, log or poly:c0,c1,...
        #[arg(long = "fn", default_value = "exp")]
        function: String,
        /// Comma-separated subset of bcirc, lowrank, dft, fd.
        #[arg(long, value_delimiter = ',', default_value = "bcirc,lowrank,dft")]
        solver: Vec<String>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 1)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Scaling::Stencil)]
        scaling: Scaling,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Condition number by power iteration and by the efficient and full Kronecker forms.
    Cond {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        p: usize,
        #[arg(long = "fn", default_value = "exp")]
        function: String,
        #[arg(long, default_value_t = 1e-2)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Nuclear-norm gradient descent with backtracking line search.
    Nucmin {
        /// Starting tensor (.t3json); otherwise a seeded standard normal tensor.
        #[arg(long, conflicts_with_all = ["n", "p"])]
        input: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        p: Option<usize>,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a generated tensor as .t3json.
    Gen {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Scaling::Stencil)]
        scaling: Scaling,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Kind {
    /// Convection-diffusion faces with ν ~ U[0, 200] per face.
    ConvDiff,
    /// Standard normal entries.
    Random,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Scaling {
    Stencil,
    Physical,
}

impl From<Scaling> for StencilScaling {
    fn from(s: Scaling) -> Self {
        match s {
            Scaling::Stencil => StencilScaling::Stencil,
            Scaling::Physical => StencilScaling::Physical,
        }
    }
}

fn parse_function(text: &str) -> Result<ScalarFunction<f64>> {
    text.parse().with_context(|| format!("invalid --fn '{text}'"))
}

fn emit(table: &CsvTable, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => table.write(path).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{}", table.to_csv()?);
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    }
    match cli.command {
        Command::Frechet { n, p, function, solver, tol, reps, seed, scaling, out } => {
            let solvers = solver
                .iter()
                .map(|s| s.trim().parse::<Method>())
                .collect::<tfrechet::Result<Vec<_>>>()?;
            let config = ExperimentConfig {
                function: parse_function(&function)?,
                solvers,
                tol,
                repetitions: reps,
                seed,
                scaling: scaling.into(),
                ..ExperimentConfig::new("frechet", n, p)
            };
            let bench = run_frechet_bench(&config)?;
            emit(&bench.table(), out.as_ref())
        }
        Command::Cond { n, p, function, tol, seed, out } => {
            let config = ExperimentConfig { function: parse_function(&function)?, tol, seed, ..ExperimentConfig::new("cond", n, p) };
            emit(&run_cond_bench(&config)?.table(), out.as_ref())
        }
        Command::Nucmin { input, n, p, steps, seed, out } => {
            let report = match input {
                Some(path) => {
                    let start: Tensor3<f64> =
                        read_tensor(&path).with_context(|| format!("reading {}", path.display()))?;
                    run_nucmin(&ExperimentConfig::new("nucmin", start.n(), start.p()), Some(&start), steps)?
                }
                None => {
                    let (Some(n), Some(p)) = (n, p) else {
                        bail!("nucmin needs --input or both --n and --p");
                    };
                    run_nucmin(&ExperimentConfig { seed, ..ExperimentConfig::new("nucmin", n, p) }, None, steps)?
                }
            };
            emit(&report.table(), out.as_ref())
        }
        Command::Gen { kind, n, p, seed, scaling, out } => {
            let t = match kind {
                Kind::ConvDiff => gen_convection_diffusion_scaled(n, p, seed, scaling.into())?,
                Kind::Random => {
                    if n == 0 || p == 0 {
                        bail!("dimensions must be positive");
                    }
                    random_tensor(n, n, p, &mut seeded(seed))
                }
            };
            write_tensor(&out, &t).with_context(|| format!("writing {}", out.display()))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.to_string();
            let first = rendered.lines().next().unwrap_or("invalid arguments");
            eprintln!("tfk: error: {}", first.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("tfk: error: {msg}");
            ExitCode::FAILURE
        }
    }
}
