use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sffm::commands::{self, Outcome, SimulateArgs};
use sffm::model_file::{Loaded, ModelFile, PrintOrder, TargetKind};
use sffm::table::write_file;
use sffm::{parallel, CliError};

/// Transient and first-return analysis of stochastic fluid-fluid models.
#[derive(Parser)]
#[command(name = "sffm", version)]
struct Cli {
    /// Worker threads for simulation.
    #[arg(long, global = true, env = parallel::THREADS_ENV)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model file and its boundary conditions.
    Validate(ModelArg),
    /// Print Psi, Xi, Phi, M and their tilted versions.
    ReturnOps {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Law at omega(y) over a grid of y and v, with y -> infinity limits.
    Transient {
        #[command(flatten)]
        common: Common,
        /// Comma-separated levels.
        #[arg(long, value_delimiter = ',')]
        y: Option<Vec<f64>>,
        /// Comma-separated upper ends of A_v = [0, v]; `inf` for the whole line.
        #[arg(long, value_delimiter = ',')]
        v: Option<Vec<f64>>,
    },
    /// Law at the first return of Y over a grid of v.
    FirstReturn {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        v: Option<Vec<f64>>,
    },
    /// Monte Carlo estimates next to analytic values.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        target: Option<TargetArg>,
        #[arg(long, value_delimiter = ',')]
        y: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        v: Option<Vec<f64>>,
        #[arg(long)]
        reps: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Write one line per replication to this file.
        #[arg(long)]
        raw: Option<PathBuf>,
    },
    /// Reproduce built-in example k (1 to 6).
    Example {
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the example's model file here.
        #[arg(long)]
        write_model: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ModelArg {
    #[arg(long)]
    model: PathBuf,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    model: PathBuf,
    /// Phase order for printed vectors.
    #[arg(long, value_enum)]
    order: Option<OrderArg>,
    /// Same as `--order paper`.
    #[arg(long, conflicts_with = "order")]
    paper_order: bool,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    Natural,
    Paper,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    Omega,
    Theta,
}

impl Common {
    fn load(&self) -> Result<Loaded, CliError> {
        ModelFile::read(&self.model)?.load()
    }

    fn order(&self, loaded: &Loaded) -> PrintOrder {
        match (self.paper_order, self.order) {
            (true, _) | (_, Some(OrderArg::Paper)) => PrintOrder::Paper,
            (_, Some(OrderArg::Natural)) => PrintOrder::Natural,
            _ => loaded.analysis().order.unwrap_or(PrintOrder::Natural),
        }
    }
}

fn emit(outcome: Outcome, out: Option<&Path>, raw: Option<&Path>) -> Result<i32, CliError> {
    if let (Some(path), Some(text)) = (raw, &outcome.raw) {
        write_file(path, text)?;
    }
    match (&outcome.table, out) {
        (Some(t), Some(path)) => {
            t.write(path)?;
            print!("{}", outcome.report);
        }
        (Some(t), None) => {
            eprint!("{}", outcome.report);
            print!("{}", t.to_csv());
        }
        (None, _) => print!("{}", outcome.report),
    }
    Ok(outcome.exit)
}

fn run(cli: Cli) -> Result<i32, CliError> {
    parallel::configure(cli.threads);
    match cli.command {
        Command::Validate(m) => {
            let loaded = ModelFile::read(&m.model)?.load()?;
            emit(commands::validate(&loaded)?, None, None)
        }
        Command::ReturnOps { common, lambda } => {
            let loaded = common.load()?;
            let lambda = lambda.or(loaded.analysis().lambda);
            let o = commands::return_ops(&loaded, lambda, common.order(&loaded))?;
            emit(o, common.out.as_deref(), None)
        }
        Command::Transient { common, y, v } => {
            let loaded = common.load()?;
            let a = loaded.analysis();
            let ys = y.or(a.y).unwrap_or_else(|| commands::DEFAULT_Y.to_vec());
            let vs = v.or(a.v).unwrap_or_else(commands::default_v_grid);
            let o = commands::transient(&loaded, &ys, &vs, common.order(&loaded))?;
            emit(o, common.out.as_deref(), None)
        }
        Command::FirstReturn { common, v } => {
            let loaded = common.load()?;
            let vs = v.or(loaded.analysis().v).unwrap_or_else(commands::default_v_grid);
            let o = commands::first_return(&loaded, &vs, common.order(&loaded))?;
            emit(o, common.out.as_deref(), None)
        }
        Command::Simulate { common, target, y, v, reps, seed, raw } => {
            let loaded = common.load()?;
            let a = loaded.analysis();
            let target = match target {
                Some(TargetArg::Omega) => TargetKind::Omega,
                Some(TargetArg::Theta) => TargetKind::Theta,
                None => a.target.unwrap_or(TargetKind::Omega),
            };
            let args = SimulateArgs {
                target,
                ys: y.or(a.y).unwrap_or_else(|| vec![commands::DEFAULT_SIM_Y]),
                vs: v.or(a.v).unwrap_or_else(|| commands::DEFAULT_SIM_V.to_vec()),
                reps: reps.or(a.reps).unwrap_or(commands::DEFAULT_REPS),
                seed: seed.or(a.seed).unwrap_or(commands::DEFAULT_SEED),
                raw: raw.is_some(),
                order: common.order(&loaded),
            };
            let o = commands::simulate(&loaded, &args)?;
            emit(o, common.out.as_deref(), raw.as_deref())
        }
        Command::Example { k, out, write_model } => {
            let o = commands::example(k)?;
            if let Some(path) = write_model {
                write_file(&path, &ModelFile::example(k)?.to_toml())?;
            }
            match out {
                Some(path) => emit(o, Some(&path), None),
                None => {
                    print!("{}", o.report);
                    Ok(o.exit)
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
