use std::path::Path;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mukai_core::problem::{self, Context, MapSpec, ProblemFile, RunOptions, RunReport, TaskSpec};
use mukai_core::stability::SplittingMode;
use mukai_core::Error;

mod render;

#[derive(Parser)]
#[command(name = "mukai", version, about = "Fixed loci of symplectic group actions on moduli of sheaves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Output {
    /// Print machine-readable JSON.
    #[arg(long, conflicts_with = "table")]
    json: bool,
    /// Print aligned text (default).
    #[arg(long)]
    table: bool,
}

#[derive(Args)]
struct FileArg {
    /// Problem file path, or the name of a shipped fixture.
    file: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Effective,
    AllClasses,
}

#[derive(Subcommand)]
enum Command {
    /// Run every task in a problem file and check expectations.
    Run {
        #[command(flatten)]
        file: FileArg,
        #[command(flatten)]
        out: Output,
        /// Cross-check fiber and series tasks by brute force.
        #[arg(long)]
        oracle: bool,
        /// Report wall-clock time per task.
        #[arg(long)]
        timing: bool,
    },
    /// Run every task with brute-force cross-checks enabled.
    Oracle {
        #[command(flatten)]
        file: FileArg,
        #[command(flatten)]
        out: Output,
    },
    /// Check the equivalence data of a problem file.
    Verify {
        #[command(flatten)]
        file: FileArg,
        #[command(flatten)]
        out: Output,
    },
    /// Frameshapes of the generators of an action.
    Frameshape {
        #[command(flatten)]
        file: FileArg,
        #[arg(long)]
        action: String,
        #[command(flatten)]
        out: Output,
    },
    /// Inverse eta product of a frameshape, and optionally the Euler characteristic.
    Euler {
        /// For example "1^8 2^8".
        frameshape: String,
        #[arg(long, default_value_t = 16)]
        terms: usize,
        #[arg(long, allow_hyphen_values = true)]
        v_square: Option<i64>,
        #[arg(long)]
        oracle: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Vectors of the source lattice over a target, with a lower bound on the square.
    Fiber {
        #[command(flatten)]
        file: FileArg,
        /// Target vector in the codomain of the equivalence map.
        #[arg(long, allow_hyphen_values = true)]
        vector: String,
        #[arg(long, default_value_t = -2, allow_hyphen_values = true)]
        min_square: i64,
        #[arg(long, allow_hyphen_values = true)]
        max_square: Option<i64>,
        /// Group the result into orbits of this action.
        #[arg(long)]
        orbits_under: Option<String>,
        #[arg(long)]
        list: bool,
        #[arg(long)]
        oracle: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Components of the fixed locus over a Mukai vector.
    FixedLocus {
        #[command(flatten)]
        file: FileArg,
        #[arg(long, allow_hyphen_values = true)]
        vector: String,
        /// Include one record per orbit.
        #[arg(long)]
        records: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Genericity of a vector for the charge given by omega and beta.
    Genericity {
        #[command(flatten)]
        file: FileArg,
        #[arg(long)]
        lattice: String,
        #[arg(long, allow_hyphen_values = true)]
        omega: String,
        #[arg(long, allow_hyphen_values = true)]
        beta: String,
        #[arg(long, allow_hyphen_values = true)]
        vector: String,
        #[arg(long)]
        action: Option<String>,
        #[arg(long, value_enum, default_value_t = Mode::Effective)]
        mode: Mode,
        #[command(flatten)]
        out: Output,
    },
    /// The charge given by omega and beta, its domain checks and values.
    Charge {
        #[command(flatten)]
        file: FileArg,
        #[arg(long)]
        lattice: String,
        #[arg(long, allow_hyphen_values = true)]
        omega: String,
        #[arg(long, allow_hyphen_values = true)]
        beta: String,
        #[arg(long = "vector", allow_hyphen_values = true)]
        vectors: Vec<String>,
        #[arg(long)]
        action: Option<String>,
        #[command(flatten)]
        out: Output,
    },
    /// List shipped fixtures, or print one.
    Fixtures {
        name: Option<String>,
    },
}

fn group_cap() -> Result<usize, Error> {
    match std::env::var("MUKAI_MAX_GROUP") {
        Err(_) => Ok(mukai_core::group_action::DEFAULT_GROUP_CAP),
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| Error::InvalidArgument(format!("MUKAI_MAX_GROUP must be a positive integer, got `{s}`"))),
    }
}

fn load(file: &FileArg) -> Result<ProblemFile, Error> {
    let path = Path::new(&file.file);
    if path.exists() {
        ProblemFile::from_path(path)
    } else {
        match problem::fixture_source(&file.file) {
            Ok(src) => ProblemFile::from_json(src),
            Err(_) => Err(Error::InvalidArgument(format!(
                "`{}` is neither a file nor a fixture (known: {})",
                file.file,
                problem::fixture_names().join(", ")
            ))),
        }
    }
}

fn options(oracle: bool, timing: bool) -> Result<RunOptions, Error> {
    Ok(RunOptions { group_cap: group_cap()?, timing, oracle })
}

fn context(p: &ProblemFile, opts: &RunOptions) -> Result<Context, Error> {
    p.validate(opts)
}

enum Outcome {
    Ok,
    Failed,
}

fn emit_report(report: &RunReport, out: &Output) -> Result<Outcome, Error> {
    if out.json {
        println!("{}", report.to_json()?);
    } else {
        print!("{}", render::run_report(report));
    }
    Ok(if report.passed { Outcome::Ok } else { Outcome::Failed })
}

fn single(p: &ProblemFile, opts: RunOptions, task: TaskSpec, out: &Output) -> Result<Outcome, Error> {
    let ctx = context(p, &opts)?;
    let (value, ok) = problem::execute(&ctx, &task)?;
    if out.json {
        println!("{}", serde_json::to_string_pretty(&value)?);
    } else {
        print!("{}", render::task(task.kind(), &value));
    }
    Ok(if ok { Outcome::Ok } else { Outcome::Failed })
}

fn dispatch(cli: Cli) -> Result<Outcome, Error> {
    match cli.command {
        Command::Run { file, out, oracle, timing } => {
            let p = load(&file)?;
            emit_report(&problem::run(&p, &options(oracle, timing)?)?, &out)
        }
        Command::Oracle { file, out } => {
            let p = load(&file)?;
            emit_report(&problem::run(&p, &options(true, false)?)?, &out)
        }
        Command::Verify { file, out } => single(&load(&file)?, options(false, false)?, TaskSpec::Verify { expect: None }, &out),
        Command::Frameshape { file, action, out } => {
            single(&load(&file)?, options(false, false)?, TaskSpec::Frameshape { action, expect: None }, &out)
        }
        Command::Euler { frameshape, terms, v_square, oracle, out } => {
            let p = ProblemFile::from_json(r#"{"version":"1"}"#)?;
            single(&p, options(oracle, false)?, TaskSpec::Euler { frameshape, terms: Some(terms), v_square, expect: None }, &out)
        }
        Command::Fiber { file, vector, min_square, max_square, orbits_under, list, oracle, out } => {
            let task = TaskSpec::Fiber {
                lattice: None,
                map: None::<MapSpec>,
                codomain: None,
                target: Some(vector),
                min_square,
                max_square,
                constraints: Vec::new(),
                orbits_under,
                list,
                expect: None,
            };
            single(&load(&file)?, options(oracle, false)?, task, &out)
        }
        Command::FixedLocus { file, vector, records, out } => {
            single(&load(&file)?, options(false, false)?, TaskSpec::FixedLocus { vector, records, expect: None }, &out)
        }
        Command::Genericity { file, lattice, omega, beta, vector, action, mode, out } => {
            let mode = match mode {
                Mode::Effective => SplittingMode::Effective,
                Mode::AllClasses => SplittingMode::AllClasses,
            };
            let task = TaskSpec::Genericity { lattice, omega, beta, vector, action, mode, expect: None };
            single(&load(&file)?, options(false, false)?, task, &out)
        }
        Command::Charge { file, lattice, omega, beta, vectors, action, out } => {
            let task = TaskSpec::Charge { lattice, omega, beta, vectors, action, expect: None };
            single(&load(&file)?, options(false, false)?, task, &out)
        }
        Command::Fixtures { name } => {
            match name {
                None => {
                    for n in problem::fixture_names() {
                        println!("{n}");
                    }
                }
                Some(n) => print!("{}", problem::fixture_source(&n)?),
            }
            Ok(Outcome::Ok)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
