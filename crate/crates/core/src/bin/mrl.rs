use std::fs::File;
use std::io::BufWriter;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use mrl::expansion::{c_terms_capped, d_coefficients_capped};
use mrl::models::catalog;
use mrl::oracle::DEFAULT_TOL;
use mrl::report::{eval_row, expand_rows, table_rows, time_grid, write_table};
use mrl::verify::{self, Level, Suite};
use mrl::{Error, HazardModel};

const EXIT_ASSERTION: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;

/// Largest order `coeffs` will tabulate; the tables grow factorially.
const COEFFS_CAP: usize = 10;

#[derive(Parser)]
#[command(name = "mrl", version, about = "Mean residual life by quadrature and by asymptotic expansion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate r, s, m (quadrature and expansion) at one or more times.
    Eval {
        #[arg(long)]
        model: String,
        #[arg(long = "t", value_delimiter = ',', required = true, allow_hyphen_values = true)]
        t: Vec<f64>,
        #[arg(long, default_value_t = 4)]
        order: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Term-by-term expansion at a single time.
    Expand {
        #[arg(long)]
        model: String,
        #[arg(long = "t", allow_hyphen_values = true)]
        t: f64,
        #[arg(long, default_value_t = 4)]
        order: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Exact coefficient listing for one order.
    Coeffs {
        #[arg(long)]
        order: usize,
        #[arg(long, value_enum, default_value_t = Form::Theta)]
        form: Form,
    },
    /// Run the invariant suites; exit 0 iff every check passes.
    Verify {
        /// A model spec or `all` for the built-in catalog.
        #[arg(long, default_value = "all")]
        model: String,
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value = "fast")]
        level: String,
    },
    /// Write a CSV table over an evenly spaced time grid.
    Table {
        #[arg(long)]
        model: String,
        #[arg(long = "t-start", allow_hyphen_values = true)]
        t_start: f64,
        #[arg(long = "t-end", allow_hyphen_values = true)]
        t_end: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 4)]
        order: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        csv: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Form {
    Theta,
    C,
}

enum Failure {
    Usage(String),
    Io(String),
    Compute(String),
    Assertions(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::Argument(_) | Error::Resource(_) => Failure::Usage(e.to_string()),
            Error::Io(_) => Failure::Io(e.to_string()),
            _ => Failure::Compute(e.to_string()),
        }
    }
}

fn parse_model(spec: &str) -> Result<HazardModel, Failure> {
    spec.parse().map_err(Failure::from)
}

fn check_time(t: f64) -> Result<(), Failure> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Failure::Usage(format!("times must be finite and >= 0, got {t}")))
    }
}

fn check_tol(tol: f64) -> Result<(), Failure> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(Failure::Usage(format!("--tol must be positive, got {tol}")))
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.12e}"))
}

fn eval(spec: &str, times: &[f64], order: usize, tol: f64) -> Result<(), Failure> {
    let model = parse_model(spec)?;
    times.iter().try_for_each(|&t| check_time(t))?;
    check_tol(tol)?;
    println!("model {model}, expansion order {order}, tol {tol:e}");
    println!(
        "{:>12} {:>20} {:>20} {:>20} {:>10} {:>20} {:>20} {:>20}",
        "t", "r", "s", "m_quad", "+/-", "m_exp", "m_closed", "r*m"
    );
    for &t in times {
        let row = eval_row(&model, t, order, tol)?;
        println!(
            "{:>12} {:>20.12e} {:>20.12e} {:>20.12e} {:>10.2e} {:>20.12e} {:>20} {:>20.12e}",
            t,
            row.r,
            row.s,
            row.m_quad,
            row.m_quad_err,
            row.m_exp,
            fmt_opt(row.m_closed),
            row.rm_product
        );
    }
    Ok(())
}

fn expand(spec: &str, t: f64, order: usize, tol: f64) -> Result<(), Failure> {
    let model = parse_model(spec)?;
    check_time(t)?;
    check_tol(tol)?;
    let rows = expand_rows(&model, t, order, tol)?;
    println!("model {model} at t = {t}");
    println!(
        "{:>3} {:>20} {:>20} {:>20} {:>20} {:>6} {:>12}",
        "k", "theta_k", "partial_sum", "c_k", "c_k*r^(-k-1)", "agree", "err_vs_quad"
    );
    for row in rows {
        let agree = match row.agree {
            Some(true) => "yes",
            Some(false) => "NO",
            None => "-",
        };
        println!(
            "{:>3} {:>20.12e} {:>20.12e} {:>20} {:>20} {:>6} {:>12.3e}",
            row.k,
            row.theta,
            row.partial_sum,
            fmt_opt(row.c_k),
            fmt_opt(row.c_scaled),
            agree,
            row.error_vs_quad
        );
    }
    Ok(())
}

fn coeffs(order: usize, form: Form) -> Result<(), Failure> {
    let listing = match form {
        Form::Theta => d_coefficients_capped(order, COEFFS_CAP)?.render(),
        Form::C => c_terms_capped(order, COEFFS_CAP)?.render(),
    };
    println!("{listing}");
    Ok(())
}

fn run_verify(spec: &str, suite: &str, level: &str) -> Result<(), Failure> {
    let suite: Suite = suite.parse()?;
    let level: Level = level.parse()?;
    let models = if spec == "all" { catalog() } else { vec![parse_model(spec)?] };
    let checks = verify::run(&models, suite, level);
    for c in &checks {
        println!("{c}");
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("{} checks, {failed} failed", checks.len());
    if failed > 0 {
        return Err(Failure::Assertions(failed));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn table(spec: &str, t_start: f64, t_end: f64, steps: usize, order: usize, tol: f64, path: &str) -> Result<(), Failure> {
    let model = parse_model(spec)?;
    check_time(t_start)?;
    check_tol(tol)?;
    let grid = time_grid(t_start, t_end, steps)?;
    let file = File::create(path).map_err(|e| Failure::Io(format!("cannot create {path}: {e}")))?;
    let rows = table_rows(&model, &grid, order, tol)?;
    write_table(BufWriter::new(file), &rows, order)?;
    println!("wrote {} rows to {path}", rows.len());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Eval { model, t, order, tol } => eval(&model, &t, order, tol),
        Command::Expand { model, t, order, tol } => expand(&model, t, order, tol),
        Command::Coeffs { order, form } => coeffs(order, form),
        Command::Verify { model, suite, level } => run_verify(&model, &suite, &level),
        Command::Table {
            model,
            t_start,
            t_end,
            steps,
            order,
            tol,
            csv,
        } => table(&model, t_start, t_end, steps, order, tol, &csv),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_IO)
        }
        Err(Failure::Compute(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_ASSERTION)
        }
        Err(Failure::Assertions(n)) => {
            eprintln!("{n} checks failed");
            ExitCode::from(EXIT_ASSERTION)
        }
    }
}
