//! `holoflow`: batch driver for the verification engine.

mod commands;
mod parse;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use report::{Failure, Report, Verdict};

// aliases keep clap from treating list-valued flags as repeated flags
type FloatList = Vec<f64>;
type ComplexList = Vec<Complex64>;
type U32Matrix = Vec<Vec<u32>>;
type RationalMatrix = Vec<Vec<holoflow::poly::Rational>>;

#[derive(Parser, Debug)]
#[command(name = "holoflow", version, about = "Exact and numerical checks for one-loop holomorphic renormalization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: GlobalArgs,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Seed for quasi-Monte Carlo scrambling and random draws.
    #[arg(long, global = true, default_value_t = 24301)]
    pub seed: u64,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Print the wall time to standard error.
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemeArg {
    Direct,
    Gaussian,
    Both,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum VanishMode {
    Wheel,
    Anomaly,
}

/// Wheel shape: either `--d` and `--k`, or a derivative matrix `--n`.
#[derive(Args, Debug, Clone)]
pub struct WheelArgs {
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Derivative orders, `d` rows of `k` entries: `1,0;0,0`.
    #[arg(long, value_parser = parse::u32_matrix)]
    pub n: Option<U32Matrix>,
    /// Width of the Gaussian test function.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact symbolic vanishing check of a wheel or anomaly form factor.
    Vanish {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = VanishMode::Wheel)]
        mode: VanishMode,
    },
    /// Regulated wheel weight at one window.
    Weight {
        #[command(flatten)]
        wheel: WheelArgs,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long = "L", default_value_t = 1.0)]
        big_l: f64,
        #[arg(long, value_enum, default_value_t = SchemeArg::Gaussian)]
        scheme: SchemeArg,
    },
    /// ε → 0 sweep of a wheel weight at fixed L.
    Sweep {
        #[command(flatten)]
        wheel: WheelArgs,
        #[arg(long = "L", default_value_t = 1.0)]
        big_l: f64,
        /// Decreasing ε values; defaults to 0.1·2^{-m}, m < 20.
        #[arg(long = "eps-grid", value_parser = parse::float_list)]
        eps_grid: Option<FloatList>,
    },
    /// Iterated limit of the anomaly wheel.
    Anomaly {
        #[command(flatten)]
        wheel: WheelArgs,
        /// 0-based edge carrying the heat kernel; defaults to the closing edge.
        #[arg(long)]
        edge: Option<usize>,
        /// Decreasing ratios ε/L; defaults to 0.1·2^{-m}, m < 20.
        #[arg(long = "eps-grid", value_parser = parse::float_list)]
        eps_grid: Option<FloatList>,
        /// Decreasing L values; defaults to 1, 0.1, …, 1e-4.
        #[arg(long = "L-grid", value_parser = parse::float_list)]
        l_grid: Option<FloatList>,
    },
    /// Bochner–Martinelli kernel, optionally against the regulated propagator.
    Bm {
        #[arg(long)]
        d: Option<usize>,
        #[arg(long, value_parser = parse::complex_list)]
        z: ComplexList,
        #[arg(long, value_parser = parse::complex_list)]
        w: ComplexList,
        #[arg(long, requires = "big_l")]
        eps: Option<f64>,
        #[arg(long = "L", requires = "eps")]
        big_l: Option<f64>,
        /// Relative tolerance of the propagator comparison.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Determinant identity of the Gaussian wheel system.
    Det {
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_parser = parse::float_list)]
        t: FloatList,
    },
    /// One-loop RG flow of a polynomial interaction on a toy field space.
    Rg {
        /// Symmetric rational matrix, rows separated by `;`.
        #[arg(long, value_parser = parse::rational_matrix)]
        p: RationalMatrix,
        /// Tree-level part, e.g. `1/6*x1^3 + x1*x2^2`.
        #[arg(long, value_parser = parse::polynomial)]
        interaction: holoflow::poly::Poly,
        /// One-loop part.
        #[arg(long, value_parser = parse::polynomial, default_value = "0")]
        h1: holoflow::poly::Poly,
        /// Degree through which the interaction is exact.
        #[arg(long, default_value_t = 6)]
        degree: u32,
    },
    /// AM-GM bound on the Schwinger-parameter integral.
    Bound {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
        #[arg(long = "L", default_value_t = 1.0)]
        big_l: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Pairing of the Bochner–Martinelli kernel with the ∂̄ of a Gaussian.
    Greens {
        #[arg(long, default_value_t = 1)]
        d: usize,
        /// Center of the Gaussian; defaults to the origin.
        #[arg(long, value_parser = parse::complex_list)]
        center: Option<ComplexList>,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("HOLOFLOW_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("HOLOFLOW_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn emit(text: &str, out: Option<&PathBuf>) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(Verdict::UsageError.exit_code());
    }
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let start = Instant::now();
    let (name, inputs, outcome) = commands::run(cli.command, &cli.global);

    let report = Report {
        command: name,
        argv: &argv,
        inputs: &inputs,
        seed: cli.global.seed,
        outcome: outcome.as_ref(),
    };
    let verdict = report.verdict();
    let text = match (cli.global.format, &outcome) {
        (Format::Csv, Ok(o)) => match &o.rows {
            Some(rows) => report::to_csv(rows),
            None => {
                eprintln!("error: {name} has no CSV table; use --format json");
                return ExitCode::from(Verdict::UsageError.exit_code());
            }
        },
        (Format::Csv, Err(Failure { message, .. })) => {
            eprintln!("error: {message}");
            return ExitCode::from(verdict.exit_code());
        }
        (Format::Json, _) => report.to_json(),
    };
    if let Err(e) = emit(&text, cli.global.out.as_ref()) {
        eprintln!("error: cannot write report: {e}");
        return ExitCode::from(Verdict::UsageError.exit_code());
    }
    if cli.global.timing {
        eprintln!("wall time: {:.3} s", start.elapsed().as_secs_f64());
    }
    ExitCode::from(verdict.exit_code())
}
