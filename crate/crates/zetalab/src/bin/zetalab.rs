//! Command-line front end: ingest curve/surface/family specifications, run
//! the analysis pipelines, and write JSON reports and CSV plot data.
//!
//! Exit codes: 0 = all hard checks passed, 2 = hard check failed
//! (validation, overdetermination, identity mismatch), 3 = input error.
//! The worker count honors the ZETALAB_THREADS environment variable.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use zetalab::report::{run, CommandSpec, JobSpec, Tolerances};

#[derive(Parser)]
#[command(name = "zetalab", version, about = "zeta and L-function computations over finite fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output directory for report.json and CSV files.
    #[arg(long, global = true, default_value = "zetalab-out")]
    out: PathBuf,

    /// Seed echoed into the report (fixture generation reproducibility).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Relative tolerance for the numeric Riemann hypothesis check.
    #[arg(long, global = true, default_value_t = 1e-9)]
    rh_tol: f64,

    /// Tolerance for identity checks.
    #[arg(long, global = true, default_value_t = 1e-9)]
    eval_tol: f64,

    /// Tolerance for family classification diagnostics.
    #[arg(long, global = true, default_value_t = 1e-3)]
    conv_tol: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a JSON file of L-function records and dump their roots.
    Validate(ValidateArgs),
    /// Zeta function of a hyperelliptic curve y^2 = f(x) (or from counts).
    CurveZeta(CurveArgs),
    /// L-function of an elliptic surface y^2 = x^3 + A(t)x + B(t) over F_q(t).
    EllLfun(EllArgs),
    /// Classify a family and evaluate the basic inequalities.
    FamilyReport(FamilyArgs),
    /// Limit zero density of a family, with the cosine inequality sweep.
    ZeroDensity(DensityArgs),
    /// Histogram of member zero angles against the limit density.
    ZeroHist(HistArgs),
    /// Brauer-Siegel ratios and central-point data of a family.
    BsReport(BsArgs),
}

#[derive(Args)]
struct ValidateArgs {
    /// JSON array of {"label", "q", "w", "coeffs": ["1", ...]} records.
    #[arg(long = "in")]
    input: PathBuf,
    /// Use the exact Sturm-chain Riemann hypothesis certificate.
    #[arg(long)]
    exact: bool,
}

#[derive(Args)]
struct CurveArgs {
    /// Base field size q = p^e.
    #[arg(long)]
    q: u64,
    /// Genus g; reconstruction needs counts N_1..N_g.
    #[arg(long)]
    genus: usize,
    /// Coefficients of squarefree f(x), constant term first, as element
    /// indices (plain integers over a prime field).
    #[arg(long)]
    poly: Option<String>,
    /// Ingested point counts "N_1,N_2,..." instead of a model.
    #[arg(long)]
    counts: Option<String>,
    /// Batch mode: run every squarefree monic f of this degree.
    #[arg(long)]
    batch_degree: Option<usize>,
}

#[derive(Args)]
struct EllArgs {
    /// Characteristic p >= 5.
    #[arg(long)]
    p: u64,
    /// Extension degree e (q = p^e).
    #[arg(long, default_value_t = 1)]
    e: u32,
    /// Coefficients of A(t), constant term first.
    #[arg(long = "A")]
    a: String,
    /// Coefficients of B(t), constant term first.
    #[arg(long = "B")]
    b: String,
}

#[derive(Args)]
struct FamilyArgs {
    /// Family file: JSON array of L-function/zeta records, or a summary
    /// object {"q", "w", "epsilon", "members": [...]}.
    #[arg(long = "in")]
    input: PathBuf,
    /// Optional base-change tower file {"q", "nu", "phi": [...]}.
    #[arg(long)]
    tower: Option<PathBuf>,
}

#[derive(Args)]
struct DensityArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Grid points over (-pi, pi].
    #[arg(long, default_value_t = 4096)]
    grid: usize,
}

#[derive(Args)]
struct HistArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 32)]
    bins: usize,
    #[arg(long, default_value_t = 4096)]
    grid: usize,
}

#[derive(Args)]
struct BsArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Evaluation points (repeatable); default = w_e/2 + 1/4.
    #[arg(long = "s")]
    s: Vec<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(threads) = std::env::var("ZETALAB_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let command = match cli.command {
        Command::Validate(a) => CommandSpec::Validate { input: a.input, exact: a.exact },
        Command::CurveZeta(a) => CommandSpec::CurveZeta {
            q: a.q,
            genus: a.genus,
            poly: a.poly,
            counts: a.counts,
            batch_degree: a.batch_degree,
        },
        Command::EllLfun(a) => CommandSpec::EllLfun { p: a.p, e: a.e, a: a.a, b: a.b },
        Command::FamilyReport(a) => CommandSpec::FamilyReport { input: a.input, tower: a.tower },
        Command::ZeroDensity(a) => CommandSpec::ZeroDensity { input: a.input, grid: a.grid },
        Command::ZeroHist(a) => {
            CommandSpec::ZeroHist { input: a.input, bins: a.bins, grid: a.grid }
        }
        Command::BsReport(a) => CommandSpec::BsReport { input: a.input, s: a.s },
    };
    let job = JobSpec {
        command,
        out_dir: cli.out,
        seed: cli.seed,
        tolerances: Tolerances {
            rh_tol: cli.rh_tol,
            eval_tol: cli.eval_tol,
            conv_tol: cli.conv_tol,
            ..Tolerances::default()
        },
    };
    match run(&job) {
        Ok(report) => {
            println!(
                "{}: ok ({} warning{}), report written to {}",
                report.command,
                report.warnings.len(),
                if report.warnings.len() == 1 { "" } else { "s" },
                job.out_dir.join("report.json").display()
            );
            for w in &report.warnings {
                println!("  warning: {w}");
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("{}: {err}", job.command.name());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
