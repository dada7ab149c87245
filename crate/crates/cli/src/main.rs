use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use converse_core::experiment::{
    central_character_probe, run_converse, run_gamma_table, run_height_audit, run_inventory, run_special_pair_audit,
    run_verify, Envelope, ExperimentConfig, ExperimentError, Report, Suite, TwistPolicy,
};

/// Environment variable selecting the worker thread count.
const THREADS_VAR: &str = "CONVERSE_THREADS";

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "converse", version, about = "Finite-field converse-theorem experiments for GL_n(F_q)")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Rank of the group GL_n.
    #[arg(long, global = true, default_value_t = 2)]
    n: usize,
    /// Characteristic of the field.
    #[arg(long, global = true, default_value_t = 3)]
    p: u32,
    /// Degree of the field over F_p (q = p^k).
    #[arg(long, global = true, default_value_t = 1)]
    k: u32,
    /// Directory receiving the report files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Relative tolerance for grouping Hecke eigenvalues.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol_group: f64,
    /// Absolute tolerance above which gamma factors count as different.
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol_sep: f64,
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Format printed to stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Which {
    SpecialPair,
    Height,
    CentralChar,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Split the Gelfand-Graev module into generic components.
    Inventory,
    /// Gamma factors of cuspidal components against twists of rank <= rmax.
    Gamma {
        #[arg(long)]
        rmax: Option<usize>,
        /// Twist by every generic component, not only cuspidal ones.
        #[arg(long)]
        all_generic: bool,
    },
    /// Distinguish cuspidal pairs with equal central character by gamma factors.
    Converse {
        #[arg(long)]
        rmax: Option<usize>,
        #[arg(long)]
        all_generic: bool,
    },
    /// Structural audits of the Bessel functions.
    Audit {
        #[arg(long, value_enum)]
        which: Which,
    },
    /// Run a verification suite.
    Verify {
        #[arg(long, value_parser = parse_suite)]
        suite: Suite,
    },
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse()
}

fn config_from(global: &Global, rmax: Option<usize>, all_generic: bool) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(global.n, global.p, global.k);
    cfg.r_max = rmax;
    cfg.twist_policy = if all_generic { TwistPolicy::AllGeneric } else { TwistPolicy::CuspidalOnly };
    cfg.tol_group = global.tol_group;
    cfg.tol_sep = global.tol_sep;
    cfg.seed = global.seed;
    cfg
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| format!("{THREADS_VAR} must be a positive integer, got '{raw}'"))?;
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().map_err(|e| e.to_string())
}

enum Failure {
    Usage(String),
    Run(String),
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        if e.is_usage() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Run(e.to_string())
        }
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    std::fs::write(dir.join(name), contents).map_err(|e| Failure::Run(format!("writing {name}: {e}")))
}

/// Prints the report and writes report files; returns whether it passed.
fn emit<R: Report>(global: &Global, config: &ExperimentConfig, report: &R) -> Result<bool, Failure> {
    let envelope = Envelope::new(config, report);
    let json = envelope.to_json();
    let text = report.text();
    let csv = report.csv();
    match global.format {
        Format::Json => print!("{json}"),
        Format::Text => print!("{text}"),
        Format::Csv => match &csv {
            Some(c) => print!("{c}"),
            None => return Err(Failure::Usage(format!("the {} report has no CSV form", report.kind()))),
        },
    }
    if let Some(dir) = &global.out {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Run(format!("creating {}: {e}", dir.display())))?;
        write_file(dir, &format!("{}.json", report.kind()), &json)?;
        write_file(dir, &format!("{}.txt", report.kind()), &text)?;
        if let Some(c) = &csv {
            write_file(dir, &format!("{}.csv", report.kind()), c)?;
        }
    }
    Ok(report.passed())
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    configure_threads().map_err(Failure::Usage)?;
    let g = &cli.global;
    match &cli.command {
        Command::Inventory => {
            let cfg = config_from(g, None, false);
            emit(g, &cfg, &run_inventory(&cfg)?)
        }
        Command::Gamma { rmax, all_generic } => {
            let cfg = config_from(g, *rmax, *all_generic);
            emit(g, &cfg, &run_gamma_table(&cfg)?)
        }
        Command::Converse { rmax, all_generic } => {
            let cfg = config_from(g, *rmax, *all_generic);
            emit(g, &cfg, &run_converse(&cfg)?)
        }
        Command::Audit { which } => {
            let cfg = config_from(g, None, false);
            match which {
                Which::SpecialPair => emit(g, &cfg, &run_special_pair_audit(&cfg)?),
                Which::Height => emit(g, &cfg, &run_height_audit(&cfg)?),
                Which::CentralChar => emit(g, &cfg, &central_character_probe(&cfg)?),
            }
        }
        Command::Verify { suite } => {
            let cfg = config_from(g, None, false);
            emit(g, &cfg, &run_verify(&cfg, *suite)?)
        }
    }
}

/// Parses arguments; every parse error exits with the usage code and a
/// usage line, including value errors where clap omits it.
fn parse_args() -> Result<Cli, ExitCode> {
    Cli::try_parse().map_err(|e| {
        if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
            e.exit();
        }
        let rendered = e.render().to_string();
        eprint!("{rendered}");
        if !rendered.contains("Usage:") {
            eprintln!("\n{}", Cli::command().render_usage());
        }
        ExitCode::from(EXIT_USAGE)
    })
}

fn main() -> ExitCode {
    let cli = match parse_args() {
        Ok(cli) => cli,
        Err(code) => return code,
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAILURE),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}
