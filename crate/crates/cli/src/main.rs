//! `kbb`: boundary classification reports for `L_{2p^2}` and `L_2`.

mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kbb_core::verify::{Suite, VerifyConfig};
use kbb_core::Error;



#[derive(Parser)]
#[command(name = "kbb", version, about = "Baily-Borel boundary classification for L_2p^2 and L_2")]
struct Cli {
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GraphFormat {
    Json,
    Dot,
    Text,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct PrimeArg {
    /// Prime p > 3.
    #[arg(long, allow_negative_numbers = true)]
    p: i64,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Incidence graph of boundary points and curves.
    Boundary {
        #[arg(long, required_unless_present = "l2", conflicts_with = "l2", allow_negative_numbers = true)]
        p: Option<i64>,
        /// The level-one lattice L_2 instead of L_2p^2.
        #[arg(long)]
        l2: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: GraphFormat,
    },
    /// Boundary point orbits with representatives.
    Points(PrimeArg),
    /// One curve per type, with normal form and modular group.
    Curves(PrimeArg),
    /// Upper bounds on the number of boundary curves of each type.
    Bounds(PrimeArg),
    /// 2(p^5 + p^2), with the orthogonal-group index it dominates.
    IndexBound(PrimeArg),
    /// Form class number h(D) of a negative discriminant.
    Classnum {
        #[arg(allow_negative_numbers = true)]
        d: i64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Discriminant-form and finite orthogonal group queries.
    Fqm {
        #[command(subcommand)]
        command: FqmCommand,
    },
    /// Run a verification suite.
    Verify {
        suite: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 5, allow_negative_numbers = true)]
        p: i64,
        #[arg(long, default_value_t = 3)]
        dim: usize,
        /// Sample count; 0 uses the suite default.
        #[arg(long, default_value_t = 0)]
        count: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

#[derive(Subcommand)]
enum FqmCommand {
    /// Isotropic elements of D(L_2d).
    Isotropic {
        #[arg(long, conflicts_with = "d", required_unless_present = "d", allow_negative_numbers = true)]
        p: Option<i64>,
        /// Use d directly instead of d = p^2.
        #[arg(long)]
        d: Option<i64>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// |O(V)| for a nondegenerate quadratic space over F_p.
    Order {
        #[arg(long, allow_negative_numbers = true)]
        p: i64,
        #[arg(long)]
        dim: usize,
        /// Discriminant sign in even dimension; both are reported when absent.
        #[arg(long, allow_negative_numbers = true)]
        eps: Option<i64>,
        /// Also count the group exhaustively.
        #[arg(long)]
        brute_force: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Invariant(_) | Error::NotIsometry(_) | Error::Serde(_) => 3,
        _ => 2,
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("KBB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| format!("KBB_THREADS must be a positive integer (got `{raw}`)"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

/// The rendered output, and whether every check it reports passed.
fn run(command: &Command) -> Result<(String, bool), Error> {
    let text = match command {
        Command::Boundary { p, l2, format } => {
            let graph = if *l2 {
                kbb_core::boundary::build_boundary_graph_l2()?
            } else {
                kbb_core::boundary::build_boundary_graph(p.expect("clap enforces --p or --l2"))?
            };
            match format {
                GraphFormat::Json => report::pretty(&graph.to_json()),
                GraphFormat::Dot => graph.to_dot(),
                GraphFormat::Text => graph.to_text(),
            }
        }
        Command::Points(a) => report::points(a.p)?.render(a.format),
        Command::Curves(a) => report::curves(a.p)?.render(a.format),
        Command::Bounds(a) => report::bounds(a.p)?.render(a.format),
        Command::IndexBound(a) => report::index_bound(a.p)?.render(a.format),
        Command::Classnum { d, format } => report::classnum(*d)?.render(*format),
        Command::Fqm { command: FqmCommand::Isotropic { p, d, format } } => {
            let d = match (p, d) {
                (Some(p), _) => {
                    kbb_core::arith::check_boundary_prime(*p)?;
                    p * p
                }
                (None, Some(d)) => *d,
                (None, None) => unreachable!("clap enforces --p or --d"),
            };
            report::fqm_isotropic(d)?.render(*format)
        }
        Command::Fqm { command: FqmCommand::Order { p, dim, eps, brute_force, format } } => {
            report::fqm_order(*p, *dim, *eps, *brute_force)?.render(*format)
        }
        Command::Verify { suite, seed, p, dim, count, format } => {
            let suite: Suite = suite.parse()?;
            let cfg = VerifyConfig { seed: *seed, p: *p, dim: *dim, count: *count, pairs: 0 };
            let (r, passed) = report::verify(suite, &cfg)?;
            return Ok((r.render(*format), passed));
        }
    };
    Ok((text, true))
}

fn emit(cli: &Cli, text: &str) -> Result<(), String> {
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).map_err(|e| e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    match run(&cli.command) {
        Ok((text, passed)) => {
            if let Err(msg) = emit(&cli, &text) {
                eprintln!("error: {msg}");
                return ExitCode::from(2);
            }
            if passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("error: verification failed");
                ExitCode::from(3)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
