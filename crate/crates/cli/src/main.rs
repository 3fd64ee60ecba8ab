use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nabounds_cli::{cmd_certify, cmd_price, cmd_vertices, CliError, Method, Nodes, RunConfig};

#[derive(Parser)]
#[command(name = "nabounds", version, about = "No-arbitrage price bounds in multi-asset binomial markets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Price bounds at the root or at every node, as CSV.
    Price {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        method: Option<Method>,
        #[arg(long, value_enum)]
        nodes: Option<Nodes>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Fibrewise super/submodularity certificate.
    Certify {
        #[arg(long)]
        config: PathBuf,
    },
    /// Vertices of the single-step martingale polytope, as CSV.
    Vertices {
        #[arg(long)]
        config: PathBuf,
    },
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Price {
            config,
            method,
            nodes,
            threads,
        } => {
            let cfg = RunConfig::from_file(&config)?;
            let mut builder = rayon::ThreadPoolBuilder::new();
            if let Some(t) = threads {
                if t == 0 {
                    return Err(CliError::Config("--threads must be at least 1".into()));
                }
                builder = builder.num_threads(t);
            }
            let pool = builder.build().map_err(|e| CliError::Config(e.to_string()))?;
            pool.install(|| cmd_price(&cfg, method, nodes))
        }
        Command::Certify { config } => cmd_certify(&RunConfig::from_file(&config)?),
        Command::Vertices { config } => cmd_vertices(&RunConfig::from_file(&config)?),
    }
}

fn main() -> ExitCode {
    // clap's own usage errors would exit 2, which is reserved for certification
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("nabounds: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
