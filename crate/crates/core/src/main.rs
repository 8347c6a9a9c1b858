use std::path::PathBuf;
use std::process::ExitCode;

use abw_portfolio::experiment::{describe_cases, figure1_data, run, write_figure1, RunConfig, RunOptions};
use abw_portfolio::MarketParams;
use clap::{Args, Parser, Subcommand};

/// Benchmark-constrained expected utility portfolios under the α-BW divergence.
#[derive(Parser)]
#[command(name = "abw-portfolio", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve every case of a config and write CSV/SVG artifacts.
    Run {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Validate and print the case matrix without solving.
        #[arg(long)]
        dry_run: bool,
    },
    /// Write the divergence-integrand figure data.
    Figure1 {
        /// Config providing the market; the illustration market otherwise.
        config: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Check a config and list every violated invariant.
    Validate { config: PathBuf },
}

#[derive(Args)]
struct Common {
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Grid size (overrides the config).
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long, short)]
    verbose: bool,
}

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("ABW_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| format!("ABW_THREADS must be a positive integer, got {v:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn execute(cli: Cli) -> Result<u8, Box<dyn std::error::Error>> {
    init_threads()?;
    match cli.command {
        Command::Validate { config } => {
            let cfg = RunConfig::from_path(&config)?;
            println!("{}: ok, {} cases", config.display(), cfg.cases().len());
            Ok(0)
        }
        Command::Run { config, common, dry_run } => {
            let mut cfg = RunConfig::from_path(&config)?;
            if let Some(n) = common.grid {
                cfg.numerics.grid_size = n;
                cfg.validate()?;
            }
            if dry_run {
                print!("{}", describe_cases(&cfg));
                return Ok(0);
            }
            let opts = RunOptions {
                out_dir: common.out,
                grid: None,
                verbose: common.verbose,
            };
            let report = run(&cfg, &opts)?;
            for o in &report.outcomes {
                if o.infeasible() {
                    eprintln!("{}: infeasible", o.case.label());
                }
            }
            for f in report.failed_checks() {
                eprintln!("check failed: {f}");
            }
            if common.verbose {
                eprintln!("wrote {}", report.out_dir.display());
            }
            Ok(report.exit_code() as u8)
        }
        Command::Figure1 { config, common } => {
            let (market, mut points, mut dir) = match config {
                Some(p) => {
                    let cfg = RunConfig::from_path(&p)?;
                    (cfg.market_params()?, cfg.output.figure1_points, cfg.output.directory)
                }
                None => (MarketParams::illustration(), 1000, PathBuf::from("out")),
            };
            if let Some(n) = common.grid {
                points = n;
            }
            if let Some(o) = common.out {
                dir = o;
            }
            let data = figure1_data(&market, points)?;
            for path in write_figure1(&data, &dir)? {
                if common.verbose {
                    eprintln!("wrote {}", path.display());
                }
            }
            Ok(0)
        }
    }
}
