use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use conedbar::harness::commands::{self, Context};
use conedbar::harness::{Config, EstimateCase, EstimateId, Summary};

#[derive(Parser)]
#[command(name = "conedbar", version, about = "Checks and estimate sweeps for the dbar complex on the cone z3^2 = z1 z2")]
struct Cli {
    /// Grid resolutions, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Flat `key = value` config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Metric, inverse, frame and grid mask checks.
    CheckGeometry,
    /// dbar^2 = 0 and the structure equations on dyadic annuli.
    CheckOperators,
    /// Discrete adjointness of dbar and dbar^* under refinement.
    CheckAdjoint,
    /// Fractional norm validation.
    CheckNorms,
    /// Mollifier convergence for the first-order operators.
    Friedrichs,
    /// Sweep one estimate over the configured family.
    Estimate {
        case: EstimateId,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        p: Option<f64>,
    },
    /// Sweep E1-E3 and the configured E4 cases.
    Sweep,
    /// Collect the summaries in the output directory.
    Report,
}

fn run(cli: Cli) -> conedbar::Result<Vec<Summary>> {
    let mut config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    let ctx = Context {
        config,
        n: cli.n,
        out: cli.out,
    };
    Ok(match cli.command {
        Command::CheckGeometry => vec![commands::check_geometry_cmd(&ctx)?],
        Command::CheckOperators => vec![commands::check_operators_cmd(&ctx)?],
        Command::CheckAdjoint => vec![commands::check_adjoint_cmd(&ctx)?],
        Command::CheckNorms => vec![commands::check_norms_cmd(&ctx)?],
        Command::Friedrichs => vec![commands::friedrichs_cmd(&ctx)?],
        Command::Estimate { case, epsilon, p } => {
            vec![commands::estimate_cmd(&ctx, EstimateCase::new(case, epsilon, p)?)?]
        }
        Command::Sweep => commands::sweep_cmd(&ctx)?,
        Command::Report => vec![commands::report_cmd(&ctx)?],
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(summaries) => {
            for s in &summaries {
                let ratio = s.max_ratio.map(|r| format!(" max_ratio={r:.6}")).unwrap_or_default();
                println!("{}: {}{ratio} ({})", s.case, if s.pass { "PASS" } else { "FAIL" }, s.rows_csv);
            }
            if summaries.iter().all(|s| s.pass) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
