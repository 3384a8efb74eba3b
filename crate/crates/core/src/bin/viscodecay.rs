use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use viscodecay::commands::{dispatch, fit_csv, Artifacts, EXIT_ERROR};

#[derive(Parser)]
#[command(
    name = "viscodecay",
    version,
    about = "Energy decay and blow-up laboratory for viscoelastic wave equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run specification (JSON).
    #[arg(long)]
    spec: PathBuf,
    /// Output directory for reports and trajectories.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Dotted-path override, e.g. `time.dt=0.002`. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Constants and condition reports; exit 2 when decay conditions fail.
    Check(Common),
    /// Simulate and write the energy trajectory.
    Simulate(Common),
    /// Check, simulate and audit against the decay envelope.
    Verify(Common),
    /// Fit the decay class of a simulated or recorded trajectory.
    Fit {
        /// Fit the `t` and `E` columns of this CSV instead of simulating.
        #[arg(long, conflicts_with = "spec")]
        csv: Option<PathBuf>,
        #[arg(long, required_unless_present = "csv")]
        spec: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Verify every point of a parameter grid in parallel.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Sweep axis `key=v1,v2,...`. Repeatable; axes combine as a product.
        #[arg(long = "vary", value_name = "KEY=V1,V2,...", required = true)]
        vary: Vec<String>,
    },
}

fn execute(cli: Cli) -> viscodecay::Result<(i32, Artifacts, PathBuf)> {
    let (name, common, extra) = match cli.command {
        Command::Check(c) => ("check", c, vec![]),
        Command::Simulate(c) => ("simulate", c, vec![]),
        Command::Verify(c) => ("verify", c, vec![]),
        Command::Sweep { common, vary } => ("sweep", common, vary),
        Command::Fit {
            csv: Some(csv), out, ..
        } => {
            let report = fit_csv(&csv)?;
            let mut art = Artifacts::default();
            art.json("fit.json", &report)?;
            return Ok((report.exit_code, art, out));
        }
        Command::Fit {
            spec, out, overrides, ..
        } => (
            "fit",
            Common {
                spec: spec.expect("clap requires --spec without --csv"),
                out,
                overrides,
            },
            vec![],
        ),
    };
    let (code, art) = dispatch(name, &common.spec, &common.overrides, &extra)?;
    Ok((code, art, common.out))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = execute(cli).and_then(|(code, art, out)| {
        for path in art.write(&out)? {
            println!("wrote {}", path.display());
        }
        Ok(code)
    });
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
