mod commands;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Compute, certify and draw the ellipsoid map E ↦ u_K(E).
#[derive(Debug, Parser)]
#[command(name = "ellipmap", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Body file (JSON)
    #[arg(long)]
    pub body: PathBuf,
    /// Reference ellipsoid file (JSON)
    #[arg(long)]
    pub ellipsoid: PathBuf,
    /// Solver configuration (JSON); defaults apply to missing fields
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write the report here instead of standard output
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for u_K(E) and write the full report with a certificate
    ComputeU(Common),
    /// Only the optimal value J_K(E)
    JValue(Common),
    /// Test whether E is a fixed point of u_K
    CheckJohn {
        #[command(flatten)]
        common: Common,
        /// Exit with status 3 unless E is a fixed point
        #[arg(long)]
        expect_fixed: bool,
    },
    /// Iterate E_{k+1} = u_K(E_k)
    Iterate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10)]
        steps: usize,
    },
    /// Solve the dual problem ū_K(E)
    Dual(Common),
    /// Check a candidate u_K(E) against an optimality certificate
    Certify {
        #[command(flatten)]
        common: Common,
        /// Candidate ellipsoid file (JSON)
        #[arg(long)]
        candidate: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Planar brute-force reference and Monte-Carlo M_E(K)
    Oracle {
        #[command(flatten)]
        common: Common,
        /// Also estimate M_E(K) from this many samples
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Draw a planar body with ellipsoids and contact points as SVG
    Render {
        #[arg(long)]
        body: PathBuf,
        /// Ellipsoid file; may be repeated
        #[arg(long = "ellipsoid", required = true)]
        ellipsoids: Vec<PathBuf>,
        /// Also solve u_K(E) for the first ellipsoid and draw it
        #[arg(long)]
        solve: bool,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors, which is reserved for numerical failures here
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match commands::run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("ellipmap: {e}");
            ExitCode::from(e.code())
        }
    }
}
