// Guards such as `!(x > 0.0)` deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Analysis toolkit for the cubic Lengyel-Epstein family
/// x' = (a - x)(1 + x^2) - 4xy,  y' = b x (1 + x^2 - y).
#[derive(Parser, Debug)]
#[command(name = "lengyel", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Directory for output files (created if missing).
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Seed for randomized suites.
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,
    /// Worker threads for parallel sweeps (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
    /// Integrator relative tolerance.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub rel_tol: f64,
    /// Integrator absolute tolerance.
    #[arg(long, global = true, default_value_t = 1e-12)]
    pub abs_tol: f64,
    /// Escape radius.
    #[arg(long, global = true, default_value_t = 1e6)]
    pub r_escape: f64,
    /// Convergence radius around the equilibrium.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol_conv: f64,
    /// Relative band treated as lying on the Hopf curve.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol_curve: f64,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Integrate one orbit; writes orbit.csv and fate.json.
    Simulate {
        #[arg(short)]
        a: f64,
        #[arg(short)]
        b: f64,
        #[arg(long, allow_hyphen_values = true)]
        x0: f64,
        #[arg(long, allow_hyphen_values = true)]
        y0: f64,
        #[arg(long, default_value_t = 1e4)]
        t_max: f64,
    },
    /// Phase portrait with detected cycles; writes portrait.svg and cycles.json.
    Portrait {
        #[arg(short)]
        a: f64,
        #[arg(short)]
        b: f64,
        /// Window as xmin,xmax,ymin,ymax (default: around the equilibrium).
        #[arg(long, value_parser = parse_list::<4>, allow_hyphen_values = true)]
        window: Option<[f64; 4]>,
        /// Number of sampled orbits.
        #[arg(long, default_value_t = 24)]
        n_orbits: usize,
        /// Integration time per sampled orbit.
        #[arg(long, default_value_t = 40.0)]
        t_orbit: f64,
    },
    /// Parameter-plane region map; writes regions.json and regions.svg.
    Regions {
        #[arg(long, value_parser = parse_list::<2>, default_value = "0.5,30")]
        a_range: [f64; 2],
        #[arg(long, value_parser = parse_list::<2>, default_value = "0.5,20")]
        b_range: [f64; 2],
        /// Grid as nx,ny.
        #[arg(long, value_parser = parse_list::<2>, default_value = "60,40")]
        resolution: [f64; 2],
        /// Settle the two-cycle region by counting cycles and bracket S.
        #[arg(long)]
        with_cycles: bool,
        /// Extra points a,b to label individually (repeatable).
        #[arg(long = "probe", value_parser = parse_list::<2>)]
        probes: Vec<[f64; 2]>,
        /// Bisection tolerance for S.
        #[arg(long, default_value_t = 1e-3)]
        tol_b: f64,
    },
    /// Infinite and blown-up circle equilibria; writes infinity.json and disk.svg.
    Infinity {
        #[arg(short)]
        a: f64,
        #[arg(short)]
        b: f64,
    },
    /// Lyapunov coefficients along the Hopf curve; writes hopf_scan.csv and hopf.json.
    Hopf {
        #[arg(long, value_parser = parse_list::<2>, default_value = "7,30")]
        a_range: [f64; 2],
        #[arg(long, default_value_t = 100)]
        n: usize,
    },
    /// Limit cycles via the return map; writes cycles.json and cycle_<k>.csv.
    Cycles {
        #[arg(short)]
        a: f64,
        #[arg(short)]
        b: f64,
        /// Right end of the search on the section (default: adaptive).
        #[arg(long)]
        x_max: Option<f64>,
        #[arg(long, default_value_t = 60)]
        n_seed: usize,
        #[arg(long, value_enum, default_value_t = SectionArg::Horizontal)]
        section: SectionArg,
        /// Also bracket the semistable value b_S(a).
        #[arg(long)]
        semistable: bool,
        #[arg(long, default_value_t = 1e-3)]
        tol_b: f64,
    },
    /// Dulac certificate for the first quadrant; writes dulac.json.
    Dulac {
        #[arg(short)]
        a: f64,
        #[arg(short)]
        b: f64,
        #[arg(long, default_value_t = 1e3)]
        x_max: f64,
        #[arg(long, default_value_t = 10_000)]
        n_grid: usize,
    },
    /// Run verification suites; writes verify.json and exits 1 on failure.
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SectionArg {
    Horizontal,
    Vertical,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SuiteArg {
    All,
    Theorem1,
    Theorem2,
    Hopf,
    Cycles,
    Dulac,
    Infinity,
}

fn parse_list<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(format!("expected {N} comma-separated numbers, got '{s}'"));
    }
    let mut out = [0.0; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().map_err(|_| format!("'{p}' is not a number"))?;
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match commands::run(&cli) {
        Ok(commands::Outcome::Success) => ExitCode::SUCCESS,
        Ok(commands::Outcome::VerificationFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code_for(&e))
        }
    }
}
