//! Command-line front end: `simulate`, `indicators`, `converge`, `compare`.
//!
//! Exit codes: 0 success, 1 configuration / argument / I/O error, 2 solver
//! error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use aoi_nsfd::{convergence_study, indicator_report, nsfd_run, scheme_comparison, trapz_dq_run, Trajectory};
use clap::{Parser, Subcommand, ValueEnum};

pub mod config;

use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("solver error: {0}")]
    Solver(aoi_nsfd::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Solver(_) => 2,
        }
    }
}

impl From<aoi_nsfd::Error> for CliError {
    fn from(e: aoi_nsfd::Error) -> Self {
        match e {
            aoi_nsfd::Error::Config(_) | aoi_nsfd::Error::Validation { .. } => CliError::Config(e.to_string()),
            other => CliError::Solver(other),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "aoi-nsfd",
    version,
    about = "NSFD solver for age-of-infection epidemic models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Nsfd,
    Trapz,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the model and write `t,S,phi` rows as CSV.
    Simulate {
        config: PathBuf,
        #[arg(long)]
        h: f64,
        #[arg(long)]
        tmax: f64,
        #[arg(long, value_enum, default_value = "nsfd")]
        scheme: SchemeArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print R0, R0_h, tau_h, growth rates and the relation-based final size.
    Indicators {
        config: PathBuf,
        #[arg(long)]
        h: f64,
    },
    /// Errors and experimental orders against a fine reference run.
    Converge {
        config: PathBuf,
        /// Comma-separated, strictly decreasing steps.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        h_list: Vec<f64>,
        #[arg(long)]
        h_ref: f64,
        #[arg(long)]
        tmax: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run NSFD and the trapezoidal scheme on one mesh and count property violations.
    Compare {
        config: PathBuf,
        #[arg(long)]
        h: f64,
        #[arg(long, default_value_t = 40.0)]
        tmax: f64,
        #[arg(long)]
        out_prefix: PathBuf,
    },
}

/// Runs a parsed command, writing reports to `stdout`.
pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate {
            config,
            h,
            tmax,
            scheme,
            out,
        } => {
            let cfg = RunConfig::load(&config)?;
            let solver = cfg.solver(h, tmax);
            let traj = match scheme {
                SchemeArg::Nsfd => nsfd_run(&cfg.model, &solver)?,
                SchemeArg::Trapz => trapz_dq_run(&cfg.model, &solver)?,
            };
            write_trajectory(&out, &traj)
        }
        Command::Indicators { config, h } => {
            let cfg = RunConfig::load(&config)?;
            let r = indicator_report(&cfg.model, h, cfg.tail_tol, None)?;
            let opt = |v: Option<f64>| v.unwrap_or(f64::NAN);
            let lines = [
                ("R0", r.r0),
                ("R0_h", r.r0_h),
                ("tau_h", r.tau_h),
                ("r_continuous", opt(r.r_continuous)),
                ("r_discrete", opt(r.r_discrete)),
                ("S_inf_relation", r.s_inf_relation),
            ];
            for (key, value) in lines {
                writeln!(stdout, "{key}={value}").map_err(io_error("standard output"))?;
            }
            Ok(())
        }
        Command::Converge {
            config,
            h_list,
            h_ref,
            tmax,
            out,
        } => {
            let cfg = RunConfig::load(&config)?;
            let rows = convergence_study(&cfg.model, &h_list, h_ref, &cfg.solver(h_ref, tmax))?;
            write_csv(&out, |w| {
                writeln!(w, "h,errS_abs,errPhi_abs,errS_rel,errPhi_rel,ordS,ordPhi")?;
                let opt = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
                for r in &rows {
                    let e = &r.errors;
                    writeln!(
                        w,
                        "{:?},{:?},{:?},{:?},{:?},{},{}",
                        r.h,
                        e.abs_s,
                        e.abs_phi,
                        e.rel_s,
                        e.rel_phi,
                        opt(r.order_s),
                        opt(r.order_phi)
                    )?;
                }
                Ok(())
            })
        }
        Command::Compare {
            config,
            h,
            tmax,
            out_prefix,
        } => {
            let cfg = RunConfig::load(&config)?;
            let c = scheme_comparison(&cfg.model, h, &cfg.solver(h, tmax))?;
            write_trajectory(&suffixed(&out_prefix, "_nsfd.csv"), &c.nsfd)?;
            write_trajectory(&suffixed(&out_prefix, "_trapz.csv"), &c.trapz)?;
            let w = io_error("standard output");
            writeln!(stdout, "nsfd_violations={}", c.nsfd_violations.len()).map_err(&w)?;
            writeln!(stdout, "trapz_violations={}", c.trapz_violations.len()).map_err(&w)?;
            if let Some(n) = c.trapz_breakdown {
                writeln!(stdout, "trapz_breakdown_step={n}").map_err(&w)?;
                return Err(CliError::Solver(aoi_nsfd::Error::FixedPoint {
                    n,
                    h,
                    partial: Box::new(c.trapz),
                }));
            }
            Ok(())
        }
    }
}

fn suffixed(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn io_error(what: impl std::fmt::Display) -> impl Fn(io::Error) -> CliError {
    move |e| CliError::Io(format!("{what}: {e}"))
}

fn write_csv<F>(path: &Path, body: F) -> Result<(), CliError>
where
    F: FnOnce(&mut BufWriter<File>) -> io::Result<()>,
{
    let err = io_error(path.display());
    let mut w = BufWriter::new(File::create(path).map_err(&err)?);
    body(&mut w).and_then(|_| w.flush()).map_err(&err)
}

/// `t,S,phi` with shortest round-trip float formatting.
pub fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<(), CliError> {
    write_csv(path, |w| {
        writeln!(w, "t,S,phi")?;
        for ((t, s), phi) in traj.times().zip(traj.s()).zip(traj.phi()) {
            writeln!(w, "{t:?},{s:?},{phi:?}")?;
        }
        Ok(())
    })
}
