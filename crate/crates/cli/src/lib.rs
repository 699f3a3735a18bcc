//! Command-line front end: scenario files and presets, bound reports, CSV
//! sweeps for figures, and the working-dimension study.

pub mod cache;
pub mod commands;
pub mod error;
pub mod io;

use clap::{Parser, Subcommand};

pub use error::{CliError, Result};

#[derive(Parser, Debug)]
#[command(name = "distrust", version, about = "Bounds on prepare-and-measure correlations under distrusted preparations")]
pub struct Cli {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true, env = "DISTRUST_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// See-saw lower bound and hierarchy upper bound for one scenario.
    Bound(commands::BoundArgs),
    /// Classical-measurement upper bounds over a distrust grid (CSV).
    Classical(commands::ClassicalArgs),
    /// Certified min-entropy over a distrust grid (CSV).
    Randomness(commands::RandomnessArgs),
    /// Compare see-saw values at D = n and D = 2n on random cases (CSV).
    DimensionStudy(commands::DimensionArgs),
    /// Certified detection efficiency from an observed value or a model.
    CertifyEta(commands::CertifyArgs),
    /// Closed-form two-state discrimination under distrust.
    Discriminate(commands::DiscriminateArgs),
}

fn print_json<T: serde::Serialize>(v: &T) {
    println!("{}", serde_json::to_string_pretty(v).expect("plain data serializes"));
}

/// Runs one parsed command, printing its report or CSV.
pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Bound(a) => {
            let r = commands::bound(a)?;
            if a.json {
                print_json(&r);
            } else {
                println!("lower {}", r.lower);
                println!("upper {}", r.upper);
                println!("gap {:e}", r.gap);
                println!("realization {}", r.realization.display());
                if r.seesaw_warning {
                    eprintln!("warning: some see-saw restarts hit solver failures");
                }
            }
        }
        Command::Classical(a) => {
            let rows = commands::classical(a)?;
            let (header, body) = commands::classical_csv(a, &rows);
            io::write_csv(a.out.as_deref(), &header, &body)?;
        }
        Command::Randomness(a) => {
            let rows = commands::randomness(a)?;
            io::write_csv(a.out.as_deref(), &commands::RANDOMNESS_HEADER, &commands::randomness_csv(&rows))?;
        }
        Command::DimensionStudy(a) => {
            let rows = commands::dimension_study(a)?;
            io::write_csv(a.out.as_deref(), &commands::DIMENSION_HEADER, &commands::dimension_csv(&rows))?;
        }
        Command::CertifyEta(a) => {
            let r = commands::certify_eta(a)?;
            if a.json {
                print_json(&r);
            } else {
                println!("{}", r.line());
            }
        }
        Command::Discriminate(a) => {
            let r = commands::discriminate(a)?;
            if a.json {
                print_json(&r);
            } else {
                println!("threshold {}", r.threshold);
                println!("optimal {}", r.optimal);
                if let (Some(s), Some(u)) = (r.seesaw, r.upper) {
                    println!("seesaw {s}");
                    println!("upper {u}");
                }
            }
        }
    }
    Ok(())
}
