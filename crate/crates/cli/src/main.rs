//! `vantage`: evaluate, evolve, explore and render levels, and generate
//! islands, from the shell.

mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "vantage", version, about = "Search-based design of explorable 3D spaces")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Master seed for every random stream.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "vantage-out")]
    pub out: PathBuf,
    /// JSON file overriding the subcommand's defaults; unknown keys are errors.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Suppress the summary line.
    #[arg(long, global = true)]
    pub quiet: bool,
    /// Model library JSON for model-placement genomes (defaults to the
    /// built-in rocks and trees).
    #[arg(long, global = true)]
    pub models: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Walk a level once and score its visibility constraints.
    Evaluate { template: PathBuf, genome: Option<PathBuf> },
    /// Evolve a layout for a template.
    Evolve {
        template: PathBuf,
        /// Worker threads for population evaluation (0 = all cores).
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Run the curiosity-driven explorer over a level.
    Explore {
        template: PathBuf,
        genome: Option<PathBuf>,
        /// Write a belief frame every this many ticks (0 disables frames).
        #[arg(long, default_value_t = 10)]
        frame_every: usize,
    },
    /// Generate an island map.
    Island {
        /// Also simulate the companion dog while the player walks in straight
        /// lines from path stone to path stone, spawn to campsite.
        #[arg(long)]
        dog: bool,
    },
    /// Draw a level (optionally with a layout and a report) or an island.
    Render {
        /// Level template to draw.
        template: Option<PathBuf>,
        genome: Option<PathBuf>,
        /// Evaluation report whose met flags color the markers.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Island JSON to draw instead of a level.
        #[arg(long, conflicts_with_all = ["template", "genome", "report"])]
        island: Option<PathBuf>,
        /// Also write the occluders as a Wavefront OBJ file.
        #[arg(long)]
        obj: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(summary) => {
            if !cli.common.quiet {
                println!("{summary}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
