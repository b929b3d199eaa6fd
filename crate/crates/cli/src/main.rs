//! `heroscan`: hero detection and recognition for gameplay frames.

mod commands;
mod config;
mod frames;
mod output;

use anyhow::Result;
use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "heroscan",
    version,
    about = "Detects heroes in gameplay frames via their blood bars and identifies them"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Detect blood bars in frame images and print them as JSON.
    Detect(commands::detect::DetectArgs),
    /// Detect heroes and classify who they are.
    Recognize(commands::recognize::RecognizeArgs),
    /// Summarize which heroes appear across a directory of video frames.
    VideoSummary(commands::video::VideoArgs),
    /// Draw camp-colored detection boxes onto a frame image.
    Overlay(commands::overlay::OverlayArgs),
    /// Measure detection quality and latency on a rendered corpus.
    Bench(commands::bench::BenchArgs),
    /// Render a synthetic corpus or video with ground truth.
    RenderCorpus(commands::corpus::CorpusArgs),
    /// Extract labeled training crops from footage of a known hero.
    ExtractSamples(commands::extract::ExtractArgs),
    /// Train the reference classifier from extracted samples.
    TrainReference(commands::train::TrainArgs),
}

fn main() -> Result<()> {
    env_logger::init();
    match Cli::parse().command {
        Command::Detect(args) => commands::detect::run(args),
        Command::Recognize(args) => commands::recognize::run(args),
        Command::VideoSummary(args) => commands::video::run(args),
        Command::Overlay(args) => commands::overlay::run(args),
        Command::Bench(args) => commands::bench::run(args),
        Command::RenderCorpus(args) => commands::corpus::run(args),
        Command::ExtractSamples(args) => commands::extract::run(args),
        Command::TrainReference(args) => commands::train::run(args),
    }
}
