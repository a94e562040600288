//! `radarkit` command-line front end.
//!
//! Exit status: 0 on success, 1 on a domain or I/O error, 2 on a usage
//! error.

mod commands;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "radarkit", version, about = "FMCW radar scene toolkit")]
pub struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a Range-Doppler sequence of one moving object.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Uniform false points added to each DoA frame.
        #[arg(long, default_value_t = 0)]
        clutter: usize,
    },
    /// Synthesize the IF frame of point reflectors and turn it into a RAD tensor.
    Process {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Aggregate a RAD tensor into an RD, RA or AD view.
    Aggregate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        view: String,
        #[arg(long, default_value = "mean")]
        method: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// CA-CFAR detection on a view.
    Cfar {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 2)]
        guard: usize,
        #[arg(long, default_value_t = 4)]
        train: usize,
        #[arg(long, default_value_t = 5.0)]
        scale: f64,
        #[arg(long)]
        out: PathBuf,
        /// RD view used to attach Doppler to RA detections.
        #[arg(long, requires = "points")]
        rd: Option<PathBuf>,
        /// Radar point cloud output for RA detections.
        #[arg(long, requires = "rd")]
        points: Option<PathBuf>,
    },
    /// Track a seeded object through DoA frames and emit view labels.
    Annotate {
        #[arg(long)]
        frames: PathBuf,
        /// `x,y,vr@frame`
        #[arg(long)]
        seed: String,
        /// `lo:hi:step`
        #[arg(long, default_value = "0.5:3:0.5")]
        sigmas: String,
        #[arg(long, default_value = "js")]
        method: String,
        #[arg(long, default_value_t = 1.0)]
        dense_radius: f64,
        /// circle | cross | closed | closed-eroded
        #[arg(long, default_value = "circle")]
        dense: String,
        /// rd | ra
        #[arg(long, default_value = "rd")]
        view: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Propagate radar Doppler and RCS onto a lidar cloud.
    Fuse {
        #[arg(long)]
        radar: PathBuf,
        #[arg(long)]
        lidar: PathBuf,
        /// Sensor modes JSON (default: the nuScenes long-range radar).
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score predicted label maps against ground truth.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        classes: usize,
        #[arg(long, default_value = "iou,dice,pp,pr,ap")]
        metrics: String,
        #[arg(long, default_value_t = 0.5)]
        iou_thr: f64,
        /// Class left out of the aggregated means.
        #[arg(long)]
        exclude_class: Option<u32>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-run the command recorded in a manifest and verify its outputs.
    Replay {
        manifest: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::new().filter_level(log::LevelFilter::Warn).init();
    let args: Vec<String> = std::env::args().collect();
    ExitCode::from(commands::dispatch(&args))
}
