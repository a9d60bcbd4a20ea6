//! Command-line front end.
//!
//! Exit codes: 0 success, 2 success with at least one highly anomalous
//! frame, 1 on any error including invalid arguments.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::cluster::{ClusterConfig, DEFAULT_MAX_ITERATIONS, DEFAULT_RESTARTS, DEFAULT_SEED, DEFAULT_TOLERANCE};
use crate::detect::{DetectorConfig, DEFAULT_RESPONSE_THRESHOLD};
use crate::features::Channel;
use crate::ingest::{self, FrameRef};
use crate::pipeline::{self, OutputFormats, RunConfig, EXIT_ERROR, EXIT_OK};
use crate::{features, synth};

#[derive(Debug, Parser)]
#[command(name = "chromasift", version, about = "Color-feature anomaly screening for keyframe sequences")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analyze a frame sequence and write reports.
    Run(RunArgs),
    /// Write the five-frame synthetic reference scene as PNG files.
    Synth {
        #[arg(long)]
        out: PathBuf,
    },
    /// Print one frame's color features as JSON (debugging aid).
    Inspect {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = parse_dims, default_value = "256x256")]
        resize: (u32, u32),
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Directory, glob pattern or single image (PNG, JPEG, BMP).
    #[arg(long)]
    pub input: String,
    /// Keep every N-th frame [reference setting: 1, every extracted frame].
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub stride: u64,
    /// Working resolution WxH [reference setting: 256x256].
    #[arg(long, value_parser = parse_dims, default_value = "256x256")]
    pub resize: (u32, u32),
    /// Number of clusters [reference setting: K=3].
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
    pub k: u64,
    /// Seed for centroid initialization [reference setting: fixed seed].
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Lloyd iteration cap [reference setting: 300].
    #[arg(long = "max-iter", default_value_t = DEFAULT_MAX_ITERATIONS as u64, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_iter: u64,
    /// Stop when no centroid moves more than this.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE, value_parser = parse_non_negative)]
    pub tol: f64,
    /// Random initializations; the lowest objective wins.
    #[arg(long, default_value_t = DEFAULT_RESTARTS as u64, value_parser = clap::value_parser!(u64).range(1..))]
    pub restarts: u64,
    /// Peak excess over the leave-one-out baseline [reference setting: 0.25; 0.20 is the looser variant].
    #[arg(long, default_value_t = DEFAULT_RESPONSE_THRESHOLD, value_parser = parse_positive)]
    pub threshold: f64,
    /// Channels checked by the peak rule, e.g. R, RB, R,G,B [reference setting: R].
    #[arg(long = "rule-channels", default_value = "R", value_parser = parse_channels)]
    pub rule_channels: BTreeSet<Channel>,
    /// Output directory.
    #[arg(long, default_value = "chromasift-out")]
    pub out: PathBuf,
    /// Report formats to write, comma separated.
    #[arg(long, default_value = "json,csv", value_parser = parse_formats)]
    pub format: (bool, bool),
    /// Also render SVG charts.
    #[arg(long)]
    pub charts: bool,
}

fn parse_dims(s: &str) -> Result<(u32, u32), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WxH, got `{s}`"))?;
    let w: u32 = w.trim().parse().map_err(|_| format!("bad width in `{s}`"))?;
    let h: u32 = h.trim().parse().map_err(|_| format!("bad height in `{s}`"))?;
    if w == 0 || h == 0 {
        return Err(format!("dimensions must be at least 1x1, got `{s}`"));
    }
    Ok((w, h))
}

fn parse_non_negative(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("not a number: `{s}`"))?;
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("must be finite and non-negative, got {s}"))
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("not a number: `{s}`"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("must be finite and positive, got {s}"))
    }
}

pub fn parse_channels(s: &str) -> Result<BTreeSet<Channel>, String> {
    let set = s
        .chars()
        .filter(|c| !matches!(c, ',' | ' ' | '+'))
        .map(|c| c.to_string().parse::<Channel>())
        .collect::<Result<BTreeSet<_>, _>>()?;
    if set.is_empty() {
        return Err("at least one channel is required".into());
    }
    Ok(set)
}

fn parse_formats(s: &str) -> Result<(bool, bool), String> {
    let (mut json, mut csv) = (false, false);
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.to_ascii_lowercase().as_str() {
            "json" => json = true,
            "csv" => csv = true,
            other => return Err(format!("unknown format `{other}` (expected json, csv)")),
        }
    }
    Ok((json, csv))
}

impl RunArgs {
    pub fn into_config(self) -> RunConfig {
        RunConfig {
            input: self.input,
            stride: self.stride as usize,
            resize: self.resize,
            cluster: ClusterConfig {
                k: self.k as usize,
                seed: self.seed,
                max_iterations: self.max_iter as usize,
                convergence_tolerance: self.tol,
                restarts: self.restarts as usize,
            },
            detector: DetectorConfig {
                response_threshold: self.threshold,
                rule_channels: self.rule_channels,
            },
            out_dir: self.out,
            formats: OutputFormats { json: self.format.0, csv: self.format.1, charts: self.charts },
        }
    }
}

/// Parses `argv` (including the program name) into a run configuration.
/// Fails for other subcommands too.
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    match cli.command {
        Command::Run(args) => Ok(args.into_config()),
        _ => Err(clap::Error::raw(clap::error::ErrorKind::InvalidSubcommand, "expected `run`\n")),
    }
}

fn run_command(args: RunArgs) -> i32 {
    let config = args.into_config();
    match pipeline::run_pipeline(&config) {
        Ok(outcome) => {
            let mut out = std::io::stdout().lock();
            for v in &outcome.report.verdicts {
                let source = &outcome.report.frame_summaries[v.frame_index].source_id;
                let _ = writeln!(out, "{:>4}  {:<16} {}", v.frame_index, v.grade.to_string(), source);
            }
            for p in &outcome.written {
                let _ = writeln!(out, "wrote {}", p.display());
            }
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn synth_command(out: PathBuf) -> i32 {
    match synth::write_reference_sequence(&out) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

#[derive(serde::Serialize)]
struct InspectOutput<'a> {
    source_id: &'a str,
    width: u32,
    height: u32,
    mean: features::MeanVector,
    stats: std::collections::BTreeMap<Channel, features::HistogramStats>,
}

fn inspect_command(input: PathBuf, resize: (u32, u32)) -> i32 {
    let frame = FrameRef { index: 0, source_id: input.to_string_lossy().into_owned() };
    let result = ingest::load_and_resize(&frame, resize).map(|grid| {
        let f = features::extract_features(0, &grid);
        let out = InspectOutput {
            source_id: &frame.source_id,
            width: grid.width(),
            height: grid.height(),
            mean: f.mean,
            stats: Channel::ALL.iter().map(|&c| (c, *f.stats(c))).collect(),
        };
        serde_json::to_string_pretty(&out).expect("plain data serializes")
    });
    match result {
        Ok(text) => {
            println!("{text}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

/// Parses arguments, runs the chosen subcommand and returns the exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    match cli.command {
        Command::Run(args) => run_command(args),
        Command::Synth { out } => synth_command(out),
        Command::Inspect { input, resize } => inspect_command(input, resize),
    }
}
