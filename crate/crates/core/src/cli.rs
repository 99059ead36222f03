//! Command implementations behind the `ddpf` binary.
//!
//! Exit codes: 0 success, 1 I/O, 2 bad scenario or config, 3 tracker
//! initialization failure, 4 trajectory/truth frame mismatch.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::imaging::{draw_overlay, frame_file_name, read_frame, read_frame_sequence, write_ppm, Frame, Rect, Rgb};
use crate::metrics::{evaluate, EvalReport, DEFAULT_LOSS_RADIUS};
use crate::output::{events_json, read_trajectories_file, read_truth_file, trajectories_csv, truth_csv};
use crate::synth::{builtin_scenario, render, render_background, SceneSpec};
use crate::tracker::{background_for, run, TrackingResult};

pub const BACKGROUND_FILE: &str = "background.ppm";
pub const TRUTH_FILE: &str = "truth.csv";

#[derive(Debug, Parser)]
#[command(
    name = "ddpf",
    version,
    about = "Multi-target particle-filter tracking with deformation detection"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a builtin scenario or a JSON scene spec to PPM frames plus truth.csv.
    Synth {
        /// `[SCENARIO] OUTPUT`: builtin scenario name (omitted with --spec)
        /// followed by the output directory.
        #[arg(required = true, num_args = 1..=2, value_names = ["SCENARIO", "OUTPUT"])]
        args: Vec<PathBuf>,
        /// JSON scene description to render instead of a builtin scenario.
        #[arg(long)]
        spec: Option<PathBuf>,
    },
    /// Track targets through a numbered frame sequence.
    Track {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        opts: TrackOpts,
        /// Write overlay_<frame>.ppm with estimates and trails.
        #[arg(long)]
        overlay: bool,
    },
    /// Score a trajectories CSV against a truth CSV; prints a JSON report.
    Eval {
        trajectories: PathBuf,
        truth: PathBuf,
        #[arg(long, default_value_t = DEFAULT_LOSS_RADIUS)]
        loss_radius: f64,
    },
    /// Run with and without deformation detection and compare both against truth.
    Compare {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        opts: TrackOpts,
        #[arg(long, default_value_t = DEFAULT_LOSS_RADIUS)]
        loss_radius: f64,
    },
}

#[derive(Debug, Clone, Args)]
pub struct TrackOpts {
    /// JSON run configuration; missing keys take their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Background plate (defaults to <input>/background.ppm when present).
    #[arg(long)]
    pub background: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub expected_targets: Option<usize>,
    #[arg(long)]
    pub num_particles: Option<usize>,
    /// Disable deformation detection (static-model SIR).
    #[arg(long)]
    pub no_deformation: bool,
}

impl TrackOpts {
    /// Defaults, then the config file, then `DDPF_SEED`, then flags.
    pub fn effective_config(&self) -> Result<RunConfig> {
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        config.apply_env()?;
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(n) = self.expected_targets {
            config.expected_targets = Some(n);
        }
        if let Some(n) = self.num_particles {
            config.num_particles = n;
        }
        if self.no_deformation {
            config.deformation_enabled = false;
        }
        config.tracker_config()?;
        Ok(config)
    }
}

pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::UnknownScenario { .. } | Error::Config(_) => 2,
        Error::InitCount { .. } => 3,
        Error::FrameMismatch { .. } => 4,
        _ => 1,
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Errors go to standard error.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn execute(command: &Command) -> Result<()> {
    match command {
        Command::Synth { args, spec } => {
            let (scenario, output) = match args.as_slice() {
                [output] => (None, output),
                [scenario, output] => (Some(scenario.to_string_lossy()), output),
                _ => unreachable!("clap enforces one or two values"),
            };
            cmd_synth(scenario.as_deref(), spec.as_deref(), output)
        }
        Command::Track {
            input,
            output,
            opts,
            overlay,
        } => cmd_track(input, output, opts, *overlay),
        Command::Eval {
            trajectories,
            truth,
            loss_radius,
        } => {
            let report = cmd_eval(trajectories, truth, *loss_radius)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(())
        }
        Command::Compare {
            input,
            output,
            opts,
            loss_radius,
        } => {
            let table = cmd_compare(input, output, opts, *loss_radius)?;
            print!("{}", table.text);
            Ok(())
        }
    }
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Renders a scene into `output`: `frame_NNNNN.ppm`, `truth.csv`,
/// `background.ppm` and the rendered `scene.json`.
pub fn cmd_synth(scenario: Option<&str>, spec_file: Option<&Path>, output: &Path) -> Result<()> {
    let spec = match (scenario, spec_file) {
        (Some(_), Some(_)) => return Err(Error::Config("give either a scenario name or --spec, not both".into())),
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            serde_json::from_str::<SceneSpec>(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        }
        (Some(name), None) => builtin_scenario(name)?,
        (None, None) => return Err(Error::Config("give a scenario name or --spec".into())),
    };
    spec.validate()?;
    let (frames, truth) = render(&spec)?;
    create_dir(output)?;
    for (i, frame) in frames.iter().enumerate() {
        write_ppm(&output.join(frame_file_name(i)), frame)?;
    }
    write_ppm(&output.join(BACKGROUND_FILE), &render_background(&spec))?;
    write_file(&output.join(TRUTH_FILE), truth_csv(&truth))?;
    write_file(&output.join("scene.json"), serde_json::to_string_pretty(&spec)?)?;
    Ok(())
}

struct LoadedInput {
    frames: Vec<Frame>,
    plate: Option<Frame>,
}

fn load_input(input: &Path, opts: &TrackOpts) -> Result<LoadedInput> {
    if !input.is_dir() {
        return Err(Error::io(
            input,
            std::io::Error::new(std::io::ErrorKind::NotFound, "input directory not found"),
        ));
    }
    let frames = read_frame_sequence(input)?;
    if frames.is_empty() {
        return Err(Error::io(
            input,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no frame_<n>.ppm/pgm files"),
        ));
    }
    let plate_path = opts
        .background
        .clone()
        .or_else(|| Some(input.join(BACKGROUND_FILE)).filter(|p| p.is_file()));
    let plate = plate_path.map(|p| read_frame(&p)).transpose()?;
    Ok(LoadedInput { frames, plate })
}

fn track_frames(loaded: &LoadedInput, config: &RunConfig) -> Result<TrackingResult> {
    let tracker_config = config.tracker_config()?;
    let background = background_for(&loaded.frames, loaded.plate.as_ref(), &tracker_config.detection)?;
    run(&loaded.frames, background, &tracker_config)
}

const PALETTE: [Rgb; 6] = [
    [255, 255, 0],
    [0, 255, 255],
    [255, 0, 255],
    [255, 255, 255],
    [0, 255, 0],
    [255, 128, 0],
];

/// Frames annotated with each track's rectangle and trail so far.
pub fn overlays(frames: &[Frame], result: &TrackingResult) -> Vec<Frame> {
    frames
        .iter()
        .enumerate()
        .map(|(i, frame)| {
            let mut rects = Vec::new();
            let mut trails = Vec::new();
            for (k, track) in result.tracks.iter().enumerate() {
                let color = PALETTE[k % PALETTE.len()];
                if let Some(p) = track.points.get(i) {
                    rects.push((Rect::new(p.x, p.y, p.hx, p.hy), color));
                }
                let trail = track.points.iter().take(i + 1).map(|p| (p.x, p.y)).collect();
                trails.push((trail, color));
            }
            draw_overlay(frame, &rects, &trails)
        })
        .collect()
}

/// Tracks a frame directory and writes `trajectories.csv`, `events.json`,
/// `effective_config.json` and, with `overlay`, one overlay PPM per frame.
pub fn cmd_track(input: &Path, output: &Path, opts: &TrackOpts, overlay: bool) -> Result<()> {
    let config = opts.effective_config()?;
    let loaded = load_input(input, opts)?;
    let result = track_frames(&loaded, &config)?;
    let drawn = overlay.then(|| overlays(&loaded.frames, &result));

    create_dir(output)?;
    write_file(&output.join("trajectories.csv"), trajectories_csv(&result.tracks))?;
    write_file(&output.join("events.json"), events_json(&result.events))?;
    write_file(&output.join("effective_config.json"), config.to_json())?;
    for (i, frame) in drawn.iter().flatten().enumerate() {
        write_ppm(&output.join(format!("overlay_{i:05}.ppm")), frame)?;
    }
    Ok(())
}

pub fn cmd_eval(trajectories: &Path, truth: &Path, loss_radius: f64) -> Result<EvalReport> {
    if loss_radius.is_nan() || loss_radius <= 0.0 {
        return Err(Error::Config(format!(
            "loss radius must be positive, got {loss_radius}"
        )));
    }
    let tracks = read_trajectories_file(trajectories)?;
    let truth = read_truth_file(truth)?;
    evaluate(&tracks, &truth, loss_radius)
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonRow {
    pub method: &'static str,
    pub mean_rmse: f64,
    pub max_lost_fraction: f64,
    pub identity_swaps: usize,
    pub model_updates: usize,
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub rows: [ComparisonRow; 2],
    pub reports: [EvalReport; 2],
    pub csv: String,
    pub text: String,
}

/// Tracks the same input with deformation detection on and off (same seed),
/// scores both against `<input>/truth.csv` and writes `comparison.csv`,
/// `comparison.txt`, `comparison.json` and `effective_config.json`.
pub fn cmd_compare(input: &Path, output: &Path, opts: &TrackOpts, loss_radius: f64) -> Result<Comparison> {
    let config = opts.effective_config()?;
    let loaded = load_input(input, opts)?;
    let truth = read_truth_file(&input.join(TRUTH_FILE))?;

    let variants = [("ddpf", true), ("static_sir", false)];
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for (method, enabled) in variants {
        let run_config = RunConfig {
            deformation_enabled: enabled,
            ..config.clone()
        };
        let result = track_frames(&loaded, &run_config)?;
        let report = evaluate(&result.tracks, &truth, loss_radius)?;
        rows.push(ComparisonRow {
            method,
            mean_rmse: report.mean_rmse,
            max_lost_fraction: report.max_lost_fraction(),
            identity_swaps: report.identity_swaps,
            model_updates: result.events.model_updates.len(),
        });
        reports.push(report);
    }

    let mut csv = String::from("method,mean_rmse,max_lost_fraction,identity_swaps,model_updates\n");
    let mut text = format!(
        "{:<12} {:>10} {:>10} {:>8} {:>8}\n",
        "method", "rmse_px", "lost_frac", "swaps", "updates"
    );
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{:.6},{:.6},{},{}",
            r.method, r.mean_rmse, r.max_lost_fraction, r.identity_swaps, r.model_updates
        );
        let _ = writeln!(
            text,
            "{:<12} {:>10.3} {:>10.3} {:>8} {:>8}",
            r.method, r.mean_rmse, r.max_lost_fraction, r.identity_swaps, r.model_updates
        );
    }

    let rows: [ComparisonRow; 2] = rows.try_into().expect("two variants");
    let reports: [EvalReport; 2] = reports.try_into().expect("two variants");
    create_dir(output)?;
    write_file(&output.join("comparison.csv"), &csv)?;
    write_file(&output.join("comparison.txt"), &text)?;
    let json = serde_json::json!({
        "ddpf": &reports[0],
        "static_sir": &reports[1],
    });
    write_file(&output.join("comparison.json"), serde_json::to_string_pretty(&json)?)?;
    write_file(&output.join("effective_config.json"), config.to_json())?;
    Ok(Comparison {
        rows,
        reports,
        csv,
        text,
    })
}
