use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use dcttrack::io;
use dcttrack::synthetic::{generate, SyntheticSpec};
use dcttrack::{bench, BoundingBox, EvalReport, Frame, InferenceMode, TrackRecord, TrackerConfig, TrackerSession};

#[derive(Parser)]
#[command(name = "dcttrack", version, about = "Incremental 3D-DCT object tracker")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Particle,
    Sliding,
}

impl From<Mode> for InferenceMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Particle => InferenceMode::Particle,
            Mode::Sliding => InferenceMode::SlidingWindow,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Track an object through a directory of frames.
    Track {
        /// Directory of PNG/PGM/BMP frames, processed in sorted order.
        #[arg(long)]
        seq: PathBuf,
        /// Box in the first frame as x,y,w,h (top-left corner and size).
        #[arg(long, value_parser = parse_box)]
        init: BoundingBox,
        /// Flat key = value file overriding the defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        /// Per-frame results CSV.
        #[arg(long)]
        out: PathBuf,
        /// Ground truth to score against; enables --report and --summary.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long, requires = "truth")]
        report: Option<PathBuf>,
        #[arg(long, requires = "truth")]
        summary: Option<PathBuf>,
    },
    /// Score a stored track against ground truth.
    Eval {
        #[arg(long)]
        track: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        /// Per-frame report CSV.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Write a synthetic moving-square sequence as PGM frames plus truth.txt.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        frames: usize,
        /// Hide the target behind a static band on frames 20 to 25.
        #[arg(long)]
        occlusion: bool,
        /// Brightness gain added per frame.
        #[arg(long, default_value_t = 0.0)]
        ramp: f64,
    },
    /// Dump the normalised score of every box centre on a grid as CSV.
    Confmap {
        #[arg(long)]
        seq: PathBuf,
        #[arg(long, value_parser = parse_box)]
        init: BoundingBox,
        #[arg(long)]
        config: Option<PathBuf>,
        /// 1-based frame to map; earlier frames are tracked first.
        #[arg(long, default_value_t = 2)]
        frame: usize,
        #[arg(long, default_value_t = 4)]
        stride: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Time incremental against batch 3D-DCT.
    Bench {
        #[arg(long, default_value = "30x30,60x60,90x90")]
        sizes: String,
        #[arg(long, default_value = "20:200:20")]
        n3: String,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_box(s: &str) -> std::result::Result<BoundingBox, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    match v[..] {
        [x, y, w, h] if w > 0.0 && h > 0.0 => Ok(BoundingBox { x, y, w, h }),
        [_, _, _, _] => Err("width and height must be positive".into()),
        _ => Err(format!("expected x,y,w,h, got `{s}`")),
    }
}

fn load_config(path: Option<&Path>) -> Result<TrackerConfig> {
    Ok(match path {
        Some(p) => io::load_config(p)?,
        None => TrackerConfig::default(),
    })
}

fn print_report(report: &EvalReport) {
    println!(
        "frames {}  mean TLE {:.2} px  std {:.2}  TSR {:.3}",
        report.rows.len(),
        report.mean_tle,
        report.std_tle,
        report.tsr
    );
}

fn open_frames(seq: &Path) -> Result<(io::Sequence, Frame)> {
    let sequence = io::load_sequence(seq)?;
    let first = io::load_frame(&sequence.paths()[0])?;
    Ok((sequence, first))
}

#[allow(clippy::too_many_arguments)]
fn track(
    seq: &Path,
    init: BoundingBox,
    config: Option<&Path>,
    seed: Option<u64>,
    mode: Option<Mode>,
    out: &Path,
    truth: Option<&Path>,
    report: Option<&Path>,
    summary: Option<&Path>,
) -> Result<()> {
    let mut cfg = load_config(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(m) = mode {
        cfg.mode = m.into();
    }
    let truth = truth.map(io::load_truth).transpose()?;
    let (sequence, first) = open_frames(seq)?;
    let mut session = TrackerSession::init(&first, init, cfg)?;
    let mut records = Vec::with_capacity(sequence.len().saturating_sub(1));
    for (i, frame) in sequence.frames().enumerate().skip(1) {
        let frame = frame?;
        let r = session
            .step(&frame)
            .with_context(|| format!("tracking {}", sequence.paths()[i].display()))?;
        records.push(TrackRecord::from(&r));
    }
    io::write_track(&records, out)?;
    let total_ms: f64 = records.iter().map(|r| r.ms).sum();
    println!(
        "tracked {} frames in {:.1} s ({:.0} ms/frame)",
        records.len(),
        total_ms / 1e3,
        total_ms / records.len().max(1) as f64
    );
    if let Some(truth) = truth {
        let rep = EvalReport::evaluate(&records, &truth)?;
        if let Some(p) = report {
            io::write_report(&rep, p)?;
        }
        if let Some(p) = summary {
            io::write_summary(&rep, p)?;
        }
        print_report(&rep);
    }
    Ok(())
}

fn confmap(seq: &Path, init: BoundingBox, config: Option<&Path>, frame: usize, stride: usize, out: &Path) -> Result<()> {
    ensure!(stride > 0, "stride must be positive");
    let cfg = load_config(config)?;
    let (sequence, first) = open_frames(seq)?;
    if frame < 2 || frame > sequence.len() {
        bail!("frame must be in 2..={}", sequence.len());
    }
    let mut session = TrackerSession::init(&first, init, cfg)?;
    let mut frames = sequence.frames().skip(1);
    for _ in 2..frame {
        session.step(&frames.next().expect("frame count checked")?)?;
    }
    let target = frames.next().expect("frame count checked")?;
    let map = session.confidence_map(&target, stride)?;
    io::write_matrix(&map.normalized(), out)?;
    let (px, py) = map.peak();
    println!("{}x{} grid, peak at ({px}, {py})", map.ys.len(), map.xs.len());
    Ok(())
}

fn synth(out: &Path, seed: u64, frames: usize, occlusion: bool, ramp: f64) -> Result<()> {
    let base = if occlusion { SyntheticSpec::occluded() } else { SyntheticSpec::default() };
    let spec = SyntheticSpec {
        seed,
        frames,
        illumination_ramp: ramp,
        ..base
    };
    let seq = generate(&spec)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    for (i, frame) in seq.frames.iter().enumerate() {
        io::write_pgm(frame, out.join(format!("frame_{:04}.pgm", i + 1)))?;
    }
    io::write_truth(&seq.truth, out.join("truth.txt"))?;
    let b = seq.initial_box();
    println!("wrote {} frames; initial box {},{},{},{}", seq.frames.len(), b.x, b.y, b.w, b.h);
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Track {
            seq,
            init,
            config,
            seed,
            mode,
            out,
            truth,
            report,
            summary,
        } => track(
            &seq,
            init,
            config.as_deref(),
            seed,
            mode,
            &out,
            truth.as_deref(),
            report.as_deref(),
            summary.as_deref(),
        ),
        Command::Eval {
            track,
            truth,
            out,
            summary,
        } => {
            let records = io::read_track(&track)?;
            let rep = EvalReport::evaluate(&records, &io::load_truth(&truth)?)?;
            io::write_report(&rep, &out)?;
            if let Some(p) = summary {
                io::write_summary(&rep, p)?;
            }
            print_report(&rep);
            Ok(())
        }
        Command::Synth {
            out,
            seed,
            frames,
            occlusion,
            ramp,
        } => synth(&out, seed, frames, occlusion, ramp),
        Command::Confmap {
            seq,
            init,
            config,
            frame,
            stride,
            out,
        } => confmap(&seq, init, config.as_deref(), frame, stride, &out),
        Command::Bench {
            sizes,
            n3,
            reps,
            seed,
            out,
        } => {
            let rows = bench::run(&bench::parse_sizes(&sizes)?, &bench::parse_range(&n3)?, reps, seed)?;
            bench::write_csv(&rows, &out)?;
            for r in &rows {
                println!(
                    "{}x{} n3={:<4} incremental {:8.3} ms  batch {:8.3} ms  ratio {:.2}",
                    r.n1,
                    r.n2,
                    r.n3,
                    r.incremental_ms,
                    r.batch_ms,
                    r.ratio()
                );
            }
            Ok(())
        }
    }
}
