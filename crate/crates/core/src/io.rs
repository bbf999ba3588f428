//! File formats: image sequences, ground truth, configs and CSV outputs.
//!
//! Ground truth is one `frame cx cy w h` line per frame (whitespace
//! separated, `#` comments). Configs are flat `key = value` files. Tables
//! are CSV with a header row; floats are written with `{}` so they round-trip
//! exactly.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::metrics::{EvalReport, GroundTruthRecord, ReportRow, TrackRecord};
use crate::representation::TruncationSpec;
use crate::tracker::TrackerConfig;

const FRAME_EXTENSIONS: [&str; 4] = ["png", "pgm", "bmp", "ppm"];

/// An ordered list of frame files in a directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sequence {
    paths: Vec<PathBuf>,
}

impl Sequence {
    pub fn paths(&self) -> &[PathBuf] {
        &self.paths
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Decodes frames lazily, in file order.
    pub fn frames(&self) -> impl Iterator<Item = Result<Frame>> + '_ {
        self.paths.iter().map(load_frame)
    }
}

/// Image files in `dir` sorted by file name.
pub fn load_sequence(dir: impl AsRef<Path>) -> Result<Sequence> {
    let dir = dir.as_ref();
    let mut paths = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let is_frame = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| FRAME_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()));
        if is_frame && path.is_file() {
            paths.push(path);
        }
    }
    if paths.is_empty() {
        return Err(Error::EmptySequence(dir.to_path_buf()));
    }
    paths.sort();
    Ok(Sequence { paths })
}

pub fn load_frame(path: impl AsRef<Path>) -> Result<Frame> {
    let path = path.as_ref();
    let img = image::open(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })?;
    Frame::from_image(&img)
}

/// Writes an 8-bit binary PGM.
pub fn write_pgm(frame: &Frame, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let img = image::GrayImage::from_raw(frame.width() as u32, frame.height() as u32, frame.to_luma8())
        .expect("buffer size matches frame");
    img.save_with_format(path, image::ImageFormat::Pnm)
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Non-blank lines with comments stripped, paired with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn parse_field<T: FromStr>(path: &Path, line: usize, field: &str, what: &str) -> Result<T> {
    field
        .parse()
        .map_err(|_| parse_error(path, line, format!("bad {what} `{field}`")))
}

pub fn load_truth(path: impl AsRef<Path>) -> Result<Vec<GroundTruthRecord>> {
    let path = path.as_ref();
    parse_truth(path, &read_text(path)?)
}

fn parse_truth(path: &Path, text: &str) -> Result<Vec<GroundTruthRecord>> {
    content_lines(text)
        .map(|(n, line)| {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 5 {
                return Err(parse_error(path, n, format!("expected 5 fields, found {}", fields.len())));
            }
            let frame = parse_field(path, n, fields[0], "frame")?;
            let v: Vec<f64> = fields[1..]
                .iter()
                .map(|f| parse_field(path, n, f, "number"))
                .collect::<Result<_>>()?;
            GroundTruthRecord::new(frame, v[0], v[1], v[2], v[3]).map_err(|e| parse_error(path, n, e.to_string()))
        })
        .collect()
}

pub fn write_truth(records: &[GroundTruthRecord], path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::from("# frame cx cy w h\n");
    for r in records {
        out.push_str(&format!("{} {} {} {} {}\n", r.frame, r.cx, r.cy, r.w, r.h));
    }
    write_text(path.as_ref(), &out)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<TrackerConfig> {
    let path = path.as_ref();
    parse_config(path, &read_text(path)?)
}

/// Parses `key = value` lines over the defaults. Unknown keys are errors so
/// typos do not silently fall back to defaults.
pub fn parse_config(path: &Path, text: &str) -> Result<TrackerConfig> {
    let mut cfg = TrackerConfig::default();
    let mut trunc: [Option<usize>; 3] = [None; 3];
    for (n, line) in content_lines(text) {
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_error(path, n, "expected `key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        macro_rules! set {
            ($field:expr) => {
                $field = parse_field(path, n, value, key)?
            };
        }
        match key {
            "n1" => set!(cfg.patch_dims.0),
            "n2" => set!(cfg.patch_dims.1),
            "particles" => set!(cfg.motion.particles),
            "sigma_x" => set!(cfg.motion.sigma_x),
            "sigma_y" => set!(cfg.motion.sigma_y),
            "sigma_s" => set!(cfg.motion.sigma_s),
            "gamma_pos" => set!(cfg.likelihood.gamma_pos),
            "gamma_neg" => set!(cfg.likelihood.gamma_neg),
            "lambda" => set!(cfg.likelihood.lambda),
            "k" => set!(cfg.likelihood.k),
            "delta_u" => trunc[0] = Some(parse_field(path, n, value, key)?),
            "delta_v" => trunc[1] = Some(parse_field(path, n, value, key)?),
            "delta_w" => trunc[2] = Some(parse_field(path, n, value, key)?),
            "buffer_cap" => set!(cfg.buffer_cap),
            "positives_per_frame" => set!(cfg.positives_per_frame),
            "negatives_per_frame" => set!(cfg.negatives_per_frame),
            "negative_inner" => set!(cfg.negative_inner),
            "negative_outer" => set!(cfg.negative_outer),
            "init_positives" => set!(cfg.init_positives),
            "init_negatives" => set!(cfg.init_negatives),
            "init_jitter" => set!(cfg.init_jitter),
            "recovery_margin" => set!(cfg.recovery.margin),
            "recovery_growth" => set!(cfg.recovery.growth),
            "recovery_max_factor" => set!(cfg.recovery.max_factor),
            "recovery_smoothing" => set!(cfg.recovery.smoothing),
            "velocity_smoothing" => set!(cfg.recovery.velocity_smoothing),
            "seed" => set!(cfg.seed),
            "mode" => cfg.mode = value.parse().map_err(|e: Error| parse_error(path, n, e.to_string()))?,
            "window_stride" => set!(cfg.window.stride),
            "window_radius" => set!(cfg.window.radius),
            "window_scales" => {
                cfg.window.scales = value
                    .split(',')
                    .map(|s| parse_field(path, n, s.trim(), key))
                    .collect::<Result<_>>()?
            }
            other => return Err(parse_error(path, n, format!("unknown key `{other}`"))),
        }
    }
    let d = cfg.likelihood.trunc;
    cfg.likelihood.trunc = TruncationSpec::new(
        trunc[0].unwrap_or(d.delta_u),
        trunc[1].unwrap_or(d.delta_v),
        trunc[2].unwrap_or(d.delta_w),
    );
    cfg.validate().map_err(|e| parse_error(path, 0, e.to_string()))?;
    Ok(cfg)
}

fn csv_error(path: &Path, source: csv::Error) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn write_csv<R>(path: &Path, header: &[&str], rows: R) -> Result<()>
where
    R: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Data rows of a CSV file after checking its header.
fn read_csv(path: &Path, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let found = r.headers().map_err(|e| csv_error(path, e))?;
    if found.iter().ne(header.iter().copied()) {
        return Err(parse_error(path, 1, format!("expected header `{}`", header.join(","))));
    }
    r.records()
        .map(|rec| {
            let rec = rec.map_err(|e| csv_error(path, e))?;
            if rec.len() != header.len() {
                let line = rec.position().map_or(0, |p| p.line() as usize);
                return Err(parse_error(path, line, format!("expected {} fields", header.len())));
            }
            Ok(rec)
        })
        .collect()
}

fn record_line(rec: &csv::StringRecord) -> usize {
    rec.position().map_or(0, |p| p.line() as usize)
}

fn field<T: FromStr>(path: &Path, rec: &csv::StringRecord, i: usize, what: &str) -> Result<T> {
    parse_field(path, record_line(rec), &rec[i], what)
}

pub const TRACK_HEADER: [&str; 7] = ["frame", "cx", "cy", "w", "h", "score", "ms"];
pub const REPORT_HEADER: [&str; 5] = ["frame", "tle", "success", "score", "ms"];
pub const SUMMARY_HEADER: [&str; 4] = ["frames", "mean_tle", "std_tle", "tsr"];

pub fn write_track(records: &[TrackRecord], path: impl AsRef<Path>) -> Result<()> {
    let rows = records.iter().map(|r| {
        vec![
            r.frame.to_string(),
            r.cx.to_string(),
            r.cy.to_string(),
            r.w.to_string(),
            r.h.to_string(),
            r.score.to_string(),
            r.ms.to_string(),
        ]
    });
    write_csv(path.as_ref(), &TRACK_HEADER, rows)
}

pub fn read_track(path: impl AsRef<Path>) -> Result<Vec<TrackRecord>> {
    let path = path.as_ref();
    read_csv(path, &TRACK_HEADER)?
        .iter()
        .map(|rec| {
            Ok(TrackRecord {
                frame: field(path, rec, 0, "frame")?,
                cx: field(path, rec, 1, "cx")?,
                cy: field(path, rec, 2, "cy")?,
                w: field(path, rec, 3, "w")?,
                h: field(path, rec, 4, "h")?,
                score: field(path, rec, 5, "score")?,
                ms: field(path, rec, 6, "ms")?,
            })
        })
        .collect()
}

/// Per-frame report rows; `success` is written as 1 or 0.
pub fn write_report(report: &EvalReport, path: impl AsRef<Path>) -> Result<()> {
    let rows = report.rows.iter().map(|r| {
        vec![
            r.frame.to_string(),
            r.tle.to_string(),
            u8::from(r.success).to_string(),
            r.score.to_string(),
            r.ms.to_string(),
        ]
    });
    write_csv(path.as_ref(), &REPORT_HEADER, rows)
}

pub fn read_report(path: impl AsRef<Path>) -> Result<EvalReport> {
    let path = path.as_ref();
    let rows = read_csv(path, &REPORT_HEADER)?
        .iter()
        .map(|rec| {
            let success = match &rec[2] {
                "1" => true,
                "0" => false,
                other => return Err(parse_error(path, record_line(rec), format!("bad success flag `{other}`"))),
            };
            Ok(ReportRow {
                frame: field(path, rec, 0, "frame")?,
                tle: field(path, rec, 1, "tle")?,
                success,
                score: field(path, rec, 3, "score")?,
                ms: field(path, rec, 4, "ms")?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport::from_rows(rows))
}

pub fn write_summary(report: &EvalReport, path: impl AsRef<Path>) -> Result<()> {
    let row = vec![
        report.rows.len().to_string(),
        report.mean_tle.to_string(),
        report.std_tle.to_string(),
        report.tsr.to_string(),
    ];
    write_csv(path.as_ref(), &SUMMARY_HEADER, [row])
}

/// A matrix as headerless CSV, one row per line.
pub fn write_matrix(matrix: &Array2<f64>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    for row in matrix.rows() {
        w.write_record(row.iter().map(|v| v.to_string()))
            .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
