//! Centre-distance evaluation: tracking location error (TLE) and tracking
//! success rate (TSR).

use crate::error::{Error, Result};
use crate::motion::ObjectState;
use crate::tracker::FrameResult;

/// Success requires `TLE / max(W, H)` strictly below this.
pub const SUCCESS_RATIO: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTruthRecord {
    pub frame: usize,
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

impl GroundTruthRecord {
    pub fn new(frame: usize, cx: f64, cy: f64, w: f64, h: f64) -> Result<Self> {
        if !(w > 0.0 && h > 0.0) {
            return Err(Error::InvalidBox(format!("ground truth size {w}x{h} must be positive")));
        }
        Ok(GroundTruthRecord { frame, cx, cy, w, h })
    }
}

/// One tracked frame as stored on disk: estimated centre and box size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackRecord {
    pub frame: usize,
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
    pub score: f64,
    pub ms: f64,
}

impl From<&FrameResult> for TrackRecord {
    fn from(r: &FrameResult) -> Self {
        let (cx, cy) = r.bbox.center();
        TrackRecord {
            frame: r.frame,
            cx,
            cy,
            w: r.bbox.w,
            h: r.bbox.h,
            score: r.score,
            ms: r.millis,
        }
    }
}

/// Distance between the estimated and true centres, in pixels.
pub fn tle(estimate: &ObjectState, truth: &GroundTruthRecord) -> f64 {
    center_error(estimate.x, estimate.y, truth)
}

fn center_error(x: f64, y: f64, truth: &GroundTruthRecord) -> f64 {
    (x - truth.cx).hypot(y - truth.cy)
}

pub fn success(tle_value: f64, truth: &GroundTruthRecord) -> bool {
    tle_value / truth.w.max(truth.h) < SUCCESS_RATIO
}

/// Fraction of successful frames; zero for an empty run.
pub fn tsr(flags: &[bool]) -> f64 {
    if flags.is_empty() {
        return 0.0;
    }
    flags.iter().filter(|&&f| f).count() as f64 / flags.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportRow {
    pub frame: usize,
    pub tle: f64,
    pub success: bool,
    pub score: f64,
    pub ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub rows: Vec<ReportRow>,
    pub tsr: f64,
    pub mean_tle: f64,
    /// Population standard deviation.
    pub std_tle: f64,
}

impl EvalReport {
    pub fn from_rows(rows: Vec<ReportRow>) -> Self {
        let flags: Vec<bool> = rows.iter().map(|r| r.success).collect();
        let n = rows.len() as f64;
        let (mean_tle, std_tle) = if rows.is_empty() {
            (0.0, 0.0)
        } else {
            let mean = rows.iter().map(|r| r.tle).sum::<f64>() / n;
            let var = rows.iter().map(|r| (r.tle - mean).powi(2)).sum::<f64>() / n;
            (mean, var.sqrt())
        };
        EvalReport {
            tsr: tsr(&flags),
            rows,
            mean_tle,
            std_tle,
        }
    }

    /// Matches estimates to ground truth by frame number. Every estimated
    /// frame needs a ground-truth record.
    pub fn evaluate(estimates: &[TrackRecord], truth: &[GroundTruthRecord]) -> Result<Self> {
        let rows = estimates
            .iter()
            .map(|e| {
                let t = truth.iter().find(|t| t.frame == e.frame).ok_or_else(|| {
                    Error::invalid("ground truth", format!("no record for frame {}", e.frame))
                })?;
                let err = center_error(e.cx, e.cy, t);
                Ok(ReportRow {
                    frame: e.frame,
                    tle: err,
                    success: success(err, t),
                    score: e.score,
                    ms: e.ms,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(EvalReport::from_rows(rows))
    }

    pub fn tles(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.tle).collect()
    }
}
