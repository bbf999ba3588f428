//! Tracks the built-in synthetic square and prints per-frame error.

use dcttrack::synthetic::{generate, SyntheticSpec};
use dcttrack::{EvalReport, TrackRecord, TrackerConfig, TrackerSession};

fn main() -> dcttrack::Result<()> {
    let seq = generate(&SyntheticSpec::occluded())?;
    let mut session = TrackerSession::init(&seq.frames[0], seq.initial_box(), TrackerConfig::default())?;
    let mut records = Vec::new();
    for frame in &seq.frames[1..] {
        let r = session.step(frame)?;
        records.push(TrackRecord::from(&r));
    }
    let report = EvalReport::evaluate(&records, &seq.truth)?;
    for row in &report.rows {
        println!("frame {:3}  tle {:6.2}  score {:.3}  {}", row.frame, row.tle, row.score, if row.success { "ok" } else { "miss" });
    }
    println!("TSR {:.3}, mean TLE {:.2} px", report.tsr, report.mean_tle);
    Ok(())
}
