use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dcttrack(args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_dcttrack")).args(args).output().unwrap();
    assert!(
        out.status.success(),
        "dcttrack {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn synth(dir: &Path, frames: &str) {
    dcttrack(&["synth", "--out", dir.to_str().unwrap(), "--frames", frames]);
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn synth_then_track_scores_full_success() {
    let tmp = tempfile::tempdir().unwrap();
    let seq = tmp.path().join("seq");
    synth(&seq, "50");
    assert_eq!(fs::read_dir(&seq).unwrap().count(), 51);

    let track = tmp.path().join("track.csv");
    let report = tmp.path().join("report.csv");
    let summary = tmp.path().join("summary.csv");
    dcttrack(&[
        "track", "--seq", p(&seq), "--init", "35,35,30,30", "--out", p(&track),
        "--truth", p(&seq.join("truth.txt")), "--report", p(&report), "--summary", p(&summary),
    ]);
    let lines: Vec<String> = fs::read_to_string(&summary).unwrap().lines().map(String::from).collect();
    assert_eq!(lines[0], "frames,mean_tle,std_tle,tsr");
    let fields: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(fields[0], "49");
    assert_eq!(fields[3].parse::<f64>().unwrap(), 1.0);

    // Scoring the stored track again gives the same report.
    let again = tmp.path().join("again.csv");
    dcttrack(&["eval", "--track", p(&track), "--truth", p(&seq.join("truth.txt")), "--out", p(&again)]);
    assert_eq!(fs::read(&report).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn same_seed_same_files() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    synth(&a, "8");
    synth(&b, "8");
    for entry in fs::read_dir(&a).unwrap() {
        let name = entry.unwrap().file_name();
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap());
    }

    let run = |out: &str, mode: &str| {
        let path = tmp.path().join(out);
        dcttrack(&["track", "--seq", p(&a), "--init", "35,35,30,30", "--seed", "3", "--mode", mode, "--out", p(&path)]);
        fs::read_to_string(path).unwrap()
    };
    let strip = |s: String| -> Vec<String> {
        // Drop the timing column.
        s.lines().map(|l| l.rsplit_once(',').unwrap().0.to_string()).collect()
    };
    assert_eq!(strip(run("t1.csv", "particle")), strip(run("t2.csv", "particle")));
    let sliding = strip(run("t3.csv", "sliding"));
    assert_eq!(sliding.len(), 8);
}

#[test]
fn confmap_writes_normalised_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let seq = tmp.path().join("seq");
    synth(&seq, "3");
    let out = tmp.path().join("map.csv");
    dcttrack(&["confmap", "--seq", p(&seq), "--init", "35,35,30,30", "--frame", "3", "--stride", "8", "--out", p(&out)]);
    let values: Vec<f64> = fs::read_to_string(&out)
        .unwrap()
        .lines()
        .flat_map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect::<Vec<_>>())
        .collect();
    assert!(!values.is_empty());
    assert!(values.iter().all(|v| (0.0..=1.0).contains(v)));
    assert!(values.contains(&1.0) && values.contains(&0.0));
}

#[test]
fn bench_writes_one_row_per_size_and_depth() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("bench.csv");
    dcttrack(&["bench", "--sizes", "8x8,12x10", "--n3", "4:12:4", "--reps", "2", "--out", p(&out)]);
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "n1,n2,n3,incremental_ms,batch_ms,ratio");
    assert_eq!(lines.count(), 6);
}

#[test]
fn bad_input_fails_cleanly() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |args: &[&str]| Command::new(env!("CARGO_BIN_EXE_dcttrack")).args(args).output().unwrap();
    let empty = run(&["track", "--seq", p(tmp.path()), "--init", "1,1,10,10", "--out", p(&tmp.path().join("t.csv"))]);
    assert!(!empty.status.success());
    assert!(String::from_utf8_lossy(&empty.stderr).contains("no image frames"));
    let bad_box = run(&["track", "--seq", p(tmp.path()), "--init", "1,1,10", "--out", "x.csv"]);
    assert!(!bad_box.status.success());
    assert!(!tmp.path().join("t.csv").exists());
}
