//! Timing of the incremental 3D-DCT update against a batch transform of the
//! same stack.

use std::path::Path;
use std::time::Instant;

use ndarray::{Array2, Array3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dct::{dct2, dct3, Tensor3};
use crate::error::{Error, Result};
use crate::incremental::DctCache;
use crate::patch::Patch;

/// Patch sizes used by default.
pub const DEFAULT_SIZES: [(usize, usize); 3] = [(30, 30), (60, 60), (90, 90)];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchRow {
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
    /// Median time to append one frame to a cache of `n3 - 1` frames and
    /// produce the 3D coefficients.
    pub incremental_ms: f64,
    /// Median time of a full 3D-DCT over `n3` frames.
    pub batch_ms: f64,
}

impl BenchRow {
    pub fn ratio(&self) -> f64 {
        self.batch_ms / self.incremental_ms
    }
}

/// Parses `start:stop:step` (inclusive stop) into the values it spans.
pub fn parse_range(spec: &str) -> Result<Vec<usize>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::invalid("range", format!("expected start:stop:step, got `{spec}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let nums: Vec<usize> = parts
        .iter()
        .map(|p| p.trim().parse().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if start == 0 || step == 0 || start > stop {
        return Err(Error::invalid("range", format!("need 0 < start <= stop and step > 0, got `{spec}`")));
    }
    Ok((start..=stop).step_by(step).collect())
}

/// Parses `30x30,60x60`.
pub fn parse_sizes(spec: &str) -> Result<Vec<(usize, usize)>> {
    spec.split(',')
        .map(|item| {
            let bad = || Error::invalid("sizes", format!("expected RxC, got `{item}`"));
            let (r, c) = item.trim().split_once('x').ok_or_else(bad)?;
            let dims = (r.parse().map_err(|_| bad())?, c.parse().map_err(|_| bad())?);
            if dims.0 == 0 || dims.1 == 0 {
                return Err(Error::ZeroDimension);
            }
            Ok(dims)
        })
        .collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn time_ms<T>(f: impl FnOnce() -> T) -> (f64, T) {
    let t = Instant::now();
    let out = f();
    (t.elapsed().as_secs_f64() * 1e3, out)
}

/// Times both paths for every size and depth. Inputs are random patches from
/// `seed`; each timing is the median of `reps` runs.
pub fn run(sizes: &[(usize, usize)], depths: &[usize], reps: usize, seed: u64) -> Result<Vec<BenchRow>> {
    if reps == 0 {
        return Err(Error::invalid("reps", "must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(sizes.len() * depths.len());
    for &(n1, n2) in sizes {
        for &n3 in depths {
            if n3 == 0 {
                return Err(Error::ZeroDimension);
            }
            let frames: Vec<Patch> = (0..n3)
                .map(|_| Patch::new(Array2::from_shape_fn((n1, n2), |_| rng.random::<f64>())))
                .collect::<Result<_>>()?;
            let stack = Tensor3::new(Array3::from_shape_fn((n1, n2, n3), |(r, c, k)| frames[k].as_array()[[r, c]]))?;
            let history = DctCache::from_slices(
                (n1, n2),
                frames[..n3 - 1].iter().map(|p| std::sync::Arc::new(dct2(p.view()))),
            )?;
            let last = &frames[n3 - 1];

            let mut inc = Vec::with_capacity(reps);
            let mut batch = Vec::with_capacity(reps);
            for _ in 0..reps {
                let (ms, coeffs) = time_ms(|| history.appended(last).and_then(|c| c.coefficients()));
                coeffs?;
                inc.push(ms);
                let (ms, out) = time_ms(|| dct3(&stack));
                std::hint::black_box(out);
                batch.push(ms);
            }
            rows.push(BenchRow {
                n1,
                n2,
                n3,
                incremental_ms: median(inc),
                batch_ms: median(batch),
            });
        }
    }
    Ok(rows)
}

pub const BENCH_HEADER: [&str; 6] = ["n1", "n2", "n3", "incremental_ms", "batch_ms", "ratio"];

pub fn write_csv(rows: &[BenchRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(BENCH_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.n1.to_string(),
            r.n2.to_string(),
            r.n3.to_string(),
            r.incremental_ms.to_string(),
            r.batch_ms.to_string(),
            r.ratio().to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("10:50:20").unwrap(), vec![10, 30, 50]);
        assert_eq!(parse_range("5:5:1").unwrap(), vec![5]);
        assert!(parse_range("0:5:1").is_err());
        assert!(parse_range("5:1:1").is_err());
        assert!(parse_range("1:5").is_err());
    }

    #[test]
    fn sizes() {
        assert_eq!(parse_sizes("30x30, 60x40").unwrap(), vec![(30, 30), (60, 40)]);
        assert!(parse_sizes("30").is_err());
        assert!(parse_sizes("0x3").is_err());
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn one_row_per_size_and_depth() {
        let rows = run(&[(4, 4), (6, 5)], &[1, 3, 5], 2, 1).unwrap();
        assert_eq!(rows.len(), 6);
        assert!(rows.iter().all(|r| r.incremental_ms >= 0.0 && r.batch_ms >= 0.0));
        assert_eq!((rows[3].n1, rows[3].n2, rows[3].n3), (6, 5, 1));
    }
}
