//! DCT-II / DCT-III through a single complex FFT of the same length.
//!
//! The input is reordered into its even samples followed by its odd samples
//! reversed; the transform of that sequence, rotated by a quarter-sample
//! twiddle, carries the cosine coefficients in its real part.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::basis::alpha;

// Lanes are transformed in blocks of about this many values so the complex
// work buffer stays cache resident.
const BLOCK_VALUES: usize = 8192;

pub(crate) struct FftKernel {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    // exp(-i pi u / 2n)
    twiddle: Vec<Complex<f64>>,
    scale: Vec<f64>,
}

impl FftKernel {
    pub(crate) fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let twiddle = (0..n)
            .map(|u| Complex::from_polar(1.0, -PI * u as f64 / (2 * n) as f64))
            .collect();
        FftKernel {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            twiddle,
            scale: (0..n).map(|u| alpha(u, n)).collect(),
        }
    }

    /// Forward orthonormal DCT of every length-`n` chunk of `lanes`, in place.
    pub(crate) fn forward(&self, lanes: &mut [f64]) {
        let n = self.n;
        debug_assert_eq!(lanes.len() % n, 0);
        let per_block = (BLOCK_VALUES / n).max(1) * n;
        let mut buf = vec![Complex::default(); per_block.min(lanes.len())];
        let mut scratch = vec![Complex::default(); self.forward.get_inplace_scratch_len()];
        for block in lanes.chunks_mut(per_block) {
            let buf = &mut buf[..block.len()];
            for (lane, out) in block.chunks_exact(n).zip(buf.chunks_exact_mut(n)) {
                for k in 0..n.div_ceil(2) {
                    out[k] = Complex::new(lane[2 * k], 0.0);
                }
                for k in 0..n / 2 {
                    out[n - 1 - k] = Complex::new(lane[2 * k + 1], 0.0);
                }
            }
            self.forward.process_with_scratch(buf, &mut scratch);
            for (lane, spec) in block.chunks_exact_mut(n).zip(buf.chunks_exact(n)) {
                for u in 0..n {
                    lane[u] = self.scale[u] * (self.twiddle[u] * spec[u]).re;
                }
            }
        }
    }

    /// Inverse orthonormal DCT of every length-`n` chunk of `lanes`, in place.
    pub(crate) fn inverse(&self, lanes: &mut [f64]) {
        let n = self.n;
        debug_assert_eq!(lanes.len() % n, 0);
        let per_block = (BLOCK_VALUES / n).max(1) * n;
        let mut buf = vec![Complex::default(); per_block.min(lanes.len())];
        let mut scratch = vec![Complex::default(); self.inverse.get_inplace_scratch_len()];
        let norm = 1.0 / n as f64;
        for block in lanes.chunks_mut(per_block) {
            let buf = &mut buf[..block.len()];
            for (lane, spec) in block.chunks_exact(n).zip(buf.chunks_exact_mut(n)) {
                // Undo the orthonormal scaling, then rebuild the half spectrum:
                // V[u] = exp(i pi u / 2n) (X[u] - i X[n - u]), with X[n] = 0.
                let raw = |u: usize| if u == n { 0.0 } else { lane[u] / self.scale[u] };
                for u in 0..n {
                    let z = Complex::new(raw(u), -raw(n - u));
                    spec[u] = self.twiddle[u].conj() * z;
                }
            }
            self.inverse.process_with_scratch(buf, &mut scratch);
            for (lane, v) in block.chunks_exact_mut(n).zip(buf.chunks_exact(n)) {
                for k in 0..n.div_ceil(2) {
                    lane[2 * k] = v[k].re * norm;
                }
                for k in 0..n / 2 {
                    lane[2 * k + 1] = v[n - 1 - k].re * norm;
                }
            }
        }
    }
}
