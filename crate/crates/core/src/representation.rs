//! Compact representation: the low-frequency corner of a 3D coefficient
//! tensor, and reconstruction of the signal from that corner alone.

use ndarray::{s, Array2, Array3, ArrayView2, Axis};

use crate::dct::{idct3, plan, Tensor3};
use crate::error::{Error, Result};

/// Inclusive frequency cutoffs. The retained set is every `(u, v, w)` with
/// `u <= delta_u`, `v <= delta_v` and `w <= delta_w`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruncationSpec {
    pub delta_u: usize,
    pub delta_v: usize,
    pub delta_w: usize,
}

impl TruncationSpec {
    pub const fn new(delta_u: usize, delta_v: usize, delta_w: usize) -> Self {
        TruncationSpec {
            delta_u,
            delta_v,
            delta_w,
        }
    }

    /// Keeps every coefficient of a tensor with the given dimensions.
    pub fn lossless(dims: (usize, usize, usize)) -> Self {
        TruncationSpec::new(
            dims.0.saturating_sub(1),
            dims.1.saturating_sub(1),
            dims.2.saturating_sub(1),
        )
    }

    pub fn validate(&self, dims: (usize, usize, usize)) -> Result<()> {
        let cuts = [self.delta_u, self.delta_v, self.delta_w];
        let dims = [dims.0, dims.1, dims.2];
        for axis in 0..3 {
            if cuts[axis] >= dims[axis] {
                return Err(Error::CutoffOutOfRange {
                    axis: axis + 1,
                    cutoff: cuts[axis],
                    dim: dims[axis],
                });
            }
        }
        Ok(())
    }

    /// Same spec with the temporal cutoff limited to a stack of `depth` frames.
    pub fn with_depth(&self, depth: usize) -> Self {
        TruncationSpec {
            delta_w: self.delta_w.min(depth.saturating_sub(1)),
            ..*self
        }
    }

    pub fn kept_shape(&self) -> (usize, usize, usize) {
        (self.delta_u + 1, self.delta_v + 1, self.delta_w + 1)
    }

    pub fn keeps(&self, u: usize, v: usize, w: usize) -> bool {
        u <= self.delta_u && v <= self.delta_v && w <= self.delta_w
    }
}

/// The retained low-frequency block of a 3D-DCT coefficient tensor,
/// together with the dimensions of the tensor it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactCoeffs {
    spec: TruncationSpec,
    dims: (usize, usize, usize),
    kept: Array3<f64>,
}

impl CompactCoeffs {
    pub fn new(
        spec: TruncationSpec,
        dims: (usize, usize, usize),
        kept: Array3<f64>,
    ) -> Result<Self> {
        spec.validate(dims)?;
        let shape = spec.kept_shape();
        if kept.dim() != shape {
            return Err(Error::DimensionMismatch {
                expected: vec![shape.0, shape.1, shape.2],
                found: kept.shape().to_vec(),
            });
        }
        Ok(CompactCoeffs { spec, dims, kept })
    }

    pub fn spec(&self) -> TruncationSpec {
        self.spec
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn kept(&self) -> &Array3<f64> {
        &self.kept
    }

    pub fn scaled(&self, factor: f64) -> Self {
        CompactCoeffs {
            kept: &self.kept * factor,
            ..self.clone()
        }
    }

    pub fn sum(&self, other: &CompactCoeffs) -> Result<Self> {
        if self.spec != other.spec || self.dims != other.dims {
            return Err(Error::DimensionMismatch {
                expected: vec![self.dims.0, self.dims.1, self.dims.2],
                found: vec![other.dims.0, other.dims.1, other.dims.2],
            });
        }
        Ok(CompactCoeffs {
            kept: &self.kept + &other.kept,
            ..self.clone()
        })
    }

    /// Coefficients expanded to full size with zeros in the discarded region.
    pub fn padded(&self) -> Tensor3 {
        let mut full = Array3::zeros(self.dims);
        let (a, b, c) = self.spec.kept_shape();
        full.slice_mut(s![..a, ..b, ..c]).assign(&self.kept);
        Tensor3::from_array_unchecked(full)
    }

    /// The approximated signal of full dimensions.
    pub fn reconstruct(&self) -> Tensor3 {
        idct3(&self.padded())
    }

    /// Frame `z` of the reconstruction, computed from the kept block only.
    pub fn reconstruct_slice(&self, z: usize) -> Array2<f64> {
        let (n1, n2, n3) = self.dims;
        assert!(z < n3, "slice {z} out of range for depth {n3}");
        let (a, b, c) = self.spec.kept_shape();
        let temporal = plan(n3).expect("positive depth");
        let a3 = temporal.basis().matrix();
        // Inverse along time evaluated at z only.
        let mut block = Array2::<f64>::zeros((a, b));
        for w in 0..c {
            block.scaled_add(a3[[w, z]], &self.kept.index_axis(Axis(2), w));
        }
        let rows = plan(n1).expect("positive rows");
        let cols = plan(n2).expect("positive cols");
        let a1 = rows.basis().matrix().slice(s![..a, ..]);
        let a2 = cols.basis().matrix().slice(s![..b, ..]);
        a1.t().dot(&block).dot(&a2)
    }

    /// Frobenius norm of `tau` minus the last reconstructed frame.
    pub fn last_slice_error(&self, tau: ArrayView2<f64>) -> Result<f64> {
        let (n1, n2, n3) = self.dims;
        if tau.dim() != (n1, n2) {
            return Err(Error::DimensionMismatch {
                expected: vec![n1, n2],
                found: tau.shape().to_vec(),
            });
        }
        let recon = self.reconstruct_slice(n3 - 1);
        Ok(recon
            .iter()
            .zip(tau.iter())
            .map(|(r, t)| (t - r) * (t - r))
            .sum::<f64>()
            .sqrt())
    }
}

/// Keeps the low-frequency corner of `c`.
pub fn truncate(c: &Tensor3, spec: TruncationSpec) -> Result<CompactCoeffs> {
    spec.validate(c.dims())?;
    let (a, b, w) = spec.kept_shape();
    let kept = c.as_array().slice(s![..a, ..b, ..w]).to_owned();
    Ok(CompactCoeffs {
        spec,
        dims: c.dims(),
        kept,
    })
}

/// Energy of the coefficients of `c` that `spec` discards.
pub fn discarded_energy(c: &Tensor3, spec: TruncationSpec) -> f64 {
    c.as_array()
        .indexed_iter()
        .filter(|((u, v, w), _)| !spec.keeps(*u, *v, *w))
        .map(|(_, x)| x * x)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dct::{dct3, idct3, make_basis};
    use ndarray::Array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(seed: u64, dims: (usize, usize, usize)) -> Tensor3 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Tensor3::new(Array::from_shape_fn(dims, |_| rng.random_range(0.0..1.0))).unwrap()
    }

    #[test]
    fn lossless_truncation_reconstructs_exactly() {
        let t = random(1, (4, 5, 3));
        let c = dct3(&t);
        let cc = truncate(&c, TruncationSpec::lossless(c.dims())).unwrap();
        assert!(cc.reconstruct().max_abs_diff(&idct3(&c)) < 1e-9);
        assert!(cc.reconstruct().max_abs_diff(&t) < 1e-9);
    }

    #[test]
    fn constant_tensor_needs_only_dc() {
        let t = Tensor3::new(Array3::from_elem((4, 4, 3), 0.6)).unwrap();
        let cc = truncate(&dct3(&t), TruncationSpec::new(0, 0, 0)).unwrap();
        assert!(cc.reconstruct().max_abs_diff(&t) < 1e-9);
    }

    #[test]
    fn residual_equals_discarded_energy() {
        let t = random(2, (8, 8, 8));
        let c = dct3(&t);
        let spec = TruncationSpec::new(3, 3, 3);
        let cc = truncate(&c, spec).unwrap();
        let r = cc.reconstruct();
        let residual: f64 = r
            .as_array()
            .iter()
            .zip(t.as_array().iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!((residual - discarded_energy(&c, spec).sqrt()).abs() < 1e-8);
    }

    #[test]
    fn reconstruct_matches_zero_pad_oracle() {
        let t = random(3, (4, 4, 4));
        let c = dct3(&t);
        let spec = TruncationSpec::new(1, 2, 1);
        let cc = truncate(&c, spec).unwrap();
        // Zero the discarded entries directly and invert with explicit basis sums.
        let mut padded = c.as_array().clone();
        for ((u, v, w), x) in padded.indexed_iter_mut() {
            if !spec.keeps(u, v, w) {
                *x = 0.0;
            }
        }
        let b = make_basis(4).unwrap();
        let b = b.matrix();
        let out = cc.reconstruct();
        for x in 0..4 {
            for y in 0..4 {
                for z in 0..4 {
                    let mut acc = 0.0;
                    for ((u, v, w), coef) in padded.indexed_iter() {
                        acc += coef * b[[u, x]] * b[[v, y]] * b[[w, z]];
                    }
                    assert!((out.as_array()[[x, y, z]] - acc).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn zero_block_reconstructs_to_zero() {
        let c = dct3(&Tensor3::zeros((3, 3, 2)).unwrap());
        let cc = truncate(&c, TruncationSpec::new(1, 1, 0)).unwrap();
        assert!(cc.reconstruct().as_array().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn slice_reconstruction_matches_full() {
        let t = random(4, (6, 5, 7));
        let cc = truncate(&dct3(&t), TruncationSpec::new(2, 3, 4)).unwrap();
        let full = cc.reconstruct();
        for z in 0..7 {
            let s = cc.reconstruct_slice(z);
            let diff = s
                .iter()
                .zip(full.slice(z).iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(diff < 1e-12);
        }
    }

    #[test]
    fn last_slice_error_cases() {
        let t = random(5, (4, 4, 3));
        let c = dct3(&t);
        let lossless = truncate(&c, TruncationSpec::lossless(c.dims())).unwrap();
        assert!(lossless.last_slice_error(t.slice(2)).unwrap() < 1e-8);

        let cc = truncate(&c, TruncationSpec::new(1, 1, 1)).unwrap();
        let recon = cc.reconstruct();
        assert_eq!(cc.last_slice_error(cc.reconstruct_slice(2).view()).unwrap(), 0.0);
        let mut sq = 0.0;
        for x in 0..4 {
            for y in 0..4 {
                let d = t.as_array()[[x, y, 2]] - recon.as_array()[[x, y, 2]];
                sq += d * d;
            }
        }
        assert!((cc.last_slice_error(t.slice(2)).unwrap() - sq.sqrt()).abs() < 1e-10);

        assert!(matches!(
            cc.last_slice_error(Array2::zeros((3, 4)).view()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn cutoffs_are_validated() {
        let c = Tensor3::zeros((4, 4, 2)).unwrap();
        assert!(matches!(
            truncate(&c, TruncationSpec::new(1, 1, 2)),
            Err(Error::CutoffOutOfRange { axis: 3, .. })
        ));
        assert!(matches!(
            truncate(&c, TruncationSpec::new(4, 0, 0)),
            Err(Error::CutoffOutOfRange { axis: 1, .. })
        ));
        assert_eq!(TruncationSpec::new(9, 9, 15).with_depth(4).delta_w, 3);
    }
}
