//! Incremental 3D-DCT over a growing stack of frames.
//!
//! The cache keeps the per-frame 2D-DCT slices `D(:, :, k)`. Appending a frame
//! costs one 2D-DCT; slices already in the cache are never recomputed. The 3D
//! coefficients come from a single 1D-DCT pass along the stack.

use std::sync::Arc;

use ndarray::{s, Array2, Array3};

use crate::dct::{dct2, dct_lanes, DctPath, Tensor3};
use crate::error::{Error, Result};
use crate::patch::Patch;
use crate::representation::{CompactCoeffs, TruncationSpec};

/// Ordered stack of 2D-DCT coefficient slices. Slices are shared, so cloning
/// a cache or building one from buffered slices copies no coefficients.
#[derive(Debug, Clone)]
pub struct DctCache {
    dims: (usize, usize),
    slices: Vec<Arc<Array2<f64>>>,
}

impl DctCache {
    pub fn new(dims: (usize, usize)) -> Result<Self> {
        if dims.0 == 0 || dims.1 == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(DctCache {
            dims,
            slices: Vec::new(),
        })
    }

    /// Builds a cache from precomputed 2D-DCT slices.
    pub fn from_slices<I>(dims: (usize, usize), slices: I) -> Result<Self>
    where
        I: IntoIterator<Item = Arc<Array2<f64>>>,
    {
        let mut cache = DctCache::new(dims)?;
        for slice in slices {
            cache.push_slice(slice)?;
        }
        Ok(cache)
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }

    pub fn slice(&self, k: usize) -> &Arc<Array2<f64>> {
        &self.slices[k]
    }

    pub fn slices(&self) -> &[Arc<Array2<f64>>] {
        &self.slices
    }

    /// Appends a frame: its 2D-DCT becomes the new last slice.
    pub fn append(&mut self, patch: &Patch) -> Result<()> {
        patch.check_dims(self.dims)?;
        self.slices.push(Arc::new(dct2(patch.view())));
        Ok(())
    }

    /// Non-mutating form of [`append`](Self::append).
    pub fn appended(&self, patch: &Patch) -> Result<Self> {
        let mut next = self.clone();
        next.append(patch)?;
        Ok(next)
    }

    /// Appends an already transformed slice.
    pub fn push_slice(&mut self, slice: Arc<Array2<f64>>) -> Result<()> {
        if slice.dim() != self.dims {
            return Err(Error::DimensionMismatch {
                expected: vec![self.dims.0, self.dims.1],
                found: slice.shape().to_vec(),
            });
        }
        // The temporal pass reads slices as flat row-major buffers.
        let slice = if slice.is_standard_layout() {
            slice
        } else {
            Arc::new(slice.as_standard_layout().into_owned())
        };
        self.slices.push(slice);
        Ok(())
    }

    /// Keeps only the last `keep` slices, in order.
    pub fn evict_front(&mut self, keep: usize) {
        let keep = keep.max(1);
        if self.slices.len() > keep {
            self.slices.drain(..self.slices.len() - keep);
        }
    }

    pub fn evicted(&self, keep: usize) -> Self {
        let mut next = self.clone();
        next.evict_front(keep);
        next
    }

    /// Full 3D-DCT coefficients of the cached frame sequence.
    pub fn coefficients(&self) -> Result<Tensor3> {
        let block = self.temporal_transform(self.dims.0, self.dims.1)?;
        Ok(Tensor3::from_array_unchecked(block))
    }

    /// The compact coefficients for `spec`, transforming along time only the
    /// spatial block that survives truncation.
    pub fn compact(&self, spec: TruncationSpec) -> Result<CompactCoeffs> {
        let dims = (self.dims.0, self.dims.1, self.len());
        spec.validate(dims)?;
        let (a, b, c) = spec.kept_shape();
        let block = self.temporal_transform(a, b)?;
        let kept = block.slice(s![.., .., ..c]).to_owned();
        CompactCoeffs::new(spec, dims, kept)
    }

    /// Temporal DCT of the leading `rows x cols` block of every slice. Lanes
    /// are gathered a block at a time so both the slice reads and the output
    /// writes stay sequential.
    fn temporal_transform(&self, rows: usize, cols: usize) -> Result<Array3<f64>> {
        if self.slices.is_empty() {
            return Err(Error::EmptyCache);
        }
        let depth = self.slices.len();
        let stride = self.dims.1;
        let sources: Vec<&[f64]> = self
            .slices
            .iter()
            .map(|s| s.as_slice().expect("slices are kept in standard layout"))
            .collect();
        let mut out = Array3::zeros((rows, cols, depth));
        let flat = out.as_slice_mut().expect("fresh array is contiguous");
        let lanes_per_block = (LANE_BLOCK_VALUES / depth).max(1);
        for (b, block) in flat.chunks_mut(lanes_per_block * depth).enumerate() {
            let first = b * lanes_per_block;
            for (k, src) in sources.iter().enumerate() {
                for (j, lane) in block.chunks_exact_mut(depth).enumerate() {
                    let p = first + j;
                    lane[k] = src[(p / cols) * stride + p % cols];
                }
            }
            dct_lanes(block, depth, DctPath::Auto)?;
        }
        Ok(out)
    }
}

const LANE_BLOCK_VALUES: usize = 8192;
