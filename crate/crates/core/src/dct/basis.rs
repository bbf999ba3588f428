use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

use ndarray::Array2;

use super::fast::FftKernel;
use crate::error::{Error, Result};

/// Lengths at or above this use the FFT kernel when the caller asks for
/// [`DctPath::Auto`](super::DctPath::Auto).
pub const FFT_MIN_LEN: usize = 24;

/// Normalisation factor of the orthonormal DCT-II for frequency `u` of an
/// `n`-point transform.
#[inline]
pub fn alpha(u: usize, n: usize) -> f64 {
    if u == 0 {
        (1.0 / n as f64).sqrt()
    } else {
        (2.0 / n as f64).sqrt()
    }
}

/// Orthonormal DCT-II basis matrix. Row `u` holds the `u`-th cosine basis
/// function sampled at `x = 0..n`, so `B * f` is the forward transform and
/// `B^T * c` the inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct CosineBasis {
    entries: Array2<f64>,
}

impl CosineBasis {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        let entries = Array2::from_shape_fn((n, n), |(u, x)| {
            alpha(u, n) * (PI * (2 * x + 1) as f64 * u as f64 / (2 * n) as f64).cos()
        });
        Ok(CosineBasis { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.nrows()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.entries
    }

    /// Largest absolute entry of `B^T B - I`.
    pub fn orthonormality_error(&self) -> f64 {
        let gram = self.entries.t().dot(&self.entries);
        gram.indexed_iter()
            .map(|((i, j), v)| (v - if i == j { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max)
    }
}

/// Builds a cosine basis matrix of size `n`.
pub fn make_basis(n: usize) -> Result<CosineBasis> {
    CosineBasis::new(n)
}

/// Everything needed to transform length-`n` lanes: the basis matrix for the
/// direct path and, for longer lanes, an FFT kernel.
pub struct DctPlan {
    basis: CosineBasis,
    fft: FftKernel,
}

impl DctPlan {
    fn new(n: usize) -> Result<Self> {
        Ok(DctPlan {
            basis: CosineBasis::new(n)?,
            fft: FftKernel::new(n),
        })
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn basis(&self) -> &CosineBasis {
        &self.basis
    }

    pub(crate) fn fft(&self) -> &FftKernel {
        &self.fft
    }

    /// Whether the automatic path would use the FFT for this length.
    pub fn prefers_fft(&self) -> bool {
        self.len() >= FFT_MIN_LEN
    }
}

impl std::fmt::Debug for DctPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DctPlan").field("n", &self.len()).finish()
    }
}

fn registry() -> &'static RwLock<HashMap<usize, Arc<DctPlan>>> {
    static REGISTRY: OnceLock<RwLock<HashMap<usize, Arc<DctPlan>>>> = OnceLock::new();
    REGISTRY.get_or_init(Default::default)
}

/// Returns the shared plan for length `n`, building it on first use.
pub fn plan(n: usize) -> Result<Arc<DctPlan>> {
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    if let Some(p) = registry().read().unwrap().get(&n) {
        return Ok(Arc::clone(p));
    }
    let built = Arc::new(DctPlan::new(n)?);
    let mut map = registry().write().unwrap();
    Ok(Arc::clone(map.entry(n).or_insert(built)))
}
