use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

/// A normalised grayscale image region with every pixel in `[0, 1]`.
/// Rows run along the first axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch(Array2<f64>);

impl Patch {
    pub fn new(pixels: Array2<f64>) -> Result<Self> {
        if pixels.is_empty() {
            return Err(Error::ZeroDimension);
        }
        for &v in pixels.iter() {
            if !v.is_finite() {
                return Err(Error::NonFinite);
            }
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::PixelRange(v));
            }
        }
        Ok(Patch(pixels.as_standard_layout().into_owned()))
    }

    pub fn constant(dims: (usize, usize), value: f64) -> Result<Self> {
        Patch::new(Array2::from_elem(dims, value))
    }

    pub(crate) fn from_array_unchecked(pixels: Array2<f64>) -> Self {
        debug_assert!(pixels.iter().all(|v| (0.0..=1.0).contains(v)));
        Patch(pixels)
    }

    pub fn dims(&self) -> (usize, usize) {
        self.0.dim()
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn into_array(self) -> Array2<f64> {
        self.0
    }

    /// Sum of squared pixel differences.
    pub fn sq_distance(&self, other: &Patch) -> f64 {
        debug_assert_eq!(self.dims(), other.dims());
        match (self.0.as_slice(), other.0.as_slice()) {
            (Some(a), Some(b)) => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum(),
            _ => self
                .0
                .iter()
                .zip(other.0.iter())
                .map(|(x, y)| (x - y) * (x - y))
                .sum(),
        }
    }

    pub(crate) fn check_dims(&self, dims: (usize, usize)) -> Result<()> {
        if self.dims() != dims {
            return Err(Error::DimensionMismatch {
                expected: vec![dims.0, dims.1],
                found: vec![self.dims().0, self.dims().1],
            });
        }
        Ok(())
    }
}
