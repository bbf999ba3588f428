use image::DynamicImage;
use ndarray::Array2;

use crate::error::{Error, Result};
use crate::motion::ObjectState;
use crate::patch::Patch;

/// A grayscale frame with intensities normalised to `[0, 1]`, indexed
/// `[[row, col]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame(Array2<f64>);

impl Frame {
    pub fn new(pixels: Array2<f64>) -> Result<Self> {
        if pixels.is_empty() {
            return Err(Error::ZeroDimension);
        }
        if let Some(v) = pixels.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(if v.is_finite() { Error::PixelRange(*v) } else { Error::NonFinite });
        }
        Ok(Frame(pixels.as_standard_layout().into_owned()))
    }

    pub fn from_luma8(width: usize, height: usize, data: &[u8]) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: vec![height, width],
                found: vec![data.len()],
            });
        }
        let pixels = Array2::from_shape_fn((height, width), |(r, c)| data[r * width + c] as f64 / 255.0);
        Frame::new(pixels)
    }

    /// Grayscale images are used as is; colour images are reduced with luma
    /// weights 0.299, 0.587, 0.114.
    pub fn from_image(img: &DynamicImage) -> Result<Self> {
        let (w, h) = (img.width() as usize, img.height() as usize);
        match img {
            DynamicImage::ImageLuma8(g) => Frame::from_luma8(w, h, g.as_raw()),
            DynamicImage::ImageLumaA8(_) => Frame::from_luma8(w, h, img.to_luma8().as_raw()),
            DynamicImage::ImageLuma16(_) | DynamicImage::ImageLumaA16(_) => {
                let g = img.to_luma16();
                Frame::new(Array2::from_shape_fn((h, w), |(r, c)| {
                    g.get_pixel(c as u32, r as u32)[0] as f64 / 65535.0
                }))
            }
            _ => {
                let rgb = img.to_rgb32f();
                Frame::new(Array2::from_shape_fn((h, w), |(r, c)| {
                    let p = rgb.get_pixel(c as u32, r as u32);
                    (0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64).clamp(0.0, 1.0)
                }))
            }
        }
    }

    /// Quantises back to 8-bit, row-major.
    pub fn to_luma8(&self) -> Vec<u8> {
        self.0.iter().map(|v| (v * 255.0).round() as u8).collect()
    }

    pub fn width(&self) -> usize {
        self.0.ncols()
    }

    pub fn height(&self) -> usize {
        self.0.nrows()
    }

    pub fn pixels(&self) -> &Array2<f64> {
        &self.0
    }

    fn at_clamped(&self, row: isize, col: isize) -> f64 {
        let r = row.clamp(0, self.height() as isize - 1) as usize;
        let c = col.clamp(0, self.width() as isize - 1) as usize;
        self.0[[r, c]]
    }

    /// Bilinear sample at continuous pixel coordinates (pixel centres at
    /// integers); reads beyond the border repeat the edge.
    pub fn sample(&self, x: f64, y: f64) -> f64 {
        let (x0, y0) = (x.floor(), y.floor());
        let (fx, fy) = (x - x0, y - y0);
        let (c, r) = (x0 as isize, y0 as isize);
        let top = (1.0 - fx) * self.at_clamped(r, c) + fx * self.at_clamped(r, c + 1);
        let bottom = (1.0 - fx) * self.at_clamped(r + 1, c) + fx * self.at_clamped(r + 1, c + 1);
        (1.0 - fy) * top + fy * bottom
    }
}

/// Axis-aligned box: top-left corner plus size, in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BoundingBox {
    pub fn center(&self) -> (f64, f64) {
        (self.x + 0.5 * self.w, self.y + 0.5 * self.h)
    }

    /// Box of `state`, given the unscaled box size.
    pub fn from_state(state: &ObjectState, base: (f64, f64)) -> Self {
        let (w, h) = (state.s * base.0, state.s * base.1);
        BoundingBox {
            x: state.x - 0.5 * w,
            y: state.y - 0.5 * h,
            w,
            h,
        }
    }
}

/// Resamples the box of `state` (unscaled size `base`) to a `dims` patch
/// with bilinear interpolation.
pub fn crop_resize(frame: &Frame, state: &ObjectState, base: (f64, f64), dims: (usize, usize)) -> Patch {
    let bb = BoundingBox::from_state(state, base);
    let (rows, cols) = dims;
    let step_x = bb.w / cols as f64;
    let step_y = bb.h / rows as f64;
    let pixels = Array2::from_shape_fn(dims, |(r, c)| {
        let sx = bb.x + (c as f64 + 0.5) * step_x - 0.5;
        let sy = bb.y + (r as f64 + 0.5) * step_y - 0.5;
        frame.sample(sx, sy).clamp(0.0, 1.0)
    });
    Patch::from_array_unchecked(pixels)
}
