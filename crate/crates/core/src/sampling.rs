//! Training-sample selection and the capped sample buffers.

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::Array2;
use rand::Rng;

use crate::dct::dct2;
use crate::error::{Error, Result};
use crate::motion::ObjectState;
use crate::patch::Patch;

/// FIFO of patches capped at `cap`, each stored with its 2D-DCT.
#[derive(Debug, Clone)]
pub struct SampleBuffer {
    cap: usize,
    dims: (usize, usize),
    patches: VecDeque<Patch>,
    slices: VecDeque<Arc<Array2<f64>>>,
}

impl SampleBuffer {
    pub fn new(cap: usize, dims: (usize, usize)) -> Result<Self> {
        if cap == 0 {
            return Err(Error::invalid("buffer_cap", "must be at least 1"));
        }
        if dims.0 == 0 || dims.1 == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(SampleBuffer {
            cap,
            dims,
            patches: VecDeque::new(),
            slices: VecDeque::new(),
        })
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.patches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }

    pub fn patch(&self, i: usize) -> &Patch {
        &self.patches[i]
    }

    /// Cached 2D-DCT of patch `i`.
    pub fn slice(&self, i: usize) -> &Arc<Array2<f64>> {
        &self.slices[i]
    }

    pub fn patches(&self) -> impl ExactSizeIterator<Item = &Patch> {
        self.patches.iter()
    }

    /// Appends in order, then drops the oldest entries beyond the cap. Either
    /// every patch is accepted or, on a dimension mismatch, none is.
    pub fn push<I>(&mut self, new_patches: I) -> Result<()>
    where
        I: IntoIterator<Item = Patch>,
    {
        let incoming: Vec<Patch> = new_patches.into_iter().collect();
        for p in &incoming {
            p.check_dims(self.dims)?;
        }
        for p in incoming {
            self.slices.push_back(Arc::new(dct2(p.view())));
            self.patches.push_back(p);
        }
        while self.patches.len() > self.cap {
            self.patches.pop_front();
            self.slices.pop_front();
        }
        Ok(())
    }
}

/// A candidate state with its distance to the current object location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledState {
    pub state: ObjectState,
    pub distance: f64,
}

impl LabeledState {
    pub fn new(state: ObjectState, distance: f64) -> Result<Self> {
        if !(distance.is_finite() && distance >= 0.0) {
            return Err(Error::invalid("distance", format!("must be non-negative, got {distance}")));
        }
        Ok(LabeledState { state, distance })
    }
}

/// Labels each state with its centre distance to `center`.
pub fn label_by_distance(states: &[ObjectState], center: &ObjectState) -> Vec<LabeledState> {
    states
        .iter()
        .map(|s| LabeledState {
            state: *s,
            distance: s.distance_to(center),
        })
        .collect()
}

/// Indices of the `count` closest states, ascending by distance; equal
/// distances keep draw order.
pub fn nearest_indices(states: &[LabeledState], count: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..states.len()).collect();
    order.sort_by(|&a, &b| states[a].distance.total_cmp(&states[b].distance));
    order.truncate(count);
    order
}

/// The `count` states closest to the object location.
pub fn select_positives(states: &[LabeledState], count: usize) -> Vec<ObjectState> {
    nearest_indices(states, count)
        .into_iter()
        .map(|i| states[i].state)
        .collect()
}

/// `count` states drawn uniformly (by area) from the annulus
/// `inner <= r <= outer` around `center`, keeping its scale.
pub fn select_negatives<R: Rng + ?Sized>(
    center: &ObjectState,
    rng: &mut R,
    count: usize,
    inner_radius: f64,
    outer_radius: f64,
) -> Result<Vec<ObjectState>> {
    if !(inner_radius > 0.0 && inner_radius < outer_radius && outer_radius.is_finite()) {
        return Err(Error::invalid(
            "negative radii",
            format!("need 0 < inner < outer, got {inner_radius} and {outer_radius}"),
        ));
    }
    let (r2_lo, r2_hi) = (inner_radius * inner_radius, outer_radius * outer_radius);
    Ok((0..count)
        .map(|_| {
            let r = rng.random_range(r2_lo..=r2_hi).sqrt().clamp(inner_radius, outer_radius);
            let theta = rng.random_range(0.0..2.0 * PI);
            ObjectState {
                x: center.x + r * theta.cos(),
                y: center.y + r * theta.sin(),
                s: center.s,
            }
        })
        .collect())
}
