//! Compact 3D-DCT appearance model and the particle-filter tracker built on
//! it.
//!
//! Frames of an object are stacked into a 3D signal. Its DCT concentrates the
//! energy in a low-frequency corner, so a candidate patch appended to a stack
//! of similar samples reconstructs well from that corner alone. The
//! reconstruction error, taken against positive and negative sample stacks,
//! gives the tracker its per-candidate confidence.

pub mod bench;
pub mod dct;
pub mod error;
pub mod frame;
pub mod incremental;
pub mod io;
pub mod likelihood;
pub mod metrics;
pub mod motion;
pub mod patch;
pub mod representation;
pub mod sampling;
pub mod synthetic;
pub mod tracker;

pub use dct::{dct1, dct2, dct3, idct1, idct2, idct3, make_basis, mode_product, CosineBasis, DctPath, Tensor3};
pub use error::{Error, Result};
pub use frame::{crop_resize, BoundingBox, Frame};
pub use incremental::DctCache;
pub use likelihood::{evaluate, LikelihoodParams};
pub use metrics::{EvalReport, GroundTruthRecord, TrackRecord};
pub use motion::{MotionParams, ObjectState, ParticleSet};
pub use patch::Patch;
pub use representation::{truncate, CompactCoeffs, TruncationSpec};
pub use sampling::SampleBuffer;
pub use tracker::{FrameResult, InferenceMode, TrackerConfig, TrackerSession};
