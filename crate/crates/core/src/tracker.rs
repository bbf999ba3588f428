//! The tracking loop: propose candidates, score them against the sample
//! buffers, take the MAP state, then harvest new samples around it.

use std::time::Instant;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frame::{crop_resize, BoundingBox, Frame};
use crate::likelihood::{evaluate_detailed, Evaluation, LikelihoodParams};
use crate::motion::{propagate, MotionParams, ObjectState, ParticleSet, StateBounds, MIN_BOX_SIDE};
use crate::patch::Patch;
use crate::sampling::{label_by_distance, nearest_indices, select_negatives, SampleBuffer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InferenceMode {
    #[default]
    Particle,
    SlidingWindow,
}

impl std::str::FromStr for InferenceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "particle" => Ok(InferenceMode::Particle),
            "sliding" | "sliding-window" | "sliding_window" => Ok(InferenceMode::SlidingWindow),
            other => Err(Error::invalid("mode", format!("unknown mode `{other}`"))),
        }
    }
}

/// Exhaustive-search settings for [`InferenceMode::SlidingWindow`].
#[derive(Debug, Clone, PartialEq)]
pub struct WindowParams {
    /// Grid spacing in pixels.
    pub stride: f64,
    /// Half-width of the square search area around the previous centre.
    pub radius: f64,
    /// Scale factors relative to the previous scale.
    pub scales: Vec<f64>,
}

impl Default for WindowParams {
    fn default() -> Self {
        WindowParams {
            stride: 2.0,
            radius: 12.0,
            scales: vec![0.95, 1.0, 1.05],
        }
    }
}

/// Occlusion handling. A frame is confident when its best score is no more
/// than `margin` below a reference level. The reference jumps up to any
/// higher confident score and otherwise follows confident scores slowly. Only
/// confident frames feed the sample buffers. While unconfident the search
/// centre coasts from the last confident estimate at the velocity seen over
/// confident frames, and the particle spread grows by `growth` per frame up
/// to `max_factor` times the base sigmas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryParams {
    pub margin: f64,
    pub growth: f64,
    pub max_factor: f64,
    /// Rate at which the reference follows lower confident scores.
    pub smoothing: f64,
    /// Weight of the newest displacement in the velocity estimate.
    pub velocity_smoothing: f64,
}

impl Default for RecoveryParams {
    fn default() -> Self {
        RecoveryParams {
            margin: 0.04,
            growth: 1.5,
            max_factor: 6.0,
            smoothing: 0.1,
            velocity_smoothing: 0.3,
        }
    }
}

impl RecoveryParams {
    /// Never flags a frame as lost and never widens the search.
    pub fn disabled() -> Self {
        RecoveryParams {
            margin: f64::INFINITY,
            growth: 1.0,
            max_factor: 1.0,
            smoothing: 0.1,
            velocity_smoothing: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.margin >= 0.0) {
            return Err(Error::invalid("recovery_margin", "must be non-negative"));
        }
        if !(self.growth >= 1.0 && self.max_factor >= 1.0 && self.max_factor.is_finite()) {
            return Err(Error::invalid("recovery_growth", "growth and max factor must be at least 1"));
        }
        if !(self.smoothing > 0.0 && self.smoothing <= 1.0) {
            return Err(Error::invalid("recovery_smoothing", "must be in (0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.velocity_smoothing) {
            return Err(Error::invalid("velocity_smoothing", "must be in [0, 1]"));
        }
        Ok(())
    }

    /// Sigma multiplier after `lost` consecutive unconfident frames.
    pub fn search_factor(&self, lost: usize) -> f64 {
        self.growth.powi(lost.min(64) as i32).min(self.max_factor)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackerConfig {
    /// Patch rows and columns.
    pub patch_dims: (usize, usize),
    pub likelihood: LikelihoodParams,
    pub motion: MotionParams,
    /// Maximum number of samples kept in each buffer.
    pub buffer_cap: usize,
    pub positives_per_frame: usize,
    pub negatives_per_frame: usize,
    /// Negative annulus radii as multiples of the larger box side.
    pub negative_inner: f64,
    pub negative_outer: f64,
    pub init_positives: usize,
    pub init_negatives: usize,
    /// Max offset in pixels of the jittered positives collected at start-up.
    pub init_jitter: f64,
    pub recovery: RecoveryParams,
    pub seed: u64,
    pub mode: InferenceMode,
    pub window: WindowParams,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            patch_dims: (30, 30),
            likelihood: LikelihoodParams::default(),
            motion: MotionParams::default(),
            buffer_cap: 500,
            positives_per_frame: 5,
            negatives_per_frame: 10,
            negative_inner: 1.0,
            negative_outer: 2.0,
            init_positives: 16,
            init_negatives: 20,
            init_jitter: 2.0,
            recovery: RecoveryParams::default(),
            seed: 0,
            mode: InferenceMode::Particle,
            window: WindowParams::default(),
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<()> {
        let (n1, n2) = self.patch_dims;
        if n1 == 0 || n2 == 0 {
            return Err(Error::ZeroDimension);
        }
        self.likelihood.validate()?;
        self.motion.validate()?;
        let t = self.likelihood.trunc;
        if t.delta_u >= n1 || t.delta_v >= n2 {
            return Err(Error::CutoffOutOfRange {
                axis: if t.delta_u >= n1 { 1 } else { 2 },
                cutoff: if t.delta_u >= n1 { t.delta_u } else { t.delta_v },
                dim: if t.delta_u >= n1 { n1 } else { n2 },
            });
        }
        if self.buffer_cap == 0 {
            return Err(Error::invalid("buffer_cap", "must be at least 1"));
        }
        if self.init_positives == 0 || self.init_negatives == 0 {
            return Err(Error::invalid("init_samples", "need at least one sample of each kind"));
        }
        if !(self.negative_inner > 0.0 && self.negative_inner < self.negative_outer) {
            return Err(Error::invalid("negative radii", "need 0 < inner < outer"));
        }
        self.recovery.validate()?;
        if !(self.init_jitter >= 0.0) {
            return Err(Error::invalid("init_jitter", "must be non-negative"));
        }
        if !(self.window.stride > 0.0 && self.window.radius >= 0.0) {
            return Err(Error::invalid("window", "stride must be positive and radius non-negative"));
        }
        if self.window.scales.is_empty() || self.window.scales.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::invalid("window_scales", "need positive scale factors"));
        }
        Ok(())
    }
}

/// Output of one tracking step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameResult {
    pub frame: usize,
    pub state: ObjectState,
    pub bbox: BoundingBox,
    pub score: f64,
    pub millis: f64,
    /// Number of candidates scored.
    pub evaluations: usize,
}

/// Confidence over a grid of box centres at a fixed scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceMap {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// `scores[[row, col]]` is the score of the box centred at `(xs[col], ys[row])`.
    pub scores: Array2<f64>,
}

impl ConfidenceMap {
    /// Scores rescaled to `[0, 1]`; a constant map becomes all zeros.
    pub fn normalized(&self) -> Array2<f64> {
        let lo = self.scores.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if hi > lo {
            self.scores.mapv(|v| (v - lo) / (hi - lo))
        } else {
            Array2::zeros(self.scores.dim())
        }
    }

    /// Centre with the highest score, first in row-major order on ties.
    pub fn peak(&self) -> (f64, f64) {
        let mut best = (0, 0);
        for ((r, c), v) in self.scores.indexed_iter() {
            if *v > self.scores[best] {
                best = (r, c);
            }
        }
        (self.xs[best.1], self.ys[best.0])
    }
}

/// Tracking state for one sequence.
#[derive(Debug, Clone)]
pub struct TrackerSession {
    config: TrackerConfig,
    bounds: StateBounds,
    base: (f64, f64),
    state: ObjectState,
    positives: SampleBuffer,
    negatives: SampleBuffer,
    rng: ChaCha8Rng,
    frame_index: usize,
    score_ref: Option<f64>,
    lost: usize,
    /// Estimate from the last confident frame.
    anchor: ObjectState,
    velocity: (f64, f64),
}

struct Scored {
    patch: Patch,
    eval: Evaluation,
}

impl TrackerSession {
    /// Starts tracking the object inside `bbox` on `first_frame`.
    pub fn init(first_frame: &Frame, bbox: BoundingBox, config: TrackerConfig) -> Result<Self> {
        config.validate()?;
        let (fw, fh) = (first_frame.width() as f64, first_frame.height() as f64);
        if !(bbox.w >= MIN_BOX_SIDE && bbox.h >= MIN_BOX_SIDE) {
            return Err(Error::InvalidBox(format!(
                "{}x{} is smaller than {MIN_BOX_SIDE}x{MIN_BOX_SIDE}",
                bbox.w, bbox.h
            )));
        }
        if !(bbox.x >= 0.0 && bbox.y >= 0.0 && bbox.x + bbox.w <= fw && bbox.y + bbox.h <= fh) {
            return Err(Error::InvalidBox(format!(
                "({}, {}, {}, {}) is not inside the {fw}x{fh} frame",
                bbox.x, bbox.y, bbox.w, bbox.h
            )));
        }
        let (cx, cy) = bbox.center();
        let state = ObjectState::new(cx, cy, 1.0)?;
        let bounds = StateBounds {
            frame_width: fw,
            frame_height: fh,
            box_width: bbox.w,
            box_height: bbox.h,
        };
        let mut session = TrackerSession {
            bounds,
            base: (bbox.w, bbox.h),
            state,
            positives: SampleBuffer::new(config.buffer_cap, config.patch_dims)?,
            negatives: SampleBuffer::new(config.buffer_cap, config.patch_dims)?,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            frame_index: 1,
            score_ref: None,
            lost: 0,
            anchor: state,
            velocity: (0.0, 0.0),
            config,
        };

        let mut seeds = vec![state];
        for _ in 1..session.config.init_positives {
            let j = session.config.init_jitter;
            let (dx, dy) = if j > 0.0 {
                (session.rng.random_range(-j..=j), session.rng.random_range(-j..=j))
            } else {
                (0.0, 0.0)
            };
            seeds.push(session.bounds.clamp(ObjectState {
                x: cx + dx,
                y: cy + dy,
                s: 1.0,
            }));
        }
        // The exact initial box is always the first positive.
        let mut pos_patches = vec![crop_resize(first_frame, &state, session.base, session.config.patch_dims)];
        pos_patches.extend(seeds[1..].iter().map(|s| session.crop(first_frame, s)));
        session.positives.push(pos_patches)?;

        let negatives = session.draw_negatives(session.config.init_negatives)?;
        let neg_patches: Vec<Patch> = negatives.iter().map(|s| session.crop(first_frame, s)).collect();
        session.negatives.push(neg_patches)?;
        Ok(session)
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.config
    }

    pub fn state(&self) -> ObjectState {
        self.state
    }

    pub fn base_size(&self) -> (f64, f64) {
        self.base
    }

    pub fn bounds(&self) -> &StateBounds {
        &self.bounds
    }

    pub fn positives(&self) -> &SampleBuffer {
        &self.positives
    }

    pub fn negatives(&self) -> &SampleBuffer {
        &self.negatives
    }

    /// Number of the last frame seen; the initial frame is 1.
    pub fn frame_number(&self) -> usize {
        self.frame_index
    }

    /// Consecutive unconfident frames up to now.
    pub fn lost_frames(&self) -> usize {
        self.lost
    }

    /// Where the next search is centred: the current estimate, or while lost
    /// the last confident estimate moved on at the tracked velocity.
    pub fn search_center(&self) -> ObjectState {
        if self.lost == 0 {
            return self.state;
        }
        let steps = (self.lost + 1) as f64;
        self.bounds.clamp(ObjectState {
            x: self.anchor.x + steps * self.velocity.0,
            y: self.anchor.y + steps * self.velocity.1,
            s: self.anchor.s,
        })
    }

    fn crop(&self, frame: &Frame, state: &ObjectState) -> Patch {
        crop_resize(frame, state, self.base, self.config.patch_dims)
    }

    fn draw_negatives(&mut self, count: usize) -> Result<Vec<ObjectState>> {
        let side = self.state.s * self.base.0.max(self.base.1);
        let drawn = select_negatives(
            &self.state,
            &mut self.rng,
            count,
            self.config.negative_inner * side,
            self.config.negative_outer * side,
        )?;
        Ok(drawn.into_iter().map(|s| self.bounds.clamp(s)).collect())
    }

    fn check_frame(&self, frame: &Frame) -> Result<()> {
        let dims = (frame.width() as f64, frame.height() as f64);
        if dims != (self.bounds.frame_width, self.bounds.frame_height) {
            return Err(Error::DimensionMismatch {
                expected: vec![self.bounds.frame_height as usize, self.bounds.frame_width as usize],
                found: vec![frame.height(), frame.width()],
            });
        }
        Ok(())
    }

    /// Scores every candidate against the current buffers. Candidates are
    /// independent, so they are evaluated in parallel; results keep input order.
    fn score(&self, frame: &Frame, candidates: &[ObjectState]) -> Result<Vec<Scored>> {
        candidates
            .par_iter()
            .map(|s| {
                let patch = self.crop(frame, s);
                let eval = evaluate_detailed(&patch, &self.positives, &self.negatives, &self.config.likelihood)?;
                Ok(Scored { patch, eval })
            })
            .collect()
    }

    /// Scores of `candidates` on `frame` without touching the session.
    pub fn score_candidates(&self, frame: &Frame, candidates: &[ObjectState]) -> Result<Vec<f64>> {
        self.check_frame(frame)?;
        Ok(self.score(frame, candidates)?.into_iter().map(|s| s.eval.score).collect())
    }

    /// One frame in the configured inference mode.
    pub fn step(&mut self, frame: &Frame) -> Result<FrameResult> {
        match self.config.mode {
            InferenceMode::Particle => self.step_particle(frame),
            InferenceMode::SlidingWindow => self.step_sliding_window(frame),
        }
    }

    /// One frame with candidates drawn from the Gaussian motion model.
    pub fn step_particle(&mut self, frame: &Frame) -> Result<FrameResult> {
        self.check_frame(frame)?;
        let started = Instant::now();
        let candidates = self.particle_candidates()?;
        self.finish_step(frame, candidates, started)
    }

    /// One frame with candidates on a regular grid around the previous state.
    pub fn step_sliding_window(&mut self, frame: &Frame) -> Result<FrameResult> {
        self.check_frame(frame)?;
        let started = Instant::now();
        let candidates = self.window_candidates();
        self.finish_step(frame, candidates, started)
    }

    /// Draws from the motion model around the search centre. While lost,
    /// the second half of the particles uses the widened spread.
    fn particle_candidates(&mut self) -> Result<Vec<ObjectState>> {
        let base = self.config.motion;
        let center = self.search_center();
        let factor = self.config.recovery.search_factor(self.lost);
        if factor == 1.0 || base.particles < 2 {
            return propagate(&center, &base, &self.bounds, &mut self.rng);
        }
        let local = MotionParams {
            particles: base.particles / 2,
            ..base
        };
        let wide = MotionParams {
            sigma_x: base.sigma_x * factor,
            sigma_y: base.sigma_y * factor,
            particles: base.particles - local.particles,
            ..base
        };
        let mut out = propagate(&center, &local, &self.bounds, &mut self.rng)?;
        out.extend(propagate(&center, &wide, &self.bounds, &mut self.rng)?);
        Ok(out)
    }

    /// Grid offsets are multiples of the stride within the radius, so the
    /// search centre is always on the grid.
    pub fn window_candidates(&self) -> Vec<ObjectState> {
        let w = &self.config.window;
        let center = self.search_center();
        let steps = (w.radius / w.stride).floor() as i64;
        let offsets: Vec<f64> = (-steps..=steps).map(|k| k as f64 * w.stride).collect();
        let mut out = Vec::with_capacity(offsets.len() * offsets.len() * w.scales.len());
        for &scale in &w.scales {
            for &dy in &offsets {
                for &dx in &offsets {
                    out.push(self.bounds.clamp(ObjectState {
                        x: center.x + dx,
                        y: center.y + dy,
                        s: center.s * scale,
                    }));
                }
            }
        }
        out
    }

    fn finish_step(&mut self, frame: &Frame, candidates: Vec<ObjectState>, started: Instant) -> Result<FrameResult> {
        let scored = self.score(frame, &candidates)?;
        let set = ParticleSet::new(candidates, scored.iter().map(|s| s.eval.score).collect())?;
        let best = set.best_index();
        let best_score = set.scores()[best];
        self.state = set.states()[best];

        let rec = self.config.recovery;
        let confident = self.score_ref.is_none_or(|m| best_score >= m - rec.margin);
        if confident {
            let steps = (self.lost + 1) as f64;
            let b = rec.velocity_smoothing;
            self.velocity.0 += b * ((self.state.x - self.anchor.x) / steps - self.velocity.0);
            self.velocity.1 += b * ((self.state.y - self.anchor.y) / steps - self.velocity.1);
            self.anchor = self.state;
            self.lost = 0;
            self.score_ref = Some(match self.score_ref {
                Some(m) if m < best_score => best_score,
                Some(m) => m + rec.smoothing * (best_score - m),
                None => best_score,
            });
            // Positives: the candidates nearest the new estimate, which
            // always includes the estimate itself.
            let labeled = label_by_distance(set.states(), &self.state);
            let mut slots: Vec<Option<Patch>> = scored.into_iter().map(|s| Some(s.patch)).collect();
            let new_positives: Vec<Patch> = nearest_indices(&labeled, self.config.positives_per_frame)
                .into_iter()
                .filter_map(|i| slots[i].take())
                .collect();
            let negatives = self.draw_negatives(self.config.negatives_per_frame)?;
            let new_negatives: Vec<Patch> = negatives.iter().map(|s| self.crop(frame, s)).collect();
            self.positives.push(new_positives)?;
            self.negatives.push(new_negatives)?;
        } else {
            self.lost += 1;
        }

        self.frame_index += 1;
        Ok(FrameResult {
            frame: self.frame_index,
            state: self.state,
            bbox: BoundingBox::from_state(&self.state, self.base),
            score: best_score,
            millis: started.elapsed().as_secs_f64() * 1e3,
            evaluations: set.len(),
        })
    }

    /// Scores boxes at the current scale centred on a `stride`-spaced grid
    /// covering every position where the box fits inside `frame`.
    pub fn confidence_map(&self, frame: &Frame, stride: usize) -> Result<ConfidenceMap> {
        self.check_frame(frame)?;
        if stride == 0 {
            return Err(Error::invalid("stride", "must be positive"));
        }
        let s = self.state.s;
        let (half_w, half_h) = (0.5 * s * self.base.0, 0.5 * s * self.base.1);
        let axis = |half: f64, extent: f64| -> Vec<f64> {
            let lo = (1.0 + half).ceil();
            let hi = extent - 1.0 - half;
            let mut v = Vec::new();
            let mut c = lo;
            while c <= hi {
                v.push(c);
                c += stride as f64;
            }
            if v.is_empty() {
                v.push(0.5 * extent);
            }
            v
        };
        let xs = axis(half_w, self.bounds.frame_width);
        let ys = axis(half_h, self.bounds.frame_height);
        let centres: Vec<ObjectState> = ys
            .iter()
            .flat_map(|&y| xs.iter().map(move |&x| ObjectState { x, y, s }))
            .collect();
        let scores = self.score_candidates(frame, &centres)?;
        let scores = Array2::from_shape_vec((ys.len(), xs.len()), scores).expect("grid shape");
        Ok(ConfidenceMap { xs, ys, scores })
    }
}
