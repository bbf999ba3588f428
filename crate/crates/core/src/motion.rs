//! Gaussian state transition and MAP selection over a particle set.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

pub const MIN_SCALE: f64 = 0.05;
pub const MAX_SCALE: f64 = 20.0;
/// Boxes whose scaled width or height falls below this are redrawn.
pub const MIN_BOX_SIDE: f64 = 4.0;

/// Object state: box centre in pixels and scale relative to the initial box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectState {
    pub x: f64,
    pub y: f64,
    pub s: f64,
}

impl ObjectState {
    pub fn new(x: f64, y: f64, s: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && s.is_finite()) {
            return Err(Error::NonFinite);
        }
        if s <= 0.0 {
            return Err(Error::invalid("s", format!("scale must be positive, got {s}")));
        }
        Ok(ObjectState { x, y, s })
    }

    /// Euclidean distance between box centres.
    pub fn distance_to(&self, other: &ObjectState) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionParams {
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub sigma_s: f64,
    pub particles: usize,
}

impl Default for MotionParams {
    fn default() -> Self {
        MotionParams {
            sigma_x: 6.0,
            sigma_y: 6.0,
            sigma_s: 0.02,
            particles: 200,
        }
    }
}

impl MotionParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("sigma_x", self.sigma_x),
            ("sigma_y", self.sigma_y),
            ("sigma_s", self.sigma_s),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("must be positive, got {v}")));
            }
        }
        if self.particles == 0 {
            return Err(Error::invalid("particles", "need at least one particle"));
        }
        Ok(())
    }
}

/// Frame extent and unscaled box size; keeps states extractable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateBounds {
    pub frame_width: f64,
    pub frame_height: f64,
    pub box_width: f64,
    pub box_height: f64,
}

impl StateBounds {
    fn scale_range(&self) -> (f64, f64) {
        let lo = MIN_SCALE.max(MIN_BOX_SIDE / self.box_width.min(self.box_height));
        let fit = ((self.frame_width - 2.0) / self.box_width)
            .min((self.frame_height - 2.0) / self.box_height);
        let hi = MAX_SCALE.min(fit).max(lo);
        (lo, hi)
    }

    /// Limits scale to `[0.05, 20]` (and to what fits the frame) and moves the
    /// centre so the scaled box keeps one pixel of margin inside the frame.
    pub fn clamp(&self, state: ObjectState) -> ObjectState {
        let (lo, hi) = self.scale_range();
        let s = state.s.clamp(lo, hi);
        let half_w = 0.5 * s * self.box_width;
        let half_h = 0.5 * s * self.box_height;
        let x = clamp_centre(state.x, half_w, self.frame_width);
        let y = clamp_centre(state.y, half_h, self.frame_height);
        ObjectState { x, y, s }
    }

    /// Whether the box fits with the required margin and minimum size.
    pub fn contains(&self, state: &ObjectState) -> bool {
        let (w, h) = (state.s * self.box_width, state.s * self.box_height);
        let eps = 1e-9;
        state.s >= MIN_SCALE - eps
            && state.s <= MAX_SCALE + eps
            && w.min(h) >= MIN_BOX_SIDE - eps
            && state.x - 0.5 * w >= 1.0 - eps
            && state.x + 0.5 * w <= self.frame_width - 1.0 + eps
            && state.y - 0.5 * h >= 1.0 - eps
            && state.y + 0.5 * h <= self.frame_height - 1.0 + eps
    }
}

fn clamp_centre(c: f64, half: f64, extent: f64) -> f64 {
    let lo = 1.0 + half;
    let hi = extent - 1.0 - half;
    if lo > hi {
        0.5 * extent
    } else {
        c.clamp(lo, hi)
    }
}

/// Candidate states with their scores, in draw order.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSet {
    states: Vec<ObjectState>,
    scores: Vec<f64>,
}

impl ParticleSet {
    pub fn new(states: Vec<ObjectState>, scores: Vec<f64>) -> Result<Self> {
        if states.len() != scores.len() {
            return Err(Error::DimensionMismatch {
                expected: vec![states.len()],
                found: vec![scores.len()],
            });
        }
        if states.is_empty() {
            return Err(Error::invalid("particles", "empty particle set"));
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(ParticleSet { states, scores })
    }

    pub fn states(&self) -> &[ObjectState] {
        &self.states
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Index of the highest score; the lowest index wins ties.
    pub fn best_index(&self) -> usize {
        let mut best = 0;
        for (i, &s) in self.scores.iter().enumerate().skip(1) {
            if s > self.scores[best] {
                best = i;
            }
        }
        best
    }
}

/// Draws `params.particles` states from `N(prev, diag(sigma^2))`, redrawing
/// any whose box would collapse below [`MIN_BOX_SIDE`], then clamping into
/// `bounds`.
pub fn propagate<R: Rng + ?Sized>(
    prev: &ObjectState,
    params: &MotionParams,
    bounds: &StateBounds,
    rng: &mut R,
) -> Result<Vec<ObjectState>> {
    params.validate()?;
    let nx = Normal::new(prev.x, params.sigma_x).map_err(|e| Error::invalid("sigma_x", e.to_string()))?;
    let ny = Normal::new(prev.y, params.sigma_y).map_err(|e| Error::invalid("sigma_y", e.to_string()))?;
    let ns = Normal::new(prev.s, params.sigma_s).map_err(|e| Error::invalid("sigma_s", e.to_string()))?;
    let min_side = bounds.box_width.min(bounds.box_height);
    let mut out = Vec::with_capacity(params.particles);
    for _ in 0..params.particles {
        let mut draw = ObjectState {
            x: nx.sample(rng),
            y: ny.sample(rng),
            s: ns.sample(rng),
        };
        let mut attempts = 0;
        while draw.s * min_side < MIN_BOX_SIDE && attempts < 16 {
            draw.s = ns.sample(rng);
            attempts += 1;
        }
        out.push(bounds.clamp(draw));
    }
    Ok(out)
}

/// The highest-scoring state.
pub fn map_estimate(particles: &ParticleSet) -> ObjectState {
    particles.states[particles.best_index()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const BOUNDS: StateBounds = StateBounds {
        frame_width: 320.0,
        frame_height: 240.0,
        box_width: 30.0,
        box_height: 30.0,
    };

    fn st(x: f64, y: f64) -> ObjectState {
        ObjectState::new(x, y, 1.0).unwrap()
    }

    #[test]
    fn degenerate_sigmas_reproduce_previous_state() {
        let prev = ObjectState::new(100.0, 80.0, 1.1).unwrap();
        let params = MotionParams {
            sigma_x: 1e-9,
            sigma_y: 1e-9,
            sigma_s: 1e-9,
            particles: 50,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for p in propagate(&prev, &params, &BOUNDS, &mut rng).unwrap() {
            assert!(p.distance_to(&prev) < 1e-6);
            assert!((p.s - prev.s).abs() < 1e-6);
        }
    }

    #[test]
    fn empirical_std_matches_sigma() {
        let prev = ObjectState::new(1000.0, 1000.0, 1.0).unwrap();
        let params = MotionParams {
            sigma_x: 6.0,
            sigma_y: 4.0,
            sigma_s: 0.02,
            particles: 100_000,
        };
        let wide = StateBounds {
            frame_width: 2000.0,
            frame_height: 2000.0,
            ..BOUNDS
        };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let draws = propagate(&prev, &params, &wide, &mut rng).unwrap();
        let std = |f: &dyn Fn(&ObjectState) -> f64| {
            let n = draws.len() as f64;
            let m = draws.iter().map(f).sum::<f64>() / n;
            (draws.iter().map(|d| (f(d) - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        assert!((std(&|d| d.x) / 6.0 - 1.0).abs() < 0.02);
        assert!((std(&|d| d.y) / 4.0 - 1.0).abs() < 0.02);
        assert!((std(&|d| d.s) / 0.02 - 1.0).abs() < 0.02);
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let params = MotionParams::default();
        let a = propagate(&st(50.0, 50.0), &params, &BOUNDS, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = propagate(&st(50.0, 50.0), &params, &BOUNDS, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn map_picks_first_maximum() {
        let one = ParticleSet::new(vec![st(1.0, 2.0)], vec![0.3]).unwrap();
        assert_eq!(map_estimate(&one), st(1.0, 2.0));
        let set = ParticleSet::new(
            vec![st(0.0, 0.0), st(1.0, 0.0), st(2.0, 0.0)],
            vec![0.1, 0.9, 0.9],
        )
        .unwrap();
        assert_eq!(set.best_index(), 1);
    }

    #[test]
    fn map_invariant_under_monotone_transforms() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let states: Vec<_> = (0..40).map(|i| st(i as f64, 0.0)).collect();
        let scores: Vec<f64> = (0..40).map(|_| rng.random_range(0.0..1.0)).collect();
        let base = ParticleSet::new(states.clone(), scores.clone()).unwrap().best_index();
        let transforms: [fn(f64) -> f64; 3] = [|s| s.exp(), |s| 3.0 * s - 7.0, |s| 1.0 / (1.0 + (-s).exp())];
        for t in transforms {
            let moved: Vec<f64> = scores.iter().map(|&s| t(s)).collect();
            assert_eq!(ParticleSet::new(states.clone(), moved).unwrap().best_index(), base);
        }
    }

    #[test]
    fn rejects_invalid_params() {
        let mut p = MotionParams::default();
        p.sigma_x = 0.0;
        assert!(p.validate().is_err());
        p = MotionParams::default();
        p.particles = 0;
        assert!(p.validate().is_err());
        assert!(ObjectState::new(0.0, 0.0, 0.0).is_err());
        assert!(ParticleSet::new(vec![st(0.0, 0.0)], vec![f64::NAN]).is_err());
    }

    proptest! {
        #[test]
        fn emitted_states_stay_inside_frame(
            x in -200.0f64..600.0,
            y in -200.0f64..500.0,
            s in 0.01f64..30.0,
            seed in any::<u64>(),
        ) {
            let prev = ObjectState { x, y, s };
            let params = MotionParams { particles: 20, ..MotionParams::default() };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for p in propagate(&prev, &params, &BOUNDS, &mut rng).unwrap() {
                prop_assert!(BOUNDS.contains(&p), "{:?}", p);
                prop_assert!(p.s > 0.0);
            }
        }
    }
}
