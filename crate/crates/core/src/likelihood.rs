//! Candidate scoring against the positive and negative sample buffers.
//!
//! A candidate is appended to its K nearest buffered samples, the stack is
//! truncated to its low-frequency 3D-DCT corner, and the candidate's
//! reconstruction error becomes a Gaussian likelihood. The positive and
//! negative likelihoods are combined through a sigmoid.

use std::sync::Arc;

use ndarray::Array2;

use crate::dct::dct2;
use crate::error::{Error, Result};
use crate::incremental::DctCache;
use crate::patch::Patch;
use crate::representation::TruncationSpec;
use crate::sampling::SampleBuffer;

/// Keeps a 10x10 spatial block and the two lowest temporal frequencies.
pub const DEFAULT_TRUNCATION: TruncationSpec = TruncationSpec::new(9, 9, 1);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LikelihoodParams {
    pub gamma_pos: f64,
    pub gamma_neg: f64,
    pub lambda: f64,
    pub k: usize,
    pub trunc: TruncationSpec,
}

impl Default for LikelihoodParams {
    fn default() -> Self {
        LikelihoodParams {
            gamma_pos: 1.2,
            gamma_neg: 1.2,
            lambda: 0.1,
            k: 15,
            trunc: DEFAULT_TRUNCATION,
        }
    }
}

impl LikelihoodParams {
    pub fn validate(&self) -> Result<()> {
        for (name, g) in [("gamma_pos", self.gamma_pos), ("gamma_neg", self.gamma_neg)] {
            if !(g.is_finite() && g > 0.0) {
                return Err(Error::invalid(name, format!("must be positive, got {g}")));
            }
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::invalid("lambda", format!("must be non-negative, got {}", self.lambda)));
        }
        if self.k == 0 {
            return Err(Error::invalid("k", "need at least one neighbour"));
        }
        Ok(())
    }
}

/// Indices of the `k` buffered patches closest to `tau` in summed squared
/// pixel difference, nearest first; equal distances keep buffer order.
pub fn knn(buffer: &SampleBuffer, tau: &Patch, k: usize) -> Result<Vec<usize>> {
    if buffer.is_empty() {
        return Err(Error::EmptyBuffer);
    }
    tau.check_dims(buffer.dims())?;
    let mut ranked: Vec<(f64, usize)> = buffer
        .patches()
        .enumerate()
        .map(|(i, p)| (p.sq_distance(tau), i))
        .collect();
    let order = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    let k = k.min(ranked.len());
    if k == 0 {
        return Ok(Vec::new());
    }
    if k < ranked.len() {
        ranked.select_nth_unstable_by(k - 1, order);
        ranked.truncate(k);
    }
    ranked.sort_unstable_by(order);
    Ok(ranked.into_iter().map(|(_, i)| i).collect())
}

/// `exp(-e^2 / (2 gamma^2))` for reconstruction error `e`.
pub fn gaussian_likelihood(error: f64, gamma: f64) -> f64 {
    (-(error * error) / (2.0 * gamma * gamma)).exp()
}

/// Reconstruction error of `tau` as the last frame of `neighbors ++ [tau]`,
/// all given as 2D-DCT slices.
pub fn reconstruction_error_from_slices<I>(
    neighbor_slices: I,
    tau: &Patch,
    tau_slice: &Arc<Array2<f64>>,
    trunc: TruncationSpec,
) -> Result<f64>
where
    I: IntoIterator<Item = Arc<Array2<f64>>>,
{
    let mut cache = DctCache::from_slices(tau.dims(), neighbor_slices)?;
    if cache.is_empty() {
        return Err(Error::EmptyBuffer);
    }
    cache.push_slice(Arc::clone(tau_slice))?;
    let spec = trunc.with_depth(cache.len());
    cache.compact(spec)?.last_slice_error(tau.view())
}

/// Likelihood that `tau` belongs with `neighbors`, in `(0, 1]`.
pub fn reconstruction_likelihood(
    neighbors: &[Patch],
    tau: &Patch,
    gamma: f64,
    trunc: TruncationSpec,
) -> Result<f64> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::invalid("gamma", format!("must be positive, got {gamma}")));
    }
    for n in neighbors {
        n.check_dims(tau.dims())?;
    }
    let slices = neighbors.iter().map(|n| Arc::new(dct2(n.view())));
    let tau_slice = Arc::new(dct2(tau.view()));
    let e = reconstruction_error_from_slices(slices, tau, &tau_slice, trunc)?;
    Ok(gaussian_likelihood(e, gamma))
}

/// Logistic sigmoid, evaluated without overflow for any finite input.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `sigmoid(pos_like - lambda * neg_like)`.
pub fn discriminative_score(pos_like: f64, neg_like: f64, lambda: f64) -> f64 {
    sigmoid(pos_like - lambda * neg_like)
}

/// Both intermediate likelihoods and the final score for one candidate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub pos_likelihood: f64,
    pub neg_likelihood: f64,
    pub score: f64,
}

fn buffer_likelihood(
    buffer: &SampleBuffer,
    tau: &Patch,
    tau_slice: &Arc<Array2<f64>>,
    gamma: f64,
    params: &LikelihoodParams,
) -> Result<f64> {
    let neighbors = knn(buffer, tau, params.k)?;
    let slices = neighbors.iter().map(|&i| Arc::clone(buffer.slice(i)));
    let e = reconstruction_error_from_slices(slices, tau, tau_slice, params.trunc)?;
    Ok(gaussian_likelihood(e, gamma))
}

pub fn evaluate_detailed(
    tau: &Patch,
    pos: &SampleBuffer,
    neg: &SampleBuffer,
    params: &LikelihoodParams,
) -> Result<Evaluation> {
    params.validate()?;
    let tau_slice = Arc::new(dct2(tau.view()));
    let pos_likelihood = buffer_likelihood(pos, tau, &tau_slice, params.gamma_pos, params)?;
    let neg_likelihood = buffer_likelihood(neg, tau, &tau_slice, params.gamma_neg, params)?;
    Ok(Evaluation {
        pos_likelihood,
        neg_likelihood,
        score: discriminative_score(pos_likelihood, neg_likelihood, params.lambda),
    })
}

/// Final confidence that `tau` shows the object.
pub fn evaluate(
    tau: &Patch,
    pos: &SampleBuffer,
    neg: &SampleBuffer,
    params: &LikelihoodParams,
) -> Result<f64> {
    evaluate_detailed(tau, pos, neg, params).map(|e| e.score)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dct::{dct3, idct3, Tensor3};
    use crate::representation::truncate;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_patch(rng: &mut ChaCha8Rng, dims: (usize, usize)) -> Patch {
        Patch::new(Array2::from_shape_fn(dims, |_| rng.random_range(0.0..1.0))).unwrap()
    }

    fn buffer_of(patches: &[Patch]) -> SampleBuffer {
        let mut b = SampleBuffer::new(500, patches[0].dims()).unwrap();
        b.push(patches.iter().cloned()).unwrap();
        b
    }

    #[test]
    fn knn_finds_exact_match_first() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let patches: Vec<Patch> = (0..10).map(|_| random_patch(&mut rng, (4, 4))).collect();
        let buf = buffer_of(&patches);
        let nn = knn(&buf, &patches[6], 3).unwrap();
        assert_eq!(nn[0], 6);
        assert_eq!(nn.len(), 3);
        assert_eq!(knn(&buf, &patches[6], 50).unwrap().len(), 10);
    }

    #[test]
    fn knn_matches_exhaustive_sort() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let patches: Vec<Patch> = (0..40).map(|_| random_patch(&mut rng, (5, 5))).collect();
        let buf = buffer_of(&patches);
        let tau = random_patch(&mut rng, (5, 5));
        let mut oracle: Vec<(f64, usize)> = patches
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let d: f64 = p.as_array().iter().zip(tau.as_array()).map(|(a, b)| (a - b).powi(2)).sum();
                (d, i)
            })
            .collect();
        oracle.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        let expect: Vec<usize> = oracle.iter().map(|x| x.1).collect();
        assert_eq!(knn(&buf, &tau, 40).unwrap(), expect);
        assert_eq!(knn(&buf, &tau, 7).unwrap(), expect[..7].to_vec());
    }

    #[test]
    fn knn_tie_break_by_index() {
        let p = Patch::constant((2, 2), 0.5).unwrap();
        let buf = buffer_of(&[p.clone(), p.clone(), p.clone()]);
        assert_eq!(knn(&buf, &p, 3).unwrap(), vec![0, 1, 2]);
        let empty = SampleBuffer::new(3, (2, 2)).unwrap();
        assert!(matches!(knn(&empty, &p, 1), Err(Error::EmptyBuffer)));
    }

    #[test]
    fn lossless_reconstruction_gives_unit_likelihood() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let neighbors: Vec<Patch> = (0..3).map(|_| random_patch(&mut rng, (4, 4))).collect();
        let tau = random_patch(&mut rng, (4, 4));
        let l = reconstruction_likelihood(&neighbors, &tau, 1.2, TruncationSpec::new(3, 3, 3)).unwrap();
        assert!((l - 1.0).abs() < 1e-8);
        assert_eq!(gaussian_likelihood(0.0, 0.01), 1.0);
    }

    #[test]
    fn likelihood_matches_batch_pipeline() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let neighbors: Vec<Patch> = (0..3).map(|_| random_patch(&mut rng, (4, 4))).collect();
        let tau = random_patch(&mut rng, (4, 4));
        let spec = TruncationSpec::new(1, 1, 3);
        let stack = Tensor3::from_slices(neighbors.iter().chain([&tau]).map(|p| p.view())).unwrap();
        let cc = truncate(&dct3(&stack), spec).unwrap();
        let recon = idct3(&cc.padded());
        let e2: f64 = tau
            .as_array()
            .iter()
            .zip(recon.slice(3).iter())
            .map(|(a, b)| (a - b).powi(2))
            .sum();
        let expect = (-e2 / 2.88).exp();
        let got = reconstruction_likelihood(&neighbors, &tau, 1.2, spec).unwrap();
        assert!((got - expect).abs() < 1e-8);
    }

    #[test]
    fn sigmoid_cases() {
        assert_eq!(discriminative_score(0.2, 2.0, 0.1), 0.5);
        assert!((discriminative_score(1.0, 0.0, 0.1) - 0.73106).abs() < 1e-5);
        assert!(discriminative_score(0.9, 0.3, 0.1) > discriminative_score(0.1, 0.3, 0.1));
        assert!(discriminative_score(0.5, 0.9, 0.1) < discriminative_score(0.5, 0.1, 0.1));
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
    }

    #[test]
    fn identical_constant_buffers() {
        let p = Patch::constant((4, 4), 0.4).unwrap();
        let pos = buffer_of(&vec![p.clone(); 5]);
        let neg = buffer_of(&vec![p.clone(); 5]);
        let params = LikelihoodParams {
            k: 3,
            trunc: TruncationSpec::new(0, 0, 0),
            ..LikelihoodParams::default()
        };
        let s = evaluate(&p, &pos, &neg, &params).unwrap();
        assert!((s - sigmoid(1.0 - 0.1)).abs() < 1e-12);
    }

    #[test]
    fn swapping_buffers_with_unit_lambda_mirrors_score() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        let a: Vec<Patch> = (0..6).map(|_| random_patch(&mut rng, (4, 4))).collect();
        let b: Vec<Patch> = (0..6).map(|_| random_patch(&mut rng, (4, 4))).collect();
        let tau = random_patch(&mut rng, (4, 4));
        let params = LikelihoodParams {
            lambda: 1.0,
            k: 3,
            trunc: TruncationSpec::new(1, 1, 1),
            ..LikelihoodParams::default()
        };
        let s = evaluate(&tau, &buffer_of(&a), &buffer_of(&b), &params).unwrap();
        let t = evaluate(&tau, &buffer_of(&b), &buffer_of(&a), &params).unwrap();
        assert!((s + t - 1.0).abs() < 1e-10);
    }

    #[test]
    fn object_like_candidate_prefers_positives() {
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        let object = Patch::constant((6, 6), 0.8).unwrap();
        let pos = buffer_of(&vec![object.clone(); 8]);
        let noise: Vec<Patch> = (0..8).map(|_| random_patch(&mut rng, (6, 6))).collect();
        let neg = buffer_of(&noise);
        let params = LikelihoodParams {
            k: 4,
            trunc: TruncationSpec::new(2, 2, 1),
            ..LikelihoodParams::default()
        };
        let e = evaluate_detailed(&object, &pos, &neg, &params).unwrap();
        assert!(e.pos_likelihood >= e.neg_likelihood);
        assert!(e.score > 0.0 && e.score < 1.0);
    }

    #[test]
    fn rejects_bad_params() {
        let p = LikelihoodParams {
            gamma_pos: 0.0,
            ..LikelihoodParams::default()
        };
        assert!(p.validate().is_err());
        let p = LikelihoodParams {
            k: 0,
            ..LikelihoodParams::default()
        };
        assert!(p.validate().is_err());
    }
}
