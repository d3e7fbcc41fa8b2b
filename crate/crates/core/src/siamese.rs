//! Contrastive loss, training-pair construction (including the
//! multi-scale smoothing ladder), and the Siamese training loop.
//!
//! Both arms share one parameter store: each pair is evaluated twice with
//! the same model and the two arms' gradients are summed before the
//! optimizer step, which is exactly weight sharing.

use crate::curve::{EuclideanTransform, PlanarCurve};
use crate::error::{Error, Result};
use crate::invariants::Signature;
use crate::net::{
    adagrad_step, axpy_params, backward, forward_with_cache, Architecture, Model, OptimizerState,
};
use crate::numfmt::g17;
use crate::scalar::Real;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::path::Path;

/// Pair polarity: positive pairs show the same shape in two poses,
/// negative pairs show shapes the signature must separate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairLabel {
    Negative,
    Positive,
}

impl PairLabel {
    /// λ as it appears in the loss.
    pub fn lambda<T: Real>(self) -> T {
        match self {
            PairLabel::Negative => T::zero(),
            PairLabel::Positive => T::one(),
        }
    }
}

/// One training example: two normalized curves and the label.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingPair<T> {
    pub curve_a: PlanarCurve<T>,
    pub curve_b: PlanarCurve<T>,
    pub label: PairLabel,
    pub scale_index: u32,
}

/// Training hyperparameters; the defaults are the published values
/// (margin 1, learning rate 5e-4, batch size 10).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparameters<T> {
    pub margin: T,
    pub learning_rate: T,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl<T: Real> Default for Hyperparameters<T> {
    fn default() -> Self {
        Self {
            margin: T::one(),
            learning_rate: T::of(5e-4),
            batch_size: 10,
            epochs: 10,
            seed: 0,
        }
    }
}

impl<T: Real> Hyperparameters<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.margin > T::zero()) || !(self.learning_rate > T::zero()) {
            return Err(Error::InvalidArgument(
                "margin and learning rate must be > 0".into(),
            ));
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(Error::InvalidArgument(
                "batch size and epoch count must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// How pairs are built: resample target, the smoothing-span ladder for
/// the five abstraction scales, and the probability that a negative pair
/// uses a different shape instead of a smoothed self.
#[derive(Debug, Clone, PartialEq)]
pub struct PairConfig {
    pub points: usize,
    pub spans: [f64; 5],
    pub cross_negative_prob: f64,
}

impl Default for PairConfig {
    fn default() -> Self {
        Self {
            points: 500,
            spans: [0.05, 0.10, 0.20, 0.35, 0.50],
            cross_negative_prob: 0.2,
        }
    }
}

impl PairConfig {
    pub fn validate(&self) -> Result<()> {
        if self.points < 3 {
            return Err(Error::InvalidArgument(format!(
                "pair resample target must be at least 3, got {}",
                self.points
            )));
        }
        if !(0.0..=1.0).contains(&self.cross_negative_prob) {
            return Err(Error::InvalidArgument(format!(
                "cross-negative probability must be in [0, 1], got {}",
                self.cross_negative_prob
            )));
        }
        for w in self.spans.windows(2) {
            if !(w[0] > 0.0 && w[1] < 1.0 && w[0] < w[1]) {
                return Err(Error::InvalidArgument(format!(
                    "smoothing spans must be ascending within (0, 1): {:?}",
                    self.spans
                )));
            }
        }
        Ok(())
    }

    pub fn span(&self, scale_index: u32) -> Result<f64> {
        if !(1..=5).contains(&scale_index) {
            return Err(Error::InvalidArgument(format!(
                "scale index must be in 1..=5, got {scale_index}"
            )));
        }
        Ok(self.spans[(scale_index - 1) as usize])
    }
}

/// RMS distance between two aligned signatures:
/// `sqrt(Σ_i (a_i - b_i)² / N)`. The per-point averaging keeps the margin
/// comparable across curve lengths.
pub fn signature_rms_distance<T: Real>(a: &Signature<T>, b: &Signature<T>) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch(format!(
            "signature lengths {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let sum: T = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum();
    Ok((sum / T::of_usize(a.len())).sqrt())
}

/// Contrastive loss for one pair: `λ·d + (1-λ)·max(0, μ - d)` with d the
/// RMS signature distance.
pub fn contrastive_loss<T: Real>(
    sig_a: &Signature<T>,
    sig_b: &Signature<T>,
    label: PairLabel,
    margin: T,
) -> Result<T> {
    let d = signature_rms_distance(sig_a, sig_b)?;
    Ok(match label {
        PairLabel::Positive => d,
        PairLabel::Negative => (margin - d).max(T::zero()),
    })
}

/// Gradients of [`contrastive_loss`] with respect to both signatures.
/// At d = 0 (and in the flat region d ≥ μ for negatives) the subgradient
/// is zero; `grad_b` is exactly `-grad_a`.
pub fn contrastive_loss_grad<T: Real>(
    sig_a: &Signature<T>,
    sig_b: &Signature<T>,
    label: PairLabel,
    margin: T,
) -> Result<(Vec<T>, Vec<T>)> {
    let n = sig_a.len();
    let d = signature_rms_distance(sig_a, sig_b)?;
    let zero = || (vec![T::zero(); n], vec![T::zero(); n]);
    if d == T::zero() {
        return Ok(zero());
    }
    let coeff = match label {
        PairLabel::Positive => T::one() / (T::of_usize(n) * d),
        PairLabel::Negative => {
            if d >= margin {
                return Ok(zero());
            }
            -T::one() / (T::of_usize(n) * d)
        }
    };
    let grad_a: Vec<T> = sig_a
        .values
        .iter()
        .zip(&sig_b.values)
        .map(|(&x, &y)| coeff * (x - y))
        .collect();
    let grad_b = grad_a.iter().map(|&g| -g).collect();
    Ok((grad_a, grad_b))
}

fn prepare<T: Real>(curve: &PlanarCurve<T>, points: usize) -> Result<PlanarCurve<T>> {
    curve.resample_uniform(points)?.normalize()
}

/// Positive pair with an explicit transform (the random path goes through
/// [`make_positive_pair`]): the partner is the transformed curve, both
/// members resampled to `cfg.points` and normalized.
pub fn positive_pair_with_transform<T: Real>(
    curve: &PlanarCurve<T>,
    cfg: &PairConfig,
    scale_index: u32,
    transform: &EuclideanTransform<T>,
) -> Result<TrainingPair<T>> {
    cfg.validate()?;
    cfg.span(scale_index)?;
    Ok(TrainingPair {
        curve_a: prepare(curve, cfg.points)?,
        curve_b: prepare(&transform.apply(curve), cfg.points)?,
        label: PairLabel::Positive,
        scale_index,
    })
}

/// Positive pair: the same shape under a seeded random rotation,
/// translation and reflection.
pub fn make_positive_pair<T: Real>(
    curve: &PlanarCurve<T>,
    cfg: &PairConfig,
    scale_index: u32,
    seed: u64,
) -> Result<TrainingPair<T>> {
    let xf = EuclideanTransform::random(seed);
    positive_pair_with_transform(curve, cfg, scale_index, &xf)
}

/// Negative pair with an explicit partner transform; the partner is the
/// LOESS-smoothed self at the ladder span for `scale_index`, or (with
/// `cfg.cross_negative_prob`, decided by `rng`) a different pool shape.
fn negative_pair_inner<T: Real>(
    curve: &PlanarCurve<T>,
    cfg: &PairConfig,
    scale_index: u32,
    pool: &[PlanarCurve<T>],
    rng: &mut ChaCha8Rng,
    transform: Option<&EuclideanTransform<T>>,
) -> Result<TrainingPair<T>> {
    cfg.validate()?;
    let span = cfg.span(scale_index)?;
    let cross = rng.random::<f64>() < cfg.cross_negative_prob;
    let partner_shape = if cross {
        // Redraw a few times to avoid pairing a shape with itself; fall
        // back to the smoothed self if the pool has nothing different.
        let mut found = None;
        for _ in 0..8 {
            if pool.is_empty() {
                break;
            }
            let cand = &pool[rng.random_range(0..pool.len())];
            if cand.points() != curve.points() {
                found = Some(cand.clone());
                break;
            }
        }
        found
    } else {
        None
    };
    let partner = match partner_shape {
        Some(shape) => shape,
        None => curve.smooth_loess(span)?,
    };
    let xf = match transform {
        Some(t) => *t,
        None => EuclideanTransform::sample(rng),
    };
    Ok(TrainingPair {
        curve_a: prepare(curve, cfg.points)?,
        curve_b: prepare(&xf.apply(&partner), cfg.points)?,
        label: PairLabel::Negative,
        scale_index,
    })
}

/// Negative pair: smoothed self (or a cross-shape partner) under a random
/// transform. The pool supplies cross-shape partners.
pub fn make_negative_pair<T: Real>(
    curve: &PlanarCurve<T>,
    cfg: &PairConfig,
    scale_index: u32,
    pool: &[PlanarCurve<T>],
    seed: u64,
) -> Result<TrainingPair<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    negative_pair_inner(curve, cfg, scale_index, pool, &mut rng, None)
}

/// Negative pair with the partner pose pinned; used by tests that compare
/// smoothing levels without a random transform in the way.
pub fn negative_pair_with_transform<T: Real>(
    curve: &PlanarCurve<T>,
    cfg: &PairConfig,
    scale_index: u32,
    pool: &[PlanarCurve<T>],
    seed: u64,
    transform: &EuclideanTransform<T>,
) -> Result<TrainingPair<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    negative_pair_inner(curve, cfg, scale_index, pool, &mut rng, Some(transform))
}

/// Builds `pair_count` training pairs from the shape pool, alternating
/// positive and negative so the split is (almost) exactly 50/50.
pub fn build_training_pairs<T: Real>(
    shapes: &[PlanarCurve<T>],
    cfg: &PairConfig,
    scale_index: u32,
    pair_count: usize,
    seed: u64,
) -> Result<Vec<TrainingPair<T>>> {
    if shapes.is_empty() {
        return Err(Error::InvalidArgument("empty shape pool".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(pair_count);
    for i in 0..pair_count {
        let shape = &shapes[rng.random_range(0..shapes.len())];
        let pair_seed: u64 = rng.random();
        let pair = if i % 2 == 0 {
            make_positive_pair(shape, cfg, scale_index, pair_seed)?
        } else {
            make_negative_pair(shape, cfg, scale_index, shapes, pair_seed)?
        };
        pairs.push(pair);
    }
    Ok(pairs)
}

/// Evaluates one pair: loss and the summed parameter gradient of both
/// weight-shared arms.
fn pair_loss_and_grad<T: Real>(
    model: &Model<T>,
    pair: &TrainingPair<T>,
    margin: T,
) -> Result<(T, Model<T>)> {
    let (sig_a, cache_a) = forward_with_cache(model, &pair.curve_a)?;
    let (sig_b, cache_b) = forward_with_cache(model, &pair.curve_b)?;
    let loss = contrastive_loss(&sig_a, &sig_b, pair.label, margin)?;
    let (ga, gb) = contrastive_loss_grad(&sig_a, &sig_b, pair.label, margin)?;
    let mut grad = backward(model, &cache_a, &ga)?;
    let grad_b = backward(model, &cache_b, &gb)?;
    axpy_params(&mut grad, T::one(), &grad_b)?;
    Ok((loss, grad))
}

/// Trains the signature network on pairs built from `shapes` at the given
/// ladder scale. Returns the model and the per-epoch mean training loss.
///
/// Deterministic for a fixed seed regardless of thread count: per-pair
/// gradients inside a batch are computed in parallel but reduced in pair
/// order.
pub fn train<T: Real>(
    shapes: &[PlanarCurve<T>],
    arch: &Architecture,
    hp: &Hyperparameters<T>,
    cfg: &PairConfig,
    scale_index: u32,
    pair_count: usize,
) -> Result<(Model<T>, Vec<T>)> {
    hp.validate()?;
    cfg.validate()?;
    if pair_count < hp.batch_size {
        return Err(Error::InvalidArgument(format!(
            "pair count {pair_count} below batch size {}",
            hp.batch_size
        )));
    }
    let pairs = build_training_pairs(shapes, cfg, scale_index, pair_count, hp.seed)?;
    train_on_pairs(&pairs, arch, hp)
}

/// The inner loop of [`train`], reusable with externally built pairs.
pub fn train_on_pairs<T: Real>(
    pairs: &[TrainingPair<T>],
    arch: &Architecture,
    hp: &Hyperparameters<T>,
) -> Result<(Model<T>, Vec<T>)> {
    hp.validate()?;
    if pairs.is_empty() {
        return Err(Error::InvalidArgument("no training pairs".into()));
    }
    let mut model: Model<T> = crate::net::init_model(arch, hp.seed)?;
    let mut state = OptimizerState::new(arch, hp.learning_rate, T::of(1e-8))?;
    let mut history = Vec::with_capacity(hp.epochs);

    let mut order: Vec<usize> = (0..pairs.len()).collect();
    for epoch in 0..hp.epochs {
        let mut rng = ChaCha8Rng::seed_from_u64(hp.seed.wrapping_add(epoch as u64 + 1));
        order.shuffle(&mut rng);

        let mut epoch_loss = T::zero();
        for batch in order.chunks(hp.batch_size) {
            let results: Vec<Result<(T, Model<T>)>> = batch
                .par_iter()
                .map(|&idx| pair_loss_and_grad(&model, &pairs[idx], hp.margin))
                .collect();
            let scale = T::one() / T::of_usize(batch.len());
            let mut batch_grad = Model::zeros(arch)?;
            let mut batch_loss = T::zero();
            for r in results {
                let (loss, grad) = r?;
                batch_loss += loss;
                axpy_params(&mut batch_grad, scale, &grad)?;
            }
            batch_loss = batch_loss * scale;
            if !batch_loss.is_finite() {
                return Err(Error::NonFinite(format!(
                    "batch loss in epoch {epoch} ({batch_loss})"
                )));
            }
            epoch_loss += batch_loss * T::of_usize(batch.len());
            adagrad_step(&mut model, &batch_grad, &mut state)?;
        }
        history.push(epoch_loss / T::of_usize(pairs.len()));
    }
    Ok((model, history))
}

/// Writes the loss history as CSV `epoch,mean_loss`, one row per epoch.
pub fn write_loss_history<T: Real>(path: impl AsRef<Path>, history: &[T]) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("epoch,mean_loss\n");
    for (epoch, &loss) in history.iter().enumerate() {
        out.push_str(&format!("{epoch},{}\n", g17(loss)));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}
