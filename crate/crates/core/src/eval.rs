//! The experiments: noise robustness, sampling resilience, and shape
//! retrieval, plus the signature distance and the Hausdorff distance
//! between signature sets.

use crate::curve::{EuclideanTransform, PlanarCurve};
use crate::data::ShapeRecord;
use crate::error::{Error, Result};
use crate::invariants::{euclidean_curvature, integral_area_invariant, Signature, SignatureMethod};
use crate::net::{forward, Model};
use crate::numfmt::g17;
use crate::scalar::Real;
use crate::siamese::{
    make_positive_pair, negative_pair_with_transform, signature_rms_distance, PairConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::path::Path;

/// Standard preprocessing before any signature: counterclockwise
/// orientation, uniform resampling, normalized pose.
pub fn prepare_for_signatures<T: Real>(
    curve: &PlanarCurve<T>,
    points: usize,
) -> Result<PlanarCurve<T>> {
    curve.oriented_ccw()?.resample_uniform(points)?.normalize()
}

/// Parameters of the two axiomatic signatures: the Gaussian scale for
/// curvature (in samples) and the disk radius for the integral invariant
/// as a fraction of the curve diameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxiomaticParams<T> {
    pub curvature_sigma: T,
    pub integral_radius_fraction: T,
}

impl<T: Real> Default for AxiomaticParams<T> {
    fn default() -> Self {
        Self {
            curvature_sigma: T::of(2.0),
            integral_radius_fraction: T::of(0.2),
        }
    }
}

fn z_normalize<T: Real>(values: &[T]) -> Vec<T> {
    let n = T::of_usize(values.len());
    let mean = values.iter().copied().sum::<T>() / n;
    let var = values.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / n;
    let std = var.sqrt();
    if std < T::of(1e-12) {
        return vec![T::zero(); values.len()];
    }
    values.iter().map(|&v| (v - mean) / std).collect()
}

/// Distance between two signatures: both are z-normalized (a constant
/// signature maps to all zeros), then compared by RMS difference — for
/// closed curves, minimized over all cyclic shifts so the start point
/// does not matter.
pub fn signature_distance<T: Real>(a: &Signature<T>, b: &Signature<T>, closed: bool) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch(format!(
            "signature lengths {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let za = z_normalize(&a.values);
    let zb = z_normalize(&b.values);
    let n = za.len();
    let ss_at = |shift: usize| -> T {
        let mut ss = T::zero();
        for i in 0..n {
            let d = za[i] - zb[(i + shift) % n];
            ss += d * d;
        }
        ss
    };
    let best = if closed {
        (0..n)
            .map(ss_at)
            .fold(T::infinity(), |acc, ss| acc.min(ss))
    } else {
        ss_at(0)
    };
    Ok((best / T::of_usize(n)).sqrt())
}

/// A shape's multi-scale representation: its signatures at ascending
/// scales (five in the experiments), all of one length.
#[derive(Debug, Clone, PartialEq)]
pub struct SignatureSet<T> {
    pub shape_id: String,
    pub signatures: Vec<Signature<T>>,
}

impl<T: Real> SignatureSet<T> {
    pub fn new(shape_id: String, signatures: Vec<Signature<T>>) -> Result<Self> {
        if signatures.is_empty() {
            return Err(Error::InvalidArgument("signature set is empty".into()));
        }
        let len = signatures[0].len();
        if signatures.iter().any(|s| s.len() != len) {
            return Err(Error::ShapeMismatch(
                "signatures in a set must share one length".into(),
            ));
        }
        Ok(Self { shape_id, signatures })
    }
}

/// Hausdorff distance between two signature sets:
/// `max(h(A,B), h(B,A))` with `h(A,B) = max_a min_b d(a, b)`.
pub fn hausdorff_set_distance<T: Real>(
    a: &SignatureSet<T>,
    b: &SignatureSet<T>,
    closed: bool,
) -> Result<T> {
    let mut matrix = vec![vec![T::zero(); b.signatures.len()]; a.signatures.len()];
    for (i, sa) in a.signatures.iter().enumerate() {
        for (j, sb) in b.signatures.iter().enumerate() {
            matrix[i][j] = signature_distance(sa, sb, closed)?;
        }
    }
    let directed = |rows: bool| -> T {
        let (outer, inner) = if rows {
            (a.signatures.len(), b.signatures.len())
        } else {
            (b.signatures.len(), a.signatures.len())
        };
        let mut h = T::zero();
        for i in 0..outer {
            let mut closest = T::infinity();
            for j in 0..inner {
                let d = if rows { matrix[i][j] } else { matrix[j][i] };
                closest = closest.min(d);
            }
            h = h.max(closest);
        }
        h
    };
    Ok(directed(true).max(directed(false)))
}

// ---------------------------------------------------------------------------
// Noise robustness

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseRow<T> {
    pub method: SignatureMethod,
    pub sigma: T,
    pub mean: T,
    pub std: T,
}

fn mean_std<T: Real>(values: &[T]) -> (T, T) {
    let n = T::of_usize(values.len());
    let mean = values.iter().copied().sum::<T>() / n;
    let var = values.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / n;
    (mean, var.sqrt())
}

/// For every shape and every σ in the ladder, corrupts the prepared curve
/// with Gaussian noise (in normalized units) followed by a random
/// rotation, and measures each method's signature distance between clean
/// and corrupted. Rows aggregate mean and standard deviation over shapes;
/// the σ = 0 rows isolate pure rotation error.
pub fn noise_experiment<T: Real>(
    shapes: &[PlanarCurve<T>],
    model: &Model<T>,
    sigma_ladder: &[T],
    params: &AxiomaticParams<T>,
    seed: u64,
) -> Result<Vec<NoiseRow<T>>> {
    if shapes.is_empty() || sigma_ladder.is_empty() {
        return Err(Error::InvalidArgument(
            "noise experiment needs shapes and a sigma ladder".into(),
        ));
    }
    let methods = [
        SignatureMethod::Curvature,
        SignatureMethod::IntegralArea,
        SignatureMethod::Network,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Distances indexed [method][sigma][shape].
    let mut table = vec![vec![Vec::with_capacity(shapes.len()); sigma_ladder.len()]; 3];
    for shape in shapes {
        let base = prepare_for_signatures(shape, 500)?;
        // Both arms run the preparation pipeline the same number of times:
        // resampling at a changed density shifts points slightly, so a
        // clean reference with one fewer pass would not have identical
        // sampling and the σ = 0 rows would measure that artifact.
        let clean = prepare_for_signatures(&base, 500)?;
        let clean_sigs = signatures_of(&clean, model, params)?;
        for (si, &sigma) in sigma_ladder.iter().enumerate() {
            let noise_seed: u64 = rng.random();
            let angle = T::of(rng.random::<f64>() * 2.0 * std::f64::consts::PI - std::f64::consts::PI);
            let rotation = EuclideanTransform {
                reflect: false,
                angle,
                translation: [T::zero(); 2],
            };
            let corrupted_raw = rotation.apply(&base.add_gaussian_noise(sigma, noise_seed)?);
            let corrupted = prepare_for_signatures(&corrupted_raw, 500)?;
            let corrupted_sigs = signatures_of(&corrupted, model, params)?;
            for (mi, (cs, ds)) in clean_sigs.iter().zip(&corrupted_sigs).enumerate() {
                table[mi][si].push(signature_distance(cs, ds, true)?);
            }
        }
    }
    let mut rows = Vec::with_capacity(3 * sigma_ladder.len());
    for (mi, &method) in methods.iter().enumerate() {
        for (si, &sigma) in sigma_ladder.iter().enumerate() {
            let (mean, std) = mean_std(&table[mi][si]);
            rows.push(NoiseRow { method, sigma, mean, std });
        }
    }
    Ok(rows)
}

/// The three signatures of one prepared curve, in fixed method order
/// (curvature, integral area, network).
fn signatures_of<T: Real>(
    curve: &PlanarCurve<T>,
    model: &Model<T>,
    params: &AxiomaticParams<T>,
) -> Result<[Signature<T>; 3]> {
    let radius = params.integral_radius_fraction * curve.diameter();
    Ok([
        euclidean_curvature(curve, params.curvature_sigma)?,
        integral_area_invariant(curve, radius)?,
        forward(model, curve)?,
    ])
}

pub fn write_noise_report<T: Real>(path: impl AsRef<Path>, rows: &[NoiseRow<T>]) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("method,sigma,mean,std\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            row.method.tag(),
            g17(row.sigma),
            g17(row.mean),
            g17(row.std)
        ));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

// ---------------------------------------------------------------------------
// Sampling resilience

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingRow<T> {
    pub method: SignatureMethod,
    pub anchor: usize,
    pub std: T,
}

/// Decimates a high-resolution shape to each keep fraction (anchors always
/// survive), recomputes all three signatures, and reads each signature at
/// the resampled point nearest every anchor. Rows report the per-anchor
/// standard deviation across density levels.
pub fn sampling_experiment<T: Real>(
    shape: &PlanarCurve<T>,
    model: &Model<T>,
    keep_fractions: &[f64],
    anchor_count: usize,
    params: &AxiomaticParams<T>,
    seed: u64,
) -> Result<Vec<SamplingRow<T>>> {
    if shape.len() < 1000 {
        return Err(Error::InvalidArgument(format!(
            "sampling experiment needs a high-resolution shape (>= 1000 points), got {}",
            shape.len()
        )));
    }
    if keep_fractions.is_empty() || anchor_count == 0 {
        return Err(Error::InvalidArgument(
            "need at least one keep fraction and one anchor".into(),
        ));
    }
    let base = shape.oriented_ccw()?;
    let n = base.len();
    let anchors: Vec<usize> = (0..anchor_count).map(|j| j * n / anchor_count).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Values indexed [method][anchor][level].
    let mut values = vec![vec![Vec::with_capacity(keep_fractions.len()); anchors.len()]; 3];
    for &fraction in keep_fractions {
        let level_seed: u64 = rng.random();
        let decimated = base.decimate(fraction, &anchors, level_seed)?;
        let resampled = decimated.resample_uniform(500)?;
        let prepped = resampled.normalize()?;
        let sigs = signatures_of(&prepped, model, params)?;
        for (ai, &anchor) in anchors.iter().enumerate() {
            let target = base.point(anchor);
            // Nearest point before normalization; the argmin is unchanged
            // by the uniform shift and scale normalization applies.
            let mut best = (T::infinity(), 0usize);
            for (i, p) in resampled.points().iter().enumerate() {
                let dx = p[0] - target[0];
                let dy = p[1] - target[1];
                let d = dx * dx + dy * dy;
                if d < best.0 {
                    best = (d, i);
                }
            }
            for (mi, sig) in sigs.iter().enumerate() {
                values[mi][ai].push(sig.values[best.1]);
            }
        }
    }
    let methods = [
        SignatureMethod::Curvature,
        SignatureMethod::IntegralArea,
        SignatureMethod::Network,
    ];
    let mut rows = Vec::with_capacity(3 * anchors.len());
    for (mi, &method) in methods.iter().enumerate() {
        for ai in 0..anchors.len() {
            let (_, std) = mean_std(&values[mi][ai]);
            rows.push(SamplingRow { method, anchor: anchors[ai], std });
        }
    }
    Ok(rows)
}

pub fn write_sampling_report<T: Real>(
    path: impl AsRef<Path>,
    rows: &[SamplingRow<T>],
) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("method,anchor,std\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{}\n",
            row.method.tag(),
            row.anchor,
            g17(row.std)
        ));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

// ---------------------------------------------------------------------------
// Retrieval

/// The five-scale ladder behind a retrieval run: five models trained at
/// scale indices 1..=5, or five integral-invariant radii as fractions of
/// the curve diameter.
pub enum LadderSpec<'a, T> {
    NetworkScales(&'a [Model<T>]),
    IntegralRadii([f64; 5]),
}

impl<T> LadderSpec<'_, T> {
    pub fn method(&self) -> SignatureMethod {
        match self {
            LadderSpec::NetworkScales(_) => SignatureMethod::Network,
            LadderSpec::IntegralRadii(_) => SignatureMethod::IntegralArea,
        }
    }
}

/// The default radii ladder, mirroring the five network scales.
pub const INTEGRAL_RADII_LADDER: [f64; 5] = [0.05, 0.1, 0.2, 0.35, 0.5];

#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalQuery {
    pub shape_id: String,
    pub precision: f64,
    /// Candidate ids sorted by ascending set distance (ties by id).
    pub ranked: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalResult {
    pub mean_precision: f64,
    pub queries: Vec<RetrievalQuery>,
}

/// Number of retrieved shapes scored per query: with 6 categories of 5
/// shapes, 4 is the number of remaining same-category shapes.
pub const PRECISION_K: usize = 4;

/// Corrupts every shape with noise σ, builds its five-signature set, and
/// ranks all other shapes per query by Hausdorff set distance. Reports
/// mean precision@4 and the per-query rankings (queries in id order).
pub fn retrieval_experiment<T: Real>(
    shapes: &[ShapeRecord<T>],
    ladder: &LadderSpec<'_, T>,
    noise_sigma: T,
    seed: u64,
) -> Result<RetrievalResult> {
    if shapes.len() < 2 {
        return Err(Error::InvalidArgument(
            "retrieval needs at least two shapes".into(),
        ));
    }
    if let LadderSpec::NetworkScales(models) = ladder {
        if models.len() != 5 {
            return Err(Error::InvalidArgument(format!(
                "network ladder needs exactly 5 models, got {}",
                models.len()
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise_seeds: Vec<u64> = (0..shapes.len()).map(|_| rng.random()).collect();
    let sets: Result<Vec<SignatureSet<T>>> = shapes
        .par_iter()
        .zip(&noise_seeds)
        .map(|(shape, &noise_seed)| {
            let clean = prepare_for_signatures(&shape.curve, 500)?;
            let corrupted =
                prepare_for_signatures(&clean.add_gaussian_noise(noise_sigma, noise_seed)?, 500)?;
            let signatures: Result<Vec<Signature<T>>> = match ladder {
                LadderSpec::NetworkScales(models) => models
                    .iter()
                    .enumerate()
                    .map(|(i, m)| {
                        let sig = forward(m, &corrupted)?;
                        Signature::new(sig.values, SignatureMethod::Network, T::of_usize(i + 1))
                    })
                    .collect(),
                LadderSpec::IntegralRadii(fractions) => {
                    let diameter = corrupted.diameter();
                    fractions
                        .iter()
                        .map(|&f| integral_area_invariant(&corrupted, T::of(f) * diameter))
                        .collect()
                }
            };
            SignatureSet::new(shape.id.clone(), signatures?)
        })
        .collect();
    let sets = sets?;

    // Symmetric distance matrix over unordered pairs.
    let n = shapes.len();
    let index_pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let distances: Result<Vec<T>> = index_pairs
        .par_iter()
        .map(|&(i, j)| hausdorff_set_distance(&sets[i], &sets[j], true))
        .collect();
    let distances = distances?;
    let mut matrix = vec![vec![T::zero(); n]; n];
    for (&(i, j), &d) in index_pairs.iter().zip(&distances) {
        matrix[i][j] = d;
        matrix[j][i] = d;
    }

    let mut query_order: Vec<usize> = (0..n).collect();
    query_order.sort_by(|&a, &b| shapes[a].id.cmp(&shapes[b].id));
    let k = PRECISION_K.min(n - 1);
    let mut queries = Vec::with_capacity(n);
    let mut total = 0.0f64;
    for &qi in &query_order {
        let mut candidates: Vec<usize> = (0..n).filter(|&c| c != qi).collect();
        candidates.sort_by(|&a, &b| {
            matrix[qi][a]
                .partial_cmp(&matrix[qi][b])
                .unwrap()
                .then_with(|| shapes[a].id.cmp(&shapes[b].id))
        });
        let hits = candidates[..k]
            .iter()
            .filter(|&&c| shapes[c].category == shapes[qi].category)
            .count();
        let precision = hits as f64 / k as f64;
        total += precision;
        queries.push(RetrievalQuery {
            shape_id: shapes[qi].id.clone(),
            precision,
            ranked: candidates.iter().map(|&c| shapes[c].id.clone()).collect(),
        });
    }
    Ok(RetrievalResult {
        mean_precision: total / n as f64,
        queries,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalRow<T> {
    pub method: SignatureMethod,
    pub sigma: T,
    pub precision: f64,
}

pub fn write_retrieval_report<T: Real>(
    path: impl AsRef<Path>,
    rows: &[RetrievalRow<T>],
) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("method,sigma,precision_at_4\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{}\n",
            row.method.tag(),
            g17(row.sigma),
            g17(row.precision)
        ));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

// ---------------------------------------------------------------------------
// Invariance summary

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvarianceReport<T> {
    /// Mean network-signature distance across random Euclidean poses of
    /// the same shape.
    pub d_pos: T,
    /// Mean distance to the scale-ladder smoothed partner.
    pub d_neg: T,
    pub ratio: T,
}

/// Measures how well a model separates pose change from abstraction-level
/// change on held-out shapes: `ratio = d_pos / d_neg`, small is good.
pub fn invariance_report<T: Real>(
    model: &Model<T>,
    shapes: &[PlanarCurve<T>],
    cfg: &PairConfig,
    scale_index: u32,
    seed: u64,
) -> Result<InvarianceReport<T>> {
    if shapes.is_empty() {
        return Err(Error::InvalidArgument("no held-out shapes".into()));
    }
    let smoothing_only = PairConfig {
        cross_negative_prob: 0.0,
        ..cfg.clone()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos = Vec::with_capacity(shapes.len());
    let mut neg = Vec::with_capacity(shapes.len());
    for shape in shapes {
        let pos_seed: u64 = rng.random();
        let neg_seed: u64 = rng.random();
        let pair = make_positive_pair(shape, cfg, scale_index, pos_seed)?;
        pos.push(signature_rms_distance(
            &forward(model, &pair.curve_a)?,
            &forward(model, &pair.curve_b)?,
        )?);
        let partner_pose = EuclideanTransform::random(neg_seed);
        let pair = negative_pair_with_transform(
            shape,
            &smoothing_only,
            scale_index,
            &[],
            neg_seed,
            &partner_pose,
        )?;
        neg.push(signature_rms_distance(
            &forward(model, &pair.curve_a)?,
            &forward(model, &pair.curve_b)?,
        )?);
    }
    let (d_pos, _) = mean_std(&pos);
    let (d_neg, _) = mean_std(&neg);
    if d_neg <= T::zero() {
        return Err(Error::InvalidArgument(
            "negative-pair distance collapsed to zero; ratio undefined".into(),
        ));
    }
    Ok(InvarianceReport {
        d_pos,
        d_neg,
        ratio: d_pos / d_neg,
    })
}
