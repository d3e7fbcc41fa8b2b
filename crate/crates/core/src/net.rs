//! The signature network: 1D convolutions with ReLU, per-stage channel
//! max, and a pointwise linear head; exact backpropagation and Adagrad.
//!
//! Convolutions use cross-correlation semantics (the window slides
//! without flipping), matching the Gaussian-derivative kernels. All
//! layers are same-length: each conv pads its input by `(width-1)/2` on
//! both ends, wrapping for closed curves and mirroring for open ones.

use crate::curve::PlanarCurve;
use crate::error::{Error, Result};
use crate::invariants::{Signature, SignatureMethod};
use crate::scalar::Real;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io::Write as _;
use std::path::Path;

/// Network shape. The default is the reference architecture: three stages
/// of Conv-ReLU-Conv-ReLU, the first two ending in a channel max, and a
/// linear head that combines the last stage's channels pointwise.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub stages: usize,
    pub convs_per_stage: usize,
    pub filters: usize,
    pub width: usize,
    pub stage_has_channel_max: Vec<bool>,
    pub input_channels: usize,
    pub output_channels: usize,
}

impl Default for Architecture {
    fn default() -> Self {
        Self {
            stages: 3,
            convs_per_stage: 2,
            filters: 15,
            width: 5,
            stage_has_channel_max: vec![true, true, false],
            input_channels: 2,
            output_channels: 1,
        }
    }
}

impl Architecture {
    pub fn validate(&self) -> Result<()> {
        if self.stages == 0 || self.convs_per_stage == 0 {
            return Err(Error::InvalidArgument(
                "architecture needs at least one stage and one conv per stage".into(),
            ));
        }
        if self.filters == 0 || self.input_channels == 0 {
            return Err(Error::InvalidArgument("channel counts must be >= 1".into()));
        }
        if self.width % 2 != 1 {
            return Err(Error::InvalidArgument(format!(
                "conv width must be odd, got {}",
                self.width
            )));
        }
        if self.stage_has_channel_max.len() != self.stages {
            return Err(Error::InvalidArgument(format!(
                "stage_has_channel_max has {} entries for {} stages",
                self.stage_has_channel_max.len(),
                self.stages
            )));
        }
        if self.output_channels != 1 {
            return Err(Error::InvalidArgument(
                "only a single output channel is supported".into(),
            ));
        }
        Ok(())
    }

    /// Input channels of conv `conv` (0-based) within stage `stage`.
    fn conv_in_channels(&self, stage: usize, conv: usize) -> usize {
        if conv > 0 {
            self.filters
        } else if stage == 0 {
            self.input_channels
        } else if self.stage_has_channel_max[stage - 1] {
            1
        } else {
            self.filters
        }
    }

    /// Channels entering the linear head.
    fn head_in_channels(&self) -> usize {
        if self.stage_has_channel_max[self.stages - 1] {
            1
        } else {
            self.filters
        }
    }

    /// Half-width of the receptive field: each conv adds `(width-1)/2`.
    pub fn receptive_radius(&self) -> usize {
        self.stages * self.convs_per_stage * (self.width - 1) / 2
    }

    /// Smallest point count `forward` accepts: the full receptive field.
    pub fn min_points(&self) -> usize {
        (2 * self.receptive_radius() + 1).max(self.width + 1)
    }

    pub fn parameter_count(&self) -> usize {
        let mut count = 0;
        for stage in 0..self.stages {
            for conv in 0..self.convs_per_stage {
                let c_in = self.conv_in_channels(stage, conv);
                count += self.filters * c_in * self.width + self.filters;
            }
        }
        count + self.head_in_channels() + 1
    }
}

/// One convolution layer; weights are flat with layout
/// `weights[(f * in_channels + c) * width + k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvLayer<T> {
    pub filters: usize,
    pub in_channels: usize,
    pub width: usize,
    pub weights: Vec<T>,
    pub bias: Vec<T>,
}

impl<T: Real> ConvLayer<T> {
    pub fn new(
        filters: usize,
        in_channels: usize,
        width: usize,
        weights: Vec<T>,
        bias: Vec<T>,
    ) -> Result<Self> {
        if weights.len() != filters * in_channels * width || bias.len() != filters {
            return Err(Error::ShapeMismatch(format!(
                "conv layer {filters}x{in_channels}x{width}: got {} weights, {} biases",
                weights.len(),
                bias.len()
            )));
        }
        if width % 2 != 1 {
            return Err(Error::InvalidArgument(format!(
                "conv width must be odd, got {width}"
            )));
        }
        Ok(Self {
            filters,
            in_channels,
            width,
            weights,
            bias,
        })
    }

    fn zeros(filters: usize, in_channels: usize, width: usize) -> Self {
        Self {
            filters,
            in_channels,
            width,
            weights: vec![T::zero(); filters * in_channels * width],
            bias: vec![T::zero(); filters],
        }
    }
}

/// The full parameter set Θ.
#[derive(Debug, Clone, PartialEq)]
pub struct Model<T> {
    pub arch: Architecture,
    pub convs: Vec<ConvLayer<T>>,
    pub linear_weights: Vec<T>,
    pub linear_bias: T,
}

impl<T: Real> Model<T> {
    /// All-zero parameters in the shape of `arch`; also the shape of a
    /// gradient or an optimizer accumulator.
    pub fn zeros(arch: &Architecture) -> Result<Self> {
        arch.validate()?;
        let mut convs = Vec::new();
        for stage in 0..arch.stages {
            for conv in 0..arch.convs_per_stage {
                convs.push(ConvLayer::zeros(
                    arch.filters,
                    arch.conv_in_channels(stage, conv),
                    arch.width,
                ));
            }
        }
        Ok(Self {
            arch: arch.clone(),
            convs,
            linear_weights: vec![T::zero(); arch.head_in_channels()],
            linear_bias: T::zero(),
        })
    }

    pub fn parameter_count(&self) -> usize {
        self.convs
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum::<usize>()
            + self.linear_weights.len()
            + 1
    }

    pub fn all_finite(&self) -> bool {
        self.convs
            .iter()
            .all(|l| l.weights.iter().chain(&l.bias).all(|v| v.is_finite()))
            && self.linear_weights.iter().all(|v| v.is_finite())
            && self.linear_bias.is_finite()
    }

    fn same_shape(&self, other: &Self) -> bool {
        self.arch == other.arch
            && self.convs.len() == other.convs.len()
            && self
                .convs
                .iter()
                .zip(&other.convs)
                .all(|(a, b)| a.weights.len() == b.weights.len() && a.bias.len() == b.bias.len())
            && self.linear_weights.len() == other.linear_weights.len()
    }

    /// Flattens every parameter in declared order (conv layers first, each
    /// weights-then-bias, then the linear head). Used by tests and spot
    /// checks; training touches storage directly.
    pub fn flat_parameters(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.parameter_count());
        for l in &self.convs {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.bias);
        }
        out.extend_from_slice(&self.linear_weights);
        out.push(self.linear_bias);
        out
    }

    /// Mutable reference to flat parameter `index` in the
    /// [`flat_parameters`](Self::flat_parameters) order.
    pub fn parameter_mut(&mut self, mut index: usize) -> &mut T {
        for l in &mut self.convs {
            if index < l.weights.len() {
                return &mut l.weights[index];
            }
            index -= l.weights.len();
            if index < l.bias.len() {
                return &mut l.bias[index];
            }
            index -= l.bias.len();
        }
        if index < self.linear_weights.len() {
            return &mut self.linear_weights[index];
        }
        index -= self.linear_weights.len();
        assert_eq!(index, 0, "parameter index out of range");
        &mut self.linear_bias
    }
}

/// Fan-in uniform initialization: every weight ~ U[-b, b] with
/// `b = sqrt(1 / fan_in)` (fan_in = in_channels * width for convolutions,
/// input length for the linear head); all biases zero.
pub fn init_model<T: Real>(arch: &Architecture, seed: u64) -> Result<Model<T>> {
    let mut model = Model::zeros(arch)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |bound: f64, rng: &mut ChaCha8Rng| -> T {
        T::of((rng.random::<f64>() * 2.0 - 1.0) * bound)
    };
    for layer in &mut model.convs {
        let bound = (1.0 / (layer.in_channels * layer.width) as f64).sqrt();
        for w in &mut layer.weights {
            *w = draw(bound, &mut rng);
        }
    }
    let bound = (1.0 / model.linear_weights.len() as f64).sqrt();
    for w in &mut model.linear_weights {
        *w = draw(bound, &mut rng);
    }
    Ok(model)
}

/// Boundary handling for same-length convolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Padding {
    /// Cyclic continuation (closed curves).
    Wrap,
    /// Mirror continuation without repeating the edge sample
    /// (`x[-k] = x[k]`); used for open curves.
    Reflect,
}

impl Padding {
    pub fn for_curve<T>(curve: &PlanarCurve<T>) -> Self {
        if curve.is_closed() {
            Padding::Wrap
        } else {
            Padding::Reflect
        }
    }

    /// Source index for padded position `q` in `[-radius, n + radius)`.
    fn source(self, q: isize, n: usize) -> usize {
        let n_i = n as isize;
        let idx = match self {
            Padding::Wrap => q.rem_euclid(n_i),
            Padding::Reflect => {
                if q < 0 {
                    -q
                } else if q >= n_i {
                    2 * (n_i - 1) - q
                } else {
                    q
                }
            }
        };
        debug_assert!((0..n_i).contains(&idx));
        idx as usize
    }
}

fn padded<T: Real>(input: &[Vec<T>], radius: usize, padding: Padding) -> Vec<Vec<T>> {
    let n = input[0].len();
    input
        .iter()
        .map(|chan| {
            (0..n + 2 * radius)
                .map(|p| chan[padding.source(p as isize - radius as isize, n)])
                .collect()
        })
        .collect()
}

/// Same-length cross-correlation:
/// `out[f][i] = bias[f] + Σ_{c,k} weights[f][c][k] · in_pad[c][i + k - (W-1)/2]`.
pub fn conv1d<T: Real>(
    input: &[Vec<T>],
    layer: &ConvLayer<T>,
    padding: Padding,
) -> Result<Vec<Vec<T>>> {
    if input.len() != layer.in_channels {
        return Err(Error::ShapeMismatch(format!(
            "conv expects {} input channels, got {}",
            layer.in_channels,
            input.len()
        )));
    }
    let n = input[0].len();
    if input.iter().any(|c| c.len() != n) {
        return Err(Error::ShapeMismatch("ragged input channels".into()));
    }
    if n <= layer.width {
        return Err(Error::InvalidArgument(format!(
            "signal length {n} not greater than conv width {}",
            layer.width
        )));
    }
    let radius = (layer.width - 1) / 2;
    let pad = padded(input, radius, padding);
    let mut out = vec![vec![T::zero(); n]; layer.filters];
    for f in 0..layer.filters {
        let row = &mut out[f];
        row.fill(layer.bias[f]);
        for c in 0..layer.in_channels {
            let src = &pad[c];
            for k in 0..layer.width {
                let w = layer.weights[(f * layer.in_channels + c) * layer.width + k];
                let shifted = &src[k..k + n];
                for (o, &s) in row.iter_mut().zip(shifted) {
                    *o += w * s;
                }
            }
        }
    }
    Ok(out)
}

/// Pointwise maximum over channels; `argmax[i]` is the winning channel
/// (lowest index on ties), used to route gradients.
pub fn channel_max<T: Real>(input: &[Vec<T>]) -> (Vec<Vec<T>>, Vec<usize>) {
    let n = input[0].len();
    let mut values = vec![T::zero(); n];
    let mut argmax = vec![0usize; n];
    for i in 0..n {
        let mut best = input[0][i];
        let mut arg = 0usize;
        for (c, chan) in input.iter().enumerate().skip(1) {
            if chan[i] > best {
                best = chan[i];
                arg = c;
            }
        }
        values[i] = best;
        argmax[i] = arg;
    }
    (vec![values], argmax)
}

/// Intermediate activations of one forward pass, kept for backpropagation.
pub struct ForwardCache<T> {
    padding: Padding,
    /// Input to each conv layer.
    conv_inputs: Vec<Vec<Vec<T>>>,
    /// Pre-activation output of each conv layer (before ReLU).
    preacts: Vec<Vec<Vec<T>>>,
    /// Argmax per stage that has a channel max.
    argmaxes: Vec<Option<Vec<usize>>>,
    /// Input to the linear head.
    head_input: Vec<Vec<T>>,
}

fn relu<T: Real>(x: &[Vec<T>]) -> Vec<Vec<T>> {
    x.iter()
        .map(|c| c.iter().map(|&v| v.max(T::zero())).collect())
        .collect()
}

pub fn forward<T: Real>(model: &Model<T>, curve: &PlanarCurve<T>) -> Result<Signature<T>> {
    Ok(forward_with_cache(model, curve)?.0)
}

pub fn forward_with_cache<T: Real>(
    model: &Model<T>,
    curve: &PlanarCurve<T>,
) -> Result<(Signature<T>, ForwardCache<T>)> {
    let arch = &model.arch;
    let n = curve.len();
    if n < arch.min_points() {
        return Err(Error::InvalidArgument(format!(
            "curve has {n} points but the receptive field needs {}",
            arch.min_points()
        )));
    }
    let padding = Padding::for_curve(curve);
    let mut x: Vec<Vec<T>> = vec![
        curve.points().iter().map(|p| p[0]).collect(),
        curve.points().iter().map(|p| p[1]).collect(),
    ];
    if arch.input_channels != 2 {
        return Err(Error::ShapeMismatch(format!(
            "architecture expects {} input channels; curves provide 2",
            arch.input_channels
        )));
    }

    let mut cache = ForwardCache {
        padding,
        conv_inputs: Vec::with_capacity(model.convs.len()),
        preacts: Vec::with_capacity(model.convs.len()),
        argmaxes: Vec::with_capacity(arch.stages),
        head_input: Vec::new(),
    };

    let mut layer = 0usize;
    for stage in 0..arch.stages {
        for _ in 0..arch.convs_per_stage {
            let z = conv1d(&x, &model.convs[layer], padding)?;
            cache.conv_inputs.push(x);
            let a = relu(&z);
            cache.preacts.push(z);
            x = a;
            layer += 1;
        }
        if arch.stage_has_channel_max[stage] {
            let (m, arg) = channel_max(&x);
            cache.argmaxes.push(Some(arg));
            x = m;
        } else {
            cache.argmaxes.push(None);
        }
    }

    if x.len() != model.linear_weights.len() {
        return Err(Error::ShapeMismatch(format!(
            "linear head expects {} channels, got {}",
            model.linear_weights.len(),
            x.len()
        )));
    }
    let mut out = vec![model.linear_bias; n];
    for (c, chan) in x.iter().enumerate() {
        let w = model.linear_weights[c];
        for (o, &v) in out.iter_mut().zip(chan) {
            *o += w * v;
        }
    }
    cache.head_input = x;
    let sig = Signature::new(out, SignatureMethod::Network, T::zero())?;
    Ok((sig, cache))
}

/// Exact gradients of `Σ_i output_grad[i] · forward(model, curve)[i]`
/// with respect to every parameter, using the cached activations.
/// ReLU uses subgradient 0 at 0; the channel max routes gradient to the
/// stored argmax channel only.
pub fn backward<T: Real>(
    model: &Model<T>,
    cache: &ForwardCache<T>,
    output_grad: &[T],
) -> Result<Model<T>> {
    let arch = &model.arch;
    let n = cache.head_input[0].len();
    if output_grad.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "output grad length {} vs {} points",
            output_grad.len(),
            n
        )));
    }
    let mut grads = Model::zeros(arch)?;

    // Linear head.
    for (c, chan) in cache.head_input.iter().enumerate() {
        grads.linear_weights[c] = chan
            .iter()
            .zip(output_grad)
            .map(|(&v, &g)| v * g)
            .sum();
    }
    grads.linear_bias = output_grad.iter().copied().sum();
    let mut d_x: Vec<Vec<T>> = model
        .linear_weights
        .iter()
        .map(|&w| output_grad.iter().map(|&g| g * w).collect())
        .collect();

    for stage in (0..arch.stages).rev() {
        if let Some(arg) = &cache.argmaxes[stage] {
            // d_x is [1 x N] on the max output; scatter to the winner.
            let mut routed = vec![vec![T::zero(); n]; arch.filters];
            for i in 0..n {
                routed[arg[i]][i] = d_x[0][i];
            }
            d_x = routed;
        }
        for conv in (0..arch.convs_per_stage).rev() {
            let layer_idx = stage * arch.convs_per_stage + conv;
            let layer = &model.convs[layer_idx];
            let preact = &cache.preacts[layer_idx];
            // Through ReLU.
            for (dc, zc) in d_x.iter_mut().zip(preact) {
                for (d, &z) in dc.iter_mut().zip(zc) {
                    if z <= T::zero() {
                        *d = T::zero();
                    }
                }
            }
            let (dw_layer, d_in) = conv1d_backward(
                &cache.conv_inputs[layer_idx],
                layer,
                cache.padding,
                &d_x,
                &mut grads.convs[layer_idx],
            );
            let _ = dw_layer;
            d_x = d_in;
        }
    }
    Ok(grads)
}

/// Accumulates weight/bias gradients into `grad_layer` and returns the
/// gradient with respect to the layer input.
fn conv1d_backward<T: Real>(
    input: &[Vec<T>],
    layer: &ConvLayer<T>,
    padding: Padding,
    d_out: &[Vec<T>],
    grad_layer: &mut ConvLayer<T>,
) -> ((), Vec<Vec<T>>) {
    let n = input[0].len();
    let radius = (layer.width - 1) / 2;
    let pad = padded(input, radius, padding);

    for f in 0..layer.filters {
        let dz = &d_out[f];
        grad_layer.bias[f] += dz.iter().copied().sum();
        for c in 0..layer.in_channels {
            let src = &pad[c];
            for k in 0..layer.width {
                let shifted = &src[k..k + n];
                let mut acc = T::zero();
                for (&g, &s) in dz.iter().zip(shifted) {
                    acc += g * s;
                }
                grad_layer.weights[(f * layer.in_channels + c) * layer.width + k] += acc;
            }
        }
    }

    // Input gradient: scatter into a padded buffer, then fold the pad back
    // through the same index mapping the forward padding used.
    let mut d_pad = vec![vec![T::zero(); n + 2 * radius]; layer.in_channels];
    for f in 0..layer.filters {
        let dz = &d_out[f];
        for c in 0..layer.in_channels {
            let dst = &mut d_pad[c];
            for k in 0..layer.width {
                let w = layer.weights[(f * layer.in_channels + c) * layer.width + k];
                let window = &mut dst[k..k + n];
                for (o, &g) in window.iter_mut().zip(dz) {
                    *o += w * g;
                }
            }
        }
    }
    let mut d_in = vec![vec![T::zero(); n]; layer.in_channels];
    for c in 0..layer.in_channels {
        for (p, &g) in d_pad[c].iter().enumerate() {
            let q = p as isize - radius as isize;
            d_in[c][padding.source(q, n)] += g;
        }
    }
    ((), d_in)
}

/// Adagrad accumulators plus hyperparameters.
#[derive(Debug, Clone)]
pub struct OptimizerState<T> {
    pub accumulators: Model<T>,
    pub learning_rate: T,
    pub epsilon: T,
}

impl<T: Real> OptimizerState<T> {
    pub fn new(arch: &Architecture, learning_rate: T, epsilon: T) -> Result<Self> {
        if !(learning_rate > T::zero()) || !(epsilon >= T::zero()) {
            return Err(Error::InvalidArgument(
                "learning rate must be > 0 and epsilon >= 0".into(),
            ));
        }
        Ok(Self {
            accumulators: Model::zeros(arch)?,
            learning_rate,
            epsilon,
        })
    }
}

fn adagrad_slice<T: Real>(params: &mut [T], grads: &[T], acc: &mut [T], lr: T, eps: T) {
    for i in 0..params.len() {
        let g = grads[i];
        if g == T::zero() {
            // Skipping is exact and avoids 0/0 when acc and eps are both 0.
            continue;
        }
        acc[i] += g * g;
        params[i] -= lr * g / (acc[i].sqrt() + eps);
    }
}

/// One Adagrad update: `acc += g²; θ -= lr · g / (sqrt(acc) + ε)`.
/// Rejects non-finite gradients before touching any state.
pub fn adagrad_step<T: Real>(
    model: &mut Model<T>,
    grads: &Model<T>,
    state: &mut OptimizerState<T>,
) -> Result<()> {
    if !model.same_shape(grads) || !model.same_shape(&state.accumulators) {
        return Err(Error::ShapeMismatch(
            "model, gradients and optimizer state disagree".into(),
        ));
    }
    if !grads.all_finite() {
        return Err(Error::NonFinite("gradient".into()));
    }
    let lr = state.learning_rate;
    let eps = state.epsilon;
    for (layer, (g, acc)) in model
        .convs
        .iter_mut()
        .zip(grads.convs.iter().zip(&mut state.accumulators.convs))
    {
        adagrad_slice(&mut layer.weights, &g.weights, &mut acc.weights, lr, eps);
        adagrad_slice(&mut layer.bias, &g.bias, &mut acc.bias, lr, eps);
    }
    adagrad_slice(
        &mut model.linear_weights,
        &grads.linear_weights,
        &mut state.accumulators.linear_weights,
        lr,
        eps,
    );
    let g = grads.linear_bias;
    if g != T::zero() {
        state.accumulators.linear_bias += g * g;
        model.linear_bias -= lr * g / (state.accumulators.linear_bias.sqrt() + eps);
    }
    Ok(())
}

/// Adds `scale * other` into `target`, parameter by parameter.
pub fn axpy_params<T: Real>(target: &mut Model<T>, scale: T, other: &Model<T>) -> Result<()> {
    if !target.same_shape(other) {
        return Err(Error::ShapeMismatch("parameter shapes disagree".into()));
    }
    for (layer, src) in target.convs.iter_mut().zip(&other.convs) {
        for (t, &s) in layer.weights.iter_mut().zip(&src.weights) {
            *t += scale * s;
        }
        for (t, &s) in layer.bias.iter_mut().zip(&src.bias) {
            *t += scale * s;
        }
    }
    for (t, &s) in target.linear_weights.iter_mut().zip(&other.linear_weights) {
        *t += scale * s;
    }
    target.linear_bias += scale * other.linear_bias;
    Ok(())
}

const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    architecture: Architecture,
    conv_weights: Vec<Vec<f64>>,
    conv_biases: Vec<Vec<f64>>,
    linear_weights: Vec<f64>,
    linear_bias: f64,
}

/// Writes the model as versioned JSON with 17-significant-digit decimals,
/// so parameters round-trip bitwise.
pub fn save_model<T: Real>(model: &Model<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if !model.all_finite() {
        return Err(Error::NonFinite("model parameter".into()));
    }
    let file = ModelFile {
        format_version: MODEL_FORMAT_VERSION,
        architecture: model.arch.clone(),
        conv_weights: model
            .convs
            .iter()
            .map(|l| l.weights.iter().map(|v| v.as_f64()).collect())
            .collect(),
        conv_biases: model
            .convs
            .iter()
            .map(|l| l.bias.iter().map(|v| v.as_f64()).collect())
            .collect(),
        linear_weights: model.linear_weights.iter().map(|v| v.as_f64()).collect(),
        linear_bias: model.linear_bias.as_f64(),
    };
    let mut buf = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut buf, crate::numfmt::G17Formatter::new());
    file.serialize(&mut ser)
        .map_err(|e| Error::MalformedFile {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?;
    buf.push(b'\n');
    let mut out =
        std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    out.write_all(&buf)
        .map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn load_model<T: Real>(path: impl AsRef<Path>) -> Result<Model<T>> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(display.clone(), e))?;
    let file: ModelFile = serde_json::from_str(&text).map_err(|e| Error::MalformedFile {
        path: display.clone(),
        msg: e.to_string(),
    })?;
    if file.format_version != MODEL_FORMAT_VERSION {
        return Err(Error::FormatVersion {
            found: file.format_version,
            expected: MODEL_FORMAT_VERSION,
        });
    }
    let mut model: Model<T> = Model::zeros(&file.architecture)?;
    if file.conv_weights.len() != model.convs.len() || file.conv_biases.len() != model.convs.len() {
        return Err(Error::MalformedFile {
            path: display,
            msg: format!(
                "expected {} conv layers, found {} weight and {} bias arrays",
                model.convs.len(),
                file.conv_weights.len(),
                file.conv_biases.len()
            ),
        });
    }
    for (i, layer) in model.convs.iter_mut().enumerate() {
        if file.conv_weights[i].len() != layer.weights.len()
            || file.conv_biases[i].len() != layer.bias.len()
        {
            return Err(Error::MalformedFile {
                path: display,
                msg: format!("conv layer {i} has the wrong parameter count"),
            });
        }
        for (w, &v) in layer.weights.iter_mut().zip(&file.conv_weights[i]) {
            *w = T::of(v);
        }
        for (b, &v) in layer.bias.iter_mut().zip(&file.conv_biases[i]) {
            *b = T::of(v);
        }
    }
    if file.linear_weights.len() != model.linear_weights.len() {
        return Err(Error::MalformedFile {
            path: display,
            msg: "linear head has the wrong parameter count".into(),
        });
    }
    for (w, &v) in model.linear_weights.iter_mut().zip(&file.linear_weights) {
        *w = T::of(v);
    }
    model.linear_bias = T::of(file.linear_bias);
    if !model.all_finite() {
        return Err(Error::NonFinite("model parameter in file".into()));
    }
    Ok(model)
}
