//! Axiomatic invariant signatures: Gaussian-derivative differential
//! invariants (curvature and its arc-length derivatives), the curvature
//! scale space, and the integral area invariant.

use crate::curve::PlanarCurve;
use crate::error::{Error, Result};
use crate::numfmt::g17;
use crate::scalar::Real;
use std::fmt;
use std::io::{BufRead, BufReader};
use std::path::Path;

/// Which invariant produced a signature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignatureMethod {
    /// Euclidean curvature κ.
    Curvature,
    /// Arc-length derivative κ_s (or a higher derivative, by repeated
    /// differentiation).
    CurvatureDerivative,
    /// Disk-interior intersection area.
    IntegralArea,
    /// Learned network response.
    Network,
}

impl SignatureMethod {
    pub fn tag(self) -> &'static str {
        match self {
            Self::Curvature => "curvature",
            Self::CurvatureDerivative => "curvature_s",
            Self::IntegralArea => "integral_area",
            Self::Network => "network",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "curvature" => Some(Self::Curvature),
            "curvature_s" => Some(Self::CurvatureDerivative),
            "integral_area" => Some(Self::IntegralArea),
            "network" => Some(Self::Network),
            _ => None,
        }
    }
}

impl fmt::Display for SignatureMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// One invariant value per curve point, aligned index-for-index.
///
/// `scale` is σ (in sample indices) for the differential invariants, the
/// disk radius r for the integral invariant, and the scale index for
/// network signatures.
#[derive(Debug, Clone, PartialEq)]
pub struct Signature<T> {
    pub values: Vec<T>,
    pub method: SignatureMethod,
    pub scale: T,
}

impl<T: Real> Signature<T> {
    pub fn new(values: Vec<T>, method: SignatureMethod, scale: T) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("empty signature".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "signature value at index {i} ({})",
                values[i]
            )));
        }
        if !scale.is_finite() || scale < T::zero() {
            return Err(Error::InvalidArgument(format!(
                "signature scale must be finite and >= 0, got {scale}"
            )));
        }
        Ok(Self {
            values,
            method,
            scale,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Sampled 1D Gaussian and its first two derivatives, truncated at
/// radius `ceil(4σ)`.
///
/// Taps are stored for direct use with [`correlate`], which slides the
/// window without flipping it; the derivative taps are therefore the
/// mirrored true convolution kernels, so that correlating `g1` with a
/// discrete ramp yields +1. After truncation the taps are repaired:
/// `g` is renormalized to unit sum, `g1`/`g2` are mean-corrected to zero
/// sum and then rescaled so their responses to `x` and `x²` are exactly
/// 1 and 2 (truncation alone leaves ~5e-4 of weighted mass missing,
/// which would bias every derivative estimate).
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianKernelSet<T> {
    pub sigma: T,
    pub g: Vec<T>,
    pub g1: Vec<T>,
    pub g2: Vec<T>,
}

impl<T: Real> GaussianKernelSet<T> {
    /// Support radius; the kernels have `2 * radius + 1` taps.
    pub fn radius(&self) -> usize {
        (self.g.len() - 1) / 2
    }
}

pub fn gaussian_derivative_kernels<T: Real>(sigma: T) -> Result<GaussianKernelSet<T>> {
    if !(sigma > T::zero()) || !sigma.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "kernel sigma must be finite and > 0, got {sigma}"
        )));
    }
    let radius = sigma.as_f64().mul_add(4.0, 0.0).ceil() as i64;
    let len = (2 * radius + 1) as usize;
    let root = T::of((2.0 * std::f64::consts::PI).sqrt());
    let s2 = sigma * sigma;
    let norm0 = T::one() / (sigma * root);
    let norm1 = T::one() / (sigma * s2 * root);
    let norm2 = T::one() / (sigma * s2 * s2 * root);

    let mut g = Vec::with_capacity(len);
    let mut g1 = Vec::with_capacity(len);
    let mut g2 = Vec::with_capacity(len);
    for k in -radius..=radius {
        let t = T::of(k as f64);
        let e = (-(t * t) / (s2 + s2)).exp();
        g.push(norm0 * e);
        // Mirrored for correlation: the true kernel is -x g(x)/sigma^2.
        g1.push(norm1 * t * e);
        g2.push(norm2 * (t * t - s2) * e);
    }

    let sum: T = g.iter().copied().sum();
    for v in &mut g {
        *v = *v / sum;
    }
    for taps in [&mut g1, &mut g2] {
        let mean = taps.iter().copied().sum::<T>() / T::of_usize(len);
        for v in taps.iter_mut() {
            *v -= mean;
        }
    }
    let ramp: T = g1
        .iter()
        .enumerate()
        .map(|(i, &w)| w * T::of((i as i64 - radius) as f64))
        .sum();
    for v in &mut g1 {
        *v = *v / ramp;
    }
    let quad: T = g2
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            let t = T::of((i as i64 - radius) as f64);
            w * t * t
        })
        .sum();
    let two = T::of(2.0);
    for v in &mut g2 {
        *v = *v * two / quad;
    }

    Ok(GaussianKernelSet { sigma, g, g1, g2 })
}

/// Slides `taps` over `signal` without flipping (cross-correlation):
/// `out[i] = Σ_k taps[k] · signal[i + k - radius]`.
///
/// Out-of-range indices wrap for closed signals; open signals continue by
/// point reflection through the endpoint (`s[-k] = 2 s[0] - s[k]`), which
/// extends straight runs exactly and so adds no spurious boundary
/// curvature. Values within one radius of an open end are still
/// extrapolations and should be treated as low-confidence.
pub fn correlate<T: Real>(signal: &[T], taps: &[T], closed: bool) -> Result<Vec<T>> {
    let n = signal.len() as i64;
    let radius = (taps.len() / 2) as i64;
    if taps.len() % 2 != 1 {
        return Err(Error::InvalidArgument("kernel length must be odd".into()));
    }
    if n <= 2 * radius {
        return Err(Error::InvalidArgument(format!(
            "signal length {n} not greater than kernel support {}",
            2 * radius + 1
        )));
    }
    let two = T::of(2.0);
    let fetch = |idx: i64| -> T {
        if (0..n).contains(&idx) {
            signal[idx as usize]
        } else if closed {
            signal[idx.rem_euclid(n) as usize]
        } else if idx < 0 {
            two * signal[0] - signal[(-idx) as usize]
        } else {
            two * signal[(n - 1) as usize] - signal[(2 * (n - 1) - idx) as usize]
        }
    };
    let mut out = Vec::with_capacity(signal.len());
    for i in 0..n {
        let mut acc = T::zero();
        for (k, &w) in taps.iter().enumerate() {
            acc += w * fetch(i + k as i64 - radius);
        }
        out.push(acc);
    }
    Ok(out)
}

/// First and second index-derivatives of both coordinate channels, plus the
/// parameterization speed `|C_p|`.
struct CurveDerivatives<T> {
    xp: Vec<T>,
    yp: Vec<T>,
    xpp: Vec<T>,
    ypp: Vec<T>,
    speed: Vec<T>,
}

fn curve_derivatives<T: Real>(
    curve: &PlanarCurve<T>,
    kernels: &GaussianKernelSet<T>,
) -> Result<CurveDerivatives<T>> {
    let xs: Vec<T> = curve.points().iter().map(|p| p[0]).collect();
    let ys: Vec<T> = curve.points().iter().map(|p| p[1]).collect();
    let closed = curve.is_closed();
    let xp = correlate(&xs, &kernels.g1, closed)?;
    let yp = correlate(&ys, &kernels.g1, closed)?;
    let xpp = correlate(&xs, &kernels.g2, closed)?;
    let ypp = correlate(&ys, &kernels.g2, closed)?;
    let mut speed = Vec::with_capacity(xp.len());
    for i in 0..xp.len() {
        let s = (xp[i] * xp[i] + yp[i] * yp[i]).sqrt();
        if s < T::of(1e-12) {
            return Err(Error::DegenerateParameterization { index: i });
        }
        speed.push(s);
    }
    Ok(CurveDerivatives {
        xp,
        yp,
        xpp,
        ypp,
        speed,
    })
}

/// Euclidean curvature κ = (x_p y_pp − y_p x_pp) / (x_p² + y_p²)^{3/2},
/// with the index derivatives estimated by Gaussian-derivative filtering
/// at scale `sigma` (in sample indices).
///
/// The curve should be (approximately) uniformly resampled so that index
/// smoothing approximates arc-length smoothing. κ is positive where a
/// counterclockwise-traversed curve is convex.
pub fn euclidean_curvature<T: Real>(curve: &PlanarCurve<T>, sigma: T) -> Result<Signature<T>> {
    let kernels = gaussian_derivative_kernels(sigma)?;
    let d = curve_derivatives(curve, &kernels)?;
    let values = (0..curve.len())
        .map(|i| {
            let num = d.xp[i] * d.ypp[i] - d.yp[i] * d.xpp[i];
            num / (d.speed[i] * d.speed[i] * d.speed[i])
        })
        .collect();
    Signature::new(values, SignatureMethod::Curvature, sigma)
}

/// Differentiates a signature with respect to arc length:
/// `(dσ/dp) / (ds/dp)`, both derivatives estimated with the same
/// Gaussian-derivative kernels at scale `sigma`. Applying this to κ gives
/// κ_s; applying it again gives κ_ss, and so on.
pub fn differentiate_wrt_arclength<T: Real>(
    sig: &Signature<T>,
    curve: &PlanarCurve<T>,
    sigma: T,
) -> Result<Signature<T>> {
    if sig.len() != curve.len() {
        return Err(Error::ShapeMismatch(format!(
            "signature length {} vs curve length {}",
            sig.len(),
            curve.len()
        )));
    }
    let kernels = gaussian_derivative_kernels(sigma)?;
    let d = curve_derivatives(curve, &kernels)?;
    let dsig = correlate(&sig.values, &kernels.g1, curve.is_closed())?;
    let values = dsig
        .iter()
        .zip(&d.speed)
        .map(|(&a, &s)| a / s)
        .collect();
    Signature::new(values, SignatureMethod::CurvatureDerivative, sigma)
}

/// Curvature at every scale in `sigmas` (ascending); larger σ plays the
/// role of evolution time in the scale space.
pub fn curvature_scale_space<T: Real>(
    curve: &PlanarCurve<T>,
    sigmas: &[T],
) -> Result<Vec<Signature<T>>> {
    if sigmas.is_empty() {
        return Err(Error::InvalidArgument("no scales given".into()));
    }
    for w in sigmas.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::InvalidArgument(format!(
                "scales must be strictly ascending, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    sigmas
        .iter()
        .map(|&s| euclidean_curvature(curve, s))
        .collect()
}

/// What to do when the polygon whose interior defines the integral
/// invariant intersects itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelfIntersectionPolicy {
    /// Evaluate anyway; self-overlapping lobes contribute with winding
    /// sign. Noise-corrupted contours routinely self-intersect at a tiny
    /// scale, so this is the default.
    #[default]
    BestEffort,
    /// Scan all edge pairs and reject self-intersecting input.
    Reject,
}

/// Area of `Disk(P_i, r) ∩ Interior(curve)` for every curve point, exact
/// for the polygonal interior.
///
/// Each polygon edge contributes a chord/arc term to the Green's-theorem
/// line integral: the part of the edge inside the disk contributes a
/// triangle term `cross(p, q)/2`, and the angular gaps to the parts
/// outside contribute circular-sector terms `r² Δθ / 2`. Summed around the
/// closed traversal the sector terms reconstruct every boundary arc of the
/// intersection, including full winding when the disk is entirely inside.
pub fn integral_area_invariant<T: Real>(curve: &PlanarCurve<T>, r: T) -> Result<Signature<T>> {
    integral_area_invariant_with_policy(curve, r, SelfIntersectionPolicy::BestEffort)
}

pub fn integral_area_invariant_with_policy<T: Real>(
    curve: &PlanarCurve<T>,
    r: T,
    policy: SelfIntersectionPolicy,
) -> Result<Signature<T>> {
    if !curve.is_closed() {
        return Err(Error::InvalidCurve(
            "integral area invariant needs a closed curve (open curves have no interior)".into(),
        ));
    }
    if !(r > T::zero()) || !r.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "disk radius must be finite and > 0, got {r}"
        )));
    }
    if policy == SelfIntersectionPolicy::Reject {
        check_simple(curve)?;
    }
    let orientation = if curve.signed_area()? >= T::zero() {
        T::one()
    } else {
        -T::one()
    };
    let n = curve.len();
    let max_area = T::of(std::f64::consts::PI) * r * r;
    let values = (0..n)
        .map(|i| {
            let c = curve.point(i);
            let mut acc = T::zero();
            for j in 0..n {
                let p = curve.point(j);
                let q = curve.point((j + 1) % n);
                acc += edge_disk_term([p[0] - c[0], p[1] - c[1]], [q[0] - c[0], q[1] - c[1]], r);
            }
            (orientation * acc).clamp(T::zero(), max_area)
        })
        .collect();
    Signature::new(values, SignatureMethod::IntegralArea, r)
}

/// Green's-theorem contribution of the directed edge `a -> b` (relative to
/// the disk center) against a disk of radius `r` at the origin.
fn edge_disk_term<T: Real>(a: [T; 2], b: [T; 2], r: T) -> T {
    let half = T::of(0.5);
    let sector = |u: [T; 2], v: [T; 2]| -> T {
        let angle = (u[0] * v[1] - u[1] * v[0]).atan2(u[0] * v[0] + u[1] * v[1]);
        half * r * r * angle
    };
    let chord = |u: [T; 2], v: [T; 2]| -> T { half * (u[0] * v[1] - u[1] * v[0]) };

    let r2 = r * r;
    let a_in = a[0] * a[0] + a[1] * a[1] <= r2;
    let b_in = b[0] * b[0] + b[1] * b[1] <= r2;
    if a_in && b_in {
        return chord(a, b);
    }

    // Intersections of the segment a + t(b-a), t in [0,1], with the circle.
    let d = [b[0] - a[0], b[1] - a[1]];
    let qa = d[0] * d[0] + d[1] * d[1];
    let qb = a[0] * d[0] + a[1] * d[1];
    let qc = a[0] * a[0] + a[1] * a[1] - r2;
    let disc = qb * qb - qa * qc;
    let at = |t: T| -> [T; 2] { [a[0] + t * d[0], a[1] + t * d[1]] };
    if disc > T::zero() {
        let root = disc.sqrt();
        let t0 = (-qb - root) / qa;
        let t1 = (-qb + root) / qa;
        if a_in {
            // Leaves the disk at t1.
            let q = at(t1.clamp(T::zero(), T::one()));
            return chord(a, q) + sector(q, b);
        }
        if b_in {
            let p = at(t0.clamp(T::zero(), T::one()));
            return sector(a, p) + chord(p, b);
        }
        if t0 > T::zero() && t1 < T::one() && t0 < t1 {
            let p = at(t0);
            let q = at(t1);
            return sector(a, p) + chord(p, q) + sector(q, b);
        }
    }
    sector(a, b)
}

/// O(E²) pairwise segment-intersection scan (adjacent edges excluded).
pub(crate) fn check_simple<T: Real>(curve: &PlanarCurve<T>) -> Result<()> {
    let n = curve.len();
    let orient = |a: [T; 2], b: [T; 2], c: [T; 2]| -> T {
        (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    };
    for i in 0..n {
        let a0 = curve.point(i);
        let a1 = curve.point((i + 1) % n);
        for j in i + 1..n {
            // Skip edges sharing a vertex with edge i.
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let b0 = curve.point(j);
            let b1 = curve.point((j + 1) % n);
            let d1 = orient(a0, a1, b0);
            let d2 = orient(a0, a1, b1);
            let d3 = orient(b0, b1, a0);
            let d4 = orient(b0, b1, a1);
            if ((d1 > T::zero() && d2 < T::zero()) || (d1 < T::zero() && d2 > T::zero()))
                && ((d3 > T::zero() && d4 < T::zero()) || (d3 < T::zero() && d4 > T::zero()))
            {
                return Err(Error::InvalidCurve(format!(
                    "self-intersection between edges {i} and {j}"
                )));
            }
        }
    }
    Ok(())
}

/// Writes signatures as CSV rows `index,value,method,scale`; the index
/// restarts at 0 for each signature, so several signatures (for example a
/// scale space) can share one file.
pub fn write_signatures<T: Real>(path: impl AsRef<Path>, sigs: &[Signature<T>]) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("index,value,method,scale\n");
    for sig in sigs {
        for (i, &v) in sig.values.iter().enumerate() {
            out.push_str(&format!("{i},{},{},{}\n", g17(v), sig.method, g17(sig.scale)));
        }
    }
    std::fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Reads signatures written by [`write_signatures`]; consecutive rows with
/// the same method and scale (and a restarting index) form one signature.
pub fn read_signatures<T: Real>(path: impl AsRef<Path>) -> Result<Vec<Signature<T>>> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|e| Error::io(display.clone(), e))?;
    let mut lines = BufReader::new(file).lines().enumerate();
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: display.clone(),
        line: line + 1,
        msg,
    };

    let header = match lines.next() {
        Some((i, r)) => r
            .map_err(|e| Error::io(display.clone(), e))
            .and_then(|s| Ok((i, s)))?,
        None => {
            return Err(Error::MalformedFile {
                path: display,
                msg: "empty file".into(),
            })
        }
    };
    if header.1.trim() != "index,value,method,scale" {
        return Err(parse_err(header.0, format!("bad header {:?}", header.1)));
    }

    let mut sigs: Vec<Signature<T>> = Vec::new();
    let mut current: Option<(SignatureMethod, T, Vec<T>)> = None;
    for (lineno, line) in lines {
        let line = line.map_err(|e| Error::io(display.clone(), e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(parse_err(lineno, format!("expected 4 fields, got {}", fields.len())));
        }
        let index: usize = fields[0]
            .parse()
            .map_err(|e| parse_err(lineno, format!("bad index: {e}")))?;
        let value: f64 = fields[1]
            .parse()
            .map_err(|e| parse_err(lineno, format!("bad value: {e}")))?;
        let method = SignatureMethod::from_tag(fields[2])
            .ok_or_else(|| parse_err(lineno, format!("unknown method {:?}", fields[2])))?;
        let scale: f64 = fields[3]
            .parse()
            .map_err(|e| parse_err(lineno, format!("bad scale: {e}")))?;

        let start_new = match &current {
            None => true,
            Some((m, s, values)) => {
                *m != method || s.as_f64() != scale || index != values.len()
            }
        };
        if start_new {
            if index != 0 {
                return Err(parse_err(lineno, format!("expected index 0, got {index}")));
            }
            if let Some((m, s, values)) = current.take() {
                sigs.push(Signature::new(values, m, s)?);
            }
            current = Some((method, T::of(scale), Vec::new()));
        }
        current.as_mut().unwrap().2.push(T::of(value));
    }
    if let Some((m, s, values)) = current {
        sigs.push(Signature::new(values, m, s)?);
    }
    if sigs.is_empty() {
        return Err(Error::MalformedFile {
            path: display,
            msg: "no signature rows".into(),
        });
    }
    Ok(sigs)
}
