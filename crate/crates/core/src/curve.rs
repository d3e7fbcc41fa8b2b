//! Planar curve representation and geometry: arc length, uniform
//! resampling, normalization, random rigid transforms, Gaussian noise,
//! decimation and LOESS smoothing.
//!
//! Curves are polylines. Every integral quantity uses piecewise-linear
//! quadrature over the segments, and closed curves wrap their indexing
//! (the closing segment from the last point back to the first is implicit).

use crate::error::{Error, Result};
use crate::scalar::Real;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::collections::BTreeSet;

/// An ordered sequence of distinct 2D points, open or closed.
///
/// Invariants enforced at construction: all coordinates finite, no two
/// consecutive points identical, and for closed curves the first and last
/// points are distinct (closure is implicit, never duplicated).
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarCurve<T> {
    points: Vec<[T; 2]>,
    closed: bool,
}

impl<T> PlanarCurve<T> {
    pub fn points(&self) -> &[[T; 2]] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }
}

impl<T: Copy> PlanarCurve<T> {
    pub fn point(&self, i: usize) -> [T; 2] {
        self.points[i]
    }
}

impl<T: Real> PlanarCurve<T> {
    pub fn new(points: Vec<[T; 2]>, closed: bool) -> Result<Self> {
        let min_points = if closed { 3 } else { 2 };
        if points.len() < min_points {
            return Err(Error::InvalidCurve(format!(
                "need at least {} points for {} curve, got {}",
                min_points,
                if closed { "a closed" } else { "an open" },
                points.len()
            )));
        }
        for (i, p) in points.iter().enumerate() {
            if !p[0].is_finite() || !p[1].is_finite() {
                return Err(Error::InvalidCurve(format!(
                    "non-finite coordinate at point {i}"
                )));
            }
        }
        let n = points.len();
        let pairs = if closed { n } else { n - 1 };
        for i in 0..pairs {
            let j = (i + 1) % n;
            if points[i] == points[j] {
                return Err(Error::InvalidCurve(format!(
                    "consecutive identical points at indices {i} and {j}"
                )));
            }
        }
        Ok(Self { points, closed })
    }

    /// Builds without validation; for internal use by operations whose
    /// outputs are valid by construction (isometries, smoothing, noise).
    pub(crate) fn from_parts(points: Vec<[T; 2]>, closed: bool) -> Self {
        Self { points, closed }
    }

    /// Cumulative arc length at every point, plus the total length.
    ///
    /// `values[i]` is the polyline length from the first point to point `i`
    /// (so `values[0] = 0`); for closed curves `total` adds the implicit
    /// segment from the last point back to the first.
    pub fn cumulative_arclength(&self) -> Result<ArcLengthProfile<T>> {
        if self.points.len() < 2 {
            return Err(Error::InvalidCurve(
                "arc length needs at least 2 points".into(),
            ));
        }
        let mut values = Vec::with_capacity(self.points.len());
        let mut acc = T::zero();
        values.push(acc);
        for w in self.points.windows(2) {
            acc = acc + dist(w[0], w[1]);
            values.push(acc);
        }
        let mut total = acc;
        if self.closed {
            total = total + dist(self.points[self.points.len() - 1], self.points[0]);
        }
        if total <= T::zero() {
            return Err(Error::InvalidCurve("zero total arc length".into()));
        }
        Ok(ArcLengthProfile { values, total })
    }

    /// Resamples to `n` points at equal arc-length spacing by linear
    /// interpolation along the polyline. The first output point coincides
    /// with the first input point; the closed flag is preserved.
    pub fn resample_uniform(&self, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidArgument(format!(
                "resample target must be at least 3, got {n}"
            )));
        }
        let prof = self.cumulative_arclength()?;
        let total = prof.total;
        let step = if self.closed {
            total / T::of_usize(n)
        } else {
            total / T::of_usize(n - 1)
        };

        // Segment j runs from point j to point j+1 (to point 0 for the
        // closing segment of a closed curve).
        let n_seg = if self.closed {
            self.points.len()
        } else {
            self.points.len() - 1
        };
        let seg_end = |j: usize| -> T {
            if j + 1 < prof.values.len() {
                prof.values[j + 1]
            } else {
                total
            }
        };

        let mut out = Vec::with_capacity(n);
        let mut j = 0usize;
        for i in 0..n {
            let s = (step * T::of_usize(i)).min(total);
            while j + 1 < n_seg && seg_end(j) < s {
                j += 1;
            }
            let s0 = prof.values[j];
            let s1 = seg_end(j);
            let a = self.points[j];
            let b = self.points[(j + 1) % self.points.len()];
            let span = s1 - s0;
            let t = if span > T::zero() {
                ((s - s0) / span).clamp(T::zero(), T::one())
            } else {
                T::zero()
            };
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
        PlanarCurve::new(out, self.closed)
    }

    /// The centroid and the standard deviation of the 2N stacked
    /// coordinates about it — the parameters [`normalize`](Self::normalize)
    /// divides out. Exposed so callers can map external points into a
    /// normalized curve's frame.
    pub fn centroid_and_scale(&self) -> ([T; 2], T) {
        let n = T::of_usize(self.points.len());
        let mut cx = T::zero();
        let mut cy = T::zero();
        for p in &self.points {
            cx += p[0];
            cy += p[1];
        }
        cx = cx / n;
        cy = cy / n;
        let mut ss = T::zero();
        for p in &self.points {
            let dx = p[0] - cx;
            let dy = p[1] - cy;
            ss += dx * dx + dy * dy;
        }
        ([cx, cy], (ss / (n + n)).sqrt())
    }

    /// Centers the curve on its centroid and rescales so the standard
    /// deviation of the 2N stacked coordinates is 1, which removes
    /// translation and uniform scale.
    pub fn normalize(&self) -> Result<Self> {
        let ([cx, cy], std) = self.centroid_and_scale();
        if std <= T::zero() {
            return Err(Error::ZeroVariance);
        }
        let points = self
            .points
            .iter()
            .map(|p| [(p[0] - cx) / std, (p[1] - cy) / std])
            .collect();
        Ok(Self::from_parts(points, self.closed))
    }

    /// Applies a seeded random reflection, rotation and translation.
    /// See [`EuclideanTransform::random`] for the sampling ranges.
    pub fn random_euclidean_transform(&self, seed: u64) -> Self {
        EuclideanTransform::random(seed).apply(self)
    }

    /// Perturbs every coordinate independently by `N(0, sigma^2)`.
    /// `sigma = 0` returns the input unchanged.
    pub fn add_gaussian_noise(&self, sigma: T, seed: u64) -> Result<Self> {
        if sigma < T::zero() || !sigma.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "noise sigma must be finite and >= 0, got {sigma}"
            )));
        }
        if sigma == T::zero() {
            return Ok(self.clone());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = self
            .points
            .iter()
            .map(|p| {
                let dx: f64 = StandardNormal.sample(&mut rng);
                let dy: f64 = StandardNormal.sample(&mut rng);
                [p[0] + sigma * T::of(dx), p[1] + sigma * T::of(dy)]
            })
            .collect();
        Ok(Self::from_parts(points, self.closed))
    }

    /// Keeps `round(keep_fraction * N)` points: every anchor index plus a
    /// uniformly random subset of the rest, in original traversal order.
    pub fn decimate(&self, keep_fraction: f64, anchors: &[usize], seed: u64) -> Result<Self> {
        if !(keep_fraction > 0.0 && keep_fraction <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "keep_fraction must be in (0, 1], got {keep_fraction}"
            )));
        }
        let n = self.points.len();
        let anchor_set: BTreeSet<usize> = anchors.iter().copied().collect();
        if let Some(&bad) = anchor_set.iter().find(|&&i| i >= n) {
            return Err(Error::InvalidArgument(format!(
                "anchor index {bad} out of range for {n} points"
            )));
        }
        let keep = (keep_fraction * n as f64).round() as usize;
        if keep < anchor_set.len() + 3 {
            return Err(Error::InvalidArgument(format!(
                "decimation too aggressive: keeping {keep} of {n} points with {} anchors",
                anchor_set.len()
            )));
        }
        if keep >= n {
            return Ok(self.clone());
        }

        let mut candidates: Vec<usize> = (0..n).filter(|i| !anchor_set.contains(i)).collect();
        let extra = keep - anchor_set.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Partial Fisher-Yates: the first `extra` entries are a uniform sample.
        for i in 0..extra {
            let j = i + rng.random_range(0..candidates.len() - i);
            candidates.swap(i, j);
        }
        let mut kept: BTreeSet<usize> = anchor_set;
        kept.extend(candidates[..extra].iter().copied());
        let points = kept.iter().map(|&i| self.points[i]).collect();
        PlanarCurve::new(points, self.closed)
    }

    /// LOESS smoothing: each coordinate channel is replaced by the value of
    /// a tricube-weighted degree-2 polynomial fit over the `round(span * N)`
    /// index-nearest points (wrapping when closed, clamped when open).
    pub fn smooth_loess(&self, span_fraction: f64) -> Result<Self> {
        if !(span_fraction > 0.0 && span_fraction < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "span fraction must be in (0, 1), got {span_fraction}"
            )));
        }
        let n = self.points.len();
        let w = (span_fraction * n as f64).round() as usize;
        if w < 5 {
            return Err(Error::InvalidArgument(format!(
                "smoothing window {w} too small (need at least 5 points)"
            )));
        }
        let half = (w - 1) / 2;

        let mut out = vec![[T::zero(); 2]; n];
        if self.closed {
            // One stencil serves every point: offsets are the same everywhere.
            let offsets: Vec<isize> = (0..w).map(|j| j as isize - half as isize).collect();
            let coeffs = loess_coefficients::<T>(&offsets, 0)?;
            for i in 0..n {
                let mut acc = [T::zero(); 2];
                for (k, &off) in offsets.iter().enumerate() {
                    let idx = (i as isize + off).rem_euclid(n as isize) as usize;
                    acc[0] += coeffs[k] * self.points[idx][0];
                    acc[1] += coeffs[k] * self.points[idx][1];
                }
                out[i] = acc;
            }
        } else {
            for i in 0..n {
                let start = (i as isize - half as isize).clamp(0, (n - w) as isize) as usize;
                let offsets: Vec<isize> =
                    (start..start + w).map(|j| j as isize - i as isize).collect();
                let coeffs = loess_coefficients::<T>(&offsets, 0)?;
                let mut acc = [T::zero(); 2];
                for (k, &off) in offsets.iter().enumerate() {
                    let idx = (i as isize + off) as usize;
                    acc[0] += coeffs[k] * self.points[idx][0];
                    acc[1] += coeffs[k] * self.points[idx][1];
                }
                out[i] = acc;
            }
        }
        Ok(Self::from_parts(out, self.closed))
    }

    /// Shoelace signed area of the closed polygon (positive when
    /// counterclockwise).
    pub fn signed_area(&self) -> Result<T> {
        if !self.closed {
            return Err(Error::InvalidCurve(
                "signed area requires a closed curve".into(),
            ));
        }
        let n = self.points.len();
        let mut acc = T::zero();
        for i in 0..n {
            let a = self.points[i];
            let b = self.points[(i + 1) % n];
            acc += a[0] * b[1] - b[0] * a[1];
        }
        Ok(acc * T::of(0.5))
    }

    /// Returns a copy traversed counterclockwise (positive signed area),
    /// keeping the first point first. Open curves are returned unchanged.
    pub fn oriented_ccw(&self) -> Result<Self> {
        if !self.closed {
            return Ok(self.clone());
        }
        if self.signed_area()? >= T::zero() {
            return Ok(self.clone());
        }
        let n = self.points.len();
        let mut points = Vec::with_capacity(n);
        points.push(self.points[0]);
        points.extend(self.points[1..n].iter().rev().copied());
        Ok(Self::from_parts(points, true))
    }

    /// Diagonal of the axis-aligned bounding box (cheap but orientation
    /// dependent; prefer [`diameter`](Self::diameter) when rotation
    /// invariance matters).
    pub fn bbox_diagonal(&self) -> T {
        let mut min = self.points[0];
        let mut max = self.points[0];
        for p in &self.points {
            min[0] = min[0].min(p[0]);
            min[1] = min[1].min(p[1]);
            max[0] = max[0].max(p[0]);
            max[1] = max[1].max(p[1]);
        }
        dist(min, max)
    }

    /// The curve's diameter: the largest distance between any two of its
    /// points. Rotation invariant, which makes it the right length scale
    /// for integral-invariant radii.
    pub fn diameter(&self) -> T {
        let mut best = T::zero();
        for (i, &a) in self.points.iter().enumerate() {
            for &b in &self.points[i + 1..] {
                best = best.max(dist(a, b));
            }
        }
        best
    }
}

#[inline]
fn dist<T: Real>(a: [T; 2], b: [T; 2]) -> T {
    let dx = b[0] - a[0];
    let dy = b[1] - a[1];
    (dx * dx + dy * dy).sqrt()
}

/// Filter coefficients of the tricube-weighted degree-2 fit over the given
/// index offsets, evaluated at offset `query`: smoothed = sum(c_k * y_k).
fn loess_coefficients<T: Real>(offsets: &[isize], query: isize) -> Result<Vec<T>> {
    let h = offsets
        .iter()
        .map(|&o| (o - query).unsigned_abs())
        .max()
        .unwrap_or(0)
        .max(1) as f64;
    let ts: Vec<T> = offsets.iter().map(|&o| T::of((o - query) as f64)).collect();
    let weights: Vec<T> = offsets
        .iter()
        .map(|&o| {
            let u = ((o - query) as f64).abs() / h;
            T::of((1.0 - u.powi(3)).powi(3))
        })
        .collect();

    // Normal equations of the weighted fit a0 + a1 t + a2 t^2; the smoothed
    // value is a0 = z . (A^T W y) with z the first row of M^-1.
    let mut m = [[T::zero(); 3]; 3];
    for (k, &t) in ts.iter().enumerate() {
        let wgt = weights[k];
        let pow = [T::one(), t, t * t, t * t * t, t * t * t * t];
        for r in 0..3 {
            for c in 0..3 {
                m[r][c] += wgt * pow[r + c];
            }
        }
    }
    let z = solve3(m, [T::one(), T::zero(), T::zero()]).ok_or_else(|| {
        Error::InvalidArgument("degenerate smoothing window (singular fit)".into())
    })?;
    Ok(ts
        .iter()
        .zip(&weights)
        .map(|(&t, &wgt)| wgt * (z[0] + z[1] * t + z[2] * t * t))
        .collect())
}

/// 3x3 linear solve with partial pivoting; `None` when singular.
fn solve3<T: Real>(mut m: [[T; 3]; 3], mut b: [T; 3]) -> Option<[T; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| {
            m[i][col]
                .abs()
                .partial_cmp(&m[j][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if m[pivot][col].abs() <= T::zero() {
            return None;
        }
        m.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for c in col..3 {
                let v = m[col][c];
                m[row][c] -= f * v;
            }
            let v = b[col];
            b[row] -= f * v;
        }
    }
    let mut x = [T::zero(); 3];
    for row in (0..3).rev() {
        let mut acc = b[row];
        for c in row + 1..3 {
            acc -= m[row][c] * x[c];
        }
        x[row] = acc / m[row][row];
    }
    Some(x)
}

/// Cumulative arc length along a polyline.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcLengthProfile<T> {
    /// Arc length from the first point to each point; `values[0] = 0` and
    /// the sequence is non-decreasing.
    pub values: Vec<T>,
    /// Total length, including the closing segment for closed curves.
    pub total: T,
}

/// A rigid motion of the plane with an optional reflection: reflection
/// about the x axis first, then rotation, then translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EuclideanTransform<T> {
    pub reflect: bool,
    pub angle: T,
    pub translation: [T; 2],
}

impl<T: Real> EuclideanTransform<T> {
    pub fn identity() -> Self {
        Self {
            reflect: false,
            angle: T::zero(),
            translation: [T::zero(); 2],
        }
    }

    /// Samples a transform: reflection with probability 1/2, angle uniform
    /// on [-pi, pi], translation components uniform on [-1, 1].
    pub fn random(seed: u64) -> Self {
        Self::sample(&mut ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn sample(rng: &mut impl Rng) -> Self {
        let reflect = rng.random::<f64>() < 0.5;
        let angle = rng.random::<f64>() * 2.0 * std::f64::consts::PI - std::f64::consts::PI;
        let tx = rng.random::<f64>() * 2.0 - 1.0;
        let ty = rng.random::<f64>() * 2.0 - 1.0;
        Self {
            reflect,
            angle: T::of(angle),
            translation: [T::of(tx), T::of(ty)],
        }
    }

    pub fn apply_point(&self, p: [T; 2]) -> [T; 2] {
        let y = if self.reflect { -p[1] } else { p[1] };
        let (sin, cos) = self.angle.sin_cos();
        [
            cos * p[0] - sin * y + self.translation[0],
            sin * p[0] + cos * y + self.translation[1],
        ]
    }

    pub fn apply(&self, curve: &PlanarCurve<T>) -> PlanarCurve<T> {
        let points = curve.points().iter().map(|&p| self.apply_point(p)).collect();
        PlanarCurve::from_parts(points, curve.is_closed())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(n: usize, radius: f64) -> PlanarCurve<f64> {
        let points = (0..n)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                [radius * t.cos(), radius * t.sin()]
            })
            .collect();
        PlanarCurve::new(points, true).unwrap()
    }

    fn blob(n: usize) -> PlanarCurve<f64> {
        let points = (0..n)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                let r = 1.0 + 0.3 * (3.0 * t).cos() + 0.15 * (5.0 * t + 0.7).sin();
                [r * t.cos(), r * t.sin()]
            })
            .collect();
        PlanarCurve::new(points, true).unwrap()
    }

    fn max_pairwise_distance_change(a: &PlanarCurve<f64>, b: &PlanarCurve<f64>) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..a.len() {
            for j in i + 1..a.len() {
                let da = dist(a.point(i), a.point(j));
                let db = dist(b.point(i), b.point(j));
                worst = worst.max((da - db).abs());
            }
        }
        worst
    }

    #[test]
    fn rejects_too_few_points() {
        assert!(PlanarCurve::new(vec![[0.0f64, 0.0]], false).is_err());
        assert!(PlanarCurve::new(vec![[0.0f64, 0.0], [1.0, 0.0]], true).is_err());
        assert!(PlanarCurve::new(vec![[0.0f64, 0.0], [1.0, 0.0]], false).is_ok());
    }

    #[test]
    fn rejects_consecutive_duplicates_and_nonfinite() {
        assert!(PlanarCurve::new(vec![[0.0f64, 0.0], [0.0, 0.0], [1.0, 0.0]], false).is_err());
        assert!(PlanarCurve::new(vec![[0.0f64, 0.0], [f64::NAN, 0.0], [1.0, 0.0]], false).is_err());
        // Closed curve whose last point equals the first: closure must be implicit.
        assert!(
            PlanarCurve::new(vec![[0.0f64, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 0.0]], true)
                .is_err()
        );
    }

    #[test]
    fn arclength_unit_circle() {
        let prof = circle(500, 1.0).cumulative_arclength().unwrap();
        let rel = (prof.total - 2.0 * std::f64::consts::PI).abs() / (2.0 * std::f64::consts::PI);
        assert!(rel < 1e-3, "relative error {rel}");
    }

    #[test]
    fn arclength_segment_three_four_five() {
        let seg = PlanarCurve::new(vec![[0.0f64, 0.0], [3.0, 4.0]], false).unwrap();
        let prof = seg.cumulative_arclength().unwrap();
        assert_eq!(prof.total, 5.0);
        assert_eq!(prof.values, vec![0.0, 5.0]);
    }

    #[test]
    fn arclength_unit_square_perimeter() {
        let sq = PlanarCurve::new(
            vec![[0.0f64, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            true,
        )
        .unwrap();
        assert_eq!(sq.cumulative_arclength().unwrap().total, 4.0);
    }

    #[test]
    fn resample_count_and_equal_gaps() {
        let out = blob(777).resample_uniform(500).unwrap();
        assert_eq!(out.len(), 500);
        // Verify equal spacing by measuring arc positions along the original
        // polyline: every output point lies on an original segment.
        let orig = blob(777);
        let prof = orig.cumulative_arclength().unwrap();
        let n = orig.len();
        let arc_pos = |p: [f64; 2]| -> f64 {
            let mut best = (f64::INFINITY, 0.0);
            for j in 0..n {
                let a = orig.point(j);
                let b = orig.point((j + 1) % n);
                let seg = dist(a, b);
                let t = (((p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1]))
                    / (seg * seg))
                    .clamp(0.0, 1.0);
                let proj = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
                let d = dist(p, proj);
                if d < best.0 {
                    best = (d, prof.values[j] + t * seg);
                }
            }
            assert!(best.0 < 1e-9, "resampled point not on the original polyline");
            best.1
        };
        let step = prof.total / 500.0;
        let mut gaps = Vec::new();
        for w in out.points().windows(2) {
            let mut gap = arc_pos(w[1]) - arc_pos(w[0]);
            if gap < 0.0 {
                gap += prof.total;
            }
            gaps.push(gap);
        }
        for gap in gaps {
            assert!((gap - step).abs() / step < 1e-9, "gap {gap} vs step {step}");
        }
    }

    #[test]
    fn resample_dense_circle_stays_on_circle() {
        let out = circle(10_000, 1.0).resample_uniform(100).unwrap();
        for p in out.points() {
            let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
            assert!((r - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn resample_fixed_point_on_equally_spaced_input() {
        // A regular polygon already has equal chord gaps, so resampling to
        // the same count must return its vertices (up to rounding). Exact
        // idempotence does not hold for uneven polylines: chords cut corners,
        // so a second pass redistributes points slightly.
        let base = circle(500, 1.0);
        let out = base.resample_uniform(500).unwrap();
        for (a, b) in base.points().iter().zip(out.points()) {
            assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
        }
        assert_eq!(blob(613).resample_uniform(500).unwrap().point(0), blob(613).point(0));
    }

    #[test]
    fn normalize_centroid_and_std() {
        let c = blob(400).normalize().unwrap();
        let n = c.len() as f64;
        let (mut sx, mut sy, mut ss) = (0.0, 0.0, 0.0);
        for p in c.points() {
            sx += p[0];
            sy += p[1];
            ss += p[0] * p[0] + p[1] * p[1];
        }
        assert!((sx / n).abs() < 1e-12);
        assert!((sy / n).abs() < 1e-12);
        assert!(((ss / (2.0 * n)).sqrt() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normalize_invariant_to_scale_and_translation() {
        let base = blob(300);
        let scaled = PlanarCurve::new(
            base.points().iter().map(|p| [7.0 * p[0], 7.0 * p[1]]).collect(),
            true,
        )
        .unwrap();
        let shifted = PlanarCurve::new(
            base.points()
                .iter()
                .map(|p| [p[0] + 100.0, p[1] - 50.0])
                .collect(),
            true,
        )
        .unwrap();
        let n0 = base.normalize().unwrap();
        for other in [scaled.normalize().unwrap(), shifted.normalize().unwrap()] {
            for (a, b) in n0.points().iter().zip(other.points()) {
                assert!((a[0] - b[0]).abs() < 1e-9 && (a[1] - b[1]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn normalize_is_a_projection() {
        let once = blob(250).normalize().unwrap();
        let twice = once.normalize().unwrap();
        for (a, b) in once.points().iter().zip(twice.points()) {
            assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn transform_is_an_isometry() {
        let base = blob(120);
        for seed in [0u64, 1, 17, 123456] {
            let moved = base.random_euclidean_transform(seed);
            assert!(max_pairwise_distance_change(&base, &moved) < 1e-9);
        }
    }

    #[test]
    fn transform_deterministic() {
        let base = blob(64);
        assert_eq!(
            base.random_euclidean_transform(42).points(),
            base.random_euclidean_transform(42).points()
        );
    }

    #[test]
    fn transform_angles_uniform_ks() {
        // Kolmogorov-Smirnov uniformity check on [-pi, pi] at the 1% level.
        let n = 10_000usize;
        let mut u: Vec<f64> = (0..n)
            .map(|s| {
                let t = EuclideanTransform::<f64>::random(s as u64);
                (t.angle + std::f64::consts::PI) / (2.0 * std::f64::consts::PI)
            })
            .collect();
        u.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut ks = 0.0f64;
        for (i, &x) in u.iter().enumerate() {
            ks = ks.max((x - i as f64 / n as f64).abs());
            ks = ks.max(((i + 1) as f64 / n as f64 - x).abs());
        }
        let critical = 1.628 / (n as f64).sqrt();
        assert!(ks < critical, "KS statistic {ks} exceeds {critical}");
    }

    #[test]
    fn noise_zero_sigma_is_identity() {
        let base = blob(100);
        assert_eq!(base.add_gaussian_noise(0.0, 9).unwrap(), base);
    }

    #[test]
    fn noise_sample_std_matches_sigma() {
        // Chi-squared bounds: with 1000 draws the sample std of N(0, 0.05^2)
        // lies in [0.045, 0.055] except with probability well below 1%.
        let base = circle(500, 1.0);
        let noisy = base.add_gaussian_noise(0.05, 7).unwrap();
        let mut deltas = Vec::with_capacity(1000);
        for (a, b) in base.points().iter().zip(noisy.points()) {
            deltas.push(b[0] - a[0]);
            deltas.push(b[1] - a[1]);
        }
        let mean = deltas.iter().sum::<f64>() / deltas.len() as f64;
        let var =
            deltas.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (deltas.len() - 1) as f64;
        let std = var.sqrt();
        assert!((0.045..=0.055).contains(&std), "sample std {std}");
    }

    #[test]
    fn noise_deterministic() {
        let base = blob(80);
        assert_eq!(
            base.add_gaussian_noise(0.02, 3).unwrap(),
            base.add_gaussian_noise(0.02, 3).unwrap()
        );
    }

    #[test]
    fn decimate_full_keep_returns_input() {
        let base = blob(200);
        assert_eq!(base.decimate(1.0, &[5, 10], 1).unwrap(), base);
    }

    #[test]
    fn decimate_counts_and_anchors() {
        let base = circle(1000, 1.0);
        let anchors: Vec<usize> = (0..8).map(|k| k * 125).collect();
        let out = base.decimate(0.05, &anchors, 11).unwrap();
        assert_eq!(out.len(), 50);
        for &a in &anchors {
            let p = base.point(a);
            assert!(
                out.points().iter().any(|&q| q == p),
                "anchor {a} missing from decimated curve"
            );
        }
    }

    #[test]
    fn decimate_keeps_anchors_at_every_fraction() {
        let base = circle(1000, 1.0);
        let anchors: Vec<usize> = (0..8).map(|k| k * 125).collect();
        for &kf in &[0.7, 0.5, 0.3, 0.1, 0.05] {
            let out = base.decimate(kf, &anchors, 23).unwrap();
            for &a in &anchors {
                let p = base.point(a);
                assert!(out.points().iter().any(|&q| q == p));
            }
        }
    }

    #[test]
    fn decimate_is_an_ordered_subsequence() {
        let base = blob(300);
        let out = base.decimate(0.3, &[0, 150], 5).unwrap();
        let mut cursor = 0usize;
        for q in out.points() {
            let mut found = false;
            while cursor < base.len() {
                if base.point(cursor) == *q {
                    found = true;
                    cursor += 1;
                    break;
                }
                cursor += 1;
            }
            assert!(found, "decimated point out of order or missing");
        }
    }

    #[test]
    fn decimate_too_aggressive_errors() {
        let base = circle(100, 1.0);
        assert!(base.decimate(0.03, &[0, 10, 20], 0).is_err());
    }

    #[test]
    fn loess_reproduces_parabola_and_line() {
        let parabola = PlanarCurve::new(
            (0..200)
                .map(|i| {
                    let x = -1.0 + 2.0 * i as f64 / 199.0;
                    [x, x * x]
                })
                .collect(),
            false,
        )
        .unwrap();
        let smoothed = parabola.smooth_loess(0.2).unwrap();
        for (a, b) in parabola.points().iter().zip(smoothed.points()) {
            assert!((a[0] - b[0]).abs() < 1e-9 && (a[1] - b[1]).abs() < 1e-9);
        }

        let line = PlanarCurve::new(
            (0..100)
                .map(|i| [i as f64 * 0.1, 2.0 - 0.3 * i as f64 * 0.1])
                .collect(),
            false,
        )
        .unwrap();
        let smoothed = line.smooth_loess(0.3).unwrap();
        for (a, b) in line.points().iter().zip(smoothed.points()) {
            assert!((a[0] - b[0]).abs() < 1e-9 && (a[1] - b[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn loess_reduces_noise_on_circle() {
        let rms_radial = |c: &PlanarCurve<f64>| {
            (c.points()
                .iter()
                .map(|p| {
                    let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
                    (r - 1.0) * (r - 1.0)
                })
                .sum::<f64>()
                / c.len() as f64)
                .sqrt()
        };
        let noisy = circle(500, 1.0).add_gaussian_noise(0.05, 2).unwrap();
        let smoothed = noisy.smooth_loess(0.1).unwrap();
        assert!(rms_radial(&smoothed) < rms_radial(&noisy));
    }

    #[test]
    fn loess_commutes_with_rigid_motion() {
        let base = blob(240);
        let xf = EuclideanTransform {
            reflect: false,
            angle: 1.1f64,
            translation: [0.4, -0.9],
        };
        let a = xf.apply(&base.smooth_loess(0.15).unwrap());
        let b = xf.apply(&base).smooth_loess(0.15).unwrap();
        for (p, q) in a.points().iter().zip(b.points()) {
            assert!((p[0] - q[0]).abs() < 1e-9 && (p[1] - q[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn loess_window_too_small_errors() {
        assert!(blob(30).smooth_loess(0.1).is_err());
    }

    #[test]
    fn orientation_helpers() {
        let ccw = circle(100, 1.0);
        assert!(ccw.signed_area().unwrap() > 0.0);
        let cw = PlanarCurve::new(
            ccw.points().iter().rev().copied().collect::<Vec<_>>(),
            true,
        )
        .unwrap();
        assert!(cw.signed_area().unwrap() < 0.0);
        let fixed = cw.oriented_ccw().unwrap();
        assert!(fixed.signed_area().unwrap() > 0.0);
        assert_eq!(fixed.point(0), cw.point(0));
    }
}
