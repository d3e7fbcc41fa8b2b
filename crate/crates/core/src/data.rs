//! Shape ingestion (PGM rasters, Moore boundary tracing), synthetic
//! Fourier contours with category labels, dataset splitting, and curve /
//! pair-dataset file I/O.

use crate::curve::PlanarCurve;
use crate::error::{Error, Result};
use crate::numfmt::g17;
use crate::siamese::{
    make_negative_pair, make_positive_pair, PairConfig, PairLabel, TrainingPair,
};
use crate::scalar::Real;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

/// Where a shape came from; raster and synthetic shapes are guaranteed
/// closed and simple.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeSource {
    Raster,
    Synthetic,
    File,
}

/// A labeled shape: the unit of the dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeRecord<T> {
    pub id: String,
    pub category: String,
    pub curve: PlanarCurve<T>,
    pub source: ShapeSource,
}

// ---------------------------------------------------------------------------
// Binary rasters and PGM input

/// Row-major binary raster; `(0, 0)` is the top-left pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    pixels: Vec<bool>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, pixels: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument("raster dimensions must be nonzero".into()));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidArgument(format!(
                "raster needs {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Foreground test; anything outside the grid is background.
    pub fn get(&self, x: i64, y: i64) -> bool {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            return false;
        }
        self.pixels[y as usize * self.width + x as usize]
    }

    /// Parses a binary (P5) PGM; pixels with value > 127 are foreground.
    /// `label` names the source in error messages (usually the path).
    pub fn from_pgm_bytes(bytes: &[u8], label: &str) -> Result<Self> {
        let bad = |msg: String| Error::MalformedFile {
            path: label.to_string(),
            msg,
        };
        let mut pos = 0usize;
        let token = |pos: &mut usize| -> Result<String> {
            // Skip whitespace and `#` comments, then take one token.
            loop {
                while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                    *pos += 1;
                }
                if *pos < bytes.len() && bytes[*pos] == b'#' {
                    while *pos < bytes.len() && bytes[*pos] != b'\n' {
                        *pos += 1;
                    }
                    continue;
                }
                break;
            }
            let start = *pos;
            while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if start == *pos {
                return Err(bad("unexpected end of header".into()));
            }
            Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
        };

        let magic = token(&mut pos)?;
        if magic != "P5" {
            return Err(bad(format!("expected P5 magic, found {magic:?}")));
        }
        let dim = |name: &str, pos: &mut usize| -> Result<usize> {
            let t = token(pos)?;
            t.parse::<usize>()
                .map_err(|_| bad(format!("invalid {name} {t:?}")))
        };
        let width = dim("width", &mut pos)?;
        let height = dim("height", &mut pos)?;
        let maxval = dim("maxval", &mut pos)?;
        if maxval == 0 || maxval > 255 {
            return Err(bad(format!("maxval {maxval} outside 1..=255")));
        }
        // Exactly one whitespace byte separates the header from the raster.
        if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
            return Err(bad("missing separator before raster data".into()));
        }
        pos += 1;
        let need = width
            .checked_mul(height)
            .ok_or_else(|| bad("raster dimensions overflow".into()))?;
        let data = &bytes[pos..];
        if data.len() < need {
            return Err(bad(format!(
                "raster data truncated: need {need} bytes, found {}",
                data.len()
            )));
        }
        let pixels = data[..need].iter().map(|&v| v > 127).collect();
        BinaryImage::new(width, height, pixels)
    }

    pub fn read_pgm(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes =
            std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_pgm_bytes(&bytes, &path.display().to_string())
    }
}

// ---------------------------------------------------------------------------
// Contour tracing

/// Clockwise Moore neighborhood in image coordinates (y grows downward),
/// starting west.
const MOORE_RING: [(i64, i64); 8] = [
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
];

fn moore_next(
    img: &BinaryImage,
    cur: (i64, i64),
    back: (i64, i64),
) -> Option<((i64, i64), (i64, i64))> {
    let rel = (back.0 - cur.0, back.1 - cur.1);
    let start = MOORE_RING.iter().position(|&d| d == rel)?;
    let mut prev = back;
    for k in 1..=8 {
        let d = MOORE_RING[(start + k) % 8];
        let n = (cur.0 + d.0, cur.1 + d.1);
        if img.get(n.0, n.1) {
            return Some((n, prev));
        }
        prev = n;
    }
    None
}

/// Traces the outer boundary of the single foreground component as a
/// closed counterclockwise polyline of pixel centers (Moore tracing with
/// Jacob's stopping criterion). The image row axis is flipped so the
/// curve lives in ordinary y-up coordinates.
pub fn trace_contour<T: Real>(img: &BinaryImage) -> Result<PlanarCurve<T>> {
    // Component census: exactly one 4-connected component of >= 10 pixels.
    let (w, h) = (img.width as i64, img.height as i64);
    let mut seen = vec![false; img.width * img.height];
    let mut components = 0usize;
    let mut largest = 0usize;
    let mut start = None;
    for y in 0..h {
        for x in 0..w {
            if !img.get(x, y) || seen[(y * w + x) as usize] {
                continue;
            }
            if start.is_none() {
                start = Some((x, y));
            }
            components += 1;
            let mut size = 0usize;
            let mut stack = vec![(x, y)];
            seen[(y * w + x) as usize] = true;
            while let Some((cx, cy)) = stack.pop() {
                size += 1;
                for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                    let (nx, ny) = (cx + dx, cy + dy);
                    if img.get(nx, ny) && !seen[(ny * w + nx) as usize] {
                        seen[(ny * w + nx) as usize] = true;
                        stack.push((nx, ny));
                    }
                }
            }
            largest = largest.max(size);
        }
    }
    let start = start.ok_or_else(|| Error::InvalidArgument("empty raster".into()))?;
    if components > 1 {
        return Err(Error::InvalidArgument(format!(
            "raster has {components} foreground components, expected exactly 1"
        )));
    }
    if largest < 10 {
        return Err(Error::InvalidArgument(format!(
            "foreground component too small: {largest} pixels (need >= 10)"
        )));
    }

    // Row-major scan order guarantees the west neighbor is background.
    let back0 = (start.0 - 1, start.1);
    let (second, back_after_first) = moore_next(img, start, back0).ok_or_else(|| {
        Error::InvalidArgument("foreground component has no traceable boundary".into())
    })?;
    let mut boundary = vec![start];
    let mut cur = second;
    let mut back = back_after_first;
    let cap = 4 * largest + 8;
    loop {
        if cur == start {
            let (next, _) = moore_next(img, cur, back)
                .ok_or_else(|| Error::InvalidArgument("boundary trace stalled".into()))?;
            if next == second {
                break;
            }
        }
        boundary.push(cur);
        let (next, nb) = moore_next(img, cur, back)
            .ok_or_else(|| Error::InvalidArgument("boundary trace stalled".into()))?;
        cur = next;
        back = nb;
        if boundary.len() > cap {
            return Err(Error::InvalidArgument(
                "boundary trace failed to close".into(),
            ));
        }
    }

    let points = boundary
        .into_iter()
        .map(|(x, y)| [T::of(x as f64), T::of((h - 1 - y) as f64)])
        .collect();
    PlanarCurve::new(points, true)?.oriented_ccw()
}

/// Reads every `<root>/<category>/<id>.pgm`, traces it, and returns the
/// records sorted by (category, id). Traced shapes must be simple.
pub fn ingest_directory<T: Real>(root: impl AsRef<Path>) -> Result<Vec<ShapeRecord<T>>> {
    let root = root.as_ref();
    let read_dir = |p: &Path| -> Result<Vec<PathBuf>> {
        let iter = std::fs::read_dir(p).map_err(|e| Error::io(p.display().to_string(), e))?;
        let mut entries = Vec::new();
        for e in iter {
            entries.push(e.map_err(|e| Error::io(p.display().to_string(), e))?.path());
        }
        entries.sort();
        Ok(entries)
    };
    let mut files = Vec::new();
    for dir in read_dir(root)? {
        if !dir.is_dir() {
            continue;
        }
        let category = dir
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        for file in read_dir(&dir)? {
            if file.extension().is_some_and(|e| e == "pgm") {
                let id = file
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                files.push((category.clone(), id, file));
            }
        }
    }
    if files.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no <category>/<id>.pgm files under {}",
            root.display()
        )));
    }
    let records: Result<Vec<ShapeRecord<T>>> = files
        .par_iter()
        .map(|(category, id, path)| {
            let img = BinaryImage::read_pgm(path)?;
            let curve = trace_contour::<T>(&img)?;
            crate::invariants::check_simple(&curve).map_err(|e| Error::InvalidCurve(
                format!("{}: traced contour is not simple: {e}", path.display()),
            ))?;
            Ok(ShapeRecord {
                id: id.clone(),
                category: category.clone(),
                curve,
                source: ShapeSource::Raster,
            })
        })
        .collect();
    let mut records = records?;
    records.sort_by(|a, b| (&a.category, &a.id).cmp(&(&b.category, &b.id)));
    let mut ids = BTreeSet::new();
    for r in &records {
        if !ids.insert(&r.id) {
            return Err(Error::InvalidArgument(format!("duplicate shape id {:?}", r.id)));
        }
    }
    Ok(records)
}

// ---------------------------------------------------------------------------
// Synthetic shapes

/// Number of synthetic category families.
pub const FAMILY_COUNT: usize = 6;
/// Points per synthetic contour.
pub const SYNTH_POINTS: usize = 1000;

/// Family `f` is dominated by harmonic `f + 2`, with a weaker octave at
/// `2(f + 2)` and a low floor elsewhere; categories stay separable while
/// every shape gets its own perturbation.
fn family_template(family: usize, harmonics: usize) -> Vec<f64> {
    let m = family + 2;
    (1..=harmonics)
        .map(|k| {
            if k == m {
                1.0
            } else if k == 2 * m {
                0.4
            } else {
                0.15
            }
        })
        .collect()
}

/// Star-convex Fourier contour from one family:
/// `r(θ) = 1 + Σ_k a_k cos(kθ + φ_k)` with `|a_k| ≤ amplitude/k`,
/// sampled at 1000 points counterclockwise.
pub fn synth_shape_in_family<T: Real>(
    family: usize,
    seed: u64,
    harmonics: usize,
    amplitude: f64,
) -> Result<ShapeRecord<T>> {
    if family >= FAMILY_COUNT {
        return Err(Error::InvalidArgument(format!(
            "family {family} outside 0..{FAMILY_COUNT}"
        )));
    }
    if harmonics == 0 {
        return Err(Error::InvalidArgument("need at least one harmonic".into()));
    }
    if !(0.0..1.0).contains(&amplitude) {
        return Err(Error::InvalidArgument(format!(
            "amplitude {amplitude} outside [0, 1)"
        )));
    }
    let template = family_template(family, harmonics);
    let bound: f64 = template
        .iter()
        .enumerate()
        .map(|(i, t)| amplitude / (i + 1) as f64 * t)
        .sum();
    if bound >= 0.99 {
        return Err(Error::InvalidArgument(format!(
            "amplitude {amplitude} with {harmonics} harmonics can drive the radius \
             to zero (coefficient bound {bound:.3})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<(f64, f64)> = template
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let k = (i + 1) as f64;
            let a = amplitude / k * t * (0.6 + 0.4 * rng.random::<f64>());
            let phase = 2.0 * std::f64::consts::PI * rng.random::<f64>();
            (a, phase)
        })
        .collect();
    let points = (0..SYNTH_POINTS)
        .map(|i| {
            let theta = 2.0 * std::f64::consts::PI * i as f64 / SYNTH_POINTS as f64;
            let mut r = 1.0;
            for (j, &(a, phase)) in coeffs.iter().enumerate() {
                r += a * ((j + 1) as f64 * theta + phase).cos();
            }
            [T::of(r * theta.cos()), T::of(r * theta.sin())]
        })
        .collect();
    Ok(ShapeRecord {
        id: format!("synth-f{family}-{seed:08x}"),
        category: format!("family-{}", family + 2),
        curve: PlanarCurve::new(points, true)?,
        source: ShapeSource::Synthetic,
    })
}

/// Single-shape entry point; the family is derived from the seed so one
/// seed fully determines the shape.
pub fn synth_shape<T: Real>(seed: u64, harmonics: usize, amplitude: f64) -> Result<ShapeRecord<T>> {
    synth_shape_in_family((seed % FAMILY_COUNT as u64) as usize, seed, harmonics, amplitude)
}

/// `count` shapes spread round-robin over the six families, so counts per
/// category differ by at most one; ids are sequential.
pub fn synth_collection<T: Real>(
    count: usize,
    seed: u64,
    harmonics: usize,
    amplitude: f64,
) -> Result<Vec<ShapeRecord<T>>> {
    if count == 0 {
        return Err(Error::InvalidArgument("shape count must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(count);
    for i in 0..count {
        let shape_seed: u64 = rng.random();
        let mut record =
            synth_shape_in_family::<T>(i % FAMILY_COUNT, shape_seed, harmonics, amplitude)?;
        record.id = format!("synth-{i:04}");
        records.push(record);
    }
    Ok(records)
}

// ---------------------------------------------------------------------------
// Splitting

/// Category-stratified random split into (train, val, test). Within each
/// category the shapes are shuffled, then apportioned by largest
/// remainder so every category sums exactly.
pub fn split_shapes<T: Real>(
    shapes: &[ShapeRecord<T>],
    ratios: [f64; 3],
    seed: u64,
) -> Result<(Vec<ShapeRecord<T>>, Vec<ShapeRecord<T>>, Vec<ShapeRecord<T>>)> {
    if shapes.is_empty() {
        return Err(Error::InvalidArgument("cannot split an empty collection".into()));
    }
    if ratios.iter().any(|r| !(0.0..=1.0).contains(r) || !r.is_finite()) {
        return Err(Error::InvalidArgument(format!("ratios out of range: {ratios:?}")));
    }
    if (ratios.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "ratios must sum to 1, got {ratios:?}"
        )));
    }
    let mut ids = BTreeSet::new();
    for s in shapes {
        if !ids.insert(&s.id) {
            return Err(Error::InvalidArgument(format!("duplicate shape id {:?}", s.id)));
        }
    }
    let mut by_category: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, s) in shapes.iter().enumerate() {
        by_category.entry(&s.category).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut splits: [Vec<ShapeRecord<T>>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for indices in by_category.values_mut() {
        use rand::seq::SliceRandom;
        indices.shuffle(&mut rng);
        let n = indices.len();
        let mut counts = [0usize; 3];
        let mut fracs = [(0.0f64, 0usize); 3];
        let mut assigned = 0usize;
        for (j, &r) in ratios.iter().enumerate() {
            let target = n as f64 * r;
            counts[j] = target.floor() as usize;
            assigned += counts[j];
            fracs[j] = (target - target.floor(), j);
        }
        // Hand out the remainder by largest fractional target, ties to the
        // earlier split (train before val before test).
        fracs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        for k in 0..(n - assigned) {
            counts[fracs[k % 3].1] += 1;
        }
        let mut offset = 0usize;
        for (j, &c) in counts.iter().enumerate() {
            for &idx in &indices[offset..offset + c] {
                splits[j].push(shapes[idx].clone());
            }
            offset += c;
        }
    }
    let [train, val, test] = splits;
    Ok((train, val, test))
}

// ---------------------------------------------------------------------------
// Shape collections on disk

impl ShapeSource {
    pub fn tag(self) -> &'static str {
        match self {
            ShapeSource::Raster => "raster",
            ShapeSource::Synthetic => "synthetic",
            ShapeSource::File => "file",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "raster" => Some(Self::Raster),
            "synthetic" => Some(Self::Synthetic),
            "file" => Some(Self::File),
            _ => None,
        }
    }
}

/// One row of a shape-collection index; the curve path is relative to the
/// index file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShapeIndexEntry {
    pub id: String,
    pub category: String,
    pub path: String,
    pub source: String,
}

/// Writes every record's curve as CSV plus a `shapes.json` index with
/// ids, categories and sources; returns the index path.
pub fn write_shape_collection<T: Real>(
    records: &[ShapeRecord<T>],
    dir: impl AsRef<Path>,
) -> Result<PathBuf> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    let mut entries = Vec::with_capacity(records.len());
    for record in records {
        let file = format!("{}.csv", record.id);
        write_curve(&record.curve, dir.join(&file))?;
        entries.push(ShapeIndexEntry {
            id: record.id.clone(),
            category: record.category.clone(),
            path: file,
            source: record.source.tag().to_string(),
        });
    }
    let path = dir.join("shapes.json");
    let mut bytes = serde_json::to_vec_pretty(&entries).map_err(|e| Error::MalformedFile {
        path: path.display().to_string(),
        msg: e.to_string(),
    })?;
    bytes.push(b'\n');
    std::fs::write(&path, bytes).map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(path)
}

/// Reads a `shapes.json` index and the curves it references.
pub fn read_shape_collection<T: Real>(
    index_path: impl AsRef<Path>,
) -> Result<Vec<ShapeRecord<T>>> {
    let index_path = index_path.as_ref();
    let text = std::fs::read_to_string(index_path)
        .map_err(|e| Error::io(index_path.display().to_string(), e))?;
    let entries: Vec<ShapeIndexEntry> =
        serde_json::from_str(&text).map_err(|e| Error::MalformedFile {
            path: index_path.display().to_string(),
            msg: e.to_string(),
        })?;
    if entries.is_empty() {
        return Err(Error::MalformedFile {
            path: index_path.display().to_string(),
            msg: "shape index is empty".into(),
        });
    }
    let base = index_path.parent().unwrap_or_else(|| Path::new("."));
    let mut ids = BTreeSet::new();
    entries
        .iter()
        .map(|entry| {
            if !ids.insert(&entry.id) {
                return Err(Error::MalformedFile {
                    path: index_path.display().to_string(),
                    msg: format!("duplicate shape id {:?}", entry.id),
                });
            }
            let source = ShapeSource::from_tag(&entry.source).ok_or_else(|| {
                Error::MalformedFile {
                    path: index_path.display().to_string(),
                    msg: format!("unknown source {:?}", entry.source),
                }
            })?;
            Ok(ShapeRecord {
                id: entry.id.clone(),
                category: entry.category.clone(),
                curve: read_curve(base.join(&entry.path))?,
                source,
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Pair datasets and manifests

/// One manifest row; paths are relative to the manifest file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub curve_a_path: String,
    pub curve_b_path: String,
    pub label: u8,
    pub scale_index: u32,
}

/// Builds `round(positive_fraction * pair_count)` positive pairs followed
/// by negatives, drawing source shapes uniformly from the collection.
pub fn build_pair_dataset<T: Real>(
    shapes: &[ShapeRecord<T>],
    cfg: &PairConfig,
    pair_count: usize,
    positive_fraction: f64,
    scale_index: u32,
    seed: u64,
) -> Result<Vec<TrainingPair<T>>> {
    if shapes.is_empty() {
        return Err(Error::InvalidArgument("empty shape collection".into()));
    }
    if !(0.0..=1.0).contains(&positive_fraction) {
        return Err(Error::InvalidArgument(format!(
            "positive fraction {positive_fraction} outside [0, 1]"
        )));
    }
    let positives = (positive_fraction * pair_count as f64).round() as usize;
    let pool: Vec<PlanarCurve<T>> = shapes.iter().map(|s| s.curve.clone()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(pair_count);
    for i in 0..pair_count {
        let shape = &pool[rng.random_range(0..pool.len())];
        let pair_seed: u64 = rng.random();
        let pair = if i < positives {
            make_positive_pair(shape, cfg, scale_index, pair_seed)?
        } else {
            make_negative_pair(shape, cfg, scale_index, &pool, pair_seed)?
        };
        pairs.push(pair);
    }
    Ok(pairs)
}

/// Writes each pair's curves as CSV plus a `manifest.json` that indexes
/// them; returns the manifest path.
pub fn write_pair_dataset<T: Real>(pairs: &[TrainingPair<T>], dir: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    let mut entries = Vec::with_capacity(pairs.len());
    for (i, pair) in pairs.iter().enumerate() {
        let a = format!("pair-{i:05}-a.csv");
        let b = format!("pair-{i:05}-b.csv");
        write_curve(&pair.curve_a, dir.join(&a))?;
        write_curve(&pair.curve_b, dir.join(&b))?;
        entries.push(ManifestEntry {
            curve_a_path: a,
            curve_b_path: b,
            label: match pair.label {
                PairLabel::Positive => 1,
                PairLabel::Negative => 0,
            },
            scale_index: pair.scale_index,
        });
    }
    let path = dir.join("manifest.json");
    let mut bytes = serde_json::to_vec_pretty(&entries)
        .map_err(|e| Error::MalformedFile {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?;
    bytes.push(b'\n');
    std::fs::write(&path, bytes).map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(path)
}

/// Reads a manifest and the curves it references back into pairs.
pub fn read_pair_manifest<T: Real>(manifest_path: impl AsRef<Path>) -> Result<Vec<TrainingPair<T>>> {
    let manifest_path = manifest_path.as_ref();
    let text = std::fs::read_to_string(manifest_path)
        .map_err(|e| Error::io(manifest_path.display().to_string(), e))?;
    let entries: Vec<ManifestEntry> =
        serde_json::from_str(&text).map_err(|e| Error::MalformedFile {
            path: manifest_path.display().to_string(),
            msg: e.to_string(),
        })?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    entries
        .iter()
        .map(|entry| {
            let label = match entry.label {
                0 => PairLabel::Negative,
                1 => PairLabel::Positive,
                other => {
                    return Err(Error::MalformedFile {
                        path: manifest_path.display().to_string(),
                        msg: format!("label {other} is neither 0 nor 1"),
                    })
                }
            };
            if !(1..=5).contains(&entry.scale_index) {
                return Err(Error::MalformedFile {
                    path: manifest_path.display().to_string(),
                    msg: format!("scale index {} outside 1..=5", entry.scale_index),
                });
            }
            Ok(TrainingPair {
                curve_a: read_curve(base.join(&entry.curve_a_path))?,
                curve_b: read_curve(base.join(&entry.curve_b_path))?,
                label,
                scale_index: entry.scale_index,
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Curve files

/// Writes a curve as CSV: optional `# closed=` header then one `x,y` pair
/// per line at 17 significant digits (bit-exact round trip).
pub fn write_curve<T: Real>(curve: &PlanarCurve<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = format!("# closed={}\n", curve.is_closed());
    for p in curve.points() {
        out.push_str(&g17(p[0]));
        out.push(',');
        out.push_str(&g17(p[1]));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Reads the CSV format of [`write_curve`]; a missing header means
/// closed. Errors carry 1-based line numbers.
pub fn read_curve<T: Real>(path: impl AsRef<Path>) -> Result<PlanarCurve<T>> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.display().to_string(),
        line,
        msg,
    };
    let mut closed = true;
    let mut points = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(flag) = comment.strip_prefix("closed=") {
                closed = match flag.trim() {
                    "true" => true,
                    "false" => false,
                    other => {
                        return Err(parse_err(
                            line_no,
                            format!("closed flag must be true or false, got {other:?}"),
                        ))
                    }
                };
            }
            continue;
        }
        let (xs, ys) = line
            .split_once(',')
            .ok_or_else(|| parse_err(line_no, format!("expected \"x,y\", got {line:?}")))?;
        let coord = |s: &str| -> Result<T> {
            s.trim()
                .parse::<f64>()
                .map(T::of)
                .map_err(|_| parse_err(line_no, format!("invalid number {:?}", s.trim())))
        };
        points.push([coord(xs)?, coord(ys)?]);
    }
    if points.is_empty() {
        return Err(Error::MalformedFile {
            path: path.display().to_string(),
            msg: "no coordinate rows".into(),
        });
    }
    PlanarCurve::new(points, closed)
}
