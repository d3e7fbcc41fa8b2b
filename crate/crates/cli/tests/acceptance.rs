//! Acceptance gate: twelve numbered criteria covering the axiomatic
//! invariants, the network and its gradients, desk-scale training
//! behavior, the three experiments, and byte-level reproducibility.
//!
//! Run with `cargo test --test acceptance`. Each criterion is one test;
//! the per-test ok/FAILED line is its verdict, and every test also
//! prints a `criterion NN: PASS|FAIL` line with the measured numbers
//! (visible with `--nocapture`).
//!
//! The desk-scale runs share trained models through `OnceLock`, so the
//! first criterion that needs a model pays for its training.

use curvesig::data::{
    build_pair_dataset, read_curve, read_pair_manifest, synth_collection, write_curve,
    write_pair_dataset, ShapeRecord,
};
use curvesig::eval::{
    invariance_report, prepare_for_signatures, retrieval_experiment, sampling_experiment,
    signature_distance, write_sampling_report, AxiomaticParams, LadderSpec,
    INTEGRAL_RADII_LADDER,
};
use curvesig::invariants::{euclidean_curvature, integral_area_invariant};
use curvesig::net::{
    axpy_params, backward, forward, forward_with_cache, init_model, load_model, save_model,
    Model,
};
use curvesig::siamese::{
    contrastive_loss, contrastive_loss_grad, make_positive_pair, negative_pair_with_transform,
    signature_rms_distance, train, train_on_pairs,
};
use curvesig::{
    Architecture, Curve64, EuclideanTransform, Hyperparameters, Model64, PairConfig, PairLabel,
    PlanarCurve, Signature, SignatureMethod,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

const SEED: u64 = 9;

// ---------------------------------------------------------------------------
// Shared fixtures

fn training_curves() -> &'static Vec<Curve64> {
    static CURVES: OnceLock<Vec<Curve64>> = OnceLock::new();
    CURVES.get_or_init(|| {
        synth_collection::<f64>(200, SEED, 12, 0.3)
            .unwrap()
            .into_iter()
            .map(|r| r.curve)
            .collect()
    })
}

fn held_out_curves() -> &'static Vec<Curve64> {
    static CURVES: OnceLock<Vec<Curve64>> = OnceLock::new();
    CURVES.get_or_init(|| {
        synth_collection::<f64>(50, SEED + 1000, 12, 0.3)
            .unwrap()
            .into_iter()
            .map(|r| r.curve)
            .collect()
    })
}

fn desk_hp(epochs: usize, seed: u64) -> Hyperparameters<f64> {
    Hyperparameters {
        margin: 1.0,
        learning_rate: 5e-4,
        batch_size: 10,
        epochs,
        seed,
    }
}

/// The main desk-scale run: 200 shapes, 2,000 pairs, published defaults,
/// 30 epochs, scale index 1.
fn desk_run() -> &'static (Model64, Vec<f64>) {
    static RUN: OnceLock<(Model64, Vec<f64>)> = OnceLock::new();
    RUN.get_or_init(|| {
        let t0 = Instant::now();
        let out = train(
            training_curves(),
            &Architecture::default(),
            &desk_hp(30, SEED),
            &PairConfig::default(),
            1,
            2000,
        )
        .unwrap();
        eprintln!("[fixture] desk-scale training: {:.1} s", t0.elapsed().as_secs_f64());
        out
    })
}

/// Models for scale indices 1..=5. Scale 1 is the desk run; scale 5 gets
/// the same budget because criterion 9 leans on it; the middle scales
/// train with a reduced budget and only feed the retrieval ladder.
fn scale_models() -> &'static Vec<Model64> {
    static MODELS: OnceLock<Vec<Model64>> = OnceLock::new();
    MODELS.get_or_init(|| {
        let mut models = vec![desk_run().0.clone()];
        for scale in 2..=5u32 {
            let (pairs, epochs) = if scale == 5 { (2000, 30) } else { (1000, 15) };
            let t0 = Instant::now();
            let (model, _) = train(
                training_curves(),
                &Architecture::default(),
                &desk_hp(epochs, SEED + u64::from(scale)),
                &PairConfig::default(),
                scale,
                pairs,
            )
            .unwrap();
            eprintln!(
                "[fixture] scale-{scale} training ({pairs} pairs, {epochs} epochs): {:.1} s",
                t0.elapsed().as_secs_f64()
            );
            models.push(model);
        }
        models
    })
}

// ---------------------------------------------------------------------------
// Small helpers

fn circle(n: usize, radius: f64) -> Curve64 {
    let points = (0..n)
        .map(|i| {
            let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            [radius * t.cos(), radius * t.sin()]
        })
        .collect();
    PlanarCurve::new(points, true).unwrap()
}

fn constant_signature(n: usize, value: f64) -> Signature<f64> {
    Signature {
        values: vec![value; n],
        method: SignatureMethod::Network,
        scale: 0.0,
    }
}

fn param_count(m: &Model64) -> usize {
    m.convs.iter().map(|c| c.weights.len() + c.bias.len()).sum::<usize>()
        + m.linear_weights.len()
        + 1
}

fn get_param(m: &Model64, mut i: usize) -> f64 {
    for layer in &m.convs {
        if i < layer.weights.len() {
            return layer.weights[i];
        }
        i -= layer.weights.len();
        if i < layer.bias.len() {
            return layer.bias[i];
        }
        i -= layer.bias.len();
    }
    if i < m.linear_weights.len() {
        return m.linear_weights[i];
    }
    m.linear_bias
}

fn set_param(m: &mut Model64, mut i: usize, v: f64) {
    for layer in &mut m.convs {
        if i < layer.weights.len() {
            layer.weights[i] = v;
            return;
        }
        i -= layer.weights.len();
        if i < layer.bias.len() {
            layer.bias[i] = v;
            return;
        }
        i -= layer.bias.len();
    }
    if i < m.linear_weights.len() {
        m.linear_weights[i] = v;
        return;
    }
    m.linear_bias = v;
}

fn pair_loss(model: &Model64, a: &Curve64, b: &Curve64, margin: f64) -> f64 {
    let sa = forward(model, a).unwrap();
    let sb = forward(model, b).unwrap();
    contrastive_loss(&sa, &sb, PairLabel::Positive, margin).unwrap()
}

/// Analytic gradient of the positive-pair contrastive loss with respect
/// to every model parameter, in model layout.
fn pair_grad(model: &Model64, a: &Curve64, b: &Curve64, margin: f64) -> Model64 {
    let (sa, ca) = forward_with_cache(model, a).unwrap();
    let (sb, cb) = forward_with_cache(model, b).unwrap();
    let (ga, gb) = contrastive_loss_grad(&sa, &sb, PairLabel::Positive, margin).unwrap();
    let mut grad = backward(model, &ca, &ga).unwrap();
    let gb_model = backward(model, &cb, &gb).unwrap();
    axpy_params(&mut grad, 1.0, &gb_model).unwrap();
    grad
}

/// Central finite difference of the same loss in parameter `i`.
fn fd_grad(model: &Model64, a: &Curve64, b: &Curve64, margin: f64, i: usize, h: f64) -> f64 {
    let theta = get_param(model, i);
    let mut probe = model.clone();
    set_param(&mut probe, i, theta + h);
    let plus = pair_loss(&probe, a, b, margin);
    set_param(&mut probe, i, theta - h);
    let minus = pair_loss(&probe, a, b, margin);
    (plus - minus) / (2.0 * h)
}

fn check_grad(analytic: f64, numeric: f64, tol: f64, what: &str) {
    let scale = analytic.abs().max(numeric.abs());
    if scale < 1e-8 {
        return; // both effectively zero
    }
    let rel = (analytic - numeric).abs() / scale;
    assert!(
        rel < tol,
        "{what}: analytic {analytic:.3e} vs numeric {numeric:.3e} (rel {rel:.3e})"
    );
}

fn wobbly_closed_curve(n: usize, seed: u64) -> Curve64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a3, a5): (f64, f64) = (rng.random::<f64>() * 0.2, rng.random::<f64>() * 0.1);
    let points = (0..n)
        .map(|i| {
            let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            let r = 1.0 + a3 * (3.0 * t).cos() + a5 * (5.0 * t).sin();
            [r * t.cos(), r * t.sin()]
        })
        .collect();
    PlanarCurve::new(points, true).unwrap()
}

// ---------------------------------------------------------------------------
// Criteria 1-3: axiomatic invariant oracles

#[test]
fn criterion_01_curvature_oracle() {
    let cases = [(1.0f64, 0.05f64), (2.0, 0.03)];
    let mut worst = 0.0f64;
    for (radius, tol) in cases {
        let t0 = Instant::now();
        let sig = euclidean_curvature(&circle(500, radius), 2.0).unwrap();
        let elapsed = t0.elapsed().as_secs_f64();
        assert!(elapsed < 1.0, "curvature of radius-{radius} circle took {elapsed:.3} s");
        let expected = 1.0 / radius;
        for &v in &sig.values {
            let err = (v - expected).abs();
            assert!(err < tol, "radius {radius}: kappa {v} vs {expected}");
            worst = worst.max(err / expected);
        }
    }

    let t0 = Instant::now();
    let line = PlanarCurve::new(
        (0..200).map(|i| [0.01 * i as f64, 0.02 * i as f64]).collect(),
        false,
    )
    .unwrap();
    let sig = euclidean_curvature(&line, 2.0).unwrap();
    assert!(t0.elapsed().as_secs_f64() < 1.0);
    // Interior: further than the 4-sigma Gaussian support from the ends.
    for (i, &v) in sig.values.iter().enumerate() {
        if (8..192).contains(&i) {
            assert!(v.abs() < 1e-6, "line kappa {v} at {i}");
        }
    }
    println!("criterion 01: PASS — circle curvature worst relative error {worst:.2e}, line interior < 1e-6");
}

#[test]
fn criterion_02_arc_length_oracle() {
    let profile = circle(500, 1.0).cumulative_arclength().unwrap();
    let rel = (profile.total - 2.0 * std::f64::consts::PI).abs() / (2.0 * std::f64::consts::PI);
    assert!(rel < 1e-3, "circle total {} (rel err {rel:.2e})", profile.total);

    let segment = PlanarCurve::new(vec![[0.0, 0.0], [3.0, 4.0]], false).unwrap();
    let profile = segment.cumulative_arclength().unwrap();
    assert_eq!(profile.total, 5.0, "3-4-5 segment must be exact");
    assert_eq!(profile.values, vec![0.0, 5.0]);
    println!("criterion 02: PASS — circle relative error {rel:.2e}, segment exactly 5");
}

/// Area of `disk(center, r) ∩ polygon` by midpoint quadrature on a
/// 1000 x 1000 grid over the disk's bounding box — an oracle that shares
/// no code with the exact clipping implementation.
fn grid_intersection_area(polygon: &[[f64; 2]], center: [f64; 2], r: f64) -> f64 {
    let n = 1000usize;
    let h = 2.0 * r / n as f64;
    let mut inside = 0u64;
    for iy in 0..n {
        let y = center[1] - r + (iy as f64 + 0.5) * h;
        for ix in 0..n {
            let x = center[0] - r + (ix as f64 + 0.5) * h;
            let dx = x - center[0];
            let dy = y - center[1];
            if dx * dx + dy * dy > r * r {
                continue;
            }
            // Convex polygon with CCW vertices: inside iff never to the
            // right of an edge.
            let mut ok = true;
            for i in 0..polygon.len() {
                let p = polygon[i];
                let q = polygon[(i + 1) % polygon.len()];
                let cross = (q[0] - p[0]) * (y - p[1]) - (q[1] - p[1]) * (x - p[0]);
                if cross < 0.0 {
                    ok = false;
                    break;
                }
            }
            if ok {
                inside += 1;
            }
        }
    }
    inside as f64 * h * h
}

/// Convex hull (Andrew's monotone chain), CCW without the closing point.
fn convex_hull(mut points: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let cross =
        |o: [f64; 2], a: [f64; 2], b: [f64; 2]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut hull: Vec<[f64; 2]> = Vec::new();
    for phase in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if phase == 0 {
            Box::new(points.iter())
        } else {
            Box::new(points.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2
                && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

#[test]
fn criterion_03_integral_area_oracle() {
    // Point on a long straight edge: exactly half the disk is inside.
    let slab = PlanarCurve::new(
        vec![[0.0, 0.0], [2.5, 0.0], [5.0, 0.0], [7.5, 0.0], [10.0, 0.0], [10.0, 4.0], [0.0, 4.0]],
        true,
    )
    .unwrap();
    let r = 0.5f64;
    let half_disk = 0.5 * std::f64::consts::PI * r * r;
    let sig = integral_area_invariant(&slab, r).unwrap();
    let edge_err = (sig.values[2] - half_disk).abs();
    assert!(edge_err < 1e-4, "straight edge: {} vs {half_disk}", sig.values[2]);

    // Right-angle corner: a quarter of the disk.
    let square = PlanarCurve::new(vec![[0.0, 0.0], [4.0, 0.0], [4.0, 4.0], [0.0, 4.0]], true).unwrap();
    let sig = integral_area_invariant(&square, r).unwrap();
    let corner_err = (sig.values[0] - half_disk / 2.0).abs();
    assert!(corner_err < 1e-3, "corner: {} vs {}", sig.values[0], half_disk / 2.0);

    // Point on the unit circle with r = 0.5: lens-area closed form.
    let sig = integral_area_invariant(&circle(2000, 1.0), 0.5).unwrap();
    let lens_err = (sig.values[0] - 0.35077).abs();
    assert!(lens_err < 2e-3, "lens: {} vs 0.35077", sig.values[0]);

    // Ten random convex polygons against the independent grid oracle.
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let mut worst_rel = 0.0f64;
    for poly_idx in 0..10 {
        let cloud: Vec<[f64; 2]> = (0..30)
            .map(|_| [rng.random::<f64>() * 4.0 - 2.0, rng.random::<f64>() * 4.0 - 2.0])
            .collect();
        let hull = convex_hull(cloud);
        assert!(hull.len() >= 3);
        let curve = PlanarCurve::new(hull.clone(), true).unwrap();
        let radius = 0.25 * curve.diameter();
        let sig = integral_area_invariant(&curve, radius).unwrap();
        for &vi in &[0usize, hull.len() / 2] {
            let exact = sig.values[vi];
            let grid = grid_intersection_area(&hull, hull[vi], radius);
            let rel = (exact - grid).abs() / grid;
            assert!(
                rel < 0.01,
                "polygon {poly_idx} vertex {vi}: exact {exact} vs grid {grid} (rel {rel:.3e})"
            );
            worst_rel = worst_rel.max(rel);
        }
    }
    println!(
        "criterion 03: PASS — edge {edge_err:.1e}, corner {corner_err:.1e}, lens {lens_err:.1e}, grid worst rel {worst_rel:.2e}"
    );
}

// ---------------------------------------------------------------------------
// Criteria 4-6: network and loss properties

#[test]
fn criterion_04_gradient_correctness() {
    let t0 = Instant::now();

    // Reduced architecture: every parameter against central differences.
    let arch = Architecture {
        stages: 1,
        convs_per_stage: 2,
        filters: 2,
        width: 3,
        stage_has_channel_max: vec![false],
        input_channels: 2,
        output_channels: 1,
    };
    arch.validate().unwrap();
    let model: Model<f64> = init_model(&arch, SEED + 4).unwrap();
    let a = wobbly_closed_curve(16, SEED + 40);
    let b = wobbly_closed_curve(16, SEED + 41);
    let analytic = pair_grad(&model, &a, &b, 1.0);
    let count = param_count(&model);
    let reduced_count = count;
    let mut worst_small = 0.0f64;
    for i in 0..count {
        let num = fd_grad(&model, &a, &b, 1.0, i, 1e-7);
        let ana = get_param(&analytic, i);
        check_grad(ana, num, 1e-6, &format!("reduced param {i}"));
        let scale = ana.abs().max(num.abs());
        if scale >= 1e-8 {
            worst_small = worst_small.max((ana - num).abs() / scale);
        }
    }

    // Full default architecture: 20 random parameters.
    let arch = Architecture::default();
    let model: Model<f64> = init_model(&arch, SEED + 44).unwrap();
    let a = wobbly_closed_curve(100, SEED + 42);
    let b = wobbly_closed_curve(100, SEED + 43);
    let analytic = pair_grad(&model, &a, &b, 1.0);
    let count = param_count(&model);
    assert_eq!(count, arch.parameter_count());
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 45);
    let mut worst_full = 0.0f64;
    for _ in 0..20 {
        let i = rng.random_range(0..count);
        let num = fd_grad(&model, &a, &b, 1.0, i, 1e-6);
        let ana = get_param(&analytic, i);
        check_grad(ana, num, 1e-4, &format!("full param {i}"));
        let scale = ana.abs().max(num.abs());
        if scale >= 1e-8 {
            worst_full = worst_full.max((ana - num).abs() / scale);
        }
    }

    let elapsed = t0.elapsed().as_secs_f64();
    assert!(elapsed < 30.0, "gradient checks took {elapsed:.1} s");
    println!(
        "criterion 04: PASS — reduced worst rel {worst_small:.2e} over {reduced_count} params, full worst rel {worst_full:.2e}, {elapsed:.1} s"
    );
}

#[test]
fn criterion_05_shift_equivariance_and_locality() {
    let arch = Architecture::default();
    assert_eq!(arch.receptive_radius(), 12);

    let model: Model<f64> = init_model(&arch, SEED + 5).unwrap();
    let curve = wobbly_closed_curve(500, SEED + 50);
    let base = forward(&model, &curve).unwrap();
    let n = curve.len();
    let shift = 137usize;
    let shifted_points: Vec<[f64; 2]> = (0..n).map(|i| curve.points()[(i + shift) % n]).collect();
    let shifted = PlanarCurve::new(shifted_points, true).unwrap();
    let out = forward(&model, &shifted).unwrap();
    let mut worst = 0.0f64;
    for i in 0..n {
        worst = worst.max((out.values[i] - base.values[(i + shift) % n]).abs());
    }
    assert!(worst < 1e-9, "shift commutation error {worst:.3e}");

    // Locality: all-positive weights keep every ReLU active, so a bump
    // at one point reaches exactly the theoretical radius and outputs
    // beyond it are bitwise unchanged.
    let mut positive: Model<f64> = Model::zeros(&arch).unwrap();
    for layer in &mut positive.convs {
        layer.weights.iter_mut().for_each(|w| *w = 0.05);
        layer.bias.iter_mut().for_each(|b| *b = 0.01);
    }
    positive.linear_weights.iter_mut().for_each(|w| *w = 1.0);
    let m = 100usize;
    let points: Vec<[f64; 2]> = (0..m)
        .map(|i| {
            let t = 2.0 * std::f64::consts::PI * i as f64 / m as f64;
            [2.0 + t.cos(), 2.0 + t.sin()]
        })
        .collect();
    let plain = PlanarCurve::new(points.clone(), true).unwrap();
    let mut bumped_points = points;
    bumped_points[50][0] += 0.25;
    bumped_points[50][1] += 0.125;
    let bumped = PlanarCurve::new(bumped_points, true).unwrap();
    let a = forward(&positive, &plain).unwrap();
    let b = forward(&positive, &bumped).unwrap();
    for i in 0..m {
        let dist = (i as isize - 50).rem_euclid(m as isize).min((50 - i as isize).rem_euclid(m as isize));
        let diff = (a.values[i] - b.values[i]).abs();
        if dist <= 12 {
            assert!(diff > 0.0, "no effect at distance {dist}");
        } else {
            assert_eq!(diff, 0.0, "leak at distance {dist}");
        }
    }
    println!("criterion 05: PASS — shift error {worst:.2e}, locality radius exactly 12");
}

#[test]
fn criterion_06_contrastive_loss_table_and_grads() {
    let a = constant_signature(8, 0.4);
    // Identical pair: positive loss 0, negative loss mu.
    assert_eq!(contrastive_loss(&a, &a, PairLabel::Positive, 1.0).unwrap(), 0.0);
    assert_eq!(contrastive_loss(&a, &a, PairLabel::Negative, 1.0).unwrap(), 1.0);
    // Negative pair at distance 2 >= mu: no loss.
    let far = constant_signature(8, 2.4);
    assert_eq!(contrastive_loss(&a, &far, PairLabel::Negative, 1.0).unwrap(), 0.0);

    // Loss gradients against central differences, both labels.
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 6);
    let sa = Signature {
        values: (0..12).map(|_| rng.random::<f64>() - 0.5).collect(),
        method: SignatureMethod::Network,
        scale: 0.0,
    };
    let sb = Signature {
        values: (0..12).map(|_| rng.random::<f64>() * 0.1).collect(),
        method: SignatureMethod::Network,
        scale: 0.0,
    };
    let mut worst = 0.0f64;
    for label in [PairLabel::Positive, PairLabel::Negative] {
        let (ga, gb) = contrastive_loss_grad(&sa, &sb, label, 1.0).unwrap();
        let h = 1e-7;
        for i in 0..sa.values.len() {
            for (side, grads) in [(&sa, &ga), (&sb, &gb)] {
                let mut plus = side.clone();
                plus.values[i] += h;
                let mut minus = side.clone();
                minus.values[i] -= h;
                let (lp, lm) = if std::ptr::eq(side, &sa) {
                    (
                        contrastive_loss(&plus, &sb, label, 1.0).unwrap(),
                        contrastive_loss(&minus, &sb, label, 1.0).unwrap(),
                    )
                } else {
                    (
                        contrastive_loss(&sa, &plus, label, 1.0).unwrap(),
                        contrastive_loss(&sa, &minus, label, 1.0).unwrap(),
                    )
                };
                let num = (lp - lm) / (2.0 * h);
                let ana = grads[i];
                check_grad(ana, num, 1e-6, &format!("loss grad {label:?} value {i}"));
                let scale = ana.abs().max(num.abs());
                if scale >= 1e-8 {
                    worst = worst.max((ana - num).abs() / scale);
                }
            }
        }
    }
    println!("criterion 06: PASS — loss table exact, gradient worst rel {worst:.2e}");
}

// ---------------------------------------------------------------------------
// Criteria 7-10: desk-scale training behavior

#[test]
fn criterion_07_desk_scale_training() {
    let t0 = Instant::now();
    let (model, history) = desk_run();
    assert_eq!(history.len(), 30);
    let first = history[0];
    let last = *history.last().unwrap();
    let halved = last <= 0.5 * first;

    let report = invariance_report(model, held_out_curves(), &PairConfig::default(), 1, SEED + 7)
        .unwrap();
    let separated = report.ratio < 0.5;

    // Fixed seed reproduces the final model bitwise.
    let (again, history_again) = train(
        training_curves(),
        &Architecture::default(),
        &desk_hp(30, SEED),
        &PairConfig::default(),
        1,
        2000,
    )
    .unwrap();
    assert_eq!(&history_again, history, "loss history must reproduce exactly");
    let dir = tempfile::tempdir().unwrap();
    save_model(model, dir.path().join("a.json")).unwrap();
    save_model(&again, dir.path().join("b.json")).unwrap();
    let bytes_a = std::fs::read(dir.path().join("a.json")).unwrap();
    let bytes_b = std::fs::read(dir.path().join("b.json")).unwrap();
    assert_eq!(bytes_a, bytes_b, "retrained model must match bitwise");

    // Report every sub-result before asserting so a failing run still
    // shows the full picture.
    let verdict = if halved && separated { "PASS" } else { "FAIL" };
    println!(
        "criterion 07: {verdict} — loss {first:.4} -> {last:.4} ({}; needs <= {:.4}), \
         invariance ratio {:.3} (d_pos {:.4} / d_neg {:.4}; needs < 0.5), \
         bitwise retrain ok, {:.0} s total",
        if halved { "halved" } else { "not halved" },
        0.5 * first,
        report.ratio,
        report.d_pos,
        report.d_neg,
        t0.elapsed().as_secs_f64()
    );
    assert!(
        halved,
        "loss must halve: epoch 1 {first:.4} vs final {last:.4}"
    );
    assert!(
        separated,
        "invariance ratio {:.3} (d_pos {:.4}, d_neg {:.4})",
        report.ratio,
        report.d_pos,
        report.d_neg
    );
}

#[test]
fn criterion_08_positive_only_collapse() {
    let shapes: Vec<ShapeRecord<f64>> = synth_collection(200, SEED, 12, 0.3).unwrap();
    let pairs = build_pair_dataset(&shapes, &PairConfig::default(), 200, 1.0, 1, SEED + 8).unwrap();
    assert!(pairs.iter().all(|p| p.label == PairLabel::Positive));
    let arch = Architecture::default();
    let hp = desk_hp(30, SEED + 8);
    let before: Model<f64> = init_model(&arch, hp.seed).unwrap();
    let (after, _) = train_on_pairs(&pairs, &arch, &hp).unwrap();

    let pooled_std = |model: &Model64| -> f64 {
        let mut values = Vec::new();
        for curve in held_out_curves().iter().take(20) {
            let prepped = prepare_for_signatures(curve, 500).unwrap();
            values.extend(forward(model, &prepped).unwrap().values);
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
    };
    let std_before = pooled_std(&before);
    let std_after = pooled_std(&after);
    assert!(
        std_after <= 0.5 * std_before,
        "output std must halve: {std_before:.4e} -> {std_after:.4e}"
    );
    println!("criterion 08: PASS — held-out output std {std_before:.3e} -> {std_after:.3e}");
}

#[test]
fn criterion_09_multi_scale_ordering() {
    let models = scale_models();
    let (m1, m5) = (&models[0], &models[4]);
    let cfg = PairConfig {
        cross_negative_prob: 0.0,
        ..PairConfig::default()
    };
    let identity = EuclideanTransform::identity();

    let mut d_smooth_sum = 0.0;
    let mut d_pos_sum = 0.0;
    let mut cross_scale_min = f64::INFINITY;
    let held = &held_out_curves()[..10];
    for (i, shape) in held.iter().enumerate() {
        // Shape vs its heavily smoothed (scale-5 span) partner, as the
        // scale-5 model sees them.
        let neg = negative_pair_with_transform(shape, &cfg, 5, std::slice::from_ref(shape), SEED, &identity)
            .unwrap();
        let sa = forward(m5, &neg.curve_a).unwrap();
        let sb = forward(m5, &neg.curve_b).unwrap();
        d_smooth_sum += signature_rms_distance(&sa, &sb).unwrap();

        // The same model's positive-pair distance.
        let pos = make_positive_pair(shape, &cfg, 5, SEED + 90 + i as u64).unwrap();
        let pa = forward(m5, &pos.curve_a).unwrap();
        let pb = forward(m5, &pos.curve_b).unwrap();
        d_pos_sum += signature_rms_distance(&pa, &pb).unwrap();

        // Scale-1 vs scale-5 signatures of the identical input.
        let prepped = prepare_for_signatures(shape, 500).unwrap();
        let s1 = forward(m1, &prepped).unwrap();
        let s5 = forward(m5, &prepped).unwrap();
        cross_scale_min = cross_scale_min.min(signature_distance(&s1, &s5, true).unwrap());
    }
    let d_smooth = d_smooth_sum / held.len() as f64;
    let d_pos = d_pos_sum / held.len() as f64;
    let ordered = d_smooth >= 2.0 * d_pos;
    let distinct = cross_scale_min > 0.1;
    let verdict = if ordered && distinct { "PASS" } else { "FAIL" };
    println!(
        "criterion 09: {verdict} — smoothed {d_smooth:.4} vs positive {d_pos:.4} \
         ({:.2}x; needs >= 2x), min cross-scale distance {cross_scale_min:.3} (needs > 0.1)",
        d_smooth / d_pos
    );
    assert!(
        ordered,
        "smoothed distance {d_smooth:.4} must be >= 2x positive distance {d_pos:.4}"
    );
    assert!(
        distinct,
        "scale-1 vs scale-5 signature distance {cross_scale_min:.4}"
    );
}

#[test]
fn criterion_10_retrieval_sanity() {
    let records: Vec<ShapeRecord<f64>> = synth_collection(30, SEED + 10, 12, 0.3).unwrap();
    let chance = 4.0 / 29.0;
    let models = scale_models();
    let ladders: Vec<(&str, LadderSpec<'_, f64>)> = vec![
        ("integral", LadderSpec::IntegralRadii(INTEGRAL_RADII_LADDER)),
        ("network", LadderSpec::NetworkScales(models)),
    ];
    let mut summary = String::new();
    for (name, ladder) in &ladders {
        for sigma in [0.0, 0.02] {
            let result = retrieval_experiment(&records, ladder, sigma, SEED + 10).unwrap();
            assert!(
                result.mean_precision >= 2.0 * chance,
                "{name} precision@4 {:.3} at sigma {sigma} is below 2x chance {:.3}",
                result.mean_precision,
                2.0 * chance
            );
            summary.push_str(&format!("{name}@{sigma}: {:.3}  ", result.mean_precision));
        }
    }

    // A planted duplicate must come back first for its original.
    let mut with_dup = records.clone();
    let mut dup = records[0].clone();
    dup.id = "zz-duplicate".into();
    with_dup.push(dup);
    for (name, ladder) in &ladders {
        let result = retrieval_experiment(&with_dup, ladder, 0.0, SEED + 10).unwrap();
        let query = result
            .queries
            .iter()
            .find(|q| q.shape_id == records[0].id)
            .unwrap();
        assert_eq!(
            query.ranked[0], "zz-duplicate",
            "{name}: duplicate must rank first, got {:?}",
            &query.ranked[..3.min(query.ranked.len())]
        );
    }
    println!("criterion 10: PASS — {summary}duplicate first in both ladders");
}

// ---------------------------------------------------------------------------
// Criteria 11-12: experiment determinism and byte-level reproducibility

#[test]
fn criterion_11_sampling_resilience() {
    let model = &desk_run().0;
    let keep = [0.7, 0.5, 0.3, 0.1, 0.05];
    let params = AxiomaticParams::default();
    let dir = tempfile::tempdir().unwrap();
    for (i, curve) in training_curves().iter().take(2).enumerate() {
        let rows_a = sampling_experiment(curve, model, &keep, 12, &params, SEED + 11).unwrap();
        let rows_b = sampling_experiment(curve, model, &keep, 12, &params, SEED + 11).unwrap();
        assert_eq!(rows_a.len(), 3 * 12, "3 methods x 12 anchors");
        assert!(rows_a.iter().all(|r| r.std.is_finite()));
        let path_a = dir.path().join(format!("s{i}-a.csv"));
        let path_b = dir.path().join(format!("s{i}-b.csv"));
        write_sampling_report(&path_a, &rows_a).unwrap();
        write_sampling_report(&path_b, &rows_b).unwrap();
        let bytes_a = std::fs::read(&path_a).unwrap();
        let bytes_b = std::fs::read(&path_b).unwrap();
        assert_eq!(bytes_a, bytes_b, "sampling CSV must be deterministic");
    }
    println!("criterion 11: PASS — full keep ladder, deterministic CSV, all anchors resolved");
}

#[test]
fn criterion_12_reproducibility() {
    let dir = tempfile::tempdir().unwrap();

    // Curve CSV round-trips bitwise.
    let curve = &training_curves()[3];
    let p1 = dir.path().join("c1.csv");
    let p2 = dir.path().join("c2.csv");
    write_curve(curve, &p1).unwrap();
    let reread: Curve64 = read_curve(&p1).unwrap();
    write_curve(&reread, &p2).unwrap();
    assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());

    // Model JSON round-trips bitwise.
    let model: Model<f64> = init_model(&Architecture::default(), SEED + 12).unwrap();
    let m1 = dir.path().join("m1.json");
    let m2 = dir.path().join("m2.json");
    save_model(&model, &m1).unwrap();
    let reloaded: Model64 = load_model(&m1).unwrap();
    save_model(&reloaded, &m2).unwrap();
    assert_eq!(std::fs::read(&m1).unwrap(), std::fs::read(&m2).unwrap());

    // Pair manifest round-trips bitwise.
    let shapes: Vec<ShapeRecord<f64>> = synth_collection(6, SEED + 12, 12, 0.3).unwrap();
    let pairs = build_pair_dataset(&shapes, &PairConfig::default(), 4, 0.5, 1, SEED + 12).unwrap();
    let d1 = dir.path().join("pairs1");
    let d2 = dir.path().join("pairs2");
    let manifest1 = write_pair_dataset(&pairs, &d1).unwrap();
    let reread = read_pair_manifest::<f64>(&manifest1).unwrap();
    let manifest2 = write_pair_dataset(&reread, &d2).unwrap();
    assert_eq!(
        std::fs::read(&manifest1).unwrap(),
        std::fs::read(&manifest2).unwrap()
    );
    assert_eq!(
        std::fs::read(d1.join("pair-00000-a.csv")).unwrap(),
        std::fs::read(d2.join("pair-00000-a.csv")).unwrap()
    );

    // CLI runs: fixed seed reproduces byte-for-byte, independent of
    // --threads.
    let bin = env!("CARGO_BIN_EXE_curvesig");
    let run = |out_name: &str, threads: &str| {
        let out_dir = dir.path().join(out_name);
        let shapes_dir = dir.path().join("cli-shapes");
        if !shapes_dir.exists() {
            let status = Command::new(bin)
                .args(["--seed", "12", "--out-dir"])
                .arg(dir.path())
                .args(["dataset", "synth", "--count", "12", "--out", "cli-shapes"])
                .status()
                .unwrap();
            assert!(status.success());
        }
        let status = Command::new(bin)
            .args(["--seed", "12", "--threads", threads, "--out-dir"])
            .arg(&out_dir)
            .arg("train")
            .arg("--shapes")
            .arg(shapes_dir.join("shapes.json"))
            .args(["--pairs", "20", "--epochs", "2", "--batch", "5"])
            .status()
            .unwrap();
        assert!(status.success());
        let status = Command::new(bin)
            .args(["--seed", "12", "--threads", threads, "--out-dir"])
            .arg(&out_dir)
            .arg("sig")
            .arg("--model")
            .arg(out_dir.join("model.json"))
            .arg("--curve")
            .arg(shapes_dir.join("synth-0000.csv"))
            .status()
            .unwrap();
        assert!(status.success());
        (
            std::fs::read(out_dir.join("model.json")).unwrap(),
            std::fs::read(out_dir.join("loss.csv")).unwrap(),
            std::fs::read(out_dir.join("signature.csv")).unwrap(),
        )
    };
    let first = run("cli-a", "1");
    let second = run("cli-b", "2");
    let third = run("cli-c", "1");
    assert_eq!(first, second, "outputs must not depend on --threads");
    assert_eq!(first, third, "rerun must reproduce byte-for-byte");

    println!("criterion 12: PASS — curve/model/manifest round-trips and CLI runs byte-identical");
}
