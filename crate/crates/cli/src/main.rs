//! `curvesig`: dataset building, Siamese training, signature computation,
//! and the noise / sampling / retrieval experiments from one binary.
//!
//! Every run is reproducible: identical arguments and seed produce
//! byte-identical artifacts, independent of `--threads`. Each invocation
//! writes its resolved configuration to `run.json` in the output
//! directory.

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use curvesig::data::{
    build_pair_dataset, ingest_directory, read_curve, read_pair_manifest, read_shape_collection,
    synth_collection, write_pair_dataset, write_shape_collection, ShapeRecord,
};
use curvesig::error::{Error, Result};
use curvesig::eval::{
    noise_experiment, prepare_for_signatures, retrieval_experiment, sampling_experiment,
    write_noise_report, write_retrieval_report, write_sampling_report, AxiomaticParams,
    LadderSpec, NoiseRow, RetrievalRow, SamplingRow, INTEGRAL_RADII_LADDER,
};
use curvesig::invariants::{
    differentiate_wrt_arclength, euclidean_curvature, integral_area_invariant, write_signatures,
    SignatureMethod,
};
use curvesig::net::{forward, load_model, save_model, Architecture};
use curvesig::siamese::{
    train, train_on_pairs, write_loss_history, Hyperparameters, PairConfig,
};
use curvesig::svg::{write_line_plot, Series};
use curvesig::{Curve64, Model64};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "curvesig",
    version,
    about = "Axiomatic and learned invariant signatures of planar curves"
)]
struct Cli {
    /// Seed for every random choice in the run.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Directory for all output artifacts (also settable via CURVESIG_OUT_DIR).
    #[arg(long, global = true, env = "CURVESIG_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
    /// Worker threads; 0 uses all available cores. Results do not depend
    /// on this setting.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Print progress information to stderr.
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build or ingest shape datasets.
    #[command(subcommand)]
    Dataset(DatasetCmd),
    /// Train the Siamese signature network.
    Train(Box<TrainArgs>),
    /// Compute a trained network's signature for one curve.
    Sig(SigArgs),
    /// Compute an axiomatic invariant signature for one curve.
    Invariant(InvariantArgs),
    /// Run the noise, sampling, and retrieval experiments.
    #[command(subcommand)]
    Eval(EvalCmd),
    /// Model file utilities.
    #[command(subcommand)]
    Model(ModelCmd),
}

#[derive(Subcommand)]
enum DatasetCmd {
    /// Generate synthetic Fourier-contour shapes in six category families.
    Synth(SynthArgs),
    /// Trace shapes from a directory of binary PGM rasters
    /// (<input>/<category>/<id>.pgm).
    Ingest(IngestArgs),
    /// Build a training-pair dataset with a JSON manifest.
    Pairs(PairsArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Number of shapes, spread round-robin over the families.
    #[arg(long, default_value_t = 30)]
    count: usize,
    /// Highest radial harmonic.
    #[arg(long, default_value_t = 12)]
    harmonics: usize,
    /// Radial perturbation amplitude in [0, 1).
    #[arg(long, default_value_t = 0.3)]
    amplitude: f64,
    /// Output directory for curves and the shapes.json index.
    #[arg(long, default_value = "shapes")]
    out: PathBuf,
}

#[derive(Args)]
struct IngestArgs {
    /// Raster root directory.
    #[arg(long)]
    input: PathBuf,
    /// Output directory for curves and the shapes.json index.
    #[arg(long, default_value = "shapes")]
    out: PathBuf,
}

#[derive(Args)]
struct PairsArgs {
    /// Path to a shapes.json index.
    #[arg(long)]
    shapes: PathBuf,
    /// Number of pairs to build.
    #[arg(long, default_value_t = 10000)]
    pairs: usize,
    /// Fraction of positive pairs.
    #[arg(long, default_value_t = 0.5)]
    positive_fraction: f64,
    /// Abstraction scale index for negative partners (1..=5).
    #[arg(long, default_value_t = 1)]
    scale: u32,
    /// Points per pair member.
    #[arg(long, default_value_t = 500)]
    points: usize,
    /// Probability that a negative partner is a different shape.
    #[arg(long, default_value_t = 0.2)]
    cross_negative_prob: f64,
    /// Output directory for pair curves and manifest.json.
    #[arg(long, default_value = "pairs")]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// Path to a shapes.json index; pairs are built on the fly.
    #[arg(long)]
    shapes: Option<PathBuf>,
    /// Path to a prebuilt pair manifest.json (alternative to --shapes).
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Number of training pairs (with --shapes).
    #[arg(long, default_value_t = 10000)]
    pairs: usize,
    /// Abstraction scale index (with --shapes).
    #[arg(long, default_value_t = 1)]
    scale: u32,
    /// Points per pair member (with --shapes).
    #[arg(long, default_value_t = 500)]
    points: usize,
    /// Probability of cross-shape negatives (with --shapes).
    #[arg(long, default_value_t = 0.2)]
    cross_negative_prob: f64,
    /// Contrastive margin μ.
    #[arg(long, default_value_t = 1.0)]
    margin: f64,
    /// Adagrad learning rate.
    #[arg(long, default_value_t = 5e-4)]
    lr: f64,
    /// Pairs per optimizer step.
    #[arg(long, default_value_t = 10)]
    batch: usize,
    /// Training epochs.
    #[arg(long, default_value_t = 30)]
    epochs: usize,
    /// Where to write the trained model.
    #[arg(long, default_value = "model.json")]
    model_out: PathBuf,
    /// Where to write the per-epoch loss history CSV.
    #[arg(long, default_value = "loss.csv")]
    loss_out: PathBuf,
}

#[derive(Args)]
struct SigArgs {
    /// Trained model file.
    #[arg(long)]
    model: PathBuf,
    /// Input curve CSV.
    #[arg(long)]
    curve: PathBuf,
    /// Resample target before the forward pass.
    #[arg(long, default_value_t = 500)]
    points: usize,
    /// Output signature CSV.
    #[arg(long, default_value = "signature.csv")]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InvariantKind {
    #[value(name = "curvature")]
    Curvature,
    #[value(name = "curvature_s")]
    CurvatureS,
    #[value(name = "integral_area")]
    IntegralArea,
}

#[derive(Args)]
struct InvariantArgs {
    /// Which invariant to compute.
    #[arg(long, value_enum, default_value_t = InvariantKind::Curvature)]
    kind: InvariantKind,
    /// Gaussian scale in samples (curvature and curvature_s).
    #[arg(long, default_value_t = 2.0)]
    sigma: f64,
    /// Absolute disk radius (integral_area); overrides --radius-fraction.
    #[arg(long, conflicts_with = "radius_fraction")]
    radius: Option<f64>,
    /// Disk radius as a fraction of the curve diameter (integral_area).
    #[arg(long, default_value_t = 0.2)]
    radius_fraction: f64,
    /// Input curve CSV. The curve is used exactly as given.
    #[arg(long)]
    curve: PathBuf,
    /// Optionally resample the curve to this many points first.
    #[arg(long)]
    resample: Option<usize>,
    /// Output signature CSV.
    #[arg(long, default_value = "invariant.csv")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum EvalCmd {
    /// Noise-robustness experiment: stability of each signature under
    /// increasing Gaussian noise plus random rotation.
    Noise(NoiseArgs),
    /// Sampling-resilience experiment: signatures at fixed anchors under
    /// decreasing point density.
    Sampling(SamplingArgs),
    /// Shape retrieval with five-scale signature sets and Hausdorff
    /// matching.
    Retrieval(RetrievalArgs),
}

#[derive(Args)]
struct NoiseArgs {
    /// Path to a shapes.json index.
    #[arg(long)]
    shapes: PathBuf,
    /// Trained model file.
    #[arg(long)]
    model: PathBuf,
    /// Noise levels relative to the normalized curve scale.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 0.01, 0.02, 0.05])]
    sigmas: Vec<f64>,
    /// Gaussian scale of the curvature signature, in samples.
    #[arg(long, default_value_t = 2.0)]
    curv_sigma: f64,
    /// Integral-invariant radius as a fraction of the curve diameter.
    #[arg(long, default_value_t = 0.2)]
    radius_fraction: f64,
    /// Output CSV.
    #[arg(long, default_value = "noise.csv")]
    out: PathBuf,
    /// Optional SVG plot of mean stability vs σ.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct SamplingArgs {
    /// High-resolution input curve CSV (>= 1000 points).
    #[arg(long)]
    curve: PathBuf,
    /// Trained model file.
    #[arg(long)]
    model: PathBuf,
    /// Keep fractions of the density ladder.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.7, 0.5, 0.3, 0.1, 0.05])]
    keep: Vec<f64>,
    /// Number of fixed anchor points.
    #[arg(long, default_value_t = 12)]
    anchors: usize,
    /// Gaussian scale of the curvature signature, in samples.
    #[arg(long, default_value_t = 2.0)]
    curv_sigma: f64,
    /// Integral-invariant radius as a fraction of the curve diameter.
    #[arg(long, default_value_t = 0.2)]
    radius_fraction: f64,
    /// Output CSV.
    #[arg(long, default_value = "sampling.csv")]
    out: PathBuf,
    /// Optional SVG plot of per-anchor deviation.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RetrievalMethod {
    #[value(name = "network")]
    Network,
    #[value(name = "integral_area")]
    IntegralArea,
}

#[derive(Args)]
struct RetrievalArgs {
    /// Path to a shapes.json index.
    #[arg(long)]
    shapes: PathBuf,
    /// Signature ladder to use.
    #[arg(long, value_enum)]
    method: RetrievalMethod,
    /// Exactly five model files, scales 1..=5 (network method).
    #[arg(long, value_delimiter = ',')]
    models: Vec<PathBuf>,
    /// Exactly five radii as fractions of the curve diameter
    /// (integral_area method).
    #[arg(long, value_delimiter = ',', default_values_t = INTEGRAL_RADII_LADDER.to_vec())]
    radii: Vec<f64>,
    /// Noise levels to evaluate.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 0.02])]
    sigmas: Vec<f64>,
    /// Output CSV.
    #[arg(long, default_value = "retrieval.csv")]
    out: PathBuf,
    /// Optional SVG plot of precision vs σ.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ModelCmd {
    /// Print a model file's architecture and parameter count.
    Inspect(InspectArgs),
}

#[derive(Args)]
struct InspectArgs {
    /// Model file.
    #[arg(long)]
    model: PathBuf,
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {}: {e}", e.kind());
        std::process::exit(1);
    }
}

/// Usage-level failures (bad flag combinations, missing input files) exit
/// 2 like clap's own errors; runtime failures exit 1.
fn usage_error(msg: &str) -> ! {
    eprintln!("error: usage: {msg}");
    std::process::exit(2);
}

fn require_input(path: &Path) {
    if !path.exists() {
        usage_error(&format!("input path {} does not exist", path.display()));
    }
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

struct Ctx {
    seed: u64,
    out_dir: PathBuf,
    verbose: u8,
}

impl Ctx {
    /// Output paths land under the output directory unless absolute.
    fn out_path(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.out_dir.join(p)
        }
    }

    fn progress(&self, msg: &str) {
        if self.verbose > 0 {
            eprintln!("{msg}");
        }
    }

    /// Records the resolved configuration of this invocation; written
    /// before the work starts so failed runs are traceable too.
    fn write_run_record(&self, command: &str, args: BTreeMap<String, Value>) -> Result<()> {
        let record = json!({
            "command": command,
            "seed": self.seed,
            "out_dir": self.out_dir.display().to_string(),
            "args": args,
        });
        let path = self.out_dir.join("run.json");
        let mut bytes = serde_json::to_vec_pretty(&record).map_err(|e| Error::MalformedFile {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?;
        bytes.push(b'\n');
        std::fs::write(&path, bytes).map_err(|e| io_err(&path, e))
    }
}

fn run(cli: Cli) -> Result<()> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    }
    std::fs::create_dir_all(&cli.out_dir).map_err(|e| io_err(&cli.out_dir, e))?;
    let ctx = Ctx {
        seed: cli.seed,
        out_dir: cli.out_dir,
        verbose: cli.verbose,
    };
    match cli.command {
        Command::Dataset(DatasetCmd::Synth(args)) => dataset_synth(&ctx, args),
        Command::Dataset(DatasetCmd::Ingest(args)) => dataset_ingest(&ctx, args),
        Command::Dataset(DatasetCmd::Pairs(args)) => dataset_pairs(&ctx, args),
        Command::Train(args) => train_cmd(&ctx, *args),
        Command::Sig(args) => sig_cmd(&ctx, args),
        Command::Invariant(args) => invariant_cmd(&ctx, args),
        Command::Eval(EvalCmd::Noise(args)) => eval_noise(&ctx, args),
        Command::Eval(EvalCmd::Sampling(args)) => eval_sampling(&ctx, args),
        Command::Eval(EvalCmd::Retrieval(args)) => eval_retrieval(&ctx, args),
        Command::Model(ModelCmd::Inspect(args)) => model_inspect(&ctx, args),
    }
}

fn dataset_synth(ctx: &Ctx, args: SynthArgs) -> Result<()> {
    ctx.write_run_record(
        "dataset synth",
        BTreeMap::from([
            ("count".into(), json!(args.count)),
            ("harmonics".into(), json!(args.harmonics)),
            ("amplitude".into(), json!(args.amplitude)),
            ("out".into(), json!(args.out.display().to_string())),
        ]),
    )?;
    let records = synth_collection::<f64>(args.count, ctx.seed, args.harmonics, args.amplitude)?;
    let dir = ctx.out_path(&args.out);
    let index = write_shape_collection(&records, &dir)?;
    let categories: std::collections::BTreeSet<&str> =
        records.iter().map(|r| r.category.as_str()).collect();
    println!(
        "wrote {} ({} shapes, {} categories)",
        index.display(),
        records.len(),
        categories.len()
    );
    Ok(())
}

fn dataset_ingest(ctx: &Ctx, args: IngestArgs) -> Result<()> {
    require_input(&args.input);
    ctx.write_run_record(
        "dataset ingest",
        BTreeMap::from([
            ("input".into(), json!(args.input.display().to_string())),
            ("out".into(), json!(args.out.display().to_string())),
        ]),
    )?;
    let records = ingest_directory::<f64>(&args.input)?;
    let dir = ctx.out_path(&args.out);
    let index = write_shape_collection(&records, &dir)?;
    println!("wrote {} ({} shapes)", index.display(), records.len());
    Ok(())
}

fn dataset_pairs(ctx: &Ctx, args: PairsArgs) -> Result<()> {
    require_input(&args.shapes);
    ctx.write_run_record(
        "dataset pairs",
        BTreeMap::from([
            ("shapes".into(), json!(args.shapes.display().to_string())),
            ("pairs".into(), json!(args.pairs)),
            ("positive_fraction".into(), json!(args.positive_fraction)),
            ("scale".into(), json!(args.scale)),
            ("points".into(), json!(args.points)),
            ("cross_negative_prob".into(), json!(args.cross_negative_prob)),
            ("out".into(), json!(args.out.display().to_string())),
        ]),
    )?;
    let records: Vec<ShapeRecord<f64>> = read_shape_collection(&args.shapes)?;
    let cfg = PairConfig {
        points: args.points,
        cross_negative_prob: args.cross_negative_prob,
        ..PairConfig::default()
    };
    ctx.progress(&format!("building {} pairs", args.pairs));
    let pairs = build_pair_dataset(
        &records,
        &cfg,
        args.pairs,
        args.positive_fraction,
        args.scale,
        ctx.seed,
    )?;
    let manifest = write_pair_dataset(&pairs, ctx.out_path(&args.out))?;
    println!("wrote {} ({} pairs)", manifest.display(), pairs.len());
    Ok(())
}

fn train_cmd(ctx: &Ctx, args: TrainArgs) -> Result<()> {
    let source = match (&args.shapes, &args.manifest) {
        (Some(s), None) => {
            require_input(s);
            ("shapes", s.display().to_string())
        }
        (None, Some(m)) => {
            require_input(m);
            ("manifest", m.display().to_string())
        }
        _ => usage_error("train needs exactly one of --shapes or --manifest"),
    };
    ctx.write_run_record(
        "train",
        BTreeMap::from([
            (source.0.to_string(), json!(source.1)),
            ("pairs".into(), json!(args.pairs)),
            ("scale".into(), json!(args.scale)),
            ("points".into(), json!(args.points)),
            ("cross_negative_prob".into(), json!(args.cross_negative_prob)),
            ("margin".into(), json!(args.margin)),
            ("lr".into(), json!(args.lr)),
            ("batch".into(), json!(args.batch)),
            ("epochs".into(), json!(args.epochs)),
            ("model_out".into(), json!(args.model_out.display().to_string())),
            ("loss_out".into(), json!(args.loss_out.display().to_string())),
        ]),
    )?;
    let hp = Hyperparameters {
        margin: args.margin,
        learning_rate: args.lr,
        batch_size: args.batch,
        epochs: args.epochs,
        seed: ctx.seed,
    };
    let arch = Architecture::default();
    let (model, history) = match (&args.shapes, &args.manifest) {
        (Some(shapes_path), None) => {
            let curves: Vec<Curve64> = read_shape_collection::<f64>(shapes_path)?
                .into_iter()
                .map(|r| r.curve)
                .collect();
            let cfg = PairConfig {
                points: args.points,
                cross_negative_prob: args.cross_negative_prob,
                ..PairConfig::default()
            };
            ctx.progress(&format!(
                "training on {} pairs from {} shapes for {} epochs",
                args.pairs,
                curves.len(),
                args.epochs
            ));
            train(&curves, &arch, &hp, &cfg, args.scale, args.pairs)?
        }
        (None, Some(manifest_path)) => {
            let pairs = read_pair_manifest::<f64>(manifest_path)?;
            ctx.progress(&format!(
                "training on {} manifest pairs for {} epochs",
                pairs.len(),
                args.epochs
            ));
            train_on_pairs(&pairs, &arch, &hp)?
        }
        _ => unreachable!(),
    };
    let model_path = ctx.out_path(&args.model_out);
    save_model(&model, &model_path)?;
    let loss_path = ctx.out_path(&args.loss_out);
    write_loss_history(&loss_path, &history)?;
    println!(
        "wrote {} and {} (final epoch loss {:.6})",
        model_path.display(),
        loss_path.display(),
        history.last().copied().unwrap_or(f64::NAN)
    );
    Ok(())
}

fn sig_cmd(ctx: &Ctx, args: SigArgs) -> Result<()> {
    require_input(&args.model);
    require_input(&args.curve);
    ctx.write_run_record(
        "sig",
        BTreeMap::from([
            ("model".into(), json!(args.model.display().to_string())),
            ("curve".into(), json!(args.curve.display().to_string())),
            ("points".into(), json!(args.points)),
            ("out".into(), json!(args.out.display().to_string())),
        ]),
    )?;
    let model: Model64 = load_model(&args.model)?;
    let curve: Curve64 = read_curve(&args.curve)?;
    let prepped = prepare_for_signatures(&curve, args.points)?;
    let sig = forward(&model, &prepped)?;
    let out = ctx.out_path(&args.out);
    write_signatures(&out, &[sig])?;
    println!("wrote {}", out.display());
    Ok(())
}

fn invariant_cmd(ctx: &Ctx, args: InvariantArgs) -> Result<()> {
    require_input(&args.curve);
    let kind_tag = match args.kind {
        InvariantKind::Curvature => SignatureMethod::Curvature.tag(),
        InvariantKind::CurvatureS => SignatureMethod::CurvatureDerivative.tag(),
        InvariantKind::IntegralArea => SignatureMethod::IntegralArea.tag(),
    };
    ctx.write_run_record(
        "invariant",
        BTreeMap::from([
            ("kind".into(), json!(kind_tag)),
            ("sigma".into(), json!(args.sigma)),
            ("radius".into(), json!(args.radius)),
            ("radius_fraction".into(), json!(args.radius_fraction)),
            ("curve".into(), json!(args.curve.display().to_string())),
            ("resample".into(), json!(args.resample)),
            ("out".into(), json!(args.out.display().to_string())),
        ]),
    )?;
    let mut curve: Curve64 = read_curve(&args.curve)?;
    if let Some(n) = args.resample {
        curve = curve.resample_uniform(n)?;
    }
    let sig = match args.kind {
        InvariantKind::Curvature => euclidean_curvature(&curve, args.sigma)?,
        InvariantKind::CurvatureS => {
            let kappa = euclidean_curvature(&curve, args.sigma)?;
            differentiate_wrt_arclength(&kappa, &curve, args.sigma)?
        }
        InvariantKind::IntegralArea => {
            let radius = match args.radius {
                Some(r) => r,
                None => args.radius_fraction * curve.diameter(),
            };
            integral_area_invariant(&curve, radius)?
        }
    };
    let out = ctx.out_path(&args.out);
    write_signatures(&out, &[sig])?;
    println!("wrote {}", out.display());
    Ok(())
}

fn method_series<T, F>(rows: &[T], methods: &[SignatureMethod], f: F) -> Vec<Series>
where
    F: Fn(&T) -> (SignatureMethod, [f64; 2]),
{
    methods
        .iter()
        .map(|&m| Series {
            label: m.tag().to_string(),
            points: rows
                .iter()
                .map(&f)
                .filter(|(rm, _)| *rm == m)
                .map(|(_, p)| p)
                .collect(),
        })
        .collect()
}

const EXPERIMENT_METHODS: [SignatureMethod; 3] = [
    SignatureMethod::Curvature,
    SignatureMethod::IntegralArea,
    SignatureMethod::Network,
];

fn eval_noise(ctx: &Ctx, args: NoiseArgs) -> Result<()> {
    require_input(&args.shapes);
    require_input(&args.model);
    ctx.write_run_record(
        "eval noise",
        BTreeMap::from([
            ("shapes".into(), json!(args.shapes.display().to_string())),
            ("model".into(), json!(args.model.display().to_string())),
            ("sigmas".into(), json!(args.sigmas)),
            ("curv_sigma".into(), json!(args.curv_sigma)),
            ("radius_fraction".into(), json!(args.radius_fraction)),
            ("out".into(), json!(args.out.display().to_string())),
            (
                "svg".into(),
                json!(args.svg.as_ref().map(|p| p.display().to_string())),
            ),
        ]),
    )?;
    let curves: Vec<Curve64> = read_shape_collection::<f64>(&args.shapes)?
        .into_iter()
        .map(|r| r.curve)
        .collect();
    let model: Model64 = load_model(&args.model)?;
    let params = AxiomaticParams {
        curvature_sigma: args.curv_sigma,
        integral_radius_fraction: args.radius_fraction,
    };
    ctx.progress(&format!(
        "noise experiment over {} shapes x {} sigmas",
        curves.len(),
        args.sigmas.len()
    ));
    let rows: Vec<NoiseRow<f64>> =
        noise_experiment(&curves, &model, &args.sigmas, &params, ctx.seed)?;
    let out = ctx.out_path(&args.out);
    write_noise_report(&out, &rows)?;
    if let Some(svg) = &args.svg {
        let series = method_series(&rows, &EXPERIMENT_METHODS, |r| {
            (r.method, [r.sigma, r.mean])
        });
        write_line_plot(
            ctx.out_path(svg),
            "signature stability vs noise",
            &series,
        )?;
    }
    println!("wrote {} ({} rows)", out.display(), rows.len());
    Ok(())
}

fn eval_sampling(ctx: &Ctx, args: SamplingArgs) -> Result<()> {
    require_input(&args.curve);
    require_input(&args.model);
    ctx.write_run_record(
        "eval sampling",
        BTreeMap::from([
            ("curve".into(), json!(args.curve.display().to_string())),
            ("model".into(), json!(args.model.display().to_string())),
            ("keep".into(), json!(args.keep)),
            ("anchors".into(), json!(args.anchors)),
            ("curv_sigma".into(), json!(args.curv_sigma)),
            ("radius_fraction".into(), json!(args.radius_fraction)),
            ("out".into(), json!(args.out.display().to_string())),
            (
                "svg".into(),
                json!(args.svg.as_ref().map(|p| p.display().to_string())),
            ),
        ]),
    )?;
    let curve: Curve64 = read_curve(&args.curve)?;
    let model: Model64 = load_model(&args.model)?;
    let params = AxiomaticParams {
        curvature_sigma: args.curv_sigma,
        integral_radius_fraction: args.radius_fraction,
    };
    let rows: Vec<SamplingRow<f64>> = sampling_experiment(
        &curve,
        &model,
        &args.keep,
        args.anchors,
        &params,
        ctx.seed,
    )?;
    let out = ctx.out_path(&args.out);
    write_sampling_report(&out, &rows)?;
    if let Some(svg) = &args.svg {
        let series = method_series(&rows, &EXPERIMENT_METHODS, |r| {
            (r.method, [r.anchor as f64, r.std])
        });
        write_line_plot(
            ctx.out_path(svg),
            "signature deviation vs anchor",
            &series,
        )?;
    }
    println!("wrote {} ({} rows)", out.display(), rows.len());
    Ok(())
}

fn eval_retrieval(ctx: &Ctx, args: RetrievalArgs) -> Result<()> {
    require_input(&args.shapes);
    match args.method {
        RetrievalMethod::Network => {
            if args.models.len() != 5 {
                usage_error(&format!(
                    "network retrieval needs exactly 5 --models, got {}",
                    args.models.len()
                ));
            }
            for m in &args.models {
                require_input(m);
            }
        }
        RetrievalMethod::IntegralArea => {
            if !args.models.is_empty() {
                usage_error("--models only applies to --method network");
            }
            if args.radii.len() != 5 {
                usage_error(&format!(
                    "integral retrieval needs exactly 5 --radii, got {}",
                    args.radii.len()
                ));
            }
        }
    }
    ctx.write_run_record(
        "eval retrieval",
        BTreeMap::from([
            ("shapes".into(), json!(args.shapes.display().to_string())),
            (
                "method".into(),
                json!(match args.method {
                    RetrievalMethod::Network => "network",
                    RetrievalMethod::IntegralArea => "integral_area",
                }),
            ),
            (
                "models".into(),
                json!(args
                    .models
                    .iter()
                    .map(|p| p.display().to_string())
                    .collect::<Vec<_>>()),
            ),
            ("radii".into(), json!(args.radii)),
            ("sigmas".into(), json!(args.sigmas)),
            ("out".into(), json!(args.out.display().to_string())),
            (
                "svg".into(),
                json!(args.svg.as_ref().map(|p| p.display().to_string())),
            ),
        ]),
    )?;
    let records: Vec<ShapeRecord<f64>> = read_shape_collection(&args.shapes)?;
    let models: Vec<Model64> = args
        .models
        .iter()
        .map(|p| load_model(p))
        .collect::<Result<_>>()?;
    let ladder = match args.method {
        RetrievalMethod::Network => LadderSpec::NetworkScales(&models),
        RetrievalMethod::IntegralArea => {
            let mut radii = [0.0; 5];
            radii.copy_from_slice(&args.radii);
            LadderSpec::IntegralRadii(radii)
        }
    };
    let mut rows: Vec<RetrievalRow<f64>> = Vec::with_capacity(args.sigmas.len());
    for &sigma in &args.sigmas {
        ctx.progress(&format!("retrieval at sigma {sigma}"));
        let result = retrieval_experiment(&records, &ladder, sigma, ctx.seed)?;
        if ctx.verbose > 1 {
            for q in &result.queries {
                eprintln!(
                    "  {}: precision {:.3}, nearest {}",
                    q.shape_id, q.precision, q.ranked[0]
                );
            }
        }
        rows.push(RetrievalRow {
            method: ladder.method(),
            sigma,
            precision: result.mean_precision,
        });
    }
    let out = ctx.out_path(&args.out);
    write_retrieval_report(&out, &rows)?;
    if let Some(svg) = &args.svg {
        let series = vec![Series {
            label: format!("{} precision@4", ladder.method().tag()),
            points: rows.iter().map(|r| [r.sigma, r.precision]).collect(),
        }];
        write_line_plot(ctx.out_path(svg), "retrieval precision vs noise", &series)?;
    }
    println!("wrote {} ({} rows)", out.display(), rows.len());
    Ok(())
}

fn model_inspect(ctx: &Ctx, args: InspectArgs) -> Result<()> {
    require_input(&args.model);
    ctx.write_run_record(
        "model inspect",
        BTreeMap::from([("model".into(), json!(args.model.display().to_string()))]),
    )?;
    let model: Model64 = load_model(&args.model)?;
    let arch = &model.arch;
    println!("stages: {} ({} convolutions each)", arch.stages, arch.convs_per_stage);
    println!("filters: {}, kernel width: {}", arch.filters, arch.width);
    let max_stages: Vec<String> = arch
        .stage_has_channel_max
        .iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .map(|(i, _)| (i + 1).to_string())
        .collect();
    println!(
        "channel max after stages: {}",
        if max_stages.is_empty() {
            "none".to_string()
        } else {
            max_stages.join(", ")
        }
    );
    println!(
        "input channels: {}, output channels: {}",
        arch.input_channels, arch.output_channels
    );
    println!("receptive radius: {} samples", arch.receptive_radius());
    println!("minimum curve points: {}", arch.min_points());
    println!("parameters: {}", arch.parameter_count());
    Ok(())
}
