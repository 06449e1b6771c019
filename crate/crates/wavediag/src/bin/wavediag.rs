//! Thin command-line surface over the wavediag library. Every subcommand
//! validates its inputs up front and exits nonzero with a single
//! `error: ...` line on any failure.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use wavediag::config::ConfigFile;
use wavediag::correlation::{correlation_matrix, select_features};
use wavediag::dfn::{self, MLPConfig};
use wavediag::pipeline::{
    compress_recording, compress_to_points, evaluate_knn_baseline, evaluate_model,
    stratified_split, stream_verdicts, train_pipeline,
};
use wavediag::signal::{load_recording_csv, save_recording_csv, ClassLabel, Recording};
use wavediag::synth::{generate_recording, SynthConfig};

#[derive(Parser)]
#[command(name = "wavediag", about = "Transient-signal fault diagnosis pipeline", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded synthetic corpus, one labeled CSV per class
    Synth(SynthArgs),
    /// Correlation matrix and redundancy-removal feature selection
    Features(FeaturesArgs),
    /// Compress a recording CSV with the multi-level Haar transform
    Compress(CompressArgs),
    /// Train the classifier end to end and evaluate on a held-out split
    Train(TrainArgs),
    /// Evaluate a saved model, optionally against a KNN baseline
    Eval(EvalArgs),
    /// Replay a raw recording window by window, emitting NDJSON verdicts
    Stream(StreamArgs),
    /// Print a summary of a saved model file
    InspectModel(InspectArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Plain-text `key = value` config file; flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Output directory for the class CSVs and manifest
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples_per_class: Option<usize>,
    #[arg(long)]
    noise_sigma: Option<f64>,
    #[arg(long)]
    separation: Option<f64>,
}

#[derive(Args)]
struct FeaturesArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Input recording CSVs; several files are concatenated in time
    #[arg(long, required = true, num_args = 1..)]
    input: Vec<PathBuf>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    fine_tune_count: Option<usize>,
    /// Directory for report.txt and matrix.csv (defaults to stdout only)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompressArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    levels: Option<usize>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Labeled input recording CSVs
    #[arg(long, required = true, num_args = 1..)]
    input: Vec<PathBuf>,
    /// Channels to use, comma separated (default: all channels)
    #[arg(long, value_delimiter = ',')]
    features: Option<Vec<String>>,
    #[arg(long)]
    levels: Option<usize>,
    /// Training fraction of the stratified split
    #[arg(long)]
    split: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    goal_mse: Option<f64>,
    #[arg(long)]
    max_epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    /// Hidden layer sizes, comma separated
    #[arg(long, value_delimiter = ',')]
    hidden: Option<Vec<usize>>,
    /// Where to write the model file
    #[arg(long)]
    model_out: PathBuf,
    /// Optional text report (train history + held-out metrics)
    #[arg(long)]
    report_out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    model: PathBuf,
    #[arg(long, required = true, num_args = 1..)]
    input: Vec<PathBuf>,
    #[arg(long)]
    levels: Option<usize>,
    /// Baseline classifier to run on the identical data ("knn")
    #[arg(long)]
    baseline: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    /// When set, evaluate on the held-out side of this stratified split
    #[arg(long)]
    split: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct StreamArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    model: PathBuf,
    /// Raw (uncompressed) recording CSV to replay
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    window_raw: Option<usize>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    run_min: Option<usize>,
    /// Sleep one window period per verdict to mimic real-time pacing
    #[arg(long)]
    paced: bool,
    /// Write NDJSON here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InspectArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    model: PathBuf,
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> Result<()> {
    match Cli::parse().command {
        Command::Synth(args) => cmd_synth(args),
        Command::Features(args) => cmd_features(args),
        Command::Compress(args) => cmd_compress(args),
        Command::Train(args) => cmd_train(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Stream(args) => cmd_stream(args),
        Command::InspectModel(args) => cmd_inspect(args),
    }
}

fn load_config(common: &CommonArgs, allowed: &[&str]) -> Result<ConfigFile> {
    let cfg = match &common.config {
        Some(path) => ConfigFile::load(path).with_context(|| format!("reading {}", path.display()))?,
        None => ConfigFile::default(),
    };
    cfg.check_keys(allowed)?;
    Ok(cfg)
}

/// Seed precedence: flag, then config file, then WAVEDIAG_SEED, then 42.
fn resolve_seed(flag: Option<u64>, cfg: &ConfigFile) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    if let Some(s) = cfg.get::<u64>("seed")? {
        return Ok(s);
    }
    if let Ok(raw) = std::env::var("WAVEDIAG_SEED") {
        return raw
            .parse()
            .map_err(|_| anyhow::anyhow!("WAVEDIAG_SEED is not an unsigned integer: {raw:?}"));
    }
    Ok(42)
}

fn pick<T: Copy + std::str::FromStr>(
    flag: Option<T>,
    cfg: &ConfigFile,
    key: &str,
    default: T,
) -> Result<T> {
    if let Some(v) = flag {
        return Ok(v);
    }
    Ok(cfg.get::<T>(key)?.unwrap_or(default))
}

fn load_recordings(paths: &[PathBuf]) -> Result<Vec<Recording>> {
    paths
        .iter()
        .map(|p| load_recording_csv(p).with_context(|| format!("reading {}", p.display())))
        .collect()
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let cfg = load_config(
        &args.common,
        &["seed", "samples_per_class", "noise_sigma", "separation"],
    )?;
    let synth = SynthConfig {
        seed: resolve_seed(args.seed, &cfg)?,
        samples_per_class: pick(args.samples_per_class, &cfg, "samples_per_class", 32_768)?,
        noise_sigma: pick(args.noise_sigma, &cfg, "noise_sigma", 0.05)?,
        separation: pick(args.separation, &cfg, "separation", 1.0)?,
        ..SynthConfig::default()
    };
    fs::create_dir_all(&args.out)?;
    let mut manifest = format!(
        "# wavediag synth manifest\n# seed = {}\n# samples_per_class = {}\n# noise_sigma = {}\n# separation = {}\n",
        synth.seed, synth.samples_per_class, synth.noise_sigma, synth.separation
    );
    for class in ClassLabel::ALL {
        let rec = generate_recording(class, &synth)?;
        let file = format!("class_{}.csv", class.name());
        save_recording_csv(&rec, args.out.join(&file))?;
        manifest.push_str(&format!("{file} {} {}\n", class.code(), rec.len()));
    }
    fs::write(args.out.join("manifest.txt"), manifest)?;
    println!("wrote {} class CSVs + manifest.txt to {}", ClassLabel::COUNT, args.out.display());
    Ok(())
}

/// Concatenates recordings channel-wise; all inputs must share channels.
fn concat_recordings(recs: &[Recording]) -> Result<Recording> {
    let first = &recs[0];
    let names = first.channel_names().to_vec();
    let mut channels: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    for rec in recs {
        if rec.channel_names() != names {
            bail!("input recordings have mismatched channel names");
        }
        for (c, chan) in channels.iter_mut().enumerate() {
            chan.extend_from_slice(rec.channel(c));
        }
    }
    Ok(Recording::new(names, first.sample_rate_hz(), channels, None)?)
}

fn cmd_features(args: FeaturesArgs) -> Result<()> {
    let cfg = load_config(&args.common, &["threshold", "fine_tune_count"])?;
    let threshold = pick(args.threshold, &cfg, "threshold", 0.5)?;
    let fine_tune = pick(args.fine_tune_count, &cfg, "fine_tune_count", 1)?;
    let recs = load_recordings(&args.input)?;
    let joined = concat_recordings(&recs)?;
    let matrix = correlation_matrix(&joined)?;
    let report = select_features(&matrix, threshold, fine_tune)?;
    print!("{report}");
    if let Some(dir) = args.out {
        fs::create_dir_all(&dir)?;
        fs::write(dir.join("report.txt"), report.to_string())?;
        fs::write(dir.join("matrix.csv"), matrix.to_csv())?;
        println!("wrote report.txt and matrix.csv to {}", dir.display());
    }
    Ok(())
}

fn cmd_compress(args: CompressArgs) -> Result<()> {
    let cfg = load_config(&args.common, &["levels"])?;
    let levels = pick(args.levels, &cfg, "levels", 3)?;
    let rec = load_recording_csv(&args.input)?;
    let out = compress_recording(&rec, levels)?;
    save_recording_csv(&out, &args.output)?;
    println!(
        "compressed {} samples to {} ({}x) across {} channels",
        rec.len(),
        out.len(),
        1usize << levels,
        rec.channel_names().len()
    );
    Ok(())
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let cfg = load_config(
        &args.common,
        &[
            "seed", "levels", "split", "learning_rate", "goal_mse", "max_epochs",
            "batch_size", "hidden", "features",
        ],
    )?;
    let seed = resolve_seed(args.seed, &cfg)?;
    let levels = pick(args.levels, &cfg, "levels", 3)?;
    let split = pick(args.split, &cfg, "split", 0.3)?;
    let features: Option<Vec<String>> = args.features.or_else(|| {
        cfg.get_string("features")
            .map(|s| s.split(',').map(|t| t.trim().to_string()).collect())
    });
    let hidden: Vec<usize> = match args.hidden {
        Some(h) => h,
        None => match cfg.get_string("hidden") {
            Some(raw) => raw
                .split(',')
                .map(|t| t.trim().parse().map_err(|_| anyhow::anyhow!("bad hidden size {t:?}")))
                .collect::<Result<_>>()?,
            None => vec![16; 9],
        },
    };

    let mut recs = load_recordings(&args.input)?;
    if let Some(names) = &features {
        recs = recs.iter().map(|r| Ok(r.select_channels(names)?)).collect::<Result<Vec<_>>>()?;
    }
    for (rec, path) in recs.iter().zip(&args.input) {
        if rec.labels().is_none() {
            bail!("input {} has no label column", path.display());
        }
    }
    let n_features = recs[0].channel_names().len();
    let mut layer_sizes = vec![n_features];
    layer_sizes.extend(hidden);
    layer_sizes.push(1);
    let mlp = MLPConfig {
        layer_sizes,
        learning_rate: pick(args.learning_rate, &cfg, "learning_rate", 0.01)?,
        goal_mse: pick(args.goal_mse, &cfg, "goal_mse", 1e-4)?,
        max_epochs: pick(args.max_epochs, &cfg, "max_epochs", 2000)?,
        batch_size: pick(args.batch_size, &cfg, "batch_size", 32)?,
        seed,
    };

    let out = train_pipeline(&recs, &mlp, levels, split, seed)?;
    dfn::save_model(&out.model, &args.model_out)?;

    let mut report = String::new();
    report.push_str(&format!(
        "epochs_run: {}\nstop_reason: {:?}\nfinal_train_accuracy: {:.6}\nfirst_epoch_mse: {:.6}\nlast_epoch_mse: {:.6}\n\nheld-out metrics:\n{}",
        out.train_report.epochs_run,
        out.train_report.stop_reason,
        out.train_report.final_train_accuracy,
        out.train_report.mse_history.first().unwrap(),
        out.train_report.mse_history.last().unwrap(),
        out.holdout_metrics
    ));
    print!("{report}");
    if let Some(path) = args.report_out {
        fs::write(path, report)?;
    }
    println!("model written to {}", args.model_out.display());
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let cfg = load_config(&args.common, &["levels", "k", "split", "seed", "baseline"])?;
    let levels = pick(args.levels, &cfg, "levels", 3)?;
    let k = pick(args.k, &cfg, "k", 5)?;
    let baseline = args.baseline.or_else(|| cfg.get_string("baseline").map(String::from));
    if let Some(b) = &baseline {
        if b != "knn" {
            bail!("unsupported baseline {b:?}; only \"knn\" is available");
        }
    }
    let model = dfn::load_model(&args.model)?;
    let recs = load_recordings(&args.input)?;
    let points = compress_to_points(&recs, levels)?;

    let (fit_points, eval_points) = match args.split.or(cfg.get::<f64>("split")?) {
        Some(split) => {
            let seed = resolve_seed(args.seed, &cfg)?;
            stratified_split(&points, split, seed)?
        }
        None => (points.clone(), points),
    };

    let dfn_metrics = evaluate_model(&model, &eval_points)?;
    println!("DFN metrics ({} points):\n{dfn_metrics}", eval_points.len());
    if baseline.is_some() {
        let knn_metrics = evaluate_knn_baseline(&model, &fit_points, &eval_points, k)?;
        println!("KNN baseline (k={k}):\n{knn_metrics}");
    }
    Ok(())
}

fn cmd_stream(args: StreamArgs) -> Result<()> {
    let cfg = load_config(&args.common, &["window_raw", "levels", "run_min"])?;
    let window_raw = pick(args.window_raw, &cfg, "window_raw", 160)?;
    let levels = pick(args.levels, &cfg, "levels", 3)?;
    let run_min = pick(args.run_min, &cfg, "run_min", 3)?;
    let model = dfn::load_model(&args.model)?;
    let rec = load_recording_csv(&args.input)?;
    let pace = std::time::Duration::from_secs_f64(window_raw as f64 / rec.sample_rate_hz());

    let mut sink: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(fs::File::create(path)?),
        None => Box::new(std::io::stdout().lock()),
    };
    for (i, verdict) in stream_verdicts(&model, &rec, window_raw, levels, run_min)?.enumerate() {
        let verdict = verdict?;
        writeln!(sink, "{}", verdict.to_json_line(i))?;
        if args.paced {
            std::thread::sleep(pace);
        }
    }
    Ok(())
}

fn cmd_inspect(args: InspectArgs) -> Result<()> {
    load_config(&args.common, &[])?;
    let model = dfn::load_model(&args.model)?;
    println!("layers: {:?}", model.config.layer_sizes);
    println!("classes: {}", model.class_count);
    println!(
        "normalizer target: [{}, {}]",
        model.normalizer.target_lo, model.normalizer.target_hi
    );
    for i in 0..model.normalizer.dim() {
        println!(
            "feature {}: min {:.6} max {:.6}{}",
            model.normalizer.feature_names[i],
            model.normalizer.x_min[i],
            model.normalizer.x_max[i],
            if model.normalizer.degenerate_flags[i] { " (degenerate)" } else { "" }
        );
    }
    let params: usize = model.weights.iter().map(Vec::len).sum::<usize>()
        + model.biases.iter().map(Vec::len).sum::<usize>();
    println!("parameters: {params}");
    Ok(())
}
