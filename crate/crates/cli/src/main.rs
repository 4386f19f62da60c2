//! `taxel-bow`: generate synthetic recordings, train, classify, evaluate,
//! sweep parameters and classify a live frame stream.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 data or model
//! error.

mod config;

use std::fs::{self, File};
use std::io::{self, BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use taxel_bow::dataset::parse_frame_line;
use taxel_bow::eval::{
    model_features, pooled_over_seeds, project_features, run_experiment, run_handcrafted_experiment,
    run_loso_suite, sweep, sweep_file_name, write_confusion_csv, write_projection_csv, write_sweep_csv,
    ConfusionMatrix, SplitSpec, SweepParameter, DEFAULT_TRAIN_FRACTION,
};
use taxel_bow::pipeline::{fit, PipelineParams};
use taxel_bow::svm::{Classification, StreamClassifier, SvmModel};
use taxel_bow::synth::{generate, GeneratorConfig};
use taxel_bow::{load_dataset, save_dataset, Dataset, EventLabel, EventSample, TaxelFrame};

use config::PipelineArgs;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl From<taxel_bow::Error> for CliError {
    fn from(e: taxel_bow::Error) -> Self {
        match e {
            taxel_bow::Error::Config(_) => CliError::Usage(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

type CliResult<T = ()> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "taxel-bow", version, about = "Tactile event classification with a bag-of-words SVM")]
struct Cli {
    /// Seed for generation, k-means and splits; overrides any seed in --config [default: 0; generate: preset seed]
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Key-value file: generator settings for `generate`, pipeline settings otherwise
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Preset {
    Easy,
    Hard,
    PaperShape,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SplitKind {
    /// Stratified random split (80/20 by default)
    Pooled,
    /// One fold per subject, holding that subject out
    Loso,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Features {
    /// Histograms of derivative-window codewords
    Bow,
    /// Seven hand-designed summary statistics
    Handcrafted,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
enum Normalization {
    Normalized,
    Raw,
    Both,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic dataset (JSONL)
    Generate {
        /// Built-in settings; --config replaces them [default: paper-shape]
        #[arg(long, value_enum)]
        preset: Option<Preset>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train codebook and SVM on a whole dataset and save the model
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Label the samples of a dataset file, or one recording given as frame lines
    Classify {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
    },
    /// Train/test evaluation with accuracy and confusion matrix
    Evaluate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum, default_value = "pooled")]
        split: SplitKind,
        /// Training share for the pooled split
        #[arg(long, default_value_t = DEFAULT_TRAIN_FRACTION)]
        train_fraction: f64,
        /// Pooled split repeated over this many consecutive split seeds
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        #[arg(long, value_enum, default_value = "bow")]
        features: Features,
        /// Directory for confusion.csv and projection.csv
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Accuracy as one of K, W or T varies, the others held fixed
    Sweep {
        #[arg(long)]
        data: PathBuf,
        /// k, w or t
        #[arg(long)]
        param: String,
        /// Comma-separated values [default: k 2,5,10,20,40,80; w 3,5,7,9,11; t 8,11,15,20,25]
        #[arg(long, value_delimiter = ',')]
        values: Vec<usize>,
        /// Training share of the fixed pooled split
        #[arg(long, default_value_t = DEFAULT_TRAIN_FRACTION)]
        train_fraction: f64,
        /// Histogram mode(s) to run; `both` also writes sweep_<param>_raw.csv
        #[arg(long, value_enum, default_value = "normalized")]
        normalization: Normalization,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Read frames (one JSON array per line) from stdin, print events as they fire
    Stream {
        #[arg(long)]
        model: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> CliResult {
    let config = cli.config.as_deref();
    match cli.command {
        Command::Generate { preset, out } => cmd_generate(config, cli.seed, preset, &out),
        Command::Train { data, out, pipeline } => {
            let params = config::resolve(config, cli.seed, &pipeline)?;
            cmd_train(&data, &out, &params)
        }
        Command::Classify { model, input } => cmd_classify(&model, &input),
        Command::Evaluate {
            data,
            split,
            train_fraction,
            seeds,
            features,
            out_dir,
            pipeline,
        } => {
            let params = config::resolve(config, cli.seed, &pipeline)?;
            let options = EvaluateOptions {
                split,
                train_fraction,
                seeds,
                features,
                out_dir,
            };
            cmd_evaluate(&data, &options, &params)
        }
        Command::Sweep {
            data,
            param,
            values,
            train_fraction,
            normalization,
            out_dir,
            pipeline,
        } => {
            let params = config::resolve(config, cli.seed, &pipeline)?;
            let parameter: SweepParameter = param.parse()?;
            cmd_sweep(&data, parameter, values, train_fraction, normalization, &out_dir, &params)
        }
        Command::Stream { model } => cmd_stream(&model),
    }
}

fn read_dataset_file(path: &Path) -> CliResult<Dataset> {
    load_dataset(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn read_model(path: &Path) -> CliResult<SvmModel> {
    SvmModel::load(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn cmd_generate(config: Option<&Path>, seed: Option<u64>, preset: Option<Preset>, out: &Path) -> CliResult {
    let mut generator = match (config, preset) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
            GeneratorConfig::from_kv_text(&text)?
        }
        (None, Some(Preset::Easy)) => GeneratorConfig::easy(),
        (None, Some(Preset::Hard)) => GeneratorConfig::hard(),
        (None, Some(Preset::PaperShape) | None) => GeneratorConfig::paper_shape(),
    };
    if let Some(seed) = seed {
        generator.seed = seed;
    }
    let dataset = generate(&generator)?;
    save_dataset(&dataset, out)?;
    println!("wrote {} samples to {}", dataset.len(), out.display());
    Ok(())
}

fn cmd_train(data: &Path, out: &Path, params: &PipelineParams) -> CliResult {
    let dataset = read_dataset_file(data)?;
    let samples: Vec<&EventSample> = dataset.samples.iter().collect();
    let outcome = fit(&samples, dataset.max_taxel_value, params)?;
    let model = outcome.model;
    let mut confusion = ConfusionMatrix::new();
    for (features, &truth) in outcome.train_features.iter().zip(&outcome.train_labels) {
        confusion.record(truth, model.classify_features(features)?.label);
    }
    model.save(out)?;
    println!(
        "trained on {} samples ({} skipped): K={} W={} T={}",
        outcome.train_labels.len(),
        outcome.skipped.len(),
        model.codebook.k(),
        model.codebook.window(),
        model.config.t
    );
    println!("train accuracy {}", fmt_acc(confusion.accuracy()));
    println!("model written to {}", out.display());
    Ok(())
}

fn fmt_acc(acc: Option<f64>) -> String {
    acc.map(|a| format!("{a:.4}")).unwrap_or_else(|| "n/a".into())
}

fn describe(c: &Classification) -> String {
    let votes: Vec<String> = EventLabel::ALL
        .iter()
        .zip(c.votes)
        .map(|(l, v)| format!("{l}={v}"))
        .collect();
    format!("{}\t{}", c.label, votes.join(" "))
}

/// A file whose first non-blank line is a JSON array holds bare frames.
fn is_frame_file(path: &Path) -> CliResult<bool> {
    let file = File::open(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    for line in io::BufReader::new(file).lines() {
        let line = line?;
        let trimmed = line.trim_start();
        if !trimmed.is_empty() {
            return Ok(trimmed.starts_with('['));
        }
    }
    Ok(false)
}

fn read_frames(path: &Path) -> CliResult<Vec<TaxelFrame>> {
    let file = File::open(path)?;
    let mut frames = Vec::new();
    for (i, line) in io::BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        frames.push(parse_frame_line(&line, i + 1).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?);
    }
    Ok(frames)
}

fn cmd_classify(model_path: &Path, input: &Path) -> CliResult {
    let model = read_model(model_path)?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    if is_frame_file(input)? {
        let frames = read_frames(input)?;
        let (onset, classification) = model.classify_frames(&frames, "input")?;
        writeln!(out, "input\t{}\tonset={onset}", describe(&classification))?;
        return Ok(());
    }
    let dataset = read_dataset_file(input)?;
    let (mut correct, mut scored) = (0usize, 0usize);
    for sample in &dataset.samples {
        match model.classify_sample(sample) {
            Ok(c) => {
                scored += 1;
                correct += usize::from(c.label == sample.label);
                writeln!(out, "{}\t{}", sample.sample_id, describe(&c))?;
            }
            Err(e) if e.is_segmentation_failure() => writeln!(out, "{}\tskipped\t{e}", sample.sample_id)?,
            Err(e) => return Err(e.into()),
        }
    }
    if scored > 0 {
        eprintln!("{correct}/{scored} match the stored labels");
    }
    Ok(())
}

struct EvaluateOptions {
    split: SplitKind,
    train_fraction: f64,
    seeds: u64,
    features: Features,
    out_dir: Option<PathBuf>,
}

fn print_matrix(m: &ConfusionMatrix) {
    print!("{:>8}", "true\\pred");
    for l in EventLabel::ALL {
        print!("{:>7}", l.as_str());
    }
    println!();
    for (l, row) in EventLabel::ALL.iter().zip(&m.counts) {
        print!("{:>8} ", l.as_str());
        for c in row {
            print!("{c:>7}");
        }
        println!();
    }
}

fn write_outputs(out_dir: &Path, confusion: &ConfusionMatrix, projection: Option<(&Dataset, &SvmModel)>) -> CliResult {
    fs::create_dir_all(out_dir)?;
    write_confusion_csv(confusion, BufWriter::new(File::create(out_dir.join("confusion.csv"))?))?;
    if let Some((dataset, model)) = projection {
        let (features, labels) = model_features(dataset, model)?;
        let projected = project_features(&features, &labels)?;
        write_projection_csv(
            &projected.projection.points,
            &projected.labels,
            &projected.sample_ids,
            BufWriter::new(File::create(out_dir.join("projection.csv"))?),
        )?;
    }
    Ok(())
}

fn cmd_evaluate(data: &Path, options: &EvaluateOptions, params: &PipelineParams) -> CliResult {
    let dataset = read_dataset_file(data)?;
    if options.seeds == 0 {
        return Err(CliError::Usage("--seeds must be at least 1".into()));
    }
    match (options.split, options.features) {
        (SplitKind::Pooled, Features::Bow) => {
            let seeds: Vec<u64> = (params.seed..params.seed + options.seeds).collect();
            let split = SplitSpec::pooled(options.train_fraction, seeds[0]);
            let report = run_experiment(&dataset, &split, params)?;
            println!(
                "pooled split (seed {}): {} train / {} test, {} test samples skipped",
                seeds[0],
                report.train_size,
                report.test_size,
                report.skipped.len()
            );
            println!("accuracy {:.4}", report.accuracy);
            print_matrix(&report.confusion);
            if seeds.len() > 1 {
                let summary = pooled_over_seeds(&dataset, params, options.train_fraction, &seeds)?;
                println!(
                    "over {} split seeds: mean {:.4} ± {:.4} (sample std)",
                    seeds.len(),
                    summary.mean,
                    summary.std_dev
                );
            }
            if let Some(dir) = &options.out_dir {
                write_outputs(dir, &report.confusion, Some((&dataset, &report.model)))?;
            }
        }
        (SplitKind::Loso, Features::Bow) => {
            let report = run_loso_suite(&dataset, params)?;
            for fold in &report.folds {
                println!(
                    "held out {}: accuracy {:.4} ({} skipped)",
                    fold.subject, fold.accuracy, fold.skipped
                );
            }
            println!("mean fold accuracy {:.4}", report.mean_fold_accuracy());
            println!("pooled over folds: accuracy {}", fmt_acc(report.pooled.accuracy()));
            print_matrix(&report.pooled);
            if let Some(dir) = &options.out_dir {
                write_outputs(dir, &report.pooled, None)?;
            }
        }
        (split, Features::Handcrafted) => {
            let specs: Vec<SplitSpec> = match split {
                SplitKind::Pooled => (params.seed..params.seed + options.seeds)
                    .map(|s| SplitSpec::pooled(options.train_fraction, s))
                    .collect(),
                SplitKind::Loso => dataset.subjects().into_iter().map(SplitSpec::loso).collect(),
            };
            let mut pooled = ConfusionMatrix::new();
            for spec in &specs {
                let (confusion, accuracy) = run_handcrafted_experiment(&dataset, spec, params)?;
                println!("{spec:?}: accuracy {accuracy:.4}");
                pooled += &confusion;
            }
            println!("handcrafted features, all runs: accuracy {}", fmt_acc(pooled.accuracy()));
            print_matrix(&pooled);
            if let Some(dir) = &options.out_dir {
                write_outputs(dir, &pooled, None)?;
            }
        }
    }
    Ok(())
}

fn default_values(parameter: SweepParameter) -> Vec<usize> {
    match parameter {
        SweepParameter::K => vec![2, 5, 10, 20, 40, 80],
        SweepParameter::W => vec![3, 5, 7, 9, 11],
        SweepParameter::T => vec![8, 11, 15, 20, 25],
    }
}

fn cmd_sweep(
    data: &Path,
    parameter: SweepParameter,
    values: Vec<usize>,
    train_fraction: f64,
    normalization: Normalization,
    out_dir: &Path,
    params: &PipelineParams,
) -> CliResult {
    let dataset = read_dataset_file(data)?;
    let values = if values.is_empty() { default_values(parameter) } else { values };
    let split = SplitSpec::pooled(train_fraction, params.seed);
    fs::create_dir_all(out_dir)?;
    let modes: &[(bool, &str)] = match normalization {
        Normalization::Normalized => &[(true, "")],
        Normalization::Raw => &[(false, "")],
        Normalization::Both => &[(true, ""), (false, "_raw")],
    };
    for &(normalize, suffix) in modes {
        let fixed = PipelineParams {
            normalize,
            ..params.clone()
        };
        let result = sweep(&dataset, parameter, &values, &fixed, &split)?;
        let name = sweep_file_name(parameter).replace(".csv", &format!("{suffix}.csv"));
        let path = out_dir.join(name);
        write_sweep_csv(&result, BufWriter::new(File::create(&path)?))?;
        println!("{} ({}):", path.display(), if normalize { "normalized" } else { "raw counts" });
        for p in &result.points {
            println!(
                "  {}={:<4} accuracy {:<8} skipped {:<3} {:.1?}",
                parameter,
                p.value,
                fmt_acc(p.accuracy),
                p.skipped,
                p.elapsed
            );
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct EventOut {
    onset: u64,
    emitted_at: u64,
    label: EventLabel,
    votes: [u32; 4],
}

fn cmd_stream(model_path: &Path) -> CliResult {
    let model = read_model(model_path)?;
    let mut classifier = StreamClassifier::new(&model)?;
    let stdin = io::stdin();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let mut timestamp = 0u64;
    for (i, line) in stdin.lock().lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let frame = parse_frame_line(&line, i + 1)?;
        if let Some(event) = classifier.push(timestamp, frame)? {
            let record = EventOut {
                onset: event.onset,
                emitted_at: event.emitted_at,
                label: event.classification.label,
                votes: event.classification.votes,
            };
            let json = serde_json::to_string(&record).map_err(|e| CliError::Data(e.to_string()))?;
            writeln!(out, "{json}")?;
            out.flush()?;
        }
        timestamp += 1;
    }
    Ok(())
}
