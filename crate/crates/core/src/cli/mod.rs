//! Command-line front end. Every subcommand that produces artifacts claims
//! its output directory and writes a [`RunManifest`] before anything else.
//!
//! Exit codes: 0 success, 2 usage or configuration, 3 invalid data,
//! 4 runtime failure, 5 nothing to visualize.

mod config;
mod manifest;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

pub use config::{resolve_config, FlagOverrides, Preset, RunConfig};
pub use manifest::{sha256_file, InputDigest, OutputDir, RunManifest, LOCK_FILE, MANIFEST_FILE};

use crate::corpus::{
    import_benchmark_tsv, join_sources, load_captions, load_scene_graphs, load_split, reference_counts, split_stats,
    validate_caption_file, validate_dataset_file, validate_scene_graph_file, write_split, Finding, JoinedInstance,
    SplitName,
};
use crate::error::{Error, ErrorFamily};
use crate::harness::{
    ablated_config, evaluate, format_table, parse_table, run_ablation, run_experiment, run_experiment_from,
    run_triple_sweep, write_metrics_log, write_predictions, Ablation, ExperimentData, MAX_SWEEP_K,
};
use crate::model::{extract_cross_attention, prepare_input, SentimentModel};
use crate::semgraph::{build_graph_input, Template};
use crate::synthetic::demo_corpus;
use crate::viz::{plot_rows_svg, write_heatmap_png, HeatmapWeights};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_RUNTIME: i32 = 4;
pub const EXIT_NOTHING_TO_VISUALIZE: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "seqcsg",
    version,
    about = "Multi-modal target sentiment classification over serialized scene graphs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct DataArgs {
    /// Directory holding one sub-directory per dataset.
    #[arg(long, env = "SEQCSG_DATA_ROOT", default_value = "data")]
    pub data_root: PathBuf,
    /// Dataset name (sub-directory of the data root).
    #[arg(long, default_value = "twitter2015")]
    pub dataset: String,
    /// Region-feature backbone; selects scene_graphs.<name>.jsonl when present.
    #[arg(long, default_value = "resnet50")]
    pub image_encoder: String,
}

impl DataArgs {
    fn dir(&self) -> PathBuf {
        self.data_root.join(&self.dataset)
    }

    fn files(&self) -> DatasetFiles {
        DatasetFiles::locate(&self.dir(), &self.image_encoder)
    }
}

#[derive(Debug, Args, Clone)]
pub struct RunArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Output directory for the manifest and artifacts.
    #[arg(long)]
    pub out: PathBuf,
    /// Overwrite an output directory that already holds a manifest.
    #[arg(long)]
    pub force: bool,
    /// TOML file with [model] and [train] tables and an optional ablations list.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "tiny")]
    pub preset: Preset,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub k_object_object: Option<usize>,
    #[arg(long)]
    pub k_image_object: Option<usize>,
    /// Input template: plain or tagged.
    #[arg(long)]
    pub template: Option<Template>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Stop after this many optimizer steps.
    #[arg(long)]
    pub max_steps: Option<usize>,
    /// Mechanism to remove (repeatable): caption, adjacency,
    /// adjacency-scene-graph, prompt, freeze.
    #[arg(long = "ablate")]
    pub ablate: Vec<Ablation>,
    /// Start `train` from this checkpoint (e.g. converted pretrained weights)
    /// instead of a random initialization. Its shapes must match the
    /// resolved configuration.
    #[arg(long)]
    pub init: Option<PathBuf>,
}

impl RunArgs {
    fn overrides(&self) -> FlagOverrides {
        FlagOverrides {
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.lr,
            image_encoder: Some(self.data.image_encoder.clone()),
            k_object_object: self.k_object_object,
            k_image_object: self.k_image_object,
            template: self.template,
            seed: self.seed,
            max_steps: self.max_steps,
            ablations: self.ablate.clone(),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check dataset, caption and scene-graph files; nonzero exit on findings.
    Validate {
        /// Files or dataset directories. Defaults to the configured dataset.
        paths: Vec<PathBuf>,
        #[command(flatten)]
        data: DataArgs,
    },
    /// Convert a benchmark TSV (labels 0/1/2, $T$ placeholders) to the dataset format.
    Import {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        split: SplitName,
        #[arg(long)]
        output: PathBuf,
    },
    /// Print label counts and sentence statistics per split.
    Stats {
        #[command(flatten)]
        data: DataArgs,
    },
    /// Train, select on dev, score on test.
    Train(RunArgs),
    /// Score a checkpoint on one split.
    Eval {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value = "test")]
        split: SplitName,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        force: bool,
    },
    /// One train + evaluate per removed mechanism (all five when none given).
    Ablate(RunArgs),
    /// One train + evaluate per triple count k (object-object = image-object = k).
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Triple counts, comma separated; defaults to 0..=10.
        #[arg(long = "k", value_delimiter = ',')]
        ks: Vec<usize>,
    },
    /// Cross-attention heatmap from [mask] onto the [img] tokens of one sample.
    Visualize {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        sample_id: String,
        #[arg(long, default_value = "test")]
        split: SplitName,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        force: bool,
    },
    /// Re-render a heatmap PNG from its numeric weights file.
    Render {
        #[arg(long)]
        weights: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Print the encoder sequence and visibility matrix of one sample.
    Matrix {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        sample_id: String,
        #[arg(long, default_value = "train")]
        split: SplitName,
        #[arg(long, default_value_t = 5)]
        k_object_object: usize,
        #[arg(long, default_value_t = 5)]
        k_image_object: usize,
        #[arg(long, default_value = "plain")]
        template: Template,
        /// Also write the matrix as row-major bytes (0/1) to this file.
        #[arg(long)]
        bytes: Option<PathBuf>,
    },
    /// SVG line plot of an ablation or sweep table.
    Plot {
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value = "")]
        title: String,
    },
    /// Write a generated demo dataset (train/dev/test, captions, scene graphs).
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Samples per split: train,dev,test.
        #[arg(long, value_delimiter = ',', default_values_t = [120, 40, 40])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 8)]
        feature_dim: usize,
    },
}

/// How a command failed.
#[derive(Debug)]
pub enum Failure {
    Lib(Error),
    Findings(usize),
    NothingToVisualize(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(e.into())
    }
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Lib(e) => match e.family() {
                ErrorFamily::Config => EXIT_CONFIG,
                ErrorFamily::Data => EXIT_DATA,
                ErrorFamily::Runtime => EXIT_RUNTIME,
            },
            Failure::Findings(_) => EXIT_DATA,
            Failure::NothingToVisualize(_) => EXIT_NOTHING_TO_VISUALIZE,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Lib(e) => e.to_string(),
            Failure::Findings(n) => format!("{n} finding(s)"),
            Failure::NothingToVisualize(m) => format!("nothing to visualize: {m}"),
        }
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// Parses `args` (program name first) and runs the command, returning the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.exit_code()
        }
    }
}

pub fn execute(command: Command) -> CmdResult {
    match command {
        Command::Validate { paths, data } => cmd_validate(&paths, &data),
        Command::Import { input, split, output } => {
            let s = import_benchmark_tsv(&input, split)?;
            write_split(&output, &s)?;
            println!("wrote {} samples to {}", s.len(), output.display());
            Ok(())
        }
        Command::Stats { data } => cmd_stats(&data),
        Command::Train(args) => cmd_train(&args),
        Command::Eval {
            data,
            checkpoint,
            split,
            out,
            force,
        } => cmd_eval(&data, &checkpoint, split, &out, force),
        Command::Ablate(args) => cmd_ablate(&args),
        Command::Sweep { run, ks } => cmd_sweep(&run, &ks),
        Command::Visualize {
            data,
            checkpoint,
            sample_id,
            split,
            out,
            force,
        } => cmd_visualize(&data, &checkpoint, &sample_id, split, &out, force),
        Command::Render { weights, output } => {
            write_heatmap_png(&output, &HeatmapWeights::load(&weights)?)?;
            Ok(())
        }
        Command::Matrix {
            data,
            sample_id,
            split,
            k_object_object,
            k_image_object,
            template,
            bytes,
        } => cmd_matrix(
            &data,
            &sample_id,
            split,
            k_object_object,
            k_image_object,
            template,
            bytes.as_deref(),
        ),
        Command::Plot { table, output, title } => {
            let rows = parse_table(&fs::read_to_string(&table)?)?;
            fs::write(&output, plot_rows_svg(&rows, &title))?;
            Ok(())
        }
        Command::Synth {
            out,
            seed,
            sizes,
            feature_dim,
        } => {
            let sizes: [usize; 3] = sizes
                .try_into()
                .map_err(|_| Error::Config("--sizes takes exactly three numbers".into()))?;
            let corpus = demo_corpus(seed, sizes, feature_dim);
            corpus.write_to(&out)?;
            println!("wrote demo dataset to {}", out.display());
            Ok(())
        }
    }
}

/// Standard file names inside a dataset directory.
#[derive(Debug, Clone)]
pub struct DatasetFiles {
    pub dir: PathBuf,
    pub captions: PathBuf,
    pub scene_graphs: PathBuf,
}

impl DatasetFiles {
    pub fn locate(dir: &Path, image_encoder: &str) -> Self {
        let variant = dir.join(format!("scene_graphs.{image_encoder}.jsonl"));
        Self {
            dir: dir.to_path_buf(),
            captions: dir.join("captions.jsonl"),
            scene_graphs: if variant.exists() {
                variant
            } else {
                dir.join("scene_graphs.jsonl")
            },
        }
    }

    pub fn split(&self, name: SplitName) -> PathBuf {
        self.dir.join(format!("{}.tsv", name.as_str()))
    }

    /// Every input file, for digests.
    pub fn all(&self) -> Vec<PathBuf> {
        let mut v: Vec<PathBuf> = SplitName::ALL.iter().map(|&s| self.split(s)).collect();
        v.push(self.captions.clone());
        v.push(self.scene_graphs.clone());
        v
    }
}

struct Loaded {
    splits: Vec<Vec<JoinedInstance>>,
}

fn load_joined(files: &DatasetFiles, which: &[SplitName], require_captions: bool) -> Result<Loaded, Error> {
    let captions = if files.captions.exists() || require_captions {
        load_captions(&files.captions)?
    } else {
        Vec::new()
    };
    let graphs = load_scene_graphs(&files.scene_graphs)?;
    let mut splits = Vec::new();
    for &name in which {
        let split = load_split(files.split(name), name)?;
        splits.push(join_sources(&split, &captions, &graphs.records, require_captions)?);
    }
    Ok(Loaded { splits })
}

fn print_findings(findings: &[Finding]) {
    for f in findings {
        println!("{f}");
    }
}

fn cmd_validate(paths: &[PathBuf], data: &DataArgs) -> CmdResult {
    let targets: Vec<PathBuf> = if paths.is_empty() {
        vec![data.dir()]
    } else {
        paths.to_vec()
    };
    let mut findings = Vec::new();
    for p in targets {
        if p.is_dir() {
            let files = DatasetFiles::locate(&p, &data.image_encoder);
            for name in SplitName::ALL {
                findings.extend(validate_dataset_file(&files.split(name)));
            }
            findings.extend(validate_caption_file(&files.captions));
            findings.extend(validate_scene_graph_file(&files.scene_graphs));
        } else {
            let name = p
                .file_name()
                .map(|n| n.to_string_lossy().to_lowercase())
                .unwrap_or_default();
            if name.ends_with(".tsv") {
                findings.extend(validate_dataset_file(&p));
            } else if name.contains("caption") {
                findings.extend(validate_caption_file(&p));
            } else if name.contains("scene") || name.contains("graph") {
                findings.extend(validate_scene_graph_file(&p));
            } else {
                return Err(Error::Config(format!(
                    "cannot tell the kind of {}; expected *.tsv, *caption*.jsonl or *scene_graph*.jsonl",
                    p.display()
                ))
                .into());
            }
        }
    }
    print_findings(&findings);
    if findings.is_empty() {
        println!("ok: no findings");
        Ok(())
    } else {
        Err(Failure::Findings(findings.len()))
    }
}

fn cmd_stats(data: &DataArgs) -> CmdResult {
    let files = data.files();
    println!("split\tpositive\tneutral\tnegative\ttotal\tsentences\ttargets_per_sentence\tmean_length");
    let mut mismatches = Vec::new();
    let mut known = false;
    for name in SplitName::ALL {
        let s = load_split(files.split(name), name)?;
        let st = split_stats(&s);
        println!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{:.2}\t{:.2}",
            name.as_str(),
            st.positive,
            st.neutral,
            st.negative,
            st.total,
            st.sentences,
            st.targets_per_sentence,
            st.mean_length
        );
        if let Some(reference) = reference_counts(&data.dataset, name) {
            known = true;
            mismatches.extend(reference.mismatches(&st));
        }
    }
    for m in &mismatches {
        println!("differs from the published counts: {m}");
    }
    if known && mismatches.is_empty() {
        println!("matches the published counts for {}", data.dataset);
    }
    Ok(())
}

fn digest_inputs(manifest: &mut RunManifest, paths: &[PathBuf]) -> Result<(), Error> {
    for p in paths {
        if p.exists() {
            manifest.add_input(p)?;
        }
    }
    Ok(())
}

fn prepare_run(args: &RunArgs, command: &str) -> Result<(RunConfig, ExperimentData, OutputDir, RunManifest), Failure> {
    if args.init.is_some() && command != "train" {
        return Err(Error::Config("--init only applies to train".into()).into());
    }
    let files = args.data.files();
    let header_dim = load_scene_graphs(&files.scene_graphs)?.feature_dim;
    let config = resolve_config(
        &args.data.dataset,
        args.preset,
        header_dim,
        args.config.as_deref(),
        &args.overrides(),
    )?;
    let loaded = load_joined(
        &files,
        &SplitName::ALL,
        config.model.flags.use_caption && !config.ablations.contains(&Ablation::Caption),
    )?;
    let mut splits = loaded.splits.into_iter();
    let data = ExperimentData::new(
        splits.next().expect("train"),
        splits.next().expect("dev"),
        splits.next().expect("test"),
    );
    let out = OutputDir::claim(&args.out, args.force)?;
    let mut manifest = RunManifest::new(command, serde_json::to_value(&config).map_err(Error::from)?);
    digest_inputs(&mut manifest, &files.all())?;
    Ok((config, data, out, manifest))
}

/// Checkpoint `path` with `config` applied, provided the parameter shapes
/// agree with what `config` would build.
fn initial_model(path: &Path, config: &crate::model::ModelConfig) -> Result<SentimentModel, Error> {
    let mut model = SentimentModel::load(path)?;
    let template = SentimentModel::new(config.clone(), model.vocab.clone(), 0)?;
    let shapes = |m: &SentimentModel| {
        m.params
            .iter()
            .map(|(_, n, t)| (n.to_string(), t.shape()))
            .collect::<Vec<_>>()
    };
    if shapes(&template) != shapes(&model) {
        return Err(Error::Config(format!(
            "{} does not fit the configured architecture (compare d_model, layers, heads, d_ff, \
             feature_dim, sequence budgets and freeze_image_encoder)",
            path.display()
        )));
    }
    model.config = config.clone();
    Ok(model)
}

fn cmd_train(args: &RunArgs) -> CmdResult {
    let (config, data, out, mut manifest) = prepare_run(args, "train")?;
    let init = match &args.init {
        Some(path) => {
            manifest.add_input(path)?;
            Some(initial_model(path, &effective_model_config(&config))?)
        }
        None => None,
    };
    manifest
        .artifact("checkpoint", "checkpoint.json")
        .artifact("metrics_log", "metrics.jsonl")
        .artifact("test_predictions", "predictions.test.jsonl")
        .artifact("report", "report.json");
    out.write_manifest(&manifest)?;

    let result = match init {
        Some(model) => run_experiment_from(&data, model, &config.train)?,
        None => run_experiment(&data, &effective_model_config(&config), &config.train)?,
    };
    result.model.save(&out.file("checkpoint.json"))?;
    write_metrics_log(&out.file("metrics.jsonl"), &result.log)?;
    write_predictions(&out.file("predictions.test.jsonl"), &result.test_predictions)?;
    let report = json!({
        "best_epoch": result.best_epoch,
        "dev": result.dev,
        "test": result.test,
        "test_last_epoch": result.test_last,
    });
    fs::write(
        out.file("report.json"),
        serde_json::to_string_pretty(&report).map_err(Error::from)?,
    )?;
    println!(
        "best epoch {}: dev macro-F1 {:.4}; test accuracy {:.4}, macro-F1 {:.4}",
        result.best_epoch, result.dev.macro_f1, result.test.accuracy, result.test.macro_f1
    );
    Ok(())
}

fn cmd_eval(data: &DataArgs, checkpoint: &Path, split: SplitName, out: &Path, force: bool) -> CmdResult {
    let model = SentimentModel::load(checkpoint)?;
    let files = data.files();
    let loaded = load_joined(&files, &[split], model.config.flags.use_caption)?;
    let out = OutputDir::claim(out, force)?;
    let mut manifest = RunManifest::new(
        "eval",
        json!({ "dataset": data.dataset, "split": split.as_str(), "model": model.config }),
    );
    digest_inputs(
        &mut manifest,
        &[
            checkpoint.to_path_buf(),
            files.split(split),
            files.captions.clone(),
            files.scene_graphs.clone(),
        ],
    )?;
    manifest
        .artifact("predictions", "predictions.jsonl")
        .artifact("report", "report.json");
    out.write_manifest(&manifest)?;
    let inputs = loaded.splits[0]
        .iter()
        .map(|i| prepare_input(i, &model.config))
        .collect::<Result<Vec<_>, _>>()?;
    let eval = evaluate(&model, &inputs)?;
    write_predictions(&out.file("predictions.jsonl"), &eval.predictions)?;
    fs::write(
        out.file("report.json"),
        serde_json::to_string_pretty(&eval.report).map_err(Error::from)?,
    )?;
    println!(
        "accuracy {:.4}, macro-F1 {:.4}",
        eval.report.accuracy, eval.report.macro_f1
    );
    Ok(())
}

fn cmd_ablate(args: &RunArgs) -> CmdResult {
    let (config, data, out, mut manifest) = prepare_run(args, "ablate")?;
    let ablations = if config.ablations.is_empty() {
        Ablation::ALL.to_vec()
    } else {
        config.ablations.clone()
    };
    manifest.artifact("table", "ablation.tsv");
    out.write_manifest(&manifest)?;
    let rows = run_ablation(&data, &config.model, &config.train, &ablations)?;
    let table = format_table(&rows);
    fs::write(out.file("ablation.tsv"), &table)?;
    print!("{table}");
    Ok(())
}

fn cmd_sweep(args: &RunArgs, ks: &[usize]) -> CmdResult {
    let ks: Vec<usize> = if ks.is_empty() {
        (0..=MAX_SWEEP_K).collect()
    } else {
        ks.to_vec()
    };
    let (config, data, out, mut manifest) = prepare_run(args, "sweep")?;
    manifest.config["k_values"] = json!(ks);
    manifest.artifact("table", "sweep.tsv");
    out.write_manifest(&manifest)?;
    let rows = run_triple_sweep(&data, &effective_model_config(&config), &config.train, &ks)?;
    let table = format_table(&rows);
    fs::write(out.file("sweep.tsv"), &table)?;
    print!("{table}");
    Ok(())
}

fn find_instance(instances: Vec<JoinedInstance>, sample_id: &str) -> Result<JoinedInstance, Error> {
    instances
        .into_iter()
        .find(|i| i.sample.sample_id == sample_id)
        .ok_or_else(|| Error::Validation(format!("no sample with id {sample_id:?}")))
}

fn cmd_visualize(
    data: &DataArgs,
    checkpoint: &Path,
    sample_id: &str,
    split: SplitName,
    out: &Path,
    force: bool,
) -> CmdResult {
    let model = SentimentModel::load(checkpoint)?;
    let files = data.files();
    let loaded = load_joined(&files, &[split], model.config.flags.use_caption)?;
    let instance = find_instance(loaded.splits.into_iter().next().expect("one split"), sample_id)?;
    let input = prepare_input(&instance, &model.config)?;
    let positions = input.sequence.image_positions();
    if positions.is_empty() {
        return Err(Failure::NothingToVisualize(format!(
            "sample {sample_id} has no [img] tokens"
        )));
    }
    let region_ids: Vec<String> = positions
        .iter()
        .map(|&p| input.sequence.tokens[p].region_id.clone().unwrap_or_default())
        .collect();
    let out = OutputDir::claim(out, force)?;
    let mut manifest = RunManifest::new(
        "visualize",
        json!({ "dataset": data.dataset, "split": split.as_str(), "sample_id": sample_id }),
    );
    digest_inputs(
        &mut manifest,
        &[
            checkpoint.to_path_buf(),
            files.split(split),
            files.captions.clone(),
            files.scene_graphs.clone(),
        ],
    )?;
    manifest
        .artifact("weights", "weights.json")
        .artifact("heatmap", "heatmap.png");
    out.write_manifest(&manifest)?;
    let forward = model.forward(&input, true)?;
    let attention = extract_cross_attention(&forward, &positions, &region_ids, input.mask_position)?;
    let weights = HeatmapWeights {
        sample_id: sample_id.to_string(),
        attention,
    };
    weights.save(&out.file("weights.json"))?;
    write_heatmap_png(&out.file("heatmap.png"), &weights)?;
    println!(
        "{} regions; mean weights {:?}",
        region_ids.len(),
        weights.attention.mean
    );
    Ok(())
}

fn cmd_matrix(
    data: &DataArgs,
    sample_id: &str,
    split: SplitName,
    k_oo: usize,
    k_io: usize,
    template: Template,
    bytes: Option<&Path>,
) -> CmdResult {
    let files = data.files();
    let loaded = load_joined(&files, &[split], false)?;
    let instance = find_instance(loaded.splits.into_iter().next().expect("one split"), sample_id)?;
    let seq_config = crate::semgraph::SequenceConfig {
        k_object_object: k_oo,
        k_image_object: k_io,
        template,
        ..Default::default()
    };
    let (seq, m) = build_graph_input(&instance, &seq_config)?;
    println!("{}", seq.render());
    print!("{}", m.to_labelled_grid(&seq));
    if let Some(path) = bytes {
        fs::write(path, m.as_bytes())?;
    }
    Ok(())
}

/// Model configuration of a run with its ablations applied.
pub fn effective_model_config(config: &RunConfig) -> crate::model::ModelConfig {
    let mut c = config.model.clone();
    for &a in &config.ablations {
        c = ablated_config(&c, Some(a));
    }
    c
}
