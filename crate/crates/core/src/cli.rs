//! Command-line front end. One subcommand per pipeline stage.
//!
//! Exit status: 0 on success, 1 on a usage error, 2 on a data error.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::eval::{evaluate_split, format_predictions, predict_topk, Query, Slot};
use crate::features::{
    build_alignment_pairs, extract_pair_features, geometry_table, load_features, save_features,
    uncovered_triples, KindSet,
};
use crate::geometry::{mean_latitude, read_geometry_file, Projection};
use crate::kg::{
    dedup_triples, ingest_triples, split_dataset, FilterMode, SplitManifest, SplitRatio, Vocabulary,
};
use crate::synth::{generate, GenConfig};
use crate::train::{train_with_progress, write_loss_curve, Checkpoint, TrainConfig, TrainData};

pub const RUN_HEADER: &str = "run_header.txt";
pub const FEATURES_FILE: &str = "features.tsv";
pub const CHECKPOINT_FILE: &str = "checkpoint.bin";
pub const LOSS_FILE: &str = "loss.tsv";
pub const METRICS_FILE: &str = "metrics.tsv";
pub const PREDICTIONS_FILE: &str = "predictions.tsv";

#[derive(Debug, Parser)]
#[command(name = "geokge", version, about = "Geometry-enhanced knowledge graph embedding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic dataset (geometries, triples, term manifest).
    Synth(SynthArgs),
    /// Compute topology, direction and distance features for entity pairs.
    BuildFeatures(FeatureArgs),
    /// Split a triple file into train/valid/test.
    Split(SplitArgs),
    /// Train embeddings on a split.
    Train(TrainArgs),
    /// Filtered link-prediction metrics of a checkpoint.
    Evaluate(EvalArgs),
    /// Top-k completions of a partial triple.
    Predict(PredictArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 500)]
    entities: usize,
    #[arg(long, default_value_t = 3000)]
    triples: usize,
    /// Terms per synonym group.
    #[arg(long, default_value_t = 3)]
    synonyms: usize,
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100.0)]
    extent: f64,
}

#[derive(Debug, Args)]
struct FeatureArgs {
    #[arg(long)]
    triples: PathBuf,
    #[arg(long)]
    geoms: PathBuf,
    #[arg(long, default_value_t = 20)]
    dis_bins: usize,
    /// Coordinates are longitude/latitude degrees; project to metres first.
    #[arg(long)]
    lonlat: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SplitArgs {
    #[arg(long)]
    triples: PathBuf,
    #[arg(long, default_value = "87:3:10")]
    ratio: SplitRatio,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Drop repeated triples before splitting.
    #[arg(long)]
    dedup: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Split directory written by `split`.
    #[arg(long)]
    split: PathBuf,
    /// Features file written by `build-features`.
    #[arg(long)]
    feature_file: Option<PathBuf>,
    /// Feature kinds to align with, e.g. `topo,dir,dis`; empty for none.
    #[arg(long)]
    features: Option<KindSet>,
    /// `key = value` configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    neg_rate: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    align_weight: Option<f64>,
    #[arg(long)]
    adv_temp: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Suppress per-epoch lines.
    #[arg(long)]
    quiet: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    split: PathBuf,
    /// Which part of the split to rank.
    #[arg(long, default_value = "test", value_parser = ["test", "valid", "train"])]
    on: String,
    #[arg(long, default_value = "all")]
    filter: FilterMode,
    #[arg(long)]
    full_precision: bool,
    /// Directory for the metrics file and run header.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    split: PathBuf,
    #[arg(long)]
    head: Option<String>,
    #[arg(long)]
    relation: Option<String>,
    #[arg(long)]
    tail: Option<String>,
    #[arg(long, default_value_t = 5)]
    top: usize,
    #[arg(long, default_value = "all")]
    filter: FilterMode,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// Runs the tool with process stdout/stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

/// Runs the tool writing reports to `out` and diagnostics to `err`.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let command_line = argv
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join(" ");
    let result = match cli.command {
        Command::Synth(a) => synth(a, &command_line, err),
        Command::BuildFeatures(a) => build_features(a, &command_line, err),
        Command::Split(a) => split(a, &command_line, err),
        Command::Train(a) => train_cmd(a, &command_line, err),
        Command::Evaluate(a) => evaluate(a, &command_line, out),
        Command::Predict(a) => predict(a, &command_line, out),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
        Err(Failure::Data(e)) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Records what produced the files in `dir`.
fn write_header(dir: &Path, command_line: &str, settings: &str) -> Result<()> {
    let mut text = String::new();
    let _ = writeln!(text, "tool = geokge {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(text, "command = {command_line}");
    text.push_str(settings);
    let path = dir.join(RUN_HEADER);
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

fn synth(a: SynthArgs, command_line: &str, err: &mut dyn Write) -> CmdResult {
    let cfg = GenConfig {
        n_entities: a.entities,
        n_triples: a.triples,
        synonym_groups: GenConfig::synonym_groups(a.synonyms),
        noise_rate: a.noise,
        seed: a.seed,
        extent: a.extent,
        ..GenConfig::default()
    };
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let ds = generate(&cfg)?;
    ds.write(&a.out)?;
    let r = &ds.report;
    for arche in r.unsatisfiable() {
        let _ = writeln!(err, "warning: no entity pair realises `{arche}`");
    }
    let _ = writeln!(
        err,
        "{} entities, {} triples ({} noisy, {} skipped as duplicates)",
        ds.entities.len(),
        ds.triples.len(),
        r.noisy,
        r.duplicate_skips
    );
    let settings = format!(
        "seed = {}\nentities = {}\ntriples = {}\nsynonyms = {}\nnoise = {:?}\nextent = {:?}\n",
        a.seed, a.entities, a.triples, a.synonyms, a.noise, a.extent
    );
    write_header(&a.out, command_line, &settings)?;
    Ok(())
}

fn build_features(a: FeatureArgs, command_line: &str, err: &mut dyn Write) -> CmdResult {
    if a.dis_bins == 0 {
        return Err(Failure::Usage("--dis-bins must be at least 1".into()));
    }
    let (entities, _, triples) = ingest_triples(&a.triples, Vocabulary::new(), Vocabulary::new())?;
    let mut geoms = read_geometry_file(&a.geoms)?;
    if a.lonlat {
        let ref_lat = mean_latitude(geoms.iter().map(|(_, g)| g));
        let proj = Projection::Equirectangular { ref_lat };
        for (_, g) in &mut geoms {
            *g = g.project(proj).map_err(Error::from)?;
        }
    }
    let table = geometry_table(&entities, geoms);
    let ex = extract_pair_features(&triples, &table, a.dis_bins)?;
    for &id in &ex.missing_geometry {
        let _ = writeln!(err, "warning: entity `{}` has no geometry", entities.name(id));
    }
    if ex.skipped_pairs > 0 {
        let _ = writeln!(err, "warning: {} pairs skipped for missing geometry", ex.skipped_pairs);
    }
    let pf = &ex.features;
    if pf.breaks.classes() < pf.breaks.requested() {
        let _ = writeln!(
            err,
            "warning: only {} distinct distances; using {} distance classes instead of {}",
            pf.breaks.classes(),
            pf.breaks.classes(),
            pf.breaks.requested()
        );
    }
    create_dir(&a.out)?;
    let path = a.out.join(FEATURES_FILE);
    save_features(&path, &breaks_path(&path), pf, &entities)?;
    let sizes = pf.sizes();
    let _ = writeln!(
        err,
        "{} pairs; {} topology, {} direction, {} distance categories",
        pf.len(),
        sizes[0],
        sizes[1],
        sizes[2]
    );
    let settings = format!("dis_bins = {}\nlonlat = {}\n", a.dis_bins, a.lonlat);
    write_header(&a.out, command_line, &settings)?;
    Ok(())
}

/// Sidecar holding the distance breaks of a features file.
pub fn breaks_path(features: &Path) -> PathBuf {
    features.with_extension("breaks")
}

fn split(a: SplitArgs, command_line: &str, err: &mut dyn Write) -> CmdResult {
    let (entities, relations, mut triples) =
        ingest_triples(&a.triples, Vocabulary::new(), Vocabulary::new())?;
    if a.dedup {
        let before = triples.len();
        dedup_triples(&mut triples);
        let _ = writeln!(err, "dropped {} repeated triples", before - triples.len());
    }
    let split = split_dataset(&triples, a.ratio, a.seed)?;
    let _ = writeln!(
        err,
        "train {}, valid {}, test {}",
        split.train.len(),
        split.valid.len(),
        split.test.len()
    );
    let manifest = SplitManifest {
        entities,
        relations,
        split,
    };
    manifest.save(&a.out, a.ratio)?;
    let settings = format!("seed = {}\nratio = {}\ndedup = {}\n", a.seed, a.ratio, a.dedup);
    write_header(&a.out, command_line, &settings)?;
    Ok(())
}

fn train_config(a: &TrainArgs) -> std::result::Result<TrainConfig, Failure> {
    let mut cfg = match &a.config {
        Some(path) => TrainConfig::load(path)?,
        None => TrainConfig::default(),
    };
    if let Some(v) = a.k {
        cfg.k = v;
    }
    if let Some(v) = a.gamma {
        cfg.gamma = v;
    }
    if let Some(v) = a.lr {
        cfg.lr = v;
    }
    if let Some(v) = a.neg_rate {
        cfg.neg_rate = v;
    }
    if let Some(v) = a.epochs {
        cfg.epochs = v;
    }
    if let Some(v) = a.batch {
        cfg.batch_size = v;
    }
    if let Some(v) = a.align_weight {
        cfg.align_weight = v;
    }
    if let Some(v) = a.adv_temp {
        cfg.adversarial_temperature = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = a.features {
        cfg.enabled_kinds = v;
    }
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    if !cfg.enabled_kinds.is_empty() && a.feature_file.is_none() {
        return Err(Failure::Usage(format!(
            "feature kinds `{}` need --feature-file (pass --features= for none)",
            cfg.enabled_kinds
        )));
    }
    Ok(cfg)
}

fn train_cmd(a: TrainArgs, command_line: &str, err: &mut dyn Write) -> CmdResult {
    let cfg = train_config(&a)?;
    let manifest = SplitManifest::load(&a.split)?;
    let train = &manifest.split.train;
    let features = match &a.feature_file {
        Some(path) => Some(load_features(path, &breaks_path(path), &manifest.entities)?),
        None => None,
    };
    let pairs = match &features {
        Some(pf) => {
            let uncovered = uncovered_triples(train, pf);
            if uncovered > 0 && !cfg.enabled_kinds.is_empty() {
                let _ = writeln!(err, "warning: {uncovered} training triples have no pair features");
            }
            build_alignment_pairs(train, pf, cfg.enabled_kinds)
        }
        None => Vec::new(),
    };
    let mut data = TrainData::new(train, manifest.entities.len(), manifest.relations.len());
    if let Some(pf) = &features {
        data = data.with_features(pf, &pairs);
    }
    let quiet = a.quiet;
    let output = train_with_progress(&data, &cfg, |l| {
        if !quiet {
            let _ = writeln!(
                err,
                "epoch {}\ttriplet {:.6}\talignment {:.6}",
                l.epoch + 1,
                l.triplet,
                l.alignment
            );
        }
    })?;
    if output.stats.retry_exhausted > 0 {
        let _ = writeln!(
            err,
            "warning: {} negatives accepted after exhausting retries",
            output.stats.retry_exhausted
        );
    }
    if output.stats.empty_alignment_sets > 0 {
        let _ = writeln!(
            err,
            "warning: {} alignment draws had a single-category kind and no negatives",
            output.stats.empty_alignment_sets
        );
    }
    create_dir(&a.out)?;
    write_loss_curve(&a.out.join(LOSS_FILE), &output.losses)?;
    let ckpt = output.into_checkpoint(&cfg, manifest.vocab_hash());
    ckpt.save(&a.out.join(CHECKPOINT_FILE))?;
    let mut settings = cfg.to_text();
    let _ = writeln!(settings, "split = {}", a.split.display());
    if let Some(f) = &a.feature_file {
        let _ = writeln!(settings, "feature_file = {}", f.display());
    }
    let _ = writeln!(settings, "vocab_hash = {:016x}", ckpt.vocab_hash);
    let _ = writeln!(settings, "rng_digest = {}", ckpt.rng_digest);
    write_header(&a.out, command_line, &settings)?;
    Ok(())
}

fn load_checked(checkpoint: &Path, split: &Path) -> Result<(Checkpoint, SplitManifest)> {
    let ckpt = Checkpoint::load(checkpoint)?;
    let manifest = SplitManifest::load(split)?;
    ckpt.check_vocab_hash(manifest.vocab_hash())?;
    ckpt.check_dimensions(ckpt.config.k, manifest.entities.len(), manifest.relations.len())?;
    Ok((ckpt, manifest))
}

fn evaluate(a: EvalArgs, command_line: &str, out: &mut dyn Write) -> CmdResult {
    let (ckpt, manifest) = load_checked(&a.checkpoint, &a.split)?;
    let s = &manifest.split;
    let triples = match a.on.as_str() {
        "valid" => &s.valid,
        "train" => &s.train,
        _ => &s.test,
    };
    let filter = a.filter.build_index(s);
    let table = evaluate_split(&ckpt.space, triples, &filter).to_tsv(a.full_precision);
    out.write_all(table.as_bytes())
        .map_err(|e| Error::io("<stdout>", e))?;
    if let Some(dir) = &a.out {
        create_dir(dir)?;
        let path = dir.join(METRICS_FILE);
        std::fs::write(&path, &table).map_err(|e| Error::io(&path, e))?;
        let settings = format!(
            "checkpoint = {}\nsplit = {}\non = {}\nfilter = {:?}\nrng_digest = {}\n",
            a.checkpoint.display(),
            a.split.display(),
            a.on,
            a.filter,
            ckpt.rng_digest
        );
        write_header(dir, command_line, &settings)?;
    }
    Ok(())
}

fn predict(a: PredictArgs, command_line: &str, out: &mut dyn Write) -> CmdResult {
    if a.top == 0 {
        return Err(Failure::Usage("--top must be at least 1".into()));
    }
    let given = [&a.head, &a.relation, &a.tail].iter().filter(|v| v.is_some()).count();
    if given != 2 {
        return Err(Failure::Usage(
            "give exactly two of --head, --relation and --tail".into(),
        ));
    }
    let (ckpt, manifest) = load_checked(&a.checkpoint, &a.split)?;
    let entity = |name: &Option<String>| -> Result<usize> {
        match name {
            None => Ok(0),
            Some(n) => manifest.entities.id(n).ok_or_else(|| Error::UnknownName {
                kind: "entity",
                name: n.clone(),
            }),
        }
    };
    let relation = match &a.relation {
        None => 0,
        Some(n) => manifest.relations.id(n).ok_or_else(|| Error::UnknownName {
            kind: "relation",
            name: n.clone(),
        })?,
    };
    let slot = if a.head.is_none() {
        Slot::Head
    } else if a.tail.is_none() {
        Slot::Tail
    } else {
        Slot::Relation
    };
    let triple = crate::kg::Triple::new(entity(&a.head)?, relation, entity(&a.tail)?);
    let filter = a.filter.build_index(&manifest.split);
    let preds = predict_topk(&ckpt.space, Query::new(triple, slot), a.top, &filter);
    let names = match slot {
        Slot::Relation => &manifest.relations,
        _ => &manifest.entities,
    };
    let report = format_predictions(&preds, names);
    out.write_all(report.as_bytes())
        .map_err(|e| Error::io("<stdout>", e))?;
    if let Some(dir) = &a.out {
        create_dir(dir)?;
        let path = dir.join(PREDICTIONS_FILE);
        std::fs::write(&path, &report).map_err(|e| Error::io(&path, e))?;
        let settings = format!(
            "checkpoint = {}\nsplit = {}\nhead = {}\nrelation = {}\ntail = {}\ntop = {}\nfilter = {:?}\n",
            a.checkpoint.display(),
            a.split.display(),
            a.head.as_deref().unwrap_or("?"),
            a.relation.as_deref().unwrap_or("?"),
            a.tail.as_deref().unwrap_or("?"),
            a.top,
            a.filter
        );
        write_header(dir, command_line, &settings)?;
    }
    Ok(())
}
