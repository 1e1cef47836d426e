use std::collections::{BTreeMap, HashSet};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context};
use rayon::prelude::*;
use serde::Serialize;
use stitchkit_core::inject::{corrupt, Synthesized};
use stitchkit_core::seed::{mix, sample_rng};
use stitchkit_core::{
    analytic_score, compute_eer, dataset_report, load_image, load_mask, save_image, save_mask, synthesize_sample,
    AugmentConfig, BinaryMask, GrayImage, MetricsReport, ScoreParams, ScoreReport, SynthesisParams, TRAINING_SIZE,
};

use crate::config::ToolkitConfig;
use crate::manifest::{Manifest, SampleRecord};
use crate::usage;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

const IMAGE_EXTENSIONS: [&str; 2] = ["png", "pgm"];

/// Image files directly inside `dir`, sorted by file name.
pub fn list_images(dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).with_context(|| format!("reading directory {}", dir.display()))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry?.path();
        let is_image = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| IMAGE_EXTENSIONS.iter().any(|x| x.eq_ignore_ascii_case(e)));
        if path.is_file() && is_image {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn build_pool(workers: Option<usize>) -> anyhow::Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        if n == 0 {
            return Err(usage("--workers must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    Ok(builder.build()?)
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

fn file_stem(path: &Path) -> String {
    path.file_stem().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

struct Source {
    name: String,
    stem: String,
    image: GrayImage,
}

fn load_sources(input: &Path) -> anyhow::Result<Vec<Source>> {
    let files = list_images(input)?;
    if files.is_empty() {
        return Err(usage(format!("no PNG or PGM images in {}", input.display())));
    }
    let mut stems = HashSet::new();
    files
        .iter()
        .map(|path| {
            let stem = file_stem(path);
            if !stems.insert(stem.clone()) {
                return Err(usage(format!("two inputs share the file stem {stem:?}")));
            }
            let image = load_image(path).with_context(|| format!("loading {}", path.display()))?;
            Ok(Source { name: file_name(path), stem, image })
        })
        .collect()
}

struct Job<'a> {
    source: &'a Source,
    id: String,
    index: u64,
}

fn jobs(sources: &[Source], count: u32) -> Vec<Job<'_>> {
    sources
        .iter()
        .enumerate()
        .flat_map(|(i, source)| {
            (0..count).map(move |r| Job {
                source,
                id: format!("{}_{r:03}", source.stem),
                index: i as u64 * count as u64 + r as u64,
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct SynthesizeOptions {
    pub input: PathBuf,
    pub output: PathBuf,
    pub seed: u64,
    pub count: u32,
    pub warmup: bool,
    pub config: ToolkitConfig,
    pub workers: Option<usize>,
    /// Also write the augmented source of every sample as `<id>_aug.png`.
    pub debug: bool,
}

impl SynthesizeOptions {
    /// Effective parameters: warm-up doubles the synthesis ranges and runs
    /// without augmentation.
    pub fn effective_config(&self) -> ToolkitConfig {
        let mut cfg = self.config.clone();
        if self.warmup {
            cfg.synthesis.warmup = true;
        }
        if cfg.synthesis.warmup {
            cfg.augment = AugmentConfig::disabled();
        }
        cfg
    }
}

/// Writes `<id>_img.png` and `<id>_mask.png` per sample plus `manifest.json`.
pub fn synthesize(opts: &SynthesizeOptions) -> anyhow::Result<Manifest> {
    if opts.count == 0 {
        return Err(usage("--count must be at least 1"));
    }
    let cfg = opts.effective_config();
    cfg.validate()?;
    let sources = load_sources(&opts.input)?;
    let jobs = jobs(&sources, opts.count);
    let run = |job: &Job| -> anyhow::Result<(Synthesized, [u32; 2])> {
        let mut rng = sample_rng(opts.seed, job.index);
        let src = &job.source.image;
        let s = synthesize_sample(src, &cfg.synthesis, &cfg.augment, &mut rng)
            .with_context(|| format!("synthesizing {}", job.id))?;
        Ok((s, [src.width(), src.height()]))
    };
    let scored = |s: &Synthesized| analytic_score(&s.plan, TRAINING_SIZE, TRAINING_SIZE, &cfg.score);
    let samples = run_batch(opts.seed, &opts.output, opts.workers, &jobs, opts.debug, run, scored)?;
    let manifest = Manifest {
        version: VERSION.to_string(),
        command: "synthesize".to_string(),
        seed: opts.seed,
        category: None,
        params: cfg,
        samples,
    };
    manifest.write(&opts.output)?;
    Ok(manifest)
}

fn run_batch<F, S>(
    seed: u64,
    output: &Path,
    workers: Option<usize>,
    jobs: &[Job],
    debug: bool,
    run: F,
    score: S,
) -> anyhow::Result<Vec<SampleRecord>>
where
    F: Fn(&Job) -> anyhow::Result<(Synthesized, [u32; 2])> + Sync,
    S: Fn(&Synthesized) -> f64 + Sync,
{
    std::fs::create_dir_all(output).with_context(|| format!("creating output directory {}", output.display()))?;
    let pool = build_pool(workers)?;
    pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                let (s, original_dims) = run(job)?;
                let write = |name: String, f: &dyn Fn(&Path) -> stitchkit_core::Result<()>| {
                    let path = output.join(name);
                    f(&path).with_context(|| format!("writing {}", path.display()))
                };
                write(format!("{}_img.png", job.id), &|p| save_image(&s.image, p))?;
                write(format!("{}_mask.png", job.id), &|p| save_mask(&s.mask, p))?;
                if debug {
                    write(format!("{}_aug.png", job.id), &|p| save_image(&s.augmented, p))?;
                }
                Ok(SampleRecord {
                    id: job.id.clone(),
                    source: job.source.name.clone(),
                    original_dims,
                    index: job.index,
                    seed: mix(seed, job.index),
                    gt_score: score(&s),
                    shortfall: s.plan.shortfall,
                    plan: s.plan,
                })
            })
            .collect::<anyhow::Result<Vec<_>>>()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DegradeCategory {
    Small,
    Large,
}

impl DegradeCategory {
    pub fn name(&self) -> &'static str {
        match self {
            DegradeCategory::Small => "small",
            DegradeCategory::Large => "large",
        }
    }

    /// Offset range as a fraction of each image dimension.
    pub fn offset_range(&self) -> [f64; 2] {
        match self {
            DegradeCategory::Small => [0.01, 0.02],
            DegradeCategory::Large => [0.02, 0.07],
        }
    }

    /// Patch-only parameters with this category's offsets.
    pub fn params(&self, base: &SynthesisParams) -> SynthesisParams {
        SynthesisParams { offset_range: self.offset_range(), line_probability: 0.0, warmup: false, ..base.clone() }
    }
}

impl FromStr for DegradeCategory {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        match s {
            "small" => Ok(DegradeCategory::Small),
            "large" => Ok(DegradeCategory::Large),
            other => Err(usage(format!("unknown category {other:?}; expected small or large"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DegradeOptions {
    pub input: PathBuf,
    pub output: PathBuf,
    pub category: DegradeCategory,
    pub seed: u64,
    pub count: u32,
    pub config: ToolkitConfig,
    pub workers: Option<usize>,
}

/// Patch artifacts at native resolution for external matcher studies.
pub fn degrade(opts: &DegradeOptions) -> anyhow::Result<Manifest> {
    if opts.count == 0 {
        return Err(usage("--count must be at least 1"));
    }
    let mut cfg = opts.config.clone();
    cfg.synthesis = opts.category.params(&cfg.synthesis);
    cfg.augment = AugmentConfig::disabled();
    cfg.validate()?;
    let sources = load_sources(&opts.input)?;
    let jobs = jobs(&sources, opts.count);
    let run = |job: &Job| -> anyhow::Result<(Synthesized, [u32; 2])> {
        let mut rng = sample_rng(opts.seed, job.index);
        let src = &job.source.image;
        let s =
            corrupt(src, &cfg.synthesis, &cfg.augment, &mut rng).with_context(|| format!("degrading {}", job.id))?;
        Ok((s, [src.width(), src.height()]))
    };
    let scored = |s: &Synthesized| analytic_score(&s.plan, s.image.width(), s.image.height(), &cfg.score);
    let samples = run_batch(opts.seed, &opts.output, opts.workers, &jobs, false, run, scored)?;
    let manifest = Manifest {
        version: VERSION.to_string(),
        command: "degrade".to_string(),
        seed: opts.seed,
        category: Some(opts.category.name().to_string()),
        params: cfg,
        samples,
    };
    manifest.write(&opts.output)?;
    Ok(manifest)
}

#[derive(Debug, Clone)]
pub struct ScoreOptions {
    pub mask: PathBuf,
    pub config: ToolkitConfig,
}

#[derive(Debug, Serialize)]
struct ScoreLine<'a> {
    path: &'a str,
    #[serde(flatten)]
    report: &'a ScoreReport,
}

#[derive(Debug, Serialize)]
struct ErrorLine<'a> {
    path: &'a str,
    error: String,
}

/// Writes one JSON line per mask; returns the number of masks that failed.
pub fn score(opts: &ScoreOptions, out: &mut dyn Write) -> anyhow::Result<usize> {
    opts.config.validate()?;
    let paths = if opts.mask.is_dir() { list_images(&opts.mask)? } else { vec![opts.mask.clone()] };
    let mut failures = 0;
    for path in &paths {
        let shown = path.display().to_string();
        match load_mask(path) {
            Ok(mask) => {
                let report = stitchkit_core::score_mask(&mask, &opts.config.decompose, &opts.config.score);
                serde_json::to_writer(&mut *out, &ScoreLine { path: &shown, report: &report })?;
            }
            Err(e) => {
                failures += 1;
                serde_json::to_writer(&mut *out, &ErrorLine { path: &shown, error: e.to_string() })?;
            }
        }
        writeln!(out)?;
    }
    Ok(failures)
}

#[derive(Debug, Clone)]
pub struct EvaluateOptions {
    pub pred: PathBuf,
    pub gt: PathBuf,
    pub report: PathBuf,
    pub config: ToolkitConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub report: MetricsReport,
    /// File names present in only one of the two directories, or whose
    /// masks could not be paired.
    pub excluded: Vec<String>,
}

/// Pairs masks by file name and writes the dataset report.
pub fn evaluate(opts: &EvaluateOptions) -> anyhow::Result<Evaluation> {
    opts.config.validate()?;
    let by_name = |dir: &Path| -> anyhow::Result<BTreeMap<String, PathBuf>> {
        Ok(list_images(dir)?.into_iter().map(|p| (file_name(&p), p)).collect())
    };
    let preds = by_name(&opts.pred)?;
    let gts = by_name(&opts.gt)?;

    let mut excluded: Vec<String> = preds.keys().filter(|k| !gts.contains_key(*k)).cloned().collect();
    let mut pairs: Vec<(BinaryMask, BinaryMask)> = Vec::new();
    for (name, gt_path) in &gts {
        let Some(pred_path) = preds.get(name) else {
            excluded.push(name.clone());
            continue;
        };
        let pred = load_mask(pred_path).with_context(|| format!("loading {}", pred_path.display()))?;
        let gt = load_mask(gt_path).with_context(|| format!("loading {}", gt_path.display()))?;
        if (pred.width(), pred.height()) != (gt.width(), gt.height()) {
            excluded.push(name.clone());
            continue;
        }
        pairs.push((pred, gt));
    }
    excluded.sort();
    if pairs.is_empty() {
        bail!("no prediction matched a ground-truth mask by file name ({} unmatched)", excluded.len());
    }
    let report = dataset_report(&pairs, &opts.config.decompose, &opts.config.score)?;
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    std::fs::write(&opts.report, text).with_context(|| format!("writing {}", opts.report.display()))?;
    Ok(Evaluation { report, excluded })
}

/// Reads one float per line; blank lines are skipped.
pub fn read_scores(path: &Path) -> anyhow::Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut scores = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v =
            f64::from_str(line).with_context(|| format!("{}:{}: malformed score {line:?}", path.display(), i + 1))?;
        scores.push(v);
    }
    Ok(scores)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EerReport {
    pub eer: f64,
    pub genuine: usize,
    pub impostor: usize,
}

pub fn eer(genuine: &Path, impostor: &Path) -> anyhow::Result<EerReport> {
    let g = read_scores(genuine)?;
    let i = read_scores(impostor)?;
    let eer = compute_eer(&g, &i)?;
    Ok(EerReport { eer, genuine: g.len(), impostor: i.len() })
}

/// `ScoreParams` with CLI overrides for the weights.
pub fn score_params_with(base: &ScoreParams, b: Option<f64>, c: Option<f64>) -> ScoreParams {
    ScoreParams { b: b.unwrap_or(base.b), c: c.unwrap_or(base.c), ..*base }
}
