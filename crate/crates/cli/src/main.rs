//! `pagelayout`: convert annotations, turn token labels into regions, fuse
//! detections with token labels, score predictions and lint corpora.
//!
//! Exit codes: 0 success, 1 validation violations, 2 usage error, 3 data
//! error. Data goes to `--out` or stdout, diagnostics to stderr.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use pagelayout::eval::{self, EvalConfig, Interpolation};
use pagelayout::formats::{self, canonical::MANIFEST_FILE, ViaOptions};
use pagelayout::regions::{self, FuseOptions, LabelingScheme};
use pagelayout::stats::{self, Rule, ValidationRules};
use pagelayout::{ClassScheme, Corpus, CorpusKind, Document, Page, Region};

#[derive(Parser)]
#[command(name = "pagelayout", version, about = "Layout annotation and evaluation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert annotations between formats.
    Convert(ConvertArgs),
    /// Derive per-word labels from ground-truth regions.
    LabelWords(LabelWordsArgs),
    /// Group token predictions into regions.
    Rebuild(RebuildArgs),
    /// Label detections with the majority token label of their words.
    Fuse(FuseArgs),
    /// Score predictions against the ground truth.
    Evaluate(EvaluateArgs),
    /// Page and region counts per document.
    Stats(StatsArgs),
    /// Check corpus integrity; exits 1 when violations are found.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum InputFormat {
    Via,
    Canonical,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Canonical,
    Yolo,
    Coco,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Fine,
    Coarse,
    Mono,
}

impl From<SchemeArg> for ClassScheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Fine => ClassScheme::Fine,
            SchemeArg::Coarse => ClassScheme::Coarse,
            SchemeArg::Mono => ClassScheme::Mono,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum InterpArg {
    Allpoint,
    Pascal11,
}

#[derive(Clone, Copy, ValueEnum)]
enum LabelingArg {
    Flat,
    Bio,
}

#[derive(Clone, Copy, ValueEnum)]
enum EvalMode {
    Regions,
    Rebuilt,
    Words,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Json,
    Table,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
enum RuleArg {
    Bounds,
    ClassConsistency,
    MinimalRect,
    UniqueIds,
    WordAssignment,
    SplitCoverage,
}

impl From<RuleArg> for Rule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::Bounds => Rule::Bounds,
            RuleArg::ClassConsistency => Rule::ClassConsistency,
            RuleArg::MinimalRect => Rule::MinimalRect,
            RuleArg::UniqueIds => Rule::UniqueIds,
            RuleArg::WordAssignment => Rule::WordAssignment,
            RuleArg::SplitCoverage => Rule::SplitCoverage,
        }
    }
}

fn unit_interval(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is outside (0, 1]"))
    }
}

fn non_negative(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} must be a finite non-negative number"))
    }
}

fn image_size(s: &str) -> std::result::Result<(u32, u32), String> {
    let (w, h) = s.split_once('x').ok_or("expected WIDTHxHEIGHT")?;
    let parse = |v: &str| v.parse::<u32>().ok().filter(|&n| n > 0);
    match (parse(w), parse(h)) {
        (Some(w), Some(h)) => Ok((w, h)),
        _ => Err(format!("bad image size {s:?}")),
    }
}

#[derive(Args)]
struct CorpusArg {
    /// Corpus manifest, or a directory holding `manifest.json`.
    #[arg(long)]
    corpus: PathBuf,
}

#[derive(Args)]
struct ConvertArgs {
    /// VIA project file or canonical corpus manifest.
    input: PathBuf,
    #[arg(long, value_enum)]
    from: InputFormat,
    #[arg(long, value_enum)]
    to: OutputFormat,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Class scheme for YOLO and COCO output.
    #[arg(long, value_enum, default_value = "coarse")]
    scheme: SchemeArg,
    /// VIA region attribute holding the class name.
    #[arg(long, default_value = "type")]
    class_attr: String,
    /// Image size applied to every VIA image lacking one, as WIDTHxHEIGHT.
    #[arg(long, value_parser = image_size)]
    image_size: Option<(u32, u32)>,
    /// Word list (JSON lines) to attach to VIA pages.
    #[arg(long)]
    words: Option<PathBuf>,
    /// Shrink regions to the bounding rectangle of their words.
    #[arg(long)]
    fit: bool,
    #[arg(long, value_parser = unit_interval, default_value = "0.5")]
    word_overlap: f64,
    /// Document id for VIA input; defaults to the file stem.
    #[arg(long)]
    doc_id: Option<String>,
    #[arg(long)]
    title: Option<String>,
    #[arg(long, default_value_t = 0)]
    year: i32,
    #[arg(long)]
    public_domain: bool,
}

#[derive(Args)]
struct LabelWordsArgs {
    #[command(flatten)]
    corpus: CorpusArg,
    #[arg(long, value_enum, default_value = "flat")]
    labeling: LabelingArg,
    #[arg(long, value_parser = unit_interval, default_value = "0.5")]
    word_overlap: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RebuildArgs {
    #[command(flatten)]
    corpus: CorpusArg,
    /// Token predictions (JSON lines).
    #[arg(long)]
    preds: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FuseArgs {
    #[command(flatten)]
    corpus: CorpusArg,
    /// Detection file.
    #[arg(long)]
    detections: PathBuf,
    /// Token predictions (JSON lines).
    #[arg(long)]
    preds: PathBuf,
    #[arg(long, value_parser = unit_interval, default_value = "0.5")]
    word_overlap: f64,
    /// Score by the majority's share of labeled words.
    #[arg(long)]
    vote_fraction: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    corpus: CorpusArg,
    /// Detection file (regions) or token predictions (rebuilt, words).
    #[arg(long)]
    preds: PathBuf,
    #[arg(long, value_enum, default_value = "regions")]
    mode: EvalMode,
    #[arg(long, value_parser = unit_interval, default_value = "0.5")]
    iou_thr: f64,
    #[arg(long, value_enum, default_value = "allpoint")]
    interp: InterpArg,
    #[arg(long, value_enum, default_value = "coarse")]
    scheme: SchemeArg,
    #[arg(long, value_parser = unit_interval, default_value = "0.5")]
    word_overlap: f64,
    #[arg(long, value_enum, default_value = "json")]
    format: ReportFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    corpus: CorpusArg,
    #[arg(long, value_enum, default_value = "table")]
    format: ReportFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    corpus: CorpusArg,
    /// Rule to skip; repeatable.
    #[arg(long, value_enum)]
    disable: Vec<RuleArg>,
    /// Allowed deviation in pixels for the minimal-rectangle rule.
    #[arg(long, value_parser = non_negative, default_value = "0.5")]
    min_rect_tolerance: f64,
    #[arg(long, value_parser = unit_interval, default_value = "0.5")]
    word_overlap: f64,
    #[arg(long, value_enum, default_value = "table")]
    format: ReportFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).with_context(|| format!("{}: cannot read", path.display()))
}

fn load(arg: &CorpusArg) -> Result<Corpus> {
    let path = if arg.corpus.is_dir() {
        arg.corpus.join(MANIFEST_FILE)
    } else {
        arg.corpus.clone()
    };
    let corpus = formats::load_corpus(&path)?;
    eprintln!(
        "loaded {} document(s), {} page(s) from {}",
        corpus.documents.len(),
        corpus.pages().count(),
        path.display()
    );
    Ok(corpus)
}

fn pages_of(corpus: &Corpus) -> Vec<Page> {
    corpus.pages().cloned().collect()
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)
                    .with_context(|| format!("{}: cannot create directory", dir.display()))?;
            }
            std::fs::write(path, bytes).with_context(|| format!("{}: cannot write", path.display()))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

/// Writes every file or none: files written before a failure are removed.
fn write_all(root: &Path, files: &[(PathBuf, Vec<u8>)]) -> Result<()> {
    let mut written: Vec<PathBuf> = Vec::new();
    let result = (|| -> Result<()> {
        for (rel, bytes) in files {
            let path = root.join(rel);
            if let Some(dir) = path.parent() {
                std::fs::create_dir_all(dir)
                    .with_context(|| format!("{}: cannot create directory", dir.display()))?;
            }
            std::fs::write(&path, bytes).with_context(|| format!("{}: cannot write", path.display()))?;
            written.push(path);
        }
        Ok(())
    })();
    if result.is_err() {
        for path in &written {
            let _ = std::fs::remove_file(path);
        }
    }
    result
}

fn via_corpus(args: &ConvertArgs) -> Result<Corpus> {
    let mut opts = ViaOptions {
        class_attr: args.class_attr.clone(),
        ..Default::default()
    };
    let bytes = read(&args.input)?;
    let path = args.input.display();
    if let Some(size) = args.image_size {
        // probe without sizes to learn the filenames, then fill in the gaps
        let names = via_filenames(&bytes).with_context(|| path.to_string())?;
        for name in names {
            opts.dimensions.entry(name).or_insert(size);
        }
    }
    let mut pages = formats::parse_via(&bytes, &opts).with_context(|| path.to_string())?;

    if let Some(words_path) = &args.words {
        let mut words = formats::parse_word_list(&read(words_path)?)
            .with_context(|| words_path.display().to_string())?;
        for page in &mut pages {
            if let Some(w) = words.remove(&page.id) {
                page.words = w;
            }
        }
        if let Some(unknown) = words.keys().next() {
            bail!("{}: unknown page id {unknown}", words_path.display());
        }
        for page in &mut pages {
            *page = regions::attach_assigned_words(page, args.word_overlap);
        }
    }

    let stem = args
        .input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "document".into());
    let id = args.doc_id.clone().unwrap_or(stem);
    Ok(Corpus {
        documents: vec![Document {
            title: args.title.clone().unwrap_or_else(|| id.clone()),
            id,
            year: args.year,
            languages: Vec::new(),
            public_domain: args.public_domain,
            corpus: CorpusKind::Internal,
            pages,
            split: None,
        }],
        splits: None,
    })
}

/// Filenames of the images of a VIA project or bare export.
fn via_filenames(bytes: &[u8]) -> Result<Vec<String>> {
    let v: serde_json::Value = serde_json::from_slice(bytes)?;
    let images = v.get("_via_img_metadata").unwrap_or(&v);
    Ok(images
        .as_object()
        .map(|m| {
            m.values()
                .filter_map(|img| img.get("filename")?.as_str().map(str::to_string))
                .collect()
        })
        .unwrap_or_default())
}

fn convert(args: &ConvertArgs) -> Result<()> {
    let mut corpus = match args.from {
        InputFormat::Via => via_corpus(args)?,
        InputFormat::Canonical => load(&CorpusArg {
            corpus: args.input.clone(),
        })?,
    };
    if args.fit {
        for page in corpus.documents.iter_mut().flat_map(|d| d.pages.iter_mut()) {
            let (fitted, flagged) = regions::fit_page(page);
            for id in flagged {
                eprintln!("page {}: region {id} has no words, box kept", page.id);
            }
            *page = fitted;
        }
    }
    let scheme: ClassScheme = args.scheme.into();
    let files: Vec<(PathBuf, Vec<u8>)> = match args.to {
        OutputFormat::Canonical => {
            let out = formats::write_corpus(&corpus)?;
            let mut files = out.pages;
            files.push((PathBuf::from(MANIFEST_FILE), out.manifest));
            files
        }
        OutputFormat::Yolo => {
            let mut files = Vec::new();
            let mut seen = std::collections::HashSet::new();
            for page in corpus.pages() {
                if !seen.insert(page.id.as_str()) {
                    bail!("duplicate page id {}", page.id);
                }
                let text = formats::export_yolo(page, scheme)?;
                files.push((PathBuf::from(format!("{}.txt", page.id)), text.into_bytes()));
            }
            let names: String = scheme.classes().iter().map(|c| format!("{c}\n")).collect();
            files.push((PathBuf::from("classes.txt"), names.into_bytes()));
            files
        }
        OutputFormat::Coco => {
            vec![(PathBuf::from("coco.json"), formats::export_coco(&corpus.documents, scheme)?)]
        }
    };
    write_all(&args.out, &files)?;
    eprintln!(
        "converted {} page(s), {} region(s); wrote {} file(s) to {}",
        corpus.pages().count(),
        corpus.pages().map(|p| p.regions.len()).sum::<usize>(),
        files.len(),
        args.out.display()
    );
    Ok(())
}

fn label_words(args: &LabelWordsArgs) -> Result<()> {
    let corpus = load(&args.corpus)?;
    let scheme = match args.labeling {
        LabelingArg::Flat => LabelingScheme::Flat,
        LabelingArg::Bio => LabelingScheme::Bio,
    };
    let labeled: Vec<(String, Vec<regions::WordLabel>)> = corpus
        .pages()
        .map(|page| {
            let assignment = regions::assign_words(page, args.word_overlap);
            (page.id.clone(), regions::label_words(page, scheme, &assignment))
        })
        .collect();
    emit(args.out.as_deref(), &formats::write_token_labels(&labeled)?)
}

fn token_preds(path: &Path, pages: &[Page]) -> Result<BTreeMap<String, regions::LabelMap>> {
    formats::parse_token_predictions(&read(path)?, pages).with_context(|| path.display().to_string())
}

fn rebuild(args: &RebuildArgs) -> Result<()> {
    let corpus = load(&args.corpus)?;
    let pages = pages_of(&corpus);
    let preds = token_preds(&args.preds, &pages)?;
    let out: BTreeMap<String, Vec<Region>> = pages
        .iter()
        .map(|p| (p.id.clone(), regions::rebuild_regions(&p.words, &preds[&p.id])))
        .collect();
    eprintln!("rebuilt {} region(s)", out.values().map(Vec::len).sum::<usize>());
    emit(args.out.as_deref(), &formats::write_detections(ClassScheme::Coarse, &out)?)
}

fn fuse(args: &FuseArgs) -> Result<()> {
    let corpus = load(&args.corpus)?;
    let pages = pages_of(&corpus);
    let detections = formats::parse_detections(&read(&args.detections)?, &pages)
        .with_context(|| args.detections.display().to_string())?;
    let preds = token_preds(&args.preds, &pages)?;
    let opts = FuseOptions {
        min_overlap: args.word_overlap,
        vote_fraction: args.vote_fraction,
    };
    let mut out = BTreeMap::new();
    for page in &pages {
        let dets = detections.pages.get(&page.id).map_or(&[][..], Vec::as_slice);
        let fused = regions::fuse(dets, &page.words, &preds[&page.id], opts);
        for id in &fused.flagged {
            eprintln!("page {}: detection {id} holds no labeled word, set to others", page.id);
        }
        out.insert(page.id.clone(), fused.regions);
    }
    emit(args.out.as_deref(), &formats::write_detections(ClassScheme::Coarse, &out)?)
}

fn evaluate(args: &EvaluateArgs) -> Result<()> {
    let corpus = load(&args.corpus)?;
    let pages = pages_of(&corpus);
    let cfg = EvalConfig {
        iou_thr: args.iou_thr,
        interp: match args.interp {
            InterpArg::Allpoint => Interpolation::Allpoint,
            InterpArg::Pascal11 => Interpolation::Pascal11,
        },
        scheme: args.scheme.into(),
    };
    let report = match args.mode {
        EvalMode::Regions => {
            let set = formats::parse_detections(&read(&args.preds)?, &pages)
                .with_context(|| args.preds.display().to_string())?;
            eval::map_at(&set.pages, &pages, &cfg)?
        }
        EvalMode::Rebuilt => eval::evaluate_rebuilt(&token_preds(&args.preds, &pages)?, &pages, &cfg)?,
        EvalMode::Words => eval::evaluate_words(&token_preds(&args.preds, &pages)?, &pages, args.word_overlap)?,
    };
    let bytes = match args.format {
        ReportFormat::Json => report.to_json()?,
        ReportFormat::Table => report.to_table().into_bytes(),
    };
    emit(args.out.as_deref(), &bytes)
}

fn stats_cmd(args: &StatsArgs) -> Result<()> {
    let corpus = load(&args.corpus)?;
    let s = stats::corpus_stats(&corpus.documents);
    let bytes = match args.format {
        ReportFormat::Json => s.to_json()?,
        ReportFormat::Table => s.to_table().into_bytes(),
    };
    emit(args.out.as_deref(), &bytes)
}

fn validate(args: &ValidateArgs) -> Result<bool> {
    let corpus = load(&args.corpus)?;
    let mut rules = ValidationRules {
        min_rect_tolerance: args.min_rect_tolerance,
        word_overlap: args.word_overlap,
        ..Default::default()
    };
    for r in &args.disable {
        rules = rules.without((*r).into());
    }
    let report = stats::validate(&corpus, &rules);
    let bytes = match args.format {
        ReportFormat::Json => report.to_json()?,
        ReportFormat::Table => report.to_text().into_bytes(),
    };
    emit(args.out.as_deref(), &bytes)?;
    for (rule, n) in &report.counts {
        eprintln!("{rule}: {n}");
    }
    Ok(report.is_empty())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Convert(a) => convert(a)?,
        Command::LabelWords(a) => label_words(a)?,
        Command::Rebuild(a) => rebuild(a)?,
        Command::Fuse(a) => fuse(a)?,
        Command::Evaluate(a) => evaluate(a)?,
        Command::Stats(a) => stats_cmd(a)?,
        Command::Validate(a) => {
            if !validate(a)? {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
