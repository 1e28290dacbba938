use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use eegmark::classify::ClassifierKind;
use eegmark::config::RunConfig;
use eegmark::ensemble::VoteMode;
use eegmark::eval::{
    report_tables, repeat_cv_runs, Cell, CvReport, InnerCvEvaluator, Layout, SelectionMethod,
    SelectionScope, Target,
};
use eegmark::features::{
    build_feature_matrix, ftest_rank, relieff_rank, select_top_k, sweep_feature_count, FeatureGroup, FeatureMatrix,
    RankedFeatures,
};
use eegmark::seed::derive_seed;
use eegmark::signal::{load_dataset, save_dataset, synth_dataset, RecordingFormat, SynthSpec};

#[derive(Parser)]
#[command(name = "eegmark", version, about = "EEG depression-marker feature extraction and classifier evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labelled synthetic dataset
    Synth(SynthArgs),
    /// Compute the subject × feature matrix of a dataset
    Extract(ExtractArgs),
    /// Rank channels within feature groups
    Select(SelectArgs),
    /// Run repeated cross-validation and write an accuracy report
    Evaluate(EvaluateArgs),
    /// Lay out saved reports as a result table
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    JsonManifest,
}

impl From<Format> for RecordingFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => RecordingFormat::Csv,
            Format::JsonManifest => RecordingFormat::JsonManifest,
        }
    }
}

#[derive(Args)]
struct SynthArgs {
    /// Output directory; a manifest.json is written inside
    #[arg(long)]
    out: PathBuf,
    /// Generator parameters as JSON; flags below override it
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    subjects: Option<usize>,
    #[arg(long)]
    segments: Option<usize>,
    /// Class-effect magnitude (0 = no difference between classes)
    #[arg(long)]
    effect: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct InputArgs {
    /// Dataset manifest; features are extracted on the fly
    #[arg(long, conflicts_with = "features", required_unless_present = "features")]
    dataset: Option<PathBuf>,
    /// Feature matrix CSV written by `extract`
    #[arg(long)]
    features: Option<PathBuf>,
    /// Run configuration JSON
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Feature matrix CSV
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Ranking {
    Ftest,
    Relieff,
}

#[derive(Args)]
struct SelectArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum)]
    method: Ranking,
    /// Feature groups to rank (e.g. B_RBP,HFD); all groups when omitted
    #[arg(long, value_delimiter = ',')]
    groups: Vec<String>,
    /// Channels to keep per group; chosen by sweeping k = 1..18 when omitted
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Rankings JSON
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Mode {
    Single,
    Majority,
    Weighted,
    Adaboost,
}

#[derive(Clone, Copy, ValueEnum)]
enum SelectionArg {
    None,
    Ftest,
    Relieff,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScopeArg {
    Global,
    PerFold,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value = "single")]
    mode: Mode,
    #[arg(long, value_enum)]
    selection: Option<SelectionArg>,
    #[arg(long, value_enum)]
    selection_scope: Option<ScopeArg>,
    /// Fixed channel count per group instead of the sweep
    #[arg(long)]
    k: Option<usize>,
    /// Single-mode targets: group names and/or `concatenated`; all when omitted
    #[arg(long, value_delimiter = ',')]
    targets: Vec<String>,
    /// Classifiers to run; all five when omitted
    #[arg(long, value_delimiter = ',')]
    classifiers: Vec<String>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Report CSV; the full report is written next to it as JSON
    #[arg(long)]
    out: PathBuf,
    /// JSON lines with the ensemble weight fit of every outer fold
    #[arg(long)]
    audit: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Text,
    Csv,
}

#[derive(Args)]
struct ReportArgs {
    /// Report files (.json or .csv) from `evaluate`
    #[arg(long, num_args = 1.., required = true)]
    reports: Vec<PathBuf>,
    #[arg(long, value_parser = ["table1", "table2", "table3", "table4", "table5", "table6"])]
    layout: String,
    #[arg(long, value_enum, default_value = "text")]
    format: TableFormat,
    /// Write here instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p).with_context(|| format!("reading config {}", p.display())),
        None => Ok(RunConfig::default()),
    }
}

fn load_matrix(input: &InputArgs, cfg: &RunConfig) -> Result<FeatureMatrix> {
    if let Some(f) = &input.features {
        let file = File::open(f).with_context(|| format!("opening {}", f.display()))?;
        return Ok(FeatureMatrix::read_csv(BufReader::new(file))?);
    }
    let manifest = input.dataset.as_ref().expect("clap enforces one input");
    let recs = load_dataset(manifest).with_context(|| format!("loading {}", manifest.display()))?;
    info!("extracting features from {} recordings", recs.len());
    Ok(build_feature_matrix(&recs, &cfg.features)?)
}

fn parse_groups(names: &[String]) -> Result<Vec<FeatureGroup>> {
    if names.is_empty() {
        return Ok(FeatureGroup::ALL.to_vec());
    }
    Ok(names.iter().map(|s| s.parse()).collect::<Result<_, _>>()?)
}

fn synth(a: SynthArgs) -> Result<()> {
    let mut spec: SynthSpec = match &a.spec {
        Some(p) => serde_json::from_str(&fs::read_to_string(p)?)?,
        None => SynthSpec::default(),
    };
    if let Some(n) = a.subjects {
        spec.n_subjects = n;
    }
    if let Some(n) = a.segments {
        spec.n_segments = n;
    }
    if let Some(e) = a.effect {
        spec.effect = e;
    }
    let recs = synth_dataset(&spec, a.seed)?;
    let manifest = save_dataset(&recs, &a.out, a.format.into())?;
    println!("{}", manifest.display());
    Ok(())
}

fn extract(a: ExtractArgs) -> Result<()> {
    let cfg = load_config(a.config.as_deref())?;
    let recs = load_dataset(&a.dataset).with_context(|| format!("loading {}", a.dataset.display()))?;
    let mat = build_feature_matrix(&recs, &cfg.features)?;
    mat.write_csv(BufWriter::new(File::create(&a.out)?))?;
    eprintln!("{} subjects, {} masked cells", mat.n_subjects(), mat.masked_count());
    Ok(())
}

fn select(a: SelectArgs) -> Result<()> {
    let cfg = load_config(a.input.config.as_deref())?;
    let mat = load_matrix(&a.input, &cfg)?;
    let seed = a.seed.unwrap_or(cfg.seed);
    let mut out = Vec::new();
    for g in parse_groups(&a.groups)? {
        let ranked: RankedFeatures = match a.method {
            Ranking::Ftest => ftest_rank(&mat, g)?,
            Ranking::Relieff => relieff_rank(&mat, g, cfg.selection.relieff_k)?,
        };
        let k = match a.k {
            Some(k) => k,
            None => {
                let eval = InnerCvEvaluator {
                    hyper: cfg.hyper,
                    kinds: ClassifierKind::ALL.to_vec(),
                    max_folds: cfg.outer_folds,
                    seed: derive_seed(seed, g.index() as u64),
                };
                sweep_feature_count(&mat, &ranked, &eval)?.best_k
            }
        };
        let chosen = select_top_k(&ranked, k)?;
        println!("{g}: {}", chosen.iter().map(|c| c.name()).collect::<Vec<_>>().join(" "));
        out.push(ranked);
    }
    let json = if out.len() == 1 { serde_json::to_string_pretty(&out[0])? } else { serde_json::to_string_pretty(&out)? };
    fs::write(&a.out, json)?;
    Ok(())
}

fn evaluate(a: EvaluateArgs) -> Result<()> {
    let mut cfg = load_config(a.input.config.as_deref())?;
    if let Some(s) = a.selection {
        cfg.selection.method = match s {
            SelectionArg::None => SelectionMethod::None,
            SelectionArg::Ftest => SelectionMethod::Ftest,
            SelectionArg::Relieff => SelectionMethod::Relieff,
        };
    }
    if let Some(s) = a.selection_scope {
        cfg.selection.scope = match s {
            ScopeArg::Global => SelectionScope::Global,
            ScopeArg::PerFold => SelectionScope::PerFold,
        };
    }
    if a.k.is_some() {
        cfg.selection.count = a.k;
    }
    cfg.reps = a.reps.unwrap_or(cfg.reps);
    cfg.seed = a.seed.unwrap_or(cfg.seed);
    cfg.workers = a.workers.unwrap_or(cfg.workers);

    let targets: Vec<Target> = match a.mode {
        Mode::Single if a.targets.is_empty() => {
            let mut t: Vec<Target> = FeatureGroup::ALL.iter().map(|&g| Target::Group(g)).collect();
            t.push(Target::Concatenated);
            t
        }
        Mode::Single => a.targets.iter().map(|s| s.parse()).collect::<Result<_, _>>()?,
        Mode::Majority => vec![Target::Ensemble(VoteMode::Majority)],
        Mode::Weighted => vec![Target::Ensemble(VoteMode::Weighted)],
        Mode::Adaboost => vec![Target::Ensemble(VoteMode::Adaboost)],
    };
    if a.mode != Mode::Single && !a.targets.is_empty() {
        bail!("--targets only applies to --mode single");
    }
    let kinds: Vec<ClassifierKind> = if a.classifiers.is_empty() {
        ClassifierKind::ALL.to_vec()
    } else {
        a.classifiers.iter().map(|s| s.parse()).collect::<Result<_, _>>()?
    };
    let cells = targets
        .iter()
        .flat_map(|&target| kinds.iter().map(move |&classifier| Cell { target, classifier }))
        .collect();

    let mat = load_matrix(&a.input, &cfg)?;
    let exp = cfg.experiment(cells);
    info!("{} cells, {} repetitions, {} workers", exp.cells.len(), cfg.reps, cfg.worker_count());
    let (report, runs) = repeat_cv_runs(&mat, &exp, cfg.reps, cfg.seed, cfg.worker_count())?;

    report.write_csv(BufWriter::new(File::create(&a.out)?))?;
    fs::write(a.out.with_extension("json"), serde_json::to_string_pretty(&report)?)?;
    if let Some(path) = &a.audit {
        let mut w = BufWriter::new(File::create(path)?);
        for (rep, run) in runs.iter().enumerate() {
            for fold in &run.folds {
                for (cell, weights) in exp.cells.iter().zip(&fold.artifacts.weights) {
                    if let Some(wr) = weights {
                        let line = serde_json::json!({
                            "repetition": rep,
                            "fold": fold.artifacts.fold,
                            "target": cell.target,
                            "classifier": cell.classifier,
                            "fit": wr,
                        });
                        writeln!(w, "{line}")?;
                    }
                }
            }
        }
        w.flush()?;
    }
    for c in &report.cells {
        println!("{:<24} {:<8} {:<9} {:.4} ± {:.4}", c.feature_set(), c.classifier, c.target.mode_name(), c.mean_acc, c.std_acc);
    }
    Ok(())
}

fn report(a: ReportArgs) -> Result<()> {
    let mut reports = Vec::new();
    for p in &a.reports {
        let is_json = p.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let r: CvReport = if is_json {
            serde_json::from_str(&fs::read_to_string(p)?).with_context(|| format!("parsing {}", p.display()))?
        } else {
            CvReport::read_csv(File::open(p)?).with_context(|| format!("parsing {}", p.display()))?
        };
        reports.push(r);
    }
    let layout: Layout = a.layout.parse()?;
    let table = report_tables(&reports, layout)?;
    let text = match a.format {
        TableFormat::Text => table.to_text(),
        TableFormat::Csv => table.to_csv()?,
    };
    match &a.out {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Synth(a) => synth(a),
        Command::Extract(a) => extract(a),
        Command::Select(a) => select(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Report(a) => report(a),
    }
}
