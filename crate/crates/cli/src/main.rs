mod manifest;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use medload::conllu::{CorpusError, LanguagePair, Mode};
use medload::difficulty::{
    difficulty_matrix, DifficultyError, DifficultyResources, TableVariant, TranslationTable,
};
use medload::experiments::{
    extract_difficulty, extract_translationese, load_corpus, run_classification, run_regression,
    scores_to_tsv, with_jobs, ExperimentConfig, ExperimentError, ExperimentInputs, Report,
    ScoringModel, Task,
};
use medload::matrix::{FeatureMatrix, MatrixError, Stage};

use manifest::{digests, OutDir, RunManifest};

#[derive(Parser)]
#[command(name = "medload", version, about = "Translatedness and translation difficulty analytics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Org,
    Tgt,
}

#[derive(Clone, Copy, ValueEnum)]
enum FeatureSet {
    Translationese,
    Difficulty,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Tsv,
    Json,
    Svg,
}

#[derive(clap::Args)]
struct CorpusArgs {
    /// Subcorpus directory (org/src/tgt.conllu, manifest.tsv, links.tsv)
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value = "written", value_parser = parse_mode)]
    mode: Mode,
    #[arg(long, default_value = "ende", value_parser = parse_lpair)]
    lpair: LanguagePair,
    /// Segments with fewer words are dropped
    #[arg(long, default_value_t = 4)]
    min_tokens: usize,
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, env = "MEDLOAD_SEED")]
    seed: Option<u64>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Extract raw feature values into a TSV
    Extract {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long, value_enum, default_value = "tgt")]
        side: SideArg,
        #[arg(long, value_enum, default_value = "translationese")]
        features: FeatureSet,
        #[arg(long)]
        out: PathBuf,
        /// Count punctuation in per-word denominators
        #[arg(long)]
        include_punct: bool,
        /// Directory with <lang>/*.txt lexicon overrides
        #[arg(long)]
        lexicons: Option<PathBuf>,
        /// Translation tables written by build-table
        #[arg(long)]
        tables: Option<PathBuf>,
        /// Fail unless every token carries source-LM and NMT surprisal
        #[arg(long)]
        require_surprisal: bool,
    },
    /// Build lemma, content-lemma and subtree translation tables
    BuildTable {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cross-validated translationese classification
    Classify {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Score raw translationese features with a saved model
    Score {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Regress translatedness scores on difficulty subsets
    Regress {
        #[command(flatten)]
        run: RunArgs,
        /// Scores TSV overriding data.scores
        #[arg(long)]
        scores: Option<PathBuf>,
    },
    /// Render tables or figures from a report directory
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "tsv")]
        format: Format,
        /// Output directory (default: the report directory)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse()
}

fn parse_lpair(s: &str) -> Result<LanguagePair, String> {
    s.parse()
}

/// An error with a fixed exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

fn fail(code: u8, message: impl Into<String>) -> anyhow::Error {
    Failure {
        code,
        message: message.into(),
    }
    .into()
}

fn corpus_code(e: &CorpusError) -> u8 {
    match e {
        CorpusError::Io { .. } => 1,
        _ => 2,
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(f) = cause.downcast_ref::<Failure>() {
            return f.code;
        }
        if let Some(e) = cause.downcast_ref::<ExperimentError>() {
            return match e {
                ExperimentError::UnknownSubset(_) => 3,
                ExperimentError::Config(_)
                | ExperimentError::Matrix(_)
                | ExperimentError::Scores { .. } => 2,
                ExperimentError::Corpus(c) => corpus_code(c),
                _ => 1,
            };
        }
        if let Some(c) = cause.downcast_ref::<CorpusError>() {
            return corpus_code(c);
        }
        if cause.downcast_ref::<MatrixError>().is_some() {
            return 2;
        }
        if let Some(DifficultyError::Table { .. }) = cause.downcast_ref::<DifficultyError>() {
            return 2;
        }
    }
    1
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_matrix(path: &Path) -> Result<FeatureMatrix> {
    FeatureMatrix::from_tsv(&read(path)?, Stage::Raw)
        .with_context(|| format!("parsing {}", path.display()))
}

fn check_surprisal(corpus: &medload::conllu::Corpus) -> Result<()> {
    for pair in &corpus.pairs {
        let checks = [
            (&pair.source, "Srp", true),
            (&pair.target, "MtSrp", false),
        ];
        for (seg, key, src) in checks {
            for t in seg.tokens() {
                let a = &t.annotations;
                let present = if src {
                    a.src_surprisal.is_some()
                } else {
                    a.mt_surprisal.is_some()
                };
                if !present {
                    return Err(fail(
                        2,
                        format!(
                            "{}.conllu: segment {}/{} token {} ({:?}) lacks {key}",
                            seg.side, seg.doc_id, seg.seg_id, t.id, t.form
                        ),
                    ));
                }
            }
        }
    }
    Ok(())
}

fn load_table(dir: &Path, variant: TableVariant) -> Result<TranslationTable> {
    let path = dir.join(format!("{}.tsv", variant.as_str()));
    TranslationTable::from_tsv(&read(&path)?, variant, vec![dir.display().to_string()])
        .with_context(|| format!("parsing {}", path.display()))
}

#[allow(clippy::too_many_arguments)]
fn cmd_extract(
    args: &CorpusArgs,
    side: SideArg,
    features: FeatureSet,
    out: &Path,
    include_punct: bool,
    lexicons: Option<&Path>,
    tables: Option<&Path>,
    require_surprisal: bool,
) -> Result<()> {
    let mut cfg = ExperimentConfig::default();
    cfg.data.mode = args.mode;
    cfg.data.lpair = args.lpair;
    cfg.preprocess.min_tokens = args.min_tokens;
    let corpus = load_corpus(&cfg, &args.corpus)?;
    if require_surprisal {
        check_surprisal(&corpus)?;
    }
    let m = match (features, side) {
        (FeatureSet::Translationese, side) => {
            let (org, tgt) = extract_translationese(&corpus, lexicons, include_punct)?;
            match side {
                SideArg::Org => org,
                SideArg::Tgt => tgt,
            }
        }
        (FeatureSet::Difficulty, SideArg::Org) => {
            return Err(fail(2, "difficulty features need --side tgt (source-target pairs)"))
        }
        (FeatureSet::Difficulty, SideArg::Tgt) => match tables {
            None => extract_difficulty(&corpus, include_punct),
            Some(dir) => {
                let res = DifficultyResources::from_tables(
                    load_table(dir, TableVariant::Lemmas)?,
                    load_table(dir, TableVariant::ContentLemmas)?,
                    load_table(dir, TableVariant::Subtrees)?,
                    Default::default(),
                    &corpus.pairs,
                );
                let mut m = difficulty_matrix(&corpus.pairs, &res);
                for (row, p) in m.rows.iter_mut().zip(&corpus.pairs) {
                    row.word_count = p.source.word_count_with(include_punct);
                }
                m
            }
        },
    };
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(out, m.to_tsv()).with_context(|| format!("writing {}", out.display()))?;
    log::info!("wrote {} rows to {}", m.n_rows(), out.display());
    Ok(())
}

fn cmd_build_table(args: &CorpusArgs, out: &Path) -> Result<()> {
    let start = Instant::now();
    let mut cfg = ExperimentConfig::default();
    cfg.data.mode = args.mode;
    cfg.data.lpair = args.lpair;
    cfg.preprocess.min_tokens = args.min_tokens;
    let corpus = load_corpus(&cfg, &args.corpus)?;
    let res = DifficultyResources::build(&corpus.pairs, &corpus.pairs);
    let mut dir = OutDir::create(out)?;
    for t in [&res.lemmas, &res.content_lemmas, &res.subtrees] {
        dir.write(&format!("{}.tsv", t.variant.as_str()), &t.to_tsv())?;
    }
    let summary = serde_json::json!({
        "coverage": res.coverage,
        "fallback_lemmas": res.fallback_lemmas,
        "fallback_content": res.fallback_content,
        "fallback_subtrees": res.fallback_subtrees,
    });
    dir.write("fallback.json", &serde_json::to_string_pretty(&summary)?)?;
    let mut manifest = RunManifest::new("build-table", None, None);
    manifest.inputs = digests(std::slice::from_ref(&args.corpus))?;
    manifest.seconds = start.elapsed().as_secs_f64();
    dir.finish(manifest)
}

fn load_config(run: &RunArgs, task: Task) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&run.config)?;
    cfg.data.task = task;
    if let Some(seed) = run.seed {
        cfg.run.seed = seed;
    }
    if let Some(jobs) = run.jobs {
        cfg.run.jobs = jobs;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_report(dir: &mut OutDir, report: &Report) -> Result<()> {
    dir.write("report.json", &report.to_json())?;
    for (name, text) in report.tables().into_iter().chain(report.svgs()) {
        dir.write(&name, &text)?;
    }
    Ok(())
}

fn cmd_classify(run: &RunArgs) -> Result<()> {
    let start = Instant::now();
    let cfg = load_config(run, Task::Classify)?;
    let inputs = ExperimentInputs::load(&cfg)?;
    let (Some(org), Some(tgt)) = (&inputs.org, &inputs.tgt) else {
        bail!("config names no originals and translations (data.corpus, data.*_features or data.synthetic)");
    };
    let outcome = with_jobs(cfg.run.jobs, || run_classification(&cfg, org, tgt))?;
    let input_digests = digests(&inputs.files)?;
    let mut report = Report::Classify(outcome.report);
    report.set_inputs(input_digests.clone());
    let mut dir = OutDir::create(&run.out)?;
    write_report(&mut dir, &report)?;
    dir.write("model.json", &outcome.model.to_json())?;
    dir.write("scores.tsv", &scores_to_tsv(&outcome.scores))?;
    let mut manifest = RunManifest::new("classify", Some(&run.config), Some(cfg.run.seed));
    manifest.inputs = input_digests;
    manifest.seconds = start.elapsed().as_secs_f64();
    dir.finish(manifest)
}

fn cmd_regress(run: &RunArgs, scores: Option<&Path>) -> Result<()> {
    let start = Instant::now();
    let mut cfg = load_config(run, Task::Regress)?;
    if let Some(s) = scores {
        cfg.data.scores = Some(s.to_path_buf());
    }
    let inputs = ExperimentInputs::load(&cfg)?;
    let Some(difficulty) = &inputs.difficulty else {
        bail!("config names no difficulty features (data.corpus, data.difficulty_features or data.synthetic)");
    };
    let Some(score_rows) = &inputs.scores else {
        return Err(ExperimentError::MissingScores.into());
    };
    let report = with_jobs(cfg.run.jobs, || {
        run_regression(&cfg, difficulty, score_rows, inputs.tgt.as_ref())
    })?;
    let input_digests = digests(&inputs.files)?;
    let mut report = Report::Regress(report);
    report.set_inputs(input_digests.clone());
    let mut dir = OutDir::create(&run.out)?;
    write_report(&mut dir, &report)?;
    let mut manifest = RunManifest::new("regress", Some(&run.config), Some(cfg.run.seed));
    manifest.inputs = input_digests;
    manifest.seconds = start.elapsed().as_secs_f64();
    dir.finish(manifest)
}

fn cmd_score(model: &Path, features: &Path, out: &Path) -> Result<()> {
    let model = ScoringModel::from_json(&read(model)?)?;
    let rows = model.score_raw(&read_matrix(features)?)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(out, scores_to_tsv(&rows)).with_context(|| format!("writing {}", out.display()))?;
    Ok(())
}

fn cmd_report(input: &Path, format: Format, out: Option<&Path>) -> Result<()> {
    let path = input.join("report.json");
    let text = std::fs::read_to_string(&path)
        .map_err(|e| fail(4, format!("{}: {e}", path.display())))?;
    let report = Report::from_json(&text).map_err(|e| fail(4, format!("{}: {e}", path.display())))?;
    let target = out.unwrap_or(input);
    std::fs::create_dir_all(target).with_context(|| format!("creating {}", target.display()))?;
    let files = match format {
        Format::Tsv => report.tables(),
        Format::Svg => report.svgs(),
        Format::Json => vec![("report.json".to_string(), report.to_json())],
    };
    for (name, content) in files {
        let p = target.join(&name);
        std::fs::write(&p, content).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Extract {
            corpus,
            side,
            features,
            out,
            include_punct,
            lexicons,
            tables,
            require_surprisal,
        } => cmd_extract(
            corpus,
            *side,
            *features,
            out,
            *include_punct,
            lexicons.as_deref(),
            tables.as_deref(),
            *require_surprisal,
        ),
        Command::BuildTable { corpus, out } => cmd_build_table(corpus, out),
        Command::Classify { run } => cmd_classify(run),
        Command::Score {
            model,
            features,
            out,
        } => cmd_score(model, features, out),
        Command::Regress { run, scores } => cmd_regress(run, scores.as_deref()),
        Command::Report {
            input,
            format,
            out,
        } => cmd_report(input, *format, out.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
