//! `biaslens` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use biaslens::biasmeter::{measure, BiasConfig, DEFAULT_RESAMPLES, DEFAULT_SIGNIFICANCE};
use biaslens::corpus::{
    ingest, to_jsonl, CorpusError, CorpusFormat, CorpusStream, IngestOptions, IngestStats,
};
use biaslens::extract::{
    filter_explicit, parse_sentences, parse_statements, partition, to_jsonl_lines, CorpusPartition,
    PartitionLabel, PartitionOptions, PartitionSummary,
};
use biaslens::lexicon::{load_lexicon, validate_cross_lexicon, BiasLexicon};
use biaslens::report::{load_bias_report, write_atomic, Document, RunManifest, SummaryOptions};
use biaslens::robustness::{
    classifier_choice_trial, exemplar_choice_trial, set_size_trial, SizeOptions, TrialOptions,
    DEFAULT_S1_FRACTION, DEFAULT_S2_FRACTION, DEFAULT_TRIALS,
};
use biaslens::sentiment::{ScoreCache, ScorerSpec};
use biaslens::temporal::{evolution, EvolutionOptions, DEFAULT_MIN_STATEMENTS};
use biaslens::weat::{
    joint_vs_implicit, load_embeddings, run_weat, train_embeddings, PMode, SignConvention,
    TrainParams, WeatInput, WeatOptions, MC_SAMPLES,
};
use biaslens::{Error, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

const CACHE_ENV: &str = "BIASLENS_CACHE_DIR";
const LEXICON_FILE: &str = "lexicon.json";
const COUNTS_FILE: &str = "counts.json";

#[derive(Parser)]
#[command(
    name = "biaslens",
    version,
    about = "Explicit and implicit bias from text corpora"
)]
struct Cli {
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Label every sentence and write the statement collections.
    Partition(PartitionArgs),
    /// Explicit and implicit bias of a partition, with their permutation test.
    Bias(BiasArgs),
    /// WEAT on given or trained embeddings.
    Weat(WeatArgs),
    /// Month-by-month bias and its stability.
    Evolve(EvolveArgs),
    /// Consistency of conclusions under exemplar, set-size or scorer changes.
    Robustness(RobustnessArgs),
    /// Drop every explicit statement under any of the given lexicons.
    FilterExplicit(FilterArgs),
    /// Train PPMI-SVD embeddings.
    EmbedTrain(EmbedTrainArgs),
    /// Table of bias reports.
    Summarize(SummarizeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Plaintext,
    Jsonl,
}

impl From<Format> for CorpusFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Plaintext => CorpusFormat::Plaintext,
            Format::Jsonl => CorpusFormat::Jsonl,
        }
    }
}

#[derive(Args)]
struct CorpusArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Defaults to jsonl for `.jsonl` files, plaintext otherwise.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Skip invalid UTF-8 lines and malformed records instead of failing.
    #[arg(long)]
    lenient: bool,
    /// Source tag used in sentence ids and reports; defaults to the file stem.
    #[arg(long)]
    source_tag: Option<String>,
}

struct LoadedCorpus {
    corpus: CorpusStream,
    tag: String,
    format: CorpusFormat,
    stats: IngestStats,
}

impl CorpusArgs {
    fn load(&self, default: CorpusFormat) -> Result<LoadedCorpus> {
        let format = match self.format {
            Some(f) => f.into(),
            None if self.corpus.extension().is_some_and(|e| e == "jsonl") => CorpusFormat::Jsonl,
            None => default,
        };
        let tag = self.source_tag.clone().unwrap_or_else(|| {
            self.corpus
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "corpus".into())
        });
        let got = ingest(
            &self.corpus,
            format,
            &tag,
            IngestOptions {
                lenient: self.lenient,
            },
        )?;
        report_ingest(&got.stats);
        Ok(LoadedCorpus {
            corpus: got.corpus,
            tag,
            format,
            stats: got.stats,
        })
    }
}

fn report_ingest(stats: &IngestStats) {
    if stats.skipped_lines > 0 || stats.malformed_records > 0 || stats.unparseable_timestamps > 0 {
        eprintln!(
            "warning: skipped {} line(s), {} malformed record(s), {} unparseable timestamp(s)",
            stats.skipped_lines, stats.malformed_records, stats.unparseable_timestamps
        );
    }
}

fn format_name(f: CorpusFormat) -> &'static str {
    match f {
        CorpusFormat::Plaintext => "plaintext",
        CorpusFormat::Jsonl => "jsonl",
    }
}

#[derive(Args)]
struct ScorerArgs {
    /// `builtin`, `builtin:<lexicon.json>` or `external:<command>`.
    #[arg(long, default_value = "builtin")]
    scorer: String,
    /// Overrides the recorded scorer id.
    #[arg(long)]
    scorer_id: Option<String>,
    /// Seconds allowed per external adapter batch.
    #[arg(long)]
    scorer_timeout: Option<u64>,
}

fn scorer_from(spec: &str, id: Option<&str>, timeout: Option<u64>) -> Result<ScorerSpec> {
    let mut s = ScorerSpec::parse(spec, id)?;
    if let Some(t) = timeout {
        s = s.with_timeout(Duration::from_secs(t));
    }
    Ok(s)
}

impl ScorerArgs {
    fn spec(&self) -> Result<ScorerSpec> {
        scorer_from(&self.scorer, self.scorer_id.as_deref(), self.scorer_timeout)
    }
}

fn open_cache() -> Result<Option<ScoreCache>> {
    match std::env::var_os(CACHE_ENV) {
        Some(dir) if !dir.is_empty() => Ok(Some(ScoreCache::in_dir(PathBuf::from(dir))?)),
        _ => Ok(None),
    }
}

#[derive(Args)]
struct PartitionArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long)]
    lexicon: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Require a target and an attribute word within this many tokens.
    #[arg(long)]
    max_token_distance: Option<usize>,
}

#[derive(Args)]
struct BiasArgs {
    /// Directory written by `partition`.
    #[arg(long)]
    partition: PathBuf,
    #[command(flatten)]
    scorer: ScorerArgs,
    #[arg(long, default_value_t = DEFAULT_RESAMPLES)]
    resamples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_SIGNIFICANCE)]
    threshold: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exact,
    Mc,
}

#[derive(Clone, Copy, ValueEnum)]
enum Convention {
    Paper,
    Caliskan,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, default_value_t = 5)]
    window: usize,
    #[arg(long, default_value_t = 2)]
    min_count: usize,
    /// Defaults to min(100, vocabulary - 1).
    #[arg(long)]
    dimension: Option<usize>,
    #[arg(long, default_value_t = 0)]
    train_seed: u64,
}

impl TrainArgs {
    fn params(&self) -> TrainParams {
        TrainParams {
            window: self.window,
            min_count: self.min_count,
            dimension: self.dimension,
            seed: self.train_seed,
            ..TrainParams::default()
        }
    }

    fn record(&self, m: RunManifest) -> RunManifest {
        let p = self.params();
        m.param("window", p.window)
            .param("min_count", p.min_count)
            .param(
                "dimension",
                p.dimension.map_or("auto".into(), |d| d.to_string()),
            )
            .param("alpha", p.alpha)
            .param("power_iterations", p.power_iterations)
            .param("oversample", p.oversample)
            .seed("train", p.seed)
    }
}

#[derive(Args)]
struct WeatArgs {
    /// Word vectors in word2vec/GloVe text format.
    #[arg(
        long,
        conflicts_with = "train_on",
        required_unless_present = "train_on"
    )]
    embeddings: Option<PathBuf>,
    /// Train embeddings on this corpus instead.
    #[arg(long)]
    train_on: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    lenient: bool,
    #[arg(long)]
    source_tag: Option<String>,
    #[arg(long)]
    lexicon: PathBuf,
    /// Remove explicit statements before training.
    #[arg(long, requires = "train_on")]
    filtered: bool,
    /// Report WEAT on the full and on the filtered corpus side by side.
    #[arg(long, requires = "train_on", conflicts_with = "filtered")]
    compare: bool,
    #[arg(long, value_enum, default_value = "exact")]
    mode: Mode,
    #[arg(long, default_value_t = MC_SAMPLES)]
    mc_samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "paper")]
    sign_convention: Convention,
    #[command(flatten)]
    train: TrainArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvolveArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long)]
    lexicon: PathBuf,
    #[command(flatten)]
    scorer: ScorerArgs,
    #[arg(long, default_value_t = DEFAULT_MIN_STATEMENTS)]
    min_statements: usize,
    #[arg(long, default_value_t = DEFAULT_RESAMPLES)]
    resamples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_SIGNIFICANCE)]
    threshold: f64,
    #[arg(long)]
    out: PathBuf,
    /// Series CSV; defaults to the report path with a `.csv` extension.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Choice,
    Size,
    Classifier,
}

#[derive(Args)]
struct RobustnessArgs {
    /// Directory written by `partition`.
    #[arg(long)]
    partition: PathBuf,
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: usize,
    /// Subset fraction; for `size` this is the S1 fraction.
    #[arg(long)]
    fraction: Option<f64>,
    /// S2 fraction of S1 (`size` only).
    #[arg(long, default_value_t = DEFAULT_S2_FRACTION)]
    s2_fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    scorer: ScorerArgs,
    /// Second scorer (`classifier` only).
    #[arg(long)]
    scorer_b: Option<String>,
    #[arg(long)]
    scorer_b_id: Option<String>,
    #[arg(long)]
    out: PathBuf,
    /// Trial log; defaults to the report path with a `.trials.jsonl` extension.
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Args)]
struct FilterArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Repeatable.
    #[arg(long, required = true)]
    lexicon: Vec<PathBuf>,
    /// Filtered corpus, JSONL.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    max_token_distance: Option<usize>,
}

#[derive(Args)]
struct EmbedTrainArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[command(flatten)]
    train: TrainArgs,
    /// Vectors, text format.
    #[arg(long)]
    out: PathBuf,
    /// Training statistics JSON; defaults to the vectors path with `.stats.json`.
    #[arg(long)]
    stats: Option<PathBuf>,
}

#[derive(Args)]
struct SummarizeArgs {
    #[arg(required = true)]
    reports: Vec<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SIGNIFICANCE)]
    threshold: f64,
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|source| {
        CorpusError::Io {
            path: path.display().to_string(),
            source,
        }
        .into()
    })
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn write_doc<T: Serialize>(path: &Path, manifest: RunManifest, body: T) -> Result<()> {
    write_atomic(path, Document::new(manifest, body).to_json().as_bytes())?;
    Ok(())
}

fn load_lexicon_hashed(path: &Path) -> Result<(BiasLexicon, Vec<u8>)> {
    let bytes = read_file(path)?;
    Ok((load_lexicon(path)?, bytes))
}

fn partition_options(max: Option<usize>) -> PartitionOptions {
    PartitionOptions {
        max_token_distance: max,
    }
}

fn cmd_partition(a: &PartitionArgs) -> Result<()> {
    let (lexicon, lex_bytes) = load_lexicon_hashed(&a.lexicon)?;
    let loaded = a.corpus.load(CorpusFormat::Plaintext)?;
    let opts = partition_options(a.max_token_distance);
    let part = partition(&loaded.corpus, &lexicon, &opts);

    std::fs::create_dir_all(&a.out).map_err(|source| CorpusError::Io {
        path: a.out.display().to_string(),
        source,
    })?;
    for label in PartitionLabel::ALL {
        let text = match label {
            PartitionLabel::Rest => to_jsonl_lines(part.rest.sentences()),
            other => to_jsonl_lines(part.collection(other)),
        };
        write_atomic(a.out.join(label.file_name()), text.as_bytes())?;
    }
    write_atomic(
        a.out.join(LEXICON_FILE),
        lexicon.to_json_string().as_bytes(),
    )?;

    let manifest = RunManifest::new("partition")
        .param("format", format_name(loaded.format))
        .param("lenient", a.corpus.lenient)
        .param(
            "max_token_distance",
            opts.max_token_distance
                .map_or("none".into(), |d| d.to_string()),
        )
        .config("lexicon", &lex_bytes)
        .corpus(&loaded.corpus)
        .lexicon(&lexicon.id);
    let summary = PartitionSummary::new(&part, &lexicon, &loaded.tag, opts);
    write_doc(&a.out.join(COUNTS_FILE), manifest, &summary)?;

    let c = part.counts;
    println!(
        "{}: {} {} explicit, {} {} explicit, {} {} implicit, {} {} implicit, {} ambiguous, {} rest ({} sentences)",
        lexicon.id,
        c.explicit_i,
        summary.concept_i,
        c.explicit_j,
        summary.concept_j,
        c.implicit_i,
        summary.concept_i,
        c.implicit_j,
        summary.concept_j,
        c.ambiguous,
        c.rest,
        c.total
    );
    Ok(())
}

struct LoadedPartition {
    partition: CorpusPartition,
    lexicon: BiasLexicon,
    corpus_label: String,
    /// Every sentence of the partition, collections first, in file order.
    all: CorpusStream,
    lexicon_bytes: Vec<u8>,
}

#[derive(Deserialize)]
struct CountsBody {
    corpus: String,
}

fn load_partition(dir: &Path) -> Result<LoadedPartition> {
    let lexicon_path = dir.join(LEXICON_FILE);
    let (lexicon, lexicon_bytes) = load_lexicon_hashed(&lexicon_path)?;
    let counts_path = dir.join(COUNTS_FILE);
    let counts_text = String::from_utf8_lossy(&read_file(&counts_path)?).into_owned();
    let counts: Document<CountsBody> =
        biaslens::report::parse_document(&counts_text, &counts_path.display().to_string())?;

    let text_of = |label: PartitionLabel| -> Result<String> {
        let p = dir.join(label.file_name());
        String::from_utf8(read_file(&p)?).map_err(|e| {
            CorpusError::InvalidUtf8 {
                offset: e.utf8_error().valid_up_to(),
                line: 0,
            }
            .into()
        })
    };
    let mut statements = Vec::new();
    for label in PartitionLabel::ALL {
        if label == PartitionLabel::Rest {
            continue;
        }
        let mut v = parse_statements(&text_of(label)?)?;
        v.retain(|s| s.label == label);
        statements.extend(v);
    }
    let rest = parse_sentences(&text_of(PartitionLabel::Rest)?)?;
    let all: CorpusStream = statements
        .iter()
        .map(|s| s.sentence.clone())
        .chain(rest.iter().cloned())
        .collect();
    Ok(LoadedPartition {
        partition: CorpusPartition::from_parts(lexicon.id.clone(), statements, rest),
        lexicon,
        corpus_label: counts.body.corpus,
        all,
        lexicon_bytes,
    })
}

fn cmd_bias(a: &BiasArgs) -> Result<()> {
    let lp = load_partition(&a.partition)?;
    let scorer = a.scorer.spec()?;
    let config = BiasConfig {
        n_resamples: a.resamples,
        seed: a.seed,
        significance_threshold: a.threshold,
    };
    let mut cache = open_cache()?;
    let report = measure(
        &lp.partition,
        &lp.lexicon,
        &lp.corpus_label,
        &scorer,
        &config,
        cache.as_mut(),
    )?;
    let manifest = RunManifest::new("bias")
        .param("resamples", a.resamples)
        .param("threshold", a.threshold)
        .param("scorer", &a.scorer.scorer)
        .config("lexicon", &lp.lexicon_bytes)
        .corpus(&lp.all)
        .lexicon(&lp.lexicon.id)
        .scorer(&scorer.id)
        .seed("permutation", a.seed);
    println!(
        "{}: explicit {:+.4}, implicit {:+.4}, p = {}{}",
        report.lexicon_id,
        report.explicit_bias,
        report.implicit_bias,
        report.p_value,
        if report.significant {
            " (significant)"
        } else {
            ""
        }
    );
    write_doc(&a.out, manifest, &report)
}

fn weat_options(a: &WeatArgs) -> WeatOptions {
    WeatOptions {
        mode: match a.mode {
            Mode::Exact => PMode::Exact,
            Mode::Mc => PMode::MonteCarlo,
        },
        seed: a.seed,
        sign_convention: match a.sign_convention {
            Convention::Paper => SignConvention::Paper,
            Convention::Caliskan => SignConvention::Caliskan,
        },
        mc_samples: a.mc_samples,
    }
}

fn cmd_weat(a: &WeatArgs) -> Result<()> {
    let (lexicon, lex_bytes) = load_lexicon_hashed(&a.lexicon)?;
    let opts = weat_options(a);
    let mut manifest = RunManifest::new("weat")
        .param(
            "mode",
            match a.mode {
                Mode::Exact => "exact",
                Mode::Mc => "mc",
            },
        )
        .param("mc_samples", a.mc_samples)
        .param(
            "sign_convention",
            match a.sign_convention {
                Convention::Paper => "paper",
                Convention::Caliskan => "caliskan",
            },
        )
        .param("filtered", a.filtered)
        .param("compare", a.compare)
        .config("lexicon", &lex_bytes)
        .lexicon(&lexicon.id)
        .seed("permutation", a.seed);

    if let Some(path) = &a.embeddings {
        let bytes = read_file(path)?;
        let (table, stats) = load_embeddings(path)?;
        if stats.duplicates > 0 {
            eprintln!("warning: {} duplicate word(s) ignored", stats.duplicates);
        }
        manifest = manifest.config("embeddings", &bytes);
        let input = WeatInput::resolve(&lexicon, &table)?;
        for line in input.oov_report.lines() {
            eprintln!("oov: {line}");
        }
        let report = run_weat(&input, &opts)?;
        println!(
            "effect size {:+.4}, p = {}",
            report.effect_size, report.p_value
        );
        return write_doc(&a.out, manifest, &report);
    }

    let corpus_args = CorpusArgs {
        corpus: a.train_on.clone().expect("clap requires one of the two"),
        format: a.format,
        lenient: a.lenient,
        source_tag: a.source_tag.clone(),
    };
    let loaded = corpus_args.load(CorpusFormat::Plaintext)?;
    manifest = a.train.record(
        manifest
            .corpus(&loaded.corpus)
            .param("format", format_name(loaded.format)),
    );
    let params = a.train.params();
    let popts = PartitionOptions::default();
    if a.compare {
        let both = joint_vs_implicit(&loaded.corpus, &lexicon, &params, &opts, &popts)?;
        println!(
            "joint effect size {:+.4}, implicit effect size {:+.4}, {} explicit sentence(s) removed",
            both.joint.effect_size, both.implicit.effect_size, both.removed_explicit
        );
        return write_doc(&a.out, manifest, &both);
    }
    let corpus = if a.filtered {
        filter_explicit(&loaded.corpus, std::slice::from_ref(&lexicon), &popts).corpus
    } else {
        loaded.corpus
    };
    let (table, _) = train_embeddings(&corpus, &params)?;
    let input = WeatInput::resolve(&lexicon, &table)?;
    for line in input.oov_report.lines() {
        eprintln!("oov: {line}");
    }
    let report = run_weat(&input, &opts)?;
    println!(
        "effect size {:+.4}, p = {}",
        report.effect_size, report.p_value
    );
    write_doc(&a.out, manifest, &report)
}

fn cmd_evolve(a: &EvolveArgs) -> Result<()> {
    let (lexicon, lex_bytes) = load_lexicon_hashed(&a.lexicon)?;
    let loaded = a.corpus.load(CorpusFormat::Jsonl)?;
    let scorer = a.scorer.spec()?;
    let opts = EvolutionOptions {
        min_statements: a.min_statements,
        bias: BiasConfig {
            n_resamples: a.resamples,
            seed: a.seed,
            significance_threshold: a.threshold,
        },
        partition: PartitionOptions::default(),
    };
    let mut cache = open_cache()?;
    let series = evolution(
        &loaded.corpus,
        &lexicon,
        &loaded.tag,
        &scorer,
        &opts,
        cache.as_mut(),
    )?;
    if loaded.stats.unparseable_timestamps + series.untimestamped > 0 {
        eprintln!(
            "warning: {} sentence(s) without a usable timestamp",
            series.untimestamped
        );
    }
    let manifest = RunManifest::new("evolve")
        .param("format", format_name(loaded.format))
        .param("min_statements", a.min_statements)
        .param("resamples", a.resamples)
        .param("threshold", a.threshold)
        .param("scorer", &a.scorer.scorer)
        .config("lexicon", &lex_bytes)
        .corpus(&loaded.corpus)
        .lexicon(&lexicon.id)
        .scorer(&scorer.id)
        .seed("permutation", a.seed);
    let csv = a.csv.clone().unwrap_or_else(|| a.out.with_extension("csv"));
    write_atomic(&csv, series.to_csv().as_bytes())?;
    println!(
        "{} month(s) included; explicit stability {:.4}, implicit stability {:.4}",
        series.included_buckets, series.explicit_stability, series.implicit_stability
    );
    write_doc(&a.out, manifest, &series)
}

fn cmd_robustness(a: &RobustnessArgs) -> Result<Option<String>> {
    let lp = load_partition(&a.partition)?;
    let scorer = a.scorer.spec()?;
    let mut cache = open_cache()?;
    let mut manifest = RunManifest::new("robustness")
        .param("trials", a.trials)
        .param("scorer", &a.scorer.scorer)
        .config("lexicon", &lp.lexicon_bytes)
        .corpus(&lp.all)
        .lexicon(&lp.lexicon.id)
        .scorer(&scorer.id)
        .seed("trials", a.seed);
    let report = match a.kind {
        Kind::Choice => {
            let fraction = a.fraction.unwrap_or(biaslens::robustness::DEFAULT_FRACTION);
            manifest = manifest.param("kind", "choice").param("fraction", fraction);
            let opts = TrialOptions {
                trials: a.trials,
                fraction,
                seed: a.seed,
            };
            exemplar_choice_trial(&lp.partition, &lp.lexicon, &scorer, &opts, cache.as_mut())?
        }
        Kind::Size => {
            let s1 = a.fraction.unwrap_or(DEFAULT_S1_FRACTION);
            manifest = manifest
                .param("kind", "size")
                .param("s1_fraction", s1)
                .param("s2_fraction", a.s2_fraction);
            let opts = SizeOptions {
                trials: a.trials,
                s1_fraction: s1,
                s2_fraction: a.s2_fraction,
                seed: a.seed,
            };
            set_size_trial(&lp.partition, &lp.lexicon, &scorer, &opts, cache.as_mut())?
        }
        Kind::Classifier => {
            let Some(spec_b) = &a.scorer_b else {
                return Ok(Some("--kind classifier needs --scorer-b".into()));
            };
            let scorer_b = scorer_from(spec_b, a.scorer_b_id.as_deref(), a.scorer.scorer_timeout)?;
            let fraction = a.fraction.unwrap_or(biaslens::robustness::DEFAULT_FRACTION);
            manifest = manifest
                .param("kind", "classifier")
                .param("fraction", fraction)
                .param("scorer_b", spec_b);
            let opts = TrialOptions {
                trials: a.trials,
                fraction,
                seed: a.seed,
            };
            classifier_choice_trial(
                &lp.partition,
                &lp.lexicon,
                &scorer,
                &scorer_b,
                &opts,
                cache.as_mut(),
            )?
        }
    };
    let log = a
        .log
        .clone()
        .unwrap_or_else(|| sibling(&a.out, ".trials.jsonl"));
    write_atomic(&log, report.log_jsonl().as_bytes())?;
    println!(
        "{:.2}% of {} trial(s) consistent ({} aborted)",
        report.consistency_percent, report.trial_count, report.aborted_trials
    );
    write_doc(&a.out, manifest, &report)?;
    Ok(None)
}

#[derive(Serialize)]
struct FilterBody<'a> {
    lexicon_ids: Vec<&'a str>,
    input_sentences: usize,
    removed_explicit: usize,
    kept: usize,
    cross_lexicon_warnings: Vec<String>,
}

fn cmd_filter(a: &FilterArgs) -> Result<()> {
    let mut lexicons = Vec::new();
    let mut manifest = RunManifest::new("filter-explicit");
    for (k, p) in a.lexicon.iter().enumerate() {
        let (lex, bytes) = load_lexicon_hashed(p)?;
        manifest = manifest.config(&format!("lexicon.{k}"), &bytes);
        lexicons.push(lex);
    }
    let warnings: Vec<String> = validate_cross_lexicon(&lexicons)
        .iter()
        .map(|w| w.to_string())
        .collect();
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let loaded = a.corpus.load(CorpusFormat::Plaintext)?;
    let opts = partition_options(a.max_token_distance);
    let out = filter_explicit(&loaded.corpus, &lexicons, &opts);
    write_atomic(&a.out, to_jsonl(&out.corpus).as_bytes())?;
    let body = FilterBody {
        lexicon_ids: lexicons.iter().map(|l| l.id.as_str()).collect(),
        input_sentences: loaded.corpus.total_count(),
        removed_explicit: out.removed,
        kept: out.corpus.total_count(),
        cross_lexicon_warnings: warnings,
    };
    println!(
        "removed {} explicit sentence(s) of {}",
        out.removed, body.input_sentences
    );
    manifest = manifest
        .param("format", format_name(loaded.format))
        .corpus(&loaded.corpus);
    write_doc(&sibling(&a.out, ".report.json"), manifest, &body)
}

fn cmd_embed_train(a: &EmbedTrainArgs) -> Result<()> {
    let loaded = a.corpus.load(CorpusFormat::Plaintext)?;
    let (table, stats) = train_embeddings(&loaded.corpus, &a.train.params())?;
    write_atomic(&a.out, table.to_text().as_bytes())?;
    let manifest = a.train.record(
        RunManifest::new("embed-train")
            .param("format", format_name(loaded.format))
            .corpus(&loaded.corpus),
    );
    println!(
        "{} word(s), dimension {}, {} token(s)",
        stats.vocabulary, stats.dimension, stats.tokens
    );
    let path = a
        .stats
        .clone()
        .unwrap_or_else(|| sibling(&a.out, ".stats.json"));
    write_doc(&path, manifest, &stats)
}

fn cmd_summarize(a: &SummarizeArgs) -> Result<()> {
    let reports = a
        .reports
        .iter()
        .map(|p| load_bias_report(p).map(|d| d.body))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let table = biaslens::report::summarize(
        &reports,
        &SummaryOptions {
            threshold: a.threshold,
        },
    )?;
    print!("{table}");
    Ok(())
}

enum Outcome {
    Done,
    Usage(String),
    Data(Error),
}

fn dispatch(cmd: &Command) -> Outcome {
    let r = match cmd {
        Command::Partition(a) => cmd_partition(a),
        Command::Bias(a) => cmd_bias(a),
        Command::Weat(a) => cmd_weat(a),
        Command::Evolve(a) => cmd_evolve(a),
        Command::Robustness(a) => match cmd_robustness(a) {
            Ok(Some(usage)) => return Outcome::Usage(usage),
            Ok(None) => Ok(()),
            Err(e) => Err(e),
        },
        Command::FilterExplicit(a) => cmd_filter(a),
        Command::EmbedTrain(a) => cmd_embed_train(a),
        Command::Summarize(a) => cmd_summarize(a),
    };
    match r {
        Ok(()) => Outcome::Done,
        Err(e) => Outcome::Data(e),
    }
}

fn run(args: impl IntoIterator<Item = OsString>) -> ExitCode {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.workers {
        if n == 0 {
            eprintln!("error: --workers must be at least 1");
            return ExitCode::from(1);
        }
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| dispatch(&cli.command)) {
        Outcome::Done => ExitCode::SUCCESS,
        Outcome::Usage(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Outcome::Data(e) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::from(2)
        }
    }
}

fn main() -> ExitCode {
    run(std::env::args_os())
}
