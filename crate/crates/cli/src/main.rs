use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, CommandFactory, Parser, Subcommand};
use phonoparse::io::{
    format_report, read_codebook, read_labels, read_posteriors, write_codebook, write_labels,
    write_posteriors, write_report,
};
use phonoparse::synthgen::{uniform_templates, AccentRelation};
use phonoparse::{
    build_codebooks, cross_evaluate, evaluate, generate, parse_utterance, sequence_patterns,
    sparsity_stats, BoundaryPolicy, ClassDecision, CodebookPair, EvalOptions, EvalReport, Metric,
    MetricKind, ParseConfig, SynthConfig, Task, TemplateOverlap, Utterance,
};
use serde::Serialize;

mod table;

const SWEEP: [usize; 5] = [0, 1, 2, 4, 6];

#[derive(Parser)]
#[command(
    name = "phonoparse",
    version,
    about = "Segment classification by binary pattern matching"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args)]
struct Global {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Metric name with optional :max/:min. eval and cross-eval also take a
    /// comma-separated list or `all`.
    #[arg(long, global = true, default_value = "innerproduct")]
    metric: String,
    /// Right-context frames. eval and cross-eval sweep 0,1,2,4,6 when omitted.
    #[arg(long, global = true)]
    context: Option<usize>,
    #[arg(long, global = true, default_value_t = 0.5)]
    threshold: f64,
    #[arg(long, global = true, default_value = "clamp")]
    boundary_policy: BoundaryPolicy,
    /// Task to parse. eval and cross-eval also take a comma-separated list or `all`.
    #[arg(long, global = true, default_value = "cv")]
    task: String,
    #[arg(long, global = true, default_value_t = 5)]
    folds: usize,
    #[arg(long, global = true, default_value_t = 1000)]
    fold_length: usize,
    /// Build each fold's codebooks from the segments outside the fold.
    #[arg(long, global = true)]
    holdout: bool,
    /// Write a JSON report here.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus as PREFIX.post and PREFIX.segs.
    Gen(GenArgs),
    /// Build the two codebooks of a task.
    Build(BuildArgs),
    /// Classify every segment of an utterance against two codebooks.
    Parse(ParseArgs),
    /// Fold-averaged accuracy with codebooks of the same task.
    Eval(EvalArgs),
    /// Fold-averaged accuracy with codebooks of another task.
    CrossEval(CrossEvalArgs),
    /// Pattern sparsity of binarized posteriors.
    Stats(StatsArgs),
}

#[derive(Args)]
struct Inputs {
    /// Posterior files; labels are read from the sibling .segs file.
    #[arg(value_name = "POST")]
    positional: Vec<PathBuf>,
    #[arg(long = "in", value_name = "POST")]
    named: Vec<PathBuf>,
}

impl Inputs {
    fn paths(&self) -> Vec<&Path> {
        self.positional
            .iter()
            .chain(&self.named)
            .map(PathBuf::as_path)
            .collect()
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(value_name = "PREFIX")]
    prefix: Option<PathBuf>,
    #[arg(long = "out", value_name = "PREFIX")]
    out: Option<PathBuf>,
    #[arg(short, long, default_value_t = 15)]
    k: usize,
    #[arg(long, default_value_t = 2000)]
    segments: usize,
    #[arg(long, default_value_t = 4)]
    templates: usize,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0.1)]
    softness: f64,
    #[arg(long, default_value_t = 3)]
    min_frames: usize,
    #[arg(long, default_value_t = 8)]
    max_frames: usize,
    #[arg(long, default_value = "disjoint")]
    overlap: TemplateOverlap,
    #[arg(long, default_value = "independent")]
    accent: AccentRelation,
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    inputs: Inputs,
    /// Output prefix; writes PREFIX.<class>.cbk for both classes.
    #[arg(long, value_name = "PREFIX")]
    out: PathBuf,
}

#[derive(Args)]
struct ParseArgs {
    #[command(flatten)]
    inputs: Inputs,
    /// The two codebook files, in either order.
    #[arg(long, num_args = 2, required = true, value_name = "CBK")]
    books: Vec<PathBuf>,
    /// Decision file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    inputs: Inputs,
}

#[derive(Args)]
struct CrossEvalArgs {
    #[command(flatten)]
    inputs: Inputs,
    /// Task whose labels build the codebooks.
    #[arg(long)]
    books_task: Task,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    inputs: Inputs,
    /// Only count the first N patterns of the concatenated input.
    #[arg(long)]
    frames: Option<usize>,
}

#[derive(Serialize)]
struct SweepReport<'a> {
    command: &'a str,
    inputs: Vec<String>,
    reports: Vec<EvalReport>,
}

#[derive(Serialize)]
struct StatsReport {
    inputs: Vec<String>,
    context: usize,
    threshold: f64,
    boundary_policy: BoundaryPolicy,
    stats: phonoparse::SparsityStats,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", one_line(&e));
            ExitCode::from(1)
        }
    }
}

fn one_line(e: &anyhow::Error) -> String {
    let mut msg = String::new();
    for cause in e.chain().map(|c| c.to_string()) {
        if msg.ends_with(&cause) {
            continue;
        }
        if !msg.is_empty() {
            msg.push_str(": ");
        }
        msg.push_str(&cause);
    }
    msg.replace('\n', "; ")
}

fn usage_error(msg: impl std::fmt::Display) -> ! {
    Cli::command()
        .error(clap::error::ErrorKind::InvalidValue, msg)
        .exit()
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Gen(a) => gen(g, a),
        Command::Build(a) => build(g, a),
        Command::Parse(a) => parse(g, a),
        Command::Eval(a) => eval(g, &a.inputs, None),
        Command::CrossEval(a) => eval(g, &a.inputs, Some(a.books_task)),
        Command::Stats(a) => stats(g, a),
    }
}

fn metrics(g: &Global) -> Vec<Metric> {
    if g.metric.eq_ignore_ascii_case("all") {
        return MetricKind::ALL.map(Metric::new).to_vec();
    }
    g.metric
        .split(',')
        .map(|m| m.parse().unwrap_or_else(|e| usage_error(e)))
        .collect()
}

fn tasks(g: &Global) -> Vec<Task> {
    if g.task.eq_ignore_ascii_case("all") {
        return Task::ALL.to_vec();
    }
    g.task
        .split(',')
        .map(|t| t.parse().unwrap_or_else(|e| usage_error(e)))
        .collect()
}

fn single<T: Copy>(items: Vec<T>, flag: &str) -> T {
    match items[..] {
        [one] => one,
        _ => usage_error(format!("{flag} takes a single value for this command")),
    }
}

fn parse_config(g: &Global, task: Task, metric: Metric, context: usize) -> ParseConfig {
    let mut cfg = ParseConfig::new(task)
        .with_metric(metric)
        .with_context(context)
        .with_boundary_policy(g.boundary_policy);
    cfg.quantize.threshold = g.threshold;
    cfg
}

fn labels_path(post: &Path) -> PathBuf {
    post.with_extension("segs")
}

fn load(paths: &[&Path]) -> Result<Vec<Utterance>> {
    if paths.is_empty() {
        usage_error("no input posterior files given");
    }
    paths
        .iter()
        .map(|p| {
            let sequence = read_posteriors(p)?;
            let annotations = read_labels(&labels_path(p), Some(sequence.len()))?;
            Ok(Utterance {
                sequence,
                annotations,
            })
        })
        .collect()
}

fn path_strings(paths: &[&Path]) -> Vec<String> {
    paths.iter().map(|p| p.display().to_string()).collect()
}

fn suffixed(prefix: &Path, ext: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_owned();
    name.push(".");
    name.push(ext);
    name.into()
}

fn gen(g: &Global, a: &GenArgs) -> Result<()> {
    let prefix = match (&a.prefix, &a.out) {
        (Some(p), None) | (None, Some(p)) => p,
        (None, None) => usage_error("gen needs an output prefix"),
        (Some(_), Some(_)) => usage_error("give the output prefix once"),
    };
    let cfg = SynthConfig {
        k: a.k,
        templates_per_class: uniform_templates(a.templates),
        noise_flip_prob: a.noise,
        softness: a.softness,
        segments: a.segments,
        frames_per_segment: (a.min_frames, a.max_frames),
        seed: g.seed,
        template_overlap: a.overlap,
        accent_relation: a.accent,
    };
    let corpus = generate(&cfg)?;
    write_posteriors(&corpus.sequence, &suffixed(prefix, "post"))?;
    write_labels(&corpus.annotations, &suffixed(prefix, "segs"))?;
    Ok(())
}

fn build(g: &Global, a: &BuildArgs) -> Result<()> {
    let task = single(tasks(g), "--task");
    let context = g.context.unwrap_or(0);
    let cfg = parse_config(g, task, Metric::default(), context);
    let corpus = load(&a.inputs.paths())?;
    let k = corpus[0].sequence.classes();
    let mut books = CodebookPair::new(task, k, context);
    for u in &corpus {
        let pats = sequence_patterns(&u.sequence, &cfg.quantize)?;
        let part = build_codebooks(&pats, &u.annotations, task, k, context)?;
        books.class_a.merge(&part.class_a)?;
        books.class_b.merge(&part.class_b)?;
    }
    let mut sizes = Vec::new();
    for book in [&books.class_a, &books.class_b] {
        let path = suffixed(&a.out, &format!("{}.cbk", book.class().code()));
        write_codebook(book, &path)?;
        sizes.push(format!("{}: {} patterns", path.display(), book.len()));
    }
    println!("{}", sizes.join("\n"));
    Ok(())
}

fn parse(g: &Global, a: &ParseArgs) -> Result<()> {
    let paths = a.inputs.paths();
    if paths.len() != 1 {
        usage_error("parse takes exactly one posterior file");
    }
    let first = read_codebook(&a.books[0])?;
    let second = read_codebook(&a.books[1])?;
    let (class_a, class_b) = if first.class().is_class_a() {
        (first, second)
    } else {
        (second, first)
    };
    let books = CodebookPair::from_books(class_a, class_b)
        .with_context(|| format!("{} and {}", a.books[0].display(), a.books[1].display()))?;
    let task = books.task();
    let context = g.context.unwrap_or(books.context());
    let cfg = parse_config(g, task, single(metrics(g), "--metric"), context);
    let u = load(&paths)?.remove(0);
    let results = parse_utterance(&u.sequence, &u.annotations, &books, &cfg)?;

    let mut out = format!(
        "# start end decision {} {} unlabeled\n",
        task.class_a().code(),
        task.class_b().code()
    );
    for r in &results {
        let decision = match r.decision {
            ClassDecision::Unlabeled => "unlabeled",
            d => d.label(task).expect("labeled decision").code(),
        };
        out.push_str(&format!(
            "{} {} {decision} {} {} {}\n",
            r.segment.start, r.segment.end, r.votes.class_a, r.votes.class_b, r.votes.unlabeled
        ));
    }
    match &a.out {
        Some(p) => std::fs::write(p, out).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{out}"),
    }
    Ok(())
}

fn eval(g: &Global, inputs: &Inputs, books_task: Option<Task>) -> Result<()> {
    let paths = inputs.paths();
    let corpus = load(&paths)?;
    let contexts = g.context.map_or(SWEEP.to_vec(), |c| vec![c]);
    let opts = EvalOptions {
        folds: g.folds,
        fold_length: g.fold_length,
        seed: g.seed,
        holdout: g.holdout,
    };
    let mut reports = Vec::new();
    for task in tasks(g) {
        if books_task == Some(task) {
            bail!("cross evaluation needs a codebook task other than {task}");
        }
        for metric in metrics(g) {
            for &context in &contexts {
                let cfg = parse_config(g, task, metric, context);
                let report = match books_task {
                    Some(b) => cross_evaluate(&corpus, &cfg.with_cross_task_books(b), &opts)?,
                    None => evaluate(&corpus, &cfg, &opts)?,
                };
                reports.push(report);
            }
        }
    }
    print!("{}", table::accuracy_table(&reports, &contexts));
    if let Some(path) = &g.report {
        let command = if books_task.is_some() {
            "cross-eval"
        } else {
            "eval"
        };
        let sweep = SweepReport {
            command,
            inputs: path_strings(&paths),
            reports,
        };
        write_report(&sweep, path)?;
    }
    Ok(())
}

fn stats(g: &Global, a: &StatsArgs) -> Result<()> {
    let paths = a.inputs.paths();
    if paths.is_empty() {
        usage_error("no input posterior files given");
    }
    let context = g.context.unwrap_or(0);
    let cfg = parse_config(g, Task::Cv, Metric::default(), context);
    let mut patterns = Vec::new();
    for p in &paths {
        let seq = read_posteriors(p)?;
        patterns.extend(
            sequence_patterns(&seq, &cfg.quantize)?
                .into_iter()
                .flatten(),
        );
    }
    if let Some(n) = a.frames {
        patterns.truncate(n);
    }
    let width = patterns.first().map_or(0, |p| p.width());
    let stats = sparsity_stats(&patterns, width)?;
    let report = StatsReport {
        inputs: path_strings(&paths),
        context,
        threshold: g.threshold,
        boundary_policy: g.boundary_policy,
        stats,
    };
    print!("{}", format_report(&report.stats)?);
    if let Some(path) = &g.report {
        write_report(&report, path)?;
    }
    Ok(())
}
