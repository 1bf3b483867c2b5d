//! Top-down parsing: frame classification against a codebook pair,
//! majority voting inside known segment boundaries, and the fold-based
//! evaluation harness.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::codebook::{match_score, CodebookPair, PackedBook};
use crate::error::{Error, Result};
use crate::model::{
    task_tier, validate_annotations, BinaryPattern, ClassDecision, PosteriorSequence,
    SegmentAnnotation, Task,
};
use crate::quantize::{sequence_patterns, BoundaryPolicy, QuantizeConfig};
use crate::similarity::{better, Metric, Preference};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParseConfig {
    pub task: Task,
    pub metric: Metric,
    pub quantize: QuantizeConfig,
    /// Score `task` labels using codebooks built from this task's labels.
    pub cross_task_books: Option<Task>,
}

impl ParseConfig {
    pub fn new(task: Task) -> Self {
        ParseConfig {
            task,
            metric: Metric::default(),
            quantize: QuantizeConfig::default(),
            cross_task_books: None,
        }
    }

    pub fn with_metric(mut self, metric: Metric) -> Self {
        self.metric = metric;
        self
    }

    pub fn with_context(mut self, context: usize) -> Self {
        self.quantize.context = context;
        self
    }

    pub fn with_boundary_policy(mut self, policy: BoundaryPolicy) -> Self {
        self.quantize.boundary_policy = policy;
        self
    }

    pub fn with_cross_task_books(mut self, task: Task) -> Self {
        self.cross_task_books = Some(task);
        self
    }

    /// The task whose labels build the codebooks.
    pub fn books_task(&self) -> Task {
        self.cross_task_books.unwrap_or(self.task)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Votes {
    pub class_a: usize,
    pub class_b: usize,
    pub unlabeled: usize,
}

impl Votes {
    pub fn total(&self) -> usize {
        self.class_a + self.class_b + self.unlabeled
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentResult {
    pub segment: SegmentAnnotation,
    pub decision: ClassDecision,
    pub votes: Votes,
}

/// Picks the book whose best member scores better; an exact tie abstains.
pub fn classify_frame(
    pattern: &BinaryPattern,
    books: &CodebookPair,
    metric: &Metric,
) -> Result<ClassDecision> {
    let sa = match_score(pattern, &books.class_a, metric)?;
    let sb = match_score(pattern, &books.class_b, metric)?;
    Ok(match better(metric, sa, sb) {
        Preference::First => ClassDecision::ClassA,
        Preference::Second => ClassDecision::ClassB,
        Preference::Tie => ClassDecision::Unlabeled,
    })
}

/// Majority vote over the frame decisions of one segment. Abstaining frames
/// do not vote; equal vote counts leave the segment unlabeled.
pub fn parse_segment(segment: &SegmentAnnotation, decisions: &[ClassDecision]) -> SegmentResult {
    let mut votes = Votes::default();
    for d in decisions {
        match d {
            ClassDecision::ClassA => votes.class_a += 1,
            ClassDecision::ClassB => votes.class_b += 1,
            ClassDecision::Unlabeled => votes.unlabeled += 1,
        }
    }
    let decision = match votes.class_a.cmp(&votes.class_b) {
        std::cmp::Ordering::Greater => ClassDecision::ClassA,
        std::cmp::Ordering::Less => ClassDecision::ClassB,
        std::cmp::Ordering::Equal => ClassDecision::Unlabeled,
    };
    SegmentResult {
        segment: segment.clone(),
        decision,
        votes,
    }
}

fn check_books(books: &CodebookPair, classes: usize, cfg: &ParseConfig) -> Result<()> {
    if books.classes() != classes {
        return Err(Error::Config(format!(
            "codebooks have K={} but the posteriors have K={classes}",
            books.classes()
        )));
    }
    if books.context() != cfg.quantize.context {
        return Err(Error::Config(format!(
            "codebooks have context {} but the configuration asks for {}",
            books.context(),
            cfg.quantize.context
        )));
    }
    if books.task() != cfg.books_task() {
        return Err(Error::Config(format!(
            "codebooks are for {} but {} codebooks are required",
            books.task(),
            cfg.books_task()
        )));
    }
    for book in [&books.class_a, &books.class_b] {
        if book.is_empty() {
            return Err(Error::EmptyCodebook(book.class().to_string()));
        }
    }
    Ok(())
}

/// Parses every annotated segment of one utterance, in annotation order.
pub fn parse_utterance(
    seq: &PosteriorSequence,
    annotations: &[SegmentAnnotation],
    books: &CodebookPair,
    cfg: &ParseConfig,
) -> Result<Vec<SegmentResult>> {
    cfg.quantize.validate()?;
    check_books(books, seq.classes(), cfg)?;
    validate_annotations(annotations, seq.len())?;
    let patterns = sequence_patterns(seq, &cfg.quantize)?;
    let mut classifier = Classifier::new(books, cfg.metric);
    annotations
        .iter()
        .map(|seg| {
            let decisions = patterns[seg.frames()]
                .iter()
                .flatten()
                .map(|p| classifier.classify(p))
                .collect::<Result<Vec<_>>>()?;
            Ok(parse_segment(seg, &decisions))
        })
        .collect()
}

/// Frame classifier that remembers decisions for repeated patterns.
/// Expects non-empty books whose width matches every pattern it sees.
struct Classifier {
    books: [PackedBook; 2],
    metric: Metric,
    memo: HashMap<BinaryPattern, ClassDecision>,
}

impl Classifier {
    fn new(books: &CodebookPair, metric: Metric) -> Self {
        Classifier {
            books: [
                PackedBook::new(&books.class_a),
                PackedBook::new(&books.class_b),
            ],
            metric,
            memo: HashMap::new(),
        }
    }

    fn classify(&mut self, pattern: &BinaryPattern) -> Result<ClassDecision> {
        if let Some(&d) = self.memo.get(pattern) {
            return Ok(d);
        }
        let sa = self.books[0].best(pattern, &self.metric);
        let sb = self.books[1].best(pattern, &self.metric);
        let d = match better(&self.metric, sa, sb) {
            Preference::First => ClassDecision::ClassA,
            Preference::Second => ClassDecision::ClassB,
            Preference::Tie => ClassDecision::Unlabeled,
        };
        self.memo.insert(pattern.clone(), d);
        Ok(d)
    }
}

/// One posterior sequence with its segment annotations.
#[derive(Debug, Clone, PartialEq)]
pub struct Utterance {
    pub sequence: PosteriorSequence,
    pub annotations: Vec<SegmentAnnotation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EvalOptions {
    pub folds: usize,
    /// Consecutive annotated segments per fold.
    pub fold_length: usize,
    pub seed: u64,
    /// Build codebooks from the segments outside the fold instead of the fold itself.
    pub holdout: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            folds: 5,
            fold_length: 1000,
            seed: 0,
            holdout: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldResult {
    /// Index of the first selected segment in the corpus-wide tier.
    pub start: usize,
    pub segment_accuracy: f64,
    pub frame_accuracy: f64,
    pub segments: usize,
    pub frames: usize,
    pub unlabeled_segments: usize,
    pub codebook_sizes: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub task: Task,
    pub books_task: Task,
    pub metric: Metric,
    pub context: usize,
    pub threshold: f64,
    pub boundary_policy: BoundaryPolicy,
    pub folds: usize,
    pub fold_length: usize,
    pub holdout: bool,
    pub seed: u64,
    pub segment_accuracy_mean: f64,
    pub frame_accuracy_mean: f64,
    pub per_fold: Vec<FoldResult>,
}

/// Per-fold segment results, in fold order.
pub type FoldDetails = Vec<Vec<SegmentResult>>;

/// Fold-averaged accuracy with codebooks built from each fold's selection.
pub fn evaluate(corpus: &[Utterance], cfg: &ParseConfig, opts: &EvalOptions) -> Result<EvalReport> {
    evaluate_detailed(corpus, cfg, opts).map(|(r, _)| r)
}

/// [`evaluate`] with codebooks taken from `cfg.cross_task_books`.
pub fn cross_evaluate(
    corpus: &[Utterance],
    cfg: &ParseConfig,
    opts: &EvalOptions,
) -> Result<EvalReport> {
    if cfg.cross_task_books.is_none() {
        return Err(Error::Config(
            "cross evaluation needs a codebook task".into(),
        ));
    }
    evaluate(corpus, cfg, opts)
}

pub fn evaluate_detailed(
    corpus: &[Utterance],
    cfg: &ParseConfig,
    opts: &EvalOptions,
) -> Result<(EvalReport, FoldDetails)> {
    cfg.quantize.validate()?;
    if opts.folds == 0 || opts.fold_length == 0 {
        return Err(Error::Config(
            "folds and fold length must be at least 1".into(),
        ));
    }
    let first = corpus
        .first()
        .ok_or_else(|| Error::Config("empty corpus".into()))?;
    let classes = first.sequence.classes();
    if let Some(u) = corpus.iter().find(|u| u.sequence.classes() != classes) {
        return Err(Error::Config(format!(
            "utterances disagree on K: {classes} vs {}",
            u.sequence.classes()
        )));
    }

    let patterns: Vec<Vec<Option<BinaryPattern>>> = corpus
        .par_iter()
        .map(|u| {
            validate_annotations(&u.annotations, u.sequence.len())?;
            sequence_patterns(&u.sequence, &cfg.quantize)
        })
        .collect::<Result<_>>()?;

    let books_task = cfg.books_task();
    let mut tier: Vec<(usize, &SegmentAnnotation)> = Vec::new();
    for (ui, u) in corpus.iter().enumerate() {
        for seg in task_tier(&u.annotations, cfg.task) {
            if seg.label(books_task).is_none() {
                return Err(Error::MissingAnnotation {
                    task: books_task,
                    start: seg.start,
                    end: seg.end,
                });
            }
            tier.push((ui, seg));
        }
    }
    if tier.len() < opts.fold_length {
        return Err(Error::InsufficientSegments {
            task: cfg.task,
            required: opts.fold_length,
            available: tier.len(),
        });
    }
    if opts.holdout && tier.len() == opts.fold_length {
        return Err(Error::InsufficientSegments {
            task: cfg.task,
            required: opts.fold_length + 1,
            available: tier.len(),
        });
    }

    let max_start = tier.len() - opts.fold_length;
    let folds: Vec<(FoldResult, Vec<SegmentResult>)> = (0..opts.folds)
        .into_par_iter()
        .map(|fold| {
            let start = fold_start(opts.seed, fold, max_start);
            run_fold(&tier, &patterns, classes, cfg, opts, start)
        })
        .collect::<Result<_>>()?;

    let n = folds.len() as f64;
    let report = EvalReport {
        task: cfg.task,
        books_task,
        metric: cfg.metric,
        context: cfg.quantize.context,
        threshold: cfg.quantize.threshold,
        boundary_policy: cfg.quantize.boundary_policy,
        folds: opts.folds,
        fold_length: opts.fold_length,
        holdout: opts.holdout,
        seed: opts.seed,
        segment_accuracy_mean: folds.iter().map(|f| f.0.segment_accuracy).sum::<f64>() / n,
        frame_accuracy_mean: folds.iter().map(|f| f.0.frame_accuracy).sum::<f64>() / n,
        per_fold: folds.iter().map(|f| f.0.clone()).collect(),
    };
    Ok((report, folds.into_iter().map(|f| f.1).collect()))
}

/// Start index of a fold's window; a pure function of (seed, fold).
pub fn fold_start(seed: u64, fold: usize, max_start: usize) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fold as u64);
    rng.gen_range(0..=max_start)
}

fn run_fold(
    tier: &[(usize, &SegmentAnnotation)],
    patterns: &[Vec<Option<BinaryPattern>>],
    classes: usize,
    cfg: &ParseConfig,
    opts: &EvalOptions,
    start: usize,
) -> Result<(FoldResult, Vec<SegmentResult>)> {
    let end = start + opts.fold_length;
    let books_task = cfg.books_task();
    let mut books = CodebookPair::new(books_task, classes, cfg.quantize.context);
    for (i, &(ui, seg)) in tier.iter().enumerate() {
        let in_window = (start..end).contains(&i);
        if in_window != opts.holdout {
            let label = seg.label(books_task).expect("tier checked for labels");
            books.add_segment(&patterns[ui], seg, label)?;
        }
    }
    for book in [&books.class_a, &books.class_b] {
        if book.is_empty() {
            return Err(Error::EmptyCodebook(book.class().to_string()));
        }
    }

    let mut classifier = Classifier::new(&books, cfg.metric);
    let mut results = Vec::with_capacity(opts.fold_length);
    let (mut seg_ok, mut frames, mut frame_ok, mut unlabeled) = (0usize, 0usize, 0usize, 0usize);
    for &(ui, seg) in &tier[start..end] {
        let truth = seg.label(cfg.task).expect("tier holds labelled segments");
        let decisions = patterns[ui][seg.frames()]
            .iter()
            .flatten()
            .map(|p| classifier.classify(p))
            .collect::<Result<Vec<_>>>()?;
        frames += decisions.len();
        frame_ok += decisions.iter().filter(|d| d.matches(truth)).count();
        let result = parse_segment(seg, &decisions);
        if result.decision.matches(truth) {
            seg_ok += 1;
        }
        if result.decision == ClassDecision::Unlabeled {
            unlabeled += 1;
        }
        results.push(result);
    }
    let fold = FoldResult {
        start,
        segment_accuracy: seg_ok as f64 / opts.fold_length as f64,
        frame_accuracy: if frames == 0 {
            0.0
        } else {
            frame_ok as f64 / frames as f64
        },
        segments: opts.fold_length,
        frames,
        unlabeled_segments: unlabeled,
        codebook_sizes: [books.class_a.len(), books.class_b.len()],
    };
    Ok((fold, results))
}
