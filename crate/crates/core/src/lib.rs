//! Linguistic parsing by binary pattern matching over phonological posteriors.
//!
//! Posterior frames are thresholded into bit patterns ([`quantize`]),
//! optionally widened with right-context frames, and collected into one
//! codebook per class ([`codebook`]). A frame is classified by the codebook
//! holding its most similar member ([`similarity`]), and a segment with
//! known boundaries takes the majority of its frames' decisions
//! ([`parser`]).
//!
//! ```
//! use phonoparse::{
//!     build_codebooks, parse_utterance, sequence_patterns, ClassDecision, ClassLabel,
//!     ParseConfig, PosteriorSequence, SegmentAnnotation, Task,
//! };
//!
//! let seq = PosteriorSequence::from_rows(vec![
//!     vec![0.9, 0.1], vec![0.8, 0.0], vec![0.1, 0.9], vec![0.2, 0.7],
//! ]);
//! let segs = vec![
//!     SegmentAnnotation::new(0, 2).unwrap().with_label(ClassLabel::Consonant),
//!     SegmentAnnotation::new(2, 4).unwrap().with_label(ClassLabel::Vowel),
//! ];
//! let cfg = ParseConfig::new(Task::Cv);
//! let patterns = sequence_patterns(&seq, &cfg.quantize).unwrap();
//! let books = build_codebooks(&patterns, &segs, Task::Cv, 2, 0).unwrap();
//! let results = parse_utterance(&seq, &segs, &books, &cfg).unwrap();
//! assert_eq!(results[0].decision, ClassDecision::ClassA);
//! assert_eq!(results[1].decision, ClassDecision::ClassB);
//! ```

pub mod codebook;
pub mod error;
pub mod io;
pub mod model;
pub mod parser;
pub mod quantize;
pub mod similarity;
pub mod synthgen;

pub use codebook::{
    build_codebooks, match_score, sparsity_stats, Codebook, CodebookPair, SparsityStats,
};
pub use error::{Error, FormatErrorKind, Result};
pub use model::{
    task_tier, validate_annotations, validate_sequence, BinaryPattern, ClassDecision, ClassLabel,
    PosteriorFrame, PosteriorSequence, Rule, SegmentAnnotation, Task, Violation,
};
pub use parser::{
    classify_frame, cross_evaluate, evaluate, evaluate_detailed, parse_segment, parse_utterance,
    EvalOptions, EvalReport, FoldResult, ParseConfig, SegmentResult, Utterance, Votes,
};
pub use quantize::{
    binarize_frame, binarize_sequence, concat_context, high_order_patterns, sequence_patterns,
    BoundaryPolicy, QuantizeConfig,
};
pub use similarity::{
    better, score, taxonomic_units, Metric, MetricKind, Polarity, Preference, TaxonomicUnits,
};
pub use synthgen::{generate, SynthConfig, SyntheticCorpus, TemplateOverlap};
