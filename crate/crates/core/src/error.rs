use std::fmt;
use std::path::PathBuf;

use crate::model::{Task, Violation};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid posterior data: {}", join_violations(.0))]
    InvalidPosteriors(Vec<Violation>),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("pattern width mismatch: {left} vs {right}")]
    WidthMismatch { left: usize, right: usize },

    #[error("expected a first-order (context 0) pattern, got context {0}")]
    NotFirstOrder(usize),

    #[error("codebook for {0} is empty")]
    EmptyCodebook(String),

    #[error("segment [{start}, {end}) exceeds sequence length {frames}")]
    SegmentOutOfRange {
        start: usize,
        end: usize,
        frames: usize,
    },

    #[error(
        "{task} segments [{first_start}, {first_end}) and [{second_start}, {second_end}) overlap"
    )]
    OverlappingSegments {
        task: Task,
        first_start: usize,
        first_end: usize,
        second_start: usize,
        second_end: usize,
    },

    #[error("not enough {task} segments: {required} required, {available} available")]
    InsufficientSegments {
        task: Task,
        required: usize,
        available: usize,
    },

    #[error("segment [{start}, {end}) has no {task} label")]
    MissingAnnotation {
        task: Task,
        start: usize,
        end: usize,
    },

    #[error("{}", format_location(.path, .line, .kind))]
    Format {
        path: Option<PathBuf>,
        line: usize,
        kind: FormatErrorKind,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("report serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

/// What went wrong on a specific line of a text file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FormatErrorKind {
    BadMagic { expected: &'static str },
    UnsupportedVersion(String),
    BadHeader(String),
    RaggedRow { expected: usize, found: usize },
    OutOfRange(String),
    BadNumber(String),
    Truncated { expected: usize, found: usize },
    TrailingData,
    ReversedRange { start: usize, end: usize },
    UnknownTask(String),
    UnknownLabel(String),
    Overlap { task: Task, previous_line: usize },
    BeyondSequence { end: usize, frames: usize },
    WidthMismatch { expected: usize, found: usize },
    BadBit(char),
    DuplicateEntry(String),
    ZeroCount,
}

impl fmt::Display for FormatErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormatErrorKind::BadMagic { expected } => write!(f, "bad magic, expected {expected}"),
            FormatErrorKind::UnsupportedVersion(v) => write!(f, "unsupported version {v:?}"),
            FormatErrorKind::BadHeader(msg) => write!(f, "bad header: {msg}"),
            FormatErrorKind::RaggedRow { expected, found } => {
                write!(f, "ragged row: expected {expected} values, found {found}")
            }
            FormatErrorKind::OutOfRange(v) => write!(f, "value {v} out of [0,1]"),
            FormatErrorKind::BadNumber(v) => write!(f, "not a number: {v:?}"),
            FormatErrorKind::Truncated { expected, found } => {
                write!(f, "truncated: expected {expected} rows, found {found}")
            }
            FormatErrorKind::TrailingData => write!(f, "data after the declared rows"),
            FormatErrorKind::ReversedRange { start, end } => {
                write!(f, "reversed or empty range {start} {end}")
            }
            FormatErrorKind::UnknownTask(t) => write!(f, "unknown task {t:?}"),
            FormatErrorKind::UnknownLabel(l) => write!(f, "unknown label {l:?}"),
            FormatErrorKind::Overlap {
                task,
                previous_line,
            } => write!(f, "{task} segment overlaps the one on line {previous_line}"),
            FormatErrorKind::BeyondSequence { end, frames } => {
                write!(f, "segment end {end} exceeds sequence length {frames}")
            }
            FormatErrorKind::WidthMismatch { expected, found } => {
                write!(
                    f,
                    "pattern width {found} does not match header width {expected}"
                )
            }
            FormatErrorKind::BadBit(c) => write!(f, "invalid bit character {c:?}"),
            FormatErrorKind::DuplicateEntry(b) => write!(f, "duplicate entry {b}"),
            FormatErrorKind::ZeroCount => write!(f, "entry count must be at least 1"),
        }
    }
}

fn format_location(path: &Option<PathBuf>, line: &usize, kind: &FormatErrorKind) -> String {
    match path {
        Some(p) => format!("{}:{line}: {kind}", p.display()),
        None => format!("line {line}: {kind}"),
    }
}

fn join_violations(v: &[Violation]) -> String {
    let shown: Vec<String> = v.iter().take(5).map(|x| x.to_string()).collect();
    let mut s = shown.join("; ");
    if v.len() > 5 {
        s.push_str(&format!("; and {} more", v.len() - 5));
    }
    s
}

impl Error {
    /// Line number for file-format errors.
    pub fn line(&self) -> Option<usize> {
        match self {
            Error::Format { line, .. } => Some(*line),
            _ => None,
        }
    }

    pub fn format_kind(&self) -> Option<&FormatErrorKind> {
        match self {
            Error::Format { kind, .. } => Some(kind),
            _ => None,
        }
    }
}
