//! Domain types shared by every stage of the pipeline.

mod pattern;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use pattern::BinaryPattern;

/// One frame of class-conditional posterior probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorFrame(Vec<f64>);

impl PosteriorFrame {
    pub fn new(probs: Vec<f64>) -> Self {
        PosteriorFrame(probs)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<f64>> for PosteriorFrame {
    fn from(v: Vec<f64>) -> Self {
        PosteriorFrame(v)
    }
}

/// N frames of K posteriors each.
///
/// Construction through [`PosteriorSequence::new`] does not check the
/// invariants; use [`validate_sequence`] or [`PosteriorSequence::validated`].
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSequence {
    frames: Vec<PosteriorFrame>,
    class_names: Option<Vec<String>>,
    frame_rate_hz: Option<f64>,
}

impl PosteriorSequence {
    pub fn new(frames: Vec<PosteriorFrame>) -> Self {
        PosteriorSequence {
            frames,
            class_names: None,
            frame_rate_hz: None,
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        Self::new(rows.into_iter().map(PosteriorFrame).collect())
    }

    pub fn with_class_names(mut self, names: Vec<String>) -> Self {
        self.class_names = Some(names);
        self
    }

    pub fn with_frame_rate(mut self, hz: f64) -> Self {
        self.frame_rate_hz = Some(hz);
        self
    }

    /// Builds and checks in one step.
    pub fn validated(self) -> Result<Self> {
        let v = validate_sequence(&self);
        if v.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidPosteriors(v))
        }
    }

    pub fn frames(&self) -> &[PosteriorFrame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Classes per frame, taken from the first frame.
    pub fn classes(&self) -> usize {
        self.frames.first().map_or(0, |f| f.len())
    }

    pub fn class_names(&self) -> Option<&[String]> {
        self.class_names.as_deref()
    }

    pub fn frame_rate_hz(&self) -> Option<f64> {
        self.frame_rate_hz
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    EmptySequence,
    NoClasses,
    NonFinite,
    OutOfRange,
    RaggedK { expected: usize, found: usize },
    ClassNameCount { expected: usize, found: usize },
    BadFrameRate,
}

/// A located invariant violation.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub frame: Option<usize>,
    pub class: Option<usize>,
    pub rule: Rule,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.frame, self.class) {
            (Some(n), Some(k)) => write!(f, "frame {n}, class {k}: ")?,
            (Some(n), None) => write!(f, "frame {n}: ")?,
            _ => {}
        }
        match self.rule {
            Rule::EmptySequence => write!(f, "empty sequence"),
            Rule::NoClasses => write!(f, "zero classes per frame"),
            Rule::NonFinite => write!(f, "not finite"),
            Rule::OutOfRange => write!(f, "out of [0,1]"),
            Rule::RaggedK { expected, found } => {
                write!(f, "ragged K (expected {expected}, found {found})")
            }
            Rule::ClassNameCount { expected, found } => {
                write!(f, "class name count {found} differs from K={expected}")
            }
            Rule::BadFrameRate => write!(f, "frame rate must be positive and finite"),
        }
    }
}

/// Reports every broken invariant; an empty list means the sequence is valid.
pub fn validate_sequence(seq: &PosteriorSequence) -> Vec<Violation> {
    let mut out = Vec::new();
    let Some(first) = seq.frames.first() else {
        out.push(Violation {
            frame: None,
            class: None,
            rule: Rule::EmptySequence,
        });
        return out;
    };
    let k = first.len();
    if k == 0 {
        out.push(Violation {
            frame: Some(0),
            class: None,
            rule: Rule::NoClasses,
        });
    }
    for (n, frame) in seq.frames.iter().enumerate() {
        if frame.len() != k {
            out.push(Violation {
                frame: Some(n),
                class: None,
                rule: Rule::RaggedK {
                    expected: k,
                    found: frame.len(),
                },
            });
        }
        out.extend(frame_violations(frame).map(|(c, rule)| Violation {
            frame: Some(n),
            class: Some(c),
            rule,
        }));
    }
    if let Some(names) = &seq.class_names {
        if names.len() != k {
            out.push(Violation {
                frame: None,
                class: None,
                rule: Rule::ClassNameCount {
                    expected: k,
                    found: names.len(),
                },
            });
        }
    }
    if let Some(hz) = seq.frame_rate_hz {
        if !(hz.is_finite() && hz > 0.0) {
            out.push(Violation {
                frame: None,
                class: None,
                rule: Rule::BadFrameRate,
            });
        }
    }
    out
}

pub(crate) fn frame_violations(frame: &PosteriorFrame) -> impl Iterator<Item = (usize, Rule)> + '_ {
    frame.0.iter().enumerate().filter_map(|(c, &p)| {
        if !p.is_finite() {
            Some((c, Rule::NonFinite))
        } else if !(0.0..=1.0).contains(&p) {
            Some((c, Rule::OutOfRange))
        } else {
            None
        }
    })
}

/// A binary parsing scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Cv,
    Stress,
    Accent,
}

impl Task {
    pub const ALL: [Task; 3] = [Task::Cv, Task::Stress, Task::Accent];

    pub fn classes(self) -> [ClassLabel; 2] {
        match self {
            Task::Cv => [ClassLabel::Consonant, ClassLabel::Vowel],
            Task::Stress => [ClassLabel::Stressed, ClassLabel::Unstressed],
            Task::Accent => [ClassLabel::Accented, ClassLabel::Unaccented],
        }
    }

    pub fn class_a(self) -> ClassLabel {
        self.classes()[0]
    }

    pub fn class_b(self) -> ClassLabel {
        self.classes()[1]
    }

    pub fn name(self) -> &'static str {
        match self {
            Task::Cv => "cv",
            Task::Stress => "stress",
            Task::Accent => "accent",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cv" | "c-v" => Ok(Task::Cv),
            "stress" => Ok(Task::Stress),
            "accent" => Ok(Task::Accent),
            _ => Err(Error::Config(format!("unknown task {s:?}"))),
        }
    }
}

/// One of the two classes of a [`Task`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassLabel {
    Consonant,
    Vowel,
    Stressed,
    Unstressed,
    Accented,
    Unaccented,
}

impl ClassLabel {
    pub fn task(self) -> Task {
        match self {
            ClassLabel::Consonant | ClassLabel::Vowel => Task::Cv,
            ClassLabel::Stressed | ClassLabel::Unstressed => Task::Stress,
            ClassLabel::Accented | ClassLabel::Unaccented => Task::Accent,
        }
    }

    /// True for the first class of the task (consonant, stressed, accented).
    pub fn is_class_a(self) -> bool {
        self.task().class_a() == self
    }

    /// The class at the same position in another task.
    pub fn counterpart(self, task: Task) -> ClassLabel {
        if self.is_class_a() {
            task.class_a()
        } else {
            task.class_b()
        }
    }

    /// Short token used in label and codebook files.
    pub fn code(self) -> &'static str {
        match self {
            ClassLabel::Consonant => "C",
            ClassLabel::Vowel => "V",
            ClassLabel::Stressed | ClassLabel::Accented => "1",
            ClassLabel::Unstressed | ClassLabel::Unaccented => "0",
        }
    }

    pub fn from_code(task: Task, code: &str) -> Option<ClassLabel> {
        task.classes().into_iter().find(|c| c.code() == code)
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Outcome of a frame or segment classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassDecision {
    ClassA,
    ClassB,
    Unlabeled,
}

impl ClassDecision {
    /// Whether this decision names `label` (compared by position within its task).
    pub fn matches(self, label: ClassLabel) -> bool {
        match self {
            ClassDecision::ClassA => label.is_class_a(),
            ClassDecision::ClassB => !label.is_class_a(),
            ClassDecision::Unlabeled => false,
        }
    }

    pub fn label(self, task: Task) -> Option<ClassLabel> {
        match self {
            ClassDecision::ClassA => Some(task.class_a()),
            ClassDecision::ClassB => Some(task.class_b()),
            ClassDecision::Unlabeled => None,
        }
    }
}

/// A frame range `[start, end)` with its per-task labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentAnnotation {
    pub start: usize,
    pub end: usize,
    labels: BTreeMap<Task, ClassLabel>,
}

impl SegmentAnnotation {
    pub fn new(start: usize, end: usize) -> Result<Self> {
        if start >= end {
            return Err(Error::Config(format!(
                "reversed or empty segment [{start}, {end})"
            )));
        }
        Ok(SegmentAnnotation {
            start,
            end,
            labels: BTreeMap::new(),
        })
    }

    pub fn with_label(mut self, label: ClassLabel) -> Self {
        self.labels.insert(label.task(), label);
        self
    }

    pub fn set_label(&mut self, label: ClassLabel) {
        self.labels.insert(label.task(), label);
    }

    pub fn label(&self, task: Task) -> Option<ClassLabel> {
        self.labels.get(&task).copied()
    }

    pub fn labels(&self) -> impl Iterator<Item = ClassLabel> + '_ {
        self.labels.values().copied()
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn frames(&self) -> std::ops::Range<usize> {
        self.start..self.end
    }
}

/// Checks bounds against `frames` and non-overlap within every task tier.
pub fn validate_annotations(annotations: &[SegmentAnnotation], frames: usize) -> Result<()> {
    for seg in annotations {
        if seg.end > frames {
            return Err(Error::SegmentOutOfRange {
                start: seg.start,
                end: seg.end,
                frames,
            });
        }
    }
    for task in Task::ALL {
        let tier = task_tier(annotations, task);
        for pair in tier.windows(2) {
            if pair[1].start < pair[0].end {
                return Err(Error::OverlappingSegments {
                    task,
                    first_start: pair[0].start,
                    first_end: pair[0].end,
                    second_start: pair[1].start,
                    second_end: pair[1].end,
                });
            }
        }
    }
    Ok(())
}

/// Segments carrying a label for `task`, sorted by start.
pub fn task_tier(annotations: &[SegmentAnnotation], task: Task) -> Vec<&SegmentAnnotation> {
    let mut tier: Vec<_> = annotations
        .iter()
        .filter(|s| s.label(task).is_some())
        .collect();
    tier.sort_by_key(|s| (s.start, s.end));
    tier
}
