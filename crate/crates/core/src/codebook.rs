//! Class-specific codebooks of unique binary structures.

use std::collections::{BTreeMap, HashSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{validate_annotations, BinaryPattern, ClassLabel, SegmentAnnotation, Task};
use crate::similarity::{better, word_units, Metric, Preference};

/// The distinct patterns observed for one class, with occurrence counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codebook {
    class: ClassLabel,
    classes: usize,
    context: usize,
    entries: BTreeMap<BinaryPattern, u64>,
}

impl Codebook {
    pub fn new(class: ClassLabel, classes: usize, context: usize) -> Self {
        assert!(classes > 0);
        Codebook {
            class,
            classes,
            context,
            entries: BTreeMap::new(),
        }
    }

    pub fn task(&self) -> Task {
        self.class.task()
    }

    pub fn class(&self) -> ClassLabel {
        self.class
    }

    /// Classes per frame (K).
    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn context(&self) -> usize {
        self.context
    }

    pub fn width(&self) -> usize {
        self.classes * (1 + self.context)
    }

    /// Number of distinct patterns.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_count(&self) -> u64 {
        self.entries.values().sum()
    }

    pub fn count(&self, pattern: &BinaryPattern) -> u64 {
        self.entries.get(pattern).copied().unwrap_or(0)
    }

    pub fn contains(&self, pattern: &BinaryPattern) -> bool {
        self.entries.contains_key(pattern)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&BinaryPattern, u64)> {
        self.entries.iter().map(|(p, &c)| (p, c))
    }

    pub fn patterns(&self) -> impl Iterator<Item = &BinaryPattern> {
        self.entries.keys()
    }

    fn check_shape(&self, pattern: &BinaryPattern) -> Result<()> {
        if pattern.classes() != self.classes || pattern.context() != self.context {
            return Err(Error::WidthMismatch {
                left: self.width(),
                right: pattern.width(),
            });
        }
        Ok(())
    }

    pub fn insert(&mut self, pattern: BinaryPattern) -> Result<()> {
        self.insert_count(pattern, 1)
    }

    pub fn insert_count(&mut self, pattern: BinaryPattern, count: u64) -> Result<()> {
        self.check_shape(&pattern)?;
        if count == 0 {
            return Err(Error::Config("codebook counts must be at least 1".into()));
        }
        *self.entries.entry(pattern).or_insert(0) += count;
        Ok(())
    }

    /// Adds every count of `other` into `self`; both must describe the same class and shape.
    pub fn merge(&mut self, other: &Codebook) -> Result<()> {
        if other.class != self.class {
            return Err(Error::Config(format!(
                "cannot merge {} codebook into {}",
                other.class, self.class
            )));
        }
        for (p, c) in other.entries() {
            self.insert_count(p.clone(), c)?;
        }
        Ok(())
    }
}

/// The two codebooks of one task.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodebookPair {
    pub class_a: Codebook,
    pub class_b: Codebook,
}

impl CodebookPair {
    pub fn new(task: Task, classes: usize, context: usize) -> Self {
        CodebookPair {
            class_a: Codebook::new(task.class_a(), classes, context),
            class_b: Codebook::new(task.class_b(), classes, context),
        }
    }

    pub fn from_books(class_a: Codebook, class_b: Codebook) -> Result<Self> {
        if class_a.task() != class_b.task()
            || !class_a.class.is_class_a()
            || class_b.class.is_class_a()
        {
            return Err(Error::Config(format!(
                "codebooks {} and {} do not form a task pair",
                class_a.class, class_b.class
            )));
        }
        if class_a.classes != class_b.classes || class_a.context != class_b.context {
            return Err(Error::Config(format!(
                "codebook shapes differ: K={} context={} vs K={} context={}",
                class_a.classes, class_a.context, class_b.classes, class_b.context
            )));
        }
        Ok(CodebookPair { class_a, class_b })
    }

    pub fn task(&self) -> Task {
        self.class_a.task()
    }

    pub fn classes(&self) -> usize {
        self.class_a.classes
    }

    pub fn context(&self) -> usize {
        self.class_a.context
    }

    pub fn width(&self) -> usize {
        self.class_a.width()
    }

    pub fn book(&self, class: ClassLabel) -> Option<&Codebook> {
        if class == self.class_a.class {
            Some(&self.class_a)
        } else if class == self.class_b.class {
            Some(&self.class_b)
        } else {
            None
        }
    }

    fn book_mut(&mut self, class: ClassLabel) -> Option<&mut Codebook> {
        if class == self.class_a.class {
            Some(&mut self.class_a)
        } else if class == self.class_b.class {
            Some(&mut self.class_b)
        } else {
            None
        }
    }

    /// Adds the patterns of frames `segment` covers to the book of `class`.
    /// Absent patterns (skipped anchors) contribute nothing.
    pub fn add_segment(
        &mut self,
        patterns: &[Option<BinaryPattern>],
        segment: &SegmentAnnotation,
        class: ClassLabel,
    ) -> Result<()> {
        if segment.end > patterns.len() {
            return Err(Error::SegmentOutOfRange {
                start: segment.start,
                end: segment.end,
                frames: patterns.len(),
            });
        }
        let task = self.task();
        let book = self
            .book_mut(class)
            .ok_or_else(|| Error::Config(format!("{class} is not a {task} class")))?;
        for p in patterns[segment.frames()].iter().flatten() {
            book.insert(p.clone())?;
        }
        Ok(())
    }

    /// Adds every segment of an utterance that carries a label for this task.
    pub fn add_utterance(
        &mut self,
        patterns: &[Option<BinaryPattern>],
        annotations: &[SegmentAnnotation],
    ) -> Result<()> {
        validate_annotations(annotations, patterns.len())?;
        let task = self.task();
        for seg in annotations {
            if let Some(label) = seg.label(task) {
                self.add_segment(patterns, seg, label)?;
            }
        }
        Ok(())
    }

    pub fn total_count(&self) -> u64 {
        self.class_a.total_count() + self.class_b.total_count()
    }
}

/// Builds both codebooks of `task` from one utterance's patterns.
///
/// `patterns` is aligned with frames; frames outside any segment labelled
/// for `task` are ignored.
pub fn build_codebooks(
    patterns: &[Option<BinaryPattern>],
    annotations: &[SegmentAnnotation],
    task: Task,
    classes: usize,
    context: usize,
) -> Result<CodebookPair> {
    let mut pair = CodebookPair::new(task, classes, context);
    pair.add_utterance(patterns, annotations)?;
    Ok(pair)
}

/// Best score of `pattern` against any member of `book`.
///
/// Equivalent to an exhaustive scan; the scan stops early only once the
/// metric's best attainable value has been reached.
pub fn match_score(pattern: &BinaryPattern, book: &Codebook, metric: &Metric) -> Result<f64> {
    if pattern.width() != book.width() {
        return Err(Error::WidthMismatch {
            left: pattern.width(),
            right: book.width(),
        });
    }
    let mut members = book.patterns();
    let first = members
        .next()
        .ok_or_else(|| Error::EmptyCodebook(book.class.to_string()))?;
    let bound = metric.attainable_bound(book.width());
    let mut best = metric.score_unchecked(pattern, first);
    if best == bound {
        return Ok(best);
    }
    for member in members {
        let s = metric.score_unchecked(pattern, member);
        if better(metric, s, best) == Preference::First {
            best = s;
            if best == bound {
                break;
            }
        }
    }
    Ok(best)
}

/// A codebook's members laid out in one contiguous word array.
pub(crate) struct PackedBook {
    words: Vec<u64>,
    stride: usize,
    width: usize,
}

impl PackedBook {
    pub(crate) fn new(book: &Codebook) -> Self {
        let width = book.width();
        let stride = width.div_ceil(64);
        let mut words = Vec::with_capacity(stride * book.len());
        for p in book.patterns() {
            words.extend_from_slice(p.words());
        }
        PackedBook {
            words,
            stride,
            width,
        }
    }

    /// Same result as [`match_score`] for a non-empty book of matching width.
    pub(crate) fn best(&self, pattern: &BinaryPattern, metric: &Metric) -> f64 {
        let probe = pattern.words();
        let bound = metric.attainable_bound(self.width);
        let mut best = None;
        for member in self.words.chunks_exact(self.stride) {
            let s = metric
                .kind
                .score_units(&word_units(probe, member, self.width));
            match best {
                Some(b) if better(metric, s, b) != Preference::First => continue,
                _ => best = Some(s),
            }
            if s == bound {
                break;
            }
        }
        best.expect("packed book is not empty")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SparsityStats {
    pub unique_count: usize,
    pub total_count: usize,
    pub width: usize,
    pub ratio_of_total: f64,
    /// `unique_count / 2^width`, or 0 when `possible_overflow` is set.
    pub ratio_of_possible: f64,
    /// 2^width is not exactly representable as a 128-bit integer.
    pub possible_overflow: bool,
    /// log10 of `unique_count / 2^width`; finite for any width.
    pub log10_ratio_of_possible: f64,
}

pub fn sparsity_stats(patterns: &[BinaryPattern], width: usize) -> Result<SparsityStats> {
    if patterns.is_empty() {
        return Err(Error::Config(
            "sparsity statistics need at least one pattern".into(),
        ));
    }
    if let Some(p) = patterns.iter().find(|p| p.width() != width) {
        return Err(Error::WidthMismatch {
            left: width,
            right: p.width(),
        });
    }
    let unique_count = patterns.iter().collect::<HashSet<_>>().len();
    let total_count = patterns.len();
    let possible_overflow = width >= 128;
    let ratio_of_possible = if possible_overflow {
        0.0
    } else {
        unique_count as f64 / (1u128 << width) as f64
    };
    Ok(SparsityStats {
        unique_count,
        total_count,
        width,
        ratio_of_total: unique_count as f64 / total_count as f64,
        ratio_of_possible,
        possible_overflow,
        log10_ratio_of_possible: (unique_count as f64).log10() - width as f64 * 2f64.log10(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::similarity::{score, MetricKind, Polarity};
    use proptest::prelude::*;

    fn pat(s: &str) -> BinaryPattern {
        BinaryPattern::from_bitstring(s.len(), 0, s).unwrap()
    }

    fn seg(start: usize, end: usize, label: ClassLabel) -> SegmentAnnotation {
        SegmentAnnotation::new(start, end)
            .unwrap()
            .with_label(label)
    }

    #[test]
    fn build_example() {
        let (p, q) = (pat("101"), pat("010"));
        let pats = vec![
            Some(p.clone()),
            Some(p.clone()),
            Some(q.clone()),
            Some(q.clone()),
        ];
        let anns = [
            seg(0, 2, ClassLabel::Consonant),
            seg(2, 4, ClassLabel::Vowel),
        ];
        let books = build_codebooks(&pats, &anns, Task::Cv, 3, 0).unwrap();
        assert_eq!(books.class_a.len(), 1);
        assert_eq!(books.class_a.count(&p), 2);
        assert_eq!(books.class_b.count(&q), 2);
        assert!(!books.class_a.contains(&q));
    }

    #[test]
    fn shared_pattern_lands_in_both_books() {
        let p = pat("11");
        let pats = vec![Some(p.clone()); 4];
        let anns = [
            seg(0, 1, ClassLabel::Consonant),
            seg(3, 4, ClassLabel::Vowel),
        ];
        let books = build_codebooks(&pats, &anns, Task::Cv, 2, 0).unwrap();
        assert!(books.class_a.contains(&p) && books.class_b.contains(&p));
        // frames 1 and 2 are outside every segment
        assert_eq!(books.total_count(), 2);
    }

    #[test]
    fn other_tasks_and_skipped_frames_ignored() {
        let pats = vec![Some(pat("1")), None, Some(pat("0"))];
        let anns = [
            seg(0, 2, ClassLabel::Stressed),
            seg(2, 3, ClassLabel::Vowel),
        ];
        let books = build_codebooks(&pats, &anns, Task::Stress, 1, 0).unwrap();
        assert_eq!(books.class_a.total_count(), 1);
        assert!(books.class_b.is_empty());
    }

    #[test]
    fn segment_beyond_frames_rejected() {
        let pats = vec![Some(pat("1")); 3];
        let anns = [seg(1, 5, ClassLabel::Consonant)];
        assert!(matches!(
            build_codebooks(&pats, &anns, Task::Cv, 1, 0),
            Err(Error::SegmentOutOfRange { .. })
        ));
    }

    #[test]
    fn insert_rejects_wrong_width() {
        let mut b = Codebook::new(ClassLabel::Vowel, 3, 1);
        assert!(b.insert(pat("101")).is_err());
        assert!(b.insert(BinaryPattern::zeros(3, 1)).is_ok());
    }

    #[test]
    fn match_examples() {
        let mut book = Codebook::new(ClassLabel::Consonant, 4, 0);
        book.insert(pat("1100")).unwrap();
        book.insert(pat("0011")).unwrap();
        let ip = Metric::new(MetricKind::InnerProduct);
        assert_eq!(match_score(&pat("0011"), &book, &ip).unwrap(), 4.0);

        let mut ones = Codebook::new(ClassLabel::Vowel, 4, 0);
        ones.insert(pat("1111")).unwrap();
        let jac = Metric::new(MetricKind::Jaccard);
        assert_eq!(match_score(&pat("0000"), &ones, &jac).unwrap(), 0.0);
    }

    #[test]
    fn match_errors() {
        let book = Codebook::new(ClassLabel::Vowel, 2, 0);
        let ip = Metric::default();
        assert!(matches!(
            match_score(&pat("10"), &book, &ip),
            Err(Error::EmptyCodebook(_))
        ));
        let mut book = book;
        book.insert(pat("10")).unwrap();
        assert!(matches!(
            match_score(&pat("100"), &book, &ip),
            Err(Error::WidthMismatch { .. })
        ));
    }

    #[test]
    fn sparsity_examples() {
        let s = sparsity_stats(&[pat("101")], 3).unwrap();
        assert_eq!((s.unique_count, s.total_count), (1, 1));
        assert_eq!(s.ratio_of_total, 1.0);
        assert_eq!(s.ratio_of_possible, 1.0 / 8.0);
        assert!(sparsity_stats(&[], 3).is_err());

        let wide = BinaryPattern::zeros(24, 6);
        let s = sparsity_stats(&[wide], 168).unwrap();
        assert!(s.possible_overflow);
        assert_eq!(s.ratio_of_possible, 0.0);
        assert!((s.log10_ratio_of_possible + 168.0 * 2f64.log10()).abs() < 1e-9);
    }

    #[test]
    fn pair_shape_checked() {
        let a = Codebook::new(ClassLabel::Stressed, 3, 0);
        let b = Codebook::new(ClassLabel::Unstressed, 3, 1);
        assert!(CodebookPair::from_books(a.clone(), b).is_err());
        let v = Codebook::new(ClassLabel::Vowel, 3, 0);
        assert!(CodebookPair::from_books(a, v).is_err());
    }

    fn brute_best(p: &BinaryPattern, book: &Codebook, metric: &Metric) -> f64 {
        let scores: Vec<f64> = book
            .patterns()
            .map(|q| score(metric, p, q).unwrap())
            .collect();
        match metric.polarity {
            Polarity::Maximize => scores.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Polarity::Minimize => scores.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }

    fn arb_case() -> impl Strategy<Value = (Vec<bool>, Vec<Vec<bool>>, usize, bool)> {
        (1usize..150).prop_flat_map(|w| {
            (
                prop::collection::vec(any::<bool>(), w),
                prop::collection::vec(prop::collection::vec(any::<bool>(), w), 1..50),
                0usize..6,
                any::<bool>(),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn match_equals_linear_scan((p, members, kind, flip) in arb_case()) {
            let w = p.len();
            let p = BinaryPattern::from_bools(w, 0, &p).unwrap();
            let mut book = Codebook::new(ClassLabel::Accented, w, 0);
            for m in &members {
                book.insert(BinaryPattern::from_bools(w, 0, m).unwrap()).unwrap();
            }
            let kind = MetricKind::ALL[kind];
            let pol = match (kind.default_polarity(), flip) {
                (pol, false) => pol,
                (Polarity::Maximize, true) => Polarity::Minimize,
                (Polarity::Minimize, true) => Polarity::Maximize,
            };
            let metric = Metric::with_polarity(kind, pol);
            prop_assert_eq!(match_score(&p, &book, &metric).unwrap(), brute_best(&p, &book, &metric));
            prop_assert_eq!(PackedBook::new(&book).best(&p, &metric), brute_best(&p, &book, &metric));
        }

        #[test]
        fn build_is_deterministic_and_conserves_counts(
            codes in prop::collection::vec(0u8..8, 1..60),
            cuts in prop::collection::vec(any::<bool>(), 60),
        ) {
            let pats: Vec<Option<BinaryPattern>> = codes
                .iter()
                .map(|&c| Some(BinaryPattern::from_bools(3, 0, &[c & 1 == 1, c & 2 == 2, c & 4 == 4]).unwrap()))
                .collect();
            // unit segments, every other frame labelled
            let anns: Vec<SegmentAnnotation> = (0..pats.len())
                .filter(|i| i % 2 == 0)
                .map(|i| seg(i, i + 1, if cuts[i] { ClassLabel::Consonant } else { ClassLabel::Vowel }))
                .collect();
            let b1 = build_codebooks(&pats, &anns, Task::Cv, 3, 0).unwrap();
            let b2 = build_codebooks(&pats, &anns, Task::Cv, 3, 0).unwrap();
            prop_assert_eq!(&b1, &b2);
            prop_assert_eq!(b1.total_count() as usize, anns.len());

            // adding frames never removes entries or lowers counts
            let mut more = b1.clone();
            more.add_utterance(&pats, &anns).unwrap();
            for (p, c) in b1.class_a.entries() {
                prop_assert!(more.class_a.count(p) >= c);
            }
        }
    }
}
