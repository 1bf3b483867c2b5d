//! Straight-line reference implementation of the parsing pipeline.
//!
//! Everything here works on `Vec<bool>` with per-bit loops and exhaustive
//! scans, sharing no arithmetic with the optimized path. It exists to be
//! compared against.

use crate::codebook::{Codebook, CodebookPair};
use crate::error::{Error, Result};
use crate::model::{ClassDecision, PosteriorSequence, SegmentAnnotation};
use crate::parser::{ParseConfig, SegmentResult, Votes};
use crate::quantize::BoundaryPolicy;
use crate::similarity::{MetricKind, Polarity};

/// (a, b, c, d) counted bit by bit.
pub fn reference_units(p: &[bool], q: &[bool]) -> (usize, usize, usize, usize) {
    assert_eq!(p.len(), q.len());
    let (mut a, mut b, mut c, mut d) = (0, 0, 0, 0);
    for i in 0..p.len() {
        match (p[i], q[i]) {
            (true, true) => a += 1,
            (false, true) => b += 1,
            (true, false) => c += 1,
            (false, false) => d += 1,
        }
    }
    (a, b, c, d)
}

pub fn reference_score(kind: MetricKind, p: &[bool], q: &[bool]) -> f64 {
    let (a, b, c, d) = reference_units(p, q);
    let (a, b, c, d) = (a as f64, b as f64, c as f64, d as f64);
    match kind {
        MetricKind::Jaccard => {
            if a + b + c == 0.0 {
                0.0
            } else {
                a / (a + b + c)
            }
        }
        MetricKind::InnerProduct => a + d,
        MetricKind::Hamming => b + c,
        MetricKind::Ample => {
            let num = a * (c + d);
            let den = c * (a + b);
            if den == 0.0 {
                if num > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            } else {
                num / den
            }
        }
        MetricKind::Simpson => {
            let den = if a + b < a + c { a + b } else { a + c };
            if den == 0.0 {
                0.0
            } else {
                a / den
            }
        }
        MetricKind::Hellinger => {
            let prod = (a + b) * (a + c);
            if prod == 0.0 {
                2.0
            } else {
                let inner = 1.0 - a / prod.sqrt();
                2.0 * if inner < 0.0 { 0.0 } else { inner }.sqrt()
            }
        }
    }
}

fn to_bools(book: &Codebook) -> Vec<Vec<bool>> {
    book.patterns()
        .map(|p| (0..p.width()).map(|i| p.get(i)).collect())
        .collect()
}

fn best(kind: MetricKind, polarity: Polarity, x: &[bool], book: &[Vec<bool>]) -> f64 {
    let mut best: Option<f64> = None;
    for member in book {
        let s = reference_score(kind, x, member);
        best = Some(match best {
            None => s,
            Some(b) => match polarity {
                Polarity::Maximize => {
                    if s > b {
                        s
                    } else {
                        b
                    }
                }
                Polarity::Minimize => {
                    if s < b {
                        s
                    } else {
                        b
                    }
                }
            },
        });
    }
    best.expect("non-empty book")
}

/// Same semantics as [`crate::parser::parse_utterance`].
pub fn oracle_parse(
    seq: &PosteriorSequence,
    annotations: &[SegmentAnnotation],
    books: &CodebookPair,
    cfg: &ParseConfig,
) -> Result<Vec<SegmentResult>> {
    let n = seq.len();
    let k = seq.classes();
    let ctx = cfg.quantize.context;
    if books.classes() != k || books.context() != ctx || books.task() != cfg.books_task() {
        return Err(Error::Config(
            "codebooks do not fit the configuration".into(),
        ));
    }
    if books.class_a.is_empty() || books.class_b.is_empty() {
        return Err(Error::EmptyCodebook("oracle".into()));
    }
    for seg in annotations {
        if seg.end > n {
            return Err(Error::SegmentOutOfRange {
                start: seg.start,
                end: seg.end,
                frames: n,
            });
        }
    }

    let mut first: Vec<Vec<bool>> = Vec::new();
    for frame in seq.frames() {
        let mut row = Vec::new();
        for &p in frame.probs() {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config("posterior out of range".into()));
            }
            row.push(p >= cfg.quantize.threshold);
        }
        first.push(row);
    }

    let mut high: Vec<Option<Vec<bool>>> = Vec::new();
    for t in 0..n {
        if t + ctx >= n && cfg.quantize.boundary_policy == BoundaryPolicy::Skip {
            high.push(None);
            continue;
        }
        let mut v = Vec::new();
        for j in 0..=ctx {
            let src = if t + j < n { t + j } else { n - 1 };
            v.extend_from_slice(&first[src][..k]);
        }
        high.push(Some(v));
    }

    let book_a = to_bools(&books.class_a);
    let book_b = to_bools(&books.class_b);
    let kind = cfg.metric.kind;
    let pol = cfg.metric.polarity;

    let mut out = Vec::new();
    for seg in annotations {
        let mut votes = Votes::default();
        for x in high[seg.start..seg.end].iter().flatten() {
            let sa = best(kind, pol, x, &book_a);
            let sb = best(kind, pol, x, &book_b);
            let a_wins = match pol {
                Polarity::Maximize => sa > sb,
                Polarity::Minimize => sa < sb,
            };
            let b_wins = match pol {
                Polarity::Maximize => sb > sa,
                Polarity::Minimize => sb < sa,
            };
            if a_wins {
                votes.class_a += 1;
            } else if b_wins {
                votes.class_b += 1;
            } else {
                votes.unlabeled += 1;
            }
        }
        let decision = if votes.class_a > votes.class_b {
            ClassDecision::ClassA
        } else if votes.class_b > votes.class_a {
            ClassDecision::ClassB
        } else {
            ClassDecision::Unlabeled
        };
        out.push(SegmentResult {
            segment: seg.clone(),
            decision,
            votes,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Task;

    #[test]
    fn empty_annotations_give_empty_result() {
        let seq = PosteriorSequence::from_rows(vec![vec![0.9, 0.1]]);
        let mut books = CodebookPair::new(Task::Cv, 2, 0);
        books
            .class_a
            .insert(crate::model::BinaryPattern::from_bitstring(2, 0, "10").unwrap())
            .unwrap();
        books
            .class_b
            .insert(crate::model::BinaryPattern::from_bitstring(2, 0, "01").unwrap())
            .unwrap();
        let out = oracle_parse(&seq, &[], &books, &ParseConfig::new(Task::Cv)).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn reference_units_by_hand() {
        let p = [true, true, false];
        let q = [true, false, false];
        assert_eq!(reference_units(&p, &q), (1, 0, 1, 1));
        assert_eq!(reference_score(MetricKind::Ample, &p, &q), 2.0);
    }
}
