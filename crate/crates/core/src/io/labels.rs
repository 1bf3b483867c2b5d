//! Segment label files: `<start> <end> <task>=<label> ...` per line.
//!
//! `start` is inclusive and `end` exclusive, both frame indices. Labels are
//! `cv=C|V`, `stress=1|0`, `accent=1|0`. Lines starting with `#` are comments.

use std::collections::BTreeMap;
use std::path::Path;

use super::{content_lines, located, read_text, with_path, write_text};
use crate::error::{FormatErrorKind, Result};
use crate::model::{ClassLabel, SegmentAnnotation, Task};

/// Parses and validates a label file; `frames` bounds the segment ends when given.
pub fn parse_labels(text: &str, frames: Option<usize>) -> Result<Vec<SegmentAnnotation>> {
    let mut out = Vec::new();
    let mut line_of = Vec::new();
    for (ln, line) in content_lines(text) {
        let mut tokens = line.split(' ');
        let start = parse_index(ln, tokens.next())?;
        let end = parse_index(ln, tokens.next())?;
        if start >= end {
            return Err(located(ln, FormatErrorKind::ReversedRange { start, end }));
        }
        if let Some(n) = frames {
            if end > n {
                return Err(located(
                    ln,
                    FormatErrorKind::BeyondSequence { end, frames: n },
                ));
            }
        }
        let mut seg = SegmentAnnotation::new(start, end).expect("range checked above");
        let mut any = false;
        for tok in tokens {
            let (task, label) = tok
                .split_once('=')
                .ok_or_else(|| located(ln, FormatErrorKind::UnknownLabel(tok.to_string())))?;
            let task: Task = task
                .parse()
                .map_err(|_| located(ln, FormatErrorKind::UnknownTask(task.to_string())))?;
            let label = ClassLabel::from_code(task, label)
                .ok_or_else(|| located(ln, FormatErrorKind::UnknownLabel(tok.to_string())))?;
            if seg.label(task).is_some() {
                return Err(located(
                    ln,
                    FormatErrorKind::DuplicateEntry(task.to_string()),
                ));
            }
            seg.set_label(label);
            any = true;
        }
        if !any {
            return Err(located(
                ln,
                FormatErrorKind::BadHeader("segment line without task=label fields".into()),
            ));
        }
        out.push(seg);
        line_of.push(ln);
    }

    for task in Task::ALL {
        let mut tier: Vec<usize> = (0..out.len())
            .filter(|&i| out[i].label(task).is_some())
            .collect();
        tier.sort_by_key(|&i| (out[i].start, out[i].end, line_of[i]));
        for w in tier.windows(2) {
            let (prev, next) = (w[0], w[1]);
            if out[next].start < out[prev].end {
                let (earlier, later) = if line_of[prev] < line_of[next] {
                    (prev, next)
                } else {
                    (next, prev)
                };
                return Err(located(
                    line_of[later],
                    FormatErrorKind::Overlap {
                        task,
                        previous_line: line_of[earlier],
                    },
                ));
            }
        }
    }
    Ok(out)
}

fn parse_index(line: usize, token: Option<&str>) -> Result<usize> {
    let tok = token.unwrap_or("");
    tok.parse()
        .map_err(|_| located(line, FormatErrorKind::BadNumber(tok.to_string())))
}

/// One line per segment in the given order, labels in task order.
pub fn format_labels(annotations: &[SegmentAnnotation]) -> String {
    let mut out = String::new();
    for seg in annotations {
        let labels: BTreeMap<Task, ClassLabel> = seg.labels().map(|l| (l.task(), l)).collect();
        out.push_str(&format!("{} {}", seg.start, seg.end));
        for (task, label) in labels {
            out.push_str(&format!(" {task}={}", label.code()));
        }
        out.push('\n');
    }
    out
}

pub fn read_labels(path: &Path, frames: Option<usize>) -> Result<Vec<SegmentAnnotation>> {
    parse_labels(&read_text(path)?, frames).map_err(|e| with_path(e, path))
}

pub fn write_labels(annotations: &[SegmentAnnotation], path: &Path) -> Result<()> {
    write_text(path, &format_labels(annotations))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn err(text: &str, frames: Option<usize>) -> (usize, FormatErrorKind) {
        let e = parse_labels(text, frames).unwrap_err();
        (e.line().unwrap(), e.format_kind().unwrap().clone())
    }

    #[test]
    fn single_segment() {
        let s = parse_labels("0 12 cv=C\n", None).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!((s[0].start, s[0].end), (0, 12));
        assert_eq!(s[0].label(Task::Cv), Some(ClassLabel::Consonant));
    }

    #[test]
    fn multi_label_lines_and_comments() {
        let text = "# header\n0 4 cv=V stress=1 accent=0\n\n4 9 accent=1\n";
        let s = parse_labels(text, Some(9)).unwrap();
        assert_eq!(s[0].label(Task::Stress), Some(ClassLabel::Stressed));
        assert_eq!(s[1].label(Task::Accent), Some(ClassLabel::Accented));
        assert_eq!(
            format_labels(&s),
            "0 4 cv=V stress=1 accent=0\n4 9 accent=1\n"
        );
    }

    #[test]
    fn errors_are_located() {
        assert!(matches!(
            err("5 3 stress=1\n", None),
            (1, FormatErrorKind::ReversedRange { start: 5, end: 3 })
        ));
        assert!(matches!(
            err("0 5 stress=1\n3 8 stress=0\n", None),
            (
                2,
                FormatErrorKind::Overlap {
                    task: Task::Stress,
                    previous_line: 1
                }
            )
        ));
        // overlap across tiers is fine, lines out of order still caught
        assert!(parse_labels("0 5 stress=1\n3 8 cv=C\n", None).is_ok());
        assert!(matches!(
            err("6 9 cv=C\n0 7 cv=V\n", None),
            (
                2,
                FormatErrorKind::Overlap {
                    previous_line: 1,
                    ..
                }
            )
        ));
        assert!(matches!(
            err("0 5 tone=H\n", None),
            (1, FormatErrorKind::UnknownTask(_))
        ));
        assert!(matches!(
            err("0 5 cv=X\n", None),
            (1, FormatErrorKind::UnknownLabel(_))
        ));
        assert!(matches!(
            err("0 5 cv=C\n5 12 cv=V\n", Some(10)),
            (
                2,
                FormatErrorKind::BeyondSequence {
                    end: 12,
                    frames: 10
                }
            )
        ));
        assert!(matches!(
            err("0 x cv=C\n", None),
            (1, FormatErrorKind::BadNumber(_))
        ));
        assert!(matches!(
            err("0 3\n", None),
            (1, FormatErrorKind::BadHeader(_))
        ));
    }
}
