//! `PHONOPOST` posterior files.
//!
//! ```text
//! PHONOPOST 1
//! K=3 N=2
//! classes vocalic consonantal nasal     (optional)
//! frame_rate_hz=100                     (optional)
//! 0.9 0.1 0.02
//! 0.85 0.2 0
//! ```

use std::path::Path;

use super::{content_lines, keyed, keyed_usize, located, read_text, with_path, write_text};
use crate::error::{Error, FormatErrorKind, Result};
use crate::model::{validate_sequence, PosteriorSequence};

const MAGIC: &str = "PHONOPOST";

pub fn parse_posteriors(text: &str) -> Result<PosteriorSequence> {
    let mut lines = content_lines(text).peekable();

    let (ln, magic) = lines
        .next()
        .ok_or_else(|| located(1, FormatErrorKind::BadMagic { expected: MAGIC }))?;
    let mut parts = magic.split(' ');
    if parts.next() != Some(MAGIC) {
        return Err(located(ln, FormatErrorKind::BadMagic { expected: MAGIC }));
    }
    match parts.next() {
        Some("1") if parts.next().is_none() => {}
        other => {
            return Err(located(
                ln,
                FormatErrorKind::UnsupportedVersion(other.unwrap_or("").to_string()),
            ))
        }
    }

    let (ln, header) = lines.next().ok_or_else(|| {
        located(
            ln + 1,
            FormatErrorKind::BadHeader("missing K=/N= line".into()),
        )
    })?;
    let mut fields = header.split(' ');
    let k = keyed_usize(ln, fields.next(), "K")?;
    let n = keyed_usize(ln, fields.next(), "N")?;
    if fields.next().is_some() {
        return Err(located(
            ln,
            FormatErrorKind::BadHeader("unexpected field".into()),
        ));
    }
    if k == 0 || n == 0 {
        return Err(located(
            ln,
            FormatErrorKind::BadHeader("K and N must be positive".into()),
        ));
    }
    let mut last_line = ln;

    let mut class_names = None;
    let mut frame_rate = None;
    while let Some(&(ln, line)) = lines.peek() {
        if let Some(rest) = line.strip_prefix("classes ") {
            let names: Vec<String> = rest.split(' ').map(str::to_string).collect();
            if names.len() != k || names.iter().any(|s| s.is_empty()) {
                return Err(located(
                    ln,
                    FormatErrorKind::BadHeader(format!("expected {k} class names")),
                ));
            }
            class_names = Some(names);
        } else if line.starts_with("frame_rate_hz") {
            let v = keyed(ln, Some(line), "frame_rate_hz")?;
            let hz: f64 = v
                .parse()
                .map_err(|_| located(ln, FormatErrorKind::BadNumber(v.to_string())))?;
            if !(hz.is_finite() && hz > 0.0) {
                return Err(located(
                    ln,
                    FormatErrorKind::BadHeader("frame rate must be positive".into()),
                ));
            }
            frame_rate = Some(hz);
        } else {
            break;
        }
        last_line = ln;
        lines.next();
    }

    let mut rows = Vec::with_capacity(n);
    for (ln, line) in lines {
        if rows.len() == n {
            return Err(located(ln, FormatErrorKind::TrailingData));
        }
        let tokens: Vec<&str> = line.split(' ').collect();
        if tokens.len() != k {
            return Err(located(
                ln,
                FormatErrorKind::RaggedRow {
                    expected: k,
                    found: tokens.len(),
                },
            ));
        }
        let mut row = Vec::with_capacity(k);
        for tok in tokens {
            let v: f64 = tok
                .parse()
                .map_err(|_| located(ln, FormatErrorKind::BadNumber(tok.to_string())))?;
            if !v.is_finite() {
                return Err(located(ln, FormatErrorKind::BadNumber(tok.to_string())));
            }
            if !(0.0..=1.0).contains(&v) {
                return Err(located(ln, FormatErrorKind::OutOfRange(tok.to_string())));
            }
            row.push(v);
        }
        rows.push(row);
        last_line = ln;
    }
    if rows.len() < n {
        return Err(located(
            last_line + 1,
            FormatErrorKind::Truncated {
                expected: n,
                found: rows.len(),
            },
        ));
    }

    let mut seq = PosteriorSequence::from_rows(rows);
    if let Some(names) = class_names {
        seq = seq.with_class_names(names);
    }
    if let Some(hz) = frame_rate {
        seq = seq.with_frame_rate(hz);
    }
    Ok(seq)
}

/// Canonical text; values use the shortest representation that reads back
/// to the same `f64`.
pub fn format_posteriors(seq: &PosteriorSequence) -> Result<String> {
    let violations = validate_sequence(seq);
    if !violations.is_empty() {
        return Err(Error::InvalidPosteriors(violations));
    }
    let mut out = format!("{MAGIC} 1\nK={} N={}\n", seq.classes(), seq.len());
    if let Some(names) = seq.class_names() {
        out.push_str("classes ");
        out.push_str(&names.join(" "));
        out.push('\n');
    }
    if let Some(hz) = seq.frame_rate_hz() {
        out.push_str(&format!("frame_rate_hz={hz}\n"));
    }
    for frame in seq.frames() {
        let row: Vec<String> = frame.probs().iter().map(|v| format!("{v}")).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    Ok(out)
}

pub fn read_posteriors(path: &Path) -> Result<PosteriorSequence> {
    parse_posteriors(&read_text(path)?).map_err(|e| with_path(e, path))
}

pub fn write_posteriors(seq: &PosteriorSequence, path: &Path) -> Result<()> {
    write_text(path, &format_posteriors(seq)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn kind(text: &str) -> (usize, FormatErrorKind) {
        let e = parse_posteriors(text).unwrap_err();
        (e.line().unwrap(), e.format_kind().unwrap().clone())
    }

    #[test]
    fn minimal_file() {
        let s = parse_posteriors("PHONOPOST 1\nK=2 N=1\n0.9 0.1\n").unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.frames()[0].probs(), &[0.9, 0.1]);
    }

    #[test]
    fn metadata_lines() {
        let text = "PHONOPOST 1\nK=2 N=1\nclasses voc cons\nframe_rate_hz=100\n0.9 0.1\n";
        let s = parse_posteriors(text).unwrap();
        assert_eq!(s.class_names().unwrap(), ["voc", "cons"]);
        assert_eq!(s.frame_rate_hz(), Some(100.0));
        assert_eq!(format_posteriors(&s).unwrap(), text);
    }

    #[test]
    fn located_errors() {
        assert!(matches!(
            kind("PHONOCBK 1\n"),
            (1, FormatErrorKind::BadMagic { .. })
        ));
        assert!(matches!(
            kind("PHONOPOST 2\nK=1 N=1\n0\n"),
            (1, FormatErrorKind::UnsupportedVersion(_))
        ));
        assert!(matches!(
            kind("PHONOPOST 1\nK=2 N=2\n0.1 0.2\n1.5 0.1\n"),
            (4, FormatErrorKind::OutOfRange(_))
        ));
        assert!(matches!(
            kind("PHONOPOST 1\nK=2 N=2\n0.1 0.2\n0.1\n"),
            (
                4,
                FormatErrorKind::RaggedRow {
                    expected: 2,
                    found: 1
                }
            )
        ));
        assert!(matches!(
            kind("PHONOPOST 1\nK=2 N=3\n0.1 0.2\n0.1 0.3\n"),
            (
                5,
                FormatErrorKind::Truncated {
                    expected: 3,
                    found: 2
                }
            )
        ));
        assert!(matches!(
            kind("PHONOPOST 1\nK=1 N=1\n0.1\n0.2\n"),
            (4, FormatErrorKind::TrailingData)
        ));
        assert!(matches!(
            kind("PHONOPOST 1\nK=1 N=1\nnan\n"),
            (3, FormatErrorKind::BadNumber(_))
        ));
        assert!(matches!(
            kind("PHONOPOST 1\nK=x N=1\n0\n"),
            (2, FormatErrorKind::BadHeader(_))
        ));
    }

    #[test]
    fn writing_twice_is_byte_identical() {
        let s = PosteriorSequence::from_rows(vec![vec![0.1, 1.0 / 3.0], vec![0.0, 1.0]]);
        assert_eq!(
            format_posteriors(&s).unwrap(),
            format_posteriors(&s).unwrap()
        );
    }

    proptest! {
        #[test]
        fn round_trip(rows in (1usize..6).prop_flat_map(|k|
            prop::collection::vec(prop::collection::vec(0.0f64..=1.0, k), 1..20)))
        {
            let s = PosteriorSequence::from_rows(rows);
            let text = format_posteriors(&s).unwrap();
            let back = parse_posteriors(&text).unwrap();
            prop_assert_eq!(&back, &s);
            prop_assert_eq!(format_posteriors(&back).unwrap(), text);
        }
    }
}
