//! Line-oriented text formats for posteriors, segment labels, codebooks,
//! and JSON evaluation reports.
//!
//! All formats are UTF-8, LF-terminated, single-space separated. Every
//! reader reports the 1-based line of the first problem it finds.

mod codebook;
mod labels;
mod posteriors;

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, FormatErrorKind, Result};

pub use codebook::{format_codebook, parse_codebook, read_codebook, write_codebook, BIT_ORDER};
pub use labels::{format_labels, parse_labels, read_labels, write_labels};
pub use posteriors::{format_posteriors, parse_posteriors, read_posteriors, write_posteriors};

pub(crate) fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn located(line: usize, kind: FormatErrorKind) -> Error {
    Error::Format {
        path: None,
        line,
        kind,
    }
}

pub(crate) fn with_path(err: Error, path: &Path) -> Error {
    match err {
        Error::Format { line, kind, .. } => Error::Format {
            path: Some(path.to_path_buf()),
            line,
            kind,
        },
        other => other,
    }
}

/// Lines with their 1-based numbers, skipping blanks and `#` comments.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
}

/// Parses `key=value` and checks the key.
pub(crate) fn keyed<'a>(line: usize, token: Option<&'a str>, key: &str) -> Result<&'a str> {
    token
        .and_then(|t| t.strip_prefix(key))
        .and_then(|t| t.strip_prefix('='))
        .ok_or_else(|| {
            located(
                line,
                FormatErrorKind::BadHeader(format!("expected {key}=<value>")),
            )
        })
}

pub(crate) fn keyed_usize(line: usize, token: Option<&str>, key: &str) -> Result<usize> {
    let v = keyed(line, token, key)?;
    v.parse().map_err(|_| {
        located(
            line,
            FormatErrorKind::BadHeader(format!("{key}={v} is not an integer")),
        )
    })
}

/// Pretty JSON with a trailing newline; field order follows the type.
pub fn format_report<T: Serialize>(report: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

pub fn write_report<T: Serialize>(report: &T, path: &Path) -> Result<()> {
    write_text(path, &format_report(report)?)
}
