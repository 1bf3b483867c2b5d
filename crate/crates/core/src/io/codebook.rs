//! `PHONOCBK` codebook files.
//!
//! ```text
//! PHONOCBK 1
//! K=3 context=0 task=cv class=C bit_order=anchor-first-right-context
//! 011 2
//! 101 3
//! ```
//!
//! The leftmost character of a bitstring is bit 0 (class 0 of the anchor
//! frame). Entries are written in lexicographic bitstring order.

use std::collections::HashSet;
use std::path::Path;

use super::{content_lines, keyed, keyed_usize, located, read_text, with_path, write_text};
use crate::codebook::Codebook;
use crate::error::{FormatErrorKind, Result};
use crate::model::{BinaryPattern, ClassLabel, Task};

const MAGIC: &str = "PHONOCBK";
pub const BIT_ORDER: &str = "anchor-first-right-context";

pub fn parse_codebook(text: &str) -> Result<Codebook> {
    let mut lines = content_lines(text);
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

    let (ln, header) = lines
        .next()
        .ok_or_else(|| located(ln + 1, FormatErrorKind::BadHeader("missing header".into())))?;
    let mut f = header.split(' ');
    let k = keyed_usize(ln, f.next(), "K")?;
    let context = keyed_usize(ln, f.next(), "context")?;
    let task_tok = keyed(ln, f.next(), "task")?;
    let task: Task = task_tok
        .parse()
        .map_err(|_| located(ln, FormatErrorKind::UnknownTask(task_tok.to_string())))?;
    let class_tok = keyed(ln, f.next(), "class")?;
    let class = ClassLabel::from_code(task, class_tok)
        .ok_or_else(|| located(ln, FormatErrorKind::UnknownLabel(class_tok.to_string())))?;
    let order = keyed(ln, f.next(), "bit_order")?;
    if order != BIT_ORDER {
        return Err(located(
            ln,
            FormatErrorKind::BadHeader(format!("unsupported bit order {order:?}")),
        ));
    }
    if f.next().is_some() {
        return Err(located(
            ln,
            FormatErrorKind::BadHeader("unexpected field".into()),
        ));
    }
    if k == 0 {
        return Err(located(
            ln,
            FormatErrorKind::BadHeader("K must be positive".into()),
        ));
    }

    let width = k * (1 + context);
    let mut book = Codebook::new(class, k, context);
    let mut seen = HashSet::new();
    for (ln, line) in lines {
        let (bits, count) = line
            .split_once(' ')
            .ok_or_else(|| located(ln, FormatErrorKind::BadNumber(line.to_string())))?;
        let found = bits.chars().count();
        if found != width {
            return Err(located(
                ln,
                FormatErrorKind::WidthMismatch {
                    expected: width,
                    found,
                },
            ));
        }
        if let Some(c) = bits.chars().find(|c| *c != '0' && *c != '1') {
            return Err(located(ln, FormatErrorKind::BadBit(c)));
        }
        let count: u64 = count
            .parse()
            .map_err(|_| located(ln, FormatErrorKind::BadNumber(count.to_string())))?;
        if count == 0 {
            return Err(located(ln, FormatErrorKind::ZeroCount));
        }
        if !seen.insert(bits.to_string()) {
            return Err(located(
                ln,
                FormatErrorKind::DuplicateEntry(bits.to_string()),
            ));
        }
        let pattern =
            BinaryPattern::from_bitstring(k, context, bits).expect("bits validated above");
        book.insert_count(pattern, count)?;
    }
    Ok(book)
}

pub fn format_codebook(book: &Codebook) -> String {
    let mut out = format!(
        "{MAGIC} 1\nK={} context={} task={} class={} bit_order={BIT_ORDER}\n",
        book.classes(),
        book.context(),
        book.task(),
        book.class().code()
    );
    let mut entries: Vec<(String, u64)> =
        book.entries().map(|(p, c)| (p.to_bitstring(), c)).collect();
    entries.sort();
    for (bits, count) in entries {
        out.push_str(&format!("{bits} {count}\n"));
    }
    out
}

pub fn read_codebook(path: &Path) -> Result<Codebook> {
    parse_codebook(&read_text(path)?).map_err(|e| with_path(e, path))
}

pub fn write_codebook(book: &Codebook, path: &Path) -> Result<()> {
    write_text(path, &format_codebook(book))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const HEAD: &str =
        "PHONOCBK 1\nK=3 context=0 task=cv class=C bit_order=anchor-first-right-context\n";

    #[test]
    fn writes_entry_lines() {
        let mut b = Codebook::new(ClassLabel::Consonant, 3, 0);
        b.insert_count(BinaryPattern::from_bitstring(3, 0, "101").unwrap(), 3)
            .unwrap();
        let text = format_codebook(&b);
        assert_eq!(text, format!("{HEAD}101 3\n"));
        assert_eq!(parse_codebook(&text).unwrap(), b);
    }

    #[test]
    fn entries_sorted_lexicographically() {
        let mut b = Codebook::new(ClassLabel::Consonant, 3, 0);
        for s in ["110", "001", "100", "011"] {
            b.insert(BinaryPattern::from_bitstring(3, 0, s).unwrap())
                .unwrap();
        }
        let text = format_codebook(&b);
        let body: Vec<&str> = text.lines().skip(2).collect();
        assert_eq!(body, ["001 1", "011 1", "100 1", "110 1"]);
    }

    fn err(body: &str) -> (usize, FormatErrorKind) {
        let e = parse_codebook(&format!("{HEAD}{body}")).unwrap_err();
        (e.line().unwrap(), e.format_kind().unwrap().clone())
    }

    #[test]
    fn errors_are_located() {
        assert!(matches!(
            err("101 3\n101 1\n"),
            (4, FormatErrorKind::DuplicateEntry(_))
        ));
        assert!(matches!(
            err("1010 1\n"),
            (3, FormatErrorKind::WidthMismatch { .. })
        ));
        assert!(matches!(err("101 0\n"), (3, FormatErrorKind::ZeroCount)));
        assert!(matches!(err("1x1 2\n"), (3, FormatErrorKind::BadBit('x'))));
        assert!(matches!(
            err("101 -2\n"),
            (3, FormatErrorKind::BadNumber(_))
        ));
        let e = parse_codebook(
            "PHONOCBK 1\nK=3 context=0 task=cv class=1 bit_order=anchor-first-right-context\n",
        )
        .unwrap_err();
        assert!(matches!(
            e.format_kind(),
            Some(FormatErrorKind::UnknownLabel(_))
        ));
        let e = parse_codebook("PHONOCBK 1\nK=3 context=0 task=cv class=C bit_order=msb\n")
            .unwrap_err();
        assert_eq!(e.line(), Some(2));
    }

    proptest! {
        #[test]
        fn round_trip(
            (k, ctx, entries) in (1usize..6, 0usize..4).prop_flat_map(|(k, ctx)| {
                let w = k * (1 + ctx);
                (Just(k), Just(ctx), prop::collection::vec(
                    (prop::collection::vec(any::<bool>(), w), 1u64..1000), 0..30))
            }),
            stressed in any::<bool>(),
        ) {
            let class = if stressed { ClassLabel::Stressed } else { ClassLabel::Unstressed };
            let mut b = Codebook::new(class, k, ctx);
            for (bits, c) in entries {
                b.insert_count(BinaryPattern::from_bools(k, ctx, &bits).unwrap(), c).unwrap();
            }
            let text = format_codebook(&b);
            let back = parse_codebook(&text).unwrap();
            prop_assert_eq!(&back, &b);
            prop_assert_eq!(format_codebook(&back), text);
        }
    }
}
