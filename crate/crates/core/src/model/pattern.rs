use std::fmt;

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

/// Fixed-width bit vector of active phonological classes.
///
/// Bit `k + j * classes` holds class `k` of the frame `j` positions to the
/// right of the anchor frame (`j = 0` is the anchor). Bits beyond `width` in
/// the last storage word are always zero, so population counts over whole
/// words are exact.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BinaryPattern {
    words: Vec<u64>,
    classes: usize,
    context: usize,
}

impl BinaryPattern {
    /// All-zero pattern of width `classes * (1 + context)`.
    pub fn zeros(classes: usize, context: usize) -> Self {
        assert!(classes > 0, "a pattern needs at least one class");
        let width = classes * (1 + context);
        BinaryPattern {
            words: vec![0; width.div_ceil(WORD_BITS)],
            classes,
            context,
        }
    }

    pub fn from_bools(classes: usize, context: usize, bits: &[bool]) -> Result<Self> {
        let mut p = Self::zeros(classes, context);
        if bits.len() != p.width() {
            return Err(Error::WidthMismatch {
                left: p.width(),
                right: bits.len(),
            });
        }
        for (i, &b) in bits.iter().enumerate() {
            if b {
                p.set(i);
            }
        }
        Ok(p)
    }

    /// Parses a `0`/`1` string; the leftmost character is bit 0.
    pub fn from_bitstring(classes: usize, context: usize, s: &str) -> Result<Self> {
        let mut p = Self::zeros(classes, context);
        let n = s.chars().count();
        if n != p.width() {
            return Err(Error::WidthMismatch {
                left: p.width(),
                right: n,
            });
        }
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => p.set(i),
                other => {
                    return Err(Error::Config(format!("invalid bit character {other:?}")));
                }
            }
        }
        Ok(p)
    }

    pub fn to_bitstring(&self) -> String {
        (0..self.width())
            .map(|i| if self.get(i) { '1' } else { '0' })
            .collect()
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.classes * (1 + self.context)
    }

    /// Number of classes per frame (K).
    #[inline]
    pub fn classes(&self) -> usize {
        self.classes
    }

    #[inline]
    pub fn context(&self) -> usize {
        self.context
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.width(), "bit {i} out of width {}", self.width());
        self.words[i / WORD_BITS] >> (i % WORD_BITS) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize) {
        assert!(i < self.width(), "bit {i} out of width {}", self.width());
        self.words[i / WORD_BITS] |= 1 << (i % WORD_BITS);
    }

    #[inline]
    pub fn clear(&mut self, i: usize) {
        assert!(i < self.width(), "bit {i} out of width {}", self.width());
        self.words[i / WORD_BITS] &= !(1 << (i % WORD_BITS));
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Indices of set bits, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let tz = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * WORD_BITS + tz)
            })
        })
    }

    /// Concatenates first-order patterns, first one as anchor.
    pub fn concat(parts: &[&BinaryPattern]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::Config("nothing to concatenate".into()))?;
        let classes = first.classes;
        let mut out = Self::zeros(classes, parts.len() - 1);
        for (j, part) in parts.iter().enumerate() {
            if part.context != 0 {
                return Err(Error::NotFirstOrder(part.context));
            }
            if part.classes != classes {
                return Err(Error::WidthMismatch {
                    left: classes,
                    right: part.classes,
                });
            }
            for i in part.ones() {
                out.set(j * classes + i);
            }
        }
        Ok(out)
    }

    /// The first-order pattern of frame `j` within this pattern.
    pub fn frame(&self, j: usize) -> BinaryPattern {
        assert!(j <= self.context);
        let mut out = Self::zeros(self.classes, 0);
        for k in 0..self.classes {
            if self.get(j * self.classes + k) {
                out.set(k);
            }
        }
        out
    }
}

impl fmt::Debug for BinaryPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "BinaryPattern(k={}, ctx={}, {})",
            self.classes,
            self.context,
            self.to_bitstring()
        )
    }
}

impl fmt::Display for BinaryPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bitstring())
    }
}
