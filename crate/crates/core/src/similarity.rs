//! Binary similarity measures built on operational taxonomic units.
//!
//! For patterns `p` and `q` of equal width the four counts are
//! `a` (both set), `b` (`p` clear, `q` set), `c` (`p` set, `q` clear) and
//! `d` (both clear). Every measure here is a function of those counts only.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::BinaryPattern;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TaxonomicUnits {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub d: usize,
}

impl TaxonomicUnits {
    pub fn width(&self) -> usize {
        self.a + self.b + self.c + self.d
    }
}

pub fn taxonomic_units(p: &BinaryPattern, q: &BinaryPattern) -> Result<TaxonomicUnits> {
    if p.width() != q.width() {
        return Err(Error::WidthMismatch {
            left: p.width(),
            right: q.width(),
        });
    }
    Ok(units_unchecked(p, q))
}

#[inline]
fn units_unchecked(p: &BinaryPattern, q: &BinaryPattern) -> TaxonomicUnits {
    word_units(p.words(), q.words(), p.width())
}

/// Units of two equal-length word slices whose padding bits are zero.
pub(crate) fn word_units(p: &[u64], q: &[u64], width: usize) -> TaxonomicUnits {
    let (mut a, mut b, mut c) = (0usize, 0usize, 0usize);
    for (&x, &y) in p.iter().zip(q) {
        a += (x & y).count_ones() as usize;
        b += (!x & y).count_ones() as usize;
        c += (x & !y).count_ones() as usize;
    }
    TaxonomicUnits {
        a,
        b,
        c,
        d: width - a - b - c,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Jaccard,
    InnerProduct,
    Hamming,
    Ample,
    Simpson,
    Hellinger,
}

impl MetricKind {
    pub const ALL: [MetricKind; 6] = [
        MetricKind::Jaccard,
        MetricKind::InnerProduct,
        MetricKind::Hamming,
        MetricKind::Ample,
        MetricKind::Simpson,
        MetricKind::Hellinger,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Jaccard => "jaccard",
            MetricKind::InnerProduct => "innerproduct",
            MetricKind::Hamming => "hamming",
            MetricKind::Ample => "ample",
            MetricKind::Simpson => "simpson",
            MetricKind::Hellinger => "hellinger",
        }
    }

    /// Hellinger is zero at a perfect match and so is minimized; the rest
    /// are maximized as written.
    pub fn default_polarity(self) -> Polarity {
        match self {
            MetricKind::Hellinger => Polarity::Minimize,
            _ => Polarity::Maximize,
        }
    }

    /// Score from counts. Zero denominators resolve to: Jaccard 0,
    /// Simpson 0, Ample `+inf` (or 0 when the numerator is also 0),
    /// Hellinger 2.
    pub fn score_units(self, t: &TaxonomicUnits) -> f64 {
        let (a, b, c, d) = (t.a as f64, t.b as f64, t.c as f64, t.d as f64);
        match self {
            MetricKind::Jaccard => {
                let den = t.a + t.b + t.c;
                if den == 0 {
                    0.0
                } else {
                    a / den as f64
                }
            }
            MetricKind::InnerProduct => (t.a + t.d) as f64,
            MetricKind::Hamming => (t.b + t.c) as f64,
            MetricKind::Ample => {
                let num = t.a * (t.c + t.d);
                let den = t.c * (t.a + t.b);
                if den == 0 {
                    if num > 0 {
                        f64::INFINITY
                    } else {
                        0.0
                    }
                } else {
                    (a * (c + d)) / (c * (a + b))
                }
            }
            MetricKind::Simpson => {
                let den = (t.a + t.b).min(t.a + t.c);
                if den == 0 {
                    0.0
                } else {
                    a / den as f64
                }
            }
            MetricKind::Hellinger => {
                let prod = (t.a + t.b) * (t.a + t.c);
                if prod == 0 {
                    2.0
                } else {
                    let ratio = a / (prod as f64).sqrt();
                    2.0 * (1.0 - ratio).max(0.0).sqrt()
                }
            }
        }
    }

    /// The best score any pair of `width`-bit patterns can reach under
    /// `polarity`; a scan may stop once it is seen.
    fn attainable_bound(self, polarity: Polarity, width: usize) -> f64 {
        let w = width as f64;
        match (self, polarity) {
            (MetricKind::Jaccard | MetricKind::Simpson, Polarity::Maximize) => 1.0,
            (MetricKind::InnerProduct | MetricKind::Hamming, Polarity::Maximize) => w,
            (MetricKind::Ample, Polarity::Maximize) => f64::INFINITY,
            (MetricKind::Hellinger, Polarity::Maximize) => 2.0,
            (MetricKind::Hellinger, Polarity::Minimize) => 0.0,
            (_, Polarity::Minimize) => 0.0,
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preference {
    First,
    Second,
    Tie,
}

/// A similarity measure together with the direction that counts as better.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Metric {
    pub kind: MetricKind,
    pub polarity: Polarity,
}

impl Metric {
    pub fn new(kind: MetricKind) -> Self {
        Metric {
            kind,
            polarity: kind.default_polarity(),
        }
    }

    pub fn with_polarity(kind: MetricKind, polarity: Polarity) -> Self {
        Metric { kind, polarity }
    }

    pub fn score(&self, p: &BinaryPattern, q: &BinaryPattern) -> Result<f64> {
        score(self, p, q)
    }

    pub(crate) fn score_unchecked(&self, p: &BinaryPattern, q: &BinaryPattern) -> f64 {
        self.kind.score_units(&units_unchecked(p, q))
    }

    pub(crate) fn attainable_bound(&self, width: usize) -> f64 {
        self.kind.attainable_bound(self.polarity, width)
    }
}

impl Default for Metric {
    fn default() -> Self {
        Metric::new(MetricKind::InnerProduct)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pol = match self.polarity {
            Polarity::Maximize => "max",
            Polarity::Minimize => "min",
        };
        write!(f, "{}:{pol}", self.kind)
    }
}

impl FromStr for Metric {
    type Err = Error;

    /// `name` or `name:max` / `name:min`, case-insensitive.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let (name, pol) = match lower.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (lower.as_str(), None),
        };
        let kind = MetricKind::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| Error::Config(format!("unknown metric {name:?}")))?;
        let polarity = match pol {
            None => kind.default_polarity(),
            Some("max") => Polarity::Maximize,
            Some("min") => Polarity::Minimize,
            Some(other) => return Err(Error::Config(format!("unknown polarity {other:?}"))),
        };
        Ok(Metric { kind, polarity })
    }
}

pub fn score(metric: &Metric, p: &BinaryPattern, q: &BinaryPattern) -> Result<f64> {
    Ok(metric.kind.score_units(&taxonomic_units(p, q)?))
}

/// Compares two scores of the same metric. Equal scores, including two
/// infinite Ample sentinels, tie.
pub fn better(metric: &Metric, s1: f64, s2: f64) -> Preference {
    if s1 == s2 {
        return Preference::Tie;
    }
    let first_wins = match metric.polarity {
        Polarity::Maximize => s1 > s2,
        Polarity::Minimize => s1 < s2,
    };
    if first_wins {
        Preference::First
    } else {
        Preference::Second
    }
}
