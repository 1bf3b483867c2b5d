//! Posterior binarization and right-context concatenation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    frame_violations, validate_sequence, BinaryPattern, PosteriorFrame, PosteriorSequence,
    Violation,
};

/// How anchors near the end of an utterance get their right context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryPolicy {
    /// Repeat the final frame to fill the window.
    #[default]
    Clamp,
    /// Produce no pattern for anchors whose window runs past the end.
    Skip,
}

impl FromStr for BoundaryPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "clamp" => Ok(BoundaryPolicy::Clamp),
            "skip" => Ok(BoundaryPolicy::Skip),
            _ => Err(Error::Config(format!("unknown boundary policy {s:?}"))),
        }
    }
}

impl fmt::Display for BoundaryPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryPolicy::Clamp => "clamp",
            BoundaryPolicy::Skip => "skip",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantizeConfig {
    pub threshold: f64,
    /// Number of right neighbours appended to each anchor frame.
    pub context: usize,
    pub boundary_policy: BoundaryPolicy,
}

impl Default for QuantizeConfig {
    fn default() -> Self {
        QuantizeConfig {
            threshold: 0.5,
            context: 0,
            boundary_policy: BoundaryPolicy::Clamp,
        }
    }
}

impl QuantizeConfig {
    pub fn with_context(mut self, context: usize) -> Self {
        self.context = context;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.threshold > 0.0 && self.threshold < 1.0 {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "threshold {} must lie strictly inside (0, 1)",
                self.threshold
            )))
        }
    }
}

/// Bit `k` is set iff `probs[k] >= threshold`.
pub fn binarize_frame(frame: &PosteriorFrame, cfg: &QuantizeConfig) -> Result<BinaryPattern> {
    cfg.validate()?;
    let bad: Vec<Violation> = frame_violations(frame)
        .map(|(c, rule)| Violation {
            frame: None,
            class: Some(c),
            rule,
        })
        .collect();
    if !bad.is_empty() {
        return Err(Error::InvalidPosteriors(bad));
    }
    if frame.is_empty() {
        return Err(Error::Config("frame has no classes".into()));
    }
    Ok(threshold_frame(frame, cfg.threshold))
}

fn threshold_frame(frame: &PosteriorFrame, threshold: f64) -> BinaryPattern {
    let mut p = BinaryPattern::zeros(frame.len(), 0);
    for (k, &prob) in frame.probs().iter().enumerate() {
        if prob >= threshold {
            p.set(k);
        }
    }
    p
}

/// First-order patterns for every frame, in order.
pub fn binarize_sequence(
    seq: &PosteriorSequence,
    cfg: &QuantizeConfig,
) -> Result<Vec<BinaryPattern>> {
    cfg.validate()?;
    let violations = validate_sequence(seq);
    if !violations.is_empty() {
        return Err(Error::InvalidPosteriors(violations));
    }
    Ok(seq
        .frames()
        .iter()
        .map(|f| threshold_frame(f, cfg.threshold))
        .collect())
}

/// High-order pattern anchored at `index`, or `None` when the window runs
/// off the end under [`BoundaryPolicy::Skip`].
pub fn concat_context(
    patterns: &[BinaryPattern],
    index: usize,
    cfg: &QuantizeConfig,
) -> Result<Option<BinaryPattern>> {
    let anchor = patterns.get(index).ok_or_else(|| {
        Error::Config(format!(
            "anchor {index} outside a sequence of {} patterns",
            patterns.len()
        ))
    })?;
    if anchor.context() != 0 {
        return Err(Error::NotFirstOrder(anchor.context()));
    }
    let last = patterns.len() - 1;
    if index + cfg.context > last && cfg.boundary_policy == BoundaryPolicy::Skip {
        return Ok(None);
    }
    let window: Vec<&BinaryPattern> = (0..=cfg.context)
        .map(|j| &patterns[(index + j).min(last)])
        .collect();
    BinaryPattern::concat(&window).map(Some)
}

/// [`concat_context`] for every anchor.
pub fn high_order_patterns(
    patterns: &[BinaryPattern],
    cfg: &QuantizeConfig,
) -> Result<Vec<Option<BinaryPattern>>> {
    (0..patterns.len())
        .map(|i| concat_context(patterns, i, cfg))
        .collect()
}

/// Binarize and concatenate in one pass.
pub fn sequence_patterns(
    seq: &PosteriorSequence,
    cfg: &QuantizeConfig,
) -> Result<Vec<Option<BinaryPattern>>> {
    let first = binarize_sequence(seq, cfg)?;
    high_order_patterns(&first, cfg)
}
