//! Synthetic posterior corpora with known class-conditional structure.
//!
//! The K class dimensions are split into three contiguous blocks, one per
//! task. Each (task, class) owns an ordered list of non-zero block
//! templates. A segment draws its class for every task and a starting
//! template per task, then its frames cycle through that task's list, so
//! right context carries class-specific sequence information. The frame's
//! bits are the union of the three block templates, flipped per bit with
//! `noise_flip_prob` and then softened into posteriors.

pub mod oracle;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    BinaryPattern, ClassLabel, PosteriorFrame, PosteriorSequence, SegmentAnnotation, Task,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TemplateOverlap {
    /// The two classes of a task never share a template.
    #[default]
    Disjoint,
    /// Each class draws its templates independently; they may coincide.
    Shared,
}

impl FromStr for TemplateOverlap {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "disjoint" => Ok(TemplateOverlap::Disjoint),
            "shared" => Ok(TemplateOverlap::Shared),
            _ => Err(Error::Config(format!("unknown template overlap {s:?}"))),
        }
    }
}

/// How accent labels relate to stress labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AccentRelation {
    #[default]
    Independent,
    SameAsStress,
    ComplementOfStress,
}

impl FromStr for AccentRelation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "independent" => Ok(AccentRelation::Independent),
            "same" | "same-as-stress" => Ok(AccentRelation::SameAsStress),
            "complement" | "complement-of-stress" => Ok(AccentRelation::ComplementOfStress),
            _ => Err(Error::Config(format!("unknown accent relation {s:?}"))),
        }
    }
}

impl fmt::Display for AccentRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AccentRelation::Independent => "independent",
            AccentRelation::SameAsStress => "same",
            AccentRelation::ComplementOfStress => "complement",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthConfig {
    /// Classes per frame (K); at least 3 so every task owns a block.
    pub k: usize,
    pub templates_per_class: BTreeMap<ClassLabel, usize>,
    /// Per-bit flip probability, in [0, 0.5).
    pub noise_flip_prob: f64,
    /// Set bits map to U[1 - softness, 1], clear bits to U[0, softness].
    pub softness: f64,
    pub segments: usize,
    /// Inclusive range of frames per segment.
    pub frames_per_segment: (usize, usize),
    pub seed: u64,
    pub template_overlap: TemplateOverlap,
    pub accent_relation: AccentRelation,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            k: 15,
            templates_per_class: uniform_templates(4),
            noise_flip_prob: 0.0,
            softness: 0.1,
            segments: 500,
            frames_per_segment: (3, 8),
            seed: 0,
            template_overlap: TemplateOverlap::Disjoint,
            accent_relation: AccentRelation::Independent,
        }
    }
}

/// `count` templates for each of the six classes.
pub fn uniform_templates(count: usize) -> BTreeMap<ClassLabel, usize> {
    Task::ALL
        .into_iter()
        .flat_map(|t| t.classes())
        .map(|c| (c, count))
        .collect()
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 3 {
            return Err(Error::Config(format!(
                "synthetic data needs K >= 3, got {}",
                self.k
            )));
        }
        if !(0.0..0.5).contains(&self.noise_flip_prob) {
            return Err(Error::Config(format!(
                "noise flip probability {} outside [0, 0.5)",
                self.noise_flip_prob
            )));
        }
        if !(0.0..0.5).contains(&self.softness) {
            return Err(Error::Config(format!(
                "softness {} outside [0, 0.5)",
                self.softness
            )));
        }
        let (lo, hi) = self.frames_per_segment;
        if lo == 0 || lo > hi {
            return Err(Error::Config(format!(
                "bad frames-per-segment range ({lo}, {hi})"
            )));
        }
        if self.segments == 0 {
            return Err(Error::Config("at least one segment is required".into()));
        }
        for task in Task::ALL {
            let width = block_layout(self.k)[task_index(task)].1;
            let capacity = (1usize << width.min(62)) - 1;
            let counts = task.classes().map(|c| self.count(c));
            for (class, n) in task.classes().into_iter().zip(counts) {
                if n == 0 {
                    return Err(Error::Config(format!("class {class} has zero templates")));
                }
                if n > capacity {
                    return Err(Error::Config(format!(
                        "{n} templates for {class} exceed the {capacity} non-zero {width}-bit patterns"
                    )));
                }
            }
            if self.template_overlap == TemplateOverlap::Disjoint
                && counts[0] + counts[1] > capacity
            {
                return Err(Error::Config(format!(
                    "{} disjoint {task} templates exceed the {capacity} non-zero {width}-bit patterns",
                    counts[0] + counts[1]
                )));
            }
        }
        Ok(())
    }

    fn count(&self, class: ClassLabel) -> usize {
        self.templates_per_class.get(&class).copied().unwrap_or(0)
    }
}

fn task_index(task: Task) -> usize {
    match task {
        Task::Cv => 0,
        Task::Stress => 1,
        Task::Accent => 2,
    }
}

/// (offset, width) of each task's block; leftover classes go to the first blocks.
pub fn block_layout(k: usize) -> [(usize, usize); 3] {
    let base = k / 3;
    let extra = k % 3;
    let mut out = [(0, 0); 3];
    let mut offset = 0;
    for (i, slot) in out.iter_mut().enumerate() {
        let w = base + usize::from(i < extra);
        *slot = (offset, w);
        offset += w;
    }
    out
}

/// The ground-truth template lists, as full K-wide first-order patterns
/// with bits only inside the task's block.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplateInventory {
    pub blocks: [(usize, usize); 3],
    pub templates: BTreeMap<ClassLabel, Vec<BinaryPattern>>,
}

impl TemplateInventory {
    pub fn block(&self, task: Task) -> (usize, usize) {
        self.blocks[task_index(task)]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub sequence: PosteriorSequence,
    /// One segment per generated unit, labelled for all three tasks.
    pub annotations: Vec<SegmentAnnotation>,
    pub inventory: TemplateInventory,
    /// Noise-free first-order pattern of every frame.
    pub frame_templates: Vec<BinaryPattern>,
}

/// Generates a corpus; a pure function of `cfg`.
pub fn generate(cfg: &SynthConfig) -> Result<SyntheticCorpus> {
    cfg.validate()?;
    let blocks = block_layout(cfg.k);
    let inventory = make_inventory(cfg, blocks);

    let mut rows = Vec::new();
    let mut frame_templates = Vec::new();
    let mut annotations = Vec::with_capacity(cfg.segments);
    for s in 0..cfg.segments {
        let mut rng = stream(cfg.seed, 1 + s as u64);
        let len = rng.gen_range(cfg.frames_per_segment.0..=cfg.frames_per_segment.1);
        let cv = pick(&mut rng, Task::Cv);
        let stress = pick(&mut rng, Task::Stress);
        let accent = match cfg.accent_relation {
            AccentRelation::Independent => pick(&mut rng, Task::Accent),
            AccentRelation::SameAsStress => stress.counterpart(Task::Accent),
            AccentRelation::ComplementOfStress => {
                let same = stress.counterpart(Task::Accent);
                if same.is_class_a() {
                    Task::Accent.class_b()
                } else {
                    Task::Accent.class_a()
                }
            }
        };
        let labels = [cv, stress, accent];
        let starts = labels.map(|c| rng.gen_range(0..inventory.templates[&c].len()));

        let start = rows.len();
        for j in 0..len {
            let mut clean = BinaryPattern::zeros(cfg.k, 0);
            for (label, s0) in labels.iter().zip(starts) {
                let list = &inventory.templates[label];
                for bit in list[(s0 + j) % list.len()].ones() {
                    clean.set(bit);
                }
            }
            let mut noisy = clean.clone();
            if cfg.noise_flip_prob > 0.0 {
                for i in 0..cfg.k {
                    if rng.gen_bool(cfg.noise_flip_prob) {
                        if noisy.get(i) {
                            noisy.clear(i);
                        } else {
                            noisy.set(i);
                        }
                    }
                }
            }
            rows.push(soften(&noisy, cfg.softness, &mut rng));
            frame_templates.push(clean);
        }
        let mut seg = SegmentAnnotation::new(start, start + len)?;
        for l in labels {
            seg.set_label(l);
        }
        annotations.push(seg);
    }

    Ok(SyntheticCorpus {
        sequence: PosteriorSequence::new(rows),
        annotations,
        inventory,
        frame_templates,
    })
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn pick(rng: &mut ChaCha8Rng, task: Task) -> ClassLabel {
    if rng.gen_bool(0.5) {
        task.class_a()
    } else {
        task.class_b()
    }
}

fn soften(bits: &BinaryPattern, softness: f64, rng: &mut ChaCha8Rng) -> PosteriorFrame {
    (0..bits.width())
        .map(|i| {
            let jitter = if softness > 0.0 {
                rng.gen_range(0.0..=softness)
            } else {
                0.0
            };
            if bits.get(i) {
                1.0 - jitter
            } else {
                jitter
            }
        })
        .collect::<Vec<f64>>()
        .into()
}

fn make_inventory(cfg: &SynthConfig, blocks: [(usize, usize); 3]) -> TemplateInventory {
    let mut rng = stream(cfg.seed, 0);
    let mut templates = BTreeMap::new();
    for task in Task::ALL {
        let (offset, width) = blocks[task_index(task)];
        let [a, b] = task.classes();
        let (na, nb) = (cfg.count(a), cfg.count(b));
        let codes = match cfg.template_overlap {
            TemplateOverlap::Disjoint => {
                let all = distinct_codes(&mut rng, width, na + nb);
                (all[..na].to_vec(), all[na..].to_vec())
            }
            TemplateOverlap::Shared => (
                distinct_codes(&mut rng, width, na),
                distinct_codes(&mut rng, width, nb),
            ),
        };
        let widen = |code: u64| {
            let mut p = BinaryPattern::zeros(cfg.k, 0);
            for i in 0..width {
                if code >> i & 1 == 1 {
                    p.set(offset + i);
                }
            }
            p
        };
        templates.insert(a, codes.0.into_iter().map(widen).collect());
        templates.insert(b, codes.1.into_iter().map(widen).collect());
    }
    TemplateInventory { blocks, templates }
}

/// `n` distinct non-zero `width`-bit codes in random order.
fn distinct_codes(rng: &mut ChaCha8Rng, width: usize, n: usize) -> Vec<u64> {
    if width <= 16 {
        let mut all: Vec<u64> = (1..(1u64 << width)).collect();
        all.shuffle(rng);
        all.truncate(n);
        return all;
    }
    let mask = if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    };
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let c = rng.gen::<u64>() & mask;
        if c != 0 && seen.insert(c) {
            out.push(c);
        }
    }
    out
}
