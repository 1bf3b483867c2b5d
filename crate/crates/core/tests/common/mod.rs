#![allow(dead_code)]

use phonoparse::synthgen::{uniform_templates, SynthConfig, TemplateOverlap};
use phonoparse::{
    generate, BinaryPattern, Metric, MetricKind, Polarity, SyntheticCorpus, Utterance,
};

pub fn utterance(c: &SyntheticCorpus) -> Utterance {
    Utterance {
        sequence: c.sequence.clone(),
        annotations: c.annotations.clone(),
    }
}

/// The largest template count every block of a K-class layout can hold twice over.
pub fn template_budget(k: usize, want: usize) -> usize {
    let smallest_block = k / 3;
    let capacity = (1usize << smallest_block) - 1;
    want.min(capacity / 2).max(1)
}

pub fn noisy_config(k: usize, seed: u64, segments: usize, noise: f64) -> SynthConfig {
    let per_class = template_budget(k, 4);
    SynthConfig {
        k,
        templates_per_class: uniform_templates(per_class),
        noise_flip_prob: noise,
        softness: 0.2,
        segments,
        frames_per_segment: (2, 7),
        seed,
        template_overlap: if k >= 6 {
            TemplateOverlap::Disjoint
        } else {
            TemplateOverlap::Shared
        },
        ..Default::default()
    }
}

pub fn noisy_corpus(k: usize, seed: u64, segments: usize, noise: f64) -> SyntheticCorpus {
    generate(&noisy_config(k, seed, segments, noise)).expect("valid synthetic config")
}

/// Every metric under both polarities.
pub fn all_metrics() -> Vec<Metric> {
    MetricKind::ALL
        .into_iter()
        .flat_map(|k| {
            [Polarity::Maximize, Polarity::Minimize]
                .into_iter()
                .map(move |p| Metric::with_polarity(k, p))
        })
        .collect()
}

pub fn bools(p: &BinaryPattern) -> Vec<bool> {
    (0..p.width()).map(|i| p.get(i)).collect()
}

/// Tiny deterministic generator for test inputs (splitmix64).
pub struct SplitMix(pub u64);

impl SplitMix {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    pub fn bits(&mut self, width: usize, density: f64) -> Vec<bool> {
        (0..width)
            .map(|_| (self.next_u64() as f64 / u64::MAX as f64) < density)
            .collect()
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}
