//! Fixtures shared by the criterion benches.

use phonoparse::synthgen::uniform_templates;
use phonoparse::{generate, BinaryPattern, ClassLabel, Codebook, SynthConfig, Utterance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_pattern(rng: &mut ChaCha8Rng, classes: usize, context: usize) -> BinaryPattern {
    let bits: Vec<bool> = (0..classes * (1 + context)).map(|_| rng.gen()).collect();
    BinaryPattern::from_bools(classes, context, &bits).expect("width matches")
}

pub fn random_book(entries: usize, classes: usize, context: usize, seed: u64) -> Codebook {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut book = Codebook::new(ClassLabel::Consonant, classes, context);
    while book.len() < entries {
        book.insert(random_pattern(&mut rng, classes, context))
            .expect("shape matches");
    }
    book
}

pub fn noisy_utterance(segments: usize, noise: f64, seed: u64) -> Utterance {
    let corpus = generate(&SynthConfig {
        templates_per_class: uniform_templates(4),
        noise_flip_prob: noise,
        segments,
        seed,
        ..Default::default()
    })
    .expect("valid config");
    Utterance {
        sequence: corpus.sequence,
        annotations: corpus.annotations,
    }
}
