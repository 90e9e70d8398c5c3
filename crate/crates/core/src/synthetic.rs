//! Seeded synthetic data with a planted bias direction.
//!
//! Sentences come in template pairs that differ only along the bias
//! direction `b`: `A = gᵢ + βb`, `A′ = gᵢ − βb`, `T = hᵢ + βb`,
//! `T′ = hᵢ − βb`. Attribute-word tokens sit at `±γb` plus small noise, so
//! their conceptor captures `b` and its negation removes it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::interchange::{CollectionKind, EmbeddingCollection};
use crate::seat::{SeatTest, TestDefinition};

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedBiasConfig {
    pub dim: usize,
    pub sentences_per_set: usize,
    pub words_per_side: usize,
    pub occurrences_per_word: usize,
    /// β: bias magnitude in sentence embeddings.
    pub sentence_bias: f64,
    pub sentence_noise: f64,
    /// γ: bias magnitude of attribute-word tokens.
    pub token_bias: f64,
    pub token_noise: f64,
    pub seed: u64,
}

impl Default for PlantedBiasConfig {
    fn default() -> Self {
        PlantedBiasConfig {
            dim: 50,
            sentences_per_set: 64,
            words_per_side: 8,
            occurrences_per_word: 6,
            sentence_bias: 3.0,
            sentence_noise: 1.0,
            token_bias: 20.0,
            token_noise: 0.1,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlantedBias {
    /// Unit bias direction.
    pub direction: Vec<f64>,
    /// Attribute-word occurrences (`male*` along `+b`, `female*` along `−b`).
    pub tokens: EmbeddingCollection,
    /// Sentence ids `a*`, `ap*`, `t*`, `tp*`.
    pub sentences: EmbeddingCollection,
    pub definition: TestDefinition,
}

pub fn gaussian(rng: &mut impl Rng, dim: usize, scale: f64) -> Vec<f64> {
    (0..dim).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()
}

pub fn random_unit(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    let v = gaussian(rng, dim, 1.0);
    let n = crate::linalg::norm(&v);
    v.into_iter().map(|x| x / n).collect()
}

fn along(base: &[f64], dir: &[f64], k: f64) -> Vec<f64> {
    base.iter().zip(dir).map(|(x, d)| x + k * d).collect()
}

impl PlantedBias {
    pub fn generate(cfg: &PlantedBiasConfig) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let b = random_unit(&mut rng, cfg.dim);

        let mut tokens = EmbeddingCollection::new(cfg.dim, CollectionKind::Token);
        for (side, sign) in [("male", 1.0), ("female", -1.0)] {
            for w in 0..cfg.words_per_side {
                for _ in 0..cfg.occurrences_per_word {
                    let noise = gaussian(&mut rng, cfg.dim, cfg.token_noise);
                    tokens.push_f64(format!("{side}{w}"), &along(&noise, &b, sign * cfg.token_bias))?;
                }
            }
        }

        let mut sentences = EmbeddingCollection::new(cfg.dim, CollectionKind::Sentence);
        let mut ids = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
        for (pair, (plus, minus)) in [("a", "ap"), ("t", "tp")].into_iter().enumerate() {
            for i in 0..cfg.sentences_per_set {
                let content = gaussian(&mut rng, cfg.dim, cfg.sentence_noise);
                let (p_id, m_id) = (format!("{plus}{i}"), format!("{minus}{i}"));
                sentences.push_f64(p_id.clone(), &along(&content, &b, cfg.sentence_bias))?;
                sentences.push_f64(m_id.clone(), &along(&content, &b, -cfg.sentence_bias))?;
                ids[2 * pair].push(p_id);
                ids[2 * pair + 1].push(m_id);
            }
        }
        let [attribute_a, attribute_a_prime, target_t, target_t_prime] = ids;
        Ok(PlantedBias {
            direction: b,
            tokens,
            sentences,
            definition: TestDefinition {
                name: "planted".into(),
                attribute_a,
                attribute_a_prime,
                target_t,
                target_t_prime,
            },
        })
    }

    pub fn test(&self) -> Result<SeatTest> {
        self.definition.resolve(&self.sentences)
    }
}
