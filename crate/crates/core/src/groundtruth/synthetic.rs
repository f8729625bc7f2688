//! Synthetic stand-in for a licensed embedding and frequency database.
//!
//! Words are points around a two-level topic hierarchy plus a shared
//! component and isotropic noise, which gives the cosine network clusters,
//! triangles and a spread of weights above the usual 0.2 floor. Frequencies
//! follow a Zipf law over a random permutation of the words.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::EmbeddingTable;
use crate::behavior::FrequencyTable;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed, SimRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticSpec {
    pub n_words: usize,
    pub dim: usize,
    pub n_groups: usize,
    pub topics_per_group: usize,
    /// Mean magnitude of the direction shared by every word.
    pub common: f64,
    /// Per-word common loadings are uniform on `common * [1 - spread, 1 + spread]`.
    pub common_spread: f64,
    /// Magnitude of the group direction inside each topic vector.
    pub group: f64,
    /// Range of per-word topic loadings.
    pub topic_min: f64,
    pub topic_max: f64,
    pub noise: f64,
    pub zipf_exponent: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_words: 500,
            dim: 64,
            n_groups: 5,
            topics_per_group: 5,
            common: 0.35,
            common_spread: 0.0,
            group: 0.6,
            topic_min: 0.4,
            topic_max: 1.0,
            noise: 0.75,
            zipf_exponent: 1.0,
            seed: 20_240_601,
        }
    }
}

fn gaussian_direction(rng: &mut SimRng, dim: usize) -> Vec<f64> {
    let scale = 1.0 / (dim as f64).sqrt();
    (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal) * scale).collect()
}

pub fn synthetic_word(i: usize) -> String {
    format!("w{i:05}")
}

/// Generates an embedding table and matching frequency table.
pub fn synthetic_lexicon(spec: &SyntheticSpec) -> Result<(EmbeddingTable, FrequencyTable)> {
    if spec.n_words < 2 || spec.dim == 0 || spec.n_groups == 0 || spec.topics_per_group == 0 {
        return Err(Error::input("synthetic lexicon needs >= 2 words and positive dims/groups/topics"));
    }
    if !(spec.topic_min >= 0.0 && spec.topic_min <= spec.topic_max) {
        return Err(Error::input("topic loading range must satisfy 0 <= min <= max"));
    }
    let mut rng = rng_from_seed(spec.seed);
    let common = gaussian_direction(&mut rng, spec.dim);
    let groups: Vec<Vec<f64>> = (0..spec.n_groups).map(|_| gaussian_direction(&mut rng, spec.dim)).collect();
    let n_topics = spec.n_groups * spec.topics_per_group;
    let topics: Vec<Vec<f64>> = (0..n_topics)
        .map(|t| {
            let own = gaussian_direction(&mut rng, spec.dim);
            let g = &groups[t / spec.topics_per_group];
            own.iter().zip(g).map(|(o, g)| o + spec.group * g).collect()
        })
        .collect();

    let mut table = EmbeddingTable::new(spec.dim);
    for i in 0..spec.n_words {
        let topic = &topics[rng.random_range(0..n_topics)];
        let loading = rng.random_range(spec.topic_min..=spec.topic_max);
        let shared = spec.common * (1.0 + spec.common_spread * rng.random_range(-1.0..=1.0));
        let noise = gaussian_direction(&mut rng, spec.dim);
        let v: Vec<f64> = (0..spec.dim)
            .map(|d| shared * common[d] + loading * topic[d] + spec.noise * noise[d])
            .collect();
        table.insert(synthetic_word(i), &v)?;
    }

    let mut ranks: Vec<usize> = (0..spec.n_words).collect();
    ranks.shuffle(&mut rng_from_seed(derive_seed(spec.seed, &[1])));
    let raw: Vec<f64> = ranks.iter().map(|&r| 1.0 / ((r + 1) as f64).powf(spec.zipf_exponent)).collect();
    let total: f64 = raw.iter().sum();
    let mut freq = FrequencyTable::new();
    for (i, f) in raw.iter().enumerate() {
        freq.insert(synthetic_word(i), f / total)?;
    }
    Ok((table, freq))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexicon_is_reproducible() {
        let spec = SyntheticSpec { n_words: 40, ..Default::default() };
        let (a, fa) = synthetic_lexicon(&spec).unwrap();
        let (b, fb) = synthetic_lexicon(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(fa, fb);
        assert_eq!(a.len(), 40);
        let total: f64 = a.words().iter().map(|w| fa.get(w).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
