//! Common ground-truth construction, individualization and cue sets.

mod cues;
mod embedding;
mod perturb;
mod similarity;
mod synthetic;

pub use cues::{broad_cues, generate_cues, mixed_cues, narrow_cues, CueSet, CueSetType};
pub use embedding::{read_vocabulary, EmbeddingTable};
pub use perturb::{
    generate_individual_networks, individual_seed, perturb, perturb_with_fractions, triangle_scores,
    PerturbationOutcome, PerturbationParams, DEFAULT_WEIGHT_FLOOR, TABLE_S1,
};
pub use similarity::{build_similarity_network, cosine};
pub use synthetic::{synthetic_lexicon, synthetic_word, SyntheticSpec};
