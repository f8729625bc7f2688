//! Simulated free association and relatedness judgment behavior.

mod fa;
mod frequency;
mod response;
mod rj;
mod tuning;

pub use fa::{fa_distribution, simulate_fa, FaParams, ReplacementPolicy};
pub use frequency::{FrequencyTable, NodeFrequencies};
pub use response::{FaData, FaRow, ResponseData, RjData, RjPair};
pub use rj::{rj_value, simulate_rj, RjParams};
pub use tuning::{tune_fa, tune_rj, FaFit, FaNorms, RjFit, RjNorms, RjTuning, RjTuningOptions};
