//! Run metrics: novelty against a sampled baseline, 2-D hypervolume and
//! vocabulary overlap between tasks.

mod hypervolume;
mod novelty;
mod vocabulary;

pub use hypervolume::{compare_hypervolume, hypervolume_2d, HypervolumeComparison, DEFAULT_REFERENCE};
pub use novelty::{
    build_novelty_baseline, is_novel, load_or_build_baseline, novelty_fraction, novelty_score, BaselineKey,
    NoveltyBaseline,
};
pub use vocabulary::{descriptor_of, vocabulary_overlap, vocabulary_set, OverlapMode};
