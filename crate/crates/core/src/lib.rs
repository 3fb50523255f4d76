//! Story video-text alignment toolkit.
//!
//! - [`align`]: DTW and Drop-DTW over clip-by-sentence similarities.
//! - [`sim`]: cosine similarity, negative sampling and a reference InfoNCE loss.
//! - [`metrics`]: Clip Accuracy, Sentence IoU, F1 and annotator agreement.
//! - [`dataio`]: file formats, weak labels from subtitles, deduplicated splits.

pub mod align;
pub mod dataio;
pub mod error;
pub mod metrics;
pub mod sim;
pub mod types;

pub use align::{
    alignment_cost, brute_force_align, drop_dtw_align, dtw_align, percentile_drop_costs, to_cost,
    CostMatrix, DropCosts, SimilarityMatrix,
};
pub use error::{Error, Result};
pub use metrics::{EvalResult, LanguageReport};
pub use sim::{ContrastiveBatch, FeatureMatrix, Role};
pub use types::{
    ground_alignment, interval_intersection, Alignment, Assignment, ClipRecord, GroundedAlignment,
    Grounding, Language, SentenceRecord, TimeInterval,
};
