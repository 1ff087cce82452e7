//! Training-free multi-style fusion for cross-attention conditioning.
//!
//! Several style references (text prompt + reference image tokens) and one
//! subject prompt are stacked into a single fused context, then a toy
//! denoising loop attends to each component separately and blends the
//! results with weights recomputed at every step from latent-to-style
//! similarity.
//!
//! Module map:
//!
//! - [`numerics`]: dense `f64` matrices, cosine similarity, softmax.
//! - [`embedding`]: token sequences, toy encoders, binary interchange files.
//! - [`decomposition`]: fused context assembly and the naive-concat baseline.
//! - [`sar`]: similarity statistics, adaptive damping, weight normalization.
//! - [`attention`]: per-component cross-attention with weighted aggregation.
//! - [`denoiser`]: the seeded iterative loop and trajectory log.
//! - [`metrics`]: harmonic-mean balance scores.
//! - [`harness`]: config files, experiment runs, ablations, CSV output.
//!
//! ```
//! use amsf::prelude::*;
//!
//! let dim = 16;
//! let style = |name: &str| {
//!     StyleReference::new(
//!         name,
//!         toy_encode_text(name, dim, 4, 0).unwrap(),
//!         toy_encode_image(name, dim, 4, 0).unwrap(),
//!     )
//!     .unwrap()
//! };
//! let styles = vec![style("mosaic"), style("ink wash")];
//! let subject = SubjectPrompt::toy("dog", dim, 2, 0).unwrap();
//! let ctx = assemble(&styles, &subject).unwrap();
//! let cfg = DenoiseConfig { dim, latent_rows: 16, steps: 5, ..Default::default() };
//! let log = run(&ctx, &styles, &cfg).unwrap();
//! assert_eq!(log.records.len(), 5);
//! ```

pub mod attention;
pub mod decomposition;
pub mod denoiser;
pub mod embedding;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod numerics;
pub mod sar;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::attention::{cross_attend, AttentionParams, ComponentWeights};
    pub use crate::decomposition::{assemble, assemble_naive_concat, ComponentId, FusedContext};
    pub use crate::denoiser::{final_alignment, run, DenoiseConfig, TrajectoryLog, WeightMode};
    pub use crate::embedding::{
        load_embeddings, pool_reference, toy_encode_image, toy_encode_text, write_embeddings,
        EmbeddingRecord, SourceKind, StyleReference, SubjectPrompt, TokenSequence,
    };
    pub use crate::error::{Error, Result};
    pub use crate::harness::{run_ablation_suite, run_experiment, ExperimentConfig};
    pub use crate::metrics::{balance_report, harmonic_mean, BalanceReport};
    pub use crate::numerics::{cosine_sim, matmul, row_mean, softmax_rows, Matrix, Vector};
    pub use crate::sar::{
        gamma_auto, normalize_weights, sar_step, similarity_stats, style_score, SarConfig,
        SarState, SimilarityStats,
    };
}
