//! Per-component cross-attention with weighted aggregation.
//!
//! The latent queries attend to each context segment separately; the
//! per-segment outputs are then combined with non-negative weights that sum
//! to one. Uniform weights give the plain parallel-and-average aggregation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::decomposition::{ComponentId, FusedContext, Layout, Segment};
use crate::error::{Error, Result};
use crate::numerics::{matmul, matmul_transposed, softmax_rows, Matrix};
use crate::sar::SarState;

/// Shared query/key/value projections, `C x C` each.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionParams {
    pub w_q: Matrix,
    pub w_k: Matrix,
    pub w_v: Matrix,
    pub seed: u64,
}

/// Magnitude of the seeded perturbation added to the identity value projection,
/// relative to the `1/sqrt(C)` scale used for queries and keys.
pub const VALUE_PERTURBATION: f64 = 0.25;

impl AttentionParams {
    /// Seeded initialization. Query and key projections are uniform in
    /// `[-1/sqrt(C), 1/sqrt(C)]`; the value projection is the identity plus a
    /// uniform perturbation of `VALUE_PERTURBATION / sqrt(C)`, so attended values
    /// stay in the embedding space the style vectors live in.
    pub fn seeded(dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bound = 1.0 / (dim as f64).sqrt();
        let mut uniform = |scale: f64| {
            let data = (0..dim * dim)
                .map(|_| rng.random_range(-bound..=bound) * scale)
                .collect();
            Matrix::new(dim, dim, data).expect("finite uniform draws")
        };
        let w_q = uniform(1.0);
        let w_k = uniform(1.0);
        let mut w_v = Matrix::identity(dim);
        w_v.add_scaled(&uniform(VALUE_PERTURBATION), 1.0)
            .expect("square blocks");
        AttentionParams {
            w_q,
            w_k,
            w_v,
            seed,
        }
    }

    pub fn new(w_q: Matrix, w_k: Matrix, w_v: Matrix) -> Result<Self> {
        let c = w_q.rows();
        for (name, w) in [("w_q", &w_q), ("w_k", &w_k), ("w_v", &w_v)] {
            if w.rows() != c || w.cols() != c {
                return Err(Error::shape(format!(
                    "{name} is {}x{}, expected {c}x{c}",
                    w.rows(),
                    w.cols()
                )));
            }
        }
        Ok(AttentionParams {
            w_q,
            w_k,
            w_v,
            seed: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.w_q.rows()
    }
}

/// Attention weight per style reference plus the subject. A style's weight
/// covers both its text and image segments.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentWeights {
    style: Vec<f64>,
    subject: f64,
}

impl ComponentWeights {
    pub fn new(style: Vec<f64>, subject: f64) -> Result<Self> {
        if style
            .iter()
            .chain([&subject])
            .any(|w| !(w.is_finite() && *w >= 0.0))
        {
            return Err(Error::InvalidValue(
                "component weights must be finite and >= 0".into(),
            ));
        }
        let total = subject + style.iter().sum::<f64>();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidValue(format!(
                "component weights sum to {total}, not 1"
            )));
        }
        Ok(ComponentWeights { style, subject })
    }

    /// Equal share for every style and the subject.
    pub fn equal(n_styles: usize) -> Self {
        let w = 1.0 / (n_styles as f64 + 1.0);
        ComponentWeights {
            style: vec![w; n_styles],
            subject: w,
        }
    }

    pub fn from_state(state: &SarState) -> Result<Self> {
        ComponentWeights::new(state.weights.clone(), state.subject_weight)
    }

    pub fn style(&self) -> &[f64] {
        &self.style
    }

    pub fn subject(&self) -> f64 {
        self.subject
    }

    /// Weight applied to one segment of `ctx`. Style weights split evenly
    /// between text and image; in the naive layout the subject has no segment
    /// of its own, so its weight is spread over the combined text segments.
    pub fn segment_weight(&self, ctx: &FusedContext, seg: &Segment) -> f64 {
        let n = ctx.n_styles() as f64;
        match seg.component {
            ComponentId::StyleText(i) => {
                let w = 0.5 * self.style[i];
                match ctx.layout() {
                    Layout::Decomposed => w,
                    Layout::NaiveConcat => w + self.subject / n,
                }
            }
            ComponentId::StyleImage(i) => 0.5 * self.style[i],
            ComponentId::Subject => self.subject,
        }
    }
}

fn scale(dim: usize) -> f64 {
    1.0 / (dim as f64).sqrt()
}

fn check_dims(x: &Matrix, ctx: &FusedContext, params: &AttentionParams) -> Result<()> {
    let c = params.dim();
    if x.cols() != c || ctx.dim() != c {
        return Err(Error::shape(format!(
            "latent has {} channels, context {}, projections {c}",
            x.cols(),
            ctx.dim()
        )));
    }
    Ok(())
}

/// Row-stochastic attention of projected queries `q` over one token block.
fn attention_probs_projected(
    q: &Matrix,
    block: &Matrix,
    params: &AttentionParams,
) -> Result<Matrix> {
    let k = matmul(block, &params.w_k)?;
    Ok(softmax_rows(
        &matmul_transposed(q, &k)?.scaled(scale(params.dim())),
    ))
}

/// Attention probabilities of latent `x` over a single token block.
pub fn attention_probs(x: &Matrix, block: &Matrix, params: &AttentionParams) -> Result<Matrix> {
    attention_probs_projected(&matmul(x, &params.w_q)?, block, params)
}

/// Output of every segment's attention stream, in segment order.
pub fn component_outputs(
    x: &Matrix,
    ctx: &FusedContext,
    params: &AttentionParams,
) -> Result<Vec<Matrix>> {
    check_dims(x, ctx, params)?;
    let q = matmul(x, &params.w_q)?;
    ctx.segments()
        .par_iter()
        .map(|seg| {
            let block = ctx.block(seg);
            let probs = attention_probs_projected(&q, &block, params)?;
            matmul(&probs, &matmul(&block, &params.w_v)?)
        })
        .collect()
}

/// Weighted sum of per-segment cross-attention outputs.
pub fn cross_attend(
    x: &Matrix,
    ctx: &FusedContext,
    weights: &ComponentWeights,
    params: &AttentionParams,
) -> Result<Matrix> {
    if weights.style.len() != ctx.n_styles() {
        return Err(Error::InvalidValue(format!(
            "weights cover {} styles, context has {}",
            weights.style.len(),
            ctx.n_styles()
        )));
    }
    let outputs = component_outputs(x, ctx, params)?;
    let mut acc = Matrix::zeros(x.rows(), params.dim());
    for (seg, out) in ctx.segments().iter().zip(&outputs) {
        acc.add_scaled(out, weights.segment_weight(ctx, seg))?;
    }
    Ok(acc)
}

/// Unnormalized attention affinity received by subject tokens, averaged over
/// query rows: `mean_q sum_{r in subject} exp(q . k_r / sqrt(C))`.
///
/// With uniform (zero) logits this is the subject token count, so duplicated
/// subject rows in the naive layout show up as a proportional increase.
pub fn subject_affinity(x: &Matrix, ctx: &FusedContext, params: &AttentionParams) -> Result<f64> {
    check_dims(x, ctx, params)?;
    let q = matmul(x, &params.w_q)?;
    let s = scale(params.dim());
    let mut total = 0.0;
    for r in ctx.subject_rows() {
        let k = matmul(&ctx.z().row_block(r.start, r.len()), &params.w_k)?;
        let logits = matmul_transposed(&q, &k)?;
        total += logits.as_slice().iter().map(|l| (l * s).exp()).sum::<f64>();
    }
    Ok(total / x.rows() as f64)
}

/// Fraction of attention captured by subject tokens when the latent attends
/// over the whole context with a single softmax.
pub fn subject_share(x: &Matrix, ctx: &FusedContext, params: &AttentionParams) -> Result<f64> {
    check_dims(x, ctx, params)?;
    let probs = attention_probs(x, ctx.z(), params)?;
    let mut mass = 0.0;
    for row in probs.row_iter() {
        for r in ctx.subject_rows() {
            mass += row[r.clone()].iter().sum::<f64>();
        }
    }
    Ok(mass / x.rows() as f64)
}
