//! Seeded toy denoising loop driving the re-weighted cross-attention.
//!
//! Each step measures the current latent against every style, picks component
//! weights, attends, and moves the latent a fraction `step_size` toward the
//! attention output: `x <- (1 - eta) x + eta a`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::attention::{cross_attend, AttentionParams, ComponentWeights};
use crate::decomposition::FusedContext;
use crate::embedding::StyleReference;
use crate::error::{Error, Result};
use crate::numerics::{cosine_sim, row_mean, Matrix, Vector};
use crate::sar::{sar_step, SarConfig, SarState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    /// Subject and every style share attention equally.
    FixedEqual,
    /// Weights recomputed from latent similarity at every step.
    SarAdaptive,
    /// Fixed user weights: one per style, then the subject. Normalized to sum to 1.
    Manual(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DenoiseConfig {
    pub steps: usize,
    pub latent_rows: usize,
    pub dim: usize,
    pub step_size: f64,
    pub seed: u64,
    pub weight_mode: WeightMode,
    pub sar: SarConfig,
}

impl Default for DenoiseConfig {
    fn default() -> Self {
        DenoiseConfig {
            steps: 30,
            latent_rows: 64,
            dim: 32,
            step_size: 0.3,
            seed: 0,
            weight_mode: WeightMode::SarAdaptive,
            sar: SarConfig::default(),
        }
    }
}

impl DenoiseConfig {
    pub fn validate(&self, n_styles: usize) -> Result<()> {
        if self.latent_rows == 0 {
            return Err(Error::config("denoise.latent_rows", "must be >= 1"));
        }
        if self.dim < 2 {
            return Err(Error::config("denoise.dim", "must be >= 2"));
        }
        if !(self.step_size > 0.0 && self.step_size <= 1.0) {
            return Err(Error::config("denoise.step_size", "must lie in (0, 1]"));
        }
        if let WeightMode::Manual(w) = &self.weight_mode {
            if w.len() != n_styles + 1 {
                return Err(Error::config(
                    "denoise.weight_mode.manual",
                    format!(
                        "expected {} weights (styles then subject), got {}",
                        n_styles + 1,
                        w.len()
                    ),
                ));
            }
            if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || w.iter().sum::<f64>() <= 0.0 {
                return Err(Error::config(
                    "denoise.weight_mode.manual",
                    "weights must be >= 0 with a positive sum",
                ));
            }
        }
        self.sar.validate()
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        DenoiseConfig {
            seed,
            ..self.clone()
        }
    }

    pub fn with_mode(&self, weight_mode: WeightMode) -> Self {
        DenoiseConfig {
            weight_mode,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// 1-based step index.
    pub step: usize,
    /// Statistics of the pre-update latent and the weights actually applied.
    pub state: SarState,
    /// Spatial mean of the post-update latent.
    pub latent_pool: Vector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryLog {
    pub records: Vec<StepRecord>,
    pub final_latent: Matrix,
}

impl TrajectoryLog {
    /// Mean applied weight per style over all steps.
    pub fn mean_style_weights(&self) -> Vec<f64> {
        let Some(first) = self.records.first() else {
            return Vec::new();
        };
        let mut acc = vec![0.0; first.state.n_styles()];
        for r in &self.records {
            for (a, w) in acc.iter_mut().zip(&r.state.weights) {
                *a += w;
            }
        }
        acc.iter().map(|a| a / self.records.len() as f64).collect()
    }

    pub fn mean_subject_weight(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        self.records
            .iter()
            .map(|r| r.state.subject_weight)
            .sum::<f64>()
            / self.records.len() as f64
    }
}

/// Seeded standard-normal initial latent, `rows x dim`.
pub fn initial_latent(rows: usize, dim: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let data = (0..rows * dim)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    Matrix::new(rows, dim, data).expect("finite normal draws")
}

fn applied_weights(mode: &WeightMode, state: &mut SarState) {
    let n = state.n_styles();
    match mode {
        WeightMode::SarAdaptive => {}
        WeightMode::FixedEqual => {
            let w = 1.0 / (n as f64 + 1.0);
            state.weights = vec![w; n];
            state.subject_weight = w;
        }
        WeightMode::Manual(raw) => {
            let total: f64 = raw.iter().sum();
            state.weights = raw[..n].iter().map(|w| w / total).collect();
            state.subject_weight = raw[n] / total;
        }
    }
}

pub fn run(
    ctx: &FusedContext,
    styles: &[StyleReference],
    cfg: &DenoiseConfig,
) -> Result<TrajectoryLog> {
    cfg.validate(styles.len())?;
    if ctx.n_styles() != styles.len() {
        return Err(Error::shape(format!(
            "context holds {} styles, {} references given",
            ctx.n_styles(),
            styles.len()
        )));
    }
    if ctx.dim() != cfg.dim || styles.iter().any(|s| s.dim() != cfg.dim) {
        return Err(Error::shape(format!(
            "embedding dim must equal latent dim {}",
            cfg.dim
        )));
    }

    let params = AttentionParams::seeded(cfg.dim, cfg.seed);
    let mut x = initial_latent(cfg.latent_rows, cfg.dim, cfg.seed);
    let mut records = Vec::with_capacity(cfg.steps);
    for step in 1..=cfg.steps {
        let mut state = sar_step(&x, styles, &cfg.sar)?;
        applied_weights(&cfg.weight_mode, &mut state);
        let weights = ComponentWeights::from_state(&state)?;
        let attended = cross_attend(&x, ctx, &weights, &params)?;
        x = x.lin_comb(1.0 - cfg.step_size, &attended, cfg.step_size)?;
        if !x.is_finite() {
            return Err(Error::Numeric(format!(
                "latent became non-finite at step {step}"
            )));
        }
        records.push(StepRecord {
            step,
            state,
            latent_pool: row_mean(&x)?,
        });
    }
    Ok(TrajectoryLog {
        records,
        final_latent: x,
    })
}

/// Cosine of the final latent's spatial mean with each style vector.
pub fn final_alignment(log: &TrajectoryLog, styles: &[StyleReference]) -> Result<Vec<f64>> {
    let pooled = row_mean(&log.final_latent)?;
    styles
        .iter()
        .map(|s| cosine_sim(&pooled, s.pooled()))
        .collect()
}
