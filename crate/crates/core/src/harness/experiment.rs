use std::path::PathBuf;

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::csv_out::{summary_csv, table_csv, trajectory_csv, write_text, RepeatSummary};
use crate::attention::{subject_affinity, subject_share, AttentionParams};
use crate::decomposition::{assemble, assemble_naive_concat, FusedContext, Layout};
use crate::denoiser::{
    final_alignment, initial_latent, run, DenoiseConfig, TrajectoryLog, WeightMode,
};
use crate::embedding::StyleReference;
use crate::error::{Error, Result};
use crate::metrics::{balance_report, harmonic_mean, BalanceReport};
use crate::numerics::{cosine_sim, row_mean, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSummary {
    pub style_names: Vec<String>,
    pub repeats: Vec<RepeatSummary>,
    /// Per-style alignment averaged over repeats.
    pub mean_alignment: Vec<f64>,
    pub balance: BalanceReport,
    pub mean_weights: Vec<f64>,
    pub mean_subject_weight: f64,
    pub trajectory_files: Vec<PathBuf>,
    pub summary_file: PathBuf,
}

fn repeat_seed(cfg: &DenoiseConfig, repeat: usize) -> u64 {
    cfg.seed.wrapping_add(repeat as u64)
}

fn summarize_run(
    repeat: usize,
    seed: u64,
    log: &TrajectoryLog,
    styles: &[StyleReference],
) -> Result<RepeatSummary> {
    let alignment = final_alignment(log, styles)?;
    if alignment.iter().any(|a| !a.is_finite()) {
        return Err(Error::Numeric(format!(
            "non-finite alignment in repeat {repeat}"
        )));
    }
    let mean_weights = if log.records.is_empty() {
        vec![0.0; styles.len()]
    } else {
        log.mean_style_weights()
    };
    Ok(RepeatSummary {
        repeat,
        seed,
        harmonic_mean: harmonic_mean(&alignment)?,
        alignment,
        mean_weights,
        mean_subject_weight: log.mean_subject_weight(),
    })
}

fn column_means(rows: impl Iterator<Item = Vec<f64>>, n: usize) -> Vec<f64> {
    let mut acc = vec![0.0; n];
    let mut count = 0usize;
    for r in rows {
        for (a, v) in acc.iter_mut().zip(r) {
            *a += v;
        }
        count += 1;
    }
    acc.iter().map(|a| a / count.max(1) as f64).collect()
}

/// Runs every repeat of one configuration. Writes `trajectory_NNN.csv` per
/// repeat and `summary.csv` into the output directory.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentSummary> {
    cfg.validate()?;
    let (styles, subject) = cfg.build_inputs()?;
    let ctx = assemble(&styles, &subject)?;
    let n = styles.len();

    let runs: Vec<(RepeatSummary, String)> = (0..cfg.repeats)
        .into_par_iter()
        .map(|r| {
            let seed = repeat_seed(&cfg.denoise, r);
            let log = run(&ctx, &styles, &cfg.denoise.with_seed(seed))?;
            Ok((
                summarize_run(r, seed, &log, &styles)?,
                trajectory_csv(&log, n)?,
            ))
        })
        .collect::<Result<_>>()?;

    let mut trajectory_files = Vec::with_capacity(runs.len());
    for (summary, text) in &runs {
        let path = cfg
            .output_dir
            .join(format!("trajectory_{:03}.csv", summary.repeat));
        write_text(&path, text)?;
        trajectory_files.push(path);
    }
    let repeats: Vec<RepeatSummary> = runs.into_iter().map(|(s, _)| s).collect();
    let summary_file = cfg.output_dir.join("summary.csv");
    write_text(&summary_file, &summary_csv(&repeats, n)?)?;

    let mean_alignment = column_means(repeats.iter().map(|r| r.alignment.clone()), n);
    Ok(ExperimentSummary {
        style_names: styles.iter().map(|s| s.name().to_owned()).collect(),
        balance: balance_report(&mean_alignment, cfg.dominance_margin)?,
        mean_alignment,
        mean_weights: column_means(repeats.iter().map(|r| r.mean_weights.clone()), n),
        mean_subject_weight: repeats.iter().map(|r| r.mean_subject_weight).sum::<f64>()
            / repeats.len() as f64,
        repeats,
        trajectory_files,
        summary_file,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arm {
    DecomposedFixed,
    DecomposedSar,
    NaiveFixed,
    NaiveSar,
}

impl Arm {
    pub const ALL: [Arm; 4] = [
        Arm::DecomposedFixed,
        Arm::DecomposedSar,
        Arm::NaiveFixed,
        Arm::NaiveSar,
    ];

    pub fn layout(self) -> Layout {
        match self {
            Arm::DecomposedFixed | Arm::DecomposedSar => Layout::Decomposed,
            Arm::NaiveFixed | Arm::NaiveSar => Layout::NaiveConcat,
        }
    }

    pub fn weight_mode(self) -> WeightMode {
        match self {
            Arm::DecomposedFixed | Arm::NaiveFixed => WeightMode::FixedEqual,
            Arm::DecomposedSar | Arm::NaiveSar => WeightMode::SarAdaptive,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Arm::DecomposedFixed => "decomposed_fixed",
            Arm::DecomposedSar => "decomposed_sar",
            Arm::NaiveFixed => "naive_fixed",
            Arm::NaiveSar => "naive_sar",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArmResult {
    pub arm: Arm,
    pub subject_rows: usize,
    /// Mean over repeats of [`subject_affinity`] at the initial latent.
    pub subject_affinity: f64,
    /// Mean over repeats of [`subject_share`] at the initial latent.
    pub subject_share: f64,
    pub repeats: Vec<RepeatSummary>,
    pub mean_alignment: Vec<f64>,
    /// Harmonic mean of `mean_alignment`.
    pub harmonic_mean: f64,
    /// Mean cosine of the final pooled latent with the pooled subject tokens.
    pub subject_alignment: f64,
    /// Per-repeat trajectories, in repeat order.
    pub logs: Vec<TrajectoryLog>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationReport {
    pub style_names: Vec<String>,
    pub seeds: Vec<u64>,
    pub arms: Vec<ArmResult>,
    pub report_file: PathBuf,
}

impl AblationReport {
    pub fn arm(&self, arm: Arm) -> &ArmResult {
        self.arms
            .iter()
            .find(|a| a.arm == arm)
            .expect("all arms present")
    }
}

fn run_arm(
    arm: Arm,
    ctx: &FusedContext,
    styles: &[StyleReference],
    subject: &Vector,
    denoise: &DenoiseConfig,
    seeds: &[u64],
) -> Result<ArmResult> {
    let n = styles.len();
    let base = denoise.with_mode(arm.weight_mode());
    let mut repeats = Vec::with_capacity(seeds.len());
    let mut logs = Vec::with_capacity(seeds.len());
    let (mut affinity, mut share, mut subj_align) = (0.0, 0.0, 0.0);
    for (r, &seed) in seeds.iter().enumerate() {
        let x0 = initial_latent(base.latent_rows, base.dim, seed);
        let params = AttentionParams::seeded(base.dim, seed);
        affinity += subject_affinity(&x0, ctx, &params)?;
        share += subject_share(&x0, ctx, &params)?;
        let log = run(ctx, styles, &base.with_seed(seed))?;
        subj_align += cosine_sim(&row_mean(&log.final_latent)?, subject)?;
        repeats.push(summarize_run(r, seed, &log, styles)?);
        logs.push(log);
    }
    let k = seeds.len() as f64;
    let mean_alignment = column_means(repeats.iter().map(|r| r.alignment.clone()), n);
    Ok(ArmResult {
        arm,
        subject_rows: ctx.subject_row_count(),
        subject_affinity: affinity / k,
        subject_share: share / k,
        harmonic_mean: harmonic_mean(&mean_alignment)?,
        subject_alignment: subj_align / k,
        mean_alignment,
        repeats,
        logs,
    })
}

/// Runs {decomposed, naive-concat} x {fixed_equal, sar_adaptive} on the same
/// inputs and seeds. Writes `ablation.csv` plus per-arm trajectories under
/// `ablation/<arm>/`.
pub fn run_ablation_suite(cfg: &ExperimentConfig) -> Result<AblationReport> {
    cfg.validate()?;
    if cfg.styles.len() < 2 {
        return Err(Error::config(
            "styles",
            "ablation needs at least two styles",
        ));
    }
    let (styles, subject) = cfg.build_inputs()?;
    let decomposed = assemble(&styles, &subject)?;
    let naive = assemble_naive_concat(&styles, &subject)?;
    let subject_vec = row_mean(subject.tokens.tokens())?;
    let seeds: Vec<u64> = (0..cfg.repeats)
        .map(|r| repeat_seed(&cfg.denoise, r))
        .collect();
    let n = styles.len();

    let arms: Vec<ArmResult> = Arm::ALL
        .par_iter()
        .map(|&arm| {
            let ctx = match arm.layout() {
                Layout::Decomposed => &decomposed,
                Layout::NaiveConcat => &naive,
            };
            run_arm(arm, ctx, &styles, &subject_vec, &cfg.denoise, &seeds)
        })
        .collect::<Result<_>>()?;

    let mut header: Vec<String> = [
        "arm",
        "repeat",
        "seed",
        "subject_rows",
        "subject_affinity",
        "subject_share",
        "subject_alignment",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend((1..=n).map(|i| format!("align_{i}")));
    header.push("hm".into());
    header.extend((1..=n).map(|i| format!("mean_w_{i}")));
    header.push("mean_subject_w".into());

    let mut rows = Vec::new();
    for a in &arms {
        for (rep, log) in a.repeats.iter().zip(&a.logs) {
            let mut row = vec![
                a.arm.label().to_owned(),
                rep.repeat.to_string(),
                rep.seed.to_string(),
                a.subject_rows.to_string(),
                a.subject_affinity.to_string(),
                a.subject_share.to_string(),
                a.subject_alignment.to_string(),
            ];
            row.extend(rep.alignment.iter().map(f64::to_string));
            row.push(rep.harmonic_mean.to_string());
            row.extend(rep.mean_weights.iter().map(f64::to_string));
            row.push(rep.mean_subject_weight.to_string());
            rows.push(row);
            let path = cfg
                .output_dir
                .join("ablation")
                .join(a.arm.label())
                .join(format!("trajectory_{:03}.csv", rep.repeat));
            write_text(&path, &trajectory_csv(log, n)?)?;
        }
    }
    let report_file = cfg.output_dir.join("ablation.csv");
    write_text(&report_file, &table_csv(&header, &rows)?)?;

    Ok(AblationReport {
        style_names: styles.iter().map(|s| s.name().to_owned()).collect(),
        seeds,
        arms,
        report_file,
    })
}
