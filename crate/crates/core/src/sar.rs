//! Similarity-aware attention re-weighting.
//!
//! Each step measures how closely the current latent `x` (HW x C) agrees with
//! every pooled style vector `s_i`, then turns that agreement into per-style
//! attention weights:
//!
//! ```text
//! sigma_i = cos(mean_j x_j, s_i)
//! tau_i   = mean_j cos(x_j, s_i)
//! gamma   = clamp(1 + kappa * max|sigma_a - sigma_b| + max|tau_a - tau_b|, gamma_min, gamma_max)
//! score_i = (1 + sigma_i)(1 + tau_i) / (1 + |s_i|^gamma)
//! w_i     = score_i / (sum_j score_j + delta)
//! ```
//!
//! For two styles the max-gap terms are exactly `|sigma_1 - sigma_2|` and
//! `|tau_1 - tau_2|`. The subject keeps a fixed share of the attention
//! budget, and the style weights are rescaled to fill the remainder.

use serde::{Deserialize, Serialize};

use crate::embedding::StyleReference;
use crate::error::{Error, Result};
use crate::numerics::{cosine, cosine_sim, row_mean, Matrix, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SarConfig {
    pub kappa: f64,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub delta: f64,
    /// Share of attention reserved for the subject. `None` means `1/(n+1)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subject_fraction: Option<f64>,
}

impl Default for SarConfig {
    fn default() -> Self {
        SarConfig {
            kappa: 4.0,
            gamma_min: 1.0,
            gamma_max: 5.0,
            delta: 1e-8,
            subject_fraction: None,
        }
    }
}

impl SarConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, reason: &str| Err(Error::config(format!("sar.{field}"), reason));
        if !(self.kappa.is_finite() && self.kappa >= 0.0) {
            return bad("kappa", "must be finite and >= 0");
        }
        if !(self.gamma_min.is_finite() && self.gamma_max.is_finite()) {
            return bad("gamma_min", "gamma bounds must be finite");
        }
        if self.gamma_min > self.gamma_max {
            return bad("gamma_min", "must not exceed gamma_max");
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return bad("delta", "must be > 0");
        }
        if let Some(f) = self.subject_fraction {
            if !(f > 0.0 && f < 1.0) {
                return bad("subject_fraction", "must lie in (0, 1)");
            }
        }
        Ok(())
    }

    pub fn subject_fraction_for(&self, n_styles: usize) -> f64 {
        self.subject_fraction
            .unwrap_or(1.0 / (n_styles as f64 + 1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityStats {
    /// Global agreement: cosine of the spatial mean with the style vector.
    pub sigma: f64,
    /// Token-level agreement: mean per-position cosine.
    pub tau: f64,
}

/// Every intermediate of one re-weighting step.
#[derive(Debug, Clone, PartialEq)]
pub struct SarState {
    pub sigma: Vec<f64>,
    pub tau: Vec<f64>,
    pub gamma_auto: f64,
    pub scores: Vec<f64>,
    pub weights: Vec<f64>,
    pub subject_weight: f64,
}

impl SarState {
    pub fn n_styles(&self) -> usize {
        self.weights.len()
    }

    pub fn weight_sum(&self) -> f64 {
        self.subject_weight + self.weights.iter().sum::<f64>()
    }
}

pub fn similarity_stats(x: &Matrix, s: &Vector) -> Result<SimilarityStats> {
    if x.cols() != s.dim() {
        return Err(Error::shape(format!(
            "latent has {} channels, style vector has {}",
            x.cols(),
            s.dim()
        )));
    }
    let sigma = cosine_sim(&row_mean(x)?, s)?;
    let tau = x
        .row_iter()
        .map(|row| cosine(row, s.as_slice()))
        .sum::<f64>()
        / x.rows() as f64;
    Ok(SimilarityStats { sigma, tau })
}

fn max_pairwise_gap(values: impl Iterator<Item = f64> + Clone) -> f64 {
    // max |a - b| over all pairs is just the spread
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    hi - lo
}

/// Adaptive damping exponent. A single style gets `gamma_min`.
pub fn gamma_auto(stats: &[SimilarityStats], cfg: &SarConfig) -> f64 {
    if stats.len() < 2 {
        return cfg.gamma_min;
    }
    let sigma_gap = max_pairwise_gap(stats.iter().map(|s| s.sigma));
    let tau_gap = max_pairwise_gap(stats.iter().map(|s| s.tau));
    (1.0 + cfg.kappa * sigma_gap + tau_gap).clamp(cfg.gamma_min, cfg.gamma_max)
}

pub fn style_score(sigma: f64, tau: f64, s_norm: f64, gamma: f64) -> f64 {
    (1.0 + sigma) * (1.0 + tau) / (1.0 + s_norm.powf(gamma))
}

/// Normalizes scores into style weights and the subject's fixed share.
/// Returns `(style_weights, subject_weight)`, summing to 1.
pub fn normalize_weights(scores: &[f64], cfg: &SarConfig) -> (Vec<f64>, f64) {
    let n = scores.len();
    let subject = cfg.subject_fraction_for(n);
    let budget = 1.0 - subject;
    let denom = scores.iter().sum::<f64>() + cfg.delta;
    let raw: Vec<f64> = scores.iter().map(|s| s / denom).collect();
    let raw_sum: f64 = raw.iter().sum();
    let weights = if raw_sum > 0.0 {
        raw.iter().map(|w| budget * w / raw_sum).collect()
    } else {
        vec![budget / n as f64; n]
    };
    (weights, subject)
}

/// Full re-weighting step for latent `x` against every style's pooled vector.
pub fn sar_step(x: &Matrix, styles: &[StyleReference], cfg: &SarConfig) -> Result<SarState> {
    if styles.is_empty() {
        return Err(Error::InvalidValue("no style references".into()));
    }
    let stats = styles
        .iter()
        .map(|s| similarity_stats(x, s.pooled()))
        .collect::<Result<Vec<_>>>()?;
    let gamma = gamma_auto(&stats, cfg);
    let scores: Vec<f64> = stats
        .iter()
        .zip(styles)
        .map(|(st, s)| style_score(st.sigma, st.tau, s.pooled().norm(), gamma))
        .collect();
    let (weights, subject_weight) = normalize_weights(&scores, cfg);
    Ok(SarState {
        sigma: stats.iter().map(|s| s.sigma).collect(),
        tau: stats.iter().map(|s| s.tau).collect(),
        gamma_auto: gamma,
        scores,
        weights,
        subject_weight,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{SourceKind, TokenSequence};
    use proptest::prelude::*;

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    fn v(d: &[f64]) -> Vector {
        Vector::new(d.to_vec()).unwrap()
    }

    fn st(sigma: f64, tau: f64) -> SimilarityStats {
        SimilarityStats { sigma, tau }
    }

    /// Style whose pooled vector equals `pooled` exactly (one text + one image row).
    fn style_with_pooled(name: &str, pooled: &[f64]) -> StyleReference {
        let seq = |k| TokenSequence::new(m(&[pooled]), k).unwrap();
        StyleReference::new(name, seq(SourceKind::Text), seq(SourceKind::Image)).unwrap()
    }

    #[test]
    fn stats_examples() {
        let s = v(&[1.0, 2.0]);
        let st = similarity_stats(&m(&[&[1., 2.], &[1., 2.]]), &s).unwrap();
        assert!((st.sigma - 1.0).abs() < 1e-12 && (st.tau - 1.0).abs() < 1e-12);

        let st = similarity_stats(&m(&[&[0., 1.], &[0., -3.]]), &v(&[1., 0.])).unwrap();
        assert_eq!((st.sigma, st.tau), (0.0, 0.0));

        let st = similarity_stats(&m(&[&[1., 0.], &[0., 1.]]), &v(&[1., 0.])).unwrap();
        assert!((st.tau - 0.5).abs() < 1e-12);
        assert!((st.sigma - 0.5f64.sqrt()).abs() < 1e-12);

        assert!(similarity_stats(&m(&[&[1., 0.]]), &v(&[1., 0., 0.])).is_err());
    }

    #[test]
    fn gamma_examples() {
        let cfg = SarConfig::default();
        assert_eq!(gamma_auto(&[st(0.3, 0.2), st(0.3, 0.2)], &cfg), 1.0);
        assert!((gamma_auto(&[st(0.5, 0.5), st(0.0, 0.0)], &cfg) - 3.5).abs() < 1e-12);
        assert_eq!(gamma_auto(&[st(1.0, 1.0), st(0.0, 0.0)], &cfg), 5.0);
        assert_eq!(gamma_auto(&[st(0.9, 0.9)], &cfg), cfg.gamma_min);
    }

    #[test]
    fn gamma_three_styles_uses_max_gap() {
        let cfg = SarConfig::default();
        // sigma spread 0.2, tau spread 0.3
        let g = gamma_auto(&[st(0.1, 0.0), st(0.3, 0.3), st(0.2, 0.1)], &cfg);
        assert!((g - (1.0 + 4.0 * 0.2 + 0.3)).abs() < 1e-12);
    }

    #[test]
    fn score_examples() {
        for g in [1.0, 2.5, 5.0] {
            assert_eq!(style_score(0.0, 0.0, 1.0, g), 0.5);
            assert_eq!(style_score(1.0, 1.0, 1.0, g), 2.0);
        }
        assert!((style_score(0.5, 0.5, 2.0, 1.0) - 0.75).abs() < 1e-12);
        assert_eq!(style_score(-1.0, 0.3, 0.7, 2.0), 0.0);
    }

    #[test]
    fn normalize_examples() {
        let cfg = SarConfig {
            subject_fraction: Some(1.0 / 3.0),
            ..SarConfig::default()
        };
        let (w, s) = normalize_weights(&[2.0, 2.0], &cfg);
        for x in w.iter().chain([&s]) {
            assert!((x - 1.0 / 3.0).abs() < 1e-6);
        }
        let (w, s) = normalize_weights(&[3.0, 1.0], &cfg);
        assert!((w[0] - 0.5).abs() < 1e-6 && (w[1] - 1.0 / 6.0).abs() < 1e-6);
        assert!((s - 1.0 / 3.0).abs() < 1e-6);
        let (w, s) = normalize_weights(&[0.0, 0.0], &cfg);
        assert!(w
            .iter()
            .all(|x| (x - 1.0 / 3.0).abs() < 1e-12 && x.is_finite()));
        assert!((s - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn default_subject_fraction_tracks_style_count() {
        let cfg = SarConfig::default();
        assert!((normalize_weights(&[1.0, 1.0, 1.0], &cfg).1 - 0.25).abs() < 1e-15);
        let (w, s) = normalize_weights(&[0.7], &cfg);
        assert_eq!((w[0], s), (0.5, 0.5));
    }

    #[test]
    fn config_validation() {
        assert!(SarConfig::default().validate().is_ok());
        let bad = [
            SarConfig {
                kappa: -1.0,
                ..Default::default()
            },
            SarConfig {
                gamma_min: 6.0,
                ..Default::default()
            },
            SarConfig {
                delta: 0.0,
                ..Default::default()
            },
            SarConfig {
                subject_fraction: Some(1.0),
                ..Default::default()
            },
        ];
        for c in bad {
            assert!(matches!(c.validate(), Err(Error::Config { .. })), "{c:?}");
        }
    }

    #[test]
    fn identical_styles_get_equal_weights() {
        let s = [0.3, -0.2, 0.9, 0.1];
        let styles = [style_with_pooled("a", &s), style_with_pooled("b", &s)];
        let x = m(&[&[1., 0., 0., 0.], &[0.2, 0.4, -0.1, 0.3], &[0., 0., 1., 1.]]);
        let state = sar_step(&x, &styles, &SarConfig::default()).unwrap();
        assert!((state.weights[0] - state.weights[1]).abs() < 1e-9);
        assert_eq!(state.gamma_auto, 1.0);
    }

    #[test]
    fn aligned_vs_orthogonal_hits_gamma_max() {
        let styles = [
            style_with_pooled("a", &[2., 0.]),
            style_with_pooled("b", &[0., 2.]),
        ];
        let x = m(&[&[1., 0.], &[3., 0.]]);
        let state = sar_step(&x, &styles, &SarConfig::default()).unwrap();
        assert_eq!((state.sigma[0], state.sigma[1]), (1.0, 0.0));
        assert_eq!(state.gamma_auto, 5.0);
        assert!((state.weight_sum() - 1.0).abs() < 1e-12);
        assert!((state.weights.iter().sum::<f64>() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn empty_style_list_is_error() {
        assert!(sar_step(&m(&[&[1., 0.]]), &[], &SarConfig::default()).is_err());
    }

    proptest! {
        #[test]
        fn weights_sum_to_one(
            scores in prop::collection::vec(0.0f64..4.0, 1..6),
            frac in prop::option::of(0.05f64..0.95),
        ) {
            let cfg = SarConfig { subject_fraction: frac, ..SarConfig::default() };
            let (w, s) = normalize_weights(&scores, &cfg);
            prop_assert!(w.iter().all(|&x| x >= 0.0));
            prop_assert!((w.iter().sum::<f64>() + s - 1.0).abs() < 1e-9);
        }

        #[test]
        fn gamma_within_bounds(stats in prop::collection::vec((-1.0f64..=1.0, -1.0f64..=1.0), 1..5)) {
            let cfg = SarConfig::default();
            let s: Vec<_> = stats.iter().map(|&(a, b)| st(a, b)).collect();
            let g = gamma_auto(&s, &cfg);
            prop_assert!((cfg.gamma_min..=cfg.gamma_max).contains(&g));
        }

        #[test]
        fn gamma_monotone_in_gaps(
            base in -1.0f64..1.0,
            tau in -1.0f64..1.0,
            g1 in 0.0f64..0.5,
            g2 in 0.0f64..0.5,
            t1 in 0.0f64..0.5,
            t2 in 0.0f64..0.5,
        ) {
            let cfg = SarConfig { gamma_max: f64::MAX, ..SarConfig::default() };
            let (lo, hi) = if g1 <= g2 { (g1, g2) } else { (g2, g1) };
            let (tlo, thi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            let a = gamma_auto(&[st(base, tau), st(base + lo, tau + tlo)], &cfg);
            let b = gamma_auto(&[st(base, tau), st(base + hi, tau + tlo)], &cfg);
            let c = gamma_auto(&[st(base, tau), st(base + lo, tau + thi)], &cfg);
            prop_assert!(b >= a && c >= a);
        }

        #[test]
        fn score_monotone_in_gamma(
            sigma in -0.99f64..1.0,
            tau in -0.99f64..1.0,
            big in 1.01f64..4.0,
            small in 0.05f64..0.99,
            g in 1.0f64..4.9,
        ) {
            prop_assert!(style_score(sigma, tau, big, g + 0.1) < style_score(sigma, tau, big, g));
            prop_assert!(style_score(sigma, tau, small, g + 0.1) > style_score(sigma, tau, small, g));
        }

        #[test]
        fn swapping_styles_swaps_state(
            x in prop::collection::vec(-2.0f64..2.0, 12),
            a in prop::collection::vec(-1.0f64..1.0, 3),
            b in prop::collection::vec(-1.0f64..1.0, 3),
        ) {
            let x = Matrix::new(4, 3, x).unwrap();
            let (sa, sb) = (style_with_pooled("a", &a), style_with_pooled("b", &b));
            let cfg = SarConfig::default();
            let fwd = sar_step(&x, &[sa.clone(), sb.clone()], &cfg).unwrap();
            let rev = sar_step(&x, &[sb, sa], &cfg).unwrap();
            prop_assert_eq!(fwd.gamma_auto, rev.gamma_auto);
            prop_assert_eq!(fwd.sigma[0], rev.sigma[1]);
            prop_assert_eq!(fwd.tau[0], rev.tau[1]);
            prop_assert_eq!(fwd.scores[0], rev.scores[1]);
            prop_assert!((fwd.weights[0] - rev.weights[1]).abs() < 1e-15);
            prop_assert!((fwd.weights[1] - rev.weights[0]).abs() < 1e-15);
        }
    }
}
