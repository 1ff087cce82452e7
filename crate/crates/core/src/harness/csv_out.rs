//! Trajectory and summary CSV writers.
//!
//! Trajectory columns, in order: `step, gamma_auto`, then for each style `i`
//! `sigma_i, tau_i, score_i, w_i`, then `subject_w, latent_pool_norm`.
//! Header row always present; UTF-8; LF line endings. Floats use Rust's
//! shortest round-trip formatting.

use std::fs;
use std::path::Path;

use crate::denoiser::TrajectoryLog;
use crate::error::{Error, Result};

pub fn trajectory_header(n_styles: usize) -> Vec<String> {
    let mut h = vec!["step".to_owned(), "gamma_auto".to_owned()];
    for i in 1..=n_styles {
        for col in ["sigma", "tau", "score", "w"] {
            h.push(format!("{col}_{i}"));
        }
    }
    h.push("subject_w".into());
    h.push("latent_pool_norm".into());
    h
}

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidValue(format!("csv buffer: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidValue(format!("csv: {e}"))
}

pub fn trajectory_csv(log: &TrajectoryLog, n_styles: usize) -> Result<String> {
    let mut w = writer();
    w.write_record(trajectory_header(n_styles))
        .map_err(csv_err)?;
    for r in &log.records {
        let s = &r.state;
        let mut row = vec![r.step.to_string(), s.gamma_auto.to_string()];
        for i in 0..n_styles {
            for v in [s.sigma[i], s.tau[i], s.scores[i], s.weights[i]] {
                row.push(v.to_string());
            }
        }
        row.push(s.subject_weight.to_string());
        row.push(r.latent_pool.norm().to_string());
        w.write_record(&row).map_err(csv_err)?;
    }
    finish(w)
}

/// One row per repeat of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RepeatSummary {
    pub repeat: usize,
    pub seed: u64,
    pub alignment: Vec<f64>,
    pub harmonic_mean: f64,
    pub mean_weights: Vec<f64>,
    pub mean_subject_weight: f64,
}

pub fn summary_header(n_styles: usize) -> Vec<String> {
    let mut h = vec!["repeat".to_owned(), "seed".to_owned()];
    h.extend((1..=n_styles).map(|i| format!("align_{i}")));
    h.push("hm".into());
    h.extend((1..=n_styles).map(|i| format!("mean_w_{i}")));
    h.push("mean_subject_w".into());
    h
}

pub fn summary_csv(rows: &[RepeatSummary], n_styles: usize) -> Result<String> {
    let mut w = writer();
    w.write_record(summary_header(n_styles)).map_err(csv_err)?;
    for r in rows {
        let mut row = vec![r.repeat.to_string(), r.seed.to_string()];
        row.extend(r.alignment.iter().map(f64::to_string));
        row.push(r.harmonic_mean.to_string());
        row.extend(r.mean_weights.iter().map(f64::to_string));
        row.push(r.mean_subject_weight.to_string());
        w.write_record(&row).map_err(csv_err)?;
    }
    finish(w)
}

/// Writes a CSV table with an arbitrary header.
pub fn table_csv(header: &[String], rows: &[Vec<String>]) -> Result<String> {
    let mut w = writer();
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row).map_err(csv_err)?;
    }
    finish(w)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        assert_eq!(
            trajectory_header(2).join(","),
            "step,gamma_auto,sigma_1,tau_1,score_1,w_1,sigma_2,tau_2,score_2,w_2,subject_w,latent_pool_norm"
        );
        assert_eq!(
            summary_header(3).join(","),
            "repeat,seed,align_1,align_2,align_3,hm,mean_w_1,mean_w_2,mean_w_3,mean_subject_w"
        );
    }

    #[test]
    fn empty_log_has_header_only() {
        let log = TrajectoryLog {
            records: vec![],
            final_latent: crate::numerics::Matrix::zeros(1, 2),
        };
        let text = trajectory_csv(&log, 1).unwrap();
        assert_eq!(
            text,
            "step,gamma_auto,sigma_1,tau_1,score_1,w_1,subject_w,latent_pool_norm\n"
        );
    }
}
