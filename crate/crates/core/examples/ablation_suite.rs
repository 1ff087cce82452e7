//! The four-arm ablation: {decomposed, naive concat} x {equal, adaptive}.
//!
//! ```bash
//! cargo run -p amsf --example ablation_suite
//! ```

use amsf::harness::{run_ablation_suite, ExperimentConfig};
use amsf::Result;

fn main() -> Result<()> {
    let mut cfg = ExperimentConfig::toy(
        "dog",
        &[
            ("mosaic", "mosaic style", "mosaic.png"),
            ("ink", "ink wash style", "ink.png"),
        ],
    );
    cfg.styles[0].scale = 3.0;
    cfg.repeats = 5;
    cfg.output_dir = std::env::temp_dir().join("amsf-ablation");
    let report = run_ablation_suite(&cfg)?;

    println!("seeds {:?}", report.seeds);
    for a in &report.arms {
        println!(
            "{:<18} subject rows {}  share {:.4}  subject align {:.4}  style align {:?}  hm {:.4}",
            a.arm.label(),
            a.subject_rows,
            a.subject_share,
            a.subject_alignment,
            a.mean_alignment
                .iter()
                .map(|v| format!("{v:.3}"))
                .collect::<Vec<_>>(),
            a.harmonic_mean
        );
    }
    println!("report: {}", report.report_file.display());
    Ok(())
}
