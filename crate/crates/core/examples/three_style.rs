//! Three styles through the experiment harness; the context and the weight
//! columns simply grow by one.
//!
//! ```bash
//! cargo run -p amsf --example three_style
//! ```

use amsf::harness::{run_experiment, ExperimentConfig};
use amsf::Result;

fn main() -> Result<()> {
    let mut cfg = ExperimentConfig::toy(
        "dog",
        &[
            ("mosaic", "mosaic style", "mosaic.png"),
            ("ink", "ink wash style", "ink.png"),
            ("pixel", "pixel art style", "pixel.png"),
        ],
    );
    cfg.repeats = 3;
    cfg.output_dir = std::env::temp_dir().join("amsf-three-style");
    let s = run_experiment(&cfg)?;

    for r in &s.repeats {
        println!(
            "seed {}: alignment {:?} hm {:.4} weights {:?}",
            r.seed,
            r.alignment
                .iter()
                .map(|a| format!("{a:.3}"))
                .collect::<Vec<_>>(),
            r.harmonic_mean,
            r.mean_weights
                .iter()
                .map(|w| format!("{w:.3}"))
                .collect::<Vec<_>>(),
        );
    }
    let header = std::fs::read_to_string(&s.trajectory_files[0])
        .map_err(|e| amsf::Error::InvalidValue(e.to_string()))?;
    println!("{}", header.lines().next().unwrap_or_default());
    Ok(())
}
