//! Write token sequences to the binary interchange format, read them back,
//! and drive an experiment from the file.
//!
//! ```bash
//! cargo run -p amsf --example embedding_files
//! ```

use amsf::harness::{run_experiment, ExperimentConfig, StyleSource, StyleSpec};
use amsf::prelude::*;

fn main() -> Result<()> {
    let dir = std::env::temp_dir().join("amsf-embedding-example");
    std::fs::create_dir_all(&dir).map_err(|e| Error::InvalidValue(e.to_string()))?;
    let path = dir.join("styles.amsf");

    let records = vec![
        EmbeddingRecord {
            name: "ink_text".into(),
            tokens: toy_encode_text("ink wash style", 32, 4, 7)?,
        },
        EmbeddingRecord {
            name: "ink_image".into(),
            tokens: toy_encode_image("ink.png", 32, 4, 7)?,
        },
    ];
    write_embeddings(&path, &records)?;
    for r in load_embeddings(&path)? {
        println!(
            "{:<10} {:<5} {}x{}",
            r.name,
            r.tokens.kind(),
            r.tokens.len(),
            r.tokens.dim()
        );
    }

    let mut cfg = ExperimentConfig::toy("dog", &[("mosaic", "mosaic style", "mosaic.png")]);
    cfg.styles.push(StyleSpec {
        name: "ink".into(),
        source: StyleSource::File {
            path: path.clone(),
            text_record: "ink_text".into(),
            image_record: "ink_image".into(),
        },
        scale: 1.0,
    });
    cfg.output_dir = dir.join("run");
    let summary = run_experiment(&cfg)?;
    println!(
        "alignment {:?}, hm {:.4}",
        summary.mean_alignment, summary.balance.harmonic_mean
    );
    println!("trajectory at {}", summary.trajectory_files[0].display());
    Ok(())
}
