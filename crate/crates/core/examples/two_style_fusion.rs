//! Fuse two toy styles onto one subject and watch the adaptive weights move.
//!
//! ```bash
//! cargo run -p amsf --example two_style_fusion
//! ```

use amsf::prelude::*;

fn main() -> Result<()> {
    let dim = 32;
    let make = |name: &str, image: &str| {
        StyleReference::new(
            name,
            toy_encode_text(&format!("{name} style"), dim, 4, 7)?,
            toy_encode_image(image, dim, 4, 7)?,
        )
    };
    let styles = vec![make("mosaic", "mosaic.png")?, make("ink wash", "ink.png")?];
    let subject = SubjectPrompt::toy("dog", dim, 2, 7)?;
    let ctx = assemble(&styles, &subject)?;

    let cfg = DenoiseConfig::default();
    let log = run(&ctx, &styles, &cfg)?;

    println!(
        "{:>4} {:>8} {:>8} {:>8} {:>8}",
        "step", "gamma", "w_1", "w_2", "w_subj"
    );
    for r in log.records.iter().step_by(3) {
        let s = &r.state;
        println!(
            "{:>4} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
            r.step, s.gamma_auto, s.weights[0], s.weights[1], s.subject_weight
        );
    }
    let alignment = final_alignment(&log, &styles)?;
    let report = balance_report(&alignment, 0.05)?;
    println!("final alignment {:?}", alignment);
    println!("harmonic mean   {:.4}", report.harmonic_mean);
    Ok(())
}
