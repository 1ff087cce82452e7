//! Sweep fixed user weights between two styles and compare with the
//! adaptive schedule.
//!
//! ```bash
//! cargo run -p amsf --example manual_weights
//! ```

use amsf::prelude::*;

fn main() -> Result<()> {
    let dim = 32;
    let make = |name: &str| {
        StyleReference::new(
            name,
            toy_encode_text(name, dim, 4, 7)?,
            toy_encode_image(&format!("{name}.png"), dim, 4, 7)?,
        )
    };
    let styles = vec![make("mosaic")?, make("watercolor")?];
    let subject = SubjectPrompt::toy("cat", dim, 2, 7)?;
    let ctx = assemble(&styles, &subject)?;
    let base = DenoiseConfig::default();

    println!(
        "{:>6} {:>6}  {:>8} {:>8} {:>8}",
        "w_1", "w_2", "align_1", "align_2", "hm"
    );
    for k in 0..=4 {
        let w1 = 2.0 / 3.0 * k as f64 / 4.0;
        let w2 = 2.0 / 3.0 - w1;
        let cfg = base.with_mode(WeightMode::Manual(vec![w1, w2, 1.0 / 3.0]));
        let a = final_alignment(&run(&ctx, &styles, &cfg)?, &styles)?;
        println!(
            "{w1:>6.3} {w2:>6.3}  {:>8.4} {:>8.4} {:>8.4}",
            a[0],
            a[1],
            harmonic_mean(&a)?
        );
    }
    let log = run(&ctx, &styles, &base)?;
    let a = final_alignment(&log, &styles)?;
    let w = log.mean_style_weights();
    println!(
        "{:>6.3} {:>6.3}  {:>8.4} {:>8.4} {:>8.4}  (adaptive, mean weights)",
        w[0],
        w[1],
        a[0],
        a[1],
        harmonic_mean(&a)?
    );
    Ok(())
}
