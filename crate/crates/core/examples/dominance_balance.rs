//! Equal fixed weights versus adaptive re-weighting when one style's token
//! rows are three times larger than the other's.
//!
//! ```bash
//! cargo run -p amsf --example dominance_balance
//! ```

use amsf::prelude::*;

fn main() -> Result<()> {
    let dim = 32;
    let make = |name: &str, image: &str| {
        StyleReference::new(
            name,
            toy_encode_text(name, dim, 4, 7)?,
            toy_encode_image(image, dim, 4, 7)?,
        )
    };
    let styles = vec![
        make("mosaic style", "mosaic.png")?.scaled(3.0),
        make("ink wash style", "ink.png")?,
    ];
    let subject = SubjectPrompt::toy("dog", dim, 2, 7)?;
    let ctx = assemble(&styles, &subject)?;

    println!(
        "{:>4}  {:>18}  {:>18}",
        "seed", "fixed (hm)", "adaptive (hm)"
    );
    let mut wins = 0;
    for seed in 0..10 {
        let cfg = DenoiseConfig {
            seed,
            ..Default::default()
        };
        let fixed = run(&ctx, &styles, &cfg.with_mode(WeightMode::FixedEqual))?;
        let adaptive = run(&ctx, &styles, &cfg)?;
        let hf = harmonic_mean(&final_alignment(&fixed, &styles)?)?;
        let ha = harmonic_mean(&final_alignment(&adaptive, &styles)?)?;
        wins += usize::from(ha >= hf);
        println!(
            "{seed:>4}  {hf:>18.4}  {ha:>18.4}   mean w = {:?}",
            adaptive
                .mean_style_weights()
                .iter()
                .map(|w| format!("{w:.3}"))
                .collect::<Vec<_>>()
        );
    }
    println!("adaptive >= fixed on {wins}/10 seeds");
    Ok(())
}
