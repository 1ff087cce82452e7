//! Decomposed context versus naive prompt concatenation: where the subject
//! tokens end up and how much attention they draw.
//!
//! ```bash
//! cargo run -p amsf --example prompt_decomposition
//! ```

use amsf::attention::{subject_affinity, subject_share};
use amsf::denoiser::initial_latent;
use amsf::prelude::*;

fn main() -> Result<()> {
    let dim = 32;
    let styles = ["mosaic", "ink wash", "pixel art"]
        .iter()
        .map(|name| {
            StyleReference::new(
                *name,
                toy_encode_text(&format!("{name} style"), dim, 4, 7)?,
                toy_encode_image(&format!("{name}.png"), dim, 4, 7)?,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let subject = SubjectPrompt::toy("dog", dim, 2, 7)?;
    let params = AttentionParams::seeded(dim, 0);
    let x = initial_latent(64, dim, 0);

    for n in 1..=styles.len() {
        let dec = assemble(&styles[..n], &subject)?;
        let naive = assemble_naive_concat(&styles[..n], &subject)?;
        println!("{n} style(s)");
        for (label, ctx) in [("decomposed", &dec), ("naive", &naive)] {
            let segs: Vec<String> = ctx
                .segments()
                .iter()
                .map(|s| format!("{:?}@{}+{}", s.component, s.start, s.len))
                .collect();
            println!(
                "  {label:<10} rows={:>2} subject_rows={} affinity={:.4} share={:.4}",
                ctx.z().rows(),
                ctx.subject_row_count(),
                subject_affinity(&x, ctx, &params)?,
                subject_share(&x, ctx, &params)?,
            );
            println!("             {}", segs.join(" "));
        }
    }
    Ok(())
}
