//! One re-weighting step on a hand-built latent, printing every intermediate.
//!
//! ```bash
//! cargo run -p amsf --example sar_step
//! ```

use amsf::prelude::*;

fn style(name: &str, pooled: &[f64]) -> Result<StyleReference> {
    let row = Matrix::from_rows(&[pooled])?;
    StyleReference::new(
        name,
        TokenSequence::new(row.clone(), SourceKind::Text)?,
        TokenSequence::new(row, SourceKind::Image)?,
    )
}

fn main() -> Result<()> {
    // Latent leans toward the first axis; style A lives there with a large norm.
    let x = Matrix::from_rows(&[[1.0, 0.2, 0.0], [0.8, 0.0, 0.3], [0.9, 0.4, 0.1]])?;
    let styles = [style("A", &[2.0, 0.0, 0.0])?, style("B", &[0.0, 0.6, 0.6])?];
    let cfg = SarConfig::default();

    let state = sar_step(&x, &styles, &cfg)?;
    println!("gamma_auto = {:.4}", state.gamma_auto);
    for (i, s) in styles.iter().enumerate() {
        println!(
            "{}: |s| = {:.3}  sigma = {:+.4}  tau = {:+.4}  score = {:.4}  w = {:.4}",
            s.name(),
            s.pooled().norm(),
            state.sigma[i],
            state.tau[i],
            state.scores[i],
            state.weights[i]
        );
    }
    println!("subject weight = {:.4}", state.subject_weight);
    println!("total = {:.12}", state.weight_sum());
    Ok(())
}
