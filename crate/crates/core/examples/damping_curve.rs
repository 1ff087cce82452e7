//! How the per-style score reacts to the damping exponent for pooled norms
//! above and below one.
//!
//! ```bash
//! cargo run -p amsf --example damping_curve
//! ```

use amsf::sar::style_score;

fn main() {
    let (sigma, tau) = (0.4, 0.3);
    let norms = [0.5, 1.0, 3.0];
    print!("{:>6}", "gamma");
    for n in norms {
        print!("  |s|={n:<4}");
    }
    println!();
    for k in 0..=8 {
        let gamma = 1.0 + 0.5 * k as f64;
        print!("{gamma:>6.2}");
        for n in norms {
            print!("  {:>8.4}", style_score(sigma, tau, n, gamma));
        }
        println!();
    }
    println!("\nlarge norms are penalized harder as gamma grows; norms below one gain.");
}
