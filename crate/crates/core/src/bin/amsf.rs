use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use amsf::embedding::{
    load_embeddings, toy_encode_image, toy_encode_text, write_embeddings, EmbeddingRecord,
};
use amsf::harness::{run_ablation_suite, run_experiment, ExperimentConfig};
use amsf::numerics::row_mean;
use amsf::Result;

#[derive(Parser)]
#[command(
    name = "amsf",
    version,
    about = "Multi-style fusion experiments on a toy denoiser"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Text,
    Image,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write trajectory and summary CSVs.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the four-arm decomposition x weighting ablation.
    Ablate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Toy-encode a prompt (or image id) into an embedding file.
    Encode {
        #[arg(long)]
        prompt: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        kind: Kind,
        /// Record name; defaults to the prompt.
        #[arg(long)]
        name: Option<String>,
        #[arg(long, default_value_t = 32)]
        dim: usize,
        #[arg(long, default_value_t = 4)]
        tokens: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Add the record to an existing file instead of overwriting it.
        #[arg(long)]
        append: bool,
    },
    /// List the records of an embedding file.
    Inspect { file: PathBuf },
}

fn load_config(path: &Path, out: Option<PathBuf>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(out) = out {
        cfg.output_dir = out;
    }
    Ok(cfg)
}

fn fmt_list(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{x:.4}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run { config, out, seed } => {
            let mut cfg = load_config(&config, out)?;
            if let Some(seed) = seed {
                cfg.denoise.seed = seed;
            }
            let s = run_experiment(&cfg)?;
            println!("styles:         {}", s.style_names.join(", "));
            println!("alignment:      [{}]", fmt_list(&s.mean_alignment));
            println!("harmonic mean:  {:.4}", s.balance.harmonic_mean);
            match s.balance.dominant_style {
                Some(i) => println!("dominant style: {}", s.style_names[i]),
                None => println!("dominant style: none"),
            }
            println!(
                "mean weights:   [{}], subject {:.4}",
                fmt_list(&s.mean_weights),
                s.mean_subject_weight
            );
            println!(
                "wrote {} trajectories and {}",
                s.trajectory_files.len(),
                s.summary_file.display()
            );
        }
        Command::Ablate { config, out } => {
            let cfg = load_config(&config, out)?;
            let r = run_ablation_suite(&cfg)?;
            println!(
                "{:<18} {:>9} {:>10} {:>10} {:>8}  style alignment",
                "arm", "subj_rows", "subj_share", "subj_align", "hm"
            );
            for a in &r.arms {
                println!(
                    "{:<18} {:>9} {:>10.4} {:>10.4} {:>8.4}  [{}]",
                    a.arm.label(),
                    a.subject_rows,
                    a.subject_share,
                    a.subject_alignment,
                    a.harmonic_mean,
                    fmt_list(&a.mean_alignment)
                );
            }
            println!("wrote {}", r.report_file.display());
        }
        Command::Encode {
            prompt,
            out,
            kind,
            name,
            dim,
            tokens,
            seed,
            append,
        } => {
            let tokens = match kind {
                Kind::Text => toy_encode_text(&prompt, dim, tokens, seed)?,
                Kind::Image => toy_encode_image(&prompt, dim, tokens, seed)?,
            };
            let mut records = if append && out.exists() {
                load_embeddings(&out)?
            } else {
                Vec::new()
            };
            let name = name.unwrap_or(prompt);
            records.retain(|r| r.name != name);
            records.push(EmbeddingRecord { name, tokens });
            write_embeddings(&out, &records)?;
            println!("wrote {} record(s) to {}", records.len(), out.display());
        }
        Command::Inspect { file } => {
            for r in load_embeddings(&file)? {
                let m = r.tokens.tokens();
                println!(
                    "{}\t{}\t{}x{}\tpooled_norm={:.6}",
                    r.name,
                    r.tokens.kind(),
                    m.rows(),
                    m.cols(),
                    row_mean(m)?.norm()
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
