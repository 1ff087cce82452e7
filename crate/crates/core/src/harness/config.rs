//! Experiment configuration, stored as TOML.
//!
//! ```toml
//! subject = "dog"
//! output_dir = "out/two_style"
//! repeats = 2
//!
//! [encoder]
//! seed = 7
//! tokens_per_prompt = 4
//! tokens_per_image = 4
//! subject_tokens = 2
//!
//! [denoise]
//! steps = 30
//! latent_rows = 64
//! dim = 32
//! step_size = 0.3
//! seed = 0
//! weight_mode = "sar_adaptive"    # "fixed_equal" | { manual = [w1, .., wn, w_subject] }
//!
//! [denoise.sar]
//! kappa = 4.0
//! gamma_min = 1.0
//! gamma_max = 5.0
//! delta = 1e-8
//!
//! [[styles]]
//! name = "mosaic"
//! source = "toy"
//! prompt = "mosaic style"
//! image = "mosaic.png"
//! scale = 3.0
//!
//! [[styles]]
//! name = "ink"
//! source = "file"
//! path = "ink.amsf"               # relative to the config file
//! text_record = "ink_text"
//! image_record = "ink_image"
//! ```
//!
//! Every section except `styles` is optional and falls back to defaults.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::denoiser::DenoiseConfig;
use crate::embedding::{
    load_embeddings, toy_encode_image, toy_encode_text, EmbeddingRecord, StyleReference,
    SubjectPrompt,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum StyleSource {
    /// Toy-encoded style prompt and image identifier.
    Toy { prompt: String, image: String },
    /// Records from an embedding interchange file.
    File {
        path: PathBuf,
        text_record: String,
        image_record: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StyleSpec {
    pub name: String,
    #[serde(flatten)]
    pub source: StyleSource,
    /// Multiplier applied to every token row (and hence the pooled vector).
    #[serde(default = "unit_scale")]
    pub scale: f64,
}

fn unit_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EncoderConfig {
    pub seed: u64,
    pub tokens_per_prompt: usize,
    pub tokens_per_image: usize,
    pub subject_tokens: usize,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            seed: 7,
            tokens_per_prompt: 4,
            tokens_per_image: 4,
            subject_tokens: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub subject: String,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default = "default_margin")]
    pub dominance_margin: f64,
    #[serde(default)]
    pub encoder: EncoderConfig,
    #[serde(default)]
    pub denoise: DenoiseConfig,
    pub styles: Vec<StyleSpec>,
    /// Directory that relative embedding paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_repeats() -> usize {
    1
}

fn default_margin() -> f64 {
    0.05
}

impl ExperimentConfig {
    /// Config with toy styles and defaults everywhere else.
    pub fn toy(subject: &str, styles: &[(&str, &str, &str)]) -> Self {
        ExperimentConfig {
            subject: subject.to_owned(),
            output_dir: default_output_dir(),
            repeats: 1,
            dominance_margin: default_margin(),
            encoder: EncoderConfig::default(),
            denoise: DenoiseConfig::default(),
            styles: styles
                .iter()
                .map(|&(name, prompt, image)| StyleSpec {
                    name: name.to_owned(),
                    source: StyleSource::Toy {
                        prompt: prompt.to_owned(),
                        image: image.to_owned(),
                    },
                    scale: 1.0,
                })
                .collect(),
            base_dir: PathBuf::new(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let field = e
                .span()
                .map(|s| text[s].lines().next().unwrap_or("").trim().to_owned())
                .filter(|s| !s.is_empty())
                .unwrap_or_else(|| "<document>".into());
            Error::config(field, e.message().to_owned())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("<document>", e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.subject.is_empty() {
            return Err(Error::config("subject", "must not be empty"));
        }
        if self.styles.is_empty() {
            return Err(Error::config("styles", "at least one style is required"));
        }
        if self.repeats == 0 {
            return Err(Error::config("repeats", "must be >= 1"));
        }
        if !(self.dominance_margin.is_finite() && self.dominance_margin >= 0.0) {
            return Err(Error::config("dominance_margin", "must be >= 0"));
        }
        let e = &self.encoder;
        for (field, v) in [
            ("encoder.tokens_per_prompt", e.tokens_per_prompt),
            ("encoder.tokens_per_image", e.tokens_per_image),
            ("encoder.subject_tokens", e.subject_tokens),
        ] {
            if v == 0 {
                return Err(Error::config(field, "must be >= 1"));
            }
        }
        let mut names = HashSet::new();
        for (i, s) in self.styles.iter().enumerate() {
            if s.name.is_empty() || !names.insert(s.name.as_str()) {
                return Err(Error::config(
                    format!("styles[{i}].name"),
                    "must be non-empty and unique",
                ));
            }
            if !(s.scale.is_finite() && s.scale > 0.0) {
                return Err(Error::config(format!("styles[{i}].scale"), "must be > 0"));
            }
            if let StyleSource::Toy { prompt, image } = &s.source {
                if prompt.is_empty() || image.is_empty() {
                    return Err(Error::config(
                        format!("styles[{i}]"),
                        "prompt and image must be non-empty",
                    ));
                }
            }
        }
        self.denoise.validate(self.styles.len())
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Encodes or loads every style reference and the subject prompt.
    pub fn build_inputs(&self) -> Result<(Vec<StyleReference>, SubjectPrompt)> {
        let dim = self.denoise.dim;
        let enc = &self.encoder;
        let subject = SubjectPrompt::toy(&self.subject, dim, enc.subject_tokens, enc.seed)?;
        let mut files: HashMap<PathBuf, Vec<EmbeddingRecord>> = HashMap::new();
        let mut styles = Vec::with_capacity(self.styles.len());
        for (i, spec) in self.styles.iter().enumerate() {
            let reference = match &spec.source {
                StyleSource::Toy { prompt, image } => StyleReference::new(
                    &spec.name,
                    toy_encode_text(prompt, dim, enc.tokens_per_prompt, enc.seed)?,
                    toy_encode_image(image, dim, enc.tokens_per_image, enc.seed)?,
                )?,
                StyleSource::File {
                    path,
                    text_record,
                    image_record,
                } => {
                    let full = self.resolve(path);
                    if !files.contains_key(&full) {
                        let records = load_embeddings(&full)?;
                        files.insert(full.clone(), records);
                    }
                    let records = &files[&full];
                    let find = |name: &str, field: &str| {
                        records
                            .iter()
                            .find(|r| r.name == name)
                            .map(|r| r.tokens.clone())
                            .ok_or_else(|| {
                                Error::config(
                                    format!("styles[{i}].{field}"),
                                    format!("no record `{name}` in {}", full.display()),
                                )
                            })
                    };
                    let text = find(text_record, "text_record")?;
                    let image = find(image_record, "image_record")?;
                    if text.dim() != dim || image.dim() != dim {
                        return Err(Error::config(
                            format!("styles[{i}]"),
                            format!(
                                "records have dim {}/{}, denoise.dim is {dim}",
                                text.dim(),
                                image.dim()
                            ),
                        ));
                    }
                    StyleReference::new(&spec.name, text, image)?
                }
            };
            styles.push(if spec.scale == 1.0 {
                reference
            } else {
                reference.scaled(spec.scale)
            });
        }
        Ok((styles, subject))
    }
}
