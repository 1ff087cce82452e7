//! Token sequences, style references, deterministic toy encoders, and the
//! binary embedding interchange format.
//!
//! Interchange layout (all integers little-endian):
//!
//! ```text
//! "AMSFEMB1"                      8 bytes magic
//! u32 record count
//! per record:
//!   u16 name length, UTF-8 name
//!   u8 kind (0 = text, 1 = image)
//!   u32 rows, u32 cols
//!   rows * cols f64 values, row-major
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::numerics::{row_mean, Matrix, Vector};

pub const MAGIC: &[u8; 8] = b"AMSFEMB1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SourceKind {
    Text,
    Image,
}

impl SourceKind {
    fn tag(self) -> u8 {
        match self {
            SourceKind::Text => 0,
            SourceKind::Image => 1,
        }
    }

    fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(SourceKind::Text),
            1 => Some(SourceKind::Image),
            _ => None,
        }
    }
}

impl std::fmt::Display for SourceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SourceKind::Text => "text",
            SourceKind::Image => "image",
        })
    }
}

/// One encoded component: `m` token rows of dimension `D`, `m >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenSequence {
    tokens: Matrix,
    kind: SourceKind,
}

impl TokenSequence {
    pub fn new(tokens: Matrix, kind: SourceKind) -> Result<Self> {
        if tokens.rows() == 0 {
            return Err(Error::EmptyInput);
        }
        Ok(TokenSequence { tokens, kind })
    }

    pub fn tokens(&self) -> &Matrix {
        &self.tokens
    }

    pub fn kind(&self) -> SourceKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.tokens.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.rows() == 0
    }

    pub fn dim(&self) -> usize {
        self.tokens.cols()
    }

    pub fn scaled(&self, alpha: f64) -> TokenSequence {
        TokenSequence {
            tokens: self.tokens.scaled(alpha),
            kind: self.kind,
        }
    }
}

/// A style reference: its text tokens, image tokens, and pooled style vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StyleReference {
    name: String,
    text: TokenSequence,
    image: TokenSequence,
    pooled: Vector,
}

impl StyleReference {
    pub fn new(name: impl Into<String>, text: TokenSequence, image: TokenSequence) -> Result<Self> {
        let pooled = pool_reference(&text, &image)?;
        Ok(StyleReference {
            name: name.into(),
            text,
            image,
            pooled,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn text_tokens(&self) -> &TokenSequence {
        &self.text
    }

    pub fn image_tokens(&self) -> &TokenSequence {
        &self.image
    }

    /// Pooled style vector: mean of all text and image token rows.
    pub fn pooled(&self) -> &Vector {
        &self.pooled
    }

    pub fn dim(&self) -> usize {
        self.pooled.dim()
    }

    /// Scales every token row by `alpha`; the pooled vector scales with it.
    pub fn scaled(&self, alpha: f64) -> StyleReference {
        StyleReference {
            name: self.name.clone(),
            text: self.text.scaled(alpha),
            image: self.image.scaled(alpha),
            pooled: self.pooled.scaled(alpha),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubjectPrompt {
    pub text: String,
    pub tokens: TokenSequence,
}

impl SubjectPrompt {
    pub fn toy(text: &str, dim: usize, tokens: usize, seed: u64) -> Result<Self> {
        Ok(SubjectPrompt {
            text: text.to_owned(),
            tokens: toy_encode_text(text, dim, tokens, seed)?,
        })
    }
}

fn toy_encode(
    key: &str,
    kind: SourceKind,
    dim: usize,
    count: usize,
    seed: u64,
) -> Result<TokenSequence> {
    if key.is_empty() {
        return Err(Error::InvalidValue(format!("empty {kind} input")));
    }
    if dim < 2 {
        return Err(Error::InvalidValue(format!("dim must be >= 2, got {dim}")));
    }
    if count == 0 {
        return Err(Error::InvalidValue("token count must be >= 1".into()));
    }
    let mut data = Vec::with_capacity(dim * count);
    for index in 0..count {
        let mut hasher = Sha256::new();
        hasher.update([kind.tag()]);
        hasher.update((key.len() as u64).to_le_bytes());
        hasher.update(key.as_bytes());
        hasher.update((index as u64).to_le_bytes());
        hasher.update(seed.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(hasher.finalize().into());
        let row: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        let n = crate::numerics::norm(&row);
        data.extend(row.iter().map(|v| v / n));
    }
    TokenSequence::new(Matrix::new(count, dim, data)?, kind)
}

/// Deterministic stand-in for a text encoder. Every row is a unit vector
/// keyed by a hash of `(prompt, row index, seed)`.
pub fn toy_encode_text(
    prompt: &str,
    dim: usize,
    tokens: usize,
    seed: u64,
) -> Result<TokenSequence> {
    toy_encode(prompt, SourceKind::Text, dim, tokens, seed)
}

/// Deterministic stand-in for an image encoder, keyed by an image identifier.
pub fn toy_encode_image(
    image_id: &str,
    dim: usize,
    tokens: usize,
    seed: u64,
) -> Result<TokenSequence> {
    toy_encode(image_id, SourceKind::Image, dim, tokens, seed)
}

/// Mean over all rows of both sequences. Not re-normalized.
pub fn pool_reference(text: &TokenSequence, image: &TokenSequence) -> Result<Vector> {
    if text.dim() != image.dim() {
        return Err(Error::shape(format!(
            "text dim {} vs image dim {}",
            text.dim(),
            image.dim()
        )));
    }
    row_mean(&Matrix::vstack([text.tokens(), image.tokens()])?)
}

/// A named token sequence as stored in an interchange file.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingRecord {
    pub name: String,
    pub tokens: TokenSequence,
}

pub fn encode_embeddings(records: &[EmbeddingRecord]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    let count =
        u32::try_from(records.len()).map_err(|_| Error::InvalidValue("too many records".into()))?;
    out.extend_from_slice(&count.to_le_bytes());
    for rec in records {
        let name = rec.name.as_bytes();
        let name_len = u16::try_from(name.len())
            .map_err(|_| Error::InvalidValue(format!("record name too long: {}", rec.name)))?;
        let m = rec.tokens.tokens();
        let rows = u32::try_from(m.rows()).map_err(|_| Error::shape("rows exceed u32"))?;
        let cols = u32::try_from(m.cols()).map_err(|_| Error::shape("cols exceed u32"))?;
        out.extend_from_slice(&name_len.to_le_bytes());
        out.extend_from_slice(name);
        out.push(rec.tokens.kind().tag());
        out.extend_from_slice(&rows.to_le_bytes());
        out.extend_from_slice(&cols.to_le_bytes());
        for v in m.as_slice() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| {
                Error::CorruptRecord(format!("truncated {what} at byte {}", self.pos))
            })?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
}

pub fn decode_embeddings(buf: &[u8]) -> Result<Vec<EmbeddingRecord>> {
    if buf.len() < MAGIC.len() || &buf[..MAGIC.len()] != MAGIC {
        return Err(Error::NotEmbeddingFile);
    }
    let mut cur = Cursor {
        buf,
        pos: MAGIC.len(),
    };
    let count = cur.u32("record count")?;
    let mut records = Vec::new();
    for r in 0..count {
        let name_len = cur.u16("name length")? as usize;
        let name = std::str::from_utf8(cur.take(name_len, "name")?)
            .map_err(|_| Error::CorruptRecord(format!("record {r}: name is not UTF-8")))?
            .to_owned();
        let tag = cur.u8("kind")?;
        let kind = SourceKind::from_tag(tag)
            .ok_or_else(|| Error::CorruptRecord(format!("{name}: unknown kind {tag}")))?;
        let rows = cur.u32("rows")? as usize;
        let cols = cur.u32("cols")? as usize;
        if rows == 0 || cols == 0 {
            return Err(Error::CorruptRecord(format!(
                "{name}: empty {rows}x{cols} shape"
            )));
        }
        let bytes = rows
            .checked_mul(cols)
            .and_then(|n| n.checked_mul(8))
            .ok_or_else(|| Error::CorruptRecord(format!("{name}: shape overflow")))?;
        let payload = cur.take(bytes, &format!("payload of {name} ({rows}x{cols})"))?;
        let values: Vec<f64> = payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidValue(format!(
                "{name}: non-finite value at index {i}"
            )));
        }
        let tokens = TokenSequence::new(Matrix::new(rows, cols, values)?, kind)?;
        records.push(EmbeddingRecord { name, tokens });
    }
    if cur.pos != buf.len() {
        return Err(Error::CorruptRecord(format!(
            "{} trailing bytes after last record",
            buf.len() - cur.pos
        )));
    }
    Ok(records)
}

pub fn write_embeddings(path: &Path, records: &[EmbeddingRecord]) -> Result<()> {
    let bytes = encode_embeddings(records)?;
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&bytes).map_err(|e| Error::io(path, e))
}

pub fn load_embeddings(path: &Path) -> Result<Vec<EmbeddingRecord>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_embeddings(&bytes)
}
