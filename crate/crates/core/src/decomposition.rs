//! Fused context assembly: stacks style text, subject, and style image tokens
//! into one matrix with recorded segment boundaries.

use std::ops::Range;

use crate::embedding::{StyleReference, SubjectPrompt};
use crate::error::{Error, Result};
use crate::numerics::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ComponentId {
    StyleText(usize),
    Subject,
    StyleImage(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub component: ComponentId,
    pub start: usize,
    pub len: usize,
}

impl Segment {
    pub fn range(&self) -> Range<usize> {
        self.start..self.start + self.len
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// `[T_1; ..; T_n; T_s; I_1; ..; I_n]`, subject encoded once.
    Decomposed,
    /// `[T_1 ++ T_s; ..; T_n ++ T_s; I_1; ..; I_n]`, subject repeated per style.
    NaiveConcat,
}

/// Stacked token matrix `Z` plus the segment map over its rows.
#[derive(Debug, Clone, PartialEq)]
pub struct FusedContext {
    z: Matrix,
    segments: Vec<Segment>,
    subject_rows: Vec<Range<usize>>,
    n_styles: usize,
    layout: Layout,
}

impl FusedContext {
    pub fn z(&self) -> &Matrix {
        &self.z
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn component_ids(&self) -> Vec<ComponentId> {
        self.segments.iter().map(|s| s.component).collect()
    }

    /// Row ranges holding subject tokens. One range for the decomposed
    /// layout, `n` ranges for naive concatenation.
    pub fn subject_rows(&self) -> &[Range<usize>] {
        &self.subject_rows
    }

    pub fn subject_row_count(&self) -> usize {
        self.subject_rows.iter().map(|r| r.len()).sum()
    }

    pub fn n_styles(&self) -> usize {
        self.n_styles
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn dim(&self) -> usize {
        self.z.cols()
    }

    pub fn has_subject_segment(&self) -> bool {
        self.segments
            .iter()
            .any(|s| s.component == ComponentId::Subject)
    }

    /// Token block of one segment.
    pub fn block(&self, seg: &Segment) -> Matrix {
        self.z.row_block(seg.start, seg.len)
    }
}

fn check_inputs(styles: &[StyleReference], subject: &SubjectPrompt) -> Result<usize> {
    if styles.is_empty() {
        return Err(Error::InvalidValue(
            "at least one style reference is required".into(),
        ));
    }
    let dim = subject.tokens.dim();
    for s in styles {
        for seq in [s.text_tokens(), s.image_tokens()] {
            if seq.dim() != dim {
                return Err(Error::shape(format!(
                    "style `{}` has dim {}, subject has {dim}",
                    s.name(),
                    seq.dim()
                )));
            }
        }
    }
    Ok(dim)
}

struct Builder<'a> {
    blocks: Vec<&'a Matrix>,
    segments: Vec<Segment>,
    next: usize,
}

impl<'a> Builder<'a> {
    fn push(&mut self, component: ComponentId, m: &'a Matrix) -> Range<usize> {
        self.push_parts(component, &[m])
    }

    fn push_parts(&mut self, component: ComponentId, parts: &[&'a Matrix]) -> Range<usize> {
        let start = self.next;
        let len: usize = parts.iter().map(|m| m.rows()).sum();
        self.blocks.extend_from_slice(parts);
        self.segments.push(Segment {
            component,
            start,
            len,
        });
        self.next += len;
        start..self.next
    }
}

/// Stacks all style text sequences in reference order, then the subject, then
/// all style image sequences.
pub fn assemble(styles: &[StyleReference], subject: &SubjectPrompt) -> Result<FusedContext> {
    check_inputs(styles, subject)?;
    let mut b = Builder {
        blocks: Vec::new(),
        segments: Vec::new(),
        next: 0,
    };
    for (i, s) in styles.iter().enumerate() {
        b.push(ComponentId::StyleText(i), s.text_tokens().tokens());
    }
    let subject_range = b.push(ComponentId::Subject, subject.tokens.tokens());
    for (i, s) in styles.iter().enumerate() {
        b.push(ComponentId::StyleImage(i), s.image_tokens().tokens());
    }
    Ok(FusedContext {
        z: Matrix::vstack(b.blocks)?,
        segments: b.segments,
        subject_rows: vec![subject_range],
        n_styles: styles.len(),
        layout: Layout::Decomposed,
    })
}

/// Baseline that mimics concatenating the subject onto every style prompt:
/// each style's text segment carries its own copy of the subject tokens.
pub fn assemble_naive_concat(
    styles: &[StyleReference],
    subject: &SubjectPrompt,
) -> Result<FusedContext> {
    check_inputs(styles, subject)?;
    let mut b = Builder {
        blocks: Vec::new(),
        segments: Vec::new(),
        next: 0,
    };
    let mut subject_rows = Vec::with_capacity(styles.len());
    for (i, s) in styles.iter().enumerate() {
        let text = s.text_tokens().tokens();
        let r = b.push_parts(ComponentId::StyleText(i), &[text, subject.tokens.tokens()]);
        subject_rows.push(r.start + text.rows()..r.end);
    }
    for (i, s) in styles.iter().enumerate() {
        b.push(ComponentId::StyleImage(i), s.image_tokens().tokens());
    }
    Ok(FusedContext {
        z: Matrix::vstack(b.blocks)?,
        segments: b.segments,
        subject_rows,
        n_styles: styles.len(),
        layout: Layout::NaiveConcat,
    })
}
