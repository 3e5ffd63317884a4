//! Format strings and the JSON tensor file.
//!
//! Format strings are factors joined by `x`. A factor is a plain dimension
//! (`3`), `C3`, or a symmetric power written `S2C3`, `S2(3)` or `S2A(3)`.
//! All of these denote the same kind of factor; the canonical printer is the
//! `Display` impl of [`TensorFormat`].

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::{MonomialIndex, TensorFormat};
use crate::linalg::C64;
use crate::tensor::Tensor;

pub const TENSOR_BASIS: &str = "monomial-weighted";

fn parse_factor(part: &str) -> Result<(usize, usize)> {
    let bad = || Error::Parse(format!("bad factor `{part}` in format string"));
    let number = |s: &str| -> Result<usize> {
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        s.parse().map_err(|_| bad())
    };
    if let Some(rest) = part.strip_prefix('S') {
        let split = rest.find(|c: char| !c.is_ascii_digit()).ok_or_else(bad)?;
        let degree = number(&rest[..split])?;
        let tail = &rest[split..];
        let tail = tail.strip_prefix('A').unwrap_or(tail);
        let dim = if let Some(n) = tail.strip_prefix('C') {
            number(n)?
        } else if let Some(n) = tail.strip_prefix('(').and_then(|t| t.strip_suffix(')')) {
            number(n)?
        } else {
            return Err(bad());
        };
        return Ok((degree, dim));
    }
    let dim = number(part.strip_prefix('C').unwrap_or(part))?;
    Ok((1, dim))
}

/// Parses `2x2x4`, `S3C2`, `S3(2)x3`, ….
pub fn parse_format(s: &str) -> Result<TensorFormat> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty format string".into()));
    }
    let (degrees, dims): (Vec<usize>, Vec<usize>) =
        s.split('x').map(parse_factor).collect::<Result<Vec<_>>>()?.into_iter().unzip();
    TensorFormat::new(degrees, dims)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormatSpec {
    pub degrees: Vec<usize>,
    pub dims: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub mono: Vec<Vec<u32>>,
    pub re: f64,
    pub im: f64,
}

/// On-disk tensor: the nonzero coefficients in the monomial basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorFile {
    pub format: FormatSpec,
    pub basis: String,
    pub entries: Vec<Entry>,
}

impl TensorFile {
    pub fn from_tensor(f: &Tensor) -> Self {
        let format = f.format();
        let entries = f
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(_, z)| z.re != 0.0 || z.im != 0.0)
            .map(|(pos, z)| Entry {
                mono: format.monomial(pos).exps,
                re: z.re,
                im: z.im,
            })
            .collect();
        Self {
            format: FormatSpec {
                degrees: format.degrees().to_vec(),
                dims: format.dims().to_vec(),
            },
            basis: TENSOR_BASIS.into(),
            entries,
        }
    }

    pub fn to_tensor(&self) -> Result<Tensor> {
        if self.basis != TENSOR_BASIS {
            return Err(Error::Parse(format!("unknown basis `{}`", self.basis)));
        }
        let format = TensorFormat::new(self.format.degrees.clone(), self.format.dims.clone())?;
        let mut coeffs = vec![C64::new(0.0, 0.0); format.dim_t()];
        let mut seen = HashSet::new();
        for (i, e) in self.entries.iter().enumerate() {
            let m = MonomialIndex::new(e.mono.clone());
            m.validate(&format)
                .map_err(|err| Error::Parse(format!("entry {i}: {err}")))?;
            let pos = format.position(&m).expect("validated monomial");
            if !seen.insert(pos) {
                return Err(Error::Parse(format!("entry {i}: monomial listed twice")));
            }
            coeffs[pos] = C64::new(e.re, e.im);
        }
        Tensor::new(format, coeffs)
    }
}

pub fn tensor_to_json(f: &Tensor) -> String {
    serde_json::to_string_pretty(&TensorFile::from_tensor(f)).expect("serializable")
}

/// Parses a tensor file; syntax errors carry line and column.
pub fn tensor_from_json(s: &str) -> Result<Tensor> {
    let file: TensorFile = serde_json::from_str(s).map_err(|e| {
        Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column()))
    })?;
    file.to_tensor()
}

pub fn read_tensor(path: &std::path::Path) -> Result<Tensor> {
    let s = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    tensor_from_json(&s).map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}
