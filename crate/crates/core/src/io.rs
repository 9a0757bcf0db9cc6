//! The `HHK1` field file format.
//!
//! ```text
//! HHK1
//! kind scalar|vector
//! n <int>
//! h <float>
//! origin <f> <f> <f>
//! gamma <float|none>
//! c <float|none>
//! data
//! <raw little-endian f64, x-fastest, vector components interleaved>
//! ```
//!
//! Floats in the header are written in Rust's shortest round-trip form, so a
//! write followed by a read is bit-exact.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{DecayClass, Grid3, ScalarField, VectorField};

pub const MAGIC: &str = "HHK1";

#[derive(Debug, Clone, PartialEq)]
pub enum FieldData {
    Scalar(ScalarField),
    Vector(VectorField),
}

impl FieldData {
    pub fn grid(&self) -> &Grid3 {
        match self {
            FieldData::Scalar(s) => s.grid(),
            FieldData::Vector(v) => v.grid(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            FieldData::Scalar(_) => "scalar",
            FieldData::Vector(_) => "vector",
        }
    }

    pub fn decay(&self) -> Option<DecayClass> {
        match self {
            FieldData::Scalar(s) => s.decay(),
            FieldData::Vector(v) => v.decay(),
        }
    }
}

impl From<ScalarField> for FieldData {
    fn from(s: ScalarField) -> Self {
        FieldData::Scalar(s)
    }
}

impl From<VectorField> for FieldData {
    fn from(v: VectorField) -> Self {
        FieldData::Vector(v)
    }
}

pub fn write_field(out: &mut impl Write, field: &FieldData) -> std::io::Result<()> {
    let grid = field.grid();
    let o = grid.origin();
    writeln!(out, "{MAGIC}")?;
    writeln!(out, "kind {}", field.kind())?;
    writeln!(out, "n {}", grid.n())?;
    writeln!(out, "h {:?}", grid.spacing())?;
    writeln!(out, "origin {:?} {:?} {:?}", o[0], o[1], o[2])?;
    match field.decay() {
        Some(d) => {
            writeln!(out, "gamma {:?}", d.gamma)?;
            writeln!(out, "c {:?}", d.c)?;
        }
        None => {
            writeln!(out, "gamma none")?;
            writeln!(out, "c none")?;
        }
    }
    writeln!(out, "data")?;
    let mut bytes = Vec::new();
    match field {
        FieldData::Scalar(s) => s.values().iter().for_each(|v| bytes.extend_from_slice(&v.to_le_bytes())),
        FieldData::Vector(v) => v.values().iter().flatten().for_each(|c| bytes.extend_from_slice(&c.to_le_bytes())),
    }
    out.write_all(&bytes)
}

pub fn to_bytes(field: &FieldData) -> Vec<u8> {
    let mut buf = Vec::new();
    write_field(&mut buf, field).expect("writing to a Vec cannot fail");
    buf
}

pub fn save(path: impl AsRef<Path>, field: &FieldData) -> Result<()> {
    fs::write(path, to_bytes(field))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<FieldData> {
    parse(&fs::read(path)?)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn fail<T>(&self, offset: usize, message: impl Into<String>) -> Result<T> {
        Err(Error::Format { offset, message: message.into() })
    }

    /// Next header line as `(offset, text)`, without its newline.
    fn line(&mut self) -> Result<(usize, &'a str)> {
        let start = self.pos;
        let Some(len) = self.bytes[start..].iter().position(|&b| b == b'\n') else {
            return self.fail(start, "unexpected end of header");
        };
        let raw = &self.bytes[start..start + len];
        self.pos = start + len + 1;
        match std::str::from_utf8(raw) {
            Ok(text) => Ok((start, text)),
            Err(e) => self.fail(start + e.valid_up_to(), "header is not valid UTF-8"),
        }
    }

    /// Next line, which must read `<key> <rest>`; returns `(offset of rest, rest)`.
    fn keyed(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (offset, text) = self.line()?;
        match text.strip_prefix(key).and_then(|r| r.strip_prefix(' ')) {
            Some(rest) => Ok((offset + key.len() + 1, rest)),
            None => self.fail(offset, format!("expected '{key} ...', found '{text}'")),
        }
    }
}

fn parse_float(cur: &Cursor<'_>, offset: usize, text: &str) -> Result<f64> {
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => cur.fail(offset, format!("expected a finite number, found '{text}'")),
    }
}

fn parse_optional(cur: &Cursor<'_>, offset: usize, text: &str) -> Result<Option<f64>> {
    if text == "none" {
        Ok(None)
    } else {
        parse_float(cur, offset, text).map(Some)
    }
}

/// Parses a complete field file held in memory.
pub fn parse(bytes: &[u8]) -> Result<FieldData> {
    let mut cur = Cursor { bytes, pos: 0 };

    let (offset, magic) = cur.line()?;
    if magic != MAGIC {
        return cur.fail(offset, format!("bad magic '{magic}', expected '{MAGIC}'"));
    }
    let (kind_offset, kind) = cur.keyed("kind")?;
    let components = match kind {
        "scalar" => 1,
        "vector" => 3,
        other => return cur.fail(kind_offset, format!("unknown kind '{other}'")),
    };
    let (offset, n_text) = cur.keyed("n")?;
    let n: usize = match n_text.parse() {
        Ok(v) => v,
        Err(_) => return cur.fail(offset, format!("expected a node count, found '{n_text}'")),
    };
    let (h_offset, h_text) = cur.keyed("h")?;
    let h = parse_float(&cur, h_offset, h_text)?;
    let (o_offset, o_text) = cur.keyed("origin")?;
    let parts: Vec<&str> = o_text.split(' ').collect();
    if parts.len() != 3 {
        return cur.fail(o_offset, "origin needs three numbers");
    }
    let mut origin = [0.0; 3];
    let mut part_offset = o_offset;
    for (o, part) in origin.iter_mut().zip(&parts) {
        *o = parse_float(&cur, part_offset, part)?;
        part_offset += part.len() + 1;
    }
    let (g_offset, g_text) = cur.keyed("gamma")?;
    let gamma = parse_optional(&cur, g_offset, g_text)?;
    let (c_offset, c_text) = cur.keyed("c")?;
    let c = parse_optional(&cur, c_offset, c_text)?;
    let decay = match (gamma, c) {
        (None, None) => None,
        (Some(gamma), Some(c)) => match DecayClass::new(gamma, c) {
            Ok(d) => Some(d),
            Err(e) => return cur.fail(g_offset, e.to_string()),
        },
        _ => return cur.fail(g_offset, "gamma and c must both be given or both be 'none'"),
    };
    let (offset, data) = cur.line()?;
    if data != "data" {
        return cur.fail(offset, format!("expected 'data', found '{data}'"));
    }

    let grid = match Grid3::new(origin, h, n) {
        Ok(g) => g,
        Err(e) => return cur.fail(h_offset, e.to_string()),
    };
    let start = cur.pos;
    let count = grid.len() * components;
    let payload = &bytes[start..];
    if payload.len() != count * 8 {
        let at = start + payload.len().min(count * 8);
        return cur.fail(at, format!("expected {} data bytes, found {}", count * 8, payload.len()));
    }
    let mut values = Vec::with_capacity(count);
    for (i, chunk) in payload.chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().expect("chunk of 8"));
        if !v.is_finite() {
            return cur.fail(start + 8 * i, "non-finite value in data");
        }
        values.push(v);
    }
    Ok(match components {
        1 => FieldData::Scalar(ScalarField::new(grid, values)?.with_decay(decay)),
        _ => {
            let triples = values.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
            FieldData::Vector(VectorField::new(grid, triples)?.with_decay(decay))
        }
    })
}
