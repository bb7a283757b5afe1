//! NPY format version 1.0, restricted to little-endian float arrays in C
//! order.
//!
//! Layout: the magic string `\x93NUMPY`, version bytes `0x01 0x00`, a
//! little-endian `u16` header length, an ASCII Python dict literal with keys
//! `descr`, `fortran_order` and `shape` padded with spaces and terminated by
//! `\n` so that the payload starts on a 64-byte boundary, then the raw data.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{CredalError, IngestError, Result};

pub const MAGIC: &[u8; 6] = b"\x93NUMPY";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dtype {
    F32,
    F64,
}

impl Dtype {
    fn size(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }

    pub fn descr(self) -> &'static str {
        match self {
            Dtype::F32 => "<f4",
            Dtype::F64 => "<f8",
        }
    }
}

/// A rank-3 `(instances, samples, classes)` array of `f64`, upcast from the
/// file's dtype.
#[derive(Debug, Clone, PartialEq)]
pub struct NpyArray {
    pub shape: [usize; 3],
    pub data: Vec<f64>,
    pub dtype: Dtype,
    /// Byte offset of the payload within the file.
    pub data_offset: usize,
}

impl NpyArray {
    pub fn new(shape: [usize; 3], data: Vec<f64>) -> Self {
        assert_eq!(
            shape.iter().product::<usize>(),
            data.len(),
            "shape does not match data"
        );
        Self {
            shape,
            data,
            dtype: Dtype::F64,
            data_offset: 0,
        }
    }

    /// Values of one `(instance, sample)` row.
    pub fn row(&self, instance: usize, sample: usize) -> &[f64] {
        let [_, n, c] = self.shape;
        let start = (instance * n + sample) * c;
        &self.data[start..start + c]
    }

    /// File byte offset of the first value in a row.
    pub fn row_offset(&self, instance: usize, sample: usize) -> usize {
        let [_, n, c] = self.shape;
        self.data_offset + (instance * n + sample) * c * self.dtype.size()
    }
}

pub fn read_npy(path: &Path) -> Result<NpyArray> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|source| CredalError::Io {
            path: path.to_path_buf(),
            source,
        })?;
    Ok(parse_npy(&bytes)?)
}

pub fn parse_npy(bytes: &[u8]) -> Result<NpyArray, IngestError> {
    if bytes.len() < 10 || &bytes[..6] != MAGIC {
        return Err(IngestError::BadMagic);
    }
    let (major, minor) = (bytes[6], bytes[7]);
    if (major, minor) != (1, 0) {
        return Err(IngestError::UnsupportedVersion { major, minor });
    }
    let header_len = u16::from_le_bytes([bytes[8], bytes[9]]) as usize;
    let data_offset = 10 + header_len;
    let header = bytes
        .get(10..data_offset)
        .ok_or_else(|| IngestError::MalformedHeader("header extends past end of file".into()))?;
    let header = std::str::from_utf8(header)
        .map_err(|_| IngestError::MalformedHeader("header is not ASCII".into()))?;
    let dict = HeaderDict::parse(header)?;

    let dtype = match dict.descr.as_str() {
        "<f4" => Dtype::F32,
        "<f8" => Dtype::F64,
        other => return Err(IngestError::UnsupportedDtype(other.to_string())),
    };
    if dict.fortran_order {
        return Err(IngestError::FortranOrderUnsupported);
    }
    let shape = match *dict.shape.as_slice() {
        [i, n, c] => [i, n, c],
        [n, c] => [1, n, c],
        _ => return Err(IngestError::ShapeRankInvalid(dict.shape)),
    };

    let count: usize = shape.iter().product();
    let expected = count * dtype.size();
    let payload = &bytes[data_offset..];
    if payload.len() < expected {
        return Err(IngestError::TruncatedPayload {
            expected,
            found: payload.len(),
        });
    }
    let data = match dtype {
        Dtype::F64 => payload[..expected]
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk")))
            .collect(),
        Dtype::F32 => payload[..expected]
            .chunks_exact(4)
            .map(|b| f64::from(f32::from_le_bytes(b.try_into().expect("4-byte chunk"))))
            .collect(),
    };
    Ok(NpyArray {
        shape,
        data,
        dtype,
        data_offset,
    })
}

/// Writes a rank-3 `<f8` array.
pub fn write_npy<W: Write>(writer: &mut W, shape: [usize; 3], data: &[f64]) -> std::io::Result<()> {
    assert_eq!(
        shape.iter().product::<usize>(),
        data.len(),
        "shape does not match data"
    );
    let mut header = format!(
        "{{'descr': '<f8', 'fortran_order': False, 'shape': ({}, {}, {}), }}",
        shape[0], shape[1], shape[2]
    );
    // Pad so that magic + version + length + header (with '\n') is a multiple of 64.
    let unpadded = 10 + header.len() + 1;
    header.push_str(&" ".repeat((64 - unpadded % 64) % 64));
    header.push('\n');

    writer.write_all(MAGIC)?;
    writer.write_all(&[1, 0])?;
    writer.write_all(&(header.len() as u16).to_le_bytes())?;
    writer.write_all(header.as_bytes())?;
    for v in data {
        writer.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_npy_file(path: &Path, shape: [usize; 3], data: &[f64]) -> Result<()> {
    let io_err = |source| CredalError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut file = std::io::BufWriter::new(std::fs::File::create(path).map_err(io_err)?);
    write_npy(&mut file, shape, data).map_err(io_err)?;
    file.flush().map_err(io_err)
}

#[derive(Debug)]
struct HeaderDict {
    descr: String,
    fortran_order: bool,
    shape: Vec<usize>,
}

impl HeaderDict {
    fn parse(text: &str) -> Result<Self, IngestError> {
        let malformed = |msg: &str| IngestError::MalformedHeader(msg.to_string());
        let body = text
            .trim()
            .strip_prefix('{')
            .and_then(|t| t.strip_suffix('}'))
            .ok_or_else(|| malformed("header is not a dict"))?;

        let mut descr = None;
        let mut fortran_order = None;
        let mut shape = None;
        let mut rest = body.trim_start();
        while !rest.is_empty() {
            let (key, after_key) =
                parse_quoted(rest).ok_or_else(|| malformed("expected quoted key"))?;
            let after_colon = after_key
                .trim_start()
                .strip_prefix(':')
                .ok_or_else(|| malformed("expected ':' after key"))?
                .trim_start();
            let remaining = match key {
                "descr" => {
                    let (value, r) = parse_quoted(after_colon)
                        .ok_or_else(|| malformed("descr must be a string"))?;
                    descr = Some(value.to_string());
                    r
                }
                "fortran_order" => {
                    if let Some(r) = after_colon.strip_prefix("True") {
                        fortran_order = Some(true);
                        r
                    } else if let Some(r) = after_colon.strip_prefix("False") {
                        fortran_order = Some(false);
                        r
                    } else {
                        return Err(malformed("fortran_order must be True or False"));
                    }
                }
                "shape" => {
                    let inner = after_colon
                        .strip_prefix('(')
                        .ok_or_else(|| malformed("shape must be a tuple"))?;
                    let close = inner
                        .find(')')
                        .ok_or_else(|| malformed("unterminated shape tuple"))?;
                    let dims = inner[..close]
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(|s| {
                            s.parse::<usize>()
                                .map_err(|_| malformed("shape entries must be integers"))
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    shape = Some(dims);
                    &inner[close + 1..]
                }
                other => {
                    return Err(IngestError::MalformedHeader(format!(
                        "unexpected key {other:?}"
                    )))
                }
            };
            rest = remaining.trim_start();
            rest = rest.strip_prefix(',').unwrap_or(rest).trim_start();
        }
        Ok(Self {
            descr: descr.ok_or_else(|| malformed("missing descr"))?,
            fortran_order: fortran_order.ok_or_else(|| malformed("missing fortran_order"))?,
            shape: shape.ok_or_else(|| malformed("missing shape"))?,
        })
    }
}

/// Parses a single- or double-quoted string at the start of `s`.
fn parse_quoted(s: &str) -> Option<(&str, &str)> {
    let quote = s.chars().next().filter(|&q| q == '\'' || q == '"')?;
    let end = s[1..].find(quote)? + 1;
    Some((&s[1..end], &s[end + 1..]))
}
