//! Matrix files: a raw little-endian binary format, CSV and Matrix Market.
//!
//! Binary layout: `b"SKCM"`, `u32` version (1), `u64` rows, `u64` cols, then
//! `rows * cols` `f64` values in row-major order, all little-endian.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sketchy_core::DenseMatrix;
use thiserror::Error;

pub const BINARY_MAGIC: &[u8; 4] = b"SKCM";
pub const BINARY_VERSION: u32 = 1;
pub const BINARY_HEADER_LEN: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[value(alias = "bin", alias = "skcm")]
    Binary,
    Csv,
    #[value(name = "mm", alias = "mtx")]
    #[serde(rename = "mm")]
    MatrixMarket,
}

impl Format {
    /// Guess from the extension: `.skcm`/`.bin`, `.csv`, `.mtx`/`.mm`.
    pub fn from_extension(path: &Path) -> Option<Format> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "skcm" | "bin" => Some(Format::Binary),
            "csv" => Some(Format::Csv),
            "mtx" | "mm" => Some(Format::MatrixMarket),
            _ => None,
        }
    }

    /// Guess from the leading bytes; anything unrecognised is read as CSV.
    pub fn sniff(bytes: &[u8]) -> Format {
        if bytes.starts_with(BINARY_MAGIC) {
            Format::Binary
        } else if bytes.starts_with(b"%%MatrixMarket") {
            Format::MatrixMarket
        } else {
            Format::Csv
        }
    }
}

/// Where in a file a parse error was found.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Location {
    /// 1-based line and, when known, 1-based field or column.
    Line { line: usize, column: Option<usize> },
    /// Byte offset into a binary file.
    Byte(usize),
    /// The error is about the file as a whole.
    File,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Line { line, column: Some(c) } => write!(f, "line {line}, field {c}"),
            Location::Line { line, column: None } => write!(f, "line {line}"),
            Location::Byte(offset) => write!(f, "byte offset {offset}"),
            Location::File => f.write_str("whole file"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{location}: {message}")]
pub struct ParseError {
    pub location: Location,
    pub message: String,
}

impl ParseError {
    fn at(location: Location, message: impl Into<String>) -> Self {
        Self { location, message: message.into() }
    }

    fn line(line: usize, column: Option<usize>, message: impl Into<String>) -> Self {
        Self::at(Location::Line { line, column }, message)
    }
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    Os {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Parse {
        path: PathBuf,
        #[source]
        source: ParseError,
    },
}

impl IoError {
    pub fn os(path: &Path, source: std::io::Error) -> Self {
        IoError::Os { path: path.to_path_buf(), source }
    }
}

pub fn load_matrix(path: &Path, format: Option<Format>) -> Result<DenseMatrix, IoError> {
    let bytes = fs::read(path).map_err(|e| IoError::os(path, e))?;
    let format = format.or_else(|| Format::from_extension(path)).unwrap_or_else(|| Format::sniff(&bytes));
    decode(&bytes, format).map_err(|source| IoError::Parse { path: path.to_path_buf(), source })
}

pub fn save_matrix(path: &Path, a: &DenseMatrix, format: Option<Format>) -> Result<(), IoError> {
    let format = format.or_else(|| Format::from_extension(path)).unwrap_or(Format::Binary);
    fs::write(path, encode(a, format)).map_err(|e| IoError::os(path, e))
}

pub fn decode(bytes: &[u8], format: Format) -> Result<DenseMatrix, ParseError> {
    match format {
        Format::Binary => decode_binary(bytes),
        Format::Csv => decode_csv(text(bytes)?),
        Format::MatrixMarket => decode_matrix_market(text(bytes)?),
    }
}

pub fn encode(a: &DenseMatrix, format: Format) -> Vec<u8> {
    match format {
        Format::Binary => encode_binary(a),
        Format::Csv => encode_csv(a).into_bytes(),
        Format::MatrixMarket => encode_matrix_market(a).into_bytes(),
    }
}

fn text(bytes: &[u8]) -> Result<&str, ParseError> {
    std::str::from_utf8(bytes).map_err(|e| {
        let line = bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() + 1;
        ParseError::line(line, None, "file is not valid UTF-8 text")
    })
}

pub fn encode_binary(a: &DenseMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(BINARY_HEADER_LEN + 8 * a.as_slice().len());
    out.extend_from_slice(BINARY_MAGIC);
    out.extend_from_slice(&BINARY_VERSION.to_le_bytes());
    out.extend_from_slice(&(a.nrows() as u64).to_le_bytes());
    out.extend_from_slice(&(a.ncols() as u64).to_le_bytes());
    for v in a.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_binary(bytes: &[u8]) -> Result<DenseMatrix, ParseError> {
    if bytes.len() < BINARY_HEADER_LEN {
        return Err(ParseError::at(
            Location::Byte(bytes.len()),
            format!("header truncated: expected {BINARY_HEADER_LEN} bytes, found {}", bytes.len()),
        ));
    }
    if &bytes[0..4] != BINARY_MAGIC {
        return Err(ParseError::at(
            Location::Byte(0),
            format!("bad magic {:?}, expected \"SKCM\"", String::from_utf8_lossy(&bytes[0..4])),
        ));
    }
    let u64_at = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().expect("8-byte slice"));
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4-byte slice"));
    if version != BINARY_VERSION {
        return Err(ParseError::at(
            Location::Byte(4),
            format!("unsupported version {version}, expected {BINARY_VERSION}"),
        ));
    }
    let (rows, cols) = (u64_at(8), u64_at(16));
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(8))
        .filter(|&n| n <= usize::MAX as u64)
        .ok_or_else(|| ParseError::at(Location::Byte(8), format!("dimensions {rows}x{cols} overflow")))?
        as usize;
    let payload = &bytes[BINARY_HEADER_LEN..];
    if payload.len() != expected {
        let what = if payload.len() < expected { "truncated" } else { "has trailing bytes" };
        return Err(ParseError::at(
            Location::Byte(BINARY_HEADER_LEN + payload.len().min(expected)),
            format!(
                "payload {what}: a {rows}x{cols} matrix needs {expected} bytes after the header, found {}",
                payload.len()
            ),
        ));
    }
    let mut data = Vec::with_capacity(expected / 8);
    for (i, chunk) in payload.chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().expect("8-byte chunk"));
        if !v.is_finite() {
            return Err(ParseError::at(
                Location::Byte(BINARY_HEADER_LEN + 8 * i),
                format!("non-finite value {v} at entry ({}, {})", i / cols as usize, i % cols as usize),
            ));
        }
        data.push(v);
    }
    DenseMatrix::new(rows as usize, cols as usize, data).map_err(|e| ParseError::at(Location::File, e.to_string()))
}

fn parse_value(field: &str, line: usize, column: usize) -> Result<f64, ParseError> {
    let field = field.trim();
    let v: f64 =
        field.parse().map_err(|_| ParseError::line(line, Some(column), format!("'{field}' is not a number")))?;
    if !v.is_finite() {
        return Err(ParseError::line(line, Some(column), format!("non-finite value '{field}'")));
    }
    Ok(v)
}

/// One matrix row per record, no header. Blank lines are skipped.
pub fn decode_csv(text: &str) -> Result<DenseMatrix, ParseError> {
    let mut reader =
        csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            ParseError::line(line, None, format!("malformed CSV: {e}"))
        })?;
        let line = record.position().map_or(rows + 1, |p| p.line() as usize);
        match cols {
            None => cols = Some(record.len()),
            Some(c) if c != record.len() => {
                return Err(ParseError::line(line, None, format!("row has {} fields, expected {c}", record.len())));
            }
            _ => {}
        }
        for (j, field) in record.iter().enumerate() {
            data.push(parse_value(field, line, j + 1)?);
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| ParseError::at(Location::File, "CSV file holds no rows"))?;
    DenseMatrix::new(rows, cols, data).map_err(|e| ParseError::at(Location::File, e.to_string()))
}

/// Values are written in shortest round-trip form, so reading back is exact.
pub fn encode_csv(a: &DenseMatrix) -> String {
    let mut out = String::new();
    for i in 0..a.nrows() {
        let row: Vec<String> = a.row(i).iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[derive(Clone, Copy, PartialEq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

/// Matrix Market `array` or `coordinate` files with `real`, `integer` or
/// `pattern` fields. Coordinate files are promoted to dense.
pub fn decode_matrix_market(text: &str) -> Result<DenseMatrix, ParseError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, banner) = lines.next().ok_or_else(|| ParseError::at(Location::File, "empty file"))?;
    let words: Vec<String> = banner.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(ParseError::line(1, None, "expected '%%MatrixMarket matrix <layout> <field> <symmetry>'"));
    }
    let coordinate = match words[2].as_str() {
        "array" => false,
        "coordinate" => true,
        other => return Err(ParseError::line(1, Some(3), format!("unknown layout '{other}'"))),
    };
    let pattern = match words[3].as_str() {
        "real" | "double" | "integer" => false,
        "pattern" if coordinate => true,
        other => return Err(ParseError::line(1, Some(4), format!("unsupported field '{other}'"))),
    };
    let symmetry = match words[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        other => return Err(ParseError::line(1, Some(5), format!("unsupported symmetry '{other}'"))),
    };

    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_line, size) = body.next().ok_or_else(|| ParseError::at(Location::File, "missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .enumerate()
        .map(|(j, w)| w.parse().map_err(|_| ParseError::line(size_line, Some(j + 1), format!("'{w}' is not a size"))))
        .collect::<Result<_, _>>()?;
    let want = if coordinate { 3 } else { 2 };
    if dims.len() != want {
        return Err(ParseError::line(
            size_line,
            None,
            format!("size line needs {want} integers, found {}", dims.len()),
        ));
    }
    let (rows, cols) = (dims[0], dims[1]);
    if symmetry != Symmetry::General && rows != cols {
        return Err(ParseError::line(size_line, None, "symmetric storage needs a square matrix"));
    }
    let mut a = DenseMatrix::zeros(rows, cols);
    let mirror = |a: &mut DenseMatrix, i: usize, j: usize, v: f64| {
        a.set(i, j, v);
        if i != j {
            match symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => a.set(j, i, v),
                Symmetry::SkewSymmetric => a.set(j, i, -v),
            }
        }
    };

    if coordinate {
        let nnz = dims[2];
        let mut seen = 0;
        for (line, entry) in body.by_ref().take(nnz) {
            let fields: Vec<&str> = entry.split_whitespace().collect();
            let need = if pattern { 2 } else { 3 };
            if fields.len() != need {
                return Err(ParseError::line(line, None, format!("entry needs {need} fields, found {}", fields.len())));
            }
            let index = |j: usize, bound: usize| -> Result<usize, ParseError> {
                let v: usize = fields[j]
                    .parse()
                    .map_err(|_| ParseError::line(line, Some(j + 1), format!("'{}' is not an index", fields[j])))?;
                if v == 0 || v > bound {
                    return Err(ParseError::line(line, Some(j + 1), format!("index {v} outside 1..={bound}")));
                }
                Ok(v - 1)
            };
            let (i, j) = (index(0, rows)?, index(1, cols)?);
            let v = if pattern { 1.0 } else { parse_value(fields[2], line, 3)? };
            mirror(&mut a, i, j, v);
            seen += 1;
        }
        if seen != nnz {
            return Err(ParseError::at(Location::File, format!("expected {nnz} entries, found {seen}")));
        }
    } else {
        // Column-major; symmetric storage lists only the lower triangle.
        let positions: Vec<(usize, usize)> = match symmetry {
            Symmetry::General => (0..cols).flat_map(|j| (0..rows).map(move |i| (i, j))).collect(),
            Symmetry::Symmetric => (0..cols).flat_map(|j| (j..rows).map(move |i| (i, j))).collect(),
            Symmetry::SkewSymmetric => (0..cols).flat_map(|j| (j + 1..rows).map(move |i| (i, j))).collect(),
        };
        let mut next = positions.iter();
        for (line, entry) in body.by_ref() {
            for (col, field) in entry.split_whitespace().enumerate() {
                let &(i, j) = next.next().ok_or_else(|| {
                    ParseError::line(line, Some(col + 1), format!("more than {} values", positions.len()))
                })?;
                mirror(&mut a, i, j, parse_value(field, line, col + 1)?);
            }
        }
        let missing = next.count();
        if missing > 0 {
            return Err(ParseError::at(
                Location::File,
                format!("expected {} values, found {}", positions.len(), positions.len() - missing),
            ));
        }
    }
    if let Some((line, _)) = body.next() {
        return Err(ParseError::line(line, None, "unexpected data after the last entry"));
    }
    Ok(a)
}

/// Dense `array real general` layout.
pub fn encode_matrix_market(a: &DenseMatrix) -> String {
    let mut out = format!("%%MatrixMarket matrix array real general\n{} {}\n", a.nrows(), a.ncols());
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            out.push_str(&format!("{:?}\n", a.get(i, j)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sniffing() {
        assert_eq!(Format::sniff(b"SKCM\x01"), Format::Binary);
        assert_eq!(Format::sniff(b"%%MatrixMarket matrix"), Format::MatrixMarket);
        assert_eq!(Format::sniff(b"1,2"), Format::Csv);
        assert_eq!(Format::from_extension(Path::new("a.MTX")), Some(Format::MatrixMarket));
        assert_eq!(Format::from_extension(Path::new("a.dat")), None);
    }

    #[test]
    fn header_layout() {
        let a = DenseMatrix::from_rows(&[&[1.0, 2.0, 3.0]]).unwrap();
        let bytes = encode_binary(&a);
        assert_eq!(&bytes[0..4], b"SKCM");
        assert_eq!(bytes[4..8], [1, 0, 0, 0]);
        assert_eq!(bytes[8..16], 1u64.to_le_bytes());
        assert_eq!(bytes[16..24], 3u64.to_le_bytes());
        assert_eq!(bytes[24..32], 1.0f64.to_le_bytes());
        assert_eq!(bytes.len(), 24 + 24);
    }

    #[test]
    fn symmetric_coordinate_fills_both_triangles() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n% comment\n2 2 2\n1 1 4\n2 1 -1.5\n";
        let a = decode_matrix_market(text).unwrap();
        assert_eq!(a, DenseMatrix::from_rows(&[&[4.0, -1.5], &[-1.5, 0.0]]).unwrap());
    }
}
