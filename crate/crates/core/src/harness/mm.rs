//! Matrix Market coordinate files and plain vector files.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

/// Reads a `matrix coordinate real|integer general|symmetric` file.
/// Symmetric storage is expanded to the full matrix.
pub fn read_matrix_market(path: &Path) -> Result<SparseMatrix> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix_market(&text, path)
}

/// Parses Matrix Market text; `path` is only used in error messages.
pub fn parse_matrix_market(text: &str, path: &Path) -> Result<SparseMatrix> {
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l));
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "empty file"))?;
    let symmetry = parse_header(header).map_err(|m| Error::parse(path, 1, m))?;

    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_line, size) = body
        .next()
        .ok_or_else(|| Error::parse(path, 1, "missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(str::parse)
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::parse(path, size_line, format!("bad size line '{size}'")))?;
    let [rows, cols, nnz] = dims[..] else {
        return Err(Error::parse(
            path,
            size_line,
            "size line needs rows, cols and entry count",
        ));
    };
    if symmetry == Symmetry::Symmetric && rows != cols {
        return Err(Error::parse(
            path,
            size_line,
            "symmetric storage needs a square matrix",
        ));
    }

    let mut triplets = Vec::with_capacity(nnz * 2);
    let mut count = 0;
    for (line, entry) in body {
        count += 1;
        if count > nnz {
            return Err(Error::parse(
                path,
                line,
                format!("more than the declared {nnz} entries"),
            ));
        }
        let fields: Vec<&str> = entry.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::parse(path, line, "expected 'row col value'"));
        }
        let index = |s: &str, bound: usize, what: &str| -> Result<usize> {
            let k: usize = s
                .parse()
                .map_err(|_| Error::parse(path, line, format!("bad {what} index '{s}'")))?;
            if k == 0 || k > bound {
                return Err(Error::parse(
                    path,
                    line,
                    format!("{what} index {k} outside 1..={bound} (indices are 1-based)"),
                ));
            }
            Ok(k - 1)
        };
        let i = index(fields[0], rows, "row")?;
        let j = index(fields[1], cols, "column")?;
        let v: f64 = fields[2]
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| Error::parse(path, line, format!("bad value '{}'", fields[2])))?;
        if symmetry == Symmetry::Symmetric {
            if j > i {
                return Err(Error::parse(
                    path,
                    line,
                    "symmetric storage lists the lower triangle only",
                ));
            }
            if i != j {
                triplets.push((j, i, v));
            }
        }
        triplets.push((i, j, v));
    }
    if count != nnz {
        return Err(Error::parse(
            path,
            text.lines().count(),
            format!("declared {nnz} entries, found {count}"),
        ));
    }
    SparseMatrix::from_triplets(rows, cols, triplets)
}

fn parse_header(header: &str) -> std::result::Result<Symmetry, String> {
    let tokens: Vec<String> = header
        .split_whitespace()
        .map(str::to_ascii_lowercase)
        .collect();
    match tokens.iter().map(String::as_str).collect::<Vec<_>>()[..] {
        ["%%matrixmarket", "matrix", "coordinate", "real" | "integer", sym] => match sym {
            "general" => Ok(Symmetry::General),
            "symmetric" => Ok(Symmetry::Symmetric),
            other => Err(format!("unsupported symmetry '{other}'")),
        },
        _ => Err(format!(
            "expected '%%MatrixMarket matrix coordinate real general|symmetric', got '{header}'"
        )),
    }
}

/// Writes `a` in general coordinate format. Values use the shortest
/// representation that reads back to the same `f64`.
pub fn write_matrix_market(path: &Path, a: &SparseMatrix) -> Result<()> {
    let mut out = String::with_capacity(32 * (a.nnz() + 2));
    out.push_str("%%MatrixMarket matrix coordinate real general\n");
    out.push_str(&format!("{} {} {}\n", a.n_rows(), a.n_cols(), a.nnz()));
    for (i, j, v) in a.iter() {
        out.push_str(&format!("{} {} {v:?}\n", i + 1, j + 1));
    }
    write_text(path, &out)
}

/// Reads one real per line; blank lines and `#` comments are skipped.
pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
        .map(|(k, l)| {
            l.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::parse(path, k + 1, format!("bad value '{}'", l.trim())))
        })
        .collect()
}

pub fn write_vector(path: &Path, x: &[f64]) -> Result<()> {
    let text: String = x.iter().map(|v| format!("{v:?}\n")).collect();
    write_text(path, &text)
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}
