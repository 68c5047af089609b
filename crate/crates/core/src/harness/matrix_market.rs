use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::operators::CsrMatrix;

/// Reads a real coordinate Matrix Market file into CSR.
///
/// `general` and `symmetric` storage are accepted; symmetric files are
/// expanded to both triangles. Duplicate entries are summed.
pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<CsrMatrix> {
    let file = File::open(path)?;
    parse_matrix_market(BufReader::new(file))
}

/// Same as [`read_matrix_market`] for any buffered reader.
///
/// ```
/// use sqd_krylov::parse_matrix_market;
///
/// let text = "%%MatrixMarket matrix coordinate real symmetric\n\
///             % a comment\n\
///             2 2 3\n1 1 2.0\n2 1 1.0\n2 2 3.0\n";
/// let a = parse_matrix_market(text.as_bytes())?;
/// assert_eq!(a.to_dense().as_slice(), &[2.0, 1.0, 1.0, 3.0]);
/// # Ok::<(), sqd_krylov::Error>(())
/// ```
pub fn parse_matrix_market<R: BufRead>(reader: R) -> Result<CsrMatrix> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Format("empty file".into()))?;
    let header = header?;
    let symmetric = parse_header(&header)?;

    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets = Vec::new();
    let mut seen = 0usize;
    let mut last_line = 1;
    for (lineno, line) in lines {
        last_line = lineno;
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = t.split_whitespace().collect();
        let Some((nrows, ncols, nnz)) = size else {
            if fields.len() != 3 {
                return Err(parse_err(lineno, "size line must hold rows, columns and entries"));
            }
            let rows = parse_usize(fields[0], lineno)?;
            let cols = parse_usize(fields[1], lineno)?;
            let nnz = parse_usize(fields[2], lineno)?;
            if rows == 0 || cols == 0 {
                return Err(parse_err(lineno, "dimensions must be positive"));
            }
            if symmetric && rows != cols {
                return Err(parse_err(lineno, "symmetric matrix must be square"));
            }
            size = Some((rows, cols, nnz));
            triplets.reserve(if symmetric { 2 * nnz } else { nnz });
            continue;
        };
        if fields.len() != 3 {
            return Err(parse_err(lineno, "entry must hold row, column and value"));
        }
        if seen == nnz {
            return Err(parse_err(lineno, &format!("more than the declared {nnz} entries")));
        }
        let i = parse_usize(fields[0], lineno)?;
        let j = parse_usize(fields[1], lineno)?;
        let v: f64 = fields[2]
            .parse()
            .map_err(|_| parse_err(lineno, &format!("invalid value {:?}", fields[2])))?;
        if !v.is_finite() {
            return Err(parse_err(lineno, "non-finite value"));
        }
        if i == 0 || j == 0 || i > nrows || j > ncols {
            return Err(parse_err(
                lineno,
                &format!("index ({i}, {j}) outside the declared {nrows}x{ncols} bounds"),
            ));
        }
        seen += 1;
        triplets.push((i - 1, j - 1, v));
        if symmetric && i != j {
            triplets.push((j - 1, i - 1, v));
        }
    }

    let (nrows, ncols, nnz) = size.ok_or_else(|| Error::Format("missing size line".into()))?;
    if seen != nnz {
        return Err(Error::Parse {
            line: last_line,
            message: format!("declared {nnz} entries but found {seen}"),
        });
    }
    CsrMatrix::from_triplets(nrows, ncols, &triplets)
}

// Returns whether the storage is symmetric.
fn parse_header(header: &str) -> Result<bool> {
    let lower = header.trim().to_ascii_lowercase();
    let fields: Vec<&str> = lower.split_whitespace().collect();
    let bad = || Error::Format(header.trim().to_string());
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" || fields[2] != "coordinate" {
        return Err(bad());
    }
    if fields[3] != "real" && fields[3] != "integer" {
        return Err(bad());
    }
    match fields[4] {
        "general" => Ok(false),
        "symmetric" => Ok(true),
        _ => Err(bad()),
    }
}

fn parse_usize(s: &str, line: usize) -> Result<usize> {
    s.parse().map_err(|_| parse_err(line, &format!("invalid integer {s:?}")))
}

fn parse_err(line: usize, message: &str) -> Error {
    Error::Parse {
        line,
        message: message.to_string(),
    }
}

/// Writes `a` as a `general` real coordinate file with 17 significant
/// digits, so [`read_matrix_market`] gives back the same matrix.
pub fn write_matrix_market(path: impl AsRef<Path>, a: &CsrMatrix) -> Result<()> {
    let mut w = std::io::BufWriter::new(File::create(path)?);
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", a.nrows(), a.ncols(), a.nnz())?;
    for (i, j, v) in a.triplets() {
        writeln!(w, "{} {} {:.16e}", i + 1, j + 1, v)?;
    }
    w.flush()?;
    Ok(())
}
