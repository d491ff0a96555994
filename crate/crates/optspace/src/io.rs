//! MatrixMarket coordinate I/O. Files are 1-based; indices are converted
//! to the 0-based internal convention only here at the boundary.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::sparse::ObservedMatrix;

const HEADER: &str = "%%MatrixMarket matrix coordinate real general";

pub fn read_matrix_market(path: &Path) -> Result<ObservedMatrix> {
    let file = File::open(path)?;
    let mut lines = BufReader::new(file).lines();

    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty file".into()))??;
    if !header.trim_start().starts_with("%%MatrixMarket") {
        return Err(Error::Parse(format!("bad header line: {header}")));
    }
    let lowered = header.to_ascii_lowercase();
    for token in ["matrix", "coordinate", "real", "general"] {
        if !lowered.contains(token) {
            return Err(Error::Parse(format!(
                "unsupported MatrixMarket flavor (need '{HEADER}'): {header}"
            )));
        }
    }

    // skip comment lines, then read the size line
    let mut size_line = None;
    for line in lines.by_ref() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        size_line = Some(line);
        break;
    }
    let size_line = size_line.ok_or_else(|| Error::Parse("missing size line".into()))?;
    let dims: Vec<usize> = size_line
        .split_whitespace()
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad size line: {size_line}")))
        })
        .collect::<Result<_>>()?;
    let [m, n, nnz] = dims[..] else {
        return Err(Error::Parse(format!("bad size line: {size_line}")));
    };

    let mut entries = Vec::with_capacity(nnz);
    for line in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let mut it = t.split_whitespace();
        let (Some(is), Some(js), Some(vs)) = (it.next(), it.next(), it.next()) else {
            return Err(Error::Parse(format!("bad entry line: {line}")));
        };
        let i: usize = is
            .parse()
            .map_err(|_| Error::Parse(format!("bad row index: {is}")))?;
        let j: usize = js
            .parse()
            .map_err(|_| Error::Parse(format!("bad col index: {js}")))?;
        let v: f64 = vs
            .parse()
            .map_err(|_| Error::Parse(format!("bad value: {vs}")))?;
        if i == 0 || j == 0 {
            return Err(Error::Parse(format!(
                "MatrixMarket indices are 1-based, got ({i}, {j})"
            )));
        }
        entries.push((i - 1, j - 1, v));
    }
    if entries.len() != nnz {
        return Err(Error::Parse(format!(
            "size line declared {nnz} entries, found {}",
            entries.len()
        )));
    }
    ObservedMatrix::new(m, n, entries)
}

pub fn write_matrix_market(path: &Path, obs: &ObservedMatrix) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{HEADER}")?;
    writeln!(w, "{} {} {}", obs.m(), obs.n(), obs.nnz())?;
    for &(i, j, v) in obs.entries() {
        writeln!(w, "{} {} {:.17e}", i + 1, j + 1, v)?;
    }
    Ok(())
}
