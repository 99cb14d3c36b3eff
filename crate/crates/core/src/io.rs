//! Plain-text dumps of datasets.
//!
//! Haplotype matrices: a header line `N N_S` followed by one line of `0`/`1`
//! characters per sequence. Trajectories: CSV with header `t,x,y`. Real
//! vectors: one value per line.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::data::{Dataset, DatasetKind, HaplotypeMatrix};
use crate::error::{Error, Result};

pub fn format_dataset(data: &Dataset) -> String {
    let mut out = String::new();
    match &data.kind {
        DatasetKind::RealVector(v) => {
            for x in v {
                writeln!(out, "{x}").unwrap();
            }
        }
        DatasetKind::HaplotypeMatrix(m) => {
            writeln!(out, "{} {}", m.sequences(), m.sites()).unwrap();
            for r in 0..m.sequences() {
                out.extend((0..m.sites()).map(|j| if m.allele(r, j) == 1 { '1' } else { '0' }));
                out.push('\n');
            }
        }
        DatasetKind::Trajectory(t) => {
            out.push_str("t,x,y\n");
            for (i, p) in t.iter().enumerate() {
                writeln!(out, "{i},{},{}", p[0], p[1]).unwrap();
            }
        }
    }
    out
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidDataset(msg.into())
}

pub fn parse_haplotypes(text: &str, id: u64) -> Result<Dataset> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| bad("empty haplotype file"))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| bad(format!("bad header `{header}`"))))
        .collect::<Result<_>>()?;
    let [n, sites] = dims[..] else {
        return Err(bad(format!("header must be `N N_S`, got `{header}`")));
    };
    let rows: Vec<Vec<u8>> = lines
        .enumerate()
        .map(|(i, l)| {
            l.trim()
                .bytes()
                .map(|b| match b {
                    b'0' => Ok(0),
                    b'1' => Ok(1),
                    _ => Err(bad(format!("line {}: unexpected character `{}`", i + 2, b as char))),
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    if rows.len() != n || rows.iter().any(|r| r.len() != sites) {
        return Err(bad(format!("expected {n} rows of {sites} sites")));
    }
    let m = if sites == 0 {
        HaplotypeMatrix::from_columns(n, Vec::new())?
    } else {
        HaplotypeMatrix::from_rows(&rows)?
    };
    Ok(Dataset::haplotypes(id, m))
}

pub fn parse_trajectory(text: &str, id: u64) -> Result<Dataset> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next().map(str::trim) {
        Some("t,x,y") => {}
        other => return Err(bad(format!("trajectory header must be `t,x,y`, got {other:?}"))),
    }
    let points = lines
        .enumerate()
        .map(|(i, l)| {
            let f: Vec<&str> = l.split(',').collect();
            let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(format!("line {}: bad number `{s}`", i + 2)));
            match f[..] {
                [_, x, y] => Ok([num(x)?, num(y)?]),
                _ => Err(bad(format!("line {}: expected 3 fields", i + 2))),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::trajectory(id, points)
}

pub fn parse_real_vector(text: &str, id: u64) -> Result<Dataset> {
    let values = text
        .split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| bad(format!("bad number `{t}`"))))
        .collect::<Result<Vec<_>>>()?;
    Dataset::real_vector(id, values)
}

pub fn write_dataset(path: &Path, data: &Dataset) -> Result<()> {
    fs::write(path, format_dataset(data))?;
    Ok(())
}

/// Reads a dump; the format is inferred from the first line.
pub fn read_dataset(path: &Path, id: u64) -> Result<Dataset> {
    let text = fs::read_to_string(path)?;
    let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("").trim();
    if first == "t,x,y" {
        parse_trajectory(&text, id)
    } else if first.split_whitespace().count() == 2 && !first.contains('.') {
        parse_haplotypes(&text, id)
    } else {
        parse_real_vector(&text, id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haplotype_roundtrip() {
        let m = HaplotypeMatrix::from_rows(&[vec![1, 0, 1], vec![0, 1, 0]]).unwrap();
        let d = Dataset::haplotypes(3, m);
        let text = format_dataset(&d);
        assert_eq!(text, "2 3\n101\n010\n");
        assert_eq!(parse_haplotypes(&text, 3).unwrap(), d);
    }

    #[test]
    fn trajectory_roundtrip() {
        let d = Dataset::trajectory(1, vec![[0.0, 0.0], [1.5, -2.0]]).unwrap();
        let text = format_dataset(&d);
        assert!(text.starts_with("t,x,y\n0,0,0\n"));
        assert_eq!(parse_trajectory(&text, 1).unwrap(), d);
    }

    #[test]
    fn real_vector_roundtrip_through_files() {
        let dir = std::env::temp_dir().join(format!("abcsuff-io-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("y.txt");
        let d = Dataset::real_vector(0, vec![0.1, -2.5, 3.25]).unwrap();
        write_dataset(&path, &d).unwrap();
        assert_eq!(read_dataset(&path, 0).unwrap(), d);
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn malformed_inputs() {
        assert!(parse_haplotypes("2 2\n10\n1x\n", 0).is_err());
        assert!(parse_haplotypes("2 2\n10\n", 0).is_err());
        assert!(parse_trajectory("x,y\n1,2\n", 0).is_err());
        assert!(parse_real_vector("", 0).is_err());
    }
}
