//! Raw datasets handled by the simulators and statistics.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    RealVector,
    HaplotypeMatrix,
    Trajectory,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::RealVector => "real-vector",
            Variant::HaplotypeMatrix => "haplotype-matrix",
            Variant::Trajectory => "trajectory",
        })
    }
}

/// A 0/1 matrix of sequences (rows) by segregating sites (columns).
///
/// Columns are stored as bitsets over the rows, which keeps the pairwise
/// site statistics cheap. Every column contains at least one 0 and one 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HaplotypeMatrix {
    sequences: usize,
    words: usize,
    columns: Vec<Vec<u64>>,
}

impl HaplotypeMatrix {
    /// Builds a matrix from column bitsets; bit `r` of a column is the allele of sequence `r`.
    pub fn from_columns(sequences: usize, columns: Vec<Vec<u64>>) -> Result<Self> {
        if sequences == 0 {
            return Err(Error::InvalidDataset("haplotype matrix needs at least one sequence".into()));
        }
        let words = sequences.div_ceil(64);
        for (j, col) in columns.iter().enumerate() {
            if col.len() != words {
                return Err(Error::InvalidDataset(format!("column {j} has {} words, expected {words}", col.len())));
            }
            let derived: u32 = col.iter().map(|w| w.count_ones()).sum();
            let tail = sequences % 64;
            if tail != 0 && col[words - 1] >> tail != 0 {
                return Err(Error::InvalidDataset(format!("column {j} has bits beyond row {sequences}")));
            }
            if derived == 0 || derived as usize == sequences {
                return Err(Error::InvalidDataset(format!("column {j} is not segregating")));
            }
        }
        Ok(Self { sequences, words, columns })
    }

    /// Builds a matrix from rows of 0/1 values.
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let sequences = rows.len();
        let sites = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != sites) {
            return Err(Error::InvalidDataset("ragged haplotype rows".into()));
        }
        let words = sequences.div_ceil(64).max(1);
        let mut columns = vec![vec![0u64; words]; sites];
        for (r, row) in rows.iter().enumerate() {
            for (j, &allele) in row.iter().enumerate() {
                match allele {
                    0 => {}
                    1 => columns[j][r / 64] |= 1 << (r % 64),
                    other => return Err(Error::InvalidDataset(format!("allele {other} is not 0/1"))),
                }
            }
        }
        Self::from_columns(sequences, columns)
    }

    pub fn sequences(&self) -> usize {
        self.sequences
    }

    pub fn sites(&self) -> usize {
        self.columns.len()
    }

    pub fn words(&self) -> usize {
        self.words
    }

    pub fn column(&self, j: usize) -> &[u64] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<u64>] {
        &self.columns
    }

    pub fn allele(&self, row: usize, site: usize) -> u8 {
        ((self.columns[site][row / 64] >> (row % 64)) & 1) as u8
    }

    /// Number of sequences carrying the derived allele at `site`.
    pub fn derived_count(&self, site: usize) -> usize {
        self.columns[site].iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Rows packed as bitsets over the sites.
    pub fn row_keys(&self) -> Vec<Vec<u64>> {
        let site_words = self.sites().div_ceil(64).max(1);
        let mut rows = vec![vec![0u64; site_words]; self.sequences];
        for (j, col) in self.columns.iter().enumerate() {
            for (r, row) in rows.iter_mut().enumerate() {
                if (col[r / 64] >> (r % 64)) & 1 == 1 {
                    row[j / 64] |= 1 << (j % 64);
                }
            }
        }
        rows
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetKind {
    RealVector(Vec<f64>),
    HaplotypeMatrix(HaplotypeMatrix),
    /// Planar positions r_0, ..., r_T.
    Trajectory(Vec<[f64; 2]>),
}

/// A raw dataset plus the id that keys its noise substreams.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub id: u64,
    pub kind: DatasetKind,
}

impl Dataset {
    pub fn real_vector(id: u64, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidDataset("real vector is empty".into()));
        }
        Ok(Self { id, kind: DatasetKind::RealVector(values) })
    }

    pub fn haplotypes(id: u64, matrix: HaplotypeMatrix) -> Self {
        Self { id, kind: DatasetKind::HaplotypeMatrix(matrix) }
    }

    pub fn trajectory(id: u64, points: Vec<[f64; 2]>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidDataset("trajectory needs at least two points".into()));
        }
        Ok(Self { id, kind: DatasetKind::Trajectory(points) })
    }

    pub fn variant(&self) -> Variant {
        match self.kind {
            DatasetKind::RealVector(_) => Variant::RealVector,
            DatasetKind::HaplotypeMatrix(_) => Variant::HaplotypeMatrix,
            DatasetKind::Trajectory(_) => Variant::Trajectory,
        }
    }

    pub fn as_real_vector(&self) -> Option<&[f64]> {
        match &self.kind {
            DatasetKind::RealVector(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_haplotypes(&self) -> Option<&HaplotypeMatrix> {
        match &self.kind {
            DatasetKind::HaplotypeMatrix(m) => Some(m),
            _ => None,
        }
    }

    pub fn as_trajectory(&self) -> Option<&[[f64; 2]]> {
        match &self.kind {
            DatasetKind::Trajectory(t) => Some(t),
            _ => None,
        }
    }

    /// Draws one bootstrap replicate with the given id.
    ///
    /// Real vectors resample entries, haplotype matrices resample sites, and
    /// trajectories resample step increments before re-summing them from the
    /// original start point.
    pub fn bootstrap<R: Rng + ?Sized>(&self, id: u64, rng: &mut R) -> Result<Dataset> {
        let kind = match &self.kind {
            DatasetKind::RealVector(v) => {
                DatasetKind::RealVector((0..v.len()).map(|_| v[rng.random_range(0..v.len())]).collect())
            }
            DatasetKind::HaplotypeMatrix(m) => {
                if m.sites() == 0 {
                    DatasetKind::HaplotypeMatrix(m.clone())
                } else {
                    let columns = (0..m.sites())
                        .map(|_| m.column(rng.random_range(0..m.sites())).to_vec())
                        .collect();
                    DatasetKind::HaplotypeMatrix(HaplotypeMatrix::from_columns(m.sequences(), columns)?)
                }
            }
            DatasetKind::Trajectory(t) => {
                let steps: Vec<[f64; 2]> =
                    t.windows(2).map(|w| [w[1][0] - w[0][0], w[1][1] - w[0][1]]).collect();
                let mut pos = t[0];
                let mut out = Vec::with_capacity(t.len());
                out.push(pos);
                for _ in 0..steps.len() {
                    let s = steps[rng.random_range(0..steps.len())];
                    pos = [pos[0] + s[0], pos[1] + s[1]];
                    out.push(pos);
                }
                DatasetKind::Trajectory(out)
            }
        };
        Ok(Dataset { id, kind })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn rejects_monomorphic_columns() {
        assert!(HaplotypeMatrix::from_rows(&[vec![1, 0], vec![1, 1]]).is_err());
        assert!(HaplotypeMatrix::from_rows(&[vec![0, 0], vec![1, 1]]).is_ok());
    }

    #[test]
    fn row_keys_roundtrip_alleles() {
        let rows = vec![vec![1, 0, 1], vec![0, 1, 1], vec![0, 0, 0]];
        let m = HaplotypeMatrix::from_rows(&rows).unwrap();
        for (r, row) in rows.iter().enumerate() {
            for (j, &a) in row.iter().enumerate() {
                assert_eq!(m.allele(r, j), a);
            }
        }
        let keys = m.row_keys();
        assert_eq!(keys[0][0], 0b101);
        assert_eq!(keys[1][0], 0b110);
        assert_eq!(keys[2][0], 0);
    }

    #[test]
    fn small_datasets_rejected() {
        assert!(Dataset::real_vector(0, vec![]).is_err());
        assert!(Dataset::trajectory(0, vec![[0.0, 0.0]]).is_err());
    }

    #[test]
    fn trajectory_bootstrap_keeps_start_and_step_multiset() {
        let d = Dataset::trajectory(1, vec![[1.0, 1.0], [2.0, 1.0], [2.0, 3.0], [0.0, 3.0]]).unwrap();
        let b = d.bootstrap(2, &mut stream(1, &[])).unwrap();
        let t = b.as_trajectory().unwrap();
        assert_eq!(t.len(), 4);
        assert_eq!(t[0], [1.0, 1.0]);
        let allowed = [[1.0, 0.0], [0.0, 2.0], [-2.0, 0.0]];
        for w in t.windows(2) {
            let s = [w[1][0] - w[0][0], w[1][1] - w[0][1]];
            assert!(allowed.contains(&s));
        }
    }
}
