use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// One client's input: at most `k` non-zero coordinates out of `d`, each in
/// `[-1, 1]`.
///
/// Entries are kept sorted by coordinate. Explicit zeros are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseVector {
    dim: usize,
    sparsity: usize,
    entries: Vec<(usize, f64)>,
}

impl SparseVector {
    pub fn empty(dim: usize, sparsity: usize) -> Result<Self> {
        Self::new(dim, sparsity, std::iter::empty())
    }

    /// Builds a vector from `(coordinate, value)` pairs. Zero values are
    /// dropped; duplicate coordinates, out-of-range coordinates or values, and
    /// more than `sparsity` non-zeros are rejected.
    pub fn new(
        dim: usize,
        sparsity: usize,
        entries: impl IntoIterator<Item = (usize, f64)>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("dimension must be positive"));
        }
        if sparsity == 0 || sparsity > dim {
            return Err(Error::param(format!(
                "sparsity must be in [1, {dim}], got {sparsity}"
            )));
        }
        let mut map = BTreeMap::new();
        for (coord, value) in entries {
            if coord >= dim {
                return Err(Error::param(format!(
                    "coordinate {coord} outside [0, {dim})"
                )));
            }
            if !(-1.0..=1.0).contains(&value) {
                return Err(Error::param(format!(
                    "value {value} at coordinate {coord} outside [-1, 1]"
                )));
            }
            if map.insert(coord, value).is_some() {
                return Err(Error::param(format!("duplicate coordinate {coord}")));
            }
        }
        let entries: Vec<_> = map.into_iter().filter(|&(_, v)| v != 0.0).collect();
        if entries.len() > sparsity {
            return Err(Error::param(format!(
                "{} non-zeros exceed sparsity {sparsity}",
                entries.len()
            )));
        }
        Ok(SparseVector {
            dim,
            sparsity,
            entries,
        })
    }

    /// A binary vector holding 1.0 at each listed item.
    pub fn from_items(dim: usize, sparsity: usize, items: &[usize]) -> Result<Self> {
        Self::new(dim, sparsity, items.iter().map(|&i| (i, 1.0)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sparsity(&self) -> usize {
        self.sparsity
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn get(&self, coord: usize) -> f64 {
        self.entries
            .binary_search_by_key(&coord, |&(c, _)| c)
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    pub fn items(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|&(c, _)| c)
    }

    pub fn is_binary(&self) -> bool {
        self.entries.iter().all(|&(_, v)| v == 1.0)
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for &(c, v) in &self.entries {
            out[c] = v;
        }
        out
    }

    /// L1 distance to `other`; both must share a dimension.
    pub fn l1_distance(&self, other: &SparseVector) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::param("dimension mismatch"));
        }
        let b = &other.entries;
        let (mut j, mut total) = (0, 0.0);
        for &(c, va) in &self.entries {
            while j < b.len() && b[j].0 < c {
                total += b[j].1.abs();
                j += 1;
            }
            if j < b.len() && b[j].0 == c {
                total += (va - b[j].1).abs();
                j += 1;
            } else {
                total += va.abs();
            }
        }
        total += b[j..].iter().map(|e| e.1.abs()).sum::<f64>();
        Ok(total)
    }
}
