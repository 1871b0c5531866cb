//! Exact nearest-neighbour search over d-dimensional point clouds.
//!
//! Every query answers in the canonical order: ascending Euclidean distance,
//! with equal distances broken by ascending sample index. The tree index and
//! the linear scan produce bitwise identical results under that order.

mod kdtree;

use std::cmp::Ordering;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use kdtree::{NeighborIndex, QueryScratch};

/// A sample `X_1, …, X_n` of points in ℝ^d, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud<T> {
    coords: Vec<T>,
    dim: usize,
}

impl<T: Scalar> PointCloud<T> {
    /// Builds a cloud from a flat row-major buffer of `n * dim` coordinates.
    pub fn from_flat(dim: usize, coords: Vec<T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if coords.is_empty() {
            return Err(Error::EmptyCloud);
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: coords.len() % dim,
            });
        }
        if let Some(pos) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite { index: pos / dim });
        }
        Ok(Self { coords, dim })
    }

    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let first = rows.first().ok_or(Error::EmptyCloud)?;
        let dim = first.as_ref().len();
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        let mut coords = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            coords.extend_from_slice(row);
        }
        Self::from_flat(dim, coords)
    }

    /// One-dimensional cloud from scalar values.
    pub fn from_values(values: &[T]) -> Result<Self> {
        Self::from_flat(1, values.to_vec())
    }

    /// Reads one point per CSV row. A leading row that does not parse as
    /// numbers is treated as a header and skipped.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut coords = Vec::new();
        let mut dim = None;
        for (row, record) in rdr.records().enumerate() {
            let record = record?;
            let parsed: std::result::Result<Vec<f64>, _> =
                record.iter().map(|f| f.parse::<f64>()).collect();
            let values = match parsed {
                Ok(v) => v,
                Err(_) if row == 0 => continue,
                Err(e) => {
                    return Err(Error::invalid("csv", format!("row {}: {e}", row + 1)));
                }
            };
            match dim {
                None => dim = Some(values.len()),
                Some(d) if d != values.len() => {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        found: values.len(),
                    })
                }
                Some(_) => {}
            }
            coords.extend(values.into_iter().map(T::from_f64_lossy));
        }
        Self::from_flat(dim.ok_or(Error::EmptyCloud)?, coords)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(std::io::BufReader::new(file))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[T] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[T]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[T] {
        &self.coords
    }

    /// Multiplies every coordinate by `factor`.
    pub fn scaled(&self, factor: T) -> Self {
        Self {
            coords: self.coords.iter().map(|&c| c * factor).collect(),
            dim: self.dim,
        }
    }

    pub(crate) fn check_query(&self, x: &[T]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_k(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.len() {
            return Err(Error::NeighborCountOutOfRange { k, n: self.len() });
        }
        Ok(())
    }
}

/// Euclidean distance, summed in coordinate order.
///
/// Both the tree and the linear scan go through this function so that their
/// distances agree bit for bit.
#[inline]
pub fn euclidean<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut acc = T::zero();
    for (&u, &v) in a.iter().zip(b) {
        let diff = u - v;
        acc = acc + diff * diff;
    }
    acc.sqrt()
}

/// The first `k` neighbours of a query point in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborQueryResult<T> {
    pub indices: Vec<usize>,
    pub distances: Vec<T>,
}

impl<T: Scalar> NeighborQueryResult<T> {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// `R_k(x)`: distance to the k-th neighbour.
    pub fn radius(&self) -> T {
        *self.distances.last().expect("query results are nonempty")
    }
}

/// Canonical neighbour order: by distance, then by sample index.
#[inline]
pub(crate) fn canonical_cmp<T: Scalar>(a: (T, usize), b: (T, usize)) -> Ordering {
    a.0.partial_cmp(&b.0)
        .unwrap_or(Ordering::Equal)
        .then(a.1.cmp(&b.1))
}

/// Exhaustive reference search: distance to every point, sorted canonically.
pub fn linear_scan<T: Scalar>(
    cloud: &PointCloud<T>,
    x: &[T],
    k: usize,
) -> Result<NeighborQueryResult<T>> {
    cloud.check_query(x)?;
    cloud.check_k(k)?;
    let mut all: Vec<(T, usize)> = cloud
        .iter()
        .enumerate()
        .map(|(i, p)| (euclidean(x, p), i))
        .collect();
    all.sort_unstable_by(|a, b| canonical_cmp(*a, *b));
    all.truncate(k);
    Ok(NeighborQueryResult {
        indices: all.iter().map(|c| c.1).collect(),
        distances: all.iter().map(|c| c.0).collect(),
    })
}
