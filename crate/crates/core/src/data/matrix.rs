use std::fmt;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::DataError;

/// Where a column came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ColumnOrigin {
    Original,
    /// Out-of-fold probability of `class_index` produced by `model_id`.
    Oof { model_id: String, class_index: usize },
    /// Output unit of a learned compressor fitted at `level`.
    Compressed { level: usize, method: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMeta {
    pub name: String,
    pub origin: ColumnOrigin,
}

impl ColumnMeta {
    pub fn original(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            origin: ColumnOrigin::Original,
        }
    }
}

/// Dense row-major table of finite reals with per-column provenance.
#[derive(Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    meta: Vec<ColumnMeta>,
}

impl fmt::Debug for FeatureMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FeatureMatrix")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .finish_non_exhaustive()
    }
}

impl FeatureMatrix {
    pub fn new(
        rows: usize,
        cols: usize,
        values: Vec<f64>,
        meta: Vec<ColumnMeta>,
    ) -> Result<Self, DataError> {
        if values.len() != rows * cols || meta.len() != cols {
            return Err(DataError::ShapeMismatch {
                expected: format!("{rows}x{cols} with {cols} column names"),
                found: format!("{} values, {} column names", values.len(), meta.len()),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(DataError::NonFinite {
                row: pos / cols.max(1),
                col: pos % cols.max(1),
            });
        }
        Ok(Self {
            rows,
            cols,
            values,
            meta,
        })
    }

    /// Build from rows, naming columns `x0, x1, ...`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, DataError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(DataError::ShapeMismatch {
                expected: format!("rows of width {cols}"),
                found: "ragged rows".into(),
            });
        }
        let values = rows.iter().flatten().copied().collect();
        let meta = (0..cols)
            .map(|j| ColumnMeta::original(format!("x{j}")))
            .collect();
        Self::new(rows.len(), cols, values, meta)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn column_meta(&self) -> &[ColumnMeta] {
        &self.meta
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.cols..(row + 1) * self.cols]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        ArrayView2::from_shape((self.rows, self.cols), &self.values)
            .expect("shape checked at construction")
    }

    pub fn select_rows(&self, indices: &[usize]) -> FeatureMatrix {
        let mut values = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            rows: indices.len(),
            cols: self.cols,
            values,
            meta: self.meta.clone(),
        }
    }

    pub fn select_columns(&self, indices: &[usize]) -> FeatureMatrix {
        let mut values = Vec::with_capacity(indices.len() * self.rows);
        for r in 0..self.rows {
            let row = self.row(r);
            values.extend(indices.iter().map(|&j| row[j]));
        }
        FeatureMatrix {
            rows: self.rows,
            cols: indices.len(),
            values,
            meta: indices.iter().map(|&j| self.meta[j].clone()).collect(),
        }
    }

    /// Horizontal concatenation `[self, right]`.
    pub fn hconcat(&self, right: &FeatureMatrix) -> Result<FeatureMatrix, DataError> {
        if self.rows != right.rows {
            return Err(DataError::ShapeMismatch {
                expected: format!("{} rows", self.rows),
                found: format!("{} rows", right.rows),
            });
        }
        let cols = self.cols + right.cols;
        let mut values = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            values.extend_from_slice(self.row(r));
            values.extend_from_slice(right.row(r));
        }
        let mut meta = self.meta.clone();
        meta.extend(right.meta.iter().cloned());
        Ok(FeatureMatrix {
            rows: self.rows,
            cols,
            values,
            meta,
        })
    }

    /// Replace column metadata, keeping the values.
    pub fn with_meta(mut self, meta: Vec<ColumnMeta>) -> Result<Self, DataError> {
        if meta.len() != self.cols {
            return Err(DataError::ShapeMismatch {
                expected: format!("{} column names", self.cols),
                found: format!("{}", meta.len()),
            });
        }
        self.meta = meta;
        Ok(self)
    }
}
