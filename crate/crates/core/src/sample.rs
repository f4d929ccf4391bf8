//! Immutable i.i.d. samples and comma-delimited ingestion.

use std::path::Path;
use std::sync::Arc;

use crate::error::{ElError, Result};
use crate::model::EstimatingModel;

/// `n` observations in `R^d`, stored row-major. Cloning shares the buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    n: usize,
    d: usize,
    data: Arc<[f64]>,
}

impl Sample {
    pub fn from_flat(d: usize, data: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(ElError::InvalidDimension("observation dimension must be positive".into()));
        }
        if !data.len().is_multiple_of(d) {
            return Err(ElError::InvalidDimension(format!(
                "{} values cannot be split into rows of width {d}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(ElError::InvalidArgument("sample contains non-finite values".into()));
        }
        Ok(Sample { n: data.len() / d, d, data: data.into() })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let d = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * d);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != d {
                return Err(ElError::InvalidDimension(format!(
                    "row {i} has {} fields, expected {d}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Self::from_flat(d, data)
    }

    /// Univariate sample.
    pub fn from_scalars(values: &[f64]) -> Result<Self> {
        Self::from_flat(1, values.to_vec())
    }

    /// Parse comma-delimited text: one observation per line, an optional
    /// leading header line starting with `#`, blank lines ignored.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut d = None;
        let mut data = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut width = 0;
            for field in line.split(',') {
                let field = field.trim();
                let v: f64 = field.parse().map_err(|_| ElError::Parse {
                    line: line_no,
                    message: format!("cannot parse {field:?} as a number"),
                })?;
                if !v.is_finite() {
                    return Err(ElError::Parse {
                        line: line_no,
                        message: format!("non-finite value {field:?}"),
                    });
                }
                data.push(v);
                width += 1;
            }
            match d {
                None => d = Some(width),
                Some(w) if w != width => {
                    return Err(ElError::Parse {
                        line: line_no,
                        message: format!("expected {w} fields, found {width}"),
                    })
                }
                _ => {}
            }
        }
        let d = d.ok_or(ElError::Parse { line: 0, message: "no observations".into() })?;
        Self::from_flat(d, data)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_csv(&text)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.d)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn column_means(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.d];
        for r in self.rows() {
            for (acc, v) in m.iter_mut().zip(r) {
                *acc += v;
            }
        }
        m.iter_mut().for_each(|v| *v /= self.n as f64);
        m
    }

    /// Checks that the sample can be paired with `model`.
    pub fn check_for(&self, model: &EstimatingModel) -> Result<()> {
        if self.d != model.d() {
            return Err(ElError::InvalidDimension(format!(
                "model {} expects observations of dimension {}, sample has {}",
                model.name(),
                model.d(),
                self.d
            )));
        }
        if self.n <= model.q() {
            return Err(ElError::SampleTooSmall { n: self.n, q: model.q() });
        }
        Ok(())
    }

    /// Same observations in a different order.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.n {
            return Err(ElError::InvalidArgument("permutation length mismatch".into()));
        }
        let mut data = Vec::with_capacity(self.data.len());
        for &i in order {
            data.extend_from_slice(self.row(i));
        }
        Self::from_flat(self.d, data)
    }
}
