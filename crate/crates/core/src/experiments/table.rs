use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub x: f64,
    pub values: Vec<f64>,
}

/// Sampled curves sharing one abscissa.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    x_name: String,
    columns: Vec<String>,
    rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn new(x_name: impl Into<String>, columns: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Self {
            x_name: x_name.into(),
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    /// Appends a row; `x` must exceed the previous abscissa.
    pub fn push_row(&mut self, x: f64, values: Vec<f64>) -> Result<()> {
        if values.len() != self.columns.len() {
            return Err(Error::DimensionMismatch {
                expected: self.columns.len(),
                found: values.len(),
            });
        }
        if let Some(last) = self.rows.last() {
            if !(x > last.x) {
                return Err(Error::NotIncreasing(self.rows.len()));
            }
        }
        self.rows.push(SweepRow { x, values });
        Ok(())
    }

    pub fn x_name(&self) -> &str {
        &self.x_name
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[SweepRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn xs(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.x).collect()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r.values[i]).collect())
    }

    /// `(x, y)` pairs for one column.
    pub fn samples(&self, name: &str) -> Option<Vec<(f64, f64)>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| (r.x, r.values[i])).collect())
    }
}

/// Abscissae must be strictly increasing and non-empty.
pub(crate) fn check_abscissae(xs: &[f64]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::EmptySweep);
    }
    for (i, w) in xs.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err(Error::NotIncreasing(i + 1));
        }
    }
    Ok(())
}

/// `points` evenly spaced values from `from` to `to` inclusive.
pub fn linspace(from: f64, to: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![from],
        _ => {
            let step = (to - from) / (points - 1) as f64;
            (0..points)
                .map(|i| if i + 1 == points { to } else { from + step * i as f64 })
                .collect()
        }
    }
}
