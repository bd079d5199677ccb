use crate::error::{Error, Result};

fn max_abs(values: &[f32]) -> f32 {
    values.iter().fold(0.0f32, |m, v| m.max(v.abs()))
}

/// `rows` dense vectors of dimension `dim`, row-major, with the largest
/// absolute coordinate cached for reward-range estimates.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorSet {
    rows: usize,
    dim: usize,
    data: Vec<f32>,
    coord_bound: f32,
}

impl VectorSet {
    pub fn new(rows: usize, dim: usize, data: Vec<f32>) -> Result<Self> {
        if rows == 0 || dim == 0 {
            return Err(Error::Config(format!(
                "vector set must be non-empty, got {rows}x{dim}"
            )));
        }
        if data.len() != rows * dim {
            return Err(Error::Config(format!(
                "{rows}x{dim} vector set needs {} values, got {}",
                rows * dim,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Config(format!(
                "non-finite coordinate at row {}, column {}",
                pos / dim,
                pos % dim
            )));
        }
        let coord_bound = max_abs(&data);
        Ok(VectorSet {
            rows,
            dim,
            data,
            coord_bound,
        })
    }

    pub fn from_rows(rows: &[Vec<f32>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != dim) {
            return Err(Error::Config(format!(
                "row {bad} has {} values, expected {dim}",
                rows[bad].len()
            )));
        }
        VectorSet::new(rows.len(), dim, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f32> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    /// `max |v_i^(j)|` over all entries.
    pub fn coord_bound(&self) -> f32 {
        self.coord_bound
    }

    pub fn set(&mut self, row: usize, col: usize, value: f32) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::Config(format!("non-finite coordinate {value}")));
        }
        let slot = &mut self.data[row * self.dim + col];
        let old = *slot;
        *slot = value;
        if value.abs() >= self.coord_bound {
            self.coord_bound = value.abs();
        } else if old.abs() == self.coord_bound {
            self.coord_bound = max_abs(&self.data);
        }
        Ok(())
    }

    pub fn query(&self, i: usize) -> Query {
        Query::new(self.row(i).to_vec()).expect("rows are finite and non-empty")
    }
}

/// A query vector and its largest absolute coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct Query {
    values: Vec<f32>,
    coord_bound: f32,
}

impl Query {
    pub fn new(values: Vec<f32>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Config("query must be non-empty".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("query has a non-finite coordinate".into()));
        }
        let coord_bound = max_abs(&values);
        Ok(Query {
            values,
            coord_bound,
        })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn coord_bound(&self) -> f32 {
        self.coord_bound
    }

    pub fn ensure_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::Config(format!(
                "query has dimension {}, vectors have dimension {dim}",
                self.dim()
            )));
        }
        Ok(())
    }
}

/// `q . v` accumulated in double precision, coordinates in order.
pub fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x as f64 * y as f64).sum()
}
