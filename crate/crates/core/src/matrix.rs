use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::galois::{WittRing, W};
use crate::witt::WittVector;

/// Dense matrix over `W_m(F_q)`.
#[derive(Clone)]
pub struct Matrix {
    ring: Arc<WittRing>,
    rows: usize,
    cols: usize,
    data: Vec<W>,
}

impl PartialEq for Matrix {
    fn eq(&self, other: &Self) -> bool {
        *self.ring == *other.ring
            && self.rows == other.rows
            && self.cols == other.cols
            && self.data == other.data
    }
}

impl Eq for Matrix {}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}[", self.ring)?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{:?}", self.get(i, j))?;
            }
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn zeros(ring: &Arc<WittRing>, rows: usize, cols: usize) -> Self {
        Matrix {
            ring: ring.clone(),
            rows,
            cols,
            data: vec![ring.zero(); rows * cols],
        }
    }

    pub fn identity(ring: &Arc<WittRing>, n: usize) -> Self {
        let mut m = Self::zeros(ring, n, n);
        for i in 0..n {
            m.set(i, i, ring.one());
        }
        m
    }

    pub fn diagonal(ring: &Arc<WittRing>, diag: &[W]) -> Self {
        let mut m = Self::zeros(ring, diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m.set(i, i, *d);
        }
        m
    }

    pub fn from_fn(
        ring: &Arc<WittRing>,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> W,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix {
            ring: ring.clone(),
            rows,
            cols,
            data,
        }
    }

    pub fn from_rows(ring: &Arc<WittRing>, rows: &[Vec<W>], cols: usize) -> Self {
        Self::from_fn(ring, rows.len(), cols, |i, j| rows[i][j])
    }

    pub fn from_columns(ring: &Arc<WittRing>, cols: &[Vec<W>], rows: usize) -> Self {
        Self::from_fn(ring, rows, cols.len(), |i, j| cols[j][i])
    }

    /// Matrix with Witt-vector entries of the ring's length.
    pub fn from_witt(ring: &Arc<WittRing>, rows: &[Vec<WittVector>], cols: usize) -> Result<Self> {
        let mut out = Self::zeros(ring, rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::Shape(format!(
                    "row {i} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            for (j, w) in row.iter().enumerate() {
                if w.field() != ring.field() {
                    return Err(Error::FieldMismatch);
                }
                if w.len() > ring.len() as usize {
                    return Err(Error::LengthMismatch(w.len(), ring.len() as usize));
                }
                out.set(i, j, ring.from_components(w.components()));
            }
        }
        Ok(out)
    }

    pub fn to_witt(&self) -> Vec<Vec<WittVector>> {
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| WittVector::from_ring(&self.ring, &self.get(i, j)))
                    .collect()
            })
            .collect()
    }

    pub fn ring(&self) -> &Arc<WittRing> {
        &self.ring
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> W {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: W) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> Vec<W> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn column(&self, j: usize) -> Vec<W> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| self.ring.is_zero(x))
    }

    pub fn map(&self, f: impl Fn(&W) -> W) -> Matrix {
        Matrix {
            ring: self.ring.clone(),
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn transpose(&self) -> Matrix {
        Self::from_fn(&self.ring, self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matrix shapes do not compose");
        let r = &self.ring;
        let mut out = Self::zeros(r, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if r.is_zero(&a) {
                    continue;
                }
                for j in 0..other.cols {
                    let cur = out.get(i, j);
                    out.set(i, j, r.add(&cur, &r.mul(&a, &other.get(k, j))));
                }
            }
        }
        out
    }

    pub fn apply(&self, x: &[W]) -> Vec<W> {
        let r = &self.ring;
        (0..self.rows)
            .map(|i| {
                (0..self.cols).fold(r.zero(), |acc, j| {
                    r.add(&acc, &r.mul(&self.get(i, j), &x[j]))
                })
            })
            .collect()
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let r = &self.ring;
        Self::from_fn(r, self.rows, self.cols, |i, j| {
            r.add(&self.get(i, j), &other.get(i, j))
        })
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let r = &self.ring;
        Self::from_fn(r, self.rows, self.cols, |i, j| {
            r.sub(&self.get(i, j), &other.get(i, j))
        })
    }

    pub fn scale(&self, c: &W) -> Matrix {
        let r = self.ring.clone();
        self.map(|x| r.mul(c, x))
    }

    /// Entrywise `sigma^a`.
    pub fn sigma(&self, a: i64) -> Matrix {
        let r = self.ring.clone();
        self.map(|x| r.sigma(x, a))
    }

    pub fn hstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows);
        Self::from_fn(&self.ring, self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self.get(i, j)
            } else {
                other.get(i, j - self.cols)
            }
        })
    }

    pub fn vstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.cols);
        Self::from_fn(&self.ring, self.rows + other.rows, self.cols, |i, j| {
            if i < self.rows {
                self.get(i, j)
            } else {
                other.get(i - self.rows, j)
            }
        })
    }

    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        Self::from_fn(&self.ring, idx.len(), self.cols, |i, j| self.get(idx[i], j))
    }

    pub fn select_cols(&self, idx: &[usize]) -> Matrix {
        Self::from_fn(&self.ring, self.rows, idx.len(), |i, j| self.get(i, idx[j]))
    }

    /// Reduces row `i` modulo `p^{exps[i]}`.
    pub fn reduce_rows(&self, exps: &[u32]) -> Matrix {
        let r = &self.ring;
        Self::from_fn(r, self.rows, self.cols, |i, j| {
            r.reduce(&self.get(i, j), exps[i])
        })
    }

    /// Same matrix over another precision of the same field (entries are
    /// read as canonical representatives).
    pub fn coerce(&self, ring: &Arc<WittRing>) -> Matrix {
        Matrix {
            ring: ring.clone(),
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| ring.coerce(x)).collect(),
        }
    }
}

/// Reduces entry `i` of a vector modulo `p^{exps[i]}`.
pub fn reduce_vec(ring: &WittRing, x: &[W], exps: &[u32]) -> Vec<W> {
    x.iter()
        .zip(exps)
        .map(|(v, &e)| ring.reduce(v, e))
        .collect()
}
