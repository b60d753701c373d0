use super::{TannerGraph, VariableNode};
use crate::error::{Error, Result};
use crate::gf2::BitMatrix;
use crate::polar::CodeSpec;

/// Sparse parity-check matrix: one row per check, one column per variable.
///
/// Columns are ordered hidden variables first, then channel positions in
/// order, so column `num_cols - N + j` is channel position `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseParityMatrix {
    num_cols: usize,
    code_length: usize,
    rows: Vec<Vec<usize>>,
}

impl SparseParityMatrix {
    pub fn new(num_cols: usize, code_length: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        if code_length > num_cols {
            return Err(Error::InvalidParameter(format!(
                "{code_length} channel columns exceed {num_cols} columns"
            )));
        }
        let mut rows = rows;
        for r in &mut rows {
            r.sort_unstable();
            if r.windows(2).any(|w| w[0] == w[1]) || r.last().is_some_and(|&c| c >= num_cols) {
                return Err(Error::InvalidParameter("malformed parity row".into()));
            }
        }
        Ok(Self {
            num_cols,
            code_length,
            rows,
        })
    }

    /// Builds from a dense matrix whose last `code_length` columns are the
    /// channel positions.
    pub fn from_dense(m: &BitMatrix, code_length: usize) -> Result<Self> {
        let rows = (0..m.rows())
            .map(|i| (0..m.cols()).filter(|&j| m.get(i, j)).collect())
            .collect();
        Self::new(m.cols(), code_length, rows)
    }

    pub fn to_dense(&self) -> BitMatrix {
        let mut m = BitMatrix::zeros(self.rows.len(), self.num_cols);
        for (i, r) in self.rows.iter().enumerate() {
            for &j in r {
                m.set(i, j, true);
            }
        }
        m
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.num_cols
    }

    pub fn code_length(&self) -> usize {
        self.code_length
    }

    pub fn num_hidden(&self) -> usize {
        self.num_cols - self.code_length
    }

    /// Column indices of the ones in each row.
    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn row_weights(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.len()).collect()
    }

    pub fn column_weights(&self) -> Vec<usize> {
        let mut w = vec![0; self.num_cols];
        for r in &self.rows {
            for &j in r {
                w[j] += 1;
            }
        }
        w
    }

    pub fn num_ones(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }

    /// `H · bitsᵀ` over GF(2), one entry per row.
    pub fn syndrome(&self, bits: &[u8]) -> Vec<u8> {
        self.rows
            .iter()
            .map(|r| r.iter().fold(0, |acc, &j| acc ^ (bits[j] & 1)))
            .collect()
    }

    pub fn to_graph(&self) -> TannerGraph {
        let hidden = self.num_hidden();
        let variables = (0..self.num_cols)
            .map(|j| VariableNode {
                channel_index: j.checked_sub(hidden),
                known_zero: false,
                origin: j,
            })
            .collect();
        TannerGraph::from_checks(self.code_length, variables, &self.rows)
            .expect("parity matrix rows are validated")
    }
}

impl TannerGraph {
    /// Lossless conversion to the parity-matrix view.
    pub fn to_parity_matrix(&self) -> SparseParityMatrix {
        SparseParityMatrix {
            num_cols: self.num_variables(),
            code_length: self.code_length(),
            rows: self.checks(),
        }
    }
}

/// Parity-check matrix read off the generator: one row per frozen index
/// `f`, equal to column `f` of `G_N`. Since `G_N` is its own inverse,
/// `u = x · G_N` and `u_f = 0` is the parity equation `Σ_j x_j G[j][f] = 0`.
pub fn dense_parity_from_generator(spec: &CodeSpec) -> SparseParityMatrix {
    let g = spec.generator();
    let n = spec.length();
    let rows = spec
        .frozen_set()
        .into_iter()
        .map(|f| (0..n).filter(|&j| g.get(j, f)).collect())
        .collect();
    SparseParityMatrix::new(n, n, rows).expect("generator columns are valid rows")
}
