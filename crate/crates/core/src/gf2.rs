//! Dense bit-packed matrices over GF(2).

use std::fmt;

const WORD: usize = 64;

/// A dense GF(2) matrix with each row packed into 64-bit words.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words_per_row = cols.div_ceil(WORD);
        Self {
            rows,
            cols,
            words_per_row,
            data: vec![0; rows * words_per_row],
        }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zeros(size, size);
        for i in 0..size {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from rows of 0/1 values.
    ///
    /// Panics if the rows are ragged.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut m = Self::zeros(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            assert_eq!(row.len(), cols, "ragged rows");
            for (j, &b) in row.iter().enumerate() {
                m.set(i, j, b & 1 == 1);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        debug_assert!(row < self.rows && col < self.cols);
        let w = self.data[row * self.words_per_row + col / WORD];
        (w >> (col % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        debug_assert!(row < self.rows && col < self.cols);
        let w = &mut self.data[row * self.words_per_row + col / WORD];
        let mask = 1u64 << (col % WORD);
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    fn row_words(&self, row: usize) -> &[u64] {
        &self.data[row * self.words_per_row..(row + 1) * self.words_per_row]
    }

    /// Row `row` as a vector of 0/1 values.
    pub fn row(&self, row: usize) -> Vec<u8> {
        (0..self.cols).map(|j| self.get(row, j) as u8).collect()
    }

    /// Column `col` as a vector of 0/1 values.
    pub fn column(&self, col: usize) -> Vec<u8> {
        (0..self.rows).map(|i| self.get(i, col) as u8).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j) {
                    t.set(j, i, true);
                }
            }
        }
        t
    }

    /// Matrix product over GF(2). Panics on a dimension mismatch.
    pub fn mul(&self, rhs: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let base = i * out.words_per_row;
            for k in 0..self.cols {
                if self.get(i, k) {
                    for (o, r) in out.data[base..base + out.words_per_row]
                        .iter_mut()
                        .zip(rhs.row_words(k))
                    {
                        *o ^= r;
                    }
                }
            }
        }
        out
    }

    /// Row-vector product `v · self`. Panics if `v.len() != rows`.
    pub fn left_mul_vec(&self, v: &[u8]) -> Vec<u8> {
        assert_eq!(v.len(), self.rows, "dimension mismatch");
        let mut acc = vec![0u64; self.words_per_row];
        for (i, &b) in v.iter().enumerate() {
            if b & 1 == 1 {
                for (a, r) in acc.iter_mut().zip(self.row_words(i)) {
                    *a ^= r;
                }
            }
        }
        (0..self.cols)
            .map(|j| ((acc[j / WORD] >> (j % WORD)) & 1) as u8)
            .collect()
    }

    /// Column-vector product `self · v`. Panics if `v.len() != cols`.
    pub fn mul_vec(&self, v: &[u8]) -> Vec<u8> {
        assert_eq!(v.len(), self.cols, "dimension mismatch");
        (0..self.rows)
            .map(|i| {
                v.iter()
                    .enumerate()
                    .filter(|&(j, &b)| b & 1 == 1 && self.get(i, j))
                    .count() as u8
                    & 1
            })
            .collect()
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &BitMatrix) -> BitMatrix {
        let mut out = Self::zeros(self.rows * rhs.rows, self.cols * rhs.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if !self.get(i, j) {
                    continue;
                }
                for p in 0..rhs.rows {
                    for q in 0..rhs.cols {
                        if rhs.get(p, q) {
                            out.set(i * rhs.rows + p, j * rhs.cols + q, true);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().map(|w| w.count_ones() as usize).sum()
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            let line: String = (0..self.cols)
                .map(|j| if self.get(i, j) { '1' } else { '0' })
                .collect();
            writeln!(f, "  {line}")?;
        }
        Ok(())
    }
}
