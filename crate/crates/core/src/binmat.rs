//! Dense bit-packed matrices over GF(2).
//!
//! Rows are stored as 64-bit words, which keeps encoding (message times
//! generator) and Gaussian elimination fast enough for block lengths in the
//! tens of thousands without any sparse machinery.

use std::fmt;

use crate::{Error, Result};

const WORD_BITS: usize = 64;

/// A dense GF(2) matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct BinMatrix {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    data: Vec<u64>,
}

impl BinMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words_per_row = cols.div_ceil(WORD_BITS).max(1);
        Self { rows, cols, words_per_row, data: vec![0; rows * words_per_row] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from 0/1 byte rows. All rows must share one length.
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::LengthMismatch { expected: cols, got: row.len() });
            }
            for (j, &b) in row.iter().enumerate() {
                if b & 1 == 1 {
                    m.set(i, j, true);
                }
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        debug_assert!(r < self.rows && c < self.cols);
        let w = self.data[r * self.words_per_row + c / WORD_BITS];
        (w >> (c % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        debug_assert!(r < self.rows && c < self.cols);
        let idx = r * self.words_per_row + c / WORD_BITS;
        let mask = 1u64 << (c % WORD_BITS);
        if value {
            self.data[idx] |= mask;
        } else {
            self.data[idx] &= !mask;
        }
    }

    /// The packed 64-bit words of a row (little-endian bit order).
    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.words_per_row..(r + 1) * self.words_per_row]
    }

    /// XORs row `src` into row `dst`.
    pub fn xor_rows(&mut self, dst: usize, src: usize) {
        let (d, s) = (dst * self.words_per_row, src * self.words_per_row);
        for k in 0..self.words_per_row {
            let w = self.data[s + k];
            self.data[d + k] ^= w;
        }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for k in 0..self.words_per_row {
            self.data.swap(a * self.words_per_row + k, b * self.words_per_row + k);
        }
    }

    pub fn row_is_zero(&self, r: usize) -> bool {
        self.row_words(r).iter().all(|&w| w == 0)
    }

    pub fn row_weight(&self, r: usize) -> usize {
        self.row_words(r).iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Row as a 0/1 byte vector.
    pub fn row_bits(&self, r: usize) -> Vec<u8> {
        (0..self.cols).map(|c| self.get(r, c) as u8).collect()
    }

    /// Matrix assembled from the given columns of `self`, in order.
    pub fn gather_cols(&self, cols: &[usize]) -> Self {
        let mut m = Self::zeros(self.rows, cols.len());
        for r in 0..self.rows {
            for (j, &c) in cols.iter().enumerate() {
                if self.get(r, c) {
                    m.set(r, j, true);
                }
            }
        }
        m
    }

    /// Matrix with the given column range of `self`.
    pub fn col_slice(&self, range: std::ops::Range<usize>) -> Self {
        self.gather_cols(&range.collect::<Vec<_>>())
    }

    /// Matrix with the given row range of `self`.
    pub fn row_slice(&self, range: std::ops::Range<usize>) -> Self {
        let mut m = Self::zeros(range.len(), self.cols);
        for (i, r) in range.enumerate() {
            let src = self.row_words(r).to_vec();
            m.data[i * m.words_per_row..(i + 1) * m.words_per_row].copy_from_slice(&src);
        }
        m
    }

    /// Horizontal concatenation `[self | right]`.
    pub fn hconcat(&self, right: &Self) -> Result<Self> {
        if self.rows != right.rows {
            return Err(Error::LengthMismatch { expected: self.rows, got: right.rows });
        }
        let mut m = Self::zeros(self.rows, self.cols + right.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    m.set(r, c, true);
                }
            }
            for c in 0..right.cols {
                if right.get(r, c) {
                    m.set(r, self.cols + c, true);
                }
            }
        }
        Ok(m)
    }

    /// Vertical concatenation.
    pub fn vconcat(&self, below: &Self) -> Result<Self> {
        if self.cols != below.cols {
            return Err(Error::LengthMismatch { expected: self.cols, got: below.cols });
        }
        let mut m = Self::zeros(self.rows + below.rows, self.cols);
        m.data[..self.data.len()].copy_from_slice(&self.data);
        m.data[self.data.len()..].copy_from_slice(&below.data);
        Ok(m)
    }

    /// GF(2) matrix product.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matrix product");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    let (d, s) = (r * out.words_per_row, c * other.words_per_row);
                    for k in 0..out.words_per_row {
                        out.data[d + k] ^= other.data[s + k];
                    }
                }
            }
        }
        out
    }

    /// `u * self` for a 0/1 message vector `u` of length `rows`.
    pub fn encode(&self, u: &[u8]) -> Result<Vec<u8>> {
        if u.len() != self.rows {
            return Err(Error::LengthMismatch { expected: self.rows, got: u.len() });
        }
        let mut acc = vec![0u64; self.words_per_row];
        for (r, &b) in u.iter().enumerate() {
            if b & 1 == 1 {
                for (k, w) in self.row_words(r).iter().enumerate() {
                    acc[k] ^= w;
                }
            }
        }
        Ok((0..self.cols).map(|c| ((acc[c / WORD_BITS] >> (c % WORD_BITS)) & 1) as u8).collect())
    }

    /// Reduced row echelon form together with its pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&r| m.get(r, col)) else { continue };
            m.swap_rows(row, p);
            for r in 0..m.rows {
                if r != row && m.get(r, col) {
                    m.xor_rows(r, row);
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m.row_slice(0..row).vconcat(&Self::zeros(m.rows - row, m.cols)).unwrap(), pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    pub fn is_full_row_rank(&self) -> bool {
        self.rank() == self.rows
    }

    /// True when every row of `other` lies in the row space of `self`.
    pub fn row_space_contains(&self, other: &Self) -> bool {
        if self.cols != other.cols {
            return false;
        }
        let (rr, pivots) = self.rref();
        for r in 0..other.rows {
            let mut acc = other.row_words(r).to_vec();
            for (i, &p) in pivots.iter().enumerate() {
                if (acc[p / WORD_BITS] >> (p % WORD_BITS)) & 1 == 1 {
                    for (k, w) in rr.row_words(i).iter().enumerate() {
                        acc[k] ^= w;
                    }
                }
            }
            if acc.iter().any(|&w| w != 0) {
                return false;
            }
        }
        true
    }

    pub fn row_space_eq(&self, other: &Self) -> bool {
        self.row_space_contains(other) && other.row_space_contains(self)
    }

    /// Square matrix power over GF(2).
    pub fn pow(&self, mut e: usize) -> Self {
        assert_eq!(self.rows, self.cols, "pow requires a square matrix");
        let mut base = self.clone();
        let mut acc = Self::identity(self.rows);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Sum (XOR) of two equal-shaped matrices.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut m = self.clone();
        for (d, s) in m.data.iter_mut().zip(&other.data) {
            *d ^= s;
        }
        m
    }

    /// Nonzero GF(2) determinant test for square matrices.
    pub fn det_nonzero(&self) -> bool {
        self.rows == self.cols && self.rank() == self.rows
    }
}

impl fmt::Debug for BinMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BinMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            for c in 0..self.cols {
                write!(f, "{}", self.get(r, c) as u8)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl fmt::Display for BinMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            for c in 0..self.cols {
                write!(f, "{}", self.get(r, c) as u8)?;
            }
            if r + 1 < self.rows {
                writeln!(f)?;
            }
        }
        Ok(())
    }
}
