//! Polynomial arithmetic over GF(2) and circulant matrices.
//!
//! Polynomials are stored bit-packed, index `i` holding the coefficient of
//! `x^i`. All tail-biting algebra reduces to arithmetic modulo `x^L - 1`
//! (equivalently `x^L + 1` in characteristic two), so next to the ring
//! operations this module provides the extended-Euclid inverse modulo
//! `x^L - 1` and the circulant-matrix view of a polynomial.
//!
//! Text form: an ASCII bit string with the lowest-degree coefficient first,
//! e.g. `"10101"` is `1 + x^2 + x^4`.

use std::fmt;
use std::ops::{Add, AddAssign};

use crate::binmat::BinMatrix;
use crate::{Error, Result};

const WORD_BITS: usize = 64;

/// A polynomial over GF(2) in canonical form: the highest stored
/// coefficient is 1 unless the polynomial is zero.
///
/// The degree of the zero polynomial is reported as `None` rather than a
/// numeric sentinel so that degree comparisons can never wrap around.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BinaryPolynomial {
    words: Vec<u64>,
}

impl BinaryPolynomial {
    /// The zero polynomial.
    pub fn zero() -> Self {
        Self { words: Vec::new() }
    }

    /// The constant polynomial 1.
    pub fn one() -> Self {
        Self { words: vec![1] }
    }

    /// The monomial `x^degree`.
    pub fn monomial(degree: usize) -> Self {
        let mut words = vec![0u64; degree / WORD_BITS + 1];
        words[degree / WORD_BITS] = 1u64 << (degree % WORD_BITS);
        Self { words }
    }

    /// Builds a polynomial from coefficients, index `i` = coefficient of `x^i`.
    pub fn from_coeffs(bits: &[u8]) -> Self {
        let mut p = Self::zero();
        for (i, &b) in bits.iter().enumerate() {
            if b & 1 == 1 {
                p.flip(i);
            }
        }
        p.trim();
        p
    }

    /// Builds a polynomial with ones exactly at the given exponents.
    pub fn from_support(exponents: &[usize]) -> Self {
        let mut p = Self::zero();
        for &e in exponents {
            p.flip(e);
        }
        p.trim();
        p
    }

    /// Parses the bit-string text form (`"10101"` = `1 + x^2 + x^4`).
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::InvalidInput("empty polynomial string".into()));
        }
        let mut p = Self::zero();
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => p.flip(i),
                _ => {
                    return Err(Error::InvalidInput(format!(
                        "polynomial strings may contain only 0 and 1, found {c:?}"
                    )))
                }
            }
        }
        p.trim();
        Ok(p)
    }

    /// Bit-string form, padded with trailing zeros to at least `min_len`.
    pub fn bit_string(&self, min_len: usize) -> String {
        let len = match self.degree() {
            Some(d) => (d + 1).max(min_len),
            None => min_len.max(1),
        };
        (0..len).map(|i| if self.coeff(i) { '1' } else { '0' }).collect()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        let last = self.words.last()?;
        Some((self.words.len() - 1) * WORD_BITS + (WORD_BITS - 1 - last.leading_zeros() as usize))
    }

    pub fn is_zero(&self) -> bool {
        self.words.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.words == [1]
    }

    /// Coefficient of `x^i`.
    pub fn coeff(&self, i: usize) -> bool {
        self.words
            .get(i / WORD_BITS)
            .is_some_and(|w| (w >> (i % WORD_BITS)) & 1 == 1)
    }

    /// Constant term `p(0)` as a bit.
    pub fn eval_at_zero(&self) -> bool {
        self.coeff(0)
    }

    /// Exponents with nonzero coefficient, ascending.
    pub fn support(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (wi, &w) in self.words.iter().enumerate() {
            let mut bits = w;
            while bits != 0 {
                out.push(wi * WORD_BITS + bits.trailing_zeros() as usize);
                bits &= bits - 1;
            }
        }
        out
    }

    fn flip(&mut self, i: usize) {
        let wi = i / WORD_BITS;
        if wi >= self.words.len() {
            self.words.resize(wi + 1, 0);
        }
        self.words[wi] ^= 1u64 << (i % WORD_BITS);
    }

    fn trim(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }

    fn shifted(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let word_shift = k / WORD_BITS;
        let bit_shift = k % WORD_BITS;
        let mut words = vec![0u64; self.words.len() + word_shift + 1];
        for (i, &w) in self.words.iter().enumerate() {
            words[i + word_shift] |= w << bit_shift;
            if bit_shift != 0 {
                words[i + word_shift + 1] |= w >> (WORD_BITS - bit_shift);
            }
        }
        let mut p = Self { words };
        p.trim();
        p
    }

    /// Carryless product.
    pub fn mul(&self, other: &Self) -> Self {
        let mut acc = Self::zero();
        for e in self.support() {
            acc += &other.shifted(e);
        }
        acc
    }

    /// Quotient and remainder of polynomial division. Panics on a zero divisor.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let mut rem = self.clone();
        let mut quot = Self::zero();
        while let Some(rd) = rem.degree() {
            if rd < dd {
                break;
            }
            let shift = rd - dd;
            quot.flip(shift);
            rem += &divisor.shifted(shift);
        }
        quot.trim();
        (quot, rem)
    }

    /// Remainder modulo `divisor`.
    pub fn rem(&self, divisor: &Self) -> Self {
        self.div_rem(divisor).1
    }

    /// Product reduced modulo `x^l - 1`; the result has degree below `l`.
    pub fn mul_mod(&self, other: &Self, l: usize) -> Self {
        assert!(l >= 1, "modulus x^L - 1 requires L >= 1");
        // x^(i+j) folds onto x^((i+j) mod L).
        let mut p = Self::zero();
        for i in self.support() {
            for j in other.support() {
                p.flip((i + j) % l);
            }
        }
        p.trim();
        p
    }

    /// Monic greatest common divisor via the Euclidean algorithm.
    ///
    /// Rejects the (0, 0) input; `gcd(p, 0) = p` otherwise.
    pub fn gcd(a: &Self, b: &Self) -> Result<Self> {
        if a.is_zero() && b.is_zero() {
            return Err(Error::InvalidInput("gcd(0, 0) is undefined".into()));
        }
        let (mut r0, mut r1) = (a.clone(), b.clone());
        while !r1.is_zero() {
            let r = r0.rem(&r1);
            r0 = r1;
            r1 = r;
        }
        Ok(r0)
    }

    /// Inverse modulo `x^l - 1`, when it exists.
    pub fn inverse_mod_xl_one(&self, l: usize) -> Result<Self> {
        let modulus = Self::xl_one(l);
        // Extended Euclid on (modulus, self mod modulus), tracking the
        // cofactor of self only.
        let mut r0 = modulus.clone();
        let mut r1 = self.rem(&modulus);
        let mut t0 = Self::zero();
        let mut t1 = Self::one();
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1);
            let t = &t0 + &q.mul(&t1);
            r0 = r1;
            r1 = r;
            t0 = t1;
            t1 = t;
        }
        if !r0.is_one() {
            return Err(Error::NotCoprime { l, row: None });
        }
        Ok(t0.rem(&modulus))
    }

    /// The modulus polynomial `x^l - 1` (= `x^l + 1` over GF(2)).
    pub fn xl_one(l: usize) -> Self {
        let mut p = Self::monomial(l);
        p.flip(0);
        p
    }
}

/// Solves `f * r = q (mod x^l - 1)` for the unique `f` of degree below `l`.
///
/// Fails with [`Error::NotCoprime`] when `gcd(r, x^l - 1) != 1`, which is
/// exactly the condition under which tail-biting at length `l` is
/// infeasible for feed-back polynomial `r`.
pub fn solve_f(q: &BinaryPolynomial, r: &BinaryPolynomial, l: usize) -> Result<BinaryPolynomial> {
    let inv = r.inverse_mod_xl_one(l)?;
    Ok(q.mul_mod(&inv, l))
}

impl Add<&BinaryPolynomial> for &BinaryPolynomial {
    type Output = BinaryPolynomial;

    fn add(self, rhs: &BinaryPolynomial) -> BinaryPolynomial {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl AddAssign<&BinaryPolynomial> for BinaryPolynomial {
    fn add_assign(&mut self, rhs: &BinaryPolynomial) {
        if rhs.words.len() > self.words.len() {
            self.words.resize(rhs.words.len(), 0);
        }
        for (i, &w) in rhs.words.iter().enumerate() {
            self.words[i] ^= w;
        }
        self.trim();
    }
}

impl fmt::Display for BinaryPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.bit_string(1))
    }
}

impl fmt::Debug for BinaryPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "poly({self})")
    }
}

/// An `L x L` circulant matrix over GF(2), stored as its top row.
///
/// Row `i` is the top row cyclically right-shifted by `i`; the product of
/// two circulants of the same size is again circulant, mirroring
/// multiplication modulo `x^L - 1`.
#[derive(Clone, PartialEq, Eq)]
pub struct CirculantMatrix {
    size: usize,
    top: BinaryPolynomial,
}

impl CirculantMatrix {
    /// Circulant with top row given by the coefficients of `f` padded to
    /// length `l`. Rejects `deg f >= l`.
    pub fn new(f: BinaryPolynomial, l: usize) -> Result<Self> {
        if l == 0 {
            return Err(Error::InvalidInput("circulant size must be positive".into()));
        }
        if let Some(d) = f.degree() {
            if d >= l {
                return Err(Error::InvalidInput(format!(
                    "polynomial degree {d} does not fit a circulant of size {l}"
                )));
            }
        }
        Ok(Self { size: l, top: f })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// The defining polynomial (top row).
    pub fn top_row(&self) -> &BinaryPolynomial {
        &self.top
    }

    /// Entry at `(row, col)`.
    pub fn entry(&self, row: usize, col: usize) -> bool {
        // Right shift by `row`: entry = top[(col - row) mod L].
        self.top.coeff((col + self.size - row % self.size) % self.size)
    }

    /// Matrix product of two circulants, computed in the polynomial ring.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.size != other.size {
            return Err(Error::LengthMismatch { expected: self.size, got: other.size });
        }
        Self::new(self.top.mul_mod(&other.top, self.size), self.size)
    }

    /// Dense matrix form.
    pub fn to_matrix(&self) -> BinMatrix {
        let mut m = BinMatrix::zeros(self.size, self.size);
        for i in 0..self.size {
            for e in self.top.support() {
                m.set(i, (e + i) % self.size, true);
            }
        }
        m
    }
}

impl fmt::Debug for CirculantMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "circulant(size={}, top={})", self.size, self.top)
    }
}
