//! Exhaustive maximum-likelihood codeword decoding (oracle-grade).

use super::LevelDecoder;
use crate::binmat::BinMatrix;
use crate::{Error, Result};

/// Message-length cap for exhaustive enumeration.
pub const ML_BUDGET: usize = 16;

/// Brute-force ML decoder: scores every codeword of a linear code against
/// per-coordinate LLRs and returns the best. Deterministic tie-break (first
/// codeword in message order wins).
pub struct MlCodewordDecoder {
    codewords: Vec<Vec<u8>>,
    n: usize,
}

impl MlCodewordDecoder {
    pub fn new(gen: &BinMatrix) -> Result<Self> {
        let k = gen.rows();
        if k > ML_BUDGET {
            return Err(Error::BudgetExceeded(format!(
                "exhaustive ML over 2^{k} codewords exceeds the 2^{ML_BUDGET} budget"
            )));
        }
        let n = gen.cols();
        let mut codewords = Vec::with_capacity(1 << k);
        let mut u = vec![0u8; k];
        for msg in 0..1u64 << k {
            for (i, b) in u.iter_mut().enumerate() {
                *b = ((msg >> i) & 1) as u8;
            }
            codewords.push(gen.encode(&u)?);
        }
        Ok(Self { codewords, n })
    }

    pub fn num_codewords(&self) -> usize {
        self.codewords.len()
    }
}

impl LevelDecoder for MlCodewordDecoder {
    fn code_len(&self) -> usize {
        self.n
    }

    fn decode_codeword(&mut self, llrs: &[f64]) -> Vec<u8> {
        debug_assert_eq!(llrs.len(), self.n);
        // Minimizing the cost of ones is exactly ML under the LLR model.
        let mut best = 0usize;
        let mut best_cost = f64::INFINITY;
        for (i, cw) in self.codewords.iter().enumerate() {
            let cost: f64 =
                cw.iter().zip(llrs).filter(|(&b, _)| b == 1).map(|(_, &l)| l).sum();
            if cost < best_cost {
                best_cost = cost;
                best = i;
            }
        }
        self.codewords[best].clone()
    }
}
