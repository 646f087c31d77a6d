//! Parallel concatenated (turbo) codes as block codes, nested turbo
//! families, and weight spectra.
//!
//! A turbo generator with `b` branches over a component block code with
//! parity part `F` is `[I | P_1 F | .. | P_b F]` in block form; with the
//! first interleaver fixed to the identity this is the familiar
//! `[I | F | PF]` for two branches. All branches share one component
//! encoder. For zero-tail terminated components the systematic tail bits of
//! the first branch are part of the codeword (columns `T` right after the
//! identity), while the interleaved branches contribute parity only; this
//! reproduces block parameters like `[30, 8]` for the memory-2 rate-1/2
//! component at `L = 8`.
//!
//! Nested turbo subcodes are row prefixes of the generator; they are real
//! turbo codes exactly when the interleavers leave the corresponding index
//! prefixes invariant (nested interleavers).

use std::collections::BTreeMap;

use num_rational::Ratio;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::binmat::BinMatrix;
use crate::convcode::{BlockForm, BlockGenerator};
use crate::interleaver::Interleaver;
use crate::{Error, Result};

/// Exhaustive weight enumeration is capped at this message length.
pub const SPECTRUM_BUDGET: usize = 24;

/// Generator matrix of a parallel concatenated code, with its provenance.
#[derive(Clone, Debug)]
pub struct TurboGenerator {
    gen: BinMatrix,
    component: BlockGenerator,
    /// Interleavers of branches `2..=b`; branch 1 is the identity.
    pis: Vec<Interleaver>,
}

impl TurboGenerator {
    /// Message length `k = LK`.
    pub fn k(&self) -> usize {
        self.gen.rows()
    }

    /// Code length: `KL + bL(N-K)` for tail-bitten components,
    /// `(L+m)(K + b(N-K))` for terminated ones.
    pub fn n(&self) -> usize {
        self.gen.cols()
    }

    /// Number of parallel branches `b`.
    pub fn branches(&self) -> usize {
        self.pis.len() + 1
    }

    pub fn generator(&self) -> &BinMatrix {
        &self.gen
    }

    pub fn component(&self) -> &BlockGenerator {
        &self.component
    }

    /// Interleaver of branch `branch >= 1` (0 is the implicit identity).
    pub fn interleaver(&self, branch: usize) -> &Interleaver {
        &self.pis[branch - 1]
    }

    pub fn interleavers(&self) -> &[Interleaver] {
        &self.pis
    }

    /// Column of message bit `r` (the systematic identity block).
    pub fn info_col(&self, r: usize) -> usize {
        r
    }

    /// Column of branch-1 systematic tail bit `(stream, tau)`; `None` for
    /// tail-bitten components.
    pub fn sys_tail_col(&self, stream: usize, tau: usize) -> Option<usize> {
        match self.component.form() {
            BlockForm::TailBitten => None,
            BlockForm::Terminated { tail } => {
                (tau < tail).then(|| self.k() + stream * tail + tau)
            }
        }
    }

    /// Column of parity stream `pstream` of `branch` (0-based) at time `t`.
    pub fn parity_col(&self, branch: usize, pstream: usize, t: usize) -> usize {
        let steps = self.component.steps();
        let pstreams = self.component.streams_out() - self.component.streams_in();
        let tail_cols = match self.component.form() {
            BlockForm::TailBitten => 0,
            BlockForm::Terminated { tail } => tail * self.component.streams_in(),
        };
        self.k() + tail_cols + (branch * pstreams + pstream) * steps + t
    }

    /// Encodes a message: `u * G` with the systematic prefix equal to `u`.
    pub fn encode(&self, u: &[u8]) -> Result<Vec<u8>> {
        self.gen.encode(u)
    }
}

/// Assembles the parallel concatenated generator from a component block
/// code and the interleavers of branches `2..=b`.
///
/// Interleaver sizes must equal the component message length. Terminated
/// components are meant for single-level (Construction A) use; combining
/// them with a nested chain is rejected later, in [`nested_family`].
pub fn build_pccc(component: BlockGenerator, pis: Vec<Interleaver>) -> Result<TurboGenerator> {
    if pis.is_empty() {
        return Err(Error::InvalidInput("a turbo code needs at least two branches".into()));
    }
    let k = component.k();
    for pi in &pis {
        if pi.size() != k {
            return Err(Error::LengthMismatch { expected: k, got: pi.size() });
        }
    }
    let parity = component.parity_columns();
    let mut gen = BinMatrix::identity(k);
    if let BlockForm::Terminated { .. } = component.form() {
        gen = gen.hconcat(&component.sys_tail_columns())?;
    }
    gen = gen.hconcat(&parity)?;
    for pi in &pis {
        // Row r of P*F is row pi^{-1}(r) of F, so branch parity equals the
        // component parity of the interleaved message.
        let inv = pi.inverse();
        let mut permuted = BinMatrix::zeros(k, parity.cols());
        for r in 0..k {
            let src = inv.image(r);
            for c in 0..parity.cols() {
                if parity.get(src, c) {
                    permuted.set(r, c, true);
                }
            }
        }
        gen = gen.hconcat(&permuted)?;
    }
    Ok(TurboGenerator { gen, component, pis })
}

/// A chain of turbo subcodes given by row prefixes of one generator.
#[derive(Clone, Debug)]
pub struct NestedTurboFamily {
    t: TurboGenerator,
    /// Ascending `(k_a, .., k_1)` with `k_1 = k`.
    chain: Vec<usize>,
}

/// Builds the nested family of row-prefix subcodes for a chain
/// `(k_a, .., k_1)`, ascending with `k_1 = k`.
///
/// Every interleaver of `t` must be nested for the chain, otherwise the
/// prefixes would not be turbo codes of the sub-encoders. Terminated
/// components only support the trivial single-level chain.
pub fn nested_family(t: TurboGenerator, chain: Vec<usize>) -> Result<NestedTurboFamily> {
    if chain.len() > 1 {
        if let BlockForm::Terminated { .. } = t.component().form() {
            return Err(Error::InvalidInput(
                "terminated components cannot carry a multi-level nested chain".into(),
            ));
        }
    }
    for pi in t.interleavers() {
        if !pi.is_nested(&chain)? {
            return Err(Error::InvalidInput(
                "interleaver is not nested for the requested chain".into(),
            ));
        }
    }
    Ok(NestedTurboFamily { t, chain })
}

impl NestedTurboFamily {
    /// Number of levels `a`.
    pub fn levels(&self) -> usize {
        self.chain.len()
    }

    /// Code length `n` (shared by all levels).
    pub fn n(&self) -> usize {
        self.t.n()
    }

    /// `k_level` for `level` in `1..=a` (level 1 is the full code).
    pub fn rank(&self, level: usize) -> usize {
        self.chain[self.chain.len() - level]
    }

    pub fn chain(&self) -> &[usize] {
        &self.chain
    }

    pub fn turbo(&self) -> &TurboGenerator {
        &self.t
    }

    /// Generator of level `level`: the first `k_level` rows.
    pub fn level_generator(&self, level: usize) -> BinMatrix {
        self.t.generator().row_slice(0..self.rank(level))
    }

    /// Rates `R_level = k_level / n` as exact rationals, level 1 first.
    pub fn rates(&self) -> Vec<Ratio<i64>> {
        (1..=self.levels()).map(|l| Ratio::new(self.rank(l) as i64, self.n() as i64)).collect()
    }

    /// Actual rates `k_level / (n - k + k_level)` (all-zero columns of the
    /// subcode generators discounted), level 1 first.
    pub fn actual_rates(&self) -> Vec<Ratio<i64>> {
        let (k, n) = (self.t.k() as i64, self.n() as i64);
        (1..=self.levels())
            .map(|l| {
                let kl = self.rank(l) as i64;
                Ratio::new(kl, n - k + kl)
            })
            .collect()
    }

    /// Exhaustive weight spectrum of every level, level 1 first.
    pub fn level_spectra(&self) -> Result<Vec<WeightSpectrum>> {
        (1..=self.levels()).map(|l| weight_spectrum(&self.level_generator(l))).collect()
    }
}

/// Weight distribution of a linear code: pairs `(w, A_w)` over nonzero
/// codewords. When `exact`, the counts sum to `2^k - 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightSpectrum {
    counts: BTreeMap<usize, u64>,
    k: usize,
    exact: bool,
}

impl WeightSpectrum {
    /// Minimum distance: least nonzero weight present (`None` only for the
    /// zero code).
    pub fn d_min(&self) -> Option<usize> {
        self.counts.keys().next().copied()
    }

    /// Number of minimum-weight codewords.
    pub fn a_d_min(&self) -> Option<u64> {
        self.counts.values().next().copied()
    }

    pub fn count_at(&self, w: usize) -> u64 {
        self.counts.get(&w).copied().unwrap_or(0)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.counts.iter().map(|(&w, &c)| (w, c))
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn message_len(&self) -> usize {
        self.k
    }

    /// Builds a spectrum from known values (used when distances are
    /// supplied externally rather than enumerated).
    pub fn from_known(pairs: &[(usize, u64)], k: usize, exact: bool) -> Self {
        Self { counts: pairs.iter().copied().collect(), k, exact }
    }
}

/// Exact weight spectrum by enumerating all `2^k - 1` nonzero messages in
/// Gray-code order. Rejects `k` beyond [`SPECTRUM_BUDGET`].
pub fn weight_spectrum(gen: &BinMatrix) -> Result<WeightSpectrum> {
    let k = gen.rows();
    if k > SPECTRUM_BUDGET {
        return Err(Error::BudgetExceeded(format!(
            "exhaustive spectrum of 2^{k} codewords exceeds the 2^{SPECTRUM_BUDGET} budget"
        )));
    }
    let words = gen.cols().div_ceil(64).max(1);
    let rows: Vec<Vec<u64>> = (0..k).map(|r| gen.row_words(r).to_vec()).collect();
    let mut cw = vec![0u64; words];
    let mut counts = BTreeMap::new();
    for msg in 1u64..(1u64 << k) {
        let flip = msg.trailing_zeros() as usize;
        for (w, r) in cw.iter_mut().zip(&rows[flip]) {
            *w ^= r;
        }
        let weight: usize = cw.iter().map(|w| w.count_ones() as usize).sum();
        *counts.entry(weight).or_insert(0u64) += 1;
    }
    Ok(WeightSpectrum { counts, k, exact: true })
}

/// Monte Carlo spectrum estimate for codes too large to enumerate: samples
/// random messages (plus all single-row and row-pair codewords) and records
/// the weights found. The result is approximate: its minimum distance is
/// only an upper bound on the true one.
pub fn weight_spectrum_sampled(gen: &BinMatrix, samples: usize, seed: u64) -> WeightSpectrum {
    let k = gen.rows();
    let mut counts = BTreeMap::new();
    let mut record = |w: usize| {
        if w > 0 {
            *counts.entry(w).or_insert(0u64) += 1;
        }
    };
    for r in 0..k {
        record(gen.row_weight(r));
    }
    let mut u = vec![0u8; k];
    for i in 0..k {
        for j in i + 1..k {
            u.fill(0);
            u[i] = 1;
            u[j] = 1;
            let w = gen.encode(&u).unwrap().iter().filter(|&&b| b == 1).count();
            record(w);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        for b in u.iter_mut() {
            *b = rng.gen_range(0..2u8);
        }
        let w = gen.encode(&u).unwrap().iter().filter(|&&b| b == 1).count();
        record(w);
    }
    WeightSpectrum { counts, k, exact: false }
}
