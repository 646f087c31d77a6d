//! Systematic feed-back convolutional encoders and their block-code forms.
//!
//! A rate `K/N` systematic feed-back encoder is described by a rational
//! generator matrix whose systematic part is the identity and whose parity
//! entries are ratios `q_{i,j}(x) / r_i(x)` with one feed-back polynomial
//! per input stream. Two block-code deformations are supported:
//!
//! * **tail-biting** (`[LN, LK]`, no rate loss): possible exactly when
//!   `gcd(r_i, x^L - 1) = 1` for every stream, in which case the block code
//!   has the systematic generator `[I | F]` with circulant parity blocks
//!   `F_{i,j} = circ(f_{i,j})`, `f_{i,j} r_i = q_{i,j} (mod x^L - 1)`;
//! * **zero-tail termination** (`[N(L+m), LK]`): `m` flush steps whose
//!   inputs cancel the feed-back drive the encoder back to the zero state.
//!
//! Block codewords are laid out stream-major: output stream `o` occupies
//! columns `o*steps .. (o+1)*steps` where `steps` is `L` (tail-biting) or
//! `L+m` (terminated). Message index `(stream i, time t)` is row `i*L + t`.

use crate::binmat::BinMatrix;
use crate::gf2poly::{solve_f, BinaryPolynomial, CirculantMatrix};
use crate::{Error, Result};

/// Rational generator matrix of a systematic feed-back convolutional code.
///
/// Invariants enforced at construction: `r_i(0) = 1` (realizable
/// feed-back) and `deg q_{i,j} <= deg r_i` (realizable with `deg r_i`
/// register stages per stream). Entries may be unreduced fractions — an
/// unreduced `q/r` is a different encoder realization with a different
/// tail-biting block code, even though the transfer function is the same.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalGeneratorMatrix {
    /// Parity numerators, `parity[i][j]` = `q_{i, K+1+j}` in 1-based paper
    /// indexing.
    parity: Vec<Vec<BinaryPolynomial>>,
    /// Feed-back denominators, one per input stream.
    feedback: Vec<BinaryPolynomial>,
}

impl RationalGeneratorMatrix {
    pub fn new(
        parity: Vec<Vec<BinaryPolynomial>>,
        feedback: Vec<BinaryPolynomial>,
    ) -> Result<Self> {
        if parity.is_empty() || parity.len() != feedback.len() {
            return Err(Error::InvalidInput(
                "need one parity row and one feed-back polynomial per input stream".into(),
            ));
        }
        let width = parity[0].len();
        if width == 0 {
            return Err(Error::InvalidInput("at least one parity stream is required".into()));
        }
        for (i, (row, r)) in parity.iter().zip(&feedback).enumerate() {
            if row.len() != width {
                return Err(Error::LengthMismatch { expected: width, got: row.len() });
            }
            if !r.eval_at_zero() {
                return Err(Error::InvalidInput(format!(
                    "feed-back polynomial of stream {i} must have constant term 1"
                )));
            }
            let m = r.degree().unwrap_or(0);
            for q in row {
                // Entries need not be reduced fractions: unreduced q/r pairs
                // are meaningful here (they change the tail-biting block
                // code), so only realizability is checked.
                if q.degree().unwrap_or(0) > m {
                    return Err(Error::InvalidInput(format!(
                        "parity numerator of stream {i} exceeds the feed-back degree {m}"
                    )));
                }
            }
        }
        Ok(Self { parity, feedback })
    }

    /// Number of input streams `K`.
    pub fn k(&self) -> usize {
        self.parity.len()
    }

    /// Number of output streams `N`.
    pub fn n(&self) -> usize {
        self.parity.len() + self.parity[0].len()
    }

    pub fn parity_entry(&self, stream: usize, pstream: usize) -> &BinaryPolynomial {
        &self.parity[stream][pstream]
    }

    pub fn feedback_poly(&self, stream: usize) -> &BinaryPolynomial {
        &self.feedback[stream]
    }

    /// Memory order `m = max deg r_i`.
    pub fn memory(&self) -> usize {
        self.feedback.iter().map(|r| r.degree().unwrap_or(0)).max().unwrap_or(0)
    }

    /// Constraint length: total register size over all streams (the trellis
    /// has `2^constraint_length` states).
    pub fn constraint_length(&self) -> usize {
        self.feedback.iter().map(|r| r.degree().unwrap_or(0)).sum()
    }

    /// Parses the text form: one line per input stream, one `q/r`
    /// parity entry per whitespace-separated token, polynomials in the
    /// low-degree-first bit-string format. Entries of one row must share
    /// the denominator.
    pub fn parse(text: &str) -> Result<Self> {
        let mut parity = Vec::new();
        let mut feedback = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut row = Vec::new();
            let mut row_r: Option<BinaryPolynomial> = None;
            for tok in line.split_whitespace() {
                let (q_s, r_s) = tok.split_once('/').ok_or_else(|| {
                    Error::InvalidInput(format!("parity entry {tok:?} is not of the form q/r"))
                })?;
                let q = BinaryPolynomial::parse(q_s)?;
                let r = BinaryPolynomial::parse(r_s)?;
                match &row_r {
                    Some(prev) if *prev != r => {
                        return Err(Error::InvalidInput(
                            "all parity entries of a row must share one feed-back polynomial"
                                .into(),
                        ))
                    }
                    Some(_) => {}
                    None => row_r = Some(r),
                }
                row.push(q);
            }
            let r = row_r
                .ok_or_else(|| Error::InvalidInput("generator row has no entries".into()))?;
            parity.push(row);
            feedback.push(r);
        }
        Self::new(parity, feedback)
    }

    /// Text form accepted by [`parse`](Self::parse).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (row, r) in self.parity.iter().zip(&self.feedback) {
            let line: Vec<String> =
                row.iter().map(|q| format!("{}/{}", q.bit_string(1), r.bit_string(1))).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Observer-canonical-form state matrix of a feed-back polynomial: ones on
/// the subdiagonal, last column `(r_m, .., r_1)` top to bottom.
pub fn observer_state_matrix(r: &BinaryPolynomial) -> Result<BinMatrix> {
    let m = r.degree().unwrap_or(0);
    if m == 0 {
        return Err(Error::InvalidInput(
            "observer state matrix requires a non-constant feed-back polynomial".into(),
        ));
    }
    let mut a = BinMatrix::zeros(m, m);
    for i in 1..m {
        a.set(i, i - 1, true);
    }
    for i in 0..m {
        // Row i of the last column holds r_{m-i}.
        if r.coeff(m - i) {
            a.set(i, m - 1, true);
        }
    }
    Ok(a)
}

/// True exactly when tail-biting length `l` works for feed-back `r`, i.e.
/// `gcd(r, x^l - 1) = 1`.
pub fn tailbiting_feasible(r: &BinaryPolynomial, l: usize) -> bool {
    BinaryPolynomial::gcd(r, &BinaryPolynomial::xl_one(l))
        .map(|g| g.is_one())
        .unwrap_or(false)
}

/// Which block-code deformation produced a [`BlockGenerator`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockForm {
    /// `[I | F]` tail-bitten code of length `L*N`.
    TailBitten,
    /// Zero-tail terminated code of length `N*(L+tail)`.
    Terminated { tail: usize },
}

/// A block generator matrix derived from a convolutional code.
#[derive(Clone, Debug)]
pub struct BlockGenerator {
    gen: BinMatrix,
    form: BlockForm,
    source: RationalGeneratorMatrix,
    l: usize,
}

impl BlockGenerator {
    /// Message length `k = LK`.
    pub fn k(&self) -> usize {
        self.gen.rows()
    }

    /// Block length.
    pub fn n(&self) -> usize {
        self.gen.cols()
    }

    pub fn form(&self) -> BlockForm {
        self.form
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn streams_in(&self) -> usize {
        self.source.k()
    }

    pub fn streams_out(&self) -> usize {
        self.source.n()
    }

    /// The convolutional code this block code was derived from.
    pub fn code(&self) -> &RationalGeneratorMatrix {
        &self.source
    }

    /// Trellis steps covered by one codeword (`L`, plus the tail when
    /// terminated).
    pub fn steps(&self) -> usize {
        match self.form {
            BlockForm::TailBitten => self.l,
            BlockForm::Terminated { tail } => self.l + tail,
        }
    }

    /// Column of output stream `o` at time `t`.
    pub fn col(&self, o: usize, t: usize) -> usize {
        debug_assert!(o < self.streams_out() && t < self.steps());
        o * self.steps() + t
    }

    /// Message row of input stream `i` at time `t < L`.
    pub fn message_index(&self, i: usize, t: usize) -> usize {
        debug_assert!(i < self.streams_in() && t < self.l);
        i * self.l + t
    }

    pub fn generator(&self) -> &BinMatrix {
        &self.gen
    }

    /// The parity columns (all non-systematic output streams), stream-major.
    pub fn parity_columns(&self) -> BinMatrix {
        self.gen.col_slice(self.streams_in() * self.steps()..self.streams_out() * self.steps())
    }

    /// For terminated codes, the systematic tail columns (times `>= L` of
    /// the input streams), stream-major. Empty for tail-bitten codes.
    pub fn sys_tail_columns(&self) -> BinMatrix {
        let mut cols = Vec::new();
        if let BlockForm::Terminated { tail } = self.form {
            for i in 0..self.streams_in() {
                for t in 0..tail {
                    cols.push(self.col(i, self.l + t));
                }
            }
        }
        self.gen.gather_cols(&cols)
    }

    /// The systematic information columns, i.e. column of message `(i, t)`
    /// in message order.
    pub fn sys_info_columns(&self) -> BinMatrix {
        let mut cols = Vec::new();
        for i in 0..self.streams_in() {
            for t in 0..self.l {
                cols.push(self.col(i, t));
            }
        }
        self.gen.gather_cols(&cols)
    }
}

/// Encodes a message with a block generator: `u * B` over GF(2).
pub fn encode_block(b: &BlockGenerator, u: &[u8]) -> Result<Vec<u8>> {
    b.gen.encode(u)
}

/// Converts a feed-back convolutional code to its tail-bitten block code
/// `[LN, LK]` with generator `[I | F]`.
///
/// Fails with [`Error::NotCoprime`] naming the offending stream when some
/// `gcd(r_i, x^L - 1) != 1`.
pub fn tailbite(g: &RationalGeneratorMatrix, l: usize) -> Result<BlockGenerator> {
    if l == 0 {
        return Err(Error::InvalidInput("tail-biting length must be positive".into()));
    }
    let (k_streams, n_streams) = (g.k(), g.n());
    let mut fs: Vec<Vec<CirculantMatrix>> = Vec::with_capacity(k_streams);
    for i in 0..k_streams {
        let mut row = Vec::new();
        for j in 0..n_streams - k_streams {
            let f = solve_f(g.parity_entry(i, j), g.feedback_poly(i), l).map_err(|e| match e {
                Error::NotCoprime { l, .. } => Error::NotCoprime { l, row: Some(i) },
                other => other,
            })?;
            row.push(CirculantMatrix::new(f, l)?);
        }
        fs.push(row);
    }

    let mut gen = BinMatrix::zeros(l * k_streams, l * n_streams);
    for i in 0..k_streams {
        for t in 0..l {
            gen.set(i * l + t, i * l + t, true); // systematic identity
        }
        for (j, circ) in fs[i].iter().enumerate() {
            let base_col = (k_streams + j) * l;
            for t in 0..l {
                for e in circ.top_row().support() {
                    gen.set(i * l + t, base_col + (e + t) % l, true);
                }
            }
        }
    }
    Ok(BlockGenerator { gen, form: BlockForm::TailBitten, source: g.clone(), l })
}

/// Converts a feed-back convolutional code to its zero-tail terminated
/// block code `[N(L+m), LK]`: `L` information steps plus `m` flush steps
/// whose inputs cancel the feed-back, so the encoder begins and ends in the
/// zero state.
pub fn terminate(g: &RationalGeneratorMatrix, l: usize) -> Result<BlockGenerator> {
    if l == 0 {
        return Err(Error::InvalidInput("block length must be positive".into()));
    }
    let (k_streams, n_streams) = (g.k(), g.n());
    let tail = g.memory();
    let steps = l + tail;
    let k = l * k_streams;
    let mut gen = BinMatrix::zeros(k, steps * n_streams);
    let mut enc = RscEncoder::new(g);
    let mut inputs = vec![0u8; k_streams];
    for i in 0..k_streams {
        for t0 in 0..l {
            let row = i * l + t0;
            enc.reset();
            for t in 0..steps {
                let outputs = if t < l {
                    inputs.fill(0);
                    if t == t0 {
                        inputs[i] = 1;
                    }
                    enc.step(&inputs)
                } else {
                    enc.flush_step()
                };
                for (o, &bit) in outputs.iter().enumerate() {
                    if bit == 1 {
                        gen.set(row, o * steps + t, true);
                    }
                }
            }
            debug_assert!(enc.state_is_zero());
        }
    }
    Ok(BlockGenerator { gen, form: BlockForm::Terminated { tail }, source: g.clone(), l })
}

/// Step-by-step realization of a systematic feed-back encoder (controller
/// canonical form, one shift register per input stream).
#[derive(Clone, Debug)]
pub struct RscEncoder<'a> {
    g: &'a RationalGeneratorMatrix,
    /// Per-stream register; bit `tau` holds the feed-back value from
    /// `tau + 1` steps ago.
    regs: Vec<u64>,
    /// Per-stream feed-back tap masks (`r` with the constant term dropped).
    r_masks: Vec<u64>,
    /// `q` constant terms and tap masks per (stream, parity stream).
    q0: Vec<Vec<bool>>,
    q_masks: Vec<Vec<u64>>,
    mem: Vec<usize>,
}

impl<'a> RscEncoder<'a> {
    pub fn new(g: &'a RationalGeneratorMatrix) -> Self {
        let k = g.k();
        let p = g.n() - k;
        let mut r_masks = Vec::with_capacity(k);
        let mut mem = Vec::with_capacity(k);
        let mut q0 = vec![vec![false; p]; k];
        let mut q_masks = vec![vec![0u64; p]; k];
        for i in 0..k {
            let r = g.feedback_poly(i);
            let m = r.degree().unwrap_or(0);
            assert!(m < 64, "register size limited to 63 stages");
            mem.push(m);
            let mut mask = 0u64;
            for tau in 1..=m {
                if r.coeff(tau) {
                    mask |= 1 << (tau - 1);
                }
            }
            r_masks.push(mask);
            for j in 0..p {
                let q = g.parity_entry(i, j);
                q0[i][j] = q.coeff(0);
                for tau in 1..=m {
                    if q.coeff(tau) {
                        q_masks[i][j] |= 1 << (tau - 1);
                    }
                }
            }
        }
        Self { g, regs: vec![0; k], r_masks, q0, q_masks, mem }
    }

    pub fn reset(&mut self) {
        self.regs.fill(0);
    }

    /// Packs the per-stream registers into one trellis state index.
    pub fn state_index(&self) -> usize {
        let mut s = 0usize;
        let mut shift = 0;
        for (i, &reg) in self.regs.iter().enumerate() {
            s |= (reg as usize) << shift;
            shift += self.mem[i];
        }
        s
    }

    pub fn set_state_index(&mut self, mut s: usize) {
        for i in 0..self.regs.len() {
            self.regs[i] = (s & ((1 << self.mem[i]) - 1)) as u64;
            s >>= self.mem[i];
        }
    }

    pub fn state_is_zero(&self) -> bool {
        self.regs.iter().all(|&r| r == 0)
    }

    /// Advances one step with the given input bits; returns the `N` output
    /// bits `[systematic | parity]`.
    pub fn step(&mut self, inputs: &[u8]) -> Vec<u8> {
        let k = self.g.k();
        let p = self.g.n() - k;
        debug_assert_eq!(inputs.len(), k);
        let mut out = vec![0u8; k + p];
        out[..k].copy_from_slice(inputs);
        for i in 0..k {
            let fb = (self.regs[i] & self.r_masks[i]).count_ones() as u8 & 1;
            let w = (inputs[i] & 1) ^ fb;
            for j in 0..p {
                let mut y = (self.regs[i] & self.q_masks[i][j]).count_ones() as u8 & 1;
                if self.q0[i][j] {
                    y ^= w;
                }
                out[k + j] ^= y;
            }
            if self.mem[i] > 0 {
                self.regs[i] = ((self.regs[i] << 1) | w as u64) & ((1 << self.mem[i]) - 1);
            }
        }
        out
    }

    /// The input bits that cancel the feed-back in the current state (one
    /// flush step drives a fresh zero into every register).
    pub fn flush_inputs(&self) -> Vec<u8> {
        (0..self.g.k())
            .map(|i| (self.regs[i] & self.r_masks[i]).count_ones() as u8 & 1)
            .collect()
    }

    /// One termination step; returns the `N` output bits.
    pub fn flush_step(&mut self) -> Vec<u8> {
        let inputs = self.flush_inputs();
        self.step(&inputs)
    }
}

/// Trellis boundary handling.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryMode {
    /// First and last state are the zero state (terminated codes).
    ZeroTerminated,
    /// Start state equals end state (tail-bitten codes).
    TailBiting,
}

/// One trellis edge.
#[derive(Clone, Copy, Debug)]
pub struct Transition {
    pub next: u32,
    /// Output bits packed little-endian, `[systematic | parity]`.
    pub output: u32,
    /// Input bits packed little-endian.
    pub input: u32,
}

/// Time-invariant trellis of a convolutional code over a block of `L`
/// information steps (plus forced flush steps when zero-terminated).
///
/// Every state has exactly `2^K` outgoing information edges; flush sections
/// have a single forced edge per state.
#[derive(Clone, Debug)]
pub struct Trellis {
    num_states: usize,
    k_in: usize,
    n_out: usize,
    info_sections: usize,
    tail_sections: usize,
    boundary: BoundaryMode,
    trans: Vec<Transition>,
    tail_trans: Vec<Transition>,
}

impl Trellis {
    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn inputs_per_state(&self) -> usize {
        1 << self.k_in
    }

    pub fn k_in(&self) -> usize {
        self.k_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn info_sections(&self) -> usize {
        self.info_sections
    }

    pub fn tail_sections(&self) -> usize {
        self.tail_sections
    }

    pub fn total_sections(&self) -> usize {
        self.info_sections + self.tail_sections
    }

    pub fn boundary(&self) -> BoundaryMode {
        self.boundary
    }

    /// Edge taken from `state` on the packed `input` during an information
    /// section.
    pub fn edge(&self, state: usize, input: usize) -> Transition {
        self.trans[(state << self.k_in) | input]
    }

    /// The forced edge from `state` during a flush section.
    pub fn tail_edge(&self, state: usize) -> Transition {
        self.tail_trans[state]
    }
}

/// Builds the decoding trellis of `g` over `l` information steps.
///
/// In tail-biting mode the length must be feasible; in zero-terminated mode
/// the trellis gains `m` flush sections with forced inputs.
pub fn build_trellis(g: &RationalGeneratorMatrix, l: usize, mode: BoundaryMode) -> Result<Trellis> {
    if mode == BoundaryMode::TailBiting {
        for i in 0..g.k() {
            if !tailbiting_feasible(g.feedback_poly(i), l) {
                return Err(Error::NotCoprime { l, row: Some(i) });
            }
        }
    }
    let nu = g.constraint_length();
    assert!(nu < 28, "trellis state space 2^{nu} is too large");
    let num_states = 1usize << nu;
    let k = g.k();
    let mut enc = RscEncoder::new(g);
    let mut trans = Vec::with_capacity(num_states << k);
    let mut tail_trans = Vec::with_capacity(num_states);
    let mut inputs = vec![0u8; k];
    for state in 0..num_states {
        for packed in 0..1usize << k {
            for (i, b) in inputs.iter_mut().enumerate() {
                *b = ((packed >> i) & 1) as u8;
            }
            enc.set_state_index(state);
            let out = enc.step(&inputs);
            trans.push(Transition {
                next: enc.state_index() as u32,
                output: pack_bits(&out),
                input: packed as u32,
            });
        }
        enc.set_state_index(state);
        let flush = enc.flush_inputs();
        let out = enc.flush_step();
        tail_trans.push(Transition {
            next: enc.state_index() as u32,
            output: pack_bits(&out),
            input: pack_bits(&flush),
        });
    }
    let tail_sections = match mode {
        BoundaryMode::ZeroTerminated => g.memory(),
        BoundaryMode::TailBiting => 0,
    };
    Ok(Trellis {
        num_states,
        k_in: k,
        n_out: g.n(),
        info_sections: l,
        tail_sections,
        boundary: mode,
        trans,
        tail_trans,
    })
}

fn pack_bits(bits: &[u8]) -> u32 {
    bits.iter().enumerate().fold(0, |acc, (i, &b)| acc | ((b as u32 & 1) << i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> BinaryPolynomial {
        BinaryPolynomial::parse(s).unwrap()
    }

    /// The worked rate 3/4 code: r_i = 1 + x^2 + x^4 for every stream.
    fn example_rate34() -> RationalGeneratorMatrix {
        RationalGeneratorMatrix::new(
            vec![vec![p("11011")], vec![p("10011")], vec![p("11101")]],
            vec![p("10101"), p("10101"), p("10101")],
        )
        .unwrap()
    }

    /// `[1, (1+x^2)/(1+x+x^2)]`, the terminated-turbo component code.
    fn g_a() -> RationalGeneratorMatrix {
        RationalGeneratorMatrix::new(vec![vec![p("101")]], vec![p("111")]).unwrap()
    }

    #[test]
    fn observer_matrix_layout() {
        let a = observer_state_matrix(&p("1011")).unwrap(); // 1 + x^2 + x^3
        let expected =
            BinMatrix::from_rows(&[vec![0, 0, 1], vec![1, 0, 1], vec![0, 1, 0]]).unwrap();
        assert_eq!(a, expected);

        let a = observer_state_matrix(&p("11")).unwrap(); // 1 + x
        assert_eq!(a, BinMatrix::from_rows(&[vec![1]]).unwrap());

        let a = observer_state_matrix(&p("10101")).unwrap(); // 1 + x^2 + x^4
        let last_col: Vec<u8> = (0..4).map(|i| a.get(i, 3) as u8).collect();
        assert_eq!(last_col, vec![1, 0, 1, 0]);
        assert!(observer_state_matrix(&p("1")).is_err());
    }

    #[test]
    fn feasibility_examples() {
        assert!(tailbiting_feasible(&p("10101"), 8));
        assert!(!tailbiting_feasible(&p("111"), 3)); // 1+x+x^2 divides x^3+1
        assert!(tailbiting_feasible(&p("111"), 2));
    }

    #[test]
    fn feasibility_matches_observer_determinant() {
        // det(A^L - I) != 0  <=>  gcd(r, x^L - 1) = 1, for realizable
        // feed-back polynomials (constant term 1), exhaustively.
        for m in 1..=4usize {
            for mid in 0..1u32 << (m - 1) {
                let mut coeffs = vec![0u8; m + 1];
                coeffs[0] = 1;
                coeffs[m] = 1;
                for t in 1..m {
                    coeffs[t] = ((mid >> (t - 1)) & 1) as u8;
                }
                let r = BinaryPolynomial::from_coeffs(&coeffs);
                let a = observer_state_matrix(&r).unwrap();
                for l in 1..=16usize {
                    let al_i = a.pow(l).add(&BinMatrix::identity(m));
                    assert_eq!(
                        al_i.det_nonzero(),
                        tailbiting_feasible(&r, l),
                        "r = {r}, L = {l}"
                    );
                }
            }
        }
    }

    #[test]
    fn tailbite_reproduces_worked_example() {
        let g = example_rate34();
        let b = tailbite(&g, 8).unwrap();
        assert_eq!((b.k(), b.n()), (24, 32));
        // [I_24 | F] with circulant blocks from the solved f polynomials.
        let expected_f = [
            BinaryPolynomial::from_support(&[2, 3, 5, 6]),
            BinaryPolynomial::from_support(&[1, 2, 3, 6, 7]),
            BinaryPolynomial::from_support(&[0, 1, 5, 7]),
        ];
        for (i, f) in expected_f.iter().enumerate() {
            let circ = CirculantMatrix::new(f.clone(), 8).unwrap();
            for t in 0..8 {
                for c in 0..8 {
                    assert_eq!(b.generator().get(i * 8 + t, 24 + c), circ.entry(t, c));
                }
            }
        }
        for r in 0..24 {
            for c in 0..24 {
                assert_eq!(b.generator().get(r, c), r == c);
            }
        }
    }

    #[test]
    fn tailbite_row_space_matches_unreduced_form() {
        // The block code can equivalently be generated by
        // [diag(R_i) | Q_{i,j}] with circulants of r_i and q_{i,j}.
        let g = example_rate34();
        let l = 8;
        let b = tailbite(&g, l).unwrap();
        let mut alt = BinMatrix::zeros(3 * l, 4 * l);
        for i in 0..3 {
            let r_circ = CirculantMatrix::new(g.feedback_poly(i).clone(), l).unwrap();
            let q_circ = CirculantMatrix::new(g.parity_entry(i, 0).clone(), l).unwrap();
            for t in 0..l {
                for c in 0..l {
                    if r_circ.entry(t, c) {
                        alt.set(i * l + t, i * l + c, true);
                    }
                    if q_circ.entry(t, c) {
                        alt.set(i * l + t, 3 * l + c, true);
                    }
                }
            }
        }
        assert!(b.generator().row_space_eq(&alt));
    }

    #[test]
    fn tailbite_full_rank_and_rates() {
        for l in [4usize, 7, 8] {
            if let Ok(b) = tailbite(&example_rate34(), l) {
                assert_eq!(b.generator().rank(), b.k());
                assert_eq!(b.n() * 3, b.k() * 4); // rate exactly K/N
            }
        }
    }

    #[test]
    fn tailbite_zero_numerators_give_identity_parity() {
        let g = RationalGeneratorMatrix::new(
            vec![vec![BinaryPolynomial::zero()]],
            vec![p("111")],
        )
        .unwrap();
        let b = tailbite(&g, 2).unwrap();
        for r in 0..2 {
            for c in 0..4 {
                assert_eq!(b.generator().get(r, c), r == c);
            }
        }
    }

    #[test]
    fn tailbite_propagates_offending_row() {
        let g = RationalGeneratorMatrix::new(
            vec![vec![p("101")], vec![p("01")]],
            vec![p("111"), p("111")],
        )
        .unwrap();
        assert_eq!(tailbite(&g, 3).unwrap_err(), Error::NotCoprime { l: 3, row: Some(0) });
    }

    #[test]
    fn tailbite_round_trips_through_remultiplication() {
        // K=1 code at L=7: the solved f, re-multiplied by r, returns q.
        let g = RationalGeneratorMatrix::new(vec![vec![p("101")]], vec![p("111")]).unwrap();
        let f = solve_f(g.parity_entry(0, 0), g.feedback_poly(0), 7).unwrap();
        assert_eq!(f.mul_mod(g.feedback_poly(0), 7), *g.parity_entry(0, 0));
        let b = tailbite(&g, 7).unwrap();
        let circ = CirculantMatrix::new(f, 7).unwrap();
        for t in 0..7 {
            for c in 0..7 {
                assert_eq!(b.generator().get(t, 7 + c), circ.entry(t, c));
            }
        }
    }

    #[test]
    fn terminate_shapes_and_zero_state() {
        let b = terminate(&g_a(), 8).unwrap();
        assert_eq!((b.n(), b.k()), (20, 8)); // 2 * (8 + 2)
        assert_eq!(encode_block(&b, &[0; 8]).unwrap(), vec![0; 20]);
    }

    #[test]
    fn terminate_impulse_response() {
        // Single impulse: codeword equals the truncated impulse response
        // plus the tail; the encoder replay must end in the zero state.
        let g = g_a();
        let b = terminate(&g, 8).unwrap();
        let mut u = vec![0u8; 8];
        u[0] = 1;
        let cw = encode_block(&b, &u).unwrap();
        let mut enc = RscEncoder::new(&g);
        let mut expected = vec![0u8; 20];
        for t in 0..10 {
            let out = if t < 8 { enc.step(&[u[t]]) } else { enc.flush_step() };
            expected[t] = out[0];
            expected[10 + t] = out[1];
        }
        assert!(enc.state_is_zero());
        assert_eq!(cw, expected);
    }

    /// Tail-biting encode through a circular state-machine replay: solve
    /// the fixed point S = A^L S + Z(u) of the controller-form update and
    /// re-run the encoder from it.
    fn circular_encode(g: &RationalGeneratorMatrix, l: usize, u: &[u8]) -> Vec<u8> {
        let nu = g.constraint_length();
        let mut enc = RscEncoder::new(g);
        // Controller-form state matrix column by column.
        let mut a = BinMatrix::zeros(nu, nu);
        for j in 0..nu {
            enc.set_state_index(1 << j);
            enc.step(&vec![0; g.k()]);
            let s = enc.state_index();
            for i in 0..nu {
                if (s >> i) & 1 == 1 {
                    a.set(i, j, true);
                }
            }
        }
        // Zero-state response of the input block.
        enc.reset();
        for t in 0..l {
            let inputs: Vec<u8> = (0..g.k()).map(|i| u[i * l + t]).collect();
            enc.step(&inputs);
        }
        let z = enc.state_index();
        // Solve (A^L + I) s0 = z over GF(2).
        let al_i = a.pow(l).add(&BinMatrix::identity(nu));
        let mut aug = BinMatrix::zeros(nu, nu + 1);
        for r in 0..nu {
            for c in 0..nu {
                if al_i.get(r, c) {
                    aug.set(r, c, true);
                }
            }
            if (z >> r) & 1 == 1 {
                aug.set(r, nu, true);
            }
        }
        let (rr, pivots) = aug.rref();
        assert_eq!(pivots.len(), nu, "tail-biting length must be feasible");
        let mut s0 = 0usize;
        for (row, &pc) in pivots.iter().enumerate() {
            if rr.get(row, nu) {
                s0 |= 1 << pc;
            }
        }
        // Re-run from the fixed point and collect stream-major outputs.
        enc.set_state_index(s0);
        let mut cw = vec![0u8; g.n() * l];
        for t in 0..l {
            let inputs: Vec<u8> = (0..g.k()).map(|i| u[i * l + t]).collect();
            let out = enc.step(&inputs);
            for (o, &bit) in out.iter().enumerate() {
                cw[o * l + t] = bit;
            }
        }
        assert_eq!(enc.state_index(), s0, "wrap-around state mismatch");
        cw
    }

    #[test]
    fn encode_block_unit_rows_and_circular_oracle() {
        let g = example_rate34();
        let b = tailbite(&g, 8).unwrap();
        let mut u = vec![0u8; 24];
        u[5] = 1;
        assert_eq!(encode_block(&b, &u).unwrap(), b.generator().row_bits(5));

        let mut rng_state = 0x9e3779b97f4a7c15u64;
        for _ in 0..20 {
            let u: Vec<u8> = (0..24)
                .map(|_| {
                    rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1);
                    ((rng_state >> 33) & 1) as u8
                })
                .collect();
            assert_eq!(encode_block(&b, &u).unwrap(), circular_encode(&g, 8, &u));
        }
    }

    #[test]
    fn trellis_structure() {
        let t = build_trellis(&g_a(), 8, BoundaryMode::ZeroTerminated).unwrap();
        assert_eq!(t.num_states(), 4);
        assert_eq!(t.inputs_per_state(), 2);
        assert_eq!(t.total_sections(), 8 + 2);
    }

    #[test]
    fn terminated_trellis_paths_are_codewords() {
        let g = g_a();
        let l = 4;
        let b = terminate(&g, l).unwrap();
        let t = build_trellis(&g, l, BoundaryMode::ZeroTerminated).unwrap();
        for msg in 0..16u32 {
            let u: Vec<u8> = (0..4).map(|i| ((msg >> i) & 1) as u8).collect();
            let cw = encode_block(&b, &u).unwrap();
            // Walk the unique zero-to-zero path for this message.
            let mut state = 0usize;
            let mut path = vec![0u8; cw.len()];
            for sec in 0..t.total_sections() {
                let e = if sec < l { t.edge(state, u[sec] as usize) } else { t.tail_edge(state) };
                for o in 0..t.n_out() {
                    path[o * b.steps() + sec] = ((e.output >> o) & 1) as u8;
                }
                state = e.next as usize;
            }
            assert_eq!(state, 0);
            assert_eq!(path, cw);
        }
    }

    #[test]
    fn tailbiting_trellis_cycles_are_codewords() {
        let g = RationalGeneratorMatrix::new(vec![vec![p("101")]], vec![p("111")]).unwrap();
        let l = 4;
        let b = tailbite(&g, l).unwrap();
        let t = build_trellis(&g, l, BoundaryMode::TailBiting).unwrap();
        for msg in 0..16u32 {
            let u: Vec<u8> = (0..4).map(|i| ((msg >> i) & 1) as u8).collect();
            let cw = encode_block(&b, &u).unwrap();
            // Exactly one start state closes the cycle, and its path must
            // reproduce the algebraic codeword.
            let mut matches = 0;
            for start in 0..t.num_states() {
                let mut state = start;
                let mut path = vec![0u8; cw.len()];
                for sec in 0..l {
                    let e = t.edge(state, u[sec] as usize);
                    for o in 0..t.n_out() {
                        path[o * l + sec] = ((e.output >> o) & 1) as u8;
                    }
                    state = e.next as usize;
                }
                if state == start {
                    matches += 1;
                    assert_eq!(path, cw);
                }
            }
            assert_eq!(matches, 1);
        }
    }

    #[test]
    fn trellis_rejects_infeasible_tailbiting_length() {
        assert!(matches!(
            build_trellis(&g_a(), 3, BoundaryMode::TailBiting),
            Err(Error::NotCoprime { l: 3, row: Some(0) })
        ));
    }

    #[test]
    fn generator_text_round_trip() {
        let g = example_rate34();
        let parsed = RationalGeneratorMatrix::parse(&g.to_text()).unwrap();
        assert_eq!(parsed, g);
        assert!(RationalGeneratorMatrix::parse("101/100").is_err()); // r(0) = 0
    }

    proptest! {
        #[test]
        fn encoding_is_linear(a_bits in 0u32..256, b_bits in 0u32..256) {
            let g = RationalGeneratorMatrix::new(
                vec![vec![p("101")]],
                vec![p("111")],
            ).unwrap();
            let b = tailbite(&g, 8).unwrap();
            let ua: Vec<u8> = (0..8).map(|i| ((a_bits >> i) & 1) as u8).collect();
            let ub: Vec<u8> = (0..8).map(|i| ((b_bits >> i) & 1) as u8).collect();
            let sum: Vec<u8> = ua.iter().zip(&ub).map(|(x, y)| x ^ y).collect();
            let ca = encode_block(&b, &ua).unwrap();
            let cb = encode_block(&b, &ub).unwrap();
            let csum = encode_block(&b, &sum).unwrap();
            let xor: Vec<u8> = ca.iter().zip(&cb).map(|(x, y)| x ^ y).collect();
            prop_assert_eq!(csum, xor);
        }
    }
}
