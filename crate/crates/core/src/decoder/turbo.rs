//! Iterative turbo decoding: extrinsic exchange between two component BCJR
//! decoders.
//!
//! The decoder handles two-branch turbo generators with either tail-bitten
//! or zero-tail terminated components. For terminated components the
//! second branch's flush bits are not transmitted, so its trellis sees
//! zero LLRs on the tail systematic positions. A whole message suffix can
//! be frozen to zero (huge prior), which turns the decoder into a decoder
//! for the row-prefix subcodes of a nested family.

use super::bcjr::bcjr;
use super::LevelDecoder;
use crate::convcode::{build_trellis, BlockForm, BoundaryMode, Trellis};
use crate::turbocode::TurboGenerator;
use crate::{Error, Result};

/// Prior magnitude used to pin frozen message bits to zero.
const FROZEN_LLR: f64 = 1e9;

/// Hard decisions of a turbo decode, message and re-encoded codeword.
#[derive(Clone, Debug)]
pub struct DecodedBlock {
    pub message: Vec<u8>,
    pub codeword: Vec<u8>,
}

/// Iterative decoder bound to one turbo generator.
///
/// Decoding is deterministic: fixed iteration count, no internal
/// randomness, ties resolved toward bit 0.
pub struct TurboDecoder {
    t: TurboGenerator,
    trellis: Trellis,
    iterations: usize,
    /// Images pi(r) of the second branch's message positions.
    pi_map: Vec<usize>,
}

impl TurboDecoder {
    pub fn new(t: TurboGenerator, iterations: usize) -> Result<Self> {
        if t.branches() != 2 {
            return Err(Error::InvalidInput(
                "the iterative decoder supports exactly two branches".into(),
            ));
        }
        if iterations == 0 {
            return Err(Error::InvalidInput("at least one iteration is required".into()));
        }
        let component = t.component();
        let mode = match component.form() {
            BlockForm::TailBitten => BoundaryMode::TailBiting,
            BlockForm::Terminated { .. } => BoundaryMode::ZeroTerminated,
        };
        let trellis = build_trellis(component.code(), component.l(), mode)?;
        let pi_map = (0..t.k()).map(|r| t.interleaver(1).image(r)).collect();
        Ok(Self { t, trellis, iterations, pi_map })
    }

    pub fn generator(&self) -> &TurboGenerator {
        &self.t
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Channel LLRs of one branch in trellis order `[section * N + output]`.
    fn branch_llrs(&self, llrs: &[f64], branch: usize) -> Vec<f64> {
        let comp = self.t.component();
        let (k_in, n_out) = (comp.streams_in(), comp.streams_out());
        let l = comp.l();
        let total = self.trellis.total_sections();
        let mut out = vec![0.0; total * n_out];
        for sec in 0..total {
            for stream in 0..k_in {
                let v = if sec < l {
                    let r = comp.message_index(stream, sec);
                    let msg = if branch == 0 { r } else { self.pi_map[r] };
                    llrs[self.t.info_col(msg)]
                } else {
                    match (branch, self.t.sys_tail_col(stream, sec - l)) {
                        // Branch 1 transmits its flush bits; branch 2's are
                        // not part of the codeword.
                        (0, Some(col)) => llrs[col],
                        _ => 0.0,
                    }
                };
                out[sec * n_out + stream] = v;
            }
            for p in 0..n_out - k_in {
                out[sec * n_out + k_in + p] = llrs[self.t.parity_col(branch, p, sec)];
            }
        }
        out
    }

    /// Decodes soft channel input (length `n`) to hard message/codeword
    /// decisions.
    pub fn decode_soft(
        &mut self,
        input: &super::SoftInput,
        frozen_from: Option<usize>,
    ) -> Result<DecodedBlock> {
        self.decode(&input.llrs, frozen_from)
    }

    /// Decodes per-coordinate channel LLRs (positive favors 0). Message
    /// bits at positions `>= frozen_from` are pinned to zero.
    pub fn decode(&mut self, llrs: &[f64], frozen_from: Option<usize>) -> Result<DecodedBlock> {
        let (k, n) = (self.t.k(), self.t.n());
        if llrs.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: llrs.len() });
        }
        let llrs0 = self.branch_llrs(llrs, 0);
        let llrs1 = self.branch_llrs(llrs, 1);
        let sys_chan: Vec<f64> = (0..k).map(|r| llrs[self.t.info_col(r)]).collect();
        let frozen = |r: usize| match frozen_from {
            Some(from) if r >= from => FROZEN_LLR,
            _ => 0.0,
        };

        // BCJR indexes information bits in trellis order (section-major);
        // message vectors are stream-major. The two only coincide for one
        // input stream, so convert explicitly at the boundary.
        let k_in = self.t.component().streams_in();
        let l = self.t.component().l();
        let msg_of_trellis: Vec<usize> =
            (0..k).map(|ti| (ti % k_in) * l + ti / k_in).collect();

        // Extrinsic values in message order (branch-1 positions).
        let mut extr0 = vec![0.0; k];
        let mut extr1_dep = vec![0.0; k];
        let mut apriori = vec![0.0; k];
        for _ in 0..self.iterations {
            for (ti, &r) in msg_of_trellis.iter().enumerate() {
                apriori[ti] = extr1_dep[r] + frozen(r);
            }
            let out0 = bcjr(&self.trellis, &llrs0, &apriori);
            for (ti, &r) in msg_of_trellis.iter().enumerate() {
                extr0[r] = out0.extrinsic[ti];
            }
            for (ti, &r2) in msg_of_trellis.iter().enumerate() {
                // Branch-2 message bit r2 is branch-1 bit pi(r2).
                apriori[ti] = extr0[self.pi_map[r2]] + frozen(self.pi_map[r2]);
            }
            let out1 = bcjr(&self.trellis, &llrs1, &apriori);
            for (ti, &r2) in msg_of_trellis.iter().enumerate() {
                extr1_dep[self.pi_map[r2]] = out1.extrinsic[ti];
            }
        }

        let mut message = vec![0u8; k];
        for r in 0..k {
            let post = sys_chan[r] + extr0[r] + extr1_dep[r] + frozen(r);
            message[r] = if post >= 0.0 { 0 } else { 1 };
        }
        if let Some(from) = frozen_from {
            for b in &mut message[from..] {
                *b = 0;
            }
        }
        let codeword = self.t.encode(&message)?;
        Ok(DecodedBlock { message, codeword })
    }
}

/// [`LevelDecoder`] adapter: a turbo decoder with a frozen suffix decodes
/// the row-prefix subcode of a nested family.
pub struct TurboLevelDecoder {
    dec: TurboDecoder,
    frozen_from: Option<usize>,
}

impl TurboLevelDecoder {
    pub fn new(dec: TurboDecoder, frozen_from: Option<usize>) -> Self {
        Self { dec, frozen_from }
    }
}

impl LevelDecoder for TurboLevelDecoder {
    fn code_len(&self) -> usize {
        self.dec.generator().n()
    }

    fn decode_codeword(&mut self, llrs: &[f64]) -> Vec<u8> {
        self.dec.decode(llrs, self.frozen_from).expect("length checked by caller").codeword
    }
}
