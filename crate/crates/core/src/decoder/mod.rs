//! Decoding: BCJR on a trellis, iterative turbo decoding, the mod-2
//! coordinate metric, per-level decoding of `C + 2Z^n`, and the multi-stage
//! lattice decoder.
//!
//! The multi-stage decoder works on the scaled code formula
//! `2^(a-1) Lambda = C_a + 2 C_{a-1} + .. + 2^(a-1) C_1 + 2^a Z^n`:
//! it scales the received vector by `2^(a-1)`, then peels one level per
//! step, decoding `C_l + 2Z^n` and halving the residual. Per-coordinate
//! soft information for a level comes from the distance difference between
//! the nearest even and odd integers (positive metric favors bit 0 / even).
//!
//! LLR sign convention everywhere: positive favors bit 0.

mod bcjr;
mod ml;
mod turbo;

pub use bcjr::{bcjr, BcjrOutput};
pub use ml::MlCodewordDecoder;
pub use turbo::{DecodedBlock, TurboDecoder};

use crate::lattice::{Hnf, LatticeBasis};
use crate::turbocode::NestedTurboFamily;
use crate::{Error, Result};

/// Per-coordinate soft channel input: log-likelihood ratios for bit 0
/// versus bit 1 plus the noise variance they were computed at.
#[derive(Clone, Debug)]
pub struct SoftInput {
    pub llrs: Vec<f64>,
    pub noise_var: f64,
}

impl SoftInput {
    pub fn new(llrs: Vec<f64>, noise_var: f64) -> Result<Self> {
        if llrs.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("LLRs must be finite".into()));
        }
        if !noise_var.is_finite() || noise_var <= 0.0 {
            return Err(Error::InvalidInput("noise variance must be positive".into()));
        }
        Ok(Self { llrs, noise_var })
    }
}

/// Rounds half toward negative infinity (`0.5 -> 0`, `-0.5 -> -1`).
pub fn round_half_down(x: f64) -> f64 {
    (x - 0.5).ceil()
}

/// Output of [`mod2_metric`]: per-coordinate nearest even/odd anchors, the
/// signed confidence `t` (positive means the even anchor is closer) and the
/// mod-2 folded received value `s` in `[0, 2)`.
#[derive(Clone, Debug)]
pub struct Mod2Metric {
    pub t: Vec<f64>,
    pub s: Vec<f64>,
    pub even: Vec<f64>,
    pub odd: Vec<f64>,
}

/// The mod-2 coordinate metric: for every coordinate `r_j`, the nearest
/// even integer `e_j`, nearest odd integer `o_j`, the metric
/// `t_j = 2(±(e_j+o_j)/2 ∓ r_j)` (upper signs when `e_j < o_j`) and
/// `s_j = r_j mod 2`.
///
/// Exact half-integer ties round toward negative infinity, making the
/// decomposition deterministic; `t_j = 0` in exact even/odd ties.
pub fn mod2_metric(r: &[f64]) -> Mod2Metric {
    let mut t = Vec::with_capacity(r.len());
    let mut s = Vec::with_capacity(r.len());
    let mut even = Vec::with_capacity(r.len());
    let mut odd = Vec::with_capacity(r.len());
    for &x in r {
        let e = 2.0 * round_half_down(x / 2.0);
        let o = 2.0 * round_half_down((x - 1.0) / 2.0) + 1.0;
        let tj = if e < o { e + o - 2.0 * x } else { 2.0 * x - e - o };
        t.push(tj);
        s.push(x.rem_euclid(2.0));
        even.push(e);
        odd.push(o);
    }
    Mod2Metric { t, s, even, odd }
}

/// A soft-input codeword decoder for one level code, pluggable so the
/// multi-stage decoder can run with iterative turbo decoders in production
/// and exhaustive maximum-likelihood decoders as an oracle.
pub trait LevelDecoder {
    /// Codeword length `n`.
    fn code_len(&self) -> usize;

    /// Decodes per-coordinate LLRs (positive favors 0) to a codeword.
    fn decode_codeword(&mut self, llrs: &[f64]) -> Vec<u8>;
}

/// Result of decoding one level lattice `C_l + 2Z^n`.
#[derive(Clone, Debug)]
pub struct LevelDecodeResult {
    /// The decoded point: codeword bits anchored to the nearest even/odd
    /// integers (`x mod 2` equals the codeword).
    pub point: Vec<i64>,
    pub codeword: Vec<u8>,
}

/// Decodes `r` in `C + 2Z^n`: computes the mod-2 metric, scales it to
/// channel LLRs (`2 t_j / sigma^2`), runs the codeword decoder, and maps
/// bit 0 back to `e_j`, bit 1 to `o_j`.
pub fn decode_level(
    dec: &mut dyn LevelDecoder,
    r: &[f64],
    noise_var: f64,
) -> Result<LevelDecodeResult> {
    if r.len() != dec.code_len() {
        return Err(Error::LengthMismatch { expected: dec.code_len(), got: r.len() });
    }
    let m = mod2_metric(r);
    let llrs: Vec<f64> = m.t.iter().map(|&t| 2.0 * t / noise_var).collect();
    let codeword = dec.decode_codeword(&llrs);
    debug_assert_eq!(codeword.len(), r.len());
    let point: Vec<i64> = codeword
        .iter()
        .zip(m.even.iter().zip(&m.odd))
        .map(|(&b, (&e, &o))| if b == 0 { e as i64 } else { o as i64 })
        .collect();
    debug_assert!(point
        .iter()
        .zip(&codeword)
        .all(|(&x, &b)| (x.rem_euclid(2)) as u8 == b));
    Ok(LevelDecodeResult { point, codeword })
}

/// Result of a multi-stage decode: the lattice point (stored scaled by
/// `2^(a-1)`), the per-level decisions, and the recovered even vector `w`,
/// tied together by
/// `2^(a-1) x = x_a + 2 x_{a-1} + .. + 2^(a-1) x_1 + 2^(a-1) w`.
#[derive(Clone, Debug)]
pub struct MultiStageResult {
    pub x_scaled: Vec<i64>,
    pub scale_log2: u32,
    /// Level results, level 1 (outermost code) first.
    pub levels: Vec<LevelDecodeResult>,
    pub w: Vec<i64>,
    /// Exact membership of the output in the lattice, when a basis solver
    /// was attached. Guaranteed inside the bounded-distance ball; decisions
    /// made far outside it can be incoherent across levels.
    pub lattice_member: Option<bool>,
}

impl MultiStageResult {
    /// The decoded point as reals.
    pub fn point(&self) -> Vec<f64> {
        let scale = (1i64 << self.scale_log2) as f64;
        self.x_scaled.iter().map(|&v| v as f64 / scale).collect()
    }
}

/// Multi-stage decoder for `Lambda = C_1 + C_2/2 + .. + C_a 2^(1-a) + 2Z^n`:
/// one component-code decode per level and nothing else.
pub struct MultiStageDecoder {
    levels: Vec<Box<dyn LevelDecoder + Send>>,
    solver: Option<Hnf>,
    n: usize,
}

impl MultiStageDecoder {
    /// Builds from per-level decoders (level 1 first) and an optional basis
    /// for exact membership checking of outputs.
    pub fn from_parts(
        levels: Vec<Box<dyn LevelDecoder + Send>>,
        basis: Option<&LatticeBasis>,
    ) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidInput("at least one level decoder is required".into()));
        }
        let n = levels[0].code_len();
        if levels.iter().any(|d| d.code_len() != n) {
            return Err(Error::InvalidInput("level decoders disagree on the code length".into()));
        }
        let solver = match basis {
            Some(b) => {
                if b.n() != n {
                    return Err(Error::LengthMismatch { expected: n, got: b.n() });
                }
                if b.levels() != levels.len() {
                    return Err(Error::LengthMismatch {
                        expected: levels.len(),
                        got: b.levels(),
                    });
                }
                Some(b.hnf()?)
            }
            None => None,
        };
        Ok(Self { levels, solver, n })
    }

    /// Iterative-turbo-per-level decoder for a nested turbo family.
    pub fn turbo(
        family: &NestedTurboFamily,
        iterations: usize,
        basis: Option<&LatticeBasis>,
    ) -> Result<Self> {
        let k = family.turbo().k();
        let mut levels: Vec<Box<dyn LevelDecoder + Send>> = Vec::new();
        for l in 1..=family.levels() {
            let frozen = (family.rank(l) < k).then(|| family.rank(l));
            levels.push(Box::new(turbo::TurboLevelDecoder::new(
                TurboDecoder::new(family.turbo().clone(), iterations)?,
                frozen,
            )));
        }
        Self::from_parts(levels, basis)
    }

    /// Exhaustive-ML-per-level decoder (the bounded-distance oracle;
    /// level ranks are capped by the ML budget).
    pub fn exhaustive_ml(
        family: &NestedTurboFamily,
        basis: Option<&LatticeBasis>,
    ) -> Result<Self> {
        let mut levels: Vec<Box<dyn LevelDecoder + Send>> = Vec::new();
        for l in 1..=family.levels() {
            levels.push(Box::new(MlCodewordDecoder::new(&family.level_generator(l))?));
        }
        Self::from_parts(levels, basis)
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn code_len(&self) -> usize {
        self.n
    }

    /// Decodes `r` received at noise variance `noise_var`.
    ///
    /// Step 1 scales by `2^(a-1)` (noise deviation scales along); step 2
    /// decodes levels `a` down to `1`, halving the residual and the noise
    /// deviation; step 3 recovers `w` from the final residual by rounding
    /// to the nearest even vector and assembles the lattice point.
    pub fn decode(&mut self, r: &[f64], noise_var: f64) -> Result<MultiStageResult> {
        if r.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: r.len() });
        }
        let a = self.levels.len();
        let scale = (1u64 << (a - 1)) as f64;
        let mut r_cur: Vec<f64> = r.iter().map(|&x| x * scale).collect();
        let mut var_cur = noise_var * scale * scale;
        let mut per_level: Vec<Option<LevelDecodeResult>> = (0..a).map(|_| None).collect();
        for level in (1..=a).rev() {
            let res = decode_level(self.levels[level - 1].as_mut(), &r_cur, var_cur)?;
            for (rc, &x) in r_cur.iter_mut().zip(&res.point) {
                *rc = (*rc - x as f64) / 2.0;
            }
            var_cur /= 4.0;
            per_level[level - 1] = Some(res);
        }
        let levels: Vec<LevelDecodeResult> = per_level.into_iter().map(Option::unwrap).collect();
        let w: Vec<i64> = r_cur.iter().map(|&x| 2 * round_half_down(x) as i64).collect();
        let mut x_scaled = vec![0i64; self.n];
        for (level, res) in levels.iter().enumerate() {
            // level index 0 is level 1: weight 2^(a-1-level_index).
            let weight = 1i64 << (a - 1 - level);
            for (acc, &x) in x_scaled.iter_mut().zip(&res.point) {
                *acc += weight * x;
            }
        }
        let w_weight = 1i64 << (a - 1);
        for (acc, &wv) in x_scaled.iter_mut().zip(&w) {
            *acc += w_weight * wv;
        }
        let lattice_member = self.solver.as_ref().map(|h| h.contains(&x_scaled));
        Ok(MultiStageResult {
            x_scaled,
            scale_log2: (a - 1) as u32,
            levels,
            w,
            lattice_member,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mod2_metric_worked_values() {
        let m = mod2_metric(&[0.3, 1.7, -0.2]);
        assert_eq!(m.even, vec![0.0, 2.0, 0.0]);
        assert_eq!(m.odd, vec![1.0, 1.0, -1.0]);
        let expect_t = [0.4, 0.4, 0.6];
        let expect_s = [0.3, 1.7, 1.8];
        for i in 0..3 {
            assert!((m.t[i] - expect_t[i]).abs() < 1e-12);
            assert!((m.s[i] - expect_s[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn mod2_metric_tie_handling() {
        // r = 1.0: equidistant evens 0 and 2; half rounds toward -inf.
        let m = mod2_metric(&[1.0, 0.5]);
        assert_eq!((m.even[0], m.odd[0]), (0.0, 1.0));
        assert!((m.t[0] + 1.0).abs() < 1e-12); // odd is the exact point
        assert_eq!(m.t[1], 0.0); // exact even/odd tie
    }

    #[test]
    fn mod2_metric_sign_law() {
        // t > 0 iff the coordinate is strictly closer to its nearest even.
        for i in 0..2000 {
            let x = -5.0 + i as f64 * 0.005003;
            let m = mod2_metric(&[x]);
            let de = (x - m.even[0]).abs();
            let do_ = (x - m.odd[0]).abs();
            if de < do_ {
                assert!(m.t[0] > 0.0, "x = {x}");
            } else if do_ < de {
                assert!(m.t[0] < 0.0, "x = {x}");
            }
        }
    }
}
