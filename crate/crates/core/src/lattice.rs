//! Construction A and Construction D lattices, their figures of merit, and
//! a brute-force short-vector oracle.
//!
//! A Construction D lattice over nested codes `C_1 ⊇ .. ⊇ C_a` of ranks
//! `k_1 > .. > k_a` is spanned by the rows `k_{l+1}+1 .. k_l` of the level-1
//! generator scaled by `2^(1-l)`, plus vectors `2 e_i` on the columns not
//! covered by generator pivots. Its volume is `2^(n - sum k_l)`.
//!
//! All construction and determinant arithmetic is exact: a basis is stored
//! as an integer matrix with a global power-of-two denominator, and
//! determinants, membership tests and short-vector enumeration run on the
//! integers (Hermite normal form, no floating point).

use num_rational::Ratio;

use crate::binmat::BinMatrix;
use crate::turbocode::{NestedTurboFamily, WeightSpectrum};
use crate::{Error, Result};

/// Dimension cap for short-vector enumeration.
pub const ENUM_DIM_BUDGET: usize = 16;
/// Squared-radius cap for short-vector enumeration.
pub const ENUM_RADIUS_BUDGET: i64 = 8;

// ---------------------------------------------------------------------------
// Nested code families
// ---------------------------------------------------------------------------

/// A nested family of binary codes given by row prefixes of one generator:
/// level `l` (1-based) is spanned by the first `k_l` rows.
///
/// The constructor normalizes the matrix so that every row has a private
/// pivot column (zero in all earlier rows' pivots). Normalization adds only
/// earlier rows to later ones, which leaves every prefix span — and hence
/// every level code — unchanged, while guaranteeing that the scaled rows
/// form a genuine integral basis with determinant `2^(n - sum k_l)`.
#[derive(Clone, Debug)]
pub struct NestedCodeFamily {
    gen: BinMatrix,
    /// Ascending `(k_a, .., k_1)`.
    chain: Vec<usize>,
    /// Pivot column of each row.
    pivots: Vec<usize>,
}

impl NestedCodeFamily {
    /// Builds a family from a prefix generator and an ascending chain
    /// `(k_a, .., k_1)` with `k_1` equal to the number of rows.
    pub fn from_prefix_matrix(gen: &BinMatrix, chain: &[usize]) -> Result<Self> {
        if chain.is_empty() {
            return Err(Error::MalformedChain("chain is empty".into()));
        }
        if chain[0] == 0 || !chain.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::MalformedChain("chain must be positive and strictly increasing".into()));
        }
        if *chain.last().unwrap() != gen.rows() {
            return Err(Error::MalformedChain(format!(
                "chain must end at the generator rank {}, ends at {}",
                gen.rows(),
                chain.last().unwrap()
            )));
        }
        let mut m = gen.clone();
        let mut pivots: Vec<usize> = Vec::with_capacity(m.rows());
        for r in 0..m.rows() {
            for (prev, &p) in pivots.iter().enumerate() {
                if m.get(r, p) {
                    m.xor_rows(r, prev);
                }
            }
            let Some(p) = (0..m.cols()).find(|&c| m.get(r, c)) else {
                return Err(Error::RankDeficient);
            };
            pivots.push(p);
        }
        Ok(Self { gen: m, chain: chain.to_vec(), pivots })
    }

    /// Single-level family (Construction A input) from any full-rank code
    /// generator; a zero-rank code is allowed and yields `2Z^n`.
    pub fn single(code: &BinMatrix) -> Result<Self> {
        if code.rows() == 0 {
            return Ok(Self { gen: code.clone(), chain: vec![0], pivots: Vec::new() });
        }
        Self::from_prefix_matrix(code, &[code.rows()])
    }

    pub fn levels(&self) -> usize {
        self.chain.len()
    }

    pub fn n(&self) -> usize {
        self.gen.cols()
    }

    /// Rank `k_level`, level 1 being the full code. A zero-rank single
    /// level is allowed.
    pub fn rank(&self, level: usize) -> usize {
        self.chain[self.chain.len() - level]
    }

    pub fn chain(&self) -> &[usize] {
        &self.chain
    }

    pub fn generator(&self) -> &BinMatrix {
        &self.gen
    }

    /// Generator of level `level` (its first `k_level` rows).
    pub fn level_generator(&self, level: usize) -> BinMatrix {
        self.gen.row_slice(0..self.rank(level))
    }

    /// Level of row `row`: the deepest level whose prefix contains it.
    fn row_level(&self, row: usize) -> usize {
        // chain is ascending; level = a - (entries <= row).
        let below = self.chain.iter().filter(|&&k| k <= row).count();
        self.chain.len() - below
    }
}

impl From<&NestedTurboFamily> for NestedCodeFamily {
    fn from(fam: &NestedTurboFamily) -> Self {
        // Turbo generators are systematic, so prefix normalization is a
        // no-op; the constructor cannot fail on a full-rank matrix.
        Self::from_prefix_matrix(fam.turbo().generator(), fam.chain())
            .expect("systematic turbo generator is full rank")
    }
}

// ---------------------------------------------------------------------------
// Lattice bases
// ---------------------------------------------------------------------------

/// An integer-scaled lattice basis: the real basis is `mat / 2^scale_log2`,
/// rows are basis vectors.
#[derive(Clone, Debug)]
pub struct LatticeBasis {
    n: usize,
    /// Per-level ranks `(k_1, .., k_a)`, descending.
    ranks: Vec<usize>,
    scale_log2: u32,
    /// Row-major `n x n` scaled integer matrix.
    mat: Vec<i64>,
    vol_log2: i64,
}

impl LatticeBasis {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of construction levels `a`.
    pub fn levels(&self) -> usize {
        self.ranks.len()
    }

    /// `k_level` for `level` in `1..=a`.
    pub fn rank(&self, level: usize) -> usize {
        self.ranks[level - 1]
    }

    /// All entries are integer multiples of `2^-scale_log2`.
    pub fn scale_log2(&self) -> u32 {
        self.scale_log2
    }

    /// Entry times `2^scale_log2`.
    pub fn entry_scaled(&self, row: usize, col: usize) -> i64 {
        self.mat[row * self.n + col]
    }

    pub fn row_scaled(&self, row: usize) -> &[i64] {
        &self.mat[row * self.n..(row + 1) * self.n]
    }

    /// `log2` of the covolume `|det B|`, from the construction.
    pub fn volume_log2(&self) -> i64 {
        self.vol_log2
    }

    /// `log2 |det B|` recomputed by exact integer elimination; agrees with
    /// [`volume_log2`](Self::volume_log2) on every valid construction.
    pub fn determinant_log2(&self) -> Result<i64> {
        let h = self.hnf()?;
        let mut det_log2: i64 = 0;
        for i in 0..self.n {
            let d = h.h[i * self.n + i];
            if d <= 0 || d & (d - 1) != 0 {
                return Err(Error::InvalidInput(format!(
                    "determinant is not a power of two (pivot {d})"
                )));
            }
            det_log2 += d.trailing_zeros() as i64;
        }
        Ok(det_log2 - self.n as i64 * self.scale_log2 as i64)
    }

    /// Upper-triangular Hermite form of the scaled integer basis.
    pub fn hnf(&self) -> Result<Hnf> {
        Hnf::of(self.n, self.mat.iter().map(|&v| v as i128).collect())
    }

    /// Basis scaled by `2^shift` (a sublattice refinement/coarsening used
    /// in multi-stage decoding).
    pub fn scaled_pow2(&self, shift: i32) -> Self {
        let mut out = self.clone();
        if shift >= 0 {
            for v in &mut out.mat {
                *v <<= shift;
            }
            out.vol_log2 += shift as i64 * self.n as i64;
        } else {
            out.scale_log2 += (-shift) as u32;
            out.vol_log2 += shift as i64 * self.n as i64;
        }
        out
    }

    /// Plain-text export: one row per line, entries as reduced rationals
    /// (`2`, `0`, `1/2`, ..).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in 0..self.n {
            let row: Vec<String> = (0..self.n)
                .map(|c| dyadic_string(self.entry_scaled(r, c), self.scale_log2))
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Formats `num / 2^scale_log2` as a reduced rational string.
pub fn dyadic_string(num: i64, scale_log2: u32) -> String {
    let mut n = num;
    let mut s = scale_log2;
    while s > 0 && n % 2 == 0 && n != 0 {
        n /= 2;
        s -= 1;
    }
    if n == 0 || s == 0 {
        format!("{n}")
    } else {
        format!("{n}/{}", 1i64 << s)
    }
}

/// Construction A: the lattice `{2z + c : c in C}` of a binary code.
///
/// The basis takes the reduced-echelon rows of `C` as 0/1 integer vectors
/// plus `2 e_i` on the non-pivot columns.
pub fn construction_a(code: &BinMatrix) -> Result<LatticeBasis> {
    if !code.is_full_row_rank() {
        return Err(Error::RankDeficient);
    }
    let (rref, _) = code.rref();
    construction_d(&NestedCodeFamily::single(&rref)?)
}

/// Construction D over a nested code family (level 1 outermost).
pub fn construction_d(fam: &NestedCodeFamily) -> Result<LatticeBasis> {
    let n = fam.n();
    let a = fam.levels();
    let k1 = fam.generator().rows();
    if k1 > n {
        return Err(Error::InvalidInput("more generator rows than columns".into()));
    }
    let scale_log2 = (a - 1) as u32;
    let mut mat = vec![0i64; n * n];
    for row in 0..k1 {
        let level = fam.row_level(row);
        // Real scale 2^(1-level); stored scaled by 2^(a-1).
        let weight = 1i64 << (a - level);
        for c in 0..n {
            if fam.generator().get(row, c) {
                mat[row * n + c] = weight;
            }
        }
    }
    let mut covered = vec![false; n];
    for &p in &fam.pivots {
        covered[p] = true;
    }
    let two = 1i64 << a; // 2 * 2^(a-1)
    let mut row = k1;
    for c in (0..n).filter(|&c| !covered[c]) {
        mat[row * n + c] = two;
        row += 1;
    }
    debug_assert_eq!(row, n);
    let ranks: Vec<usize> = (1..=a).map(|l| fam.rank(l)).collect();
    let vol_log2 = n as i64 - ranks.iter().map(|&k| k as i64).sum::<i64>();
    Ok(LatticeBasis { n, ranks, scale_log2, mat, vol_log2 })
}

// ---------------------------------------------------------------------------
// Hermite normal form: exact determinants, membership solves
// ---------------------------------------------------------------------------

/// Upper-triangular Hermite form of a full-rank square integer matrix,
/// reached by unimodular row operations (same lattice, same |det|).
#[derive(Clone, Debug)]
pub struct Hnf {
    n: usize,
    h: Vec<i128>,
}

impl Hnf {
    fn of(n: usize, mut m: Vec<i128>) -> Result<Self> {
        let idx = |r: usize, c: usize| r * n + c;
        for col in 0..n {
            loop {
                // Pivot: nonzero entry of minimal magnitude at or below row `col`.
                let mut pivot: Option<(usize, i128)> = None;
                for r in col..n {
                    let v = m[idx(r, col)];
                    if v != 0 && pivot.is_none_or(|(_, pv)| v.abs() < pv.abs()) {
                        pivot = Some((r, v));
                    }
                }
                let Some((pr, pv)) = pivot else { return Err(Error::RankDeficient) };
                if pr != col {
                    for c in 0..n {
                        m.swap(idx(pr, c), idx(col, c));
                    }
                }
                let mut done = true;
                for r in col + 1..n {
                    let v = m[idx(r, col)];
                    if v != 0 {
                        let q = v / pv; // toward zero; remainder shrinks
                        for c in col..n {
                            let s = m[idx(col, c)];
                            m[idx(r, c)] -= q * s;
                        }
                        if m[idx(r, col)] != 0 {
                            done = false;
                        }
                    }
                }
                if done {
                    break;
                }
            }
            if m[idx(col, col)] < 0 {
                for c in col..n {
                    m[idx(col, c)] = -m[idx(col, c)];
                }
            }
            // Reduce entries above the pivot to keep growth bounded.
            let d = m[idx(col, col)];
            for r in 0..col {
                let v = m[idx(r, col)];
                let q = v.div_euclid(d);
                if q != 0 {
                    for c in col..n {
                        let s = m[idx(col, c)];
                        m[idx(r, c)] -= q * s;
                    }
                }
            }
        }
        Ok(Self { n, h: m })
    }

    /// Solves `z * H = y` over the integers; `None` when `y` is not a
    /// lattice vector.
    pub fn solve(&self, y: &[i128]) -> Option<Vec<i128>> {
        debug_assert_eq!(y.len(), self.n);
        let mut resid = y.to_vec();
        let mut z = vec![0i128; self.n];
        for i in 0..self.n {
            let d = self.h[i * self.n + i];
            let v = resid[i];
            if v % d != 0 {
                return None;
            }
            let zi = v / d;
            z[i] = zi;
            if zi != 0 {
                for c in i..self.n {
                    resid[c] -= zi * self.h[i * self.n + c];
                }
            }
        }
        resid.iter().all(|&v| v == 0).then_some(z)
    }

    /// Lattice membership of a scaled integer point.
    pub fn contains(&self, y_scaled: &[i64]) -> bool {
        let y: Vec<i128> = y_scaled.iter().map(|&v| v as i128).collect();
        self.solve(&y).is_some()
    }
}

// ---------------------------------------------------------------------------
// Short-vector enumeration
// ---------------------------------------------------------------------------

/// All nonzero lattice vectors of squared norm at most the radius, exact.
#[derive(Clone, Debug)]
pub struct ShortVectors {
    /// `(coordinates * 2^scale_log2, squared norm * 4^scale_log2)`.
    pub vectors: Vec<(Vec<i64>, i64)>,
    pub scale_log2: u32,
}

impl ShortVectors {
    /// Exact squared minimum distance among the found vectors.
    pub fn min_norm_sq(&self) -> Option<Ratio<i64>> {
        self.vectors
            .iter()
            .map(|&(_, ns)| ns)
            .min()
            .map(|ns| Ratio::new(ns, 1i64 << (2 * self.scale_log2)))
    }

    /// Number of vectors attaining the minimum norm (the kissing number
    /// when the search radius covers the minimum distance).
    pub fn kissing(&self) -> usize {
        match self.vectors.iter().map(|&(_, ns)| ns).min() {
            Some(min) => self.vectors.iter().filter(|&&(_, ns)| ns == min).count(),
            None => 0,
        }
    }
}

/// Enumerates every nonzero lattice vector with squared norm `<= radius_sq`
/// by recursive coordinate bounding on the triangularized (HNF) basis.
/// Exact integer arithmetic throughout; budgeted to `n <= 16`,
/// `radius_sq <= 8`.
pub fn enumerate_short_vectors(basis: &LatticeBasis, radius_sq: Ratio<i64>) -> Result<ShortVectors> {
    if basis.n() > ENUM_DIM_BUDGET {
        return Err(Error::BudgetExceeded(format!(
            "enumeration dimension {} exceeds {ENUM_DIM_BUDGET}",
            basis.n()
        )));
    }
    if radius_sq > Ratio::new(ENUM_RADIUS_BUDGET, 1) {
        return Err(Error::BudgetExceeded(format!(
            "enumeration radius^2 {radius_sq} exceeds {ENUM_RADIUS_BUDGET}"
        )));
    }
    if radius_sq < Ratio::new(0, 1) {
        return Err(Error::InvalidInput("radius^2 must be nonnegative".into()));
    }
    let n = basis.n();
    let shift = 2 * basis.scale_log2;
    // Scaled integer radius: floor(radius * 4^scale); scaled norms are integers.
    let r_int = (radius_sq * Ratio::new(1i64 << shift, 1)).floor().to_integer() as i128;
    let h = basis.hnf()?;

    let mut ctx = EnumCtx {
        n,
        h: &h.h,
        bound: r_int,
        coord: vec![0i128; n],
        acc: vec![0i128; n],
        out: Vec::new(),
    };
    ctx.descend(0, 0);
    let vectors = ctx
        .out
        .into_iter()
        .map(|(v, ns)| (v.into_iter().map(|x| x as i64).collect(), ns as i64))
        .collect();
    Ok(ShortVectors { vectors, scale_log2: basis.scale_log2 })
}

struct EnumCtx<'a> {
    n: usize,
    h: &'a [i128],
    bound: i128,
    coord: Vec<i128>,
    acc: Vec<i128>,
    out: Vec<(Vec<i128>, i128)>,
}

impl EnumCtx<'_> {
    fn descend(&mut self, i: usize, partial: i128) {
        if i == self.n {
            if partial > 0 {
                self.out.push((self.coord.clone(), partial));
            }
            return;
        }
        let d = self.h[i * self.n + i];
        let c = self.acc[i];
        let s = isqrt(self.bound - partial);
        // coord_i = c + z * d must lie in [-s, s].
        let lo = ceil_div(-s - c, d);
        let hi = floor_div(s - c, d);
        for z in lo..=hi {
            let vi = c + z * d;
            let next = partial + vi * vi;
            if next > self.bound {
                continue;
            }
            self.coord[i] = vi;
            if z != 0 {
                for col in i + 1..self.n {
                    self.acc[col] += z * self.h[i * self.n + col];
                }
            }
            self.descend(i + 1, next);
            if z != 0 {
                for col in i + 1..self.n {
                    self.acc[col] -= z * self.h[i * self.n + col];
                }
            }
        }
        self.coord[i] = 0;
    }
}

fn floor_div(a: i128, b: i128) -> i128 {
    debug_assert!(b > 0);
    a.div_euclid(b)
}

fn ceil_div(a: i128, b: i128) -> i128 {
    debug_assert!(b > 0);
    -((-a).div_euclid(b))
}

fn isqrt(v: i128) -> i128 {
    if v <= 0 {
        return 0;
    }
    let mut x = (v as f64).sqrt() as i128;
    while x * x > v {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= v {
        x += 1;
    }
    x
}

// ---------------------------------------------------------------------------
// Figures of merit
// ---------------------------------------------------------------------------

/// Per-level inputs for the figure formulas (enumerated or supplied).
#[derive(Clone, Debug)]
pub struct LevelParams {
    /// Rate `R_level = k_level / n`.
    pub rate: Ratio<i64>,
    /// Minimum distance of the level code.
    pub d_min: usize,
    /// Number of minimum-weight codewords, when known.
    pub a_d_min: Option<u128>,
    /// Whether `d_min`/`a_d_min` are exact (vs. sampled estimates).
    pub exact: bool,
}

/// Figures of merit of a constructed lattice.
#[derive(Clone, Debug)]
pub struct LatticeFigures {
    pub n: Option<usize>,
    /// Exact squared minimum distance `min {4, d^(l) / 4^(l-1)}`.
    pub d_min_sq: Ratio<i64>,
    /// `log2` of the covolume, when derived from a construction.
    pub volume_log2: Option<i64>,
    /// Coding gain `gamma = d_min^2 * 4^(sum R_l - 1)`, linear.
    pub coding_gain: f64,
    pub coding_gain_db: f64,
    /// Exponent `e` in the exact form `gamma = d_min^2 * 4^e`.
    pub gain_exponent_log4: Ratio<i64>,
    /// Kissing number (exact) or upper bound, when computable.
    pub kissing: Option<u128>,
    pub kissing_is_exact: bool,
    /// Normalized kissing number `tau* = tau / n` (same exactness flag).
    pub normalized_kissing: Option<f64>,
    /// Upper bound on `tau*` that is available even without `n` when every
    /// level satisfies `d^(l) > 4^l` (then `tau <= 2n`).
    pub normalized_kissing_bound_two: bool,
    /// Alternative small-distance coding gain `(d^2/2) * 4^(k/n)` reported
    /// by the single-level formula convention when `d < 4`.
    pub alt_gain_small_d: Option<f64>,
    pub levels: Vec<LevelParams>,
}

fn ratio_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Figure formulas for a multi-level construction, from per-level rates,
/// distances and minimum-weight counts.
///
/// `n` may be omitted when the levels are only known by rate (design-stage
/// analysis); absolute kissing bounds then require every level to clear
/// `d^(l) > 4^l`.
pub fn figures_from_levels(n: Option<usize>, levels: &[LevelParams]) -> Result<LatticeFigures> {
    if levels.is_empty() {
        return Err(Error::InvalidInput("at least one level is required".into()));
    }
    let mut d_min_sq = Ratio::new(4, 1);
    for (i, lv) in levels.iter().enumerate() {
        let term = Ratio::new(lv.d_min as i64, 1i64 << (2 * i));
        if term < d_min_sq {
            d_min_sq = term;
        }
    }
    let rate_sum: Ratio<i64> = levels.iter().map(|lv| lv.rate).sum();
    let gain_exp = rate_sum - Ratio::new(1, 1);
    let coding_gain = ratio_f64(d_min_sq) * 4f64.powf(ratio_f64(gain_exp));
    let coding_gain_db = 10.0 * coding_gain.log10();

    // Kissing bound: 2n plus the minimum-weight contributions of levels
    // with d^(l) <= 4^l.
    let mut sum_terms: u128 = 0;
    let mut sum_known = true;
    let mut any_term = false;
    for (i, lv) in levels.iter().enumerate() {
        let threshold = 4u128.pow(i as u32 + 1);
        if (lv.d_min as u128) <= threshold {
            any_term = true;
            match lv.a_d_min {
                Some(a) if lv.d_min < 128 => sum_terms += (1u128 << lv.d_min) * a,
                _ => sum_known = false,
            }
        }
    }
    let kissing = match (n, sum_known) {
        (Some(n), true) => Some(2 * n as u128 + sum_terms),
        _ => None,
    };
    let normalized_kissing = kissing.map(|t| t as f64 / n.unwrap() as f64);
    Ok(LatticeFigures {
        n,
        d_min_sq,
        volume_log2: None,
        coding_gain,
        coding_gain_db,
        gain_exponent_log4: gain_exp,
        kissing,
        kissing_is_exact: false,
        normalized_kissing,
        normalized_kissing_bound_two: !any_term,
        alt_gain_small_d: None,
        levels: levels.to_vec(),
    })
}

/// Exact single-level (Construction A) figures from a weight spectrum.
///
/// The kissing number follows the exact three-way case split on the code
/// distance (`2^d A_d`, `2n + 16 A_4`, `2n`). The coding gain is evaluated
/// from its definition `d^2 / vol^(2/n)`; the alternative `d^2/2`
/// convention for `d < 4` is reported separately.
pub fn figures_construction_a(
    spectrum: &WeightSpectrum,
    n: usize,
    k: usize,
) -> Result<LatticeFigures> {
    let rate = Ratio::new(k as i64, n as i64);
    let (d_code, a_d) = match spectrum.d_min() {
        Some(d) => (d, spectrum.a_d_min().unwrap() as u128),
        // Zero code: no codeword constraint, the lattice is 2Z^n.
        None => (usize::MAX, 0),
    };
    let d_min_sq = if d_code >= 4 { Ratio::new(4, 1) } else { Ratio::new(d_code as i64, 1) };
    let kissing = if d_code < 4 {
        (1u128 << d_code) * a_d
    } else if d_code == 4 {
        2 * n as u128 + 16 * a_d
    } else {
        2 * n as u128
    };
    let gain_exp = rate - Ratio::new(1, 1);
    let coding_gain = ratio_f64(d_min_sq) * 4f64.powf(ratio_f64(gain_exp));
    let alt = (d_code < 4)
        .then(|| ratio_f64(d_min_sq) / 2.0 * 4f64.powf(ratio_f64(rate)));
    Ok(LatticeFigures {
        n: Some(n),
        d_min_sq,
        volume_log2: Some(n as i64 - k as i64),
        coding_gain,
        coding_gain_db: 10.0 * coding_gain.log10(),
        gain_exponent_log4: gain_exp,
        kissing: Some(kissing),
        kissing_is_exact: spectrum.is_exact(),
        normalized_kissing: Some(kissing as f64 / n as f64),
        normalized_kissing_bound_two: d_code > 4,
        alt_gain_small_d: alt,
        levels: vec![LevelParams {
            rate,
            d_min: if d_code == usize::MAX { 0 } else { d_code },
            a_d_min: Some(a_d),
            exact: spectrum.is_exact(),
        }],
    })
}

/// Figures of a Construction D lattice from its family and per-level
/// spectra (level 1 first). Volume comes from the construction; the
/// kissing number is the upper bound.
pub fn figures_construction_d(
    fam: &NestedCodeFamily,
    spectra: &[WeightSpectrum],
) -> Result<LatticeFigures> {
    if spectra.len() != fam.levels() {
        return Err(Error::LengthMismatch { expected: fam.levels(), got: spectra.len() });
    }
    let n = fam.n();
    let mut levels = Vec::with_capacity(spectra.len());
    for (i, s) in spectra.iter().enumerate() {
        let d = s.d_min().ok_or_else(|| {
            Error::InvalidInput(format!("level {} has no nonzero codeword", i + 1))
        })?;
        levels.push(LevelParams {
            rate: Ratio::new(fam.rank(i + 1) as i64, n as i64),
            d_min: d,
            a_d_min: s.a_d_min().map(u128::from),
            exact: s.is_exact(),
        });
    }
    let mut figures = figures_from_levels(Some(n), &levels)?;
    let ksum: i64 = (1..=fam.levels()).map(|l| fam.rank(l) as i64).sum();
    figures.volume_log2 = Some(n as i64 - ksum);
    Ok(figures)
}

/// Noise standard deviation at a given VNR: `sigma^2 = vol^(2/n) / (2 pi e alpha^2)`
/// with `alpha^2` given in dB.
pub fn vnr_to_sigma(volume_log2: i64, n: usize, alpha_sq_db: f64) -> f64 {
    let alpha_sq = 10f64.powf(alpha_sq_db / 10.0);
    let norm_vol = 2f64.powf(2.0 * volume_log2 as f64 / n as f64);
    (norm_vol / (2.0 * std::f64::consts::PI * std::f64::consts::E * alpha_sq)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convcode::{tailbite, RationalGeneratorMatrix};
    use crate::gf2poly::BinaryPolynomial;
    use crate::interleaver::{append, s_random};
    use crate::turbocode::{build_pccc, nested_family, weight_spectrum};

    fn hamming74() -> BinMatrix {
        BinMatrix::from_rows(&[
            vec![1, 0, 0, 0, 1, 1, 0],
            vec![0, 1, 0, 0, 1, 0, 1],
            vec![0, 0, 1, 0, 0, 1, 1],
            vec![0, 0, 0, 1, 1, 1, 1],
        ])
        .unwrap()
    }

    fn extended_hamming84() -> BinMatrix {
        BinMatrix::from_rows(&[
            vec![1, 0, 0, 0, 0, 1, 1, 1],
            vec![0, 1, 0, 0, 1, 0, 1, 1],
            vec![0, 0, 1, 0, 1, 1, 0, 1],
            vec![0, 0, 0, 1, 1, 1, 1, 0],
        ])
        .unwrap()
    }

    #[test]
    fn construction_a_trivial_code_is_zn() {
        let b = construction_a(&BinMatrix::identity(5)).unwrap();
        assert_eq!(b.volume_log2(), 0);
        assert_eq!(b.determinant_log2().unwrap(), 0);
        let sv = enumerate_short_vectors(&b, Ratio::new(1, 1)).unwrap();
        assert_eq!(sv.kissing(), 10); // 2n unit vectors
        assert_eq!(sv.min_norm_sq(), Some(Ratio::new(1, 1)));
    }

    #[test]
    fn construction_a_zero_code_is_2zn() {
        let b = construction_a(&BinMatrix::zeros(0, 4)).unwrap();
        assert_eq!(b.volume_log2(), 4);
        assert_eq!(b.determinant_log2().unwrap(), 4);
        let sv = enumerate_short_vectors(&b, Ratio::new(4, 1)).unwrap();
        assert_eq!(sv.kissing(), 8); // +-2e_i
        assert_eq!(sv.min_norm_sq(), Some(Ratio::new(4, 1)));
    }

    #[test]
    fn construction_a_hamming_volume_and_short_vectors() {
        let b = construction_a(&hamming74()).unwrap();
        assert_eq!(b.volume_log2(), 3); // volume 8
        assert_eq!(b.determinant_log2().unwrap(), 3);
        let sv = enumerate_short_vectors(&b, Ratio::new(3, 1)).unwrap();
        assert_eq!(sv.min_norm_sq(), Some(Ratio::new(3, 1)));
        assert_eq!(sv.kissing(), 56); // 2^3 * A_3 = 8 * 7
    }

    #[test]
    fn construction_a_rejects_rank_deficiency() {
        let m = BinMatrix::from_rows(&[vec![1, 1, 0], vec![1, 1, 0]]).unwrap();
        assert!(matches!(construction_a(&m), Err(Error::RankDeficient)));
    }

    fn example_family() -> NestedCodeFamily {
        let g = RationalGeneratorMatrix::new(
            vec![
                vec![BinaryPolynomial::parse("11011").unwrap()],
                vec![BinaryPolynomial::parse("10011").unwrap()],
                vec![BinaryPolynomial::parse("11101").unwrap()],
            ],
            vec![
                BinaryPolynomial::parse("10101").unwrap(),
                BinaryPolynomial::parse("10101").unwrap(),
                BinaryPolynomial::parse("10101").unwrap(),
            ],
        )
        .unwrap();
        let block = tailbite(&g, 8).unwrap();
        let pi = append(&[
            s_random(8, 1, 1).unwrap(),
            s_random(8, 1, 2).unwrap(),
            s_random(8, 1, 3).unwrap(),
        ])
        .unwrap();
        let fam = nested_family(build_pccc(block, vec![pi]).unwrap(), vec![8, 16, 24]).unwrap();
        NestedCodeFamily::from(&fam)
    }

    #[test]
    fn construction_d_reproduces_scaled_block_layout() {
        let fam = example_family();
        let gen = fam.generator().clone();
        let b = construction_d(&fam).unwrap();
        assert_eq!(b.n(), 40);
        assert_eq!(b.levels(), 3);
        assert_eq!(b.scale_log2(), 2);
        // Rows 0..8 scaled by 1/4, 8..16 by 1/2, 16..24 by 1 (stored x4).
        for (range, weight) in [(0..8, 1i64), (8..16, 2), (16..24, 4)] {
            for r in range {
                for c in 0..40 {
                    let expect = if gen.get(r, c) { weight } else { 0 };
                    assert_eq!(b.entry_scaled(r, c), expect, "row {r} col {c}");
                }
            }
        }
        // Completions 2e_i on the 16 parity columns.
        for (i, r) in (24..40).enumerate() {
            for c in 0..40 {
                let expect = if c == 24 + i { 8 } else { 0 };
                assert_eq!(b.entry_scaled(r, c), expect);
            }
        }
        // Volume: 2^(n - sum k) = 2^(40 - 48).
        assert_eq!(b.volume_log2(), -8);
        assert_eq!(b.determinant_log2().unwrap(), -8);
    }

    #[test]
    fn single_level_construction_d_matches_construction_a() {
        let code = hamming74();
        let (rref, _) = code.rref();
        let via_d = construction_d(&NestedCodeFamily::single(&rref).unwrap()).unwrap();
        let via_a = construction_a(&code).unwrap();
        assert_eq!(via_a.mat, via_d.mat);
    }

    #[test]
    fn membership_solve() {
        let fam = example_family();
        let b = construction_d(&fam).unwrap();
        let h = b.hnf().unwrap();
        // Integer combinations of basis rows are members.
        let mut v = vec![0i64; b.n()];
        for (i, coef) in [(0usize, 3i64), (9, -2), (25, 1)] {
            for c in 0..b.n() {
                v[c] += coef * b.entry_scaled(i, c);
            }
        }
        assert!(h.contains(&v));
        v[0] += 1; // off-lattice perturbation at the finest scale
        assert!(!h.contains(&v));
    }

    #[test]
    fn enumeration_budget_checks() {
        let b = construction_a(&BinMatrix::identity(17)).unwrap();
        assert!(matches!(
            enumerate_short_vectors(&b, Ratio::new(1, 1)),
            Err(Error::BudgetExceeded(_))
        ));
        let b = construction_a(&BinMatrix::identity(4)).unwrap();
        assert!(matches!(
            enumerate_short_vectors(&b, Ratio::new(9, 1)),
            Err(Error::BudgetExceeded(_))
        ));
    }

    #[test]
    fn figures_construction_a_hamming() {
        let s = weight_spectrum(&hamming74()).unwrap();
        let f = figures_construction_a(&s, 7, 4).unwrap();
        assert_eq!(f.d_min_sq, Ratio::new(3, 1));
        assert_eq!(f.kissing, Some(56));
        assert!(f.kissing_is_exact);
        assert_eq!(f.volume_log2, Some(3));
        // gamma = 3 * 4^(4/7 - 1)
        let expect = 3.0 * 4f64.powf(4.0 / 7.0 - 1.0);
        assert!((f.coding_gain - expect).abs() < 1e-12);
        assert!(f.alt_gain_small_d.is_some());
    }

    #[test]
    fn figures_construction_a_d4_case_is_e8() {
        let s = weight_spectrum(&extended_hamming84()).unwrap();
        assert_eq!((s.d_min(), s.a_d_min()), (Some(4), Some(14)));
        let f = figures_construction_a(&s, 8, 4).unwrap();
        assert_eq!(f.kissing, Some(240)); // 2n + 16 A_4
        assert_eq!(f.d_min_sq, Ratio::new(4, 1));
        // Enumeration agrees with the formula.
        let b = construction_a(&extended_hamming84()).unwrap();
        let sv = enumerate_short_vectors(&b, Ratio::new(4, 1)).unwrap();
        assert_eq!(sv.min_norm_sq(), Some(Ratio::new(4, 1)));
        assert_eq!(sv.kissing(), 240);
    }

    #[test]
    fn figures_construction_a_unit_distance_code() {
        // C = [n, n, 1]: d(lattice) = 1, tau = 2 A_1 = 2n.
        let s = weight_spectrum(&BinMatrix::identity(5)).unwrap();
        let f = figures_construction_a(&s, 5, 5).unwrap();
        assert_eq!(f.d_min_sq, Ratio::new(1, 1));
        assert_eq!(f.kissing, Some(2 * 5)); // 2^1 * A_1 = 2 * 5
        assert!((f.coding_gain - 1.0).abs() < 1e-12); // 4^0 * 1
    }

    #[test]
    fn figures_design_example_arithmetic() {
        // Supplied d^(1) = 13, d^(2) = 28, R_1 = 1/2, R_2 = 1/3.
        let levels = [
            LevelParams { rate: Ratio::new(1, 2), d_min: 13, a_d_min: None, exact: true },
            LevelParams { rate: Ratio::new(1, 3), d_min: 28, a_d_min: None, exact: true },
        ];
        let f = figures_from_levels(Some(2000), &levels).unwrap();
        assert_eq!(f.d_min_sq, Ratio::new(4, 1)); // min {4, 13, 7}
        assert_eq!(f.gain_exponent_log4, Ratio::new(-1, 6));
        let expect = 4f64.powf(5.0 / 6.0);
        assert!((f.coding_gain - expect).abs() < 1e-12);
        assert!((f.coding_gain_db - 5.0172).abs() < 0.001);
        assert_eq!(f.kissing, Some(4000)); // tau <= 2n
        assert!(f.normalized_kissing_bound_two);
        assert!((f.normalized_kissing.unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn eq20_consistency_on_constructed_lattice() {
        // gamma from the covolume definition equals 4^(sum R - 1) d^2.
        let fam = example_family();
        let basis = construction_d(&fam).unwrap();
        let spectra: Vec<_> =
            (1..=3).map(|l| weight_spectrum(&fam.level_generator(l)).unwrap()).collect();
        let f = figures_construction_d(&fam, &spectra).unwrap();
        let n = fam.n() as f64;
        let vol_term = 2f64.powf(2.0 * basis.volume_log2() as f64 / n);
        let gamma_def = ratio_f64(f.d_min_sq) / vol_term;
        assert!((gamma_def - f.coding_gain).abs() / gamma_def < 1e-12);
    }

    #[test]
    fn gain_lower_bound_when_distances_clear_thresholds() {
        // When d^(l) >= 4^l / beta, gamma >= beta^-1 4^(sum k_l / n).
        let fam = example_family();
        let spectra: Vec<_> =
            (1..=3).map(|l| weight_spectrum(&fam.level_generator(l)).unwrap()).collect();
        let f = figures_construction_d(&fam, &spectra).unwrap();
        for beta in [1i64, 2] {
            let qualifies = (1..=3).all(|l| {
                let d = spectra[l - 1].d_min().unwrap() as i64;
                d * beta >= 4i64.pow(l as u32)
            });
            if qualifies {
                let bound = 4f64.powf(ratio_f64(
                    f.levels.iter().map(|lv| lv.rate).sum::<Ratio<i64>>(),
                )) / beta as f64;
                assert!(f.coding_gain >= bound - 1e-9);
            }
        }
    }

    #[test]
    fn scaled_lattice_minimum_distance() {
        // d^2(c Lambda) = c^2 d^2(Lambda) for c = 2 and c = 1/2.
        let b = construction_a(&BinMatrix::identity(4)).unwrap();
        let doubled = b.scaled_pow2(1);
        let sv = enumerate_short_vectors(&doubled, Ratio::new(4, 1)).unwrap();
        assert_eq!(sv.min_norm_sq(), Some(Ratio::new(4, 1)));
        assert_eq!(sv.kissing(), 8);
        let halved = b.scaled_pow2(-1);
        let sv = enumerate_short_vectors(&halved, Ratio::new(1, 4)).unwrap();
        assert_eq!(sv.min_norm_sq(), Some(Ratio::new(1, 4)));
        assert_eq!(sv.kissing(), 8);
    }

    #[test]
    fn vnr_examples() {
        // Z^n at 0 dB: sigma^2 = 1/(2 pi e).
        let s = vnr_to_sigma(0, 8, 0.0);
        let expect = (1.0 / (2.0 * std::f64::consts::PI * std::f64::consts::E)).sqrt();
        assert!((s - expect).abs() < 1e-12);
        // Volume 2^(n-k): sigma^2 = 4^((n-k)/n) / (2 pi e).
        let s = vnr_to_sigma(3, 7, 0.0);
        let expect = (4f64.powf(3.0 / 7.0) / (2.0 * std::f64::consts::PI * std::f64::consts::E)).sqrt();
        assert!((s - expect).abs() < 1e-12);
        // The frame-length-1035 reproduction point.
        let s = vnr_to_sigma(1035 - 343, 1035, 1.25);
        let alpha = 10f64.powf(0.125);
        let expect =
            (2f64.powf(2.0 * 692.0 / 1035.0) / (2.0 * std::f64::consts::PI * std::f64::consts::E * alpha)).sqrt();
        assert!((s - expect).abs() < 1e-12);
    }

    #[test]
    fn dyadic_formatting() {
        assert_eq!(dyadic_string(0, 2), "0");
        assert_eq!(dyadic_string(8, 2), "2");
        assert_eq!(dyadic_string(1, 2), "1/4");
        assert_eq!(dyadic_string(-2, 2), "-1/2");
        assert_eq!(dyadic_string(3, 0), "3");
    }

    #[test]
    fn basis_text_export() {
        let fam = example_family();
        let b = construction_d(&fam).unwrap();
        let text = b.to_text();
        let first_line = text.lines().next().unwrap();
        assert!(first_line.starts_with("1/4 0 0"));
        assert_eq!(text.lines().count(), 40);
    }
}
