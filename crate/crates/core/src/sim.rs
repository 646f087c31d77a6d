//! Unconstrained-AWGN Monte Carlo harness, VNR sweeps and the analyzer.
//!
//! Reproducibility contract: every sampled value is drawn from a
//! counter-based stream keyed by `(master seed, grid point index, trial
//! index)`, so serial and parallel runs produce identical counts and
//! identical output rows (wall-clock timing aside). Trials inside a grid
//! point run concurrently in fixed-size batches; aggregation is a
//! commutative sum of error counters.
//!
//! A *symbol* is one lattice coordinate: the symbol error rate is the
//! fraction of coordinates where the decoded point differs from the
//! transmitted one. Block (whole-vector) errors are tracked alongside.
//! VNR values are `alpha^2` in dB, `10 log10(alpha^2)`.

use std::io::Write;
use std::time::Instant;

use num_rational::Ratio;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;

use crate::convcode::{tailbite, terminate, RationalGeneratorMatrix};
use crate::decoder::MultiStageDecoder;
use crate::interleaver::{append, s_random_with_budget, Interleaver, DEFAULT_SRANDOM_RESTARTS};
use crate::lattice::{
    construction_a, construction_d, figures_construction_a, figures_construction_d,
    figures_from_levels, vnr_to_sigma, LatticeBasis, LatticeFigures, LevelParams,
    NestedCodeFamily,
};
use crate::turbocode::{build_pccc, nested_family, NestedTurboFamily, SPECTRUM_BUDGET};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Reproducible randomness
// ---------------------------------------------------------------------------

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Independent deterministic stream for one `(seed, point, trial)` triple.
pub fn stream_rng(master_seed: u64, point: u64, trial: u64) -> ChaCha8Rng {
    let mut state = splitmix64(master_seed);
    state = splitmix64(state ^ point.wrapping_mul(0x2545f4914f6cdd1d));
    state = splitmix64(state ^ trial.wrapping_mul(0x9e6c63d0676a9a99));
    let mut key = [0u8; 32];
    let mut x = state;
    for chunk in key.chunks_mut(8) {
        x = splitmix64(x);
        chunk.copy_from_slice(&x.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// I.i.d. zero-mean Gaussian vector with deviation `sigma`.
pub fn awgn_sample(n: usize, sigma: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| sigma * rng.sample::<f64, _>(rand_distr::StandardNormal)).collect()
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Interleaver construction recipe.
#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InterleaverSpec {
    /// Spread-constrained random interleaver.
    SRandom { size: usize, spread: usize, seed: u64, restarts: Option<usize> },
    /// Block-diagonal append of parts (nested by construction).
    Append { parts: Vec<InterleaverSpec> },
    Identity { size: usize },
    /// Interleaver file (first line `k`, second line 1-based images).
    File { path: String },
}

impl InterleaverSpec {
    pub fn build(&self) -> Result<Interleaver> {
        match self {
            InterleaverSpec::SRandom { size, spread, seed, restarts } => s_random_with_budget(
                *size,
                *spread,
                *seed,
                restarts.unwrap_or(DEFAULT_SRANDOM_RESTARTS),
            ),
            InterleaverSpec::Append { parts } => {
                let built: Result<Vec<_>> = parts.iter().map(|p| p.build()).collect();
                append(&built?)
            }
            InterleaverSpec::Identity { size } => Ok(Interleaver::identity(*size)),
            InterleaverSpec::File { path } => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    Error::InvalidInput(format!("cannot read interleaver file {path}: {e}"))
                })?;
                Interleaver::parse(&text)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ConstructionMode {
    A,
    D,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum TerminationMode {
    TailBiting,
    Terminated,
}

/// Everything needed to build a turbo lattice.
#[derive(Clone, Debug, Deserialize)]
pub struct LatticeSpec {
    pub construction: ConstructionMode,
    /// Component code rows, `q/r` entries in polynomial bit-string form.
    pub code_rows: Vec<String>,
    pub l: usize,
    pub termination: TerminationMode,
    /// Interleavers of branches `2..=b` (so `b - 1` entries).
    pub interleavers: Vec<InterleaverSpec>,
    /// Nested chain, ascending; defaults to the single-level chain.
    #[serde(default)]
    pub chain: Option<Vec<usize>>,
}

/// A constructed lattice with its code family and basis.
#[derive(Clone, Debug)]
pub struct LatticeBundle {
    pub family: NestedTurboFamily,
    pub code_family: NestedCodeFamily,
    pub basis: LatticeBasis,
}

impl LatticeBundle {
    pub fn n(&self) -> usize {
        self.basis.n()
    }
}

/// Builds the turbo code, nested family and lattice basis of a spec.
pub fn build_lattice(spec: &LatticeSpec) -> Result<LatticeBundle> {
    let code = RationalGeneratorMatrix::parse(&spec.code_rows.join("\n"))?;
    let block = match spec.termination {
        TerminationMode::TailBiting => tailbite(&code, spec.l)?,
        TerminationMode::Terminated => terminate(&code, spec.l)?,
    };
    if spec.interleavers.is_empty() {
        return Err(Error::InvalidInput("at least one interleaver is required".into()));
    }
    let pis: Result<Vec<_>> = spec.interleavers.iter().map(|s| s.build()).collect();
    let turbo = build_pccc(block, pis?)?;
    let chain = match (&spec.chain, spec.construction) {
        (Some(c), _) => c.clone(),
        (None, ConstructionMode::A) => vec![turbo.k()],
        (None, ConstructionMode::D) => {
            return Err(Error::InvalidInput("construction D requires a nested chain".into()))
        }
    };
    if spec.construction == ConstructionMode::A && chain.len() > 1 {
        return Err(Error::InvalidInput(
            "construction A takes a single-level chain; use construction D for multi-level".into(),
        ));
    }
    let family = nested_family(turbo, chain)?;
    let code_family = NestedCodeFamily::from(&family);
    let basis = match spec.construction {
        ConstructionMode::A => construction_a(family.turbo().generator())?,
        ConstructionMode::D => construction_d(&code_family)?,
    };
    Ok(LatticeBundle { family, code_family, basis })
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum TransmitMode {
    /// Transmit the origin (the lattice is geometrically uniform).
    #[default]
    Zero,
    /// Transmit a random lattice point near the origin.
    RandomPoint,
}

/// Monte Carlo configuration, mirroring the JSON config file.
#[derive(Clone, Debug, Deserialize)]
pub struct SimConfig {
    pub lattice: LatticeSpec,
    /// VNR grid, `alpha^2` in dB.
    #[serde(default)]
    pub vnr_grid_db: Vec<f64>,
    /// Turbo decoder iterations.
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    /// Stop a point once this many symbol errors are seen...
    #[serde(default = "default_min_errors")]
    pub min_errors: u64,
    /// ...or once this many symbols were simulated (budget cap).
    #[serde(default = "default_max_symbols")]
    pub max_symbols: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub transmit: TransmitMode,
}

fn default_iterations() -> usize {
    10
}
fn default_min_errors() -> u64 {
    100
}
fn default_max_symbols() -> u64 {
    10_000_000
}

impl SimConfig {
    /// Validates the stopping rule and (for sweeps) the grid.
    pub fn validate(&self, require_grid: bool) -> Result<()> {
        if require_grid && self.vnr_grid_db.is_empty() {
            return Err(Error::InvalidInput("VNR grid is empty".into()));
        }
        if self.min_errors == 0 || self.max_symbols == 0 {
            return Err(Error::InvalidInput("stopping thresholds must be positive".into()));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidInput("iteration count must be positive".into()));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

/// One measured grid point.
#[derive(Clone, Debug)]
pub struct SerRow {
    pub alpha2_db: f64,
    pub sigma: f64,
    pub symbols: u64,
    pub symbol_errors: u64,
    pub ser: f64,
    pub block_errors: u64,
    pub blocks: u64,
    pub seconds: f64,
    /// True when the point hit `max_symbols` before `min_errors`.
    pub budget_capped: bool,
    /// Coordinates whose error is not an even integer (mod-2/coset
    /// mismatches). Coordinate errors that ARE even integers come from the
    /// lattice's own +-2e_i minimum vectors and leave every code bit
    /// intact, so this diagnostic isolates actual decoding failures; it is
    /// not part of the CSV contract.
    pub coset_errors: u64,
}

/// Mandatory CSV header.
pub const CSV_HEADER: &str = "alpha2_db,sigma,symbols,symbol_errors,ser,block_errors,blocks,seconds";

impl SerRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{:.6},{},{},{:e},{},{},{:.3}",
            self.alpha2_db,
            self.sigma,
            self.symbols,
            self.symbol_errors,
            self.ser,
            self.block_errors,
            self.blocks,
            self.seconds
        )
    }
}

const TRIAL_BATCH: u64 = 64;

/// Simulates one VNR grid point: transmit, add noise at the VNR-implied
/// deviation, decode, count coordinate errors; loop until the stopping
/// rule fires. Trials run concurrently on independent streams.
pub fn run_point(
    cfg: &SimConfig,
    bundle: &LatticeBundle,
    alpha2_db: f64,
    point_index: u64,
) -> Result<SerRow> {
    let start = Instant::now();
    let n = bundle.n();
    let sigma = vnr_to_sigma(bundle.basis.volume_log2(), n, alpha2_db);
    let noise_var = sigma * sigma;
    let scale = (1i64 << bundle.basis.scale_log2()) as f64;
    let (mut symbols, mut symbol_errors, mut blocks, mut block_errors) = (0u64, 0u64, 0u64, 0u64);
    let mut coset_errors = 0u64;
    let mut base_trial = 0u64;
    while symbol_errors < cfg.min_errors && symbols < cfg.max_symbols {
        let batch: Vec<(u64, u64, u64)> = (base_trial..base_trial + TRIAL_BATCH)
            .into_par_iter()
            .map_init(
                || {
                    MultiStageDecoder::turbo(&bundle.family, cfg.iterations, None)
                        .expect("bundle decoders are well formed")
                },
                |dec, trial| {
                    let mut rng = stream_rng(cfg.seed, point_index, trial);
                    let x_scaled: Vec<i64> = match cfg.transmit {
                        TransmitMode::Zero => vec![0; n],
                        TransmitMode::RandomPoint => {
                            let mut x = vec![0i64; n];
                            for row in 0..n {
                                let z: i64 = rng.gen_range(-2..3);
                                if z != 0 {
                                    for (acc, &v) in x.iter_mut().zip(bundle.basis.row_scaled(row))
                                    {
                                        *acc += z * v;
                                    }
                                }
                            }
                            x
                        }
                    };
                    let mut r = awgn_sample(n, sigma, &mut rng);
                    for (rj, &xj) in r.iter_mut().zip(&x_scaled) {
                        *rj += xj as f64 / scale;
                    }
                    let decoded = dec.decode(&r, noise_var).expect("dimensions match");
                    // Even-integer differences are real coordinate errors
                    // but preserve all mod-2 code bits.
                    let even_step = 1i64 << (bundle.basis.scale_log2() + 1);
                    let (mut errs, mut coset) = (0u64, 0u64);
                    for (&a, &b) in decoded.x_scaled.iter().zip(&x_scaled) {
                        if a != b {
                            errs += 1;
                            if (a - b).rem_euclid(even_step) != 0 {
                                coset += 1;
                            }
                        }
                    }
                    (errs, (errs > 0) as u64, coset)
                },
            )
            .collect();
        for (errs, blk, coset) in batch {
            symbol_errors += errs;
            block_errors += blk;
            coset_errors += coset;
        }
        blocks += TRIAL_BATCH;
        symbols += TRIAL_BATCH * n as u64;
        base_trial += TRIAL_BATCH;
    }
    Ok(SerRow {
        alpha2_db,
        sigma,
        symbols,
        symbol_errors,
        ser: symbol_errors as f64 / symbols as f64,
        block_errors,
        blocks,
        seconds: start.elapsed().as_secs_f64(),
        budget_capped: symbol_errors < cfg.min_errors,
        coset_errors,
    })
}

/// Runs the whole VNR grid, writing one CSV row per point as soon as it is
/// measured (header first), so partial results survive interruption.
pub fn sweep(cfg: &SimConfig, out: &mut dyn Write) -> Result<Vec<SerRow>> {
    cfg.validate(true)?;
    let bundle = build_lattice(&cfg.lattice)?;
    writeln!(out, "{CSV_HEADER}").map_err(io_err)?;
    out.flush().map_err(io_err)?;
    let mut rows = Vec::with_capacity(cfg.vnr_grid_db.len());
    for (idx, &db) in cfg.vnr_grid_db.iter().enumerate() {
        let row = run_point(cfg, &bundle, db, idx as u64)?;
        writeln!(out, "{}", row.to_csv()).map_err(io_err)?;
        out.flush().map_err(io_err)?;
        rows.push(row);
    }
    Ok(rows)
}

fn io_err(e: std::io::Error) -> Error {
    Error::InvalidInput(format!("write failed: {e}"))
}

// ---------------------------------------------------------------------------
// Analyzer
// ---------------------------------------------------------------------------

/// Externally supplied per-level parameters (design-stage analysis).
#[derive(Clone, Debug, Deserialize)]
pub struct SuppliedLevel {
    /// Exact rate as a fraction string, e.g. `"1/2"`.
    pub rate: String,
    pub d_min: usize,
    #[serde(default)]
    pub a_d_min: Option<u128>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct SuppliedDesign {
    #[serde(default)]
    pub n: Option<usize>,
    pub levels: Vec<SuppliedLevel>,
}

/// Analyzer input: a constructible lattice spec, supplied design
/// parameters, or both (supplied distances override enumerated ones).
#[derive(Clone, Debug, Deserialize)]
pub struct AnalyzeConfig {
    #[serde(default)]
    pub lattice: Option<LatticeSpec>,
    #[serde(default)]
    pub supplied: Option<SuppliedDesign>,
}

/// Analyzer output: figures of merit plus reporting notes.
#[derive(Clone, Debug)]
pub struct AnalyzeReport {
    pub figures: LatticeFigures,
    pub notes: Vec<String>,
}

fn parse_rate(s: &str) -> Result<Ratio<i64>> {
    let parse_int = |t: &str| {
        t.trim()
            .parse::<i64>()
            .map_err(|_| Error::InvalidInput(format!("bad rational component {t:?}")))
    };
    match s.split_once('/') {
        Some((num, den)) => {
            let d = parse_int(den)?;
            if d == 0 {
                return Err(Error::InvalidInput("zero denominator".into()));
            }
            Ok(Ratio::new(parse_int(num)?, d))
        }
        None => Ok(Ratio::new(parse_int(s)?, 1)),
    }
}

/// Exact single-level figures from supplied values, when they determine
/// the construction-A case split (`k = rate * n` integral; the
/// minimum-weight count is only needed for distances up to 4).
fn single_level_exact_figures(
    n: usize,
    rate: Ratio<i64>,
    d_min: usize,
    a_d_min: Option<u128>,
) -> Option<Result<LatticeFigures>> {
    let num = *rate.numer() as i128 * n as i128;
    let den = *rate.denom() as i128;
    if num % den != 0 {
        return None;
    }
    let k = (num / den) as usize;
    let a = match (d_min <= 4, a_d_min) {
        (true, Some(a)) if u64::try_from(a).is_ok() => a as u64,
        (true, _) => return None, // the exact split needs A_d here
        (false, _) => 0,          // tau = 2n regardless of A_d
    };
    let spectrum = crate::turbocode::WeightSpectrum::from_known(&[(d_min, a)], k, false);
    Some(figures_construction_a(&spectrum, n, k))
}

/// Computes the analyzer report for a config.
pub fn analyze(cfg: &AnalyzeConfig) -> Result<AnalyzeReport> {
    let mut notes = vec![
        "symbol = one lattice coordinate; SER counts coordinate mismatches".to_string(),
        "VNR convention: alpha^2_dB = 10 log10(alpha^2)".to_string(),
    ];
    let figures = match (&cfg.lattice, &cfg.supplied) {
        (Some(spec), supplied) => {
            let bundle = build_lattice(spec)?;
            let fam = &bundle.code_family;
            let levels_params: Vec<LevelParams> = match supplied {
                Some(design) => {
                    if design.levels.len() != fam.levels() {
                        return Err(Error::LengthMismatch {
                            expected: fam.levels(),
                            got: design.levels.len(),
                        });
                    }
                    notes.push("level distances supplied externally".to_string());
                    design
                        .levels
                        .iter()
                        .enumerate()
                        .map(|(i, lv)| {
                            Ok(LevelParams {
                                rate: Ratio::new(
                                    fam.rank(i + 1) as i64,
                                    fam.n() as i64,
                                ),
                                d_min: lv.d_min,
                                a_d_min: lv.a_d_min,
                                exact: false,
                            })
                        })
                        .collect::<Result<_>>()?
                }
                None => {
                    if fam.generator().rows() > SPECTRUM_BUDGET {
                        return Err(Error::BudgetExceeded(format!(
                            "k = {} exceeds the exhaustive spectrum budget; supply level \
                             distances explicitly",
                            fam.generator().rows()
                        )));
                    }
                    Vec::new() // handled below through exact spectra
                }
            };
            if levels_params.is_empty() {
                let spectra: Vec<_> = (1..=fam.levels())
                    .map(|l| crate::turbocode::weight_spectrum(&fam.level_generator(l)))
                    .collect::<Result<_>>()?;
                let mut f = if fam.levels() == 1 {
                    figures_construction_a(&spectra[0], fam.n(), fam.rank(1))?
                } else {
                    figures_construction_d(fam, &spectra)?
                };
                f.volume_log2 = Some(bundle.basis.volume_log2());
                f
            } else {
                let single = (levels_params.len() == 1)
                    .then(|| {
                        single_level_exact_figures(
                            fam.n(),
                            levels_params[0].rate,
                            levels_params[0].d_min,
                            levels_params[0].a_d_min,
                        )
                    })
                    .flatten();
                let mut f = match single {
                    Some(f) => f?,
                    None => figures_from_levels(Some(fam.n()), &levels_params)?,
                };
                f.volume_log2 = Some(bundle.basis.volume_log2());
                f
            }
        }
        (None, Some(design)) => {
            let levels: Vec<LevelParams> = design
                .levels
                .iter()
                .map(|lv| {
                    Ok(LevelParams {
                        rate: parse_rate(&lv.rate)?,
                        d_min: lv.d_min,
                        a_d_min: lv.a_d_min,
                        exact: false,
                    })
                })
                .collect::<Result<_>>()?;
            notes.push("design-stage analysis from supplied rates/distances".to_string());
            let single = match (design.n, levels.as_slice()) {
                (Some(n), [lv]) => {
                    single_level_exact_figures(n, lv.rate, lv.d_min, lv.a_d_min)
                }
                _ => None,
            };
            match single {
                Some(f) => f?,
                None => figures_from_levels(design.n, &levels)?,
            }
        }
        (None, None) => {
            return Err(Error::InvalidInput(
                "analyze needs a lattice spec, supplied parameters, or both".into(),
            ))
        }
    };
    if !figures.kissing_is_exact {
        notes.push("kissing number is an upper bound".to_string());
    }
    Ok(AnalyzeReport { figures, notes })
}

impl std::fmt::Display for AnalyzeReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let fig = &self.figures;
        if let Some(n) = fig.n {
            writeln!(f, "n: {n}")?;
        }
        if let Some(v) = fig.volume_log2 {
            writeln!(f, "volume: 2^{v}")?;
        }
        writeln!(f, "d_min^2: {}", fig.d_min_sq)?;
        writeln!(
            f,
            "coding_gain: {:.6} ({:.4} dB) = d_min^2 * 4^({})",
            fig.coding_gain, fig.coding_gain_db, fig.gain_exponent_log4
        )?;
        if let Some(alt) = fig.alt_gain_small_d {
            writeln!(f, "coding_gain_alt_small_d: {alt:.6} (d^2/2 convention)")?;
        }
        match fig.kissing {
            Some(t) => {
                let tag = if fig.kissing_is_exact { "exact" } else { "upper bound" };
                writeln!(f, "kissing: {t} ({tag})")?;
                writeln!(f, "normalized_kissing: {:.6}", fig.normalized_kissing.unwrap())?;
            }
            None if fig.normalized_kissing_bound_two => {
                writeln!(f, "kissing: <= 2n")?;
                writeln!(f, "normalized_kissing: <= 2")?;
            }
            None => writeln!(f, "kissing: unknown (supply a_d_min)")?,
        }
        for (i, lv) in fig.levels.iter().enumerate() {
            let a = lv.a_d_min.map_or("?".to_string(), |a| a.to_string());
            writeln!(
                f,
                "level {}: rate {}, d_min {}, a_d_min {}{}",
                i + 1,
                lv.rate,
                lv.d_min,
                a,
                if lv.exact { "" } else { " (supplied/estimated)" }
            )?;
        }
        for note in &self.notes {
            writeln!(f, "# {note}")?;
        }
        Ok(())
    }
}
