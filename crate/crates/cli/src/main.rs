//! `tlat`: turbo lattice construction, analysis, encoding, decoding and
//! unconstrained-AWGN simulation.
//!
//! All subcommands read a JSON config (see the repository README for the
//! schema). Exit codes: 0 success, 2 config error, 3 construction
//! infeasible, 4 computation budget exceeded.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use turbo_lattice::decoder::MultiStageDecoder;
use turbo_lattice::lattice::dyadic_string;
use turbo_lattice::sim::{
    analyze, build_lattice, run_point, sweep, AnalyzeConfig, AnalyzeReport, SimConfig, CSV_HEADER,
};
use turbo_lattice::Error;

#[derive(Parser)]
#[command(name = "tlat", version, about = "turbo lattice toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the lattice and emit its basis (rows of rationals) plus a
    /// figure report.
    Construct {
        /// JSON config with at least a `lattice` section.
        #[arg(short, long)]
        config: PathBuf,
        /// Where to write the basis matrix (default: stdout).
        #[arg(long)]
        basis_out: Option<PathBuf>,
        /// Also write the turbo generator matrix (bit-string rows).
        #[arg(long)]
        generator_out: Option<PathBuf>,
        /// Skip the analyzer report.
        #[arg(long)]
        no_report: bool,
    },
    /// Compute figures of merit (constructed and/or supplied parameters).
    Analyze {
        #[arg(short, long)]
        config: PathBuf,
        /// Emit the report as JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Encode a message file (bit characters) with the turbo generator.
    Encode {
        #[arg(short, long)]
        config: PathBuf,
        /// File of 0/1 characters (whitespace ignored), length k.
        #[arg(short, long)]
        message: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Decode one received real vector to the nearest lattice point.
    Decode {
        #[arg(short, long)]
        config: PathBuf,
        /// File of n whitespace-separated reals.
        #[arg(short, long)]
        received: PathBuf,
        /// Channel noise VNR in dB (sigma is derived from the lattice).
        #[arg(long)]
        alpha2_db: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Simulate a single VNR grid point and print its CSV row.
    Simulate {
        #[arg(short, long)]
        config: PathBuf,
        /// VNR point in dB (overrides the config grid).
        #[arg(long)]
        alpha2_db: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the whole VNR grid, streaming CSV rows.
    Sweep {
        #[arg(short, long)]
        config: PathBuf,
        /// CSV output path (default: stdout).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

struct CliError {
    code: u8,
    message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidInput(_) | Error::LengthMismatch { .. } => 2,
            Error::NotCoprime { .. }
            | Error::ConstructionFailed(_)
            | Error::RankDeficient
            | Error::MalformedChain(_) => 3,
            Error::BudgetExceeded(_) => 4,
        };
        CliError { code, message: e.to_string() }
    }
}

fn config_error(message: String) -> CliError {
    CliError { code: 2, message }
}

fn read_file(path: &PathBuf) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))
}

fn load_sim_config(path: &PathBuf) -> Result<SimConfig, CliError> {
    serde_json::from_str(&read_file(path)?)
        .map_err(|e| config_error(format!("bad config {}: {e}", path.display())))
}

fn write_out(path: &Option<PathBuf>, contents: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, contents)
            .map_err(|e| config_error(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Construct { config, basis_out, generator_out, no_report } => {
            let cfg = load_sim_config(&config)?;
            let bundle = build_lattice(&cfg.lattice)?;
            write_out(&basis_out, &bundle.basis.to_text())?;
            if generator_out.is_some() {
                let gen = format!("{}\n", bundle.family.turbo().generator());
                write_out(&generator_out, &gen)?;
            }
            if !no_report {
                let report = analyze(&AnalyzeConfig {
                    lattice: Some(cfg.lattice.clone()),
                    supplied: None,
                });
                match report {
                    Ok(r) => eprintln!("{r}"),
                    // Construction can outgrow the spectrum budget; the
                    // basis is still valid, so only note the limitation.
                    Err(Error::BudgetExceeded(msg)) => {
                        eprintln!("note: figures skipped ({msg})")
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            Ok(())
        }
        Command::Analyze { config, json } => {
            let cfg: AnalyzeConfig = serde_json::from_str(&read_file(&config)?)
                .map_err(|e| config_error(format!("bad config {}: {e}", config.display())))?;
            let report = analyze(&cfg)?;
            if json {
                println!("{}", report_json(&report));
            } else {
                print!("{report}");
            }
            Ok(())
        }
        Command::Encode { config, message, output } => {
            let cfg = load_sim_config(&config)?;
            let bundle = build_lattice(&cfg.lattice)?;
            let text = read_file(&message)?;
            let bits: Vec<u8> = text
                .chars()
                .filter(|c| !c.is_whitespace())
                .map(|c| match c {
                    '0' => Ok(0u8),
                    '1' => Ok(1u8),
                    other => Err(config_error(format!("bad message character {other:?}"))),
                })
                .collect::<Result<_, _>>()?;
            let cw = bundle.family.turbo().encode(&bits)?;
            let line: String = cw.iter().map(|&b| char::from(b'0' + b)).collect();
            write_out(&output, &format!("{line}\n"))
        }
        Command::Decode { config, received, alpha2_db, output } => {
            let cfg = load_sim_config(&config)?;
            let bundle = build_lattice(&cfg.lattice)?;
            let text = read_file(&received)?;
            let r: Vec<f64> = text
                .split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| config_error(format!("bad real value {t:?}")))
                })
                .collect::<Result<_, _>>()?;
            let sigma = turbo_lattice::lattice::vnr_to_sigma(
                bundle.basis.volume_log2(),
                bundle.n(),
                alpha2_db,
            );
            let mut dec =
                MultiStageDecoder::turbo(&bundle.family, cfg.iterations, Some(&bundle.basis))?;
            let out = dec.decode(&r, sigma * sigma)?;
            let line: Vec<String> = out
                .x_scaled
                .iter()
                .map(|&v| dyadic_string(v, out.scale_log2))
                .collect();
            eprintln!(
                "sigma {sigma:.6}, lattice member: {}",
                out.lattice_member.map_or("unknown".into(), |m| m.to_string())
            );
            write_out(&output, &format!("{}\n", line.join(" ")))
        }
        Command::Simulate { config, alpha2_db, output } => {
            let cfg = load_sim_config(&config)?;
            cfg.validate(false)?;
            let bundle = build_lattice(&cfg.lattice)?;
            let row = run_point(&cfg, &bundle, alpha2_db, 0)?;
            let mut text = format!("{CSV_HEADER}\n{}\n", row.to_csv());
            if row.budget_capped {
                text.push_str("# budget-capped: fewer errors than requested\n");
            }
            write_out(&output, &text)
        }
        Command::Sweep { config, output } => {
            let cfg = load_sim_config(&config)?;
            match output {
                Some(p) => {
                    let mut f = fs::File::create(&p).map_err(|e| {
                        config_error(format!("cannot create {}: {e}", p.display()))
                    })?;
                    let rows = sweep(&cfg, &mut f)?;
                    report_capped(&rows);
                }
                None => {
                    let stdout = std::io::stdout();
                    let mut lock = stdout.lock();
                    let rows = sweep(&cfg, &mut lock)?;
                    lock.flush().ok();
                    report_capped(&rows);
                }
            }
            Ok(())
        }
    }
}

fn report_capped(rows: &[turbo_lattice::sim::SerRow]) {
    for row in rows.iter().filter(|r| r.budget_capped) {
        eprintln!(
            "note: point {} dB budget-capped at {} symbols with {} errors",
            row.alpha2_db, row.symbols, row.symbol_errors
        );
    }
}

fn report_json(report: &AnalyzeReport) -> serde_json::Value {
    let fig = &report.figures;
    let levels: Vec<serde_json::Value> = fig
        .levels
        .iter()
        .map(|lv| {
            serde_json::json!({
                "rate": lv.rate.to_string(),
                "d_min": lv.d_min,
                "a_d_min": lv.a_d_min.map(|a| a.to_string()),
                "exact": lv.exact,
            })
        })
        .collect();
    serde_json::json!({
        "n": fig.n,
        "volume_log2": fig.volume_log2,
        "d_min_sq": fig.d_min_sq.to_string(),
        "coding_gain": fig.coding_gain,
        "coding_gain_db": fig.coding_gain_db,
        "gain_exponent_log4": fig.gain_exponent_log4.to_string(),
        "kissing": fig.kissing.map(|t| t.to_string()),
        "kissing_is_exact": fig.kissing_is_exact,
        "normalized_kissing": fig.normalized_kissing,
        "normalized_kissing_bounded_by_two": fig.normalized_kissing_bound_two,
        "alt_gain_small_d": fig.alt_gain_small_d,
        "levels": levels,
        "notes": report.notes,
    })
}
