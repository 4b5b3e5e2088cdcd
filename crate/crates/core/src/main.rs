//! Command-line front end for certification, parameter search, and the
//! supporting data pipeline.
//!
//! Exit codes: 0 success (and, for `certify`, margin certified positive),
//! 1 usage or input error, 2 certification completed with a non-positive
//! margin, 3 search exhausted its budget without a feasible point.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use primecert::certify::{self, reference, SearchParams};
use primecert::constants::{AnalyticConstants, ResolvedConstants};
use primecert::error::Error;
use primecert::interval::Interval;
use primecert::manifest::RunManifest;
use primecert::optimize::{self, SearchConfig};
use primecert::zeros::{self, ZeroSummary};
use primecert::{Prec, DEFAULT_PREC};

#[derive(Parser)]
#[command(name = "primecert", version, about = "Certified prime-gap intervals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify explicit parameters at a given x0.
    Certify {
        /// Natural log of x0 (x0 = e^{log x0}).
        #[arg(long, conflicts_with = "x0")]
        log_x0: Option<String>,
        /// x0 as a decimal value.
        #[arg(long)]
        x0: Option<String>,
        /// Parameters as "m,n,delta,a,T1[,sigma0]".
        #[arg(long)]
        params: String,
        #[arg(long, default_value_t = DEFAULT_PREC)]
        precision: Prec,
        /// Constants override file (key = value lines).
        #[arg(long)]
        constants: Option<PathBuf>,
        /// Zero-list summary JSON produced by the `zeros` command.
        #[arg(long)]
        zeros_summary: Option<PathBuf>,
        /// Write the certificate JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for the largest certifiable Delta at a given x0.
    Optimize {
        #[arg(long)]
        log_x0: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Generation budget per (m, n) block; defaults to the built-in.
        #[arg(long)]
        budget_generations: Option<u32>,
        #[arg(long, default_value_t = DEFAULT_PREC)]
        precision: Prec,
        #[arg(long)]
        constants: Option<PathBuf>,
        #[arg(long)]
        zeros_summary: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the search trace as TSV (m, n, generation, best Delta, margin).
        #[arg(long)]
        trace_out: Option<PathBuf>,
    },
    /// Reproduce the reference tables.
    Table {
        /// Which table: 2 (certify stored rows) or 3 (search at large x0).
        #[arg(long)]
        which: u32,
        /// For table 2: locally refine each row's parameters first.
        #[arg(long, default_value_t = false)]
        refine: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        budget_generations: Option<u32>,
        #[arg(long, default_value_t = DEFAULT_PREC)]
        precision: Prec,
        #[arg(long)]
        constants: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize a zero-ordinate file (count and 1/gamma sum up to T0).
    Zeros {
        /// Ordinate-per-line input file.
        #[arg(long)]
        zeros: PathBuf,
        #[arg(long = "T0", alias = "t0", default_value = "104537615")]
        t0: String,
        /// Checkpoint file for resumable streaming.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long, default_value_t = 1_000_000)]
        checkpoint_every: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit log Delta against log x0 by least squares.
    Fit {
        /// CSV whose first two columns are log x0 and Delta.
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::NoFeasiblePoint(_) => 3,
                _ => 1,
            })
        }
    }
}

fn load_constants(path: Option<&PathBuf>, prec: Prec) -> Result<ResolvedConstants, Error> {
    let base = AnalyticConstants::default_constants();
    let constants = match path {
        Some(p) => AnalyticConstants::load_overrides(p, &base)?,
        None => base,
    };
    constants.resolve(prec)
}

fn load_zero_summary(path: Option<&PathBuf>) -> Result<Option<ZeroSummary>, Error> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            let summary: ZeroSummary = serde_json::from_str(&text)
                .map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?;
            Ok(Some(summary))
        }
        None => Ok(None),
    }
}

fn parse_params(text: &str) -> Result<SearchParams, Error> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 5 && parts.len() != 6 {
        return Err(Error::Parse(
            "expected --params \"m,n,delta,a,T1[,sigma0]\"".into(),
        ));
    }
    let m: u32 = parts[0]
        .parse()
        .map_err(|_| Error::Parse(format!("m {:?} is not an integer", parts[0])))?;
    let n: u32 = parts[1]
        .parse()
        .map_err(|_| Error::Parse(format!("n {:?} is not an integer", parts[1])))?;
    let mut params = SearchParams::new(m, n, parts[2], parts[3], parts[4]);
    if parts.len() == 6 {
        params.sigma0 = parts[5].to_string();
    }
    Ok(params)
}

fn resolve_x0(
    log_x0: Option<&String>,
    x0: Option<&String>,
    prec: Prec,
) -> Result<(Interval, String), Error> {
    match (log_x0, x0) {
        (Some(l), None) => {
            let v = if l == "log(4e18)" {
                Interval::parse(prec, "4e18")?.ln()?
            } else {
                Interval::parse(prec, l)?
            };
            Ok((v.exp(), l.clone()))
        }
        (None, Some(x)) => {
            let v = Interval::parse(prec, x)?;
            Ok((v, x.clone()))
        }
        _ => Err(Error::Parse("provide exactly one of --log-x0 or --x0".into())),
    }
}

fn emit<T: Serialize>(value: &T, out: Option<&PathBuf>) -> Result<(), Error> {
    let json = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Parse(format!("serialization failed: {e}")))?;
    match out {
        Some(p) => std::fs::write(p, json + "\n")?,
        None => println!("{json}"),
    }
    Ok(())
}

#[derive(Serialize)]
struct CertifyOutput {
    manifest: RunManifest,
    certificate: certify::Certificate,
}

#[derive(Serialize)]
struct OptimizeOutput {
    manifest: RunManifest,
    result: optimize::SearchResult,
}

#[derive(Serialize)]
struct ZerosOutput {
    manifest: RunManifest,
    summary: ZeroSummary,
}

#[derive(Serialize)]
struct FitOutput {
    manifest: RunManifest,
    slope: f64,
    intercept: f64,
    rows: usize,
    table: String,
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Certify {
            log_x0,
            x0,
            params,
            precision,
            constants,
            zeros_summary,
            out,
        } => {
            let c = load_constants(constants.as_ref(), precision)?;
            let zs = load_zero_summary(zeros_summary.as_ref())?;
            let (x0_val, x0_label) = resolve_x0(log_x0.as_ref(), x0.as_ref(), precision)?;
            let p = parse_params(&params)?;
            let cert = certify::certify(&x0_val, &p, &c, zs.as_ref())?;
            let mut inputs = BTreeMap::new();
            inputs.insert("x0".into(), x0_label);
            inputs.insert("params".into(), params);
            let manifest = RunManifest::new("certify", inputs, &c.fingerprint, precision);
            let valid = cert.valid;
            emit(
                &CertifyOutput {
                    manifest,
                    certificate: cert,
                },
                out.as_ref(),
            )?;
            Ok(if valid {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::Optimize {
            log_x0,
            seed,
            budget_generations,
            precision,
            constants,
            zeros_summary,
            out,
            trace_out,
        } => {
            let c = load_constants(constants.as_ref(), precision)?;
            let zs = load_zero_summary(zeros_summary.as_ref())?;
            let (x0_val, x0_label) = resolve_x0(Some(&log_x0), None, precision)?;
            let mut cfg = SearchConfig {
                rng_seed: seed,
                ..SearchConfig::default()
            };
            if let Some(b) = budget_generations {
                cfg.de_generations = b;
            }
            let result = optimize::optimize(&x0_val, &cfg, &c, zs.as_ref())?;
            let mut inputs = BTreeMap::new();
            inputs.insert("log_x0".into(), x0_label);
            inputs.insert("seed".into(), seed.to_string());
            inputs.insert("generations".into(), cfg.de_generations.to_string());
            let manifest = RunManifest::new("optimize", inputs, &c.fingerprint, precision);
            if let Some(p) = trace_out.as_ref() {
                let mut tsv = String::from("m\tn\tgeneration\tbest_log10_delta\tbest_margin\n");
                for t in &result.trace {
                    tsv.push_str(&format!(
                        "{}\t{}\t{}\t{}\t{}\n",
                        t.m, t.n, t.generation, t.best_log10_delta_cap, t.best_margin
                    ));
                }
                std::fs::write(p, tsv)?;
            }
            emit(&OptimizeOutput { manifest, result }, out.as_ref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Table {
            which,
            refine,
            seed,
            budget_generations,
            precision,
            constants,
            out,
        } => {
            let c = load_constants(constants.as_ref(), precision)?;
            match which {
                2 => {
                    let csv = table2(&c, refine, seed, budget_generations)?;
                    match out {
                        Some(p) => std::fs::write(p, csv)?,
                        None => print!("{csv}"),
                    }
                    Ok(ExitCode::SUCCESS)
                }
                3 => {
                    let csv = table3(&c, seed, budget_generations)?;
                    match out {
                        Some(p) => std::fs::write(p, csv)?,
                        None => print!("{csv}"),
                    }
                    Ok(ExitCode::SUCCESS)
                }
                other => Err(Error::Parse(format!(
                    "--which must be 2 or 3, got {other}"
                ))),
            }
        }
        Command::Zeros {
            zeros,
            t0,
            checkpoint,
            checkpoint_every,
            out,
        } => {
            let t0_val = Interval::parse(DEFAULT_PREC, &t0)?;
            let ckpt = checkpoint.as_deref().map(|p| (p, checkpoint_every));
            let summary = zeros::summarize_file(&zeros, &t0_val, ckpt)?;
            let c = AnalyticConstants::default_constants();
            let mut inputs = BTreeMap::new();
            inputs.insert("zeros".into(), zeros.display().to_string());
            inputs.insert("T0".into(), t0);
            let manifest = RunManifest::new("zeros", inputs, &c.fingerprint(), DEFAULT_PREC);
            eprintln!("N0 = {}, S0 = {}", summary.n0, summary.s0);
            emit(&ZerosOutput { manifest, summary }, out.as_ref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Fit { input, out } => {
            let text = std::fs::read_to_string(&input)?;
            let prec = DEFAULT_PREC;
            let mut rows = Vec::new();
            for (idx, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() {
                    continue;
                }
                let cols: Vec<&str> = line.split(',').map(str::trim).collect();
                if cols.len() < 2 {
                    return Err(Error::ParseAt {
                        line: idx + 1,
                        msg: "expected at least two comma-separated columns".into(),
                    });
                }
                // skip a header row
                if idx == 0 && cols[1].parse::<f64>().is_err() && Interval::parse(prec, cols[1]).is_err() {
                    continue;
                }
                let lx = if cols[0] == "log(4e18)" {
                    Interval::parse(prec, "4e18")?.ln()?.to_f64()
                } else {
                    cols[0].parse::<f64>().map_err(|_| Error::ParseAt {
                        line: idx + 1,
                        msg: format!("log x0 {:?} is not a number", cols[0]),
                    })?
                };
                let delta = Interval::parse(prec, cols[1]).map_err(|_| Error::ParseAt {
                    line: idx + 1,
                    msg: format!("Delta {:?} is not a number", cols[1]),
                })?;
                let ld = delta.ln().map_err(|_| Error::ParseAt {
                    line: idx + 1,
                    msg: "Delta must be positive".into(),
                })?;
                rows.push((lx, ld.to_f64()));
            }
            let (slope, intercept) = optimize::fit_regression(&rows)?;
            let mut table = String::from("log_x0\tlog_delta\tfitted\n");
            for (lx, ld) in &rows {
                table.push_str(&format!(
                    "{lx:.6}\t{ld:.6}\t{:.6}\n",
                    slope * lx + intercept
                ));
            }
            let c = AnalyticConstants::default_constants();
            let mut inputs = BTreeMap::new();
            inputs.insert("in".into(), input.display().to_string());
            let manifest = RunManifest::new("fit", inputs, &c.fingerprint(), prec);
            emit(
                &FitOutput {
                    manifest,
                    slope,
                    intercept,
                    rows: rows.len(),
                    table,
                },
                out.as_ref(),
            )?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn table2(
    c: &ResolvedConstants,
    refine: bool,
    seed: u64,
    budget: Option<u32>,
) -> Result<String, Error> {
    let mut csv =
        String::from("log_x0,m,n,delta,a,T1,delta_published,delta_ours,margin,pass,delta_scale\n");
    for row in &reference::ROWS {
        let x0 = row.x0(c)?;
        let mut params = row.params();
        if refine {
            let cfg = SearchConfig {
                rng_seed: seed,
                de_generations: budget.unwrap_or(40),
                ..SearchConfig::default()
            };
            if let Ok(result) = optimize::refine(&x0, &params, &cfg, c, None) {
                params = result.best.params;
            }
        }
        let (cert, scale) = certify::certify_with_drift(&x0, &params, c, None)?;
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            row.log_x0_label,
            cert.params.m,
            cert.params.n,
            cert.params.delta,
            cert.params.a,
            cert.params.t1,
            row.delta_cap_published,
            cert.delta_cap,
            cert.breakdown.margin_lo,
            cert.valid,
            scale.unwrap_or_else(|| "1".into()),
        ));
    }
    Ok(csv)
}

fn table3(c: &ResolvedConstants, seed: u64, budget: Option<u32>) -> Result<String, Error> {
    let mut csv = String::from("log_x0,m,n,delta,a,T1,delta_published,delta_ours,margin,pass\n");
    for (label, published) in &reference::EXTRA_PAIRS {
        let x0 = Interval::parse(c.prec, label)?.exp();
        let mut cfg = SearchConfig {
            rng_seed: seed,
            ..SearchConfig::default()
        };
        if let Some(b) = budget {
            cfg.de_generations = b;
        }
        let result = optimize::optimize(&x0, &cfg, c, None)?;
        let cert = result.best;
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            label,
            cert.params.m,
            cert.params.n,
            cert.params.delta,
            cert.params.a,
            cert.params.t1,
            published,
            cert.delta_cap,
            cert.breakdown.margin_lo,
            cert.valid,
        ));
    }
    Ok(csv)
}
