//! Ingestion of zeta-zero ordinate lists and the explicit-sum inputs
//! (N0, S0) derived from them.
//!
//! Input files are plain text, one ordinate per line, strictly ascending
//! (the LMFDB export format). Each ordinate is parsed into an enclosure, so
//! sums of 1/gamma are honest upper bounds regardless of how many digits the
//! source file carries.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{Interval, Prec};

/// Precision used for parsed ordinates; covers 28-digit inputs with room.
pub const INGEST_PREC: Prec = 128;

#[derive(Debug, Clone)]
pub struct ZeroList {
    pub ordinates: Vec<Interval>,
    pub source_label: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ZeroSummary {
    pub t0: String,
    pub n0: u64,
    /// Upward-rounded upper bound on the sum of 1/gamma over gamma <= T0.
    pub s0: String,
    pub max_ordinate: String,
}

impl ZeroList {
    /// Parse an ordinate-per-line file. Rejects non-numeric or non-ascending
    /// lines with their line numbers. An empty file yields an empty list.
    pub fn ingest(path: &Path) -> Result<ZeroList> {
        let file = std::fs::File::open(path)?;
        let reader = BufReader::new(file);
        let mut ordinates: Vec<Interval> = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let text = line.trim();
            if text.is_empty() {
                continue;
            }
            let gamma = Interval::parse(INGEST_PREC, text).map_err(|e| Error::ParseAt {
                line: idx + 1,
                msg: e.to_string(),
            })?;
            if !gamma.is_strictly_positive() {
                return Err(Error::ParseAt {
                    line: idx + 1,
                    msg: "ordinates must be positive".into(),
                });
            }
            if let Some(prev) = ordinates.last() {
                if gamma.lo() <= prev.lo() {
                    return Err(Error::ParseAt {
                        line: idx + 1,
                        msg: "ordinates must be strictly ascending".into(),
                    });
                }
            } else if *gamma.hi() <= 14u32 {
                return Err(Error::ParseAt {
                    line: idx + 1,
                    msg: "first ordinate must exceed 14 (first zero is 14.13...)".into(),
                });
            }
            ordinates.push(gamma);
        }
        Ok(ZeroList {
            ordinates,
            source_label: path.display().to_string(),
        })
    }

    pub fn is_empty(&self) -> bool {
        self.ordinates.is_empty()
    }

    pub fn max_ordinate(&self) -> Option<&Interval> {
        self.ordinates.last()
    }

    /// Count and 1/gamma sum over ordinates <= t0. Errors when t0 exceeds the
    /// ingested range, since the summary would silently undercount.
    pub fn summarize(&self, t0: &Interval) -> Result<ZeroSummary> {
        let max = self
            .max_ordinate()
            .ok_or_else(|| Error::Coverage("empty zero list".into()))?;
        if t0.hi() > max.hi() {
            return Err(Error::Coverage(format!(
                "T0 = {} exceeds the largest ingested ordinate {}",
                t0.mid_string(10),
                max.mid_string(10)
            )));
        }
        let mut n0: u64 = 0;
        let mut s0 = Interval::zero(INGEST_PREC);
        for gamma in &self.ordinates {
            if gamma.hi() > t0.hi() {
                break;
            }
            n0 += 1;
            s0 = s0.add(&gamma.recip()?);
        }
        Ok(ZeroSummary {
            t0: t0.hi_string(),
            n0,
            s0: s0.hi_string(),
            max_ordinate: max.hi_string(),
        })
    }

    /// Upward-rounded sum of gamma^-(m+1) over U < gamma <= V.
    pub fn oracle_sum_inverse_power(&self, m: u32, u: &Interval, v: &Interval) -> Result<Interval> {
        if m < 1 {
            return Err(Error::Domain("oracle sum requires m >= 1".into()));
        }
        if u.lo() > v.lo() {
            return Err(Error::Domain("oracle sum requires U <= V".into()));
        }
        let max = self
            .max_ordinate()
            .ok_or_else(|| Error::Coverage("empty zero list".into()))?;
        if v.hi() > max.hi() {
            return Err(Error::Coverage(
                "oracle window extends beyond the ingested ordinates".into(),
            ));
        }
        let mut acc = Interval::zero(INGEST_PREC);
        for gamma in &self.ordinates {
            if gamma.hi() <= u.hi() {
                continue;
            }
            if gamma.hi() > v.hi() {
                break;
            }
            acc = acc.add(&gamma.pow_u32(m + 1).recip()?);
        }
        Ok(acc)
    }
}

/// Streaming summary for lists too large to hold in memory. Optionally writes
/// a `key = value` checkpoint of the partial state every `checkpoint_every`
/// lines so a later run can resume inspection without re-reading the file.
pub fn summarize_file(
    path: &Path,
    t0: &Interval,
    checkpoint: Option<(&Path, u64)>,
) -> Result<ZeroSummary> {
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut n0: u64 = 0;
    let mut s0 = Interval::zero(INGEST_PREC);
    let mut last: Option<Interval> = None;
    let mut lines: u64 = 0;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        let gamma = Interval::parse(INGEST_PREC, text).map_err(|e| Error::ParseAt {
            line: idx + 1,
            msg: e.to_string(),
        })?;
        if let Some(prev) = &last {
            if gamma.lo() <= prev.lo() {
                return Err(Error::ParseAt {
                    line: idx + 1,
                    msg: "ordinates must be strictly ascending".into(),
                });
            }
        }
        if gamma.hi() <= t0.hi() {
            n0 += 1;
            s0 = s0.add(&gamma.recip()?);
        }
        last = Some(gamma);
        lines += 1;
        if let Some((ckpt_path, every)) = checkpoint {
            if every > 0 && lines % every == 0 {
                write_checkpoint(ckpt_path, lines, n0, &s0)?;
            }
        }
    }
    let max = last.ok_or_else(|| Error::Coverage("empty zero list".into()))?;
    if t0.hi() > max.hi() {
        return Err(Error::Coverage(format!(
            "T0 = {} exceeds the largest ingested ordinate {}",
            t0.mid_string(10),
            max.mid_string(10)
        )));
    }
    Ok(ZeroSummary {
        t0: t0.hi_string(),
        n0,
        s0: s0.hi_string(),
        max_ordinate: max.hi_string(),
    })
}

fn write_checkpoint(path: &Path, lines: u64, n0: u64, s0: &Interval) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "lines = {lines}")?;
    writeln!(f, "N0_partial = {n0}")?;
    writeln!(f, "S0_partial = {}", s0.hi_string())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn fixture() -> ZeroList {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/zeros100.txt");
        ZeroList::ingest(Path::new(path)).unwrap()
    }

    fn write_temp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn fixture_ingests() {
        let zeros = fixture();
        assert_eq!(zeros.ordinates.len(), 100);
        assert!(*zeros.ordinates[0].lo() > 14.134 && *zeros.ordinates[0].hi() < 14.135);
        assert!(*zeros.max_ordinate().unwrap().hi() < 236.53);
    }

    #[test]
    fn three_zero_fixture_parses() {
        let f = write_temp("14.134725\n21.022040\n25.010858\n");
        let zeros = ZeroList::ingest(f.path()).unwrap();
        assert_eq!(zeros.ordinates.len(), 3);
    }

    #[test]
    fn ordering_violation_reports_line() {
        let f = write_temp("21.0\n14.1\n");
        let err = ZeroList::ingest(f.path()).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn empty_file_gives_empty_list() {
        let f = write_temp("");
        let zeros = ZeroList::ingest(f.path()).unwrap();
        assert!(zeros.is_empty());
    }

    #[test]
    fn summarize_small_t0() {
        let f = write_temp("14.134725\n21.022040\n25.010858\n");
        let zeros = ZeroList::ingest(f.path()).unwrap();
        let s = zeros.summarize(&Interval::exact_u64(INGEST_PREC, 20)).unwrap();
        assert_eq!(s.n0, 1);
        let s0 = Interval::parse(INGEST_PREC, &s.s0).unwrap();
        let expected = Interval::parse(INGEST_PREC, "14.134725").unwrap().recip().unwrap();
        assert!(s0.hi() >= expected.hi());
        assert!((s0.to_f64() - expected.to_f64()).abs() < 1e-12);
    }

    #[test]
    fn summarize_t0_one_is_empty_sum() {
        let zeros = fixture();
        let s = zeros.summarize(&Interval::exact_u64(INGEST_PREC, 1)).unwrap();
        assert_eq!(s.n0, 0);
        assert_eq!(Interval::parse(INGEST_PREC, &s.s0).unwrap().to_f64(), 0.0);
    }

    #[test]
    fn summarize_coverage_error() {
        let zeros = fixture();
        let err = zeros.summarize(&Interval::exact_u64(INGEST_PREC, 1_000_000)).unwrap_err();
        assert!(matches!(err, Error::Coverage(_)));
    }

    #[test]
    fn summarize_fixture_at_100() {
        // frozen: 29 ordinates below 100, sum of 1/gamma = 0.59224351...
        let zeros = fixture();
        let s = zeros.summarize(&Interval::exact_u64(INGEST_PREC, 100)).unwrap();
        assert_eq!(s.n0, 29);
        let s0 = Interval::parse(INGEST_PREC, &s.s0).unwrap().to_f64();
        assert!((s0 - 0.59224351116440666).abs() < 1e-15, "{s0}");
    }

    #[test]
    fn summarize_monotone_in_t0() {
        let zeros = fixture();
        let mut prev_n0 = 0;
        let mut prev_s0 = 0.0;
        for t0 in [20u64, 50, 100, 150, 200] {
            let s = zeros.summarize(&Interval::exact_u64(INGEST_PREC, t0)).unwrap();
            assert!(s.n0 >= prev_n0);
            let s0 = Interval::parse(INGEST_PREC, &s.s0).unwrap().to_f64();
            assert!(s0 >= prev_s0);
            prev_n0 = s.n0;
            prev_s0 = s0;
        }
    }

    #[test]
    fn oracle_sum_first_three() {
        // frozen: sum of gamma^-3 over the first three zeros
        let zeros = fixture();
        let u = Interval::zero(INGEST_PREC);
        let v = Interval::exact_u64(INGEST_PREC, 30);
        let s = zeros.oracle_sum_inverse_power(2, &u, &v).unwrap().to_f64();
        assert!((s - 5.256668818373151308e-4).abs() < 1e-18, "{s}");
    }

    #[test]
    fn oracle_sum_single_term() {
        let zeros = fixture();
        let u = Interval::zero(INGEST_PREC);
        let v = Interval::exact_u64(INGEST_PREC, 20);
        let s = zeros.oracle_sum_inverse_power(1, &u, &v).unwrap().to_f64();
        assert!((s - 0.0050052441235941161).abs() < 1e-16, "{s}");
    }

    #[test]
    fn oracle_sum_empty_window() {
        let zeros = fixture();
        let u = Interval::exact_u64(INGEST_PREC, 50);
        let s = zeros.oracle_sum_inverse_power(2, &u, &u).unwrap();
        assert_eq!(s.to_f64(), 0.0);
    }

    #[test]
    fn oracle_sum_monotone_in_v() {
        let zeros = fixture();
        let u = Interval::exact_u64(INGEST_PREC, 15);
        let a = zeros
            .oracle_sum_inverse_power(2, &u, &Interval::exact_u64(INGEST_PREC, 100))
            .unwrap();
        let b = zeros
            .oracle_sum_inverse_power(2, &u, &Interval::exact_u64(INGEST_PREC, 200))
            .unwrap();
        assert!(b.lo() >= a.lo());
    }

    #[test]
    fn streaming_matches_in_memory() {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/zeros100.txt");
        let t0 = Interval::exact_u64(INGEST_PREC, 100);
        let in_mem = fixture().summarize(&t0).unwrap();
        let ckpt = tempfile::NamedTempFile::new().unwrap();
        let streamed =
            summarize_file(Path::new(path), &t0, Some((ckpt.path(), 40))).unwrap();
        assert_eq!(in_mem, streamed);
        let ckpt_text = std::fs::read_to_string(ckpt.path()).unwrap();
        assert!(ckpt_text.contains("lines = 80"), "{ckpt_text}");
    }
}
