//! Registry of the fixed analytic constants: the Riemann height, the
//! zero-free-region constant, zero-counting and zero-density coefficients,
//! the theta/psi transfer constant, and the explicit zero-sum inputs.
//!
//! Values are stored as decimal strings (or exact integers) and parsed into
//! the working precision at the point of use, so raising precision never
//! re-rounds through a low-precision intermediate. Any constant can be
//! overridden from a `key = value` file.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::interval::{Interval, Prec};

/// One row of the zero-density table: N(sigma, T) <= A (log kT)^{2sigma}
/// (log T)^{5-4sigma} T^{8(1-sigma)/3} + B (log T)^2 for T >= H.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroDensityEntry {
    pub sigma: String,
    pub a_sigma: String,
    pub b_sigma: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticConstants {
    /// Height to which the Riemann hypothesis is verified.
    pub riemann_height_h: u64,
    /// De la Vallee Poussin zero-free-region constant.
    pub zero_free_r0: String,
    /// (a1, a2, a3) in |N(T) - P(T)| <= a1 log T + a2 log log T + a3.
    pub zero_count_coeffs: (String, String, String),
    /// Lower validity threshold for R(T); must be at least e.
    pub zero_count_t0: String,
    /// (A0, A1, A2) in the zero-sum error term.
    pub bpt_constants: (String, String, String),
    /// Transfer constant between theta- and psi-smoothed sums.
    pub omega: String,
    /// (alpha1, alpha2) from the psi - theta upper bound; informational only.
    pub psi_theta_alphas: (String, String),
    /// Cutoff for explicit zero sums.
    pub zero_sum_t0: u64,
    /// Number of zero ordinates in (0, T0].
    pub zero_sum_n0: u64,
    /// Upper bound on the sum of 1/gamma over (0, T0].
    pub zero_sum_s0: String,
    pub density_entries: Vec<ZeroDensityEntry>,
    /// k parameter inside log(kT); admissible range [1e9/H, 1].
    pub density_k: String,
    /// Minimum admissible X0.
    pub x0_floor: String,
}

impl AnalyticConstants {
    pub fn default_constants() -> Self {
        AnalyticConstants {
            riemann_height_h: 3_000_175_332_800,
            zero_free_r0: "5.573412".into(),
            zero_count_coeffs: ("0.110".into(), "0.290".into(), "2.290".into()),
            zero_count_t0: "2.718281828459045235360287471352662497".into(),
            bpt_constants: ("2.067".into(), "0.059".into(), "1/150".into()),
            omega: "1.0344e-3".into(),
            psi_theta_alphas: ("1.0000000193378".into(), "1.04320".into()),
            zero_sum_t0: 104_537_615,
            zero_sum_n0: 260_000_000,
            zero_sum_s0: "21.98308".into(),
            density_entries: vec![
                ZeroDensityEntry {
                    sigma: "0.7804".into(),
                    a_sigma: "5.8773".into(),
                    b_sigma: "3.869".into(),
                },
                ZeroDensityEntry {
                    sigma: "0.9".into(),
                    a_sigma: "11.499".into(),
                    b_sigma: "3.186".into(),
                },
            ],
            // Minimum admissible value: the density bound is increasing in k
            // through (log kT)^{2 sigma}, so the smallest k is sharpest.
            density_k: "1000000000/3000175332800".into(),
            x0_floor: "3.99e18".into(),
        }
    }

    /// Canonical key/value form; doubles as the override-file format and
    /// the fingerprint preimage.
    pub fn to_key_values(&self) -> Vec<(String, String)> {
        let mut kv = vec![
            ("H".to_string(), self.riemann_height_h.to_string()),
            ("R0".to_string(), self.zero_free_r0.clone()),
            ("a1".to_string(), self.zero_count_coeffs.0.clone()),
            ("a2".to_string(), self.zero_count_coeffs.1.clone()),
            ("a3".to_string(), self.zero_count_coeffs.2.clone()),
            ("zero_count_T0".to_string(), self.zero_count_t0.clone()),
            ("A0".to_string(), self.bpt_constants.0.clone()),
            ("A1".to_string(), self.bpt_constants.1.clone()),
            ("A2".to_string(), self.bpt_constants.2.clone()),
            ("omega".to_string(), self.omega.clone()),
            ("alpha1".to_string(), self.psi_theta_alphas.0.clone()),
            ("alpha2".to_string(), self.psi_theta_alphas.1.clone()),
            ("T0".to_string(), self.zero_sum_t0.to_string()),
            ("N0".to_string(), self.zero_sum_n0.to_string()),
            ("S0".to_string(), self.zero_sum_s0.clone()),
            ("k".to_string(), self.density_k.clone()),
            ("X0_floor".to_string(), self.x0_floor.clone()),
        ];
        for e in &self.density_entries {
            kv.push((
                format!("density_{}", e.sigma),
                format!("{},{}", e.a_sigma, e.b_sigma),
            ));
        }
        kv
    }

    pub fn to_override_file(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.to_key_values() {
            writeln!(out, "{k} = {v}").unwrap();
        }
        out
    }

    /// SHA-256 of the canonical key/value serialization.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.to_override_file().as_bytes());
        hex_string(&hasher.finalize())
    }

    fn apply_override(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "H" | "riemann_height_H" => {
                self.riemann_height_h = value
                    .parse()
                    .map_err(|_| invalid(key, "expected an exact integer"))?;
            }
            "R0" => self.zero_free_r0 = value.into(),
            "a1" => self.zero_count_coeffs.0 = value.into(),
            "a2" => self.zero_count_coeffs.1 = value.into(),
            "a3" => self.zero_count_coeffs.2 = value.into(),
            "zero_count_T0" => self.zero_count_t0 = value.into(),
            "A0" => self.bpt_constants.0 = value.into(),
            "A1" => self.bpt_constants.1 = value.into(),
            "A2" => self.bpt_constants.2 = value.into(),
            "omega" => self.omega = value.into(),
            "alpha1" => self.psi_theta_alphas.0 = value.into(),
            "alpha2" => self.psi_theta_alphas.1 = value.into(),
            "T0" => {
                self.zero_sum_t0 = value
                    .parse()
                    .map_err(|_| invalid(key, "expected an exact integer"))?;
            }
            "N0" => {
                self.zero_sum_n0 = value
                    .parse()
                    .map_err(|_| invalid(key, "expected an exact integer"))?;
            }
            "S0" => self.zero_sum_s0 = value.into(),
            "k" => self.density_k = value.into(),
            "X0_floor" => self.x0_floor = value.into(),
            _ => {
                if let Some(sigma) = key.strip_prefix("density_") {
                    let (a, b) = value.split_once(',').ok_or_else(|| {
                        invalid(key, "expected `A,B` for a density entry")
                    })?;
                    let entry = ZeroDensityEntry {
                        sigma: sigma.to_string(),
                        a_sigma: a.trim().to_string(),
                        b_sigma: b.trim().to_string(),
                    };
                    match self.density_entries.iter_mut().find(|e| e.sigma == sigma) {
                        Some(existing) => *existing = entry,
                        None => self.density_entries.push(entry),
                    }
                } else {
                    return Err(invalid(key, "unknown constant"));
                }
            }
        }
        Ok(())
    }

    /// Apply a `key = value` override file on top of `base` and re-check
    /// every invariant.
    pub fn load_overrides(path: &Path, base: &AnalyticConstants) -> Result<AnalyticConstants> {
        let text = std::fs::read_to_string(path)?;
        let mut out = base.clone();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::ParseAt {
                line: idx + 1,
                msg: format!("expected `key = value`, got {line:?}"),
            })?;
            out.apply_override(key.trim(), value).map_err(|e| match e {
                Error::Invariant { key, msg } => Error::ParseAt {
                    line: idx + 1,
                    msg: format!("{key}: {msg}"),
                },
                other => other,
            })?;
        }
        out.validate()?;
        Ok(out)
    }

    /// Check every type invariant at a fixed internal precision.
    pub fn validate(&self) -> Result<()> {
        self.resolve(128).map(|_| ())
    }

    /// Parse everything into enclosures at `prec` bits, checking invariants.
    pub fn resolve(&self, prec: Prec) -> Result<ResolvedConstants> {
        let parse = |key: &str, s: &str| -> Result<Interval> {
            Interval::parse(prec, s).map_err(|e| invalid(key, &e.to_string()))
        };
        let positive = |key: &str, v: &Interval| -> Result<()> {
            if v.is_strictly_positive() {
                Ok(())
            } else {
                Err(invalid(key, "must be strictly positive"))
            }
        };

        if self.riemann_height_h == 0 {
            return Err(invalid("H", "must be positive"));
        }
        let h = Interval::exact_u64(prec, self.riemann_height_h);
        let r0 = parse("R0", &self.zero_free_r0)?;
        positive("R0", &r0)?;
        let a1 = parse("a1", &self.zero_count_coeffs.0)?;
        let a2 = parse("a2", &self.zero_count_coeffs.1)?;
        let a3 = parse("a3", &self.zero_count_coeffs.2)?;
        positive("a1", &a1)?;
        positive("a2", &a2)?;
        positive("a3", &a3)?;
        let zero_count_t0 = parse("zero_count_T0", &self.zero_count_t0)?;
        // The default is e truncated at 36 digits, so compare against a
        // slightly shorter truncation rather than e itself.
        let e_trunc = parse("zero_count_T0", "2.71828182845904523536028747135266249")?;
        if zero_count_t0.lo() < e_trunc.lo() {
            return Err(invalid("zero_count_T0", "must be at least e"));
        }
        let a0_bpt = parse("A0", &self.bpt_constants.0)?;
        let a1_bpt = parse("A1", &self.bpt_constants.1)?;
        let a2_bpt = parse("A2", &self.bpt_constants.2)?;
        positive("A0", &a0_bpt)?;
        positive("A1", &a1_bpt)?;
        positive("A2", &a2_bpt)?;
        let omega = parse("omega", &self.omega)?;
        positive("omega", &omega)?;
        let alpha1 = parse("alpha1", &self.psi_theta_alphas.0)?;
        let alpha2 = parse("alpha2", &self.psi_theta_alphas.1)?;
        if self.zero_sum_n0 == 0 {
            return Err(invalid("N0", "must be positive"));
        }
        let s0 = parse("S0", &self.zero_sum_s0)?;
        positive("S0", &s0)?;
        let k = parse("k", &self.density_k)?;
        let k_min = Interval::exact_u64(prec, 1_000_000_000)
            .div(&h)
            .expect("H > 0");
        if k.lo() < k_min.lo() {
            return Err(invalid("k", "below the admissible window 1e9/H"));
        }
        if *k.hi() > 1u32 {
            return Err(invalid("k", "above the admissible window (k <= 1)"));
        }
        let x0_floor = parse("X0_floor", &self.x0_floor)?;
        let floor_min = parse("X0_floor", "3.99e18")?;
        if x0_floor.lo() < floor_min.lo() {
            return Err(invalid("X0_floor", "below the 3.99e18 minimum"));
        }

        let mut density = Vec::with_capacity(self.density_entries.len());
        let mut prev_sigma: Option<Interval> = None;
        for entry in &self.density_entries {
            let key = format!("density_{}", entry.sigma);
            let sigma = parse(&key, &entry.sigma)?;
            let half = Interval::exact_u64(prec, 1)
                .div(&Interval::exact_u64(prec, 2))
                .unwrap();
            if sigma.lo() <= half.hi() || *sigma.hi() >= 1u32 {
                return Err(invalid(&key, "sigma must lie in (1/2, 1)"));
            }
            if let Some(prev) = &prev_sigma {
                if sigma.lo() <= prev.lo() {
                    return Err(invalid(&key, "entries must be sorted by sigma, no duplicates"));
                }
            }
            let a = parse(&key, &entry.a_sigma)?;
            let b = parse(&key, &entry.b_sigma)?;
            positive(&key, &a)?;
            positive(&key, &b)?;
            prev_sigma = Some(sigma.clone());
            density.push(ResolvedDensityEntry {
                sigma_label: entry.sigma.clone(),
                sigma,
                a,
                b,
            });
        }

        Ok(ResolvedConstants {
            prec,
            h_u64: self.riemann_height_h,
            h,
            r0,
            a1,
            a2,
            a3,
            zero_count_t0,
            a0_bpt,
            a1_bpt,
            a2_bpt,
            omega,
            alpha1,
            alpha2,
            t0: Interval::exact_u64(prec, self.zero_sum_t0),
            t0_u64: self.zero_sum_t0,
            n0: self.zero_sum_n0,
            s0,
            density,
            k,
            x0_floor,
            fingerprint: self.fingerprint(),
        })
    }
}

impl Default for AnalyticConstants {
    fn default() -> Self {
        Self::default_constants()
    }
}

/// All constants parsed into enclosures at one working precision.
/// Immutable after construction; share freely across threads.
#[derive(Debug, Clone)]
pub struct ResolvedConstants {
    pub prec: Prec,
    pub h_u64: u64,
    pub h: Interval,
    pub r0: Interval,
    pub a1: Interval,
    pub a2: Interval,
    pub a3: Interval,
    pub zero_count_t0: Interval,
    pub a0_bpt: Interval,
    pub a1_bpt: Interval,
    pub a2_bpt: Interval,
    pub omega: Interval,
    pub alpha1: Interval,
    pub alpha2: Interval,
    pub t0: Interval,
    pub t0_u64: u64,
    pub n0: u64,
    pub s0: Interval,
    pub density: Vec<ResolvedDensityEntry>,
    pub k: Interval,
    pub x0_floor: Interval,
    pub fingerprint: String,
}

#[derive(Debug, Clone)]
pub struct ResolvedDensityEntry {
    pub sigma_label: String,
    pub sigma: Interval,
    pub a: Interval,
    pub b: Interval,
}

impl ResolvedConstants {
    /// Find the density entry whose sigma encloses the same value as `sigma`.
    pub fn density_entry(&self, sigma: &Interval) -> Result<&ResolvedDensityEntry> {
        self.density
            .iter()
            .find(|e| e.sigma == *sigma)
            .ok_or_else(|| {
                Error::Domain(format!(
                    "no zero-density entry for sigma = {}",
                    sigma.mid_string(8)
                ))
            })
    }
}

fn invalid(key: &str, msg: &str) -> Error {
    Error::Invariant {
        key: key.to_string(),
        msg: msg.to_string(),
    }
}

fn hex_string(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        write!(s, "{b:02x}").unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn defaults_pass_invariants() {
        let c = AnalyticConstants::default_constants();
        c.validate().unwrap();
        assert_eq!(c.riemann_height_h, 3_000_175_332_800);
        assert_eq!(c.zero_sum_s0, "21.98308");
        let sigma09 = c
            .density_entries
            .iter()
            .find(|e| e.sigma == "0.9")
            .unwrap();
        assert_eq!(sigma09.a_sigma, "11.499");
        assert_eq!(sigma09.b_sigma, "3.186");
    }

    #[test]
    fn roundtrip_is_bitwise_identical() {
        let c = AnalyticConstants::default_constants();
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(c.to_override_file().as_bytes()).unwrap();
        let reloaded = AnalyticConstants::load_overrides(f.path(), &c).unwrap();
        assert_eq!(c.to_key_values(), reloaded.to_key_values());
        assert_eq!(c.fingerprint(), reloaded.fingerprint());
    }

    #[test]
    fn override_replaces_value() {
        let base = AnalyticConstants::default_constants();
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "# raise the zero-sum bound").unwrap();
        writeln!(f, "S0 = 22.0").unwrap();
        let c = AnalyticConstants::load_overrides(f.path(), &base).unwrap();
        assert_eq!(c.zero_sum_s0, "22.0");
        assert_ne!(c.fingerprint(), base.fingerprint());
    }

    #[test]
    fn override_k_out_of_window_fails() {
        let base = AnalyticConstants::default_constants();
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "k = 2").unwrap();
        let err = AnalyticConstants::load_overrides(f.path(), &base).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains('k'), "error should name the offending key: {msg}");
    }

    #[test]
    fn empty_override_file_is_identity() {
        let base = AnalyticConstants::default_constants();
        let f = tempfile::NamedTempFile::new().unwrap();
        let c = AnalyticConstants::load_overrides(f.path(), &base).unwrap();
        assert_eq!(c, base);
    }

    #[test]
    fn unknown_key_reports_line() {
        let base = AnalyticConstants::default_constants();
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "S0 = 22.0").unwrap();
        writeln!(f, "bogus = 1").unwrap();
        let err = AnalyticConstants::load_overrides(f.path(), &base).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn density_entry_lookup() {
        let c = AnalyticConstants::default_constants().resolve(128).unwrap();
        let sigma = Interval::parse(128, "0.7804").unwrap();
        let e = c.density_entry(&sigma).unwrap();
        assert_eq!(e.sigma_label, "0.7804");
        let missing = Interval::parse(128, "0.6").unwrap();
        assert!(c.density_entry(&missing).is_err());
    }
}
