//! The smooth weight f(t) = (A t^n (1-t))^m with A = (n+1)^{n+1} n^-n,
//! its closed-form norms, the incomplete integral nu(f, a), the mean-ratio
//! identity, and the F(k, m, delta) bounds (lambda_0, lambda_1, lambda).
//!
//! All factorials go through log-gamma at working precision (mn + m can
//! exceed 3500), with ratios formed in log space before exponentiating.

use std::collections::HashMap;
use std::sync::Mutex;

use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{Interval, Prec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub m: u32,
    pub n: u32,
}

/// Upper and lower bounds on F(k, m, delta) for k = 0, 1, m.
#[derive(Debug, Clone)]
pub struct FBounds {
    pub f0_lower: Interval,
    pub f0_upper: Interval,
    /// lambda_0
    pub f1_lower: Interval,
    /// lambda_1 = (1 + delta)^2 lambda_0
    pub f1_upper: Interval,
    /// lambda
    pub fm_upper: Interval,
}

/// log k! as an enclosure; exact zero for k <= 1.
fn ln_fact(prec: Prec, k: u64) -> Interval {
    if k <= 1 {
        return Interval::zero(prec);
    }
    Interval::exact_u64(prec, k + 1)
        .ln_gamma()
        .expect("argument >= 2")
}

fn binomial(m: u32, k: u32) -> u64 {
    let mut out: u64 = 1;
    for i in 0..k.min(m - k) {
        out = out * u64::from(m - i) / u64::from(i + 1);
    }
    out
}

type NormKey = (u32, u32, Prec);
static NORM1_CACHE: Lazy<Mutex<HashMap<NormKey, Interval>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));
static NORM2_CACHE: Lazy<Mutex<HashMap<NormKey, Interval>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

impl WeightSpec {
    pub fn new(m: u32, n: u32) -> Result<Self> {
        if m < 1 || n < 1 {
            return Err(Error::Domain("weight requires m >= 1 and n >= 1".into()));
        }
        if m % 2 == 1 && n % 2 == 0 {
            return Err(Error::Domain(
                "parity violation: n must be odd when m is odd".into(),
            ));
        }
        Ok(WeightSpec { m, n })
    }

    pub fn mn(&self) -> u64 {
        u64::from(self.m) * u64::from(self.n)
    }

    /// log A = (n+1) log(n+1) - n log n.
    pub fn ln_a(&self, prec: Prec) -> Interval {
        let n = Interval::exact_u64(prec, u64::from(self.n));
        let n1 = Interval::exact_u64(prec, u64::from(self.n) + 1);
        n1.mul(&n1.ln().unwrap()).sub(&n.mul(&n.ln().unwrap()))
    }

    /// A^m as an enclosure; A > e always holds, checked as a sanity guard.
    pub fn a_pow_m(&self, prec: Prec) -> Result<Interval> {
        let ln_a = self.ln_a(prec);
        if *ln_a.hi() <= 1u32 {
            return Err(Error::Invariant {
                key: "A".into(),
                msg: "normalizer must exceed e".into(),
            });
        }
        Ok(Interval::exact_u64(prec, u64::from(self.m)).mul(&ln_a).exp())
    }

    /// ||f||_1 = A^m m! (mn)! / (mn + m + 1)!.
    pub fn norm1(&self, prec: Prec) -> Result<Interval> {
        let key = (self.m, self.n, prec);
        if let Some(v) = NORM1_CACHE.lock().unwrap().get(&key) {
            return Ok(v.clone());
        }
        let m = u64::from(self.m);
        let mn = self.mn();
        let log = Interval::exact_u64(prec, m)
            .mul(&self.ln_a(prec))
            .add(&ln_fact(prec, m))
            .add(&ln_fact(prec, mn))
            .sub(&ln_fact(prec, mn + m + 1));
        let out = log.exp();
        NORM1_CACHE.lock().unwrap().insert(key, out.clone());
        Ok(out)
    }

    /// ||f^(m)||_2 closed form:
    /// A^m ((mn+m)! sum_k (-1)^{mn+m+k} C(m,k) (mn+k)! / (2mn-m+k+1)!)^{1/2}.
    pub fn norm2_mth_derivative(&self, prec: Prec) -> Result<Interval> {
        let key = (self.m, self.n, prec);
        if let Some(v) = NORM2_CACHE.lock().unwrap().get(&key) {
            return Ok(v.clone());
        }
        let m = u64::from(self.m);
        let mn = self.mn();
        let mut sum = Interval::zero(prec);
        for k in 0..=self.m {
            let ku = u64::from(k);
            let log = ln_fact(prec, mn + m)
                .add(&Interval::exact_u64(prec, binomial(self.m, k)).ln()?)
                .add(&ln_fact(prec, mn + ku))
                .sub(&ln_fact(prec, 2 * mn - m + ku + 1));
            let term = log.exp();
            // mn + m = m(n + 1) is even under the parity invariant, so the
            // sign reduces to (-1)^k.
            if ku % 2 == 0 {
                sum = sum.add(&term);
            } else {
                sum = sum.sub(&term);
            }
        }
        if !sum.is_strictly_positive() {
            return Err(Error::NegativeRadicand);
        }
        let out = self.a_pow_m(prec)?.mul(&sum.sqrt()?);
        NORM2_CACHE.lock().unwrap().insert(key, out.clone());
        Ok(out)
    }

    /// int_0^c t^{mn} (1-t)^m dt as the exact binomial series
    /// sum_j (-1)^j C(m,j) c^{mn+1+j} / (mn+1+j).
    fn partial_core(&self, prec: Prec, c: &Interval) -> Result<Interval> {
        let mn = self.mn();
        let mut acc = Interval::zero(prec);
        for j in 0..=self.m {
            let ju = u64::from(j);
            let coeff = Interval::exact_u64(prec, binomial(self.m, j));
            let power = c.pow_u32((mn + 1 + ju) as u32);
            let term = coeff
                .mul(&power)
                .div(&Interval::exact_u64(prec, mn + 1 + ju))?;
            if ju % 2 == 0 {
                acc = acc.add(&term);
            } else {
                acc = acc.sub(&term);
            }
        }
        Ok(acc)
    }

    /// nu(f, a) = int_0^a f + int_{1-a}^1 f, with f = (A t^n (1-t))^m.
    pub fn nu(&self, prec: Prec, a: &Interval) -> Result<Interval> {
        if *a.lo() < 0u32 || *a.hi() > 0.5 {
            return Err(Error::Domain("nu requires 0 <= a <= 1/2".into()));
        }
        if a.is_point() && a.contains_zero() {
            return Ok(Interval::zero(prec));
        }
        let m = u64::from(self.m);
        let mn = self.mn();
        // B(mn+1, m+1) = (mn)! m! / (mn+m+1)!
        let beta_full = ln_fact(prec, mn)
            .add(&ln_fact(prec, m))
            .sub(&ln_fact(prec, mn + m + 1))
            .exp();
        let one = Interval::one(prec);
        let head = self.partial_core(prec, a)?;
        let body = beta_full.sub(&self.partial_core(prec, &one.sub(a))?);
        Ok(self
            .a_pow_m(prec)?
            .mul(&head.add(&body))
            .max_zero())
    }

    /// int_0^1 (1 + delta t) f dt / ||f||_1 = 1 + (mn+1) delta / (mn+m+2).
    pub fn mean_ratio(&self, prec: Prec, delta: &Interval) -> Result<Interval> {
        if *delta.lo() < 0u32 {
            return Err(Error::Domain("mean_ratio requires delta >= 0".into()));
        }
        let mn = self.mn();
        let frac = Interval::exact_u64(prec, mn + 1)
            .div(&Interval::exact_u64(prec, mn + u64::from(self.m) + 2))?;
        Ok(Interval::one(prec).add(&frac.mul(delta)))
    }

    /// Bounds on F(0, m, delta), F(1, m, delta), F(m, m, delta).
    pub fn f_bounds(&self, prec: Prec, delta: &Interval) -> Result<FBounds> {
        if !delta.is_strictly_positive() || *delta.hi() > 1e-6 {
            return Err(Error::Domain("f_bounds requires 0 < delta <= 1e-6".into()));
        }
        let one = Interval::one(prec);
        let norm1 = self.norm1(prec)?;
        // lambda_0 = 2 (B^n - B^{n+1})^m (mn+m+1)! / (m! (mn)!) = 2 / ||f||_1,
        // since B = n/(n+1) makes B^n - B^{n+1} = 1/A.
        let lambda0 = Interval::exact_u64(prec, 2).div(&norm1)?;
        let one_plus = one.add(delta);
        let lambda1 = one_plus.mul(&one_plus).mul(&lambda0);
        // prefactor sqrt(((1+delta)^{2m+3} - 1) / (delta (2m+3))), formed with
        // expm1/log1p so delta ~ 1e-36 does not cancel.
        let p = 2 * u64::from(self.m) + 3;
        let pow_m1 = Interval::exact_u64(prec, p).mul(&delta.ln_1p()?).exp_m1();
        let prefactor = pow_m1
            .div(&delta.mul(&Interval::exact_u64(prec, p)))?
            .sqrt()?;
        let lambda = prefactor
            .mul(&self.norm2_mth_derivative(prec)?)
            .div(&norm1)?;
        Ok(FBounds {
            f0_lower: one,
            f0_upper: one_plus,
            f1_lower: lambda0,
            f1_upper: lambda1,
            fm_upper: lambda,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: Prec = 256;

    fn rel_to(x: &Interval, frozen: &str) -> f64 {
        let f = Interval::parse(P, frozen).unwrap();
        x.sub(&f).div(&f).unwrap().to_f64().abs()
    }

    #[test]
    fn parity_enforced() {
        assert!(WeightSpec::new(3, 2).is_err());
        assert!(WeightSpec::new(3, 3).is_ok());
        assert!(WeightSpec::new(2, 2).is_ok());
        assert!(WeightSpec::new(0, 1).is_err());
    }

    #[test]
    fn norm1_hand_values() {
        let w = WeightSpec::new(2, 1).unwrap();
        let eight_15 = Interval::parse(P, "8/15").unwrap();
        assert!(rel_to(&w.norm1(P).unwrap(), "8/15") < 1e-70);
        assert!(w.norm1(P).unwrap().sub(&eight_15).contains_zero());
        let w11 = WeightSpec::new(1, 1).unwrap();
        assert!(rel_to(&w11.norm1(P).unwrap(), "2/3") < 1e-70);
    }

    #[test]
    fn norm1_frozen_value() {
        let w = WeightSpec::new(2, 55).unwrap();
        assert!(rel_to(&w.norm1(P).unwrap(), "0.03240214275377345466750068") < 1e-24);
    }

    #[test]
    fn norm2_hand_value() {
        // m=2, n=1: ||f''||_2 = sqrt(204.8)
        let w = WeightSpec::new(2, 1).unwrap();
        let got = w.norm2_mth_derivative(P).unwrap();
        let expected = Interval::parse(P, "204.8").unwrap().sqrt().unwrap();
        let rel = got.sub(&expected).div(&expected).unwrap().to_f64().abs();
        assert!(rel < 1e-70, "{rel}");
    }

    #[test]
    fn norm2_matches_direct_integral_at_n3() {
        // direct expansion: f'' for (A t^3 (1-t))^2 integrates to
        // A^4 (900/9 - 5040/10 + 10416/11 - 9408/12 + 3136/13)
        let w = WeightSpec::new(2, 3).unwrap();
        let got = w.norm2_mth_derivative(P).unwrap();
        let a4 = w.a_pow_m(P).unwrap().mul(&w.a_pow_m(P).unwrap());
        let mut bracket = Interval::parse(P, "900/9").unwrap();
        bracket = bracket.sub(&Interval::parse(P, "5040/10").unwrap());
        bracket = bracket.add(&Interval::parse(P, "10416/11").unwrap());
        bracket = bracket.sub(&Interval::parse(P, "9408/12").unwrap());
        bracket = bracket.add(&Interval::parse(P, "3136/13").unwrap());
        let expected = a4.mul(&bracket).sqrt().unwrap();
        let rel = got.sub(&expected).div(&expected).unwrap().to_f64().abs();
        assert!(rel < 1e-60, "{rel}");
    }

    #[test]
    fn norm2_frozen_value() {
        let w = WeightSpec::new(2, 55).unwrap();
        let got = w.norm2_mth_derivative(P).unwrap();
        assert!(rel_to(&got, "6.211979438670780825441284e-26") < 1e-22);
    }

    #[test]
    fn nu_edges() {
        let w = WeightSpec::new(2, 5).unwrap();
        let zero = Interval::zero(P);
        assert_eq!(w.nu(P, &zero).unwrap().to_f64(), 0.0);
        let half = Interval::parse(P, "1/2").unwrap();
        let at_half = w.nu(P, &half).unwrap();
        let n1 = w.norm1(P).unwrap();
        let rel = at_half.sub(&n1).div(&n1).unwrap().to_f64().abs();
        assert!(rel < 1e-60, "nu(1/2) = ||f||_1, got rel {rel}");
        assert!(w.nu(P, &Interval::parse(P, "0.6").unwrap()).is_err());
    }

    #[test]
    fn nu_frozen_value() {
        let w = WeightSpec::new(2, 55).unwrap();
        let a = Interval::parse(P, "1.68957e-4").unwrap();
        let got = w.nu(P, &a).unwrap();
        assert!(rel_to(&got, "3.608438362540714588928616e-8") < 1e-20);
    }

    #[test]
    fn nu_monotone_in_a() {
        let w = WeightSpec::new(2, 9).unwrap();
        let mut prev = -1.0;
        for a in ["1e-4", "1e-3", "1e-2", "0.1", "0.3", "0.5"] {
            let v = w.nu(P, &Interval::parse(P, a).unwrap()).unwrap().to_f64();
            assert!(v >= prev, "nu not monotone at a = {a}");
            prev = v;
        }
    }

    #[test]
    fn mean_ratio_values() {
        let w = WeightSpec::new(2, 1).unwrap();
        let zero = Interval::zero(P);
        assert_eq!(w.mean_ratio(P, &zero).unwrap().to_f64(), 1.0);
        let d = Interval::parse(P, "1e-6").unwrap();
        let got = w.mean_ratio(P, &d).unwrap().to_f64();
        assert!((got - (1.0 + 5e-7)).abs() < 1e-20);
    }

    #[test]
    fn mean_ratio_converges_to_limit() {
        // |mean_ratio - (1 + n delta/(n+1))| decreases in m for fixed n, delta
        let d = Interval::parse(P, "1e-7").unwrap();
        let n = 5u32;
        let limit = 1.0 + 5.0 / 6.0 * 1e-7;
        let mut prev = f64::INFINITY;
        for m in [2u32, 4, 8, 16] {
            let w = WeightSpec::new(m, n).unwrap();
            let gap = (w.mean_ratio(P, &d).unwrap().to_f64() - limit).abs();
            assert!(gap < prev);
            prev = gap;
        }
    }

    #[test]
    fn f_bounds_hand_values() {
        let w = WeightSpec::new(2, 1).unwrap();
        let d = Interval::parse(P, "1e-9").unwrap();
        let fb = w.f_bounds(P, &d).unwrap();
        // lambda_0 = 2 / (8/15) = 3.75
        assert!((fb.f1_lower.to_f64() - 3.75).abs() < 1e-20);
        assert!(fb.f1_lower.hi() <= fb.f1_upper.hi());
        assert!(fb.f0_lower.to_f64() == 1.0);
        assert!(fb.fm_upper.is_strictly_positive());
        // prefactor -> 1 as delta -> 0: lambda approaches norm2/norm1
        let lam = fb.fm_upper.to_f64();
        let direct = w.norm2_mth_derivative(P).unwrap().to_f64() / w.norm1(P).unwrap().to_f64();
        assert!((lam / direct - 1.0).abs() < 1e-8);
    }

    #[test]
    fn f_bounds_rejects_bad_delta() {
        let w = WeightSpec::new(2, 1).unwrap();
        assert!(w.f_bounds(P, &Interval::zero(P)).is_err());
        assert!(w.f_bounds(P, &Interval::parse(P, "1e-3").unwrap()).is_err());
    }

    #[test]
    fn f_bounds_stable_for_tiny_delta() {
        let w = WeightSpec::new(2, 47).unwrap();
        let d = Interval::parse(P, "1.39801e-12").unwrap();
        let fb = w.f_bounds(P, &d).unwrap();
        assert!(fb.f1_lower.is_strictly_positive());
        assert!(fb.fm_upper.rel_width() < 1e-40);
    }
}
