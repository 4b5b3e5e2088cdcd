//! Directed-rounding interval arithmetic over MPFR floats.
//!
//! Every analytic quantity in this crate is carried as an enclosure
//! `[lo, hi]` with `lo` rounded toward −∞ and `hi` toward +∞ at each
//! operation. Upper bounds on subtracted terms read `.hi()`, lower bounds
//! on the positive term read `.lo()`, so a final "margin > 0" verdict
//! survives any rounding the evaluation performed.

use rug::float::Round;
use rug::ops::{AssignRound, Pow};
use rug::Float;

use crate::error::Error;

/// Working precision in bits.
pub type Prec = u32;

#[derive(Debug, Clone, PartialEq)]
pub struct Interval {
    lo: Float,
    hi: Float,
}

impl Interval {
    pub fn prec(&self) -> Prec {
        self.lo.prec()
    }

    pub fn lo(&self) -> &Float {
        &self.lo
    }

    pub fn hi(&self) -> &Float {
        &self.hi
    }

    /// Point interval from an exactly representable value.
    pub fn exact_u64(prec: Prec, v: u64) -> Self {
        let f = Float::with_val(prec, v);
        Interval { hi: f.clone(), lo: f }
    }

    pub fn exact_i64(prec: Prec, v: i64) -> Self {
        let f = Float::with_val(prec, v);
        Interval { hi: f.clone(), lo: f }
    }

    pub fn from_float(f: Float) -> Self {
        Interval { hi: f.clone(), lo: f }
    }

    /// f64 values are binary-exact, so this is a point interval.
    pub fn exact_f64(prec: Prec, v: f64) -> Self {
        let f = Float::with_val(prec, v);
        Interval { hi: f.clone(), lo: f }
    }

    /// Parse a decimal string into the tightest enclosing interval.
    /// Accepts plain decimals, scientific notation, and `p/q` rationals.
    pub fn parse(prec: Prec, s: &str) -> Result<Self, Error> {
        let s = s.trim();
        if let Some((num, den)) = s.split_once('/') {
            let n = Interval::parse(prec, num)?;
            let d = Interval::parse(prec, den)?;
            return n.div(&d);
        }
        let incomplete = Float::parse(s)
            .map_err(|_| Error::Parse(format!("not a decimal number: {s:?}")))?;
        let (lo, _) = Float::with_val_round(prec, incomplete, Round::Down);
        let incomplete = Float::parse(s).unwrap();
        let (hi, _) = Float::with_val_round(prec, incomplete, Round::Up);
        Ok(Interval { lo, hi })
    }

    pub fn pi(prec: Prec) -> Self {
        let (lo, _) = Float::with_val_round(prec, rug::float::Constant::Pi, Round::Down);
        let (hi, _) = Float::with_val_round(prec, rug::float::Constant::Pi, Round::Up);
        Interval { lo, hi }
    }

    /// Euler's number e = exp(1).
    pub fn e(prec: Prec) -> Self {
        Interval::exact_u64(prec, 1).exp()
    }

    pub fn zero(prec: Prec) -> Self {
        Interval::exact_u64(prec, 0)
    }

    pub fn one(prec: Prec) -> Self {
        Interval::exact_u64(prec, 1)
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.lo <= 0 && self.hi >= 0
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.lo > 0
    }

    pub fn is_strictly_negative(&self) -> bool {
        self.hi < 0
    }

    /// Midpoint as f64; saturates on overflow.
    pub fn to_f64(&self) -> f64 {
        let mid = Float::with_val(self.prec(), &self.lo + &self.hi) / 2u32;
        mid.to_f64()
    }

    pub fn add(&self, rhs: &Interval) -> Interval {
        let p = self.prec();
        let (lo, _) = Float::with_val_round(p, &self.lo + &rhs.lo, Round::Down);
        let (hi, _) = Float::with_val_round(p, &self.hi + &rhs.hi, Round::Up);
        Interval { lo, hi }
    }

    pub fn sub(&self, rhs: &Interval) -> Interval {
        let p = self.prec();
        let (lo, _) = Float::with_val_round(p, &self.lo - &rhs.hi, Round::Down);
        let (hi, _) = Float::with_val_round(p, &self.hi - &rhs.lo, Round::Up);
        Interval { lo, hi }
    }

    pub fn neg(&self) -> Interval {
        Interval {
            lo: -self.hi.clone(),
            hi: -self.lo.clone(),
        }
    }

    pub fn mul(&self, rhs: &Interval) -> Interval {
        let p = self.prec();
        let pairs = [
            (&self.lo, &rhs.lo),
            (&self.lo, &rhs.hi),
            (&self.hi, &rhs.lo),
            (&self.hi, &rhs.hi),
        ];
        let mut lo: Option<Float> = None;
        let mut hi: Option<Float> = None;
        for (a, b) in pairs {
            let (down, _) = Float::with_val_round(p, a * b, Round::Down);
            let (up, _) = Float::with_val_round(p, a * b, Round::Up);
            lo = Some(match lo {
                Some(l) if l <= down => l,
                _ => down,
            });
            hi = Some(match hi {
                Some(h) if h >= up => h,
                _ => up,
            });
        }
        Interval {
            lo: lo.unwrap(),
            hi: hi.unwrap(),
        }
    }

    pub fn div(&self, rhs: &Interval) -> Result<Interval, Error> {
        if rhs.contains_zero() {
            return Err(Error::Domain("division by interval containing zero".into()));
        }
        let p = self.prec();
        let pairs = [
            (&self.lo, &rhs.lo),
            (&self.lo, &rhs.hi),
            (&self.hi, &rhs.lo),
            (&self.hi, &rhs.hi),
        ];
        let mut lo: Option<Float> = None;
        let mut hi: Option<Float> = None;
        for (a, b) in pairs {
            let (down, _) = Float::with_val_round(p, a / b, Round::Down);
            let (up, _) = Float::with_val_round(p, a / b, Round::Up);
            lo = Some(match lo {
                Some(l) if l <= down => l,
                _ => down,
            });
            hi = Some(match hi {
                Some(h) if h >= up => h,
                _ => up,
            });
        }
        Ok(Interval {
            lo: lo.unwrap(),
            hi: hi.unwrap(),
        })
    }

    pub fn recip(&self) -> Result<Interval, Error> {
        Interval::one(self.prec()).div(self)
    }

    fn monotone_increasing<F>(&self, f: F) -> Interval
    where
        F: Fn(&Float, Round) -> Float,
    {
        Interval {
            lo: f(&self.lo, Round::Down),
            hi: f(&self.hi, Round::Up),
        }
    }

    pub fn ln(&self) -> Result<Interval, Error> {
        if self.lo <= 0 {
            return Err(Error::Domain("ln of non-positive interval".into()));
        }
        let p = self.prec();
        Ok(self.monotone_increasing(|x, r| {
            let mut out = Float::new(p);
            out.assign_round(x.ln_ref(), r);
            out
        }))
    }

    pub fn exp(&self) -> Interval {
        let p = self.prec();
        self.monotone_increasing(|x, r| {
            let mut out = Float::new(p);
            out.assign_round(x.exp_ref(), r);
            out
        })
    }

    /// exp(x) − 1, stable near zero.
    pub fn exp_m1(&self) -> Interval {
        let p = self.prec();
        self.monotone_increasing(|x, r| {
            let mut out = Float::new(p);
            out.assign_round(x.exp_m1_ref(), r);
            out
        })
    }

    /// ln(1 + x), stable near zero.
    pub fn ln_1p(&self) -> Result<Interval, Error> {
        if self.lo <= -1 {
            return Err(Error::Domain("ln_1p of interval at or below -1".into()));
        }
        let p = self.prec();
        Ok(self.monotone_increasing(|x, r| {
            let mut out = Float::new(p);
            out.assign_round(x.ln_1p_ref(), r);
            out
        }))
    }

    pub fn sqrt(&self) -> Result<Interval, Error> {
        if self.lo < 0 {
            return Err(Error::Domain("sqrt of negative interval".into()));
        }
        let p = self.prec();
        Ok(self.monotone_increasing(|x, r| {
            let mut out = Float::new(p);
            out.assign_round(x.sqrt_ref(), r);
            out
        }))
    }

    /// ln Γ(x); valid only on x ≥ 2 where ln Γ is increasing
    /// (every caller passes exact integer arguments ≥ 2).
    pub fn ln_gamma(&self) -> Result<Interval, Error> {
        if self.lo < 2 {
            return Err(Error::Domain("ln_gamma restricted to arguments >= 2".into()));
        }
        let p = self.prec();
        Ok(self.monotone_increasing(|x, r| {
            let mut out = Float::new(p);
            out.assign_round(x.ln_gamma_ref(), r);
            out
        }))
    }

    /// x^y for strictly positive base, via exp(y ln x).
    pub fn pow(&self, exponent: &Interval) -> Result<Interval, Error> {
        Ok(exponent.mul(&self.ln()?).exp())
    }

    /// x^n for small non-negative integer n; exact directed rounding per multiply.
    pub fn pow_u32(&self, n: u32) -> Interval {
        let p = self.prec();
        if n == 0 {
            return Interval::one(p);
        }
        // Positive base: plain directed powers. Otherwise fall back to repeated mul.
        if self.lo > 0 {
            return self.monotone_increasing(|x, r| {
                let mut out = Float::new(p);
                out.assign_round(x.pow(n), r);
                out
            });
        }
        let mut acc = self.clone();
        for _ in 1..n {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn min(&self, rhs: &Interval) -> Interval {
        Interval {
            lo: if self.lo <= rhs.lo {
                self.lo.clone()
            } else {
                rhs.lo.clone()
            },
            hi: if self.hi <= rhs.hi {
                self.hi.clone()
            } else {
                rhs.hi.clone()
            },
        }
    }

    pub fn max(&self, rhs: &Interval) -> Interval {
        Interval {
            lo: if self.lo >= rhs.lo {
                self.lo.clone()
            } else {
                rhs.lo.clone()
            },
            hi: if self.hi >= rhs.hi {
                self.hi.clone()
            } else {
                rhs.hi.clone()
            },
        }
    }

    /// Clamp the lower end up to zero. Sound when the enclosed quantity is
    /// known non-negative.
    pub fn max_zero(&self) -> Interval {
        let zero = Float::new(self.prec());
        Interval {
            lo: if self.lo < 0 { zero.clone() } else { self.lo.clone() },
            hi: if self.hi < 0 { zero } else { self.hi.clone() },
        }
    }

    /// Widen symmetrically by a relative factor 2^-bits of the magnitude.
    /// Used to absorb a declared (non-enclosure) truncation allowance.
    pub fn widen_rel_2exp(&self, bits: u32) -> Interval {
        let p = self.prec();
        let mag = if self.lo.clone().abs() > self.hi.clone().abs() {
            self.lo.clone().abs()
        } else {
            self.hi.clone().abs()
        };
        let eps = mag >> bits;
        let (lo, _) = Float::with_val_round(p, &self.lo - &eps, Round::Down);
        let (hi, _) = Float::with_val_round(p, &self.hi + &eps, Round::Up);
        Interval { lo, hi }
    }

    /// Add `tail` (a non-negative upper allowance) to the upper end only.
    pub fn add_upper(&self, tail: &Float) -> Interval {
        let p = self.prec();
        let (hi, _) = Float::with_val_round(p, &self.hi + tail, Round::Up);
        Interval {
            lo: self.lo.clone(),
            hi,
        }
    }

    /// Relative width (hi − lo)/|mid|; +inf when mid is 0 and width isn't.
    pub fn rel_width(&self) -> f64 {
        let p = self.prec();
        let width = Float::with_val(p, &self.hi - &self.lo);
        if width.is_zero() {
            return 0.0;
        }
        let mid = Float::with_val(p, &self.hi + &self.lo) / 2u32;
        if mid.is_zero() {
            return f64::INFINITY;
        }
        (width / mid.abs()).to_f64()
    }

    /// Round the midpoint to a new precision as a point interval (used only
    /// for diagnostics, never in certified paths).
    pub fn mid_float(&self) -> Float {
        Float::with_val(self.prec(), &self.lo + &self.hi) / 2u32
    }

    /// Decimal string of the lower end (round-down semantics preserved by MPFR's
    /// shortest-faithful formatting at full precision).
    pub fn lo_string(&self) -> String {
        self.lo.to_string_radix(10, None)
    }

    pub fn hi_string(&self) -> String {
        self.hi.to_string_radix(10, None)
    }

    /// Compact decimal with `digits` significant digits, from the midpoint.
    pub fn mid_string(&self, digits: usize) -> String {
        self.mid_float().to_string_radix(10, Some(digits))
    }
}

/// Sum a slice of intervals.
pub fn sum(prec: Prec, terms: &[Interval]) -> Interval {
    let mut acc = Interval::zero(prec);
    for t in terms {
        acc = acc.add(t);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const P: Prec = 128;

    #[test]
    fn parse_encloses_decimal() {
        let x = Interval::parse(P, "0.1").unwrap();
        assert!(x.lo() < x.hi(), "0.1 is not binary-representable");
        assert!(*x.lo() < 0.1000000001 && *x.hi() > 0.0999999999);
        let y = Interval::parse(P, "1/150").unwrap();
        let z = Interval::exact_u64(P, 1).div(&Interval::exact_u64(P, 150)).unwrap();
        assert_eq!(y, z);
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(Interval::parse(P, "not-a-number").is_err());
    }

    #[test]
    fn directed_division() {
        let one = Interval::exact_u64(P, 1);
        let three = Interval::exact_u64(P, 3);
        let third = one.div(&three).unwrap();
        assert!(third.lo() < third.hi());
        let back = third.mul(&three);
        assert!(*back.lo() <= 1 && *back.hi() >= 1);
    }

    #[test]
    fn division_by_zero_interval_fails() {
        let x = Interval::exact_u64(P, 1);
        let z = Interval::exact_i64(P, -1).add(&Interval::exact_u64(P, 1));
        assert!(x.div(&z).is_err());
    }

    #[test]
    fn exp_ln_roundtrip_encloses() {
        let x = Interval::parse(P, "2.5").unwrap();
        let y = x.ln().unwrap().exp();
        assert!(y.lo() <= x.lo() && y.hi() >= x.hi());
    }

    #[test]
    fn ln_gamma_factorial() {
        // ln Γ(5) = ln 24
        let x = Interval::exact_u64(P, 5).ln_gamma().unwrap();
        let expected = Interval::exact_u64(P, 24).ln().unwrap();
        assert!(x.lo() <= expected.hi() && x.hi() >= expected.lo());
        assert!(x.rel_width() < 1e-30);
    }

    #[test]
    fn higher_precision_tightens() {
        let coarse = Interval::parse(64, "0.1").unwrap();
        let fine = Interval::parse(256, "0.1").unwrap();
        assert!(fine.rel_width() < coarse.rel_width());
    }

    proptest! {
        #[test]
        fn mul_contains_true_product(a in -1e6f64..1e6, b in -1e6f64..1e6) {
            let ia = Interval::exact_f64(P, a);
            let ib = Interval::exact_f64(P, b);
            let prod = ia.mul(&ib);
            let exact = Float::with_val(P, a) * Float::with_val(P, b);
            prop_assert!(*prod.lo() <= exact && exact <= *prod.hi());
        }

        #[test]
        fn add_sub_inverse(a in -1e9f64..1e9, b in -1e9f64..1e9) {
            let ia = Interval::exact_f64(P, a);
            let ib = Interval::exact_f64(P, b);
            let out = ia.add(&ib).sub(&ib);
            prop_assert!(*out.lo() <= a && a <= *out.hi());
        }
    }
}
