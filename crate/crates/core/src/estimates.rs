//! Zero-counting and zero-density machinery: P(T), R(T), D(sigma, T) and the
//! five zero-sum estimates S1-S5.
//!
//! S1-S3 are closed forms with explicit error terms. S4 and S5 need the tail
//! integral (m+1) * int_H^inf D(sigma, t) t^-(m+2) dt, evaluated by
//! Gauss-Legendre panels after the substitution t = H e^v, with an analytic
//! bound on the truncated tail. Every estimate is an upper bound on its zero
//! sum; consumers read the upper end of the returned enclosure.

use std::collections::HashMap;
use std::sync::Mutex;

use once_cell::sync::Lazy;

use crate::constants::{ResolvedConstants, ResolvedDensityEntry};
use crate::error::{Error, Result};
use crate::interval::{Interval, Prec};
use crate::quad::{GaussLegendre, DEFAULT_ORDER};

/// Validated inputs for the S-estimates at one certification.
pub struct SumEstimateInputs<'a> {
    pub m: u32,
    pub t0: Interval,
    pub t1: Interval,
    pub sigma: Interval,
    pub x0: Interval,
    pub constants: &'a ResolvedConstants,
}

impl SumEstimateInputs<'_> {
    pub fn validate(&self) -> Result<()> {
        let c = self.constants;
        let two_pi = two_pi(c.prec);
        if self.m < 2 {
            return Err(Error::Domain("estimates require m >= 2".into()));
        }
        if self.t0.lo() < two_pi.hi() {
            return Err(Error::Domain("window requires T0 >= 2*pi".into()));
        }
        if self.t1.lo() < self.t0.lo() || self.t1.hi() > c.h.hi() {
            return Err(Error::Domain("window requires T0 <= T1 <= H".into()));
        }
        if *self.sigma.lo() <= 0.5 || *self.sigma.hi() >= 1u32 {
            return Err(Error::Domain("sigma must lie in (1/2, 1)".into()));
        }
        if self.x0.lo() < c.x0_floor.hi() {
            return Err(Error::Domain("X0 below the admissible floor".into()));
        }
        c.density_entry(&self.sigma)?;
        Ok(())
    }
}

pub fn two_pi(prec: Prec) -> Interval {
    Interval::pi(prec).mul(&Interval::exact_u64(prec, 2))
}

/// Main term of the zero-counting function:
/// P(T) = T/2pi log(T/2pi) - T/2pi + 7/8.
pub fn p_main(prec: Prec, t: &Interval) -> Result<Interval> {
    if !t.is_strictly_positive() {
        return Err(Error::Domain("P(T) requires T > 0".into()));
    }
    let s = t.div(&two_pi(prec))?;
    let seven_eighths = Interval::exact_u64(prec, 7).div(&Interval::exact_u64(prec, 8))?;
    Ok(s.mul(&s.ln()?).sub(&s).add(&seven_eighths))
}

/// Error bound R(T) = a1 log T + a2 log log T + a3, valid for T >= e.
pub fn r_bound(c: &ResolvedConstants, t: &Interval) -> Result<Interval> {
    if t.lo() < c.zero_count_t0.lo() {
        return Err(Error::Domain("R(T) requires T >= e".into()));
    }
    let lt = t.ln()?;
    Ok(c.a1.mul(&lt).add(&c.a2.mul(&lt.ln()?)).add(&c.a3))
}

/// Zero-density bound
/// D(sigma, T) = A (log kT)^{2 sigma} (log T)^{5 - 4 sigma} T^{8(1-sigma)/3}
///             + B (log T)^2, valid for T >= H.
pub fn d_bound(
    c: &ResolvedConstants,
    entry: &ResolvedDensityEntry,
    t: &Interval,
) -> Result<Interval> {
    if t.lo() < c.h.lo() {
        return Err(Error::Domain("D(sigma, T) requires T >= H".into()));
    }
    let prec = c.prec;
    let one = Interval::one(prec);
    let lt = t.ln()?;
    let lkt = c.k.mul(t).ln()?;
    let two_sigma = entry.sigma.mul(&Interval::exact_u64(prec, 2));
    let five_m4s = Interval::exact_u64(prec, 5).sub(&entry.sigma.mul(&Interval::exact_u64(prec, 4)));
    let t_exp = one
        .sub(&entry.sigma)
        .mul(&Interval::exact_u64(prec, 8))
        .div(&Interval::exact_u64(prec, 3))?;
    let main = entry
        .a
        .mul(&lkt.pow(&two_sigma)?)
        .mul(&lt.pow(&five_m4s)?)
        .mul(&t.pow(&t_exp)?);
    Ok(main.add(&entry.b.mul(&lt.mul(&lt))))
}

/// E_{T0} of the Brent-Platt-Trudgian lemma for phi(t) = 1/t.
fn e_s1(c: &ResolvedConstants, t0: &Interval) -> Result<Interval> {
    let t0_sq = t0.mul(t0);
    let two = Interval::exact_u64(c.prec, 2);
    let a = c.a0_bpt.add(&c.a1_bpt.mul(&t0.ln()?)).mul(&two).div(&t0_sq)?;
    let b = c.a1_bpt.add(&c.a2_bpt).div(&t0_sq)?;
    Ok(a.add(&b))
}

/// S1(T0, T1) >= sum of 1/gamma over T0 < gamma <= T1.
pub fn s1(c: &ResolvedConstants, t0: &Interval, t1: &Interval) -> Result<Interval> {
    let prec = c.prec;
    let two_pi = two_pi(prec);
    if t0.lo() < two_pi.hi() || t1.lo() < t0.lo() || t1.hi() > c.h.hi() {
        return Err(Error::Domain("S1 requires 2*pi <= T0 <= T1 <= H".into()));
    }
    let half = Interval::one(prec).div(&Interval::exact_u64(prec, 2))?;
    let main = t1
        .div(t0)?
        .ln()?
        .mul(&t0.mul(t1).sqrt()?.div(&two_pi)?.ln()?)
        .div(&two_pi)?;
    let r0_term = r_bound(c, t0)?.div(t0)?;
    let r1_term = r_bound(c, t1)?.add(&half).div(t1)?;
    Ok(main.add(&r0_term).add(&r1_term).add(&e_s1(c, t0)?))
}

/// Antiderivative factor (1 + m log(t/2pi)) / (m^2 t^m) of the S2/S3 main term.
fn s2_primitive(c: &ResolvedConstants, m: u32, t: &Interval) -> Result<Interval> {
    let prec = c.prec;
    let one = Interval::one(prec);
    let m_i = Interval::exact_u64(prec, u64::from(m));
    let num = one.add(&m_i.mul(&t.div(&two_pi(prec))?.ln()?));
    num.div(&m_i.mul(&m_i).mul(&t.pow_u32(m)))
}

/// Windowed S2-form bound: sum of gamma^-(m+1) over U < gamma <= V.
/// S2(m, T1) proper is the V = H instance.
pub fn s2_window(c: &ResolvedConstants, m: u32, u: &Interval, v: &Interval) -> Result<Interval> {
    let prec = c.prec;
    let two_pi = two_pi(prec);
    if m < 2 {
        return Err(Error::Domain("S2 requires m >= 2".into()));
    }
    if u.lo() < two_pi.hi() || v.lo() < u.lo() {
        return Err(Error::Domain("S2 requires 2*pi <= U <= V".into()));
    }
    let half = Interval::one(prec).div(&Interval::exact_u64(prec, 2))?;
    let main = s2_primitive(c, m, u)?
        .sub(&s2_primitive(c, m, v)?)
        .div(&two_pi)?
        .max_zero();
    let ru = r_bound(c, u)?.div(&u.pow_u32(m + 1))?;
    let rv = r_bound(c, v)?.add(&half).div(&v.pow_u32(m + 1))?;
    // E-dot_{m,U}
    let two_m1 = Interval::exact_u64(prec, 2 * u64::from(m) + 2);
    let u_m2 = u.pow_u32(m + 2);
    let e_dot = c
        .a0_bpt
        .add(&c.a1_bpt.mul(&u.ln()?))
        .mul(&two_m1)
        .div(&u_m2)?
        .add(&c.a1_bpt.add(&c.a2_bpt).div(&u_m2)?);
    Ok(main.add(&ru).add(&rv).add(&e_dot))
}

/// S2(m, T1) >= sum of gamma^-(m+1) over T1 < gamma <= H.
pub fn s2(c: &ResolvedConstants, m: u32, t1: &Interval) -> Result<Interval> {
    if t1.hi() > c.h.hi() {
        return Err(Error::Domain("S2 requires T1 <= H".into()));
    }
    s2_window(c, m, t1, &c.h)
}

/// S3(m) >= sum of gamma^-(m+1) over gamma > H.
pub fn s3(c: &ResolvedConstants, m: u32) -> Result<Interval> {
    if m < 2 {
        return Err(Error::Domain("S3 requires m >= 2".into()));
    }
    let prec = c.prec;
    let main = s2_primitive(c, m, &c.h)?.div(&two_pi(prec))?;
    let r_term = r_bound(c, &c.h)?.div(&c.h.pow_u32(m + 1))?;
    let two_m1 = Interval::exact_u64(prec, 2 * u64::from(m) + 2);
    let e_ddot = c
        .a0_bpt
        .add(&c.a1_bpt.mul(&c.h.ln()?))
        .mul(&two_m1)
        .div(&c.h.pow_u32(m + 1))?
        .add(&c.a1_bpt.add(&c.a2_bpt).div(&c.h.pow_u32(m + 2))?);
    Ok(main.add(&r_term).add(&e_ddot))
}

/// Shared pieces of the S4/S5 integrands after substituting t = H e^v.
struct DensityTail {
    prec: Prec,
    /// log H
    l: Interval,
    /// log(kH)
    lk: Interval,
    sigma: Interval,
    a: Interval,
    b: Interval,
    /// Decay rate of the A-part: beta = m + 1 - 8(1-sigma)/3.
    beta: Interval,
    /// H^-beta
    h_neg_beta: Interval,
    /// H^-(m+1)
    h_neg_m1: Interval,
    m: u32,
}

impl DensityTail {
    fn new(c: &ResolvedConstants, m: u32, entry: &ResolvedDensityEntry) -> Result<Self> {
        if m < 2 {
            return Err(Error::Domain("S4/S5 require m >= 2".into()));
        }
        let prec = c.prec;
        let one = Interval::one(prec);
        let eight_thirds = Interval::exact_u64(prec, 8).div(&Interval::exact_u64(prec, 3))?;
        let beta = Interval::exact_u64(prec, u64::from(m) + 1)
            .sub(&eight_thirds.mul(&one.sub(&entry.sigma)));
        if !beta.is_strictly_positive() {
            return Err(Error::Domain(
                "S4 integral diverges: need 8(1-sigma)/3 < m+1".into(),
            ));
        }
        let l = c.h.ln()?;
        let lk = c.k.mul(&c.h).ln()?;
        let h_neg_beta = beta.neg().mul(&l).exp();
        let h_neg_m1 = c.h.pow_u32(m + 1).recip()?;
        Ok(DensityTail {
            prec,
            l,
            lk,
            sigma: entry.sigma.clone(),
            a: entry.a.clone(),
            b: entry.b.clone(),
            beta,
            h_neg_beta,
            h_neg_m1,
            m,
        })
    }

    fn two_sigma(&self) -> Interval {
        self.sigma.mul(&Interval::exact_u64(self.prec, 2))
    }

    fn five_m4s(&self) -> Interval {
        Interval::exact_u64(self.prec, 5)
            .sub(&self.sigma.mul(&Interval::exact_u64(self.prec, 4)))
    }

    /// Truncation point: far enough that the tail is below 2^-(2 prec) of
    /// the integrand scale. Even, so length-2 panels tile exactly.
    fn v_star(&self) -> u32 {
        let beta_lo = self.beta.to_f64().min(f64::from(self.m) + 1.0);
        let v = (2.0 * f64::from(self.prec) * std::f64::consts::LN_2 / beta_lo).ceil() as u32;
        (v + v % 2).max(8)
    }

    /// By-parts integrand: (m+1) D(sigma, H e^v) (H e^v)^-(m+1).
    fn integrand_by_parts(&self, v: &Interval) -> Result<Interval> {
        let m1 = Interval::exact_u64(self.prec, u64::from(self.m) + 1);
        let lt = self.l.add(v);
        let lkt = self.lk.add(v);
        let a_part = self
            .a
            .mul(&lkt.pow(&self.two_sigma())?)
            .mul(&lt.pow(&self.five_m4s())?)
            .mul(&self.h_neg_beta)
            .mul(&self.beta.neg().mul(v).exp());
        let b_part = self
            .b
            .mul(&lt.mul(&lt))
            .mul(&self.h_neg_m1)
            .mul(&m1.neg().mul(v).exp());
        Ok(m1.mul(&a_part.add(&b_part)))
    }

    /// Derivative-route integrand: dD/dt (sigma, t) * t^-m at t = H e^v.
    fn integrand_derivative(&self, v: &Interval) -> Result<Interval> {
        let prec = self.prec;
        let lt = self.l.add(v);
        let lkt = self.lk.add(v);
        let two_sigma = self.two_sigma();
        let five_m4s = self.five_m4s();
        let eight_thirds = Interval::exact_u64(prec, 8).div(&Interval::exact_u64(prec, 3))?;
        let log_factor = two_sigma
            .div(&lkt)?
            .add(&five_m4s.div(&lt)?)
            .add(&eight_thirds.mul(&Interval::one(prec).sub(&self.sigma)));
        let a_part = self
            .a
            .mul(&lkt.pow(&two_sigma)?)
            .mul(&lt.pow(&five_m4s)?)
            .mul(&log_factor)
            .mul(&self.h_neg_beta)
            .mul(&self.beta.neg().mul(v).exp());
        let m1 = Interval::exact_u64(prec, u64::from(self.m) + 1);
        let b_part = Interval::exact_u64(prec, 2)
            .mul(&self.b)
            .mul(&lt)
            .mul(&self.h_neg_m1)
            .mul(&m1.neg().mul(v).exp());
        Ok(a_part.add(&b_part))
    }

    /// Analytic upper bound on the by-parts integral over v > v_star.
    fn tail_bound(&self, v_star: u32) -> Result<Interval> {
        let prec = self.prec;
        let vs = Interval::exact_u64(prec, u64::from(v_star));
        let m1 = Interval::exact_u64(prec, u64::from(self.m) + 1);
        // B part: exact closed form of (m+1) B H^-(m+1) int (L+v)^2 e^-(m+1)v dv.
        let lvs = self.l.add(&vs);
        let two = Interval::exact_u64(prec, 2);
        let bracket = lvs
            .mul(&lvs)
            .div(&m1)?
            .add(&two.mul(&lvs).div(&m1.mul(&m1))?)
            .add(&two.div(&m1.mul(&m1).mul(&m1))?);
        let tail_b = m1
            .mul(&self.b)
            .mul(&self.h_neg_m1)
            .mul(&m1.neg().mul(&vs).exp())
            .mul(&bracket);
        // A part: the log-derivative of the integrand is at most
        // s* = 2 sigma/(Lk+v*) + (5-4 sigma)/(L+v*) - beta < 0 for v >= v*,
        // so the integrand is dominated by h(v*) e^{s* (v - v*)}.
        let lkvs = self.lk.add(&vs);
        let s_star = self
            .two_sigma()
            .div(&lkvs)?
            .add(&self.five_m4s().div(&lvs)?)
            .sub(&self.beta);
        if !s_star.is_strictly_negative() {
            return Err(Error::Domain(
                "tail decay rate not negative; raise the truncation point".into(),
            ));
        }
        let h_at_vs = m1.mul(
            &self
                .a
                .mul(&lkvs.pow(&self.two_sigma())?)
                .mul(&lvs.pow(&self.five_m4s())?)
                .mul(&self.h_neg_beta)
                .mul(&self.beta.neg().mul(&vs).exp()),
        );
        let tail_a = h_at_vs.div(&s_star.neg())?;
        Ok(tail_a.add(&tail_b))
    }

    fn integrate<F>(&self, v_star: u32, f: F) -> Result<Interval>
    where
        F: Fn(&Interval) -> Result<Interval>,
    {
        let gl = GaussLegendre::get(self.prec, DEFAULT_ORDER);
        let mut acc = Interval::zero(self.prec);
        let mut a = 0u64;
        while a < u64::from(v_star) {
            let lo = Interval::exact_u64(self.prec, a);
            let hi = Interval::exact_u64(self.prec, a + 2);
            acc = acc.add(&gl.integrate(&lo, &hi, &f)?);
            a += 2;
        }
        Ok(acc)
    }
}

type S4Key = (u32, String, Prec);
static S4_CACHE: Lazy<Mutex<HashMap<S4Key, Interval>>> = Lazy::new(|| Mutex::new(HashMap::new()));

/// S4(m, sigma) >= sum of gamma^-(m+1) over zeros with beta > sigma,
/// gamma > H, via (m+1) int_H^inf D(sigma, t) t^-(m+2) dt.
pub fn s4(c: &ResolvedConstants, m: u32, entry: &ResolvedDensityEntry) -> Result<Interval> {
    let key = (m, entry.sigma_label.clone(), c.prec);
    if let Some(v) = S4_CACHE.lock().unwrap().get(&key) {
        return Ok(v.clone());
    }
    let tail = DensityTail::new(c, m, entry)?;
    let v_star = tail.v_star();
    let integral = tail.integrate(v_star, |v| tail.integrand_by_parts(v))?;
    let bound = tail.tail_bound(v_star)?;
    let out = integral
        .add_upper(bound.hi())
        .widen_rel_2exp(c.prec / 2);
    S4_CACHE.lock().unwrap().insert(key, out.clone());
    Ok(out)
}

/// S4 via the original form D(sigma,H) H^-(m+1) + int dD/dt t^-(m+1) dt.
/// Kept as an independent cross-check of the by-parts route.
pub fn s4_derivative_route(
    c: &ResolvedConstants,
    m: u32,
    entry: &ResolvedDensityEntry,
) -> Result<Interval> {
    let tail = DensityTail::new(c, m, entry)?;
    let v_star = tail.v_star();
    let integral = tail.integrate(v_star, |v| tail.integrand_derivative(v))?;
    // int_{t*}^inf dD/dt t^-(m+1) dt <= (m+1) int_{t*}^inf D t^-(m+2) dt,
    // so the by-parts tail bound dominates here as well.
    let bound = tail.tail_bound(v_star)?;
    let boundary = d_bound(c, entry, &c.h)?.div(&c.h.pow_u32(m + 1))?;
    Ok(boundary
        .add(&integral.add_upper(bound.hi()))
        .widen_rel_2exp(c.prec / 2))
}

/// S5(X0, m, sigma): as S4 but with the boundary term damped by
/// X0^{-1/(R0 log H)}. Reuses the S4 integral, subtracting the difference of
/// boundary coefficients.
pub fn s5(
    c: &ResolvedConstants,
    x0: &Interval,
    m: u32,
    entry: &ResolvedDensityEntry,
) -> Result<Interval> {
    if x0.lo() < c.x0_floor.lo() {
        return Err(Error::Domain("S5 requires X0 >= X0_floor".into()));
    }
    let s4_val = s4(c, m, entry)?;
    let damp = x0
        .pow(&c.r0.mul(&c.h.ln()?).recip()?.neg())?;
    let boundary = d_bound(c, entry, &c.h)?.div(&c.h.pow_u32(m + 1))?;
    let correction = boundary.mul(&Interval::one(c.prec).sub(&damp)).max_zero();
    Ok(s4_val.sub(&correction))
}
