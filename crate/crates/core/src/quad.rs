//! Fixed-order Gauss-Legendre quadrature at working precision.
//!
//! Nodes and weights are computed once per (precision, order) by Newton
//! iteration on the Legendre recurrence and cached. Panel integration sums
//! node values of an interval-valued integrand; the node positions themselves
//! are point values, so the result is an approximation that callers must
//! widen by their declared truncation allowance before using it in a bound.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use once_cell::sync::Lazy;
use rug::Float;

use crate::error::Result;
use crate::interval::{Interval, Prec};

pub const DEFAULT_ORDER: usize = 64;

#[derive(Debug)]
pub struct GaussLegendre {
    pub prec: Prec,
    /// Nodes on [-1, 1], ascending.
    pub nodes: Vec<Float>,
    pub weights: Vec<Float>,
}

static CACHE: Lazy<Mutex<HashMap<(Prec, usize), Arc<GaussLegendre>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// Legendre P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: &Float, prec: Prec) -> (Float, Float) {
    let mut p0 = Float::with_val(prec, 1);
    let mut p1 = Float::with_val(prec, x);
    for k in 2..=n {
        let a = Float::with_val(prec, 2 * k as u32 - 1) * x * &p1;
        let b = Float::with_val(prec, k as u32 - 1) * &p0;
        let p2 = (a - b) / Float::with_val(prec, k as u32);
        p0 = p1;
        p1 = p2;
    }
    // P_n'(x) = n (x P_n - P_{n-1}) / (x^2 - 1)
    let num = Float::with_val(prec, n as u32) * (Float::with_val(prec, x * &p1) - &p0);
    let den = Float::with_val(prec, x * x) - 1u32;
    (p1, num / den)
}

impl GaussLegendre {
    pub fn get(prec: Prec, order: usize) -> Arc<GaussLegendre> {
        let mut cache = CACHE.lock().unwrap();
        cache
            .entry((prec, order))
            .or_insert_with(|| Arc::new(GaussLegendre::compute(prec, order)))
            .clone()
    }

    fn compute(prec: Prec, order: usize) -> GaussLegendre {
        let work = prec + 64;
        let n = order;
        let mut nodes = vec![Float::new(prec); n];
        let mut weights = vec![Float::new(prec); n];
        let pi = std::f64::consts::PI;
        for i in 0..n.div_ceil(2) {
            let guess = (pi * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut x = Float::with_val(work, -guess);
            // Newton converges quadratically; 2 + log2(work) iterations suffice
            // from an f64-accurate seed, with a fixed cap for determinism.
            let iters = 8 + (64 - u64::from(work).leading_zeros());
            for _ in 0..iters {
                let (p, dp) = legendre(n, &x, work);
                x -= p / dp;
            }
            let (_, dp) = legendre(n, &x, work);
            let one_minus_x2 = Float::with_val(work, 1) - Float::with_val(work, &x * &x);
            let w = Float::with_val(work, 2) / (one_minus_x2 * Float::with_val(work, &dp * &dp));
            nodes[i] = Float::with_val(prec, &x);
            weights[i] = Float::with_val(prec, &w);
            nodes[n - 1 - i] = Float::with_val(prec, -x);
            weights[n - 1 - i] = Float::with_val(prec, w);
        }
        GaussLegendre { prec, nodes, weights }
    }

    /// Integrate `f` over [a, b].
    pub fn integrate<F>(&self, a: &Interval, b: &Interval, f: F) -> Result<Interval>
    where
        F: Fn(&Interval) -> Result<Interval>,
    {
        let two = Interval::exact_u64(self.prec, 2);
        let half_width = b.sub(a).div(&two)?;
        let center = b.add(a).div(&two)?;
        let mut acc = Interval::zero(self.prec);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let xi = Interval::from_float(x.clone());
            let wi = Interval::from_float(w.clone());
            let v = center.add(&half_width.mul(&xi));
            acc = acc.add(&wi.mul(&f(&v)?));
        }
        Ok(acc.mul(&half_width))
    }
}
